//! Box-constrained Nelder–Mead minimization.
//!
//! Trial points are clamped into the box before evaluation, so the simplex
//! can collapse onto a face but never leave the feasible region.

/// Settings for [`minimize`].
#[derive(Debug, Clone)]
pub struct Options {
    /// Initial simplex edge along each coordinate.
    pub initial_step: Vec<f64>,
    /// Stop when every vertex lies within this distance (max-norm) of the best.
    pub xtol: f64,
    /// ... and every vertex value within this of the best.
    pub ftol: f64,
    pub max_evals: usize,
    /// Fresh simplices built around the best point after convergence.
    pub restarts: usize,
}

impl Options {
    pub fn new(dim: usize) -> Self {
        Self {
            initial_step: vec![0.1; dim],
            xtol: 1e-10,
            ftol: 1e-15,
            max_evals: 20_000,
            restarts: 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub evals: usize,
    pub converged: bool,
}

fn clamp(x: &mut [f64], lo: &[f64], hi: &[f64]) {
    for ((xi, l), h) in x.iter_mut().zip(lo).zip(hi) {
        *xi = xi.clamp(*l, *h);
    }
}

/// Minimizes `f` inside the box `[lo, hi]` starting from `x0`.
///
/// Non-finite objective values are treated as `+∞`.
pub fn minimize<F: FnMut(&[f64]) -> f64>(
    mut f: F,
    x0: &[f64],
    lo: &[f64],
    hi: &[f64],
    opts: &Options,
) -> Minimum {
    let n = x0.len();
    assert!(n > 0 && lo.len() == n && hi.len() == n && opts.initial_step.len() == n);
    let mut evals = 0;
    let mut eval = |x: &[f64], evals: &mut usize| {
        *evals += 1;
        let v = f(x);
        if v.is_finite() {
            v
        } else {
            f64::INFINITY
        }
    };

    let mut best = x0.to_vec();
    clamp(&mut best, lo, hi);
    let mut best_value = eval(&best, &mut evals);
    let mut converged = false;
    let mut scale = 1.0;

    for _ in 0..=opts.restarts {
        let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
        simplex.push(best.clone());
        for i in 0..n {
            let mut v = best.clone();
            let step = opts.initial_step[i] * scale;
            // Step inward when the vertex would sit outside the box.
            v[i] = if v[i] + step <= hi[i] {
                v[i] + step
            } else {
                v[i] - step
            };
            clamp(&mut v, lo, hi);
            simplex.push(v);
        }
        let mut values: Vec<f64> = Vec::with_capacity(n + 1);
        values.push(best_value);
        for v in &simplex[1..] {
            values.push(eval(v, &mut evals));
        }

        converged = false;
        while evals < opts.max_evals {
            let mut order: Vec<usize> = (0..=n).collect();
            order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
            simplex = order.iter().map(|&i| simplex[i].clone()).collect();
            values = order.iter().map(|&i| values[i]).collect();

            let x_spread = simplex[1..]
                .iter()
                .flat_map(|v| v.iter().zip(&simplex[0]).map(|(a, b)| (a - b).abs()))
                .fold(0.0, f64::max);
            let f_spread = values[n] - values[0];
            if x_spread <= opts.xtol && f_spread <= opts.ftol {
                converged = true;
                break;
            }

            let mut centroid = vec![0.0; n];
            for v in &simplex[..n] {
                for (c, x) in centroid.iter_mut().zip(v) {
                    *c += x / n as f64;
                }
            }
            let along = |t: f64| {
                let mut p: Vec<f64> = centroid
                    .iter()
                    .zip(&simplex[n])
                    .map(|(c, w)| c + t * (c - w))
                    .collect();
                clamp(&mut p, lo, hi);
                p
            };

            let reflected = along(1.0);
            let fr = eval(&reflected, &mut evals);
            if fr < values[0] {
                let expanded = along(2.0);
                let fe = eval(&expanded, &mut evals);
                if fe < fr {
                    simplex[n] = expanded;
                    values[n] = fe;
                } else {
                    simplex[n] = reflected;
                    values[n] = fr;
                }
                continue;
            }
            if fr < values[n - 1] {
                simplex[n] = reflected;
                values[n] = fr;
                continue;
            }
            let (contracted, fc) = if fr < values[n] {
                let p = along(0.5);
                let v = eval(&p, &mut evals);
                (p, v)
            } else {
                let p = along(-0.5);
                let v = eval(&p, &mut evals);
                (p, v)
            };
            if fc < values[n].min(fr) {
                simplex[n] = contracted;
                values[n] = fc;
                continue;
            }
            // Shrink towards the best vertex.
            for i in 1..=n {
                let shrunk: Vec<f64> = simplex[0]
                    .iter()
                    .zip(&simplex[i])
                    .map(|(b, x)| b + 0.5 * (x - b))
                    .collect();
                values[i] = eval(&shrunk, &mut evals);
                simplex[i] = shrunk;
            }
        }

        let (i_best, &v_best) = values
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .expect("simplex is nonempty");
        let improved = v_best < best_value;
        if v_best <= best_value {
            best_value = v_best;
            best = simplex[i_best].clone();
        }
        if (!improved && converged) || evals >= opts.max_evals {
            break;
        }
        scale *= 0.1;
    }

    Minimum {
        x: best,
        value: best_value,
        evals,
        converged,
    }
}
