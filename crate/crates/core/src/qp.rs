//! Primal active-set solver for box-constrained convex QPs:
//!
//! ```text
//! minimize    0.5 x'Hx + g'x
//! subject to  lo <= x <= hi
//! ```
//!
//! With only bound constraints the working set is a set of pinned
//! coordinates; each iteration solves the reduced Newton system on the free
//! coordinates and either takes the full step, stops at the first blocking
//! bound, or releases the bound with the wrong-signed multiplier.

use nalgebra::{DMatrix, DVector};

use crate::error::{AccError, AccResult};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QpSettings {
    pub max_iterations: usize,
    /// Tolerance on the projected-gradient KKT residual.
    pub tolerance: f64,
}

impl Default for QpSettings {
    fn default() -> Self {
        Self {
            max_iterations: 100,
            tolerance: 1e-8,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QpSolution {
    pub x: DVector<f64>,
    pub iterations: usize,
    pub kkt_residual: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Bound {
    Free,
    Lower,
    Upper,
}

pub fn qp_cost(h: &DMatrix<f64>, g: &DVector<f64>, x: &DVector<f64>) -> f64 {
    0.5 * x.dot(&(h * x)) + g.dot(x)
}

/// `max |x - clamp(x - grad)|`, zero exactly at a KKT point.
pub fn kkt_residual(h: &DMatrix<f64>, g: &DVector<f64>, lo: &DVector<f64>, hi: &DVector<f64>, x: &DVector<f64>) -> f64 {
    let grad = h * x + g;
    (0..x.len())
        .map(|i| (x[i] - (x[i] - grad[i]).clamp(lo[i], hi[i])).abs())
        .fold(0.0, f64::max)
}

pub fn solve_box_qp(
    h: &DMatrix<f64>,
    g: &DVector<f64>,
    lo: &DVector<f64>,
    hi: &DVector<f64>,
    warm_start: Option<&DVector<f64>>,
    settings: &QpSettings,
) -> AccResult<QpSolution> {
    let n = g.len();
    if h.nrows() != n || h.ncols() != n || lo.len() != n || hi.len() != n {
        return Err(AccError::InvalidParameter(format!(
            "QP dimension mismatch: H {}x{}, g {n}, lo {}, hi {}",
            h.nrows(),
            h.ncols(),
            lo.len(),
            hi.len()
        )));
    }
    if (0..n).any(|i| !(lo[i] <= hi[i])) {
        return Err(AccError::InvalidParameter("QP bounds cross".into()));
    }

    let mut x = match warm_start {
        Some(x0) if x0.len() == n => x0.clone(),
        _ => DVector::zeros(n),
    };
    for i in 0..n {
        x[i] = x[i].clamp(lo[i], hi[i]);
    }
    let mut working = vec![Bound::Free; n];
    let diag_scale = (0..n).map(|i| h[(i, i)].abs()).fold(0.0, f64::max).max(1.0);

    for iteration in 1..=settings.max_iterations {
        let grad = h * &x + g;
        let free: Vec<usize> = (0..n).filter(|&i| working[i] == Bound::Free).collect();

        let step = newton_step(h, &grad, &free, diag_scale);
        let step_norm = step.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let x_norm = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));

        if step_norm <= 1e-14 * (1.0 + x_norm) {
            // Stationary on the free subspace: check multiplier signs.
            let worst = (0..n)
                .filter_map(|i| {
                    let violation = match working[i] {
                        Bound::Free => return None,
                        Bound::Lower => -grad[i],
                        Bound::Upper => grad[i],
                    };
                    (violation > 0.0).then_some((i, violation))
                })
                .max_by(|a, b| a.1.total_cmp(&b.1));
            match worst {
                Some((i, violation)) if violation > settings.tolerance * 1e-3 => {
                    working[i] = Bound::Free;
                }
                _ => {
                    let residual = kkt_residual(h, g, lo, hi, &x);
                    if residual <= settings.tolerance {
                        return Ok(QpSolution {
                            x,
                            iterations: iteration,
                            kkt_residual: residual,
                        });
                    }
                    return Err(AccError::SolverNonConvergence {
                        iterations: iteration,
                        residual,
                    });
                }
            }
            continue;
        }

        let mut alpha = 1.0;
        let mut blocking: Option<(usize, Bound)> = None;
        for (k, &i) in free.iter().enumerate() {
            let p = step[k];
            let (limit, side) = if p < 0.0 {
                ((lo[i] - x[i]) / p, Bound::Lower)
            } else if p > 0.0 {
                ((hi[i] - x[i]) / p, Bound::Upper)
            } else {
                continue;
            };
            if limit < alpha {
                alpha = limit.max(0.0);
                blocking = Some((i, side));
            }
        }
        for (k, &i) in free.iter().enumerate() {
            x[i] += alpha * step[k];
        }
        if let Some((i, side)) = blocking {
            x[i] = if side == Bound::Lower { lo[i] } else { hi[i] };
            working[i] = side;
        }
    }

    let residual = kkt_residual(h, g, lo, hi, &x);
    if residual <= settings.tolerance {
        Ok(QpSolution {
            x,
            iterations: settings.max_iterations,
            kkt_residual: residual,
        })
    } else {
        Err(AccError::SolverNonConvergence {
            iterations: settings.max_iterations,
            residual,
        })
    }
}

/// Solves `H_FF p = -grad_F`. A PSD but singular block is regularised by a
/// tiny ridge, which picks the minimum-norm-like step among optimal moves.
fn newton_step(h: &DMatrix<f64>, grad: &DVector<f64>, free: &[usize], diag_scale: f64) -> Vec<f64> {
    let m = free.len();
    if m == 0 {
        return Vec::new();
    }
    let mut h_ff = DMatrix::from_fn(m, m, |r, c| h[(free[r], free[c])]);
    let rhs = DVector::from_fn(m, |r, _| -grad[free[r]]);
    if let Some(chol) = h_ff.clone().cholesky() {
        return chol.solve(&rhs).iter().copied().collect();
    }
    for r in 0..m {
        h_ff[(r, r)] += 1e-12 * diag_scale;
    }
    match h_ff.clone().cholesky() {
        Some(chol) => chol.solve(&rhs).iter().copied().collect(),
        None => h_ff
            .lu()
            .solve(&rhs)
            .map(|p| p.iter().copied().collect())
            .unwrap_or_else(|| vec![0.0; m]),
    }
}
