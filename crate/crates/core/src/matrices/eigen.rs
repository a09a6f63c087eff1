use crate::error::{Error, Result};

use super::BandedMatrix;

pub const DEFAULT_SWEEP_CAP: usize = 50;

/// Eigenvalues of a banded symmetric matrix, ascending.
///
/// Cyclic Jacobi rotations on a dense copy, stopping once the off-diagonal
/// Frobenius mass drops below `tol · ‖Y‖_F`.
pub fn symmetric_eigenvalues(y: &BandedMatrix, tol: f64) -> Result<Vec<f64>> {
    let p = y.dim();
    let mut a = vec![0.0; p * p];
    for d in 0..=y.bandwidth() {
        for (i, &v) in y.diagonal(d).iter().enumerate() {
            a[i * p + i + d] = v;
            a[(i + d) * p + i] = v;
        }
    }
    jacobi_eigenvalues(&mut a, p, tol, DEFAULT_SWEEP_CAP)
}

/// Cyclic Jacobi on a dense row-major symmetric matrix, which is destroyed.
pub fn jacobi_eigenvalues(a: &mut [f64], p: usize, tol: f64, sweep_cap: usize) -> Result<Vec<f64>> {
    if !(tol > 0.0) {
        return Err(Error::domain(format!("tolerance must be positive, got {tol}")));
    }
    assert_eq!(a.len(), p * p, "matrix storage does not match dimension");
    let total: f64 = a.iter().map(|v| v * v).sum::<f64>().sqrt();
    let off = |a: &[f64]| -> f64 {
        let mut s = 0.0;
        for i in 0..p {
            for j in i + 1..p {
                s += a[i * p + j] * a[i * p + j];
            }
        }
        (2.0 * s).sqrt()
    };

    let mut residual = off(a);
    let mut sweep = 0;
    while residual >= tol * total && residual > 0.0 {
        if sweep == sweep_cap {
            return Err(Error::Numerical {
                message: format!("Jacobi did not converge in {sweep_cap} sweeps"),
                residual: residual / total,
            });
        }
        for r in 0..p {
            for s in r + 1..p {
                let apq = a[r * p + s];
                if apq == 0.0 {
                    continue;
                }
                let (app, aqq) = (a[r * p + r], a[s * p + s]);
                let g = 100.0 * apq.abs();
                // negligible against both diagonal entries
                if sweep > 3 && app.abs() + g == app.abs() && aqq.abs() + g == aqq.abs() {
                    a[r * p + s] = 0.0;
                    a[s * p + r] = 0.0;
                    continue;
                }
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let sn = t * c;
                let tau = sn / (1.0 + c);
                a[r * p + r] = app - t * apq;
                a[s * p + s] = aqq + t * apq;
                a[r * p + s] = 0.0;
                a[s * p + r] = 0.0;
                for k in 0..p {
                    if k == r || k == s {
                        continue;
                    }
                    let g = a[k * p + r];
                    let h = a[k * p + s];
                    let new_r = g - sn * (h + g * tau);
                    let new_s = h + sn * (g - h * tau);
                    a[k * p + r] = new_r;
                    a[r * p + k] = new_r;
                    a[k * p + s] = new_s;
                    a[s * p + k] = new_s;
                }
            }
        }
        sweep += 1;
        residual = off(a);
    }
    let mut eigs: Vec<f64> = (0..p).map(|i| a[i * p + i]).collect();
    eigs.sort_by(f64::total_cmp);
    Ok(eigs)
}
