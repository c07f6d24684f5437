//! Jacobi-preconditioned conjugate gradient for symmetric positive-definite
//! operators given as closures.

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CgOutcome {
    pub iterations: usize,
    /// Final `|b - A x| / |b|`.
    pub relative_residual: f64,
    pub converged: bool,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Solves `A x = b` starting from the contents of `x`.
///
/// `apply(v, out)` must write `A v` into `out`; `diag` is the diagonal of
/// `A` used as preconditioner.
pub fn conjugate_gradient(
    apply: impl Fn(&[f64], &mut [f64]),
    diag: &[f64],
    b: &[f64],
    x: &mut [f64],
    tol: f64,
    max_iters: usize,
) -> CgOutcome {
    let n = b.len();
    let b_norm = dot(b, b).sqrt();
    if n == 0 || b_norm == 0.0 {
        x.iter_mut().for_each(|v| *v = 0.0);
        return CgOutcome {
            iterations: 0,
            relative_residual: 0.0,
            converged: true,
        };
    }

    let mut ap = vec![0.0; n];
    apply(x, &mut ap);
    let mut r: Vec<f64> = b.iter().zip(&ap).map(|(bi, ai)| bi - ai).collect();
    let mut z: Vec<f64> = r.iter().zip(diag).map(|(ri, di)| ri / di).collect();
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut residual = dot(&r, &r).sqrt() / b_norm;

    let mut iterations = 0;
    while residual > tol && iterations < max_iters {
        apply(&p, &mut ap);
        let pap = dot(&p, &ap);
        if pap <= 0.0 {
            break;
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        iterations += 1;
        residual = dot(&r, &r).sqrt() / b_norm;
        if residual <= tol {
            break;
        }
        for i in 0..n {
            z[i] = r[i] / diag[i];
        }
        let rz_next = dot(&r, &z);
        let beta = rz_next / rz;
        rz = rz_next;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }

    // Recompute the true residual; the recurrence drifts slightly.
    apply(x, &mut ap);
    let true_residual = b
        .iter()
        .zip(&ap)
        .map(|(bi, ai)| (bi - ai).powi(2))
        .sum::<f64>()
        .sqrt()
        / b_norm;
    CgOutcome {
        iterations,
        relative_residual: true_residual,
        converged: true_residual <= tol,
    }
}
