//! Central finite-difference gradients, the numerical oracle for analytic gradients.

use alloc::format;
use alloc::vec::Vec;

use crate::error::CoreError;
use crate::vector::Vector;

/// Central-difference gradient estimate of `f` at `x`:
/// coordinate `i` is `(f(x + h·e_i) − f(x − h·e_i)) / (2h)`.
///
/// Returns an error if `f` evaluates to NaN or infinity at any probe point.
/// Panics if `h <= 0`.
pub fn finite_diff_grad<F>(mut f: F, x: &Vector, h: f64) -> Result<Vector, CoreError>
where
    F: FnMut(&Vector) -> f64,
{
    assert!(h > 0.0, "step size must be positive");
    let mut grad = Vec::with_capacity(x.dim());
    let mut probe: Vec<f64> = x.as_slice().to_vec();
    for i in 0..x.dim() {
        let base = probe[i];
        probe[i] = base + h;
        let plus = f(&Vector::new(probe.clone()));
        probe[i] = base - h;
        let minus = f(&Vector::new(probe.clone()));
        probe[i] = base;
        if !plus.is_finite() || !minus.is_finite() {
            return Err(CoreError::NonFinite {
                context: format!("finite difference probe at coordinate {i}"),
            });
        }
        grad.push((plus - minus) / (2.0 * h));
    }
    Ok(Vector::new(grad))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sum_of_squares() {
        let f = |v: &Vector| v.iter().map(|x| x * x).sum::<f64>();
        let grad = finite_diff_grad(f, &Vector::new(vec![1.0, 2.0]), 1e-5).unwrap();
        assert!((grad[0] - 2.0).abs() < 1e-8);
        assert!((grad[1] - 4.0).abs() < 1e-8);
    }

    #[test]
    fn constant_function() {
        let grad = finite_diff_grad(|_| 3.5, &Vector::new(vec![1.0, -2.0, 0.5]), 1e-5).unwrap();
        assert_eq!(grad.as_slice(), &[0.0, 0.0, 0.0]);
    }

    #[test]
    fn product_of_coordinates() {
        let f = |v: &Vector| v[0] * v[1];
        let grad = finite_diff_grad(f, &Vector::new(vec![3.0, 5.0]), 1e-5).unwrap();
        assert!((grad[0] - 5.0).abs() < 1e-8);
        assert!((grad[1] - 3.0).abs() < 1e-8);
    }

    #[test]
    fn non_finite_probe_is_an_error() {
        let f = |v: &Vector| 1.0 / (v[0] - 1.0);
        let err = finite_diff_grad(f, &Vector::new(vec![1.0 - 1e-5]), 1e-5);
        assert!(matches!(err, Err(CoreError::NonFinite { .. })));
    }
}
