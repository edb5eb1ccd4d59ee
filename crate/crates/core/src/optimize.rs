//! Golden-section search for maxima of unimodal 1-D objectives.

use crate::error::{Error, Result};

const INV_PHI: f64 = 0.618_033_988_749_894_8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Maximum {
    pub x: f64,
    pub value: f64,
}

/// Maximizes `f` on `[lo, hi]` until the bracket is narrower than `tol`.
/// Errors propagate from `f`.
pub fn golden_section_max<F>(mut f: F, lo: f64, hi: f64, tol: f64) -> Result<Maximum>
where
    F: FnMut(f64) -> Result<f64>,
{
    if !(hi > lo) || !(tol > 0.0) {
        return Err(Error::domain(format!(
            "invalid search interval [{lo}, {hi}] / tolerance {tol}"
        )));
    }
    let (mut a, mut b) = (lo, hi);
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = f(x1)?;
    let mut f2 = f(x2)?;
    while b - a > tol {
        if f1 >= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = f(x1)?;
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = f(x2)?;
        }
    }
    Ok(if f1 >= f2 {
        Maximum { x: x1, value: f1 }
    } else {
        Maximum { x: x2, value: f2 }
    })
}

/// Like [`golden_section_max`] but fails when the maximum runs into either
/// end of the interval, which means the interval does not bracket a peak.
pub fn interior_max<F>(mut f: F, lo: f64, hi: f64, tol: f64) -> Result<Maximum>
where
    F: FnMut(f64) -> Result<f64>,
{
    let m = golden_section_max(&mut f, lo, hi, tol)?;
    let edge = 2.0 * tol;
    if m.x - lo < edge || hi - m.x < edge {
        let at = if m.x - lo < edge { lo } else { hi };
        let f_edge = f(at)?;
        if f_edge >= m.value {
            return Err(Error::BoundaryOptimum { at, lo, hi });
        }
    }
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parabola() {
        let m = golden_section_max(|x| Ok(-(x - 1.3) * (x - 1.3)), -4.0, 7.0, 1e-9).unwrap();
        assert!((m.x - 1.3).abs() < 1e-8);
    }

    #[test]
    fn monotone_objective_is_a_boundary_error() {
        let r = interior_max(Ok, 0.0, 1.0, 1e-6);
        assert!(matches!(r, Err(Error::BoundaryOptimum { .. })));
        let r = interior_max(|x| Ok(-x), 0.0, 1.0, 1e-6);
        assert!(matches!(r, Err(Error::BoundaryOptimum { at, .. }) if at == 0.0));
    }

    #[test]
    fn errors_from_objective_propagate() {
        let r = golden_section_max(|_| Err(Error::domain("nope")), 0.0, 1.0, 1e-3);
        assert!(matches!(r, Err(Error::Domain(_))));
    }
}
