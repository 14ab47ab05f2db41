//! Adaptive Simpson quadrature.

pub const TOL: f64 = 1e-9;
pub const MAX_DEPTH: u32 = 40;

#[derive(Debug, Clone, PartialEq)]
pub enum QuadError<E> {
    Depth,
    Eval(E),
}

/// Integrates `f` over `[a, b]` to absolute tolerance `TOL`.
pub fn simpson<E>(f: &mut dyn FnMut(f64) -> Result<f64, E>, a: f64, b: f64) -> Result<f64, QuadError<E>> {
    if a == b {
        return Ok(0.0);
    }
    let fa = f(a).map_err(QuadError::Eval)?;
    let fb = f(b).map_err(QuadError::Eval)?;
    let m = 0.5 * (a + b);
    let fm = f(m).map_err(QuadError::Eval)?;
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    step(f, a, b, fa, fm, fb, whole, TOL, MAX_DEPTH)
}

#[allow(clippy::too_many_arguments)]
fn step<E>(
    f: &mut dyn FnMut(f64) -> Result<f64, E>,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    eps: f64,
    depth: u32,
) -> Result<f64, QuadError<E>> {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let flm = f(lm).map_err(QuadError::Eval)?;
    let frm = f(rm).map_err(QuadError::Eval)?;
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    // Below a few ulps of the running value the estimate cannot improve.
    let floor = 64.0 * f64::EPSILON * (left.abs() + right.abs());
    if delta.abs() <= 15.0 * eps.max(floor) {
        return Ok(left + right + delta / 15.0);
    }
    if depth == 0 || !delta.is_finite() {
        return Err(QuadError::Depth);
    }
    let l = step(f, a, m, fa, flm, fm, left, eps / 2.0, depth - 1)?;
    let r = step(f, m, b, fm, frm, fb, right, eps / 2.0, depth - 1)?;
    Ok(l + r)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(mut f: impl FnMut(f64) -> f64, a: f64, b: f64) -> Result<f64, QuadError<()>> {
        simpson(&mut |x| Ok(f(x)), a, b)
    }

    #[test]
    fn polynomials_are_exact() {
        assert!((q(|x| x, 0.0, 1.0).unwrap() - 0.5).abs() <= 1e-9);
        assert!((q(|x| x * x * x, -1.0, 2.0).unwrap() - 3.75).abs() <= 1e-12);
        assert_eq!(q(|x| x, 0.0, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn smooth_functions() {
        assert!((q(f64::sin, 0.0, std::f64::consts::PI).unwrap() - 2.0).abs() <= 1e-9);
        assert!((q(f64::exp, 0.0, 1.0).unwrap() - (std::f64::consts::E - 1.0)).abs() <= 1e-9);
        assert!((q(|x| x, 1.0, 0.0).unwrap() + 0.5).abs() <= 1e-12);
    }

    #[test]
    fn singular_integrand_runs_out_of_depth() {
        assert_eq!(q(|x| 1.0 / x, -1.0, 2.0), Err(QuadError::Depth));
    }
}
