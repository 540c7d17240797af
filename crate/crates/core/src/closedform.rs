//! Closed forms for the single-interval measure family and the two classical
//! bounds they reproduce.
//!
//! On `[a, b]` with midpoint `m`, half-length `c` and geometric mean
//! `g = sqrt(ab)`, the family combines three densities:
//! `f` (equilibrium), `g` (reciprocal, potential `log x` + const) and
//! `h = (m - x) f` (linear potential), as `alpha f + beta g + gamma h` with
//! `alpha + beta = 1`. Expectation, log moment, energy and potential all have
//! elementary expressions, which both solve the one- and zero-polynomial
//! cases outright and serve as oracles for the numerical pipeline.

use crate::error::{Error, Result};

/// Parameters of the single-interval density family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntervalFamilyParams {
    pub a: f64,
    pub b: f64,
    pub alpha: f64,
    pub gamma: f64,
}

impl IntervalFamilyParams {
    pub fn new(a: f64, b: f64, alpha: f64, gamma: f64) -> Self {
        assert!(a >= 0.0 && a < b, "need 0 <= a < b");
        IntervalFamilyParams { a, b, alpha, gamma }
    }

    /// `beta = 1 - alpha`, stored implicitly so the mass constraint is exact.
    pub fn beta(&self) -> f64 {
        1.0 - self.alpha
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.a + self.b)
    }

    pub fn half_length(&self) -> f64 {
        0.5 * (self.b - self.a)
    }

    pub fn geo_mean(&self) -> f64 {
        (self.a * self.b).sqrt()
    }

    /// Density `alpha f + beta g + gamma h` at `x` in `(a, b)`.
    pub fn density(&self, x: f64) -> f64 {
        use std::f64::consts::PI;
        let w = ((self.b - x) * (x - self.a)).sqrt();
        let f = 1.0 / (PI * w);
        let g = self.geo_mean() / (PI * x * w);
        let h = (self.midpoint() - x) / (PI * w);
        self.alpha * f + self.beta() * g + self.gamma * h
    }

    fn require_positive_left(&self) -> Result<()> {
        if self.a <= 0.0 && self.beta() != 0.0 {
            return Err(Error::DegenerateLeftEndpoint);
        }
        Ok(())
    }
}

/// `int x d(mu) = sqrt(ab) + alpha (m - sqrt(ab)) - gamma c^2 / 2`.
pub fn family_expectation(p: &IntervalFamilyParams) -> f64 {
    let g = p.geo_mean();
    let c = p.half_length();
    g + p.alpha * (p.midpoint() - g) - p.gamma * c * c / 2.0
}

/// `int log x d(mu)`; requires `a > 0` unless the reciprocal component is
/// absent.
pub fn family_log_moment(p: &IntervalFamilyParams) -> Result<f64> {
    p.require_positive_left()?;
    let g = p.geo_mean();
    let m = p.midpoint();
    let s = p.a + p.b + 2.0 * g;
    let beta_term = if p.beta() == 0.0 { 0.0 } else { p.beta() * (4.0 * p.a * p.b / s).ln() };
    Ok(p.alpha * (s / 4.0).ln() + beta_term + p.gamma * (g - m))
}

/// Logarithmic energy of the family measure.
pub fn family_energy(p: &IntervalFamilyParams) -> Result<f64> {
    p.require_positive_left()?;
    let g = p.geo_mean();
    let m = p.midpoint();
    let c = p.half_length();
    let beta = p.beta();
    let beta_terms = if beta == 0.0 {
        0.0
    } else {
        -2.0 * beta * beta * ((m + g) / (2.0 * g)).ln() - 2.0 * beta * p.gamma * (m - g)
    };
    Ok((c / 2.0).ln() + beta_terms - p.gamma * p.gamma * c * c / 2.0)
}

/// Potential `U(x)` for `x` in `[a, b]`:
/// `gamma x + beta log x + (alpha log(c/2) - beta log((a+b+2g)/(b-a)) - gamma m)`.
pub fn family_potential(p: &IntervalFamilyParams, x: f64) -> f64 {
    let g = p.geo_mean();
    let c = p.half_length();
    let beta = p.beta();
    let beta_terms = if beta == 0.0 {
        0.0
    } else {
        beta * x.ln() - beta * ((p.a + p.b + 2.0 * g) / (p.b - p.a)).ln()
    };
    p.gamma * x + beta_terms + p.alpha * (c / 2.0).ln() - p.gamma * p.midpoint()
}

/// The unique `(alpha, beta, gamma)` with `beta = 1 - alpha` making the
/// density vanish at both endpoints: `alpha = m/(m-g)`, `beta = -g/(m-g)`,
/// `gamma = 1/(m-g)`.
pub fn boundary_vanishing_params(a: f64, b: f64) -> (f64, f64, f64) {
    assert!(a >= 0.0 && a < b);
    let m = 0.5 * (a + b);
    let g = (a * b).sqrt();
    let d = m - g;
    (m / d, -g / d, 1.0 / d)
}

/// The zero-polynomial optimum: `lambda = sqrt(e)` on `[0, 4 sqrt(e)]` with
/// density `(1/(2 pi)) sqrt((4 sqrt(e) - x)/(e x))`.
pub fn solve_schur() -> (f64, f64, f64) {
    let sqrt_e = std::f64::consts::E.sqrt();
    (sqrt_e, 0.0, 4.0 * sqrt_e)
}

/// Solution of the one-polynomial transcendental system.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SiegelSolution {
    /// The bound (and expectation), `E = e (1 + 1/nu)^(-nu)`.
    pub e: f64,
    /// Geometric mean of the endpoints.
    pub g: f64,
    /// Root of `(1 + nu) log(1 + 1/nu) + log(nu)/(1 + nu) = 1`.
    pub nu: f64,
    pub a: f64,
    pub b: f64,
}

fn bisect<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, tol: f64) -> Result<f64> {
    let flo = f(lo);
    let fhi = f(hi);
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if !(flo.is_finite() && fhi.is_finite()) || flo.signum() == fhi.signum() {
        return Err(Error::NoRoot);
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if hi - lo < tol * (1.0 + mid.abs()) {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return Ok(mid);
        }
        if fm.signum() == flo.signum() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// `y > 1` with `y ln y - y = x ln x - x`, decreasing in `x` on `(0, 1)`.
fn upper_branch_energy(x: f64) -> Result<f64> {
    let target = x * x.ln() - x;
    bisect(|y| y * y.ln() - y - target, 1.0 + 1e-15, 40.0, 1e-15)
}

/// `y` with `x ln x = (x - y) ln(y - x)`, increasing in `x` on `(0, 1)`.
fn upper_branch_log(x: f64) -> Result<f64> {
    let target = -x * x.ln(); // = z ln z with z = y - x > 1
    let z = bisect(|z: f64| z * z.ln() - target, 1.0, 40.0, 1e-15)?;
    Ok(x + z)
}

/// Solves the pair of monotone curves by bisection on their difference and
/// recovers `nu` and the interval endpoints.
pub fn solve_siegel(tol: f64) -> Result<SiegelSolution> {
    assert!(tol > 0.0);
    let diff = |x: f64| match (upper_branch_log(x), upper_branch_energy(x)) {
        (Ok(y2), Ok(y1)) => y2 - y1,
        _ => f64::NAN,
    };
    // Coarse scan for the sign change; both curves are monotone so there is
    // exactly one.
    let scan = 64;
    let mut bracket = None;
    let mut x_prev = 1.0 / (scan as f64 + 1.0);
    let mut d_prev = diff(x_prev);
    for k in 2..=scan {
        let x = k as f64 / (scan as f64 + 1.0);
        let d = diff(x);
        if d_prev.is_finite() && d.is_finite() && d_prev.signum() != d.signum() {
            bracket = Some((x_prev, x));
            break;
        }
        x_prev = x;
        d_prev = d;
    }
    let (blo, bhi) = bracket.ok_or(Error::NoRoot)?;
    let g = bisect(diff, blo, bhi, 1e-15)?;
    let e = upper_branch_energy(g)?;
    // Two Newton polish steps on the residual pair via the first curve.
    let e = {
        let mut e = e;
        for _ in 0..2 {
            let r = e * e.ln() - e - (g * g.ln() - g);
            let d = e.ln();
            if d.abs() > 1e-300 {
                e -= r / d;
            }
        }
        e
    };
    // nu from E = e (1 + 1/nu)^(-nu): ln E = 1 - nu ln(1 + 1/nu), decreasing.
    let ln_e = e.ln();
    let nu = bisect(
        |nu: f64| 1.0 - nu * (1.0 + 1.0 / nu).ln() - ln_e,
        1e-9,
        1e9,
        1e-16,
    )?;
    let s = 1.0 / (nu + 1.0).sqrt();
    let a = e * (1.0 - s) * (1.0 - s);
    let b = e * (1.0 + s) * (1.0 + s);
    let sol = SiegelSolution { e, g, nu, a, b };
    let (r1, r2) = siegel_residuals(&sol);
    if r1.abs() > tol || r2.abs() > tol {
        return Err(Error::NoRoot);
    }
    Ok(sol)
}

/// Residuals of the two transcendental equations at a solution.
pub fn siegel_residuals(s: &SiegelSolution) -> (f64, f64) {
    let r1 = s.g * s.g.ln() - s.g - (s.e * s.e.ln() - s.e);
    let r2 = s.g * s.g.ln() - (s.g - s.e) * (s.e - s.g).ln();
    (r1, r2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::E;

    #[test]
    fn expectation_examples() {
        // Equilibrium on [0,4]: midpoint 2.
        let p = IntervalFamilyParams::new(0.0, 4.0, 1.0, 0.0);
        assert!((family_expectation(&p) - 2.0).abs() < 1e-14);
        // Pure reciprocal on [1,4]: sqrt(ab) = 2.
        let p = IntervalFamilyParams::new(1.0, 4.0, 0.0, 0.0);
        assert!((family_expectation(&p) - 2.0).abs() < 1e-14);
    }

    #[test]
    fn log_moment_examples() {
        let p = IntervalFamilyParams::new(1.0, 4.0, 1.0, 0.0);
        let expect = ((1.0 + 2.0) * (1.0 + 2.0) / 4.0f64).ln(); // ((sqrt a + sqrt b)^2 / 4)
        assert!((family_log_moment(&p).unwrap() - expect).abs() < 1e-14);
        // a = 0 with beta != 0 is rejected.
        let p = IntervalFamilyParams::new(0.0, 4.0, 0.5, 0.0);
        assert!(matches!(family_log_moment(&p), Err(Error::DegenerateLeftEndpoint)));
        // Narrow interval at 1: log moment tends to 0.
        let p = IntervalFamilyParams::new(1.0, 1.0 + 1e-9, 1.0, 0.0);
        assert!(family_log_moment(&p).unwrap().abs() < 1e-9);
    }

    #[test]
    fn energy_examples() {
        let p = IntervalFamilyParams::new(0.0, 4.0, 1.0, 0.0);
        assert!(family_energy(&p).unwrap().abs() < 1e-14);
    }

    #[test]
    fn potential_examples() {
        let p = IntervalFamilyParams::new(1.0, 4.0, 1.0, 0.0);
        let c = p.half_length();
        for x in [1.1, 2.0, 3.9] {
            assert!((family_potential(&p, x) - (c / 2.0).ln()).abs() < 1e-14);
        }
        // Pure h-component: alpha = 1 (so beta = 0) plus gamma = 1 gives
        // potential x - m + log(c/2); subtracting the equilibrium part leaves
        // x - m.
        let p_lin = IntervalFamilyParams::new(1.0, 4.0, 1.0, 1.0);
        let p_eq = IntervalFamilyParams::new(1.0, 4.0, 1.0, 0.0);
        for x in [1.5, 2.5] {
            let diff = family_potential(&p_lin, x) - family_potential(&p_eq, x);
            assert!((diff - (x - p_lin.midpoint())).abs() < 1e-13);
        }
    }

    #[test]
    fn vanishing_params() {
        let (alpha, beta, gamma) = boundary_vanishing_params(1.0, 4.0);
        assert!((alpha - 5.0).abs() < 1e-12);
        assert!((beta - -4.0).abs() < 1e-12);
        assert!((gamma - 2.0).abs() < 1e-12);
        // Density vanishes at both endpoints: check the quadratic numerator
        // alpha x + beta g + gamma (m - x) x at a and b.
        for (a, b) in [(0.5, 2.0), (1.3, 7.7), (0.01, 3.0)] {
            let (alpha, beta, gamma) = boundary_vanishing_params(a, b);
            let g = (a * b).sqrt();
            let m = 0.5 * (a + b);
            for x in [a, b] {
                let numer = alpha * x + beta * g + gamma * (m - x) * x;
                assert!(numer.abs() < 1e-10 * (1.0 + m), "numerator {numer} at {x}");
            }
        }
        // a -> 0 limit: alpha -> 1, gamma -> 2/b.
        let (alpha, beta, gamma) = boundary_vanishing_params(1e-14, 4.0);
        assert!((alpha - 1.0).abs() < 1e-6);
        assert!(beta.abs() < 1e-6);
        assert!((gamma - 0.5).abs() < 1e-6);
    }

    #[test]
    fn schur_values() {
        let (lambda, a, b) = solve_schur();
        assert!((lambda - E.sqrt()).abs() < 1e-15);
        assert_eq!(a, 0.0);
        assert!((b - 4.0 * E.sqrt()).abs() < 1e-15);
        assert!((b - 6.59488508).abs() < 1e-8);
        // The optimal measure: alpha = 1, gamma = 2/b; energy 0, mass 1,
        // expectation sqrt(e).
        let p = IntervalFamilyParams::new(0.0, b, 1.0, 2.0 / b);
        assert!(family_energy(&p).unwrap().abs() < 1e-12);
        assert!((family_expectation(&p) - lambda).abs() < 1e-12);
    }

    #[test]
    fn siegel_solution() {
        let s = solve_siegel(1e-12).unwrap();
        assert!((s.e - 1.7336105).abs() < 1e-6, "E = {}", s.e);
        let (r1, r2) = siegel_residuals(&s);
        assert!(r1.abs() < 1e-12 && r2.abs() < 1e-12);
        // The defining transcendental equation for nu.
        let lhs = (1.0 + s.nu) * (1.0 + 1.0 / s.nu).ln() + s.nu.ln() / (1.0 + s.nu);
        assert!((lhs - 1.0).abs() < 1e-10, "transcendental residual {}", lhs - 1.0);
        // Interval consistency: E = (m + g)/2 and the stated vanishing form.
        let m = 0.5 * (s.a + s.b);
        let g = (s.a * s.b).sqrt();
        assert!(((m + g) / 2.0 - s.e).abs() < 1e-10);
        assert!((g - s.g).abs() < 1e-8);
        // L = 0 and I = 0 through the family formulas at the vanishing params.
        let (alpha, _beta, gamma) = boundary_vanishing_params(s.a, s.b);
        let p = IntervalFamilyParams::new(s.a, s.b, alpha, gamma);
        assert!(family_log_moment(&p).unwrap().abs() < 1e-9);
        assert!(family_energy(&p).unwrap().abs() < 1e-9);
        assert!((family_expectation(&p) - s.e).abs() < 1e-9);
    }

    #[test]
    fn siegel_curve_crossing_is_unique() {
        let mut signs = Vec::new();
        for k in 1..200 {
            let x = k as f64 / 200.0;
            if let (Ok(y2), Ok(y1)) = (upper_branch_log(x), upper_branch_energy(x)) {
                signs.push((y2 - y1) > 0.0);
            }
        }
        let changes = signs.windows(2).filter(|w| w[0] != w[1]).count();
        assert_eq!(changes, 1, "expected exactly one crossing");
    }
}
