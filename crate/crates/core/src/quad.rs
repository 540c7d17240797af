//! Quadrature for densities with inverse-square-root endpoint behaviour.
//!
//! Every integral over a support interval `[a, b]` goes through the change of
//! variables `y = m + c cos(theta)` (`m` midpoint, `c` half-length). The
//! weight `1 / sqrt((b-y)(y-a))` cancels the Jacobian exactly, so
//!
//! `int_a^b f(y) / sqrt((b-y)(y-a)) dy = (pi/n) sum f(m + c cos theta_j)`
//!
//! at the midpoint nodes, which is spectrally accurate for `f` smooth on the
//! closed interval. Node counts are doubled until two passes agree.
//! Integrands receive the exact distances to the endpoints computed from
//! `theta`, so remaining square-root factors can be formed without
//! cancellation.
//!
//! Logarithmic potentials use the same node set: the density's smooth factor
//! is expanded in cosine coefficients and integrated against the closed-form
//! moments of `log|x - y|` (Chebyshev polynomials of the evaluation point on
//! the interval, geometric decay off it), which is accurate on the support,
//! at its endpoints, and arbitrarily close to it.

use crate::error::{Error, Result};
use crate::poly::RealPolynomial;

pub const DOMAIN_MAX: f64 = 18.0;
const MAX_NODES: usize = 1 << 20;

/// Union of closed intervals given by a strictly increasing even-length
/// endpoint sequence `a_0 < a_1 < ... < a_{2l+1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct SupportSet {
    endpoints: Vec<f64>,
}

impl SupportSet {
    /// Checked constructor; endpoints must lie in `[0, 18]`.
    pub fn new(endpoints: Vec<f64>) -> Result<Self> {
        let s = Self::new_unrestricted(endpoints)?;
        let lo = s.endpoints[0];
        let hi = *s.endpoints.last().unwrap();
        if lo < -1e-12 || hi > DOMAIN_MAX + 1e-12 {
            return Err(Error::InvalidSupport(format!(
                "endpoints [{lo}, {hi}] leave the domain [0, {DOMAIN_MAX}]"
            )));
        }
        Ok(s)
    }

    /// Constructor without the domain guard, for supports used as test
    /// scaffolding (e.g. symmetric unions around the origin).
    pub fn new_unrestricted(endpoints: Vec<f64>) -> Result<Self> {
        if endpoints.len() < 2 || endpoints.len() % 2 != 0 {
            return Err(Error::InvalidSupport(format!(
                "need an even number (>= 2) of endpoints, got {}",
                endpoints.len()
            )));
        }
        if endpoints.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidSupport("endpoints not strictly increasing".into()));
        }
        if endpoints.iter().any(|e| !e.is_finite()) {
            return Err(Error::InvalidSupport("non-finite endpoint".into()));
        }
        Ok(SupportSet { endpoints })
    }

    pub fn endpoints(&self) -> &[f64] {
        &self.endpoints
    }

    /// Number of intervals, `l + 1`.
    pub fn num_intervals(&self) -> usize {
        self.endpoints.len() / 2
    }

    pub fn num_gaps(&self) -> usize {
        self.num_intervals() - 1
    }

    pub fn interval(&self, i: usize) -> (f64, f64) {
        (self.endpoints[2 * i], self.endpoints[2 * i + 1])
    }

    /// Open gap between interval `i` and `i + 1`.
    pub fn gap(&self, i: usize) -> (f64, f64) {
        (self.endpoints[2 * i + 1], self.endpoints[2 * i + 2])
    }

    pub fn hull(&self) -> (f64, f64) {
        (self.endpoints[0], *self.endpoints.last().unwrap())
    }

    pub fn contains(&self, x: f64) -> bool {
        self.interval_of(x).is_some()
    }

    /// Index of the closed interval containing `x`, if any.
    pub fn interval_of(&self, x: f64) -> Option<usize> {
        (0..self.num_intervals()).find(|&i| {
            let (a, b) = self.interval(i);
            x >= a && x <= b
        })
    }

    /// Index of the open gap containing `x`, if any.
    pub fn gap_of(&self, x: f64) -> Option<usize> {
        (0..self.num_gaps()).find(|&i| {
            let (a, b) = self.gap(i);
            x > a && x < b
        })
    }

    /// Sign of the density alternation factor on interval `i`: `(-1)^(l - i)`.
    pub fn parity(&self, i: usize) -> f64 {
        if (self.num_gaps() - i) % 2 == 0 {
            1.0
        } else {
            -1.0
        }
    }

    /// Monic endpoint polynomial `H(x) = prod (x - a_i)`.
    pub fn h_poly(&self) -> RealPolynomial {
        RealPolynomial::from_roots(&self.endpoints)
    }

    /// `sqrt(prod_{j not in {2i, 2i+1}} |y - a_j|)`, the smooth residual of
    /// `sqrt|H|` on interval `i`, evaluated in product-of-roots form.
    pub fn sqrt_h_rest_interval(&self, i: usize, y: f64) -> f64 {
        let mut acc = 1.0;
        for (j, &a) in self.endpoints.iter().enumerate() {
            if j != 2 * i && j != 2 * i + 1 {
                acc *= (y - a).abs();
            }
        }
        acc.sqrt()
    }

    /// Same residual for gap `i` (local pair `a_{2i+1}`, `a_{2i+2}`).
    pub fn sqrt_h_rest_gap(&self, i: usize, y: f64) -> f64 {
        let mut acc = 1.0;
        for (j, &a) in self.endpoints.iter().enumerate() {
            if j != 2 * i + 1 && j != 2 * i + 2 {
                acc *= (y - a).abs();
            }
        }
        acc.sqrt()
    }

    /// `sqrt(|H(x)|)` in product form.
    pub fn sqrt_h_abs(&self, x: f64) -> f64 {
        let mut acc = 1.0;
        for &a in &self.endpoints {
            acc *= (x - a).abs();
        }
        acc.sqrt()
    }

    /// Signed `H(x)` in product form.
    pub fn h_at(&self, x: f64) -> f64 {
        self.endpoints.iter().map(|&a| x - a).product()
    }

    /// Distance from `x` to the support.
    pub fn distance(&self, x: f64) -> f64 {
        if self.contains(x) {
            return 0.0;
        }
        self.endpoints
            .iter()
            .map(|&a| (x - a).abs())
            .fold(f64::INFINITY, f64::min)
    }
}

/// Node-count and refinement policy for the cosine-rule integrals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureConfig {
    /// Starting node count per interval; power of two, at least 16.
    pub nodes_per_interval: usize,
    /// Doubling stops when successive results differ by less than this.
    /// A value of one or more disables refinement entirely: a single pass at
    /// the configured node count. Fixed node counts keep every integral a
    /// smooth function of the support endpoints, which finite-difference
    /// gradients need; adaptive refinement switches node counts discretely
    /// and makes the objective jagged at the tolerance scale.
    pub refinement_tol: f64,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig { nodes_per_interval: 256, refinement_tol: 1e-12 }
    }
}

impl QuadratureConfig {
    /// Fixed node count per interval, smooth in the endpoints.
    pub fn fixed(nodes_per_interval: usize) -> Self {
        QuadratureConfig { nodes_per_interval, refinement_tol: f64::INFINITY }
    }

    /// Refinement disabled: integrate with exactly `nodes_per_interval`.
    pub fn is_fixed(&self) -> bool {
        self.refinement_tol >= 1.0
    }

    pub fn validate(&self) -> Result<()> {
        if self.nodes_per_interval < 16 || !self.nodes_per_interval.is_power_of_two() {
            return Err(Error::InvalidSupport(format!(
                "nodes_per_interval must be a power of two >= 16, got {}",
                self.nodes_per_interval
            )));
        }
        if !(self.refinement_tol > 0.0) {
            return Err(Error::InvalidSupport("refinement_tol must be positive".into()));
        }
        Ok(())
    }
}

/// Compensated accumulator; the node counts here are large enough that naive
/// summation noise would sit above the refinement tolerances.
#[derive(Clone, Copy, Default)]
pub(crate) struct Kahan {
    sum: f64,
    carry: f64,
}

impl Kahan {
    #[inline]
    pub(crate) fn add(&mut self, v: f64) {
        let y = v - self.carry;
        let t = self.sum + y;
        self.carry = (t - self.sum) - y;
        self.sum = t;
    }

    #[inline]
    pub(crate) fn value(&self) -> f64 {
        self.sum
    }
}

/// Single pass of the weighted rule:
/// `int_lo^hi f(y) / sqrt((hi-y)(y-lo)) dy ~ (pi/n) sum f(y_j)` at the
/// cosine midpoint nodes. The callback receives `(y, y - lo, hi - y)` with
/// the distances computed from `theta`.
pub fn cheb_rule_pass<F>(lo: f64, hi: f64, n: usize, f: &F) -> f64
where
    F: Fn(f64, f64, f64) -> f64,
{
    let c = 0.5 * (hi - lo);
    let m = 0.5 * (lo + hi);
    let h = std::f64::consts::PI / n as f64;
    let mut acc = Kahan::default();
    for k in 0..n {
        let theta = (k as f64 + 0.5) * h;
        let co = theta.cos();
        let y = m + c * co;
        acc.add(f(y, c * (1.0 + co), c * (1.0 - co)));
    }
    acc.value() * h
}

/// Doubling wrapper around [`cheb_rule_pass`]; errors with `NoConvergence`
/// past 2^20 nodes. The tolerance is read relative to the integral size once
/// that exceeds one.
pub fn cheb_rule<F>(lo: f64, hi: f64, cfg: &QuadratureConfig, f: F) -> Result<f64>
where
    F: Fn(f64, f64, f64) -> f64,
{
    let mut n = cfg.nodes_per_interval.max(16);
    if cfg.is_fixed() {
        return Ok(cheb_rule_pass(lo, hi, n, &f));
    }
    let mut prev = cheb_rule_pass(lo, hi, n, &f);
    let mut prev_delta = f64::INFINITY;
    loop {
        n *= 2;
        if n > MAX_NODES {
            return Err(Error::NoConvergence { last_delta: f64::NAN, nodes: n / 2 });
        }
        let next = cheb_rule_pass(lo, hi, n, &f);
        let delta = (next - prev).abs();
        let scale = next.abs().max(1.0);
        if delta < cfg.refinement_tol * scale {
            return Ok(next);
        }
        // Spectral convergence shrinks deltas by large factors per doubling;
        // a small stagnating delta is the evaluation-noise floor.
        if delta < 1e-8 * scale && delta > 0.6 * prev_delta {
            return Ok(next);
        }
        if n == MAX_NODES {
            if std::env::var("SSS_QUAD_DEBUG").is_ok() {
                eprintln!("cheb_rule stall on [{lo}, {hi}] delta {delta:e} value {next:e}");
            }
            return Err(Error::NoConvergence { last_delta: delta, nodes: n });
        }
        prev = next;
        prev_delta = delta;
    }
}

/// `int_a^b g(x) / sqrt((b - x)(x - a)) dx`, the midpoint rule for
/// `int_0^pi g(m + c cos(theta)) d(theta)` with node doubling.
pub fn integrate_singular<F>(g: F, a: f64, b: f64, cfg: &QuadratureConfig) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    assert!(a < b);
    cfg.validate()?;
    cheb_rule(a, b, cfg, |y, _, _| g(y))
}

/// `sum_i int_{I_i} g(x) / sqrt(|H(x)|) dx` over the intervals of a support,
/// factoring each interval's endpoint pair into the cosine weight and
/// evaluating the remaining `|H|` factor in product-of-roots form.
///
/// `h` must vanish exactly at the support endpoints (it may carry a leading
/// coefficient, which scales the result).
pub fn integrate_singular_union<F>(
    g: F,
    support: &SupportSet,
    h: &RealPolynomial,
    cfg: &QuadratureConfig,
) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    cfg.validate()?;
    let scale = h.leading_coeff().abs();
    if h.degree() != support.endpoints().len() || scale == 0.0 {
        return Err(Error::InvalidSupport(
            "H must be the endpoint polynomial of the support".into(),
        ));
    }
    for &a in support.endpoints() {
        let tol = 1e-7 * (1.0 + h.coeffs().iter().fold(0.0f64, |m, c| m.max(c.abs())));
        if h.eval(a).abs() > tol {
            return Err(Error::InvalidSupport(format!("H does not vanish at endpoint {a}")));
        }
    }
    let mut total = 0.0;
    for i in 0..support.num_intervals() {
        let (a, b) = support.interval(i);
        total += cheb_rule(a, b, cfg, |y, _, _| g(y) / support.sqrt_h_rest_interval(i, y))?;
    }
    Ok(total / scale.sqrt())
}

/// Adaptive Simpson integration for bounded, piecewise-smooth integrands.
pub fn integrate_smooth<F>(g: F, a: f64, b: f64, tol: f64) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    assert!(a < b && tol > 0.0);
    fn simpson(fa: f64, fm: f64, fb: f64, a: f64, b: f64) -> f64 {
        (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    }
    #[allow(clippy::too_many_arguments)]
    fn recurse<F: Fn(f64) -> f64>(
        g: &F,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: usize,
    ) -> Result<f64> {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = g(lm);
        let frm = g(rm);
        let left = simpson(fa, flm, fm, a, m);
        let right = simpson(fm, frm, fb, m, b);
        let delta = left + right - whole;
        if delta.abs() <= 15.0 * tol {
            return Ok(left + right + delta / 15.0);
        }
        if depth == 0 {
            return Err(Error::NoConvergence { last_delta: delta.abs(), nodes: 0 });
        }
        Ok(recurse(g, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)?
            + recurse(g, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)?)
    }
    let fa = g(a);
    let fm = g(0.5 * (a + b));
    let fb = g(b);
    if !(fa.is_finite() && fm.is_finite() && fb.is_finite()) {
        return Err(Error::NoConvergence { last_delta: f64::NAN, nodes: 0 });
    }
    let whole = simpson(fa, fm, fb, a, b);
    recurse(&g, a, b, fa, fm, fb, whole, tol, 60)
}

/// Cosine coefficients of `theta -> f(y(theta))` over `[lo, hi]` from `n`
/// midpoint samples: `f ~ sum_k out[k] cos(k theta)`, `out.len()` terms.
pub fn cosine_coeffs<F>(lo: f64, hi: f64, n: usize, k_max: usize, f: &F) -> Vec<f64>
where
    F: Fn(f64, f64, f64) -> f64,
{
    let c = 0.5 * (hi - lo);
    let m = 0.5 * (lo + hi);
    let h = std::f64::consts::PI / n as f64;
    let mut out = vec![Kahan::default(); k_max];
    for j in 0..n {
        let theta = (j as f64 + 0.5) * h;
        let co = theta.cos();
        let y = m + c * co;
        let v = f(y, c * (1.0 + co), c * (1.0 - co));
        // cos(k theta) by the addition recurrence.
        let (step_s, step_c) = theta.sin_cos();
        let mut ck = 1.0;
        let mut sk = 0.0;
        for slot in out.iter_mut() {
            slot.add(v * ck);
            let ck_next = ck * step_c - sk * step_s;
            sk = sk * step_c + ck * step_s;
            ck = ck_next;
        }
    }
    out.iter()
        .enumerate()
        .map(|(k, acc)| acc.value() * if k == 0 { 1.0 / n as f64 } else { 2.0 / n as f64 })
        .collect()
}

/// Closed-form log-kernel moments for one interval:
/// `out[k] = int_0^pi log|x - (m + c cos theta)| cos(k theta) d(theta)`.
///
/// On the interval (`|z| <= 1` with `z = (x-m)/c`): `out[0] = pi log(c/2)`,
/// `out[k] = -pi T_k(z)/k`. Off it: `out[0] = pi log(c (|z| + s)/2)` and
/// `out[k] = -pi rho^k / k` with `s = sqrt(z^2-1)`, `rho = z - sign(z) s`.
pub fn log_kernel_moments(lo: f64, hi: f64, x: f64, out: &mut [f64]) {
    let c = 0.5 * (hi - lo);
    let m = 0.5 * (lo + hi);
    let z = (x - m) / c;
    let pi = std::f64::consts::PI;
    if z.abs() <= 1.0 {
        out[0] = pi * (c / 2.0).ln();
        let mut t_prev = 1.0;
        let mut t_cur = z;
        for (k, slot) in out.iter_mut().enumerate().skip(1) {
            *slot = -pi * t_cur / k as f64;
            let t_next = 2.0 * z * t_cur - t_prev;
            t_prev = t_cur;
            t_cur = t_next;
        }
    } else {
        let s = (z * z - 1.0).sqrt();
        out[0] = pi * (c * (z.abs() + s) / 2.0).ln();
        let rho = z - z.signum() * s;
        let mut p = 1.0;
        for (k, slot) in out.iter_mut().enumerate().skip(1) {
            p *= rho;
            *slot = -pi * p / k as f64;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn cfg() -> QuadratureConfig {
        QuadratureConfig::default()
    }

    #[test]
    fn support_set_guards() {
        assert!(SupportSet::new(vec![0.0, 4.0]).is_ok());
        assert!(SupportSet::new(vec![0.0, 19.0]).is_err());
        assert!(SupportSet::new(vec![4.0, 0.0]).is_err());
        assert!(SupportSet::new(vec![0.0, 1.0, 2.0]).is_err());
        assert!(SupportSet::new_unrestricted(vec![-2.0, -1.0, 1.0, 2.0]).is_ok());
    }

    #[test]
    fn equilibrium_mass_single_interval() {
        let v = integrate_singular(|_| 1.0 / PI, 0.0, 4.0, &cfg()).unwrap();
        assert!((v - 1.0).abs() < 1e-13);
    }

    #[test]
    fn first_moment_is_midpoint() {
        for (a, b) in [(0.0, 4.0), (1.0, 4.0), (0.3, 17.5)] {
            let v = integrate_singular(|x| x / PI, a, b, &cfg()).unwrap();
            assert!((v - 0.5 * (a + b)).abs() < 1e-12);
        }
    }

    #[test]
    fn reciprocal_density_has_unit_mass() {
        // density sqrt(ab)/(pi x sqrt((b-x)(x-a))) integrates to one.
        let (a, b) = (1.0, 4.0);
        let v = integrate_singular(|x| (a * b).sqrt() / (PI * x), a, b, &cfg()).unwrap();
        assert!((v - 1.0).abs() < 1e-12);
    }

    #[test]
    fn union_arcsine_mass() {
        let s = SupportSet::new(vec![0.0, 4.0]).unwrap();
        let h = s.h_poly();
        let v = integrate_singular_union(|_| 1.0, &s, &h, &cfg()).unwrap();
        assert!((v - PI).abs() < 1e-12);
    }

    #[test]
    fn union_matches_per_interval_sum() {
        let s = SupportSet::new(vec![0.5, 1.5, 2.0, 3.0]).unwrap();
        let h = s.h_poly();
        let via_union = integrate_singular_union(|x| x * x, &s, &h, &cfg()).unwrap();
        // Oracle: composite Simpson on the theta-substituted integrand.
        let mut oracle = 0.0;
        for i in 0..2 {
            let (a, b) = s.interval(i);
            let c = 0.5 * (b - a);
            let m = 0.5 * (a + b);
            let g = |theta: f64| {
                let y: f64 = m + c * theta.cos();
                y * y / s.sqrt_h_rest_interval(i, y)
            };
            oracle += integrate_smooth(g, 0.0, PI, 1e-12).unwrap();
        }
        assert!((via_union - oracle).abs() < 1e-10);
    }

    #[test]
    fn union_rejects_wrong_h() {
        let s = SupportSet::new(vec![0.0, 4.0]).unwrap();
        let wrong = RealPolynomial::from_roots(&[0.0, 5.0]);
        assert!(integrate_singular_union(|_| 1.0, &s, &wrong, &cfg()).is_err());
    }

    #[test]
    fn smooth_constant_and_logs() {
        let v = integrate_smooth(|_| 2.5, 1.0, 3.0, 1e-10).unwrap();
        assert!((v - 5.0).abs() < 1e-12);
        let v = integrate_smooth(|x: f64| x.ln(), 1e-12, 1.0, 1e-9).unwrap();
        assert!((v - -1.0).abs() < 1e-8, "got {v}");
        let v = integrate_smooth(|x| 1.0 / x, 1.0, 2.0, 1e-11).unwrap();
        assert!((v - 2.0f64.ln()).abs() < 1e-11);
    }

    #[test]
    fn chebyshev_moments_exact_for_polynomials() {
        // On [-1,1]: int T_k(x)^2 / sqrt(1-x^2) = pi/2 for k >= 1.
        let c = cfg();
        for k in 1..6 {
            let v = integrate_singular(
                |x| {
                    let t = (k as f64 * x.acos()).cos();
                    t * t
                },
                -1.0,
                1.0,
                &c,
            )
            .unwrap();
            assert!((v - PI / 2.0).abs() < 1e-12, "k = {k}");
        }
        let v = integrate_singular(|x| x * x * x, -1.0, 1.0, &c).unwrap();
        assert!(v.abs() < 1e-13);
        let v = integrate_singular(|x| x * x, -1.0, 1.0, &c).unwrap();
        assert!((v - PI / 2.0).abs() < 1e-12);
    }

    #[test]
    fn linearity() {
        let c = cfg();
        let (a, b) = (0.2, 2.7);
        let g1 = |x: f64| 1.0 + x + 0.3 * x * x;
        let g2 = |x: f64| x * x * x - 2.0;
        let i1 = integrate_singular(g1, a, b, &c).unwrap();
        let i2 = integrate_singular(g2, a, b, &c).unwrap();
        let mix = integrate_singular(|x| 2.0 * g1(x) - 0.5 * g2(x), a, b, &c).unwrap();
        assert!((mix - (2.0 * i1 - 0.5 * i2)).abs() < 1e-11);
    }

    #[test]
    fn doubling_reports_no_convergence() {
        // A non-integrable pole keeps successive refinements apart.
        let c = QuadratureConfig { nodes_per_interval: 16, refinement_tol: 1e-16 };
        let r = integrate_singular(|x: f64| 1.0 / (x - 1.0 / PI), 0.0, 1.0, &c);
        assert!(matches!(r, Err(Error::NoConvergence { .. })));
    }

    #[test]
    fn cosine_coeffs_recover_polynomial() {
        // f(y) = y^2 on [1, 3]: y = 2 + cos(theta), y^2 = 4.5 + 4 cos + 0.5 cos(2t).
        let coeffs = cosine_coeffs(1.0, 3.0, 64, 8, &|y, _, _| y * y);
        assert!((coeffs[0] - 4.5).abs() < 1e-13);
        assert!((coeffs[1] - 4.0).abs() < 1e-13);
        assert!((coeffs[2] - 0.5).abs() < 1e-13);
        for k in 3..8 {
            assert!(coeffs[k].abs() < 1e-13);
        }
    }

    #[test]
    fn log_kernel_against_simpson_off_support() {
        // Direct quadrature is only viable where the integrand is smooth;
        // the on-support branch is exercised end-to-end by the potential
        // closed-form tests in the measures module.
        let (lo, hi) = (0.5, 2.5);
        for &x in &[3.7, 0.1, -1.0, 2.7, 18.0] {
            let mut mk = [0.0; 6];
            log_kernel_moments(lo, hi, x, &mut mk);
            for (k, &got) in mk.iter().enumerate() {
                let oracle = integrate_smooth(
                    |theta: f64| {
                        let y = 1.5 + theta.cos();
                        (x - y).abs().ln() * (k as f64 * theta).cos()
                    },
                    0.0,
                    PI,
                    1e-12,
                )
                .unwrap();
                assert!((got - oracle).abs() < 1e-10, "k={k} x={x}: {got} vs {oracle}");
            }
        }
    }

    #[test]
    fn log_kernel_continuous_across_endpoint() {
        // The moments behave like sqrt(epsilon) across the endpoint.
        let (lo, hi) = (0.5, 2.5);
        let mut inside = [0.0; 40];
        let mut outside = [0.0; 40];
        log_kernel_moments(lo, hi, hi - 1e-10, &mut inside);
        log_kernel_moments(lo, hi, hi + 1e-10, &mut outside);
        for k in 0..40 {
            assert!(
                (inside[k] - outside[k]).abs() < 1e-4,
                "moment {k} jumps across the endpoint: {} vs {}",
                inside[k],
                outside[k]
            );
        }
    }
}
