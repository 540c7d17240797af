//! Measures on interval unions with prescribed logarithmic potentials.
//!
//! Every measure here has density `N(x) / (pi D(x) sqrt(|H(x)|))` on a
//! support `Sigma`, where `H` is the monic endpoint polynomial, `D` collects
//! poles at polynomial roots off the support, and `N` alternates sign between
//! intervals so that the density itself keeps a single sign. The numerators
//! are fixed by linear conditions on gap integrals:
//!
//! * equilibrium measure: all gap integrals of `N / sqrt(H)` vanish and the
//!   total mass is one, giving a constant potential on the support;
//! * logarithmic measure for a pole `alpha`: the gap integrals of
//!   `N / ((y - alpha) sqrt(H))` vanish (principal value in the gap holding
//!   `alpha`) and `N(alpha)` is pinned, giving potential `log|x - alpha|`
//!   plus a constant;
//! * linear-potential measure: the density `-x` times the equilibrium
//!   density has potential of slope one with interval-dependent offsets; a
//!   zero-mass correction of lower degree equalises the offsets.
//!
//! The combined candidate measure weights these components so that, at an
//! optimal support, its density collapses to `c sqrt(|H|) / prod |Q|`.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::newton::{NewtonBasis, NewtonPoly};
use crate::poly::{IntegerPolynomial, RealPolynomial};
use crate::quad::{cheb_rule, cosine_coeffs, log_kernel_moments, QuadratureConfig, SupportSet};

/// Treat an endpoint below this as the pinned origin (density may diverge
/// there; it is not a "positive" boundary point).
pub const ORIGIN_TOL: f64 = 1e-9;

// ---------------------------------------------------------------------------
// Small dense linear algebra
// ---------------------------------------------------------------------------

/// Solves `A x = b` in place (row-major) with partial pivoting and row
/// equilibration. `A` and `b` are clobbered; the solution lands in `b`.
fn solve_dense(a: &mut [f64], b: &mut [f64], n: usize) -> Result<()> {
    for row in 0..n {
        let mut maxv = 0.0f64;
        for col in 0..n {
            maxv = maxv.max(a[row * n + col].abs());
        }
        if maxv == 0.0 {
            return Err(Error::SingularSystem("zero row"));
        }
        let inv = 1.0 / maxv;
        for col in 0..n {
            a[row * n + col] *= inv;
        }
        b[row] *= inv;
    }
    for col in 0..n {
        let mut piv = col;
        let mut best = a[col * n + col].abs();
        for row in col + 1..n {
            let v = a[row * n + col].abs();
            if v > best {
                best = v;
                piv = row;
            }
        }
        if best < 1e-300 {
            return Err(Error::SingularSystem("pivot underflow"));
        }
        if piv != col {
            for j in 0..n {
                a.swap(col * n + j, piv * n + j);
            }
            b.swap(col, piv);
        }
        let d = a[col * n + col];
        for row in col + 1..n {
            let f = a[row * n + col] / d;
            if f != 0.0 {
                for j in col..n {
                    a[row * n + j] -= f * a[col * n + j];
                }
                b[row] -= f * b[col];
            }
        }
    }
    for col in (0..n).rev() {
        let mut acc = b[col];
        for j in col + 1..n {
            acc -= a[col * n + j] * b[j];
        }
        b[col] = acc / a[col * n + col];
    }
    Ok(())
}

/// Vector-valued weighted rule with node doubling:
/// `out[k] ~ int f_k(y) / sqrt((hi-y)(y-lo)) dy`; all components must settle
/// below the refinement tolerance simultaneously.
fn cheb_rule_vec<F>(lo: f64, hi: f64, cfg: &QuadratureConfig, dim: usize, f: F) -> Result<Vec<f64>>
where
    F: Fn(f64, f64, f64, &mut [f64]),
{
    const MAX_NODES: usize = 1 << 20;
    let c = 0.5 * (hi - lo);
    let m = 0.5 * (lo + hi);
    let pass = |n: usize| {
        let h = PI / n as f64;
        let mut acc = vec![crate::quad::Kahan::default(); dim];
        let mut buf = vec![0.0; dim];
        for k in 0..n {
            let theta = (k as f64 + 0.5) * h;
            let co = theta.cos();
            let y = m + c * co;
            f(y, c * (1.0 + co), c * (1.0 - co), &mut buf);
            for (slot, &v) in acc.iter_mut().zip(buf.iter()) {
                slot.add(v);
            }
        }
        acc.iter().map(|a| a.value() * h).collect::<Vec<f64>>()
    };
    let mut n = cfg.nodes_per_interval.max(16);
    if cfg.is_fixed() {
        return Ok(pass(n));
    }
    let mut prev = pass(n);
    let mut prev_delta = f64::INFINITY;
    loop {
        n *= 2;
        if n > MAX_NODES {
            return Err(Error::NoConvergence { last_delta: f64::NAN, nodes: n / 2 });
        }
        let next = pass(n);
        let scale = next.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        let delta = prev
            .iter()
            .zip(next.iter())
            .map(|(p, q)| (p - q).abs())
            .fold(0.0f64, f64::max);
        if delta < cfg.refinement_tol * scale {
            return Ok(next);
        }
        // Accept a stagnating small delta as the evaluation-noise floor.
        if delta < 1e-8 * scale && delta > 0.6 * prev_delta {
            return Ok(next);
        }
        if n == MAX_NODES {
            if std::env::var("SSS_QUAD_DEBUG").is_ok() {
                eprintln!("cheb_rule_vec stall on [{lo}, {hi}] dim {dim} delta {delta:e}");
            }
            return Err(Error::NoConvergence { last_delta: delta, nodes: n });
        }
        prev = next;
        prev_delta = delta;
    }
}

// ---------------------------------------------------------------------------
// Potential evaluation
// ---------------------------------------------------------------------------

/// Cached cosine coefficients of a density's smooth factor on every interval,
/// integrated against the closed-form log-kernel moments. Valid at any real
/// evaluation point, including on the support and at its endpoints.
#[derive(Debug, Clone)]
pub struct PotentialEvaluator {
    intervals: Vec<(f64, f64, Vec<f64>)>,
}

impl PotentialEvaluator {
    /// `smooth(i, y, d_lo, d_hi)` must equal the density times
    /// `sqrt((b-y)(y-a))` on interval `i`, i.e. the factor that stays smooth
    /// at the endpoints.
    fn build(
        support: &SupportSet,
        cfg: &QuadratureConfig,
        smooth: &(dyn Fn(usize, f64, f64, f64) -> f64 + Sync),
    ) -> Result<Self> {
        const MAX_COEFF_NODES: usize = 1 << 17;
        let smooth = &smooth;
        let intervals = (0..support.num_intervals())
            .into_par_iter()
            .map(move |i| {
                let (a, b) = support.interval(i);
                let mut n = cfg.nodes_per_interval.max(32);
                let mut prev_tail = f64::INFINITY;
                loop {
                    let coeffs = cosine_coeffs(a, b, n, n / 2, &|y, d_lo, d_hi| {
                        smooth(i, y, d_lo, d_hi)
                    });
                    if cfg.is_fixed() {
                        return Ok((a, b, coeffs));
                    }
                    // Tail of the kept band: if it has decayed, aliasing from
                    // the discarded band is below tolerance as well.
                    let scale = coeffs.iter().fold(1.0f64, |m, c| m.max(c.abs()));
                    let tail = coeffs[coeffs.len() - coeffs.len() / 8..]
                        .iter()
                        .fold(0.0f64, |m, c| m.max(c.abs()));
                    if tail < cfg.refinement_tol * scale
                        || (tail < 1e-8 * scale && tail > 0.6 * prev_tail)
                    {
                        return Ok((a, b, coeffs));
                    }
                    n *= 2;
                    if n > MAX_COEFF_NODES {
                        return Err(Error::NoConvergence { last_delta: tail, nodes: n / 2 });
                    }
                    prev_tail = tail;
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(PotentialEvaluator { intervals })
    }

    /// `U(x) = int log|x - y| d(mu)(y)`.
    pub fn eval(&self, x: f64) -> f64 {
        let mut total = 0.0;
        let mut moments: Vec<f64> = Vec::new();
        for (a, b, coeffs) in &self.intervals {
            if moments.len() < coeffs.len() {
                moments.resize(coeffs.len(), 0.0);
            }
            log_kernel_moments(*a, *b, x, &mut moments[..coeffs.len()]);
            total += coeffs
                .iter()
                .zip(&moments[..coeffs.len()])
                .map(|(g, m)| g * m)
                .sum::<f64>();
        }
        total
    }
}

/// One-shot potential at a single point: intervals not containing `x` are
/// integrated directly by the doubling rule (the log factor is smooth
/// there); the interval holding `x` (or nearly so) goes through the
/// coefficient route, whose kernel moments are exact arbitrarily close to
/// the singularity.
fn potential_once(
    support: &SupportSet,
    cfg: &QuadratureConfig,
    x: f64,
    smooth: &dyn Fn(usize, f64) -> f64,
) -> Result<f64> {
    const MAX_COEFF_NODES: usize = 1 << 17;
    // Route by containment only: distance-based switching would flip
    // discretely as endpoints move and make the result jagged under
    // finite differences. The direct rule resolves near-singular log
    // factors from neighbouring intervals at the fixed node counts used
    // in descent; the kernel-moment route covers the containing interval.
    let containing = support.interval_of(x);
    let mut total = 0.0;
    for i in 0..support.num_intervals() {
        let (a, b) = support.interval(i);
        if containing != Some(i) {
            total += cheb_rule(a, b, cfg, |y, _, _| (x - y).abs().ln() * smooth(i, y))?;
            continue;
        }
        let mut n = cfg.nodes_per_interval.max(32);
        let mut prev_tail = f64::INFINITY;
        let coeffs = loop {
            let coeffs = cosine_coeffs(a, b, n, n / 2, &|y, _, _| smooth(i, y));
            if cfg.is_fixed() {
                break coeffs;
            }
            let scale = coeffs.iter().fold(1.0f64, |m, c| m.max(c.abs()));
            let tail = coeffs[coeffs.len() - coeffs.len() / 8..]
                .iter()
                .fold(0.0f64, |m, c| m.max(c.abs()));
            if tail < cfg.refinement_tol * scale || (tail < 1e-8 * scale && tail > 0.6 * prev_tail) {
                break coeffs;
            }
            n *= 2;
            if n > MAX_COEFF_NODES {
                return Err(Error::NoConvergence { last_delta: tail, nodes: n / 2 });
            }
            prev_tail = tail;
        };
        let mut moments = vec![0.0; coeffs.len()];
        log_kernel_moments(a, b, x, &mut moments);
        total += coeffs.iter().zip(&moments).map(|(g, m)| g * m).sum::<f64>();
    }
    Ok(total)
}

// ---------------------------------------------------------------------------
// SqrtMeasure
// ---------------------------------------------------------------------------

/// Measure with density `N(x) / (pi D(x) sqrt(|H(x)|))` on a support, where
/// `D(x) = prod (x - r)` over `denominator_roots` and the numerator is held
/// as a Chebyshev series over the support hull. The stored numerator carries
/// the interval-alternating sign; `density` folds it back in.
#[derive(Debug, Clone)]
pub struct SqrtMeasure {
    support: SupportSet,
    numer: NewtonPoly,
    denom_roots: Vec<f64>,
    mass: f64,
}

impl SqrtMeasure {
    pub fn support(&self) -> &SupportSet {
        &self.support
    }

    /// Numerator `N` in Newton form anchored at the gap midpoints.
    pub fn numerator(&self) -> &NewtonPoly {
        &self.numer
    }

    pub fn denominator_roots(&self) -> &[f64] {
        &self.denom_roots
    }

    pub fn denominator_poly(&self) -> RealPolynomial {
        RealPolynomial::from_roots(&self.denom_roots)
    }

    /// Total signed mass as computed at construction.
    pub fn mass(&self) -> f64 {
        self.mass
    }

    fn denom_at(&self, y: f64) -> f64 {
        self.denom_roots.iter().map(|&r| y - r).product()
    }

    /// The factor that stays smooth on interval `i`: density times
    /// `sqrt(d_lo d_hi)`.
    fn smooth_factor(&self, interval: usize, y: f64) -> f64 {
        let rest = self.support.sqrt_h_rest_interval(interval, y);
        self.support.parity(interval) * self.numer.eval(y) / (PI * self.denom_at(y) * rest)
    }

    fn density_local(&self, interval: usize, y: f64, d_lo: f64, d_hi: f64) -> f64 {
        self.smooth_factor(interval, y) / (d_lo * d_hi).sqrt()
    }

    /// Density at an interior point of the support; zero off the support.
    pub fn density(&self, x: f64) -> f64 {
        match self.support.interval_of(x) {
            None => 0.0,
            Some(i) => {
                let (a, b) = self.support.interval(i);
                if x <= a || x >= b {
                    f64::INFINITY
                } else {
                    self.density_local(i, x, x - a, b - x)
                }
            }
        }
    }

    /// Density on interval `i` with the endpoint distances supplied by the
    /// caller (stable immediately next to the endpoints).
    pub fn density_with_distances(&self, interval: usize, y: f64, d_lo: f64, d_hi: f64) -> f64 {
        self.density_local(interval, y, d_lo, d_hi)
    }

    /// `int f dmu` by the weighted rule on each interval.
    pub fn integrate<F>(&self, cfg: &QuadratureConfig, f: F) -> Result<f64>
    where
        F: Fn(f64) -> f64,
    {
        let mut total = 0.0;
        for i in 0..self.support.num_intervals() {
            let (a, b) = self.support.interval(i);
            total += cheb_rule(a, b, cfg, |y, _, _| f(y) * self.smooth_factor(i, y))?;
        }
        Ok(total)
    }

    /// Reusable potential evaluator for this measure.
    pub fn potential_evaluator(&self, cfg: &QuadratureConfig) -> Result<PotentialEvaluator> {
        PotentialEvaluator::build(&self.support, cfg, &|i, y, _, _| self.smooth_factor(i, y))
    }

    /// Logarithmic potential `U(x) = int log|x - y| dmu(y)`.
    pub fn potential_at(&self, x: f64, cfg: &QuadratureConfig) -> Result<f64> {
        potential_once(&self.support, cfg, x, &|i, y| self.smooth_factor(i, y))
    }

    /// `int log|Q| dmu` as the sum of potentials at the real roots of `Q`.
    pub fn log_moment(&self, q: &IntegerPolynomial, cfg: &QuadratureConfig) -> Result<f64> {
        let roots = poly_roots_off_support(q, &self.support)?;
        let ev = self.potential_evaluator(cfg)?;
        Ok(roots.iter().map(|&r| ev.eval(r)).sum())
    }

    /// First moment `int x dmu`.
    pub fn expectation(&self, cfg: &QuadratureConfig) -> Result<f64> {
        self.integrate(cfg, |y| y)
    }

    /// Energy `int U dmu`, integrating the spectral potential against the
    /// measure.
    pub fn energy_quadrature(&self, cfg: &QuadratureConfig) -> Result<f64> {
        let ev = self.potential_evaluator(cfg)?;
        self.integrate(cfg, |y| ev.eval(y))
    }

    /// `(x, density)` pairs at `n` theta-uniform nodes per interval,
    /// ascending in `x`.
    pub fn density_samples(&self, n: usize) -> Vec<(f64, f64)> {
        density_samples_generic(&self.support, n, &|i, y, d_lo, d_hi| {
            self.density_local(i, y, d_lo, d_hi)
        })
    }
}

fn density_samples_generic(
    support: &SupportSet,
    n: usize,
    density: &dyn Fn(usize, f64, f64, f64) -> f64,
) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n * support.num_intervals());
    for i in 0..support.num_intervals() {
        let (a, b) = support.interval(i);
        let c = 0.5 * (b - a);
        let m = 0.5 * (a + b);
        for k in (0..n).rev() {
            let theta = (k as f64 + 0.5) * PI / n as f64;
            let co = theta.cos();
            let y = m + c * co;
            out.push((y, density(i, y, c * (1.0 + co), c * (1.0 - co))));
        }
    }
    out
}

fn poly_roots_off_support(q: &IntegerPolynomial, support: &SupportSet) -> Result<Vec<f64>> {
    let (lo, hi) = support.hull();
    let roots = q.to_real().real_roots(lo.min(-2.0) - 100.0, hi.max(20.0) + 100.0)?;
    for &r in &roots {
        if support.distance(r) < 1e-9 {
            return Err(Error::RootOnSupport(r));
        }
    }
    Ok(roots)
}

// ---------------------------------------------------------------------------
// Numerator systems
// ---------------------------------------------------------------------------

struct NumeratorAssembler<'a> {
    support: &'a SupportSet,
    basis: NewtonBasis,
    dim: usize,
    cfg: QuadratureConfig,
    /// `gap_rows[j][k] = int_{gap_j} T_k / sqrt(H)`.
    gap_rows: Vec<Vec<f64>>,
    mass_row: Vec<f64>,
}

impl<'a> NumeratorAssembler<'a> {
    fn new(support: &'a SupportSet, cfg: &QuadratureConfig) -> Result<Self> {
        cfg.validate()?;
        let (lo, hi) = support.hull();
        let l = support.num_gaps();
        // Centers at the gap midpoints; the hull midpoint pads the headroom
        // needed for degree raises (linear component, lifted denominators).
        let mut centers: Vec<f64> = (0..l)
            .map(|j| {
                let (c, d) = support.gap(j);
                0.5 * (c + d)
            })
            .collect();
        for _ in 0..8 {
            centers.push(0.5 * (lo + hi));
        }
        let basis = NewtonBasis::new(centers);
        let dim = l + 1;
        let gap_rows = (0..l)
            .into_par_iter()
            .map(|j| {
                let (c, d) = support.gap(j);
                cheb_rule_vec(c, d, cfg, dim, |y, _, _, out| {
                    let w = 1.0 / support.sqrt_h_rest_gap(j, y);
                    basis.values(y, out);
                    for v in out.iter_mut() {
                        *v *= w;
                    }
                })
            })
            .collect::<Result<Vec<_>>>()?;
        // Signed interval moments: mass = (1/pi) sum_i parity_i int T_k / sqrt|H|.
        let parts = (0..support.num_intervals())
            .into_par_iter()
            .map(|i| {
                let (a, b) = support.interval(i);
                cheb_rule_vec(a, b, cfg, dim, |y, _, _, out| {
                    let w = 1.0 / support.sqrt_h_rest_interval(i, y);
                    basis.values(y, out);
                    for v in out.iter_mut() {
                        *v *= w;
                    }
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let mut mass_row = vec![0.0; dim];
        for (i, part) in parts.into_iter().enumerate() {
            let parity = support.parity(i);
            for (slot, v) in mass_row.iter_mut().zip(part) {
                *slot += parity * v / PI;
            }
        }
        Ok(NumeratorAssembler { support, basis, dim, cfg: *cfg, gap_rows, mass_row })
    }

    /// Equilibrium numerator: vanishing gap integrals plus unit mass.
    fn equilibrium(&self) -> Result<NewtonPoly> {
        let n = self.dim;
        let mut a = vec![0.0; n * n];
        let mut b = vec![0.0; n];
        for (j, row) in self.gap_rows.iter().enumerate() {
            a[j * n..(j + 1) * n].copy_from_slice(row);
        }
        a[(n - 1) * n..].copy_from_slice(&self.mass_row);
        b[n - 1] = 1.0;
        solve_dense(&mut a, &mut b, n)?;
        Ok(NewtonPoly::new(self.basis.clone(), b))
    }

    /// Correction `q` of degree `< l` with `int_gap (q - y p_eq) / sqrt(H) = 0`.
    fn linear_correction(&self, p_eq: &NewtonPoly) -> Result<NewtonPoly> {
        let l = self.support.num_gaps();
        if l == 0 {
            return Ok(NewtonPoly::new(self.basis.clone(), vec![0.0]));
        }
        let mut a = vec![0.0; l * l];
        let mut b = vec![0.0; l];
        for j in 0..l {
            for k in 0..l {
                a[j * l + k] = self.gap_rows[j][k];
            }
            let (c, d) = self.support.gap(j);
            let support = self.support;
            b[j] = cheb_rule(c, d, &self.cfg, |y, _, _| {
                y * p_eq.eval(y) / support.sqrt_h_rest_gap(j, y)
            })?;
        }
        solve_dense(&mut a, &mut b, l)?;
        Ok(NewtonPoly::new(self.basis.clone(), b))
    }

    /// Numerator of the unit measure with potential `log|x - alpha| + C`.
    ///
    /// Conditions: for each gap, the (principal-value) integral of
    /// `N / ((y - alpha) sqrt(H))` vanishes; `N(alpha)` equals minus the
    /// value of the `sqrt(H)` branch at `alpha`, which pins unit mass.
    ///
    /// In the gap holding `alpha` the principal value of the pure Chebyshev
    /// weight vanishes, so subtracting the value of the smooth factor at
    /// `alpha` removes the pole with no extra closed-form term.
    fn log_numerator(&self, alpha: f64) -> Result<NewtonPoly> {
        let support = self.support;
        if support.distance(alpha) < 1e-12 {
            return Err(Error::AlphaOnSupport(alpha));
        }
        let n = self.dim;
        let alpha_gap = support.gap_of(alpha);
        let mut a = vec![0.0; n * n];
        let mut b = vec![0.0; n];
        for j in 0..support.num_gaps() {
            let (c, d) = support.gap(j);
            let basis = &self.basis;
            let row = if alpha_gap == Some(j) {
                // phi_k(y) = b_k(y) / rest(y); integrate the divided
                // difference (phi_k(y) - phi_k(alpha)) / (y - alpha) against
                // the weight, split as
                //   D_k(y, alpha) / rest(y)
                //   + b_k(alpha) (rest(alpha) - rest(y)) / ((y-alpha) rest(y) rest(alpha))
                // with the Newton divided-difference recurrence and a
                // log1p/expm1 form for the weight quotient; both are stable
                // at every distance, so no branch switching is needed.
                let mut b_alpha = vec![0.0; n];
                basis.values(alpha, &mut b_alpha);
                let rest_alpha = support.sqrt_h_rest_gap(j, alpha);
                let divided = std::cell::RefCell::new(vec![0.0; n]);
                cheb_rule_vec(c, d, &self.cfg, n, |y, _, _, out| {
                    let rest = support.sqrt_h_rest_gap(j, y);
                    let mut dd = divided.borrow_mut();
                    basis.divided_values(y, alpha, &mut dd);
                    // (rest(alpha) - rest(y)) / (y - alpha), cancellation-free.
                    let dlog: f64 = support
                        .endpoints()
                        .iter()
                        .enumerate()
                        .filter(|&(idx, _)| idx != 2 * j + 1 && idx != 2 * j + 2)
                        .map(|(_, &e)| 0.5 * ((y - alpha) / (alpha - e)).ln_1p())
                        .sum();
                    let quotient = if y == alpha {
                        let dlog_rest: f64 = support
                            .endpoints()
                            .iter()
                            .enumerate()
                            .filter(|&(idx, _)| idx != 2 * j + 1 && idx != 2 * j + 2)
                            .map(|(_, &e)| 0.5 / (alpha - e))
                            .sum();
                        -rest_alpha * dlog_rest
                    } else {
                        -rest_alpha * dlog.exp_m1() / (y - alpha)
                    };
                    for (k, v) in out.iter_mut().enumerate() {
                        *v = dd[k] / rest + b_alpha[k] * quotient / (rest * rest_alpha);
                    }
                })?
            } else {
                cheb_rule_vec(c, d, &self.cfg, n, |y, _, _, out| {
                    let w = 1.0 / ((y - alpha) * support.sqrt_h_rest_gap(j, y));
                    basis.values(y, out);
                    for v in out.iter_mut() {
                        *v *= w;
                    }
                })?
            };
            a[j * n..(j + 1) * n].copy_from_slice(&row);
        }
        // Normalisation: N(alpha) = -S(alpha), the branch of sqrt(H) that is
        // ~ x^{l+1} at +infinity, evaluated at alpha; this pins unit mass.
        let mut b_alpha = vec![0.0; n];
        self.basis.values(alpha, &mut b_alpha);
        a[(n - 1) * n..].copy_from_slice(&b_alpha);
        b[n - 1] = -branch_sign(support, alpha)? * support.sqrt_h_abs(alpha);
        solve_dense(&mut a, &mut b, n)?;
        Ok(NewtonPoly::new(self.basis.clone(), b))
    }
}

/// Sign of the real branch of `sqrt(H)` (the one positive right of the
/// support) at a point off the support: `(-1)^(number of intervals right of x)`.
fn branch_sign(support: &SupportSet, x: f64) -> Result<f64> {
    let (lo, hi) = support.hull();
    let l = support.num_gaps();
    let cuts_right = if x > hi {
        0
    } else if x < lo {
        l + 1
    } else if let Some(g) = support.gap_of(x) {
        l - g
    } else {
        return Err(Error::AlphaOnSupport(x));
    };
    Ok(if cuts_right % 2 == 0 { 1.0 } else { -1.0 })
}

// ---------------------------------------------------------------------------
// Public constructions
// ---------------------------------------------------------------------------

/// Equilibrium measure of the support: density `|p(x)| / (pi sqrt(|H(x)|))`
/// with the degree-`l` numerator fixed by vanishing gap integrals and unit
/// mass.
pub fn equilibrium_measure(support: &SupportSet, cfg: &QuadratureConfig) -> Result<SqrtMeasure> {
    let asm = NumeratorAssembler::new(support, cfg)?;
    let p_eq = asm.equilibrium()?;
    Ok(SqrtMeasure { support: support.clone(), numer: p_eq, denom_roots: Vec::new(), mass: 1.0 })
}

/// Constant value of the equilibrium potential on the support (the log of
/// the capacity), evaluated at the first interval's midpoint.
pub fn capacity_constant(support: &SupportSet, cfg: &QuadratureConfig) -> Result<f64> {
    let eq = equilibrium_measure(support, cfg)?;
    let (a, b) = support.interval(0);
    eq.potential_at(0.5 * (a + b), cfg)
}

/// Unit measure on the support with potential `log|x - alpha| + C`; returns
/// the measure and the constant `C`.
pub fn log_potential_measure(
    support: &SupportSet,
    alpha: f64,
    cfg: &QuadratureConfig,
) -> Result<(SqrtMeasure, f64)> {
    let asm = NumeratorAssembler::new(support, cfg)?;
    let numer = asm.log_numerator(alpha)?;
    let m = SqrtMeasure {
        support: support.clone(),
        numer,
        denom_roots: vec![alpha],
        mass: 1.0,
    };
    let (a, b) = support.interval(0);
    let x0 = 0.5 * (a + b);
    let c = m.potential_at(x0, cfg)? - (x0 - alpha).abs().ln();
    Ok((m, c))
}

/// Unit measure with potential `log|Q(x)| / deg(Q) + C_Q`: the average of the
/// logarithmic measures over the real roots of `Q`.
pub fn measure_for_polynomial(
    support: &SupportSet,
    q: &IntegerPolynomial,
    cfg: &QuadratureConfig,
) -> Result<(SqrtMeasure, f64)> {
    let roots = poly_roots_off_support(q, support)?;
    if roots.len() != q.degree() {
        return Err(Error::GapRootMismatch(format!(
            "{q} has {} real roots but degree {}; complex roots unsupported",
            roots.len(),
            q.degree()
        )));
    }
    let asm = NumeratorAssembler::new(support, cfg)?;
    let deg = roots.len() as f64;
    let mut numer: Option<NewtonPoly> = None;
    let mut c_sum = 0.0;
    let (a0, b0) = support.interval(0);
    let x0 = 0.5 * (a0 + b0);
    for &alpha in &roots {
        let n_alpha = asm.log_numerator(alpha)?;
        let nu = SqrtMeasure {
            support: support.clone(),
            numer: n_alpha.clone(),
            denom_roots: vec![alpha],
            mass: 1.0,
        };
        c_sum += nu.potential_at(x0, cfg)? - (x0 - alpha).abs().ln();
        // Lift n_alpha / (x - alpha) onto the common denominator Q.
        let mut lifted = n_alpha;
        for &other in &roots {
            if other != alpha {
                lifted = lifted.mul_linear(other);
            }
        }
        numer = Some(match numer {
            None => lifted.scale_coeffs(1.0 / deg),
            Some(acc) => acc.add(&lifted.scale_coeffs(1.0 / deg)),
        });
    }
    let m = SqrtMeasure {
        support: support.clone(),
        numer: numer.unwrap(),
        denom_roots: roots,
        mass: 1.0,
    };
    Ok((m, c_sum / deg))
}

/// Signed measure with potential `x + K` on the support (same `K` on every
/// interval). Its mass is `-int x d(mu_eq)`.
pub fn linear_potential_measure(support: &SupportSet, cfg: &QuadratureConfig) -> Result<SqrtMeasure> {
    let (m, _k) = linear_potential_measure_with_offset(support, cfg)?;
    Ok(m)
}

/// As [`linear_potential_measure`], additionally returning the offset `K`.
pub fn linear_potential_measure_with_offset(
    support: &SupportSet,
    cfg: &QuadratureConfig,
) -> Result<(SqrtMeasure, f64)> {
    let asm = NumeratorAssembler::new(support, cfg)?;
    let p_eq = asm.equilibrium()?;
    let m = build_linear_measure(&asm, &p_eq, cfg)?;
    let (a, b) = support.interval(0);
    let x0 = 0.5 * (a + b);
    let k = m.potential_at(x0, cfg)? - x0;
    Ok((m, k))
}

fn build_linear_measure(
    asm: &NumeratorAssembler<'_>,
    p_eq: &NewtonPoly,
    cfg: &QuadratureConfig,
) -> Result<SqrtMeasure> {
    let correction = asm.linear_correction(p_eq)?;
    let numer = p_eq.mul_linear(0.0).scale_coeffs(-1.0).add(&correction);
    let mut m = SqrtMeasure {
        support: asm.support.clone(),
        numer,
        denom_roots: Vec::new(),
        mass: 0.0,
    };
    let eq = SqrtMeasure {
        support: asm.support.clone(),
        numer: p_eq.clone(),
        denom_roots: Vec::new(),
        mass: 1.0,
    };
    m.mass = -eq.expectation(cfg)?;
    Ok(m)
}

// ---------------------------------------------------------------------------
// MeasureBundle
// ---------------------------------------------------------------------------

/// One logarithmic component of a candidate bundle.
#[derive(Debug, Clone)]
struct LogComponent {
    alpha: f64,
    numer: NewtonPoly,
}

/// The weighted combination `w_eq mu_eq + w_lin mu_lin + sum w_Q mu_Q` whose
/// density collapses to `c sqrt(|H|) / prod |Q|` at an optimal support.
#[derive(Debug, Clone)]
pub struct MeasureBundle {
    support: SupportSet,
    polys: Vec<IntegerPolynomial>,
    p_eq: NewtonPoly,
    n_lin: NewtonPoly,
    /// Per polynomial, per real root.
    components: Vec<Vec<LogComponent>>,
    /// Packed evaluation of the combined numerator: the pole-free part
    /// `w_eq p_eq + w_lin n_lin` plus one scaled row per pole, all sharing
    /// one Chebyshev-value recurrence. (Expanding over the common
    /// denominator would need degree-32 coefficients with ~1e11 cancellation
    /// at the record supports, so the poles stay explicit.)
    packed: PackedNumerators,
    weight_eq: f64,
    weight_lin: f64,
    weight_q: Vec<f64>,
    norm_c: f64,
    log_cap: f64,
    lin_offset: f64,
    q_offsets: Vec<f64>,
    mass_lin: f64,
    expectation: f64,
    log_moments: Vec<f64>,
    energy: f64,
}

/// Dual data read off a bundle: the equality constant and multipliers.
#[derive(Debug, Clone, PartialEq)]
pub struct DualValues {
    pub lambda: f64,
    pub lambda0: f64,
    pub lambda_q: Vec<f64>,
}

impl MeasureBundle {
    pub fn support(&self) -> &SupportSet {
        &self.support
    }

    pub fn polys(&self) -> &[IntegerPolynomial] {
        &self.polys
    }

    pub fn mass_lin(&self) -> f64 {
        self.mass_lin
    }

    pub fn weight_eq(&self) -> f64 {
        self.weight_eq
    }

    pub fn weight_lin(&self) -> f64 {
        self.weight_lin
    }

    pub fn weight_q(&self) -> &[f64] {
        &self.weight_q
    }

    /// Normalisation of the collapsed form: `int c sqrt|H| / prod|Q| = 1`.
    pub fn norm_c(&self) -> f64 {
        self.norm_c
    }

    /// Equilibrium potential constant (log capacity of the support).
    pub fn log_cap(&self) -> f64 {
        self.log_cap
    }

    /// Offset of the linear-potential component: `U_lin = x + K`.
    pub fn lin_offset(&self) -> f64 {
        self.lin_offset
    }

    /// Per-polynomial potential offsets `C_Q`.
    pub fn q_offsets(&self) -> &[f64] {
        &self.q_offsets
    }

    pub fn expectation(&self) -> f64 {
        self.expectation
    }

    /// `int log|Q| dmu` for each polynomial, in input order.
    pub fn log_moments(&self) -> &[f64] {
        &self.log_moments
    }

    pub fn energy(&self) -> f64 {
        self.energy
    }

    /// The equilibrium component as a standalone measure.
    pub fn mu_eq(&self) -> SqrtMeasure {
        SqrtMeasure {
            support: self.support.clone(),
            numer: self.p_eq.clone(),
            denom_roots: Vec::new(),
            mass: 1.0,
        }
    }

    /// The linear-potential component as a standalone measure.
    pub fn mu_lin(&self) -> SqrtMeasure {
        SqrtMeasure {
            support: self.support.clone(),
            numer: self.n_lin.clone(),
            denom_roots: Vec::new(),
            mass: self.mass_lin,
        }
    }

    /// The measure attached to polynomial `q_idx` as a standalone measure.
    pub fn mu_q(&self, q_idx: usize) -> SqrtMeasure {
        let comps = &self.components[q_idx];
        let deg = comps.len() as f64;
        let roots: Vec<f64> = comps.iter().map(|c| c.alpha).collect();
        let mut numer: Option<NewtonPoly> = None;
        for c in comps {
            let mut lifted = c.numer.clone();
            for &other in &roots {
                if other != c.alpha {
                    lifted = lifted.mul_linear(other);
                }
            }
            numer = Some(match numer {
                None => lifted.scale_coeffs(1.0 / deg),
                Some(acc) => acc.add(&lifted.scale_coeffs(1.0 / deg)),
            });
        }
        SqrtMeasure {
            support: self.support.clone(),
            numer: numer.expect("polynomial has at least one root"),
            denom_roots: roots,
            mass: 1.0,
        }
    }

    /// All poles of the logarithmic components, flattened.
    fn all_roots(&self) -> impl Iterator<Item = f64> + '_ {
        self.components.iter().flatten().map(|c| c.alpha)
    }

    /// Smooth factor of the combined density on interval `i`.
    fn smooth_factor(&self, interval: usize, y: f64) -> f64 {
        let rest = self.support.sqrt_h_rest_interval(interval, y);
        self.support.parity(interval) * self.packed.eval(y) / (PI * rest)
    }

    fn density_local(&self, interval: usize, y: f64, d_lo: f64, d_hi: f64) -> f64 {
        self.smooth_factor(interval, y) / (d_lo * d_hi).sqrt()
    }

    /// Signed density of the weighted combination.
    pub fn density(&self, x: f64) -> f64 {
        match self.support.interval_of(x) {
            None => 0.0,
            Some(i) => {
                let (a, b) = self.support.interval(i);
                if x <= a || x >= b {
                    f64::INFINITY
                } else {
                    self.density_local(i, x, x - a, b - x)
                }
            }
        }
    }

    /// Combined density on interval `i` with endpoint distances supplied by
    /// the caller.
    pub fn density_with_distances(&self, interval: usize, y: f64, d_lo: f64, d_hi: f64) -> f64 {
        self.density_local(interval, y, d_lo, d_hi)
    }

    /// The collapsed target density `c sqrt(|H(x)|) / prod |Q(x)|`.
    pub fn form_density(&self, x: f64) -> f64 {
        let mut denom = 1.0;
        for r in self.all_roots() {
            denom *= (x - r).abs();
        }
        self.norm_c * self.support.sqrt_h_abs(x) / denom
    }

    /// Max over interior samples (2% clearance: the form vanishes at the
    /// endpoints) of the relative deviation between the combined density and
    /// the collapsed form.
    pub fn form_density_deviation(&self, samples_per_interval: usize) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.support.num_intervals() {
            let (a, b) = self.support.interval(i);
            let len = b - a;
            for k in 0..samples_per_interval {
                let y = a + len * (0.02 + 0.96 * (k as f64 + 0.5) / samples_per_interval as f64);
                let combined = self.density_local(i, y, y - a, b - y);
                let form = self.form_density(y);
                worst = worst.max((combined - form).abs() / form.abs().max(1e-300));
            }
        }
        worst
    }

    /// Closed-form potential on the support:
    /// `w_eq L + w_lin (x + K) + sum w_Q (log|Q(x)|/deg Q + C_Q)`.
    pub fn potential_on_support(&self, x: f64) -> f64 {
        let mut u = self.weight_eq * self.log_cap + self.weight_lin * (x + self.lin_offset);
        for (q_idx, q) in self.polys.iter().enumerate() {
            u += self.weight_q[q_idx]
                * (q.eval(x).abs().ln() / q.degree() as f64 + self.q_offsets[q_idx]);
        }
        u
    }

    /// Reusable potential evaluator for the combined density.
    pub fn potential_evaluator(&self, cfg: &QuadratureConfig) -> Result<PotentialEvaluator> {
        PotentialEvaluator::build(&self.support, cfg, &|i, y, _, _| self.smooth_factor(i, y))
    }

    /// Potential anywhere by quadrature of the combined density; the
    /// closed-form-free route.
    pub fn potential_quadrature(&self, x: f64, cfg: &QuadratureConfig) -> Result<f64> {
        potential_once(&self.support, cfg, x, &|i, y| self.smooth_factor(i, y))
    }

    /// Boundary ratio at endpoint index `idx`: the limit of this measure's
    /// density over the equilibrium density.
    pub fn boundary_ratio(&self, idx: usize) -> f64 {
        let a = self.support.endpoints()[idx];
        self.packed.eval(a) / self.p_eq.eval(a)
    }

    /// Boundary ratios at all endpoints, skipping a pinned origin endpoint.
    pub fn boundary_ratios(&self) -> Vec<f64> {
        (0..self.support.endpoints().len())
            .filter(|&i| self.support.endpoints()[i] > ORIGIN_TOL)
            .map(|i| self.boundary_ratio(i))
            .collect()
    }

    /// Equality constant and multipliers.
    pub fn dual_values(&self) -> DualValues {
        let lambda0 = 1.0 / self.weight_lin;
        let lambda_q: Vec<f64> = self
            .polys
            .iter()
            .zip(&self.weight_q)
            .map(|(q, &w)| -w / (self.weight_lin * q.degree() as f64))
            .collect();
        let mut lambda = -lambda0 * self.weight_eq * self.log_cap - self.lin_offset
            + lambda0 * self.energy / 2.0;
        for (q_idx, _) in self.polys.iter().enumerate() {
            lambda -= lambda0 * self.weight_q[q_idx] * self.q_offsets[q_idx];
        }
        DualValues { lambda, lambda0, lambda_q }
    }

    /// `(x, form density)` pairs at theta-uniform nodes per interval.
    pub fn density_samples(&self, n: usize) -> Vec<(f64, f64)> {
        density_samples_generic(&self.support, n, &|_, y, _, _| self.form_density(y))
    }

    /// `int f` against the combined density.
    pub fn integrate<F>(&self, cfg: &QuadratureConfig, f: F) -> Result<f64>
    where
        F: Fn(f64) -> f64,
    {
        let mut total = 0.0;
        for i in 0..self.support.num_intervals() {
            let (a, b) = self.support.interval(i);
            total += cheb_rule(a, b, cfg, |y, _, _| f(y) * self.smooth_factor(i, y))?;
        }
        Ok(total)
    }
}

/// Limit of `m`'s density over the equilibrium density at endpoint `idx` of
/// their shared support (both densities diverge like the same inverse square
/// root; the ratio is the ratio of numerators over the denominator).
pub fn boundary_ratio_to_equilibrium(m: &SqrtMeasure, eq: &SqrtMeasure, idx: usize) -> f64 {
    let a = m.support().endpoints()[idx];
    m.numer.eval(a) / (m.denom_at(a) * eq.numer.eval(a))
}

/// Numerator rows sharing one Chebyshev-value recurrence:
/// `numerator(y) = dot(base, T(y)) + sum dot(row_a, T(y)) / (y - alpha)`.
#[derive(Debug, Clone)]
struct PackedNumerators {
    basis: NewtonBasis,
    k_max: usize,
    base: Vec<f64>,
    poles: Vec<(f64, Vec<f64>)>,
}

impl PackedNumerators {
    fn build(
        basis: NewtonBasis,
        p_eq: &NewtonPoly,
        n_lin: &NewtonPoly,
        components: &[Vec<LogComponent>],
        weight_eq: f64,
        weight_lin: f64,
        weight_q: &[f64],
    ) -> Self {
        let mut k_max = p_eq.coeffs.len().max(n_lin.coeffs.len());
        for c in components.iter().flatten() {
            k_max = k_max.max(c.numer.coeffs.len());
        }
        let mut base = vec![0.0; k_max];
        for (k, &v) in p_eq.coeffs.iter().enumerate() {
            base[k] += weight_eq * v;
        }
        for (k, &v) in n_lin.coeffs.iter().enumerate() {
            base[k] += weight_lin * v;
        }
        let mut poles = Vec::new();
        for (q_idx, comps) in components.iter().enumerate() {
            let scale = weight_q[q_idx] / comps.len() as f64;
            for c in comps {
                let mut row = vec![0.0; k_max];
                for (k, &v) in c.numer.coeffs.iter().enumerate() {
                    row[k] = scale * v;
                }
                poles.push((c.alpha, row));
            }
        }
        PackedNumerators { basis, k_max, base, poles }
    }

    /// Combined numerator at `y`.
    fn eval(&self, y: f64) -> f64 {
        let mut t = [0.0f64; 64];
        let t = &mut t[..self.k_max];
        self.basis.values(y, t);
        let mut acc: f64 = self.base.iter().zip(t.iter()).map(|(c, tv)| c * tv).sum();
        for (alpha, row) in &self.poles {
            let dot: f64 = row.iter().zip(t.iter()).map(|(c, tv)| c * tv).sum();
            acc += dot / (y - alpha);
        }
        acc
    }
}

/// Builds the candidate bundle for a support and polynomial set.
///
/// Requires exactly one root of `prod Q` in every gap, the remaining roots
/// off the hull, and total degree `l + 1` (so that the collapsed density has
/// a constant numerator). With an empty polynomial set the support must be a
/// single interval pinned at the origin; the two weights are then fixed by
/// unit mass and a vanishing boundary ratio at the right endpoint.
pub fn candidate_measure(
    support: &SupportSet,
    polys: &[IntegerPolynomial],
    cfg: &QuadratureConfig,
) -> Result<MeasureBundle> {
    let timing = std::env::var("SSS_TIMING").is_ok();
    let t0 = std::time::Instant::now();
    let asm = NumeratorAssembler::new(support, cfg)?;
    let p_eq = asm.equilibrium()?;
    if timing { eprintln!("  assembler+eq: {:?}", t0.elapsed()); }
    let t1 = std::time::Instant::now();
    let mu_lin = build_linear_measure(&asm, &p_eq, cfg)?;
    if timing { eprintln!("  mu_lin: {:?}", t1.elapsed()); }
    let n_lin = mu_lin.numer.clone();
    let mass_lin = mu_lin.mass;
    let l = support.num_gaps();

    if polys.is_empty() {
        return candidate_empty_set(support, cfg, p_eq, n_lin, mass_lin);
    }

    for q in polys {
        if !q.is_monic() {
            return Err(Error::GapRootMismatch(format!("{q} is not monic")));
        }
    }
    let total_deg: usize = polys.iter().map(|q| q.degree()).sum();
    if total_deg != l + 1 {
        return Err(Error::GapRootMismatch(format!(
            "total degree {} does not match interval count: need sum deg Q = l + 1 = {}",
            total_deg,
            l + 1
        )));
    }
    let mut roots_per_poly = Vec::with_capacity(polys.len());
    let mut gap_counts = vec![0usize; l];
    let mut outside = 0usize;
    for q in polys {
        let roots = poly_roots_off_support(q, support)?;
        if roots.len() != q.degree() {
            return Err(Error::GapRootMismatch(format!("{q} has complex roots")));
        }
        for &r in &roots {
            match support.gap_of(r) {
                Some(g) => gap_counts[g] += 1,
                None => {
                    let (lo, hi) = support.hull();
                    if r > lo && r < hi {
                        return Err(Error::GapRootMismatch(format!(
                            "root {r} inside the hull but not in a gap"
                        )));
                    }
                    outside += 1;
                }
            }
        }
        roots_per_poly.push(roots);
    }
    for (g, &count) in gap_counts.iter().enumerate() {
        if count != 1 {
            let (lo, hi) = support.gap(g);
            return Err(Error::MultipleRootsInGap { lo, hi, count });
        }
    }
    if outside != 1 {
        return Err(Error::GapRootMismatch(format!(
            "expected exactly one root off the hull, found {outside}"
        )));
    }

    // Normalisation of the collapsed form: sqrt|H| / prod|Q| = weight *
    // (d_lo d_hi) * rest / prod|Q|.
    let mut inv_c = 0.0;
    for i in 0..support.num_intervals() {
        let (a, b) = support.interval(i);
        inv_c += cheb_rule(a, b, cfg, |y, d_lo, d_hi| {
            let rest = support.sqrt_h_rest_interval(i, y);
            let mut denom = 1.0;
            for roots in &roots_per_poly {
                for &r in roots {
                    denom *= (y - r).abs();
                }
            }
            d_lo * d_hi * rest / denom
        })?;
    }
    let norm_c = 1.0 / inv_c;
    let weight_lin = norm_c * PI;

    // Residue coefficients per polynomial. The resultant with H is evaluated
    // as the product of |H| over the polynomial's roots (stable; H in
    // monomial coefficients is hopeless at this degree).
    let mut weight_q = Vec::with_capacity(polys.len());
    for (q_idx, q) in polys.iter().enumerate() {
        let deg = q.degree() as f64;
        let res_h: f64 = roots_per_poly[q_idx]
            .iter()
            .map(|&r| support.h_at(r).abs())
            .product();
        let disc = q.to_real().discriminant().abs();
        let mut res_others = 1.0;
        for (o_idx, other) in polys.iter().enumerate() {
            if o_idx != q_idx {
                res_others *= q.to_real().resultant(&other.to_real()).abs();
            }
        }
        let x_q = -deg * norm_c * PI * res_h.powf(1.0 / (2.0 * deg))
            / (disc.powf(1.0 / deg) * res_others.powf(1.0 / deg));
        weight_q.push(x_q);
    }

    // Logarithmic components and their offsets, one solve per root.
    let t2 = std::time::Instant::now();
    let (a0, b0) = support.interval(0);
    let x0 = 0.5 * (a0 + b0);
    let built: Vec<Result<Vec<(LogComponent, f64)>>> = roots_per_poly
        .par_iter()
        .map(|roots| {
            roots
                .par_iter()
                .map(|&alpha| {
                    let numer = asm.log_numerator(alpha)?;
                    let nu = SqrtMeasure {
                        support: support.clone(),
                        numer: numer.clone(),
                        denom_roots: vec![alpha],
                        mass: 1.0,
                    };
                    let c_alpha = nu.potential_at(x0, cfg)? - (x0 - alpha).abs().ln();
                    Ok((LogComponent { alpha, numer }, c_alpha))
                })
                .collect()
        })
        .collect();
    let mut components = Vec::with_capacity(polys.len());
    let mut q_offsets = Vec::with_capacity(polys.len());
    for per_poly in built {
        let per_poly = per_poly?;
        let deg = per_poly.len() as f64;
        let c_sum: f64 = per_poly.iter().map(|(_, c)| c).sum();
        components.push(per_poly.into_iter().map(|(c, _)| c).collect::<Vec<_>>());
        q_offsets.push(c_sum / deg);
    }

    if timing { eprintln!("  components+offsets: {:?}", t2.elapsed()); }
    let t3 = std::time::Instant::now();
    let weight_eq = 1.0 - weight_lin * mass_lin - weight_q.iter().sum::<f64>();

    let eq_measure = SqrtMeasure {
        support: support.clone(),
        numer: p_eq.clone(),
        denom_roots: Vec::new(),
        mass: 1.0,
    };
    let log_cap = eq_measure.potential_at(x0, cfg)?;
    let lin_measure = SqrtMeasure {
        support: support.clone(),
        numer: n_lin.clone(),
        denom_roots: Vec::new(),
        mass: mass_lin,
    };
    let lin_offset = lin_measure.potential_at(x0, cfg)? - x0;

    let packed = PackedNumerators::build(
        asm.basis.clone(),
        &p_eq,
        &n_lin,
        &components,
        weight_eq,
        weight_lin,
        &weight_q,
    );
    let mut bundle = MeasureBundle {
        support: support.clone(),
        polys: polys.to_vec(),
        p_eq,
        n_lin,
        components,
        packed,
        weight_eq,
        weight_lin,
        weight_q,
        norm_c,
        log_cap,
        lin_offset,
        q_offsets,
        mass_lin,
        expectation: 0.0,
        log_moments: Vec::new(),
        energy: 0.0,
    };
    if timing { eprintln!("  log_cap+lin_offset: {:?}", t3.elapsed()); }
    let t4 = std::time::Instant::now();
    finish_bundle(&mut bundle, cfg)?;
    check_interior_positivity(&bundle)?;
    if timing { eprintln!("  finish+positivity: {:?}", t4.elapsed()); }
    Ok(bundle)
}

fn candidate_empty_set(
    support: &SupportSet,
    cfg: &QuadratureConfig,
    p_eq: NewtonPoly,
    n_lin: NewtonPoly,
    mass_lin: f64,
) -> Result<MeasureBundle> {
    if support.num_intervals() != 1 {
        return Err(Error::GapRootMismatch(
            "empty polynomial set needs a single interval".into(),
        ));
    }
    let (a, b) = support.interval(0);
    if a > ORIGIN_TOL {
        return Err(Error::GapRootMismatch(
            "empty polynomial set needs the left endpoint pinned at 0".into(),
        ));
    }
    // Unit mass and a vanishing boundary ratio at the right endpoint:
    //   w_eq p(b) + w_lin n(b) = 0,  w_eq + w_lin mass_lin = 1.
    let ratio = -n_lin.eval(b) / p_eq.eval(b);
    let weight_lin = 1.0 / (ratio + mass_lin);
    let weight_eq = ratio * weight_lin;
    let eq_measure = SqrtMeasure {
        support: support.clone(),
        numer: p_eq.clone(),
        denom_roots: Vec::new(),
        mass: 1.0,
    };
    let x0 = 0.5 * (a + b);
    let log_cap = eq_measure.potential_at(x0, cfg)?;
    let lin_measure = SqrtMeasure {
        support: support.clone(),
        numer: n_lin.clone(),
        denom_roots: Vec::new(),
        mass: mass_lin,
    };
    let lin_offset = lin_measure.potential_at(x0, cfg)? - x0;
    let basis = p_eq.basis.clone();
    let packed = PackedNumerators::build(basis, &p_eq, &n_lin, &[], weight_eq, weight_lin, &[]);
    let mut bundle = MeasureBundle {
        support: support.clone(),
        polys: Vec::new(),
        p_eq,
        n_lin,
        components: Vec::new(),
        packed,
        weight_eq,
        weight_lin,
        weight_q: Vec::new(),
        norm_c: weight_lin / PI,
        log_cap,
        lin_offset,
        q_offsets: Vec::new(),
        mass_lin,
        expectation: 0.0,
        log_moments: Vec::new(),
        energy: 0.0,
    };
    finish_bundle(&mut bundle, cfg)?;
    Ok(bundle)
}

/// Fills the cached expectation, log moments and energy. The energy uses the
/// closed-form potential on the support:
/// `I = w_eq L + w_lin (E + K) + sum w_Q (logmom_Q / deg Q + C_Q)`.
fn finish_bundle(bundle: &mut MeasureBundle, cfg: &QuadratureConfig) -> Result<()> {
    bundle.expectation = bundle.integrate(cfg, |y| y)?;
    let mut log_moments = Vec::with_capacity(bundle.polys.len());
    if !bundle.polys.is_empty() {
        let ev = bundle.potential_evaluator(cfg)?;
        for comps in &bundle.components {
            let acc: f64 = comps.iter().map(|c| ev.eval(c.alpha)).sum();
            log_moments.push(acc);
        }
    }
    bundle.log_moments = log_moments;
    let mut energy = bundle.weight_eq * bundle.log_cap
        + bundle.weight_lin * (bundle.expectation + bundle.lin_offset);
    for (q_idx, q) in bundle.polys.iter().enumerate() {
        energy += bundle.weight_q[q_idx]
            * (bundle.log_moments[q_idx] / q.degree() as f64 + bundle.q_offsets[q_idx]);
    }
    bundle.energy = energy;
    Ok(())
}

/// Rejects bundles whose combined density is clearly negative at interior
/// sample points (1% clearance from the endpoints; the boundary lobes are
/// allowed to dip during descent, that is what the boundary residuals track).
fn check_interior_positivity(bundle: &MeasureBundle) -> Result<()> {
    let samples = 64;
    for i in 0..bundle.support.num_intervals() {
        let (a, b) = bundle.support.interval(i);
        let len = b - a;
        for k in 0..samples {
            let y = a + len * (0.01 + 0.98 * (k as f64 + 0.5) / samples as f64);
            let v = bundle.density(y);
            if v < -1e-9 * bundle.norm_c.abs().max(1.0) {
                return Err(Error::NegativeDensity { x: y, value: v });
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> QuadratureConfig {
        QuadratureConfig::default()
    }

    fn support(eps: &[f64]) -> SupportSet {
        SupportSet::new(eps.to_vec()).unwrap()
    }

    #[test]
    fn equilibrium_single_interval() {
        let s = support(&[0.0, 4.0]);
        let eq = equilibrium_measure(&s, &cfg()).unwrap();
        assert!((eq.numerator().eval(1.7) - 1.0).abs() < 1e-11);
        let d = eq.density(2.0);
        assert!((d - 1.0 / (PI * 2.0)).abs() < 1e-11);
        assert!((eq.integrate(&cfg(), |_| 1.0).unwrap() - 1.0).abs() < 1e-11);
    }

    #[test]
    fn equilibrium_symmetric_two_intervals() {
        let s = SupportSet::new_unrestricted(vec![-2.0, -1.0, 1.0, 2.0]).unwrap();
        let eq = equilibrium_measure(&s, &cfg()).unwrap();
        // Symmetry puts the numerator root at zero.
        let (v, d) = eq.numerator().eval_with_deriv(0.0);
        let root = -v / d;
        assert!(root.abs() < 1e-10, "numerator root at {root}");
        assert!((eq.integrate(&cfg(), |_| 1.0).unwrap() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn equilibrium_gap_condition() {
        let s = support(&[0.0, 1.0, 2.0, 3.0]);
        let eq = equilibrium_measure(&s, &cfg()).unwrap();
        // Bisection oracle for the numerator root sigma in the gap:
        // int_1^2 (x - sigma)/sqrt(H) dx = 0.
        let gap_int = |sigma: f64| {
            cheb_rule(1.0, 2.0, &cfg(), |y, _, _| {
                (y - sigma) / s.sqrt_h_rest_gap(0, y)
            })
            .unwrap()
        };
        let (mut lo, mut hi) = (1.0, 2.0);
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if gap_int(mid) * gap_int(lo) <= 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        let sigma_oracle = 0.5 * (lo + hi);
        let p = eq.numerator();
        let root = {
            let (mut a, mut b) = (1.0, 2.0);
            for _ in 0..80 {
                let m = 0.5 * (a + b);
                if p.eval(m) * p.eval(a) <= 0.0 {
                    b = m;
                } else {
                    a = m;
                }
            }
            0.5 * (a + b)
        };
        assert!((root - sigma_oracle).abs() < 1e-9, "{root} vs {sigma_oracle}");
        assert!((eq.integrate(&cfg(), |_| 1.0).unwrap() - 1.0).abs() < 1e-10);
        let resid = cheb_rule(1.0, 2.0, &cfg(), |y, _, _| {
            p.eval(y) / s.sqrt_h_rest_gap(0, y)
        })
        .unwrap();
        assert!(resid.abs() < 1e-10, "gap residual {resid}");
    }

    #[test]
    fn capacity_values() {
        let c = cfg();
        assert!(capacity_constant(&support(&[0.0, 4.0]), &c).unwrap().abs() < 1e-10);
        let v = capacity_constant(&support(&[0.0, 18.0]), &c).unwrap();
        assert!((v - (4.5f64).ln()).abs() < 1e-10);
        let v = capacity_constant(&support(&[1.0, 4.0]), &c).unwrap();
        assert!((v - (3.0f64 / 4.0).ln()).abs() < 1e-10);
    }

    #[test]
    fn equilibrium_potential_constant_on_support() {
        let s = support(&[0.5, 1.5, 2.0, 3.0]);
        let eq = equilibrium_measure(&s, &cfg()).unwrap();
        let ev = eq.potential_evaluator(&cfg()).unwrap();
        let mut values = Vec::new();
        for i in 0..2 {
            let (a, b) = s.interval(i);
            for k in 0..12 {
                let x = a + (b - a) * (0.02 + 0.96 * k as f64 / 11.0);
                values.push(ev.eval(x));
            }
        }
        let max = values.iter().cloned().fold(f64::MIN, f64::max);
        let min = values.iter().cloned().fold(f64::MAX, f64::min);
        assert!(max - min < 1e-10, "potential spread {}", max - min);
    }

    #[test]
    fn log_measure_single_interval_closed_form() {
        // For [a,b] and pole 0: density sqrt(ab)/(pi x sqrt((b-x)(x-a))),
        // C = -log((a+b+2 sqrt(ab))/(b-a)).
        let (a, b) = (1.0, 4.0);
        let s = support(&[a, b]);
        let (nu, c_off) = log_potential_measure(&s, 0.0, &cfg()).unwrap();
        let g = (a * b).sqrt();
        for x in [1.2, 2.0, 3.5] {
            let expect = g / (PI * x * ((b - x) * (x - a)).sqrt());
            assert!((nu.density(x) - expect).abs() < 1e-10, "density at {x}");
        }
        let expect_c = -((a + b + 2.0 * g) / (b - a)).ln();
        assert!((c_off - expect_c).abs() < 1e-10, "{c_off} vs {expect_c}");
        assert!((nu.expectation(&cfg()).unwrap() - 2.0).abs() < 1e-10);
    }

    #[test]
    fn log_measure_two_intervals_offset_constant() {
        let s = support(&[0.5, 1.5, 2.0, 3.0]);
        let (nu, c_off) = log_potential_measure(&s, 0.0, &cfg()).unwrap();
        assert!((nu.integrate(&cfg(), |_| 1.0).unwrap() - 1.0).abs() < 1e-10);
        let ev = nu.potential_evaluator(&cfg()).unwrap();
        for i in 0..2 {
            let (a, b) = s.interval(i);
            for k in 0..10 {
                let x = a + (b - a) * (0.02 + 0.96 * k as f64 / 9.0);
                let dev = ev.eval(x) - x.ln() - c_off;
                assert!(dev.abs() < 1e-9, "offset deviation {dev:.2e} at {x}");
            }
        }
    }

    #[test]
    fn log_measure_pole_in_gap() {
        let s = support(&[0.5, 0.8, 2.7, 5.0]);
        let q = IntegerPolynomial::parse("x^2-3x+1").unwrap();
        let (mu, c_q) = measure_for_polynomial(&s, &q, &cfg()).unwrap();
        assert!((mu.integrate(&cfg(), |_| 1.0).unwrap() - 1.0).abs() < 1e-9);
        let ev = mu.potential_evaluator(&cfg()).unwrap();
        for i in 0..2 {
            let (a, b) = s.interval(i);
            for k in 0..8 {
                let x = a + (b - a) * (0.03 + 0.94 * k as f64 / 7.0);
                let dev = ev.eval(x) - q.eval(x).abs().ln() / 2.0 - c_q;
                assert!(dev.abs() < 2e-9, "deviation {dev:.2e} at {x}");
            }
        }
        for (x, d) in mu.density_samples(40) {
            assert!(d > 0.0, "density {d} at {x}");
        }
    }

    #[test]
    fn linear_measure_single_interval() {
        let (a, b) = (1.0, 4.0);
        let s = support(&[a, b]);
        let m = 0.5 * (a + b);
        let (lin, _k) = linear_potential_measure_with_offset(&s, &cfg()).unwrap();
        for x in [1.3, 2.5, 3.6] {
            let expect = -x / (PI * ((b - x) * (x - a)).sqrt());
            assert!((lin.density(x) - expect).abs() < 1e-11);
        }
        assert!((lin.mass() - -m).abs() < 1e-10);
        let ev = lin.potential_evaluator(&cfg()).unwrap();
        let u1 = ev.eval(2.0);
        let u2 = ev.eval(3.0);
        assert!((u2 - u1 - 1.0).abs() < 1e-10, "slope {}", u2 - u1);
    }

    #[test]
    fn linear_measure_two_intervals() {
        let s = support(&[0.5, 1.5, 2.0, 3.0]);
        let (lin, k) = linear_potential_measure_with_offset(&s, &cfg()).unwrap();
        let ev = lin.potential_evaluator(&cfg()).unwrap();
        let mut worst = 0.0f64;
        for i in 0..2 {
            let (a, b) = s.interval(i);
            for t in 0..10 {
                let x = a + (b - a) * (0.02 + 0.96 * t as f64 / 9.0);
                worst = worst.max((ev.eval(x) - x - k).abs());
            }
        }
        assert!(worst < 1e-9, "linear potential deviation {worst:.2e}");
        let eq = equilibrium_measure(&s, &cfg()).unwrap();
        let e_eq = eq.expectation(&cfg()).unwrap();
        assert!((lin.mass() + e_eq).abs() < 1e-10);
        let quad_mass = lin.integrate(&cfg(), |_| 1.0).unwrap();
        assert!((quad_mass - lin.mass()).abs() < 1e-9);
    }

    #[test]
    fn candidate_rejects_bad_gap_patterns() {
        let s = support(&[0.5, 0.8, 2.7, 5.0]);
        let q = vec![IntegerPolynomial::parse("x").unwrap()];
        assert!(matches!(
            candidate_measure(&s, &q, &cfg()),
            Err(Error::GapRootMismatch(_))
        ));
        let s2 = support(&[0.2, 0.3, 2.7, 5.0]);
        let q2 = vec![IntegerPolynomial::parse("x^2-3x+1").unwrap()];
        assert!(matches!(
            candidate_measure(&s2, &q2, &cfg()),
            Err(Error::MultipleRootsInGap { .. })
        ));
    }

    #[test]
    fn empty_set_bundle_matches_closed_form() {
        // Pinned-origin single interval: weights solve unit mass + vanishing
        // right-endpoint ratio. At b = 4 sqrt(e) this is the sqrt(e) optimum.
        let b = 4.0 * std::f64::consts::E.sqrt();
        let s = support(&[0.0, b]);
        let bundle = candidate_measure(&s, &[], &cfg()).unwrap();
        assert!((bundle.weight_lin - 2.0 / b).abs() < 1e-10);
        assert!((bundle.weight_eq - 2.0).abs() < 1e-9);
        for x in [0.5, 2.0, 5.0] {
            let expect = ((b - x) / (std::f64::consts::E * x)).sqrt() / (2.0 * PI);
            assert!((bundle.density(x) - expect).abs() < 1e-10, "at {x}");
        }
        assert!(bundle.energy().abs() < 1e-9, "energy {}", bundle.energy());
        let dual = bundle.dual_values();
        let sqrt_e = std::f64::consts::E.sqrt();
        assert!((dual.lambda - sqrt_e).abs() < 1e-9, "lambda {}", dual.lambda);
        assert!((dual.lambda0 - 2.0 * sqrt_e).abs() < 1e-9);
        assert!((bundle.expectation() - sqrt_e).abs() < 1e-10);
    }
}
