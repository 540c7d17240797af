//! Dual-certificate verification.
//!
//! A certificate records a polynomial set, a support, the equality constant
//! `lambda`, the multipliers `lambda0` and `lambda_Q`, the density
//! normalisation and the worst boundary ratio `delta`. Verification rebuilds
//! the candidate measure from the support alone and checks that
//!
//! * `x = lambda + sum lambda_Q log|Q(x)| + lambda0 (U(x) - I/2)` holds on
//!   the support to within tolerance,
//! * the boundary ratios stay below `delta`,
//! * in every gap, on both sides of its root, the second derivative of the
//!   slack stays positive once the worst-case contribution of the (tiny)
//!   negative part of `mu - delta_side mu_eq` is subtracted,
//!
//! which together convert `lambda - delta lambda0 log 18` into a lower bound
//! for the polynomial set.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::descent::DescentOutcome;
use crate::error::{Error, Result};
use crate::measures::{candidate_measure, MeasureBundle, ORIGIN_TOL};
use crate::poly::IntegerPolynomial;
use crate::quad::{integrate_smooth, QuadratureConfig, SupportSet, DOMAIN_MAX};

/// Everything needed to re-verify a bound. Serialises to the on-disk JSON
/// schema (field names are part of the format).
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct Certificate {
    pub polys: Vec<String>,
    pub endpoints: Vec<f64>,
    pub lambda: f64,
    pub lambda0: f64,
    #[serde(rename = "lambdaQ")]
    pub lambda_q: BTreeMap<String, f64>,
    pub c: f64,
    pub delta: f64,
    pub certified_bound: f64,
}

impl Certificate {
    /// Drafts a certificate from a descent outcome.
    pub fn from_outcome(outcome: &DescentOutcome) -> Certificate {
        Self::from_bundle(&outcome.bundle)
    }

    pub fn from_bundle(bundle: &MeasureBundle) -> Certificate {
        let dual = bundle.dual_values();
        let ratios = bundle.boundary_ratios();
        let delta = ratios.iter().fold(0.0f64, |m, r| m.max(r.abs()));
        let mut lambda_q = BTreeMap::new();
        for (q, &l) in bundle.polys().iter().zip(&dual.lambda_q) {
            lambda_q.insert(q.to_string(), l);
        }
        Certificate {
            polys: bundle.polys().iter().map(|q| q.to_string()).collect(),
            endpoints: bundle.support().endpoints().to_vec(),
            lambda: dual.lambda,
            lambda0: dual.lambda0,
            lambda_q,
            c: bundle.norm_c(),
            delta,
            certified_bound: dual.lambda - delta * dual.lambda0 * DOMAIN_MAX.ln(),
        }
    }

    pub fn parse_polys(&self) -> Result<Vec<IntegerPolynomial>> {
        let mut polys = Vec::with_capacity(self.polys.len());
        for s in &self.polys {
            polys.push(IntegerPolynomial::parse(s)?);
        }
        Ok(polys)
    }

    fn lambda_q_vec(&self, polys: &[IntegerPolynomial]) -> Result<Vec<f64>> {
        polys
            .iter()
            .map(|q| {
                self.lambda_q
                    .get(&q.to_string())
                    .copied()
                    .ok_or_else(|| Error::Parse(format!("missing lambdaQ entry for {q}")))
            })
            .collect()
    }
}

/// Outcome of the verification checks.
#[derive(Debug, Clone, Serialize)]
pub struct VerificationReport {
    pub equality_max_dev: f64,
    pub delta_max: f64,
    pub convexity_ok_per_gap: Vec<bool>,
    pub grid_min_g: f64,
    pub certified_bound: f64,
    pub pass: bool,
}

impl VerificationReport {
    /// Plain-text rendering, one aligned line per check.
    pub fn render(&self) -> String {
        let mut s = String::new();
        s.push_str(&format!("equality max deviation  {:>14.6e}\n", self.equality_max_dev));
        s.push_str(&format!("boundary ratio max      {:>14.6e}\n", self.delta_max));
        let conv = if self.convexity_ok_per_gap.is_empty() {
            "none (no gaps)".to_string()
        } else {
            self.convexity_ok_per_gap
                .iter()
                .map(|b| if *b { "ok" } else { "FAIL" })
                .collect::<Vec<_>>()
                .join(",")
        };
        s.push_str(&format!("gap convexity           {conv}\n"));
        s.push_str(&format!("grid min slack          {:>14.6e}\n", self.grid_min_g));
        s.push_str(&format!("certified bound         {:>14.9}\n", self.certified_bound));
        s.push_str(&format!("pass                    {}\n", self.pass));
        s
    }
}

/// Max deviation of the support equality over 100 interior samples per
/// interval, using the certificate's multipliers against potentials rebuilt
/// from the support.
pub fn check_equality_on_support(cert: &Certificate, cfg: &QuadratureConfig) -> Result<f64> {
    let polys = cert.parse_polys()?;
    let support = SupportSet::new(cert.endpoints.clone())?;
    let bundle = candidate_measure(&support, &polys, cfg)?;
    let lambda_q = cert.lambda_q_vec(&polys)?;
    Ok(equality_deviation(cert, &bundle, &polys, &lambda_q, 100))
}

fn equality_deviation(
    cert: &Certificate,
    bundle: &MeasureBundle,
    polys: &[IntegerPolynomial],
    lambda_q: &[f64],
    samples_per_interval: usize,
) -> f64 {
    let support = bundle.support();
    let energy = bundle.energy();
    let mut worst = 0.0f64;
    for i in 0..support.num_intervals() {
        let (a, b) = support.interval(i);
        let c = 0.5 * (b - a);
        let m = 0.5 * (a + b);
        for k in 0..samples_per_interval {
            let theta = (k as f64 + 0.5) * PI / samples_per_interval as f64;
            let x = m + c * theta.cos();
            let mut rhs = cert.lambda + cert.lambda0 * (bundle.potential_on_support(x) - energy / 2.0);
            for (q, &lq) in polys.iter().zip(lambda_q) {
                rhs += lq * q.eval(x).abs().ln();
            }
            worst = worst.max((x - rhs).abs());
        }
    }
    worst
}

/// Boundary ratios of the rebuilt measure at the (positive) endpoints.
pub fn boundary_ratios(cert: &Certificate, cfg: &QuadratureConfig) -> Result<Vec<f64>> {
    let polys = cert.parse_polys()?;
    let support = SupportSet::new(cert.endpoints.clone())?;
    let bundle = candidate_measure(&support, &polys, cfg)?;
    Ok(bundle.boundary_ratios())
}

/// Frozen quadrature nodes for one support interval: positions, plain
/// weights, and cached density values.
struct FrozenNodes {
    ys: Vec<f64>,
    /// weight for  int f dy  ~  sum w_k f(y_k), with the measure density
    /// already folded in.
    w_density: Vec<f64>,
    /// same, for the equilibrium density.
    w_eq: Vec<f64>,
}

fn freeze_nodes(bundle: &MeasureBundle, n: usize) -> Vec<FrozenNodes> {
    let support = bundle.support();
    let eq = bundle.mu_eq();
    (0..support.num_intervals())
        .map(|i| {
            let (a, b) = support.interval(i);
            let c = 0.5 * (b - a);
            let m = 0.5 * (a + b);
            let h = PI / n as f64;
            let mut ys = Vec::with_capacity(n);
            let mut w_density = Vec::with_capacity(n);
            let mut w_eq = Vec::with_capacity(n);
            for k in 0..n {
                let theta = (k as f64 + 0.5) * h;
                let (s, co) = theta.sin_cos();
                let y = m + c * co;
                let d_lo = c * (1.0 + co);
                let d_hi = c * (1.0 - co);
                let base = c * h * s;
                ys.push(y);
                // Density evaluated with exact endpoint distances.
                let dens = bundle_density_local(bundle, i, y, d_lo, d_hi);
                let dens_eq = eq_density_local(&eq, i, y, d_lo, d_hi);
                w_density.push(base * dens);
                w_eq.push(base * dens_eq);
            }
            FrozenNodes { ys, w_density, w_eq }
        })
        .collect()
}

fn bundle_density_local(bundle: &MeasureBundle, i: usize, y: f64, d_lo: f64, d_hi: f64) -> f64 {
    // Reconstruct through the public pieces: density = parity * numer / (...).
    // MeasureBundle exposes density() for interior points; here the distances
    // are supplied to stay stable near the endpoints.
    bundle.density_with_distances(i, y, d_lo, d_hi)
}

fn eq_density_local(eq: &crate::measures::SqrtMeasure, i: usize, y: f64, d_lo: f64, d_hi: f64) -> f64 {
    eq.density_with_distances(i, y, d_lo, d_hi)
}

/// One side of a gap: `(lo, hi)` between an endpoint and the gap's root.
struct GapSide {
    lo: f64,
    hi: f64,
    /// Index of the endpoint whose boundary ratio normalises this side.
    endpoint_idx: usize,
}

/// Convexity certificate for every gap: on each side of the gap root the
/// curvature
/// `sum lambda_Q / (x - alpha)^2 + lambda0 int f_side(y) / (x - y)^2 dy`
/// must stay positive, where `f_side = mu - delta_side mu_eq`. The integral
/// over the (detected, padded) negative windows of `f_side` is replaced by
/// the worst-case bound `-delta_side lambda0 mu_eq(W) / d(x, W)^2`.
pub fn check_gap_convexity(cert: &Certificate, cfg: &QuadratureConfig) -> Result<Vec<bool>> {
    let polys = cert.parse_polys()?;
    let support = SupportSet::new(cert.endpoints.clone())?;
    let bundle = candidate_measure(&support, &polys, cfg)?;
    let lambda_q = cert.lambda_q_vec(&polys)?;
    gap_convexity(&bundle, cert, &polys, &lambda_q)
}

fn gap_convexity(
    bundle: &MeasureBundle,
    cert: &Certificate,
    polys: &[IntegerPolynomial],
    lambda_q: &[f64],
) -> Result<Vec<bool>> {
    let support = bundle.support();
    let l = support.num_gaps();
    if l == 0 {
        return Ok(Vec::new());
    }
    // All roots with their multiplier weights (per-root lambda is the
    // polynomial's lambda_Q; the curvature sum runs over individual roots).
    let mut root_weights: Vec<(f64, f64)> = Vec::new();
    for (q_idx, q) in polys.iter().enumerate() {
        let roots = q.to_real().real_roots(-100.0, 100.0)?;
        for r in roots {
            root_weights.push((r, lambda_q[q_idx]));
        }
    }
    let nodes = freeze_nodes(bundle, 4096);

    let verdicts: Vec<Result<bool>> = (0..l)
        .into_par_iter()
        .map(|g| {
            let (lo, hi) = support.gap(g);
            let root = root_weights
                .iter()
                .map(|&(r, _)| r)
                .filter(|&r| r > lo && r < hi)
                .fold(f64::NAN, |acc, r| if acc.is_nan() { r } else { acc });
            if root.is_nan() {
                return Err(Error::MultipleRootsInGap { lo, hi, count: 0 });
            }
            let count = root_weights.iter().filter(|&&(r, _)| r > lo && r < hi).count();
            if count != 1 {
                return Err(Error::MultipleRootsInGap { lo, hi, count });
            }
            let sides = [
                GapSide { lo, hi: root, endpoint_idx: 2 * g + 1 },
                GapSide { lo: root, hi, endpoint_idx: 2 * g + 2 },
            ];
            for side in sides {
                if !side_convex(bundle, cert, &root_weights, &nodes, &side)? {
                    return Ok(false);
                }
            }
            Ok(true)
        })
        .collect();
    verdicts.into_iter().collect()
}

/// Negative window of `f_side` hugging one endpoint, detected by sampling at
/// geometrically spaced distances; `None` when no negativity shows up.
fn negative_window(
    bundle: &MeasureBundle,
    delta_side: f64,
    endpoint_idx: usize,
) -> Option<(f64, f64)> {
    const WINDOW_CAP: f64 = 1e-3;
    let support = bundle.support();
    let a = support.endpoints()[endpoint_idx];
    let interval = endpoint_idx / 2;
    let (ia, ib) = support.interval(interval);
    let inward = if endpoint_idx % 2 == 0 { 1.0 } else { -1.0 };
    let len = ib - ia;
    let eq = bundle.mu_eq();
    let mut reach: f64 = 0.0;
    let mut t = 1e-12 * len;
    let cap = WINDOW_CAP.min(0.45 * len);
    while t < cap {
        let y = a + inward * t;
        let d_lo = y - ia;
        let d_hi = ib - y;
        let f = bundle.density_with_distances(interval, y, d_lo, d_hi)
            - delta_side * eq.density_with_distances(interval, y, d_lo, d_hi);
        if f < 0.0 {
            reach = t;
        }
        t *= 1.35;
    }
    if reach == 0.0 {
        return None;
    }
    let width = (2.0 * reach).min(cap);
    Some(if inward > 0.0 { (a, a + width) } else { (a - width, a) })
}

fn side_convex(
    bundle: &MeasureBundle,
    cert: &Certificate,
    root_weights: &[(f64, f64)],
    nodes: &[FrozenNodes],
    side: &GapSide,
) -> Result<bool> {
    let support = bundle.support();
    let eq = bundle.mu_eq();
    let delta_side = bundle.boundary_ratio(side.endpoint_idx);
    let delta_bound = delta_side.max(0.0);

    // Detect where f_side dips negative: only endpoints with a smaller
    // boundary ratio than this side's can produce such a dip.
    let mut windows: Vec<(f64, f64)> = Vec::new();
    for (idx, &e) in support.endpoints().iter().enumerate() {
        if e <= ORIGIN_TOL {
            continue;
        }
        if bundle.boundary_ratio(idx) < delta_side + 1e-15 {
            if let Some(w) = negative_window(bundle, delta_side, idx) {
                windows.push(w);
            }
        }
    }
    let in_window = |y: f64| windows.iter().any(|&(a, b)| y >= a && y <= b);

    // Equilibrium mass of the windows (worst-case weight of the negative
    // part). Each window hugs one endpoint; substituting u = sqrt(distance)
    // removes the inverse-square-root spike, leaving a smooth integrand.
    let mut window_mass = 0.0;
    for &(wa, wb) in &windows {
        let i = support
            .interval_of(0.5 * (wa + wb))
            .ok_or_else(|| Error::InvalidSupport("window escaped its interval".into()))?;
        let (ia, ib) = support.interval(i);
        let at_left = (wa - ia).abs() < (wb - ib).abs();
        let width = wb - wa;
        let g = |u: f64| {
            let t = u * u;
            let y = if at_left { ia + t } else { ib - t };
            let (d_lo, d_hi) = if at_left { (t, ib - y) } else { (y - ia, t) };
            2.0 * u * eq.density_with_distances(i, y, d_lo.max(1e-300), d_hi.max(1e-300))
        };
        window_mass += integrate_smooth(g, 1e-9 * width.sqrt(), width.sqrt(), 1e-11)?;
    }

    // Sanity: f_side must be nonnegative outside the windows (sampled).
    for (i, frozen) in nodes.iter().enumerate() {
        let _ = i;
        for (k, &y) in frozen.ys.iter().enumerate() {
            if in_window(y) {
                continue;
            }
            let f = frozen.w_density[k] - delta_side * frozen.w_eq[k];
            if f < -1e-13 {
                return Ok(false);
            }
        }
    }

    // Grid over the side with local refinement near the minimum.
    let len = side.hi - side.lo;
    if len <= 0.0 {
        return Ok(true);
    }
    let n_grid = ((1000.0 * len).ceil() as usize).clamp(64, 4000);
    let margin = 1e-9 * len.max(1e-3);
    let value_at = |x: f64| -> f64 {
        let mut v: f64 = root_weights
            .iter()
            .map(|&(r, w)| w / ((x - r) * (x - r)))
            .sum();
        // lambda0 * int_{Sigma \ W} f_side / (x - y)^2.
        let mut integral = 0.0;
        for frozen in nodes {
            for (k, &y) in frozen.ys.iter().enumerate() {
                if in_window(y) {
                    continue;
                }
                let d = x - y;
                integral += (frozen.w_density[k] - delta_side * frozen.w_eq[k]) / (d * d);
            }
        }
        v += cert.lambda0 * integral;
        if !windows.is_empty() {
            let dist = windows
                .iter()
                .map(|&(a, b)| if x < a { a - x } else if x > b { x - b } else { 0.0 })
                .fold(f64::INFINITY, f64::min)
                .max(1e-12);
            v -= delta_bound * cert.lambda0 * window_mass / (dist * dist);
        }
        v
    };
    let mut min_v = f64::INFINITY;
    let mut min_x = side.lo;
    for k in 0..=n_grid {
        let x = side.lo + margin + (len - 2.0 * margin) * k as f64 / n_grid as f64;
        let v = value_at(x);
        if v < min_v {
            min_v = v;
            min_x = x;
        }
    }
    // Refine tenfold around the grid minimum.
    let cell = (len - 2.0 * margin) / n_grid as f64;
    for k in 0..=100 {
        let x = (min_x - cell) + 2.0 * cell * k as f64 / 100.0;
        if x > side.lo && x < side.hi {
            min_v = min_v.min(value_at(x));
        }
    }
    Ok(min_v > 0.0)
}

/// Runs every check and assembles the report. `pass` requires the equality
/// deviation below 1e-6, all gap convexity checks, `lambda0 > 0`, every
/// `lambda_Q >= 0`, and the certificate not claiming more than the rebuilt
/// bound.
pub fn certify(cert: &Certificate, cfg: &QuadratureConfig) -> Result<VerificationReport> {
    let polys = cert.parse_polys()?;
    let support = SupportSet::new(cert.endpoints.clone())?;
    let bundle = candidate_measure(&support, &polys, cfg)?;
    let lambda_q = cert.lambda_q_vec(&polys)?;

    let equality_max_dev = equality_deviation(cert, &bundle, &polys, &lambda_q, 100);
    let ratios = bundle.boundary_ratios();
    let delta_max = ratios.iter().fold(0.0f64, |m, r| m.max(r.abs()));
    let convexity_ok_per_gap = gap_convexity(&bundle, cert, &polys, &lambda_q)?;
    let grid_min_g = slack_grid_min(&bundle, cert, &polys, &lambda_q, 10_000)?;
    let certified_bound = cert.lambda - delta_max * cert.lambda0 * DOMAIN_MAX.ln();

    let pass = equality_max_dev < 1e-6
        && convexity_ok_per_gap.iter().all(|&b| b)
        && cert.lambda0 > 0.0
        && lambda_q.iter().all(|&l| l >= 0.0)
        && cert.certified_bound <= certified_bound + 1e-9;
    Ok(VerificationReport {
        equality_max_dev,
        delta_max,
        convexity_ok_per_gap,
        grid_min_g,
        certified_bound,
        pass,
    })
}

/// Minimum over a uniform grid on `[0, 18]` of the dual slack
/// `g(x) = x - lambda - sum lambda_Q log|Q(x)| - lambda0 (U(x) - I/2)`.
/// On the support the closed-form potential is used; elsewhere the spectral
/// evaluator of the combined density.
pub fn slack_grid_min(
    bundle: &MeasureBundle,
    cert: &Certificate,
    polys: &[IntegerPolynomial],
    lambda_q: &[f64],
    grid: usize,
) -> Result<f64> {
    let support = bundle.support();
    let energy = bundle.energy();
    let ev = bundle.potential_evaluator(&QuadratureConfig::default())?;
    let slack = |x: f64| -> f64 {
        let u = if support.contains(x) { bundle.potential_on_support(x) } else { ev.eval(x) };
        let mut g = x - cert.lambda - cert.lambda0 * (u - energy / 2.0);
        for (q, &lq) in polys.iter().zip(lambda_q) {
            g -= lq * q.eval(x).abs().ln();
        }
        g
    };
    let values: Vec<f64> = (0..=grid)
        .into_par_iter()
        .map(|k| slack(DOMAIN_MAX * k as f64 / grid as f64))
        .collect();
    Ok(values.into_iter().filter(|v| v.is_finite()).fold(f64::INFINITY, f64::min))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::closedform::solve_siegel;

    fn cfg() -> QuadratureConfig {
        QuadratureConfig::default()
    }

    fn siegel_certificate() -> Certificate {
        let sol = solve_siegel(1e-12).unwrap();
        let support = SupportSet::new(vec![sol.a, sol.b]).unwrap();
        let polys = vec![IntegerPolynomial::parse("x").unwrap()];
        let bundle = candidate_measure(&support, &polys, &cfg()).unwrap();
        Certificate::from_bundle(&bundle)
    }

    #[test]
    fn siegel_certificate_verifies() {
        let cert = siegel_certificate();
        assert!((cert.lambda - 1.7336105).abs() < 1e-6, "lambda {}", cert.lambda);
        let report = certify(&cert, &cfg()).unwrap();
        assert!(report.equality_max_dev < 1e-7, "equality dev {}", report.equality_max_dev);
        assert!(report.delta_max < 1e-7, "delta {}", report.delta_max);
        assert!(report.pass);
        assert!(report.convexity_ok_per_gap.is_empty());
        assert!((report.certified_bound - 1.7336105).abs() < 1e-5);
    }

    #[test]
    fn tampered_lambda_fails_equality() {
        let mut cert = siegel_certificate();
        cert.lambda += 1e-3;
        let report = certify(&cert, &cfg()).unwrap();
        assert!(report.equality_max_dev > 5e-4);
        assert!(!report.pass);
    }

    #[test]
    fn equilibrium_measure_boundary_ratios_are_one() {
        // For the equilibrium measure against itself the ratio is exactly 1.
        let support = SupportSet::new(vec![0.5, 1.5, 2.0, 3.0]).unwrap();
        let eq = crate::measures::equilibrium_measure(&support, &cfg()).unwrap();
        for idx in 0..4 {
            let r = crate::measures::boundary_ratio_to_equilibrium(&eq, &eq, idx);
            assert!((r - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn json_round_trip_schema() {
        let cert = siegel_certificate();
        let json = serde_json::to_string_pretty(&cert).unwrap();
        assert!(json.contains("\"polys\""));
        assert!(json.contains("\"lambdaQ\""));
        assert!(json.contains("\"certified_bound\""));
        let back: Certificate = serde_json::from_str(&json).unwrap();
        assert_eq!(cert, back);
        // Missing field is a parse error.
        let broken = json.replace("\"delta\"", "\"junk_field\"");
        assert!(serde_json::from_str::<Certificate>(&broken).is_err());
    }
}
