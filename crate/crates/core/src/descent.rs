//! Gradient descent on support endpoints.
//!
//! For a fixed polynomial set the optimal support is characterised by
//! vanishing residuals: the energy of the candidate measure, its normalised
//! boundary densities, and its log moments. The objective is the sum of
//! squares of these residuals; the gradient is taken by central finite
//! differences in each endpoint (coordinates are independent, so they are
//! evaluated in parallel and reduced in index order), and steps use a
//! backtracking line search with an adaptive initial step.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::measures::{candidate_measure, DualValues, MeasureBundle, ORIGIN_TOL};
use crate::poly::IntegerPolynomial;
use crate::quad::{QuadratureConfig, SupportSet, DOMAIN_MAX};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DescentConfig {
    /// Relative finite-difference step.
    pub fd_step: f64,
    pub max_iters: u64,
    /// Stop once the objective falls below this.
    pub objective_tol: f64,
    /// Backtracking shrink factor.
    pub shrink: f64,
    /// Armijo sufficient-decrease constant.
    pub sufficient_decrease: f64,
    /// Use raw boundary numerators instead of equilibrium-normalised ratios.
    pub raw_boundary: bool,
    pub quad: QuadratureConfig,
}

impl Default for DescentConfig {
    fn default() -> Self {
        DescentConfig {
            fd_step: 1e-6,
            max_iters: 100_000,
            objective_tol: 1e-16,
            shrink: 0.5,
            sufficient_decrease: 1e-4,
            raw_boundary: false,
            // Fixed node counts: finite differences need integrals that vary
            // smoothly with the endpoints.
            quad: QuadratureConfig::fixed(1024),
        }
    }
}

/// Endpoint vector, residual vector and objective at one iterate.
#[derive(Debug, Clone)]
pub struct DescentState {
    pub endpoints: Vec<f64>,
    pub residuals: Vec<f64>,
    pub objective: f64,
    pub iteration: u64,
}

impl DescentState {
    /// The objective is definitionally the sum of squared residuals.
    pub fn objective_consistent(&self) -> bool {
        let s: f64 = self.residuals.iter().map(|r| r * r).sum();
        (s - self.objective).abs() <= 1e-12 * (1.0 + s.abs())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    Converged,
    MaxIters,
    Stalled,
}

/// Final iterate plus everything needed to draft a certificate.
#[derive(Debug, Clone)]
pub struct DescentOutcome {
    pub state: DescentState,
    pub bundle: MeasureBundle,
    pub dual: DualValues,
    pub termination: Termination,
    /// Objective after every accepted step (non-increasing).
    pub objective_history: Vec<f64>,
}

/// Residual vector at a support: `[energy, boundary ratios at positive
/// endpoints..., log moments per polynomial...]`. All entries vanish at the
/// optimum.
pub fn residuals(
    support: &SupportSet,
    polys: &[IntegerPolynomial],
    cfg: &DescentConfig,
) -> Result<Vec<f64>> {
    let bundle = candidate_measure(support, polys, &cfg.quad)?;
    Ok(residuals_of_bundle(&bundle, cfg))
}

fn residuals_of_bundle(bundle: &MeasureBundle, cfg: &DescentConfig) -> Vec<f64> {
    let mut r = vec![bundle.energy()];
    if cfg.raw_boundary {
        // Raw divergence coefficients: ratio times the equilibrium numerator.
        let support = bundle.support().clone();
        let eq = bundle.mu_eq();
        for (i, &a) in support.endpoints().iter().enumerate() {
            if a > ORIGIN_TOL {
                r.push(bundle.boundary_ratio(i) * eq.numerator().eval(a));
            }
        }
    } else {
        r.extend(bundle.boundary_ratios());
    }
    r.extend_from_slice(bundle.log_moments());
    r
}

fn objective_of(residuals: &[f64]) -> f64 {
    residuals.iter().map(|r| r * r).sum()
}

/// Clamps an endpoint vector to the domain and a minimal separation; returns
/// `None` when ordering is irreparably violated.
fn sanitize(endpoints: &[f64], pin_left: bool) -> Option<Vec<f64>> {
    const SEP: f64 = 1e-9;
    let mut v = endpoints.to_vec();
    if pin_left {
        v[0] = 0.0;
    }
    v[0] = v[0].max(0.0);
    let n = v.len();
    v[n - 1] = v[n - 1].min(DOMAIN_MAX);
    for i in 1..n {
        if v[i] <= v[i - 1] + SEP {
            v[i] = v[i - 1] + SEP;
        }
    }
    if v[n - 1] > DOMAIN_MAX {
        return None;
    }
    Some(v)
}

fn eval_objective(
    endpoints: &[f64],
    polys: &[IntegerPolynomial],
    cfg: &DescentConfig,
) -> Result<(Vec<f64>, MeasureBundle)> {
    let support = SupportSet::new(endpoints.to_vec())?;
    let bundle = candidate_measure(&support, polys, &cfg.quad)?;
    let r = residuals_of_bundle(&bundle, cfg);
    Ok((r, bundle))
}

/// Central finite differences of the objective in each endpoint. Coordinates
/// failing on both sides (infeasible perturbations) are frozen at zero.
pub fn gradient(
    support: &SupportSet,
    polys: &[IntegerPolynomial],
    cfg: &DescentConfig,
) -> Result<Vec<f64>> {
    let base = support.endpoints().to_vec();
    let pin_left = polys.is_empty();
    gradient_at(&base, polys, cfg, pin_left)
}

fn gradient_at(
    base: &[f64],
    polys: &[IntegerPolynomial],
    cfg: &DescentConfig,
    pin_left: bool,
) -> Result<Vec<f64>> {
    let n = base.len();
    let obj_at = |pts: &[f64]| -> Option<f64> {
        let v = sanitize(pts, pin_left)?;
        eval_objective(&v, polys, cfg).ok().map(|(r, _)| objective_of(&r))
    };
    let grads: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|i| {
            if pin_left && i == 0 {
                return 0.0;
            }
            let h = cfg.fd_step * base[i].abs().max(1.0);
            let mut plus = base.to_vec();
            plus[i] += h;
            let mut minus = base.to_vec();
            minus[i] -= h;
            match (obj_at(&plus), obj_at(&minus)) {
                (Some(fp), Some(fm)) => (fp - fm) / (2.0 * h),
                (Some(fp), None) => {
                    // One-sided fallback against the base value.
                    obj_at(base).map(|f0| (fp - f0) / h).unwrap_or(0.0)
                }
                (None, Some(fm)) => obj_at(base).map(|f0| (f0 - fm) / h).unwrap_or(0.0),
                (None, None) => 0.0,
            }
        })
        .collect();
    Ok(grads)
}

/// Default initial support for a polynomial set: intervals bracketing the
/// sorted nonzero roots of `prod Q` with 5% relative margins, left end at
/// 0.05 (0 exactly for the empty set) and right end at 6.6.
pub fn default_init(polys: &[IntegerPolynomial]) -> Result<SupportSet> {
    const RIGHT_END: f64 = 6.6;
    if polys.is_empty() {
        return SupportSet::new(vec![0.0, RIGHT_END]);
    }
    let mut roots = Vec::new();
    for q in polys {
        for r in q.to_real().real_roots(-1.0, DOMAIN_MAX + 1.0)? {
            if r < -ORIGIN_TOL || r > DOMAIN_MAX {
                return Err(Error::RootOutOfRange(r));
            }
            if r > ORIGIN_TOL {
                roots.push(r);
            }
        }
        // Roots escaping the scan window are out of range by construction.
        if q.eval(DOMAIN_MAX + 1.0) < 0.0 {
            return Err(Error::RootOutOfRange(f64::INFINITY));
        }
    }
    roots.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut endpoints = vec![0.05];
    for (i, &r) in roots.iter().enumerate() {
        let left_gap = if i == 0 { r } else { r - roots[i - 1] };
        let right_gap = if i + 1 == roots.len() { RIGHT_END - r } else { roots[i + 1] - r };
        endpoints.push(r - 0.05 * left_gap);
        endpoints.push(r + 0.05 * right_gap);
    }
    endpoints.push(RIGHT_END);
    SupportSet::new(endpoints)
}

/// Backtracking gradient descent from an initial support.
///
/// Accepted steps never increase the objective; the run ends when the
/// objective passes below `objective_tol` (`Converged`), the iteration
/// budget runs out (`MaxIters`), or no acceptable step exists (`Stalled`).
/// `progress` is called once per accepted iteration with
/// `(iteration, objective, lambda)`.
pub fn run_descent(
    init: &SupportSet,
    polys: &[IntegerPolynomial],
    cfg: &DescentConfig,
    mut progress: Option<&mut dyn FnMut(u64, f64, f64)>,
) -> Result<DescentOutcome> {
    let pin_left = polys.is_empty();
    let mut x = init.endpoints().to_vec();
    if pin_left {
        if x.len() != 2 {
            return Err(Error::GapRootMismatch(
                "empty polynomial set descends on a single interval".into(),
            ));
        }
        x[0] = 0.0;
    }
    let (mut res, mut bundle) = eval_objective(&x, polys, cfg)?;
    let mut obj = objective_of(&res);
    let mut step = 1e-2f64;
    let mut history = vec![obj];
    let mut iteration = 0u64;
    let mut termination = Termination::MaxIters;

    while iteration < cfg.max_iters {
        if obj < cfg.objective_tol {
            termination = Termination::Converged;
            break;
        }
        let grad = gradient_at(&x, polys, cfg, pin_left)?;
        let gnorm2: f64 = grad.iter().map(|g| g * g).sum();
        if gnorm2 == 0.0 {
            termination = Termination::Stalled;
            break;
        }
        // Backtracking line search along the negative gradient. Near the
        // quadrature noise floor the Armijo decrease may be unobservable, so
        // the best strictly improving trial is kept as a fallback.
        let mut accepted = false;
        let mut best: Option<(Vec<f64>, Vec<f64>, MeasureBundle, f64, f64)> = None;
        let mut trial_step = (step * 2.0).min(1.0);
        for _ in 0..60 {
            let cand: Vec<f64> = x
                .iter()
                .zip(&grad)
                .map(|(xi, gi)| xi - trial_step * gi)
                .collect();
            let collision = cand.windows(2).any(|w| w[1] - w[0] < 1e-6)
                && x.windows(2).all(|w| w[1] - w[0] >= 1e-6);
            if !collision {
                if let Some(cand) = sanitize(&cand, pin_left) {
                    if let Ok((r_new, b_new)) = eval_objective(&cand, polys, cfg) {
                        let o_new = objective_of(&r_new);
                        if o_new <= obj - cfg.sufficient_decrease * trial_step * gnorm2 {
                            x = cand;
                            res = r_new;
                            bundle = b_new;
                            obj = o_new;
                            step = trial_step;
                            accepted = true;
                            break;
                        }
                        if o_new < obj && best.as_ref().map_or(true, |b| o_new < b.4) {
                            best = Some((cand, r_new, b_new, trial_step, o_new));
                        }
                    }
                }
            }
            trial_step *= cfg.shrink;
            if trial_step < 1e-18 {
                break;
            }
        }
        if !accepted {
            if let Some((cand, r_new, b_new, used_step, o_new)) = best {
                x = cand;
                res = r_new;
                bundle = b_new;
                obj = o_new;
                step = used_step;
                accepted = true;
            }
        }
        if !accepted {
            termination = Termination::Stalled;
            break;
        }
        iteration += 1;
        history.push(obj);
        if let Some(cb) = progress.as_deref_mut() {
            cb(iteration, obj, bundle.dual_values().lambda);
        }
        if obj < cfg.objective_tol {
            termination = Termination::Converged;
            break;
        }
    }
    if obj < cfg.objective_tol {
        termination = Termination::Converged;
    }
    let dual = bundle.dual_values();
    Ok(DescentOutcome {
        state: DescentState { endpoints: x, residuals: res, objective: obj, iteration },
        bundle,
        dual,
        termination,
        objective_history: history,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn polyset(names: &[&str]) -> Vec<IntegerPolynomial> {
        names.iter().map(|s| IntegerPolynomial::parse(s).unwrap()).collect()
    }

    #[test]
    fn default_inits() {
        let s = default_init(&[]).unwrap();
        assert_eq!(s.endpoints(), &[0.0, 6.6]);
        let s = default_init(&polyset(&["x"])).unwrap();
        assert_eq!(s.endpoints(), &[0.05, 6.6]);
        let s = default_init(&polyset(&["x", "x-1"])).unwrap();
        assert_eq!(s.num_intervals(), 2);
        assert!(s.endpoints()[1] < 1.0 && s.endpoints()[2] > 1.0);
    }

    #[test]
    fn schur_descent_converges() {
        let init = default_init(&[]).unwrap();
        let cfg = DescentConfig { objective_tol: 1e-18, ..DescentConfig::default() };
        let out = run_descent(&init, &[], &cfg, None).unwrap();
        let sqrt_e = std::f64::consts::E.sqrt();
        assert!(
            (out.dual.lambda - sqrt_e).abs() < 1e-6,
            "lambda {} vs sqrt(e) {}",
            out.dual.lambda,
            sqrt_e
        );
        assert!((out.state.endpoints[1] - 4.0 * sqrt_e).abs() < 1e-4);
        assert!(out.state.objective_consistent());
        // Monotone objective across accepted steps.
        assert!(out.objective_history.windows(2).all(|w| w[1] <= w[0] + 1e-18));
    }

    #[test]
    fn siegel_residuals_vanish_at_optimum() {
        let sol = crate::closedform::solve_siegel(1e-12).unwrap();
        let support = SupportSet::new(vec![sol.a, sol.b]).unwrap();
        let polys = polyset(&["x"]);
        let cfg = DescentConfig::default();
        let r = residuals(&support, &polys, &cfg).unwrap();
        for (i, v) in r.iter().enumerate() {
            assert!(v.abs() < 1e-6, "residual {i} = {v:.3e}");
        }
    }

    #[test]
    fn gradient_near_zero_at_siegel_optimum() {
        let sol = crate::closedform::solve_siegel(1e-12).unwrap();
        let support = SupportSet::new(vec![sol.a, sol.b]).unwrap();
        let polys = polyset(&["x"]);
        let cfg = DescentConfig::default();
        let g = gradient(&support, &polys, &cfg).unwrap();
        for (i, v) in g.iter().enumerate() {
            assert!(v.abs() < 1e-6, "gradient component {i} = {v:.3e}");
        }
    }

    #[test]
    fn objective_decreases_along_negative_gradient() {
        // A deliberately non-optimal single-interval support for {x}.
        let support = SupportSet::new(vec![0.3, 5.0]).unwrap();
        let polys = polyset(&["x"]);
        let cfg = DescentConfig::default();
        let r0 = residuals(&support, &polys, &cfg).unwrap();
        let o0 = objective_of(&r0);
        let g = gradient(&support, &polys, &cfg).unwrap();
        let step = 1e-4 / g.iter().map(|v| v * v).sum::<f64>().sqrt().max(1.0);
        let moved: Vec<f64> = support
            .endpoints()
            .iter()
            .zip(&g)
            .map(|(x, gi)| x - step * gi)
            .collect();
        let s2 = SupportSet::new(moved).unwrap();
        let o1 = objective_of(&residuals(&s2, &polys, &cfg).unwrap());
        assert!(o1 < o0, "objective {o1} !< {o0}");
    }

    #[test]
    fn gradient_richardson_consistency() {
        // One-sided differences at h and h/2 extrapolate to the central value.
        let support = SupportSet::new(vec![0.3, 5.0]).unwrap();
        let polys = polyset(&["x"]);
        let cfg = DescentConfig::default();
        let obj = |pts: &[f64]| {
            objective_of(&residuals(&SupportSet::new(pts.to_vec()).unwrap(), &polys, &cfg).unwrap())
        };
        let base = support.endpoints().to_vec();
        let f0 = obj(&base);
        let central = gradient(&support, &polys, &cfg).unwrap();
        for i in 0..2 {
            let h = 1e-5 * base[i].abs().max(1.0);
            let mut p = base.clone();
            p[i] += h;
            let d_h = (obj(&p) - f0) / h;
            let mut p2 = base.clone();
            p2[i] += 0.5 * h;
            let d_h2 = (obj(&p2) - f0) / (0.5 * h);
            let richardson = 2.0 * d_h2 - d_h;
            let scale = central[i].abs().max(1e-6);
            assert!(
                (richardson - central[i]).abs() / scale < 0.05,
                "coordinate {i}: richardson {richardson} vs central {}",
                central[i]
            );
            // And the one-sided error shrinks roughly linearly in h.
            let err_h = (d_h - central[i]).abs();
            let err_h2 = (d_h2 - central[i]).abs();
            assert!(err_h2 < 0.75 * err_h + 1e-12, "O(h) decay: {err_h} -> {err_h2}");
        }
    }
}
