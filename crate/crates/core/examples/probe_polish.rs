use ssstrace::descent::{run_descent, DescentConfig};
use ssstrace::quad::{QuadratureConfig, SupportSet};
use ssstrace::poly::IntegerPolynomial;

const ENDPOINTS: [f64; 32] = [
    0.04865408503826852, 0.16838086459949675, 0.17793629526825372, 0.18381722534054817,
    0.21253313678602553, 0.22282035304382763, 0.23253131212733313, 0.334984842461472,
    0.43216747313335424, 0.5373228627969677, 0.550940510634415, 0.6532454870830763,
    0.670400493178262, 0.7958974217799853, 1.231938449021274, 1.512221832046952,
    1.5978271338062664, 1.824427783903187, 1.8513776664372048, 1.9655369583386315,
    2.03493221184841, 2.192435667557317, 2.225841072618397, 2.463928802821324,
    2.7812624054781394, 3.1712064294805336, 3.324272345876191, 3.926025595570322,
    3.9869925948499505, 4.354455187341252, 4.426850255141888, 5.35617801397137,
];

fn main() {
    let iters: u64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(100);
    let s = SupportSet::new(ENDPOINTS.to_vec()).unwrap();
    let polys: Vec<_> = ["x", "x-1", "x-2", "x^2-3x+1", "x^3-5x^2+6x-1",
        "x^4-7x^3+13x^2-7x+1", "x^4-7x^3+14x^2-8x+1"]
        .iter()
        .map(|p| IntegerPolynomial::parse(p).unwrap())
        .collect();
    let tol: f64 = std::env::args().nth(2).and_then(|s| s.parse().ok()).unwrap_or(1e-12);
    let fd: f64 = std::env::args().nth(3).and_then(|s| s.parse().ok()).unwrap_or(1e-6);
    let cfg = DescentConfig {
        max_iters: iters,
        objective_tol: 0.0,
        fd_step: fd,
        quad: QuadratureConfig { nodes_per_interval: 128, refinement_tol: tol },
        ..DescentConfig::default()
    };
    let t0 = std::time::Instant::now();
    let mut count = 0u64;
    let mut cb = |it: u64, obj: f64, lam: f64| {
        count = it;
        if it % 10 == 0 || it <= 3 {
            eprintln!("iter {it}: obj {obj:.6e} lambda {lam:.9} [{:?}]", t0.elapsed());
        }
    };
    let out = run_descent(&s, &polys, &cfg, Some(&mut cb)).unwrap();
    eprintln!("termination {:?} after {} iters, {:?}", out.termination, out.state.iteration, t0.elapsed());
    let ratios = out.bundle.boundary_ratios();
    let dmax = ratios.iter().fold(0.0f64, |m, r| m.max(r.abs()));
    let dual = out.bundle.dual_values();
    eprintln!("delta_max {dmax:.4e} lambda {:.9} certified {:.9}",
        dual.lambda, dual.lambda - dmax * dual.lambda0 * 18.0f64.ln());
    println!("{:?}", out.state.endpoints);
}
