use ssstrace::descent::{gradient, residuals, DescentConfig};
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
    let polys: Vec<_> = ["x", "x-1", "x-2", "x^2-3x+1", "x^3-5x^2+6x-1",
        "x^4-7x^3+13x^2-7x+1", "x^4-7x^3+14x^2-8x+1"]
        .iter().map(|p| IntegerPolynomial::parse(p).unwrap()).collect();
    let cfg = DescentConfig::default();
    let _ = QuadratureConfig::default();
    let obj = |pts: &[f64]| -> f64 {
        residuals(&SupportSet::new(pts.to_vec()).unwrap(), &polys, &cfg)
            .map(|r| r.iter().map(|v| v * v).sum::<f64>())
            .unwrap_or(f64::INFINITY)
    };
    let x = ENDPOINTS.to_vec();
    let f0 = obj(&x);
    println!("f0 = {f0:.9e}  (repeat: {:.9e})", obj(&x));
    let s = SupportSet::new(x.clone()).unwrap();
    let g = gradient(&s, &polys, &cfg).unwrap();
    let gn: f64 = g.iter().map(|v| v * v).sum::<f64>();
    println!("|g|^2 = {gn:.3e}, |g|max = {:.3e}", g.iter().fold(0.0f64, |m, v| m.max(v.abs())));
    for e in [-2.0f64, -3.0, -4.0, -5.0, -6.0, -7.0, -8.0] {
        let t = 10f64.powf(e);
        let cand: Vec<f64> = x.iter().zip(&g).map(|(xi, gi)| xi - t * gi).collect();
        let f = obj(&cand);
        println!("t=1e{e}: f = {f:.9e}  (df = {:+.3e})", f - f0);
    }
}
