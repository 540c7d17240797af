use ssstrace::descent::{residuals, DescentConfig};
use ssstrace::quad::SupportSet;
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
    let r = |pts: &[f64]| residuals(&SupportSet::new(pts.to_vec()).unwrap(), &polys, &cfg).unwrap();
    let r0 = r(&ENDPOINTS);
    // Perturb ONLY endpoint 2 by 1e-9 and by 2e-9; a smooth residual should
    // change linearly.
    for idx in [1usize, 2, 6, 20] {
        let mut p1 = ENDPOINTS.to_vec();
        p1[idx] += 1e-9;
        let mut p2 = ENDPOINTS.to_vec();
        p2[idx] += 2e-9;
        let r1 = r(&p1);
        let r2 = r(&p2);
        println!("perturb endpoint {idx}:");
        for k in 0..r0.len() {
            let d1 = r1[k] - r0[k];
            let d2 = r2[k] - r0[k];
            // linearity check: d2 should be ~2*d1
            if d1.abs() > 1e-13 || d2.abs() > 1e-13 {
                let lin = (d2 - 2.0 * d1).abs() / d1.abs().max(1e-300);
                if lin > 0.3 {
                    println!("  r[{k}]: d1={d1:+.3e} d2={d2:+.3e}  NONLINEAR ({lin:.2})");
                }
            }
        }
    }
    println!("done");
}
