use ssstrace::measures::candidate_measure;
use ssstrace::poly::IntegerPolynomial;
use ssstrace::quad::{QuadratureConfig, SupportSet};

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
    let cfg = QuadratureConfig::default();
    let s = SupportSet::new(ENDPOINTS.to_vec()).unwrap();
    let polys: Vec<_> = ["x", "x-1", "x-2", "x^2-3x+1", "x^3-5x^2+6x-1",
        "x^4-7x^3+13x^2-7x+1", "x^4-7x^3+14x^2-8x+1"]
        .iter()
        .map(|p| IntegerPolynomial::parse(p).unwrap())
        .collect();
    let b = candidate_measure(&s, &polys, &cfg).unwrap();
    let eq = b.mu_eq();
    println!("idx  endpoint      delta_algebraic  delta_limit(t=1e-9len)  delta_limit(t=1e-11len)");
    for idx in 0..32 {
        let d_alg = b.boundary_ratio(idx);
        let i = idx / 2;
        let (ia, ib) = s.interval(i);
        let len = ib - ia;
        let probe = |t: f64| {
            let y = if idx % 2 == 0 { ia + t } else { ib - t };
            let (dl, dh) = (y - ia, ib - y);
            b.density_with_distances(i, y, dl, dh) / eq.density_with_distances(i, y, dl, dh)
        };
        println!(
            "{idx:2}  {:12.8}  {:14.6e}  {:14.6e}  {:14.6e}",
            ENDPOINTS[idx], d_alg, probe(1e-9 * len), probe(1e-11 * len)
        );
    }
    // Equality deviation with closed-form potential.
    let dual = b.dual_values();
    let mut worst = 0.0f64;
    for i in 0..16 {
        let (a, bb) = s.interval(i);
        for k in 0..100 {
            let x = a + (bb - a) * (0.005 + 0.99 * k as f64 / 99.0);
            let mut rhs = dual.lambda + dual.lambda0 * (b.potential_on_support(x) - b.energy() / 2.0);
            for (q, &lq) in polys.iter().zip(&dual.lambda_q) {
                rhs += lq * q.eval(x).abs().ln();
            }
            worst = worst.max((x - rhs).abs());
        }
    }
    println!("equality deviation (own dual): {worst:.3e}");
}
