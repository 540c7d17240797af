use ssstrace::measures::{candidate_measure, equilibrium_measure};
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
    let cfg = QuadratureConfig::fixed(1024);
    let base = ENDPOINTS.to_vec();
    let mut pert = base.clone();
    pert[20] += 1e-9;
    let s0 = SupportSet::new(base).unwrap();
    let s1 = SupportSet::new(pert).unwrap();
    let e0 = equilibrium_measure(&s0, &cfg).unwrap();
    let e1 = equilibrium_measure(&s1, &cfg).unwrap();
    println!("p_eq coeff scale: {:.3e}", e0.numerator().coeffs.iter().fold(0.0f64, |m, c| m.max(c.abs())));
    let dmax = e0.numerator().coeffs.iter().zip(&e1.numerator().coeffs).map(|(a, b)| (a - b).abs()).fold(0.0f64, f64::max);
    println!("p_eq coeff max delta under 1e-9 endpoint move: {:.3e}", dmax);
    for idx in [1usize, 2, 30] {
        let a = ENDPOINTS[idx];
        println!("p_eq({a:.6}) = {:.9e} -> {:.9e} (delta {:.2e})",
            e0.numerator().eval(a), e1.numerator().eval(a),
            (e0.numerator().eval(a) - e1.numerator().eval(a)).abs());
    }
    // weights jitter
    let polys: Vec<_> = ["x", "x-1", "x-2", "x^2-3x+1", "x^3-5x^2+6x-1",
        "x^4-7x^3+13x^2-7x+1", "x^4-7x^3+14x^2-8x+1"]
        .iter().map(|p| IntegerPolynomial::parse(p).unwrap()).collect();
    let b0 = candidate_measure(&s0, &polys, &cfg).unwrap();
    let b1 = candidate_measure(&s1, &polys, &cfg).unwrap();
    println!("weight_eq:  {:.12e} -> delta {:.3e}", b0.weight_eq(), (b0.weight_eq() - b1.weight_eq()).abs());
    println!("weight_lin: {:.12e} -> delta {:.3e}", b0.weight_lin(), (b0.weight_lin() - b1.weight_lin()).abs());
    println!("lin_offset: {:.12e} -> delta {:.3e}", b0.lin_offset(), (b0.lin_offset() - b1.lin_offset()).abs());
    println!("log_cap:    {:.12e} -> delta {:.3e}", b0.log_cap(), (b0.log_cap() - b1.log_cap()).abs());
    println!("q_offsets[0]: {:.12e} -> delta {:.3e}", b0.q_offsets()[0], (b0.q_offsets()[0] - b1.q_offsets()[0]).abs());
}
