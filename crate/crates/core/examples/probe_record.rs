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
    let t0 = std::time::Instant::now();
    let b = match candidate_measure(&s, &polys, &cfg) {
        Ok(b) => b,
        Err(e) => { println!("ERROR: {e}"); return; }
    };
    println!("construction time: {:?}", t0.elapsed());
    let dual = b.dual_values();
    println!("X_lin = {:.8}   (paper 0.89161282)", b.weight_lin());
    let names = ["Q0", "Q1", "Q2", "Q3", "Q4", "Q5", "Q6"];
    let paper = [-0.44801499, -0.39003895, -0.03655386, -0.27820375, -0.15505671, -0.05903767, -0.06244602];
    for i in 0..7 {
        println!("X_{} = {:.8}  (paper {:.8}, diff {:.2e})", names[i], b.weight_q()[i], paper[i], (b.weight_q()[i] - paper[i]).abs());
    }
    println!("X_eq = {:.8}   (paper 4.84960862)", b.weight_eq());
    println!("lambda  = {:.9}", dual.lambda);
    println!("lambda0 = {:.9}", dual.lambda0);
    println!("energy  = {:.3e}", b.energy());
    println!("expect  = {:.9}  (<= 1.80213?)", b.expectation());
    let ratios = b.boundary_ratios();
    let dmax = ratios.iter().fold(0.0f64, |m, r| m.max(r.abs()));
    println!("delta_max = {:.4e}  (paper <= 3.7e-5)", dmax);
    println!("certified = {:.9}  (>= 1.80203?)", dual.lambda - dmax * dual.lambda0 * 18.0f64.ln());
    println!("logmoms   = {:?}", b.log_moments().iter().map(|v| format!("{v:.2e}")).collect::<Vec<_>>());
    println!("form dev  = {:.3e}", b.form_density_deviation(50));
}
