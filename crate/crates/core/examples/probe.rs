use ssstrace::measures::candidate_measure;
use ssstrace::poly::IntegerPolynomial;
use ssstrace::quad::{QuadratureConfig, SupportSet};

fn main() {
    let cfg = QuadratureConfig::default();
    // Two-polynomial support from the literature values.
    let s = SupportSet::new(vec![0.0362736, 0.828301, 1.190973, 5.707091]).unwrap();
    let polys: Vec<_> = ["x", "x-1"]
        .iter()
        .map(|p| IntegerPolynomial::parse(p).unwrap())
        .collect();
    let t0 = std::time::Instant::now();
    let b = candidate_measure(&s, &polys, &cfg).unwrap();
    let dt = t0.elapsed();
    let dual = b.dual_values();
    println!("construction time: {dt:?}");
    println!("lambda   = {:.9}  (target 1.7773797)", dual.lambda);
    println!("1/c      = {:.7}  (target 6.420592)", 1.0 / b.norm_c());
    println!("energy   = {:.3e}", b.energy());
    println!("logmoms  = {:?}", b.log_moments());
    println!("ratios   = {:?}", b.boundary_ratios());
    println!("form dev = {:.3e}", b.form_density_deviation(50));
    println!("expect   = {:.9}", b.expectation());
    println!("mass_lin = {:.9}", b.mass_lin());
    println!("weights: eq={:.8} lin={:.8} q={:?}", b.weight_eq(), b.weight_lin(), b.weight_q());
}
