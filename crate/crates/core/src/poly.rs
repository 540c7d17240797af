//! Real and integer polynomial arithmetic.
//!
//! Coefficients are stored in ascending degree order. Degrees stay small in
//! this project (at most ~35 for the endpoint polynomial of a 16-interval
//! support), so root isolation is sign-change bisection refined by Newton and
//! resultants go through a dense Sylvester determinant. Everything is plain
//! `f64`; the tolerances required downstream are no tighter than 1e-13.

use crate::error::{Error, Result};

/// Polynomial with real coefficients, ascending degree, trailing coefficient
/// nonzero unless the polynomial is zero.
#[derive(Debug, Clone, PartialEq)]
pub struct RealPolynomial {
    coeffs: Vec<f64>,
}

impl RealPolynomial {
    pub fn new(mut coeffs: Vec<f64>) -> Self {
        while coeffs.len() > 1 && coeffs.last() == Some(&0.0) {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(0.0);
        }
        RealPolynomial { coeffs }
    }

    pub fn zero() -> Self {
        RealPolynomial { coeffs: vec![0.0] }
    }

    pub fn constant(c: f64) -> Self {
        RealPolynomial::new(vec![c])
    }

    /// Monic polynomial with the given real roots.
    pub fn from_roots(roots: &[f64]) -> Self {
        let mut p = RealPolynomial::constant(1.0);
        for &r in roots {
            p = p.mul(&RealPolynomial::new(vec![-r, 1.0]));
        }
        p
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.len() == 1 && self.coeffs[0] == 0.0
    }

    pub fn leading_coeff(&self) -> f64 {
        *self.coeffs.last().unwrap()
    }

    /// Horner evaluation.
    pub fn eval(&self, x: f64) -> f64 {
        let mut acc = 0.0;
        for &c in self.coeffs.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    pub fn derivative(&self) -> RealPolynomial {
        if self.degree() == 0 {
            return RealPolynomial::zero();
        }
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, &c)| k as f64 * c)
            .collect();
        RealPolynomial::new(coeffs)
    }

    pub fn add(&self, other: &RealPolynomial) -> RealPolynomial {
        let n = self.coeffs.len().max(other.coeffs.len());
        let mut coeffs = vec![0.0; n];
        for (i, &c) in self.coeffs.iter().enumerate() {
            coeffs[i] += c;
        }
        for (i, &c) in other.coeffs.iter().enumerate() {
            coeffs[i] += c;
        }
        RealPolynomial::new(coeffs)
    }

    pub fn scale(&self, s: f64) -> RealPolynomial {
        RealPolynomial::new(self.coeffs.iter().map(|&c| c * s).collect())
    }

    pub fn mul(&self, other: &RealPolynomial) -> RealPolynomial {
        if self.is_zero() || other.is_zero() {
            return RealPolynomial::zero();
        }
        let mut coeffs = vec![0.0; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in other.coeffs.iter().enumerate() {
                coeffs[i + j] += a * b;
            }
        }
        RealPolynomial::new(coeffs)
    }

    /// Euclidean division: returns (quotient, remainder).
    pub fn div_rem(&self, divisor: &RealPolynomial) -> (RealPolynomial, RealPolynomial) {
        assert!(!divisor.is_zero(), "division by zero polynomial");
        if self.degree() < divisor.degree() {
            return (RealPolynomial::zero(), self.clone());
        }
        let mut rem = self.coeffs.clone();
        let dd = divisor.degree();
        let lc = divisor.leading_coeff();
        let mut quot = vec![0.0; self.degree() - dd + 1];
        for k in (dd..rem.len()).rev() {
            let q = rem[k] / lc;
            quot[k - dd] = q;
            if q != 0.0 {
                for j in 0..=dd {
                    rem[k - dd + j] -= q * divisor.coeffs[j];
                }
            }
        }
        rem.truncate(dd.max(1));
        (RealPolynomial::new(quot), RealPolynomial::new(rem))
    }

    fn coeff_scale(&self) -> f64 {
        1.0 + self.coeffs.iter().fold(0.0f64, |m, c| m.max(c.abs()))
    }

    /// All real roots in `[lo, hi]`, ascending, each accurate to about 1e-13.
    ///
    /// Roots are located by sign-change bisection on a fine grid and polished
    /// by Newton steps with a bisection fallback. Returns `NonSquarefree` if
    /// the derivative also vanishes at a detected root (repeated real root).
    pub fn real_roots(&self, lo: f64, hi: f64) -> Result<Vec<f64>> {
        assert!(lo < hi, "empty root interval");
        assert!(!self.is_zero(), "zero polynomial has no isolated roots");
        let deriv = self.derivative();
        let scale = self.coeff_scale();
        let root_tol = 1e-10 * scale;

        let mut roots = self.sign_change_roots(lo, hi, &deriv)?;

        // Even-multiplicity roots produce no sign change; they show up as
        // roots of the derivative at which the polynomial itself vanishes.
        if self.degree() >= 2 {
            let crit = deriv.sign_change_roots(lo, hi, &deriv.derivative())?;
            for c in crit {
                if self.eval(c).abs() < root_tol {
                    return Err(Error::NonSquarefree(c));
                }
            }
        }
        roots.sort_by(|a, b| a.partial_cmp(b).unwrap());
        Ok(roots)
    }

    fn sign_change_roots(&self, lo: f64, hi: f64, deriv: &RealPolynomial) -> Result<Vec<f64>> {
        let grid = (4 * (self.degree() + 1) * (self.degree() + 1)).max(512);
        let scale = self.coeff_scale();
        let mut roots = Vec::new();
        let h = (hi - lo) / grid as f64;
        let mut x_prev = lo;
        let mut f_prev = self.eval(lo);
        if f_prev == 0.0 {
            roots.push(self.polish(lo, lo, lo + h, deriv)?);
            f_prev = 1e-300; // continue scanning past the endpoint root
        }
        for k in 1..=grid {
            let x = if k == grid { hi } else { lo + k as f64 * h };
            let f = self.eval(x);
            if f == 0.0 {
                roots.push(self.polish(x, x - h, (x + h).min(hi), deriv)?);
            } else if f_prev.signum() != f.signum() && f_prev.abs() < 1e200 {
                roots.push(self.polish_bracket(x_prev, x, deriv)?);
            }
            x_prev = x;
            f_prev = f;
        }
        // Deduplicate grid-boundary artifacts.
        roots.sort_by(|a, b| a.partial_cmp(b).unwrap());
        roots.dedup_by(|a, b| (*a - *b).abs() < 1e-12 * (1.0 + b.abs()));
        let _ = scale;
        Ok(roots)
    }

    fn polish_bracket(&self, mut a: f64, mut b: f64, deriv: &RealPolynomial) -> Result<f64> {
        let mut fa = self.eval(a);
        for _ in 0..200 {
            let mid = 0.5 * (a + b);
            if (b - a).abs() < 1e-15 * (1.0 + mid.abs()) {
                break;
            }
            let fm = self.eval(mid);
            if fm == 0.0 {
                a = mid;
                b = mid;
                break;
            }
            if fa.signum() != fm.signum() {
                b = mid;
            } else {
                a = mid;
                fa = fm;
            }
        }
        self.polish(0.5 * (a + b), a, b, deriv)
    }

    fn polish(&self, x0: f64, lo: f64, hi: f64, deriv: &RealPolynomial) -> Result<f64> {
        let mut x = x0;
        for _ in 0..4 {
            let d = deriv.eval(x);
            if d == 0.0 {
                break;
            }
            let step = self.eval(x) / d;
            let next = x - step;
            if next.is_finite() && next >= lo - 1e-9 && next <= hi + 1e-9 {
                x = next;
            } else {
                break;
            }
        }
        let scale = self.coeff_scale();
        if deriv.eval(x).abs() < 1e-7 * scale && self.eval(x).abs() < 1e-10 * scale {
            return Err(Error::NonSquarefree(x));
        }
        Ok(x)
    }

    /// Sylvester-matrix resultant, Res(p, q).
    pub fn resultant(&self, other: &RealPolynomial) -> f64 {
        assert!(!self.is_zero() && !other.is_zero(), "resultant of zero polynomial");
        let (m, n) = (self.degree(), other.degree());
        if m == 0 {
            return self.coeffs[0].powi(n as i32);
        }
        if n == 0 {
            return other.coeffs[0].powi(m as i32);
        }
        let size = m + n;
        let mut mat = vec![0.0; size * size];
        for row in 0..n {
            for (j, &c) in self.coeffs.iter().rev().enumerate() {
                mat[row * size + row + j] = c;
            }
        }
        for row in 0..m {
            for (j, &c) in other.coeffs.iter().rev().enumerate() {
                mat[(n + row) * size + row + j] = c;
            }
        }
        det_in_place(&mut mat, size)
    }

    /// Discriminant: (-1)^{d(d-1)/2} Res(p, p') / lc(p).
    pub fn discriminant(&self) -> f64 {
        let d = self.degree();
        assert!(d >= 1, "discriminant needs degree >= 1");
        if d == 1 {
            return 1.0;
        }
        let sign = if (d * (d - 1) / 2) % 2 == 0 { 1.0 } else { -1.0 };
        sign * self.resultant(&self.derivative()) / self.leading_coeff()
    }
}

/// LU determinant with partial pivoting; consumes the buffer.
fn det_in_place(mat: &mut [f64], n: usize) -> f64 {
    let mut det = 1.0;
    for col in 0..n {
        let mut piv = col;
        let mut best = mat[col * n + col].abs();
        for row in col + 1..n {
            let v = mat[row * n + col].abs();
            if v > best {
                best = v;
                piv = row;
            }
        }
        if best == 0.0 {
            return 0.0;
        }
        if piv != col {
            for j in 0..n {
                mat.swap(col * n + j, piv * n + j);
            }
            det = -det;
        }
        let d = mat[col * n + col];
        det *= d;
        for row in col + 1..n {
            let f = mat[row * n + col] / d;
            if f != 0.0 {
                for j in col..n {
                    mat[row * n + j] -= f * mat[col * n + j];
                }
            }
        }
    }
    det
}

/// The unique polynomial of degree < n through the given points, computed by
/// the Lagrange formula.
pub fn lagrange_interpolate(points: &[(f64, f64)]) -> Result<RealPolynomial> {
    for (i, (xi, _)) in points.iter().enumerate() {
        for (xj, _) in points.iter().skip(i + 1) {
            if xi == xj {
                return Err(Error::DuplicateNode(*xi));
            }
        }
    }
    let mut acc = RealPolynomial::zero();
    for (i, &(xi, yi)) in points.iter().enumerate() {
        let mut basis = RealPolynomial::constant(1.0);
        let mut denom = 1.0;
        for (j, &(xj, _)) in points.iter().enumerate() {
            if i != j {
                basis = basis.mul(&RealPolynomial::new(vec![-xj, 1.0]));
                denom *= xi - xj;
            }
        }
        acc = acc.add(&basis.scale(yi / denom));
    }
    Ok(acc)
}

/// Monic integer polynomial, the elements of the constraint set A.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct IntegerPolynomial {
    coeffs: Vec<i64>,
}

impl IntegerPolynomial {
    pub fn new(mut coeffs: Vec<i64>) -> Self {
        while coeffs.len() > 1 && coeffs.last() == Some(&0) {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(0);
        }
        IntegerPolynomial { coeffs }
    }

    pub fn coeffs(&self) -> &[i64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn is_monic(&self) -> bool {
        self.coeffs.last() == Some(&1)
    }

    pub fn to_real(&self) -> RealPolynomial {
        RealPolynomial::new(self.coeffs.iter().map(|&c| c as f64).collect())
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.to_real().eval(x)
    }

    /// Parses the CLI polynomial grammar: `x^2-3x+1`, `x-1`, `x`, `7`.
    /// ASCII only, `^` for powers, implicit coefficient 1, optional spaces.
    pub fn parse(input: &str) -> Result<Self> {
        let s: String = input.chars().filter(|c| !c.is_whitespace()).collect();
        if s.is_empty() {
            return Err(Error::Parse("empty polynomial".into()));
        }
        let bytes = s.as_bytes();
        let mut coeffs: Vec<i64> = Vec::new();
        let mut pos = 0usize;
        let mut first = true;
        while pos < bytes.len() {
            let mut sign = 1i64;
            match bytes[pos] {
                b'+' => pos += 1,
                b'-' => {
                    sign = -1;
                    pos += 1;
                }
                _ if first => {}
                c => {
                    return Err(Error::Parse(format!(
                        "expected '+' or '-' before term, found '{}'",
                        c as char
                    )))
                }
            }
            first = false;
            let start = pos;
            while pos < bytes.len() && bytes[pos].is_ascii_digit() {
                pos += 1;
            }
            let coeff: i64 = if pos > start {
                s[start..pos]
                    .parse()
                    .map_err(|_| Error::Parse(format!("bad coefficient in '{input}'")))?
            } else {
                1
            };
            let power: usize = if pos < bytes.len() && bytes[pos] == b'x' {
                pos += 1;
                if pos < bytes.len() && bytes[pos] == b'^' {
                    pos += 1;
                    let pstart = pos;
                    while pos < bytes.len() && bytes[pos].is_ascii_digit() {
                        pos += 1;
                    }
                    if pos == pstart {
                        return Err(Error::Parse(format!("missing exponent in '{input}'")));
                    }
                    s[pstart..pos]
                        .parse()
                        .map_err(|_| Error::Parse(format!("bad exponent in '{input}'")))?
                } else {
                    1
                }
            } else {
                if pos == start {
                    return Err(Error::Parse(format!("empty term in '{input}'")));
                }
                0
            };
            if coeffs.len() <= power {
                coeffs.resize(power + 1, 0);
            }
            coeffs[power] += sign * coeff;
        }
        Ok(IntegerPolynomial::new(coeffs))
    }
}

impl std::fmt::Display for IntegerPolynomial {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let mut first = true;
        for (k, &c) in self.coeffs.iter().enumerate().rev() {
            if c == 0 && self.degree() > 0 {
                continue;
            }
            let mag = c.unsigned_abs();
            if first {
                if c < 0 {
                    write!(f, "-")?;
                }
                first = false;
            } else if c < 0 {
                write!(f, "-")?;
            } else {
                write!(f, "+")?;
            }
            match k {
                0 => write!(f, "{mag}")?,
                _ => {
                    if mag != 1 {
                        write!(f, "{mag}")?;
                    }
                    if k == 1 {
                        write!(f, "x")?;
                    } else {
                        write!(f, "x^{k}")?;
                    }
                }
            }
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(coeffs: &[f64]) -> RealPolynomial {
        RealPolynomial::new(coeffs.to_vec())
    }

    #[test]
    fn horner_eval() {
        let q = p(&[1.0, -3.0, 1.0]); // x^2 - 3x + 1
        assert_eq!(q.eval(0.0), 1.0);
        assert_eq!(q.eval(1.0), -1.0);
        let cubic = p(&[-1.0, 6.0, -5.0, 1.0]); // x^3 - 5x^2 + 6x - 1
        assert_eq!(cubic.eval(2.0), -1.0);
    }

    #[test]
    fn roots_of_quadratic() {
        let q = p(&[1.0, -3.0, 1.0]);
        let roots = q.real_roots(0.0, 18.0).unwrap();
        assert_eq!(roots.len(), 2);
        assert!((roots[0] - (3.0 - 5.0f64.sqrt()) / 2.0).abs() < 1e-13);
        assert!((roots[1] - (3.0 + 5.0f64.sqrt()) / 2.0).abs() < 1e-13);
    }

    #[test]
    fn roots_of_linear() {
        let roots = p(&[-1.0, 1.0]).real_roots(0.0, 18.0).unwrap();
        assert_eq!(roots.len(), 1);
        assert!((roots[0] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn quartic_root_product_is_one() {
        // x^4 - 7x^3 + 13x^2 - 7x + 1, palindromic: roots come in r, 1/r pairs.
        let q = p(&[1.0, -7.0, 13.0, -7.0, 1.0]);
        let roots = q.real_roots(0.0, 18.0).unwrap();
        assert_eq!(roots.len(), 4);
        let prod: f64 = roots.iter().product();
        assert!((prod - 1.0).abs() < 1e-10, "Vieta: product = constant/leading");
    }

    #[test]
    fn repeated_root_detected() {
        let q = p(&[1.0, -2.0, 1.0]); // (x-1)^2
        assert!(matches!(q.real_roots(0.0, 2.0), Err(Error::NonSquarefree(_))));
    }

    #[test]
    fn resultants_of_linear_pairs() {
        let x = p(&[0.0, 1.0]);
        let xm2 = p(&[-2.0, 1.0]);
        let xm1 = p(&[-1.0, 1.0]);
        assert!((x.resultant(&xm2) - -2.0).abs() < 1e-14);
        assert!((x.resultant(&xm1) - -1.0).abs() < 1e-14);
        let q = p(&[1.0, -3.0, 1.0]);
        assert!((xm1.resultant(&q) - -1.0).abs() < 1e-13, "evaluation at root: Q(1) = -1");
    }

    #[test]
    fn discriminants() {
        assert!((p(&[1.0, -3.0, 1.0]).discriminant() - 5.0).abs() < 1e-12);
        assert!((p(&[-1.0, 1.0]).discriminant() - 1.0).abs() < 1e-14);
        // Brute force for the cubic: prod (r_i - r_j)^2 over numerically computed roots.
        let cubic = p(&[-1.0, 6.0, -5.0, 1.0]);
        let roots = cubic.real_roots(0.0, 18.0).unwrap();
        assert_eq!(roots.len(), 3);
        let mut brute = 1.0;
        for i in 0..3 {
            for j in i + 1..3 {
                brute *= (roots[i] - roots[j]).powi(2);
            }
        }
        let disc = cubic.discriminant();
        assert!((disc - 49.0).abs() < 1e-9, "disc = {disc}");
        assert!((disc - brute).abs() < 1e-8 * brute.abs());
    }

    #[test]
    fn quartic_discriminants_match_residue_factors() {
        // The two palindromic quartics used in the record bound.
        let q5 = p(&[1.0, -7.0, 13.0, -7.0, 1.0]);
        let q6 = p(&[1.0, -8.0, 14.0, -7.0, 1.0]);
        assert!((q5.discriminant() - 725.0).abs() < 1e-8);
        assert!((q6.discriminant() - 1125.0).abs() < 1e-8);
    }

    #[test]
    fn lagrange_basics() {
        let c = lagrange_interpolate(&[(0.0, 1.0), (1.0, 1.0)]).unwrap();
        assert_eq!(c.degree(), 0);
        assert!((c.eval(0.5) - 1.0).abs() < 1e-14);
        let sq = lagrange_interpolate(&[(0.0, 0.0), (1.0, 1.0), (2.0, 4.0)]).unwrap();
        assert!((sq.eval(3.0) - 9.0).abs() < 1e-12);
        let q = lagrange_interpolate(&[(0.0, 1.0), (1.0, -1.0), (3.0, 1.0)]).unwrap();
        for x in [0.0, 1.0, 3.0, 5.0] {
            assert!((q.eval(x) - (x * x - 3.0 * x + 1.0)).abs() < 1e-12);
        }
        assert!(matches!(
            lagrange_interpolate(&[(1.0, 0.0), (1.0, 2.0)]),
            Err(Error::DuplicateNode(_))
        ));
    }

    #[test]
    fn division_round_trips() {
        let a = p(&[2.0, 0.0, -1.0, 3.0, 1.0]);
        let b = p(&[1.0, 2.0, 1.0]);
        let (q, r) = a.div_rem(&b);
        let back = q.mul(&b).add(&r);
        for (x, y) in back.coeffs().iter().zip(a.coeffs()) {
            assert!((x - y).abs() < 1e-12);
        }
        assert!(r.degree() < b.degree());
    }

    #[test]
    fn parse_and_display() {
        for s in ["x", "x-1", "x-2", "x^2-3x+1", "x^3-5x^2+6x-1", "x^4-7x^3+13x^2-7x+1"] {
            let q = IntegerPolynomial::parse(s).unwrap();
            assert!(q.is_monic());
            assert_eq!(q.to_string(), s);
            let round = IntegerPolynomial::parse(&q.to_string()).unwrap();
            assert_eq!(q, round);
        }
        assert_eq!(IntegerPolynomial::parse("x^2 - 3x + 1").unwrap().to_string(), "x^2-3x+1");
        assert!(IntegerPolynomial::parse("x^").is_err());
        assert!(IntegerPolynomial::parse("").is_err());
        assert!(IntegerPolynomial::parse("x**2").is_err());
    }

    #[test]
    fn parse_constant_and_coefficients() {
        let q = IntegerPolynomial::parse("2x^2+10x-7").unwrap();
        assert_eq!(q.coeffs(), &[-7, 10, 2]);
        let c = IntegerPolynomial::parse("-5").unwrap();
        assert_eq!(c.coeffs(), &[-5]);
    }
}
