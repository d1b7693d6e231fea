//! Möbius maps of the projective line and the upper half-plane, the F_N systems, and
//! reduction modulo PGL_2(Z).

use crate::contfrac;
use crate::error::{invalid, Error, Result};
use crate::exact::{self, RatInterval};
use crate::ifs::Word;
use nalgebra::Matrix2;
use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::Rng;
use serde::Serialize;

/// Integer 2x2 matrix `[[a, b], [c, d]]`.
pub type IntMat2 = [[BigInt; 2]; 2];

pub fn int_mul(x: &IntMat2, y: &IntMat2) -> IntMat2 {
    [
        [&x[0][0] * &y[0][0] + &x[0][1] * &y[1][0], &x[0][0] * &y[0][1] + &x[0][1] * &y[1][1]],
        [&x[1][0] * &y[0][0] + &x[1][1] * &y[1][0], &x[1][0] * &y[0][1] + &x[1][1] * &y[1][1]],
    ]
}

pub fn int_identity() -> IntMat2 {
    [[BigInt::one(), BigInt::zero()], [BigInt::zero(), BigInt::one()]]
}

fn int_det(x: &IntMat2) -> BigInt {
    &x[0][0] * &x[1][1] - &x[0][1] * &x[1][0]
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum ExtReal {
    Finite(f64),
    Infinity,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ExtRational {
    Finite(BigRational),
    Infinity,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MoebiusMap {
    matrix: Matrix2<f64>,
    exact: Option<IntMat2>,
}

impl MoebiusMap {
    pub fn new(m: Matrix2<f64>) -> Result<Self> {
        let det = m.determinant();
        if det == 0.0 || !det.is_finite() {
            return Err(Error::Singular);
        }
        let exact = integer_form(&m);
        Ok(Self { matrix: m, exact })
    }

    pub fn from_int(a: i64, b: i64, c: i64, d: i64) -> Result<Self> {
        let m = Matrix2::new(a as f64, b as f64, c as f64, d as f64);
        if a * d - b * c == 0 {
            return Err(Error::Singular);
        }
        let e = [[BigInt::from(a), BigInt::from(b)], [BigInt::from(c), BigInt::from(d)]];
        Ok(Self { matrix: m, exact: if (a * d - b * c).abs() == 1 { Some(e) } else { None } })
    }

    pub fn matrix(&self) -> &Matrix2<f64> {
        &self.matrix
    }

    /// Integer representative with det ±1, when the map lies in PGL_2(Z).
    pub fn integer_matrix(&self) -> Option<&IntMat2> {
        self.exact.as_ref()
    }

    pub fn integer_flag(&self) -> bool {
        self.exact.is_some()
    }

    pub fn compose(&self, inner: &MoebiusMap) -> MoebiusMap {
        let exact = match (&self.exact, &inner.exact) {
            (Some(a), Some(b)) => Some(int_mul(a, b)),
            _ => None,
        };
        MoebiusMap { matrix: self.matrix * inner.matrix, exact }
    }

    pub fn conjugate_by(&self, c: &Matrix2<f64>) -> Result<MoebiusMap> {
        let ci = c.try_inverse().ok_or(Error::Singular)?;
        MoebiusMap::new(c * self.matrix * ci)
    }
}

/// Scalar multiple of `m` with integer entries and det ±1, if one exists (tolerance 1e-12).
fn integer_form(m: &Matrix2<f64>) -> Option<IntMat2> {
    let s = m.determinant().abs().sqrt();
    let n = m / s;
    let mut e = [[BigInt::zero(), BigInt::zero()], [BigInt::zero(), BigInt::zero()]];
    for i in 0..2 {
        for j in 0..2 {
            let r = n[(i, j)].round();
            if (n[(i, j)] - r).abs() > 1e-12 * (1.0 + r.abs()) {
                return None;
            }
            e[i][j] = BigInt::from(r as i64);
        }
    }
    if int_det(&e).abs() == BigInt::one() {
        Some(e)
    } else {
        None
    }
}

pub fn apply_moebius(g: &MoebiusMap, x: ExtReal) -> ExtReal {
    let m = g.matrix();
    let (a, b, c, d) = (m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)]);
    match x {
        ExtReal::Infinity => {
            if c == 0.0 {
                ExtReal::Infinity
            } else {
                ExtReal::Finite(a / c)
            }
        }
        ExtReal::Finite(x) => {
            let den = c * x + d;
            if den == 0.0 {
                ExtReal::Infinity
            } else {
                ExtReal::Finite((a * x + b) / den)
            }
        }
    }
}

/// Exact projective action of an integer matrix.
pub fn apply_exact(g: &IntMat2, x: &ExtRational) -> ExtRational {
    let q = |v: &BigInt| BigRational::from_integer(v.clone());
    match x {
        ExtRational::Infinity => {
            if g[1][0].is_zero() {
                ExtRational::Infinity
            } else {
                ExtRational::Finite(q(&g[0][0]) / q(&g[1][0]))
            }
        }
        ExtRational::Finite(x) => {
            let den = q(&g[1][0]) * x + q(&g[1][1]);
            if den.is_zero() {
                ExtRational::Infinity
            } else {
                ExtRational::Finite((q(&g[0][0]) * x + q(&g[0][1])) / den)
            }
        }
    }
}

/// A weighted family of Möbius maps together with an interval known to contain the limit set.
#[derive(Debug, Clone)]
pub struct MoebiusIfs {
    pub name: String,
    pub maps: Vec<MoebiusMap>,
    pub weights: Vec<f64>,
    /// Closed interval containing the limit set; used for certified enclosures.
    pub region: Option<RatInterval>,
}

impl MoebiusIfs {
    pub fn new(name: &str, maps: Vec<MoebiusMap>, weights: Vec<f64>, region: Option<RatInterval>) -> Result<Self> {
        if maps.is_empty() || maps.len() != weights.len() {
            return invalid("Möbius IFS needs one positive weight per map");
        }
        if weights.iter().any(|&w| !(w > 0.0)) || (weights.iter().sum::<f64>() - 1.0).abs() > 1e-12 {
            return invalid("weights must be positive and sum to 1");
        }
        Ok(Self { name: name.into(), maps, weights, region })
    }

    /// `phi_{b_1} ∘ ... ∘ phi_{b_n}`.
    pub fn compose_prefix(&self, word: &Word) -> Result<MoebiusMap> {
        let mut acc = MoebiusMap::from_int(1, 0, 0, 1)?;
        for &b in word.forward() {
            let m = self.maps.get(b).ok_or_else(|| Error::Invalid(format!("symbol {b} outside alphabet")))?;
            acc = acc.compose(m);
        }
        Ok(acc)
    }

    /// Exact enclosure of the coded point of every extension of `word`: the image of the
    /// region under the composite, which must be pole-free on the region.
    pub fn coding_enclosure(&self, word: &Word) -> Result<RatInterval> {
        let region = self.region.as_ref().ok_or_else(|| Error::Invalid("no certified region for this system".into()))?;
        let f = self.compose_prefix(word)?;
        let g = f.integer_matrix().ok_or_else(|| Error::Invalid("exact enclosures need integer maps".into()))?;
        let q = |v: &BigInt| BigRational::from_integer(v.clone());
        // The pole -d/c must lie outside the region.
        if !g[1][0].is_zero() {
            let pole = -q(&g[1][1]) / q(&g[1][0]);
            if region.contains(&pole) {
                return Err(Error::Uncertified("composite has a pole inside the region".into()));
            }
        }
        let ends: Vec<BigRational> = [&region.lo, &region.hi]
            .iter()
            .map(|x| match apply_exact(g, &ExtRational::Finite((*x).clone())) {
                ExtRational::Finite(v) => Ok(v),
                ExtRational::Infinity => Err(Error::Uncertified("endpoint mapped to infinity".into())),
            })
            .collect::<Result<_>>()?;
        let (lo, hi) = if ends[0] <= ends[1] { (ends[0].clone(), ends[1].clone()) } else { (ends[1].clone(), ends[0].clone()) };
        RatInterval::new(lo, hi)
    }

    pub fn sample_word<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Word {
        crate::ifs::sample_symbols(&self.weights, n, rng).expect("weights validated at construction")
    }

    /// The system conjugated by `c`: maps `c phi c^{-1}` (the certified region is dropped).
    pub fn conjugate(&self, c: &Matrix2<f64>) -> Result<MoebiusIfs> {
        let maps = self.maps.iter().map(|m| m.conjugate_by(c)).collect::<Result<_>>()?;
        MoebiusIfs::new(&format!("{}-conjugated", self.name), maps, self.weights.clone(), None)
    }
}

/// `phi_n(x) = 1/(n + x)` for `n = 1..=N`, symbol `n - 1` standing for `phi_n`.
/// The flag is set for `N = 1`, whose limit set is a single point.
pub fn fn_preset(n: usize) -> Result<(MoebiusIfs, bool)> {
    if n < 1 {
        return invalid("F_N needs N >= 1");
    }
    let maps = (1..=n).map(|k| MoebiusMap::from_int(0, 1, 1, k as i64)).collect::<Result<Vec<_>>>()?;
    // F_N lies in [[0; N, 1, N, ...], [0; 1, N, 1, ...]] which sits inside this interval.
    let nn = n as i64;
    let region = RatInterval::new(exact::rat(1, nn + 2), exact::rat(nn + 1, nn + 2))?;
    let ifs = MoebiusIfs::new(&format!("f{n}"), maps, vec![1.0 / n as f64; n], Some(region))?;
    Ok((ifs, n == 1))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Generator {
    /// `z -> z + n`.
    T(i64),
    /// `z -> -1/z`.
    S,
    /// `z -> -conj(z)`, orientation reversing.
    R,
}

impl Generator {
    pub fn matrix(&self) -> Matrix2<f64> {
        match *self {
            Generator::T(n) => Matrix2::new(1.0, n as f64, 0.0, 1.0),
            Generator::S => Matrix2::new(0.0, -1.0, 1.0, 0.0),
            Generator::R => Matrix2::new(-1.0, 0.0, 0.0, 1.0),
        }
    }

    pub fn inverse(&self) -> Generator {
        match *self {
            Generator::T(n) => Generator::T(-n),
            g => g,
        }
    }
}

/// Matrix of the word applied left to right: `g_k ... g_1`.
pub fn word_matrix(word: &[Generator]) -> Matrix2<f64> {
    word.iter().fold(Matrix2::identity(), |acc, g| g.matrix() * acc)
}

/// Isometric action on the upper half-plane; det < 0 acts through `conj(z)`.
pub fn apply_h(m: &Matrix2<f64>, z: Complex64) -> Complex64 {
    let w = if m.determinant() < 0.0 { z.conj() } else { z };
    let (a, b, c, d) = (m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)]);
    (w * a + b) / (w * c + d)
}

pub fn hyperbolic_distance(z: Complex64, w: Complex64) -> f64 {
    let num = (z - w).norm_sqr();
    (1.0 + num / (2.0 * z.im * w.im)).acosh()
}

/// Moves `z` into `{0 <= Re z <= 1/2, |z| >= 1}`, the closed fundamental domain of PGL_2(Z).
/// The returned word, applied left to right, maps `z` to the reduced point.
pub fn reduce_to_fundamental_domain(z: Complex64) -> Result<(Complex64, Vec<Generator>)> {
    if !(z.im > 0.0) || !z.re.is_finite() {
        return invalid("point must lie in the upper half-plane");
    }
    let mut z = z;
    let mut word = Vec::new();
    for _ in 0..100_000 {
        let n = (z.re - 0.5).ceil();
        if n != 0.0 {
            z -= n;
            word.push(Generator::T(-(n as i64)));
        }
        if z.norm_sqr() < 1.0 {
            z = -z.inv();
            word.push(Generator::S);
        } else {
            if z.re < 0.0 {
                z = -z.conj();
                word.push(Generator::R);
            }
            return Ok((z, word));
        }
    }
    Err(Error::Uncertified("fundamental-domain reduction did not terminate".into()))
}

pub const BASEPOINT: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Hyperbolic distance from `i` of the reduced images of `phi_{b_k^1}(i)`, k = 1..=n.
///
/// The composite is carried as `gamma_k R_k` with `gamma_k` in PGL_2(Z) discarded and
/// `R_k(i)` kept in the fundamental domain, so the computation stays well conditioned.
pub fn ur_probe(ifs: &MoebiusIfs, word: &Word, n: usize) -> Result<Vec<f64>> {
    if word.len() < n {
        return invalid("word shorter than requested probe length");
    }
    let mut r = Matrix2::<f64>::identity();
    let mut out = Vec::with_capacity(n);
    for &b in &word.forward()[..n] {
        let m = ifs.maps.get(b).ok_or_else(|| Error::Invalid(format!("symbol {b} outside alphabet")))?;
        r *= m.matrix();
        r /= r.determinant().abs().sqrt();
        let (z, w) = reduce_to_fundamental_domain(apply_h(&r, BASEPOINT))?;
        r = word_matrix(&w) * r;
        out.push(hyperbolic_distance(z, BASEPOINT));
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundedQuotientReport {
    pub depth: usize,
    pub certified_digits: Vec<u64>,
    pub all_at_most_n: bool,
    pub matches_word: bool,
    pub pass: bool,
}

/// Certified CF digits of the F_N coded point of `word[..depth]`; pass iff all are at most N
/// and they reproduce the word symbols (symbol s standing for digit s + 1).
pub fn bounded_quotient_check(word: &Word, n: usize, depth: usize) -> Result<BoundedQuotientReport> {
    let (ifs, _) = fn_preset(n)?;
    if word.len() < depth {
        return invalid("word shorter than depth");
    }
    let enc = ifs.coding_enclosure(&word.prefix(depth))?;
    let cf = contfrac::cf_validated(&enc)?;
    let digits: Vec<u64> = cf.digits.iter().map(|d| d.to_u64().unwrap_or(u64::MAX)).collect();
    if digits.len() < depth {
        return Err(Error::Uncertified(format!("only {} of {depth} digits certified", digits.len())));
    }
    let all_at_most_n = digits.iter().all(|&d| d <= n as u64);
    let matches_word = digits.iter().zip(word.forward()).all(|(&d, &s)| d == s as u64 + 1);
    Ok(BoundedQuotientReport { depth, certified_digits: digits, all_at_most_n, matches_word, pass: all_at_most_n && matches_word })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::rat;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn apply_examples() {
        let id = MoebiusMap::from_int(1, 0, 0, 1).unwrap();
        assert_eq!(apply_moebius(&id, ExtReal::Finite(0.3)), ExtReal::Finite(0.3));
        let (f, _) = fn_preset(4).unwrap();
        assert_eq!(apply_moebius(&f.maps[2], ExtReal::Finite(0.0)), ExtReal::Finite(1.0 / 3.0));
        let inv = MoebiusMap::from_int(0, 1, 1, 0).unwrap();
        assert_eq!(apply_moebius(&inv, ExtReal::Infinity), ExtReal::Finite(0.0));
        assert_eq!(apply_moebius(&inv, ExtReal::Finite(0.0)), ExtReal::Infinity);
    }

    #[test]
    fn fn_preset_examples() {
        let (f2, degenerate) = fn_preset(2).unwrap();
        assert!(!degenerate);
        assert_eq!(f2.maps[0].matrix(), &Matrix2::new(0.0, 1.0, 1.0, 1.0));
        assert_eq!(f2.maps[1].matrix(), &Matrix2::new(0.0, 1.0, 1.0, 2.0));
        assert!(fn_preset(7).unwrap().0.maps.iter().all(MoebiusMap::integer_flag));
        assert!(fn_preset(1).unwrap().1);
        assert!(fn_preset(0).is_err());
        // phi_1 ∘ phi_1 fixes the golden ratio conjugate.
        let g = f2.maps[0].compose(&f2.maps[0]);
        let x = (5f64.sqrt() - 1.0) / 2.0;
        match apply_moebius(&g, ExtReal::Finite(x)) {
            ExtReal::Finite(y) => assert!((y - x).abs() < 1e-15),
            _ => panic!(),
        }
        // phi_1 ∘ phi_1 (x) = (1 + x)/(2 + x), checked exactly.
        let e = g.integer_matrix().unwrap();
        for k in 0..5 {
            let x = rat(k, 7);
            let ExtRational::Finite(y) = apply_exact(e, &ExtRational::Finite(x.clone())) else { panic!() };
            assert_eq!(y, (exact::int(1) + &x) / (exact::int(2) + &x));
        }
    }

    #[test]
    fn integer_flag_detection() {
        let m = MoebiusMap::new(Matrix2::new(0.0, 2.0, 2.0, 6.0)).unwrap();
        assert!(m.integer_flag());
        let m = MoebiusMap::new(Matrix2::new(1.0, 0.5, 0.0, 1.0)).unwrap();
        assert!(!m.integer_flag());
        let m = MoebiusMap::new(Matrix2::new(2.0, 0.0, 0.0, 1.0)).unwrap();
        assert!(!m.integer_flag());
    }

    #[test]
    fn reduction_examples() {
        let (z, w) = reduce_to_fundamental_domain(BASEPOINT).unwrap();
        assert_eq!(z, BASEPOINT);
        assert!(w.is_empty());
        let (z, w) = reduce_to_fundamental_domain(Complex64::new(5.0, 1.0)).unwrap();
        assert!((z - BASEPOINT).norm() < 1e-15);
        assert_eq!(w, vec![Generator::T(-5)]);
        let z0 = Complex64::new(0.3, 0.001);
        let (z, w) = reduce_to_fundamental_domain(z0).unwrap();
        assert!(z.norm() >= 1.0 && z.re >= 0.0 && z.re <= 0.5);
        let inv: Vec<Generator> = w.iter().rev().map(Generator::inverse).collect();
        let back = apply_h(&word_matrix(&inv), z);
        assert!((back - z0).norm() < 1e-9);
        let fwd = apply_h(&word_matrix(&w), z0);
        assert!((fwd - z).norm() < 1e-9);
    }

    #[test]
    fn ur_probe_examples() {
        let (f5, _) = fn_preset(5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let w = f5.sample_word(200, &mut rng);
        let h = ur_probe(&f5, &w, 200).unwrap();
        assert!(h.iter().all(|&x| x < 1e-6));
        // Parabolic integer map: unreduced distances grow, reduced ones stay at 0.
        let t = MoebiusIfs::new("t", vec![MoebiusMap::from_int(1, 1, 0, 1).unwrap()], vec![1.0], None).unwrap();
        let h = ur_probe(&t, &Word(vec![0; 50]), 50).unwrap();
        assert!(h.iter().all(|&x| x < 1e-9));
        let raw = hyperbolic_distance(Complex64::new(50.0, 1.0), BASEPOINT);
        assert!(raw > 7.0);
    }

    #[test]
    fn bounded_quotients() {
        let w = Word(vec![2, 0, 1, 2, 2, 0, 1, 0, 0, 1, 2, 1, 0, 2, 1, 1, 0, 2, 0, 1, 2, 0, 1, 2, 2, 0, 1, 0, 0, 1, 2, 1, 0, 2, 1, 1, 0, 2, 0, 1]);
        let r = bounded_quotient_check(&w, 3, 40).unwrap();
        assert!(r.pass);
        assert_eq!(r.certified_digits[..3], [3, 1, 2]);
        let r = bounded_quotient_check(&Word(vec![0; 30]), 1, 30).unwrap();
        assert!(r.certified_digits.iter().all(|&d| d == 1));
    }
}
