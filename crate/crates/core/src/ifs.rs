//! Similarity and algebraic-similarity iterated function systems, their coding maps,
//! Bernoulli sampling and a catalog of standard examples.

use crate::error::{invalid, Error, Result};
use crate::exact::{self, RatInterval};
use crate::linalg::{self, Mat, Vector};
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rand::distributions::{Distribution, WeightedIndex};
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::path::Path;

pub const ORTHO_TOL: f64 = 1e-12;

/// `x -> c O x + y` on R^d.
#[derive(Debug, Clone, PartialEq)]
pub struct Similarity {
    pub ratio: f64,
    pub orthogonal: Mat,
    pub translation: Vector,
}

impl Similarity {
    pub fn new(ratio: f64, orthogonal: Mat, translation: Vector) -> Result<Self> {
        if !(ratio > 0.0 && ratio.is_finite()) {
            return invalid(format!("ratio must be positive, got {ratio}"));
        }
        if !linalg::is_orthogonal(&orthogonal, ORTHO_TOL) {
            return invalid("orthogonal part fails O^T O = I");
        }
        if orthogonal.nrows() != translation.len() {
            return Err(Error::Dimension { expected: orthogonal.nrows(), got: translation.len() });
        }
        Ok(Self { ratio, orthogonal, translation })
    }

    pub fn dim(&self) -> usize {
        self.translation.len()
    }

    pub fn evaluate(&self, x: &Vector) -> Result<Vector> {
        if x.len() != self.dim() {
            return Err(Error::Dimension { expected: self.dim(), got: x.len() });
        }
        Ok(&self.orthogonal * x * self.ratio + &self.translation)
    }

    /// The same map viewed on d x 1 matrices.
    pub fn to_algebraic(&self) -> AlgebraicSimilarity {
        let d = self.dim();
        AlgebraicSimilarity {
            ratio: self.ratio,
            left: self.orthogonal.clone(),
            right: Mat::identity(1, 1),
            translation: Mat::from_column_slice(d, 1, self.translation.as_slice()),
        }
    }
}

/// `alpha -> lambda * beta * alpha * gamma + delta` on M x N matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct AlgebraicSimilarity {
    pub ratio: f64,
    pub left: Mat,
    pub right: Mat,
    pub translation: Mat,
}

impl AlgebraicSimilarity {
    pub fn new(ratio: f64, left: Mat, right: Mat, translation: Mat) -> Result<Self> {
        if !(ratio > 0.0 && ratio.is_finite()) {
            return invalid(format!("ratio must be positive, got {ratio}"));
        }
        if !linalg::is_orthogonal(&left, ORTHO_TOL) || !linalg::is_orthogonal(&right, ORTHO_TOL) {
            return invalid("left/right parts must be orthogonal");
        }
        if translation.nrows() != left.nrows() {
            return Err(Error::Dimension { expected: left.nrows(), got: translation.nrows() });
        }
        if translation.ncols() != right.nrows() {
            return Err(Error::Dimension { expected: right.nrows(), got: translation.ncols() });
        }
        Ok(Self { ratio, left, right, translation })
    }

    pub fn identity(m: usize, n: usize) -> Self {
        Self { ratio: 1.0, left: Mat::identity(m, m), right: Mat::identity(n, n), translation: Mat::zeros(m, n) }
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.left.nrows(), self.right.nrows())
    }

    pub fn evaluate(&self, x: &Mat) -> Result<Mat> {
        let (m, n) = self.shape();
        if x.shape() != (m, n) {
            return Err(Error::Dimension { expected: m * n, got: x.len() });
        }
        Ok(&self.left * x * &self.right * self.ratio + &self.translation)
    }

    /// `self ∘ inner`.
    pub fn compose(&self, inner: &AlgebraicSimilarity) -> AlgebraicSimilarity {
        AlgebraicSimilarity {
            ratio: self.ratio * inner.ratio,
            left: &self.left * &inner.left,
            right: &inner.right * &self.right,
            translation: &self.left * &inner.translation * &self.right * self.ratio + &self.translation,
        }
    }

    pub fn inverse(&self) -> AlgebraicSimilarity {
        let lt = self.left.transpose();
        let rt = self.right.transpose();
        let r = 1.0 / self.ratio;
        AlgebraicSimilarity { ratio: r, translation: -(&lt * &self.translation * &rt) * r, left: lt, right: rt }
    }
}

/// Exact affine map `x -> slope * x + offset` on the line; `|slope|` is the ratio.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExactAffine {
    pub slope: BigRational,
    pub offset: BigRational,
}

impl ExactAffine {
    pub fn apply(&self, x: &BigRational) -> BigRational {
        &self.slope * x + &self.offset
    }

    /// `self ∘ inner`.
    pub fn compose(&self, inner: &ExactAffine) -> ExactAffine {
        ExactAffine { slope: &self.slope * &inner.slope, offset: &self.slope * &inner.offset + &self.offset }
    }

    pub fn identity() -> Self {
        ExactAffine { slope: BigRational::one(), offset: BigRational::zero() }
    }
}

/// A finite word `(b_1, ..., b_n)` over the alphabet `0..|E|`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Word(pub Vec<usize>);

impl Word {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Symbols in reading order `b_1, ..., b_n`.
    pub fn forward(&self) -> &[usize] {
        &self.0
    }

    /// The reversal `b_n, ..., b_1`.
    pub fn reversed(&self) -> Word {
        Word(self.0.iter().rev().copied().collect())
    }

    pub fn prefix(&self, n: usize) -> Word {
        Word(self.0[..n.min(self.len())].to_vec())
    }

    /// Shift by `n` symbols: `(b_{n+1}, b_{n+2}, ...)`.
    pub fn shift(&self, n: usize) -> Word {
        Word(self.0[n.min(self.len())..].to_vec())
    }

    pub fn concat(&self, other: &Word) -> Word {
        Word(self.0.iter().chain(&other.0).copied().collect())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CodedPoint {
    pub value: Mat,
    /// Bound on the distance from `value` to the coded point of any extension of the word.
    pub error_radius: f64,
}

#[derive(Debug, Clone)]
pub struct Ifs {
    pub name: String,
    m: usize,
    n: usize,
    maps: Vec<AlgebraicSimilarity>,
    weights: Vec<f64>,
    exact: Option<Vec<ExactAffine>>,
}

/// Draws `n` i.i.d. symbols with the given probability vector (zero weights allowed).
pub fn sample_symbols<R: Rng + ?Sized>(weights: &[f64], n: usize, rng: &mut R) -> Result<Word> {
    let dist = WeightedIndex::new(weights).map_err(|e| Error::Invalid(format!("weights: {e}")))?;
    Ok(Word((0..n).map(|_| dist.sample(rng)).collect()))
}

fn check_weights(weights: &[f64], count: usize) -> Result<()> {
    if weights.len() != count {
        return Err(Error::Dimension { expected: count, got: weights.len() });
    }
    if weights.iter().any(|&w| !(w > 0.0)) {
        return invalid("every weight must be positive");
    }
    if (weights.iter().sum::<f64>() - 1.0).abs() > 1e-12 {
        return invalid("weights must sum to 1");
    }
    Ok(())
}

impl Ifs {
    pub fn new(name: &str, maps: Vec<AlgebraicSimilarity>, weights: Vec<f64>) -> Result<Self> {
        if maps.is_empty() {
            return invalid("an IFS needs at least one map");
        }
        let (m, n) = maps[0].shape();
        for mp in &maps {
            if mp.shape() != (m, n) {
                return Err(Error::Dimension { expected: m * n, got: mp.shape().0 * mp.shape().1 });
            }
        }
        check_weights(&weights, maps.len())?;
        let exact = if m * n == 1 {
            let mut ex = Vec::new();
            for mp in &maps {
                let s = mp.ratio * mp.left[(0, 0)] * mp.right[(0, 0)];
                ex.push(ExactAffine { slope: exact::from_f64(s)?, offset: exact::from_f64(mp.translation[(0, 0)])? });
            }
            Some(ex)
        } else {
            None
        };
        Ok(Self { name: name.to_string(), m, n, maps, weights, exact })
    }

    pub fn from_similarities(name: &str, maps: Vec<Similarity>, weights: Vec<f64>) -> Result<Self> {
        Self::new(name, maps.iter().map(Similarity::to_algebraic).collect(), weights)
    }

    /// One-dimensional IFS with exact rational slopes and offsets.
    pub fn exact_1d(name: &str, maps: Vec<ExactAffine>, weights: Vec<f64>) -> Result<Self> {
        let alg: Vec<AlgebraicSimilarity> = maps
            .iter()
            .map(|e| {
                let s = exact::to_f64(&e.slope);
                AlgebraicSimilarity {
                    ratio: s.abs(),
                    left: Mat::from_element(1, 1, s.signum()),
                    right: Mat::identity(1, 1),
                    translation: Mat::from_element(1, 1, exact::to_f64(&e.offset)),
                }
            })
            .collect();
        if maps.iter().any(|e| e.slope.is_zero()) {
            return invalid("ratio must be positive");
        }
        let mut ifs = Self::new(name, alg, weights)?;
        ifs.exact = Some(maps);
        Ok(ifs)
    }

    pub fn with_weights(&self, weights: Vec<f64>) -> Result<Self> {
        check_weights(&weights, self.maps.len())?;
        Ok(Self { weights, ..self.clone() })
    }

    /// `(M, N)`: the maps act on M x N matrices (R^d is `(d, 1)`).
    pub fn shape(&self) -> (usize, usize) {
        (self.m, self.n)
    }

    pub fn maps(&self) -> &[AlgebraicSimilarity] {
        &self.maps
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn exact_maps(&self) -> Option<&[ExactAffine]> {
        self.exact.as_deref()
    }

    pub fn alphabet_size(&self) -> usize {
        self.maps.len()
    }

    fn check_word(&self, word: &Word) -> Result<()> {
        if let Some(&b) = word.forward().iter().find(|&&b| b >= self.maps.len()) {
            return invalid(format!("symbol {b} outside alphabet of size {}", self.maps.len()));
        }
        Ok(())
    }

    /// `phi_{b_1} ∘ ... ∘ phi_{b_n}`; the empty word gives the identity.
    pub fn compose_prefix(&self, word: &Word) -> Result<AlgebraicSimilarity> {
        self.check_word(word)?;
        let mut acc = AlgebraicSimilarity::identity(self.m, self.n);
        for &b in word.forward() {
            acc = acc.compose(&self.maps[b]);
        }
        Ok(acc)
    }

    pub fn compose_prefix_exact(&self, word: &Word) -> Result<ExactAffine> {
        self.check_word(word)?;
        let ex = self.exact.as_ref().ok_or_else(|| Error::Invalid("no exact data for this IFS".into()))?;
        let mut acc = ExactAffine::identity();
        for &b in word.forward() {
            acc = acc.compose(&ex[b]);
        }
        Ok(acc)
    }

    pub fn is_contracting(&self) -> bool {
        self.maps.iter().all(|m| m.ratio < 1.0)
    }

    /// Radius of a ball about the origin mapped into itself by every map:
    /// `max_e |delta_e| / (1 - lambda_e)`. The attractor lies inside it.
    pub fn invariant_radius(&self) -> Result<f64> {
        let mut r: f64 = 0.0;
        for (i, m) in self.maps.iter().enumerate() {
            if m.ratio >= 1.0 {
                return Err(Error::NotContracting { index: i, ratio: m.ratio });
            }
            r = r.max(m.translation.norm() / (1.0 - m.ratio));
        }
        Ok(r)
    }

    /// `phi_{b_n^1}(anchor)` with the error radius `(prod ratios) * (|anchor| + R)`.
    /// `region_radius` certifies an invariant ball when some map is not a contraction.
    pub fn coding_point(&self, word: &Word, anchor: &Mat, region_radius: Option<f64>) -> Result<CodedPoint> {
        let r = match region_radius {
            Some(r) => r,
            None => self.invariant_radius()?,
        };
        let f = self.compose_prefix(word)?;
        Ok(CodedPoint { value: f.evaluate(anchor)?, error_radius: f.ratio * (anchor.norm() + r) })
    }

    /// Exact rational enclosure of the coded point of every extension of `word`
    /// (one-dimensional contracting systems, anchor 0).
    pub fn coding_enclosure(&self, word: &Word) -> Result<RatInterval> {
        let ex = self.exact.as_ref().ok_or_else(|| Error::Invalid("no exact data for this IFS".into()))?;
        let mut radius = BigRational::zero();
        for (i, e) in ex.iter().enumerate() {
            let s = e.slope.abs();
            if s >= BigRational::one() {
                return Err(Error::NotContracting { index: i, ratio: exact::to_f64(&s) });
            }
            let r = e.offset.abs() / (BigRational::one() - s);
            if r > radius {
                radius = r;
            }
        }
        let f = self.compose_prefix_exact(word)?;
        Ok(RatInterval::around(&f.offset, &(f.slope.abs() * radius)))
    }

    pub fn sample_word<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Word {
        sample_symbols(&self.weights, n, rng).expect("weights validated at construction")
    }

    /// `sum_e mu(e) log(ratio_e)`.
    pub fn contraction_on_average(&self) -> f64 {
        self.maps.iter().zip(&self.weights).map(|(m, w)| w * m.ratio.ln()).sum()
    }

    /// Root `s` of `sum ratio_e^s = 1` and the weights `ratio_e^s`.
    pub fn similarity_dimension(&self) -> Result<SimilarityDimension> {
        for (i, m) in self.maps.iter().enumerate() {
            if m.ratio >= 1.0 {
                return Err(Error::NotContracting { index: i, ratio: m.ratio });
            }
        }
        let f = |s: f64| self.maps.iter().map(|m| m.ratio.powf(s)).sum::<f64>() - 1.0;
        let degenerate = self.maps.len() == 1;
        let s = if degenerate {
            0.0
        } else {
            let (mut lo, mut hi) = (0.0, 1.0);
            while f(hi) > 0.0 {
                hi *= 2.0;
            }
            while hi - lo > 1e-13 {
                let mid = 0.5 * (lo + hi);
                if f(mid) > 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            0.5 * (lo + hi)
        };
        let weights: Vec<f64> = self.maps.iter().map(|m| m.ratio.powf(s)).collect();
        Ok(SimilarityDimension { s, weights, degenerate })
    }

    /// Numeric irreducibility probe: do the images of a generic point under all words of
    /// length `depth` affinely span the ambient space? Warning-level evidence only.
    pub fn irreducibility_probe(&self, depth: usize) -> bool {
        let dim = self.m * self.n;
        let generic = Mat::from_fn(self.m, self.n, |i, j| 0.1234 + 0.0917 * (i * self.n + j) as f64);
        let mut pts = vec![generic];
        for _ in 0..depth {
            let mut next = Vec::with_capacity(pts.len() * self.maps.len());
            for p in &pts {
                for mp in &self.maps {
                    next.push(mp.evaluate(p).unwrap());
                }
                if next.len() > 4096 {
                    break;
                }
            }
            pts = next;
        }
        let base = pts[0].clone();
        let diffs = Mat::from_fn(dim, pts.len() - 1, |r, c| (&pts[c + 1] - &base)[r]);
        linalg::rank(&diffs, 1e-9) == dim
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityDimension {
    pub s: f64,
    pub weights: Vec<f64>,
    /// A single map: the attractor is a point.
    pub degenerate: bool,
}

fn equal_weights(k: usize) -> Vec<f64> {
    vec![1.0 / k as f64; k]
}

fn affine(slope: BigRational, offset: BigRational) -> ExactAffine {
    ExactAffine { slope, offset }
}

pub fn cantor3() -> Ifs {
    Ifs::exact_1d(
        "cantor3",
        vec![affine(exact::rat(1, 3), exact::int(0)), affine(exact::rat(1, 3), exact::rat(2, 3))],
        equal_weights(2),
    )
    .unwrap()
}

/// Middle-epsilon Cantor set: remove the open middle interval of length `eps`.
pub fn middle_eps(eps: &BigRational) -> Result<Ifs> {
    if !(eps.is_positive() && eps < &BigRational::one()) {
        return invalid("middle_eps needs 0 < eps < 1");
    }
    let c = (BigRational::one() - eps) / exact::int(2);
    let off = BigRational::one() - &c;
    Ifs::exact_1d("middle_eps", vec![affine(c.clone(), exact::int(0)), affine(c, off)], equal_weights(2))
}

/// `{x/3, (3 + x)/4}`.
pub fn ex1314() -> Ifs {
    Ifs::exact_1d(
        "ex1314",
        vec![affine(exact::rat(1, 3), exact::int(0)), affine(exact::rat(1, 4), exact::rat(3, 4))],
        equal_weights(2),
    )
    .unwrap()
}

fn planar(c: f64, theta: f64, y: [f64; 2]) -> Similarity {
    Similarity::new(c, linalg::rotation2(theta), Vector::from_vec(y.to_vec())).unwrap()
}

pub fn koch() -> Ifs {
    let t = std::f64::consts::FRAC_PI_3;
    let h = 3f64.sqrt() / 6.0;
    let maps = vec![
        planar(1.0 / 3.0, 0.0, [0.0, 0.0]),
        planar(1.0 / 3.0, t, [1.0 / 3.0, 0.0]),
        planar(1.0 / 3.0, -t, [0.5, h]),
        planar(1.0 / 3.0, 0.0, [2.0 / 3.0, 0.0]),
    ];
    Ifs::from_similarities("koch", maps, equal_weights(4)).unwrap()
}

pub fn sierpinski() -> Ifs {
    let maps = vec![
        planar(0.5, 0.0, [0.0, 0.0]),
        planar(0.5, 0.0, [0.5, 0.0]),
        planar(0.5, 0.0, [0.25, 3f64.sqrt() / 4.0]),
    ];
    Ifs::from_similarities("sierpinski", maps, equal_weights(3)).unwrap()
}

pub fn cantor_x_cantor() -> Ifs {
    let t = 2.0 / 3.0;
    let maps = [[0.0, 0.0], [t, 0.0], [0.0, t], [t, t]].iter().map(|&y| planar(1.0 / 3.0, 0.0, y)).collect();
    Ifs::from_similarities("cantor_x_cantor", maps, equal_weights(4)).unwrap()
}

pub enum Preset {
    Similarity(Ifs),
    Moebius(crate::moebius::MoebiusIfs),
}

/// Catalog lookup: `cantor3`, `middle_eps(eps)`, `ex1314`, `koch`, `sierpinski`,
/// `cantor_x_cantor`, `fN(N)`.
pub fn preset(name: &str) -> Result<Preset> {
    let name = name.trim();
    let arg = |prefix: &str| -> Option<String> {
        name.strip_prefix(prefix).map(|r| r.trim_start_matches('(').trim_end_matches(')').trim().to_string())
    };
    Ok(match name {
        "cantor3" => Preset::Similarity(cantor3()),
        "ex1314" => Preset::Similarity(ex1314()),
        "koch" => Preset::Similarity(koch()),
        "sierpinski" => Preset::Similarity(sierpinski()),
        "cantor_x_cantor" => Preset::Similarity(cantor_x_cantor()),
        _ => {
            if let Some(a) = arg("middle_eps") {
                match exact::RealSpec::parse(&a)? {
                    exact::RealSpec::Rational(eps) => Preset::Similarity(middle_eps(&eps)?),
                    _ => return invalid("middle_eps parameter must be rational"),
                }
            } else if let Some(a) = arg("fN").or_else(|| arg("f")) {
                let n: usize = a.parse().map_err(|_| Error::Parse(format!("unknown preset '{name}'")))?;
                Preset::Moebius(crate::moebius::fn_preset(n)?.0)
            } else {
                return invalid(format!("unknown preset '{name}'"));
            }
        }
    })
}

pub fn preset_similarity(name: &str) -> Result<Ifs> {
    match preset(name)? {
        Preset::Similarity(i) => Ok(i),
        Preset::Moebius(_) => invalid(format!("'{name}' is a Möbius system, not a similarity IFS")),
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Num {
    Float(f64),
    Text(String),
}

impl Num {
    fn exact(&self) -> Result<BigRational> {
        match self {
            Num::Float(x) => exact::from_f64(*x),
            Num::Text(s) => match exact::RealSpec::parse(s)? {
                exact::RealSpec::Rational(r) => Ok(r),
                other => exact::from_f64(other.to_f64()),
            },
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MapSpec {
    pub ratio: Num,
    /// Rows of the left orthogonal matrix (defaults to the identity).
    #[serde(default)]
    pub orthogonal: Option<Vec<Vec<f64>>>,
    /// Rows of the right orthogonal matrix (defaults to the identity).
    #[serde(default)]
    pub right: Option<Vec<Vec<f64>>>,
    /// Row-major translation.
    pub translation: Vec<Num>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IfsSpec {
    #[serde(default)]
    pub name: Option<String>,
    /// Ambient dimension d for maps on R^d; alternatively give `m` and `n`.
    #[serde(default)]
    pub dimension: Option<usize>,
    #[serde(default)]
    pub m: Option<usize>,
    #[serde(default)]
    pub n: Option<usize>,
    #[serde(default)]
    pub weights: Option<Vec<f64>>,
    pub maps: Vec<MapSpec>,
}

fn rows_to_mat(rows: &[Vec<f64>], size: usize) -> Result<Mat> {
    if rows.len() != size || rows.iter().any(|r| r.len() != size) {
        return Err(Error::Dimension { expected: size, got: rows.len() });
    }
    Ok(Mat::from_fn(size, size, |i, j| rows[i][j]))
}

impl IfsSpec {
    pub fn build(&self) -> Result<Ifs> {
        let (m, n) = match (self.dimension, self.m, self.n) {
            (Some(d), _, _) => (d, 1),
            (None, Some(m), Some(n)) => (m, n),
            _ => return Err(Error::Parse("IFS file needs `dimension` or `m` and `n`".into())),
        };
        let k = self.maps.len();
        let weights = self.weights.clone().unwrap_or_else(|| equal_weights(k.max(1)));
        let name = self.name.clone().unwrap_or_else(|| "custom".into());
        if m * n == 1 && self.maps.iter().all(|mp| mp.orthogonal.is_none() && mp.right.is_none()) {
            let mut ex = Vec::new();
            for mp in &self.maps {
                if mp.translation.len() != 1 {
                    return Err(Error::Dimension { expected: 1, got: mp.translation.len() });
                }
                ex.push(ExactAffine { slope: mp.ratio.exact()?, offset: mp.translation[0].exact()? });
            }
            return Ifs::exact_1d(&name, ex, weights);
        }
        let mut maps = Vec::new();
        for mp in &self.maps {
            let left = match &mp.orthogonal {
                Some(r) => rows_to_mat(r, m)?,
                None => Mat::identity(m, m),
            };
            let right = match &mp.right {
                Some(r) => rows_to_mat(r, n)?,
                None => Mat::identity(n, n),
            };
            if mp.translation.len() != m * n {
                return Err(Error::Dimension { expected: m * n, got: mp.translation.len() });
            }
            let t: Vec<f64> =
                mp.translation.iter().map(|x| x.exact().map(|r| exact::to_f64(&r))).collect::<Result<_>>()?;
            let ratio = exact::to_f64(&mp.ratio.exact()?);
            maps.push(AlgebraicSimilarity::new(ratio, left, right, Mat::from_row_slice(m, n, &t))?);
        }
        Ifs::new(&name, maps, weights)
    }
}

/// Loads an IFS description from a TOML or JSON file (chosen by extension).
pub fn load_ifs(path: &Path) -> Result<Ifs> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    parse_ifs(&text, path.extension().and_then(|e| e.to_str()) == Some("json"))
}

pub fn parse_ifs(text: &str, json: bool) -> Result<Ifs> {
    let spec: IfsSpec = if json {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?
    } else {
        toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?
    };
    spec.build()
}
