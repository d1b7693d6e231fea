//! Validated continued fractions, Gauss-map statistics, best approximations in planar
//! lattices and the lattice-to-digits maps f1 (minimal-point heights) and f2 (floor ratios).

use crate::error::{invalid, Error, Result};
use crate::exact::{self, cf_digits, RatInterval};
use crate::ifs::{Ifs, Word};
use crate::moebius::MoebiusIfs;
use crate::seed::SeedStream;
use num_bigint::{BigInt, RandBigInt};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::Serialize;

#[derive(Debug, Clone, PartialEq)]
pub struct CfExpansion {
    pub digits: Vec<BigInt>,
    pub certified_length: usize,
    /// `(p_n, q_n)` for n = 0..=certified_length, starting from `(0, 1)`.
    pub convergents: Vec<(BigInt, BigInt)>,
    /// The enclosure is a single rational whose expansion ends here.
    pub terminated: bool,
}

pub fn convergents(digits: &[BigInt]) -> Vec<(BigInt, BigInt)> {
    let mut out = vec![(BigInt::zero(), BigInt::one())];
    let (mut p0, mut q0) = (BigInt::one(), BigInt::zero());
    let (mut p1, mut q1) = (BigInt::zero(), BigInt::one());
    for a in digits {
        let p2 = a * &p1 + &p0;
        let q2 = a * &q1 + &q0;
        p0 = std::mem::replace(&mut p1, p2);
        q0 = std::mem::replace(&mut q1, q2);
        out.push((p1.clone(), q1.clone()));
    }
    out
}

/// Digits shared by every point of `[lo, hi] ⊂ (0, 1)`: the common prefix of the canonical
/// expansions of the endpoints (cylinders of the Gauss map are intervals).
pub fn cf_validated(iv: &RatInterval) -> Result<CfExpansion> {
    if !(iv.lo.is_positive() && iv.hi < BigRational::one()) {
        return invalid("cf_validated needs 0 < lo <= hi < 1");
    }
    let (_, dl) = cf_digits(&iv.lo);
    if iv.is_point() {
        let conv = convergents(&dl);
        return Ok(CfExpansion { certified_length: dl.len(), digits: dl, convergents: conv, terminated: true });
    }
    let (_, dh) = cf_digits(&iv.hi);
    let k = dl.iter().zip(&dh).take_while(|(a, b)| a == b).count();
    let digits = dl[..k].to_vec();
    let conv = convergents(&digits);
    Ok(CfExpansion { certified_length: k, digits, convergents: conv, terminated: false })
}

#[derive(Debug, Clone, PartialEq)]
pub struct GaussOrbit {
    /// `iterates[0]` is the input; `iterates[j]` encloses `G^j(alpha)`.
    pub iterates: Vec<RatInterval>,
    /// Digit read at each certified step.
    pub digits: Vec<BigInt>,
    /// The orbit reached 0 exactly (rational input).
    pub terminated: bool,
}

/// Up to `n` validated iterates of `G(x) = 1/x - floor(1/x)`; stops early when an enclosure
/// straddles a point `1/k` or the orbit reaches 0.
pub fn gauss_orbit(alpha: &RatInterval, n: usize) -> Result<GaussOrbit> {
    if !alpha.lo.is_positive() || alpha.hi >= BigRational::one() {
        return invalid("enclosure must lie in (0, 1)");
    }
    let mut cur = alpha.clone();
    let mut iterates = vec![cur.clone()];
    let mut digits = Vec::new();
    let mut terminated = false;
    for _ in 0..n {
        if !cur.lo.is_positive() {
            terminated = cur.is_point();
            break;
        }
        let r = cur.recip()?;
        let Some(a) = r.certified_floor() else { break };
        let next = r.shift(&-BigRational::from_integer(a.clone()));
        digits.push(a);
        iterates.push(next.clone());
        cur = next;
        if cur.is_point() && cur.lo.is_zero() {
            terminated = true;
            break;
        }
    }
    Ok(GaussOrbit { iterates, digits, terminated })
}

/// Gauss measure of `{x : floor(1/x) = k}`: `log2((k+1)^2 / (k(k+2)))`.
pub fn gauss_probability(k: u64) -> f64 {
    let k = k as f64;
    (((k + 1.0) * (k + 1.0)) / (k * (k + 2.0))).log2()
}

/// Gauss measure of `{x : floor(1/x) > k}`.
pub fn gauss_tail(k: u64) -> f64 {
    ((k as f64 + 2.0) / (k as f64 + 1.0)).log2()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DigitReport {
    pub total: usize,
    pub k_max: u64,
    pub counts: Vec<u64>,
    pub tail_count: u64,
    pub empirical: Vec<f64>,
    pub reference: Vec<f64>,
    pub tail_empirical: f64,
    pub tail_reference: f64,
    /// Max absolute deviation over bins 1..=k_max and the tail bin.
    pub sup_deviation: f64,
}

pub fn digit_frequencies(stream: &[u64], k_max: u64) -> Result<DigitReport> {
    if stream.len() < 100 {
        return invalid("digit stream needs at least 100 entries");
    }
    if k_max == 0 {
        return invalid("k_max must be positive");
    }
    let mut counts = vec![0u64; k_max as usize];
    let mut tail = 0u64;
    for &d in stream {
        if d == 0 {
            return invalid("digits must be positive");
        }
        if d <= k_max {
            counts[(d - 1) as usize] += 1;
        } else {
            tail += 1;
        }
    }
    let total = stream.len() as f64;
    let empirical: Vec<f64> = counts.iter().map(|&c| c as f64 / total).collect();
    let reference: Vec<f64> = (1..=k_max).map(gauss_probability).collect();
    let tail_empirical = tail as f64 / total;
    let tail_reference = gauss_tail(k_max);
    let sup = empirical
        .iter()
        .zip(&reference)
        .map(|(a, b)| (a - b).abs())
        .fold((tail_empirical - tail_reference).abs(), f64::max);
    Ok(DigitReport {
        total: stream.len(),
        k_max,
        counts,
        tail_count: tail,
        empirical,
        reference,
        tail_empirical,
        tail_reference,
        sup_deviation: sup,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct BestApprox {
    pub p: BigInt,
    pub q: u64,
    /// Enclosure of `p - alpha q`.
    pub xi1: RatInterval,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BestApproxSequence {
    pub points: Vec<BestApprox>,
    /// Heights `q` divided by the first one.
    pub y_sequence: Vec<BigRational>,
    /// Every `q <= decided_up_to` was classified.
    pub decided_up_to: u64,
}

/// Exhaustive scan of `u_alpha Z^2` for best approximations with `1 <= q <= q_max`.
pub fn best_approximations(alpha: &RatInterval, q_max: u64) -> Result<BestApproxSequence> {
    if q_max < 1 {
        return invalid("q_max must be at least 1");
    }
    let half = exact::rat(1, 2);
    let mut points = Vec::new();
    let mut best: Option<RatInterval> = None;
    let mut decided = 0;
    for q in 1..=q_max {
        let qq = BigRational::from_integer(q.into());
        let x = alpha.scale(&qq);
        let p = exact::round_half_down(&x.lo);
        if exact::round_half_down(&x.hi) != p {
            break;
        }
        let pr = BigRational::from_integer(p.clone());
        let xi1 = RatInterval { lo: &pr - &x.hi, hi: &pr - &x.lo };
        let dist = xi1.abs();
        // A tie between the two nearest integers leaves no best approximation at this q.
        let tie = match dist.certainly_less(&RatInterval::point(half.clone())) {
            Some(true) => false,
            Some(false) => true,
            None => break,
        };
        let is_best = if tie {
            false
        } else {
            match &best {
                None => true,
                Some(b) => match dist.certainly_less(b) {
                    Some(v) => v,
                    None => break,
                },
            }
        };
        decided = q;
        if is_best {
            points.push(BestApprox { p, q, xi1: xi1.clone() });
        }
        best = Some(match best {
            None => dist.clone(),
            Some(b) => RatInterval {
                lo: if dist.lo < b.lo { dist.lo.clone() } else { b.lo },
                hi: if dist.hi < b.hi { dist.hi.clone() } else { b.hi },
            },
        });
        if is_best && dist.is_point() && dist.lo.is_zero() {
            decided = q_max;
            break;
        }
    }
    let y_sequence = match points.first() {
        Some(f) => points.iter().map(|b| exact::rat(b.q as i64, f.q as i64)).collect(),
        None => vec![],
    };
    Ok(BestApproxSequence { points, y_sequence, decided_up_to: decided })
}

/// A planar lattice given exactly by the columns `(x1, y1), (x2, y2)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Lattice2 {
    pub b1: [BigRational; 2],
    pub b2: [BigRational; 2],
}

impl Lattice2 {
    pub fn from_f64(basis: &crate::linalg::Mat) -> Result<Self> {
        if basis.shape() != (2, 2) {
            return invalid("planar lattice needs a 2x2 basis");
        }
        let e = |i, j| exact::from_f64(basis[(i, j)]);
        Ok(Self { b1: [e(0, 0)?, e(1, 0)?], b2: [e(0, 1)?, e(1, 1)?] })
    }

    /// `u_alpha Z^2`: columns `(1, 0)` and `(-alpha, 1)`.
    pub fn u_alpha(alpha: &BigRational) -> Self {
        Self { b1: [exact::int(1), exact::int(0)], b2: [-alpha.clone(), exact::int(1)] }
    }

    /// `diag(s, 1/s)` applied to the lattice.
    pub fn scaled(&self, s: &BigRational) -> Self {
        let si = s.recip();
        Self { b1: [&self.b1[0] * s, &self.b1[1] * &si], b2: [&self.b2[0] * s, &self.b2[1] * &si] }
    }

    fn det(&self) -> BigRational {
        &self.b1[0] * &self.b2[1] - &self.b1[1] * &self.b2[0]
    }

    fn point(&self, p: &BigInt, q: &BigInt) -> [BigRational; 2] {
        let p = BigRational::from_integer(p.clone());
        let q = BigRational::from_integer(q.clone());
        [&p * &self.b1[0] + &q * &self.b2[0], &p * &self.b1[1] + &q * &self.b2[1]]
    }

    /// All nonzero lattice points with `|xi1| <= x` and `|xi2| <= y`.
    fn box_points(&self, x: &BigRational, y: &BigRational) -> Vec<[BigRational; 2]> {
        let det = self.det().abs();
        // Coefficient of b2 in terms of xi: q = (-b1y xi1 + b1x xi2) / det.
        let qb = (self.b1[1].abs() * x + self.b1[0].abs() * y) / &det;
        let qmax = exact::floor(&qb);
        let mut out = Vec::new();
        let mut q = -qmax.clone();
        while q <= qmax {
            let qr = BigRational::from_integer(q.clone());
            let (mut lo, mut hi): (Option<BigRational>, Option<BigRational>) = (None, None);
            let mut feasible = true;
            for (bnd, c1, c2) in [(x, &self.b1[0], &self.b2[0]), (y, &self.b1[1], &self.b2[1])] {
                let off = &qr * c2;
                if c1.is_zero() {
                    if off.abs() > *bnd {
                        feasible = false;
                    }
                    continue;
                }
                let a = (-bnd - &off) / c1;
                let b = (bnd - &off) / c1;
                let (a, b) = if a <= b { (a, b) } else { (b, a) };
                lo = Some(match lo {
                    Some(l) if l > a => l,
                    _ => a,
                });
                hi = Some(match hi {
                    Some(h) if h < b => h,
                    _ => b,
                });
            }
            if feasible {
                if let (Some(lo), Some(hi)) = (lo, hi) {
                    let plo = -exact::floor(&-lo);
                    let phi = exact::floor(&hi);
                    let mut p = plo;
                    while p <= phi {
                        if !(p.is_zero() && q.is_zero()) {
                            out.push(self.point(&p, &q));
                        }
                        p += 1;
                    }
                }
            }
            q += 1;
        }
        out
    }

    fn gauss_reduced(&self) -> Lattice2 {
        let dot = |u: &[BigRational; 2], v: &[BigRational; 2]| &u[0] * &v[0] + &u[1] * &v[1];
        let mut a = self.b1.clone();
        let mut b = self.b2.clone();
        loop {
            if dot(&a, &a) > dot(&b, &b) {
                std::mem::swap(&mut a, &mut b);
            }
            let mu = exact::round_half_down(&(dot(&a, &b) / dot(&a, &a)));
            if mu.is_zero() {
                break;
            }
            let m = BigRational::from_integer(mu);
            b = [&b[0] - &m * &a[0], &b[1] - &m * &a[1]];
            if dot(&b, &b) >= dot(&a, &a) {
                break;
            }
        }
        Lattice2 { b1: a, b2: b }
    }
}

/// Heights of the minimal points with second coordinate >= 1, rescaled to start at 1.
///
/// The first such point and its predecessor are found by box enumeration; later ones
/// follow the recursion `v_{k+1} = v_{k-1} + a_k v_k`, `a_k = floor(|xi1(v_{k-1})| / |xi1(v_k)|)`.
pub fn f1_y_sequence(x: &Lattice2, count: usize) -> Result<Vec<BigRational>> {
    if x.det().is_zero() {
        return Err(Error::Singular);
    }
    let lat = x.gauss_reduced();
    let covol = lat.det().abs();
    let one = BigRational::one();
    // Predecessor: minimal |xi1| among points with |xi2| < 1, ties broken by smaller |xi2|.
    let cand = lat.box_points(&(&covol * exact::int(2)), &one);
    let key = |v: &[BigRational; 2]| (v[0].abs(), v[1].abs());
    let prev = cand
        .into_iter()
        .filter(|v| v[1].abs() < one)
        .min_by(|a, b| key(a).cmp(&key(b)))
        .ok_or_else(|| Error::Uncertified("no lattice point below height 1".into()))?;
    let m = prev[0].abs();
    if m.is_zero() {
        return Err(Error::Uncertified("lattice has a vertical vector below height 1".into()));
    }
    // First point of height >= 1: minimal |xi2| among points with |xi1| < m.
    let cand = lat.box_points(&m, &(&covol * exact::int(2) / &m));
    let key2 = |v: &[BigRational; 2]| (v[1].abs(), v[0].abs());
    let firsts: Vec<[BigRational; 2]> = cand.into_iter().filter(|v| v[0].abs() < m).collect();
    let mut cur = firsts.iter().min_by(|a, b| key2(a).cmp(&key2(b))).cloned().ok_or_else(|| Error::Uncertified("no successor point".into()))?;
    if firsts.iter().filter(|v| key2(v) == key2(&cur)).count() > 2 {
        return Err(Error::Uncertified("tie between minimal points".into()));
    }
    if cur[1].is_negative() {
        cur = [-&cur[0], -&cur[1]];
    }
    let mut prev = prev;
    if prev[1].is_negative() || (prev[1].is_zero() && prev[0].is_positive() == cur[0].is_positive()) {
        prev = [-&prev[0], -&prev[1]];
    }
    let y0 = cur[1].clone();
    let mut ys = vec![one.clone()];
    while ys.len() < count {
        if cur[0].is_zero() {
            break;
        }
        let a = exact::floor(&(prev[0].abs() / cur[0].abs()));
        let ar = BigRational::from_integer(a);
        let next = [&prev[0] + &ar * &cur[0], &prev[1] + &ar * &cur[1]];
        prev = std::mem::replace(&mut cur, next);
        ys.push(&cur[1] / &y0);
    }
    Ok(ys)
}

/// f1 of `u_alpha x0` for every alpha in the enclosure: the common prefix of the
/// sequences at the two endpoints (valid when both lie on the same side of 1/2, since
/// the sequence depends only on the digits of the distance from alpha to Z).
pub fn f1_y_sequence_alpha(alpha: &RatInterval, count: usize) -> Result<Vec<BigRational>> {
    let frac = |x: &BigRational| x - BigRational::from_integer(exact::floor(x));
    let fl = alpha.certified_floor().ok_or_else(|| Error::Uncertified("enclosure straddles an integer".into()))?;
    let half = exact::rat(1, 2);
    let (lo, hi) = (frac(&alpha.lo), frac(&alpha.hi));
    let _ = fl;
    if (lo < half) != (hi < half) || lo == half || hi == half {
        return Err(Error::Uncertified("enclosure straddles 1/2".into()));
    }
    let a = f1_y_sequence(&Lattice2::u_alpha(&lo), count)?;
    if alpha.is_point() {
        return Ok(a);
    }
    let b = f1_y_sequence(&Lattice2::u_alpha(&hi), count)?;
    // Both sequences are integers q_n; the prefix whose floor ratios agree is shared.
    let k = a.iter().zip(&b).take_while(|(x, y)| x == y).count();
    Ok(a[..k.saturating_sub(1)].to_vec())
}

/// `(floor(y_{n+1} / y_n))_n`.
pub fn f2_floor_ratios(y: &[BigRational]) -> Result<Vec<BigInt>> {
    let mut out = Vec::with_capacity(y.len().saturating_sub(1));
    for w in y.windows(2) {
        if w[1] <= w[0] || !w[0].is_positive() {
            return invalid("y sequence must be positive and strictly increasing");
        }
        out.push(exact::floor(&(&w[1] / &w[0])));
    }
    Ok(out)
}

/// Floating-point variant; ratios within 1e-12 (relative) of an integer are refused.
pub fn f2_floor_ratios_f64(y: &[f64]) -> Result<Vec<u64>> {
    let mut out = Vec::new();
    for w in y.windows(2) {
        if !(w[1] > w[0] && w[0] > 0.0) {
            return invalid("y sequence must be positive and strictly increasing");
        }
        let r = w[1] / w[0];
        if (r - r.round()).abs() < 1e-12 * r {
            return Err(Error::Uncertified(format!("ratio {r} too close to an integer")));
        }
        out.push(r.floor() as u64);
    }
    Ok(out)
}

/// Continued-fraction digits of the distance from `alpha` to the nearest integer
/// (the digits `f2 ∘ f1` recovers from `u_alpha x0`).
pub fn nearest_integer_distance_digits(alpha: &RatInterval) -> Result<CfExpansion> {
    let fl = alpha.certified_floor().ok_or_else(|| Error::Uncertified("enclosure straddles an integer".into()))?;
    let f = BigRational::from_integer(fl);
    let lo = &alpha.lo - &f;
    let hi = &alpha.hi - &f;
    let half = exact::rat(1, 2);
    let one = BigRational::one();
    let iv = if hi < half {
        RatInterval::new(lo, hi)?
    } else if lo > half {
        RatInterval::new(&one - hi, &one - lo)?
    } else {
        return Err(Error::Uncertified("enclosure touches 1/2".into()));
    };
    if iv.lo.is_zero() {
        return Err(Error::Uncertified("enclosure touches an integer".into()));
    }
    cf_validated(&iv)
}

/// Exact systems whose coded points admit rational enclosures.
pub trait ExactCoding: Sync {
    fn enclosure(&self, word: &Word) -> Result<RatInterval>;
    fn symbol_weights(&self) -> &[f64];
    /// Upper bound on the contraction ratio of a single map on the certified region.
    fn max_ratio(&self) -> f64;
}

impl ExactCoding for Ifs {
    fn enclosure(&self, word: &Word) -> Result<RatInterval> {
        self.coding_enclosure(word)
    }
    fn symbol_weights(&self) -> &[f64] {
        self.weights()
    }
    fn max_ratio(&self) -> f64 {
        self.maps().iter().map(|m| m.ratio).fold(0.0, f64::max)
    }
}

impl ExactCoding for MoebiusIfs {
    fn enclosure(&self, word: &Word) -> Result<RatInterval> {
        self.coding_enclosure(word)
    }
    fn symbol_weights(&self) -> &[f64] {
        &self.weights
    }
    fn max_ratio(&self) -> f64 {
        // |phi'(x)| = 1/(n + x)^2 for the continued-fraction maps; 0.5 is a safe start.
        0.5
    }
}

/// Certified digits of `frac(x)` for every `x` in the enclosure.
pub fn fractional_digits(iv: &RatInterval) -> Vec<u64> {
    let Some(fl) = iv.certified_floor() else { return vec![] };
    let f = BigRational::from_integer(fl);
    let shifted = RatInterval { lo: &iv.lo - &f, hi: &iv.hi - &f };
    if shifted.lo.is_zero() {
        if shifted.is_point() {
            return vec![];
        }
        return vec![];
    }
    match cf_validated(&shifted) {
        Ok(cf) => cf.digits.iter().map(|d| d.to_u64().unwrap_or(u64::MAX)).collect(),
        Err(_) => vec![],
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CfExperimentReport {
    pub n_points: usize,
    pub digits_per_point: usize,
    pub depths: Vec<usize>,
    pub certified_counts: Vec<usize>,
    pub shortfalls: usize,
    pub max_digit: u64,
    pub digit_one_frequency: f64,
    pub report: Option<DigitReport>,
}

/// Digits of one coded point, deepening the word until `want` digits are certified or
/// `depth_cap` is reached. Returns (digits truncated to `want`, final depth).
pub fn point_digits(system: &dyn ExactCoding, word: &Word, start_depth: usize, want: usize) -> (Vec<u64>, usize) {
    let mut depth = start_depth.min(word.len()).max(1);
    loop {
        let digits = system.enclosure(&word.prefix(depth)).map(|e| fractional_digits(&e)).unwrap_or_default();
        if digits.len() >= want || depth >= word.len() {
            let mut d = digits;
            d.truncate(want);
            return (d, depth);
        }
        depth = (depth * 3 / 2).max(depth + 1).min(word.len());
    }
}

/// Samples `n_points` Bernoulli words, certifies `digits_per_point` CF digits of each coded
/// point (fractional part) and pools them. `depth` caps the coding depth; 0 chooses one.
pub fn fractal_cf_experiment(
    system: &dyn ExactCoding,
    n_points: usize,
    depth: usize,
    digits_per_point: usize,
    seed: u64,
    k_max: u64,
) -> Result<CfExperimentReport> {
    if n_points == 0 {
        return invalid("need at least one point");
    }
    // A digit costs about log of the Gauss-map expansion (~2.4 on average) in precision.
    let per_symbol = -system.max_ratio().ln();
    let estimate = ((digits_per_point as f64 * 2.6 + 40.0) / per_symbol).ceil() as usize;
    // A given depth is a hard cap; otherwise start from the estimate and allow deepening.
    let (start, cap) = if depth == 0 { (estimate, estimate * 4) } else { (depth, depth) };
    let seeds = SeedStream::new(seed);
    let results: Vec<(Vec<u64>, usize)> = (0..n_points)
        .into_par_iter()
        .map(|i| {
            let mut rng = seeds.rng(i as u64);
            let w = crate::ifs::sample_symbols(system.symbol_weights(), cap, &mut rng).expect("validated weights");
            point_digits(system, &w, start, digits_per_point)
        })
        .collect();
    let mut pooled = Vec::new();
    let mut counts = Vec::new();
    let mut depths = Vec::new();
    for (d, dep) in &results {
        counts.push(d.len());
        depths.push(*dep);
        pooled.extend_from_slice(d);
    }
    let shortfalls = counts.iter().filter(|&&c| c < digits_per_point).count();
    let max_digit = pooled.iter().copied().max().unwrap_or(0);
    let ones = pooled.iter().filter(|&&d| d == 1).count();
    let report = if pooled.len() >= 100 { Some(digit_frequencies(&pooled, k_max)?) } else { None };
    Ok(CfExperimentReport {
        n_points,
        digits_per_point,
        depths,
        certified_counts: counts,
        shortfalls,
        max_digit,
        digit_one_frequency: if pooled.is_empty() { 0.0 } else { ones as f64 / pooled.len() as f64 },
        report,
    })
}

/// Certified digits of Lebesgue-random reals: each point is a dyadic interval of width
/// `2^-bits` chosen uniformly.
pub fn lebesgue_random_digits(n_points: usize, digits_per_point: usize, bits: u64, seed: u64) -> Vec<Vec<u64>> {
    let seeds = SeedStream::new(seed);
    (0..n_points)
        .into_par_iter()
        .map(|i| {
            let mut rng = seeds.rng(i as u64);
            let den = BigInt::one() << bits;
            let m = rng.gen_bigint_range(&BigInt::one(), &(&den - 1u32));
            let iv = RatInterval { lo: BigRational::new(m.clone(), den.clone()), hi: BigRational::new(m + 1u32, den) };
            let mut d = fractional_digits(&iv);
            d.truncate(digits_per_point);
            d
        })
        .collect()
}

/// Checks `q_{n+1} = a_{n+1} q_n + q_{n-1}` and `|x - p_n/q_n| < 1/q_n^2` for every `x`
/// in the enclosure, on the certified range.
pub fn check_convergents(iv: &RatInterval, cf: &CfExpansion) -> bool {
    let c = &cf.convergents;
    for n in 1..c.len() {
        let qm1 = if n >= 2 { c[n - 2].1.clone() } else { BigInt::zero() };
        if c[n].1 != &cf.digits[n - 1] * &c[n - 1].1 + qm1 {
            return false;
        }
        let r = BigRational::new(c[n].0.clone(), c[n].1.clone());
        let bound = BigRational::new(BigInt::one(), &c[n].1 * &c[n].1);
        let worst = (&iv.lo - &r).abs().max((&iv.hi - &r).abs());
        let exact_hit = iv.is_point() && worst.is_zero();
        if !(worst < bound || exact_hit) {
            return false;
        }
    }
    true
}

pub fn gcd_check(p: &BigInt, q: &BigInt) -> bool {
    p.gcd(q).is_one()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{int, rat, RealSpec};
    use crate::ifs::cantor3;

    fn digits_u64(cf: &CfExpansion) -> Vec<u64> {
        cf.digits.iter().map(|d| d.to_u64().unwrap()).collect()
    }

    #[test]
    fn cf_validated_examples() {
        let cf = cf_validated(&RatInterval::point(rat(2, 7))).unwrap();
        assert_eq!(digits_u64(&cf), vec![3, 2]);
        assert!(cf.terminated);
        let cf = cf_validated(&RatInterval::new(rat(618, 1000), rat(619, 1000)).unwrap()).unwrap();
        assert!(cf.certified_length >= 5);
        assert!(digits_u64(&cf)[..5].iter().all(|&d| d == 1));
        let cf = cf_validated(&RatInterval::new(rat(1, 3), rat(2, 3)).unwrap()).unwrap();
        assert_eq!(cf.certified_length, 0);
        assert!(cf_validated(&RatInterval::new(rat(0, 1), rat(1, 2)).unwrap()).is_err());
    }

    #[test]
    fn gauss_orbit_examples() {
        let g = RealSpec::parse("golden").unwrap().enclosure_depth(60);
        let o = gauss_orbit(&g, 20).unwrap();
        let phi = (5f64.sqrt() - 1.0) / 2.0;
        assert_eq!(o.digits.len(), 20);
        assert!(o.digits.iter().all(|d| d == &BigInt::one()));
        for it in &o.iterates {
            assert!((it.to_f64_mid() - phi).abs() < 1e-12);
        }
        let o = gauss_orbit(&RatInterval::point(rat(1, 3)), 5).unwrap();
        assert!(o.terminated);
        assert_eq!(o.digits, vec![BigInt::from(3)]);
        assert!(o.iterates.last().unwrap().lo.is_zero());
        let s = RealSpec::parse("sqrt2").unwrap().enclosure_depth(60);
        let s = s.shift(&int(-1));
        let o = gauss_orbit(&s, 15).unwrap();
        assert!(o.digits.iter().all(|d| d == &BigInt::from(2)));
        assert!(gauss_orbit(&RatInterval::new(rat(0, 1), rat(1, 2)).unwrap(), 3).is_err());
    }

    #[test]
    fn gauss_reference_values() {
        assert!((gauss_probability(1) - 0.415037).abs() < 1e-6);
        assert!((gauss_probability(2) - 0.169925).abs() < 1e-6);
        // Independent oracle: midpoint-rule integration of the density over (1/(k+1), 1/k].
        for k in 1..6u64 {
            let (a, b) = (1.0 / (k as f64 + 1.0), 1.0 / k as f64);
            let steps = 20000;
            let h = (b - a) / steps as f64;
            let s: f64 = (0..steps).map(|i| h / (2f64.ln() * (1.0 + a + (i as f64 + 0.5) * h))).sum();
            assert!((s - gauss_probability(k)).abs() < 1e-9);
        }
        let total: f64 = (1..=10).map(gauss_probability).sum::<f64>() + gauss_tail(10);
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn digit_frequency_examples() {
        let r = digit_frequencies(&vec![1; 500], 10).unwrap();
        assert_eq!(r.empirical[0], 1.0);
        assert!((r.sup_deviation - (1.0 - 0.415037)).abs() < 1e-5);
        assert!(digit_frequencies(&[1, 2], 10).is_err());
    }

    #[test]
    fn best_approximation_examples() {
        let g = RealSpec::parse("golden").unwrap().enclosure_depth(60);
        let b = best_approximations(&g, 10).unwrap();
        let qs: Vec<u64> = b.points.iter().map(|p| p.q).collect();
        assert_eq!(qs, vec![1, 2, 3, 5, 8]);
        let b = best_approximations(&RatInterval::point(rat(1, 2)), 50).unwrap();
        let qs: Vec<u64> = b.points.iter().map(|p| p.q).collect();
        assert_eq!(qs, vec![2]);
    }

    #[test]
    fn f1_examples() {
        let g = RealSpec::parse("golden").unwrap().enclosure_depth(80);
        let y = f1_y_sequence_alpha(&g, 12).unwrap();
        let fib: Vec<BigRational> = [1, 2, 3, 5, 8, 13, 21, 34, 55, 89].iter().map(|&v| int(v)).collect();
        assert_eq!(y[..10], fib[..]);
        // Pinned against the exhaustive best-approximation scan.
        let b = best_approximations(&g, 1000).unwrap();
        let k = b.y_sequence.len().min(y.len());
        assert_eq!(y[..k], b.y_sequence[..k]);
        let a = f2_floor_ratios(&y).unwrap();
        for n in 1..y.len() - 1 {
            let an = BigRational::from_integer(a[n].clone());
            assert_eq!(y[n + 1], &an * &y[n] + &y[n - 1]);
        }
    }

    #[test]
    fn f1_rescale_invariance() {
        let alpha = rat(7_234_567, 19_999_999);
        let x = Lattice2::u_alpha(&alpha);
        let base = f1_y_sequence(&x, 12).unwrap();
        let s = int(4);
        let scaled = f1_y_sequence(&x.scaled(&s), 8).unwrap();
        // Heights scale by 1/4; the tail starts at the first height >= 4 (in units of y_1 = 1).
        let start = base.iter().position(|y| y >= &int(4)).unwrap();
        let tail: Vec<BigRational> = base[start..].iter().map(|y| y / &base[start]).collect();
        let k = scaled.len().min(tail.len());
        assert_eq!(scaled[..k], tail[..k]);
    }

    #[test]
    fn f2_examples() {
        let y: Vec<BigRational> = [1, 2, 3, 8].iter().map(|&v| int(v)).collect();
        let a = f2_floor_ratios(&y).unwrap();
        assert_eq!(a, vec![BigInt::from(2), BigInt::from(1), BigInt::from(2)]);
        let g: Vec<BigRational> = (0..10).map(|k| int(1 << k)).collect();
        assert!(f2_floor_ratios(&g).unwrap().iter().all(|d| d == &BigInt::from(2)));
        assert!(f2_floor_ratios(&[int(2), int(1)]).is_err());
        assert!(f2_floor_ratios_f64(&[1.0, 3.0]).is_err());
        assert_eq!(f2_floor_ratios_f64(&[1.0, 2.5, 6.0]).unwrap(), vec![2, 2]);
    }

    #[test]
    fn f2_f1_on_rationals() {
        for (p, q) in [(3, 7), (5, 13), (2, 9), (8, 11), (1, 3)] {
            let a = rat(p, q);
            let y = f1_y_sequence_alpha(&RatInterval::point(a.clone()), 100).unwrap();
            let d = f2_floor_ratios(&y).unwrap();
            let want = nearest_integer_distance_digits(&RatInterval::point(a)).unwrap();
            assert_eq!(d, want.digits);
        }
    }

    #[test]
    fn cantor_points_experiment_small() {
        let r = fractal_cf_experiment(&cantor3(), 4, 0, 50, 1, 10).unwrap();
        assert_eq!(r.shortfalls, 0);
        assert!(r.certified_counts.iter().all(|&c| c == 50));
        let r2 = fractal_cf_experiment(&cantor3(), 4, 0, 50, 1, 10).unwrap();
        assert_eq!(r, r2);
        let capped = fractal_cf_experiment(&cantor3(), 4, 5, 50, 1, 10).unwrap();
        assert_eq!(capped.shortfalls, 4);
        assert!(capped.depths.iter().all(|&d| d == 5));
        // The all-first-map word codes 0: no digit of the fractional part can be certified.
        let (d, _) = point_digits(&cantor3(), &Word(vec![0; 40]), 40, 5);
        assert!(d.is_empty());
    }
}
