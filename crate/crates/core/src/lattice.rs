//! Unimodular lattices in R^D: reduction, systoles, the diagonal flow `a_t u_alpha Z^D`,
//! the walk/flow identity and direct Diophantine tests.
//!
//! Bounded orbits in X are detected through systoles (Mahler's criterion: a set of
//! unimodular lattices is relatively compact iff the systole is bounded below on it).

use crate::error::{invalid, Error, Result};
use crate::exact::{self, ln_abs_int, RealSpec};
use crate::groups::{self, GroupElement};
use crate::ifs::{AlgebraicSimilarity, Ifs, Word};
use crate::linalg::Mat;
use crate::seed::SeedStream;
use crate::stats;
use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

pub const MAX_DIM: usize = 6;
pub const DET_TOL: f64 = 1e-9;
pub const LLL_DELTA: f64 = 0.99;

pub type IntMat = DMatrix<i128>;

/// Columns generate the lattice; `|det| = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeBasis {
    basis: Mat,
}

impl LatticeBasis {
    pub fn new(basis: Mat) -> Result<Self> {
        let d = basis.nrows();
        if d != basis.ncols() || d == 0 || d > MAX_DIM {
            return invalid(format!("lattice bases are square with dimension 1..={MAX_DIM}"));
        }
        let det = basis.determinant();
        if !det.is_finite() || det == 0.0 {
            return Err(Error::Singular);
        }
        if (det.abs() - 1.0).abs() > DET_TOL {
            return invalid(format!("basis determinant {det} is not +-1"));
        }
        Ok(Self { basis })
    }

    /// Rescales to covolume 1.
    pub fn normalized(basis: Mat) -> Result<Self> {
        let d = basis.nrows();
        if d != basis.ncols() || d == 0 {
            return invalid("lattice bases are square");
        }
        let det = basis.determinant();
        if !det.is_finite() || det == 0.0 {
            return Err(Error::Singular);
        }
        Self::new(basis * det.abs().powf(-1.0 / d as f64))
    }

    pub fn standard(d: usize) -> Self {
        Self { basis: Mat::identity(d, d) }
    }

    pub fn basis(&self) -> &Mat {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.basis.nrows()
    }

    /// The lattice `g L`.
    pub fn transformed(&self, g: &GroupElement) -> Result<Self> {
        if g.dim() != self.dim() {
            return Err(Error::Dimension { expected: self.dim(), got: g.dim() });
        }
        Self::new(g.matrix() * &self.basis)
    }

    /// Same lattice under an integer change of basis with determinant +-1.
    pub fn change_basis(&self, t: &IntMat) -> Result<Self> {
        Self::new(&self.basis * int_to_f64(t))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Reduction {
    pub basis: LatticeBasis,
    /// `reduced = original * transform`.
    pub transform: IntMat,
}

fn int_to_f64(t: &IntMat) -> Mat {
    t.map(|v| v as f64)
}

fn col_norm2(b: &Mat, j: usize) -> f64 {
    b.column(j).norm_squared()
}

fn gram_schmidt(b: &Mat) -> (Mat, Vec<f64>) {
    let d = b.ncols();
    let mut mu = Mat::zeros(d, d);
    let mut bstar: Vec<nalgebra::DVector<f64>> = Vec::with_capacity(d);
    let mut norms = Vec::with_capacity(d);
    for i in 0..d {
        let mut v = b.column(i).clone_owned();
        for j in 0..i {
            let m = b.column(i).dot(&bstar[j]) / norms[j];
            mu[(i, j)] = m;
            v -= &bstar[j] * m;
        }
        norms.push(v.norm_squared());
        bstar.push(v);
    }
    (mu, norms)
}

/// LLL reduction of the columns of `b`; returns the reduced basis and `t` with `b t = reduced`.
pub fn lll(b: &Mat, delta: f64) -> Result<(Mat, IntMat)> {
    let d = b.ncols();
    let mut b = b.clone();
    let mut t = IntMat::identity(d, d);
    if d < 2 {
        return Ok((b, t));
    }
    let mut k = 1;
    let mut guard = 0usize;
    while k < d {
        guard += 1;
        if guard > 1_000_000 {
            return Err(Error::Uncertified("lattice reduction did not terminate".into()));
        }
        for j in (0..k).rev() {
            let (mu, _) = gram_schmidt(&b);
            let q = mu[(k, j)].round();
            if q != 0.0 {
                if !q.is_finite() || q.abs() > 1e30 {
                    return Err(Error::Uncertified("reduction coefficient overflow".into()));
                }
                let bj = b.column(j).clone_owned();
                b.column_mut(k).axpy(-q, &bj, 1.0);
                let qi = q as i128;
                for r in 0..d {
                    t[(r, k)] -= qi * t[(r, j)];
                }
            }
        }
        let (mu, norms) = gram_schmidt(&b);
        let m = mu[(k, k - 1)];
        if norms[k] >= (delta - m * m) * norms[k - 1] {
            k += 1;
        } else {
            b.swap_columns(k, k - 1);
            t.swap_columns(k, k - 1);
            k = (k - 1).max(1);
        }
    }
    Ok((b, t))
}

/// Lagrange reduction of a planar basis: the first column is a shortest vector.
pub fn lagrange(b: &Mat) -> (Mat, IntMat) {
    let mut b = b.clone();
    let mut t = IntMat::identity(2, 2);
    if col_norm2(&b, 0) > col_norm2(&b, 1) {
        b.swap_columns(0, 1);
        t.swap_columns(0, 1);
    }
    for _ in 0..10_000 {
        let q = (b.column(0).dot(&b.column(1)) / col_norm2(&b, 0)).round();
        if q != 0.0 {
            let b0 = b.column(0).clone_owned();
            b.column_mut(1).axpy(-q, &b0, 1.0);
            let qi = q as i128;
            for r in 0..2 {
                t[(r, 1)] -= qi * t[(r, 0)];
            }
        }
        if col_norm2(&b, 1) < col_norm2(&b, 0) {
            b.swap_columns(0, 1);
            t.swap_columns(0, 1);
        } else {
            break;
        }
    }
    (b, t)
}

pub fn reduce_basis(l: &LatticeBasis) -> Result<Reduction> {
    let (b, t) = if l.dim() == 2 { lagrange(l.basis()) } else { lll(l.basis(), LLL_DELTA)? };
    Ok(Reduction { basis: LatticeBasis { basis: b }, transform: t })
}

/// Shortest nonzero vector `b x` with `|b x|^2 <= radius2`, by Fincke–Pohst enumeration.
pub fn shortest_vector(b: &Mat, radius2: f64) -> Option<(f64, Vec<i128>)> {
    let d = b.ncols();
    let g = b.transpose() * b;
    let chol = g.cholesky()?;
    let r = chol.l().transpose();
    let mut q = Mat::zeros(d, d);
    for i in 0..d {
        q[(i, i)] = r[(i, i)] * r[(i, i)];
        for j in i + 1..d {
            q[(i, j)] = r[(i, j)] / r[(i, i)];
        }
    }
    let mut best: Option<(f64, Vec<i128>)> = None;
    let mut bound = radius2 * (1.0 + 1e-9);
    let mut x = vec![0i128; d];
    fn rec(
        i: usize,
        partial: f64,
        q: &Mat,
        b: &Mat,
        x: &mut [i128],
        bound: &mut f64,
        best: &mut Option<(f64, Vec<i128>)>,
    ) {
        let d = x.len();
        let c: f64 = -(i + 1..d).map(|j| q[(i, j)] * x[j] as f64).sum::<f64>();
        let room = ((*bound - partial) / q[(i, i)]).max(0.0).sqrt();
        let lo = (c - room).ceil() as i128;
        let hi = (c + room).floor() as i128;
        for v in lo..=hi {
            x[i] = v;
            let diff = v as f64 - c;
            let p = partial + q[(i, i)] * diff * diff;
            if p > *bound {
                continue;
            }
            if i == 0 {
                if x.iter().all(|&z| z == 0) {
                    continue;
                }
                let xf = nalgebra::DVector::from_iterator(d, x.iter().map(|&z| z as f64));
                let len2 = (b * xf).norm_squared();
                if best.as_ref().map_or(true, |(l, _)| len2 < *l) {
                    *best = Some((len2, x.to_vec()));
                    *bound = bound.min(len2 * (1.0 + 1e-9));
                }
            } else {
                rec(i - 1, p, q, b, x, bound, best);
            }
        }
        x[i] = 0;
    }
    rec(d - 1, 0.0, &q, b, &mut x, &mut bound, &mut best);
    best.map(|(l, v)| (l.sqrt(), v))
}

/// Length of a shortest nonzero vector. Enumeration runs inside twice the shortest
/// reduced basis vector.
pub fn systole(l: &LatticeBasis) -> Result<f64> {
    let red = reduce_basis(l)?;
    systole_of_reduced(red.basis.basis())
}

fn systole_of_reduced(b: &Mat) -> Result<f64> {
    let shortest = (0..b.ncols()).map(|j| col_norm2(b, j)).fold(f64::INFINITY, f64::min);
    shortest_vector(b, 4.0 * shortest)
        .map(|(l, _)| l)
        .ok_or_else(|| Error::Uncertified("enumeration found no vector".into()))
}

/// An M x N matrix of real numbers given exactly or by continued fractions (row-major).
#[derive(Debug, Clone, PartialEq)]
pub struct RealMatrix {
    pub rows: usize,
    pub cols: usize,
    pub entries: Vec<RealSpec>,
}

impl RealMatrix {
    pub fn new(rows: usize, cols: usize, entries: Vec<RealSpec>) -> Result<Self> {
        if rows == 0 || cols == 0 || entries.len() != rows * cols || rows + cols > MAX_DIM {
            return invalid(format!("alpha must be M x N with M + N <= {MAX_DIM}"));
        }
        Ok(Self { rows, cols, entries })
    }

    pub fn scalar(x: RealSpec) -> Self {
        Self { rows: 1, cols: 1, entries: vec![x] }
    }

    /// Parses entries such as `golden`, `3/7`, `sqrt2`, separated by commas within a row
    /// and semicolons between rows.
    pub fn parse(s: &str) -> Result<Self> {
        let rows: Vec<&str> = s.split(';').map(str::trim).filter(|r| !r.is_empty()).collect();
        let mut entries = Vec::new();
        let mut cols = None;
        for r in &rows {
            let row: Vec<RealSpec> = r.split(',').map(|e| RealSpec::parse(e.trim())).collect::<Result<_>>()?;
            if *cols.get_or_insert(row.len()) != row.len() {
                return Err(Error::Parse("ragged alpha matrix".into()));
            }
            entries.extend(row);
        }
        Self::new(rows.len(), cols.unwrap_or(0), entries)
    }

    pub fn from_f64(m: &Mat) -> Result<Self> {
        let mut entries = Vec::new();
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                entries.push(RealSpec::Rational(exact::from_f64(m[(i, j)])?));
            }
        }
        Self::new(m.nrows(), m.ncols(), entries)
    }

    pub fn is_rational(&self) -> bool {
        self.entries.iter().all(RealSpec::is_rational)
    }

    pub fn to_f64(&self) -> Mat {
        Mat::from_fn(self.rows, self.cols, |i, j| self.entries[i * self.cols + j].to_f64())
    }

    /// Numerators over a common denominator, within `exp(-ln_inv_eps)` of every entry.
    pub fn approximant(&self, ln_inv_eps: f64) -> Approximant {
        let mut den = BigInt::one();
        for e in &self.entries {
            if let RealSpec::Rational(x) = e {
                den = den.lcm(x.denom());
            }
        }
        let mut error = 0.0;
        if !self.is_rational() {
            let bits = (ln_inv_eps / std::f64::consts::LN_2).ceil().max(1.0) as usize + 2;
            den <<= bits;
            error = 2f64.powi(-(bits as i32) + 1);
        }
        let denr = BigRational::from_integer(den.clone());
        let nums = self
            .entries
            .iter()
            .map(|e| match e {
                RealSpec::Rational(x) => exact::floor(&(x * &denr)),
                _ => {
                    let enc = e.enclosure_ln(ln_inv_eps + 3.0);
                    exact::floor(&(&enc.lo * &denr))
                }
            })
            .collect();
        Approximant { rows: self.rows, cols: self.cols, nums, den, error }
    }
}

/// `alpha' = nums / den`, with `|alpha - alpha'| <= error` entrywise.
#[derive(Debug, Clone, PartialEq)]
pub struct Approximant {
    pub rows: usize,
    pub cols: usize,
    pub nums: Vec<BigInt>,
    pub den: BigInt,
    pub error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FlowTrace {
    pub m: usize,
    pub n: usize,
    pub times: Vec<f64>,
    pub systoles: Vec<f64>,
}

impl FlowTrace {
    pub fn min_systole(&self) -> f64 {
        self.systoles.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// The orbit stays in the compact part `{systole >= BA_SYSTOLE_THRESHOLD}`.
    pub fn stays_bounded(&self) -> bool {
        self.min_systole() >= BA_SYSTOLE_THRESHOLD
    }
}

/// Classification cut for `c_min` in [`ba_test_direct`].
pub const BA_CONSTANT_THRESHOLD: f64 = 0.02;
/// Classification cut for the minimum systole along [`flow_trace`].
pub const BA_SYSTOLE_THRESHOLD: f64 = 0.2;

fn ratio_f64(num: &BigInt, den: &BigInt) -> f64 {
    exact::to_f64(&BigRational::new(num.clone(), den.clone()))
}

/// Systoles of `a_t u_alpha Z^D` on the grid `t = 0, dt, 2 dt, ... <= t_max`.
///
/// `u_alpha` acts exactly on an integer basis that is carried along and re-reduced at
/// each time, so the cancellation in the top block never happens in floating point.
pub fn flow_trace(alpha: &RealMatrix, t_max: f64, dt: f64) -> Result<FlowTrace> {
    if !(dt > 0.0) || !(t_max >= 0.0) {
        return invalid("flow_trace needs dt > 0 and t_max >= 0");
    }
    let (m, n) = (alpha.rows, alpha.cols);
    let d = m + n;
    let g = groups::gamma(m, n);
    let ap = alpha.approximant(g * t_max + 50.0);
    let mut basis: Vec<Vec<BigInt>> = (0..d)
        .map(|c| (0..d).map(|r| if r == c { BigInt::one() } else { BigInt::zero() }).collect())
        .collect();
    let steps = (t_max / dt + 1e-9).floor() as usize;
    let mut times = Vec::with_capacity(steps + 1);
    let mut systoles = Vec::with_capacity(steps + 1);
    for k in 0..=steps {
        let t = k as f64 * dt;
        let top = (t / m as f64).exp();
        let bot = (-t / n as f64).exp();
        // Column c of u_alpha B: top rows (den B_top - A B_bottom) / den.
        let mut x = Mat::zeros(d, d);
        for (c, col) in basis.iter().enumerate() {
            for i in 0..m {
                let mut acc = &ap.den * &col[i];
                for j in 0..n {
                    acc -= &ap.nums[i * n + j] * &col[m + j];
                }
                x[(i, c)] = ratio_f64(&acc, &ap.den) * top;
            }
            for j in 0..n {
                x[(m + j, c)] = col[m + j].to_f64().unwrap_or(f64::INFINITY) * bot;
            }
        }
        let (red, tr) = if d == 2 { lagrange(&x) } else { lll(&x, LLL_DELTA)? };
        basis = (0..d)
            .map(|c| {
                (0..d)
                    .map(|r| (0..d).fold(BigInt::zero(), |acc, j| acc + &basis[j][r] * BigInt::from(tr[(j, c)])))
                    .collect()
            })
            .collect();
        times.push(t);
        systoles.push(systole_of_reduced(&red)?);
    }
    Ok(FlowTrace { m, n, times, systoles })
}

/// Closed form for M = N = 1: the shortest vector of `a_t u_alpha Z^2` is `e^t` (from
/// `(1, 0)`) or comes from a convergent `p_k / q_k` of alpha.
pub fn systole_from_convergents(alpha: &RealSpec, t: f64, depth: usize) -> f64 {
    let x = alpha.enclosure_ln(120.0).midpoint();
    let (a0, digits) = exact::cf_digits(&x);
    let conv = {
        let mut out = vec![(a0.clone(), BigInt::one())];
        let (mut p0, mut q0) = (BigInt::one(), BigInt::zero());
        let (mut p1, mut q1) = (a0, BigInt::one());
        for a in digits.iter().take(depth) {
            let p2 = a * &p1 + &p0;
            let q2 = a * &q1 + &q0;
            p0 = std::mem::replace(&mut p1, p2);
            q0 = std::mem::replace(&mut q1, q2);
            out.push((p1.clone(), q1.clone()));
        }
        out
    };
    let mut best = t.exp();
    for (p, q) in conv {
        let e = exact::to_f64(&(&x * BigRational::from_integer(q.clone()) - BigRational::from_integer(p)));
        let qf = q.to_f64().unwrap();
        let l = ((t.exp() * e).powi(2) + (qf * (-t).exp()).powi(2)).sqrt();
        best = best.min(l);
    }
    best
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WalkFlowReport {
    pub depth: usize,
    pub discrepancy: f64,
    pub budget: f64,
    pub certified: bool,
}

/// Compares `g_{b_n} ... g_{b_1}` with `u_{-beta_n} a_{t_n} k_n u_{pi(b)}`, where
/// `beta_n = pi(T^n b)` and `a_{t_n} k_n` is the linear part of `(phi_{b_1} ∘ ... ∘ phi_{b_n})^{-1}`.
/// Coded points use `tail` further symbols of `word`.
pub fn walk_flow_identity_check(ifs: &Ifs, word: &Word, n: usize, tail: usize) -> Result<WalkFlowReport> {
    if !ifs.is_contracting() {
        return invalid("walk/flow identity needs a contracting IFS");
    }
    if word.len() < n + tail {
        return invalid(format!("word of length {} is shorter than depth + tail = {}", word.len(), n + tail));
    }
    let (m, nn) = ifs.shape();
    let (gens, _) = groups::ifs_generators(ifs)?;
    let mut left = GroupElement::identity(m + nn);
    for &b in &word.forward()[..n] {
        left = gens[b].mul(&left);
    }
    let anchor = Mat::zeros(m, nn);
    let pi = ifs.coding_point(&word.prefix(n + tail), &anchor, None)?;
    let beta = ifs.coding_point(&word.shift(n).prefix(tail), &anchor, None)?;
    let phi = ifs.compose_prefix(&word.prefix(n))?.inverse();
    let linear = AlgebraicSimilarity::new(phi.ratio, phi.left.clone(), phi.right.clone(), Mat::zeros(m, nn))?;
    let p = groups::similarity_to_group(&linear, m, nn)?;
    let u_pi = groups::u_alpha(&pi.value);
    let u_beta = groups::u_alpha(&(-&beta.value));
    let h = u_beta.matrix() * p.matrix() * u_pi.matrix();
    let hn = h.norm();
    let right = GroupElement::new(h.clone())?;
    let discrepancy = left.distance(&right);
    let coding = (beta.error_radius * (p.matrix() * u_pi.matrix()).norm()
        + pi.error_radius * (u_beta.matrix() * p.matrix()).norm()
        + beta.error_radius * pi.error_radius * p.matrix().norm())
        / hn;
    if !coding.is_finite() || coding > 1e-6 {
        return Err(Error::Uncertified(format!("coding error {coding:e} too large; increase the tail depth")));
    }
    let growth: f64 = word.forward()[..n].iter().map(|&b| gens[b].matrix().norm()).product::<f64>() / left.matrix().norm();
    let rounding = 64.0 * (n as f64 + 4.0) * f64::EPSILON * growth.max(1.0)
        + 64.0 * f64::EPSILON * (u_beta.matrix().norm() * p.matrix().norm() * u_pi.matrix().norm() / hn);
    let budget = coding + rounding;
    Ok(WalkFlowReport { depth: n, discrepancy, budget, certified: discrepancy <= budget })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BaReport {
    /// Min of `|q|^{N/M} dist(alpha q, Z^M)` over `ceil(sqrt(q_max)) <= |q|_inf <= q_max`.
    pub c_min: f64,
    pub argmin_q: Vec<i64>,
    /// Same minimum over all `1 <= |q|_inf <= q_max`.
    pub c_min_all: f64,
    pub argmin_q_all: Vec<i64>,
    /// Bound on the error of each `dist` from approximating alpha.
    pub error_bound: f64,
}

fn q_vectors(n: usize, q_max: i64) -> impl Iterator<Item = Vec<i64>> {
    // Each q up to sign: the first nonzero coordinate is positive.
    let total = (2 * q_max + 1).pow(n as u32);
    (0..total).filter_map(move |mut idx| {
        let mut q = vec![0i64; n];
        for c in q.iter_mut() {
            *c = idx % (2 * q_max + 1) - q_max;
            idx /= 2 * q_max + 1;
        }
        let first = q.iter().find(|&&c| c != 0)?;
        (*first > 0).then_some(q)
    })
}

/// `den * dist(alpha' q, Z^M)` in the sup norm, as an integer.
fn scaled_dist(ap: &Approximant, q: &[i64]) -> BigInt {
    let mut worst = BigInt::zero();
    for i in 0..ap.rows {
        let mut acc = BigInt::zero();
        for (j, &qj) in q.iter().enumerate() {
            acc += &ap.nums[i * ap.cols + j] * qj;
        }
        let r = acc.mod_floor(&ap.den);
        let d = std::cmp::min(r.clone(), &ap.den - &r);
        if d > worst {
            worst = d;
        }
    }
    worst
}

fn ln_ratio(num: &BigInt, den: &BigInt) -> f64 {
    if num.is_zero() {
        f64::NEG_INFINITY
    } else {
        ln_abs_int(num) - ln_abs_int(den)
    }
}

fn ba_approximant(alpha: &RealMatrix, q_max: i64) -> Approximant {
    alpha.approximant(60.0 + ((q_max as f64) * alpha.cols as f64).ln().max(0.0) * 2.0)
}

/// Direct search for `c` in `|alpha q - p| >= c |q|^{-N/M}` (sup norms).
pub fn ba_test_direct(alpha: &RealMatrix, q_max: i64) -> Result<BaReport> {
    if q_max < 1 {
        return invalid("q_max must be at least 1");
    }
    if (2 * q_max + 1).checked_pow(alpha.cols as u32).map_or(true, |v| v > 400_000_000) {
        return invalid("search space too large");
    }
    let ap = ba_approximant(alpha, q_max);
    let expo = alpha.cols as f64 / alpha.rows as f64;
    let window = (q_max as f64).sqrt().ceil() as i64;
    let (mut best, mut arg) = (f64::INFINITY, vec![]);
    let (mut best_all, mut arg_all) = (f64::INFINITY, vec![]);
    for q in q_vectors(alpha.cols, q_max) {
        let norm = q.iter().map(|v| v.abs()).max().unwrap();
        let c = (ln_ratio(&scaled_dist(&ap, &q), &ap.den) + expo * (norm as f64).ln()).exp();
        if c < best_all {
            best_all = c;
            arg_all = q.clone();
        }
        if norm >= window && c < best {
            best = c;
            arg = q;
        }
    }
    let error_bound = ap.error * q_max as f64 * alpha.cols as f64;
    Ok(BaReport { c_min: best, argmin_q: arg, c_min_all: best_all, argmin_q_all: arg_all, error_bound })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiReport {
    pub lambda: f64,
    pub results: Vec<(i64, bool)>,
    pub error_bound: f64,
}

impl BaReport {
    pub fn badly_approximable(&self) -> bool {
        self.c_min >= BA_CONSTANT_THRESHOLD
    }
}

impl DiReport {
    pub fn all_pass(&self) -> bool {
        self.results.iter().all(|r| r.1)
    }
}

/// For each `Q`, whether some `0 < |q|_inf <= Q` has `|alpha q - p|_inf <= lambda Q^{-N/M}`.
/// Comparisons are exact for the approximant: `dist^M Q^N <= lambda^M`.
pub fn di_test(alpha: &RealMatrix, lambda: f64, q_list: &[i64]) -> Result<DiReport> {
    if !(lambda > 0.0 && lambda <= 1.0) {
        return invalid("lambda must lie in (0, 1]");
    }
    if q_list.iter().any(|&q| q < 1) {
        return invalid("every Q must be positive");
    }
    let q_max = q_list.iter().copied().max().unwrap_or(0);
    if q_max == 0 {
        return Ok(DiReport { lambda, results: vec![], error_bound: 0.0 });
    }
    if (2 * q_max + 1).checked_pow(alpha.cols as u32).map_or(true, |v| v > 400_000_000) {
        return invalid("search space too large");
    }
    let ap = ba_approximant(alpha, q_max);
    let lam = exact::from_f64(lambda)?;
    let (m, n) = (alpha.rows as u32, alpha.cols as u32);
    // Prefix minima of the scaled distance over shells |q|_inf = s.
    let mut shell_min: Vec<Option<BigInt>> = vec![None; q_max as usize + 1];
    for q in q_vectors(alpha.cols, q_max) {
        let s = q.iter().map(|v| v.abs()).max().unwrap() as usize;
        let d = scaled_dist(&ap, &q);
        if shell_min[s].as_ref().map_or(true, |b| &d < b) {
            shell_min[s] = Some(d);
        }
    }
    let mut prefix: Vec<Option<BigInt>> = Vec::with_capacity(shell_min.len());
    let mut cur: Option<BigInt> = None;
    for s in shell_min {
        cur = match (cur, s) {
            (None, x) => x,
            (Some(a), Some(b)) => Some(if b < a { b } else { a }),
            (a, None) => a,
        };
        prefix.push(cur.clone());
    }
    let lhs_scale = num_traits::pow(lam.denom().clone(), m as usize);
    let rhs = num_traits::pow(lam.numer().clone(), m as usize) * num_traits::pow(ap.den.clone(), m as usize);
    let results = q_list
        .iter()
        .map(|&qq| {
            let ok = match &prefix[qq as usize] {
                Some(dmin) => {
                    num_traits::pow(dmin.clone(), m as usize) * num_traits::pow(BigInt::from(qq), n as usize) * &lhs_scale <= rhs
                }
                None => false,
            };
            (qq, ok)
        })
        .collect();
    Ok(DiReport { lambda, results, error_bound: ap.error * q_max as f64 * alpha.cols as f64 })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EquidistReport {
    pub len: usize,
    pub thresholds: Vec<f64>,
    pub averages: Vec<f64>,
    pub stderr: Vec<f64>,
    pub first_half: Vec<f64>,
    pub second_half: Vec<f64>,
    pub first_stderr: Vec<f64>,
    pub second_stderr: Vec<f64>,
    /// First and second halves agree within 3 sigma for every threshold.
    pub split_half_stable: bool,
    /// Fraction of the series with systole below `escape_threshold`.
    pub escape_fraction: f64,
    pub escape_threshold: f64,
}

pub const ESCAPE_THRESHOLD: f64 = 0.05;
pub const DEFAULT_THRESHOLDS: [f64; 6] = [0.3, 0.5, 0.7, 0.8, 0.9, 1.0];
const BATCHES: usize = 20;

/// Birkhoff averages of `1{systole < s}`, with batch-means error bars on each half.
pub fn equidist_diagnostics(series: &[f64], thresholds: &[f64]) -> Result<EquidistReport> {
    if series.len() < 1000 {
        return invalid("diagnostics need a series of length at least 1000");
    }
    let half = series.len() / 2;
    let ind = |xs: &[f64], s: f64| -> Vec<f64> { xs.iter().map(|&x| if x < s { 1.0 } else { 0.0 }).collect() };
    let mut r = EquidistReport {
        len: series.len(),
        thresholds: thresholds.to_vec(),
        averages: vec![],
        stderr: vec![],
        first_half: vec![],
        second_half: vec![],
        first_stderr: vec![],
        second_stderr: vec![],
        split_half_stable: true,
        escape_fraction: stats::mean(&ind(series, ESCAPE_THRESHOLD)),
        escape_threshold: ESCAPE_THRESHOLD,
    };
    for &s in thresholds {
        let (a, se) = stats::batch_mean_stderr(&ind(series, s), BATCHES);
        let (a1, se1) = stats::batch_mean_stderr(&ind(&series[..half], s), BATCHES);
        let (a2, se2) = stats::batch_mean_stderr(&ind(&series[half..], s), BATCHES);
        r.averages.push(a);
        r.stderr.push(se);
        r.first_half.push(a1);
        r.second_half.push(a2);
        r.first_stderr.push(se1);
        r.second_stderr.push(se2);
        if (a1 - a2).abs() > 3.0 * (se1 * se1 + se2 * se2).sqrt() {
            r.split_half_stable = false;
        }
    }
    Ok(r)
}

/// Componentwise agreement of two reports within 3 combined standard errors.
pub fn diagnostics_agree(a: &EquidistReport, b: &EquidistReport) -> bool {
    a.thresholds == b.thresholds
        && a.averages.iter().zip(&b.averages).zip(a.stderr.iter().zip(&b.stderr)).all(|((x, y), (sx, sy))| {
            (x - y).abs() <= 3.0 * (sx * sx + sy * sy).sqrt()
        })
}

/// Systoles of `x_k = g_{b_k} ... g_{b_1} Z^2`, k = 0..len, for a one-dimensional IFS with
/// rational maps, computed exactly: `g_e` is an integer matrix up to a scalar and the
/// running basis is Lagrange-reduced in integer arithmetic.
pub fn walk_systole_series(ifs: &Ifs, word: &Word) -> Result<Vec<f64>> {
    let ex = ifs.exact_maps().ok_or_else(|| Error::Invalid("walk series needs exact one-dimensional maps".into()))?;
    // phi(x) = s x + o, so phi^{-1} ~ [[1, -o], [0, s]]; clear denominators.
    let mut gens = Vec::new();
    for e in ex {
        let l = e.slope.denom().lcm(e.offset.denom());
        let lr = BigRational::from_integer(l.clone());
        let a = l.clone();
        let b = exact::floor(&(-&e.offset * &lr));
        let d = exact::floor(&(&e.slope * &lr));
        let det = &a * &d;
        if det.is_zero() {
            return Err(Error::Singular);
        }
        gens.push(([a, b, BigInt::zero(), d], ln_abs_int(&det)));
    }
    let mut cols = [[BigInt::one(), BigInt::zero()], [BigInt::zero(), BigInt::one()]];
    let mut log_det = 0.0;
    let mut out = Vec::with_capacity(word.len() + 1);
    let norm2 = |v: &[BigInt; 2]| &v[0] * &v[0] + &v[1] * &v[1];
    let dot = |u: &[BigInt; 2], v: &[BigInt; 2]| &u[0] * &v[0] + &u[1] * &v[1];
    let record = |cols: &[[BigInt; 2]; 2], log_det: f64| 0.5 * (ln_abs_int(&norm2(&cols[0])) - log_det);
    out.push(record(&cols, 0.0).exp());
    for &s in word.forward() {
        if s >= gens.len() {
            return invalid(format!("symbol {s} outside the alphabet"));
        }
        let ([a, b, c, d], ld) = &gens[s];
        for v in cols.iter_mut() {
            let x = a * &v[0] + b * &v[1];
            let y = c * &v[0] + d * &v[1];
            *v = [x, y];
        }
        log_det += ld;
        loop {
            if norm2(&cols[0]) > norm2(&cols[1]) {
                cols.swap(0, 1);
            }
            let n0 = norm2(&cols[0]);
            let p = dot(&cols[0], &cols[1]);
            // Nearest integer to p / n0.
            let two = BigInt::from(2);
            let q: BigInt = (&two * &p + &n0).div_floor(&(&two * &n0));
            if q.is_zero() {
                break;
            }
            let [x0, y0] = cols[0].clone();
            cols[1][0] -= &q * x0;
            cols[1][1] -= &q * y0;
            if norm2(&cols[1]) >= norm2(&cols[0]) {
                break;
            }
        }
        out.push(record(&cols, log_det).exp());
    }
    Ok(out)
}

/// Walk series for a Bernoulli word drawn from the IFS weights.
pub fn sampled_walk_systoles(ifs: &Ifs, len: usize, seed: u64) -> Result<Vec<f64>> {
    let mut rng = SeedStream::new(seed).rng(0);
    let w = ifs.sample_word(len, &mut rng);
    let mut s = walk_systole_series(ifs, &w)?;
    s.truncate(len);
    Ok(s)
}
