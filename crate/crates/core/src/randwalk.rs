//! Renormalized random matrix products and the estimators built on them: Lyapunov
//! spectra on `rho_d = ∧^d Ad`, positivity of the log-growth, attraction to W, and the
//! closed-form exponents of block-triangular products.
//!
//! Walk order: the product after the word `b_1 ... b_n` is `g_{b_n} ... g_{b_1}`.

use crate::error::{invalid, Error, Result};
use crate::groups::{self, GroupElement, Representation};
use crate::ifs::{sample_symbols, Ifs};
use crate::linalg::{self, Mat, Vector};
use crate::seed::SeedStream;
use crate::stats::{self, CompensatedSum};
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

/// Anything that can multiply out a block of symbols.
pub trait ProductSource: Sync {
    fn dim(&self) -> usize;
    fn weights(&self) -> &[f64];
    /// The matrix of `g_{s_k} ... g_{s_1}` for `symbols = [s_1, ..., s_k]`.
    fn product(&self, symbols: &[usize]) -> Mat;
}

fn check_weights(weights: &[f64], count: usize) -> Result<()> {
    if weights.len() != count || count == 0 {
        return invalid("need one weight per generator");
    }
    if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) || (weights.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
        return invalid("weights must be a probability vector");
    }
    Ok(())
}

/// Finitely supported measure on square matrices.
#[derive(Debug, Clone)]
pub struct MatrixMeasure {
    matrices: Vec<Mat>,
    weights: Vec<f64>,
}

impl MatrixMeasure {
    pub fn new(matrices: Vec<Mat>, weights: Vec<f64>) -> Result<Self> {
        check_weights(&weights, matrices.len())?;
        let d = matrices[0].nrows();
        for m in &matrices {
            if m.shape() != (d, d) {
                return invalid("matrices must be square of one size");
            }
            let n = m.norm();
            if !(n.is_finite() && n > 0.0) {
                return invalid("every matrix needs a finite positive norm");
            }
        }
        Ok(Self { matrices, weights })
    }

    pub fn matrices(&self) -> &[Mat] {
        &self.matrices
    }
}

impl ProductSource for MatrixMeasure {
    fn dim(&self) -> usize {
        self.matrices[0].nrows()
    }
    fn weights(&self) -> &[f64] {
        &self.weights
    }
    fn product(&self, symbols: &[usize]) -> Mat {
        let mut p = Mat::identity(self.dim(), self.dim());
        for &s in symbols {
            p = &self.matrices[s] * p;
        }
        p
    }
}

/// Random walk on PGL_D(R) with block structure M + N.
#[derive(Debug, Clone)]
pub struct GroupWalk {
    pub gens: Vec<GroupElement>,
    pub weights: Vec<f64>,
    pub m: usize,
    pub n: usize,
}

impl GroupWalk {
    pub fn new(gens: Vec<GroupElement>, weights: Vec<f64>, m: usize, n: usize) -> Result<Self> {
        check_weights(&weights, gens.len())?;
        if gens.iter().any(|g| g.dim() != m + n) {
            return Err(Error::Dimension { expected: m + n, got: gens[0].dim() });
        }
        Ok(Self { gens, weights, m, n })
    }

    /// Generators `g_e = phi_e^{-1}` of an IFS.
    pub fn from_ifs(ifs: &Ifs) -> Result<Self> {
        let (gens, weights) = groups::ifs_generators(ifs)?;
        let (m, n) = ifs.shape();
        Self::new(gens, weights, m, n)
    }

    /// `h_i = [[c_i O_i, y_i], [0, c_i^{-d}]]` with `y_1 = 0`, `y_2, ..., y_{d+1}` spanning
    /// R^d, `c_i > 1` and `O_i` drawn from SO_d with the given seed; equal weights.
    pub fn illustrative(d: usize, seed: u64) -> Result<Self> {
        if d == 0 {
            return invalid("d must be positive");
        }
        let t = d + 1;
        let mut rng = SeedStream::new(seed).rng(0);
        let mut cs = Vec::new();
        let mut os = Vec::new();
        let mut ys = Vec::new();
        for i in 0..t {
            cs.push(1.10 + 0.05 * i as f64);
            let mut o = linalg::random_orthogonal(d, &mut rng);
            if o.determinant() < 0.0 {
                o.column_mut(0).neg_mut();
            }
            os.push(o);
            let mut y = vec![0.0; d];
            if i > 0 {
                y[i - 1] = 1.0;
                for v in y.iter_mut() {
                    *v += 0.25 * rng.gen_range(-1.0..1.0);
                }
            }
            ys.push(y);
        }
        let gens = groups::upper_block_generators(&cs, &os, &ys)?;
        Self::new(gens, vec![1.0 / t as f64; t], d, 1)
    }

    pub fn drift(&self) -> Result<f64> {
        groups::drift(&self.gens, &self.weights, self.m, self.n)
    }

    /// `gamma c_1`, the top exponent of Ad on W.
    pub fn w_exponent(&self) -> Result<f64> {
        Ok(groups::gamma(self.m, self.n) * self.drift()?)
    }

    pub fn in_rep(&self, rep: Representation) -> Result<RepWalk> {
        let single = self.gens.iter().map(|g| rep.matrix(g)).collect::<Result<Vec<_>>>()?;
        for s in &single {
            let n = s.norm();
            if !(n.is_finite() && n > 0.0) {
                return invalid("generator has zero or non-finite norm in this representation");
            }
        }
        Ok(RepWalk { walk: self.clone(), rep, single })
    }
}

/// A group walk seen through a representation. Blocks of several symbols are multiplied
/// in the group first, so the representation is evaluated once per block.
#[derive(Debug, Clone)]
pub struct RepWalk {
    pub walk: GroupWalk,
    pub rep: Representation,
    single: Vec<Mat>,
}

impl ProductSource for RepWalk {
    fn dim(&self) -> usize {
        self.single[0].nrows()
    }
    fn weights(&self) -> &[f64] {
        &self.walk.weights
    }
    fn product(&self, symbols: &[usize]) -> Mat {
        match symbols {
            [] => Mat::identity(self.dim(), self.dim()),
            [s] => self.single[*s].clone(),
            _ => {
                let mut g = GroupElement::identity(self.walk.m + self.walk.n);
                for &s in symbols {
                    g = self.walk.gens[s].mul(&g);
                }
                self.rep.matrix(&g).expect("dimension checked at construction")
            }
        }
    }
}

/// `exp(log_scale) * current` is the running product; `current` has operator norm 1.
#[derive(Debug, Clone)]
pub struct ProductLedger {
    pub current: Mat,
    log_scale: CompensatedSum,
    pub steps: usize,
}

impl ProductLedger {
    pub fn new(dim: usize) -> Self {
        Self { current: Mat::identity(dim, dim), log_scale: CompensatedSum::new(), steps: 0 }
    }

    pub fn log_scale(&self) -> f64 {
        self.log_scale.value()
    }

    /// Left-multiplies by `m` and renormalizes.
    pub fn push(&mut self, m: &Mat) {
        let p = m * &self.current;
        let s = linalg::spectral_norm(&p);
        self.current = p / s;
        self.log_scale.add(s.ln());
        self.steps += 1;
    }
}

/// Runs `n` steps of the walk with a Bernoulli word from `seed`.
pub fn product_walk(source: &dyn ProductSource, n: usize, seed: u64) -> Result<ProductLedger> {
    let mut rng = SeedStream::new(seed).rng(0);
    let word = sample_symbols(source.weights(), n, &mut rng)?;
    let mut l = ProductLedger::new(source.dim());
    for &s in word.forward() {
        l.push(&source.product(&[s]));
    }
    Ok(l)
}

#[derive(Debug, Clone, Serialize)]
pub struct LyapunovEstimate {
    /// Descending, one per dimension.
    pub exponents: Vec<f64>,
    pub stderr: Vec<f64>,
    /// Final forward frame of the first chain (columns).
    #[serde(skip)]
    pub flag_basis: Mat,
    pub steps: usize,
    pub period: usize,
    pub chains: usize,
}

impl LyapunovEstimate {
    /// Distinct exponents (merged when within `tol`) with multiplicities.
    pub fn grouped(&self, tol: f64) -> Vec<(f64, usize)> {
        let mut out: Vec<(f64, usize, f64)> = Vec::new();
        for &x in &self.exponents {
            match out.last_mut() {
                Some((_, k, first)) if (*first - x).abs() <= tol => *k += 1,
                _ => out.push((x, 1, x)),
            }
        }
        // Report the mean of each cluster.
        let mut i = 0;
        out.into_iter()
            .map(|(_, k, _)| {
                let v = stats::mean(&self.exponents[i..i + k]);
                i += k;
                (v, k)
            })
            .collect()
    }

    /// `sum_i chi_i` and its error bar: the per-exponent standard errors in quadrature plus
    /// a rounding allowance of `64 dim eps` per re-orthonormalization.
    pub fn volume_sum(&self) -> (f64, f64) {
        let s = self.exponents.iter().sum();
        let d = self.exponents.len() as f64;
        let blocks = self.steps.div_ceil(self.period) as f64;
        let rounding = 64.0 * d * f64::EPSILON * blocks / self.steps.max(1) as f64;
        let e = self.stderr.iter().map(|x| x * x).sum::<f64>().sqrt() + rounding;
        (s, e)
    }
}

pub const MIN_LYAPUNOV_STEPS: usize = 1000;

fn qr_step(m: &Mat, q: &Mat, sums: &mut [CompensatedSum]) -> Mat {
    let qr = (m * q).qr();
    let r = qr.r();
    for (i, s) in sums.iter_mut().enumerate() {
        s.add(r[(i, i)].abs().ln());
    }
    qr.q()
}

/// Uncounted leading steps, a whole number of blocks close to `n / 10`.
fn burn_in(n: usize, period: usize) -> usize {
    (n / 10).div_ceil(period) * period
}

/// Frame estimator: re-orthonormalize every `period` steps and average the log diagonal
/// of R. Independent chains give the error bars.
pub fn lyapunov_spectrum(source: &dyn ProductSource, n: usize, period: usize, chains: usize, seed: u64) -> Result<LyapunovEstimate> {
    if n < MIN_LYAPUNOV_STEPS {
        return invalid(format!("lyapunov_spectrum needs n >= {MIN_LYAPUNOV_STEPS}"));
    }
    if period == 0 || chains == 0 {
        return invalid("period and chain count must be positive");
    }
    let d = source.dim();
    let seeds = SeedStream::new(seed);
    let runs: Vec<Result<(Vec<f64>, Mat)>> = (0..chains)
        .into_par_iter()
        .map(|c| {
            let mut rng = seeds.rng(c as u64);
            let burn = burn_in(n, period);
            let word = sample_symbols(source.weights(), burn + n, &mut rng)?;
            // A random start frame avoids starting inside a proper invariant subspace; the
            // burn-in lets it settle onto the flag before anything is counted.
            let mut q = linalg::random_orthogonal(d, &mut rng);
            let mut discard = vec![CompensatedSum::new(); d];
            let (head, tail) = word.forward().split_at(burn);
            for block in head.chunks(period) {
                q = qr_step(&source.product(block), &q, &mut discard);
            }
            let mut sums = vec![CompensatedSum::new(); d];
            for block in tail.chunks(period) {
                q = qr_step(&source.product(block), &q, &mut sums);
            }
            Ok((sums.iter().map(|s| s.value() / n as f64).collect(), q))
        })
        .collect();
    let mut per_chain = Vec::with_capacity(chains);
    let mut frame = None;
    for r in runs {
        let (mut ex, q) = r?;
        // R diagonals need not come out ordered; sort each chain before averaging.
        ex.sort_by(|a, b| b.total_cmp(a));
        per_chain.push(ex);
        frame.get_or_insert(q);
    }
    let exponents: Vec<f64> = (0..d).map(|i| stats::mean(&per_chain.iter().map(|c| c[i]).collect::<Vec<_>>())).collect();
    let stderr: Vec<f64> = (0..d).map(|i| stats::stderr(&per_chain.iter().map(|c| c[i]).collect::<Vec<_>>())).collect();
    Ok(LyapunovEstimate { exponents, stderr, flag_basis: frame.unwrap(), steps: n, period, chains })
}

/// Largest block length whose product stays within a condition number of about `e^18`,
/// judged from the single-generator condition numbers.
pub fn suggested_period(source: &dyn ProductSource) -> usize {
    let k = (0..source.weights().len())
        .map(|s| {
            let sv = source.product(&[s]).singular_values();
            let (mx, mn) = sv.iter().fold((0.0f64, f64::INFINITY), |(a, b), &x| (a.max(x), b.min(x)));
            (mx / mn).ln()
        })
        .fold(0.0f64, f64::max);
    if k <= 0.0 || !k.is_finite() {
        return 1;
    }
    ((18.0 / k).floor() as usize).clamp(1, 64)
}

/// Orthonormal frame of the directions that grow slower than the top `k` under the
/// product after `n` steps: the complement of the top `k` right singular vectors.
///
/// Those are the top left singular vectors of the transposed product, found by pushing a
/// random k-frame through `g_{b_n}^T`, ..., `g_{b_1}^T` with a QR after every factor.
pub fn slow_subspace(source: &dyn ProductSource, n: usize, k: usize, seed: u64) -> Result<Mat> {
    let d = source.dim();
    if k == 0 || k >= d {
        return invalid("k must lie in 1..dimension");
    }
    let mut rng = SeedStream::new(seed).rng(0);
    let word = sample_symbols(source.weights(), n, &mut rng)?;
    let singles: Vec<Mat> = (0..source.weights().len()).map(|s| source.product(&[s]).transpose()).collect();
    let mut frame = linalg::random_orthogonal(d, &mut rng).columns(0, k).clone_owned();
    for &s in word.forward().iter().rev() {
        frame = (&singles[s] * frame).qr().q();
    }
    let filler = linalg::random_orthogonal(d, &mut rng).columns(0, d - k).clone_owned();
    let mut full = Mat::zeros(d, d);
    full.columns_mut(0, k).copy_from(&frame);
    full.columns_mut(k, d - k).copy_from(&filler);
    let q = full.qr().q();
    Ok(q.columns(k, d - k).clone_owned())
}

#[derive(Debug, Clone, Serialize)]
pub struct DirectionGrowth {
    pub label: String,
    pub mean: f64,
    pub stderr: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct PositivityReport {
    pub level: usize,
    pub steps: usize,
    pub trials: usize,
    /// Minimum over the tested directions of the mean normalized log growth.
    pub estimate: f64,
    pub stderr: f64,
    pub directions: Vec<DirectionGrowth>,
}

pub const MIN_TRIALS: usize = 30;

/// Mean of `(1/n) log(|rho_d(g) v| / |v|)` over `trials` words of length `n` for a set of
/// unit vectors: random ones, coordinate vectors of the nonpositive weight spaces, and
/// random vectors in the estimated slow subspace of an independent pilot word.
pub fn positivity_check(walk: &GroupWalk, d: usize, n: usize, trials: usize, seed: u64) -> Result<PositivityReport> {
    if trials < MIN_TRIALS {
        return invalid(format!("positivity_check needs at least {MIN_TRIALS} trials"));
    }
    if n == 0 {
        return invalid("n must be positive");
    }
    let rw = walk.in_rep(Representation::Wedge(d))?;
    let dim = rw.dim();
    let ws = groups::w_space(walk.m, walk.n, d)?;
    let seeds = SeedStream::new(seed);
    let mut rng = seeds.child(0).rng(0);
    let mut dirs: Vec<(String, Vector)> = Vec::new();
    for i in 0..8 {
        dirs.push((format!("random{i}"), linalg::random_unit(dim, &mut rng)));
    }
    let nonpos = ws.nonpositive();
    let stride = (nonpos.len() / 8).max(1);
    for &i in nonpos.iter().step_by(stride).take(8) {
        dirs.push((format!("weight_coord{i}"), Vector::from_fn(dim, |r, _| if r == i { 1.0 } else { 0.0 })));
    }
    if !ws.positive.is_empty() && ws.positive.len() < dim {
        let slow = slow_subspace(&rw, n, ws.positive.len(), seeds.child(1).root())?;
        for i in 0..8 {
            let c = linalg::random_unit(slow.ncols(), &mut rng);
            let v = &slow * c;
            let nv = v.norm();
            dirs.push((format!("slow{i}"), v / nv));
        }
    }
    let k = dirs.len();
    let vmat = Mat::from_columns(&dirs.iter().map(|(_, v)| v.clone()).collect::<Vec<_>>());
    let trial_seeds = seeds.child(2);
    let growth: Vec<Result<Vec<f64>>> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut r = trial_seeds.rng(t as u64);
            let word = sample_symbols(&walk.weights, n, &mut r)?;
            let mut v = vmat.clone();
            let mut logs = vec![CompensatedSum::new(); k];
            for &s in word.forward() {
                v = rw.product(&[s]) * v;
                for (j, l) in logs.iter_mut().enumerate() {
                    let nj = v.column(j).norm();
                    l.add(nj.ln());
                    v.column_mut(j).scale_mut(1.0 / nj);
                }
            }
            Ok(logs.iter().map(|l| l.value() / n as f64).collect())
        })
        .collect();
    let growth: Vec<Vec<f64>> = growth.into_iter().collect::<Result<_>>()?;
    let directions: Vec<DirectionGrowth> = dirs
        .iter()
        .enumerate()
        .map(|(j, (label, _))| {
            let xs: Vec<f64> = growth.iter().map(|g| g[j]).collect();
            DirectionGrowth { label: label.clone(), mean: stats::mean(&xs), stderr: stats::stderr(&xs) }
        })
        .collect();
    let worst = directions.iter().min_by(|a, b| a.mean.total_cmp(&b.mean)).unwrap();
    Ok(PositivityReport {
        level: d,
        steps: n,
        trials,
        estimate: worst.mean,
        stderr: worst.stderr,
        directions: directions.clone(),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct AttractionReport {
    pub steps: Vec<usize>,
    pub median: Vec<f64>,
    pub q10: Vec<f64>,
    pub q90: Vec<f64>,
    /// Minus the slope of log median distance against n, fitted where the median is
    /// between 1e-12 and 1e-1.
    pub decay_rate: f64,
    pub fit_range: (usize, usize),
}

/// Sine distance from `[Ad(g_{b_1^k}) v]` to `[W]` for random unit `v`, k = 0..=n.
pub fn attraction_to_w(walk: &GroupWalk, n: usize, trials: usize, seed: u64) -> Result<AttractionReport> {
    if trials < MIN_TRIALS {
        return invalid(format!("attraction_to_w needs at least {MIN_TRIALS} trials"));
    }
    let rw = walk.in_rep(Representation::Wedge(1))?;
    let dim = rw.dim();
    let w = groups::w_space(walk.m, walk.n, 1)?.positive_frame();
    let seeds = SeedStream::new(seed);
    let paths: Vec<Result<Vec<f64>>> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut r = seeds.rng(t as u64);
            let mut v = linalg::random_unit(dim, &mut r);
            let word = sample_symbols(&walk.weights, n, &mut r)?;
            let mut out = Vec::with_capacity(n + 1);
            out.push(linalg::projective_distance(&v, &w));
            for &s in word.forward() {
                v = rw.product(&[s]) * v;
                let nv = v.norm();
                v /= nv;
                out.push(linalg::projective_distance(&v, &w));
            }
            Ok(out)
        })
        .collect();
    let paths: Vec<Vec<f64>> = paths.into_iter().collect::<Result<_>>()?;
    let mut rep = AttractionReport {
        steps: (0..=n).collect(),
        median: vec![],
        q10: vec![],
        q90: vec![],
        decay_rate: 0.0,
        fit_range: (0, 0),
    };
    for k in 0..=n {
        let xs: Vec<f64> = paths.iter().map(|p| p[k]).collect();
        rep.median.push(stats::median(&xs));
        rep.q10.push(stats::quantile(&xs, 0.1));
        rep.q90.push(stats::quantile(&xs, 0.9));
    }
    let fit: Vec<usize> = (0..=n).filter(|&k| rep.median[k] < 1e-1 && rep.median[k] > 1e-12).collect();
    if fit.len() >= 2 {
        let x: Vec<f64> = fit.iter().map(|&k| k as f64).collect();
        let y: Vec<f64> = fit.iter().map(|&k| rep.median[k].ln()).collect();
        rep.decay_rate = -stats::linear_fit(&x, &y).1;
        rep.fit_range = (fit[0], *fit.last().unwrap());
    }
    Ok(rep)
}

/// One diagonal block: its size and the log-scaling `alpha_i(g)` of each generator.
#[derive(Debug, Clone, PartialEq, Serialize, serde::Deserialize)]
pub struct BlockSpec {
    pub dim: usize,
    pub log_factors: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BlockOracle {
    /// `int alpha_i dmu` repeated `dim_i` times, descending.
    pub exponents: Vec<f64>,
    /// Per block, in the given order.
    pub block_exponents: Vec<f64>,
    /// The first block's exponent exceeds every other block's.
    pub strict_gap: bool,
}

/// Exponents of a product of block upper-triangular matrices whose diagonal blocks are
/// similarities `e^{alpha_i(g)} O`.
pub fn block_exponent_oracle(blocks: &[BlockSpec], weights: &[f64]) -> Result<BlockOracle> {
    if blocks.is_empty() || blocks.iter().any(|b| b.dim == 0 || b.log_factors.len() != weights.len()) {
        return invalid("blocks need positive sizes and one log-factor per generator");
    }
    check_weights(weights, weights.len())?;
    let block_exponents: Vec<f64> =
        blocks.iter().map(|b| b.log_factors.iter().zip(weights).map(|(a, p)| a * p).sum()).collect();
    let mut exponents: Vec<f64> =
        blocks.iter().zip(&block_exponents).flat_map(|(b, &e)| std::iter::repeat(e).take(b.dim)).collect();
    exponents.sort_by(|a, b| b.total_cmp(a));
    let strict_gap = block_exponents[1..].iter().all(|&e| block_exponents[0] > e);
    Ok(BlockOracle { exponents, block_exponents, strict_gap })
}

/// Generators with diagonal blocks `e^{alpha_i(g)} O_{i,g}` (random orthogonal) and
/// Gaussian entries of size `coupling` above the diagonal blocks.
pub fn block_triangular_measure(blocks: &[BlockSpec], weights: &[f64], coupling: f64, seed: u64) -> Result<MatrixMeasure> {
    block_exponent_oracle(blocks, weights)?;
    let d: usize = blocks.iter().map(|b| b.dim).sum();
    let mut rng = SeedStream::new(seed).rng(0);
    let mut mats = Vec::new();
    for g in 0..weights.len() {
        let mut m = Mat::zeros(d, d);
        let mut off = 0;
        for b in blocks {
            let o = linalg::random_orthogonal(b.dim, &mut rng);
            m.view_mut((off, off), (b.dim, b.dim)).copy_from(&(o * b.log_factors[g].exp()));
            for r in off..off + b.dim {
                for c in off + b.dim..d {
                    m[(r, c)] = coupling * rng.sample::<f64, _>(StandardNormal);
                }
            }
            off += b.dim;
        }
        mats.push(m);
    }
    MatrixMeasure::new(mats, weights.to_vec())
}

/// Five block-triangular test measures with known exponents.
pub fn synthetic_block_samplers() -> Vec<(String, Vec<BlockSpec>, Vec<f64>)> {
    let l2 = 2f64.ln();
    let l3 = 3f64.ln();
    vec![
        (
            "two_scalar_blocks".into(),
            vec![BlockSpec { dim: 1, log_factors: vec![0.5] }, BlockSpec { dim: 1, log_factors: vec![-0.5] }],
            vec![1.0],
        ),
        (
            "similarity_2_1".into(),
            vec![
                BlockSpec { dim: 2, log_factors: vec![l2, l3] },
                BlockSpec { dim: 1, log_factors: vec![-2.0 * l2, -2.0 * l3] },
            ],
            vec![0.5, 0.5],
        ),
        (
            "three_blocks_1_2_1".into(),
            vec![
                BlockSpec { dim: 1, log_factors: vec![0.9, 0.3, 0.6] },
                BlockSpec { dim: 2, log_factors: vec![0.0, 0.2, -0.1] },
                BlockSpec { dim: 1, log_factors: vec![-0.9, -0.7, -0.2] },
            ],
            vec![0.5, 0.3, 0.2],
        ),
        (
            "blocks_3_2".into(),
            vec![
                BlockSpec { dim: 3, log_factors: vec![0.4, -0.1] },
                BlockSpec { dim: 2, log_factors: vec![-0.6, 0.15] },
            ],
            vec![0.6, 0.4],
        ),
        (
            "gap_violated_2_2_1".into(),
            vec![
                BlockSpec { dim: 2, log_factors: vec![-0.3, 0.1] },
                BlockSpec { dim: 2, log_factors: vec![0.2, 0.4] },
                BlockSpec { dim: 1, log_factors: vec![0.5, -0.5] },
            ],
            vec![0.5, 0.5],
        ),
    ]
}

/// Elementwise comparison with tolerance `max(floor, 3 stderr)`.
pub fn matches_oracle(est: &LyapunovEstimate, oracle: &BlockOracle, floor: f64) -> bool {
    est.exponents.len() == oracle.exponents.len()
        && est
            .exponents
            .iter()
            .zip(&oracle.exponents)
            .zip(&est.stderr)
            .all(|((a, b), s)| (a - b).abs() <= floor.max(3.0 * s))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ifs::cantor3;

    fn diag_walk(t: f64) -> GroupWalk {
        GroupWalk::new(vec![groups::a_t(1, 1, t)], vec![1.0], 1, 1).unwrap()
    }

    #[test]
    fn ledger_examples() {
        let rw = diag_walk(0.3).in_rep(Representation::Wedge(1)).unwrap();
        let l = product_walk(&rw, 0, 1).unwrap();
        assert_eq!(l.current, Mat::identity(3, 3));
        assert_eq!(l.log_scale(), 0.0);
        let l = product_walk(&rw, 40, 1).unwrap();
        assert!((l.log_scale() + linalg::spectral_norm(&l.current).ln() - 2.0 * 0.3 * 40.0).abs() < 1e-12);
        let cw = GroupWalk::from_ifs(&cantor3()).unwrap().in_rep(Representation::Wedge(1)).unwrap();
        let a = product_walk(&cw, 50, 9).unwrap();
        let b = product_walk(&cw, 50, 9).unwrap();
        assert_eq!(a.current, b.current);
        assert_eq!(a.log_scale(), b.log_scale());
    }

    #[test]
    fn ledger_matches_direct_product() {
        let walk = GroupWalk::illustrative(2, 4).unwrap();
        let rw = walk.in_rep(Representation::Standard).unwrap();
        let mut rng = SeedStream::new(2).rng(0);
        let word = sample_symbols(&walk.weights, 30, &mut rng).unwrap();
        let mut l = ProductLedger::new(3);
        let mut direct = Mat::identity(3, 3);
        for &s in word.forward() {
            l.push(&rw.product(&[s]));
            direct = walk.gens[s].matrix() * direct;
        }
        let rebuilt = &l.current * l.log_scale().exp();
        assert!((rebuilt - &direct).norm() <= 1e-12 * direct.norm());
    }

    #[test]
    fn diagonal_spectrum() {
        let rw = diag_walk(0.25).in_rep(Representation::Wedge(1)).unwrap();
        let e = lyapunov_spectrum(&rw, 2000, 1, 2, 3).unwrap();
        let want = [0.5, 0.0, -0.5];
        for (a, b) in e.exponents.iter().zip(want) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!(lyapunov_spectrum(&rw, 10, 1, 2, 3).is_err());
    }

    #[test]
    fn cantor_top_exponent() {
        let w = GroupWalk::from_ifs(&cantor3()).unwrap();
        assert!((w.w_exponent().unwrap() - 3f64.ln()).abs() < 1e-12);
        let rw = w.in_rep(Representation::Wedge(1)).unwrap();
        let e = lyapunov_spectrum(&rw, 4000, 1, 4, 1).unwrap();
        assert!((e.exponents[0] - 3f64.ln()).abs() < 1e-6);
        let (s, se) = e.volume_sum();
        assert!(s.abs() <= 3.0 * se + 1e-12);
    }

    #[test]
    fn grouping() {
        let e = LyapunovEstimate {
            exponents: vec![1.0, 0.999, 0.0, -1.0],
            stderr: vec![0.0; 4],
            flag_basis: Mat::zeros(1, 1),
            steps: 0,
            period: 1,
            chains: 1,
        };
        assert_eq!(e.grouped(0.01).iter().map(|g| g.1).collect::<Vec<_>>(), vec![2, 1, 1]);
    }

    #[test]
    fn oracle_examples() {
        let o = block_exponent_oracle(
            &[BlockSpec { dim: 1, log_factors: vec![0.7] }, BlockSpec { dim: 1, log_factors: vec![-0.7] }],
            &[1.0],
        )
        .unwrap();
        assert_eq!(o.exponents, vec![0.7, -0.7]);
        assert!(o.strict_gap);
        let (l2, l3) = (2f64.ln(), 3f64.ln());
        let o = block_exponent_oracle(
            &[
                BlockSpec { dim: 2, log_factors: vec![l2, l3] },
                BlockSpec { dim: 1, log_factors: vec![-2.0 * l2, -2.0 * l3] },
            ],
            &[0.5, 0.5],
        )
        .unwrap();
        let h = 6f64.ln() / 2.0;
        assert!((o.exponents[0] - h).abs() < 1e-15 && (o.exponents[1] - h).abs() < 1e-15);
        assert!((o.exponents[2] + 6f64.ln()).abs() < 1e-15);
        let o = block_exponent_oracle(
            &[BlockSpec { dim: 1, log_factors: vec![-1.0] }, BlockSpec { dim: 1, log_factors: vec![1.0] }],
            &[1.0],
        )
        .unwrap();
        assert!(!o.strict_gap);
        assert_eq!(o.exponents, vec![1.0, -1.0]);
    }

    #[test]
    fn positivity_examples() {
        let w = GroupWalk::from_ifs(&cantor3()).unwrap();
        let r = positivity_check(&w, 1, 200, 30, 5).unwrap();
        assert!(r.estimate - 3.0 * r.stderr >= 0.5 * 3f64.ln() - 3.0 * r.stderr, "{r:?}");
        let id = GroupWalk::new(vec![GroupElement::identity(2)], vec![1.0], 1, 1).unwrap();
        let r = positivity_check(&id, 1, 50, 30, 5).unwrap();
        assert!(r.estimate.abs() < 1e-14);
        assert!(positivity_check(&w, 1, 50, 10, 5).is_err());
    }

    #[test]
    fn w_direction_grows_at_w_exponent() {
        let t = 0.4;
        let walk = diag_walk(t);
        let rw = walk.in_rep(Representation::Wedge(1)).unwrap();
        let w = groups::w_space(1, 1, 1).unwrap().positive_frame();
        let mut v = w.column(0).clone_owned();
        let mut log = 0.0;
        let n = 100;
        for _ in 0..n {
            v = rw.product(&[0]) * v;
            let nv = v.norm();
            log += nv.ln();
            v /= nv;
        }
        assert!((log / n as f64 - walk.w_exponent().unwrap()).abs() < 1e-13);
    }

    #[test]
    fn attraction_examples() {
        let walk = GroupWalk::illustrative(1, 2).unwrap();
        let r = attraction_to_w(&walk, 200, 30, 1).unwrap();
        assert!(r.median[200] < 1e-6);
        assert!(r.median[0] > 1e-3);
        let gap = walk.w_exponent().unwrap();
        assert!((r.decay_rate - gap).abs() < 0.2 * gap, "{} vs {gap}", r.decay_rate);
    }

    #[test]
    fn synthetic_samplers_build() {
        for (name, blocks, weights) in synthetic_block_samplers() {
            let m = block_triangular_measure(&blocks, &weights, 1.0, 7).unwrap();
            let e = lyapunov_spectrum(&m, 5000, 1, 4, 7).unwrap();
            let o = block_exponent_oracle(&blocks, &weights).unwrap();
            assert!(matches_oracle(&e, &o, 5e-2), "{name}: {:?} vs {:?}", e.exponents, o.exponents);
        }
    }
}
