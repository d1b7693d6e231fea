//! The block group P = AKU in PGL_D(R), D = M + N, and its representations on the
//! traceless matrices V and their exterior powers.
//!
//! Conventions. `a_t = diag(e^{t/M} I_M, e^{-t/N} I_N)`, `u_alpha = [[I, -alpha], [0, I]]`,
//! `k = O1 ⊕ O2`. P acts on M x N matrices by `rho(g)(alpha) = (A alpha + B) C^{-1}` for
//! `g = [[A, B], [0, C]]`, which is the identification `alpha <-> u_{-alpha} AK` of
//! P/AK with the matrix space. Under it `rho(u_delta)` is translation by `-delta`,
//! `rho(a_t)` is scaling by `e^{t/M + t/N}` and `rho(O1 ⊕ O2)(alpha) = O1 alpha O2^{-1}`.

use crate::error::{invalid, Error, Result};
use crate::ifs::{AlgebraicSimilarity, Ifs};
use crate::linalg::{self, Mat};
use itertools_free::product_words;
use serde::Serialize;

/// Element of PGL_D(R), stored with |det| = 1.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupElement {
    matrix: Mat,
}

impl GroupElement {
    pub fn new(m: Mat) -> Result<Self> {
        if m.nrows() != m.ncols() || m.nrows() == 0 {
            return invalid("group elements are nonempty square matrices");
        }
        let det = m.determinant();
        if det == 0.0 || !det.is_finite() {
            return Err(Error::Singular);
        }
        let s = det.abs().powf(-1.0 / m.nrows() as f64);
        Ok(Self { matrix: m * s })
    }

    pub fn identity(d: usize) -> Self {
        Self { matrix: Mat::identity(d, d) }
    }

    pub fn matrix(&self) -> &Mat {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn mul(&self, o: &GroupElement) -> GroupElement {
        GroupElement::new(&self.matrix * &o.matrix).expect("product of invertible elements")
    }

    pub fn inverse(&self) -> GroupElement {
        let inv = self.matrix.clone().lu().try_inverse().expect("stored elements are invertible");
        GroupElement::new(inv).expect("inverse is invertible")
    }

    /// Relative distance up to the global sign of the representative.
    pub fn distance(&self, o: &GroupElement) -> f64 {
        let n = self.matrix.norm().max(o.matrix.norm());
        let a = (&self.matrix - &o.matrix).norm();
        let b = (&self.matrix + &o.matrix).norm();
        a.min(b) / n
    }

    pub fn approx_eq(&self, o: &GroupElement, tol: f64) -> bool {
        self.distance(o) <= tol
    }
}

pub fn gamma(m: usize, n: usize) -> f64 {
    1.0 / m as f64 + 1.0 / n as f64
}

pub fn a_t(m: usize, n: usize, t: f64) -> GroupElement {
    let mut g = Mat::zeros(m + n, m + n);
    for i in 0..m {
        g[(i, i)] = (t / m as f64).exp();
    }
    for i in m..m + n {
        g[(i, i)] = (-t / n as f64).exp();
    }
    GroupElement { matrix: g }
}

pub fn u_alpha(alpha: &Mat) -> GroupElement {
    let (m, n) = alpha.shape();
    let mut g = Mat::identity(m + n, m + n);
    g.view_mut((0, m), (m, n)).copy_from(&(-alpha));
    GroupElement { matrix: g }
}

pub fn k_elem(o1: &Mat, o2: &Mat) -> GroupElement {
    GroupElement { matrix: linalg::block_diag(o1, o2) }
}

/// Action of `g` on M x N matrices.
pub fn act(g: &GroupElement, alpha: &Mat) -> Result<Mat> {
    let (m, n) = alpha.shape();
    if g.dim() != m + n {
        return Err(Error::Dimension { expected: g.dim(), got: m + n });
    }
    let x = g.matrix();
    let a = x.view((0, 0), (m, m));
    let b = x.view((0, m), (m, n));
    let c = x.view((m, m), (n, n)).clone_owned();
    let cinv = c.try_inverse().ok_or(Error::Singular)?;
    Ok((a * alpha + b) * cinv)
}

/// The element of P acting on M x N matrices as `alpha -> lambda beta alpha gamma + delta`,
/// namely `u_{-delta} a_t (beta ⊕ gamma^T)` with `e^{t(1/M + 1/N)} = lambda`.
pub fn similarity_to_group(map: &AlgebraicSimilarity, m: usize, n: usize) -> Result<GroupElement> {
    if map.shape() != (m, n) {
        return Err(Error::Dimension { expected: m * n, got: map.shape().0 * map.shape().1 });
    }
    let t = map.ratio.ln() / gamma(m, n);
    let top = (t / m as f64).exp();
    let bot = (-t / n as f64).exp();
    let mut g = Mat::zeros(m + n, m + n);
    g.view_mut((0, 0), (m, m)).copy_from(&(&map.left * top));
    g.view_mut((0, m), (m, n)).copy_from(&(&map.translation * map.right.transpose() * bot));
    g.view_mut((m, m), (n, n)).copy_from(&(map.right.transpose() * bot));
    GroupElement::new(g)
}

/// Walk generators `g_e = phi_e^{-1}` of an IFS, with its weights.
pub fn ifs_generators(ifs: &Ifs) -> Result<(Vec<GroupElement>, Vec<f64>)> {
    let (m, n) = ifs.shape();
    let gens = ifs.maps().iter().map(|f| similarity_to_group(f, m, n).map(|g| g.inverse())).collect::<Result<_>>()?;
    Ok((gens, ifs.weights().to_vec()))
}

/// Generators `[[c_i O_i, y_i], [0, c_i^{-d}]]` acting on column vectors of length d.
pub fn upper_block_generators(cs: &[f64], os: &[Mat], ys: &[Vec<f64>]) -> Result<Vec<GroupElement>> {
    if cs.len() != os.len() || cs.len() != ys.len() {
        return invalid("mismatched generator data");
    }
    let mut out = Vec::new();
    for ((&c, o), y) in cs.iter().zip(os).zip(ys) {
        let d = o.nrows();
        if y.len() != d || !linalg::is_orthogonal(o, 1e-12) || !(c > 0.0) {
            return invalid("each generator needs c > 0, orthogonal O and |y| = d");
        }
        let mut g = Mat::zeros(d + 1, d + 1);
        g.view_mut((0, 0), (d, d)).copy_from(&(o * c));
        for i in 0..d {
            g[(i, d)] = y[i];
        }
        g[(d, d)] = c.powi(-(d as i32));
        out.push(GroupElement::new(g)?);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct AkuDecomposition {
    pub t: f64,
    pub k: Mat,
    pub alpha: Mat,
}

impl AkuDecomposition {
    pub fn compose(&self) -> GroupElement {
        let (m, n) = self.alpha.shape();
        let o1 = self.k.view((0, 0), (m, m)).clone_owned();
        let o2 = self.k.view((m, m), (n, n)).clone_owned();
        a_t(m, n, self.t).mul(&k_elem(&o1, &o2)).mul(&u_alpha(&self.alpha))
    }
}

/// Tolerance for the lower-left block and the scaled orthogonality of the diagonal blocks.
pub const BLOCK_TOL: f64 = 1e-9;

/// `g = a_t k u_alpha`.
pub fn aku_decompose(g: &GroupElement, m: usize, n: usize) -> Result<AkuDecomposition> {
    if g.dim() != m + n {
        return Err(Error::Dimension { expected: m + n, got: g.dim() });
    }
    let x = g.matrix();
    let scale = x.norm();
    let lower = x.view((m, 0), (n, m)).amax() / scale;
    if lower > BLOCK_TOL {
        return Err(Error::NotInBlockForm { residual: lower });
    }
    let a = x.view((0, 0), (m, m)).clone_owned();
    let b = x.view((0, m), (m, n)).clone_owned();
    let c = x.view((m, m), (n, n)).clone_owned();
    let sa = (a.norm_squared() / m as f64).sqrt();
    let sc = (c.norm_squared() / n as f64).sqrt();
    let o1 = &a / sa;
    let o2 = &c / sc;
    let err = linalg::orthogonality_error(&o1).max(linalg::orthogonality_error(&o2));
    if err > BLOCK_TOL.sqrt() * 1e-1 {
        return Err(Error::NotInBlockForm { residual: err });
    }
    let t = (sa / sc).ln() / gamma(m, n);
    let alpha = -(o1.transpose() * &b) / sa;
    Ok(AkuDecomposition { t, k: linalg::block_diag(&o1, &o2), alpha })
}

/// `theta_1(g) = t` in `g = a_t k u`.
pub fn theta1(g: &GroupElement, m: usize, n: usize) -> Result<f64> {
    aku_decompose(g, m, n).map(|d| d.t)
}

/// `c_1 = sum_e mu(e) theta_1(g_e)`.
pub fn drift(gens: &[GroupElement], weights: &[f64], m: usize, n: usize) -> Result<f64> {
    let mut c = 0.0;
    for (g, w) in gens.iter().zip(weights) {
        c += w * theta1(g, m, n)?;
    }
    Ok(c)
}

/// Basis of the traceless D x D matrices, orthonormal for the Frobenius inner product:
/// the off-diagonal units `E_ij` in lexicographic (i, j) order, then
/// `H_k = (E_11 + ... + E_kk - k E_{k+1,k+1}) / sqrt(k(k+1))` for `k = 1..D-1`.
pub fn lie_basis(d: usize) -> Vec<Mat> {
    let mut out = Vec::with_capacity(d * d - 1);
    for i in 0..d {
        for j in 0..d {
            if i != j {
                let mut e = Mat::zeros(d, d);
                e[(i, j)] = 1.0;
                out.push(e);
            }
        }
    }
    for k in 1..d {
        let mut h = Mat::zeros(d, d);
        let s = ((k * (k + 1)) as f64).sqrt();
        for i in 0..k {
            h[(i, i)] = 1.0 / s;
        }
        h[(k, k)] = -(k as f64) / s;
        out.push(h);
    }
    out
}

fn coords(x: &Mat, d: usize) -> Vec<f64> {
    let mut v = Vec::with_capacity(d * d - 1);
    for i in 0..d {
        for j in 0..d {
            if i != j {
                v.push(x[(i, j)]);
            }
        }
    }
    for k in 1..d {
        let s = ((k * (k + 1)) as f64).sqrt();
        let tr: f64 = (0..k).map(|i| x[(i, i)]).sum();
        v.push((tr - k as f64 * x[(k, k)]) / s);
    }
    v
}

/// `Ad(g): v -> g v g^{-1}` in the basis of [`lie_basis`].
pub fn adjoint_rep(g: &GroupElement) -> Mat {
    let d = g.dim();
    let gi = g.inverse();
    let basis = lie_basis(d);
    let dim = d * d - 1;
    let mut out = Mat::zeros(dim, dim);
    for (c, e) in basis.iter().enumerate() {
        let img = g.matrix() * e * gi.matrix();
        for (r, x) in coords(&img, d).into_iter().enumerate() {
            out[(r, c)] = x;
        }
    }
    out
}

/// Largest exterior-power dimension we are willing to materialize.
pub const MAX_WEDGE_DIM: usize = 20_000;

/// `∧^d A`: entries are the d x d minors `det A[I, J]`, subsets in lexicographic order.
pub fn exterior_power_rep(a: &Mat, d: usize) -> Result<Mat> {
    let n = a.nrows();
    if d == 0 || d > n {
        return invalid(format!("wedge level {d} out of range 1..={n}"));
    }
    let dim = linalg::binomial(n, d);
    if dim > MAX_WEDGE_DIM {
        return invalid(format!("exterior power of dimension {dim} is too large"));
    }
    let subs = linalg::subsets(n, d);
    let mut out = Mat::zeros(dim, dim);
    let mut buf = vec![0.0; d * d];
    for (r, rows) in subs.iter().enumerate() {
        for (c, cols) in subs.iter().enumerate() {
            for (i, &ri) in rows.iter().enumerate() {
                for (j, &cj) in cols.iter().enumerate() {
                    buf[i * d + j] = a[(ri, cj)];
                }
            }
            out[(r, c)] = linalg::small_det(&mut buf, d);
        }
    }
    Ok(out)
}

/// Representations of G used by the walk.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Representation {
    /// The defining action on R^D.
    Standard,
    /// `rho_d = ∧^d Ad`; level 1 is Ad itself.
    Wedge(usize),
}

impl Representation {
    pub fn dimension(&self, group_dim: usize) -> usize {
        match self {
            Representation::Standard => group_dim,
            Representation::Wedge(d) => linalg::binomial(group_dim * group_dim - 1, *d),
        }
    }

    pub fn matrix(&self, g: &GroupElement) -> Result<Mat> {
        match self {
            Representation::Standard => Ok(g.matrix().clone()),
            Representation::Wedge(1) => Ok(adjoint_rep(g)),
            Representation::Wedge(d) => exterior_power_rep(&adjoint_rep(g), *d),
        }
    }
}

/// Integer weights of the basis of V under the generator of A, in units of 1/(MN).
pub fn lie_weights(m: usize, n: usize) -> Vec<i64> {
    let d = m + n;
    let w = |i: usize| if i < m { n as i64 } else { -(m as i64) };
    let mut out = Vec::with_capacity(d * d - 1);
    for i in 0..d {
        for j in 0..d {
            if i != j {
                out.push(w(i) - w(j));
            }
        }
    }
    out.extend(std::iter::repeat(0).take(d - 1));
    out
}

/// Eigenspace decomposition of the A-action on V^∧d, computed from index sets.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeightSpaceBasis {
    pub level: usize,
    pub dimension: usize,
    /// Eigenvalue of each wedge-basis vector, in units of 1/(MN).
    pub weights: Vec<i64>,
    /// Distinct eigenvalues (as reals) with the basis indices spanning each eigenspace, descending.
    pub eigenspaces: Vec<(f64, Vec<usize>)>,
    /// Basis indices spanning W^∧d (positive eigenvalues).
    pub positive: Vec<usize>,
}

impl WeightSpaceBasis {
    /// Orthonormal frame (columns) of W^∧d.
    pub fn positive_frame(&self) -> Mat {
        Mat::from_fn(self.dimension, self.positive.len(), |r, c| if self.positive[c] == r { 1.0 } else { 0.0 })
    }

    pub fn nonpositive(&self) -> Vec<usize> {
        (0..self.dimension).filter(|i| !self.positive.contains(i)).collect()
    }
}

pub fn w_space(m: usize, n: usize, d: usize) -> Result<WeightSpaceBasis> {
    if m == 0 || n == 0 {
        return invalid("M and N must be positive");
    }
    let base = lie_weights(m, n);
    let dim_v = base.len();
    if d == 0 || d > dim_v {
        return invalid(format!("wedge level {d} out of range 1..={dim_v}"));
    }
    let dimension = linalg::binomial(dim_v, d);
    if dimension > MAX_WEDGE_DIM {
        return invalid(format!("exterior power of dimension {dimension} is too large"));
    }
    let weights: Vec<i64> = linalg::subsets(dim_v, d).iter().map(|s| s.iter().map(|&i| base[i]).sum()).collect();
    let mut distinct: Vec<i64> = weights.clone();
    distinct.sort_unstable_by(|a, b| b.cmp(a));
    distinct.dedup();
    let unit = (m * n) as f64;
    let eigenspaces = distinct
        .iter()
        .map(|&w| (w as f64 / unit, (0..dimension).filter(|&i| weights[i] == w).collect()))
        .collect();
    let positive = (0..dimension).filter(|&i| weights[i] > 0).collect();
    Ok(WeightSpaceBasis { level: d, dimension, weights, eigenspaces, positive })
}

mod itertools_free {
    /// All words of length exactly `len` over `0..k`, in lexicographic order.
    pub fn product_words(k: usize, len: usize) -> Vec<Vec<usize>> {
        let mut out = vec![vec![]];
        for _ in 0..len {
            let mut next = Vec::with_capacity(out.len() * k);
            for w in &out {
                for s in 0..k {
                    let mut v = w.clone();
                    v.push(s);
                    next.push(v);
                }
            }
            out = next;
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BlockFormReport {
    pub decomposes: bool,
    pub drift: f64,
    pub drift_positive: bool,
    pub translation_rank: usize,
    pub has_pure_scaling: bool,
    /// Heuristic stand-in for the density condition; never a proof.
    pub density_proxy: bool,
    pub max_product_length: usize,
}

/// Checks the block-form hypotheses on a weighted generator set.
pub fn verify_block_form(
    gens: &[GroupElement],
    weights: &[f64],
    m: usize,
    n: usize,
    max_len: usize,
) -> Result<BlockFormReport> {
    if gens.is_empty() {
        return invalid("empty generator set");
    }
    if weights.len() != gens.len() {
        return Err(Error::Dimension { expected: gens.len(), got: weights.len() });
    }
    for g in gens {
        aku_decompose(g, m, n)?;
    }
    let c1 = drift(gens, weights, m, n)?;
    let mut alphas: Vec<Vec<f64>> = Vec::new();
    let mut has_pure = false;
    let max_words = 5000;
    'outer: for len in 1..=max_len {
        for w in product_words(gens.len(), len) {
            if alphas.len() >= max_words {
                break 'outer;
            }
            let mut g = GroupElement::identity(m + n);
            for &s in &w {
                g = gens[s].mul(&g);
            }
            let dec = aku_decompose(&g, m, n)?;
            let scale = 1.0 + dec.alpha.norm();
            if dec.alpha.norm() <= 1e-9 * scale && dec.t.abs() > 1e-9 {
                has_pure = true;
            }
            alphas.push(dec.alpha.as_slice().to_vec());
        }
    }
    let mat = Mat::from_fn(m * n, alphas.len(), |r, c| alphas[c][r]);
    let translation_rank = if mat.amax() == 0.0 { 0 } else { linalg::rank(&mat, 1e-9) };
    Ok(BlockFormReport {
        decomposes: true,
        drift: c1,
        drift_positive: c1 > 0.0,
        translation_rank,
        has_pure_scaling: has_pure,
        density_proxy: translation_rank == m * n && has_pure,
        max_product_length: max_len,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ifs::{cantor3, AlgebraicSimilarity};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_p(m: usize, n: usize, rng: &mut ChaCha8Rng) -> GroupElement {
        let t: f64 = rng.gen_range(-1.0..1.0);
        let o1 = linalg::random_orthogonal(m, rng);
        let o2 = linalg::random_orthogonal(n, rng);
        let al = Mat::from_fn(m, n, |_, _| rng.gen_range(-1.0..1.0));
        a_t(m, n, t).mul(&k_elem(&o1, &o2)).mul(&u_alpha(&al))
    }

    fn random_g(d: usize, rng: &mut ChaCha8Rng) -> GroupElement {
        GroupElement::new(Mat::from_fn(d, d, |_, _| rng.gen_range(-1.0..1.0))).unwrap()
    }

    #[test]
    fn action_conventions() {
        let x = Mat::from_element(1, 1, 0.7);
        let d = Mat::from_element(1, 1, 0.25);
        // u_delta translates by -delta.
        assert!((act(&u_alpha(&d), &x).unwrap()[(0, 0)] - 0.45).abs() < 1e-15);
        let t = 0.3;
        assert!((act(&a_t(1, 1, t), &x).unwrap()[(0, 0)] - 0.7 * (2.0 * t).exp()).abs() < 1e-14);
    }

    #[test]
    fn similarity_to_group_examples() {
        let id = Mat::identity(1, 1);
        let scale = AlgebraicSimilarity::new(3.0, id.clone(), id.clone(), Mat::zeros(1, 1)).unwrap();
        let g = similarity_to_group(&scale, 1, 1).unwrap();
        assert!(g.approx_eq(&a_t(1, 1, 3f64.ln() / 2.0), 1e-14));
        let tr = AlgebraicSimilarity::new(1.0, id.clone(), id.clone(), Mat::from_element(1, 1, 0.4)).unwrap();
        let g = similarity_to_group(&tr, 1, 1).unwrap();
        assert!(g.approx_eq(&u_alpha(&Mat::from_element(1, 1, -0.4)), 1e-15));
        // Cantor phi_1 = x/3: the walk generator g_1 = phi_1^{-1} has t = (log 3)/2.
        let (gens, _) = ifs_generators(&cantor3()).unwrap();
        let dec = aku_decompose(&gens[0], 1, 1).unwrap();
        assert!((dec.t - 3f64.ln() / 2.0).abs() < 1e-14);
        assert!(dec.alpha.amax() < 1e-15);
        assert!((dec.k - Mat::identity(2, 2)).amax() < 1e-14);
    }

    #[test]
    fn similarity_action_matches_map() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for &(m, n) in &[(1, 1), (2, 1), (1, 2), (2, 3)] {
            let f = AlgebraicSimilarity::new(
                0.37,
                linalg::random_orthogonal(m, &mut rng),
                linalg::random_orthogonal(n, &mut rng),
                Mat::from_fn(m, n, |_, _| rng.gen_range(-1.0..1.0)),
            )
            .unwrap();
            let g = similarity_to_group(&f, m, n).unwrap();
            let x = Mat::from_fn(m, n, |_, _| rng.gen_range(-1.0..1.0));
            assert!((act(&g, &x).unwrap() - f.evaluate(&x).unwrap()).amax() < 1e-13);
            // Decomposition recovers t, k = beta ⊕ gamma^T and alpha = -lambda^{-1} beta^T delta gamma^T.
            let dec = aku_decompose(&g, m, n).unwrap();
            assert!((dec.t * gamma(m, n) - 0.37f64.ln()).abs() < 1e-12);
            assert!((&dec.k - linalg::block_diag(&f.left, &f.right.transpose())).amax() < 1e-12);
            let alpha = -(f.left.transpose() * &f.translation * f.right.transpose()) / 0.37;
            assert!((&dec.alpha - alpha).amax() < 1e-12);
            // Composition corresponds to products.
            let h = f.compose(&f);
            let gh = similarity_to_group(&h, m, n).unwrap();
            assert!(gh.approx_eq(&g.mul(&g), 1e-12));
        }
    }

    #[test]
    fn aku_roundtrip_and_rejection() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let dec = aku_decompose(&GroupElement::identity(3), 2, 1).unwrap();
        assert!(dec.t.abs() < 1e-15 && dec.alpha.amax() < 1e-15);
        let al = Mat::from_row_slice(2, 1, &[0.5, -1.5]);
        let g = a_t(2, 1, 1.0).mul(&u_alpha(&al));
        let dec = aku_decompose(&g, 2, 1).unwrap();
        assert!((dec.t - 1.0).abs() < 1e-14 && (&dec.alpha - &al).amax() < 1e-14);
        for _ in 0..20 {
            let g = random_p(2, 2, &mut rng);
            let dec = aku_decompose(&g, 2, 2).unwrap();
            assert!(dec.compose().approx_eq(&g, 1e-9));
        }
        let bad = random_g(3, &mut rng);
        assert!(matches!(aku_decompose(&bad, 2, 1), Err(Error::NotInBlockForm { .. })));
    }

    #[test]
    fn adjoint_examples() {
        let ad = adjoint_rep(&GroupElement::identity(3));
        assert!((ad - Mat::identity(8, 8)).amax() < 1e-15);
        let t = 0.4;
        let ad = adjoint_rep(&a_t(1, 1, t));
        // Basis order E12, E21, H.
        assert!((ad[(0, 0)] - (2.0 * t).exp()).abs() < 1e-14);
        assert!((ad[(1, 1)] - (-2.0 * t).exp()).abs() < 1e-14);
        assert!((ad[(2, 2)] - 1.0).abs() < 1e-14);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let g = random_g(3, &mut rng);
        let h = random_g(3, &mut rng);
        let lhs = adjoint_rep(&g.mul(&h));
        let rhs = adjoint_rep(&g) * adjoint_rep(&h);
        assert!((lhs - &rhs).amax() < 1e-9 * rhs.amax());
    }

    #[test]
    fn lie_basis_is_orthonormal() {
        let b = lie_basis(4);
        for (i, x) in b.iter().enumerate() {
            assert!(x.trace().abs() < 1e-15);
            for (j, y) in b.iter().enumerate() {
                let ip = x.component_mul(y).sum();
                assert!((ip - if i == j { 1.0 } else { 0.0 }).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn exterior_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let a = Mat::from_fn(4, 4, |_, _| rng.gen_range(-1.0..1.0));
        let top = exterior_power_rep(&a, 4).unwrap();
        assert!((top[(0, 0)] - a.determinant()).abs() < 1e-12);
        assert!((exterior_power_rep(&Mat::identity(5, 5), 2).unwrap() - Mat::identity(10, 10)).amax() < 1e-15);
        let diag = Mat::from_diagonal(&nalgebra::DVector::from_vec(vec![2.0, 3.0, 5.0, 7.0]));
        let w = exterior_power_rep(&diag, 2).unwrap();
        let subs = linalg::subsets(4, 2);
        let vals = [2.0, 3.0, 5.0, 7.0];
        for (i, s) in subs.iter().enumerate() {
            assert!((w[(i, i)] - vals[s[0]] * vals[s[1]]).abs() < 1e-12);
        }
        assert!(exterior_power_rep(&a, 0).is_err() && exterior_power_rep(&a, 5).is_err());
        let b = Mat::from_fn(4, 4, |_, _| rng.gen_range(-1.0..1.0));
        let lhs = exterior_power_rep(&(&a * &b), 2).unwrap();
        let rhs = exterior_power_rep(&a, 2).unwrap() * exterior_power_rep(&b, 2).unwrap();
        assert!((lhs - &rhs).amax() < 1e-12 * rhs.amax().max(1.0));
    }

    #[test]
    fn weight_spaces() {
        let w = w_space(1, 1, 1).unwrap();
        assert_eq!(w.positive, vec![0]);
        assert_eq!(w.eigenspaces[0].0, 2.0);
        let w = w_space(1, 1, 3).unwrap();
        assert_eq!(w.eigenspaces.len(), 1);
        assert_eq!(w.eigenspaces[0].0, 0.0);
        for &(m, n) in &[(1, 1), (2, 1), (1, 2), (2, 2), (3, 1)] {
            let dv = (m + n) * (m + n) - 1;
            for d in 1..dv.min(4) {
                let ws = w_space(m, n, d).unwrap();
                let total: usize = ws.eigenspaces.iter().map(|e| e.1.len()).sum();
                assert_eq!(total, ws.dimension);
                assert_eq!(ws.positive.len() + ws.nonpositive().len(), ws.dimension);
            }
            let w1 = w_space(m, n, 1).unwrap();
            assert_eq!(w1.positive.len(), m * n);
            assert!((w1.eigenspaces[0].0 - gamma(m, n)).abs() < 1e-15);
        }
    }

    #[test]
    fn weights_match_numeric_eigenvalues() {
        // A numeric check of the combinatorial weights: Ad(a_t) is diagonal with entries e^{t w}.
        for &(m, n) in &[(2, 1), (2, 2)] {
            let t = 0.3;
            let ad = adjoint_rep(&a_t(m, n, t));
            let ws = lie_weights(m, n);
            for (i, &w) in ws.iter().enumerate() {
                let expect = (t * w as f64 / (m * n) as f64).exp();
                assert!((ad[(i, i)] - expect).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn w_invariant_and_similarity() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for &(m, n) in &[(1, 1), (2, 1), (1, 2)] {
            for d in 1..=2 {
                let ws = w_space(m, n, d).unwrap();
                let pw = ws.positive_frame();
                for _ in 0..5 {
                    let g = random_p(m, n, &mut rng);
                    let r = Representation::Wedge(d).matrix(&g).unwrap();
                    let img = &r * &pw;
                    let leak = &img - &pw * (pw.transpose() * &img);
                    assert!(leak.amax() <= 1e-8 * r.amax());
                    if d == 1 {
                        let t = theta1(&g, m, n).unwrap();
                        let sv = (pw.transpose() * &img).svd(false, false).singular_values;
                        let f = (gamma(m, n) * t).exp();
                        for s in sv.iter() {
                            assert!((s / f - 1.0).abs() < 1e-8);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn w_invariance_is_exact_for_block_elements() {
        // The W -> V/W block of Ad(g) should be exactly zero for P elements.
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let g = random_p(1, 1, &mut rng);
        let ad = adjoint_rep(&g);
        let ws = w_space(1, 1, 1).unwrap();
        for &c in &ws.positive {
            for r in ws.nonpositive() {
                assert_eq!(ad[(r, c)], 0.0);
            }
        }
    }

    #[test]
    fn block_form_reports() {
        let c = [2.0, 1.5, 1.8];
        let o = vec![linalg::rotation2(0.3), linalg::rotation2(1.1), linalg::rotation2(-0.7)];
        let y = vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]];
        let gens = upper_block_generators(&c, &o, &y).unwrap();
        let w = vec![1.0 / 3.0; 3];
        let rep = verify_block_form(&gens, &w, 2, 1, 3).unwrap();
        assert!(rep.decomposes && rep.drift_positive && rep.density_proxy);
        let expect: f64 = c.iter().map(|x: &f64| 2.0 * x.ln()).sum::<f64>() / 3.0;
        assert!((rep.drift - expect).abs() < 1e-12);
        let tr = vec![u_alpha(&Mat::from_element(1, 1, 1.0))];
        let rep = verify_block_form(&tr, &[1.0], 1, 1, 3).unwrap();
        assert!(!rep.drift_positive);
        let sc = vec![a_t(1, 1, 1.0)];
        let rep = verify_block_form(&sc, &[1.0], 1, 1, 3).unwrap();
        assert_eq!(rep.translation_rank, 0);
        assert!(!rep.density_proxy);
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        assert!(verify_block_form(&[random_g(2, &mut rng)], &[1.0], 1, 1, 2).is_err());
    }
}
