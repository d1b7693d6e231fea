//! Dense linear-algebra helpers on `DMatrix<f64>`.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

pub type Mat = DMatrix<f64>;
pub type Vector = DVector<f64>;

pub fn orthogonality_error(o: &Mat) -> f64 {
    if o.nrows() != o.ncols() {
        return f64::INFINITY;
    }
    (o.transpose() * o - Mat::identity(o.nrows(), o.ncols())).amax()
}

pub fn is_orthogonal(o: &Mat, tol: f64) -> bool {
    orthogonality_error(o) <= tol
}

pub fn rotation2(theta: f64) -> Mat {
    let (s, c) = theta.sin_cos();
    Mat::from_row_slice(2, 2, &[c, -s, s, c])
}

/// Haar-random orthogonal matrix (QR of a Gaussian matrix with sign correction).
pub fn random_orthogonal<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Mat {
    let g = Mat::from_fn(n, n, |_, _| rng.sample::<f64, _>(StandardNormal));
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..n {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    q
}

pub fn random_unit<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vector {
    loop {
        let v = Vector::from_fn(n, |_, _| rng.sample::<f64, _>(StandardNormal));
        let nv = v.norm();
        if nv > 1e-12 {
            return v / nv;
        }
    }
}

pub fn block_diag(a: &Mat, b: &Mat) -> Mat {
    let (m, n) = (a.nrows(), b.nrows());
    let mut out = Mat::zeros(m + n, m + n);
    out.view_mut((0, 0), (m, m)).copy_from(a);
    out.view_mut((m, m), (n, n)).copy_from(b);
    out
}

pub fn spectral_norm(a: &Mat) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    a.clone().svd(false, false).singular_values.max()
}

/// Orthonormal basis (columns) of the column span of `a`, dropping directions below `tol`
/// relative to the largest singular value.
pub fn column_span(a: &Mat, tol: f64) -> Mat {
    if a.ncols() == 0 {
        return Mat::zeros(a.nrows(), 0);
    }
    let svd = a.clone().svd(true, false);
    let u = svd.u.unwrap();
    let smax = svd.singular_values.max();
    let keep: Vec<usize> =
        (0..svd.singular_values.len()).filter(|&i| svd.singular_values[i] > tol * smax.max(1e-300)).collect();
    Mat::from_fn(a.nrows(), keep.len(), |r, c| u[(r, keep[c])])
}

pub fn rank(a: &Mat, tol: f64) -> usize {
    column_span(a, tol).ncols()
}

/// Cosines of the principal angles between the spans of two orthonormal frames, descending.
pub fn principal_cosines(q1: &Mat, q2: &Mat) -> Vec<f64> {
    if q1.ncols() == 0 || q2.ncols() == 0 {
        return vec![];
    }
    let m = q1.transpose() * q2;
    let mut s: Vec<f64> = m.svd(false, false).singular_values.iter().map(|x| x.min(1.0)).collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Smallest principal angle (radians) between two subspaces given by orthonormal frames.
pub fn min_principal_angle(q1: &Mat, q2: &Mat) -> f64 {
    principal_cosines(q1, q2).first().map(|c| c.acos()).unwrap_or(std::f64::consts::FRAC_PI_2)
}

/// Sine of the angle between the line `[v]` and the subspace spanned by orthonormal `q`.
pub fn projective_distance(v: &Vector, q: &Mat) -> f64 {
    let nv = v.norm();
    if nv == 0.0 {
        return 0.0;
    }
    let proj = q * (q.transpose() * v);
    ((v - proj).norm() / nv).min(1.0)
}

/// Binomial coefficient as usize (small arguments only).
pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut r: usize = 1;
    for i in 0..k {
        r = r * (n - i) / (i + 1);
    }
    r
}

/// All k-subsets of 0..n in lexicographic order.
pub fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::with_capacity(binomial(n, k));
    let mut cur: Vec<usize> = (0..k).collect();
    if k > n {
        return out;
    }
    loop {
        out.push(cur.clone());
        let mut i = k;
        while i > 0 && cur[i - 1] == i - 1 + n - k {
            i -= 1;
        }
        if i == 0 {
            return out;
        }
        cur[i - 1] += 1;
        for j in i..k {
            cur[j] = cur[j - 1] + 1;
        }
    }
}

/// Determinant by Gaussian elimination with partial pivoting, for small dense blocks.
pub fn small_det(a: &mut [f64], n: usize) -> f64 {
    let mut det = 1.0;
    for c in 0..n {
        let mut p = c;
        for r in c + 1..n {
            if a[r * n + c].abs() > a[p * n + c].abs() {
                p = r;
            }
        }
        let pv = a[p * n + c];
        if pv == 0.0 {
            return 0.0;
        }
        if p != c {
            for j in 0..n {
                a.swap(c * n + j, p * n + j);
            }
            det = -det;
        }
        det *= pv;
        for r in c + 1..n {
            let f = a[r * n + c] / pv;
            if f != 0.0 {
                for j in c..n {
                    a[r * n + j] -= f * a[c * n + j];
                }
            }
        }
    }
    det
}
