//! Dense linear algebra in double-double precision. Gram matrices in the
//! partition basis lose roughly a factor 20 of conditioning per level, so
//! real-parameter tables are built and factored at ~32 significant digits.

use nalgebra::DMatrix;
use twofloat::TwoFloat;

use super::algebra::DenseMatrix;

pub(crate) type Ext = TwoFloat;
pub(crate) type ExtMatrix = DenseMatrix<Ext>;

/// Unit roundoff of the double-double format.
pub(crate) const EXT_EPSILON: f64 = 4.93e-32;

pub(crate) fn ext(x: f64) -> Ext {
    Ext::from(x)
}

pub(crate) fn to_f64(x: Ext) -> f64 {
    x.hi() + x.lo()
}

pub(crate) fn transpose(a: &ExtMatrix) -> ExtMatrix {
    let mut t = ExtMatrix::zeros(a.cols, a.rows);
    for i in 0..a.rows {
        for j in 0..a.cols {
            t.set(j, i, *a.get(i, j));
        }
    }
    t
}

fn row(a: &ExtMatrix, i: usize) -> &[Ext] {
    &a.data[i * a.cols..(i + 1) * a.cols]
}

fn dot(x: &[Ext], y: &[Ext]) -> Ext {
    x.iter()
        .zip(y)
        .fold(Ext::from(0.0), |acc, (a, b)| acc + *a * *b)
}

pub(crate) fn matmul(a: &ExtMatrix, b: &ExtMatrix) -> ExtMatrix {
    let mut out = ExtMatrix::zeros(a.rows, b.cols);
    for i in 0..a.rows {
        let dst = &mut out.data[i * b.cols..(i + 1) * b.cols];
        for k in 0..a.cols {
            let aik = *a.get(i, k);
            if aik == Ext::from(0.0) {
                continue;
            }
            for (d, bkj) in dst.iter_mut().zip(row(b, k)) {
                *d += aik * *bkj;
            }
        }
    }
    out
}

/// Σ_ij A_ij B_ij.
pub(crate) fn hadamard_sum(a: &ExtMatrix, b: &ExtMatrix) -> Ext {
    dot(&a.data, &b.data)
}

pub(crate) fn trace(a: &ExtMatrix) -> Ext {
    (0..a.rows.min(a.cols)).fold(Ext::from(0.0), |acc, i| acc + *a.get(i, i))
}

/// Lower Cholesky factor of the symmetric part of `g`; `None` when a pivot
/// is not strictly positive.
pub(crate) fn cholesky(g: &ExtMatrix) -> Option<ExtMatrix> {
    let n = g.rows;
    let mut l = ExtMatrix::zeros(n, n);
    for j in 0..n {
        let lj = row(&l, j)[..j].to_vec();
        let d = *g.get(j, j) - dot(&lj, &lj);
        if !(d > Ext::from(0.0)) {
            return None;
        }
        let djj = d.sqrt();
        l.set(j, j, djj);
        for i in j + 1..n {
            let s = (*g.get(i, j) + *g.get(j, i)) * 0.5 - dot(&row(&l, i)[..j], &lj);
            l.set(i, j, s / djj);
        }
    }
    Some(l)
}

/// Solves L X = B for lower-triangular L.
pub(crate) fn lower_solve(l: &ExtMatrix, b: &ExtMatrix) -> ExtMatrix {
    let (n, m) = (b.rows, b.cols);
    let mut x = b.clone();
    for i in 0..n {
        let (done, rest) = x.data.split_at_mut(i * m);
        let xi = &mut rest[..m];
        for k in 0..i {
            let lik = *l.get(i, k);
            if lik == Ext::from(0.0) {
                continue;
            }
            for (d, v) in xi.iter_mut().zip(&done[k * m..(k + 1) * m]) {
                *d -= lik * *v;
            }
        }
        let inv = l.get(i, i).recip();
        for d in xi.iter_mut() {
            *d *= inv;
        }
    }
    x
}

/// Solves Lᵀ X = B for lower-triangular L.
pub(crate) fn lower_transpose_solve(l: &ExtMatrix, b: &ExtMatrix) -> ExtMatrix {
    let (n, m) = (b.rows, b.cols);
    let mut x = b.clone();
    for i in (0..n).rev() {
        let (head, tail) = x.data.split_at_mut((i + 1) * m);
        let xi = &mut head[i * m..];
        for k in i + 1..n {
            let lki = *l.get(k, i);
            if lki == Ext::from(0.0) {
                continue;
            }
            let off = (k - i - 1) * m;
            for (d, v) in xi.iter_mut().zip(&tail[off..off + m]) {
                *d -= lki * *v;
            }
        }
        let inv = l.get(i, i).recip();
        for d in xi.iter_mut() {
            *d *= inv;
        }
    }
    x
}

/// Solves G X = B given the Cholesky factor of G.
pub(crate) fn cholesky_solve(l: &ExtMatrix, b: &ExtMatrix) -> ExtMatrix {
    lower_transpose_solve(l, &lower_solve(l, b))
}

/// Condition number of D^{−1/2} G D^{−1/2} (D = diag G) from its Cholesky
/// factor L̂ = D^{−1/2} L: cond = (σ_max/σ_min of L̂)².
pub(crate) fn scaled_condition(l: &ExtMatrix) -> f64 {
    let n = l.rows;
    let norms: Vec<f64> = (0..n)
        .map(|i| to_f64(dot(row(l, i), row(l, i)).sqrt()))
        .collect();
    let lhat = DMatrix::from_fn(n, n, |i, j| to_f64(*l.get(i, j)) / norms[i]);
    let sv = lhat.singular_values();
    let (mx, mn) = (sv.max(), sv.min());
    if mn > 0.0 {
        (mx / mn).powi(2)
    } else {
        f64::INFINITY
    }
}

/// Inverse by Gauss-Jordan elimination with partial pivoting.
fn inverse(a: &ExtMatrix) -> Option<ExtMatrix> {
    let n = a.rows;
    let mut m = a.clone();
    let mut inv = ExtMatrix::zeros(n, n);
    for i in 0..n {
        inv.set(i, i, Ext::from(1.0));
    }
    for col in 0..n {
        let pivot = (col..n).max_by(|&x, &y| {
            m.get(x, col)
                .abs()
                .partial_cmp(&m.get(y, col).abs())
                .unwrap_or(std::cmp::Ordering::Equal)
        })?;
        if *m.get(pivot, col) == Ext::from(0.0) {
            return None;
        }
        if pivot != col {
            for j in 0..n {
                m.data.swap(pivot * n + j, col * n + j);
                inv.data.swap(pivot * n + j, col * n + j);
            }
        }
        let p = m.get(col, col).recip();
        for j in 0..n {
            m.data[col * n + j] *= p;
            inv.data[col * n + j] *= p;
        }
        for r in 0..n {
            if r == col {
                continue;
            }
            let f = *m.get(r, col);
            if f == Ext::from(0.0) {
                continue;
            }
            for j in 0..n {
                let (mv, iv) = (m.data[col * n + j], inv.data[col * n + j]);
                m.data[r * n + j] -= f * mv;
                inv.data[r * n + j] -= f * iv;
            }
        }
    }
    Some(inv)
}

fn frobenius(a: &ExtMatrix) -> Ext {
    dot(&a.data, &a.data).sqrt()
}

/// Orthogonal polar factor R of a nonsingular A = R·H (H symmetric positive
/// definite), by the scaled Newton iteration X ← (ζX + (ζX)^{−T})/2.
pub(crate) fn polar_factor(a: &ExtMatrix) -> Option<ExtMatrix> {
    let n = a.rows;
    let mut x = a.clone();
    let mut scaling = true;
    for _ in 0..100 {
        let inv_t = transpose(&inverse(&x)?);
        let zeta = if scaling {
            (frobenius(&inv_t) / frobenius(&x)).sqrt()
        } else {
            Ext::from(1.0)
        };
        let mut next = ExtMatrix::zeros(n, n);
        for k in 0..n * n {
            next.data[k] = (x.data[k] * zeta + inv_t.data[k] / zeta) * 0.5;
        }
        let mut diff = ExtMatrix::zeros(n, n);
        for k in 0..n * n {
            diff.data[k] = next.data[k] - x.data[k];
        }
        let delta = to_f64(frobenius(&diff)) / to_f64(frobenius(&next));
        x = next;
        if delta < 1e-2 {
            scaling = false;
        }
        if delta < 1e-15 {
            // quadratic convergence: one more step reaches working precision
            let inv_t = transpose(&inverse(&x)?);
            for k in 0..n * n {
                x.data[k] = (x.data[k] + inv_t.data[k]) * 0.5;
            }
            return Some(x);
        }
    }
    None
}
