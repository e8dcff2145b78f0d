//! Verma-module algebra: the action of L_n on the partition basis, Gram
//! matrices and descendant matrix elements of a primary field.

use std::collections::HashMap;
use std::ops::{Add, Div, Mul, Sub};
use std::sync::{OnceLock, RwLock};

use num_traits::{FromPrimitive, One, Zero};

use super::partition::{partitions_of, Partition};

/// Field of coefficients: f64, complex or exact rationals.
pub trait Scalar:
    Clone
    + Zero
    + One
    + FromPrimitive
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
{
}

impl<T> Scalar for T where
    T: Clone
        + Zero
        + One
        + FromPrimitive
        + Add<Output = T>
        + Sub<Output = T>
        + Mul<Output = T>
        + Div<Output = T>
{
}

fn int<T: Scalar>(v: i64) -> T {
    T::from_i64(v).expect("integer fits the scalar type")
}

/// Exact for |v| < 2^106 in double-double, and for any v in exact types.
fn wide<T: Scalar>(v: i128) -> T {
    match i64::try_from(v) {
        Ok(small) => int(small),
        Err(_) => {
            let hi = v >> 62;
            let lo = v - (hi << 62);
            wide::<T>(hi) * int::<T>(1 << 62) + int::<T>(lo as i64)
        }
    }
}

/// x + y·Δ + z·c/12 with integer x, y, z.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub(crate) struct Affine {
    x: i128,
    y: i128,
    z: i128,
}

impl Affine {
    fn scale(self, k: i128) -> Affine {
        Affine {
            x: self.x * k,
            y: self.y * k,
            z: self.z * k,
        }
    }

    fn add(&mut self, o: Affine) {
        self.x += o.x;
        self.y += o.y;
        self.z += o.z;
    }

    fn is_zero(&self) -> bool {
        self.x == 0 && self.y == 0 && self.z == 0
    }

    pub(crate) fn eval<T: Scalar>(&self, delta: &T, c12: &T) -> T {
        let mut v = wide::<T>(self.x);
        if self.y != 0 {
            v = v + wide::<T>(self.y) * delta.clone();
        }
        if self.z != 0 {
            v = v + wide::<T>(self.z) * c12.clone();
        }
        v
    }
}

type Sparse<C> = Vec<(u32, C)>;

fn accumulate<C: Copy>(acc: &mut HashMap<u32, C>, idx: u32, v: C, add: impl Fn(&mut C, C)) {
    acc.entry(idx).and_modify(|e| add(e, v)).or_insert(v);
}

/// Parameter-free structure constants of the Verma module up to some level.
pub(crate) struct Universal {
    pub(crate) bases: Vec<Vec<Partition>>,
    index: Vec<HashMap<Partition, u32>>,
    /// annihilate[level][k − 1][column]: L_k applied to a basis vector of
    /// `level`, expanded in the basis of `level − k`.
    pub(crate) annihilate: Vec<Vec<Vec<Sparse<Affine>>>>,
    create: HashMap<(u32, usize, u32), Sparse<i128>>,
}

impl Universal {
    fn new() -> Self {
        Universal {
            bases: vec![vec![Partition::empty()]],
            index: vec![HashMap::from([(Partition::empty(), 0)])],
            annihilate: vec![Vec::new()],
            create: HashMap::new(),
        }
    }

    pub(crate) fn max_level(&self) -> usize {
        self.bases.len() - 1
    }

    pub(crate) fn index_of(&self, p: &Partition) -> u32 {
        self.index[p.size()][p]
    }

    /// L_{−m} applied to basis vector `idx` of `level` (integer coefficients).
    fn create(&mut self, m: u32, level: usize, idx: u32) -> Sparse<i128> {
        if let Some(v) = self.create.get(&(m, level, idx)) {
            return v.clone();
        }
        let p = self.bases[level][idx as usize].clone();
        let out = match p.smallest() {
            Some(r) if m > r => {
                // L_{−m}L_{−r} = L_{−r}L_{−m} + (r − m)L_{−m−r}
                let rest = p.without_smallest();
                let rl = level - r as usize;
                let ri = self.index_of(&rest);
                let mut acc = HashMap::new();
                for (j, cj) in self.create(m, rl, ri) {
                    for (k, ck) in self.create(r, rl + m as usize, j) {
                        accumulate(&mut acc, k, cj * ck, |e, v| *e += v);
                    }
                }
                for (k, ck) in self.create(m + r, rl, ri) {
                    accumulate(&mut acc, k, (r as i128 - m as i128) * ck, |e, v| *e += v);
                }
                finish(acc, |v| *v == 0)
            }
            _ => vec![(self.index_of(&p.with_smallest(m)), 1)],
        };
        self.create.insert((m, level, idx), out.clone());
        out
    }

    fn grow_to(&mut self, max: usize) {
        while self.max_level() < max {
            let level = self.max_level() + 1;
            let basis = partitions_of(level);
            self.index.push(
                basis
                    .iter()
                    .enumerate()
                    .map(|(i, p)| (p.clone(), i as u32))
                    .collect(),
            );
            self.bases.push(basis);
            let mut by_k = Vec::with_capacity(level);
            for k in 1..=level as u32 {
                let cols: Vec<Sparse<Affine>> = (0..self.bases[level].len())
                    .map(|i| self.annihilate_one(k, level, i as u32))
                    .collect();
                by_k.push(cols);
            }
            self.annihilate.push(by_k);
        }
    }

    /// L_k|ν⟩ for k ≥ 1 using L_k L_{−r} = L_{−r}L_k + (k + r)L_{k−r} + δ_{k,r}(c/12)k(k²−1).
    fn annihilate_one(&mut self, k: u32, level: usize, idx: u32) -> Sparse<Affine> {
        let p = self.bases[level][idx as usize].clone();
        let r = p.smallest().expect("level >= 1");
        let rest = p.without_smallest();
        let rl = level - r as usize;
        let ri = self.index_of(&rest);
        let target = level - k as usize;
        let mut acc: HashMap<u32, Affine> = HashMap::new();
        let add = |e: &mut Affine, v: Affine| e.add(v);

        if k as usize <= rl {
            let inner = self.annihilate[rl][k as usize - 1][ri as usize].clone();
            for (j, a) in inner {
                for (t, ct) in self.create(r, rl - k as usize, j) {
                    accumulate(&mut acc, t, a.scale(ct), add);
                }
            }
        }
        let coef = (k + r) as i128;
        match k.cmp(&r) {
            std::cmp::Ordering::Greater => {
                let d = (k - r) as usize;
                if d <= rl {
                    for (j, a) in self.annihilate[rl][d - 1][ri as usize].clone() {
                        accumulate(&mut acc, j, a.scale(coef), add);
                    }
                }
            }
            std::cmp::Ordering::Equal => {
                let kk = k as i128;
                let v = Affine {
                    x: coef * rl as i128,
                    y: coef,
                    z: kk * (kk * kk - 1),
                };
                accumulate(&mut acc, ri, v, add);
            }
            std::cmp::Ordering::Less => {
                for (j, cj) in self.create(r - k, rl, ri) {
                    accumulate(
                        &mut acc,
                        j,
                        Affine {
                            x: coef * cj,
                            y: 0,
                            z: 0,
                        },
                        add,
                    );
                }
            }
        }
        debug_assert!(acc.keys().all(|&j| (j as usize) < self.bases[target].len()));
        finish(acc, |a| a.is_zero())
    }
}

fn finish<C>(acc: HashMap<u32, C>, is_zero: impl Fn(&C) -> bool) -> Sparse<C> {
    let mut v: Sparse<C> = acc.into_iter().filter(|(_, c)| !is_zero(c)).collect();
    v.sort_unstable_by_key(|(i, _)| *i);
    v
}

fn universal_cache() -> &'static RwLock<Universal> {
    static CACHE: OnceLock<RwLock<Universal>> = OnceLock::new();
    CACHE.get_or_init(|| RwLock::new(Universal::new()))
}

/// Runs `f` with the universal structure grown to at least `level`.
pub(crate) fn with_universal<R>(level: usize, f: impl FnOnce(&Universal) -> R) -> R {
    {
        let u = universal_cache().read().unwrap();
        if u.max_level() >= level {
            return f(&u);
        }
    }
    universal_cache().write().unwrap().grow_to(level);
    let u = universal_cache().read().unwrap();
    f(&u)
}

/// Dense row-major matrix over a generic scalar.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix<T> {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<T>,
}

impl<T: Scalar> DenseMatrix<T> {
    pub(crate) fn zeros(rows: usize, cols: usize) -> Self {
        DenseMatrix {
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
        }
    }

    pub fn get(&self, i: usize, j: usize) -> &T {
        &self.data[i * self.cols + j]
    }

    pub(crate) fn set(&mut self, i: usize, j: usize, v: T) {
        self.data[i * self.cols + j] = v;
    }
}

/// Gram matrices ⟨μ|ν⟩ for every level 0..=max_level, with ⟨μ| built from
/// ⟨μ⁻|L_m (m the smallest part of μ).
pub(crate) fn gram_levels<T: Scalar>(max_level: usize, delta: &T, c: &T) -> Vec<DenseMatrix<T>> {
    let c12 = c.clone() / int::<T>(12);
    with_universal(max_level, |u| {
        let mut grams: Vec<DenseMatrix<T>> = Vec::with_capacity(max_level + 1);
        let mut g0 = DenseMatrix::zeros(1, 1);
        g0.set(0, 0, T::one());
        grams.push(g0);
        for level in 1..=max_level {
            let basis = &u.bases[level];
            let dim = basis.len();
            let mut g = DenseMatrix::zeros(dim, dim);
            for (i, mu) in basis.iter().enumerate() {
                let m = mu.smallest().unwrap() as usize;
                let lower = &grams[level - m];
                let mi = u.index_of(&mu.without_smallest()) as usize;
                for j in 0..dim {
                    let mut acc = T::zero();
                    for (s, a) in &u.annihilate[level][m - 1][j] {
                        acc = acc + a.eval(delta, &c12) * lower.get(mi, *s as usize).clone();
                    }
                    g.set(i, j, acc);
                }
            }
            grams.push(g);
        }
        grams
    })
}

/// Matrix elements ⟨Δ₁, μ|V_{Δ_V}(1)|Δ₃, ν⟩ normalized by the primary one,
/// for all level pairs (a, b) with a, b ≤ max_level (and only a ≥ b when
/// `lower_only`). Entry [a][b] is a P(a) × P(b) matrix.
pub(crate) fn matrix_element_levels<T: Scalar>(
    max_level: usize,
    delta_bra: &T,
    delta_insert: &T,
    delta_ket: &T,
    c: &T,
    lower_only: bool,
) -> Vec<Vec<Option<DenseMatrix<T>>>> {
    let c12 = c.clone() / int::<T>(12);
    with_universal(max_level, |u| {
        let n = max_level;
        let mut m: Vec<Vec<Option<DenseMatrix<T>>>> = vec![vec![None; n + 1]; n + 1];
        let mut m00 = DenseMatrix::zeros(1, 1);
        m00.set(0, 0, T::one());
        m[0][0] = Some(m00);
        for a in 1..=n {
            let basis = &u.bases[a];
            let mut col = DenseMatrix::zeros(basis.len(), 1);
            for (i, mu) in basis.iter().enumerate() {
                let k = mu.smallest().unwrap() as usize;
                let ri = u.index_of(&mu.without_smallest()) as usize;
                let f = delta_bra.clone()
                    + int::<T>((a - k) as i64)
                    + int::<T>(k as i64) * delta_insert.clone()
                    - delta_ket.clone();
                let prev = m[a - k][0].as_ref().unwrap().get(ri, 0).clone();
                col.set(i, 0, f * prev);
            }
            m[a][0] = Some(col);
        }
        for b in 1..=n {
            let kets = &u.bases[b];
            let a_range = if lower_only { b..=n } else { 0..=n };
            for a in a_range {
                let bras = &u.bases[a];
                let mut out = DenseMatrix::zeros(bras.len(), kets.len());
                for (j, nu) in kets.iter().enumerate() {
                    let k = nu.smallest().unwrap() as usize;
                    let rj = u.index_of(&nu.without_smallest()) as usize;
                    let f = delta_ket.clone()
                        + int::<T>((b - k) as i64)
                        + int::<T>(k as i64) * delta_insert.clone()
                        - delta_bra.clone()
                        - int::<T>(a as i64);
                    let same = m[a][b - k].as_ref().expect("computed earlier");
                    for i in 0..bras.len() {
                        let mut acc = f.clone() * same.get(i, rj).clone();
                        if a >= k {
                            let lower = m[a - k][b - k].as_ref().expect("computed earlier");
                            for (r, coef) in &u.annihilate[a][k - 1][i] {
                                acc = acc
                                    + coef.eval(delta_bra, &c12)
                                        * lower.get(*r as usize, rj).clone();
                            }
                        }
                        out.set(i, j, acc);
                    }
                }
                m[a][b] = Some(out);
            }
        }
        m
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn structure_constants_stay_exact_in_double_double() {
        let bound = 1i128 << 100;
        with_universal(20, |u| {
            let max = u
                .annihilate
                .iter()
                .flatten()
                .flatten()
                .flatten()
                .map(|(_, a)| a.x.abs().max(a.y.abs()).max(a.z.abs()))
                .max()
                .unwrap();
            assert!(max < bound, "largest coefficient {max}");
        });
    }

    #[test]
    fn wide_integers_convert_exactly() {
        let v: i128 = (1 << 90) + 12345;
        let x: f64 = wide(v);
        assert_eq!(x, (1u128 << 90) as f64);
        let r: num_rational::BigRational = wide(v);
        assert_eq!(r, num_rational::BigRational::from_integer(v.into()));
    }
}
