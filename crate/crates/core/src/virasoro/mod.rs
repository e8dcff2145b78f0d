//! Young diagrams, the Verma module at central charge c, Gram
//! (Shapovalov) matrices, descendant matrix elements of a primary field and
//! the conformal-block series assembled from them.
//!
//! When every weight and the central charge are real (the spectrum line with
//! real insertion charges) tables are built and factored in double-double
//! arithmetic; otherwise in complex f64.

mod algebra;
mod extended;
mod partition;

use nalgebra::{DMatrix, SymmetricEigen};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{LiouvilleError, Result};
use crate::numerics::ComplexValue;
use crate::specialfn::{partition_counts, LiouvilleParams};

pub use algebra::{DenseMatrix, Scalar};
pub use partition::{partitions_of, Partition};

use extended::{ext, to_f64, Ext, ExtMatrix, EXT_EPSILON};

type CMatrix = DMatrix<ComplexValue>;

fn c(re: f64, im: f64) -> ComplexValue {
    ComplexValue::new(re, im)
}

/// Largest admissible condition number of the Jacobi-scaled Gram matrix for
/// complex f64 arithmetic.
pub const MAX_GRAM_CONDITION: f64 = 1e12;

/// The same accuracy floor for double-double arithmetic: the condition
/// bound scaled by the ratio of unit roundoffs.
pub const MAX_GRAM_CONDITION_EXTENDED: f64 =
    MAX_GRAM_CONDITION * (f64::EPSILON / 2.0) / EXT_EPSILON;

/// Default truncation level of block series.
pub const DEFAULT_TRUNCATION: usize = 12;

/// Gram matrix ⟨ν|ν′⟩ of the descendants at one level.
#[derive(Debug, Clone, PartialEq)]
pub struct GramMatrix<T = ComplexValue> {
    pub level: usize,
    pub basis: Vec<Partition>,
    pub entries: DenseMatrix<T>,
    extended: Option<ExtMatrix>,
}

impl<T: Scalar> GramMatrix<T> {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn get(&self, i: usize, j: usize) -> &T {
        self.entries.get(i, j)
    }
}

impl GramMatrix<ComplexValue> {
    fn to_dmatrix(&self) -> CMatrix {
        let n = self.dim();
        CMatrix::from_fn(n, n, |i, j| *self.get(i, j))
    }

    /// Whether a double-double copy of the entries is attached.
    pub fn is_extended(&self) -> bool {
        self.extended.is_some()
    }
}

fn bases(max_level: usize) -> Vec<Vec<Partition>> {
    (0..=max_level).map(partitions_of).collect()
}

fn is_real(z: ComplexValue) -> bool {
    z.im == 0.0
}

fn ext_to_complex(m: &ExtMatrix) -> DenseMatrix<ComplexValue> {
    DenseMatrix {
        rows: m.rows,
        cols: m.cols,
        data: m.data.iter().map(|&x| c(to_f64(x), 0.0)).collect(),
    }
}

fn ext_to_cmatrix(m: &ExtMatrix) -> CMatrix {
    CMatrix::from_fn(m.rows, m.cols, |i, j| c(to_f64(*m.get(i, j)), 0.0))
}

/// Gram matrices for every level 0..=max_level over any scalar field.
pub fn gram_matrices_generic<T: Scalar>(max_level: usize, delta: T, c: T) -> Vec<GramMatrix<T>> {
    algebra::gram_levels(max_level, &delta, &c)
        .into_iter()
        .zip(bases(max_level))
        .enumerate()
        .map(|(level, (entries, basis))| GramMatrix {
            level,
            basis,
            entries,
            extended: None,
        })
        .collect()
}

/// Gram matrices for every level 0..=max_level.
pub fn gram_matrices(max_level: usize, delta: ComplexValue, c: ComplexValue) -> Vec<GramMatrix> {
    if is_real(delta) && is_real(c) {
        algebra::gram_levels(max_level, &ext(delta.re), &ext(c.re))
            .into_iter()
            .zip(bases(max_level))
            .enumerate()
            .map(|(level, (m, basis))| GramMatrix {
                level,
                basis,
                entries: ext_to_complex(&m),
                extended: Some(m),
            })
            .collect()
    } else {
        gram_matrices_generic(max_level, delta, c)
    }
}

/// Gram matrix at level `n`, basis in [`partitions_of`] order.
pub fn gram_matrix(n: usize, delta: ComplexValue, c: ComplexValue) -> GramMatrix {
    gram_matrices(n, delta, c).pop().expect("level n present")
}

fn singular(level: usize, condition: f64) -> LiouvilleError {
    LiouvilleError::SingularGram { level, condition }
}

/// Condition number of the Jacobi-scaled Gram matrix D^{−1/2}GD^{−1/2}.
pub fn gram_condition(gram: &GramMatrix) -> Result<f64> {
    match &gram.extended {
        Some(g) => {
            let l = extended::cholesky(g).ok_or_else(|| singular(gram.level, f64::INFINITY))?;
            Ok(extended::scaled_condition(&l))
        }
        None => scaled_condition(&gram.to_dmatrix(), gram.level),
    }
}

/// ⟨Δ_bra, ν|V_{Δ_insert}(1)|Δ_ket, ν̃⟩ normalized by the primary element,
/// over any scalar field. Entry [a][b] is the P(a) × P(b) matrix of level
/// pair (a, b).
pub fn matrix_elements_generic<T: Scalar>(
    max_level: usize,
    delta_bra: T,
    delta_insert: T,
    delta_ket: T,
    c: T,
) -> Vec<Vec<DenseMatrix<T>>> {
    algebra::matrix_element_levels(max_level, &delta_bra, &delta_insert, &delta_ket, &c, false)
        .into_iter()
        .map(|row| row.into_iter().map(|m| m.expect("full table")).collect())
        .collect()
}

/// ⟨Δ, ν|V_{Δ_insert}(1)|Δ, ν̃⟩ / ⟨Δ|V_{Δ_insert}(1)|Δ⟩.
pub fn one_point_matrix_element(
    nu: &Partition,
    nu_tilde: &Partition,
    delta_insert: ComplexValue,
    delta_spec: ComplexValue,
    c: ComplexValue,
) -> ComplexValue {
    let level = nu.size().max(nu_tilde.size());
    let table =
        algebra::matrix_element_levels(level, &delta_spec, &delta_insert, &delta_spec, &c, false);
    let i = partitions_of(nu.size())
        .iter()
        .position(|p| p == nu)
        .expect("valid partition");
    let j = partitions_of(nu_tilde.size())
        .iter()
        .position(|p| p == nu_tilde)
        .expect("valid partition");
    *table[nu.size()][nu_tilde.size()]
        .as_ref()
        .expect("full table")
        .get(i, j)
}

/// Whether block coefficients are the raw matrix elements w or the
/// Gram-orthonormalized W.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    RawW,
    OrthonormalizedW,
}

type Table<M> = Vec<Vec<Option<M>>>;

/// Descendant matrix elements for all level pairs up to `max_level`.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockCoefficients {
    pub max_level: usize,
    pub normalization: Normalization,
    pub delta_insert: ComplexValue,
    pub delta_bra: ComplexValue,
    pub delta_ket: ComplexValue,
    pub c: ComplexValue,
    /// blocks[a][b]: P(a) × P(b) matrix, absent for pairs not computed.
    blocks: Table<CMatrix>,
    extended: Option<Table<ExtMatrix>>,
}

fn ext_element_table(
    n: usize,
    delta_insert: f64,
    delta_bra: f64,
    delta_ket: f64,
    c: f64,
    lower_only: bool,
) -> Table<ExtMatrix> {
    algebra::matrix_element_levels(
        n,
        &ext(delta_bra),
        &ext(delta_insert),
        &ext(delta_ket),
        &ext(c),
        lower_only,
    )
}

fn map_table<A, B>(t: &Table<A>, f: impl Fn(&A) -> B) -> Table<B> {
    t.iter()
        .map(|row| row.iter().map(|m| m.as_ref().map(&f)).collect())
        .collect()
}

impl BlockCoefficients {
    /// Raw elements ⟨Δ_bra, ν|V(1)|Δ_ket, ν̃⟩ for all level pairs, or only
    /// those with |ν| ≥ |ν̃| when `lower_only` is set.
    pub fn raw(
        max_level: usize,
        delta_insert: ComplexValue,
        delta_bra: ComplexValue,
        delta_ket: ComplexValue,
        c: ComplexValue,
        lower_only: bool,
    ) -> Self {
        let real = [delta_insert, delta_bra, delta_ket, c]
            .into_iter()
            .all(is_real);
        let (blocks, extended) = if real {
            let t = ext_element_table(
                max_level,
                delta_insert.re,
                delta_bra.re,
                delta_ket.re,
                c.re,
                lower_only,
            );
            (map_table(&t, ext_to_cmatrix), Some(t))
        } else {
            let t = algebra::matrix_element_levels(
                max_level,
                &delta_bra,
                &delta_insert,
                &delta_ket,
                &c,
                lower_only,
            );
            (
                map_table(&t, |m| CMatrix::from_row_slice(m.rows, m.cols, &m.data)),
                None,
            )
        };
        BlockCoefficients {
            max_level,
            normalization: Normalization::RawW,
            delta_insert,
            delta_bra,
            delta_ket,
            c,
            blocks,
            extended,
        }
    }

    /// The level-pair matrix, if computed.
    pub fn block(&self, bra_level: usize, ket_level: usize) -> Option<&CMatrix> {
        self.blocks.get(bra_level)?.get(ket_level)?.as_ref()
    }

    /// Entry for a pair of diagrams.
    pub fn get(&self, nu: &Partition, nu_tilde: &Partition) -> Option<ComplexValue> {
        let m = self.block(nu.size(), nu_tilde.size())?;
        let i = partitions_of(nu.size()).iter().position(|p| p == nu)?;
        let j = partitions_of(nu_tilde.size())
            .iter()
            .position(|p| p == nu_tilde)?;
        Some(m[(i, j)])
    }

    /// JSON export: level pairs with complex entries as [re, im].
    pub fn to_json(&self) -> Value {
        let mut pairs = Vec::new();
        for (a, row) in self.blocks.iter().enumerate() {
            for (b, m) in row.iter().enumerate() {
                if let Some(m) = m {
                    let rows: Vec<Vec<[f64; 2]>> = (0..m.nrows())
                        .map(|i| {
                            (0..m.ncols())
                                .map(|j| [m[(i, j)].re, m[(i, j)].im])
                                .collect()
                        })
                        .collect();
                    pairs.push(json!({"bra_level": a, "ket_level": b, "entries": rows}));
                }
            }
        }
        json!({
            "max_level": self.max_level,
            "normalization": self.normalization,
            "delta_insert": [self.delta_insert.re, self.delta_insert.im],
            "delta_bra": [self.delta_bra.re, self.delta_bra.im],
            "delta_ket": [self.delta_ket.re, self.delta_ket.im],
            "c": [self.c.re, self.c.im],
            "basis": bases(self.max_level),
            "blocks": pairs,
        })
    }
}

/// Condition number of the Jacobi-scaled matrix (f64).
fn scaled_condition(g: &CMatrix, level: usize) -> Result<f64> {
    let n = g.nrows();
    let d: Vec<f64> = (0..n).map(|i| g[(i, i)].norm().sqrt()).collect();
    if d.iter().any(|&x| !(x > 0.0) || !x.is_finite()) {
        return Err(singular(level, f64::INFINITY));
    }
    let scaled = CMatrix::from_fn(n, n, |i, j| g[(i, j)] / (d[i] * d[j]));
    let sv = scaled.singular_values();
    let (mx, mn) = (sv.max(), sv.min());
    if !(mn > 0.0) {
        return Err(singular(level, f64::INFINITY));
    }
    Ok(mx / mn)
}

/// G^{−1/2} in complex f64.
fn inverse_sqrt(gram: &GramMatrix) -> Result<CMatrix> {
    let level = gram.level;
    let g = gram.to_dmatrix();
    let cond = scaled_condition(&g, level)?;
    if cond > MAX_GRAM_CONDITION {
        return Err(singular(level, cond));
    }
    if g.iter().all(|z| z.im == 0.0) {
        Ok(real_inverse_sqrt(&g.map(|z| z.re), level, cond)?.map(|x| c(x, 0.0)))
    } else {
        complex_inverse_sqrt(&g, level, cond)
    }
}

/// Symmetric G^{−1/2} from the Cholesky factor of the Jacobi-scaled
/// matrix: with Lᵀ = UΣVᵀ, G^{−1/2} = VΣ^{−1}Vᵀ.
fn real_inverse_sqrt(g: &DMatrix<f64>, level: usize, cond: f64) -> Result<DMatrix<f64>> {
    let n = g.nrows();
    let sym = (g + g.transpose()) * 0.5;
    let d: Vec<f64> = (0..n).map(|i| sym[(i, i)].sqrt()).collect();
    let scaled = DMatrix::from_fn(n, n, |i, j| sym[(i, j)] / (d[i] * d[j]));
    let chol = scaled.cholesky().ok_or_else(|| singular(level, cond))?;
    let l = DMatrix::from_fn(n, n, |i, j| chol.l()[(i, j)] * d[i]);
    let svd = l.transpose().svd(false, true);
    let vt = svd.v_t.ok_or_else(|| singular(level, cond))?;
    let inv_s = DMatrix::from_diagonal(&svd.singular_values.map(|s| 1.0 / s));
    Ok(vt.transpose() * inv_s * vt)
}

/// Principal inverse square root through the complex Schur form.
fn complex_inverse_sqrt(g: &CMatrix, level: usize, cond: f64) -> Result<CMatrix> {
    let n = g.nrows();
    let (q, t) = g.clone().schur().unpack();
    let mut r = CMatrix::zeros(n, n);
    for j in 0..n {
        r[(j, j)] = t[(j, j)].sqrt();
        for i in (0..j).rev() {
            let mut s = t[(i, j)];
            for k in i + 1..j {
                s -= r[(i, k)] * r[(k, j)];
            }
            let den = r[(i, i)] + r[(j, j)];
            if den.norm() == 0.0 {
                return Err(singular(level, cond));
            }
            r[(i, j)] = s / den;
        }
    }
    let sqrt = &q * r * q.adjoint();
    sqrt.try_inverse().ok_or_else(|| singular(level, cond))
}

/// Cholesky factor of a double-double Gram matrix, refused beyond
/// [`MAX_GRAM_CONDITION_EXTENDED`].
fn ext_factor(g: &ExtMatrix, level: usize) -> Result<ExtMatrix> {
    let l = extended::cholesky(g).ok_or_else(|| singular(level, f64::INFINITY))?;
    let cond = extended::scaled_condition(&l);
    if cond > MAX_GRAM_CONDITION_EXTENDED {
        return Err(singular(level, cond));
    }
    Ok(l)
}

fn ext_factors(grams: &[ExtMatrix]) -> Result<Vec<ExtMatrix>> {
    grams
        .par_iter()
        .enumerate()
        .map(|(level, g)| ext_factor(g, level))
        .collect()
}

/// L_a^{−1} M L_b^{−T}: the matrix elements in bases orthonormalized by
/// the Cholesky factors.
fn whiten(la: &ExtMatrix, lb: &ExtMatrix, m: &ExtMatrix) -> ExtMatrix {
    let right = extended::transpose(&extended::lower_solve(lb, &extended::transpose(m)));
    extended::lower_solve(la, &right)
}

/// W(ν, ν̃) = Σ G^{−1/2}(ν, ν′) w(ν′, ν̃′) G^{−1/2}(ν̃′, ν̃), with one Gram
/// family on both sides (bra and ket share Δ).
pub fn orthonormalize(
    w_raw: &BlockCoefficients,
    grams: &[GramMatrix],
) -> Result<BlockCoefficients> {
    orthonormalize_pair(w_raw, grams, grams)
}

/// As [`orthonormalize`] with separate Gram families for bra and ket.
pub fn orthonormalize_pair(
    w_raw: &BlockCoefficients,
    bra_grams: &[GramMatrix],
    ket_grams: &[GramMatrix],
) -> Result<BlockCoefficients> {
    if w_raw.normalization != Normalization::RawW {
        return Err(LiouvilleError::domain(
            "coefficients are already orthonormalized",
        ));
    }
    let need = w_raw.max_level + 1;
    if bra_grams.len() < need || ket_grams.len() < need {
        return Err(LiouvilleError::domain(format!(
            "need Gram matrices for levels 0..={}",
            w_raw.max_level
        )));
    }
    let same = std::ptr::eq(bra_grams, ket_grams);
    let (bra_grams, ket_grams) = (&bra_grams[..need], &ket_grams[..need]);
    let all_ext = bra_grams
        .iter()
        .chain(ket_grams)
        .all(|g| g.extended.is_some());
    match (&w_raw.extended, all_ext) {
        (Some(table), true) => {
            // G^{−1/2} = R·L^{−1} with R the orthogonal polar factor of L
            let side = |grams: &[GramMatrix]| -> Result<Vec<(ExtMatrix, ExtMatrix)>> {
                grams
                    .par_iter()
                    .map(|g| {
                        let l = ext_factor(g.extended.as_ref().unwrap(), g.level)?;
                        let r = extended::polar_factor(&l)
                            .ok_or_else(|| singular(g.level, f64::INFINITY))?;
                        Ok((l, r))
                    })
                    .collect()
            };
            let bra = side(bra_grams)?;
            let ket_owned = if same { None } else { Some(side(ket_grams)?) };
            let ket = ket_owned.as_ref().unwrap_or(&bra);
            let w: Table<ExtMatrix> = table
                .par_iter()
                .enumerate()
                .map(|(a, row)| {
                    row.iter()
                        .enumerate()
                        .map(|(b, m)| {
                            m.as_ref().map(|m| {
                                let hat = whiten(&bra[a].0, &ket[b].0, m);
                                let left = extended::matmul(&bra[a].1, &hat);
                                extended::matmul(&left, &extended::transpose(&ket[b].1))
                            })
                        })
                        .collect()
                })
                .collect();
            Ok(BlockCoefficients {
                normalization: Normalization::OrthonormalizedW,
                blocks: map_table(&w, ext_to_cmatrix),
                extended: Some(w),
                ..w_raw.clone()
            })
        }
        _ => {
            let bra: Vec<CMatrix> = bra_grams.iter().map(inverse_sqrt).collect::<Result<_>>()?;
            let ket_owned: Option<Vec<CMatrix>> = if same {
                None
            } else {
                Some(ket_grams.iter().map(inverse_sqrt).collect::<Result<_>>()?)
            };
            let ket = ket_owned.as_ref().unwrap_or(&bra);
            let blocks = w_raw
                .blocks
                .iter()
                .enumerate()
                .map(|(a, row)| {
                    row.iter()
                        .enumerate()
                        .map(|(b, m)| m.as_ref().map(|m| &bra[a] * m * ket[b].transpose()))
                        .collect()
                })
                .collect();
            Ok(BlockCoefficients {
                normalization: Normalization::OrthonormalizedW,
                blocks,
                extended: None,
                ..w_raw.clone()
            })
        }
    }
}

/// Which conformal block a series represents.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BlockKind {
    Torus1pt,
    Torus2pt,
    Annulus1pt,
    Annulus2pt,
}

impl BlockKind {
    pub fn is_two_point(self) -> bool {
        matches!(self, BlockKind::Torus2pt | BlockKind::Annulus2pt)
    }
}

/// Truncated block series. For one-point kinds `coefficients[n][0]` is the
/// coefficient of qⁿ (torus) or q²ⁿ (annulus); for two-point kinds
/// `coefficients[n][m]` multiplies q₁ⁿq₂ᵐ, with q₁ = q/(b₁b₂), q₂ = q·b₁b₂
/// on the annulus.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BlockSeries {
    pub kind: BlockKind,
    /// Weights of the inserted primaries.
    pub weights: Vec<ComplexValue>,
    /// Internal (spectrum) weights: one, or two for the torus two-point block.
    pub spectrum: Vec<ComplexValue>,
    pub central_charge: ComplexValue,
    pub truncation: usize,
    pub coefficients: Vec<Vec<ComplexValue>>,
}

fn weight_count_error(kind: BlockKind, what: &str, expected: usize, got: usize) -> LiouvilleError {
    LiouvilleError::domain(format!(
        "{kind:?} needs {expected} {what} weight(s), got {got}"
    ))
}

/// Coefficients of the requested block up to level `n`.
///
/// Torus kinds are assembled as traces Tr(G⁻¹w) and Tr(G_a⁻¹w₁G_b⁻¹w₂ᵀ)
/// through Cholesky solves; annulus kinds sum products of orthonormalized
/// entries. Those sums are invariant under orthogonal changes of the
/// orthonormal basis, so the annulus path orthonormalizes with the Cholesky
/// factor instead of the symmetric square root.
pub fn block_series(
    kind: BlockKind,
    weights: &[ComplexValue],
    spectrum: &[ComplexValue],
    central_charge: ComplexValue,
    n: usize,
) -> Result<BlockSeries> {
    let n_weights = if kind.is_two_point() { 2 } else { 1 };
    if weights.len() != n_weights {
        return Err(weight_count_error(
            kind,
            "insertion",
            n_weights,
            weights.len(),
        ));
    }
    let spectrum_ok = match kind {
        BlockKind::Torus2pt => matches!(spectrum.len(), 1 | 2),
        _ => spectrum.len() == 1,
    };
    if !spectrum_ok {
        let expected = if kind == BlockKind::Torus2pt { 2 } else { 1 };
        return Err(weight_count_error(
            kind,
            "spectrum",
            expected,
            spectrum.len(),
        ));
    }
    let real = weights.iter().chain(spectrum).all(|&z| is_real(z)) && is_real(central_charge);
    let coefficients = if real {
        let w: Vec<f64> = weights.iter().map(|z| z.re).collect();
        let s: Vec<f64> = spectrum.iter().map(|z| z.re).collect();
        real_coefficients(kind, &w, &s, central_charge.re, n)?
    } else {
        complex_coefficients(kind, weights, spectrum, central_charge, n)?
    };
    Ok(BlockSeries {
        kind,
        weights: weights.to_vec(),
        spectrum: spectrum.to_vec(),
        central_charge,
        truncation: n,
        coefficients,
    })
}

fn real_coefficients(
    kind: BlockKind,
    w: &[f64],
    s: &[f64],
    cc: f64,
    n: usize,
) -> Result<Vec<Vec<ComplexValue>>> {
    let (d1, d2) = (s[0], *s.last().unwrap());
    let ext_grams = |d: f64| algebra::gram_levels(n, &ext(d), &ext(cc));
    let real = |x: Ext| c(to_f64(x), 0.0);
    let levels: Vec<usize> = (0..=n).collect();
    Ok(match kind {
        BlockKind::Torus1pt | BlockKind::Annulus1pt => {
            let ls = ext_factors(&ext_grams(d1))?;
            let m = ext_element_table(n, w[0], d1, d1, cc, true);
            levels
                .par_iter()
                .map(|&k| {
                    let mk = m[k][k].as_ref().unwrap();
                    let t = if kind == BlockKind::Torus1pt {
                        extended::trace(&extended::cholesky_solve(&ls[k], mk))
                    } else {
                        extended::trace(&whiten(&ls[k], &ls[k], mk))
                    };
                    vec![real(t)]
                })
                .collect()
        }
        BlockKind::Torus2pt => {
            let l1 = ext_factors(&ext_grams(d1))?;
            let l2 = if d2 == d1 {
                l1.clone()
            } else {
                ext_factors(&ext_grams(d2))?
            };
            let m1 = ext_element_table(n, w[0], d1, d2, cc, false);
            let m2 = ext_element_table(n, w[1], d1, d2, cc, false);
            levels
                .par_iter()
                .map(|&a| {
                    (0..=n)
                        .map(|b| {
                            let x = extended::cholesky_solve(&l1[a], m1[a][b].as_ref().unwrap());
                            let m2t = extended::transpose(m2[a][b].as_ref().unwrap());
                            let y = extended::cholesky_solve(&l2[b], &m2t);
                            real(extended::hadamard_sum(&x, &extended::transpose(&y)))
                        })
                        .collect()
                })
                .collect()
        }
        BlockKind::Annulus2pt => {
            let ls = ext_factors(&ext_grams(d1))?;
            let m1 = ext_element_table(n, w[0], d1, d1, cc, false);
            let m2 = ext_element_table(n, w[1], d1, d1, cc, false);
            levels
                .par_iter()
                .map(|&a| {
                    (0..=n)
                        .map(|b| {
                            let x = whiten(&ls[a], &ls[b], m1[a][b].as_ref().unwrap());
                            let y = whiten(&ls[a], &ls[b], m2[a][b].as_ref().unwrap());
                            real(extended::hadamard_sum(&x, &y))
                        })
                        .collect()
                })
                .collect()
        }
    })
}

/// G⁻¹X through LU in complex f64, after the conditioning check.
fn solve(g: &GramMatrix, rhs: &CMatrix) -> Result<CMatrix> {
    let gm = g.to_dmatrix();
    let cond = scaled_condition(&gm, g.level)?;
    if cond > MAX_GRAM_CONDITION {
        return Err(singular(g.level, cond));
    }
    gm.lu().solve(rhs).ok_or_else(|| singular(g.level, cond))
}

fn complex_coefficients(
    kind: BlockKind,
    weights: &[ComplexValue],
    spectrum: &[ComplexValue],
    cc: ComplexValue,
    n: usize,
) -> Result<Vec<Vec<ComplexValue>>> {
    let (d1, d2) = (spectrum[0], *spectrum.last().unwrap());
    let grams = |d| gram_matrices_generic(n, d, cc);
    Ok(match kind {
        BlockKind::Torus1pt => {
            let g = grams(d1);
            let w = BlockCoefficients::raw(n, weights[0], d1, d1, cc, true);
            (0..=n)
                .map(|k| Ok(vec![solve(&g[k], w.block(k, k).unwrap())?.trace()]))
                .collect::<Result<_>>()?
        }
        BlockKind::Annulus1pt => {
            let w = orthonormalize(
                &BlockCoefficients::raw(n, weights[0], d1, d1, cc, true),
                &grams(d1),
            )?;
            (0..=n)
                .map(|k| vec![w.block(k, k).unwrap().trace()])
                .collect()
        }
        BlockKind::Torus2pt => {
            let g1 = grams(d1);
            let g2 = if d2 == d1 { g1.clone() } else { grams(d2) };
            let w1 = BlockCoefficients::raw(n, weights[0], d1, d2, cc, false);
            let w2 = BlockCoefficients::raw(n, weights[1], d1, d2, cc, false);
            (0..=n)
                .map(|a| {
                    (0..=n)
                        .map(|b| {
                            let left = solve(&g1[a], w1.block(a, b).unwrap())?;
                            let right = solve(&g2[b], &w2.block(a, b).unwrap().transpose())?;
                            Ok((left * right).trace())
                        })
                        .collect::<Result<Vec<_>>>()
                })
                .collect::<Result<_>>()?
        }
        BlockKind::Annulus2pt => {
            let g = grams(d1);
            let w1 = orthonormalize(
                &BlockCoefficients::raw(n, weights[0], d1, d1, cc, false),
                &g,
            )?;
            let w2 = orthonormalize(
                &BlockCoefficients::raw(n, weights[1], d1, d1, cc, false),
                &g,
            )?;
            (0..=n)
                .map(|a| {
                    (0..=n)
                        .map(|b| {
                            let (x, y) = (w1.block(a, b).unwrap(), w2.block(a, b).unwrap());
                            x.iter().zip(y.iter()).map(|(u, v)| u * v).sum()
                        })
                        .collect()
                })
                .collect()
        }
    })
}

/// Block series with insertion charges β and spectrum points Q + iP taken
/// from the couplings (c = c_L).
pub fn block_series_on_line(
    kind: BlockKind,
    betas: &[f64],
    ps: &[f64],
    params: &LiouvilleParams,
    n: usize,
) -> Result<BlockSeries> {
    let q = params.q();
    let weights: Vec<ComplexValue> = betas
        .iter()
        .map(|&b| params.weight(c(b, 0.0)).value)
        .collect();
    let spectrum: Vec<ComplexValue> = ps.iter().map(|&p| c((q * q + p * p) / 4.0, 0.0)).collect();
    block_series(kind, &weights, &spectrum, c(params.c_l(), 0.0), n)
}

/// Partial sum of a block series with a geometric tail estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BlockEvaluation {
    pub value: ComplexValue,
    /// Estimated modulus of the dropped terms (infinite when the last
    /// terms do not decay geometrically).
    pub tail_bound: f64,
    /// Set when the last three shell magnitudes do not decrease
    /// geometrically, so the tail bound is not trustworthy.
    pub tail_warning: bool,
}

/// Evaluates the series at 0 < q < 1; `b1b2` is the product b₁b₂ of the
/// boundary insertion points (ignored for one-point kinds).
pub fn evaluate_block(series: &BlockSeries, q: f64, b1b2: ComplexValue) -> Result<BlockEvaluation> {
    if !(q > 0.0 && q < 1.0) {
        return Err(LiouvilleError::domain(format!(
            "block evaluation needs 0 < q < 1, got {q}"
        )));
    }
    let n = series.truncation;
    // shells[k]: summed moduli of the terms whose largest level index is k
    let mut shells = vec![0.0f64; n + 1];
    let mut value = c(0.0, 0.0);
    if series.kind.is_two_point() {
        if b1b2.norm() == 0.0 {
            return Err(LiouvilleError::domain("b1*b2 must be nonzero"));
        }
        let (q1, q2) = (c(q, 0.0) / b1b2, b1b2 * q);
        for (a, row) in series.coefficients.iter().enumerate() {
            for (b, coef) in row.iter().enumerate() {
                let term = coef * q1.powu(a as u32) * q2.powu(b as u32);
                value += term;
                shells[a.max(b)] += term.norm();
            }
        }
    } else {
        let x = if series.kind == BlockKind::Annulus1pt {
            q * q
        } else {
            q
        };
        for (k, row) in series.coefficients.iter().enumerate() {
            let term = row[0] * x.powi(k as i32);
            value += term;
            shells[k] = term.norm();
        }
    }
    let (tail_bound, tail_warning) = geometric_tail(&shells);
    Ok(BlockEvaluation {
        value,
        tail_bound,
        tail_warning,
    })
}

fn geometric_tail(shells: &[f64]) -> (f64, bool) {
    let n = shells.len();
    if n < 3 {
        return (f64::INFINITY, true);
    }
    let (s0, s1, s2) = (shells[n - 3], shells[n - 2], shells[n - 1]);
    if s2 == 0.0 && s1 == 0.0 {
        return (0.0, false);
    }
    let r1 = if s0 > 0.0 { s1 / s0 } else { f64::INFINITY };
    let r2 = if s1 > 0.0 { s2 / s1 } else { f64::INFINITY };
    let r = r1.max(r2);
    if r < 1.0 {
        (s2 * r / (1.0 - r), false)
    } else {
        (f64::INFINITY, true)
    }
}

/// P(0..=n), the one-point coefficients expected at insertion weight 1.
pub fn degenerate_one_point_coefficients(n: usize) -> Vec<u128> {
    partition_counts(n)
}

/// Smallest eigenvalue of the symmetric part of each level-diagonal block
/// (real parts), a positivity diagnostic.
pub fn diagonal_min_eigenvalues(w: &BlockCoefficients) -> Vec<f64> {
    (0..=w.max_level)
        .filter_map(|k| w.block(k, k))
        .map(|m| {
            let h = m.map(|z| z.re);
            let sym = (&h + h.transpose()) * 0.5;
            SymmetricEigen::new(sym).eigenvalues.min()
        })
        .collect()
}
