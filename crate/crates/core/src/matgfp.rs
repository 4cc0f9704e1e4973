//! Dense matrices over `F_p`.
//!
//! Group elements are square, but the same type carries the rectangular
//! systems the attacks solve (`n²` columns for vectorized matrices), so
//! nothing here assumes squareness except where the operation needs it.

use std::fmt;

use rand::Rng;

use crate::error::{Error, Result};
use crate::gfp::{FieldElement, PrimeField};

/// Largest side length accepted for group elements.
pub const MAX_DIMENSION: usize = 64;

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    field: PrimeField,
    data: Vec<u32>,
}

/// Reduced row echelon form with pivots and the accumulated transform `T`
/// satisfying `T·A = rref`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RrefResult {
    pub rref: Matrix,
    pub pivots: Vec<usize>,
    pub transform: Matrix,
}

impl RrefResult {
    pub fn rank(&self) -> usize {
        self.pivots.len()
    }
}

impl Matrix {
    pub fn zeros(field: PrimeField, rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            field,
            data: vec![0; rows * cols],
        }
    }

    pub fn identity(field: PrimeField, n: usize) -> Self {
        let mut m = Self::zeros(field, n, n);
        let one = 1 % field.modulus();
        for i in 0..n {
            m.data[i * n + i] = one;
        }
        m
    }

    /// Builds a matrix from signed rows, reducing every entry mod `p`.
    pub fn from_rows<R: AsRef<[i64]>>(field: PrimeField, rows: &[R]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            let r = r.as_ref();
            if r.len() != cols {
                return Err(Error::DimensionMismatch {
                    left: (1, cols),
                    right: (1, r.len()),
                });
            }
            data.extend(r.iter().map(|&v| field.reduce(v)));
        }
        Ok(Self {
            rows: rows.len(),
            cols,
            field,
            data,
        })
    }

    /// Builds a matrix from row-major raw residues, all of which must be `< p`.
    pub fn from_raw(field: PrimeField, rows: usize, cols: usize, data: Vec<u32>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                left: (rows, cols),
                right: (1, data.len()),
            });
        }
        if let Some(&bad) = data.iter().find(|&&v| v >= field.modulus()) {
            return Err(Error::parse(
                "entry",
                format!("{bad} is not reduced mod {}", field.modulus()),
            ));
        }
        Ok(Self {
            rows,
            cols,
            field,
            data,
        })
    }

    pub fn random<R: Rng + ?Sized>(
        field: PrimeField,
        rows: usize,
        cols: usize,
        rng: &mut R,
    ) -> Self {
        let p = field.modulus();
        let data = (0..rows * cols).map(|_| rng.gen_range(0..p)).collect();
        Self {
            rows,
            cols,
            field,
            data,
        }
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    #[inline]
    pub fn field(&self) -> PrimeField {
        self.field
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    /// Row-major residues.
    pub fn raw(&self) -> &[u32] {
        &self.data
    }

    pub fn get(&self, i: usize, j: usize) -> FieldElement {
        self.field.elem(self.raw_at(i, j) as i64)
    }

    #[inline]
    fn raw_at(&self, i: usize, j: usize) -> u32 {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: FieldElement) {
        assert_eq!(v.field(), self.field);
        self.data[i * self.cols + j] = v.value();
    }

    pub fn row(&self, i: usize) -> &[u32] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn to_rows(&self) -> Vec<Vec<u32>> {
        self.data
            .chunks(self.cols.max(1))
            .take(self.rows)
            .map(<[u32]>::to_vec)
            .collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&v| v == 0)
    }

    fn same_field(&self, other: &Matrix) -> Result<()> {
        if self.field != other.field {
            return Err(Error::ModulusMismatch(
                self.field.modulus(),
                other.field.modulus(),
            ));
        }
        Ok(())
    }

    fn same_shape(&self, other: &Matrix) -> Result<()> {
        self.same_field(other)?;
        if self.shape() != other.shape() {
            return Err(Error::DimensionMismatch {
                left: self.shape(),
                right: other.shape(),
            });
        }
        Ok(())
    }

    pub fn mul(&self, rhs: &Matrix) -> Result<Matrix> {
        self.same_field(rhs)?;
        if self.cols != rhs.rows {
            return Err(Error::DimensionMismatch {
                left: self.shape(),
                right: rhs.shape(),
            });
        }
        let p = self.field.modulus() as u64;
        let mut out = Matrix::zeros(self.field, self.rows, rhs.cols);
        let mut acc = vec![0u64; rhs.cols];
        for i in 0..self.rows {
            acc.iter_mut().for_each(|a| *a = 0);
            for k in 0..self.cols {
                let a = self.raw_at(i, k) as u64;
                if a == 0 {
                    continue;
                }
                for (slot, &b) in acc.iter_mut().zip(rhs.row(k)) {
                    *slot = (*slot + a * b as u64) % p;
                }
            }
            for (j, &v) in acc.iter().enumerate() {
                out.data[i * rhs.cols + j] = v as u32;
            }
        }
        Ok(out)
    }

    pub fn add(&self, rhs: &Matrix) -> Result<Matrix> {
        self.same_shape(rhs)?;
        let f = self.field;
        let data = self
            .data
            .iter()
            .zip(&rhs.data)
            .map(|(&a, &b)| f.add(a, b))
            .collect();
        Ok(Matrix {
            data,
            ..self.clone()
        })
    }

    pub fn sub(&self, rhs: &Matrix) -> Result<Matrix> {
        self.same_shape(rhs)?;
        let f = self.field;
        let data = self
            .data
            .iter()
            .zip(&rhs.data)
            .map(|(&a, &b)| f.sub(a, b))
            .collect();
        Ok(Matrix {
            data,
            ..self.clone()
        })
    }

    pub fn scale(&self, s: FieldElement) -> Matrix {
        assert_eq!(s.field(), self.field);
        let f = self.field;
        let data = self.data.iter().map(|&a| f.mul(a, s.value())).collect();
        Matrix {
            data,
            ..self.clone()
        }
    }

    /// `self += s * other`, in place.
    pub fn add_scaled(&mut self, other: &Matrix, s: FieldElement) -> Result<()> {
        self.same_shape(other)?;
        let f = self.field;
        for (a, &b) in self.data.iter_mut().zip(&other.data) {
            *a = f.add(*a, f.mul(b, s.value()));
        }
        Ok(())
    }

    pub fn transpose(&self) -> Matrix {
        let mut out = Matrix::zeros(self.field, self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.data[j * self.rows + i] = self.raw_at(i, j);
            }
        }
        out
    }

    fn require_square(&self) -> Result<usize> {
        if !self.is_square() {
            return Err(Error::DimensionMismatch {
                left: self.shape(),
                right: (self.cols, self.rows),
            });
        }
        Ok(self.rows)
    }

    /// Signed power. `A^0 = I`; negative exponents go through the inverse.
    pub fn pow(&self, e: i64) -> Result<Matrix> {
        let n = self.require_square()?;
        let mut base = if e < 0 { self.inv()? } else { self.clone() };
        let mut e = e.unsigned_abs();
        let mut acc = Matrix::identity(self.field, n);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base)?;
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base)?;
            }
        }
        Ok(acc)
    }

    /// Inverse via Gauss–Jordan: the transform of a full-rank square matrix.
    pub fn inv(&self) -> Result<Matrix> {
        let n = self.require_square()?;
        let r = self.rref();
        if r.rank() < n {
            return Err(Error::SingularMatrix);
        }
        Ok(r.transform)
    }

    pub fn rank(&self) -> usize {
        let mut work = self.clone();
        eliminate(&mut work, None)
    }

    pub fn is_invertible(&self) -> bool {
        self.is_square() && self.rank() == self.rows
    }

    pub fn commutes_with(&self, other: &Matrix) -> Result<bool> {
        Ok(self.mul(other)? == other.mul(self)?)
    }

    pub fn rref(&self) -> RrefResult {
        let mut rref = self.clone();
        let mut transform = Matrix::identity(self.field, self.rows);
        let rank = eliminate(&mut rref, Some(&mut transform));
        let pivots = (0..rank)
            .map(|i| {
                rref.row(i)
                    .iter()
                    .position(|&v| v != 0)
                    .expect("pivot row is nonzero")
            })
            .collect();
        RrefResult {
            rref,
            pivots,
            transform,
        }
    }

    /// Basis of `{v : A·v = 0}`, one vector per free column.
    pub fn nullspace(&self) -> Vec<Vec<FieldElement>> {
        let r = self.rref();
        let f = self.field;
        let mut is_pivot = vec![false; self.cols];
        for &c in &r.pivots {
            is_pivot[c] = true;
        }
        (0..self.cols)
            .filter(|&j| !is_pivot[j])
            .map(|free| {
                let mut v = vec![f.zero(); self.cols];
                v[free] = f.one();
                for (i, &pc) in r.pivots.iter().enumerate() {
                    v[pc] = -r.rref.get(i, free);
                }
                v
            })
            .collect()
    }

    /// `A·v` for a column vector.
    pub fn apply(&self, v: &[FieldElement]) -> Result<Vec<FieldElement>> {
        if v.len() != self.cols {
            return Err(Error::DimensionMismatch {
                left: self.shape(),
                right: (v.len(), 1),
            });
        }
        let f = self.field;
        Ok((0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(v)
                    .fold(f.zero(), |acc, (&a, &b)| acc + f.elem(a as i64) * b)
            })
            .collect())
    }
}

/// In-place Gauss–Jordan. Pivot is the first nonzero entry scanning down the
/// column. Row operations are mirrored onto `transform` when given.
/// Returns the rank.
fn eliminate(m: &mut Matrix, mut transform: Option<&mut Matrix>) -> usize {
    let f = m.field;
    let (rows, cols) = m.shape();
    let mut rank = 0;
    for col in 0..cols {
        if rank == rows {
            break;
        }
        let Some(pr) = (rank..rows).find(|&r| m.raw_at(r, col) != 0) else {
            continue;
        };
        swap_rows(m, pr, rank);
        if let Some(t) = transform.as_deref_mut() {
            swap_rows(t, pr, rank);
        }
        let inv = f.inv(m.raw_at(rank, col)).expect("pivot is nonzero");
        scale_row(m, rank, inv);
        if let Some(t) = transform.as_deref_mut() {
            scale_row(t, rank, inv);
        }
        for r in 0..rows {
            if r == rank {
                continue;
            }
            let factor = m.raw_at(r, col);
            if factor != 0 {
                let neg = f.neg(factor);
                axpy_row(m, rank, r, neg);
                if let Some(t) = transform.as_deref_mut() {
                    axpy_row(t, rank, r, neg);
                }
            }
        }
        rank += 1;
    }
    rank
}

fn swap_rows(m: &mut Matrix, a: usize, b: usize) {
    if a != b {
        for j in 0..m.cols {
            m.data.swap(a * m.cols + j, b * m.cols + j);
        }
    }
}

fn scale_row(m: &mut Matrix, r: usize, s: u32) {
    let f = m.field;
    let cols = m.cols;
    for v in &mut m.data[r * cols..(r + 1) * cols] {
        *v = f.mul(*v, s);
    }
}

/// `row[dst] += s * row[src]`
fn axpy_row(m: &mut Matrix, src: usize, dst: usize, s: u32) {
    let f = m.field;
    let cols = m.cols;
    for j in 0..cols {
        let add = f.mul(m.data[src * cols + j], s);
        let d = &mut m.data[dst * cols + j];
        *d = f.add(*d, add);
    }
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Matrix<{}>{:?}", self.field, self.to_rows())
    }
}

impl fmt::Display for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, r) in self.to_rows().iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            let cells: Vec<String> = r.iter().map(u32::to_string).collect();
            write!(f, "[{}]", cells.join(" "))?;
        }
        Ok(())
    }
}

/// Semi-echelon row basis that grows one vector at a time.
///
/// Each stored row is zero at the pivots of every earlier row, so reducing a
/// vector against the rows in insertion order clears all pivots. Every row
/// also records its coordinates with respect to the inserted vectors, which
/// lets [`RowEchelon::express`] return coefficients over the original inputs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RowEchelon {
    field: PrimeField,
    width: usize,
    rows: Vec<EchelonRow>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct EchelonRow {
    pivot: usize,
    row: Vec<u32>,
    combo: Vec<u32>,
}

impl RowEchelon {
    pub fn new(field: PrimeField, width: usize) -> Self {
        Self {
            field,
            width,
            rows: Vec::new(),
        }
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn pivots(&self) -> impl Iterator<Item = usize> + '_ {
        self.rows.iter().map(|r| r.pivot)
    }

    /// Residual of `v` and the coefficients `c` with `v - residual = Σ c_k·input_k`.
    fn reduce(&self, v: &[u32]) -> (Vec<u32>, Vec<u32>) {
        assert_eq!(v.len(), self.width, "vector width");
        let f = self.field;
        let mut residual = v.to_vec();
        let mut combo = vec![0u32; self.rows.len()];
        for row in &self.rows {
            let coef = residual[row.pivot];
            if coef == 0 {
                continue;
            }
            let neg = f.neg(coef);
            for (r, &x) in residual.iter_mut().zip(&row.row).skip(row.pivot) {
                *r = f.add(*r, f.mul(x, neg));
            }
            for (c, &x) in combo.iter_mut().zip(&row.combo) {
                *c = f.add(*c, f.mul(x, coef));
            }
        }
        (residual, combo)
    }

    pub fn contains(&self, v: &[u32]) -> bool {
        self.reduce(v).0.iter().all(|&x| x == 0)
    }

    /// Coordinates of `v` over the inserted vectors, if `v` is in their span.
    pub fn express(&self, v: &[u32]) -> Option<Vec<FieldElement>> {
        let (residual, combo) = self.reduce(v);
        residual.iter().all(|&x| x == 0).then(|| {
            combo
                .into_iter()
                .map(|c| self.field.elem(c as i64))
                .collect()
        })
    }

    /// Appends `v` if it is independent of the current rows.
    pub fn try_insert(&mut self, v: &[u32]) -> bool {
        let f = self.field;
        let (mut residual, combo) = self.reduce(v);
        let Some(pivot) = residual.iter().position(|&x| x != 0) else {
            return false;
        };
        let inv = f.inv(residual[pivot]).expect("nonzero pivot");
        residual.iter_mut().for_each(|x| *x = f.mul(*x, inv));
        // residual = v - Σ combo_k·input_k, with v the new input.
        let mut new_combo: Vec<u32> = combo.iter().map(|&c| f.mul(f.neg(c), inv)).collect();
        new_combo.push(inv);
        for row in &mut self.rows {
            row.combo.push(0);
        }
        self.rows.push(EchelonRow {
            pivot,
            row: residual,
            combo: new_combo,
        });
        true
    }
}
