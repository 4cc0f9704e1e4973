//! Bases of the matrix subspaces the attacks work in.
//!
//! A [`TaggedBasis`] spans `Lin(<g> c <h>)`: every element is `g^u · c · h^v`
//! and remembers its `(u, v)`. The cyclic span `Lin(<g>)` is the special case
//! `c = h = I`.

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::gfp::{FieldElement, PrimeField};
use crate::matgfp::{Matrix, RowEchelon};

/// Row-major flattening of a matrix.
pub fn vectorize(m: &Matrix) -> Vec<FieldElement> {
    let f = m.field();
    m.raw().iter().map(|&v| f.elem(v as i64)).collect()
}

/// Inverse of [`vectorize`] for an `n × n` matrix.
pub fn unvectorize(field: PrimeField, n: usize, v: &[FieldElement]) -> Result<Matrix> {
    if v.iter().any(|e| e.field() != field) {
        let other = v.iter().find(|e| e.field() != field).unwrap().field();
        return Err(Error::ModulusMismatch(field.modulus(), other.modulus()));
    }
    Matrix::from_raw(field, n, n, v.iter().map(|e| e.value()).collect())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BasisElement {
    pub u: u32,
    pub v: u32,
    pub mat: Matrix,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TaggedBasis {
    g: Matrix,
    h: Matrix,
    anchor: Matrix,
    elements: Vec<BasisElement>,
    echelon: RowEchelon,
}

impl TaggedBasis {
    fn empty(g: &Matrix, h: &Matrix, anchor: &Matrix) -> Self {
        let n = g.rows();
        Self {
            g: g.clone(),
            h: h.clone(),
            anchor: anchor.clone(),
            elements: Vec::new(),
            echelon: RowEchelon::new(g.field(), n * n),
        }
    }

    fn admit(&mut self, u: u32, v: u32, mat: Matrix) -> Result<bool> {
        if !self.echelon.try_insert(mat.raw()) {
            return Ok(false);
        }
        self.elements.push(BasisElement { u, v, mat });
        let n = self.g.rows();
        if self.elements.len() > n * n {
            return Err(Error::SpanOverflow(n * n));
        }
        Ok(true)
    }

    pub fn dim(&self) -> usize {
        self.elements.len()
    }

    pub fn elements(&self) -> &[BasisElement] {
        &self.elements
    }

    pub fn g(&self) -> &Matrix {
        &self.g
    }

    pub fn h(&self) -> &Matrix {
        &self.h
    }

    pub fn anchor(&self) -> &Matrix {
        &self.anchor
    }

    pub fn field(&self) -> PrimeField {
        self.g.field()
    }

    pub fn n(&self) -> usize {
        self.g.rows()
    }

    fn check_target(&self, m: &Matrix) -> Result<()> {
        if m.field() != self.field() {
            return Err(Error::ModulusMismatch(
                self.field().modulus(),
                m.field().modulus(),
            ));
        }
        if m.shape() != self.g.shape() {
            return Err(Error::DimensionMismatch {
                left: self.g.shape(),
                right: m.shape(),
            });
        }
        Ok(())
    }

    pub fn contains(&self, m: &Matrix) -> bool {
        self.check_target(m).is_ok() && self.echelon.contains(m.raw())
    }

    /// `Σ coeffs_i · e_i`.
    pub fn combine(&self, coeffs: &[FieldElement]) -> Result<Matrix> {
        if coeffs.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                left: (self.dim(), 1),
                right: (coeffs.len(), 1),
            });
        }
        let n = self.n();
        let mut acc = Matrix::zeros(self.field(), n, n);
        for (e, &a) in self.elements.iter().zip(coeffs) {
            acc.add_scaled(&e.mat, a)?;
        }
        Ok(acc)
    }

    /// Recomputes `g^u · c · h^v` for every element and compares.
    pub fn tags_consistent(&self) -> Result<bool> {
        for e in &self.elements {
            let m = self
                .g
                .pow(e.u as i64)?
                .mul(&self.anchor)?
                .mul(&self.h.pow(e.v as i64)?)?;
            if m != e.mat {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Whether `g·e` and `e·h` stay inside the span for every basis element.
    pub fn is_closed(&self) -> Result<bool> {
        for e in &self.elements {
            if !self.contains(&self.g.mul(&e.mat)?) || !self.contains(&e.mat.mul(&self.h)?) {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

fn require_invertible(m: &Matrix) -> Result<()> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch {
            left: m.shape(),
            right: (m.cols(), m.rows()),
        });
    }
    if !m.is_invertible() {
        return Err(Error::SingularMatrix);
    }
    Ok(())
}

/// Basis `I, g, g², …, g^k` of `Lin(<g>)`, stopping at the first power that
/// is already in the span of its predecessors.
pub fn cyclic_span_basis(g: &Matrix) -> Result<TaggedBasis> {
    require_invertible(g)?;
    let id = Matrix::identity(g.field(), g.rows());
    let mut basis = TaggedBasis::empty(g, &id, &id);
    let mut power = id;
    let mut u = 0;
    while basis.admit(u, 0, power.clone())? {
        power = g.mul(&power)?;
        u += 1;
    }
    Ok(basis)
}

/// Basis of the smallest subspace containing `c` that is closed under
/// `X ↦ g·X` and `X ↦ X·h`, i.e. `Lin{g^i c h^j : i, j ∈ ℤ}`.
///
/// Breadth-first from `(0, 0, c)`; each admitted element proposes its
/// g-step before its h-step, and a proposal is admitted iff it raises the
/// rank. The order is part of the contract: it fixes the basis and hence
/// the coefficients returned by [`express_in_span`].
pub fn monomial_closure_basis(g: &Matrix, h: &Matrix, c: &Matrix) -> Result<TaggedBasis> {
    require_invertible(g)?;
    require_invertible(h)?;
    for m in [h, c] {
        if m.field() != g.field() {
            return Err(Error::ModulusMismatch(
                g.field().modulus(),
                m.field().modulus(),
            ));
        }
        if m.shape() != g.shape() {
            return Err(Error::DimensionMismatch {
                left: g.shape(),
                right: m.shape(),
            });
        }
    }
    let mut basis = TaggedBasis::empty(g, h, c);
    let mut queue = VecDeque::new();
    if basis.admit(0, 0, c.clone())? {
        queue.push_back(0usize);
    }
    while let Some(idx) = queue.pop_front() {
        let BasisElement { u, v, mat } = basis.elements[idx].clone();
        let left = g.mul(&mat)?;
        if basis.admit(u + 1, v, left)? {
            queue.push_back(basis.dim() - 1);
        }
        let right = mat.mul(h)?;
        if basis.admit(u, v + 1, right)? {
            queue.push_back(basis.dim() - 1);
        }
    }
    Ok(basis)
}

/// Coefficients `α` with `target = Σ α_i e_i`.
pub fn express_in_span(basis: &TaggedBasis, target: &Matrix) -> Result<Vec<FieldElement>> {
    basis.check_target(target)?;
    basis.echelon.express(target.raw()).ok_or(Error::NotInSpan)
}
