//! The eavesdropper. Every entry point takes public or intercepted values
//! only: `(g, h, c, c1, c2)` for the cryptosystem and `(g, h, t_A, t_B)` for
//! the key exchange. None of them compute discrete logarithms.

use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::factor_scheme::{Ciphertext, KexToken, PublicKey};
use crate::gfp::FieldElement;
use crate::matgfp::{Matrix, RowEchelon};
use crate::span::{cyclic_span_basis, express_in_span, monomial_closure_basis, TaggedBasis};

/// Draw budget for [`sample_invertible_combination`]. With `p ≥ 2n` each
/// draw fails with probability at most 1/2.
pub const DEFAULT_MAX_ATTEMPTS: u32 = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum AttackMethod {
    #[serde(rename = "span")]
    Span,
    #[serde(rename = "lindecomp")]
    Lindecomp,
    #[serde(rename = "lindecomp-kex")]
    LindecompKex,
}

impl AttackMethod {
    pub const ALL: [AttackMethod; 3] = [
        AttackMethod::Span,
        AttackMethod::Lindecomp,
        AttackMethod::LindecompKex,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            AttackMethod::Span => "span",
            AttackMethod::Lindecomp => "lindecomp",
            AttackMethod::LindecompKex => "lindecomp-kex",
        }
    }
}

impl fmt::Display for AttackMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for AttackMethod {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "span" => Ok(AttackMethod::Span),
            "lindecomp" => Ok(AttackMethod::Lindecomp),
            "kex" | "lindecomp-kex" => Ok(AttackMethod::LindecompKex),
            other => Err(Error::InvalidSpec(format!(
                "unknown attack method {other:?}"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AttackReport {
    pub method: AttackMethod,
    pub recovered: Matrix,
    /// Set once the caller compares against a known ground truth.
    pub success: Option<bool>,
    pub span_dimension: usize,
    /// Invertibility draws; zero for the deterministic methods.
    pub sampling_attempts: u32,
    pub elapsed: Duration,
}

impl AttackReport {
    pub fn verify(&mut self, truth: &Matrix) -> bool {
        let ok = self.recovered == *truth;
        self.success = Some(ok);
        ok
    }
}

/// Solutions of `f·c·h = h·f·c` with `f ∈ Lin(<g>)`.
#[derive(Debug, Clone)]
pub struct CommutationSolutionSpace {
    pub ambient: TaggedBasis,
    pub solutions: Vec<Matrix>,
}

impl CommutationSolutionSpace {
    pub fn dim(&self) -> usize {
        self.solutions.len()
    }

    pub fn contains(&self, m: &Matrix) -> bool {
        let mut e = RowEchelon::new(m.field(), m.raw().len());
        for s in &self.solutions {
            e.try_insert(s.raw());
        }
        m.shape() == self.ambient.g().shape() && e.contains(m.raw())
    }
}

/// Sets up the linear system in the coordinates of `f = Σ α_i g^i` and
/// returns a basis of its solutions as matrices.
pub fn solve_commutation_system(public: &PublicKey) -> Result<CommutationSolutionSpace> {
    let ambient = cyclic_span_basis(&public.g)?;
    let n = public.n();
    let field = public.field();
    let dim = ambient.dim();
    // Column i holds vec(g^i·c·h − h·g^i·c).
    let mut system = Matrix::zeros(field, n * n, dim);
    for (i, e) in ambient.elements().iter().enumerate() {
        let fc = e.mat.mul(&public.c)?;
        let residual = fc.mul(&public.h)?.sub(&public.h.mul(&fc)?)?;
        for (r, &v) in residual.raw().iter().enumerate() {
            system.set(r, i, field.elem(v as i64));
        }
    }
    let solutions = system
        .nullspace()
        .iter()
        .map(|alpha| ambient.combine(alpha))
        .collect::<Result<Vec<_>>>()?;
    if solutions.is_empty() {
        return Err(Error::EmptySolutionSpace);
    }
    Ok(CommutationSolutionSpace { ambient, solutions })
}

fn random_combination<R: Rng + ?Sized>(solutions: &[Matrix], rng: &mut R) -> Result<Matrix> {
    let first = &solutions[0];
    let field = first.field();
    let mut f = Matrix::zeros(field, first.rows(), first.cols());
    for s in solutions {
        let beta = field.elem(rng.gen_range(0..field.modulus()) as i64);
        f.add_scaled(s, beta)?;
    }
    Ok(f)
}

/// Draws `Σ β_i e_i` with i.i.d. uniform `β_i` until the result is
/// invertible. Returns the matrix and the number of draws used.
pub fn sample_invertible_combination<R: Rng + ?Sized>(
    solutions: &[Matrix],
    rng: &mut R,
    max_attempts: u32,
) -> Result<(Matrix, u32)> {
    if solutions.is_empty() {
        return Err(Error::EmptySolutionSpace);
    }
    for attempt in 1..=max_attempts {
        let f = random_combination(solutions, rng)?;
        if f.is_invertible() {
            return Ok((f, attempt));
        }
    }
    Err(Error::NoInvertibleCombination(max_attempts))
}

/// Number of invertible results among `draws` independent single draws.
pub fn count_invertible_draws<R: Rng + ?Sized>(
    solutions: &[Matrix],
    rng: &mut R,
    draws: usize,
) -> Result<usize> {
    if solutions.is_empty() {
        return Err(Error::EmptySolutionSpace);
    }
    let mut hits = 0;
    for _ in 0..draws {
        hits += usize::from(random_combination(solutions, rng)?.is_invertible());
    }
    Ok(hits)
}

pub fn span_attack_decrypt<R: Rng + ?Sized>(
    public: &PublicKey,
    ct: &Ciphertext,
    rng: &mut R,
) -> Result<AttackReport> {
    span_attack_decrypt_with(public, ct, rng, DEFAULT_MAX_ATTEMPTS)
}

/// Span-method recovery. An invertible `f` in the solution space commutes
/// with `g`, and `f·c` commutes with `h`, so `f·c1 = g^x' h^y' · f·c` and the
/// blinding factor is `(f·c1)·(f·c)⁻¹`.
pub fn span_attack_decrypt_with<R: Rng + ?Sized>(
    public: &PublicKey,
    ct: &Ciphertext,
    rng: &mut R,
    max_attempts: u32,
) -> Result<AttackReport> {
    let start = Instant::now();
    let space = solve_commutation_system(public)?;
    let (f, attempts) = sample_invertible_combination(&space.solutions, rng, max_attempts)?;
    let fc = f.mul(&public.c)?;
    let blinding = f.mul(&ct.c1)?.mul(&fc.inv()?)?;
    let recovered = blinding.inv()?.mul(&ct.c2)?;
    Ok(AttackReport {
        method: AttackMethod::Span,
        recovered,
        success: None,
        span_dimension: space.ambient.dim(),
        sampling_attempts: attempts,
        elapsed: start.elapsed(),
    })
}

/// `Σ α_i · g^u_i · middle · h^v_i` over the tags of `basis`.
fn substitute_monomials(
    basis: &TaggedBasis,
    alpha: &[FieldElement],
    middle: &Matrix,
) -> Result<Matrix> {
    let powers = |m: &Matrix, max: u32| -> Result<Vec<Matrix>> {
        let mut out = vec![Matrix::identity(m.field(), m.rows())];
        for _ in 0..max {
            let next = out.last().unwrap().mul(m)?;
            out.push(next);
        }
        Ok(out)
    };
    let gp = powers(
        basis.g(),
        basis.elements().iter().map(|e| e.u).max().unwrap_or(0),
    )?;
    let hp = powers(
        basis.h(),
        basis.elements().iter().map(|e| e.v).max().unwrap_or(0),
    )?;
    let mut acc = Matrix::zeros(middle.field(), middle.rows(), middle.cols());
    for (e, &a) in basis.elements().iter().zip(alpha) {
        if a.is_zero() {
            continue;
        }
        let term = gp[e.u as usize].mul(middle)?.mul(&hp[e.v as usize])?;
        acc.add_scaled(&term, a)?;
    }
    Ok(acc)
}

/// Linear decomposition recovery: write `c1` in the basis of
/// `Lin(<g> c <h>)` and substitute the identity for the anchor `c`.
pub fn lindecomp_attack_decrypt(public: &PublicKey, ct: &Ciphertext) -> Result<AttackReport> {
    let start = Instant::now();
    let basis = monomial_closure_basis(&public.g, &public.h, &public.c)?;
    let alpha = express_in_span(&basis, &ct.c1)?;
    let id = Matrix::identity(public.field(), public.n());
    let blinding = substitute_monomials(&basis, &alpha, &id)?;
    let recovered = blinding.inv()?.mul(&ct.c2)?;
    Ok(AttackReport {
        method: AttackMethod::Lindecomp,
        recovered,
        success: None,
        span_dimension: basis.dim(),
        sampling_attempts: 0,
        elapsed: start.elapsed(),
    })
}

/// Writes `t_A` in the basis of `Lin(<g><h>)` and pushes `t_B` through the
/// same monomials, which yields the shared key.
pub fn lindecomp_attack_kex(
    g: &Matrix,
    h: &Matrix,
    token_a: &KexToken,
    token_b: &KexToken,
) -> Result<AttackReport> {
    let start = Instant::now();
    let id = Matrix::identity(g.field(), g.rows());
    let basis = monomial_closure_basis(g, h, &id)?;
    let alpha = express_in_span(&basis, &token_a.t)?;
    let recovered = substitute_monomials(&basis, &alpha, &token_b.t)?;
    Ok(AttackReport {
        method: AttackMethod::LindecompKex,
        recovered,
        success: None,
        span_dimension: basis.dim(),
        sampling_attempts: 0,
        elapsed: start.elapsed(),
    })
}
