//! The honest parties: FACTOR composition, the ElGamal-style cryptosystem
//! and the Diffie–Hellman-style key exchange built on it.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gfp::PrimeField;
use crate::matgfp::{Matrix, MAX_DIMENSION};

/// Inclusive range that secret exponents are drawn from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExponentRange {
    pub lo: i64,
    pub hi: i64,
}

impl Default for ExponentRange {
    fn default() -> Self {
        Self { lo: 1, hi: 1 << 16 }
    }
}

impl ExponentRange {
    pub fn new(lo: i64, hi: i64) -> Result<Self> {
        if lo > hi {
            return Err(Error::InvalidSpec(format!(
                "empty exponent range [{lo}, {hi}]"
            )));
        }
        Ok(Self { lo, hi })
    }

    /// `[1, bound]`.
    pub fn up_to(bound: u64) -> Result<Self> {
        let hi = i64::try_from(bound)
            .map_err(|_| Error::InvalidSpec(format!("exponent bound {bound} too large")))?;
        Self::new(1, hi)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> i64 {
        rng.gen_range(self.lo..=self.hi)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PublicKey {
    pub g: Matrix,
    pub h: Matrix,
    /// `g^x · h^y`
    pub c: Matrix,
}

impl PublicKey {
    /// Validates a key received from outside (e.g. parsed from JSON).
    pub fn new(g: Matrix, h: Matrix, c: Matrix) -> Result<Self> {
        check_generators(&g, &h)?;
        check_compatible(&g, &c)?;
        if !c.is_invertible() {
            return Err(Error::SingularMatrix);
        }
        Ok(Self { g, h, c })
    }

    pub fn n(&self) -> usize {
        self.g.rows()
    }

    pub fn field(&self) -> PrimeField {
        self.g.field()
    }
}

/// Alice's secret. The exponents are kept for reporting; decryption only
/// needs the cached powers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrivateKey {
    pub x: i64,
    pub y: i64,
    /// `g^x`
    pub gx: Matrix,
    /// `h^y`
    pub hy: Matrix,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ciphertext {
    /// `g^(x+x') · h^(y+y')`
    pub c1: Matrix,
    /// `g^x' · h^y' · m`
    pub c2: Matrix,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Initiator,
    Responder,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KexToken {
    /// `g^x_i · h^y_i`
    pub t: Matrix,
    pub role: Role,
}

fn check_compatible(a: &Matrix, b: &Matrix) -> Result<()> {
    if a.field() != b.field() {
        return Err(Error::ModulusMismatch(
            a.field().modulus(),
            b.field().modulus(),
        ));
    }
    if a.shape() != b.shape() {
        return Err(Error::DimensionMismatch {
            left: a.shape(),
            right: b.shape(),
        });
    }
    Ok(())
}

fn check_square(m: &Matrix) -> Result<()> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch {
            left: m.shape(),
            right: (m.cols(), m.rows()),
        });
    }
    if m.rows() == 0 || m.rows() > MAX_DIMENSION {
        return Err(Error::InvalidDimension(m.rows()));
    }
    Ok(())
}

/// Generators must be square, invertible, and must not commute.
pub fn check_generators(g: &Matrix, h: &Matrix) -> Result<()> {
    check_square(g)?;
    check_compatible(g, h)?;
    if !g.is_invertible() || !h.is_invertible() {
        return Err(Error::SingularMatrix);
    }
    if g.commutes_with(h)? {
        return Err(Error::CommutingGenerators);
    }
    Ok(())
}

/// `g^x · h^y`.
pub fn factor_compose(g: &Matrix, x: i64, h: &Matrix, y: i64) -> Result<Matrix> {
    check_compatible(g, h)?;
    g.pow(x)?.mul(&h.pow(y)?)
}

pub fn keygen<R: Rng + ?Sized>(
    g: &Matrix,
    h: &Matrix,
    range: ExponentRange,
    rng: &mut R,
) -> Result<(PublicKey, PrivateKey)> {
    check_generators(g, h)?;
    let x = range.sample(rng);
    let y = range.sample(rng);
    keygen_with_exponents(g, h, x, y)
}

/// Key generation with caller-chosen exponents.
pub fn keygen_with_exponents(
    g: &Matrix,
    h: &Matrix,
    x: i64,
    y: i64,
) -> Result<(PublicKey, PrivateKey)> {
    check_generators(g, h)?;
    let gx = g.pow(x)?;
    let hy = h.pow(y)?;
    let c = gx.mul(&hy)?;
    Ok((
        PublicKey {
            g: g.clone(),
            h: h.clone(),
            c,
        },
        PrivateKey { x, y, gx, hy },
    ))
}

pub fn encrypt<R: Rng + ?Sized>(
    public: &PublicKey,
    m: &Matrix,
    range: ExponentRange,
    rng: &mut R,
) -> Result<Ciphertext> {
    let xb = range.sample(rng);
    let yb = range.sample(rng);
    encrypt_with_blinding(public, m, xb, yb)
}

/// Encryption with caller-chosen blinding exponents `(x', y')`.
pub fn encrypt_with_blinding(
    public: &PublicKey,
    m: &Matrix,
    xb: i64,
    yb: i64,
) -> Result<Ciphertext> {
    check_compatible(&public.g, m)?;
    let gxb = public.g.pow(xb)?;
    let hyb = public.h.pow(yb)?;
    let c1 = gxb.mul(&public.c)?.mul(&hyb)?;
    let c2 = gxb.mul(&hyb)?.mul(m)?;
    Ok(Ciphertext { c1, c2 })
}

/// Strips `g^x` and `h^y` from `c1` to get the blinding factor `g^x' h^y'`,
/// then removes it from `c2`.
pub fn decrypt(private: &PrivateKey, ct: &Ciphertext) -> Result<Matrix> {
    check_compatible(&private.gx, &ct.c1)?;
    check_compatible(&private.gx, &ct.c2)?;
    let blinding = private.gx.inv()?.mul(&ct.c1)?.mul(&private.hy.inv()?)?;
    blinding.inv()?.mul(&ct.c2)
}

pub fn kex_token(g: &Matrix, h: &Matrix, x: i64, y: i64, role: Role) -> Result<KexToken> {
    Ok(KexToken {
        t: factor_compose(g, x, h, y)?,
        role,
    })
}

/// `g^x · peer · h^y`, which both sides evaluate to `g^(x1+x2) h^(y1+y2)`.
pub fn kex_shared(x: i64, y: i64, peer: &KexToken, g: &Matrix, h: &Matrix) -> Result<Matrix> {
    check_compatible(g, &peer.t)?;
    g.pow(x)?.mul(&peer.t)?.mul(&h.pow(y)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn f7() -> PrimeField {
        PrimeField::new(7).unwrap()
    }

    fn m7(rows: &[[i64; 2]]) -> Matrix {
        Matrix::from_rows(f7(), rows).unwrap()
    }

    fn ex1() -> (Matrix, Matrix) {
        (m7(&[[1, 1], [0, 1]]), m7(&[[1, 0], [1, 1]]))
    }

    #[test]
    fn compose_examples() {
        let (g, h) = ex1();
        assert_eq!(factor_compose(&g, 2, &h, 3).unwrap(), m7(&[[0, 2], [3, 1]]));
        assert_eq!(
            factor_compose(&g, 0, &h, 0).unwrap(),
            Matrix::identity(f7(), 2)
        );
        assert_eq!(factor_compose(&g, 1, &h, 1).unwrap(), m7(&[[2, 1], [1, 1]]));
        let z = Matrix::zeros(f7(), 2, 2);
        assert_eq!(factor_compose(&z, -1, &h, 1), Err(Error::SingularMatrix));
    }

    #[test]
    fn keygen_examples() {
        let (g, h) = ex1();
        let (public, private) = keygen_with_exponents(&g, &h, 2, 3).unwrap();
        assert_eq!(public.c, m7(&[[0, 2], [3, 1]]));
        assert_eq!(private.gx.mul(&private.hy).unwrap(), public.c);
        assert_eq!(
            keygen_with_exponents(&g, &g, 2, 3),
            Err(Error::CommutingGenerators)
        );

        let mut rng = ChaCha20Rng::seed_from_u64(1);
        let (public, private) = keygen(&g, &h, ExponentRange::default(), &mut rng).unwrap();
        assert!((1..=1 << 16).contains(&private.x));
        assert_eq!(private.gx, g.pow(private.x).unwrap());
        assert_eq!(private.hy, h.pow(private.y).unwrap());
        assert_eq!(private.gx.mul(&private.hy).unwrap(), public.c);
        assert!(public.c.is_invertible());
    }

    #[test]
    fn encrypt_decrypt_examples() {
        let (g, h) = ex1();
        let (public, private) = keygen_with_exponents(&g, &h, 2, 3).unwrap();
        let m = m7(&[[2, 0], [0, 4]]);
        let ct = encrypt_with_blinding(&public, &m, 1, 1).unwrap();
        assert_eq!(ct.c1, m7(&[[6, 3], [4, 1]]));
        assert_eq!(ct.c2, m7(&[[4, 4], [2, 4]]));
        assert_eq!(decrypt(&private, &ct).unwrap(), m);

        let plain = encrypt_with_blinding(&public, &m, 0, 0).unwrap();
        assert_eq!(plain.c1, public.c);
        assert_eq!(plain.c2, m);

        let id = Matrix::identity(f7(), 2);
        let mut rng = ChaCha20Rng::seed_from_u64(9);
        let ct = encrypt(&public, &id, ExponentRange::default(), &mut rng).unwrap();
        assert_eq!(decrypt(&private, &ct).unwrap(), id);

        let bad = Ciphertext {
            c1: Matrix::zeros(f7(), 2, 2),
            c2: m.clone(),
        };
        assert_eq!(decrypt(&private, &bad), Err(Error::SingularMatrix));

        let wrong = Matrix::identity(f7(), 3);
        assert!(matches!(
            encrypt_with_blinding(&public, &wrong, 1, 1),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn kex_examples() {
        let (g, h) = ex1();
        let a = kex_token(&g, &h, 1, 1, Role::Initiator).unwrap();
        let b = kex_token(&g, &h, 2, 1, Role::Responder).unwrap();
        assert_eq!(a.t, m7(&[[2, 1], [1, 1]]));
        assert_eq!(b.t, m7(&[[3, 2], [1, 1]]));
        assert_eq!(
            kex_token(&g, &h, 0, 0, Role::Initiator).unwrap().t,
            Matrix::identity(f7(), 2)
        );
        let k = m7(&[[0, 3], [2, 1]]);
        assert_eq!(kex_shared(1, 1, &b, &g, &h).unwrap(), k);
        assert_eq!(kex_shared(2, 1, &a, &g, &h).unwrap(), k);
        let id = KexToken {
            t: Matrix::identity(f7(), 2),
            role: Role::Responder,
        };
        assert_eq!(
            kex_shared(0, 0, &id, &g, &h).unwrap(),
            Matrix::identity(f7(), 2)
        );
    }

    #[test]
    fn public_key_validation() {
        let (g, h) = ex1();
        let c = m7(&[[0, 2], [3, 1]]);
        assert!(PublicKey::new(g.clone(), h.clone(), c.clone()).is_ok());
        assert_eq!(
            PublicKey::new(g.clone(), h.clone(), Matrix::zeros(f7(), 2, 2)),
            Err(Error::SingularMatrix)
        );
        assert_eq!(
            PublicKey::new(g.clone(), g.clone(), c),
            Err(Error::CommutingGenerators)
        );
    }

    fn random_pair(f: PrimeField, n: usize, rng: &mut ChaCha20Rng) -> (Matrix, Matrix) {
        let inv = |rng: &mut ChaCha20Rng| loop {
            let m = Matrix::random(f, n, n, rng);
            if m.is_invertible() {
                break m;
            }
        };
        loop {
            let (g, h) = (inv(rng), inv(rng));
            if !g.commutes_with(&h).unwrap() {
                return (g, h);
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn decrypt_inverts_encrypt(seed in any::<u64>(), n in 2usize..5, p in prop_oneof![Just(3u64), Just(7), Just(101)],
                                   lo in -50i64..0, span in 0i64..100) {
            let f = PrimeField::new(p).unwrap();
            let mut rng = ChaCha20Rng::seed_from_u64(seed);
            let (g, h) = random_pair(f, n, &mut rng);
            let range = ExponentRange::new(lo, lo + span).unwrap();
            let (public, private) = keygen(&g, &h, range, &mut rng).unwrap();
            prop_assert!(public.c.is_invertible());
            let m = Matrix::random(f, n, n, &mut rng);
            let ct = encrypt(&public, &m, range, &mut rng).unwrap();
            prop_assert_eq!(decrypt(&private, &ct).unwrap(), m);
        }

        #[test]
        fn key_agreement(seed in any::<u64>(), n in 2usize..5, e in proptest::array::uniform4(-200i64..200)) {
            let f = PrimeField::new(101).unwrap();
            let mut rng = ChaCha20Rng::seed_from_u64(seed);
            let (g, h) = random_pair(f, n, &mut rng);
            let [x1, y1, x2, y2] = e;
            let a = kex_token(&g, &h, x1, y1, Role::Initiator).unwrap();
            let b = kex_token(&g, &h, x2, y2, Role::Responder).unwrap();
            let k = factor_compose(&g, x1 + x2, &h, y1 + y2).unwrap();
            prop_assert_eq!(kex_shared(x1, y1, &b, &g, &h).unwrap(), k.clone());
            prop_assert_eq!(kex_shared(x2, y2, &a, &g, &h).unwrap(), k);
        }
    }

    /// Naive shortcuts built from public data alone should not give back `m`.
    #[test]
    fn no_trivial_shortcut() {
        let f = PrimeField::new(101).unwrap();
        let mut rng = ChaCha20Rng::seed_from_u64(77);
        let mut hits = [0usize; 4];
        for _ in 0..50 {
            let (g, h) = random_pair(f, 3, &mut rng);
            let (public, _) = keygen(&g, &h, ExponentRange::default(), &mut rng).unwrap();
            let m = loop {
                let m = Matrix::random(f, 3, 3, &mut rng);
                if m.is_invertible() {
                    break m;
                }
            };
            let ct = encrypt(&public, &m, ExponentRange::default(), &mut rng).unwrap();
            let candidates = [
                ct.c1.inv().unwrap().mul(&ct.c2).unwrap(),
                ct.c2.mul(&ct.c1.inv().unwrap()).unwrap(),
                public.c.inv().unwrap().mul(&ct.c2).unwrap(),
                ct.c1
                    .mul(&public.c.inv().unwrap())
                    .unwrap()
                    .inv()
                    .unwrap()
                    .mul(&ct.c2)
                    .unwrap(),
            ];
            for (slot, cand) in hits.iter_mut().zip(&candidates) {
                *slot += usize::from(*cand == m);
            }
        }
        // A candidate can coincide with m on a degenerate instance (e.g. when
        // c happens to commute with h^y'), but never as a rule.
        assert!(hits.iter().all(|&h| h <= 5), "{hits:?}");
    }
}
