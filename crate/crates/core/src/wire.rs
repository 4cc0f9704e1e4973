//! JSON forms of instances, keys, ciphertexts, tokens, messages and
//! attack reports.
//!
//! Every document starts with `"p"` and `"n"`, followed by its matrices as
//! row-major nested arrays of residues in `[0, p)`. Keys are emitted in the
//! declaration order of the structs below, so output is byte-stable.

use std::time::Duration;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::attacks::{AttackMethod, AttackReport};
use crate::bench::{GeneratorFamily, Instance};
use crate::error::{Error, Result};
use crate::factor_scheme::{Ciphertext, KexToken, PrivateKey, PublicKey, Role};
use crate::gfp::PrimeField;
use crate::matgfp::{Matrix, MAX_DIMENSION};

type Rows = Vec<Vec<u64>>;

/// A value with a canonical JSON document form.
pub trait Wire: Sized {
    fn to_json(&self) -> String;
    fn from_json(text: &str) -> Result<Self>;
}

fn rows(m: &Matrix) -> Rows {
    m.to_rows()
        .into_iter()
        .map(|r| r.into_iter().map(u64::from).collect())
        .collect()
}

fn header(p: u64, n: usize) -> Result<PrimeField> {
    let field = PrimeField::new(p).map_err(|e| Error::parse("p", e.to_string()))?;
    if n == 0 || n > MAX_DIMENSION {
        return Err(Error::parse(
            "n",
            format!("dimension {n} outside [1, {MAX_DIMENSION}]"),
        ));
    }
    Ok(field)
}

fn matrix(field: PrimeField, n: usize, name: &str, rows: &Rows) -> Result<Matrix> {
    if rows.len() != n {
        return Err(Error::parse(
            name,
            format!("expected {n} rows, found {}", rows.len()),
        ));
    }
    let mut data = Vec::with_capacity(n * n);
    for (i, r) in rows.iter().enumerate() {
        if r.len() != n {
            return Err(Error::parse(
                format!("{name}[{i}]"),
                format!("expected {n} entries, found {}", r.len()),
            ));
        }
        for (j, &v) in r.iter().enumerate() {
            let e = field.checked(v).ok_or_else(|| {
                Error::parse(
                    format!("{name}[{i}][{j}]"),
                    format!("entry {v} is not in [0, {})", field.modulus()),
                )
            })?;
            data.push(e.value());
        }
    }
    Matrix::from_raw(field, n, n, data)
}

fn parse_doc<T: DeserializeOwned>(text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| {
        Error::parse(
            format!("line {} column {}", e.line(), e.column()),
            e.to_string(),
        )
    })
}

fn emit<T: Serialize>(doc: &T) -> String {
    serde_json::to_string(doc).expect("wire documents always serialize")
}

fn invalid(field: &str) -> impl Fn(Error) -> Error + '_ {
    move |e| match e {
        e @ Error::Parse { .. } => e,
        other => Error::parse(field, other.to_string()),
    }
}

#[derive(Serialize, Deserialize)]
struct InstanceDoc {
    p: u64,
    n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    family: Option<GeneratorFamily>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    g: Rows,
    h: Rows,
}

impl Wire for Instance {
    fn to_json(&self) -> String {
        emit(&InstanceDoc {
            p: self.g.field().modulus().into(),
            n: self.g.rows(),
            family: self.family,
            seed: self.seed,
            g: rows(&self.g),
            h: rows(&self.h),
        })
    }

    fn from_json(text: &str) -> Result<Self> {
        let d: InstanceDoc = parse_doc(text)?;
        let f = header(d.p, d.n)?;
        let g = matrix(f, d.n, "g", &d.g)?;
        let h = matrix(f, d.n, "h", &d.h)?;
        crate::factor_scheme::check_generators(&g, &h).map_err(invalid("g/h"))?;
        Ok(Instance {
            g,
            h,
            family: d.family,
            seed: d.seed,
        })
    }
}

#[derive(Serialize, Deserialize)]
struct PublicKeyDoc {
    p: u64,
    n: usize,
    g: Rows,
    h: Rows,
    c: Rows,
}

impl Wire for PublicKey {
    fn to_json(&self) -> String {
        emit(&PublicKeyDoc {
            p: self.field().modulus().into(),
            n: self.n(),
            g: rows(&self.g),
            h: rows(&self.h),
            c: rows(&self.c),
        })
    }

    fn from_json(text: &str) -> Result<Self> {
        let d: PublicKeyDoc = parse_doc(text)?;
        let f = header(d.p, d.n)?;
        let g = matrix(f, d.n, "g", &d.g)?;
        let h = matrix(f, d.n, "h", &d.h)?;
        let c = matrix(f, d.n, "c", &d.c)?;
        PublicKey::new(g, h, c).map_err(invalid("g/h/c"))
    }
}

#[derive(Serialize, Deserialize)]
struct PrivateKeyDoc {
    p: u64,
    n: usize,
    x: i64,
    y: i64,
    gx: Rows,
    hy: Rows,
}

impl Wire for PrivateKey {
    fn to_json(&self) -> String {
        emit(&PrivateKeyDoc {
            p: self.gx.field().modulus().into(),
            n: self.gx.rows(),
            x: self.x,
            y: self.y,
            gx: rows(&self.gx),
            hy: rows(&self.hy),
        })
    }

    fn from_json(text: &str) -> Result<Self> {
        let d: PrivateKeyDoc = parse_doc(text)?;
        let f = header(d.p, d.n)?;
        let gx = matrix(f, d.n, "gx", &d.gx)?;
        let hy = matrix(f, d.n, "hy", &d.hy)?;
        for (name, m) in [("gx", &gx), ("hy", &hy)] {
            if !m.is_invertible() {
                return Err(Error::parse(name, "matrix is singular"));
            }
        }
        Ok(PrivateKey {
            x: d.x,
            y: d.y,
            gx,
            hy,
        })
    }
}

#[derive(Serialize, Deserialize)]
struct CiphertextDoc {
    p: u64,
    n: usize,
    c1: Rows,
    c2: Rows,
}

impl Wire for Ciphertext {
    fn to_json(&self) -> String {
        emit(&CiphertextDoc {
            p: self.c1.field().modulus().into(),
            n: self.c1.rows(),
            c1: rows(&self.c1),
            c2: rows(&self.c2),
        })
    }

    fn from_json(text: &str) -> Result<Self> {
        let d: CiphertextDoc = parse_doc(text)?;
        let f = header(d.p, d.n)?;
        let c1 = matrix(f, d.n, "c1", &d.c1)?;
        let c2 = matrix(f, d.n, "c2", &d.c2)?;
        if !c1.is_invertible() {
            return Err(Error::parse("c1", "matrix is singular"));
        }
        Ok(Ciphertext { c1, c2 })
    }
}

#[derive(Serialize, Deserialize)]
struct TokenDoc {
    p: u64,
    n: usize,
    role: Role,
    t: Rows,
}

impl Wire for KexToken {
    fn to_json(&self) -> String {
        emit(&TokenDoc {
            p: self.t.field().modulus().into(),
            n: self.t.rows(),
            role: self.role,
            t: rows(&self.t),
        })
    }

    fn from_json(text: &str) -> Result<Self> {
        let d: TokenDoc = parse_doc(text)?;
        let f = header(d.p, d.n)?;
        let t = matrix(f, d.n, "t", &d.t)?;
        if !t.is_invertible() {
            return Err(Error::parse("t", "matrix is singular"));
        }
        Ok(KexToken { t, role: d.role })
    }
}

/// A plaintext (or recovered) matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Message(pub Matrix);

#[derive(Serialize, Deserialize)]
struct MessageDoc {
    p: u64,
    n: usize,
    m: Rows,
}

impl Wire for Message {
    fn to_json(&self) -> String {
        emit(&MessageDoc {
            p: self.0.field().modulus().into(),
            n: self.0.rows(),
            m: rows(&self.0),
        })
    }

    fn from_json(text: &str) -> Result<Self> {
        let d: MessageDoc = parse_doc(text)?;
        let f = header(d.p, d.n)?;
        Ok(Message(matrix(f, d.n, "m", &d.m)?))
    }
}

#[derive(Serialize, Deserialize)]
struct ReportDoc {
    p: u64,
    n: usize,
    method: AttackMethod,
    recovered: Rows,
    success: Option<bool>,
    span_dimension: usize,
    sampling_attempts: u32,
    elapsed_ns: u64,
}

impl Wire for AttackReport {
    fn to_json(&self) -> String {
        emit(&ReportDoc {
            p: self.recovered.field().modulus().into(),
            n: self.recovered.rows(),
            method: self.method,
            recovered: rows(&self.recovered),
            success: self.success,
            span_dimension: self.span_dimension,
            sampling_attempts: self.sampling_attempts,
            elapsed_ns: u64::try_from(self.elapsed.as_nanos()).unwrap_or(u64::MAX),
        })
    }

    fn from_json(text: &str) -> Result<Self> {
        let d: ReportDoc = parse_doc(text)?;
        let f = header(d.p, d.n)?;
        Ok(AttackReport {
            method: d.method,
            recovered: matrix(f, d.n, "recovered", &d.recovered)?,
            success: d.success,
            span_dimension: d.span_dimension,
            sampling_attempts: d.sampling_attempts,
            elapsed: Duration::from_nanos(d.elapsed_ns),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::factor_scheme::{encrypt, kex_token, keygen, keygen_with_exponents, ExponentRange};
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn f7() -> PrimeField {
        PrimeField::new(7).unwrap()
    }

    fn ex1_public() -> PublicKey {
        let g = Matrix::from_rows(f7(), &[[1, 1], [0, 1]]).unwrap();
        let h = Matrix::from_rows(f7(), &[[1, 0], [1, 1]]).unwrap();
        keygen_with_exponents(&g, &h, 2, 3).unwrap().0
    }

    #[test]
    fn ex1_public_key_text() {
        assert_eq!(
            ex1_public().to_json(),
            r#"{"p":7,"n":2,"g":[[1,1],[0,1]],"h":[[1,0],[1,1]],"c":[[0,2],[3,1]]}"#
        );
    }

    #[test]
    fn rejects_unreduced_entry() {
        let text = r#"{"p":7,"n":2,"g":[[1,7],[0,1]],"h":[[1,0],[1,1]],"c":[[0,2],[3,1]]}"#;
        match PublicKey::from_json(text) {
            Err(Error::Parse { location, .. }) => assert_eq!(location, "g[0][1]"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn diagnostics_name_the_problem() {
        let loc = |r: Result<PublicKey>| match r {
            Err(Error::Parse { location, .. }) => location,
            other => panic!("{other:?}"),
        };
        assert_eq!(
            loc(PublicKey::from_json("{\n\"p\": 7,\n\"n\": }")),
            "line 3 column 6"
        );
        assert_eq!(
            loc(PublicKey::from_json(
                r#"{"p":8,"n":2,"g":[],"h":[],"c":[]}"#
            )),
            "p"
        );
        assert_eq!(
            loc(PublicKey::from_json(
                r#"{"p":7,"n":2,"g":[[1,1]],"h":[],"c":[]}"#
            )),
            "g"
        );
        assert_eq!(
            loc(PublicKey::from_json(
                r#"{"p":7,"n":2,"g":[[1,1],[0]],"h":[],"c":[]}"#
            )),
            "g[1]"
        );
        assert_eq!(
            loc(PublicKey::from_json(
                r#"{"p":7,"n":2,"g":[[1,1],[0,1]],"h":[[1,1],[0,1]],"c":[[1,0],[0,1]]}"#
            )),
            "g/h/c"
        );
        assert_eq!(
            loc(PublicKey::from_json(
                r#"{"p":7,"n":2,"g":[[1,1],[0,1]],"h":[[1,0],[1,1]]}"#
            )),
            "line 1 column 49"
        );
    }

    #[test]
    fn report_and_token_round_trip() {
        let g = Matrix::from_rows(f7(), &[[1, 1], [0, 1]]).unwrap();
        let h = Matrix::from_rows(f7(), &[[1, 0], [1, 1]]).unwrap();
        let t = kex_token(&g, &h, 1, 1, Role::Initiator).unwrap();
        assert_eq!(KexToken::from_json(&t.to_json()).unwrap(), t);
        assert!(t.to_json().contains(r#""role":"initiator""#));

        let report = AttackReport {
            method: AttackMethod::LindecompKex,
            recovered: g.clone(),
            success: Some(true),
            span_dimension: 4,
            sampling_attempts: 0,
            elapsed: Duration::from_nanos(12_345),
        };
        assert!(report.to_json().contains(r#""method":"lindecomp-kex""#));
        assert_eq!(AttackReport::from_json(&report.to_json()).unwrap(), report);

        let inst = Instance {
            g,
            h,
            family: Some(GeneratorFamily::UpperUnitriangular),
            seed: Some(3),
        };
        assert_eq!(Instance::from_json(&inst.to_json()).unwrap(), inst);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn key_and_ciphertext_round_trip(seed in any::<u64>(), n in 2usize..6, p in prop_oneof![Just(5u64), Just(101), Just(2_147_483_647)]) {
            let f = PrimeField::new(p).unwrap();
            let mut rng = ChaCha20Rng::seed_from_u64(seed);
            let (g, h) = loop {
                let g = Matrix::random(f, n, n, &mut rng);
                let h = Matrix::random(f, n, n, &mut rng);
                if g.is_invertible() && h.is_invertible() && !g.commutes_with(&h).unwrap() {
                    break (g, h);
                }
            };
            let range = ExponentRange::new(-1000, 1000).unwrap();
            let (public, private) = keygen(&g, &h, range, &mut rng).unwrap();
            let m = Matrix::random(f, n, n, &mut rng);
            let ct = encrypt(&public, &m, range, &mut rng).unwrap();
            prop_assert_eq!(PublicKey::from_json(&public.to_json()).unwrap(), public);
            prop_assert_eq!(PrivateKey::from_json(&private.to_json()).unwrap(), private);
            prop_assert_eq!(Ciphertext::from_json(&ct.to_json()).unwrap(), ct);
            prop_assert_eq!(Message::from_json(&Message(m.clone()).to_json()).unwrap(), Message(m));
        }
    }
}
