//! EX1 wire documents, byte for byte.

use factor_cryptanalysis::factor_scheme::{
    encrypt_with_blinding, kex_token, keygen_with_exponents,
};
use factor_cryptanalysis::{
    Ciphertext, Instance, KexToken, Matrix, Message, PrimeField, PrivateKey, PublicKey, Role, Wire,
};

fn golden(name: &str) -> String {
    let path = format!("{}/tests/golden/{name}", env!("CARGO_MANIFEST_DIR"));
    std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{path}: {e}"))
}

fn m7(rows: &[[i64; 2]]) -> Matrix {
    Matrix::from_rows(PrimeField::new(7).unwrap(), rows).unwrap()
}

fn gh() -> (Matrix, Matrix) {
    (m7(&[[1, 1], [0, 1]]), m7(&[[1, 0], [1, 1]]))
}

fn assert_golden<T: Wire + PartialEq + std::fmt::Debug>(value: &T, name: &str) {
    let text = golden(name);
    assert_eq!(value.to_json(), text.trim_end(), "{name}");
    assert_eq!(&T::from_json(&text).unwrap(), value, "{name}");
}

#[test]
fn ex1_documents() {
    let (g, h) = gh();
    let (public, private) = keygen_with_exponents(&g, &h, 2, 3).unwrap();
    let m = m7(&[[2, 0], [0, 4]]);
    let ct = encrypt_with_blinding(&public, &m, 1, 1).unwrap();

    assert_golden(
        &Instance {
            g: g.clone(),
            h: h.clone(),
            family: None,
            seed: None,
        },
        "ex1_instance.json",
    );
    assert_golden(&public, "ex1_public_key.json");
    assert_golden(&private, "ex1_private_key.json");
    assert_golden(&ct, "ex1_ciphertext.json");
    assert_golden(&Message(m), "ex1_message.json");
    assert_golden(
        &kex_token(&g, &h, 1, 1, Role::Initiator).unwrap(),
        "ex1_token_a.json",
    );
    assert_golden(
        &kex_token(&g, &h, 2, 1, Role::Responder).unwrap(),
        "ex1_token_b.json",
    );
    assert_golden(&Message(m7(&[[0, 3], [2, 1]])), "ex1_shared_key.json");
}

#[test]
fn parsed_goldens_are_consistent() {
    let public = PublicKey::from_json(&golden("ex1_public_key.json")).unwrap();
    let private = PrivateKey::from_json(&golden("ex1_private_key.json")).unwrap();
    let ct = Ciphertext::from_json(&golden("ex1_ciphertext.json")).unwrap();
    let m = Message::from_json(&golden("ex1_message.json")).unwrap();
    assert_eq!(private.gx.mul(&private.hy).unwrap(), public.c);
    assert_eq!(
        factor_cryptanalysis::factor_scheme::decrypt(&private, &ct).unwrap(),
        m.0
    );
    let a = KexToken::from_json(&golden("ex1_token_a.json")).unwrap();
    assert_eq!(a.role, Role::Initiator);
}
