//! Salted credential digests.
//!
//! Stored form: `sha256$<salt hex>$<digest hex>` where the digest covers
//! `salt || secret`. Callers supply the salt so this module stays free of
//! any randomness source.

use sha2::{Digest, Sha256};

const SCHEME: &str = "sha256";

pub fn digest(secret: &str, salt: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(salt);
    hasher.update(secret.as_bytes());
    format!("{SCHEME}${}${}", hex::encode(salt), hex::encode(hasher.finalize()))
}

pub fn verify(secret: &str, stored: &str) -> bool {
    let mut parts = stored.splitn(3, '$');
    let (Some(SCHEME), Some(salt), Some(expected)) = (parts.next(), parts.next(), parts.next()) else {
        return false;
    };
    let Ok(salt) = hex::decode(salt) else {
        return false;
    };
    let candidate = digest(secret, &salt);
    let candidate = candidate.rsplit('$').next().unwrap_or_default();
    // Length is fixed, so this only leaks whether the scheme matched.
    candidate.len() == expected.len()
        && candidate
            .bytes()
            .zip(expected.bytes())
            .fold(0u8, |acc, (a, b)| acc | (a ^ b))
            == 0
}
