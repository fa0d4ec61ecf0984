use std::collections::HashMap;

use rand::{CryptoRng, RngCore};
use serde::Serialize;

use crate::backbone::{hash_keyword, normalize_keyword, pair, GElem, Scalar};
use crate::error::{KaseError, Result};
use crate::scheme::{encrypt_with_base, keyword_base, EncryptedKeyword, PublicParams, SecretKey};

/// Outcome of an attack.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Recovery {
    Keyword(String),
    Open,
}

/// Encrypt with one t per document, shared by all of its keywords.
/// Otherwise identical to the real Encrypt.
#[derive(Default)]
pub struct WeakSharedRandomnessVariant {
    t: HashMap<u32, Scalar>,
}

impl WeakSharedRandomnessVariant {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn encrypt<R: RngCore + CryptoRng>(
        &mut self,
        params: &PublicParams,
        sk: &SecretKey,
        i: u32,
        w: &str,
        rng: &mut R,
    ) -> Result<EncryptedKeyword> {
        params.check_index(i)?;
        let t = *self.t.entry(i).or_insert_with(|| Scalar::random_nonzero(rng));
        Ok(encrypt_with_base(params, sk, i, &keyword_base(params, &hash_keyword(w)), &t))
    }
}

/// With a shared t, c3/c3' = e(H(w) - H(w'), h^t) and h^t = c1 is public.
/// Tries each candidate against that ratio.
pub fn attack_ciphertext_ratio(
    c: &EncryptedKeyword,
    c_known: &EncryptedKeyword,
    w_known: &str,
    candidates: &[&str],
) -> Result<Recovery> {
    if c.doc_index != c_known.doc_index {
        return Err(KaseError::param("the two ciphertexts belong to different documents"));
    }
    if c == c_known {
        return Ok(Recovery::Open);
    }
    let ratio = c.c3 / c_known.c3;
    let hw_known = hash_keyword(w_known);
    for cand in candidates {
        if pair(&(hash_keyword(cand) - hw_known), &c.c1) == ratio {
            return Ok(Recovery::Keyword(normalize_keyword(cand)));
        }
    }
    Ok(Recovery::Open)
}

/// Deterministic trapdoors: Tr* + H(w') - Tr' = H(w*).
pub fn attack_deterministic_trapdoor(tr_challenge: &GElem, tr_known: &GElem, w_known: &str, candidates: &[&str]) -> Recovery {
    let target = *tr_challenge + hash_keyword(w_known) - *tr_known;
    candidates
        .iter()
        .find(|cand| hash_keyword(cand) == target)
        .map_or(Recovery::Open, |cand| Recovery::Keyword(normalize_keyword(cand)))
}
