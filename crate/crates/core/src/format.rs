//! Versioned JSON envelope shared by every file the toolkit reads or writes:
//!
//! ```json
//! {"format": "kase/v1", "kind": "...", "construction": "first", "curve": "BLS12-381",
//!  "n": 16, "widths": {"scalar": 32, "g": 48, "h": 96, "gt": 576}, "payload": {...}}
//! ```
//!
//! Unknown fields are rejected everywhere; decoding errors carry the path of
//! the offending field.

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::backbone::{GElem, HElem, Scalar, Widths, CURVE_ID, HASH_DST, HASH_SUITE};
use crate::error::{KaseError, Result};
use crate::scheme::{AggregateKey, DocSet, PublicParams, SecretKey, TRUSTED_SETUP_WARNING};

pub const FORMAT: &str = "kase/v1";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Construction {
    First,
    Main,
}

impl Construction {
    pub fn as_str(&self) -> &'static str {
        match self {
            Construction::First => "first",
            Construction::Main => "main",
        }
    }
}

impl std::str::FromStr for Construction {
    type Err = KaseError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "first" => Ok(Construction::First),
            "main" => Ok(Construction::Main),
            other => Err(KaseError::param(format!("unknown construction `{other}` (first|main)"))),
        }
    }
}

impl std::fmt::Display for Construction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Envelope<T> {
    pub format: String,
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub construction: Option<Construction>,
    pub curve: String,
    pub n: u32,
    pub widths: Widths,
    pub payload: T,
}

impl<T> Envelope<T> {
    pub fn new(kind: &str, construction: Option<Construction>, n: u32, payload: T) -> Self {
        Envelope {
            format: FORMAT.to_string(),
            kind: kind.to_string(),
            construction,
            curve: CURVE_ID.to_string(),
            n,
            widths: Widths::current(),
            payload,
        }
    }

    /// Checks the header against this build and the expected kind.
    pub fn check(&self, kind: &str) -> Result<()> {
        if self.format != FORMAT {
            return Err(KaseError::format("format", format!("expected `{FORMAT}`, got `{}`", self.format)));
        }
        if self.kind != kind {
            return Err(KaseError::format("kind", format!("expected `{kind}`, got `{}`", self.kind)));
        }
        if self.curve != CURVE_ID {
            return Err(KaseError::format("curve", format!("expected `{CURVE_ID}`, got `{}`", self.curve)));
        }
        if self.widths != Widths::current() {
            return Err(KaseError::format("widths", format!("{:?} does not match this build", self.widths)));
        }
        Ok(())
    }
}

impl<T: Serialize> Envelope<T> {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("envelope serialises")
    }
}

/// Parses `text` as an envelope of the given kind.
pub fn parse<T: DeserializeOwned>(text: &str, kind: &str) -> Result<Envelope<T>> {
    let env: Envelope<T> = from_str_with_path(text)?;
    env.check(kind)?;
    Ok(env)
}

/// `serde_json::from_str` with the failing field path in the error.
pub fn from_str_with_path<T: DeserializeOwned>(text: &str) -> Result<T> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let v = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        KaseError::format(if path == "." { String::from("<root>") } else { path }, inner.to_string())
    })?;
    Ok(v)
}

pub const KIND_PARAMS: &str = "params";
pub const KIND_SECRET_KEY: &str = "secret-key";
pub const KIND_AGGREGATE_KEY: &str = "aggregate-key";
pub const KIND_TRAPDOOR: &str = "trapdoor";
pub const KIND_TRAPDOOR_MAIN: &str = "trapdoor-main-half";
pub const KIND_TRAPDOOR_AID: &str = "trapdoor-aid-half";
pub const KIND_INDEX_STORE: &str = "index-store";

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsPayload {
    pub hash_suite: String,
    pub hash_dst: String,
    pub alpha_destroyed: bool,
    pub warning: String,
    /// g_1..g_n, g_{n+2}..g_{2n}
    pub g: Vec<GElem>,
    /// h_1..h_n
    pub h: Vec<HElem>,
}

pub fn params_to_json(p: &PublicParams) -> String {
    Envelope::new(
        KIND_PARAMS,
        None,
        p.n(),
        ParamsPayload {
            hash_suite: HASH_SUITE.to_string(),
            hash_dst: HASH_DST.to_string(),
            alpha_destroyed: p.alpha_destroyed(),
            warning: TRUSTED_SETUP_WARNING.to_string(),
            g: p.g_list().copied().collect(),
            h: p.h_list().to_vec(),
        },
    )
    .to_json()
}

pub fn params_from_json(text: &str) -> Result<PublicParams> {
    let env: Envelope<ParamsPayload> = parse(text, KIND_PARAMS)?;
    let pl = env.payload;
    if pl.hash_suite != HASH_SUITE || pl.hash_dst != HASH_DST {
        return Err(KaseError::format("payload.hash_dst", "hash function does not match this build"));
    }
    let n = env.n as usize;
    if n == 0 || pl.g.len() != 2 * n - 1 {
        return Err(KaseError::format(
            "payload.g",
            format!("expected {} elements for n = {n}, got {}", (2 * n).saturating_sub(1), pl.g.len()),
        ));
    }
    if pl.h.len() != n {
        return Err(KaseError::format("payload.h", format!("expected {n} elements, got {}", pl.h.len())));
    }
    PublicParams::from_parts(env.n, pl.g, pl.h, pl.alpha_destroyed)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SecretKeyPayload {
    pub beta: Scalar,
}

pub fn secret_key_to_json(n: u32, sk: &SecretKey) -> String {
    Envelope::new(KIND_SECRET_KEY, None, n, SecretKeyPayload { beta: *sk.beta() }).to_json()
}

pub fn secret_key_from_json(text: &str) -> Result<(u32, SecretKey)> {
    let env: Envelope<SecretKeyPayload> = parse(text, KIND_SECRET_KEY)?;
    Ok((env.n, SecretKey::from_beta(env.payload.beta)))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AggregateKeyPayload {
    pub set: DocSet,
    pub key: AggregateKey,
}

pub fn aggregate_key_to_json(n: u32, set: &DocSet, key: &AggregateKey) -> String {
    Envelope::new(
        KIND_AGGREGATE_KEY,
        None,
        n,
        AggregateKeyPayload {
            set: set.clone(),
            key: *key,
        },
    )
    .to_json()
}

pub fn aggregate_key_from_json(text: &str) -> Result<(u32, DocSet, AggregateKey)> {
    let env: Envelope<AggregateKeyPayload> = parse(text, KIND_AGGREGATE_KEY)?;
    env.payload
        .set
        .check_range(env.n)
        .map_err(|e| KaseError::format("payload.set", e.to_string()))?;
    Ok((env.n, env.payload.set, env.payload.key))
}

/// Single-server trapdoor. Deterministic in (key, S, keyword).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrapdoorPayload {
    pub set: DocSet,
    pub tr: GElem,
}

/// The half of a two-server trapdoor addressed to C_main.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrapdoorMainPayload {
    pub set: DocSet,
    pub tr: GElem,
    pub r_main: Scalar,
}

/// The half of a two-server trapdoor addressed to C_aid.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrapdoorAidPayload {
    pub set: DocSet,
    pub r_aid: Scalar,
}

/// Writes a payload of `kind` under the envelope.
pub fn to_json<T: Serialize>(kind: &str, construction: Option<Construction>, n: u32, payload: T) -> String {
    Envelope::new(kind, construction, n, payload).to_json()
}

/// Reads a trapdoor-style payload whose `set` must fit in [1, n].
pub fn trapdoor_from_json<T: DeserializeOwned + HasSet>(text: &str, kind: &str) -> Result<(u32, T)> {
    let env: Envelope<T> = parse(text, kind)?;
    env.payload
        .set()
        .check_range(env.n)
        .map_err(|e| KaseError::format("payload.set", e.to_string()))?;
    Ok((env.n, env.payload))
}

pub trait HasSet {
    fn set(&self) -> &DocSet;
}

impl HasSet for TrapdoorPayload {
    fn set(&self) -> &DocSet {
        &self.set
    }
}

impl HasSet for TrapdoorMainPayload {
    fn set(&self) -> &DocSet {
        &self.set
    }
}

impl HasSet for TrapdoorAidPayload {
    fn set(&self) -> &DocSet {
        &self.set
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scheme::{extract, keygen, setup};
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    #[test]
    fn params_roundtrip() {
        let mut r = ChaCha20Rng::seed_from_u64(50);
        let p = setup(4, &mut r).unwrap();
        let text = params_to_json(&p);
        let q = params_from_json(&text).unwrap();
        assert_eq!(q.n(), 4);
        assert!(q.g_list().eq(p.g_list()));
        assert_eq!(q.h_list(), p.h_list());
        assert!(text.contains("\"format\": \"kase/v1\""));
        assert!(text.contains("\"warning\""));
    }

    #[test]
    fn unknown_field_reports_path() {
        let mut r = ChaCha20Rng::seed_from_u64(51);
        let p = setup(2, &mut r).unwrap();
        let sk = keygen(&p, &mut r);
        let text = secret_key_to_json(2, &sk);
        let mut v: serde_json::Value = serde_json::from_str(&text).unwrap();
        v["payload"]["extra"] = serde_json::json!(1);
        match secret_key_from_json(&v.to_string()) {
            Err(KaseError::Format { path, .. }) => assert_eq!(path, "payload.extra"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn bad_element_reports_index_path() {
        let mut r = ChaCha20Rng::seed_from_u64(52);
        let p = setup(3, &mut r).unwrap();
        let mut v: serde_json::Value = serde_json::from_str(&params_to_json(&p)).unwrap();
        v["payload"]["g"][2] = serde_json::json!("ff".repeat(48));
        match params_from_json(&v.to_string()) {
            Err(KaseError::Format { path, .. }) => assert_eq!(path, "payload.g[2]"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn header_mismatches_rejected() {
        let mut r = ChaCha20Rng::seed_from_u64(53);
        let p = setup(2, &mut r).unwrap();
        let sk = keygen(&p, &mut r);
        let s = DocSet::full(2).unwrap();
        let text = aggregate_key_to_json(2, &s, &extract(&p, &sk, &s).unwrap());
        let (n, s2, _) = aggregate_key_from_json(&text).unwrap();
        assert_eq!((n, s2), (2, s));
        for (field, value) in [
            ("format", serde_json::json!("kase/v0")),
            ("kind", serde_json::json!("params")),
            ("curve", serde_json::json!("BN254")),
        ] {
            let mut v: serde_json::Value = serde_json::from_str(&text).unwrap();
            v[field] = value;
            match aggregate_key_from_json(&v.to_string()) {
                Err(KaseError::Format { path, .. }) => assert_eq!(path, field),
                other => panic!("unexpected {other:?}"),
            }
        }
        let mut v: serde_json::Value = serde_json::from_str(&text).unwrap();
        v["widths"]["g"] = serde_json::json!(32);
        assert!(matches!(aggregate_key_from_json(&v.to_string()), Err(KaseError::Format { .. })));
    }

    #[test]
    fn params_count_mismatch() {
        let mut r = ChaCha20Rng::seed_from_u64(54);
        let p = setup(3, &mut r).unwrap();
        let mut v: serde_json::Value = serde_json::from_str(&params_to_json(&p)).unwrap();
        v["n"] = serde_json::json!(4);
        match params_from_json(&v.to_string()) {
            Err(KaseError::Format { path, .. }) => assert_eq!(path, "payload.g"),
            other => panic!("unexpected {other:?}"),
        }
    }
}
