use std::sync::LazyLock;

use ark_bls12_381::G1Projective;
use ark_ec::hashing::curve_maps::wb::WBMap;
use ark_ec::hashing::map_to_curve_hasher::MapToCurveBasedHasher;
use ark_ec::hashing::HashToCurve;
use ark_ff::field_hashers::DefaultFieldHasher;
use sha2::Sha256;
use unicode_normalization::UnicodeNormalization;

use super::counters::{record, Op};
use super::group::GElem;

/// Domain-separation tag of the keyword hash H: {0,1}* -> G.
pub const HASH_DST: &str = "KASE:H:v1";

/// Suite identifier recorded in parameter files.
pub const HASH_SUITE: &str = "BLS12381G1_XMD:SHA-256_SSWU_RO_";

type G1Hasher =
    MapToCurveBasedHasher<G1Projective, DefaultFieldHasher<Sha256, 128>, WBMap<ark_bls12_381::g1::Config>>;

static HASHER: LazyLock<G1Hasher> =
    LazyLock::new(|| G1Hasher::new(HASH_DST.as_bytes()).expect("valid hash-to-curve suite"));

/// Hash-to-curve (random-oracle variant) into G.
pub fn hash_to_g(msg: &[u8]) -> GElem {
    record(Op::Hash, 1);
    let p = HASHER.hash(msg).expect("hash-to-curve is total");
    GElem(p.into())
}

/// Canonical keyword bytes: UTF-8 of the NFC form, no case folding.
pub fn normalize_keyword(w: &str) -> String {
    w.nfc().collect()
}

/// H(w) for a keyword.
pub fn hash_keyword(w: &str) -> GElem {
    hash_to_g(normalize_keyword(w).as_bytes())
}
