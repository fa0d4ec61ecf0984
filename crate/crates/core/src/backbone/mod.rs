//! Pairing backbone: an asymmetric bilinear group system over BLS12-381
//! with G = G1 (48-byte points), H = G2 (96-byte points) and a 576-byte G_T.

pub mod counters;
mod group;
mod gt;
mod hash;
mod scalar;
mod serde_hex;
mod share;

use serde::{Deserialize, Serialize};

pub use group::{multi_pair, pair, GElem, HArg, HElem, PreparedH, G_BYTES, H_BYTES};
pub use gt::{GtElem, GT_BYTES};
pub use hash::{hash_keyword, hash_to_g, normalize_keyword, HASH_DST, HASH_SUITE};
pub use scalar::{Scalar, SCALAR_BYTES};
pub use share::{scalar_split, scalar_split_nonzero};

pub const CURVE_ID: &str = "BLS12-381";

/// Approximate security level of the pinned curve, in bits.
pub const SECURITY_BITS: u32 = 128;

/// Byte widths of the encodings, recorded in every file header.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Widths {
    pub scalar: usize,
    pub g: usize,
    pub h: usize,
    pub gt: usize,
}

impl Widths {
    pub const fn current() -> Self {
        Widths {
            scalar: SCALAR_BYTES,
            g: G_BYTES,
            h: H_BYTES,
            gt: GT_BYTES,
        }
    }
}

/// The group system B = (p, G, H, G_T, e) with its fixed generators.
#[derive(Clone, Copy, Debug)]
pub struct GroupSystem {
    pub g: GElem,
    pub h: HElem,
}

impl GroupSystem {
    pub fn bls12_381() -> Self {
        GroupSystem {
            g: GElem::generator(),
            h: HElem::generator(),
        }
    }

    pub fn curve_id(&self) -> &'static str {
        CURVE_ID
    }

    /// Group order p as a decimal string.
    pub fn order(&self) -> String {
        use ark_ff::PrimeField;
        ark_bls12_381::Fr::MODULUS.to_string()
    }

    /// e(g, h) != 1.
    pub fn is_nondegenerate(&self) -> bool {
        !pair(&self.g, &self.h).is_identity()
    }
}
