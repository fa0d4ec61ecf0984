//! Source groups G (= BLS12-381 G1) and H (= G2) and the pairing into G_T.
//!
//! Group elements use additive operator notation (`+`, `-`, `* scalar`);
//! the multiplicative notation of the scheme maps as `a·b -> a + b` and
//! `a^x -> a * x`.

use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};
use std::sync::LazyLock;

use ark_bls12_381::{Bls12_381, Fr, G1Affine, G1Projective, G2Affine, G2Projective};
use ark_ec::pairing::Pairing;
use ark_ec::scalar_mul::fixed_base::FixedBase;
use ark_ec::{CurveGroup, Group};
use ark_ff::{PrimeField, Zero};
use ark_serialize::{CanonicalDeserialize, CanonicalSerialize};

use super::counters::{record, Op};
use super::gt::GtElem;
use super::scalar::Scalar;
use crate::error::{KaseError, Result};

pub const G_BYTES: usize = 48;
pub const H_BYTES: usize = 96;

type G2Prepared = <Bls12_381 as Pairing>::G2Prepared;

struct FixedBaseTable<T: ark_ec::scalar_mul::ScalarMul<ScalarField = Fr>> {
    window: usize,
    outerc: usize,
    table: Vec<Vec<T::MulBase>>,
}

impl<T: ark_ec::scalar_mul::ScalarMul<ScalarField = Fr>> FixedBaseTable<T> {
    fn new(base: T, window: usize) -> Self {
        let bits = Fr::MODULUS_BIT_SIZE as usize;
        FixedBaseTable {
            window,
            outerc: bits.div_ceil(window),
            table: FixedBase::get_window_table(bits, window, base),
        }
    }

    fn mul(&self, s: &Fr) -> T {
        FixedBase::windowed_mul::<T>(self.outerc, self.window, &self.table, s)
    }
}

static G_TABLE: LazyLock<FixedBaseTable<G1Projective>> =
    LazyLock::new(|| FixedBaseTable::new(G1Projective::generator(), 8));
static H_TABLE: LazyLock<FixedBaseTable<G2Projective>> =
    LazyLock::new(|| FixedBaseTable::new(G2Projective::generator(), 8));

macro_rules! source_group {
    ($name:ident, $proj:ty, $affine:ty, $bytes:ident, $add:expr, $mul:expr, $table:ident, $label:literal) => {
        #[derive(Clone, Copy, PartialEq, Eq, Hash)]
        pub struct $name(pub(crate) $proj);

        impl $name {
            pub fn generator() -> Self {
                $name(<$proj>::generator())
            }

            pub fn identity() -> Self {
                $name(<$proj>::zero())
            }

            pub fn is_identity(&self) -> bool {
                self.0.is_zero()
            }

            /// `generator * s` through a precomputed window table.
            pub fn generator_mul(s: &Scalar) -> Self {
                record($mul, 1);
                $name($table.mul(&s.0))
            }

            /// `generator * s` for every scalar, normalised in one batch.
            pub fn batch_generator_mul(scalars: &[Scalar]) -> Vec<Self> {
                record($mul, scalars.len() as u64);
                let proj: Vec<$proj> = scalars.iter().map(|s| $table.mul(&s.0)).collect();
                <$proj>::normalize_batch(&proj)
                    .into_iter()
                    .map(|a| $name(a.into()))
                    .collect()
            }

            /// Compressed encoding.
            pub fn to_bytes(&self) -> [u8; $bytes] {
                let mut out = [0u8; $bytes];
                self.0
                    .into_affine()
                    .serialize_compressed(&mut out[..])
                    .expect("fixed-width compressed encoding");
                out
            }

            /// Decodes a compressed point, checking the curve equation,
            /// prime-order subgroup membership and canonical form.
            pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
                if bytes.len() != $bytes {
                    return Err(KaseError::encoding(format!(
                        concat!($label, " element must be {} bytes, got {}"),
                        $bytes,
                        bytes.len()
                    )));
                }
                let p = <$affine>::deserialize_compressed(bytes)
                    .map(|a| $name(a.into()))
                    .map_err(|e| {
                        KaseError::encoding(format!(concat!("invalid ", $label, " element: {}"), e))
                    })?;
                // The backend ignores the payload bits of the infinity encoding.
                if p.to_bytes()[..] != *bytes {
                    return Err(KaseError::encoding(concat!("non-canonical ", $label, " encoding")));
                }
                Ok(p)
            }

            pub fn to_hex(&self) -> String {
                hex::encode(self.to_bytes())
            }

            pub fn from_hex(s: &str) -> Result<Self> {
                let bytes = hex::decode(s).map_err(|e| KaseError::encoding(e.to_string()))?;
                Self::from_bytes(&bytes)
            }

            /// Sum of `items`, counting one addition per item folded into the
            /// identity.
            pub fn sum<'a>(items: impl IntoIterator<Item = &'a $name>) -> Self {
                let mut acc = Self::identity();
                for it in items {
                    acc += *it;
                }
                acc
            }
        }

        impl fmt::Debug for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, concat!($label, "({})"), self.to_hex())
            }
        }

        impl Add for $name {
            type Output = $name;
            fn add(self, o: $name) -> $name {
                record($add, 1);
                $name(self.0 + o.0)
            }
        }

        impl AddAssign for $name {
            fn add_assign(&mut self, o: $name) {
                record($add, 1);
                self.0 += o.0;
            }
        }

        impl Sub for $name {
            type Output = $name;
            fn sub(self, o: $name) -> $name {
                record($add, 1);
                $name(self.0 - o.0)
            }
        }

        impl Neg for $name {
            type Output = $name;
            fn neg(self) -> $name {
                $name(-self.0)
            }
        }

        impl Mul<Scalar> for $name {
            type Output = $name;
            fn mul(self, s: Scalar) -> $name {
                record($mul, 1);
                $name(self.0 * s.0)
            }
        }

        impl Mul<&Scalar> for &$name {
            type Output = $name;
            fn mul(self, s: &Scalar) -> $name {
                record($mul, 1);
                $name(self.0 * s.0)
            }
        }
    };
}

source_group!(GElem, G1Projective, G1Affine, G_BYTES, Op::GAdd, Op::GMul, G_TABLE, "G");
source_group!(HElem, G2Projective, G2Affine, H_BYTES, Op::HAdd, Op::HMul, H_TABLE, "H");

/// An H element with its Miller-loop line coefficients precomputed, for
/// elements paired many times (h, h_n, pub).
#[derive(Clone)]
pub struct PreparedH {
    elem: HElem,
    prepared: G2Prepared,
}

impl PreparedH {
    pub fn new(elem: &HElem) -> Self {
        PreparedH {
            elem: *elem,
            prepared: G2Prepared::from(elem.0),
        }
    }

    pub fn elem(&self) -> &HElem {
        &self.elem
    }
}

impl fmt::Debug for PreparedH {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_tuple("PreparedH").field(&self.elem).finish()
    }
}

/// Second argument of a pairing term.
pub enum HArg<'a> {
    Plain(&'a HElem),
    Prepared(&'a PreparedH),
}

impl<'a> From<&'a HElem> for HArg<'a> {
    fn from(h: &'a HElem) -> Self {
        HArg::Plain(h)
    }
}

impl<'a> From<&'a PreparedH> for HArg<'a> {
    fn from(h: &'a PreparedH) -> Self {
        HArg::Prepared(h)
    }
}

/// e(a, b).
pub fn pair(a: &GElem, b: &HElem) -> GtElem {
    record(Op::Pairing, 1);
    GtElem(Bls12_381::pairing(a.0, b.0))
}

/// Π e(a_k, b_k) with a single final exponentiation. Counts one pairing per
/// term and one G_T multiplication per Miller-loop product.
pub fn multi_pair<'a>(terms: &[(GElem, HArg<'a>)]) -> GtElem {
    let k = terms.len() as u64;
    record(Op::Pairing, k);
    record(Op::GtMul, k.saturating_sub(1));
    let g1: Vec<G1Affine> = G1Projective::normalize_batch(&terms.iter().map(|t| t.0 .0).collect::<Vec<_>>());
    let g2: Vec<G2Prepared> = terms
        .iter()
        .map(|(_, h)| match h {
            HArg::Plain(h) => G2Prepared::from(h.0),
            HArg::Prepared(p) => p.prepared.clone(),
        })
        .collect();
    let ml = Bls12_381::multi_miller_loop(g1, g2);
    GtElem(Bls12_381::final_exponentiation(ml).expect("final exponentiation of a Miller loop output"))
}
