use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use ark_bls12_381::Fr;
use ark_ff::{BigInteger, Field, PrimeField, UniformRand, Zero};
use rand::{CryptoRng, RngCore};
use zeroize::Zeroize;

use crate::error::{KaseError, Result};

/// Byte width of an encoded scalar (big-endian).
pub const SCALAR_BYTES: usize = 32;

/// Element of the scalar field Z_p of the pairing groups.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Scalar(pub(crate) Fr);

impl Scalar {
    pub fn zero() -> Self {
        Scalar(Fr::zero())
    }

    pub fn one() -> Self {
        Scalar(Fr::from(1u64))
    }

    pub fn from_u64(v: u64) -> Self {
        Scalar(Fr::from(v))
    }

    /// Uniform element of Z_p.
    pub fn random<R: RngCore + CryptoRng>(rng: &mut R) -> Self {
        Scalar(Fr::rand(rng))
    }

    /// Uniform element of Z_p^*.
    pub fn random_nonzero<R: RngCore + CryptoRng>(rng: &mut R) -> Self {
        loop {
            let s = Self::random(rng);
            if !s.is_zero() {
                return s;
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn inverse(&self) -> Option<Scalar> {
        self.0.inverse().map(Scalar)
    }

    pub fn pow(&self, e: u64) -> Scalar {
        Scalar(self.0.pow([e]))
    }

    /// 32-byte big-endian encoding.
    pub fn to_bytes(&self) -> [u8; SCALAR_BYTES] {
        let mut le = self.0.into_bigint().to_bytes_le();
        le.reverse();
        let mut out = [0u8; SCALAR_BYTES];
        out.copy_from_slice(&le);
        out
    }

    /// Decodes a 32-byte big-endian value, rejecting anything `>= p`.
    pub fn from_bytes(bytes: &[u8]) -> Result<Scalar> {
        if bytes.len() != SCALAR_BYTES {
            return Err(KaseError::encoding(format!(
                "scalar must be {SCALAR_BYTES} bytes, got {}",
                bytes.len()
            )));
        }
        let mut limbs = [0u64; 4];
        for (i, chunk) in bytes.rchunks(8).enumerate() {
            limbs[i] = u64::from_be_bytes(chunk.try_into().expect("8-byte chunk"));
        }
        Fr::from_bigint(ark_ff::BigInt(limbs))
            .map(Scalar)
            .ok_or_else(|| KaseError::encoding("scalar is not reduced modulo the group order"))
    }

    pub fn to_hex(&self) -> String {
        hex::encode(self.to_bytes())
    }

    pub fn from_hex(s: &str) -> Result<Scalar> {
        let bytes = hex::decode(s).map_err(|e| KaseError::encoding(e.to_string()))?;
        Self::from_bytes(&bytes)
    }

    pub(crate) fn bigint_le_bytes(&self) -> Vec<u8> {
        self.0.into_bigint().to_bytes_le()
    }
}

impl fmt::Debug for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Scalar({})", self.to_hex())
    }
}

impl Add for Scalar {
    type Output = Scalar;
    fn add(self, o: Scalar) -> Scalar {
        Scalar(self.0 + o.0)
    }
}

impl Sub for Scalar {
    type Output = Scalar;
    fn sub(self, o: Scalar) -> Scalar {
        Scalar(self.0 - o.0)
    }
}

impl Mul for Scalar {
    type Output = Scalar;
    fn mul(self, o: Scalar) -> Scalar {
        Scalar(self.0 * o.0)
    }
}

impl Neg for Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        Scalar(-self.0)
    }
}

impl Zeroize for Scalar {
    fn zeroize(&mut self) {
        self.0.zeroize();
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    #[test]
    fn all_ff_bytes_rejected() {
        assert!(Scalar::from_bytes(&[0xff; 32]).is_err());
    }

    #[test]
    fn modulus_rejected_but_modulus_minus_one_accepted() {
        let max = -Scalar::one();
        let bytes = max.to_bytes();
        assert_eq!(Scalar::from_bytes(&bytes).unwrap(), max);
        // p itself: increment the big-endian encoding of p - 1.
        let mut p = bytes;
        for b in p.iter_mut().rev() {
            let (v, carry) = b.overflowing_add(1);
            *b = v;
            if !carry {
                break;
            }
        }
        assert!(Scalar::from_bytes(&p).is_err());
    }

    #[test]
    fn wrong_length_rejected() {
        assert!(Scalar::from_bytes(&[0u8; 31]).is_err());
        assert!(Scalar::from_bytes(&[0u8; 33]).is_err());
    }

    #[test]
    fn big_endian_layout() {
        let s = Scalar::from_u64(0x0102);
        let b = s.to_bytes();
        assert_eq!(&b[30..], &[0x01, 0x02]);
        assert!(b[..30].iter().all(|&x| x == 0));
    }

    #[test]
    fn field_axioms_on_samples() {
        let mut rng = ChaCha20Rng::seed_from_u64(7);
        for _ in 0..200 {
            let (a, b, c) = (
                Scalar::random(&mut rng),
                Scalar::random(&mut rng),
                Scalar::random(&mut rng),
            );
            assert_eq!((a + b) + c, a + (b + c));
            assert_eq!(a * (b + c), a * b + a * c);
            assert_eq!(a * b, b * a);
            assert_eq!(a + (-a), Scalar::zero());
            if !a.is_zero() {
                assert_eq!(a * a.inverse().unwrap(), Scalar::one());
            }
        }
        assert!(Scalar::zero().inverse().is_none());
    }
}
