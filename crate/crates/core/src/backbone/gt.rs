//! Target group G_T, written multiplicatively.

use std::fmt;
use std::ops::{Div, Mul, MulAssign};

use ark_bls12_381::{Bls12_381, Fq12};
use ark_ec::pairing::PairingOutput;
use ark_ff::{CyclotomicMultSubgroup, Field, One, PrimeField, Zero};
use ark_serialize::{CanonicalDeserialize, CanonicalSerialize};
use num_bigint::BigUint;

use super::counters::{record, Op};
use super::scalar::Scalar;
use crate::error::{KaseError, Result};

pub const GT_BYTES: usize = 576;

/// |x| for the BLS12-381 parameter x = -0xd201000000010000.
const X_ABS: u64 = 0xd201000000010000;

#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct GtElem(pub(crate) PairingOutput<Bls12_381>);

impl GtElem {
    pub fn identity() -> Self {
        GtElem(PairingOutput(Fq12::one()))
    }

    pub fn is_identity(&self) -> bool {
        self.0 .0.is_one()
    }

    /// Inverse; conjugation in the cyclotomic subgroup.
    pub fn inverse(&self) -> Self {
        let mut v = self.0 .0;
        v.cyclotomic_inverse_in_place();
        GtElem(PairingOutput(v))
    }

    /// `self^e`.
    ///
    /// On G_T the p-power Frobenius acts as exponentiation by x, so with
    /// `e = d0 + d1|x| + d2|x|^2 + d3|x|^3` the power is a four-base
    /// multi-exponentiation over 64-bit digits.
    pub fn pow(&self, e: &Scalar) -> Self {
        record(Op::GtExp, 1);
        GtElem(PairingOutput(frobenius_split_pow(&self.0 .0, e)))
    }

    /// Plain square-and-multiply exponentiation; reference route for `pow`.
    pub fn pow_reference(&self, e: &Scalar) -> Self {
        record(Op::GtExp, 1);
        GtElem(PairingOutput(self.0 .0.pow(e.0.into_bigint())))
    }

    /// 576-byte canonical encoding (12 base-field coefficients).
    pub fn to_bytes(&self) -> [u8; GT_BYTES] {
        let mut out = [0u8; GT_BYTES];
        self.0
            .serialize_compressed(&mut out[..])
            .expect("fixed-width G_T encoding");
        out
    }

    /// Decodes and checks that the value has order dividing p.
    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.len() != GT_BYTES {
            return Err(KaseError::encoding(format!(
                "GT element must be {GT_BYTES} bytes, got {}",
                bytes.len()
            )));
        }
        let v = Fq12::deserialize_compressed_unchecked(bytes)
            .map_err(|e| KaseError::encoding(format!("invalid GT element: {e}")))?;
        if !in_gt(&v) {
            return Err(KaseError::encoding("invalid GT element: not in the order-r subgroup"));
        }
        Ok(GtElem(PairingOutput(v)))
    }

    pub fn to_hex(&self) -> String {
        hex::encode(self.to_bytes())
    }

    pub fn from_hex(s: &str) -> Result<Self> {
        let bytes = hex::decode(s).map_err(|e| KaseError::encoding(e.to_string()))?;
        Self::from_bytes(&bytes)
    }
}

/// Membership in G_T by Frobenius: v lies in the cyclotomic subgroup iff
/// v^{p^4} v = v^{p^2}, and a cyclotomic v lies in G_T iff v^p = v^x.
fn in_gt(v: &Fq12) -> bool {
    if v.is_zero() {
        return false;
    }
    let (mut f2, mut f4) = (*v, *v);
    f2.frobenius_map_in_place(2);
    f4.frobenius_map_in_place(4);
    if f4 * v != f2 {
        return false;
    }
    let mut fp = *v;
    fp.frobenius_map_in_place(1);
    let mut vx = v.cyclotomic_exp([X_ABS]);
    vx.cyclotomic_inverse_in_place();
    fp == vx
}

fn frobenius_split_pow(b: &Fq12, e: &Scalar) -> Fq12 {
    let mut rest = BigUint::from_bytes_le(&e.bigint_le_bytes());
    let base = BigUint::from(X_ABS);
    let mut digits = [0u64; 4];
    for d in digits.iter_mut() {
        *d = (&rest % &base).iter_u64_digits().next().unwrap_or(0);
        rest /= &base;
    }
    // p < |x|^4, so four digits always suffice.
    debug_assert!(rest.bits() == 0);

    // b^{|x|^i} = b^{(-x)^i}: odd powers pick up a conjugation.
    let mut bases = [*b; 4];
    for (i, base) in bases.iter_mut().enumerate().skip(1) {
        base.frobenius_map_in_place(i);
        if i % 2 == 1 {
            base.cyclotomic_inverse_in_place();
        }
    }

    let mut table = [Fq12::one(); 16];
    for m in 1..16usize {
        let low = m & (m - 1);
        let bit = (m ^ low).trailing_zeros() as usize;
        table[m] = table[low] * bases[bit];
    }

    let mut acc = Fq12::one();
    for bit in (0..64).rev() {
        acc.cyclotomic_square_in_place();
        let idx = (0..4).fold(0usize, |idx, i| idx | ((((digits[i] >> bit) & 1) as usize) << i));
        if idx != 0 {
            acc *= &table[idx];
        }
    }
    acc
}

impl fmt::Debug for GtElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let h = self.to_hex();
        write!(f, "GT({}..{})", &h[..16], &h[h.len() - 16..])
    }
}

impl Mul for GtElem {
    type Output = GtElem;
    fn mul(self, o: GtElem) -> GtElem {
        record(Op::GtMul, 1);
        GtElem(PairingOutput(self.0 .0 * o.0 .0))
    }
}

impl MulAssign for GtElem {
    fn mul_assign(&mut self, o: GtElem) {
        record(Op::GtMul, 1);
        self.0 .0 *= o.0 .0;
    }
}

impl Div for GtElem {
    type Output = GtElem;
    fn div(self, o: GtElem) -> GtElem {
        self * o.inverse()
    }
}
