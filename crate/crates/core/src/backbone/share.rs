use rand::{CryptoRng, RngCore};

use super::scalar::Scalar;

/// Two-party additive sharing: `r_main` uniform, `r_aid = r - r_main`.
pub fn scalar_split<R: RngCore + CryptoRng>(r: &Scalar, rng: &mut R) -> (Scalar, Scalar) {
    let r_main = Scalar::random(rng);
    (r_main, *r - r_main)
}

/// As [`scalar_split`], resampling until neither share is zero.
pub fn scalar_split_nonzero<R: RngCore + CryptoRng>(r: &Scalar, rng: &mut R) -> (Scalar, Scalar) {
    loop {
        let (a, b) = scalar_split(r, rng);
        if !a.is_zero() && !b.is_zero() {
            return (a, b);
        }
    }
}
