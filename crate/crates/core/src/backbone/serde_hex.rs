//! Hex-string serde representations for the backbone types. Decoding runs the
//! same validity checks as `from_bytes`.

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::{GElem, GtElem, HElem, Scalar};

macro_rules! hex_serde {
    ($t:ty) => {
        impl Serialize for $t {
            fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
                s.serialize_str(&self.to_hex())
            }
        }

        impl<'de> Deserialize<'de> for $t {
            fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
                let s = String::deserialize(d)?;
                <$t>::from_hex(&s).map_err(D::Error::custom)
            }
        }
    };
}

hex_serde!(Scalar);
hex_serde!(GElem);
hex_serde!(HElem);
hex_serde!(GtElem);

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    #[test]
    fn json_roundtrip() {
        let mut rng = ChaCha20Rng::seed_from_u64(4);
        let s = Scalar::random(&mut rng);
        let g = GElem::generator() * s;
        let js = serde_json::to_string(&(s, g)).unwrap();
        let back: (Scalar, GElem) = serde_json::from_str(&js).unwrap();
        assert_eq!(back, (s, g));
    }

    #[test]
    fn bad_hex_is_a_deserialization_error() {
        assert!(serde_json::from_str::<Scalar>("\"zz\"").is_err());
        assert!(serde_json::from_str::<GElem>(&format!("\"{}\"", "ff".repeat(48))).is_err());
    }
}
