use rand::{CryptoRng, RngCore};
use serde::Serialize;

use crate::backbone::Widths;
use crate::error::Result;
use crate::format::Construction;
use crate::scheme::first::trapdoor;
use crate::scheme::main::trapdoor_main;
use crate::scheme::{encrypt, extract, keygen, setup, DocSet};

/// An object's size in group-element and scalar units.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Units {
    pub g: u32,
    pub h: u32,
    pub gt: u32,
    pub zp: u32,
}

impl Units {
    pub fn bytes(&self, w: Widths) -> usize {
        self.g as usize * w.g + self.h as usize * w.h + self.gt as usize * w.gt + self.zp as usize * w.scalar
    }

    /// e.g. "1|H|+1|G|+1|G_T|".
    pub fn symbolic(&self) -> String {
        let parts: Vec<String> = [(self.h, "|H|"), (self.g, "|G|"), (self.gt, "|G_T|"), (self.zp, "|Z_p|")]
            .into_iter()
            .filter(|(k, _)| *k > 0)
            .map(|(k, u)| format!("{k}{u}"))
            .collect();
        parts.join("+")
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SizeRecord {
    pub kind: String,
    pub construction: Construction,
    pub n: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub set_size: Option<usize>,
    pub bytes: usize,
    pub units: Units,
    pub symbolic: String,
    /// The symmetric-pairing count this object is usually quoted with.
    pub reference: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

const CT_NOTE: &str = "asymmetric pairing: c1 lives in H, c2 in G; ciphertexts are identical in both constructions";
const MAIN_CT_NOTE: &str = "the main construction reuses the single-server ciphertext; the 3|G|+2|G_T| count assumes a larger ciphertext than this one";

/// Measures encrypted keywords, aggregate keys and trapdoors at each n, for
/// |S| in {1, n/2, n}.
pub fn size_report<R: RngCore + CryptoRng>(ns: &[u32], rng: &mut R) -> Result<Vec<SizeRecord>> {
    let w = Widths::current();
    let mut out = Vec::new();
    let mut record = |kind: &str, cons, n, set_size, bytes, units: Units, reference: &str, note: Option<&str>| {
        out.push(SizeRecord {
            kind: kind.to_string(),
            construction: cons,
            n,
            set_size,
            bytes,
            units,
            symbolic: units.symbolic(),
            reference: reference.to_string(),
            note: note.map(str::to_string),
        })
    };
    for &n in ns {
        let params = setup(n, rng)?;
        let sk = keygen(&params, rng);
        let c = encrypt(&params, &sk, n, "size", rng)?;
        let ct_units = Units { g: 1, h: 1, gt: 1, zp: 0 };
        debug_assert_eq!(c.byte_len(), ct_units.bytes(w));
        record("encrypted-keyword", Construction::First, n, None, c.byte_len(), ct_units, "2|G|+|G_T|", Some(CT_NOTE));
        record("encrypted-keyword", Construction::Main, n, None, c.byte_len(), ct_units, "3|G|+2|G_T|", Some(MAIN_CT_NOTE));

        let mut sizes = vec![1, n.div_ceil(2) as usize, n as usize];
        sizes.dedup();
        for size in sizes {
            let s = DocSet::new(1..=size as u32, n)?;
            let k = extract(&params, &sk, &s)?;
            let g1 = Units { g: 1, ..Units::default() };
            for cons in [Construction::First, Construction::Main] {
                record("aggregate-key", cons, n, Some(size), k.0.to_bytes().len(), g1, "|G|", None);
            }
            let tr = trapdoor(&params, &k, &s, "size");
            record("trapdoor", Construction::First, n, Some(size), tr.0.to_bytes().len(), g1, "|G|", None);

            let b = trapdoor_main(&params, &k, &s, "size", rng);
            let main_total = b.tr.to_bytes().len() + b.r_main.to_bytes().len() + b.r_aid.to_bytes().len();
            let units = Units { g: 1, zp: 2, ..Units::default() };
            record("trapdoor", Construction::Main, n, Some(size), main_total, units, "|G|+2|Z_p|", None);
            let main_half = Units { g: 1, zp: 1, ..Units::default() };
            record("trapdoor-main-half", Construction::Main, n, Some(size), main_half.bytes(w), main_half, "|G|+|Z_p|", None);
            let aid_half = Units { zp: 1, ..Units::default() };
            record("trapdoor-aid-half", Construction::Main, n, Some(size), aid_half.bytes(w), aid_half, "|Z_p|", None);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    #[test]
    fn symbolic_strings() {
        assert_eq!(Units { g: 1, h: 1, gt: 1, zp: 0 }.symbolic(), "1|H|+1|G|+1|G_T|");
        assert_eq!(Units { g: 1, zp: 2, ..Default::default() }.symbolic(), "1|G|+2|Z_p|");
    }

    #[test]
    fn sizes_match_units() {
        let mut r = ChaCha20Rng::seed_from_u64(130);
        let w = Widths::current();
        let recs = size_report(&[2, 5], &mut r).unwrap();
        assert!(recs.iter().all(|x| x.bytes == x.units.bytes(w)), "{recs:?}");
        let ct: Vec<_> = recs.iter().filter(|x| x.kind == "encrypted-keyword").collect();
        assert!(ct.iter().all(|x| x.bytes == 48 + 96 + 576));
        let main_tr: Vec<_> = recs
            .iter()
            .filter(|x| x.kind == "trapdoor" && x.construction == Construction::Main)
            .collect();
        assert!(main_tr.iter().all(|x| x.bytes == 48 + 2 * 32));
    }
}
