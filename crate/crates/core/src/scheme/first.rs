//! Single-server construction. Trapdoors are deterministic in (k_agg, w).

use serde::{Deserialize, Serialize};

use super::{AggregateKey, DocSet, EncryptedKeyword, PublicParams};
use crate::backbone::{hash_keyword, multi_pair, GElem, HArg, HElem, PreparedH};
use crate::error::{KaseError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TrapdoorFirst(pub GElem);

/// Tr = k_agg · H(w).
pub fn trapdoor(_params: &PublicParams, k_agg: &AggregateKey, _s: &DocSet, w: &str) -> TrapdoorFirst {
    TrapdoorFirst(k_agg.0 + hash_keyword(w))
}

/// Tr_i = Tr · Π_{j∈S, j≠i} g_{n+1-j+i}.
pub fn adjust(params: &PublicParams, i: u32, s: &DocSet, tr: &TrapdoorFirst) -> Result<GElem> {
    let pub_i = params.pub_i(i, s)?;
    Ok(tr.0 + pub_i)
}

/// Adjust for an index outside S. Never used by an honest server; the
/// security lab uses it to show that the result is useless.
pub(crate) fn adjust_out_of_scope(params: &PublicParams, i: u32, s: &DocSet, tr: &TrapdoorFirst) -> Result<GElem> {
    params.check_index(i)?;
    s.check_range(params.n())?;
    if s.contains(i) {
        return Err(KaseError::param("index is inside the set"));
    }
    Ok(tr.0 + params.pub_i_unchecked(i, s))
}

/// e(Tr_i, c1) / e(c2, pub) == c3 with pub = Π_{j∈S} h_{n+1-j}.
pub fn test(params: &PublicParams, tr_i: &GElem, s: &DocSet, c: &EncryptedKeyword) -> Result<bool> {
    let pub_s = params.pub_for(s)?;
    Ok(test_with_pub(tr_i, HArg::Plain(&pub_s), c))
}

/// Test against a pub computed once per query.
pub fn test_prepared(tr_i: &GElem, pub_s: &PreparedH, c: &EncryptedKeyword) -> bool {
    test_with_pub(tr_i, HArg::Prepared(pub_s), c)
}

fn test_with_pub(tr_i: &GElem, pub_s: HArg<'_>, c: &EncryptedKeyword) -> bool {
    multi_pair(&[(*tr_i, HArg::Plain(&c.c1)), (-c.c2, pub_s)]) == c.c3
}

/// Everything a server needs to answer one first-construction query.
pub struct FirstQueryContext<'a> {
    params: &'a PublicParams,
    s: DocSet,
    tr: TrapdoorFirst,
    pub_s: PreparedH,
}

impl<'a> FirstQueryContext<'a> {
    pub fn new(params: &'a PublicParams, s: DocSet, tr: TrapdoorFirst) -> Result<Self> {
        let pub_s: HElem = params.pub_for(&s)?;
        Ok(FirstQueryContext {
            params,
            s,
            tr,
            pub_s: PreparedH::new(&pub_s),
        })
    }

    /// True if any of the document's ciphertexts matches.
    pub fn matches(&self, i: u32, cts: &[EncryptedKeyword]) -> Result<bool> {
        let tr_i = adjust(self.params, i, &self.s, &self.tr)?;
        Ok(cts.iter().any(|c| test_prepared(&tr_i, &self.pub_s, c)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::backbone::counters;
    use crate::scheme::{encrypt, extract, keygen, setup};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha20Rng;

    #[test]
    fn trapdoor_is_deterministic_and_cancels() {
        let mut r = ChaCha20Rng::seed_from_u64(30);
        let p = setup(4, &mut r).unwrap();
        let sk = keygen(&p, &mut r);
        let s = DocSet::new([1, 3], 4).unwrap();
        let k = extract(&p, &sk, &s).unwrap();
        let a = trapdoor(&p, &k, &s, "apple");
        assert_eq!(a.0.to_bytes(), trapdoor(&p, &k, &s, "apple").0.to_bytes());
        assert_eq!(a.0 - hash_keyword("apple"), k.0);
        assert_ne!(a, trapdoor(&p, &k, &s, "banana"));
    }

    #[test]
    fn adjust_singleton_and_hand_expansion() {
        let mut r = ChaCha20Rng::seed_from_u64(31);
        let p = setup(2, &mut r).unwrap();
        let tr = TrapdoorFirst(GElem::generator());
        assert_eq!(adjust(&p, 2, &DocSet::new([2], 2).unwrap(), &tr).unwrap(), tr.0);
        // n = 2, S = {1, 2}, i = 1: the only factor is g_{2+1-2+1} = g_2.
        let s = DocSet::new([1, 2], 2).unwrap();
        assert_eq!(adjust(&p, 1, &s, &tr).unwrap(), tr.0 + *p.g(2).unwrap());
        assert!(matches!(
            adjust(&p, 1, &DocSet::new([2], 2).unwrap(), &tr),
            Err(KaseError::Scope { index: 1 })
        ));
    }

    #[test]
    fn correctness_mismatch_and_scope() {
        let mut r = ChaCha20Rng::seed_from_u64(32);
        for _ in 0..20 {
            let n = r.gen_range(1..=8u32);
            let p = setup(n, &mut r).unwrap();
            let sk = keygen(&p, &mut r);
            let s = DocSet::new((1..=n).filter(|_| r.gen_bool(0.6)), n).unwrap_or(DocSet::full(n).unwrap());
            let i = s.as_slice()[r.gen_range(0..s.len())];
            let c = encrypt(&p, &sk, i, "apple", &mut r).unwrap();
            let k = extract(&p, &sk, &s).unwrap();
            let tr_i = adjust(&p, i, &s, &trapdoor(&p, &k, &s, "apple")).unwrap();
            assert!(test(&p, &tr_i, &s, &c).unwrap());
            let tr_bad = adjust(&p, i, &s, &trapdoor(&p, &k, &s, "apples")).unwrap();
            assert!(!test(&p, &tr_bad, &s, &c).unwrap());
        }
    }

    #[test]
    fn out_of_scope_test_fails() {
        let mut r = ChaCha20Rng::seed_from_u64(33);
        let p = setup(5, &mut r).unwrap();
        let sk = keygen(&p, &mut r);
        let s = DocSet::new([1, 2, 4], 5).unwrap();
        let k = extract(&p, &sk, &s).unwrap();
        let c = encrypt(&p, &sk, 3, "apple", &mut r).unwrap();
        let tr = trapdoor(&p, &k, &s, "apple");
        let tr_3 = adjust_out_of_scope(&p, 3, &s, &tr).unwrap();
        assert!(!test(&p, &tr_3, &s, &c).unwrap());
        // Claiming a larger set with the same key does not help either.
        let wider = s.union(&DocSet::new([3], 5).unwrap());
        let tr_w = adjust(&p, 3, &wider, &trapdoor(&p, &k, &wider, "apple")).unwrap();
        assert!(!test(&p, &tr_w, &wider, &c).unwrap());
    }

    #[test]
    fn query_context_matches_any_slot() {
        let mut r = ChaCha20Rng::seed_from_u64(34);
        let p = setup(3, &mut r).unwrap();
        let sk = keygen(&p, &mut r);
        let s = DocSet::full(3).unwrap();
        let k = extract(&p, &sk, &s).unwrap();
        let cts: Vec<_> = ["x", "apple", "y"]
            .iter()
            .map(|w| encrypt(&p, &sk, 2, w, &mut r).unwrap())
            .collect();
        let ctx = FirstQueryContext::new(&p, s.clone(), trapdoor(&p, &k, &s, "apple")).unwrap();
        assert!(ctx.matches(2, &cts).unwrap());
        let ctx = FirstQueryContext::new(&p, s.clone(), trapdoor(&p, &k, &s, "z")).unwrap();
        assert!(!ctx.matches(2, &cts).unwrap());
    }

    #[test]
    fn adjust_plus_test_operation_counts() {
        if !counters::ENABLED {
            return;
        }
        let mut r = ChaCha20Rng::seed_from_u64(35);
        let p = setup(8, &mut r).unwrap();
        let sk = keygen(&p, &mut r);
        for size in 1..=8u32 {
            let s = DocSet::new(1..=size, 8).unwrap();
            let k = extract(&p, &sk, &s).unwrap();
            let tr = trapdoor(&p, &k, &s, "w");
            let c = encrypt(&p, &sk, 1, "w", &mut r).unwrap();
            let (ok, ops) = counters::measure(|| {
                let tr_i = adjust(&p, 1, &s, &tr).unwrap();
                test(&p, &tr_i, &s, &c).unwrap()
            });
            assert!(ok);
            assert_eq!(ops.pairing, 2);
            assert_eq!(ops.gt_mul, 1);
            assert_eq!(ops.additions(), 2 * size as u64);
            assert_eq!(ops.scalar_muls() + ops.gt_exp + ops.hash, 0);
        }
    }
}
