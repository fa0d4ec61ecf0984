//! Operational aggregate-key unforgeability: keys issued for sets that miss
//! i* never let a server match a ciphertext at i*, alone or summed.

use rand::seq::SliceRandom;
use rand::{CryptoRng, Rng, RngCore};
use serde::Serialize;

use super::games::random_keyword;
use crate::error::Result;
use crate::scheme::first::{adjust, adjust_out_of_scope, test, trapdoor};
use crate::scheme::{encrypt, extract, keygen, setup, AggregateKey, DocSet};

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct UnforgeabilityReport {
    pub n: u32,
    pub trials: u32,
    /// Test at i* with a key for S (i* not in S), adjusted as if i* were in S.
    pub out_of_scope_matches: u32,
    /// Same key, claiming S* = S ∪ {i*}.
    pub claimed_set_matches: u32,
    /// Sum of keys for disjoint S1, S2 (both missing i*), claiming S1 ∪ S2 ∪ {i*}.
    pub combined_key_matches: u32,
    /// Control: the summed key does search S1 ∪ S2.
    pub combined_key_control_hits: u32,
    /// Control: an honest key for a set containing i*.
    pub control_hits: u32,
    pub keyword_distribution: String,
}

impl UnforgeabilityReport {
    pub fn holds(&self) -> bool {
        self.out_of_scope_matches == 0
            && self.claimed_set_matches == 0
            && self.combined_key_matches == 0
            && self.control_hits == self.trials
            && self.combined_key_control_hits == self.trials
    }
}

/// Random subset of `pool` with at least one element.
fn random_subset<R: RngCore>(pool: &[u32], rng: &mut R) -> Vec<u32> {
    let mut v = pool.to_vec();
    v.shuffle(rng);
    v.truncate(rng.gen_range(1..=pool.len()));
    v
}

/// Needs n >= 3 so that two disjoint non-empty sets fit beside i*.
pub fn check_unforgeability_operational<R: RngCore + CryptoRng>(n: u32, trials: u32, rng: &mut R) -> Result<UnforgeabilityReport> {
    if n < 3 {
        return Err(crate::KaseError::param("the operational unforgeability check needs n >= 3"));
    }
    let params = setup(n, rng)?;
    let sk = keygen(&params, rng);
    let mut rep = UnforgeabilityReport {
        n,
        trials,
        keyword_distribution: "uniform lowercase, 8 characters".into(),
        ..Default::default()
    };
    for _ in 0..trials {
        let i_star = rng.gen_range(1..=n);
        let w = random_keyword(8, rng);
        let c = encrypt(&params, &sk, i_star, &w, rng)?;
        let others: Vec<u32> = (1..=n).filter(|&j| j != i_star).collect();

        let s = DocSet::new(random_subset(&others, rng), n)?;
        let k = extract(&params, &sk, &s)?;
        let tr = trapdoor(&params, &k, &s, &w);
        let tr_i = adjust_out_of_scope(&params, i_star, &s, &tr)?;
        rep.out_of_scope_matches += test(&params, &tr_i, &s, &c)? as u32;

        let claimed = DocSet::new(s.iter().chain([i_star]), n)?;
        let tr_i = adjust(&params, i_star, &claimed, &tr)?;
        rep.claimed_set_matches += test(&params, &tr_i, &claimed, &c)? as u32;

        let mut split = others.clone();
        split.shuffle(rng);
        let cut = rng.gen_range(1..split.len());
        let s1 = DocSet::new(random_subset(&split[..cut], rng), n)?;
        let s2 = DocSet::new(random_subset(&split[cut..], rng), n)?;
        let union = s1.union(&s2);
        let k12 = AggregateKey(extract(&params, &sk, &s1)?.0 + extract(&params, &sk, &s2)?.0);
        let tr12 = trapdoor(&params, &k12, &union, &w);
        let widened = DocSet::new(union.iter().chain([i_star]), n)?;
        let tr_i = adjust(&params, i_star, &widened, &tr12)?;
        rep.combined_key_matches += test(&params, &tr_i, &widened, &c)? as u32;

        let j = *union.as_slice().choose(rng).expect("union is non-empty");
        let cj = encrypt(&params, &sk, j, &w, rng)?;
        let tr_j = adjust(&params, j, &union, &tr12)?;
        rep.combined_key_control_hits += test(&params, &tr_j, &union, &cj)? as u32;

        let s_ok = DocSet::new(random_subset(&others, rng).into_iter().chain([i_star]), n)?;
        let k_ok = extract(&params, &sk, &s_ok)?;
        let tr_ok = adjust(&params, i_star, &s_ok, &trapdoor(&params, &k_ok, &s_ok, &w))?;
        rep.control_hits += test(&params, &tr_ok, &s_ok, &c)? as u32;
    }
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    #[test]
    fn small_run_holds() {
        let mut r = ChaCha20Rng::seed_from_u64(95);
        let rep = check_unforgeability_operational(5, 6, &mut r).unwrap();
        assert!(rep.holds(), "{rep:?}");
        assert!(check_unforgeability_operational(2, 1, &mut r).is_err());
    }
}
