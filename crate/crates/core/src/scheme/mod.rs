//! Algorithms shared by both constructions: Setup, KeyGen, Encrypt and
//! Extract, plus the index arithmetic that Adjust and Test build on.
//!
//! Layout over the asymmetric group system: the power sequence g_i and all
//! aggregate material (keys, trapdoors) live in G; c1, h_i and pub live in H.

pub mod first;
pub mod main;

use std::collections::HashMap;
use std::fmt;

use rand::{CryptoRng, RngCore};
use serde::{Deserialize, Deserializer, Serialize};
use zeroize::Zeroize;

use crate::backbone::{hash_keyword, multi_pair, GElem, GtElem, HArg, HElem, PreparedH, Scalar};
use crate::error::{KaseError, Result};

/// Default upper bound on `n` accepted by [`setup`].
pub const MAX_DOCUMENTS: u32 = 1 << 16;

/// Recorded in every parameter file.
pub const TRUSTED_SETUP_WARNING: &str =
    "params were generated by a single party; whoever ran setup could have retained alpha and with it g^(alpha^(n+1))";

/// A set of document indexes in canonical form: ascending, no duplicates,
/// non-empty, every index at least 1.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(transparent)]
pub struct DocSet(Vec<u32>);

impl DocSet {
    /// Canonicalises `indices` and checks them against `n`.
    pub fn new(indices: impl IntoIterator<Item = u32>, n: u32) -> Result<Self> {
        let s = Self::canonical(indices)?;
        s.check_range(n)?;
        Ok(s)
    }

    /// Sorts and deduplicates without range checks; call
    /// [`DocSet::check_range`] before use against parameters.
    pub fn canonical(indices: impl IntoIterator<Item = u32>) -> Result<Self> {
        let mut v: Vec<u32> = indices.into_iter().collect();
        v.sort_unstable();
        v.dedup();
        if v.is_empty() {
            return Err(KaseError::param("document set is empty"));
        }
        Ok(DocSet(v))
    }

    /// `[1, n]`.
    pub fn full(n: u32) -> Result<Self> {
        Self::new(1..=n, n)
    }

    pub fn check_range(&self, n: u32) -> Result<()> {
        match self.0.iter().find(|&&j| j == 0 || j > n) {
            Some(&index) => Err(KaseError::Index { index, n }),
            None => Ok(()),
        }
    }

    pub fn contains(&self, i: u32) -> bool {
        self.0.binary_search(&i).is_ok()
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.0
    }

    pub fn iter(&self) -> impl Iterator<Item = u32> + '_ {
        self.0.iter().copied()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn union(&self, other: &DocSet) -> DocSet {
        DocSet::canonical(self.iter().chain(other.iter())).expect("union of non-empty sets")
    }

    pub fn is_disjoint(&self, other: &DocSet) -> bool {
        !self.iter().any(|j| other.contains(j))
    }
}

impl fmt::Debug for DocSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.0.iter()).finish()
    }
}

impl<'de> Deserialize<'de> for DocSet {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = Vec::<u32>::deserialize(d)?;
        DocSet::canonical(v).map_err(serde::de::Error::custom)
    }
}

/// Public parameters: g_i for i in {1..n, n+2..2n} and h_i for i in {1..n}.
/// The element g_{n+1} is never computed.
#[derive(Clone)]
pub struct PublicParams {
    n: u32,
    g_low: Vec<GElem>,
    g_high: Vec<GElem>,
    h_pows: Vec<HElem>,
    alpha_destroyed: bool,
    h_prep: PreparedH,
    hn_prep: PreparedH,
}

impl PublicParams {
    /// Assembles parameters from their public lists. `g` holds the 2n-1
    /// elements g_1..g_n, g_{n+2}..g_{2n} in that order; `h` holds h_1..h_n.
    pub fn from_parts(n: u32, g: Vec<GElem>, h: Vec<HElem>, alpha_destroyed: bool) -> Result<Self> {
        check_n(n)?;
        let n_us = n as usize;
        if g.len() != 2 * n_us - 1 {
            return Err(KaseError::param(format!(
                "expected {} G elements for n = {n}, got {}",
                2 * n_us - 1,
                g.len()
            )));
        }
        if h.len() != n_us {
            return Err(KaseError::param(format!("expected {n} H elements, got {}", h.len())));
        }
        let mut g_low = g;
        let g_high = g_low.split_off(n_us);
        let h_prep = PreparedH::new(&HElem::generator());
        let hn_prep = PreparedH::new(&h[n_us - 1]);
        Ok(PublicParams {
            n,
            g_low,
            g_high,
            h_pows: h,
            alpha_destroyed,
            h_prep,
            hn_prep,
        })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    /// g_k, or `None` for k = n+1 and anything outside [1, 2n].
    pub fn g(&self, k: u32) -> Option<&GElem> {
        let n = self.n;
        match k {
            0 => None,
            k if k <= n => self.g_low.get(k as usize - 1),
            k if k == n + 1 => None,
            k if k <= 2 * n => self.g_high.get((k - n - 2) as usize),
            _ => None,
        }
    }

    /// h_k for k in [1, n].
    pub fn h(&self, k: u32) -> Option<&HElem> {
        if k == 0 {
            return None;
        }
        self.h_pows.get(k as usize - 1)
    }

    /// The stored G list in file order (g_1..g_n, g_{n+2}..g_{2n}).
    pub fn g_list(&self) -> impl Iterator<Item = &GElem> {
        self.g_low.iter().chain(self.g_high.iter())
    }

    /// Indexes of the stored G list, in the same order as [`Self::g_list`].
    pub fn g_indices(&self) -> impl Iterator<Item = u32> {
        let n = self.n;
        (1..=n).chain(n + 2..=2 * n)
    }

    pub fn h_list(&self) -> &[HElem] {
        &self.h_pows
    }

    pub fn alpha_destroyed(&self) -> bool {
        self.alpha_destroyed
    }

    pub fn check_index(&self, i: u32) -> Result<()> {
        if i == 0 || i > self.n {
            Err(KaseError::Index { index: i, n: self.n })
        } else {
            Ok(())
        }
    }

    /// pub = Π_{j∈S} h_{n+1-j}.
    pub fn pub_for(&self, s: &DocSet) -> Result<HElem> {
        s.check_range(self.n)?;
        let items: Vec<&HElem> = s
            .iter()
            .map(|j| self.h(self.n + 1 - j).expect("n+1-j lies in [1, n]"))
            .collect();
        Ok(HElem::sum(items))
    }

    /// pub_i = Π_{j∈S, j≠i} g_{n+1-j+i}. Requires i ∈ S.
    pub fn pub_i(&self, i: u32, s: &DocSet) -> Result<GElem> {
        s.check_range(self.n)?;
        if !s.contains(i) {
            return Err(KaseError::Scope { index: i });
        }
        Ok(self.pub_i_unchecked(i, s))
    }

    /// The same product without the scope check. For i ∉ S the product has
    /// one more factor than an honest Adjust would use.
    pub(crate) fn pub_i_unchecked(&self, i: u32, s: &DocSet) -> GElem {
        let items: Vec<&GElem> = adjust_indices(self.n, i, s)
            .map(|k| self.g(k).expect("adjust index avoids the gap"))
            .collect();
        GElem::sum(items)
    }
}

impl fmt::Debug for PublicParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PublicParams")
            .field("n", &self.n)
            .field("alpha_destroyed", &self.alpha_destroyed)
            .finish_non_exhaustive()
    }
}

/// Indexes n+1-j+i for j ∈ S \ {i}.
pub(crate) fn adjust_indices(n: u32, i: u32, s: &DocSet) -> impl Iterator<Item = u32> + '_ {
    s.iter().filter(move |&j| j != i).map(move |j| n + 1 - j + i)
}

fn check_n(n: u32) -> Result<()> {
    if n == 0 {
        return Err(KaseError::param("n must be at least 1"));
    }
    if n > MAX_DOCUMENTS {
        return Err(KaseError::param(format!("n = {n} exceeds the cap of {MAX_DOCUMENTS}")));
    }
    Ok(())
}

/// Samples alpha, publishes its powers and erases it.
pub fn setup<R: RngCore + CryptoRng>(n: u32, rng: &mut R) -> Result<PublicParams> {
    let (params, mut alpha) = setup_inner(n, rng)?;
    alpha.zeroize();
    Ok(params)
}

/// Setup that hands alpha back to the caller. Only for tests that need an
/// algebraic oracle.
#[cfg(feature = "test-oracles")]
pub fn setup_retaining_alpha<R: RngCore + CryptoRng>(n: u32, rng: &mut R) -> Result<(PublicParams, Scalar)> {
    let (mut params, alpha) = setup_inner(n, rng)?;
    params.alpha_destroyed = false;
    Ok((params, alpha))
}

fn setup_inner<R: RngCore + CryptoRng>(n: u32, rng: &mut R) -> Result<(PublicParams, Scalar)> {
    check_n(n)?;
    let alpha = Scalar::random_nonzero(rng);
    let n_us = n as usize;
    let mut pows = Vec::with_capacity(2 * n_us);
    let mut acc = alpha;
    for _ in 0..2 * n_us {
        pows.push(acc);
        acc = acc * alpha;
    }
    acc.zeroize();
    let g_exps: Vec<Scalar> = pows[..n_us].iter().chain(&pows[n_us + 1..]).copied().collect();
    let g = GElem::batch_generator_mul(&g_exps);
    let h = HElem::batch_generator_mul(&pows[..n_us]);
    pows.zeroize();
    let params = PublicParams::from_parts(n, g, h, true)?;
    Ok((params, alpha))
}

/// The data owner's key β, with g^β cached for Encrypt.
#[derive(Clone)]
pub struct SecretKey {
    beta: Scalar,
    g_beta: GElem,
}

impl SecretKey {
    pub fn from_beta(beta: Scalar) -> Self {
        SecretKey {
            beta,
            g_beta: GElem::generator_mul(&beta),
        }
    }

    pub fn beta(&self) -> &Scalar {
        &self.beta
    }
}

impl Drop for SecretKey {
    fn drop(&mut self) {
        self.beta.zeroize();
        self.g_beta = GElem::identity();
    }
}

impl fmt::Debug for SecretKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("SecretKey(..)")
    }
}

pub fn keygen<R: RngCore + CryptoRng>(_params: &PublicParams, rng: &mut R) -> SecretKey {
    SecretKey::from_beta(Scalar::random(rng))
}

/// One keyword of one document: (c1, c2, c3) ∈ H × G × G_T.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EncryptedKeyword {
    pub doc_index: u32,
    pub c1: HElem,
    pub c2: GElem,
    pub c3: GtElem,
}

impl EncryptedKeyword {
    /// Serialized group-element bytes (the index is bookkeeping).
    pub fn byte_len(&self) -> usize {
        self.c1.to_bytes().len() + self.c2.to_bytes().len() + self.c3.to_bytes().len()
    }
}

/// c1 = h^t, c2 = (g^β·g_i)^t, c3 = (e(H(w), h) / e(g_1, h_n))^t.
pub fn encrypt<R: RngCore + CryptoRng>(
    params: &PublicParams,
    sk: &SecretKey,
    i: u32,
    w: &str,
    rng: &mut R,
) -> Result<EncryptedKeyword> {
    params.check_index(i)?;
    let t = Scalar::random(rng);
    let base = keyword_base(params, &hash_keyword(w));
    Ok(encrypt_with_base(params, sk, i, &base, &t))
}

/// e(H(w), h) / e(g_1, h_n), the per-keyword part of c3 before blinding.
pub(crate) fn keyword_base(params: &PublicParams, hw: &GElem) -> GtElem {
    let g1 = params.g(1).expect("g_1 is always present");
    multi_pair(&[(*hw, HArg::Prepared(&params.h_prep)), (-*g1, HArg::Prepared(&params.hn_prep))])
}

pub(crate) fn encrypt_with_base(params: &PublicParams, sk: &SecretKey, i: u32, base: &GtElem, t: &Scalar) -> EncryptedKeyword {
    let gi = params.g(i).expect("index checked");
    EncryptedKeyword {
        doc_index: i,
        c1: HElem::generator_mul(t),
        c2: &(sk.g_beta + *gi) * t,
        c3: base.pow(t),
    }
}

/// Encrypts many keywords, reusing the pairing part of c3 for repeated
/// keywords. Each ciphertext still gets its own t.
pub struct Encryptor<'a> {
    params: &'a PublicParams,
    sk: &'a SecretKey,
    bases: HashMap<String, GtElem>,
}

impl<'a> Encryptor<'a> {
    pub fn new(params: &'a PublicParams, sk: &'a SecretKey) -> Self {
        Encryptor {
            params,
            sk,
            bases: HashMap::new(),
        }
    }

    pub fn encrypt<R: RngCore + CryptoRng>(&mut self, i: u32, w: &str, rng: &mut R) -> Result<EncryptedKeyword> {
        self.params.check_index(i)?;
        let t = Scalar::random(rng);
        let params = self.params;
        let base = *self
            .bases
            .entry(crate::backbone::normalize_keyword(w))
            .or_insert_with_key(|w| keyword_base(params, &hash_keyword(w)));
        Ok(encrypt_with_base(params, self.sk, i, &base, &t))
    }
}

/// Single-element key for the set it was issued for.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AggregateKey(pub GElem);

/// k_agg = Π_{j∈S} g_{n+1-j}^β.
pub fn extract(params: &PublicParams, sk: &SecretKey, s: &DocSet) -> Result<AggregateKey> {
    s.check_range(params.n)?;
    let items: Vec<&GElem> = s
        .iter()
        .map(|j| params.g(params.n + 1 - j).expect("n+1-j lies in [1, n]"))
        .collect();
    Ok(AggregateKey(GElem::sum(items) * sk.beta))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::backbone::pair;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn rng(seed: u64) -> ChaCha20Rng {
        ChaCha20Rng::seed_from_u64(seed)
    }

    #[test]
    fn docset_canonical_form() {
        let s = DocSet::new([3, 1, 3, 2], 4).unwrap();
        assert_eq!(s.as_slice(), &[1, 2, 3]);
        assert!(matches!(DocSet::new([], 4), Err(KaseError::Parameter(_))));
        assert!(matches!(DocSet::new([5], 4), Err(KaseError::Index { index: 5, n: 4 })));
        assert!(matches!(DocSet::new([0, 1], 4), Err(KaseError::Index { index: 0, .. })));
        let js = serde_json::to_string(&s).unwrap();
        assert_eq!(js, "[1,2,3]");
        let back: DocSet = serde_json::from_str("[3,2,1,1]").unwrap();
        assert_eq!(back, s);
        assert!(serde_json::from_str::<DocSet>("[]").is_err());
    }

    #[test]
    fn setup_one_has_single_elements() {
        let p = setup(1, &mut rng(1)).unwrap();
        assert_eq!(p.g_list().count(), 1);
        assert_eq!(p.h_list().len(), 1);
        assert!(p.g(1).is_some());
        assert!(p.g(2).is_none());
        assert!(p.alpha_destroyed());
    }

    #[test]
    fn setup_four_skips_index_five() {
        let p = setup(4, &mut rng(2)).unwrap();
        assert_eq!(p.g_indices().collect::<Vec<_>>(), vec![1, 2, 3, 4, 6, 7, 8]);
        assert_eq!(p.g_list().count(), 7);
        assert!(p.g(5).is_none());
        assert!(p.g(9).is_none() && p.g(0).is_none());
        // No stored element equals the product that g_5 would need.
        let stored: Vec<GElem> = p.g_list().copied().collect();
        assert_eq!(stored.len(), 2 * 4 - 1);
    }

    #[test]
    fn setup_rejects_bad_n() {
        assert!(matches!(setup(0, &mut rng(3)), Err(KaseError::Parameter(_))));
        assert!(matches!(setup(MAX_DOCUMENTS + 1, &mut rng(3)), Err(KaseError::Parameter(_))));
    }

    #[test]
    fn power_consistency_through_the_pairing() {
        let p = setup(4, &mut rng(4)).unwrap();
        // Both sides are e(g, h)^(alpha^5).
        assert_eq!(pair(p.g(2).unwrap(), p.h(3).unwrap()), pair(p.g(4).unwrap(), p.h(1).unwrap()));
        assert_eq!(pair(p.g(6).unwrap(), p.h(1).unwrap()), pair(p.g(3).unwrap(), p.h(4).unwrap()));
        assert_ne!(pair(p.g(2).unwrap(), p.h(3).unwrap()), pair(p.g(2).unwrap(), p.h(2).unwrap()));
    }

    #[test]
    fn keygen_samples_distinct_keys() {
        let p = setup(2, &mut rng(5)).unwrap();
        let mut r = rng(6);
        assert_ne!(keygen(&p, &mut r).beta(), keygen(&p, &mut r).beta());
    }

    #[test]
    fn encrypt_is_probabilistic_and_checks_index() {
        let mut r = rng(7);
        let p = setup(3, &mut r).unwrap();
        let sk = keygen(&p, &mut r);
        let a = encrypt(&p, &sk, 2, "kw", &mut r).unwrap();
        let b = encrypt(&p, &sk, 2, "kw", &mut r).unwrap();
        assert!(a.c1 != b.c1 && a.c2 != b.c2 && a.c3 != b.c3);
        assert!(matches!(encrypt(&p, &sk, 4, "kw", &mut r), Err(KaseError::Index { index: 4, n: 3 })));
        assert!(matches!(encrypt(&p, &sk, 0, "kw", &mut r), Err(KaseError::Index { index: 0, n: 3 })));
    }

    #[test]
    fn ciphertext_well_formed_under_sk() {
        let mut r = rng(8);
        let p = setup(5, &mut r).unwrap();
        let sk = keygen(&p, &mut r);
        for i in 1..=5 {
            let c = encrypt(&p, &sk, i, "apple", &mut r).unwrap();
            let base = GElem::generator() * *sk.beta() + *p.g(i).unwrap();
            assert_eq!(pair(&c.c2, &HElem::generator()), pair(&base, &c.c1));
        }
    }

    #[test]
    fn c3_matches_replayed_randomness() {
        let p = setup(4, &mut rng(9)).unwrap();
        let sk = keygen(&p, &mut rng(10));
        let c = encrypt(&p, &sk, 3, "apple", &mut rng(11)).unwrap();
        // Encrypt draws t as its first scalar.
        let t = Scalar::random(&mut rng(11));
        let lhs = c.c3 * pair(p.g(1).unwrap(), p.h(4).unwrap()).pow(&t);
        let rhs = pair(&hash_keyword("apple"), &HElem::generator()).pow(&t);
        assert_eq!(lhs, rhs);
        assert_eq!(c.c1, HElem::generator() * t);
    }

    #[test]
    fn encryptor_matches_plain_encrypt_shape() {
        let mut r = rng(12);
        let p = setup(3, &mut r).unwrap();
        let sk = keygen(&p, &mut r);
        let mut enc = Encryptor::new(&p, &sk);
        let a = enc.encrypt(1, "caf\u{e9}", &mut rng(13)).unwrap();
        let b = encrypt(&p, &sk, 1, "cafe\u{301}", &mut rng(13)).unwrap();
        assert_eq!(a, b);
        assert!(enc.encrypt(9, "x", &mut r).is_err());
    }

    #[test]
    fn extract_singleton_and_homomorphism() {
        let mut r = rng(14);
        let p = setup(6, &mut r).unwrap();
        let sk = keygen(&p, &mut r);
        let single = extract(&p, &sk, &DocSet::new([2], 6).unwrap()).unwrap();
        assert_eq!(single.0, *p.g(5).unwrap() * *sk.beta());
        let s1 = DocSet::new([1, 4], 6).unwrap();
        let s2 = DocSet::new([2, 6], 6).unwrap();
        let both = extract(&p, &sk, &s1.union(&s2)).unwrap();
        assert_eq!(both.0, extract(&p, &sk, &s1).unwrap().0 + extract(&p, &sk, &s2).unwrap().0);
        assert!(matches!(
            extract(&p, &sk, &DocSet::canonical([7]).unwrap()),
            Err(KaseError::Index { index: 7, n: 6 })
        ));
    }

    #[test]
    fn extract_full_set_touches_only_low_powers() {
        for n in 1..=16u32 {
            let s = DocSet::full(n).unwrap();
            let touched: Vec<u32> = s.iter().map(|j| n + 1 - j).collect();
            assert!(touched.iter().all(|&k| (1..=n).contains(&k)));
        }
    }

    #[test]
    fn adjust_indices_never_hit_the_gap() {
        let mut r = rng(15);
        for n in 1..=16u32 {
            for _ in 0..50 {
                let members: Vec<u32> = (1..=n).filter(|_| r.next_u32() % 2 == 0).collect();
                let Ok(s) = DocSet::new(members, n) else { continue };
                for i in s.iter() {
                    for k in adjust_indices(n, i, &s) {
                        assert_ne!(k, n + 1);
                        assert!((1..=2 * n).contains(&k));
                    }
                }
            }
        }
    }

    #[test]
    fn pub_i_requires_membership() {
        let mut r = rng(16);
        let p = setup(4, &mut r).unwrap();
        let s = DocSet::new([1, 2], 4).unwrap();
        assert!(matches!(p.pub_i(3, &s), Err(KaseError::Scope { index: 3 })));
        assert_eq!(p.pub_i(1, &s).unwrap(), *p.g(4).unwrap());
    }

    #[cfg(feature = "test-oracles")]
    #[test]
    fn retained_alpha_reproduces_powers() {
        let (p, alpha) = setup_retaining_alpha(3, &mut rng(17)).unwrap();
        assert!(!p.alpha_destroyed());
        for k in p.g_indices() {
            assert_eq!(*p.g(k).unwrap(), GElem::generator() * alpha.pow(k as u64));
        }
        for k in 1..=3 {
            assert_eq!(*p.h(k).unwrap(), HElem::generator() * alpha.pow(k as u64));
        }
    }
}
