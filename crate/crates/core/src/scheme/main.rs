//! Two-server construction. The trapdoor is blinded by a fresh r that is
//! additively shared between C_main and C_aid; neither server learns r.
//!
//! Per query each server computes pub and its own pub^{r_x} once. For a
//! document i and keyword slot l, C_aid sends
//!
//! * `pub_i^{r_aid}`
//! * `e(c2, pub)^{r_aid}`, evaluated as `e(c2, pub^{r_aid})`
//! * `c3^{r_aid}`
//!
//! and C_main checks `e(Tr_i, c1) / e(c2, pub)^r == c3^r` after recombining
//! both halves of each blinded value.

use rand::{CryptoRng, RngCore};
use serde::{Deserialize, Serialize};

use super::{AggregateKey, DocSet, EncryptedKeyword, PublicParams};
use crate::backbone::{
    hash_keyword, multi_pair, pair, scalar_split_nonzero, GElem, GtElem, HArg, HElem, PreparedH, Scalar,
};
use crate::error::{KaseError, Result};

/// Tr = (k_agg·H(w))^r together with the two shares of r.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TrapdoorBundle {
    pub tr: GElem,
    pub r_main: Scalar,
    pub r_aid: Scalar,
}

/// What C_main receives: (Tr, r_main).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MainView {
    pub tr: GElem,
    pub r_main: Scalar,
}

impl TrapdoorBundle {
    pub fn main_view(&self) -> MainView {
        MainView {
            tr: self.tr,
            r_main: self.r_main,
        }
    }

    /// What C_aid receives.
    pub fn aid_view(&self) -> Scalar {
        self.r_aid
    }
}

/// Fresh r ∈ Z_p^*, split into two non-zero shares.
pub fn trapdoor_main<R: RngCore + CryptoRng>(
    _params: &PublicParams,
    k_agg: &AggregateKey,
    _s: &DocSet,
    w: &str,
    rng: &mut R,
) -> TrapdoorBundle {
    let r = Scalar::random_nonzero(rng);
    let (r_main, r_aid) = scalar_split_nonzero(&r, rng);
    TrapdoorBundle {
        tr: (k_agg.0 + hash_keyword(w)) * r,
        r_main,
        r_aid,
    }
}

/// f(x, a) = a^x.
pub fn f(x: &Scalar, a: &GElem) -> GElem {
    a * x
}

/// f_T(x, b) = b^x.
pub fn f_t(x: &Scalar, b: &GtElem) -> GtElem {
    b.pow(x)
}

/// Tr_i = Tr · pub_i^{r_main} · pub_i^{r_aid}.
pub fn adjust_main(
    params: &PublicParams,
    i: u32,
    s: &DocSet,
    tr: &GElem,
    share_main: &GElem,
    share_aid: &GElem,
) -> Result<GElem> {
    s.check_range(params.n())?;
    if !s.contains(i) {
        return Err(KaseError::Scope { index: i });
    }
    Ok(*tr + *share_main + *share_aid)
}

/// C_aid's contribution for one (document, keyword slot).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MainShareMsg {
    pub doc_index: u32,
    pub slot: u32,
    /// pub_i^{r_aid}
    pub pub_share: GElem,
    /// e(c2, pub)^{r_aid}
    pub c2_share: GtElem,
    /// c3^{r_aid}
    pub c3_share: GtElem,
}

/// Per-query state on C_aid.
pub struct AidQueryContext<'a> {
    params: &'a PublicParams,
    s: DocSet,
    r_aid: Scalar,
    pub_r: PreparedH,
}

impl<'a> AidQueryContext<'a> {
    pub fn new(params: &'a PublicParams, s: DocSet, r_aid: Scalar) -> Result<Self> {
        let pub_s = params.pub_for(&s)?;
        let pub_r = PreparedH::new(&(&pub_s * &r_aid));
        Ok(AidQueryContext {
            params,
            s,
            r_aid,
            pub_r,
        })
    }

    pub fn set(&self) -> &DocSet {
        &self.s
    }

    /// One message per stored ciphertext of document i.
    pub fn shares_for_doc(&self, i: u32, cts: &[EncryptedKeyword]) -> Result<Vec<MainShareMsg>> {
        let pub_share = f(&self.r_aid, &self.params.pub_i(i, &self.s)?);
        Ok(cts
            .iter()
            .enumerate()
            .map(|(slot, c)| MainShareMsg {
                doc_index: i,
                slot: slot as u32,
                pub_share,
                c2_share: multi_pair(&[(c.c2, HArg::Prepared(&self.pub_r))]),
                c3_share: f_t(&self.r_aid, &c.c3),
            })
            .collect())
    }
}

/// Per-query state on C_main.
pub struct MainQueryContext<'a> {
    params: &'a PublicParams,
    s: DocSet,
    view: MainView,
    pub_r: PreparedH,
}

impl<'a> MainQueryContext<'a> {
    pub fn new(params: &'a PublicParams, s: DocSet, view: MainView) -> Result<Self> {
        let pub_s = params.pub_for(&s)?;
        let pub_r = PreparedH::new(&(&pub_s * &view.r_main));
        Ok(MainQueryContext {
            params,
            s,
            view,
            pub_r,
        })
    }

    pub fn set(&self) -> &DocSet {
        &self.s
    }

    /// Tr_i from C_main's own share and the received aid share.
    pub fn adjust(&self, i: u32, aid_pub_share: &GElem) -> Result<GElem> {
        let share_main = f(&self.view.r_main, &self.params.pub_i(i, &self.s)?);
        adjust_main(self.params, i, &self.s, &self.view.tr, &share_main, aid_pub_share)
    }

    /// Test for one slot, given its aid share message.
    pub fn test(&self, tr_i: &GElem, c: &EncryptedKeyword, aid: &MainShareMsg) -> bool {
        recombined_test(tr_i, c, HArg::Prepared(&self.pub_r), &self.view.r_main, aid)
    }

    /// True if any slot of document i matches. `shares` must hold one
    /// message per slot, in slot order.
    pub fn matches(&self, i: u32, cts: &[EncryptedKeyword], shares: &[&MainShareMsg]) -> Result<bool> {
        if cts.is_empty() {
            return Ok(false);
        }
        if shares.len() != cts.len() {
            return Err(KaseError::protocol(format!(
                "document {i}: {} aid shares for {} ciphertexts",
                shares.len(),
                cts.len()
            )));
        }
        let tr_i = self.adjust(i, &shares[0].pub_share)?;
        Ok(cts.iter().zip(shares).any(|(c, sh)| self.test(&tr_i, c, sh)))
    }
}

/// e(Tr_i, c1) / (e(c2, pub^{r_main}) · e(c2,pub)^{r_aid}) == c3^{r_main} · c3^{r_aid}.
fn recombined_test(tr_i: &GElem, c: &EncryptedKeyword, pub_r_main: HArg<'_>, r_main: &Scalar, aid: &MainShareMsg) -> bool {
    let lhs = multi_pair(&[(*tr_i, HArg::Plain(&c.c1)), (-c.c2, pub_r_main)]) / aid.c2_share;
    let rhs = f_t(r_main, &c.c3) * aid.c3_share;
    lhs == rhs
}

/// One-shot Test for a single ciphertext, computing pub from S.
pub fn test_main(
    params: &PublicParams,
    tr_i: &GElem,
    s: &DocSet,
    c: &EncryptedKeyword,
    r_main: &Scalar,
    aid: &MainShareMsg,
) -> Result<bool> {
    let pub_r: HElem = &params.pub_for(s)? * r_main;
    Ok(recombined_test(tr_i, c, HArg::Plain(&pub_r), r_main, aid))
}

/// One-shot aid share for a single ciphertext, computing pub_i and pub from S.
pub fn aid_share(params: &PublicParams, s: &DocSet, c: &EncryptedKeyword, slot: u32, r_aid: &Scalar) -> Result<MainShareMsg> {
    let i = c.doc_index;
    let pub_share = f(r_aid, &params.pub_i(i, s)?);
    let pub_r: HElem = &params.pub_for(s)? * r_aid;
    Ok(MainShareMsg {
        doc_index: i,
        slot,
        pub_share,
        c2_share: pair(&c.c2, &pub_r),
        c3_share: f_t(r_aid, &c.c3),
    })
}
