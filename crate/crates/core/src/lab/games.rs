//! Challenger for the keyword-privacy and trapdoor-privacy games, with
//! pluggable adversaries.
//!
//! An adversary is driven through three phases: `init` (declarations),
//! `query` (oracle access) and `guess`. Any oracle call that breaks the
//! game's rules returns an error; an adversary that propagates it aborts the
//! trial, and aborted trials are left out of N.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::Serialize;

use super::attacks::{attack_ciphertext_ratio, attack_deterministic_trapdoor, Recovery, WeakSharedRandomnessVariant};
use crate::backbone::GElem;
use crate::error::{KaseError, Result};
use crate::scheme::first::trapdoor;
use crate::scheme::main::{trapdoor_main, MainView};
use crate::scheme::{encrypt, extract, keygen, setup, AggregateKey, DocSet, EncryptedKeyword, PublicParams, SecretKey};

/// The scheme under attack.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    First,
    Main,
    /// Shared t per document, deterministic trapdoors.
    WeakSharedRandomness,
}

impl Scheme {
    pub fn as_str(&self) -> &'static str {
        match self {
            Scheme::First => "first",
            Scheme::Main => "main",
            Scheme::WeakSharedRandomness => "weak-shared-randomness",
        }
    }
}

impl std::str::FromStr for Scheme {
    type Err = KaseError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "first" => Ok(Scheme::First),
            "main" => Ok(Scheme::Main),
            "weak" | "weak-shared-randomness" => Ok(Scheme::WeakSharedRandomness),
            other => Err(KaseError::param(format!("unknown scheme `{other}`"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GameVerdict {
    /// Advantage inside the 3-sigma band around zero.
    Chance,
    /// Advantage outside the band.
    Distinguishing,
    /// Every trial aborted.
    Void,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GameTranscript {
    pub game: String,
    pub scheme: String,
    pub adversary: String,
    pub n: u32,
    #[serde(rename = "N")]
    pub trials: u32,
    pub wins: u32,
    pub aborts: u32,
    pub advantage: f64,
    pub ci: f64,
    pub verdict: GameVerdict,
}

impl GameTranscript {
    pub fn new(game: &str, scheme: Scheme, adversary: &str, n: u32, trials: u32, wins: u32, aborts: u32) -> Self {
        let (advantage, ci, verdict) = if trials == 0 {
            (0.0, 0.5, GameVerdict::Void)
        } else {
            let adv = (wins as f64 / trials as f64 - 0.5).abs();
            let ci = 3.0 * (0.25 / trials as f64).sqrt();
            (adv, ci, if adv <= ci { GameVerdict::Chance } else { GameVerdict::Distinguishing })
        };
        GameTranscript {
            game: game.to_string(),
            scheme: scheme.as_str().to_string(),
            adversary: adversary.to_string(),
            n,
            trials,
            wins,
            aborts,
            advantage,
            ci,
            verdict,
        }
    }

    pub fn win_rate(&self) -> f64 {
        if self.trials == 0 {
            0.0
        } else {
            self.wins as f64 / self.trials as f64
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("transcripts serialise")
    }
}

/// Lowercase keyword of the given length.
pub fn random_keyword<R: RngCore>(len: usize, rng: &mut R) -> String {
    (0..len.max(1)).map(|_| rng.gen_range(b'a'..=b'z') as char).collect()
}

/// A keyword of the same length as `w` that differs from it.
fn replacement_keyword<R: RngCore>(w: &str, rng: &mut R) -> String {
    loop {
        let r = random_keyword(w.chars().count(), rng);
        if r != w {
            return r;
        }
    }
}

enum Encrypter {
    Fresh,
    Weak(WeakSharedRandomnessVariant),
}

impl Encrypter {
    fn for_scheme(scheme: Scheme) -> Self {
        match scheme {
            Scheme::WeakSharedRandomness => Encrypter::Weak(WeakSharedRandomnessVariant::new()),
            _ => Encrypter::Fresh,
        }
    }

    fn encrypt(&mut self, params: &PublicParams, sk: &SecretKey, i: u32, w: &str, rng: &mut ChaCha20Rng) -> Result<EncryptedKeyword> {
        match self {
            Encrypter::Fresh => encrypt(params, sk, i, w, rng),
            Encrypter::Weak(v) => v.encrypt(params, sk, i, w, rng),
        }
    }
}

// ---- keyword privacy ----

pub struct KeywordOracles<'a> {
    params: &'a PublicParams,
    sk: &'a SecretKey,
    enc: &'a mut Encrypter,
    i_star: u32,
    extracts_left: u32,
    rng: ChaCha20Rng,
}

impl KeywordOracles<'_> {
    /// At most n-1 calls, and S must avoid i*.
    pub fn extract(&mut self, s: &DocSet) -> Result<AggregateKey> {
        if self.extracts_left == 0 {
            return Err(KaseError::param("extract budget of n-1 queries exhausted"));
        }
        if s.contains(self.i_star) {
            return Err(KaseError::param("extract query covers the challenge index"));
        }
        self.extracts_left -= 1;
        extract(self.params, self.sk, s)
    }

    pub fn encrypt(&mut self, i: u32, w: &str) -> Result<EncryptedKeyword> {
        self.enc.encrypt(self.params, self.sk, i, w, &mut self.rng)
    }
}

pub trait KeywordAdversary {
    fn name(&self) -> &str;
    /// Declares i*.
    fn init(&mut self, n: u32, rng: &mut ChaCha20Rng) -> u32;
    /// Query phase; returns the challenge keyword w*.
    fn query(&mut self, params: &PublicParams, oracles: &mut KeywordOracles<'_>, rng: &mut ChaCha20Rng) -> Result<String>;
    /// 0 if the challenge encrypts w*, 1 if a random keyword.
    fn guess(&mut self, challenge: &EncryptedKeyword, rng: &mut ChaCha20Rng) -> u8;
}

pub fn run_keyword_privacy_game<R: RngCore>(
    scheme: Scheme,
    n: u32,
    trials: u32,
    adversary: &mut dyn KeywordAdversary,
    rng: &mut R,
) -> Result<GameTranscript> {
    let (mut wins, mut valid, mut aborts) = (0, 0, 0);
    for _ in 0..trials {
        let mut trng = ChaCha20Rng::seed_from_u64(rng.next_u64());
        let mut arng = ChaCha20Rng::seed_from_u64(rng.next_u64());
        let i_star = adversary.init(n, &mut arng);
        if i_star == 0 || i_star > n {
            aborts += 1;
            continue;
        }
        let params = setup(n, &mut trng)?;
        let sk = keygen(&params, &mut trng);
        let mut enc = Encrypter::for_scheme(scheme);
        let mut oracles = KeywordOracles {
            params: &params,
            sk: &sk,
            enc: &mut enc,
            i_star,
            extracts_left: n - 1,
            rng: ChaCha20Rng::seed_from_u64(trng.next_u64()),
        };
        let Ok(w_star) = adversary.query(&params, &mut oracles, &mut arng) else {
            aborts += 1;
            continue;
        };
        let theta: u8 = trng.gen_range(0..=1);
        let w_theta = if theta == 0 { w_star.clone() } else { replacement_keyword(&w_star, &mut trng) };
        let challenge = enc.encrypt(&params, &sk, i_star, &w_theta, &mut trng)?;
        valid += 1;
        if adversary.guess(&challenge, &mut arng) == theta {
            wins += 1;
        }
    }
    Ok(GameTranscript::new("keyword-privacy", scheme, adversary.name(), n, valid, wins, aborts))
}

/// Guesses with a fair coin.
pub struct RandomGuessAdversary;

impl KeywordAdversary for RandomGuessAdversary {
    fn name(&self) -> &str {
        "random-guess"
    }
    fn init(&mut self, n: u32, rng: &mut ChaCha20Rng) -> u32 {
        rng.gen_range(1..=n)
    }
    fn query(&mut self, _: &PublicParams, _: &mut KeywordOracles<'_>, rng: &mut ChaCha20Rng) -> Result<String> {
        Ok(random_keyword(8, rng))
    }
    fn guess(&mut self, _: &EncryptedKeyword, rng: &mut ChaCha20Rng) -> u8 {
        rng.gen_range(0..=1)
    }
}

/// Encrypts a known keyword at i*, then runs the ciphertext-ratio attack on
/// the challenge. Says "random" whenever the attack is open.
#[derive(Default)]
pub struct RatioAdversary {
    i_star: u32,
    w_star: String,
    known: Option<(EncryptedKeyword, String)>,
}

impl KeywordAdversary for RatioAdversary {
    fn name(&self) -> &str {
        "ciphertext-ratio"
    }
    fn init(&mut self, n: u32, rng: &mut ChaCha20Rng) -> u32 {
        self.i_star = rng.gen_range(1..=n);
        self.i_star
    }
    fn query(&mut self, _: &PublicParams, oracles: &mut KeywordOracles<'_>, rng: &mut ChaCha20Rng) -> Result<String> {
        let w_known = random_keyword(8, rng);
        self.known = Some((oracles.encrypt(self.i_star, &w_known)?, w_known));
        self.w_star = random_keyword(8, rng);
        Ok(self.w_star.clone())
    }
    fn guess(&mut self, challenge: &EncryptedKeyword, _: &mut ChaCha20Rng) -> u8 {
        let Some((c_known, w_known)) = &self.known else { return 1 };
        match attack_ciphertext_ratio(challenge, c_known, w_known, &[&self.w_star]) {
            Ok(Recovery::Keyword(_)) => 0,
            _ => 1,
        }
    }
}

// ---- trapdoor privacy ----

/// What the adversary sees of a trapdoor. For the main construction this is
/// C_main's view: the blinded trapdoor and r_main.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TrapdoorView {
    Deterministic(GElem),
    Main(MainView),
}

impl TrapdoorView {
    pub fn tr(&self) -> &GElem {
        match self {
            TrapdoorView::Deterministic(t) => t,
            TrapdoorView::Main(v) => &v.tr,
        }
    }
}

fn issue_trapdoor(scheme: Scheme, params: &PublicParams, k: &AggregateKey, s: &DocSet, w: &str, rng: &mut ChaCha20Rng) -> TrapdoorView {
    match scheme {
        Scheme::Main => TrapdoorView::Main(trapdoor_main(params, k, s, w, rng).main_view()),
        _ => TrapdoorView::Deterministic(trapdoor(params, k, s, w).0),
    }
}

pub struct TrapdoorOracles<'a> {
    scheme: Scheme,
    params: &'a PublicParams,
    sk: &'a SecretKey,
    enc: &'a mut Encrypter,
    s_star: &'a DocSet,
    w_star: &'a str,
    trapdoors_left: usize,
    rng: ChaCha20Rng,
}

impl TrapdoorOracles<'_> {
    /// At most n-|S*| calls.
    pub fn trapdoor(&mut self, s: &DocSet, w: &str) -> Result<TrapdoorView> {
        if self.trapdoors_left == 0 {
            return Err(KaseError::param("trapdoor budget of n-|S*| queries exhausted"));
        }
        self.trapdoors_left -= 1;
        let k = extract(self.params, self.sk, s)?;
        Ok(issue_trapdoor(self.scheme, self.params, &k, s, w, &mut self.rng))
    }

    /// Requires w != w* and i outside S*.
    pub fn encrypt(&mut self, i: u32, w: &str) -> Result<EncryptedKeyword> {
        if w == self.w_star {
            return Err(KaseError::param("encrypt query for the challenge keyword"));
        }
        if self.s_star.contains(i) {
            return Err(KaseError::param("encrypt query inside the challenge set"));
        }
        self.enc.encrypt(self.params, self.sk, i, w, &mut self.rng)
    }
}

pub trait TrapdoorAdversary {
    fn name(&self) -> &str;
    /// Declares S* and w*.
    fn init(&mut self, n: u32, rng: &mut ChaCha20Rng) -> (Vec<u32>, String);
    fn query(&mut self, params: &PublicParams, oracles: &mut TrapdoorOracles<'_>, rng: &mut ChaCha20Rng) -> Result<()>;
    fn guess(&mut self, challenge: &TrapdoorView, rng: &mut ChaCha20Rng) -> u8;
}

pub fn run_trapdoor_privacy_game<R: RngCore>(
    scheme: Scheme,
    n: u32,
    trials: u32,
    adversary: &mut dyn TrapdoorAdversary,
    rng: &mut R,
) -> Result<GameTranscript> {
    let (mut wins, mut valid, mut aborts) = (0, 0, 0);
    for _ in 0..trials {
        let mut trng = ChaCha20Rng::seed_from_u64(rng.next_u64());
        let mut arng = ChaCha20Rng::seed_from_u64(rng.next_u64());
        let (s_star, w_star) = adversary.init(n, &mut arng);
        let Ok(s_star) = DocSet::new(s_star, n) else {
            aborts += 1;
            continue;
        };
        let params = setup(n, &mut trng)?;
        let sk = keygen(&params, &mut trng);
        let mut enc = Encrypter::for_scheme(scheme);
        let mut oracles = TrapdoorOracles {
            scheme,
            params: &params,
            sk: &sk,
            enc: &mut enc,
            s_star: &s_star,
            w_star: &w_star,
            trapdoors_left: n as usize - s_star.len(),
            rng: ChaCha20Rng::seed_from_u64(trng.next_u64()),
        };
        if adversary.query(&params, &mut oracles, &mut arng).is_err() {
            aborts += 1;
            continue;
        }
        let theta: u8 = trng.gen_range(0..=1);
        let w_theta = if theta == 0 { w_star.clone() } else { replacement_keyword(&w_star, &mut trng) };
        let k_star = extract(&params, &sk, &s_star)?;
        let challenge = issue_trapdoor(scheme, &params, &k_star, &s_star, &w_theta, &mut trng);
        valid += 1;
        if adversary.guess(&challenge, &mut arng) == theta {
            wins += 1;
        }
    }
    Ok(GameTranscript::new("trapdoor-privacy", scheme, adversary.name(), n, valid, wins, aborts))
}

/// Fair coin, declares a random proper subset.
pub struct RandomTrapdoorGuesser;

impl TrapdoorAdversary for RandomTrapdoorGuesser {
    fn name(&self) -> &str {
        "random-guess"
    }
    fn init(&mut self, n: u32, rng: &mut ChaCha20Rng) -> (Vec<u32>, String) {
        (vec![rng.gen_range(1..=n)], random_keyword(8, rng))
    }
    fn query(&mut self, _: &PublicParams, _: &mut TrapdoorOracles<'_>, _: &mut ChaCha20Rng) -> Result<()> {
        Ok(())
    }
    fn guess(&mut self, _: &TrapdoorView, rng: &mut ChaCha20Rng) -> u8 {
        rng.gen_range(0..=1)
    }
}

/// Asks for a trapdoor on S* for a keyword of its choice, then runs the
/// deterministic-trapdoor extraction on the challenge.
#[derive(Default)]
pub struct ExtractionAdversary {
    s_star: Vec<u32>,
    w_star: String,
    known: Option<(TrapdoorView, String)>,
}

impl TrapdoorAdversary for ExtractionAdversary {
    fn name(&self) -> &str {
        "trapdoor-extraction"
    }
    fn init(&mut self, n: u32, rng: &mut ChaCha20Rng) -> (Vec<u32>, String) {
        // |S*| < n keeps the trapdoor budget positive.
        let size = rng.gen_range(1..n.max(2)) as usize;
        let mut all: Vec<u32> = (1..=n).collect();
        rand::seq::SliceRandom::shuffle(all.as_mut_slice(), rng);
        all.truncate(size.min(n as usize));
        self.s_star = all;
        self.w_star = random_keyword(8, rng);
        (self.s_star.clone(), self.w_star.clone())
    }
    fn query(&mut self, params: &PublicParams, oracles: &mut TrapdoorOracles<'_>, rng: &mut ChaCha20Rng) -> Result<()> {
        let s = DocSet::new(self.s_star.iter().copied(), params.n())?;
        let w_known = loop {
            let w = random_keyword(8, rng);
            if w != self.w_star {
                break w;
            }
        };
        self.known = Some((oracles.trapdoor(&s, &w_known)?, w_known));
        Ok(())
    }
    fn guess(&mut self, challenge: &TrapdoorView, _: &mut ChaCha20Rng) -> u8 {
        let Some((known, w_known)) = &self.known else { return 1 };
        match attack_deterministic_trapdoor(challenge.tr(), known.tr(), w_known, &[&self.w_star]) {
            Recovery::Keyword(_) => 0,
            Recovery::Open => 1,
        }
    }
}
