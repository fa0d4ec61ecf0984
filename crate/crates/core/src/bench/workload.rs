//! Fixtures and timed closures for each algorithm.

use std::hint::black_box;
use std::sync::Arc;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::{CryptoRng, RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::Serialize;

use super::Algorithm;
use crate::backbone::PreparedH;
use crate::error::Result;
use crate::format::Construction;
use crate::harness::{
    first_request, main_requests, search_first, search_main, Deployment, IndexStore, ServerConfig, TransportKind,
};
use crate::scheme::first::{adjust, test_prepared, trapdoor};
use crate::scheme::main::{adjust_main, f, trapdoor_main, AidQueryContext, MainQueryContext};
use crate::scheme::{encrypt, extract, keygen, setup, DocSet, PublicParams, SecretKey};

pub(super) type Job = Box<dyn FnMut() -> Result<()>>;

/// Document count used when the axis is not n.
const FIXED_N: u32 = 16;
/// Keyword absent from every benchmark corpus, so Test never short-cuts.
const ABSENT: &str = "absent-keyword";

struct Keys {
    params: Arc<PublicParams>,
    sk: SecretKey,
}

fn keys(n: u32, rng: &mut ChaCha20Rng) -> Result<Keys> {
    let params = setup(n, rng)?;
    let sk = keygen(&params, rng);
    Ok(Keys {
        params: Arc::new(params),
        sk,
    })
}

fn vocabulary(k: u32) -> Vec<String> {
    (0..k).map(|j| format!("kw{j:05}")).collect()
}

/// Keyword the end-to-end benchmarks search for.
const QUERY: &str = "query";

/// `k` ciphertexts spread round-robin over FIXED_N documents. All but the
/// last few come from a 50-word vocabulary; the last min(k, n/2) are the
/// query keyword, so each match sits in its document's final slot and a
/// search cannot stop early.
fn spread_corpus(keys: &Keys, k: u32, rng: &mut ChaCha20Rng) -> Result<IndexStore> {
    let n = keys.params.n();
    let words = vocabulary(50);
    let hits = k.min(n / 2);
    let entries: Vec<(u32, &str)> = (0..k)
        .map(|j| {
            let w = if j >= k - hits { QUERY } else { words[(j % 50) as usize].as_str() };
            (j % n + 1, w)
        })
        .collect();
    IndexStore::encrypt_corpus(&keys.params, &keys.sk, "bench", entries, rng)
}

pub(super) fn prepare<R: RngCore + CryptoRng>(
    algorithm: Algorithm,
    construction: Construction,
    value: u32,
    all_values: &[u32],
    rng: &mut R,
) -> Result<Job> {
    let mut rng = ChaCha20Rng::seed_from_u64(rng.next_u64());
    let main = construction == Construction::Main;
    Ok(match algorithm {
        Algorithm::Setup => Box::new(move || {
            black_box(setup(value, &mut rng)?);
            Ok(())
        }),
        Algorithm::Encrypt => {
            let k = keys(FIXED_N, &mut rng)?;
            let words = vocabulary(value);
            Box::new(move || {
                for w in &words {
                    black_box(encrypt(&k.params, &k.sk, 1, w, &mut rng)?);
                }
                Ok(())
            })
        }
        Algorithm::Extract => {
            let n = *all_values.last().expect("axis checked");
            let k = keys(n, &mut rng)?;
            let s = random_set(n, value, &mut rng)?;
            Box::new(move || {
                black_box(extract(&k.params, &k.sk, &s)?);
                Ok(())
            })
        }
        Algorithm::Trapdoor => {
            let k = keys(value, &mut rng)?;
            let s = random_set(value, value.div_ceil(2), &mut rng)?;
            let agg = extract(&k.params, &k.sk, &s)?;
            Box::new(move || {
                if main {
                    black_box(trapdoor_main(&k.params, &agg, &s, "query", &mut rng));
                } else {
                    black_box(trapdoor(&k.params, &agg, &s, "query"));
                }
                Ok(())
            })
        }
        Algorithm::Adjust => {
            let n = *all_values.last().expect("axis checked");
            let k = keys(n, &mut rng)?;
            let s = random_set(n, value, &mut rng)?;
            let i = s.as_slice()[0];
            let agg = extract(&k.params, &k.sk, &s)?;
            let tr = trapdoor(&k.params, &agg, &s, "query");
            let b = trapdoor_main(&k.params, &agg, &s, "query", &mut rng);
            let aid_share = f(&b.r_aid, &k.params.pub_i(i, &s)?);
            Box::new(move || {
                if main {
                    // C_main's side: pub_i^{r_main}, then the recombination.
                    let own = f(&b.r_main, &k.params.pub_i(i, &s)?);
                    black_box(adjust_main(&k.params, i, &s, &b.tr, &own, &aid_share)?);
                } else {
                    black_box(adjust(&k.params, i, &s, &tr)?);
                }
                Ok(())
            })
        }
        Algorithm::Test => test_job(main, value, rng)?,
        Algorithm::SearchE2e => {
            let k = keys(FIXED_N, &mut rng)?;
            let store = Arc::new(spread_corpus(&k, value, &mut rng)?);
            let d = Deployment::start(k.params.clone(), store.clone(), store, TransportKind::Direct, ServerConfig::default())?;
            let s = DocSet::full(FIXED_N)?;
            let agg = extract(&k.params, &k.sk, &s)?;
            Box::new(move || {
                if main {
                    let (m, a) = main_requests(&k.params, &agg, &s, QUERY, &mut rng);
                    black_box(search_main(d.main.as_ref(), d.aid.as_ref(), m, a)?);
                } else {
                    let q = first_request(&k.params, &agg, &s, QUERY, &mut rng);
                    black_box(search_first(d.main.as_ref(), q)?);
                }
                d.transcript.clear();
                Ok(())
            })
        }
    })
}

/// `value` ciphertexts in document 1, all tested against one trapdoor for
/// an absent keyword. For the main construction C_aid's shares are
/// precomputed; only C_main's work is timed.
fn test_job(main: bool, value: u32, mut rng: ChaCha20Rng) -> Result<Job> {
    let k = keys(FIXED_N, &mut rng)?;
    let words = vocabulary(value);
    let cts = words
        .iter()
        .map(|w| encrypt(&k.params, &k.sk, 1, w, &mut rng))
        .collect::<Result<Vec<_>>>()?;
    let s = DocSet::full(FIXED_N)?;
    let agg = extract(&k.params, &k.sk, &s)?;
    if main {
        let b = trapdoor_main(&k.params, &agg, &s, ABSENT, &mut rng);
        let shares = AidQueryContext::new(&k.params, s.clone(), b.r_aid)?.shares_for_doc(1, &cts)?;
        let view = b.main_view();
        Ok(Box::new(move || {
            let ctx = MainQueryContext::new(&k.params, s.clone(), view)?;
            let tr_i = ctx.adjust(1, &shares[0].pub_share)?;
            for (c, sh) in cts.iter().zip(&shares) {
                black_box(ctx.test(&tr_i, c, sh));
            }
            Ok(())
        }))
    } else {
        let pub_s = PreparedH::new(&k.params.pub_for(&s)?);
        let tr_i = adjust(&k.params, 1, &s, &trapdoor(&k.params, &agg, &s, ABSENT))?;
        Ok(Box::new(move || {
            for c in &cts {
                black_box(test_prepared(&tr_i, &pub_s, c));
            }
            Ok(())
        }))
    }
}

fn random_set(n: u32, size: u32, rng: &mut ChaCha20Rng) -> Result<DocSet> {
    let mut all: Vec<u32> = (1..=n).collect();
    all.shuffle(rng);
    all.truncate(size.min(n) as usize);
    DocSet::new(all, n)
}

/// Median end-to-end search times for both constructions over one corpus.
#[derive(Clone, Debug, Serialize)]
pub struct SearchComparison {
    pub keywords: u32,
    pub reps: usize,
    pub first_us: f64,
    pub main_us: f64,
    pub ratio: f64,
    pub matches: usize,
}

/// Builds one corpus of `keywords` ciphertexts and times both searches on
/// it, alternating between the constructions.
pub fn compare_search<R: RngCore + CryptoRng>(keywords: u32, reps: usize, rng: &mut R) -> Result<SearchComparison> {
    let mut rng = ChaCha20Rng::seed_from_u64(rng.next_u64());
    let k = keys(FIXED_N, &mut rng)?;
    let store = Arc::new(spread_corpus(&k, keywords, &mut rng)?);
    let d = Deployment::start(k.params.clone(), store.clone(), store, TransportKind::Direct, ServerConfig::default())?;
    let s = DocSet::full(FIXED_N)?;
    let agg = extract(&k.params, &k.sk, &s)?;
    let (mut first, mut main) = (Vec::new(), Vec::new());
    let mut matches = 0;
    for _ in 0..reps.max(1) {
        let q = first_request(&k.params, &agg, &s, QUERY, &mut rng);
        let t = Instant::now();
        let a = search_first(d.main.as_ref(), q)?;
        first.push(t.elapsed().as_secs_f64() * 1e6);

        let (m, x) = main_requests(&k.params, &agg, &s, QUERY, &mut rng);
        let t = Instant::now();
        let b = search_main(d.main.as_ref(), d.aid.as_ref(), m, x)?;
        main.push(t.elapsed().as_secs_f64() * 1e6);
        d.transcript.clear();

        if a.matches != b.matches {
            return Err(crate::KaseError::protocol("the two constructions disagree on the benchmark corpus"));
        }
        matches = a.matches.len();
    }
    first.sort_by(f64::total_cmp);
    main.sort_by(f64::total_cmp);
    let (first_us, main_us) = (super::percentile(&first, 0.5), super::percentile(&main, 0.5));
    Ok(SearchComparison {
        keywords,
        reps: reps.max(1),
        first_us,
        main_us,
        ratio: main_us / first_us,
        matches,
    })
}
