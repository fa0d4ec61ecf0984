//! wasm-bindgen exports for the static demo page in `www/`.
//!
//! Everything runs in one process, so the demo calls the query contexts
//! directly instead of going through the server harness.

use std::collections::BTreeMap;

use kase_core::bench::size_report;
use kase_core::format::Construction;
use kase_core::lab::{
    run_keyword_privacy_game, run_trapdoor_privacy_game, ExtractionAdversary, KeywordAdversary, RandomGuessAdversary,
    RandomTrapdoorGuesser, RatioAdversary, Scheme, TrapdoorAdversary,
};
use kase_core::scheme::first::{trapdoor, FirstQueryContext};
use kase_core::scheme::main::{trapdoor_main, AidQueryContext, MainQueryContext};
use kase_core::scheme::{extract, keygen, setup, DocSet, EncryptedKeyword, Encryptor};
use rand::rngs::OsRng;
use serde::Serialize;
use wasm_bindgen::prelude::*;

#[derive(Serialize)]
struct SearchOutcome {
    construction: Construction,
    n: u32,
    set: DocSet,
    keyword: String,
    ciphertexts: usize,
    trapdoor_bytes: usize,
    matches: Vec<u32>,
}

/// Lines of `doc_index keyword`, separated by a tab or spaces.
fn parse_corpus(text: &str) -> Result<Vec<(u32, String)>, String> {
    let mut out = Vec::new();
    for (k, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (doc, kw) = line
            .split_once(char::is_whitespace)
            .ok_or_else(|| format!("line {}: expected `doc_index keyword`", k + 1))?;
        let doc = doc.parse().map_err(|_| format!("line {}: `{doc}` is not a document index", k + 1))?;
        out.push((doc, kw.trim().to_string()));
    }
    Ok(out)
}

fn parse_set(text: &str, n: u32) -> Result<DocSet, String> {
    let text = text.trim();
    if text.is_empty() || text == "all" {
        return DocSet::full(n).map_err(|e| e.to_string());
    }
    let mut v = Vec::new();
    for part in text.split(',').map(str::trim) {
        let bad = || format!("cannot read `{part}` in the document set");
        match part.split_once('-') {
            Some((a, b)) => {
                let (a, b): (u32, u32) = (a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?);
                v.extend(a..=b);
            }
            None => v.push(part.parse().map_err(|_| bad())?),
        }
    }
    DocSet::new(v, n).map_err(|e| e.to_string())
}

/// Fresh parameters and owner key, the corpus encrypted, an aggregate key
/// for `set`, and one search for `keyword`. Returns the outcome as JSON.
pub fn run_search(corpus: &str, n: u32, set: &str, keyword: &str, construction: &str) -> Result<String, String> {
    let construction: Construction = construction.parse().map_err(|e: kase_core::KaseError| e.to_string())?;
    let entries = parse_corpus(corpus)?;
    let mut rng = OsRng;
    let err = |e: kase_core::KaseError| e.to_string();
    let params = setup(n, &mut rng).map_err(err)?;
    let sk = keygen(&params, &mut rng);
    let s = parse_set(set, n)?;

    let mut docs: BTreeMap<u32, Vec<EncryptedKeyword>> = BTreeMap::new();
    let mut enc = Encryptor::new(&params, &sk);
    for (i, w) in &entries {
        docs.entry(*i).or_default().push(enc.encrypt(*i, w, &mut rng).map_err(err)?);
    }
    let k = extract(&params, &sk, &s).map_err(err)?;
    let in_scope = || s.iter().filter_map(|i| docs.get(&i).map(|c| (i, c.as_slice())));

    let mut matches = Vec::new();
    let trapdoor_bytes;
    match construction {
        Construction::First => {
            let tr = trapdoor(&params, &k, &s, keyword);
            trapdoor_bytes = tr.0.to_bytes().len();
            let ctx = FirstQueryContext::new(&params, s.clone(), tr).map_err(err)?;
            for (i, cts) in in_scope() {
                if ctx.matches(i, cts).map_err(err)? {
                    matches.push(i);
                }
            }
        }
        Construction::Main => {
            let b = trapdoor_main(&params, &k, &s, keyword, &mut rng);
            trapdoor_bytes = b.tr.to_bytes().len() + b.r_main.to_bytes().len() + b.r_aid.to_bytes().len();
            let aid = AidQueryContext::new(&params, s.clone(), b.r_aid).map_err(err)?;
            let main = MainQueryContext::new(&params, s.clone(), b.main_view()).map_err(err)?;
            for (i, cts) in in_scope() {
                let shares = aid.shares_for_doc(i, cts).map_err(err)?;
                let refs: Vec<_> = shares.iter().collect();
                if main.matches(i, cts, &refs).map_err(err)? {
                    matches.push(i);
                }
            }
        }
    }
    let out = SearchOutcome {
        construction,
        n,
        set: s,
        keyword: keyword.to_string(),
        ciphertexts: entries.len(),
        trapdoor_bytes,
        matches,
    };
    serde_json::to_string(&out).map_err(|e| e.to_string())
}

/// One privacy game; `game` is `keyword-privacy` or `trapdoor-privacy`,
/// `adversary` is `ratio`, `extraction` or `random`.
pub fn run_attack(game: &str, scheme: &str, adversary: &str, n: u32, trials: u32) -> Result<String, String> {
    let scheme: Scheme = scheme.parse().map_err(|e: kase_core::KaseError| e.to_string())?;
    let mut rng = OsRng;
    let t = match (game, adversary) {
        ("keyword-privacy", "ratio" | "random") => {
            let mut adv: Box<dyn KeywordAdversary> = if adversary == "ratio" {
                Box::new(RatioAdversary::default())
            } else {
                Box::new(RandomGuessAdversary)
            };
            run_keyword_privacy_game(scheme, n, trials, adv.as_mut(), &mut rng)
        }
        ("trapdoor-privacy", "extraction" | "random") => {
            let mut adv: Box<dyn TrapdoorAdversary> = if adversary == "extraction" {
                Box::new(ExtractionAdversary::default())
            } else {
                Box::new(RandomTrapdoorGuesser)
            };
            run_trapdoor_privacy_game(scheme, n, trials, adv.as_mut(), &mut rng)
        }
        _ => return Err(format!("adversary `{adversary}` does not play `{game}`")),
    };
    t.map(|t| t.to_json()).map_err(|e| e.to_string())
}

/// Serialized sizes at each comma-separated n.
pub fn run_size_report(ns: &str) -> Result<String, String> {
    let ns: Vec<u32> = ns
        .split(',')
        .map(|v| v.trim().parse().map_err(|_| format!("`{v}` is not a document count")))
        .collect::<Result<_, _>>()?;
    let recs = size_report(&ns, &mut OsRng).map_err(|e| e.to_string())?;
    serde_json::to_string_pretty(&recs).map_err(|e| e.to_string())
}

#[wasm_bindgen]
pub fn search(corpus: &str, n: u32, set: &str, keyword: &str, construction: &str) -> Result<String, JsError> {
    run_search(corpus, n, set, keyword, construction).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn attack(game: &str, scheme: &str, adversary: &str, n: u32, trials: u32) -> Result<String, JsError> {
    run_attack(game, scheme, adversary, n, trials).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = sizeReport)]
pub fn size_report_js(ns: &str) -> Result<String, JsError> {
    run_size_report(ns).map_err(|e| JsError::new(&e))
}
