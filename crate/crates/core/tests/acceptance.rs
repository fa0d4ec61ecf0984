//! The acceptance suite. Everything runs inside one test so that the timing
//! criteria do not share the CPU with other tests of this binary. Each
//! criterion prints one PASS/FAIL line; the test fails if any criterion does.

use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;
use std::sync::Arc;
use std::time::Instant;

use kase_core::backbone::{counters, Widths};
use kase_core::bench::{bench_sweep, compare_search, is_flat, linear_fit, size_report, Algorithm, BenchRecord};
use kase_core::format::Construction;
use kase_core::harness::*;
use kase_core::lab::*;
use kase_core::scheme::first::{adjust, test, trapdoor};
use kase_core::scheme::main::{
    adjust_main, aid_share, f, test_main, trapdoor_main, AidQueryContext, MainQueryContext,
};
use kase_core::scheme::{encrypt, extract, keygen, setup, DocSet, Encryptor, PublicParams};
use kase_core::{KaseError, Result};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

type Verdict = std::result::Result<String, String>;

fn check(ok: bool, detail: String) -> Verdict {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn word(rng: &mut ChaCha20Rng) -> String {
    games::random_keyword(8, rng)
}

fn subset_containing(n: u32, i: u32, rng: &mut ChaCha20Rng) -> DocSet {
    let mut s: Vec<u32> = (1..=n).filter(|&j| j != i && rng.gen_bool(0.5)).collect();
    s.push(i);
    DocSet::new(s, n).unwrap()
}

/// One parameter set per n, reused across trials; keys are fresh per trial.
struct ParamCache(BTreeMap<u32, PublicParams>);

impl ParamCache {
    fn get(&mut self, n: u32, rng: &mut ChaCha20Rng) -> &PublicParams {
        self.0.entry(n).or_insert_with(|| setup(n, rng).unwrap())
    }
}

fn c1_first_correctness(rng: &mut ChaCha20Rng) -> Result<Verdict> {
    let mut cache = ParamCache(BTreeMap::new());
    let (mut hit, mut reject) = (0, 0);
    let trials = 1000;
    for _ in 0..trials {
        let n = rng.gen_range(1..=16);
        let p = cache.get(n, rng).clone();
        let sk = keygen(&p, rng);
        let i = rng.gen_range(1..=n);
        let s = subset_containing(n, i, rng);
        let (w, other) = (word(rng), word(rng));
        let c = encrypt(&p, &sk, i, &w, rng)?;
        let k = extract(&p, &sk, &s)?;
        hit += test(&p, &adjust(&p, i, &s, &trapdoor(&p, &k, &s, &w))?, &s, &c)? as u32;
        reject += !test(&p, &adjust(&p, i, &s, &trapdoor(&p, &k, &s, &other))?, &s, &c)? as u32;
    }
    Ok(check(
        hit == trials && reject == trials,
        format!("matching keyword true {hit}/{trials}, other keyword false {reject}/{trials}"),
    ))
}

fn c2_main_correctness(rng: &mut ChaCha20Rng) -> Result<Verdict> {
    let mut cache = ParamCache(BTreeMap::new());
    let (mut hit, mut reject) = (0, 0);
    let trials = 1000;
    for _ in 0..trials {
        let n = rng.gen_range(1..=16);
        let p = cache.get(n, rng).clone();
        let sk = keygen(&p, rng);
        let i = rng.gen_range(1..=n);
        let s = subset_containing(n, i, rng);
        let (w, other) = (word(rng), word(rng));
        let c = [encrypt(&p, &sk, i, &w, rng)?];
        let k = extract(&p, &sk, &s)?;
        for (kw, want) in [(&w, true), (&other, false)] {
            let b = trapdoor_main(&p, &k, &s, kw, rng);
            let shares = AidQueryContext::new(&p, s.clone(), b.r_aid)?.shares_for_doc(i, &c)?;
            let got = MainQueryContext::new(&p, s.clone(), b.main_view())?.matches(i, &c, &[&shares[0]])?;
            match (want, got) {
                (true, true) => hit += 1,
                (false, false) => reject += 1,
                _ => {}
            }
        }
    }
    Ok(check(
        hit == trials && reject == trials,
        format!("two-share recombination: matching true {hit}/{trials}, other false {reject}/{trials}"),
    ))
}

fn c3_equivalence(rng: &mut ChaCha20Rng) -> Result<Verdict> {
    let corpora = 200;
    let mut divergences = 0;
    let mut oracle_misses = 0;
    for _ in 0..corpora {
        let n = rng.gen_range(1..=16);
        let p = Arc::new(setup(n, rng)?);
        let sk = keygen(&p, rng);
        let vocab: Vec<String> = (0..6).map(|j| format!("v{j}")).collect();
        let mut plain = Vec::new();
        for i in 1..=n {
            let mut kws: Vec<&String> = vocab.iter().collect();
            kws.shuffle(rng);
            for w in kws.into_iter().take(rng.gen_range(0..=8)) {
                plain.push((i, w.as_str()));
            }
        }
        let store = Arc::new(IndexStore::encrypt_corpus(&p, &sk, "owner", plain.iter().copied(), rng)?);
        let d = Deployment::start(p.clone(), store.clone(), store, TransportKind::Direct, ServerConfig::default())?;
        let s = subset_containing(n, rng.gen_range(1..=n), rng);
        let q = &vocab[rng.gen_range(0..vocab.len())];
        let k = extract(&p, &sk, &s)?;
        let a = search_first(d.main.as_ref(), first_request(&p, &k, &s, q, rng))?.matches;
        let (m, x) = main_requests(&p, &k, &s, q, rng);
        let b = search_main(d.main.as_ref(), d.aid.as_ref(), m, x)?.matches;
        let want: Vec<u32> = plain
            .iter()
            .filter(|(i, w)| *w == q && s.contains(*i))
            .map(|(i, _)| *i)
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        divergences += (a != b) as u32;
        oracle_misses += (a != want) as u32;
    }
    Ok(check(
        divergences == 0 && oracle_misses == 0,
        format!("{corpora} corpora: {divergences} divergences, {oracle_misses} disagreements with the plaintext index"),
    ))
}

fn c4_authorization(rng: &mut ChaCha20Rng) -> Result<Verdict> {
    let mut cache = ParamCache(BTreeMap::new());
    let trials = 1000;
    let (mut forged, mut control, mut refused) = (0, 0, 0);
    for _ in 0..trials {
        let n = rng.gen_range(2..=16);
        let p = cache.get(n, rng).clone();
        let sk = keygen(&p, rng);
        let i_star = rng.gen_range(1..=n);
        let others: Vec<u32> = (1..=n).filter(|&j| j != i_star).collect();
        let mut pick = others.clone();
        pick.shuffle(rng);
        pick.truncate(rng.gen_range(1..=others.len()));
        let s = DocSet::new(pick, n)?;
        let w = word(rng);
        let c = encrypt(&p, &sk, i_star, &w, rng)?;
        let tr = trapdoor(&p, &extract(&p, &sk, &s)?, &s, &w);
        // An honest server refuses; a server told S ∪ {i*} still finds nothing.
        refused += matches!(adjust(&p, i_star, &s, &tr), Err(KaseError::Scope { .. })) as u32;
        let claimed = DocSet::new(s.iter().chain([i_star]), n)?;
        forged += test(&p, &adjust(&p, i_star, &claimed, &tr)?, &claimed, &c)? as u32;
        let ok_tr = trapdoor(&p, &extract(&p, &sk, &claimed)?, &claimed, &w);
        control += test(&p, &adjust(&p, i_star, &claimed, &ok_tr)?, &claimed, &c)? as u32;
    }
    let combined = check_unforgeability_operational(8, 50, rng)?;
    Ok(check(
        forged == 0 && control == trials && refused == trials && combined.holds(),
        format!(
            "i* outside S: {forged}/{trials} matches ({refused} refused by Adjust); control {control}/{trials}; \
             summed keys: {} matches outside the union, {}/{} control hits",
            combined.combined_key_matches, combined.combined_key_control_hits, combined.trials
        ),
    ))
}

fn c5_compactness(rng: &mut ChaCha20Rng) -> Result<Verdict> {
    let w = Widths::current();
    let recs = size_report(&[2, 8, 64, 512], rng)?;
    let bytes_of = |kind: &str, cons: Construction| -> BTreeSet<usize> {
        recs.iter()
            .filter(|r| r.kind == kind && r.construction == cons)
            .map(|r| r.bytes)
            .collect()
    };
    let agg = bytes_of("aggregate-key", Construction::First);
    let tr1 = bytes_of("trapdoor", Construction::First);
    let tr2 = bytes_of("trapdoor", Construction::Main);
    let halves: BTreeSet<usize> = ["trapdoor-main-half", "trapdoor-aid-half"]
        .iter()
        .flat_map(|k| bytes_of(k, Construction::Main))
        .collect();
    let halves_total: usize = halves.iter().sum();
    let ok = agg == BTreeSet::from([w.g])
        && tr1 == BTreeSet::from([w.g])
        && tr2 == BTreeSet::from([w.g + 2 * w.scalar])
        && halves_total == w.g + 2 * w.scalar;
    Ok(check(
        ok,
        format!(
            "{} records over n in {{2, 8, 64, 512}}: aggregate key {agg:?} B, first trapdoor {tr1:?} B, main views {tr2:?} B total",
            recs.len()
        ),
    ))
}

fn c6_attacks(rng: &mut ChaCha20Rng) -> Result<Verdict> {
    let n = 4;
    let trials = 200;
    let weak = run_keyword_privacy_game(Scheme::WeakSharedRandomness, n, trials, &mut RatioAdversary::default(), rng)?;
    let kp = run_keyword_privacy_game(Scheme::First, n, trials, &mut RatioAdversary::default(), rng)?;
    let det = run_trapdoor_privacy_game(Scheme::First, n, trials, &mut ExtractionAdversary::default(), rng)?;
    let tp = run_trapdoor_privacy_game(Scheme::Main, n, trials, &mut ExtractionAdversary::default(), rng)?;
    let ok = weak.win_rate() >= 0.99
        && kp.verdict == GameVerdict::Chance
        && det.win_rate() >= 0.99
        && tp.verdict == GameVerdict::Chance
        && [&weak, &kp, &det, &tp].iter().all(|t| t.trials == trials);
    Ok(check(
        ok,
        format!(
            "ratio vs shared-t {:.3}, ratio vs first adv {:.3} (ci {:.3}), extraction vs first {:.3}, extraction vs main adv {:.3}",
            weak.win_rate(),
            kp.advantage,
            kp.ci,
            det.win_rate(),
            tp.advantage
        ),
    ))
}

fn c7_cost_model(rng: &mut ChaCha20Rng) -> Result<Verdict> {
    if !counters::ENABLED {
        return Ok(Err("operation counters are not compiled in".into()));
    }
    let n = 12;
    let p = setup(n, rng)?;
    let sk = keygen(&p, rng);
    let mut bad = Vec::new();
    for size in 1..=n {
        let s = DocSet::new(1..=size, n)?;
        let k = extract(&p, &sk, &s)?;
        let c = encrypt(&p, &sk, 1, "w", rng)?;
        let tr = trapdoor(&p, &k, &s, "w");
        let (ok1, first) = counters::measure(|| test(&p, &adjust(&p, 1, &s, &tr)?, &s, &c));
        let sz = size as u64;
        if !ok1? || first.pairing != 2 || first.gt_mul != 1 || first.additions() != 2 * sz || first.scalar_muls() + first.gt_exp != 0 {
            bad.push(format!("first |S|={size}: {first:?}"));
        }

        let b = trapdoor_main(&p, &k, &s, "w", rng);
        let (aid, aid_ops) = counters::measure(|| aid_share(&p, &s, &c, 0, &b.r_aid));
        let aid = aid?;
        let (ok2, main_ops) = counters::measure(|| -> Result<bool> {
            let own = f(&b.r_main, &p.pub_i(1, &s)?);
            let tr_i = adjust_main(&p, 1, &s, &b.tr, &own, &aid.pub_share)?;
            test_main(&p, &tr_i, &s, &c, &b.r_main, &aid)
        });
        let both = main_ops + aid_ops;
        let main_ok = main_ops.additions() == 2 * sz + 1
            && main_ops.scalar_muls() == 2
            && main_ops.pairing == 2
            && main_ops.gt_exp == 1
            && main_ops.gt_mul == 3
            && aid_ops.additions() == 2 * sz - 1
            && aid_ops.scalar_muls() == 2
            && aid_ops.pairing == 1
            && aid_ops.gt_exp == 1
            && aid_ops.gt_mul == 0
            // Only additions grow with |S|; everything heavy is constant.
            && both.scalar_muls() == 4
            && both.gt_exp == 2;
        if !ok2? || !main_ok {
            bad.push(format!("main |S|={size}: main {main_ops:?} aid {aid_ops:?}"));
        }
    }
    Ok(check(
        bad.is_empty(),
        if bad.is_empty() {
            format!(
                "|S| = 1..{n}: first 2|S| adds + 1 GT mul + 2 pairings; main C_main 2|S|+1 adds, 2 sm, 2 pairings, 1 exp, 3 GT mul; C_aid 2|S|-1 adds, 2 sm, 1 pairing, 1 exp"
            )
        } else {
            bad.join("; ")
        },
    ))
}

fn medians(recs: &[BenchRecord]) -> (Vec<f64>, Vec<f64>) {
    (recs.iter().map(|r| r.value as f64).collect(), recs.iter().map(|r| r.median_us).collect())
}

fn c8_performance(rng: &mut ChaCha20Rng) -> Result<Verdict> {
    let reps = 10;
    let mut notes = Vec::new();
    let mut ok = true;
    let linear: [(Algorithm, Construction, &[u32]); 5] = [
        (Algorithm::Setup, Construction::First, &[16, 32, 64, 96, 128]),
        (Algorithm::Encrypt, Construction::First, &[10, 20, 30, 40, 50]),
        (Algorithm::Extract, Construction::First, &[256, 512, 768, 1024]),
        (Algorithm::Test, Construction::First, &[10, 20, 30, 40, 50]),
        (Algorithm::Test, Construction::Main, &[10, 20, 30, 40, 50]),
    ];
    for (alg, cons, values) in linear {
        let recs = bench_sweep(alg, cons, values, reps, rng)?;
        let (xs, ys) = medians(&recs);
        let fit = linear_fit(&xs, &ys).expect("distinct axis values");
        ok &= fit.r2 >= 0.98;
        notes.push(format!("{alg}/{cons} R2={:.4}", fit.r2));
    }
    for cons in [Construction::First, Construction::Main] {
        let recs = bench_sweep(Algorithm::Trapdoor, cons, &[16, 128, 512, 1024], reps, rng)?;
        let (xs, ys) = medians(&recs);
        let flat = is_flat(&xs, &ys);
        ok &= flat;
        notes.push(format!("trapdoor/{cons} flat={flat}"));
    }
    let start = Instant::now();
    let cmp = compare_search(5000, 1, rng)?;
    let ratio_ok = (1.3..=3.0).contains(&cmp.ratio);
    ok &= ratio_ok;
    notes.push(format!(
        "5000 keywords: first {:.2} s, main {:.2} s, ratio {:.2} ({:.0} s incl. corpus)",
        cmp.first_us / 1e6,
        cmp.main_us / 1e6,
        cmp.ratio,
        start.elapsed().as_secs_f64()
    ));
    Ok(check(ok, notes.join("; ")))
}

fn c9_audit(rng: &mut ChaCha20Rng) -> Result<Verdict> {
    let n = 4;
    let p = Arc::new(setup(n, rng)?);
    let sk = keygen(&p, rng);
    let vocab = ["alpha", "beta", "gamma"];
    let mut enc = Encryptor::new(&p, &sk);
    let mut store = IndexStore::new(n, "owner");
    for i in 1..=n {
        store.upload(i, [enc.encrypt(i, vocab[i as usize % 3], rng)?])?;
    }
    let store = Arc::new(store);
    let d = Deployment::start(p.clone(), store.clone(), store, TransportKind::Channel, ServerConfig::default())?;
    let s = DocSet::full(n)?;
    let k = extract(&p, &sk, &s)?;
    let secrets = |b: &kase_core::scheme::main::TrapdoorBundle, kw: &str| AuditSecrets {
        r: Some(b.r_main + b.r_aid),
        r_main: Some(b.r_main),
        r_aid: Some(b.r_aid),
        keywords: vocab.iter().map(|w| w.to_string()).chain([kw.to_string()]).collect(),
    };
    let mut clean = 0;
    for run in 0..100 {
        d.transcript.clear();
        let kw = vocab[run % 3];
        let b = trapdoor_main(&p, &k, &s, kw, rng);
        let (m, a) = split_bundle(&b, &s, QueryId::random(rng));
        search_main(d.main.as_ref(), d.aid.as_ref(), m, a)?;
        clean += audit(&d.transcript.entries(), &secrets(&b, kw)).is_clean() as u32;
    }
    let mut flagged = Vec::new();
    for fault in Miswire::ALL {
        d.transcript.clear();
        let b = trapdoor_main(&p, &k, &s, "alpha", rng);
        let _ = search_main_miswired(d.main.as_ref(), d.aid.as_ref(), &b, &s, "alpha", QueryId::random(rng), fault);
        let report = audit(&d.transcript.entries(), &secrets(&b, "alpha"));
        if !report.is_clean() {
            flagged.push(format!("{fault:?}"));
        }
    }
    Ok(check(
        clean == 100 && flagged.len() == Miswire::ALL.len(),
        format!("{clean}/100 honest runs clean; flagged misconfigurations: {}", flagged.join(", ")),
    ))
}

#[test]
fn acceptance() {
    let mut rng = ChaCha20Rng::seed_from_u64(0xACCE);
    let criteria: [(&str, fn(&mut ChaCha20Rng) -> Result<Verdict>); 9] = [
        ("correctness, single-server", c1_first_correctness),
        ("correctness, two-server", c2_main_correctness),
        ("construction equivalence", c3_equivalence),
        ("authorization soundness", c4_authorization),
        ("compactness", c5_compactness),
        ("attack asymmetry", c6_attacks),
        ("operation counts", c7_cost_model),
        ("performance shape", c8_performance),
        ("transcript audit", c9_audit),
    ];
    let mut failed = Vec::new();
    for (k, (name, run)) in criteria.into_iter().enumerate() {
        let start = Instant::now();
        let verdict = run(&mut rng).unwrap_or_else(|e| Err(format!("error: {e}")));
        let secs = start.elapsed().as_secs_f64();
        let line = match verdict {
            Ok(detail) => format!("PASS {}. {name}: {detail} [{secs:.1} s]", k + 1),
            Err(detail) => {
                failed.push(k + 1);
                format!("FAIL {}. {name}: {detail} [{secs:.1} s]", k + 1)
            }
        };
        // Written to the process stdout so the verdicts show up without --nocapture.
        let _ = writeln!(std::io::stdout(), "{line}");
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
