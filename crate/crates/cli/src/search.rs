//! The `search` subcommand, against a local store or remote servers.

use std::path::PathBuf;
use std::sync::Arc;
use std::time::Duration;

use clap::{Args, ValueEnum};
use kase_core::format::{
    trapdoor_from_json, Construction, TrapdoorAidPayload, TrapdoorMainPayload, TrapdoorPayload, KIND_TRAPDOOR,
    KIND_TRAPDOOR_AID, KIND_TRAPDOOR_MAIN,
};
use kase_core::harness::{
    audit, search_first, search_main, search_main_miswired, split_bundle, AidRequest, AuditSecrets, Deployment,
    FirstRequest, Link, MainRequest, Miswire, QueryId, ServerConfig, TcpLink, TransportKind,
};
use kase_core::scheme::first::trapdoor;
use kase_core::scheme::main::{trapdoor_main, TrapdoorBundle};
use kase_core::scheme::{DocSet, PublicParams};
use kase_core::{KaseError, Result};
use rand::rngs::OsRng;
use serde::Serialize;

use crate::input::{emit, in_file, load_aggregate_key, load_params, load_store, parse_set, read_text, resolve};

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum MiswireArg {
    RMainToAid,
    FullBlinding,
    PlaintextLabel,
    RAidToMain,
}

impl From<MiswireArg> for Miswire {
    fn from(m: MiswireArg) -> Self {
        match m {
            MiswireArg::RMainToAid => Miswire::RMainToAid,
            MiswireArg::FullBlinding => Miswire::FullBlindingOnWire,
            MiswireArg::PlaintextLabel => Miswire::PlaintextKeywordLabel,
            MiswireArg::RAidToMain => Miswire::RAidToMain,
        }
    }
}

#[derive(Args, Debug)]
pub struct SearchArgs {
    #[arg(long, default_value = "first")]
    construction: Construction,
    #[arg(long)]
    params: PathBuf,
    /// Search an index store in-process instead of contacting servers.
    #[arg(long, conflicts_with_all = ["main", "aid"])]
    store: Option<PathBuf>,
    /// Address of C_main.
    #[arg(long)]
    main: Option<String>,
    /// Address of C_aid (main construction).
    #[arg(long)]
    aid: Option<String>,
    /// Aggregate key file; used with --keyword.
    #[arg(long, requires = "keyword")]
    key: Option<PathBuf>,
    #[arg(long, requires = "key")]
    keyword: Option<String>,
    /// Documents to search; defaults to the key's set.
    #[arg(long, requires = "key")]
    set: Option<String>,
    /// Trapdoor file from `kase trapdoor` (first construction).
    #[arg(long, conflicts_with_all = ["key", "main_half", "aid_half"])]
    trapdoor: Option<PathBuf>,
    #[arg(long, requires = "aid_half", conflicts_with = "key")]
    main_half: Option<PathBuf>,
    #[arg(long, requires = "main_half", conflicts_with = "key")]
    aid_half: Option<PathBuf>,
    /// Audit the local transcript; leaks are reported with exit code 5.
    #[arg(long, requires = "store")]
    audit: bool,
    /// Inject a client wiring fault (local main-construction runs only).
    #[arg(long, value_enum, requires_all = ["store", "key"])]
    miswire: Option<MiswireArg>,
    /// Seconds to wait for a server or for C_aid's shares.
    #[arg(long, default_value_t = 5.0)]
    timeout: f64,
}

enum Query {
    First(FirstRequest),
    Main {
        main: MainRequest,
        aid: AidRequest,
        bundle: Option<TrapdoorBundle>,
    },
}

#[derive(Serialize)]
struct Output<'a> {
    construction: Construction,
    set: &'a DocSet,
    matches: Vec<u32>,
}

pub fn scope_warning(key_set: &DocSet, requested: &DocSet) {
    if key_set != requested {
        eprintln!(
            "warning: the aggregate key covers {:?} but the query names {:?}; documents are only found with a key for exactly the queried set",
            key_set.as_slice(),
            requested.as_slice()
        );
    }
}

fn build_query(a: &SearchArgs, params: &PublicParams) -> Result<(Query, DocSet)> {
    let mut rng = OsRng;
    let id = QueryId::random(&mut rng);
    if let (Some(key), Some(w)) = (&a.key, &a.keyword) {
        let (key_set, k) = load_aggregate_key(key, params)?;
        let set = match &a.set {
            Some(spec) => parse_set(spec, params.n())?,
            None => key_set.clone(),
        };
        scope_warning(&key_set, &set);
        let q = match a.construction {
            Construction::First => Query::First(FirstRequest {
                query_id: id,
                set: set.clone(),
                tr: trapdoor(params, &k, &set, w).0,
            }),
            Construction::Main => {
                let b = trapdoor_main(params, &k, &set, w, &mut rng);
                let (main, aid) = split_bundle(&b, &set, id);
                Query::Main {
                    main,
                    aid,
                    bundle: Some(b),
                }
            }
        };
        return Ok((q, set));
    }
    match (a.construction, &a.trapdoor, &a.main_half, &a.aid_half) {
        (Construction::First, Some(path), _, _) => {
            let (n, t): (u32, TrapdoorPayload) = in_file(path, trapdoor_from_json(&read_text(path)?, KIND_TRAPDOOR))?;
            check_n(n, params)?;
            let set = t.set.clone();
            Ok((Query::First(FirstRequest { query_id: id, set: t.set, tr: t.tr }), set))
        }
        (Construction::Main, None, Some(mp), Some(ap)) => {
            let (n, m): (u32, TrapdoorMainPayload) = in_file(mp, trapdoor_from_json(&read_text(mp)?, KIND_TRAPDOOR_MAIN))?;
            check_n(n, params)?;
            let (n, x): (u32, TrapdoorAidPayload) = in_file(ap, trapdoor_from_json(&read_text(ap)?, KIND_TRAPDOOR_AID))?;
            check_n(n, params)?;
            let set = m.set.clone();
            let main = MainRequest {
                query_id: id,
                set: m.set,
                tr: m.tr,
                r_main: m.r_main,
                label: None,
            };
            let aid = AidRequest {
                query_id: id,
                set: x.set,
                r_aid: x.r_aid,
            };
            Ok((Query::Main { main, aid, bundle: None }, set))
        }
        (Construction::First, ..) => Err(KaseError::Parameter(
            "first-construction search needs --key and --keyword, or --trapdoor".into(),
        )),
        (Construction::Main, ..) => Err(KaseError::Parameter(
            "main-construction search needs --key and --keyword, or --main-half and --aid-half".into(),
        )),
    }
}

fn check_n(n: u32, params: &PublicParams) -> Result<()> {
    if n != params.n() {
        return Err(KaseError::Parameter(format!("trapdoor was made for n = {n}, params have n = {}", params.n())));
    }
    Ok(())
}

pub fn run(a: SearchArgs) -> Result<()> {
    let params = Arc::new(load_params(&a.params)?);
    let (query, set) = build_query(&a, &params)?;
    let timeout = Duration::from_secs_f64(a.timeout.max(0.001));

    let local = match &a.store {
        Some(path) => {
            let store = Arc::new(load_store(path, &params)?);
            let config = ServerConfig {
                aid_timeout: timeout,
                ..ServerConfig::default()
            };
            Some(Deployment::start(params.clone(), store.clone(), store, TransportKind::Channel, config)?)
        }
        None => None,
    };
    let remote = |addr: &Option<String>, role: &str| -> Result<Arc<dyn Link>> {
        let addr = addr
            .as_deref()
            .ok_or_else(|| KaseError::Parameter(format!("give --store or the {role} address (--{role})")))?;
        Ok(Arc::new(TcpLink::new(resolve(addr)?, timeout + Duration::from_secs(5))))
    };
    let main_link: Arc<dyn Link> = match &local {
        Some(d) => d.main.clone(),
        None => remote(&a.main, "main")?,
    };

    let mut secrets = AuditSecrets {
        keywords: a.keyword.iter().cloned().collect(),
        ..AuditSecrets::default()
    };
    let outcome = match query {
        Query::First(req) => search_first(main_link.as_ref(), req),
        Query::Main { main, aid, bundle } => {
            let aid_link: Arc<dyn Link> = match &local {
                Some(d) => d.aid.clone(),
                None => remote(&a.aid, "aid")?,
            };
            secrets.r = Some(main.r_main + aid.r_aid);
            secrets.r_main = Some(main.r_main);
            secrets.r_aid = Some(aid.r_aid);
            match (a.miswire, bundle) {
                (Some(fault), Some(b)) => {
                    let w = a.keyword.as_deref().unwrap_or_default();
                    search_main_miswired(main_link.as_ref(), aid_link.as_ref(), &b, &set, w, main.query_id, fault.into())
                }
                (Some(_), None) => return Err(KaseError::Parameter("--miswire needs --key and --keyword".into())),
                (None, _) => search_main(main_link.as_ref(), aid_link.as_ref(), main, aid),
            }
        }
    };

    if a.audit {
        let d = local.as_ref().expect("clap requires --store with --audit");
        let report = audit(&d.transcript.entries(), &secrets);
        eprintln!("{}", serde_json::to_string_pretty(&report)?);
        report.into_result()?;
    }
    let resp = outcome?;
    let out = Output {
        construction: a.construction,
        set: &set,
        matches: resp.matches,
    };
    emit(None, &serde_json::to_string(&out)?)
}
