mod input;
mod search;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Duration;

use clap::{Parser, Subcommand, ValueEnum};
use kase_core::bench::{bench_sweep, size_report, write_csv, Algorithm};
use kase_core::format::{
    aggregate_key_to_json, params_to_json, secret_key_to_json, to_json, Construction, TrapdoorAidPayload,
    TrapdoorMainPayload, TrapdoorPayload, KIND_TRAPDOOR, KIND_TRAPDOOR_AID, KIND_TRAPDOOR_MAIN,
};
use kase_core::harness::{AidServer, Handler, IndexStore, MainServer, ServerConfig, TcpLink, TcpServer};
use kase_core::lab::{
    run_keyword_privacy_game, run_trapdoor_privacy_game, ExtractionAdversary, GameTranscript, KeywordAdversary,
    RandomGuessAdversary, RandomTrapdoorGuesser, RatioAdversary, Scheme, TrapdoorAdversary,
};
use kase_core::scheme::first::trapdoor;
use kase_core::scheme::main::trapdoor_main;
use kase_core::scheme::{extract, keygen, setup};
use kase_core::{KaseError, Result};
use rand::rngs::OsRng;

use input::{emit, load_aggregate_key, load_params, load_secret_key, load_store, parse_corpus, parse_list, parse_set, read_text, resolve};

#[derive(Parser, Debug)]
#[command(name = "kase", version, about = "Key-aggregate searchable encryption toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate public parameters for n documents.
    Setup {
        #[arg(long)]
        n: u32,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Generate a data owner's secret key.
    Keygen {
        #[arg(long)]
        params: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Encrypt a `doc_index<TAB>keyword` corpus into an index store.
    Encrypt {
        #[arg(long)]
        params: PathBuf,
        #[arg(long)]
        key: PathBuf,
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long, default_value = "owner")]
        owner: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Derive the aggregate key for a document set.
    Extract {
        #[arg(long)]
        params: PathBuf,
        #[arg(long)]
        key: PathBuf,
        /// e.g. `1,3,5-8` or `all`.
        #[arg(long)]
        set: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build a trapdoor for one keyword from an aggregate key.
    Trapdoor {
        #[arg(long, default_value = "first")]
        construction: Construction,
        #[arg(long)]
        params: PathBuf,
        /// Aggregate key file.
        #[arg(long)]
        key: PathBuf,
        #[arg(long)]
        keyword: String,
        /// Documents the trapdoor is meant for; defaults to the key's set.
        #[arg(long)]
        set: Option<String>,
        /// Output file (first construction).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Output file for C_main's half (main construction).
        #[arg(long)]
        main_out: Option<PathBuf>,
        /// Output file for C_aid's half (main construction).
        #[arg(long)]
        aid_out: Option<PathBuf>,
    },
    /// Run C_main or C_aid over TCP.
    Serve {
        #[arg(long, value_enum)]
        role: ServeRole,
        /// Address to listen on; port 0 picks a free port, printed on stdout.
        #[arg(long, default_value = "127.0.0.1:7400")]
        listen: String,
        #[arg(long)]
        params: PathBuf,
        #[arg(long)]
        store: PathBuf,
        /// C_main's address (role aid).
        #[arg(long)]
        main: Option<String>,
        /// Seconds C_main waits for C_aid's shares.
        #[arg(long, default_value_t = 5.0)]
        timeout: f64,
        /// Evaluate documents on all cores.
        #[arg(long)]
        parallel: bool,
    },
    /// Search an index store or a server pair.
    Search(search::SearchArgs),
    /// Run a privacy game and print its transcript as JSON.
    Attack {
        #[arg(long, value_enum)]
        game: Game,
        /// first | main | weak
        #[arg(long)]
        scheme: Scheme,
        #[arg(long, value_enum)]
        adversary: AdversaryArg,
        #[arg(long, default_value_t = 4)]
        n: u32,
        #[arg(long, default_value_t = 200)]
        trials: u32,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Time one algorithm over a sweep of axis values; CSV out.
    Bench {
        #[arg(long)]
        algorithm: Algorithm,
        #[arg(long, default_value = "first")]
        construction: Construction,
        /// Strictly increasing axis values, e.g. `16,32,64`.
        #[arg(long)]
        values: String,
        #[arg(long, default_value_t = 10)]
        reps: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Serialized sizes of keys, trapdoors and ciphertexts; JSON out.
    SizeReport {
        #[arg(long, default_value = "2,64,512")]
        n: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ServeRole {
    Main,
    Aid,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Game {
    KeywordPrivacy,
    TrapdoorPrivacy,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum AdversaryArg {
    /// Ciphertext-ratio attack (keyword privacy).
    Ratio,
    /// Deterministic-trapdoor extraction (trapdoor privacy).
    Extraction,
    Random,
}

fn exit_code(e: &KaseError) -> u8 {
    match e {
        KaseError::Parameter(_) => 2,
        KaseError::Index { .. } | KaseError::Scope { .. } => 3,
        KaseError::Protocol(_) | KaseError::Timeout(_) => 4,
        KaseError::Audit { .. } => 5,
        KaseError::Format { .. } | KaseError::Encoding(_) => 6,
        KaseError::Io(_) => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn run(cmd: Command) -> Result<()> {
    let mut rng = OsRng;
    match cmd {
        Command::Setup { n, out } => {
            let p = setup(n, &mut rng)?;
            eprintln!("warning: {}", kase_core::scheme::TRUSTED_SETUP_WARNING);
            emit(out.as_deref(), &params_to_json(&p))
        }
        Command::Keygen { params, out } => {
            let p = load_params(&params)?;
            emit(out.as_deref(), &secret_key_to_json(p.n(), &keygen(&p, &mut rng)))
        }
        Command::Encrypt {
            params,
            key,
            corpus,
            owner,
            out,
        } => {
            let p = load_params(&params)?;
            let sk = load_secret_key(&key, &p)?;
            let entries = parse_corpus(&corpus, &read_text(&corpus)?)?;
            let store = IndexStore::encrypt_corpus(&p, &sk, owner, entries.iter().map(|(i, w)| (*i, w.as_str())), &mut rng)?;
            std::fs::write(&out, store.to_snapshot())?;
            eprintln!("{} encrypted keywords, fingerprint {}", store.len(), store.fingerprint());
            Ok(())
        }
        Command::Extract { params, key, set, out } => {
            let p = load_params(&params)?;
            let sk = load_secret_key(&key, &p)?;
            let s = parse_set(&set, p.n())?;
            let k = extract(&p, &sk, &s)?;
            emit(out.as_deref(), &aggregate_key_to_json(p.n(), &s, &k))
        }
        Command::Trapdoor {
            construction,
            params,
            key,
            keyword,
            set,
            out,
            main_out,
            aid_out,
        } => {
            let p = load_params(&params)?;
            let (key_set, k) = load_aggregate_key(&key, &p)?;
            let s = match set {
                Some(spec) => parse_set(&spec, p.n())?,
                None => key_set.clone(),
            };
            search::scope_warning(&key_set, &s);
            match construction {
                Construction::First => {
                    let tr = trapdoor(&p, &k, &s, &keyword).0;
                    emit(out.as_deref(), &to_json(KIND_TRAPDOOR, Some(construction), p.n(), TrapdoorPayload { set: s, tr }))
                }
                Construction::Main => {
                    let (Some(mo), Some(ao)) = (main_out, aid_out) else {
                        return Err(KaseError::Parameter("main-construction trapdoors need --main-out and --aid-out".into()));
                    };
                    let b = trapdoor_main(&p, &k, &s, &keyword, &mut rng);
                    let m = TrapdoorMainPayload {
                        set: s.clone(),
                        tr: b.tr,
                        r_main: b.r_main,
                    };
                    let a = TrapdoorAidPayload { set: s, r_aid: b.r_aid };
                    emit(Some(&mo), &to_json(KIND_TRAPDOOR_MAIN, Some(construction), p.n(), m))?;
                    emit(Some(&ao), &to_json(KIND_TRAPDOOR_AID, Some(construction), p.n(), a))
                }
            }
        }
        Command::Serve {
            role,
            listen,
            params,
            store,
            main,
            timeout,
            parallel,
        } => serve(role, &listen, &params, &store, main.as_deref(), timeout, parallel),
        Command::Search(a) => search::run(a),
        Command::Attack {
            game,
            scheme,
            adversary,
            n,
            trials,
            out,
        } => {
            let t = attack(game, scheme, adversary, n, trials)?;
            emit(out.as_deref(), &t.to_json())
        }
        Command::Bench {
            algorithm,
            construction,
            values,
            reps,
            out,
        } => {
            let recs = bench_sweep(algorithm, construction, &parse_list(&values)?, reps, &mut rng)?;
            match out {
                Some(p) => write_csv(std::fs::File::create(p)?, &recs),
                None => write_csv(std::io::stdout().lock(), &recs),
            }
        }
        Command::SizeReport { n, out } => {
            let recs = size_report(&parse_list(&n)?, &mut rng)?;
            emit(out.as_deref(), &serde_json::to_string_pretty(&recs)?)
        }
    }
}

fn serve(role: ServeRole, listen: &str, params: &Path, store: &Path, main: Option<&str>, timeout: f64, parallel: bool) -> Result<()> {
    let p = Arc::new(load_params(params)?);
    let st = Arc::new(load_store(store, &p)?);
    let config = ServerConfig {
        aid_timeout: Duration::from_secs_f64(timeout.max(0.001)),
        parallel,
    };
    let handler: Arc<dyn Handler> = match role {
        ServeRole::Main => Arc::new(MainServer::new(p, st, config)?),
        ServeRole::Aid => {
            let addr = main.ok_or_else(|| KaseError::Parameter("role aid needs --main <address of C_main>".into()))?;
            let link = TcpLink::new(resolve(addr)?, config.aid_timeout + Duration::from_secs(30));
            Arc::new(AidServer::new(p, st, Arc::new(link), config)?)
        }
    };
    let server = TcpServer::bind(listen, handler)?;
    emit(None, &server.addr().to_string())?;
    server.wait();
    Ok(())
}

fn attack(game: Game, scheme: Scheme, adversary: AdversaryArg, n: u32, trials: u32) -> Result<GameTranscript> {
    let mut rng = OsRng;
    match game {
        Game::KeywordPrivacy => {
            let mut adv: Box<dyn KeywordAdversary> = match adversary {
                AdversaryArg::Ratio => Box::new(RatioAdversary::default()),
                AdversaryArg::Random => Box::new(RandomGuessAdversary),
                AdversaryArg::Extraction => {
                    return Err(KaseError::Parameter("the extraction adversary plays the trapdoor-privacy game".into()))
                }
            };
            run_keyword_privacy_game(scheme, n, trials, adv.as_mut(), &mut rng)
        }
        Game::TrapdoorPrivacy => {
            let mut adv: Box<dyn TrapdoorAdversary> = match adversary {
                AdversaryArg::Extraction => Box::new(ExtractionAdversary::default()),
                AdversaryArg::Random => Box::new(RandomTrapdoorGuesser),
                AdversaryArg::Ratio => {
                    return Err(KaseError::Parameter("the ratio adversary plays the keyword-privacy game".into()))
                }
            };
            run_trapdoor_privacy_game(scheme, n, trials, adv.as_mut(), &mut rng)
        }
    }
}
