//! Reading and writing the files the subcommands exchange.

use std::fs;
use std::io::{BufReader, Write};
use std::net::{SocketAddr, ToSocketAddrs};
use std::path::Path;

use kase_core::format::{aggregate_key_from_json, params_from_json, secret_key_from_json};
use kase_core::harness::IndexStore;
use kase_core::scheme::{AggregateKey, DocSet, PublicParams, SecretKey};
use kase_core::{KaseError, Result};

pub fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| KaseError::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))
}

/// Prefixes format errors with the file they came from.
pub fn in_file<T>(path: &Path, r: Result<T>) -> Result<T> {
    r.map_err(|e| match e {
        KaseError::Format { path: field, reason } => KaseError::Format {
            path: format!("{}: {field}", path.display()),
            reason,
        },
        other => other,
    })
}

/// Writes `text` plus a newline to `out`, or to stdout.
pub fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => fs::write(p, format!("{text}\n"))?,
        None => {
            let mut so = std::io::stdout().lock();
            writeln!(so, "{text}")?;
            so.flush()?;
        }
    }
    Ok(())
}

pub fn load_params(path: &Path) -> Result<PublicParams> {
    in_file(path, params_from_json(&read_text(path)?))
}

fn same_n(what: &str, n: u32, params: &PublicParams) -> Result<()> {
    if n != params.n() {
        return Err(KaseError::Parameter(format!(
            "{what} was made for n = {n}, params have n = {}",
            params.n()
        )));
    }
    Ok(())
}

pub fn load_secret_key(path: &Path, params: &PublicParams) -> Result<SecretKey> {
    let (n, sk) = in_file(path, secret_key_from_json(&read_text(path)?))?;
    same_n("secret key", n, params)?;
    Ok(sk)
}

pub fn load_aggregate_key(path: &Path, params: &PublicParams) -> Result<(DocSet, AggregateKey)> {
    let (n, set, key) = in_file(path, aggregate_key_from_json(&read_text(path)?))?;
    same_n("aggregate key", n, params)?;
    Ok((set, key))
}

pub fn load_store(path: &Path, params: &PublicParams) -> Result<IndexStore> {
    let f = fs::File::open(path)?;
    let store = in_file(path, IndexStore::read_snapshot(BufReader::new(f)))?;
    same_n("index store", store.n(), params)?;
    Ok(store)
}

/// `all`, or a comma-separated list of indexes and inclusive ranges,
/// e.g. `1,3,5-8`.
pub fn parse_set(text: &str, n: u32) -> Result<DocSet> {
    let text = text.trim();
    if text == "all" {
        return DocSet::full(n);
    }
    let bad = |part: &str| KaseError::Parameter(format!("cannot read `{part}` in document set `{text}`"));
    let mut out = Vec::new();
    for part in text.split(',').map(str::trim) {
        match part.split_once('-') {
            Some((a, b)) => {
                let a: u32 = a.trim().parse().map_err(|_| bad(part))?;
                let b: u32 = b.trim().parse().map_err(|_| bad(part))?;
                if a > b {
                    return Err(bad(part));
                }
                out.extend(a..=b);
            }
            None => out.push(part.parse().map_err(|_| bad(part))?),
        }
    }
    DocSet::new(out, n)
}

/// Comma-separated list of positive integers.
pub fn parse_list(text: &str) -> Result<Vec<u32>> {
    text.split(',')
        .map(|v| {
            v.trim()
                .parse()
                .map_err(|_| KaseError::Parameter(format!("`{v}` is not a non-negative integer")))
        })
        .collect()
}

/// One `doc_index<TAB>keyword` pair per line. Blank lines and lines
/// starting with `#` are skipped.
pub fn parse_corpus(path: &Path, text: &str) -> Result<Vec<(u32, String)>> {
    let mut out = Vec::new();
    for (k, line) in text.lines().enumerate() {
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let at = |field: &str| format!("{}: line {} {field}", path.display(), k + 1);
        let (doc, kw) = line
            .split_once('\t')
            .ok_or_else(|| KaseError::format(at("<line>"), "expected `doc_index<TAB>keyword`"))?;
        let doc: u32 = doc
            .trim()
            .parse()
            .map_err(|_| KaseError::format(at("doc_index"), format!("`{doc}` is not a document index")))?;
        if kw.is_empty() {
            return Err(KaseError::format(at("keyword"), "empty keyword"));
        }
        out.push((doc, kw.to_string()));
    }
    Ok(out)
}

pub fn resolve(addr: &str) -> Result<SocketAddr> {
    addr.to_socket_addrs()
        .ok()
        .and_then(|mut a| a.next())
        .ok_or_else(|| KaseError::Parameter(format!("cannot resolve address `{addr}`")))
}
