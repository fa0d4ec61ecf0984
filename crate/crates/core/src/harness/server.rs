//! Server roles. C_main answers both single-server queries and the main half
//! of two-server queries; C_aid turns its half into share messages and
//! forwards them to C_main. Only C_main ever sees search results.

use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, Condvar, Mutex};
use std::time::{Duration, Instant};

use super::message::{AidRequest, AidShareBatch, FirstRequest, MainRequest, Message, QueryId, SearchResponse};
use super::transport::Link;
use super::IndexStore;
use crate::error::{KaseError, Result};
use crate::scheme::first::{FirstQueryContext, TrapdoorFirst};
use crate::scheme::main::{AidQueryContext, MainQueryContext, MainShareMsg, MainView};
use crate::scheme::{DocSet, PublicParams};

/// Anything that answers one message with one message.
pub trait Handler: Send + Sync {
    fn handle(&self, msg: Message) -> Message;
}

#[derive(Clone, Debug)]
pub struct ServerConfig {
    /// How long C_main waits for C_aid's shares before failing the query.
    pub aid_timeout: Duration,
    /// Evaluate documents on all available cores.
    pub parallel: bool,
}

impl Default for ServerConfig {
    fn default() -> Self {
        ServerConfig {
            aid_timeout: Duration::from_secs(5),
            parallel: false,
        }
    }
}

fn check_store(params: &PublicParams, store: &IndexStore) -> Result<()> {
    if params.n() != store.n() {
        return Err(KaseError::param(format!(
            "store was built for n = {}, params have n = {}",
            store.n(),
            params.n()
        )));
    }
    Ok(())
}

/// Maps `f` over documents, optionally across threads, keeping input order.
fn map_docs<T, F>(docs: &[u32], parallel: bool, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u32) -> Result<T> + Sync,
{
    let workers = if parallel {
        std::thread::available_parallelism().map_or(1, |n| n.get())
    } else {
        1
    };
    if workers <= 1 || docs.len() < 2 {
        return docs.iter().map(|&i| f(i)).collect();
    }
    let chunk = docs.len().div_ceil(workers);
    std::thread::scope(|sc| {
        let handles: Vec<_> = docs
            .chunks(chunk)
            .map(|part| sc.spawn(|| part.iter().map(|&i| f(i)).collect::<Result<Vec<T>>>()))
            .collect();
        let mut out = Vec::with_capacity(docs.len());
        for h in handles {
            out.extend(h.join().expect("search worker panicked")?);
        }
        Ok(out)
    })
}

#[derive(Default)]
struct MainState {
    batches: HashMap<QueryId, AidShareBatch>,
    responses: HashMap<QueryId, SearchResponse>,
}

pub struct MainServer {
    params: Arc<PublicParams>,
    store: Arc<IndexStore>,
    config: ServerConfig,
    state: Mutex<MainState>,
    arrived: Condvar,
}

impl MainServer {
    pub fn new(params: Arc<PublicParams>, store: Arc<IndexStore>, config: ServerConfig) -> Result<Self> {
        check_store(&params, &store)?;
        Ok(MainServer {
            params,
            store,
            config,
            state: Mutex::new(MainState::default()),
            arrived: Condvar::new(),
        })
    }

    fn cached(&self, id: &QueryId) -> Option<SearchResponse> {
        self.state.lock().expect("state lock").responses.get(id).cloned()
    }

    fn remember(&self, resp: &SearchResponse) {
        self.state
            .lock()
            .expect("state lock")
            .responses
            .insert(resp.query_id, resp.clone());
    }

    fn candidates(&self, s: &DocSet) -> Vec<u32> {
        s.iter().filter(|&i| !self.store.doc(i).is_empty()).collect()
    }

    fn answer_first(&self, q: FirstRequest) -> Result<SearchResponse> {
        let ctx = FirstQueryContext::new(&self.params, q.set.clone(), TrapdoorFirst(q.tr))?;
        let docs = self.candidates(&q.set);
        let hits = map_docs(&docs, self.config.parallel, |i| ctx.matches(i, self.store.doc(i)))?;
        Ok(SearchResponse {
            query_id: q.query_id,
            matches: docs.into_iter().zip(hits).filter(|(_, h)| *h).map(|(i, _)| i).collect(),
        })
    }

    /// Blocks until C_aid's batch for `id` arrives or the timeout expires.
    fn take_batch(&self, id: &QueryId) -> Result<AidShareBatch> {
        let mut st = self.state.lock().expect("state lock");
        if let Some(b) = st.batches.remove(id) {
            return Ok(b);
        }
        let deadline = Instant::now() + self.config.aid_timeout;
        loop {
            let now = Instant::now();
            if now >= deadline {
                return Err(KaseError::Timeout(format!("aid shares for query {id}")));
            }
            st = self.arrived.wait_timeout(st, deadline - now).expect("state lock").0;
            if let Some(b) = st.batches.remove(id) {
                return Ok(b);
            }
        }
    }

    fn answer_main(&self, q: MainRequest) -> Result<SearchResponse> {
        q.set.check_range(self.params.n())?;
        let batch = self.take_batch(&q.query_id)?;
        if batch.set != q.set {
            return Err(KaseError::protocol("aid shares were computed for a different document set"));
        }
        let mut by_doc: BTreeMap<u32, Vec<&MainShareMsg>> = BTreeMap::new();
        for sh in &batch.shares {
            if !q.set.contains(sh.doc_index) {
                return Err(KaseError::protocol(format!("aid share for document {} outside the set", sh.doc_index)));
            }
            by_doc.entry(sh.doc_index).or_default().push(sh);
        }
        for (i, v) in by_doc.iter_mut() {
            v.sort_by_key(|m| m.slot);
            let slots_ok = v.iter().enumerate().all(|(k, m)| m.slot as usize == k);
            if !slots_ok || v.len() != self.store.doc(*i).len() {
                return Err(KaseError::protocol(format!(
                    "aid shares for document {i} do not cover its {} keyword slots",
                    self.store.doc(*i).len()
                )));
            }
        }
        let ctx = MainQueryContext::new(
            &self.params,
            q.set.clone(),
            MainView {
                tr: q.tr,
                r_main: q.r_main,
            },
        )?;
        let docs = self.candidates(&q.set);
        let hits = map_docs(&docs, self.config.parallel, |i| {
            let shares = by_doc
                .get(&i)
                .ok_or_else(|| KaseError::protocol(format!("no aid shares for document {i}")))?;
            ctx.matches(i, self.store.doc(i), shares)
        })?;
        Ok(SearchResponse {
            query_id: q.query_id,
            matches: docs.into_iter().zip(hits).filter(|(_, h)| *h).map(|(i, _)| i).collect(),
        })
    }

    fn respond(&self, id: QueryId, f: impl FnOnce() -> Result<SearchResponse>) -> Message {
        if let Some(r) = self.cached(&id) {
            return Message::Search(r);
        }
        match f() {
            Ok(r) => {
                self.remember(&r);
                Message::Search(r)
            }
            Err(e) => Message::error(Some(id), &e),
        }
    }
}

impl Handler for MainServer {
    fn handle(&self, msg: Message) -> Message {
        match msg {
            Message::FirstQuery(q) => self.respond(q.query_id, || self.answer_first(q)),
            Message::MainQuery(q) => self.respond(q.query_id, || self.answer_main(q)),
            Message::AidShares(b) => {
                let id = b.query_id;
                let mut st = self.state.lock().expect("state lock");
                if !st.responses.contains_key(&id) {
                    st.batches.insert(id, b);
                    self.arrived.notify_all();
                }
                Message::Ack { query_id: id }
            }
            other => Message::error(
                other.query_id(),
                &KaseError::protocol(format!("C_main does not accept `{}` messages", other.kind())),
            ),
        }
    }
}

pub struct AidServer {
    params: Arc<PublicParams>,
    store: Arc<IndexStore>,
    main: Arc<dyn Link>,
    config: ServerConfig,
}

impl AidServer {
    pub fn new(params: Arc<PublicParams>, store: Arc<IndexStore>, main: Arc<dyn Link>, config: ServerConfig) -> Result<Self> {
        check_store(&params, &store)?;
        Ok(AidServer {
            params,
            store,
            main,
            config,
        })
    }

    /// Share messages for every stored slot of every document in S.
    pub fn share_batch(&self, q: &AidRequest) -> Result<AidShareBatch> {
        let ctx = AidQueryContext::new(&self.params, q.set.clone(), q.r_aid)?;
        let docs: Vec<u32> = q.set.iter().filter(|&i| !self.store.doc(i).is_empty()).collect();
        let per_doc = map_docs(&docs, self.config.parallel, |i| ctx.shares_for_doc(i, self.store.doc(i)))?;
        Ok(AidShareBatch {
            query_id: q.query_id,
            set: q.set.clone(),
            shares: per_doc.into_iter().flatten().collect(),
        })
    }

    fn answer(&self, q: AidRequest) -> Result<Message> {
        let id = q.query_id;
        let batch = self.share_batch(&q)?;
        match self.main.call(Message::AidShares(batch))?.into_result()? {
            Message::Ack { query_id } if query_id == id => Ok(Message::Ack { query_id: id }),
            other => Err(KaseError::protocol(format!("C_main answered shares with `{}`", other.kind()))),
        }
    }
}

impl Handler for AidServer {
    fn handle(&self, msg: Message) -> Message {
        match msg {
            Message::AidQuery(q) => {
                let id = q.query_id;
                self.answer(q).unwrap_or_else(|e| Message::error(Some(id), &e))
            }
            other => Message::error(
                other.query_id(),
                &KaseError::protocol(format!("C_aid does not accept `{}` messages", other.kind())),
            ),
        }
    }
}
