//! Executable model of the two-server deployment: index store, wire
//! messages, server roles, transports, and the user-side search calls.

pub mod audit;
pub mod message;
pub mod server;
mod store;
pub mod transport;

use std::sync::Arc;
use std::time::Duration;

use rand::{CryptoRng, RngCore};

pub use audit::{audit, AuditReport, AuditSecrets, Finding};
pub use message::{AidRequest, AidShareBatch, FirstRequest, MainRequest, Message, QueryId, SearchResponse};
pub use server::{AidServer, Handler, MainServer, ServerConfig};
pub use store::IndexStore;
pub use transport::{ChannelLink, DirectLink, Link, Recorded, Role, TcpLink, TcpServer, Transcript, TranscriptEntry};

use crate::error::{KaseError, Result};
use crate::scheme::first::trapdoor;
use crate::scheme::main::{trapdoor_main, TrapdoorBundle};
use crate::scheme::{AggregateKey, DocSet, PublicParams};

/// Builds the single-server query for keyword `w`.
pub fn first_request<R: RngCore + CryptoRng>(
    params: &PublicParams,
    k_agg: &AggregateKey,
    s: &DocSet,
    w: &str,
    rng: &mut R,
) -> FirstRequest {
    FirstRequest {
        query_id: QueryId::random(rng),
        set: s.clone(),
        tr: trapdoor(params, k_agg, s, w).0,
    }
}

/// Splits a trapdoor bundle into the two server halves under one query id.
pub fn split_bundle(bundle: &TrapdoorBundle, s: &DocSet, query_id: QueryId) -> (MainRequest, AidRequest) {
    (
        MainRequest {
            query_id,
            set: s.clone(),
            tr: bundle.tr,
            r_main: bundle.r_main,
            label: None,
        },
        AidRequest {
            query_id,
            set: s.clone(),
            r_aid: bundle.r_aid,
        },
    )
}

/// Fresh main-construction trapdoor for `w`, already split for the servers.
pub fn main_requests<R: RngCore + CryptoRng>(
    params: &PublicParams,
    k_agg: &AggregateKey,
    s: &DocSet,
    w: &str,
    rng: &mut R,
) -> (MainRequest, AidRequest) {
    let bundle = trapdoor_main(params, k_agg, s, w, rng);
    split_bundle(&bundle, s, QueryId::random(rng))
}

fn expect_search(reply: Message, id: QueryId, s: &DocSet) -> Result<SearchResponse> {
    match reply.into_result()? {
        Message::Search(resp) => {
            if resp.query_id != id {
                return Err(KaseError::protocol("response carries a different query id"));
            }
            if let Some(&i) = resp.matches.iter().find(|&&i| !s.contains(i)) {
                return Err(KaseError::protocol(format!("response names document {i} outside the set")));
            }
            Ok(resp)
        }
        other => Err(KaseError::protocol(format!("expected a search response, got `{}`", other.kind()))),
    }
}

/// Single-server search.
pub fn search_first(server: &dyn Link, req: FirstRequest) -> Result<SearchResponse> {
    let (id, s) = (req.query_id, req.set.clone());
    expect_search(server.call(Message::FirstQuery(req))?, id, &s)
}

/// Two-server search. The aid half goes first so that C_main normally finds
/// the shares waiting; C_main tolerates either order up to its timeout.
pub fn search_main(main: &dyn Link, aid: &dyn Link, main_req: MainRequest, aid_req: AidRequest) -> Result<SearchResponse> {
    if main_req.query_id != aid_req.query_id {
        return Err(KaseError::protocol("the two query halves carry different query ids"));
    }
    if main_req.set != aid_req.set {
        return Err(KaseError::protocol("the two query halves name different document sets"));
    }
    let (id, s) = (main_req.query_id, main_req.set.clone());
    match aid.call(Message::AidQuery(aid_req))?.into_result()? {
        Message::Ack { query_id } if query_id == id => {}
        other => return Err(KaseError::protocol(format!("C_aid answered with `{}`", other.kind()))),
    }
    expect_search(main.call(Message::MainQuery(main_req))?, id, &s)
}

/// Client-side wiring faults, for exercising the transcript audit.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Miswire {
    /// The main half is also delivered to C_aid.
    RMainToAid,
    /// The client skips the split: r goes to C_main whole, C_aid gets 0.
    FullBlindingOnWire,
    /// The client tags the main half with the keyword in clear.
    PlaintextKeywordLabel,
    /// The aid half is also delivered to C_main.
    RAidToMain,
}

impl Miswire {
    pub const ALL: [Miswire; 4] = [
        Miswire::RMainToAid,
        Miswire::FullBlindingOnWire,
        Miswire::PlaintextKeywordLabel,
        Miswire::RAidToMain,
    ];
}

/// Two-server search through a faulty client.
pub fn search_main_miswired(
    main: &dyn Link,
    aid: &dyn Link,
    bundle: &TrapdoorBundle,
    s: &DocSet,
    keyword: &str,
    query_id: QueryId,
    fault: Miswire,
) -> Result<SearchResponse> {
    let (mut mreq, mut areq) = split_bundle(bundle, s, query_id);
    match fault {
        Miswire::RMainToAid => {
            let _ = aid.call(Message::MainQuery(mreq.clone()));
        }
        Miswire::RAidToMain => {
            let _ = main.call(Message::AidQuery(areq.clone()));
        }
        Miswire::FullBlindingOnWire => {
            mreq.r_main = bundle.r_main + bundle.r_aid;
            areq.r_aid = crate::backbone::Scalar::zero();
        }
        Miswire::PlaintextKeywordLabel => {
            mreq.label = Some(keyword.to_string());
        }
    }
    search_main(main, aid, mreq, areq)
}

/// How the servers of a [`Deployment`] are connected.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TransportKind {
    Direct,
    Channel,
    Tcp,
}

/// A C_main / C_aid pair wired over one transport, with an optional
/// transcript of every message.
pub struct Deployment {
    pub main: Arc<dyn Link>,
    pub aid: Arc<dyn Link>,
    pub transcript: Transcript,
    _servers: Vec<TcpServer>,
}

impl Deployment {
    pub fn start(
        params: Arc<PublicParams>,
        main_store: Arc<IndexStore>,
        aid_store: Arc<IndexStore>,
        kind: TransportKind,
        config: ServerConfig,
    ) -> Result<Self> {
        let transcript = Transcript::default();
        let mut servers = Vec::new();
        let tcp_timeout = config.aid_timeout + Duration::from_secs(30);
        let main_srv: Arc<dyn Handler> = Arc::new(MainServer::new(params.clone(), main_store, config.clone())?);
        let mut connect = |h: Arc<dyn Handler>| -> Result<Arc<dyn Link>> {
            Ok(match kind {
                TransportKind::Direct => Arc::new(DirectLink(h)),
                TransportKind::Channel => Arc::new(ChannelLink::spawn(h)),
                TransportKind::Tcp => {
                    let srv = TcpServer::bind("127.0.0.1:0", h)?;
                    let link = TcpLink::new(srv.addr(), tcp_timeout);
                    servers.push(srv);
                    Arc::new(link)
                }
            })
        };
        let main_raw = connect(main_srv)?;
        let aid_to_main: Arc<dyn Link> =
            Arc::new(Recorded::new(main_raw.clone(), transcript.clone(), Role::Aid, Role::Main));
        let aid_srv: Arc<dyn Handler> = Arc::new(AidServer::new(params, aid_store, aid_to_main, config)?);
        let aid_raw = connect(aid_srv)?;
        Ok(Deployment {
            main: Arc::new(Recorded::new(main_raw, transcript.clone(), Role::User, Role::Main)),
            aid: Arc::new(Recorded::new(aid_raw, transcript.clone(), Role::User, Role::Aid)),
            transcript,
            _servers: servers,
        })
    }
}
