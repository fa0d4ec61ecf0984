use std::fmt;

use rand::{CryptoRng, RngCore};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::backbone::{GElem, Scalar};
use crate::error::{KaseError, Result};
use crate::scheme::main::MainShareMsg;
use crate::scheme::DocSet;

/// 16-byte random tag binding the two halves of a query.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct QueryId(pub [u8; 16]);

impl QueryId {
    pub fn random<R: RngCore + CryptoRng>(rng: &mut R) -> Self {
        let mut b = [0u8; 16];
        rng.fill_bytes(&mut b);
        QueryId(b)
    }

    pub fn to_hex(&self) -> String {
        hex::encode(self.0)
    }

    pub fn from_hex(s: &str) -> Result<Self> {
        let v = hex::decode(s).map_err(|e| KaseError::encoding(e.to_string()))?;
        let b: [u8; 16] = v
            .try_into()
            .map_err(|_| KaseError::encoding("query id must be 16 bytes"))?;
        Ok(QueryId(b))
    }
}

impl fmt::Debug for QueryId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "QueryId({})", self.to_hex())
    }
}

impl fmt::Display for QueryId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_hex())
    }
}

impl Serialize for QueryId {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_hex())
    }
}

impl<'de> Deserialize<'de> for QueryId {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        QueryId::from_hex(&String::deserialize(d)?).map_err(serde::de::Error::custom)
    }
}

/// Single-server query: the first-construction trapdoor.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FirstRequest {
    pub query_id: QueryId,
    pub set: DocSet,
    pub tr: GElem,
}

/// The half of a main-construction query sent to C_main.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MainRequest {
    pub query_id: QueryId,
    pub set: DocSet,
    pub tr: GElem,
    pub r_main: Scalar,
    /// Free-form client label. Honest clients leave it empty.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

/// The half of a main-construction query sent to C_aid.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AidRequest {
    pub query_id: QueryId,
    pub set: DocSet,
    pub r_aid: Scalar,
}

/// C_aid -> C_main: one share message per (document in S, keyword slot).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AidShareBatch {
    pub query_id: QueryId,
    pub set: DocSet,
    pub shares: Vec<MainShareMsg>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SearchResponse {
    pub query_id: QueryId,
    pub matches: Vec<u32>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorCode {
    Parameter,
    Index,
    Scope,
    Protocol,
    Timeout,
    Format,
    Internal,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WireError {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub query_id: Option<QueryId>,
    pub code: ErrorCode,
    pub message: String,
    /// Offending document index, for index and scope errors.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub index: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<u32>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Message {
    FirstQuery(FirstRequest),
    MainQuery(MainRequest),
    AidQuery(AidRequest),
    AidShares(AidShareBatch),
    Search(SearchResponse),
    Ack { query_id: QueryId },
    Error(WireError),
}

impl Message {
    pub fn kind(&self) -> &'static str {
        match self {
            Message::FirstQuery(_) => "first_query",
            Message::MainQuery(_) => "main_query",
            Message::AidQuery(_) => "aid_query",
            Message::AidShares(_) => "aid_shares",
            Message::Search(_) => "search",
            Message::Ack { .. } => "ack",
            Message::Error(_) => "error",
        }
    }

    pub fn query_id(&self) -> Option<QueryId> {
        match self {
            Message::FirstQuery(m) => Some(m.query_id),
            Message::MainQuery(m) => Some(m.query_id),
            Message::AidQuery(m) => Some(m.query_id),
            Message::AidShares(m) => Some(m.query_id),
            Message::Search(m) => Some(m.query_id),
            Message::Ack { query_id } => Some(*query_id),
            Message::Error(e) => e.query_id,
        }
    }

    pub fn error(query_id: Option<QueryId>, err: &KaseError) -> Message {
        let code = match err {
            KaseError::Parameter(_) => ErrorCode::Parameter,
            KaseError::Index { .. } => ErrorCode::Index,
            KaseError::Scope { .. } => ErrorCode::Scope,
            KaseError::Protocol(_) | KaseError::Audit { .. } => ErrorCode::Protocol,
            KaseError::Timeout(_) => ErrorCode::Timeout,
            KaseError::Encoding(_) | KaseError::Format { .. } => ErrorCode::Format,
            KaseError::Io(_) => ErrorCode::Internal,
        };
        let (index, n) = match *err {
            KaseError::Index { index, n } => (Some(index), Some(n)),
            KaseError::Scope { index } => (Some(index), None),
            _ => (None, None),
        };
        Message::Error(WireError {
            query_id,
            code,
            message: err.to_string(),
            index,
            n,
        })
    }

    /// Turns an error reply back into a local error.
    pub fn into_result(self) -> Result<Message> {
        match self {
            Message::Error(e) => Err(match e.code {
                ErrorCode::Parameter => KaseError::Parameter(e.message),
                ErrorCode::Index if e.index.is_some() && e.n.is_some() => KaseError::Index {
                    index: e.index.unwrap_or_default(),
                    n: e.n.unwrap_or_default(),
                },
                ErrorCode::Scope if e.index.is_some() => KaseError::Scope {
                    index: e.index.unwrap_or_default(),
                },
                ErrorCode::Index | ErrorCode::Scope | ErrorCode::Protocol | ErrorCode::Internal => {
                    KaseError::Protocol(format!("remote {:?} error: {}", e.code, e.message))
                }
                ErrorCode::Timeout => KaseError::Timeout(e.message),
                ErrorCode::Format => KaseError::format("<remote>", e.message),
            }),
            other => Ok(other),
        }
    }
}
