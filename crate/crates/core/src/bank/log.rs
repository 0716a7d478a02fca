//! Append-only decision log. One record per line:
//!
//! ```text
//! MINT   <series> <k> <S_hex> ok
//! VERIFY <series> <I> <R_hex> <decision>
//! DECODE <series> <I> <C_hex> <decision>
//! VOTE   <series> <I> <C_hex> <decision>
//! ```
//!
//! `<decision>` is `ok` or a reject reason. Only requests that change state
//! are logged; a record is synced to disk before the client sees the answer.

use std::fmt;
use std::fs::File;
use std::io::{self, Write};

use super::protocol::RejectReason;
use crate::scheme::SeriesId;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum LogVerb {
    Mint,
    Verify,
    Decode,
    Vote,
}

impl LogVerb {
    fn as_str(&self) -> &'static str {
        match self {
            LogVerb::Mint => "MINT",
            LogVerb::Verify => "VERIFY",
            LogVerb::Decode => "DECODE",
            LogVerb::Vote => "VOTE",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) struct LogRecord {
    pub verb: LogVerb,
    pub series: SeriesId,
    /// Token index, or `k` for `MINT`.
    pub field: u64,
    pub payload: String,
    pub decision: Option<RejectReason>,
}

impl LogRecord {
    pub fn parse(line: &str) -> Result<Self, String> {
        let fields: Vec<&str> = line.split(' ').collect();
        let [verb, series, field, payload, decision] = fields[..] else {
            return Err(format!("expected 5 fields, found {}", fields.len()));
        };
        let verb = match verb {
            "MINT" => LogVerb::Mint,
            "VERIFY" => LogVerb::Verify,
            "DECODE" => LogVerb::Decode,
            "VOTE" => LogVerb::Vote,
            other => return Err(format!("unknown verb {other:?}")),
        };
        let series = SeriesId::new(series).map_err(|e| e.to_string())?;
        let field = field
            .parse::<u64>()
            .map_err(|_| format!("bad numeric field {field:?}"))?;
        if payload.is_empty() || !payload.bytes().all(|b| matches!(b, b'0'..=b'9' | b'a'..=b'f')) {
            return Err("payload is not lowercase hex".into());
        }
        let decision = match decision {
            "ok" => None,
            other => Some(other.parse::<RejectReason>()?),
        };
        if verb == LogVerb::Mint && decision.is_some() {
            return Err("MINT records are always ok".into());
        }
        Ok(Self {
            verb,
            series,
            field,
            payload: payload.to_owned(),
            decision,
        })
    }
}

impl fmt::Display for LogRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {} {} {} {}",
            self.verb.as_str(),
            self.series,
            self.field,
            self.payload,
            self.decision.map_or("ok", |r| r.as_str())
        )
    }
}

pub(crate) struct LogWriter {
    file: File,
}

impl LogWriter {
    pub fn new(file: File) -> Self {
        Self { file }
    }

    /// Writes one record and waits for it to reach the disk.
    pub fn append(&mut self, record: &LogRecord) -> io::Result<()> {
        let mut line = record.to_string();
        line.push('\n');
        self.file.write_all(line.as_bytes())?;
        self.file.sync_data()
    }
}
