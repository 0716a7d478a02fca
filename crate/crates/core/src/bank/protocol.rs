//! Line protocol. One request per line, whitespace-separated fields, binary
//! payloads as lowercase hex:
//!
//! ```text
//! VERIFY <series> <I> <R_hex>   -> OK | REJECT <reason>
//! DECODE <series> <I> <C_hex>   -> OK <M_hex> | REJECT <reason>
//! VOTE   <series> <I> <C_hex>   -> OK | REJECT <reason>
//! TALLY  <series>               -> OK [<choice_hex>:<count> ...]
//! ```
//!
//! Malformed requests and unknown series get `ERROR <reason>`.

use std::fmt;
use std::str::FromStr;

use crate::scheme::SeriesId;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Verb {
    Verify,
    Decode,
    Vote,
    Tally,
}

impl Verb {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verb::Verify => "VERIFY",
            Verb::Decode => "DECODE",
            Verb::Vote => "VOTE",
            Verb::Tally => "TALLY",
        }
    }
}

impl FromStr for Verb {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "VERIFY" => Ok(Verb::Verify),
            "DECODE" => Ok(Verb::Decode),
            "VOTE" => Ok(Verb::Vote),
            "TALLY" => Ok(Verb::Tally),
            other => Err(format!("unknown-verb {other}")),
        }
    }
}

impl fmt::Display for Verb {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A parsed request. The payload stays as text until the series' `k` is known.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WireRequest {
    pub verb: Verb,
    pub series: SeriesId,
    /// 1-based token index; absent for `TALLY`.
    pub index: Option<u64>,
    pub payload: Option<String>,
}

impl WireRequest {
    pub fn parse(line: &str) -> Result<Self, String> {
        let fields: Vec<&str> = line.split_whitespace().collect();
        let (&verb, rest) = fields.split_first().ok_or("empty-request")?;
        let verb: Verb = verb.parse()?;
        let expected = if verb == Verb::Tally { 1 } else { 3 };
        if rest.len() != expected {
            return Err(format!("{verb} takes {expected} fields"));
        }
        let series = SeriesId::new(rest[0]).map_err(|_| "bad-series-id".to_owned())?;
        if verb == Verb::Tally {
            return Ok(Self {
                verb,
                series,
                index: None,
                payload: None,
            });
        }
        let index = rest[1].parse::<u64>().map_err(|_| "bad-index".to_owned())?;
        Ok(Self {
            verb,
            series,
            index: Some(index),
            payload: Some(rest[2].to_owned()),
        })
    }
}

impl fmt::Display for WireRequest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.verb, self.series)?;
        if let Some(i) = self.index {
            write!(f, " {i}")?;
        }
        if let Some(p) = &self.payload {
            write!(f, " {p}")?;
        }
        Ok(())
    }
}

/// Why a well-formed request was refused.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum RejectReason {
    BadValue,
    DoubleSpend,
    DoubleVote,
    BudgetExhausted,
}

impl RejectReason {
    pub fn as_str(&self) -> &'static str {
        match self {
            RejectReason::BadValue => "bad-value",
            RejectReason::DoubleSpend => "double-spend",
            RejectReason::DoubleVote => "double-vote",
            RejectReason::BudgetExhausted => "budget-exhausted",
        }
    }
}

impl FromStr for RejectReason {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "bad-value" => Ok(RejectReason::BadValue),
            "double-spend" => Ok(RejectReason::DoubleSpend),
            "double-vote" => Ok(RejectReason::DoubleVote),
            "budget-exhausted" => Ok(RejectReason::BudgetExhausted),
            other => Err(format!("unknown reject reason {other}")),
        }
    }
}

impl fmt::Display for RejectReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum WireResponse {
    /// `OK`, optionally followed by a payload.
    Ok(Option<String>),
    Reject(RejectReason),
    Error(String),
}

impl WireResponse {
    pub fn is_ok(&self) -> bool {
        matches!(self, WireResponse::Ok(_))
    }

    pub fn parse(line: &str) -> Result<Self, String> {
        let line = line.trim_end();
        let (head, tail) = match line.split_once(' ') {
            Some((h, t)) => (h, Some(t)),
            None => (line, None),
        };
        match (head, tail) {
            ("OK", payload) => Ok(WireResponse::Ok(payload.map(str::to_owned))),
            ("REJECT", Some(reason)) => Ok(WireResponse::Reject(reason.parse()?)),
            ("ERROR", Some(reason)) => Ok(WireResponse::Error(reason.to_owned())),
            _ => Err(format!("malformed response {line:?}")),
        }
    }
}

impl fmt::Display for WireResponse {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WireResponse::Ok(None) => f.write_str("OK"),
            WireResponse::Ok(Some(p)) if p.is_empty() => f.write_str("OK"),
            WireResponse::Ok(Some(p)) => write!(f, "OK {p}"),
            WireResponse::Reject(r) => write!(f, "REJECT {r}"),
            WireResponse::Error(e) => write!(f, "ERROR {e}"),
        }
    }
}
