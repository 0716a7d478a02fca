//! The bank's classical side: series records, linearizable verification with
//! a persistent double-spend history, one-time-pad decoding and vote tallies.
//!
//! Each series sits behind its own mutex, so all requests for one series are
//! serialized while different series proceed in parallel. With a log
//! attached, every state change is synced to disk before it is applied and
//! answered.

mod log;
pub mod otp;
mod protocol;
mod server;

pub use protocol::{RejectReason, Verb, WireRequest, WireResponse};
pub use server::{serve, BankClient, ServerHandle};

use std::collections::{BTreeMap, HashMap};
use std::fs::OpenOptions;
use std::io::{self, Read};
use std::path::Path;
use std::sync::{Arc, Mutex, RwLock};

use rand::Rng;
use thiserror::Error;

use crate::scheme::{
    format_value_hex, parse_fixed_hex, test, SchemeError, SchemeParams, SecretString, SeriesId,
    TokenReport, VerificationHistory,
};
use log::{LogRecord, LogVerb, LogWriter};

#[derive(Debug, Error)]
pub enum BankError {
    #[error("unknown series `{0}`")]
    UnknownSeries(SeriesId),
    #[error("series `{0}` already exists")]
    DuplicateSeries(SeriesId),
    #[error("index {index} out of range [1, {size}]")]
    IndexOutOfRange { index: u64, size: u64 },
    #[error("bad payload: {0}")]
    BadPayload(String),
    #[error("corrupted log at byte offset {offset}: {reason}")]
    CorruptLog { offset: u64, reason: String },
    #[error(transparent)]
    Scheme(#[from] SchemeError),
    #[error("log i/o: {0}")]
    Io(#[from] io::Error),
}

impl BankError {
    /// Short reason for an `ERROR` response.
    pub fn wire_reason(&self) -> &'static str {
        match self {
            BankError::UnknownSeries(_) => "unknown-series",
            BankError::DuplicateSeries(_) => "duplicate-series",
            BankError::IndexOutOfRange { .. } => "index-out-of-range",
            BankError::BadPayload(_) => "bad-payload",
            BankError::CorruptLog { .. } | BankError::Io(_) => "internal",
            BankError::Scheme(_) => "bad-request",
        }
    }
}

/// Accepted, or refused with a reason.
pub type Verdict<T = ()> = Result<T, RejectReason>;

/// Everything the bank keeps for one minted series.
#[derive(Clone, Debug)]
pub struct SeriesRecord {
    pub params: SchemeParams,
    pub secret: SecretString,
    /// Every counted submission, accepted or not.
    pub history: VerificationHistory,
    pub attempts: u64,
    pub tally: BTreeMap<u64, u64>,
}

impl SeriesRecord {
    fn new(secret: SecretString) -> Result<Self, BankError> {
        let params = SchemeParams::new(secret.k())?;
        if !secret.is_quantum() {
            return Err(SchemeError::WrongSecretShape {
                expected: params.num_indices(),
                actual: secret.num_blocks(),
            }
            .into());
        }
        Ok(Self {
            params,
            secret,
            history: VerificationHistory::new(),
            attempts: 0,
            tally: BTreeMap::new(),
        })
    }

    fn budget_left(&self) -> bool {
        self.attempts < self.params.cap_test
    }

    fn check_index(&self, index: u64) -> Result<u64, BankError> {
        self.secret
            .value_at(index)
            .ok_or(BankError::IndexOutOfRange {
                index,
                size: self.params.num_indices(),
            })
    }

    fn parse_value(&self, hex: &str) -> Result<u64, BankError> {
        parse_fixed_hex(hex, (self.params.k / 4) as usize)
            .map_err(|e| BankError::BadPayload(e.to_string()))
    }

    fn decide_verify(&self, report: &TokenReport) -> Verdict {
        if self.secret.value_at(report.index()) != Some(report.value()) {
            Err(RejectReason::BadValue)
        } else if !test(&self.secret, &self.history, report) {
            Err(RejectReason::DoubleSpend)
        } else {
            Ok(())
        }
    }

    /// Pad lookup shared by `DECODE` and `VOTE`: the pair `(I, F_S(I))` is
    /// consumed exactly like a verified report.
    fn decide_pad(&self, index: u64, ciphertext: u64, reuse: RejectReason) -> Verdict<u64> {
        let pad = self.secret.value_at(index).expect("index checked");
        if self.history.contains(&TokenReport::new(index, pad)) {
            Err(reuse)
        } else {
            Ok(otp::decode(pad, ciphertext))
        }
    }

    fn commit(&mut self, entry: TokenReport) {
        self.history.push(entry);
        self.attempts += 1;
    }
}

/// The bank: a set of series plus an optional durable log.
pub struct Bank {
    series: RwLock<HashMap<SeriesId, Arc<Mutex<SeriesRecord>>>>,
    log: Option<Mutex<LogWriter>>,
}

impl Default for Bank {
    fn default() -> Self {
        Self::in_memory()
    }
}

impl Bank {
    /// A bank without persistence.
    pub fn in_memory() -> Self {
        Self {
            series: RwLock::new(HashMap::new()),
            log: None,
        }
    }

    /// Opens (or creates) a bank backed by the log at `path`, replaying it.
    ///
    /// Every record is re-evaluated during replay and must reproduce its
    /// logged decision; any malformed or inconsistent record aborts with its
    /// byte offset. A final line without a newline is a write that never
    /// completed (its request was never answered) and is cut off.
    pub fn open(path: impl AsRef<Path>) -> Result<Self, BankError> {
        let mut file = OpenOptions::new()
            .read(true)
            .append(true)
            .create(true)
            .open(path.as_ref())?;
        let mut bytes = Vec::new();
        file.read_to_end(&mut bytes)?;
        let complete = bytes.iter().rposition(|b| *b == b'\n').map_or(0, |p| p + 1);
        if complete < bytes.len() {
            file.set_len(complete as u64)?;
        }
        let bank = Self::in_memory();
        let mut offset = 0usize;
        for line in bytes[..complete].split_inclusive(|b| *b == b'\n') {
            let corrupt = |reason: String| BankError::CorruptLog {
                offset: offset as u64,
                reason,
            };
            let text = std::str::from_utf8(&line[..line.len() - 1])
                .map_err(|_| corrupt("not utf-8".into()))?;
            let record = LogRecord::parse(text).map_err(corrupt)?;
            bank.replay(&record).map_err(|e| corrupt(e.to_string()))?;
            offset += line.len();
        }
        Ok(Self {
            series: bank.series,
            // opened in append mode: writes land at the (possibly cut) end
            log: Some(Mutex::new(LogWriter::new(file))),
        })
    }

    fn replay(&self, record: &LogRecord) -> Result<(), BankError> {
        if record.verb == LogVerb::Mint {
            let k = u32::try_from(record.field).map_err(|_| SchemeError::InvalidK(u32::MAX))?;
            let params = SchemeParams::new(k)?;
            let secret = SecretString::from_hex(
                k,
                params.num_indices(),
                &record.payload,
                record.series.clone(),
            )?;
            return self.insert_series(secret).map(|_| ());
        }
        let slot = self.slot(&record.series)?;
        let mut rec = slot.lock().expect("series lock poisoned");
        if !rec.budget_left() {
            return Err(BankError::BadPayload("record beyond the verification budget".into()));
        }
        let index = record.field;
        let value = rec.parse_value(&record.payload)?;
        let (entry, verdict, vote) = match record.verb {
            LogVerb::Verify => {
                let r = TokenReport::new(index, value);
                r.validate(rec.params.k)?;
                (r, rec.decide_verify(&r), None)
            }
            LogVerb::Decode | LogVerb::Vote => {
                let pad = rec.check_index(index)?;
                let reuse = if record.verb == LogVerb::Vote {
                    RejectReason::DoubleVote
                } else {
                    RejectReason::DoubleSpend
                };
                let v = rec.decide_pad(index, value, reuse);
                let vote = (record.verb == LogVerb::Vote).then(|| v.ok()).flatten();
                (TokenReport::new(index, pad), v.map(|_| ()), vote)
            }
            LogVerb::Mint => unreachable!(),
        };
        if verdict.err() != record.decision {
            return Err(BankError::BadPayload(format!(
                "replayed decision {:?} differs from logged {:?}",
                verdict.err(),
                record.decision
            )));
        }
        rec.commit(entry);
        if let Some(choice) = vote {
            *rec.tally.entry(choice).or_insert(0) += 1;
        }
        Ok(())
    }

    /// Registers a series minted from `secret` (which carries the series id).
    pub fn create_series(&self, secret: SecretString) -> Result<SchemeParams, BankError> {
        let id = secret.series().clone();
        let mut map = self.series.write().expect("series map poisoned");
        if map.contains_key(&id) {
            return Err(BankError::DuplicateSeries(id));
        }
        let record = SeriesRecord::new(secret)?;
        let params = record.params;
        // a keyed secret is only expanded when it has to be written out
        if self.log.is_some() {
            self.persist(&LogRecord {
                verb: LogVerb::Mint,
                series: id.clone(),
                field: u64::from(params.k),
                payload: record.secret.to_hex(),
                decision: None,
            })?;
        }
        map.insert(id, Arc::new(Mutex::new(record)));
        Ok(params)
    }

    /// Draws a fresh secret for `id` at parameter `k` and registers it.
    pub fn mint_series<R: Rng + ?Sized>(
        &self,
        id: SeriesId,
        k: u32,
        rng: &mut R,
    ) -> Result<SecretString, BankError> {
        let params = SchemeParams::new(k)?;
        let secret = SecretString::random(&params, id, rng);
        self.create_series(secret.clone())?;
        Ok(secret)
    }

    fn insert_series(&self, secret: SecretString) -> Result<SchemeParams, BankError> {
        let id = secret.series().clone();
        let record = SeriesRecord::new(secret)?;
        let params = record.params;
        let mut map = self.series.write().expect("series map poisoned");
        if map.contains_key(&id) {
            return Err(BankError::DuplicateSeries(id));
        }
        map.insert(id, Arc::new(Mutex::new(record)));
        Ok(params)
    }

    fn slot(&self, id: &SeriesId) -> Result<Arc<Mutex<SeriesRecord>>, BankError> {
        self.series
            .read()
            .expect("series map poisoned")
            .get(id)
            .cloned()
            .ok_or_else(|| BankError::UnknownSeries(id.clone()))
    }

    fn persist(&self, record: &LogRecord) -> Result<(), BankError> {
        if let Some(log) = &self.log {
            log.lock().expect("log lock poisoned").append(record)?;
        }
        Ok(())
    }

    /// `VERIFY`: atomically tests the report, records the submission and
    /// persists it before answering.
    pub fn handle_verify(&self, series: &SeriesId, report: &TokenReport) -> Result<Verdict, BankError> {
        let slot = self.slot(series)?;
        let mut rec = slot.lock().expect("series lock poisoned");
        report.validate(rec.params.k).map_err(|_| BankError::IndexOutOfRange {
            index: report.index(),
            size: rec.params.num_indices(),
        })?;
        if !rec.budget_left() {
            return Ok(Err(RejectReason::BudgetExhausted));
        }
        let verdict = rec.decide_verify(report);
        self.persist(&LogRecord {
            verb: LogVerb::Verify,
            series: series.clone(),
            field: report.index(),
            payload: report.value_hex(rec.params.k),
            decision: verdict.err(),
        })?;
        rec.commit(*report);
        Ok(verdict)
    }

    /// `DECODE`: returns `C ⊕ F_S(I)` and consumes the pad `(I, F_S(I))`.
    pub fn handle_decode(&self, series: &SeriesId, index: u64, ciphertext: u64) -> Result<Verdict<u64>, BankError> {
        self.pad_request(series, index, ciphertext, LogVerb::Decode)
    }

    /// `VOTE`: decodes the ballot, consumes the pad and counts the choice.
    pub fn handle_vote(&self, series: &SeriesId, index: u64, ciphertext: u64) -> Result<Verdict<u64>, BankError> {
        self.pad_request(series, index, ciphertext, LogVerb::Vote)
    }

    fn pad_request(
        &self,
        series: &SeriesId,
        index: u64,
        ciphertext: u64,
        verb: LogVerb,
    ) -> Result<Verdict<u64>, BankError> {
        let slot = self.slot(series)?;
        let mut rec = slot.lock().expect("series lock poisoned");
        let pad = rec.check_index(index)?;
        if ciphertext > rec.params.value_mask() {
            return Err(BankError::BadPayload(format!("ciphertext wider than k = {}", rec.params.k)));
        }
        if !rec.budget_left() {
            return Ok(Err(RejectReason::BudgetExhausted));
        }
        let reuse = if verb == LogVerb::Vote {
            RejectReason::DoubleVote
        } else {
            RejectReason::DoubleSpend
        };
        let verdict = rec.decide_pad(index, ciphertext, reuse);
        self.persist(&LogRecord {
            verb,
            series: series.clone(),
            field: index,
            payload: format_value_hex(ciphertext, rec.params.k),
            decision: verdict.err(),
        })?;
        rec.commit(TokenReport::new(index, pad));
        if let (LogVerb::Vote, Ok(choice)) = (verb, verdict) {
            *rec.tally.entry(choice).or_insert(0) += 1;
        }
        Ok(verdict)
    }

    /// Snapshot of the vote counts, keyed by decoded choice.
    pub fn tally(&self, series: &SeriesId) -> Result<BTreeMap<u64, u64>, BankError> {
        let slot = self.slot(series)?;
        let rec = slot.lock().expect("series lock poisoned");
        Ok(rec.tally.clone())
    }

    /// Snapshot of a series record.
    pub fn snapshot(&self, series: &SeriesId) -> Result<SeriesRecord, BankError> {
        let slot = self.slot(series)?;
        let rec = slot.lock().expect("series lock poisoned");
        Ok(rec.clone())
    }

    pub fn series_ids(&self) -> Vec<SeriesId> {
        let mut ids: Vec<SeriesId> = self
            .series
            .read()
            .expect("series map poisoned")
            .keys()
            .cloned()
            .collect();
        ids.sort();
        ids
    }

    /// Parses and executes one protocol line.
    pub fn handle_line(&self, line: &str) -> WireResponse {
        match self.dispatch(line) {
            Ok(r) => r,
            Err(e) => WireResponse::Error(e),
        }
    }

    fn dispatch(&self, line: &str) -> Result<WireResponse, String> {
        let req = WireRequest::parse(line)?;
        let wire = |e: BankError| e.wire_reason().to_owned();
        let k = self.snapshot_k(&req.series).map_err(wire)?;
        let value = |payload: &Option<String>| -> Result<u64, String> {
            parse_fixed_hex(payload.as_deref().unwrap_or(""), (k / 4) as usize)
                .map_err(|_| "bad-payload".to_owned())
        };
        let index = req.index.unwrap_or(0);
        let response = match req.verb {
            Verb::Verify => {
                let report = TokenReport::new(index, value(&req.payload)?);
                match self.handle_verify(&req.series, &report).map_err(wire)? {
                    Ok(()) => WireResponse::Ok(None),
                    Err(r) => WireResponse::Reject(r),
                }
            }
            Verb::Decode => match self.handle_decode(&req.series, index, value(&req.payload)?).map_err(wire)? {
                Ok(m) => WireResponse::Ok(Some(format_value_hex(m, k))),
                Err(r) => WireResponse::Reject(r),
            },
            Verb::Vote => match self.handle_vote(&req.series, index, value(&req.payload)?).map_err(wire)? {
                Ok(_) => WireResponse::Ok(None),
                Err(r) => WireResponse::Reject(r),
            },
            Verb::Tally => {
                let tally = self.tally(&req.series).map_err(wire)?;
                let body: Vec<String> = tally
                    .iter()
                    .map(|(choice, n)| format!("{}:{n}", format_value_hex(*choice, k)))
                    .collect();
                WireResponse::Ok(Some(body.join(" ")))
            }
        };
        Ok(response)
    }

    fn snapshot_k(&self, series: &SeriesId) -> Result<u32, BankError> {
        let slot = self.slot(series)?;
        let k = slot.lock().expect("series lock poisoned").params.k;
        Ok(k)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn bank_with_series(k: u32) -> (Bank, SecretString) {
        let bank = Bank::in_memory();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let s = bank.mint_series(SeriesId::new("s").unwrap(), k, &mut rng).unwrap();
        (bank, s)
    }

    #[test]
    fn verify_accepts_once_then_rejects() {
        let (bank, s) = bank_with_series(4);
        let id = s.series().clone();
        let r = TokenReport::new(3, s.block(2));
        assert_eq!(bank.handle_verify(&id, &r).unwrap(), Ok(()));
        assert_eq!(bank.handle_verify(&id, &r).unwrap(), Err(RejectReason::DoubleSpend));
        let bad = TokenReport::new(4, s.block(3) ^ 1);
        assert_eq!(bank.handle_verify(&id, &bad).unwrap(), Err(RejectReason::BadValue));
        let other = TokenReport::new(5, s.block(4));
        assert_eq!(bank.handle_verify(&id, &other).unwrap(), Ok(()));
        // N_T = 4 submissions used up
        assert_eq!(
            bank.handle_verify(&id, &TokenReport::new(6, s.block(5))).unwrap(),
            Err(RejectReason::BudgetExhausted)
        );
        assert_eq!(bank.snapshot(&id).unwrap().attempts, 4);
    }

    #[test]
    fn unknown_series_and_bad_index_are_errors() {
        let (bank, s) = bank_with_series(4);
        let missing = SeriesId::new("nope").unwrap();
        assert!(matches!(
            bank.handle_verify(&missing, &TokenReport::new(1, 0)),
            Err(BankError::UnknownSeries(_))
        ));
        assert!(matches!(
            bank.handle_decode(s.series(), 17, 0),
            Err(BankError::IndexOutOfRange { index: 17, size: 16 })
        ));
        assert_eq!(bank.handle_line("VERIFY nope 1 0"), WireResponse::Error("unknown-series".into()));
        assert_eq!(bank.handle_line("VERIFY s 1 00"), WireResponse::Error("bad-payload".into()));
        assert_eq!(bank.handle_line("VERIFY s 0 0"), WireResponse::Error("index-out-of-range".into()));
    }

    #[test]
    fn decode_consumes_the_pad() {
        let (bank, s) = bank_with_series(8);
        let id = s.series().clone();
        let r = TokenReport::new(9, s.block(8));
        let c = otp::encode(&r, 0x5a);
        assert_eq!(bank.handle_decode(&id, 9, c).unwrap(), Ok(0x5a));
        assert_eq!(bank.handle_decode(&id, 9, c).unwrap(), Err(RejectReason::DoubleSpend));
        // the pad's pair also counts as spent for VERIFY
        assert_eq!(bank.handle_verify(&id, &r).unwrap(), Err(RejectReason::DoubleSpend));
    }

    #[test]
    fn votes_are_counted_once_per_pad() {
        let (bank, s) = bank_with_series(8);
        let id = s.series().clone();
        for (i, choice) in [(1u64, 2u64), (2, 2), (3, 7)] {
            let r = TokenReport::new(i, s.block(i - 1));
            assert_eq!(bank.handle_vote(&id, i, otp::encode(&r, choice)).unwrap(), Ok(choice));
        }
        let r = TokenReport::new(1, s.block(0));
        assert_eq!(
            bank.handle_vote(&id, 1, otp::encode(&r, 7)).unwrap(),
            Err(RejectReason::DoubleVote)
        );
        assert_eq!(bank.tally(&id).unwrap(), BTreeMap::from([(2, 2), (7, 1)]));
        assert_eq!(bank.handle_line("TALLY s"), WireResponse::Ok(Some("02:2 07:1".into())));
    }

    #[test]
    fn wire_lines_map_to_handlers() {
        let (bank, s) = bank_with_series(4);
        let line = format!("VERIFY s 2 {:x}", s.block(1));
        assert_eq!(bank.handle_line(&line), WireResponse::Ok(None));
        assert_eq!(bank.handle_line(&line), WireResponse::Reject(RejectReason::DoubleSpend));
        let c = s.block(2) ^ 0x3;
        assert_eq!(
            bank.handle_line(&format!("DECODE s 3 {c:x}")),
            WireResponse::Ok(Some("3".into()))
        );
        assert!(matches!(bank.handle_line("HELLO"), WireResponse::Error(_)));
    }
}
