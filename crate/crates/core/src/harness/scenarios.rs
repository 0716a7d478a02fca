//! Monte Carlo scenarios. Every trial talks to its own in-process bank
//! through the wire protocol, so the same parsing and decision code runs as
//! behind the socket.

use std::collections::BTreeMap;

use rand::seq::index::sample;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::result::{ExperimentResult, MetricRow, Relation};
use super::rng::{sub_seed, trial_rng};
use super::stats::{chi_squared_two_sample, chi_squared_uniform, proportion_sigma};
use super::{run_trials, HarnessError, Histogram, Merge, Scenario, ScenarioSpec};
use crate::adversary::{
    eval_forgery_bound, flag_paired, mint_loaded, mint_permutation_paired, run_forgery, trace_loaded,
    ForgerStrategy, Permutation, TokenSource, TrackingBankStrategy,
};
use crate::audit::{report_chain, report_prime};
use crate::bank::{otp, Bank, RejectReason, WireResponse};
use crate::quantum::{RegisterLayout, SparseState};
use crate::scheme::{
    format_value_hex, parse_fixed_hex, report, report_emulated, token_state, SchemeParams,
    SecretString, SeriesId, TokenReport,
};

/// Significance level of every goodness-of-fit row.
const SIGNIFICANCE: f64 = 0.001;

/// Index count of the toy scheme in the forgery demo.
const TOY_SIZE: u64 = 256;

/// Voters per election in the voting scenario.
const VOTERS: usize = 4;
/// Distinct ballot choices.
const CHOICES: u64 = 3;

pub(super) fn run(spec: &ScenarioSpec) -> Result<ExperimentResult, HarnessError> {
    let source = spec.resolved_source()?;
    let params = SchemeParams::new(spec.k).map_err(|e| HarnessError::IncompatibleK {
        scenario: spec.scenario,
        k: spec.k,
        reason: e.to_string(),
    })?;
    let takes_strategy = matches!(spec.scenario, Scenario::Forgery | Scenario::TrackingAudit);
    if spec.strategy.is_some() && !takes_strategy {
        return Err(bad(spec, "this scenario has no strategies"));
    }
    if spec.history_len.is_some() && spec.scenario != Scenario::AdversarialHistory {
        return Err(bad(spec, "history length only applies to adversarial-history"));
    }
    let ctx = Ctx {
        spec,
        params,
        source,
    };
    match spec.scenario {
        Scenario::HonestFlow => honest_flow(&ctx),
        Scenario::AdversarialHistory => adversarial_history(&ctx),
        Scenario::Forgery => forgery(&ctx),
        Scenario::TrackingAudit => tracking_audit(&ctx),
        Scenario::OtpRoundtrip => otp_roundtrip(&ctx),
        Scenario::Voting => voting(&ctx),
        Scenario::InequalitySuite => unreachable!("handled by run_scenario"),
    }
}

fn bad(spec: &ScenarioSpec, reason: &str) -> HarnessError {
    HarnessError::BadOption {
        scenario: spec.scenario,
        reason: reason.to_owned(),
    }
}

struct Ctx<'a> {
    spec: &'a ScenarioSpec,
    params: SchemeParams,
    source: TokenSource,
}

impl Ctx<'_> {
    fn name(&self) -> &'static str {
        self.spec.scenario.as_str()
    }

    fn k(&self) -> u32 {
        self.params.k
    }

    fn trials(&self) -> u64 {
        self.spec.trials
    }

    fn rate(&self, metric: &str, claim: &str, hits: u64, reference: f64, rel: Relation) -> MetricRow {
        MetricRow::rate(self.name(), metric, claim, hits, self.trials(), reference, rel)
    }

    fn p_value(&self, metric: &str, claim: &str, p: f64) -> MetricRow {
        MetricRow::exact(self.name(), metric, claim, self.trials(), p, SIGNIFICANCE, Relation::AtLeast)
    }

    /// A fresh secret in the representation the token source needs.
    fn secret(&self, rng: &mut ChaCha8Rng) -> SecretString {
        let id = series_id();
        match self.source {
            TokenSource::Quantum => SecretString::random(&self.params, id, rng),
            TokenSource::Emulated => SecretString::random_keyed(&self.params, id, rng),
        }
    }

    fn honest_report(&self, secret: &SecretString, rng: &mut ChaCha8Rng) -> Result<TokenReport, HarnessError> {
        Ok(match self.source {
            TokenSource::Quantum => report(&token_state(secret)?, rng)?,
            TokenSource::Emulated => report_emulated(secret, rng),
        })
    }

    /// Histogram cell of a report: `(I, R)` while that stays small,
    /// otherwise the top bits of `I` (at most 1024 cells).
    fn cell(&self, r: &TokenReport) -> u64 {
        let k = self.k();
        if 2 * k <= 12 {
            ((r.index() - 1) << k) | r.value()
        } else {
            (r.index() - 1) >> k.saturating_sub(10)
        }
    }

    fn cells(&self) -> u64 {
        let k = self.k();
        if 2 * k <= 12 {
            1 << (2 * k)
        } else {
            1 << k.min(10)
        }
    }
}

fn series_id() -> SeriesId {
    SeriesId::new("trial").expect("valid id")
}

/// Bank with one registered series.
fn bank_with(secret: &SecretString) -> Result<Bank, HarnessError> {
    let bank = Bank::in_memory();
    bank.create_series(secret.clone())?;
    Ok(bank)
}

fn verify(bank: &Bank, secret: &SecretString, r: &TokenReport) -> WireResponse {
    bank.handle_line(&format!(
        "VERIFY {} {} {}",
        secret.series(),
        r.index(),
        r.value_hex(secret.k())
    ))
}

fn pad_request(bank: &Bank, verb: &str, secret: &SecretString, index: u64, c: u64) -> WireResponse {
    bank.handle_line(&format!(
        "{verb} {} {index} {}",
        secret.series(),
        format_value_hex(c, secret.k())
    ))
}

fn accepted(resp: &WireResponse) -> Result<bool, HarnessError> {
    match resp {
        WireResponse::Ok(_) => Ok(true),
        WireResponse::Reject(_) => Ok(false),
        WireResponse::Error(e) => Err(HarnessError::UnexpectedResponse(e.clone())),
    }
}

fn two_registers(a: (&str, u32), b: (&str, u32)) -> Result<RegisterLayout, HarnessError> {
    Ok(RegisterLayout::from_widths(&[(a.0, a.1 as usize), (b.0, b.1 as usize)])?)
}

/// Integer tallies of one or more trials: up to eight counters and two
/// report histograms.
#[derive(Default)]
struct Counts {
    n: [u64; 8],
    hist: [Histogram; 2],
}

impl Counts {
    fn hit(&mut self, slot: usize, cond: bool) {
        self.n[slot] += u64::from(cond);
    }
}

impl Merge for Counts {
    fn merge(&mut self, other: Self) {
        for (a, b) in self.n.iter_mut().zip(other.n) {
            *a += b;
        }
        for (a, b) in self.hist.iter_mut().zip(other.hist) {
            a.merge(b);
        }
    }
}

fn honest_flow(ctx: &Ctx) -> Result<ExperimentResult, HarnessError> {
    const ACCEPTED: usize = 0;
    const CHEAT: usize = 1;
    let quantum = ctx.source == TokenSource::Quantum;
    let k = ctx.k();
    let layout = two_registers(("pattern", 2 * k), ("token", 2 * k))?;
    let c: Counts = run_trials(ctx.spec.seed, "honest-flow", ctx.trials(), |rng| {
        let mut c = Counts::default();
        let secret = ctx.secret(rng);
        let bank = bank_with(&secret)?;
        let submitted = if quantum {
            // the user audits a received token against a pattern copy of the series
            let token = token_state(&secret)?;
            let joint = token.tensor(&token)?;
            let step = report_prime(&joint, &layout, "pattern", "token", rng)?;
            c.hist[1].add(ctx.cell(&report(&token, rng)?));
            match step.outcome.report() {
                Some(r) => r,
                None => {
                    c.hit(CHEAT, true);
                    return Ok(c);
                }
            }
        } else {
            report_emulated(&secret, rng)
        };
        c.hist[0].add(ctx.cell(&submitted));
        c.hit(ACCEPTED, accepted(&verify(&bank, &secret, &submitted))?);
        Ok(c)
    })?;

    let mut out = ExperimentResult::new();
    out.push(ctx.rate("acceptance-rate", "honest-acceptance", c.n[ACCEPTED], 1.0, Relation::Equal));
    let cells = ctx.cells();
    out.push(ctx.p_value(
        "report-uniformity-p",
        "report-distribution",
        chi_squared_uniform(&c.hist[0].dense(cells)),
    ));
    if quantum {
        out.push(ctx.rate("audit-cheat-rate", "audit-identical-tokens", c.n[CHEAT], 0.0, Relation::Equal));
        out.push(ctx.p_value(
            "audited-vs-plain-p",
            "audit-preserves-reports",
            chi_squared_two_sample(&c.hist[0].dense(cells), &c.hist[1].dense(cells)),
        ));
    }
    Ok(out)
}

fn adversarial_history(ctx: &Ctx) -> Result<ExperimentResult, HarnessError> {
    const REJECTED: usize = 0;
    const HISTORY_OK: usize = 1;
    let size = ctx.params.num_indices();
    let n_t = ctx.params.cap_test;
    let j = ctx.spec.history_len.unwrap_or(n_t - 1);
    if j >= n_t {
        return Err(bad(ctx.spec, "the history must leave one verification in the budget"));
    }
    let c: Counts = run_trials(ctx.spec.seed, "adversarial-history", ctx.trials(), |rng| {
        let mut c = Counts::default();
        let secret = ctx.secret(rng);
        let bank = bank_with(&secret)?;
        // the adversary spends j distinct valid pairs first
        let mut all_ok = true;
        for i in sample(rng, size as usize, j as usize) {
            let r = TokenReport::new(i as u64 + 1, secret.block(i as u64));
            all_ok &= accepted(&verify(&bank, &secret, &r))?;
        }
        c.hit(HISTORY_OK, all_ok);
        let honest = ctx.honest_report(&secret, rng)?;
        let resp = verify(&bank, &secret, &honest);
        c.hit(REJECTED, resp == WireResponse::Reject(RejectReason::DoubleSpend));
        Ok(c)
    })?;

    let mut out = ExperimentResult::new();
    out.push(ctx.rate("history-acceptance-rate", "history-collision", c.n[HISTORY_OK], 1.0, Relation::Equal));
    out.push(ctx.rate(
        "rejection-rate",
        "history-collision",
        c.n[REJECTED],
        j as f64 / size as f64,
        Relation::Equal,
    ));
    out.push(ctx.rate(
        "rejection-rate-vs-eps-l",
        "correctness-bound",
        c.n[REJECTED],
        ctx.params.eps_l,
        Relation::AtMost,
    ));
    Ok(out)
}

/// Forger configurations run by default: name and number of measured tokens.
const FORGERS: [(&str, usize); 5] = [
    ("uniform-guess", 0),
    ("measure-and-guess", 1),
    ("measure-and-guess", 2),
    ("replay", 1),
    ("block-collision", 2),
];

fn forgery(ctx: &Ctx) -> Result<ExperimentResult, HarnessError> {
    let n_t = ctx.params.cap_test;
    let size = ctx.params.num_indices();
    let chosen: Vec<(&str, usize)> = match &ctx.spec.strategy {
        None => FORGERS.to_vec(),
        Some(name) => {
            let picked: Vec<_> = FORGERS.iter().copied().filter(|(n, _)| n == name).collect();
            if picked.is_empty() {
                ForgerStrategy::named(name, 0, n_t as usize)?;
                return Err(bad(ctx.spec, &format!("no configuration for {name}")));
            }
            picked
        }
    };

    let mut out = ExperimentResult::new();
    for (name, q) in chosen {
        let strat = ForgerStrategy::named(name, q, n_t as usize)?;
        let tag = format!("{name}-q{q}");
        let c: Counts = run_trials(ctx.spec.seed, &tag, ctx.trials(), |rng| {
            let mut c = Counts::default();
            let secret = ctx.secret(rng);
            c.hit(0, run_forgery(&secret, &strat, ctx.source, rng)?.win());
            Ok(c)
        })?;
        let wins = c.n[0];
        out.push(ctx.rate(
            &format!("{tag}-win-rate"),
            "forgery-bound",
            wins,
            eval_forgery_bound(n_t, q as u64, size),
            Relation::AtMost,
        ));
        match name {
            "uniform-guess" => {
                let miss = 1.0 - 1.0 / size as f64;
                out.push(ctx.rate(
                    &format!("{tag}-exact-rate"),
                    "uniform-guess-success",
                    wins,
                    1.0 - miss.powi(n_t as i32),
                    Relation::Equal,
                ));
            }
            "replay" => out.push(MetricRow::exact(
                ctx.name(),
                &format!("{tag}-wins"),
                "replay-rejected",
                ctx.trials(),
                wins as f64,
                0.0,
                Relation::Equal,
            )),
            _ => {}
        }
    }

    if ctx.spec.strategy.is_none() {
        // toy bit-valued scheme: one measured token plus one fresh guess
        let c: Counts = run_trials(ctx.spec.seed, "toy-cheat", ctx.trials(), |rng| {
            let mut c = Counts::default();
            let bits: Vec<bool> = (0..TOY_SIZE).map(|_| rng.random()).collect();
            let i = rng.random_range(0..TOY_SIZE);
            let j = loop {
                let j = rng.random_range(0..TOY_SIZE);
                if j != i {
                    break j;
                }
            };
            let guess: bool = rng.random();
            // (i, bits[i]) is accepted; the guess is fresh, so only its value matters
            c.hit(0, guess == bits[j as usize]);
            Ok(c)
        })?;
        out.push(ctx.rate("toy-cheat-win-rate", "toy-scheme-cheater", c.n[0], 0.5, Relation::Info));
    }
    Ok(out)
}

fn tracking_audit(ctx: &Ctx) -> Result<ExperimentResult, HarnessError> {
    let strategies = match &ctx.spec.strategy {
        None => vec![
            TrackingBankStrategy::Honest,
            TrackingBankStrategy::LoadedEntangled,
            TrackingBankStrategy::PermutationPaired,
        ],
        Some(name) => vec![name.parse::<TrackingBankStrategy>()?],
    };
    let mut out = ExperimentResult::new();
    for s in strategies {
        out.extend(match s {
            TrackingBankStrategy::Honest => track_honest(ctx)?,
            TrackingBankStrategy::LoadedEntangled => track_loaded(ctx)?,
            TrackingBankStrategy::PermutationPaired => track_paired(ctx)?,
        });
    }
    Ok(out)
}

fn detection_reference(k: u32) -> f64 {
    (1.0 - 2f64.powi(-(k as i32))) / 2.0
}

fn track_honest(ctx: &Ctx) -> Result<ExperimentResult, HarnessError> {
    let k = ctx.k();
    let layout = two_registers(("pattern", 2 * k), ("token", 2 * k))?;
    let c: Counts = run_trials(ctx.spec.seed, "track-honest", ctx.trials(), |rng| {
        let mut c = Counts::default();
        let secret = ctx.secret(rng);
        let token = token_state(&secret)?;
        let audit = report_prime(&token.tensor(&token)?, &layout, "pattern", "token", rng)?;
        c.hit(0, audit.outcome.is_cheat());
        Ok(c)
    })?;
    let mut out = ExperimentResult::new();
    out.push(ctx.rate("honest-detection-rate", "audit-detects-tracking", c.n[0], 0.0, Relation::Equal));
    Ok(out)
}

fn track_loaded(ctx: &Ctx) -> Result<ExperimentResult, HarnessError> {
    const DETECT: usize = 0;
    const TRACE: usize = 1;
    const FALSE_TRACE: usize = 2;
    const ACCEPTED: usize = 3;
    let k = ctx.k();
    let joint_layout =
        RegisterLayout::from_widths(&[("pattern", 2 * k as usize), ("bank", k as usize), ("token", 2 * k as usize)])?;
    let c: Counts = run_trials(ctx.spec.seed, "track-loaded", ctx.trials(), |rng| {
        let mut c = Counts::default();
        let secret = ctx.secret(rng);
        let pattern = token_state(&secret)?;
        let (loaded, layout) = mint_loaded(&secret)?;

        let audit = report_prime(&pattern.tensor(&loaded)?, &joint_layout, "pattern", "token", rng)?;
        c.hit(DETECT, audit.outcome.is_cheat());

        // without the audit: the user reports, the bank verifies and traces
        let (word, post) = loaded.measure_register(&layout, "token", rng)?;
        let msg = TokenReport::from_wire(k, word);
        let honest = report(&pattern, rng)?;
        c.hist[0].add(ctx.cell(&msg));
        c.hist[1].add(ctx.cell(&honest));
        c.hit(ACCEPTED, accepted(&verify(&bank_with(&secret)?, &secret, &msg))?);
        c.hit(TRACE, trace_loaded(&post, &layout, &msg, rng)?);
        c.hit(FALSE_TRACE, trace_loaded(&loaded, &layout, &honest, rng)?);
        Ok(c)
    })?;
    let cells = ctx.cells();
    let name = TrackingBankStrategy::LoadedEntangled.name();
    let mut out = ExperimentResult::new();
    out.push(ctx.rate(
        &format!("{name}-detection-rate"),
        "audit-detects-tracking",
        c.n[DETECT],
        detection_reference(k),
        Relation::Equal,
    ));
    out.push(ctx.p_value(
        &format!("{name}-message-p"),
        "tracking-invisible-in-messages",
        chi_squared_two_sample(&c.hist[0].dense(cells), &c.hist[1].dense(cells)),
    ));
    out.push(ctx.rate(&format!("{name}-acceptance-rate"), "honest-acceptance", c.n[ACCEPTED], 1.0, Relation::Equal));
    out.push(ctx.rate(&format!("{name}-trace-rate"), "loaded-bank-traces", c.n[TRACE], 1.0, Relation::Equal));
    out.push(ctx.rate(
        &format!("{name}-false-trace-rate"),
        "loaded-bank-traces",
        c.n[FALSE_TRACE],
        2f64.powi(-(k as i32)),
        Relation::Equal,
    ));
    Ok(out)
}

fn track_paired(ctx: &Ctx) -> Result<ExperimentResult, HarnessError> {
    const DETECT: usize = 0;
    const FLAG: usize = 1;
    const FALSE_FLAG: usize = 2;
    const ACCEPTED: usize = 3;
    let k = ctx.k();
    let size = ctx.params.num_indices();
    let others = ctx.params.cap_test.saturating_sub(2);
    let joint_layout = RegisterLayout::from_widths(&[
        ("pattern", 2 * k as usize),
        ("token1", 2 * k as usize),
        ("token2", 2 * k as usize),
    ])?;
    let c: Counts = run_trials(ctx.spec.seed, "track-paired", ctx.trials(), |rng| {
        let mut c = Counts::default();
        let secret = ctx.secret(rng);
        let pattern = token_state(&secret)?;
        let h = Permutation::random(size, rng);
        let (paired, layout) = mint_permutation_paired(&secret, &h)?;

        let audit = report_prime(&pattern.tensor(&paired)?, &joint_layout, "pattern", "token1", rng)?;
        c.hit(DETECT, audit.outcome.is_cheat());

        let (w1, post) = paired.measure_register(&layout, "token1", rng)?;
        let (w2, _) = post.measure_register(&layout, "token2", rng)?;
        let (m1, m2) = (TokenReport::from_wire(k, w1), TokenReport::from_wire(k, w2));
        let honest = report(&pattern, rng)?;
        c.hist[0].add(ctx.cell(&m1));
        c.hist[1].add(ctx.cell(&honest));
        c.hit(ACCEPTED, accepted(&verify(&bank_with(&secret)?, &secret, &m1))?);
        c.hit(FLAG, flag_paired(&h, &[m1], &m2));
        // an unrelated message against a history of other honest users
        let history: Vec<TokenReport> = (0..others).map(|_| report_emulated(&secret, rng)).collect();
        c.hit(FALSE_FLAG, flag_paired(&h, &history, &report_emulated(&secret, rng)));
        Ok(c)
    })?;
    let cells = ctx.cells();
    let name = TrackingBankStrategy::PermutationPaired.name();
    let mut out = ExperimentResult::new();
    out.push(ctx.rate(
        &format!("{name}-detection-rate"),
        "audit-detects-tracking",
        c.n[DETECT],
        detection_reference(k),
        Relation::Equal,
    ));
    out.push(ctx.p_value(
        &format!("{name}-message-p"),
        "tracking-invisible-in-messages",
        chi_squared_two_sample(&c.hist[0].dense(cells), &c.hist[1].dense(cells)),
    ));
    out.push(ctx.rate(&format!("{name}-acceptance-rate"), "honest-acceptance", c.n[ACCEPTED], 1.0, Relation::Equal));
    // a fixed point of h pairs a token with itself, which the bank cannot flag
    out.push(ctx.rate(
        &format!("{name}-flag-rate"),
        "paired-bank-traces",
        c.n[FLAG],
        1.0 - 1.0 / size as f64,
        Relation::Equal,
    ));
    out.push(ctx.rate(
        &format!("{name}-false-pair-rate"),
        "paired-bank-traces",
        c.n[FALSE_FLAG],
        1.0 - (1.0 - 2.0 / size as f64).powi(others as i32),
        Relation::Info,
    ));
    Ok(out)
}

fn otp_roundtrip(ctx: &Ctx) -> Result<ExperimentResult, HarnessError> {
    const LOCAL: usize = 0;
    const REMOTE: usize = 1;
    const REUSE_REJECTED: usize = 2;
    let mask = ctx.params.value_mask();
    let digits = (ctx.k() / 4) as usize;
    let c: Counts = run_trials(ctx.spec.seed, "otp-roundtrip", ctx.trials(), |rng| {
        let mut c = Counts::default();
        let secret = ctx.secret(rng);
        let bank = bank_with(&secret)?;
        let pad = ctx.honest_report(&secret, rng)?;
        let message = rng.random_range(0..=mask);
        let cipher = otp::encode(&pad, message);
        c.hit(LOCAL, otp::decode(pad.value(), cipher) == message);
        let decoded = match pad_request(&bank, "DECODE", &secret, pad.index(), cipher) {
            WireResponse::Ok(Some(hex)) => Some(parse_fixed_hex(&hex, digits)?),
            WireResponse::Error(e) => return Err(HarnessError::UnexpectedResponse(e)),
            _ => None,
        };
        c.hit(REMOTE, decoded == Some(message));
        let again = otp::encode(&pad, rng.random_range(0..=mask));
        let resp = pad_request(&bank, "DECODE", &secret, pad.index(), again);
        c.hit(REUSE_REJECTED, resp == WireResponse::Reject(RejectReason::DoubleSpend));
        Ok(c)
    })?;
    let mut out = ExperimentResult::new();
    out.push(ctx.rate("local-roundtrip-rate", "pad-roundtrip", c.n[LOCAL], 1.0, Relation::Equal));
    out.push(ctx.rate("bank-roundtrip-rate", "pad-roundtrip", c.n[REMOTE], 1.0, Relation::Equal));
    out.push(ctx.rate("reuse-rejection-rate", "pad-single-use", c.n[REUSE_REJECTED], 1.0, Relation::Equal));
    Ok(out)
}

fn voting(ctx: &Ctx) -> Result<ExperimentResult, HarnessError> {
    const TALLY_OK: usize = 0;
    const BALLOTS: usize = 1;
    const COUNTED: usize = 2;
    const REVOTES: usize = 3;
    const REVOTE_REJECTED: usize = 4;
    // leave room in the budget for the repeated ballot
    let voters = VOTERS.min(ctx.params.cap_test as usize - 1);
    let c: Counts = run_trials(ctx.spec.seed, "voting", ctx.trials(), |rng| {
        let mut c = Counts::default();
        let secret = ctx.secret(rng);
        let bank = bank_with(&secret)?;
        let mut expected: BTreeMap<u64, u64> = BTreeMap::new();
        let mut first_pad = None;
        for _ in 0..voters {
            let pad = ctx.honest_report(&secret, rng)?;
            let choice = rng.random_range(0..CHOICES);
            let resp = pad_request(&bank, "VOTE", &secret, pad.index(), otp::encode(&pad, choice));
            c.n[BALLOTS] += 1;
            if accepted(&resp)? {
                c.n[COUNTED] += 1;
                *expected.entry(choice).or_insert(0) += 1;
                first_pad.get_or_insert(pad);
            }
        }
        c.hit(TALLY_OK, bank.tally(secret.series())? == expected);
        if let Some(pad) = first_pad {
            let choice = rng.random_range(0..CHOICES);
            let resp = pad_request(&bank, "VOTE", &secret, pad.index(), otp::encode(&pad, choice));
            c.n[REVOTES] += 1;
            c.hit(REVOTE_REJECTED, resp == WireResponse::Reject(RejectReason::DoubleVote));
        }
        Ok(c)
    })?;
    let mut out = ExperimentResult::new();
    out.push(ctx.rate("tally-correct-rate", "tally", c.n[TALLY_OK], 1.0, Relation::Equal));
    out.push(MetricRow::rate(
        ctx.name(),
        "double-vote-rejection-rate",
        "pad-single-use",
        c.n[REVOTE_REJECTED],
        c.n[REVOTES].max(1),
        1.0,
        Relation::Equal,
    ));
    out.push(MetricRow::rate(
        ctx.name(),
        "ballot-acceptance-rate",
        "correctness-bound",
        c.n[COUNTED],
        c.n[BALLOTS],
        1.0 - ctx.params.eps_l,
        Relation::AtLeast,
    ));
    Ok(out)
}

/// Swap-test statistics over random product pairs `|φ⟩ ⊗ |ψ⟩`.
#[derive(Clone, Debug, PartialEq)]
pub struct SwapLawSample {
    pub pairs: u64,
    pub shots: u64,
    /// Largest `|swap_probability − (1 − |⟨φ|ψ⟩|²)/2|`.
    pub max_exact_error: f64,
    /// Swap tests that answered 1, over all pairs.
    pub ones: u64,
    /// Sum of the exact answer-1 probabilities over all shots.
    pub expected_ones: f64,
    /// Standard deviation of `ones`.
    pub sigma: f64,
    /// Largest per-pair deviation in units of that pair's standard deviation.
    pub max_pair_z: f64,
}

impl SwapLawSample {
    /// Total count within `z` standard deviations of its expectation.
    pub fn within(&self, z: f64) -> bool {
        (self.ones as f64 - self.expected_ones).abs() <= z * self.sigma.max(f64::MIN_POSITIVE)
    }
}

/// Draws `pairs` random pure-state pairs of 1 to 3 qubits each and runs
/// `shots_per_pair` sampled swap tests on each.
pub fn swap_law_sampled(seed: u64, pairs: u64, shots_per_pair: u64) -> Result<SwapLawSample, HarnessError> {
    use rayon::prelude::*;
    let seed = sub_seed(seed, "swap-law");
    let per_pair: Vec<(f64, u64, f64)> = (0..pairs)
        .into_par_iter()
        .map(|t| -> Result<_, HarnessError> {
            let mut rng = trial_rng(seed, t);
            let width = rng.random_range(1..=3usize);
            let phi = SparseState::random(width, &mut rng)?;
            let psi = SparseState::random(width, &mut rng)?;
            let layout = RegisterLayout::uniform(&["a", "b"], width)?;
            let joint = phi.tensor(&psi)?;
            let exact = joint.swap_probability(&layout, "a", "b")?;
            let formula = (1.0 - phi.inner_product(&psi)?.norm_sqr()) / 2.0;
            let mut ones = 0;
            for _ in 0..shots_per_pair {
                ones += u64::from(joint.swap_test(&layout, "a", "b", &mut rng)?.bit);
            }
            Ok(((exact - formula).abs(), ones, exact))
        })
        .collect::<Result<_, _>>()?;
    let shots = shots_per_pair as f64;
    let mut sample = SwapLawSample {
        pairs,
        shots: pairs * shots_per_pair,
        max_exact_error: 0.0,
        ones: 0,
        expected_ones: 0.0,
        sigma: 0.0,
        max_pair_z: 0.0,
    };
    let mut var = 0.0;
    for (err, ones, p) in per_pair {
        sample.max_exact_error = sample.max_exact_error.max(err);
        sample.ones += ones;
        sample.expected_ones += p * shots;
        let v = p * (1.0 - p) * shots;
        var += v;
        if v > 0.0 {
            sample.max_pair_z = sample.max_pair_z.max((ones as f64 - p * shots).abs() / v.sqrt());
        }
    }
    sample.sigma = var.sqrt();
    Ok(sample)
}

/// Sampled `⊥` counts of the chained audit and of a single audit on random
/// states over three 2-qubit registers.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PatternChainSample {
    pub trials: u64,
    pub chain_bot: u64,
    pub prime_bot: u64,
}

impl PatternChainSample {
    pub fn chain_rate(&self) -> f64 {
        self.chain_bot as f64 / self.trials as f64
    }

    pub fn prime_rate(&self) -> f64 {
        self.prime_bot as f64 / self.trials as f64
    }

    /// Standard deviation of the difference of the two rates.
    pub fn combined_sigma(&self) -> f64 {
        let a = proportion_sigma(self.chain_bot, self.trials);
        let b = proportion_sigma(self.prime_bot, self.trials);
        (a * a + b * b).sqrt()
    }

    /// Chained rate at least the single-audit rate minus `z` combined sigmas.
    pub fn holds(&self, z: f64) -> bool {
        self.chain_rate() >= self.prime_rate() - z * self.combined_sigma()
    }
}

/// One fresh random state per trial; the chained audit (pattern against
/// `t2`, then `t1`) and the single audit (pattern against `t1`) each run on
/// their own copy.
pub fn pattern_chain_sampled(seed: u64, trials: u64) -> Result<PatternChainSample, HarnessError> {
    let layout = RegisterLayout::from_widths(&[("p", 2), ("t1", 2), ("t2", 2)])?;
    let c: Counts = run_trials(seed, "pattern-chain-sampled", trials, |rng| {
        let mut c = Counts::default();
        let chi = SparseState::random(6, rng)?;
        c.hit(0, report_chain(&chi, &layout, "p", &["t1", "t2"], rng)?.outcome.is_cheat());
        c.hit(1, report_prime(&chi, &layout, "p", "t1", rng)?.outcome.is_cheat());
        Ok(c)
    })?;
    Ok(PatternChainSample {
        trials,
        chain_bot: c.n[0],
        prime_bot: c.n[1],
    })
}
