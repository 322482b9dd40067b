//! Challenge-response authentication over `Part(n)^t`.
//!
//! The prover and the verifier share a secret vector `s` of `p` tuples whose
//! first four entries generate the whole power. The verifier sends `q` long
//! random `p`-ary terms; the prover answers with their values at `s`.
//!
//! Sessions are sans-IO: [`VerifierSession`] and [`ProverSession`] consume one
//! [`Message`] and return the reply, so the same state machines drive TCP,
//! stdio and in-memory runs ([`run_local`]).

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use crate::combinatorics::{half_size, m_of_n, max_stirling};
use crate::error::{Error, Result};
use crate::genset::is_generating;
use crate::partition::{LatticeShape, PartitionSampler, PartitionTuple, Permutation};
use crate::power::{build_four_generators_at, certify_generators};
use crate::rng::ShiftRng;
use crate::term::{random_term, GrowthPolicy, Term};
use crate::zadori::{verify_relabeled, EntryRule, ZadoriConfig};

pub const PROTOCOL_VERSION: u32 = 1;
pub const DEFAULT_P: usize = 8;
pub const DEFAULT_Q: usize = 8;
pub const DEFAULT_STEPS: usize = 1000;
pub const DEFAULT_THRESHOLD: usize = 3;
pub const DEFAULT_MAX_RETRIES: usize = 16;

/// Antichain pools above this size are not enumerated.
const MAX_POOL_SIDE: u64 = 200_000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Secret {
    shape: LatticeShape,
    entries: Vec<PartitionTuple>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SecretMode {
    /// Relabeled four-element configuration; `t = 1` only.
    PermuteZadori,
    /// Relabeled four generators of a power, on a random choice of antichain
    /// coordinates.
    PermutePower,
    /// Caller-supplied leading entries, checked by brute-force closure.
    Explicit(Vec<PartitionTuple>),
}

impl Secret {
    pub fn new(shape: LatticeShape, entries: Vec<PartitionTuple>) -> Result<Self> {
        if entries.len() < 4 {
            return Err(Error::invalid(format!("a secret needs p >= 4 entries, got {}", entries.len())));
        }
        if let Some(bad) = entries.iter().find(|e| e.shape() != shape) {
            return Err(Error::shape(shape, bad.shape()));
        }
        Ok(Secret { shape, entries })
    }

    pub fn shape(&self) -> LatticeShape {
        self.shape
    }

    pub fn p(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> &[PartitionTuple] {
        &self.entries
    }

    /// Line 1 the shape, line 2 `p`, then one tuple per line.
    pub fn to_file_string(&self) -> String {
        let mut out = format!("{}\n{}\n", self.shape, self.p());
        for e in &self.entries {
            out.push_str(&e.to_string());
            out.push('\n');
        }
        out
    }
}

impl FromStr for Secret {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
        let shape: LatticeShape = lines.next().ok_or_else(|| Error::parse("", "missing shape line"))?.parse()?;
        let p_line = lines.next().ok_or_else(|| Error::parse("", "missing p line"))?;
        let p: usize = p_line.parse().map_err(|_| Error::parse(p_line, "bad tuple count"))?;
        let entries = lines
            .map(|l| PartitionTuple::parse_with_shape(l, shape))
            .collect::<Result<Vec<_>>>()?;
        if entries.len() != p {
            return Err(Error::parse(p_line, format!("declared {p} tuples, found {}", entries.len())));
        }
        Secret::new(shape, entries)
    }
}

/// The configuration quadruple of `Part(n)` relabeled by `perm`, certified.
pub fn zadori_quadruple(n: usize, perm: &Permutation) -> Result<[PartitionTuple; 4]> {
    let config = ZadoriConfig::new(n)?;
    let cert = verify_relabeled(&config, EntryRule::Direct, perm)?;
    if let Some(f) = cert.first_failure() {
        return Err(Error::invalid(format!("relabeled configuration failed: {f}")));
    }
    let quad = config
        .quadruple()
        .map(|x| x.permute(perm).map(PartitionTuple::from))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    Ok(quad.try_into().expect("four entries"))
}

/// Four generators of `Part(n)^t` on antichain `positions` (`t` of them),
/// coordinate `i` relabeled by `perms[i]`, certified.
pub fn power_quadruple(n: usize, positions: &[usize], perms: &[Permutation]) -> Result<[PartitionTuple; 4]> {
    let set = build_four_generators_at(n, positions)?;
    let quad = set.permuted_quadruple(perms)?;
    let cert = certify_generators(&set, &quad, Some(perms))?;
    if let Some(f) = cert.first_failure() {
        return Err(Error::invalid(format!("relabeled generators failed: {f}")));
    }
    Ok(quad)
}

/// Builds a secret of length `p`: a certified generating quadruple followed
/// by `p - 4` uniform random tuples.
pub fn make_secret(shape: LatticeShape, p: usize, seed: u64, mode: SecretMode) -> Result<Secret> {
    if p < 4 {
        return Err(Error::invalid(format!("a secret needs p >= 4, got {p}")));
    }
    let LatticeShape { n, t } = shape;
    let mut rng = ShiftRng::new(seed);
    let mut entries: Vec<PartitionTuple> = match mode {
        SecretMode::PermuteZadori => {
            if t != 1 {
                return Err(Error::invalid(format!("the relabeled configuration needs t = 1, got {shape}")));
            }
            zadori_quadruple(n, &Permutation::random(n, &mut rng))?.to_vec()
        }
        SecretMode::PermutePower => {
            let positions = random_positions(n, t, &mut rng)?;
            let perms: Vec<Permutation> = (0..t).map(|_| Permutation::random(n, &mut rng)).collect();
            power_quadruple(n, &positions, &perms)?.to_vec()
        }
        SecretMode::Explicit(given) => {
            if given.len() > p {
                return Err(Error::invalid(format!("{} explicit entries exceed p = {p}", given.len())));
            }
            if let Some(bad) = given.iter().find(|e| e.shape() != shape) {
                return Err(Error::shape(shape, bad.shape()));
            }
            if given.is_empty() || !is_generating(&given)? {
                return Err(Error::invalid("explicit entries do not generate the power"));
            }
            given
        }
    };
    let sampler = PartitionSampler::new(n)?;
    while entries.len() < p {
        let coords = (0..t).map(|_| sampler.sample(&mut rng)).collect();
        entries.push(PartitionTuple::new(coords)?);
    }
    Secret::new(shape, entries)
}

/// `t` distinct ascending positions in `0..m(n)`.
fn random_positions(n: usize, t: usize, rng: &mut ShiftRng) -> Result<Vec<usize>> {
    let m = m_of_n(n)?;
    if t == 0 || m < num_bigint::BigUint::from(t) {
        return Err(Error::invalid(format!("P{n}^{t} is beyond m({n}) = {m}")));
    }
    let k = half_size(n);
    let side = max_stirling(k)?.0;
    if side > num_bigint::BigUint::from(MAX_POOL_SIDE) {
        return Err(Error::invalid(format!("antichain pool for n = {n} is too large to enumerate")));
    }
    let m = usize::try_from(&m).expect("pool fits");
    // Floyd's sampling without replacement.
    let mut chosen = BTreeSet::new();
    for j in m - t..m {
        let x = rng.below_usize(j + 1);
        if !chosen.insert(x) {
            chosen.insert(j);
        }
    }
    Ok(chosen.into_iter().collect())
}

#[derive(Debug, Clone)]
pub struct Challenge {
    pub id: u64,
    pub terms: Vec<Term>,
    pub steps: usize,
    /// Known to the issuer only; never sent.
    pub seed: Option<u64>,
}

impl Challenge {
    pub fn q(&self) -> usize {
        self.terms.len()
    }

    pub fn to_message(&self) -> Message {
        Message::Challenge {
            id: self.id,
            terms: self.terms.iter().map(Term::to_sexpr).collect(),
        }
    }

    /// Re-reads transmitted terms as `p`-ary terms.
    pub fn from_wire(id: u64, terms: &[String], p: usize) -> Result<Self> {
        let terms = terms.iter().map(|t| Term::parse(t, p)).collect::<Result<Vec<_>>>()?;
        Ok(Challenge {
            id,
            terms,
            steps: 0,
            seed: None,
        })
    }
}

/// `q` independent random terms of arity `p`, each grown for `steps` steps.
pub fn make_challenge(p: usize, q: usize, steps: usize, seed: u64) -> Result<Challenge> {
    if q == 0 {
        return Err(Error::invalid("a challenge needs q >= 1 terms"));
    }
    let mut rng = ShiftRng::new(seed);
    let id = rng.next_u64();
    let terms = (0..q)
        .map(|_| random_term(p, steps, &mut rng, GrowthPolicy::Uniform).map(|r| r.term))
        .collect::<Result<Vec<_>>>()?;
    Ok(Challenge {
        id,
        terms,
        steps,
        seed: Some(seed),
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Response {
    pub id: u64,
    pub values: Vec<PartitionTuple>,
}

impl Response {
    /// Canonical serialization: tuples joined by `/`.
    pub fn payload(&self) -> String {
        join_tuples(&self.values)
    }

    pub fn to_message(&self) -> Message {
        Message::Response {
            id: self.id,
            tuples: self.values.clone(),
        }
    }
}

fn join_tuples(values: &[PartitionTuple]) -> String {
    values.iter().map(ToString::to_string).collect::<Vec<_>>().join("/")
}

pub fn respond(secret: &Secret, challenge: &Challenge) -> Result<Response> {
    let values = evaluate(secret, &challenge.terms)?;
    Ok(Response { id: challenge.id, values })
}

fn evaluate(secret: &Secret, terms: &[Term]) -> Result<Vec<PartitionTuple>> {
    terms
        .iter()
        .map(|w| {
            if w.arity() != secret.p() {
                return Err(Error::invalid(format!("term arity {} but p = {}", w.arity(), secret.p())));
            }
            w.eval(secret.entries())
        })
        .collect()
}

/// Exact comparison against a fresh evaluation.
pub fn verify_response(secret: &Secret, challenge: &Challenge, response: &Response) -> Result<bool> {
    if response.id != challenge.id || response.values.len() != challenge.q() {
        return Ok(false);
    }
    Ok(respond(secret, challenge)?.values == response.values)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum QualityIssue {
    Bottom { index: usize },
    Top { index: usize },
    NearResponse { i: usize, j: usize, distance: usize },
    NearSecret { i: usize, j: usize, distance: usize },
    NearBottom { i: usize, distance: usize },
    NearTop { i: usize, distance: usize },
}

impl fmt::Display for QualityIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            QualityIssue::Bottom { index } => write!(f, "r{index} is bottom"),
            QualityIssue::Top { index } => write!(f, "r{index} is top"),
            QualityIssue::NearResponse { i, j, distance } => write!(f, "d(r{i}, r{j}) = {distance}"),
            QualityIssue::NearSecret { i, j, distance } => write!(f, "d(r{i}, s{j}) = {distance}"),
            QualityIssue::NearBottom { i, distance } => write!(f, "d(r{i}, 0) = {distance}"),
            QualityIssue::NearTop { i, distance } => write!(f, "d(r{i}, 1) = {distance}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QualityReport {
    pub threshold: usize,
    pub issues: Vec<QualityIssue>,
}

impl QualityReport {
    pub fn passed(&self) -> bool {
        self.issues.is_empty()
    }
}

/// Flags responses that are constant, or closer than `threshold` to each
/// other, to a secret entry, or to either bound. Indices are 1-based.
pub fn quality_check(secret: &Secret, challenge: &Challenge, threshold: usize) -> Result<QualityReport> {
    let values = evaluate(secret, &challenge.terms)?;
    quality_of(secret, &values, threshold)
}

pub fn quality_of(secret: &Secret, values: &[PartitionTuple], threshold: usize) -> Result<QualityReport> {
    let bottom = PartitionTuple::bottom(secret.shape());
    let top = PartitionTuple::top(secret.shape());
    let mut issues = Vec::new();
    for (i, r) in values.iter().enumerate() {
        let i1 = i + 1;
        if r.is_bottom() {
            issues.push(QualityIssue::Bottom { index: i1 });
        }
        if r.is_top() {
            issues.push(QualityIssue::Top { index: i1 });
        }
        for (j, r2) in values.iter().enumerate().skip(i + 1) {
            let distance = r.distance(r2)?;
            if distance < threshold {
                issues.push(QualityIssue::NearResponse { i: i1, j: j + 1, distance });
            }
        }
        for (j, s) in secret.entries().iter().enumerate() {
            let distance = r.distance(s)?;
            if distance < threshold {
                issues.push(QualityIssue::NearSecret { i: i1, j: j + 1, distance });
            }
        }
        let distance = r.distance(&bottom)?;
        if distance < threshold {
            issues.push(QualityIssue::NearBottom { i: i1, distance });
        }
        let distance = r.distance(&top)?;
        if distance < threshold {
            issues.push(QualityIssue::NearTop { i: i1, distance });
        }
    }
    Ok(QualityReport { threshold, issues })
}

/// Key octets: the UTF-8 serialization of the response values.
pub fn derive_vernam_key(response: &Response) -> Vec<u8> {
    response.payload().into_bytes()
}

/// Bytewise XOR. Refuses messages longer than the key rather than cycling it.
pub fn xor_apply(key: &[u8], message: &[u8]) -> Result<Vec<u8>> {
    if message.len() > key.len() {
        return Err(Error::invalid(format!(
            "message of {} bytes exceeds the {}-byte key",
            message.len(),
            key.len()
        )));
    }
    Ok(message.iter().zip(key).map(|(m, k)| m ^ k).collect())
}

/// The public record `(w, w(s))`.
#[derive(Debug, Clone)]
pub struct Commitment {
    pub shape: LatticeShape,
    pub p: usize,
    pub terms: Vec<Term>,
    pub values: Vec<PartitionTuple>,
}

pub fn commit(secret: &Secret, terms: &[Term]) -> Result<Commitment> {
    Ok(Commitment {
        shape: secret.shape(),
        p: secret.p(),
        terms: terms.to_vec(),
        values: evaluate(secret, terms)?,
    })
}

/// Whether `revealed` reproduces the committed values.
pub fn verify_commit(record: &Commitment, revealed: &Secret) -> Result<bool> {
    if revealed.shape() != record.shape || revealed.p() != record.p || record.terms.len() != record.values.len() {
        return Ok(false);
    }
    Ok(evaluate(revealed, &record.terms)? == record.values)
}

impl fmt::Display for Commitment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "shape {}", self.shape)?;
        writeln!(f, "p {}", self.p)?;
        for w in &self.terms {
            writeln!(f, "w {}", w.to_sexpr())?;
        }
        for r in &self.values {
            writeln!(f, "r {r}")?;
        }
        Ok(())
    }
}

impl FromStr for Commitment {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let mut shape = None;
        let mut p = None;
        let mut term_lines = Vec::new();
        let mut value_lines = Vec::new();
        for line in text.lines().map(str::trim).filter(|l| !l.is_empty()) {
            let (key, rest) = line.split_once(' ').ok_or_else(|| Error::parse(line, "expected `<key> <value>`"))?;
            match key {
                "shape" if shape.is_none() => shape = Some(rest.parse::<LatticeShape>()?),
                "p" if p.is_none() => p = Some(rest.trim().parse::<usize>().map_err(|_| Error::parse(rest, "bad p"))?),
                "w" => term_lines.push(rest),
                "r" => value_lines.push(rest),
                _ => return Err(Error::parse(key, "unknown or repeated commitment field")),
            }
        }
        let shape = shape.ok_or_else(|| Error::parse(text, "missing shape"))?;
        let p = p.ok_or_else(|| Error::parse(text, "missing p"))?;
        if p < 4 {
            return Err(Error::parse(p.to_string(), "p must be at least 4"));
        }
        let terms = term_lines.iter().map(|t| Term::parse(t, p)).collect::<Result<Vec<_>>>()?;
        let values = value_lines
            .iter()
            .map(|v| PartitionTuple::parse_with_shape(v, shape))
            .collect::<Result<Vec<_>>>()?;
        if terms.is_empty() || terms.len() != values.len() {
            return Err(Error::parse(text, "need matching nonempty w and r lines"));
        }
        Ok(Commitment { shape, p, terms, values })
    }
}

/// One protocol line.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Message {
    Hello { version: u32, shape: LatticeShape, p: usize, q: usize },
    /// Terms in S-expression form, syntax-checked but not yet bound to an arity.
    Challenge { id: u64, terms: Vec<String> },
    Retry { id: u64 },
    Response { id: u64, tuples: Vec<PartitionTuple> },
    Result { id: u64, ok: bool },
}

impl Message {
    pub fn id(&self) -> Option<u64> {
        match self {
            Message::Hello { .. } => None,
            Message::Challenge { id, .. }
            | Message::Retry { id }
            | Message::Response { id, .. }
            | Message::Result { id, .. } => Some(*id),
        }
    }
}

impl fmt::Display for Message {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Message::Hello { version, shape, p, q } => write!(f, "HELLO {version} {shape} {p} {q}"),
            Message::Challenge { id, terms } => write!(f, "CHALLENGE {id} {}", terms.join("/")),
            Message::Retry { id } => write!(f, "RETRY {id}"),
            Message::Response { id, tuples } => write!(f, "RESPONSE {id} {}", join_tuples(tuples)),
            Message::Result { id, ok } => write!(f, "RESULT {id} {}", if *ok { "OK" } else { "FAIL" }),
        }
    }
}

fn parse_num<T: FromStr>(tok: Option<&str>, what: &str) -> Result<T> {
    let tok = tok.ok_or_else(|| Error::parse("", format!("missing {what}")))?;
    tok.parse().map_err(|_| Error::parse(tok, format!("bad {what}")))
}

impl FromStr for Message {
    type Err = Error;

    fn from_str(line: &str) -> Result<Self> {
        let line = line.trim_end_matches(['\r', '\n']);
        let (kind, rest) = line.split_once(' ').unwrap_or((line, ""));
        match kind {
            "HELLO" => {
                let mut it = rest.split(' ');
                let version = parse_num(it.next(), "version")?;
                let shape = it.next().ok_or_else(|| Error::parse(line, "missing shape"))?.parse()?;
                let p = parse_num(it.next(), "p")?;
                let q = parse_num(it.next(), "q")?;
                if it.next().is_some() {
                    return Err(Error::parse(line, "trailing fields"));
                }
                Ok(Message::Hello { version, shape, p, q })
            }
            "CHALLENGE" => {
                let (id, body) = rest.split_once(' ').ok_or_else(|| Error::parse(line, "missing terms"))?;
                let id = parse_num(Some(id), "id")?;
                let terms: Vec<String> = body.split('/').map(|t| t.trim().to_string()).collect();
                for t in &terms {
                    Term::parse(t, crate::term::MAX_VARIABLES)?;
                }
                Ok(Message::Challenge { id, terms })
            }
            "RETRY" => Ok(Message::Retry {
                id: parse_num(Some(rest), "id")?,
            }),
            "RESPONSE" => {
                let (id, body) = rest.split_once(' ').ok_or_else(|| Error::parse(line, "missing tuples"))?;
                let id = parse_num(Some(id), "id")?;
                let tuples = body.split('/').map(str::parse).collect::<Result<Vec<PartitionTuple>>>()?;
                if let Some(bad) = tuples.iter().find(|t| t.shape() != tuples[0].shape()) {
                    return Err(Error::shape(tuples[0].shape(), bad.shape()));
                }
                Ok(Message::Response { id, tuples })
            }
            "RESULT" => {
                let (id, verdict) = rest.split_once(' ').ok_or_else(|| Error::parse(line, "missing verdict"))?;
                let ok = match verdict {
                    "OK" => true,
                    "FAIL" => false,
                    other => return Err(Error::parse(other, "verdict must be OK or FAIL")),
                };
                Ok(Message::Result {
                    id: parse_num(Some(id), "id")?,
                    ok,
                })
            }
            other => Err(Error::parse(other, "unknown message kind")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SessionConfig {
    pub q: usize,
    pub steps: usize,
    /// Distance threshold of the prover's quality check; `Some(0)` only
    /// rejects constant responses, `None` answers every challenge.
    pub threshold: Option<usize>,
    pub max_retries: usize,
}

impl Default for SessionConfig {
    fn default() -> Self {
        SessionConfig {
            q: DEFAULT_Q,
            steps: DEFAULT_STEPS,
            threshold: None,
            max_retries: DEFAULT_MAX_RETRIES,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SessionStatus {
    InProgress,
    Accepted,
    Rejected,
    /// The retry bound was exceeded.
    Aborted,
}

fn protocol(expected: &str, got: &Message) -> Error {
    Error::invalid(format!("protocol violation: expected {expected}, got `{got}`"))
}

pub struct VerifierSession {
    secret: Secret,
    config: SessionConfig,
    seed: u64,
    issued: u64,
    retries: usize,
    pending: Option<Challenge>,
    status: SessionStatus,
}

impl VerifierSession {
    /// Challenge `k` is drawn from the substream `(seed, k)`.
    pub fn new(secret: Secret, config: SessionConfig, seed: u64) -> Self {
        VerifierSession {
            secret,
            config,
            seed,
            issued: 0,
            retries: 0,
            pending: None,
            status: SessionStatus::InProgress,
        }
    }

    pub fn status(&self) -> SessionStatus {
        self.status
    }

    pub fn retries(&self) -> usize {
        self.retries
    }

    fn issue(&mut self) -> Result<Message> {
        let seed = ShiftRng::substream(self.seed, self.issued).next_u64();
        self.issued += 1;
        let challenge = make_challenge(self.secret.p(), self.config.q, self.config.steps, seed)?;
        let msg = challenge.to_message();
        self.pending = Some(challenge);
        Ok(msg)
    }

    pub fn handle(&mut self, msg: &Message) -> Result<Option<Message>> {
        if self.status != SessionStatus::InProgress {
            return Err(protocol("end of session", msg));
        }
        match (msg, &self.pending) {
            (Message::Hello { version, shape, p, q }, None) => {
                if *version != PROTOCOL_VERSION {
                    return Err(Error::invalid(format!("unsupported protocol version {version}")));
                }
                if *shape != self.secret.shape() || *p != self.secret.p() || *q != self.config.q {
                    return Err(Error::invalid(format!(
                        "parameters {shape} p={p} q={q} do not match {} p={} q={}",
                        self.secret.shape(),
                        self.secret.p(),
                        self.config.q
                    )));
                }
                self.issue().map(Some)
            }
            (Message::Retry { id }, Some(c)) if *id == c.id => {
                self.retries += 1;
                if self.retries > self.config.max_retries {
                    self.status = SessionStatus::Aborted;
                    self.pending = None;
                    return Ok(Some(Message::Result { id: *id, ok: false }));
                }
                self.issue().map(Some)
            }
            (Message::Response { id, tuples }, Some(c)) => {
                let response = Response {
                    id: *id,
                    values: tuples.clone(),
                };
                let ok = verify_response(&self.secret, c, &response)?;
                self.status = if ok { SessionStatus::Accepted } else { SessionStatus::Rejected };
                let reply = Message::Result { id: c.id, ok };
                self.pending = None;
                Ok(Some(reply))
            }
            _ => Err(protocol(if self.pending.is_some() { "RESPONSE or RETRY" } else { "HELLO" }, msg)),
        }
    }
}

pub struct ProverSession {
    secret: Secret,
    config: SessionConfig,
    retries: usize,
    last_quality: Option<QualityReport>,
    status: SessionStatus,
}

impl ProverSession {
    pub fn new(secret: Secret, config: SessionConfig) -> Self {
        ProverSession {
            secret,
            config,
            retries: 0,
            last_quality: None,
            status: SessionStatus::InProgress,
        }
    }

    pub fn hello(&self) -> Message {
        Message::Hello {
            version: PROTOCOL_VERSION,
            shape: self.secret.shape(),
            p: self.secret.p(),
            q: self.config.q,
        }
    }

    pub fn status(&self) -> SessionStatus {
        self.status
    }

    pub fn retries(&self) -> usize {
        self.retries
    }

    pub fn last_quality(&self) -> Option<&QualityReport> {
        self.last_quality.as_ref()
    }

    /// Answers a challenge, or asks for another one when the responses are
    /// too close to each other or to known elements. Past the retry bound the
    /// session aborts and `None` is returned.
    pub fn handle(&mut self, msg: &Message) -> Result<Option<Message>> {
        if self.status != SessionStatus::InProgress {
            return Err(protocol("end of session", msg));
        }
        match msg {
            Message::Challenge { id, terms } => {
                if terms.len() != self.config.q {
                    return Err(Error::invalid(format!("expected {} terms, got {}", self.config.q, terms.len())));
                }
                let challenge = Challenge::from_wire(*id, terms, self.secret.p())?;
                let response = respond(&self.secret, &challenge)?;
                let passed = match self.config.threshold {
                    Some(d) => {
                        let report = quality_of(&self.secret, &response.values, d)?;
                        let passed = report.passed();
                        self.last_quality = Some(report);
                        passed
                    }
                    None => true,
                };
                if passed {
                    return Ok(Some(response.to_message()));
                }
                if self.retries >= self.config.max_retries {
                    self.status = SessionStatus::Aborted;
                    return Ok(None);
                }
                self.retries += 1;
                Ok(Some(Message::Retry { id: *id }))
            }
            Message::Result { ok, .. } => {
                self.status = if *ok { SessionStatus::Accepted } else { SessionStatus::Rejected };
                Ok(None)
            }
            _ => Err(protocol("CHALLENGE or RESULT", msg)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transcript {
    /// Wire lines, prefixed `P> ` (prover) or `V> ` (verifier).
    pub lines: Vec<String>,
    pub verifier: SessionStatus,
    pub prover: SessionStatus,
}

impl Transcript {
    pub fn text(&self) -> String {
        let mut out = self.lines.join("\n");
        out.push('\n');
        out
    }
}

/// Runs both sides in memory. Every message goes through its text form;
/// `tamper` may rewrite the prover's lines before the verifier reads them.
pub fn run_local(
    verifier: &mut VerifierSession,
    prover: &mut ProverSession,
    mut tamper: impl FnMut(Message) -> Message,
) -> Result<Transcript> {
    let mut lines = Vec::new();
    let mut to_verifier = Some(prover.hello());
    while let Some(msg) = to_verifier.take() {
        let msg = tamper(msg);
        let line = msg.to_string();
        lines.push(format!("P> {line}"));
        let Some(reply) = verifier.handle(&line.parse()?)? else { break };
        let line = reply.to_string();
        lines.push(format!("V> {line}"));
        to_verifier = prover.handle(&line.parse()?)?;
    }
    Ok(Transcript {
        lines,
        verifier: verifier.status(),
        prover: prover.status(),
    })
}

/// Replaces coordinate `coord` of response `index` by a different partition.
pub fn mutate_response(msg: Message, index: usize, coord: usize, rng: &mut ShiftRng) -> Message {
    match msg {
        Message::Response { id, mut tuples } => {
            let Some(target) = tuples.get(index) else {
                return Message::Response { id, tuples };
            };
            let mut coords = target.coords().to_vec();
            let coord = coord % coords.len();
            let n = coords[coord].n();
            let sampler = PartitionSampler::new(n).expect("valid size");
            loop {
                let x = sampler.sample(rng);
                if x != coords[coord] {
                    coords[coord] = x;
                    break;
                }
            }
            tuples[index] = PartitionTuple::new(coords).expect("same shape");
            Message::Response { id, tuples }
        }
        other => other,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::partition::Partition;

    fn shape(s: &str) -> LatticeShape {
        s.parse().unwrap()
    }

    #[test]
    fn identity_relabel_is_the_construction() {
        let z = ZadoriConfig::new(5).unwrap();
        let quad = zadori_quadruple(5, &Permutation::identity(5)).unwrap();
        let want: Vec<PartitionTuple> = z.quadruple().into_iter().map(PartitionTuple::from).collect();
        assert_eq!(quad.to_vec(), want);
    }

    #[test]
    fn example_response() {
        let z = ZadoriConfig::new(5).unwrap();
        let secret = Secret::new(shape("P5^1"), z.quadruple().into_iter().map(PartitionTuple::from).collect()).unwrap();
        let challenge = Challenge {
            id: 7,
            terms: vec![Term::parse("(* x2 x4)", 4).unwrap()],
            steps: 1,
            seed: None,
        };
        let r = respond(&secret, &challenge).unwrap();
        assert_eq!(r.values[0].to_string(), "1,4|2|3|5");
        assert!(verify_response(&secret, &challenge, &r).unwrap());
    }

    #[test]
    fn secrets_generate() {
        let s = make_secret(shape("P5^1"), 8, 3, SecretMode::PermuteZadori).unwrap();
        assert_eq!(s.p(), 8);
        assert!(is_generating(&s.entries()[..4]).unwrap());
        assert!(make_secret(shape("P5^2"), 8, 3, SecretMode::PermuteZadori).is_err());
        let s = make_secret(shape("P7^3"), 6, 3, SecretMode::PermutePower).unwrap();
        assert_eq!(s.entries()[0].shape(), shape("P7^3"));
        assert!(make_secret(shape("P7^4"), 6, 3, SecretMode::PermutePower).is_err());
        assert!(make_secret(shape("P7^1"), 3, 3, SecretMode::PermuteZadori).is_err());
    }

    #[test]
    fn explicit_mode() {
        let atoms: Vec<PartitionTuple> = [(1, 2), (2, 3), (3, 4), (1, 4), (1, 3), (2, 4)]
            .iter()
            .map(|&(u, v)| PartitionTuple::from(Partition::atom(4, u, v).unwrap()))
            .collect();
        let s = make_secret(shape("P4^1"), 8, 1, SecretMode::Explicit(atoms.clone())).unwrap();
        assert_eq!(&s.entries()[..6], &atoms[..]);
        assert!(make_secret(shape("P4^1"), 8, 1, SecretMode::Explicit(atoms[..2].to_vec())).is_err());
    }

    #[test]
    fn secret_file_round_trip() {
        let s = make_secret(shape("P7^3"), 5, 11, SecretMode::PermutePower).unwrap();
        let back: Secret = s.to_file_string().parse().unwrap();
        assert_eq!(back, s);
        assert!("P5^1\n5\n1,2|3|4|5\n".parse::<Secret>().is_err());
    }

    #[test]
    fn challenge_shape() {
        let c = make_challenge(8, 8, 1000, 42).unwrap();
        assert_eq!(c.q(), 8);
        for w in &c.terms {
            assert_eq!(w.operation_count(), 1000u32.into());
        }
        let again = make_challenge(8, 8, 1000, 42).unwrap();
        assert_eq!(c.to_message(), again.to_message());
        let bare = make_challenge(8, 3, 0, 42).unwrap();
        assert!(bare.terms.iter().all(|w| w.operation_count() == 0u32.into()));
    }

    #[test]
    fn constant_responses_flagged() {
        let s = make_secret(shape("P5^1"), 4, 2, SecretMode::PermuteZadori).unwrap();
        let c = Challenge {
            id: 1,
            terms: vec![Term::parse("(* x1 x2)", 4).unwrap()],
            steps: 1,
            seed: None,
        };
        let report = quality_check(&s, &c, 0).unwrap();
        assert!(report.issues.contains(&QualityIssue::Bottom { index: 1 }));
    }

    #[test]
    fn vernam() {
        let key = b"0123456789".to_vec();
        let ct = xor_apply(&key, b"hello").unwrap();
        assert_eq!(xor_apply(&key, &ct).unwrap(), b"hello");
        assert!(xor_apply(&key, &[]).unwrap().is_empty());
        assert!(xor_apply(&key, &[0; 11]).is_err());
    }

    #[test]
    fn commitment_round_trip() {
        let s = make_secret(shape("P6^1"), 6, 5, SecretMode::PermuteZadori).unwrap();
        let c = make_challenge(6, 3, 50, 9).unwrap();
        let rec = commit(&s, &c.terms).unwrap();
        assert!(verify_commit(&rec, &s).unwrap());
        let parsed: Commitment = rec.to_string().parse().unwrap();
        assert!(verify_commit(&parsed, &s).unwrap());
        let other = make_secret(shape("P6^1"), 6, 6, SecretMode::PermuteZadori).unwrap();
        assert!(!verify_commit(&rec, &other).unwrap());
    }

    #[test]
    fn messages_round_trip() {
        for line in [
            "HELLO 1 P12^8 8 8",
            "CHALLENGE 99 (+ x1 x2)/(* x3 (+ x1 x4))",
            "RETRY 5",
            "RESPONSE 3 1,2|3;1|2,3/1|2|3;1,2,3",
            "RESULT 3 OK",
            "RESULT 4 FAIL",
        ] {
            let m: Message = line.parse().unwrap();
            assert_eq!(m.to_string(), line);
        }
        for bad in ["", "CHALLENGE 1 x70000", "HELLO 1 P5^1 8", "RESULT 1 MAYBE", "CHALLENGE 1 (+ x1", "RESPONSE 1 1|2/1|2|3", "NOPE 1"] {
            assert!(bad.parse::<Message>().is_err(), "{bad}");
        }
    }

    #[test]
    fn local_session() {
        let s = make_secret(shape("P7^3"), 8, 1, SecretMode::PermutePower).unwrap();
        let cfg = SessionConfig {
            steps: 200,
            ..SessionConfig::default()
        };
        let mut v = VerifierSession::new(s.clone(), cfg, 5);
        let mut p = ProverSession::new(s.clone(), cfg);
        let t = run_local(&mut v, &mut p, |m| m).unwrap();
        assert_eq!(t.verifier, SessionStatus::Accepted);
        assert_eq!(t.prover, SessionStatus::Accepted);

        let mut rng = ShiftRng::new(3);
        let mut v = VerifierSession::new(s.clone(), cfg, 5);
        let mut p = ProverSession::new(s, cfg);
        let t = run_local(&mut v, &mut p, |m| mutate_response(m, 2, 1, &mut rng)).unwrap();
        assert_eq!(t.verifier, SessionStatus::Rejected);
    }

    #[test]
    fn retry_bound_aborts() {
        let s = make_secret(shape("P5^1"), 4, 1, SecretMode::PermuteZadori).unwrap();
        let cfg = SessionConfig {
            q: 8,
            steps: 20,
            threshold: Some(0),
            max_retries: 3,
        };
        let mut v = VerifierSession::new(s.clone(), cfg, 1);
        let mut p = ProverSession::new(s, cfg);
        let t = run_local(&mut v, &mut p, |m| m).unwrap();
        assert_eq!(t.prover, SessionStatus::Aborted);
        assert_eq!(p.retries(), 3);
    }
}
