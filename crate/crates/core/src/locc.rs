//! The protocol as two parties joined by a classical channel.
//!
//! Alice measures at model time 0 and sends her outcome; the channel delivers
//! it after the latency `t_c`, during which the joint state evolves under
//! `H_tot`; Bob then applies his conditioned unitary. Branches are enumerated,
//! so Alice sends one outcome message per branch and the trace reports
//! probability-weighted energies.
//!
//! Model time drives the physics. In wire mode the outcome bits cross a real
//! byte stream as newline-delimited JSON frames, but latency is still the
//! model parameter `t_c`, never a measured delay.

use std::io::{BufRead, BufReader, Read, Write};
use std::net::{TcpListener, TcpStream};
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::audit::Verdict;
use crate::error::{QetError, Result};
use crate::export::{fmt_sig, hex};
use crate::model::{build_hamiltonians, e_a_closed, ground_state_closed_form, optimal_family_angle, HamiltonianSet, ModelParams};
use crate::protocol::{
    apply_bob, evolve_branches, extracted_energy, infused_energy, measure_alice, optimize_bob, BobControl,
    BranchPair, OptimizerConfig, SearchMode,
};
use crate::tolerances::TOLERANCES;

/// CSV header for trace export.
pub const TRACE_CSV_HEADER: &str = "h,k,t_c,e_a,e_b,product,verdict";

/// How Bob picks his unitary once the outcome arrives.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Policy {
    /// The zero-latency optimal angle of the `σ_B^y` family, whatever `t_c`.
    ClosedFormAngle,
    /// Re-optimise the family angle for the evolved branches.
    Optimize,
    /// Re-optimise over independent SU(2) elements per outcome.
    OptimizeFull,
}

/// The classical bit in flight.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelMessage {
    pub mu: u8,
    pub sent_at: f64,
    pub deliver_at: f64,
}

impl ChannelMessage {
    pub fn new(mu: u8, sent_at: f64, latency: f64) -> Result<Self> {
        if mu > 1 {
            return Err(QetError::invalid(format!("outcome must be 0 or 1, got {mu}")));
        }
        validate_latency(latency)?;
        Ok(ChannelMessage {
            mu,
            sent_at,
            deliver_at: sent_at + latency,
        })
    }

    pub fn latency(&self) -> f64 {
        self.deliver_at - self.sent_at
    }
}

/// Wire frames. Field order is fixed by declaration order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Frame {
    Hello { h: f64, k: f64, t_c: f64 },
    Outcome { mu: u8, sent_at: f64, deliver_at: f64 },
    Digest { digest: String },
    Reject { reason: String },
}

impl From<ChannelMessage> for Frame {
    fn from(m: ChannelMessage) -> Self {
        Frame::Outcome {
            mu: m.mu,
            sent_at: m.sent_at,
            deliver_at: m.deliver_at,
        }
    }
}

/// Serialise a frame as one UTF-8 line terminated by `\n`.
pub fn encode_frame(frame: &Frame) -> String {
    let mut s = serde_json::to_string(frame).expect("frames serialise");
    s.push('\n');
    s
}

pub fn decode_frame(line: &str) -> Result<Frame> {
    let body = line.strip_suffix('\n').unwrap_or(line);
    if body.is_empty() || body.contains('\n') {
        return Err(QetError::Protocol(format!("malformed frame: {line:?}")));
    }
    serde_json::from_str(body).map_err(|e| QetError::Protocol(format!("malformed frame {body:?}: {e}")))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Actor {
    Alice,
    Channel,
    Bob,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Action {
    Measure,
    Send,
    Deliver,
    Extract,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub time: f64,
    pub actor: Actor,
    pub action: Action,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mu: Option<u8>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProtocolTrace {
    pub params: ModelParams,
    pub latency: f64,
    pub policy: Policy,
    pub e_a: f64,
    pub e_b_extracted: f64,
    /// `e_b_extracted · latency` (ħ = 1).
    pub uncertainty_product: f64,
    pub verdict: Verdict,
    pub control: BobControl,
    pub per_branch_energy: [f64; 2],
    pub events: Vec<Event>,
}

impl ProtocolTrace {
    /// SHA-256 of the canonical JSON serialisation.
    pub fn digest(&self) -> String {
        let json = serde_json::to_string(self).expect("traces serialise");
        hex(&Sha256::digest(json.as_bytes()))
    }

    /// Events are in non-decreasing model time and follow
    /// measure → send → deliver → extract.
    pub fn events_ordered(&self) -> bool {
        let rank = |a: Action| match a {
            Action::Measure => 0,
            Action::Send => 1,
            Action::Deliver => 2,
            Action::Extract => 3,
        };
        self.events
            .windows(2)
            .all(|w| w[0].time <= w[1].time && rank(w[0].action) <= rank(w[1].action))
    }

    /// Rebuild the branches and re-apply the recorded control.
    pub fn recompute_extraction(&self) -> Result<f64> {
        let hs = build_hamiltonians(&self.params);
        let before = branches_at(&self.params, &hs, self.latency)?;
        let after = apply_bob(&before, &self.control)?;
        extracted_energy(&before, &after, &hs)
    }

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{}",
            fmt_sig(self.params.h()),
            fmt_sig(self.params.k()),
            fmt_sig(self.latency),
            fmt_sig(self.e_a),
            fmt_sig(self.e_b_extracted),
            fmt_sig(self.uncertainty_product),
            self.verdict.as_str()
        )
    }
}

/// Header plus one row per trace, LF line endings.
pub fn traces_to_csv(traces: &[ProtocolTrace]) -> String {
    let mut out = String::from(TRACE_CSV_HEADER);
    out.push('\n');
    for t in traces {
        out.push_str(&t.csv_row());
        out.push('\n');
    }
    out
}

fn validate_latency(t_c: f64) -> Result<()> {
    if !t_c.is_finite() || t_c < 0.0 {
        return Err(QetError::invalid(format!("latency must be non-negative, got {t_c}")));
    }
    Ok(())
}

fn branches_at(p: &ModelParams, hs: &HamiltonianSet, t: f64) -> Result<BranchPair> {
    let measured = measure_alice(&ground_state_closed_form(p))?;
    evolve_branches(&measured, hs, t)
}

/// Alice's side: measure at t = 0 and emit one message per outcome branch.
#[derive(Debug)]
struct Alice {
    params: ModelParams,
    latency: f64,
}

impl Alice {
    fn measure(&self, hs: &HamiltonianSet) -> Result<(f64, Vec<ChannelMessage>)> {
        let branches = measure_alice(&ground_state_closed_form(&self.params))?;
        let e_a = infused_energy(&branches, hs)?;
        let closed = e_a_closed(&self.params);
        if (e_a - closed).abs() > TOLERANCES.derived * closed.max(1.0) {
            return Err(QetError::numeric(format!(
                "simulated infused energy {e_a} disagrees with {closed}"
            )));
        }
        let messages = branches
            .iter()
            .map(|b| ChannelMessage::new(b.mu, 0.0, self.latency))
            .collect::<Result<Vec<_>>>()?;
        Ok((e_a, messages))
    }
}

/// Bob's side: collect outcome bits, then act once both branches are known.
#[derive(Debug)]
struct Bob {
    params: ModelParams,
    latency: f64,
    policy: Policy,
    received: [bool; 2],
}

#[derive(Debug, Clone, Copy)]
struct Extraction {
    energy: f64,
    control: BobControl,
    per_branch: [f64; 2],
}

impl Bob {
    fn new(params: ModelParams, latency: f64, policy: Policy) -> Self {
        Bob {
            params,
            latency,
            policy,
            received: [false; 2],
        }
    }

    fn deliver(&mut self, msg: &ChannelMessage) -> Result<bool> {
        if msg.mu > 1 {
            return Err(QetError::Protocol(format!("outcome bit out of range: {}", msg.mu)));
        }
        if (msg.latency() - self.latency).abs() > TOLERANCES.structural * self.latency.max(1.0) {
            return Err(QetError::Protocol(format!(
                "message latency {} does not match the agreed {}",
                msg.latency(),
                self.latency
            )));
        }
        if self.received[msg.mu as usize] {
            return Err(QetError::Protocol(format!("duplicate outcome {}", msg.mu)));
        }
        self.received[msg.mu as usize] = true;
        Ok(self.received.iter().all(|&r| r))
    }

    fn extract(&self, hs: &HamiltonianSet, cfg: &OptimizerConfig) -> Result<Extraction> {
        let branches = branches_at(&self.params, hs, self.latency)?;
        let result = match self.policy {
            Policy::ClosedFormAngle => {
                let control = BobControl::Family {
                    theta: optimal_family_angle(&self.params),
                };
                let after = apply_bob(&branches, &control)?;
                let per_branch = crate::protocol::branch_extraction(&branches, &after, hs)?;
                Extraction {
                    energy: extracted_energy(&branches, &after, hs)?,
                    control,
                    per_branch,
                }
            }
            Policy::Optimize | Policy::OptimizeFull => {
                let mode = if self.policy == Policy::Optimize {
                    SearchMode::Family
                } else {
                    SearchMode::Full
                };
                let r = optimize_bob(&branches, hs, cfg, mode)?;
                Extraction {
                    energy: r.extracted_energy,
                    control: r.control,
                    per_branch: r.per_branch_energy,
                }
            }
        };
        Ok(result)
    }
}

#[derive(Debug, Clone, Copy)]
enum Scheduled {
    AliceMeasure,
    Deliver(ChannelMessage),
    BobExtract,
}

/// Deterministic event loop over model time for one protocol round.
fn run_event_loop(
    p: &ModelParams,
    t_c: f64,
    policy: Policy,
    cfg: &OptimizerConfig,
    mut on_send: impl FnMut(&ChannelMessage) -> Result<()>,
) -> Result<ProtocolTrace> {
    validate_latency(t_c)?;
    let hs = build_hamiltonians(p);
    let alice = Alice {
        params: *p,
        latency: t_c,
    };
    let mut bob = Bob::new(*p, t_c, policy);

    let mut queue: Vec<(f64, u64, Scheduled)> = vec![(0.0, 0, Scheduled::AliceMeasure)];
    let mut seq = 1u64;
    let mut events = Vec::new();
    let mut e_a = None;
    let mut extraction = None;

    while !queue.is_empty() {
        // Earliest time first, insertion order breaks ties.
        let next = (0..queue.len())
            .min_by(|&i, &j| {
                queue[i]
                    .0
                    .total_cmp(&queue[j].0)
                    .then(queue[i].1.cmp(&queue[j].1))
            })
            .expect("queue is non-empty");
        let (time, _, item) = queue.remove(next);
        match item {
            Scheduled::AliceMeasure => {
                let (energy, messages) = alice.measure(&hs)?;
                e_a = Some(energy);
                events.push(Event {
                    time,
                    actor: Actor::Alice,
                    action: Action::Measure,
                    mu: None,
                });
                for m in messages {
                    on_send(&m)?;
                    events.push(Event {
                        time: m.sent_at,
                        actor: Actor::Alice,
                        action: Action::Send,
                        mu: Some(m.mu),
                    });
                    queue.push((m.deliver_at, seq, Scheduled::Deliver(m)));
                    seq += 1;
                }
            }
            Scheduled::Deliver(m) => {
                events.push(Event {
                    time,
                    actor: Actor::Channel,
                    action: Action::Deliver,
                    mu: Some(m.mu),
                });
                if bob.deliver(&m)? {
                    queue.push((time, seq, Scheduled::BobExtract));
                    seq += 1;
                }
            }
            Scheduled::BobExtract => {
                extraction = Some(bob.extract(&hs, cfg)?);
                events.push(Event {
                    time,
                    actor: Actor::Bob,
                    action: Action::Extract,
                    mu: None,
                });
            }
        }
    }

    let e_a = e_a.ok_or_else(|| QetError::Protocol("Alice never measured".into()))?;
    let ex = extraction.ok_or_else(|| QetError::Protocol("Bob never acted".into()))?;
    let product = ex.energy * t_c;
    Ok(ProtocolTrace {
        params: *p,
        latency: t_c,
        policy,
        e_a,
        e_b_extracted: ex.energy,
        uncertainty_product: product,
        verdict: Verdict::from_product(product),
        control: ex.control,
        per_branch_energy: ex.per_branch,
        events,
    })
}

/// One in-process protocol round with default optimiser settings.
pub fn run_once(p: &ModelParams, t_c: f64, policy: Policy) -> Result<ProtocolTrace> {
    run_once_with(p, t_c, policy, &OptimizerConfig::default())
}

pub fn run_once_with(
    p: &ModelParams,
    t_c: f64,
    policy: Policy,
    cfg: &OptimizerConfig,
) -> Result<ProtocolTrace> {
    run_event_loop(p, t_c, policy, cfg, |_| Ok(()))
}

/// One trace per latency, Bob re-optimised at each.
pub fn sweep_latency(p: &ModelParams, grid: &[f64], policy: Policy) -> Result<Vec<ProtocolTrace>> {
    if grid.is_empty() {
        return Err(QetError::invalid("latency grid is empty"));
    }
    for &t in grid {
        validate_latency(t)?;
    }
    if grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(QetError::invalid("latency grid must be strictly ascending"));
    }
    grid.iter().map(|&t| run_once(p, t, policy)).collect()
}

/// Which end of the byte stream this process plays.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Role {
    Alice,
    Bob,
}

/// Newline-delimited frame reader/writer over any byte stream.
pub struct FramedStream<S: Read + Write> {
    inner: BufReader<S>,
}

impl<S: Read + Write> FramedStream<S> {
    pub fn new(stream: S) -> Self {
        FramedStream {
            inner: BufReader::new(stream),
        }
    }

    pub fn send(&mut self, frame: &Frame) -> Result<()> {
        let s = self.inner.get_mut();
        s.write_all(encode_frame(frame).as_bytes())?;
        s.flush()?;
        Ok(())
    }

    pub fn recv(&mut self) -> Result<Frame> {
        let mut line = String::new();
        let n = self.inner.read_line(&mut line)?;
        if n == 0 {
            return Err(QetError::Protocol("peer closed the connection".into()));
        }
        decode_frame(&line)
    }
}

fn hello(p: &ModelParams, t_c: f64) -> Frame {
    Frame::Hello {
        h: p.h(),
        k: p.k(),
        t_c,
    }
}

fn check_hello(frame: &Frame, p: &ModelParams, t_c: f64) -> Result<()> {
    match frame {
        Frame::Hello { h, k, t_c: tc } if *h == p.h() && *k == p.k() && *tc == t_c => Ok(()),
        Frame::Hello { h, k, t_c: tc } => Err(QetError::Protocol(format!(
            "handshake mismatch: peer has h={h}, k={k}, t_c={tc}; local h={}, k={}, t_c={t_c}",
            p.h(),
            p.k()
        ))),
        Frame::Reject { reason } => Err(QetError::Protocol(format!("peer rejected handshake: {reason}"))),
        other => Err(QetError::Protocol(format!("expected hello frame, got {other:?}"))),
    }
}

/// Alice's half of a wire-mode round on an established stream.
pub fn run_alice<S: Read + Write>(
    stream: S,
    p: &ModelParams,
    t_c: f64,
    policy: Policy,
) -> Result<ProtocolTrace> {
    validate_latency(t_c)?;
    let mut wire = FramedStream::new(stream);
    let greeting = wire.recv()?;
    if let Err(e) = check_hello(&greeting, p, t_c) {
        // Best effort: the peer may already be gone.
        let _ = wire.send(&Frame::Reject {
            reason: e.to_string(),
        });
        return Err(e);
    }
    wire.send(&hello(p, t_c))?;

    let mut outgoing = Vec::new();
    let trace = run_event_loop(p, t_c, policy, &OptimizerConfig::default(), |m| {
        outgoing.push(*m);
        Ok(())
    })?;
    for m in outgoing {
        wire.send(&m.into())?;
    }

    match wire.recv()? {
        Frame::Digest { digest } if digest == trace.digest() => Ok(trace),
        Frame::Digest { digest } => Err(QetError::Protocol(format!(
            "trace digest mismatch: bob {digest}, alice {}",
            trace.digest()
        ))),
        other => Err(QetError::Protocol(format!("expected digest frame, got {other:?}"))),
    }
}

/// Bob's half of a wire-mode round on an established stream.
pub fn run_bob<S: Read + Write>(
    stream: S,
    p: &ModelParams,
    t_c: f64,
    policy: Policy,
) -> Result<ProtocolTrace> {
    validate_latency(t_c)?;
    let mut wire = FramedStream::new(stream);
    wire.send(&hello(p, t_c))?;
    check_hello(&wire.recv()?, p, t_c)?;

    let mut received = Vec::new();
    while received.len() < 2 {
        match wire.recv()? {
            Frame::Outcome {
                mu,
                sent_at,
                deliver_at,
            } => received.push(ChannelMessage {
                mu,
                sent_at,
                deliver_at,
            }),
            other => return Err(QetError::Protocol(format!("expected outcome frame, got {other:?}"))),
        }
    }

    // Bob's own loop must reproduce exactly the messages that arrived.
    let mut expected = Vec::new();
    let trace = run_event_loop(p, t_c, policy, &OptimizerConfig::default(), |m| {
        expected.push(*m);
        Ok(())
    })?;
    if expected != received {
        return Err(QetError::Protocol(format!(
            "received outcomes {received:?} differ from the model's {expected:?}"
        )));
    }
    wire.send(&Frame::Digest {
        digest: trace.digest(),
    })?;
    Ok(trace)
}

/// Run one role over TCP: Alice listens on `endpoint`, Bob connects to it,
/// retrying for up to `connect_timeout`.
pub fn wire_mode(
    role: Role,
    endpoint: &str,
    p: &ModelParams,
    t_c: f64,
    policy: Policy,
    connect_timeout: Duration,
) -> Result<ProtocolTrace> {
    match role {
        Role::Alice => {
            let listener = TcpListener::bind(endpoint)?;
            let (stream, _) = listener.accept()?;
            run_alice(stream, p, t_c, policy)
        }
        Role::Bob => {
            let stream = connect_with_retry(endpoint, connect_timeout)?;
            run_bob(stream, p, t_c, policy)
        }
    }
}

fn connect_with_retry(endpoint: &str, timeout: Duration) -> Result<TcpStream> {
    let start = Instant::now();
    loop {
        match TcpStream::connect(endpoint) {
            Ok(s) => return Ok(s),
            Err(e) if start.elapsed() >= timeout => return Err(e.into()),
            Err(_) => std::thread::sleep(Duration::from_millis(50)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::e_b_closed;

    fn p34() -> ModelParams {
        ModelParams::new(3.0, 4.0).unwrap()
    }

    #[test]
    fn outcome_frame_bytes() {
        let m = ChannelMessage::new(1, 0.0, 0.5).unwrap();
        assert_eq!(
            encode_frame(&m.into()),
            "{\"kind\":\"outcome\",\"mu\":1,\"sent_at\":0.0,\"deliver_at\":0.5}\n"
        );
        assert_eq!(
            encode_frame(&hello(&p34(), 0.25)),
            "{\"kind\":\"hello\",\"h\":3.0,\"k\":4.0,\"t_c\":0.25}\n"
        );
    }

    #[test]
    fn frame_decoding() {
        let f = decode_frame("{\"kind\":\"outcome\",\"mu\":0,\"sent_at\":0.0,\"deliver_at\":1.0}\n").unwrap();
        assert_eq!(
            f,
            Frame::Outcome {
                mu: 0,
                sent_at: 0.0,
                deliver_at: 1.0
            }
        );
        for bad in ["", "\n", "not json\n", "{\"kind\":\"teleport\"}\n", "{\"kind\":\"outcome\",\"mu\":0}\n"] {
            assert!(matches!(decode_frame(bad), Err(QetError::Protocol(_))), "{bad:?}");
        }
    }

    #[test]
    fn message_invariants() {
        let m = ChannelMessage::new(0, 0.0, 0.3).unwrap();
        assert_eq!(m.deliver_at, 0.3);
        assert!(ChannelMessage::new(2, 0.0, 0.3).is_err());
        assert!(ChannelMessage::new(0, 0.0, -0.3).is_err());
    }

    #[test]
    fn zero_latency_round() {
        let p = p34();
        let t = run_once(&p, 0.0, Policy::Optimize).unwrap();
        assert!(((t.e_b_extracted - e_b_closed(&p)) / e_b_closed(&p)).abs() < 1e-6);
        assert_eq!(t.uncertainty_product, 0.0);
        assert_eq!(t.verdict, Verdict::Unobservable);
        assert!((t.e_a - 1.8).abs() < 1e-10);
        let actions: Vec<Action> = t.events.iter().map(|e| e.action).collect();
        assert_eq!(
            actions,
            [Action::Measure, Action::Send, Action::Send, Action::Deliver, Action::Deliver, Action::Extract]
        );
        assert!(t.events_ordered());
    }

    #[test]
    fn latency_round_events_and_recompute() {
        let p = p34();
        let t = run_once(&p, 0.3, Policy::Optimize).unwrap();
        assert!(t.events_ordered());
        assert_eq!(t.events.last().unwrap().time, 0.3);
        assert!((t.recompute_extraction().unwrap() - t.e_b_extracted).abs() < 1e-10);
        assert!((t.uncertainty_product - t.e_b_extracted * 0.3).abs() < 1e-12);
    }

    #[test]
    fn closed_form_policy_at_zero_latency() {
        let p = p34();
        let t = run_once(&p, 0.0, Policy::ClosedFormAngle).unwrap();
        assert!((t.e_b_extracted - e_b_closed(&p)).abs() < 1e-12);
    }

    #[test]
    fn sweep_validation() {
        let p = p34();
        assert!(sweep_latency(&p, &[], Policy::Optimize).is_err());
        assert!(sweep_latency(&p, &[0.2, 0.1], Policy::Optimize).is_err());
        assert!(sweep_latency(&p, &[-0.1, 0.1], Policy::Optimize).is_err());
        let single = sweep_latency(&p, &[0.0], Policy::Optimize).unwrap();
        assert_eq!(single, vec![run_once(&p, 0.0, Policy::Optimize).unwrap()]);
    }

    #[test]
    fn csv_row_format() {
        let t = run_once(&p34(), 0.0, Policy::ClosedFormAngle).unwrap();
        let csv = traces_to_csv(&[t]);
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), TRACE_CSV_HEADER);
        let row = lines.next().unwrap();
        assert!(row.starts_with("3,4,0,1.8,0.3440037453"), "{row}");
        assert!(row.ends_with(",0,unobservable"));
    }
}
