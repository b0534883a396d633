//! A sender steering a remote plant through a delayed, two-way link.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use super::{delta, demodulate, identify_error_model, modulate, ErrorFunction, Family, FeedbackError, InverseModel, VirtualBox};

fn default_q() -> f64 {
    1e-3
}

fn default_gain() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionConfig {
    /// Value the sender wants the plant to show.
    pub reference: f64,
    /// Quantization step of forward corrections.
    #[serde(default = "default_q")]
    pub q: f64,
    /// Fraction of the remaining difference corrected per report.
    #[serde(default = "default_gain")]
    pub gain: f64,
    /// Rounds a box spends in flight, each direction.
    #[serde(default)]
    pub delay: usize,
    pub receiver: ErrorFunction,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundLog {
    pub round: usize,
    /// Difference the sender saw this round, if a report arrived.
    pub delta: Option<f64>,
    /// Payload bits of the forward box emitted this round.
    pub fill_bits: usize,
    pub plant: f64,
    pub lag: Option<usize>,
}

#[derive(Debug, Clone, Copy)]
struct Report {
    plant: f64,
    /// Forward boxes the receiver had applied when it reported.
    applied: usize,
}

/// Sender and receiver joined by a link with equal delay both ways.
///
/// The receiver accumulates every correction it is sent into a register
/// `v` and shows `e(v)` plus any disturbance. Each round the receiver
/// reports its plant value; when a report arrives the sender discounts the
/// corrections still in flight, inverts its model of `e`, and sends the
/// quantized remainder.
#[derive(Debug, Clone)]
pub struct Session {
    config: SessionConfig,
    inverse: InverseModel,
    register: f64,
    disturbance: f64,
    applied: usize,
    /// Sender's view of the register after each box it sent.
    sent_totals: Vec<f64>,
    forward: VecDeque<(usize, VirtualBox)>,
    backward: VecDeque<(usize, Report)>,
    round: usize,
    log: Vec<RoundLog>,
}

impl Session {
    pub fn new(config: SessionConfig, inverse: InverseModel) -> Result<Self, FeedbackError> {
        if !(config.q > 0.0 && config.q.is_finite()) {
            return Err(FeedbackError::InvalidStep(config.q));
        }
        if !(config.gain > 0.0 && config.gain <= 1.0) {
            return Err(FeedbackError::InvalidParameter(format!("gain {} outside (0, 1]", config.gain)));
        }
        if !config.reference.is_finite() {
            return Err(FeedbackError::InvalidParameter("reference must be finite".into()));
        }
        if let ErrorFunction::Remap { .. } = config.receiver {
            return Err(FeedbackError::InvalidParameter("a session plant needs a real-valued receiver".into()));
        }
        Ok(Session {
            config,
            inverse,
            register: 0.0,
            disturbance: 0.0,
            applied: 0,
            sent_totals: vec![0.0],
            forward: VecDeque::new(),
            backward: VecDeque::new(),
            round: 0,
            log: Vec::new(),
        })
    }

    pub fn config(&self) -> &SessionConfig {
        &self.config
    }

    pub fn inverse(&self) -> &InverseModel {
        &self.inverse
    }

    /// Probes the receiver directly (a passive echo over a quiet link) and
    /// adopts the resulting inverse. Returns the number of probes.
    pub fn identify(&mut self, family: Family) -> Result<usize, FeedbackError> {
        let receiver = self.config.receiver.clone();
        let id = identify_error_model(|x| receiver.apply(x), family)?;
        self.inverse = id.inverse;
        Ok(id.probes)
    }

    pub fn plant(&self) -> Result<f64, FeedbackError> {
        Ok(self.config.receiver.apply(self.register)? + self.disturbance)
    }

    pub fn log(&self) -> &[RoundLog] {
        &self.log
    }

    pub fn rounds(&self) -> usize {
        self.round
    }

    /// Forward boxes emitted so far, empty ones included.
    pub fn boxes_sent(&self) -> usize {
        self.sent_totals.len() - 1
    }

    /// Runs one round, optionally adding `disturbance` to the plant first.
    pub fn step(&mut self, disturbance: Option<f64>) -> Result<&RoundLog, FeedbackError> {
        self.round += 1;
        let now = self.round;
        let delay = self.config.delay;
        self.disturbance += disturbance.unwrap_or(0.0);

        let report = Report { plant: self.plant()?, applied: self.applied };
        self.backward.push_back((now + delay, report));

        let mut seen = None;
        while self.backward.front().is_some_and(|(t, _)| *t <= now) {
            seen = self.backward.pop_front().map(|(_, r)| r);
        }
        let sent_total = *self.sent_totals.last().expect("starts at zero");
        let (observed, fwd_box) = match seen {
            Some(r) => {
                let d = delta(self.config.reference, r.plant);
                let model = self.inverse.forward()?;
                let expected_now = model.apply(sent_total)?;
                let in_flight = expected_now - model.apply(self.sent_totals[r.applied])?;
                let target = self.inverse.apply(expected_now + d - in_flight)?;
                (Some(d), modulate(self.config.gain * (target - sent_total), self.config.q)?)
            }
            None => (None, VirtualBox::empty()),
        };
        let fill_bits = fwd_box.fill();
        self.sent_totals.push(sent_total + demodulate(&fwd_box, self.config.q)?);
        self.forward.push_back((now + delay, fwd_box));

        while self.forward.front().is_some_and(|(t, _)| *t <= now) {
            let (_, b) = self.forward.pop_front().expect("checked non-empty");
            self.register += demodulate(&b, self.config.q)?;
            self.applied += 1;
        }

        self.log.push(RoundLog { round: now, delta: observed, fill_bits, plant: self.plant()?, lag: None });
        Ok(self.log.last().expect("just pushed"))
    }

    /// Runs `rounds` rounds; `disturbances` lists (round, amount) pairs.
    pub fn run(&mut self, rounds: usize, disturbances: &[(usize, f64)]) -> Result<(), FeedbackError> {
        for _ in 0..rounds {
            let next = self.round + 1;
            let d: f64 = disturbances.iter().filter(|(r, _)| *r == next).map(|(_, v)| v).sum();
            self.step((d != 0.0).then_some(d))?;
        }
        Ok(())
    }

    pub fn log_csv(&self) -> String {
        log_csv(&self.log)
    }
}

/// Round log as CSV: round, delta, fill_bits, plant_value, lag.
pub fn log_csv(log: &[RoundLog]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["round", "delta", "fill_bits", "plant_value", "lag"]).expect("in-memory write");
    for r in log {
        w.write_record([
            r.round.to_string(),
            r.delta.map(|d| d.to_string()).unwrap_or_default(),
            r.fill_bits.to_string(),
            r.plant.to_string(),
            r.lag.map(|l| l.to_string()).unwrap_or_default(),
        ])
        .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("ascii csv")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn offset_session(delay: usize, gain: f64) -> Session {
        let config = SessionConfig {
            reference: 5.0,
            q: 1e-3,
            gain,
            delay,
            receiver: ErrorFunction::Affine { a: 1.0, b: 2.0 },
        };
        let mut s = Session::new(config, InverseModel::default()).unwrap();
        assert_eq!(s.identify(Family::Affine).unwrap(), 2);
        s
    }

    #[test]
    fn offset_receiver_converges_in_one_round() {
        let mut s = offset_session(0, 1.0);
        assert_eq!(s.plant().unwrap(), 2.0);
        let r = s.step(None).unwrap().clone();
        assert_eq!(r.delta, Some(3.0));
        assert_eq!(r.plant, 5.0);
        assert_eq!(r.fill_bits, modulate(3.0, 1e-3).unwrap().fill());
        s.run(10, &[]).unwrap();
        assert!(s.log()[1..].iter().all(|r| r.fill_bits == 0));
    }

    #[test]
    fn delayed_convergence_bound() {
        for delay in 0..6 {
            let mut s = offset_session(delay, 1.0);
            s.run(2 * delay + 1, &[]).unwrap();
            assert!((s.plant().unwrap() - 5.0).abs() <= 1e-3 / 2.0, "delay {delay}");
            let sent_before = s.boxes_sent();
            s.run(100, &[]).unwrap();
            assert_eq!(s.boxes_sent(), sent_before + 100);
            assert!(s.log()[2 * delay + 1..].iter().all(|r| r.fill_bits == 0), "delay {delay}");
        }
    }

    #[test]
    fn disturbance_burst_then_decay() {
        let mut s = offset_session(2, 0.5);
        s.run(120, &[(40, 4.0)]).unwrap();
        let fills: Vec<usize> = s.log().iter().map(|r| r.fill_bits).collect();
        // the initial approach has died out well before the disturbance
        assert!(fills[30..40].iter().all(|f| *f == 0), "{fills:?}");
        let burst = fills.iter().enumerate().skip(30).find(|(_, f)| **f > 0).unwrap().0;
        assert_eq!(burst + 1, 40 + 2);
        assert!(fills[burst..].windows(2).all(|w| w[1] <= w[0]), "{fills:?}");
        assert_eq!(*fills.last().unwrap(), 0);
        assert!((s.plant().unwrap() - 5.0).abs() <= 1e-3);
    }

    #[test]
    fn bad_parameters_are_rejected() {
        let c = SessionConfig { reference: 0.0, q: 0.0, gain: 1.0, delay: 0, receiver: ErrorFunction::Identity };
        assert!(Session::new(c.clone(), InverseModel::default()).is_err());
        let c = SessionConfig { q: 1.0, gain: 1.5, ..c };
        assert!(Session::new(c, InverseModel::default()).is_err());
    }

    #[test]
    fn csv_has_one_row_per_round() {
        let mut s = offset_session(1, 1.0);
        s.run(3, &[]).unwrap();
        let csv = s.log_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "round,delta,fill_bits,plant_value,lag");
        assert_eq!(lines.len(), 4);
        assert!(lines[1].starts_with("1,,0,2,"));
    }
}
