//! Two-threshold decision rules over a belief path.
//!
//! A rule `(a_init, b_switch)` waits until `|M| >= a_init`, decides `sgn M`,
//! and then reverses the current decision `d` whenever `M d <= -b_switch`.
//! The optimal rule is the special case `(A, B)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Parameters, Sign};
use crate::simulation::PathSample;
use crate::value::{SwitchingCost, ValueContext};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdRule {
    pub a_init: f64,
    pub b_switch: f64,
}

impl ThresholdRule {
    pub fn new(a_init: f64, b_switch: f64) -> Result<Self> {
        for (what, v) in [("a_init", a_init), ("b_switch", b_switch)] {
            if !(v > 0.0 && v < 1.0) {
                return Err(Error::Domain { what, value: v, domain: "(0, 1)" });
            }
        }
        Ok(Self { a_init, b_switch })
    }

    /// The optimal rule `(A, B)`.
    pub fn optimal(ctx: &ValueContext) -> Self {
        Self { a_init: ctx.thresholds.a, b_switch: ctx.thresholds.b }
    }
}

/// What happened at one grid point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Event {
    None,
    Initial(Sign),
    Switch(Sign),
}

/// Incremental rule execution, one grid point at a time.
#[derive(Debug, Clone, Copy)]
pub struct DecisionTracker {
    rule: ThresholdRule,
    current: Option<Sign>,
}

impl DecisionTracker {
    pub fn new(rule: ThresholdRule) -> Self {
        Self { rule, current: None }
    }

    /// Current decision, `None` before the initial decision.
    pub fn current(&self) -> Option<Sign> {
        self.current
    }

    pub fn current_i8(&self) -> i8 {
        self.current.map_or(0, Sign::as_i8)
    }

    #[inline]
    pub fn observe(&mut self, m: f64) -> Event {
        match self.current {
            None => {
                if m.abs() >= self.rule.a_init {
                    let d = Sign::of(m);
                    self.current = Some(d);
                    Event::Initial(d)
                } else {
                    Event::None
                }
            }
            Some(d) => {
                if m * d.value() <= -self.rule.b_switch {
                    let nd = d.flip();
                    self.current = Some(nd);
                    Event::Switch(nd)
                } else {
                    Event::None
                }
            }
        }
    }
}

/// Decision history of one rule on one path.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionTrajectory {
    pub rule: ThresholdRule,
    /// Time of the initial decision; `None` if it never happened before truncation.
    pub tau0: Option<f64>,
    pub tau0_index: Option<usize>,
    /// Initial decision (meaningless when `tau0` is `None`).
    pub d: Option<Sign>,
    pub switch_times: Vec<f64>,
    pub switch_indices: Vec<usize>,
    /// Decision in force at each grid point: 0 before `tau0`, then ±1.
    pub d_process: Vec<i8>,
}

impl DecisionTrajectory {
    pub fn n_switches(&self) -> usize {
        self.switch_indices.len()
    }

    pub fn final_decision(&self) -> i8 {
        self.d_process.last().copied().unwrap_or(0)
    }
}

/// Executes `rule` over the belief values of `path`.
pub fn run_rule(rule: &ThresholdRule, path: &PathSample) -> DecisionTrajectory {
    let mut tracker = DecisionTracker::new(*rule);
    let mut traj = DecisionTrajectory {
        rule: *rule,
        tau0: None,
        tau0_index: None,
        d: None,
        switch_times: Vec::new(),
        switch_indices: Vec::new(),
        d_process: Vec::with_capacity(path.len()),
    };
    for (i, &m) in path.m.iter().enumerate() {
        match tracker.observe(m) {
            Event::Initial(d) => {
                traj.tau0 = Some(path.time(i));
                traj.tau0_index = Some(i);
                traj.d = Some(d);
            }
            Event::Switch(_) => {
                traj.switch_times.push(path.time(i));
                traj.switch_indices.push(i);
            }
            Event::None => {}
        }
        traj.d_process.push(tracker.current_i8());
    }
    traj
}

/// Realized cost components on one path.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PenaltyBreakdown {
    /// `c0 tau0`
    pub delay: f64,
    /// `c1 ∫ I(D != theta) dt`
    pub wrong_time_raw: f64,
    /// `(c1/2) ∫ (1 - M D) dt`
    pub wrong_time_conditioned: f64,
    /// `c2 × #switches`
    pub switch_cost: f64,
    /// Expected cost after truncation, given the final state.
    pub tail_correction: f64,
    pub n_switches: usize,
}

impl PenaltyBreakdown {
    pub fn total_raw(&self) -> f64 {
        self.delay + self.wrong_time_raw + self.switch_cost + self.tail_correction
    }

    pub fn total_conditioned(&self) -> f64 {
        self.delay + self.wrong_time_conditioned + self.switch_cost + self.tail_correction
    }
}

/// Streaming penalty accumulation with the left-endpoint rectangle rule.
#[derive(Debug, Clone)]
pub struct PenaltyAccumulator {
    c0: f64,
    c1: f64,
    c2: f64,
    dt: f64,
    theta: f64,
    tail: Option<SwitchingCost>,
    tau0_index: Option<usize>,
    // Integrals are kept unscaled and multiplied out in `finish`.
    wrong_steps: u64,
    cond_integral: f64,
    n_switches: usize,
    pending: Option<(f64, i8)>,
    last_index: usize,
}

impl PenaltyAccumulator {
    /// `tail` selects the closed-form continuation cost at truncation.
    pub fn new(params: &Parameters, rule: &ThresholdRule, dt: f64, theta: Sign, tail: bool) -> Result<Self> {
        Ok(Self {
            c0: params.c0(),
            c1: params.c1(),
            c2: params.c2(),
            dt,
            theta: theta.value(),
            tail: if tail { Some(SwitchingCost::new(*params, rule.b_switch)?) } else { None },
            tau0_index: None,
            wrong_steps: 0,
            cond_integral: 0.0,
            n_switches: 0,
            pending: None,
            last_index: 0,
        })
    }

    /// Feeds grid point `index` with belief `m`, the decision `d` in force
    /// there (after any event at this point) and the event itself.
    #[inline]
    pub fn push(&mut self, index: usize, m: f64, d: i8, event: Event) {
        if let Some((pm, pd)) = self.pending {
            if pd != 0 {
                if f64::from(pd) != self.theta {
                    self.wrong_steps += 1;
                }
                self.cond_integral += 1.0 - pm * f64::from(pd);
            }
        }
        match event {
            Event::Initial(_) => self.tau0_index = Some(index),
            Event::Switch(_) => self.n_switches += 1,
            Event::None => {}
        }
        self.pending = Some((m, d));
        self.last_index = index;
    }

    pub fn finish(self) -> Result<PenaltyBreakdown> {
        let t_end = self.last_index as f64 * self.dt;
        let tau0 = self.tau0_index.ok_or(Error::NoInitialDecision { t_end })?;
        let (m_end, d_end) = self.pending.expect("tau0 implies at least one point");
        let tail_correction = match (self.tail, d_end) {
            (Some(w), 1) => w.cost_to_go(m_end, Sign::Plus),
            (Some(w), -1) => w.cost_to_go(m_end, Sign::Minus),
            _ => 0.0,
        };
        Ok(PenaltyBreakdown {
            delay: self.c0 * tau0 as f64 * self.dt,
            wrong_time_raw: self.c1 * self.wrong_steps as f64 * self.dt,
            wrong_time_conditioned: 0.5 * self.c1 * self.cond_integral * self.dt,
            switch_cost: self.c2 * self.n_switches as f64,
            tail_correction,
            n_switches: self.n_switches,
        })
    }
}

/// Realized penalty of a decision trajectory on its path.
///
/// With `use_tail`, the expected cost after the truncation point is added in
/// closed form, assuming the same switching level is used from then on; for
/// the optimal rule this is `U(M_end, D_end)`.
pub fn realized_penalty(
    traj: &DecisionTrajectory,
    path: &PathSample,
    ctx: &ValueContext,
    use_tail: bool,
) -> Result<PenaltyBreakdown> {
    if traj.tau0_index.is_none() {
        return Err(Error::NoInitialDecision { t_end: path.truncated_at });
    }
    let mut acc = PenaltyAccumulator::new(&ctx.params, &traj.rule, path.dt, path.theta, use_tail)?;
    let mut switches = traj.switch_indices.iter().peekable();
    for (i, (&m, &d)) in path.m.iter().zip(&traj.d_process).enumerate() {
        let event = if Some(i) == traj.tau0_index {
            Event::Initial(Sign::of(f64::from(d)))
        } else if switches.peek() == Some(&&i) {
            switches.next();
            Event::Switch(Sign::of(f64::from(d)))
        } else {
            Event::None
        };
        acc.push(i, m, d, event);
    }
    acc.finish()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simulation::{simulate_path, SimConfig};

    fn fixture(m: Vec<f64>) -> PathSample {
        PathSample::from_beliefs(Sign::Plus, 0.1, m)
    }

    #[test]
    fn immediate_initial_decision() {
        let rule = ThresholdRule::new(0.3, 0.5).unwrap();
        let traj = run_rule(&rule, &fixture(vec![-0.5, -0.2, 0.1]));
        assert_eq!(traj.tau0, Some(0.0));
        assert_eq!(traj.d, Some(Sign::Minus));
        assert!(traj.switch_times.is_empty());
    }

    #[test]
    fn hand_traced_path() {
        let rule = ThresholdRule::new(0.37, 0.55).unwrap();
        let traj = run_rule(&rule, &fixture(vec![0.0, -0.2, -0.4, -0.3, 0.3, 0.6]));
        assert_eq!(traj.tau0_index, Some(2));
        assert_eq!(traj.d, Some(Sign::Minus));
        assert_eq!(traj.switch_indices, vec![5]);
        assert_eq!(traj.d_process, vec![0, 0, -1, -1, -1, 1]);
    }

    #[test]
    fn monotone_path_never_switches() {
        let rule = ThresholdRule::new(0.37, 0.55).unwrap();
        let m: Vec<f64> = (0..100).map(|i| (i as f64 * 0.05).tanh()).collect();
        let traj = run_rule(&rule, &fixture(m));
        assert_eq!(traj.d, Some(Sign::Plus));
        assert_eq!(traj.n_switches(), 0);
    }

    #[test]
    fn ties_trigger() {
        let rule = ThresholdRule::new(0.5, 0.25).unwrap();
        let traj = run_rule(&rule, &fixture(vec![0.0, 0.5, -0.25, 0.25]));
        assert_eq!(traj.tau0_index, Some(1));
        assert_eq!(traj.switch_indices, vec![2, 3]);
    }

    #[test]
    fn rejects_bad_rules() {
        assert!(ThresholdRule::new(0.0, 0.5).is_err());
        assert!(ThresholdRule::new(0.5, 1.0).is_err());
    }

    #[test]
    fn perfect_prior_costs_nothing() {
        let params = Parameters::new(1.0 / 3.0, 1.0, 2.0 / 3.0, 1.0, 1.5).unwrap();
        let ctx = ValueContext::new(params).unwrap();
        let cfg = SimConfig::for_params(&params);
        let path = simulate_path(&params, &cfg, 0);
        let traj = run_rule(&ThresholdRule::optimal(&ctx), &path);
        assert_eq!(traj.tau0, Some(0.0));
        assert_eq!(traj.d, Some(Sign::Plus));
        let pen = realized_penalty(&traj, &path, &ctx, true).unwrap();
        assert_eq!(pen.total_raw(), 0.0);
        assert_eq!(pen.total_conditioned(), 0.0);
    }

    #[test]
    fn conditioned_integrand_vanishes_when_certain() {
        let ctx = ValueContext::new(Parameters::reference()).unwrap();
        let path = fixture(vec![1.0; 50]);
        let traj = run_rule(&ThresholdRule::optimal(&ctx), &path);
        let pen = realized_penalty(&traj, &path, &ctx, false).unwrap();
        assert_eq!(pen.wrong_time_conditioned, 0.0);
        assert_eq!(pen.wrong_time_raw, 0.0);
    }

    #[test]
    fn penalty_hand_computation() {
        let ctx = ValueContext::new(Parameters::reference()).unwrap();
        let (c0, c1, c2) = (ctx.params.c0(), ctx.params.c1(), ctx.params.c2());
        let rule = ThresholdRule::new(0.37, 0.55).unwrap();
        let path = PathSample::from_beliefs(Sign::Plus, 0.1, vec![0.0, -0.2, -0.4, -0.3, 0.3, 0.6]);
        let traj = run_rule(&rule, &path);
        let pen = realized_penalty(&traj, &path, &ctx, false).unwrap();
        assert!((pen.delay - c0 * 0.2).abs() < 1e-15);
        // D = -1 on [0.2, 0.5), theta = +1.
        assert!((pen.wrong_time_raw - c1 * 0.3).abs() < 1e-12);
        let cond = 0.5 * c1 * 0.1 * ((1.0 - 0.4) + (1.0 - 0.3) + (1.0 + 0.3));
        assert!((pen.wrong_time_conditioned - cond).abs() < 1e-12);
        assert_eq!(pen.switch_cost, c2);
        assert_eq!(pen.tail_correction, 0.0);

        let with_tail = realized_penalty(&traj, &path, &ctx, true).unwrap();
        let w = SwitchingCost::new(ctx.params, 0.55).unwrap();
        assert_eq!(with_tail.tail_correction, w.cost_to_go(0.6, Sign::Plus));
    }

    #[test]
    fn untriggered_path_is_an_error() {
        let ctx = ValueContext::new(Parameters::reference()).unwrap();
        let path = fixture(vec![0.0, 0.1, -0.1]);
        let traj = run_rule(&ThresholdRule::optimal(&ctx), &path);
        assert_eq!(traj.tau0, None);
        assert_eq!(traj.final_decision(), 0);
        assert!(matches!(
            realized_penalty(&traj, &path, &ctx, true),
            Err(Error::NoInitialDecision { .. })
        ));
    }

    #[test]
    fn simulated_paths_respect_trajectory_invariants() {
        let params = Parameters::reference();
        let ctx = ValueContext::new(params).unwrap();
        let cfg = SimConfig::for_params(&params).with_dt(0.01).unwrap();
        let rule = ThresholdRule::optimal(&ctx);
        for i in 0..200 {
            let path = simulate_path(&params, &cfg, i);
            let traj = run_rule(&rule, &path);
            let Some(t0) = traj.tau0_index else { continue };
            assert!(traj.d_process[..t0].iter().all(|&d| d == 0));
            assert!(traj.switch_indices.iter().all(|&s| s > t0));
            assert!(traj.switch_indices.windows(2).all(|w| w[0] < w[1]));
            // Decisions alternate.
            for &s in &traj.switch_indices {
                assert_eq!(traj.d_process[s], -traj.d_process[s - 1]);
            }
            for (&m, &d) in path.m.iter().zip(&traj.d_process).skip(t0) {
                let p_wrong = (1.0 - m * f64::from(d)) / 2.0;
                assert!((0.0..=1.0).contains(&p_wrong));
            }
            let m_end = *path.m.last().unwrap();
            if m_end.abs() >= cfg.m_stop {
                assert_eq!(f64::from(traj.final_decision()), Sign::of(m_end).value());
            }
        }
    }
}
