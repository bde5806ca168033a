//! Task-level state machine, sparse rewards, discrete action decoding,
//! and the normalized system-state observation.
//!
//! Termination is owned entirely by the FSM: an action can only end an
//! episode by triggering a jaw-close event or by running out the clock.

use crate::config::TaskConfig;
use crate::control::Phase;
use crate::error::{Error, Result};
use crate::scene::Command;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FsmState {
    NormalProgress,
    AbnormalProgress,
    SuccessTermination,
    FailedTermination,
}

impl FsmState {
    pub fn id(&self) -> u8 {
        match self {
            FsmState::NormalProgress => 0,
            FsmState::AbnormalProgress => 1,
            FsmState::SuccessTermination => 2,
            FsmState::FailedTermination => 3,
        }
    }

    pub fn is_terminal(&self) -> bool {
        matches!(self, FsmState::SuccessTermination | FsmState::FailedTermination)
    }

    pub fn name(&self) -> &'static str {
        match self {
            FsmState::NormalProgress => "normal",
            FsmState::AbnormalProgress => "abnormal",
            FsmState::SuccessTermination => "success",
            FsmState::FailedTermination => "failed",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "normal" => Ok(FsmState::NormalProgress),
            "abnormal" => Ok(FsmState::AbnormalProgress),
            "success" => Ok(FsmState::SuccessTermination),
            "failed" => Ok(FsmState::FailedTermination),
            other => Err(Error::Validation(format!("unknown FSM state {other:?}"))),
        }
    }
}

/// Per-step events feeding the FSM transition.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct StepEvents {
    /// The jaw transitioned open -> closed this step.
    pub jaw_closed: bool,
    /// Capture-volume test at closure succeeded.
    pub grasp_ok: bool,
    /// The desired pose left the workspace and was clamped.
    pub clamped_at_boundary: bool,
    /// Post-actuation safe-height check fired.
    pub below_safe_height: bool,
    /// Perception lost the target's voxels this step.
    pub target_lost: bool,
}

impl StepEvents {
    fn abnormal(&self) -> bool {
        self.clamped_at_boundary || self.below_safe_height || self.target_lost
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TaskFsm {
    cfg: TaskConfig,
    state: FsmState,
    t: u32,
    jaw_closures: u32,
}

impl TaskFsm {
    pub fn new(cfg: TaskConfig) -> Self {
        Self { cfg, state: FsmState::NormalProgress, t: 0, jaw_closures: 0 }
    }

    pub fn state(&self) -> FsmState {
        self.state
    }

    pub fn t(&self) -> u32 {
        self.t
    }

    pub fn h_max(&self) -> u32 {
        self.cfg.h_max
    }

    pub fn gamma(&self) -> f64 {
        self.cfg.gamma
    }

    /// Advances one step. Success beats failure beats abnormal beats
    /// normal; in re-grasp mode the first unsuccessful closure does not
    /// terminate.
    pub fn step(&mut self, events: StepEvents) -> Result<(f64, bool)> {
        if self.state.is_terminal() {
            return Err(Error::Contract("stepping a terminal task FSM".into()));
        }
        self.t += 1;
        if events.jaw_closed {
            self.jaw_closures += 1;
        }

        if events.jaw_closed && events.grasp_ok {
            self.state = FsmState::SuccessTermination;
            return Ok((self.cfg.reward_success, true));
        }
        let failed_grasp = events.jaw_closed && !events.grasp_ok;
        let fatal_grasp_failure = failed_grasp && (!self.cfg.regrasp || self.jaw_closures >= 2);
        if fatal_grasp_failure || self.t >= self.cfg.h_max {
            self.state = FsmState::FailedTermination;
            return Ok((self.cfg.reward_failure, true));
        }
        if events.abnormal() || failed_grasp {
            self.state = FsmState::AbnormalProgress;
            return Ok((self.cfg.reward_abnormal, false));
        }
        self.state = FsmState::NormalProgress;
        Ok((self.cfg.reward_normal, false))
    }
}

/// The three scalar system states, each normalized to [0, 1].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemStates {
    pub fsm: f64,
    pub jaw: f64,
    pub controller: f64,
}

pub fn system_states(state: FsmState, jaw_open: bool, phase: Phase) -> SystemStates {
    SystemStates {
        fsm: state.id() as f64 / 3.0,
        jaw: if jaw_open { 1.0 } else { 0.0 },
        controller: phase.id() as f64 / 2.0,
    }
}

impl SystemStates {
    pub fn as_array(&self) -> [f64; 3] {
        [self.fsm, self.jaw, self.controller]
    }
}

/// One of the 9 discrete policy actions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DiscreteAction {
    XPos,
    XNeg,
    YPos,
    YNeg,
    ZPos,
    ZNeg,
    YawPos,
    YawNeg,
    JawToggle,
}

impl DiscreteAction {
    pub const COUNT: usize = 9;

    pub const ALL: [DiscreteAction; 9] = [
        DiscreteAction::XPos,
        DiscreteAction::XNeg,
        DiscreteAction::YPos,
        DiscreteAction::YNeg,
        DiscreteAction::ZPos,
        DiscreteAction::ZNeg,
        DiscreteAction::YawPos,
        DiscreteAction::YawNeg,
        DiscreteAction::JawToggle,
    ];

    pub fn index(&self) -> u8 {
        Self::ALL.iter().position(|a| a == self).unwrap() as u8
    }

    pub fn from_index(index: u8) -> Result<Self> {
        Self::ALL
            .get(index as usize)
            .copied()
            .ok_or_else(|| Error::Validation(format!("discrete action index {index} out of range")))
    }

    /// Signed unit move on a translation/rotation axis, if any.
    fn axis(&self) -> Option<(usize, f64)> {
        match self {
            DiscreteAction::XPos => Some((0, 1.0)),
            DiscreteAction::XNeg => Some((0, -1.0)),
            DiscreteAction::YPos => Some((1, 1.0)),
            DiscreteAction::YNeg => Some((1, -1.0)),
            DiscreteAction::ZPos => Some((2, 1.0)),
            DiscreteAction::ZNeg => Some((2, -1.0)),
            DiscreteAction::YawPos => Some((3, 1.0)),
            DiscreteAction::YawNeg => Some((3, -1.0)),
            DiscreteAction::JawToggle => None,
        }
    }
}

/// Discrete action -> 5-element command. Axis actions keep the jaw in
/// its current state; the toggle flips it.
pub fn decode_action(action: DiscreteAction, jaw_open: bool) -> Command {
    let mut e = [0.0f64; 5];
    match action.axis() {
        Some((axis, sign)) => {
            e[axis] = sign;
            e[4] = if jaw_open { 1.0 } else { -1.0 };
        }
        None => {
            e[4] = if jaw_open { -1.0 } else { 1.0 };
        }
    }
    Command::new(e).expect("decoded command is in range")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fsm() -> TaskFsm {
        TaskFsm::new(TaskConfig::default())
    }

    #[test]
    fn successful_grasp_terminates_with_unit_reward() {
        let mut f = fsm();
        let (r, done) =
            f.step(StepEvents { jaw_closed: true, grasp_ok: true, ..Default::default() }).unwrap();
        assert_eq!(r, 1.0);
        assert!(done);
        assert_eq!(f.state(), FsmState::SuccessTermination);
    }

    #[test]
    fn failed_grasp_terminates_with_penalty() {
        let mut f = fsm();
        let (r, done) =
            f.step(StepEvents { jaw_closed: true, grasp_ok: false, ..Default::default() }).unwrap();
        assert_eq!(r, -0.1);
        assert!(done);
        assert_eq!(f.state(), FsmState::FailedTermination);
    }

    #[test]
    fn timeout_terminates_with_penalty() {
        let mut f = fsm();
        for _ in 0..79 {
            let (r, done) = f.step(StepEvents::default()).unwrap();
            assert_eq!(r, -0.001);
            assert!(!done);
        }
        let (r, done) = f.step(StepEvents::default()).unwrap();
        assert_eq!(r, -0.1);
        assert!(done);
        assert_eq!(f.t(), 80);
    }

    #[test]
    fn boundary_clamp_is_abnormal_but_not_terminal() {
        let mut f = fsm();
        let (r, done) =
            f.step(StepEvents { clamped_at_boundary: true, ..Default::default() }).unwrap();
        assert_eq!(r, -0.01);
        assert!(!done);
        assert_eq!(f.state(), FsmState::AbnormalProgress);
        // Recovers to normal on a clean step.
        let (r, _) = f.step(StepEvents::default()).unwrap();
        assert_eq!(r, -0.001);
        assert_eq!(f.state(), FsmState::NormalProgress);
    }

    #[test]
    fn below_safe_height_and_target_lost_are_abnormal() {
        let mut f = fsm();
        let (r, _) = f.step(StepEvents { below_safe_height: true, ..Default::default() }).unwrap();
        assert_eq!(r, -0.01);
        let (r, _) = f.step(StepEvents { target_lost: true, ..Default::default() }).unwrap();
        assert_eq!(r, -0.01);
    }

    #[test]
    fn stepping_a_terminal_fsm_is_a_contract_violation() {
        let mut f = fsm();
        f.step(StepEvents { jaw_closed: true, grasp_ok: true, ..Default::default() }).unwrap();
        assert!(f.step(StepEvents::default()).is_err());
    }

    #[test]
    fn regrasp_allows_a_second_closure() {
        let mut f = TaskFsm::new(TaskConfig { regrasp: true, ..TaskConfig::default() });
        let (r, done) =
            f.step(StepEvents { jaw_closed: true, grasp_ok: false, ..Default::default() }).unwrap();
        assert_eq!(r, -0.01);
        assert!(!done);
        let (r, done) =
            f.step(StepEvents { jaw_closed: true, grasp_ok: true, ..Default::default() }).unwrap();
        assert_eq!(r, 1.0);
        assert!(done);
    }

    #[test]
    fn regrasp_second_failure_terminates() {
        let mut f = TaskFsm::new(TaskConfig { regrasp: true, ..TaskConfig::default() });
        f.step(StepEvents { jaw_closed: true, grasp_ok: false, ..Default::default() }).unwrap();
        let (r, done) =
            f.step(StepEvents { jaw_closed: true, grasp_ok: false, ..Default::default() }).unwrap();
        assert_eq!(r, -0.1);
        assert!(done);
    }

    #[test]
    fn success_at_the_horizon_still_counts() {
        let mut f = fsm();
        for _ in 0..79 {
            f.step(StepEvents::default()).unwrap();
        }
        let (r, done) =
            f.step(StepEvents { jaw_closed: true, grasp_ok: true, ..Default::default() }).unwrap();
        assert_eq!(r, 1.0);
        assert!(done);
        assert_eq!(f.state(), FsmState::SuccessTermination);
    }

    #[test]
    fn decode_axis_actions() {
        let cmd = decode_action(DiscreteAction::XPos, true);
        assert_eq!(cmd.elements(), &[1.0, 0.0, 0.0, 0.0, 1.0]);
        let cmd = decode_action(DiscreteAction::ZNeg, false);
        assert_eq!(cmd.elements(), &[0.0, 0.0, -1.0, 0.0, -1.0]);
        let cmd = decode_action(DiscreteAction::YawPos, true);
        assert_eq!(cmd.elements(), &[0.0, 0.0, 0.0, 1.0, 1.0]);
    }

    #[test]
    fn decode_jaw_toggle() {
        assert_eq!(decode_action(DiscreteAction::JawToggle, true).elements(), &[0.0, 0.0, 0.0, 0.0, -1.0]);
        assert_eq!(decode_action(DiscreteAction::JawToggle, false).elements(), &[0.0, 0.0, 0.0, 0.0, 1.0]);
    }

    #[test]
    fn action_indices_round_trip() {
        for a in DiscreteAction::ALL {
            assert_eq!(DiscreteAction::from_index(a.index()).unwrap(), a);
        }
        assert!(DiscreteAction::from_index(9).is_err());
    }

    #[test]
    fn system_states_encoding() {
        let s = system_states(FsmState::NormalProgress, true, Phase::Rl);
        assert_eq!(s.as_array(), [0.0, 1.0, 1.0]);
        let s = system_states(FsmState::FailedTermination, false, Phase::Begin);
        assert_eq!(s.as_array(), [1.0, 0.0, 0.0]);
    }

    #[test]
    fn system_states_are_normalized_and_injective() {
        use crate::control::Phase;
        let states = [
            FsmState::NormalProgress,
            FsmState::AbnormalProgress,
            FsmState::SuccessTermination,
            FsmState::FailedTermination,
        ];
        let mut seen = std::collections::BTreeSet::new();
        for st in states {
            for jaw in [true, false] {
                for phase in [Phase::Begin, Phase::Pid, Phase::Rl] {
                    let s = system_states(st, jaw, phase);
                    for v in s.as_array() {
                        assert!((0.0..=1.0).contains(&v));
                    }
                }
            }
            let s = system_states(st, true, Phase::Begin);
            assert!(seen.insert((s.fsm * 1000.0) as i64), "fsm ids must be distinct");
        }
    }
}
