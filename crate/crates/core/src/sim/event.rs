use crate::sim::time::TimePoint;

/// A named state mutation applied to one unit.
#[derive(Debug, Clone, PartialEq)]
pub enum StateAction {
    AddToState { state: String, amount: f64 },
}

/// A scheduled, instantaneous change to a unit's state.
///
/// The master places a communication point exactly at `time`, applies the
/// action after stepping into that point and before exchanging values.
#[derive(Debug, Clone, PartialEq)]
pub struct Event {
    pub time: TimePoint,
    pub unit_id: String,
    pub action: StateAction,
}

impl Event {
    pub fn add_to_state(time: TimePoint, unit_id: &str, state: &str, amount: f64) -> Self {
        Event {
            time,
            unit_id: unit_id.to_string(),
            action: StateAction::AddToState {
                state: state.to_string(),
                amount,
            },
        }
    }

    /// Volume (or other quantity) this event adds to the model, if it is an addition.
    pub fn added_amount(&self) -> f64 {
        match &self.action {
            StateAction::AddToState { amount, .. } => *amount,
        }
    }
}
