//! Ground-truth danger: the scripted fire and traffic events that demand braking.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::scenario::{EdgeId, Ident, Ignition, Tick, TuningConstants};

/// Edges on fire so far. Only ever grows.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize)]
pub struct FireState {
    pub burning: BTreeSet<EdgeId>,
    /// Index of the first timeline entry not yet applied.
    pub cursor: usize,
}

impl FireState {
    #[must_use]
    pub fn is_burning(&self, edge: &EdgeId) -> bool {
        self.burning.contains(edge)
    }
}

/// Applies every ignition scheduled at or before `tick` that the cursor has
/// not passed yet. `timeline` must be sorted by tick.
#[must_use]
pub fn advance_fire(fire: &FireState, timeline: &[Ignition], tick: Tick) -> FireState {
    let mut next = fire.clone();
    while let Some(ign) = timeline.get(next.cursor) {
        if ign.tick > tick {
            break;
        }
        next.burning.insert(ign.edge.clone());
        next.cursor += 1;
    }
    next
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrafficKind {
    BrakeLightsAhead,
    EmergencyBehind,
}

/// Scripted reason to stop, bound to one road segment.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrafficEvent {
    pub id: Ident,
    pub kind: TrafficKind,
    pub start: Tick,
    /// Exclusive.
    pub end: Tick,
    pub edge: EdgeId,
}

impl TrafficEvent {
    /// True while the window is open and the car is on the trigger edge.
    #[must_use]
    pub fn is_active(&self, vehicle_edge: &EdgeId, tick: Tick) -> bool {
        (self.start..self.end).contains(&tick) && *vehicle_edge == self.edge
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ComplianceStatus {
    NotApplicable,
    Complying,
    Violated,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ComplianceResult {
    pub status: ComplianceStatus,
    pub penalty_until: Option<Tick>,
}

impl ComplianceResult {
    const NOT_APPLICABLE: Self = Self { status: ComplianceStatus::NotApplicable, penalty_until: None };
    const COMPLYING: Self = Self { status: ComplianceStatus::Complying, penalty_until: None };
}

/// What one traffic event has seen of the driver so far.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize)]
pub struct ComplianceRecord {
    /// First tick the event was active for this car; grace counts from here.
    pub activated_at: Option<Tick>,
    pub brake_engaged: bool,
    pub violated: bool,
}

impl ComplianceRecord {
    #[must_use]
    pub fn status(&self) -> ComplianceStatus {
        if self.violated {
            ComplianceStatus::Violated
        } else if self.activated_at.is_some() {
            ComplianceStatus::Complying
        } else {
            ComplianceStatus::NotApplicable
        }
    }
}

/// Judges the driver against an active traffic event.
///
/// The brake must be down by `activated_at + brake_grace` and stay down while
/// the event lasts. A violation is reported once per event and costs a forced
/// stop of `noncompliance_penalty` ticks.
#[must_use]
pub fn check_compliance(
    event: Option<&TrafficEvent>,
    record: &ComplianceRecord,
    brake_held: bool,
    tick: Tick,
    tuning: &TuningConstants,
) -> (ComplianceResult, ComplianceRecord) {
    if event.is_none() || record.violated {
        return (ComplianceResult::NOT_APPLICABLE, *record);
    }
    let mut next = *record;
    let activated = *next.activated_at.get_or_insert(tick);
    let violated = if brake_held {
        next.brake_engaged = true;
        false
    } else {
        // released early, or never pressed within the grace window
        next.brake_engaged || tick >= activated + u64::from(tuning.brake_grace)
    };
    if violated {
        next.violated = true;
        let result = ComplianceResult {
            status: ComplianceStatus::Violated,
            penalty_until: Some(tick + u64::from(tuning.noncompliance_penalty)),
        };
        (result, next)
    } else {
        (ComplianceResult::COMPLYING, next)
    }
}
