//! Trace records shared between the simulation loop and the bound auditor.

use crate::scheduler::UserId;

/// Everything that happened in one slot, dense over users.
#[derive(Debug, Clone, PartialEq)]
pub struct SlotRecord {
    /// Bits arriving this slot, per user.
    pub arrivals_bits: Vec<f64>,
    /// Users scheduled this slot.
    pub scheduled: Vec<UserId>,
    /// Offered service per user (zero for unscheduled users), bits.
    pub offered_bits: Vec<f64>,
    /// Bits actually drained per user, `min(queue, offered)`.
    pub served_bits: Vec<f64>,
}

/// One frame of slots plus the queue snapshots bracketing it.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameTrace {
    pub frame_index: u64,
    /// Backlogs at the frame boundary `t = lT`, bits.
    pub q_start_bits: Vec<f64>,
    /// Backlogs after the frame's last slot update, bits.
    pub q_end_bits: Vec<f64>,
    pub slots: Vec<SlotRecord>,
    /// Whether the pilot allocation was reconfigured at this frame boundary.
    pub reconfigured: bool,
}
