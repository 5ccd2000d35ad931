//! Per-user queue backlogs and the slot update
//! `Q(t+1) = max(Q - I*R, 0) + A`.
//!
//! Service is applied before arrivals, and a scheduled user with a short queue
//! wastes the residual rate: unused service is lost, never reallocated within
//! the slot. Queues are measured in (continuous) bits.

use crate::scheduler::UserId;

/// One slot update for one user.
///
/// Returns `(new_q, served)` where `served = min(q, offered)` and
/// `new_q = max(q - offered, 0) + arrivals`, with `offered = rate` when
/// scheduled and zero otherwise.
pub fn update_queue(q: f64, scheduled: bool, rate_bits: f64, arrivals_bits: f64) -> (f64, f64) {
    debug_assert!(
        q >= 0.0 && rate_bits >= 0.0 && arrivals_bits >= 0.0,
        "queue update inputs must be nonnegative (q={q}, rate={rate_bits}, arrivals={arrivals_bits})"
    );
    let offered = if scheduled { rate_bits } else { 0.0 };
    let served = q.min(offered);
    let new_q = (q - offered).max(0.0) + arrivals_bits;
    debug_assert!(crate::lyapunov::check_slot_inequality(q, offered, arrivals_bits));
    (new_q, served)
}

/// Backlogs for the whole cell plus the counters backing conservation checks.
#[derive(Debug, Clone, PartialEq)]
pub struct QueueState {
    /// Current backlog per user, bits.
    pub q_bits: Vec<f64>,
    pub cumulative_arrived_bits: Vec<f64>,
    pub cumulative_served_bits: Vec<f64>,
    initial_bits: Vec<f64>,
}

/// Aggregate outcome of applying one slot to the whole cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlotOutcome {
    pub served_bits: f64,
    /// Offered minus served over scheduled users: capacity spent on queues
    /// that ran dry mid-slot.
    pub wasted_bits: f64,
}

impl QueueState {
    pub fn new(n_users: usize) -> Self {
        Self {
            q_bits: vec![0.0; n_users],
            cumulative_arrived_bits: vec![0.0; n_users],
            cumulative_served_bits: vec![0.0; n_users],
            initial_bits: vec![0.0; n_users],
        }
    }

    pub fn n_users(&self) -> usize {
        self.q_bits.len()
    }

    /// Applies arrivals to everybody and service to the scheduled set.
    /// `offered_bits` is dense (one entry per user, zero if unscheduled).
    pub fn apply_slot(
        &mut self,
        scheduled: &[UserId],
        offered_bits: &[f64],
        arrivals_bits: &[f64],
    ) -> SlotOutcome {
        debug_assert_eq!(offered_bits.len(), self.q_bits.len());
        debug_assert_eq!(arrivals_bits.len(), self.q_bits.len());
        let mut is_scheduled = vec![false; self.q_bits.len()];
        for &u in scheduled {
            is_scheduled[u] = true;
        }
        let mut served_total = 0.0;
        let mut wasted = 0.0;
        for n in 0..self.q_bits.len() {
            let (new_q, served) =
                update_queue(self.q_bits[n], is_scheduled[n], offered_bits[n], arrivals_bits[n]);
            if is_scheduled[n] {
                wasted += offered_bits[n] - served;
            }
            self.q_bits[n] = new_q;
            self.cumulative_arrived_bits[n] += arrivals_bits[n];
            self.cumulative_served_bits[n] += served;
            served_total += served;
        }
        SlotOutcome {
            served_bits: served_total,
            wasted_bits: wasted,
        }
    }

    /// Total backlog over all users, bits.
    pub fn total_backlog(&self) -> f64 {
        self.q_bits.iter().sum()
    }

    /// Largest per-user deviation from `q = q0 + arrived - served`.
    /// Zero up to floating-point rounding.
    pub fn conservation_residual(&self) -> f64 {
        self.q_bits
            .iter()
            .zip(&self.initial_bits)
            .zip(self.cumulative_arrived_bits.iter().zip(&self.cumulative_served_bits))
            .map(|((&q, &q0), (&a, &s))| (q - (q0 + a - s)).abs())
            .fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn service_before_arrivals() {
        let (q, served) = update_queue(10.0, true, 4.0, 2.0);
        assert_eq!(q, 8.0);
        assert_eq!(served, 4.0);
    }

    #[test]
    fn clamps_at_zero_when_rate_exceeds_queue() {
        let (q, served) = update_queue(3.0, true, 5.0, 1.0);
        assert_eq!(q, 1.0);
        assert_eq!(served, 3.0);
    }

    #[test]
    fn unscheduled_user_is_untouched() {
        let (q, served) = update_queue(7.0, false, 100.0, 0.0);
        assert_eq!(q, 7.0);
        assert_eq!(served, 0.0);
    }

    #[test]
    fn total_backlog_sums() {
        let mut state = QueueState::new(3);
        assert_eq!(state.total_backlog(), 0.0);
        state.q_bits = vec![1.0, 2.0, 3.0];
        assert_eq!(state.total_backlog(), 6.0);
    }

    #[test]
    fn conservation_after_update_sequence() {
        let mut state = QueueState::new(2);
        let arrivals = [[5.0, 1.0], [0.0, 2.0], [3.0, 0.0], [0.0, 0.0]];
        let offered = [[0.0, 0.0], [4.0, 0.0], [0.0, 2.5], [2.0, 0.5]];
        let scheduled: [&[UserId]; 4] = [&[], &[0], &[1], &[0, 1]];
        for i in 0..4 {
            state.apply_slot(scheduled[i], &offered[i], &arrivals[i]);
        }
        assert!(state.conservation_residual() < 1e-9);
    }

    #[test]
    fn wasted_service_is_tracked() {
        let mut state = QueueState::new(1);
        state.q_bits[0] = 1.0;
        let out = state.apply_slot(&[0], &[4.0], &[0.0]);
        assert_eq!(out.served_bits, 1.0);
        assert_eq!(out.wasted_bits, 3.0);
    }

    proptest! {
        #[test]
        fn arrivals_never_decrease_new_queue(
            q in 0.0..1e9f64,
            rate in 0.0..1e7f64,
            a1 in 0.0..1e7f64,
            extra in 0.0..1e7f64,
            scheduled in any::<bool>(),
        ) {
            let (low, _) = update_queue(q, scheduled, rate, a1);
            let (high, _) = update_queue(q, scheduled, rate, a1 + extra);
            prop_assert!(high >= low);
        }

        #[test]
        fn served_never_exceeds_queue_or_rate(
            q in 0.0..1e9f64,
            rate in 0.0..1e7f64,
            a in 0.0..1e7f64,
        ) {
            let (new_q, served) = update_queue(q, true, rate, a);
            prop_assert!(served <= q && served <= rate);
            prop_assert!(new_q >= 0.0);
        }
    }
}
