//! Quadratic-Lyapunov bookkeeping: drift, drift-plus-penalty audits of the
//! frame bound, and trend diagnostics for the cost/queue tradeoff.
//!
//! The auditor checks a pathwise surrogate of the frame bound on every
//! simulated frame: with `L(Q) = 1/2 * sum_n Q_n^2`, penalty `V*C*Is`, and
//! `B2 = N*T^2*(Rmax^2 + Amax^2)/2`,
//!
//! ```text
//! L(Q(t+T)) - L(Q(t)) + V*C*Is(t)
//!     <= B2 + sum_tau sum_n Q_n(t) * (A_n(tau) - offered_n(tau)) + V*C*Is(t)
//! ```
//!
//! where `offered_n(tau)` is the scheduled rate before the max(.,0) clamp.
//! Averaging the two sides over many frames estimates the conditional
//! expectation form of the bound.

use crate::error::{Error, Result};
use crate::trace::FrameTrace;

/// `1/2 * sum_n q_n^2`.
pub fn lyapunov_value(q_bits: &[f64]) -> f64 {
    0.5 * q_bits.iter().map(|&q| q * q).sum::<f64>()
}

// ── Bound constants ─────────────────────────────────────────────────────────

/// The constants entering the one-frame and T-slot queue bounds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundConstants {
    /// `N*T*(Rmax^2 + Amax^2)/2`
    pub b1: f64,
    /// `N*T^2*(Rmax^2 + Amax^2)/2`; always `T * b1`.
    pub b2: f64,
    pub r_max_bits: f64,
    pub a_max_bits: f64,
    pub n_users: usize,
    pub t_frame_slots: usize,
}

pub fn bound_constants(
    n_users: usize,
    t_frame_slots: usize,
    r_max_bits: f64,
    a_max_bits: f64,
) -> BoundConstants {
    let n = n_users as f64;
    let t = t_frame_slots as f64;
    let sq = r_max_bits * r_max_bits + a_max_bits * a_max_bits;
    BoundConstants {
        b1: n * t * sq / 2.0,
        b2: n * t * t * sq / 2.0,
        r_max_bits,
        a_max_bits,
        n_users,
        t_frame_slots,
    }
}

// ── Per-slot inequality ─────────────────────────────────────────────────────

/// Checks the per-slot quadratic inequality
/// `Q'^2 - Q^2 <= R^2 + A^2 - 2Q(R - A)` with `Q' = max(Q - R, 0) + A`.
///
/// Holds for every nonnegative `(Q, R, A)`; a tiny relative slack absorbs
/// floating-point rounding in the squared terms, which otherwise flips the
/// comparison when the true margin is zero (e.g. `A = 0` with `Q >= R`).
pub fn check_slot_inequality(q: f64, offered_rate: f64, arrivals: f64) -> bool {
    let q_next = (q - offered_rate).max(0.0) + arrivals;
    let lhs = q_next * q_next - q * q;
    let rhs = offered_rate * offered_rate + arrivals * arrivals
        - 2.0 * q * (offered_rate - arrivals);
    let guard = 1e-9 * (1.0 + q * q + offered_rate * offered_rate + arrivals * arrivals);
    lhs <= rhs + guard
}

// ── Frame audit ─────────────────────────────────────────────────────────────

/// Realized drift-plus-penalty versus the frame bound, for one frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameAudit {
    pub lyapunov_before: f64,
    pub lyapunov_after: f64,
    /// `lyapunov_after - lyapunov_before`.
    pub drift: f64,
    /// `V * C * Is(t)` for this frame.
    pub penalty: f64,
    /// `drift + penalty`.
    pub lhs: f64,
    /// `B2 + sum_n Q_n(t) * (arrived_n - offered_n) + penalty`.
    pub rhs: f64,
    pub satisfied: bool,
}

/// Audits one complete frame trace against the frame bound.
pub fn audit_frame(
    trace: &FrameTrace,
    v: f64,
    cost_c: f64,
    consts: &BoundConstants,
) -> Result<FrameAudit> {
    let n = consts.n_users;
    if trace.slots.len() != consts.t_frame_slots {
        return Err(Error::Audit(format!(
            "frame {} has {} slots, expected {}",
            trace.frame_index,
            trace.slots.len(),
            consts.t_frame_slots
        )));
    }
    if trace.q_start_bits.len() != n || trace.q_end_bits.len() != n {
        return Err(Error::Audit(format!(
            "frame {} queue snapshots sized {}/{}, expected {}",
            trace.frame_index,
            trace.q_start_bits.len(),
            trace.q_end_bits.len(),
            n
        )));
    }
    for (i, slot) in trace.slots.iter().enumerate() {
        if slot.arrivals_bits.len() != n || slot.offered_bits.len() != n {
            return Err(Error::Audit(format!(
                "frame {} slot {i} records sized {}/{}, expected {}",
                trace.frame_index,
                slot.arrivals_bits.len(),
                slot.offered_bits.len(),
                n
            )));
        }
    }

    let before = lyapunov_value(&trace.q_start_bits);
    let after = lyapunov_value(&trace.q_end_bits);
    let drift = after - before;
    let penalty = if trace.reconfigured { v * cost_c } else { 0.0 };

    // sum_n Q_n(t) * (sum_tau A_n(tau) - sum_tau offered_n(tau))
    let mut weighted = 0.0;
    for u in 0..n {
        let mut arrived = 0.0;
        let mut offered = 0.0;
        for slot in &trace.slots {
            arrived += slot.arrivals_bits[u];
            offered += slot.offered_bits[u];
        }
        weighted += trace.q_start_bits[u] * (arrived - offered);
    }

    let lhs = drift + penalty;
    let rhs = consts.b2 + weighted + penalty;
    let guard = 1e-9 * (1.0 + lhs.abs() + rhs.abs());
    Ok(FrameAudit {
        lyapunov_before: before,
        lyapunov_after: after,
        drift,
        penalty,
        lhs,
        rhs,
        satisfied: lhs <= rhs + guard,
    })
}

// ── Cost/queue tradeoff trend over a sweep ──────────────────────────────────

/// One completed run's summary, as seen by the trend report.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrendPoint {
    pub v: f64,
    pub avg_cost_per_s: f64,
    pub reconfig_rate: f64,
    pub avg_total_queue_bits: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrendReport {
    /// Input points sorted by increasing `v`.
    pub points: Vec<TrendPoint>,
    /// Average cost never increases with `v` (within `rel_tolerance`).
    pub cost_nonincreasing: bool,
    /// Average queue never decreases with `v` (within `rel_tolerance`).
    pub queue_nondecreasing: bool,
    /// Strict versions, no tolerance.
    pub reconfig_rate_strictly_decreasing: bool,
    pub queue_strictly_increasing: bool,
    pub rel_tolerance: f64,
}

/// Orders the sweep by `v` and checks the predicted tradeoff directions:
/// cost shrinking, queues growing. Requires at least three distinct `v`.
pub fn theorem1_report(points: &[TrendPoint], rel_tolerance: f64) -> Result<TrendReport> {
    let mut pts = points.to_vec();
    pts.sort_by(|a, b| a.v.partial_cmp(&b.v).unwrap());
    let distinct = pts.windows(2).all(|w| w[0].v < w[1].v);
    if pts.len() < 3 || !distinct {
        return Err(Error::InvalidInput(format!(
            "trend report needs at least 3 runs at distinct V, got {} point(s)",
            pts.len()
        )));
    }
    let tol = rel_tolerance.max(0.0);
    let mut cost_ok = true;
    let mut queue_ok = true;
    let mut rate_strict = true;
    let mut queue_strict = true;
    for w in pts.windows(2) {
        let (lo, hi) = (&w[0], &w[1]);
        if hi.avg_cost_per_s > lo.avg_cost_per_s * (1.0 + tol) + f64::EPSILON {
            cost_ok = false;
        }
        if hi.avg_total_queue_bits < lo.avg_total_queue_bits * (1.0 - tol) {
            queue_ok = false;
        }
        if hi.reconfig_rate >= lo.reconfig_rate {
            rate_strict = false;
        }
        if hi.avg_total_queue_bits <= lo.avg_total_queue_bits {
            queue_strict = false;
        }
    }
    Ok(TrendReport {
        points: pts,
        cost_nonincreasing: cost_ok,
        queue_nondecreasing: queue_ok,
        reconfig_rate_strictly_decreasing: rate_strict,
        queue_strictly_increasing: queue_strict,
        rel_tolerance: tol,
    })
}

// ── Stability diagnostic ────────────────────────────────────────────────────

/// Outcome of the batch-means slope test on a queue series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StabilityTest {
    /// OLS slope of batch means against batch index, in series units per batch.
    pub slope_per_batch: f64,
    pub t_stat: f64,
    pub dof: usize,
    pub critical_value: f64,
    /// `|t| <= critical`: the slope is statistically indistinguishable from 0
    /// at the 5% two-sided level.
    pub stable: bool,
}

/// Two-sided 5% test of "the series has zero trend", robust to the heavy
/// autocorrelation of queue processes: the series is reduced to `n_batches`
/// batch means and the OLS slope over batch index is t-tested.
pub fn stability_slope_test(series: &[f64], n_batches: usize) -> Result<StabilityTest> {
    if n_batches < 4 || series.len() < 2 * n_batches {
        return Err(Error::InvalidInput(format!(
            "stability test needs >= 4 batches and >= 2 samples per batch \
             (series len {}, batches {})",
            series.len(),
            n_batches
        )));
    }
    let batch_len = series.len() / n_batches;
    // Drop the remainder at the front so the most recent samples all count.
    let start = series.len() - batch_len * n_batches;
    let means: Vec<f64> = (0..n_batches)
        .map(|b| {
            let s = start + b * batch_len;
            series[s..s + batch_len].iter().sum::<f64>() / batch_len as f64
        })
        .collect();

    let n = n_batches as f64;
    let x_mean = (n - 1.0) / 2.0;
    let y_mean = means.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (i, &y) in means.iter().enumerate() {
        let dx = i as f64 - x_mean;
        sxx += dx * dx;
        sxy += dx * (y - y_mean);
    }
    let slope = sxy / sxx;
    let intercept = y_mean - slope * x_mean;
    let mut ss_res = 0.0;
    for (i, &y) in means.iter().enumerate() {
        let fit = intercept + slope * i as f64;
        ss_res += (y - fit) * (y - fit);
    }
    let dof = n_batches - 2;
    let sigma2 = ss_res / dof as f64;
    let se = (sigma2 / sxx).sqrt();
    let t_stat = if se > 0.0 {
        slope / se
    } else if slope == 0.0 {
        0.0
    } else {
        f64::INFINITY
    };
    let critical_value = t_critical_975(dof);
    Ok(StabilityTest {
        slope_per_batch: slope,
        t_stat,
        dof,
        critical_value,
        stable: t_stat.abs() <= critical_value,
    })
}

/// Two-sided 5% Student-t critical values (0.975 quantile) by degrees of
/// freedom, stepped down to the nearest tabulated entry.
fn t_critical_975(dof: usize) -> f64 {
    const TABLE: &[(usize, f64)] = &[
        (1, 12.706),
        (2, 4.303),
        (3, 3.182),
        (4, 2.776),
        (5, 2.571),
        (6, 2.447),
        (7, 2.365),
        (8, 2.306),
        (9, 2.262),
        (10, 2.228),
        (12, 2.179),
        (15, 2.131),
        (20, 2.086),
        (30, 2.042),
        (60, 2.000),
        (120, 1.980),
    ];
    let mut value = 1.96;
    for &(d, t) in TABLE.iter().rev() {
        if dof <= d {
            value = t;
        }
    }
    value
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trace::SlotRecord;
    use proptest::prelude::*;

    #[test]
    fn lyapunov_value_examples() {
        assert_eq!(lyapunov_value(&[0.0, 0.0, 0.0]), 0.0);
        assert_eq!(lyapunov_value(&[2.0]), 2.0);
        assert_eq!(lyapunov_value(&[3.0, 4.0]), 12.5);
    }

    #[test]
    fn bound_constants_examples() {
        let c = bound_constants(1, 1, 1.0, 1.0);
        assert_eq!(c.b1, 1.0);
        assert_eq!(c.b2, 1.0);

        let c = bound_constants(300, 20, 3.5e5, 8e6);
        assert_eq!(c.b2, 20.0 * c.b1);

        let c1 = bound_constants(10, 5, 2.0, 3.0);
        let c2 = bound_constants(10, 10, 2.0, 3.0);
        assert_eq!(c2.b1, 2.0 * c1.b1);
        assert_eq!(c2.b2, 4.0 * c1.b2);
    }

    #[test]
    fn slot_inequality_worked_examples() {
        // Q=10, R=4, A=2: -36 <= -20.
        assert!(check_slot_inequality(10.0, 4.0, 2.0));
        // Q=0, R=5, A=0: 0 <= 25.
        assert!(check_slot_inequality(0.0, 5.0, 0.0));
    }

    #[test]
    fn slot_inequality_holds_on_grid() {
        // 21^3 grid over [0,10]^3 in steps of 0.5.
        for qi in 0..21 {
            for ri in 0..21 {
                for ai in 0..21 {
                    let (q, r, a) = (qi as f64 * 0.5, ri as f64 * 0.5, ai as f64 * 0.5);
                    assert!(
                        check_slot_inequality(q, r, a),
                        "violated at ({q},{r},{a})"
                    );
                }
            }
        }
    }

    #[test]
    fn audit_idle_frame_is_satisfied() {
        let n = 3;
        let t = 4;
        let consts = bound_constants(n, t, 100.0, 50.0);
        let slot = SlotRecord {
            arrivals_bits: vec![0.0; n],
            scheduled: vec![],
            offered_bits: vec![0.0; n],
            served_bits: vec![0.0; n],
        };
        let trace = FrameTrace {
            frame_index: 0,
            q_start_bits: vec![0.0; n],
            q_end_bits: vec![0.0; n],
            slots: vec![slot; t],
            reconfigured: false,
        };
        let audit = audit_frame(&trace, 200.0, 1.0, &consts).unwrap();
        assert_eq!(audit.drift, 0.0);
        assert_eq!(audit.lhs, 0.0);
        assert_eq!(audit.rhs, consts.b2);
        assert!(audit.satisfied);
    }

    #[test]
    fn audit_matches_hand_arithmetic() {
        // Single user, T=1: q 5 -> served 3, arrival 1 -> q' = 3.
        // L before 12.5, after 4.5, drift -8; penalty V*C = 10;
        // B2 = 1*1*(9+1)/2 = 5; rhs = 5 + 5*(1-3) + 10 = 5; lhs = 2.
        let consts = bound_constants(1, 1, 3.0, 1.0);
        let trace = FrameTrace {
            frame_index: 7,
            q_start_bits: vec![5.0],
            q_end_bits: vec![3.0],
            slots: vec![SlotRecord {
                arrivals_bits: vec![1.0],
                scheduled: vec![0],
                offered_bits: vec![3.0],
                served_bits: vec![3.0],
            }],
            reconfigured: true,
        };
        let audit = audit_frame(&trace, 10.0, 1.0, &consts).unwrap();
        assert_eq!(audit.lyapunov_before, 12.5);
        assert_eq!(audit.lyapunov_after, 4.5);
        assert_eq!(audit.drift, -8.0);
        assert_eq!(audit.penalty, 10.0);
        assert_eq!(audit.lhs, 2.0);
        assert_eq!(audit.rhs, 5.0);
        assert!(audit.satisfied);
    }

    #[test]
    fn audit_rejects_incomplete_frame() {
        let consts = bound_constants(1, 2, 3.0, 1.0);
        let trace = FrameTrace {
            frame_index: 0,
            q_start_bits: vec![0.0],
            q_end_bits: vec![0.0],
            slots: vec![],
            reconfigured: false,
        };
        assert!(matches!(
            audit_frame(&trace, 2.0, 1.0, &consts),
            Err(crate::error::Error::Audit(_))
        ));
    }

    #[test]
    fn trend_report_requires_three_points() {
        let p = TrendPoint {
            v: 200.0,
            avg_cost_per_s: 1.0,
            reconfig_rate: 0.9,
            avg_total_queue_bits: 1e6,
        };
        assert!(theorem1_report(&[p, p], 0.0).is_err());
    }

    #[test]
    fn trend_report_flat_cost_is_nonincreasing() {
        // Cost identically zero at all V (the C=0 degenerate grid).
        let mk = |v: f64, q: f64| TrendPoint {
            v,
            avg_cost_per_s: 0.0,
            reconfig_rate: 1.0,
            avg_total_queue_bits: q,
        };
        let report =
            theorem1_report(&[mk(200.0, 1e6), mk(2000.0, 1e6), mk(20000.0, 1e6)], 0.0).unwrap();
        assert!(report.cost_nonincreasing);
        assert!(report.queue_nondecreasing);
        assert!(!report.queue_strictly_increasing);
    }

    #[test]
    fn trend_report_orders_points_by_v() {
        let mk = |v: f64, c: f64, q: f64| TrendPoint {
            v,
            avg_cost_per_s: c,
            reconfig_rate: c,
            avg_total_queue_bits: q,
        };
        let report = theorem1_report(
            &[mk(20000.0, 0.3, 3e8), mk(200.0, 0.9, 1e8), mk(2000.0, 0.6, 2e8)],
            0.0,
        )
        .unwrap();
        assert_eq!(report.points[0].v, 200.0);
        assert!(report.cost_nonincreasing);
        assert!(report.reconfig_rate_strictly_decreasing);
        assert!(report.queue_strictly_increasing);
    }

    #[test]
    fn stability_detects_flat_and_trending_series() {
        // Noisy flat series.
        let flat: Vec<f64> = (0..400)
            .map(|i| 100.0 + 5.0 * ((i * 7919 % 400) as f64 / 400.0 - 0.5))
            .collect();
        let test = stability_slope_test(&flat, 10).unwrap();
        assert!(test.stable, "flat series flagged unstable: {test:?}");

        // Strong linear growth.
        let ramp: Vec<f64> = (0..400).map(|i| i as f64 * 10.0).collect();
        let test = stability_slope_test(&ramp, 10).unwrap();
        assert!(!test.stable, "ramp flagged stable: {test:?}");
    }

    #[test]
    fn stability_rejects_short_series() {
        assert!(stability_slope_test(&[1.0, 2.0, 3.0], 10).is_err());
    }

    proptest! {
        #[test]
        fn slot_inequality_holds_everywhere(
            q in 0.0..1e8f64,
            r in 0.0..1e6f64,
            a in 0.0..1e7f64,
        ) {
            prop_assert!(check_slot_inequality(q, r, a));
        }

        #[test]
        fn b2_is_t_times_b1(
            n in 1usize..1000,
            t in 1usize..200,
            r in 0.0..1e7f64,
            a in 0.0..1e7f64,
        ) {
            let c = bound_constants(n, t, r, a);
            let rel = if c.b2 == 0.0 { 0.0 } else { (c.b2 - t as f64 * c.b1).abs() / c.b2 };
            prop_assert!(rel < 1e-12);
        }
    }
}
