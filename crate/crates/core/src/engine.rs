//! The two-timescale simulation loop.
//!
//! One run: drop users uniformly in the cell, realize shadowing and traffic
//! intensities once (users are static), precompute the deterministic-
//! equivalent rate of every user at every admissible set size, then walk the
//! horizon slot by slot. At every frame boundary `t = lT` the configured
//! policy issues a [`FrameDecision`]; inside the frame the scheduled set never
//! changes. Every frame is audited against the drift bound as it completes.
//!
//! Randomness is split into independent, purpose-keyed streams of one seeded
//! generator, so runs at different `V` (or under different policies) see
//! identical user drops and identical arrival sample paths — sweeps compare
//! policies under common random numbers.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;

use crate::config::{Policy, SimConfig};
use crate::error::{Error, Result};
use crate::lyapunov::{audit_frame, bound_constants, FrameAudit};
use crate::phy::{
    draw_small_scale, hardening_rate, mmse_precoders, path_gain, realized_rates, LargeScaleGain,
};
use crate::queueing::QueueState;
use crate::scheduler::{
    jssa_frame_decision, mjssa_frame_decision, random_policy, static_policy, FrameDecision,
    JssaParams, SrsPool, UserId,
};
use crate::trace::{FrameTrace, SlotRecord};
use crate::traffic::{ArrivalSampler, TrafficConfig};

// RNG stream ids within one run's generator.
const STREAM_SCENARIO: u64 = 0;
const STREAM_TRAFFIC: u64 = 1;
const STREAM_SMALL_SCALE: u64 = 2;
const STREAM_POLICY: u64 = 3;

/// One report-window row of the emitted time series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindowRecord {
    pub window_end_s: f64,
    /// Bits served during the window divided by its duration.
    pub throughput_bps: f64,
    /// Total backlog at the window's last slot, bits.
    pub total_queue_bits: f64,
    /// Frames starting inside this window that reconfigured pilots.
    pub reconfig_flag_count: u32,
    /// Cost charged since the start of the run divided by elapsed time.
    pub avg_cost_to_date: f64,
}

/// One frame's decision and audit.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameRecord {
    pub frame_index: u64,
    pub reconfigured: bool,
    pub k_star: usize,
    pub scheduled: Vec<UserId>,
    pub w1: f64,
    pub w2: f64,
    pub cost_charged: f64,
    pub wasted_service_bits: f64,
    pub arrival_truncations: u32,
    pub audit: FrameAudit,
}

/// Everything a completed run reports.
#[derive(Debug, Clone, PartialEq)]
pub struct RunMetrics {
    pub policy: Policy,
    pub v_param: f64,
    pub rng_seed: u64,
    /// Signaling cost charged per second, averaged after warm-up. Equals
    /// `cost_c * reconfig_rate / frame_duration` for the cost-charging policy.
    pub avg_cost_per_s: f64,
    /// Fraction of post-warm-up frames that reconfigured pilots.
    pub reconfig_rate: f64,
    pub avg_throughput_bps: f64,
    /// Mean of window-end total backlogs over post-warm-up windows, bits.
    pub avg_total_queue_bits: f64,
    pub final_total_queue_bits: f64,
    pub total_served_bits: f64,
    pub total_arrived_bits: f64,
    pub wasted_service_bits: f64,
    pub arrival_truncations: u64,
    /// Frames where the policy could not schedule anyone (empty pool).
    pub degenerate_frames: u64,
    /// Frames whose realized drift-plus-penalty satisfied the frame bound.
    pub audited_frames_satisfied: u64,
    pub windows: Vec<WindowRecord>,
    pub frames: Vec<FrameRecord>,
}

impl RunMetrics {
    /// Cumulative average throughput at each window end, derived from the
    /// windowed series.
    pub fn cumulative_avg_throughput_bps(&self) -> Vec<(f64, f64)> {
        let mut served = 0.0;
        let mut prev_end = 0.0;
        self.windows
            .iter()
            .map(|w| {
                served += w.throughput_bps * (w.window_end_s - prev_end);
                prev_end = w.window_end_s;
                (w.window_end_s, served / w.window_end_s)
            })
            .collect()
    }
}

/// The static scenario realized at the start of a run.
struct Scenario {
    gains: Vec<LargeScaleGain>,
    mean_interarrival_s: Vec<f64>,
}

fn realize_scenario(cfg: &SimConfig, rng: &mut impl Rng) -> Result<Scenario> {
    let model = cfg.path_loss_model();
    let half = cfg.cell_side_m / 2.0;
    let shadow = Normal::new(0.0, cfg.channel.shadow_sigma_db)
        .map_err(|e| Error::Numeric(format!("shadowing: {e}")))?;
    let mut gains = Vec::with_capacity(cfg.n_users);
    for _ in 0..cfg.n_users {
        let x = rng.random_range(-half..half);
        let y = rng.random_range(-half..half);
        let s = shadow.sample(rng);
        gains.push(path_gain([x, y], [0.0, 0.0], s, &model)?);
    }
    let (lo, hi) = (
        cfg.traffic.mean_interarrival_min_s,
        cfg.traffic.mean_interarrival_max_s,
    );
    let mean_interarrival_s = (0..cfg.n_users)
        .map(|_| if lo == hi { lo } else { rng.random_range(lo..hi) })
        .collect();
    Ok(Scenario {
        gains,
        mean_interarrival_s,
    })
}

/// Pilot pool seeded with the strongest users (largest beta, ties to the
/// lowest id).
fn initial_pool(gains: &[LargeScaleGain], capacity: usize) -> SrsPool {
    let mut order: Vec<UserId> = (0..gains.len()).collect();
    order.sort_by(|&a, &b| gains[b].beta.total_cmp(&gains[a].beta).then(a.cmp(&b)));
    SrsPool::with_members(order.into_iter().take(capacity), 0, capacity)
}

fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Runs one complete simulation. Deterministic given the configuration.
pub fn run_simulation(cfg: &SimConfig) -> Result<RunMetrics> {
    cfg.validate()?;

    let mut scenario_rng = stream_rng(cfg.rng_seed, STREAM_SCENARIO);
    let mut traffic_rng = stream_rng(cfg.rng_seed, STREAM_TRAFFIC);
    let mut smallscale_rng = stream_rng(cfg.rng_seed, STREAM_SMALL_SCALE);
    let mut policy_rng = stream_rng(cfg.rng_seed, STREAM_POLICY);

    let scenario = realize_scenario(cfg, &mut scenario_rng)?;
    let rate_params = cfg.rate_params();

    // Static users: the per-(user, k) deterministic rates never change.
    let mut rate_table: Vec<Vec<f64>> = Vec::with_capacity(cfg.k_max);
    for k in 1..=cfg.k_max {
        let row: Result<Vec<f64>> = scenario
            .gains
            .iter()
            .map(|g| hardening_rate(g, k, &rate_params))
            .collect();
        rate_table.push(row?);
    }
    let rate_fn = |u: UserId, k: usize| rate_table[k - 1][u];

    let sampler = ArrivalSampler::new(&TrafficConfig {
        mean_interarrival_s: scenario.mean_interarrival_s.clone(),
        file_size_bits: cfg.traffic.file_size_bits,
        slot_s: cfg.slot_s,
        a_max_bits: cfg.traffic.a_max_bits,
    })?;

    let params = JssaParams {
        v: cfg.v_param,
        cost_c: cfg.cost_c,
        t_frame_slots: cfg.t_frame_slots,
        k_max: cfg.k_max,
        weight_unit: cfg.weight_unit,
        pool_update: cfg.pool_update,
    };
    let consts = bound_constants(
        cfg.n_users,
        cfg.t_frame_slots,
        cfg.r_max_bits(),
        cfg.traffic.a_max_bits,
    );

    let mut pool = initial_pool(&scenario.gains, cfg.p_pilots);
    let mut queues = QueueState::new(cfg.n_users);

    let horizon = cfg.horizon_slots;
    let t_frame = cfg.t_frame_slots as u64;
    let n_frames = cfg.n_frames();
    let warmup_slots = cfg.warmup_slots();
    let warmup_frames = warmup_slots / t_frame;
    let window_slots = cfg.report_window_slots;

    let mut frames: Vec<FrameRecord> = Vec::with_capacity(n_frames as usize);
    let mut windows: Vec<WindowRecord> = Vec::new();

    let effective_cost_c = match cfg.policy {
        Policy::MJssa => 0.0,
        _ => cfg.cost_c,
    };

    let mut window_served = 0.0;
    let mut window_start_slot = 0u64;
    let mut window_reconfigs = 0u32;
    let mut reconfigs_to_date = 0u64;

    let mut post_warmup_served = 0.0;
    let mut post_warmup_reconfigs = 0u64;
    let mut wasted_total = 0.0;
    let mut truncations_total = 0u64;
    let mut degenerate_frames = 0u64;
    let mut audits_satisfied = 0u64;

    for frame_index in 0..n_frames {
        let decision: FrameDecision = match cfg.policy {
            Policy::Jssa => {
                jssa_frame_decision(&queues.q_bits, &pool, &params, &rate_fn, frame_index)
            }
            Policy::MJssa => {
                mjssa_frame_decision(&queues.q_bits, &pool, &params, &rate_fn, frame_index)
            }
            Policy::Static => static_policy(&queues.q_bits, &pool, &params, &rate_fn),
            Policy::Random => {
                random_policy(&queues.q_bits, &pool, &params, &rate_fn, &mut policy_rng)
            }
        };
        pool = decision.srs_pool_after.clone();
        if decision.scheduled_set.is_empty() {
            degenerate_frames += 1;
        }
        if decision.reconfigured {
            window_reconfigs += 1;
            reconfigs_to_date += 1;
            if frame_index >= warmup_frames {
                post_warmup_reconfigs += 1;
            }
        }

        let k_star = decision.k_star;
        let q_start = queues.q_bits.clone();
        let mut slots: Vec<SlotRecord> = Vec::with_capacity(cfg.t_frame_slots);
        let mut frame_wasted = 0.0;
        let mut frame_truncations = 0u32;

        for slot_in_frame in 0..t_frame {
            let slot = frame_index * t_frame + slot_in_frame;
            let (arrivals, truncs) = sampler.draw(&mut traffic_rng);
            frame_truncations += truncs;
            truncations_total += truncs as u64;

            // Offered service for the frame's scheduled set.
            let mut offered = vec![0.0; cfg.n_users];
            if k_star > 0 {
                if cfg.phy_validation {
                    let betas: Vec<f64> = decision
                        .scheduled_set
                        .iter()
                        .map(|&u| scenario.gains[u].beta)
                        .collect();
                    let h = draw_small_scale(cfg.m_antennas, &betas, &mut smallscale_rng);
                    let w = mmse_precoders(
                        &h,
                        cfg.p_tot_w / k_star as f64,
                        rate_params.sigma2_w,
                    )?;
                    let rates = realized_rates(&h, &w, &rate_params);
                    for (i, &u) in decision.scheduled_set.iter().enumerate() {
                        offered[u] = rates.0[i];
                    }
                } else {
                    for &u in &decision.scheduled_set {
                        offered[u] = rate_fn(u, k_star);
                    }
                }
            }

            let before = queues.q_bits.clone();
            let outcome = queues.apply_slot(&decision.scheduled_set, &offered, &arrivals.0);
            frame_wasted += outcome.wasted_bits;
            wasted_total += outcome.wasted_bits;
            window_served += outcome.served_bits;
            if slot >= warmup_slots {
                post_warmup_served += outcome.served_bits;
            }

            let served_bits = before
                .iter()
                .zip(&offered)
                .map(|(&q, &r)| q.min(r))
                .collect();
            slots.push(SlotRecord {
                arrivals_bits: arrivals.0,
                scheduled: decision.scheduled_set.clone(),
                offered_bits: offered,
                served_bits,
            });

            // Window bookkeeping at the slot boundary.
            let next = slot + 1;
            if next % window_slots == 0 || next == horizon {
                let elapsed_s = next as f64 * cfg.slot_s;
                let window_len_s = (next - window_start_slot) as f64 * cfg.slot_s;
                windows.push(WindowRecord {
                    window_end_s: elapsed_s,
                    throughput_bps: window_served / window_len_s,
                    total_queue_bits: queues.total_backlog(),
                    reconfig_flag_count: window_reconfigs,
                    avg_cost_to_date: effective_cost_c * reconfigs_to_date as f64 / elapsed_s,
                });
                window_served = 0.0;
                window_reconfigs = 0;
                window_start_slot = next;
            }
        }

        let trace = FrameTrace {
            frame_index,
            q_start_bits: q_start,
            q_end_bits: queues.q_bits.clone(),
            slots,
            reconfigured: decision.reconfigured,
        };
        let audit = audit_frame(&trace, cfg.v_param, cfg.cost_c, &consts)?;
        if audit.satisfied {
            audits_satisfied += 1;
        }
        frames.push(FrameRecord {
            frame_index,
            reconfigured: decision.reconfigured,
            k_star,
            scheduled: decision.scheduled_set,
            w1: decision.w1,
            w2: decision.w2,
            cost_charged: decision.cost_charged,
            wasted_service_bits: frame_wasted,
            arrival_truncations: frame_truncations,
            audit,
        });
    }

    // Post-warm-up aggregates.
    let counted_frames = n_frames.saturating_sub(warmup_frames);
    let reconfig_rate = if counted_frames > 0 {
        post_warmup_reconfigs as f64 / counted_frames as f64
    } else {
        0.0
    };
    let avg_cost_per_s = effective_cost_c * reconfig_rate / cfg.frame_duration_s();
    let measured_slots = horizon.saturating_sub(warmup_slots);
    let avg_throughput_bps = if measured_slots > 0 {
        post_warmup_served / (measured_slots as f64 * cfg.slot_s)
    } else {
        0.0
    };
    let post_windows: Vec<&WindowRecord> = windows
        .iter()
        .filter(|w| w.window_end_s > warmup_slots as f64 * cfg.slot_s)
        .collect();
    let avg_total_queue_bits = if post_windows.is_empty() {
        queues.total_backlog()
    } else {
        post_windows.iter().map(|w| w.total_queue_bits).sum::<f64>() / post_windows.len() as f64
    };

    Ok(RunMetrics {
        policy: cfg.policy,
        v_param: cfg.v_param,
        rng_seed: cfg.rng_seed,
        avg_cost_per_s,
        reconfig_rate,
        avg_throughput_bps,
        avg_total_queue_bits,
        final_total_queue_bits: queues.total_backlog(),
        total_served_bits: queues.cumulative_served_bits.iter().sum(),
        total_arrived_bits: queues.cumulative_arrived_bits.iter().sum(),
        wasted_service_bits: wasted_total,
        arrival_truncations: truncations_total,
        degenerate_frames,
        audited_frames_satisfied: audits_satisfied,
        windows,
        frames,
    })
}

/// Runs the base configuration at every `(v, seed)` combination, in parallel.
/// Results come back ordered by the grid: all seeds of `v_grid[0]` first.
///
/// Seeds drive scenario and arrivals identically across `v` values (common
/// random numbers), so cross-`v` comparisons are paired.
pub fn run_sweep(base: &SimConfig, v_grid: &[f64], seeds: &[u64]) -> Result<Vec<RunMetrics>> {
    if v_grid.is_empty() {
        return Err(Error::InvalidInput("sweep needs at least one V value".into()));
    }
    if seeds.is_empty() {
        return Err(Error::InvalidInput("sweep needs at least one seed".into()));
    }
    let mut combos = Vec::new();
    for &v in v_grid {
        for &seed in seeds {
            let mut cfg = base.clone();
            cfg.v_param = v;
            cfg.rng_seed = seed;
            combos.push(cfg);
        }
    }
    combos.par_iter().map(run_simulation).collect()
}
