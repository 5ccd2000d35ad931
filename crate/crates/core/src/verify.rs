//! Self-contained certification suites.
//!
//! These are the independent checks behind the `verify` CLI subcommand and
//! the acceptance tests: the greedy max-weight selection against brute-force
//! subset enumeration, the per-slot quadratic inequality over a grid and
//! random triples, and the hardening approximation against Monte-Carlo MMSE
//! rates.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::lyapunov::check_slot_inequality;
use crate::phy::{
    draw_small_scale, hardening_rate, mmse_precoders, realized_rates, LargeScaleGain, RateParams,
};
use crate::scheduler::{best_over_k, exhaustive_oracle, UserId};

/// Outcome of one suite: how many trials ran and how many failed.
#[derive(Debug, Clone, PartialEq)]
pub struct SuiteReport {
    pub name: &'static str,
    pub trials: u64,
    pub failures: u64,
    pub detail: String,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

/// Random-state equivalence of [`best_over_k`] and [`exhaustive_oracle`]:
/// queues uniform in `[0, 1e7]` bits, large-scale gains spanning 40 dB,
/// rates from the deterministic-equivalent model. Any mismatch in the chosen
/// set, its size, or its weight (bit-exact) counts as a failure.
pub fn oracle_equivalence_suite(
    n_users: usize,
    k_max: usize,
    trials: u64,
    seed: u64,
) -> SuiteReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let params = RateParams {
        m_antennas: 64,
        bandwidth_hz: 20e6,
        gamma: 0.8,
        p_tot_w: 1.0,
        sigma2_w: crate::phy::noise_power_w(20e6, 7.0),
        slot_s: 1e-3,
        r_max_bits: 4e5,
    };
    let pool: Vec<UserId> = (0..n_users).collect();
    let mut failures = 0u64;
    let mut first_failure = String::new();
    for trial in 0..trials {
        // 40 dB beta span around the cell-edge regime.
        let gains: Vec<LargeScaleGain> = (0..n_users)
            .map(|_| LargeScaleGain {
                beta: 10f64.powf(rng.random_range(-13.0..-9.0)),
                distance_m: 0.0,
                shadow_db: 0.0,
            })
            .collect();
        let rates: Vec<Vec<f64>> = (1..=k_max)
            .map(|k| {
                gains
                    .iter()
                    .map(|g| hardening_rate(g, k, &params).unwrap())
                    .collect()
            })
            .collect();
        let rate_fn = |u: UserId, k: usize| rates[k - 1][u];
        let q: Vec<f64> = (0..n_users).map(|_| rng.random_range(0.0..1e7)).collect();

        let fast = best_over_k(&q, &pool, k_max, &rate_fn);
        let slow = exhaustive_oracle(&q, &pool, k_max, &rate_fn)
            .expect("suite instance within oracle guard");
        if fast.set != slow.set || fast.k != slow.k || fast.weight.to_bits() != slow.weight.to_bits()
        {
            failures += 1;
            if first_failure.is_empty() {
                first_failure = format!(
                    "trial {trial}: greedy {:?} (k={}, w={}) vs oracle {:?} (k={}, w={})",
                    fast.set, fast.k, fast.weight, slow.set, slow.k, slow.weight
                );
            }
        }
    }
    SuiteReport {
        name: "oracle-equivalence",
        trials,
        failures,
        detail: if failures == 0 {
            format!("{trials} random states, N={n_users}, K={k_max}: selections identical")
        } else {
            first_failure
        },
    }
}

/// The per-slot quadratic inequality over an even grid on `[0, hi]^3` plus
/// uniformly random triples.
pub fn slot_inequality_suite(
    grid_points_per_axis: usize,
    grid_hi: f64,
    random_trials: u64,
    seed: u64,
) -> SuiteReport {
    let mut failures = 0u64;
    let mut first_failure = String::new();
    let mut trials = 0u64;
    let n = grid_points_per_axis;
    let step = grid_hi / (n.saturating_sub(1)).max(1) as f64;
    for qi in 0..n {
        for ri in 0..n {
            for ai in 0..n {
                let (q, r, a) = (qi as f64 * step, ri as f64 * step, ai as f64 * step);
                trials += 1;
                if !check_slot_inequality(q, r, a) {
                    failures += 1;
                    if first_failure.is_empty() {
                        first_failure = format!("grid violation at ({q}, {r}, {a})");
                    }
                }
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..random_trials {
        let q = rng.random_range(0.0..grid_hi);
        let r = rng.random_range(0.0..grid_hi);
        let a = rng.random_range(0.0..grid_hi);
        trials += 1;
        if !check_slot_inequality(q, r, a) {
            failures += 1;
            if first_failure.is_empty() {
                first_failure = format!("random violation at ({q}, {r}, {a})");
            }
        }
    }
    SuiteReport {
        name: "slot-inequality",
        trials,
        failures,
        detail: if failures == 0 {
            format!(
                "{}^3 grid over [0, {grid_hi}] plus {random_trials} random triples: no violations",
                n
            )
        } else {
            first_failure
        },
    }
}

/// Monte-Carlo comparison of realized MMSE rates against the deterministic
/// hardening rates.
#[derive(Debug, Clone, PartialEq)]
pub struct HardeningReport {
    /// Median of `|realized - hardening| / hardening` over all draws and
    /// users, at each antenna count.
    pub median_rel_gap: Vec<(usize, f64)>,
    /// Coefficient of variation of the realized rate at each antenna count.
    pub rate_cv: Vec<(usize, f64)>,
}

/// Draws `draws` channels for `k` users with gains spanning the cell, at each
/// antenna count in `m_values`, and compares realized MMSE rates to the
/// hardening rates.
pub fn hardening_consistency_suite(
    m_values: &[usize],
    k: usize,
    draws: usize,
    seed: u64,
) -> HardeningReport {
    let mut median_rel_gap = Vec::new();
    let mut rate_cv = Vec::new();
    for &m in m_values {
        let params = RateParams {
            m_antennas: m,
            bandwidth_hz: 20e6,
            gamma: 0.8,
            p_tot_w: 1.0,
            sigma2_w: crate::phy::noise_power_w(20e6, 7.0),
            slot_s: 1e-3,
            r_max_bits: f64::INFINITY,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        // One fixed set of k users spread over a 30 dB range.
        let gains: Vec<LargeScaleGain> = (0..k)
            .map(|i| LargeScaleGain {
                beta: 10f64.powf(-12.5 + 3.0 * i as f64 / k as f64),
                distance_m: 0.0,
                shadow_db: 0.0,
            })
            .collect();
        let betas: Vec<f64> = gains.iter().map(|g| g.beta).collect();
        let hard: Vec<f64> = gains
            .iter()
            .map(|g| hardening_rate(g, k, &params).unwrap())
            .collect();

        let mut gaps = Vec::with_capacity(draws * k);
        let mut sums = vec![0.0; k];
        let mut sq_sums = vec![0.0; k];
        for _ in 0..draws {
            let h = draw_small_scale(m, &betas, &mut rng);
            let w = mmse_precoders(&h, params.p_tot_w / k as f64, params.sigma2_w)
                .expect("random Gaussian channel is well conditioned");
            let realized = realized_rates(&h, &w, &params);
            for (u, &r) in realized.0.iter().enumerate() {
                gaps.push((r - hard[u]).abs() / hard[u]);
                sums[u] += r;
                sq_sums[u] += r * r;
            }
        }
        gaps.sort_by(f64::total_cmp);
        median_rel_gap.push((m, gaps[gaps.len() / 2]));

        // Average the per-user CVs.
        let cv = (0..k)
            .map(|u| {
                let mean = sums[u] / draws as f64;
                let var = (sq_sums[u] / draws as f64 - mean * mean).max(0.0);
                var.sqrt() / mean
            })
            .sum::<f64>()
            / k as f64;
        rate_cv.push((m, cv));
    }
    HardeningReport {
        median_rel_gap,
        rate_cv,
    }
}
