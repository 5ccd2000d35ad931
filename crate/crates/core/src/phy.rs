//! Physical-layer model for the single-cell Massive MIMO downlink.
//!
//! Two rate paths coexist on purpose:
//!
//! * [`hardening_rate`] — the deterministic equivalent the scheduler reasons
//!   on. With many antennas and Rayleigh fading, per-slot rate fluctuations
//!   collapse and the rate becomes a function of large-scale fading alone
//!   (channel hardening). We use the zero-forcing-style form
//!   `SINR = (P_tot/k) * (M - k) * beta / sigma^2`.
//! * [`realized_rates`] — the instantaneous MMSE-precoded rate, computed from
//!   an explicit small-scale channel draw. This path exists to validate how
//!   well the hardening approximation holds; the simulator can optionally
//!   serve queues from it instead of the deterministic rates.
//!
//! All rates are produced in bits per slot with bandwidth, the data fraction
//! `gamma`, and the slot duration already applied, and are capped at
//! `r_max_bits` so that the queueing analysis constants stay finite.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

// ── Large-scale fading ──────────────────────────────────────────────────────

/// Distance-based path loss with log-normal shadowing, in dB.
///
/// `pathloss_db(d) = ref_loss_db - exponent_db_per_decade * log10(d / ref_distance_m)`,
/// with `d` clamped below at `min_distance_m`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathLossModel {
    /// Path loss at the reference distance, dB (negative: it is a gain).
    pub ref_loss_db: f64,
    /// Loss slope per decade of distance, dB.
    pub exponent_db_per_decade: f64,
    /// Reference distance for `ref_loss_db`, meters.
    pub ref_distance_m: f64,
    /// Distances below this are clamped up, meters.
    pub min_distance_m: f64,
}

impl Default for PathLossModel {
    fn default() -> Self {
        // Urban macro NLOS constants: -148.1 dB at 1 km, exponent 3.76.
        Self {
            ref_loss_db: -148.1,
            exponent_db_per_decade: 37.6,
            ref_distance_m: 1000.0,
            min_distance_m: 10.0,
        }
    }
}

impl PathLossModel {
    pub fn pathloss_db(&self, distance_m: f64) -> f64 {
        let d = distance_m.max(self.min_distance_m);
        self.ref_loss_db - self.exponent_db_per_decade * (d / self.ref_distance_m).log10()
    }
}

/// Large-scale power gain of one user's link.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LargeScaleGain {
    /// Linear power gain, `10^((pathloss_db + shadow_db)/10)`.
    pub beta: f64,
    /// Distance used for the path loss (after clamping), meters.
    pub distance_m: f64,
    /// Shadowing realization, dB.
    pub shadow_db: f64,
}

/// Large-scale gain from geometry plus a shadowing realization.
///
/// Deterministic given its inputs; the shadowing draw happens elsewhere.
pub fn path_gain(
    user_pos_m: [f64; 2],
    bs_pos_m: [f64; 2],
    shadow_db: f64,
    model: &PathLossModel,
) -> Result<LargeScaleGain> {
    if !user_pos_m.iter().chain(bs_pos_m.iter()).all(|v| v.is_finite()) {
        return Err(Error::config("position", "coordinates must be finite"));
    }
    if !shadow_db.is_finite() {
        return Err(Error::config("shadow_db", "must be finite"));
    }
    let dx = user_pos_m[0] - bs_pos_m[0];
    let dy = user_pos_m[1] - bs_pos_m[1];
    let distance_m = dx.hypot(dy).max(model.min_distance_m);
    let beta = 10f64.powf((model.pathloss_db(distance_m) + shadow_db) / 10.0);
    Ok(LargeScaleGain {
        beta,
        distance_m,
        shadow_db,
    })
}

/// Receiver noise power in watts: thermal floor at -174 dBm/Hz over the
/// system bandwidth, plus the receiver noise figure.
pub fn noise_power_w(bandwidth_hz: f64, noise_figure_db: f64) -> f64 {
    let dbm = -174.0 + 10.0 * bandwidth_hz.log10() + noise_figure_db;
    10f64.powf((dbm - 30.0) / 10.0)
}

// ── Rates ───────────────────────────────────────────────────────────────────

/// Everything a rate computation needs besides the channel itself.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateParams {
    pub m_antennas: usize,
    pub bandwidth_hz: f64,
    /// Fraction of time/frequency resources carrying data (the rest is sounding).
    pub gamma: f64,
    pub p_tot_w: f64,
    pub sigma2_w: f64,
    pub slot_s: f64,
    /// Hard cap applied to every produced rate, bits per slot.
    pub r_max_bits: f64,
}

impl RateParams {
    fn bits(&self, sinr: f64) -> f64 {
        let r = self.slot_s * self.bandwidth_hz * self.gamma * (1.0 + sinr).log2();
        r.min(self.r_max_bits).max(0.0)
    }
}

/// Deterministic-equivalent rate for a user inside a scheduled set of size `k`,
/// bits per slot. Power is split evenly, `p_n = P_tot / k`.
///
/// Strictly decreasing in `k` for fixed `beta` (before the cap), strictly
/// increasing in `beta` for fixed `k`.
pub fn hardening_rate(gain: &LargeScaleGain, k: usize, params: &RateParams) -> Result<f64> {
    if k == 0 {
        return Err(Error::config("k", "scheduled set size must be at least 1"));
    }
    if k >= params.m_antennas {
        return Err(Error::config(
            "k",
            format!(
                "scheduled set size {k} must be below the antenna count {}",
                params.m_antennas
            ),
        ));
    }
    let kf = k as f64;
    let sinr =
        (params.p_tot_w / kf) * (params.m_antennas as f64 - kf) * gain.beta / params.sigma2_w;
    Ok(params.bits(sinr))
}

// ── Small-scale fading and precoding ────────────────────────────────────────

/// Complex channel matrix, `m` antennas by `k` users, column-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelMatrix {
    pub m: usize,
    /// One column per user; column `n` has per-entry variance `beta_n`.
    pub cols: Vec<Vec<Complex64>>,
}

impl ChannelMatrix {
    pub fn k(&self) -> usize {
        self.cols.len()
    }
}

/// i.i.d. Rayleigh draw: entry of column `n` is circularly-symmetric complex
/// Gaussian with variance `betas[n]`.
pub fn draw_small_scale(m: usize, betas: &[f64], rng: &mut impl Rng) -> ChannelMatrix {
    let cols = betas
        .iter()
        .map(|&beta| {
            let scale = (beta / 2.0).sqrt();
            (0..m)
                .map(|_| {
                    let re: f64 = rng.sample(StandardNormal);
                    let im: f64 = rng.sample(StandardNormal);
                    Complex64::new(scale * re, scale * im)
                })
                .collect()
        })
        .collect();
    ChannelMatrix { m, cols }
}

/// Unit-norm precoding vectors, one column per scheduled user.
#[derive(Debug, Clone, PartialEq)]
pub struct Precoders {
    pub cols: Vec<Vec<Complex64>>,
}

/// Regularized MMSE precoders: columns of `H (H^H H + a I)^-1` with
/// `a = sigma2 / p` (equivalently `sigma2 * k / P_tot`), rescaled to unit norm.
///
/// A user whose channel column is identically zero keeps a zero precoder;
/// its realized rate comes out as zero downstream.
pub fn mmse_precoders(
    h: &ChannelMatrix,
    per_user_power_w: f64,
    sigma2_w: f64,
) -> Result<Precoders> {
    let k = h.k();
    if k == 0 || k > h.m {
        return Err(Error::config(
            "k",
            format!("need 1 <= k <= M, got k={k}, M={}", h.m),
        ));
    }
    if per_user_power_w <= 0.0 || sigma2_w <= 0.0 {
        return Err(Error::config("power", "powers must be positive"));
    }
    let alpha = sigma2_w / per_user_power_w;

    // Gram matrix H^H H + alpha I, k x k, then invert in place.
    let mut a = vec![vec![Complex64::new(0.0, 0.0); k]; k];
    for i in 0..k {
        for j in 0..k {
            let mut acc = Complex64::new(0.0, 0.0);
            for r in 0..h.m {
                acc += h.cols[i][r].conj() * h.cols[j][r];
            }
            a[i][j] = acc;
        }
        a[i][i] += alpha;
    }
    let inv = invert_complex(&mut a)?;

    // W_raw = H * inv, then normalize each column.
    let mut cols = Vec::with_capacity(k);
    for j in 0..k {
        let mut col = vec![Complex64::new(0.0, 0.0); h.m];
        for (i, hcol) in h.cols.iter().enumerate() {
            let c = inv[i][j];
            for (r, entry) in hcol.iter().enumerate() {
                col[r] += entry * c;
            }
        }
        let norm = col.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm > 0.0 {
            for z in &mut col {
                *z /= norm;
            }
        }
        cols.push(col);
    }
    Ok(Precoders { cols })
}

/// Gauss-Jordan inverse with partial pivoting. Consumes `a`.
fn invert_complex(a: &mut [Vec<Complex64>]) -> Result<Vec<Vec<Complex64>>> {
    let n = a.len();
    let mut inv: Vec<Vec<Complex64>> = (0..n)
        .map(|i| {
            let mut row = vec![Complex64::new(0.0, 0.0); n];
            row[i] = Complex64::new(1.0, 0.0);
            row
        })
        .collect();
    for col in 0..n {
        let pivot_row = (col..n)
            .max_by(|&r1, &r2| {
                a[r1][col]
                    .norm_sqr()
                    .partial_cmp(&a[r2][col].norm_sqr())
                    .unwrap()
            })
            .unwrap();
        if a[pivot_row][col].norm_sqr() == 0.0 {
            return Err(Error::Numeric(
                "singular matrix in MMSE precoder computation".into(),
            ));
        }
        a.swap(col, pivot_row);
        inv.swap(col, pivot_row);
        let pivot = a[col][col];
        for j in 0..n {
            a[col][j] /= pivot;
            inv[col][j] /= pivot;
        }
        for r in 0..n {
            if r == col {
                continue;
            }
            let factor = a[r][col];
            if factor.norm_sqr() == 0.0 {
                continue;
            }
            for j in 0..n {
                let ac = a[col][j];
                let ic = inv[col][j];
                a[r][j] -= factor * ac;
                inv[r][j] -= factor * ic;
            }
        }
    }
    Ok(inv)
}

// ── Realized rates ──────────────────────────────────────────────────────────

/// Per-user rates in bits per slot, one entry per scheduled user.
#[derive(Debug, Clone, PartialEq)]
pub struct RateVector(pub Vec<f64>);

impl RateVector {
    pub fn bits_per_slot(&self) -> &[f64] {
        &self.0
    }
}

/// Squared link gains `|h_n^H w_m|^2`: row = receiving user, column = beam.
pub fn link_gains(h: &ChannelMatrix, w: &Precoders) -> Vec<Vec<f64>> {
    let k = h.k();
    let mut g = vec![vec![0.0; k]; k];
    for n in 0..k {
        for m in 0..k {
            let mut acc = Complex64::new(0.0, 0.0);
            for r in 0..h.m {
                acc += h.cols[n][r].conj() * w.cols[m][r];
            }
            g[n][m] = acc.norm_sqr();
        }
    }
    g
}

/// SINR and rate per user from precomputed link gains. Power splits evenly
/// over the `k = gains.len()` scheduled users; beam `m != n` interferes with
/// user `n`.
pub fn rates_from_link_gains(gains: &[Vec<f64>], params: &RateParams) -> RateVector {
    let k = gains.len();
    let p = params.p_tot_w / k as f64;
    let rates = (0..k)
        .map(|n| {
            let signal = p * gains[n][n];
            let interference: f64 = (0..k).filter(|&m| m != n).map(|m| p * gains[n][m]).sum();
            params.bits(signal / (interference + params.sigma2_w))
        })
        .collect();
    RateVector(rates)
}

/// Instantaneous MMSE-precoded rates for one channel draw, bits per slot.
pub fn realized_rates(h: &ChannelMatrix, w: &Precoders, params: &RateParams) -> RateVector {
    rates_from_link_gains(&link_gains(h, w), params)
}
