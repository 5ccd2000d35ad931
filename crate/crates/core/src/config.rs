//! Run configuration: defaults, validation, and the flat key-value file
//! format.
//!
//! The format is deliberately plain — one `key = value` per line, `#`
//! comments, dotted keys for the traffic and channel sections — so diffs stay
//! readable and parsing needs no dependencies. Unknown keys are rejected, and
//! every diagnostic names the offending key. An empty file yields the default
//! configuration.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::phy::{noise_power_w, LargeScaleGain, PathLossModel, RateParams};
use crate::scheduler::PoolUpdate;

/// Which frame policy drives the run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Policy {
    Jssa,
    MJssa,
    Static,
    Random,
}

impl FromStr for Policy {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "jssa" => Ok(Policy::Jssa),
            "mjssa" => Ok(Policy::MJssa),
            "static" => Ok(Policy::Static),
            "random" => Ok(Policy::Random),
            other => Err(format!(
                "unknown policy {other:?} (expected jssa, mjssa, static, or random)"
            )),
        }
    }
}

impl fmt::Display for Policy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Policy::Jssa => "jssa",
            Policy::MJssa => "mjssa",
            Policy::Static => "static",
            Policy::Random => "random",
        })
    }
}

fn pool_update_from_str(s: &str) -> std::result::Result<PoolUpdate, String> {
    match s {
        "replace-lru" => Ok(PoolUpdate::ReplaceLru),
        "replace-all" => Ok(PoolUpdate::ReplaceAll),
        other => Err(format!(
            "unknown pool update {other:?} (expected replace-lru or replace-all)"
        )),
    }
}

fn pool_update_to_str(p: PoolUpdate) -> &'static str {
    match p {
        PoolUpdate::ReplaceLru => "replace-lru",
        PoolUpdate::ReplaceAll => "replace-all",
    }
}

/// Traffic section (`traffic.*` keys).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrafficSection {
    /// Per-user mean file interarrival times are drawn uniformly from
    /// `[min, max]` seconds at setup.
    pub mean_interarrival_min_s: f64,
    pub mean_interarrival_max_s: f64,
    pub file_size_bits: f64,
    /// Per-slot arrival cap, bits.
    pub a_max_bits: f64,
}

/// Channel section (`channel.*` keys).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelSection {
    pub min_distance_m: f64,
    /// Log-normal shadowing standard deviation, dB.
    pub shadow_sigma_db: f64,
    pub noise_figure_db: f64,
}

/// Complete parameterization of one simulation run.
#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub n_users: usize,
    pub m_antennas: usize,
    /// Largest simultaneously schedulable set (K).
    pub k_max: usize,
    /// Pilot pool capacity (P), with K < P < N.
    pub p_pilots: usize,
    pub bandwidth_hz: f64,
    /// Fraction of resources carrying data; the rest is spent on sounding.
    pub gamma: f64,
    pub p_tot_w: f64,
    pub slot_s: f64,
    pub t_frame_slots: usize,
    /// Drift-plus-penalty tradeoff knob (V > 1).
    pub v_param: f64,
    /// Cost charged per pilot reconfiguration.
    pub cost_c: f64,
    pub policy: Policy,
    pub pool_update: PoolUpdate,
    pub horizon_slots: u64,
    pub rng_seed: u64,
    pub cell_side_m: f64,
    pub report_window_slots: u64,
    /// Serve queues from per-slot MMSE rates instead of the deterministic
    /// hardening rates (validation mode).
    pub phy_validation: bool,
    /// Scale converting the dimensionless penalty `C*V/T` into schedule-weight
    /// units of bits * bits/slot. With the default (2e9) the comparison is
    /// equivalent to weighing queues in Mbit against rates in Mbit/s, with the
    /// penalty doubled; calibrated so the stock V range (hundreds to tens of
    /// thousands) spans the always-reconfigure and rarely-reconfigure regimes.
    pub weight_unit: f64,
    pub traffic: TrafficSection,
    pub channel: ChannelSection,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            n_users: 300,
            m_antennas: 64,
            k_max: 10,
            p_pilots: 60,
            bandwidth_hz: 20e6,
            gamma: 0.8,
            p_tot_w: 1.0,
            slot_s: 1e-3,
            t_frame_slots: 20,
            v_param: 200.0,
            cost_c: 1.0,
            policy: Policy::Jssa,
            pool_update: PoolUpdate::ReplaceLru,
            horizon_slots: 100_000,
            rng_seed: 1,
            cell_side_m: 250.0,
            report_window_slots: 100,
            phy_validation: false,
            weight_unit: 2e9,
            traffic: TrafficSection {
                mean_interarrival_min_s: 0.5,
                mean_interarrival_max_s: 2.0,
                file_size_bits: 1.6e6,
                a_max_bits: 8e6,
            },
            channel: ChannelSection {
                min_distance_m: 10.0,
                shadow_sigma_db: 10.0,
                noise_figure_db: 7.0,
            },
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        fn positive(key: &str, v: f64) -> Result<()> {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::config(
                    key,
                    format!("must be positive and finite, got {v}"),
                ))
            }
        }

        if self.n_users == 0 {
            return Err(Error::config("n_users", "must be at least 1"));
        }
        if self.k_max == 0 {
            return Err(Error::config("k_max", "must be at least 1"));
        }
        if self.k_max >= self.p_pilots {
            return Err(Error::config(
                "p_pilots",
                format!(
                    "pilot count {} must exceed k_max {} (K < P < N)",
                    self.p_pilots, self.k_max
                ),
            ));
        }
        if self.p_pilots >= self.n_users {
            return Err(Error::config(
                "p_pilots",
                format!(
                    "pilot count {} must be below n_users {} (K < P < N)",
                    self.p_pilots, self.n_users
                ),
            ));
        }
        if self.k_max >= self.m_antennas {
            return Err(Error::config(
                "m_antennas",
                format!(
                    "antenna count {} must exceed k_max {}",
                    self.m_antennas, self.k_max
                ),
            ));
        }
        if !(self.v_param > 1.0) {
            return Err(Error::config(
                "v_param",
                format!("must be > 1, got {}", self.v_param),
            ));
        }
        if self.cost_c < 0.0 || !self.cost_c.is_finite() {
            return Err(Error::config("cost_c", "must be nonnegative and finite"));
        }
        if self.t_frame_slots == 0 {
            return Err(Error::config("t_frame_slots", "must be at least 1"));
        }
        if self.horizon_slots % self.t_frame_slots as u64 != 0 {
            return Err(Error::config(
                "horizon_slots",
                format!(
                    "{} is not divisible by t_frame_slots {}",
                    self.horizon_slots, self.t_frame_slots
                ),
            ));
        }
        if self.report_window_slots == 0 {
            return Err(Error::config("report_window_slots", "must be at least 1"));
        }
        if !(self.gamma > 0.0 && self.gamma <= 1.0) {
            return Err(Error::config(
                "gamma",
                format!("must be in (0, 1], got {}", self.gamma),
            ));
        }
        positive("bandwidth_hz", self.bandwidth_hz)?;
        positive("p_tot_w", self.p_tot_w)?;
        positive("slot_s", self.slot_s)?;
        positive("cell_side_m", self.cell_side_m)?;
        positive("weight_unit", self.weight_unit)?;
        positive(
            "traffic.mean_interarrival_min_s",
            self.traffic.mean_interarrival_min_s,
        )?;
        positive(
            "traffic.mean_interarrival_max_s",
            self.traffic.mean_interarrival_max_s,
        )?;
        if self.traffic.mean_interarrival_max_s < self.traffic.mean_interarrival_min_s {
            return Err(Error::config(
                "traffic.mean_interarrival_max_s",
                "must be >= traffic.mean_interarrival_min_s",
            ));
        }
        positive("traffic.file_size_bits", self.traffic.file_size_bits)?;
        if self.traffic.a_max_bits < self.traffic.file_size_bits {
            return Err(Error::config(
                "traffic.a_max_bits",
                "must be at least traffic.file_size_bits",
            ));
        }
        positive("channel.min_distance_m", self.channel.min_distance_m)?;
        if self.channel.shadow_sigma_db < 0.0 || !self.channel.shadow_sigma_db.is_finite() {
            return Err(Error::config(
                "channel.shadow_sigma_db",
                "must be nonnegative and finite",
            ));
        }
        if !self.channel.noise_figure_db.is_finite() {
            return Err(Error::config("channel.noise_figure_db", "must be finite"));
        }
        Ok(())
    }

    // ── Derived quantities ──────────────────────────────────────────────────

    pub fn path_loss_model(&self) -> PathLossModel {
        PathLossModel {
            min_distance_m: self.channel.min_distance_m,
            ..PathLossModel::default()
        }
    }

    pub fn sigma2_w(&self) -> f64 {
        noise_power_w(self.bandwidth_hz, self.channel.noise_figure_db)
    }

    /// Rate cap: the deterministic-equivalent rate of a zero-shadowing user at
    /// the minimum distance, served alone (`k = 1`). Every produced rate is
    /// clipped here so the bound constants stay finite.
    pub fn r_max_bits(&self) -> f64 {
        let model = self.path_loss_model();
        let beta = 10f64.powf(model.pathloss_db(self.channel.min_distance_m) / 10.0);
        let sinr = self.p_tot_w * (self.m_antennas as f64 - 1.0) * beta / self.sigma2_w();
        self.slot_s * self.bandwidth_hz * self.gamma * (1.0 + sinr).log2()
    }

    pub fn rate_params(&self) -> RateParams {
        RateParams {
            m_antennas: self.m_antennas,
            bandwidth_hz: self.bandwidth_hz,
            gamma: self.gamma,
            p_tot_w: self.p_tot_w,
            sigma2_w: self.sigma2_w(),
            slot_s: self.slot_s,
            r_max_bits: self.r_max_bits(),
        }
    }

    pub fn frame_duration_s(&self) -> f64 {
        self.t_frame_slots as f64 * self.slot_s
    }

    pub fn n_frames(&self) -> u64 {
        self.horizon_slots / self.t_frame_slots as u64
    }

    /// First 10% of the horizon, rounded down to a frame boundary; excluded
    /// from averaged metrics.
    pub fn warmup_slots(&self) -> u64 {
        let t = self.t_frame_slots as u64;
        self.horizon_slots / 10 / t * t
    }

    /// Capped deterministic-equivalent rate for one gain; convenience wrapper.
    pub fn capped_hardening_rate(&self, gain: &LargeScaleGain, k: usize) -> Result<f64> {
        crate::phy::hardening_rate(gain, k, &self.rate_params())
    }
}

// ── Parsing and canonical writing ───────────────────────────────────────────

fn parse_value<T: FromStr>(key: &str, raw: &str) -> Result<T>
where
    T::Err: fmt::Display,
{
    raw.parse()
        .map_err(|e| Error::config(key, format!("bad value {raw:?}: {e}")))
}

fn parse_bool(key: &str, raw: &str) -> Result<bool> {
    match raw {
        "true" => Ok(true),
        "false" => Ok(false),
        other => Err(Error::config(
            key,
            format!("bad value {other:?}: expected true or false"),
        )),
    }
}

/// Parses configuration text on top of the defaults and validates the result.
pub fn parse_config_str(text: &str) -> Result<SimConfig> {
    let mut cfg = SimConfig::default();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(Error::config(
                format!("line {}", lineno + 1),
                format!("expected `key = value`, got {line:?}"),
            ));
        };
        let key = key.trim();
        let value = value.trim();
        match key {
            "n_users" => cfg.n_users = parse_value(key, value)?,
            "m_antennas" => cfg.m_antennas = parse_value(key, value)?,
            "k_max" => cfg.k_max = parse_value(key, value)?,
            "p_pilots" => cfg.p_pilots = parse_value(key, value)?,
            "bandwidth_hz" => cfg.bandwidth_hz = parse_value(key, value)?,
            "gamma" => cfg.gamma = parse_value(key, value)?,
            "p_tot_w" => cfg.p_tot_w = parse_value(key, value)?,
            "slot_s" => cfg.slot_s = parse_value(key, value)?,
            "t_frame_slots" => cfg.t_frame_slots = parse_value(key, value)?,
            "v_param" => cfg.v_param = parse_value(key, value)?,
            "cost_c" => cfg.cost_c = parse_value(key, value)?,
            "policy" => {
                cfg.policy = value.parse().map_err(|e| Error::config(key, e))?;
            }
            "pool_update" => {
                cfg.pool_update =
                    pool_update_from_str(value).map_err(|e| Error::config(key, e))?;
            }
            "horizon_slots" => cfg.horizon_slots = parse_value(key, value)?,
            "rng_seed" => cfg.rng_seed = parse_value(key, value)?,
            "cell_side_m" => cfg.cell_side_m = parse_value(key, value)?,
            "report_window_slots" => cfg.report_window_slots = parse_value(key, value)?,
            "phy_validation" => cfg.phy_validation = parse_bool(key, value)?,
            "weight_unit" => cfg.weight_unit = parse_value(key, value)?,
            "traffic.mean_interarrival_min_s" => {
                cfg.traffic.mean_interarrival_min_s = parse_value(key, value)?
            }
            "traffic.mean_interarrival_max_s" => {
                cfg.traffic.mean_interarrival_max_s = parse_value(key, value)?
            }
            "traffic.file_size_bits" => cfg.traffic.file_size_bits = parse_value(key, value)?,
            "traffic.a_max_bits" => cfg.traffic.a_max_bits = parse_value(key, value)?,
            "channel.min_distance_m" => cfg.channel.min_distance_m = parse_value(key, value)?,
            "channel.shadow_sigma_db" => {
                cfg.channel.shadow_sigma_db = parse_value(key, value)?
            }
            "channel.noise_figure_db" => {
                cfg.channel.noise_figure_db = parse_value(key, value)?
            }
            unknown => {
                return Err(Error::config(unknown, "unknown key"));
            }
        }
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Reads and parses a configuration file.
pub fn parse_config(path: impl AsRef<Path>) -> Result<SimConfig> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_config_str(&text)
}

/// Canonical text form: every key, full precision. Parsing it reproduces the
/// config exactly.
pub fn write_config_str(cfg: &SimConfig) -> String {
    let mut s = String::new();
    let mut kv = |k: &str, v: String| {
        s.push_str(k);
        s.push_str(" = ");
        s.push_str(&v);
        s.push('\n');
    };
    kv("n_users", cfg.n_users.to_string());
    kv("m_antennas", cfg.m_antennas.to_string());
    kv("k_max", cfg.k_max.to_string());
    kv("p_pilots", cfg.p_pilots.to_string());
    kv("bandwidth_hz", cfg.bandwidth_hz.to_string());
    kv("gamma", cfg.gamma.to_string());
    kv("p_tot_w", cfg.p_tot_w.to_string());
    kv("slot_s", cfg.slot_s.to_string());
    kv("t_frame_slots", cfg.t_frame_slots.to_string());
    kv("v_param", cfg.v_param.to_string());
    kv("cost_c", cfg.cost_c.to_string());
    kv("policy", cfg.policy.to_string());
    kv("pool_update", pool_update_to_str(cfg.pool_update).to_string());
    kv("horizon_slots", cfg.horizon_slots.to_string());
    kv("rng_seed", cfg.rng_seed.to_string());
    kv("cell_side_m", cfg.cell_side_m.to_string());
    kv("report_window_slots", cfg.report_window_slots.to_string());
    kv("phy_validation", cfg.phy_validation.to_string());
    kv("weight_unit", cfg.weight_unit.to_string());
    kv(
        "traffic.mean_interarrival_min_s",
        cfg.traffic.mean_interarrival_min_s.to_string(),
    );
    kv(
        "traffic.mean_interarrival_max_s",
        cfg.traffic.mean_interarrival_max_s.to_string(),
    );
    kv("traffic.file_size_bits", cfg.traffic.file_size_bits.to_string());
    kv("traffic.a_max_bits", cfg.traffic.a_max_bits.to_string());
    kv("channel.min_distance_m", cfg.channel.min_distance_m.to_string());
    kv(
        "channel.shadow_sigma_db",
        cfg.channel.shadow_sigma_db.to_string(),
    );
    kv(
        "channel.noise_figure_db",
        cfg.channel.noise_figure_db.to_string(),
    );
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_yields_defaults() {
        let cfg = parse_config_str("").unwrap();
        assert_eq!(cfg, SimConfig::default());
        assert_eq!(cfg.n_users, 300);
        assert_eq!(cfg.m_antennas, 64);
        assert_eq!(cfg.k_max, 10);
        assert_eq!(cfg.p_pilots, 60);
        assert_eq!(cfg.bandwidth_hz, 20e6);
        assert_eq!(cfg.gamma, 0.8);
        assert_eq!(cfg.p_tot_w, 1.0);
        assert_eq!(cfg.slot_s, 1e-3);
        assert_eq!(cfg.t_frame_slots, 20);
    }

    #[test]
    fn comments_and_blank_lines_are_ignored() {
        let cfg = parse_config_str("# a comment\n\nn_users = 80\np_pilots=30\n").unwrap();
        assert_eq!(cfg.n_users, 80);
        assert_eq!(cfg.p_pilots, 30);
    }

    #[test]
    fn rejects_pilots_not_above_k_max() {
        let err = parse_config_str("k_max = 10\np_pilots = 5\n").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("p_pilots"), "{msg}");
    }

    #[test]
    fn rejects_v_at_most_one() {
        let err = parse_config_str("v_param = 0.5").unwrap_err();
        assert!(err.to_string().contains("v_param"));
    }

    #[test]
    fn rejects_unknown_key() {
        let err = parse_config_str("n_user = 10").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("n_user") && msg.contains("unknown key"), "{msg}");
    }

    #[test]
    fn rejects_malformed_line() {
        let err = parse_config_str("n_users 10").unwrap_err();
        assert!(err.to_string().contains("line 1"));
    }

    #[test]
    fn rejects_bad_number_naming_the_key() {
        let err = parse_config_str("gamma = high").unwrap_err();
        assert!(err.to_string().contains("gamma"));
    }

    #[test]
    fn rejects_horizon_not_aligned_to_frames() {
        let err = parse_config_str("horizon_slots = 1001").unwrap_err();
        assert!(err.to_string().contains("horizon_slots"));
    }

    #[test]
    fn roundtrip_is_identity() {
        let mut cfg = SimConfig::default();
        cfg.v_param = 1234.5678;
        cfg.policy = Policy::MJssa;
        cfg.pool_update = PoolUpdate::ReplaceAll;
        cfg.phy_validation = true;
        cfg.traffic.file_size_bits = 3.2e6;
        cfg.traffic.a_max_bits = 3.2e7;
        cfg.channel.shadow_sigma_db = 6.25;
        let text = write_config_str(&cfg);
        let reparsed = parse_config_str(&text).unwrap();
        assert_eq!(reparsed, cfg);
    }

    #[test]
    fn missing_file_is_an_io_error() {
        let err = parse_config(Path::new("/definitely/not/here.cfg")).unwrap_err();
        assert!(matches!(err, Error::Io { .. }));
    }

    #[test]
    fn r_max_is_the_k1_min_distance_rate() {
        let cfg = SimConfig::default();
        // beta at 10 m, zero shadowing
        let beta = 10f64.powf((-148.1 - 37.6 * (10.0f64 / 1000.0).log10()) / 10.0);
        let sinr = 1.0 * 63.0 * beta / cfg.sigma2_w();
        let expected = 1e-3 * 20e6 * 0.8 * (1.0 + sinr).log2();
        assert!((cfg.r_max_bits() - expected).abs() / expected < 1e-12);
    }

    #[test]
    fn warmup_is_ten_percent_on_frame_boundaries() {
        let cfg = SimConfig::default();
        assert_eq!(cfg.warmup_slots(), 10_000);
        let cfg = parse_config_str("horizon_slots = 1060\nt_frame_slots = 20\n").unwrap();
        // 10% = 106, floored to the frame boundary 100.
        assert_eq!(cfg.warmup_slots(), 100);
    }
}
