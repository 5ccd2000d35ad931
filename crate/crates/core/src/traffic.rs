//! Per-slot downlink traffic: FTP-style file arrivals on a Poisson process.
//!
//! Each user receives whole files of a fixed size; the number of files landing
//! in a slot is Poisson with mean `slot_s / mean_interarrival_s`. Per-slot
//! arrivals are truncated at `a_max_bits` so the arrival process has a hard
//! upper bound (the queueing bounds require one); truncations are counted and
//! surfaced as a run diagnostic.

use rand::Rng;
use rand_distr::{Distribution, Poisson};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct TrafficConfig {
    /// Mean time between file arrivals, seconds, one entry per user.
    /// `f64::INFINITY` means the user receives no traffic.
    pub mean_interarrival_s: Vec<f64>,
    /// Size of one file, bits.
    pub file_size_bits: f64,
    pub slot_s: f64,
    /// Hard per-slot cap on arriving bits.
    pub a_max_bits: f64,
}

impl TrafficConfig {
    pub fn validate(&self) -> Result<()> {
        if self.file_size_bits <= 0.0 {
            return Err(Error::config("traffic.file_size_bits", "must be positive"));
        }
        if self.slot_s <= 0.0 {
            return Err(Error::config("slot_s", "must be positive"));
        }
        if self.a_max_bits < self.file_size_bits {
            return Err(Error::config(
                "traffic.a_max_bits",
                "must be at least one file size",
            ));
        }
        if self
            .mean_interarrival_s
            .iter()
            .any(|&m| m <= 0.0 || m.is_nan())
        {
            return Err(Error::config(
                "traffic.mean_interarrival_s",
                "all entries must be positive",
            ));
        }
        Ok(())
    }

    /// Expected file count per slot for each user.
    pub fn slot_rates(&self) -> Vec<f64> {
        self.mean_interarrival_s
            .iter()
            .map(|&m| if m.is_finite() { self.slot_s / m } else { 0.0 })
            .collect()
    }
}

/// Bits arriving in one slot, one entry per user.
#[derive(Debug, Clone, PartialEq)]
pub struct ArrivalVector(pub Vec<f64>);

/// Reusable sampler over all users; build once per run.
pub struct ArrivalSampler {
    dists: Vec<Option<Poisson<f64>>>,
    file_size_bits: f64,
    a_max_bits: f64,
}

impl ArrivalSampler {
    pub fn new(cfg: &TrafficConfig) -> Result<Self> {
        cfg.validate()?;
        let dists = cfg
            .slot_rates()
            .iter()
            .map(|&lambda| {
                if lambda > 0.0 {
                    // lambda validated positive and finite
                    Some(Poisson::new(lambda).expect("positive finite rate"))
                } else {
                    None
                }
            })
            .collect();
        Ok(Self {
            dists,
            file_size_bits: cfg.file_size_bits,
            a_max_bits: cfg.a_max_bits,
        })
    }

    /// One slot of arrivals for every user. Returns the vector and the number
    /// of users whose arrivals hit the `a_max_bits` truncation this slot.
    pub fn draw(&self, rng: &mut impl Rng) -> (ArrivalVector, u32) {
        let mut truncations = 0u32;
        let bits = self
            .dists
            .iter()
            .map(|dist| match dist {
                None => 0.0,
                Some(d) => {
                    let files = d.sample(rng);
                    let raw = files * self.file_size_bits;
                    if raw > self.a_max_bits {
                        truncations += 1;
                        self.a_max_bits
                    } else {
                        raw
                    }
                }
            })
            .collect();
        (ArrivalVector(bits), truncations)
    }
}

/// One-shot form of [`ArrivalSampler::draw`] for callers that do not keep a
/// sampler around.
pub fn draw_arrivals(cfg: &TrafficConfig, rng: &mut impl Rng) -> Result<(ArrivalVector, u32)> {
    Ok(ArrivalSampler::new(cfg)?.draw(rng))
}
