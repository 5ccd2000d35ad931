//! Simulation library for joint user scheduling and dynamic SRS (pilot)
//! allocation in a single-cell Massive MIMO downlink.
//!
//! The system runs on two timescales: users are scheduled and queues updated
//! every slot, while the pilot allocation may only change at frame boundaries
//! `t = lT`, at a signaling cost. The [`scheduler`] module implements the
//! drift-plus-penalty policy (JSSA) that trades that cost against queue
//! growth, plus the cost-free, static, and random benchmarks. The [`lyapunov`]
//! module audits every simulated frame against the analytical drift bound and
//! diagnoses the cost/queue tradeoff across runs.
//!
//! Module map:
//!
//! * [`phy`] — large-scale gains, channel-hardening rates, MMSE validation path
//! * [`traffic`] — Poisson file arrivals per slot
//! * [`queueing`] — backlog state and the per-slot update
//! * [`scheduler`] — max-weight selection, pilot pool, frame decisions
//! * [`lyapunov`] — bound constants, frame audits, trend and stability tests
//! * [`engine`] — the two-timescale simulation loop and sweeps
//! * [`config`] — run parameterization and the flat key-value config format
//! * [`report`] — CSV/summary/manifest emission
//! * [`plot`] — SVG figures from emitted series
//! * [`verify`] — self-contained certification suites (oracle equivalence,
//!   slot inequality, hardening consistency)

pub mod config;
pub mod engine;
pub mod error;
pub mod lyapunov;
pub mod phy;
pub mod plot;
pub mod queueing;
pub mod report;
pub mod scheduler;
pub mod trace;
pub mod traffic;
pub mod verify;

pub use error::{Error, Result};
