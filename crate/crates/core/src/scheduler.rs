//! Joint user scheduling and SRS (pilot) allocation.
//!
//! Every frame boundary `t = lT` the policy weighs two candidate schedules:
//!
//! * `S1` — the max-weight set over *all* users, the best the cell could do
//!   if pilots were free to move;
//! * `S2` — the max-weight set restricted to the current pilot pool, the best
//!   available without touching the RRC configuration.
//!
//! The weight of a size-`k` set is `sum Q_n(t) * R_n(t)` with rates evaluated
//! at the even power split `P_tot/k`. The joint policy reconfigures exactly
//! when `W1 - C*V/T > W2`: the drift gain from the unrestricted schedule must
//! beat the amortized signaling penalty. The chosen set is then scheduled
//! unchanged for every slot of the frame.
//!
//! Because the per-user weights `Q_n * R_n(k)` do not depend on which other
//! users share the set, the max-weight set of size `k` is simply the top-`k`
//! users by weight; [`exhaustive_oracle`] certifies this against brute-force
//! subset enumeration on small instances.
//!
//! Ties are broken deterministically everywhere: lowest user id within a set
//! size, smallest `k` across set sizes.

use std::collections::{BTreeMap, BTreeSet};

use rand::Rng;

use crate::error::{Error, Result};

pub type UserId = usize;

// ── Pilot pool ──────────────────────────────────────────────────────────────

/// How the pilot pool absorbs a reconfiguration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PoolUpdate {
    /// New pool = scheduled set plus previous members, evicting the least
    /// recently assigned beyond capacity.
    ReplaceLru,
    /// New pool = exactly the scheduled set.
    ReplaceAll,
}

/// The set of users currently holding a sounding pilot, at most `capacity`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SrsPool {
    /// member id -> frame index at which it was last (re)assigned.
    members: BTreeMap<UserId, u64>,
    capacity: usize,
}

impl SrsPool {
    pub fn new(capacity: usize) -> Self {
        Self {
            members: BTreeMap::new(),
            capacity,
        }
    }

    /// Pool seeded with `ids`, all stamped `assigned_frame`.
    pub fn with_members(
        ids: impl IntoIterator<Item = UserId>,
        assigned_frame: u64,
        capacity: usize,
    ) -> Self {
        let members: BTreeMap<_, _> = ids.into_iter().map(|id| (id, assigned_frame)).collect();
        assert!(
            members.len() <= capacity,
            "pool seeded with {} members, capacity {}",
            members.len(),
            capacity
        );
        Self { members, capacity }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, id: UserId) -> bool {
        self.members.contains_key(&id)
    }

    pub fn last_assigned(&self, id: UserId) -> Option<u64> {
        self.members.get(&id).copied()
    }

    /// Member ids in ascending order.
    pub fn member_ids(&self) -> Vec<UserId> {
        self.members.keys().copied().collect()
    }

    /// The pool after assigning pilots to `new_set` at frame `frame_index`.
    pub fn reconfigured(&self, new_set: &[UserId], frame_index: u64, mode: PoolUpdate) -> SrsPool {
        match mode {
            PoolUpdate::ReplaceAll => {
                SrsPool::with_members(new_set.iter().copied(), frame_index, self.capacity)
            }
            PoolUpdate::ReplaceLru => {
                let mut members = self.members.clone();
                let protected: BTreeSet<UserId> = new_set.iter().copied().collect();
                for &id in new_set {
                    members.insert(id, frame_index);
                }
                while members.len() > self.capacity {
                    // Stalest assignment goes first; among equally stale
                    // members the largest id goes first. Members of the new
                    // set are never evicted.
                    let victim = members
                        .iter()
                        .filter(|(id, _)| !protected.contains(id))
                        .min_by_key(|(&id, &frame)| (frame, std::cmp::Reverse(id)))
                        .map(|(&id, _)| id)
                        .expect("pool update always has an evictable member");
                    members.remove(&victim);
                }
                SrsPool {
                    members,
                    capacity: self.capacity,
                }
            }
        }
    }
}

// ── Max-weight selection ────────────────────────────────────────────────────

/// A candidate schedule: the chosen users, the set size the rates were
/// evaluated at (power split `P_tot/k`), and the achieved weight.
#[derive(Debug, Clone, PartialEq)]
pub struct CandidateSelection {
    /// Chosen users, ascending id order.
    pub set: Vec<UserId>,
    /// Set size `k` at which `rate_fn` was evaluated.
    pub k: usize,
    /// `sum_{n in set} q[n] * rate_fn(n, k)`.
    pub weight: f64,
}

impl CandidateSelection {
    fn empty(k: usize) -> Self {
        Self {
            set: Vec::new(),
            k,
            weight: 0.0,
        }
    }
}

/// Weight of a set, summed in ascending id order so that independently
/// computed selections of the same set compare bit-identically.
fn weight_of(
    sorted_set: &[UserId],
    q_bits: &[f64],
    k: usize,
    rate_fn: &impl Fn(UserId, usize) -> f64,
) -> f64 {
    sorted_set.iter().map(|&u| q_bits[u] * rate_fn(u, k)).sum()
}

/// The max-weight set of size `k` from `pool`: the `k` users with the largest
/// `q[n] * rate_fn(n, k)`, ties to the lowest id. If the pool is smaller than
/// `k` the whole pool is returned (still evaluated at `k`).
pub fn best_set_for_k(
    q_bits: &[f64],
    pool: &[UserId],
    k: usize,
    rate_fn: &impl Fn(UserId, usize) -> f64,
) -> CandidateSelection {
    if pool.is_empty() || k == 0 {
        return CandidateSelection::empty(k.max(1));
    }
    let mut ranked: Vec<(UserId, f64)> = pool
        .iter()
        .map(|&u| (u, q_bits[u] * rate_fn(u, k)))
        .collect();
    ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    let mut set: Vec<UserId> = ranked.iter().take(k).map(|&(u, _)| u).collect();
    set.sort_unstable();
    let weight = weight_of(&set, q_bits, k, rate_fn);
    CandidateSelection { set, k, weight }
}

/// The best selection over all set sizes `1..=k_max`; ties across sizes go to
/// the smaller size.
pub fn best_over_k(
    q_bits: &[f64],
    pool: &[UserId],
    k_max: usize,
    rate_fn: &impl Fn(UserId, usize) -> f64,
) -> CandidateSelection {
    assert!(k_max >= 1, "k_max must be at least 1");
    let mut best: Option<CandidateSelection> = None;
    for k in 1..=k_max {
        let cand = best_set_for_k(q_bits, pool, k, rate_fn);
        match &best {
            Some(b) if cand.weight <= b.weight => {}
            _ => best = Some(cand),
        }
    }
    best.unwrap()
}

/// Brute-force maximizer of the same objective, for certification only:
/// enumerates every nonempty subset of size `<= k_max` and keeps the first
/// maximum in (size, lexicographic) enumeration order — the same tie-break
/// [`best_over_k`] applies. Refuses instances too large to enumerate.
pub fn exhaustive_oracle(
    q_bits: &[f64],
    pool: &[UserId],
    k_max: usize,
    rate_fn: &impl Fn(UserId, usize) -> f64,
) -> Result<CandidateSelection> {
    if pool.len() > 16 || k_max > 6 {
        return Err(Error::InvalidInput(format!(
            "exhaustive oracle is limited to |pool| <= 16 and k_max <= 6, got {} and {k_max}",
            pool.len()
        )));
    }
    if k_max == 0 {
        return Err(Error::InvalidInput("k_max must be at least 1".into()));
    }
    let mut sorted_pool = pool.to_vec();
    sorted_pool.sort_unstable();

    let mut best = CandidateSelection::empty(1);
    let mut subset: Vec<UserId> = Vec::new();
    for size in 1..=k_max.min(sorted_pool.len()) {
        enumerate_subsets(&sorted_pool, size, 0, &mut subset, &mut |s| {
            let weight = weight_of(s, q_bits, size, rate_fn);
            if weight > best.weight {
                best = CandidateSelection {
                    set: s.to_vec(),
                    k: size,
                    weight,
                };
            }
        });
    }
    Ok(best)
}

fn enumerate_subsets(
    pool: &[UserId],
    size: usize,
    start: usize,
    current: &mut Vec<UserId>,
    visit: &mut impl FnMut(&[UserId]),
) {
    if current.len() == size {
        visit(current);
        return;
    }
    let remaining = size - current.len();
    for i in start..=pool.len().saturating_sub(remaining) {
        current.push(pool[i]);
        enumerate_subsets(pool, size, i + 1, current, visit);
        current.pop();
    }
}

// ── Frame decisions ─────────────────────────────────────────────────────────

/// Tunables of the joint policy for one run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JssaParams {
    /// Tradeoff knob: larger `v` buys fewer reconfigurations with longer queues.
    pub v: f64,
    /// Signaling cost charged per reconfiguration.
    pub cost_c: f64,
    pub t_frame_slots: usize,
    /// Largest schedulable set size.
    pub k_max: usize,
    /// Converts the dimensionless penalty `C*V/T` into weight units
    /// (bits * bits/slot). 1.0 keeps weights and penalty commensurate as-is.
    pub weight_unit: f64,
    pub pool_update: PoolUpdate,
}

impl JssaParams {
    fn threshold(&self) -> f64 {
        self.cost_c * self.v * self.weight_unit / self.t_frame_slots as f64
    }
}

/// The output of a policy at a frame boundary.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameDecision {
    /// Whether the pilot allocation was reconfigured (and, for the joint
    /// policy, the cost charged).
    pub reconfigured: bool,
    pub srs_pool_after: SrsPool,
    /// Users scheduled for every slot of the frame, ascending id order.
    pub scheduled_set: Vec<UserId>,
    /// `scheduled_set.len()`; zero only on degenerate (empty-pool) frames.
    pub k_star: usize,
    /// Weight of the best unrestricted selection.
    pub w1: f64,
    /// Weight of the best pool-restricted selection.
    pub w2: f64,
    pub cost_charged: f64,
}

fn all_users(q_bits: &[f64]) -> Vec<UserId> {
    (0..q_bits.len()).collect()
}

/// The joint scheduling and SRS allocation decision for the frame starting at
/// `frame_index`:
///
/// 1. find the max-weight selection `S1` over all users and `S2` over the
///    current pool, each optimized over set sizes `1..=k_max`;
/// 2. reconfigure iff `W1 - C*V/T > W2` (penalty converted to weight units);
/// 3. on reconfiguration schedule `S1` and fold it into the pool, otherwise
///    schedule `S2` and leave the pool untouched.
pub fn jssa_frame_decision(
    q_bits: &[f64],
    pool: &SrsPool,
    params: &JssaParams,
    rate_fn: &impl Fn(UserId, usize) -> f64,
    frame_index: u64,
) -> FrameDecision {
    debug_assert!(params.v > 1.0, "the frame bound requires V > 1");
    let s1 = best_over_k(q_bits, &all_users(q_bits), params.k_max, rate_fn);
    let s2 = best_over_k(q_bits, &pool.member_ids(), params.k_max, rate_fn);
    let reconfigure = s1.weight - params.threshold() > s2.weight;
    if reconfigure {
        let srs_pool_after = pool.reconfigured(&s1.set, frame_index, params.pool_update);
        FrameDecision {
            reconfigured: true,
            srs_pool_after,
            k_star: s1.set.len(),
            scheduled_set: s1.set,
            w1: s1.weight,
            w2: s2.weight,
            cost_charged: params.cost_c,
        }
    } else {
        FrameDecision {
            reconfigured: false,
            srs_pool_after: pool.clone(),
            k_star: s2.set.len(),
            scheduled_set: s2.set,
            w1: s1.weight,
            w2: s2.weight,
            cost_charged: 0.0,
        }
    }
}

/// Cost-free benchmark: reconfigures to the unrestricted max-weight set at
/// every frame. The reconfigured flag is still recorded for reporting, but no
/// cost is ever charged.
pub fn mjssa_frame_decision(
    q_bits: &[f64],
    pool: &SrsPool,
    params: &JssaParams,
    rate_fn: &impl Fn(UserId, usize) -> f64,
    frame_index: u64,
) -> FrameDecision {
    let s1 = best_over_k(q_bits, &all_users(q_bits), params.k_max, rate_fn);
    let s2 = best_over_k(q_bits, &pool.member_ids(), params.k_max, rate_fn);
    let srs_pool_after = pool.reconfigured(&s1.set, frame_index, params.pool_update);
    FrameDecision {
        reconfigured: true,
        srs_pool_after,
        k_star: s1.set.len(),
        scheduled_set: s1.set,
        w1: s1.weight,
        w2: s2.weight,
        cost_charged: 0.0,
    }
}

/// Baseline that never touches the pilot allocation: schedules the best set
/// within the (initial) pool, charges nothing.
pub fn static_policy(
    q_bits: &[f64],
    pool: &SrsPool,
    params: &JssaParams,
    rate_fn: &impl Fn(UserId, usize) -> f64,
) -> FrameDecision {
    let s1 = best_over_k(q_bits, &all_users(q_bits), params.k_max, rate_fn);
    let s2 = best_over_k(q_bits, &pool.member_ids(), params.k_max, rate_fn);
    FrameDecision {
        reconfigured: false,
        srs_pool_after: pool.clone(),
        k_star: s2.set.len(),
        scheduled_set: s2.set,
        w1: s1.weight,
        w2: s2.weight,
        cost_charged: 0.0,
    }
}

/// Baseline that schedules `k_max` pool members uniformly at random, ignoring
/// queues and rates entirely.
pub fn random_policy(
    q_bits: &[f64],
    pool: &SrsPool,
    params: &JssaParams,
    rate_fn: &impl Fn(UserId, usize) -> f64,
    rng: &mut impl Rng,
) -> FrameDecision {
    let members = pool.member_ids();
    let amount = params.k_max.min(members.len());
    let mut set: Vec<UserId> = rand::seq::index::sample(rng, members.len(), amount)
        .into_iter()
        .map(|i| members[i])
        .collect();
    set.sort_unstable();
    let s1 = best_over_k(q_bits, &all_users(q_bits), params.k_max, rate_fn);
    let s2 = best_over_k(q_bits, &members, params.k_max, rate_fn);
    FrameDecision {
        reconfigured: false,
        srs_pool_after: pool.clone(),
        k_star: set.len(),
        scheduled_set: set,
        w1: s1.weight,
        w2: s2.weight,
        cost_charged: 0.0,
    }
}

/// The per-slot schedule: the frame's set, unchanged for every slot in it.
pub fn schedule_slot(decision: &FrameDecision) -> &[UserId] {
    &decision.scheduled_set
}
