//! Partial repair: which broadcast allocations work, how few broadcasts
//! suffice, and functional repair by random linear broadcasts.
//!
//! Node `i` keeps `|P_i|` of its `t` packets and broadcasts `r_i` linear
//! combinations of them. An allocation `r` repairs every sick node iff for
//! every set `D` of `k` nodes
//!
//! ```text
//! sum_{i not in D} r_i  >=  k t - sum_{i in D} |P_i|
//! ```
//!
//! A node never sends more than `|P_i|` packets: further combinations of the
//! same survivors add no rank.

use itertools::Itertools;
use num_rational::Ratio;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::code::CachingSystem;
use crate::error::{Error, Result};
use crate::galois::{Elem, FieldMatrix};
use crate::{seeded_rng, SCHEMA_VERSION};

/// Retry budget for [`functional_repair`].
pub const REPAIR_ATTEMPTS: usize = 64;

/// Search-space guard of [`gamma_min_bruteforce`].
pub const BRUTEFORCE_MAX_N: usize = 6;
pub const BRUTEFORCE_MAX_T: usize = 4;

/// Upper limit on allocation vectors examined by [`allocate_transmissions`].
pub const ALLOCATION_SEARCH_LIMIT: u64 = 5_000_000;

/// Surviving packets per node after an erasure event.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "PatternDescriptor", into = "PatternDescriptor")]
pub struct ErasurePattern {
    k: usize,
    t: usize,
    surviving: Vec<Vec<usize>>,
}

impl ErasurePattern {
    /// Validates indices (sorted, distinct, `< t`) and that at least `k t`
    /// packets survive; with fewer the file itself is lost.
    pub fn new(k: usize, t: usize, mut surviving: Vec<Vec<usize>>) -> Result<Self> {
        if k == 0 || t == 0 || surviving.len() <= k {
            return Err(Error::InvalidPattern(format!(
                "need n > k >= 1 and t >= 1 (n={}, k={k}, t={t})",
                surviving.len()
            )));
        }
        for (i, s) in surviving.iter_mut().enumerate() {
            s.sort_unstable();
            if s.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::InvalidPattern(format!(
                    "node {i} lists a packet twice"
                )));
            }
            if let Some(&bad) = s.iter().find(|&&j| j >= t) {
                return Err(Error::InvalidPattern(format!(
                    "node {i}: packet index {bad} >= t = {t}"
                )));
            }
        }
        let total: usize = surviving.iter().map(Vec::len).sum();
        if total < k * t {
            return Err(Error::InvalidPattern(format!(
                "only {total} packets survive, the file needs {}",
                k * t
            )));
        }
        Ok(Self { k, t, surviving })
    }

    /// Pattern where node `i` keeps its first `counts[i]` packets.
    pub fn from_counts(k: usize, t: usize, counts: &[usize]) -> Result<Self> {
        Self::new(k, t, counts.iter().map(|&c| (0..c).collect()).collect())
    }

    /// No erasures.
    pub fn intact(n: usize, k: usize, t: usize) -> Result<Self> {
        Self::from_counts(k, t, &vec![t; n])
    }

    /// Every packet erased independently with probability `erase_prob`,
    /// resampled until the file stays recoverable.
    pub fn random<R: Rng + ?Sized>(
        n: usize,
        k: usize,
        t: usize,
        erase_prob: f64,
        rng: &mut R,
    ) -> Result<Self> {
        if !(0.0..=1.0).contains(&erase_prob) {
            return Err(Error::InvalidPattern(format!(
                "erasure probability {erase_prob} outside [0, 1]"
            )));
        }
        const TRIES: usize = 10_000;
        for _ in 0..TRIES {
            let surviving: Vec<Vec<usize>> = (0..n)
                .map(|_| (0..t).filter(|_| !rng.gen_bool(erase_prob)).collect())
                .collect();
            if surviving.iter().map(Vec::len).sum::<usize>() >= k * t {
                return Self::new(k, t, surviving);
            }
        }
        Err(Error::InvalidPattern(format!(
            "no recoverable pattern in {TRIES} draws at erasure probability {erase_prob}"
        )))
    }

    pub fn n(&self) -> usize {
        self.surviving.len()
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn surviving(&self, node: usize) -> &[usize] {
        &self.surviving[node]
    }

    pub fn erased(&self, node: usize) -> Vec<usize> {
        (0..self.t)
            .filter(|j| !self.surviving[node].contains(j))
            .collect()
    }

    /// `|P_i|` for every node.
    pub fn counts(&self) -> Vec<usize> {
        self.surviving.iter().map(Vec::len).collect()
    }

    pub fn total_surviving(&self) -> usize {
        self.surviving.iter().map(Vec::len).sum()
    }

    pub fn is_healthy(&self, node: usize) -> bool {
        self.surviving[node].len() == self.t
    }

    /// Number of healthy nodes, `n_h`.
    pub fn healthy_count(&self) -> usize {
        (0..self.n()).filter(|&i| self.is_healthy(i)).count()
    }

    pub fn is_intact(&self) -> bool {
        self.healthy_count() == self.n()
    }

    /// Coding vectors of the surviving packets of `node`.
    pub fn surviving_block(&self, system: &CachingSystem, node: usize) -> FieldMatrix {
        let t = self.t;
        let idx: Vec<usize> = self.surviving[node].iter().map(|&j| node * t + j).collect();
        system.coding_matrix().select_rows(&idx)
    }

    fn check_against(&self, system: &CachingSystem) -> Result<()> {
        let c = system.config();
        if (c.n, c.k, c.t) != (self.n(), self.k, self.t) {
            return Err(Error::Dimension(format!(
                "pattern for (n,k,t) = ({},{},{}) applied to ({},{},{})",
                self.n(),
                self.k,
                self.t,
                c.n,
                c.k,
                c.t
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PatternDescriptor {
    pub schema_version: u32,
    pub k: usize,
    pub t: usize,
    pub surviving: Vec<Vec<usize>>,
}

impl From<ErasurePattern> for PatternDescriptor {
    fn from(p: ErasurePattern) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            k: p.k,
            t: p.t,
            surviving: p.surviving,
        }
    }
}

impl TryFrom<PatternDescriptor> for ErasurePattern {
    type Error = Error;

    fn try_from(d: PatternDescriptor) -> Result<Self> {
        crate::check_schema_version(d.schema_version)?;
        Self::new(d.k, d.t, d.surviving)
    }
}

/// One broadcast packet: who sent it and its coding vector over the source.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Broadcast {
    pub sender: usize,
    pub vector: Vec<Elem>,
}

impl Broadcast {
    /// Combination of the sender's surviving packets with the given
    /// coefficients (one per surviving packet, in index order).
    pub fn from_coefficients(
        system: &CachingSystem,
        pattern: &ErasurePattern,
        sender: usize,
        coefficients: &[Elem],
    ) -> Result<Self> {
        if sender >= pattern.n() {
            return Err(Error::Dimension(format!("sender {sender} out of range")));
        }
        let block = pattern.surviving_block(system, sender);
        let vector = block.vec_mul(coefficients)?;
        Ok(Self { sender, vector })
    }
}

/// Broadcast counts per node and, once a repair has run, the broadcasts.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "PlanDescriptor", into = "PlanDescriptor")]
pub struct RepairPlan {
    r: Vec<usize>,
    broadcasts: Vec<Broadcast>,
}

impl RepairPlan {
    pub fn from_counts(r: Vec<usize>) -> Self {
        Self {
            r,
            broadcasts: Vec::new(),
        }
    }

    /// Plan made of explicit broadcasts; counts are derived from senders.
    pub fn with_broadcasts(n: usize, broadcasts: Vec<Broadcast>) -> Result<Self> {
        let mut r = vec![0; n];
        for b in &broadcasts {
            *r.get_mut(b.sender)
                .ok_or_else(|| Error::Dimension(format!("sender {} out of range", b.sender)))? += 1;
        }
        Ok(Self { r, broadcasts })
    }

    pub fn counts(&self) -> &[usize] {
        &self.r
    }

    /// Total number of broadcasts, `Γ`.
    pub fn gamma(&self) -> usize {
        self.r.iter().sum()
    }

    pub fn broadcasts(&self) -> &[Broadcast] {
        &self.broadcasts
    }

    pub fn has_broadcasts(&self) -> bool {
        self.gamma() == 0 || !self.broadcasts.is_empty()
    }

    /// The `Γ x M` matrix of broadcast coding vectors.
    pub fn broadcast_matrix(&self, system: &CachingSystem) -> FieldMatrix {
        let rows: Vec<&[Elem]> = self
            .broadcasts
            .iter()
            .map(|b| b.vector.as_slice())
            .collect();
        FieldMatrix::from_rows(system.field(), system.config().m(), &rows)
            .expect("broadcast vectors have length M")
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PlanDescriptor {
    pub schema_version: u32,
    pub r: Vec<usize>,
    pub gamma: usize,
    #[serde(default)]
    pub senders: Vec<usize>,
    #[serde(default)]
    pub broadcast_matrix: Vec<Vec<u64>>,
}

impl From<RepairPlan> for PlanDescriptor {
    fn from(p: RepairPlan) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            gamma: p.gamma(),
            senders: p.broadcasts.iter().map(|b| b.sender).collect(),
            broadcast_matrix: p.broadcasts.into_iter().map(|b| b.vector).collect(),
            r: p.r,
        }
    }
}

impl TryFrom<PlanDescriptor> for RepairPlan {
    type Error = Error;

    fn try_from(d: PlanDescriptor) -> Result<Self> {
        crate::check_schema_version(d.schema_version)?;
        if d.gamma != d.r.iter().sum::<usize>() {
            return Err(Error::InvalidConfig(format!(
                "gamma {} differs from the sum of r",
                d.gamma
            )));
        }
        if d.broadcast_matrix.is_empty() {
            return Ok(Self::from_counts(d.r));
        }
        if d.senders.len() != d.broadcast_matrix.len() {
            return Err(Error::InvalidConfig(
                "senders and broadcast_matrix differ in length".into(),
            ));
        }
        let broadcasts = d
            .senders
            .into_iter()
            .zip(d.broadcast_matrix)
            .map(|(sender, vector)| Broadcast { sender, vector })
            .collect();
        let plan = Self::with_broadcasts(d.r.len(), broadcasts)?;
        if plan.r != d.r {
            return Err(Error::InvalidConfig(
                "r does not match the broadcast senders".into(),
            ));
        }
        Ok(plan)
    }
}

/// Whether the allocation `r` satisfies the cut condition for every
/// `k`-subset of nodes.
pub fn check_feasible(pattern: &ErasurePattern, r: &[usize]) -> bool {
    if r.len() != pattern.n() {
        return false;
    }
    let counts = pattern.counts();
    feasible_counts(pattern.k, pattern.t, &counts, r)
}

fn feasible_counts(k: usize, t: usize, counts: &[usize], r: &[usize]) -> bool {
    let n = counts.len();
    let total_r: usize = r.iter().sum();
    let need = k * t;
    (0..n).combinations(k).all(|d| {
        let inside_p: usize = d.iter().map(|&i| counts[i]).sum();
        let inside_r: usize = d.iter().map(|&i| r[i]).sum();
        total_r - inside_r + inside_p >= need
    })
}

/// Binomial coefficient with `C(a, b) = 0` whenever `a < b` or either is negative.
pub fn binomial(a: i64, b: i64) -> i128 {
    if a < 0 || b < 0 || a < b {
        return 0;
    }
    let b = b.min(a - b);
    let mut acc: i128 = 1;
    for i in 0..b {
        acc = acc * (a - i) as i128 / (i + 1) as i128;
    }
    acc
}

/// Closed-form minimum broadcast budget, as an exact rational.
///
/// With `n_h` healthy nodes and `Σ = sum |P_i|`:
///
/// ```text
/// n_h > k:   min{ k t, [C(n,k) k t - (C(n-1,k-1) - C(n_h-1,k-1)) Σ] / (C(n-1,k) - C(n_h-1,k)) }
/// otherwise: min{ k t, (n k t - k Σ) / (n - k) }
/// ```
///
/// Returns 0 when nothing is erased.
pub fn gamma_min_formula(pattern: &ErasurePattern) -> Ratio<i128> {
    gamma_formula_counts(pattern.n(), pattern.k, pattern.t, &pattern.counts())
}

fn gamma_formula_counts(n: usize, k: usize, t: usize, counts: &[usize]) -> Ratio<i128> {
    let nh = counts.iter().filter(|&&c| c == t).count() as i64;
    if nh == n as i64 {
        return Ratio::from_integer(0);
    }
    let (n, k) = (n as i64, k as i64);
    let kt = (k * t as i64) as i128;
    let sum: i128 = counts.iter().map(|&c| c as i128).sum();
    let value = if nh > k {
        let denom = binomial(n - 1, k) - binomial(nh - 1, k);
        let numer = binomial(n, k) * kt - (binomial(n - 1, k - 1) - binomial(nh - 1, k - 1)) * sum;
        Ratio::new(numer, denom)
    } else {
        Ratio::new(n as i128 * kt - k as i128 * sum, (n - k) as i128)
    };
    value.min(Ratio::from_integer(kt))
}

/// Integer value of the closed form, rounded up since packets are indivisible.
pub fn gamma_min_formula_ceil(pattern: &ErasurePattern) -> usize {
    let v = gamma_min_formula(pattern).ceil().to_integer();
    v.max(0) as usize
}

/// Exhaustive minimum of `sum r_i` over `0 <= r_i <= |P_i|` subject to
/// [`check_feasible`]. Limited to `n <= 6`, `t <= 4`.
pub fn gamma_min_bruteforce(pattern: &ErasurePattern) -> Result<usize> {
    if pattern.n() > BRUTEFORCE_MAX_N || pattern.t > BRUTEFORCE_MAX_T {
        return Err(Error::SearchSpaceTooLarge(format!(
            "exhaustive search limited to n <= {BRUTEFORCE_MAX_N}, t <= {BRUTEFORCE_MAX_T}"
        )));
    }
    let counts = pattern.counts();
    let mut best = pattern.k * pattern.t;
    for_each_allocation(&counts, |r| {
        let s: usize = r.iter().sum();
        if s < best && feasible_counts(pattern.k, pattern.t, &counts, r) {
            best = s;
        }
    });
    Ok(best)
}

fn for_each_allocation(caps: &[usize], mut visit: impl FnMut(&[usize])) {
    let mut r = vec![0; caps.len()];
    loop {
        visit(&r);
        let mut i = 0;
        loop {
            if i == caps.len() {
                return;
            }
            if r[i] < caps[i] {
                r[i] += 1;
                break;
            }
            r[i] = 0;
            i += 1;
        }
    }
}

/// A minimum-budget allocation.
///
/// Among all optimal vectors the one picked loads healthy nodes first, then
/// lower node indices: vectors are compared lexicographically after ordering
/// nodes as (healthy by index, sick by index), and the greatest wins.
pub fn allocate_transmissions(pattern: &ErasurePattern) -> Result<RepairPlan> {
    let counts = pattern.counts();
    let space: u64 = counts
        .iter()
        .try_fold(1u64, |acc, &c| acc.checked_mul(c as u64 + 1))
        .unwrap_or(u64::MAX);
    if space > ALLOCATION_SEARCH_LIMIT {
        return Err(Error::SearchSpaceTooLarge(format!(
            "{space} allocation vectors exceed the limit of {ALLOCATION_SEARCH_LIMIT}"
        )));
    }
    let order: Vec<usize> = (0..pattern.n())
        .filter(|&i| pattern.is_healthy(i))
        .chain((0..pattern.n()).filter(|&i| !pattern.is_healthy(i)))
        .collect();
    let key = |r: &[usize]| order.iter().map(|&i| r[i]).collect::<Vec<_>>();

    let mut best: Option<(usize, Vec<usize>, Vec<usize>)> = None;
    for_each_allocation(&counts, |r| {
        let s: usize = r.iter().sum();
        if let Some((bs, _, bk)) = &best {
            if s > *bs {
                return;
            }
            if s == *bs && key(r) <= *bk {
                return;
            }
        }
        if feasible_counts(pattern.k, pattern.t, &counts, r) {
            best = Some((s, r.to_vec(), key(r)));
        }
    });
    let (_, r, _) = best.ok_or(Error::Infeasible)?;
    Ok(RepairPlan::from_counts(r))
}

/// Result of a repair run.
#[derive(Debug, Clone)]
pub struct RepairOutcome {
    /// The system after every sick node refilled its storage.
    pub system: CachingSystem,
    /// The plan with its broadcasts filled in.
    pub plan: RepairPlan,
    /// Number of random draws used; 0 when nothing had to be repaired.
    pub attempts: usize,
}

/// Functional repair by random linear broadcasts.
///
/// Node `i` sends `r_i` random combinations of its surviving packets; each
/// sick node fills every erased slot with a random combination of its own
/// survivors and all broadcasts. A draw is kept once the repaired system is
/// MDS again.
pub fn functional_repair(
    system: &CachingSystem,
    pattern: &ErasurePattern,
    plan: &RepairPlan,
    seed: u64,
) -> Result<RepairOutcome> {
    pattern.check_against(system)?;
    let r = plan.counts();
    if r.len() != pattern.n() {
        return Err(Error::Dimension(format!(
            "plan has {} counts for {} nodes",
            r.len(),
            pattern.n()
        )));
    }
    if r.iter().zip(pattern.counts()).any(|(&ri, pi)| ri > pi) || !check_feasible(pattern, r) {
        return Err(Error::Infeasible);
    }
    if pattern.is_intact() {
        return Ok(RepairOutcome {
            system: system.clone(),
            plan: RepairPlan::from_counts(r.to_vec()),
            attempts: 0,
        });
    }
    let f = system.field();
    let mut rng = seeded_rng(seed);
    for attempt in 1..=REPAIR_ATTEMPTS {
        let mut broadcasts = Vec::with_capacity(plan.gamma());
        for (sender, &count) in r.iter().enumerate() {
            let block = pattern.surviving_block(system, sender);
            for _ in 0..count {
                let coeffs: Vec<Elem> = (0..block.rows()).map(|_| f.random(&mut rng)).collect();
                broadcasts.push(Broadcast {
                    sender,
                    vector: block.vec_mul(&coeffs)?,
                });
            }
        }
        let candidate = RepairPlan::with_broadcasts(pattern.n(), broadcasts)?;
        let bmat = candidate.broadcast_matrix(system);

        let mut repaired = system.clone();
        for node in 0..pattern.n() {
            let erased = pattern.erased(node);
            if erased.is_empty() {
                continue;
            }
            let side = pattern.surviving_block(system, node).vstack(&bmat)?;
            for j in erased {
                let coeffs: Vec<Elem> = (0..side.rows()).map(|_| f.random(&mut rng)).collect();
                repaired.set_packet_vector(node, j, &side.vec_mul(&coeffs)?);
            }
        }
        if repaired.verify_caching_mds() {
            return Ok(RepairOutcome {
                system: repaired,
                plan: candidate,
                attempts: attempt,
            });
        }
    }
    Err(Error::RepairFailed {
        attempts: REPAIR_ATTEMPTS,
        p: f.p(),
    })
}

/// How one erased packet was rebuilt: `vector` is written as
/// `coefficients * [survivors of node; broadcasts]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Recovery {
    pub node: usize,
    pub packet: usize,
    pub coefficients: Vec<Elem>,
    /// Recovered packet value, when the system carries a payload.
    pub value: Option<Elem>,
}

/// Exact repair with given broadcasts: every erased coding vector must lie in
/// the span of the node's survivors and the broadcasts, so the original
/// packet comes back unchanged.
pub fn repair_with_broadcasts(
    system: &CachingSystem,
    pattern: &ErasurePattern,
    plan: &RepairPlan,
) -> Result<Vec<Recovery>> {
    pattern.check_against(system)?;
    if !plan.has_broadcasts() {
        return Err(Error::InvalidConfig("plan carries no broadcasts".into()));
    }
    for b in plan.broadcasts() {
        let sender_block = pattern.surviving_block(system, b.sender);
        if !sender_block.rowspace_contains(&b.vector)? {
            return Err(Error::InvalidConfig(format!(
                "broadcast from node {} is not a combination of its surviving packets",
                b.sender
            )));
        }
    }
    let bmat = plan.broadcast_matrix(system);
    let f = system.field();
    let packets = system.packets();
    let mut out = Vec::new();
    for node in 0..pattern.n() {
        let survivors = pattern.surviving(node);
        let side = pattern.surviving_block(system, node).vstack(&bmat)?;
        for packet in pattern.erased(node) {
            let target = system.packet_vector(node, packet);
            let coefficients = side
                .express_in_rows(target)?
                .ok_or(Error::Unrecoverable { node, packet })?;
            // Rebuild the value from what the node can actually see.
            let value = packets.as_ref().map(|pk| {
                let payload = system.payload().expect("packets imply payload");
                let seen: Vec<Elem> = survivors
                    .iter()
                    .map(|&j| pk[node][j])
                    .chain(plan.broadcasts().iter().map(|b| f.dot(&b.vector, payload)))
                    .collect();
                f.dot(&coefficients, &seen)
            });
            out.push(Recovery {
                node,
                packet,
                coefficients,
                value,
            });
        }
    }
    Ok(out)
}
