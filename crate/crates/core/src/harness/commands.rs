use itertools::Itertools;
use serde::{Deserialize, Serialize};

use super::{stream_rng, stream_seed, RunConfig};
use crate::code::CachingSystem;
use crate::error::{Error, Result};
use crate::exact::{ExactRepair, ExactSecureSystem};
use crate::galois::{Elem, PrimeField};
use crate::repair::{self, ErasurePattern, RepairPlan};
use crate::secrecy::{
    self, capacity_report, CapacityReport, Precoder, Scope, SecrecyAudit, SecretPartition,
    SecurityMode,
};
use crate::SCHEMA_VERSION;

/// Builds a system with a random payload. Coding matrix and payload use
/// separate streams of `seed`.
pub fn cmd_build(config: &RunConfig, seed: u64) -> Result<CachingSystem> {
    config.validate()?;
    let sys = config.build_system(stream_seed(seed, 0))?;
    let mut rng = stream_rng(seed, 1);
    let f = sys.field();
    let payload = (0..sys.config().m()).map(|_| f.random(&mut rng)).collect();
    sys.with_payload(payload)
}

/// How `erase` picks the surviving packets.
#[derive(Debug, Clone, PartialEq)]
pub enum PatternSpec {
    /// Surviving packet indices per node.
    Surviving(Vec<Vec<usize>>),
    /// Node `i` keeps its first `c_i` packets.
    Counts(Vec<usize>),
    /// Independent erasures with the given probability.
    Random(f64),
}

impl std::str::FromStr for PatternSpec {
    type Err = Error;

    /// `counts:2,2,1,1`, `random:0.25` or `surviving:0 1;0 1;0;1`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidPattern(format!("cannot parse pattern spec {s:?}"));
        let (kind, rest) = s.split_once(':').ok_or_else(bad)?;
        let num = |x: &str| x.trim().parse::<usize>().map_err(|_| bad());
        match kind {
            "counts" => Ok(PatternSpec::Counts(
                rest.split(',').map(num).collect::<Result<_>>()?,
            )),
            "random" => Ok(PatternSpec::Random(rest.trim().parse().map_err(|_| bad())?)),
            "surviving" => Ok(PatternSpec::Surviving(
                rest.split(';')
                    .map(|node| node.split_whitespace().map(num).collect())
                    .collect::<Result<_>>()?,
            )),
            _ => Err(bad()),
        }
    }
}

pub fn cmd_erase(system: &CachingSystem, spec: &PatternSpec, seed: u64) -> Result<ErasurePattern> {
    let c = system.config();
    let pattern = match spec {
        PatternSpec::Surviving(s) => ErasurePattern::new(c.k, c.t, s.clone())?,
        PatternSpec::Counts(counts) => ErasurePattern::from_counts(c.k, c.t, counts)?,
        PatternSpec::Random(p) => {
            ErasurePattern::random(c.n, c.k, c.t, *p, &mut stream_rng(seed, 2))?
        }
    };
    if pattern.n() != c.n {
        return Err(Error::InvalidPattern(format!(
            "pattern covers {} nodes, system has {}",
            pattern.n(),
            c.n
        )));
    }
    Ok(pattern)
}

/// One row of the cut-set table: data collector on `nodes`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeasibilityRow {
    pub nodes: Vec<usize>,
    /// Surviving packets inside the subset.
    pub stored: usize,
    /// Broadcasts from outside the subset.
    pub received: usize,
    /// `k t`.
    pub required: usize,
    pub ok: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanReport {
    pub schema_version: u32,
    /// Closed form, as a reduced fraction.
    pub gamma_min_formula: String,
    pub gamma_min_formula_ceil: usize,
    /// Exhaustive minimum; absent when the instance is too large.
    pub gamma_min_oracle: Option<usize>,
    pub r: Vec<usize>,
    pub gamma: usize,
    pub feasibility: Vec<FeasibilityRow>,
}

pub fn cmd_plan(
    system: &CachingSystem,
    pattern: &ErasurePattern,
) -> Result<(PlanReport, RepairPlan)> {
    let c = system.config();
    if pattern.n() != c.n || pattern.k() != c.k || pattern.t() != c.t {
        return Err(Error::InvalidPattern(
            "pattern does not match the system".into(),
        ));
    }
    let formula = repair::gamma_min_formula(pattern);
    let oracle = match repair::gamma_min_bruteforce(pattern) {
        Ok(g) => Some(g),
        Err(Error::SearchSpaceTooLarge(_)) => None,
        Err(e) => return Err(e),
    };
    let plan = repair::allocate_transmissions(pattern)?;
    let r = plan.counts().to_vec();
    let counts = pattern.counts();
    let total: usize = r.iter().sum();
    let feasibility = (0..c.n)
        .combinations(c.k)
        .map(|nodes| {
            let stored: usize = nodes.iter().map(|&i| counts[i]).sum();
            let inside: usize = nodes.iter().map(|&i| r[i]).sum();
            let received = total - inside;
            FeasibilityRow {
                stored,
                received,
                required: c.m(),
                ok: stored + received >= c.m(),
                nodes,
            }
        })
        .collect();
    let report = PlanReport {
        schema_version: SCHEMA_VERSION,
        gamma_min_formula: formula.to_string(),
        gamma_min_formula_ceil: repair::gamma_min_formula_ceil(pattern),
        gamma_min_oracle: oracle,
        gamma: total,
        r,
        feasibility,
    };
    Ok((report, plan))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RepairReport {
    pub schema_version: u32,
    pub mode: String,
    pub attempts: usize,
    pub gamma: usize,
    pub mds_after: bool,
    /// Broadcast values, when the system carries a payload.
    pub broadcast_values: Option<Vec<Elem>>,
    pub plan: RepairPlan,
    pub system: CachingSystem,
}

pub fn cmd_repair_functional(
    system: &CachingSystem,
    pattern: &ErasurePattern,
    plan: &RepairPlan,
    seed: u64,
) -> Result<RepairReport> {
    let out = repair::functional_repair(system, pattern, plan, stream_seed(seed, 3))?;
    let f = system.field();
    let values = system.payload().map(|x| {
        out.plan
            .broadcasts()
            .iter()
            .map(|b| f.dot(&b.vector, x))
            .collect()
    });
    Ok(RepairReport {
        schema_version: SCHEMA_VERSION,
        mode: "functional".into(),
        attempts: out.attempts,
        gamma: out.plan.gamma(),
        mds_after: out.system.verify_caching_mds(),
        broadcast_values: values,
        plan: out.plan,
        system: out.system,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExactRepairReport {
    pub schema_version: u32,
    pub mode: String,
    pub gamma: usize,
    pub gamma_min_formula: String,
    pub exact: bool,
    pub pattern: ErasurePattern,
    pub plan: RepairPlan,
    pub transcript: ExactRepair,
}

pub fn cmd_repair_exact(
    system: &ExactSecureSystem,
    u: usize,
    v: usize,
) -> Result<ExactRepairReport> {
    let pattern = system.erase_uv(u, v)?;
    let transcript = system.repair_exact(u, v)?;
    Ok(ExactRepairReport {
        schema_version: SCHEMA_VERSION,
        mode: "exact-uv".into(),
        gamma: transcript.gamma(),
        gamma_min_formula: repair::gamma_min_formula(&pattern).to_string(),
        exact: transcript.exact,
        plan: transcript.plan()?,
        pattern,
        transcript,
    })
}

/// Audits `plan` under `scope`. The universal scopes use the plan's budget as
/// the eavesdropper's subset size.
pub fn cmd_audit(
    system: &CachingSystem,
    plan: &RepairPlan,
    partition: &SecretPartition,
    scope: Scope,
    precoder: Option<&Precoder>,
) -> Result<SecrecyAudit> {
    match scope {
        Scope::Fixed => {
            let view = secrecy::eavesdropper_view(system, plan, precoder)?;
            secrecy::audit(&view, partition)
        }
        Scope::Universal(u) => {
            let id;
            let t = match precoder {
                Some(t) => t,
                None => {
                    id = Precoder::identity(system.field(), system.config().m());
                    &id
                }
            };
            secrecy::audit_universal(system, t, partition, plan.gamma(), u)
        }
    }
}

/// Whether `audit` meets `mode`.
pub fn audit_passes(audit: &SecrecyAudit, mode: SecurityMode) -> bool {
    match mode {
        SecurityMode::Strong => audit.strong_secure,
        SecurityMode::Weak => audit.weakly_secure(),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrecodeReport {
    pub schema_version: u32,
    pub mode: SecurityMode,
    pub scope: String,
    pub attempts: usize,
    pub precoder: Precoder,
    pub audit: SecrecyAudit,
}

pub fn cmd_precode(
    system: &CachingSystem,
    plan: &RepairPlan,
    partition: &SecretPartition,
    mode: SecurityMode,
    scope: Scope,
    seed: u64,
) -> Result<PrecodeReport> {
    let found = secrecy::construct_precoder(system, plan, mode, scope, partition, seed)?;
    Ok(PrecodeReport {
        schema_version: SCHEMA_VERSION,
        mode,
        scope: scope.label().into(),
        attempts: found.attempts,
        precoder: found.precoder,
        audit: found.audit,
    })
}

pub fn cmd_capacity(m: usize, gamma: usize, gamma_min: usize) -> CapacityReport {
    capacity_report(m, gamma, gamma_min)
}

/// Random secrets and keys; `q` defaults to the smallest prime above `k`.
pub fn cmd_exact_build(k: usize, q: Option<u64>, seed: u64) -> Result<ExactSecureSystem> {
    let field = match q {
        Some(q) => PrimeField::new(q)?,
        None => PrimeField::smallest_above(k as u64)?,
    };
    ExactSecureSystem::random(k, field, seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn pattern_spec_parsing() {
        assert_eq!(
            "counts:2,2,1,1".parse::<PatternSpec>().unwrap(),
            PatternSpec::Counts(vec![2, 2, 1, 1])
        );
        assert_eq!(
            "surviving:0 1;0 1;0;1".parse::<PatternSpec>().unwrap(),
            PatternSpec::Surviving(vec![vec![0, 1], vec![0, 1], vec![0], vec![1]])
        );
        assert_eq!(
            "random:0.5".parse::<PatternSpec>().unwrap(),
            PatternSpec::Random(0.5)
        );
        assert!("counts:a".parse::<PatternSpec>().is_err());
        assert!("whatever".parse::<PatternSpec>().is_err());
    }

    #[test]
    fn plan_on_toy() {
        let sys = fixtures::four_two_system();
        let (report, plan) = cmd_plan(&sys, &fixtures::two_partial_pattern()).unwrap();
        assert_eq!(report.gamma_min_formula, "2");
        assert_eq!(report.gamma_min_oracle, Some(2));
        assert_eq!(plan.counts(), &[1, 1, 0, 0]);
        assert_eq!(report.feasibility.len(), 6);
        assert!(report.feasibility.iter().all(|row| row.ok));
    }

    #[test]
    fn audit_on_toy() {
        let sys = fixtures::four_two_system();
        let a = cmd_audit(
            &sys,
            &fixtures::two_broadcast_plan(),
            &fixtures::two_key_partition(),
            Scope::Fixed,
            None,
        )
        .unwrap();
        assert_eq!(a.leakage_qary, 0);
        assert!(audit_passes(&a, SecurityMode::Strong));
    }
}
