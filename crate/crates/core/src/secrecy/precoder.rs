use itertools::Itertools;
use serde::{Deserialize, Serialize};

use super::{
    audit, field_bound_strong, field_bound_weak, EavesdropperView, SecrecyAudit, SecretPartition,
};
use crate::code::CachingSystem;
use crate::error::{Error, Result};
use crate::galois::{FieldMatrix, PrimeField};
use crate::repair::RepairPlan;
use crate::{seeded_rng, SCHEMA_VERSION};

/// Retry budget of [`construct_precoder`].
pub const PRECODER_ATTEMPTS: usize = 1024;

/// Largest number of packet subsets a universal audit will enumerate.
pub const UNIVERSAL_SUBSET_LIMIT: u128 = 1_000_000;

/// Invertible `M x M` matrix applied to `(secrets ∥ keys)` before the MDS
/// encoder: the encoder sees `x = T u`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "PrecoderDescriptor", into = "PrecoderDescriptor")]
pub struct Precoder {
    t: FieldMatrix,
}

impl Precoder {
    pub fn new(t: FieldMatrix) -> Result<Self> {
        if !t.is_square() {
            return Err(Error::Dimension(format!(
                "precoder must be square, got {}x{}",
                t.rows(),
                t.cols()
            )));
        }
        if t.rank() != t.rows() {
            return Err(Error::Singular {
                rank: t.rank(),
                dim: t.rows(),
            });
        }
        Ok(Self { t })
    }

    pub fn identity(field: PrimeField, m: usize) -> Self {
        Self {
            t: FieldMatrix::identity(field, m),
        }
    }

    pub fn matrix(&self) -> &FieldMatrix {
        &self.t
    }

    /// Encoder input for a given `(secrets ∥ keys)` assignment.
    pub fn apply(&self, u: &[u64]) -> Result<Vec<u64>> {
        self.t.mul_vec(u)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PrecoderDescriptor {
    pub schema_version: u32,
    pub q: u64,
    #[serde(rename = "T")]
    pub t: Vec<Vec<u64>>,
}

impl From<Precoder> for PrecoderDescriptor {
    fn from(p: Precoder) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            q: p.t.field().p(),
            t: p.t.to_rows(),
        }
    }
}

impl TryFrom<PrecoderDescriptor> for Precoder {
    type Error = Error;

    fn try_from(d: PrecoderDescriptor) -> Result<Self> {
        crate::check_schema_version(d.schema_version)?;
        let f = PrimeField::new(d.q)?;
        Precoder::new(FieldMatrix::from_rows(f, d.t.len(), &d.t)?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SecurityMode {
    /// Zero mutual information between all secrets and the view.
    Strong,
    /// Every secret individually independent of the view.
    Weak,
}

/// Packets an eavesdropper may pick `Γ` of in a universal audit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Universe {
    /// The `M` precoded symbols `x = T u` entering the encoder.
    SourceSymbols,
    /// All `n t` stored packets.
    StoredPackets,
}

/// Which views a precoder must protect.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scope {
    /// The broadcasts of the given plan only.
    Fixed,
    /// Every `Γ`-subset of the chosen packet universe.
    Universal(Universe),
}

impl Scope {
    pub fn label(&self) -> &'static str {
        match self {
            Scope::Fixed => "fixed",
            Scope::Universal(Universe::SourceSymbols) => "universal-source",
            Scope::Universal(Universe::StoredPackets) => "universal-stored",
        }
    }
}

impl std::str::FromStr for Scope {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fixed" => Ok(Scope::Fixed),
            "universal" | "universal-source" => Ok(Scope::Universal(Universe::SourceSymbols)),
            "universal-stored" => Ok(Scope::Universal(Universe::StoredPackets)),
            other => Err(Error::InvalidConfig(format!("unknown scope {other:?}"))),
        }
    }
}

impl std::str::FromStr for SecurityMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "strong" => Ok(SecurityMode::Strong),
            "weak" => Ok(SecurityMode::Weak),
            other => Err(Error::InvalidConfig(format!("unknown mode {other:?}"))),
        }
    }
}

fn universe_rows(system: &CachingSystem, universe: Universe) -> FieldMatrix {
    match universe {
        Universe::SourceSymbols => FieldMatrix::identity(system.field(), system.config().m()),
        Universe::StoredPackets => system.coding_matrix().clone(),
    }
}

/// Worst-case audit over every `gamma`-subset of the universe, with the
/// precoder applied.
pub fn audit_universal(
    system: &CachingSystem,
    precoder: &Precoder,
    partition: &SecretPartition,
    gamma: usize,
    universe: Universe,
) -> Result<SecrecyAudit> {
    let rows = universe_rows(system, universe);
    check_subset_count(rows.rows(), gamma)?;
    let coded = rows.mul(precoder.matrix())?;
    let mut worst: Option<SecrecyAudit> = None;
    for subset in (0..coded.rows()).combinations(gamma.min(coded.rows())) {
        let view = EavesdropperView::new(coded.select_rows(&subset));
        let a = audit(&view, partition)?;
        worst = Some(match worst {
            None => a,
            Some(w) => w.merge(&a),
        });
    }
    let mut worst = worst.expect("at least the empty subset is enumerated");
    worst.scope = Scope::Universal(universe).label().into();
    Ok(worst)
}

fn check_subset_count(n: usize, k: usize) -> Result<()> {
    let mut c: u128 = 1;
    for i in 0..k.min(n) as u128 {
        c = c * (n as u128 - i) / (i + 1);
        if c > UNIVERSAL_SUBSET_LIMIT {
            return Err(Error::SearchSpaceTooLarge(format!(
                "more than {UNIVERSAL_SUBSET_LIMIT} subsets of size {k} among {n} packets"
            )));
        }
    }
    Ok(())
}

/// A precoder together with the number of draws it took.
#[derive(Debug, Clone)]
pub struct PrecoderSearch {
    pub precoder: Precoder,
    pub attempts: usize,
    pub audit: SecrecyAudit,
}

/// Randomized search for a security precoder.
///
/// Draws `T` uniformly among invertible matrices and keeps the first one
/// whose audit passes in the requested mode and scope. The plan's budget
/// `Γ` sets the subset size of universal audits; fixed audits use the plan's
/// broadcasts, which must be present.
pub fn construct_precoder(
    system: &CachingSystem,
    plan: &RepairPlan,
    mode: SecurityMode,
    scope: Scope,
    partition: &SecretPartition,
    seed: u64,
) -> Result<PrecoderSearch> {
    let m = system.config().m();
    let gamma = plan.gamma();
    if partition.m() != m {
        return Err(Error::Dimension(format!(
            "partition over {} coordinates for M = {m}",
            partition.m()
        )));
    }
    let bound = match mode {
        SecurityMode::Strong => {
            if partition.keys().len() < gamma {
                return Err(Error::InvalidPartition(format!(
                    "strong security needs at least Γ = {gamma} keys, got {}",
                    partition.keys().len()
                )));
            }
            field_bound_strong(m, gamma)
        }
        SecurityMode::Weak => {
            if gamma >= m {
                return Err(Error::InvalidConfig(format!(
                    "weak security needs Γ < M (Γ = {gamma}, M = {m})"
                )));
            }
            field_bound_weak(m, gamma)
        }
    };
    let bound = match bound {
        Ok(q) => q.to_string(),
        Err(Error::BoundOverflow { binomial }) => format!("next prime >= {binomial}"),
        Err(e) => return Err(e),
    };
    if scope == Scope::Fixed && !plan.has_broadcasts() {
        return Err(Error::InvalidConfig(
            "fixed scope needs the plan's broadcasts; run a repair first".into(),
        ));
    }
    if let Scope::Universal(u) = scope {
        check_subset_count(universe_rows(system, u).rows(), gamma)?;
    }

    let mut rng = seeded_rng(seed);
    for attempt in 1..=PRECODER_ATTEMPTS {
        let precoder = Precoder {
            t: FieldMatrix::random_invertible(system.field(), m, &mut rng),
        };
        let result = match scope {
            Scope::Fixed => {
                let view = super::eavesdropper_view(system, plan, Some(&precoder))?;
                audit(&view, partition)?
            }
            Scope::Universal(u) => audit_universal(system, &precoder, partition, gamma, u)?,
        };
        let ok = match mode {
            SecurityMode::Strong => result.strong_secure,
            SecurityMode::Weak => result.weakly_secure(),
        };
        if ok {
            return Ok(PrecoderSearch {
                precoder,
                attempts: attempt,
                audit: result,
            });
        }
    }
    Err(Error::SearchExhausted {
        attempts: PRECODER_ATTEMPTS,
        q: system.field().p(),
        bound,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::secrecy::{eavesdropper_view, strong_leakage};

    #[test]
    fn toy_precoder_is_a_witness() {
        // The identity precoder with keys in the b-slots is exactly the
        // secured instance, so a fixed-scope search at q = 3 must succeed.
        let sys = fixtures::four_two_system();
        let plan = fixtures::two_broadcast_plan();
        let part = fixtures::two_key_partition();
        let id = Precoder::identity(sys.field(), 4);
        let view = eavesdropper_view(&sys, &plan, Some(&id)).unwrap();
        assert_eq!(strong_leakage(&view, &part).unwrap(), 0);

        let found =
            construct_precoder(&sys, &plan, SecurityMode::Strong, Scope::Fixed, &part, 1).unwrap();
        let view = eavesdropper_view(&sys, &plan, Some(&found.precoder)).unwrap();
        assert_eq!(strong_leakage(&view, &part).unwrap(), 0);
    }

    #[test]
    fn strong_without_keys_is_rejected() {
        let sys = fixtures::four_two_system();
        let plan = fixtures::two_broadcast_plan();
        let part = fixtures::all_secret_partition(4);
        assert!(matches!(
            construct_precoder(&sys, &plan, SecurityMode::Strong, Scope::Fixed, &part, 1),
            Err(Error::InvalidPartition(_))
        ));
    }

    #[test]
    fn weak_universal_at_q3() {
        let sys = fixtures::four_two_system();
        let plan = RepairPlan::from_counts(vec![1, 1, 0, 0]);
        let part = fixtures::all_secret_partition(4);
        let scope = Scope::Universal(Universe::SourceSymbols);
        let found = construct_precoder(&sys, &plan, SecurityMode::Weak, scope, &part, 7).unwrap();
        let audit =
            audit_universal(&sys, &found.precoder, &part, 2, Universe::SourceSymbols).unwrap();
        assert!(audit.weakly_secure());
        assert_eq!(audit.views_audited, 6);
    }

    #[test]
    fn scope_parsing() {
        assert_eq!("fixed".parse::<Scope>().unwrap(), Scope::Fixed);
        assert_eq!(
            "universal".parse::<Scope>().unwrap(),
            Scope::Universal(Universe::SourceSymbols)
        );
        assert_eq!(
            "universal-stored".parse::<Scope>().unwrap(),
            Scope::Universal(Universe::StoredPackets)
        );
        assert!("everything".parse::<Scope>().is_err());
    }

    #[test]
    fn singular_precoder_rejected() {
        let f = fixtures::gf(5);
        let t = FieldMatrix::from_rows(f, 2, &[[1, 2], [2, 4]]).unwrap();
        assert!(Precoder::new(t).is_err());
    }
}
