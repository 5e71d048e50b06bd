//! Leakage of repair broadcasts to a passive eavesdropper.
//!
//! The `M` source coordinates are split into secrets and uniform random
//! keys. An optional invertible precoder `T` mixes them before the MDS
//! encoder, so the eavesdropper that overhears the `Γ` broadcasts sees
//! `W (secrets ∥ keys)` with `W = broadcast_matrix * T`. Writing `B` for the
//! columns of `W` at key coordinates, the leakage in `log_q` units is
//!
//! ```text
//! I(secrets; view) = rank(W) - rank(B)
//! ```
//!
//! and secret `s_i` is individually hidden iff the unit vector `e_i` is not
//! in the row space of `W`. Both identities are checked against exhaustive
//! enumeration in [`oracle`].

mod capacity;
pub mod oracle;
mod precoder;

pub use capacity::{
    capacity_report, capacity_strong, capacity_weak, field_bound_strong, field_bound_weak,
    CapacityReport, FIELD_BOUND_LIMIT,
};
pub use precoder::{
    audit_universal, construct_precoder, Precoder, PrecoderSearch, Scope, SecurityMode, Universe,
    PRECODER_ATTEMPTS, UNIVERSAL_SUBSET_LIMIT,
};

use serde::{Deserialize, Serialize};

use crate::code::CachingSystem;
use crate::error::{Error, Result};
use crate::galois::{unit_vector, FieldMatrix};
use crate::repair::RepairPlan;

/// Split of the `M` source coordinates into secrets and keys.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "PartitionDescriptor", into = "PartitionDescriptor")]
pub struct SecretPartition {
    m: usize,
    secrets: Vec<usize>,
    keys: Vec<usize>,
}

impl SecretPartition {
    pub fn new(m: usize, mut secrets: Vec<usize>, mut keys: Vec<usize>) -> Result<Self> {
        secrets.sort_unstable();
        keys.sort_unstable();
        let mut seen = vec![false; m];
        for &i in secrets.iter().chain(&keys) {
            match seen.get_mut(i) {
                None => {
                    return Err(Error::InvalidPartition(format!(
                        "coordinate {i} outside 0..{m}"
                    )))
                }
                Some(true) => {
                    return Err(Error::InvalidPartition(format!(
                        "coordinate {i} listed twice"
                    )))
                }
                Some(s) => *s = true,
            }
        }
        if let Some(missing) = seen.iter().position(|&s| !s) {
            return Err(Error::InvalidPartition(format!(
                "coordinate {missing} is neither secret nor key"
            )));
        }
        Ok(Self { m, secrets, keys })
    }

    /// Secrets are the given coordinates, every other coordinate is a key.
    pub fn with_secrets(m: usize, secrets: Vec<usize>) -> Result<Self> {
        let keys = (0..m).filter(|i| !secrets.contains(i)).collect();
        Self::new(m, secrets, keys)
    }

    /// First `m - keys` coordinates secret, the last `keys` coordinates keys.
    pub fn trailing_keys(m: usize, keys: usize) -> Result<Self> {
        if keys > m {
            return Err(Error::InvalidPartition(format!("{keys} keys for M = {m}")));
        }
        Self::new(m, (0..m - keys).collect(), (m - keys..m).collect())
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn secrets(&self) -> &[usize] {
        &self.secrets
    }

    pub fn keys(&self) -> &[usize] {
        &self.keys
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PartitionDescriptor {
    pub m: usize,
    pub secret_indices: Vec<usize>,
    pub key_indices: Vec<usize>,
}

impl From<SecretPartition> for PartitionDescriptor {
    fn from(p: SecretPartition) -> Self {
        Self {
            m: p.m,
            secret_indices: p.secrets,
            key_indices: p.keys,
        }
    }
}

impl TryFrom<PartitionDescriptor> for SecretPartition {
    type Error = Error;

    fn try_from(d: PartitionDescriptor) -> Result<Self> {
        Self::new(d.m, d.secret_indices, d.key_indices)
    }
}

/// What the eavesdropper observes: row `j` of `W` maps the
/// `(secrets ∥ keys)` coordinates to broadcast `j`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EavesdropperView {
    w: FieldMatrix,
}

impl EavesdropperView {
    pub fn new(w: FieldMatrix) -> Self {
        Self { w }
    }

    pub fn matrix(&self) -> &FieldMatrix {
        &self.w
    }

    /// Columns of `W` at secret coordinates.
    pub fn secret_part(&self, partition: &SecretPartition) -> FieldMatrix {
        self.w.select_cols(partition.secrets())
    }

    /// Columns of `W` at key coordinates.
    pub fn key_part(&self, partition: &SecretPartition) -> FieldMatrix {
        self.w.select_cols(partition.keys())
    }

    fn check(&self, partition: &SecretPartition) -> Result<()> {
        if partition.m() != self.w.cols() {
            return Err(Error::Dimension(format!(
                "partition over {} coordinates for a view over {}",
                partition.m(),
                self.w.cols()
            )));
        }
        Ok(())
    }
}

/// Builds `W = broadcast_matrix * T` (or the broadcast matrix alone).
pub fn eavesdropper_view(
    system: &CachingSystem,
    plan: &RepairPlan,
    precoder: Option<&Precoder>,
) -> Result<EavesdropperView> {
    if !plan.has_broadcasts() {
        return Err(Error::InvalidConfig(
            "plan has a nonzero budget but no broadcasts; run a repair first".into(),
        ));
    }
    let bmat = plan.broadcast_matrix(system);
    let w = match precoder {
        Some(t) => bmat.mul(t.matrix())?,
        None => bmat,
    };
    Ok(EavesdropperView::new(w))
}

/// `I(secrets; view)` in `log_q` units for uniform, independent coordinates.
pub fn strong_leakage(view: &EavesdropperView, partition: &SecretPartition) -> Result<usize> {
    view.check(partition)?;
    Ok(view.w.rank() - view.key_part(partition).rank())
}

/// One flag per secret (in `secret_indices` order): true when that secret
/// stays uniformly distributed given the view.
pub fn weak_flags(view: &EavesdropperView, partition: &SecretPartition) -> Result<Vec<bool>> {
    view.check(partition)?;
    if view.w.rows() == 0 {
        return Ok(vec![true; partition.secrets().len()]);
    }
    // Reduce once, then test every unit vector against the echelon basis.
    let ech = view.w.echelon();
    let basis = ech
        .reduced
        .select_rows(&(0..ech.rank()).collect::<Vec<_>>());
    partition
        .secrets()
        .iter()
        .map(|&i| Ok(!basis.rowspace_contains(&unit_vector(partition.m(), i))?))
        .collect()
}

/// Security verdict for one view (or the worst case over several).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SecrecyAudit {
    pub schema_version: u32,
    /// Leakage `I(secrets; view)` in `log_q` units.
    pub leakage_qary: usize,
    pub strong_secure: bool,
    /// Per secret, in `secret_indices` order; true means safe.
    pub weak_flags: Vec<bool>,
    /// `rank(W)`; equal to the broadcast entropy `H(Y)`.
    pub view_rank: usize,
    /// `rank(B)`; equal to `H(Y | secrets)`.
    pub key_rank: usize,
    /// Number of views combined into this verdict.
    pub views_audited: usize,
    pub scope: String,
}

impl SecrecyAudit {
    pub fn weakly_secure(&self) -> bool {
        self.weak_flags.iter().all(|&f| f)
    }

    /// Worst case of two audits over the same partition.
    pub fn merge(mut self, other: &SecrecyAudit) -> Self {
        if other.leakage_qary > self.leakage_qary
            || (other.leakage_qary == self.leakage_qary && other.key_rank < self.key_rank)
        {
            self.view_rank = other.view_rank;
            self.key_rank = other.key_rank;
        }
        self.leakage_qary = self.leakage_qary.max(other.leakage_qary);
        self.strong_secure &= other.strong_secure;
        for (a, &b) in self.weak_flags.iter_mut().zip(&other.weak_flags) {
            *a &= b;
        }
        self.views_audited += other.views_audited;
        self
    }
}

/// Strong and weak verdicts for one view.
pub fn audit(view: &EavesdropperView, partition: &SecretPartition) -> Result<SecrecyAudit> {
    let leakage = strong_leakage(view, partition)?;
    let flags = weak_flags(view, partition)?;
    Ok(SecrecyAudit {
        schema_version: crate::SCHEMA_VERSION,
        leakage_qary: leakage,
        strong_secure: leakage == 0,
        weak_flags: flags,
        view_rank: view.w.rank(),
        key_rank: view.key_part(partition).rank(),
        views_audited: 1,
        scope: "fixed".into(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{self, gf};

    fn toy_view() -> EavesdropperView {
        let sys = fixtures::four_two_system();
        eavesdropper_view(&sys, &fixtures::two_broadcast_plan(), None).unwrap()
    }

    #[test]
    fn view_matches_broadcasts() {
        let w = toy_view();
        assert_eq!(
            w.matrix().to_rows(),
            vec![vec![1, 0, 1, 0], vec![2, 1, 2, 1]]
        );
        let id = Precoder::new(FieldMatrix::identity(gf(3), 4)).unwrap();
        let sys = fixtures::four_two_system();
        let w2 = eavesdropper_view(&sys, &fixtures::two_broadcast_plan(), Some(&id)).unwrap();
        assert_eq!(w2, w);
        let empty = eavesdropper_view(&sys, &RepairPlan::from_counts(vec![0; 4]), None).unwrap();
        assert_eq!((empty.matrix().rows(), empty.matrix().cols()), (0, 4));
    }

    #[test]
    fn plan_without_broadcasts_is_rejected() {
        let sys = fixtures::four_two_system();
        let plan = RepairPlan::from_counts(vec![1, 1, 0, 0]);
        assert!(eavesdropper_view(&sys, &plan, None).is_err());
    }

    #[test]
    fn leakage_examples() {
        let w = toy_view();
        assert_eq!(
            strong_leakage(&w, &fixtures::two_key_partition()).unwrap(),
            0
        );
        assert_eq!(
            strong_leakage(&w, &fixtures::all_secret_partition(4)).unwrap(),
            2
        );
        let empty = EavesdropperView::new(FieldMatrix::zeros(gf(3), 0, 4));
        assert_eq!(
            strong_leakage(&empty, &fixtures::all_secret_partition(4)).unwrap(),
            0
        );
        assert!(strong_leakage(&w, &fixtures::all_secret_partition(3)).is_err());
    }

    #[test]
    fn weak_flag_examples() {
        let w = toy_view();
        assert_eq!(
            weak_flags(&w, &fixtures::all_secret_partition(4)).unwrap(),
            vec![true; 4]
        );
        let exposed = EavesdropperView::new(
            FieldMatrix::from_rows(gf(3), 4, &[[1, 0, 0, 0], [0, 1, 1, 0]]).unwrap(),
        );
        assert_eq!(
            weak_flags(&exposed, &fixtures::all_secret_partition(4)).unwrap(),
            vec![false, true, true, true]
        );
        let empty = EavesdropperView::new(FieldMatrix::zeros(gf(3), 0, 4));
        assert_eq!(
            weak_flags(&empty, &fixtures::all_secret_partition(4)).unwrap(),
            vec![true; 4]
        );
    }

    #[test]
    fn audit_and_merge() {
        let w = toy_view();
        let strong = audit(&w, &fixtures::two_key_partition()).unwrap();
        assert!(strong.strong_secure && strong.weakly_secure());
        assert_eq!((strong.view_rank, strong.key_rank), (2, 2));
        let plain = audit(&w, &fixtures::all_secret_partition(4)).unwrap();
        assert_eq!(plain.leakage_qary, 2);
        assert!(!plain.strong_secure && plain.weakly_secure());
    }

    #[test]
    fn partition_validation() {
        assert!(SecretPartition::new(4, vec![0, 1], vec![1, 2, 3]).is_err());
        assert!(SecretPartition::new(4, vec![0, 1], vec![2]).is_err());
        assert!(SecretPartition::new(4, vec![0, 4], vec![1, 2, 3]).is_err());
        let p = SecretPartition::with_secrets(4, vec![3, 0]).unwrap();
        assert_eq!((p.secrets(), p.keys()), (&[0, 3][..], &[1, 2][..]));
        assert_eq!(
            SecretPartition::trailing_keys(4, 2).unwrap(),
            fixtures::two_key_partition()
        );
    }
}
