//! Explicit secure code with exact partial repair for `n = 2k`, `t = k`.
//!
//! The file is a `k x (k-2)` secret matrix `S`. Two uniform key columns
//! `Z = [z_1 z_2]` mask it into the `k x k` virtual source
//!
//! ```text
//! S' = [ z_1 | z_2 | s_1 + z_1 + z_2 | ... | s_(k-2) + z_1 + z_2 ]
//! ```
//!
//! Systematic node `i` stores row `i` of `S'`; parity node `i` stores row `i`
//! of `P = Φ S'` with `Φ` the `k x k` Vandermonde matrix on points `1..=k`.
//!
//! When every systematic node loses column `u` and every parity node loses
//! column `v != u`, parity nodes broadcast column `u` of `P` and systematic
//! nodes broadcast column `v` of `S'`: `2k` packets in total. Systematic
//! nodes solve `Φ s'_u = p_u`; parity nodes recompute `p_v = Φ s'_v`.
//!
//! Columns are numbered from 1 throughout this module, so columns 1 and 2
//! are the pure key columns.

use itertools::Itertools;
use serde::{Deserialize, Serialize};

use crate::code::{CachingSystem, SystemConfig};
use crate::error::{Error, Result};
use crate::galois::{vandermonde, Elem, FieldMatrix, PrimeField};
use crate::repair::{self, Broadcast, ErasurePattern, RepairPlan};
use crate::secrecy::{self, Precoder, SecrecyAudit, SecretPartition};
use crate::{seeded_rng, SCHEMA_VERSION};

/// The `n = 2k` secure caching system.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "ExactDescriptor", into = "ExactDescriptor")]
pub struct ExactSecureSystem {
    k: usize,
    field: PrimeField,
    secrets: FieldMatrix,
    keys: FieldMatrix,
    sprime: FieldMatrix,
    phi: FieldMatrix,
    parity: FieldMatrix,
}

impl ExactSecureSystem {
    /// Builds the system with keys drawn from `seed`.
    pub fn build(k: usize, field: PrimeField, secrets: &FieldMatrix, seed: u64) -> Result<Self> {
        let mut rng = seeded_rng(seed);
        let keys = FieldMatrix::random(field, k, 2, &mut rng);
        Self::with_keys(k, field, secrets, &keys)
    }

    /// Builds the system from explicit keys (for fixtures).
    pub fn with_keys(
        k: usize,
        field: PrimeField,
        secrets: &FieldMatrix,
        keys: &FieldMatrix,
    ) -> Result<Self> {
        if k < 3 {
            return Err(Error::InvalidConfig(format!(
                "the construction needs k >= 3 (k - 2 secret columns), got k = {k}"
            )));
        }
        if field.p() <= k as u64 {
            return Err(Error::FieldTooSmall {
                p: field.p(),
                needed: k as u64,
            });
        }
        if (secrets.rows(), secrets.cols()) != (k, k - 2) {
            return Err(Error::Dimension(format!(
                "secret matrix must be {k}x{}, got {}x{}",
                k - 2,
                secrets.rows(),
                secrets.cols()
            )));
        }
        if (keys.rows(), keys.cols()) != (k, 2) {
            return Err(Error::Dimension(format!(
                "key matrix must be {k}x2, got {}x{}",
                keys.rows(),
                keys.cols()
            )));
        }
        if secrets.field() != field || keys.field() != field {
            return Err(Error::Dimension(
                "secrets and keys must live in the system field".into(),
            ));
        }

        let mut sprime = FieldMatrix::zeros(field, k, k);
        for i in 0..k {
            let (z1, z2) = (keys.get(i, 0), keys.get(i, 1));
            let mask = field.add(z1, z2);
            sprime.set(i, 0, z1);
            sprime.set(i, 1, z2);
            for c in 0..k - 2 {
                sprime.set(i, c + 2, field.add(secrets.get(i, c), mask));
            }
        }
        let phi = vandermonde(k, field)?;
        let parity = phi.mul(&sprime)?;
        Ok(Self {
            k,
            field,
            secrets: secrets.clone(),
            keys: keys.clone(),
            sprime,
            phi,
            parity,
        })
    }

    /// Node subsets of size `k` that fail to span all `k^2` virtual symbols.
    /// Empty iff the stacked system is MDS.
    pub fn mds_failures(&self) -> Result<Vec<Vec<usize>>> {
        let sys = self.to_caching_system()?;
        let m = self.k * self.k;
        Ok((0..2 * self.k)
            .combinations(self.k)
            .filter(|d| sys.nodes_block(d).rank() < m)
            .collect())
    }

    pub fn is_mds(&self) -> Result<bool> {
        Ok(self.mds_failures()?.is_empty())
    }

    /// Random secrets and keys, both from `seed`.
    pub fn random(k: usize, field: PrimeField, seed: u64) -> Result<Self> {
        if k < 3 {
            return Self::with_keys(
                k,
                field,
                &FieldMatrix::zeros(field, k, 0),
                &FieldMatrix::zeros(field, k, 2),
            );
        }
        let mut rng = seeded_rng(seed);
        let secrets = FieldMatrix::random(field, k, k - 2, &mut rng);
        let keys = FieldMatrix::random(field, k, 2, &mut rng);
        Self::with_keys(k, field, &secrets, &keys)
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n(&self) -> usize {
        2 * self.k
    }

    pub fn field(&self) -> PrimeField {
        self.field
    }

    pub fn secrets(&self) -> &FieldMatrix {
        &self.secrets
    }

    pub fn keys(&self) -> &FieldMatrix {
        &self.keys
    }

    pub fn sprime(&self) -> &FieldMatrix {
        &self.sprime
    }

    pub fn phi(&self) -> &FieldMatrix {
        &self.phi
    }

    pub fn parity(&self) -> &FieldMatrix {
        &self.parity
    }

    /// Number of secret symbols, `k (k - 2)`.
    pub fn secret_count(&self) -> usize {
        self.k * (self.k - 2)
    }

    /// Index of `S'_(row, col)` (0-based) among the `k^2` virtual symbols.
    fn vidx(&self, row: usize, col: usize) -> usize {
        row * self.k + col
    }

    /// The system as a generic caching system over the `k^2` entries of `S'`
    /// (row-major). Nodes `0..k` are systematic, `k..2k` parity. The payload
    /// is `S'` itself.
    pub fn to_caching_system(&self) -> Result<CachingSystem> {
        let k = self.k;
        let cfg = SystemConfig::with_field(2 * k, k, k, self.field)?;
        let mut g = FieldMatrix::zeros(self.field, 2 * k * k, k * k);
        for i in 0..k {
            for j in 0..k {
                g.set(i * k + j, self.vidx(i, j), 1);
                for m in 0..k {
                    g.set((k + i) * k + j, self.vidx(m, j), self.phi.get(i, m));
                }
            }
        }
        CachingSystem::from_matrix(cfg, g)?.with_payload(self.sprime.as_slice().to_vec())
    }

    /// Secrets first (`s_(i,c)` at `i (k-2) + c`), then keys
    /// (`z_(i,1)`, `z_(i,2)` at `k (k-2) + 2i`, `+1`).
    pub fn partition(&self) -> SecretPartition {
        let s = self.secret_count();
        SecretPartition::trailing_keys(s + 2 * self.k, 2 * self.k).expect("valid split")
    }

    /// The masking map as a precoder: `S' = T (secrets ∥ keys)`.
    pub fn precoder(&self) -> Precoder {
        let k = self.k;
        let s = self.secret_count();
        let mut t = FieldMatrix::zeros(self.field, k * k, k * k);
        for i in 0..k {
            let z1 = s + 2 * i;
            let z2 = z1 + 1;
            t.set(self.vidx(i, 0), z1, 1);
            t.set(self.vidx(i, 1), z2, 1);
            for c in 0..k - 2 {
                let row = self.vidx(i, c + 2);
                t.set(row, i * (k - 2) + c, 1);
                t.set(row, z1, 1);
                t.set(row, z2, 1);
            }
        }
        Precoder::new(t).expect("masking map is invertible")
    }

    /// `(secrets ∥ keys)` as one vector in [`Self::partition`] order.
    pub fn secret_key_vector(&self) -> Vec<Elem> {
        let mut v = self.secrets.as_slice().to_vec();
        v.extend_from_slice(self.keys.as_slice());
        v
    }

    fn check_uv(&self, u: usize, v: usize) -> Result<()> {
        if u == v {
            return Err(Error::InvalidPattern(format!(
                "u and v must differ (both {u})"
            )));
        }
        for (name, c) in [("u", u), ("v", v)] {
            if c == 0 || c > self.k {
                return Err(Error::InvalidPattern(format!(
                    "{name} = {c} outside 1..={}",
                    self.k
                )));
            }
        }
        Ok(())
    }

    /// Every systematic node loses column `u`, every parity node column `v`.
    pub fn erase_uv(&self, u: usize, v: usize) -> Result<ErasurePattern> {
        self.check_uv(u, v)?;
        let k = self.k;
        let surviving = (0..2 * k)
            .map(|node| {
                let lost = if node < k { u - 1 } else { v - 1 };
                (0..k).filter(|&j| j != lost).collect()
            })
            .collect();
        ErasurePattern::new(k, k, surviving)
    }

    /// Runs the two exact repair procedures.
    pub fn repair_exact(&self, u: usize, v: usize) -> Result<ExactRepair> {
        self.check_uv(u, v)?;
        let k = self.k;
        let (cu, cv) = (u - 1, v - 1);
        let m = k * k;

        let mut broadcasts = Vec::with_capacity(2 * k);
        // parity node i sends P_(i,u) = φ_i · s'_u
        for i in 0..k {
            let mut vector = vec![0; m];
            for r in 0..k {
                vector[self.vidx(r, cu)] = self.phi.get(i, r);
            }
            broadcasts.push(ExactBroadcast {
                node: k + i,
                packet: cu,
                vector,
                value: self.parity.get(i, cu),
            });
        }
        // systematic node i sends S'_(i,v)
        for i in 0..k {
            let mut vector = vec![0; m];
            vector[self.vidx(i, cv)] = 1;
            broadcasts.push(ExactBroadcast {
                node: i,
                packet: cv,
                vector,
                value: self.sprime.get(i, cv),
            });
        }

        let received_p: Vec<Elem> = broadcasts[..k].iter().map(|b| b.value).collect();
        let received_s: Vec<Elem> = broadcasts[k..].iter().map(|b| b.value).collect();

        let phi_inv = self.phi.inverse()?;
        let solved = phi_inv.mul_vec(&received_p)?;
        let recomputed = self.phi.mul_vec(&received_s)?;

        let parity = solved
            .iter()
            .enumerate()
            .map(|(i, &value)| RecoveredPacket {
                node: i,
                packet: cu,
                value,
            });
        let systematic = recomputed
            .iter()
            .enumerate()
            .map(|(i, &value)| RecoveredPacket {
                node: k + i,
                packet: cv,
                value,
            });
        let recovered: Vec<RecoveredPacket> = parity.chain(systematic).collect();
        let exact = recovered
            .iter()
            .all(|r| r.value == self.stored(r.node, r.packet));
        debug_assert!(exact, "Φ is invertible, so both procedures are exact");
        Ok(ExactRepair {
            u,
            v,
            broadcasts,
            recovered,
            exact,
        })
    }

    /// Value of packet `packet` (0-based) stored at `node`.
    pub fn stored(&self, node: usize, packet: usize) -> Elem {
        if node < self.k {
            self.sprime.get(node, packet)
        } else {
            self.parity.get(node - self.k, packet)
        }
    }

    /// Audits the `2k` broadcasts of the `(u, v)` repair against an
    /// eavesdropper on the broadcast channels.
    pub fn audit_exact(&self, u: usize, v: usize) -> Result<ExactAudit> {
        let rep = self.repair_exact(u, v)?;
        let sys = self.to_caching_system()?;
        let plan = rep.plan()?;
        let view = secrecy::eavesdropper_view(&sys, &plan, Some(&self.precoder()))?;
        let audit = secrecy::audit(&view, &self.partition())?;
        let gamma = plan.gamma();
        let discrepancy = (audit.leakage_qary > 0).then(|| DiscrepancyRecord {
            k: self.k,
            u,
            v,
            gamma,
            key_rank: audit.key_rank,
            leakage_qary: audit.leakage_qary,
            note: "both broadcast columns carry the same key mask z1 + z2, so their \
                   difference exposes a difference of secret columns"
                .into(),
        });
        Ok(ExactAudit {
            gamma,
            secret_count: self.secret_count(),
            capacity_witness: audit.key_rank == gamma,
            audit,
            discrepancy,
        })
    }
}

/// One broadcast of the exact repair.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExactBroadcast {
    pub node: usize,
    /// 0-based packet index at the sender.
    pub packet: usize,
    /// Coding vector over the `k^2` entries of `S'`.
    pub vector: Vec<Elem>,
    pub value: Elem,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RecoveredPacket {
    pub node: usize,
    pub packet: usize,
    pub value: Elem,
}

/// Transcript of an exact repair.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExactRepair {
    pub u: usize,
    pub v: usize,
    pub broadcasts: Vec<ExactBroadcast>,
    pub recovered: Vec<RecoveredPacket>,
    /// Every recovered value equals the erased one.
    pub exact: bool,
}

impl ExactRepair {
    /// The broadcasts as a generic repair plan over `S'` coordinates.
    pub fn plan(&self) -> Result<RepairPlan> {
        let n = 2 * self.broadcasts.len() / 2;
        RepairPlan::with_broadcasts(
            n,
            self.broadcasts
                .iter()
                .map(|b| Broadcast {
                    sender: b.node,
                    vector: b.vector.clone(),
                })
                .collect(),
        )
    }

    pub fn gamma(&self) -> usize {
        self.broadcasts.len()
    }
}

/// Cross-check of an exact repair through the generic span test.
pub fn verify_with_generic_repair(sys: &ExactSecureSystem, u: usize, v: usize) -> Result<bool> {
    let caching = sys.to_caching_system()?;
    let pattern = sys.erase_uv(u, v)?;
    let plan = sys.repair_exact(u, v)?.plan()?;
    let rec = repair::repair_with_broadcasts(&caching, &pattern, &plan)?;
    Ok(rec
        .iter()
        .all(|r| r.value == Some(sys.stored(r.node, r.packet))))
}

/// Audit of the exact repair broadcasts.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExactAudit {
    pub audit: SecrecyAudit,
    pub gamma: usize,
    pub secret_count: usize,
    /// `rank(B) = Γ`, i.e. `H(Y | secrets) = Γ`.
    pub capacity_witness: bool,
    pub discrepancy: Option<DiscrepancyRecord>,
}

/// Emitted when an exact repair leaks although the construction is meant to
/// be strongly secure.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiscrepancyRecord {
    pub k: usize,
    pub u: usize,
    pub v: usize,
    pub gamma: usize,
    pub key_rank: usize,
    pub leakage_qary: usize,
    pub note: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExactDescriptor {
    pub schema_version: u32,
    pub kind: String,
    pub k: usize,
    pub q: u64,
    pub phi_points: Vec<u64>,
    #[serde(rename = "S")]
    pub secrets: Vec<Vec<u64>>,
    #[serde(rename = "Z")]
    pub keys: Vec<Vec<u64>>,
    #[serde(rename = "Sprime")]
    pub sprime: Vec<Vec<u64>>,
    #[serde(rename = "P")]
    pub parity: Vec<Vec<u64>>,
}

pub const EXACT_KIND: &str = "exact_secure";

impl From<ExactSecureSystem> for ExactDescriptor {
    fn from(s: ExactSecureSystem) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            kind: EXACT_KIND.into(),
            k: s.k,
            q: s.field.p(),
            phi_points: (1..=s.k as u64).collect(),
            secrets: s.secrets.to_rows(),
            keys: s.keys.to_rows(),
            sprime: s.sprime.to_rows(),
            parity: s.parity.to_rows(),
        }
    }
}

impl TryFrom<ExactDescriptor> for ExactSecureSystem {
    type Error = Error;

    fn try_from(d: ExactDescriptor) -> Result<Self> {
        crate::check_schema_version(d.schema_version)?;
        if d.kind != EXACT_KIND {
            return Err(Error::InvalidConfig(format!(
                "kind {:?} is not {EXACT_KIND}",
                d.kind
            )));
        }
        if d.phi_points != (1..=d.k as u64).collect::<Vec<_>>() {
            return Err(Error::InvalidConfig(
                "Vandermonde points must be 1..=k".into(),
            ));
        }
        let f = PrimeField::new(d.q)?;
        let secrets = FieldMatrix::from_rows(f, d.k.saturating_sub(2), &d.secrets)?;
        let keys = FieldMatrix::from_rows(f, 2, &d.keys)?;
        let sys = Self::with_keys(d.k, f, &secrets, &keys)?;
        if sys.sprime.to_rows() != d.sprime || sys.parity.to_rows() != d.parity {
            return Err(Error::InvalidConfig(
                "stored S' or P disagree with S and Z".into(),
            ));
        }
        Ok(sys)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::gf;
    use crate::repair::{gamma_min_bruteforce, gamma_min_formula};
    use num_rational::Ratio;

    fn k3() -> ExactSecureSystem {
        let f = gf(5);
        let s = FieldMatrix::from_rows(f, 1, &[[1], [2], [3]]).unwrap();
        let z = FieldMatrix::from_rows(f, 2, &[[4, 0], [1, 1], [2, 3]]).unwrap();
        ExactSecureSystem::with_keys(3, f, &s, &z).unwrap()
    }

    #[test]
    fn sprime_layout() {
        let sys = k3();
        assert_eq!(
            sys.sprime().to_rows(),
            vec![vec![4, 0, 0], vec![1, 1, 4], vec![2, 3, 3]]
        );
        // P = Φ S' entrywise
        let f = sys.field();
        for i in 0..3 {
            for j in 0..3 {
                let expect = (0..3).fold(0, |acc, m| {
                    f.add(acc, f.mul(sys.phi().get(i, m), sys.sprime().get(m, j)))
                });
                assert_eq!(sys.parity().get(i, j), expect);
            }
        }
        let pre = sys.precoder().apply(&sys.secret_key_vector()).unwrap();
        assert_eq!(pre, sys.sprime().as_slice());
    }

    #[test]
    fn construction_preconditions() {
        let f = gf(5);
        assert!(ExactSecureSystem::random(2, f, 0).is_err());
        assert!(matches!(
            ExactSecureSystem::random(5, f, 0),
            Err(Error::FieldTooSmall { .. })
        ));
        let s = FieldMatrix::zeros(f, 3, 2);
        assert!(ExactSecureSystem::build(3, f, &s, 0).is_err());
        let sys = ExactSecureSystem::random(4, f, 3).unwrap();
        assert_eq!(sys.secret_count(), 8);
    }

    #[test]
    fn mds_depends_on_the_field() {
        let at5 = k3();
        let bad = at5.mds_failures().unwrap();
        // rows {2,3} x cols {1,3} of Φ over GF(5) is singular
        assert!(bad.contains(&vec![1, 4, 5]));
        let at7 = ExactSecureSystem::random(3, gf(7), 0).unwrap();
        assert!(at7.is_mds().unwrap());
    }

    #[test]
    fn erase_uv_pattern() {
        let sys = k3();
        let p = sys.erase_uv(1, 3).unwrap();
        assert_eq!(p.total_surviving(), 12);
        assert_eq!(gamma_min_formula(&p), Ratio::from_integer(6));
        assert_eq!(gamma_min_bruteforce(&p).unwrap(), 6);
        assert!(sys.erase_uv(2, 2).is_err());
        assert!(sys.erase_uv(0, 2).is_err());
        assert!(sys.erase_uv(1, 4).is_err());
    }

    #[test]
    fn repair_is_exact() {
        let sys = k3();
        for (u, v) in [(1, 2), (1, 3), (2, 1), (3, 1), (2, 3), (3, 2)] {
            let rep = sys.repair_exact(u, v).unwrap();
            assert!(rep.exact);
            assert_eq!(rep.gamma(), 6);
            assert!(verify_with_generic_repair(&sys, u, v).unwrap());
        }
    }

    #[test]
    fn audit_small_cases() {
        let sys = k3();
        let a = sys.audit_exact(1, 3).unwrap();
        assert_eq!(a.audit.leakage_qary, 0);
        assert_eq!(a.audit.key_rank, 6);
        assert!(a.capacity_witness && a.discrepancy.is_none());

        let k4 = ExactSecureSystem::random(4, gf(5), 1).unwrap();
        assert_eq!(k4.audit_exact(1, 3).unwrap().audit.leakage_qary, 0);
        let bad = k4.audit_exact(3, 4).unwrap();
        assert_eq!(bad.audit.leakage_qary, 4);
        assert_eq!(bad.audit.key_rank, 4);
        assert!(!bad.capacity_witness);
        assert!(bad.discrepancy.is_some());
    }

    #[test]
    fn descriptor_round_trip_validates() {
        let sys = k3();
        let mut d = ExactDescriptor::from(sys.clone());
        assert_eq!(ExactSecureSystem::try_from(d.clone()).unwrap(), sys);
        d.parity[0][0] = (d.parity[0][0] + 1) % 5;
        assert!(ExactSecureSystem::try_from(d).is_err());
    }
}
