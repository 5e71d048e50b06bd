//! Exhaustive information measures for small linear views.
//!
//! Every assignment of the `M` coordinates is enumerated with uniform,
//! independent probability `q^-M`; entropies come straight from the induced
//! joint counts. Nothing here relies on rank arguments, so these functions
//! serve as an independent check of [`super::strong_leakage`] and
//! [`super::weak_flags`].

use std::collections::HashMap;

use super::{EavesdropperView, SecretPartition};
use crate::error::{Error, Result};

/// Largest state space `q^M` the enumeration accepts.
pub const MAX_STATES: u64 = 10_000_000;

/// Entropies (in `log_q` units) measured by enumeration.
#[derive(Debug, Clone, PartialEq)]
pub struct BruteForceLeakage {
    /// `H(secrets)`.
    pub h_secrets: f64,
    /// `H(view)`.
    pub h_view: f64,
    /// `H(secrets | view)`.
    pub h_secrets_given_view: f64,
    /// Per secret: is its conditional distribution uniform for every
    /// observable outcome, i.e. `H(s_i | view) = H(s_i)`?
    pub secret_uniform: Vec<bool>,
}

impl BruteForceLeakage {
    /// `I(secrets; view)`.
    pub fn mutual_information(&self) -> f64 {
        self.h_secrets - self.h_secrets_given_view
    }
}

fn entropy(counts: impl Iterator<Item = u64>, total: u64, q: f64) -> f64 {
    let total_f = total as f64;
    let mut h = 0.0;
    for c in counts {
        let p = c as f64 / total_f;
        h -= p * p.ln();
    }
    h / q.ln()
}

/// Conditional entropy `H(secrets | view)` in `log_q` units.
pub fn entropy_bruteforce(view: &EavesdropperView, partition: &SecretPartition) -> Result<f64> {
    Ok(enumerate(view, partition, false)?.h_secrets_given_view)
}

/// Full enumeration, including the per-secret uniformity test.
pub fn leakage_bruteforce(
    view: &EavesdropperView,
    partition: &SecretPartition,
) -> Result<BruteForceLeakage> {
    enumerate(view, partition, true)
}

fn enumerate(
    view: &EavesdropperView,
    partition: &SecretPartition,
    per_secret: bool,
) -> Result<BruteForceLeakage> {
    let w = view.matrix();
    let f = w.field();
    let q = f.p();
    let m = w.cols();
    if partition.m() != m {
        return Err(Error::Dimension(format!(
            "partition over {} coordinates for a view over {m}",
            partition.m()
        )));
    }
    let states = (0..m).try_fold(1u64, |acc, _| {
        acc.checked_mul(q).filter(|&s| s <= MAX_STATES)
    });
    let Some(states) = states else {
        return Err(Error::SearchSpaceTooLarge(format!(
            "{q}^{m} states exceed {MAX_STATES}"
        )));
    };

    let rows = w.to_rows();
    let secrets = partition.secrets();
    let mut u = vec![0u64; m];

    let mut joint: HashMap<(Vec<u64>, Vec<u64>), u64> = HashMap::new();
    let mut by_view: HashMap<Vec<u64>, u64> = HashMap::new();
    let mut by_secret: HashMap<Vec<u64>, u64> = HashMap::new();
    // (view, secret position, value) -> count
    let mut marginal: HashMap<(Vec<u64>, usize, u64), u64> = HashMap::new();

    for _ in 0..states {
        let e: Vec<u64> = rows.iter().map(|r| f.dot(r, &u)).collect();
        let s: Vec<u64> = secrets.iter().map(|&i| u[i]).collect();
        if per_secret {
            for (pos, &val) in s.iter().enumerate() {
                *marginal.entry((e.clone(), pos, val)).or_default() += 1;
            }
        }
        *by_view.entry(e.clone()).or_default() += 1;
        *by_secret.entry(s.clone()).or_default() += 1;
        *joint.entry((e, s)).or_default() += 1;

        // next assignment, little-endian odometer
        for x in u.iter_mut() {
            *x += 1;
            if *x < q {
                break;
            }
            *x = 0;
        }
    }

    let qf = q as f64;
    let h_joint = entropy(joint.values().copied(), states, qf);
    let h_view = entropy(by_view.values().copied(), states, qf);
    let h_secrets = entropy(by_secret.values().copied(), states, qf);

    let secret_uniform = if per_secret {
        (0..secrets.len())
            .map(|pos| {
                by_view.iter().all(|(e, &ce)| {
                    // uniform iff every value appears exactly ce / q times
                    ce % q == 0
                        && (0..q).all(|val| {
                            marginal.get(&(e.clone(), pos, val)).copied().unwrap_or(0) == ce / q
                        })
                })
            })
            .collect()
    } else {
        Vec::new()
    };

    Ok(BruteForceLeakage {
        h_secrets,
        h_view,
        h_secrets_given_view: h_joint - h_view,
        secret_uniform,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{self, gf};
    use crate::galois::FieldMatrix;

    #[test]
    fn toy_entropy() {
        let w = FieldMatrix::from_rows(gf(3), 4, &[[1, 0, 1, 0], [2, 1, 2, 1]]).unwrap();
        let view = EavesdropperView::new(w);
        let r = leakage_bruteforce(&view, &fixtures::two_key_partition()).unwrap();
        assert!((r.h_secrets - 2.0).abs() < 1e-9);
        assert!((r.h_secrets_given_view - 2.0).abs() < 1e-9);
        assert!((r.h_view - 2.0).abs() < 1e-9);
        assert_eq!(r.secret_uniform, vec![true, true]);

        let plain = leakage_bruteforce(&view, &fixtures::all_secret_partition(4)).unwrap();
        assert!((plain.mutual_information() - 2.0).abs() < 1e-9);
        assert_eq!(plain.secret_uniform, vec![true; 4]);
    }

    #[test]
    fn identity_on_secrets_reveals_everything() {
        let w = FieldMatrix::from_rows(gf(2), 3, &[[1, 0, 0], [0, 1, 0]]).unwrap();
        let part = SecretPartition::new(3, vec![0, 1], vec![2]).unwrap();
        let h = entropy_bruteforce(&EavesdropperView::new(w), &part).unwrap();
        assert!(h.abs() < 1e-12);
    }

    #[test]
    fn empty_view_keeps_full_entropy() {
        let view = EavesdropperView::new(FieldMatrix::zeros(gf(3), 0, 3));
        let part = SecretPartition::new(3, vec![0, 2], vec![1]).unwrap();
        let h = entropy_bruteforce(&view, &part).unwrap();
        assert!((h - 2.0).abs() < 1e-9);
    }

    #[test]
    fn state_space_guard() {
        let view = EavesdropperView::new(FieldMatrix::zeros(gf(11), 1, 8));
        let part = fixtures::all_secret_partition(8);
        assert!(matches!(
            entropy_bruteforce(&view, &part),
            Err(Error::SearchSpaceTooLarge(_))
        ));
    }
}
