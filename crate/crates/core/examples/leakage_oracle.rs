use partial_repair::galois::{FieldMatrix, PrimeField};
use partial_repair::secrecy::oracle::leakage_bruteforce;
use partial_repair::secrecy::{strong_leakage, weak_flags, EavesdropperView, SecretPartition};
use partial_repair::seeded_rng;

/// Rank identity against exhaustive enumeration on a few random views.
fn main() -> partial_repair::Result<()> {
    let f = PrimeField::new(3)?;
    let part = SecretPartition::new(5, vec![0, 1, 2], vec![3, 4])?;
    let mut rng = seeded_rng(1);
    for rows in 0..=4 {
        let view = EavesdropperView::new(FieldMatrix::random(f, rows, 5, &mut rng));
        let rank = strong_leakage(&view, &part)?;
        let e = leakage_bruteforce(&view, &part)?;
        println!(
            "{rows} rows: rank leakage {rank}, enumerated {:.6}, weak {:?} / {:?}",
            e.mutual_information(),
            weak_flags(&view, &part)?,
            e.secret_uniform
        );
    }
    Ok(())
}
