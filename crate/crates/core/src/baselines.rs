//! Reference selections: edge-only, uniform random, and brute force.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::crb::{worst_case_crb, CrbParams, WorstCase};
use crate::{ArrayGeometry, DeltaGrid, Error, Result, Selection};

pub const DEFAULT_EXHAUSTIVE_CAP: u128 = 200_000;

fn check_cardinality(n: usize, m: usize) -> Result<()> {
    if m == 0 || m > n {
        Err(Error::InvalidCardinality { n, m })
    } else {
        Ok(())
    }
}

/// `⌈m/2⌉` sensors from the left end and `⌊m/2⌋` from the right end.
///
/// This is what minimizing the single-target bound picks on a uniform array.
pub fn edge_selection(n: usize, m: usize) -> Result<Selection> {
    check_cardinality(n, m)?;
    let left = m.div_ceil(2);
    let right = m / 2;
    let indices: Vec<usize> = (0..left).chain(n - right..n).collect();
    Selection::from_indices(n, &indices)
}

/// A subset drawn uniformly from all `C(n, m)` subsets.
pub fn random_selection(n: usize, m: usize, seed: u64) -> Result<Selection> {
    check_cardinality(n, m)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let indices = rand::seq::index::sample(&mut rng, n, m).into_vec();
    Selection::from_indices(n, &indices)
}

/// `C(n, k)`; saturates at `u128::MAX` on overflow.
pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // exact: acc * (n - i) is divisible by (i + 1)
        acc = match acc.checked_mul((n - i) as u128) {
            Some(v) => v / (i as u128 + 1),
            None => return u128::MAX,
        };
    }
    acc
}

/// The `rank`-th `k`-subset of `0..n` in lexicographic order.
fn unrank(n: usize, k: usize, mut rank: u128) -> Vec<usize> {
    let mut out = Vec::with_capacity(k);
    let mut next = 0;
    for slot in 0..k {
        let mut i = next;
        loop {
            let below = binomial(n - i - 1, k - slot - 1);
            if rank < below {
                break;
            }
            rank -= below;
            i += 1;
        }
        out.push(i);
        next = i + 1;
    }
    out
}

/// Best selection of size `m` by full enumeration. Ties go to the
/// lexicographically smallest index set.
pub fn exhaustive_best(
    geometry: &ArrayGeometry,
    m: usize,
    grid: &DeltaGrid,
    params: &CrbParams,
    cap: u128,
) -> Result<(Selection, WorstCase)> {
    let n = geometry.len();
    check_cardinality(n, m)?;
    let count = binomial(n, m);
    if count > cap {
        return Err(Error::CapExceeded { count, cap });
    }
    let count = count as u64;
    let (rank, wc) = (0..count)
        .into_par_iter()
        .map(|rank| -> Result<(u64, WorstCase)> {
            let sel = Selection::from_indices(n, &unrank(n, m, rank as u128))?;
            Ok((
                rank,
                worst_case_crb(geometry, &sel.weights(), grid, params)?,
            ))
        })
        .try_reduce_with(|a, b| {
            Ok(if (b.1.value, b.0) < (a.1.value, a.0) {
                b
            } else {
                a
            })
        })
        .expect("at least one subset")?;
    Ok((Selection::from_indices(n, &unrank(n, m, rank as u128))?, wc))
}
