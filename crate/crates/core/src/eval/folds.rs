use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Recording indices of one cross-validation split.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fold {
    pub id: usize,
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

/// Recording-level k-fold partition with a seeded shuffle. Cell sizes
/// differ by at most one; the larger cells come first.
pub fn make_folds(n_recordings: usize, k: usize, seed: u64) -> Result<Vec<Fold>> {
    if k == 0 || n_recordings < k {
        return Err(Error::TooFewRecordings {
            have: n_recordings,
            needed: k.max(1),
        });
    }
    let mut order: Vec<usize> = (0..n_recordings).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));

    let base = n_recordings / k;
    let extra = n_recordings % k;
    let mut folds = Vec::with_capacity(k);
    let mut start = 0;
    for id in 0..k {
        let size = base + usize::from(id < extra);
        let mut test = order[start..start + size].to_vec();
        test.sort_unstable();
        let mut train: Vec<usize> = order[..start].iter().chain(&order[start + size..]).copied().collect();
        train.sort_unstable();
        folds.push(Fold { id, train, test });
        start += size;
    }
    Ok(folds)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nine_into_six() {
        let folds = make_folds(9, 6, 1).unwrap();
        let sizes: Vec<usize> = folds.iter().map(|f| f.test.len()).collect();
        assert_eq!(sizes, [2, 2, 2, 1, 1, 1]);
        let mut all: Vec<usize> = folds.iter().flat_map(|f| f.test.clone()).collect();
        all.sort_unstable();
        assert_eq!(all, (0..9).collect::<Vec<_>>());
        for f in &folds {
            assert_eq!(f.train.len() + f.test.len(), 9);
            assert!(f.test.iter().all(|t| !f.train.contains(t)));
        }
    }

    #[test]
    fn leave_one_out() {
        let folds = make_folds(5, 5, 0).unwrap();
        assert!(folds.iter().all(|f| f.test.len() == 1 && f.train.len() == 4));
    }

    #[test]
    fn seeded() {
        assert_eq!(make_folds(9, 6, 4).unwrap(), make_folds(9, 6, 4).unwrap());
        assert!(matches!(make_folds(3, 6, 0), Err(Error::TooFewRecordings { have: 3, needed: 6 })));
    }
}
