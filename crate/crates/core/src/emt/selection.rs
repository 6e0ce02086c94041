use std::cmp::Ordering;

use rand::seq::IndexedRandom;
use rand::Rng;

/// Draws `size` distinct entries of `pool` (all of them if fewer) and returns
/// the best under `cmp`, where `Less` means better.
pub fn tournament_pick<R, F>(pool: &[usize], size: usize, rng: &mut R, cmp: F) -> Option<usize>
where
    R: Rng + ?Sized,
    F: Fn(usize, usize) -> Ordering,
{
    pool.choose_multiple(rng, size.max(1).min(pool.len()))
        .copied()
        .min_by(|&a, &b| cmp(a, b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed::rng_for;

    #[test]
    fn full_tournament_returns_best() {
        let pool = [4, 2, 9, 7];
        let best = tournament_pick(&pool, 4, &mut rng_for(1), |a, b| a.cmp(&b));
        assert_eq!(best, Some(2));
    }

    #[test]
    fn empty_pool_has_no_winner() {
        assert_eq!(tournament_pick(&[], 2, &mut rng_for(1), |a: usize, b| a.cmp(&b)), None);
    }

    #[test]
    fn winner_is_never_worse_than_a_random_pick() {
        // A size-2 tournament never returns the worst entry of a pool of 3+.
        let pool: Vec<usize> = (0..5).collect();
        for s in 0..200 {
            let w = tournament_pick(&pool, 2, &mut rng_for(s), |a, b| a.cmp(&b)).unwrap();
            assert_ne!(w, 4);
        }
    }
}
