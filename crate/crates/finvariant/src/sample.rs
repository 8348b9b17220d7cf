//! Seeded random instances for the verification suites: connected word
//! sets, transitive coset actions, stationary Markov measures, invariant
//! finite actions.

use crate::cayley::{Side, WordSet};
use crate::measure::{FiniteAction, TreeMarkovMeasure};
use crate::subgroup::{CosetAction, Perm};
use crate::word::{all_letters, Word};
use rand::seq::SliceRandom;
use rand::Rng;

/// A random reduced word of exactly the given length.
pub fn random_word(rng: &mut impl Rng, rank: usize, len: usize) -> Word {
    let mut letters = Vec::with_capacity(len);
    let mut last = 0i32;
    for _ in 0..len {
        loop {
            let g = rng.gen_range(1..=rank as i32);
            let l = if rng.gen_bool(0.5) { g } else { -g };
            if l != -last {
                letters.push(l);
                last = l;
                break;
            }
        }
    }
    Word::from_letters(rank, letters)
}

/// Grows a connected set from the identity by repeatedly adjoining a tree
/// neighbour of a random member. `within` optionally confines the growth.
pub fn random_connected_set(
    rng: &mut impl Rng,
    rank: usize,
    size: usize,
    side: Side,
    within: Option<&WordSet>,
) -> WordSet {
    let mut words = vec![Word::identity(rank)];
    let mut tries = 0;
    while words.len() < size && tries < 200 {
        tries += 1;
        let g = words.choose(rng).expect("set starts non-empty").clone();
        let l = *all_letters(rank)
            .collect::<Vec<_>>()
            .choose(rng)
            .expect("letters exist");
        let candidate = match side {
            Side::Right => g.push(l),
            Side::Left => g.push_front(l),
        };
        if let Some(bound) = within {
            if !bound.contains(&candidate) {
                continue;
            }
        }
        if !words.contains(&candidate) {
            words.push(candidate);
        }
    }
    WordSet::new(rank, words).expect("grown set shares the rank")
}

/// Grows a set that stays connected in both trees. Growth is by
/// accept-reject, so the result may come out smaller than requested.
pub fn random_bi_connected_set(rng: &mut impl Rng, rank: usize, size: usize) -> WordSet {
    let mut set = WordSet::singleton(Word::identity(rank));
    let mut tries = 0;
    while set.len() < size && tries < 400 {
        tries += 1;
        let g = set.words().choose(rng).expect("set starts non-empty").clone();
        let l = *all_letters(rank)
            .collect::<Vec<_>>()
            .choose(rng)
            .expect("letters exist");
        let candidate = if rng.gen_bool(0.5) { g.push(l) } else { g.push_front(l) };
        if set.contains(&candidate) {
            continue;
        }
        let grown = set.union(&WordSet::singleton(candidate));
        if grown.is_connected(Side::Right) && grown.is_connected(Side::Left) {
            set = grown;
        }
    }
    set
}

/// A random transitive coset action of the given index.
pub fn random_transitive_action(rng: &mut impl Rng, rank: usize, index: usize) -> CosetAction {
    loop {
        let perms: Vec<Perm> = (0..rank)
            .map(|_| {
                let mut images: Vec<usize> = (0..index).collect();
                images.shuffle(rng);
                Perm::new(images).expect("shuffle is a bijection")
            })
            .collect();
        if let Ok(act) = CosetAction::new(rank, perms) {
            return act;
        }
    }
}

/// A random stationary tree-Markov measure with strictly positive
/// stationary vector.
///
/// Each pair marginal starts from the independent coupling pi x pi and is
/// perturbed by rectangle moves (add mass on two opposite corners of a
/// rectangle, remove it from the other two), which keep both margins
/// exactly equal to pi while making the joint non-symmetric. Transition
/// rows are the conditionals.
pub fn random_markov(rng: &mut impl Rng, rank: usize, m: usize) -> TreeMarkovMeasure {
    let raw: Vec<f64> = (0..m).map(|_| rng.gen_range(0.25..1.0)).collect();
    let total: f64 = raw.iter().sum();
    let pi: Vec<f64> = raw.iter().map(|x| x / total).collect();
    let mut trans = Vec::with_capacity(rank);
    for _ in 0..rank {
        let mut joint: Vec<Vec<f64>> = pi
            .iter()
            .map(|&a| pi.iter().map(|&b| a * b).collect())
            .collect();
        if m >= 2 {
            for _ in 0..(6 * m) {
                let a = rng.gen_range(0..m);
                let b = rng.gen_range(0..m);
                let a2 = (a + rng.gen_range(1..m)) % m;
                let b2 = (b + rng.gen_range(1..m)) % m;
                let room = joint[a2][b].min(joint[a][b2]);
                let eps = rng.gen_range(0.0..0.8) * room;
                joint[a][b] += eps;
                joint[a2][b2] += eps;
                joint[a2][b] -= eps;
                joint[a][b2] -= eps;
            }
        }
        let mat: Vec<Vec<f64>> = joint
            .iter()
            .zip(&pi)
            .map(|(row, &pa)| row.iter().map(|&p| p / pa).collect())
            .collect();
        trans.push(mat);
    }
    TreeMarkovMeasure::new(pi, trans).expect("rectangle moves preserve the margins")
}

/// A random finite action: random generator permutations, a measure that
/// is constant on orbits (hence exactly invariant), and a base partition
/// with every cell inhabited.
pub fn random_finite_action(
    rng: &mut impl Rng,
    rank: usize,
    n: usize,
    max_cells: usize,
) -> FiniteAction {
    let perms: Vec<Perm> = (0..rank)
        .map(|_| {
            let mut images: Vec<usize> = (0..n).collect();
            images.shuffle(rng);
            Perm::new(images).expect("shuffle is a bijection")
        })
        .collect();
    // orbits of the generated group
    let mut orbit = vec![usize::MAX; n];
    let mut orbits = 0;
    for start in 0..n {
        if orbit[start] != usize::MAX {
            continue;
        }
        let mut stack = vec![start];
        orbit[start] = orbits;
        while let Some(x) = stack.pop() {
            for p in &perms {
                for y in [p.apply(x), p.inverse().apply(x)] {
                    if orbit[y] == usize::MAX {
                        orbit[y] = orbits;
                        stack.push(y);
                    }
                }
            }
        }
        orbits += 1;
    }
    let weights: Vec<f64> = (0..orbits).map(|_| rng.gen_range(0.3..1.0)).collect();
    let wtotal: f64 = weights.iter().sum();
    let mut orbit_size = vec![0usize; orbits];
    for &o in &orbit {
        orbit_size[o] += 1;
    }
    let mu: Vec<f64> = orbit
        .iter()
        .map(|&o| weights[o] / wtotal / orbit_size[o] as f64)
        .collect();
    // random labels, compacted in order of first appearance
    let raw: Vec<usize> = (0..n).map(|_| rng.gen_range(0..max_cells.max(1))).collect();
    let mut ids = std::collections::HashMap::new();
    let alpha: Vec<usize> = raw
        .iter()
        .map(|&c| {
            let next = ids.len();
            *ids.entry(c).or_insert(next)
        })
        .collect();
    FiniteAction::new(rank, perms, mu, alpha).expect("orbit-constant measures are invariant")
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn generators_are_well_formed() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let w = random_word(&mut rng, 2, 6);
            assert_eq!(w.len(), 6);

            let left = random_connected_set(&mut rng, 2, 5, Side::Left, None);
            assert!(left.is_connected(Side::Left));

            let bi = random_bi_connected_set(&mut rng, 2, 5);
            assert!(bi.is_connected(Side::Right) && bi.is_connected(Side::Left));

            let act = random_transitive_action(&mut rng, 2, 4);
            assert_eq!(act.index(), 4);

            let tm = random_markov(&mut rng, 2, 3);
            assert_eq!(tm.alphabet_size(), 3);

            let fa = random_finite_action(&mut rng, 2, 5, 3);
            assert_eq!(fa.size(), 5);
        }
    }

    #[test]
    fn seeded_runs_repeat() {
        let mut a = ChaCha8Rng::seed_from_u64(42);
        let mut b = ChaCha8Rng::seed_from_u64(42);
        let ta = random_markov(&mut a, 2, 3);
        let tb = random_markov(&mut b, 2, 3);
        assert_eq!(ta.pi(), tb.pi());
        assert_eq!(ta.transition(1), tb.transition(1));
    }
}
