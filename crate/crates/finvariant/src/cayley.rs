//! Exact combinatorics of the right and left Cayley trees of a free group.
//!
//! The right tree joins g to gs, the left tree joins g to sg, for
//! s a generator or an inverse generator. Both are trees because the
//! generating set is free. Left-sided questions are answered by inverting
//! every word and asking the right-sided question: g ~ sg on the left
//! exactly when g^-1 ~ g^-1 s^-1 on the right.

use crate::word::{all_letters, Word};
use crate::{Error, Result};
use std::collections::{HashMap, HashSet, VecDeque};
use std::fmt;

/// Which Cayley tree a connectivity notion refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Right,
    Left,
}

/// A finite set of reduced words of common rank, kept sorted in
/// length-lex order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WordSet {
    rank: usize,
    words: Vec<Word>,
}

impl WordSet {
    pub fn new<I: IntoIterator<Item = Word>>(rank: usize, words: I) -> Result<Self> {
        let mut v: Vec<Word> = Vec::new();
        for w in words {
            if w.rank() != rank {
                return Err(Error::RankMismatch(rank, w.rank()));
            }
            v.push(w);
        }
        v.sort();
        v.dedup();
        Ok(WordSet { rank, words: v })
    }

    pub fn from_words(words: Vec<Word>) -> Result<Self> {
        let rank = words.first().map(|w| w.rank()).unwrap_or(1);
        WordSet::new(rank, words)
    }

    pub fn singleton(w: Word) -> Self {
        WordSet { rank: w.rank(), words: vec![w] }
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    /// Words in canonical (length-lex) enumeration order.
    pub fn words(&self) -> &[Word] {
        &self.words
    }

    pub fn contains(&self, w: &Word) -> bool {
        self.words.binary_search(w).is_ok()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Word> {
        self.words.iter()
    }

    /// Left translate { g w : w in self }.
    pub fn left_mul(&self, g: &Word) -> WordSet {
        WordSet::new(self.rank, self.words.iter().map(|w| g.times(w))).unwrap()
    }

    /// Right translate { w g : w in self }.
    pub fn right_mul(&self, g: &Word) -> WordSet {
        WordSet::new(self.rank, self.words.iter().map(|w| w.times(g))).unwrap()
    }

    pub fn union(&self, other: &WordSet) -> WordSet {
        WordSet::new(
            self.rank,
            self.words.iter().chain(other.words.iter()).cloned(),
        )
        .unwrap()
    }

    /// The set { w^-1 : w in self }.
    pub fn inverses(&self) -> WordSet {
        WordSet::new(self.rank, self.words.iter().map(|w| w.inverse())).unwrap()
    }

    pub fn is_connected(&self, side: Side) -> bool {
        self.is_empty() || connected_components(self, side).len() == 1
    }
}

impl fmt::Display for WordSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, w) in self.words.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{w}")?;
        }
        write!(f, "}}")
    }
}

/// The ball of radius `n` around the identity, enumerated in length-lex
/// order with letters ordered s1 < s1^-1 < s2 < s2^-1 < ...
pub fn ball(rank: usize, n: usize) -> WordSet {
    let mut words = vec![Word::identity(rank)];
    let mut sphere = vec![Word::identity(rank)];
    for _ in 0..n {
        let mut next = Vec::new();
        for w in &sphere {
            let last = w.letters().last().copied();
            for l in all_letters(rank) {
                if last == Some(-l) {
                    continue;
                }
                next.push(w.push(l));
            }
        }
        words.extend(next.iter().cloned());
        sphere = next;
    }
    // enumeration above is already sorted; WordSet::new just re-checks
    WordSet::new(rank, words).unwrap()
}

/// True when `v` lies on the right-tree geodesic from `g` to `h`.
pub fn on_geodesic(v: &Word, g: &Word, h: &Word) -> bool {
    g.right_distance(v) + v.right_distance(h) == g.right_distance(h)
}

/// True when every right path from a point of `u` to a point of `w`
/// passes through `v`.
pub fn separates(v: &WordSet, u: &WordSet, w: &WordSet) -> bool {
    u.iter().all(|a| {
        w.iter()
            .all(|b| v.iter().any(|mid| on_geodesic(mid, a, b)))
    })
}

/// Partition of `f` into maximal connected pieces of the chosen tree.
/// Components come out sorted by their least element.
pub fn connected_components(f: &WordSet, side: Side) -> Vec<WordSet> {
    let rank = f.rank();
    let index: HashMap<&Word, usize> =
        f.iter().enumerate().map(|(i, w)| (w, i)).collect();
    let mut seen = vec![false; f.len()];
    let mut components = Vec::new();
    for start in 0..f.len() {
        if seen[start] {
            continue;
        }
        let mut comp = Vec::new();
        let mut queue = VecDeque::from([start]);
        seen[start] = true;
        while let Some(i) = queue.pop_front() {
            let w = &f.words()[i];
            comp.push(w.clone());
            for l in all_letters(rank) {
                let nbr = match side {
                    Side::Right => w.push(l),
                    Side::Left => w.push_front(l),
                };
                if let Some(&j) = index.get(&nbr) {
                    if !seen[j] {
                        seen[j] = true;
                        queue.push_back(j);
                    }
                }
            }
        }
        components.push(WordSet::new(rank, comp).unwrap());
    }
    components
}

/// Per-generator counts of right edges (g, gs) with both ends inside `f`.
/// For a right-connected set the counts total |f| - 1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeVector {
    counts: Vec<u64>,
}

impl EdgeVector {
    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// The same data as a signed formal sum over the generators.
    pub fn to_sum(&self) -> GenSum {
        GenSum { coeffs: self.counts.iter().map(|&c| c as i64).collect() }
    }
}

pub fn edge_vector(f: &WordSet) -> EdgeVector {
    let rank = f.rank();
    let mut counts = vec![0u64; rank];
    for w in f.iter() {
        for s in 1..=rank {
            if f.contains(&w.push(s as i32)) {
                counts[s - 1] += 1;
            }
        }
    }
    EdgeVector { counts }
}

/// A formal integer combination of the generators, the value space of the
/// edge-count identities.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GenSum {
    coeffs: Vec<i64>,
}

impl GenSum {
    pub fn zero(rank: usize) -> Self {
        GenSum { coeffs: vec![0; rank] }
    }

    /// The sum of all generators with coefficient one.
    pub fn ones(rank: usize) -> Self {
        GenSum { coeffs: vec![1; rank] }
    }

    pub fn coeffs(&self) -> &[i64] {
        &self.coeffs
    }

    pub fn add(&self, other: &GenSum) -> GenSum {
        GenSum {
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn sub(&self, other: &GenSum) -> GenSum {
        GenSum {
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    pub fn scale(&self, k: i64) -> GenSum {
        GenSum { coeffs: self.coeffs.iter().map(|a| a * k).collect() }
    }

    /// Adds one to the coefficient of generator `s` (1-based).
    pub fn bump(&self, s: usize) -> GenSum {
        let mut coeffs = self.coeffs.clone();
        coeffs[s - 1] += 1;
        GenSum { coeffs }
    }
}

impl fmt::Display for GenSum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate() {
            if *c == 0 {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "{c}*{}", (b'a' + i as u8) as char)?;
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

/// The smallest connected superset of `f` in the chosen tree: the union of
/// all geodesics between members.
pub fn tree_hull(f: &WordSet, side: Side) -> WordSet {
    match side {
        Side::Right => right_hull(f),
        Side::Left => right_hull(&f.inverses()).inverses(),
    }
}

fn right_hull(f: &WordSet) -> WordSet {
    if f.is_empty() {
        return f.clone();
    }
    let base = &f.words()[0];
    let mut out: HashSet<Word> = HashSet::new();
    for w in f.iter() {
        for v in base.right_geodesic(w) {
            out.insert(v);
        }
    }
    WordSet::new(f.rank(), out).unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(s: &str) -> Word {
        Word::parse(s, 2).unwrap()
    }

    fn set(words: &[&str]) -> WordSet {
        WordSet::new(2, words.iter().map(|s| w(s))).unwrap()
    }

    #[test]
    fn ball_sizes() {
        assert_eq!(ball(2, 0).len(), 1);
        assert_eq!(ball(2, 1).len(), 5);
        assert_eq!(ball(2, 2).len(), 17);
        assert_eq!(ball(3, 1).len(), 7);
        // |B(n)| = |B(n-1)| + 2r (2r-1)^{n-1}
        for r in 2..=3 {
            for n in 2..=3 {
                let expect =
                    ball(r, n - 1).len() + 2 * r * (2 * r - 1).pow(n as u32 - 1);
                assert_eq!(ball(r, n).len(), expect);
            }
        }
    }

    #[test]
    fn ball_enumeration_is_length_lex() {
        let b = ball(2, 2);
        let mut sorted = b.words().to_vec();
        sorted.sort();
        assert_eq!(b.words(), &sorted[..]);
        assert_eq!(b.words()[0], w("e"));
        assert_eq!(b.words()[1], w("a"));
        assert_eq!(b.words()[2], w("A"));
    }

    #[test]
    fn geodesic_membership() {
        assert!(on_geodesic(&w("e"), &w("A"), &w("b")));
        assert!(on_geodesic(&w("a"), &w("e"), &w("ab")));
        assert!(!on_geodesic(&w("b"), &w("e"), &w("aa")));
    }

    #[test]
    fn separation_examples() {
        assert!(separates(&set(&["e"]), &set(&["a"]), &set(&["b"])));
        assert!(separates(&set(&["a"]), &set(&["aa"]), &set(&["e", "b"])));
        assert!(!separates(&set(&["b"]), &set(&["a"]), &set(&["aa"])));
    }

    #[test]
    fn components_right_and_left() {
        assert_eq!(connected_components(&set(&["e", "a", "ab"]), Side::Right).len(), 1);
        assert_eq!(connected_components(&set(&["e", "aa"]), Side::Right).len(), 2);
        // ab is not left-adjacent to a or e, while a = a*e is left-adjacent to e
        let comps = connected_components(&set(&["e", "a", "ab"]), Side::Left);
        assert_eq!(comps.len(), 2);
        assert_eq!(comps[0], set(&["e", "a"]));
        assert_eq!(comps[1], set(&["ab"]));
    }

    #[test]
    fn edge_counts() {
        assert_eq!(edge_vector(&set(&["e"])).counts(), &[0, 0]);
        assert_eq!(edge_vector(&set(&["e", "a", "ab"])).counts(), &[1, 1]);
        // B(1): pairs (e,a), (A,e) for a; (e,b), (B,e) for b
        assert_eq!(edge_vector(&ball(2, 1)).counts(), &[2, 2]);
    }

    #[test]
    fn hulls() {
        assert_eq!(tree_hull(&set(&["e", "a"]), Side::Right), set(&["e", "a"]));
        assert_eq!(tree_hull(&set(&["e", "aa"]), Side::Right), set(&["e", "a", "aa"]));
        assert_eq!(
            tree_hull(&set(&["b", "ab"]), Side::Right),
            set(&["b", "e", "a", "ab"])
        );
        // left hull fills in suffixes
        assert_eq!(tree_hull(&set(&["e", "ab"]), Side::Left), set(&["e", "b", "ab"]));
    }
}
