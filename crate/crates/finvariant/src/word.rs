//! Reduced words in a free group of fixed rank.
//!
//! A word stores signed generator indices: `+k` is the k-th generator
//! (1-based), `-k` its inverse. Construction reduces, so no word ever
//! carries an adjacent cancelling pair. The ordering used everywhere is
//! length-lex with letters ordered `s1 < s1^-1 < s2 < s2^-1 < ...`.

use crate::{Error, Result};
use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

/// A reduced word in the free group of the given rank. The empty word is
/// the group identity.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Word {
    rank: usize,
    letters: Vec<i32>,
}

/// Position of a signed letter in the fixed total order
/// `s1 < s1^-1 < s2 < s2^-1 < ...`.
fn letter_order(letter: i32) -> usize {
    let gen = letter.unsigned_abs() as usize;
    (gen - 1) * 2 + usize::from(letter < 0)
}

/// All signed letters of a rank-`r` free group in the fixed order.
pub fn all_letters(rank: usize) -> impl Iterator<Item = i32> {
    (1..=rank as i32).flat_map(|g| [g, -g])
}

impl Word {
    /// The identity element.
    pub fn identity(rank: usize) -> Self {
        Word { rank, letters: Vec::new() }
    }

    /// The word consisting of the single generator `gen` (1-based).
    pub fn generator(rank: usize, gen: usize) -> Self {
        assert!(gen >= 1 && gen <= rank, "generator index out of range");
        Word { rank, letters: vec![gen as i32] }
    }

    /// Builds a word from signed letters, freely reducing as it goes.
    pub fn from_letters<I: IntoIterator<Item = i32>>(rank: usize, letters: I) -> Self {
        let mut out: Vec<i32> = Vec::new();
        for l in letters {
            let gen = l.unsigned_abs() as usize;
            assert!(l != 0 && gen <= rank, "letter {l} out of range for rank {rank}");
            if out.last() == Some(&-l) {
                out.pop();
            } else {
                out.push(l);
            }
        }
        Word { rank, letters: out }
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn letters(&self) -> &[i32] {
        &self.letters
    }

    /// Word length |w|.
    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_identity(&self) -> bool {
        self.letters.is_empty()
    }

    /// Reduced product. Errors when the ranks differ.
    pub fn mul(&self, other: &Word) -> Result<Word> {
        if self.rank != other.rank {
            return Err(Error::RankMismatch(self.rank, other.rank));
        }
        Ok(self.times(other))
    }

    /// Reduced product for callers that already know the ranks agree.
    pub(crate) fn times(&self, other: &Word) -> Word {
        debug_assert_eq!(self.rank, other.rank);
        let mut letters = self.letters.clone();
        for &l in &other.letters {
            if letters.last() == Some(&-l) {
                letters.pop();
            } else {
                letters.push(l);
            }
        }
        Word { rank: self.rank, letters }
    }

    /// Right-multiplication by a single signed letter.
    pub fn push(&self, letter: i32) -> Word {
        let mut letters = self.letters.clone();
        if letters.last() == Some(&-letter) {
            letters.pop();
        } else {
            letters.push(letter);
        }
        Word { rank: self.rank, letters }
    }

    /// Left-multiplication by a single signed letter.
    pub(crate) fn push_front(&self, letter: i32) -> Word {
        let mut letters = Vec::with_capacity(self.letters.len() + 1);
        letters.push(letter);
        for &l in &self.letters {
            if letters.last() == Some(&-l) {
                letters.pop();
            } else {
                letters.push(l);
            }
        }
        Word { rank: self.rank, letters }
    }

    pub fn inverse(&self) -> Word {
        Word {
            rank: self.rank,
            letters: self.letters.iter().rev().map(|l| -l).collect(),
        }
    }

    /// Distance in the right Cayley tree: |g^-1 h|.
    pub fn right_distance(&self, other: &Word) -> usize {
        debug_assert_eq!(self.rank, other.rank);
        // |g^-1 h| = |g| + |h| - 2 * (common prefix length)
        let common = self
            .letters
            .iter()
            .zip(&other.letters)
            .take_while(|(a, b)| a == b)
            .count();
        self.letters.len() + other.letters.len() - 2 * common
    }

    /// Distance in the left Cayley tree: |h g^-1|.
    pub fn left_distance(&self, other: &Word) -> usize {
        debug_assert_eq!(self.rank, other.rank);
        let common = self
            .letters
            .iter()
            .rev()
            .zip(other.letters.iter().rev())
            .take_while(|(a, b)| a == b)
            .count();
        self.letters.len() + other.letters.len() - 2 * common
    }

    /// Vertices of the right-tree geodesic from `self` to `other`,
    /// endpoints included.
    pub fn right_geodesic(&self, other: &Word) -> Vec<Word> {
        debug_assert_eq!(self.rank, other.rank);
        let step = self.inverse().times(other);
        let mut path = Vec::with_capacity(step.len() + 1);
        let mut cur = self.clone();
        path.push(cur.clone());
        for &l in &step.letters {
            cur = cur.push(l);
            path.push(cur.clone());
        }
        path
    }
}

/// Length-lex order: first by word length, then letterwise in the fixed
/// order on signed letters.
impl Ord for Word {
    fn cmp(&self, other: &Self) -> Ordering {
        self.letters
            .len()
            .cmp(&other.letters.len())
            .then_with(|| {
                for (a, b) in self.letters.iter().zip(&other.letters) {
                    match letter_order(*a).cmp(&letter_order(*b)) {
                        Ordering::Equal => continue,
                        ord => return ord,
                    }
                }
                Ordering::Equal
            })
    }
}

impl PartialOrd for Word {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Words print as lowercase letters with uppercase inverses (`a^-1` = "A");
/// the identity prints as "e". Only ranks up to 26 are printable.
impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.letters.is_empty() {
            return write!(f, "e");
        }
        if self.rank > 26 {
            return Err(fmt::Error);
        }
        for &l in &self.letters {
            let idx = (l.unsigned_abs() - 1) as u8;
            let ch = if l > 0 { b'a' + idx } else { b'A' + idx };
            write!(f, "{}", ch as char)?;
        }
        Ok(())
    }
}

/// Parses the display form. The rank is inferred as the largest generator
/// mentioned unless a larger `min_rank` is requested via [`Word::parse`].
impl FromStr for Word {
    type Err = Error;

    fn from_str(s: &str) -> Result<Word> {
        Word::parse(s, 0)
    }
}

impl Word {
    /// Parses a word string, forcing the rank up to at least `min_rank`.
    /// "e" is the identity.
    pub fn parse(s: &str, min_rank: usize) -> Result<Word> {
        if min_rank > 26 {
            return Err(Error::Config(format!("rank {min_rank} exceeds 26")));
        }
        let s = s.trim();
        if s == "e" {
            return Ok(Word::identity(min_rank.max(1)));
        }
        let mut letters = Vec::with_capacity(s.len());
        let mut rank = min_rank;
        for ch in s.chars() {
            let l = match ch {
                'a'..='z' => (ch as i32 - 'a' as i32) + 1,
                'A'..='Z' => -((ch as i32 - 'A' as i32) + 1),
                _ => return Err(Error::Config(format!("bad letter {ch:?} in word {s:?}"))),
            };
            rank = rank.max(l.unsigned_abs() as usize);
            letters.push(l);
        }
        Ok(Word::from_letters(rank, letters))
    }

    /// Re-tags the word with a larger rank (same letters).
    pub fn with_rank(&self, rank: usize) -> Result<Word> {
        let needed = self
            .letters
            .iter()
            .map(|l| l.unsigned_abs() as usize)
            .max()
            .unwrap_or(0);
        if rank < needed {
            return Err(Error::RankMismatch(rank, needed));
        }
        Ok(Word { rank, letters: self.letters.clone() })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(s: &str) -> Word {
        Word::parse(s, 2).unwrap()
    }

    #[test]
    fn mul_cancels() {
        assert_eq!(w("a").mul(&w("A")).unwrap(), w("e"));
        assert_eq!(w("ab").mul(&w("Ba")).unwrap(), w("aa"));
        assert_eq!(w("ab").mul(&w("ba")).unwrap(), w("abba"));
    }

    #[test]
    fn mul_rank_mismatch() {
        let a = Word::generator(2, 1);
        let b = Word::generator(3, 1);
        assert!(matches!(a.mul(&b), Err(Error::RankMismatch(2, 3))));
    }

    #[test]
    fn inverse_is_two_sided() {
        let v = w("abAAb");
        assert!(v.times(&v.inverse()).is_identity());
        assert!(v.inverse().times(&v).is_identity());
    }

    #[test]
    fn display_round_trip() {
        for s in ["e", "a", "A", "abBA", "aaBc"] {
            let v = Word::parse(s, 3).unwrap();
            assert_eq!(Word::parse(&v.to_string(), 3).unwrap(), v);
        }
    }

    #[test]
    fn length_lex_order() {
        // e < a < A < b < B < aa < ab ...
        let mut got = vec![w("ab"), w("A"), w("a"), w("e"), w("aa"), w("B"), w("b")];
        got.sort();
        let want = vec![w("e"), w("a"), w("A"), w("b"), w("B"), w("aa"), w("ab")];
        assert_eq!(got, want);
    }

    #[test]
    fn distances() {
        assert_eq!(w("a").right_distance(&w("ab")), 1);
        assert_eq!(w("e").right_distance(&w("aa")), 2);
        assert_eq!(w("b").right_distance(&w("a")), 2);
        // left tree: b ~ ab via left multiplication by a
        assert_eq!(w("b").left_distance(&w("ab")), 1);
        assert_eq!(w("a").left_distance(&w("ab")), 3);
    }

    #[test]
    fn geodesic_vertices() {
        let path = w("b").right_geodesic(&w("ab"));
        assert_eq!(path, vec![w("b"), w("e"), w("a"), w("ab")]);
    }
}
