//! Shannon entropy kernels and the finite entropy functional
//!
//!   F(beta) = (1 - 2r) H(beta) + sum_w H(w beta v beta)
//!
//! over a list of r acting generator words, together with its limit over
//! balls, which is the entropy invariant computed by this crate. The same
//! code runs over the group itself (single-letter generators) and over a
//! finite-index subgroup (Schreier generators), which is what makes the
//! subgroup formula directly checkable.

use crate::cayley::{edge_vector, Side, WordSet};
use crate::measure::{FiniteAction, TreeMarkovMeasure, DEFAULT_TUPLE_CAP};
use crate::word::Word;
use crate::{Error, Result};
use serde::{Deserialize, Serialize};

/// Tolerance for equalities checked across two computation routes.
pub const CROSS_TOL: f64 = 1e-9;
/// Tolerance for pure floating-point arithmetic identities.
pub const EXACT_TOL: f64 = 1e-12;

/// Shannon entropy of a probability vector, in nats. Zero entries
/// contribute zero.
pub fn shannon(dist: &[f64]) -> Result<f64> {
    if dist.iter().any(|&p| p < 0.0) {
        return Err(Error::NotADistribution("negative entry".into()));
    }
    let total: f64 = dist.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::NotADistribution(format!("entries sum to {total}")));
    }
    Ok(dist
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| -p * p.ln())
        .sum())
}

fn entropy_unchecked(dist: &[f64]) -> f64 {
    dist.iter().filter(|&&p| p > 0.0).map(|&p| -p * p.ln()).sum()
}

/// Conditional entropy H(A | B) of a joint distribution joint[a][b]:
/// the joint entropy minus the entropy of the B-marginal.
pub fn conditional_shannon(joint: &[Vec<f64>]) -> Result<f64> {
    let mut flat = Vec::new();
    let cols = joint.first().map(Vec::len).unwrap_or(0);
    let mut b_marginal = vec![0.0; cols];
    for row in joint {
        if row.len() != cols {
            return Err(Error::NotADistribution("ragged joint".into()));
        }
        for (b, &p) in row.iter().enumerate() {
            b_marginal[b] += p;
            flat.push(p);
        }
    }
    Ok(shannon(&flat)? - entropy_unchecked(&b_marginal))
}

/// The list of words acting as generators in the entropy functional. Over
/// the group itself these are the single letters; over a subgroup, its
/// Schreier generators. The declared rank is the list length.
#[derive(Debug, Clone)]
pub struct GenSet {
    words: Vec<Word>,
}

impl GenSet {
    pub fn new(words: Vec<Word>) -> Result<GenSet> {
        if words.is_empty() {
            return Err(Error::BadGenSet("empty generator list".into()));
        }
        let rank = words[0].rank();
        for w in &words {
            if w.rank() != rank {
                return Err(Error::RankMismatch(rank, w.rank()));
            }
            if w.is_identity() {
                return Err(Error::BadGenSet("identity in generator list".into()));
            }
        }
        let mut sorted = words.clone();
        sorted.sort();
        sorted.dedup();
        if sorted.len() != words.len() {
            return Err(Error::BadGenSet("duplicate generator".into()));
        }
        Ok(GenSet { words })
    }

    /// The single-letter generators of a rank-r free group.
    pub fn letters(rank: usize) -> GenSet {
        GenSet {
            words: (1..=rank).map(|s| Word::generator(rank, s)).collect(),
        }
    }

    pub fn words(&self) -> &[Word] {
        &self.words
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn word_rank(&self) -> usize {
        self.words[0].rank()
    }
}

/// Per-generator contribution H(w beta v beta) to the functional.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct GenTerm {
    pub gen: String,
    pub join_entropy: f64,
}

/// The result of an entropy computation: the functional value, its
/// breakdown, the sequence over balls when a limit was taken, and whether
/// the sequence provably stopped moving.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct EntropyReport {
    pub value: f64,
    pub base_entropy: f64,
    pub terms: Vec<GenTerm>,
    pub sequence: Vec<f64>,
    pub stabilized: bool,
}

impl EntropyReport {
    /// Internal consistency: value = (1 - 2r) H(beta) + sum of terms.
    pub fn is_consistent(&self) -> bool {
        let r = self.terms.len() as f64;
        let recomputed = (1.0 - 2.0 * r) * self.base_entropy
            + self.terms.iter().map(|t| t.join_entropy).sum::<f64>();
        (recomputed - self.value).abs() <= 1e-9 * (1.0 + self.value.abs())
    }
}

/// Either measure class, borrowed.
#[derive(Clone, Copy)]
pub enum MeasureRef<'a> {
    Markov(&'a TreeMarkovMeasure),
    Finite(&'a FiniteAction),
}

impl MeasureRef<'_> {
    pub fn rank(&self) -> usize {
        match self {
            MeasureRef::Markov(tm) => tm.rank(),
            MeasureRef::Finite(fa) => fa.rank(),
        }
    }

    /// H(F alpha) for a finite word set F.
    fn set_entropy(&self, words: &[Word], cap: f64) -> Result<f64> {
        match self {
            MeasureRef::Markov(tm) => tm.join_entropy(words, cap),
            MeasureRef::Finite(fa) => Ok(fa.join_entropy(words)),
        }
    }
}

/// The finite functional F with base partition beta = base alpha:
/// (1 - 2r) H(beta) + sum over generator words w of H(w beta v beta).
pub fn big_f(measure: MeasureRef, gens: &GenSet, base: &WordSet) -> Result<EntropyReport> {
    big_f_capped(measure, gens, base, DEFAULT_TUPLE_CAP)
}

pub fn big_f_capped(
    measure: MeasureRef,
    gens: &GenSet,
    base: &WordSet,
    cap: f64,
) -> Result<EntropyReport> {
    if base.is_empty() {
        return Err(Error::Config("empty base set".into()));
    }
    if gens.word_rank() != measure.rank() {
        return Err(Error::RankMismatch(measure.rank(), gens.word_rank()));
    }
    let r = gens.len();
    let base_entropy = measure.set_entropy(base.words(), cap)?;
    let mut terms = Vec::with_capacity(r);
    let mut total = (1.0 - 2.0 * r as f64) * base_entropy;
    for w in gens.words() {
        let joined = base.left_mul(w).union(base);
        let h = measure.set_entropy(joined.words(), cap)?;
        total += h;
        terms.push(GenTerm { gen: w.to_string(), join_entropy: h });
    }
    Ok(EntropyReport {
        value: total,
        base_entropy,
        terms,
        sequence: Vec::new(),
        stabilized: false,
    })
}

/// Closed-form entropy of a tree-Markov measure:
/// (1 - 2r) H(pi) + sum_s H(pi-weighted joint of the s-edge). Equals the
/// functional with base {identity}, and equals the ball limit because the
/// sequence is constant for these measures.
pub fn f_markov(tm: &TreeMarkovMeasure) -> f64 {
    let r = tm.rank();
    let m = tm.alphabet_size();
    let h_pi = entropy_unchecked(tm.pi());
    let mut value = (1.0 - 2.0 * r as f64) * h_pi;
    for s in 1..=r {
        let mat = tm.transition(s);
        let mut acc = 0.0;
        for a in 0..m {
            for b in 0..m {
                let p = tm.pi()[a] * mat[a][b];
                if p > 0.0 {
                    acc -= p * p.ln();
                }
            }
        }
        value += acc;
    }
    value
}

/// Balls of the word metric spanned by a generator list:
/// B(0) = {e}, B(n+1) = B(n) u union of t B(n) over t and t^-1.
pub fn gens_ball(gens: &GenSet, n: usize) -> WordSet {
    let rank = gens.word_rank();
    let mut ball = WordSet::singleton(Word::identity(rank));
    for _ in 0..n {
        let mut next = ball.clone();
        for t in gens.words() {
            next = next.union(&ball.left_mul(t));
            next = next.union(&ball.left_mul(&t.inverse()));
        }
        ball = next;
    }
    ball
}

/// The entropy invariant as a limit of F over balls in the generators'
/// word metric.
///
/// The sequence is checked to be non-increasing (it always is; a numeric
/// violation is reported as an internal error). For a finite action the
/// iteration stops as soon as the join partition stops refining, which
/// makes every later term equal and the reported value exact. For a
/// tree-Markov measure the sequence is constant; `stabilized` records that
/// the computed prefix agreed to within tolerance.
pub fn f_limit(
    measure: MeasureRef,
    gens: &GenSet,
    n_max: usize,
) -> Result<EntropyReport> {
    f_limit_capped(measure, gens, n_max, DEFAULT_TUPLE_CAP)
}

pub fn f_limit_capped(
    measure: MeasureRef,
    gens: &GenSet,
    n_max: usize,
    cap: f64,
) -> Result<EntropyReport> {
    match measure {
        MeasureRef::Markov(_) => f_limit_markov(measure, gens, n_max, cap),
        MeasureRef::Finite(fa) => f_limit_finite(fa, gens, n_max),
    }
}

fn check_monotone(sequence: &[f64]) -> Result<()> {
    for pair in sequence.windows(2) {
        if pair[1] > pair[0] + EXACT_TOL {
            return Err(Error::Internal(format!(
                "ball sequence increased: {} -> {}",
                pair[0], pair[1]
            )));
        }
    }
    Ok(())
}

fn f_limit_markov(
    measure: MeasureRef,
    gens: &GenSet,
    n_max: usize,
    cap: f64,
) -> Result<EntropyReport> {
    let mut sequence = Vec::with_capacity(n_max + 1);
    let mut last = None;
    for n in 0..=n_max {
        let ball = gens_ball(gens, n);
        let report = big_f_capped(measure, gens, &ball, cap)?;
        sequence.push(report.value);
        last = Some(report);
    }
    check_monotone(&sequence)?;
    let mut report = last.expect("at least the radius-0 ball was computed");
    let spread = sequence
        .iter()
        .map(|v| (v - sequence[0]).abs())
        .fold(0.0, f64::max);
    report.stabilized = spread <= CROSS_TOL;
    report.sequence = sequence;
    Ok(report)
}

/// Finite actions iterate partitions directly: the join over the radius-n
/// ball is alpha joined with every one-step translate of the previous
/// partition. Cell labels are canonicalized, so literal equality of label
/// vectors is equality of set partitions, and equality at one step keeps
/// every later ball partition (and so every later F term) fixed.
fn f_limit_finite(fa: &FiniteAction, gens: &GenSet, n_max: usize) -> Result<EntropyReport> {
    if gens.word_rank() != fa.rank() {
        return Err(Error::RankMismatch(fa.rank(), gens.word_rank()));
    }
    let size = fa.size();
    let fwd: Vec<Vec<usize>> = gens
        .words()
        .iter()
        .map(|t| (0..size).map(|x| fa.apply_word(t, x)).collect())
        .collect();
    let inv: Vec<Vec<usize>> = gens
        .words()
        .iter()
        .map(|t| {
            let ti = t.inverse();
            (0..size).map(|x| fa.apply_word(&ti, x)).collect()
        })
        .collect();

    let canonical = |raw: &[Vec<usize>]| -> Vec<usize> {
        let mut ids: std::collections::HashMap<&[usize], usize> = Default::default();
        raw.iter()
            .map(|t| {
                let next = ids.len();
                *ids.entry(t.as_slice()).or_insert(next)
            })
            .collect()
    };

    let evaluate = |labels: &[usize]| -> EntropyReport {
        let r = gens.len();
        let base_entropy = entropy_unchecked(&fa.cell_masses(labels));
        let mut value = (1.0 - 2.0 * r as f64) * base_entropy;
        let mut terms = Vec::with_capacity(r);
        for (g, t) in gens.words().iter().enumerate() {
            // w beta v beta labels x by (beta(w^-1 x), beta(x))
            let joined: Vec<Vec<usize>> = (0..size)
                .map(|x| vec![labels[inv[g][x]], labels[x]])
                .collect();
            let h = entropy_unchecked(&fa.cell_masses(&canonical(&joined)));
            value += h;
            terms.push(GenTerm { gen: t.to_string(), join_entropy: h });
        }
        EntropyReport {
            value,
            base_entropy,
            terms,
            sequence: Vec::new(),
            stabilized: false,
        }
    };

    let mut labels = canonical(
        &fa.alpha().iter().map(|&c| vec![c]).collect::<Vec<_>>(),
    );
    let mut sequence = Vec::new();
    let mut report = evaluate(&labels);
    sequence.push(report.value);
    let mut stabilized = false;
    for _ in 0..n_max {
        let raw: Vec<Vec<usize>> = (0..size)
            .map(|x| {
                let mut t = Vec::with_capacity(1 + 2 * gens.len());
                t.push(fa.alpha()[x]);
                for g in 0..gens.len() {
                    t.push(labels[inv[g][x]]);
                    t.push(labels[fwd[g][x]]);
                }
                t
            })
            .collect();
        let next = canonical(&raw);
        if next == labels {
            stabilized = true;
            break;
        }
        labels = next;
        report = evaluate(&labels);
        sequence.push(report.value);
    }
    check_monotone(&sequence)?;
    report.sequence = sequence;
    report.stabilized = stabilized;
    Ok(report)
}

/// H(F alpha) for a right-connected F via the edge-count route:
/// H(alpha) plus, per generator, the edge count times the conditional
/// entropy of one step. Must agree with the entropy of the marginal.
pub fn shannon_join_edge(tm: &TreeMarkovMeasure, f: &WordSet) -> Result<f64> {
    if f.is_empty() || !f.is_connected(Side::Right) {
        return Err(Error::NotRightConnected);
    }
    let counts = edge_vector(f);
    let m = tm.alphabet_size();
    let mut h = entropy_unchecked(tm.pi());
    for s in 1..=tm.rank() {
        let a_s = counts.counts()[s - 1] as f64;
        if a_s == 0.0 {
            continue;
        }
        let mat = tm.transition(s);
        let mut cond = 0.0;
        for a in 0..m {
            let row_h = entropy_unchecked(mat[a].as_slice());
            cond += tm.pi()[a] * row_h;
        }
        h += a_s * cond;
    }
    Ok(h)
}

/// Both sides of the exact ball identity
/// 1 = (1 - 2r)|K| + sum_s |sK u K| for finite left-connected K.
#[derive(Debug, Clone)]
pub struct BallIdentityReport {
    pub lhs: i64,
    pub rhs: i64,
    pub holds: bool,
}

pub fn check_ball_identity(k: &WordSet) -> Result<BallIdentityReport> {
    if k.is_empty() || !k.is_connected(Side::Left) {
        return Err(Error::NotLeftConnected);
    }
    let rank = k.rank();
    let n = k.len() as i64;
    let mut rhs = (1 - 2 * rank as i64) * n;
    for s in 1..=rank {
        let gen = Word::generator(rank, s);
        rhs += k.left_mul(&gen).union(k).len() as i64;
    }
    Ok(BallIdentityReport { lhs: 1, rhs, holds: rhs == 1 })
}

/// The sandwich f <= H(Delta alpha)/|Delta| <= H(alpha) for a
/// right-connected Delta.
#[derive(Debug, Clone)]
pub struct DeltaInequalityReport {
    pub f: f64,
    pub delta_entropy: f64,
    pub per_element: f64,
    pub base_entropy: f64,
    pub holds: bool,
}

pub fn check_delta_inequality(
    tm: &TreeMarkovMeasure,
    delta: &WordSet,
) -> Result<DeltaInequalityReport> {
    let f = f_markov(tm);
    let delta_entropy = shannon_join_edge(tm, delta)?;
    let base_entropy = entropy_unchecked(tm.pi());
    let per_element = delta_entropy / delta.len() as f64;
    let holds = f <= per_element + CROSS_TOL && per_element <= base_entropy + CROSS_TOL;
    Ok(DeltaInequalityReport { f, delta_entropy, per_element, base_entropy, holds })
}
