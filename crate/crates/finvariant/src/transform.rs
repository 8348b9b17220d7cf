//! Structure-preserving constructions between measures.
//!
//! * restricting a tree-Markov measure to a finite-index subgroup, where
//!   the new alphabet is the set of patterns on a transversal and the new
//!   transitions come from exact joint marginals;
//! * recoding a tree-Markov measure over a left-connected block;
//! * rebuilding the unique Markov measure from pairwise marginals;
//! * restricting a finite action to a subgroup.

use crate::entropy::MeasureRef;
use crate::measure::{FiniteAction, TreeMarkovMeasure, DEFAULT_TUPLE_CAP};
use crate::cayley::{Side, WordSet};
use crate::subgroup::{CosetAction, TransversalData};
use crate::word::Word;
use crate::{Error, Result};

/// Patterns with less mass than this are dropped from a restricted or
/// recoded alphabet.
pub const PRUNE_EPS: f64 = 1e-14;

/// Names the new symbols of a restricted or recoded measure: symbol `i`
/// stands for the tuple `patterns[i]` of original symbols read at `words`.
#[derive(Debug, Clone)]
pub struct SymbolLegend {
    pub words: Vec<Word>,
    pub patterns: Vec<Vec<usize>>,
}

/// A measure over a pattern alphabet, with the legend tying its symbols
/// back to the original alphabet.
#[derive(Debug, Clone)]
pub struct PatternMeasure {
    pub measure: TreeMarkovMeasure,
    pub legend: SymbolLegend,
}

fn decode_pattern(mut idx: usize, m: usize, len: usize) -> Vec<usize> {
    let mut out = vec![0; len];
    for slot in out.iter_mut().rev() {
        *slot = idx % m;
        idx /= m;
    }
    out
}

struct PrunedBase {
    kept: Vec<usize>,
    pi: Vec<f64>,
}

fn prune_patterns(pi_full: &[f64]) -> Result<PrunedBase> {
    let kept: Vec<usize> = (0..pi_full.len())
        .filter(|&i| pi_full[i] >= PRUNE_EPS)
        .collect();
    let total: f64 = kept.iter().map(|&i| pi_full[i]).sum();
    if (total - 1.0).abs() > 1e-12 {
        return Err(Error::Internal(format!(
            "pruned pattern mass {total} strayed from 1"
        )));
    }
    let pi = kept.iter().map(|&i| pi_full[i] / total).collect();
    Ok(PrunedBase { kept, pi })
}

/// One conditional transition matrix from a flat joint over
/// (pattern, pattern), restricted to the kept alphabet.
fn conditional_matrix(
    joint: &[f64],
    pi_full: &[f64],
    kept: &[usize],
    m_full: usize,
) -> Result<Vec<Vec<f64>>> {
    let mut rows = Vec::with_capacity(kept.len());
    for &a in kept {
        let mut row: Vec<f64> = kept
            .iter()
            .map(|&b| joint[a * m_full + b] / pi_full[a])
            .collect();
        let total: f64 = row.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::Internal(format!(
                "conditional row mass {total} strayed from 1"
            )));
        }
        for x in row.iter_mut() {
            *x /= total;
        }
        rows.push(row);
    }
    Ok(rows)
}

/// The restriction of a tree-Markov measure to the finite-index subgroup
/// behind `act`: alphabet = positive-mass patterns on the transversal,
/// stationary vector = the transversal marginal, and one transition per
/// Schreier generator t read off the joint marginal over the transversal
/// and its t-translate (the two halves are joined by the single witness
/// edge). The output must pass full validation; a failure would mean the
/// restricted process is not Markov, which cannot happen.
pub fn restrict_markov(
    tm: &TreeMarkovMeasure,
    act: &CosetAction,
    td: &TransversalData,
) -> Result<PatternMeasure> {
    if tm.rank() != act.rank() {
        return Err(Error::RankMismatch(tm.rank(), act.rank()));
    }
    if td.delta.len() != act.index() {
        return Err(Error::Config(format!(
            "transversal has {} words for index {}",
            td.delta.len(),
            act.index()
        )));
    }
    let m = tm.alphabet_size();
    let n = td.delta.len();
    let m_full = m.pow(n as u32);
    let pi_full = tm.marginal_ordered(&td.delta, DEFAULT_TUPLE_CAP)?;
    let base = prune_patterns(&pi_full)?;
    let mut trans = Vec::with_capacity(td.gens.len());
    for t in &td.gens {
        let mut words = td.delta.clone();
        words.extend(td.delta.iter().map(|d| t.times(d)));
        let joint = tm.marginal_ordered(&words, DEFAULT_TUPLE_CAP)?;
        trans.push(conditional_matrix(&joint, &pi_full, &base.kept, m_full)?);
    }
    let measure = TreeMarkovMeasure::new(base.pi, trans)
        .map_err(|e| Error::Internal(format!("restricted measure failed validation: {e}")))?;
    let patterns = base
        .kept
        .iter()
        .map(|&i| decode_pattern(i, m, n))
        .collect();
    Ok(PatternMeasure {
        measure,
        legend: SymbolLegend { words: td.delta.clone(), patterns },
    })
}

/// Recodes a tree-Markov measure over the block alphabet of patterns on a
/// finite left-connected set containing the identity. The recoded measure
/// has the same generator count and the same entropy invariant.
pub fn recode_markov(tm: &TreeMarkovMeasure, u: &WordSet) -> Result<PatternMeasure> {
    let rank = tm.rank();
    if u.rank() != rank {
        return Err(Error::RankMismatch(rank, u.rank()));
    }
    if !u.contains(&Word::identity(rank)) {
        return Err(Error::MissingIdentity);
    }
    if !u.is_connected(Side::Left) {
        return Err(Error::NotLeftConnected);
    }
    let m = tm.alphabet_size();
    let n = u.len();
    let m_full = m.pow(n as u32);
    let pi_full = tm.marginal_ordered(u.words(), DEFAULT_TUPLE_CAP)?;
    let base = prune_patterns(&pi_full)?;
    let mut trans = Vec::with_capacity(rank);
    for s in 1..=rank {
        let gen = Word::generator(rank, s);
        let mut words = u.words().to_vec();
        words.extend(u.words().iter().map(|x| gen.times(x)));
        let joint = tm.marginal_ordered(&words, DEFAULT_TUPLE_CAP)?;
        trans.push(conditional_matrix(&joint, &pi_full, &base.kept, m_full)?);
    }
    let measure = TreeMarkovMeasure::new(base.pi, trans)
        .map_err(|e| Error::Internal(format!("recoded measure failed validation: {e}")))?;
    let patterns = base
        .kept
        .iter()
        .map(|&i| decode_pattern(i, m, n))
        .collect();
    Ok(PatternMeasure {
        measure,
        legend: SymbolLegend { words: u.words().to_vec(), patterns },
    })
}

/// The unique Markov measure matching the given stationary vector and
/// per-generator pair marginals: P_s(a, b) = J_s(a, b) / pi(a). The input
/// marginals must be exactly consistent (row and column sums equal to pi);
/// looser data is rejected, not projected.
pub fn markov_approx(pi: &[f64], joints: &[Vec<Vec<f64>>]) -> Result<TreeMarkovMeasure> {
    let m = pi.len();
    for (i, &p) in pi.iter().enumerate() {
        if p <= 0.0 {
            return Err(Error::ZeroMass(i));
        }
    }
    for (s, j) in joints.iter().enumerate() {
        if j.len() != m || j.iter().any(|row| row.len() != m) {
            return Err(Error::InconsistentMarginals(format!(
                "joint for generator {} is not {m}x{m}",
                s + 1
            )));
        }
        let mut col_sums = vec![0.0; m];
        for (a, row) in j.iter().enumerate() {
            let mut row_sum = 0.0;
            for (b, &p) in row.iter().enumerate() {
                if p < 0.0 {
                    return Err(Error::InconsistentMarginals(format!(
                        "negative mass in joint for generator {}",
                        s + 1
                    )));
                }
                row_sum += p;
                col_sums[b] += p;
            }
            if (row_sum - pi[a]).abs() > 1e-12 {
                return Err(Error::InconsistentMarginals(format!(
                    "row {a} of generator {} sums to {row_sum}, expected pi = {}",
                    s + 1,
                    pi[a]
                )));
            }
        }
        for (b, &c) in col_sums.iter().enumerate() {
            if (c - pi[b]).abs() > 1e-12 {
                return Err(Error::InconsistentMarginals(format!(
                    "column {b} of generator {} sums to {c}, expected pi = {}",
                    s + 1,
                    pi[b]
                )));
            }
        }
    }
    let trans = joints
        .iter()
        .map(|j| {
            j.iter()
                .zip(pi)
                .map(|(row, &pa)| row.iter().map(|&p| p / pa).collect())
                .collect()
        })
        .collect();
    TreeMarkovMeasure::new(pi.to_vec(), trans)
}

/// The stationary cell masses and per-generator pair marginals
/// J_s(a, b) = mu(A_a intersect s A_b) of either measure class.
pub fn empirical_pairs(measure: MeasureRef) -> (Vec<f64>, Vec<Vec<Vec<f64>>>) {
    match measure {
        MeasureRef::Markov(tm) => {
            let m = tm.alphabet_size();
            let pi = tm.pi().to_vec();
            let joints = (1..=tm.rank())
                .map(|s| {
                    let mat = tm.transition(s);
                    (0..m)
                        .map(|a| (0..m).map(|b| pi[a] * mat[a][b]).collect())
                        .collect()
                })
                .collect();
            (pi, joints)
        }
        MeasureRef::Finite(fa) => {
            let cells = fa.alpha().iter().copied().max().map_or(0, |c| c + 1);
            let mut pi = vec![0.0; cells];
            for (x, &c) in fa.alpha().iter().enumerate() {
                pi[c] += fa.mu()[x];
            }
            let joints = (1..=fa.rank())
                .map(|s| {
                    let mut j = vec![vec![0.0; cells]; cells];
                    let sinv = Word::generator(fa.rank(), s).inverse();
                    for x in 0..fa.size() {
                        let a = fa.alpha()[x];
                        let b = fa.alpha()[fa.apply_word(&sinv, x)];
                        j[a][b] += fa.mu()[x];
                    }
                    j
                })
                .collect();
            (pi, joints)
        }
    }
}

/// Restricts a finite action to the subgroup behind `act`: the ground set
/// and measure stay, each Schreier generator acts by composing the letter
/// permutations along its word, and the base partition becomes the join
/// along the transversal.
pub fn restrict_finite(
    fa: &FiniteAction,
    act: &CosetAction,
    td: &TransversalData,
) -> Result<FiniteAction> {
    if fa.rank() != act.rank() {
        return Err(Error::RankMismatch(fa.rank(), act.rank()));
    }
    let perms = td.gens.iter().map(|t| fa.word_perm(t)).collect();
    let alpha = fa.join_labeling(&td.delta);
    FiniteAction::new(td.gens.len(), perms, fa.mu().to_vec(), alpha)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::entropy::{big_f, f_markov, GenSet};
    use crate::subgroup::{schreier_transversal, Perm};

    fn w(s: &str) -> Word {
        Word::parse(s, 2).unwrap()
    }

    fn symmetric_chain(p: f64) -> TreeMarkovMeasure {
        let mat = vec![vec![1.0 - p, p], vec![p, 1.0 - p]];
        TreeMarkovMeasure::new(vec![0.5, 0.5], vec![mat.clone(), mat]).unwrap()
    }

    fn swap_action() -> CosetAction {
        let p = Perm::new(vec![1, 0]).unwrap();
        CosetAction::new(2, vec![p.clone(), p]).unwrap()
    }

    #[test]
    fn restrict_bernoulli_is_bernoulli() {
        let bern = TreeMarkovMeasure::bernoulli(2, vec![0.5, 0.5]).unwrap();
        let act = swap_action();
        let td = schreier_transversal(&act);
        let res = restrict_markov(&bern, &act, &td).unwrap();
        assert_eq!(res.measure.alphabet_size(), 4);
        assert_eq!(res.measure.rank(), 3);
        for p in res.measure.pi() {
            assert!((p - 0.25).abs() < 1e-14);
        }
        for s in 1..=3 {
            for row in res.measure.transition(s) {
                for q in row {
                    assert!((q - 0.25).abs() < 1e-13);
                }
            }
        }
        assert!((f_markov(&res.measure) - 2.0 * f_markov(&bern)).abs() < 1e-12);
    }

    #[test]
    fn restrict_chain_doubles_entropy() {
        let chain = symmetric_chain(0.25);
        let act = swap_action();
        let td = schreier_transversal(&act);
        let res = restrict_markov(&chain, &act, &td).unwrap();
        assert_eq!(res.measure.alphabet_size(), 4);
        let f_g = f_markov(&chain);
        let f_h = f_markov(&res.measure);
        assert!((f_h - 2.0 * f_g).abs() < 1e-9 * (1.0 + f_g.abs()));
        // frozen value: 2 * (2 h(1/4) - ln 2)
        assert!((f_h - 0.8630462173553426).abs() < 1e-9);
    }

    #[test]
    fn restrict_index_one_is_identity() {
        let chain = symmetric_chain(0.25);
        let id = Perm::identity(1);
        let act = CosetAction::new(2, vec![id.clone(), id]).unwrap();
        let td = schreier_transversal(&act);
        let res = restrict_markov(&chain, &act, &td).unwrap();
        assert_eq!(res.measure.alphabet_size(), 2);
        assert_eq!(res.measure.rank(), 2);
        for s in 1..=2 {
            for (row_new, row_old) in res
                .measure
                .transition(s)
                .iter()
                .zip(chain.transition(s))
            {
                for (x, y) in row_new.iter().zip(row_old) {
                    assert!((x - y).abs() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn recode_preserves_entropy() {
        let chain = symmetric_chain(0.25);
        let u1 = WordSet::new(2, [w("e")]).unwrap();
        let rec = recode_markov(&chain, &u1).unwrap();
        assert!((f_markov(&rec.measure) - f_markov(&chain)).abs() < 1e-12);

        let u2 = WordSet::new(2, [w("e"), w("a")]).unwrap();
        let rec = recode_markov(&chain, &u2).unwrap();
        assert_eq!(rec.measure.alphabet_size(), 4);
        assert!((f_markov(&rec.measure) - f_markov(&chain)).abs() < 1e-9);

        let gap = WordSet::new(2, [w("e"), w("aa")]).unwrap();
        assert!(matches!(recode_markov(&chain, &gap), Err(Error::NotLeftConnected)));
        let off = WordSet::new(2, [w("a")]).unwrap();
        assert!(matches!(recode_markov(&chain, &off), Err(Error::MissingIdentity)));
    }

    #[test]
    fn recode_preserves_cylinders() {
        let chain = symmetric_chain(0.25);
        let u = WordSet::new(2, [w("e"), w("a")]).unwrap();
        let rec = recode_markov(&chain, &u).unwrap();
        // the pattern symbol at g expands to original symbols at g*u
        for (sym, pattern) in rec.legend.patterns.iter().enumerate() {
            let p_new = rec.measure.cylinder_prob(&[(w("e"), sym)]).unwrap();
            let asg: Vec<(Word, usize)> = rec
                .legend
                .words
                .iter()
                .cloned()
                .zip(pattern.iter().copied())
                .collect();
            let p_old = chain.cylinder_prob(&asg).unwrap();
            assert!((p_new - p_old).abs() < 1e-13);
        }
    }

    #[test]
    fn approx_examples() {
        // outer product rebuilds the product measure
        let pi = vec![0.25, 0.75];
        let outer: Vec<Vec<f64>> = pi
            .iter()
            .map(|&a| pi.iter().map(|&b| a * b).collect())
            .collect();
        let tm = markov_approx(&pi, &[outer.clone(), outer]).unwrap();
        for s in 1..=2 {
            for row in tm.transition(s) {
                assert!((row[0] - 0.25).abs() < 1e-15);
                assert!((row[1] - 0.75).abs() < 1e-15);
            }
        }

        let j = vec![vec![0.375, 0.125], vec![0.125, 0.375]];
        let tm = markov_approx(&[0.5, 0.5], &[j.clone(), j]).unwrap();
        let chain = symmetric_chain(0.25);
        for s in 1..=2 {
            for (r1, r2) in tm.transition(s).iter().zip(chain.transition(s)) {
                for (x, y) in r1.iter().zip(r2) {
                    assert!((x - y).abs() < 1e-15);
                }
            }
        }

        let bad = vec![vec![0.5, 0.125], vec![0.125, 0.25]];
        assert!(matches!(
            markov_approx(&[0.5, 0.5], &[bad.clone(), bad]),
            Err(Error::InconsistentMarginals(_))
        ));
    }

    #[test]
    fn empirical_fixed_point() {
        let chain = symmetric_chain(0.25);
        let (pi, joints) = empirical_pairs(MeasureRef::Markov(&chain));
        assert_eq!(pi, chain.pi().to_vec());
        assert!((joints[0][0][0] - 0.375).abs() < 1e-15);
        let rebuilt = markov_approx(&pi, &joints).unwrap();
        for s in 1..=2 {
            for (r1, r2) in rebuilt.transition(s).iter().zip(chain.transition(s)) {
                for (x, y) in r1.iter().zip(r2) {
                    assert!((x - y).abs() < 1e-15);
                }
            }
        }
    }

    #[test]
    fn empirical_finite_cases() {
        let id3 = Perm::identity(3);
        let trivial = FiniteAction::new(
            2,
            vec![id3.clone(), id3],
            vec![1.0 / 3.0; 3],
            vec![0, 1, 2],
        )
        .unwrap();
        let (pi, joints) = empirical_pairs(MeasureRef::Finite(&trivial));
        assert_eq!(pi.len(), 3);
        for a in 0..3 {
            for b in 0..3 {
                let expect = if a == b { 1.0 / 3.0 } else { 0.0 };
                assert!((joints[0][a][b] - expect).abs() < 1e-15);
            }
        }

        let swap = Perm::new(vec![1, 0]).unwrap();
        let fa = FiniteAction::new(
            2,
            vec![swap.clone(), swap],
            vec![0.5, 0.5],
            vec![0, 1],
        )
        .unwrap();
        let (_, joints) = empirical_pairs(MeasureRef::Finite(&fa));
        for j in &joints {
            assert_eq!(j[0], vec![0.0, 0.5]);
            assert_eq!(j[1], vec![0.5, 0.0]);
        }
    }

    #[test]
    fn approx_preserves_functional() {
        // the rebuilt Markov measure has the same base functional value
        let swap = Perm::new(vec![1, 0]).unwrap();
        let fa = FiniteAction::new(
            2,
            vec![swap.clone(), swap],
            vec![0.5, 0.5],
            vec![0, 1],
        )
        .unwrap();
        let (pi, joints) = empirical_pairs(MeasureRef::Finite(&fa));
        let tm = markov_approx(&pi, &joints).unwrap();
        let base = WordSet::new(2, [w("e")]).unwrap();
        let direct = big_f(MeasureRef::Finite(&fa), &GenSet::letters(2), &base).unwrap();
        assert!((f_markov(&tm) - direct.value).abs() < 1e-12);
        // and its transitions are the deterministic swap rows
        for s in 1..=2 {
            assert_eq!(tm.transition(s)[0], vec![0.0, 1.0]);
            assert_eq!(tm.transition(s)[1], vec![1.0, 0.0]);
        }
    }

    #[test]
    fn restrict_finite_examples() {
        // trivial action: partition unchanged, generators act trivially
        let id3 = Perm::identity(3);
        let trivial = FiniteAction::new(
            2,
            vec![id3.clone(), id3],
            vec![1.0 / 3.0; 3],
            vec![0, 1, 2],
        )
        .unwrap();
        let act = swap_action();
        let td = schreier_transversal(&act);
        let res = restrict_finite(&trivial, &act, &td).unwrap();
        assert_eq!(res.rank(), 3);
        assert_eq!(res.alpha(), trivial.alpha());
        for p in res.perms() {
            assert_eq!(*p, Perm::identity(3));
        }

        // swap action on two points: every Schreier generator has even
        // letter count, so all act as the identity
        let swap = Perm::new(vec![1, 0]).unwrap();
        let fa = FiniteAction::new(
            2,
            vec![swap.clone(), swap],
            vec![0.5, 0.5],
            vec![0, 1],
        )
        .unwrap();
        let res = restrict_finite(&fa, &act, &td).unwrap();
        for p in res.perms() {
            assert_eq!(*p, Perm::identity(2));
        }
        assert_eq!(res.alpha().iter().copied().max(), Some(1));

        // 4-cycle with an index-2 subgroup of even a-count
        let a4 = Perm::new(vec![1, 2, 3, 0]).unwrap();
        let id4 = Perm::identity(4);
        let fa4 = FiniteAction::new(2, vec![a4, id4], vec![0.25; 4], vec![0, 1, 2, 3]).unwrap();
        let aswap = Perm::new(vec![1, 0]).unwrap();
        let act2 = CosetAction::new(2, vec![aswap, Perm::identity(2)]).unwrap();
        let td2 = schreier_transversal(&act2);
        let res4 = restrict_finite(&fa4, &act2, &td2).unwrap();
        // generators {b, aa, abA} act as id, a^2, id
        let square = Perm::new(vec![2, 3, 0, 1]).unwrap();
        let mut perms = res4.perms().to_vec();
        perms.sort_by_key(|p| p.images().to_vec());
        assert!(perms.contains(&square));
        assert_eq!(perms.iter().filter(|p| **p == Perm::identity(4)).count(), 2);
    }
}
