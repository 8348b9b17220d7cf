//! The two measure classes entropy is computed for.
//!
//! A [`TreeMarkovMeasure`] is a shift-invariant measure on labellings of a
//! free group: one stationary vector and one row-stochastic matrix per
//! generator, multiplied along the edges of the right Cayley tree. All
//! finite marginals are exact sums of products over the tree hull of the
//! queried set.
//!
//! A [`FiniteAction`] is a finite set acted on by generator permutations
//! (on the left), an invariant probability vector, and a base partition.

use crate::cayley::{tree_hull, Side, WordSet};
use crate::subgroup::Perm;
use crate::word::Word;
use crate::{Error, Result};
use std::collections::HashMap;

/// Validation tolerance for stochastic data.
pub const STOCHASTIC_TOL: f64 = 1e-12;
/// Default cap on brute-force tuple enumeration (m^|hull|).
pub const DEFAULT_TUPLE_CAP: f64 = 1e7;
/// Cap on hull vertices for message passing.
pub const VERTEX_CAP: usize = 10_000;

/// A tree-indexed Markov measure: stationary vector `pi` over `m` symbols
/// and one m-by-m row-stochastic transition matrix per generator.
/// Matrices for inverse generators are derived:
/// rev_s(a, b) = pi(b) P_s(b, a) / pi(a).
#[derive(Debug, Clone)]
pub struct TreeMarkovMeasure {
    rank: usize,
    m: usize,
    pi: Vec<f64>,
    trans: Vec<Vec<Vec<f64>>>,
    rev: Vec<Vec<Vec<f64>>>,
}

impl TreeMarkovMeasure {
    pub fn new(pi: Vec<f64>, trans: Vec<Vec<Vec<f64>>>) -> Result<Self> {
        let m = pi.len();
        let rank = trans.len();
        if m == 0 || rank == 0 {
            return Err(Error::BadStochastic("empty dimensions".into()));
        }
        for (i, &p) in pi.iter().enumerate() {
            if p <= 0.0 {
                return Err(Error::ZeroMass(i));
            }
        }
        let total: f64 = pi.iter().sum();
        if (total - 1.0).abs() > STOCHASTIC_TOL {
            return Err(Error::BadStochastic(format!(
                "stationary vector sums to {total}"
            )));
        }
        for (s, mat) in trans.iter().enumerate() {
            if mat.len() != m || mat.iter().any(|row| row.len() != m) {
                return Err(Error::BadStochastic(format!(
                    "matrix for generator {} is not {m}x{m}",
                    s + 1
                )));
            }
            for (a, row) in mat.iter().enumerate() {
                if row.iter().any(|&x| x < 0.0) {
                    return Err(Error::BadStochastic(format!(
                        "negative entry in row {a} of generator {}",
                        s + 1
                    )));
                }
                let rs: f64 = row.iter().sum();
                if (rs - 1.0).abs() > STOCHASTIC_TOL {
                    return Err(Error::BadStochastic(format!(
                        "row {a} of generator {} sums to {rs}",
                        s + 1
                    )));
                }
            }
            for b in 0..m {
                let push: f64 = (0..m).map(|a| pi[a] * mat[a][b]).sum();
                if (push - pi[b]).abs() > STOCHASTIC_TOL {
                    return Err(Error::NotStationary(s + 1));
                }
            }
        }
        let rev = trans
            .iter()
            .map(|mat| {
                (0..m)
                    .map(|a| (0..m).map(|b| pi[b] * mat[b][a] / pi[a]).collect())
                    .collect()
            })
            .collect();
        Ok(TreeMarkovMeasure { rank, m, pi, trans, rev })
    }

    /// The product measure: every transition row equals `dist`.
    pub fn bernoulli(rank: usize, dist: Vec<f64>) -> Result<Self> {
        let m = dist.len();
        let mat: Vec<Vec<f64>> = (0..m).map(|_| dist.clone()).collect();
        TreeMarkovMeasure::new(dist, vec![mat; rank])
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn alphabet_size(&self) -> usize {
        self.m
    }

    pub fn pi(&self) -> &[f64] {
        &self.pi
    }

    pub fn transition(&self, s: usize) -> &Vec<Vec<f64>> {
        &self.trans[s - 1]
    }

    /// Edge kernel for a signed letter.
    pub fn kernel(&self, letter: i32, a: usize, b: usize) -> f64 {
        let g = letter.unsigned_abs() as usize - 1;
        if letter > 0 {
            self.trans[g][a][b]
        } else {
            self.rev[g][a][b]
        }
    }

    /// Probability of the event "the labelling takes symbol asg(g) at every
    /// g in the domain". Unconstrained hull vertices are summed out by
    /// message passing from the leaves inward.
    pub fn cylinder_prob(&self, asg: &[(Word, usize)]) -> Result<f64> {
        if asg.is_empty() {
            return Err(Error::Config("empty cylinder assignment".into()));
        }
        for (_, k) in asg {
            if *k >= self.m {
                return Err(Error::Config(format!("symbol {k} out of range")));
            }
        }
        let domain = WordSet::new(self.rank, asg.iter().map(|(w, _)| w.clone()))?;
        let hull = tree_hull(&domain, Side::Right);
        if hull.len() > VERTEX_CAP {
            return Err(Error::HullTooLarge(format!(
                "{} hull vertices exceed the cap {VERTEX_CAP}",
                hull.len()
            )));
        }
        let tree = HullTree::build(&hull);
        // constraints per hull node; contradictory assignments denote the
        // empty event
        let mut constraint: Vec<Option<usize>> = vec![None; tree.len()];
        for (w, k) in asg {
            let idx = tree.position(w).expect("domain word lies in its hull");
            match constraint[idx] {
                Some(prev) if prev != *k => return Ok(0.0),
                _ => constraint[idx] = Some(*k),
            }
        }
        let mut msgs: Vec<Vec<f64>> = vec![Vec::new(); tree.len()];
        for k in (0..tree.len()).rev() {
            let mut weight = vec![1.0f64; self.m];
            if let Some(sym) = constraint[k] {
                for (b, w) in weight.iter_mut().enumerate() {
                    if b != sym {
                        *w = 0.0;
                    }
                }
            }
            for &c in &tree.children[k] {
                for (b, w) in weight.iter_mut().enumerate() {
                    *w *= msgs[c][b];
                }
            }
            if k == 0 {
                return Ok((0..self.m).map(|a| self.pi[a] * weight[a]).sum());
            }
            let letter = tree.letter[k];
            msgs[k] = (0..self.m)
                .map(|a| {
                    (0..self.m)
                        .map(|b| self.kernel(letter, a, b) * weight[b])
                        .sum()
                })
                .collect();
        }
        unreachable!("node 0 is the root");
    }

    /// Exact joint distribution of the symbols at `words`, as a flat vector
    /// indexed with the first word most significant. Repeated words are
    /// allowed; incompatible tuples get probability zero.
    pub fn marginal_ordered(&self, words: &[Word], cap: f64) -> Result<Vec<f64>> {
        if words.is_empty() {
            return Err(Error::Config("empty marginal domain".into()));
        }
        let distinct = WordSet::new(self.rank, words.iter().cloned())?;
        let hull = tree_hull(&distinct, Side::Right);
        let enum_cost = (self.m as f64).powi(hull.len() as i32);
        let table_size = (self.m as f64).powi(words.len() as i32);
        if enum_cost > cap || table_size > cap || hull.len() > VERTEX_CAP {
            return Err(Error::HullTooLarge(format!(
                "enumeration over {} hull vertices / {} positions exceeds the cap",
                hull.len(),
                words.len()
            )));
        }
        let tree = HullTree::build(&hull);
        // index contribution of each hull node: sum of place values of the
        // positions it occupies
        let mut place = vec![0usize; tree.len()];
        for (i, w) in words.iter().enumerate() {
            let node = tree.position(w).expect("queried word lies in its hull");
            place[node] += self.m.pow((words.len() - 1 - i) as u32);
        }
        let mut out = vec![0.0f64; table_size as usize];
        let mut syms = vec![0usize; tree.len()];
        self.enumerate(&tree, &place, 0, 1.0, 0, &mut syms, &mut |idx, p| {
            out[idx] += p;
        });
        Ok(out)
    }

    /// Marginal over a word set in its canonical (length-lex) order.
    pub fn marginal(&self, f: &WordSet) -> Result<Vec<f64>> {
        self.marginal_ordered(f.words(), DEFAULT_TUPLE_CAP)
    }

    /// Shannon entropy of the joint at `words`, streamed during the hull
    /// enumeration when the queried set is its own hull (then distinct
    /// hull assignments are distinct tuples), otherwise via the table.
    pub fn join_entropy(&self, words: &[Word], cap: f64) -> Result<f64> {
        let distinct = WordSet::new(self.rank, words.iter().cloned())?;
        let hull = tree_hull(&distinct, Side::Right);
        if hull.len() == distinct.len() {
            let enum_cost = (self.m as f64).powi(hull.len() as i32);
            if enum_cost > cap || hull.len() > VERTEX_CAP {
                return Err(Error::HullTooLarge(format!(
                    "enumeration over {} hull vertices exceeds the cap",
                    hull.len()
                )));
            }
            let tree = HullTree::build(&hull);
            let place = vec![0usize; tree.len()];
            let mut acc = 0.0f64;
            let mut syms = vec![0usize; tree.len()];
            self.enumerate(&tree, &place, 0, 1.0, 0, &mut syms, &mut |_, p| {
                if p > 0.0 {
                    acc -= p * p.ln();
                }
            });
            Ok(acc)
        } else {
            let table = self.marginal_ordered(words, cap)?;
            Ok(table
                .iter()
                .filter(|&&p| p > 0.0)
                .map(|&p| -p * p.ln())
                .sum())
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn enumerate(
        &self,
        tree: &HullTree,
        place: &[usize],
        k: usize,
        prob: f64,
        idx: usize,
        syms: &mut Vec<usize>,
        sink: &mut impl FnMut(usize, f64),
    ) {
        if k == tree.len() {
            sink(idx, prob);
            return;
        }
        for sym in 0..self.m {
            let factor = if k == 0 {
                self.pi[sym]
            } else {
                self.kernel(tree.letter[k], syms[tree.parent[k]], sym)
            };
            if factor == 0.0 {
                continue;
            }
            syms[k] = sym;
            self.enumerate(
                tree,
                place,
                k + 1,
                prob * factor,
                idx + sym * place[k],
                syms,
                sink,
            );
        }
    }
}

/// A rooted spanning layout of a right-connected word set: nodes in
/// breadth-first order from the least word, each non-root reached from its
/// parent by one signed letter.
struct HullTree {
    order: Vec<Word>,
    parent: Vec<usize>,
    letter: Vec<i32>,
    children: Vec<Vec<usize>>,
    index: HashMap<Word, usize>,
}

impl HullTree {
    fn build(hull: &WordSet) -> HullTree {
        let rank = hull.rank();
        let mut order = vec![hull.words()[0].clone()];
        let mut parent = vec![0usize];
        let mut letter = vec![0i32];
        let mut index: HashMap<Word, usize> = HashMap::from([(order[0].clone(), 0)]);
        let mut k = 0;
        while k < order.len() {
            let w = order[k].clone();
            for l in crate::word::all_letters(rank) {
                let nbr = w.push(l);
                if hull.contains(&nbr) && !index.contains_key(&nbr) {
                    index.insert(nbr.clone(), order.len());
                    order.push(nbr);
                    parent.push(k);
                    letter.push(l);
                }
            }
            k += 1;
        }
        debug_assert_eq!(order.len(), hull.len(), "hull must be right connected");
        let mut children = vec![Vec::new(); order.len()];
        for (i, &p) in parent.iter().enumerate().skip(1) {
            children[p].push(i);
        }
        HullTree { order, parent, letter, children, index }
    }

    fn len(&self) -> usize {
        self.order.len()
    }

    fn position(&self, w: &Word) -> Option<usize> {
        self.index.get(w).copied()
    }
}

/// A finite set with a left action of the generators, an invariant
/// probability vector, and a base partition (cell id per point).
#[derive(Debug, Clone)]
pub struct FiniteAction {
    rank: usize,
    perms: Vec<Perm>,
    inverses: Vec<Perm>,
    mu: Vec<f64>,
    alpha: Vec<usize>,
}

impl FiniteAction {
    pub fn new(rank: usize, perms: Vec<Perm>, mu: Vec<f64>, alpha: Vec<usize>) -> Result<Self> {
        if perms.len() != rank {
            return Err(Error::RankMismatch(rank, perms.len()));
        }
        let n = mu.len();
        if n == 0 {
            return Err(Error::NotADistribution("empty ground set".into()));
        }
        for p in &perms {
            if p.len() != n {
                return Err(Error::NonBijective(p.len()));
            }
        }
        if alpha.len() != n {
            return Err(Error::Config(format!(
                "partition labels {} points, ground set has {n}",
                alpha.len()
            )));
        }
        if mu.iter().any(|&x| x < 0.0) {
            return Err(Error::NotADistribution("negative mass".into()));
        }
        let total: f64 = mu.iter().sum();
        if (total - 1.0).abs() > STOCHASTIC_TOL {
            return Err(Error::NotADistribution(format!("masses sum to {total}")));
        }
        for (s, p) in perms.iter().enumerate() {
            for x in 0..n {
                if (mu[p.apply(x)] - mu[x]).abs() > STOCHASTIC_TOL {
                    return Err(Error::NotInvariant(s + 1));
                }
            }
        }
        let inverses = perms.iter().map(Perm::inverse).collect();
        Ok(FiniteAction { rank, perms, inverses, mu, alpha })
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn size(&self) -> usize {
        self.mu.len()
    }

    pub fn mu(&self) -> &[f64] {
        &self.mu
    }

    pub fn alpha(&self) -> &[usize] {
        &self.alpha
    }

    pub fn perms(&self) -> &[Perm] {
        &self.perms
    }

    /// The left action of a word: w * x, innermost letter first.
    pub fn apply_word(&self, w: &Word, x: usize) -> usize {
        w.letters().iter().rev().fold(x, |y, &l| {
            let g = l.unsigned_abs() as usize - 1;
            if l > 0 {
                self.perms[g].apply(y)
            } else {
                self.inverses[g].apply(y)
            }
        })
    }

    /// The permutation realizing a word under the left action.
    pub fn word_perm(&self, w: &Word) -> Perm {
        Perm::new((0..self.size()).map(|x| self.apply_word(w, x)).collect())
            .expect("composition of bijections")
    }

    /// Labels each point by the tuple of base cells seen along the given
    /// words: x goes to (alpha(w^-1 x))_w. Tuples are mapped to dense cell
    /// ids in order of first appearance.
    pub fn join_labeling(&self, words: &[Word]) -> Vec<usize> {
        let invs: Vec<Word> = words.iter().map(Word::inverse).collect();
        let mut ids: HashMap<Vec<usize>, usize> = HashMap::new();
        let mut labels = Vec::with_capacity(self.size());
        for x in 0..self.size() {
            let tuple: Vec<usize> = invs
                .iter()
                .map(|wi| self.alpha[self.apply_word(wi, x)])
                .collect();
            let next = ids.len();
            labels.push(*ids.entry(tuple).or_insert(next));
        }
        labels
    }

    /// Masses of the cells of a labeling.
    pub fn cell_masses(&self, labels: &[usize]) -> Vec<f64> {
        let cells = labels.iter().copied().max().map_or(0, |c| c + 1);
        let mut masses = vec![0.0; cells];
        for (x, &c) in labels.iter().enumerate() {
            masses[c] += self.mu[x];
        }
        masses
    }

    /// Shannon entropy of the join partition along `words`.
    pub fn join_entropy(&self, words: &[Word]) -> f64 {
        self.cell_masses(&self.join_labeling(words))
            .iter()
            .filter(|&&p| p > 0.0)
            .map(|&p| -p * p.ln())
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(s: &str) -> Word {
        Word::parse(s, 2).unwrap()
    }

    /// Two symbols, both generators flip with probability p.
    pub(crate) fn symmetric_chain(p: f64) -> TreeMarkovMeasure {
        let mat = vec![vec![1.0 - p, p], vec![p, 1.0 - p]];
        TreeMarkovMeasure::new(vec![0.5, 0.5], vec![mat.clone(), mat]).unwrap()
    }

    #[test]
    fn validation() {
        assert!(symmetric_chain(0.25).pi()[0] == 0.5);
        // deterministic edges are allowed
        let ident = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
        let swap = vec![vec![0.0, 1.0], vec![1.0, 0.0]];
        assert!(TreeMarkovMeasure::new(vec![0.5, 0.5], vec![ident.clone(), swap.clone()]).is_ok());
        // (1/4, 3/4) survives the identity but not the swap
        let bad = TreeMarkovMeasure::new(vec![0.25, 0.75], vec![ident, swap]);
        assert!(matches!(bad, Err(Error::NotStationary(2))));
        let zero = TreeMarkovMeasure::bernoulli(2, vec![1.0, 0.0]);
        assert!(matches!(zero, Err(Error::ZeroMass(1))));
        let lopsided = vec![vec![0.9, 0.2], vec![0.1, 0.8]];
        assert!(matches!(
            TreeMarkovMeasure::new(vec![0.5, 0.5], vec![lopsided.clone(), lopsided]),
            Err(Error::BadStochastic(_))
        ));
    }

    #[test]
    fn bernoulli_rows() {
        let b = TreeMarkovMeasure::bernoulli(2, vec![1.0 / 3.0, 2.0 / 3.0]).unwrap();
        assert_eq!(b.transition(1)[0], vec![1.0 / 3.0, 2.0 / 3.0]);
        assert_eq!(b.transition(2)[1], vec![1.0 / 3.0, 2.0 / 3.0]);
        // one-symbol degenerate case is fine
        assert!(TreeMarkovMeasure::bernoulli(2, vec![1.0]).is_ok());
    }

    #[test]
    fn cylinder_basics() {
        let tm = symmetric_chain(0.25);
        let p0 = tm.cylinder_prob(&[(w("e"), 0)]).unwrap();
        assert!((p0 - 0.5).abs() < 1e-15);
        let p01 = tm.cylinder_prob(&[(w("e"), 0), (w("a"), 1)]).unwrap();
        assert!((p01 - 0.5 * 0.25).abs() < 1e-15);
        // two steps: explicit sum over the middle vertex
        let paa = tm.cylinder_prob(&[(w("e"), 0), (w("aa"), 1)]).unwrap();
        let byhand = 0.5 * (0.75 * 0.25 + 0.25 * 0.75);
        assert!((paa - byhand).abs() < 1e-15);
    }

    #[test]
    fn cylinder_reverse_edge() {
        let tm = symmetric_chain(0.25);
        // {e -> x0, a^-1 -> x1} must equal pi(x1) P_a(x1, x0)
        for x0 in 0..2 {
            for x1 in 0..2 {
                let p = tm.cylinder_prob(&[(w("e"), x0), (w("A"), x1)]).unwrap();
                let expect = 0.5 * tm.transition(1)[x1][x0];
                assert!((p - expect).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn cylinder_contradiction_is_empty() {
        let tm = symmetric_chain(0.25);
        let p = tm.cylinder_prob(&[(w("e"), 0), (w("e"), 1)]).unwrap();
        assert_eq!(p, 0.0);
    }

    #[test]
    fn marginal_matches_cylinder() {
        let tm = symmetric_chain(0.25);
        let f = WordSet::new(2, [w("e"), w("a"), w("b")]).unwrap();
        let dist = tm.marginal(&f).unwrap();
        assert!((dist.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        for (idx, &p) in dist.iter().enumerate() {
            let syms = [(idx >> 2) & 1, (idx >> 1) & 1, idx & 1];
            let asg: Vec<(Word, usize)> = f
                .words()
                .iter()
                .cloned()
                .zip(syms.iter().copied())
                .collect();
            let q = tm.cylinder_prob(&asg).unwrap();
            assert!((p - q).abs() < 1e-14);
        }
    }

    #[test]
    fn bernoulli_marginal_is_product() {
        let b = TreeMarkovMeasure::bernoulli(2, vec![0.5, 0.5]).unwrap();
        let f = WordSet::new(2, [w("e"), w("a")]).unwrap();
        let dist = b.marginal(&f).unwrap();
        assert_eq!(dist.len(), 4);
        for p in dist {
            assert!((p - 0.25).abs() < 1e-15);
        }
    }

    #[test]
    fn marginal_with_repeated_words() {
        let tm = symmetric_chain(0.25);
        let dist = tm
            .marginal_ordered(&[w("e"), w("e")], DEFAULT_TUPLE_CAP)
            .unwrap();
        // off-diagonal tuples are incompatible
        assert_eq!(dist.len(), 4);
        assert!((dist[0] - 0.5).abs() < 1e-15);
        assert_eq!(dist[1], 0.0);
        assert_eq!(dist[2], 0.0);
        assert!((dist[3] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn finite_action_validation() {
        let swap = Perm::new(vec![1, 0]).unwrap();
        let id = Perm::identity(2);
        assert!(FiniteAction::new(
            2,
            vec![swap.clone(), id.clone()],
            vec![0.5, 0.5],
            vec![0, 1]
        )
        .is_ok());
        let bad = FiniteAction::new(2, vec![swap, id], vec![0.25, 0.75], vec![0, 1]);
        assert!(matches!(bad, Err(Error::NotInvariant(1))));
    }

    #[test]
    fn join_labeling_cases() {
        let swap = Perm::new(vec![1, 0]).unwrap();
        let fa = FiniteAction::new(
            2,
            vec![swap.clone(), swap],
            vec![0.5, 0.5],
            vec![0, 1],
        )
        .unwrap();
        // F = {e}: the base partition itself
        assert_eq!(fa.join_labeling(&[w("e")]), vec![0, 1]);
        // F = {e, a}: tuples (0,1) and (1,0), still two cells
        assert_eq!(fa.join_labeling(&[w("e"), w("a")]), vec![0, 1]);

        let id3 = Perm::identity(3);
        let trivial = FiniteAction::new(
            2,
            vec![id3.clone(), id3],
            vec![1.0 / 3.0; 3],
            vec![0, 1, 2],
        )
        .unwrap();
        assert_eq!(trivial.join_labeling(&[w("e"), w("ab"), w("Ba")]), vec![0, 1, 2]);
    }
}
