//! Finite-index subgroups of a free group, presented as permutation
//! actions of the generators on right cosets. Coset 0 always stands for
//! the subgroup itself.
//!
//! From a coset action we build a transversal of coset representatives
//! (least word of each coset, which makes the set closed under prefixes
//! and hence right connected), Schreier free generators for the subgroup,
//! and the edge-count identities that drive the subgroup entropy formula.

use crate::cayley::{edge_vector, GenSum, Side, WordSet};
use crate::word::{all_letters, Word};
use crate::{Error, Result};
use num_rational::Ratio;
use std::collections::HashMap;

/// A permutation of {0..n-1} in one-line notation.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Perm {
    images: Vec<usize>,
}

impl Perm {
    pub fn new(images: Vec<usize>) -> Result<Perm> {
        let n = images.len();
        let mut seen = vec![false; n];
        for &i in &images {
            if i >= n || seen[i] {
                return Err(Error::NonBijective(n));
            }
            seen[i] = true;
        }
        Ok(Perm { images })
    }

    pub fn identity(n: usize) -> Perm {
        Perm { images: (0..n).collect() }
    }

    pub fn len(&self) -> usize {
        self.images.len()
    }

    pub fn is_empty(&self) -> bool {
        self.images.is_empty()
    }

    pub fn apply(&self, x: usize) -> usize {
        self.images[x]
    }

    pub fn inverse(&self) -> Perm {
        let mut images = vec![0; self.images.len()];
        for (i, &j) in self.images.iter().enumerate() {
            images[j] = i;
        }
        Perm { images }
    }

    /// Apply `self` first, then `after`.
    pub fn then(&self, after: &Perm) -> Perm {
        Perm {
            images: self.images.iter().map(|&i| after.apply(i)).collect(),
        }
    }

    pub fn images(&self) -> &[usize] {
        &self.images
    }
}

/// The right action of the generators of a rank-r free group on the
/// cosets {0..n-1} of an index-n subgroup, with coset 0 the subgroup.
#[derive(Debug, Clone)]
pub struct CosetAction {
    rank: usize,
    perms: Vec<Perm>,
    inverses: Vec<Perm>,
}

impl CosetAction {
    pub fn new(rank: usize, perms: Vec<Perm>) -> Result<CosetAction> {
        if perms.len() != rank {
            return Err(Error::RankMismatch(rank, perms.len()));
        }
        let n = perms.first().map(Perm::len).unwrap_or(0);
        if n == 0 {
            return Err(Error::NonBijective(0));
        }
        for p in &perms {
            if p.len() != n {
                return Err(Error::NonBijective(p.len()));
            }
        }
        let inverses: Vec<Perm> = perms.iter().map(Perm::inverse).collect();
        // orbit of 0 must be everything
        let mut seen = vec![false; n];
        let mut stack = vec![0usize];
        seen[0] = true;
        let mut count = 1;
        while let Some(c) = stack.pop() {
            for p in perms.iter().chain(&inverses) {
                let d = p.apply(c);
                if !seen[d] {
                    seen[d] = true;
                    count += 1;
                    stack.push(d);
                }
            }
        }
        if count != n {
            return Err(Error::NotTransitive);
        }
        Ok(CosetAction { rank, perms, inverses })
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    /// The index of the subgroup: the number of cosets.
    pub fn index(&self) -> usize {
        self.perms[0].len()
    }

    pub fn perms(&self) -> &[Perm] {
        &self.perms
    }

    /// Where a single signed letter sends a coset.
    pub fn step(&self, coset: usize, letter: i32) -> usize {
        let g = letter.unsigned_abs() as usize - 1;
        if letter > 0 {
            self.perms[g].apply(coset)
        } else {
            self.inverses[g].apply(coset)
        }
    }

    /// The coset reached by reading the word from coset 0; the word lies
    /// in the subgroup exactly when this returns 0.
    pub fn coset_of(&self, w: &Word) -> usize {
        w.letters().iter().fold(0, |c, &l| self.step(c, l))
    }
}

/// Whether a transversal is known to be right connected only, or
/// additionally left connected.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Connectivity {
    Right,
    Bi,
}

/// The external edge that produced a Schreier generator
/// t = delta * s * rep(delta s)^-1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Witness {
    /// Coset index of delta.
    pub delta_idx: usize,
    /// Generator index s (1-based).
    pub gen: usize,
    /// Coset index of delta * s, whose representative closes the cycle.
    pub target_idx: usize,
}

/// A coset transversal together with the Schreier free generators it
/// induces. `delta[i]` is the representative of coset i; `delta[0]` is
/// the identity.
#[derive(Debug, Clone)]
pub struct TransversalData {
    pub delta: Vec<Word>,
    pub connectivity: Connectivity,
    pub gens: Vec<Word>,
    pub witnesses: Vec<Witness>,
}

impl TransversalData {
    pub fn delta_set(&self) -> WordSet {
        WordSet::from_words(self.delta.clone()).unwrap()
    }
}

/// Builds the transversal of least words (length-lex) per coset, plus the
/// Schreier generators from the external (coset, generator) pairs.
///
/// The least-word transversal is closed under prefixes, so it is right
/// connected and contains the identity. Internal pairs number
/// index - 1 and the generator count lands on index*(rank-1) + 1.
pub fn schreier_transversal(act: &CosetAction) -> TransversalData {
    let n = act.index();
    let rank = act.rank();
    let mut delta: Vec<Option<Word>> = vec![None; n];
    delta[0] = Some(Word::identity(rank));
    let mut queue = std::collections::VecDeque::from([0usize]);
    let mut found = 1;
    while let Some(c) = queue.pop_front() {
        let rep = delta[c].clone().expect("queued coset has a representative");
        for l in all_letters(rank) {
            // skip non-reduced extensions; reduced ones visit words in
            // length-lex order, so the first word reaching a coset is least
            if rep.letters().last() == Some(&-l) {
                continue;
            }
            let d = act.step(c, l);
            if delta[d].is_none() {
                delta[d] = Some(rep.push(l));
                queue.push_back(d);
                found += 1;
            }
        }
    }
    assert_eq!(found, n, "validated actions are transitive");
    let delta: Vec<Word> = delta.into_iter().map(Option::unwrap).collect();

    let mut gens = Vec::new();
    let mut witnesses = Vec::new();
    let mut internal = 0;
    for (i, rep) in delta.iter().enumerate() {
        for s in 1..=rank {
            let j = act.step(i, s as i32);
            let moved = rep.push(s as i32);
            if moved == delta[j] {
                internal += 1;
            } else {
                gens.push(moved.times(&delta[j].inverse()));
                witnesses.push(Witness { delta_idx: i, gen: s, target_idx: j });
            }
        }
    }
    debug_assert_eq!(internal, n - 1);
    debug_assert_eq!(gens.len(), n * (rank - 1) + 1);
    TransversalData {
        delta,
        connectivity: Connectivity::Right,
        gens,
        witnesses,
    }
}

/// True when the subgroup encoded by the action is normal: conjugating
/// every Schreier generator by every signed letter must land back in the
/// subgroup.
pub fn is_normal(act: &CosetAction) -> bool {
    let td = schreier_transversal(act);
    td.gens.iter().all(|t| {
        all_letters(act.rank()).all(|l| {
            let conj = t.push(-l).push_front(l);
            act.coset_of(&conj) == 0
        })
    })
}

/// The least-word transversal again, for a normal subgroup, where it is
/// additionally left connected. Non-normal actions are rejected; a
/// connectivity failure afterwards would be a genuine bug, hence internal.
pub fn bi_transversal(act: &CosetAction) -> Result<TransversalData> {
    if !is_normal(act) {
        return Err(Error::NotNormal);
    }
    let mut td = schreier_transversal(act);
    let dset = td.delta_set();
    if !dset.is_connected(Side::Left) {
        return Err(Error::Internal(format!(
            "least-word transversal {dset} of a normal subgroup is not left connected"
        )));
    }
    td.connectivity = Connectivity::Bi;
    Ok(td)
}

/// Default cap on the size of the image group closure in `normal_core`.
pub const CORE_BOUND: usize = 10_080;

/// The kernel of the homomorphism onto the permutation group generated by
/// the action: the largest normal subgroup inside the given one, returned
/// as the regular coset action of the image group.
pub fn normal_core(act: &CosetAction) -> Result<CosetAction> {
    normal_core_bounded(act, CORE_BOUND)
}

pub fn normal_core_bounded(act: &CosetAction, bound: usize) -> Result<CosetAction> {
    let n = act.index();
    let id = Perm::identity(n);
    let mut index: HashMap<Perm, usize> = HashMap::from([(id.clone(), 0)]);
    let mut elems = vec![id];
    let mut next = 0;
    while next < elems.len() {
        let cur = elems[next].clone();
        next += 1;
        for p in act.perms() {
            let prod = cur.then(p);
            if !index.contains_key(&prod) {
                if elems.len() >= bound {
                    return Err(Error::ImageTooLarge(bound));
                }
                index.insert(prod.clone(), elems.len());
                elems.push(prod);
            }
        }
    }
    let order = elems.len();
    let perms = act
        .perms()
        .iter()
        .map(|p| {
            Perm::new(
                elems
                    .iter()
                    .map(|e| index[&e.then(p)])
                    .collect(),
            )
            .expect("right translation of a group is a bijection")
        })
        .collect();
    debug_assert!(order % n == 0);
    CosetAction::new(act.rank(), perms)
}

/// Rewrites a subgroup element as a word in the Schreier generators by
/// scanning its letters through the coset graph. Output is the freely
/// reduced sequence of signed 1-based generator indices; it multiplies
/// back to the input and is never longer than it.
pub fn rewrite_in_t(td: &TransversalData, act: &CosetAction, h: &Word) -> Result<Vec<i64>> {
    let ext: HashMap<(usize, usize), usize> = td
        .witnesses
        .iter()
        .enumerate()
        .map(|(k, w)| ((w.delta_idx, w.gen), k))
        .collect();
    let mut out: Vec<i64> = Vec::new();
    let push = |x: i64, out: &mut Vec<i64>| {
        if out.last() == Some(&-x) {
            out.pop();
        } else {
            out.push(x);
        }
    };
    let mut c = 0usize;
    for &l in h.letters() {
        if l > 0 {
            let s = l as usize;
            let j = act.step(c, l);
            if let Some(&k) = ext.get(&(c, s)) {
                push(k as i64 + 1, &mut out);
            }
            c = j;
        } else {
            let s = (-l) as usize;
            let j = act.step(c, l);
            // the factor is the inverse of the generator witnessed at (j, s)
            if let Some(&k) = ext.get(&(j, s)) {
                push(-(k as i64 + 1), &mut out);
            }
            c = j;
        }
    }
    if c != 0 {
        return Err(Error::NotInSubgroup(c));
    }
    Ok(out)
}

/// Both sides of the edge-count identity tying the Schreier generators to
/// the transversal:
/// sum_t (R(t D u D) - R(D)) = |T| R(D) + sum_s (R(D s u D) - R(D)).
#[derive(Debug, Clone)]
pub struct SubedgeReport {
    pub lhs: GenSum,
    pub rhs: GenSum,
    pub holds: bool,
}

pub fn check_subedge_identity(td: &TransversalData) -> SubedgeReport {
    let dset = td.delta_set();
    let rank = dset.rank();
    let r_delta = edge_vector(&dset).to_sum();
    let mut lhs = GenSum::zero(rank);
    for t in &td.gens {
        let shifted = dset.left_mul(t).union(&dset);
        lhs = lhs.add(&edge_vector(&shifted).to_sum().sub(&r_delta));
    }
    let mut rhs = r_delta.scale(td.gens.len() as i64);
    for s in 1..=rank {
        let gen = Word::generator(rank, s);
        let shifted = dset.right_mul(&gen).union(&dset);
        rhs = rhs.add(&edge_vector(&shifted).to_sum().sub(&r_delta));
    }
    SubedgeReport { holds: lhs == rhs, lhs, rhs }
}

/// The three exact identities satisfied by any finite bi-connected set
/// containing the identity.
#[derive(Debug, Clone)]
pub struct CombReport {
    pub main_lhs: GenSum,
    pub main_rhs: GenSum,
    pub eq1_lhs: GenSum,
    pub eq1_rhs: GenSum,
    pub eq2_lhs: GenSum,
    pub eq2_rhs: GenSum,
    pub holds: bool,
}

/// Checks, for a bi-connected set D containing the identity with |D| = n:
///   main: n * sum_s (R(sD u D) - R(D))
///            = sum_s (R(Ds u D) - R(D)) + (n(r-1) + 1) R(D)
///   eq1:  n * (sum_s s) = sum_s (R(Ds u D) - R(D)) + R(D)
///   eq2:  sum_s (R(sD u D) - R(D)) = (sum_s s) + (r-1) R(D)
pub fn check_comb_identity(delta: &WordSet) -> Result<CombReport> {
    let rank = delta.rank();
    if !delta.contains(&Word::identity(rank)) {
        return Err(Error::MissingIdentity);
    }
    if !(delta.is_connected(Side::Right) && delta.is_connected(Side::Left)) {
        return Err(Error::NotBiConnected);
    }
    let n = delta.len() as i64;
    let r_delta = edge_vector(delta).to_sum();
    let mut left_sum = GenSum::zero(rank);
    let mut right_sum = GenSum::zero(rank);
    for s in 1..=rank {
        let gen = Word::generator(rank, s);
        let l = delta.left_mul(&gen).union(delta);
        let r = delta.right_mul(&gen).union(delta);
        left_sum = left_sum.add(&edge_vector(&l).to_sum().sub(&r_delta));
        right_sum = right_sum.add(&edge_vector(&r).to_sum().sub(&r_delta));
    }
    let main_lhs = left_sum.scale(n);
    let main_rhs = right_sum.add(&r_delta.scale(n * (rank as i64 - 1) + 1));
    let eq1_lhs = GenSum::ones(rank).scale(n);
    let eq1_rhs = right_sum.add(&r_delta);
    let eq2_lhs = left_sum;
    let eq2_rhs = GenSum::ones(rank).add(&r_delta.scale(rank as i64 - 1));
    let holds = main_lhs == main_rhs && eq1_lhs == eq1_rhs && eq2_lhs == eq2_rhs;
    Ok(CombReport { main_lhs, main_rhs, eq1_lhs, eq1_rhs, eq2_lhs, eq2_rhs, holds })
}

/// Euler-characteristic style scaling from the orders of edge and vertex
/// groups of a finite graph of finite groups:
/// chi = sum 1/e_i - sum 1/v_j. A finite-index free subgroup of the
/// fundamental group has rank 1 + index * chi, and the virtual entropy of
/// an action is the free-subgroup entropy divided by index * chi.
pub fn kps_scaling(edge_orders: &[u64], vertex_orders: &[u64]) -> Ratio<i64> {
    let mut chi = Ratio::new(0, 1);
    for &e in edge_orders {
        chi += Ratio::new(1, e as i64);
    }
    for &v in vertex_orders {
        chi -= Ratio::new(1, v as i64);
    }
    chi
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::word::Word;

    fn w(s: &str) -> Word {
        Word::parse(s, 2).unwrap()
    }

    /// Index-2 action where both generators swap the cosets.
    pub(crate) fn swap_action() -> CosetAction {
        let p = Perm::new(vec![1, 0]).unwrap();
        CosetAction::new(2, vec![p.clone(), p]).unwrap()
    }

    #[test]
    fn action_validation() {
        let id = Perm::identity(1);
        assert!(CosetAction::new(2, vec![id.clone(), id]).is_ok());
        assert!(matches!(
            CosetAction::new(2, vec![Perm::identity(2), Perm::identity(2)]),
            Err(Error::NotTransitive)
        ));
        assert!(Perm::new(vec![0, 0]).is_err());
    }

    #[test]
    fn coset_walks() {
        let act = swap_action();
        assert_eq!(act.coset_of(&w("a")), 1);
        assert_eq!(act.coset_of(&w("ab")), 0);
        assert_eq!(act.coset_of(&w("e")), 0);
    }

    #[test]
    fn schreier_swap_example() {
        let act = swap_action();
        let td = schreier_transversal(&act);
        assert_eq!(td.delta, vec![w("e"), w("a")]);
        let mut gens = td.gens.clone();
        gens.sort();
        assert_eq!(gens, vec![w("aa"), w("ab"), w("bA")]);
        assert_eq!(td.gens.len(), 2 * (2 - 1) + 1);
    }

    #[test]
    fn schreier_index_one() {
        let id = Perm::identity(1);
        let act = CosetAction::new(2, vec![id.clone(), id]).unwrap();
        let td = schreier_transversal(&act);
        assert_eq!(td.delta, vec![w("e")]);
        assert_eq!(td.gens, vec![w("a"), w("b")]);
    }

    #[test]
    fn schreier_cyclic_index_three() {
        // a = (0 1 2), b = id; least-word transversal picks A for coset 2
        let a = Perm::new(vec![1, 2, 0]).unwrap();
        let b = Perm::identity(3);
        let act = CosetAction::new(2, vec![a, b]).unwrap();
        let td = schreier_transversal(&act);
        assert_eq!(td.delta, vec![w("e"), w("a"), w("A")]);
        assert_eq!(td.gens.len(), 3 * (2 - 1) + 1);
        for t in &td.gens {
            assert_eq!(act.coset_of(t), 0);
            assert!(!t.is_identity());
        }
    }

    #[test]
    fn normality() {
        assert!(is_normal(&swap_action()));
        let a = Perm::new(vec![1, 0, 2]).unwrap();
        let b = Perm::new(vec![0, 2, 1]).unwrap();
        let act = CosetAction::new(2, vec![a, b]).unwrap();
        assert!(!is_normal(&act));
        let id = Perm::identity(1);
        assert!(is_normal(&CosetAction::new(2, vec![id.clone(), id]).unwrap()));
    }

    #[test]
    fn bi_transversal_cases() {
        let td = bi_transversal(&swap_action()).unwrap();
        assert_eq!(td.delta, vec![w("e"), w("a")]);
        assert_eq!(td.connectivity, Connectivity::Bi);

        let a = Perm::new(vec![1, 0, 2]).unwrap();
        let b = Perm::new(vec![0, 2, 1]).unwrap();
        let act = CosetAction::new(2, vec![a, b]).unwrap();
        assert!(matches!(bi_transversal(&act), Err(Error::NotNormal)));
    }

    #[test]
    fn core_of_nonnormal_action() {
        let a = Perm::new(vec![1, 0, 2]).unwrap();
        let b = Perm::new(vec![0, 2, 1]).unwrap();
        let act = CosetAction::new(2, vec![a, b]).unwrap();
        let core = normal_core(&act).unwrap();
        assert_eq!(core.index(), 6); // image is the full symmetric group on 3 points
        assert!(is_normal(&core));
        // core sits inside the original subgroup
        let td = schreier_transversal(&core);
        for t in &td.gens {
            assert_eq!(act.coset_of(t), 0);
        }
        // already-normal actions keep their index
        assert_eq!(normal_core(&swap_action()).unwrap().index(), 2);
        let id = Perm::identity(1);
        let trivial = CosetAction::new(2, vec![id.clone(), id]).unwrap();
        assert_eq!(normal_core(&trivial).unwrap().index(), 1);
    }

    #[test]
    fn core_bound() {
        let a = Perm::new(vec![1, 0, 2]).unwrap();
        let b = Perm::new(vec![0, 2, 1]).unwrap();
        let act = CosetAction::new(2, vec![a, b]).unwrap();
        assert!(matches!(normal_core_bounded(&act, 5), Err(Error::ImageTooLarge(5))));
    }

    #[test]
    fn rewriting() {
        let act = swap_action();
        let td = schreier_transversal(&act);
        let idx = |word: &str| {
            td.gens.iter().position(|t| *t == w(word)).unwrap() as i64 + 1
        };
        assert_eq!(rewrite_in_t(&td, &act, &w("aa")).unwrap(), vec![idx("aa")]);
        assert_eq!(rewrite_in_t(&td, &act, &w("e")).unwrap(), Vec::<i64>::new());
        // ab * aa scans to the two generators in order
        let h = w("ab").times(&w("aa"));
        assert_eq!(
            rewrite_in_t(&td, &act, &h).unwrap(),
            vec![idx("ab"), idx("aa")]
        );
        assert!(matches!(
            rewrite_in_t(&td, &act, &w("a")),
            Err(Error::NotInSubgroup(1))
        ));
    }

    #[test]
    fn rewrite_multiplies_back() {
        let act = swap_action();
        let td = schreier_transversal(&act);
        for h in [w("aa"), w("ab"), w("bA"), w("abab"), w("aabA"), w("bb")] {
            assert_eq!(act.coset_of(&h), 0, "test word must be in the subgroup");
            let tw = rewrite_in_t(&td, &act, &h).unwrap();
            assert!(tw.len() <= h.len());
            let mut prod = Word::identity(2);
            for i in tw {
                let t = &td.gens[i.unsigned_abs() as usize - 1];
                prod = if i > 0 { prod.times(t) } else { prod.times(&t.inverse()) };
            }
            assert_eq!(prod, h);
        }
    }

    #[test]
    fn subedge_identity_examples() {
        let td = schreier_transversal(&swap_action());
        let rep = check_subedge_identity(&td);
        assert!(rep.holds);
        assert_eq!(rep.lhs.coeffs(), &[4, 2]);

        let id = Perm::identity(1);
        let act1 = CosetAction::new(2, vec![id.clone(), id]).unwrap();
        let rep1 = check_subedge_identity(&schreier_transversal(&act1));
        assert!(rep1.holds);
        assert_eq!(rep1.lhs.coeffs(), &[1, 1]);

        let a = Perm::new(vec![1, 2, 0]).unwrap();
        let b = Perm::identity(3);
        let act3 = CosetAction::new(2, vec![a, b]).unwrap();
        assert!(check_subedge_identity(&schreier_transversal(&act3)).holds);
    }

    #[test]
    fn comb_identity_examples() {
        let one = WordSet::new(2, [w("e")]).unwrap();
        assert!(check_comb_identity(&one).unwrap().holds);
        let two = WordSet::new(2, [w("e"), w("a")]).unwrap();
        let rep = check_comb_identity(&two).unwrap();
        assert!(rep.holds);
        assert_eq!(rep.main_lhs.coeffs(), &[4, 2]);
        let three = WordSet::new(2, [w("e"), w("a"), w("b")]).unwrap();
        assert!(check_comb_identity(&three).unwrap().holds);
        // {e, aa} is not connected at all
        let gap = WordSet::new(2, [w("e"), w("aa")]).unwrap();
        assert!(matches!(check_comb_identity(&gap), Err(Error::NotBiConnected)));
        let off = WordSet::new(2, [w("a"), w("aa")]).unwrap();
        assert!(matches!(check_comb_identity(&off), Err(Error::MissingIdentity)));
    }

    #[test]
    fn kps_values() {
        assert_eq!(kps_scaling(&[1, 1], &[1]), Ratio::new(1, 1)); // wedge of 2 circles
        assert_eq!(kps_scaling(&[1, 1, 1], &[1]), Ratio::new(2, 1));
        assert_eq!(kps_scaling(&[1], &[2, 3]), Ratio::new(1, 6));
        assert_eq!(kps_scaling(&[], &[4]), Ratio::new(-1, 4));
    }
}
