//! Permutation-group analysis of monodromy generators: order, transitivity,
//! block systems, and the classification flags the projection verdicts rest
//! on.

mod perm;

pub use perm::Perm;

use crate::error::{Error, Result};
use serde::Serialize;
use std::collections::{HashMap, HashSet, VecDeque};
use std::sync::OnceLock;

/// A permutation group given by generators on {0..d-1}.
///
/// The base-and-strong-generating-set structure is computed on first use and
/// cached.
#[derive(Debug)]
pub struct PermGroup {
    degree: usize,
    generators: Vec<Perm>,
    bsgs: OnceLock<Bsgs>,
}

impl PermGroup {
    pub fn new(degree: usize, generators: Vec<Perm>) -> Self {
        let generators: Vec<Perm> =
            generators.into_iter().filter(|g| !g.is_identity()).collect();
        for g in &generators {
            assert_eq!(g.degree(), degree, "generator degree mismatch");
        }
        PermGroup { degree, generators, bsgs: OnceLock::new() }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn generators(&self) -> &[Perm] {
        &self.generators
    }

    fn bsgs(&self) -> &Bsgs {
        self.bsgs.get_or_init(|| Bsgs::build(self.degree, &self.generators))
    }

    /// Exact group order via the stabilizer chain.
    pub fn order(&self) -> u128 {
        self.bsgs().order()
    }

    /// Orbit of a point under the generators.
    pub fn orbit(&self, point: usize) -> Vec<usize> {
        let mut seen = vec![false; self.degree];
        let mut queue = VecDeque::from([point]);
        seen[point] = true;
        let mut out = vec![point];
        while let Some(p) = queue.pop_front() {
            for g in &self.generators {
                let q = g.apply(p);
                if !seen[q] {
                    seen[q] = true;
                    out.push(q);
                    queue.push_back(q);
                }
            }
        }
        out.sort_unstable();
        out
    }

    pub fn is_transitive(&self) -> bool {
        self.degree <= 1 || self.orbit(0).len() == self.degree
    }

    pub fn contains(&self, p: &Perm) -> bool {
        self.bsgs().sift(p).is_identity()
    }

    /// All minimal nontrivial block systems of a transitive group.
    ///
    /// Uses the classical union-find refinement seeded by the pairs {0, j}.
    /// An empty result means the group is primitive.
    pub fn minimal_blocks(&self) -> Result<Vec<BlockSystem>> {
        if !self.is_transitive() {
            return Err(Error::NotTransitive);
        }
        let d = self.degree;
        let mut found: Vec<BlockSystem> = Vec::new();
        for j in 1..d {
            if let Some(system) = self.finest_system_joining(0, j) {
                if !found.contains(&system) {
                    found.push(system);
                }
            }
        }
        // Keep only systems with no strictly finer system below them.
        let minimal: Vec<BlockSystem> = found
            .iter()
            .filter(|s| !found.iter().any(|t| t != *s && t.refines(s)))
            .cloned()
            .collect();
        Ok(minimal)
    }

    /// Finest block system in which `a` and `b` share a block; `None` when
    /// that system is the trivial one-block partition.
    fn finest_system_joining(&self, a: usize, b: usize) -> Option<BlockSystem> {
        let d = self.degree;
        let mut parent: Vec<usize> = (0..d).collect();
        fn find(parent: &mut Vec<usize>, i: usize) -> usize {
            if parent[i] != i {
                let r = find(parent, parent[i]);
                parent[i] = r;
            }
            parent[i]
        }
        fn union(parent: &mut Vec<usize>, a: usize, b: usize) -> bool {
            let (ra, rb) = (find(parent, a), find(parent, b));
            if ra == rb {
                return false;
            }
            parent[ra] = rb;
            true
        }
        union(&mut parent, a, b);
        let mut dirty = true;
        while dirty {
            dirty = false;
            for g in &self.generators {
                for i in 0..d {
                    let ri = find(&mut parent, i);
                    if ri != i {
                        // i ~ ri, so their images must be glued too.
                        if union(&mut parent, g.apply(i), g.apply(ri)) {
                            dirty = true;
                        }
                    }
                }
            }
        }
        let mut blocks: HashMap<usize, Vec<usize>> = HashMap::new();
        for i in 0..d {
            let r = find(&mut parent, i);
            blocks.entry(r).or_default().push(i);
        }
        let mut blocks: Vec<Vec<usize>> = blocks.into_values().collect();
        for b in &mut blocks {
            b.sort_unstable();
        }
        blocks.sort();
        let size = blocks[0].len();
        if size == d || size == 1 {
            return None;
        }
        Some(BlockSystem { blocks })
    }

    /// Classification flags for a transitive group.
    pub fn classify(&self) -> Result<GroupFlags> {
        if !self.is_transitive() {
            return Err(Error::NotTransitive);
        }
        let d = self.degree as u128;
        let order = self.order();
        let full = factorial(self.degree);
        let is_full_symmetric = order == full;
        let is_alternating =
            self.degree >= 3 && order * 2 == full && self.generators.iter().all(|g| g.is_even());
        let is_regular = order == d;
        let is_primitive = self.minimal_blocks()?.is_empty();
        let contains_transposition = self.search_transposition(order);
        Ok(GroupFlags {
            order,
            is_transitive: true,
            is_full_symmetric,
            is_alternating,
            is_regular,
            is_primitive,
            contains_transposition,
        })
    }

    /// Transposition search: generators, pairwise products, conjugates of
    /// generators by generators; exhaustive enumeration when the order is
    /// small enough, `None` (unknown) otherwise.
    fn search_transposition(&self, order: u128) -> Option<bool> {
        for g in &self.generators {
            if g.is_transposition() {
                return Some(true);
            }
        }
        for a in &self.generators {
            for b in &self.generators {
                if a.then(b).is_transposition() {
                    return Some(true);
                }
                if b.inverse().then(&a.then(b)).is_transposition() {
                    return Some(true);
                }
            }
        }
        const EXHAUSTIVE_CAP: u128 = 1_000_000;
        if order <= EXHAUSTIVE_CAP {
            let all = self.enumerate();
            return Some(all.iter().any(|p| p.is_transposition()));
        }
        None
    }

    /// Breadth-first closure of the generators. Only safe for small orders.
    pub fn enumerate(&self) -> Vec<Perm> {
        let id = Perm::identity(self.degree);
        let mut seen: HashSet<Perm> = HashSet::from([id.clone()]);
        let mut queue = VecDeque::from([id]);
        while let Some(p) = queue.pop_front() {
            for g in &self.generators {
                let q = p.then(g);
                if seen.insert(q.clone()) {
                    queue.push_back(q);
                }
            }
        }
        let mut all: Vec<Perm> = seen.into_iter().collect();
        all.sort();
        all
    }
}

/// A partition of {0..d-1} into equal-size blocks permuted by the group.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BlockSystem {
    pub blocks: Vec<Vec<usize>>,
}

impl BlockSystem {
    pub fn block_size(&self) -> usize {
        self.blocks[0].len()
    }

    /// True when every block of `self` is contained in a block of `other`.
    pub fn refines(&self, other: &BlockSystem) -> bool {
        self.block_size() < other.block_size()
            && self.blocks.iter().all(|b| {
                other.blocks.iter().any(|ob| b.iter().all(|x| ob.contains(x)))
            })
    }

    /// Check the defining property against a generator set.
    pub fn invariant_under(&self, gens: &[Perm]) -> bool {
        for g in gens {
            for block in &self.blocks {
                let image: Vec<usize> = {
                    let mut v: Vec<usize> = block.iter().map(|&x| g.apply(x)).collect();
                    v.sort_unstable();
                    v
                };
                if !self.blocks.iter().any(|b| *b == image) {
                    return false;
                }
            }
        }
        true
    }
}

/// Conjugacy-invariant summary of a monodromy group.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GroupFlags {
    pub order: u128,
    pub is_transitive: bool,
    pub is_full_symmetric: bool,
    pub is_alternating: bool,
    pub is_regular: bool,
    pub is_primitive: bool,
    /// `None` means the bounded search was inconclusive.
    pub contains_transposition: Option<bool>,
}

pub fn factorial(n: usize) -> u128 {
    (1..=n as u128).product()
}

/// Deterministic Schreier-Sims stabilizer chain.
///
/// One global strong generating set; the generators relevant to level `i`
/// are those fixing `base[0..i]`. Levels are completed bottom-up, jumping
/// back down whenever a sifted Schreier generator survives.
#[derive(Debug)]
struct Bsgs {
    degree: usize,
    base: Vec<usize>,
    strong: Vec<Perm>,
    /// transversals[i]: orbit point -> element mapping base[i] to it
    transversals: Vec<HashMap<usize, Perm>>,
}

impl Bsgs {
    fn build(degree: usize, generators: &[Perm]) -> Bsgs {
        let mut b = Bsgs {
            degree,
            base: Vec::new(),
            strong: generators.iter().filter(|g| !g.is_identity()).cloned().collect(),
            transversals: Vec::new(),
        };
        if b.strong.is_empty() {
            return b;
        }
        // Every strong generator must move some base point.
        let gens = b.strong.clone();
        for g in &gens {
            b.ensure_base_moved_by(g);
        }
        b.complete();
        b
    }

    fn ensure_base_moved_by(&mut self, g: &Perm) {
        if self.base.iter().all(|&b| g.apply(b) == b) {
            let moved = (0..self.degree)
                .find(|&x| g.apply(x) != x)
                .expect("non-identity permutation moves a point");
            self.base.push(moved);
            self.transversals.push(HashMap::new());
        }
    }

    /// Strong generators fixing base[0..level].
    fn level_gens(&self, level: usize) -> Vec<Perm> {
        self.strong
            .iter()
            .filter(|g| self.base[..level].iter().all(|&b| g.apply(b) == b))
            .cloned()
            .collect()
    }

    fn recompute_transversal(&mut self, level: usize) {
        let gens = self.level_gens(level);
        let b = self.base[level];
        let mut tr = HashMap::new();
        tr.insert(b, Perm::identity(self.degree));
        let mut queue = VecDeque::from([b]);
        while let Some(p) = queue.pop_front() {
            let rep = tr[&p].clone();
            for g in &gens {
                let q = g.apply(p);
                if !tr.contains_key(&q) {
                    tr.insert(q, rep.then(g));
                    queue.push_back(q);
                }
            }
        }
        self.transversals[level] = tr;
    }

    /// Sift through levels `from..`; returns the residue and the level at
    /// which sifting stopped (base.len() if it passed everything).
    fn sift_from(&self, p: &Perm, from: usize) -> (Perm, usize) {
        let mut residue = p.clone();
        for level in from..self.base.len() {
            let image = residue.apply(self.base[level]);
            match self.transversals[level].get(&image) {
                Some(rep) => residue = residue.then(&rep.inverse()),
                None => return (residue, level),
            }
        }
        (residue, self.base.len())
    }

    fn complete(&mut self) {
        let mut level = self.base.len().saturating_sub(1);
        'outer: loop {
            self.recompute_transversal(level);
            let gens = self.level_gens(level);
            let orbit: Vec<usize> = {
                let mut o: Vec<usize> = self.transversals[level].keys().copied().collect();
                o.sort_unstable();
                o
            };
            for &x in &orbit {
                let u_x = self.transversals[level][&x].clone();
                for g in &gens {
                    let gx = g.apply(x);
                    let u_gx = self.transversals[level][&gx].clone();
                    let schreier = u_x.then(g).then(&u_gx.inverse());
                    if schreier.is_identity() {
                        continue;
                    }
                    let (residue, stuck) = self.sift_from(&schreier, level + 1);
                    if !residue.is_identity() {
                        // New strong generator fixing base[0..=level].
                        self.ensure_base_moved_by(&residue);
                        self.strong.push(residue);
                        level = stuck.min(self.base.len() - 1);
                        continue 'outer;
                    }
                }
            }
            if level == 0 {
                return;
            }
            level -= 1;
        }
    }

    fn order(&self) -> u128 {
        self.transversals.iter().map(|t| t.len().max(1) as u128).product()
    }

    fn sift(&self, p: &Perm) -> Perm {
        self.sift_from(p, 0).0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gens(degree: usize, cycles: &[&[&[usize]]]) -> PermGroup {
        let g = cycles.iter().map(|c| Perm::from_cycles(degree, c).unwrap()).collect();
        PermGroup::new(degree, g)
    }

    #[test]
    fn order_examples() {
        // {(1 2), (1 2 3 4)} generates S4
        let s4 = gens(4, &[&[&[0, 1]], &[&[0, 1, 2, 3]]]);
        assert_eq!(s4.order(), 24);
        let c4 = gens(4, &[&[&[0, 1, 2, 3]]]);
        assert_eq!(c4.order(), 4);
        // Klein four-group {(1 2)(3 4), (1 3)(2 4)}: closure has 4 elements
        let v4 = gens(4, &[&[&[0, 1], &[2, 3]], &[&[0, 2], &[1, 3]]]);
        assert_eq!(v4.order(), 4);
    }

    #[test]
    fn transitivity() {
        assert!(gens(4, &[&[&[0, 1, 2, 3]]]).is_transitive());
        assert!(!gens(4, &[&[&[0, 1]]]).is_transitive());
    }

    #[test]
    fn minimal_blocks_examples() {
        // cyclic <(1 2 3 4)>: exactly one system {{1,3},{2,4}}
        let c4 = gens(4, &[&[&[0, 1, 2, 3]]]);
        let blocks = c4.minimal_blocks().unwrap();
        assert_eq!(blocks.len(), 1);
        assert_eq!(blocks[0].blocks, vec![vec![0, 2], vec![1, 3]]);
        assert!(blocks[0].invariant_under(c4.generators()));

        let s4 = gens(4, &[&[&[0, 1]], &[&[0, 1, 2, 3]]]);
        assert!(s4.minimal_blocks().unwrap().is_empty());

        // prime degree forces primitivity
        let c5 = gens(5, &[&[&[0, 1, 2, 3, 4]]]);
        assert!(c5.minimal_blocks().unwrap().is_empty());

        assert!(gens(4, &[&[&[0, 1]]]).minimal_blocks().is_err());
    }

    #[test]
    fn classify_examples() {
        let s4 = gens(4, &[&[&[0, 1]], &[&[0, 1, 2, 3]]]).classify().unwrap();
        assert!(s4.is_full_symmetric);
        assert!(!s4.is_regular);
        assert!(s4.is_primitive);
        assert_eq!(s4.contains_transposition, Some(true));

        let c4 = gens(4, &[&[&[0, 1, 2, 3]]]).classify().unwrap();
        assert!(!c4.is_full_symmetric);
        assert!(c4.is_regular);
        assert!(!c4.is_primitive);
        assert_eq!(c4.contains_transposition, Some(false));

        let c5 = gens(5, &[&[&[0, 1, 2, 3, 4]]]).classify().unwrap();
        assert!(c5.is_regular);
        assert!(c5.is_primitive);
        assert_eq!(c5.contains_transposition, Some(false));
    }

    #[test]
    fn alternating_detection() {
        let a4 = gens(4, &[&[&[0, 1, 2]], &[&[1, 2, 3]]]);
        let flags = a4.classify().unwrap();
        assert_eq!(a4.order(), 12);
        assert!(flags.is_alternating);
        assert!(!flags.is_full_symmetric);
        assert_eq!(flags.contains_transposition, Some(false));
    }

    #[test]
    fn large_alternating_group_reports_unknown_transposition() {
        // A_12: order 12!/2, no transpositions at all; the bounded search
        // cannot decide that and must answer unknown rather than exhaust
        // 239 million elements.
        let g1 = Perm::from_cycles(12, &[&[0, 1, 2]]).unwrap();
        let g2 = Perm::from_cycles(12, &[&[0, 1], &[2, 3, 4, 5, 6, 7, 8, 9, 10, 11]]).unwrap();
        let a12 = PermGroup::new(12, vec![g1, g2]);
        assert_eq!(a12.order(), factorial(12) / 2);
        let flags = a12.classify().unwrap();
        assert!(flags.is_alternating);
        assert!(!flags.is_full_symmetric);
        assert_eq!(flags.contains_transposition, None);
    }

    #[test]
    fn membership_via_sift() {
        let s4 = gens(4, &[&[&[0, 1]], &[&[0, 1, 2, 3]]]);
        assert!(s4.contains(&Perm::from_cycles(4, &[&[2, 3]]).unwrap()));
        let a4 = gens(4, &[&[&[0, 1, 2]], &[&[1, 2, 3]]]);
        assert!(!a4.contains(&Perm::from_cycles(4, &[&[0, 1]]).unwrap()));
    }

    #[test]
    fn bsgs_matches_closure_on_random_sets() {
        use rand::seq::SliceRandom;
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..100 {
            let d = rng.gen_range(2..=7);
            let k = rng.gen_range(1..=3);
            let gens: Vec<Perm> = (0..k)
                .map(|_| {
                    let mut v: Vec<usize> = (0..d).collect();
                    v.shuffle(&mut rng);
                    Perm::from_images(v).unwrap()
                })
                .collect();
            let group = PermGroup::new(d, gens);
            let closure = group.enumerate();
            assert_eq!(group.order(), closure.len() as u128);
        }
    }
}
