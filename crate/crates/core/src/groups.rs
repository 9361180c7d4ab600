//! Finite groups presented as one-unit groupoids, plus subgroup and double
//! coset machinery used by the induction and hypergroup modules.
//!
//! Permutations are stored in one-line notation; the identity is always named
//! `"e"` (which sorts before every other element id, so deterministic
//! lexicographic section choices pick it first).

use std::collections::{BTreeMap, BTreeSet};

use crate::groupoid::{group_from_mult_table, FiniteGroupoid, GroupoidError};

fn perm_id(p: &[usize]) -> String {
    if p.iter().enumerate().all(|(i, &x)| i == x) {
        return "e".to_string();
    }
    let digits: String = p.iter().map(|&x| x.to_string()).collect();
    format!("g{digits}")
}

fn perm_compose(a: &[usize], b: &[usize]) -> Vec<usize> {
    // (a∘b)(x) = a(b(x))
    b.iter().map(|&x| a[x]).collect()
}

/// Closure of a generating set of permutations of {0,..,n-1}; elements are
/// returned with the identity first, the rest in id order.
pub fn perm_closure(n: usize, generators: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let identity: Vec<usize> = (0..n).collect();
    let mut seen: BTreeSet<Vec<usize>> = BTreeSet::new();
    seen.insert(identity.clone());
    let mut frontier = vec![identity.clone()];
    while let Some(p) = frontier.pop() {
        for g in generators {
            let q = perm_compose(g, &p);
            if seen.insert(q.clone()) {
                frontier.push(q);
            }
        }
    }
    let mut elems: Vec<Vec<usize>> = seen.into_iter().collect();
    elems.sort_by_key(|p| perm_id(p));
    let e_pos = elems.iter().position(|p| perm_id(p) == "e").unwrap();
    elems.swap(0, e_pos);
    elems
}

/// Builds the one-unit groupoid of a permutation group given by generators.
pub fn perm_group(n: usize, generators: &[Vec<usize>]) -> FiniteGroupoid {
    let elems = perm_closure(n, generators);
    let index: BTreeMap<Vec<usize>, usize> = elems
        .iter()
        .enumerate()
        .map(|(i, p)| (p.clone(), i))
        .collect();
    let ids: Vec<String> = elems.iter().map(|p| perm_id(p)).collect();
    let table: Vec<Vec<usize>> = elems
        .iter()
        .map(|a| elems.iter().map(|b| index[&perm_compose(a, b)]).collect())
        .collect();
    group_from_mult_table(&ids, &table).expect("permutation group tables are consistent")
}

/// Cyclic group of order n with ids e, g1, .., g{n-1} (gk = rotation by k).
pub fn cyclic_group(n: usize) -> FiniteGroupoid {
    let ids: Vec<String> = (0..n)
        .map(|k| if k == 0 { "e".into() } else { format!("g{k}") })
        .collect();
    let table: Vec<Vec<usize>> = (0..n).map(|i| (0..n).map(|j| (i + j) % n).collect()).collect();
    group_from_mult_table(&ids, &table).expect("cyclic group tables are consistent")
}

/// Symmetric group on n letters (n small).
pub fn symmetric_group(n: usize) -> FiniteGroupoid {
    assert!(n >= 1 && n <= 4, "symmetric_group is intended for n <= 4");
    let mut gens = Vec::new();
    if n >= 2 {
        let mut t: Vec<usize> = (0..n).collect();
        t.swap(0, 1);
        gens.push(t);
    }
    if n >= 3 {
        let cycle: Vec<usize> = (0..n).map(|i| (i + 1) % n).collect();
        gens.push(cycle);
    }
    perm_group(n, &gens)
}

/// Alternating group on 4 letters.
pub fn alternating_group_4() -> FiniteGroupoid {
    perm_group(4, &[vec![1, 2, 0, 3], vec![1, 0, 3, 2]])
}

/// Dihedral group of order 2n acting on the vertices of an n-gon.
pub fn dihedral_group(n: usize) -> FiniteGroupoid {
    assert!(n >= 2);
    let rot: Vec<usize> = (0..n).map(|i| (i + 1) % n).collect();
    let refl: Vec<usize> = (0..n).map(|i| (n - i) % n).collect();
    perm_group(n, &[rot, refl])
}

/// A view onto a one-unit groupoid exposing group operations by arrow index.
#[derive(Debug, Clone)]
pub struct GroupView<'a> {
    pub g: &'a FiniteGroupoid,
    pub unit: usize,
}

impl<'a> GroupView<'a> {
    pub fn new(g: &'a FiniteGroupoid) -> Result<Self, GroupoidError> {
        if g.units().len() != 1 {
            return Err(GroupoidError::MalformedTable(
                "expected a one-unit groupoid".into(),
            ));
        }
        Ok(GroupView {
            g,
            unit: g.units()[0],
        })
    }

    pub fn order(&self) -> usize {
        self.g.n_arrows()
    }

    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.g.compose(a, b).expect("group elements always compose")
    }

    pub fn inv(&self, a: usize) -> usize {
        self.g.inv(a)
    }

    pub fn elements(&self) -> Vec<usize> {
        self.g.arrows().collect()
    }

    /// Subgroup generated by a set of elements.
    pub fn generated_subgroup(&self, gens: &[usize]) -> BTreeSet<usize> {
        let mut set = BTreeSet::new();
        set.insert(self.unit);
        let mut frontier = vec![self.unit];
        while let Some(x) = frontier.pop() {
            for &g in gens {
                for y in [self.mul(g, x), self.mul(self.inv(g), x)] {
                    if set.insert(y) {
                        frontier.push(y);
                    }
                }
            }
        }
        set
    }

    /// Every subgroup, by saturation under joins of cyclic subgroups.
    pub fn all_subgroups(&self) -> Vec<BTreeSet<usize>> {
        let mut subs: BTreeSet<BTreeSet<usize>> = BTreeSet::new();
        for a in self.elements() {
            subs.insert(self.generated_subgroup(&[a]));
        }
        loop {
            let snapshot: Vec<BTreeSet<usize>> = subs.iter().cloned().collect();
            let mut grew = false;
            for s in &snapshot {
                for a in self.elements() {
                    if s.contains(&a) {
                        continue;
                    }
                    let mut gens: Vec<usize> = s.iter().copied().collect();
                    gens.push(a);
                    let bigger = self.generated_subgroup(&gens);
                    if subs.insert(bigger) {
                        grew = true;
                    }
                }
            }
            if !grew {
                break;
            }
        }
        subs.into_iter().collect()
    }

    pub fn is_subgroup(&self, set: &BTreeSet<usize>) -> bool {
        if !set.contains(&self.unit) {
            return false;
        }
        for &a in set {
            if !set.contains(&self.inv(a)) {
                return false;
            }
            for &b in set {
                if !set.contains(&self.mul(a, b)) {
                    return false;
                }
            }
        }
        true
    }

    /// Left cosets gK, each sorted, ordered by their minimal element.
    pub fn left_cosets(&self, k: &BTreeSet<usize>) -> Vec<BTreeSet<usize>> {
        let mut seen: BTreeSet<usize> = BTreeSet::new();
        let mut cosets = Vec::new();
        for g in self.elements() {
            if seen.contains(&g) {
                continue;
            }
            let coset: BTreeSet<usize> = k.iter().map(|&h| self.mul(g, h)).collect();
            for &x in &coset {
                seen.insert(x);
            }
            cosets.push(coset);
        }
        cosets.sort_by_key(|c| *c.iter().next().unwrap());
        cosets
    }

    /// Double cosets H1 g H2, ordered by minimal element.
    pub fn double_cosets(
        &self,
        h1: &BTreeSet<usize>,
        h2: &BTreeSet<usize>,
    ) -> Vec<BTreeSet<usize>> {
        let mut seen: BTreeSet<usize> = BTreeSet::new();
        let mut out = Vec::new();
        for g in self.elements() {
            if seen.contains(&g) {
                continue;
            }
            let mut coset = BTreeSet::new();
            for &a in h1 {
                let ag = self.mul(a, g);
                for &b in h2 {
                    coset.insert(self.mul(ag, b));
                }
            }
            for &x in &coset {
                seen.insert(x);
            }
            out.push(coset);
        }
        out.sort_by_key(|c| *c.iter().next().unwrap());
        out
    }

    /// Conjugate subgroup x K x⁻¹.
    pub fn conjugate_subgroup(&self, k: &BTreeSet<usize>, x: usize) -> BTreeSet<usize> {
        let xi = self.inv(x);
        k.iter().map(|&h| self.mul(self.mul(x, h), xi)).collect()
    }

    /// The sub-groupoid (a group) spanned by a subgroup's elements.
    pub fn subgroup_groupoid(&self, set: &BTreeSet<usize>) -> Result<FiniteGroupoid, GroupoidError> {
        if !self.is_subgroup(set) {
            return Err(GroupoidError::NotASubgroup(format!(
                "{:?}",
                set.iter()
                    .map(|&a| self.g.arrow_id(a))
                    .collect::<Vec<_>>()
            )));
        }
        let ids: Vec<usize> = set.iter().copied().collect();
        // Reuse the multiplication table restricted to the subgroup, with the
        // identity moved to position 0.
        let mut ordered = ids.clone();
        let e_pos = ordered.iter().position(|&a| a == self.unit).unwrap();
        ordered.swap(0, e_pos);
        let names: Vec<String> = ordered
            .iter()
            .map(|&a| self.g.arrow_id(a).to_string())
            .collect();
        let pos: BTreeMap<usize, usize> = ordered.iter().enumerate().map(|(i, &a)| (a, i)).collect();
        let table: Vec<Vec<usize>> = ordered
            .iter()
            .map(|&a| ordered.iter().map(|&b| pos[&self.mul(a, b)]).collect())
            .collect();
        group_from_mult_table(&names, &table)
    }

    pub fn element_by_id(&self, id: &str) -> Option<usize> {
        self.g.arrow_index(id)
    }

    /// Conjugacy classes, each sorted, ordered by minimal element.
    pub fn conjugacy_classes(&self) -> Vec<BTreeSet<usize>> {
        let mut seen = BTreeSet::new();
        let mut classes = Vec::new();
        for a in self.elements() {
            if seen.contains(&a) {
                continue;
            }
            let class: BTreeSet<usize> = self
                .elements()
                .into_iter()
                .map(|x| self.mul(self.mul(x, a), self.inv(x)))
                .collect();
            for &c in &class {
                seen.insert(c);
            }
            classes.push(class);
        }
        classes.sort_by_key(|c| *c.iter().next().unwrap());
        classes
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn s3_has_six_elements_and_three_classes() {
        let s3 = symmetric_group(3);
        assert_eq!(s3.n_arrows(), 6);
        let v = GroupView::new(&s3).unwrap();
        let classes = v.conjugacy_classes();
        let mut sizes: Vec<usize> = classes.iter().map(|c| c.len()).collect();
        sizes.sort();
        assert_eq!(sizes, vec![1, 2, 3]);
    }

    #[test]
    fn s3_subgroups() {
        let s3 = symmetric_group(3);
        let v = GroupView::new(&s3).unwrap();
        let subs = v.all_subgroups();
        // {e}, three order-2, one order-3, S3 itself.
        assert_eq!(subs.len(), 6);
        let orders: Vec<usize> = {
            let mut o: Vec<usize> = subs.iter().map(|s| s.len()).collect();
            o.sort();
            o
        };
        assert_eq!(orders, vec![1, 2, 2, 2, 3, 6]);
    }

    #[test]
    fn s3_double_cosets_by_transposition() {
        let s3 = symmetric_group(3);
        let v = GroupView::new(&s3).unwrap();
        let t12 = v.element_by_id("g102").unwrap();
        let k = v.generated_subgroup(&[t12]);
        assert_eq!(k.len(), 2);
        let dcs = v.double_cosets(&k, &k);
        let mut sizes: Vec<usize> = dcs.iter().map(|c| c.len()).collect();
        sizes.sort();
        assert_eq!(sizes, vec![2, 4]);
    }

    #[test]
    fn small_group_orders() {
        assert_eq!(cyclic_group(12).n_arrows(), 12);
        assert_eq!(dihedral_group(4).n_arrows(), 8);
        assert_eq!(dihedral_group(6).n_arrows(), 12);
        assert_eq!(alternating_group_4().n_arrows(), 12);
    }
}
