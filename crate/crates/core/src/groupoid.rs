//! Finite groupoids, Haar systems and the standard builders.
//!
//! A finite groupoid is stored as explicit tables: a set of arrow ids, a
//! subset of unit arrows, range/source/inverse maps and a composition table
//! defined exactly on composable pairs. Units are identified with their
//! identity arrows throughout.

use std::collections::{BTreeMap, BTreeSet};

use num::{One, Signed, Zero};
use thiserror::Error;

use crate::report::ValidationReport;
use crate::scalars::{rat_int, Rat};

#[derive(Debug, Error)]
pub enum GroupoidError {
    #[error("malformed table: {0}")]
    MalformedTable(String),
    #[error("axiom violations: {0} finding(s)")]
    AxiomViolation(usize),
    #[error("unknown unit `{0}`")]
    UnknownUnit(String),
    #[error("unknown arrow `{0}`")]
    UnknownArrow(String),
    #[error("weight missing for arrow `{0}`")]
    WeightMissing(String),
    #[error("non-positive weight at arrow `{0}`")]
    NonPositiveWeight(String),
    #[error("not a subgroup: {0}")]
    NotASubgroup(String),
}

/// Raw groupoid data exactly as read from a document; validated, not trusted.
#[derive(Debug, Clone, Default)]
pub struct GroupoidTable {
    pub units: Vec<String>,
    /// (id, src, dst, inv) per arrow.
    pub arrows: Vec<(String, String, String, String)>,
    /// (g, h, gh) triples; defined exactly on composable pairs.
    pub compose: Vec<(String, String, String)>,
}

/// A validated finite groupoid. Immutable after construction.
#[derive(Debug, Clone)]
pub struct FiniteGroupoid {
    ids: Vec<String>,
    index: BTreeMap<String, usize>,
    units: Vec<usize>,
    is_unit: Vec<bool>,
    src: Vec<usize>,
    dst: Vec<usize>,
    inv: Vec<usize>,
    comp: BTreeMap<(usize, usize), usize>,
}

impl FiniteGroupoid {
    pub fn n_arrows(&self) -> usize {
        self.ids.len()
    }

    pub fn arrow_id(&self, i: usize) -> &str {
        &self.ids[i]
    }

    pub fn arrow_index(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn arrows(&self) -> impl Iterator<Item = usize> {
        0..self.ids.len()
    }

    /// Unit arrows, sorted by index (indices are in id-lexicographic order).
    pub fn units(&self) -> &[usize] {
        &self.units
    }

    pub fn is_unit(&self, arrow: usize) -> bool {
        self.is_unit[arrow]
    }

    /// Source unit (an arrow index that is a unit).
    pub fn s(&self, arrow: usize) -> usize {
        self.src[arrow]
    }

    /// Range unit.
    pub fn r(&self, arrow: usize) -> usize {
        self.dst[arrow]
    }

    pub fn inv(&self, arrow: usize) -> usize {
        self.inv[arrow]
    }

    pub fn compose(&self, first: usize, second: usize) -> Option<usize> {
        self.comp.get(&(first, second)).copied()
    }

    /// Arrows with range u.
    pub fn range_fiber(&self, u: usize) -> Vec<usize> {
        self.arrows().filter(|&a| self.dst[a] == u).collect()
    }

    /// Arrows with source u.
    pub fn source_fiber(&self, u: usize) -> Vec<usize> {
        self.arrows().filter(|&a| self.src[a] == u).collect()
    }

    /// Isotropy arrows at u: range and source both u.
    pub fn isotropy_arrows(&self, u: usize) -> Vec<usize> {
        self.arrows()
            .filter(|&a| self.dst[a] == u && self.src[a] == u)
            .collect()
    }

    /// Partition of the unit set into orbits (two units are connected when an
    /// arrow joins them).
    pub fn unit_orbits(&self) -> Vec<Vec<usize>> {
        let mut class: BTreeMap<usize, usize> = BTreeMap::new();
        let mut orbits: Vec<Vec<usize>> = Vec::new();
        for &u in &self.units {
            if class.contains_key(&u) {
                continue;
            }
            let id = orbits.len();
            let mut queue = vec![u];
            class.insert(u, id);
            let mut members = vec![u];
            while let Some(v) = queue.pop() {
                for a in self.arrows() {
                    let (x, y) = (self.dst[a], self.src[a]);
                    if x == v && !class.contains_key(&y) {
                        class.insert(y, id);
                        members.push(y);
                        queue.push(y);
                    } else if y == v && !class.contains_key(&x) {
                        class.insert(x, id);
                        members.push(x);
                        queue.push(x);
                    }
                }
            }
            members.sort();
            orbits.push(members);
        }
        orbits
    }

    pub fn to_table(&self) -> GroupoidTable {
        GroupoidTable {
            units: self.units.iter().map(|&u| self.ids[u].clone()).collect(),
            arrows: self
                .arrows()
                .map(|a| {
                    (
                        self.ids[a].clone(),
                        self.ids[self.src[a]].clone(),
                        self.ids[self.dst[a]].clone(),
                        self.ids[self.inv[a]].clone(),
                    )
                })
                .collect(),
            compose: self
                .comp
                .iter()
                .map(|(&(g, h), &gh)| {
                    (
                        self.ids[g].clone(),
                        self.ids[h].clone(),
                        self.ids[gh].clone(),
                    )
                })
                .collect(),
        }
    }

    /// Opposite groupoid: same arrows, range and source exchanged, products
    /// reversed.
    pub fn opposite(&self) -> FiniteGroupoid {
        let mut comp = BTreeMap::new();
        for (&(g, h), &gh) in &self.comp {
            comp.insert((h, g), gh);
        }
        FiniteGroupoid {
            ids: self.ids.clone(),
            index: self.index.clone(),
            units: self.units.clone(),
            is_unit: self.is_unit.clone(),
            src: self.dst.clone(),
            dst: self.src.clone(),
            inv: self.inv.clone(),
            comp,
        }
    }

    /// Builds from a raw table, insisting on well-formed ids and on every
    /// groupoid axiom. Use [`validate_groupoid`] to get the full finding list.
    pub fn from_table(table: &GroupoidTable) -> Result<FiniteGroupoid, GroupoidError> {
        let (g, report) = build_and_check(table)?;
        if !report.is_ok() {
            return Err(GroupoidError::AxiomViolation(report.findings.len()));
        }
        Ok(g)
    }
}

/// Resolves a raw table into a groupoid candidate without checking axioms.
fn resolve(table: &GroupoidTable) -> Result<FiniteGroupoid, GroupoidError> {
    let mut ids: Vec<String> = table.arrows.iter().map(|a| a.0.clone()).collect();
    ids.sort();
    let mut index = BTreeMap::new();
    for (i, id) in ids.iter().enumerate() {
        if index.insert(id.clone(), i).is_some() {
            return Err(GroupoidError::MalformedTable(format!(
                "duplicate arrow id `{id}`"
            )));
        }
    }
    let n = ids.len();
    let look = |id: &str| -> Result<usize, GroupoidError> {
        index
            .get(id)
            .copied()
            .ok_or_else(|| GroupoidError::MalformedTable(format!("dangling id `{id}`")))
    };
    let mut src = vec![0usize; n];
    let mut dst = vec![0usize; n];
    let mut inv = vec![0usize; n];
    for (id, s, d, i) in &table.arrows {
        let a = look(id)?;
        src[a] = look(s)?;
        dst[a] = look(d)?;
        inv[a] = look(i)?;
    }
    let mut is_unit = vec![false; n];
    let mut units = Vec::new();
    for u in &table.units {
        let ui = look(u)?;
        if !is_unit[ui] {
            is_unit[ui] = true;
            units.push(ui);
        }
    }
    units.sort();
    let mut comp = BTreeMap::new();
    for (g, h, gh) in &table.compose {
        let key = (look(g)?, look(h)?);
        let val = look(gh)?;
        if let Some(prev) = comp.insert(key, val) {
            if prev != val {
                return Err(GroupoidError::MalformedTable(format!(
                    "conflicting compose entries for ({g},{h})"
                )));
            }
        }
    }
    Ok(FiniteGroupoid {
        ids,
        index,
        units,
        is_unit,
        src,
        dst,
        inv,
        comp,
    })
}

fn build_and_check(
    table: &GroupoidTable,
) -> Result<(FiniteGroupoid, ValidationReport), GroupoidError> {
    let g = resolve(table)?;
    let mut rep = ValidationReport::new();
    let id = |a: usize| g.ids[a].clone();

    for &u in &g.units {
        if g.src[u] != u || g.dst[u] != u {
            rep.violation(
                "unit-maps",
                id(u),
                "range and source of a unit must be the unit itself",
            );
        }
        if g.inv[u] != u {
            rep.violation("unit-inverse", id(u), "a unit must be its own inverse");
        }
    }
    for a in g.arrows() {
        if !g.is_unit[g.src[a]] {
            rep.violation("source-not-unit", id(a), "source is not a declared unit");
        }
        if !g.is_unit[g.dst[a]] {
            rep.violation("range-not-unit", id(a), "range is not a declared unit");
        }
        if g.inv[g.inv[a]] != a {
            rep.violation("involution", id(a), "inverse is not an involution");
        }
        if g.dst[g.inv[a]] != g.src[a] || g.src[g.inv[a]] != g.dst[a] {
            rep.violation(
                "inverse-fibers",
                id(a),
                "r(inv a) must equal s(a) and s(inv a) must equal r(a)",
            );
        }
    }
    // Composition defined exactly on composable pairs.
    for a in g.arrows() {
        for b in g.arrows() {
            let composable = g.src[a] == g.dst[b];
            match g.comp.get(&(a, b)) {
                Some(&ab) => {
                    if !composable {
                        rep.violation(
                            "compose-domain",
                            format!("({},{})", id(a), id(b)),
                            "product defined on a non-composable pair",
                        );
                    } else {
                        if g.dst[ab] != g.dst[a] || g.src[ab] != g.src[b] {
                            rep.violation(
                                "compose-fibers",
                                format!("({},{})", id(a), id(b)),
                                "r(ab)=r(a) and s(ab)=s(b) must hold",
                            );
                        }
                    }
                }
                None => {
                    if composable {
                        rep.violation(
                            "compose-missing",
                            format!("({},{})", id(a), id(b)),
                            "composable pair without a product entry",
                        );
                    }
                }
            }
        }
    }
    // Identities, inverse law, associativity (only meaningful where products exist).
    for a in g.arrows() {
        let su = g.src[a];
        let ru = g.dst[a];
        if g.comp.get(&(a, su)) != Some(&a) {
            rep.violation("right-identity", id(a), "a·i(s(a)) must equal a");
        }
        if g.comp.get(&(ru, a)) != Some(&a) {
            rep.violation("left-identity", id(a), "i(r(a))·a must equal a");
        }
        if g.comp.get(&(a, g.inv[a])) != Some(&ru) {
            rep.violation("inverse-law", id(a), "a·a⁻¹ must equal i(r(a))");
        }
    }
    for a in g.arrows() {
        for b in g.arrows() {
            if g.src[a] != g.dst[b] {
                continue;
            }
            for c in g.arrows() {
                if g.src[b] != g.dst[c] {
                    continue;
                }
                let ab_c = g
                    .comp
                    .get(&(a, b))
                    .and_then(|&ab| g.comp.get(&(ab, c)).copied());
                let a_bc = g
                    .comp
                    .get(&(b, c))
                    .and_then(|&bc| g.comp.get(&(a, bc)).copied());
                if let (Some(x), Some(y)) = (ab_c, a_bc) {
                    if x != y {
                        rep.violation(
                            "associativity",
                            format!("({},{},{})", id(a), id(b), id(c)),
                            "(ab)c differs from a(bc)",
                        );
                    }
                }
            }
        }
    }
    rep.normalize();
    Ok((g, rep))
}

/// Checks every groupoid axiom on a raw table. `Err` is reserved for tables
/// that cannot even be resolved (dangling or duplicate ids).
pub fn validate_groupoid(table: &GroupoidTable) -> Result<ValidationReport, GroupoidError> {
    build_and_check(table).map(|(_, rep)| rep)
}

/// A left Haar system: one strictly positive weight per arrow, left invariant.
#[derive(Debug, Clone, PartialEq)]
pub struct HaarSystem {
    pub weights: Vec<Rat>,
}

impl HaarSystem {
    pub fn weight(&self, arrow: usize) -> &Rat {
        &self.weights[arrow]
    }

    /// Total mass of the range fiber at u.
    pub fn fiber_mass(&self, g: &FiniteGroupoid, u: usize) -> Rat {
        g.range_fiber(u)
            .into_iter()
            .map(|a| self.weights[a].clone())
            .fold(Rat::zero(), |acc, w| acc + w)
    }
}

/// The counting Haar system: weight 1 on every arrow.
pub fn counting_haar(g: &FiniteGroupoid) -> HaarSystem {
    HaarSystem {
        weights: vec![rat_int(1); g.n_arrows()],
    }
}

/// Haar system with weight depending only on the source unit; every left
/// invariant system on a finite groupoid has this form.
pub fn source_weighted_haar(g: &FiniteGroupoid, omega: &BTreeMap<usize, Rat>) -> HaarSystem {
    HaarSystem {
        weights: g
            .arrows()
            .map(|a| omega.get(&g.s(a)).cloned().unwrap_or_else(|| rat_int(1)))
            .collect(),
    }
}

/// Left invariance: weight(ab) = weight(b) for every composable pair, plus
/// positivity and completeness.
pub fn validate_haar(g: &FiniteGroupoid, haar: &HaarSystem) -> ValidationReport {
    let mut rep = ValidationReport::new();
    if haar.weights.len() != g.n_arrows() {
        rep.violation(
            "weight-missing",
            "",
            format!(
                "expected {} weights, found {}",
                g.n_arrows(),
                haar.weights.len()
            ),
        );
        return rep;
    }
    for a in g.arrows() {
        if !haar.weights[a].is_positive() {
            rep.violation(
                "non-positive-weight",
                g.arrow_id(a),
                "Haar weights must be strictly positive",
            );
        }
    }
    for a in g.arrows() {
        for b in g.arrows() {
            if g.s(a) != g.r(b) {
                continue;
            }
            let ab = match g.compose(a, b) {
                Some(x) => x,
                None => continue,
            };
            if haar.weights[ab] != haar.weights[b] {
                rep.violation(
                    "left-invariance",
                    format!("({},{})", g.arrow_id(a), g.arrow_id(b)),
                    "weight(ab) must equal weight(b)",
                );
            }
        }
    }
    rep.normalize();
    rep
}

/// Isotropy group at a unit together with its normalized Haar weight.
#[derive(Debug, Clone)]
pub struct IsotropySummary {
    pub point: String,
    pub group: FiniteGroupoid,
    /// Uniform probability weight 1/|G(x)| carried by each element.
    pub kappa: Rat,
    /// Arrow ids of the isotropy elements inside the ambient groupoid.
    pub members: Vec<String>,
}

pub fn isotropy(g: &FiniteGroupoid, unit_id: &str) -> Result<IsotropySummary, GroupoidError> {
    let u = g
        .arrow_index(unit_id)
        .filter(|&i| g.is_unit(i))
        .ok_or_else(|| GroupoidError::UnknownUnit(unit_id.to_string()))?;
    let members: Vec<usize> = g.isotropy_arrows(u);
    let member_ids: Vec<String> = members.iter().map(|&a| g.arrow_id(a).to_string()).collect();
    let set: BTreeSet<usize> = members.iter().copied().collect();
    let mut table = GroupoidTable {
        units: vec![unit_id.to_string()],
        arrows: members
            .iter()
            .map(|&a| {
                (
                    g.arrow_id(a).to_string(),
                    unit_id.to_string(),
                    unit_id.to_string(),
                    g.arrow_id(g.inv(a)).to_string(),
                )
            })
            .collect(),
        compose: Vec::new(),
    };
    for &a in &members {
        for &b in &members {
            if let Some(ab) = g.compose(a, b) {
                debug_assert!(set.contains(&ab));
                table.compose.push((
                    g.arrow_id(a).to_string(),
                    g.arrow_id(b).to_string(),
                    g.arrow_id(ab).to_string(),
                ));
            }
        }
    }
    let group = FiniteGroupoid::from_table(&table)?;
    let kappa = Rat::one() / rat_int(members.len() as i64);
    Ok(IsotropySummary {
        point: unit_id.to_string(),
        group,
        kappa,
        members: member_ids,
    })
}

// ---------------------------------------------------------------------------
// Builders
// ---------------------------------------------------------------------------

/// Group (one unit) from element ids and a multiplication table;
/// `table[i][j]` is the index of `ids[i]·ids[j]`. `ids[0]` must be neutral.
pub fn group_from_mult_table(
    ids: &[String],
    table: &[Vec<usize>],
) -> Result<FiniteGroupoid, GroupoidError> {
    let n = ids.len();
    if table.len() != n || table.iter().any(|row| row.len() != n) {
        return Err(GroupoidError::MalformedTable(
            "multiplication table shape mismatch".into(),
        ));
    }
    let e = 0usize;
    let mut inv = vec![None; n];
    for i in 0..n {
        for j in 0..n {
            if table[i][j] == e {
                inv[i] = Some(j);
            }
        }
    }
    let unit = ids[e].clone();
    let mut t = GroupoidTable {
        units: vec![unit.clone()],
        arrows: Vec::new(),
        compose: Vec::new(),
    };
    for i in 0..n {
        let inv_i = inv[i].ok_or_else(|| {
            GroupoidError::MalformedTable(format!("no inverse for `{}`", ids[i]))
        })?;
        t.arrows
            .push((ids[i].clone(), unit.clone(), unit.clone(), ids[inv_i].clone()));
    }
    for i in 0..n {
        for j in 0..n {
            t.compose
                .push((ids[i].clone(), ids[j].clone(), ids[table[i][j]].clone()));
        }
    }
    FiniteGroupoid::from_table(&t)
}

/// Pair groupoid on n points: one arrow `(i,j)` from j to i.
pub fn pair_groupoid(n: usize) -> FiniteGroupoid {
    let id = |i: usize, j: usize| format!("({i},{j})");
    let mut t = GroupoidTable::default();
    for i in 1..=n {
        t.units.push(id(i, i));
    }
    for i in 1..=n {
        for j in 1..=n {
            t.arrows.push((id(i, j), id(j, j), id(i, i), id(j, i)));
        }
    }
    for i in 1..=n {
        for j in 1..=n {
            for k in 1..=n {
                t.compose.push((id(i, j), id(j, k), id(i, k)));
            }
        }
    }
    FiniteGroupoid::from_table(&t).expect("pair groupoid is valid by construction")
}

/// Disjoint union; arrow ids are prefixed `"{k}:"` to stay unambiguous.
pub fn disjoint_union(parts: &[&FiniteGroupoid]) -> FiniteGroupoid {
    let mut t = GroupoidTable::default();
    for (k, g) in parts.iter().enumerate() {
        let p = |id: &str| format!("{k}:{id}");
        for &u in g.units() {
            t.units.push(p(g.arrow_id(u)));
        }
        for a in g.arrows() {
            t.arrows.push((
                p(g.arrow_id(a)),
                p(g.arrow_id(g.s(a))),
                p(g.arrow_id(g.r(a))),
                p(g.arrow_id(g.inv(a))),
            ));
        }
        for a in g.arrows() {
            for b in g.arrows() {
                if let Some(ab) = g.compose(a, b) {
                    t.compose
                        .push((p(g.arrow_id(a)), p(g.arrow_id(b)), p(g.arrow_id(ab))));
                }
            }
        }
    }
    FiniteGroupoid::from_table(&t).expect("disjoint union of valid groupoids is valid")
}

/// Brute-force isomorphism test for small groupoids (backtracking on arrows).
pub fn groupoids_isomorphic(a: &FiniteGroupoid, b: &FiniteGroupoid) -> bool {
    if a.n_arrows() != b.n_arrows() || a.units().len() != b.units().len() {
        return false;
    }
    let n = a.n_arrows();
    let mut map = vec![usize::MAX; n];
    let mut used = vec![false; n];
    fn compatible(a: &FiniteGroupoid, b: &FiniteGroupoid, map: &[usize], x: usize, y: usize) -> bool {
        if a.is_unit(x) != b.is_unit(y) {
            return false;
        }
        let (sx, rx, ix) = (a.s(x), a.r(x), a.inv(x));
        if map[sx] != usize::MAX && map[sx] != b.s(y) {
            return false;
        }
        if map[rx] != usize::MAX && map[rx] != b.r(y) {
            return false;
        }
        if map[ix] != usize::MAX && map[ix] != b.inv(y) {
            return false;
        }
        // Products with already-mapped arrows must transport.
        for z in a.arrows() {
            if map[z] == usize::MAX {
                continue;
            }
            if let Some(xz) = a.compose(x, z) {
                if map[xz] != usize::MAX {
                    match b.compose(y, map[z]) {
                        Some(w) if w == map[xz] => {}
                        _ => return false,
                    }
                }
            }
            if let Some(zx) = a.compose(z, x) {
                if map[zx] != usize::MAX {
                    match b.compose(map[z], y) {
                        Some(w) if w == map[zx] => {}
                        _ => return false,
                    }
                }
            }
        }
        true
    }
    fn search(
        a: &FiniteGroupoid,
        b: &FiniteGroupoid,
        map: &mut Vec<usize>,
        used: &mut Vec<bool>,
        next: usize,
    ) -> bool {
        if next == a.n_arrows() {
            // Full check of the product tables under the completed map.
            for x in a.arrows() {
                for z in a.arrows() {
                    let lhs = a.compose(x, z).map(|w| map[w]);
                    let rhs = b.compose(map[x], map[z]);
                    if lhs != rhs {
                        return false;
                    }
                }
            }
            return true;
        }
        for y in b.arrows() {
            if used[y] {
                continue;
            }
            if compatible(a, b, map, next, y) {
                map[next] = y;
                used[y] = true;
                if search(a, b, map, used, next + 1) {
                    return true;
                }
                map[next] = usize::MAX;
                used[y] = false;
            }
        }
        false
    }
    search(a, b, &mut map, &mut used, 0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groups;

    #[test]
    fn pair_groupoid_is_valid() {
        let g = pair_groupoid(2);
        assert_eq!(g.n_arrows(), 4);
        assert_eq!(g.units().len(), 2);
        let rep = validate_groupoid(&g.to_table()).unwrap();
        assert!(rep.is_ok(), "{:?}", rep.findings);
        let g3 = pair_groupoid(3);
        assert_eq!(g3.n_arrows(), 9);
        assert_eq!(g3.units().len(), 3);
    }

    #[test]
    fn z2_swapped_associativity_is_caught() {
        let z2 = groups::cyclic_group(2);
        let mut t = z2.to_table();
        // Corrupt one product: g1·g1 := g1 instead of e.
        for entry in &mut t.compose {
            if entry.0 == "g1" && entry.1 == "g1" {
                entry.2 = "g1".to_string();
            }
        }
        let rep = validate_groupoid(&t).unwrap();
        assert!(!rep.is_ok());
        assert!(
            rep.has_code("associativity")
                || rep.has_code("inverse-law")
                || rep.has_code("compose-fibers")
        );
        assert!(rep.witnesses_mentioning("g1"));
    }

    #[test]
    fn counting_haar_is_invariant() {
        for g in [pair_groupoid(2), groups::cyclic_group(4)] {
            let haar = counting_haar(&g);
            assert!(validate_haar(&g, &haar).is_ok());
        }
    }

    #[test]
    fn haar_violation_has_witness() {
        let z2 = groups::cyclic_group(2);
        let mut haar = counting_haar(&z2);
        let sigma = z2.arrow_index("g1").unwrap();
        haar.weights[sigma] = rat_int(2);
        let rep = validate_haar(&z2, &haar);
        assert!(rep.has_code("left-invariance"));
        assert!(rep.witnesses_mentioning("g1"));
    }

    #[test]
    fn weighted_pair_haar_passes() {
        // Weight depends only on the source unit.
        let g = pair_groupoid(2);
        let mut omega = BTreeMap::new();
        omega.insert(g.arrow_index("(1,1)").unwrap(), rat_int(1));
        omega.insert(g.arrow_index("(2,2)").unwrap(), rat_int(3));
        let haar = source_weighted_haar(&g, &omega);
        assert!(validate_haar(&g, &haar).is_ok());
    }

    #[test]
    fn isotropy_of_group_is_whole_group() {
        let z4 = groups::cyclic_group(4);
        let iso = isotropy(&z4, "e").unwrap();
        assert_eq!(iso.members.len(), 4);
        assert_eq!(iso.kappa, crate::scalars::rat(1, 4));
    }

    #[test]
    fn inverse_is_antihomomorphism() {
        for g in [pair_groupoid(3), groups::symmetric_group(3)] {
            for a in g.arrows() {
                assert_eq!(g.inv(g.inv(a)), a);
                for b in g.arrows() {
                    if let Some(ab) = g.compose(a, b) {
                        let lhs = g.inv(ab);
                        let rhs = g.compose(g.inv(b), g.inv(a)).unwrap();
                        assert_eq!(lhs, rhs);
                    }
                }
            }
        }
    }

    #[test]
    fn fiber_mass_constant_on_orbits() {
        let g = pair_groupoid(3);
        let mut omega = BTreeMap::new();
        for (k, &u) in g.units().iter().enumerate() {
            omega.insert(u, rat_int(k as i64 + 1));
        }
        let haar = source_weighted_haar(&g, &omega);
        assert!(validate_haar(&g, &haar).is_ok());
        for orbit in g.unit_orbits() {
            let m0 = haar.fiber_mass(&g, orbit[0]);
            for &u in &orbit {
                assert_eq!(haar.fiber_mass(&g, u), m0);
            }
        }
    }

    #[test]
    fn disjoint_union_is_valid() {
        let g = disjoint_union(&[&groups::cyclic_group(2), &pair_groupoid(2)]);
        assert_eq!(g.n_arrows(), 6);
        assert_eq!(g.units().len(), 3);
        assert!(validate_groupoid(&g.to_table()).unwrap().is_ok());
    }
}
