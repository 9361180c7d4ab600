//! Finite G-spaces: moment maps, actions, orbit quotients, fibered products,
//! semidirect product groupoids and fiber integration.

use std::collections::BTreeMap;

use num::{Signed, Zero};
use thiserror::Error;

use crate::groupoid::{FiniteGroupoid, GroupoidTable, HaarSystem};
use crate::report::ValidationReport;
use crate::scalars::{CRat, Rat};

#[derive(Debug, Error)]
pub enum ActionError {
    #[error("malformed action: {0}")]
    MalformedAction(String),
    #[error("invalid action: {0} violation(s)")]
    InvalidAction(usize),
    #[error("projection mismatch at ({0}, {1})")]
    ProjectionMismatch(String, String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

/// A finite G-space. For a left space the moment map plays the role of the
/// range of points (`act(γ, x)` needs `s(γ) = moment(x)`); for a right space
/// it is the source (`act(γ, x)` encodes `x·γ` and needs `r(γ) = moment(x)`).
#[derive(Debug, Clone)]
pub struct GSpace {
    pub side: Side,
    ids: Vec<String>,
    index: BTreeMap<String, usize>,
    moment: Vec<usize>,
    act: BTreeMap<(usize, usize), usize>,
}

impl GSpace {
    pub fn new(
        side: Side,
        g: &FiniteGroupoid,
        point_ids: Vec<String>,
        moment_by_id: &BTreeMap<String, String>,
        act_triples: &[(String, String, String)],
    ) -> Result<GSpace, ActionError> {
        let mut ids = point_ids;
        ids.sort();
        ids.dedup();
        let index: BTreeMap<String, usize> = ids
            .iter()
            .enumerate()
            .map(|(i, s)| (s.clone(), i))
            .collect();
        let mut moment = vec![usize::MAX; ids.len()];
        for (p, u) in moment_by_id {
            let pi = *index
                .get(p)
                .ok_or_else(|| ActionError::MalformedAction(format!("unknown point `{p}`")))?;
            let ui = g
                .arrow_index(u)
                .filter(|&i| g.is_unit(i))
                .ok_or_else(|| ActionError::MalformedAction(format!("unknown unit `{u}`")))?;
            moment[pi] = ui;
        }
        if let Some(k) = moment.iter().position(|&m| m == usize::MAX) {
            return Err(ActionError::MalformedAction(format!(
                "point `{}` has no moment entry",
                ids[k]
            )));
        }
        let mut act = BTreeMap::new();
        for (gamma, x, gx) in act_triples {
            let a = g
                .arrow_index(gamma)
                .ok_or_else(|| ActionError::MalformedAction(format!("unknown arrow `{gamma}`")))?;
            let xi = *index
                .get(x)
                .ok_or_else(|| ActionError::MalformedAction(format!("unknown point `{x}`")))?;
            let yi = *index
                .get(gx)
                .ok_or_else(|| ActionError::MalformedAction(format!("unknown point `{gx}`")))?;
            if act.insert((a, xi), yi).is_some() {
                return Err(ActionError::MalformedAction(format!(
                    "duplicate action entry ({gamma},{x})"
                )));
            }
        }
        Ok(GSpace {
            side,
            ids,
            index,
            moment,
            act,
        })
    }

    /// Left action of a groupoid on itself by multiplication (moment = range),
    /// or right action (moment = source).
    pub fn translation_space(g: &FiniteGroupoid, side: Side) -> GSpace {
        let ids: Vec<String> = g.arrows().map(|a| g.arrow_id(a).to_string()).collect();
        let mut sorted = ids.clone();
        sorted.sort();
        let index: BTreeMap<String, usize> = sorted
            .iter()
            .enumerate()
            .map(|(i, s)| (s.clone(), i))
            .collect();
        let of = |arrow: usize| index[g.arrow_id(arrow)];
        let mut moment = vec![0usize; sorted.len()];
        for a in g.arrows() {
            moment[of(a)] = match side {
                Side::Left => g.r(a),
                Side::Right => g.s(a),
            };
        }
        let mut act = BTreeMap::new();
        for a in g.arrows() {
            for x in g.arrows() {
                let prod = match side {
                    Side::Left => g.compose(a, x),
                    Side::Right => g.compose(x, a),
                };
                if let Some(p) = prod {
                    act.insert((a, of(x)), of(p));
                }
            }
        }
        GSpace {
            side,
            ids: sorted,
            index,
            moment,
            act,
        }
    }

    pub fn n_points(&self) -> usize {
        self.ids.len()
    }

    pub fn point_id(&self, i: usize) -> &str {
        &self.ids[i]
    }

    pub fn point_index(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn points(&self) -> impl Iterator<Item = usize> {
        0..self.ids.len()
    }

    pub fn moment(&self, x: usize) -> usize {
        self.moment[x]
    }

    /// γ·x for a left space, x·γ for a right space.
    pub fn translate(&self, arrow: usize, x: usize) -> Option<usize> {
        self.act.get(&(arrow, x)).copied()
    }

    pub fn act_entries(&self) -> impl Iterator<Item = (&(usize, usize), &usize)> {
        self.act.iter()
    }

    /// Arrows composable with x (those for which the action is meant to be defined).
    pub fn composable_arrows<'a>(
        &'a self,
        g: &'a FiniteGroupoid,
        x: usize,
    ) -> impl Iterator<Item = usize> + 'a {
        let m = self.moment[x];
        let side = self.side;
        g.arrows().filter(move |&a| match side {
            Side::Left => g.s(a) == m,
            Side::Right => g.r(a) == m,
        })
    }

    /// Stabilizer of x: arrows acting trivially on it.
    pub fn stabilizer(&self, g: &FiniteGroupoid, x: usize) -> Vec<usize> {
        self.composable_arrows(g, x)
            .filter(|&a| self.translate(a, x) == Some(x))
            .collect()
    }

    pub fn to_triples(&self, g: &FiniteGroupoid) -> Vec<(String, String, String)> {
        self.act
            .iter()
            .map(|(&(a, x), &y)| {
                (
                    g.arrow_id(a).to_string(),
                    self.ids[x].clone(),
                    self.ids[y].clone(),
                )
            })
            .collect()
    }
}

/// Action axioms: identities act trivially, compatibility with composition,
/// moment transported correctly, action table total on composable pairs.
/// Freeness and properness are reported as informational notes.
pub fn validate_action(g: &FiniteGroupoid, x: &GSpace) -> ValidationReport {
    let mut rep = ValidationReport::new();
    for p in x.points() {
        let u = x.moment(p);
        match x.translate(u, p) {
            Some(q) if q == p => {}
            Some(_) => rep.violation(
                "unit-identity",
                format!("({},{})", g.arrow_id(u), x.point_id(p)),
                "the unit at the moment of a point must fix it",
            ),
            None => rep.violation(
                "action-missing",
                format!("({},{})", g.arrow_id(u), x.point_id(p)),
                "missing action entry for the unit",
            ),
        }
    }
    for p in x.points() {
        for a in x.composable_arrows(g, p) {
            match x.translate(a, p) {
                None => rep.violation(
                    "action-missing",
                    format!("({},{})", g.arrow_id(a), x.point_id(p)),
                    "action must be defined on every composable pair",
                ),
                Some(q) => {
                    let expected = match x.side {
                        Side::Left => g.r(a),
                        Side::Right => g.s(a),
                    };
                    if x.moment(q) != expected {
                        rep.violation(
                            "moment-equivariance",
                            format!("({},{})", g.arrow_id(a), x.point_id(p)),
                            "moment of the translated point is wrong",
                        );
                    }
                }
            }
        }
    }
    for (&(a, p), &q) in x.act_entries() {
        let ok = match x.side {
            Side::Left => g.s(a) == x.moment(p),
            Side::Right => g.r(a) == x.moment(p),
        };
        if !ok {
            rep.violation(
                "action-domain",
                format!("({},{})", g.arrow_id(a), x.point_id(p)),
                "action entry on a non-composable pair",
            );
        }
        let _ = q;
    }
    // (ab)·x = a·(b·x) in the left case; x·(ab) = (x·a)·b in the right case.
    for a in g.arrows() {
        for b in g.arrows() {
            let ab = match g.compose(a, b) {
                Some(c) => c,
                None => continue,
            };
            for p in x.points() {
                match x.side {
                    Side::Left => {
                        if let Some(bp) = x.translate(b, p) {
                            let lhs = x.translate(ab, p);
                            let rhs = x.translate(a, bp);
                            if lhs.is_some() && rhs.is_some() && lhs != rhs {
                                rep.violation(
                                    "compatibility",
                                    format!(
                                        "({},{},{})",
                                        g.arrow_id(a),
                                        g.arrow_id(b),
                                        x.point_id(p)
                                    ),
                                    "(ab)x differs from a(bx)",
                                );
                            }
                        }
                    }
                    Side::Right => {
                        if let Some(pa) = x.translate(a, p) {
                            let lhs = x.translate(ab, p);
                            let rhs = x.translate(b, pa);
                            if lhs.is_some() && rhs.is_some() && lhs != rhs {
                                rep.violation(
                                    "compatibility",
                                    format!(
                                        "({},{},{})",
                                        g.arrow_id(a),
                                        g.arrow_id(b),
                                        x.point_id(p)
                                    ),
                                    "x(ab) differs from (xa)b",
                                );
                            }
                        }
                    }
                }
            }
        }
    }
    // Freeness: (γ,x) ↦ (γx, x) injective, i.e. all stabilizers trivial.
    let mut free = true;
    for p in x.points() {
        if x.stabilizer(g, p).len() > 1 {
            free = false;
        }
    }
    rep.note(
        "freeness",
        "",
        if free { "free" } else { "not free" },
    );
    // Every finite action is proper: preimages of the graph map are finite.
    rep.note("properness", "", "proper (finite action)");
    rep.normalize();
    rep
}

/// Quotient of a point set by the action-induced equivalence.
#[derive(Debug, Clone)]
pub struct Quotient {
    /// Members of each class, sorted by point index.
    pub classes: Vec<Vec<usize>>,
    /// Class index per point.
    pub class_of: Vec<usize>,
    /// Deterministic section: the lexicographically smallest member id.
    pub section: Vec<usize>,
    /// Class ids, `"[rep]"`.
    pub class_ids: Vec<String>,
}

impl Quotient {
    pub fn n_classes(&self) -> usize {
        self.classes.len()
    }
}

/// Orbit space with the lexicographic section. Classes are ordered by their
/// representative id.
pub fn orbit_quotient(g: &FiniteGroupoid, x: &GSpace) -> Quotient {
    let n = x.n_points();
    let mut class_of = vec![usize::MAX; n];
    let mut raw_classes: Vec<Vec<usize>> = Vec::new();
    for p in 0..n {
        if class_of[p] != usize::MAX {
            continue;
        }
        let cid = raw_classes.len();
        let mut members = vec![p];
        class_of[p] = cid;
        let mut frontier = vec![p];
        while let Some(q) = frontier.pop() {
            for a in x.composable_arrows(g, q) {
                if let Some(r) = x.translate(a, q) {
                    if class_of[r] == usize::MAX {
                        class_of[r] = cid;
                        members.push(r);
                        frontier.push(r);
                    }
                }
            }
        }
        members.sort();
        raw_classes.push(members);
    }
    // Order classes by the id of their lexicographically smallest member.
    let mut order: Vec<usize> = (0..raw_classes.len()).collect();
    let rep_of = |c: &Vec<usize>| -> usize {
        *c.iter()
            .min_by(|&&a, &&b| x.point_id(a).cmp(x.point_id(b)))
            .unwrap()
    };
    order.sort_by(|&a, &b| {
        x.point_id(rep_of(&raw_classes[a]))
            .cmp(x.point_id(rep_of(&raw_classes[b])))
    });
    let mut classes = Vec::new();
    let mut section = Vec::new();
    let mut class_ids = Vec::new();
    let mut relabel = vec![0usize; raw_classes.len()];
    for (new_id, &old_id) in order.iter().enumerate() {
        relabel[old_id] = new_id;
        let members = raw_classes[old_id].clone();
        let rep = rep_of(&members);
        class_ids.push(format!("[{}]", x.point_id(rep)));
        section.push(rep);
        classes.push(members);
    }
    for c in class_of.iter_mut() {
        *c = relabel[*c];
    }
    Quotient {
        classes,
        class_of,
        section,
        class_ids,
    }
}

/// Fibered product of two projections into a common base: matching pairs.
pub fn fibered_product<A: Eq, B: Eq + PartialEq<A>>(
    proj_left: &[A],
    proj_right: &[B],
) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for (i, p) in proj_left.iter().enumerate() {
        for (j, q) in proj_right.iter().enumerate() {
            if q == p {
                out.push((i, j));
            }
        }
    }
    out
}

/// Semidirect product groupoid of a left action: arrows are composable pairs
/// `(γ; x)` standing for `(γx, γ, x)`, with unit space X.
pub fn semidirect_left(g: &FiniteGroupoid, x: &GSpace) -> Result<SemidirectGroupoid, ActionError> {
    assert_eq!(x.side, Side::Left);
    let rep = validate_action(g, x);
    if !rep.is_ok() {
        return Err(ActionError::InvalidAction(rep.findings.len()));
    }
    let mut pairs: Vec<(usize, usize)> = Vec::new();
    for p in x.points() {
        for a in x.composable_arrows(g, p) {
            pairs.push((a, p));
        }
    }
    let pair_id =
        |a: usize, p: usize| format!("({};{})", g.arrow_id(a), x.point_id(p));
    let unit_id = |p: usize| pair_id(x.moment(p), p);
    let mut table = GroupoidTable::default();
    for p in x.points() {
        table.units.push(unit_id(p));
    }
    for &(a, p) in &pairs {
        let target = x.translate(a, p).expect("validated action is total");
        table.arrows.push((
            pair_id(a, p),
            unit_id(p),
            unit_id(target),
            pair_id(g.inv(a), target),
        ));
    }
    for &(a, p) in &pairs {
        let ap = x.translate(a, p).unwrap();
        for &(b, q) in &pairs {
            // (b, q)∘(a, p) in diagram order: first apply (a,p), then (b,q).
            if q == ap {
                if let Some(ba) = g.compose(b, a) {
                    table
                        .compose
                        .push((pair_id(b, q), pair_id(a, p), pair_id(ba, p)));
                }
            }
        }
    }
    let groupoid = FiniteGroupoid::from_table(&table)
        .map_err(|e| ActionError::MalformedAction(e.to_string()))?;
    let mut arrow_pairs = BTreeMap::new();
    let mut pair_index = BTreeMap::new();
    for &(a, p) in &pairs {
        let idx = groupoid.arrow_index(&pair_id(a, p)).unwrap();
        arrow_pairs.insert(idx, (a, p));
        pair_index.insert((a, p), idx);
    }
    let mut unit_of_point = Vec::with_capacity(x.n_points());
    for p in x.points() {
        unit_of_point.push(groupoid.arrow_index(&unit_id(p)).unwrap());
    }
    Ok(SemidirectGroupoid {
        groupoid,
        arrow_pairs,
        pair_index,
        unit_of_point,
    })
}

/// Semidirect product of a right action: arrows `(x; γ)` from `x·γ` to `x`.
pub fn semidirect_right(g: &FiniteGroupoid, x: &GSpace) -> Result<SemidirectGroupoid, ActionError> {
    assert_eq!(x.side, Side::Right);
    let rep = validate_action(g, x);
    if !rep.is_ok() {
        return Err(ActionError::InvalidAction(rep.findings.len()));
    }
    let mut pairs: Vec<(usize, usize)> = Vec::new();
    for p in x.points() {
        for a in x.composable_arrows(g, p) {
            pairs.push((a, p));
        }
    }
    let pair_id =
        |p: usize, a: usize| format!("({};{})", x.point_id(p), g.arrow_id(a));
    let unit_id = |p: usize| pair_id(p, x.moment(p));
    let mut table = GroupoidTable::default();
    for p in x.points() {
        table.units.push(unit_id(p));
    }
    for &(a, p) in &pairs {
        let target = x.translate(a, p).expect("validated action is total");
        // r(x;γ) = x, s(x;γ) = xγ.
        table.arrows.push((
            pair_id(p, a),
            unit_id(target),
            unit_id(p),
            pair_id(target, g.inv(a)),
        ));
    }
    for &(a, p) in &pairs {
        let pa = x.translate(a, p).unwrap();
        for &(b, q) in &pairs {
            // (p; a)·(pa; b) = (p; ab)
            if q == pa {
                if let Some(ab) = g.compose(a, b) {
                    table
                        .compose
                        .push((pair_id(p, a), pair_id(q, b), pair_id(p, ab)));
                }
            }
        }
    }
    let groupoid = FiniteGroupoid::from_table(&table)
        .map_err(|e| ActionError::MalformedAction(e.to_string()))?;
    let mut arrow_pairs = BTreeMap::new();
    let mut pair_index = BTreeMap::new();
    for &(a, p) in &pairs {
        let idx = groupoid.arrow_index(&pair_id(p, a)).unwrap();
        arrow_pairs.insert(idx, (a, p));
        pair_index.insert((a, p), idx);
    }
    let mut unit_of_point = Vec::with_capacity(x.n_points());
    for p in x.points() {
        unit_of_point.push(groupoid.arrow_index(&unit_id(p)).unwrap());
    }
    Ok(SemidirectGroupoid {
        groupoid,
        arrow_pairs,
        pair_index,
        unit_of_point,
    })
}

/// A semidirect product groupoid together with the bookkeeping tying its
/// arrows back to (arrow, point) pairs of the original action.
#[derive(Debug, Clone)]
pub struct SemidirectGroupoid {
    pub groupoid: FiniteGroupoid,
    /// semidirect arrow index -> (g-arrow, point); for left actions the point
    /// is the source, for right actions the point is the range.
    pub arrow_pairs: BTreeMap<usize, (usize, usize)>,
    pub pair_index: BTreeMap<(usize, usize), usize>,
    /// unit arrow of the semidirect groupoid corresponding to each point.
    pub unit_of_point: Vec<usize>,
}

impl SemidirectGroupoid {
    /// Haar system inherited from the base groupoid: weight(γ; x) = weight(γ).
    pub fn inherited_haar(&self, haar: &HaarSystem) -> HaarSystem {
        let mut weights = vec![Rat::zero(); self.groupoid.n_arrows()];
        for (&idx, &(a, _)) in &self.arrow_pairs {
            weights[idx] = haar.weights[a].clone();
        }
        HaarSystem { weights }
    }
}

/// A weight system on points, read fiberwise over the moment map of the side
/// opposite to the acting groupoid.
pub fn validate_equivariant_system(
    g: &FiniteGroupoid,
    x: &GSpace,
    weights: &[Rat],
) -> ValidationReport {
    let mut rep = ValidationReport::new();
    if weights.len() != x.n_points() {
        rep.violation("weight-missing", "", "one weight per point required");
        return rep;
    }
    for (i, w) in weights.iter().enumerate() {
        if !w.is_positive() {
            rep.violation(
                "non-positive-weight",
                x.point_id(i),
                "equivariant weights must be strictly positive",
            );
        }
    }
    for p in x.points() {
        for a in x.composable_arrows(g, p) {
            if let Some(q) = x.translate(a, p) {
                if weights[p] != weights[q] {
                    rep.violation(
                        "equivariance",
                        format!("({},{})", g.arrow_id(a), x.point_id(p)),
                        "translation must preserve the weight",
                    );
                }
            }
        }
    }
    rep.normalize();
    rep
}

/// Fiber integration for a left action: turns functions on G⋉X into
/// functions on X.
pub struct FiberSystems<'a> {
    pub g: &'a FiniteGroupoid,
    pub haar: &'a HaarSystem,
    pub x: &'a GSpace,
}

impl<'a> FiberSystems<'a> {
    pub fn new(g: &'a FiniteGroupoid, haar: &'a HaarSystem, x: &'a GSpace) -> Self {
        assert_eq!(x.side, Side::Left);
        FiberSystems { g, haar, x }
    }

    /// λ₁(f)(x) = Σ_{γ: r(γ)=moment(x)} f(γ, γ⁻¹x) · weight(γ).
    pub fn lambda1(&self, f: &dyn Fn(usize, usize) -> CRat, p: usize) -> CRat {
        let mut acc = crate::scalars::crat_zero();
        for gamma in self.g.range_fiber(self.x.moment(p)) {
            let gi = self.g.inv(gamma);
            if let Some(q) = self.x.translate(gi, p) {
                let w = crate::scalars::crat(self.haar.weights[gamma].clone(), Rat::zero());
                acc = acc + f(gamma, q) * w;
            }
        }
        acc
    }

    /// λ₂(f)(x) = Σ_{γ: r(γ)=moment(x)} f(γ⁻¹, x) · weight(γ).
    pub fn lambda2(&self, f: &dyn Fn(usize, usize) -> CRat, p: usize) -> CRat {
        let mut acc = crate::scalars::crat_zero();
        for gamma in self.g.range_fiber(self.x.moment(p)) {
            let w = crate::scalars::crat(self.haar.weights[gamma].clone(), Rat::zero());
            acc = acc + f(self.g.inv(gamma), p) * w;
        }
        acc
    }

    /// Pointwise weight of μ∘λ₁ on the pair (γ, y): μ(γy)·weight(γ).
    pub fn mu_lambda1(&self, mu: &[Rat]) -> BTreeMap<(usize, usize), Rat> {
        let mut out = BTreeMap::new();
        for y in self.x.points() {
            for gamma in self.x.composable_arrows(self.g, y) {
                if let Some(gy) = self.x.translate(gamma, y) {
                    out.insert((gamma, y), &mu[gy] * &self.haar.weights[gamma]);
                }
            }
        }
        out
    }

    /// Pointwise weight of μ∘λ₂ on the pair (γ, y): μ(y)·weight(γ⁻¹).
    pub fn mu_lambda2(&self, mu: &[Rat]) -> BTreeMap<(usize, usize), Rat> {
        let mut out = BTreeMap::new();
        for y in self.x.points() {
            for gamma in self.x.composable_arrows(self.g, y) {
                out.insert(
                    (gamma, y),
                    &mu[y] * &self.haar.weights[self.g.inv(gamma)],
                );
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::groupoid::{counting_haar, groupoids_isomorphic, pair_groupoid, validate_groupoid};
    use crate::groups;
    use crate::scalars::{crat_int, crat_zero, rat_int};

    #[test]
    fn negation_action_is_valid_but_not_free() {
        let (g, x) = fixtures::z2_negation_action();
        let rep = validate_action(&g, &x);
        assert!(rep.is_ok(), "{:?}", rep.findings);
        assert!(rep.notes.iter().any(|n| n.message == "not free"));
    }

    #[test]
    fn left_translation_is_free() {
        let g = groups::cyclic_group(3);
        let x = GSpace::translation_space(&g, Side::Left);
        let rep = validate_action(&g, &x);
        assert!(rep.is_ok());
        assert!(rep.notes.iter().any(|n| n.message == "free"));
    }

    #[test]
    fn broken_unit_identity_is_reported() {
        let g = groups::cyclic_group(2);
        let mut moment = BTreeMap::new();
        for p in ["a", "b"] {
            moment.insert(p.to_string(), "e".to_string());
        }
        // e fixes a but sends b to a: unit identity broken at b.
        let triples = vec![
            ("e".into(), "a".into(), "a".into()),
            ("e".into(), "b".into(), "a".into()),
            ("g1".into(), "a".into(), "b".into()),
            ("g1".into(), "b".into(), "a".into()),
        ];
        let x = GSpace::new(
            Side::Left,
            &g,
            vec!["a".into(), "b".into()],
            &moment,
            &triples,
        )
        .unwrap();
        let rep = validate_action(&g, &x);
        assert!(rep.has_code("unit-identity"));
    }

    #[test]
    fn semidirect_of_negation_action() {
        let (g, x) = fixtures::z2_negation_action();
        let sd = semidirect_left(&g, &x).unwrap();
        assert_eq!(sd.groupoid.n_arrows(), 6);
        assert_eq!(sd.groupoid.units().len(), 3);
        assert!(validate_groupoid(&sd.groupoid.to_table()).unwrap().is_ok());
        // Isotropy at the fixed point 0 has order 2; at 1 it is trivial.
        let u0 = sd.groupoid.arrow_id(sd.unit_of_point[x.point_index("0").unwrap()]);
        let iso0 = crate::groupoid::isotropy(&sd.groupoid, u0).unwrap();
        assert_eq!(iso0.members.len(), 2);
        assert_eq!(iso0.kappa, crate::scalars::rat(1, 2));
        let u1 = sd.groupoid.arrow_id(sd.unit_of_point[x.point_index("1").unwrap()]);
        let iso1 = crate::groupoid::isotropy(&sd.groupoid, u1).unwrap();
        assert_eq!(iso1.members.len(), 1);
    }

    #[test]
    fn trivial_group_semidirect_is_units_only() {
        let g = groups::cyclic_group(1);
        let mut moment = BTreeMap::new();
        moment.insert("a".to_string(), "e".to_string());
        moment.insert("b".to_string(), "e".to_string());
        let triples = vec![
            ("e".into(), "a".into(), "a".into()),
            ("e".into(), "b".into(), "b".into()),
        ];
        let x = GSpace::new(
            Side::Left,
            &g,
            vec!["a".into(), "b".into()],
            &moment,
            &triples,
        )
        .unwrap();
        let sd = semidirect_left(&g, &x).unwrap();
        assert_eq!(sd.groupoid.n_arrows(), 2);
        assert_eq!(sd.groupoid.units().len(), 2);
    }

    #[test]
    fn z2_self_action_gives_pair_groupoid() {
        let g = groups::cyclic_group(2);
        let x = GSpace::translation_space(&g, Side::Left);
        let sd = semidirect_left(&g, &x).unwrap();
        assert!(groupoids_isomorphic(&sd.groupoid, &pair_groupoid(2)));
    }

    #[test]
    fn orbit_quotient_of_negation() {
        let (g, x) = fixtures::z2_negation_action();
        let q = orbit_quotient(&g, &x);
        assert_eq!(q.n_classes(), 2);
        assert_eq!(q.class_ids, vec!["[-1]", "[0]"]);
        // The class of 1 is represented by -1 under lexicographic order.
        let p1 = x.point_index("1").unwrap();
        let c = q.class_of[p1];
        assert_eq!(x.point_id(q.section[c]), "-1");
    }

    #[test]
    fn quotient_edge_cases() {
        // Free transitive: single class. Trivial action: classes = points.
        let g = groups::cyclic_group(3);
        let x = GSpace::translation_space(&g, Side::Left);
        assert_eq!(orbit_quotient(&g, &x).n_classes(), 1);
        let trivial = groups::cyclic_group(1);
        let mut moment = BTreeMap::new();
        for p in ["a", "b", "c"] {
            moment.insert(p.to_string(), "e".to_string());
        }
        let triples: Vec<(String, String, String)> = ["a", "b", "c"]
            .iter()
            .map(|p| ("e".to_string(), p.to_string(), p.to_string()))
            .collect();
        let y = GSpace::new(
            Side::Left,
            &trivial,
            vec!["a".into(), "b".into(), "c".into()],
            &moment,
            &triples,
        )
        .unwrap();
        assert_eq!(orbit_quotient(&trivial, &y).n_classes(), 3);
    }

    #[test]
    fn fibered_product_counts() {
        // Full product over a singleton base.
        let left = vec!["u"; 3];
        let right = vec!["u"; 3];
        assert_eq!(fibered_product(&left, &right).len(), 9);
        // Fibers (2,1) against (1,3) over two points: 2·1 + 1·3 = 5.
        let left = vec!["u", "u", "v"];
        let right = vec!["u", "v", "v", "v"];
        assert_eq!(fibered_product(&left, &right).len(), 5);
        // An empty fiber contributes nothing.
        let left = vec!["u", "u"];
        let right = vec!["v"];
        assert_eq!(fibered_product(&left, &right).len(), 0);
    }

    #[test]
    fn fiber_integration_examples() {
        let (g, x) = fixtures::z2_negation_action();
        let haar = counting_haar(&g);
        let fs = FiberSystems::new(&g, &haar, &x);
        // Constant one: both integrals give the fiber mass of the Haar system.
        let ones = |_: usize, _: usize| crat_int(1, 0);
        for p in x.points() {
            assert_eq!(fs.lambda1(&ones, p), crat_int(2, 0));
            assert_eq!(fs.lambda2(&ones, p), crat_int(2, 0));
        }
        // Indicator of (g1, 1).
        let sigma = g.arrow_index("g1").unwrap();
        let p1 = x.point_index("1").unwrap();
        let pm1 = x.point_index("-1").unwrap();
        let p0 = x.point_index("0").unwrap();
        let f = move |a: usize, p: usize| {
            if a == sigma && p == p1 {
                crat_int(1, 0)
            } else {
                crat_zero()
            }
        };
        assert_eq!(fs.lambda2(&f, p1), crat_int(1, 0));
        assert_eq!(fs.lambda2(&f, pm1), crat_zero());
        assert_eq!(fs.lambda2(&f, p0), crat_zero());
        assert_eq!(fs.lambda1(&f, pm1), crat_int(1, 0));
        assert_eq!(fs.lambda1(&f, p1), crat_zero());
    }

    #[test]
    fn lambda1_equals_lambda2_on_unit_supported_functions() {
        let (g, x) = fixtures::z2_negation_action();
        let haar = counting_haar(&g);
        let fs = FiberSystems::new(&g, &haar, &x);
        let e = g.arrow_index("e").unwrap();
        for target in x.points() {
            let f = move |a: usize, p: usize| {
                if a == e && p == target {
                    crat_int(3, 1)
                } else {
                    crat_zero()
                }
            };
            for p in x.points() {
                assert_eq!(fs.lambda1(&f, p), fs.lambda2(&f, p));
            }
        }
    }

    #[test]
    fn equivariant_system_accepts_orbit_constant_weights() {
        let (g, x) = fixtures::z2_negation_action();
        let mut w = vec![rat_int(1); 3];
        w[x.point_index("0").unwrap()] = rat_int(5);
        assert!(validate_equivariant_system(&g, &x, &w).is_ok());
        // Breaking equivariance across the orbit {-1, 1} is caught.
        w[x.point_index("1").unwrap()] = rat_int(2);
        assert!(validate_equivariant_system(&g, &x, &w).has_code("equivariance"));
    }
}
