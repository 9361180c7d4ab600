//! Finite hypergroupoids: groupoid-like structures whose product of two
//! composable elements is a probability vector rather than a point, together
//! with Haar systems satisfying the adjoint property, the spatial
//! construction (X*X)/G from a proper action, double-coset hypergroups and
//! the associated convolution algebras and norms.

use std::collections::BTreeMap;

use num::{One, Signed, Zero};
use thiserror::Error;

use crate::action::{orbit_quotient, validate_action, validate_equivariant_system, GSpace, Quotient, Side};
use crate::groupoid::{FiniteGroupoid, HaarSystem};
use crate::induction::regular_representation;
use crate::matrix::{
    block_decompose, hermitian_spectrum, operator_norm, ComplexMatrix, MatrixError, Tolerances,
};
use crate::report::ValidationReport;
use crate::scalars::{abs_f64, conj, crat, crat_zero, rat_sqrt_f64, rat_to_f64, C64, CRat, Rat};

#[derive(Debug, Error)]
pub enum HyperError {
    #[error("kernel row ({0},{1}) does not sum to 1")]
    NotStochastic(String, String),
    #[error("invalid action: {0} finding(s)")]
    InvalidAction(usize),
    #[error("relative norm requires the spatial provenance")]
    NoSpatialContext,
    #[error("{0}")]
    Matrix(#[from] MatrixError),
    #[error("{0}")]
    Induction(#[from] crate::induction::InductionError),
    #[error("malformed: {0}")]
    Malformed(String),
}

/// A finite hypergroupoid with an explicit stochastic product kernel.
#[derive(Debug, Clone)]
pub struct FiniteHypergroupoid {
    ids: Vec<String>,
    index: BTreeMap<String, usize>,
    units: Vec<usize>,
    is_unit: Vec<bool>,
    r: Vec<usize>,
    s: Vec<usize>,
    star: Vec<usize>,
    /// Probability vector per composable pair, sparse entries sorted by id.
    kernel: BTreeMap<(usize, usize), Vec<(usize, Rat)>>,
}

impl FiniteHypergroupoid {
    pub fn new(
        ids: Vec<String>,
        units: Vec<String>,
        r_by_id: &BTreeMap<String, String>,
        s_by_id: &BTreeMap<String, String>,
        star_by_id: &BTreeMap<String, String>,
        kernel_entries: &[(String, String, BTreeMap<String, Rat>)],
    ) -> Result<Self, HyperError> {
        let mut sorted = ids;
        sorted.sort();
        sorted.dedup();
        let index: BTreeMap<String, usize> = sorted
            .iter()
            .enumerate()
            .map(|(i, s)| (s.clone(), i))
            .collect();
        let look = |id: &str| -> Result<usize, HyperError> {
            index
                .get(id)
                .copied()
                .ok_or_else(|| HyperError::Malformed(format!("unknown element `{id}`")))
        };
        let n = sorted.len();
        let mut is_unit = vec![false; n];
        let mut unit_idx = Vec::new();
        for u in &units {
            let i = look(u)?;
            if !is_unit[i] {
                is_unit[i] = true;
                unit_idx.push(i);
            }
        }
        unit_idx.sort();
        let mut r = vec![usize::MAX; n];
        let mut s = vec![usize::MAX; n];
        let mut star = vec![usize::MAX; n];
        for (i, id) in sorted.iter().enumerate() {
            r[i] = look(
                r_by_id
                    .get(id)
                    .ok_or_else(|| HyperError::Malformed(format!("missing r for `{id}`")))?,
            )?;
            s[i] = look(
                s_by_id
                    .get(id)
                    .ok_or_else(|| HyperError::Malformed(format!("missing s for `{id}`")))?,
            )?;
            star[i] = look(
                star_by_id
                    .get(id)
                    .ok_or_else(|| HyperError::Malformed(format!("missing star for `{id}`")))?,
            )?;
        }
        let mut kernel = BTreeMap::new();
        for (x, y, row) in kernel_entries {
            let xi = look(x)?;
            let yi = look(y)?;
            let mut sum = Rat::zero();
            let mut entries = Vec::new();
            for (w, v) in row {
                sum = sum + v;
                entries.push((look(w)?, v.clone()));
            }
            if !sum.is_one() {
                return Err(HyperError::NotStochastic(x.clone(), y.clone()));
            }
            entries.sort_by_key(|&(w, _)| w);
            kernel.insert((xi, yi), entries);
        }
        Ok(FiniteHypergroupoid {
            ids: sorted,
            index,
            units: unit_idx,
            is_unit,
            r,
            s,
            star,
            kernel,
        })
    }

    pub fn n_elements(&self) -> usize {
        self.ids.len()
    }

    pub fn element_id(&self, i: usize) -> &str {
        &self.ids[i]
    }

    pub fn element_index(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn elements(&self) -> impl Iterator<Item = usize> {
        0..self.ids.len()
    }

    pub fn units(&self) -> &[usize] {
        &self.units
    }

    pub fn is_unit(&self, i: usize) -> bool {
        self.is_unit[i]
    }

    pub fn r(&self, i: usize) -> usize {
        self.r[i]
    }

    pub fn s(&self, i: usize) -> usize {
        self.s[i]
    }

    pub fn star(&self, i: usize) -> usize {
        self.star[i]
    }

    pub fn composable(&self, x: usize, y: usize) -> bool {
        self.s[x] == self.r[y]
    }

    /// The product measure m(x,y), sparse.
    pub fn product(&self, x: usize, y: usize) -> Option<&[(usize, Rat)]> {
        self.kernel.get(&(x, y)).map(|v| v.as_slice())
    }

    pub fn kernel_entries(&self) -> impl Iterator<Item = (&(usize, usize), &Vec<(usize, Rat)>)> {
        self.kernel.iter()
    }

    /// f(x*y) = Σ_w m(x,y)(w)·f(w).
    pub fn pair_apply(&self, f: &[CRat], x: usize, y: usize) -> CRat {
        match self.kernel.get(&(x, y)) {
            None => crat_zero(),
            Some(row) => {
                let mut acc = crat_zero();
                for (w, p) in row {
                    acc = acc + f[*w].clone() * crat(p.clone(), Rat::zero());
                }
                acc
            }
        }
    }

    pub fn range_fiber(&self, u: usize) -> Vec<usize> {
        self.elements().filter(|&x| self.r[x] == u).collect()
    }

    pub fn source_fiber(&self, u: usize) -> Vec<usize> {
        self.elements().filter(|&x| self.s[x] == u).collect()
    }

    /// The groupoid degeneration: every groupoid is a hypergroupoid whose
    /// kernel is made of point masses at the products.
    pub fn from_groupoid(g: &FiniteGroupoid) -> FiniteHypergroupoid {
        let ids: Vec<String> = g.arrows().map(|a| g.arrow_id(a).to_string()).collect();
        let units: Vec<String> = g.units().iter().map(|&u| g.arrow_id(u).to_string()).collect();
        let mut r = BTreeMap::new();
        let mut s = BTreeMap::new();
        let mut star = BTreeMap::new();
        for a in g.arrows() {
            r.insert(g.arrow_id(a).to_string(), g.arrow_id(g.r(a)).to_string());
            s.insert(g.arrow_id(a).to_string(), g.arrow_id(g.s(a)).to_string());
            star.insert(g.arrow_id(a).to_string(), g.arrow_id(g.inv(a)).to_string());
        }
        let mut kernel = Vec::new();
        for a in g.arrows() {
            for b in g.arrows() {
                if let Some(ab) = g.compose(a, b) {
                    let mut row = BTreeMap::new();
                    row.insert(g.arrow_id(ab).to_string(), Rat::one());
                    kernel.push((g.arrow_id(a).to_string(), g.arrow_id(b).to_string(), row));
                }
            }
        }
        FiniteHypergroupoid::new(ids, units, &r, &s, &star, &kernel)
            .expect("groupoid kernels are stochastic")
    }
}

/// One positive weight per element, read fiberwise over the range map.
#[derive(Debug, Clone, PartialEq)]
pub struct HyperHaar {
    pub weights: Vec<Rat>,
}

/// A finitely supported function on the elements.
#[derive(Debug, Clone, PartialEq)]
pub struct HyperElement {
    pub coeffs: Vec<CRat>,
}

impl HyperElement {
    pub fn zero(h: &FiniteHypergroupoid) -> Self {
        HyperElement {
            coeffs: vec![crat_zero(); h.n_elements()],
        }
    }

    pub fn delta(h: &FiniteHypergroupoid, x: usize) -> Self {
        let mut e = Self::zero(h);
        e.coeffs[x] = crat(Rat::one(), Rat::zero());
        e
    }

    pub fn random(h: &FiniteHypergroupoid, rng: &mut impl rand::Rng) -> Self {
        HyperElement {
            coeffs: (0..h.n_elements())
                .map(|_| {
                    crat(
                        crate::scalars::rat(rng.gen_range(-9..=9), rng.gen_range(1..=4)),
                        crate::scalars::rat(rng.gen_range(-9..=9), rng.gen_range(1..=4)),
                    )
                })
                .collect(),
        }
    }
}

/// Structural and kernel axioms, exactly. The two topological axioms are
/// recorded as automatic in the finite model (their one substantive residue,
/// the unit-support implication, is part of the support axiom).
pub fn validate_hypergroupoid(h: &FiniteHypergroupoid) -> ValidationReport {
    let mut rep = ValidationReport::new();
    for &u in h.units() {
        if h.r(u) != u || h.s(u) != u {
            rep.violation("unit-maps", h.element_id(u), "r∘i = s∘i = id fails");
        }
    }
    for x in h.elements() {
        if h.star(h.star(x)) != x {
            rep.violation("star-involution", h.element_id(x), "star must be an involution");
        }
        if h.r(h.star(x)) != h.s(x) {
            rep.violation("star-fibers", h.element_id(x), "r∘star must equal s");
        }
        if !h.is_unit(h.r(x)) || !h.is_unit(h.s(x)) {
            rep.violation("fiber-not-unit", h.element_id(x), "r and s must land in units");
        }
    }
    // Kernel domain, stochasticity and support.
    for x in h.elements() {
        for y in h.elements() {
            let row = h.product(x, y);
            if h.composable(x, y) {
                match row {
                    None => rep.violation(
                        "kernel-missing",
                        format!("({},{})", h.element_id(x), h.element_id(y)),
                        "composable pair without a kernel row",
                    ),
                    Some(entries) => {
                        let mut sum = Rat::zero();
                        for (w, p) in entries {
                            sum = sum + p;
                            if !p.is_positive() {
                                rep.violation(
                                    "kernel-positivity",
                                    format!(
                                        "({},{})@{}",
                                        h.element_id(x),
                                        h.element_id(y),
                                        h.element_id(*w)
                                    ),
                                    "kernel mass must be positive on its support",
                                );
                            }
                            if h.r(*w) != h.r(x) || h.s(*w) != h.s(y) {
                                rep.violation(
                                    "support-fibers",
                                    format!(
                                        "({},{})@{}",
                                        h.element_id(x),
                                        h.element_id(y),
                                        h.element_id(*w)
                                    ),
                                    "support must lie in the (r(x), s(y)) fiber",
                                );
                            }
                        }
                        if !sum.is_one() {
                            rep.violation(
                                "kernel-stochastic",
                                format!("({},{})", h.element_id(x), h.element_id(y)),
                                "kernel row must sum to 1",
                            );
                        }
                    }
                }
            } else if row.is_some() {
                rep.violation(
                    "kernel-domain",
                    format!("({},{})", h.element_id(x), h.element_id(y)),
                    "kernel defined on a non-composable pair",
                );
            }
        }
    }
    // Associativity of the kernel.
    for x in h.elements() {
        for y in h.elements() {
            if !h.composable(x, y) {
                continue;
            }
            for z in h.elements() {
                if !h.composable(y, z) {
                    continue;
                }
                let mut lhs: BTreeMap<usize, Rat> = BTreeMap::new();
                for (w, p) in h.product(y, z).unwrap_or(&[]) {
                    for (v, q) in h.product(x, *w).unwrap_or(&[]) {
                        *lhs.entry(*v).or_insert_with(Rat::zero) += p * q;
                    }
                }
                let mut rhs: BTreeMap<usize, Rat> = BTreeMap::new();
                for (w, p) in h.product(x, y).unwrap_or(&[]) {
                    for (v, q) in h.product(*w, z).unwrap_or(&[]) {
                        *rhs.entry(*v).or_insert_with(Rat::zero) += p * q;
                    }
                }
                lhs.retain(|_, v| !v.is_zero());
                rhs.retain(|_, v| !v.is_zero());
                if lhs != rhs {
                    rep.violation(
                        "kernel-associativity",
                        format!(
                            "({},{},{})",
                            h.element_id(x),
                            h.element_id(y),
                            h.element_id(z)
                        ),
                        "the two iterated products differ",
                    );
                }
            }
        }
    }
    // Units are kernel-neutral.
    for x in h.elements() {
        let want = vec![(x, Rat::one())];
        if h.product(h.r(x), x) != Some(&want[..]) {
            rep.violation(
                "kernel-left-unit",
                h.element_id(x),
                "m(r(x), x) must be the point mass at x",
            );
        }
        if h.product(x, h.s(x)) != Some(&want[..]) {
            rep.violation(
                "kernel-right-unit",
                h.element_id(x),
                "m(x, s(x)) must be the point mass at x",
            );
        }
    }
    // Involution compatibility and the unit-support equivalence.
    for x in h.elements() {
        for y in h.elements() {
            if !h.composable(x, y) {
                continue;
            }
            let row = h.product(x, y).unwrap_or(&[]);
            // m(x,y)* = m(y*,x*): push the masses through the involution.
            let mut pushed: Vec<(usize, Rat)> =
                row.iter().map(|(w, p)| (h.star(*w), p.clone())).collect();
            pushed.sort_by_key(|&(w, _)| w);
            let other = h.product(h.star(y), h.star(x)).unwrap_or(&[]);
            if pushed != other {
                rep.violation(
                    "kernel-involution",
                    format!("({},{})", h.element_id(x), h.element_id(y)),
                    "m(x,y)* must equal m(y*,x*)",
                );
            }
            let meets_units = row.iter().any(|(w, _)| h.is_unit(*w));
            if meets_units != (x == h.star(y)) {
                rep.violation(
                    "unit-support",
                    format!("({},{})", h.element_id(x), h.element_id(y)),
                    "support meets the units exactly when x = y*",
                );
            }
        }
    }
    rep.note(
        "topological-axioms",
        "",
        "uniform-continuity and translation axioms are automatic on a finite set",
    );
    rep.normalize();
    rep
}

/// Adjoint property of a Haar system, checked exactly on all δ-pairs:
/// Σ_y m(x,y)(a)·[y=b]·λ(y) over the source fiber of x equals
/// Σ_y [y=a]·m(x*,y)(b)·λ(y) over its range fiber.
pub fn validate_hyper_haar(h: &FiniteHypergroupoid, haar: &HyperHaar) -> ValidationReport {
    let mut rep = ValidationReport::new();
    if haar.weights.len() != h.n_elements() {
        rep.violation("weight-missing", "", "one weight per element required");
        return rep;
    }
    for x in h.elements() {
        if !haar.weights[x].is_positive() {
            rep.violation(
                "non-positive-weight",
                h.element_id(x),
                "Haar weights must be strictly positive",
            );
        }
    }
    for x in h.elements() {
        for a in h.elements() {
            for b in h.elements() {
                let lhs = if h.r(b) == h.s(x) {
                    h.product(x, b)
                        .unwrap_or(&[])
                        .iter()
                        .find(|(w, _)| *w == a)
                        .map(|(_, p)| p * &haar.weights[b])
                        .unwrap_or_else(Rat::zero)
                } else {
                    Rat::zero()
                };
                let xs = h.star(x);
                let rhs = if h.r(a) == h.r(x) {
                    h.product(xs, a)
                        .unwrap_or(&[])
                        .iter()
                        .find(|(w, _)| *w == b)
                        .map(|(_, p)| p * &haar.weights[a])
                        .unwrap_or_else(Rat::zero)
                } else {
                    Rat::zero()
                };
                if lhs != rhs {
                    rep.violation(
                        "adjoint-property",
                        format!(
                            "(x={},a={},b={})",
                            h.element_id(x),
                            h.element_id(a),
                            h.element_id(b)
                        ),
                        "the adjoint identity fails on this δ-pair",
                    );
                }
            }
        }
    }
    rep.note(
        "continuity-support",
        "",
        "continuity and compact-support requirements are automatic on a finite set",
    );
    rep.normalize();
    rep
}

/// Plain left invariance: Σ_{y∈H^{s(x)}} m(x,y)(a)·λ(y) = [r(a)=r(x)]·λ(a).
/// Kept separate so fixtures can compare it against the adjoint property.
pub fn left_invariance_report(h: &FiniteHypergroupoid, haar: &HyperHaar) -> ValidationReport {
    let mut rep = ValidationReport::new();
    for x in h.elements() {
        for a in h.elements() {
            let mut lhs = Rat::zero();
            for y in h.range_fiber(h.s(x)) {
                if let Some(row) = h.product(x, y) {
                    if let Some((_, p)) = row.iter().find(|(w, _)| *w == a) {
                        lhs = lhs + p * &haar.weights[y];
                    }
                }
            }
            let rhs = if h.r(a) == h.r(x) {
                haar.weights[a].clone()
            } else {
                Rat::zero()
            };
            if lhs != rhs {
                rep.violation(
                    "left-invariance",
                    format!("(x={},a={})", h.element_id(x), h.element_id(a)),
                    "translation does not preserve the Haar weights",
                );
            }
        }
    }
    rep.normalize();
    rep
}

// ---------------------------------------------------------------------------
// The spatial construction
// ---------------------------------------------------------------------------

/// A spatial hypergroupoid (X*X)/G with all provenance kept for the relative
/// norm and the direct convolution formula.
#[derive(Debug, Clone)]
pub struct SpatialHypergroupoid {
    pub h: FiniteHypergroupoid,
    pub haar: HyperHaar,
    pub g: FiniteGroupoid,
    pub g_haar: HaarSystem,
    pub x: GSpace,
    pub alpha: Vec<Rat>,
    /// Pairs (x, y) of the fibered product, in generation order.
    pub pairs: Vec<(usize, usize)>,
    /// Diagonal-orbit structure on the sorted pair ids.
    pub pair_quotient: Quotient,
    /// Sorted pair-point index -> position in `pairs`.
    pub sorted_to_pair: Vec<usize>,
    /// element index -> pair-class index, and back.
    pub element_to_class: Vec<usize>,
    pub class_to_element: Vec<usize>,
    /// X/G classes: unit elements correspond to these.
    pub x_quotient: Quotient,
}

impl SpatialHypergroupoid {
    /// Element of the hypergroupoid containing the pair (x, y).
    pub fn element_of(&self, x: usize, y: usize) -> usize {
        let id = format!("({}|{})", self.x.point_id(x), self.x.point_id(y));
        let pt = self
            .pair_point_index(&id)
            .expect("pair exists in the fibered product");
        self.class_to_element[self.pair_quotient.class_of[pt]]
    }

    fn pair_point_index(&self, id: &str) -> Option<usize> {
        // Pair points were sorted by id when the quotient was computed.
        let mut ids: Vec<String> = self
            .pairs
            .iter()
            .map(|&(x, y)| format!("({}|{})", self.x.point_id(x), self.x.point_id(y)))
            .collect();
        ids.sort();
        ids.binary_search_by(|probe| probe.as_str().cmp(id)).ok()
    }

    /// Representative pair of an element.
    pub fn representative(&self, element: usize) -> (usize, usize) {
        let class = self.element_to_class[element];
        self.pairs[self.sorted_to_pair[self.pair_quotient.section[class]]]
    }
}

/// Theorem-style spatial construction: elements are diagonal orbits on X*X,
/// the kernel averages the isotropy action and the Haar system is the
/// pushforward of α along y ↦ [x,y]. Well-definedness of every choice is
/// verified exhaustively.
pub fn spatial_construct(
    g: &FiniteGroupoid,
    g_haar: &HaarSystem,
    x: &GSpace,
    alpha: &[Rat],
) -> Result<SpatialHypergroupoid, HyperError> {
    assert_eq!(x.side, Side::Left);
    let v = validate_action(g, x);
    if !v.is_ok() {
        return Err(HyperError::InvalidAction(v.findings.len()));
    }
    let ve = validate_equivariant_system(g, x, alpha);
    if !ve.is_ok() {
        return Err(HyperError::InvalidAction(ve.findings.len()));
    }
    // X*X over the moment map, with the diagonal action.
    let mut pairs = Vec::new();
    for a in x.points() {
        for b in x.points() {
            if x.moment(a) == x.moment(b) {
                pairs.push((a, b));
            }
        }
    }
    let pid = |a: usize, b: usize| format!("({}|{})", x.point_id(a), x.point_id(b));
    let pair_ids: Vec<String> = pairs.iter().map(|&(a, b)| pid(a, b)).collect();
    let mut moment = BTreeMap::new();
    let mut triples = Vec::new();
    for &(a, b) in &pairs {
        moment.insert(pid(a, b), g.arrow_id(x.moment(a)).to_string());
        for gm in x.composable_arrows(g, a) {
            if let (Some(ga), Some(gb)) = (x.translate(gm, a), x.translate(gm, b)) {
                triples.push((g.arrow_id(gm).to_string(), pid(a, b), pid(ga, gb)));
            }
        }
    }
    let pair_space = GSpace::new(Side::Left, g, pair_ids.clone(), &moment, &triples)
        .map_err(|e| HyperError::Malformed(e.to_string()))?;
    let pair_quotient = orbit_quotient(g, &pair_space);
    let mut sorted_to_pair = vec![0usize; pair_space.n_points()];
    for (pos, id) in pair_ids.iter().enumerate() {
        sorted_to_pair[pair_space.point_index(id).unwrap()] = pos;
    }
    let x_quotient = orbit_quotient(g, x);
    // Elements are the pair classes; ids are the class ids.
    let n_el = pair_quotient.n_classes();
    let element_ids: Vec<String> = pair_quotient.class_ids.clone();
    let class_of_pair_point = |p: usize| pair_quotient.class_of[p];
    let class_of_xy = |a: usize, b: usize| -> usize {
        class_of_pair_point(pair_space.point_index(&pid(a, b)).unwrap())
    };
    // r, s, star, units per class, with well-definedness over representatives.
    let mut r_map = BTreeMap::new();
    let mut s_map = BTreeMap::new();
    let mut star_map = BTreeMap::new();
    let mut units = Vec::new();
    for ci in 0..n_el {
        let (a0, b0) = pairs[sorted_to_pair[pair_quotient.section[ci]]];
        let r_class = class_of_xy(a0, a0);
        let s_class = class_of_xy(b0, b0);
        let star_class = class_of_xy(b0, a0);
        for &member in &pair_quotient.classes[ci] {
            let (a, b) = pairs[sorted_to_pair[member]];
            if class_of_xy(a, a) != r_class
                || class_of_xy(b, b) != s_class
                || class_of_xy(b, a) != star_class
            {
                return Err(HyperError::Malformed(format!(
                    "structure maps not constant on {}",
                    element_ids[ci]
                )));
            }
        }
        r_map.insert(element_ids[ci].clone(), element_ids[r_class].clone());
        s_map.insert(element_ids[ci].clone(), element_ids[s_class].clone());
        star_map.insert(element_ids[ci].clone(), element_ids[star_class].clone());
        // Exactly the classes of diagonal pairs are units.
        if pair_quotient.classes[ci].iter().any(|&m| {
            let (a, b) = pairs[sorted_to_pair[m]];
            a == b
        }) {
            units.push(element_ids[ci].clone());
        }
    }
    // Kernel: for composable classes, average the isotropy of the shared
    // middle point; every representative/alignment must give the same row.
    let mut kernel: Vec<(String, String, BTreeMap<String, Rat>)> = Vec::new();
    for ca in 0..n_el {
        for cb in 0..n_el {
            let (_, b0) = pairs[sorted_to_pair[pair_quotient.section[ca]]];
            let (a1, _) = pairs[sorted_to_pair[pair_quotient.section[cb]]];
            if class_of_xy(b0, b0) != class_of_xy(a1, a1) {
                continue;
            }
            let mut agreed: Option<BTreeMap<usize, Rat>> = None;
            // Enumerate aligned triples (x, y, z): (x, y) ∈ ca, (y2, z) ∈ cb,
            // γ·y2 = y.
            for &m_a in &pair_quotient.classes[ca] {
                let (xx, yy) = pairs[sorted_to_pair[m_a]];
                for &m_b in &pair_quotient.classes[cb] {
                    let (y2, zz) = pairs[sorted_to_pair[m_b]];
                    for gm in x.composable_arrows(g, y2) {
                        if x.translate(gm, y2) != Some(yy) {
                            continue;
                        }
                        let z_aligned = match x.translate(gm, zz) {
                            Some(p) => p,
                            None => continue,
                        };
                        // m over the isotropy of the middle point.
                        let stab = x.stabilizer(g, yy);
                        let mut row: BTreeMap<usize, Rat> = BTreeMap::new();
                        let mass = Rat::one() / crate::scalars::rat_int(stab.len() as i64);
                        for &zeta in &stab {
                            let zx = x
                                .translate(zeta, xx)
                                .expect("stabilizer arrows act on the fiber");
                            let el = class_of_xy(zx, z_aligned);
                            *row.entry(el).or_insert_with(Rat::zero) += mass.clone();
                        }
                        match &agreed {
                            None => agreed = Some(row),
                            Some(prev) => {
                                if *prev != row {
                                    return Err(HyperError::Malformed(format!(
                                        "kernel not well defined on ({},{})",
                                        element_ids[ca], element_ids[cb]
                                    )));
                                }
                            }
                        }
                    }
                }
            }
            if let Some(row) = agreed {
                let named: BTreeMap<String, Rat> = row
                    .into_iter()
                    .map(|(el, p)| (element_ids[el].clone(), p))
                    .collect();
                kernel.push((element_ids[ca].clone(), element_ids[cb].clone(), named));
            }
        }
    }
    // Haar: λ^{[x]}([x,y]) = Σ_{y' in the fiber with [x,y'] = [x,y]} α(y'),
    // computed from every representative x and checked for agreement.
    let mut weights = vec![Rat::zero(); n_el];
    for ci in 0..n_el {
        let mut agreed: Option<Rat> = None;
        let (x0, _) = pairs[sorted_to_pair[pair_quotient.section[ci]]];
        // All x in the class of x0 (the range class) give the same mass.
        let range_class = &x_quotient.classes[x_quotient.class_of[x0]];
        for &xr in range_class {
            let mut acc = Rat::zero();
            for yp in x.points() {
                if x.moment(yp) != x.moment(xr) {
                    continue;
                }
                if class_of_xy(xr, yp) == ci {
                    acc = acc + &alpha[yp];
                }
            }
            match &agreed {
                None => agreed = Some(acc),
                Some(prev) => {
                    if *prev != acc {
                        return Err(HyperError::Malformed(format!(
                            "Haar weight not well defined on {}",
                            element_ids[ci]
                        )));
                    }
                }
            }
        }
        weights[ci] = agreed.unwrap_or_else(Rat::zero);
    }
    let h = FiniteHypergroupoid::new(
        element_ids.clone(),
        units,
        &r_map,
        &s_map,
        &star_map,
        &kernel,
    )?;
    // Element ids are class ids; the constructor re-sorts, so map indices.
    let element_to_class: Vec<usize> = (0..n_el)
        .map(|ei| {
            element_ids
                .iter()
                .position(|id| id == h.element_id(ei))
                .unwrap()
        })
        .collect();
    let mut class_to_element = vec![0usize; n_el];
    for (ei, &ci) in element_to_class.iter().enumerate() {
        class_to_element[ci] = ei;
    }
    let haar = HyperHaar {
        weights: (0..n_el)
            .map(|ei| weights[element_to_class[ei]].clone())
            .collect(),
    };
    Ok(SpatialHypergroupoid {
        h,
        haar,
        g: g.clone(),
        g_haar: g_haar.clone(),
        x: x.clone(),
        alpha: alpha.to_vec(),
        pairs,
        pair_quotient,
        sorted_to_pair,
        element_to_class,
        class_to_element,
        x_quotient,
    })
}

/// Double-coset hypergroup K\G/K as the spatial hypergroupoid of G acting on
/// G/K; elements are relabelled by their double cosets.
pub fn double_coset_construct(
    g: &FiniteGroupoid,
    k_ids: &[&str],
) -> Result<(SpatialHypergroupoid, BTreeMap<String, String>), HyperError> {
    let view = crate::groups::GroupView::new(g)
        .map_err(|e| HyperError::Malformed(e.to_string()))?;
    let k_set: std::collections::BTreeSet<usize> = k_ids
        .iter()
        .map(|id| {
            view.element_by_id(id)
                .ok_or_else(|| HyperError::Malformed(format!("unknown element `{id}`")))
        })
        .collect::<Result<_, _>>()?;
    if !view.is_subgroup(&k_set) {
        return Err(HyperError::Malformed("not a subgroup".into()));
    }
    let x = crate::fixtures::coset_space(g, k_ids);
    let alpha = vec![Rat::one(); x.n_points()];
    let haar = crate::groupoid::counting_haar(g);
    let sp = spatial_construct(g, &haar, &x, &alpha)?;
    // Label each element by the double coset K a⁻¹ b K of a representative
    // pair (aK, bK).
    let mut labels = BTreeMap::new();
    for el in sp.h.elements() {
        let (pa, pb) = sp.representative(el);
        // Coset points are labelled "{rep}K".
        let a_rep = view
            .element_by_id(x.point_id(pa).trim_end_matches('K'))
            .expect("coset label names an element");
        let b_rep = view
            .element_by_id(x.point_id(pb).trim_end_matches('K'))
            .expect("coset label names an element");
        let mid = view.mul(view.inv(a_rep), b_rep);
        let mut coset: Vec<usize> = Vec::new();
        for &u in &k_set {
            for &w in &k_set {
                coset.push(view.mul(view.mul(u, mid), w));
            }
        }
        let min = coset
            .iter()
            .map(|&e| g.arrow_id(e))
            .min()
            .unwrap();
        labels.insert(sp.h.element_id(el).to_string(), format!("K{min}K"));
    }
    Ok((sp, labels))
}

// ---------------------------------------------------------------------------
// Convolution and norms
// ---------------------------------------------------------------------------

/// (f*g)(x) = Σ_{y ∈ H^{s(x)}} f(x*y) g(y*) λ(y), exactly.
pub fn hyper_convolve(
    h: &FiniteHypergroupoid,
    haar: &HyperHaar,
    f: &HyperElement,
    g: &HyperElement,
) -> HyperElement {
    let mut out = HyperElement::zero(h);
    for x in h.elements() {
        let mut acc = crat_zero();
        for y in h.range_fiber(h.s(x)) {
            let term = h.pair_apply(&f.coeffs, x, y)
                * g.coeffs[h.star(y)].clone()
                * crat(haar.weights[y].clone(), Rat::zero());
            acc = acc + term;
        }
        out.coeffs[x] = acc;
    }
    out
}

/// f*(x) = conj(f(x*)).
pub fn hyper_involute(h: &FiniteHypergroupoid, f: &HyperElement) -> HyperElement {
    let mut out = HyperElement::zero(h);
    for x in h.elements() {
        out.coeffs[x] = conj(&f.coeffs[h.star(x)]);
    }
    out
}

/// The direct α-sum convolution available on spatial hypergroupoids:
/// (f*g)([x,z]) = Σ_y f([x,y]) g([y,z]) α(y).
pub fn spatial_convolve_direct(
    sp: &SpatialHypergroupoid,
    f: &HyperElement,
    g: &HyperElement,
) -> HyperElement {
    let mut out = HyperElement::zero(&sp.h);
    for el in sp.h.elements() {
        let (xx, zz) = sp.representative(el);
        let mut acc = crat_zero();
        for y in sp.x.points() {
            if sp.x.moment(y) != sp.x.moment(xx) {
                continue;
            }
            let exy = sp.element_of(xx, y);
            let eyz = sp.element_of(y, zz);
            acc = acc
                + f.coeffs[exy].clone()
                    * g.coeffs[eyz].clone()
                    * crat(sp.alpha[y].clone(), Rat::zero());
        }
        out.coeffs[el] = acc;
    }
    out
}

/// Matrix of the regular representation L_u(f) on ℓ²(H_u, λ_u), with
/// λ_u(x) = λ(x*).
pub fn hyper_regular_matrix(
    h: &FiniteHypergroupoid,
    haar: &HyperHaar,
    f: &HyperElement,
    u: usize,
) -> ComplexMatrix {
    let basis = h.source_fiber(u);
    let n = basis.len();
    let root: Vec<f64> = basis
        .iter()
        .map(|&x| rat_sqrt_f64(&haar.weights[h.star(x)]))
        .collect();
    ComplexMatrix::from_fn(n, n, |i, j| {
        let (x, y) = (basis[i], basis[j]);
        let val = h.pair_apply(&f.coeffs, x, h.star(y));
        crate::scalars::crat_to_c64(&val) * (root[i] * root[j])
    })
}

pub fn hyper_reduced_norm(
    h: &FiniteHypergroupoid,
    haar: &HyperHaar,
    f: &HyperElement,
    cfg: &Tolerances,
) -> Result<f64, MatrixError> {
    let mut best = 0.0f64;
    for &u in h.units() {
        let m = hyper_regular_matrix(h, haar, f, u);
        best = best.max(operator_norm(&m, cfg)?);
    }
    Ok(best)
}

pub fn hyper_i_norm(h: &FiniteHypergroupoid, haar: &HyperHaar, f: &HyperElement) -> f64 {
    let mut sup_f = 0.0f64;
    let mut sup_fs = 0.0f64;
    for &u in h.units() {
        let mut s1 = 0.0;
        let mut s2 = 0.0;
        for x in h.range_fiber(u) {
            let w = rat_to_f64(&haar.weights[x]);
            s1 += abs_f64(&f.coeffs[x]) * w;
            s2 += abs_f64(&f.coeffs[h.star(x)]) * w;
        }
        sup_f = sup_f.max(s1);
        sup_fs = sup_fs.max(s2);
    }
    sup_f.max(sup_fs)
}

/// The direct sum ⊕_u L_u as one matrix; the GNS representation of the
/// canonical family of unit states coincides with it at finite scale.
pub fn hyper_gns_matrix(
    h: &FiniteHypergroupoid,
    haar: &HyperHaar,
    f: &HyperElement,
) -> ComplexMatrix {
    let blocks: Vec<ComplexMatrix> = h
        .units()
        .iter()
        .map(|&u| hyper_regular_matrix(h, haar, f, u))
        .collect();
    let dim: usize = blocks.iter().map(|b| b.rows).sum();
    let mut m = ComplexMatrix::zeros(dim, dim);
    let mut off = 0usize;
    for b in blocks {
        for i in 0..b.rows {
            for j in 0..b.cols {
                m[(off + i, off + j)] = b[(i, j)];
            }
        }
        off += b.rows;
    }
    m
}

#[derive(Debug, Clone)]
pub struct HyperNorms {
    pub reduced: f64,
    pub i_norm: f64,
    pub full: f64,
    pub relative: Option<f64>,
    /// A nonzero direction annihilated by every nondegenerate representation.
    pub annihilated_direction: bool,
    /// Set when the relative completion is a strict quotient
    /// (relative < full − 1e−6).
    pub strict_quotient: Option<bool>,
}

/// All four norms. `spatial` supplies the provenance required by the relative
/// norm; without it only reduced/I/full are computed.
pub fn hyper_norms(
    h: &FiniteHypergroupoid,
    haar: &HyperHaar,
    f: &HyperElement,
    spatial: Option<&SpatialHypergroupoid>,
    cfg: &Tolerances,
) -> Result<HyperNorms, HyperError> {
    let reduced = hyper_reduced_norm(h, haar, f, cfg)?;
    let i_norm = hyper_i_norm(h, haar, f);
    // Full norm through the block decomposition of the GNS representation.
    let basis: Vec<ComplexMatrix> = h
        .elements()
        .map(|x| hyper_gns_matrix(h, haar, &HyperElement::delta(h, x)))
        .collect();
    let dec = block_decompose(&basis, cfg)?;
    let gm = hyper_gns_matrix(h, haar, f);
    let mut full = 0.0f64;
    for &r in &dec.class_reps {
        let compressed = gm.compress(&dec.blocks[r]);
        full = full.max(operator_norm(&compressed, cfg)?);
    }
    // Annihilated directions: rank of the δ-basis image.
    let n = h.n_elements();
    let mut gram = ComplexMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            gram[(i, j)] = basis[i].adjoint().mul(&basis[j]).trace();
        }
    }
    let evs = hermitian_spectrum(&gram, cfg)?;
    let top = evs.last().copied().unwrap_or(0.0).max(1.0);
    let annihilated = evs.first().copied().unwrap_or(0.0) <= cfg.rank * top;
    let relative = match spatial {
        None => None,
        Some(sp) => Some(relative_norm(sp, f, cfg)?),
    };
    let strict_quotient = relative.map(|r| r < full - 1e-6);
    Ok(HyperNorms {
        reduced,
        i_norm,
        full,
        relative,
        annihilated_direction: annihilated,
        strict_quotient,
    })
}

/// The matrix of f acting on the G-invariant sections of the pulled-back
/// regular bundle, weighted by orbit mass times α — the finite model of the
/// completion generated by the representations extended from the base
/// groupoid.
pub fn relative_action_matrix(
    sp: &SpatialHypergroupoid,
    f: &HyperElement,
    cfg: &Tolerances,
) -> Result<ComplexMatrix, HyperError> {
    let g = &sp.g;
    let reg = regular_representation(g, &sp.g_haar)?;
    let g_pos: BTreeMap<usize, usize> = g
        .units()
        .iter()
        .enumerate()
        .map(|(i, &u)| (u, i))
        .collect();
    // Fixed subspace at each orbit representative.
    let n_cl = sp.x_quotient.n_classes();
    let mut bases: Vec<ComplexMatrix> = Vec::with_capacity(n_cl);
    for ci in 0..n_cl {
        let rep_pt = sp.x_quotient.section[ci];
        let stab = sp.x.stabilizer(g, rep_pt);
        let d = reg.bundle.fibers[g_pos[&sp.x.moment(rep_pt)]];
        let mut proj = ComplexMatrix::zeros(d, d);
        for &gm in &stab {
            proj = proj.add(&reg.bundle.unitaries[&gm]);
        }
        proj = proj.scale(C64::new(1.0 / stab.len() as f64, 0.0));
        let (vals, vecs) = crate::matrix::hermitian_eig(&proj, cfg)?;
        let cols: Vec<usize> = vals
            .iter()
            .enumerate()
            .filter(|(_, &v)| v > 0.5)
            .map(|(k, _)| k)
            .collect();
        bases.push(ComplexMatrix::from_fn(d, cols.len(), |i, j| {
            vecs[(i, cols[j])]
        }));
    }
    let dims: Vec<usize> = bases.iter().map(|b| b.cols).collect();
    let total: usize = dims.iter().sum();
    let offsets: Vec<usize> = dims
        .iter()
        .scan(0usize, |acc, &d| {
            let here = *acc;
            *acc += d;
            Some(here)
        })
        .collect();
    // ϖ(class) = |class| · α(representative).
    let weight: Vec<f64> = (0..n_cl)
        .map(|ci| {
            sp.x_quotient.classes[ci].len() as f64
                * rat_to_f64(&sp.alpha[sp.x_quotient.section[ci]])
        })
        .collect();
    let mut mat = ComplexMatrix::zeros(total, total);
    for ci in 0..n_cl {
        let rep_pt = sp.x_quotient.section[ci];
        for y in sp.x.points() {
            if sp.x.moment(y) != sp.x.moment(rep_pt) {
                continue;
            }
            let el = sp.element_of(rep_pt, y);
            let coeff = crate::scalars::crat_to_c64(&f.coeffs[el]) * rat_to_f64(&sp.alpha[y]);
            if coeff.norm() == 0.0 {
                continue;
            }
            let cj = sp.x_quotient.class_of[y];
            // Invariant sections: value at y is L(γ_y)·value at the
            // representative, for any γ_y with γ_y·rep(cj) = y.
            let rep_j = sp.x_quotient.section[cj];
            let gamma = g
                .arrows()
                .find(|&gm| sp.x.translate(gm, rep_j) == Some(y))
                .expect("orbit arrows exist");
            let block = bases[ci]
                .adjoint()
                .mul(&reg.bundle.unitaries[&gamma].mul(&bases[cj]));
            let scaled = block.scale(coeff);
            for i in 0..scaled.rows {
                for j in 0..scaled.cols {
                    mat[(offsets[ci] + i, offsets[cj] + j)] += scaled[(i, j)];
                }
            }
        }
    }
    // Conjugate by the weights to make the representation a *-action.
    let mut weighted = ComplexMatrix::zeros(total, total);
    for ci in 0..n_cl {
        for cj in 0..n_cl {
            let scal = (weight[ci] / weight[cj]).sqrt();
            for i in 0..dims[ci] {
                for j in 0..dims[cj] {
                    weighted[(offsets[ci] + i, offsets[cj] + j)] =
                        mat[(offsets[ci] + i, offsets[cj] + j)] * scal;
                }
            }
        }
    }
    Ok(weighted)
}

pub fn relative_norm(
    sp: &SpatialHypergroupoid,
    f: &HyperElement,
    cfg: &Tolerances,
) -> Result<f64, HyperError> {
    let m = relative_action_matrix(sp, f, cfg)?;
    Ok(operator_norm(&m, cfg)?)
}
