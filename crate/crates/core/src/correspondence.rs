//! Bimodule correspondences between finite groupoids with Haar systems: a
//! bispace X with commuting left/right actions, an equivariant weight system
//! α over the right moment map, and a module cocycle Δ making each fiber of
//! α a twisted quasi-invariant measure for the left action.
//!
//! The module also carries the inner-product/bimodule operations that turn
//! functions on X into a module over the right convolution algebra, and the
//! composition of correspondences through cocycle trivialization and orbit
//! quotient measures.

use std::collections::BTreeMap;

use num::{One, Signed, Zero};
use thiserror::Error;

use crate::action::{
    orbit_quotient, semidirect_right, validate_action, validate_equivariant_system, GSpace,
    Quotient, Side,
};
use crate::algebra::AlgebraElement;
use crate::cocycle::{quotient_measure, trivialize_multiplicative, CocycleError};
use crate::groupoid::{FiniteGroupoid, HaarSystem};
use crate::report::ValidationReport;
use crate::scalars::{
    conj, crat, crat_zero, rat_sqrt_exact, rat_to_f64, C64, CRat, Rat,
};

#[derive(Debug, Error)]
pub enum CorrespondenceError {
    #[error("inner groupoids do not match")]
    InnerMismatch,
    #[error("invalid correspondence: {0} finding(s)")]
    Invalid(usize),
    #[error("{0}")]
    Cocycle(#[from] CocycleError),
    #[error("{0}")]
    Action(#[from] crate::action::ActionError),
    #[error("malformed: {0}")]
    Malformed(String),
}

/// An (H,G)-bispace: one point set with a left H-action and a right G-action
/// sharing the indexing.
#[derive(Debug, Clone)]
pub struct BiSpace {
    pub left: GSpace,
    pub right: GSpace,
}

impl BiSpace {
    pub fn new(left: GSpace, right: GSpace) -> Result<Self, CorrespondenceError> {
        if left.side != Side::Left || right.side != Side::Right {
            return Err(CorrespondenceError::Malformed(
                "bispace needs a left and a right action".into(),
            ));
        }
        if left.n_points() != right.n_points() {
            return Err(CorrespondenceError::Malformed(
                "left and right actions live on different point sets".into(),
            ));
        }
        for p in left.points() {
            if left.point_id(p) != right.point_id(p) {
                return Err(CorrespondenceError::Malformed(
                    "point indexing of the two actions disagrees".into(),
                ));
            }
        }
        Ok(BiSpace { left, right })
    }

    pub fn n_points(&self) -> usize {
        self.left.n_points()
    }

    pub fn point_id(&self, p: usize) -> &str {
        self.left.point_id(p)
    }

    pub fn point_index(&self, id: &str) -> Option<usize> {
        self.left.point_index(id)
    }

    /// h·x.
    pub fn left_translate(&self, h: usize, x: usize) -> Option<usize> {
        self.left.translate(h, x)
    }

    /// x·γ (keyed by the arrow).
    pub fn right_translate(&self, gamma: usize, x: usize) -> Option<usize> {
        self.right.translate(gamma, x)
    }

    /// Moment into the left groupoid's units.
    pub fn left_moment(&self, x: usize) -> usize {
        self.left.moment(x)
    }

    /// Moment into the right groupoid's units.
    pub fn right_moment(&self, x: usize) -> usize {
        self.right.moment(x)
    }
}

/// A correspondence from (H, β) to (G, λ).
#[derive(Debug, Clone)]
pub struct Correspondence {
    pub h: FiniteGroupoid,
    pub h_haar: HaarSystem,
    pub g: FiniteGroupoid,
    pub g_haar: HaarSystem,
    pub space: BiSpace,
    /// Weight per point, read as the system over the right moment map.
    pub alpha: Vec<Rat>,
    /// Orbit space X/G of the right action.
    pub quotient: Quotient,
    /// Module cocycle on H⋉(X/G): value per (H-arrow, class) composable pair.
    pub delta: BTreeMap<(usize, usize), Rat>,
}

impl Correspondence {
    /// Assembles a correspondence; `delta_fn` is evaluated at (H-arrow,
    /// class representative point) for every composable pair.
    pub fn new(
        h: FiniteGroupoid,
        h_haar: HaarSystem,
        g: FiniteGroupoid,
        g_haar: HaarSystem,
        space: BiSpace,
        alpha: Vec<Rat>,
        delta_fn: &dyn Fn(usize, usize) -> Rat,
    ) -> Result<Self, CorrespondenceError> {
        let quotient = orbit_quotient(&g, &space.right);
        let mut delta = BTreeMap::new();
        for (ci, &rep) in quotient.section.iter().enumerate() {
            let m = space.left_moment(rep);
            for arrow in h.arrows() {
                if h.s(arrow) == m {
                    delta.insert((arrow, ci), delta_fn(arrow, rep));
                }
            }
        }
        Ok(Correspondence {
            h,
            h_haar,
            g,
            g_haar,
            space,
            alpha,
            quotient,
            delta,
        })
    }

    pub fn class_of_point(&self, x: usize) -> usize {
        self.quotient.class_of[x]
    }

    /// Δ(h, [x]).
    pub fn delta_at(&self, h_arrow: usize, x: usize) -> Rat {
        self.delta
            .get(&(h_arrow, self.class_of_point(x)))
            .cloned()
            .unwrap_or_else(Rat::one)
    }

    pub fn delta_is_trivial(&self) -> bool {
        self.delta.values().all(|v| v.is_one())
    }
}

/// Pointwise Radon–Nikodym check for a weight on a left G-space:
/// μ(γy)·w(γ) = Δ(γ,y)·μ(y)·w(γ⁻¹) on every composable pair.
pub fn check_delta_measure(
    g: &FiniteGroupoid,
    haar: &HaarSystem,
    x: &GSpace,
    mu: &[Rat],
    delta: &dyn Fn(usize, usize) -> Rat,
) -> ValidationReport {
    assert_eq!(x.side, Side::Left);
    let mut rep = ValidationReport::new();
    for y in x.points() {
        for gamma in x.composable_arrows(g, y) {
            let gy = match x.translate(gamma, y) {
                Some(p) => p,
                None => continue,
            };
            let lhs = &mu[gy] * &haar.weights[gamma];
            let rhs = delta(gamma, y) * &mu[y] * &haar.weights[g.inv(gamma)];
            if lhs != rhs {
                rep.violation(
                    "delta-measure",
                    format!("({};{})", g.arrow_id(gamma), x.point_id(y)),
                    "transported weight does not match the module value",
                );
            }
        }
    }
    rep.normalize();
    rep
}

/// Full validation of the correspondence axioms: commuting actions, moment
/// invariances, equivariant α, the cocycle identity for Δ on the orbit
/// space, and the Δ-measure property of α with respect to the left action.
pub fn validate_correspondence(c: &Correspondence) -> ValidationReport {
    let mut rep = ValidationReport::new();
    rep.merge(validate_action(&c.h, &c.space.left));
    rep.merge(validate_action(&c.g, &c.space.right));
    // Moment invariances.
    for x in c.space.left.points() {
        for gamma in c.space.right.composable_arrows(&c.g, x) {
            if let Some(xg) = c.space.right_translate(gamma, x) {
                if c.space.left_moment(xg) != c.space.left_moment(x) {
                    rep.violation(
                        "left-moment-g-invariance",
                        format!("({};{})", c.g.arrow_id(gamma), c.space.point_id(x)),
                        "the right action must preserve the left moment",
                    );
                }
            }
        }
        for h in c.space.left.composable_arrows(&c.h, x) {
            if let Some(hx) = c.space.left_translate(h, x) {
                if c.space.right_moment(hx) != c.space.right_moment(x) {
                    rep.violation(
                        "right-moment-h-invariance",
                        format!("({};{})", c.h.arrow_id(h), c.space.point_id(x)),
                        "the left action must preserve the right moment",
                    );
                }
            }
        }
    }
    // Commutation (hx)γ = h(xγ).
    for x in c.space.left.points() {
        for h in c.space.left.composable_arrows(&c.h, x) {
            let hx = match c.space.left_translate(h, x) {
                Some(p) => p,
                None => continue,
            };
            for gamma in c.space.right.composable_arrows(&c.g, x) {
                let xg = match c.space.right_translate(gamma, x) {
                    Some(p) => p,
                    None => continue,
                };
                let lhs = c.space.right_translate(gamma, hx);
                let rhs = c.space.left_translate(h, xg);
                if lhs != rhs || lhs.is_none() {
                    rep.violation(
                        "actions-commute",
                        format!(
                            "({};{};{})",
                            c.h.arrow_id(h),
                            c.space.point_id(x),
                            c.g.arrow_id(gamma)
                        ),
                        "(hx)γ must equal h(xγ)",
                    );
                }
            }
        }
    }
    rep.note("right-properness", "", "proper (finite action)");
    // α equivariance under the right action.
    rep.merge(validate_equivariant_system(&c.g, &c.space.right, &c.alpha));
    // Δ must be positive, 1 on units, and a cocycle on H⋉(X/G).
    for ((arrow, class), v) in &c.delta {
        if !v.is_positive() {
            rep.violation(
                "delta-positivity",
                format!("({};{})", c.h.arrow_id(*arrow), c.quotient.class_ids[*class]),
                "module values must be positive",
            );
        }
        if c.h.is_unit(*arrow) && !v.is_one() {
            rep.violation(
                "delta-unit",
                format!("({};{})", c.h.arrow_id(*arrow), c.quotient.class_ids[*class]),
                "module must be 1 on units",
            );
        }
    }
    let class_translate = |h: usize, class: usize| -> Option<usize> {
        let rep_pt = c.quotient.section[class];
        c.space
            .left_translate(h, rep_pt)
            .map(|p| c.class_of_point(p))
    };
    for class in 0..c.quotient.n_classes() {
        let m = c.space.left_moment(c.quotient.section[class]);
        for b in c.h.arrows() {
            if c.h.s(b) != m {
                continue;
            }
            let b_class = match class_translate(b, class) {
                Some(cl) => cl,
                None => continue,
            };
            for a in c.h.arrows() {
                if c.h.s(a) != c.h.r(b) {
                    continue;
                }
                let ab = c.h.compose(a, b).expect("composable");
                let lhs = c.delta.get(&(ab, class));
                let rhs = match (c.delta.get(&(a, b_class)), c.delta.get(&(b, class))) {
                    (Some(x), Some(y)) => Some(x * y),
                    _ => None,
                };
                if lhs != rhs.as_ref() {
                    rep.violation(
                        "delta-cocycle",
                        format!(
                            "({},{};{})",
                            c.h.arrow_id(a),
                            c.h.arrow_id(b),
                            c.quotient.class_ids[class]
                        ),
                        "Δ(ab,ẋ) must equal Δ(a,bẋ)·Δ(b,ẋ)",
                    );
                }
            }
        }
    }
    // Δ must be constant on right-orbit classes by construction (it is keyed
    // by class); verify α is a Δ-measure for the left action.
    let delta_fn = |h: usize, x: usize| c.delta_at(h, x);
    rep.merge(check_delta_measure(
        &c.h,
        &c.h_haar,
        &c.space.left,
        &c.alpha,
        &delta_fn,
    ));
    rep.normalize();
    rep
}

// ---------------------------------------------------------------------------
// Bimodule operations
// ---------------------------------------------------------------------------

/// (ξf)(x) = Σ_{γ ∈ G^{s_X(x)}} ξ(xγ) f(γ⁻¹) w(γ).
pub fn right_module_action(c: &Correspondence, xi: &[CRat], f: &AlgebraElement) -> Vec<CRat> {
    let mut out = vec![crat_zero(); c.space.n_points()];
    for x in 0..c.space.n_points() {
        let mut acc = crat_zero();
        for gamma in c.g.range_fiber(c.space.right_moment(x)) {
            if let Some(xg) = c.space.right_translate(gamma, x) {
                acc = acc
                    + xi[xg].clone()
                        * f.coeffs[c.g.inv(gamma)].clone()
                        * crat(c.g_haar.weights[gamma].clone(), Rat::zero());
            }
        }
        out[x] = acc;
    }
    out
}

/// ⟨ξ,η⟩(γ) = Σ_{x : s_X(x) = r(γ)} conj(ξ(x)) η(xγ) α(x).
pub fn cstar_inner_product(c: &Correspondence, xi: &[CRat], eta: &[CRat]) -> AlgebraElement {
    let mut out = AlgebraElement::zero(&c.g);
    for gamma in c.g.arrows() {
        let mut acc = crat_zero();
        for x in 0..c.space.n_points() {
            if c.space.right_moment(x) != c.g.r(gamma) {
                continue;
            }
            if let Some(xg) = c.space.right_translate(gamma, x) {
                acc = acc
                    + conj(&xi[x]) * eta[xg].clone() * crat(c.alpha[x].clone(), Rat::zero());
            }
        }
        out.coeffs[gamma] = acc;
    }
    out
}

/// (aξ)(x) = Σ_{h ∈ H^{r_X(x)}} a(h) ξ(h⁻¹x) Δ^{1/2}(h⁻¹, [x]) w(h).
/// Exact as long as every needed Δ value has a rational square root; returns
/// `None` otherwise (use [`left_action_f64`]).
pub fn left_action_exact(
    c: &Correspondence,
    a: &AlgebraElement,
    xi: &[CRat],
) -> Option<Vec<CRat>> {
    let mut out = vec![crat_zero(); c.space.n_points()];
    for x in 0..c.space.n_points() {
        let mut acc = crat_zero();
        for h in c.h.range_fiber(c.space.left_moment(x)) {
            let hi = c.h.inv(h);
            if let Some(hx) = c.space.left_translate(hi, x) {
                let root = rat_sqrt_exact(&c.delta_at(hi, x))?;
                acc = acc
                    + a.coeffs[h].clone()
                        * xi[hx].clone()
                        * crat(root * &c.h_haar.weights[h], Rat::zero());
            }
        }
        out[x] = acc;
    }
    Some(out)
}

pub fn to_f64_vec(xi: &[CRat]) -> Vec<C64> {
    xi.iter().map(crate::scalars::crat_to_c64).collect()
}

pub fn right_module_action_f64(c: &Correspondence, xi: &[C64], f: &[C64]) -> Vec<C64> {
    let mut out = vec![C64::new(0.0, 0.0); c.space.n_points()];
    for x in 0..c.space.n_points() {
        let mut acc = C64::new(0.0, 0.0);
        for gamma in c.g.range_fiber(c.space.right_moment(x)) {
            if let Some(xg) = c.space.right_translate(gamma, x) {
                acc += xi[xg]
                    * f[c.g.inv(gamma)]
                    * rat_to_f64(&c.g_haar.weights[gamma]);
            }
        }
        out[x] = acc;
    }
    out
}

pub fn cstar_inner_product_f64(c: &Correspondence, xi: &[C64], eta: &[C64]) -> Vec<C64> {
    let mut out = vec![C64::new(0.0, 0.0); c.g.n_arrows()];
    for gamma in c.g.arrows() {
        let mut acc = C64::new(0.0, 0.0);
        for x in 0..c.space.n_points() {
            if c.space.right_moment(x) != c.g.r(gamma) {
                continue;
            }
            if let Some(xg) = c.space.right_translate(gamma, x) {
                acc += xi[x].conj() * eta[xg] * rat_to_f64(&c.alpha[x]);
            }
        }
        out[gamma] = acc;
    }
    out
}

pub fn left_action_f64(c: &Correspondence, a: &[C64], xi: &[C64]) -> Vec<C64> {
    let mut out = vec![C64::new(0.0, 0.0); c.space.n_points()];
    for x in 0..c.space.n_points() {
        let mut acc = C64::new(0.0, 0.0);
        for h in c.h.range_fiber(c.space.left_moment(x)) {
            let hi = c.h.inv(h);
            if let Some(hx) = c.space.left_translate(hi, x) {
                let root = rat_to_f64(&c.delta_at(hi, x)).sqrt();
                acc += a[h] * xi[hx] * root * rat_to_f64(&c.h_haar.weights[h]);
            }
        }
        out[x] = acc;
    }
    out
}

// ---------------------------------------------------------------------------
// Builders
// ---------------------------------------------------------------------------

/// The identity correspondence of (G, λ): X = G with both translations and
/// α = λ⁻¹ (weight of the inverse arrow), module ≡ 1.
pub fn identity_correspondence(
    g: &FiniteGroupoid,
    haar: &HaarSystem,
) -> Result<Correspondence, CorrespondenceError> {
    let left = GSpace::translation_space(g, Side::Left);
    let right = GSpace::translation_space(g, Side::Right);
    let space = BiSpace::new(left, right)?;
    let alpha: Vec<Rat> = (0..space.n_points())
        .map(|p| {
            let arrow = g.arrow_index(space.point_id(p)).unwrap();
            haar.weights[g.inv(arrow)].clone()
        })
        .collect();
    Correspondence::new(
        g.clone(),
        haar.clone(),
        g.clone(),
        haar.clone(),
        space,
        alpha,
        &|_, _| Rat::one(),
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SubgroupSide {
    /// Correspondence from G to K (induces K-representations up to G).
    Induction,
    /// Correspondence from K to G (induces G-representations down to K,
    /// i.e. restriction).
    Restriction,
}

/// The subgroup correspondence of K ≤ G with X = G and α = λ⁻¹; for finite
/// groups both Haar systems are counting-like and the module is trivial.
pub fn subgroup_correspondence(
    g: &FiniteGroupoid,
    g_haar: &HaarSystem,
    k: &FiniteGroupoid,
    k_haar: &HaarSystem,
    side: SubgroupSide,
) -> Result<Correspondence, CorrespondenceError> {
    // Sanity: every arrow of K must name an arrow of G.
    for a in k.arrows() {
        if g.arrow_index(k.arrow_id(a)).is_none() {
            return Err(CorrespondenceError::Malformed(format!(
                "`{}` is not an element of the ambient group",
                k.arrow_id(a)
            )));
        }
    }
    let point_ids: Vec<String> = g.arrows().map(|a| g.arrow_id(a).to_string()).collect();
    let g_unit = g.units()[0];
    let k_unit = k.units()[0];
    let mut moment_g = BTreeMap::new();
    let mut moment_k = BTreeMap::new();
    for id in &point_ids {
        moment_g.insert(id.clone(), g.arrow_id(g_unit).to_string());
        moment_k.insert(id.clone(), k.arrow_id(k_unit).to_string());
    }
    let mut left_triples = Vec::new();
    let mut right_triples = Vec::new();
    let (left_grp, right_grp) = match side {
        SubgroupSide::Induction => (g, k),
        SubgroupSide::Restriction => (k, g),
    };
    for x in g.arrows() {
        for a in left_grp.arrows() {
            let ax = g
                .compose(g.arrow_index(left_grp.arrow_id(a)).unwrap(), x)
                .unwrap();
            left_triples.push((
                left_grp.arrow_id(a).to_string(),
                g.arrow_id(x).to_string(),
                g.arrow_id(ax).to_string(),
            ));
        }
        for b in right_grp.arrows() {
            let xb = g
                .compose(x, g.arrow_index(right_grp.arrow_id(b)).unwrap())
                .unwrap();
            right_triples.push((
                right_grp.arrow_id(b).to_string(),
                g.arrow_id(x).to_string(),
                g.arrow_id(xb).to_string(),
            ));
        }
    }
    let (left_moment, right_moment) = match side {
        SubgroupSide::Induction => (moment_g, moment_k),
        SubgroupSide::Restriction => (moment_k, moment_g),
    };
    let left = GSpace::new(
        Side::Left,
        left_grp,
        point_ids.clone(),
        &left_moment,
        &left_triples,
    )?;
    let right = GSpace::new(Side::Right, right_grp, point_ids, &right_moment, &right_triples)?;
    let space = BiSpace::new(left, right)?;
    let alpha: Vec<Rat> = (0..space.n_points())
        .map(|p| {
            let arrow = g.arrow_index(space.point_id(p)).unwrap();
            g_haar.weights[g.inv(arrow)].clone()
        })
        .collect();
    let (h_grp, h_haar, r_grp, r_haar) = match side {
        SubgroupSide::Induction => (g.clone(), g_haar.clone(), k.clone(), k_haar.clone()),
        SubgroupSide::Restriction => (k.clone(), k_haar.clone(), g.clone(), g_haar.clone()),
    };
    Correspondence::new(h_grp, h_haar, r_grp, r_haar, space, alpha, &|_, _| Rat::one())
}

// ---------------------------------------------------------------------------
// Composition
// ---------------------------------------------------------------------------

/// Bookkeeping of a composition, kept for the elementary-tensor map and the
/// unit-law certification.
#[derive(Debug, Clone)]
pub struct ComposeWitness {
    /// Pairs (x ∈ X₁, y ∈ X₂) in generation order.
    pub pairs: Vec<(usize, usize)>,
    /// Orbit structure of the middle action on the pairs (sorted point ids).
    pub w_quotient: Quotient,
    /// Trivializing positive function b per pair (generation order).
    pub b: Vec<Rat>,
    /// Sorted W-point index -> position in `pairs`.
    pub sorted_to_pair: Vec<usize>,
}

fn tables_equal(a: &FiniteGroupoid, b: &FiniteGroupoid) -> bool {
    let (ta, tb) = (a.to_table(), b.to_table());
    ta.units == tb.units && ta.arrows == tb.arrows && {
        let mut ca = ta.compose.clone();
        let mut cb = tb.compose.clone();
        ca.sort();
        cb.sort();
        ca == cb
    }
}

/// Composition of correspondences: (X, α): G₁→G₂ with (Y, β): G₂→G₃ gives
/// (Z, τ) = ((X*Y)/G₂, α∘β-descended): G₁→G₃, with the composed module
/// Δ(γ, ż) = Δ_X(γ, ẋ)·b(γx, y)/b(x, y).
pub fn compose(
    c1: &Correspondence,
    c2: &Correspondence,
) -> Result<(Correspondence, ComposeWitness), CorrespondenceError> {
    if !tables_equal(&c1.g, &c2.h) {
        return Err(CorrespondenceError::InnerMismatch);
    }
    let g2 = &c1.g;
    let g2_haar = &c1.g_haar;
    // W = X*Y over the units of G₂.
    let mut pairs: Vec<(usize, usize)> = Vec::new();
    for x in 0..c1.space.n_points() {
        for y in 0..c2.space.n_points() {
            if c1.space.right_moment(x) == c2.space.left_moment(y) {
                pairs.push((x, y));
            }
        }
    }
    let pair_id = |x: usize, y: usize| {
        format!("({}|{})", c1.space.point_id(x), c2.space.point_id(y))
    };
    let w_ids: Vec<String> = pairs.iter().map(|&(x, y)| pair_id(x, y)).collect();
    // Right G₂-action on W: (x,y)·h = (xh, h⁻¹y).
    let mut w_moment = BTreeMap::new();
    let mut w_triples = Vec::new();
    for &(x, y) in &pairs {
        let m = c1.space.right_moment(x);
        w_moment.insert(pair_id(x, y), g2.arrow_id(m).to_string());
        for h in g2.range_fiber(m) {
            let xh = match c1.space.right_translate(h, x) {
                Some(p) => p,
                None => continue,
            };
            let hy = match c2.space.left_translate(g2.inv(h), y) {
                Some(p) => p,
                None => continue,
            };
            w_triples.push((g2.arrow_id(h).to_string(), pair_id(x, y), pair_id(xh, hy)));
        }
    }
    let w_space = GSpace::new(Side::Right, g2, w_ids.clone(), &w_moment, &w_triples)?;
    let mut sorted_to_pair = vec![0usize; w_space.n_points()];
    for (pos, id) in w_ids.iter().enumerate() {
        sorted_to_pair[w_space.point_index(id).unwrap()] = pos;
    }
    let mut pair_pos: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    for (pos, &xy) in pairs.iter().enumerate() {
        pair_pos.insert(xy, pos);
    }
    // Auxiliary space X*(Y/G₃) on which the middle cocycle is trivialized, so
    // that b(x, y) automatically depends only on (x, ẏ).
    let yq = &c2.quotient;
    let aux_id = |x: usize, yc: usize| {
        format!("({}|{})", c1.space.point_id(x), yq.class_ids[yc])
    };
    let mut aux_ids = Vec::new();
    let mut aux_moment = BTreeMap::new();
    let mut aux_triples = Vec::new();
    for x in 0..c1.space.n_points() {
        for yc in 0..yq.n_classes() {
            let rep = yq.section[yc];
            if c1.space.right_moment(x) != c2.space.left_moment(rep) {
                continue;
            }
            aux_ids.push(aux_id(x, yc));
            aux_moment.insert(aux_id(x, yc), g2.arrow_id(c1.space.right_moment(x)).to_string());
            for h in g2.range_fiber(c1.space.right_moment(x)) {
                let xh = match c1.space.right_translate(h, x) {
                    Some(p) => p,
                    None => continue,
                };
                let hy = match c2.space.left_translate(g2.inv(h), rep) {
                    Some(p) => p,
                    None => continue,
                };
                aux_triples.push((
                    g2.arrow_id(h).to_string(),
                    aux_id(x, yc),
                    aux_id(xh, yq.class_of[hy]),
                ));
            }
        }
    }
    let aux_space = GSpace::new(Side::Right, g2, aux_ids, &aux_moment, &aux_triples)?;
    let aux_sd = semidirect_right(g2, &aux_space)?;
    // Cocycle c((x,ẏ); h) = Δ_Y(h⁻¹, ẏ), so that b(zh)/b(z) = Δ_Y(h⁻¹, ẏ)⁻¹
    // makes b·(β∘α) symmetric.
    let mut cvals = vec![Rat::one(); aux_sd.groupoid.n_arrows()];
    for (&idx, &(h, z)) in &aux_sd.arrow_pairs {
        // z encodes (x, ẏ); recover ẏ via the aux point id.
        let id = aux_space.point_id(z);
        let class_part = id.rsplit_once('|').map(|(_, c)| c.trim_end_matches(')'));
        let yc = class_part
            .and_then(|cid| yq.class_ids.iter().position(|c| c == cid))
            .expect("aux point id encodes a class");
        let rep = yq.section[yc];
        cvals[idx] = c2.delta_at(g2.inv(h), rep);
    }
    let b_aux_units = trivialize_multiplicative(&aux_sd.groupoid, &cvals)?;
    // b per aux point: units of the semidirect groupoid are indexed like the
    // aux points through unit_of_point.
    let aux_unit_positions: BTreeMap<usize, usize> = aux_sd
        .groupoid
        .units()
        .iter()
        .enumerate()
        .map(|(i, &u)| (u, i))
        .collect();
    let b_aux: Vec<Rat> = (0..aux_space.n_points())
        .map(|p| b_aux_units[aux_unit_positions[&aux_sd.unit_of_point[p]]].clone())
        .collect();
    // Pull b back to W.
    let b: Vec<Rat> = pairs
        .iter()
        .map(|&(x, y)| {
            let yc = yq.class_of[y];
            let p = aux_space
                .point_index(&aux_id(x, yc))
                .expect("aux point exists for every pair");
            b_aux[p].clone()
        })
        .collect();
    // Verify the trivializing property on W itself.
    for (wi, &(x, y)) in pairs.iter().enumerate() {
        let m = c1.space.right_moment(x);
        for h in g2.range_fiber(m) {
            let xh = match c1.space.right_translate(h, x) {
                Some(p) => p,
                None => continue,
            };
            let hy = match c2.space.left_translate(g2.inv(h), y) {
                Some(p) => p,
                None => continue,
            };
            let wj = pair_pos[&(xh, hy)];
            if &b[wj] * &c2.delta_at(g2.inv(h), y) != b[wi] {
                return Err(CorrespondenceError::Cocycle(CocycleError::NotACoboundary(
                    format!("({};{})", w_ids[wi], g2.arrow_id(h)),
                )));
            }
        }
    }
    // Quotient measure of b·(α×β) over W⋊G₂.
    let w_sd = semidirect_right(g2, &w_space)?;
    let w_haar = w_sd.inherited_haar(g2_haar);
    let m_hat: Vec<Rat> = pairs
        .iter()
        .enumerate()
        .map(|(wi, &(x, y))| &b[wi] * &c1.alpha[x] * &c2.alpha[y])
        .collect();
    let unit_positions: BTreeMap<usize, usize> = w_sd
        .groupoid
        .units()
        .iter()
        .enumerate()
        .map(|(i, &u)| (u, i))
        .collect();
    let mut mu_units = vec![Rat::zero(); w_sd.groupoid.units().len()];
    for (wi, _) in pairs.iter().enumerate() {
        // w_space point index wi corresponds to pairs[wi] because GSpace
        // sorts ids; align through the id.
        let p = w_space.point_index(&w_ids[wi]).unwrap();
        mu_units[unit_positions[&w_sd.unit_of_point[p]]] = m_hat[wi].clone();
    }
    let qm = quotient_measure(&w_sd.groupoid, &w_haar, &mu_units)?;
    // Orbits of W under the middle action, with the deterministic section.
    let w_quotient = orbit_quotient(g2, &w_space);
    // τ per class: match quotient_measure orbits (on semidirect units) to the
    // orbit_quotient classes (on W points).
    let mut tau = vec![Rat::zero(); w_quotient.n_classes()];
    for (oi, orbit) in qm.orbits.iter().enumerate() {
        let unit_arrow = orbit[0];
        let wp = (0..w_space.n_points())
            .find(|&p| w_sd.unit_of_point[p] == unit_arrow)
            .expect("unit corresponds to a point");
        tau[w_quotient.class_of[wp]] = qm.m[oi].clone();
    }
    // The composed space Z with its G₁- and G₃-actions.
    let pair_at = |wp: usize| -> (usize, usize) { pairs[sorted_to_pair[wp]] };
    let g1 = &c1.h;
    let g3 = &c2.g;
    let z_ids: Vec<String> = w_quotient.class_ids.clone();
    let mut z_left_moment = BTreeMap::new();
    let mut z_right_moment = BTreeMap::new();
    for (ci, id) in z_ids.iter().enumerate() {
        let (x, y) = pair_at(w_quotient.section[ci]);
        z_left_moment.insert(id.clone(), g1.arrow_id(c1.space.left_moment(x)).to_string());
        z_right_moment.insert(id.clone(), g3.arrow_id(c2.space.right_moment(y)).to_string());
        // Well-definedness of the moments across the class.
        for &member in &w_quotient.classes[ci] {
            let (mx, my) = pair_at(member);
            if c1.space.left_moment(mx) != c1.space.left_moment(x)
                || c2.space.right_moment(my) != c2.space.right_moment(y)
            {
                return Err(CorrespondenceError::Malformed(format!(
                    "moment not constant on the class {id}"
                )));
            }
        }
    }
    let mut z_left_triples = Vec::new();
    let mut z_right_triples = Vec::new();
    for (ci, id) in z_ids.iter().enumerate() {
        for &member in &w_quotient.classes[ci] {
            let (x, y) = pair_at(member);
            for gam in g1.source_fiber(c1.space.left_moment(x)) {
                if let Some(gx) = c1.space.left_translate(gam, x) {
                    let target = w_space.point_index(&pair_id(gx, y)).unwrap();
                    z_left_triples.push((
                        g1.arrow_id(gam).to_string(),
                        id.clone(),
                        z_ids[w_quotient.class_of[target]].clone(),
                    ));
                }
            }
            for gam in g3.arrows() {
                if g3.r(gam) != c2.space.right_moment(y) {
                    continue;
                }
                if let Some(yg) = c2.space.right_translate(gam, y) {
                    let target = w_space.point_index(&pair_id(x, yg)).unwrap();
                    z_right_triples.push((
                        g3.arrow_id(gam).to_string(),
                        id.clone(),
                        z_ids[w_quotient.class_of[target]].clone(),
                    ));
                }
            }
        }
    }
    z_left_triples.sort();
    z_left_triples.dedup();
    z_right_triples.sort();
    z_right_triples.dedup();
    // Conflicting duplicates would survive dedup as two entries for one key;
    // GSpace::new rejects those, certifying well-definedness of the actions.
    let z_left = GSpace::new(Side::Left, g1, z_ids.clone(), &z_left_moment, &z_left_triples)?;
    let z_right = GSpace::new(
        Side::Right,
        g3,
        z_ids.clone(),
        &z_right_moment,
        &z_right_triples,
    )?;
    let z_space = BiSpace::new(z_left, z_right)?;
    // τ indexed like the Z points (class ids are sorted identically).
    let z_alpha: Vec<Rat> = (0..z_space.n_points())
        .map(|p| {
            let ci = z_ids
                .iter()
                .position(|id| id == z_space.point_id(p))
                .unwrap();
            tau[ci].clone()
        })
        .collect();
    // Composed module: Δ(γ, ż) = Δ_X(γ, ẋ)·b(γx, y)/b(x, y), checked to be
    // independent of all representative choices.
    let zq = orbit_quotient(g3, &z_space.right);
    let b_of = |x: usize, y: usize| -> &Rat { &b[pair_pos[&(x, y)]] };
    let mut composed_delta: BTreeMap<(usize, usize), Rat> = BTreeMap::new();
    for zc in 0..zq.n_classes() {
        // Every W-pair whose Z-class lies in this G₃-class.
        let mut members: Vec<(usize, usize)> = Vec::new();
        for &zp in &zq.classes[zc] {
            let ci = z_ids
                .iter()
                .position(|id| id == z_space.point_id(zp))
                .unwrap();
            for &wp in &w_quotient.classes[ci] {
                members.push(pair_at(wp));
            }
        }
        let m = {
            let (x0, _) = members[0];
            c1.space.left_moment(x0)
        };
        for gam in g1.arrows() {
            if g1.s(gam) != m {
                continue;
            }
            let mut value: Option<Rat> = None;
            for &(x, y) in &members {
                let gx = match c1.space.left_translate(gam, x) {
                    Some(p) => p,
                    None => continue,
                };
                let v = c1.delta_at(gam, x) * b_of(gx, y) / b_of(x, y);
                match &value {
                    None => value = Some(v),
                    Some(prev) => {
                        if *prev != v {
                            return Err(CorrespondenceError::Malformed(format!(
                                "composed module not constant on class {}",
                                zq.class_ids[zc]
                            )));
                        }
                    }
                }
            }
            if let Some(v) = value {
                composed_delta.insert((gam, zc), v);
            }
        }
    }
    let delta_fn = |gam: usize, z_rep: usize| -> Rat {
        composed_delta
            .get(&(gam, zq.class_of[z_rep]))
            .cloned()
            .unwrap_or_else(Rat::one)
    };
    let composed = Correspondence::new(
        g1.clone(),
        c1.h_haar.clone(),
        g3.clone(),
        c2.g_haar.clone(),
        z_space,
        z_alpha,
        &delta_fn,
    )?;
    let witness = ComposeWitness {
        pairs,
        w_quotient,
        b,
        sorted_to_pair,
    };
    Ok((composed, witness))
}

/// The image of an elementary tensor ξ⊗η in the composed module:
/// θ(ξ⊗η)([x,y]) = b(x,ẏ)^{-1/2} Σ_h ξ(xh) η(h⁻¹y) Δ_Y^{1/2}(h⁻¹,ẏ) w₂(h).
pub fn elementary_tensor(
    c1: &Correspondence,
    c2: &Correspondence,
    witness: &ComposeWitness,
    xi: &[C64],
    eta: &[C64],
) -> Vec<C64> {
    let g2 = &c1.g;
    let mut out = vec![C64::new(0.0, 0.0); witness.w_quotient.n_classes()];
    for ci in 0..witness.w_quotient.n_classes() {
        // The section returns a W-point index in the sorted W ordering; the
        // witness pairs are indexed in generation order, so translate by id.
        let rep_point = witness.w_quotient.section[ci];
        // Find the generating pair for the section point: the class members
        // below are sorted W-point indices; map back through position.
        let (x0, y0) = witness.pairs[pair_position(witness, rep_point)];
        let mut acc = C64::new(0.0, 0.0);
        for h in g2.range_fiber(c1.space.right_moment(x0)) {
            let xh = match c1.space.right_translate(h, x0) {
                Some(p) => p,
                None => continue,
            };
            let hy = match c2.space.left_translate(g2.inv(h), y0) {
                Some(p) => p,
                None => continue,
            };
            let root = rat_to_f64(&c2.delta_at(g2.inv(h), y0)).sqrt();
            acc += xi[xh] * eta[hy] * root * rat_to_f64(&c1.g_haar.weights[h]);
        }
        let b_rep = rat_to_f64(&witness.b[pair_position(witness, rep_point)]);
        out[ci] = acc / b_rep.sqrt();
    }
    out
}

fn pair_position(witness: &ComposeWitness, sorted_point: usize) -> usize {
    witness.sorted_to_pair[sorted_point]
}

/// Certification that a composed correspondence is isomorphic to a target
/// through an explicit class-representative collapse map.
pub fn certify_isomorphism(
    composed: &Correspondence,
    target: &Correspondence,
    map: &[usize],
) -> ValidationReport {
    let mut rep = ValidationReport::new();
    let n = composed.space.n_points();
    if map.len() != n || target.space.n_points() != n {
        rep.violation("iso-bijection", "", "point counts differ");
        return rep;
    }
    let mut seen = vec![false; n];
    for &t in map {
        if t >= n || seen[t] {
            rep.violation("iso-bijection", "", "map is not a bijection");
            return rep;
        }
        seen[t] = true;
    }
    for z in 0..n {
        if composed.space.left_moment(z) != target.space.left_moment(map[z]) {
            rep.violation(
                "iso-left-moment",
                composed.space.point_id(z),
                "left moments differ",
            );
        }
        if composed.space.right_moment(z) != target.space.right_moment(map[z]) {
            rep.violation(
                "iso-right-moment",
                composed.space.point_id(z),
                "right moments differ",
            );
        }
        if composed.alpha[z] != target.alpha[map[z]] {
            rep.violation(
                "iso-alpha",
                composed.space.point_id(z),
                "weights differ under the canonical bijection",
            );
        }
        for h in composed.h.arrows() {
            if composed.h.s(h) != composed.space.left_moment(z) {
                continue;
            }
            let lhs = composed.space.left_translate(h, z).map(|p| map[p]);
            let rhs = target.space.left_translate(h, map[z]);
            if lhs != rhs {
                rep.violation(
                    "iso-left-action",
                    format!("({};{})", composed.h.arrow_id(h), composed.space.point_id(z)),
                    "left actions do not transport",
                );
            }
        }
        for gam in composed.g.arrows() {
            if composed.g.r(gam) != composed.space.right_moment(z) {
                continue;
            }
            let lhs = composed.space.right_translate(gam, z).map(|p| map[p]);
            let rhs = target.space.right_translate(gam, map[z]);
            if lhs != rhs {
                rep.violation(
                    "iso-right-action",
                    format!("({};{})", composed.g.arrow_id(gam), composed.space.point_id(z)),
                    "right actions do not transport",
                );
            }
        }
        // Modules agree on matching classes.
        for h in composed.h.arrows() {
            if composed.h.s(h) != composed.space.left_moment(z) {
                continue;
            }
            if composed.delta_at(h, z) != target.delta_at(h, map[z]) {
                rep.violation(
                    "iso-delta",
                    format!("({};{})", composed.h.arrow_id(h), composed.space.point_id(z)),
                    "modules differ under the canonical bijection",
                );
            }
        }
    }
    rep.normalize();
    rep
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{convolve, involute, regular_rep_matrix};
    use crate::fixtures;
    use crate::groupoid::counting_haar;
    use crate::groups;
    use crate::matrix::{hermitian_spectrum, Tolerances};
    use crate::scalars::{crat_int, rat, rat_int};
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rand_c64(rng: &mut impl Rng) -> C64 {
        C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
    }

    #[test]
    fn identity_correspondence_is_valid_with_trivial_module() {
        for g in [groups::cyclic_group(2), crate::groupoid::pair_groupoid(2)] {
            let haar = counting_haar(&g);
            let c = identity_correspondence(&g, &haar).unwrap();
            assert!(c.delta_is_trivial());
            let rep = validate_correspondence(&c);
            assert!(rep.is_ok(), "{:?}", rep.findings);
        }
    }

    #[test]
    fn subgroup_correspondences_are_valid() {
        let z4 = groups::cyclic_group(4);
        let z4_haar = counting_haar(&z4);
        let v = groups::GroupView::new(&z4).unwrap();
        let k_set = v.generated_subgroup(&[v.element_by_id("g2").unwrap()]);
        let k = v.subgroup_groupoid(&k_set).unwrap();
        let k_haar = counting_haar(&k);
        for side in [SubgroupSide::Induction, SubgroupSide::Restriction] {
            let c = subgroup_correspondence(&z4, &z4_haar, &k, &k_haar, side).unwrap();
            assert!(c.delta_is_trivial());
            let rep = validate_correspondence(&c);
            assert!(rep.is_ok(), "{side:?}: {:?}", rep.findings);
        }
    }

    #[test]
    fn broken_alpha_equivariance_is_reported() {
        let g = groups::cyclic_group(2);
        let haar = counting_haar(&g);
        let mut c = identity_correspondence(&g, &haar).unwrap();
        c.alpha[0] = rat_int(5);
        let rep = validate_correspondence(&c);
        assert!(rep.has_code("equivariance") || rep.has_code("delta-measure"));
    }

    #[test]
    fn delta_measure_examples() {
        // Counting measure on a group acting on itself: module ≡ 1.
        let g = groups::cyclic_group(3);
        let haar = counting_haar(&g);
        let x = crate::action::GSpace::translation_space(&g, Side::Left);
        let mu = vec![rat_int(1); x.n_points()];
        let ok = check_delta_measure(&g, &haar, &x, &mu, &|_, _| rat_int(1));
        assert!(ok.is_ok());

        // Weighted measure on the negation action fails with the trivial
        // module and passes with the forced one.
        let (z2, xneg) = fixtures::z2_negation_action();
        let haar = counting_haar(&z2);
        let mu = fixtures::weighted_negation_measure(&xneg);
        let bad = check_delta_measure(&z2, &haar, &xneg, &mu, &|_, _| rat_int(1));
        assert!(bad.has_code("delta-measure"));
        assert!(bad.witnesses_mentioning("(g1;1)"));
        let table = fixtures::weighted_negation_delta(&xneg);
        let z2c = z2.clone();
        let xc = xneg.clone();
        let delta = move |a: usize, p: usize| {
            table[&(z2c.arrow_id(a).to_string(), xc.point_id(p).to_string())].clone()
        };
        let good = check_delta_measure(&z2, &haar, &xneg, &mu, &delta);
        assert!(good.is_ok(), "{:?}", good.findings);
    }

    #[test]
    fn toy_correspondence_is_valid() {
        let c = fixtures::delta_toy_correspondence();
        let rep = validate_correspondence(&c);
        assert!(rep.is_ok(), "{:?}", rep.findings);
        assert!(!c.delta_is_trivial());
    }

    #[test]
    fn right_module_action_examples() {
        // G = Z/2, X = G, ξ = δ_e, f = δ_σ gives ξf = δ_σ.
        let z2 = groups::cyclic_group(2);
        let haar = counting_haar(&z2);
        let c = identity_correspondence(&z2, &haar).unwrap();
        let e = c.space.point_index("e").unwrap();
        let s = c.space.point_index("g1").unwrap();
        let mut xi = vec![crat_zero(); 2];
        xi[e] = crat_int(1, 0);
        let f = AlgebraElement::delta(&z2, z2.arrow_index("g1").unwrap());
        let out = right_module_action(&c, &xi, &f);
        assert_eq!(out[e], crat_zero());
        assert_eq!(out[s], crat_int(1, 0));
        // Zero stays zero.
        let zero = vec![crat_zero(); 2];
        assert!(right_module_action(&c, &zero, &f)
            .iter()
            .all(|z| z.re.is_zero() && z.im.is_zero()));
        // The algebra unit acts as the identity.
        let unit = crate::algebra::unit_element(&z2, &haar);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let xi: Vec<CRat> = (0..2)
            .map(|_| crat(rat(rng.gen_range(-5..5), 1), rat(rng.gen_range(-5..5), 1)))
            .collect();
        assert_eq!(right_module_action(&c, &xi, &unit), xi);
    }

    #[test]
    fn inner_product_examples_and_positivity() {
        let z2 = groups::cyclic_group(2);
        let haar = counting_haar(&z2);
        let c = identity_correspondence(&z2, &haar).unwrap();
        let e = c.space.point_index("e").unwrap();
        let mut xi = vec![crat_zero(); 2];
        xi[e] = crat_int(1, 0);
        let ip = cstar_inner_product(&c, &xi, &xi);
        assert_eq!(ip, AlgebraElement::delta(&z2, z2.arrow_index("e").unwrap()));
        // ⟨ξ,ξ⟩ positive: all regular representations PSD.
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..10 {
            let xi: Vec<CRat> = (0..2)
                .map(|_| crat(rat(rng.gen_range(-9..9), 2), rat(rng.gen_range(-9..9), 2)))
                .collect();
            let ip = cstar_inner_product(&c, &xi, &xi);
            for &u in z2.units() {
                let m = regular_rep_matrix(&z2, &haar, &ip, u);
                let evs = hermitian_spectrum(&m, &Tolerances::default()).unwrap();
                assert!(evs[0] >= -1e-10);
            }
        }
    }

    #[test]
    fn left_action_restriction_example() {
        // K = {e, g2} inside Z/4, restriction correspondence: δ_h acts by
        // translation, Δ ≡ 1 keeps everything exact.
        let z4 = groups::cyclic_group(4);
        let z4_haar = counting_haar(&z4);
        let v = groups::GroupView::new(&z4).unwrap();
        let k_set = v.generated_subgroup(&[v.element_by_id("g2").unwrap()]);
        let k = v.subgroup_groupoid(&k_set).unwrap();
        let k_haar = counting_haar(&k);
        let c = subgroup_correspondence(&z4, &z4_haar, &k, &k_haar, SubgroupSide::Restriction)
            .unwrap();
        let h_arrow = k.arrow_index("g2").unwrap();
        let a = AlgebraElement::delta(&k, h_arrow);
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let xi: Vec<CRat> = (0..c.space.n_points())
            .map(|_| crat(rat(rng.gen_range(-9..9), 1), rat(rng.gen_range(-9..9), 1)))
            .collect();
        let out = left_action_exact(&c, &a, &xi).expect("trivial module stays exact");
        for x in 0..c.space.n_points() {
            // (δ_h ξ)(x) = ξ(h⁻¹x).
            let hx = c
                .space
                .left_translate(k.inv(h_arrow), x)
                .expect("group translation is total");
            assert_eq!(out[x], xi[hx]);
        }
        // δ at the unit acts as the identity.
        let unit = AlgebraElement::delta(&k, k.arrow_index("e").unwrap());
        assert_eq!(left_action_exact(&c, &unit, &xi).unwrap(), xi);
    }

    fn adjoint_fixtures() -> Vec<Correspondence> {
        let z2 = groups::cyclic_group(2);
        let z4 = groups::cyclic_group(4);
        let v = groups::GroupView::new(&z4).unwrap();
        let k_set = v.generated_subgroup(&[v.element_by_id("g2").unwrap()]);
        let k = v.subgroup_groupoid(&k_set).unwrap();
        vec![
            identity_correspondence(&z2, &counting_haar(&z2)).unwrap(),
            identity_correspondence(&z4, &counting_haar(&z4)).unwrap(),
            subgroup_correspondence(
                &z4,
                &counting_haar(&z4),
                &k,
                &counting_haar(&k),
                SubgroupSide::Restriction,
            )
            .unwrap(),
            subgroup_correspondence(
                &z4,
                &counting_haar(&z4),
                &k,
                &counting_haar(&k),
                SubgroupSide::Induction,
            )
            .unwrap(),
            fixtures::delta_toy_correspondence(),
        ]
    }

    #[test]
    fn adjoint_identity_exact_when_module_trivial() {
        for c in adjoint_fixtures() {
            if !c.delta_is_trivial() {
                continue;
            }
            let mut rng = ChaCha8Rng::seed_from_u64(14);
            for _ in 0..20 {
                let a = AlgebraElement::random(&c.h, &mut rng);
                let xi: Vec<CRat> = (0..c.space.n_points())
                    .map(|_| crat(rat(rng.gen_range(-5..5), 2), rat(rng.gen_range(-5..5), 2)))
                    .collect();
                let eta: Vec<CRat> = (0..c.space.n_points())
                    .map(|_| crat(rat(rng.gen_range(-5..5), 2), rat(rng.gen_range(-5..5), 2)))
                    .collect();
                let lhs = cstar_inner_product(
                    &c,
                    &left_action_exact(&c, &a, &xi).expect("exact"),
                    &eta,
                );
                let rhs = cstar_inner_product(
                    &c,
                    &xi,
                    &left_action_exact(&c, &involute(&c.h, &a), &eta).expect("exact"),
                );
                assert_eq!(lhs, rhs);
            }
        }
    }

    #[test]
    fn adjoint_identity_numeric_with_nontrivial_module() {
        let c = fixtures::delta_toy_correspondence();
        let mut rng = ChaCha8Rng::seed_from_u64(15);
        for _ in 0..100 {
            let a: Vec<C64> = (0..c.h.n_arrows()).map(|_| rand_c64(&mut rng)).collect();
            let astar: Vec<C64> = c
                .h
                .arrows()
                .map(|g| a[c.h.inv(g)].conj())
                .collect();
            let xi: Vec<C64> = (0..c.space.n_points()).map(|_| rand_c64(&mut rng)).collect();
            let eta: Vec<C64> = (0..c.space.n_points()).map(|_| rand_c64(&mut rng)).collect();
            let lhs = cstar_inner_product_f64(&c, &left_action_f64(&c, &a, &xi), &eta);
            let rhs = cstar_inner_product_f64(&c, &xi, &left_action_f64(&c, &astar, &eta));
            for (l, r) in lhs.iter().zip(rhs.iter()) {
                assert!((l - r).norm() < 1e-10, "adjoint identity broke: {l} vs {r}");
            }
        }
    }

    #[test]
    fn module_compatibility_on_delta_bases() {
        // ⟨ξf, η⟩ = (⟨η, ξf⟩)* and ⟨ξ, ηf⟩ = ⟨ξ,η⟩ * f, exactly.
        for c in adjoint_fixtures() {
            let n = c.space.n_points();
            for xp in 0..n.min(3) {
                for yp in 0..n.min(3) {
                    let mut xi = vec![crat_zero(); n];
                    xi[xp] = crat_int(1, 0);
                    let mut eta = vec![crat_zero(); n];
                    eta[yp] = crat_int(2, 1);
                    for f_arrow in c.g.arrows() {
                        let f = AlgebraElement::delta(&c.g, f_arrow);
                        let xif = right_module_action(&c, &xi, &f);
                        let lhs = cstar_inner_product(&c, &xif, &eta);
                        let sym = involute(&c.g, &cstar_inner_product(&c, &eta, &xif));
                        assert_eq!(lhs, sym);
                        let etaf = right_module_action(&c, &eta, &f);
                        let lhs2 = cstar_inner_product(&c, &xi, &etaf);
                        let rhs2 = convolve(
                            &c.g,
                            &c.g_haar,
                            &cstar_inner_product(&c, &xi, &eta),
                            &f,
                        );
                        assert_eq!(lhs2, rhs2);
                    }
                }
            }
        }
    }

    #[test]
    fn right_action_is_module_associative() {
        for c in adjoint_fixtures() {
            let mut rng = ChaCha8Rng::seed_from_u64(16);
            let f = AlgebraElement::random(&c.g, &mut rng);
            let h = AlgebraElement::random(&c.g, &mut rng);
            let xi: Vec<CRat> = (0..c.space.n_points())
                .map(|_| crat(rat(rng.gen_range(-5..5), 2), rat(rng.gen_range(-5..5), 2)))
                .collect();
            let lhs = right_module_action(&c, &xi, &convolve(&c.g, &c.g_haar, &f, &h));
            let rhs = right_module_action(&c, &right_module_action(&c, &xi, &f), &h);
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn compose_identity_with_identity() {
        let z2 = groups::cyclic_group(2);
        let haar = counting_haar(&z2);
        let id = identity_correspondence(&z2, &haar).unwrap();
        let (composed, witness) = compose(&id, &id).unwrap();
        let rep = validate_correspondence(&composed);
        assert!(rep.is_ok(), "{:?}", rep.findings);
        // The collapse map [g, x] ↦ g·x certifies the unit law.
        let map: Vec<usize> = (0..composed.space.n_points())
            .map(|z| {
                let ci = z; // class index in sorted order of Z points
                let wp = witness.w_quotient.section[ci];
                let (gp, x) = witness.pairs[witness.sorted_to_pair[wp]];
                let arrow = z2.arrow_index(id.space.point_id(gp)).unwrap();
                id.space.left_translate(arrow, x).unwrap()
            })
            .collect();
        let cert = certify_isomorphism(&composed, &id, &map);
        assert!(cert.is_ok(), "{:?}", cert.findings);
    }

    #[test]
    fn compose_two_equivalences_gives_equivalence() {
        let c1 = fixtures::pair_equivalence(2);
        let c2 = fixtures::pair_equivalence_rev(2);
        let (composed, _) = compose(&c1, &c2).unwrap();
        let rep = validate_correspondence(&composed);
        assert!(rep.is_ok(), "{:?}", rep.findings);
        // Both actions free, both quotients singletons per unit:
        // the composed space is the identity bimodule of pair(2).
        assert_eq!(composed.space.n_points(), 4);
        let idp = identity_correspondence(
            &crate::groupoid::pair_groupoid(2),
            &counting_haar(&crate::groupoid::pair_groupoid(2)),
        )
        .unwrap();
        // Certify through the canonical relabeling of points.
        // Composed points are classes [(xi|xj)] ↦ the arrow (i,j).
        let map: Vec<usize> = (0..4)
            .map(|z| {
                let zid = composed.space.point_id(z);
                let inner = zid.trim_start_matches("[(").trim_end_matches(")]");
                let (xi, xj) = inner.split_once('|').unwrap();
                let i = &xi[1..];
                let j = &xj[1..];
                idp.space.point_index(&format!("({i},{j})")).unwrap()
            })
            .collect();
        let cert = certify_isomorphism(&composed, &idp, &map);
        assert!(cert.is_ok(), "{:?}", cert.findings);
    }

    fn functoriality_check(c1: &Correspondence, c2: &Correspondence, seed: u64, tol: f64) {
        let (composed, witness) = compose(c1, c2).unwrap();
        let repv = validate_correspondence(&composed);
        assert!(repv.is_ok(), "{:?}", repv.findings);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..20 {
            let xi: Vec<C64> = (0..c1.space.n_points()).map(|_| rand_c64(&mut rng)).collect();
            let xi2: Vec<C64> = (0..c1.space.n_points()).map(|_| rand_c64(&mut rng)).collect();
            let eta: Vec<C64> = (0..c2.space.n_points()).map(|_| rand_c64(&mut rng)).collect();
            let eta2: Vec<C64> = (0..c2.space.n_points()).map(|_| rand_c64(&mut rng)).collect();
            // Two-step inner product ⟨η, ⟨ξ,ξ'⟩·η'⟩.
            let f_mid = cstar_inner_product_f64(c1, &xi, &xi2);
            let rhs = cstar_inner_product_f64(c2, &eta, &left_action_f64(c2, &f_mid, &eta2));
            // Through the composition.
            let t1 = elementary_tensor(c1, c2, &witness, &xi, &eta);
            let t2 = elementary_tensor(c1, c2, &witness, &xi2, &eta2);
            let lhs = cstar_inner_product_f64(&composed, &t1, &t2);
            assert_eq!(lhs.len(), rhs.len());
            for (l, r) in lhs.iter().zip(rhs.iter()) {
                assert!(
                    (l - r).norm() < tol,
                    "functoriality broke: {l} vs {r} (diff {})",
                    (l - r).norm()
                );
            }
        }
    }

    #[test]
    fn functoriality_of_inner_products() {
        let z2 = groups::cyclic_group(2);
        let z2_haar = counting_haar(&z2);
        let id2 = identity_correspondence(&z2, &z2_haar).unwrap();
        functoriality_check(&id2, &id2, 21, 1e-9);

        let z4 = groups::cyclic_group(4);
        let z4_haar = counting_haar(&z4);
        let id4 = identity_correspondence(&z4, &z4_haar).unwrap();
        functoriality_check(&id4, &id4, 22, 1e-9);

        // Induction chain Z/4 → Z/2 → trivial.
        let v = groups::GroupView::new(&z4).unwrap();
        let k_set = v.generated_subgroup(&[v.element_by_id("g2").unwrap()]);
        let k = v.subgroup_groupoid(&k_set).unwrap();
        let k_haar = counting_haar(&k);
        let c1 = subgroup_correspondence(&z4, &z4_haar, &k, &k_haar, SubgroupSide::Induction)
            .unwrap();
        let t = groups::cyclic_group(1);
        let t_haar = counting_haar(&t);
        let c2 = subgroup_correspondence(&k, &k_haar, &t, &t_haar, SubgroupSide::Induction)
            .unwrap();
        functoriality_check(&c1, &c2, 23, 1e-9);

        // Non-trivial middle module: point correspondence into Z/2 composed
        // with the weighted toy correspondence out of it.
        let p = fixtures::point_to_z2_correspondence(rat_int(1));
        let toy = fixtures::delta_toy_correspondence();
        functoriality_check(&p, &toy, 24, 1e-9);

        // Equivalence pair.
        functoriality_check(
            &fixtures::pair_equivalence(2),
            &fixtures::pair_equivalence_rev(2),
            25,
            1e-9,
        );
    }

    #[test]
    fn unit_law_on_both_sides() {
        // Id ∘ C ≅ C and C ∘ Id ≅ C for the restriction correspondence.
        let z4 = groups::cyclic_group(4);
        let z4_haar = counting_haar(&z4);
        let v = groups::GroupView::new(&z4).unwrap();
        let k_set = v.generated_subgroup(&[v.element_by_id("g2").unwrap()]);
        let k = v.subgroup_groupoid(&k_set).unwrap();
        let k_haar = counting_haar(&k);
        let c = subgroup_correspondence(&z4, &z4_haar, &k, &k_haar, SubgroupSide::Induction)
            .unwrap();
        let id_left = identity_correspondence(&z4, &z4_haar).unwrap();
        let (lc, lw) = compose(&id_left, &c).unwrap();
        let map: Vec<usize> = (0..lc.space.n_points())
            .map(|z| {
                let wp = lw.w_quotient.section[z];
                let (gp, x) = lw.pairs[lw.sorted_to_pair[wp]];
                let arrow = z4.arrow_index(id_left.space.point_id(gp)).unwrap();
                c.space.left_translate(arrow, x).unwrap()
            })
            .collect();
        let cert = certify_isomorphism(&lc, &c, &map);
        assert!(cert.is_ok(), "left unit law: {:?}", cert.findings);

        let id_right = identity_correspondence(&k, &k_haar).unwrap();
        let (rc, rw) = compose(&c, &id_right).unwrap();
        let map: Vec<usize> = (0..rc.space.n_points())
            .map(|z| {
                let wp = rw.w_quotient.section[z];
                let (x, gp) = rw.pairs[rw.sorted_to_pair[wp]];
                let arrow = k.arrow_index(id_right.space.point_id(gp)).unwrap();
                c.space.right_translate(arrow, x).unwrap()
            })
            .collect();
        let cert = certify_isomorphism(&rc, &c, &map);
        assert!(cert.is_ok(), "right unit law: {:?}", cert.findings);
    }
}
