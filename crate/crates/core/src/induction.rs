//! Quasi-invariant measures and their modules, disintegration along
//! equivariant maps, induced measures and Hilbert bundles through a
//! correspondence, and the double-coset decomposition of subgroup induction.

use std::collections::{BTreeMap, BTreeSet};

use num::{One, Signed, Zero};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::action::{semidirect_right, GSpace, Side};
use crate::cocycle::{quotient_measure, trivialize_multiplicative, CocycleError};
use crate::correspondence::{
    subgroup_correspondence, Correspondence, CorrespondenceError, SubgroupSide,
};
use crate::groupoid::{counting_haar, FiniteGroupoid, HaarSystem};
use crate::groups::GroupView;
use crate::matrix::{hermitian_eig, ComplexMatrix, MatrixError, Tolerances};
use crate::report::ValidationReport;
use crate::scalars::{rat_int, rat_sqrt_f64, C64, Rat};

#[derive(Debug, Error)]
pub enum InductionError {
    #[error("measure is not quasi-invariant; witness `{0}`")]
    NotQuasiInvariant(String),
    #[error("base measure is not a pseudo-image; witness `{0}`")]
    NotPseudoImage(String),
    #[error("{0}")]
    Cocycle(#[from] CocycleError),
    #[error("{0}")]
    Correspondence(#[from] CorrespondenceError),
    #[error("{0}")]
    Matrix(#[from] MatrixError),
    #[error("{0}")]
    Action(#[from] crate::action::ActionError),
    #[error("{0}")]
    Groupoid(#[from] crate::groupoid::GroupoidError),
    #[error("malformed: {0}")]
    Malformed(String),
}

/// A nonnegative weight on units together with its Radon–Nikodym module,
/// extended by 1 off the charged arrows so it is a strict cocycle.
#[derive(Debug, Clone)]
pub struct QuasiInvariantMeasure {
    /// Weight per unit position (indexed like `g.units()`).
    pub mu: Vec<Rat>,
    /// Module value per arrow.
    pub modulus: Vec<Rat>,
}

fn unit_positions(g: &FiniteGroupoid) -> BTreeMap<usize, usize> {
    g.units().iter().enumerate().map(|(i, &u)| (u, i)).collect()
}

/// Computes ν = μ∘λ, checks mutual support of ν and its inverse image, and
/// returns Δ_μ(γ) = ν(γ)/ν(γ⁻¹) on charged arrows.
pub fn radon_nikodym_module(
    g: &FiniteGroupoid,
    haar: &HaarSystem,
    mu: &[Rat],
) -> Result<QuasiInvariantMeasure, InductionError> {
    let pos = unit_positions(g);
    if mu.len() != g.units().len() {
        return Err(InductionError::Malformed("one weight per unit".into()));
    }
    if mu.iter().any(|w| w.is_negative()) {
        return Err(InductionError::Malformed("weights must be nonnegative".into()));
    }
    let nu = |a: usize| -> Rat { &mu[pos[&g.r(a)]] * &haar.weights[a] };
    let mut modulus = vec![Rat::one(); g.n_arrows()];
    for a in g.arrows() {
        let forward = nu(a);
        let backward = nu(g.inv(a));
        match (forward.is_positive(), backward.is_positive()) {
            (true, true) => modulus[a] = forward / backward,
            (false, false) => {}
            _ => {
                return Err(InductionError::NotQuasiInvariant(
                    g.arrow_id(a).to_string(),
                ))
            }
        }
    }
    Ok(QuasiInvariantMeasure {
        mu: mu.to_vec(),
        modulus,
    })
}

/// Result of disintegrating ν on X along an equivariant surjection onto Y.
#[derive(Debug, Clone)]
pub struct DisintegrationResult {
    /// ρ per X point: ν(x)/μ(π(x)) on charged fibers.
    pub rho: Vec<Rat>,
    /// Module of the base measure per (arrow, Y-point), charged pairs only.
    pub delta_y: BTreeMap<(usize, usize), Rat>,
    /// δ per (arrow, X-point) on charged pairs: Δ_X/Δ_Y∘π.
    pub delta: BTreeMap<(usize, usize), Rat>,
    /// Module of ν per (arrow, X-point) on charged pairs.
    pub delta_x: BTreeMap<(usize, usize), Rat>,
}

/// Canonical finite disintegration of ν along π with base μ. All three
/// modules are computed pointwise and the compatibility
/// Δ_X(γ,x) = δ(γ,x)·Δ_Y(γ,π(x)) is exact by construction; the recombination
/// direction is what tests verify independently.
pub fn disintegrate(
    g: &FiniteGroupoid,
    haar: &HaarSystem,
    x_space: &GSpace,
    y_space: &GSpace,
    pi: &[usize],
    nu: &[Rat],
    mu: &[Rat],
) -> Result<DisintegrationResult, InductionError> {
    assert_eq!(x_space.side, Side::Left);
    assert_eq!(y_space.side, Side::Left);
    if pi.len() != x_space.n_points() || nu.len() != x_space.n_points() {
        return Err(InductionError::Malformed("π and ν live on X".into()));
    }
    if mu.len() != y_space.n_points() {
        return Err(InductionError::Malformed("μ lives on Y".into()));
    }
    // Equivariance of π.
    for p in x_space.points() {
        if y_space.moment(pi[p]) != x_space.moment(p) {
            return Err(InductionError::Malformed(format!(
                "π does not respect moments at `{}`",
                x_space.point_id(p)
            )));
        }
        for a in x_space.composable_arrows(g, p) {
            if let Some(q) = x_space.translate(a, p) {
                let lhs = pi[q];
                let rhs = y_space.translate(a, pi[p]).ok_or_else(|| {
                    InductionError::Malformed("π target action missing".into())
                })?;
                if lhs != rhs {
                    return Err(InductionError::Malformed(format!(
                        "π not equivariant at ({};{})",
                        g.arrow_id(a),
                        x_space.point_id(p)
                    )));
                }
            }
        }
    }
    // Pseudo-image: fibers charge iff the base point charges.
    for y in y_space.points() {
        let fiber_mass: Rat = (0..x_space.n_points())
            .filter(|&p| pi[p] == y)
            .map(|p| nu[p].clone())
            .fold(Rat::zero(), |acc, w| acc + w);
        if fiber_mass.is_positive() != mu[y].is_positive() {
            return Err(InductionError::NotPseudoImage(
                y_space.point_id(y).to_string(),
            ));
        }
    }
    let mut rho = vec![Rat::zero(); x_space.n_points()];
    for p in x_space.points() {
        if mu[pi[p]].is_positive() {
            rho[p] = &nu[p] / &mu[pi[p]];
        } else if nu[p].is_positive() {
            return Err(InductionError::NotPseudoImage(
                x_space.point_id(p).to_string(),
            ));
        }
    }
    // Pointwise modules on charged pairs; quasi-invariance is enforced on the
    // way.
    let mut delta_x = BTreeMap::new();
    for p in x_space.points() {
        for a in x_space.composable_arrows(g, p) {
            if let Some(q) = x_space.translate(a, p) {
                match (nu[q].is_positive(), nu[p].is_positive()) {
                    (true, true) => {
                        let v = &nu[q] * &haar.weights[a]
                            / (&nu[p] * &haar.weights[g.inv(a)]);
                        delta_x.insert((a, p), v);
                    }
                    (false, false) => {}
                    _ => {
                        return Err(InductionError::NotQuasiInvariant(format!(
                            "({};{})",
                            g.arrow_id(a),
                            x_space.point_id(p)
                        )))
                    }
                }
            }
        }
    }
    let mut delta_y = BTreeMap::new();
    for y in y_space.points() {
        for a in y_space.composable_arrows(g, y) {
            if let Some(q) = y_space.translate(a, y) {
                match (mu[q].is_positive(), mu[y].is_positive()) {
                    (true, true) => {
                        let v = &mu[q] * &haar.weights[a]
                            / (&mu[y] * &haar.weights[g.inv(a)]);
                        delta_y.insert((a, y), v);
                    }
                    (false, false) => {}
                    _ => {
                        return Err(InductionError::NotQuasiInvariant(format!(
                            "({};{})",
                            g.arrow_id(a),
                            y_space.point_id(y)
                        )))
                    }
                }
            }
        }
    }
    let mut delta = BTreeMap::new();
    for (&(a, p), dx) in &delta_x {
        let dy = delta_y
            .get(&(a, pi[p]))
            .expect("charged X pair has a charged base pair");
        delta.insert((a, p), dx / dy);
    }
    Ok(DisintegrationResult {
        rho,
        delta_y,
        delta,
        delta_x,
    })
}

/// Everything produced while pushing a quasi-invariant measure through a
/// correspondence; intermediates are exposed for verification.
#[derive(Debug, Clone)]
pub struct InducedMeasure {
    /// Trivializing function per space point.
    pub b: Vec<Rat>,
    /// Quotient measure per orbit class of X/G.
    pub m: Vec<Rat>,
    /// Induced measure on the units of H with its module.
    pub mu_under: QuasiInvariantMeasure,
    /// ρ per class: m(ẋ)/μ̲(ṙ(ẋ)).
    pub rho: Vec<Rat>,
    /// Module of m per (H-arrow, class), charged pairs.
    pub delta_m: BTreeMap<(usize, usize), Rat>,
    /// δ per (H-arrow, class): Δ_m/Δ_μ̲, charged pairs.
    pub delta: BTreeMap<(usize, usize), Rat>,
}

/// Pushes a quasi-invariant measure of (G, λ) through a correspondence from
/// (H, β) to (G, λ): trivialize the module on X⋊G, take the quotient measure
/// on X/G, then disintegrate along the range map to the units of H.
pub fn induce_measure(
    c: &Correspondence,
    mu_g: &QuasiInvariantMeasure,
) -> Result<InducedMeasure, InductionError> {
    let g = &c.g;
    let g_pos = unit_positions(g);
    // μ∘α on X.
    let m0: Vec<Rat> = (0..c.space.n_points())
        .map(|x| &mu_g.mu[g_pos[&c.space.right_moment(x)]] * &c.alpha[x])
        .collect();
    // Trivialize the pulled-back module on X⋊G: b(xγ) = b(x)·Δ_μ(γ).
    let sd = semidirect_right(g, &c.space.right)?;
    let mut cvals = vec![Rat::one(); sd.groupoid.n_arrows()];
    for (&idx, &(gamma, _x)) in &sd.arrow_pairs {
        cvals[idx] = Rat::one() / &mu_g.modulus[gamma];
    }
    let b_units = trivialize_multiplicative(&sd.groupoid, &cvals)?;
    let sd_unit_pos = unit_positions(&sd.groupoid);
    let b: Vec<Rat> = (0..c.space.n_points())
        .map(|p| b_units[sd_unit_pos[&sd.unit_of_point[p]]].clone())
        .collect();
    // Quotient measure of b·(μ∘α).
    let sd_haar = sd.inherited_haar(&c.g_haar);
    let mut mu_units = vec![Rat::zero(); sd.groupoid.units().len()];
    for p in 0..c.space.n_points() {
        mu_units[sd_unit_pos[&sd.unit_of_point[p]]] = &b[p] * &m0[p];
    }
    let qm = quotient_measure(&sd.groupoid, &sd_haar, &mu_units)?;
    // Align the quotient-measure orbits with the correspondence quotient.
    let mut m = vec![Rat::zero(); c.quotient.n_classes()];
    for (oi, orbit) in qm.orbits.iter().enumerate() {
        let unit_arrow = orbit[0];
        let point = (0..c.space.n_points())
            .find(|&p| sd.unit_of_point[p] == unit_arrow)
            .expect("semidirect unit names a point");
        m[c.quotient.class_of[point]] = qm.m[oi].clone();
    }
    // Module of m over (H, β): Δ_m(h, ẋ) = b(hx̂)/b(x̂) · Δ(h, ẋ), verified to
    // be representative independent and to satisfy the pointwise identity.
    let h_grp = &c.h;
    let mut delta_m: BTreeMap<(usize, usize), Rat> = BTreeMap::new();
    for ci in 0..c.quotient.n_classes() {
        if !m[ci].is_positive() {
            continue;
        }
        for arrow in h_grp.arrows() {
            let mut value: Option<Rat> = None;
            for &x in &c.quotient.classes[ci] {
                if h_grp.s(arrow) != c.space.left_moment(x) {
                    break;
                }
                let hx = match c.space.left_translate(arrow, x) {
                    Some(p) => p,
                    None => continue,
                };
                let v = &b[hx] / &b[x] * c.delta_at(arrow, x);
                match &value {
                    None => value = Some(v),
                    Some(prev) => {
                        if *prev != v {
                            return Err(InductionError::Malformed(format!(
                                "module of m not constant on {}",
                                c.quotient.class_ids[ci]
                            )));
                        }
                    }
                }
            }
            if let Some(v) = value {
                let target_class = c
                    .space
                    .left_translate(arrow, c.quotient.section[ci])
                    .map(|p| c.quotient.class_of[p])
                    .expect("translate of the representative exists");
                if m[target_class].is_positive() {
                    delta_m.insert((arrow, ci), v);
                }
            }
        }
    }
    // Verify the Δ_m-measure identity for m exactly.
    for (&(arrow, ci), v) in &delta_m {
        let rep = c.quotient.section[ci];
        let target = c
            .space
            .left_translate(arrow, rep)
            .map(|p| c.quotient.class_of[p])
            .unwrap();
        let lhs = &m[target] * &c.h_haar.weights[arrow];
        let rhs = v * &m[ci] * &c.h_haar.weights[h_grp.inv(arrow)];
        if lhs != rhs {
            return Err(InductionError::Malformed(format!(
                "m is not a Δ_m-measure at ({};{})",
                h_grp.arrow_id(arrow),
                c.quotient.class_ids[ci]
            )));
        }
    }
    // Pseudo-image on the units of H: the plain pushforward of m.
    let h_pos = unit_positions(h_grp);
    let mut mu_under_raw = vec![Rat::zero(); h_grp.units().len()];
    for ci in 0..c.quotient.n_classes() {
        let u = c.space.left_moment(c.quotient.section[ci]);
        mu_under_raw[h_pos[&u]] = &mu_under_raw[h_pos[&u]] + &m[ci];
    }
    let mu_under = radon_nikodym_module(h_grp, &c.h_haar, &mu_under_raw)?;
    // ρ and δ per class.
    let mut rho = vec![Rat::zero(); c.quotient.n_classes()];
    for ci in 0..c.quotient.n_classes() {
        let u = c.space.left_moment(c.quotient.section[ci]);
        if m[ci].is_positive() {
            rho[ci] = &m[ci] / &mu_under.mu[h_pos[&u]];
        }
    }
    let mut delta = BTreeMap::new();
    for (&(arrow, ci), v) in &delta_m {
        delta.insert((arrow, ci), v / &mu_under.modulus[arrow]);
    }
    Ok(InducedMeasure {
        b,
        m,
        mu_under,
        rho,
        delta_m,
        delta,
    })
}

// ---------------------------------------------------------------------------
// Hilbert bundles and representations
// ---------------------------------------------------------------------------

/// A finite-dimensional Hilbert bundle over the units of a groupoid, with one
/// unitary per arrow.
#[derive(Debug, Clone)]
pub struct HilbertBundle {
    /// Fiber dimension per unit position.
    pub fibers: Vec<usize>,
    /// Unitary per arrow: fiber(s(γ)) → fiber(r(γ)).
    pub unitaries: BTreeMap<usize, ComplexMatrix>,
}

impl HilbertBundle {
    pub fn unitary(&self, arrow: usize) -> &ComplexMatrix {
        &self.unitaries[&arrow]
    }
}

/// A representation: quasi-invariant measure plus a Hilbert bundle.
#[derive(Debug, Clone)]
pub struct Representation {
    pub measure: QuasiInvariantMeasure,
    pub bundle: HilbertBundle,
}

/// Bundle invariants on the charged part: L(unit) = 1, L(γγ') = L(γ)L(γ'),
/// L(γ⁻¹) = L(γ)*, all unitary, to the given tolerance.
pub fn validate_bundle(
    g: &FiniteGroupoid,
    bundle: &HilbertBundle,
    charged: Option<&[bool]>,
    tol: f64,
) -> ValidationReport {
    let mut rep = ValidationReport::new();
    let pos = unit_positions(g);
    let is_on = |a: usize| charged.map_or(true, |c| c[a]);
    for a in g.arrows() {
        if !is_on(a) {
            continue;
        }
        let u = match bundle.unitaries.get(&a) {
            Some(m) => m,
            None => {
                rep.violation("bundle-missing", g.arrow_id(a), "no operator for arrow");
                continue;
            }
        };
        let (dr, ds) = (bundle.fibers[pos[&g.r(a)]], bundle.fibers[pos[&g.s(a)]]);
        if u.rows != dr || u.cols != ds {
            rep.violation(
                "bundle-shape",
                g.arrow_id(a),
                format!("expected {}x{}, found {}x{}", dr, ds, u.rows, u.cols),
            );
            continue;
        }
        let gram = u.adjoint().mul(u);
        if gram.sub(&ComplexMatrix::identity(ds)).max_abs() > tol {
            rep.violation("bundle-unitary", g.arrow_id(a), "operator is not unitary");
        }
        if g.is_unit(a) && u.sub(&ComplexMatrix::identity(ds)).max_abs() > tol {
            rep.violation("bundle-unit", g.arrow_id(a), "unit must act as identity");
        }
        let vi = bundle.unitaries.get(&g.inv(a));
        if let Some(vi) = vi {
            if vi.sub(&u.adjoint()).max_abs() > tol {
                rep.violation(
                    "bundle-adjoint",
                    g.arrow_id(a),
                    "L(γ⁻¹) must be the adjoint of L(γ)",
                );
            }
        }
    }
    for a in g.arrows() {
        for bb in g.arrows() {
            if !is_on(a) || !is_on(bb) {
                continue;
            }
            if let Some(ab) = g.compose(a, bb) {
                let (ua, ub, uab) = (
                    bundle.unitaries.get(&a),
                    bundle.unitaries.get(&bb),
                    bundle.unitaries.get(&ab),
                );
                if let (Some(ua), Some(ub), Some(uab)) = (ua, ub, uab) {
                    if ua.mul(ub).sub(uab).max_abs() > tol {
                        rep.violation(
                            "bundle-multiplicative",
                            format!("({},{})", g.arrow_id(a), g.arrow_id(bb)),
                            "L(γγ') must equal L(γ)L(γ')",
                        );
                    }
                }
            }
        }
    }
    rep.normalize();
    rep
}

pub fn validate_representation(
    g: &FiniteGroupoid,
    r: &Representation,
    tol: f64,
) -> ValidationReport {
    let pos = unit_positions(g);
    let charged: Vec<bool> = g
        .arrows()
        .map(|a| r.measure.mu[pos[&g.r(a)]].is_positive() && r.measure.mu[pos[&g.s(a)]].is_positive())
        .collect();
    validate_bundle(g, &r.bundle, Some(&charged), tol)
}

/// The regular representation of (G, λ): fiber ℓ²(G^u) with left translation.
pub fn regular_representation(
    g: &FiniteGroupoid,
    haar: &HaarSystem,
) -> Result<Representation, InductionError> {
    let mu = vec![Rat::one(); g.units().len()];
    let measure = radon_nikodym_module(g, haar, &mu)?;
    let pos = unit_positions(g);
    let fiber_basis: Vec<Vec<usize>> = g.units().iter().map(|&u| g.range_fiber(u)).collect();
    let fibers: Vec<usize> = fiber_basis.iter().map(|b| b.len()).collect();
    let mut unitaries = BTreeMap::new();
    for gamma in g.arrows() {
        let src = &fiber_basis[pos[&g.s(gamma)]];
        let dst = &fiber_basis[pos[&g.r(gamma)]];
        let mut m = ComplexMatrix::zeros(dst.len(), src.len());
        for (j, &y) in src.iter().enumerate() {
            let gy = g.compose(gamma, y).expect("fiber arrows compose");
            let i = dst.iter().position(|&x| x == gy).unwrap();
            m[(i, j)] = C64::new(1.0, 0.0);
        }
        unitaries.insert(gamma, m);
    }
    Ok(Representation {
        measure,
        bundle: HilbertBundle { fibers, unitaries },
    })
}

/// The trivial one-dimensional representation of a groupoid with counting
/// weights on every unit.
pub fn trivial_representation(
    g: &FiniteGroupoid,
    haar: &HaarSystem,
) -> Result<Representation, InductionError> {
    let mu = vec![Rat::one(); g.units().len()];
    let measure = radon_nikodym_module(g, haar, &mu)?;
    let fibers = vec![1usize; g.units().len()];
    let mut unitaries = BTreeMap::new();
    for a in g.arrows() {
        unitaries.insert(a, ComplexMatrix::identity(1));
    }
    Ok(Representation {
        measure,
        bundle: HilbertBundle { fibers, unitaries },
    })
}

/// The pullback of a bundle over the units of G to a bundle over the
/// semidirect groupoid X⋊G of a right G-space.
pub fn pullback_bundle(
    g: &FiniteGroupoid,
    x: &GSpace,
    sd: &crate::action::SemidirectGroupoid,
    bundle: &HilbertBundle,
) -> HilbertBundle {
    let g_pos = unit_positions(g);
    let sd_pos = unit_positions(&sd.groupoid);
    let mut fibers = vec![0usize; sd.groupoid.units().len()];
    for p in x.points() {
        fibers[sd_pos[&sd.unit_of_point[p]]] = bundle.fibers[g_pos[&x.moment(p)]];
    }
    let mut unitaries = BTreeMap::new();
    for (&idx, &(gamma, _)) in &sd.arrow_pairs {
        unitaries.insert(idx, bundle.unitaries[&gamma].clone());
    }
    HilbertBundle { fibers, unitaries }
}

/// Orthogonal projections onto isotropy-fixed subspaces, fiber by fiber:
/// P_x = |G(x)|⁻¹ Σ L(γ) over the isotropy at x. Returns the projected
/// subbundle (with orthonormal bases) and the projector ranks.
pub struct FixedPointBundle {
    /// Orthonormal basis (columns) of the fixed subspace per unit position.
    pub bases: Vec<ComplexMatrix>,
    pub bundle: HilbertBundle,
}

pub fn fixed_point_projection(
    p_grp: &FiniteGroupoid,
    bundle: &HilbertBundle,
    cfg: &Tolerances,
) -> Result<FixedPointBundle, InductionError> {
    let pos = unit_positions(p_grp);
    let mut bases = Vec::with_capacity(p_grp.units().len());
    for (&u, &_) in p_grp.units().iter().zip(p_grp.units().iter()) {
        let iso = p_grp.isotropy_arrows(u);
        let d = bundle.fibers[pos[&u]];
        let mut proj = ComplexMatrix::zeros(d, d);
        for &a in &iso {
            proj = proj.add(&bundle.unitaries[&a]);
        }
        proj = proj.scale(C64::new(1.0 / iso.len() as f64, 0.0));
        // P must be an orthogonal projection.
        let idem = proj.mul(&proj).sub(&proj).max_abs();
        let herm = proj.hermitian_deviation();
        if idem > 1e-12_f64.max(cfg.compare * 1e-4) || herm > 1e-12_f64.max(cfg.compare * 1e-4) {
            return Err(InductionError::Malformed(format!(
                "isotropy average at `{}` is not an orthogonal projection",
                p_grp.arrow_id(u)
            )));
        }
        let (vals, vecs) = hermitian_eig(&proj, cfg)?;
        let mut cols: Vec<usize> = Vec::new();
        for (k, &v) in vals.iter().enumerate() {
            if v > 0.5 {
                cols.push(k);
            }
        }
        let q = ComplexMatrix::from_fn(d, cols.len(), |i, j| vecs[(i, cols[j])]);
        bases.push(q);
    }
    // Compress the unitaries onto the fixed subspaces; stability of the
    // subbundle makes the compressed maps unitary again.
    let mut fibers = Vec::with_capacity(bases.len());
    for q in &bases {
        fibers.push(q.cols);
    }
    let mut unitaries = BTreeMap::new();
    for a in p_grp.arrows() {
        let qr = &bases[pos_index(p_grp, a, true)];
        let qs = &bases[pos_index(p_grp, a, false)];
        let compressed = qr.adjoint().mul(&bundle.unitaries[&a].mul(qs));
        unitaries.insert(a, compressed);
    }
    let sub = HilbertBundle { fibers, unitaries };
    Ok(FixedPointBundle { bases, bundle: sub })
}

fn pos_index(g: &FiniteGroupoid, arrow: usize, range: bool) -> usize {
    let u = if range { g.r(arrow) } else { g.s(arrow) };
    g.units().iter().position(|&x| x == u).unwrap()
}

/// Induces a representation of (G, λ) to one of (H, β) through the
/// correspondence: pull the bundle back to X, project onto isotropy-fixed
/// vectors, quotient by the right action along the deterministic section, and
/// install the δ-weighted translation operators on the ρ-weighted sums.
pub fn induce_representation(
    c: &Correspondence,
    r: &Representation,
    cfg: &Tolerances,
) -> Result<(Representation, InducedMeasure), InductionError> {
    let g = &c.g;
    let h = &c.h;
    let ind = induce_measure(c, &r.measure)?;
    let sd = semidirect_right(g, &c.space.right)?;
    let pulled = pullback_bundle(g, &c.space.right, &sd, &r.bundle);
    let fixed = fixed_point_projection(&sd.groupoid, &pulled, cfg)?;
    let sd_pos = unit_positions(&sd.groupoid);
    let fixed_basis_of_point =
        |p: usize| -> &ComplexMatrix { &fixed.bases[sd_pos[&sd.unit_of_point[p]]] };
    // Charged classes, grouped by the unit of H they sit over.
    let h_pos = unit_positions(h);
    let n_classes = c.quotient.n_classes();
    let charged: Vec<bool> = (0..n_classes).map(|ci| ind.rho[ci].is_positive()).collect();
    // Layout of the induced fiber at each unit of H: the charged classes over
    // it, in class order, each contributing the fixed subspace at its
    // representative.
    let mut layout: Vec<Vec<usize>> = vec![Vec::new(); h.units().len()];
    for ci in 0..n_classes {
        if charged[ci] {
            let u = c.space.left_moment(c.quotient.section[ci]);
            layout[h_pos[&u]].push(ci);
        }
    }
    let class_dim = |ci: usize| fixed_basis_of_point(c.quotient.section[ci]).cols;
    let fibers: Vec<usize> = layout
        .iter()
        .map(|classes| classes.iter().map(|&ci| class_dim(ci)).sum())
        .collect();
    // Transport from the fixed subspace at any point of a class to the fixed
    // subspace at the class representative.
    let transport_to_rep = |point: usize| -> Result<ComplexMatrix, InductionError> {
        let ci = c.quotient.class_of[point];
        let rep_point = c.quotient.section[ci];
        // Find γ with rep·γ = point.
        let gamma = g
            .arrows()
            .find(|&gm| c.space.right_translate(gm, rep_point) == Some(point))
            .ok_or_else(|| {
                InductionError::Malformed("no arrow joins the representative".into())
            })?;
        // L(γ) maps fiber(point) = fiber(rep·γ) to fiber(rep).
        let q_rep = fixed_basis_of_point(rep_point);
        let q_pt = fixed_basis_of_point(point);
        Ok(q_rep.adjoint().mul(&r.bundle.unitaries[&gamma].mul(q_pt)))
    };
    let mut unitaries = BTreeMap::new();
    for arrow in h.arrows() {
        let ur = h_pos[&h.r(arrow)];
        let us = h_pos[&h.s(arrow)];
        let mut mat = ComplexMatrix::zeros(fibers[ur], fibers[us]);
        // Row offset per class in the range fiber; column offsets in source.
        let offsets = |classes: &Vec<usize>| -> BTreeMap<usize, usize> {
            let mut off = BTreeMap::new();
            let mut acc = 0usize;
            for &ci in classes {
                off.insert(ci, acc);
                acc += class_dim(ci);
            }
            off
        };
        let row_off = offsets(&layout[ur]);
        let col_off = offsets(&layout[us]);
        for &ci in &layout[ur] {
            // (L(h)ξ)(ẋ) = δ^{1/2}(h⁻¹, ẋ) · h·ξ(h⁻¹ẋ).
            let rep_point = c.quotient.section[ci];
            let hinv = h.inv(arrow);
            if h.s(hinv) != c.space.left_moment(rep_point) {
                continue;
            }
            let source_rep = match c.space.left_translate(hinv, rep_point) {
                Some(p) => p,
                None => continue,
            };
            let cj = c.quotient.class_of[source_rep];
            if !charged[cj] {
                continue;
            }
            let delta_val = ind
                .delta
                .get(&(hinv, ci))
                .cloned()
                .unwrap_or_else(Rat::one);
            // The class value ξ(h⁻¹ẋ) lives at the representative of cj; act
            // by h on that representative and transport back to rep(ci).
            let cj_rep = c.quotient.section[cj];
            let moved = c
                .space
                .left_translate(arrow, cj_rep)
                .expect("h maps the source representative into the range class");
            debug_assert_eq!(c.quotient.class_of[moved], ci);
            let t = transport_to_rep(moved)?;
            // The left action leaves the fiber data untouched (h·(x,ξ)=(hx,ξ)),
            // so the block is δ^{1/2}·√(ρ(ẋ)/ρ(h⁻¹ẋ))·T in the weighted basis.
            let scale = rat_sqrt_f64(&delta_val)
                * (rat_sqrt_f64(&ind.rho[ci]) / rat_sqrt_f64(&ind.rho[cj]));
            let block = t.scale(C64::new(scale, 0.0));
            let ro = row_off[&ci];
            let co = col_off[&cj];
            for i in 0..block.rows {
                for j in 0..block.cols {
                    mat[(ro + i, co + j)] = block[(i, j)];
                }
            }
        }
        unitaries.insert(arrow, mat);
    }
    let rep = Representation {
        measure: ind.mu_under.clone(),
        bundle: HilbertBundle { fibers, unitaries },
    };
    Ok((rep, ind))
}

// ---------------------------------------------------------------------------
// Characters and the double-coset decomposition
// ---------------------------------------------------------------------------

/// Character of a one-unit (group) representation.
pub fn character(g: &FiniteGroupoid, r: &Representation) -> Vec<C64> {
    g.arrows().map(|a| r.bundle.unitaries[&a].trace()).collect()
}

pub fn rep_dimension(r: &Representation) -> usize {
    r.bundle.fibers.iter().sum()
}

/// Block-diagonal direct sum of group representations over the same group.
pub fn direct_sum(g: &FiniteGroupoid, parts: &[&Representation]) -> Representation {
    let dim: usize = parts.iter().map(|r| rep_dimension(r)).sum();
    let mut unitaries = BTreeMap::new();
    for a in g.arrows() {
        let mut m = ComplexMatrix::zeros(dim, dim);
        let mut off = 0usize;
        for r in parts {
            let u = &r.bundle.unitaries[&a];
            for i in 0..u.rows {
                for j in 0..u.cols {
                    m[(off + i, off + j)] = u[(i, j)];
                }
            }
            off += u.rows;
        }
        unitaries.insert(a, m);
    }
    Representation {
        measure: QuasiInvariantMeasure {
            mu: vec![Rat::one()],
            modulus: vec![Rat::one(); g.n_arrows()],
        },
        bundle: HilbertBundle {
            fibers: vec![dim],
            unitaries,
        },
    }
}

/// Unitary equivalence of group representations, certified by equal
/// characters plus an explicit intertwiner built by averaging.
pub fn unitarily_equivalent(
    g: &FiniteGroupoid,
    a: &Representation,
    b: &Representation,
    cfg: &Tolerances,
) -> Result<bool, InductionError> {
    if rep_dimension(a) != rep_dimension(b) {
        return Ok(false);
    }
    let ca = character(g, a);
    let cb = character(g, b);
    if ca
        .iter()
        .zip(cb.iter())
        .any(|(x, y)| (x - y).norm() > 1e-10 * x.norm().max(1.0))
    {
        return Ok(false);
    }
    // T = |G|⁻¹ Σ_h A(h) C B(h)⁻¹ intertwines for any C; a seeded random C
    // makes T invertible when the representations are equivalent.
    let d = rep_dimension(a);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0xA5A5);
    let entries: Vec<C64> = (0..d * d)
        .map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    let c_probe = ComplexMatrix {
        rows: d,
        cols: d,
        data: entries,
    };
    let mut t = ComplexMatrix::zeros(d, d);
    for arrow in g.arrows() {
        let ua = &a.bundle.unitaries[&arrow];
        let ub_inv = b.bundle.unitaries[&g.inv(arrow)].clone();
        t = t.add(&ua.mul(&c_probe).mul(&ub_inv));
    }
    t = t.scale(C64::new(1.0 / g.n_arrows() as f64, 0.0));
    // Residual of the intertwining property.
    for arrow in g.arrows() {
        let lhs = a.bundle.unitaries[&arrow].mul(&t);
        let rhs = t.mul(&b.bundle.unitaries[&arrow]);
        if lhs.sub(&rhs).max_abs() > 1e-8 * t.max_abs().max(1.0) {
            return Ok(false);
        }
    }
    // Invertibility via the smallest eigenvalue of T*T.
    let gram = t.adjoint().mul(&t);
    let evs = crate::matrix::hermitian_spectrum(&gram, cfg)?;
    Ok(evs.first().copied().unwrap_or(0.0) > 1e-10 * evs.last().copied().unwrap_or(1.0))
}

/// One Mackey summand: the double coset, the intersection subgroup, and the
/// induced representation of H₁.
pub struct MackeySummand {
    pub coset_rep: String,
    pub coset_size: usize,
    pub intersection_order: usize,
    pub rep: Representation,
}

pub struct MackeyDecomposition {
    pub summands: Vec<MackeySummand>,
    /// The representation induced through the full bispace X = G.
    pub full: Representation,
}

/// Correspondence from H₁ to H₂ (both subgroups of a finite group G) carried
/// by X = G with counting weights and trivial module.
pub fn double_subgroup_correspondence(
    g: &FiniteGroupoid,
    h1: &FiniteGroupoid,
    h2: &FiniteGroupoid,
) -> Result<Correspondence, CorrespondenceError> {
    use crate::correspondence::BiSpace;
    let point_ids: Vec<String> = g.arrows().map(|a| g.arrow_id(a).to_string()).collect();
    let mut left_moment = BTreeMap::new();
    let mut right_moment = BTreeMap::new();
    for id in &point_ids {
        left_moment.insert(id.clone(), h1.arrow_id(h1.units()[0]).to_string());
        right_moment.insert(id.clone(), h2.arrow_id(h2.units()[0]).to_string());
    }
    let mut left_triples = Vec::new();
    let mut right_triples = Vec::new();
    for x in g.arrows() {
        for a in h1.arrows() {
            let ax = g
                .compose(g.arrow_index(h1.arrow_id(a)).unwrap(), x)
                .unwrap();
            left_triples.push((
                h1.arrow_id(a).to_string(),
                g.arrow_id(x).to_string(),
                g.arrow_id(ax).to_string(),
            ));
        }
        for b in h2.arrows() {
            let xb = g
                .compose(x, g.arrow_index(h2.arrow_id(b)).unwrap())
                .unwrap();
            right_triples.push((
                h2.arrow_id(b).to_string(),
                g.arrow_id(x).to_string(),
                g.arrow_id(xb).to_string(),
            ));
        }
    }
    let left = GSpace::new(Side::Left, h1, point_ids.clone(), &left_moment, &left_triples)?;
    let right = GSpace::new(Side::Right, h2, point_ids, &right_moment, &right_triples)?;
    let space = BiSpace::new(left, right)?;
    let alpha: Vec<Rat> = (0..space.n_points()).map(|_| rat_int(1)).collect();
    Correspondence::new(
        h1.clone(),
        counting_haar(h1),
        h2.clone(),
        counting_haar(h2),
        space,
        alpha,
        &|_, _| Rat::one(),
    )
}

/// Decomposes the H₁-restriction of a representation induced from H₂ over the
/// double cosets H₁\G/H₂: each coset H₁xH₂ contributes the representation
/// induced from H₁ ∩ xH₂x⁻¹ acting through L(x⁻¹·x).
pub fn mackey_decompose(
    g: &FiniteGroupoid,
    h1_ids: &[&str],
    h2_ids: &[&str],
    r_h2: &Representation,
    cfg: &Tolerances,
) -> Result<MackeyDecomposition, InductionError> {
    let view = GroupView::new(g)?;
    let resolve = |ids: &[&str]| -> Result<BTreeSet<usize>, InductionError> {
        ids.iter()
            .map(|id| {
                view.element_by_id(id)
                    .ok_or_else(|| InductionError::Malformed(format!("unknown element `{id}`")))
            })
            .collect()
    };
    let h1_set = resolve(h1_ids)?;
    let h2_set = resolve(h2_ids)?;
    let h1 = view.subgroup_groupoid(&h1_set)?;
    let h2 = view.subgroup_groupoid(&h2_set)?;
    let mut summands = Vec::new();
    for coset in view.double_cosets(&h1_set, &h2_set) {
        let x = *coset
            .iter()
            .min_by(|&&a, &&b| g.arrow_id(a).cmp(g.arrow_id(b)))
            .unwrap();
        // S = H₁ ∩ x H₂ x⁻¹.
        let conj = view.conjugate_subgroup(&h2_set, x);
        let s_set: BTreeSet<usize> = h1_set.intersection(&conj).copied().collect();
        let s_grp = view.subgroup_groupoid(&s_set)?;
        // Representation of S on the fiber of r_h2: L^x(s) = L(x⁻¹ s x).
        let xi = view.inv(x);
        let mut unitaries = BTreeMap::new();
        for a in s_grp.arrows() {
            let amb = view.element_by_id(s_grp.arrow_id(a)).unwrap();
            let conj_elem = view.mul(view.mul(xi, amb), x);
            let in_h2 = h2
                .arrow_index(g.arrow_id(conj_elem))
                .expect("x⁻¹sx lies in H₂");
            unitaries.insert(a, r_h2.bundle.unitaries[&in_h2].clone());
        }
        let s_rep = Representation {
            measure: QuasiInvariantMeasure {
                mu: vec![Rat::one()],
                modulus: vec![Rat::one(); s_grp.n_arrows()],
            },
            bundle: HilbertBundle {
                fibers: vec![r_h2.bundle.fibers[0]],
                unitaries,
            },
        };
        let c = subgroup_correspondence(
            &h1,
            &counting_haar(&h1),
            &s_grp,
            &counting_haar(&s_grp),
            SubgroupSide::Induction,
        )?;
        let (ind, _) = induce_representation(&c, &s_rep, cfg)?;
        summands.push(MackeySummand {
            coset_rep: g.arrow_id(x).to_string(),
            coset_size: coset.len(),
            intersection_order: s_set.len(),
            rep: ind,
        });
    }
    let c_full = double_subgroup_correspondence(g, &h1, &h2)?;
    let (full, _) = induce_representation(&c_full, r_h2, cfg)?;
    Ok(MackeyDecomposition { summands, full })
}
