//! Cocycles on finite groupoids: validation, trivialization over proper
//! groupoids (every finite groupoid is proper) and quotient measures on orbit
//! spaces, all in exact rational arithmetic.
//!
//! Conventions: an additive cocycle is trivialized as c = b∘r − b∘s, a
//! multiplicative one as c = (b∘r)/(b∘s), with b defined on units.

use num::{One, Signed, Zero};
use thiserror::Error;

use crate::groupoid::{FiniteGroupoid, HaarSystem};
use crate::report::ValidationReport;
use crate::scalars::Rat;

#[derive(Debug, Error)]
pub enum CocycleError {
    #[error("not a coboundary; witness arrow `{0}`")]
    NotACoboundary(String),
    #[error("measure is not symmetric; witness arrow `{0}`")]
    NotSymmetric(String),
    #[error("{0}")]
    Malformed(String),
}

/// Multiplicative cocycle identity: positive values, 1 on units,
/// c(ab) = c(a)·c(b) on composable pairs.
pub fn validate_mult_cocycle(g: &FiniteGroupoid, c: &[Rat]) -> ValidationReport {
    let mut rep = ValidationReport::new();
    if c.len() != g.n_arrows() {
        rep.violation("cocycle-missing", "", "one value per arrow required");
        return rep;
    }
    for a in g.arrows() {
        if !c[a].is_positive() {
            rep.violation("cocycle-positivity", g.arrow_id(a), "values must be positive");
        }
    }
    for &u in g.units() {
        if !c[u].is_one() {
            rep.violation("cocycle-unit", g.arrow_id(u), "units must carry the value 1");
        }
    }
    for a in g.arrows() {
        for b in g.arrows() {
            if let Some(ab) = g.compose(a, b) {
                if c[ab] != &c[a] * &c[b] {
                    rep.violation(
                        "cocycle-identity",
                        format!("({},{})", g.arrow_id(a), g.arrow_id(b)),
                        "c(ab) must equal c(a)·c(b)",
                    );
                }
            }
        }
    }
    rep.normalize();
    rep
}

/// Trivializes an additive rational cocycle on a finite groupoid via the
/// canonical cutoff F = 1 / (range-fiber mass):
/// b(x) = Σ_{γ ∈ G^x} F(s(γ)) c(γ) w(γ), then c = b∘r − b∘s is verified on
/// every arrow.
pub fn trivialize_additive(
    g: &FiniteGroupoid,
    haar: &HaarSystem,
    c: &[Rat],
) -> Result<Vec<Rat>, CocycleError> {
    if c.len() != g.n_arrows() {
        return Err(CocycleError::Malformed("one value per arrow".into()));
    }
    // The fiber mass is constant along orbits for an invariant Haar system,
    // so F(s(γ)) = 1 / mass(λ^x) inside the fiber at x.
    let mut b = vec![Rat::zero(); g.n_arrows()];
    for &u in g.units() {
        let mass = haar.fiber_mass(g, u);
        if !mass.is_positive() {
            return Err(CocycleError::Malformed(format!(
                "empty or weightless fiber at `{}`",
                g.arrow_id(u)
            )));
        }
        let mut acc = Rat::zero();
        for gamma in g.range_fiber(u) {
            acc = acc + &c[gamma] * &haar.weights[gamma];
        }
        b[u] = acc / mass;
    }
    for a in g.arrows() {
        let want = &b[g.r(a)] - &b[g.s(a)];
        if want != c[a] {
            return Err(CocycleError::NotACoboundary(g.arrow_id(a).to_string()));
        }
    }
    Ok(g.units().iter().map(|&u| b[u].clone()).collect())
}

/// Trivializes a multiplicative rational cocycle exactly by spanning-tree
/// propagation on each unit orbit: b(root) = 1, b extended along arrows, then
/// c = (b∘r)/(b∘s) verified everywhere.
pub fn trivialize_multiplicative(
    g: &FiniteGroupoid,
    c: &[Rat],
) -> Result<Vec<Rat>, CocycleError> {
    if c.len() != g.n_arrows() {
        return Err(CocycleError::Malformed("one value per arrow".into()));
    }
    let n = g.n_arrows();
    let mut b: Vec<Option<Rat>> = vec![None; n];
    for orbit in g.unit_orbits() {
        let root = *orbit
            .iter()
            .min_by(|&&a, &&x| g.arrow_id(a).cmp(g.arrow_id(x)))
            .expect("orbits are nonempty");
        b[root] = Some(Rat::one());
        let mut frontier = vec![root];
        while let Some(u) = frontier.pop() {
            for a in g.arrows() {
                // c(a) = b(r(a)) / b(s(a)).
                if g.s(a) == u && b[g.r(a)].is_none() {
                    let val = c[a].clone() * b[u].clone().unwrap();
                    b[g.r(a)] = Some(val);
                    frontier.push(g.r(a));
                } else if g.r(a) == u && b[g.s(a)].is_none() {
                    let val = b[u].clone().unwrap() / c[a].clone();
                    b[g.s(a)] = Some(val);
                    frontier.push(g.s(a));
                }
            }
        }
    }
    let b_units: Vec<Rat> = g
        .units()
        .iter()
        .map(|&u| b[u].clone().expect("every unit lies in an orbit"))
        .collect();
    let unit_pos = |u: usize| g.units().iter().position(|&x| x == u).unwrap();
    for a in g.arrows() {
        let want = &b_units[unit_pos(g.r(a))] / &b_units[unit_pos(g.s(a))];
        if want != c[a] {
            return Err(CocycleError::NotACoboundary(g.arrow_id(a).to_string()));
        }
    }
    Ok(b_units)
}

/// A measure on the orbit space of the unit set, together with the orbit
/// bookkeeping needed to evaluate the fiber system of the quotient map.
#[derive(Debug, Clone)]
pub struct QuotientMeasure {
    /// Unit orbits, each sorted by arrow index.
    pub orbits: Vec<Vec<usize>>,
    /// Orbit index per unit position (indexed like `g.units()`).
    pub orbit_of_unit: Vec<usize>,
    /// One weight per orbit.
    pub m: Vec<Rat>,
}

/// Solves μ = m∘λ̇ on the orbit space of a finite groupoid. Requires the
/// symmetry μ(r(γ))w(γ) = μ(s(γ))w(γ⁻¹) on every arrow, and verifies the
/// defining identity of m exactly before returning.
pub fn quotient_measure(
    g: &FiniteGroupoid,
    haar: &HaarSystem,
    mu: &[Rat],
) -> Result<QuotientMeasure, CocycleError> {
    let units = g.units();
    if mu.len() != units.len() {
        return Err(CocycleError::Malformed(
            "one weight per unit required".into(),
        ));
    }
    let unit_pos: std::collections::BTreeMap<usize, usize> =
        units.iter().enumerate().map(|(i, &u)| (u, i)).collect();
    for a in g.arrows() {
        let lhs = &mu[unit_pos[&g.r(a)]] * &haar.weights[a];
        let rhs = &mu[unit_pos[&g.s(a)]] * &haar.weights[g.inv(a)];
        if lhs != rhs {
            return Err(CocycleError::NotSymmetric(g.arrow_id(a).to_string()));
        }
    }
    let orbits = g.unit_orbits();
    let mut orbit_of_unit = vec![0usize; units.len()];
    for (oi, orbit) in orbits.iter().enumerate() {
        for &u in orbit {
            orbit_of_unit[unit_pos[&u]] = oi;
        }
    }
    // m(O) = Σ_{x∈O} μ(x) F(x) with the canonical cutoff F = 1/fiber mass.
    let mut m = Vec::with_capacity(orbits.len());
    for orbit in &orbits {
        let mut acc = Rat::zero();
        for &u in orbit {
            let mass = haar.fiber_mass(g, u);
            if !mass.is_positive() {
                return Err(CocycleError::Malformed(format!(
                    "empty fiber at `{}`",
                    g.arrow_id(u)
                )));
            }
            acc = acc + &mu[unit_pos[&u]] / mass;
        }
        m.push(acc);
    }
    // Verify μ = m∘λ̇: the fiber system of the quotient map evaluated from any
    // base point of the orbit must reproduce μ.
    for (oi, orbit) in orbits.iter().enumerate() {
        for &base in orbit {
            for &z in orbit {
                let mut lam_dot = Rat::zero();
                for gamma in g.range_fiber(base) {
                    if g.s(gamma) == z {
                        lam_dot = lam_dot + &haar.weights[gamma];
                    }
                }
                let want = &m[oi] * &lam_dot;
                if want != mu[unit_pos[&z]] {
                    return Err(CocycleError::NotSymmetric(format!(
                        "quotient identity fails at unit `{}` from base `{}`",
                        g.arrow_id(z),
                        g.arrow_id(base)
                    )));
                }
            }
        }
    }
    Ok(QuotientMeasure {
        orbits,
        orbit_of_unit,
        m,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groupoid::{counting_haar, pair_groupoid};
    use crate::groups;
    use crate::scalars::{rat, rat_int};

    #[test]
    fn zero_cocycle_trivializes_to_zero() {
        let g = pair_groupoid(2);
        let haar = counting_haar(&g);
        let c = vec![Rat::zero(); g.n_arrows()];
        let b = trivialize_additive(&g, &haar, &c).unwrap();
        assert!(b.iter().all(|x| x.is_zero()));
    }

    #[test]
    fn pair_two_coboundary() {
        let g = pair_groupoid(2);
        let haar = counting_haar(&g);
        // c((1,2)) = 1, forced companions by the cocycle identity.
        let mut c = vec![Rat::zero(); g.n_arrows()];
        c[g.arrow_index("(1,2)").unwrap()] = rat_int(1);
        c[g.arrow_index("(2,1)").unwrap()] = rat_int(-1);
        let b = trivialize_additive(&g, &haar, &c).unwrap();
        // b is indexed like g.units(): [(1,1), (2,2)].
        assert_eq!(&b[0] - &b[1], rat_int(1));
    }

    #[test]
    fn isotropy_obstruction_is_reported() {
        // On a group, a nonzero value on a non-unit arrow cannot be a
        // coboundary.
        let z2 = groups::cyclic_group(2);
        let haar = counting_haar(&z2);
        let mut c = vec![Rat::zero(); 2];
        c[z2.arrow_index("g1").unwrap()] = rat_int(1);
        match trivialize_additive(&z2, &haar, &c) {
            Err(CocycleError::NotACoboundary(w)) => assert_eq!(w, "g1"),
            other => panic!("expected NotACoboundary, got {:?}", other),
        }
    }

    #[test]
    fn multiplicative_spanning_tree() {
        let g = pair_groupoid(3);
        // c = (b∘r)/(b∘s) for b = (1, 2, 6).
        let b_true = [rat_int(1), rat_int(2), rat_int(6)];
        let c: Vec<Rat> = g
            .arrows()
            .map(|a| {
                let r = g
                    .units()
                    .iter()
                    .position(|&u| u == g.r(a))
                    .unwrap();
                let s = g
                    .units()
                    .iter()
                    .position(|&u| u == g.s(a))
                    .unwrap();
                &b_true[r] / &b_true[s]
            })
            .collect();
        assert!(validate_mult_cocycle(&g, &c).is_ok());
        let b = trivialize_multiplicative(&g, &c).unwrap();
        // Root gets 1, so b is the true b normalized by b(root).
        assert_eq!(b[0], rat_int(1));
        assert_eq!(b[1], rat_int(2));
        assert_eq!(b[2], rat_int(6));
    }

    #[test]
    fn multiplicative_isotropy_obstruction() {
        let z2 = groups::cyclic_group(2);
        let mut c = vec![rat_int(1); 2];
        c[z2.arrow_index("g1").unwrap()] = rat_int(4);
        assert!(matches!(
            trivialize_multiplicative(&z2, &c),
            Err(CocycleError::NotACoboundary(_))
        ));
    }

    #[test]
    fn quotient_measure_on_trivial_groupoid() {
        // Units only: m = μ.
        let g = crate::groupoid::disjoint_union(&[
            &groups::cyclic_group(1),
            &groups::cyclic_group(1),
        ]);
        let haar = counting_haar(&g);
        let mu = vec![rat_int(3), rat(1, 2)];
        let qm = quotient_measure(&g, &haar, &mu).unwrap();
        assert_eq!(qm.m, mu);
    }

    #[test]
    fn quotient_measure_on_pair_two() {
        // μ = (1,1) with counting weights: the single orbit carries m = 1,
        // because the fiber system λ̇ assigns weight 1 to each unit.
        let g = pair_groupoid(2);
        let haar = counting_haar(&g);
        let mu = vec![rat_int(1), rat_int(1)];
        let qm = quotient_measure(&g, &haar, &mu).unwrap();
        assert_eq!(qm.orbits.len(), 1);
        assert_eq!(qm.m, vec![rat_int(1)]);
    }

    #[test]
    fn asymmetric_measure_is_rejected() {
        let g = pair_groupoid(2);
        let haar = counting_haar(&g);
        let mu = vec![rat_int(1), rat_int(2)];
        match quotient_measure(&g, &haar, &mu) {
            Err(CocycleError::NotSymmetric(w)) => {
                assert!(w.contains("(1,2)") || w.contains("(2,1)"));
            }
            other => panic!("expected NotSymmetric, got {:?}", other),
        }
    }
}
