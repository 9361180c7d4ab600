//! The shared fixture zoo: small groupoids, actions and correspondences used
//! by unit tests, the acceptance suite and `selftest`.

use std::collections::BTreeMap;

use crate::action::{GSpace, Side};
use crate::correspondence::{BiSpace, Correspondence};
use crate::groupoid::{counting_haar, FiniteGroupoid};
use crate::groups;
use crate::scalars::{rat, rat_int, Rat};

/// Z/2 acting on {-1, 0, 1} by negation (left action; 0 is fixed).
pub fn z2_negation_action() -> (FiniteGroupoid, GSpace) {
    let g = groups::cyclic_group(2);
    let points = vec!["-1".to_string(), "0".to_string(), "1".to_string()];
    let mut moment = BTreeMap::new();
    for p in &points {
        moment.insert(p.clone(), "e".to_string());
    }
    let mut triples = Vec::new();
    for p in ["-1", "0", "1"] {
        triples.push(("e".to_string(), p.to_string(), p.to_string()));
    }
    triples.push(("g1".to_string(), "-1".to_string(), "1".to_string()));
    triples.push(("g1".to_string(), "0".to_string(), "0".to_string()));
    triples.push(("g1".to_string(), "1".to_string(), "-1".to_string()));
    let x = GSpace::new(Side::Left, &g, points, &moment, &triples).expect("fixture is well formed");
    (g, x)
}

/// The weight (2,1,1) on (-1,0,1): quasi-invariant for the negation action
/// with a non-trivial module.
pub fn weighted_negation_measure(x: &GSpace) -> Vec<Rat> {
    let mut mu = vec![rat_int(1); x.n_points()];
    mu[x.point_index("-1").unwrap()] = rat_int(2);
    mu
}

/// The module cocycle matching `weighted_negation_measure`: value at (g1, x).
pub fn weighted_negation_delta(_x: &GSpace) -> BTreeMap<(String, String), Rat> {
    let mut d = BTreeMap::new();
    for p in ["-1", "0", "1"] {
        d.insert(("e".to_string(), p.to_string()), rat_int(1));
    }
    d.insert(("g1".to_string(), "1".to_string()), rat_int(2));
    d.insert(("g1".to_string(), "-1".to_string()), rat(1, 2));
    d.insert(("g1".to_string(), "0".to_string()), rat_int(1));
    d
}

/// Left coset space G/K as a left G-space; points are labelled by the
/// lexicographically smallest coset member, `"{id}K"`.
pub fn coset_space(g: &FiniteGroupoid, k_ids: &[&str]) -> GSpace {
    let view = groups::GroupView::new(g).expect("coset_space expects a group");
    let k: std::collections::BTreeSet<usize> = k_ids
        .iter()
        .map(|id| view.element_by_id(id).expect("subgroup element id"))
        .collect();
    assert!(view.is_subgroup(&k), "not a subgroup");
    let cosets = view.left_cosets(&k);
    let label = |c: &std::collections::BTreeSet<usize>| -> String {
        let rep = c
            .iter()
            .map(|&a| g.arrow_id(a))
            .min()
            .unwrap();
        format!("{rep}K")
    };
    let points: Vec<String> = cosets.iter().map(&label).collect();
    let mut member_to_class: BTreeMap<usize, usize> = BTreeMap::new();
    for (ci, c) in cosets.iter().enumerate() {
        for &m in c {
            member_to_class.insert(m, ci);
        }
    }
    let mut moment = BTreeMap::new();
    for p in &points {
        moment.insert(p.clone(), g.arrow_id(view.unit).to_string());
    }
    let mut triples = Vec::new();
    for a in view.elements() {
        for (ci, c) in cosets.iter().enumerate() {
            let rep = *c.iter().next().unwrap();
            let target = member_to_class[&view.mul(a, rep)];
            triples.push((
                g.arrow_id(a).to_string(),
                points[ci].clone(),
                points[target].clone(),
            ));
        }
    }
    GSpace::new(Side::Left, g, points, &moment, &triples).expect("coset space is well formed")
}

/// Correspondence from Z/2 to the trivial group carried by {-1,0,1} with the
/// weighted α = (2,1,1) and its forced non-trivial module.
pub fn delta_toy_correspondence() -> Correspondence {
    let h = groups::cyclic_group(2);
    let h_haar = counting_haar(&h);
    let t = groups::cyclic_group(1);
    let t_haar = counting_haar(&t);
    let (_, left) = z2_negation_action();
    let points: Vec<String> = (0..left.n_points())
        .map(|p| left.point_id(p).to_string())
        .collect();
    let mut moment = BTreeMap::new();
    for p in &points {
        moment.insert(p.clone(), "e".to_string());
    }
    let triples: Vec<(String, String, String)> = points
        .iter()
        .map(|p| ("e".to_string(), p.clone(), p.clone()))
        .collect();
    let right = GSpace::new(Side::Right, &t, points, &moment, &triples).unwrap();
    let space = BiSpace::new(left, right).unwrap();
    let alpha = weighted_negation_measure(&space.left);
    let table = weighted_negation_delta(&space.left);
    let h_clone = h.clone();
    let delta_fn = move |arrow: usize, point: usize| -> Rat {
        table[&(
            h_clone.arrow_id(arrow).to_string(),
            space_point_name(point),
        )]
            .clone()
    };
    // Point ids sorted: "-1", "0", "1".
    fn space_point_name(p: usize) -> String {
        ["-1", "0", "1"][p].to_string()
    }
    Correspondence::new(h, h_haar, t, t_haar, space, alpha, &delta_fn)
        .expect("toy correspondence is well formed")
}

/// Equivalence from pair(n) to the trivial group: X = n points.
pub fn pair_equivalence(n: usize) -> Correspondence {
    let g = crate::groupoid::pair_groupoid(n);
    let g_haar = counting_haar(&g);
    let t = groups::cyclic_group(1);
    let t_haar = counting_haar(&t);
    let points: Vec<String> = (1..=n).map(|i| format!("x{i}")).collect();
    let mut left_moment = BTreeMap::new();
    let mut right_moment = BTreeMap::new();
    for (i, p) in points.iter().enumerate() {
        left_moment.insert(p.clone(), format!("({},{})", i + 1, i + 1));
        right_moment.insert(p.clone(), "e".to_string());
    }
    let mut left_triples = Vec::new();
    for i in 1..=n {
        for j in 1..=n {
            left_triples.push((format!("({i},{j})"), format!("x{j}"), format!("x{i}")));
        }
    }
    let right_triples: Vec<(String, String, String)> = points
        .iter()
        .map(|p| ("e".to_string(), p.clone(), p.clone()))
        .collect();
    let left = GSpace::new(Side::Left, &g, points.clone(), &left_moment, &left_triples).unwrap();
    let right = GSpace::new(Side::Right, &t, points, &right_moment, &right_triples).unwrap();
    let space = BiSpace::new(left, right).unwrap();
    let alpha = vec![rat_int(1); n];
    Correspondence::new(g, g_haar, t, t_haar, space, alpha, &|_, _| rat_int(1))
        .expect("pair equivalence is well formed")
}

/// The reverse equivalence, from the trivial group to pair(n).
pub fn pair_equivalence_rev(n: usize) -> Correspondence {
    let g = crate::groupoid::pair_groupoid(n);
    let g_haar = counting_haar(&g);
    let t = groups::cyclic_group(1);
    let t_haar = counting_haar(&t);
    let points: Vec<String> = (1..=n).map(|i| format!("x{i}")).collect();
    let mut left_moment = BTreeMap::new();
    let mut right_moment = BTreeMap::new();
    for (i, p) in points.iter().enumerate() {
        left_moment.insert(p.clone(), "e".to_string());
        right_moment.insert(p.clone(), format!("({},{})", i + 1, i + 1));
    }
    let left_triples: Vec<(String, String, String)> = points
        .iter()
        .map(|p| ("e".to_string(), p.clone(), p.clone()))
        .collect();
    let mut right_triples = Vec::new();
    for i in 1..=n {
        for j in 1..=n {
            // x_i · (i,j) = x_j  (the arrow (i,j) has range i, source j).
            right_triples.push((format!("({i},{j})"), format!("x{i}"), format!("x{j}")));
        }
    }
    let left = GSpace::new(Side::Left, &t, points.clone(), &left_moment, &left_triples).unwrap();
    let right = GSpace::new(Side::Right, &g, points, &right_moment, &right_triples).unwrap();
    let space = BiSpace::new(left, right).unwrap();
    let alpha = vec![rat_int(1); n];
    Correspondence::new(t, t_haar, g, g_haar, space, alpha, &|_, _| rat_int(1))
        .expect("reverse pair equivalence is well formed")
}

/// Correspondence from the trivial group to Z/2 carried by a single point
/// with weight `a` (the right Z/2-action is necessarily trivial).
pub fn point_to_z2_correspondence(a: Rat) -> Correspondence {
    let t = groups::cyclic_group(1);
    let t_haar = counting_haar(&t);
    let z2 = groups::cyclic_group(2);
    let z2_haar = counting_haar(&z2);
    let points = vec!["pt".to_string()];
    let mut left_moment = BTreeMap::new();
    left_moment.insert("pt".to_string(), "e".to_string());
    let mut right_moment = BTreeMap::new();
    right_moment.insert("pt".to_string(), "e".to_string());
    let left_triples = vec![("e".to_string(), "pt".to_string(), "pt".to_string())];
    let right_triples = vec![
        ("e".to_string(), "pt".to_string(), "pt".to_string()),
        ("g1".to_string(), "pt".to_string(), "pt".to_string()),
    ];
    let left = GSpace::new(Side::Left, &t, points.clone(), &left_moment, &left_triples).unwrap();
    let right = GSpace::new(Side::Right, &z2, points, &right_moment, &right_triples).unwrap();
    let space = BiSpace::new(left, right).unwrap();
    Correspondence::new(t, t_haar, z2, z2_haar, space, vec![a], &|_, _| rat_int(1))
        .expect("point correspondence is well formed")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coset_space_of_s3() {
        let s3 = groups::symmetric_group(3);
        let x = coset_space(&s3, &["e", "g102"]);
        assert_eq!(x.n_points(), 3);
        let rep = crate::action::validate_action(&s3, &x);
        assert!(rep.is_ok(), "{:?}", rep.findings);
    }
}
