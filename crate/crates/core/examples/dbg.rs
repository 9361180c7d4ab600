use gpd_core::algebra::*;
use gpd_core::groupoid::*;
use gpd_core::groups;
use gpd_core::matrix::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() {
    let cfg = Tolerances::default();
    let fixtures: Vec<(FiniteGroupoid, HaarSystem)> = vec![
        (groups::cyclic_group(2), ()),
        (groups::cyclic_group(4), ()),
        (groups::symmetric_group(3), ()),
        (pair_groupoid(2), ()),
        (pair_groupoid(3), ()),
    ]
    .into_iter()
    .map(|(g, _)| {
        let h = counting_haar(&g);
        (g, h)
    })
    .collect();
    for (gi, (g, haar)) in fixtures.iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for k in 0..10 {
            let f = AlgebraElement::random(&g, &mut rng);
            let r = reduced_norm(&g, &haar, &f, &cfg).unwrap();
            let ff = convolve(&g, &haar, &involute(&g, &f), &f);
            let rff = reduced_norm(&g, &haar, &ff, &cfg).unwrap();
            if (rff - r * r).abs() > 1e-8 * (r * r).max(1.0) {
                println!("fixture {} elem {}: rff={} r^2={}", gi, k, rff, r * r);
                for &u in g.units() {
                    let m = regular_rep_matrix(&g, &haar, &f, u);
                    let pn = operator_norm(&m, &cfg).unwrap();
                    let a = m.adjoint().mul(&m);
                    let ev = hermitian_spectrum(&a, &cfg).unwrap();
                    let jn = ev.last().unwrap().max(0.0).sqrt();
                    println!("  unit {}: power={} jacobi={}", u, pn, jn);
                }
            }
        }
    }
    println!("done");
}
