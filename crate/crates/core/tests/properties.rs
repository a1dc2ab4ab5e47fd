//! Property tests over randomly generated inputs.

use nalgebra::DMatrix;
use proptest::prelude::*;

use vnreg::clustering::{gamma, robust_kmeans, sphere_project, RobustKmeansConfig};
use vnreg::io::{format_edge_list, parse_edge_list};
use vnreg::models::build_contaminated_block_matrix;
use vnreg::nomination::{rank_at_k_curve, NominationList};
use vnreg::regularization::{match_block_matrices, orthogonal_procrustes};
use vnreg::spectral::ase_matrix;
use vnreg::Graph;

fn symmetric_unit(k: usize) -> impl Strategy<Value = DMatrix<f64>> {
    prop::collection::vec(0.0..=1.0f64, k * k).prop_map(move |v| {
        DMatrix::from_fn(k, k, |i, j| if i <= j { v[i * k + j] } else { v[j * k + i] })
    })
}

fn block_and_rates() -> impl Strategy<Value = (DMatrix<f64>, f64, f64)> {
    (1usize..=3).prop_flat_map(|k| (symmetric_unit(k), 0.0..=1.0f64, 0.0..=1.0f64))
}

fn points(max_n: usize, d: usize) -> impl Strategy<Value = DMatrix<f64>> {
    (2..=max_n).prop_flat_map(move |n| {
        prop::collection::vec(-2.0..2.0f64, n * d).prop_map(move |v| DMatrix::from_row_slice(n, d, &v))
    })
}

fn edge_sets() -> impl Strategy<Value = (usize, Vec<(usize, usize)>)> {
    (2usize..25).prop_flat_map(|n| {
        let pair = (0..n, 0..n).prop_filter("no self loops", |(a, b)| a != b);
        (Just(n), prop::collection::vec(pair, 0..60))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn contaminated_matrix_is_a_valid_block_matrix((b, sp, sm) in block_and_rates()) {
        let bc = build_contaminated_block_matrix(&b, sp, sm).unwrap();
        let k = b.nrows();
        prop_assert_eq!(bc.nrows(), 3 * k);
        prop_assert!(bc.iter().all(|v| (0.0..=1.0).contains(v)));
        prop_assert!((&bc - bc.transpose()).abs().max() == 0.0);
        for i in 0..k {
            for j in 0..k {
                // core blocks are untouched, additions only raise and deletions only lower
                prop_assert_eq!(bc[(3 * i, 3 * j)], b[(i, j)]);
                prop_assert!(bc[(3 * i + 1, 3 * j)] >= b[(i, j)]);
                prop_assert!(bc[(3 * i + 2, 3 * j)] <= b[(i, j)]);
            }
        }
    }

    #[test]
    fn exact_contaminated_matrix_always_matches_perfectly((b, sp, sm) in block_and_rates()) {
        let bc = build_contaminated_block_matrix(&b, sp, sm).unwrap();
        let m = match_block_matrices(&b, &bc).unwrap();
        prop_assert!(m.objective < 1e-12);
        for i in 0..b.nrows() {
            for j in 0..b.nrows() {
                prop_assert!((b[(i, j)] - bc[(m.mapping[i], m.mapping[j])]).abs() < 1e-12);
            }
        }
        let mut image = m.mapping.clone();
        image.sort_unstable();
        image.dedup();
        prop_assert_eq!(image.len(), b.nrows());
    }

    #[test]
    fn no_contamination_collapses_to_the_clean_matrix(b in (1usize..=3).prop_flat_map(symmetric_unit)) {
        let bc = build_contaminated_block_matrix(&b, 0.0, 0.0).unwrap();
        for r in 0..bc.nrows() {
            for c in 0..bc.ncols() {
                prop_assert_eq!(bc[(r, c)], b[(r / 3, c / 3)]);
            }
        }
    }

    #[test]
    fn embedding_is_the_best_low_rank_fit(a in (4usize..20).prop_flat_map(symmetric_unit), d in 1usize..4) {
        let emb = ase_matrix(&a, d).unwrap();
        let err = (emb.signature.gram(&emb.x, &emb.x) - &a).norm();
        let mut vals: Vec<f64> = a.clone().symmetric_eigen().eigenvalues.iter().copied().collect();
        vals.sort_by(|x, y| y.abs().total_cmp(&x.abs()));
        let best = vals[d..].iter().map(|v| v * v).sum::<f64>().sqrt();
        prop_assert!(err <= best + 1e-9, "{} > {}", err, best);
        prop_assert_eq!(emb.signature.dim(), d);
    }

    #[test]
    fn procrustes_recovers_a_rotation(x in points(12, 3), angles in prop::array::uniform3(-3.1..3.1f64)) {
        prop_assume!(x.clone().svd(false, false).singular_values.min() > 1e-3);
        let r = nalgebra::Rotation3::from_euler_angles(angles[0], angles[1], angles[2]);
        let rot = DMatrix::from_fn(3, 3, |i, j| r.matrix()[(i, j)]);
        let target = &x * &rot;
        let w = orthogonal_procrustes(&x, &target).unwrap().w;
        prop_assert!((&x * &w - &target).abs().max() < 1e-8);
        prop_assert!((w.transpose() * &w - DMatrix::identity(3, 3)).abs().max() < 1e-10);
    }

    #[test]
    fn robust_model_is_scored_by_its_own_objective(x in points(40, 2), lambda in 0.05..2.0f64, k in 1usize..=3) {
        prop_assume!(k <= x.nrows());
        let cfg = RobustKmeansConfig { restarts: 3, ..RobustKmeansConfig::new(k, lambda) };
        match robust_kmeans(&x, &cfg, 1) {
            Ok(m) => {
                prop_assert!((gamma(&x, &m.centers, &m.assignments, lambda) - m.objective).abs() < 1e-9);
                // every clustered point is within the radius of its own center
                for (i, &l) in m.assignments.iter().enumerate() {
                    if l > 0 {
                        let c = m.centers.row(l - 1);
                        prop_assert!((x.row(i) - c).norm() < lambda + 1e-12);
                    }
                }
                // leaving every point unclustered is never better
                prop_assert!(m.objective <= lambda * x.nrows() as f64 + 1e-12);
            }
            Err(e) => prop_assert!(matches!(e, vnreg::Error::DegenerateClustering(_)), "{}", e),
        }
    }

    #[test]
    fn sphere_projection_gives_unit_rows(x in points(30, 4)) {
        prop_assume!(x.row_iter().all(|r| r.norm() > 1e-9));
        let p = sphere_project(&x).unwrap();
        prop_assert!(p.row_iter().all(|r| (r.norm() - 1.0).abs() < 1e-12));
    }

    #[test]
    fn edge_lists_round_trip((n, edges) in edge_sets()) {
        let g = Graph::from_edges(n, edges.clone()).unwrap();
        let back = parse_edge_list(&format_edge_list(&g), std::path::Path::new("mem")).unwrap();
        prop_assert_eq!(&back, &g);
        prop_assert!(g.is_valid());
        let keep: Vec<usize> = (0..n).step_by(2).collect();
        let sub = g.induced(&keep);
        for (a, &u) in keep.iter().enumerate() {
            for (b, &v) in keep.iter().enumerate() {
                prop_assert_eq!(sub.has_edge(a, b), g.has_edge(u, v));
            }
        }
    }

    #[test]
    fn rank_curves_are_monotone_and_bounded(ranks in prop::collection::vec(prop::collection::vec(0usize..30, 30), 1..10)) {
        // each list ranks a shuffled candidate pool; query q's match is candidate q
        let lists: Vec<NominationList> = ranks
            .iter()
            .enumerate()
            .map(|(q, keys)| {
                let mut order: Vec<usize> = (0..30).collect();
                order.sort_by_key(|&c| (keys[c], c));
                NominationList { queries: vec![q], ranked: order.into_iter().map(|c| (c, 0.0)).collect() }
            })
            .collect();
        let curve = rank_at_k_curve(&lists, Some, 30, 30).unwrap();
        prop_assert!(curve.values.windows(2).all(|w| w[0] <= w[1]));
        prop_assert_eq!(curve.at(30), lists.len() as f64);
        prop_assert!((curve.chance[29] - lists.len() as f64).abs() < 1e-12);
    }
}
