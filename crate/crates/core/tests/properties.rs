use proptest::prelude::*;

use scbec::channel::{residual_graph, transmit, ResidualGraph};
use scbec::decoders::{bp, find_stopping_sets, ppd, spd};
use scbec::density_evolution::{run_de, DeModel, DeOptions};
use scbec::ensemble::{build_coupled_base, lift, CoupledEnsembleSpec};
use scbec::graph_evolution::{expected_step, initial_dd, GeModel};

fn residual_strategy() -> impl Strategy<Value = ResidualGraph> {
    (1usize..14, 1usize..12).prop_flat_map(|(v, c)| {
        proptest::collection::btree_set((0..v as u32, 0..c as u32), 0..(v * c).min(40))
            .prop_map(move |edges| ResidualGraph::from_edges(v, c, &edges.into_iter().collect::<Vec<_>>()).unwrap())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn ppd_and_bp_resolve_the_same_sets(r in residual_strategy()) {
        let p = ppd(&r);
        let b = bp(&r, 10_000);
        prop_assert_eq!(p.resolved_sets(), b.resolved_sets());
        prop_assert_eq!(&p.remaining, &b.remaining);
        prop_assert!(p.upper_bound_holds() && b.upper_bound_holds());
    }

    #[test]
    fn spd_reaches_the_ppd_fixed_point(r in residual_strategy(), seed in any::<u64>()) {
        let p = ppd(&r);
        let s = spd(&r, seed);
        prop_assert_eq!(&s.remaining, &p.remaining);
        // one VN per iteration
        prop_assert!(s.iterations.iter().all(|it| it.resolved.len() <= 1));
        let report = find_stopping_sets(&r);
        prop_assert_eq!(&report.vns, &p.remaining);
        prop_assert!(report.verify(&r));
    }

    #[test]
    fn lifting_preserves_degrees(l in 2usize..5, k in 2usize..4, len in 1usize..6, n in 1usize..8, seed in any::<u64>()) {
        let spec = CoupledEnsembleSpec::protograph(l, l * k, len).unwrap();
        let base = build_coupled_base(&spec).unwrap();
        let g = lift(&base, n, seed).unwrap();
        let rows = base.row_sums();
        prop_assert_eq!(g.vn_count(), n * base.col_count());
        prop_assert!((0..g.vn_count()).all(|v| g.vn_degree(v) == l));
        prop_assert!((0..g.cn_count()).all(|c| g.cn_degree(c) == rows[g.cn_type(c) as usize] as usize));
    }

    #[test]
    fn residual_keeps_only_erased_vns(seed in any::<u64>(), eps in 0.0f64..1.0) {
        let spec = CoupledEnsembleSpec::protograph(3, 6, 4).unwrap();
        let g = lift(&build_coupled_base(&spec).unwrap(), 4, seed).unwrap();
        let pattern = transmit(g.vn_count(), eps, seed ^ 1).unwrap();
        let r = residual_graph(&g, &pattern).unwrap();
        prop_assert_eq!(r.vn_count(), pattern.erased_count());
        prop_assert_eq!(r.vn_ids().to_vec(), pattern.erased_indices());
        prop_assert_eq!(r.edge_count(), 3 * pattern.erased_count());
    }

    #[test]
    fn graph_evolution_conserves_edges(eps in 0.05f64..0.6) {
        let model = GeModel::from_spec(&CoupledEnsembleSpec::protograph(3, 6, 4).unwrap()).unwrap();
        let mut dd = initial_dd(&model, eps).unwrap();
        for _ in 0..30 {
            let next = expected_step(&model, &dd).unwrap();
            prop_assert!(next.edge_conservation_error(&model) < 1e-9);
            prop_assert!(next.unresolved_mass() <= dd.unresolved_mass() + 1e-12);
            dd = next;
        }
    }

    #[test]
    fn density_evolution_is_monotone_in_the_channel(a in 0.3f64..0.6, b in 0.3f64..0.6) {
        let model = DeModel::from_spec(&CoupledEnsembleSpec::protograph(3, 6, 6).unwrap()).unwrap();
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        let opts = DeOptions { max_iters: 40, ..DeOptions::default() };
        let tl = run_de(&model, lo, opts).unwrap();
        let th = run_de(&model, hi, opts).unwrap();
        for l in 0..tl.eps.len().min(th.eps.len()) {
            prop_assert!(tl.eps[l] <= th.eps[l] + 1e-12);
        }
    }
}
