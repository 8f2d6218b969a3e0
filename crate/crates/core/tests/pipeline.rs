use quasirand::clustering::{k_variance, match_partitions, KMeansParams, VarianceKind};
use quasirand::discrepancy::{partition_discrepancy_exact, partition_discrepancy_heuristic, HeuristicParams};
use quasirand::generator::{balancing_report, sample, SampleSidecar, SampleSpec};
use quasirand::spectra::{spectrum_vs_model, SpectralParams, SpectralSummary};
use quasirand::verify::{classify_structure, rate_sweep, Analysis, RateMetric, Structure};
use quasirand::{ModelGraph, Partition, WeightedGraph};

fn assortative() -> ModelGraph {
    ModelGraph::from_rows(vec![0.5, 0.5], &[vec![0.8, 0.1], vec![0.1, 0.7]]).unwrap()
}

#[test]
fn disassortative_model_is_anticommunity() {
    let h = ModelGraph::from_rows(vec![0.5, 0.5], &[vec![0.1, 0.8], vec![0.8, 0.1]]).unwrap();
    let expected = h.model_spectrum().unwrap().structural_values[0];
    assert!((expected - (0.1 - 0.8) / 0.9).abs() < 1e-12);
    let s = sample(&SampleSpec::fixed(h, vec![150, 150], 2)).unwrap();
    let an = Analysis::new(&s.graph, 0).unwrap();
    assert_eq!(classify_structure(&an.modularity.values, 2, 0.5).unwrap(), Structure::Anticommunity);
    let dev = spectrum_vs_model(&s).unwrap();
    assert!(dev.deviations[0] < 0.05, "{dev:?}");
}

#[test]
fn assortative_summary_counts() {
    let s = sample(&SampleSpec::fixed(assortative(), vec![200, 200], 9)).unwrap();
    let summary = SpectralSummary::compute(&s.graph, SpectralParams::default()).unwrap();
    assert_eq!(summary.structural_count_adj, 2);
    assert_eq!(summary.structural_count_mod, 1);
    assert_eq!(summary.largest_gap_adj, Some(2));
    assert!(summary.mu(1) > 0.7);
}

#[test]
fn planted_partition_is_recovered() {
    let s = sample(&SampleSpec::fixed(assortative(), vec![120, 80], 5)).unwrap();
    let kp = KMeansParams::default();
    for kind in [VarianceKind::Plain, VarianceKind::Weighted] {
        let v = k_variance(&s.graph, 2, kind, &kp, 1).unwrap();
        assert!(match_partitions(&v.partition, &s.partition).unwrap().0 >= 0.98, "{kind:?}");
    }
}

#[test]
fn sidecar_and_edge_list_round_trip() {
    let s = sample(&SampleSpec::multinomial(assortative(), 60, 17)).unwrap();
    let text = s.graph.to_edge_list();
    assert_eq!(WeightedGraph::parse_edge_list(&text).unwrap(), s.graph);
    let json = serde_json::to_string(&s.sidecar()).unwrap();
    let back: SampleSidecar = serde_json::from_str(&json).unwrap();
    assert_eq!(back.partition, s.partition);
    assert_eq!(back.spec, s.spec);
    assert_eq!(sample(&back.spec).unwrap(), s);
}

#[test]
fn balancing_moves_toward_r() {
    let h = ModelGraph::from_rows(vec![0.3, 0.7], &[vec![0.6, 0.2], vec![0.2, 0.5]]).unwrap();
    let samples: Vec<_> = [100, 1000, 10000].iter().map(|&n| sample(&SampleSpec::multinomial(h.clone(), n, 3)).unwrap()).collect();
    let r = balancing_report(&samples, 0.1).unwrap();
    assert!(r.weak_all);
    assert!(r.rows.last().unwrap().max_deviation < 0.02);
}

#[test]
fn heuristic_never_exceeds_exact() {
    for seed in 0..5 {
        let s = sample(&SampleSpec::fixed(assortative(), vec![7, 6], seed)).unwrap();
        if s.graph.edge_count() == 0 {
            continue;
        }
        let exact = partition_discrepancy_exact(&s.graph, &s.partition, 24).unwrap().value;
        let heur = partition_discrepancy_heuristic(&s.graph, &s.partition, seed, &HeuristicParams::default()).unwrap().value;
        assert!(heur <= exact + 1e-12, "seed {seed}: {heur} > {exact}");
    }
}

#[test]
fn weighted_graphs_are_scale_free_end_to_end() {
    let s = sample(&SampleSpec::fixed(assortative(), vec![40, 40], 8)).unwrap();
    let g2 = s.graph.scaled(3.5);
    let a = Analysis::new(&s.graph, 0).unwrap();
    let b = Analysis::new(&g2, 0).unwrap();
    for (x, y) in a.modularity.values.iter().zip(&b.modularity.values) {
        assert!((x - y).abs() < 1e-9);
    }
    let p = Partition::from_sizes(&[40, 40]).unwrap();
    let h = HeuristicParams::default();
    let d1 = partition_discrepancy_heuristic(&s.graph, &p, 1, &h).unwrap().value;
    let d2 = partition_discrepancy_heuristic(&g2, &p, 1, &h).unwrap().value;
    assert!((d1 - d2).abs() < 1e-9);
}

#[cfg(feature = "parallel")]
#[test]
fn results_do_not_depend_on_pool_size() {
    let run = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| {
            let s = sample(&SampleSpec::fixed(assortative(), vec![9, 9], 4)).unwrap();
            let exact = partition_discrepancy_exact(&s.graph, &s.partition, 24).unwrap();
            let big = sample(&SampleSpec::fixed(assortative(), vec![60, 60], 4)).unwrap();
            let v = k_variance(&big.graph, 2, VarianceKind::Weighted, &KMeansParams::default(), 7).unwrap();
            let sweep = rate_sweep(&assortative(), &[40, 60, 80], &[0, 1], RateMetric::MuK, 0.2).unwrap();
            (exact, v.value.to_bits(), v.partition, sweep.rows)
        })
    };
    assert_eq!(run(1), run(4));
}
