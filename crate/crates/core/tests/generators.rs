mod common;

use proptest::prelude::*;
use rand::Rng;
use synthdomain::discretize::{discretize, DiscretizerConfig, DiscretizerKind};
use synthdomain::domain::{DomainStrategy, ExtractionConfig};
use synthdomain::dp::{BudgetLedger, PrivacyBudget, RandomStream, Stage};
use synthdomain::mst::{calibrate, calibration_residual, fit_mst, ipf, is_spanning_tree, sample_tree, TreeModel};
use synthdomain::pipeline::{synthesize, GeneratorKind, PipelineConfig};
use synthdomain::privbayes::{self, learn_network, measure_conditionals, mutual_information, BayesNet, Cpt, CptSet, PrivBayesConfig};
use synthdomain::table::{direct_range, DiscreteTable, Domain, Provenance};

use common::{marginal, names, total_variation, wine};

const HUGE: f64 = 1e9;

fn model_ledger(eps_model: f64, delta: f64) -> BudgetLedger {
    BudgetLedger::new(PrivacyBudget {
        eps_extract: 0.0,
        eps_disc: 0.0,
        eps_model,
        delta,
    })
}

/// X0 uniform on 4 bins; X1 copies X0 and X2 copies X1, each copy kept with
/// probability 0.8 and otherwise redrawn, so I(X0;X2) is the weakest pair.
fn chain(seed: u64, n: usize) -> DiscreteTable {
    let mut rng = RandomStream::from_seed(seed);
    let mut cols = vec![Vec::with_capacity(n); 3];
    for _ in 0..n {
        let x0: u32 = rng.gen_range(0..4);
        let x1 = if rng.gen_bool(0.8) { x0 } else { rng.gen_range(0..4) };
        let x2 = if rng.gen_bool(0.8) { x1 } else { rng.gen_range(0..4) };
        cols[0].push(x0);
        cols[1].push(x1);
        cols[2].push(x2);
    }
    DiscreteTable::new(names(3), cols, vec![4; 3]).unwrap()
}

fn random_table(rng: &mut RandomStream, n: usize, bins: &[usize]) -> DiscreteTable {
    let cols = bins.iter().map(|&b| (0..n).map(|_| rng.gen_range(0..b as u32)).collect()).collect();
    DiscreteTable::new(names(bins.len()), cols, bins.to_vec()).unwrap()
}

fn mi_oracle(t: &[Vec<f64>]) -> f64 {
    let total: f64 = t.iter().flatten().sum();
    let mut mi = 0.0;
    for (i, row) in t.iter().enumerate() {
        let px = row.iter().sum::<f64>() / total;
        for (j, &c) in row.iter().enumerate() {
            let py = t.iter().map(|r| r[j]).sum::<f64>() / total;
            let p = c / total;
            if p > 0.0 {
                mi += p * (p / (px * py)).log2();
            }
        }
        let _ = i;
    }
    mi
}

#[test]
fn mutual_information_examples() {
    assert_eq!(mutual_information(&[vec![25.0, 25.0], vec![25.0, 25.0]]).unwrap(), 0.0);
    assert!((mutual_information(&[vec![50.0, 0.0], vec![0.0, 50.0]]).unwrap() - 1.0).abs() < 1e-12);
    assert!(mutual_information(&[vec![0.0, 0.0]]).is_err());
    let mut rng = RandomStream::from_seed(31);
    for _ in 0..20 {
        let t: Vec<Vec<f64>> = (0..4).map(|_| (0..4).map(|_| f64::from(rng.gen_range(0..30u32))).collect()).collect();
        assert!((mutual_information(&t).unwrap() - mi_oracle(&t)).abs() < 1e-12);
    }
}

#[test]
fn privbayes_recovers_chain() {
    let dt = chain(32, 3000);
    let mut hits = 0;
    for seed in 0..100 {
        let net = learn_network(&dt, 2, HUGE, &mut RandomStream::from_seed(seed)).unwrap();
        let neighbours = [vec![1], vec![0, 2], vec![1]];
        let ok = net.ordering[1..]
            .iter()
            .all(|&a| neighbours[a].iter().any(|n| net.parents[a].contains(n)));
        hits += usize::from(ok);
    }
    assert!(hits >= 95, "{hits}/100");
}

#[test]
fn huge_eps_structure_is_greedy_argmax() {
    let mut rng = RandomStream::from_seed(33);
    let dt = random_table(&mut rng, 500, &[3, 4, 2, 5, 3]);
    for seed in 0..20 {
        let a = learn_network(&dt, 2, HUGE, &mut RandomStream::from_seed(seed)).unwrap();
        let b = learn_network(&dt, 2, 0.0, &mut RandomStream::from_seed(seed)).unwrap();
        assert_eq!(a, b, "seed {seed}");
    }
}

#[test]
fn conditionals_are_exact_at_huge_eps() {
    let mut rng = RandomStream::from_seed(34);
    let mut dt = random_table(&mut rng, 400, &[3, 4, 2]);
    // bin 2 of the first attribute never occurs
    let cols: Vec<Vec<u32>> = (0..3)
        .map(|c| dt.column(c).iter().map(|&v| if c == 0 { v % 2 } else { v }).collect())
        .collect();
    dt = DiscreteTable::new(names(3), cols, vec![3, 4, 2]).unwrap();
    let net = BayesNet {
        ordering: vec![0, 1, 2],
        parents: vec![vec![], vec![0], vec![0, 1]],
    };
    let cpts = measure_conditionals(&dt, &net, HUGE, &mut rng).unwrap();
    let n = dt.n_rows();
    for attr in 0..3 {
        let cpt = &cpts.0[attr];
        let parents = &net.parents[attr];
        for config in 0..cpt.n_rows() {
            let matches = |r: usize| {
                let mut c = 0;
                for &p in parents {
                    c = c * dt.bins()[p] + dt.column(p)[r] as usize;
                }
                c == config
            };
            let rows: Vec<usize> = (0..n).filter(|&r| matches(r)).collect();
            for v in 0..cpt.child_bins {
                let want = if rows.is_empty() {
                    1.0 / cpt.child_bins as f64
                } else {
                    rows.iter().filter(|&&r| dt.column(attr)[r] as usize == v).count() as f64 / rows.len() as f64
                };
                assert!((cpt.row(config)[v] - want).abs() < 1e-6, "attr {attr} config {config} bin {v}");
            }
        }
    }
}

#[test]
fn privbayes_ledger_spends_model_budget() {
    let mut rng = RandomStream::from_seed(35);
    let dt = random_table(&mut rng, 200, &[3, 3, 4, 2]);
    let mut ledger = model_ledger(0.8, 0.0);
    privbayes::fit(&dt, &PrivBayesConfig::default(), 0.8, &mut ledger, &mut rng).unwrap();
    assert!((ledger.spent(Stage::Model).0 - 0.8).abs() < 1e-12);
    ledger.verify_complete().unwrap();
}

#[test]
fn privbayes_single_attribute_sampling() {
    let net = BayesNet {
        ordering: vec![0],
        parents: vec![vec![]],
    };
    let cpts = CptSet(vec![Cpt {
        parents: vec![],
        child_bins: 2,
        probs: vec![0.5, 0.5],
    }]);
    let out = privbayes::sample(&net, &cpts, &names(1), 10_000, &mut RandomStream::from_seed(36)).unwrap();
    let ones = out.column(0).iter().filter(|&&v| v == 1).count() as f64 / 1e4;
    assert!((ones - 0.5).abs() < 0.02);
}

#[test]
fn privbayes_one_hot_rows_are_deterministic() {
    let net = BayesNet {
        ordering: vec![1, 0],
        parents: vec![vec![1], vec![]],
    };
    let cpts = CptSet(vec![
        Cpt {
            parents: vec![1],
            child_bins: 3,
            probs: vec![0.0, 0.0, 1.0, 1.0, 0.0, 0.0],
        },
        Cpt {
            parents: vec![],
            child_bins: 2,
            probs: vec![0.3, 0.7],
        },
    ]);
    let out = privbayes::sample(&net, &cpts, &names(2), 2000, &mut RandomStream::from_seed(37)).unwrap();
    assert_eq!(out.n_rows(), 2000);
    for r in 0..2000 {
        let want = if out.column(1)[r] == 0 { 2 } else { 0 };
        assert_eq!(out.column(0)[r], want);
    }
}

#[test]
fn mst_recovers_chain() {
    let dt = chain(38, 3000);
    let mut hits = 0;
    for seed in 0..100 {
        let mut ledger = model_ledger(HUGE, 1e-5);
        let m = fit_mst(&dt, HUGE, 1e-5, &mut ledger, &mut RandomStream::from_seed(seed)).unwrap();
        let mut edges = m.edges.clone();
        edges.sort();
        hits += usize::from(edges == [(0, 1), (1, 2)]);
    }
    assert!(hits >= 95, "{hits}/100");
}

#[test]
fn mst_two_attributes_single_edge_and_ledger() {
    let mut rng = RandomStream::from_seed(39);
    let dt = random_table(&mut rng, 100, &[3, 2]);
    let mut ledger = model_ledger(0.5, 1e-5);
    let m = fit_mst(&dt, 0.5, 1e-5, &mut ledger, &mut rng).unwrap();
    assert_eq!(m.edges, vec![(0, 1)]);
    let (eps, delta) = ledger.spent(Stage::Model);
    assert!((eps - 0.5).abs() < 1e-12 && (delta - 1e-5).abs() < 1e-18);
    ledger.verify_complete().unwrap();
    assert!(fit_mst(&dt, 0.5, 0.0, &mut model_ledger(0.5, 0.0), &mut rng).is_err());
}

fn model_5x5(rng: &mut RandomStream) -> TreeModel {
    TreeModel {
        bins: vec![5, 5],
        edges: vec![(0, 1)],
        one_way: (0..2).map(|_| (0..5).map(|_| rng.gen_range(-5.0..60.0)).collect()).collect(),
        two_way: vec![(0..25).map(|_| rng.gen_range(-3.0..20.0)).collect()],
        sigma_one_way: 1.0,
        sigma_two_way: 1.0,
        total: 300.0,
        calibrated: false,
    }
}

#[test]
fn ipf_matches_margins() {
    let mut rng = RandomStream::from_seed(40);
    for _ in 0..20 {
        let m = calibrate(&model_5x5(&mut rng));
        let t = &m.two_way[0];
        for i in 0..5 {
            let row: f64 = t[i * 5..(i + 1) * 5].iter().sum();
            assert!((row - m.one_way[0][i]).abs() < 1e-6);
            let col: f64 = (0..5).map(|k| t[k * 5 + i]).sum();
            assert!((col - m.one_way[1][i]).abs() < 1e-6);
        }
        assert!(t.iter().all(|&v| v >= 0.0));
        assert!(m.one_way.iter().all(|w| (w.iter().sum::<f64>() - 300.0).abs() < 1e-6));
        assert!(calibration_residual(&m) < 1e-6);
    }
}

#[test]
fn ipf_on_consistent_table_is_a_no_op() {
    let mut t = vec![10.0, 20.0, 30.0, 40.0];
    let before = t.clone();
    let residual = ipf(&mut t, &[30.0, 70.0], &[40.0, 60.0]);
    assert!(residual < 1e-9);
    for (a, b) in t.iter().zip(&before) {
        assert!((a - b).abs() < 1e-9);
    }
}

#[test]
fn negative_cell_is_clipped() {
    let m = TreeModel {
        bins: vec![2, 2],
        edges: vec![(0, 1)],
        one_way: vec![vec![50.0, 50.0], vec![50.0, 50.0]],
        two_way: vec![vec![50.0, -5.0, 0.0, 50.0]],
        sigma_one_way: 1.0,
        sigma_two_way: 1.0,
        total: 100.0,
        calibrated: false,
    };
    let c = calibrate(&m);
    assert!(c.two_way[0][1] < 1e-9 && c.two_way[0][1] >= 0.0);
    assert!((c.two_way[0].iter().sum::<f64>() - 100.0).abs() < 1e-6);
}

#[test]
fn calibration_is_idempotent() {
    let mut rng = RandomStream::from_seed(41);
    let dt = random_table(&mut rng, 300, &[4, 3, 5, 2]);
    let m = fit_mst(&dt, 1.0, 1e-5, &mut model_ledger(1.0, 1e-5), &mut rng).unwrap();
    let once = calibrate(&m);
    let twice = calibrate(&once);
    for (a, b) in once.two_way.iter().flatten().zip(twice.two_way.iter().flatten()) {
        assert!((a - b).abs() < 1e-9);
    }
    for (a, b) in once.one_way.iter().flatten().zip(twice.one_way.iter().flatten()) {
        assert!((a - b).abs() < 1e-9);
    }
}

#[test]
fn single_attribute_tree_samples_its_marginal() {
    let m = calibrate(&TreeModel {
        bins: vec![4],
        edges: vec![],
        one_way: vec![vec![10.0, 40.0, 30.0, 20.0]],
        two_way: vec![],
        sigma_one_way: 1.0,
        sigma_two_way: 0.0,
        total: 100.0,
        calibrated: false,
    });
    let out = sample_tree(&m, &names(1), 10_000, &mut RandomStream::from_seed(42)).unwrap();
    let tv = total_variation(&marginal(out.column(0), 4), &[0.1, 0.4, 0.3, 0.2]);
    assert!(tv <= 0.02, "tv {tv}");
}

#[test]
fn diagonal_edge_copies_parent() {
    let m = calibrate(&TreeModel {
        bins: vec![3, 3],
        edges: vec![(0, 1)],
        one_way: vec![vec![20.0, 50.0, 30.0], vec![20.0, 50.0, 30.0]],
        two_way: vec![vec![20.0, 0.0, 0.0, 0.0, 50.0, 0.0, 0.0, 0.0, 30.0]],
        sigma_one_way: 1.0,
        sigma_two_way: 1.0,
        total: 100.0,
        calibrated: false,
    });
    let out = sample_tree(&m, &names(2), 5000, &mut RandomStream::from_seed(43)).unwrap();
    assert_eq!(out.column(0), out.column(1));
}

#[test]
fn sampling_converges_to_calibrated_marginals() {
    let mut rng = RandomStream::from_seed(44);
    let dt = random_table(&mut rng, 400, &[4, 3, 5]);
    let m = calibrate(&fit_mst(&dt, 2.0, 1e-5, &mut model_ledger(2.0, 1e-5), &mut rng).unwrap());
    let out = sample_tree(&m, &names(3), 100_000, &mut rng).unwrap();
    for c in 0..3 {
        let want: Vec<f64> = m.one_way[c].iter().map(|v| v / m.total).collect();
        let tv = total_variation(&marginal(out.column(c), m.bins[c]), &want);
        assert!(tv <= 0.02, "column {c} tv {tv}");
    }
}

fn wine_marginal_tv(generator: GeneratorKind) -> Vec<f64> {
    let t = wine();
    let domain = Domain {
        bounds: (0..t.n_cols()).map(|c| direct_range(&t, c).0).collect(),
        provenance: Provenance::Provided,
    };
    let cfg = PipelineConfig {
        strategy: DomainStrategy::Provided,
        provided: Some(domain),
        extraction: ExtractionConfig::default(),
        discretizer: DiscretizerConfig::new(DiscretizerKind::Uniform),
        generator,
        privbayes: PrivBayesConfig::default(),
        eps_pre: 1.0,
        eps_model: 1e6,
        delta: 1e-5,
    };
    let out = synthesize(&t, &cfg, &mut RandomStream::from_seed(45)).unwrap();
    let real = discretize(&t, &out.edges).unwrap();
    let synth = discretize(&out.synthetic, &out.edges).unwrap();
    (0..t.n_cols())
        .map(|c| total_variation(&marginal(real.column(c), real.bins()[c]), &marginal(synth.column(c), synth.bins()[c])))
        .collect()
}

#[test]
fn privbayes_fidelity_on_wine() {
    let tv = wine_marginal_tv(GeneratorKind::Privbayes);
    assert!(tv.iter().all(|&x| x <= 0.05), "{tv:?}");
}

#[test]
fn mst_fidelity_on_wine() {
    let tv = wine_marginal_tv(GeneratorKind::Mst);
    assert!(tv.iter().all(|&x| x <= 0.05), "{tv:?}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn mst_always_selects_a_spanning_tree(
        bins in prop::collection::vec(2usize..6, 1..7),
        n in 1usize..80,
        eps in prop_oneof![0.01..5.0f64, Just(1e6)],
        seed in any::<u64>(),
    ) {
        let mut rng = RandomStream::from_seed(seed);
        let dt = random_table(&mut rng, n, &bins);
        let mut ledger = model_ledger(eps, 1e-5);
        let m = fit_mst(&dt, eps, 1e-5, &mut ledger, &mut rng).unwrap();
        prop_assert!(is_spanning_tree(bins.len(), &m.edges));
        let c = calibrate(&m);
        prop_assert!(calibration_residual(&c) < 1e-6);
        let (spent, delta) = ledger.spent(Stage::Model);
        prop_assert!((spent - eps).abs() <= 1e-12 * eps && (delta - 1e-5).abs() < 1e-15);
    }

    #[test]
    fn conditional_rows_are_distributions(seed in any::<u64>(), eps in 0.01..10.0f64) {
        let mut rng = RandomStream::from_seed(seed);
        let dt = random_table(&mut rng, 50, &[3, 2, 4, 3]);
        let fit = privbayes::fit(&dt, &PrivBayesConfig::default(), eps, &mut model_ledger(eps, 0.0), &mut rng).unwrap();
        for cpt in &fit.cpts.0 {
            for r in 0..cpt.n_rows() {
                let row = cpt.row(r);
                prop_assert!(row.iter().all(|&p| p >= 0.0));
                prop_assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-9);
            }
        }
        let out = privbayes::sample(&fit.net, &fit.cpts, dt.names(), 30, &mut rng).unwrap();
        prop_assert_eq!((out.n_rows(), out.n_cols()), (30, 4));
        for c in 0..4 {
            prop_assert!(out.column(c).iter().all(|&v| (v as usize) < dt.bins()[c]));
        }
    }
}
