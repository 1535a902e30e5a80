mod common;

use proptest::prelude::*;
use synthdomain::dp::{
    eps_from_rho, exponential_mechanism, gaussian, gaussian_sigma_for, laplace, two_sided_geometric, RandomStream,
};

use common::{chi_square_p, frequencies, ks_two_sample, total_variation};

const DRAWS: usize = 1_000_000;

fn variance(xs: &[f64]) -> f64 {
    let mean = xs.iter().sum::<f64>() / xs.len() as f64;
    xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / xs.len() as f64
}

fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(f64::total_cmp);
    xs[xs.len() / 2]
}

#[test]
fn laplace_moments() {
    let mut rng = RandomStream::from_seed(11);
    let xs: Vec<f64> = (0..DRAWS).map(|_| laplace(1.0, &mut rng).unwrap()).collect();
    let v = variance(&xs);
    assert!((v / 2.0 - 1.0).abs() < 0.02, "variance {v}");
    assert!(median(xs).abs() < 0.01);
}

#[test]
fn laplace_rejects_bad_scale() {
    let mut rng = RandomStream::from_seed(0);
    assert!(laplace(0.0, &mut rng).is_err());
    assert!(laplace(-1.0, &mut rng).is_err());
}

#[test]
fn streams_repeat_for_a_seed() {
    let draw = |seed| {
        let mut rng = RandomStream::from_seed(seed);
        (0..20).map(|_| laplace(1.0, &mut rng).unwrap()).collect::<Vec<_>>()
    };
    assert_eq!(draw(42), draw(42));
    assert_ne!(draw(42), draw(43));
    let normals = |seed| {
        let mut rng = RandomStream::from_seed(seed);
        (0..20).map(|_| gaussian(1.0, &mut rng).unwrap()).collect::<Vec<_>>()
    };
    assert_eq!(normals(42), normals(42));
}

#[test]
fn gaussian_moments() {
    let mut rng = RandomStream::from_seed(12);
    let xs: Vec<f64> = (0..DRAWS).map(|_| gaussian(2.0, &mut rng).unwrap()).collect();
    let v = variance(&xs);
    assert!((v / 4.0 - 1.0).abs() < 0.02, "variance {v}");
    let ys: Vec<f64> = (0..DRAWS).map(|_| gaussian(1.0, &mut rng).unwrap()).collect();
    assert!((ys.iter().sum::<f64>() / DRAWS as f64).abs() < 0.01);
    assert!(gaussian(0.0, &mut rng).is_err());
}

#[test]
fn geometric_mass_at_zero() {
    let mut rng = RandomStream::from_seed(13);
    let zeros = (0..DRAWS).filter(|_| two_sided_geometric(1.0, 1, &mut rng).unwrap() == 0).count();
    let alpha = (-1.0f64).exp();
    let want = (1.0 - alpha) / (1.0 + alpha);
    let got = zeros as f64 / DRAWS as f64;
    assert!((got - want).abs() < 0.005, "P(0) {got} vs {want}");
}

#[test]
fn geometric_limits_and_errors() {
    let mut rng = RandomStream::from_seed(14);
    assert!((0..10_000).all(|_| two_sided_geometric(1e9, 1, &mut rng).unwrap() == 0));
    assert!(two_sided_geometric(0.0, 1, &mut rng).is_err());
    assert!(two_sided_geometric(1.0, 0, &mut rng).is_err());
}

#[test]
fn geometric_depends_on_ratio_only() {
    let mut a_rng = RandomStream::from_seed(15);
    let mut b_rng = RandomStream::from_seed(16);
    let a: Vec<f64> = (0..100_000).map(|_| two_sided_geometric(0.5, 2, &mut a_rng).unwrap() as f64).collect();
    let b: Vec<f64> = (0..100_000).map(|_| two_sided_geometric(0.25, 1, &mut b_rng).unwrap() as f64).collect();
    let (_, p) = ks_two_sample(&a, &b);
    assert!(p > 0.01, "KS p {p}");
}

#[test]
fn exponential_mechanism_uniform_on_ties() {
    let mut rng = RandomStream::from_seed(17);
    let n = 100_000;
    let draws: Vec<usize> = (0..n).map(|_| exponential_mechanism(&[0.0; 3], 1.0, 3.0, &mut rng).unwrap()).collect();
    let expected = n as f64 / 3.0;
    let stat: f64 = frequencies(&draws, 3)
        .iter()
        .map(|f| (f * n as f64 - expected).powi(2) / expected)
        .sum();
    assert!(chi_square_p(stat, 2) > 0.01, "chi2 {stat}");
}

#[test]
fn exponential_mechanism_argmax_limit() {
    let mut rng = RandomStream::from_seed(18);
    let hits = (0..100_000)
        .filter(|_| exponential_mechanism(&[1.0, 5.0, 2.0], 1.0, 1e9, &mut rng).unwrap() == 1)
        .count();
    assert!(hits as f64 / 100_000.0 > 0.999);
}

#[test]
fn exponential_mechanism_odds() {
    let mut rng = RandomStream::from_seed(19);
    let ones = (0..100_000)
        .filter(|_| exponential_mechanism(&[0.0, 4f64.ln()], 1.0, 2.0, &mut rng).unwrap() == 1)
        .count() as f64;
    let ratio = ones / (100_000.0 - ones);
    assert!((ratio / 4.0 - 1.0).abs() < 0.05, "ratio {ratio}");
}

#[test]
fn exponential_mechanism_errors() {
    let mut rng = RandomStream::from_seed(0);
    assert!(exponential_mechanism(&[], 1.0, 1.0, &mut rng).is_err());
    assert!(exponential_mechanism(&[1.0], 0.0, 1.0, &mut rng).is_err());
    assert!(exponential_mechanism(&[1.0, f64::NAN], 1.0, 1.0, &mut rng).is_err());
}

#[test]
fn exponential_mechanism_survives_huge_scores() {
    let mut rng = RandomStream::from_seed(20);
    let i = exponential_mechanism(&[1e300, 1e300 - 1e290, -1e300], 1.0, 1.0, &mut rng).unwrap();
    assert!(i < 2);
}

#[test]
fn sigma_examples() {
    let s1 = gaussian_sigma_for(1.0, 1e-5, 1.0, 1).unwrap();
    let s2 = gaussian_sigma_for(1.0, 1e-5, 2.0, 1).unwrap();
    let s4 = gaussian_sigma_for(1.0, 1e-5, 1.0, 4).unwrap();
    assert!((s2 / s1 - 2.0).abs() < 1e-9);
    assert!((s4 / s1 - 2.0).abs() < 1e-9);
    assert!(gaussian_sigma_for(0.0, 1e-5, 1.0, 1).is_err());
    assert!(gaussian_sigma_for(1.0, 0.0, 1.0, 1).is_err());
    assert!(gaussian_sigma_for(1.0, 1e-5, 1.0, 0).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn exponential_mechanism_matches_softmax(
        scores in prop::collection::vec(-3.0..3.0f64, 4),
        eps in 0.1..4.0f64,
        seed in any::<u64>(),
    ) {
        let mut rng = RandomStream::from_seed(seed);
        let n = 100_000;
        let draws: Vec<usize> = (0..n).map(|_| exponential_mechanism(&scores, 1.0, eps, &mut rng).unwrap()).collect();
        let w: Vec<f64> = scores.iter().map(|s| (eps * s / 2.0).exp()).collect();
        let total: f64 = w.iter().sum();
        let softmax: Vec<f64> = w.iter().map(|x| x / total).collect();
        let tv = total_variation(&frequencies(&draws, 4), &softmax);
        prop_assert!(tv < 0.01, "tv {}", tv);
    }

    #[test]
    fn sigma_round_trip(eps in 0.01..50.0f64, log_delta in -12.0..-2.0f64, l2 in 0.1..10.0f64, t in 1u32..20) {
        let delta = 10f64.powf(log_delta);
        let sigma = gaussian_sigma_for(eps, delta, l2, t).unwrap();
        let rho = f64::from(t) * l2 * l2 / (2.0 * sigma * sigma);
        let spent = eps_from_rho(rho, delta);
        prop_assert!(spent <= eps && spent >= eps * (1.0 - 1e-6), "spent {} of {}", spent, eps);
    }
}
