use legcop::quadrature::GaussLegendre;
use legcop::reference::{from_kendall_tau, Family};
use legcop::{
    estimate_coefficients, lscv, miae, mise, mkse, select_degree, shrink_factor, CoefficientTensor,
    DegreeVector, FittedEstimator, Grid, GridValues, LscvMode, MultiIndex, PseudoSample, Sample,
    ShrinkageKind, ShrinkageSpec,
};
use proptest::prelude::*;

fn tensor(d: usize, comps: Vec<usize>, coefs: &[f64]) -> FittedEstimator {
    let deg = DegreeVector::new(comps[..d].to_vec()).unwrap();
    let mut k = 0;
    FittedEstimator::new(CoefficientTensor::from_fn(deg, |_| {
        k += 1;
        coefs[k % coefs.len()]
    }))
}

fn pseudo_from(values: &[f64], d: usize) -> PseudoSample {
    let n = values.len() / d;
    Sample::new(n, d, values[..n * d].to_vec())
        .unwrap()
        .to_pseudo()
        .unwrap()
}

/// Tensor Gauss-Legendre sum of `f` over `[0,1]^k`.
fn cube_integral(k: usize, mut f: impl FnMut(&[f64]) -> f64) -> f64 {
    let g = GaussLegendre::new(8);
    let (x, w) = (g.nodes_on(0.0, 1.0), g.weights_on(0.0, 1.0));
    let mut total = 0.0;
    let mut p = vec![0.0; k];
    for mut idx in 0..x.len().pow(k as u32) {
        let mut weight = 1.0;
        for v in p.iter_mut() {
            *v = x[idx % x.len()];
            weight *= w[idx % x.len()];
            idx /= x.len();
        }
        total += weight * f(&p);
    }
    total
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn density_integrates_to_one_with_uniform_margins(
        d in 2usize..=3,
        comps in prop::collection::vec(0usize..=6, 3),
        coefs in prop::collection::vec(-0.5f64..0.5, 1..20),
        at in 0.0f64..=1.0,
    ) {
        let fit = tensor(d, comps, &coefs);
        let total = cube_integral(d, |u| fit.density_at(u).unwrap());
        prop_assert!((total - 1.0).abs() <= 1e-8);
        for i in 0..d {
            let marg = cube_integral(d - 1, |rest| {
                let mut u = rest.to_vec();
                u.insert(i, at);
                fit.density_at(&u).unwrap()
            });
            prop_assert!((marg - 1.0).abs() <= 1e-8, "margin {i}: {marg}");
        }
    }

    #[test]
    fn copula_boundary_properties(
        d in 2usize..=3,
        comps in prop::collection::vec(0usize..=8, 3),
        coefs in prop::collection::vec(-2.0f64..2.0, 1..20),
        u in prop::collection::vec(0.0f64..=1.0, 3),
        i in 0usize..3,
    ) {
        let fit = tensor(d, comps, &coefs);
        let i = i % d;
        let mut zero = u[..d].to_vec();
        zero[i] = 0.0;
        prop_assert!(fit.copula_at(&zero).unwrap().abs() <= 1e-12);
        let mut ones = vec![1.0; d];
        ones[i] = u[i];
        prop_assert!((fit.copula_at(&ones).unwrap() - u[i]).abs() <= 1e-12);
    }

    #[test]
    fn mixed_differences_of_copula_give_density(
        comps in prop::collection::vec(0usize..=6, 2),
        coefs in prop::collection::vec(-0.5f64..0.5, 1..20),
        u in prop::collection::vec(0.01f64..0.99, 2),
    ) {
        let fit = tensor(2, comps, &coefs);
        let h = 1e-4;
        let c = |a: f64, b: f64| fit.copula_at(&[u[0] + a, u[1] + b]).unwrap();
        let fd = (c(h, h) - c(h, -h) - c(-h, h) + c(-h, -h)) / (4.0 * h * h);
        prop_assert!((fd - fit.density_at(&u).unwrap()).abs() <= 1e-4);
    }

    #[test]
    fn lscv_scan_properties(
        values in prop::collection::vec(0.0f64..1.0, 6..120),
        max_n in 0usize..=5,
        consistent in any::<bool>(),
    ) {
        let mode = if consistent { LscvMode::EstimatorConsistent } else { LscvMode::Literal };
        let p = pseudo_from(&values, 2);
        let scan = select_degree(&p, max_n, mode).unwrap();
        prop_assert_eq!(scan.scores().len(), scan.candidates().len());
        prop_assert!((scan.scores()[0] + 1.0).abs() <= 1e-12);
        let min = scan.scores().iter().copied().fold(f64::INFINITY, f64::min);
        let first = scan.scores().iter().position(|&s| s == min).unwrap();
        prop_assert_eq!(scan.selected(), scan.candidates()[first]);
        for (&n, &s) in scan.candidates().iter().zip(scan.scores()) {
            let direct = lscv(&p, &DegreeVector::uniform(n, 2).unwrap(), mode).unwrap();
            prop_assert!((direct - s).abs() <= 1e-12);
        }
    }

    #[test]
    fn coefficients_are_rank_invariant_and_structural(
        values in prop::collection::vec(-10.0f64..10.0, 6..90),
        n_deg in 0usize..=5,
    ) {
        let d = 3;
        let p = pseudo_from(&values, d);
        let moved: Vec<f64> = values.iter().map(|x| x * x * x + x).collect();
        let q = pseudo_from(&moved, d);
        let deg = DegreeVector::uniform(n_deg, d).unwrap();
        let a = estimate_coefficients(&p, &deg).unwrap();
        let b = estimate_coefficients(&q, &deg).unwrap();
        prop_assert_eq!(a.values(), b.values());
        for (m, v) in a.iter() {
            if m.is_zero() {
                prop_assert_eq!(v, 1.0);
            } else if m.components().iter().filter(|&&c| c == 0).count() == d - 1 {
                prop_assert_eq!(v, 0.0);
            }
            let cap: f64 = m.components().iter().map(|&c| ((2 * c + 1) as f64).sqrt()).product();
            prop_assert!(v.abs() <= cap * (1.0 + 1e-12));
        }
    }

    #[test]
    fn error_norm_relations(
        t in 2usize..12,
        d in 1usize..=3,
        seed in prop::collection::vec(-1.0f64..1.0, 1..50),
    ) {
        let grid = Grid::regular(t, d).unwrap();
        let mut k = 0;
        let est = GridValues::from_fn(&grid, |_| { k += 1; seed[k % seed.len()] });
        let truth = GridValues::from_fn(&grid, |u| u.iter().product());
        let (a, s, m) = (
            miae(&est, &truth, &grid).unwrap(),
            mise(&est, &truth, &grid).unwrap(),
            mkse(&est, &truth, &grid).unwrap(),
        );
        prop_assert!(m >= a && a >= 0.0);
        let nodes = ((t - 1) as f64 / t as f64).powi(d as i32);
        prop_assert!(s <= m * m * nodes * (1.0 + 1e-12));
    }

    #[test]
    fn shrink_factor_is_a_proper_weight(
        thetas in prop::collection::vec(1e-6f64..1.0, 2),
        u in prop::collection::vec(0.0f64..=1.0, 2),
        power in any::<bool>(),
    ) {
        let kind = if power { ShrinkageKind::Power } else { ShrinkageKind::ExponentialTilt };
        let spec = ShrinkageSpec::new(kind, thetas, 0.05).unwrap();
        let s = shrink_factor(&spec, &u).unwrap();
        prop_assert!(s > 0.0 && s <= 1.0);
    }
}

#[test]
fn spearman_coefficient_is_centred_under_independence() {
    let model = from_kendall_tau(Family::Independence, 0.0, 2).unwrap();
    let deg = DegreeVector::uniform(1, 2).unwrap();
    let (n, reps) = (2000, 200);
    let mean: f64 = (0..reps)
        .map(|r| {
            let p = model.sample(n, 77 + r as u64).unwrap().to_pseudo().unwrap();
            estimate_coefficients(&p, &deg)
                .unwrap()
                .get(&MultiIndex::new(vec![1, 1]))
                .unwrap()
        })
        .sum::<f64>()
        / reps as f64;
    assert!(mean.abs() <= 3.0 / ((n * reps) as f64).sqrt(), "{mean}");
}

#[test]
fn independence_benchmark_selects_degree_zero() {
    let cfg = legcop::BenchmarkConfig {
        families: vec![Family::Independence],
        ns: vec![500],
        reps: 20,
        max_degree: 10,
        seed: 1000,
        bernstein_ks: vec![],
        ..Default::default()
    };
    let report = legcop::run_benchmark(&cfg).unwrap();
    let cn = report.scenarios[0].estimator("CN").unwrap();
    assert_eq!(cn.n_opt_mode, Some(0));
    assert!(cn.metric("mise").unwrap().mean <= 1e-20);
}
