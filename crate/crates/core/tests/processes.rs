use proptest::prelude::*;

use statgamma::processes::{
    ar1_path, changepoint_path, cir_path, cthin_path, random_measure_path, tent_partition, thinned_path,
};
use statgamma::stats::{empirical_acf, empirical_moments, ensemble_acf, ks_statistic};
use statgamma::{
    derive_stream, make_uniform_grid, simulate_ensemble, CirMethod, CthinConfig, Dependence, Error, GammaParams,
    ProcessKind, SimOptions, Start, TimeGrid,
};

fn gp(a: f64, b: f64) -> GammaParams {
    GammaParams::new(a, b).unwrap()
}

fn rho(r: f64) -> Dependence {
    Dependence::from_rho(r).unwrap()
}

#[test]
fn ensemble_rows_are_the_single_path_simulators() {
    let grid = make_uniform_grid(0.0, 1.0, 12).unwrap();
    let (p, dep) = (gp(1.5, 2.0), rho(0.4));
    type Single = fn(
        &mut statgamma::RandomSource,
        &TimeGrid,
        GammaParams,
        Dependence,
    ) -> statgamma::Result<statgamma::SamplePath>;
    let cases: [(ProcessKind, Single); 4] = [
        (ProcessKind::Ar1, ar1_path),
        (ProcessKind::Thinned, thinned_path),
        (ProcessKind::RandomMeasure, random_measure_path),
        (ProcessKind::ChangePoint, changepoint_path),
    ];
    for (kind, single) in cases {
        let ens = simulate_ensemble(kind, &grid, p, dep, 5, 77, &SimOptions::default()).unwrap();
        for m in 0..5 {
            let mut rng = derive_stream(77, m as u64);
            assert_eq!(single(&mut rng, &grid, p, dep).unwrap().values(), ens.path(m), "{kind} path {m}");
        }
    }
    let ens = simulate_ensemble(ProcessKind::SquaredOU, &grid, p, dep, 3, 78, &SimOptions::default()).unwrap();
    let mut rng = derive_stream(78, 2);
    assert_eq!(cir_path(&mut rng, &grid, p, dep, CirMethod::Exact).unwrap().values(), ens.path(2));
}

#[test]
fn ensembles_do_not_depend_on_the_pool_size() {
    let grid = TimeGrid::new(vec![0.0, 0.3, 1.0, 2.5]).unwrap();
    for kind in [ProcessKind::RandomMeasure, ProcessKind::SquaredOU, ProcessKind::ContinuouslyThinned] {
        let run = |threads: usize| {
            rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap().install(|| {
                simulate_ensemble(kind, &grid, gp(2.0, 1.0), rho(0.5), 300, 5, &SimOptions::default()).unwrap()
            })
        };
        assert_eq!(run(1).values(), run(4).values(), "{kind}");
    }
}

#[test]
fn precondition_violations_are_reported() {
    let irregular = TimeGrid::new(vec![0.0, 1.0, 1.5]).unwrap();
    let (p, dep) = (gp(2.0, 1.0), rho(0.5));
    for kind in [ProcessKind::Ar1, ProcessKind::Thinned] {
        assert!(matches!(
            simulate_ensemble(kind, &irregular, p, dep, 2, 0, &SimOptions::default()),
            Err(Error::Parameter(_))
        ));
    }
    let fixed = SimOptions { start: Start::Fixed(1.0), ..Default::default() };
    assert!(matches!(
        simulate_ensemble(ProcessKind::RandomMeasure, &irregular, p, dep, 2, 0, &fixed),
        Err(Error::Unsupported(_))
    ));
    let sq = SimOptions { cir_method: CirMethod::SquaredOU { dt_sub: 0.01 }, ..Default::default() };
    assert!(simulate_ensemble(ProcessKind::SquaredOU, &irregular, gp(1.25, 1.0), dep, 2, 0, &sq).is_err());
    assert!(simulate_ensemble(ProcessKind::SquaredOU, &irregular, gp(1.5, 1.0), dep, 2, 0, &sq).is_ok());
    assert!(simulate_ensemble(ProcessKind::Ar1, &irregular, p, dep, 0, 0, &SimOptions::default()).is_err());
    assert!(CthinConfig::new(0).is_err());
    assert!(TimeGrid::new(vec![0.0, 0.0]).is_err());
    assert!(TimeGrid::new(vec![]).is_err());
}

#[test]
fn irregular_grids_keep_the_marginal_and_correlation() {
    let grid = TimeGrid::new(vec![0.0, 0.2, 1.7, 1.75, 4.0]).unwrap();
    let (p, dep) = (gp(2.0, 1.0), rho(0.5));
    for (i, kind) in
        [ProcessKind::RandomMeasure, ProcessKind::ChangePoint, ProcessKind::SquaredOU].into_iter().enumerate()
    {
        let ens = simulate_ensemble(kind, &grid, p, dep, 50_000, 300 + i as u64, &SimOptions::default()).unwrap();
        for k in 0..grid.len() {
            assert!(ks_statistic(&ens.column(k), p).unwrap().passes(), "{kind} time {k}");
        }
        // correlation between consecutive observations is exp(-lambda gap)
        let times = grid.times();
        for k in 1..grid.len() {
            let pair = ens.window(k - 1, 2).unwrap();
            let (a, b): (Vec<f64>, Vec<f64>) = pair.chunks(2).map(|c| (c[0], c[1])).unzip();
            let (ma, mb) = (empirical_moments(&a).unwrap(), empirical_moments(&b).unwrap());
            let (sa, sb) = (ma.variance.sqrt(), mb.variance.sqrt());
            let prods: Vec<f64> = a.iter().zip(&b).map(|(x, y)| (x - ma.mean) / sa * (y - mb.mean) / sb).collect();
            let pm = empirical_moments(&prods).unwrap();
            let r = pm.mean;
            let target = (-dep.lambda() * (times[k] - times[k - 1])).exp();
            // the spread of the standardized products bounds the Pearson se from above
            let se = pm.se_mean;
            assert!((r - target).abs() < 4.0 * se, "{kind} gap {k}: {r} vs {target}");
        }
    }
}

#[test]
fn fixed_start_is_honoured() {
    let grid = make_uniform_grid(0.0, 0.5, 4).unwrap();
    for kind in [
        ProcessKind::Ar1,
        ProcessKind::Thinned,
        ProcessKind::ChangePoint,
        ProcessKind::SquaredOU,
        ProcessKind::ContinuouslyThinned,
    ] {
        let opts = SimOptions { start: Start::Fixed(2.5), ..Default::default() };
        let ens = simulate_ensemble(kind, &grid, gp(2.0, 1.0), rho(0.5), 20, 1, &opts).unwrap();
        assert!(ens.column(0).iter().all(|&x| x == 2.5), "{kind}");
    }
    let sq =
        SimOptions { start: Start::Fixed(0.8), cir_method: CirMethod::SquaredOU { dt_sub: 0.1 }, ..Default::default() };
    let ens = simulate_ensemble(ProcessKind::SquaredOU, &grid, gp(1.0, 2.0), rho(0.5), 10, 1, &sq).unwrap();
    assert!(ens.column(0).iter().all(|&x| (x - 0.8).abs() < 1e-12));
}

#[test]
fn changepoint_paths_hold_with_probability_rho() {
    let grid = make_uniform_grid(0.0, 0.5, 20_001).unwrap();
    let dep = rho(0.5);
    let mut rng = derive_stream(400, 0);
    let path = changepoint_path(&mut rng, &grid, gp(2.0, 1.0), dep).unwrap();
    let v = path.values();
    let holds = v.windows(2).filter(|w| w[0] == w[1]).count() as f64 / (v.len() - 1) as f64;
    let p = dep.over(0.5).unwrap().rho();
    assert!((holds - p).abs() < 4.0 * (p * (1.0 - p) / 20_000.0).sqrt(), "{holds} vs {p}");
}

#[test]
fn single_long_paths_have_geometric_autocorrelation() {
    let grid = make_uniform_grid(0.0, 1.0, 100_000).unwrap();
    let (p, dep) = (gp(0.8, 1.0), rho(0.6));
    for (i, kind) in [ProcessKind::Ar1, ProcessKind::Thinned, ProcessKind::ChangePoint].into_iter().enumerate() {
        let mut rng = derive_stream(500 + i as u64, 0);
        let path = match kind {
            ProcessKind::Ar1 => ar1_path(&mut rng, &grid, p, dep),
            ProcessKind::Thinned => thinned_path(&mut rng, &grid, p, dep),
            _ => changepoint_path(&mut rng, &grid, p, dep),
        }
        .unwrap();
        let acf = empirical_acf(&path, dep, 4).unwrap();
        assert!(acf.z_scores().iter().all(|&z| z < 4.0), "{kind}: {:?}", acf.z_scores());
    }
}

#[test]
fn cthin_lattice_and_convergence() {
    let mut rng = derive_stream(600, 0);
    let cfg = CthinConfig::new(8).unwrap();
    let path = cthin_path(&mut rng, 2.0, cfg, gp(1.0, 1.0), rho(0.5)).unwrap();
    assert_eq!(path.len(), 17);
    assert_eq!(path.grid().times()[16], 2.0);
    // the lattice chain is exactly a thinned chain, so even coarse lattices
    // keep the marginal and the correlation at lattice times
    let grid = make_uniform_grid(0.0, 0.5, 3).unwrap();
    let opts = SimOptions { cthin: CthinConfig::new(2).unwrap(), ..Default::default() };
    let ens =
        simulate_ensemble(ProcessKind::ContinuouslyThinned, &grid, gp(1.0, 1.0), rho(0.5), 50_000, 601, &opts).unwrap();
    assert!(ks_statistic(&ens.column(2), gp(1.0, 1.0)).unwrap().passes());
    assert!(ensemble_acf(&ens, 2).unwrap().z_scores().iter().all(|&z| z < 4.0));
}

#[test]
fn squared_ou_construction_matches_exact_marginal() {
    let grid = make_uniform_grid(0.0, 0.7, 4).unwrap();
    let opts = SimOptions { cir_method: CirMethod::SquaredOU { dt_sub: 0.05 }, ..Default::default() };
    let p = gp(1.5, 2.0);
    let ens = simulate_ensemble(ProcessKind::SquaredOU, &grid, p, rho(0.3), 50_000, 700, &opts).unwrap();
    assert!(ks_statistic(&ens.column(3), p).unwrap().passes());
    assert!(ensemble_acf(&ens, 3).unwrap().z_scores().iter().all(|&z| z < 4.0));
}

/// `|mean| / se` of `g(X_2) - E[g(X_2) | X_1]` within each `(X_0, X_1)` bin,
/// for `g(x) = x` and `g(x) = x^2`. Both kinds below share the pair law, with
/// `X_2 | X_1 = x` distributed as `B x + zeta`, `B ~ Be(1/2, 1/2)`, `zeta ~ Ga(1/2, 1)`;
/// a Markov process keeps both residuals centred in every bin.
fn markov_residual_z(kind: ProcessKind, seed: u64) -> [Vec<f64>; 2] {
    let grid = make_uniform_grid(0.0, 1.0, 3).unwrap();
    let ens = simulate_ensemble(kind, &grid, gp(1.0, 1.0), rho(0.5), 1_000_000, seed, &SimOptions::default()).unwrap();
    let edges = [0.0, 0.3, 1.0, f64::INFINITY];
    let bin = |x: f64| edges.windows(2).position(|w| x >= w[0] && x < w[1]).unwrap();
    let mut first = vec![Vec::new(); 9];
    let mut second = vec![Vec::new(); 9];
    for t in ens.values().chunks(3) {
        let (x1, x2) = (t[1], t[2]);
        let cell = 3 * bin(t[0]) + bin(x1);
        first[cell].push(x2 - 0.5 * x1 - 0.5);
        second[cell].push(x2 * x2 - (0.375 * x1 * x1 + 0.5 * x1 + 0.75));
    }
    let z = |cells: &[Vec<f64>]| -> Vec<f64> {
        cells
            .iter()
            .map(|c| {
                let m = empirical_moments(c).unwrap();
                m.mean.abs() / m.se_mean
            })
            .collect()
    };
    [z(&first), z(&second)]
}

#[test]
fn only_the_thinned_process_is_markov() {
    let [mean, square] = markov_residual_z(ProcessKind::Thinned, 800);
    assert!(mean.iter().chain(&square).all(|&z| z < 4.0), "{mean:?} {square:?}");
    // For the random measure the conditional mean is still linear in X_1
    // (the shared cells split by independent symmetric beta ratios), so the
    // dependence on X_0 only shows from the second moment on.
    let [mean, square] = markov_residual_z(ProcessKind::RandomMeasure, 801);
    assert!(mean.iter().all(|&z| z < 4.0), "{mean:?}");
    assert!(square.iter().any(|&z| z > 4.0), "{square:?}");
}

fn arbitrary_grid() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.01f64..3.0, 1..12).prop_map(|gaps| {
        let mut t = 0.0;
        gaps.into_iter()
            .map(|g| {
                t += g;
                t
            })
            .collect()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn paths_are_finite_and_nonnegative(
        alpha in 0.05f64..8.0,
        beta in 0.1f64..10.0,
        r in 0.01f64..0.99,
        times in arbitrary_grid(),
        seed in any::<u64>(),
    ) {
        let grid = TimeGrid::new(times).unwrap();
        let (p, dep) = (gp(alpha, beta), rho(r));
        let kinds = [ProcessKind::RandomMeasure, ProcessKind::ChangePoint, ProcessKind::SquaredOU, ProcessKind::ContinuouslyThinned];
        for kind in kinds {
            let opts = SimOptions { cthin: CthinConfig::new(16).unwrap(), ..Default::default() };
            let ens = simulate_ensemble(kind, &grid, p, dep, 4, seed, &opts).unwrap();
            prop_assert!(ens.values().iter().all(|&x| x.is_finite() && x >= 0.0), "{}", kind);
        }
    }

    #[test]
    fn tent_blocks_cover_each_tent_once(times in arbitrary_grid(), lambda in 0.01f64..5.0) {
        let grid = TimeGrid::new(times).unwrap();
        let part = tent_partition(&grid, Dependence::new(lambda).unwrap());
        let mut cover = vec![0.0; grid.len()];
        for (i, j, m) in part.blocks() {
            prop_assert!(m >= 0.0);
            for c in &mut cover[i..=j] {
                *c += m;
            }
        }
        for c in cover {
            prop_assert!((c - 1.0).abs() < 1e-12);
        }
    }
}
