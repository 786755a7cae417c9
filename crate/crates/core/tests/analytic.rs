mod common;

use num_complex::Complex64;
use statgamma::analytic::{
    cir_log_transition_density, gamma_chf, generator_apply, innovation_chf, levy_tail, pair_chf, TestFunction,
};
use statgamma::special::log_bessel_i;
use statgamma::{Dependence, GammaParams, ProcessKind};

fn gp(a: f64, b: f64) -> GammaParams {
    GammaParams::new(a, b).unwrap()
}

fn rho(r: f64) -> Dependence {
    Dependence::from_rho(r).unwrap()
}

fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
    (a - b).norm() <= tol * b.norm().max(1.0)
}

#[test]
fn log_bessel_matches_power_series() {
    let mut worst = 0.0f64;
    for q in [-0.5, 0.0, 0.3, 1.0, 2.5, 7.0, 40.0] {
        for x in [1e-3, 0.5, 3.0, 12.0, 29.5, 30.5, 60.0, 250.0, 700.0] {
            let got = log_bessel_i(q, x);
            let want = common::log_bessel_series(q, x);
            let err = (got - want).abs() / want.abs().max(1.0);
            worst = worst.max(err);
            assert!(err < 1e-12, "q={q} x={x}: {got} vs {want}");
        }
    }
    assert!(worst < 1e-12);
}

#[test]
fn gamma_chf_matches_quadrature() {
    let p = gp(2.5, 1.5);
    let pdf =
        |x: f64| if x <= 0.0 { 0.0 } else { (2.5 * 1.5f64.ln() - libm::lgamma(2.5) + 1.5 * x.ln() - 1.5 * x).exp() };
    for w in [-2.0, 0.3, 1.7] {
        let re = common::simpson_panels(&|x: f64| pdf(x) * (w * x).cos(), 0.0, 60.0, 600, 1e-13);
        let im = common::simpson_panels(&|x: f64| pdf(x) * (w * x).sin(), 0.0, 60.0, 600, 1e-13);
        assert!(close(gamma_chf(w, p), Complex64::new(re, im), 1e-10), "omega={w}");
    }
}

#[test]
fn innovation_is_the_self_decomposable_factor() {
    for (a, b, r) in [(2.0, 1.0, 0.3), (0.7, 2.0, 0.8), (5.0, 0.3, 0.05)] {
        let (p, dep) = (gp(a, b), rho(r));
        for w in [-3.0, -0.25, 0.5, 2.0, 9.0] {
            let want = gamma_chf(w, p) / gamma_chf(r * w, p);
            assert!(close(innovation_chf(w, p, dep), want, 1e-13), "({a},{b},{r}) omega={w}");
        }
    }
}

#[test]
fn pair_chfs_match_their_constructions() {
    let (p, dep) = (gp(1.3, 0.7), rho(0.4));
    let r = dep.rho();
    for (s, t) in [(0.5, -1.0), (2.0, 2.0), (-0.3, 1.7), (0.0, 1.0)] {
        // X_1 = rho X_0 + innovation
        let ar1 = gamma_chf(s + r * t, p) * innovation_chf(t, p, dep);
        assert!(close(pair_chf(ProcessKind::Ar1, s, t, p, dep).unwrap(), ar1, 1e-13));
        // no change with probability rho
        let cp = gamma_chf(s + t, p) * r + gamma_chf(s, p) * gamma_chf(t, p) * (1.0 - r);
        assert!(close(pair_chf(ProcessKind::ChangePoint, s, t, p, dep).unwrap(), cp, 1e-13));
    }
}

#[test]
fn squared_ou_pair_chf_matches_gaussian_determinant() {
    // For integer alpha, E exp(i(sX + tY)) = det^{-alpha} with no branch ambiguity.
    for alpha in [1.0, 2.0, 3.0] {
        for (beta, r) in [(1.0, 0.5), (2.5, 0.9), (0.4, 0.1)] {
            let (p, dep) = (gp(alpha, beta), rho(r));
            for (s, t) in [(0.5, -1.0), (3.0, 2.0), (-4.0, 1.5), (0.0, 2.0)] {
                let det = Complex64::new(1.0 - s * t * (1.0 - r) / (beta * beta), -(s + t) / beta);
                let want = det.powi(-(alpha as i32));
                let got = pair_chf(ProcessKind::SquaredOU, s, t, p, dep).unwrap();
                assert!(close(got, want, 1e-12), "alpha={alpha} beta={beta} rho={r} ({s},{t}): {got} vs {want}");
            }
        }
    }
}

#[test]
fn cir_density_matches_poisson_gamma_mixture() {
    for (a, b, r) in [(2.0, 1.0, 0.5), (0.6, 2.0, 0.9), (4.5, 0.5, 0.2)] {
        let (p, dep) = (gp(a, b), rho(r));
        for x in [0.05, 1.0, 6.0] {
            for dt in [0.1, 1.0, 3.0] {
                let decay = (-dep.lambda() * dt).exp();
                let c = b / (1.0 - decay);
                let mu = c * x * decay;
                for y in [0.01f64, 0.5, 2.0, 8.0] {
                    let terms: Vec<f64> = (0..4000)
                        .map(|k| {
                            let k = k as f64;
                            let shape = a + k;
                            (-mu + k * mu.ln() - libm::lgamma(k + 1.0))
                                + (shape * c.ln() - libm::lgamma(shape) + (shape - 1.0) * y.ln() - c * y)
                        })
                        .collect();
                    let top = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                    let want = top + terms.iter().map(|t| (t - top).exp()).sum::<f64>().ln();
                    let got = cir_log_transition_density(y, x, dt, p, dep).unwrap();
                    assert!((got - want).abs() < 1e-10 * want.abs().max(1.0), "({a},{b},{r}) x={x} dt={dt} y={y}");
                }
            }
        }
    }
}

#[test]
fn levy_tail_matches_quadrature() {
    for (a, b) in [(1.0, 1.0), (2.5, 0.5), (0.3, 4.0)] {
        let p = gp(a, b);
        for u in [0.1, 1.0, 7.0, 20.0] {
            // scaled by exp(-b u) so the tolerance is relative
            let f = |w: f64| a * (-b * w).exp() / (u + w);
            let want = (-b * u).exp() * common::simpson_panels(&f, 0.0, 80.0 / b, 4000, 1e-13);
            let got = levy_tail(u, p).unwrap().exact;
            assert!(common::rel_err(got, want) < 1e-9, "({a},{b}) u={u}: {got} vs {want}");
        }
    }
}

#[test]
fn diffusion_generator_closed_forms() {
    let (p, dep) = (gp(2.0, 1.5), rho(0.6));
    let (a, b, l) = (2.0, 1.5, dep.lambda());
    for x in [0.0, 0.4, 2.0] {
        let sq = -l * (x - a / b) * 2.0 * x + (l / b) * x * 2.0;
        assert!((generator_apply(ProcessKind::SquaredOU, TestFunction::Square, x, p, dep).unwrap() - sq).abs() < 1e-12);
        let th = -0.7;
        let e = (th * x).exp() * (-l * (x - a / b) * th + (l / b) * x * th * th);
        let phi = TestFunction::exponential(th).unwrap();
        assert!((generator_apply(ProcessKind::SquaredOU, phi, x, p, dep).unwrap() - e).abs() < 1e-12);
    }
}

/// d/d eps at 0 of E[phi(B x + zeta)] with B ~ Be(alpha q, alpha (1 - q)),
/// zeta ~ Ga(alpha (1 - q), beta), q = exp(-lambda eps).
fn thinning_generator(phi: TestFunction, x: f64, alpha: f64, beta: f64, lambda: f64) -> f64 {
    match phi {
        TestFunction::Square => {
            // E B^2 = q (alpha q + 1) / (alpha + 1), E zeta = alpha p / beta,
            // E zeta^2 = alpha p (alpha p + 1) / beta^2
            -lambda * x * x * (2.0 * alpha + 1.0) / (alpha + 1.0)
                + 2.0 * alpha * lambda * x / beta
                + alpha * lambda / (beta * beta)
        }
        TestFunction::Exponential { theta } => {
            // E exp(z B) = M(alpha q, alpha, z) = e^z M(alpha p, alpha, -z), so
            // d/da M(a, alpha, z) at a = alpha is -e^z sum_k w^k / (k (alpha)_k), w = -z.
            let z = theta * x;
            let w = -z;
            let (mut ratio, mut sum) = (1.0, 0.0);
            for k in 1..2000 {
                ratio *= w / (alpha + (k - 1) as f64);
                sum += ratio / k as f64;
            }
            lambda * alpha * z.exp() * sum - alpha * lambda * z.exp() * (-theta / beta).ln_1p()
        }
        TestFunction::Identity => -lambda * (x - alpha / beta),
    }
}

#[test]
fn thinning_generator_matches_its_derivation() {
    for (a, b, r) in [(1.0, 1.0, 0.5), (2.0, 1.0, 0.5), (0.4, 3.0, 0.2), (6.0, 0.5, 0.9)] {
        let (p, dep) = (gp(a, b), rho(r));
        for x in [0.0, 0.3, 1.0, 2.0, 5.0] {
            for phi in [
                TestFunction::Identity,
                TestFunction::Square,
                TestFunction::exponential(-0.5).unwrap(),
                TestFunction::exponential(-2.0 * b).unwrap(),
            ] {
                let got = generator_apply(ProcessKind::ContinuouslyThinned, phi, x, p, dep).unwrap();
                let want = thinning_generator(phi, x, a, b, dep.lambda());
                assert!(
                    (got - want).abs() <= 1e-8 * want.abs().max(1.0),
                    "({a},{b},{r}) x={x} {phi:?}: {got} vs {want}"
                );
            }
        }
    }
}

#[test]
fn thinning_and_diffusion_generators_differ_by_lambda_on_the_square() {
    let (p, dep) = (gp(1.0, 1.0), rho(0.5));
    let ou = generator_apply(ProcessKind::SquaredOU, TestFunction::Square, 2.0, p, dep).unwrap();
    let ct = generator_apply(ProcessKind::ContinuouslyThinned, TestFunction::Square, 2.0, p, dep).unwrap();
    assert!((ct - ou + dep.lambda()).abs() < 1e-10);
}
