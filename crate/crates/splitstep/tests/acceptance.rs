//! Acceptance suite: one test per release criterion, each printing a
//! pass/fail line with its runtime. Run with `--nocapture` to see them:
//!
//! ```text
//! cargo test -p splitstep --test acceptance -- --nocapture
//! ```

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use num_complex::Complex64 as C64;
use splitstep::distill::{boundary_window, distill_similarity};
use splitstep::edge::{decay_rate, edge_state, verify_eigen};
use splitstep::interferometry::{
    analytic_readout, make_plan, monte_carlo, monte_carlo_report, run_protocol, standard_runs,
    McConfig, RunConditions, DEFAULT_ANGLE_SIGMA, DEFAULT_COUPLING_SIGMA,
};
use splitstep::topology::{check_chiral_symmetry, winding_number};
use splitstep::{walk_step, CoinSchedule, Error, Polarization, Setting, Spinor, WalkerState};

struct Criterion {
    label: &'static str,
    budget: Duration,
    started: Instant,
}

impl Criterion {
    fn start(label: &'static str, budget: Duration) -> Self {
        Self { label, budget, started: Instant::now() }
    }

    fn pass(self) {
        let elapsed = self.started.elapsed();
        println!("[acceptance] {}: PASS in {:.3?}", self.label, elapsed);
        assert!(
            elapsed <= self.budget,
            "[acceptance] {}: exceeded budget {:?} with {:?}",
            self.label,
            self.budget,
            elapsed
        );
    }
}

fn mix(state: &mut u64) -> f64 {
    *state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z = z ^ (z >> 31);
    2.0 * ((z >> 11) as f64 / (1u64 << 53) as f64) - 1.0
}

fn random_state(seed: &mut u64) -> WalkerState {
    let entries: Vec<(i64, Spinor)> = (-5..=5)
        .map(|x| {
            (
                2 * x,
                Spinor::new(
                    C64::new(mix(seed), mix(seed)),
                    C64::new(mix(seed), mix(seed)),
                ),
            )
        })
        .collect();
    WalkerState::from_amplitudes(entries).renormalized().unwrap()
}

#[test]
fn criterion_1_symmetry_index() {
    let c = Criterion::start("1 symmetry index of both settings", Duration::from_secs(1));
    let w_a = winding_number(0.0, std::f64::consts::FRAC_PI_4, 256).unwrap();
    let w_b = winding_number(0.0, 3.0 * std::f64::consts::FRAC_PI_4, 256).unwrap();
    assert_eq!(w_a, -1);
    assert_eq!(w_b, -1);
    c.pass();
}

#[test]
fn criterion_2_chiral_symmetry_residual() {
    let c = Criterion::start("2 chiral symmetry residual", Duration::from_secs(1));
    let mut seed = 0xc2u64;
    for _ in 0..50 {
        let theta1 = std::f64::consts::PI * mix(&mut seed);
        let theta2 = std::f64::consts::PI * mix(&mut seed);
        let residual = check_chiral_symmetry(theta1, theta2, 256);
        assert!(
            residual <= 1e-12,
            "residual {residual} at ({theta1}, {theta2})"
        );
    }
    c.pass();
}

#[test]
fn criterion_3_edge_eigenpairs() {
    let c = Criterion::start("3 edge eigenpairs", Duration::from_secs(1));
    let mu_expect = 1.0 - std::f64::consts::SQRT_2;
    for (setting, lambda) in [(Setting::A, -1.0), (Setting::B, 1.0)] {
        let (spec, _) = edge_state(setting, 60).unwrap();
        assert_eq!(spec.eigenvalue, lambda);
        assert!((spec.decay - mu_expect).abs() <= 1e-12);
        assert!(spec.decay.abs() < 1.0);
        let residual = verify_eigen(setting, 60).unwrap();
        assert!(residual <= 1e-10, "{setting}: residual {residual}");
    }
    // The rejected chirality branch is not normalizable.
    assert!(decay_rate(1.0, 1.0, Setting::A.theta2()).unwrap().abs() > 1.0);
    c.pass();
}

#[test]
fn criterion_4_distillation_similarity() {
    let c = Criterion::start("4 distillation similarity", Duration::from_secs(1));
    let window = boundary_window();
    let step6 = distill_similarity(Setting::A, 6, &window).unwrap();
    let step8 = distill_similarity(Setting::A, 8, &window).unwrap();
    assert!(step6 >= 0.86, "step 6 similarity {step6}");
    assert!(step8 > 0.98, "step 8 similarity {step8}");
    for steps in [6u32, 8] {
        let a = distill_similarity(Setting::A, steps, &window).unwrap();
        let b = distill_similarity(Setting::B, steps, &window).unwrap();
        assert!((a - b).abs() <= 1e-12, "settings differ at step {steps}");
    }
    c.pass();
}

#[test]
fn criterion_5_eigenvalue_signature() {
    let c = Criterion::start("5 eigenvalue signature", Duration::from_secs(30));
    // Full ideal sweep; the (step 7, position 2, V) runs carry exactly
    // zero walker amplitude and are the only permitted vanishing rows.
    let mut m_values: BTreeMap<(Setting, u32, u32, Polarization), f64> = BTreeMap::new();
    for (setting, step, position, pol) in standard_runs() {
        let plan = make_plan(setting, step, position, pol).unwrap();
        match run_protocol(&plan, &RunConditions::ideal()) {
            Ok(outcome) => {
                m_values.insert((setting, step, position, pol), outcome.m);
            }
            Err(Error::VanishingComponent { .. }) => {
                assert!(step == 7 && position == 2 && pol == Polarization::V);
            }
            Err(other) => panic!("unexpected error: {other}"),
        }
    }
    let m = |s, st, p, pol| m_values[&(s, st, p, pol)];
    for pol in [Polarization::H, Polarization::V] {
        for position in [0u32, 1] {
            if position == 1 && pol == Polarization::V {
                continue;
            }
            let a: Vec<f64> = (6..=8).map(|s| m(Setting::A, s, position, pol)).collect();
            assert!(a[0].signum() == -a[1].signum() && a[1].signum() == -a[2].signum(),
                "setting A signs fail to alternate at position {position} {pol}: {a:?}");
            let b: Vec<f64> = (6..=8).map(|s| m(Setting::B, s, position, pol)).collect();
            assert!(b[0].signum() == b[1].signum() && b[1].signum() == b[2].signum(),
                "setting B signs not constant at position {position} {pol}: {b:?}");
        }
    }
    // Position 1, V: readable and signature-bearing through step 7; the
    // step-8 run falls below the Monte Carlo noise floor.
    let a_v1: Vec<f64> = (6..=7).map(|s| m(Setting::A, s, 1, Polarization::V)).collect();
    assert!(a_v1[0].signum() == -a_v1[1].signum());
    let unreadable = make_plan(Setting::A, 8, 1, Polarization::V).unwrap();
    assert!(matches!(
        monte_carlo(&unreadable, &McConfig { samples: 8, ..McConfig::new(1) }),
        Err(Error::VanishingComponent { .. })
    ));
    c.pass();
}

#[test]
fn criterion_6_oracle_equivalence() {
    let c = Criterion::start("6 oracle equivalence of the two readout routes", Duration::from_secs(30));
    for (setting, step, position, pol) in standard_runs() {
        let plan = make_plan(setting, step, position, pol).unwrap();
        let protocol = run_protocol(&plan, &RunConditions::ideal());
        let direct = analytic_readout(&plan);
        match (protocol, direct) {
            (Ok(p), Ok(d)) => assert!(
                (p.m - d.m).abs() <= 1e-10,
                "{setting} s{step} p{position} {pol}: {} vs {}",
                p.m,
                d.m
            ),
            (Err(Error::VanishingComponent { .. }), Err(Error::VanishingComponent { .. })) => {
                assert!(step == 7 && position == 2 && pol == Polarization::V);
            }
            other => panic!("routes disagree: {other:?}"),
        }
    }
    c.pass();
}

#[test]
fn criterion_7_monte_carlo_error_ordering() {
    let c = Criterion::start("7 Monte Carlo error ordering", Duration::from_secs(300));
    let config = McConfig::new(0x5eed);
    assert_eq!(config.samples, 1000);
    assert_eq!(config.coupling_sigma, DEFAULT_COUPLING_SIGMA);
    assert_eq!(config.angle_sigma, DEFAULT_ANGLE_SIGMA);

    // Error grows toward the outer position and the weaker polarization.
    // The position comparison uses the horizontal component; the vertical
    // one at position 1 sits too close to the noise floor for every
    // perturbed sample to stay quantifiable.
    let error_of = |setting, step, position, pol| {
        let plan = make_plan(setting, step, position, pol).unwrap();
        monte_carlo(&plan, &config).unwrap().m_error
    };
    let h0 = error_of(Setting::A, 7, 0, Polarization::H);
    let h1 = error_of(Setting::A, 7, 1, Polarization::H);
    assert!(h1 > h0, "position-1 error {h1} not above position-0 error {h0}");
    let v0 = error_of(Setting::A, 7, 0, Polarization::V);
    assert!(v0 > h0, "V error {v0} not above H error {h0}");

    // The A/B signature at position 0 survives the drawn errors in at
    // least 95 % of samples, pairing draws by sample index.
    for pol in [Polarization::H, Polarization::V] {
        let report = |setting, step| {
            let plan = make_plan(setting, step, 0, pol).unwrap();
            monte_carlo_report(&plan, &config).unwrap()
        };
        let a: Vec<_> = (6..=8).map(|s| report(Setting::A, s)).collect();
        let b: Vec<_> = (6..=8).map(|s| report(Setting::B, s)).collect();
        let mut hold = 0usize;
        for i in 0..config.samples {
            let alternating = a[0].samples[i].signum() == -a[1].samples[i].signum()
                && a[1].samples[i].signum() == -a[2].samples[i].signum();
            let constant = b[0].samples[i].signum() == b[1].samples[i].signum()
                && b[1].samples[i].signum() == b[2].samples[i].signum();
            if alternating && constant {
                hold += 1;
            }
        }
        let fraction = hold as f64 / config.samples as f64;
        assert!(fraction >= 0.95, "{pol}: signature held for only {fraction}");
    }
    c.pass();
}

#[test]
fn criterion_8_invariant_suites() {
    let c = Criterion::start("8 invariant suites", Duration::from_secs(120));
    let mut seed = 0x001a_5ec8u64;

    // Unitarity over 100 random states and schedules.
    for _ in 0..100 {
        let theta2 = std::f64::consts::PI * mix(&mut seed);
        let mut theta1_map = BTreeMap::new();
        theta1_map.insert(-1, std::f64::consts::PI * mix(&mut seed));
        let schedule = CoinSchedule::custom(theta2, theta1_map).unwrap();
        let state = random_state(&mut seed);
        let out = walk_step(&state, &schedule);
        assert!((out.norm2() - 1.0).abs() <= 1e-12);
    }

    // Linearity.
    let schedule = CoinSchedule::setting(Setting::A);
    for _ in 0..20 {
        let psi = random_state(&mut seed);
        let phi = random_state(&mut seed);
        let a = C64::new(mix(&mut seed), mix(&mut seed));
        let b = C64::new(mix(&mut seed), mix(&mut seed));
        let left = walk_step(&psi.scaled(a).add(&phi.scaled(b)), &schedule);
        let right = walk_step(&psi, &schedule).scaled(a).add(&walk_step(&phi, &schedule).scaled(b));
        assert!(left.distance(&right) <= 1e-12);
    }

    // Sub-lattice parity and decoupling zero-leakage.
    for setting in [Setting::A, Setting::B] {
        let schedule = CoinSchedule::setting(setting);
        let mut state = WalkerState::delta(0, Polarization::H);
        for _ in 0..10 {
            state = walk_step(&state, &schedule);
            for (x, sp) in state.iter() {
                assert_eq!(x.rem_euclid(2), 0, "odd-site amplitude");
                if *x <= -2 {
                    assert!(sp.norm_sqr().sqrt() <= 1e-14, "leak at {x}");
                }
            }
        }
    }

    // Exponential decay slope of the analytic state.
    let slope_expect = 2.0 * (std::f64::consts::SQRT_2 - 1.0).ln();
    let (_, state) = edge_state(Setting::A, 60).unwrap();
    for x in [0i64, 2, 4, 6] {
        let slope = state.amplitude(x + 2).norm_sqr().ln() - state.amplitude(x).norm_sqr().ln();
        assert!((slope - slope_expect).abs() <= 1e-9);
    }

    // Two-step invariance.
    for setting in [Setting::A, Setting::B] {
        let schedule = CoinSchedule::setting(setting);
        let (_, state) = edge_state(setting, 60).unwrap();
        let twice = walk_step(&walk_step(&state, &schedule), &schedule);
        assert!(twice.distance(&state) <= 1e-10);
    }
    c.pass();
}
