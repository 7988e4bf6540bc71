mod common;

use grounding::control::{closed_loop_radius, design_gain, AgentDynamics, Gain, MareOptions};
use grounding::graph::generate_expander;
use grounding::sim::{
    consensus_metrics, max_pairwise_deviation, simulate, steady_state, Event, GroundingEvent,
    GroundingForm, SimOptions,
};
use grounding::spectral::{random_walk_laplacian, spectral_summary};
use grounding::Graph;
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Random 2x2 `A` with spectral radius at most `max_radius`, `B = e2`,
/// rejecting uncontrollable pairs.
fn random_dynamics<R: Rng>(rng: &mut R, max_radius: f64) -> AgentDynamics {
    loop {
        let a = DMatrix::from_fn(2, 2, |_, _| rng.random_range(-1.5..1.5));
        let r = a
            .complex_eigenvalues()
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        if r < 1e-3 || a[(0, 1)].abs() < 0.1 {
            continue;
        }
        let a = a * (rng.random_range(0.3..max_radius) / r);
        if let Ok(d) = AgentDynamics::new(a, DVector::from_vec(vec![0.0, 1.0])) {
            return d;
        }
    }
}

fn random_states<R: Rng>(rng: &mut R, n: usize) -> Vec<Vec<f64>> {
    (0..n)
        .map(|_| vec![rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)])
        .collect()
}

fn nonzero_spectrum(g: &Graph) -> Vec<f64> {
    spectral_summary(g).unwrap().eigenvalues
}

#[test]
fn spectral_prediction_on_both_sides() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let (mut converging, mut diverging) = (0, 0);
    let mut tries = 0;
    while converging < 50 || diverging < 50 {
        tries += 1;
        assert!(tries < 20_000, "could not sample enough instances");
        let n = rng.random_range(6..=14);
        let g = common::random_connected(n, 0.45, &mut rng);
        let dyn_ = random_dynamics(&mut rng, 1.05);
        let k = Gain::from_row_slice(&[rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.5)]);
        let r = closed_loop_radius(&dyn_, &k, &nonzero_spectrum(&g), true);
        let converges = r <= 0.95;
        if !(converges || r >= 1.05)
            || (converges && converging >= 50)
            || (!converges && diverging >= 50)
        {
            continue;
        }
        let x0 = random_states(&mut rng, n);
        let t = simulate(&g, &dyn_, &k, &x0, 400, &[], &SimOptions::default()).unwrap();
        let m = consensus_metrics(&t, 1e-9);
        let (first, last) = (m.deviation[0], *m.deviation.last().unwrap());
        if converges {
            converging += 1;
            assert!(
                last < 1e-6 * first,
                "radius {r}: deviation {first} -> {last}"
            );
        } else {
            diverging += 1;
            assert!(
                last > 1e4 * first,
                "radius {r}: deviation {first} -> {last}"
            );
        }
    }
}

#[test]
fn decay_rate_matches_closed_loop_radius() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut checked = 0;
    while checked < 30 {
        let n = rng.random_range(6..=12);
        let g = common::random_connected(n, 0.5, &mut rng);
        let dyn_ = random_dynamics(&mut rng, 1.0);
        let k = Gain::from_row_slice(&[rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.5)]);
        let r = closed_loop_radius(&dyn_, &k, &nonzero_spectrum(&g), true);
        if !(0.5..0.95).contains(&r) {
            continue;
        }
        // stay well above the round-off floor of the consensus component
        let end = ((1e-10f64).ln() / r.ln()).ceil() as usize;
        let start = end / 2;
        let x0 = random_states(&mut rng, n);
        let t = simulate(&g, &dyn_, &k, &x0, end, &[], &SimOptions::default()).unwrap();
        let m = consensus_metrics(&t, 0.0);
        let rate = m.decay_rate(start, end).unwrap();
        assert!(
            (rate - r).abs() <= 0.05 * r,
            "radius {r}, observed rate {rate}"
        );
        checked += 1;
    }
}

#[test]
fn recorded_steps_satisfy_the_stacked_recursion() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..10 {
        let n = rng.random_range(5..=10);
        let g = common::random_connected(n, 0.4, &mut rng);
        let dyn_ = random_dynamics(&mut rng, 1.0);
        let k = Gain::from_row_slice(&[rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)]);
        let x0 = random_states(&mut rng, n);
        let t = simulate(&g, &dyn_, &k, &x0, 20, &[], &SimOptions::default()).unwrap();

        let l = random_walk_laplacian(&g).unwrap();
        let bk = dyn_.b() * &k;
        let m = DMatrix::identity(n, n).kronecker(dyn_.a()) - l.kronecker(&bk);
        for s in 0..20 {
            let x = DVector::from_column_slice(&t.states[s]);
            let next = &m * x;
            let scale = next.amax().max(1.0);
            let diff = (next - DVector::from_column_slice(&t.states[s + 1])).amax();
            assert!(diff < 1e-12 * scale, "step {s}: {diff}");
        }
    }
}

#[test]
fn grounded_phase_follows_reduced_recursion() {
    // after a FixState grounding, remaining nodes obey
    // x̄(k+1) = (I ⊗ A - L̄ ⊗ BK) x̄(k) + (Λ ⊗ BK) x_g
    let g = generate_expander(12, 4, 0.2, 3).unwrap().graph;
    let dyn_ = AgentDynamics::double_integrator();
    let k = Gain::from_row_slice(&[0.14, 0.9]);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let x0 = random_states(&mut rng, 12);
    let c = [0.5, -0.25];
    let ev = Event::Ground(GroundingEvent {
        time: 0,
        nodes: vec![1],
        form: GroundingForm::FixState {
            c_bar: Some(c.to_vec()),
        },
    });
    let t = simulate(&g, &dyn_, &k, &x0, 10, &[ev], &SimOptions::default()).unwrap();

    let l = random_walk_laplacian(&g).unwrap();
    let lbar = l.view((1, 1), (11, 11)).clone_owned();
    let lambda = -l.view((1, 0), (11, 1)).clone_owned();
    let bk = dyn_.b() * &k;
    let m = DMatrix::identity(11, 11).kronecker(dyn_.a()) - lbar.kronecker(&bk);
    let forcing = lambda.kronecker(&(&bk * DVector::from_column_slice(&c)));
    for s in 1..10 {
        let xbar = DVector::from_column_slice(&t.states[s][2..]);
        let next = &m * xbar + &forcing;
        assert!((next - DVector::from_column_slice(&t.states[s + 1][2..])).amax() < 1e-12);
        assert_eq!(&t.states[s][..2], &c);
    }
}

#[test]
fn steady_states_match_long_runs() {
    let dyn_ = AgentDynamics::double_integrator();
    let k = design_gain(
        &dyn_,
        0.3,
        1.0,
        Some(0.8),
        Some(0.85),
        &MareOptions::default(),
    )
    .unwrap()
    .k;
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    for seed in 0..4 {
        let g = generate_expander(20, 6, 0.3, seed).unwrap().graph;
        let forms = [
            GroundingForm::FixState {
                c_bar: Some(vec![rng.random_range(-2.0..2.0), 0.0]),
            },
            GroundingForm::Takeover {
                k1: k.iter().copied().collect(),
                c1: rng.random_range(-2.0..2.0),
            },
        ];
        for form in forms {
            let ev = GroundingEvent {
                time: 0,
                nodes: vec![1 + seed as usize],
                form,
            };
            let ss = steady_state(&g, &dyn_, &k, &ev).unwrap();
            let x0 = random_states(&mut rng, 20);
            let t = simulate(
                &g,
                &dyn_,
                &k,
                &x0,
                10_000,
                &[Event::Ground(ev)],
                &SimOptions {
                    stride: 1000,
                    reference: None,
                },
            )
            .unwrap();
            let gap = t
                .final_state()
                .iter()
                .zip(&ss)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            assert!(gap < 1e-6, "gap {gap}");
        }
    }
}

#[test]
fn non_schur_grounding_has_no_steady_state() {
    let dyn_ = AgentDynamics::from_rows(&[vec![1.07, 1.0], vec![0.0, 1.0]], &[0.0, 1.0]).unwrap();
    let k = Gain::from_row_slice(&[0.1777, 0.9649]);
    let ev = GroundingEvent {
        time: 0,
        nodes: vec![1],
        form: GroundingForm::FixState {
            c_bar: Some(vec![0.0, 0.0]),
        },
    };
    let r = steady_state(&Graph::path(30), &dyn_, &k, &ev);
    assert!(matches!(r, Err(grounding::Error::NoSteadyState(_))));
}

#[test]
fn stride_samples_agree_with_full_run() {
    let g = generate_expander(20, 6, 0.3, 1).unwrap().graph;
    let dyn_ = AgentDynamics::double_integrator();
    let k = Gain::from_row_slice(&[0.1424, 0.9065]);
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let x0 = random_states(&mut rng, 20);
    let full = simulate(&g, &dyn_, &k, &x0, 100, &[], &SimOptions::default()).unwrap();
    let strided = simulate(
        &g,
        &dyn_,
        &k,
        &x0,
        100,
        &[],
        &SimOptions {
            stride: 7,
            reference: None,
        },
    )
    .unwrap();
    for (s, &time) in strided.times.iter().enumerate() {
        assert_eq!(strided.states[s], full.states[time]);
    }
    assert_eq!(
        max_pairwise_deviation(full.final_state(), 2),
        max_pairwise_deviation(strided.final_state(), 2)
    );
}
