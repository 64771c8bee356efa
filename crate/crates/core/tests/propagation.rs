// Copyright 2026 The spinchain-control Authors
// SPDX-License-Identifier: Apache-2.0

use std::sync::Arc;

use nalgebra::DMatrix;
use proptest::prelude::*;
use spinchain_control::linalg::{max_abs_diff, C64};
use spinchain_control::propagation::{
    evolve_sequence, gate_fidelity, product_formula_evolve, ControlField, SampledField,
};
use spinchain_control::{ChainSpec, ControlMode, ControlSequence, UnitaryMatrix};

fn mode_strategy() -> impl Strategy<Value = ControlMode> {
    prop_oneof![Just(ControlMode::AlternatingXy), Just(ControlMode::XOnly)]
}

fn sequence_strategy() -> impl Strategy<Value = ControlSequence> {
    (1usize..=4, mode_strategy(), 1usize..=12, 0.01f64..2.0).prop_flat_map(|(n, mode, half, t)| {
        let pulses = 2 * half;
        prop::collection::vec(-10.0f64..10.0, pulses).prop_map(move |amps| {
            ControlSequence::new(ChainSpec::with_spins(n).unwrap(), mode, t, amps).unwrap()
        })
    })
}

fn random_unitary(d: usize, seed: u64) -> UnitaryMatrix {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let m = DMatrix::from_fn(d, d, |_, _| C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5));
    UnitaryMatrix::new(m.qr().q()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn evolution_is_unitary(seq in sequence_strategy()) {
        let u = evolve_sequence(&seq).unwrap();
        prop_assert!(u.unitarity_deviation() < 1e-10, "deviation {}", u.unitarity_deviation());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn splitting_a_sequence_composes(seq in sequence_strategy(), half_cut in 1usize..12) {
        // even cuts keep the x/y pattern of the tail aligned
        let n = seq.n_pulses();
        let cut = 2 * half_cut;
        prop_assume!(cut < n);
        let head = ControlSequence { amplitudes: seq.amplitudes[..cut].to_vec(), ..seq.clone() };
        let tail = ControlSequence { amplitudes: seq.amplitudes[cut..].to_vec(), ..seq.clone() };
        let whole = evolve_sequence(&seq).unwrap();
        let composed = evolve_sequence(&tail).unwrap().compose(&evolve_sequence(&head).unwrap());
        prop_assert!(max_abs_diff(whole.as_matrix(), composed.as_matrix()) < 1e-12);
    }

    #[test]
    fn fidelity_is_symmetric_and_left_invariant(d_exp in 1u32..=3, a in any::<u64>(), b in any::<u64>(), c in any::<u64>(), phi in -3.0f64..3.0) {
        let d = 2usize.pow(d_exp);
        let (u, v, w) = (random_unitary(d, a), random_unitary(d, b), random_unitary(d, c));
        let f = gate_fidelity(&u, &v).unwrap();
        prop_assert!((f - gate_fidelity(&v, &u).unwrap()).abs() < 1e-13);
        prop_assert!((f - gate_fidelity(&w.compose(&u), &w.compose(&v)).unwrap()).abs() < 1e-12);
        prop_assert!((f - gate_fidelity(&u.with_phase(phi), &v).unwrap()).abs() < 1e-13);
        prop_assert!((0.0..=1.0 + 1e-14).contains(&f));
    }

    #[test]
    fn product_formula_exact_on_piecewise_constant(seq in sequence_strategy(), m in 1usize..6) {
        let exact = evolve_sequence(&seq).unwrap();
        let sf = SampledField::new(Arc::new(seq.clone()), m).unwrap();
        let pf = product_formula_evolve(&sf, &seq.spec).unwrap();
        prop_assert!(max_abs_diff(exact.as_matrix(), pf.as_matrix()) < 1e-12 * (seq.n_pulses() * m) as f64);
    }
}

struct SmoothField;

impl ControlField for SmoothField {
    fn total_time(&self) -> f64 {
        4.0
    }
    fn pulse_duration(&self) -> f64 {
        0.5
    }
    fn n_pulses(&self) -> usize {
        8
    }
    fn eval(&self, t: f64) -> [f64; 2] {
        [1.5 * t.sin(), 0.8 * (0.7 * t).cos()]
    }
}

#[test]
fn product_formula_error_shrinks_with_step() {
    let spec = ChainSpec::with_spins(3).unwrap();
    let field: Arc<dyn ControlField> = Arc::new(SmoothField);
    let reference = product_formula_evolve(&SampledField::new(field.clone(), 4096).unwrap(), &spec).unwrap();
    let errors: Vec<f64> = [16, 32, 64, 128]
        .iter()
        .map(|&m| {
            let u = product_formula_evolve(&SampledField::new(field.clone(), m).unwrap(), &spec).unwrap();
            max_abs_diff(u.as_matrix(), reference.as_matrix())
        })
        .collect();
    for w in errors.windows(2) {
        // at least first order: halving τ at least ~halves the error
        assert!(w[1] < 0.6 * w[0], "{errors:?}");
    }
}

#[test]
fn product_formula_rejects_non_dividing_step() {
    let field: Arc<dyn ControlField> = Arc::new(SmoothField);
    assert!(SampledField::with_step(field.clone(), 0.3).is_err());
    assert_eq!(SampledField::with_step(field, 0.125).unwrap().steps_per_pulse(), 4);
}

#[test]
fn product_formula_unitary_at_every_length() {
    let spec = ChainSpec::with_spins(2).unwrap();
    for m in 1..=40 {
        let u = product_formula_evolve(&SampledField::new(Arc::new(SmoothField), m).unwrap(), &spec).unwrap();
        assert!(u.unitarity_deviation() < 1e-10);
    }
}
