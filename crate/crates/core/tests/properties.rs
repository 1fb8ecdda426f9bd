//! Randomized invariants across the public API.

use jointex::dynamics::{Diagnostics, Trace};
use jointex::effective::{
    analytic_matching_frequency, chi_drive, chi_lambda, mechanical_effective_hamiltonian, Detunings, DriveDetunings,
    SECULAR_WINDOW_GHZ,
};
use jointex::export::trajectory_csv;
use jointex::model::{build_collapse_channels, build_static_hamiltonian, lambda_excitation_number, Relaxation};
use jointex::presets::{circuit_spec, lambda_spec, vee_spec};
use jointex::scan::search;
use jointex::{
    eig_herm, evolve_lindblad, evolve_schrodinger, expectation, propagator_expm, BareLabel, DimSignature,
    EvolveOptions, Level, Objective, OperatorMatrix, QuantumState, ScanSettings, SolverOptions, SolverStats,
    SystemSpec, TimeGrid, Trajectory, C64,
};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

fn config(cases: u32) -> ProptestConfig {
    ProptestConfig { cases, failure_persistence: None, ..ProptestConfig::default() }
}

fn complex_entries(n: usize) -> impl Strategy<Value = Vec<(f64, f64)>> {
    proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), n)
}

fn matrix(sig: &DimSignature, entries: &[(f64, f64)]) -> OperatorMatrix {
    let n = sig.total();
    let data = DMatrix::from_iterator(n, n, entries.iter().map(|&(re, im)| C64::new(re, im)));
    OperatorMatrix::new(sig.clone(), data).unwrap()
}

fn hermitian(sig: &DimSignature, entries: &[(f64, f64)]) -> OperatorMatrix {
    let a = matrix(sig, entries);
    a.add(&a.dagger()).unwrap().scale_real(0.5)
}

fn ket(sig: &DimSignature, amps: &[(f64, f64)]) -> Option<QuantumState> {
    let v = DVector::from_iterator(sig.total(), amps.iter().map(|&(re, im)| C64::new(re, im)));
    (v.norm() > 1e-3).then(|| QuantumState::ket_normalized(sig.clone(), v).unwrap())
}

fn label(s: &str) -> BareLabel {
    s.parse().unwrap()
}

fn resonant_lambda(g: [f64; 3]) -> SystemSpec {
    let spec = lambda_spec(8.2, g);
    let w = analytic_matching_frequency(&spec, &label("1gg"), &label("0ee")).unwrap();
    spec.with_cavity_frequency(w)
}

proptest! {
    #![proptest_config(config(64))]

    #[test]
    fn embedding_respects_products(a in complex_entries(9), b in complex_entries(9), slot in 1usize..3) {
        let local = DimSignature::single(3).unwrap();
        let full = DimSignature::new(vec![2, 3, 3, 2]).unwrap();
        let (a, b) = (matrix(&local, &a), matrix(&local, &b));
        let lhs = a.matmul(&b).unwrap().embed(slot, &full).unwrap();
        let rhs = a.embed(slot, &full).unwrap().matmul(&b.embed(slot, &full).unwrap()).unwrap();
        prop_assert!(lhs.sub(&rhs).unwrap().max_abs() <= 1e-12);
    }

    #[test]
    fn dagger_reverses_products(a in complex_entries(36), b in complex_entries(36)) {
        let sig = DimSignature::new(vec![2, 3]).unwrap();
        let (a, b) = (matrix(&sig, &a), matrix(&sig, &b));
        prop_assert_eq!(a.dagger().dagger(), a.clone());
        let lhs = a.matmul(&b).unwrap().dagger();
        let rhs = b.dagger().matmul(&a.dagger()).unwrap();
        prop_assert!(lhs.sub(&rhs).unwrap().max_abs() <= 1e-12);
    }

    #[test]
    fn hermitian_expectations_are_real(h in complex_entries(36), amps in complex_entries(6)) {
        let sig = DimSignature::new(vec![2, 3]).unwrap();
        let h = hermitian(&sig, &h);
        if let Some(psi) = ket(&sig, &amps) {
            prop_assert!(expectation(&h, &psi).unwrap().im.abs() <= 1e-10);
            prop_assert!(expectation(&h, &psi.to_density()).unwrap().im.abs() <= 1e-10);
        }
    }

    #[test]
    fn spectrum_is_unitarily_invariant(h in complex_entries(36), k in complex_entries(36), t in 0.1f64..5.0) {
        let sig = DimSignature::new(vec![2, 3]).unwrap();
        let h = hermitian(&sig, &h);
        let u = propagator_expm(&hermitian(&sig, &k), t).unwrap();
        let rotated = u.matmul(&h).unwrap().matmul(&u.dagger()).unwrap();
        let rotated = rotated.add(&rotated.dagger()).unwrap().scale_real(0.5);
        let (a, _) = eig_herm(&h).unwrap();
        let (b, _) = eig_herm(&rotated).unwrap();
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x - y).abs() <= 1e-9, "{} vs {}", x, y);
        }
    }
}

proptest! {
    #![proptest_config(config(32))]

    #[test]
    fn hamiltonians_are_hermitian(w_c in 7.0f64..9.0, gp in 0.0f64..0.3, gs in 0.0f64..0.3, g2 in 0.0f64..0.3, vee in any::<bool>()) {
        let spec = if vee { vee_spec(w_c, [gp, gs, g2]) } else { lambda_spec(w_c, [gp, gs, g2]) };
        let h = build_static_hamiltonian(&spec).unwrap();
        prop_assert!(h.is_hermitian(1e-12));
    }

    #[test]
    fn lambda_excitation_commutes(w_c in 7.0f64..9.0, gp in 0.0f64..0.3, gs in 0.0f64..0.3, g2 in 0.0f64..0.3) {
        let spec = lambda_spec(w_c, [gp, gs, g2]);
        let h = build_static_hamiltonian(&spec).unwrap();
        let n = lambda_excitation_number(&spec.layout().unwrap()).unwrap();
        prop_assert!(h.commutator(&n).unwrap().frobenius_norm() <= 1e-12 * h.frobenius_norm());
    }

    #[test]
    fn spec_round_trip_is_bit_identical(w_c in 7.0f64..9.0, scale in 0.1f64..2.0) {
        let spec = circuit_spec().with_cavity_frequency(w_c).scale_couplings(scale);
        let text = serde_json::to_string(&spec).unwrap();
        let back: SystemSpec = serde_json::from_str(&text).unwrap();
        prop_assert_eq!(build_static_hamiltonian(&spec).unwrap(), build_static_hamiltonian(&back).unwrap());
    }

    #[test]
    fn drive_formula_is_the_lambda_formula(eps in 0.01f64..0.3, gs in 0.01f64..0.3, g2 in 0.01f64..0.3,
                                           dp in 0.5f64..3.0, ds in -5.0f64..-0.5, d2 in -5.0f64..-0.5) {
        let lam = chi_lambda(eps, gs, g2, &Detunings { delta_p: dp, delta_s: ds, delta_2: d2 }).unwrap();
        let drv = chi_drive(eps, gs, g2, &DriveDetunings { delta_d: dp, delta_d_prime: 7.0, delta_s: ds, delta_2: d2 }).unwrap();
        prop_assert!((lam - drv).abs() <= 1e-15 * lam.abs().max(1e-300));
    }

    #[test]
    fn resonant_element_is_conjugate_symmetric(gp in 0.02f64..0.15, gs in 0.02f64..0.15, g2 in 0.02f64..0.15) {
        let spec = resonant_lambda([gp, gs, g2]);
        let layout = spec.layout().unwrap();
        let h = mechanical_effective_hamiltonian(&spec, SECULAR_WINDOW_GHZ).unwrap();
        let (a, b) = (layout.index_of(&label("1gg")).unwrap(), layout.index_of(&label("0ee")).unwrap());
        prop_assert!((h.get(a, b) - h.get(b, a).conj()).norm() <= 1e-12 * h.get(a, b).norm().max(1e-300));
    }
}

proptest! {
    #![proptest_config(config(8))]

    #[test]
    fn unitary_runs_keep_norm_and_excitation(gp in 0.05f64..0.2, gs in 0.05f64..0.2, g2 in 0.05f64..0.2) {
        let spec = lambda_spec(8.2, [gp, gs, g2]).with_n_max(2);
        let layout = spec.layout().unwrap();
        let mut opts = EvolveOptions::default();
        opts.keep_states = true;
        let tr = evolve_schrodinger(
            &build_static_hamiltonian(&spec).unwrap(), &[], &layout.bare_state(&label("1gg")).unwrap(),
            &TimeGrid::new(0.0, 10.0, 21).unwrap(), &[], &opts,
        ).unwrap();
        prop_assert!(tr.diagnostics.max_norm_drift <= 1e-8);
        let n = lambda_excitation_number(&layout).unwrap();
        for s in tr.states.as_ref().unwrap() {
            prop_assert!((expectation(&n, s).unwrap().re - 1.0).abs() <= 1e-8);
        }
    }

    #[test]
    fn master_equation_keeps_trace_and_positivity(kappa in 0.0f64..0.05, gamma in 0.0f64..0.05) {
        let mut spec = circuit_spec().with_n_max(1);
        spec.cavity.decay = kappa;
        spec.relaxation = vec![
            Relaxation { atom: 0, from: Level::E, to: Level::G, rate: gamma },
            Relaxation { atom: 1, from: Level::I, to: Level::E, rate: 0.5 * gamma },
        ];
        let layout = spec.layout().unwrap();
        let tr = evolve_lindblad(
            &build_static_hamiltonian(&spec).unwrap(), &[], &build_collapse_channels(&spec).unwrap(),
            &layout.bare_state(&label("1gg")).unwrap().to_density(), &TimeGrid::new(0.0, 10.0, 21).unwrap(), &[],
            &EvolveOptions::default(),
        ).unwrap();
        prop_assert!(tr.diagnostics.max_norm_drift <= 1e-8);
        prop_assert!(tr.diagnostics.min_eigenvalue >= -1e-8);
    }
}

fn trajectory(values: Vec<f64>) -> Trajectory {
    let sig = DimSignature::single(1).unwrap();
    Trajectory {
        times: (0..values.len()).map(|k| k as f64 * 0.5).collect(),
        traces: vec![Trace { name: "x".into(), values }],
        final_state: QuantumState::ket(sig, DVector::from_element(1, C64::new(1.0, 0.0))).unwrap(),
        states: None,
        stats: SolverStats::default(),
        diagnostics: Diagnostics::default(),
    }
}

proptest! {
    #![proptest_config(config(64))]

    #[test]
    fn csv_numbers_have_nine_digits(values in proptest::collection::vec(-1e6f64..1e6, 1..20)) {
        let text = trajectory_csv(&trajectory(values.clone())).unwrap();
        prop_assert!(!text.contains('\r'));
        prop_assert!(text.ends_with('\n'));
        for (line, v) in text.lines().skip(1).zip(&values) {
            let field = line.split(',').nth(1).unwrap();
            let mantissa = field.split('e').next().unwrap().trim_start_matches('-');
            prop_assert_eq!(mantissa.len(), 10, "{}", field);
            prop_assert_eq!(mantissa.as_bytes()[1], b'.');
            let parsed: f64 = field.parse().unwrap();
            prop_assert!((parsed - v).abs() <= 5e-9 * v.abs());
        }
        prop_assert_eq!(trajectory_csv(&trajectory(values)).unwrap(), text);
    }

    #[test]
    fn refinement_improves_monotonically(centre in 7.91f64..7.99, width in 0.002f64..0.05) {
        let mut settings = ScanSettings::new(7.9, 8.0, Objective::PeakTransfer, label("1gg"), label("0ee"));
        settings.points = 21;
        let f = |x: f64| Ok(1.0 / (1.0 + ((x - centre) / width).powi(2)));
        let r = search(f, &settings, true).unwrap();
        prop_assert!(r.refinement.windows(2).all(|w| w[1].objective >= w[0].objective));
        prop_assert!((r.best.omega - centre).abs() <= 1e-4);
        prop_assert_eq!(search(f, &settings, true).unwrap(), r);
    }
}

#[test]
fn solver_defaults_are_the_documented_ones() {
    let s = SolverOptions::default();
    assert_eq!((s.rtol, s.atol), (1e-9, 1e-12));
}
