//! Property-based invariants: channel algebra, normalization sums, physical
//! bounds on prepared states, and calibration round trips over randomly
//! drawn parameters.

use kitten_core::calibration::{
    estimate_pure_squeezing, estimate_total_impurity, forward_measured_variance, split_impurity,
};
use kitten_core::fock::{
    impure_squeezed_vacuum, loss_channel, photon_distribution, squeezed_vacuum_dm, wigner_origin,
    DensityMatrix, SqueezedVacuumSpec,
};
use kitten_core::presets::PRESETS;
use kitten_core::subtraction::{
    bayes_weights, detector_response, pnrd_state, prepare_kitten_detailed,
    subtraction_probabilities, DetectorModel, ExperimentParams,
};
use kitten_core::witness::state_p0p1;
use kitten_core::Error;
use nalgebra::DMatrix;
use proptest::prelude::*;

/// Random mixed state: a convex combination of a few random pure states.
/// Entry (l,n) and (n,l) are accumulated as identical products in identical
/// order, so the matrix is bitwise symmetric.
fn density_from_seeds(dim: usize, seeds: &[Vec<f64>], weights: &[f64]) -> DensityMatrix {
    let mut mat = DMatrix::zeros(dim, dim);
    let mut total = 0.0;
    for (v, &w) in seeds.iter().zip(weights) {
        let norm2: f64 = v.iter().map(|x| x * x).sum();
        total += w * norm2;
    }
    assert!(total > 0.0);
    for (v, &w) in seeds.iter().zip(weights) {
        for l in 0..dim {
            for n in 0..dim {
                mat[(l, n)] += w * v[l] * v[n] / total;
            }
        }
    }
    DensityMatrix::from_parts(mat, 0.0).expect("constructed state is valid")
}

fn arb_density(max_dim: usize) -> impl Strategy<Value = DensityMatrix> {
    (2..=max_dim).prop_flat_map(|dim| {
        (
            proptest::collection::vec(
                proptest::collection::vec(-1.0..1.0f64, dim)
                    .prop_filter("seed vector must not be numerically null", |v| {
                        v.iter().map(|x| x * x).sum::<f64>() > 1e-3
                    }),
                1..4,
            ),
            proptest::collection::vec(0.05..1.0f64, 3),
        )
            .prop_map(move |(seeds, weights)| density_from_seeds(dim, &seeds, &weights))
    })
}

fn arb_detector() -> impl Strategy<Value = DetectorModel> {
    (0.0..0.01f64, 0.02..=1.0f64, any::<bool>(), 1..=2usize).prop_map(|(pdc, eta, resolving, m)| {
        DetectorModel::imperfect(pdc, eta, resolving)
            .expect("drawn within range")
            .with_clicks(m)
            .expect("m >= 1")
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn loss_semigroup_composes(rho in arb_density(14), eta1 in 0.0..=1.0f64, eta2 in 0.0..=1.0f64) {
        let sequential = loss_channel(&loss_channel(&rho, eta1), eta2);
        let combined = loss_channel(&rho, eta1 * eta2);
        let diff = (sequential.matrix() - combined.matrix()).amax();
        prop_assert!(diff <= 1e-10, "semigroup violated by {diff:.3e}");
        prop_assert!((sequential.trace() - rho.trace()).abs() <= 1e-10);
    }

    #[test]
    fn input_impurity_is_a_loss_channel(v0_db in -6.0..-0.2f64, r1 in 0.0..0.9f64) {
        let spec = SqueezedVacuumSpec::from_v0_db(v0_db, 24).unwrap();
        let impure = impure_squeezed_vacuum(&spec, r1).unwrap();
        let lossy = loss_channel(&squeezed_vacuum_dm(&spec).unwrap(), 1.0 - r1);
        let diff = (impure.matrix() - lossy.matrix()).amax();
        prop_assert!(diff <= 1e-14);
        prop_assert!((impure.trace_deficit() - lossy.trace_deficit()).abs() <= 1e-14);
    }

    #[test]
    fn subtraction_weights_sum_to_input_trace(rho in arb_density(14), r2 in 0.01..0.5f64) {
        let total: f64 = subtraction_probabilities(&rho, r2).iter().sum();
        prop_assert!((total - rho.trace()).abs() <= 1e-6, "sum {total} vs trace {}", rho.trace());
    }

    #[test]
    fn posterior_weights_normalize(rho in arb_density(12), r2 in 0.01..0.3f64, det in arb_detector()) {
        // A state with vanishing click probability is a legal draw; only the
        // successful posterior must normalize.
        if let Ok(weights) = bayes_weights(&rho, r2, &det, det.clicks()) {
            let total: f64 = weights.iter().sum();
            prop_assert!((total - 1.0).abs() <= 1e-8, "posterior sums to {total}");
            prop_assert!(weights.iter().all(|&w| w >= 0.0));
        }
    }

    #[test]
    fn vacuum_and_single_photon_probabilities_stay_physical(
        rho in arb_density(10),
        s in 0.0..0.8f64,
    ) {
        // High-lying random states can legitimately overflow the truncation
        // budget under anti-squeezing; only successful evaluations are bound.
        match state_p0p1(&rho, s) {
            Ok((p0, p1)) => {
                prop_assert!(p0 >= 0.0 && p1 >= 0.0);
                prop_assert!(p0 + p1 <= 1.0 + 1e-9, "p0+p1 = {}", p0 + p1);
            }
            Err(Error::TruncationOverflow { .. }) => {}
            Err(other) => return Err(TestCaseError::fail(format!("unexpected error: {other}"))),
        }
    }

    #[test]
    fn prepared_kittens_are_physical(
        v0_db in -6.0..-0.5f64,
        r1 in 0.0..0.5f64,
        r2 in 0.02..0.3f64,
        mode_purity in 0.3..=1.0f64,
        eta_hd in 0.3..=1.0f64,
        det in arb_detector(),
    ) {
        let spec = SqueezedVacuumSpec::from_v0_db(v0_db, 24).unwrap();
        let params = ExperimentParams::new(spec, r1, r2, mode_purity, eta_hd).unwrap();
        match prepare_kitten_detailed(&params, &det) {
            Ok(prep) => {
                prep.state.check_physical(1e-9).expect("prepared state must be physical");
                prop_assert!(prep.herald_probability > 0.0 && prep.herald_probability <= 1.0);
                prop_assert!(prep.state.trace() <= 1.0 + 1e-9);
                let w00 = wigner_origin(&prep.state);
                prop_assert!(w00.abs() <= 1.0 / std::f64::consts::PI + 1e-9);
                let dist = photon_distribution(&prep.state);
                prop_assert!(dist.iter().all(|&p| p >= -1e-12));
            }
            Err(Error::ImpossibleHerald { .. }) | Err(Error::NoEvent(_)) => {}
            Err(other) => return Err(TestCaseError::fail(format!("unexpected error: {other}"))),
        }
    }

    #[test]
    fn calibration_round_trips(
        v_pure in 0.05..0.95f64,
        r_total in 0.0..0.9f64,
        eta_hd in 0.2..=1.0f64,
    ) {
        let v_sqz = forward_measured_variance(v_pure, r_total, eta_hd);
        let v_asqz = forward_measured_variance(1.0 / v_pure, r_total, eta_hd);
        let v_back = estimate_pure_squeezing(v_sqz, v_asqz).unwrap();
        prop_assert!((v_back - v_pure).abs() <= 1e-9 * v_pure.max(1.0));
        let r_back = estimate_total_impurity(v_sqz, v_asqz, eta_hd).unwrap();
        prop_assert!((r_back - r_total).abs() <= 1e-9);
    }

    #[test]
    fn impurity_split_inverts_composition(r1 in 0.0..0.95f64, r2 in 0.001..0.95f64) {
        let r_total = 1.0 - (1.0 - r1) * (1.0 - r2);
        let back = split_impurity(r_total, r2).unwrap();
        prop_assert!((back - r1).abs() <= 1e-12);
    }
}

#[test]
fn detector_response_normalizes_over_click_counts() {
    // Dark counts are Poisson with rates ≤ 1e-4, so the click distribution's
    // support is numerically exhausted well before m = k + 10.
    for preset in PRESETS {
        for resolving in [true, false] {
            let det = preset.to_model(resolving);
            for k in 0..=12usize {
                let total: f64 = (0..=k + 10).map(|m| detector_response(k, m, &det)).sum();
                assert!(
                    (total - 1.0).abs() <= 1e-8,
                    "{} k={k}: Σ_m P(m|k) = {total}",
                    preset.name
                );
            }
        }
    }
}

#[test]
fn subtraction_flips_parity_of_even_states() {
    // The pure squeezed vacuum occupies even levels only; conditioning on a
    // k-photon tap event shifts the support by exactly k levels.
    let spec = SqueezedVacuumSpec::from_xi(0.5, 20).unwrap();
    let rho = squeezed_vacuum_dm(&spec).unwrap();
    for k in 1..=3usize {
        let cond = pnrd_state(&rho, 0.1, k).unwrap();
        for (n, p) in photon_distribution(&cond).iter().enumerate() {
            if (n + k) % 2 == 1 {
                assert_eq!(*p, 0.0, "k={k}: level {n} should be exactly empty");
            }
        }
    }
}

#[test]
fn readout_loss_degrades_negativity_monotonically() {
    let det = DetectorModel::ideal_pnrd();
    let mut previous = f64::NEG_INFINITY;
    for i in 0..11 {
        let eta_hd = 1.0 - 0.05 * i as f64;
        let params = ExperimentParams {
            eta_hd,
            ..ExperimentParams::reference(30)
        };
        let w00 = wigner_origin(&kitten_core::subtraction::prepare_kitten(&params, &det).unwrap());
        assert!(
            w00 > previous,
            "w00 should rise as eta_hd falls: {w00} at eta_hd={eta_hd}"
        );
        previous = w00;
    }
}

#[test]
fn input_impurity_degrades_negativity_monotonically() {
    let det = DetectorModel::ideal_pnrd();
    let mut previous = f64::NEG_INFINITY;
    for i in 0..13 {
        let r1 = 0.05 * i as f64;
        let params = ExperimentParams {
            r1,
            ..ExperimentParams::reference(30)
        };
        let w00 = wigner_origin(&kitten_core::subtraction::prepare_kitten(&params, &det).unwrap());
        assert!(
            w00 > previous,
            "w00 should rise with impurity: {w00} at r1={r1}"
        );
        previous = w00;
    }
}
