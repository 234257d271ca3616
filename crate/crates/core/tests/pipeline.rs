// Cross-module chains: preset -> cavity -> contrast -> protocols -> herald.

use approx::assert_abs_diff_eq;
use rescat_core::cavity::{self, CavitySystem};
use rescat_core::design::{self, Preset};
use rescat_core::herald::{self, HeraldConfig};
use rescat_core::protocols::{self, ContrastPair};
use rescat_core::Encoding;

#[test]
fn pillar_preset_end_to_end() {
    let report = design::solve_resonance_scattering(&Preset::PillarReithmaier.spec()).unwrap();
    assert_abs_diff_eq!(report.kappa_total, 2560.0, epsilon = 1e-9);
    assert_abs_diff_eq!(report.q_factor, 516.796875, epsilon = 1e-9);

    let sys = report.cavity().unwrap();
    assert!(cavity::is_resonance_scattering(&sys, cavity::DEFAULT_RS_TOLERANCE).unwrap());
    let c = ContrastPair::from_cavity(&sys).unwrap();
    let res = protocols::photon_photon_protocol(c).unwrap();
    assert_abs_diff_eq!(res[0].fidelity, 0.987045196577101, epsilon = 1e-12);
    assert_abs_diff_eq!(res[0].efficiency, 0.138186627067626, epsilon = 1e-12);
    assert_abs_diff_eq!(res[1].efficiency, 0.134535470046103, epsilon = 1e-12);
    assert_abs_diff_eq!(res[1].fidelity, 1.0, epsilon = 1e-12);

    // identical cavities: spin-spin reproduces the photon-photon figures
    let ss = protocols::spin_spin_protocol(c, c).unwrap();
    assert_abs_diff_eq!(ss[0].fidelity, res[0].fidelity, epsilon = 1e-12);
    assert_abs_diff_eq!(ss[0].efficiency, res[0].efficiency, epsilon = 1e-12);

    let cfg = HeraldConfig::new(res[0].efficiency, 11);
    let stats = herald::run_pair_trials(&cfg, 20_000).unwrap();
    let expected = stats.expected_attempts.unwrap();
    assert_abs_diff_eq!(expected, 7.236590263619, epsilon = 1e-9);
    assert!((stats.attempts.mean - expected).abs() < 4.0 * stats.attempts.std_error);
}

#[test]
fn nv_preset_and_mode_volume_estimate() {
    let spec = Preset::NvPhotonicCrystal.spec();
    let given = design::solve_resonance_scattering(&spec).unwrap();
    assert_abs_diff_eq!(given.kappa_total, 7290.0, epsilon = 1e-9);
    assert_abs_diff_eq!(given.q_factor, 266.941015089, epsilon = 1e-8);
    assert_eq!(given.kappa_ratio, None);
    assert_abs_diff_eq!(given.r_c, -1.0, epsilon = 1e-12);

    let estimated =
        design::solve_resonance_scattering(&design::DesignSpec { g: None, ..spec }).unwrap();
    assert_abs_diff_eq!(estimated.g, 17.838, epsilon = 1e-3);
    assert!(estimated.q_factor < given.q_factor);
}

#[test]
fn loss_ratio_chain_matches_closed_form_contrast() {
    for ratio in [1e-3, 0.5, 1.0, 2.0, 13.0, 1e3] {
        let sys = CavitySystem::from_loss_ratio(2560.0, ratio, 10.0).unwrap();
        let c = ContrastPair::from_cavity(&sys).unwrap();
        let kt = sys.kappa_total();
        assert_abs_diff_eq!(c.r_d().re, sys.kappa_s() / kt, epsilon = 1e-12);
        assert_abs_diff_eq!(
            c.r_c().re,
            (sys.kappa_s() - sys.kappa()) / kt,
            epsilon = 1e-12
        );
        let res = protocols::photon_photon_protocol(c).unwrap();
        assert_abs_diff_eq!(
            res[0].fidelity,
            protocols::fidelity_psi_plus(c).unwrap(),
            epsilon = 1e-12
        );
    }
}

#[test]
fn ghz_chain_scales_as_power_of_two() {
    for n in 2..=protocols::MAX_GHZ_PHOTONS {
        for enc in [Encoding::Polarization, Encoding::Frequency] {
            let res = protocols::ghz_protocol(ContrastPair::ideal(), n, enc).unwrap();
            for r in &res {
                assert_abs_diff_eq!(r.fidelity, 1.0, epsilon = 1e-12);
                assert_abs_diff_eq!(
                    r.efficiency,
                    protocols::ghz_efficiency(n).unwrap(),
                    epsilon = 1e-15
                );
            }
        }
    }
}

#[test]
fn infeasible_loss_is_reported() {
    let mut spec = Preset::PillarReithmaier.spec();
    spec.kappa_s = 2560.0;
    assert!(matches!(
        design::solve_resonance_scattering(&spec),
        Err(design::DesignError::InfeasibleLoss { .. })
    ));
}

#[test]
fn cluster_of_four_finishes_in_two_stages() {
    let mut cfg = HeraldConfig::new(0.138, 42);
    cfg.n_spins = 4;
    let stats = herald::run_cluster_trials(&cfg, 20_000).unwrap();
    assert!(
        (10.0..=30.0).contains(&stats.time_ns.median),
        "{}",
        stats.time_ns.median
    );
    assert_eq!(herald::linear_cluster_schedule(4).len(), 2);
    assert_eq!(herald::run_cluster_trials(&cfg, 20_000).unwrap(), stats);
}
