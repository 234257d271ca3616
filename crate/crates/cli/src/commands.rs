//! The six subcommands. Each reads its parameters from [`Params`] and returns
//! a table; energies are in μeV unless a key says otherwise.

use num_complex::Complex64;
use rescat_core::cavity::{self, CavitySystem};
use rescat_core::design::{self, DesignError, DesignReport, DesignSpec, Preset, NV_FABRICATED_Q};
use rescat_core::herald::{self, HeraldConfig, Summary};
use rescat_core::protocols::{self, ContrastPair, ProtocolResult};
use rescat_core::Encoding;

use crate::params::{parse_energy, EnergyUnit, Params};
use crate::table::{Cell, Table};
use crate::{CliError, Output};

const UEV: EnergyUnit = EnergyUnit::MicroEv;

pub const DEFAULT_SWEEP_POINTS: u64 = 201;
pub const DEFAULT_LOSS_POINTS: u64 = 61;
pub const DEFAULT_HERALD_TRIALS: u64 = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Scale {
    Linear,
    Log,
}

/// Grid of sweep values: either an explicit `sweep.values` list or
/// `sweep.start`/`stop`/`points`/`scale`. Endpoints are hit exactly.
fn sweep_values(
    p: &mut Params,
    variable: &str,
    defaults: (f64, f64, u64, Scale),
    parse: impl Fn(&str) -> Result<f64, String>,
) -> Result<Vec<f64>, CliError> {
    if let Some(v) = p.raw("sweep.variable") {
        if v != variable {
            return Err(CliError::Config(format!(
                "sweep.variable = `{v}`: this command sweeps `{variable}` only"
            )));
        }
    }
    let value = |key: &str, text: &str| {
        parse(text).map_err(|e| CliError::Config(format!("`{key}` = `{text}`: {e}")))
    };
    if let Some(list) = p.raw("sweep.values") {
        if ["sweep.start", "sweep.stop", "sweep.points", "sweep.scale"]
            .iter()
            .any(|k| p.contains(k))
        {
            return Err(CliError::Config(
                "give either sweep.values or a sweep range, not both".into(),
            ));
        }
        let values = list
            .split(',')
            .map(|t| value("sweep.values", t.trim()))
            .collect::<Result<Vec<_>, _>>()?;
        if values.is_empty() {
            return Err(CliError::Config("sweep.values is empty".into()));
        }
        return Ok(values);
    }
    let (d_start, d_stop, d_points, d_scale) = defaults;
    let start = p
        .raw("sweep.start")
        .map(|t| value("sweep.start", &t))
        .transpose()?
        .unwrap_or(d_start);
    let stop = p
        .raw("sweep.stop")
        .map(|t| value("sweep.stop", &t))
        .transpose()?
        .unwrap_or(d_stop);
    let points = p.count("sweep.points")?.unwrap_or(d_points);
    let default_scale = if d_scale == Scale::Log {
        "log"
    } else {
        "linear"
    };
    let scale = match p.choice("sweep.scale", &["linear", "log"], default_scale)? {
        "log" => Scale::Log,
        _ => Scale::Linear,
    };
    if points < 2 {
        return Err(CliError::Config(format!(
            "sweep.points = {points}: need at least 2"
        )));
    }
    let n = points as usize;
    let last = (n - 1) as f64;
    Ok(match scale {
        Scale::Linear => (0..n)
            .map(|i| match i {
                0 => start,
                i if i == n - 1 => stop,
                i => start + (stop - start) * i as f64 / last,
            })
            .collect(),
        Scale::Log => {
            if !(start > 0.0 && stop > 0.0) {
                return Err(CliError::Config(format!(
                    "log sweep needs positive bounds, got {start} .. {stop}"
                )));
            }
            let (a, b) = (start.log10(), stop.log10());
            (0..n)
                .map(|i| match i {
                    0 => start,
                    i if i == n - 1 => stop,
                    i => 10f64.powf(a + (b - a) * i as f64 / last),
                })
                .collect()
        }
    })
}

fn plain_number(text: &str) -> Result<f64, String> {
    text.parse::<f64>()
        .ok()
        .filter(|x| x.is_finite())
        .ok_or_else(|| "not a finite number".to_string())
}

fn design_error(e: DesignError) -> CliError {
    match e {
        DesignError::InfeasibleLoss { .. } => CliError::Infeasible(e.to_string()),
        other => CliError::config(other),
    }
}

fn preset_spec(p: &mut Params) -> Result<Option<(Preset, DesignSpec)>, CliError> {
    p.raw("preset")
        .map(|name| {
            let preset: Preset = name.parse().map_err(|e: DesignError| {
                let names: Vec<_> = Preset::ALL.iter().map(|p| p.name()).collect();
                CliError::Config(format!("{e}; known presets: {}", names.join(", ")))
            })?;
            Ok((preset, preset.spec()))
        })
        .transpose()
}

/// Applies emitter/loss overrides on top of a preset.
fn override_spec(p: &mut Params, spec: &mut DesignSpec) -> Result<(), CliError> {
    if let Some(g) = p.energy("g", UEV)? {
        spec.g = Some(g);
    }
    if let Some(gamma) = p.energy("gamma", UEV)? {
        spec.gamma = gamma;
    }
    if let Some(kappa_s) = p.energy("kappa_s", UEV)? {
        spec.kappa_s = kappa_s;
    }
    Ok(())
}

fn preset_cavity(p: &mut Params) -> Result<Option<DesignReport>, CliError> {
    match preset_spec(p)? {
        None => Ok(None),
        Some((_, mut spec)) => {
            override_spec(p, &mut spec)?;
            design::solve_resonance_scattering(&spec)
                .map(Some)
                .map_err(design_error)
        }
    }
}

fn exclusive(p: &Params, a: &str, b: &str) -> Result<(), CliError> {
    if p.contains(a) && p.contains(b) {
        Err(CliError::Config(format!(
            "`{a}` and `{b}` are mutually exclusive"
        )))
    } else {
        Ok(())
    }
}

/// `reflectivity-sweep`: the empty-cavity (`r_c`) and coupled (`r_d`)
/// reflectivity over a detuning grid `ω = ω_c + δ`.
///
/// Keys: `preset` (with optional `g`, `gamma`, `kappa_s` overrides) or
/// `kappa`, `kappa_s` (0), `gamma` or `gamma_over_kappa` (0.1), `g`
/// (resonance scattering); `omega_c`, `omega_d` (0); `sweep.unit`
/// `gamma|kappa|uev` (gamma), `sweep.start` (−5), `sweep.stop` (5),
/// `sweep.points` (201), `sweep.scale`, or `sweep.values`.
pub fn reflectivity_sweep(p: &mut Params) -> Result<Table, CliError> {
    exclusive(p, "preset", "kappa")?;
    exclusive(p, "gamma", "gamma_over_kappa")?;
    let sys = match preset_cavity(p)? {
        Some(report) => report.cavity().map_err(design_error)?,
        None => {
            let kappa = p.require_energy("kappa", UEV)?;
            let kappa_s = p.energy("kappa_s", UEV)?.unwrap_or(0.0);
            let gamma = match p.energy("gamma", UEV)? {
                Some(g) => g,
                None => p.number("gamma_over_kappa")?.unwrap_or(0.1) * kappa,
            };
            let g = match p.energy("g", UEV)? {
                Some(g) => g,
                None => cavity::resonance_scattering_g(kappa + kappa_s, gamma)
                    .map_err(CliError::config)?,
            };
            CavitySystem::new(kappa, kappa_s, g, gamma, 0.0, 0.0).map_err(CliError::config)?
        }
    };
    let omega_c = p.energy("omega_c", UEV)?.unwrap_or(0.0);
    let omega_d = p.energy("omega_d", UEV)?.unwrap_or(0.0);
    let sys = sys
        .with_resonances(omega_c, omega_d)
        .map_err(CliError::config)?;

    let unit = p.choice("sweep.unit", &["gamma", "kappa", "uev"], "gamma")?;
    let scale = match unit {
        "gamma" => sys.gamma(),
        "kappa" => sys.kappa_total(),
        _ => 1.0,
    };
    let values = if unit == "uev" {
        sweep_values(
            p,
            "detuning",
            (-50.0, 50.0, DEFAULT_SWEEP_POINTS, Scale::Linear),
            |t| parse_energy(t, UEV),
        )?
    } else {
        sweep_values(
            p,
            "detuning",
            (-5.0, 5.0, DEFAULT_SWEEP_POINTS, Scale::Linear),
            plain_number,
        )?
    };

    let mut t = Table::new(vec![
        "detuning",
        "detuning_uev",
        "abs_r_c",
        "abs_r_d",
        "phase_c",
        "phase_d",
        "abs2_r_c",
        "abs2_r_d",
    ]);
    for x in values {
        let delta = x * scale;
        let omega = omega_c + delta;
        let rc = cavity::empty_cavity_reflectivity(&sys, omega).map_err(CliError::config)?;
        let rd = cavity::reflectivity(&sys, omega).map_err(CliError::config)?;
        t.push(vec![
            x.into(),
            delta.into(),
            rc.magnitude().into(),
            rd.magnitude().into(),
            rc.phase().into(),
            rd.phase().into(),
            rc.intensity().into(),
            rd.intensity().into(),
        ]);
    }
    Ok(t)
}

/// `loss-sweep`: resonant contrast and two-photon figures against `κ/κ_s`
/// with `κ_T` held fixed and `g` at resonance scattering.
///
/// Keys: `preset` or `kappa_total` (1000) and `gamma` (κ_T/10); sweep over
/// `kappa_ratio`, log 1e-3 … 1e3 with 61 points by default.
pub fn loss_sweep(p: &mut Params) -> Result<Table, CliError> {
    exclusive(p, "preset", "kappa_total")?;
    let (kappa_total, gamma) = match preset_cavity(p)? {
        Some(r) => (r.kappa_total, r.gamma),
        None => {
            let kt = p.energy("kappa_total", UEV)?.unwrap_or(1000.0);
            (kt, p.energy("gamma", UEV)?.unwrap_or(kt / 10.0))
        }
    };
    let ratios = sweep_values(
        p,
        "kappa_ratio",
        (1e-3, 1e3, DEFAULT_LOSS_POINTS, Scale::Log),
        plain_number,
    )?;
    let mut t = Table::new(vec![
        "kappa_ratio",
        "abs_r_c",
        "abs_r_d",
        "F_psi_plus",
        "eta_psi_plus",
        "eta_psi_minus",
    ]);
    for ratio in ratios {
        let sys =
            CavitySystem::from_loss_ratio(kappa_total, ratio, gamma).map_err(CliError::config)?;
        let c = ContrastPair::from_cavity(&sys).map_err(CliError::config)?;
        t.push(vec![
            ratio.into(),
            c.r_c().norm().into(),
            c.r_d().norm().into(),
            protocols::fidelity_psi_plus(c)
                .map_err(CliError::config)?
                .into(),
            protocols::efficiency_psi_plus(c).into(),
            protocols::efficiency_psi_minus(c).into(),
        ]);
    }
    Ok(t)
}

fn contrast(
    p: &mut Params,
    suffix: &str,
    fallback: Option<ContrastPair>,
) -> Result<Option<ContrastPair>, CliError> {
    let key = |name: &str, im: bool| format!("{name}{suffix}{}", if im { "_im" } else { "" });
    let keys = [
        key("r_c", false),
        key("r_c", true),
        key("r_d", false),
        key("r_d", true),
    ];
    if !keys.iter().any(|k| p.contains(k)) {
        return Ok(fallback);
    }
    let mut get = |k: &String, default: Option<f64>| -> Result<f64, CliError> {
        match p.number(k)? {
            Some(x) => Ok(x),
            None => default.ok_or_else(|| CliError::missing(k)),
        }
    };
    let r_c = Complex64::new(get(&keys[0], None)?, get(&keys[1], Some(0.0))?);
    let r_d = Complex64::new(get(&keys[2], None)?, get(&keys[3], Some(0.0))?);
    ContrastPair::new(r_c, r_d)
        .map(Some)
        .map_err(CliError::config)
}

/// `protocol`: state-vector run of one heralding scheme next to its closed form.
///
/// Keys: `protocol` = `photon-photon` (default) | `spin-spin` | `interference`
/// | `ghz`; contrast from `preset` or `r_c`, `r_d` (+ `_im`); second cavity
/// `r_c2`, `r_d2` (+ `_im`), defaulting to the first; `ghz` also reads
/// `n_photons` (3) and `encoding` = `polarization` | `frequency`.
pub fn protocol(p: &mut Params) -> Result<Table, CliError> {
    let name = p.choice(
        "protocol",
        &["photon-photon", "spin-spin", "interference", "ghz"],
        "photon-photon",
    )?;
    let from_preset = preset_cavity(p)?
        .map(|r| {
            ContrastPair::from_cavity(&r.cavity().map_err(design_error)?).map_err(CliError::config)
        })
        .transpose()?;
    if from_preset.is_some() && (p.contains("r_c") || p.contains("r_d")) {
        return Err(CliError::Config(
            "`preset` and explicit `r_c`/`r_d` are mutually exclusive".into(),
        ));
    }
    let c1 = contrast(p, "", from_preset)?.ok_or_else(|| CliError::missing("r_c"))?;
    let two = |p: &mut Params| contrast(p, "2", Some(c1)).map(|c| c.unwrap_or(c1));
    let cfg = |e: protocols::ProtocolError| CliError::config(e);

    let (results, closed): (Vec<ProtocolResult>, Vec<(f64, f64)>) = match name {
        "photon-photon" => (
            protocols::photon_photon_protocol(c1).map_err(cfg)?,
            vec![
                (
                    protocols::fidelity_psi_plus(c1).map_err(cfg)?,
                    protocols::efficiency_psi_plus(c1),
                ),
                (1.0, protocols::efficiency_psi_minus(c1)),
            ],
        ),
        "spin-spin" => {
            let c2 = two(p)?;
            (
                protocols::spin_spin_protocol(c1, c2).map_err(cfg)?,
                vec![
                    (
                        protocols::fidelity_psi_plus_two_spin_exact(c1, c2).map_err(cfg)?,
                        protocols::efficiency_psi_plus_two_spin(c1, c2),
                    ),
                    (
                        protocols::fidelity_psi_minus_two_spin(c1, c2).map_err(cfg)?,
                        protocols::efficiency_psi_minus_two_spin(c1, c2),
                    ),
                ],
            )
        }
        "interference" => {
            let c2 = two(p)?;
            (
                protocols::interference_herald(c1, c2).map_err(cfg)?,
                protocols::interference_closed_form(c1, c2)
                    .map_err(cfg)?
                    .to_vec(),
            )
        }
        _ => {
            let n = p.count("n_photons")?.unwrap_or(3) as usize;
            let encoding =
                match p.choice("encoding", &["polarization", "frequency"], "polarization")? {
                    "frequency" => Encoding::Frequency,
                    _ => Encoding::Polarization,
                };
            (
                protocols::ghz_protocol(c1, n, encoding).map_err(cfg)?,
                protocols::ghz_closed_form(c1, n).map_err(cfg)?.to_vec(),
            )
        }
    };
    let mut t = Table::new(vec![
        "protocol",
        "herald",
        "target",
        "fidelity",
        "efficiency",
        "branch_probability",
        "fidelity_closed_form",
        "efficiency_closed_form",
    ]);
    for (r, (f, eta)) in results.iter().zip(closed) {
        t.push(vec![
            name.into(),
            r.herald.to_string().into(),
            r.target.to_string().into(),
            r.fidelity.into(),
            r.efficiency.into(),
            r.branch_probability.into(),
            f.into(),
            eta.into(),
        ]);
    }
    Ok(t)
}

/// `design`: resonance-scattering cavity for a preset or explicit emitter,
/// with the strong-coupling cavity for comparison.
///
/// Keys: `preset` with optional `g`, `gamma`, `kappa_s` overrides, or
/// `gamma`, `kappa_s` (0), `omega_photon` (bare numbers in eV) and either `g`
/// or `oscillator_strength` + `mode_volume` (μm³) [+ `relative_permittivity`];
/// `fabricated_q` (700 for the NV preset) adds a comparison column.
pub fn design(p: &mut Params) -> Result<Output, CliError> {
    let preset = preset_spec(p)?;
    let mut spec = match &preset {
        Some((_, spec)) => spec.clone(),
        None => DesignSpec {
            gamma: p.require_energy("gamma", UEV)?,
            g: None,
            kappa_s: p.energy("kappa_s", UEV)?.unwrap_or(0.0),
            omega_photon: p.require_energy("omega_photon", EnergyUnit::ElectronVolt)? * 1e-6,
            oscillator_strength: None,
            mode_volume: None,
            relative_permittivity: None,
        },
    };
    if preset.is_some() {
        override_spec(p, &mut spec)?;
        if let Some(w) = p.energy("omega_photon", EnergyUnit::ElectronVolt)? {
            spec.omega_photon = w * 1e-6;
        }
    } else if let Some(g) = p.energy("g", UEV)? {
        spec.g = Some(g);
    }
    if let Some(f) = p.number("oscillator_strength")? {
        spec.oscillator_strength = Some(f);
    }
    if let Some(v) = p.number("mode_volume")? {
        spec.mode_volume = Some(v);
    }
    if let Some(e) = p.number("relative_permittivity")? {
        spec.relative_permittivity = Some(e);
    }
    let fabricated_q = match p.number("fabricated_q")? {
        Some(q) => Some(q),
        None => matches!(preset, Some((Preset::NvPhotonicCrystal, _))).then_some(NV_FABRICATED_Q),
    };

    let r = design::solve_resonance_scattering(&spec).map_err(design_error)?;
    let strong = design::strong_coupling_kappa_total(r.g, r.gamma).ok();
    let strong_q = strong
        .map(|kt| design::q_factor(spec.omega_photon, kt))
        .transpose()
        .map_err(design_error)?;

    let mut t = Table::new(vec![
        "preset",
        "g",
        "g_source",
        "gamma",
        "kappa_s",
        "kappa_total",
        "kappa",
        "q_factor",
        "kappa_ratio",
        "r_c",
        "r_d",
        "fidelity_psi_plus",
        "efficiency_psi_plus",
        "efficiency_psi_minus",
        "strong_coupling_kappa_total",
        "strong_coupling_q_factor",
        "fabricated_q",
        "fabricated_over_required_q",
    ]);
    let g_source = match r.g_source {
        design::CouplingSource::Given => "given",
        design::CouplingSource::ModeVolumeEstimate => "mode_volume_estimate",
    };
    t.push(vec![
        preset.as_ref().map(|(p, _)| p.name()).into(),
        r.g.into(),
        g_source.into(),
        r.gamma.into(),
        r.kappa_s.into(),
        r.kappa_total.into(),
        r.kappa.into(),
        r.q_factor.into(),
        r.kappa_ratio.into(),
        r.r_c.into(),
        r.r_d.into(),
        r.fidelity_psi_plus.into(),
        r.efficiency_psi_plus.into(),
        r.efficiency_psi_minus.into(),
        strong.into(),
        strong_q.into(),
        fabricated_q.into(),
        fabricated_q.map(|q| q / r.q_factor).into(),
    ]);
    let json = t.to_json_value()[0].clone();
    Ok(Output::Record { table: t, json })
}

/// `herald`: seeded Monte Carlo of heralding times.
///
/// Keys: `success_probability` or `preset` (its ψ⁺ efficiency),
/// `detector_efficiency` (1), `attempt_period_ns` (1), `coherence_time_us`
/// (1), `max_attempts` (10000), `trials` (1e4), `mode` = `pair` | `cluster`,
/// `n_spins` (cluster only, 2), `seed` (required unless `--seed`).
pub fn herald(p: &mut Params, seed_flag: Option<u64>) -> Result<Table, CliError> {
    exclusive(p, "preset", "success_probability")?;
    let seed_param = p.count("seed")?;
    let seed = seed_flag
        .or(seed_param)
        .ok_or_else(|| CliError::missing("seed"))?;
    let probability = match preset_cavity(p)? {
        Some(r) => r.efficiency_psi_plus,
        None => p.require_number("success_probability")?,
    };
    let mut cfg = HeraldConfig::new(probability, seed);
    if let Some(d) = p.number("detector_efficiency")? {
        cfg.detector_efficiency = d;
    }
    if let Some(t) = p.number("attempt_period_ns")? {
        cfg.attempt_period_ns = t;
    }
    if let Some(t) = p.number("coherence_time_us")? {
        cfg.coherence_time_us = t;
    }
    if let Some(m) = p.count("max_attempts")? {
        cfg.max_attempts = m;
    }
    let trials = p.count("trials")?.unwrap_or(DEFAULT_HERALD_TRIALS);
    let cluster = p.choice("mode", &["pair", "cluster"], "pair")? == "cluster";
    if cluster {
        cfg.n_spins = p.count("n_spins")?.unwrap_or(2) as usize;
    }

    let mut t = Table::new(vec![
        "quantity",
        "trials",
        "successes",
        "success_fraction",
        "mean",
        "std_error",
        "median",
        "p95",
        "min",
        "max",
        "expected_mean",
        "within_coherence_fraction",
    ]);
    let row = |name: &str, s: &Summary, expected: Option<f64>, coherent: Option<f64>| {
        vec![
            Cell::from(name),
            s.trials.into(),
            s.successes.into(),
            s.success_fraction.into(),
            s.mean.into(),
            s.std_error.into(),
            s.median.into(),
            s.p95.into(),
            s.min.into(),
            s.max.into(),
            expected.into(),
            coherent.into(),
        ]
    };
    if cluster {
        let stats = herald::run_cluster_trials(&cfg, trials).map_err(CliError::config)?;
        let frac = Some(stats.within_coherence_fraction);
        t.push(row("cluster_attempts", &stats.attempts, None, frac));
        t.push(row("cluster_time_ns", &stats.time_ns, None, frac));
    } else {
        let stats = herald::run_pair_trials(&cfg, trials).map_err(CliError::config)?;
        let expected = stats.expected_attempts;
        t.push(row("pair_attempts", &stats.attempts, expected, None));
        t.push(row(
            "pair_time_ns",
            &stats.time_ns,
            expected.map(|n| n * cfg.attempt_period_ns),
            None,
        ));
    }
    Ok(t)
}

/// `presets`: built-in emitter/cavity presets and their resonance-scattering design.
pub fn presets() -> Result<Table, CliError> {
    let mut t = Table::new(vec![
        "name",
        "gamma",
        "g",
        "kappa_s",
        "omega_photon_ev",
        "oscillator_strength",
        "mode_volume_um3",
        "kappa_total",
        "q_factor",
    ]);
    for preset in Preset::ALL {
        let spec = preset.spec();
        let r = design::solve_resonance_scattering(&spec).map_err(design_error)?;
        t.push(vec![
            preset.name().into(),
            spec.gamma.into(),
            spec.g.into(),
            spec.kappa_s.into(),
            spec.omega_photon.into(),
            spec.oscillator_strength.into(),
            spec.mode_volume.into(),
            r.kappa_total.into(),
            r.q_factor.into(),
        ]);
    }
    Ok(t)
}
