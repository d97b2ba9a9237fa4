use std::fmt::Write as _;
use std::path::PathBuf;

use serde::Serialize;

use super::Session;
use crate::config::{GateSettings, ProtocolSettings, Separation, TransportSettings, TrapSettings};
use crate::constants::{bohr, khz_to_rad, nm, um, HBAR};
use crate::coupling::{
    franck_condon, franck_condon_quadrature, CouplingBudget, GateInputs, RelativeTrap, TwoAtomSystem,
};
use crate::error::{Error, Result};
use crate::lattice::{
    feasibility_region, translation_for_phases, write_feasibility_csv, write_pattern_csv, BichromaticLattice,
    IntensityGrid, LatticeConfig, LatticeGeometry, LineModel, PatternStats, Requirements,
};
use crate::protocol::{error_injected_run, run_protocol, trace_text, FidelityReport, ProtocolOutcome, SequenceErrors};
use crate::species::{SpeciesOverrides, CS133, LI6};
use crate::stability::{analyze, read_series, species_dfs, StabilitySummary};
use crate::transport::{
    entangle_time, qubit_reach, reach_time_coefficient, site_distance, timing_table, write_timing_csv,
    CalibrationAnchor, SiteCoord, TimingRow, TransportParams,
};

/// Pattern samples per unit-cell axis when locating extrema.
const PATTERN_STATS_GRID: usize = 64;

#[derive(Serialize)]
struct FeasibilityResults {
    grid_points: usize,
    feasible_count: usize,
    feasible_fraction: f64,
    ratio_min: Option<f64>,
    ratio_max: Option<f64>,
    balanced_ratio: f64,
    balanced_alpha: f64,
    control_ratio_min: f64,
    control_ratio_max: f64,
    region_csv: PathBuf,
}

pub(super) fn feasibility(s: &Session) -> Result<String> {
    let cfg = s.config.feasibility()?;
    let overrides = s.config.species_overrides()?;
    let model: LineModel = cfg.line_model.parse()?;
    let spacing = um(cfg.spacing_um);
    let color = |lambda_nm: f64| LatticeConfig::new(LatticeGeometry::new(spacing, nm(lambda_nm))?, 0.0, [0.0; 3]);
    let lattice = BichromaticLattice::new(
        color(cfg.qubit_wavelength_nm)?,
        color(cfg.messenger_wavelength_nm)?,
        overrides.lookup(LI6)?,
        overrides.lookup(CS133)?,
        model,
    )?;
    let grid = IntensityGrid::log_spaced(
        (cfg.i1_min_w_m2, cfg.i1_max_w_m2),
        (cfg.i2_min_w_m2, cfg.i2_max_w_m2),
        cfg.n1,
        cfg.n2,
    )?;
    let req = Requirements { decoherence_ceiling: cfg.decoherence_ceiling_per_s, alpha_max: cfg.alpha_max };
    let region = feasibility_region(&lattice, &grid, &req)?;
    let (balanced_ratio, balanced_alpha) = lattice.balanced_ratio();
    let (control_ratio_min, control_ratio_max) = lattice.independent_control_bounds(cfg.alpha_max);
    let region_csv = s.write_csv("feasibility_region.csv", |w| write_feasibility_csv(&region, w))?;
    let results = FeasibilityResults {
        grid_points: region.points.len(),
        feasible_count: region.feasible_count,
        feasible_fraction: region.feasible_fraction(),
        ratio_min: region.ratio_bounds.map(|b| b.0),
        ratio_max: region.ratio_bounds.map(|b| b.1),
        balanced_ratio,
        balanced_alpha,
        control_ratio_min,
        control_ratio_max,
        region_csv,
    };

    let mut text = String::new();
    writeln!(text, "grid points        {}", results.grid_points).unwrap();
    writeln!(text, "feasible_fraction = {:.6}", results.feasible_fraction).unwrap();
    match region.ratio_bounds {
        Some((lo, hi)) => writeln!(text, "feasible I1/I2     [{lo:.4}, {hi:.4}]").unwrap(),
        None => writeln!(text, "feasible I1/I2     empty region").unwrap(),
    }
    writeln!(text, "control I1/I2      [{control_ratio_min:.4}, {control_ratio_max:.4}] (alpha < {})", cfg.alpha_max)
        .unwrap();
    writeln!(text, "balanced I1/I2     {balanced_ratio:.4} (alpha = {balanced_alpha:.4})").unwrap();
    s.write_json(&cfg, &results)?;
    Ok(text)
}

fn gate_inputs(cfg: &GateSettings, overrides: &SpeciesOverrides) -> Result<GateInputs> {
    let li = overrides.lookup(LI6)?;
    let cs = overrides.lookup(CS133)?;
    let trap = match cfg.trap {
        TrapSettings::Direct { omega_r_khz, r0_nm } => RelativeTrap::Direct {
            omega_rel: khz_to_rad(omega_r_khz),
            r0: nm(r0_nm),
            reduced_mass: li.mass * cs.mass / (li.mass + cs.mass),
        },
        TrapSettings::Frequencies { li_trap_khz, cs_trap_khz } => RelativeTrap::Frequencies(TwoAtomSystem::reduce(
            li.mass,
            khz_to_rad(li_trap_khz),
            cs.mass,
            khz_to_rad(cs_trap_khz),
        )?),
    };
    Ok(GateInputs {
        scattering_length: bohr(cfg.a_bohr),
        rabi_free: khz_to_rad(cfg.omega0_khz),
        offset: nm(cfg.delta_nm),
        trap,
        vib_detuning: cfg.delta_vib_khz.map(khz_to_rad),
    })
}

/// Closed-form and quadrature Franck–Condon factors over `a ∈ [10, 100] a_B`
/// (clipped to the halo regime).
fn write_fc_scan(w: &mut dyn std::io::Write, r0: f64) -> std::io::Result<()> {
    writeln!(w, "a_bohr,C_closed_form,C_quadrature,C_ratio")?;
    for a_bohr in (10..=100).step_by(5).map(f64::from) {
        let a = bohr(a_bohr);
        if let (Ok(c), Ok(q)) = (franck_condon(a, r0), franck_condon_quadrature(a, r0)) {
            writeln!(w, "{a_bohr},{c},{q},{}", q / c)?;
        }
    }
    Ok(())
}

pub(super) fn gate(s: &Session) -> Result<String> {
    let cfg = s.config.gate()?;
    let inputs = gate_inputs(&cfg, &s.config.species_overrides()?)?;
    let budget = CouplingBudget::evaluate(&inputs)?;
    let report = budget.report();
    s.write_csv("gate_fc_scan.csv", |w| write_fc_scan(w, budget.r0))?;
    s.write_json(cfg, report)?;
    Ok(report.to_text())
}

fn transport_params(cfg: &TransportSettings, overrides: &SpeciesOverrides) -> Result<TransportParams> {
    let x0 = nm(cfg.x0_nm);
    let omega = match cfg.trap_khz {
        Some(f) => khz_to_rad(f),
        None => crate::coupling::trap_frequency_for_length(overrides.lookup(CS133)?.mass, x0),
    };
    let depth = cfg.alpha * HBAR * khz_to_rad(cfg.messenger_depth_khz);
    let raw = TransportParams::new(um(cfg.spacing_um), x0, omega, cfg.alpha, depth)?;
    if cfg.calibrate {
        raw.calibrated(CalibrationAnchor {
            sites: cfg.anchor_sites,
            reduced_velocity: cfg.anchor_reduced_velocity,
            error: cfg.anchor_error,
        })
    } else {
        Ok(raw)
    }
}

#[derive(Serialize)]
struct TransportResults {
    trap_frequency_khz: f64,
    depth_factor_raw: f64,
    depth_factor: f64,
    gaussian_factor: f64,
    reach_time_coefficient_ms: f64,
    rows: Vec<TimingRow>,
}

pub(super) fn transport(s: &Session) -> Result<String> {
    let cfg = s.config.transport()?;
    let params = transport_params(&cfg, &s.config.species_overrides()?)?;
    let rows = timing_table(&params, &cfg.sites, cfg.fidelity_target)?;
    s.write_csv("transport_timing.csv", |w| write_timing_csv(&rows, w))?;
    let results = TransportResults {
        trap_frequency_khz: params.trap_frequency / (2.0 * std::f64::consts::PI) / 1e3,
        depth_factor_raw: params.raw_depth_factor(),
        depth_factor: params.depth_factor,
        gaussian_factor: params.gaussian_factor(),
        reach_time_coefficient_ms: reach_time_coefficient() * 1e3,
        rows,
    };

    let mut text = String::new();
    writeln!(text, "depth factor g = {:.4} (uncalibrated {:.4})", results.depth_factor, results.depth_factor_raw)
        .unwrap();
    writeln!(text, "tau_e = 5 ms + {:.5} ms x Nq", results.reach_time_coefficient_ms).unwrap();
    writeln!(text, "{:>7} {:>12} {:>10} {:>10} {:>10}", "N", "v [um/ms]", "p1", "tau_e[ms]", "Nq").unwrap();
    for r in &results.rows {
        writeln!(
            text,
            "{:>7} {:>12.4} {:>10.4e} {:>10.3} {:>10.2}",
            r.sites, r.v_um_per_ms, r.p1, r.tau_e_ms, r.qubits
        )
        .unwrap();
    }
    s.write_json(&cfg, &results)?;
    Ok(text)
}

fn protocol_sites(cfg: &ProtocolSettings) -> u32 {
    match cfg.separation {
        Separation::Sites { sites } => sites,
        Separation::Coordinates { qubit_a_site: a, qubit_b_site: b } => {
            let d = site_distance(SiteCoord::new(a[0], a[1]), SiteCoord::new(b[0], b[1]));
            u32::try_from(d).unwrap_or(u32::MAX)
        }
    }
}

#[derive(Serialize)]
struct ProtocolConfigEcho<'a> {
    protocol: &'a ProtocolSettings,
    /// Only consulted when the transport error is derived.
    transport: Option<&'a TransportSettings>,
}

#[derive(Serialize)]
struct ProtocolResults<'a> {
    sites: u32,
    entangle_time_ms: f64,
    qubit_reach: f64,
    errors: SequenceErrors,
    outcome: &'a ProtocolOutcome,
    fidelity: FidelityReport,
}

pub(super) fn protocol(s: &Session) -> Result<String> {
    let cfg = s.config.protocol()?;
    let sites = protocol_sites(&cfg);
    let mut transport_cfg = None;
    let errors = match cfg.budget {
        None => SequenceErrors::IDEAL,
        Some(budget) => {
            let p1 = match budget.transport_error {
                Some(p1) => p1,
                None if sites == 0 => 0.0,
                None => {
                    let t = s.config.transport()?;
                    let params = transport_params(&t, &s.config.species_overrides()?)?;
                    let v = params.max_velocity(sites, t.fidelity_target)?;
                    transport_cfg = Some(t);
                    params.transport_error(sites, params.reduced_velocity(v))?
                }
            };
            let pulse = CouplingBudget::from_errors(budget.overlap_fidelity, budget.leakage)?;
            SequenceErrors::from_budgets(&[pulse; 4], p1)?
        }
    };
    let outcome = run_protocol(&errors)?;
    let fidelity = error_injected_run(&errors, cfg.trials, s.seed)?;
    s.write_csv("protocol_trace.csv", |w| {
        writeln!(w, "step,level,re,im,lost")?;
        for step in &outcome.trace {
            for k in &step.ket {
                writeln!(w, "{},{},{},{},{}", step.operation, k.level, k.re, k.im, step.lost)?;
            }
        }
        Ok(())
    })?;

    let mut text = trace_text(&outcome.trace);
    writeln!(text, "sites                 {sites}").unwrap();
    writeln!(text, "entangle time         {:.3} ms", entangle_time(sites) * 1e3).unwrap();
    writeln!(text, "final fidelity        {:.6}", outcome.final_fidelity).unwrap();
    writeln!(text, "C(Li_a, Li_b)         {:.6}", outcome.concurrence_li_a_li_b).unwrap();
    writeln!(text, "purity(Cs)            {:.6}", outcome.purity_cs).unwrap();
    writeln!(text, "f_multiplicative    = {:.6}", fidelity.f_multiplicative).unwrap();
    writeln!(
        text,
        "f_montecarlo        = {:.6} +/- {:.6} ({} trials, seed {})",
        fidelity.f_montecarlo, fidelity.mc_sigma, fidelity.trials, fidelity.seed
    )
    .unwrap();

    let results = ProtocolResults {
        sites,
        entangle_time_ms: entangle_time(sites) * 1e3,
        qubit_reach: qubit_reach(sites),
        errors,
        outcome: &outcome,
        fidelity,
    };
    s.write_json(ProtocolConfigEcho { protocol: &cfg, transport: transport_cfg.as_ref() }, results)?;
    Ok(text)
}

#[derive(Serialize)]
struct Translation {
    shift_rad: [f64; 3],
    translation_um: Option<[f64; 2]>,
    error: Option<String>,
}

#[derive(Serialize)]
struct ColorGeometry {
    wavelength_nm: f64,
    beam_angle_deg: f64,
    k_perp_per_um: f64,
    reconstructed_spacing_um: f64,
    spacing_relative_error: f64,
    pattern_min: f64,
    pattern_max: f64,
    max_gradient_per_um: f64,
    translations: Vec<Translation>,
    pattern_csv: PathBuf,
}

pub(super) fn geometry(s: &Session) -> Result<String> {
    let cfg = s.config.geometry()?;
    let spacing = um(cfg.spacing_um);
    let mut colors = Vec::with_capacity(cfg.wavelengths_nm.len());
    let mut text = String::new();
    for &lambda_nm in &cfg.wavelengths_nm {
        let geom = LatticeGeometry::new(spacing, nm(lambda_nm))?;
        let lattice = LatticeConfig::new(geom, 1.0, cfg.phases_rad)?;
        let stats = PatternStats::sample(&lattice, PATTERN_STATS_GRID);
        let translations = cfg
            .shifts_rad
            .iter()
            .map(|&shift| match translation_for_phases(&lattice, shift) {
                Ok(t) => Translation { shift_rad: shift, translation_um: Some([t[0] * 1e6, t[1] * 1e6]), error: None },
                Err(e) => Translation { shift_rad: shift, translation_um: None, error: Some(e.to_string()) },
            })
            .collect();
        let extent = um(cfg.pattern_extent_um);
        let pattern_csv = s.write_csv(&format!("geometry_pattern_{lambda_nm}nm.csv"), |w| {
            write_pattern_csv(&lattice, cfg.pattern_points, extent, w)
        })?;
        let c = ColorGeometry {
            wavelength_nm: lambda_nm,
            beam_angle_deg: geom.angle.to_degrees(),
            k_perp_per_um: geom.k_perp * 1e-6,
            reconstructed_spacing_um: geom.reconstructed_spacing() * 1e6,
            spacing_relative_error: (geom.reconstructed_spacing() - spacing).abs() / spacing,
            pattern_min: stats.min,
            pattern_max: stats.max,
            max_gradient_per_um: stats.max_gradient * 1e-6,
            translations,
            pattern_csv,
        };
        writeln!(
            text,
            "{lambda_nm} nm: angle {:.4} deg, k_perp {:.5} /um, d' = {:.12} um, pattern [{:.6}, {:.6}]",
            c.beam_angle_deg, c.k_perp_per_um, c.reconstructed_spacing_um, c.pattern_min, c.pattern_max
        )
        .unwrap();
        for t in &c.translations {
            match (&t.translation_um, &t.error) {
                (Some(v), _) => writeln!(text, "  shift {:?} -> ({:.6}, {:.6}) um", t.shift_rad, v[0], v[1]).unwrap(),
                (None, Some(e)) => writeln!(text, "  shift {:?} -> {e}", t.shift_rad).unwrap(),
                (None, None) => {}
            }
        }
        colors.push(c);
    }
    s.write_json(&cfg, &colors)?;
    Ok(text)
}

#[derive(Serialize)]
struct StabilityFile {
    input: PathBuf,
    summary: StabilitySummary,
    spectrum_csv: Option<PathBuf>,
}

#[derive(Serialize)]
struct FineStructureEntry {
    species: &'static str,
    wavelength_nm: f64,
    d_fs: Option<f64>,
}

#[derive(Serialize)]
struct StabilityResults {
    files: Vec<StabilityFile>,
    fine_structure: Vec<FineStructureEntry>,
}

#[derive(Serialize)]
struct StabilityConfigEcho<'a> {
    inputs: &'a [PathBuf],
    lattice_wavelengths_nm: [f64; 2],
}

/// Wavelengths at which the vector light-shift constant is tabulated.
const DFS_WAVELENGTHS_NM: [f64; 2] = [681.0, 1064.0];

pub(super) fn stability(s: &Session, cli_inputs: &[PathBuf]) -> Result<String> {
    let inputs = if cli_inputs.is_empty() { s.config.stability_inputs() } else { cli_inputs.to_vec() };
    if inputs.is_empty() {
        return Err(Error::Config("missing key `stability.inputs` (or pass --input)".into()));
    }
    // Read sequentially so the first failing file, in input order, decides the exit code.
    let series = inputs.iter().map(|p| read_series(p)).collect::<Result<Vec<_>>>()?;
    let mut text = String::new();
    let mut files = Vec::with_capacity(inputs.len());
    for (i, (path, series)) in inputs.iter().zip(&series).enumerate() {
        let analysis = analyze(series)?;
        let spectrum_csv = match &analysis.spectra {
            Some(table) => {
                let name = if inputs.len() == 1 {
                    "stability_spectrum.csv".to_string()
                } else {
                    format!("stability_spectrum_{i}.csv")
                };
                Some(s.write_csv(&name, |w| table.write_csv(w))?)
            }
            None => None,
        };
        let m = &analysis.summary;
        writeln!(text, "{}", path.display()).unwrap();
        writeln!(text, "  samples {} over {:.3} s", m.n_samples, m.duration_s).unwrap();
        writeln!(text, "  rms color 1     {:.3} nm", m.rms1_nm).unwrap();
        writeln!(text, "  rms color 2     {:.3} nm", m.rms2_nm).unwrap();
        writeln!(text, "  rms differential {:.3} nm", m.rms_diff_nm).unwrap();
        if let Some(p) = m.parseval_error_max {
            writeln!(text, "  Parseval error  {:.3e}", p).unwrap();
        }
        for w in &m.warnings {
            writeln!(text, "  warning: {w}").unwrap();
        }
        files.push(StabilityFile { input: path.clone(), summary: analysis.summary, spectrum_csv });
    }

    let overrides = s.config.species_overrides()?;
    let mut fine_structure = Vec::new();
    for name in [LI6, CS133] {
        let species = overrides.lookup(name)?;
        for lambda_nm in DFS_WAVELENGTHS_NM {
            let d_fs = species_dfs(&species, nm(lambda_nm)).ok();
            if let Some(d) = d_fs {
                writeln!(text, "D_FS {name} @ {lambda_nm} nm = {d:.4e}").unwrap();
            }
            fine_structure.push(FineStructureEntry { species: name, wavelength_nm: lambda_nm, d_fs });
        }
    }
    s.write_json(
        StabilityConfigEcho { inputs: &inputs, lattice_wavelengths_nm: DFS_WAVELENGTHS_NM },
        StabilityResults { files, fine_structure },
    )?;
    Ok(text)
}
