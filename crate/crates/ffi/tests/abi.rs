//! Exercises the C entry points from Rust, checking each against the core
//! library it wraps.

use std::ffi::{CStr, CString};
use std::ptr;

use licsq::constants::{hz_to_rad, nm, BOHR_RADIUS};
use licsq::coupling::{CouplingBudget, GateInputs, RelativeTrap};
use licsq::species::lookup_species;
use licsq_ffi::*;

const FIXTURES: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/../core/tests/fixtures");

fn last_error() -> String {
    let p = licsq_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn fixture(name: &str) -> CString {
    CString::new(format!("{FIXTURES}/{name}")).unwrap()
}

fn reduced_mass() -> f64 {
    let li = lookup_species("Li6").unwrap().mass;
    let cs = lookup_species("Cs133").unwrap().mass;
    li * cs / (li + cs)
}

#[test]
fn version_is_crate_version() {
    let v = unsafe { CStr::from_ptr(licsq_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}

#[test]
fn species_lookup_and_errors() {
    let mut h: *mut LicsqSpecies = ptr::null_mut();
    let name = CString::new("Cs133").unwrap();
    assert_eq!(unsafe { licsq_species_new(name.as_ptr(), &mut h) }, LicsqStatus::Ok);
    let mut mass = 0.0;
    assert_eq!(unsafe { licsq_species_mass_kg(h, &mut mass) }, LicsqStatus::Ok);
    assert_eq!(mass, lookup_species("Cs133").unwrap().mass);

    let mut d = 0.0;
    assert_eq!(unsafe { licsq_species_dfs(h, nm(1064.0), &mut d) }, LicsqStatus::Ok);
    let expected = licsq::stability::species_dfs(&lookup_species("Cs133").unwrap(), nm(1064.0)).unwrap();
    assert_eq!(d, expected);
    unsafe { licsq_species_free(h) };

    let bogus = CString::new("Xx9").unwrap();
    let mut h2: *mut LicsqSpecies = ptr::null_mut();
    assert_eq!(unsafe { licsq_species_new(bogus.as_ptr(), &mut h2) }, LicsqStatus::UnknownSpecies);
    assert!(h2.is_null());
    assert!(last_error().contains("Xx9"));

    assert_eq!(unsafe { licsq_species_new(ptr::null(), &mut h2) }, LicsqStatus::NullPointer);
    assert_eq!(unsafe { licsq_species_new(name.as_ptr(), ptr::null_mut()) }, LicsqStatus::NullPointer);
    assert_eq!(unsafe { licsq_species_mass_kg(ptr::null(), &mut mass) }, LicsqStatus::NullPointer);
    assert!(last_error().contains("species"));
}

#[test]
fn gate_budget_matches_core() {
    let mu = reduced_mass();
    let (a, rabi, offset, omega, r0) = (200.0 * BOHR_RADIUS, hz_to_rad(10e3), nm(10.0), hz_to_rad(160e3), nm(210.0));
    let mut out = LicsqGateBudget::default();
    let status = unsafe { licsq_gate_budget(a, rabi, offset, omega, r0, mu, 0.0, &mut out) };
    assert_eq!(status, LicsqStatus::Ok);

    let core = CouplingBudget::evaluate(&GateInputs {
        scattering_length: a,
        rabi_free: rabi,
        offset,
        trap: RelativeTrap::Direct { omega_rel: omega, r0, reduced_mass: mu },
        vib_detuning: None,
    })
    .unwrap();
    assert_eq!(out.franck_condon, core.franck_condon);
    assert_eq!(out.rabi, core.rabi);
    assert_eq!(out.pulse_pair_time, core.pulse_pair_time);
    assert_eq!(out.overlap_fidelity, core.overlap_fidelity);
    assert_eq!(out.leakage, core.leakage);
    assert_eq!(out.vib_detuning, omega);
    assert!(out.franck_condon > 0.0 && out.franck_condon < 1.0);

    let halo = unsafe { licsq_gate_budget(2000.0 * BOHR_RADIUS, rabi, offset, omega, r0, mu, 0.0, &mut out) };
    assert_eq!(halo, LicsqStatus::Regime);
    assert!(last_error().contains("halo"));
    let zero = unsafe { licsq_gate_budget(0.0, rabi, offset, omega, r0, mu, 0.0, &mut out) };
    assert_ne!(zero, LicsqStatus::Ok);
    let null = unsafe { licsq_gate_budget(a, rabi, offset, omega, r0, mu, 0.0, ptr::null_mut()) };
    assert_eq!(null, LicsqStatus::NullPointer);
}

#[test]
fn transport_handle_round_trip() {
    let mut h: *mut LicsqTransport = ptr::null_mut();
    assert_eq!(unsafe { licsq_transport_reference(true, &mut h) }, LicsqStatus::Ok);
    let mut p = 0.0;
    assert_eq!(unsafe { licsq_transport_error(h, 1, 0.03, &mut p) }, LicsqStatus::Ok);
    assert!((p - 0.01).abs() < 1e-12, "{p}");

    // Re-anchoring moves the curve through the new point.
    assert_eq!(unsafe { licsq_transport_calibrate(h, 2, 0.05, 0.02) }, LicsqStatus::Ok);
    assert_eq!(unsafe { licsq_transport_error(h, 2, 0.05, &mut p) }, LicsqStatus::Ok);
    assert!((p - 0.02).abs() < 1e-12, "{p}");

    let mut v = 0.0;
    assert_eq!(unsafe { licsq_transport_max_velocity(h, 2, 0.98, &mut v) }, LicsqStatus::Ok);
    assert!(v > 0.0);
    assert_eq!(unsafe { licsq_transport_max_velocity(h, 2, 1.5, &mut v) }, LicsqStatus::InvalidArgument);
    unsafe { licsq_transport_free(h) };
    unsafe { licsq_transport_free(ptr::null_mut()) };

    let mut raw: *mut LicsqTransport = ptr::null_mut();
    let bad = unsafe { licsq_transport_new(-1.0, 82e-9, 1e5, 0.16, 1e-30, &mut raw) };
    assert_ne!(bad, LicsqStatus::Ok);
    assert!(raw.is_null());
    assert_eq!(unsafe { licsq_transport_error(ptr::null(), 1, 0.03, &mut p) }, LicsqStatus::NullPointer);
}

#[test]
fn timing_and_geometry_helpers() {
    assert_eq!(licsq_entangle_time(4), licsq::transport::entangle_time(4));
    assert_eq!(licsq_qubit_reach(10), licsq::transport::qubit_reach(10));
    assert_eq!(licsq_site_distance(0, 0, 2, 1), 3);
    assert_eq!(licsq_site_distance(0, 0, 0, 0), 0);
    assert_eq!(licsq_site_distance(1, 1, -2, 4), licsq_site_distance(-2, 4, 1, 1));
}

#[test]
fn lattice_balanced_point_is_feasible_in_alpha() {
    let mut h: *mut LicsqLattice = ptr::null_mut();
    assert_eq!(unsafe { licsq_lattice_standard(LicsqLineModel::FineStructure, &mut h) }, LicsqStatus::Ok);
    let (mut ratio, mut alpha) = (0.0, 0.0);
    assert_eq!(unsafe { licsq_lattice_balanced_ratio(h, &mut ratio, &mut alpha) }, LicsqStatus::Ok);
    assert!(ratio > 0.0 && alpha > 0.0 && alpha < 1.0);

    let mut point = LicsqFeasibilityPoint::default();
    let i2 = 1e8;
    let status = unsafe { licsq_lattice_evaluate(h, ratio * i2, i2, 1e6, 1.0, &mut point) };
    assert_eq!(status, LicsqStatus::Ok);
    assert!((point.alpha - alpha).abs() < 1e-9 * alpha.max(1.0), "{} vs {alpha}", point.alpha);
    assert!(point.independent_control_ok);

    let negative = unsafe { licsq_lattice_evaluate(h, -1.0, i2, 1.0, 1.0, &mut point) };
    assert_ne!(negative, LicsqStatus::Ok);
    unsafe { licsq_lattice_free(h) };
}

#[test]
fn ideal_register_sequence() {
    let mut r: *mut LicsqRegister = ptr::null_mut();
    assert_eq!(unsafe { licsq_register_initial(&mut r) }, LicsqStatus::Ok);
    let (mut re, mut im) = (0.0, 0.0);
    assert_eq!(unsafe { licsq_register_amplitude(r, 0, &mut re, &mut im) }, LicsqStatus::Ok);
    assert!((re - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15 && im == 0.0);

    unsafe {
        assert_eq!(licsq_register_step(r, LicsqStep::Create), LicsqStatus::Ok);
        assert_eq!(licsq_register_transport(r, 0.0), LicsqStatus::Ok);
        assert_eq!(licsq_register_step(r, LicsqStep::Swap), LicsqStatus::Ok);
    }
    let mut f = 0.0;
    assert_eq!(unsafe { licsq_register_final_fidelity(r, &mut f) }, LicsqStatus::Ok);
    assert!((f - 1.0).abs() < 1e-12, "{f}");
    let mut c = 0.0;
    let status = unsafe { licsq_register_concurrence(r, LicsqQubit::LiA, LicsqQubit::LiB, &mut c) };
    assert_eq!(status, LicsqStatus::Ok);
    assert!((c - 1.0).abs() < 1e-12, "{c}");
    let mut purity = 0.0;
    assert_eq!(unsafe { licsq_register_purity(r, LicsqQubit::Cs, &mut purity) }, LicsqStatus::Ok);
    assert!((purity - 1.0).abs() < 1e-12);

    // 12 is a padding slot; 24 is past the end.
    for index in [12, LICSQ_REGISTER_LEVELS] {
        let s = unsafe { licsq_register_amplitude(r, index, &mut re, &mut im) };
        assert_eq!(s, LicsqStatus::InvalidArgument, "index {index}");
    }
    let same = unsafe { licsq_register_concurrence(r, LicsqQubit::LiA, LicsqQubit::LiA, &mut c) };
    assert_ne!(same, LicsqStatus::Ok);
    unsafe { licsq_register_free(r) };
}

#[test]
fn protocol_fidelity_is_seeded() {
    let run = |seed| {
        let mut out = LicsqFidelityReport::default();
        let status = unsafe { licsq_protocol_fidelity(0.995, 0.0, 0.01, 2000, seed, &mut out) };
        assert_eq!(status, LicsqStatus::Ok);
        out
    };
    let a = run(7);
    assert_eq!(a, run(7));
    assert_ne!(a.monte_carlo, run(8).monte_carlo);
    let expected = 0.995_f64.powi(4) * 0.99;
    assert!((a.multiplicative - expected).abs() < 1e-12, "{}", a.multiplicative);
    assert!((a.monte_carlo - a.multiplicative).abs() < 5.0 * a.monte_carlo_sigma);

    let mut out = LicsqFidelityReport::default();
    let bad = unsafe { licsq_protocol_fidelity(1.2, 0.0, 0.01, 10, 0, &mut out) };
    assert_eq!(bad, LicsqStatus::InvalidArgument);
}

#[test]
fn stability_from_csv() {
    let mut s = LicsqStabilitySummary::default();
    let path = fixture("synthetic.csv");
    assert_eq!(unsafe { licsq_stability_analyze_csv(path.as_ptr(), &mut s) }, LicsqStatus::Ok);
    assert_eq!(s.samples, 4096);
    assert!((s.rms1_nm - 92.0).abs() < 0.01, "{}", s.rms1_nm);
    assert!((s.rms_diff_nm - 26.0).abs() < 0.01, "{}", s.rms_diff_nm);
    assert!(s.spectrum_computed && s.parseval_error_max.is_finite());

    let two = fixture("two_samples.csv");
    assert_eq!(unsafe { licsq_stability_analyze_csv(two.as_ptr(), &mut s) }, LicsqStatus::Ok);
    assert!(!s.spectrum_computed && s.parseval_error_max.is_nan());

    let bad = fixture("bad_row.csv");
    assert_eq!(unsafe { licsq_stability_analyze_csv(bad.as_ptr(), &mut s) }, LicsqStatus::Parse);
    assert!(last_error().contains('3'));
    let missing = fixture("absent.csv");
    assert_eq!(unsafe { licsq_stability_analyze_csv(missing.as_ptr(), &mut s) }, LicsqStatus::Io);
}

#[test]
fn last_error_is_per_thread() {
    let bogus = CString::new("nope").unwrap();
    let mut h: *mut LicsqSpecies = ptr::null_mut();
    assert_ne!(unsafe { licsq_species_new(bogus.as_ptr(), &mut h) }, LicsqStatus::Ok);
    assert!(!licsq_last_error().is_null());
    let other = std::thread::spawn(|| licsq_last_error().is_null()).join().unwrap();
    assert!(other);
}
