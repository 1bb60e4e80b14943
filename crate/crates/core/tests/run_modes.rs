use std::fs;

use relsw::io::{audit, read_snapshot, run, Mode, RunConfig, Simulation};
use relsw::hydro::PressureLossForm;

fn config(text: &str) -> RunConfig {
    RunConfig::parse(&format!("epsilon=1.0\nsigma2=0.25\n{text}")).unwrap()
}

#[test]
fn euler_only_uniform_keeps_mass_and_momentum() {
    let c = config("mode=euler-only\nfluid_ic=uniform\nfluid_velocity=0.3\nt_final=0.2\nsnapshots=false\n");
    let dir = tempfile::tempdir().unwrap();
    let s = run(&c, dir.path()).unwrap();
    let first = &s.rows[0];
    for r in &s.rows {
        assert!((r.mass - first.mass).abs() <= 1e-14 * first.mass);
        for a in 0..3 {
            assert!((r.momentum[a] - first.momentum[a]).abs() <= 1e-14);
        }
        assert!(r.charge.is_none());
    }
}

#[test]
fn dirac_only_plane_wave_keeps_charge() {
    // RK4 loses O(dt^5) charge per step; a smaller Courant number brings it under 1e-10.
    let c = config("mode=dirac-only\nspinor_ic=plane_wave\ndirac_cfl=0.1\nt_final=1.0\nsnapshots=false\n");
    let dir = tempfile::tempdir().unwrap();
    let s = run(&c, dir.path()).unwrap();
    let q0 = s.rows[0].charge.unwrap();
    for r in &s.rows {
        assert!((r.charge.unwrap() - q0).abs() <= 1e-10 * q0, "{r:?}");
    }
}

#[test]
fn uncoupled_coevolve_matches_separate_runs() {
    let c = config("lambda=0\nkappa=0\nalpha=0\nfluid_ic=acoustic_pulse\nt_final=0.05\n");
    let mut co = Simulation::new(&c).unwrap();
    let mut eu = Simulation::new(&c).unwrap();
    let mut di = Simulation::new(&c).unwrap();
    for _ in 0..co.steps {
        co.step(Mode::Coevolve).unwrap();
        eu.step(Mode::EulerOnly).unwrap();
        di.step(Mode::DiracOnly).unwrap();
    }
    assert_eq!(co.state.fluid.state.data, eu.state.fluid.state.data);
    assert_eq!(co.state.labels.remainder.data, eu.state.labels.remainder.data);
    assert_eq!(co.state.spinor.data, di.state.spinor.data);
}

#[test]
fn output_is_bit_identical_and_listed_in_manifest() {
    let c = config("t_final=0.02\noutput_every=2\nseed=7\n");
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let sa = run(&c, a.path()).unwrap();
    run(&c, b.path()).unwrap();
    for p in &sa.artifacts {
        let name = p.file_name().unwrap();
        assert_eq!(fs::read(p).unwrap(), fs::read(b.path().join(name)).unwrap(), "{name:?}");
    }
    let csv = fs::read_to_string(a.path().join("diagnostics.csv")).unwrap();
    assert!(csv.starts_with(
        "time,mass,momentum_x,momentum_y,momentum_z,charge,density_residual,wave_residual,picard_distance\n"
    ));
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(a.path().join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["seed"], 7);
    assert_eq!(manifest["config_sha256"].as_str().unwrap().len(), 64);
    assert!(!manifest["version"].as_str().unwrap().is_empty());
    let (h, fields) = read_snapshot(&a.path().join("fluid_00000.hdr")).unwrap();
    assert_eq!(h.dims, [1, 1, 64]);
    assert_eq!(h.fields, ["rho_re", "u_re_x", "u_re_y", "u_re_z"]);
    assert_eq!(fields.len(), 4);
}

#[test]
fn picard_run_writes_distances() {
    let c = config("mode=picard\nt_final=0.02\nsnapshots=false\n");
    let dir = tempfile::tempdir().unwrap();
    let s = run(&c, dir.path()).unwrap();
    let p = s.picard.unwrap();
    assert!(p.converged, "{:?}", p.distances);
    let last = s.rows.last().unwrap();
    assert_eq!(last.picard_distance, p.distances.last().copied());
    assert!(dir.path().join("picard.csv").exists());
}

#[test]
fn default_audit_passes_and_sign_flip_fails() {
    let c = RunConfig::example();
    let report = audit(&c).unwrap();
    for ch in &report.checks {
        eprintln!("{} {:e} {:?} {:?} {}", ch.name, ch.measured, ch.lower, ch.upper, ch.pass);
    }
    assert!(report.pass);
    let json: serde_json::Value = serde_json::from_str(&report.to_json()).unwrap();
    assert!(json["checks"].as_array().unwrap().len() >= 10);

    let mut flipped = c.clone();
    flipped.ptilde_form = PressureLossForm::SignFlipped;
    let bad = audit(&flipped).unwrap();
    assert!(!bad.pass);
    assert!(!bad.get("momentum_flux").unwrap().pass);
}
