//! External-surface tests: fixture tables, CSV/JSON round trips, the CLI
//! binary itself, and cross-checks that pair the production path with the
//! reference oracle on quantities the unit tests do not cover.

use std::process::Command;
use std::sync::Arc;

use phase_amp::amplitude::{solve_amplitude, AmplitudeMethod};
use phase_amp::cli::{parse_scan_csv, run_scan_alpha, scan_csv, GridSpec, RunConfig};
use phase_amp::oracle::{
    coulomb_asymptotic_phase, coulomb_asymptotic_y, solve_reference, OracleConfig, ReferenceTable,
};
use phase_amp::phase::{build_phase, find_r_pi, solve_inner_regular};
use phase_amp::potentials::{PotentialKind, RadialContext};

fn fixture_path(name: &str) -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

#[test]
fn fixtures_load_and_validate() {
    for name in ["free_l0_k1.txt", "coulomb_l0_k1.txt", "coulomb_l2_k1.txt"] {
        let table = ReferenceTable::load(fixture_path(name)).unwrap();
        table.validate().unwrap();
        assert_eq!(table.grid.len(), 33);
        assert!(table.accuracy <= 1e-11);
        assert!(!table.generated_by.is_empty());
    }
}

#[test]
fn fixtures_match_fresh_oracle() {
    for name in ["free_l0_k1.txt", "coulomb_l0_k1.txt", "coulomb_l2_k1.txt"] {
        let table = ReferenceTable::load(fixture_path(name)).unwrap();
        let potential =
            PotentialKind::from_tag(&table.potential, table.z, table.alpha).unwrap();
        let ctx = RadialContext::new(table.l, table.k, potential).unwrap();
        let oracle = solve_reference(
            &ctx,
            table.grid[0],
            *table.grid.last().unwrap(),
            true,
            &OracleConfig::default(),
        )
        .unwrap();
        for (i, &r) in table.grid.iter().enumerate() {
            let amplitude = oracle.amplitude(r).unwrap();
            assert!(
                (oracle.regular(r).unwrap() - table.regular[i]).abs() <= 1e-10 * amplitude,
                "{name}: regular at r = {r}"
            );
            assert!(
                (oracle.irregular(r).unwrap() - table.irregular[i]).abs() <= 1e-10 * amplitude,
                "{name}: irregular at r = {r}"
            );
        }
    }
}

#[test]
fn fixture_serialization_is_stable() {
    // load → write reproduces the committed bytes
    let path = fixture_path("coulomb_l0_k1.txt");
    let committed = std::fs::read_to_string(&path).unwrap();
    let table = ReferenceTable::load(&path).unwrap();
    let mut buffer = Vec::new();
    table.write_to(&mut buffer).unwrap();
    assert_eq!(committed, String::from_utf8(buffer).unwrap());
}

#[test]
fn scan_csv_round_trip_on_real_records() {
    let records = run_scan_alpha(
        "hulthen",
        1.0,
        &[0.5, 1.0, 1.5],
        1.0,
        0.001,
        AmplitudeMethod::LinearThirdOrder,
        12,
    )
    .unwrap();
    let mut buffer = Vec::new();
    scan_csv(&mut buffer, &records).unwrap();
    let parsed = parse_scan_csv(&String::from_utf8(buffer).unwrap()).unwrap();
    assert_eq!(records.len(), parsed.len());
    for (a, b) in records.iter().zip(&parsed) {
        assert_eq!(a.alpha.to_bits(), b.alpha.to_bits());
        assert_eq!(a.psi0.to_bits(), b.psi0.to_bits());
        assert_eq!(a.converged, b.converged);
    }
}

#[test]
fn scan_is_deterministic_across_runs() {
    let run = || {
        run_scan_alpha(
            "scp",
            1.0,
            &[0.3, 1.1, 4.2],
            1.0,
            0.001,
            AmplitudeMethod::LinearThirdOrder,
            12,
        )
        .unwrap()
        .iter()
        .map(|r| r.psi0.to_bits())
        .collect::<Vec<_>>()
    };
    assert_eq!(run(), run());
}

#[test]
fn coulomb_phase_approaches_the_asymptotic_form() {
    // Φ from the quadrature construction against the independent
    // large-argument expansion (phase constant from the complex
    // log-gamma): the full forms agree to ~1e-9, while the bare
    // logarithmic form r + ln 2r + σ₀ is approached at the O(1/2r) rate.
    let ctx = RadialContext::new(0, 1.0, PotentialKind::Coulomb { z: 1.0 }).unwrap();
    let amp =
        Arc::new(solve_amplitude(&ctx, 0.001, AmplitudeMethod::LinearThirdOrder, 12).unwrap());
    let inner = solve_inner_regular(&ctx, 1.5 * std::f64::consts::PI).unwrap();
    let r_pi = find_r_pi(&inner).unwrap();
    let phase = build_phase(amp, r_pi).unwrap();
    for r in [120.0, 300.0] {
        let ours = phase.eval(r).unwrap();
        let reference = coulomb_asymptotic_phase(0, 1.0, 1.0, r).unwrap();
        assert!(
            (ours - reference).abs() <= 1e-8,
            "full asymptotic phase at r = {r}: {ours} vs {reference}"
        );
    }
    let sigma0 = coulomb_asymptotic_phase(0, 1.0, 1.0, 1e9).unwrap() - 1e9 - (2e9_f64).ln();
    let bare = |r: f64| r + (2.0 * r).ln() + sigma0;
    let drift_100 = (phase.eval(100.0).unwrap() - bare(100.0)).abs();
    let drift_300 = (phase.eval(300.0).unwrap() - bare(300.0)).abs();
    // leading correction is (η² + l(l+1))/(2r): about 5e-3 and 1.7e-3 here
    assert!(drift_300 < drift_100);
    assert!((drift_300 - 1.0 / 600.0).abs() <= 2e-5, "drift {drift_300}");
}

#[test]
fn amplitude_matches_oracle_envelope_for_coulomb() {
    let ctx = RadialContext::new(0, 1.0, PotentialKind::Coulomb { z: 1.0 }).unwrap();
    let amp = solve_amplitude(&ctx, 0.001, AmplitudeMethod::LinearThirdOrder, 12).unwrap();
    for r in [1.0, 10.0, 100.0] {
        let envelope = coulomb_asymptotic_y(0, 1.0, 1.0, 300.0).unwrap();
        let direct = amp.y_value(300.0).unwrap();
        assert!(
            ((direct - envelope) / envelope).abs() <= 1e-9,
            "r = {r}: {direct} vs {envelope}"
        );
    }
    // oracle S² + C² agrees with Y at interior radii
    let oracle = solve_reference(&ctx, 0.001, 300.0, true, &OracleConfig::default()).unwrap();
    for r in [1.0, 10.0, 100.0] {
        let y_oracle = oracle.amplitude(r).unwrap().powi(2);
        let y_direct = amp.y_value(r).unwrap();
        assert!(
            ((y_direct - y_oracle) / y_oracle).abs() <= 1e-9,
            "r = {r}: {y_direct} vs {y_oracle}"
        );
    }
}

#[test]
fn asymptotic_amplitude_limit_for_screened_potentials() {
    // for decaying potentials A(300) is already at its limit √(2/(kπ))
    let limit = (2.0 / std::f64::consts::PI).sqrt();
    for alpha in [0.1, 1.0] {
        for tag in ["scp", "hulthen", "ecscp"] {
            let potential = PotentialKind::from_tag(tag, 1.0, alpha).unwrap();
            let ctx = RadialContext::new(0, 1.0, potential).unwrap();
            let amp =
                solve_amplitude(&ctx, 0.001, AmplitudeMethod::LinearThirdOrder, 12).unwrap();
            let a = amp.amplitude(300.0).unwrap();
            assert!(
                (a - limit).abs() <= 1e-6,
                "{tag} alpha {alpha}: A(300) = {a}"
            );
        }
    }
}

#[test]
fn run_config_rejects_bad_grid() {
    let cfg = RunConfig {
        potential: PotentialKind::Free,
        k: 1.0,
        l: 0,
        r_min: 0.01,
        order: 12,
        method: AmplitudeMethod::LinearThirdOrder,
        grid: GridSpec::new(0.001, 300.0, 8, false).unwrap(),
    };
    let err = phase_amp::cli::run_solve(&cfg).unwrap_err();
    assert_eq!(err.exit_code(), 2);
}

// ---------------------------------------------------------------------------
// the binary itself
// ---------------------------------------------------------------------------

fn binary() -> Command {
    Command::new(env!("CARGO_BIN_EXE_phase-amp"))
}

#[test]
fn cli_solve_free_csv() {
    let output = binary()
        .args([
            "solve",
            "--potential",
            "free",
            "--grid",
            "0.001:10:5",
        ])
        .output()
        .unwrap();
    assert!(output.status.success());
    let text = String::from_utf8(output.stdout).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("# phase-amp v"));
    assert_eq!(lines.next().unwrap(), "r,S,C,Y,Phi");
    let first: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(first.len(), 5);
    let s: f64 = first[1].parse().unwrap();
    let expected = (2.0 / std::f64::consts::PI).sqrt() * 0.001_f64.sin();
    assert!((s - expected).abs() <= 1e-11);
}

#[test]
fn cli_exit_code_for_bad_r_min() {
    let output = binary()
        .args([
            "solve",
            "--potential",
            "free",
            "--r-min",
            "10",
            "--grid",
            "10:20:3",
        ])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));
    let stderr = String::from_utf8(output.stderr).unwrap();
    assert!(stderr.contains("r_pi"), "{stderr}");
}

#[test]
fn cli_scan_json() {
    let output = binary()
        .args([
            "scan-alpha",
            "--potential",
            "scp",
            "--alpha-grid",
            "0.5:2:3",
            "--format",
            "json",
        ])
        .output()
        .unwrap();
    assert!(output.status.success());
    let parsed: serde_json::Value =
        serde_json::from_slice(&output.stdout).expect("valid JSON output");
    let records = parsed.as_array().unwrap();
    assert_eq!(records.len(), 3);
    assert!(records[0]["converged"].as_bool().unwrap());
    assert!(records[0]["psi0"].as_f64().unwrap() > 0.0);
}

#[test]
fn cli_rejects_scan_of_unscreened_potential() {
    let output = binary()
        .args(["scan-alpha", "--potential", "coulomb"])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));
}
