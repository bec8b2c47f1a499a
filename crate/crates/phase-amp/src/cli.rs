//! Workflows behind the command-line interface: single solves, accuracy
//! benchmarks against the reference oracle, screening-parameter scans of
//! the density at the origin, and the scan's peak finder. Everything here
//! is a plain function over the library types so the binary stays thin.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::amplitude::{AmplitudeMethod, SolveOptions};
use crate::assembly::{assemble_with, ContinuumState};
use crate::error::{Error, Result};
use crate::oracle::{scaled_error, solve_reference, OracleConfig};
use crate::potentials::{PotentialKind, RadialContext};

/// Evaluation grid request, parsed from `lo:hi:count[:log]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
    pub log: bool,
}

impl GridSpec {
    pub fn new(lo: f64, hi: f64, count: usize, log: bool) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::Config(format!(
                "grid bounds must satisfy lo < hi, got {lo}:{hi}"
            )));
        }
        if count < 2 {
            return Err(Error::Config(format!(
                "grid needs at least 2 points, got {count}"
            )));
        }
        if log && lo <= 0.0 {
            return Err(Error::Config(
                "logarithmic grids need a positive lower bound".into(),
            ));
        }
        Ok(Self { lo, hi, count, log })
    }

    pub fn points(&self) -> Vec<f64> {
        let n = self.count;
        (0..n)
            .map(|i| {
                let t = i as f64 / (n - 1) as f64;
                if self.log {
                    self.lo * (self.hi / self.lo).powf(t)
                } else {
                    self.lo + (self.hi - self.lo) * t
                }
            })
            .collect()
    }
}

impl std::str::FromStr for GridSpec {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let fields: Vec<&str> = text.split(':').collect();
        if fields.len() < 3 || fields.len() > 4 {
            return Err(Error::Config(format!(
                "grid spec '{text}' is not lo:hi:count[:log]"
            )));
        }
        let lo = fields[0]
            .parse()
            .map_err(|_| Error::Config(format!("bad grid bound '{}'", fields[0])))?;
        let hi = fields[1]
            .parse()
            .map_err(|_| Error::Config(format!("bad grid bound '{}'", fields[1])))?;
        let count = fields[2]
            .parse()
            .map_err(|_| Error::Config(format!("bad grid count '{}'", fields[2])))?;
        let log = match fields.get(3) {
            None => false,
            Some(&"log") => true,
            Some(other) => {
                return Err(Error::Config(format!(
                    "unknown grid suffix '{other}' (expected 'log')"
                )))
            }
        };
        GridSpec::new(lo, hi, count, log)
    }
}

/// Output encoding.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
}

/// Full description of one solver run.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub potential: PotentialKind,
    pub k: f64,
    pub l: u32,
    pub r_min: f64,
    /// N − ν per element.
    pub order: usize,
    pub method: AmplitudeMethod,
    pub grid: GridSpec,
}

impl RunConfig {
    pub fn context(&self) -> Result<RadialContext> {
        RadialContext::new(self.l, self.k, self.potential)
    }

    pub fn solve_options(&self) -> SolveOptions {
        SolveOptions {
            order: self.order,
            ..SolveOptions::default()
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.r_min > 0.0) {
            return Err(Error::Config(format!(
                "r_min must be positive, got {}",
                self.r_min
            )));
        }
        if self.grid.lo < self.r_min * (1.0 - 1e-12) {
            return Err(Error::Config(format!(
                "grid starts at {} but the solution only reaches down to r_min = {}",
                self.grid.lo, self.r_min
            )));
        }
        Ok(())
    }
}

/// One output row of `solve`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolveRow {
    pub r: f64,
    pub s: f64,
    pub c: f64,
    pub y: f64,
    pub phi: f64,
}

/// One output row of `benchmark`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BenchmarkRow {
    pub l: u32,
    pub r: f64,
    pub log10_scaled_error_s: f64,
    pub log10_scaled_error_c: f64,
}

/// Per-l maxima of the benchmark errors.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BenchmarkSummary {
    pub l: u32,
    pub max_scaled_error_s: f64,
    pub max_scaled_error_c: f64,
}

/// One record of an α scan.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScanRecord {
    pub alpha: f64,
    pub psi0: f64,
    pub density: f64,
    pub potential: String,
    pub k: f64,
    pub converged: bool,
}

/// Result of the peak search.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PeakResult {
    pub potential: String,
    pub alpha_star: f64,
    pub psi0_star: f64,
    pub density_star: f64,
}

/// Assembles the state and tabulates (r, S, C, Y, Φ) over the grid.
pub fn run_solve(cfg: &RunConfig) -> Result<Vec<SolveRow>> {
    cfg.validate()?;
    let ctx = cfg.context()?;
    let state = assemble_with(&ctx, cfg.r_min, cfg.method, &cfg.solve_options())?;
    cfg.grid
        .points()
        .iter()
        .map(|&r| {
            Ok(SolveRow {
                r,
                s: state.eval_regular(r)?,
                c: state.eval_irregular(r)?,
                y: state.eval_y(r)?,
                phi: state.eval_phase(r)?,
            })
        })
        .collect()
}

/// Error curves of S and C against the independent oracle for l = 0..=l_max.
pub fn run_benchmark(
    cfg: &RunConfig,
    l_max: u32,
) -> Result<(Vec<BenchmarkRow>, Vec<BenchmarkSummary>)> {
    cfg.validate()?;
    if !matches!(
        cfg.potential,
        PotentialKind::Free | PotentialKind::Coulomb { .. }
    ) {
        return Err(Error::Config(format!(
            "benchmark reference values cover the free and coulomb potentials, \
             not '{}'",
            cfg.potential.tag()
        )));
    }
    let grid = cfg.grid.points();
    let per_l: Vec<(Vec<BenchmarkRow>, BenchmarkSummary)> = (0..=l_max)
        .into_par_iter()
        .map(|l| -> Result<(Vec<BenchmarkRow>, BenchmarkSummary)> {
            let ctx = RadialContext::new(l, cfg.k, cfg.potential)?;
            let state = assemble_with(&ctx, cfg.r_min, cfg.method, &cfg.solve_options())?;
            let oracle = solve_reference(
                &ctx,
                grid.first().copied().unwrap(),
                grid.last().copied().unwrap(),
                true,
                &OracleConfig::default(),
            )?;
            let mut rows = Vec::with_capacity(grid.len());
            let mut max_s = 0.0_f64;
            let mut max_c = 0.0_f64;
            for &r in &grid {
                let amplitude = oracle.amplitude(r)?;
                let err_s =
                    scaled_error(state.eval_regular(r)?, oracle.regular(r)?, amplitude)?;
                let err_c =
                    scaled_error(state.eval_irregular(r)?, oracle.irregular(r)?, amplitude)?;
                max_s = max_s.max(err_s);
                max_c = max_c.max(err_c);
                rows.push(BenchmarkRow {
                    l,
                    r,
                    log10_scaled_error_s: err_s.max(1e-18).log10(),
                    log10_scaled_error_c: err_c.max(1e-18).log10(),
                });
            }
            Ok((
                rows,
                BenchmarkSummary {
                    l,
                    max_scaled_error_s: max_s,
                    max_scaled_error_c: max_c,
                },
            ))
        })
        .collect::<Result<_>>()?;
    let mut rows = Vec::new();
    let mut summaries = Vec::new();
    for (r, s) in per_l {
        rows.extend(r);
        summaries.push(s);
    }
    Ok((rows, summaries))
}

/// Density at the origin for each screening parameter; failed parameters
/// come back with `converged = false` and silent NaNs instead of aborting
/// the scan.
pub fn run_scan_alpha(
    potential_tag: &str,
    z: f64,
    alphas: &[f64],
    k: f64,
    r_min: f64,
    method: AmplitudeMethod,
    order: usize,
) -> Result<Vec<ScanRecord>> {
    let tag = check_screened_tag(potential_tag)?;
    let records = alphas
        .par_iter()
        .map(|&alpha| {
            let record = scan_one(tag, z, alpha, k, r_min, method, order);
            record.unwrap_or(ScanRecord {
                alpha,
                psi0: f64::NAN,
                density: f64::NAN,
                potential: tag.to_string(),
                k,
                converged: false,
            })
        })
        .collect();
    Ok(records)
}

fn check_screened_tag(tag: &str) -> Result<&str> {
    let canonical = match tag.to_ascii_lowercase().as_str() {
        "scp" => "scp",
        "hulthen" => "hulthen",
        "ecscp" => "ecscp",
        other => {
            return Err(Error::Config(format!(
                "density scans cover the screened family scp|hulthen|ecscp, not '{other}'"
            )))
        }
    };
    Ok(canonical)
}

fn scan_one(
    tag: &str,
    z: f64,
    alpha: f64,
    k: f64,
    r_min: f64,
    method: AmplitudeMethod,
    order: usize,
) -> Result<ScanRecord> {
    let potential = PotentialKind::from_tag(tag, z, alpha)?;
    let ctx = RadialContext::new(0, k, potential)?;
    let opts = SolveOptions {
        order,
        ..SolveOptions::default()
    };
    let state = assemble_with(&ctx, r_min, method, &opts)?;
    let psi0 = state.psi_at_origin()?;
    let converged = state.audit(1025, 300.0 / k)?.passed();
    Ok(ScanRecord {
        alpha,
        psi0,
        density: psi0 * psi0,
        potential: tag.to_string(),
        k,
        converged,
    })
}

/// Golden-section maximization of Ψ₀(0) over α, followed by a three-point
/// parabolic refinement. The amplitude mesh is frozen at the bracket's
/// lower edge so the objective is smooth in α at the 1e−13 level the
/// refinement needs.
pub fn run_find_peak(
    potential_tag: &str,
    z: f64,
    bracket: (f64, f64),
    k: f64,
    r_min: f64,
    method: AmplitudeMethod,
    order: usize,
) -> Result<PeakResult> {
    let tag = check_screened_tag(potential_tag)?;
    let (lo0, hi0) = bracket;
    if !(lo0 > 0.0 && hi0 > lo0) {
        return Err(Error::Config(format!(
            "peak bracket must satisfy 0 < lo < hi, got {lo0}:{hi0}"
        )));
    }
    let opts = SolveOptions {
        order,
        mesh_alpha: Some(lo0),
        ..SolveOptions::default()
    };
    let objective = |alpha: f64| -> Result<f64> {
        let potential = PotentialKind::from_tag(tag, z, alpha)?;
        let ctx = RadialContext::new(0, k, potential)?;
        let state = assemble_with(&ctx, r_min, method, &opts)?;
        state.psi_at_origin()
    };

    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let (mut lo, mut hi) = (lo0, hi0);
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = objective(x1)?;
    let mut f2 = objective(x2)?;
    while hi - lo > 1e-7 {
        if f1 > f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = objective(x1)?;
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = objective(x2)?;
        }
    }
    let x = 0.5 * (lo + hi);
    let margin = 1e-3 * (hi0 - lo0);
    if x - lo0 < margin || hi0 - x < margin {
        return Err(Error::Config(format!(
            "maximum of psi0 sits at the bracket edge (alpha = {x:.6}); \
             widen the bracket beyond [{lo0}, {hi0}]"
        )));
    }
    // parabolic refinement on a step wide enough for curvature to beat
    // solver noise
    let h = 1e-4 * (hi0 - lo0).max(1.0);
    let f_minus = objective(x - h)?;
    let f_center = objective(x)?;
    let f_plus = objective(x + h)?;
    let curvature = f_plus - 2.0 * f_center + f_minus;
    let alpha_star = if curvature < 0.0 {
        x - 0.5 * h * (f_plus - f_minus) / curvature
    } else {
        x
    };
    let psi0_star = objective(alpha_star)?;
    Ok(PeakResult {
        potential: tag.to_string(),
        alpha_star,
        psi0_star,
        density_star: psi0_star * psi0_star,
    })
}

// ---------------------------------------------------------------------------
// output encoding
// ---------------------------------------------------------------------------

/// 17 significant digits: enough to round-trip any f64 exactly.
pub fn format_float(value: f64) -> String {
    format!("{value:.16e}")
}

fn version_line() -> String {
    format!("# phase-amp v{}", env!("CARGO_PKG_VERSION"))
}

/// CSV with the version comment, a header row, then data rows.
pub fn write_csv(
    out: &mut dyn Write,
    header: &[&str],
    rows: impl Iterator<Item = Vec<String>>,
) -> Result<()> {
    writeln!(out, "{}", version_line())?;
    writeln!(out, "{}", header.join(","))?;
    for row in rows {
        writeln!(out, "{}", row.join(","))?;
    }
    Ok(())
}

pub fn write_json<T: Serialize>(out: &mut dyn Write, records: &[T]) -> Result<()> {
    serde_json::to_writer_pretty(&mut *out, records)
        .map_err(|e| Error::Io(std::io::Error::other(e)))?;
    writeln!(out)?;
    Ok(())
}

pub fn solve_rows_csv(out: &mut dyn Write, rows: &[SolveRow]) -> Result<()> {
    write_csv(
        out,
        &["r", "S", "C", "Y", "Phi"],
        rows.iter().map(|row| {
            vec![
                format_float(row.r),
                format_float(row.s),
                format_float(row.c),
                format_float(row.y),
                format_float(row.phi),
            ]
        }),
    )
}

pub fn benchmark_csv(
    out: &mut dyn Write,
    rows: &[BenchmarkRow],
    summaries: &[BenchmarkSummary],
) -> Result<()> {
    write_csv(
        out,
        &["l", "r", "log10_scaled_error_S", "log10_scaled_error_C"],
        rows.iter().map(|row| {
            vec![
                row.l.to_string(),
                format_float(row.r),
                format_float(row.log10_scaled_error_s),
                format_float(row.log10_scaled_error_c),
            ]
        }),
    )?;
    for s in summaries {
        writeln!(
            out,
            "# summary l={} max_scaled_error_S={} max_scaled_error_C={}",
            s.l,
            format_float(s.max_scaled_error_s),
            format_float(s.max_scaled_error_c)
        )?;
    }
    Ok(())
}

pub fn scan_csv(out: &mut dyn Write, records: &[ScanRecord]) -> Result<()> {
    write_csv(
        out,
        &["alpha", "psi0", "density", "potential", "k", "converged"],
        records.iter().map(|r| {
            vec![
                format_float(r.alpha),
                format_float(r.psi0),
                format_float(r.density),
                r.potential.clone(),
                format_float(r.k),
                r.converged.to_string(),
            ]
        }),
    )
}

pub fn peak_csv(out: &mut dyn Write, peak: &PeakResult) -> Result<()> {
    write_csv(
        out,
        &["potential", "alpha_star", "psi0_star", "density_star"],
        std::iter::once(vec![
            peak.potential.clone(),
            format_float(peak.alpha_star),
            format_float(peak.psi0_star),
            format_float(peak.density_star),
        ]),
    )
}

/// Parses scan CSV back into records (inverse of [`scan_csv`]).
pub fn parse_scan_csv(text: &str) -> Result<Vec<ScanRecord>> {
    let mut records = Vec::new();
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') || line.starts_with("alpha,") {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 6 {
            return Err(Error::Domain(format!(
                "scan row has {} fields, expected 6: '{line}'",
                fields.len()
            )));
        }
        let number = |s: &str| -> Result<f64> {
            s.parse()
                .map_err(|_| Error::Domain(format!("bad numeric field '{s}'")))
        };
        records.push(ScanRecord {
            alpha: number(fields[0])?,
            psi0: number(fields[1])?,
            density: number(fields[2])?,
            potential: fields[3].to_string(),
            k: number(fields[4])?,
            converged: fields[5]
                .parse()
                .map_err(|_| Error::Domain(format!("bad converged flag '{}'", fields[5])))?,
        });
    }
    Ok(records)
}

/// Convenience wrapper used by CLI and tests to audit a solved state.
pub fn assemble_for(cfg: &RunConfig) -> Result<ContinuumState> {
    cfg.validate()?;
    let ctx = cfg.context()?;
    assemble_with(&ctx, cfg.r_min, cfg.method, &cfg.solve_options())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn grid_spec_parsing() {
        let spec: GridSpec = "0.001:300:1025".parse().unwrap();
        assert_eq!(spec.count, 1025);
        assert!(!spec.log);
        let points = spec.points();
        assert_eq!(points.len(), 1025);
        assert_relative_eq!(points[0], 0.001);
        assert_relative_eq!(points[1024], 300.0);

        let log: GridSpec = "0.01:100:5:log".parse().unwrap();
        assert!(log.log);
        let p = log.points();
        assert_relative_eq!(p[1] / p[0], p[2] / p[1], max_relative = 1e-12);

        assert!("1:2".parse::<GridSpec>().is_err());
        assert!("2:1:5".parse::<GridSpec>().is_err());
        assert!("1:2:1".parse::<GridSpec>().is_err());
        assert!("1:2:5:linear".parse::<GridSpec>().is_err());
        assert!("-1:2:5:log".parse::<GridSpec>().is_err());
    }

    fn free_cfg() -> RunConfig {
        RunConfig {
            potential: PotentialKind::Free,
            k: 1.0,
            l: 0,
            r_min: 0.001,
            order: 12,
            method: AmplitudeMethod::LinearThirdOrder,
            grid: GridSpec::new(0.001, 300.0, 64, false).unwrap(),
        }
    }

    #[test]
    fn solve_free_rows() {
        let rows = run_solve(&free_cfg()).unwrap();
        let scale = (2.0 / std::f64::consts::PI).sqrt();
        assert_eq!(rows.len(), 64);
        for row in &rows {
            assert_relative_eq!(row.s, scale * row.r.sin(), epsilon = 1e-11);
            assert_relative_eq!(row.phi, row.r, epsilon = 1e-10);
        }
    }

    #[test]
    fn solve_rejects_grid_below_r_min() {
        let mut cfg = free_cfg();
        cfg.grid = GridSpec::new(0.0001, 300.0, 16, false).unwrap();
        let err = run_solve(&cfg).unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn benchmark_free_is_tiny() {
        let mut cfg = free_cfg();
        cfg.grid = GridSpec::new(0.001, 300.0, 257, false).unwrap();
        let (rows, summaries) = run_benchmark(&cfg, 0).unwrap();
        assert_eq!(rows.len(), 257);
        assert!(summaries[0].max_scaled_error_s <= 1e-11);
    }

    #[test]
    fn benchmark_rejects_screened() {
        let mut cfg = free_cfg();
        cfg.potential = PotentialKind::ScreenedCoulomb { z: 1.0, alpha: 1.0 };
        assert!(run_benchmark(&cfg, 1).is_err());
    }

    #[test]
    fn scan_produces_records_in_order() {
        let alphas = [0.5, 1.0, 2.0];
        let records = run_scan_alpha(
            "scp",
            1.0,
            &alphas,
            1.0,
            0.001,
            AmplitudeMethod::LinearThirdOrder,
            12,
        )
        .unwrap();
        assert_eq!(records.len(), 3);
        for (record, alpha) in records.iter().zip(alphas) {
            assert_eq!(record.alpha, alpha);
            assert!(record.converged);
            assert_relative_eq!(record.density, record.psi0 * record.psi0);
        }
        assert!(run_scan_alpha(
            "coulomb",
            1.0,
            &alphas,
            1.0,
            0.001,
            AmplitudeMethod::LinearThirdOrder,
            12
        )
        .is_err());
    }

    #[test]
    fn scan_csv_round_trip() {
        let records = vec![
            ScanRecord {
                alpha: 0.25,
                psi0: 2.0018,
                density: 2.0018 * 2.0018,
                potential: "scp".into(),
                k: 1.0,
                converged: true,
            },
            ScanRecord {
                alpha: 1.0 / 3.0,
                psi0: std::f64::consts::E,
                density: std::f64::consts::E * std::f64::consts::E,
                potential: "hulthen".into(),
                k: 2.0,
                converged: false,
            },
        ];
        let mut buffer = Vec::new();
        scan_csv(&mut buffer, &records).unwrap();
        let text = String::from_utf8(buffer).unwrap();
        assert!(text.starts_with("# phase-amp v"));
        let parsed = parse_scan_csv(&text).unwrap();
        assert_eq!(parsed.len(), records.len());
        for (a, b) in records.iter().zip(&parsed) {
            assert_eq!(a.alpha.to_bits(), b.alpha.to_bits());
            assert_eq!(a.psi0.to_bits(), b.psi0.to_bits());
            assert_eq!(a.density.to_bits(), b.density.to_bits());
            assert_eq!(a.potential, b.potential);
            assert_eq!(a.converged, b.converged);
        }
    }

    #[test]
    fn float_format_round_trips() {
        for v in [0.1, 2.001870062315395, 1e-300, -3.5e17, std::f64::consts::PI] {
            let text = format_float(v);
            let back: f64 = text.parse().unwrap();
            assert_eq!(v.to_bits(), back.to_bits(), "{text}");
        }
    }

    #[test]
    fn peak_bracket_validation() {
        assert!(run_find_peak(
            "scp",
            1.0,
            (4.0, 0.5),
            1.0,
            0.001,
            AmplitudeMethod::LinearThirdOrder,
            12
        )
        .is_err());
        // bracket away from the peak reports an edge maximum
        let err = run_find_peak(
            "scp",
            1.0,
            (5.0, 9.0),
            1.0,
            0.001,
            AmplitudeMethod::LinearThirdOrder,
            8,
        )
        .unwrap_err();
        assert!(err.to_string().contains("bracket"), "{err}");
    }
}
