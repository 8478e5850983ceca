use std::f64::consts::PI;
use std::fmt::Display;

use nalgebra::Vector3;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;
use thiserror::Error;

use spinprobe::cluster::{build_cluster_state, verify_cluster, ClusterError};
use spinprobe::detection::{
    direction_rng, sample_quadratures, solve_spin_components, FieldKind, Homodyne, QuadratureKind, SpinField,
    SpinFieldSample,
};
use spinprobe::dynamics::{
    emission_scan as scan_directions, error_curve as curve, window_for_photons, EmissionSetup, RadiativeParams,
    ThetaScan, DEFAULT_THETA_NODES,
};
use spinprobe::geometry::coverage_check;
use spinprobe::pauli::{Pauli, MAX_SITES};
use spinprobe::reconstruction::{
    default_resolution, plan_grid, position_correlation_estimate, reconstruct_sites, structure_factor_estimate,
    valence_bond, Estimate, GridField, MomentumGrid, PositionOperatorMap, ReconstructionError,
};
use spinprobe::{Axis, LatticeSpec, ScatterGeometry};

use crate::config::{ConfigError, Format, Laser, RunConfig};
use crate::output::{json_document, num, svg_header, Csv, OutputSet};
use crate::svg::{Plot, Series};

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Coverage(String),
    #[error("{0}")]
    Verification(String),
    #[error("{0}")]
    Compute(String),
    #[error("writing output: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Coverage(_) => 3,
            CliError::Verification(_) => 4,
            CliError::Compute(_) | CliError::Io(_) => 1,
        }
    }
}

fn compute(e: impl Display) -> CliError {
    CliError::Compute(e.to_string())
}

/// Files to write, lines for stdout, and a failure to report once the files
/// are on disk.
pub struct Outcome {
    pub files: OutputSet,
    pub summary: Vec<String>,
    pub failure: Option<CliError>,
}

fn axis_name(a: Axis) -> String {
    a.as_char().to_string()
}

fn setup(lattice: &LatticeSpec, laser: &Laser, phi: f64) -> Result<EmissionSetup, CliError> {
    let geometry = ScatterGeometry::new(laser.k_l, laser.dir, laser.sigma_l, 0.0, phi)
        .map_err(|e| ConfigError::Invalid { path: "geometry".into(), reason: e.to_string() })?;
    let mut setup = EmissionSetup::new(geometry, lattice.clone());
    setup.contraction = laser.contraction;
    Ok(setup)
}

fn radiative(gamma0: f64, strength: f64, t: f64) -> Result<RadiativeParams, CliError> {
    RadiativeParams::new(gamma0, strength, t).map_err(compute)
}

pub fn emission_scan(cfg: &mut RunConfig) -> Result<Outcome, CliError> {
    let model = cfg.model()?;
    let laser = cfg.laser_z(model.lattice.r0())?;
    let (gamma0, strength) = cfg.radiative()?;
    let windows = cfg.windows(vec![0.001])?;
    let phi = cfg.phi()?;
    let n_theta = cfg.theta_points(91)?;
    let alpha = cfg.polarization()?;
    let format = cfg.format();
    let dir = cfg.out_dir();
    let setup = setup(&model.lattice, &laser, phi)?;

    let angles: Vec<(f64, f64)> = (0..n_theta).map(|i| (PI * i as f64 / (n_theta - 1) as f64, phi)).collect();
    let mut scans = Vec::new();
    for &t in &windows {
        let rad = radiative(gamma0, strength, t)?;
        scans.push((t, scan_directions(&angles, &setup, &rad, &model).map_err(compute)?));
    }

    let mut files = OutputSet::new(&dir);
    match format {
        Format::Csv => {
            let cols = ["theta", "phi", "alpha", "beta", "Re(N)", "Im(N)", "Re(Ntilde)", "Im(Ntilde)", "T"];
            let mut csv = Csv::new(cfg, "emission-scan", &cols);
            for (t, records) in &scans {
                for r in records {
                    for a in Axis::ALL {
                        for b in Axis::ALL {
                            let (n, nt) = (r.get(a, b), r.get_tilde(a, b));
                            csv.row(&[
                                num(r.theta),
                                num(r.phi),
                                axis_name(a),
                                axis_name(b),
                                num(n.re),
                                num(n.im),
                                num(nt.re),
                                num(nt.im),
                                num(*t),
                            ]);
                        }
                    }
                }
            }
            files.add("emission_scan.csv", csv.finish());
        }
        Format::Json => {
            let rows: Vec<_> = scans
                .iter()
                .flat_map(|(t, records)| {
                    records.iter().map(move |r| {
                        let pairs: Vec<_> = Axis::ALL
                            .iter()
                            .flat_map(|&a| Axis::ALL.iter().map(move |&b| (a, b)))
                            .map(|(a, b)| {
                                let (n, nt) = (r.get(a, b), r.get_tilde(a, b));
                                json!({ "alpha": axis_name(a), "beta": axis_name(b), "N": [n.re, n.im], "Ntilde": [nt.re, nt.im] })
                            })
                            .collect();
                        json!({ "T": t, "theta": r.theta, "phi": r.phi, "entries": pairs })
                    })
                })
                .collect();
            files.add("emission_scan.json", json_document(cfg, "emission-scan", json!({ "records": rows })));
        }
    }

    let mut plot = Plot {
        title: format!("{}-polarized photons per direction, phi = {}", alpha.as_char(), num(phi)),
        x_label: "theta (rad)".into(),
        y_label: format!("photons N_{0}{0}", alpha.as_char()),
        ..Default::default()
    };
    let mut any = false;
    for (t, records) in &scans {
        let n: Vec<(f64, f64)> = records.iter().map(|r| (r.theta, r.get(alpha, alpha).re)).collect();
        let nt: Vec<(f64, f64)> = records.iter().map(|r| (r.theta, r.get_tilde(alpha, alpha).re)).collect();
        any |= n.iter().chain(&nt).any(|p| p.1 != 0.0);
        plot.series.push(Series { label: format!("N, T = {}", num(*t)), points: n, dashed: false });
        plot.series.push(Series { label: format!("Ntilde, T = {}", num(*t)), points: nt, dashed: true });
    }
    if !any {
        plot.series.clear();
        plot.annotation = Some("no photons emitted: every counting window is T = 0".into());
    }
    files.add("emission_scan.svg", plot.render(&svg_header(cfg, "emission-scan")));

    let mut summary = Vec::new();
    for (t, records) in &scans {
        let peak = records.iter().map(|r| r.get(alpha, alpha).re).fold(0.0, f64::max);
        let dev = records
            .iter()
            .map(|r| (r.get(alpha, alpha) - r.get_tilde(alpha, alpha)).re.abs())
            .fold(0.0, f64::max);
        let rel = if peak > 0.0 { dev / peak } else { 0.0 };
        let a = alpha.as_char();
        summary.push(format!("T = {}: peak N_{a}{a} = {peak:.6e}, max |N - Ntilde| / peak = {rel:.3e}", num(*t)));
    }
    Ok(Outcome { files, summary, failure: None })
}

/// Default counting-window sweep for error curves.
fn default_windows() -> Vec<f64> {
    (0..=16).map(|i| 0.05 * i as f64).collect()
}

#[derive(Serialize)]
struct SeriesReport {
    #[serde(rename = "J_over_B")]
    j_over_b: f64,
    points: Vec<spinprobe::dynamics::ErrorPoint>,
    operating_point: OperatingPoint,
}

#[derive(Serialize)]
struct OperatingPoint {
    photons: f64,
    #[serde(rename = "T")]
    t: f64,
    #[serde(rename = "E_R")]
    e_r: f64,
}

pub fn error_curve(cfg: &mut RunConfig) -> Result<Outcome, CliError> {
    let b = cfg.field()?;
    let series = cfg.series(vec![-0.5, -0.1, -0.01])?;
    let models = series
        .iter()
        .enumerate()
        .map(|(i, jb)| cfg.model_with(jb * b, &format!("experiment.J_over_B[{i}]")))
        .collect::<Result<Vec<_>, _>>()?;
    let lattice = models[0].lattice.clone();
    let laser = cfg.laser_z(lattice.r0())?;
    let (gamma0, strength) = cfg.radiative()?;
    let windows = cfg.windows(default_windows())?;
    let phi = cfg.phi()?;
    let n_theta = cfg.theta_points(DEFAULT_THETA_NODES)?;
    let alpha = cfg.polarization()?;
    let target = cfg.photon_target()?;
    let format = cfg.format();
    let dir = cfg.out_dir();
    let setup = setup(&lattice, &laser, phi)?;

    let rad = radiative(gamma0, strength, 0.0)?;
    let scan = ThetaScan::new(phi, n_theta, &setup, &rad).map_err(compute)?;
    let mut reports = Vec::new();
    for (jb, model) in series.iter().zip(&models) {
        let points = curve(&scan, alpha, &rad, model, &windows).map_err(compute)?;
        let t = window_for_photons(target, &scan, alpha, &rad, model).map_err(compute)?;
        let profile = scan.profile(alpha, &rad.with_t(t), model).map_err(compute)?;
        let operating_point = OperatingPoint { photons: profile.photons(), t, e_r: profile.relative_error().map_err(compute)? };
        reports.push(SeriesReport { j_over_b: *jb, points, operating_point });
    }

    let mut files = OutputSet::new(&dir);
    match format {
        Format::Csv => {
            let mut csv = Csv::new(cfg, "error-curve", &["photon_count", "E_R", "J_over_B"]);
            for r in &reports {
                for p in &r.points {
                    csv.row(&[num(p.photons), num(p.e_r), num(r.j_over_b)]);
                }
            }
            files.add("error_curve.csv", csv.finish());
        }
        Format::Json => files.add("error_curve.json", json_document(cfg, "error-curve", json!({ "series": reports }))),
    }
    let plot = Plot {
        title: format!("relative error of the ground-state estimate, {}-polarized", alpha.as_char()),
        x_label: "emitted photons".into(),
        y_label: "E_R".into(),
        series: reports
            .iter()
            .map(|r| Series {
                label: format!("J/B = {}", num(r.j_over_b)),
                points: r.points.iter().map(|p| (p.photons, p.e_r)).collect(),
                dashed: false,
            })
            .collect(),
        markers: vec![(target, format!("{} photons", num(target)))],
        annotation: None,
    };
    files.add("error_curve.svg", plot.render(&svg_header(cfg, "error-curve")));
    let summary = reports
        .iter()
        .map(|r| {
            format!(
                "J/B = {}: E_R = {:.4} at {:.0} photons (T = {:.4})",
                num(r.j_over_b),
                r.operating_point.e_r,
                r.operating_point.photons,
                r.operating_point.t
            )
        })
        .collect();
    Ok(Outcome { files, summary, failure: None })
}

fn plan(lattice: &LatticeSpec, laser: &Laser, resolution: usize) -> Result<MomentumGrid, CliError> {
    plan_grid(lattice, laser.k_l, resolution).map_err(|e| match e {
        ReconstructionError::CoverageRefused { klr0, required } => CliError::Coverage(format!(
            "coverage refused: k_L r0 = {klr0} is below the required {required:.6} for a {}-dimensional lattice; set geometry.klr0 >= {required:.6}",
            lattice.dims()
        )),
        other => compute(other),
    })
}

fn point_geometry(grid: &MomentumGrid, i: usize, k_l: f64) -> Result<ScatterGeometry, CliError> {
    let p = grid.points[i];
    let l = Vector3::new(p.laser_dir[0], p.laser_dir[1], p.laser_dir[2]);
    ScatterGeometry::new(k_l, l, Axis::Z, p.theta, p.phi).map_err(compute)
}

/// Stream offset separating single-shot correlation runs from the
/// repetition-averaged field run.
const SHOT_STREAM: u64 = 1 << 32;

#[derive(Serialize)]
struct SiteRecord {
    site: Vec<i64>,
    x: Estimate,
    y: Estimate,
}

#[derive(Serialize)]
struct CorrelationRecord {
    a: Vec<i64>,
    b: Vec<i64>,
    beta: String,
    beta_prime: String,
    value: f64,
    std_error: f64,
}

#[derive(Serialize)]
struct SampleRecord {
    ktilde: Vec<f64>,
    beta: String,
    kind: String,
    value: f64,
    variance: f64,
}

pub fn reconstruct(cfg: &mut RunConfig) -> Result<Outcome, CliError> {
    let model = cfg.model()?;
    let lattice = model.lattice.clone();
    let dims = lattice.dims();
    let laser = cfg.laser_z(lattice.r0())?;
    let resolution = cfg.resolution(default_resolution(&lattice))?;
    let m = cfg.repetitions()?;
    let kappa = cfg.kappa()?;
    let seed = cfg.seed();
    let sites = cfg.sites(&lattice)?;
    let requests = cfg.correlations(&lattice)?;
    let shots = cfg.shots()?;
    let format = cfg.format();
    let dir = cfg.out_dir();

    let grid = plan(&lattice, &laser, resolution)?;
    let mut field = SpinField::zeros(&lattice);
    for s in &sites {
        field.set(s.site, Axis::X, s.x);
        field.set(s.site, Axis::Y, s.y);
    }
    let settings = Homodyne { contraction: laser.contraction, kappa, repetitions: m };
    let singular = |i: usize, e: &dyn Display| {
        CliError::Compute(format!(
            "grid point {:?}: {e}; choose another geometry.klr0 or geometry.contraction",
            grid.points[i].ktilde
        ))
    };

    let solved = (0..grid.len())
        .into_par_iter()
        .map(|i| -> Result<[SpinFieldSample; 4], CliError> {
            let g = point_geometry(&grid, i, laser.k_l)?;
            let mut rng = direction_rng(seed, i as u64);
            let x = sample_quadratures(&g, &field, &model, QuadratureKind::X, &settings, &mut rng).map_err(compute)?;
            let p = sample_quadratures(&g, &field, &model, QuadratureKind::P, &settings, &mut rng).map_err(compute)?;
            solve_spin_components(&x, &p, &g, settings.contraction, kappa, grid.points[i].ktilde).map_err(|e| singular(i, &e))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let samples: Vec<SpinFieldSample> = solved.into_iter().flatten().collect();

    let maps = [Axis::X, Axis::Y]
        .iter()
        .map(|&b| {
            let c = GridField::from_samples(&grid, &samples, FieldKind::C, b).map_err(compute)?;
            let s = GridField::from_samples(&grid, &samples, FieldKind::S, b).map_err(compute)?;
            reconstruct_sites(&grid, &c, &s, &lattice).map_err(compute)
        })
        .collect::<Result<Vec<PositionOperatorMap>, _>>()?;

    // connected structure factors from single-shot readouts at every point
    let structure: Option<[Vec<Estimate>; 2]> = if shots > 1 {
        let single = Homodyne { repetitions: 1, ..settings };
        let per_point = (0..grid.len())
            .into_par_iter()
            .map(|i| -> Result<[Estimate; 2], CliError> {
                let g = point_geometry(&grid, i, laser.k_l)?;
                let mut rng = direction_rng(seed, SHOT_STREAM + i as u64);
                let mut vals: [Vec<f64>; 4] = Default::default();
                for _ in 0..shots {
                    let x = sample_quadratures(&g, &field, &model, QuadratureKind::X, &single, &mut rng).map_err(compute)?;
                    let p = sample_quadratures(&g, &field, &model, QuadratureKind::P, &single, &mut rng).map_err(compute)?;
                    let s = solve_spin_components(&x, &p, &g, single.contraction, kappa, grid.points[i].ktilde)
                        .map_err(|e| singular(i, &e))?;
                    for (v, s) in vals.iter_mut().zip(s) {
                        v.push(s.value);
                    }
                }
                let correction = shots as f64 / (shots as f64 - 1.0);
                let [cx, cy, sx, sy] = vals.map(|v| centered(&v));
                Ok([(&cx, &sx), (&cy, &sy)].map(|(c, s)| {
                    let e = structure_factor_estimate(c, s);
                    Estimate { value: e.value * correction, variance: e.variance * correction * correction }
                }))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Some([0, 1].map(|b| per_point.iter().map(|p| p[b]).collect()))
    } else {
        None
    };

    let mut correlations = Vec::new();
    if let Some(structure) = &structure {
        for r in &requests {
            let map = &maps[r.beta.index()];
            let ma = map.get(r.a).ok_or_else(|| compute(format!("site {:?} missing", r.a)))?;
            let mb = map.get(r.b).ok_or_else(|| compute(format!("site {:?} missing", r.b)))?;
            let offset = [r.b[0] - r.a[0], r.b[1] - r.a[1], r.b[2] - r.a[2]];
            let g = position_correlation_estimate(&grid, &structure[r.beta.index()], offset).map_err(compute)?;
            let value = ma.value * mb.value + g.value;
            let variance = mb.value.powi(2) * ma.variance + ma.value.powi(2) * mb.variance + g.variance;
            correlations.push(CorrelationRecord {
                a: r.a[..dims].to_vec(),
                b: r.b[..dims].to_vec(),
                beta: axis_name(r.beta),
                beta_prime: axis_name(r.beta),
                value,
                std_error: variance.sqrt(),
            });
        }
    }
    let bond = match &structure {
        Some([sx, sy]) => {
            let c = |v: &[Estimate]| v.iter().map(|e| Complex64::from(e.value)).collect::<Vec<_>>();
            Some(valence_bond(&grid, &c(sx), &c(sy)).map_err(compute)?)
        }
        None => None,
    };

    let site_records: Vec<SiteRecord> = maps[0]
        .sites
        .iter()
        .zip(maps[0].values.iter().zip(&maps[1].values))
        .map(|(s, (x, y))| SiteRecord { site: s[..dims].to_vec(), x: *x, y: *y })
        .collect();
    let cov = coverage_check(&lattice, laser.k_l);
    let mut doc = json!({
        "lattice": {
            "extent": lattice.extent(),
            "r0": lattice.r0(),
            "occupancy": lattice.occupancy(),
            "sites": lattice.site_count(),
        },
        "grid": {
            "resolution": grid.resolution,
            "points": grid.len(),
            "klr0": grid.klr0,
            "required_klr0": cov.required_klr0,
            "coverage_margin": grid.coverage_margin,
        },
        "repetitions": m,
        "seed": seed,
        "shots": shots,
        "sites": site_records,
        "valence_bond_connected": bond,
    });
    let sample_records: Vec<SampleRecord> = samples
        .iter()
        .map(|s| SampleRecord {
            ktilde: s.ktilde[..dims.max(2)].to_vec(),
            beta: axis_name(s.component),
            kind: s.kind.as_str().to_string(),
            value: s.value,
            variance: s.variance,
        })
        .collect();

    let mut files = OutputSet::new(&dir);
    match format {
        Format::Csv => {
            let mut cols = vec!["ktilde_x", "ktilde_y"];
            if dims == 3 {
                cols.push("ktilde_z");
            }
            cols.extend(["beta", "kind", "value", "variance", "M", "seed"]);
            let mut csv = Csv::new(cfg, "reconstruct", &cols);
            for s in &samples {
                let mut row: Vec<String> = s.ktilde[..dims.max(2)].iter().map(|&k| num(k)).collect();
                row.extend([
                    axis_name(s.component),
                    s.kind.as_str().to_string(),
                    num(s.value),
                    num(s.variance),
                    m.to_string(),
                    seed.to_string(),
                ]);
                csv.row(&row);
            }
            files.add("samples.csv", csv.finish());

            let mut cols = vec!["n", "m"];
            if dims == 3 {
                cols.push("l");
            }
            cols.extend(["n'", "m'"]);
            if dims == 3 {
                cols.push("l'");
            }
            cols.extend(["beta", "beta'", "value", "std_error"]);
            let mut csv = Csv::new(cfg, "reconstruct", &cols);
            for c in &correlations {
                let coords = |s: &[i64]| (0..dims.max(2)).map(|i| s.get(i).copied().unwrap_or(0).to_string()).collect::<Vec<_>>();
                let mut row = coords(&c.a);
                row.extend(coords(&c.b));
                row.extend([c.beta.clone(), c.beta_prime.clone(), num(c.value), num(c.std_error)]);
                csv.row(&row);
            }
            files.add("correlations.csv", csv.finish());
        }
        Format::Json => {
            doc["samples"] = serde_json::to_value(&sample_records).expect("samples serialize");
            doc["correlations"] = serde_json::to_value(&correlations).expect("correlations serialize");
        }
    }
    files.add("reconstruction.json", json_document(cfg, "reconstruct", doc));

    let worst = sites_error(&field, &maps);
    let mut summary = vec![
        format!("grid: {} points at resolution {}, coverage margin {:.4}", grid.len(), grid.resolution, grid.coverage_margin),
        format!("max |reconstructed - input| over sites: {worst:.3e}"),
    ];
    for c in &correlations {
        summary.push(format!("<J_{0}{1:?} J_{0}{2:?}> = {3:.6} +- {4:.2e}", c.beta, c.a, c.b, c.value, c.std_error));
    }
    Ok(Outcome { files, summary, failure: None })
}

fn centered(v: &[f64]) -> Vec<f64> {
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    v.iter().map(|x| x - mean).collect()
}

fn sites_error(field: &SpinField, maps: &[PositionOperatorMap]) -> f64 {
    maps.iter()
        .flat_map(|m| m.sites.iter().zip(&m.values).map(move |(s, e)| (e.value - field.get(*s, m.component)).abs()))
        .fold(0.0, f64::max)
}

pub fn verify(cfg: &mut RunConfig) -> Result<Outcome, CliError> {
    let (rows, cols) = cfg.cluster_size(MAX_SITES)?;
    let tolerance = cfg.tolerance()?;
    let perturb = cfg.perturb(rows * cols)?;
    let dir = cfg.out_dir();
    let cluster = |e: ClusterError| compute(e);
    let mut state = build_cluster_state(rows, cols).map_err(cluster)?;
    for &s in &perturb {
        state.apply_pauli(Pauli::Z, s).map_err(cluster)?;
    }
    let report = verify_cluster(&state, tolerance).map_err(cluster)?;
    let mut files = OutputSet::new(&dir);
    files.add("verification.json", json_document(cfg, "verify-cluster", json!({ "perturbed": perturb, "report": &report })));
    let failing: Vec<String> = report
        .stabilizers
        .iter()
        .filter(|c| (c.expectation - 1.0).abs() > tolerance)
        .map(|c| format!("{} ({:+.3})", c.center, c.expectation))
        .collect();
    let summary = vec![format!(
        "{rows}x{cols} cluster: {} stabilizers, min expectation {:+.12}, max momentum-route deviation {:.3e}",
        report.stabilizers.len(),
        report.min_expectation,
        report.max_deviation
    )];
    let failure = (!report.pass).then(|| {
        let detail = if failing.is_empty() {
            format!("momentum route deviates by {:.3e}", report.max_deviation)
        } else {
            format!("stabilizers off +1 at centres {}", failing.join(", "))
        };
        CliError::Verification(format!("verification failed: {detail}"))
    });
    Ok(Outcome { files, summary, failure })
}

pub fn plan_geometry(cfg: &mut RunConfig) -> Result<Outcome, CliError> {
    let lattice = cfg.lattice()?;
    let laser = cfg.laser(lattice.r0())?;
    let resolution = cfg.resolution(default_resolution(&lattice))?;
    let format = cfg.format();
    let dir = cfg.out_dir();
    let grid = plan(&lattice, &laser, resolution)?;
    let mut files = OutputSet::new(&dir);
    match format {
        Format::Csv => {
            let cols =
                ["ktilde_x", "ktilde_y", "ktilde_z", "theta", "phi", "laser_x", "laser_y", "laser_z", "weight"];
            let mut csv = Csv::new(cfg, "plan-geometry", &cols);
            for p in &grid.points {
                let mut row: Vec<String> = p.ktilde.iter().map(|&k| num(k)).collect();
                row.extend([num(p.theta), num(p.phi)]);
                row.extend(p.laser_dir.iter().map(|&l| num(l)));
                row.push(num(p.weight));
                csv.row(&row);
            }
            files.add("grid.csv", csv.finish());
        }
        Format::Json => files.add("grid.json", json_document(cfg, "plan-geometry", json!({ "grid": &grid }))),
    }
    let summary = vec![format!(
        "{} points, resolution {}, k_L r0 = {}, coverage margin {:.4}",
        grid.len(),
        grid.resolution,
        num(grid.klr0),
        grid.coverage_margin
    )];
    Ok(Outcome { files, summary, failure: None })
}
