use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use agrt::bundle::{geodesic_derivative_field, FiberField};
use agrt::domain::Domain;
use agrt::geometry::BoundaryPoint;
use agrt::holomorphic::{holomorphicity_report, integrating_factor};
use agrt::inversion::{reconstruct_attenuated, Diagnostics};
use agrt::io;
use agrt::phantom::gauge_pair;
use agrt::transport::{adjoint, attenuation_weight, forward_attenuated, FirstDegree, FnIntegrand};
use agrt::{BoundaryField, BundleField, Complex, OneFormField, ScalarField};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::json;

use crate::config::Config;
use crate::{CliError, Common};

/// Loads `--config` and applies the command line overrides.
pub fn load_config(common: &Common) -> Result<Config, CliError> {
    let path = common.config.as_ref().ok_or_else(|| CliError::config("--config is required"))?;
    let mut cfg = Config::load(path)?;
    if let Some((nx, nt)) = common.grid {
        cfg.grid.n_x = nx;
        cfg.grid.n_theta = nt;
        cfg.grid.n_phi = None;
        cfg.domain()?;
    }
    if let Some(b) = common.backend {
        cfg.reconstruction.i0_backend = b;
    }
    Ok(cfg)
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| CliError::io(format!("{}: {e}", path.display())))
}

pub fn write_json(path: &Path, v: &impl Serialize) -> Result<(), CliError> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, v).map_err(|e| CliError::io(e.to_string()))?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

fn checksums(paths: &[PathBuf]) -> Result<BTreeMap<String, String>, CliError> {
    paths
        .iter()
        .map(|p| {
            let name = p.file_name().unwrap().to_string_lossy().into_owned();
            Ok((name, io::file_sha256(p)?))
        })
        .collect()
}

fn simulate(cfg: &Config, dom: &Arc<Domain<f64>>) -> Result<BoundaryField, CliError> {
    let att = cfg.attenuation.clone();
    let a = FnIntegrand(move |x: [f64; 2], _: f64| Complex::new(att.eval(x), 0.0));
    if cfg.phantom.gauge {
        let (f, dp) = gauge_pair(&cfg.attenuation_field(dom));
        return Ok(forward_attenuated(dom, &a, &FirstDegree { f: &f, alpha: &dp })?);
    }
    let ph = cfg.phantom.clone();
    let f = FnIntegrand(move |x: [f64; 2], _: f64| Complex::new(ph.eval(x), 0.0));
    Ok(forward_attenuated(dom, &a, &f)?)
}

pub fn forward(common: &Common) -> Result<(), CliError> {
    let cfg = load_config(common)?;
    let dom = cfg.domain()?;
    let hash = cfg.hash();
    let t = Instant::now();
    let data = simulate(&cfg, &dom)?;
    let elapsed = t.elapsed().as_secs_f64();

    let out = &common.out_dir;
    let (bin, csv, prof) = (out.join("sinogram.bin"), out.join("sinogram.csv"), out.join("profile_psi0.csv"));
    let mut w = create(&bin)?;
    io::write_boundary(&mut w, "sinogram", &data, Some(&hash))?;
    w.flush()?;
    let mut w = create(&csv)?;
    io::write_sinogram_csv(&mut w, &data, Some(&hash))?;
    w.flush()?;

    // central rays: direction along the inward normal
    let mut w = create(&prof)?;
    writeln!(w, "# config_hash: {hash}\nphi,re,im")?;
    let ratio = dom.n_theta() / dom.boundary.n_phi;
    for j in 0..dom.boundary.n_phi {
        let v = data.at(j, (j * ratio + dom.n_theta() / 2) % dom.n_theta());
        writeln!(w, "{},{},{}", dom.boundary.phi(j), v.re, v.im)?;
    }
    w.flush()?;

    write_json(
        &out.join("forward_metadata.json"),
        &json!({
            "command": "forward",
            "config": cfg,
            "config_hash": hash,
            "checksums": checksums(&[bin, csv, prof])?,
            "max_abs": data.max_abs(),
            "elapsed_s": elapsed,
        }),
    )
}

fn load_sinogram(path: &Path, dom: &Arc<Domain<f64>>) -> Result<(BoundaryField, Option<String>), CliError> {
    if !path.exists() {
        return Err(CliError::io(format!("sinogram {} not found", path.display())));
    }
    if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv")) {
        let f = File::open(path)?;
        return Ok(io::read_sinogram_csv(f, dom)?);
    }
    let s = io::read_field_file(path)?;
    let b = s.to_boundary(dom)?;
    Ok((b, s.header.config_hash))
}

#[derive(Serialize)]
struct ErrorSummary {
    rel_l2_error: f64,
    max_abs_error: f64,
    truth_l2: f64,
}

pub fn reconstruct(common: &Common, sinogram: &Path, force: bool) -> Result<(), CliError> {
    let cfg = load_config(common)?;
    let dom = cfg.domain()?;
    let hash = cfg.hash();
    let (data, found) = load_sinogram(sinogram, &dom)?;
    let found = found.unwrap_or_else(|| "none".into());
    if found != hash {
        if !force {
            return Err(agrt::Error::HashMismatch { expected: hash, found }.into());
        }
        eprintln!("warning: config hash mismatch ignored (--force)");
    }
    let a = cfg.attenuation_field(&dom);
    let t = Instant::now();
    let rec = reconstruct_attenuated(&a, &data, &cfg.reconstruction)?;
    let elapsed = t.elapsed().as_secs_f64();

    let out = &common.out_dir;
    let (bin, prof) = (out.join("reconstruction.bin"), out.join("profile.csv"));
    let mut w = create(&bin)?;
    io::write_scalar(&mut w, "f", &rec.f, Some(&hash))?;
    w.flush()?;

    let truth = (!cfg.phantom.is_empty() && !cfg.phantom.gauge).then(|| cfg.phantom_field(&dom));
    let summary = truth.as_ref().map(|t| {
        let err = rec.f.zip_map(t, |x, y| x - y);
        ErrorSummary {
            rel_l2_error: err.l2_norm() / t.l2_norm(),
            max_abs_error: err.max_abs(),
            truth_l2: t.l2_norm(),
        }
    });
    let mut w = create(&prof)?;
    writeln!(w, "# config_hash: {hash}\nx,reconstruction,truth")?;
    let r = dom.radius() * 0.95;
    for i in 0..=100 {
        let x = [-r + 2.0 * r * i as f64 / 100.0, 0.0];
        writeln!(w, "{},{},{}", x[0], rec.f.sample_cubic(x).re, cfg.phantom.eval(x))?;
    }
    w.flush()?;
    write_report(out, &cfg, &hash, &rec.diagnostics, summary, elapsed, &[bin, prof])
}

fn write_report(
    out: &Path,
    cfg: &Config,
    hash: &str,
    diag: &Diagnostics,
    summary: Option<ErrorSummary>,
    elapsed: f64,
    files: &[PathBuf],
) -> Result<(), CliError> {
    write_json(
        &out.join("reconstruction_report.json"),
        &json!({
            "command": "reconstruct",
            "config_hash": hash,
            "backend": diag.backend,
            "reconstruction": cfg.reconstruction,
            "per_step_residuals": diag.per_step_residuals,
            "holomorphicity_reports": diag.holomorphicity_reports,
            "iterations": diag.iterations,
            "timings": diag.timings,
            "neumann_increments": diag.neumann_increments,
            "grazing_clamped": diag.grazing_clamped,
            "fast_path": diag.fast_path,
            "error_summary": summary,
            "elapsed_s": elapsed,
            "checksums": checksums(files)?,
        }),
    )
}

pub fn factors(common: &Common) -> Result<(), CliError> {
    let cfg = load_config(common)?;
    let dom = cfg.domain()?;
    let hash = cfg.hash();
    let a = cfg.attenuation_field(&dom);
    let scheme = cfg.reconstruction.derivative;
    let mut report = BTreeMap::new();
    let mut files = Vec::new();
    for (sign, name) in [(1, "w"), (-1, "w_tilde")] {
        let fac = integrating_factor(&a, sign, cfg.reconstruction.neumann())?;
        let res = geodesic_derivative_field(&fac.w, scheme).add(&BundleField::broadcast(&a));
        report.insert(
            name,
            json!({
                "sign": sign,
                "Hw_plus_a_interior": res.max_abs_within(0.9),
                "holomorphicity": holomorphicity_report(&fac.w, sign),
                "neumann_increments": fac.increments,
                "max_abs": fac.w.max_abs(),
            }),
        );
        let path = common.out_dir.join(format!("{name}.bin"));
        let mut w = create(&path)?;
        io::write_bundle(&mut w, name, &fac.w, Some(&hash))?;
        w.flush()?;
        files.push(path);
    }
    write_json(
        &common.out_dir.join("factors_report.json"),
        &json!({ "command": "factors", "config_hash": hash, "factors": report, "checksums": checksums(&files)? }),
    )
}

/// Random smooth pair `(f, alpha)` built from three Gaussian lobes.
pub fn random_pair(dom: &Arc<Domain<f64>>, rng: &mut ChaCha8Rng) -> (ScalarField, OneFormField) {
    let lobes: Vec<([f64; 2], f64, [f64; 3])> = (0..3)
        .map(|_| {
            (
                [rng.gen_range(-0.4..0.4), rng.gen_range(-0.4..0.4)],
                rng.gen_range(0.1..0.25),
                [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)],
            )
        })
        .collect();
    let bump = |x: [f64; 2], c: [f64; 2], s: f64| (-((x[0] - c[0]).powi(2) + (x[1] - c[1]).powi(2)) / (2.0 * s * s)).exp();
    let f = ScalarField::from_real_fn(dom, |x| lobes.iter().map(|(c, s, w)| w[0] * bump(x, *c, *s)).sum());
    let alpha = OneFormField::from_fn(dom, |x| {
        let v = lobes.iter().fold([0.0, 0.0], |acc, (c, s, w)| {
            let b = bump(x, *c, *s);
            [acc[0] + w[1] * b, acc[1] + w[2] * b]
        });
        [Complex::new(v[0], 0.0), Complex::new(v[1], 0.0)]
    });
    (f, alpha)
}

/// Random smooth inflow data.
pub fn random_boundary(dom: &Arc<Domain<f64>>, rng: &mut ChaCha8Rng) -> BoundaryField {
    let c: Vec<f64> = (0..6).map(|_| rng.gen_range(-1.0..1.0)).collect();
    BoundaryField::from_fn(dom, move |b: BoundaryPoint<f64>| {
        let (p, s) = (b.phi, b.psi());
        Complex::new(c[0] + c[1] * p.cos() + c[2] * (2.0 * p).sin() + c[3] * s + c[4] * (p + s).cos() + c[5] * s * s, 0.0)
    })
    .restrict_inflow()
}

/// `|<I^a F, g>_mu - <F, I^a* g>| / (|F|_{L2(SM)} |g|_mu)` for each trial.
pub fn adjoint_defects(dom: &Arc<Domain<f64>>, a: &ScalarField, trials: usize, seed: u64) -> agrt::Result<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rho = attenuation_weight(dom, a)?;
    (0..trials)
        .map(|_| {
            let (f, alpha) = random_pair(dom, &mut rng);
            let g = random_boundary(dom, &mut rng);
            let lhs = forward_attenuated(dom, a, &FirstDegree { f: &f, alpha: &alpha })?.pairing_mu(&g);
            let rhs = adjoint(&rho, &g)?.pairing(&f, &alpha);
            let norm = BundleField::from_fn(dom, |x: [f64; 2], th: f64| f.sample_cubic(x) + alpha.contract(x, th)).l2_norm();
            Ok((lhs - rhs).norm() / (norm * g.l2_mu()))
        })
        .collect()
}

pub const ADJOINT_THRESHOLD: f64 = 1e-3;

pub fn adjoint_check(common: &Common, trials: usize) -> Result<(), CliError> {
    let cfg = load_config(common)?;
    let dom = cfg.domain()?;
    let a = cfg.attenuation_field(&dom);
    let defects = adjoint_defects(&dom, &a, trials, cfg.seed)?;
    let worst = defects.iter().cloned().fold(0.0, f64::max);
    let passed = worst <= ADJOINT_THRESHOLD;
    write_json(
        &common.out_dir.join("adjoint_report.json"),
        &json!({
            "command": "adjoint-check",
            "config_hash": cfg.hash(),
            "seed": cfg.seed,
            "defects": defects,
            "max_defect": worst,
            "threshold": ADJOINT_THRESHOLD,
            "passed": passed,
        }),
    )?;
    println!("adjoint defect max {worst:.3e} over {trials} trials (threshold {ADJOINT_THRESHOLD:e})");
    if passed {
        Ok(())
    } else {
        Err(CliError::failed(format!("adjoint defect {worst:.3e} exceeds {ADJOINT_THRESHOLD:e}")))
    }
}
