//! Built-in verification suite. Each check reports its measured number against a threshold.

use std::sync::Arc;
use std::time::Instant;

use agrt::bundle::*;
use agrt::domain::{Domain, DomainOptions};
use agrt::geometry::{exit_time, scattering, BoundaryPoint, MetricModel, TraceOptions};
use agrt::holomorphic::{holomorphicity_report, integrating_factor, w_operator, NeumannOptions};
use agrt::inversion::{invert_i0_explicit, invert_i0_fredholm, invert_i0_pairs, verify_holomorphic_solution, ReconstructionConfig};
use agrt::phantom::{gauge_pair, gauge_potential, GaussianMixture};
use agrt::transport::{forward_attenuated, FirstDegree, FnIntegrand};
use agrt::{BoundaryField, BundleField, Complex, ScalarField};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::commands::{adjoint_defects, write_json, ADJOINT_THRESHOLD};
use crate::{CliError, Common, Level};

#[derive(Clone, Copy, Serialize)]
#[serde(rename_all = "snake_case")]
enum Bound {
    AtMost,
    AtLeast,
}

#[derive(Serialize)]
struct Check {
    name: &'static str,
    measured: f64,
    threshold: f64,
    bound: Bound,
    passed: bool,
    seconds: f64,
    detail: Value,
}

type Outcome = agrt::Result<(f64, Value)>;

struct Suite {
    level: Level,
    mutate_hilbert: bool,
    checks: Vec<Check>,
}

fn c(re: f64) -> Complex<f64> {
    Complex::new(re, 0.0)
}

fn dom(kappa: f64, nx: usize, nt: usize) -> agrt::Result<Arc<Domain<f64>>> {
    Domain::new(MetricModel::constant_curvature(kappa, 1.0)?, DomainOptions::new(nx, nt))
}

fn bump(x: [f64; 2], c0: [f64; 2], s: f64) -> f64 {
    (-((x[0] - c0[0]).powi(2) + (x[1] - c0[1]).powi(2)) / (2.0 * s * s)).exp()
}

fn rel(a: &ScalarField, b: &ScalarField) -> f64 {
    a.zip_map(b, |x, y| x - y).l2_norm() / b.l2_norm()
}

fn orders(r: &[f64]) -> Vec<f64> {
    r.windows(2).map(|w| (w[0] / w[1]).log2()).collect()
}

impl Suite {
    fn quick(&self) -> bool {
        matches!(self.level, Level::Quick)
    }

    /// Base grid of the level.
    fn grid(&self) -> (usize, usize) {
        if self.quick() {
            (64, 128)
        } else {
            (128, 256)
        }
    }

    fn hilbert(&self, u: &BundleField) -> BundleField {
        if self.mutate_hilbert {
            // wrong sign on the first positive mode
            apply_multiplier(u, |k| match k {
                0 => c(0.0),
                1 => Complex::new(0.0, 1.0),
                k if k > 0 => Complex::new(0.0, -1.0),
                _ => Complex::new(0.0, 1.0),
            })
        } else {
            hilbert(u)
        }
    }

    fn run(&mut self, name: &'static str, threshold: f64, bound: Bound, f: impl FnOnce(&Self) -> Outcome) {
        let t = Instant::now();
        let (measured, detail, passed) = match f(self) {
            Ok((m, d)) => {
                let ok = match bound {
                    Bound::AtMost => m <= threshold,
                    Bound::AtLeast => m >= threshold,
                };
                (m, d, ok)
            }
            Err(e) => (f64::NAN, json!({ "error": e.to_string() }), false),
        };
        let seconds = t.elapsed().as_secs_f64();
        println!(
            "{} {name}: {measured:.3e} ({} {threshold:e}) in {seconds:.1}s",
            if passed { "PASS" } else { "FAIL" },
            match bound {
                Bound::AtMost => "<=",
                Bound::AtLeast => ">=",
            }
        );
        self.checks.push(Check {
            name,
            measured,
            threshold,
            bound,
            passed,
            seconds,
            detail,
        });
    }
}

fn hilbert_spectral(s: &Suite) -> Outcome {
    let nt = if s.quick() { 32 } else { 64 };
    let d = dom(0.0, 8, nt)?;
    let mut worst = 0.0f64;
    for k in -(nt as i32) / 2 + 1..(nt as i32) / 2 {
        let u = BundleField::from_fn(&d, move |x: [f64; 2], th: f64| Complex::new(0.0, k as f64 * th).exp() * (1.0 + x[0]));
        let want = u.scale(Complex::new(0.0, -(k.signum() as f64)));
        worst = worst.max(s.hilbert(&u).sub(&want).max_abs());
    }
    let u = BundleField::from_fn(&d, |x: [f64; 2], th: f64| c((x[1] + th.sin()).exp()));
    let fft = from_fourier_coefficients(&u, &fourier_coefficients(&u)).sub(&u).max_abs();
    Ok((worst.max(fft), json!({ "modes": worst, "fft_round_trip": fft, "n_theta": nt })))
}

fn hilbert_squared(s: &Suite) -> Outcome {
    let d = dom(0.0, 10, 32)?;
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut u = BundleField::zeros(&d);
    let n2 = d.grid.node_count();
    for k in 0..d.n_theta() {
        for &i in &d.grid.stored {
            u.values[k * n2 + i as usize] = Complex::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        }
    }
    let nyq = -(d.n_theta() as isize) / 2;
    u = apply_multiplier(&u, |k| if k == nyq { c(0.0) } else { c(1.0) });
    let want = BundleField::broadcast(&u.average()).sub(&u);
    let r = s.hilbert(&s.hilbert(&u)).sub(&want).max_abs();
    Ok((r, json!({})))
}

fn commutator_trend(s: &Suite) -> Outcome {
    let levels: &[usize] = if s.quick() { &[24, 48] } else { &[24, 48, 96, 192] };
    let mut res = Vec::new();
    for &nx in levels {
        let d = dom(-1.0, nx, 32)?;
        let u = BundleField::from_fn(&d, |x: [f64; 2], th: f64| {
            let b = (-(x[0] * x[0] + x[1] * x[1]) / 0.08).exp();
            Complex::new(b * (1.0 + th.cos() + 0.5 * (2.0 * th).sin()), 0.3 * b * x[0] * th.sin())
        });
        res.push(commutator_residual(&u, DerivativeScheme::Central).max_abs_within(0.9));
    }
    let ord = orders(&res);
    let ratios: Vec<f64> = res.windows(2).map(|w| w[0] / w[1]).collect();
    let worst = ord.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok((worst, json!({ "n_x": levels, "residuals": res, "ratios": ratios, "orders": ord, "scheme": "central" })))
}

fn samples() -> impl Iterator<Item = BoundaryPoint<f64>> {
    (0..8).flat_map(|j| (0..9).map(move |i| BoundaryPoint::from_inflow(0.3 + 0.77 * j as f64, -1.4 + 0.35 * i as f64)))
}

fn chord_oracle(_: &Suite) -> Outcome {
    let d = dom(0.0, 16, 16)?;
    let mut worst = 0.0f64;
    for b in samples() {
        let t = exit_time(&d.metric, &b.to_bundle(1.0), &d.trace)?;
        worst = worst.max((t - 2.0 * b.psi().cos()).abs());
    }
    Ok((worst, json!({ "samples": 72 })))
}

fn scattering_involution(_: &Suite) -> Outcome {
    let d = dom(-1.0, 16, 16)?;
    let opts = TraceOptions::new(1e-2);
    let ang = |a: f64, b: f64| {
        let x = (a - b).rem_euclid(std::f64::consts::TAU);
        x.min(std::f64::consts::TAU - x)
    };
    let mut worst = 0.0f64;
    for b in samples() {
        let o = scattering(&d.metric, &b, &opts)?;
        let back = scattering(&d.metric, &o, &opts)?;
        worst = worst.max(ang(back.phi, b.phi)).max(ang(back.theta, b.theta));
    }
    Ok((worst, json!({ "kappa": -1.0 })))
}

fn adjoint_identity(s: &Suite) -> Outcome {
    let (nx, nt) = s.grid();
    let trials = if s.quick() { 3 } else { 10 };
    // the adjoint defect is checked at a fixed 64 x 128 grid at both levels
    let (nx, nt) = (nx.min(64), nt.min(128));
    let d = dom(-0.5, nx, nt)?;
    let a = ScalarField::from_real_fn(&d, |x| 0.4 + 0.3 * bump(x, [0.1, 0.2], 0.3));
    let def = adjoint_defects(&d, &a, trials, 5)?;
    Ok((def.iter().cloned().fold(0.0, f64::max), json!({ "defects": def, "grid": [nx, nt] })))
}

fn w_vanishes(s: &Suite) -> Outcome {
    let (nx, nt) = s.grid();
    let d = dom(-1.0, nx, nt)?;
    let f = ScalarField::from_real_fn(&d, |x| bump(x, [0.2, 0.1], 0.15));
    let r = w_operator(&f)?.max_abs() / f.max_abs();
    Ok((r, json!({ "grid": [nx, nt] })))
}

fn gaussian_a(d: &Arc<Domain<f64>>) -> ScalarField {
    ScalarField::from_real_fn(d, |x| 0.8 * bump(x, [-0.1, 0.15], 0.25))
}

fn factor_residual(s: &Suite) -> Outcome {
    let (nx, nt) = s.grid();
    let mut detail = serde_json::Map::new();
    let mut worst = 0.0f64;
    for kappa in [0.0, 0.5, -0.5] {
        let d = dom(kappa, nx, nt)?;
        let a = gaussian_a(&d);
        let w = integrating_factor(&a, 1, NeumannOptions::default())?.w;
        let r = geodesic_derivative_field(&w, DerivativeScheme::Richardson)
            .add(&BundleField::broadcast(&a))
            .max_abs_within(0.9);
        detail.insert(format!("kappa={kappa}"), json!(r));
        worst = worst.max(r);
    }
    Ok((worst, Value::Object(detail)))
}

fn factor_holomorphic(s: &Suite) -> Outcome {
    let (nx, nt) = s.grid();
    let mut worst = 0.0f64;
    for kappa in [0.0, 0.5, -0.5] {
        let d = dom(kappa, nx, nt)?;
        for sign in [1, -1] {
            let w = integrating_factor(&gaussian_a(&d), sign, NeumannOptions::default())?.w;
            worst = worst.max(holomorphicity_report(&w, sign).ratio);
        }
    }
    Ok((worst, json!({})))
}

fn gauge_kernel(s: &Suite) -> Outcome {
    let (nx, nt) = s.grid();
    let d = dom(-1.0, nx, nt)?;
    let a = ScalarField::from_real_fn(&d, |x| 0.3 + 0.4 * bump(x, [0.2, -0.1], 0.3));
    let (f, dp) = gauge_pair(&a);
    let p = ScalarField::from_real_fn(&d, |x| gauge_potential(x, 1.0));
    let g = forward_attenuated(&d, &a, &FirstDegree { f: &f, alpha: &dp })?.max_abs();
    let scale = forward_attenuated(&d, &a, &p)?.max_abs();
    Ok((g / scale, json!({ "gauge_max": g, "potential_max": scale })))
}

fn holomorphic_solution(s: &Suite) -> Outcome {
    let (nx, nt) = s.grid();
    let d = dom(-1.0, nx, nt)?;
    let a = ScalarField::from_real_fn(&d, |x| 0.6 * bump(x, [0.1, -0.1], 0.3));
    let zeta = ScalarField::from_real_fn(&d, |x| bump(x, [0.0, 0.1], 0.2));
    let r = verify_holomorphic_solution(&a, &zeta, NeumannOptions::default())?;
    Ok((r.holomorphicity.ratio, serde_json::to_value(r).unwrap_or(Value::Null)))
}

fn reference_data(d: &Arc<Domain<f64>>) -> agrt::Result<(ScalarField, BoundaryField)> {
    let ph = GaussianMixture::reference();
    let f = ph.field(d);
    let zero = FnIntegrand(|_: [f64; 2], _: f64| c(0.0));
    let data = forward_attenuated(d, &zero, &FnIntegrand(move |x: [f64; 2], _: f64| c(ph.eval(x))))?;
    Ok((f, data))
}

fn backend_least_squares(s: &Suite) -> Outcome {
    let (nx, nt) = s.grid();
    let d = dom(-1.0, nx, nt)?;
    let (f, data) = reference_data(&d)?;
    let e = invert_i0_explicit(&data)?;
    let p = invert_i0_pairs(&data, &ReconstructionConfig::default())?;
    Ok((rel(&p.f.re(), &e.re()), json!({ "explicit_error": rel(&e.re(), &f), "least_squares_error": rel(&p.f.re(), &f) })))
}

fn backend_fredholm(s: &Suite) -> Outcome {
    let (nx, nt) = s.grid();
    let d = dom(-1.0, nx, nt)?;
    let (_, data) = reference_data(&d)?;
    let e = invert_i0_explicit(&data)?;
    let fr = invert_i0_fredholm(&data, NeumannOptions::default())?;
    Ok((rel(&fr.f, &e), json!({ "neumann_terms": fr.increments.len() })))
}

pub fn run(common: &Common, level: Level, mutate_hilbert: bool) -> Result<(), CliError> {
    let mut s = Suite {
        level,
        mutate_hilbert,
        checks: Vec::new(),
    };
    let t = Instant::now();
    s.run("hilbert_spectral_exactness", 1e-12, Bound::AtMost, hilbert_spectral);
    s.run("hilbert_squared_identity", 1e-12, Bound::AtMost, hilbert_squared);
    s.run("commutator_refinement_order", 1.8, Bound::AtLeast, commutator_trend);
    s.run("euclidean_chord_oracle", 1e-9, Bound::AtMost, chord_oracle);
    s.run("scattering_involution", 1e-8, Bound::AtMost, scattering_involution);
    s.run("adjoint_identity", ADJOINT_THRESHOLD, Bound::AtMost, adjoint_identity);
    s.run("w_vanishes_constant_curvature", 1e-3, Bound::AtMost, w_vanishes);
    s.run("integrating_factor_residual", 1e-3, Bound::AtMost, factor_residual);
    s.run("integrating_factor_holomorphic", 1e-8, Bound::AtMost, factor_holomorphic);
    s.run("gauge_kernel", 1e-3, Bound::AtMost, gauge_kernel);
    s.run("transported_holomorphic_solution", 1e-4, Bound::AtMost, holomorphic_solution);
    s.run("backend_least_squares_vs_explicit", 0.02, Bound::AtMost, backend_least_squares);
    s.run("backend_fredholm_vs_explicit", 0.01, Bound::AtMost, backend_fredholm);

    let failed: Vec<&str> = s.checks.iter().filter(|c| !c.passed).map(|c| c.name).collect();
    let (nx, nt) = s.grid();
    write_json(
        &common.out_dir.join("selftest_report.json"),
        &json!({
            "command": "selftest",
            "level": format!("{level:?}").to_lowercase(),
            "grid": [nx, nt],
            "mutate_hilbert": mutate_hilbert,
            "passed": failed.is_empty(),
            "first_failure": failed.first(),
            "checks": s.checks,
            "elapsed_s": t.elapsed().as_secs_f64(),
        }),
    )?;
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::failed(format!("{} check(s) failed: {}", failed.len(), failed.join(", "))))
    }
}
