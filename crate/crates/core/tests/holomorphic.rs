use std::sync::Arc;

use agrt::bundle::*;
use agrt::domain::{Domain, DomainOptions};
use agrt::geometry::{BoundaryPoint, BumpComponent, MetricModel};
use agrt::holomorphic::*;
use agrt::transport::{exp_field, forward_attenuated, star_d, FirstDegree, Zero};
use agrt::Complex;
use nalgebra::{DMatrix, DVector};

fn c(re: f64) -> Complex<f64> {
    Complex::new(re, 0.0)
}

fn dom_with(m: MetricModel<f64>, nx: usize, nt: usize) -> Arc<Domain<f64>> {
    Domain::new(m, DomainOptions::new(nx, nt)).unwrap()
}

fn bump(x: [f64; 2], c0: [f64; 2], s: f64) -> f64 {
    (-((x[0] - c0[0]).powi(2) + (x[1] - c0[1]).powi(2)) / (2.0 * s * s)).exp()
}

fn perturbed(eps: f64) -> MetricModel<f64> {
    let lobe = BumpComponent {
        center: [0.15, -0.1],
        sigma: 0.3,
        amplitude: 1.0,
    };
    MetricModel::perturbed(0.0, eps, vec![lobe], 1.0).unwrap()
}

fn gaussian_a(dom: &Arc<Domain<f64>>) -> ScalarField<f64> {
    ScalarField::from_real_fn(dom, |x| 0.8 * bump(x, [-0.1, 0.15], 0.25))
}

#[test]
fn w_vanishes_on_the_euclidean_disc() {
    let mut r = Vec::new();
    for nx in [32, 64] {
        let dom = dom_with(MetricModel::euclidean(1.0).unwrap(), nx, 2 * nx);
        let f = ScalarField::from_real_fn(&dom, |x| bump(x, [0.2, 0.1], 0.15));
        r.push(w_operator(&f).unwrap().max_abs() / f.max_abs());
    }
    assert!(r[1] < 1e-3 && r[1] < 0.5 * r[0], "{r:?}");
    let dom = dom_with(MetricModel::euclidean(1.0).unwrap(), 16, 16);
    assert!(w_operator(&ScalarField::zeros(&dom)).unwrap().max_abs() == 0.0);
}

#[test]
fn w_grows_with_the_perturbation() {
    // measured against the unperturbed operator on the same grid, which removes the
    // discretisation floor common to all three
    let w: Vec<ScalarField<f64>> = [0.0, 0.01, 0.05]
        .iter()
        .map(|&e| {
            let dom = dom_with(perturbed(e), 32, 64);
            w_operator(&gaussian_a(&dom)).unwrap()
        })
        .collect();
    let d: Vec<f64> = w.iter().map(|x| x.zip_map(&w[0], |p, q| p - q).max_abs()).collect();
    assert!(d[0] == 0.0 && d[1] > 0.0 && d[2] > d[1], "{d:?}");
    let ratio = d[2] / d[1];
    assert!(ratio > 4.0 && ratio < 6.0, "{d:?}");
}

#[test]
fn gamma_is_odd_and_integrates_constants() {
    let dom = dom_with(MetricModel::euclidean(1.0).unwrap(), 48, 64);
    assert!(gamma(&ScalarField::zeros(&dom), 1).unwrap().max_abs() == 0.0);
    let a = ScalarField::from_real_fn(&dom, |_| 0.6);
    for sign in [1, -1] {
        let g = gamma(&a, sign).unwrap();
        assert!(g.add(&g.shift_half()).max_abs() < 1e-14);
        let hg = geodesic_derivative_field(&g, DerivativeScheme::Richardson);
        let res = hg.add(&BundleField::broadcast(&a)).max_abs_within(0.9);
        assert!(res < 1e-3, "sign {sign}: {res}");
        assert!(holomorphicity_report(&g, sign).ratio < 1e-20);
    }
    assert!(gamma(&a, 0).is_err());
}

#[test]
fn integrating_factor_on_the_euclidean_disc() {
    let dom = dom_with(MetricModel::euclidean(1.0).unwrap(), 48, 96);
    let a = gaussian_a(&dom);
    let fac = integrating_factor(&a, 1, NeumannOptions::default()).unwrap();
    assert!(fac.increments.is_empty());
    assert!(fac.w.sub(&gamma(&a, 1).unwrap()).max_abs() == 0.0);
    assert!(fac.w.add(&fac.w.shift_half()).max_abs() < 1e-15 * fac.w.max_abs());
    let res = geodesic_derivative_field(&fac.w, DerivativeScheme::Richardson)
        .add(&BundleField::broadcast(&a))
        .max_abs_within(0.9);
    assert!(res < 1e-3, "{res}");
    let z = integrating_factor(&ScalarField::zeros(&dom), -1, NeumannOptions::default()).unwrap();
    assert!(z.w.max_abs() == 0.0);
}

#[test]
fn neumann_series_matches_dense_solve() {
    let dom = dom_with(perturbed(0.02), 12, 16);
    let mut a = gaussian_a(&dom);
    // the matrix below acts on active values with an extrapolated halo
    a.fill_halo();
    let opts = NeumannOptions { tol: 1e-12, max_terms: 50 };
    let fac = integrating_factor(&a, 1, opts).unwrap();
    let inc = &fac.increments;
    assert!(inc.len() >= 2 && inc.windows(2).all(|w| w[1] < w[0]), "{inc:?}");

    let act = &dom.grid.active;
    let n = act.len();
    let mut m = DMatrix::<Complex<f64>>::identity(n, n);
    for (col, &i) in act.iter().enumerate() {
        let mut e = ScalarField::zeros(&dom);
        e.values[i as usize] = c(1.0);
        e.fill_halo();
        let we = w_operator(&e).unwrap();
        for (row, &r) in act.iter().enumerate() {
            m[(row, col)] += Complex::new(0.0, 1.0) * we.values[r as usize];
        }
    }
    let rhs = DVector::from_iterator(n, act.iter().map(|&i| a.values[i as usize]));
    let b = m.lu().solve(&rhs).unwrap();
    let scale = a.max_abs();
    for (row, &i) in act.iter().enumerate() {
        assert!((b[row] - fac.b.values[i as usize]).norm() < 1e-9 * scale);
    }
    // the correction is not negligible, so the comparison is meaningful
    assert!(fac.b.zip_map(&a, |x, y| x - y).max_abs() > 1e-4 * scale);
}

#[test]
fn neumann_series_reports_divergence() {
    let dom = dom_with(MetricModel::euclidean(1.0).unwrap(), 12, 16);
    let a = gaussian_a(&dom);
    let err = neumann_series(&a, c(1.0), NeumannOptions::default(), |f| Ok(f.map(|v| v * 1.5)));
    assert!(matches!(err, Err(agrt::Error::NeumannDiverged { term: 1, .. })));
}

#[test]
fn holomorphicity_report_on_modes() {
    let dom = dom_with(MetricModel::euclidean(1.0).unwrap(), 10, 16);
    let up = BundleField::from_fn(&dom, |_: [f64; 2], th: f64| Complex::new(0.0, th).exp());
    let dn = up.conj();
    assert!(holomorphicity_report(&up, 1).ratio < 1e-28);
    assert!((holomorphicity_report(&dn, 1).ratio - 1.0).abs() < 1e-12);
    assert!((holomorphicity_report(&up, -1).ratio - 1.0).abs() < 1e-12);
    let mean = up.add(&BundleField::from_fn(&dom, |_: [f64; 2], _: f64| c(5.0)));
    assert!(holomorphicity_report(&mean, 1).ratio < 1e-28);
}

#[test]
fn exponential_of_holomorphic_factor_is_holomorphic() {
    let mut r = Vec::new();
    for nt in [32, 64] {
        let dom = dom_with(MetricModel::constant_curvature(-0.5, 1.0).unwrap(), 32, nt);
        let fac = integrating_factor(&gaussian_a(&dom), 1, NeumannOptions::default()).unwrap();
        r.push(holomorphicity_report(&exp_field(&fac.w), 1).ratio);
    }
    assert!(r[1] < 1e-8 && r[1] < r[0], "{r:?}");
}

#[test]
fn conjugation_identity() {
    let mut r = Vec::new();
    for nx in [24, 48] {
        let dom = dom_with(MetricModel::euclidean(1.0).unwrap(), nx, 2 * nx);
        let a = gaussian_a(&dom);
        let w = integrating_factor(&a, 1, NeumannOptions::default()).unwrap().w;
        let v = BundleField::from_fn(&dom, |x: [f64; 2], th: f64| c(bump(x, [0.1, 0.0], 0.3) * (1.0 + 0.5 * th.sin())));
        let hd = |u: &BundleField<f64>| geodesic_derivative_field(u, DerivativeScheme::Richardson);
        let lhs = exp_field(&w).mul(&hd(&exp_field(&w.scale(c(-1.0))).mul(&v)));
        let rhs = hd(&v).add(&BundleField::broadcast(&a).mul(&v));
        r.push(lhs.sub(&rhs).max_abs_within(0.9));
    }
    assert!(r[1] < 1e-3 && r[1] < 0.5 * r[0], "{r:?}");
}

#[test]
fn s_operator_adjoint_identity() {
    let dom = dom_with(MetricModel::constant_curvature(-1.0, 1.0).unwrap(), 48, 96);
    let h = BoundaryField::from_fn(&dom, |b: BoundaryPoint<f64>| c((b.phi.cos() + 0.5 * b.psi()).exp() * b.mu().max(0.0)))
        .restrict_inflow();
    let f = ScalarField::from_real_fn(&dom, |x| bump(x, [0.2, -0.1], 0.2));
    let lhs = s_operator(&h).unwrap().pairing(&f);
    let sd = star_d(&f);
    let zero = ScalarField::zeros(&dom);
    let i0 = forward_attenuated(&dom, &Zero, &FirstDegree { f: &zero, alpha: &sd }).unwrap();
    let rhs = h.pairing_mu(&i0) * (-1.0 / std::f64::consts::TAU);
    assert!((lhs - rhs).norm() < 1e-2 * lhs.norm(), "{lhs} vs {rhs}");
}
