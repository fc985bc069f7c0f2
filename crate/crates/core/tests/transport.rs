use std::sync::Arc;

use agrt::bundle::*;
use agrt::domain::{Domain, DomainOptions};
use agrt::geometry::{scattering, BoundaryPoint, MetricModel};
use agrt::linalg::LinearMap;
use agrt::phantom::{gauge_pair, GaussianMixture};
use agrt::transport::*;
use agrt::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn c(re: f64) -> Complex<f64> {
    Complex::new(re, 0.0)
}

fn dom_with(m: MetricModel<f64>, nx: usize, nt: usize) -> Arc<Domain<f64>> {
    Domain::new(m, DomainOptions::new(nx, nt)).unwrap()
}

fn euclid(nx: usize, nt: usize) -> Arc<Domain<f64>> {
    dom_with(MetricModel::euclidean(1.0).unwrap(), nx, nt)
}

fn bump(x: [f64; 2], c0: [f64; 2], s: f64) -> f64 {
    (-((x[0] - c0[0]).powi(2) + (x[1] - c0[1]).powi(2)) / (2.0 * s * s)).exp()
}

/// Euclidean distance from `x` to the unit circle along direction `theta`.
fn chord(x: [f64; 2], theta: f64) -> f64 {
    let e = [theta.cos(), theta.sin()];
    let xe = x[0] * e[0] + x[1] * e[1];
    -xe + (1.0 - x[0] * x[0] - x[1] * x[1] + xe * xe).sqrt()
}

#[test]
fn transport_of_one_is_exit_time() {
    let dom = euclid(24, 16);
    let u = transport(&dom, &FnIntegrand(|_: [f64; 2], _: f64| c(1.0))).unwrap();
    for &i in &dom.grid.active {
        let x = dom.grid.position(i as usize);
        for k in 0..16 {
            let want = chord(x, dom.angles.theta(k));
            assert!((u.at(i as usize, k).re - want).abs() < 1e-9);
        }
    }
    assert!(transport(&dom, &Zero).unwrap().max_abs() == 0.0);
}

#[test]
fn transport_of_radial_gaussian_matches_line_quadrature() {
    let dom = euclid(64, 32);
    let s = 0.2;
    let f = ScalarField::from_real_fn(&dom, |x| bump(x, [0.0, 0.0], s));
    let n = 20000;
    let h = 1.0 / n as f64;
    // composite Simpson on [0, 1]
    let line: f64 = (0..=n)
        .map(|j| {
            let w = if j == 0 || j == n { 1.0 } else if j % 2 == 1 { 4.0 } else { 2.0 };
            w * bump([j as f64 * h, 0.0], [0.0, 0.0], s)
        })
        .sum::<f64>()
        * h
        / 3.0;
    for th in [0.0, 0.7, 2.9] {
        let got = transport_at(&dom, &f, &agrt::geometry::BundlePoint::new([0.0, 0.0], th)).unwrap();
        assert!((got.re - line).abs() < 1e-5, "{} vs {line}", got.re);
    }
}

#[test]
fn attenuated_transform_of_one_on_chords() {
    let dom = euclid(32, 64);
    let cst = 0.7;
    let data = forward_attenuated(&dom, &FnIntegrand(|_: [f64; 2], _: f64| c(cst)), &FnIntegrand(|_: [f64; 2], _: f64| c(1.0)))
        .unwrap();
    let nt = dom.n_theta();
    for j in (0..dom.boundary.n_phi).step_by(5) {
        for k in 0..nt {
            let b = dom.boundary_point(j, k);
            if !b.is_inflow() {
                assert_eq!(data.at(j, k), c(0.0));
                continue;
            }
            let l = 2.0 * b.mu();
            let want = ((cst * l).exp() - 1.0) / cst;
            assert!((data.at(j, k).re - want).abs() < 1e-7 * want, "{} vs {want}", data.at(j, k).re);
        }
    }
}

#[test]
fn zero_attenuation_reduces_to_plain_transform() {
    let dom = dom_with(MetricModel::constant_curvature(-1.0, 1.0).unwrap(), 32, 32);
    let f = GaussianMixture::reference().field(&dom);
    let a = forward_attenuated(&dom, &Zero, &f).unwrap();
    let b = transport_boundary(&dom, &f).unwrap();
    assert!(a.sub(&b).max_abs() < 1e-14);
    let one = BundleField::from_fn(&dom, |_: [f64; 2], _: f64| c(1.0));
    let w = forward_weighted(&dom, &one, &f).unwrap();
    assert!(w.sub(&b).max_abs() < 1e-12 * b.max_abs());
    assert!(forward_weighted(&dom, &one, &Zero).unwrap().max_abs() == 0.0);
}

#[test]
fn transport_solves_the_transport_equation_at_second_order() {
    let mut res = Vec::new();
    for nx in [24, 48] {
        let dom = dom_with(MetricModel::constant_curvature(-1.0, 1.0).unwrap(), nx, 2 * nx);
        let mut f = GaussianMixture::single([0.1, -0.2], 0.2);
        f.cutoff = 10.0;
        let g = f.clone();
        let fi = FnIntegrand(move |x: [f64; 2], _: f64| c(g.eval(x)));
        let u = transport(&dom, &fi).unwrap();
        let hu = geodesic_derivative_field(&u, DerivativeScheme::Central);
        let ff = BundleField::broadcast(&ScalarField::from_real_fn(&dom, |x| f.eval(x)));
        res.push(hu.add(&ff).max_abs_within(0.7));
    }
    let order = (res[0] / res[1]).log2();
    assert!(res[1] < 1e-2 && order > 1.8, "{res:?}");
}

#[test]
fn odd_part_of_transport_solves_the_equation() {
    let mut res = Vec::new();
    for nx in [24, 48] {
        let dom = euclid(nx, 32);
        let f = ScalarField::from_real_fn(&dom, |x| bump(x, [0.2, 0.1], 0.15));
        let u = transport(&dom, &f).unwrap().odd_part();
        let hu = geodesic_derivative_field(&u, DerivativeScheme::Richardson);
        res.push(hu.add(&BundleField::broadcast(&f)).max_abs_within(0.9));
    }
    assert!(res[1] < 0.5 * res[0] && res[1] < 5e-3, "{res:?}");
}

#[test]
fn w_psi_constant_and_restriction() {
    let dom = euclid(32, 32);
    let one = BoundaryField::from_fn(&dom, |_| c(1.0));
    let w1 = w_psi(&one.restrict_inflow()).unwrap();
    assert!(w1.sub(&BundleField::from_fn(&dom, |_: [f64; 2], _: f64| c(1.0))).max_abs() < 1e-12);

    let w = BoundaryField::from_fn(&dom, |b: BoundaryPoint<f64>| c((2.0 * b.phi).cos() * b.mu().max(0.0)));
    let wp = w_psi(&w.restrict_inflow()).unwrap();
    let back = restrict_to_boundary(&wp);
    let nt = dom.n_theta();
    let mut worst = 0.0f64;
    for j in 0..dom.boundary.n_phi {
        for k in 0..nt {
            let b = dom.boundary_point(j, k);
            if b.mu() > 0.3 {
                worst = worst.max((back.at(j, k) - w.at(j, k)).norm());
            }
        }
    }
    // the restriction reads the bundle grid through extrapolated halo nodes
    assert!(worst < 3e-2, "{worst}");
}

#[test]
fn w_psi_is_constant_along_geodesics() {
    let mut res = Vec::new();
    for (nx, nt) in [(32, 64), (64, 128)] {
        let dom = euclid(nx, nt);
        let w = BoundaryField::from_fn(&dom, |b: BoundaryPoint<f64>| c((b.phi.sin() + (2.0 * b.psi()).cos()).exp()));
        let wp = w_psi(&w.restrict_inflow()).unwrap();
        res.push(geodesic_derivative_field(&wp, DerivativeScheme::Central).max_abs_within(0.5));
    }
    assert!(res[1] < 0.6 * res[0], "{res:?}");
}

#[test]
fn even_continuation_is_alpha_symmetric() {
    let dom = euclid(16, 64);
    let k = BoundaryField::from_fn(&dom, |_| c(2.5));
    assert!(even_continuation(&k.restrict_inflow()).unwrap().sub(&k).max_abs() < 1e-12);

    // chord length depends on the geodesic only
    let w = BoundaryField::from_fn(&dom, |b: BoundaryPoint<f64>| c(2.0 * b.mu().abs()));
    let aw = even_continuation(&w.restrict_inflow()).unwrap();
    let assert_close = |a: Complex<f64>, b: Complex<f64>| assert!((a - b).norm() < 5e-3, "{a} vs {b}");
    let m = &dom.metric;
    for j in (0..dom.boundary.n_phi).step_by(3) {
        for kk in 0..dom.n_theta() {
            let b = dom.boundary_point(j, kk);
            if b.mu().abs() < 0.1 {
                continue;
            }
            assert_close(aw.at(j, kk), w.at(j, kk));
            let s = scattering(m, &b, &dom.trace).unwrap();
            assert_close(aw.sample_point(&s), aw.at(j, kk));
        }
    }
}

#[test]
fn gauge_pair_is_invisible() {
    let mut ratios = Vec::new();
    for nx in [32, 64] {
        let dom = dom_with(MetricModel::constant_curvature(-1.0, 1.0).unwrap(), nx, 2 * nx);
        let a = ScalarField::from_real_fn(&dom, |x| 0.3 + 0.4 * bump(x, [0.2, -0.1], 0.3));
        let (f, dp) = gauge_pair(&a);
        let p = ScalarField::from_real_fn(&dom, |x| agrt::phantom::gauge_potential(x, 1.0));
        let g = forward_attenuated(&dom, &a, &FirstDegree { f: &f, alpha: &dp }).unwrap();
        let scale = forward_attenuated(&dom, &a, &p).unwrap().max_abs();
        // weighted version with rho = exp(-odd part of u^a)
        let rho = exp_field(&transport(&dom, &a).unwrap().odd_part().scale(c(-1.0)));
        let gw = forward_weighted(&dom, &rho, &FirstDegree { f: &f, alpha: &dp }).unwrap();
        let sw = forward_weighted(&dom, &rho, &p).unwrap().max_abs();
        ratios.push((g.max_abs() / scale, gw.max_abs() / sw));
    }
    assert!(ratios[1].0 < 1e-3 && ratios[1].0 < ratios[0].0, "{ratios:?}");
    assert!(ratios[1].1 < 1e-2 && ratios[1].1 < ratios[0].1, "{ratios:?}");
}

fn random_pair(dom: &Arc<Domain<f64>>, rng: &mut ChaCha8Rng) -> (ScalarField<f64>, OneFormField<f64>) {
    let mut centers = Vec::new();
    for _ in 0..3 {
        centers.push((
            [rng.gen_range(-0.4..0.4), rng.gen_range(-0.4..0.4)],
            rng.gen_range(0.1..0.25),
            [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)],
        ));
    }
    let f = ScalarField::from_real_fn(dom, |x| centers.iter().map(|(c0, s, a)| a[0] * bump(x, *c0, *s)).sum());
    let alpha = OneFormField::from_fn(dom, |x| {
        let v = centers.iter().fold([0.0, 0.0], |acc, (c0, s, a)| {
            let b = bump(x, *c0, *s);
            [acc[0] + a[1] * b, acc[1] + a[2] * b]
        });
        [c(v[0]), c(v[1])]
    });
    (f, alpha)
}

fn random_boundary(dom: &Arc<Domain<f64>>, rng: &mut ChaCha8Rng) -> BoundaryField<f64> {
    let co: Vec<f64> = (0..6).map(|_| rng.gen_range(-1.0..1.0)).collect();
    BoundaryField::from_fn(dom, move |b: BoundaryPoint<f64>| {
        let (p, s) = (b.phi, b.psi());
        c(co[0] + co[1] * p.cos() + co[2] * (2.0 * p).sin() + co[3] * s + co[4] * (p + s).cos() + co[5] * s * s)
    })
    .restrict_inflow()
}

fn first_degree_norm(f: &ScalarField<f64>, alpha: &OneFormField<f64>) -> f64 {
    let dom = f.dom.clone();
    BundleField::from_fn(&dom, |x: [f64; 2], th: f64| f.sample_cubic(x) + alpha.contract(x, th)).l2_norm()
}

#[test]
fn adjoint_identity_with_attenuation_weight() {
    let dom = dom_with(MetricModel::constant_curvature(-0.5, 1.0).unwrap(), 48, 96);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let a = ScalarField::from_real_fn(&dom, |x| 0.4 + 0.3 * bump(x, [0.1, 0.2], 0.3));
    let rho = attenuation_weight(&dom, &a).unwrap();
    for _ in 0..3 {
        let (f, alpha) = random_pair(&dom, &mut rng);
        let g = random_boundary(&dom, &mut rng);
        let lhs = forward_attenuated(&dom, &a, &FirstDegree { f: &f, alpha: &alpha }).unwrap().pairing_mu(&g);
        let rhs = adjoint(&rho, &g).unwrap().pairing(&f, &alpha);
        let defect = (lhs - rhs).norm() / (first_degree_norm(&f, &alpha) * g.l2_mu());
        assert!(defect < 1e-3, "defect {defect}: {lhs} vs {rhs}");
    }
}

#[test]
fn constant_backprojection() {
    let dom = euclid(24, 32);
    let one = BundleField::from_fn(&dom, |_: [f64; 2], _: f64| c(1.0));
    let g = BoundaryField::from_fn(&dom, |_| c(1.0)).restrict_inflow();
    let bp = adjoint(&one, &g).unwrap();
    for &i in &dom.grid.active {
        let i = i as usize;
        assert!((bp.scalar.values[i] - c(std::f64::consts::TAU)).norm() < 1e-10);
        assert!(bp.vector.comps[0][i].norm() < 1e-10 && bp.vector.comps[1][i].norm() < 1e-10);
    }
    let z = adjoint(&one, &BoundaryField::zeros(&dom)).unwrap();
    assert!(z.scalar.max_abs() == 0.0 && z.vector.max_abs() == 0.0);
}

#[test]
fn normal_operator_symmetric_and_positive() {
    let dom = euclid(40, 80);
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let a = ScalarField::from_real_fn(&dom, |x| 0.5 * bump(x, [0.0, 0.1], 0.4));
    let (f, al) = random_pair(&dom, &mut rng);
    let (g, be) = random_pair(&dom, &mut rng);
    let nf = normal_operator(&a, &f, &al).unwrap();
    let ng = normal_operator(&a, &g, &be).unwrap();
    let (x, y) = (nf.pairing(&g, &be), ng.pairing(&f, &al));
    assert!((x - y).norm() < 1e-3 * x.norm().max(y.norm()), "{x} vs {y}");
    let n0 = normal_operator(&Zero, &f, &al).unwrap().pairing(&f, &al);
    assert!(n0.re > 0.0 && n0.im.abs() < 1e-12 * n0.re);
    let z = normal_operator(&a, &ScalarField::zeros(&dom), &OneFormField::zeros(&dom)).unwrap();
    assert!(z.scalar.max_abs() == 0.0);
}

#[test]
fn solenoidal_split_of_gradient_and_curl() {
    let dom = dom_with(MetricModel::constant_curvature(-1.0, 1.0).unwrap(), 48, 8);
    let p0 = ScalarField::from_real_fn(&dom, |x| (1.0 - x[0] * x[0] - x[1] * x[1]) * (1.0 + x[0] - 0.5 * x[1]));
    let dp = central_gradient(&p0);
    let s = solenoidal_decompose(&dp, 1e-12, 2000).unwrap();
    let scale = dp.max_abs();
    assert!(s.solenoidal.max_abs() < 2e-2 * scale, "{}", s.solenoidal.max_abs() / scale);
    assert!(s.potential.zip_map(&p0, |a, b| a - b).max_abs() < 1e-2);

    let q = ScalarField::from_real_fn(&dom, |x| (0.36 - (x[0] - 0.1).powi(2) - x[1] * x[1]).max(0.0).powi(4));
    let sd = star_d(&q);
    let s = solenoidal_decompose(&sd, 1e-12, 2000).unwrap();
    assert!(s.potential.max_abs() < 1e-10, "{}", s.potential.max_abs());
    for cmp in 0..2 {
        for (a, b) in s.solenoidal.comps[cmp].iter().zip(&sd.comps[cmp]) {
            assert!((a - b).norm() < 1e-9);
        }
    }
    assert!(divergence(&sd).max_abs() < 1e-12);

    let z = solenoidal_decompose(&OneFormField::zeros(&dom), 1e-12, 10).unwrap();
    assert!(z.potential.max_abs() == 0.0 && z.solenoidal.max_abs() == 0.0);
}

#[test]
fn pair_operator_transpose() {
    let dom = dom_with(MetricModel::constant_curvature(-1.0, 1.0).unwrap(), 24, 32);
    let op = PairOperator::new(&dom, 1.0, 2).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut rnd = |n: usize| -> Vec<Complex<f64>> {
        (0..n).map(|_| Complex::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect()
    };
    let x = rnd(op.cols());
    let y = rnd(op.rows());
    let mut ax = vec![Complex::new(0.0, 0.0); op.rows()];
    let mut aty = vec![Complex::new(0.0, 0.0); op.cols()];
    op.apply(&x, &mut ax);
    op.apply_adjoint(&y, &mut aty);
    let l: Complex<f64> = ax.iter().zip(&y).map(|(a, b)| a * b.conj()).sum();
    let r: Complex<f64> = x.iter().zip(&aty).map(|(a, b)| a * b.conj()).sum();
    assert!((l - r).norm() < 1e-10 * l.norm());

    let pre = PairPreconditioner::new(&op);
    let mut px = vec![Complex::new(0.0, 0.0); op.cols()];
    let mut pty = vec![Complex::new(0.0, 0.0); op.cols()];
    let z = rnd(op.cols());
    pre.apply(&x, &mut px);
    pre.apply_adjoint(&z, &mut pty);
    let l: Complex<f64> = px.iter().zip(&z).map(|(a, b)| a * b.conj()).sum();
    let r: Complex<f64> = x.iter().zip(&pty).map(|(a, b)| a * b.conj()).sum();
    assert!((l - r).norm() < 1e-10 * l.norm());
}

#[test]
fn pair_operator_matches_direct_transform() {
    let dom = euclid(32, 64);
    let op = PairOperator::new(&dom, 1.0, 2).unwrap();
    let f = ScalarField::from_real_fn(&dom, |x| bump(x, [0.1, 0.1], 0.2));
    let q = ScalarField::from_real_fn(&dom, |x| bump(x, [-0.2, 0.0], 0.25));
    let xv = op.restrict(&f, &q);
    let mut y = vec![Complex::new(0.0, 0.0); op.rows()];
    op.apply(&xv, &mut y);
    let direct = transport_boundary(&dom, &op.integrand_from(&xv)).unwrap();
    let via_op = op.data_field(&y);
    assert!(via_op.sub(&direct).max_abs() < 1e-3 * direct.max_abs());
}
