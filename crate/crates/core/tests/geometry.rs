use agrt::geometry::*;
use std::f64::consts::PI;

fn opts() -> TraceOptions<f64> {
    TraceOptions::new(1e-2)
}

#[test]
fn euclidean_chord_from_boundary() {
    let m = MetricModel::<f64>::euclidean(1.0).unwrap();
    for &psi in &[0.0, 0.3, -0.7, 1.2, 1.5] {
        let b = BoundaryPoint::from_inflow(0.4, psi);
        let tau = exit_time(&m, &b.to_bundle(1.0), &opts()).unwrap();
        assert!((tau - 2.0 * f64::cos(psi)).abs() < 1e-9, "psi {psi}: {tau}");
    }
}

#[test]
fn euclidean_exit_time_interior() {
    let m = MetricModel::<f64>::euclidean(1.3).unwrap();
    let x = [0.31, -0.52];
    for k in 0..16 {
        let th = 2.0 * PI * k as f64 / 16.0 + 0.1;
        let e = [th.cos(), th.sin()];
        let xe = x[0] * e[0] + x[1] * e[1];
        let want = -xe + (1.69 - (x[0] * x[0] + x[1] * x[1]) + xe * xe).sqrt();
        let got = exit_time(&m, &BundlePoint::new(x, th), &opts()).unwrap();
        assert!((got - want).abs() < 1e-9);
    }
}

#[test]
fn hyperbolic_radial_geodesic() {
    let m = MetricModel::<f64>::constant_curvature(-1.0, 1.0).unwrap();
    let p = flow(&m, &BundlePoint::new([0.0, 0.0], 0.0), 0.5, &opts()).unwrap();
    assert!((p.x[0] - 2.0 * (0.25f64).tanh()).abs() < 1e-9);
    assert!(p.x[1].abs() < 1e-14 && p.theta.abs() < 1e-14);
    let tau = exit_time(&m, &BundlePoint::new([0.0, 0.0], 1.0), &opts()).unwrap();
    assert!((tau - 2.0 * (0.5f64).atanh()).abs() < 1e-9);
}

#[test]
fn spherical_radial_exit() {
    let k = 0.5f64;
    let m = MetricModel::<f64>::constant_curvature(k, 1.0).unwrap();
    let tau = exit_time(&m, &BundlePoint::new([0.0, 0.0], 2.0), &opts()).unwrap();
    let want = 2.0 / k.sqrt() * (k.sqrt() / 2.0).atan();
    assert!((tau - want).abs() < 1e-9);
}

#[test]
fn flow_reports_exit_bracket() {
    let m = MetricModel::<f64>::euclidean(1.0).unwrap();
    match flow(&m, &BundlePoint::new([0.0, 0.0], 0.0), 1.5, &opts()) {
        Err(agrt::Error::ExitedDomain { t_lo, t_hi }) => assert!(t_lo <= 1.0 && t_hi >= 1.0),
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn euclidean_normal_incidence_scattering() {
    let m = MetricModel::<f64>::euclidean(1.0).unwrap();
    let e = scattering_inflow(&m, 0.0, 0.0, &opts()).unwrap();
    assert!((e.phi - PI).abs() < 1e-9);
    assert!((e.theta - PI).abs() < 1e-9);
    let t = exit_time(&m, &BoundaryPoint::from_inflow(0.0, 0.0).to_bundle(1.0), &opts()).unwrap();
    assert!((t - 2.0).abs() < 1e-10);
}

#[test]
fn scattering_is_an_involution() {
    let metrics = [
        MetricModel::<f64>::euclidean(1.0).unwrap(),
        MetricModel::<f64>::constant_curvature(-1.0, 1.0).unwrap(),
        MetricModel::<f64>::constant_curvature(0.5, 1.0).unwrap(),
        MetricModel::<f64>::perturbed(
            -0.5,
            0.1,
            vec![BumpComponent {
                center: [0.2, -0.1],
                sigma: 0.3,
                amplitude: 1.0,
            }],
            1.0,
        )
        .unwrap(),
    ];
    for m in &metrics {
        for &(phi, psi) in &[(0.3, 0.2), (2.0, -1.1), (4.0, 1.4), (5.5, 0.0)] {
            let b = BoundaryPoint::from_inflow(phi, psi);
            let e = scattering(m, &b, &opts()).unwrap();
            assert!(!e.is_inflow());
            let back = scattering(m, &e, &opts()).unwrap();
            let d = (agrt::scalar::wrap_pi(back.phi - b.phi)).abs() + (agrt::scalar::wrap_pi(back.theta - b.theta)).abs();
            assert!(d < 1e-7, "{:?} {b:?} {back:?}", m.kind());
        }
    }
}

#[test]
fn tau_minus_euclidean() {
    let m = MetricModel::<f64>::euclidean(1.0).unwrap();
    let b = BoundaryPoint::from_inflow(1.0, 0.4);
    assert!((tau_minus(&m, &b, &opts()).unwrap() - 0.4f64.cos()).abs() < 1e-9);
    let out = BoundaryPoint { phi: 1.0, theta: 1.3 };
    let want = -(0.3f64).cos();
    assert!((tau_minus(&m, &out, &opts()).unwrap() - want).abs() < 1e-9);
}

#[test]
fn curvature_of_constant_models() {
    for &k in &[-1.0, -0.3, 0.5] {
        let m = MetricModel::<f64>::constant_curvature(k, 1.0).unwrap();
        for &x in &[[0.0, 0.0], [0.3, -0.4], [-0.6, 0.5]] {
            let kk = m.gaussian_curvature_fd(x, 1e-3);
            assert!((kk - k).abs() < 1e-5, "{k} {kk}");
        }
    }
    let m = MetricModel::<f64>::euclidean(1.0).unwrap();
    assert_eq!(m.gaussian_curvature_fd([0.2, 0.1], 1e-3), 0.0);
}

#[test]
fn unit_speed_along_trace() {
    let m = MetricModel::<f64>::constant_curvature(-1.0, 1.0).unwrap();
    let tr = trace(&m, &BundlePoint::new([0.3, 0.1], 2.2), &TraceOptions::new(1e-3)).unwrap();
    for w in tr.points.windows(2).zip(tr.times.windows(2)).take(200) {
        let (p, t) = w;
        let dx = [p[1].x[0] - p[0].x[0], p[1].x[1] - p[0].x[1]];
        let mid = [(p[1].x[0] + p[0].x[0]) / 2.0, (p[1].x[1] + p[0].x[1]) / 2.0];
        let speed = m.conformal_factor(mid).sqrt() * (dx[0] * dx[0] + dx[1] * dx[1]).sqrt() / (t[1] - t[0]);
        assert!((speed - 1.0).abs() < 1e-6);
    }
}

#[test]
fn santalo_volume_of_euclidean_disc() {
    // Integral of the chord length against mu over the inflow boundary equals vol(SM) = 2 pi^2.
    let m = MetricModel::<f64>::euclidean(1.0).unwrap();
    let (n_phi, n_psi) = (8, 400);
    let mut s = 0.0;
    for j in 0..n_phi {
        for k in 0..n_psi {
            let psi = -PI / 2.0 + PI * (k as f64 + 0.5) / n_psi as f64;
            let b = BoundaryPoint::from_inflow(2.0 * PI * j as f64 / n_phi as f64, psi);
            let tau = exit_time(&m, &b.to_bundle(1.0), &opts()).unwrap();
            s += tau * santalo_weight(psi) * (2.0 * PI / n_phi as f64) * (PI / n_psi as f64);
        }
    }
    assert!((s - 2.0 * PI * PI).abs() < 1e-3, "{s}");
}

#[test]
fn invalid_metrics_are_rejected() {
    assert!(MetricModel::<f64>::constant_curvature(1.2, 1.0).is_err());
    assert!(MetricModel::<f64>::constant_curvature(-4.5, 1.0).is_err());
    assert!(MetricModel::<f64>::perturbed(0.0, 1.0, vec![], 1.0).is_err());
}

#[test]
fn single_precision_trace() {
    let m = MetricModel::<f32>::euclidean(1.0).unwrap();
    let tau = exit_time(&m, &BundlePoint::new([0.0f32, 0.0], 0.7), &TraceOptions::new(1e-2f32)).unwrap();
    assert!((tau - 1.0).abs() < 1e-5);
}
