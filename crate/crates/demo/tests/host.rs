use conceptor_debias_demo::{boolean_ops, outlier_fences, planted_debias};

fn ellipse_cloud(n: usize, sx: f64, sy: f64, angle: f64) -> Vec<f64> {
    let (s, c) = angle.sin_cos();
    (0..n)
        .flat_map(|i| {
            let t = i as f64 / n as f64 * std::f64::consts::TAU;
            let (x, y) = (sx * t.cos(), sy * t.sin());
            [c * x - s * y, s * x + c * y]
        })
        .collect()
}

#[test]
fn boolean_ops_returns_five_valid_matrices() {
    let a = ellipse_cloud(40, 2.0, 0.3, 0.2);
    let b = ellipse_cloud(40, 1.5, 0.4, 1.3);
    let m = boolean_ops(&a, &b, 1.0).unwrap();
    assert_eq!(m.len(), 20);
    for k in 0..5 {
        let q = &m[4 * k..4 * k + 4];
        assert!((q[1] - q[2]).abs() < 1e-12, "matrix {k} not symmetric");
        let tr = q[0] + q[3];
        let det = q[0] * q[3] - q[1] * q[2];
        let disc = (tr * tr / 4.0 - det).max(0.0).sqrt();
        let (hi, lo) = (tr / 2.0 + disc, tr / 2.0 - disc);
        assert!(lo >= -1e-9 && hi <= 1.0 + 1e-9, "matrix {k} spectrum {lo} {hi}");
    }
    // ¬A = I − A
    assert!((m[16] - (1.0 - m[0])).abs() < 1e-12 && (m[17] + m[1]).abs() < 1e-12);
    // A∧B lies below both traces, A∨B above both.
    let tr = |k: usize| m[4 * k] + m[4 * k + 3];
    assert!(tr(2) <= tr(0).min(tr(1)) + 1e-12);
    assert!(tr(3) >= tr(0).max(tr(1)) - 1e-12);
}

#[test]
fn boolean_ops_rejects_odd_input() {
    assert!(boolean_ops(&[1.0, 2.0, 3.0], &[1.0, 0.0], 1.0).is_err());
}

#[test]
fn fences_widen_with_percentile() {
    let mut pts = ellipse_cloud(60, 1.0, 0.5, 0.0);
    pts.extend_from_slice(&[9.0, 0.0, 0.0, 7.0]);
    let kept = |p: f64| {
        let out = outlier_fences(&pts, p).unwrap();
        assert_eq!(out.len(), 4 + 3 * 62);
        out[4..].chunks(3).filter(|c| c[2] == 1.0).count()
    };
    let counts: Vec<usize> = (1..=10).map(|k| kept(k as f64 / 10.0)).collect();
    assert!(counts.windows(2).all(|w| w[0] <= w[1]), "{counts:?}");
    assert_eq!(counts[9], 62);
    assert!(counts[4] < 62, "the two far points should be dropped at p=0.5");
}

#[test]
fn planted_debias_reports_drop() {
    let r = planted_debias(1.0, 3.0, 42).unwrap();
    assert!(r[0].abs() >= 1.5 && r[1] < 0.01, "{r:?}");
    assert!(r[2].abs() <= 0.1 && r[3] > 0.1, "{r:?}");
}
