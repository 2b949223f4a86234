use num_complex::Complex64;
use proptest::prelude::*;
use railyard_core::asymptotics::*;
use railyard_core::Scalar;

fn example(k: usize) -> AsymptoticParams {
    AsymptoticParams::period_four(k)
}

fn product_form(p: &AsymptoticParams, chi: f64, w: Complex64) -> Complex64 {
    let mut acc = g_chi(p, chi, w).unwrap();
    for k in 1..=p.k {
        acc *= f_uvk(p, k, w).unwrap();
    }
    acc
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn factored_form_matches_the_product(re in -20.0f64..20.0, im in 0.01f64..20.0, chi in 0.01f64..0.99) {
        let p = example(6);
        let rf = build_rational(&p, chi).unwrap();
        let w = Complex64::new(re, im);
        let (a, b) = (rf.eval(w), product_form(&p, chi, w));
        prop_assert!((a - b).norm() <= 1e-12 * b.norm(), "{a} vs {b}");
    }

    #[test]
    fn density_stays_in_range(chi in 0.01f64..0.99, kappa in -1.5f64..1.5) {
        let d = density(&example(4), chi, kappa).unwrap();
        prop_assert!((0.0..=2.0).contains(&d));
        let frozen = solve_w_plus(&example(4), chi, kappa).unwrap().is_none();
        prop_assert_eq!(frozen, d == 0.0 || d == 2.0);
    }
}

#[test]
fn f_uvk_tends_to_one_geometrically() {
    // Larger fugacities keep |F_k − 1| above roundoff for k = 6..10.
    let mut p = example(10);
    p.u = 0.5;
    p.v = 0.5;
    let w = Complex64::new(1.0, 0.7);
    let dev: Vec<f64> = (6..=10).map(|k| (f_uvk(&p, k, w).unwrap() - 1.0).norm()).collect();
    let uv2 = (p.u * p.v).powi(2);
    for pair in dev.windows(2) {
        let ratio = pair[1] / pair[0];
        assert!((ratio / uv2 - 1.0).abs() < 0.05, "ratio {ratio} vs {uv2}");
    }
}

#[test]
fn liquid_root_solves_the_equation() {
    let p = example(10);
    let rf = build_rational(&p, 0.5).unwrap();
    for kappa in [-0.6, -0.2, 0.0, 0.15, 0.5] {
        let w = solve_w_plus(&p, 0.5, kappa).unwrap().expect("liquid point");
        assert!(w.im > 0.0);
        let target = (-4.0 * kappa).exp();
        for x in [w, w.conj()] {
            let res = (rf.eval(x) - target).norm();
            assert!(res < 1e-10 * target.max(1.0), "residual {res} at kappa {kappa}");
        }
    }
}

#[test]
fn purely_imaginary_root_gives_density_one() {
    // The example is symmetric under κ → −κ, w → −w, so w₊ is imaginary at κ = 0.
    let p = example(6);
    let w = solve_w_plus(&p, 0.5, 0.0).unwrap().unwrap();
    assert!(w.re.abs() < 1e-12 * w.norm());
    assert!((density(&p, 0.5, 0.0).unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn liquid_root_converges_in_truncation_depth() {
    // Successive depths move w₊ by about (uv)^{2K} relative.
    let mut p = example(1);
    p.u = 0.6;
    p.v = 0.6;
    let ws: Vec<Complex64> = (1..=6)
        .map(|k| {
            p.k = k;
            solve_w_plus(&p, 0.4, 0.1).unwrap().expect("liquid")
        })
        .collect();
    let diffs: Vec<f64> = ws.windows(2).map(|w| (w[1] - w[0]).norm()).collect();
    let uv2 = (p.u * p.v).powi(2);
    for d in diffs.windows(2) {
        let ratio = d[1] / d[0];
        assert!(ratio < 2.0 * uv2, "ratio {ratio} vs (uv)^2 = {uv2}");
    }
}

#[test]
fn density_integrates_to_the_height_jump() {
    let p = example(6);
    let slice = Slice::new(&p, 0.5).unwrap();
    let (lo, hi) = slice.liquid_intervals()[0];
    // Trapezoid rule on a fine grid against the adaptive integral.
    let n = 20000;
    let h = (hi - lo) / n as f64;
    let mut sum = 0.0;
    for i in 0..=n {
        let k = lo + h * i as f64;
        let wt = if i == 0 || i == n { 0.5 } else { 1.0 };
        sum += wt * slice.density(k).unwrap();
    }
    let jump = slice.height(hi).unwrap() - slice.height(lo).unwrap();
    assert!((sum * h - jump).abs() < 1e-5, "{} vs {jump}", sum * h);
}

#[test]
fn laplace_check_pure_boundary() {
    // u = v = 0 leaves only G_χ; the depth no longer matters.
    for k in [0, 3] {
        let mut p = example(k);
        p.u = 0.0;
        p.v = 0.0;
        for chi in [0.3, 0.6] {
            let contour = laplace_contour(&p, chi, 8000).unwrap();
            let (integral, direct) = laplace_check(&p, chi, 1.0, &contour).unwrap();
            assert!((integral - direct).abs() < 1e-9 * direct.abs(), "{integral} vs {direct}");
        }
    }
}

#[test]
fn laplace_direct_is_continuous_in_alpha() {
    let p = example(6);
    let slice = Slice::new(&p, 0.5).unwrap();
    let alphas: Vec<f64> = (0..=150).map(|i| 0.5 + 0.01 * i as f64).collect();
    let vals: Vec<f64> = alphas.iter().map(|&a| slice.laplace_direct(a).unwrap()).collect();
    for w in vals.windows(2) {
        assert!((w[1] - w[0]).abs() < 0.05 * w[0].abs());
    }
}

#[test]
fn non_integer_power_on_a_lone_pole_is_rejected() {
    let p = example(3);
    let contour = laplace_contour(&p, 0.5, 2000).unwrap();
    assert!(laplace_check(&p, 0.5, 0.5, &contour).is_err());
}

#[test]
fn coarse_contour_is_rejected() {
    let p = example(3);
    let contour = laplace_contour(&p, 0.5, 4).unwrap();
    assert!(laplace_check(&p, 0.5, 1.0, &contour).is_err());
}

#[test]
fn boundary_points_are_double_roots() {
    let p = example(6);
    let grid: Vec<f64> = (0..40).flat_map(|i| {
        let x = 10f64.powf(-2.0 + 4.0 * i as f64 / 39.0);
        [x, -x]
    }).collect();
    let curve = frozen_boundary(&p, &grid).unwrap();
    assert!(!curve.points.is_empty());
    for pt in &curve.points {
        assert!(pt.residual < BOUNDARY_RESIDUAL);
        assert!(pt.chi > 0.0 && pt.chi < 1.0);
        let check = double_root_check(&p, pt).unwrap();
        assert!(check.offset < 1e-6, "{pt:?}: {check:?}");
    }
}

#[test]
fn invalid_parameters_are_rejected() {
    let mut p = example(2);
    p.breaks = vec![1.0, 0.0];
    assert!(p.validate().is_err());
    let mut p = example(2);
    p.u = 1.0;
    assert!(p.validate().is_err());
    let p = example(2);
    assert!(build_rational(&p, 1.0).is_err());
    assert!(g_chi(&p, 0.5, Complex64::new(0.5f64.exp(), 0.0)).is_err());
}

#[test]
fn discretized_weights_follow_the_period() {
    let g = example(3).discretize(70).unwrap();
    assert_eq!((g.l(), g.r()), (1, 70));
    assert_eq!(g.a(6), railyard_core::Side::L);
    assert_eq!(g.b(6), railyard_core::Sign::Plus);
    let x6 = (-4.0f64 / 70.0).exp() * 0.3;
    assert!((g.x(6).to_f64() - x6).abs() < 1e-15);
    let x8 = (4.0f64 / 70.0).exp();
    assert!((g.x(8).to_f64() - x8).abs() < 1e-15);
    assert!(example(3).discretize(0).is_err());
}
