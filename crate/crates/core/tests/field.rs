use std::f64::consts::PI;
use std::sync::Arc;

use proptest::prelude::*;
use teichretract::chart::{Chart, FnPoint, SurfaceType};
use teichretract::gradient::{
    gram_matrix, length_differential, solve_kappa, vector_field, Covector, FieldMode, MetricModel,
};
use teichretract::holonomy::{build_holonomy, curve_length};
use teichretract::mcg::{apply, MappingClass};
use teichretract::systole::{short_set, systole, EnumerationConfig};
use teichretract::word::CurveClass;

const EPS: f64 = 0.05;

fn chart(g: u32, n: u32) -> Arc<Chart> {
    Arc::new(Chart::standard(SurfaceType::new(g, n).unwrap()).unwrap())
}

fn point(g: u32, n: u32, lengths: &[f64], twists: &[f64]) -> FnPoint {
    FnPoint::new(chart(g, n), lengths.to_vec(), twists.to_vec()).unwrap()
}

fn step(x: &FnPoint, v: &[f64], s: f64) -> FnPoint {
    let c: Vec<f64> = x.coords().iter().zip(v).map(|(a, b)| a + s * b).collect();
    x.with_coords(&c).unwrap()
}

/// Plain central difference of a curve length, step `h` in each coordinate.
fn central_difference(x: &FnPoint, c: &CurveClass, h: f64) -> Vec<f64> {
    let len = |y: &FnPoint| curve_length(&build_holonomy(y).unwrap(), c).unwrap();
    (0..2 * x.dim())
        .map(|k| {
            let mut e = vec![0.0; 2 * x.dim()];
            e[k] = 1.0;
            (len(&step(x, &e, h)) - len(&step(x, &e, -h))) / (2.0 * h)
        })
        .collect()
}

#[test]
fn transverse_differential_matches_half_step_oracle() {
    let x = point(1, 1, &[1.0], &[0.0]);
    let c = CurveClass::parse("AB").unwrap();
    let dl = length_differential(&x, &c, 1e-3).unwrap();
    let oracle = central_difference(&x, &c, 5e-4);
    let got = [dl.dl[0], dl.dt[0]];
    for (g, o) in got.iter().zip(&oracle) {
        assert!((g - o).abs() < 1e-6, "{got:?} vs {oracle:?}");
    }
    // Length of AB grows with |τ| away from its minimum, so the twist slope is nonzero here.
    assert!(got[1].abs() > 1e-3);
}

#[test]
fn pants_differential_is_exact() {
    let x = point(1, 2, &[0.7, 1.1], &[0.4, -0.2]);
    let d = length_differential(&x, &CurveClass::Pants(0), 1e-3).unwrap();
    assert_eq!(
        d,
        Covector {
            dl: vec![1.0, 0.0],
            dt: vec![0.0, 0.0]
        }
    );
}

#[test]
fn gram_and_kappa_examples() {
    let cfg = EnumerationConfig::default();
    let x = point(1, 2, &[0.04, 0.06], &[0.0, 0.0]);
    let s = short_set(&x, 0.07, &cfg).unwrap();
    let g = gram_matrix(&x, &s, &MetricModel::MODEL_WP).unwrap();
    assert!((g[0][0] - 0.025465).abs() < 1e-6 && (g[1][1] - 0.038197).abs() < 1e-6);
    assert_eq!((g[0][1], g[1][0]), (0.0, 0.0));
    for (k, l) in [0.04, 0.06].iter().enumerate() {
        let root = g[k][k] / (4.0 * l);
        assert!((root - 1.0 / (2.0 * PI)).abs() < 1e-15);
    }

    let x = point(1, 1, &[0.03], &[0.0]);
    let s = short_set(&x, 0.05, &cfg).unwrap();
    assert_eq!(
        gram_matrix(&x, &s, &MetricModel::EUCLID_FN).unwrap(),
        vec![vec![1.0]]
    );

    let k = solve_kappa(&[vec![2.0 * 0.03 / PI]], &[1.0]).unwrap();
    assert!((k.kappa[0] - 52.3599).abs() < 1e-4);
    let id = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
    assert_eq!(solve_kappa(&id, &[1.0, 1.0]).unwrap().kappa, vec![1.0, 1.0]);
    assert_eq!(solve_kappa(&id, &[0.0, 0.0]).unwrap().kappa, vec![0.0, 0.0]);
    assert!(solve_kappa(&[vec![1.0, 1.0], vec![1.0, 1.0]], &[1.0, 1.0]).is_err());
}

#[test]
fn tie_derivatives_agree() {
    let cfg = EnumerationConfig::default();
    for l in [0.01, 0.03, 0.08] {
        let x = point(1, 2, &[l, l], &[0.2, -0.9]);
        let f = vector_field(&x, EPS, FieldMode::Blended, &MetricModel::MODEL_WP, &cfg).unwrap();
        let (a, b) = (f.v.dl[0], f.v.dl[1]);
        assert_eq!(a, b);
        let want = f.expected_derivatives()[0];
        assert!((a - want).abs() < 1e-9);
        if l <= 2.0 * EPS {
            assert!((a - 1.0).abs() < 1e-9);
        }
    }
}

#[test]
fn field_vanishes_on_the_thick_part() {
    let cfg = EnumerationConfig::default();
    for mode in [FieldMode::Blended, FieldMode::Naive] {
        let x = point(1, 2, &[0.16, 2.0], &[0.3, 0.0]);
        let f = vector_field(&x, EPS, mode, &MetricModel::MODEL_WP, &cfg).unwrap();
        assert!(f.v.is_zero() && f.short_set.is_empty());
    }
}

fn arb_thin_point() -> impl Strategy<Value = FnPoint> {
    let types = [(1u32, 1u32), (0, 4), (1, 2), (2, 0)];
    (
        0..types.len(),
        prop::collection::vec((0.005f64..0.2, -3.0f64..3.0, 0.5f64..3.0), 3),
        0usize..3,
    )
        .prop_map(move |(k, v, thin)| {
            let c = chart(types[k].0, types[k].1);
            let d = c.curve_count();
            // One curve in the ramp region, the rest anywhere.
            let lengths = (0..d)
                .map(|i| if i == thin % d { v[i].0 } else { v[i].2 })
                .collect();
            FnPoint::new(c, lengths, v[..d].iter().map(|p| p.1).collect()).unwrap()
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// One-sided derivative of Λ along V is never negative.
    #[test]
    fn field_points_inward(x in arb_thin_point()) {
        let cfg = EnumerationConfig::default();
        let f = vector_field(&x, EPS, FieldMode::Blended, &MetricModel::MODEL_WP, &cfg).unwrap();
        let s = 1e-7;
        let lam = |y: &FnPoint| systole(y, &cfg).unwrap().value;
        let rate = (lam(&step(&x, &f.v.coords(), s)) - lam(&x)) / s;
        prop_assert!(rate >= -1e-6, "rate {}", rate);
        for (e, want) in f.short_set.entries.iter().zip(f.expected_derivatives()) {
            if let CurveClass::Pants(i) = e.class {
                prop_assert!((f.v.dl[i] - want).abs() < 1e-9);
            }
        }
    }

    /// Dehn twists fix every length, so the length components of V are unchanged.
    #[test]
    fn twists_leave_length_components_fixed(x in arb_thin_point(), curve in 0usize..3, count in -3i64..4) {
        let cfg = EnumerationConfig::default();
        let y = apply(&MappingClass::twist(curve % x.dim(), count), &x).unwrap();
        for mode in [FieldMode::Blended, FieldMode::Naive] {
            let fx = vector_field(&x, EPS, mode, &MetricModel::MODEL_WP, &cfg).unwrap();
            let fy = vector_field(&y, EPS, mode, &MetricModel::MODEL_WP, &cfg).unwrap();
            prop_assert_eq!(&fx.v.dl, &fy.v.dl);
            prop_assert_eq!(fx.short_set.classes(), fy.short_set.classes());
        }
    }
}
