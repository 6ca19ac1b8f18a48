use std::sync::Arc;

use proptest::prelude::*;
use teichretract::chart::{make_chart, validate_point, Chart, FnPoint, Gluing, Slot, SurfaceType};
use teichretract::error::Error;

fn chart(g: u32, n: u32) -> Arc<Chart> {
    Arc::new(Chart::standard(SurfaceType::new(g, n).unwrap()).unwrap())
}

#[test]
fn chart_examples() {
    let c = Slot::Curve;
    let p = Slot::Puncture;
    let torus = make_chart(
        SurfaceType::new(1, 1).unwrap(),
        &Gluing {
            pieces: vec![vec![c(0), c(0), p]],
        },
    )
    .unwrap();
    assert_eq!(torus.curve_count(), 1);
    let sphere = make_chart(
        SurfaceType::new(0, 4).unwrap(),
        &Gluing {
            pieces: vec![vec![p, p, c(0)], vec![c(0), p, p]],
        },
    )
    .unwrap();
    assert_eq!(sphere.curve_count(), 1);
    let genus_two = make_chart(
        SurfaceType::new(2, 0).unwrap(),
        &Gluing {
            pieces: vec![vec![c(0), c(1), c(2)], vec![c(2), c(1), c(0)]],
        },
    )
    .unwrap();
    assert_eq!(genus_two.curve_count(), 3);
    assert!(make_chart(
        SurfaceType::new(1, 1).unwrap(),
        &Gluing {
            pieces: vec![vec![c(0), p, p]]
        }
    )
    .is_err());
}

#[test]
fn dimension_is_twice_the_curve_count() {
    for (g, n) in [(0, 3), (1, 1), (0, 4), (1, 2), (2, 0), (0, 5), (2, 1)] {
        let s = SurfaceType::new(g, n).unwrap();
        assert_eq!(s.dimension() as i64, 6 * g as i64 - 6 + 2 * n as i64);
        assert_eq!(s.curve_count(), s.dimension() / 2);
    }
}

#[test]
fn point_examples() {
    assert!(FnPoint::new(chart(1, 1), vec![0.03], vec![0.7]).is_ok());
    assert!(matches!(
        FnPoint::new(chart(1, 1), vec![0.0], vec![0.0]),
        Err(Error::NonpositiveLength { .. })
    ));
    let x = FnPoint::new(chart(1, 2), vec![2.0, 3.0], vec![-5.0, 10.0]).unwrap();
    assert_eq!(x.twists, vec![-5.0, 10.0]);
    let bad = FnPoint {
        chart: chart(1, 2),
        lengths: vec![1.0, f64::NAN],
        twists: vec![0.0, 0.0],
    };
    assert!(matches!(validate_point(bad), Err(Error::NonFinite { .. })));
    let short = FnPoint {
        chart: chart(1, 2),
        lengths: vec![1.0],
        twists: vec![0.0],
    };
    assert!(matches!(
        validate_point(short),
        Err(Error::ChartMismatch(_))
    ));
}

#[test]
fn json_rejects_unknown_fields_and_bad_points() {
    let x = FnPoint::new(chart(1, 1), vec![0.5], vec![0.1]).unwrap();
    let mut v = serde_json::to_value(&x).unwrap();
    v["extra"] = serde_json::json!(1);
    assert!(serde_json::from_str::<FnPoint>(&v.to_string()).is_err());
    let bad =
        r#"{"surface":{"genus":1,"punctures":1},"pieces":[["puncture","puncture",{"curve":0}]]}"#;
    assert!(serde_json::from_str::<Chart>(bad).is_err());
}

fn arb_point() -> impl Strategy<Value = FnPoint> {
    let types = [(1u32, 1u32), (0, 4), (1, 2), (2, 0)];
    (
        0..types.len(),
        prop::collection::vec((1e-6f64..50.0, -1e3f64..1e3), 3),
    )
        .prop_map(move |(k, v)| {
            let c = chart(types[k].0, types[k].1);
            let d = c.curve_count();
            FnPoint::new(
                c,
                v[..d].iter().map(|p| p.0).collect(),
                v[..d].iter().map(|p| p.1).collect(),
            )
            .unwrap()
        })
}

proptest! {
    #[test]
    fn json_roundtrip_is_bit_exact(x in arb_point()) {
        let text = serde_json::to_string(&x).unwrap();
        let y: FnPoint = serde_json::from_str(&text).unwrap();
        prop_assert_eq!(&y.chart, &x.chart);
        for (a, b) in x.coords().iter().zip(y.coords()) {
            prop_assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn coords_roundtrip(x in arb_point()) {
        let y = x.with_coords(&x.coords()).unwrap();
        prop_assert_eq!(&y, &x);
        prop_assert_eq!(x.distance(&y).unwrap(), 0.0);
        prop_assert_eq!(x.coords().len(), x.chart.surface().dimension());
    }
}
