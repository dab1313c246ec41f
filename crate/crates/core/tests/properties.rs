use proptest::prelude::*;

use surfhap_core::electro::{electrostatic_force, ElectroParams, KnobSpec};
use surfhap_core::flowlut::{best_difference, SensitivityCurve};
use surfhap_core::gesture::{gate, min_enclosing_circle, ContactFrame, GateConfig, Mask, Motion};
use surfhap_core::vibmap::Provenance;
use surfhap_core::{Actuator, FreqAxis, FrfCurve, GridSpec, Point, VibrationMap};

fn curves(bins: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
    prop::collection::vec(prop::collection::vec(0u8..6, bins).prop_map(|v| v.into_iter().map(f64::from).collect()), 5)
}

fn disc(w: usize, h: usize, cx: f64, cy: f64, r: f64) -> Mask {
    Mask::from_fn(w, h, |x, y| (x as f64 - cx).powi(2) + (y as f64 - cy).powi(2) <= r * r)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn argmax_is_first_maximum(active in curves(12), passive in curves(12)) {
        let a: [&[f64]; 5] = std::array::from_fn(|k| active[k].as_slice());
        let p: [&[f64]; 5] = std::array::from_fn(|k| passive[k].as_slice());
        let (d, bin, act) = best_difference(a, p);
        let mut all = Vec::new();
        for b in 0..12 {
            for x in Actuator::ALL {
                all.push((a[x.index()][b] - p[x.index()][b], b, x));
            }
        }
        let best = all.iter().map(|t| t.0).fold(f64::NEG_INFINITY, f64::max);
        prop_assert_eq!(d, best);
        let first = all.iter().find(|t| t.0 == best).unwrap();
        prop_assert_eq!((bin, act), (first.1, first.2));
    }

    #[test]
    fn nodes_interpolate_exactly(vals in prop::collection::vec(0.0f64..3.0, 4 * 3 * 5 * 3), i in 1usize..=12) {
        let grid = GridSpec { rows: 3, cols: 4, spacing: 10.0, origin: Point::new(5.0, 7.0) };
        let axis = FreqAxis::new(100.0, 10.0, 3);
        let cs = vals.chunks(3).map(|c| FrfCurve::new(axis, c.to_vec())).collect();
        let map = VibrationMap::new(grid.clone(), axis, cs, Provenance::Synthetic).unwrap();
        for act in Actuator::ALL {
            let got = map.interpolate_frf(grid.point(i), act).unwrap();
            prop_assert_eq!(got.magnitudes(), map.curve(i, act).unwrap().magnitudes());
        }
    }

    #[test]
    fn sensation_level_inverts(level in -20.0f64..60.0, hz in 10.0f64..700.0) {
        let s = SensitivityCurve::default();
        let back = s.sensation_level(s.displacement_at_level(level, hz), hz);
        prop_assert!((back - level).abs() < 1e-9);
    }

    #[test]
    fn force_is_even_and_quadratic(v in -300.0f64..300.0) {
        let p = ElectroParams::default();
        let f = electrostatic_force(&p, v);
        prop_assert!(f >= 0.0);
        prop_assert_eq!(f, electrostatic_force(&p, -v));
        let g = electrostatic_force(&p, 3.0 * v);
        prop_assert!((g - 9.0 * f).abs() <= 1e-12 * g.abs().max(1e-300));
    }

    #[test]
    fn enclosing_circle_contains_every_point(pts in prop::collection::vec((-50.0f64..50.0, -50.0f64..50.0), 1..40)) {
        let pts: Vec<Point> = pts.into_iter().map(|(x, y)| Point::new(x, y)).collect();
        let c = min_enclosing_circle(&pts).unwrap();
        for p in &pts {
            prop_assert!(c.center.distance(*p) <= c.radius * (1.0 + 1e-9) + 1e-9);
        }
        // Jung bound
        let diam = pts.iter().flat_map(|a| pts.iter().map(move |b| a.distance(*b))).fold(0.0, f64::max);
        prop_assert!(c.radius <= diam / 3f64.sqrt() + 1e-9);
    }

    #[test]
    fn still_frames_are_static(cx in 30.0f64..90.0, cy in 30.0f64..70.0, r in 5.0f64..20.0) {
        let m = disc(120, 100, cx, cy, r);
        let frames: Vec<ContactFrame> = (0..4).map(|k| ContactFrame::from_mask(&m, 5, k as f64)).collect();
        prop_assert_eq!(gate(&frames, &GateConfig::default()), Motion::Static);
    }

    #[test]
    fn moved_frames_are_dynamic(cx in 30.0f64..60.0, cy in 30.0f64..60.0, step in 6.0f64..20.0) {
        let frames: Vec<ContactFrame> = (0..4)
            .map(|k| ContactFrame::from_mask(&disc(120, 100, cx + step * k as f64, cy, 8.0), 5, k as f64))
            .collect();
        prop_assert_eq!(gate(&frames, &GateConfig::default()), Motion::Dynamic);
    }

    #[test]
    fn run_length_masks_round_trip(bits in prop::collection::vec(any::<bool>(), 37 * 23)) {
        let m = Mask::from_fn(37, 23, |x, y| bits[y * 37 + x]);
        let mut buf = Vec::new();
        m.write_runs(&mut buf).unwrap();
        prop_assert_eq!(Mask::read_runs(buf.as_slice()).unwrap(), m);
    }

    #[test]
    fn sector_centres_belong_to_their_sector(n in 1usize..64, s in -100i64..100) {
        let k = KnobSpec::new(n);
        prop_assert_eq!(k.sector_of(k.sector_center(s)), s);
    }
}
