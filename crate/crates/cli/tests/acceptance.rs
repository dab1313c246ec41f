//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::f64::consts::PI;
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use surfhap_core::electro::{
    electrostatic_force, Condition, ElectroParams, KnobConfig, KnobSession, KnobSpec, ScenarioPreset, Trajectory,
};
use surfhap_core::flowlut::{build_lookup, plan_point_flow, FlowOptions, FlowStimulus, SensitivityCurve};
use surfhap_core::gesture::{
    brute_force_circle, classify_dynamic, classify_static, detect_pose, dynamic_features, efd, evaluate_corpus,
    gate, min_enclosing_circle, preprocess, render_raw, static_blocks, static_descriptor, static_mask, static_mask_posed, train,
    CanonicalConfig, ContactFrame, Corpus, FeatureConfig, GateConfig, GateSession, GestureKind, GestureLabel,
    HandTruth, Motion, PreprocessConfig, Sample, SvmConfig, SynthConfig,
};
use surfhap_core::handflow::{plan_hand_flow, Candidates, Direction, HandFlowError, HandRegion, SQUARES, SUBGRID};
use surfhap_core::platesim::{default_patches, modal_frequency, seeded_map, synthesize_frf, PlateModel, PlateSpec};
use surfhap_core::vibmap::{fixture_map, Provenance, FIXTURE_LEFT, FIXTURE_RIGHT};
use surfhap_core::waveform::{dominant_bin, envelope_peaks};
use surfhap_core::{Actuator, FreqAxis, FrfCurve, GridSpec, Point, VibrationMap};

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

const MAP_SEEDS: std::ops::Range<u64> = 1..11;

fn maps() -> &'static [VibrationMap] {
    static MAPS: std::sync::OnceLock<Vec<VibrationMap>> = std::sync::OnceLock::new();
    MAPS.get_or_init(|| MAP_SEEDS.map(seeded_map).collect())
}

fn mag(map: &VibrationMap, point: usize, act: Actuator) -> &[f64] {
    map.curve(point, act).unwrap().magnitudes()
}

/// Bilinear interpolation written directly from the grid layout.
fn bilinear(map: &VibrationMap, p: Point, act: Actuator, bin: usize) -> f64 {
    let g = map.grid();
    let u = ((p.x - g.origin.x) / g.spacing).clamp(0.0, (g.cols - 1) as f64);
    let v = ((p.y - g.origin.y) / g.spacing).clamp(0.0, (g.rows - 1) as f64);
    let c0 = (u.floor() as usize).min(g.cols - 2);
    let r0 = (v.floor() as usize).min(g.rows - 2);
    let (fu, fv) = (u - c0 as f64, v - r0 as f64);
    let at = |r: usize, c: usize| mag(map, g.index_of(r, c), act)[bin];
    at(r0, c0) * (1.0 - fu) * (1.0 - fv)
        + at(r0, c0 + 1) * fu * (1.0 - fv)
        + at(r0 + 1, c0) * (1.0 - fu) * fv
        + at(r0 + 1, c0 + 1) * fu * fv
}

fn criterion_1() -> Outcome {
    let sens = SensitivityCurve::default();
    let mut slowest = 0.0f64;
    let mut pairs = 0usize;
    for (k, map) in maps().iter().enumerate() {
        ensure!(map.point_count() == 84 && map.axis().count == 626, "map {k} is not 7x12 with 626 bins");
        let t = Instant::now();
        let lut = build_lookup(map, &sens);
        slowest = slowest.max(t.elapsed().as_secs_f64());
        for a in 1..=84 {
            for p in (1..=84).filter(|&p| p != a) {
                // Exhaustive scan: keep the largest difference, ties to lower bin then actuator order.
                let mut best: Option<(f64, usize, Actuator)> = None;
                for act in Actuator::ALL {
                    let (ma, mp) = (mag(map, a, act), mag(map, p, act));
                    for bin in 0..626 {
                        let d = ma[bin] - mp[bin];
                        let better = match best {
                            None => true,
                            Some((bd, bb, ba)) => d > bd || (d == bd && (bin, act.index()) < (bb, ba.index())),
                        };
                        if better {
                            best = Some((d, bin, act));
                        }
                    }
                }
                let (d, bin, act) = best.unwrap();
                let r = lut.record(a, p).map_err(|e| e.to_string())?;
                let freq = map.axis().freq(bin);
                ensure!(
                    r.max_diff == d && r.bin == bin && r.freq_hz == freq && r.actuator == act,
                    "map {k} pair {a}->{p}: table {:?} vs scan ({d}, {bin}, {act})",
                    r
                );
                pairs += 1;
            }
        }
    }
    ensure!(slowest <= 60.0, "slowest build took {slowest:.1} s");
    Ok(format!("{} maps, {pairs} ordered pairs equal, slowest build {:.2} s", maps().len(), slowest))
}

fn criterion_2() -> Outcome {
    let map = fixture_map();
    let lut = build_lookup(&map, &SensitivityCurve::default());
    let lr = lut.record(FIXTURE_LEFT, FIXTURE_RIGHT).map_err(|e| e.to_string())?;
    let rl = lut.record(FIXTURE_RIGHT, FIXTURE_LEFT).map_err(|e| e.to_string())?;
    ensure!(
        (lr.max_diff, lr.freq_hz, lr.actuator) == (0.201, 465.0, Actuator::PA),
        "51->52 gave {lr:?}"
    );
    ensure!(
        (rl.max_diff, rl.freq_hz, rl.actuator) == (1.607, 428.0, Actuator::PAll),
        "52->51 gave {rl:?}"
    );
    Ok("(0.201 um/Vp, 465 Hz, PA) and (1.607 um/Vp, 428 Hz, PALL)".into())
}

fn criterion_3() -> Outcome {
    for map in maps().iter().take(3) {
        for i in 1..=map.point_count() {
            let p = map.grid().point(i);
            for act in Actuator::ALL {
                ensure!(
                    map.interpolate_frf(p, act).unwrap().magnitudes() == mag(map, i, act),
                    "node {i} {act} not reproduced exactly"
                );
            }
        }
    }

    let grid = GridSpec::default();
    let axis = FreqAxis::new(20.0, 15.0, 30);
    let field = |p: Point, act: Actuator, b: usize| {
        let (k, bf) = (act.index() as f64, b as f64);
        2.0 + 0.05 * bf + (0.003 + 0.0004 * k) * p.x + (0.002 - 0.00005 * bf) * p.y
    };
    let curves = (1..=grid.len())
        .flat_map(|i| {
            let p = grid.point(i);
            Actuator::ALL.map(|act| FrfCurve::new(axis, (0..axis.count).map(|b| field(p, act, b)).collect()))
        })
        .collect();
    let map = VibrationMap::new(grid.clone(), axis, curves, Provenance::Synthetic).unwrap();
    let far = grid.extent();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let p = Point::new(rng.random_range(grid.origin.x..far.x), rng.random_range(grid.origin.y..far.y));
        for act in Actuator::ALL {
            let c = map.interpolate_frf(p, act).unwrap();
            for (b, &v) in c.magnitudes().iter().enumerate() {
                let exact = field(p, act, b);
                worst = worst.max((v - exact).abs() / exact.abs());
            }
        }
    }
    ensure!(worst < 1e-9, "affine field error {worst:e}");
    Ok(format!("nodes exact, affine max relative error {worst:.1e}"))
}

fn trapezoid(t: f64, duration: f64, ramp: f64) -> f64 {
    if ramp == 0.0 {
        1.0
    } else {
        (t / ramp).min((duration - t) / ramp).clamp(0.0, 1.0)
    }
}

fn check_stimulus(map: &VibrationMap, stim: &FlowStimulus, sens: &SensitivityCurve) -> Result<(f64, f64), String> {
    let r = &stim.rendered;
    let fs = r.sample_rate;
    ensure!(r.routes.len() == 2, "expected two parts, got {}", r.routes.len());
    ensure!(r.routes_disjoint(), "relay routes overlap");
    let mut worst_env = 0.0f64;
    let mut levels = Vec::new();
    for (k, (route, part)) in r.routes.iter().zip(&stim.plan.parts).enumerate() {
        ensure!(route.actuator == part.actuator, "part {k} routed to {}", route.actuator);
        ensure!(route.end - route.start == (1.5 * fs).round() as usize, "part {k} is not 1.5 s");
        ensure!(
            k == 0 || route.start == r.routes[k - 1].end,
            "parts are not back to back"
        );
        let seg = &r.piezo[route.start..route.end];
        let a = part.amplitude_v;
        for (i, v) in envelope_peaks(seg) {
            let dev = (v - a * trapezoid(i as f64 / fs, part.duration_s, part.ramp_s)).abs() / a;
            worst_env = worst_env.max(dev);
        }
        let (bin, width) = dominant_bin(seg, fs);
        let expected = part.freq_hz / width;
        ensure!(
            (bin as f64 - expected).abs() <= 1.0,
            "part {k} dominant bin {bin} vs planned {expected:.2}"
        );
        let active = if k == 0 { stim.plan.from } else { stim.plan.to };
        let bin = map.axis().bin_of(part.freq_hz).unwrap();
        let gain = bilinear(map, active, part.actuator, bin);
        levels.push(sens.sensation_level(a * gain, part.freq_hz));
    }
    ensure!(worst_env < 0.02, "envelope deviates by {:.3}% of peak", 100.0 * worst_env);
    let spread = (levels[0] - levels[1]).abs();
    ensure!(spread < 0.1, "sensation levels differ by {spread} dB");
    ensure!(r.electrostatic.iter().all(|&v| v == 0.0), "electrostatic channel is not silent");
    Ok((worst_env, spread))
}

fn criterion_4() -> Outcome {
    let sens = SensitivityCurve::default();
    let opts = FlowOptions::default();
    ensure!(opts.part_duration_s == 1.5, "default part duration is {}", opts.part_duration_s);
    let mut checked = 0;
    let (mut env, mut spread) = (0.0f64, 0.0f64);
    let fixture = fixture_map();
    let mut cases: Vec<(&VibrationMap, Point, Point)> = vec![(
        &fixture,
        fixture.grid().point(FIXTURE_LEFT),
        fixture.grid().point(FIXTURE_RIGHT),
    )];
    for map in maps().iter().take(3) {
        for (a, b) in [(14, 15), (40, 52), (30, 31)] {
            cases.push((map, map.grid().point(a), map.grid().point(b)));
        }
        cases.push((map, Point::new(200.0, 150.0), Point::new(260.0, 180.0)));
    }
    for (map, from, to) in cases {
        let lut = build_lookup(map, &sens);
        let Ok(plan) = plan_point_flow(&lut, map, &sens, from, to, &opts) else {
            continue;
        };
        let stim = FlowStimulus::render(plan, 44_100.0).map_err(|e| e.to_string())?;
        let (e, s) = check_stimulus(map, &stim, &sens)?;
        env = env.max(e);
        spread = spread.max(s);
        checked += 1;
    }
    ensure!(checked >= 5, "only {checked} flows could be planned");
    Ok(format!(
        "{checked} stimuli, envelope error {:.3}% of peak, level spread {spread:.1e} dB",
        100.0 * env
    ))
}

/// Independent evaluation of square activity for one excitation.
fn activity(map: &VibrationMap, sens: &SensitivityCurve, region: &HandRegion, act: Actuator, hz: f64, drive: f64) -> [[bool; 3]; 3] {
    let bin = map.axis().bin_of(hz).unwrap();
    let need = 3.0 * sens.jnd_db() - 1e-9;
    let sq = region.side / 3.0;
    let cell = sq / SUBGRID as f64;
    let mut out = [[false; 3]; 3];
    for (col, column) in out.iter_mut().enumerate() {
        for (row, slot) in column.iter_mut().enumerate() {
            let mut n = 0;
            for v in 0..SUBGRID {
                for u in 0..SUBGRID {
                    let p = Point::new(
                        region.center.x - region.side / 2.0 + col as f64 * sq + (u as f64 + 0.5) * cell,
                        region.center.y - region.side / 2.0 + row as f64 * sq + (v as f64 + 0.5) * cell,
                    );
                    let d = drive * bilinear(map, p, act, bin);
                    if d > 0.0 && 20.0 * (d / sens.threshold(hz)).log10() >= need {
                        n += 1;
                    }
                }
            }
            *slot = 2 * n >= SUBGRID * SUBGRID;
        }
    }
    out
}

/// Source active, destination silent and mirror symmetry across the flow axis.
fn rules_hold(active: &[[bool; 3]; 3], dir: Direction, part: usize) -> bool {
    let horizontal = matches!(dir, Direction::LeftToRight | Direction::RightToLeft);
    let forward = matches!(dir, Direction::LeftToRight | Direction::UpToDown);
    let (src, dst) = if forward == (part == 1) { (0, 2) } else { (2, 0) };
    let line = |l: usize| -> [bool; 3] {
        if horizontal {
            active[l]
        } else {
            [active[0][l], active[1][l], active[2][l]]
        }
    };
    let source = line(src).iter().any(|&x| x);
    let dest = line(dst).iter().all(|&x| !x);
    let symmetric = (0..3).all(|l| line(l)[0] == line(l)[2]);
    source && dest && symmetric
}

fn engineered_map(drive: f64, sens: &SensitivityCurve, region: &HandRegion) -> VibrationMap {
    let grid = GridSpec::default();
    let axis = FreqAxis::new(40.0, 20.0, 6);
    let c = region.center;
    let edge = sens.displacement_at_level(3.0 * sens.jnd_db(), 100.0) / drive;
    // Affine ramps crossing the 3-JND level 10 mm past the first third of the
    // region, so only the outer line of squares reaches half coverage.
    let ramp = |s: f64| edge * (1.0 + s / 1000.0);
    let curves = (1..=grid.len())
        .flat_map(|i| {
            let p = grid.point(i);
            Actuator::ALL.map(|act| {
                let m = (0..axis.count)
                    .map(|b| match (act, b) {
                        (Actuator::PA, 1) => ramp((c.x - 10.0) - p.x),
                        (Actuator::PC, 2) => ramp(p.x - (c.x + 10.0)),
                        (Actuator::PB, 3) => ramp((c.y - 10.0) - p.y),
                        (Actuator::PD, 4) => ramp(p.y - (c.y + 10.0)),
                        _ => 0.0,
                    })
                    .collect();
                FrfCurve::new(axis, m)
            })
        })
        .collect();
    VibrationMap::new(grid, axis, curves, Provenance::Fixture).unwrap()
}

fn criterion_5() -> Outcome {
    let sens = SensitivityCurve::default();
    let regions = [(200.0, 150.0), (540.0, 150.0), (200.0, 300.0), (400.0, 250.0)].map(|(x, y)| HandRegion::new(Point::new(x, y)));
    let (mut planned, mut failed) = (0, 0);
    for map in maps() {
        let cand = Candidates::default_for(map.axis());
        for region in &regions {
            for dir in Direction::ALL {
                match plan_hand_flow(map, &sens, region, dir, &cand, 100.0) {
                    Ok(plan) => {
                        for (k, part) in plan.parts.iter().enumerate() {
                            let act = activity(map, &sens, region, part.actuator, part.freq_hz, part.drive_v);
                            ensure!(act == part.activity.active, "{dir} part {}: activity differs on re-evaluation", k + 1);
                            ensure!(rules_hold(&act, dir, k + 1), "{dir} part {} breaks a rule", k + 1);
                        }
                        planned += 1;
                    }
                    Err(HandFlowError::NoFeasible { .. }) => failed += 1,
                    Err(e) => return Err(e.to_string()),
                }
            }
        }
    }
    ensure!(planned > 0, "no plan was returned on any seeded map");

    let sens = SensitivityCurve::flat(0.5, 1.5);
    let region = HandRegion::new(Point::new(340.0, 220.0));
    let map = engineered_map(100.0, &sens, &region);
    let cand = Candidates::default_for(map.axis());
    let col = |c: usize| {
        let mut a = [[false; 3]; 3];
        a[c] = [true; 3];
        a
    };
    let row = |r: usize| {
        let mut a = [[false; 3]; 3];
        for column in a.iter_mut() {
            column[r] = true;
        }
        a
    };
    let expected = [
        (Direction::LeftToRight, (Actuator::PA, col(0)), (Actuator::PC, col(2))),
        (Direction::RightToLeft, (Actuator::PC, col(2)), (Actuator::PA, col(0))),
        (Direction::UpToDown, (Actuator::PB, row(0)), (Actuator::PD, row(2))),
        (Direction::DownToUp, (Actuator::PD, row(2)), (Actuator::PB, row(0))),
    ];
    for (dir, first, second) in expected {
        let plan = plan_hand_flow(&map, &sens, &region, dir, &cand, 100.0).map_err(|e| e.to_string())?;
        for (part, want) in plan.parts.iter().zip([first, second]) {
            ensure!(
                (part.actuator, part.activity.active) == want,
                "{dir}: got {} {:?}, expected {} {:?}",
                part.actuator,
                part.activity.active,
                want.0,
                want.1
            );
        }
    }

    let flat_curves = (0..GridSpec::default().len() * 5)
        .map(|_| FrfCurve::new(FreqAxis::new(40.0, 20.0, 6), vec![1.0; 6]))
        .collect();
    let saturated = VibrationMap::new(GridSpec::default(), FreqAxis::new(40.0, 20.0, 6), flat_curves, Provenance::Fixture).unwrap();
    for dir in Direction::ALL {
        let r = plan_hand_flow(&saturated, &sens, &region, dir, &cand, 100.0);
        ensure!(matches!(r, Err(HandFlowError::NoFeasible { .. })), "{dir} planned on a saturated map");
    }
    let _ = SQUARES;
    Ok(format!(
        "{planned} plans re-verified, {failed} infeasible reported, engineered and saturated maps as expected"
    ))
}

fn criterion_6() -> Outcome {
    let spec = PlateSpec::default();
    let patches = default_patches(&spec);
    let model = PlateModel::new(&spec, &patches).map_err(|e| e.to_string())?;
    let axis = FreqAxis::sweep_default();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst = 0.0f64;
    for _ in 0..40 {
        let p = Point::new(rng.random_range(5.0..spec.length_x - 5.0), rng.random_range(5.0..spec.length_y - 5.0));
        let pairs = [
            (Actuator::PA, Actuator::PC, Point::new(spec.length_x - p.x, p.y)),
            (Actuator::PB, Actuator::PD, Point::new(p.x, spec.length_y - p.y)),
        ];
        for (a, b, q) in pairs {
            let fa = model.frf(p, a, &axis).unwrap();
            let fb = model.frf(q, b, &axis).unwrap();
            for (x, y) in fa.magnitudes().iter().zip(fb.magnitudes()) {
                let scale = x.abs().max(y.abs());
                if scale > 0.0 {
                    worst = worst.max((x - y).abs() / scale);
                }
            }
        }
    }
    ensure!(worst <= 1e-9, "mirrored FRFs differ by {worst:e}");

    let single = PlateSpec { modes_x: 1, modes_y: 1, ..PlateSpec::default() };
    let f11 = modal_frequency(&single, 1, 1).unwrap();
    let probe = Point::new(300.0, 200.0);
    let got = synthesize_frf(&single, &patches, probe, Actuator::PA, &FreqAxis::new(f11, 1.0, 1)).unwrap().magnitudes()[0];
    let (a, b) = (single.length_x * 1e-3, single.length_y * 1e-3);
    let norm = 2.0 / (single.areal_density * a * b).sqrt();
    let phi = norm * (PI * probe.x * 1e-3 / a).sin() * (PI * probe.y * 1e-3 / b).sin();
    let pa = &patches[0];
    let (x0, x1) = ((pa.center.x - pa.size.0 / 2.0) * 1e-3, (pa.center.x + pa.size.0 / 2.0) * 1e-3);
    let (y0, y1) = ((pa.center.y - pa.size.1 / 2.0) * 1e-3, (pa.center.y + pa.size.1 / 2.0) * 1e-3);
    let ix = a / PI * ((PI * x0 / a).cos() - (PI * x1 / a).cos());
    let iy = b / PI * ((PI * y0 / b).cos() - (PI * y1 / b).cos());
    let q = pa.force_scale / ((x1 - x0) * (y1 - y0)) * norm * ix * iy;
    let w = 2.0 * PI * f11;
    let expected = (phi * q / (2.0 * single.damping_ratio * w * w)).abs() * 1e6;
    let rel = (got - expected).abs() / expected;
    ensure!(rel < 5e-3, "single-mode peak {got} vs {expected}");
    Ok(format!("mirror error {worst:.1e}, single-mode peak error {:.3}%", 100.0 * rel))
}

fn criterion_7() -> Outcome {
    let p = ElectroParams::default();
    ensure!(electrostatic_force(&p, 0.0) == 0.0, "f(0) is not zero");
    for v in [1.0, 37.5, 100.0, 250.0] {
        let r = electrostatic_force(&p, 2.0 * v) / electrostatic_force(&p, v);
        ensure!((r - 4.0).abs() / 4.0 < 1e-12, "f(2v)/f(v) = {r} at {v} V");
        for k in [0.5, 3.0, 10.0] {
            let scaled = ElectroParams { area: p.area * k, ..p };
            let r = electrostatic_force(&scaled, v) / electrostatic_force(&p, v);
            ensure!((r - k).abs() / k < 1e-12, "area x{k} scaled force by {r}");
        }
    }
    // 8.854e-12 * 100^2 * 1e-4 / (2 * 2.01e-4 * (1e-6/3 + 2e-4/1000)) by hand.
    let expected = 0.041_296_641_791_044_776;
    let f = electrostatic_force(&p, 100.0);
    ensure!((f - expected).abs() / expected < 1e-9, "f(100 V) = {f}");
    Ok(format!("f(100 V) = {f:.12} N"))
}

fn rising_edges(w: &[f64], level: f64) -> usize {
    let mut prev = 0.0;
    let mut n = 0;
    for &v in w {
        if v == level && prev != level {
            n += 1;
        }
        prev = v;
    }
    n
}

fn criterion_8() -> Outcome {
    let cfg = KnobConfig::default();
    let sweep = ScenarioPreset { sectors: 16, distance_deg: 270.0, ..ScenarioPreset::default() };
    let out = sweep.run(&cfg).map_err(|e| e.to_string())?;
    let pulses = rising_edges(&out.waveform, cfg.detent_v);
    ensure!(pulses == 12 && out.crossings.len() == 12, "270 deg / 16 sectors gave {pulses} pulses");

    for preset in ScenarioPreset::grid(Condition::Detents, 180.0) {
        let out = preset.run(&cfg).map_err(|e| e.to_string())?;
        let want = (preset.distance_deg / (360.0 / preset.sectors as f64)).floor() as usize;
        let got = rising_edges(&out.waveform, cfg.detent_v);
        ensure!(
            got == want && out.crossings.len() == want,
            "{} deg over {} sectors: {got} pulses, expected {want}",
            preset.distance_deg,
            preset.sectors
        );
        let expected_t = preset.distance_deg / preset.speed_dps;
        ensure!(
            (out.metrics.completion_time_s - expected_t).abs() <= 1.0 / preset.frame_rate + 1e-9,
            "completion {} vs {expected_t}",
            out.metrics.completion_time_s
        );
    }

    let overshoot = ScenarioPreset { overshoot_deg: 36.0, distance_deg: 180.0, speed_dps: 120.0, ..ScenarioPreset::default() };
    let out = overshoot.run(&cfg).map_err(|e| e.to_string())?;
    // Target sector 4 spans [180, 225); the hand peaks at 238.5 and returns to 202.5.
    let exit = (225.0 + 1.0 - 22.5) / 120.0;
    let entry = (238.5 - 22.5 + (238.5 - 225.0 + 1.0)) / 120.0;
    ensure!(out.metrics.overshoots == 1, "overshoots {}", out.metrics.overshoots);
    ensure!(
        (out.metrics.recovery_time_s - (entry - exit)).abs() <= 1.0 / 60.0,
        "recovery {} vs {}",
        out.metrics.recovery_time_s,
        entry - exit
    );

    let held = ScenarioPreset { condition: Condition::ConstantFriction, hold_s: 1.0, ..ScenarioPreset::default() };
    let out = held.run(&cfg).map_err(|e| e.to_string())?;
    ensure!(out.frequency_trace.iter().all(|&(_, f)| f == 180.0), "CF trace leaves 180 Hz");
    let tail = &out.waveform[out.waveform.len() - cfg.sample_rate as usize / 2..];
    let (bin, width) = dominant_bin(tail, cfg.sample_rate);
    ensure!((bin as f64 * width - 180.0).abs() <= width, "CF carrier at {} Hz", bin as f64 * width);

    let visual = ScenarioPreset { condition: Condition::Visual, ..ScenarioPreset::default() };
    let out = visual.run(&cfg).map_err(|e| e.to_string())?;
    ensure!(out.waveform.iter().all(|&v| v == 0.0), "condition V emitted a non-zero sample");

    // Constant angular acceleration of 300 deg/s^2 from rest.
    let keys: Vec<(f64, f64)> = (0..=40).map(|k| {
        let t = k as f64 * 0.05;
        (t, 10.0 + 150.0 * t * t)
    }).collect();
    let ramp = Trajectory::from_keyframes(Point::new(0.0, 0.0), 50.0, &keys, 60.0);
    let mut s = KnobSession::new(KnobSpec::new(8), Condition::VariableFriction, cfg.clone()).map_err(|e| e.to_string())?;
    for f in &ramp.samples {
        s.knob_step(f.t, f.thumb, f.index).map_err(|e| e.to_string())?;
    }
    let trace = s.frequency_trace();
    ensure!(trace.iter().all(|&(_, f)| (60.0..=180.0).contains(&f)), "VF left [60, 180] Hz");
    ensure!(trace.windows(2).all(|w| w[1].1 >= w[0].1 - 1e-9), "VF frequency not monotone on a ramp");
    ensure!(trace.last().unwrap().1 > 170.0, "VF never reached full speed");
    Ok("detent counts, CF 180 Hz, VF in [60, 180] Hz and monotone, V silent, metrics within one frame".into())
}

/// Smooth random star-shaped outline.
fn star(rng: &mut ChaCha8Rng) -> Vec<Point> {
    let lobes: Vec<(f64, f64)> = (2..6).map(|_| (rng.random_range(0.0..0.25), rng.random_range(0.0..2.0 * PI))).collect();
    let n = rng.random_range(120..300);
    (0..n)
        .map(|i| {
            let t = 2.0 * PI * i as f64 / n as f64;
            let r = 1.0 + lobes.iter().enumerate().map(|(k, &(a, ph))| a * ((k + 2) as f64 * t + ph).cos()).sum::<f64>();
            Point::new(r * t.cos(), r * t.sin())
        })
        .collect()
}

fn criterion_9() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let shape = star(&mut rng);
        let base = efd(&shape, 10).map_err(|e| e.to_string())?;
        let (s, c) = rng.random_range(0.0..2.0 * PI).sin_cos();
        let k = rng.random_range(0.2..20.0);
        let (tx, ty) = (rng.random_range(-500.0..500.0), rng.random_range(-500.0..500.0));
        let shift = rng.random_range(0..shape.len());
        let moved: Vec<Point> = (0..shape.len())
            .map(|i| {
                let p = shape[(i + shift) % shape.len()];
                Point::new(k * (c * p.x - s * p.y) + tx, k * (s * p.x + c * p.y) + ty)
            })
            .collect();
        let d = efd(&moved, 10).map_err(|e| e.to_string())?;
        let l2 = base.iter().zip(&d).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        worst = worst.max(l2);
    }
    ensure!(worst < 1e-3, "descriptor moved by {worst:e}");

    for n in 0..200 {
        let pts: Vec<Point> = (0..rng.random_range(1..14))
            .map(|_| Point::new(rng.random_range(-50.0..50.0), rng.random_range(-50.0..50.0)))
            .collect();
        let fast = min_enclosing_circle(&pts).map_err(|e| e.to_string())?;
        let slow = brute_force_circle(&pts).unwrap();
        ensure!((fast.radius - slow.radius).abs() <= 1e-6 * slow.radius.max(1.0), "set {n}: {} vs {}", fast.radius, slow.radius);
    }

    let synth = SynthConfig::default();
    let mut theta_err = 0.0f64;
    for k in 0..24 {
        let rot = k as f64 * 15.0 + 3.0;
        let label = GestureLabel::STATIC[k % 5];
        let truth = HandTruth { center: Point::new(320.0, 240.0), radius_px: 140.0, rotation_deg: rot };
        let mask = static_mask_posed(label, truth, &synth, &mut rng);
        let pose = detect_pose(&mask.largest_component(), &CanonicalConfig::default()).map_err(|e| e.to_string())?;
        let want = (360.0 - rot).rem_euclid(360.0);
        let diff = (pose.theta_deg - want + 180.0).rem_euclid(360.0) - 180.0;
        theta_err = theta_err.max(diff.abs());
    }
    ensure!(theta_err <= 2.0, "theta off by {theta_err:.2} deg");

    let corpus = Corpus::generate(100, 2024, &synth);
    let fcfg = FeatureConfig::default();
    let svm = SvmConfig::default();
    let pre = PreprocessConfig::default();
    let report = evaluate_corpus(&corpus, &fcfg, &svm, pre.min_blob_area).map_err(|e| e.to_string())?;
    let sa = report.statics.as_ref().unwrap().accuracy;
    let da = report.dynamics.as_ref().unwrap().accuracy;
    ensure!(sa >= 0.95, "static two-fold accuracy {:.1}%", 100.0 * sa);
    ensure!(da >= 0.85, "dynamic two-fold accuracy {:.1}%", 100.0 * da);

    let (ms, md) = per_frame_latency(&corpus, &fcfg, &svm, &pre, &mut rng)?;
    ensure!(ms <= 20.0 && md <= 20.0, "per-frame latency static {ms:.2} ms, dynamic {md:.2} ms");
    Ok(format!(
        "invariance {worst:.1e}, theta error {theta_err:.2} deg, CV {:.1}% / {:.1}%, median frame {ms:.2} / {md:.2} ms",
        100.0 * sa,
        100.0 * da
    ))
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    v[v.len() / 2]
}

/// Median wall time per 640x480 frame from camera image to label.
fn per_frame_latency(
    corpus: &Corpus,
    fcfg: &FeatureConfig,
    svm: &SvmConfig,
    pre: &PreprocessConfig,
    rng: &mut ChaCha8Rng,
) -> Result<(f64, f64), String> {
    let rows: Vec<Sample> = corpus
        .static_features(fcfg)
        .into_iter()
        .filter_map(|(label, f)| f.map(|features| Sample { features, label }))
        .collect();
    let smodel = train(&rows, GestureKind::Static, &static_blocks(fcfg), svm).map_err(|e| e.to_string())?;
    let drows: Vec<Sample> = corpus
        .dynamic_features(fcfg, pre.min_blob_area)
        .into_iter()
        .filter_map(|(label, f)| f.map(|features| Sample { features, label }))
        .collect();
    let dmodel = train(&drows, GestureKind::Dynamic, &surfhap_core::gesture::dynamic_blocks(fcfg), svm).map_err(|e| e.to_string())?;
    let gcfg = GateConfig::default();

    let mut static_ms = Vec::new();
    for s in corpus.statics.iter().step_by(17).take(30) {
        let (raw, bg) = render_raw(&s.mask, rng);
        let mut session = GateSession::new(gcfg.clone());
        for k in 0..gcfg.window {
            let t = Instant::now();
            let frame = preprocess(&raw, &bg, pre, k as f64 / 60.0).map_err(|e| e.to_string())?;
            if session.push(&frame) == Some(Motion::Static) {
                let d = static_descriptor(&frame.mask, fcfg).map_err(|e| e.to_string())?;
                classify_static(&d, &smodel).map_err(|e| e.to_string())?;
            }
            static_ms.push(t.elapsed().as_secs_f64() * 1e3);
        }
    }
    let mut dynamic_ms = Vec::new();
    for s in corpus.dynamics.iter().step_by(17).take(30) {
        let mut frames: Vec<ContactFrame> = Vec::new();
        for (k, m) in s.frames.iter().enumerate() {
            let (raw, bg) = render_raw(m, rng);
            let t = Instant::now();
            frames.push(preprocess(&raw, &bg, pre, k as f64 / 60.0).map_err(|e| e.to_string())?);
            if frames.len() == 4 && gate(&frames, &gcfg) == Motion::Dynamic {
                classify_dynamic(&frames, &dmodel, fcfg).map_err(|e| e.to_string())?;
            }
            dynamic_ms.push(t.elapsed().as_secs_f64() * 1e3);
        }
    }
    let _ = dynamic_features;
    Ok((median(static_ms), median(dynamic_ms)))
}

const CLI_SCRIPT: &[&[&str]] = &[
    &["simulate-frf", "-o", "s.map", "--seed", "3", "--emit-plot", "frf.csv"],
    &["simulate-frf", "-o", "one.map", "--rows", "1", "--cols", "1"],
    &["fixture", "-o", "fx.map"],
    &["build-lut", "--map", "s.map", "-o", "s.lut"],
    &["flow", "point", "--map", "fx.map", "--from", "51", "--to", "52", "-o", "fp.csv", "--plan-json", "fp.json", "--emit-plot", "fpd.csv"],
    &["flow", "point", "--map", "s.map", "--lut", "s.lut", "--from", "150,120", "--to", "480,300", "-o", "fp2.wav", "--format", "pcm"],
    &["flow", "hand", "--map", "s.map", "--center", "300,220", "--direction", "l2r", "-o", "fh.csv", "--plan-json", "fh.json", "--emit-plot", "fhp"],
    &["knob", "--condition", "HD+VF", "--sectors", "16", "--distance", "270", "--overshoot", "30", "-o", "k.csv", "--metrics-json", "k.json", "--save-trajectory", "t.csv", "--emit-plot", "kf.csv"],
    &["knob", "--condition", "HD+CF", "--sectors", "16", "--distance", "270", "--trajectory", "t.csv", "-o", "k2.wav", "--format", "pcm"],
    &["knob", "--sectors", "8", "--distance", "45", "--target-sector", "5", "--metrics-json", "timeout.json"],
    &["gesture", "gen-corpus", "-o", "corp", "--per-class", "6", "--seed", "11", "--format", "pgm"],
    &["gesture", "train", "--corpus", "corp", "--kind", "static", "-o", "st.model", "--report", "st.json", "--seed", "3"],
    &["gesture", "train", "--corpus", "corp", "--kind", "dynamic", "-o", "dy.model"],
    &["gesture", "classify", "--model", "st.model", "corp/s-open-hand-0002.pgm"],
    &["gesture", "classify", "--model", "dy.model", "corp/d-rotate-0001-f0.pgm", "corp/d-rotate-0001-f1.pgm", "corp/d-rotate-0001-f2.pgm", "corp/d-rotate-0001-f3.pgm"],
    &["gesture", "classify", "--model", "st.model", "--background", "bg.pgm", "raw.pgm"],
];

fn tree(dir: &Path, base: &Path, out: &mut Vec<(String, Vec<u8>)>) -> std::io::Result<()> {
    let mut entries: Vec<_> = std::fs::read_dir(dir)?.collect::<Result<_, _>>()?;
    entries.sort_by_key(|e| e.file_name());
    for e in entries {
        let p = e.path();
        if p.is_dir() {
            tree(&p, base, out)?;
        } else {
            out.push((p.strip_prefix(base).unwrap().display().to_string(), std::fs::read(&p)?));
        }
    }
    Ok(())
}

/// Run the whole script in a fresh directory; returns every transcript and output file.
fn cli_session(bin: &Path) -> Result<(Vec<(Vec<u8>, Vec<u8>, Option<i32>)>, Vec<(String, Vec<u8>)>), String> {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let (mask, _) = static_mask(GestureLabel::OpenHand, &SynthConfig::default(), &mut rng);
    let (raw, bg) = render_raw(&mask, &mut rng);
    raw.save_pgm(dir.path().join("raw.pgm")).map_err(|e| e.to_string())?;
    bg.save_pgm(dir.path().join("bg.pgm")).map_err(|e| e.to_string())?;
    let mut transcripts = Vec::new();
    for args in CLI_SCRIPT {
        let o = Command::new(bin)
            .args(*args)
            .current_dir(dir.path())
            .env_remove("SURFHAP_CONFIG")
            .output()
            .map_err(|e| e.to_string())?;
        transcripts.push((o.stdout, o.stderr, o.status.code()));
    }
    let mut files = Vec::new();
    tree(dir.path(), dir.path(), &mut files).map_err(|e| e.to_string())?;
    Ok((transcripts, files))
}

fn criterion_10() -> Outcome {
    let bin = Path::new(env!("CARGO_BIN_EXE_surfhap"));
    let (ta, fa) = cli_session(bin)?;
    for (args, (_, err, code)) in CLI_SCRIPT.iter().zip(&ta) {
        let expected = if args.contains(&"timeout.json") { Some(4) } else { Some(0) };
        ensure!(
            *code == expected,
            "`{}` exited {code:?}: {}",
            args.join(" "),
            String::from_utf8_lossy(err).trim()
        );
    }
    let (tb, fb) = cli_session(bin)?;
    for (k, (a, b)) in ta.iter().zip(&tb).enumerate() {
        ensure!(a == b, "`{}` printed different output on the second run", CLI_SCRIPT[k].join(" "));
    }
    ensure!(fa.len() == fb.len(), "runs wrote {} and {} files", fa.len(), fb.len());
    let mut bytes = 0;
    for ((na, da), (nb, db)) in fa.iter().zip(&fb) {
        ensure!(na == nb, "file sets differ at {na} / {nb}");
        ensure!(da == db, "{na} differs between runs");
        bytes += da.len();
    }
    Ok(format!("{} commands, {} files, {bytes} bytes identical across two runs", CLI_SCRIPT.len(), fa.len()))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("lookup table equals exhaustive scan", criterion_1),
        ("fixture lookups", criterion_2),
        ("bilinear interpolation", criterion_3),
        ("stimulus rendering", criterion_4),
        ("under-hand planner soundness", criterion_5),
        ("plate oracle", criterion_6),
        ("electrostatics", criterion_7),
        ("knob", criterion_8),
        ("gesture properties", criterion_9),
        ("CLI determinism", criterion_10),
    ];
    let only: Option<usize> = std::env::var("ACCEPTANCE_ONLY").ok().and_then(|v| v.parse().ok());
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        if only.is_some_and(|n| n != i + 1) {
            continue;
        }
        let t = Instant::now();
        let r = std::panic::catch_unwind(run).unwrap_or_else(|_| Err("panicked".into()));
        let secs = t.elapsed().as_secs_f64();
        match r {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail} ({secs:.1} s)", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {why} ({secs:.1} s)", i + 1);
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
