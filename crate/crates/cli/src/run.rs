use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use surfhap_core::electro::{run_knob_scenario, KnobError, ScenarioPreset, Trajectory};
use surfhap_core::flowlut::{build_lookup_with, plan_point_flow, ExcitationLookup, FlowStimulus};
use surfhap_core::gesture::{
    classify_dynamic, classify_static, cross_validate, dynamic_blocks, static_blocks, static_descriptor, train,
    ContactFrame, Corpus, CvReport, GateSession, GestureKind, GrayFrame, LinearModel, Mask, MaskFormat, Motion,
    Sample, DYNAMIC_FRAMES,
};
use surfhap_core::handflow::{plan_hand_flow, render_hand_flow, sensation_grid, Candidates, HandRegion, SQUARES, SUBGRID};
use surfhap_core::platesim::{default_patches, generate_vibration_map, seeded_layout};
use surfhap_core::vibmap::fixture_map;
use surfhap_core::waveform::Rendered;
use surfhap_core::{Actuator, Point, VibrationMap};

use crate::args::*;
use crate::config::Config;
use crate::failure::Failure;

// quiet exit on broken pipe
macro_rules! println {
    ($($t:tt)*) => {{
        if let Err(e) = writeln!(std::io::stdout(), $($t)*) {
            if e.kind() == std::io::ErrorKind::BrokenPipe {
                std::process::exit(0);
            }
        }
    }};
}

type Outcome = Result<(), Failure>;

pub fn run(cli: Cli) -> Outcome {
    let cfg = Config::load(cli.config.as_deref())?;
    match cli.command {
        Command::SimulateFrf(a) => simulate_frf(&cfg, a),
        Command::Fixture(a) => {
            fixture_map().save(&a.out)?;
            println!("wrote fixture map to {}", a.out.display());
            Ok(())
        }
        Command::BuildLut(a) => build_lut(&cfg, a),
        Command::Flow(Flow::Point(a)) => flow_point(&cfg, a),
        Command::Flow(Flow::Hand(a)) => flow_hand(&cfg, a),
        Command::Knob(a) => knob(&cfg, a),
        Command::Gesture(Gesture::GenCorpus(a)) => gen_corpus(&cfg, a),
        Command::Gesture(Gesture::Train(a)) => train_model(&cfg, a),
        Command::Gesture(Gesture::Classify(a)) => classify(&cfg, a),
    }
}

fn create(path: &Path) -> Result<BufWriter<File>, Failure> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Failure::data(format!("{}: {e}", path.display())))
}

fn write_text(path: &Path, text: &str) -> Outcome {
    std::fs::write(path, text).map_err(|e| Failure::data(format!("{}: {e}", path.display())))
}

fn load_map(path: &Path) -> Result<VibrationMap, Failure> {
    VibrationMap::load(path).map_err(|e| Failure::data(format!("{}: {e}", path.display())))
}

fn write_wave(r: &Rendered, w: &WaveOut) -> Outcome {
    let Some(out) = &w.out else {
        return Ok(());
    };
    match w.format {
        WaveFormat::Csv => r.save_csv(out)?,
        WaveFormat::Pcm => r.save_wav(out, w.full_scale_v)?,
    }
    Ok(())
}

fn simulate_frf(cfg: &Config, a: SimulateFrf) -> Outcome {
    let (mut plate, patches) = match a.seed {
        Some(s) => seeded_layout(s),
        None => {
            let p = cfg.plate.clone();
            let patches = cfg.patches.clone().unwrap_or_else(|| default_patches(&p));
            (p, patches)
        }
    };
    if let Some(d) = a.damping {
        plate.damping_ratio = d;
        plate.mode_damping = None;
    }
    let mut grid = cfg.grid.clone().unwrap_or_default();
    if a.rows.is_some() || a.cols.is_some() || a.spacing.is_some() {
        grid.rows = a.rows.unwrap_or(grid.rows);
        grid.cols = a.cols.unwrap_or(grid.cols);
        grid.spacing = a.spacing.unwrap_or(grid.spacing);
        if grid.rows == 0 || grid.cols == 0 {
            return Err(Failure::data("grid needs at least one row and one column"));
        }
        grid.origin = Point::new(
            (plate.length_x - (grid.cols - 1) as f64 * grid.spacing) / 2.0,
            (plate.length_y - (grid.rows - 1) as f64 * grid.spacing) / 2.0,
        );
    }
    let map = generate_vibration_map(&plate, &patches, &grid, &cfg.axis)?;
    map.save(&a.out)?;

    let centre = Point::new(plate.length_x / 2.0, plate.length_y / 2.0);
    let near = (1..=map.point_count())
        .min_by(|&i, &j| grid.point(i).distance(centre).total_cmp(&grid.point(j).distance(centre)))
        .expect("grid is not empty");
    println!(
        "wrote {} points x {} bins to {}",
        map.point_count(),
        map.axis().count,
        a.out.display()
    );
    for act in Actuator::ALL {
        let (bin, mag) = map.curve(near, act)?.peak();
        println!("point {near} {act} peak {} Hz {mag:.4} um/Vp", map.axis().freq(bin));
    }
    if let Some(p) = &a.emit_plot {
        let mut w = create(p)?;
        writeln!(w, "freq_hz,PA,PB,PC,PD,PALL")?;
        let curves = Actuator::ALL.map(|act| map.curve(near, act).map(|c| c.magnitudes().to_vec()));
        let curves = curves.into_iter().collect::<Result<Vec<_>, _>>()?;
        for b in 0..map.axis().count {
            write!(w, "{}", map.axis().freq(b))?;
            for c in &curves {
                write!(w, ",{}", c[b])?;
            }
            writeln!(w)?;
        }
        w.flush()?;
    }
    Ok(())
}

fn lookup_config(cfg: &Config, drive_v: Option<f64>, margin_db: Option<f64>) -> surfhap_core::flowlut::LookupConfig {
    let mut lc = cfg.lookup;
    if let Some(v) = drive_v {
        lc.drive_v = v;
    }
    if let Some(m) = margin_db {
        lc.margin_db = m;
    }
    lc
}

fn build_lut(cfg: &Config, a: BuildLut) -> Outcome {
    let map = load_map(&a.map)?;
    let sens = cfg.sensitivity(a.sensitivity.as_deref())?;
    let lut = build_lookup_with(&map, &sens, &lookup_config(cfg, a.drive_v, a.margin_db));
    lut.save(&a.out)?;
    let (mut pairs, mut feasible) = (0, 0);
    for (_, _, r) in lut.iter() {
        pairs += 1;
        feasible += r.feasible as usize;
    }
    println!(
        "wrote {} point table to {}: {feasible} of {pairs} pairs feasible",
        lut.points(),
        a.out.display()
    );
    Ok(())
}

fn resolve(map: &VibrationMap, site: Site) -> Result<Point, Failure> {
    match site {
        Site::Index(i) => Ok(map.point_coordinates(i)?),
        Site::At(p) => Ok(p),
    }
}

fn flow_point(cfg: &Config, a: FlowPoint) -> Outcome {
    let map = load_map(&a.map)?;
    let sens = cfg.sensitivity(a.sensitivity.as_deref())?;
    let lut = match &a.lut {
        Some(p) => ExcitationLookup::load(p).map_err(|e| Failure::data(format!("{}: {e}", p.display())))?,
        None => build_lookup_with(&map, &sens, &cfg.lookup),
    };
    let (from, to) = (resolve(&map, a.from)?, resolve(&map, a.to)?);
    let mut opts = cfg.flow.clone();
    if let Some(d) = a.duration {
        opts.part_duration_s = d;
    }
    if let Some(r) = a.ramp {
        opts.ramp_s = r;
    }
    if let Some(v) = a.drive_v {
        opts.drive_v = v;
    }
    let plan = plan_point_flow(&lut, &map, &sens, from, to, &opts)?;
    for (k, p) in plan.parts.iter().enumerate() {
        println!(
            "part {} {} {} Hz {:.3} Vp {:.2} dB",
            k + 1,
            p.actuator,
            p.freq_hz,
            p.amplitude_v,
            plan.sensation_db[k]
        );
    }
    if let Some(p) = &a.plan_json {
        write_text(p, &serde_json::to_string_pretty(&plan)?)?;
    }
    if let Some(p) = &a.emit_plot {
        let curves_from = map.interpolate_all(from)?;
        let curves_to = map.interpolate_all(to)?;
        let mut w = create(p)?;
        writeln!(w, "freq_hz,PA,PB,PC,PD,PALL")?;
        for b in 0..map.axis().count {
            write!(w, "{}", map.axis().freq(b))?;
            for k in 0..Actuator::ALL.len() {
                write!(w, ",{}", curves_from[k].magnitudes()[b] - curves_to[k].magnitudes()[b])?;
            }
            writeln!(w)?;
        }
        w.flush()?;
    }
    let rate = a.wave.sample_rate.unwrap_or(cfg.sample_rate);
    let stim = FlowStimulus::render(plan, rate)?;
    write_wave(&stim.rendered, &a.wave)
}

fn flow_hand(cfg: &Config, a: FlowHand) -> Outcome {
    let map = load_map(&a.map)?;
    let sens = cfg.sensitivity(a.sensitivity.as_deref())?;
    let region = HandRegion {
        center: a.center,
        side: a.side.unwrap_or(cfg.hand.side_mm),
    };
    let drive = a.drive_v.unwrap_or(cfg.hand.drive_v);
    let plan = plan_hand_flow(&map, &sens, &region, a.direction, &Candidates::default_for(map.axis()), drive)?;
    println!("direction {} at {} side {} mm", plan.direction, region.center, region.side);
    for (k, p) in plan.parts.iter().enumerate() {
        println!("part {} {} {} Hz {} Vp", k + 1, p.actuator, p.freq_hz, p.drive_v);
    }
    if let Some(p) = &a.plan_json {
        write_text(p, &plan.to_json())?;
    }
    if let Some(dir) = &a.emit_plot {
        std::fs::create_dir_all(dir).map_err(|e| Failure::data(format!("{}: {e}", dir.display())))?;
        let mut w = create(&dir.join("activity.csv"))?;
        plan.write_activity_csv(&mut w)?;
        w.flush()?;
        let n = SQUARES * SUBGRID;
        for (k, p) in plan.parts.iter().enumerate() {
            let levels = sensation_grid(&map, &sens, &region, p.actuator, p.freq_hz, p.drive_v)?;
            let mut w = create(&dir.join(format!("part{}_sensation_db.csv", k + 1)))?;
            for row in levels.chunks(n) {
                let line: Vec<String> = row.iter().map(|v| format!("{v:.4}")).collect();
                writeln!(w, "{}", line.join(","))?;
            }
            w.flush()?;
        }
    }
    let duration = a.duration.unwrap_or(cfg.flow.part_duration_s);
    let ramp = a.ramp.unwrap_or(cfg.flow.ramp_s);
    let rate = a.wave.sample_rate.unwrap_or(cfg.sample_rate);
    let rendered = render_hand_flow(&plan, duration, ramp, rate)?;
    write_wave(&rendered, &a.wave)
}

fn knob(cfg: &Config, a: Knob) -> Outcome {
    let mut preset: ScenarioPreset = match &a.preset {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| Failure::data(format!("{}: {e}", p.display())))?;
            serde_json::from_str(&text).map_err(|e| Failure::data(format!("{}: {e}", p.display())))?
        }
        None => cfg.scenario.clone(),
    };
    if let Some(c) = a.condition {
        preset.condition = c;
    }
    if let Some(n) = a.sectors {
        preset.sectors = n;
    }
    if let Some(s) = a.start_sector {
        preset.start_sector = s;
    }
    if let Some(d) = a.distance {
        preset.distance_deg = d;
    }
    if let Some(s) = a.speed {
        preset.speed_dps = s;
    }
    if let Some(o) = a.overshoot {
        preset.overshoot_deg = o;
    }
    if preset.sectors == 0 {
        return Err(Failure::data("knob needs at least one sector"));
    }
    let mut kc = cfg.knob.clone();
    if let Some(r) = a.wave.sample_rate {
        kc.sample_rate = r;
    }
    let traj = match &a.trajectory {
        Some(p) => Trajectory::load_csv(p).map_err(|e| Failure::data(format!("{}: {e}", p.display())))?,
        None => preset.trajectory(),
    };
    if let Some(p) = &a.save_trajectory {
        traj.save_csv(p).map_err(|e| Failure::data(format!("{}: {e}", p.display())))?;
    }
    let target = a.target_sector.unwrap_or_else(|| preset.target_sector());
    let out = match run_knob_scenario(preset.spec(), preset.condition, &kc, &traj, preset.start_sector, target) {
        Ok(o) => o,
        Err(KnobError::Timeout(m)) => {
            println!(
                "condition {} target {target} not reached: final sector {} after {} crossing(s)",
                preset.condition, m.final_sector, m.crossings
            );
            if let Some(p) = &a.metrics_json {
                let doc = serde_json::json!({ "metrics": m, "crossings": [] });
                write_text(p, &serde_json::to_string_pretty(&doc)?)?;
            }
            return Err(KnobError::Timeout(m).into());
        }
        Err(e) => return Err(e.into()),
    };
    let m = &out.metrics;
    println!(
        "condition {} sectors {} target {target}: {} crossing(s), completion {:.4} s, overshoots {}, recovery {:.4} s",
        preset.condition, preset.sectors, m.crossings, m.completion_time_s, m.overshoots, m.recovery_time_s
    );
    if let Some(p) = &a.metrics_json {
        let doc = serde_json::json!({ "metrics": m, "crossings": out.crossings });
        write_text(p, &serde_json::to_string_pretty(&doc)?)?;
    }
    if let Some(p) = &a.emit_plot {
        let mut w = create(p)?;
        writeln!(w, "time_s,carrier_hz")?;
        for (t, f) in &out.frequency_trace {
            writeln!(w, "{t},{f}")?;
        }
        w.flush()?;
    }
    let rendered = Rendered {
        sample_rate: out.sample_rate,
        piezo: vec![0.0; out.waveform.len()],
        electrostatic: out.waveform,
        routes: Vec::new(),
    };
    write_wave(&rendered, &a.wave)
}

fn gen_corpus(cfg: &Config, a: GenCorpus) -> Outcome {
    let corpus = Corpus::generate(a.per_class, a.seed, &cfg.gesture.synth);
    let fmt = match a.format {
        MaskFormatArg::Csv => MaskFormat::Csv,
        MaskFormatArg::Pgm => MaskFormat::Pgm,
    };
    corpus.save(&a.out, fmt)?;
    println!(
        "wrote {} static and {} dynamic samples to {}",
        corpus.statics.len(),
        corpus.dynamics.len(),
        a.out.display()
    );
    Ok(())
}

fn print_report(r: &CvReport) {
    println!("cross-validation accuracy {:.2}%", 100.0 * r.accuracy);
    let per = r.per_class_accuracy();
    for (i, l) in r.labels.iter().enumerate() {
        let row: Vec<String> = r.confusion[i].iter().map(usize::to_string).collect();
        println!("  {l:<12} {:6.2}%  [{}] failed {}", 100.0 * per[i], row.join(" "), r.failed[i]);
    }
}

fn train_model(cfg: &Config, a: Train) -> Outcome {
    let corpus = Corpus::load(&a.corpus)?;
    let g = &cfg.gesture;
    let mut svm = g.svm.clone();
    if let Some(s) = a.seed {
        svm.seed = s;
    }
    let (kind, rows, blocks) = match a.kind {
        KindArg::Static => (GestureKind::Static, corpus.static_features(&g.features), static_blocks(&g.features)),
        KindArg::Dynamic => (
            GestureKind::Dynamic,
            corpus.dynamic_features(&g.features, g.preprocess.min_blob_area),
            dynamic_blocks(&g.features),
        ),
    };
    if rows.is_empty() {
        return Err(Failure::data(format!("corpus has no {} samples", kind.as_str())));
    }
    let report = cross_validate(&rows, kind, &blocks, a.folds, &svm)?;
    print_report(&report);
    if let Some(p) = &a.report {
        write_text(p, &serde_json::to_string_pretty(&report)?)?;
    }
    let samples: Vec<Sample> = rows
        .into_iter()
        .filter_map(|(label, f)| f.map(|features| Sample { features, label }))
        .collect();
    let model = train(&samples, kind, &blocks, &svm)?;
    model.save(&a.out)?;
    println!("wrote {} model to {}", kind.as_str(), a.out.display());
    Ok(())
}

fn classify(cfg: &Config, a: Classify) -> Outcome {
    let g = &cfg.gesture;
    let model = LinearModel::load(&a.model)?;
    let background = match &a.background {
        Some(p) => Some(GrayFrame::load_pgm(p)?),
        None => None,
    };
    let mut masks = Vec::with_capacity(a.frames.len());
    let mut frames = Vec::with_capacity(a.frames.len());
    for (k, path) in a.frames.iter().enumerate() {
        let t = k as f64 * a.frame_dt;
        let (mask, frame) = match &background {
            Some(bg) => {
                let raw = GrayFrame::load_pgm(path)?;
                let f = surfhap_core::gesture::preprocess(&raw, bg, &g.preprocess, t)?;
                (f.mask.clone(), f)
            }
            None => {
                let m = Mask::load(path)?;
                let f = ContactFrame::from_mask(&m, g.preprocess.min_blob_area, t);
                (m, f)
            }
        };
        masks.push(mask);
        frames.push(frame);
    }

    let mut gate = GateSession::new(g.gate.clone());
    let mut motion = None;
    for f in &frames {
        motion = gate.push(f);
        if motion.is_some() {
            break;
        }
    }
    let motion = motion.unwrap_or(Motion::Static);
    println!("motion {}", if motion == Motion::Static { "static" } else { "dynamic" });
    let expected = match motion {
        Motion::Static => GestureKind::Static,
        Motion::Dynamic => GestureKind::Dynamic,
    };
    if model.kind != expected {
        return Err(Failure::data(format!(
            "frames show a {} gesture but the model is {}",
            expected.as_str(),
            model.kind.as_str()
        )));
    }
    let (label, score) = match motion {
        Motion::Static => classify_static(&static_descriptor(&masks[0], &g.features)?, &model)?,
        Motion::Dynamic => {
            if frames.len() < DYNAMIC_FRAMES {
                return Err(Failure::data(format!("dynamic gestures need {DYNAMIC_FRAMES} frames")));
            }
            classify_dynamic(&frames[..DYNAMIC_FRAMES], &model, &g.features)?
        }
    };
    println!("label {label} score {score:.4}");
    Ok(())
}
