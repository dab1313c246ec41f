//! Synthetic contact images: hand silhouettes for the static classes and
//! moving fingertip or palm contacts for the dynamic ones.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::frame::{GrayFrame, Mask, DEFAULT_HEIGHT, DEFAULT_WIDTH};
use super::GestureLabel;
use crate::geom::Point;

#[derive(Clone, Copy, Debug)]
enum Prim {
    Ellipse { c: (f64, f64), ax: f64, ay: f64 },
    Capsule { a: (f64, f64), b: (f64, f64), r: f64 },
}

impl Prim {
    fn contains(&self, p: (f64, f64)) -> bool {
        match *self {
            Prim::Ellipse { c, ax, ay } => ((p.0 - c.0) / ax).powi(2) + ((p.1 - c.1) / ay).powi(2) <= 1.0,
            Prim::Capsule { a, b, r } => {
                let (vx, vy) = (b.0 - a.0, b.1 - a.1);
                let t = (((p.0 - a.0) * vx + (p.1 - a.1) * vy) / (vx * vx + vy * vy)).clamp(0.0, 1.0);
                (p.0 - a.0 - t * vx).hypot(p.1 - a.1 - t * vy) <= r
            }
        }
    }
}

/// Hand outline in a local frame with the palm at the origin and the forearm
/// pointing down, clipped to its bounding circle.
struct HandShape {
    prims: Vec<Prim>,
    center: (f64, f64),
    radius: f64,
}

impl HandShape {
    fn contains(&self, p: (f64, f64)) -> bool {
        (p.0 - self.center.0).hypot(p.1 - self.center.1) <= self.radius && self.prims.iter().any(|q| q.contains(p))
    }
}

const BASES: [(f64, f64); 5] = [(0.30, -0.05), (0.17, 0.22), (0.04, 0.26), (-0.09, 0.24), (-0.21, 0.18)];
const LENGTHS: [f64; 5] = [0.42, 0.60, 0.66, 0.60, 0.48];
const RADII: [f64; 5] = [0.08, 0.07, 0.07, 0.068, 0.06];

fn hand_shape(label: GestureLabel, rng: &mut impl Rng) -> HandShape {
    let mut j = |s: f64| 1.0 + rng.random_range(-s..=s);
    let palm = Prim::Ellipse {
        c: (0.0, 0.0),
        ax: 0.36 * j(0.08),
        ay: 0.32 * j(0.08),
    };
    let arm_r = 0.26 * j(0.08);
    let mut prims = vec![palm, Prim::Capsule { a: (0.0, -0.3), b: (0.0, -4.0), r: arm_r }];
    // (finger, direction in degrees) pairs that are extended.
    let fingers: Vec<(usize, f64)> = match label {
        GestureLabel::OneFinger => vec![(1, 90.0)],
        GestureLabel::TwoFinger => vec![(1, 99.0), (2, 83.0)],
        GestureLabel::LShape => vec![(0, 5.0), (1, 90.0)],
        GestureLabel::ClosedHand => vec![],
        GestureLabel::OpenHand => vec![(0, 15.0), (1, 106.0), (2, 92.0), (3, 79.0), (4, 64.0)],
        _ => panic!("{label} is not a static gesture"),
    };
    let mut j = |s: f64| rng.random_range(-s..=s);
    if fingers.is_empty() {
        prims.push(Prim::Ellipse {
            c: (0.0, 0.2 + j(0.02)),
            ax: 0.31 * (1.0 + j(0.06)),
            ay: 0.22 * (1.0 + j(0.1)),
        });
    }
    for (f, dir) in fingers {
        let d = (dir + j(6.0)).to_radians();
        let len = LENGTHS[f] * (1.0 + j(0.1));
        let a = BASES[f];
        prims.push(Prim::Capsule {
            a,
            b: (a.0 + len * d.cos(), a.1 + len * d.sin()),
            r: RADII[f] * (1.0 + j(0.1)),
        });
    }
    let center = (0.0, -0.25);
    let mut shape = HandShape {
        prims,
        center,
        radius: 10.0,
    };
    // The circle passes through the highest point found near straight up, so
    // that point and the clipped forearm pin the minimum enclosing circle.
    let mut radius: f64 = 0.0;
    for k in -8..=8 {
        let a = (90.0 + k as f64).to_radians();
        let mut r = 0.0;
        while r < 4.0 {
            if shape.contains((center.0 + r * a.cos(), center.1 + r * a.sin())) {
                radius = radius.max(r);
            }
            r += 0.002;
        }
    }
    shape.radius = radius;
    shape
}

/// Ground truth of a generated static sample.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HandTruth {
    pub center: Point,
    pub radius_px: f64,
    /// Counter-clockwise rotation applied to the upright hand.
    pub rotation_deg: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthConfig {
    pub width: usize,
    pub height: usize,
    pub radius_px: (f64, f64),
    /// Sub-pixel jitter of sample positions, which roughens edges.
    pub edge_jitter_px: f64,
    /// Isolated noise pixels sprinkled over the frame.
    pub speckles: usize,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            width: DEFAULT_WIDTH,
            height: DEFAULT_HEIGHT,
            radius_px: (110.0, 160.0),
            edge_jitter_px: 0.5,
            speckles: 40,
        }
    }
}

fn speckle(mask: &mut Mask, n: usize, rng: &mut impl Rng) {
    for _ in 0..n {
        let (x, y) = (rng.random_range(0..mask.width), rng.random_range(0..mask.height));
        let free = (-2..=2).all(|dy| (-2..=2).all(|dx| !mask.get(x as i64 + dx, y as i64 + dy)));
        if free {
            mask.set(x, y, true);
        }
    }
}

/// Hand silhouette with an explicit pose.
pub fn static_mask_posed(
    label: GestureLabel,
    truth: HandTruth,
    cfg: &SynthConfig,
    rng: &mut impl Rng,
) -> Mask {
    let shape = hand_shape(label, rng);
    let s = truth.radius_px / shape.radius;
    let (sn, cs) = truth.rotation_deg.to_radians().sin_cos();
    let c = truth.center;
    let mut m = Mask::new(cfg.width, cfg.height);
    let r = truth.radius_px.ceil() as i64 + 2;
    let jit = cfg.edge_jitter_px;
    for y in (c.y as i64 - r).max(0)..(c.y as i64 + r + 1).min(cfg.height as i64) {
        for x in (c.x as i64 - r).max(0)..(c.x as i64 + r + 1).min(cfg.width as i64) {
            let (mut u, mut v) = (x as f64 - c.x, c.y - y as f64);
            if u.hypot(v) > truth.radius_px {
                continue;
            }
            if jit > 0.0 {
                u += rng.random_range(-jit..=jit);
                v += rng.random_range(-jit..=jit);
            }
            let (lu, lv) = (u * cs + v * sn, -u * sn + v * cs);
            let p = (shape.center.0 + lu / s, shape.center.1 + lv / s);
            if shape.contains(p) {
                m.set(x as usize, y as usize, true);
            }
        }
    }
    m
}

/// Random hand silhouette of a static class and its pose.
pub fn static_mask(label: GestureLabel, cfg: &SynthConfig, rng: &mut impl Rng) -> (Mask, HandTruth) {
    let radius_px = rng.random_range(cfg.radius_px.0..=cfg.radius_px.1);
    let margin = radius_px + 2.0;
    let truth = HandTruth {
        center: Point::new(
            rng.random_range(margin..=cfg.width as f64 - margin),
            rng.random_range(margin..=cfg.height as f64 - margin),
        ),
        radius_px,
        rotation_deg: rng.random_range(0.0..360.0),
    };
    let mut m = static_mask_posed(label, truth, cfg, rng);
    speckle(&mut m, cfg.speckles, rng);
    (m, truth)
}

fn paint_ellipse(m: &mut Mask, c: Point, ax: f64, ay: f64, angle_deg: f64, jit: f64, rng: &mut impl Rng) {
    let (sn, cs) = angle_deg.to_radians().sin_cos();
    let r = ax.max(ay).ceil() as i64 + 2;
    for y in (c.y as i64 - r).max(0)..(c.y as i64 + r + 1).min(m.height as i64) {
        for x in (c.x as i64 - r).max(0)..(c.x as i64 + r + 1).min(m.width as i64) {
            let mut u = x as f64 - c.x;
            let mut v = c.y - y as f64;
            if jit > 0.0 {
                u += rng.random_range(-jit..=jit);
                v += rng.random_range(-jit..=jit);
            }
            let (lu, lv) = (u * cs + v * sn, -u * sn + v * cs);
            if (lu / ax).powi(2) + (lv / ay).powi(2) <= 1.0 {
                m.set(x as usize, y as usize, true);
            }
        }
    }
}

/// Contact positions (screen coordinates) of a dynamic gesture over `frames`
/// frames, with the ellipse size and orientation of each contact.
struct Contacts {
    tracks: Vec<Vec<Point>>,
    size: (f64, f64),
    angle_deg: f64,
}

fn unit(deg: f64) -> (f64, f64) {
    let (s, c) = deg.to_radians().sin_cos();
    (c, -s)
}

fn dynamic_contacts(label: GestureLabel, frames: usize, rng: &mut impl Rng) -> Contacts {
    let tip = rng.random_range(9.0..13.0);
    let heading = rng.random_range(0.0..360.0);
    let t = |k: usize| k as f64;
    match label {
        GestureLabel::Drag => {
            let speed = rng.random_range(6.0..15.0);
            let d = unit(heading);
            let p0 = Point::new(0.0, 0.0);
            Contacts {
                tracks: vec![(0..frames).map(|k| Point::new(p0.x + d.0 * speed * t(k), p0.y + d.1 * speed * t(k))).collect()],
                size: (tip, tip * rng.random_range(0.85..1.0)),
                angle_deg: heading,
            }
        }
        GestureLabel::Rotate => {
            let radius = rng.random_range(70.0..120.0);
            let rate = rng.random_range(5.0..12.0) * if rng.random_bool(0.5) { 1.0 } else { -1.0 };
            let pivot: Vec<Point> = (0..frames)
                .map(|_| Point::new(rng.random_range(-0.7..0.7), rng.random_range(-0.7..0.7)))
                .collect();
            let moving = (0..frames)
                .map(|k| {
                    let d = unit(heading + rate * t(k));
                    Point::new(radius * d.0, radius * d.1)
                })
                .collect();
            Contacts {
                tracks: vec![pivot, moving],
                size: (tip, tip),
                angle_deg: 0.0,
            }
        }
        GestureLabel::SpreadPile => {
            let r0 = rng.random_range(50.0..80.0);
            let rate = rng.random_range(4.0..10.0) * if rng.random_bool(0.5) { 1.0 } else { -1.0 };
            let tracks = (0..5)
                .map(|i| {
                    let d = unit(heading - 100.0 + 50.0 * i as f64 + rng.random_range(-8.0..8.0));
                    (0..frames).map(|k| Point::new(d.0 * (r0 + rate * t(k)), d.1 * (r0 + rate * t(k)))).collect()
                })
                .collect();
            Contacts {
                tracks,
                size: (tip, tip),
                angle_deg: 0.0,
            }
        }
        GestureLabel::Wipe => {
            let speed = rng.random_range(8.0..20.0);
            let d = unit(heading + rng.random_range(-20.0..20.0));
            Contacts {
                tracks: vec![(0..frames).map(|k| Point::new(d.0 * speed * t(k), d.1 * speed * t(k))).collect()],
                size: (rng.random_range(60.0..90.0), rng.random_range(20.0..30.0)),
                angle_deg: heading + 90.0,
            }
        }
        GestureLabel::Zoom => {
            let half = rng.random_range(30.0..70.0);
            let rate = rng.random_range(4.0..10.0) * if rng.random_bool(0.5) { 1.0 } else { -1.0 };
            let d = unit(heading);
            let tracks = [1.0, -1.0]
                .iter()
                .map(|&s| {
                    (0..frames)
                        .map(|k| {
                            let r = s * (half + rate * t(k));
                            Point::new(d.0 * r, d.1 * r)
                        })
                        .collect()
                })
                .collect();
            Contacts {
                tracks,
                size: (tip, tip),
                angle_deg: 0.0,
            }
        }
        _ => panic!("{label} is not a dynamic gesture"),
    }
}

/// The first `frames` contact images of a random dynamic gesture.
pub fn dynamic_masks(label: GestureLabel, frames: usize, cfg: &SynthConfig, rng: &mut impl Rng) -> Vec<Mask> {
    let c = dynamic_contacts(label, frames, rng);
    // Place the gesture so every contact stays inside the frame.
    let pad = c.size.0.max(c.size.1) + 4.0;
    let all = c.tracks.iter().flatten();
    let (mut lo, mut hi) = ((f64::INFINITY, f64::INFINITY), (f64::NEG_INFINITY, f64::NEG_INFINITY));
    for p in all {
        lo = (lo.0.min(p.x), lo.1.min(p.y));
        hi = (hi.0.max(p.x), hi.1.max(p.y));
    }
    let ox = rng.random_range((pad - lo.0)..=(cfg.width as f64 - pad - hi.0).max(pad - lo.0));
    let oy = rng.random_range((pad - lo.1)..=(cfg.height as f64 - pad - hi.1).max(pad - lo.1));
    (0..frames)
        .map(|k| {
            let mut m = Mask::new(cfg.width, cfg.height);
            for track in &c.tracks {
                let p = Point::new(track[k].x + ox, track[k].y + oy);
                paint_ellipse(&mut m, p, c.size.0, c.size.1, c.angle_deg, cfg.edge_jitter_px, rng);
            }
            speckle(&mut m, cfg.speckles / 4, rng);
            m
        })
        .collect()
}

/// Camera image and background frame that preprocess back to `mask`:
/// textured background, a random illumination ramp, bright contacts and noise.
pub fn render_raw(mask: &Mask, rng: &mut impl Rng) -> (GrayFrame, GrayFrame) {
    let (w, h) = (mask.width, mask.height);
    let background = GrayFrame::from_fn(w, h, |x, y| 30.0 + ((x * 13 + y * 7) % 17) as f32);
    let gx = rng.random_range(-30.0..30.0f32);
    let gy = rng.random_range(-30.0..30.0f32);
    let level = rng.random_range(100.0..130.0f32);
    let mut raw = background.clone();
    for y in 0..h {
        for x in 0..w {
            let i = y * w + x;
            let ramp = gx * (x as f32 / w as f32 - 0.5) + gy * (y as f32 / h as f32 - 0.5);
            let contact = if mask.data[i] { level } else { 0.0 };
            raw.data[i] += ramp + contact + rng.random_range(-6.0..6.0f32);
        }
    }
    (raw, background)
}
