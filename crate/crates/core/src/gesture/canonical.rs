use serde::{Deserialize, Serialize};

use super::circle::{min_enclosing_circle, Circle};
use super::contour::trace_contour;
use super::frame::Mask;
use super::GestureError;
use crate::geom::Point;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CanonicalConfig {
    /// Contour points this close to the bounding circle may belong to the wrist.
    pub wrist_tolerance_px: f64,
    pub min_wrist_arc_deg: f64,
    /// Empty border around the rotated hand.
    pub margin_px: usize,
    /// Extra band above the wrist chord that is cut away with the wrist.
    pub wrist_cut_px: f64,
}

impl Default for CanonicalConfig {
    fn default() -> Self {
        Self {
            wrist_tolerance_px: 2.0,
            min_wrist_arc_deg: 15.0,
            margin_px: 4,
            wrist_cut_px: 2.0,
        }
    }
}

/// The table edge the hand is aligned against.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum ReferenceEdge {
    #[default]
    Bottom,
}

/// A detected hand: outline, bounding circle and wrist.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HandPose {
    pub contour: Vec<Point>,
    pub circle: Circle,
    /// First contour index of the wrist arc and its length in points.
    pub wrist_start: usize,
    pub wrist_len: usize,
    pub wrist_arc_deg: f64,
    /// Point on the circle halfway along the wrist arc.
    pub wrist_mid: Point,
    /// Counter-clockwise rotation that brings the wrist-to-centre line
    /// perpendicular to the reference edge, in [0, 360).
    pub theta_deg: f64,
    pub reference_edge: ReferenceEdge,
}

/// Visual angle in degrees of `p` about `c`; screen y points down.
fn visual_angle(c: Point, p: Point) -> f64 {
    (c.y - p.y).atan2(p.x - c.x).to_degrees()
}

fn wrap180(a: f64) -> f64 {
    (a + 180.0).rem_euclid(360.0) - 180.0
}

/// Find the bounding circle and wrist arc of the hand in `mask`.
pub fn detect_pose(mask: &Mask, cfg: &CanonicalConfig) -> Result<HandPose, GestureError> {
    let contour = trace_contour(mask)?;
    let circle = min_enclosing_circle(&contour)?;
    let n = contour.len();
    let near: Vec<bool> = contour
        .iter()
        .map(|&p| (circle.center.distance(p) - circle.radius).abs() <= cfg.wrist_tolerance_px)
        .collect();
    if near.iter().all(|&v| v) || n < 3 {
        return Err(GestureError::WristNotFound);
    }
    // Walk runs starting just after a gap so runs never wrap mid-way.
    let origin = (0..n).find(|&i| !near[i]).ok_or(GestureError::WristNotFound)?;
    let mut best: Option<(usize, usize, f64, f64)> = None;
    let mut k = 0;
    while k < n {
        let i = (origin + k) % n;
        if !near[i] {
            k += 1;
            continue;
        }
        let start = i;
        let a0 = visual_angle(circle.center, contour[start]);
        let (mut sweep, mut len, mut prev) = (0.0, 1, a0);
        k += 1;
        while k < n && near[(origin + k) % n] {
            let a = visual_angle(circle.center, contour[(origin + k) % n]);
            sweep += wrap180(a - prev);
            prev = a;
            len += 1;
            k += 1;
        }
        if best.is_none_or(|b| sweep.abs() > b.2.abs()) {
            best = Some((start, len, sweep, a0));
        }
    }
    let (wrist_start, wrist_len, sweep, a0) = best.ok_or(GestureError::WristNotFound)?;
    if sweep.abs() < cfg.min_wrist_arc_deg {
        return Err(GestureError::WristNotFound);
    }
    let mid = (a0 + sweep / 2.0).to_radians();
    let wrist_mid = Point::new(
        circle.center.x + circle.radius * mid.cos(),
        circle.center.y - circle.radius * mid.sin(),
    );
    let phi = visual_angle(wrist_mid, circle.center);
    let theta_deg = (90.0 - phi).rem_euclid(360.0);
    Ok(HandPose {
        contour,
        circle,
        wrist_start,
        wrist_len,
        wrist_arc_deg: sweep.abs(),
        wrist_mid,
        theta_deg: if theta_deg >= 360.0 { 0.0 } else { theta_deg },
        reference_edge: ReferenceEdge::Bottom,
    })
}

/// A hand rotated into the canonical upright pose.
#[derive(Clone, Debug, PartialEq)]
pub struct Canonical {
    pub pose: HandPose,
    /// The whole silhouette rotated by theta about the circle centre, which
    /// sits at the canvas centre.
    pub rotated: Mask,
    /// `rotated` with the wrist cut away.
    pub hand: Mask,
}

/// Rotate `mask` counter-clockwise by `theta_deg` about `center` into a square
/// canvas of side `side` centred on `center` (nearest-neighbour sampling).
pub fn rotate_about(mask: &Mask, center: Point, theta_deg: f64, side: usize) -> Mask {
    let (s, c) = theta_deg.to_radians().sin_cos();
    let half = (side as f64 - 1.0) / 2.0;
    Mask::from_fn(side, side, |i, j| {
        let (u, v) = (i as f64 - half, half - j as f64);
        let (su, sv) = (u * c + v * s, -u * s + v * c);
        mask.get((center.x + su).round() as i64, (center.y - sv).round() as i64)
    })
}

pub fn canonicalize(mask: &Mask, cfg: &CanonicalConfig) -> Result<Canonical, GestureError> {
    let hand_only = mask.largest_component();
    let pose = detect_pose(&hand_only, cfg)?;
    let r = pose.circle.radius;
    let side = 2 * (r.ceil() as usize + cfg.margin_px) + 1;
    let rotated = rotate_about(&hand_only, pose.circle.center, pose.theta_deg, side);
    let half = (side as f64 - 1.0) / 2.0;
    let chord = -r * (pose.wrist_arc_deg.to_radians() / 2.0).cos() + cfg.wrist_cut_px;
    let mut cut = rotated.clone();
    for j in 0..side {
        if half - j as f64 <= chord {
            cut.data[j * side..(j + 1) * side].fill(false);
        }
    }
    let hand = cut.largest_component();
    if hand.is_empty() {
        return Err(GestureError::WristNotFound);
    }
    Ok(Canonical { pose, rotated, hand })
}
