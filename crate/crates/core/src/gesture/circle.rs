use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::GestureError;
use crate::geom::Point;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Circle {
    pub center: Point,
    pub radius: f64,
}

impl Circle {
    fn contains(&self, p: Point) -> bool {
        self.center.distance(p) <= self.radius * (1.0 + 1e-12) + 1e-9
    }

    fn from_two(a: Point, b: Point) -> Self {
        let center = Point::new((a.x + b.x) / 2.0, (a.y + b.y) / 2.0);
        Self {
            center,
            radius: a.distance(b) / 2.0,
        }
    }

    /// Circumcircle, or `None` for collinear points.
    fn from_three(a: Point, b: Point, c: Point) -> Option<Self> {
        let (bx, by) = (b.x - a.x, b.y - a.y);
        let (cx, cy) = (c.x - a.x, c.y - a.y);
        let d = 2.0 * (bx * cy - by * cx);
        let scale = (bx * bx + by * by).max(cx * cx + cy * cy);
        if d.abs() <= 1e-12 * scale {
            return None;
        }
        let (b2, c2) = (bx * bx + by * by, cx * cx + cy * cy);
        let ux = (cy * b2 - by * c2) / d;
        let uy = (bx * c2 - cx * b2) / d;
        let center = Point::new(a.x + ux, a.y + uy);
        Some(Self {
            center,
            radius: ux.hypot(uy),
        })
    }

    fn through_three(a: Point, b: Point, c: Point) -> Self {
        Self::from_three(a, b, c).unwrap_or_else(|| {
            [Self::from_two(a, b), Self::from_two(a, c), Self::from_two(b, c)]
                .into_iter()
                .max_by(|x, y| x.radius.total_cmp(&y.radius))
                .unwrap()
        })
    }
}

/// Smallest circle enclosing `points` (Welzl, iterative form, with a fixed
/// shuffle so results are reproducible).
pub fn min_enclosing_circle(points: &[Point]) -> Result<Circle, GestureError> {
    if points.is_empty() {
        return Err(GestureError::EmptyMask);
    }
    let mut p = points.to_vec();
    p.shuffle(&mut ChaCha8Rng::seed_from_u64(0x5eed));
    let mut c = Circle {
        center: p[0],
        radius: 0.0,
    };
    for i in 1..p.len() {
        if c.contains(p[i]) {
            continue;
        }
        c = Circle {
            center: p[i],
            radius: 0.0,
        };
        for j in 0..i {
            if c.contains(p[j]) {
                continue;
            }
            c = Circle::from_two(p[i], p[j]);
            for k in 0..j {
                if !c.contains(p[k]) {
                    c = Circle::through_three(p[i], p[j], p[k]);
                }
            }
        }
    }
    Ok(c)
}

/// Exhaustive search over every 2- and 3-point candidate circle. O(n^4).
pub fn brute_force_circle(points: &[Point]) -> Option<Circle> {
    let n = points.len();
    if n == 0 {
        return None;
    }
    if n == 1 {
        return Some(Circle {
            center: points[0],
            radius: 0.0,
        });
    }
    let encloses = |c: &Circle| points.iter().all(|&p| c.center.distance(p) <= c.radius * (1.0 + 1e-9) + 1e-9);
    let mut best: Option<Circle> = None;
    let mut consider = |c: Circle| {
        if encloses(&c) && best.is_none_or(|b| c.radius < b.radius) {
            best = Some(c);
        }
    };
    for i in 0..n {
        for j in i + 1..n {
            consider(Circle::from_two(points[i], points[j]));
            for k in j + 1..n {
                if let Some(c) = Circle::from_three(points[i], points[j], points[k]) {
                    consider(c);
                }
            }
        }
    }
    best
}
