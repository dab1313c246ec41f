//! Elliptic Fourier analysis of closed contours (Kuhl and Giardina).

use std::f64::consts::PI;

use super::contour::signed_area;
use super::GestureError;
use crate::geom::Point;

/// Raw harmonic coefficients `[a_n, b_n, c_n, d_n]` for n = 1..=H.
#[derive(Clone, Debug, PartialEq)]
pub struct EfdCoefficients {
    pub a0: f64,
    pub c0: f64,
    pub harmonics: Vec<[f64; 4]>,
    pub perimeter: f64,
}

/// Drop repeated consecutive points, including a closing duplicate.
fn dedup_closed(points: &[Point]) -> Vec<Point> {
    let mut out: Vec<Point> = Vec::with_capacity(points.len());
    for &p in points {
        if out.last().is_none_or(|q| q.distance(p) > 0.0) {
            out.push(p);
        }
    }
    while out.len() > 1 && out[0].distance(out[out.len() - 1]) == 0.0 {
        out.pop();
    }
    out
}

pub fn efd_coefficients(contour: &[Point], harmonics: usize) -> Result<EfdCoefficients, GestureError> {
    let pts = dedup_closed(contour);
    if pts.len() < 3 {
        return Err(GestureError::Degenerate("contour needs at least three distinct points".into()));
    }
    let n = pts.len();
    let mut dx = Vec::with_capacity(n);
    let mut dy = Vec::with_capacity(n);
    let mut t = Vec::with_capacity(n + 1);
    t.push(0.0);
    for i in 0..n {
        let (p, q) = (pts[i], pts[(i + 1) % n]);
        dx.push(q.x - p.x);
        dy.push(q.y - p.y);
        t.push(t[i] + p.distance(q));
    }
    let period = t[n];
    if !(period > 0.0) {
        return Err(GestureError::Degenerate("zero perimeter".into()));
    }

    let mut a0 = 0.0;
    let mut c0 = 0.0;
    for i in 0..n {
        let (p, q) = (pts[i], pts[(i + 1) % n]);
        let dt = t[i + 1] - t[i];
        a0 += dt * (p.x + q.x) / 2.0;
        c0 += dt * (p.y + q.y) / 2.0;
    }

    let mut out = Vec::with_capacity(harmonics);
    for h in 1..=harmonics {
        let k = 2.0 * h as f64 * PI / period;
        let scale = period / (2.0 * (h * h) as f64 * PI * PI);
        let mut coef = [0.0; 4];
        for i in 0..n {
            let dt = t[i + 1] - t[i];
            let (c1, c0_) = ((k * t[i + 1]).cos(), (k * t[i]).cos());
            let (s1, s0) = ((k * t[i + 1]).sin(), (k * t[i]).sin());
            coef[0] += dx[i] / dt * (c1 - c0_);
            coef[1] += dx[i] / dt * (s1 - s0);
            coef[2] += dy[i] / dt * (c1 - c0_);
            coef[3] += dy[i] / dt * (s1 - s0);
        }
        out.push(coef.map(|c| c * scale));
    }
    Ok(EfdCoefficients {
        a0: a0 / period,
        c0: c0 / period,
        harmonics: out,
        perimeter: period,
    })
}

/// Points of the truncated series at arc-length parameters `t`.
pub fn reconstruct(coeffs: &EfdCoefficients, harmonics: usize, t: &[f64]) -> Vec<Point> {
    let period = coeffs.perimeter;
    t.iter()
        .map(|&s| {
            let (mut x, mut y) = (coeffs.a0, coeffs.c0);
            for (h, c) in coeffs.harmonics.iter().take(harmonics).enumerate() {
                let arg = 2.0 * (h + 1) as f64 * PI * s / period;
                let (sn, cs) = arg.sin_cos();
                x += c[0] * cs + c[1] * sn;
                y += c[2] * cs + c[3] * sn;
            }
            Point::new(x, y)
        })
        .collect()
}

/// Normalise raw coefficients for position, size, rotation and start point.
///
/// The start point is moved to the major axis of the first-harmonic ellipse
/// and the ellipse is rotated onto the x axis, so that `a_1 = 1` and
/// `b_1 = c_1 = 0`. The leftover half-turn ambiguity flips the sign of every
/// even harmonic; it is resolved by making the even coefficient of largest
/// magnitude positive.
pub fn normalize(coeffs: &EfdCoefficients) -> Result<Vec<f64>, GestureError> {
    let h = &coeffs.harmonics;
    let Some(&[a1, b1, c1, d1]) = h.first() else {
        return Err(GestureError::Degenerate("no harmonics".into()));
    };
    let theta1 = 0.5 * (2.0 * (a1 * b1 + c1 * d1)).atan2(a1 * a1 + c1 * c1 - b1 * b1 - d1 * d1);
    let shifted: Vec<[f64; 4]> = h
        .iter()
        .enumerate()
        .map(|(k, &[a, b, c, d])| {
            let (s, co) = ((k + 1) as f64 * theta1).sin_cos();
            [a * co + b * s, -a * s + b * co, c * co + d * s, -c * s + d * co]
        })
        .collect();
    let [a1s, _, c1s, _] = shifted[0];
    let psi = c1s.atan2(a1s);
    let size = a1s.hypot(c1s);
    if !(size > 1e-12) {
        return Err(GestureError::Degenerate("first harmonic vanishes".into()));
    }
    let (s, co) = psi.sin_cos();
    let mut flat: Vec<f64> = Vec::with_capacity(4 * h.len());
    for &[a, b, c, d] in &shifted {
        flat.extend([
            (co * a + s * c) / size,
            (co * b + s * d) / size,
            (-s * a + co * c) / size,
            (-s * b + co * d) / size,
        ]);
    }
    let even = flat
        .chunks(4)
        .enumerate()
        .filter(|(k, _)| (k + 1) % 2 == 0)
        .flat_map(|(_, c)| c.iter().copied())
        .max_by(|x, y| x.abs().total_cmp(&y.abs()));
    if even.is_some_and(|v| v < 0.0) {
        for (k, c) in flat.chunks_mut(4).enumerate() {
            if (k + 1) % 2 == 0 {
                c.iter_mut().for_each(|v| *v = -*v);
            }
        }
    }
    Ok(flat)
}

/// Normalised descriptor of `contour` with `harmonics` harmonics (4 values each).
///
/// Contours are first brought to a common orientation, so tracing direction
/// does not matter.
pub fn efd(contour: &[Point], harmonics: usize) -> Result<Vec<f64>, GestureError> {
    let mut pts = contour.to_vec();
    if signed_area(&pts) < 0.0 {
        pts.reverse();
    }
    normalize(&efd_coefficients(&pts, harmonics)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn polygon(n: usize, f: impl Fn(f64) -> (f64, f64)) -> Vec<Point> {
        (0..n)
            .map(|i| {
                let (x, y) = f(2.0 * PI * i as f64 / n as f64);
                Point::new(x, y)
            })
            .collect()
    }

    fn blob(a: f64) -> (f64, f64) {
        let r = 1.0 + 0.3 * (2.0 * a).cos() + 0.15 * (3.0 * a + 0.4).sin() + 0.05 * (5.0 * a).cos();
        (1.6 * r * a.cos(), r * a.sin())
    }

    #[test]
    fn circle_spectrum() {
        let c = polygon(720, |a| (5.0 + 30.0 * a.cos(), -2.0 + 30.0 * a.sin()));
        let e = efd_coefficients(&c, 10).unwrap();
        let m1 = e.harmonics[0].iter().map(|v| v * v).sum::<f64>().sqrt();
        for h in &e.harmonics[1..] {
            let m = h.iter().map(|v| v * v).sum::<f64>().sqrt();
            assert!(m < 1e-6 * m1, "{m}");
        }
        assert!((e.a0 - 5.0).abs() < 1e-9 && (e.c0 + 2.0).abs() < 1e-9);
    }

    #[test]
    fn normalised_first_harmonic_is_canonical() {
        let d = efd(&polygon(400, blob), 8).unwrap();
        assert!((d[0] - 1.0).abs() < 1e-12);
        assert!(d[1].abs() < 1e-9 && d[2].abs() < 1e-9);
        assert_eq!(d.len(), 32);
    }

    #[test]
    fn invariant_to_similarity_and_start_point() {
        let base = polygon(400, blob);
        let d0 = efd(&base, 10).unwrap();
        let (s, c) = 1.234f64.sin_cos();
        let mut moved: Vec<Point> = base
            .iter()
            .map(|p| Point::new(40.0 + 2.5 * (c * p.x - s * p.y), -7.0 + 2.5 * (s * p.x + c * p.y)))
            .collect();
        moved.rotate_left(137);
        let d1 = efd(&moved, 10).unwrap();
        let dist: f64 = d0.iter().zip(&d1).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        assert!(dist < 1e-9, "{dist}");
        moved.reverse();
        let d2 = efd(&moved, 10).unwrap();
        let dist: f64 = d0.iter().zip(&d2).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        assert!(dist < 1e-9, "{dist}");
    }

    #[test]
    fn reconstruction_error_shrinks_with_harmonics() {
        let pts = polygon(60, blob);
        let e = efd_coefficients(&pts, 25).unwrap();
        // Dense samples of the polygon itself, uniformly in arc length.
        let n = pts.len();
        let m = 4096;
        let mut edges = Vec::new();
        let mut acc = 0.0;
        for i in 0..n {
            let len = pts[i].distance(pts[(i + 1) % n]);
            edges.push((acc, len, pts[i], pts[(i + 1) % n]));
            acc += len;
        }
        let ts: Vec<f64> = (0..m).map(|k| acc * k as f64 / m as f64).collect();
        let truth: Vec<Point> = ts
            .iter()
            .map(|&s| {
                let &(t0, len, p, q) = edges.iter().rev().find(|e| e.0 <= s).unwrap();
                let f = (s - t0) / len;
                Point::new(p.x + f * (q.x - p.x), p.y + f * (q.y - p.y))
            })
            .collect();
        let mut last = f64::INFINITY;
        for h in 1..=25 {
            let rec = reconstruct(&e, h, &ts);
            let err = (truth.iter().zip(&rec).map(|(a, b)| a.distance(*b).powi(2)).sum::<f64>() / m as f64).sqrt();
            assert!(err <= last * (1.0 + 1e-9), "H={h}: {err} > {last}");
            last = err;
        }
        assert!(last < 0.02);
    }

    #[test]
    fn degenerate_contours() {
        let line = [Point::new(0.0, 0.0), Point::new(1.0, 0.0)];
        assert!(matches!(efd(&line, 4), Err(GestureError::Degenerate(_))));
        let same = [Point::new(1.0, 1.0); 5];
        assert!(matches!(efd(&same, 4), Err(GestureError::Degenerate(_))));
    }
}
