use super::frame::Mask;
use super::GestureError;
use crate::geom::Point;

// Clockwise on screen, starting west.
const DIRS: [(i64, i64); 8] = [(-1, 0), (-1, -1), (0, -1), (1, -1), (1, 0), (1, 1), (0, 1), (-1, 1)];

fn dir_index(from: (i64, i64), to: (i64, i64)) -> usize {
    let d = (to.0 - from.0, to.1 - from.1);
    DIRS.iter().position(|&e| e == d).expect("backtrack is always a neighbour")
}

/// Outer boundary of the component holding the first set pixel in raster
/// order, by Moore-neighbour tracing with Jacob's stopping rule.
///
/// Pixels are returned as pixel-centre coordinates in trace order.
pub fn trace_contour(mask: &Mask) -> Result<Vec<Point>, GestureError> {
    let start = mask.pixels().next().ok_or(GestureError::EmptyMask)?;
    let start = (start.0 as i64, start.1 as i64);
    let step = |p: (i64, i64), b: (i64, i64)| -> Option<((i64, i64), (i64, i64))> {
        let k0 = dir_index(p, b);
        let mut prev = b;
        for k in 1..=8 {
            let d = DIRS[(k0 + k) % 8];
            let q = (p.0 + d.0, p.1 + d.1);
            if mask.get(q.0, q.1) {
                return Some((q, prev));
            }
            prev = q;
        }
        None
    };
    let b0 = (start.0 - 1, start.1);
    let Some(first) = step(start, b0) else {
        return Ok(vec![Point::new(start.0 as f64, start.1 as f64)]);
    };
    let mut out = vec![start];
    let mut cur = first;
    let limit = 4 * mask.width * mask.height + 8;
    while out.len() <= limit {
        let next = step(cur.0, cur.1).expect("a traced pixel has a set neighbour");
        if cur.0 == start && next.0 == first.0 {
            break;
        }
        out.push(cur.0);
        cur = next;
    }
    Ok(out.into_iter().map(|(x, y)| Point::new(x as f64, y as f64)).collect())
}

/// Shoelace area; positive when the polygon runs counter-clockwise in its own
/// coordinate system.
pub fn signed_area(points: &[Point]) -> f64 {
    let n = points.len();
    (0..n)
        .map(|i| {
            let (a, b) = (points[i], points[(i + 1) % n]);
            a.x * b.y - b.x * a.y
        })
        .sum::<f64>()
        / 2.0
}
