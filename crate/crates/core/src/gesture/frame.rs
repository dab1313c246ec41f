use std::io::{BufRead, Write};
use std::path::Path;

use serde::Serialize;

use super::GestureError;
use crate::geom::Point;

pub const DEFAULT_WIDTH: usize = 640;
pub const DEFAULT_HEIGHT: usize = 480;

/// Grey-level camera image, row-major, values nominally in 0..=255.
#[derive(Clone, Debug, PartialEq)]
pub struct GrayFrame {
    pub width: usize,
    pub height: usize,
    pub data: Vec<f32>,
}

impl GrayFrame {
    pub fn new(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            data: vec![0.0; width * height],
        }
    }

    pub fn from_fn(width: usize, height: usize, f: impl Fn(usize, usize) -> f32) -> Self {
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Self { width, height, data }
    }

    pub fn get(&self, x: usize, y: usize) -> f32 {
        self.data[y * self.width + x]
    }

    pub fn load_pgm(path: impl AsRef<Path>) -> Result<Self, GestureError> {
        let img = image::open(path.as_ref()).map_err(|e| GestureError::Io(format!("{}: {e}", path.as_ref().display())))?;
        let g = img.to_luma8();
        Ok(Self {
            width: g.width() as usize,
            height: g.height() as usize,
            data: g.into_raw().into_iter().map(f32::from).collect(),
        })
    }

    pub fn save_pgm(&self, path: impl AsRef<Path>) -> Result<(), GestureError> {
        let bytes = self.data.iter().map(|v| v.round().clamp(0.0, 255.0) as u8).collect();
        save_luma(path.as_ref(), self.width, self.height, bytes)
    }
}

fn save_luma(path: &Path, width: usize, height: usize, bytes: Vec<u8>) -> Result<(), GestureError> {
    use image::codecs::pnm::{PnmEncoder, PnmSubtype, SampleEncoding};
    use image::ImageEncoder;
    if bytes.len() != width * height {
        return Err(GestureError::Io("image buffer size mismatch".into()));
    }
    let io = |e: String| GestureError::Io(format!("{}: {e}", path.display()));
    let f = std::fs::File::create(path).map_err(|e| io(e.to_string()))?;
    let mut w = std::io::BufWriter::new(f);
    PnmEncoder::new(&mut w)
        .with_subtype(PnmSubtype::Graymap(SampleEncoding::Binary))
        .write_image(&bytes, width as u32, height as u32, image::ExtendedColorType::L8)
        .map_err(|e| io(e.to_string()))?;
    w.flush().map_err(|e| io(e.to_string()))
}

/// Binary occupancy image.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Mask {
    pub width: usize,
    pub height: usize,
    pub data: Vec<bool>,
}

impl Mask {
    pub fn new(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            data: vec![false; width * height],
        }
    }

    pub fn from_fn(width: usize, height: usize, f: impl Fn(usize, usize) -> bool) -> Self {
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Self { width, height, data }
    }

    /// Occupancy at signed coordinates; outside the image is empty.
    pub fn get(&self, x: i64, y: i64) -> bool {
        x >= 0 && y >= 0 && (x as usize) < self.width && (y as usize) < self.height && self.data[y as usize * self.width + x as usize]
    }

    pub fn set(&mut self, x: usize, y: usize, v: bool) {
        self.data[y * self.width + x] = v;
    }

    pub fn count(&self) -> usize {
        self.data.iter().filter(|&&v| v).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.data.iter().any(|&v| v)
    }

    /// Coordinates of set pixels in raster order.
    pub fn pixels(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.data
            .iter()
            .enumerate()
            .filter(|(_, &v)| v)
            .map(|(i, _)| (i % self.width, i / self.width))
    }

    /// Intersection over union; two empty masks count as identical.
    pub fn iou(&self, other: &Mask) -> f64 {
        let (mut inter, mut union) = (0usize, 0usize);
        for (&a, &b) in self.data.iter().zip(&other.data) {
            inter += (a && b) as usize;
            union += (a || b) as usize;
        }
        if union == 0 {
            1.0
        } else {
            inter as f64 / union as f64
        }
    }

    pub fn load_pgm(path: impl AsRef<Path>) -> Result<Self, GestureError> {
        let g = GrayFrame::load_pgm(path)?;
        Ok(Self {
            width: g.width,
            height: g.height,
            data: g.data.iter().map(|&v| v >= 128.0).collect(),
        })
    }

    pub fn save_pgm(&self, path: impl AsRef<Path>) -> Result<(), GestureError> {
        let bytes = self.data.iter().map(|&v| if v { 255 } else { 0 }).collect();
        save_luma(path.as_ref(), self.width, self.height, bytes)
    }

    /// Run-length CSV: a `width,height` line, then one `y,x_start,x_end` line
    /// per horizontal run with `x_end` exclusive.
    pub fn write_runs(&self, mut w: impl Write) -> std::io::Result<()> {
        writeln!(w, "width,height")?;
        writeln!(w, "{},{}", self.width, self.height)?;
        writeln!(w, "y,x_start,x_end")?;
        for y in 0..self.height {
            let row = &self.data[y * self.width..(y + 1) * self.width];
            let mut x = 0;
            while x < self.width {
                if row[x] {
                    let s = x;
                    while x < self.width && row[x] {
                        x += 1;
                    }
                    writeln!(w, "{y},{s},{x}")?;
                } else {
                    x += 1;
                }
            }
        }
        Ok(())
    }

    pub fn read_runs(r: impl BufRead) -> Result<Self, GestureError> {
        let bad = |m: String| GestureError::Corpus(m);
        let mut lines = r.lines().map(|l| l.map_err(|e| GestureError::Io(e.to_string())));
        let mut next = |what: &str| -> Result<String, GestureError> {
            lines.next().ok_or_else(|| bad(format!("mask file ends before {what}")))?
        };
        if next("size header")?.trim() != "width,height" {
            return Err(bad("mask file must start with 'width,height'".into()));
        }
        let size = next("size")?;
        let dims: Vec<usize> = size
            .trim()
            .split(',')
            .map(|f| f.parse())
            .collect::<Result<_, _>>()
            .map_err(|_| bad(format!("bad mask size line {size:?}")))?;
        let [w, h] = dims[..] else {
            return Err(bad(format!("bad mask size line {size:?}")));
        };
        if next("run header")?.trim() != "y,x_start,x_end" {
            return Err(bad("missing 'y,x_start,x_end' header".into()));
        }
        let mut m = Mask::new(w, h);
        for (n, line) in lines.enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let v: Vec<usize> = line
                .trim()
                .split(',')
                .map(|f| f.parse())
                .collect::<Result<_, _>>()
                .map_err(|_| bad(format!("bad run on line {}", n + 4)))?;
            match v[..] {
                [y, s, e] if y < h && s < e && e <= w => m.data[y * w + s..y * w + e].fill(true),
                _ => return Err(bad(format!("run out of range on line {}", n + 4))),
            }
        }
        Ok(m)
    }

    pub fn save_runs(&self, path: impl AsRef<Path>) -> Result<(), GestureError> {
        let f = std::fs::File::create(path.as_ref()).map_err(|e| GestureError::Io(e.to_string()))?;
        let mut w = std::io::BufWriter::new(f);
        self.write_runs(&mut w).map_err(|e| GestureError::Io(e.to_string()))?;
        w.flush().map_err(|e| GestureError::Io(e.to_string()))
    }

    pub fn load_runs(path: impl AsRef<Path>) -> Result<Self, GestureError> {
        let f = std::fs::File::open(path.as_ref()).map_err(|e| GestureError::Io(format!("{}: {e}", path.as_ref().display())))?;
        Self::read_runs(std::io::BufReader::new(f))
    }

    /// Load by extension: `.pgm` images or run-length `.csv`.
    pub fn load(path: impl AsRef<Path>) -> Result<Self, GestureError> {
        match path.as_ref().extension().and_then(|e| e.to_str()) {
            Some("csv") => Self::load_runs(path),
            _ => Self::load_pgm(path),
        }
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), GestureError> {
        match path.as_ref().extension().and_then(|e| e.to_str()) {
            Some("csv") => self.save_runs(path),
            _ => self.save_pgm(path),
        }
    }

    /// 8-connected components.
    pub fn components(&self) -> Components {
        label_components(self)
    }

    /// Only the largest 8-connected component; ties go to the one found first.
    pub fn largest_component(&self) -> Mask {
        let c = self.components();
        match c.blobs.first() {
            Some(b) => c.mask_of(b.label, self.width, self.height),
            None => Mask::new(self.width, self.height),
        }
    }
}

/// Summary statistics of one connected component.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Blob {
    pub label: u32,
    pub area: usize,
    /// Pixel-centre mean in image coordinates.
    pub centroid: Point,
    /// Principal-axis angle in degrees, counter-clockwise on screen, in [0, 180).
    pub orientation_deg: f64,
    /// Major over minor second-moment eigenvalue; 1 for isotropic blobs.
    pub elongation: f64,
}

#[derive(Clone, Debug)]
pub struct Components {
    /// 0 for background, otherwise the component label.
    pub labels: Vec<u32>,
    /// Sorted by descending area, then by first raster position.
    pub blobs: Vec<Blob>,
}

impl Components {
    pub fn mask_of(&self, label: u32, width: usize, height: usize) -> Mask {
        Mask {
            width,
            height,
            data: self.labels.iter().map(|&l| l == label).collect(),
        }
    }
}

fn label_components(mask: &Mask) -> Components {
    let (w, h) = (mask.width, mask.height);
    let mut labels = vec![0u32; w * h];
    let mut blobs = Vec::new();
    let mut stack = Vec::new();
    let mut next = 1u32;
    for start in 0..w * h {
        if !mask.data[start] || labels[start] != 0 {
            continue;
        }
        labels[start] = next;
        stack.push(start);
        let (mut n, mut sx, mut sy, mut sxx, mut syy, mut sxy) = (0usize, 0.0, 0.0, 0.0, 0.0, 0.0);
        while let Some(i) = stack.pop() {
            let (x, y) = ((i % w) as f64, (i / w) as f64);
            n += 1;
            sx += x;
            sy += y;
            sxx += x * x;
            syy += y * y;
            sxy += x * y;
            let (xi, yi) = ((i % w) as i64, (i / w) as i64);
            for dy in -1..=1 {
                for dx in -1..=1 {
                    let (nx, ny) = (xi + dx, yi + dy);
                    if nx < 0 || ny < 0 || nx >= w as i64 || ny >= h as i64 {
                        continue;
                    }
                    let j = ny as usize * w + nx as usize;
                    if mask.data[j] && labels[j] == 0 {
                        labels[j] = next;
                        stack.push(j);
                    }
                }
            }
        }
        let nf = n as f64;
        let (mx, my) = (sx / nf, sy / nf);
        let mu20 = sxx / nf - mx * mx;
        let mu02 = syy / nf - my * my;
        // Screen y points down, so the visual mixed moment changes sign.
        let mu11 = -(sxy / nf - mx * my);
        let angle = (0.5 * (2.0 * mu11).atan2(mu20 - mu02)).to_degrees().rem_euclid(180.0);
        let common = ((mu20 - mu02).powi(2) + 4.0 * mu11 * mu11).sqrt();
        let (l1, l2) = ((mu20 + mu02 + common) / 2.0, (mu20 + mu02 - common) / 2.0);
        blobs.push(Blob {
            label: next,
            area: n,
            centroid: Point::new(mx, my),
            orientation_deg: angle,
            elongation: if l2 > 1e-12 { l1 / l2 } else if l1 > 1e-12 { f64::INFINITY } else { 1.0 },
        });
        next += 1;
    }
    blobs.sort_by(|a, b| b.area.cmp(&a.area).then(a.label.cmp(&b.label)));
    Components { labels, blobs }
}

/// A thresholded contact image with its blobs.
#[derive(Clone, Debug, PartialEq)]
pub struct ContactFrame {
    /// Largest contact region only.
    pub mask: Mask,
    /// Every contact region above the minimum area, largest first.
    pub blobs: Vec<Blob>,
    pub timestamp: f64,
}

impl ContactFrame {
    /// Build a frame from an already binary image.
    pub fn from_mask(mask: &Mask, min_area: usize, timestamp: f64) -> Self {
        let c = mask.components();
        let blobs: Vec<Blob> = c.blobs.iter().copied().filter(|b| b.area >= min_area).collect();
        let largest = match blobs.first() {
            Some(b) => c.mask_of(b.label, mask.width, mask.height),
            None => Mask::new(mask.width, mask.height),
        };
        Self {
            mask: largest,
            blobs,
            timestamp,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn disc(w: usize, h: usize, cx: f64, cy: f64, r: f64) -> Mask {
        Mask::from_fn(w, h, |x, y| (x as f64 - cx).hypot(y as f64 - cy) <= r)
    }

    #[test]
    fn components_are_sorted_by_area() {
        let mut m = disc(80, 60, 20.0, 20.0, 8.0);
        let small = disc(80, 60, 60.0, 40.0, 4.0);
        for (i, v) in small.data.iter().enumerate() {
            m.data[i] |= v;
        }
        let c = m.components();
        assert_eq!(c.blobs.len(), 2);
        assert!(c.blobs[0].area > c.blobs[1].area);
        assert!((c.blobs[0].centroid.x - 20.0).abs() < 1e-9);
        assert_eq!(m.largest_component().count(), c.blobs[0].area);
    }

    #[test]
    fn diagonal_pixels_are_connected() {
        let mut m = Mask::new(4, 4);
        m.set(0, 0, true);
        m.set(1, 1, true);
        m.set(2, 2, true);
        assert_eq!(m.components().blobs.len(), 1);
    }

    #[test]
    fn orientation_of_a_rising_bar() {
        // Pixels along y = -x on screen rise to the right visually: 45 degrees.
        let mut m = Mask::new(20, 20);
        for k in 0..15 {
            m.set(2 + k, 17 - k, true);
        }
        let b = m.components().blobs[0];
        assert!((b.orientation_deg - 45.0).abs() < 1e-9, "{}", b.orientation_deg);
        assert!(b.elongation > 100.0);
    }

    #[test]
    fn run_length_round_trip() {
        let m = disc(31, 17, 12.3, 8.1, 6.5);
        let mut buf = Vec::new();
        m.write_runs(&mut buf).unwrap();
        assert_eq!(Mask::read_runs(buf.as_slice()).unwrap(), m);
    }

    #[test]
    fn run_length_rejects_out_of_range() {
        let text = "width,height\n4,4\ny,x_start,x_end\n1,2,9\n";
        assert!(Mask::read_runs(text.as_bytes()).is_err());
    }

    #[test]
    fn pgm_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let m = disc(40, 30, 20.0, 15.0, 9.0);
        let p = dir.path().join("m.pgm");
        m.save_pgm(&p).unwrap();
        assert_eq!(Mask::load_pgm(&p).unwrap(), m);
        let head = std::fs::read(&p).unwrap();
        assert_eq!(&head[..2], b"P5");
    }
}
