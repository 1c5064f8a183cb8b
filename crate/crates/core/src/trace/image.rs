//! 8-bit RGB images, binary PPM output, and 2D scalar-field visualization.

use crate::error::{Error, Result};
use crate::math::{Aabb, Vec2};
use std::io::Write;
use std::path::Path;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Image {
    pub width: u32,
    pub height: u32,
    pub pixels: Vec<[u8; 3]>,
}

impl Image {
    pub fn new(width: u32, height: u32) -> Self {
        Image {
            width,
            height,
            pixels: vec![[0, 0, 0]; (width * height) as usize],
        }
    }

    pub fn set(&mut self, x: u32, y: u32, rgb: [u8; 3]) {
        self.pixels[(y * self.width + x) as usize] = rgb;
    }

    pub fn get(&self, x: u32, y: u32) -> [u8; 3] {
        self.pixels[(y * self.width + x) as usize]
    }

    /// Writes binary PPM (P6, 8-bit). The optional comment goes into the
    /// header, which PPM readers skip; it carries the manifest reference.
    pub fn write_ppm(&self, path: &Path, comment: Option<&str>) -> Result<()> {
        let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
        w.write_all(b"P6\n")?;
        if let Some(c) = comment {
            for line in c.lines() {
                writeln!(w, "# {line}")?;
            }
        }
        writeln!(w, "{} {}", self.width, self.height)?;
        w.write_all(b"255\n")?;
        for p in &self.pixels {
            w.write_all(p)?;
        }
        Ok(())
    }
}

/// Color maps for scalar-field images.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Palette {
    /// Blue ramp for negative values, orange for positive, white at zero.
    SignSplit,
    Grayscale,
}

impl Palette {
    /// Maps `value / scale` in [-1, 1] to a color.
    pub fn map(&self, value: f64, scale: f64) -> [u8; 3] {
        let t = if scale > 0.0 {
            (value / scale).clamp(-1.0, 1.0)
        } else {
            0.0
        };
        match self {
            Palette::SignSplit => {
                let a = t.abs();
                let lerp = |from: f64, to: f64| (from + (to - from) * a) * 255.0;
                if t < 0.0 {
                    [
                        lerp(1.0, 0.12) as u8,
                        lerp(1.0, 0.37) as u8,
                        lerp(1.0, 0.80) as u8,
                    ]
                } else {
                    [
                        lerp(1.0, 0.95) as u8,
                        lerp(1.0, 0.55) as u8,
                        lerp(1.0, 0.10) as u8,
                    ]
                }
            }
            Palette::Grayscale => {
                let g = ((t * 0.5 + 0.5) * 255.0) as u8;
                [g, g, g]
            }
        }
    }
}

/// Orthographic image of a 2D scalar field over `bounds`.
///
/// Pixel `(i, j)` samples the lattice point `min + (i, rows-1-j) * cell`, so
/// the image y axis points up and a pixel on a lattice node maps exactly the
/// field value there. Values are normalized by the largest magnitude sampled.
pub fn visualize_field_2d(
    field: impl Fn(Vec2) -> f64,
    bounds: Aabb<2>,
    resolution: (u32, u32),
    palette: Palette,
) -> Result<Image> {
    if bounds.is_degenerate() {
        return Err(Error::BoundsDegenerate);
    }
    let (w, h) = resolution;
    let mut values = vec![0.0f64; (w * h) as usize];
    let ext = bounds.extent();
    for j in 0..h {
        for i in 0..w {
            let x = bounds.min[0] + ext[0] * i as f64 / (w - 1).max(1) as f64;
            let y = bounds.min[1] + ext[1] * (h - 1 - j) as f64 / (h - 1).max(1) as f64;
            values[(j * w + i) as usize] = field(Vec2::new(x, y));
        }
    }
    let scale = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mut img = Image::new(w, h);
    for (idx, v) in values.iter().enumerate() {
        img.pixels[idx] = palette.map(*v, scale);
    }
    Ok(img)
}
