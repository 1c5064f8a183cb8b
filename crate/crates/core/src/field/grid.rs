//! Lattice-sampled scalar fields with multilinear interpolation.
//!
//! Grids back two things: baked SDFs (the grid proxy baseline) and baked
//! medial fields. On-disk format is one JSON header line followed by a
//! little-endian blob of 64-bit floats.

use super::{finite_difference_grad, DistanceField};
use crate::error::{Error, Result};
use crate::math::{Aabb, Vector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

/// Which side of the surface a baked medial-field grid holds.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GridSide {
    Interior,
    Exterior,
}

/// Uniformly spaced lattice of field samples.
#[derive(Clone, Debug, PartialEq)]
pub struct GridField<const D: usize> {
    pub origin: Vector<D>,
    pub cell_size: f64,
    pub resolution: [usize; D],
    pub values: Vec<f64>,
    /// Set on baked medial-field grids; `None` for SDF grids.
    pub side: Option<GridSide>,
}

impl<const D: usize> GridField<D> {
    pub fn new(
        origin: Vector<D>,
        cell_size: f64,
        resolution: [usize; D],
        values: Vec<f64>,
    ) -> Result<Self> {
        if !(cell_size > 0.0) || resolution.iter().any(|r| *r < 2) {
            return Err(Error::Format(
                "grid needs cell_size > 0 and resolution >= 2 per axis".into(),
            ));
        }
        let count: usize = resolution.iter().product();
        if values.len() != count || values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Format(format!(
                "grid expects {count} finite values, got {}",
                values.len()
            )));
        }
        Ok(GridField {
            origin,
            cell_size,
            resolution,
            values,
            side: None,
        })
    }

    pub fn node_count(&self) -> usize {
        self.resolution.iter().product()
    }

    pub fn node_position(&self, idx: [usize; D]) -> Vector<D> {
        let mut p = self.origin;
        for a in 0..D {
            p[a] += self.cell_size * idx[a] as f64;
        }
        p
    }

    fn linear_index(&self, idx: [usize; D]) -> usize {
        let mut lin = 0;
        for a in (0..D).rev() {
            lin = lin * self.resolution[a] + idx[a];
        }
        lin
    }

    pub fn node_value(&self, idx: [usize; D]) -> f64 {
        self.values[self.linear_index(idx)]
    }

    fn unflatten(&self, mut lin: usize) -> [usize; D] {
        let mut idx = [0usize; D];
        for a in 0..D {
            idx[a] = lin % self.resolution[a];
            lin /= self.resolution[a];
        }
        idx
    }

    /// Multilinear interpolation; queries outside the lattice clamp to it.
    pub fn interpolate(&self, x: Vector<D>) -> f64 {
        let mut base = [0usize; D];
        let mut frac = [0.0f64; D];
        for a in 0..D {
            let u = (x[a] - self.origin[a]) / self.cell_size;
            let max_cell = (self.resolution[a] - 2) as f64;
            let c = u.floor().clamp(0.0, max_cell);
            base[a] = c as usize;
            let mut f = (u - c).clamp(0.0, 1.0);
            // Snap to lattice nodes so the interpolation identity is exact.
            if f < 1e-12 {
                f = 0.0;
            } else if f > 1.0 - 1e-12 {
                f = 1.0;
            }
            frac[a] = f;
        }
        let mut acc = 0.0;
        for corner in 0..(1usize << D) {
            let mut idx = base;
            let mut w = 1.0;
            for a in 0..D {
                if corner >> a & 1 == 1 {
                    idx[a] += 1;
                    w *= frac[a];
                } else {
                    w *= 1.0 - frac[a];
                }
            }
            acc += w * self.values[self.linear_index(idx)];
        }
        acc
    }

    pub fn span(&self) -> Aabb<D> {
        let mut max = self.origin;
        for a in 0..D {
            max[a] += self.cell_size * (self.resolution[a] - 1) as f64;
        }
        Aabb::new(self.origin, max)
    }
}

impl<const D: usize> DistanceField<D> for GridField<D> {
    fn phi(&self, x: Vector<D>) -> f64 {
        self.interpolate(x)
    }

    fn grad(&self, x: Vector<D>) -> Result<Vector<D>> {
        finite_difference_grad(|p| self.interpolate(p), x, 0.5 * self.cell_size)
    }

    fn bounds(&self) -> Aabb<D> {
        self.span()
    }
}

/// Samples `field` on a uniform lattice covering `bounds`.
///
/// The cell size is the largest per-axis spacing implied by the requested
/// resolution, so the lattice always covers the bounds (possibly overshooting
/// on the tighter axes).
pub fn bake_grid<const D: usize>(
    field: &(impl DistanceField<D> + ?Sized),
    bounds: Aabb<D>,
    resolution: [usize; D],
) -> Result<GridField<D>> {
    if bounds.is_degenerate() {
        return Err(Error::BoundsDegenerate);
    }
    if resolution.iter().any(|r| *r < 2) {
        return Err(Error::Format(
            "bake resolution must be >= 2 per axis".into(),
        ));
    }
    let ext = bounds.extent();
    let cell_size = (0..D)
        .map(|a| ext[a] / (resolution[a] - 1) as f64)
        .fold(0.0f64, f64::max);
    let mut grid = GridField {
        origin: bounds.min,
        cell_size,
        resolution,
        values: vec![0.0; resolution.iter().product()],
        side: None,
    };
    let positions: Vec<Vector<D>> = (0..grid.node_count())
        .map(|lin| grid.node_position(grid.unflatten(lin)))
        .collect();
    grid.values = positions.par_iter().map(|p| field.phi(*p)).collect();
    Ok(grid)
}

#[derive(Serialize, Deserialize)]
struct GridHeader {
    origin: Vec<f64>,
    cell_size: f64,
    resolution: Vec<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    side: Option<GridSide>,
}

pub fn write_grid<const D: usize>(grid: &GridField<D>, path: &Path) -> Result<()> {
    let header = GridHeader {
        origin: grid.origin.as_slice().to_vec(),
        cell_size: grid.cell_size,
        resolution: grid.resolution.to_vec(),
        side: grid.side,
    };
    let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
    serde_json::to_writer(&mut w, &header).map_err(|e| Error::Format(e.to_string()))?;
    w.write_all(b"\n")?;
    for v in &grid.values {
        w.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

pub fn read_grid<const D: usize>(path: &Path) -> Result<GridField<D>> {
    let mut r = BufReader::new(std::fs::File::open(path)?);
    let mut header_line = String::new();
    r.read_line(&mut header_line)?;
    let header: GridHeader =
        serde_json::from_str(header_line.trim()).map_err(|e| Error::Format(e.to_string()))?;
    if header.origin.len() != D || header.resolution.len() != D {
        return Err(Error::Format(format!(
            "grid header dimension {} does not match scene dimension {D}",
            header.resolution.len()
        )));
    }
    let count: usize = header.resolution.iter().product();
    let mut blob = Vec::with_capacity(count * 8);
    r.read_to_end(&mut blob)?;
    if blob.len() != count * 8 {
        return Err(Error::Format(format!(
            "grid blob holds {} bytes, expected {}",
            blob.len(),
            count * 8
        )));
    }
    let values: Vec<f64> = blob
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
        .collect();
    let mut resolution = [0usize; D];
    resolution.copy_from_slice(&header.resolution);
    let mut grid = GridField::new(
        Vector::from_slice(&header.origin),
        header.cell_size,
        resolution,
        values,
    )?;
    grid.side = header.side;
    Ok(grid)
}
