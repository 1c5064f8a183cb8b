//! Field and medial-field backend selection shared by the commands.

use crate::error::{CliError, CliResult};
use clap::ValueEnum;
use medial_fields::field::GridSide;
use medial_fields::medial::{GridMf, OracleConfig, OracleMf};
use medial_fields::neural::{load_checkpoint, NeuralField};
use medial_fields::{DistanceField, MedialField, Result as CoreResult, ShapeField, Vector};
use std::path::{Path, PathBuf};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum MfBackendKind {
    /// Exact spoke-marching oracle on the scene field.
    Oracle,
    /// Medial field baked to interior/exterior lattices.
    Grid,
    /// Trained network checkpoint.
    Neural,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum FieldKind {
    /// The analytic scene field.
    Scene,
    /// The trained network's phi head (requires --ckpt).
    Neural,
}

pub enum MfBackend<'f, const D: usize> {
    Oracle(OracleMf<'f, ShapeField<D>, D>),
    Grid(Box<GridMf<'f, ShapeField<D>, D>>),
    Neural(Box<NeuralField<D>>),
}

impl<'f, const D: usize> MedialField<D> for MfBackend<'f, D> {
    fn mf(&self, x: Vector<D>) -> CoreResult<f64> {
        match self {
            MfBackend::Oracle(m) => m.mf(x),
            MfBackend::Grid(m) => m.mf(x),
            MfBackend::Neural(m) => m.mf(x),
        }
    }

    fn mf_clamped(&self, x: Vector<D>) -> CoreResult<(f64, bool)> {
        match self {
            MfBackend::Oracle(m) => m.mf_clamped(x),
            MfBackend::Grid(m) => m.mf_clamped(x),
            MfBackend::Neural(m) => m.mf_clamped(x),
        }
    }
}

pub fn load_neural<const D: usize>(ckpt: Option<&PathBuf>) -> CliResult<NeuralField<D>> {
    let path = ckpt.ok_or_else(|| CliError::input("this mode requires --ckpt <checkpoint>"))?;
    if !path.exists() {
        return Err(CliError::input(format!(
            "checkpoint not found: {}",
            path.display()
        )));
    }
    let loaded = load_checkpoint(path).map_err(|e| CliError::input(e.to_string()))?;
    let bounds = medial_fields::Aabb::new(
        Vector::from_slice(&loaded.bounds_min),
        Vector::from_slice(&loaded.bounds_max),
    );
    NeuralField::new(loaded.params, bounds).map_err(|e| CliError::input(e.to_string()))
}

pub fn build_mf_backend<'f, const D: usize>(
    scene: &'f ShapeField<D>,
    kind: MfBackendKind,
    ckpt: Option<&PathBuf>,
    grid_res: usize,
) -> CliResult<MfBackend<'f, D>> {
    let cfg = OracleConfig::for_diag(scene.diag());
    match kind {
        MfBackendKind::Oracle => Ok(MfBackend::Oracle(OracleMf::new(scene, cfg))),
        MfBackendKind::Grid => {
            let gm = GridMf::bake(scene, &cfg, scene.bounds(), [grid_res.max(2); D])?;
            Ok(MfBackend::Grid(Box::new(gm)))
        }
        MfBackendKind::Neural => Ok(MfBackend::Neural(Box::new(load_neural::<D>(ckpt)?))),
    }
}

/// Writes one MF grid side to `<stem>.<side>.mfg`.
pub fn mf_grid_path(out: &Path, side: GridSide) -> PathBuf {
    let stem = out
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "mf".into());
    let tag = match side {
        GridSide::Interior => "interior",
        GridSide::Exterior => "exterior",
    };
    out.with_file_name(format!("{stem}.{tag}.mfg"))
}
