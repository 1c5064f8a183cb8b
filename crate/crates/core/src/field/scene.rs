//! Scene files and the bundled analytic test scenes.
//!
//! A scene file is a JSON document `{ "dim": 2|3, "shape": <tree>, "bounds":
//! {"min": [...], "max": [...]} }`. The dimension is fixed per scene.

use super::{DistanceField, ShapeField, ShapeSpec};
use crate::error::{Error, Result};
use crate::math::{Aabb, Vec2, Vec3, Vector};
use serde::{Deserialize, Serialize};
use serde_json::Value;
use std::path::Path;

/// A loaded scene with its compile-time dimension recovered.
pub enum Scene {
    D2(ShapeField<2>),
    D3(ShapeField<3>),
}

impl Scene {
    pub fn dim(&self) -> usize {
        match self {
            Scene::D2(_) => 2,
            Scene::D3(_) => 3,
        }
    }

    pub fn diag(&self) -> f64 {
        match self {
            Scene::D2(f) => f.diag(),
            Scene::D3(f) => f.diag(),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct SceneDoc {
    dim: usize,
    shape: Value,
    bounds: BoundsDoc,
}

#[derive(Serialize, Deserialize)]
struct BoundsDoc {
    min: Vec<f64>,
    max: Vec<f64>,
}

fn parse_typed<const D: usize>(doc: &SceneDoc) -> Result<ShapeField<D>> {
    if doc.bounds.min.len() != D || doc.bounds.max.len() != D {
        return Err(Error::InvalidScene(format!(
            "bounds arrays must have {D} entries"
        )));
    }
    let spec: ShapeSpec<D> = serde_json::from_value(doc.shape.clone())
        .map_err(|e| Error::InvalidScene(format!("bad shape tree: {e}")))?;
    let bounds = Aabb::new(
        Vector::from_slice(&doc.bounds.min),
        Vector::from_slice(&doc.bounds.max),
    );
    if bounds.is_degenerate() {
        return Err(Error::BoundsDegenerate);
    }
    ShapeField::new(spec, bounds)
}

pub fn load_scene(path: &Path) -> Result<Scene> {
    let text = std::fs::read_to_string(path)?;
    let doc: SceneDoc =
        serde_json::from_str(&text).map_err(|e| Error::InvalidScene(format!("bad scene: {e}")))?;
    match doc.dim {
        2 => Ok(Scene::D2(parse_typed::<2>(&doc)?)),
        3 => Ok(Scene::D3(parse_typed::<3>(&doc)?)),
        d => Err(Error::InvalidScene(format!("dim must be 2 or 3, got {d}"))),
    }
}

pub fn save_scene<const D: usize>(field: &ShapeField<D>, path: &Path) -> Result<()> {
    use crate::field::DistanceField;
    let doc = SceneDoc {
        dim: D,
        shape: serde_json::to_value(field.spec()).map_err(|e| Error::Format(e.to_string()))?,
        bounds: BoundsDoc {
            min: field.bounds().min.as_slice().to_vec(),
            max: field.bounds().max.as_slice().to_vec(),
        },
    };
    let text = serde_json::to_string_pretty(&doc).map_err(|e| Error::Format(e.to_string()))?;
    std::fs::write(path, text)?;
    Ok(())
}

/// Names of the bundled analytic scenes, 2D first.
pub fn builtin_scene_names() -> &'static [&'static str] {
    &[
        "disk",
        "slab",
        "box",
        "two_disks", // 2D
        "sphere",
        "box3",
        "capsule",
        "torus",
        "grazing", // 3D
    ]
}

/// Builds a bundled scene by name. These replace mesh assets with analytic
/// ground truth: distances, gradients and containment are exact.
pub fn builtin_scene(name: &str) -> Result<Scene> {
    match name {
        "disk" => Ok(Scene::D2(ShapeField::new(
            ShapeSpec::Sphere {
                center: Vec2::ZERO,
                radius: 1.0,
            },
            Aabb::centered(1.5),
        )?)),
        "slab" => Ok(Scene::D2(ShapeField::new(
            ShapeSpec::Slab {
                axis: 1,
                half_width: 1.0,
            },
            Aabb::new(Vec2::new(-6.0, -1.5), Vec2::new(6.0, 1.5)),
        )?)),
        "box" => Ok(Scene::D2(ShapeField::new(
            ShapeSpec::Box {
                center: Vec2::ZERO,
                half_extents: Vec2::new(1.0, 1.0),
            },
            Aabb::centered(1.5),
        )?)),
        "two_disks" => Ok(Scene::D2(ShapeField::new(
            ShapeSpec::Union {
                children: vec![
                    ShapeSpec::Sphere {
                        center: Vec2::new(-1.5, 0.0),
                        radius: 1.0,
                    },
                    ShapeSpec::Sphere {
                        center: Vec2::new(1.5, 0.0),
                        radius: 0.7,
                    },
                ],
            },
            Aabb::new(Vec2::new(-3.0, -1.5), Vec2::new(3.0, 1.5)),
        )?)),
        "sphere" => Ok(Scene::D3(ShapeField::new(
            ShapeSpec::Sphere {
                center: Vec3::ZERO,
                radius: 1.0,
            },
            Aabb::centered(1.5),
        )?)),
        "box3" => Ok(Scene::D3(ShapeField::new(
            ShapeSpec::Box {
                center: Vec3::ZERO,
                half_extents: Vec3::new(1.0, 0.7, 0.5),
            },
            Aabb::centered(1.4),
        )?)),
        "capsule" => Ok(Scene::D3(ShapeField::new(
            ShapeSpec::Capsule {
                a: Vec3::new(-0.8, 0.0, 0.0),
                b: Vec3::new(0.8, 0.0, 0.0),
                radius: 0.4,
            },
            Aabb::centered(1.6),
        )?)),
        "torus" => Ok(Scene::D3(ShapeField::new(
            ShapeSpec::Torus {
                center: Vec3::ZERO,
                major_radius: 1.0,
                minor_radius: 0.35,
            },
            Aabb::new(Vec3::new(-1.6, -1.6, -0.7), Vec3::new(1.6, 1.6, 0.7)),
        )?)),
        // A sphere floating just above a floor plane: rays skimming the gap
        // are the pathological case for plain sphere tracing. The gap keeps
        // the primitives disjoint so min() stays an exact distance.
        "grazing" => Ok(Scene::D3(ShapeField::new(
            ShapeSpec::Union {
                children: vec![
                    ShapeSpec::Sphere {
                        center: Vec3::new(0.0, 0.0, 0.9),
                        radius: 0.8,
                    },
                    ShapeSpec::Halfspace {
                        point: Vec3::ZERO,
                        normal: Vec3::new(0.0, 0.0, 1.0),
                    },
                ],
            },
            Aabb::new(Vec3::new(-2.0, -2.0, -0.5), Vec3::new(2.0, 2.0, 2.0)),
        )?)),
        other => Err(Error::InvalidScene(format!(
            "unknown builtin scene '{other}'; known: {}",
            builtin_scene_names().join(", ")
        ))),
    }
}

/// Loads a scene from a file path, or by builtin name when no such file exists.
pub fn resolve_scene(arg: &str) -> Result<Scene> {
    let path = Path::new(arg);
    if path.exists() {
        load_scene(path)
    } else {
        builtin_scene(arg)
    }
}
