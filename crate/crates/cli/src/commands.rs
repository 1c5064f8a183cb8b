//! Subcommand implementations.

use crate::backend::{build_mf_backend, load_neural, mf_grid_path, FieldKind, MfBackendKind};
use crate::error::{CliError, CliResult};
use crate::manifest::{manifest_ref, RunManifest};
use clap::ValueEnum;
use medial_fields::field::{bake_grid, resolve_scene, write_grid, GridSide, Scene};
use medial_fields::medial::{
    bake_mf_grid, residual_inscription, residual_maximality, residual_orthogonality,
    spoke_constancy_check, OracleConfig,
};
use medial_fields::neural::{save_checkpoint, train, NetConfig, TrainConfig};
use medial_fields::proxy::{
    furthest_sphere_sampling, pareto_report, sample_medial_candidates, FssConfig,
};
use medial_fields::trace::{
    bench_poses, render, visualize_field_2d, Backend, Camera, Palette, Shading, TraceConfig,
};
use medial_fields::{DistanceField, Error, MedialField, ShapeField, Vec3};
use rand::SeedableRng;
use serde_json::json;
use std::io::Write;
use std::path::{Path, PathBuf};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum BackendArg {
    Naive,
    Medial,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ShadingArg {
    Normal,
    Lambert,
    LambertAo,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum VizWhat {
    Phi,
    Mf,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum BakeWhat {
    Sdf,
    Mf,
}

pub fn parse_vec3(s: &str) -> Result<Vec3, String> {
    let parts: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|e| format!("expected x,y,z: {e}"))?;
    if parts.len() != 3 {
        return Err(format!(
            "expected 3 comma-separated numbers, got {}",
            parts.len()
        ));
    }
    Ok(Vec3::new(parts[0], parts[1], parts[2]))
}

fn load(scene_arg: &str) -> CliResult<Scene> {
    resolve_scene(scene_arg).map_err(|e| CliError::input(e.to_string()))
}

fn write_csv(path: &Path, manifest_name: &str, header: &str, rows: &[String]) -> CliResult {
    let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(w, "# {}", manifest_ref(manifest_name))?;
    writeln!(w, "{header}")?;
    for r in rows {
        writeln!(w, "{r}")?;
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
pub fn cmd_render(
    scene_arg: &str,
    backend: BackendArg,
    field_kind: FieldKind,
    mf_kind: MfBackendKind,
    ckpt: Option<&PathBuf>,
    grid_res: usize,
    shading: ShadingArg,
    camera_pos: Option<Vec3>,
    look_at: Option<Vec3>,
    fov: f64,
    width: u32,
    height: u32,
    radius_scale: f64,
    seed: u64,
    out: &Path,
    stats_out: Option<&PathBuf>,
) -> CliResult {
    if !(radius_scale > 0.0 && radius_scale <= 1.0) {
        return Err(CliError::input("--radius-scale must lie in (0, 1]"));
    }
    let scene = load(scene_arg)?;
    let Scene::D3(scene3) = scene else {
        return Err(Error::Dim2NotRenderable.into());
    };

    let neural = if field_kind == FieldKind::Neural || mf_kind == MfBackendKind::Neural {
        Some(load_neural::<3>(ckpt)?)
    } else {
        None
    };
    let field: &dyn DistanceField<3> = match field_kind {
        FieldKind::Scene => &scene3,
        FieldKind::Neural => neural.as_ref().expect("loaded above"),
    };

    let diag = field.diag();
    let mut cfg = TraceConfig::for_diag(diag);
    cfg.backend = match backend {
        BackendArg::Naive => Backend::Naive,
        BackendArg::Medial => Backend::Medial,
    };
    cfg.radius_scale = radius_scale;

    let center = field.bounds().center();
    let pos = camera_pos.unwrap_or_else(|| center + Vec3::new(0.9, -1.1, 0.6) * diag);
    let mut cam = Camera::new(pos, look_at.unwrap_or(center), width, height);
    cam.vfov_deg = fov;

    let shading = match shading {
        ShadingArg::Normal => Shading::NormalColor,
        ShadingArg::Lambert => Shading::Lambertian,
        ShadingArg::LambertAo => Shading::lambertian_ao(cfg.epsilon),
    };

    let needs_mf =
        cfg.backend == Backend::Medial || matches!(shading, Shading::LambertianAo { .. });
    let mf = if needs_mf {
        Some(build_mf_backend(&scene3, mf_kind, ckpt, grid_res)?)
    } else {
        None
    };

    let output = render(
        field,
        mf.as_ref().map(|m| m as &dyn MedialField<3>),
        &cam,
        &cfg,
        shading,
    )?;

    let mut manifest = RunManifest::new(
        scene_arg,
        seed,
        json!({
            "backend": format!("{backend:?}"), "field": format!("{field_kind:?}"),
            "mf": format!("{mf_kind:?}"), "shading": format!("{shading:?}"),
            "camera": pos.as_slice(), "look_at": look_at.unwrap_or(center).as_slice(),
            "fov": fov, "width": width, "height": height,
            "epsilon": cfg.epsilon, "t_max": cfg.t_max, "radius_scale": radius_scale,
        }),
    );
    manifest.add_output(out);
    if let Some(s) = stats_out {
        manifest.add_output(s);
    }
    let mname = manifest.write_next_to(out)?;
    output.image.write_ppm(out, Some(&manifest_ref(&mname)))?;
    if let Some(stats_path) = stats_out {
        let s = &output.stats;
        write_csv(
            stats_path,
            &mname,
            "scene,backend,mean,min,max",
            &[format!(
                "{scene_arg},{},{:.6},{:.6},{:.6}",
                match backend {
                    BackendArg::Naive => "naive",
                    BackendArg::Medial => "medial",
                },
                s.mean(),
                s.mean(),
                s.mean()
            )],
        )?;
    }
    println!("wrote {}", out.display());
    Ok(())
}

pub fn cmd_bench(
    scene_arg: &str,
    poses: usize,
    seed: u64,
    res: u32,
    mf_kind: MfBackendKind,
    ckpt: Option<&PathBuf>,
    grid_res: usize,
    out: &Path,
) -> CliResult {
    let scene = load(scene_arg)?;
    let Scene::D3(scene3) = scene else {
        return Err(Error::Dim2NotRenderable.into());
    };
    let mf = build_mf_backend(&scene3, mf_kind, ckpt, grid_res)?;
    let cfg = TraceConfig::for_diag(scene3.diag());
    let (naive, medial) = bench_poses(&scene3, &mf, poses, seed, &cfg, (res, res));

    let mut manifest = RunManifest::new(
        scene_arg,
        seed,
        json!({ "poses": poses, "res": res, "mf": format!("{mf_kind:?}") }),
    );
    manifest.add_output(out);
    let hist_naive = out.with_extension("naive_hist.csv");
    let hist_medial = out.with_extension("medial_hist.csv");
    manifest.add_output(&hist_naive);
    manifest.add_output(&hist_medial);
    let mname = manifest.write_next_to(out)?;

    write_csv(
        out,
        &mname,
        "scene,backend,mean,min,max",
        &[
            format!(
                "{scene_arg},naive,{:.6},{:.6},{:.6}",
                naive.mean(),
                naive.min(),
                naive.max()
            ),
            format!(
                "{scene_arg},medial,{:.6},{:.6},{:.6}",
                medial.mean(),
                medial.min(),
                medial.max()
            ),
        ],
    )?;
    for (path, report) in [(&hist_naive, &naive), (&hist_medial, &medial)] {
        let rows: Vec<String> = report
            .pooled
            .histogram
            .iter()
            .enumerate()
            .filter(|(_, c)| **c > 0)
            .map(|(bucket, count)| format!("{bucket},{count}"))
            .collect();
        write_csv(path, &mname, "bucket,count", &rows)?;
    }
    println!(
        "naive mean {:.3} | medial mean {:.3} (per-frame means over {poses} poses)",
        naive.mean(),
        medial.mean()
    );
    Ok(())
}

fn proxies_for<const D: usize>(
    scene: &ShapeField<D>,
    budgets: &[usize],
    mae_samples: usize,
    seed: u64,
    out_dir: &Path,
    mname: &str,
    rows: &mut Vec<String>,
    outputs: &mut Vec<PathBuf>,
) -> CliResult {
    for row in pareto_report(scene, budgets, mae_samples, seed)? {
        rows.push(format!(
            "{},{},{:.9}",
            row.kind, row.floats, row.mae_percent
        ));
    }
    // Per-budget medial sphere sets as artifacts.
    for &budget in budgets {
        let m = (budget / (D + 1)).max(1);
        let cfg = FssConfig::for_diag(scene.diag(), (8 * m).max(512), m, seed);
        let candidates = sample_medial_candidates(scene, &cfg)?;
        let take = cfg.m_select.min(candidates.len());
        let (set, _) = furthest_sphere_sampling(
            &candidates,
            &FssConfig {
                m_select: take,
                ..cfg
            },
        )?;
        let path = out_dir.join(format!("medial_{budget}.json"));
        set.save_json(&path, Some(mname))?;
        outputs.push(path);
    }
    Ok(())
}

pub fn cmd_proxies(
    scene_arg: &str,
    budgets: &[usize],
    mae_samples: usize,
    seed: u64,
    out_dir: &Path,
) -> CliResult {
    if budgets.is_empty() {
        return Err(CliError::input("--budgets needs at least one value"));
    }
    let scene = load(scene_arg)?;
    std::fs::create_dir_all(out_dir)?;
    let pareto = out_dir.join("pareto.csv");
    let mut manifest = RunManifest::new(
        scene_arg,
        seed,
        json!({ "budgets": budgets, "mae_samples": mae_samples }),
    );
    manifest.add_output(&pareto);
    let mname = manifest.write_next_to(&pareto)?;

    let mut rows = Vec::new();
    let mut outputs = Vec::new();
    match &scene {
        Scene::D2(f) => proxies_for::<2>(
            f,
            budgets,
            mae_samples,
            seed,
            out_dir,
            &mname,
            &mut rows,
            &mut outputs,
        )?,
        Scene::D3(f) => proxies_for::<3>(
            f,
            budgets,
            mae_samples,
            seed,
            out_dir,
            &mname,
            &mut rows,
            &mut outputs,
        )?,
    }
    write_csv(&pareto, &mname, "kind,floats,mae_percent", &rows)?;
    println!(
        "wrote {} and {} proxy sets",
        pareto.display(),
        outputs.len()
    );
    Ok(())
}

#[allow(clippy::too_many_arguments)]
pub fn cmd_train(
    scene_arg: &str,
    steps: usize,
    seed: u64,
    batch: usize,
    width: usize,
    sigma: Option<f64>,
    ablate_medial: bool,
    out: &Path,
    loss_csv: Option<&PathBuf>,
) -> CliResult {
    let scene = load(scene_arg)?;

    fn run<const D: usize>(
        scene: &ShapeField<D>,
        steps: usize,
        seed: u64,
        batch: usize,
        width: usize,
        sigma: Option<f64>,
        ablate_medial: bool,
    ) -> CliResult<(medial_fields::neural::TrainOutput, TrainConfig)> {
        let net = NetConfig {
            backbone_width: width,
            ..NetConfig::for_scene(D, scene.diag())
        };
        let cfg = TrainConfig {
            batch_size: batch,
            sigma_volume: sigma,
            ablate_medial,
            ..TrainConfig::new(net, steps, seed)
        };
        let out = train(scene, &cfg)?;
        Ok((out, cfg))
    }

    let (result, cfg, bounds_min, bounds_max) = match &scene {
        Scene::D2(f) => {
            let (r, c) = run::<2>(f, steps, seed, batch, width, sigma, ablate_medial)?;
            (
                r,
                c,
                f.bounds().min.as_slice().to_vec(),
                f.bounds().max.as_slice().to_vec(),
            )
        }
        Scene::D3(f) => {
            let (r, c) = run::<3>(f, steps, seed, batch, width, sigma, ablate_medial)?;
            (
                r,
                c,
                f.bounds().min.as_slice().to_vec(),
                f.bounds().max.as_slice().to_vec(),
            )
        }
    };

    let mut manifest = RunManifest::new(
        scene_arg,
        seed,
        serde_json::to_value(&cfg).map_err(|e| CliError::runtime(e.to_string()))?,
    );
    manifest.add_output(out);
    let loss_path = loss_csv
        .cloned()
        .unwrap_or_else(|| out.with_extension("loss.csv"));
    manifest.add_output(&loss_path);
    let mname = manifest.write_next_to(out)?;

    save_checkpoint(&result.params, &bounds_min, &bounds_max, out, Some(&mname))?;
    result
        .log
        .write_csv(&loss_path, Some(&manifest_ref(&mname)))?;
    let first = result.log.rows.first().map(|r| r.total).unwrap_or(0.0);
    let last = result.log.rows.last().map(|r| r.total).unwrap_or(0.0);
    println!(
        "trained {steps} steps; weighted loss {first:.4e} -> {last:.4e}; wrote {}",
        out.display()
    );
    Ok(())
}

fn audit_for<const D: usize>(
    scene: &ShapeField<D>,
    mf: &dyn MedialField<D>,
    samples: usize,
    seed: u64,
) -> CliResult<Vec<String>> {
    use rand::Rng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let fd = 1e-4 * scene.diag();
    let bounds = scene.bounds();
    struct Acc {
        n: usize,
        excluded: usize,
        sum: f64,
        max: f64,
    }
    impl Acc {
        fn new() -> Self {
            Acc {
                n: 0,
                excluded: 0,
                sum: 0.0,
                max: 0.0,
            }
        }
        fn push(&mut self, r: f64) {
            self.n += 1;
            self.sum += r;
            self.max = self.max.max(r);
        }
        fn row(&self, name: &str) -> String {
            let mean = if self.n > 0 {
                self.sum / self.n as f64
            } else {
                0.0
            };
            format!(
                "{name},{},{},{:.9e},{:.9e}",
                self.n, self.excluded, mean, self.max
            )
        }
    }
    let mut acc = [Acc::new(), Acc::new(), Acc::new(), Acc::new()];
    let mut drawn = 0;
    while drawn < samples {
        let x = bounds.sample_uniform(&mut rng);
        if scene.phi(x).abs() < 1e-3 * scene.diag() {
            continue; // surface band: every residual is degenerate there
        }
        drawn += 1;
        if let Ok(r) = residual_maximality(mf, scene, x) {
            acc[0].push(r);
        }
        if let Ok(r) = residual_inscription(mf, scene, x) {
            acc[1].push(r);
        }
        match residual_orthogonality(mf, scene, x, fd) {
            Ok(r) => acc[2].push(r),
            Err(Error::ExcludedRegion) => acc[2].excluded += 1,
            Err(_) => {}
        }
        if rng.random::<f64>() < 0.25 {
            if let Ok(r) = spoke_constancy_check(mf, scene, x, 16) {
                acc[3].push(r);
            }
        }
    }
    Ok(vec![
        acc[0].row("maximality"),
        acc[1].row("inscription"),
        acc[2].row("orthogonality"),
        acc[3].row("spoke_constancy"),
    ])
}

pub fn cmd_audit(
    scene_arg: &str,
    mf_kind: MfBackendKind,
    ckpt: Option<&PathBuf>,
    grid_res: usize,
    samples: usize,
    seed: u64,
    out: &Path,
) -> CliResult {
    let scene = load(scene_arg)?;
    let mut manifest = RunManifest::new(
        scene_arg,
        seed,
        json!({ "mf": format!("{mf_kind:?}"), "samples": samples }),
    );
    manifest.add_output(out);
    let mname = manifest.write_next_to(out)?;
    let rows = match &scene {
        Scene::D2(f) => {
            let mf = build_mf_backend(f, mf_kind, ckpt, grid_res)?;
            audit_for::<2>(f, &mf, samples, seed)?
        }
        Scene::D3(f) => {
            let mf = build_mf_backend(f, mf_kind, ckpt, grid_res)?;
            audit_for::<3>(f, &mf, samples, seed)?
        }
    };
    write_csv(out, &mname, "residual,samples,excluded,mean,max", &rows)?;
    println!("wrote {}", out.display());
    Ok(())
}

pub fn cmd_bake(scene_arg: &str, what: BakeWhat, res: usize, seed: u64, out: &Path) -> CliResult {
    let scene = load(scene_arg)?;

    fn bake_one<const D: usize>(
        scene: &ShapeField<D>,
        what: BakeWhat,
        res: usize,
        out: &Path,
        manifest: &mut RunManifest,
    ) -> CliResult<Vec<String>> {
        let mut written = Vec::new();
        match what {
            BakeWhat::Sdf => {
                let grid = bake_grid(scene, scene.bounds(), [res.max(2); D])?;
                write_grid(&grid, out)?;
                manifest.add_output(out);
                written.push(out.display().to_string());
            }
            BakeWhat::Mf => {
                let cfg = OracleConfig::for_diag(scene.diag());
                for side in [GridSide::Interior, GridSide::Exterior] {
                    let grid = bake_mf_grid(scene, &cfg, scene.bounds(), [res.max(2); D], side)?;
                    let path = mf_grid_path(out, side);
                    write_grid(&grid, &path)?;
                    manifest.add_output(&path);
                    written.push(path.display().to_string());
                }
            }
        }
        Ok(written)
    }

    let mut manifest = RunManifest::new(
        scene_arg,
        seed,
        json!({ "what": format!("{what:?}"), "res": res }),
    );
    let written = match &scene {
        Scene::D2(f) => bake_one::<2>(f, what, res, out, &mut manifest)?,
        Scene::D3(f) => bake_one::<3>(f, what, res, out, &mut manifest)?,
    };
    manifest.write_next_to(out)?;
    println!("wrote {}", written.join(", "));
    Ok(())
}

pub fn cmd_viz(
    scene_arg: &str,
    what: VizWhat,
    mf_kind: MfBackendKind,
    ckpt: Option<&PathBuf>,
    grid_res: usize,
    res: u32,
    seed: u64,
    out: &Path,
) -> CliResult {
    let scene = load(scene_arg)?;
    let Scene::D2(scene2) = scene else {
        return Err(CliError::input(
            "viz renders 2D scalar fields; use `render` for 3D scenes",
        ));
    };
    let mut manifest = RunManifest::new(
        scene_arg,
        seed,
        json!({ "what": format!("{what:?}"), "res": res, "mf": format!("{mf_kind:?}") }),
    );
    manifest.add_output(out);
    let mname = manifest.write_next_to(out)?;
    let bounds = scene2.bounds();
    let image = match what {
        VizWhat::Phi => {
            visualize_field_2d(|p| scene2.phi(p), bounds, (res, res), Palette::SignSplit)?
        }
        VizWhat::Mf => {
            let mf = build_mf_backend(&scene2, mf_kind, ckpt, grid_res)?;
            visualize_field_2d(
                |p| mf.mf(p).unwrap_or(f64::NAN).min(scene2.diag()),
                bounds,
                (res, res),
                Palette::SignSplit,
            )?
        }
    };
    image.write_ppm(out, Some(&manifest_ref(&mname)))?;
    println!("wrote {}", out.display());
    Ok(())
}

pub fn cmd_scenes() -> CliResult {
    for name in medial_fields::field::builtin_scene_names() {
        let scene = medial_fields::field::builtin_scene(name).expect("builtin");
        println!("{name}  ({}D, diag {:.3})", scene.dim(), scene.diag());
    }
    Ok(())
}
