//! `mfield`: medial fields over signed-distance scenes.
//!
//! One binary, subcommand style. Every command is deterministic given the
//! scene, flags and seed; artifact-producing commands write a run manifest
//! next to their primary output.

mod backend;
mod commands;
mod error;
mod manifest;

use backend::{FieldKind, MfBackendKind};
use clap::{Parser, Subcommand};
use commands::{BackendArg, BakeWhat, ShadingArg, VizWhat};
use medial_fields::Vec3;
use std::path::PathBuf;

#[derive(Parser)]
#[command(
    name = "mfield",
    version,
    about = "Medial fields over signed-distance scenes: tracing, proxies, occlusion, training"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Render a 3D scene with plain or medial sphere tracing.
    Render {
        /// Builtin scene name or scene JSON path.
        #[arg(long)]
        scene: String,
        #[arg(long, value_enum, default_value_t = BackendArg::Naive)]
        backend: BackendArg,
        /// Which field the rays march.
        #[arg(long, value_enum, default_value_t = FieldKind::Scene)]
        field: FieldKind,
        /// Medial-field source for the medial backend and AO shading.
        #[arg(long, value_enum, default_value_t = MfBackendKind::Oracle)]
        mf: MfBackendKind,
        /// Checkpoint for the neural field / neural MF.
        #[arg(long)]
        ckpt: Option<PathBuf>,
        /// Lattice resolution for the grid MF backend.
        #[arg(long, default_value_t = 64)]
        grid_res: usize,
        #[arg(long, value_enum, default_value_t = ShadingArg::Lambert)]
        shading: ShadingArg,
        /// Camera position "x,y,z"; defaults to a scene-scaled view.
        #[arg(long, value_parser = commands::parse_vec3)]
        camera: Option<Vec3>,
        /// Look-at point "x,y,z"; defaults to the scene center.
        #[arg(long, value_parser = commands::parse_vec3)]
        look_at: Option<Vec3>,
        #[arg(long, default_value_t = 45.0)]
        fov: f64,
        #[arg(long, default_value_t = 512)]
        width: u32,
        #[arg(long, default_value_t = 512)]
        height: u32,
        /// Medial-sphere safety shrink (lambda in (0, 1]).
        #[arg(long, default_value_t = 1.0)]
        radius_scale: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        /// Optional iteration-statistics CSV.
        #[arg(long)]
        stats: Option<PathBuf>,
    },
    /// Compare plain vs medial tracing over random camera poses.
    Bench {
        #[arg(long)]
        scene: String,
        #[arg(long, default_value_t = 16)]
        poses: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Square image resolution per pose.
        #[arg(long, default_value_t = 128)]
        res: u32,
        #[arg(long, value_enum, default_value_t = MfBackendKind::Oracle)]
        mf: MfBackendKind,
        #[arg(long)]
        ckpt: Option<PathBuf>,
        #[arg(long, default_value_t = 64)]
        grid_res: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Build sphere-set collision proxies and the accuracy/memory table.
    Proxies {
        #[arg(long)]
        scene: String,
        /// Float budgets, e.g. "16,32,64,128".
        #[arg(long, value_delimiter = ',')]
        budgets: Vec<usize>,
        #[arg(long, default_value_t = 4096)]
        mae_samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Train the four-headed field network against a scene.
    Train {
        #[arg(long)]
        scene: String,
        #[arg(long, default_value_t = 20_000)]
        steps: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 64)]
        batch: usize,
        /// Backbone width (heads stay 64 wide).
        #[arg(long, default_value_t = 32)]
        width: usize,
        /// Volume-sampling Gaussian stddev; defaults to half the diagonal.
        #[arg(long)]
        sigma: Option<f64>,
        /// Drop the medial-specific losses (plain neural SDF baseline).
        #[arg(long)]
        ablate_medial: bool,
        #[arg(long)]
        out: PathBuf,
        /// Loss log path; defaults to "<out>.loss.csv".
        #[arg(long)]
        loss_csv: Option<PathBuf>,
    },
    /// Evaluate the medial-constraint residuals of an MF backend.
    Audit {
        #[arg(long)]
        scene: String,
        #[arg(long, value_enum, default_value_t = MfBackendKind::Oracle)]
        mf: MfBackendKind,
        #[arg(long)]
        ckpt: Option<PathBuf>,
        #[arg(long, default_value_t = 64)]
        grid_res: usize,
        #[arg(long, default_value_t = 4096)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Bake the SDF or both medial-field sides to lattices.
    Bake {
        #[arg(long)]
        scene: String,
        #[arg(long, value_enum)]
        what: BakeWhat,
        #[arg(long, default_value_t = 64)]
        res: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Orthographic scalar-field image of a 2D scene (phi or MF).
    Viz {
        #[arg(long)]
        scene: String,
        #[arg(long, value_enum, default_value_t = VizWhat::Phi)]
        what: VizWhat,
        #[arg(long, value_enum, default_value_t = MfBackendKind::Oracle)]
        mf: MfBackendKind,
        #[arg(long)]
        ckpt: Option<PathBuf>,
        #[arg(long, default_value_t = 64)]
        grid_res: usize,
        #[arg(long, default_value_t = 512)]
        res: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// List the bundled analytic scenes.
    Scenes,
}

fn main() {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Render {
            scene,
            backend,
            field,
            mf,
            ckpt,
            grid_res,
            shading,
            camera,
            look_at,
            fov,
            width,
            height,
            radius_scale,
            seed,
            out,
            stats,
        } => commands::cmd_render(
            scene,
            *backend,
            *field,
            *mf,
            ckpt.as_ref(),
            *grid_res,
            *shading,
            *camera,
            *look_at,
            *fov,
            *width,
            *height,
            *radius_scale,
            *seed,
            out,
            stats.as_ref(),
        ),
        Command::Bench {
            scene,
            poses,
            seed,
            res,
            mf,
            ckpt,
            grid_res,
            out,
        } => commands::cmd_bench(
            scene,
            *poses,
            *seed,
            *res,
            *mf,
            ckpt.as_ref(),
            *grid_res,
            out,
        ),
        Command::Proxies {
            scene,
            budgets,
            mae_samples,
            seed,
            out_dir,
        } => commands::cmd_proxies(scene, budgets, *mae_samples, *seed, out_dir),
        Command::Train {
            scene,
            steps,
            seed,
            batch,
            width,
            sigma,
            ablate_medial,
            out,
            loss_csv,
        } => commands::cmd_train(
            scene,
            *steps,
            *seed,
            *batch,
            *width,
            *sigma,
            *ablate_medial,
            out,
            loss_csv.as_ref(),
        ),
        Command::Audit {
            scene,
            mf,
            ckpt,
            grid_res,
            samples,
            seed,
            out,
        } => commands::cmd_audit(scene, *mf, ckpt.as_ref(), *grid_res, *samples, *seed, out),
        Command::Bake {
            scene,
            what,
            res,
            seed,
            out,
        } => commands::cmd_bake(scene, *what, *res, *seed, out),
        Command::Viz {
            scene,
            what,
            mf,
            ckpt,
            grid_res,
            res,
            seed,
            out,
        } => commands::cmd_viz(
            scene,
            *what,
            *mf,
            ckpt.as_ref(),
            *grid_res,
            *res,
            *seed,
            out,
        ),
        Command::Scenes => commands::cmd_scenes(),
    };
    if let Err(e) = result {
        eprintln!("error: {}", e.message);
        std::process::exit(e.code);
    }
}
