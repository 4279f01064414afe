use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context};
use ganaug::data::io::{load_patch_dir, read_pgm, save_patch_dir, write_pgm};
use ganaug::data::{
    extract_patches, generate_phantom_dataset, histogram_normalize, AnnotatedImage, Label, PatchPool,
    PhantomConfig, Rect,
};
use ganaug::eval::{emit_report, read_results_csv, run_matrix, DataPools};
use ganaug::gan::{synthesize, TrainLogRow};
use ganaug::models::{load_checkpoint, save_checkpoint};
use log::info;
use serde::Deserialize;

use crate::config::RunConfig;
use crate::logger;
use crate::{EvalMatrixArgs, ExtractArgs, PhantomArgs, ReportArgs, SynthArgs, TrainGanArgs};

pub const GENERATOR_CKPT: &str = "generator.ck";
pub const DISCRIMINATOR_CKPT: &str = "discriminator.ck";
pub const TRAIN_LOG: &str = "train_log.csv";

/// Usage and configuration problems exit with 1, everything else with 2.
#[derive(Debug)]
pub enum Failure {
    Config(anyhow::Error),
    Runtime(anyhow::Error),
}

impl Failure {
    pub fn error(&self) -> &anyhow::Error {
        match self {
            Failure::Config(e) | Failure::Runtime(e) => e,
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Config(_) => 1,
            Failure::Runtime(_) => 2,
        }
    }
}

type Outcome<T = ()> = Result<T, Failure>;

trait Classify<T> {
    fn config(self) -> Outcome<T>;
    fn runtime(self) -> Outcome<T>;
}

impl<T, E: Into<anyhow::Error>> Classify<T> for Result<T, E> {
    fn config(self) -> Outcome<T> {
        self.map_err(|e| Failure::Config(e.into()))
    }

    /// Invalid-input errors from the library still count as configuration
    /// problems.
    fn runtime(self) -> Outcome<T> {
        self.map_err(|e| {
            let e = e.into();
            match e.downcast_ref::<ganaug::Error>() {
                Some(ganaug::Error::InvalidInput(_)) => Failure::Config(e),
                _ => Failure::Runtime(e),
            }
        })
    }
}

fn open_out_dir(dir: &Path) -> Outcome {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display())).runtime()?;
    logger::attach(dir).context("opening run log").runtime()
}

fn require_file(path: &Path, what: &str) -> Outcome {
    if path.is_file() {
        Ok(())
    } else {
        Err(Failure::Config(anyhow!("{what} not found: {}", path.display())))
    }
}

fn load_or_generate(data: Option<&Path>, phantom: &PhantomConfig) -> Outcome<PatchPool> {
    match data {
        Some(dir) => {
            if !dir.is_dir() {
                return Err(Failure::Config(anyhow!("data directory not found: {}", dir.display())));
            }
            let pool = load_patch_dir(dir).with_context(|| format!("loading {}", dir.display())).runtime()?;
            info!("loaded {} patches from {}", pool.len(), dir.display());
            Ok(pool)
        }
        None => {
            phantom.validate().config()?;
            info!(
                "generating phantom data: {} masses, {} normals, S={}, seed {}",
                phantom.n_positive, phantom.n_negative, phantom.image_size, phantom.seed
            );
            generate_phantom_dataset(phantom).runtime()
        }
    }
}

pub fn phantom(a: PhantomArgs) -> Outcome {
    let mut cfg = RunConfig::load_or_default(a.config.as_deref()).config()?;
    let p = &mut cfg.phantom;
    p.n_positive = a.n_pos.unwrap_or(p.n_positive);
    p.n_negative = a.n_neg.unwrap_or(p.n_negative);
    p.image_size = a.size.unwrap_or(p.image_size);
    p.seed = a.seed.unwrap_or(p.seed);
    p.validate().config()?;
    cfg.paths.out_dir = Some(a.out.clone());

    open_out_dir(&a.out)?;
    let pool = generate_phantom_dataset(&cfg.phantom).runtime()?;
    save_patch_dir(&pool, &a.out).runtime()?;
    cfg.write_resolved(&a.out).runtime()?;
    info!("wrote {} patches to {}", pool.len(), a.out.display());
    Ok(())
}

#[derive(Debug, Deserialize)]
struct BoxRow {
    x: usize,
    y: usize,
    width: usize,
    height: usize,
}

fn read_boxes(path: &Path) -> anyhow::Result<Vec<Rect>> {
    let mut reader = csv::Reader::from_path(path)?;
    reader
        .deserialize::<BoxRow>()
        .map(|row| {
            let r = row?;
            Ok(Rect { x: r.x, y: r.y, width: r.width, height: r.height })
        })
        .collect()
}

pub fn extract(a: ExtractArgs) -> Outcome {
    let mut cfg = RunConfig::load_or_default(a.config.as_deref()).config()?;
    let e = &mut cfg.extract;
    e.image = a.image.or(e.image.take());
    e.boxes = a.boxes.or(e.boxes.take());
    e.mask = a.mask.or(e.mask.take());
    e.patch_size = a.patch_size.unwrap_or(e.patch_size);
    e.n_negative = a.n_negative.unwrap_or(e.n_negative);
    e.seed = a.seed.unwrap_or(e.seed);
    let e = cfg.extract.clone();
    let image_path = e.image.ok_or_else(|| Failure::Config(anyhow!("--image is required")))?;
    let boxes_path = e.boxes.ok_or_else(|| Failure::Config(anyhow!("--boxes is required")))?;
    require_file(&image_path, "image")?;
    require_file(&boxes_path, "box file")?;
    if let Some(m) = &e.mask {
        require_file(m, "mask")?;
    }
    cfg.paths.out_dir = Some(a.out.clone());

    open_out_dir(&a.out)?;
    let raw = read_pgm(&image_path).runtime()?;
    let values: Vec<f64> = raw.pixels.iter().map(|&v| v as f64).collect();
    let pixels: Vec<f32> = histogram_normalize(&values).runtime()?.into_iter().map(|v| v as f32).collect();
    let boxes = read_boxes(&boxes_path).with_context(|| format!("reading {}", boxes_path.display())).config()?;
    let mask = match &e.mask {
        Some(m) => {
            let m = read_pgm(m).runtime()?;
            if (m.width, m.height) != (raw.width, raw.height) {
                return Err(Failure::Config(anyhow!("mask and image dimensions differ")));
            }
            m.pixels.iter().map(|&v| v > 0.0).collect()
        }
        None => vec![true; raw.width * raw.height],
    };
    let id = image_path.file_stem().and_then(|s| s.to_str()).unwrap_or("image").to_owned();
    let image = AnnotatedImage::new(id, raw.height, raw.width, pixels, boxes, mask).runtime()?;
    let pool = extract_patches(&image, e.patch_size, e.n_negative, e.seed).runtime()?;
    save_patch_dir(&pool, &a.out).runtime()?;
    cfg.write_resolved(&a.out).runtime()?;
    info!(
        "wrote {} mass and {} normal patches to {}",
        pool.count(Label::Mass),
        pool.count(Label::Normal),
        a.out.display()
    );
    Ok(())
}

fn write_train_log(rows: &[TrainLogRow], path: &Path) -> anyhow::Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn train_gan(a: TrainGanArgs) -> Outcome {
    let mut cfg = RunConfig::load_or_default(a.config.as_deref()).config()?;
    let g = &mut cfg.gan;
    g.epochs = a.epochs.unwrap_or(g.epochs);
    g.batch_size = a.batch_size.unwrap_or(g.batch_size);
    g.base_channels = a.base_channels.or(g.base_channels);
    g.sample_grid_every = a.sample_every.unwrap_or(g.sample_grid_every);
    g.seed = a.seed.unwrap_or(g.seed);
    g.validate().config()?;
    cfg.paths.data_dir = a.data.or(cfg.paths.data_dir.take());
    cfg.paths.out_dir = Some(a.out.clone());

    open_out_dir(&a.out)?;
    let masses = load_or_generate(cfg.paths.data_dir.as_deref(), &cfg.phantom)?.with_label(Label::Mass);
    info!("training on {} mass patches for {} epochs", masses.len(), cfg.gan.epochs);
    let outcome = ganaug::gan::train_gan(&cfg.gan, &masses).runtime()?;
    for row in &outcome.log {
        info!(
            "epoch {}: L_D {:.4} L_G {:.4} D(x) {:.3} D(G(z)) {:.3} ({:.1}s)",
            row.epoch, row.loss_d, row.loss_g, row.d_real_mean, row.d_fake_mean, row.wall_seconds
        );
    }
    save_checkpoint(&outcome.generator, a.out.join(GENERATOR_CKPT)).runtime()?;
    save_checkpoint(&outcome.discriminator, a.out.join(DISCRIMINATOR_CKPT)).runtime()?;
    write_train_log(&outcome.log, &a.out.join(TRAIN_LOG)).runtime()?;
    for grid in &outcome.grids {
        write_pgm(a.out.join(grid.file_name()), grid.side, grid.side, &grid.pixels).runtime()?;
    }
    cfg.paths.checkpoint = Some(a.out.join(GENERATOR_CKPT));
    cfg.write_resolved(&a.out).runtime()?;
    info!("{} steps; checkpoints in {}", outcome.steps, a.out.display());
    Ok(())
}

pub fn synth(a: SynthArgs) -> Outcome {
    let mut cfg = RunConfig::load_or_default(a.config.as_deref()).config()?;
    cfg.synth.n = a.n.unwrap_or(cfg.synth.n);
    cfg.synth.seed = a.seed.unwrap_or(cfg.synth.seed);
    cfg.paths.checkpoint = a.ckpt.or(cfg.paths.checkpoint.take());
    let ckpt: PathBuf =
        cfg.paths.checkpoint.clone().ok_or_else(|| Failure::Config(anyhow!("--ckpt is required")))?;
    require_file(&ckpt, "checkpoint")?;
    if cfg.synth.n == 0 {
        return Err(Failure::Config(anyhow!("--n must be at least 1")));
    }
    cfg.paths.out_dir = Some(a.out.clone());

    open_out_dir(&a.out)?;
    let generator = load_checkpoint(&ckpt).with_context(|| format!("loading {}", ckpt.display())).runtime()?;
    let pool = synthesize(&generator, cfg.synth.n, cfg.synth.seed).runtime()?;
    save_patch_dir(&pool, &a.out).runtime()?;
    cfg.write_resolved(&a.out).runtime()?;
    info!("wrote {} synthetic patches to {}", pool.len(), a.out.display());
    Ok(())
}

pub fn eval_matrix(a: EvalMatrixArgs) -> Outcome {
    let mut cfg = RunConfig::load(&a.config).config()?;
    cfg.matrix.master_seed = a.seed.unwrap_or(cfg.matrix.master_seed);
    cfg.paths.data_dir = a.data.or(cfg.paths.data_dir.take());
    cfg.paths.out_dir = a.out.or(cfg.paths.out_dir.take());
    let out = cfg.paths.out_dir.clone().ok_or_else(|| Failure::Config(anyhow!("--out or paths.out_dir is required")))?;
    if a.jobs == 0 {
        return Err(Failure::Config(anyhow!("--jobs must be at least 1")));
    }
    let matrix = cfg.matrix_config();
    matrix.validate().config()?;

    open_out_dir(&out)?;
    let pool = load_or_generate(cfg.paths.data_dir.as_deref(), &cfg.phantom)?;
    let pools = DataPools::from_pool(&pool, matrix.split_fractions, matrix.master_seed).runtime()?;
    info!(
        "pools: {} train masses, {} train normals, {} validation, {} test",
        pools.train_positive.len(),
        pools.train_negative.len(),
        pools.validation.len(),
        pools.test.len()
    );
    let run = run_matrix(&matrix, &pools, a.jobs).runtime()?;
    for (r, gan_log) in run.gan_logs.iter().enumerate().filter(|(_, l)| !l.is_empty()) {
        write_train_log(gan_log, &out.join(format!("gan_log_rep{r}.csv"))).runtime()?;
    }
    let files = emit_report(&run.records, &out).runtime()?;
    cfg.write_resolved(&out).runtime()?;
    info!("{} records; report in {}", run.records.len(), files.results.display());
    Ok(())
}

pub fn report(a: ReportArgs) -> Outcome {
    require_file(&a.results, "results file")?;
    open_out_dir(&a.out)?;
    let records = read_results_csv(&a.results).runtime()?;
    let files = emit_report(&records, &a.out).runtime()?;
    info!("summary and plot written to {}", files.summary.parent().unwrap_or(&a.out).display());
    Ok(())
}
