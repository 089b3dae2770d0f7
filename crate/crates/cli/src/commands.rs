//! Command implementations shared by the binary and the integration tests.

use std::path::{Path, PathBuf};

use advpath_core::bezier::Setting;
use advpath_core::geometry::Norm;
use advpath_core::model::{train, Dataset, Mlp};
use advpath_core::rng::{derive_seed, Rng};
use anyhow::Context as _;

use crate::config::Config;
use crate::harness::{self, Context};
use crate::io::{self, DatasetManifest};
use crate::reports;

pub struct TrainOutput {
    pub dir: PathBuf,
    pub model_path: PathBuf,
    pub manifest_path: PathBuf,
    pub train_accuracy: f64,
    pub test_accuracy: f64,
}

/// Generates the dataset, trains the classifier, and saves both files.
pub fn cmd_train(config: &Config) -> anyhow::Result<TrainOutput> {
    let manifest = DatasetManifest {
        dim: config.dataset.dim,
        classes: config.dataset.classes,
        train_per_class: config.dataset.train_per_class,
        test_per_class: config.dataset.test_per_class,
        aux_per_class: config.dataset.aux_per_class,
        spread: config.dataset.spread,
        seed: derive_seed(config.seed, "dataset", 0),
    };
    let data = manifest.regenerate();
    let dims = config.model.dims(config.dataset.dim, config.dataset.classes);
    let model = Mlp::init(&dims, &mut Rng::new(derive_seed(config.seed, "model_init", 0)));
    let outcome = train(
        model,
        &data,
        config.model.epochs,
        config.model.lr,
        config.model.batch,
        &mut Rng::new(derive_seed(config.seed, "train", 0)),
    )?;
    let dir = io::fresh_run_dir(&config.out_dir, "train", config.seed)?;
    let model_path = dir.join("model.json");
    let manifest_path = dir.join("dataset.json");
    io::save_model(&outcome.model, &model_path)?;
    io::save_manifest(&manifest, &manifest_path)?;
    Ok(TrainOutput {
        dir,
        model_path,
        manifest_path,
        train_accuracy: outcome.train_accuracy,
        test_accuracy: outcome.test_accuracy,
    })
}

/// Default location of the trained artifacts: the unsuffixed train directory.
pub fn default_train_dir(config: &Config) -> PathBuf {
    config.out_dir.join(format!("train-{}", config.seed))
}

/// Loads the model and regenerates the dataset from the manifest.
pub fn load_trained(
    config: &Config,
    model_path: Option<&Path>,
    manifest_path: Option<&Path>,
) -> anyhow::Result<(Mlp, Dataset)> {
    let default_dir = default_train_dir(config);
    let model_path = model_path
        .map(Path::to_path_buf)
        .unwrap_or_else(|| default_dir.join("model.json"));
    let manifest_path = manifest_path
        .map(Path::to_path_buf)
        .unwrap_or_else(|| default_dir.join("dataset.json"));
    let model = io::load_model(&model_path).with_context(|| {
        format!(
            "no trained model at {} — run `advpath train` first or pass --model",
            model_path.display()
        )
    })?;
    let manifest = io::load_manifest(&manifest_path).with_context(|| {
        format!(
            "no dataset manifest at {} — run `advpath train` first or pass --data",
            manifest_path.display()
        )
    })?;
    anyhow::ensure!(
        manifest.dim == model.dims()[0],
        "model input dim {} does not match dataset dim {}",
        model.dims()[0],
        manifest.dim
    );
    Ok((model, manifest.regenerate()))
}

/// Trains in memory without touching the filesystem; used by tests that need
/// a (model, dataset) pair quickly.
pub fn train_in_memory(config: &Config) -> anyhow::Result<(Mlp, Dataset)> {
    let manifest = DatasetManifest {
        dim: config.dataset.dim,
        classes: config.dataset.classes,
        train_per_class: config.dataset.train_per_class,
        test_per_class: config.dataset.test_per_class,
        aux_per_class: config.dataset.aux_per_class,
        spread: config.dataset.spread,
        seed: derive_seed(config.seed, "dataset", 0),
    };
    let data = manifest.regenerate();
    let dims = config.model.dims(config.dataset.dim, config.dataset.classes);
    let model = Mlp::init(&dims, &mut Rng::new(derive_seed(config.seed, "model_init", 0)));
    let outcome = train(
        model,
        &data,
        config.model.epochs,
        config.model.lr,
        config.model.batch,
        &mut Rng::new(derive_seed(config.seed, "train", 0)),
    )?;
    Ok((outcome.model, data))
}

const ALL_SETTINGS: [Setting; 3] = [Setting::A, Setting::B, Setting::C];

pub fn cmd_connect(
    config: &Config,
    model: &Mlp,
    data: &Dataset,
    norm: Option<Norm>,
    linear: bool,
) -> anyhow::Result<PathBuf> {
    let ctx = Context { model, data, config };
    let report =
        harness::run_connectivity(&ctx, &ALL_SETTINGS, &harness::selected_norms(norm), linear);
    let dir = io::fresh_run_dir(&config.out_dir, "connect", config.seed)?;
    io::write_csv(
        &dir.join("connectivity.csv"),
        &reports::CONNECTIVITY_HEADER,
        &reports::connectivity_rows(&report.cells),
    )?;
    io::write_jsonl(&dir.join("connectivity.jsonl"), &report.raw)?;
    io::write_jsonl(&dir.join("paths.jsonl"), &report.paths)?;
    Ok(dir)
}

pub fn cmd_transfer(
    config: &Config,
    model: &Mlp,
    data: &Dataset,
    norm: Option<Norm>,
) -> anyhow::Result<PathBuf> {
    let ctx = Context { model, data, config };
    let report = harness::run_transfer(&ctx, &ALL_SETTINGS, &harness::selected_norms(norm));
    let dir = io::fresh_run_dir(&config.out_dir, "transfer", config.seed)?;
    io::write_csv(
        &dir.join("transfer.csv"),
        &reports::TRANSFER_HEADER,
        &reports::transfer_rows(&report.cells),
    )?;
    io::write_jsonl(&dir.join("transfer.jsonl"), &report.raw)?;
    Ok(dir)
}

pub fn cmd_aux(
    config: &Config,
    model: &Mlp,
    data: &Dataset,
    norm: Option<Norm>,
) -> anyhow::Result<PathBuf> {
    let ctx = Context { model, data, config };
    let norms = vec![norm.unwrap_or(Norm::Linf)];
    let report = harness::run_aux_ablation(&ctx, &ALL_SETTINGS, &norms);
    let dir = io::fresh_run_dir(&config.out_dir, "aux", config.seed)?;
    io::write_csv(&dir.join("aux.csv"), &reports::AUX_HEADER, &reports::aux_rows(&report.cells))?;
    io::write_jsonl(&dir.join("aux.jsonl"), &report.raw)?;
    Ok(dir)
}

pub fn cmd_converge(
    config: &Config,
    model: &Mlp,
    data: &Dataset,
    norm: Option<Norm>,
) -> anyhow::Result<PathBuf> {
    let ctx = Context { model, data, config };
    let report = harness::run_convergence(&ctx, &[Setting::A], norm.unwrap_or(Norm::Linf));
    let dir = io::fresh_run_dir(&config.out_dir, "converge", config.seed)?;
    io::write_csv(
        &dir.join("convergence_epochs.csv"),
        &reports::CONVERGENCE_HEADER,
        &reports::convergence_rows(&report.cells),
    )?;
    io::write_csv(
        &dir.join("convergence_density.csv"),
        &reports::DENSITY_HEADER,
        &reports::density_rows(&report.density),
    )?;
    io::write_jsonl(&dir.join("convergence.jsonl"), &report.raw)?;
    Ok(dir)
}

pub fn cmd_compare(
    config: &Config,
    model: &Mlp,
    data: &Dataset,
    norm: Option<Norm>,
) -> anyhow::Result<PathBuf> {
    let ctx = Context { model, data, config };
    let report = harness::run_ea_compare(&ctx, &harness::selected_norms(norm));
    let dir = io::fresh_run_dir(&config.out_dir, "compare", config.seed)?;
    io::write_csv(
        &dir.join("compare.csv"),
        &reports::COMPARE_HEADER,
        &reports::compare_rows(&report.cells),
    )?;
    io::write_jsonl(&dir.join("compare.jsonl"), &report.raw)?;
    Ok(dir)
}

pub fn cmd_obfuscated(
    config: &Config,
    model: &Mlp,
    data: &Dataset,
    norm: Option<Norm>,
    levels: Option<u32>,
) -> anyhow::Result<PathBuf> {
    let ctx = Context { model, data, config };
    let report = harness::run_obfuscated(&ctx, norm.unwrap_or(Norm::Linf), levels);
    let dir = io::fresh_run_dir(&config.out_dir, "obfuscated", config.seed)?;
    io::write_csv(
        &dir.join("obfuscated.csv"),
        &reports::OBFUSCATED_HEADER,
        &reports::obfuscated_rows(&report.cells),
    )?;
    io::write_jsonl(&dir.join("obfuscated.jsonl"), &report.raw)?;
    Ok(dir)
}
