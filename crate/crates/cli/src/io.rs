//! File formats: model weights, dataset manifest, path serialization, and
//! report writers (CSV summaries plus JSON-lines raw records).

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use advpath_core::bezier::BezierPath;
use advpath_core::geometry::{Budget, Norm};
use advpath_core::model::{Layer, Matrix, Mlp};
use advpath_core::vector::Vector;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("cannot access {path}: {source}")]
    File {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed {what} file {path}: {message}")]
    Malformed { what: &'static str, path: PathBuf, message: String },
    #[error("model file {path} declares dims {dims:?} but layer {layer} has {rows}x{cols} weights")]
    ShapeMismatch { path: PathBuf, dims: Vec<usize>, layer: usize, rows: usize, cols: usize },
}

/// On-disk model format: layer weights in row-major order.
#[derive(Debug, Serialize, Deserialize)]
struct ModelFile {
    dims: Vec<usize>,
    layers: Vec<LayerFile>,
    classes: usize,
}

#[derive(Debug, Serialize, Deserialize)]
struct LayerFile {
    w: Vec<f64>,
    b: Vec<f64>,
}

pub fn save_model(model: &Mlp, path: &Path) -> Result<(), IoError> {
    let file = ModelFile {
        dims: model.dims(),
        layers: model
            .layers()
            .iter()
            .map(|layer| LayerFile {
                w: layer.weights.as_slice().to_vec(),
                b: layer.bias.as_slice().to_vec(),
            })
            .collect(),
        classes: advpath_core::model::Classifier::class_count(model),
    };
    write_json(&file, path)
}

pub fn load_model(path: &Path) -> Result<Mlp, IoError> {
    let text = fs::read_to_string(path).map_err(|source| IoError::File { path: path.into(), source })?;
    let file: ModelFile = serde_json::from_str(&text).map_err(|e| IoError::Malformed {
        what: "model",
        path: path.into(),
        message: e.to_string(),
    })?;
    if file.dims.len() != file.layers.len() + 1 || file.dims.last() != Some(&file.classes) {
        return Err(IoError::Malformed {
            what: "model",
            path: path.into(),
            message: format!(
                "dims {:?} inconsistent with {} layers / {} classes",
                file.dims,
                file.layers.len(),
                file.classes
            ),
        });
    }
    let mut layers = Vec::with_capacity(file.layers.len());
    for (i, layer) in file.layers.iter().enumerate() {
        let (cols, rows) = (file.dims[i], file.dims[i + 1]);
        if layer.w.len() != rows * cols || layer.b.len() != rows {
            return Err(IoError::ShapeMismatch {
                path: path.into(),
                dims: file.dims.clone(),
                layer: i,
                rows,
                cols,
            });
        }
        layers.push(Layer {
            weights: Matrix::from_rows(rows, cols, layer.w.clone()),
            bias: Vector::new(layer.b.clone()),
        });
    }
    Ok(Mlp::from_layers(layers))
}

/// Parameters that deterministically regenerate a dataset.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct DatasetManifest {
    pub dim: usize,
    pub classes: usize,
    pub train_per_class: usize,
    pub test_per_class: usize,
    pub aux_per_class: usize,
    pub spread: f64,
    pub seed: u64,
}

impl DatasetManifest {
    pub fn regenerate(&self) -> advpath_core::model::Dataset {
        let spec = advpath_core::model::SyntheticSpec {
            dim: self.dim,
            class_count: self.classes,
            train_per_class: self.train_per_class,
            test_per_class: self.test_per_class,
            aux_per_class: self.aux_per_class,
            spread: self.spread,
        };
        advpath_core::model::make_synthetic(&mut advpath_core::rng::Rng::new(self.seed), &spec)
    }
}

pub fn save_manifest(manifest: &DatasetManifest, path: &Path) -> Result<(), IoError> {
    write_json(manifest, path)
}

pub fn load_manifest(path: &Path) -> Result<DatasetManifest, IoError> {
    let text = fs::read_to_string(path).map_err(|source| IoError::File { path: path.into(), source })?;
    serde_json::from_str(&text).map_err(|e| IoError::Malformed {
        what: "dataset manifest",
        path: path.into(),
        message: e.to_string(),
    })
}

/// Serialized Bézier path: endpoints, control point, and budget.
#[derive(Debug, Serialize, Deserialize)]
pub struct PathFile {
    pub delta1: Vec<f64>,
    pub delta2: Vec<f64>,
    pub control: Vec<f64>,
    pub norm: String,
    pub epsilon: f64,
}

impl PathFile {
    pub fn from_path(path: &BezierPath) -> Self {
        Self {
            delta1: path.delta1().as_slice().to_vec(),
            delta2: path.delta2().as_slice().to_vec(),
            control: path.control().as_slice().to_vec(),
            norm: path.budget().norm.name().to_string(),
            epsilon: path.budget().epsilon,
        }
    }

    pub fn into_path(self) -> anyhow::Result<BezierPath> {
        let norm = parse_norm(&self.norm)?;
        let budget = Budget::new(norm, self.epsilon);
        Ok(BezierPath::new(Vector::new(self.delta1), Vector::new(self.delta2), budget)
            .with_control(Vector::new(self.control)))
    }
}

pub fn parse_norm(name: &str) -> anyhow::Result<Norm> {
    match name {
        "linf" => Ok(Norm::Linf),
        "l2" => Ok(Norm::L2),
        "l1" => Ok(Norm::L1),
        other => anyhow::bail!("unknown norm {other:?} (expected linf, l2, or l1)"),
    }
}

fn write_json<T: Serialize>(value: &T, path: &Path) -> Result<(), IoError> {
    let text = serde_json::to_string(value).expect("serialization cannot fail");
    fs::write(path, text).map_err(|source| IoError::File { path: path.into(), source })
}

/// Creates a fresh run directory `<out>/<name>-<seed>` (suffixed `-2`, `-3`, …
/// if taken), so no report file is ever overwritten.
pub fn fresh_run_dir(out: &Path, name: &str, seed: u64) -> Result<PathBuf, IoError> {
    fs::create_dir_all(out).map_err(|source| IoError::File { path: out.into(), source })?;
    let base = format!("{name}-{seed}");
    for attempt in 0.. {
        let candidate = if attempt == 0 {
            out.join(&base)
        } else {
            out.join(format!("{base}-{}", attempt + 1))
        };
        match fs::create_dir(&candidate) {
            Ok(()) => return Ok(candidate),
            Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => continue,
            Err(source) => return Err(IoError::File { path: candidate, source }),
        }
    }
    unreachable!()
}

/// Writes CSV rows (first row is the header) joined by commas.
pub fn write_csv(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<(), IoError> {
    let mut out = String::new();
    out.push_str(&header.join(","));
    out.push('\n');
    for row in rows {
        out.push_str(&row.join(","));
        out.push('\n');
    }
    fs::write(path, out).map_err(|source| IoError::File { path: path.into(), source })
}

/// Writes one JSON object per line.
pub fn write_jsonl<T: Serialize>(path: &Path, records: &[T]) -> Result<(), IoError> {
    let mut file =
        fs::File::create(path).map_err(|source| IoError::File { path: path.into(), source })?;
    for record in records {
        let line = serde_json::to_string(record).expect("serialization cannot fail");
        file.write_all(line.as_bytes())
            .and_then(|()| file.write_all(b"\n"))
            .map_err(|source| IoError::File { path: path.into(), source })?;
    }
    Ok(())
}

/// Formats a float with full round-trip precision for CSV cells.
pub fn fmt_f64(value: f64) -> String {
    format!("{value}")
}

#[cfg(test)]
mod tests {
    use super::*;
    use advpath_core::rng::Rng;

    #[test]
    fn model_roundtrip_is_bit_exact() {
        let model = Mlp::init(&[4, 6, 3], &mut Rng::new(5));
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.json");
        save_model(&model, &path).unwrap();
        let loaded = load_model(&path).unwrap();
        assert_eq!(model, loaded);
    }

    #[test]
    fn truncated_model_file_is_an_error() {
        let model = Mlp::init(&[4, 6, 3], &mut Rng::new(5));
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.json");
        save_model(&model, &path).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        fs::write(&path, &text[..text.len() / 2]).unwrap();
        assert!(matches!(load_model(&path), Err(IoError::Malformed { .. })));
    }

    #[test]
    fn mismatched_dims_are_a_shape_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.json");
        fs::write(
            &path,
            r#"{"dims":[2,3],"layers":[{"w":[1.0,2.0],"b":[0.0,0.0,0.0]}],"classes":3}"#,
        )
        .unwrap();
        assert!(matches!(load_model(&path), Err(IoError::ShapeMismatch { .. })));
    }

    #[test]
    fn manifest_regenerates_identical_data() {
        let manifest = DatasetManifest {
            dim: 6,
            classes: 2,
            train_per_class: 5,
            test_per_class: 3,
            aux_per_class: 2,
            spread: 0.1,
            seed: 42,
        };
        assert_eq!(manifest.regenerate(), manifest.regenerate());
    }

    #[test]
    fn path_file_roundtrip() {
        let budget = Budget::new(Norm::L2, 0.5);
        let d1 = Vector::new(vec![0.3, 0.0, -0.2]);
        let d2 = Vector::new(vec![-0.1, 0.4, 0.0]);
        let path = BezierPath::new(d1, d2, budget).with_control(Vector::new(vec![0.9, -0.9, 0.1]));
        let file = PathFile::from_path(&path);
        let text = serde_json::to_string(&file).unwrap();
        let parsed: PathFile = serde_json::from_str(&text).unwrap();
        let restored = parsed.into_path().unwrap();
        assert_eq!(path, restored);
    }

    #[test]
    fn fresh_run_dirs_never_collide() {
        let dir = tempfile::tempdir().unwrap();
        let a = fresh_run_dir(dir.path(), "connect", 7).unwrap();
        let b = fresh_run_dir(dir.path(), "connect", 7).unwrap();
        assert_ne!(a, b);
        assert!(a.exists() && b.exists());
    }
}
