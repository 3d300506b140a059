//! Dataset ingestion, normalization and batching.

pub mod idx;

pub use idx::{
    load_idx_images, load_idx_labels, parse_idx_images, parse_idx_labels, serialize_idx_images,
    serialize_idx_labels,
};

use crate::error::{Error, Result};
use crate::numerics::{Matrix, Rng};

/// Labeled image collection. Images are stored flat, one row per sample;
/// `image_shape` keeps the (rows, cols) layout for conv networks.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    images: Matrix,
    labels: Vec<usize>,
    image_shape: Option<(usize, usize)>,
    /// (mean, std) that produced the current pixel values, if normalized.
    pub normalization: Option<(f64, f64)>,
}

impl Dataset {
    pub fn from_parts(images: Matrix, labels: Vec<usize>) -> Result<Self> {
        if images.rows() != labels.len() {
            return Err(Error::Shape(format!(
                "{} images vs {} labels",
                images.rows(),
                labels.len()
            )));
        }
        Ok(Dataset {
            images,
            labels,
            image_shape: None,
            normalization: None,
        })
    }

    /// Load an IDX image/label file pair.
    pub fn load_idx(images_path: &str, labels_path: &str) -> Result<Self> {
        let (images, rows, cols) = load_idx_images(images_path)?;
        let labels = load_idx_labels(labels_path)?;
        if images.rows() != labels.len() {
            return Err(Error::Format {
                offset: 8,
                message: format!(
                    "{} images in {images_path} but {} labels in {labels_path}",
                    images.rows(),
                    labels.len()
                ),
            });
        }
        if let Some(&bad) = labels.iter().find(|&&l| l > 9) {
            return Err(Error::Data(format!("label {bad} outside [0, 9]")));
        }
        Ok(Dataset {
            images,
            labels,
            image_shape: Some((rows, cols)),
            normalization: None,
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn features(&self) -> usize {
        self.images.cols()
    }

    pub fn images(&self) -> &Matrix {
        &self.images
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn image_shape(&self) -> Option<(usize, usize)> {
        self.image_shape
    }

    pub fn num_classes(&self) -> usize {
        self.labels.iter().copied().max().map_or(0, |m| m + 1)
    }

    /// Copy of the half-open row range [start, end).
    pub fn rows(&self, start: usize, end: usize) -> Result<(Matrix, Vec<usize>)> {
        if start > end || end > self.len() {
            return Err(Error::Parameter(format!(
                "row range {start}..{end} out of bounds for {} samples",
                self.len()
            )));
        }
        let idx: Vec<usize> = (start..end).collect();
        self.gather(&idx)
    }

    /// Copy of the given sample indices, in order.
    pub fn gather(&self, indices: &[usize]) -> Result<(Matrix, Vec<usize>)> {
        let mut data = Vec::with_capacity(indices.len() * self.features());
        let mut labels = Vec::with_capacity(indices.len());
        for &i in indices {
            if i >= self.len() {
                return Err(Error::Parameter(format!(
                    "sample index {i} out of bounds for {} samples",
                    self.len()
                )));
            }
            data.extend_from_slice(self.images.row(i));
            labels.push(self.labels[i]);
        }
        Ok((Matrix::from_vec(indices.len(), self.features(), data)?, labels))
    }

    /// Seeded random subset of n samples (without replacement).
    pub fn subset(&self, n: usize, seed: u64) -> Result<Dataset> {
        if n > self.len() {
            return Err(Error::Parameter(format!(
                "subset of {n} from {} samples",
                self.len()
            )));
        }
        let mut order: Vec<usize> = (0..self.len()).collect();
        Rng::from_seed(seed).shuffle(&mut order);
        order.truncate(n);
        let (images, labels) = self.gather(&order)?;
        Ok(Dataset {
            images,
            labels,
            image_shape: self.image_shape,
            normalization: self.normalization,
        })
    }

    /// Global scalar mean and population std over every pixel.
    pub fn pixel_stats(&self) -> Result<(f64, f64)> {
        let data = self.images.data();
        if data.is_empty() {
            return Err(Error::InsufficientData("dataset has no pixels".into()));
        }
        let n = data.len() as f64;
        let mean = data.iter().sum::<f64>() / n;
        let var = data.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
        Ok((mean, var.sqrt()))
    }
}

/// Shift and scale every pixel to (x - mean) / std. With `stats: None` the
/// statistics come from `dataset` itself (the training split); pass the
/// training stats explicitly to transform a test split the same way.
pub fn normalize(dataset: &Dataset, stats: Option<(f64, f64)>) -> Result<Dataset> {
    let (mean, std) = match stats {
        Some(s) => s,
        None => dataset.pixel_stats()?,
    };
    if !(std > 0.0) || !std.is_finite() || !mean.is_finite() {
        return Err(Error::Data(format!(
            "degenerate pixel statistics (mean {mean}, std {std})"
        )));
    }
    let mut images = dataset.images.clone();
    for v in images.data_mut() {
        *v = (*v - mean) / std;
    }
    Ok(Dataset {
        images,
        labels: dataset.labels.clone(),
        image_shape: dataset.image_shape,
        normalization: Some((mean, std)),
    })
}

/// Seeded shuffle of [0, n_subset) sample indices split into batches. The
/// final partial batch is kept.
pub fn subset_and_batch(
    dataset: &Dataset,
    n_subset: usize,
    batch_size: usize,
    seed: u64,
) -> Result<Vec<Vec<usize>>> {
    if n_subset > dataset.len() {
        return Err(Error::Parameter(format!(
            "subset of {n_subset} from {} samples",
            dataset.len()
        )));
    }
    if batch_size == 0 {
        return Err(Error::Parameter("batch_size must be >= 1".into()));
    }
    let mut order: Vec<usize> = (0..dataset.len()).collect();
    Rng::from_seed(seed).shuffle(&mut order);
    order.truncate(n_subset);
    Ok(order.chunks(batch_size).map(|c| c.to_vec()).collect())
}

/// N(0, 1) input matrix, reproducible from the seed.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticInput {
    pub values: Matrix,
    pub seed: u64,
}

pub fn synthetic_input(samples: usize, features: usize, seed: u64) -> Result<SyntheticInput> {
    let mut rng = Rng::from_seed(seed);
    let values = Matrix::from_vec(
        samples,
        features,
        rng.sample_gaussian(0.0, 1.0, samples * features)?,
    )?;
    Ok(SyntheticInput { values, seed })
}

/// Default data root: $SNNLAB_DATA_DIR, falling back to ./data.
pub fn data_dir() -> std::path::PathBuf {
    std::env::var_os("SNNLAB_DATA_DIR")
        .map(std::path::PathBuf::from)
        .unwrap_or_else(|| std::path::PathBuf::from("data"))
}
