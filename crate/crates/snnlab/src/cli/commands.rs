use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use crate::cli::config::RunConfig;
use crate::cli::csv::{write_csv, Cell};
use crate::cli::svg::{write_svg, Chart, Series};
use crate::data::{self, normalize, Dataset};
use crate::error::{Error, Result};
use crate::init::{initialize_network, InitScheme};
use crate::propagation::{run_multi_step, run_single_step, PropagationConfig, SimTrace};
use crate::snn::{LifParams, NetworkSpec};
use crate::training::{gradcheck_suite, train, SurrogateSpec, TrainConfig};

const PROPAGATION_COLUMNS: [&str; 13] = [
    "run_id",
    "scheme",
    "theta",
    "beta",
    "width",
    "depth",
    "layer",
    "t",
    "seed",
    "var_u",
    "spike_count",
    "skewness",
    "excess_kurtosis",
];

const TRAINING_COLUMNS: [&str; 7] = [
    "run_id",
    "scheme",
    "epoch",
    "train_loss",
    "train_acc",
    "test_acc",
    "lr",
];

fn ensure_output_dir(config: &RunConfig) -> Result<PathBuf> {
    let dir = PathBuf::from(&config.output_dir);
    std::fs::create_dir_all(&dir).map_err(|e| Error::io(dir.display().to_string(), e))?;
    Ok(dir)
}

fn header(config: &RunConfig, command: &str) -> Vec<String> {
    vec![
        format!("command: {command}"),
        format!("seed: {}", config.seed),
        format!("config: {}", config.canonical_json()),
    ]
}

fn propagation_rows(
    rows: &mut Vec<Vec<Cell>>,
    config: &RunConfig,
    scheme: &str,
    prop: &PropagationConfig,
    trace: &SimTrace,
) {
    for r in &trace.records {
        if r.layer == 0 {
            continue; // the encoder stage is input plumbing, not a network layer
        }
        rows.push(vec![
            Cell::Text(config.run_id.clone()),
            Cell::Text(scheme.to_string()),
            Cell::Float(prop.lif.theta),
            Cell::Float(prop.lif.beta),
            Cell::Int(prop.width as i64),
            Cell::Int(prop.depth as i64),
            Cell::Int(r.layer as i64),
            Cell::Int(r.t as i64),
            Cell::Int(r.seed as i64),
            Cell::Float(r.var_u),
            Cell::Int(r.spike_count as i64),
            Cell::Float(r.skewness),
            Cell::Float(r.excess_kurtosis),
        ]);
    }
}

/// Per-layer mean and std over seeds of the per-seed time average.
fn layer_profile(trace: &SimTrace, metric: impl Fn(&crate::propagation::TraceRecord) -> f64) -> Vec<(f64, f64, f64)> {
    let mut out = Vec::new();
    for layer in 1..=trace.depth {
        let mut per_seed: BTreeMap<u64, (f64, usize)> = BTreeMap::new();
        for r in trace.records.iter().filter(|r| r.layer == layer) {
            let e = per_seed.entry(r.seed).or_insert((0.0, 0));
            e.0 += metric(r);
            e.1 += 1;
        }
        let vals: Vec<f64> = per_seed.values().map(|&(s, n)| s / n as f64).collect();
        let n = vals.len() as f64;
        let mean = vals.iter().sum::<f64>() / n;
        let var = vals.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
        out.push((layer as f64, mean, var.sqrt()));
    }
    out
}

fn profile_series(label: &str, profile: &[(f64, f64, f64)]) -> Series {
    Series {
        label: label.to_string(),
        points: profile.iter().map(|&(x, m, _)| (x, m)).collect(),
        band: profile.iter().map(|&(x, m, s)| (x, m - s, m + s)).collect(),
    }
}

fn metric_chart(
    config: &RunConfig,
    title: &str,
    y_label: &str,
    series: Vec<Series>,
) -> Chart {
    Chart {
        title: title.to_string(),
        x_label: "layer".into(),
        y_label: y_label.to_string(),
        series,
        metadata: format!("seed: {}; config: {}", config.seed, config.canonical_json()),
    }
}

/// Depth propagation for each configured scheme: one CSV, one SVG per metric.
pub fn cmd_propagate(config: &RunConfig) -> Result<Vec<PathBuf>> {
    let dir = ensure_output_dir(config)?;
    let section = &config.propagate;
    if section.schemes.is_empty() {
        return Err(Error::Config("propagate.schemes must not be empty".into()));
    }
    let mut rows = Vec::new();
    let mut traces: Vec<(String, SimTrace)> = Vec::new();
    for name in &section.schemes {
        let scheme = InitScheme::from_name(name)?;
        let prop = PropagationConfig {
            depth: section.depth,
            width: section.width,
            t_steps: section.t_steps,
            lif: LifParams::new(section.beta, section.theta, section.effective_reset())?,
            scheme,
            seeds: section.seeds,
            base_seed: config.seed,
        };
        let trace = if section.t_steps == 1 {
            run_single_step(&prop)?
        } else {
            run_multi_step(&prop)?
        };
        propagation_rows(&mut rows, config, name, &prop, &trace);
        traces.push((name.clone(), trace));
    }

    let csv_path = dir.join(format!("{}_propagate.csv", config.run_id));
    write_csv(&csv_path, &header(config, "propagate"), &PROPAGATION_COLUMNS, &rows)?;
    let mut outputs = vec![csv_path];

    let metrics: [(&str, &str, fn(&crate::propagation::TraceRecord) -> f64); 4] = [
        ("var_u", "Var[u]", |r| r.var_u),
        ("spike_count", "spike count", |r| r.spike_count as f64),
        ("skewness", "skewness", |r| r.skewness),
        ("excess_kurtosis", "excess kurtosis", |r| r.excess_kurtosis),
    ];
    let n_metrics = if section.t_steps > 1 { 4 } else { 2 };
    for (key, label, metric) in metrics.iter().take(n_metrics) {
        let series: Vec<Series> = traces
            .iter()
            .map(|(name, trace)| profile_series(name, &layer_profile(trace, metric)))
            .collect();
        if series.iter().all(|s| s.points.iter().all(|p| !p.1.is_finite())) {
            continue;
        }
        let chart = metric_chart(
            config,
            &format!("{label} across layers"),
            label,
            series,
        );
        let path = dir.join(format!("{}_propagate_{key}.svg", config.run_id));
        write_svg(&path, &chart)?;
        outputs.push(path);
    }
    Ok(outputs)
}

/// Finite-size sweep: one CSV, one SVG panel per width with a theta line each.
pub fn cmd_sweep(config: &RunConfig) -> Result<Vec<PathBuf>> {
    let dir = ensure_output_dir(config)?;
    let section = &config.sweep;
    if section.widths.is_empty() || section.thetas.is_empty() {
        return Err(Error::Config("sweep.widths and sweep.thetas must not be empty".into()));
    }
    let scheme = InitScheme::from_name(&section.scheme)?;
    let base = PropagationConfig {
        depth: section.depth,
        width: 1,
        t_steps: 1,
        lif: LifParams::new(section.beta, 1.0, crate::snn::ResetMode::None)?,
        scheme,
        seeds: section.seeds,
        base_seed: config.seed,
    };
    let runs = crate::propagation::run_finite_size_sweep(&section.widths, &section.thetas, &base)?;

    let mut rows = Vec::new();
    for (width, theta, trace) in &runs {
        let mut prop = base.clone();
        prop.width = *width;
        prop.lif.theta = *theta;
        propagation_rows(&mut rows, config, &section.scheme, &prop, trace);
    }
    let csv_path = dir.join(format!("{}_sweep.csv", config.run_id));
    write_csv(&csv_path, &header(config, "sweep"), &PROPAGATION_COLUMNS, &rows)?;
    let mut outputs = vec![csv_path];

    for &width in &section.widths {
        let series: Vec<Series> = runs
            .iter()
            .filter(|(w, _, _)| *w == width)
            .map(|(_, theta, trace)| {
                profile_series(
                    &format!("theta={theta}"),
                    &layer_profile(trace, |r| r.var_u),
                )
            })
            .collect();
        let chart = metric_chart(
            config,
            &format!("Var[u] across layers, width {width}"),
            "Var[u]",
            series,
        );
        let path = dir.join(format!("{}_sweep_w{width}.svg", config.run_id));
        write_svg(&path, &chart)?;
        outputs.push(path);
    }
    Ok(outputs)
}

fn mnist_pair(dir: &Path, images: &str, labels: &str) -> Result<Dataset> {
    let img = dir.join(images);
    let lab = dir.join(labels);
    for p in [&img, &lab] {
        if !p.exists() {
            return Err(Error::Data(format!(
                "{} not found; point SNNLAB_DATA_DIR at a directory with the MNIST IDX files \
                 (current data dir: {})",
                p.display(),
                dir.display()
            )));
        }
    }
    Dataset::load_idx(img.to_str().unwrap(), lab.to_str().unwrap())
}

fn synthetic_classification(samples: usize, features: usize, classes: usize, seed: u64) -> Result<Dataset> {
    let input = data::synthetic_input(samples, features, seed)?;
    let mut rng = crate::numerics::Rng::from_seed(seed).substream(1);
    let labels: Vec<usize> = (0..samples)
        .map(|_| (rng.next_u64() % classes as u64) as usize)
        .collect();
    Dataset::from_parts(input.values, labels)
}

/// Load, subset and normalize the train/test splits named by the config.
pub fn load_training_data(config: &RunConfig) -> Result<(Dataset, Dataset)> {
    let section = &config.train;
    match section.dataset.as_str() {
        "mnist" => {
            let root = data::data_dir();
            let train_raw = mnist_pair(&root, "train-images-idx3-ubyte", "train-labels-idx1-ubyte")?;
            let test_raw = mnist_pair(&root, "t10k-images-idx3-ubyte", "t10k-labels-idx1-ubyte")?;
            let train_sub = train_raw.subset(section.subset.min(train_raw.len()), config.seed)?;
            let test_sub = test_raw.subset(section.test_subset.min(test_raw.len()), config.seed + 1)?;
            let stats = train_sub.pixel_stats()?;
            Ok((
                normalize(&train_sub, None)?,
                normalize(&test_sub, Some(stats))?,
            ))
        }
        "synthetic" => {
            let features = 64;
            Ok((
                synthetic_classification(section.subset, features, section.classes, config.seed)?,
                synthetic_classification(section.test_subset, features, section.classes, config.seed + 1)?,
            ))
        }
        other => Err(Error::Config(format!(
            "train.dataset must be 'mnist' or 'synthetic', got '{other}'"
        ))),
    }
}

/// Train one MLP per scheme on the configured dataset; CSV plus an
/// accuracy-vs-epoch chart.
pub fn cmd_train(config: &RunConfig) -> Result<Vec<PathBuf>> {
    let dir = ensure_output_dir(config)?;
    let section = &config.train;
    if section.schemes.is_empty() {
        return Err(Error::Config("train.schemes must not be empty".into()));
    }
    let (train_ds, test_ds) = load_training_data(config)?;
    let lif = LifParams::new(section.beta, section.theta, crate::snn::ResetMode::Soft)?;
    let net = NetworkSpec::mlp(
        train_ds.features(),
        section.width,
        section.hidden_layers,
        section.classes,
        lif,
    );
    let train_config = TrainConfig {
        epochs: section.epochs,
        batch_size: section.batch_size,
        t_steps: section.t_steps,
        lr: section.lr,
        schedule: section.schedule,
        seed: config.seed,
        surrogate: SurrogateSpec {
            slope: section.surrogate_slope,
        },
        detach_reset: section.detach_reset,
        ..TrainConfig::default()
    };

    let mut rows = Vec::new();
    let mut series = Vec::new();
    for name in &section.schemes {
        let scheme = InitScheme::from_name(name)?;
        let mut weights = initialize_network(&net, &scheme, config.seed)?;
        let log = train(&net, &mut weights, &train_config, &train_ds, Some(&test_ds))?;
        for e in &log.epochs {
            rows.push(vec![
                Cell::Text(config.run_id.clone()),
                Cell::Text(name.clone()),
                Cell::Int(e.epoch as i64),
                Cell::Float(e.train_loss),
                Cell::Float(e.train_accuracy),
                Cell::Float(e.test_accuracy.unwrap_or(f64::NAN)),
                Cell::Float(e.lr),
            ]);
        }
        series.push(Series {
            label: name.clone(),
            points: log
                .epochs
                .iter()
                .map(|e| (e.epoch as f64, e.train_accuracy))
                .collect(),
            band: vec![],
        });
        series.push(Series {
            label: format!("{name} (test)"),
            points: log
                .epochs
                .iter()
                .filter_map(|e| e.test_accuracy.map(|a| (e.epoch as f64, a)))
                .collect(),
            band: vec![],
        });
    }
    let csv_path = dir.join(format!("{}_train.csv", config.run_id));
    write_csv(&csv_path, &header(config, "train"), &TRAINING_COLUMNS, &rows)?;
    let chart = Chart {
        title: "accuracy by epoch".into(),
        x_label: "epoch".into(),
        y_label: "accuracy".into(),
        series,
        metadata: format!("seed: {}; config: {}", config.seed, config.canonical_json()),
    };
    let svg_path = dir.join(format!("{}_train_accuracy.svg", config.run_id));
    write_svg(&svg_path, &chart)?;
    Ok(vec![csv_path, svg_path])
}

/// Finite-difference gradient audit. Exit 0 on pass, 4 on failure.
pub fn cmd_gradcheck(config: &RunConfig) -> Result<i32> {
    let surrogate = SurrogateSpec {
        slope: config.gradcheck.surrogate_slope,
    };
    let report = gradcheck_suite(&surrogate, false)?;
    println!(
        "gradcheck: {} networks, {} parameters, max relative error {:.3e} -> {}",
        report.networks_checked,
        report.params_checked,
        report.max_relative_error,
        if report.passed() { "pass" } else { "FAIL" }
    );
    Ok(if report.passed() { 0 } else { 4 })
}
