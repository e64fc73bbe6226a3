use std::fs;
use std::io::{self, BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use sks_core::affine::{DEFAULT_AFFINE_THRESH, DEFAULT_SIMILARITY_THRESH};
use sks_core::bench::run_bench;
use sks_core::datagen::{generate, read_dataset, write_dataset, PerturbationSpec, Regime};
use sks_core::metrics::evaluate;
use sks_core::{
    classify, compose_sks, decompose_sks, dlt_four_point, kernel_to_angular_offsets,
    quartile_summary, ransac_homography, sks_four_point, AngularOffsets, CorrespondenceSet,
    Error, FiveNumberSummary, Homography3, HomographyParams8, SquareConfig, TransformClass,
};

#[derive(Parser)]
#[command(name = "sks", version, about = "Homography solving and SKS parameterization")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Sks,
    Dlt,
    Ransac,
}

#[derive(Clone, Copy, ValueEnum)]
enum RegimeArg {
    Projective,
    Affine,
    Similarity,
}

impl From<RegimeArg> for Regime {
    fn from(r: RegimeArg) -> Self {
        match r {
            RegimeArg::Projective => Regime::Projective,
            RegimeArg::Affine => Regime::Affine,
            RegimeArg::Similarity => Regime::Similarity,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Estimate a homography from a correspondence file.
    Solve {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum, default_value = "sks")]
        method: Method,
        #[arg(long, default_value_t = 1000)]
        iters: usize,
        #[arg(long, default_value_t = 3.0)]
        thresh: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Split a homography into similarity and kernel parameters.
    Decompose {
        #[arg(long)]
        h: PathBuf,
        #[arg(long)]
        cfg: PathBuf,
        #[arg(long, default_value_t = DEFAULT_AFFINE_THRESH)]
        thresh1: f64,
        #[arg(long, default_value_t = DEFAULT_SIMILARITY_THRESH)]
        thresh2: f64,
    },
    /// Build a homography from eight parameters.
    Compose {
        #[arg(long)]
        params: PathBuf,
        #[arg(long)]
        cfg: PathBuf,
    },
    /// Write a synthetic dataset as JSON lines.
    Generate {
        #[arg(long, value_enum)]
        regime: RegimeArg,
        #[arg(long)]
        count: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 128)]
        size: u32,
        #[arg(long, default_value_t = 32.0)]
        max_offset: f64,
    },
    /// Score predictions against a dataset.
    Evaluate {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        pred: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        summary: Option<PathBuf>,
    },
    /// Time parameter composition against the DLT solver.
    Bench {
        #[arg(long)]
        trials: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 5)]
        runs: usize,
        #[arg(long)]
        json: Option<PathBuf>,
    },
}

#[derive(Serialize)]
struct DecomposeOutput {
    params: HomographyParams8,
    angular: AngularOffsets,
    class: TransformClass,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum ParamsInput {
    Wrapped { params: HomographyParams8 },
    Bare(HomographyParams8),
}

#[derive(Deserialize)]
#[serde(untagged)]
enum Prediction {
    Matrix {
        id: usize,
        #[serde(rename = "H")]
        h: Homography3,
    },
    Params {
        id: usize,
        params: HomographyParams8,
    },
}

#[derive(Serialize)]
struct Summary {
    count: usize,
    ace_po: FiveNumberSummary,
    ace_ao: FiveNumberSummary,
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, Error> {
    let text = fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| Error::Schema {
        line: e.line(),
        message: format!("{}: {e}", path.display()),
    })
}

fn print_json<T: Serialize>(value: &T) -> Result<(), Error> {
    let mut out = io::stdout().lock();
    serde_json::to_writer(&mut out, value)?;
    writeln!(out)?;
    Ok(())
}

fn solve(input: &Path, method: Method, iters: usize, thresh: f64, seed: u64) -> Result<(), Error> {
    let corr: CorrespondenceSet = read_json(input)?;
    let h = match method {
        Method::Sks => sks_four_point(&corr)?,
        Method::Dlt => dlt_four_point(&corr)?,
        Method::Ransac => ransac_homography(&corr, iters, thresh, seed)?.homography,
    };
    print_json(&h)
}

fn decompose(h: &Path, cfg: &Path, thresh1: f64, thresh2: f64) -> Result<(), Error> {
    let h: Homography3 = read_json(h)?;
    let cfg: SquareConfig = read_json(cfg)?;
    let params = decompose_sks(&h, &cfg)?;
    print_json(&DecomposeOutput {
        params,
        angular: kernel_to_angular_offsets(&params.ker),
        class: classify(&params.ker, thresh1, thresh2),
    })
}

fn compose(params: &Path, cfg: &Path) -> Result<(), Error> {
    let params = match read_json::<ParamsInput>(params)? {
        ParamsInput::Wrapped { params } | ParamsInput::Bare(params) => params,
    };
    let cfg: SquareConfig = read_json(cfg)?;
    print_json(&compose_sks(&params, &cfg)?)
}

fn read_predictions(path: &Path, n: usize) -> Result<Vec<Option<Prediction>>, Error> {
    let reader = BufReader::new(fs::File::open(path)?);
    let mut preds: Vec<Option<Prediction>> = (0..n).map(|_| None).collect();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let schema = |message: String| Error::Schema { line: i + 1, message };
        let p: Prediction = serde_json::from_str(&line).map_err(|e| schema(e.to_string()))?;
        let id = match &p {
            Prediction::Matrix { id, .. } | Prediction::Params { id, .. } => *id,
        };
        if id >= n {
            return Err(schema(format!("sample id {id} out of range (dataset has {n})")));
        }
        if preds[id].is_some() {
            return Err(schema(format!("duplicate prediction for sample id {id}")));
        }
        preds[id] = Some(p);
    }
    Ok(preds)
}

fn evaluate_cmd(data: &Path, pred: &Path, out: &Path, summary: Option<&Path>) -> Result<(), Error> {
    let samples = read_dataset(data)?;
    if samples.is_empty() {
        return Err(Error::EmptyInput);
    }
    let preds = read_predictions(pred, samples.len())?;
    let mut writer = csv::Writer::from_path(out).map_err(csv_error)?;
    writer
        .write_record(["sample_id", "ace_po", "ace_ao"])
        .map_err(csv_error)?;
    let (mut po, mut ao) = (Vec::new(), Vec::new());
    for (id, (sample, p)) in samples.iter().zip(preds).enumerate() {
        let h_est = match p {
            Some(Prediction::Matrix { h, .. }) => h,
            Some(Prediction::Params { params, .. }) => compose_sks(&params, &sample.cfg)?,
            None => {
                return Err(Error::Schema {
                    line: 0,
                    message: format!("no prediction for sample id {id}"),
                })
            }
        };
        let rec = evaluate(&h_est, &sample.gt_homography, &sample.cfg)?;
        writer
            .write_record([id.to_string(), rec.ace_po.to_string(), rec.ace_ao.to_string()])
            .map_err(csv_error)?;
        po.push(rec.ace_po);
        ao.push(rec.ace_ao);
    }
    writer.flush()?;
    let s = Summary {
        count: po.len(),
        ace_po: quartile_summary(&po)?,
        ace_ao: quartile_summary(&ao)?,
    };
    if let Some(path) = summary {
        fs::write(path, serde_json::to_string_pretty(&s)? + "\n")?;
    }
    print_json(&s)
}

fn csv_error(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(e) => Error::Io(e),
        other => Error::Io(io::Error::other(format!("{other:?}"))),
    }
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Solve { input, method, iters, thresh, seed } => {
            solve(&input, method, iters, thresh, seed)
        }
        Command::Decompose { h, cfg, thresh1, thresh2 } => decompose(&h, &cfg, thresh1, thresh2),
        Command::Compose { params, cfg } => compose(&params, &cfg),
        Command::Generate { regime, count, seed, out, size, max_offset } => {
            let spec = PerturbationSpec {
                image_size: size,
                max_offset,
                regime: regime.into(),
                count,
                seed,
            };
            let samples = generate(&spec)?;
            write_dataset(&samples, &out)
        }
        Command::Evaluate { data, pred, out, summary } => {
            evaluate_cmd(&data, &pred, &out, summary.as_deref())
        }
        Command::Bench { trials, seed, runs, json } => {
            let report = run_bench(trials, runs, seed)?;
            print!("{}", report.to_table());
            if let Some(path) = json {
                fs::write(path, serde_json::to_string_pretty(&report)? + "\n")?;
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_input_error() {
                ExitCode::from(2)
            } else {
                ExitCode::from(3)
            }
        }
    }
}
