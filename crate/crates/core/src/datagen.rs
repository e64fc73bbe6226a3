//! Synthetic corner-perturbation datasets.
//!
//! Every sample draws from its own ChaCha8 stream keyed by `(seed, index)`,
//! so any subset of a dataset can be regenerated independently and in any
//! order.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::affine::three_offsets_to_affine_params;
use crate::error::{Error, Result};
use crate::geometry::{cross, CorrespondenceSet, Homography3, Point2, SquareConfig};
use crate::kernel::KernelParams;
use crate::similarity::{matrix_to_similarity, solve_similarity_two_points, translation_matrix};
use crate::sks::{compose_sks, decompose_sks, dlt_four_point, HomographyParams8};

/// Redraws allowed per sample index before giving up.
pub const MAX_REDRAWS: usize = 100;
/// Tolerance of the per-sample consistency checks.
const SAMPLE_TOL: f64 = 1e-9;
/// Minimum twice-area of a perturbed affine triple.
const MIN_TRIPLE_AREA: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    Projective,
    Affine,
    Similarity,
}

impl Regime {
    pub fn as_str(&self) -> &'static str {
        match self {
            Regime::Projective => "projective",
            Regime::Affine => "affine",
            Regime::Similarity => "similarity",
        }
    }
}

impl std::str::FromStr for Regime {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "projective" => Ok(Regime::Projective),
            "affine" => Ok(Regime::Affine),
            "similarity" => Ok(Regime::Similarity),
            other => Err(Error::InvalidConfig(format!("unknown regime {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerturbationSpec {
    pub image_size: u32,
    pub max_offset: f64,
    pub regime: Regime,
    pub count: usize,
    pub seed: u64,
}

impl PerturbationSpec {
    /// 128×128 frames with corners moved by up to ±32 px.
    pub fn new(regime: Regime, count: usize, seed: u64) -> Self {
        Self {
            image_size: 128,
            max_offset: 32.0,
            regime,
            count,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let half = self.image_size as f64 / 2.0;
        if !(self.max_offset > 0.0 && self.max_offset < half) {
            return Err(Error::InvalidConfig(format!(
                "max offset must lie in (0, {half}), got {}",
                self.max_offset
            )));
        }
        if self.count == 0 {
            return Err(Error::InvalidConfig("count must be at least 1".into()));
        }
        Ok(())
    }

    pub fn square(&self) -> Result<SquareConfig> {
        SquareConfig::for_image(self.image_size as f64)
    }
}

/// One synthetic image-pair geometry.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub cfg: SquareConfig,
    pub correspondences: CorrespondenceSet,
    pub gt_homography: Homography3,
    pub gt_params: HomographyParams8,
    pub regime: Regime,
}

impl Sample {
    /// Checks that the homography reproduces the correspondences and that
    /// the parameters compose back to the homography.
    pub fn check(&self) -> Result<()> {
        for (s, t) in self.correspondences.pairs() {
            let d = self.gt_homography.apply(*s)?.distance(t);
            if !(d <= SAMPLE_TOL * t.x.abs().max(t.y.abs()).max(1.0)) {
                return Err(Error::NotDecomposable(format!(
                    "ground truth misses a correspondence by {d:e}"
                )));
            }
        }
        let recomposed = compose_sks(&self.gt_params, &self.cfg)?;
        let d = recomposed.projective_distance(&self.gt_homography);
        if !(d <= SAMPLE_TOL) {
            return Err(Error::NotDecomposable(format!(
                "parameters recompose with distance {d:e}"
            )));
        }
        Ok(())
    }
}

/// Per-sample generator state.
pub fn sample_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

fn perturb(rng: &mut ChaCha8Rng, p: Point2, max: f64) -> Point2 {
    Point2::new(
        p.x + rng.random_range(-max..=max),
        p.y + rng.random_range(-max..=max),
    )
}

/// Strictly convex with consistent orientation.
pub fn is_convex(quad: &[Point2; 4]) -> bool {
    // M, N, P, Q are diagonal pairs; walk the boundary M → Q → N → P.
    let ring = [quad[0], quad[3], quad[1], quad[2]];
    let turns: Vec<f64> = (0..4)
        .map(|i| cross(ring[i], ring[(i + 1) % 4], ring[(i + 2) % 4]))
        .collect();
    turns.iter().all(|t| *t > 0.0) || turns.iter().all(|t| *t < 0.0)
}

fn build(
    cfg: SquareConfig,
    targets: [Point2; 4],
    h: Homography3,
    params: HomographyParams8,
    regime: Regime,
) -> Result<Sample> {
    let corners = cfg.corners();
    let correspondences =
        CorrespondenceSet::new(corners.iter().copied().zip(targets).collect())?;
    let sample = Sample {
        cfg,
        correspondences,
        gt_homography: h,
        gt_params: params,
        regime,
    };
    sample.check()?;
    Ok(sample)
}

fn draw_projective(cfg: SquareConfig, rng: &mut ChaCha8Rng, max: f64) -> Result<Sample> {
    let targets = cfg.corners().map(|c| perturb(rng, c, max));
    if !is_convex(&targets) {
        return Err(Error::DegenerateQuad("perturbed quad is not convex"));
    }
    let set = CorrespondenceSet::new(cfg.corners().into_iter().zip(targets).collect())?;
    let h = dlt_four_point(&set)?;
    let params = decompose_sks(&h, &cfg)?;
    build(cfg, targets, h, params, Regime::Projective)
}

fn draw_similarity(cfg: SquareConfig, rng: &mut ChaCha8Rng, max: f64) -> Result<Sample> {
    let (m, n) = (cfg.m(), cfg.n());
    let mt = perturb(rng, m, max);
    let nt = perturb(rng, n, max);
    let h = solve_similarity_two_points(m, n, mt, nt)?;
    let o = cfg.center();
    let centred = Homography3::new(
        translation_matrix(-o.x, -o.y) * h.matrix() * translation_matrix(o.x, o.y),
    )?;
    let sim = matrix_to_similarity(&centred)?;
    let targets = [mt, nt, h.apply(cfg.p())?, h.apply(cfg.q())?];
    let params = HomographyParams8::new(sim, KernelParams::zeros());
    build(cfg, targets, h, params, Regime::Similarity)
}

fn draw_affine(cfg: SquareConfig, rng: &mut ChaCha8Rng, max: f64) -> Result<Sample> {
    let src = [cfg.m(), cfg.n(), cfg.p()];
    let dst = src.map(|c| perturb(rng, c, max));
    if cross(dst[0], dst[1], dst[2]).abs() < MIN_TRIPLE_AREA {
        return Err(Error::DegenerateAffine { det: 0.0 });
    }
    let mut offsets = [0.0; 6];
    for i in 0..3 {
        offsets[2 * i] = src[i].x - dst[i].x;
        offsets[2 * i + 1] = src[i].y - dst[i].y;
    }
    let affine = three_offsets_to_affine_params(&offsets, cfg.half_side());
    affine.validate()?;
    let o = cfg.center();
    let h = Homography3::new(
        translation_matrix(o.x, o.y) * affine.raw_matrix() * translation_matrix(-o.x, -o.y),
    )?;
    let targets = [dst[0], dst[1], dst[2], h.apply(cfg.q())?];
    let params = decompose_sks(&h, &cfg)?;
    build(cfg, targets, h, params, Regime::Affine)
}

/// Generates sample `index` of `spec`, redrawing on rejection.
pub fn generate_one(spec: &PerturbationSpec, index: usize) -> Result<Sample> {
    spec.validate()?;
    let cfg = spec.square()?;
    let mut rng = sample_rng(spec.seed, index);
    for _ in 0..MAX_REDRAWS {
        let drawn = match spec.regime {
            Regime::Projective => draw_projective(cfg, &mut rng, spec.max_offset),
            Regime::Similarity => draw_similarity(cfg, &mut rng, spec.max_offset),
            Regime::Affine => draw_affine(cfg, &mut rng, spec.max_offset),
        };
        if let Ok(sample) = drawn {
            return Ok(sample);
        }
    }
    Err(Error::ExhaustedRedraws {
        index,
        attempts: MAX_REDRAWS,
    })
}

pub fn generate(spec: &PerturbationSpec) -> Result<Vec<Sample>> {
    spec.validate()?;
    (0..spec.count).map(|i| generate_one(spec, i)).collect()
}

fn require_regime(spec: &PerturbationSpec, regime: Regime) -> Result<()> {
    if spec.regime != regime {
        return Err(Error::InvalidConfig(format!(
            "spec regime is {}, expected {}",
            spec.regime.as_str(),
            regime.as_str()
        )));
    }
    Ok(())
}

/// All four corners perturbed independently and uniformly; non-convex
/// quads are redrawn.
pub fn gen_projective(spec: &PerturbationSpec) -> Result<Vec<Sample>> {
    require_regime(spec, Regime::Projective)?;
    generate(spec)
}

/// M and N perturbed; P and Q follow the two-point similarity.
pub fn gen_similarity(spec: &PerturbationSpec) -> Result<Vec<Sample>> {
    require_regime(spec, Regime::Similarity)?;
    generate(spec)
}

/// M, N and P perturbed; Q follows the three-point affine map.
pub fn gen_affine(spec: &PerturbationSpec) -> Result<Vec<Sample>> {
    require_regime(spec, Regime::Affine)?;
    generate(spec)
}

#[derive(Serialize, Deserialize)]
struct SampleRecord {
    cfg: SquareConfig,
    corr: CorrespondenceSet,
    #[serde(rename = "H")]
    h: Homography3,
    params: HomographyParams8,
    regime: Regime,
}

impl From<&Sample> for SampleRecord {
    fn from(s: &Sample) -> Self {
        Self {
            cfg: s.cfg,
            corr: s.correspondences.clone(),
            h: s.gt_homography,
            params: s.gt_params,
            regime: s.regime,
        }
    }
}

impl SampleRecord {
    fn into_sample(self) -> std::result::Result<Sample, String> {
        if self.corr.len() != 4 {
            return Err(format!("expected 4 correspondences, got {}", self.corr.len()));
        }
        self.params.validate().map_err(|e| e.to_string())?;
        Ok(Sample {
            cfg: self.cfg,
            correspondences: self.corr,
            gt_homography: self.h,
            gt_params: self.params,
            regime: self.regime,
        })
    }
}

pub fn sample_to_json(s: &Sample) -> Result<String> {
    Ok(serde_json::to_string(&SampleRecord::from(s))?)
}

pub fn write_dataset_to<W: Write>(samples: &[Sample], out: W) -> Result<()> {
    let mut out = BufWriter::new(out);
    for s in samples {
        serde_json::to_writer(&mut out, &SampleRecord::from(s))?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}

/// One JSON object per line.
pub fn write_dataset(samples: &[Sample], path: impl AsRef<Path>) -> Result<()> {
    write_dataset_to(samples, File::create(path)?)
}

/// Reads a dataset; blank lines are skipped and errors carry 1-based line
/// numbers.
pub fn read_dataset_from<R: BufRead>(input: R) -> Result<Vec<Sample>> {
    let mut samples = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let schema = |message: String| Error::Schema {
            line: i + 1,
            message,
        };
        let record: SampleRecord =
            serde_json::from_str(&line).map_err(|e| schema(e.to_string()))?;
        samples.push(record.into_sample().map_err(schema)?);
    }
    Ok(samples)
}

pub fn read_dataset(path: impl AsRef<Path>) -> Result<Vec<Sample>> {
    read_dataset_from(BufReader::new(File::open(path)?))
}
