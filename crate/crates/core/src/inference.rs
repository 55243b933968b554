//! Synthesis problems, datasets, likelihoods and Monte-Carlo free energies
//! on low-dimensional chart slices.

use num_traits::{One, Signed, ToPrimitive};
use rand::distributions::{Distribution, WeightedIndex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dgm::UnrolledDGM;
use crate::error::{Error, Result};
use crate::linalg::{q_string, Q};
use crate::machine::{check_input, tm_run, MachineSpec};
use crate::noisy::{LocalChart, NoisyCode};
use crate::propagate::{propagate_with, ProbSemiring};

pub const PROBLEM_SCHEMA: &str = "tmsl.problem/1";
pub const DEFAULT_MU: f64 = 0.01;

#[derive(Clone, Debug, PartialEq)]
pub struct SynthesisProblem {
    pub inputs: Vec<Vec<usize>>,
    pub q: Vec<Q>,
    /// True output state per input.
    pub y: Vec<usize>,
    pub t: usize,
    pub mu: f64,
}

#[derive(Serialize, Deserialize)]
struct ProblemDoc {
    #[serde(default)]
    schema: Option<String>,
    inputs: Vec<String>,
    q: Vec<String>,
    y: Vec<String>,
    t: usize,
    #[serde(default = "default_mu")]
    mu: f64,
}

fn default_mu() -> f64 {
    DEFAULT_MU
}

fn parse_q(s: &str) -> Result<Q> {
    s.trim().parse::<Q>().map_err(|_| Error::InvalidProblem(format!("bad probability {s:?}")))
}

impl SynthesisProblem {
    pub fn new(
        inputs: Vec<Vec<usize>>,
        q: Vec<Q>,
        y: Vec<usize>,
        t: usize,
        mu: f64,
        spec: &MachineSpec,
    ) -> Result<Self> {
        if inputs.is_empty() || inputs.len() != q.len() || inputs.len() != y.len() {
            return Err(Error::InvalidProblem("inputs, q and y must have equal nonzero length".into()));
        }
        if q.iter().any(|v| !v.is_positive()) || q.iter().sum::<Q>() != Q::one() {
            return Err(Error::InvalidProblem("q must be positive and sum to 1".into()));
        }
        if y.iter().any(|&v| v >= spec.m()) {
            return Err(Error::InvalidProblem("y names an unknown state".into()));
        }
        if !(0.0..1.0).contains(&mu) {
            return Err(Error::InvalidMu(mu));
        }
        for x in &inputs {
            check_input(x, spec)?;
        }
        Ok(SynthesisProblem { inputs, q, y, t, mu })
    }

    pub fn from_json(text: &str, spec: &MachineSpec) -> Result<Self> {
        let doc: ProblemDoc = serde_json::from_str(text)?;
        if let Some(s) = &doc.schema {
            if s != PROBLEM_SCHEMA {
                return Err(Error::InvalidProblem(format!("unknown schema {s:?}")));
            }
        }
        let inputs = doc.inputs.iter().map(|w| spec.parse_input(w)).collect::<Result<Vec<_>>>()?;
        let q = doc.q.iter().map(|s| parse_q(s)).collect::<Result<Vec<_>>>()?;
        let y = doc
            .y
            .iter()
            .map(|s| spec.state_index(s).ok_or_else(|| Error::InvalidProblem(format!("unknown state {s:?}"))))
            .collect::<Result<Vec<_>>>()?;
        Self::new(inputs, q, y, doc.t, doc.mu, spec)
    }

    pub fn to_json(&self, spec: &MachineSpec) -> String {
        let doc = ProblemDoc {
            schema: Some(PROBLEM_SCHEMA.into()),
            inputs: self.inputs.iter().map(|x| spec.format_input(x)).collect(),
            q: self.q.iter().map(q_string).collect(),
            y: self.y.iter().map(|&s| spec.states[s].clone()).collect(),
            t: self.t,
            mu: self.mu,
        };
        serde_json::to_string_pretty(&doc).expect("serialisable")
    }

    /// The detect-A problem: inputs A, B, AB, BA, AA, BB, uniform, `t = 2`,
    /// truth "the word contains an A".
    pub fn detect_a(spec: &MachineSpec, mu: f64) -> Result<Self> {
        let words = ["A", "B", "AB", "BA", "AA", "BB"];
        let inputs = words.iter().map(|w| spec.parse_input(w)).collect::<Result<Vec<_>>>()?;
        let a = spec.symbol_index("A").ok_or_else(|| Error::InvalidProblem("alphabet lacks A".into()))?;
        let y = inputs.iter().map(|x| if x.contains(&a) { 1 } else { 0 }).collect();
        Self::new(inputs, crate::geometry::uniform(words.len()), y, 2, mu, spec)
    }

    fn q_f64(&self) -> Vec<f64> {
        self.q.iter().map(|v| v.to_f64().unwrap_or(f64::NAN)).collect()
    }
}

pub fn is_classical_solution(spec: &MachineSpec, problem: &SynthesisProblem) -> Result<bool> {
    for (x, &y) in problem.inputs.iter().zip(&problem.y) {
        if tm_run(x, spec, problem.t)? != y {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Probability of the true output for every input, before smoothing.
/// Unrolls each input once and reuses the graphs.
pub struct ModelEvaluator {
    dgms: Vec<UnrolledDGM>,
    problem: SynthesisProblem,
    pub chart: LocalChart,
}

impl ModelEvaluator {
    pub fn new(spec: &MachineSpec, problem: &SynthesisProblem) -> Self {
        let dgms = problem.inputs.iter().map(|x| UnrolledDGM::unroll_collapsed(spec, problem.t, x.len())).collect();
        ModelEvaluator { dgms, problem: problem.clone(), chart: LocalChart::new(spec) }
    }

    pub fn problem(&self) -> &SynthesisProblem {
        &self.problem
    }

    pub fn p_correct(&self, code: &NoisyCode<f64>) -> Result<Vec<f64>> {
        let sr = ProbSemiring { code };
        self.dgms
            .iter()
            .zip(&self.problem.inputs)
            .zip(&self.problem.y)
            .map(|((dgm, x), &y)| Ok(propagate_with(dgm, x, &sr)?[y]))
            .collect()
    }

    pub fn p_correct_at(&self, w: &[f64]) -> Result<Vec<f64>> {
        self.p_correct(&self.chart.chart_to_code(w)?)
    }

    /// `K_μ(w)`: expected KL divergence between smoothed truth and model.
    pub fn kl(&self, w: &[f64]) -> Result<f64> {
        let pc = self.p_correct_at(w)?;
        let mu = self.problem.mu;
        let mut k = 0.0;
        for (qx, p) in self.problem.q_f64().iter().zip(pc) {
            k += qx * kl_two(1.0 - mu / 2.0, smooth(p, mu));
        }
        Ok(k)
    }

    /// `H(w) = E_x[p(y ≠ y(x) | x, w)²]`.
    pub fn h(&self, w: &[f64]) -> Result<f64> {
        let pc = self.p_correct_at(w)?;
        Ok(self.problem.q_f64().iter().zip(pc).map(|(qx, p)| qx * (1.0 - p) * (1.0 - p)).sum())
    }
}

fn smooth(p: f64, mu: f64) -> f64 {
    (1.0 - mu) * p + mu / 2.0
}

/// KL divergence between two-point distributions `(a, 1-a)` and `(b, 1-b)`.
fn kl_two(a: f64, b: f64) -> f64 {
    let term = |u: f64, v: f64| if u == 0.0 { 0.0 } else { u * (u / v).ln() };
    term(a, b) + term(1.0 - a, 1.0 - b)
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct Dataset {
    pub seed: u64,
    /// `(input index, observed state)`.
    pub pairs: Vec<(usize, usize)>,
}

impl Dataset {
    /// Inputs drawn from `q`, outputs from the smoothed truth: the true
    /// output with probability `1 - μ/2`, otherwise the other outcome.
    pub fn sample(problem: &SynthesisProblem, n: usize, seed: u64) -> Result<Self> {
        let dist = WeightedIndex::new(problem.q_f64()).map_err(|e| Error::InvalidProblem(e.to_string()))?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pairs = (0..n)
            .map(|_| {
                let i = dist.sample(&mut rng);
                let flip = rng.gen::<f64>() < problem.mu / 2.0;
                let y = problem.y[i];
                (
                    i,
                    if !flip {
                        y
                    } else if y == 0 {
                        1
                    } else {
                        0
                    },
                )
            })
            .collect();
        Ok(Dataset { seed, pairs })
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
}

/// `L_n(w) = -(1/n) Σ log p_μ(y_i | x_i, w)` from per-input correct-output
/// probabilities.
pub fn neg_log_likelihood_from(p_correct: &[f64], data: &Dataset, problem: &SynthesisProblem) -> Result<f64> {
    if data.is_empty() {
        return Ok(0.0);
    }
    let mut total = 0.0;
    for &(i, y) in &data.pairs {
        let pc = smooth(p_correct[i], problem.mu);
        let p = if y == problem.y[i] { pc } else { 1.0 - pc };
        if p <= 0.0 {
            return Err(Error::InfiniteLikelihood);
        }
        total -= p.ln();
    }
    Ok(total / data.len() as f64)
}

pub fn neg_log_likelihood(data: &Dataset, w: &[f64], model: &ModelEvaluator) -> Result<f64> {
    neg_log_likelihood_from(&model.p_correct_at(w)?, data, &model.problem)
}

/// Axis-aligned box in chart coordinates. Coordinates with `lo == hi` are
/// held fixed, so the box may be a low-dimensional slice.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct ChartBox {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl ChartBox {
    /// Slice through the origin along the given coordinates.
    pub fn slice(d: usize, axes: &[(usize, f64, f64)]) -> Self {
        let mut lo = vec![0.0; d];
        let mut hi = vec![0.0; d];
        for &(k, a, b) in axes {
            lo[k] = a;
            hi[k] = b;
        }
        ChartBox { lo, hi }
    }

    pub fn free_axes(&self) -> Vec<usize> {
        (0..self.lo.len()).filter(|&k| self.hi[k] > self.lo[k]).collect()
    }

    pub fn volume(&self) -> f64 {
        self.free_axes().iter().map(|&k| self.hi[k] - self.lo[k]).product()
    }

    fn validate(&self, chart: &LocalChart) -> Result<()> {
        if self.lo.len() != chart.dim() || self.hi.len() != chart.dim() {
            return Err(Error::DegenerateRegion("wrong dimension".into()));
        }
        if self.lo.iter().zip(&self.hi).any(|(a, b)| !(a.is_finite() && b.is_finite()) || a > b || *a < 0.0) {
            return Err(Error::DegenerateRegion("bounds must satisfy 0 <= lo <= hi".into()));
        }
        chart.chart_to_code(&self.hi).map(|_| ()).map_err(|e| Error::DegenerateRegion(e.to_string()))
    }

    fn draw<R: Rng>(&self, rng: &mut R) -> Vec<f64> {
        self.lo.iter().zip(&self.hi).map(|(&a, &b)| if b > a { rng.gen_range(a..b) } else { a }).collect()
    }
}

const CHUNK: usize = 1024;

/// Values of `f` at `samples` uniform points of the box, in a fixed order
/// that does not depend on the thread count.
fn sample_box<F>(region: &ChartBox, samples: usize, seed: u64, f: F) -> Result<Vec<f64>>
where
    F: Fn(&[f64]) -> Result<f64> + Sync,
{
    let chunks = samples.div_ceil(CHUNK);
    let parts: Vec<Result<Vec<f64>>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(c as u64);
            (0..CHUNK.min(samples - c * CHUNK)).map(|_| f(&region.draw(&mut rng))).collect()
        })
        .collect();
    let mut out = Vec::with_capacity(samples);
    for p in parts {
        out.extend(p?);
    }
    Ok(out)
}

/// `log mean exp(-n v)` over the values, with its Monte-Carlo standard error.
fn log_mean_exp(values: &[f64], n: f64) -> (f64, f64) {
    let shift = values.iter().map(|v| -n * v).fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = values.iter().map(|v| (-n * v - shift).exp()).collect();
    let s = e.len() as f64;
    let mean = e.iter().sum::<f64>() / s;
    let var = e.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (s - 1.0).max(1.0);
    (mean.ln() + shift, (var / s).sqrt() / mean)
}

#[derive(Clone, Debug, Serialize)]
pub struct PosteriorMass {
    /// `log ∫_region exp(-n L_n(w)) dw` (unnormalised).
    pub log_mass: f64,
    pub stderr: f64,
    pub samples: usize,
}

pub fn posterior_mass(
    region: &ChartBox,
    data: &Dataset,
    model: &ModelEvaluator,
    mc_samples: usize,
    seed: u64,
) -> Result<PosteriorMass> {
    region.validate(&model.chart)?;
    if mc_samples == 0 {
        return Err(Error::InvalidInput("mc_samples must be positive".into()));
    }
    let vals = sample_box(region, mc_samples, seed, |w| neg_log_likelihood(data, w, model))?;
    let (lme, se) = log_mean_exp(&vals, data.len() as f64);
    Ok(PosteriorMass { log_mass: lme + region.volume().ln(), stderr: se, samples: mc_samples })
}

#[derive(Clone, Debug, Serialize)]
pub struct FreeEnergyPoint {
    pub n: u64,
    pub f: f64,
    pub stderr: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct FreeEnergyFit {
    pub schema: String,
    /// Free chart coordinates of the slice (1-based).
    pub slice: Vec<usize>,
    pub mu: f64,
    pub samples: usize,
    pub seed: u64,
    pub points: Vec<FreeEnergyPoint>,
    pub slope: f64,
    /// Half-width of a 95% interval from the Monte-Carlo errors of the points.
    pub slope_ci: f64,
    /// Largest absolute residual of the linear fit.
    pub max_residual: f64,
}

pub const MAX_SLICE_DIM: usize = 3;

/// Fits `F_n = λ log n + c` where `F_n = -log E_{w ~ U(region)} exp(-n K_μ(w))`.
/// This is the population version of `F_n - n L_n(w*)` at a classical
/// solution, where `K_μ(w*) = 0`.
pub fn free_energy_slope(
    region: &ChartBox,
    model: &ModelEvaluator,
    ns: &[u64],
    mc_samples: usize,
    seed: u64,
) -> Result<FreeEnergyFit> {
    region.validate(&model.chart)?;
    let free = region.free_axes();
    if free.is_empty() || free.len() > MAX_SLICE_DIM {
        return Err(Error::DegenerateRegion(format!("slice dimension {} not in 1..={MAX_SLICE_DIM}", free.len())));
    }
    if ns.len() < 2 || mc_samples < 2 {
        return Err(Error::InvalidInput("need at least two sample sizes and two samples".into()));
    }
    let k = sample_box(region, mc_samples, seed, |w| model.kl(w))?;
    let points: Vec<FreeEnergyPoint> = ns
        .iter()
        .map(|&n| {
            let (lme, se) = log_mean_exp(&k, n as f64);
            FreeEnergyPoint { n, f: -lme, stderr: se }
        })
        .collect();
    let xs: Vec<f64> = points.iter().map(|p| (p.n as f64).ln()).collect();
    let xbar = xs.iter().sum::<f64>() / xs.len() as f64;
    let sxx: f64 = xs.iter().map(|x| (x - xbar) * (x - xbar)).sum();
    let a: Vec<f64> = xs.iter().map(|x| (x - xbar) / sxx).collect();
    let slope: f64 = a.iter().zip(&points).map(|(ai, p)| ai * p.f).sum();
    let fbar = points.iter().map(|p| p.f).sum::<f64>() / points.len() as f64;
    let icpt = fbar - slope * xbar;
    let max_residual = xs.iter().zip(&points).map(|(x, p)| (p.f - icpt - slope * x).abs()).fold(0.0, f64::max);
    let var: f64 = a.iter().zip(&points).map(|(ai, p)| ai * ai * p.stderr * p.stderr).sum();
    Ok(FreeEnergyFit {
        schema: "tmsl.free-energy/1".into(),
        slice: free.iter().map(|k| k + 1).collect(),
        mu: model.problem.mu,
        samples: mc_samples,
        seed,
        points,
        slope,
        slope_ci: 1.96 * var.sqrt(),
        max_residual,
    })
}

impl FreeEnergyFit {
    pub fn to_csv(&self) -> String {
        let mut wtr = csv::Writer::from_writer(Vec::new());
        wtr.write_record(["n", "F_n", "stderr"]).expect("in-memory csv");
        for p in &self.points {
            wtr.write_record([p.n.to_string(), format!("{:.12}", p.f), format!("{:.12}", p.stderr)])
                .expect("in-memory csv");
        }
        String::from_utf8(wtr.into_inner().expect("flush")).expect("utf8")
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ComparabilityReport {
    pub mu: f64,
    pub radius: f64,
    pub samples: usize,
    /// `½(1-μ)²(1 + 2/μ)`.
    pub reference: f64,
    pub min_ratio: f64,
    pub max_ratio: f64,
    /// Samples with `H(w) = 0`, which are skipped.
    pub skipped: usize,
}

/// Range of `K_μ(w) / H(w)` over `w` drawn uniformly from `[0, radius]^d`.
pub fn comparability_check(
    model: &ModelEvaluator,
    radius: f64,
    samples: usize,
    seed: u64,
) -> Result<ComparabilityReport> {
    let mu = model.problem.mu;
    if !(mu > 0.0 && mu < 1.0) {
        return Err(Error::InvalidMu(mu));
    }
    let d = model.chart.dim();
    let region = ChartBox { lo: vec![0.0; d], hi: vec![radius; d] };
    region.validate(&model.chart)?;
    let ratios = sample_box(&region, samples, seed, |w| {
        let h = model.h(w)?;
        Ok(if h == 0.0 { f64::NAN } else { model.kl(w)? / h })
    })?;
    let kept: Vec<f64> = ratios.iter().copied().filter(|r| !r.is_nan()).collect();
    Ok(ComparabilityReport {
        mu,
        radius,
        samples,
        reference: 0.5 * (1.0 - mu) * (1.0 - mu) * (1.0 + 2.0 / mu),
        min_ratio: kept.iter().copied().fold(f64::INFINITY, f64::min),
        max_ratio: kept.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        skipped: samples - kept.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::machine::{detect_a0, detect_a1};

    #[test]
    fn classical_solutions() {
        for spec in [detect_a0(), detect_a1()] {
            let p = SynthesisProblem::detect_a(&spec, DEFAULT_MU).unwrap();
            assert!(is_classical_solution(&spec, &p).unwrap());
        }
    }

    #[test]
    fn loss_at_the_solution() {
        let spec = detect_a0();
        let p = SynthesisProblem::detect_a(&spec, DEFAULT_MU).unwrap();
        let m = ModelEvaluator::new(&spec, &p);
        let w = vec![0.0; 30];
        assert_eq!(m.kl(&w).unwrap(), 0.0);
        // A dataset with only true labels.
        let data = Dataset { seed: 0, pairs: (0..6).map(|i| (i, p.y[i])).collect() };
        let l = neg_log_likelihood(&data, &w, &m).unwrap();
        assert!((l + (1.0 - DEFAULT_MU / 2.0).ln()).abs() < 1e-15);
    }

    #[test]
    fn problem_json_round_trip() {
        let spec = detect_a0();
        let p = SynthesisProblem::detect_a(&spec, 0.05).unwrap();
        assert_eq!(SynthesisProblem::from_json(&p.to_json(&spec), &spec).unwrap(), p);
    }

    #[test]
    fn zero_mu_with_wrong_label_is_infinite() {
        let spec = detect_a0();
        let p = SynthesisProblem::detect_a(&spec, 0.0).unwrap();
        let data = Dataset { seed: 0, pairs: vec![(1, 1)] };
        assert!(matches!(neg_log_likelihood_from(&[1.0; 6], &data, &p), Err(Error::InfiniteLikelihood)));
    }
}
