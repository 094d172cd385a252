//! Matrix files, verification reports and the analysis driver used by the CLI.
//!
//! Matrices are stored as `{"dim": n, "entries": [[re, im], ...]}` with
//! entries in row-major order. Reports are JSON documents in the same style;
//! residual tables are keyed by equation label.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::ComplexMatrix;
use crate::metric::{full_pipeline, EquivalencePair};
use crate::models::ModelSpec;
use crate::spectral::{eig_decompose, SpectrumSummary};
use crate::symmetry::{
    commutant_basis, metric_from_symmetry, sample_positive_symmetry, MetricFamilyMember,
    DEFAULT_SPREAD,
};
use crate::tolerances::Tolerances;

pub const DEFAULT_MAX_DIM: usize = 512;

/// On-disk matrix representation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixFile {
    pub dim: usize,
    pub entries: Vec<[f64; 2]>,
}

impl From<&ComplexMatrix> for MatrixFile {
    fn from(m: &ComplexMatrix) -> Self {
        Self {
            dim: m.dim(),
            entries: m.row_major_entries().iter().map(|z| [z.re, z.im]).collect(),
        }
    }
}

impl MatrixFile {
    pub fn to_matrix(&self) -> Result<ComplexMatrix> {
        let entries: Vec<Complex64> = self
            .entries
            .iter()
            .map(|&[re, im]| Complex64::new(re, im))
            .collect();
        ComplexMatrix::from_row_major(self.dim, &entries)
    }
}

pub fn parse_matrix(text: &str) -> Result<ComplexMatrix> {
    serde_json::from_str::<MatrixFile>(text)?
        .to_matrix()
        .map_err(|e| match e {
            Error::DimensionMismatch { expected, found } => Error::Parse(format!(
                "`entries` holds {found} values but `dim` requires {expected}"
            )),
            other => other,
        })
}

pub fn read_matrix(path: &Path) -> Result<ComplexMatrix> {
    parse_matrix(&std::fs::read_to_string(path)?)
}

pub fn write_matrix(path: &Path, m: &ComplexMatrix) -> Result<()> {
    let mut text = serde_json::to_string_pretty(&MatrixFile::from(m))?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

/// Where the Hamiltonian came from.
#[derive(Debug, Clone)]
pub enum InputSource {
    File(PathBuf),
    Model(ModelSpec),
    Inline(ComplexMatrix),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case")]
pub enum InputDescriptor {
    File { path: String },
    Model { model: ModelSpec },
    Inline { dim: usize },
}

impl InputSource {
    fn descriptor(&self) -> InputDescriptor {
        match self {
            InputSource::File(p) => InputDescriptor::File {
                path: p.display().to_string(),
            },
            InputSource::Model(m) => InputDescriptor::Model { model: m.clone() },
            InputSource::Inline(m) => InputDescriptor::Inline { dim: m.dim() },
        }
    }

    fn load(&self) -> Result<ComplexMatrix> {
        match self {
            InputSource::File(p) => read_matrix(p),
            InputSource::Model(m) => m.build(),
            InputSource::Inline(m) => Ok(m.clone()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// Pipeline, commutant and sampled family, with matrices.
    Analyze,
    /// Pipeline residuals and sampled family only.
    Family,
    /// Spectral diagnostics only.
    Spectrum,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalyzeOptions {
    pub tolerances: Tolerances,
    pub samples: usize,
    pub seed: u64,
    pub spread: f64,
    pub max_dim: usize,
}

impl Default for AnalyzeOptions {
    fn default() -> Self {
        Self {
            tolerances: Tolerances::default(),
            samples: 5,
            seed: 0,
            spread: DEFAULT_SPREAD,
            max_dim: DEFAULT_MAX_DIM,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
    Error,
}

impl Verdict {
    pub fn exit_code(self) -> i32 {
        match self {
            Verdict::Pass => 0,
            Verdict::Error => 1,
            Verdict::Fail => 2,
        }
    }
}

/// Residuals serialize non-finite values as `null` and read `null` back as +∞.
mod residual_map {
    use std::collections::BTreeMap;

    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(map: &BTreeMap<String, f64>, s: S) -> Result<S::Ok, S::Error> {
        map.iter()
            .map(|(k, v)| (k, v.is_finite().then_some(*v)))
            .collect::<BTreeMap<_, _>>()
            .serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BTreeMap<String, f64>, D::Error> {
        let raw = BTreeMap::<String, Option<f64>>::deserialize(d)?;
        Ok(raw
            .into_iter()
            .map(|(k, v)| (k, v.unwrap_or(f64::INFINITY)))
            .collect())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MemberReport {
    pub seed: u64,
    pub coefficients: Vec<Vec<f64>>,
    #[serde(with = "residual_map")]
    pub residuals: BTreeMap<String, f64>,
    pub max_residual: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyReport {
    pub count: usize,
    pub seeds: Vec<u64>,
    pub spread: f64,
    /// Largest value of each identity residual over all members.
    #[serde(with = "residual_map")]
    pub max_residuals: BTreeMap<String, f64>,
    pub members: Vec<MemberReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportError {
    pub kind: String,
    pub message: String,
    /// Offending eigenvalues for a complex spectrum.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub eigenvalues: Vec<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub condition: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub identity: Option<String>,
}

impl From<&Error> for ReportError {
    fn from(e: &Error) -> Self {
        let mut out = ReportError {
            kind: e.kind().to_string(),
            message: e.to_string(),
            eigenvalues: Vec::new(),
            condition: None,
            identity: None,
        };
        match e {
            Error::ComplexSpectrum { eigenvalues } => {
                out.eigenvalues = eigenvalues.iter().map(|z| [z.re, z.im]).collect();
            }
            Error::NonDiagonalizable { condition, .. } | Error::IllConditioned { condition } => {
                out.condition = condition.is_finite().then_some(*condition);
            }
            Error::ResidualExceeded { identity, .. } => out.identity = Some(identity.clone()),
            _ => {}
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub mode: Mode,
    /// Seconds since the Unix epoch; the only non-deterministic field.
    pub generated_at: u64,
    pub input: InputDescriptor,
    pub tolerances: Tolerances,
    pub samples: usize,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dim: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spectrum: Option<SpectrumSummary>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub certified_eigenvalues: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta: Option<MatrixFile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho: Option<MatrixFile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h: Option<MatrixFile>,
    /// Residuals of the base construction (`ph`, `H=H`, `h=`).
    #[serde(with = "residual_map")]
    pub identities: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub commutant_dimension: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub family: Option<FamilyReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<ReportError>,
    pub verdict: Verdict,
}

impl VerificationReport {
    fn new(mode: Mode, input: &InputSource, options: &AnalyzeOptions) -> Self {
        let generated_at = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        Self {
            mode,
            generated_at,
            input: input.descriptor(),
            tolerances: options.tolerances,
            samples: options.samples,
            seed: options.seed,
            dim: None,
            spectrum: None,
            certified_eigenvalues: None,
            eta: None,
            rho: None,
            h: None,
            identities: BTreeMap::new(),
            commutant_dimension: None,
            family: None,
            error: None,
            verdict: Verdict::Error,
        }
    }

    pub fn exit_code(&self) -> i32 {
        self.verdict.exit_code()
    }

    pub fn to_json(&self) -> Result<String> {
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        Ok(text)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    fn fail_with(&mut self, e: &Error) {
        self.error = Some(ReportError::from(e));
        self.verdict = match e {
            Error::ResidualExceeded { .. } | Error::NotHermitianEquivalent { .. } => Verdict::Fail,
            _ => Verdict::Error,
        };
    }

    fn all_residuals(&self) -> impl Iterator<Item = f64> + '_ {
        let family = self
            .family
            .iter()
            .flat_map(|f| f.members.iter().flat_map(|m| m.residuals.values().copied()));
        self.identities.values().copied().chain(family)
    }
}

/// Runs the requested analysis. Errors are captured in the report, never returned.
pub fn run(mode: Mode, input: &InputSource, options: &AnalyzeOptions) -> VerificationReport {
    let mut report = VerificationReport::new(mode, input, options);
    if let Err(e) = run_inner(mode, input, options, &mut report) {
        report.fail_with(&e);
    }
    report
}

pub fn run_analyze(input: &InputSource, options: &AnalyzeOptions) -> VerificationReport {
    run(Mode::Analyze, input, options)
}

fn run_inner(
    mode: Mode,
    input: &InputSource,
    options: &AnalyzeOptions,
    report: &mut VerificationReport,
) -> Result<()> {
    let tol = &options.tolerances;
    tol.validate()?;
    let h_matrix = input.load()?;
    let n = h_matrix.dim();
    report.dim = Some(n);
    if n > options.max_dim {
        return Err(Error::TooLarge {
            dim: n,
            max: options.max_dim,
        });
    }

    if mode == Mode::Spectrum {
        report.spectrum = Some(SpectrumSummary::raw(&h_matrix));
        let spectral = eig_decompose(&h_matrix, tol)?;
        report.spectrum = Some(SpectrumSummary::from(&spectral));
        report.certified_eigenvalues = Some(spectral.real_eigenvalues.clone());
        report
            .identities
            .insert("diag".into(), spectral.eigen_residual);
        report.verdict = verdict_for(report, tol);
        return Ok(());
    }

    let pair = match full_pipeline(&h_matrix, tol) {
        Ok(pair) => pair,
        Err(e) => {
            if matches!(e, Error::ComplexSpectrum { .. }) {
                report.spectrum = Some(SpectrumSummary::raw(&h_matrix));
            }
            return Err(e);
        }
    };
    record_pipeline(mode, &pair, report);

    let spectral = pair
        .spectral
        .as_ref()
        .expect("pipeline keeps spectral data");
    let cb = commutant_basis(&pair.h, &spectral.clusters, tol)?;
    report.commutant_dimension = Some(cb.real_dimension);

    let seeds: Vec<u64> = (0..options.samples as u64)
        .map(|i| options.seed.wrapping_add(i))
        .collect();
    let members = seeds
        .iter()
        .map(|&seed| {
            let generator = sample_positive_symmetry(&cb, seed, options.spread, tol)?;
            metric_from_symmetry(&pair.metric, &generator, &h_matrix, tol)
                .map(|m| member_report(seed, &m, tol))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut max_residuals = BTreeMap::new();
    for m in &members {
        for (k, &v) in &m.residuals {
            let slot = max_residuals.entry(k.clone()).or_insert(0.0f64);
            if v.is_nan() || v > *slot {
                *slot = v;
            }
        }
    }
    report.family = Some(FamilyReport {
        count: members.len(),
        seeds,
        spread: options.spread,
        max_residuals,
        members,
    });
    report.verdict = verdict_for(report, tol);
    Ok(())
}

fn record_pipeline(mode: Mode, pair: &EquivalencePair, report: &mut VerificationReport) {
    let spectral = pair
        .spectral
        .as_ref()
        .expect("pipeline keeps spectral data");
    report.spectrum = Some(SpectrumSummary::from(spectral));
    report.certified_eigenvalues = Some(spectral.real_eigenvalues.clone());
    for (name, residual) in pair.residuals() {
        report.identities.insert(name.to_string(), residual);
    }
    if mode == Mode::Analyze {
        report.eta = Some(MatrixFile::from(&pair.metric.eta));
        report.rho = Some(MatrixFile::from(&pair.metric.rho));
        report.h = Some(MatrixFile::from(&pair.h));
    }
}

fn member_report(seed: u64, m: &MetricFamilyMember, tol: &Tolerances) -> MemberReport {
    let max_residual = m.max_residual();
    MemberReport {
        seed,
        coefficients: m.generator.coefficients.clone(),
        residuals: m.residuals.clone(),
        max_residual,
        pass: m.first_failure(tol.residual_tol).is_none(),
    }
}

fn verdict_for(report: &VerificationReport, tol: &Tolerances) -> Verdict {
    if report.all_residuals().all(|r| r <= tol.residual_tol) {
        Verdict::Pass
    } else {
        Verdict::Fail
    }
}
