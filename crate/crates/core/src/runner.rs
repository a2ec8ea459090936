//! Verb implementations behind the command-line tool.
//!
//! Each verb takes a validated scenario (or plain parameters), runs it and
//! hands every artifact to one [`ArtifactWriter`], which writes files
//! atomically and stamps CSVs with the tool version and config hash.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::config::Scenario;
use crate::entangle::{
    basis_containing, random_basis, random_hermitian, random_unit_vector, robertson_audit,
    TwoBranchState,
};
use crate::error::{Error, Result};
use crate::observables::{
    classification_accuracy, conditional_momentum, default_pivot, kennard_audit,
    screen_distribution, visibility, KennardAudit, PathInferenceRule, VisibilityReport,
};
use crate::oracle;
use crate::recoil::{recoil_table, render_csv, render_text, standard_scenarios};
use crate::states::build_state;
use crate::sweep::{
    frontier_csv_body, frontier_curve, incompatibility_frontier, is_monotone, run_sweep,
    FrontierPoint, FrontierVerdict, SweepResult,
};
use crate::VERSION;

/// Where outputs go when neither the flag nor the config names a directory.
pub const DEFAULT_OUTPUT_DIR: &str = "out";

/// Overrides taken from the command line.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub output_dir: Option<PathBuf>,
    pub seed: Option<u64>,
}

impl RunOptions {
    fn resolve_dir(&self, scenario: Option<&Scenario>) -> PathBuf {
        self.output_dir
            .clone()
            .or_else(|| scenario.and_then(|s| s.output_dir.clone()))
            .unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT_DIR))
    }

    fn apply_seed(&self, scenario: &Scenario) -> Result<Scenario> {
        match self.seed {
            Some(seed) => Ok(scenario.with_seed(seed)?),
            None => Ok(scenario.clone()),
        }
    }
}

/// Sole sink for output files.
#[derive(Debug)]
pub struct ArtifactWriter {
    dir: PathBuf,
    metadata: String,
    written: Vec<PathBuf>,
}

/// `# slitwall v<version> config_sha256=<hash>`
pub fn metadata_line(config_hash: &str) -> String {
    format!("# slitwall v{VERSION} config_sha256={config_hash}")
}

impl ArtifactWriter {
    pub fn new(dir: impl Into<PathBuf>, config_hash: &str) -> Result<Self> {
        let dir = dir.into();
        fs::create_dir_all(&dir).map_err(|source| Error::Io {
            path: dir.clone(),
            source,
        })?;
        Ok(ArtifactWriter {
            dir,
            metadata: metadata_line(config_hash),
            written: Vec::new(),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn written(&self) -> &[PathBuf] {
        &self.written
    }

    /// Writes to a sibling temp file, then renames over the target.
    fn write_atomic(&mut self, name: &str, contents: &[u8]) -> Result<PathBuf> {
        let path = self.dir.join(name);
        let tmp = self.dir.join(format!(".{name}.tmp"));
        let io = |source| Error::Io {
            path: path.clone(),
            source,
        };
        let mut file = fs::File::create(&tmp).map_err(io)?;
        file.write_all(contents).map_err(io)?;
        file.sync_all().map_err(io)?;
        drop(file);
        fs::rename(&tmp, &path).map_err(io)?;
        self.written.push(path.clone());
        Ok(path)
    }

    /// Metadata comment line followed by `body` (header row included).
    pub fn write_csv(&mut self, name: &str, body: &str) -> Result<PathBuf> {
        let text = format!("{}\n{body}", self.metadata);
        self.write_atomic(name, text.as_bytes())
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<PathBuf> {
        let mut text = serde_json::to_string_pretty(value)
            .map_err(|e| Error::InternalConsistency(format!("cannot serialize {name}: {e}")))?;
        text.push('\n');
        self.write_atomic(name, text.as_bytes())
    }
}

/// Drops the leading metadata comment so bodies from different tool
/// versions can be compared.
pub fn strip_metadata(csv: &str) -> &str {
    match csv.strip_prefix("# ") {
        Some(rest) => rest.split_once('\n').map_or("", |(_, body)| body),
        None => csv,
    }
}

fn two_column_csv(header: &str, xs: &[f64], ys: &[f64]) -> String {
    let mut out = format!("{header}\n");
    for (x, y) in xs.iter().zip(ys) {
        let _ = writeln!(out, "{x},{y}");
    }
    out
}

#[derive(Debug, Clone, Serialize)]
pub struct BranchNorms {
    pub branch1: f64,
    pub branch2: f64,
    pub joint: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SimulationSummary {
    pub version: String,
    pub config_sha256: String,
    pub grid: String,
    pub applied_k: f64,
    pub visibility: VisibilityReport,
    pub helstrom_distinguishability: f64,
    pub branch_norms: BranchNorms,
    pub wall_kennard: KennardAudit,
    pub pivot: f64,
    /// Present when the scenario has a seed.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub accuracy: Option<f64>,
    pub samples: usize,
    pub screen_edge_leak: f64,
    pub conditional_q: Vec<f64>,
}

/// `simulate`: screen distribution, conditional wall-momentum slices and a
/// JSON summary.
pub fn simulate(scenario: &Scenario, options: &RunOptions) -> Result<(SimulationSummary, Vec<PathBuf>)> {
    let scenario = options.apply_seed(scenario)?;
    let particle = build_state(&scenario.particle, scenario.grid)?;
    let wall = build_state(&scenario.wall, scenario.grid)?;
    let pair = scenario.pipeline().run(&particle, &wall)?;

    let report = visibility(&wall, scenario.k)?;
    let screen = screen_distribution(&pair)?;
    let pivot = match scenario.pivot {
        Some(p) => p,
        None => default_pivot(&wall)?,
    };
    let accuracy = match scenario.seed {
        Some(seed) => {
            let rule = PathInferenceRule::new(pivot, pair.applied_k)?;
            Some(classification_accuracy(&pair, &rule, scenario.samples, seed)?)
        }
        None => None,
    };
    let summary = SimulationSummary {
        version: VERSION.to_string(),
        config_sha256: scenario.config_hash(),
        grid: scenario.grid.to_string(),
        applied_k: pair.applied_k,
        helstrom_distinguishability: report.helstrom_distinguishability(),
        visibility: report,
        branch_norms: BranchNorms {
            branch1: pair.branch1.weight(),
            branch2: pair.branch2.weight(),
            joint: pair.joint_norm_sqr()?,
        },
        wall_kennard: kennard_audit(&wall)?,
        pivot,
        accuracy,
        samples: scenario.samples,
        screen_edge_leak: pair.edge_leak(),
        conditional_q: scenario.conditional_q.clone(),
    };

    let mut writer = ArtifactWriter::new(options.resolve_dir(Some(&scenario)), &summary.config_sha256)?;
    writer.write_csv("screen.csv", &two_column_csv("q,density", &scenario.grid.positions(), &screen))?;
    let momenta = scenario.grid.momenta();
    for (i, &q) in scenario.conditional_q.iter().enumerate() {
        let slice = conditional_momentum(&pair, q)?;
        writer.write_csv(&format!("conditional_q{i}.csv"), &two_column_csv("P,density", &momenta, &slice))?;
    }
    writer.write_json("summary.json", &summary)?;
    Ok((summary, writer.written().to_vec()))
}

#[derive(Debug, Clone, Serialize)]
pub struct FrontierReport {
    pub version: String,
    pub config_sha256: String,
    pub parameter: String,
    pub verdict: FrontierVerdict,
    pub monotone: bool,
    pub curve: Vec<FrontierPoint>,
    pub failed_cells: usize,
}

#[derive(Debug, Clone)]
pub struct SweepOutcome {
    pub result: SweepResult,
    pub report: FrontierReport,
    pub written: Vec<PathBuf>,
}

/// `sweep`: per-cell CSV and JSON, frontier CSV and the frontier verdict.
pub fn sweep(scenario: &Scenario, options: &RunOptions) -> Result<SweepOutcome> {
    let scenario = options.apply_seed(scenario)?;
    let descriptor = scenario
        .sweep
        .clone()
        .ok_or_else(|| Error::contract("config has no sweep section"))?;
    let result = run_sweep(&scenario, &descriptor)?;
    let curve = frontier_curve(&result);
    let report = FrontierReport {
        version: VERSION.to_string(),
        config_sha256: scenario.config_hash(),
        parameter: descriptor.parameter.clone(),
        verdict: incompatibility_frontier(&result, scenario.thresholds.v_min, scenario.thresholds.acc_min),
        monotone: is_monotone(&curve),
        failed_cells: result.rows.iter().filter(|r| !r.status.is_usable()).count(),
        curve,
    };
    let mut writer = ArtifactWriter::new(options.resolve_dir(Some(&scenario)), &report.config_sha256)?;
    writer.write_csv("sweep.csv", &result.csv_body())?;
    writer.write_json("sweep.json", &result)?;
    writer.write_csv("frontier.csv", &frontier_csv_body(&report.curve))?;
    writer.write_json("frontier.json", &report)?;
    Ok(SweepOutcome {
        written: writer.written().to_vec(),
        result,
        report,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct EntangleReport {
    pub dim: usize,
    pub pairs: usize,
    pub seed: u64,
    /// Largest deviation of the branch formulas from dense partial traces.
    pub distribution_error: f64,
    /// Largest deviation of post-measurement states from the dense oracle.
    pub post_state_error: f64,
    /// Largest interference term left when `⟨ξ₁|ξ₂⟩ = 0`.
    pub orthogonal_interference: f64,
    /// Most negative `σ(A)σ(B) - ½|⟨[A,B]⟩|` over random Hermitian pairs.
    pub robertson_min_slack: f64,
    pub passed: bool,
}

/// Phase-insensitive distance between two unit vectors.
fn ray_distance(a: &nalgebra::DVector<Complex64>, b: &nalgebra::DVector<Complex64>) -> f64 {
    let phase = a.dotc(b);
    let phase = if phase.norm() > 0.0 { phase / phase.norm() } else { Complex64::new(1.0, 0.0) };
    (a * phase - b).norm()
}

/// `entangle`: random two-branch states checked against dense oracles,
/// the orthogonal-meter limit and the Robertson inequality.
pub fn entangle(dim: usize, pairs: usize, seed: u64) -> Result<EntangleReport> {
    if !(2..=16).contains(&dim) {
        return Err(Error::contract(format!("dimension must lie in 2..=16, got {dim}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut distribution_error: f64 = 0.0;
    let mut post_state_error: f64 = 0.0;
    let shapes: Vec<(usize, usize)> = (2..=dim).flat_map(|a| (2..=dim).map(move |m| (a, m))).collect();
    for (d_a, d_m) in shapes {
        let c = |r: &mut ChaCha8Rng| {
            let v = random_unit_vector(2, r);
            (v[0], v[1])
        };
        let (c1, c2) = c(&mut rng);
        let s = TwoBranchState::new(
            c1,
            c2,
            random_unit_vector(d_a, &mut rng),
            random_unit_vector(d_a, &mut rng),
            random_unit_vector(d_m, &mut rng),
            random_unit_vector(d_m, &mut rng),
        )?;
        let (c1, c2) = s.coefficients();
        let (p1, p2) = s.object_vectors();
        let (x1, x2) = s.meter_vectors();
        let joint = oracle::dense_two_branch(c1, c2, p1, p2, x1, x2);
        let (ba, bm) = (random_basis(d_a, &mut rng), random_basis(d_m, &mut rng));
        let dense_a = oracle::basis_probabilities(&oracle::reduced_object(&joint, d_a, d_m), &ba);
        let dense_m = oracle::basis_probabilities(&oracle::reduced_meter(&joint, d_a, d_m), &bm);
        for (x, y) in s.object_outcome_distribution(&ba)?.iter().zip(&dense_a) {
            distribution_error = distribution_error.max((x - y).abs());
        }
        for (x, y) in s.meter_outcome_distribution(&bm)?.iter().zip(&dense_m) {
            distribution_error = distribution_error.max((x - y).abs());
        }
        for m in 0..d_m {
            let (post, _) = s.post_measurement_state(&bm, m)?;
            let dense = oracle::conditional_object(&joint, d_a, d_m, &bm.column(m).into_owned());
            post_state_error = post_state_error.max(ray_distance(&post, &dense));
        }
    }

    // orthogonal meters: distribution must equal the classical mixture
    let xi1 = random_unit_vector(dim, &mut rng);
    let xi2 = {
        let basis = basis_containing(&xi1, &random_unit_vector(dim, &mut rng))?;
        basis.column(1).into_owned()
    };
    let s = TwoBranchState::new(
        Complex64::new(0.6, 0.0),
        Complex64::new(0.0, 0.8),
        random_unit_vector(dim, &mut rng),
        random_unit_vector(dim, &mut rng),
        xi1,
        xi2,
    )?;
    let basis = random_basis(dim, &mut rng);
    let (c1, c2) = s.coefficients();
    let (p1, p2) = s.object_vectors();
    let mut orthogonal_interference: f64 = 0.0;
    for (a, got) in basis.column_iter().zip(s.object_outcome_distribution(&basis)?) {
        let mix = (c1 * a.dotc(p1)).norm_sqr() + (c2 * a.dotc(p2)).norm_sqr();
        orthogonal_interference = orthogonal_interference.max((got - mix).abs());
    }

    let mut robertson_min_slack = f64::INFINITY;
    for _ in 0..pairs {
        let v = random_unit_vector(dim, &mut rng);
        let (a, b): (DMatrix<Complex64>, DMatrix<Complex64>) =
            (random_hermitian(dim, &mut rng), random_hermitian(dim, &mut rng));
        let r = robertson_audit(&v, &a, &b)?;
        robertson_min_slack = robertson_min_slack.min(r.product - r.bound);
    }
    if pairs == 0 {
        robertson_min_slack = 0.0;
    }

    let passed = distribution_error <= 1e-12
        && post_state_error <= 1e-12
        && orthogonal_interference <= 1e-12
        && robertson_min_slack >= -1e-10;
    Ok(EntangleReport {
        dim,
        pairs,
        seed,
        distribution_error,
        post_state_error,
        orthogonal_interference,
        robertson_min_slack,
        passed,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TableFormat {
    #[default]
    Text,
    Csv,
}

/// `recoil`: the standard SI recoil table.
pub fn recoil(format: TableFormat) -> String {
    let rows = recoil_table(&standard_scenarios());
    match format {
        TableFormat::Text => render_text(&rows),
        TableFormat::Csv => render_csv(&rows),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn metadata_is_stripped() {
        let csv = format!("{}\na,b\n1,2\n", metadata_line("abc"));
        assert_eq!(strip_metadata(&csv), "a,b\n1,2\n");
        assert_eq!(strip_metadata("a,b\n"), "a,b\n");
    }

    #[test]
    fn writer_stamps_csvs_and_leaves_no_temp_files() {
        let dir = tempfile::tempdir().unwrap();
        let mut w = ArtifactWriter::new(dir.path(), "feed").unwrap();
        let path = w.write_csv("x.csv", "a,b\n1,2\n").unwrap();
        let text = fs::read_to_string(path).unwrap();
        assert!(text.starts_with("# slitwall v"));
        assert!(text.contains("config_sha256=feed"));
        let names: Vec<_> = fs::read_dir(dir.path()).unwrap().map(|e| e.unwrap().file_name()).collect();
        assert_eq!(names.len(), 1);
    }

    #[test]
    fn entangle_demo_passes() {
        let r = entangle(4, 50, 7).unwrap();
        assert!(r.passed, "{r:?}");
        assert!(entangle(1, 10, 7).is_err());
    }

    #[test]
    fn recoil_table_formats() {
        assert!(recoil(TableFormat::Csv).starts_with("target,"));
        assert!(recoil(TableFormat::Text).contains("sodium"));
    }
}
