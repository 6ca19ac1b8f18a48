//! Run configuration, command dispatch and on-disk artifacts.
//!
//! Exit codes: 0 success, 1 I/O failure, 2 schema error, 3 numerical
//! failure (an `error.json` is written), 4 a checked property failed.

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::chart::{make_chart, Chart, FnPoint, Gluing, Slot, SurfaceType};
use crate::error::Error;
use crate::experiments::{
    continuity_demo, cover_check, random_thick_point, random_thin_point, ContinuityConfig,
    CoverConfig,
};
use crate::flow::{flow, summarize, FlowConfig, FlowSummary, IntegratorConfig, Trajectory};
use crate::gradient::{vector_field, FieldEval, FieldMode, MetricModel};
use crate::mcg::{equivariance_check, symmetric_locus_check, MappingClass};
use crate::systole::{in_truncated, systole, EnumerationConfig};
use crate::word::CurveClass;

/// Tolerance on Λ decreasing along a trajectory.
pub const MONOTONE_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Systole,
    Flow,
    Retract,
    Gram,
    Equivariance,
    ContinuityDemo,
    CoverCheck,
}

impl Command {
    pub const ALL: [Command; 7] = [
        Command::Systole,
        Command::Flow,
        Command::Retract,
        Command::Gram,
        Command::Equivariance,
        Command::ContinuityDemo,
        Command::CoverCheck,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::Systole => "systole",
            Command::Flow => "flow",
            Command::Retract => "retract",
            Command::Gram => "gram",
            Command::Equivariance => "equivariance",
            Command::ContinuityDemo => "continuity-demo",
            Command::CoverCheck => "cover-check",
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Command {
    type Err = String;
    fn from_str(s: &str) -> Result<Command, String> {
        Command::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| format!("unknown command {s:?}"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SurfaceSpec {
    pub genus: u32,
    pub punctures: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PointSpec {
    pub lengths: Vec<f64>,
    pub twists: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SampleKind {
    /// At least one length below ε.
    Thin,
    /// Every length at least 3ε.
    Thick,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SampleSpec {
    pub kind: SampleKind,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LocusSpec {
    pub point: PointSpec,
    /// Pairs of curve classes, `p0` for pants curves or words like `aB`.
    pub relations: Vec<[String; 2]>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EquivarianceSpec {
    #[serde(default)]
    pub mapping_classes: Vec<MappingClass>,
    #[serde(default)]
    pub loci: Vec<LocusSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub surface: SurfaceSpec,
    /// Pants pieces as slot triples; the standard chart when absent.
    #[serde(default)]
    pub gluing: Option<Vec<Vec<Slot>>>,
    pub eps: f64,
    #[serde(default)]
    pub metric: MetricModel,
    #[serde(default = "blended")]
    pub mode: FieldMode,
    #[serde(default)]
    pub duration: Option<f64>,
    #[serde(default)]
    pub integrator: IntegratorConfig,
    #[serde(default)]
    pub enumeration: EnumerationConfig,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub command: Option<Command>,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub points: Vec<PointSpec>,
    #[serde(default)]
    pub sample: Option<SampleSpec>,
    #[serde(default)]
    pub equivariance: Option<EquivarianceSpec>,
    #[serde(default)]
    pub continuity: Option<ContinuityConfig>,
    #[serde(default)]
    pub cover: Option<CoverConfig>,
}

fn blended() -> FieldMode {
    FieldMode::Blended
}

#[derive(Debug)]
pub enum CliError {
    Schema(String),
    Numerical(Error),
    Io(std::io::Error),
    Property(String),
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        if e.is_input_error() {
            CliError::Schema(e.to_string())
        } else {
            CliError::Numerical(e)
        }
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(std::io::Error::other(e))
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io(_) => 1,
            CliError::Schema(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Property(_) => 4,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Schema(m) => write!(f, "schema error: {m}"),
            CliError::Numerical(e) => write!(f, "numerical error: {e}"),
            CliError::Io(e) => write!(f, "i/o error: {e}"),
            CliError::Property(m) => write!(f, "property check failed: {m}"),
        }
    }
}

type CliResult<T> = Result<T, CliError>;

impl RunConfig {
    pub fn parse(text: &str) -> CliResult<RunConfig> {
        let cfg: RunConfig =
            serde_json::from_str(text).map_err(|e| CliError::Schema(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> CliResult<RunConfig> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Schema(format!("cannot read {}: {e}", path.display())))?;
        RunConfig::parse(&text)
    }

    pub fn chart(&self) -> CliResult<Arc<Chart>> {
        let surface = SurfaceType::new(self.surface.genus, self.surface.punctures)?;
        let chart = match &self.gluing {
            Some(pieces) => make_chart(
                surface,
                &Gluing {
                    pieces: pieces.clone(),
                },
            )?,
            None => Chart::standard(surface)?,
        };
        Ok(Arc::new(chart))
    }

    pub fn flow_config(&self) -> FlowConfig {
        FlowConfig {
            eps: self.eps,
            duration: self.duration,
            mode: self.mode,
            metric: self.metric,
            integrator: self.integrator,
            enumeration: self.enumeration,
            ..FlowConfig::new(self.eps)
        }
    }

    /// Check everything that does not depend on the command.
    pub fn validate(&self) -> CliResult<()> {
        self.flow_config().validate()?;
        let chart = self.chart()?;
        for p in &self.points {
            FnPoint::new(chart.clone(), p.lengths.clone(), p.twists.clone())?;
        }
        if let Some(c) = &self.continuity {
            c.validate()?;
        }
        if let Some(eq) = &self.equivariance {
            for l in &eq.loci {
                FnPoint::new(
                    chart.clone(),
                    l.point.lengths.clone(),
                    l.point.twists.clone(),
                )?;
                for pair in &l.relations {
                    for s in pair {
                        CurveClass::parse(s)?;
                    }
                }
            }
        }
        Ok(())
    }

    /// The configuration with the output directory removed, as hashed.
    pub fn hashed(&self) -> RunConfig {
        RunConfig {
            output_dir: None,
            ..self.clone()
        }
    }

    pub fn hash(&self) -> String {
        let text = serde_json::to_string(&self.hashed()).expect("config serializes");
        hex::encode(Sha256::digest(text.as_bytes()))
    }

    /// Explicit points followed by the seeded sample.
    pub fn points(&self, chart: &Arc<Chart>, rng: &mut ChaCha8Rng) -> CliResult<Vec<FnPoint>> {
        let mut pts: Vec<FnPoint> = self
            .points
            .iter()
            .map(|p| FnPoint::new(chart.clone(), p.lengths.clone(), p.twists.clone()))
            .collect::<Result<_, _>>()?;
        if let Some(s) = self.sample {
            for _ in 0..s.count {
                pts.push(match s.kind {
                    SampleKind::Thin => random_thin_point(chart, self.eps, rng)?,
                    SampleKind::Thick => random_thick_point(chart, self.eps, rng)?,
                });
            }
        }
        Ok(pts)
    }
}

/// Writes artifacts into one directory, stamping each with the config hash.
pub struct Artifacts {
    dir: PathBuf,
    hash: String,
    written: Vec<PathBuf>,
}

#[derive(Serialize)]
struct Stamped<'a, T: Serialize> {
    config_hash: &'a str,
    command: Command,
    #[serde(flatten)]
    body: T,
}

impl Artifacts {
    pub fn new(dir: &Path, hash: &str) -> CliResult<Artifacts> {
        fs::create_dir_all(dir)?;
        Ok(Artifacts {
            dir: dir.to_path_buf(),
            hash: hash.to_string(),
            written: vec![],
        })
    }

    pub fn json<T: Serialize>(&mut self, name: &str, command: Command, body: T) -> CliResult<()> {
        let path = self.dir.join(name);
        let stamped = Stamped {
            config_hash: &self.hash,
            command,
            body,
        };
        let mut text = serde_json::to_string_pretty(&stamped).expect("report serializes");
        text.push('\n');
        fs::write(&path, text)?;
        self.written.push(path);
        Ok(())
    }

    pub fn csv(&mut self, name: &str, header: &[String], rows: &[Vec<String>]) -> CliResult<()> {
        let path = self.dir.join(name);
        let mut file = fs::File::create(&path)?;
        writeln!(file, "# config_hash: {}", self.hash)?;
        let mut w = csv::Writer::from_writer(file);
        w.write_record(header)?;
        for r in rows {
            w.write_record(r)?;
        }
        w.flush()?;
        self.written.push(path);
        Ok(())
    }

    pub fn written(&self) -> &[PathBuf] {
        &self.written
    }
}

fn join_classes(c: &[CurveClass]) -> String {
    c.iter()
        .map(|c| c.to_string())
        .collect::<Vec<_>>()
        .join(";")
}

fn coord_header(d: usize) -> Vec<String> {
    (0..d)
        .map(|i| format!("l{i}"))
        .chain((0..d).map(|i| format!("t{i}")))
        .collect()
}

fn fmt_coords(x: &FnPoint) -> Vec<String> {
    x.coords().iter().map(|v| v.to_string()).collect()
}

fn trajectory_rows(traj: &Trajectory) -> Vec<Vec<String>> {
    traj.samples
        .iter()
        .map(|s| {
            let mut row = vec![s.t.to_string()];
            row.extend(fmt_coords(&s.point));
            row.push(s.systole.to_string());
            row.push(join_classes(&s.active));
            row.push(s.dsystole_dt.to_string());
            row
        })
        .collect()
}

#[derive(Serialize)]
struct GramEntry {
    point: Vec<f64>,
    field: FieldEval,
    /// `2π·⟨grad √ℓ_σ, grad √ℓ_σ'⟩`.
    root_length_gram: Vec<Vec<f64>>,
}

#[derive(Serialize)]
struct FlowReport {
    trajectories: Vec<FlowSummary>,
    pass: bool,
}

/// Run one command and write its artifacts. Returns the artifact paths.
pub fn dispatch(cfg: &RunConfig, command: Command, out: &Path) -> CliResult<Vec<PathBuf>> {
    let chart = cfg.chart()?;
    let hash = cfg.hash();
    let mut art = Artifacts::new(out, &hash)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let fc = cfg.flow_config();
    let d = chart.curve_count();
    match command {
        Command::Systole => {
            let pts = cfg.points(&chart, &mut rng)?;
            let mut rows = vec![];
            for x in &pts {
                let s = systole(x, &cfg.enumeration)?;
                let member = in_truncated(x, cfg.eps, &cfg.enumeration)?;
                let mut row = fmt_coords(x);
                row.push(s.value.to_string());
                row.push(join_classes(&s.realizers));
                row.push(member.to_string());
                rows.push(row);
            }
            let mut header = coord_header(d);
            header.extend(["systole", "realizers", "in_truncated"].map(String::from));
            art.csv("systole.csv", &header, &rows)?;
        }
        Command::Flow | Command::Retract => {
            let fc = if command == Command::Retract {
                FlowConfig {
                    duration: Some(cfg.eps),
                    ..fc
                }
            } else {
                fc
            };
            let pts = cfg.points(&chart, &mut rng)?;
            let mut header = vec!["time".to_string()];
            header.extend(coord_header(d));
            header.extend(["systole", "active_set", "dsystole_dt"].map(String::from));
            let mut summaries = vec![];
            let mut failures = vec![];
            for (k, x) in pts.iter().enumerate() {
                log::info!("{command} {k}: start {:?}", x.coords());
                let traj = flow(x, &fc)?;
                art.csv(
                    &format!("trajectory_{k}.csv"),
                    &header,
                    &trajectory_rows(&traj),
                )?;
                let s = summarize(&traj, &fc)?;
                if s.max_systole_decrease > MONOTONE_TOL {
                    failures.push(format!(
                        "trajectory {k}: systole decreased by {:e}",
                        s.max_systole_decrease
                    ));
                }
                if command == Command::Retract && !s.end_in_truncated {
                    failures.push(format!(
                        "trajectory {k}: endpoint systole {} < ε",
                        s.systole_end
                    ));
                }
                summaries.push(s);
            }
            let name = format!("{}_summary.json", command.name());
            art.json(
                &name,
                command,
                FlowReport {
                    trajectories: summaries,
                    pass: failures.is_empty(),
                },
            )?;
            if !failures.is_empty() {
                return Err(CliError::Property(failures.join("; ")));
            }
        }
        Command::Gram => {
            let pts = cfg.points(&chart, &mut rng)?;
            let mut entries = vec![];
            for x in &pts {
                let field = vector_field(x, cfg.eps, cfg.mode, &cfg.metric, &cfg.enumeration)?;
                // grad √ℓ = grad ℓ / (2√ℓ).
                let lengths: Vec<f64> = field.short_set.entries.iter().map(|e| e.length).collect();
                let root_length_gram = field
                    .gram
                    .iter()
                    .enumerate()
                    .map(|(i, row)| {
                        row.iter()
                            .enumerate()
                            .map(|(j, g)| {
                                2.0 * std::f64::consts::PI * g
                                    / (4.0 * (lengths[i] * lengths[j]).sqrt())
                            })
                            .collect()
                    })
                    .collect();
                entries.push(GramEntry {
                    point: x.coords(),
                    field,
                    root_length_gram,
                });
            }
            art.json(
                "gram.json",
                command,
                serde_json::json!({ "points": entries }),
            )?;
        }
        Command::Equivariance => {
            let spec = cfg.equivariance.clone().unwrap_or_default();
            let pts = cfg.points(&chart, &mut rng)?;
            let mut reports = vec![];
            for x in &pts {
                for mc in &spec.mapping_classes {
                    reports.push(equivariance_check(mc, x, &fc)?);
                }
            }
            let mut loci = vec![];
            for l in &spec.loci {
                let x = FnPoint::new(
                    chart.clone(),
                    l.point.lengths.clone(),
                    l.point.twists.clone(),
                )?;
                let rel: Vec<(CurveClass, CurveClass)> = l
                    .relations
                    .iter()
                    .map(|[a, b]| Ok((CurveClass::parse(a)?, CurveClass::parse(b)?)))
                    .collect::<Result<_, Error>>()?;
                loci.push(symmetric_locus_check(&x, &rel, &fc)?);
            }
            let pass = reports.iter().all(|r| r.pass && r.systole_invariant)
                && loci.iter().all(|l| l.pass);
            art.json(
                "equivariance.json",
                command,
                serde_json::json!({ "twists": reports, "loci": loci, "pass": pass }),
            )?;
            if !pass {
                return Err(CliError::Property(
                    "equivariance or locus check failed".into(),
                ));
            }
        }
        Command::ContinuityDemo => {
            let cc = cfg.continuity.unwrap_or_default();
            let r = continuity_demo(
                &chart,
                cfg.eps,
                &cfg.metric,
                &cfg.enumeration,
                &cc,
                &mut rng,
            )?;
            let pass = r.pass;
            art.json("continuity.json", command, r)?;
            if !pass {
                return Err(CliError::Property("continuity demo failed".into()));
            }
        }
        Command::CoverCheck => {
            let cc = cfg
                .cover
                .clone()
                .ok_or_else(|| CliError::Schema("cover-check needs a \"cover\" section".into()))?;
            let r = cover_check(&chart, cfg.eps, &cfg.enumeration, &cc, &mut rng)?;
            let pass = r.pass;
            art.json("cover.json", command, r)?;
            if !pass {
                return Err(CliError::Property(
                    "some samples lie outside every box".into(),
                ));
            }
        }
    }
    Ok(art.written().to_vec())
}

#[derive(Debug, Clone, clap::Parser)]
#[command(
    name = "teichretract",
    version,
    about = "Thick-part retraction of Teichmüller space"
)]
pub struct Cli {
    /// Run configuration (JSON).
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory; overrides `output_dir` in the config.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Random seed; overrides `seed` in the config.
    #[arg(long)]
    pub seed: Option<u64>,
    /// One of systole, flow, retract, gram, equivariance, continuity-demo, cover-check.
    #[arg(long)]
    pub command: Option<String>,
    /// Log progress to stderr; repeat for more detail.
    #[arg(short, long, action = clap::ArgAction::Count)]
    pub verbose: u8,
}

#[derive(Serialize)]
struct ErrorReport<'a> {
    config_hash: &'a str,
    command: Command,
    kind: &'a str,
    message: String,
}

/// Resolve the effective configuration, dispatch, and map failures to exit codes.
pub fn run(cli: &Cli) -> i32 {
    let resolved = (|| -> CliResult<(RunConfig, Command, PathBuf)> {
        let mut cfg = RunConfig::load(&cli.config)?;
        if let Some(seed) = cli.seed {
            cfg.seed = seed;
        }
        let command = match &cli.command {
            Some(name) => name.parse().map_err(CliError::Schema)?,
            None => cfg
                .command
                .ok_or_else(|| CliError::Schema("no command given".into()))?,
        };
        cfg.command = Some(command);
        let out = cli
            .out
            .clone()
            .or_else(|| cfg.output_dir.clone())
            .unwrap_or_else(|| PathBuf::from("out"));
        Ok((cfg, command, out))
    })();
    let (cfg, command, out) = match resolved {
        Ok(r) => r,
        Err(e) => {
            eprintln!("{e}");
            return e.exit_code();
        }
    };
    match dispatch(&cfg, command, &out) {
        Ok(paths) => {
            for p in paths {
                println!("{}", p.display());
            }
            0
        }
        Err(e) => {
            eprintln!("{e}");
            if let CliError::Numerical(err) = &e {
                let hash = cfg.hash();
                let report = ErrorReport {
                    config_hash: &hash,
                    command,
                    kind: err.kind(),
                    message: err.to_string(),
                };
                let written = fs::create_dir_all(&out).and_then(|_| {
                    fs::write(
                        out.join("error.json"),
                        serde_json::to_string_pretty(&report).expect("error serializes") + "\n",
                    )
                });
                if let Err(io) = written {
                    eprintln!("could not write error.json: {io}");
                }
            }
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn minimal(extra: &str) -> String {
        format!(r#"{{"surface": {{"genus": 1, "punctures": 1}}, "eps": 0.05{extra}}}"#)
    }

    #[test]
    fn parse_minimal_config() {
        let cfg = RunConfig::parse(&minimal("")).unwrap();
        assert_eq!(cfg.metric, MetricModel::MODEL_WP);
        assert_eq!(cfg.mode, FieldMode::Blended);
    }

    #[test]
    fn schema_errors() {
        for bad in [
            r#"{"surface": {"genus": 1, "punctures": 1}, "eps": 0.0}"#,
            r#"{"surface": {"genus": 1, "punctures": 1}, "eps": -1}"#,
            r#"{"surface": {"genus": 1, "punctures": 1}}"#,
            r#"{"surface": {"genus": 1, "punctures": 0}, "eps": 0.05}"#,
            r#"{"surface": {"genus": 1, "punctures": 1}, "eps": 0.05, "bogus": 1}"#,
        ] {
            assert!(
                matches!(RunConfig::parse(bad), Err(CliError::Schema(_))),
                "{bad}"
            );
        }
        let bad_point = minimal(r#", "points": [{"lengths": [0.0], "twists": [0.0]}]"#);
        assert!(matches!(
            RunConfig::parse(&bad_point),
            Err(CliError::Schema(_))
        ));
    }

    #[test]
    fn hash_ignores_output_dir() {
        let a = RunConfig::parse(&minimal("")).unwrap();
        let b = RunConfig::parse(&minimal(r#", "output_dir": "elsewhere""#)).unwrap();
        assert_eq!(a.hash(), b.hash());
        let c = RunConfig::parse(&minimal(r#", "seed": 3"#)).unwrap();
        assert_ne!(a.hash(), c.hash());
    }

    #[test]
    fn command_names_roundtrip() {
        for c in Command::ALL {
            assert_eq!(c.name().parse::<Command>().unwrap(), c);
            let j = serde_json::to_string(&c).unwrap();
            assert_eq!(j, format!("\"{}\"", c.name()));
        }
    }
}
