use std::fs;
use std::path::{Path, PathBuf};

use clap::Args;
use serde::{Deserialize, Serialize};

use rado_lab::coloring::DEFAULT_BUDGET;
use rado_lab::{Error, GroundSet, IntegerMatrix, Result};

/// Options shared by every command. Each may also come from `--config`.
#[derive(Args, Clone, Debug, Default)]
pub struct CommonArgs {
    /// TOML file with defaults for the options below; flags take precedence.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Matrix file (one row per line), an inline matrix such as "1 1 -1" or
    /// "1 -2 1; 0 1 -2", or "ap:K" for the k-AP matrix.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub matrix: Option<String>,
    /// Ground set, e.g. interval:9, lattice:4:2, cyclic:36, power:Z4:3, primes:100,
    /// explicit:@file (append -0 to drop the identity). Repeat or comma-separate.
    #[arg(long, global = true, value_delimiter = ',')]
    pub ground: Vec<String>,
    /// Number of colors.
    #[arg(long, global = true)]
    pub r: Option<u32>,
    /// Probabilities, comma-separated.
    #[arg(long, global = true, value_delimiter = ',')]
    pub p: Vec<f64>,
    /// Monte Carlo trials per point (default 100).
    #[arg(long, global = true)]
    pub trials: Option<u64>,
    /// Master seed; trial i uses stream i of this seed (default 0).
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Backtracking node budget for coloring searches.
    #[arg(long = "budget-nodes", global = true)]
    pub budget_nodes: Option<u64>,
    /// Worker threads for Monte Carlo trials; results do not depend on it.
    #[arg(long, global = true, env = "RADO_THREADS")]
    pub threads: Option<usize>,
    /// Output file; `.csv` gets the table, anything else the JSON report.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Print the JSON report instead of text.
    #[arg(long, global = true)]
    pub json: bool,
}

#[derive(Deserialize, Default, Debug)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
struct FileConfig {
    matrix: Option<String>,
    ground: Option<Vec<String>>,
    r: Option<u32>,
    p: Option<Vec<f64>>,
    trials: Option<u64>,
    seed: Option<u64>,
    budget_nodes: Option<u64>,
    threads: Option<usize>,
    out: Option<PathBuf>,
    json: Option<bool>,
}

/// Where the matrix came from, kept verbatim for the output header.
#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum MatrixSource {
    File(PathBuf),
    Inline(String),
    Ap(usize),
}

#[derive(Clone, Debug, Serialize)]
pub struct ExperimentConfig {
    pub command: String,
    pub matrix: Option<MatrixSource>,
    pub ground: Vec<String>,
    pub r: u32,
    pub p: Vec<f64>,
    pub trials: u64,
    pub seed: u64,
    pub budget_nodes: u64,
    pub threads: Option<usize>,
    pub out: Option<PathBuf>,
    pub json: bool,
    /// Command-specific flags as given.
    pub options: serde_json::Value,
}

pub const DEFAULT_TRIALS: u64 = 100;

fn matrix_source(s: &str, base: Option<&Path>) -> Result<MatrixSource> {
    if let Some(k) = s.strip_prefix("ap:") {
        let k = k
            .parse()
            .map_err(|_| Error::Parse(format!("bad AP length in --matrix {s:?}")))?;
        return Ok(MatrixSource::Ap(k));
    }
    let inline = s
        .chars()
        .all(|c| c.is_ascii_digit() || c.is_whitespace() || matches!(c, '-' | '+' | ';' | ','));
    if inline && s.chars().any(|c| c.is_ascii_digit()) && !Path::new(s).exists() {
        return Ok(MatrixSource::Inline(s.to_string()));
    }
    let path = match base {
        Some(dir) if Path::new(s).is_relative() => dir.join(s),
        _ => PathBuf::from(s),
    };
    if !path.is_file() {
        return Err(Error::Invalid(format!("matrix file {} does not exist", path.display())));
    }
    Ok(MatrixSource::File(path))
}

impl MatrixSource {
    pub fn load(&self) -> Result<IntegerMatrix> {
        match self {
            MatrixSource::File(p) => fs::read_to_string(p)?.parse(),
            MatrixSource::Inline(s) => s.parse(),
            MatrixSource::Ap(k) => IntegerMatrix::ap_matrix(*k),
        }
    }
}

/// Defaults, then the config file, then flags. Ground specs and the matrix
/// are parsed here so that errors surface before any work starts.
pub fn parse_config(command: &str, args: &CommonArgs, options: serde_json::Value) -> Result<ExperimentConfig> {
    let (file, base) = match &args.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| Error::Invalid(format!("config file {}: {e}", path.display())))?;
            let file: FileConfig = toml::from_str(&text)
                .map_err(|e| Error::Parse(format!("config file {}: {e}", path.display())))?;
            (file, path.parent().map(Path::to_path_buf))
        }
        None => (FileConfig::default(), None),
    };
    let matrix = match (&args.matrix, &file.matrix) {
        (Some(m), _) => Some(matrix_source(m, None)?),
        (None, Some(m)) => Some(matrix_source(m, base.as_deref())?),
        (None, None) => None,
    };
    if let Some(m) = &matrix {
        m.load()?;
    }
    let ground = if args.ground.is_empty() {
        file.ground.unwrap_or_default()
    } else {
        args.ground.clone()
    };
    for g in &ground {
        g.parse::<GroundSet>()?;
    }
    let p = if args.p.is_empty() { file.p.unwrap_or_default() } else { args.p.clone() };
    if let Some(bad) = p.iter().find(|p| !(0.0..=1.0).contains(*p)) {
        return Err(Error::Parse(format!("--p {bad} is outside [0, 1]")));
    }
    let r = args.r.or(file.r).unwrap_or(2);
    if r == 0 || r > 32 {
        return Err(Error::Parse(format!("--r {r} is outside 1..=32")));
    }
    Ok(ExperimentConfig {
        command: command.to_string(),
        matrix,
        ground,
        r,
        p,
        trials: args.trials.or(file.trials).unwrap_or(DEFAULT_TRIALS),
        seed: args.seed.or(file.seed).unwrap_or(0),
        budget_nodes: args.budget_nodes.or(file.budget_nodes).unwrap_or(DEFAULT_BUDGET),
        threads: args.threads.or(file.threads),
        out: args.out.clone().or(file.out),
        json: args.json || file.json.unwrap_or(false),
        options,
    })
}

impl ExperimentConfig {
    pub fn matrix(&self) -> Result<IntegerMatrix> {
        self.matrix
            .as_ref()
            .ok_or_else(|| Error::Invalid(format!("`{}` needs --matrix", self.command)))?
            .load()
    }

    pub fn grounds(&self) -> Result<Vec<GroundSet>> {
        self.ground.iter().map(|g| g.parse()).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn common() -> CommonArgs {
        CommonArgs::default()
    }

    #[test]
    fn flags_resolve_with_defaults() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("schur.txt");
        fs::write(&path, "1 1 -1\n").unwrap();
        let args = CommonArgs {
            matrix: Some(path.display().to_string()),
            ground: vec!["cyclic:36".into()],
            ..common()
        };
        let cfg = parse_config("analyze", &args, serde_json::Value::Null).unwrap();
        assert_eq!(cfg.matrix, Some(MatrixSource::File(path)));
        assert_eq!((cfg.r, cfg.trials, cfg.seed, cfg.budget_nodes), (2, DEFAULT_TRIALS, 0, DEFAULT_BUDGET));
        assert_eq!(cfg.matrix().unwrap(), IntegerMatrix::row(&[1, 1, -1]).unwrap());
    }

    #[test]
    fn malformed_inputs() {
        let bad_ground = CommonArgs {
            ground: vec!["cyclic:0".into()],
            ..common()
        };
        assert!(matches!(parse_config("analyze", &bad_ground, serde_json::Value::Null), Err(Error::Parse(_))));
        let missing = CommonArgs {
            matrix: Some("/no/such/matrix.txt".into()),
            ..common()
        };
        assert!(parse_config("analyze", &missing, serde_json::Value::Null).is_err());
        let bad_p = CommonArgs {
            p: vec![1.5],
            ..common()
        };
        assert!(parse_config("mc", &bad_p, serde_json::Value::Null).is_err());
    }

    #[test]
    fn inline_and_ap_matrices() {
        assert_eq!(matrix_source("2 2 -2", None).unwrap(), MatrixSource::Inline("2 2 -2".into()));
        assert_eq!(matrix_source("ap:4", None).unwrap().load().unwrap(), IntegerMatrix::ap_matrix(4).unwrap());
    }

    #[test]
    fn flags_override_config_file() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("m.txt"), "1 1 -1\n").unwrap();
        let cfg_path = dir.path().join("run.toml");
        let mut f = fs::File::create(&cfg_path).unwrap();
        writeln!(f, "matrix = \"m.txt\"\nground = [\"interval:9\"]\nseed = 5\ntrials = 40\nbudget-nodes = 1000").unwrap();
        let args = CommonArgs {
            config: Some(cfg_path.clone()),
            seed: Some(9),
            ..common()
        };
        let cfg = parse_config("color", &args, serde_json::Value::Null).unwrap();
        assert_eq!((cfg.seed, cfg.trials, cfg.budget_nodes), (9, 40, 1000));
        assert_eq!(cfg.ground, vec!["interval:9".to_string()]);
        assert_eq!(cfg.matrix, Some(MatrixSource::File(dir.path().join("m.txt"))));
        let echoed = serde_json::to_string(&cfg).unwrap();
        assert!(echoed.contains("\"seed\":9"));

        fs::write(&cfg_path, "sede = 3\n").unwrap();
        let err = parse_config("color", &args, serde_json::Value::Null).unwrap_err();
        assert!(err.to_string().contains("sede"), "{err}");
    }
}
