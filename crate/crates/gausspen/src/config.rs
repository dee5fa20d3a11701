//! Experiment configuration files.
//!
//! The format is line oriented: `[section]` headers and `key = value` pairs,
//! with `#` starting a comment. Keys before the first header belong to
//! `[run]`. Numeric grids may be written as a comma list, as
//! `range(start, stop, step)` (inclusive) or as `logspace(min, max, count)`.
//! Penalty lists look like `none, lasso, mcp(b=1.5), gaussian(kappa=10)`.
//!
//! Parsing never stops at the first problem: every issue found is returned.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use gausspen_core::grid::{linear_grid, loggrid};
use gausspen_core::linalg::Matrix;
use gausspen_core::{Family, PenaltySpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Command {
    PenaltyTable,
    OrthoScan,
    BiasMc,
    ConsistencyMc,
    TrainMlp,
}

impl Command {
    pub const ALL: [Command; 5] =
        [Command::PenaltyTable, Command::OrthoScan, Command::BiasMc, Command::ConsistencyMc, Command::TrainMlp];

    pub fn name(self) -> &'static str {
        match self {
            Command::PenaltyTable => "penalty-table",
            Command::OrthoScan => "ortho-scan",
            Command::BiasMc => "bias-mc",
            Command::ConsistencyMc => "consistency-mc",
            Command::TrainMlp => "train-mlp",
        }
    }
}

impl FromStr for Command {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Command::ALL.into_iter().find(|c| c.name() == s).ok_or_else(|| format!("unknown command `{s}`"))
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Issue {
    /// 1-based line, 0 when the problem is not tied to a line.
    pub line: usize,
    pub message: String,
}

impl fmt::Display for Issue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.line == 0 {
            f.write_str(&self.message)
        } else {
            write!(f, "line {}: {}", self.line, self.message)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub struct ConfigErrors(pub Vec<Issue>);

impl fmt::Display for ConfigErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{} configuration problem(s):", self.0.len())?;
        for issue in &self.0 {
            writeln!(f, "  {issue}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSettings {
    pub seeds: Vec<u64>,
    pub out: Option<PathBuf>,
    pub jobs: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PenaltyTableConfig {
    pub penalties: Vec<PenaltySpec>,
    pub beta: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OrthoScanConfig {
    pub beta_ols: f64,
    pub kappa: f64,
    pub lambda: Vec<f64>,
    pub curve_beta: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationConfig {
    pub beta: Vec<f64>,
    pub covariance: Matrix,
    pub sigma: f64,
    pub kappa: f64,
    pub lambda0: f64,
    pub replicates: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BiasConfig {
    pub sim: SimulationConfig,
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConsistencyConfig {
    pub sim: SimulationConfig,
    pub lambda_exponent: f64,
    pub n: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum DatasetSource {
    Blobs { classes: usize, per_class: usize, dimension: usize, separation: f64, label_noise: f64 },
    Digits { per_class: usize, noise: f64, label_noise: f64 },
    Csv { path: PathBuf, num_classes: Option<usize> },
    Idx { images: PathBuf, labels: PathBuf, num_classes: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfigFile {
    pub dataset: DatasetSource,
    pub data_seed: u64,
    pub split: [f64; 3],
    pub hidden: Vec<usize>,
    pub penalties: Vec<PenaltySpec>,
    /// λ grid for each entry of `penalties`.
    pub lambdas: Vec<Vec<f64>>,
    pub lr_min: f64,
    pub lr_max: f64,
    pub cycle_length: Option<usize>,
    pub batch_size: usize,
    pub patience: usize,
    pub max_epochs: usize,
    pub checkpoints: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Task {
    PenaltyTable(PenaltyTableConfig),
    OrthoScan(OrthoScanConfig),
    Bias(BiasConfig),
    Consistency(ConsistencyConfig),
    Train(TrainConfigFile),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub command: Command,
    pub run: RunSettings,
    pub task: Task,
}

struct Entry {
    value: String,
    line: usize,
    used: bool,
}

struct Section {
    line: usize,
    entries: BTreeMap<String, Entry>,
}

/// Typed access to one section; problems are pushed onto a shared list.
struct Reader<'a> {
    name: String,
    section: Option<&'a mut Section>,
    issues: &'a mut Vec<Issue>,
}

impl Reader<'_> {
    fn raw(&mut self, key: &str) -> Option<(String, usize)> {
        let entry = self.section.as_mut()?.entries.get_mut(key)?;
        entry.used = true;
        Some((entry.value.clone(), entry.line))
    }

    fn keys_with_prefix(&self, prefix: &str) -> Vec<String> {
        self.section
            .as_ref()
            .map(|s| s.entries.keys().filter(|k| k.starts_with(prefix)).cloned().collect())
            .unwrap_or_default()
    }

    fn issue(&mut self, line: usize, message: String) {
        self.issues.push(Issue { line, message });
    }

    fn get<T>(&mut self, key: &str, default: T, parse: impl Fn(&str) -> Result<T, String>) -> T {
        match self.raw(key) {
            None => default,
            Some((value, line)) => match parse(&value) {
                Ok(v) => v,
                Err(e) => {
                    let name = self.name.clone();
                    self.issue(line, format!("[{name}] {key}: {e}"));
                    default
                }
            },
        }
    }

    fn check(&mut self, key: &str, ok: bool, requirement: &str) {
        if !ok {
            let line = self.section.as_ref().and_then(|s| s.entries.get(key)).map_or(0, |e| e.line);
            let name = self.name.clone();
            self.issue(line, format!("[{name}] {key}: {requirement}"));
        }
    }
}

fn parse_number<T: FromStr>(s: &str) -> Result<T, String> {
    s.trim().parse::<T>().map_err(|_| format!("cannot parse `{}` as a number", s.trim()))
}

fn parse_bool(s: &str) -> Result<bool, String> {
    match s.trim() {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        other => Err(format!("expected true or false, found `{other}`")),
    }
}

fn parse_list<T: FromStr>(s: &str) -> Result<Vec<T>, String> {
    let items: Result<Vec<T>, String> = s.split(',').map(parse_number).collect();
    let items = items?;
    if items.is_empty() {
        return Err("list is empty".into());
    }
    Ok(items)
}

/// Splits on commas that are not inside parentheses.
fn split_top_level(s: &str) -> Vec<String> {
    let mut parts = Vec::new();
    let mut depth = 0i32;
    let mut current = String::new();
    for ch in s.chars() {
        match ch {
            '(' => depth += 1,
            ')' => depth -= 1,
            ',' if depth == 0 => {
                parts.push(current.trim().to_string());
                current.clear();
                continue;
            }
            _ => {}
        }
        current.push(ch);
    }
    if !current.trim().is_empty() || !parts.is_empty() {
        parts.push(current.trim().to_string());
    }
    parts
}

/// `name(arg, arg)` → `("name", [args])`; a bare word has no arguments.
fn call(s: &str) -> Result<(String, Vec<String>), String> {
    let s = s.trim();
    match s.find('(') {
        None => Ok((s.to_string(), Vec::new())),
        Some(open) => {
            if !s.ends_with(')') {
                return Err(format!("unbalanced parentheses in `{s}`"));
            }
            let args = split_top_level(&s[open + 1..s.len() - 1]);
            Ok((s[..open].trim().to_string(), args))
        }
    }
}

pub fn parse_grid(s: &str) -> Result<Vec<f64>, String> {
    let (name, args) = call(s)?;
    let numbers = |args: &[String]| -> Result<Vec<f64>, String> { args.iter().map(|a| parse_number(a)).collect() };
    match name.as_str() {
        "range" => {
            let a = numbers(&args)?;
            if a.len() != 3 {
                return Err("range takes (start, stop, step)".into());
            }
            linear_grid(a[0], a[1], a[2]).map_err(|e| e.to_string())
        }
        "logspace" => {
            if args.len() != 3 {
                return Err("logspace takes (min, max, count)".into());
            }
            let min = parse_number(&args[0])?;
            let max = parse_number(&args[1])?;
            let count: usize = parse_number(&args[2])?;
            loggrid(min, max, count).map_err(|e| e.to_string())
        }
        _ if args.is_empty() => parse_list(s),
        other => Err(format!("unknown grid generator `{other}`")),
    }
}

fn parse_penalty(s: &str) -> Result<PenaltySpec, String> {
    let (name, args) = call(s)?;
    let family = Family::from_name(&name).ok_or_else(|| format!("unknown penalty family `{name}`"))?;
    let mut spec = PenaltySpec::new(family);
    for arg in args {
        let (key, value) = arg.split_once('=').ok_or_else(|| format!("expected key=value, found `{arg}`"))?;
        let value: f64 = parse_number(value)?;
        let slot = match key.trim() {
            "kappa" => &mut spec.kappa,
            "a" => &mut spec.a,
            "b" => &mut spec.b,
            "epsilon" => &mut spec.epsilon,
            "gamma" => &mut spec.gamma,
            "q" => &mut spec.q,
            "mix" => &mut spec.mix,
            other => return Err(format!("unknown penalty parameter `{other}`")),
        };
        *slot = value;
    }
    spec.validate().map_err(|e| e.to_string())?;
    Ok(spec)
}

pub fn parse_penalties(s: &str) -> Result<Vec<PenaltySpec>, String> {
    let specs: Result<Vec<_>, _> = split_top_level(s).iter().map(|p| parse_penalty(p)).collect();
    let specs = specs?;
    if specs.is_empty() {
        return Err("penalty list is empty".into());
    }
    Ok(specs)
}

fn parse_matrix(s: &str) -> Result<Matrix, String> {
    let rows: Result<Vec<Vec<f64>>, String> = s.split(';').map(parse_list).collect();
    Matrix::from_rows(&rows?).map_err(|_| "rows must have equal length".into())
}

fn parse_split(s: &str) -> Result<[f64; 3], String> {
    let v: Vec<f64> = parse_list(s)?;
    v.try_into().map_err(|_| "expected three fractions".to_string())
}

fn default_penalties() -> Vec<PenaltySpec> {
    vec![PenaltySpec::lasso(), PenaltySpec::ridge(), PenaltySpec::arctan(1.0), PenaltySpec::gaussian(10.0)]
}

fn parse_sections(text: &str, issues: &mut Vec<Issue>) -> BTreeMap<String, Section> {
    let mut sections: BTreeMap<String, Section> = BTreeMap::new();
    let mut current = "run".to_string();
    for (i, raw_line) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw_line.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if let Some(rest) = content.strip_prefix('[') {
            match rest.strip_suffix(']') {
                Some(name) => {
                    current = name.trim().to_string();
                    if sections.contains_key(&current) {
                        issues.push(Issue { line, message: format!("section [{current}] appears twice") });
                    }
                    sections.entry(current.clone()).or_insert(Section { line, entries: BTreeMap::new() });
                }
                None => issues.push(Issue { line, message: format!("malformed section header `{content}`") }),
            }
            continue;
        }
        let Some((key, value)) = content.split_once('=') else {
            issues.push(Issue { line, message: format!("expected `key = value`, found `{content}`") });
            continue;
        };
        let key = key.trim().to_string();
        let section = sections.entry(current.clone()).or_insert(Section { line, entries: BTreeMap::new() });
        if section.entries.contains_key(&key) {
            issues.push(Issue { line, message: format!("[{current}] {key} is set twice") });
        }
        section.entries.insert(key, Entry { value: value.trim().to_string(), line, used: false });
    }
    sections
}

fn read_simulation(r: &mut Reader, default_beta: Vec<f64>, default_kappa: f64, default_reps: usize) -> SimulationConfig {
    let beta = r.get("beta", default_beta, parse_list);
    let p = beta.len();
    let covariance = r.get("covariance", Matrix::identity(p), |s| {
        if s.trim() == "identity" {
            Ok(Matrix::identity(p))
        } else {
            parse_matrix(s)
        }
    });
    r.check("covariance", covariance.shape() == (p, p), "must be a p x p matrix matching beta");
    let sigma: f64 = r.get("sigma", 1.0, parse_number);
    r.check("sigma", sigma > 0.0 && sigma.is_finite(), "must be finite and > 0");
    let kappa = r.get("kappa", default_kappa, parse_number);
    r.check("kappa", kappa > 0.0 && kappa.is_finite(), "must be finite and > 0");
    let lambda0: f64 = r.get("lambda0", 1.0, parse_number);
    r.check("lambda0", lambda0 >= 0.0 && lambda0.is_finite(), "must be finite and >= 0");
    let replicates = r.get("replicates", default_reps, parse_number);
    r.check("replicates", replicates >= 1, "must be >= 1");
    SimulationConfig { beta, covariance, sigma, kappa, lambda0, replicates }
}

fn read_train(r: &mut Reader) -> TrainConfigFile {
    let kind = r.get("dataset", "blobs".to_string(), |s| Ok(s.trim().to_string()));
    let label_noise = r.get("label_noise", 0.0, parse_number);
    r.check("label_noise", (0.0..=1.0).contains(&label_noise), "must lie in [0, 1]");
    let dataset = match kind.as_str() {
        "blobs" => DatasetSource::Blobs {
            classes: r.get("classes", 3, parse_number),
            per_class: r.get("per_class", 100, parse_number),
            dimension: r.get("dimension", 2, parse_number),
            separation: r.get("separation", 3.0, parse_number),
            label_noise,
        },
        "digits" => DatasetSource::Digits {
            per_class: r.get("per_class", 60, parse_number),
            noise: r.get("pixel_noise", 0.2, parse_number),
            label_noise,
        },
        "csv" => {
            let path = r.get("path", None, |s| Ok(Some(PathBuf::from(s.trim()))));
            r.check("path", path.is_some(), "required when dataset = csv");
            let num_classes = r.get("num_classes", None, |s| parse_number(s).map(Some));
            DatasetSource::Csv { path: path.unwrap_or_default(), num_classes }
        }
        "idx" => {
            let images = r.get("images", None, |s| Ok(Some(PathBuf::from(s.trim()))));
            let labels = r.get("labels", None, |s| Ok(Some(PathBuf::from(s.trim()))));
            r.check("images", images.is_some(), "required when dataset = idx");
            r.check("labels", labels.is_some(), "required when dataset = idx");
            let num_classes = r.get("num_classes", 10, parse_number);
            DatasetSource::Idx { images: images.unwrap_or_default(), labels: labels.unwrap_or_default(), num_classes }
        }
        other => {
            r.check("dataset", false, &format!("unknown dataset kind `{other}` (blobs, digits, csv, idx)"));
            DatasetSource::Blobs { classes: 3, per_class: 100, dimension: 2, separation: 3.0, label_noise }
        }
    };
    let data_seed = r.get("data_seed", 0u64, parse_number);
    let split = r.get("split", [0.6, 0.2, 0.2], parse_split);
    let split_sum: f64 = split.iter().sum();
    r.check(
        "split",
        split.iter().all(|&f| f > 0.0) && (split_sum - 1.0).abs() <= 1e-9,
        "fractions must be positive and sum to 1",
    );
    let hidden = r.get("hidden", vec![32], parse_list);
    r.check("hidden", hidden.iter().all(|&h| h >= 1), "layer widths must be >= 1");
    let penalties = r.get("penalties", vec![PenaltySpec::none(), PenaltySpec::gaussian(10.0)], parse_penalties);
    let lambda = r.get("lambda", vec![1e-4, 1e-3, 1e-2], parse_grid);
    r.check("lambda", lambda.iter().all(|&l| l >= 0.0 && l.is_finite()), "values must be finite and >= 0");
    let mut lambdas = Vec::with_capacity(penalties.len());
    let overrides = r.keys_with_prefix("lambda.");
    for spec in &penalties {
        let key = format!("lambda.{}", spec.family.name());
        let default = if spec.family == Family::None { vec![0.0] } else { lambda.clone() };
        lambdas.push(r.get(&key, default, parse_grid));
    }
    for key in overrides {
        let family = &key["lambda.".len()..];
        if !penalties.iter().any(|p| p.family.name() == family) {
            r.raw(&key);
            r.check(&key, false, "no penalty of this family in `penalties`");
        }
    }
    let lr_min = r.get("lr_min", 0.01, parse_number);
    let lr_max: f64 = r.get("lr_max", 0.25, parse_number);
    r.check("lr_max", lr_min > 0.0 && lr_min < lr_max && lr_max.is_finite(), "need 0 < lr_min < lr_max");
    let cycle_length = r.get("cycle_length", None, |s| parse_number(s).map(Some));
    r.check("cycle_length", cycle_length != Some(0), "must be >= 1");
    let batch_size = r.get("batch_size", 64, parse_number);
    r.check("batch_size", batch_size >= 1, "must be >= 1");
    let patience = r.get("patience", 20, parse_number);
    r.check("patience", patience >= 1, "must be >= 1");
    let max_epochs = r.get("max_epochs", 250, parse_number);
    r.check("max_epochs", max_epochs >= 1, "must be >= 1");
    let checkpoints = r.get("checkpoints", false, parse_bool);
    TrainConfigFile {
        dataset,
        data_seed,
        split,
        hidden,
        penalties,
        lambdas,
        lr_min,
        lr_max,
        cycle_length,
        batch_size,
        patience,
        max_epochs,
        checkpoints,
    }
}

/// Parses `text` for `command`. Sections for other commands are allowed and ignored.
pub fn parse_config(text: &str, command: Command) -> Result<ExperimentConfig, ConfigErrors> {
    let mut issues = Vec::new();
    let mut sections = parse_sections(text, &mut issues);
    for (name, section) in &sections {
        if name != "run" && name.parse::<Command>().is_err() {
            issues.push(Issue { line: section.line, message: format!("unknown section [{name}]") });
        }
    }

    let mut run_section = sections.remove("run");
    let mut r = Reader { name: "run".into(), section: run_section.as_mut(), issues: &mut issues };
    let seeds = r.get("seeds", vec![1, 2, 3], parse_list);
    let out = r.get("out", None, |s| Ok(Some(PathBuf::from(s.trim()))));
    let jobs = r.get("jobs", None, |s| parse_number(s).map(Some));
    r.check("jobs", jobs != Some(0), "must be >= 1");
    let run = RunSettings { seeds, out, jobs };

    let mut task_section = sections.remove(command.name());
    let mut r = Reader { name: command.name().into(), section: task_section.as_mut(), issues: &mut issues };
    let task = match command {
        Command::PenaltyTable => Task::PenaltyTable(PenaltyTableConfig {
            penalties: r.get("penalties", default_penalties(), parse_penalties),
            beta: r.get("beta", linear_grid(-3.0, 3.0, 0.01).expect("static grid"), parse_grid),
        }),
        Command::OrthoScan => {
            let beta_ols: f64 = r.get("beta_ols", 3.0, parse_number);
            let kappa: f64 = r.get("kappa", 10.0, parse_number);
            r.check("kappa", kappa > 0.0 && kappa.is_finite(), "must be finite and > 0");
            let lambda = r.get("lambda", linear_grid(0.1, 15.1, 1.0).expect("static grid"), parse_grid);
            r.check(
                "lambda",
                lambda.windows(2).all(|w| w[1] > w[0]) && lambda.iter().all(|&l| l >= 0.0),
                "must be nonnegative and strictly increasing",
            );
            let half = beta_ols.abs() + 1.0;
            let default_curve = (0..=800).map(|i| -half + 2.0 * half * i as f64 / 800.0).collect();
            let curve_beta = r.get("curve_beta", default_curve, parse_grid);
            Task::OrthoScan(OrthoScanConfig { beta_ols, kappa, lambda, curve_beta })
        }
        Command::BiasMc => {
            let sim = read_simulation(&mut r, vec![1.0], 1.0, 500);
            let n = r.get("n", 1600, parse_number);
            r.check("n", n > sim.beta.len(), "must exceed the number of coefficients");
            Task::Bias(BiasConfig { sim, n })
        }
        Command::ConsistencyMc => {
            let sim = read_simulation(&mut r, vec![1.0, -2.0], 10.0, 200);
            let lambda_exponent: f64 = r.get("lambda_exponent", 0.5, parse_number);
            r.check("lambda_exponent", lambda_exponent >= 0.0 && lambda_exponent.is_finite(), "must be finite and >= 0");
            let n: Vec<usize> = r.get("n", vec![100, 400, 1600, 6400], parse_list);
            r.check("n", n.windows(2).all(|w| w[1] > w[0]), "must be strictly increasing");
            r.check("n", n.first().is_some_and(|&m| m > sim.beta.len()), "must exceed the number of coefficients");
            Task::Consistency(ConsistencyConfig { sim, lambda_exponent, n })
        }
        Command::TrainMlp => Task::Train(read_train(&mut r)),
    };

    for (name, section) in [("run", run_section), (command.name(), task_section)] {
        if let Some(section) = section {
            for (key, entry) in section.entries {
                if !entry.used {
                    issues.push(Issue { line: entry.line, message: format!("[{name}] unknown key `{key}`") });
                }
            }
        }
    }
    if issues.is_empty() {
        Ok(ExperimentConfig { command, run, task })
    } else {
        issues.sort_by_key(|i| i.line);
        Err(ConfigErrors(issues))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grids() {
        assert_eq!(parse_grid("logspace(0.01, 1, 3)").unwrap().len(), 3);
        assert_eq!(parse_grid("range(0.1, 15.1, 1.0)").unwrap().len(), 16);
        assert_eq!(parse_grid("1, 2.5").unwrap(), vec![1.0, 2.5]);
        assert!(parse_grid("logspace(1, 0.1, 3)").is_err());
        assert!(parse_grid("spline(1)").is_err());
    }

    #[test]
    fn penalties() {
        let specs = parse_penalties("none, mcp(b=1.5), arctan(gamma=100), gaussian(kappa=10)").unwrap();
        assert_eq!(specs.len(), 4);
        assert_eq!(specs[1].b, 1.5);
        assert_eq!(specs[2].gamma, 100.0);
        assert!(parse_penalties("gaussian(kappa=-1)").is_err());
        assert!(parse_penalties("gaussian(rho=1)").is_err());
        assert!(parse_penalties("cauchy").is_err());
    }

    #[test]
    fn defaults_fill_an_empty_file() {
        let cfg = parse_config("", Command::OrthoScan).unwrap();
        assert_eq!(cfg.run.seeds, vec![1, 2, 3]);
        let Task::OrthoScan(scan) = cfg.task else { panic!() };
        assert_eq!((scan.beta_ols, scan.kappa, scan.lambda.len()), (3.0, 10.0, 16));
    }

    #[test]
    fn all_problems_reported_together() {
        let text = "seeds = 1, x\n[bias-mc]\nsigma = -1\nkappa = abc\nfoo = 2\n[nonsense]\nnot a pair\n";
        let errs = parse_config(text, Command::BiasMc).unwrap_err();
        let lines: Vec<usize> = errs.0.iter().map(|i| i.line).collect();
        assert_eq!(lines, vec![1, 3, 4, 5, 6, 7], "{errs}");
    }

    #[test]
    fn per_family_lambda_grids() {
        let text = "[train-mlp]\npenalties = none, gaussian(kappa=10)\nlambda = logspace(1e-4, 1e-2, 3)\nlambda.gaussian = 0.5\n";
        let cfg = parse_config(text, Command::TrainMlp).unwrap();
        let Task::Train(t) = cfg.task else { panic!() };
        assert_eq!(t.lambdas, vec![vec![0.0], vec![0.5]]);
        assert!(parse_config("[train-mlp]\nlambda.lasso = 1\n", Command::TrainMlp).is_err());
    }
}
