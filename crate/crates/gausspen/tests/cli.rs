use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use gausspen::checkpoint;
use gausspen::config::{parse_config, Command as Cmd, Task};
use gausspen::experiments::load_splits;
use gausspen_core::neural::validation_loss;

fn gausspen(args: &[&str], cwd: &Path, env_out: Option<&Path>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_gausspen"));
    cmd.args(args).current_dir(cwd).env_remove("GAUSSPEN_OUT");
    if let Some(dir) = env_out {
        cmd.env("GAUSSPEN_OUT", dir);
    }
    cmd.output().expect("binary runs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn read_csv(path: &Path) -> Vec<Vec<String>> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

const TRAIN: &str = "\
seeds = 1, 2, 3
[train-mlp]
dataset = blobs
classes = 3
per_class = 30
separation = 4
hidden = 6
penalties = none, gaussian(kappa=10)
lambda = logspace(0.001, 0.1, 3)
max_epochs = 12
patience = 4
batch_size = 16
checkpoints = true
";

#[test]
fn ortho_scan_writes_sixteen_profiles() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("scan.cfg"), "# default grid\n[ortho-scan]\nbeta_ols = 3\nkappa = 10\n").unwrap();
    let o = gausspen(&["ortho-scan", "--config", "scan.cfg", "--out", "out"], dir.path(), None);
    assert!(o.status.success(), "{}", stderr(&o));
    let profiles = read_csv(&dir.path().join("out/ortho_profiles.csv"));
    assert_eq!(profiles.len(), 1 + 16);
    assert_eq!(profiles[1][1], "1");
    assert_eq!(profiles[16][1], "2");
    let transition = read_csv(&dir.path().join("out/ortho_transition.csv"));
    assert_eq!(transition[1][2], "true");
    let lambda_star: f64 = transition[1][3].parse().unwrap();
    assert!((8.5..=9.3).contains(&lambda_star));
}

#[test]
fn penalty_table_covers_every_grid_point() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("p.cfg"), "[penalty-table]\npenalties = lasso, gaussian(kappa=10)\nbeta = range(-1, 1, 0.5)\n").unwrap();
    let o = gausspen(&["penalty-table", "--config", "p.cfg"], dir.path(), Some(&dir.path().join("env-out")));
    assert!(o.status.success(), "{}", stderr(&o));
    let rows = read_csv(&dir.path().join("env-out/penalty_table.csv"));
    assert_eq!(rows[0], ["penalty", "beta", "value", "gradient"]);
    assert_eq!(rows.len(), 1 + 2 * 5);
    // The lasso gradient at the kink is reported as zero.
    let kink = rows.iter().find(|r| r[0] == "lasso" && r[1].parse::<f64>().unwrap() == 0.0).unwrap();
    assert_eq!(kink[3].parse::<f64>().unwrap(), 0.0);
}

#[test]
fn out_flag_beats_config_and_environment() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("p.cfg"), "out = from-config\n[penalty-table]\nbeta = 0, 1\n").unwrap();
    let env = dir.path().join("from-env");
    let o = gausspen(&["penalty-table", "--config", "p.cfg"], dir.path(), Some(&env));
    assert!(o.status.success());
    assert!(dir.path().join("from-config/penalty_table.csv").exists());
    let o = gausspen(&["penalty-table", "--config", "p.cfg", "--out", "from-flag"], dir.path(), Some(&env));
    assert!(o.status.success());
    assert!(dir.path().join("from-flag/penalty_bounds.csv").exists());
    assert!(!env.exists());
}

#[test]
fn config_errors_exit_one_and_list_every_problem() {
    let dir = tempfile::tempdir().unwrap();
    let text = "jobs = 0\n[consistency-mc]\nn = 400, 100\nsigma = zero\nkappa = -2\ncolour = blue\n";
    fs::write(dir.path().join("bad.cfg"), text).unwrap();
    let o = gausspen(&["consistency-mc", "--config", "bad.cfg"], dir.path(), None);
    assert_eq!(o.status.code(), Some(1));
    let err = stderr(&o);
    for line in 1..=6 {
        if line != 2 {
            assert!(err.contains(&format!("line {line}:")), "line {line} missing from:\n{err}");
        }
    }
    assert!(err.contains("5 configuration problem(s)"), "{err}");

    assert_eq!(gausspen(&["consistency-mc", "--config", "missing.cfg"], dir.path(), None).status.code(), Some(1));
    assert_eq!(gausspen(&["fit-everything", "--config", "bad.cfg"], dir.path(), None).status.code(), Some(1));
    assert_eq!(gausspen(&["--help"], dir.path(), None).status.code(), Some(0));
}

#[test]
fn runtime_errors_exit_two_and_name_the_cell() {
    let dir = tempfile::tempdir().unwrap();
    let text = "[train-mlp]\ndataset = csv\npath = absent.csv\n";
    fs::write(dir.path().join("t.cfg"), text).unwrap();
    let o = gausspen(&["train-mlp", "--config", "t.cfg", "--out", "o"], dir.path(), None);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("absent.csv"), "{}", stderr(&o));

    fs::write(dir.path().join("d.csv"), "a,label\n0.5,0\n0.2,1\n0.9,0\n0.1,1\n0.3,0\n").unwrap();
    let text = "[train-mlp]\ndataset = csv\npath = d.csv\nsplit = 0.4, 0.4, 0.2\nlr_min = 1e300\nlr_max = 1e301\npenalties = gaussian(kappa=3)\nlambda = 0.5\n";
    fs::write(dir.path().join("t.cfg"), text).unwrap();
    let o = gausspen(&["train-mlp", "--config", "t.cfg", "--out", "o", "--seed-list", "7"], dir.path(), None);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    assert!(stderr(&o).contains("seed=7"), "{}", stderr(&o));
}

#[test]
fn train_grid_rows_summaries_and_checkpoints() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("t.cfg"), TRAIN).unwrap();
    let o = gausspen(&["train-mlp", "--config", "t.cfg", "--out", "o", "--jobs", "3"], dir.path(), None);
    assert!(o.status.success(), "{}", stderr(&o));
    let runs = read_csv(&dir.path().join("o/train_runs.csv"));
    // none has the single λ = 0; gaussian has three. Three seeds each, plus one median row per pair.
    let pairs = 1 + 3;
    assert_eq!(runs.len() - 1, pairs * 3 + pairs);

    for chunk in runs[1..].chunks(4) {
        assert_eq!(chunk[3][2], "median");
        let mut errors: Vec<f64> = chunk[..3].iter().map(|r| r[7].parse().unwrap()).collect();
        errors.sort_by(f64::total_cmp);
        assert_eq!(chunk[3][7].parse::<f64>().unwrap(), errors[1]);
    }

    let best = read_csv(&dir.path().join("o/train_best.csv"));
    assert_eq!(best.len(), 3);

    let cfg = parse_config(TRAIN, Cmd::TrainMlp).unwrap();
    let Task::Train(train) = cfg.task else { unreachable!() };
    let (_, va, _) = load_splits(&train).unwrap();
    for row in runs[1..].iter().filter(|r| r[2] != "median") {
        let net = checkpoint::load(&dir.path().join("o").join(&row[8])).unwrap();
        let recorded: f64 = row[6].parse().unwrap();
        assert_eq!(validation_loss(&net, &va).unwrap().to_bits(), recorded.to_bits(), "{}", row[8]);
    }
}

#[test]
fn reruns_are_byte_identical_and_seed_list_overrides() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("t.cfg"), TRAIN).unwrap();
    let run = |out: &str, jobs: &str| {
        let o = gausspen(&["train-mlp", "--config", "t.cfg", "--out", out, "--jobs", jobs], dir.path(), None);
        assert!(o.status.success(), "{}", stderr(&o));
    };
    run("a", "1");
    let first = fs::read(dir.path().join("a/train_epochs.csv")).unwrap();
    run("a", "4");
    assert_eq!(fs::read(dir.path().join("a/train_epochs.csv")).unwrap(), first);
    run("b", "2");
    for name in ["train_runs.csv", "train_epochs.csv", "train_best.csv", "checkpoints/p1_l2_s3.gpck"] {
        assert_eq!(fs::read(dir.path().join("a").join(name)).unwrap(), fs::read(dir.path().join("b").join(name)).unwrap(), "{name}");
    }

    let o = gausspen(&["train-mlp", "--config", "t.cfg", "--out", "c", "--seed-list", "9"], dir.path(), None);
    assert!(o.status.success());
    let runs = read_csv(&dir.path().join("c/train_runs.csv"));
    assert_eq!(runs.len() - 1, 4 * 2);
    assert!(runs[1..].iter().all(|r| r[2] == "9" || r[2] == "median"));
}

#[test]
fn monte_carlo_commands_report_per_seed_and_median_rows() {
    let dir = tempfile::tempdir().unwrap();
    let text = "seeds = 1, 2\n[bias-mc]\nn = 100\nreplicates = 20\n[consistency-mc]\nn = 50, 200\nreplicates = 10\n";
    fs::write(dir.path().join("mc.cfg"), text).unwrap();
    let o = gausspen(&["bias-mc", "--config", "mc.cfg", "--out", "o"], dir.path(), None);
    assert!(o.status.success(), "{}", stderr(&o));
    let bias = read_csv(&dir.path().join("o/bias_report.csv"));
    assert_eq!(bias.len(), 1 + 2 + 1);
    assert_eq!(bias[3][0], "median");
    assert!((bias[1][7].parse::<f64>().unwrap() + (-1f64).exp()).abs() < 1e-15);

    let o = gausspen(&["consistency-mc", "--config", "mc.cfg", "--out", "o"], dir.path(), None);
    assert!(o.status.success(), "{}", stderr(&o));
    let rows = read_csv(&dir.path().join("o/consistency.csv"));
    assert_eq!(rows.len(), 1 + 2 * 2 + 2);
    assert_eq!(rows[0], ["seed", "n", "lambda_n", "median_error", "failed"]);
}

#[test]
fn shipped_config_parses_for_every_command() {
    let text = fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/../../configs/all.cfg")).unwrap();
    for command in Cmd::ALL {
        parse_config(&text, command).unwrap_or_else(|e| panic!("{command}: {e}"));
    }
}
