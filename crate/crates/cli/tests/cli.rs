use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use xqnnue::board::Position;
use xqnnue::datagen::{games_to_text, generate_selfplay, read_dataset, SelfPlayConfig};
use xqnnue::eval::EvalSource;
use xqnnue::search::SearchLimits;

fn xqnnue(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_xqnnue"))
        .args(args)
        .env("RUST_LOG", "warn")
        .output()
        .expect("run binary")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn corpus(dir: &Path) -> PathBuf {
    let cfg = SelfPlayConfig {
        n_games: 4,
        limits: SearchLimits::depth(1),
        diversity_plies: 40,
        top_k: 4,
        max_plies: 40,
    };
    let games = generate_selfplay(&[Position::startpos()], &cfg, &[EvalSource::default_pst()], 8).unwrap();
    let path = dir.join("games.txt");
    fs::write(&path, games_to_text(&games)).unwrap();
    path
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn generate(games: &Path, out: &Path, overrides: &[(&str, &str)]) -> Output {
    let mut flags = vec![
        ("--negamax-depth", "1"),
        ("--m1", "150"),
        ("--m2", "150"),
        ("--quotas", "0.5,0.3,0.3"),
        ("--threads", "1"),
    ];
    for &(k, v) in overrides {
        match flags.iter_mut().find(|f| f.0 == k) {
            Some(f) => f.1 = v,
            None => flags.push((k, v)),
        }
    }
    let mut args = vec!["generate", "--games", s(games), "--out", s(out)];
    for (k, v) in flags {
        args.push(k);
        if !v.is_empty() {
            args.push(v);
        }
    }
    xqnnue(&args)
}

#[test]
fn perft_counts_and_split() {
    let o = xqnnue(&["perft", "--depth", "1"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).trim(), "perft 1 44");

    let o = xqnnue(&["perft", "--depth", "0"]);
    assert_eq!(stdout(&o).trim(), "perft 0 1");

    let o = xqnnue(&["perft", "--depth", "2", "--divide"]);
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 45);
    let sum: u64 = lines[..44].iter().map(|l| l.split_whitespace().nth(1).unwrap().parse::<u64>().unwrap()).sum();
    assert_eq!(sum, 1920);
    assert_eq!(lines[44], "perft 2 1920");
}

#[test]
fn bad_input_exit_codes() {
    let o = xqnnue(&["perft", "--fen", "not a fen"]);
    assert_eq!(o.status.code(), Some(4));

    let dir = tempfile::tempdir().unwrap();
    let empty = dir.path().join("empty.txt");
    fs::write(&empty, "").unwrap();
    let o = generate(&empty, &dir.path().join("d.bin"), &[]);
    assert_eq!(o.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&o.stderr).contains("zero parseable games"));

    let o = xqnnue(&["train", "--dataset", s(&dir.path().join("missing.bin")), "--out", s(&dir.path().join("m.nnm"))]);
    assert_eq!(o.status.code(), Some(4));

    let games = corpus(dir.path());
    let o = xqnnue(&["match", "--a", "pst", "--b", "pst", "--openings", s(&games), "--games", "3", "--depth", "1"]);
    assert_eq!(o.status.code(), Some(3));

    let o = xqnnue(&["generate", "--games", s(&games), "--out", s(&games)]);
    assert_eq!(o.status.code(), Some(3));

    let opening_only = dir.path().join("start.txt");
    fs::write(&opening_only, format!("{}|\n", xqnnue::board::START_FEN)).unwrap();
    let o = generate(&opening_only, &dir.path().join("d.bin"), &[]);
    assert_eq!(o.status.code(), Some(5));
    assert!(String::from_utf8_lossy(&o.stderr).contains("stratum is deficient"));

    assert_eq!(xqnnue(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn zero_margins_log_every_rejection() {
    let dir = tempfile::tempdir().unwrap();
    let games = corpus(dir.path());
    let out = dir.path().join("d.bin");
    let o = generate(&games, &out, &[("--m1", "0"), ("--m2", "0"), ("--no-balance", "")]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    let stats = text.lines().find(|l| l.starts_with("games ")).unwrap();
    let field = |name: &str| -> usize {
        let words: Vec<&str> = stats.split_whitespace().collect();
        let i = words.iter().position(|w| *w == name).unwrap();
        words[i + 1].parse().unwrap()
    };
    let rejected = field("dedup") + field("check") + field("m1") + field("m2") + field("mate-adjacent");
    assert_eq!(field("children"), rejected + field("emitted"));
    assert!(field("emitted") * 10 < field("children"), "{stats}");
    assert!(text.contains("rejected: check"));
    assert_eq!(read_dataset(&out).unwrap().len(), field("emitted"));
}

#[test]
fn generate_and_train_are_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let games = corpus(dir.path());
    let mut artifacts = Vec::new();
    for run in 0..2 {
        let data = dir.path().join(format!("d{run}.bin"));
        let model = dir.path().join(format!("m{run}.nnm"));
        let o = generate(&games, &data, &[]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        let o = xqnnue(&[
            "train",
            "--dataset",
            s(&data),
            "--out",
            s(&model),
            "--epochs",
            "2",
            "--batch-size",
            "32",
            "--threads",
            "1",
        ]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        let manifest = fs::read_to_string(dir.path().join(format!("m{run}.nnm.manifest.toml"))).unwrap();
        assert!(manifest.contains("[config.train]"), "{manifest}");
        assert!(manifest.contains(&format!("d{run}.bin")));
        artifacts.push((fs::read(&data).unwrap(), fs::read(&model).unwrap()));
    }
    assert!(!artifacts[0].0.is_empty());
    assert_eq!(artifacts[0], artifacts[1]);

    let o = xqnnue(&["inspect", s(&dir.path().join("d0.bin"))]);
    assert!(stdout(&o).contains("strata "));
}

#[test]
fn hundred_records_are_memorised() {
    let dir = tempfile::tempdir().unwrap();
    let games = corpus(dir.path());
    let data = dir.path().join("d.bin");
    let o = generate(&games, &data, &[("--max-records", "100")]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(read_dataset(&data).unwrap().len(), 100);

    let config = dir.path().join("pipeline.toml");
    fs::write(
        &config,
        "[train]\nepochs = 200\nbatch_size = 10\nlearning_rate = 0.5\nlr_decay = 1.0\n",
    )
    .unwrap();
    let model = dir.path().join("m.nnm");
    let o = xqnnue(&["train", "--config", s(&config), "--dataset", s(&data), "--out", s(&model)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(dir.path().join("m.nnm.csv")).unwrap();
    let last = csv.lines().last().unwrap();
    let train_mse: f64 = last.split(',').nth(1).unwrap().parse().unwrap();
    assert!(train_mse < 0.01, "{last}");
}

#[test]
fn self_match_scores_half() {
    let dir = tempfile::tempdir().unwrap();
    let games = corpus(dir.path());
    let log = dir.path().join("match.log");
    let o = xqnnue(&[
        "match", "--a", "pst", "--b", "pst", "--openings", s(&games), "--games", "4", "--depth", "1", "--rating", "2400",
        "--log", s(&log),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert!(text.contains("50.0%"), "{text}");
    assert!(text.contains("performance rating vs 2400: 2400"), "{text}");
    assert_eq!(fs::read_to_string(&log).unwrap().lines().count(), 4);
}
