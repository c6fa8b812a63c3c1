mod config;
mod manifest;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{anyhow, Context, Result};
use clap::{Args, Parser, Subcommand};
use xqnnue::arena::{self, EngineSpec};
use xqnnue::board::{perft_divide, Position, START_FEN};
use xqnnue::datagen::{
    self, balance_dataset, ingest_games, read_dataset, write_dataset, BalanceError, Selection, StrataCounts,
};
use xqnnue::eval::EvalSource;
use xqnnue::nnue::{load_model, save_model, train, FeatureSet, TrainError, TrainSample, DEFAULT_WDL_SCALE};
use xqnnue::search::SearchLimits;
use xqnnue::seed;

use config::{parse_quotas, PipelineConfig};
use manifest::write_manifest;

/// Failure classes with their exit codes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Kind {
    Generic = 1,
    Config = 3,
    Input = 4,
    Infeasible = 5,
    Divergence = 6,
}

struct Failure(Kind, anyhow::Error);

trait Classify<T> {
    fn kind(self, kind: Kind) -> std::result::Result<T, Failure>;
}

impl<T, E: Into<anyhow::Error>> Classify<T> for std::result::Result<T, E> {
    fn kind(self, kind: Kind) -> std::result::Result<T, Failure> {
        self.map_err(|e| Failure(kind, e.into()))
    }
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Failure {
        Failure(Kind::Generic, e)
    }
}

type CmdResult = std::result::Result<(), Failure>;

#[derive(Parser)]
#[command(name = "xqnnue", version, about = "Xiangqi quiet-position datasets, NNUE training and engine matches")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Count leaf nodes of the legal move tree.
    Perft {
        #[arg(long, default_value = START_FEN)]
        fen: String,
        #[arg(long, default_value_t = 3)]
        depth: u32,
        /// Print the count below every root move.
        #[arg(long)]
        divide: bool,
    },
    /// Parse a game list and report playable and rejected games.
    Ingest { games: PathBuf },
    /// Expand, filter, label and balance a game corpus into a dataset file.
    Generate(GenerateArgs),
    /// Play engine games from seed positions and write them as a game list.
    Selfplay(SelfplayArgs),
    /// Train an NNUE model on a dataset.
    Train(TrainArgs),
    /// Play a colour-paired match between two engines.
    Match(MatchArgs),
    /// Print stratum counts of a dataset file.
    Inspect { dataset: PathBuf },
}

#[derive(Args)]
struct Common {
    /// TOML pipeline configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    threads: Option<usize>,
}

impl Common {
    fn resolve(&self) -> std::result::Result<PipelineConfig, Failure> {
        let mut c = PipelineConfig::load(self.config.as_deref()).kind(Kind::Config)?;
        if let Some(s) = self.seed {
            c.seed = s;
        }
        if let Some(t) = self.threads {
            c.threads = t;
        }
        Ok(c)
    }
}

#[derive(Args)]
struct GenerateArgs {
    #[command(flatten)]
    common: Common,
    /// Input game list.
    #[arg(long)]
    games: Option<PathBuf>,
    /// Output dataset file.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    m1: Option<i32>,
    #[arg(long)]
    m2: Option<i32>,
    #[arg(long)]
    negamax_depth: Option<u32>,
    /// sign,band,imbalanced[,tolerance]
    #[arg(long)]
    quotas: Option<String>,
    /// Cap on the number of balanced records.
    #[arg(long)]
    max_records: Option<usize>,
    /// Keep every child position instead of only the quiet ones.
    #[arg(long)]
    unfiltered: bool,
    /// Write the labelled records without balancing.
    #[arg(long)]
    no_balance: bool,
}

#[derive(Args)]
struct SelfplayArgs {
    #[command(flatten)]
    common: Common,
    /// Game list whose positions at plies 0..=24 serve as seeds.
    #[arg(long)]
    seeds: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 10)]
    games: usize,
    #[arg(long)]
    depth: Option<u32>,
    /// Engines taking turns: `pst` or `nnue:<model>`. Defaults to pst.
    #[arg(long = "engine")]
    engines: Vec<String>,
}

#[derive(Args)]
struct TrainArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    dataset: Option<PathBuf>,
    /// Output model file.
    #[arg(long)]
    out: Option<PathBuf>,
    /// CSV loss log; defaults to `<out>.csv`.
    #[arg(long)]
    log: Option<PathBuf>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    batch_size: Option<usize>,
    #[arg(long)]
    learning_rate: Option<f32>,
}

#[derive(Args)]
struct MatchArgs {
    #[command(flatten)]
    common: Common,
    /// `pst` or `nnue:<model>`
    #[arg(long)]
    a: String,
    #[arg(long)]
    b: String,
    /// Game list; quiet positions at plies 8..=24 become openings.
    #[arg(long)]
    openings: PathBuf,
    #[arg(long, default_value_t = 20)]
    games: usize,
    #[arg(long)]
    depth: Option<u32>,
    /// Rating of engine B for the performance-rating line.
    #[arg(long)]
    rating: Option<i64>,
    /// Per-game log file.
    #[arg(long)]
    log: Option<PathBuf>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Perft { fen, depth, divide } => cmd_perft(&fen, depth, divide),
        Command::Ingest { games } => cmd_ingest(&games),
        Command::Generate(a) => cmd_generate(a),
        Command::Selfplay(a) => cmd_selfplay(a),
        Command::Train(a) => cmd_train(a),
        Command::Match(a) => cmd_match(a),
        Command::Inspect { dataset } => cmd_inspect(&dataset),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure(kind, e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(kind as u8)
        }
    }
}

fn cmd_perft(fen: &str, depth: u32, divide: bool) -> CmdResult {
    let mut pos = Position::from_fen(fen).kind(Kind::Input)?;
    let split = perft_divide(&mut pos, depth);
    let total: u64 = if depth == 0 { 1 } else { split.iter().map(|(_, n)| n).sum() };
    if divide {
        for (mv, n) in &split {
            println!("{mv} {n}");
        }
    }
    println!("perft {depth} {total}");
    Ok(())
}

fn cmd_ingest(path: &Path) -> CmdResult {
    let ingested = ingest_games(path).kind(Kind::Input)?;
    for (line, why) in &ingested.rejects {
        println!("reject line {line}: {why}");
    }
    let plies: usize = ingested.games.iter().map(|g| g.moves.len()).sum();
    println!("games {} plies {} rejects {}", ingested.games.len(), plies, ingested.rejects.len());
    Ok(())
}

fn print_strata(c: &StrataCounts) {
    println!("strata {c}");
    println!(
        "total {} positive {:.4} band {:.4} imbalanced {:.4}",
        c.total(),
        c.positive_fraction(),
        c.band_fraction(),
        c.imbalanced_fraction()
    );
}

fn cmd_generate(a: GenerateArgs) -> CmdResult {
    let mut cfg = a.common.resolve()?;
    if let Some(p) = a.games {
        cfg.paths.games = Some(p);
    }
    if let Some(p) = a.out {
        cfg.paths.dataset = Some(p);
    }
    if let Some(v) = a.m1 {
        cfg.filter.m1 = v;
    }
    if let Some(v) = a.m2 {
        cfg.filter.m2 = v;
    }
    if let Some(v) = a.negamax_depth {
        cfg.filter.negamax_depth = v;
    }
    if let Some(q) = &a.quotas {
        cfg.quotas = parse_quotas(q, cfg.quotas).kind(Kind::Config)?;
    }
    if let Some(m) = a.max_records {
        cfg.quotas.max_records = Some(m);
    }
    cfg.validate().kind(Kind::Config)?;
    let games_path = cfg.paths.games.clone().ok_or_else(|| anyhow!("no games file given")).kind(Kind::Config)?;
    let out = cfg.paths.dataset.clone().ok_or_else(|| anyhow!("no output dataset given")).kind(Kind::Config)?;

    let ingested = ingest_games(&games_path).kind(Kind::Input)?;
    for (line, why) in &ingested.rejects {
        log::warn!("{}:{line}: skipped: {why}", games_path.display());
    }
    let selection = if a.unfiltered {
        Selection::All {
            negamax_depth: cfg.filter.negamax_depth,
        }
    } else {
        Selection::Quiet(cfg.filter)
    };
    let mut generator =
        datagen::Generator::new(selection, EvalSource::default_pst(), cfg.threads).map_err(anyhow::Error::msg)?;
    let mut records = Vec::new();
    generator.feed(&ingested.games, |r| records.push(r));
    let stats = generator.stats();
    println!("{stats}");
    println!(
        "rejected: check {} m1 {} m2 {} mate-adjacent {} dedup {}",
        stats.in_check, stats.quiescence_gap, stats.negamax_gap, stats.mate_adjacent, stats.duplicates
    );

    let records = if a.no_balance {
        records
    } else {
        balance_dataset(&records, &cfg.quotas, seed::stage(cfg.seed, "balance"))
            .map_err(|e| {
                let kind = match e {
                    BalanceError::Infeasible { .. } => Kind::Infeasible,
                    BalanceError::Quotas(_) => Kind::Config,
                };
                Failure(kind, anyhow::Error::new(e).context(format!("balancing {} records", records.len())))
            })?
    };
    write_dataset(&records, &out).kind(Kind::Generic)?;
    print_strata(&StrataCounts::of(&records, cfg.quotas.band));
    write_manifest(&out, if a.unfiltered { "generate --unfiltered" } else { "generate" }, &[&games_path], &cfg.to_toml())?;
    println!("wrote {} records to {}", records.len(), out.display());
    Ok(())
}

fn engine_source(spec: &str, features: FeatureSet) -> std::result::Result<(String, EvalSource), Failure> {
    if spec == "pst" {
        return Ok(("pst".into(), EvalSource::default_pst()));
    }
    let path = spec
        .strip_prefix("nnue:")
        .ok_or_else(|| anyhow!("engine `{spec}` is neither `pst` nor `nnue:<model>`"))
        .kind(Kind::Config)?;
    let model = load_model(path, features)
        .with_context(|| format!("loading {path}"))
        .kind(Kind::Input)?;
    let name = Path::new(path)
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "nnue".into());
    Ok((
        name,
        EvalSource::Nnue {
            model: Arc::new(model),
            wdl_scale: DEFAULT_WDL_SCALE,
        },
    ))
}

fn cmd_selfplay(a: SelfplayArgs) -> CmdResult {
    let cfg = a.common.resolve()?;
    cfg.validate().kind(Kind::Config)?;
    let features = FeatureSet::new(cfg.train.input_dim)
        .ok_or_else(|| anyhow!("input_dim {} out of range", cfg.train.input_dim))
        .kind(Kind::Config)?;
    let ingested = ingest_games(&a.seeds).kind(Kind::Input)?;
    let seeds = arena::select_openings(&ingested.games, 0, 24, &cfg.filter);
    if seeds.is_empty() {
        return Err(Failure(Kind::Input, anyhow!("no usable seed positions in {}", a.seeds.display())));
    }
    let specs = if a.engines.is_empty() { vec!["pst".to_string()] } else { a.engines.clone() };
    let engines = specs
        .iter()
        .map(|s| engine_source(s, features).map(|(_, e)| e))
        .collect::<std::result::Result<Vec<_>, _>>()?;
    let sp = datagen::SelfPlayConfig {
        n_games: a.games,
        limits: SearchLimits {
            depth: a.depth.unwrap_or(cfg.search.depth),
            ..cfg.search
        },
        ..datagen::SelfPlayConfig::default()
    };
    let games = datagen::generate_selfplay(&seeds, &sp, &engines, seed::stage(cfg.seed, "selfplay")).kind(Kind::Config)?;
    std::fs::write(&a.out, datagen::games_to_text(&games))
        .with_context(|| format!("writing {}", a.out.display()))?;
    write_manifest(&a.out, "selfplay", &[&a.seeds], &cfg.to_toml())?;
    let plies: usize = games.iter().map(|g| g.moves.len()).sum();
    println!("wrote {} games ({} plies) from {} seeds to {}", games.len(), plies, seeds.len(), a.out.display());
    Ok(())
}

fn cmd_train(a: TrainArgs) -> CmdResult {
    let mut cfg = a.common.resolve()?;
    if let Some(p) = a.dataset {
        cfg.paths.dataset = Some(p);
    }
    if let Some(p) = a.out {
        cfg.paths.model = Some(p);
    }
    if let Some(v) = a.epochs {
        cfg.train.epochs = v;
    }
    if let Some(v) = a.batch_size {
        cfg.train.batch_size = v;
    }
    if let Some(v) = a.learning_rate {
        cfg.train.learning_rate = v;
    }
    // TOML integers are signed.
    cfg.train.seed = seed::stage(cfg.seed, "train") & i64::MAX as u64;
    cfg.validate().kind(Kind::Config)?;
    let dataset = cfg.paths.dataset.clone().ok_or_else(|| anyhow!("no dataset given")).kind(Kind::Config)?;
    let out = cfg.paths.model.clone().ok_or_else(|| anyhow!("no output model given")).kind(Kind::Config)?;
    let log_path = a.log.unwrap_or_else(|| {
        let mut p = out.clone().into_os_string();
        p.push(".csv");
        p.into()
    });

    let records = read_dataset(&dataset)
        .with_context(|| format!("reading {}", dataset.display()))
        .kind(Kind::Input)?;
    let samples = records
        .iter()
        .map(|r| {
            let pos = r.position().map_err(anyhow::Error::msg)?;
            Ok(TrainSample::new(&pos, r.label(), cfg.train.wdl_scale))
        })
        .collect::<Result<Vec<_>>>()
        .kind(Kind::Input)?;
    let trained = train(&samples, &cfg.train).map_err(|e| match e {
        TrainError::Diverged { .. } => Failure(Kind::Divergence, e.into()),
        TrainError::EmptyDataset => Failure(Kind::Input, e.into()),
        TrainError::Config(_) => Failure(Kind::Config, e.into()),
    })?;
    save_model(&trained.model, &out).kind(Kind::Generic)?;
    std::fs::write(&log_path, trained.csv()).with_context(|| format!("writing {}", log_path.display()))?;
    write_manifest(&out, "train", &[&dataset], &cfg.to_toml())?;
    if let Some(last) = trained.log.last() {
        println!(
            "epochs {} final train_mse {:.6} val_mse {:.6} best epoch {} best val_mse {:.6}",
            trained.log.len(),
            last.train_mse,
            last.val_mse,
            trained.best_epoch,
            trained.best_val_mse()
        );
    }
    println!("wrote {}", out.display());
    Ok(())
}

fn cmd_match(a: MatchArgs) -> CmdResult {
    let cfg = a.common.resolve()?;
    cfg.validate().kind(Kind::Config)?;
    let features = FeatureSet::new(cfg.train.input_dim)
        .ok_or_else(|| anyhow!("input_dim {} out of range", cfg.train.input_dim))
        .kind(Kind::Config)?;
    let limits = SearchLimits {
        depth: a.depth.unwrap_or(cfg.search.depth),
        ..cfg.search
    };
    let (a_name, a_src) = engine_source(&a.a, features)?;
    let (mut b_name, b_src) = engine_source(&a.b, features)?;
    if a_name == b_name {
        b_name.push_str("-b");
    }
    let ea = EngineSpec::new(a_name, a_src, limits);
    let eb = EngineSpec::new(b_name, b_src, limits);
    let ingested = ingest_games(&a.openings).kind(Kind::Input)?;
    let openings = arena::select_openings(&ingested.games, 8, 24, &cfg.filter);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads.max(1))
        .build()
        .map_err(anyhow::Error::new)?;
    let result = pool
        .install(|| arena::run_match(&ea, &eb, &openings, a.games, seed::stage(cfg.seed, "match")))
        .kind(Kind::Config)?;
    print!("{}", arena::report(&result, a.rating));
    if let Some(log) = &a.log {
        std::fs::write(log, arena::game_log(&result)).with_context(|| format!("writing {}", log.display()))?;
        write_manifest(log, &format!("match {} {}", a.a, a.b), &[&a.openings], &cfg.to_toml())?;
    }
    Ok(())
}

fn cmd_inspect(path: &Path) -> CmdResult {
    let records = read_dataset(path)
        .with_context(|| format!("reading {}", path.display()))
        .kind(Kind::Input)?;
    let c = StrataCounts::of(&records, 100);
    print_strata(&c);
    println!("meets default quotas: {}", c.meets(&datagen::BalanceQuotas::default()));
    Ok(())
}
