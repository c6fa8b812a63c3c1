//! Dataset generation: game ingestion, child expansion, the quiet filter,
//! labelling, balancing, self-play and the binary record format.

pub mod balance;
pub mod dataset;
pub mod filter;
pub mod games;
pub mod selfplay;

use std::collections::HashSet;
use std::fmt;

use rayon::prelude::*;

pub use balance::{balance_dataset, BalanceError, BalanceQuotas, StrataCounts};
pub use dataset::{read_dataset, write_dataset, DatasetError, DatasetRecord};
pub use filter::{classify, is_quiet_position, FilterMargins, Verdict};
pub use games::{games_to_text, ingest_games, parse_games, GameParseError, GameRecord, IngestError, Ingested};
pub use selfplay::{generate_selfplay, SelfPlayConfig, SelfPlayError};

use crate::board::{Centipawns, Position, MATE_SCORE};
use crate::eval::EvalSource;
use crate::search::{SearchLimits, Searcher, INFINITY};

/// Labels at or beyond this magnitude are treated as mate scores and dropped.
pub const MATE_ADJACENT: Centipawns = MATE_SCORE / 2;
/// Stored labels are clamped to this magnitude.
pub const LABEL_CLAMP: Centipawns = 2000;

const CHUNK_GAMES: usize = 64;

/// Which children become records.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Selection {
    /// Only quiet children, labelled with the negamax value.
    Quiet(FilterMargins),
    /// Every child, labelled with negamax at the given depth. Used as the
    /// noisy baseline.
    All { negamax_depth: u32 },
}

impl Selection {
    fn depth(&self) -> u32 {
        match self {
            Selection::Quiet(m) => m.negamax_depth,
            Selection::All { negamax_depth } => *negamax_depth,
        }
    }
}

/// Tally of what happened to every expanded child.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct GenerateStats {
    pub games: usize,
    pub positions: usize,
    pub children: usize,
    pub duplicates: usize,
    pub in_check: usize,
    pub quiescence_gap: usize,
    pub negamax_gap: usize,
    pub mate_adjacent: usize,
    pub emitted: usize,
}

impl GenerateStats {
    fn add(&mut self, other: &GenerateStats) {
        self.games += other.games;
        self.positions += other.positions;
        self.children += other.children;
        self.duplicates += other.duplicates;
        self.in_check += other.in_check;
        self.quiescence_gap += other.quiescence_gap;
        self.negamax_gap += other.negamax_gap;
        self.mate_adjacent += other.mate_adjacent;
        self.emitted += other.emitted;
    }
}

impl fmt::Display for GenerateStats {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "games {} positions {} children {} dedup {} check {} m1 {} m2 {} mate-adjacent {} emitted {}",
            self.games,
            self.positions,
            self.children,
            self.duplicates,
            self.in_check,
            self.quiescence_gap,
            self.negamax_gap,
            self.mate_adjacent,
            self.emitted
        )
    }
}

enum Outcome {
    Record(DatasetRecord),
    InCheck,
    QuiescenceGap,
    NegamaxGap,
    MateAdjacent,
}

fn label_of(value: Centipawns) -> Option<Centipawns> {
    (value.abs() < MATE_ADJACENT).then(|| value.clamp(-LABEL_CLAMP, LABEL_CLAMP))
}

fn judge(pos: &mut Position, selection: &Selection, searcher: &mut Searcher<crate::eval::AnyEvaluator>) -> Outcome {
    let value = match selection {
        Selection::Quiet(margins) => match classify(pos, margins, searcher) {
            Verdict::InCheck => return Outcome::InCheck,
            Verdict::QuiescenceGap { .. } => return Outcome::QuiescenceGap,
            Verdict::NegamaxGap { .. } => return Outcome::NegamaxGap,
            Verdict::Quiet { negamax, .. } => negamax,
        },
        Selection::All { negamax_depth } => searcher.negamax(pos, *negamax_depth, -INFINITY, INFINITY),
    };
    match label_of(value) {
        Some(label) => Outcome::Record(DatasetRecord::new(pos, label)),
        None => Outcome::MateAdjacent,
    }
}

/// Dataset generator over a corpus. Children are deduplicated by packed
/// position in order of first appearance, then judged in parallel; the
/// output order does not depend on the thread count.
pub struct Generator {
    selection: Selection,
    source: EvalSource,
    pool: rayon::ThreadPool,
    seen: HashSet<[u8; 91]>,
    stats: GenerateStats,
}

impl Generator {
    pub fn new(selection: Selection, source: EvalSource, threads: usize) -> Result<Generator, String> {
        if let Selection::Quiet(m) = &selection {
            m.validate()?;
        }
        let depth = selection.depth();
        SearchLimits::depth(depth).validate().map_err(|e| e.to_string())?;
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads.max(1))
            .build()
            .map_err(|e| e.to_string())?;
        Ok(Generator {
            selection,
            source,
            pool,
            seen: HashSet::new(),
            stats: GenerateStats::default(),
        })
    }

    pub fn stats(&self) -> GenerateStats {
        self.stats
    }

    /// Expands `games` and passes the surviving records to `sink` in order.
    pub fn feed(&mut self, games: &[GameRecord], mut sink: impl FnMut(DatasetRecord)) {
        for chunk in games.chunks(CHUNK_GAMES) {
            let mut local = GenerateStats {
                games: chunk.len(),
                ..GenerateStats::default()
            };
            let mut fresh: Vec<Position> = Vec::new();
            for game in chunk {
                for mut pos in game.positions() {
                    local.positions += 1;
                    for mv in pos.legal_moves() {
                        local.children += 1;
                        let token = pos.do_move(mv);
                        let probe = DatasetRecord::new(&pos, 0);
                        let mut key = [0u8; 91];
                        key[..90].copy_from_slice(&probe.board);
                        key[90] = probe.side;
                        if self.seen.insert(key) {
                            let mut child = pos.clone();
                            child.clear_history();
                            fresh.push(child);
                        } else {
                            local.duplicates += 1;
                        }
                        pos.undo_move(token);
                    }
                }
            }

            self.judge_all(fresh, &mut local, &mut sink);
            self.stats.add(&local);
            log::debug!("datagen chunk: {local}");
        }
    }

    fn judge_all(&self, mut fresh: Vec<Position>, local: &mut GenerateStats, sink: &mut impl FnMut(DatasetRecord)) {
        let selection = self.selection;
        let source = &self.source;
        let limits = SearchLimits::depth(selection.depth());
        let outcomes: Vec<Outcome> = self.pool.install(|| {
            fresh
                .par_iter_mut()
                .map_init(
                    || Searcher::new(source.evaluator(), limits),
                    |searcher, pos| judge(pos, &selection, searcher),
                )
                .collect()
        });

        for outcome in outcomes {
            match outcome {
                Outcome::Record(r) => {
                    local.emitted += 1;
                    sink(r);
                }
                Outcome::InCheck => local.in_check += 1,
                Outcome::QuiescenceGap => local.quiescence_gap += 1,
                Outcome::NegamaxGap => local.negamax_gap += 1,
                Outcome::MateAdjacent => local.mate_adjacent += 1,
            }
        }
    }
}

/// Children of every position of every game in order of first appearance,
/// one copy each, with history cleared.
pub fn unique_children(games: &[GameRecord]) -> Vec<Position> {
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for game in games {
        for mut pos in game.positions() {
            for mv in pos.legal_moves() {
                let token = pos.do_move(mv);
                if seen.insert((pos.board().to_vec(), pos.side_to_move())) {
                    let mut child = pos.clone();
                    child.clear_history();
                    out.push(child);
                }
                pos.undo_move(token);
            }
        }
    }
    out
}

/// Labels `positions` with negamax at `depth` under the same rules as
/// [`compute_unfiltered`], keeping their order.
pub fn label_positions(
    positions: &[Position],
    depth: u32,
    source: &EvalSource,
    threads: usize,
) -> Result<(Vec<DatasetRecord>, GenerateStats), String> {
    let generator = Generator::new(Selection::All { negamax_depth: depth }, source.clone(), threads)?;
    let mut stats = GenerateStats::default();
    let mut out = Vec::with_capacity(positions.len());
    for chunk in positions.chunks(4096) {
        let mut local = GenerateStats {
            positions: chunk.len(),
            children: chunk.len(),
            ..GenerateStats::default()
        };
        generator.judge_all(chunk.to_vec(), &mut local, &mut |r| out.push(r));
        log::debug!("labelled {} of {}", stats.children + chunk.len(), positions.len());
        stats.add(&local);
    }
    Ok((out, stats))
}

/// Quiet children of every position of every game, labelled with the
/// negamax value, deduplicated, mate-adjacent ones dropped.
pub fn compute_dataset(
    games: &[GameRecord],
    margins: &FilterMargins,
    source: &EvalSource,
    threads: usize,
) -> Result<(Vec<DatasetRecord>, GenerateStats), String> {
    collect(games, Selection::Quiet(*margins), source, threads)
}

/// Same expansion and labels as [`compute_dataset`] with the quiet filter off.
pub fn compute_unfiltered(
    games: &[GameRecord],
    negamax_depth: u32,
    source: &EvalSource,
    threads: usize,
) -> Result<(Vec<DatasetRecord>, GenerateStats), String> {
    collect(games, Selection::All { negamax_depth }, source, threads)
}

fn collect(
    games: &[GameRecord],
    selection: Selection,
    source: &EvalSource,
    threads: usize,
) -> Result<(Vec<DatasetRecord>, GenerateStats), String> {
    let mut generator = Generator::new(selection, source.clone(), threads)?;
    let mut out = Vec::new();
    generator.feed(games, |r| out.push(r));
    Ok((out, generator.stats()))
}
