//! Engine-vs-engine matches, adjudication and rating arithmetic.

use std::fmt::Write as _;
use std::path::Path;
use std::sync::Arc;

use num_rational::Ratio;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::board::{Color, Move, Position};
use crate::datagen::{is_quiet_position, FilterMargins, GameRecord};
use crate::eval::{EvalSource, PstEvaluator};
use crate::nnue::{load_model, FeatureSet, ModelError, DEFAULT_WDL_SCALE};
use crate::search::{SearchLimits, Searcher};

pub const MOVE_CAP: usize = 300;

#[derive(Clone, Debug)]
pub struct EngineSpec {
    pub name: String,
    pub source: EvalSource,
    pub limits: SearchLimits,
}

impl EngineSpec {
    pub fn new(name: impl Into<String>, source: EvalSource, limits: SearchLimits) -> EngineSpec {
        EngineSpec {
            name: name.into(),
            source,
            limits,
        }
    }

    pub fn pst(name: impl Into<String>, limits: SearchLimits) -> EngineSpec {
        EngineSpec::new(name, EvalSource::default_pst(), limits)
    }

    /// Loads an NNUE model, rejecting files whose input width differs from `features`.
    pub fn nnue(
        name: impl Into<String>,
        model: impl AsRef<Path>,
        features: FeatureSet,
        limits: SearchLimits,
    ) -> Result<EngineSpec, ModelError> {
        let model = Arc::new(load_model(model, features)?);
        Ok(EngineSpec::new(
            name,
            EvalSource::Nnue {
                model,
                wdl_scale: DEFAULT_WDL_SCALE,
            },
            limits,
        ))
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MatchError {
    #[error("game count must be even and positive, got {0}")]
    GameCount(usize),
    #[error("no openings")]
    NoOpenings,
    #[error("{0}")]
    Limits(#[from] crate::search::LimitsError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Outcome {
    RedWins,
    BlackWins,
    Draw,
}

impl Outcome {
    fn win_for(c: Color) -> Outcome {
        match c {
            Color::Red => Outcome::RedWins,
            Color::Black => Outcome::BlackWins,
        }
    }

    pub fn pgn(&self) -> &'static str {
        match self {
            Outcome::RedWins => "1-0",
            Outcome::BlackWins => "0-1",
            Outcome::Draw => "1/2-1/2",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Reason {
    /// The side to move has no legal move (mate or stalemate).
    NoMoves,
    PerpetualCheck,
    Repetition,
    MoveCap,
    Forfeit,
}

impl Reason {
    pub fn as_str(&self) -> &'static str {
        match self {
            Reason::NoMoves => "no-moves",
            Reason::PerpetualCheck => "perpetual-check",
            Reason::Repetition => "repetition",
            Reason::MoveCap => "move-cap",
            Reason::Forfeit => "forfeit",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PlayedGame {
    pub opening: usize,
    /// Whether engine A had the Red pieces.
    pub a_is_red: bool,
    pub record: GameRecord,
    pub outcome: Outcome,
    pub reason: Reason,
}

impl PlayedGame {
    /// 2 for an A win, 1 for a draw, 0 for a loss.
    pub fn half_points_for_a(&self) -> u32 {
        match (self.outcome, self.a_is_red) {
            (Outcome::Draw, _) => 1,
            (Outcome::RedWins, true) | (Outcome::BlackWins, false) => 2,
            _ => 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MatchResult {
    pub a_name: String,
    pub b_name: String,
    pub wins: u32,
    pub draws: u32,
    pub losses: u32,
    pub games: u32,
    pub records: Vec<PlayedGame>,
    /// One rating per game for B, used by [`performance_rating`].
    pub opponent_ratings: Vec<i64>,
}

impl MatchResult {
    pub fn with_opponent_rating(mut self, rating: i64) -> MatchResult {
        self.opponent_ratings = vec![rating; self.games as usize];
        self
    }

    pub fn score(&self) -> f64 {
        (self.wins as f64 + 0.5 * self.draws as f64) / self.games.max(1) as f64
    }
}

/// Plays one game from `opening`. Engines are indexed by colour.
pub fn play_game(opening: &Position, red: &EngineSpec, black: &EngineSpec) -> (Vec<Move>, Outcome, Reason) {
    let mut searchers = [
        Searcher::new(red.source.evaluator(), red.limits),
        Searcher::new(black.source.evaluator(), black.limits),
    ];
    let mut pos = opening.clone();
    pos.clear_history();
    let mut hashes = vec![pos.hash()];
    let mut gave_check = Vec::new();
    let mut moves = Vec::new();
    loop {
        let mover = pos.side_to_move();
        if !pos.has_legal_move() {
            return (moves, Outcome::win_for(mover.opponent()), Reason::NoMoves);
        }
        let current = pos.hash();
        if hashes.iter().filter(|&&h| h == current).count() >= 3 {
            let last = hashes.len() - 1;
            let prev = (0..last).rev().find(|&i| hashes[i] == current).expect("repeated");
            return match perpetual_checker(&gave_check[prev..], pos.side_to_move()) {
                Some(checker) => (moves, Outcome::win_for(checker.opponent()), Reason::PerpetualCheck),
                None => (moves, Outcome::Draw, Reason::Repetition),
            };
        }
        if moves.len() >= MOVE_CAP {
            return (moves, Outcome::Draw, Reason::MoveCap);
        }
        let result = searchers[mover.index()].best_move(&mut pos);
        let legal = result.best_move.filter(|m| pos.legal_moves().contains(m));
        let Some(mv) = legal else {
            log::warn!("engine failed to move in {}", pos.to_fen());
            return (moves, Outcome::win_for(mover.opponent()), Reason::Forfeit);
        };
        pos.do_move(mv);
        moves.push(mv);
        gave_check.push(pos.in_check(pos.side_to_move()));
        hashes.push(pos.hash());
    }
}

/// Given whether each ply of a repetition cycle gave check and who moves
/// after the cycle, returns the side that checked on every one of its moves,
/// if exactly one did.
fn perpetual_checker(cycle: &[bool], to_move: Color) -> Option<Color> {
    // The last ply of the cycle was made by the side not to move.
    let mut all = [true, true];
    let mut side = to_move.opponent();
    for &check in cycle.iter().rev() {
        all[side.index()] &= check;
        side = side.opponent();
    }
    match all {
        [true, false] => Some(Color::Red),
        [false, true] => Some(Color::Black),
        _ => None,
    }
}

/// Plays `n_games` games as `n_games / 2` colour-swapped pairs. Pair `j`
/// uses opening `order[j % len]`, where `order` is a seeded shuffle.
pub fn run_match(
    a: &EngineSpec,
    b: &EngineSpec,
    openings: &[Position],
    n_games: usize,
    rng_seed: u64,
) -> Result<MatchResult, MatchError> {
    if n_games == 0 || n_games % 2 == 1 {
        return Err(MatchError::GameCount(n_games));
    }
    if openings.is_empty() {
        return Err(MatchError::NoOpenings);
    }
    a.limits.validate()?;
    b.limits.validate()?;
    let mut order: Vec<usize> = (0..openings.len()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(rng_seed));

    let pairs: Vec<[PlayedGame; 2]> = (0..n_games / 2)
        .into_par_iter()
        .map(|j| {
            let idx = order[j % order.len()];
            let opening = &openings[idx];
            let game = |a_is_red: bool| {
                let (red, black) = if a_is_red { (a, b) } else { (b, a) };
                let (moves, outcome, reason) = play_game(opening, red, black);
                let mut start = opening.clone();
                start.clear_history();
                PlayedGame {
                    opening: idx,
                    a_is_red,
                    record: GameRecord { start, moves },
                    outcome,
                    reason,
                }
            };
            [game(true), game(false)]
        })
        .collect();

    let records: Vec<PlayedGame> = pairs.into_iter().flatten().collect();
    let mut result = MatchResult {
        a_name: a.name.clone(),
        b_name: b.name.clone(),
        wins: 0,
        draws: 0,
        losses: 0,
        games: records.len() as u32,
        records: Vec::new(),
        opponent_ratings: Vec::new(),
    };
    for g in &records {
        match g.half_points_for_a() {
            2 => result.wins += 1,
            1 => result.draws += 1,
            _ => result.losses += 1,
        }
    }
    result.records = records;
    Ok(result)
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum RatingError {
    #[error("no games")]
    NoGames,
    #[error("{ratings} opponent ratings for {games} games")]
    Ratings { ratings: usize, games: u32 },
    #[error("score must lie strictly between 0 and 1")]
    Score,
}

/// (sum of opponent ratings + 400 * (wins - losses)) / games, exactly.
pub fn performance_rating(result: &MatchResult) -> Result<Ratio<i64>, RatingError> {
    if result.games == 0 {
        return Err(RatingError::NoGames);
    }
    if result.opponent_ratings.len() != result.games as usize {
        return Err(RatingError::Ratings {
            ratings: result.opponent_ratings.len(),
            games: result.games,
        });
    }
    let total: i64 = result.opponent_ratings.iter().sum();
    let net = result.wins as i64 - result.losses as i64;
    Ok(Ratio::new(total + 400 * net, result.games as i64))
}

pub fn elo_diff_from_score(score: f64) -> Result<f64, RatingError> {
    if !(score > 0.0 && score < 1.0) {
        return Err(RatingError::Score);
    }
    Ok(-400.0 * (1.0 / score - 1.0).log10())
}

/// Elo difference and its 95% interval from the per-game score variance.
/// Interval ends are infinite when the bound reaches a 0 or 100% score.
pub fn elo_with_interval(wins: u32, draws: u32, losses: u32) -> Option<(f64, f64, f64)> {
    let n = (wins + draws + losses) as f64;
    if n == 0.0 {
        return None;
    }
    let s = (wins as f64 + 0.5 * draws as f64) / n;
    let var = (wins as f64 * (1.0 - s).powi(2) + draws as f64 * (0.5 - s).powi(2) + losses as f64 * s.powi(2)) / n;
    let half = 1.96 * (var / n).sqrt();
    let to_elo = |x: f64| {
        if x <= 0.0 {
            f64::NEG_INFINITY
        } else if x >= 1.0 {
            f64::INFINITY
        } else {
            elo_diff_from_score(x).unwrap()
        }
    };
    Some((to_elo(s), to_elo(s - half), to_elo(s + half)))
}

/// Quiet positions at plies `first..=last` of each game, deduplicated.
pub fn select_openings(games: &[GameRecord], first: usize, last: usize, margins: &FilterMargins) -> Vec<Position> {
    let mut seen = std::collections::HashSet::new();
    let mut out = Vec::new();
    for g in games {
        for (ply, mut p) in g.positions().into_iter().enumerate() {
            if ply < first || ply > last || !seen.insert((p.board().to_vec(), p.side_to_move())) {
                continue;
            }
            if !p.has_legal_move() || !is_quiet_position(&mut p, margins, PstEvaluator::default()) {
                continue;
            }
            p.clear_history();
            out.push(p);
        }
    }
    out
}

/// Plain-text summary table.
pub fn report(result: &MatchResult, baseline_rating: Option<i64>) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{:<12} {:<12} {:>6} {:>5} {:>5} {:>5} {:>8}", "engine", "opponent", "games", "W", "D", "L", "score");
    let _ = writeln!(
        s,
        "{:<12} {:<12} {:>6} {:>5} {:>5} {:>5} {:>7.1}%",
        result.a_name,
        result.b_name,
        result.games,
        result.wins,
        result.draws,
        result.losses,
        100.0 * result.score()
    );
    if let Some((elo, lo, hi)) = elo_with_interval(result.wins, result.draws, result.losses) {
        let _ = writeln!(s, "elo difference {elo:+.1} (95% CI {lo:+.1} .. {hi:+.1})");
    }
    if let Some(r) = baseline_rating {
        let rated = result.clone().with_opponent_rating(r);
        if let Ok(perf) = performance_rating(&rated) {
            let _ = writeln!(
                s,
                "performance rating vs {r}: {} ({:.1})",
                perf,
                *perf.numer() as f64 / *perf.denom() as f64
            );
        }
    }
    s
}

/// One line per game: index, opening, colours, result, reason, start FEN and moves.
pub fn game_log(result: &MatchResult) -> String {
    let mut s = String::new();
    for (i, g) in result.records.iter().enumerate() {
        let (red, black) = if g.a_is_red {
            (&result.a_name, &result.b_name)
        } else {
            (&result.b_name, &result.a_name)
        };
        let moves: Vec<String> = g.record.moves.iter().map(|m| m.to_coord()).collect();
        let _ = writeln!(
            s,
            "game={i} opening={} red={red} black={black} result={} reason={} fen={} moves={}",
            g.opening,
            g.outcome.pgn(),
            g.reason.as_str(),
            g.record.start.to_fen(),
            moves.join(",")
        );
    }
    s
}
