use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use super::games::GameRecord;
use crate::eval::EvalSource;
use crate::search::{SearchLimits, Searcher};
use crate::seed;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SelfPlayConfig {
    pub n_games: usize,
    pub limits: SearchLimits,
    /// Plies during which the mover picks uniformly among the best `top_k` moves.
    pub diversity_plies: usize,
    pub top_k: usize,
    pub max_plies: usize,
}

impl Default for SelfPlayConfig {
    fn default() -> SelfPlayConfig {
        SelfPlayConfig {
            n_games: 1,
            limits: SearchLimits::depth(3),
            diversity_plies: 8,
            top_k: 3,
            max_plies: 200,
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SelfPlayError {
    #[error("no seed positions")]
    NoSeeds,
    #[error("no engines")]
    NoEngines,
    #[error("n_games must be at least 1")]
    NoGames,
    #[error("{0}")]
    Limits(#[from] crate::search::LimitsError),
}

/// How a self-play game stopped.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Termination {
    NoMoves,
    Repetition,
    MoveCap,
}

/// Plays `cfg.n_games` games. Game `i` starts from a seed drawn with its own
/// RNG stream; Red uses `engines[i % n]` and Black `engines[(i + 1) % n]`.
pub fn generate_selfplay(
    seeds: &[crate::board::Position],
    cfg: &SelfPlayConfig,
    engines: &[EvalSource],
    rng_seed: u64,
) -> Result<Vec<GameRecord>, SelfPlayError> {
    Ok(generate_selfplay_detailed(seeds, cfg, engines, rng_seed)?
        .into_iter()
        .map(|(g, _)| g)
        .collect())
}

pub fn generate_selfplay_detailed(
    seeds: &[crate::board::Position],
    cfg: &SelfPlayConfig,
    engines: &[EvalSource],
    rng_seed: u64,
) -> Result<Vec<(GameRecord, Termination)>, SelfPlayError> {
    if seeds.is_empty() {
        return Err(SelfPlayError::NoSeeds);
    }
    if engines.is_empty() {
        return Err(SelfPlayError::NoEngines);
    }
    if cfg.n_games == 0 {
        return Err(SelfPlayError::NoGames);
    }
    cfg.limits.validate()?;

    let mut out = Vec::with_capacity(cfg.n_games);
    for i in 0..cfg.n_games {
        let mut rng = ChaCha8Rng::seed_from_u64(seed::derive(rng_seed, i as u64));
        let start = seeds.choose(&mut rng).expect("nonempty").clone();
        let mut searchers = [
            Searcher::new(engines[i % engines.len()].evaluator(), cfg.limits),
            Searcher::new(engines[(i + 1) % engines.len()].evaluator(), cfg.limits),
        ];
        let mut pos = start.clone();
        pos.clear_history();
        let mut moves = Vec::new();
        let termination = loop {
            if !pos.has_legal_move() {
                break Termination::NoMoves;
            }
            if pos.repetitions() >= 2 {
                break Termination::Repetition;
            }
            if moves.len() >= cfg.max_plies {
                break Termination::MoveCap;
            }
            let searcher = &mut searchers[pos.side_to_move().index()];
            let mv = if moves.len() < cfg.diversity_plies {
                let top = searcher.top_moves(&mut pos, cfg.top_k.max(1));
                top[rng.gen_range(0..top.len())].0
            } else {
                searcher.best_move(&mut pos).best_move.expect("legal move exists")
            };
            pos.do_move(mv);
            moves.push(mv);
        };
        let mut start = start;
        start.clear_history();
        out.push((GameRecord { start, moves }, termination));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::board::Position;

    #[test]
    fn errors_on_degenerate_input() {
        let cfg = SelfPlayConfig::default();
        let pst = [EvalSource::default_pst()];
        assert_eq!(generate_selfplay(&[], &cfg, &pst, 1), Err(SelfPlayError::NoSeeds));
        let zero = SelfPlayConfig { n_games: 0, ..cfg };
        assert_eq!(generate_selfplay(&[Position::startpos()], &zero, &pst, 1), Err(SelfPlayError::NoGames));
    }

    #[test]
    fn reproducible_and_legal() {
        let cfg = SelfPlayConfig {
            n_games: 2,
            limits: SearchLimits::depth(1),
            max_plies: 30,
            ..SelfPlayConfig::default()
        };
        let pst = [EvalSource::default_pst()];
        let seeds = [Position::startpos()];
        let a = generate_selfplay(&seeds, &cfg, &pst, 42).unwrap();
        let b = generate_selfplay(&seeds, &cfg, &pst, 42).unwrap();
        assert_eq!(a, b);
        for g in &a {
            let line = g.to_line();
            assert_eq!(&GameRecord::parse_line(&line).unwrap(), g);
            assert!(g.moves.len() <= 30);
        }
    }
}
