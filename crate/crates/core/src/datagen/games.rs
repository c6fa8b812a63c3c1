use std::fmt::Write as _;
use std::path::Path;

use thiserror::Error;

use crate::board::{Move, Position};

/// A start position and the moves played from it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GameRecord {
    pub start: Position,
    pub moves: Vec<Move>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GameParseError {
    #[error("missing `|` between FEN and moves")]
    NoSeparator,
    #[error("bad FEN: {0}")]
    Fen(#[from] crate::board::FenError),
    #[error("move {index} `{text}` is not legal")]
    IllegalMove { index: usize, text: String },
}

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("reading {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("zero parseable games in {0}")]
    NoGames(String),
}

/// Result of reading a game list: the playable games plus a tally of rejected lines.
#[derive(Debug, Default)]
pub struct Ingested {
    pub games: Vec<GameRecord>,
    /// (1-based line number, reason)
    pub rejects: Vec<(usize, GameParseError)>,
}

impl GameRecord {
    /// Parses `<FEN>|<move> <move> ...`; every move must be legal in turn.
    pub fn parse_line(line: &str) -> Result<GameRecord, GameParseError> {
        let (fen, moves) = line.split_once('|').ok_or(GameParseError::NoSeparator)?;
        let start = Position::from_fen(fen.trim())?;
        let mut pos = start.clone();
        let mut out = Vec::new();
        for (index, text) in moves.split_whitespace().enumerate() {
            let mv = pos.parse_move(text).ok_or_else(|| GameParseError::IllegalMove {
                index,
                text: text.to_string(),
            })?;
            pos.do_move(mv);
            out.push(mv);
        }
        Ok(GameRecord { start, moves: out })
    }

    pub fn to_line(&self) -> String {
        let mut s = self.start.to_fen();
        s.push('|');
        for (i, m) in self.moves.iter().enumerate() {
            if i > 0 {
                s.push(' ');
            }
            write!(s, "{m}").unwrap();
        }
        s
    }

    /// Every position of the game, start and final included.
    pub fn positions(&self) -> Vec<Position> {
        let mut pos = self.start.clone();
        let mut out = Vec::with_capacity(self.moves.len() + 1);
        out.push(pos.clone());
        for &m in &self.moves {
            pos.do_move(m);
            out.push(pos.clone());
        }
        out
    }

    /// Position after all moves, history included.
    pub fn final_position(&self) -> Position {
        let mut pos = self.start.clone();
        for &m in &self.moves {
            pos.do_move(m);
        }
        pos
    }
}

/// Parses a game list from text. Blank lines and `#` comments are skipped.
pub fn parse_games(text: &str) -> Ingested {
    let mut out = Ingested::default();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        match GameRecord::parse_line(line) {
            Ok(g) => out.games.push(g),
            Err(e) => {
                log::warn!("line {}: skipped game: {e}", i + 1);
                out.rejects.push((i + 1, e));
            }
        }
    }
    out
}

pub fn ingest_games(path: impl AsRef<Path>) -> Result<Ingested, IngestError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| IngestError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let out = parse_games(&text);
    if out.games.is_empty() {
        return Err(IngestError::NoGames(path.display().to_string()));
    }
    Ok(out)
}

pub fn games_to_text(games: &[GameRecord]) -> String {
    let mut s = String::new();
    for g in games {
        s.push_str(&g.to_line());
        s.push('\n');
    }
    s
}
