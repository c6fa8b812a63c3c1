use std::fmt::Write as _;
use std::path::Path;
use std::sync::OnceLock;

use thiserror::Error;

use super::{Centipawns, Color, PieceKind, Position, Square, FILES, NUM_SQUARES, RANKS};

#[derive(Debug, Error)]
pub enum PstError {
    #[error("reading table file: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("table `{name}` has {found} values, expected {NUM_SQUARES}")]
    Count { name: String, found: usize },
    #[error("missing table `{0}`")]
    Missing(String),
    #[error("black {0:?} table is not the rank mirror of the red one")]
    NotMirrored(PieceKind),
}

/// Piece base values plus one 90-cell positional table per (color, piece),
/// indexed by [`Square::index`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PstTables {
    base: [Centipawns; 7],
    tables: [[[Centipawns; NUM_SQUARES]; 7]; 2],
}

// Red's point of view, printed as the board is drawn: first row is rank 9
// (Black's back rank), last row is rank 0.
#[rustfmt::skip]
const RED_TABLES: [[Centipawns; NUM_SQUARES]; 7] = [
    // King
    [
          0,   0,   0,   0,   0,   0,   0,   0,   0,
          0,   0,   0,   0,   0,   0,   0,   0,   0,
          0,   0,   0,   0,   0,   0,   0,   0,   0,
          0,   0,   0,   0,   0,   0,   0,   0,   0,
          0,   0,   0,   0,   0,   0,   0,   0,   0,
          0,   0,   0,   0,   0,   0,   0,   0,   0,
          0,   0,   0,   0,   0,   0,   0,   0,   0,
          0,   0,   0, -20, -15, -20,   0,   0,   0,
          0,   0,   0, -10,  -5, -10,   0,   0,   0,
          0,   0,   0,   0,   5,   0,   0,   0,   0,
    ],
    // Advisor
    [
          0,   0,   0,   0,   0,   0,   0,   0,   0,
          0,   0,   0,   0,   0,   0,   0,   0,   0,
          0,   0,   0,   0,   0,   0,   0,   0,   0,
          0,   0,   0,   0,   0,   0,   0,   0,   0,
          0,   0,   0,   0,   0,   0,   0,   0,   0,
          0,   0,   0,   0,   0,   0,   0,   0,   0,
          0,   0,   0,   0,   0,   0,   0,   0,   0,
          0,   0,   0,  -5,   0,  -5,   0,   0,   0,
          0,   0,   0,   0,   5,   0,   0,   0,   0,
          0,   0,   0,   0,   0,   0,   0,   0,   0,
    ],
    // Elephant
    [
          0,   0,   0,   0,   0,   0,   0,   0,   0,
          0,   0,   0,   0,   0,   0,   0,   0,   0,
          0,   0,   0,   0,   0,   0,   0,   0,   0,
          0,   0,   0,   0,   0,   0,   0,   0,   0,
          0,   0,   0,   0,   0,   0,   0,   0,   0,
          0,   0,  -5,   0,   0,   0,  -5,   0,   0,
          0,   0,   0,   0,   0,   0,   0,   0,   0,
         -5,   0,   0,   0,   5,   0,   0,   0,  -5,
          0,   0,   0,   0,   0,   0,   0,   0,   0,
          0,   0,   0,   0,   0,   0,   0,   0,   0,
    ],
    // Horse
    [
          0,  -5,   0,   0,   0,   0,   0,  -5,   0,
          0,   5,  10,  15,   5,  15,  10,   5,   0,
          5,  10,  20,  20,  15,  20,  20,  10,   5,
          5,  15,  15,  20,  20,  20,  15,  15,   5,
          0,  10,  15,  15,  15,  15,  15,  10,   0,
          0,   5,  10,  15,  10,  15,  10,   5,   0,
          0,   5,  10,  10,   5,  10,  10,   5,   0,
          0,   0,   5,   5,  10,   5,   5,   0,   0,
         -5,   0,   0,   0, -10,   0,   0,   0,  -5,
        -10, -10,  -5,  -5, -10,  -5,  -5, -10, -10,
    ],
    // Rook
    [
          5,  10,   5,  15,  15,  15,   5,  10,   5,
         10,  15,  10,  20,  20,  20,  10,  15,  10,
          5,  10,   5,  15,  15,  15,   5,  10,   5,
          5,  10,  10,  15,  15,  15,  10,  10,   5,
          5,  10,  10,  15,  15,  15,  10,  10,   5,
          5,  10,  10,  10,  10,  10,  10,  10,   5,
          0,   5,   5,   5,   5,   5,   5,   5,   0,
         -5,   5,   0,   5,   0,   5,   0,   5,  -5,
          0,   5,   0,   5,   0,   5,   0,   5,   0,
        -10,   0,  -5,   0, -10,   0,  -5,   0, -10,
    ],
    // Cannon
    [
          5,   5,   0,  -5,  -5,  -5,   0,   5,   5,
          0,   5,   0,  -5, -10,  -5,   0,   5,   0,
          0,   0,   0,  -5,  -5,  -5,   0,   0,   0,
          0,   0,   0,   0,   5,   0,   0,   0,   0,
          0,   0,   0,   0,   5,   0,   0,   0,   0,
          0,   0,   5,   0,  10,   0,   5,   0,   0,
          0,   0,   0,   0,   5,   0,   0,   0,   0,
          0,   5,   5,   5,  15,   5,   5,   5,   0,
          0,   0,   0,   0,   5,   0,   0,   0,   0,
          0,   0,   0,   0,   0,   0,   0,   0,   0,
    ],
    // Pawn: the +100 river-crossing step is part of the table.
    [
         90,  90,  90,  95,  95,  95,  90,  90,  90,
        110, 115, 120, 135, 140, 135, 120, 115, 110,
        110, 115, 120, 135, 135, 135, 120, 115, 110,
        105, 110, 115, 120, 120, 120, 115, 110, 105,
        100, 100, 105, 110, 110, 110, 105, 100, 100,
          0,   0,   5,   0,  15,   0,   5,   0,   0,
          0,   0,   0,   0,   5,   0,   0,   0,   0,
          0,   0,   0,   0,   0,   0,   0,   0,   0,
          0,   0,   0,   0,   0,   0,   0,   0,   0,
          0,   0,   0,   0,   0,   0,   0,   0,   0,
    ],
];

const DEFAULT_BASE: [Centipawns; 7] = [0, 200, 200, 450, 1000, 450, 100];

const KIND_NAMES: [&str; 7] = ["king", "advisor", "elephant", "horse", "rook", "cannon", "pawn"];

/// Index into a printed table (rank 9 first) for a board square.
#[inline]
fn printed_index(sq: Square) -> usize {
    (RANKS - 1 - sq.rank()) * FILES + sq.file()
}

impl PstTables {
    /// Builds tables from base values and Red's printed tables; Black gets the rank mirror.
    pub fn from_red(base: [Centipawns; 7], red_printed: &[[Centipawns; NUM_SQUARES]; 7]) -> PstTables {
        let mut tables = [[[0; NUM_SQUARES]; 7]; 2];
        for kind in 0..7 {
            for sq in Square::all() {
                let v = red_printed[kind][printed_index(sq)];
                tables[Color::Red.index()][kind][sq.index()] = v;
                tables[Color::Black.index()][kind][sq.mirror().index()] = v;
            }
        }
        PstTables { base, tables }
    }

    pub fn base_value(&self, kind: PieceKind) -> Centipawns {
        self.base[kind.index()]
    }

    #[inline]
    pub fn value(&self, color: Color, kind: PieceKind, sq: Square) -> Centipawns {
        self.base[kind.index()] + self.tables[color.index()][kind.index()][sq.index()]
    }

    /// Built-in tables, shared.
    pub fn default_tables() -> &'static PstTables {
        static TABLES: OnceLock<PstTables> = OnceLock::new();
        TABLES.get_or_init(PstTables::default)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<PstTables, PstError> {
        PstTables::parse(&std::fs::read_to_string(path)?)
    }

    /// Text format: `base <piece> <value>` lines (optional, default values
    /// otherwise), then for each color and piece a `table <color> <piece>`
    /// header followed by 90 integers, rank 9 first. `#` starts a comment.
    pub fn parse(text: &str) -> Result<PstTables, PstError> {
        let mut base = DEFAULT_BASE;
        let mut tables: [[Option<Vec<Centipawns>>; 7]; 2] = Default::default();
        let mut current: Option<(usize, usize)> = None;

        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let syntax = |msg: String| PstError::Syntax { line: lineno + 1, msg };
            let mut words = line.split_whitespace();
            let head = words.next().unwrap();
            match head {
                "base" => {
                    let kind = words
                        .next()
                        .and_then(kind_by_name)
                        .ok_or_else(|| syntax("expected a piece name after `base`".into()))?;
                    let value = words
                        .next()
                        .and_then(|w| w.parse().ok())
                        .ok_or_else(|| syntax("expected an integer base value".into()))?;
                    base[kind] = value;
                    current = None;
                }
                "table" => {
                    let color = match words.next() {
                        Some("red") => Color::Red,
                        Some("black") => Color::Black,
                        other => return Err(syntax(format!("bad color {other:?}"))),
                    };
                    let kind = words
                        .next()
                        .and_then(kind_by_name)
                        .ok_or_else(|| syntax("expected a piece name".into()))?;
                    tables[color.index()][kind] = Some(Vec::with_capacity(NUM_SQUARES));
                    current = Some((color.index(), kind));
                }
                _ => {
                    let (c, k) = current.ok_or_else(|| syntax("values outside a table".into()))?;
                    let values = tables[c][k].as_mut().unwrap();
                    for w in line.split_whitespace() {
                        let v = w
                            .parse()
                            .map_err(|_| syntax(format!("`{w}` is not an integer")))?;
                        values.push(v);
                    }
                }
            }
        }

        let mut out = PstTables {
            base,
            tables: [[[0; NUM_SQUARES]; 7]; 2],
        };
        for color in Color::ALL {
            for kind in PieceKind::ALL {
                let name = format!("{} {}", color_name(color), KIND_NAMES[kind.index()]);
                let values = tables[color.index()][kind.index()]
                    .as_ref()
                    .ok_or_else(|| PstError::Missing(name.clone()))?;
                if values.len() != NUM_SQUARES {
                    return Err(PstError::Count {
                        name,
                        found: values.len(),
                    });
                }
                for sq in Square::all() {
                    out.tables[color.index()][kind.index()][sq.index()] = values[printed_index(sq)];
                }
            }
        }
        for kind in PieceKind::ALL {
            let k = kind.index();
            if Square::all().any(|sq| out.tables[0][k][sq.index()] != out.tables[1][k][sq.mirror().index()]) {
                return Err(PstError::NotMirrored(kind));
            }
        }
        Ok(out)
    }

    /// Serializes in the format read by [`PstTables::parse`].
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for kind in PieceKind::ALL {
            writeln!(out, "base {} {}", KIND_NAMES[kind.index()], self.base[kind.index()]).unwrap();
        }
        for color in Color::ALL {
            for kind in PieceKind::ALL {
                writeln!(out, "\ntable {} {}", color_name(color), KIND_NAMES[kind.index()]).unwrap();
                for rank in (0..RANKS).rev() {
                    let row: Vec<String> = (0..FILES)
                        .map(|f| {
                            self.tables[color.index()][kind.index()][Square::new(f, rank).index()].to_string()
                        })
                        .collect();
                    writeln!(out, "{}", row.join(" ")).unwrap();
                }
            }
        }
        out
    }

    /// Static evaluation relative to the side to move.
    pub fn evaluate(&self, pos: &Position) -> Centipawns {
        let mut score = [0; 2];
        for (sq, p) in pos.pieces() {
            score[p.color.index()] += self.value(p.color, p.kind, sq);
        }
        let us = pos.side_to_move().index();
        score[us] - score[1 - us]
    }
}

impl Default for PstTables {
    fn default() -> PstTables {
        PstTables::from_red(DEFAULT_BASE, &RED_TABLES)
    }
}

/// Handcrafted evaluation with the built-in tables.
pub fn evaluate(pos: &Position) -> Centipawns {
    PstTables::default_tables().evaluate(pos)
}

fn kind_by_name(name: &str) -> Option<usize> {
    KIND_NAMES.iter().position(|&n| n == name)
}

fn color_name(c: Color) -> &'static str {
    match c {
        Color::Red => "red",
        Color::Black => "black",
    }
}
