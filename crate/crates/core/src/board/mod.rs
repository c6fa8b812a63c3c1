//! Xiangqi rules: board representation, FEN, move generation and the
//! handcrafted piece-square evaluation.

mod fen;
mod movegen;
mod position;
mod tables;
mod pst;
mod zobrist;

use std::fmt;
use std::str::FromStr;

pub use fen::{FenError, START_FEN};
pub use movegen::{perft, perft_divide};
pub use position::{Position, UndoToken};
pub use pst::{evaluate, PstError, PstTables};

/// Evaluation unit: 1/100 of a pawn, relative to the side to move unless stated otherwise.
pub type Centipawns = i32;

/// Score of a side that is mated on the spot. Mate in `n` plies is `MATE_SCORE - n`.
pub const MATE_SCORE: Centipawns = 30_000;

pub const FILES: usize = 9;
pub const RANKS: usize = 10;
pub const NUM_SQUARES: usize = FILES * RANKS;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Color {
    Red,
    Black,
}

impl Color {
    pub const ALL: [Color; 2] = [Color::Red, Color::Black];

    #[inline]
    pub fn index(self) -> usize {
        self as usize
    }

    #[inline]
    pub fn opponent(self) -> Color {
        match self {
            Color::Red => Color::Black,
            Color::Black => Color::Red,
        }
    }
}

impl std::ops::Not for Color {
    type Output = Color;

    fn not(self) -> Color {
        self.opponent()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PieceKind {
    King,
    Advisor,
    Elephant,
    Horse,
    Rook,
    Cannon,
    Pawn,
}

impl PieceKind {
    pub const ALL: [PieceKind; 7] = [
        PieceKind::King,
        PieceKind::Advisor,
        PieceKind::Elephant,
        PieceKind::Horse,
        PieceKind::Rook,
        PieceKind::Cannon,
        PieceKind::Pawn,
    ];

    #[inline]
    pub fn index(self) -> usize {
        self as usize
    }

    /// Upper-case FEN letter (Red).
    pub fn letter(self) -> char {
        match self {
            PieceKind::King => 'K',
            PieceKind::Advisor => 'A',
            PieceKind::Elephant => 'B',
            PieceKind::Horse => 'N',
            PieceKind::Rook => 'R',
            PieceKind::Cannon => 'C',
            PieceKind::Pawn => 'P',
        }
    }

    pub fn from_letter(c: char) -> Option<PieceKind> {
        Some(match c.to_ascii_uppercase() {
            'K' => PieceKind::King,
            'A' => PieceKind::Advisor,
            'B' | 'E' => PieceKind::Elephant,
            'N' | 'H' => PieceKind::Horse,
            'R' => PieceKind::Rook,
            'C' => PieceKind::Cannon,
            'P' => PieceKind::Pawn,
            _ => return None,
        })
    }

    /// Maximum number of pieces of this kind a side may own.
    pub fn max_count(self) -> usize {
        match self {
            PieceKind::King => 1,
            PieceKind::Pawn => 5,
            _ => 2,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Piece {
    pub color: Color,
    pub kind: PieceKind,
}

impl Piece {
    pub const fn new(color: Color, kind: PieceKind) -> Piece {
        Piece { color, kind }
    }

    /// Packed code: 1..=7 for Red King..Pawn, 9..=15 for Black.
    #[inline]
    pub fn code(self) -> u8 {
        1 + self.kind as u8 + if self.color == Color::Black { 8 } else { 0 }
    }

    pub fn from_code(code: u8) -> Option<Piece> {
        let color = match code {
            1..=7 => Color::Red,
            9..=15 => Color::Black,
            _ => return None,
        };
        let kind = PieceKind::ALL[((code & 7) - 1) as usize];
        Some(Piece { color, kind })
    }

    pub fn fen_char(self) -> char {
        let c = self.kind.letter();
        match self.color {
            Color::Red => c,
            Color::Black => c.to_ascii_lowercase(),
        }
    }

    pub fn from_fen_char(c: char) -> Option<Piece> {
        let kind = PieceKind::from_letter(c)?;
        let color = if c.is_ascii_uppercase() {
            Color::Red
        } else {
            Color::Black
        };
        Some(Piece { color, kind })
    }

    /// Same piece owned by the other side.
    pub fn flipped(self) -> Piece {
        Piece::new(self.color.opponent(), self.kind)
    }
}

/// A board cell, `rank * 9 + file`, with rank 0 being Red's back rank and file 0 Red's left.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Square(u8);

impl Square {
    #[inline]
    pub fn new(file: usize, rank: usize) -> Square {
        debug_assert!(file < FILES && rank < RANKS);
        Square((rank * FILES + file) as u8)
    }

    #[inline]
    pub fn from_index(index: usize) -> Option<Square> {
        (index < NUM_SQUARES).then_some(Square(index as u8))
    }

    /// Offset by (file, rank) deltas; `None` when leaving the board.
    #[inline]
    pub fn offset(self, df: i32, dr: i32) -> Option<Square> {
        let f = self.file() as i32 + df;
        let r = self.rank() as i32 + dr;
        if (0..FILES as i32).contains(&f) && (0..RANKS as i32).contains(&r) {
            Some(Square::new(f as usize, r as usize))
        } else {
            None
        }
    }

    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }

    #[inline]
    pub fn file(self) -> usize {
        self.0 as usize % FILES
    }

    #[inline]
    pub fn rank(self) -> usize {
        self.0 as usize / FILES
    }

    /// Rank-flipped square (the board seen from the other side, files unchanged).
    #[inline]
    pub fn mirror(self) -> Square {
        Square::new(self.file(), RANKS - 1 - self.rank())
    }

    /// Whether the square lies on `color`'s half of the river.
    #[inline]
    pub fn on_own_side(self, color: Color) -> bool {
        match color {
            Color::Red => self.rank() <= 4,
            Color::Black => self.rank() >= 5,
        }
    }

    #[inline]
    pub fn in_palace(self, color: Color) -> bool {
        let f = self.file();
        let r = self.rank();
        (3..=5).contains(&f)
            && match color {
                Color::Red => r <= 2,
                Color::Black => r >= 7,
            }
    }

    pub fn all() -> impl Iterator<Item = Square> {
        (0..NUM_SQUARES as u8).map(Square)
    }
}

impl fmt::Display for Square {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", (b'a' + self.file() as u8) as char, self.rank())
    }
}

impl FromStr for Square {
    type Err = String;

    fn from_str(s: &str) -> Result<Square, String> {
        let b = s.as_bytes();
        if b.len() != 2 || !(b'a'..=b'i').contains(&b[0]) || !b[1].is_ascii_digit() {
            return Err(format!("bad square `{s}`"));
        }
        Ok(Square::new((b[0] - b'a') as usize, (b[1] - b'0') as usize))
    }
}

/// A move with the captured piece (if any) recorded for undo.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Move {
    pub from: Square,
    pub to: Square,
    pub captured: Option<Piece>,
}

impl Move {
    pub fn is_capture(&self) -> bool {
        self.captured.is_some()
    }

    /// Coordinate notation, e.g. `h2e2`.
    pub fn to_coord(&self) -> String {
        format!("{}{}", self.from, self.to)
    }
}

impl fmt::Display for Move {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.from, self.to)
    }
}
