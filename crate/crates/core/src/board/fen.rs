use thiserror::Error;

use super::{Color, Piece, Position, Square, FILES, NUM_SQUARES, RANKS};

pub const START_FEN: &str = "rnbakabnr/9/1c5c1/p1p1p1p1p/9/9/P1P1P1P1P/1C5C1/9/RNBAKABNR w - - 0 1";

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FenError {
    #[error("empty FEN")]
    Empty,
    #[error("expected {RANKS} ranks, found {0}")]
    RankCount(usize),
    #[error("rank {rank} describes {files} files instead of {FILES}")]
    FileCount { rank: usize, files: usize },
    #[error("unknown piece letter `{0}`")]
    BadPiece(char),
    #[error("bad side to move `{0}`")]
    BadSide(String),
    #[error("bad move counter `{0}`")]
    BadCounter(String),
    #[error("illegal placement: {0}")]
    Illegal(String),
}

impl Position {
    /// Parses Xiangqi FEN. Only the placement and side fields are required;
    /// a trailing full-move counter, when present, sets the ply.
    pub fn from_fen(text: &str) -> Result<Position, FenError> {
        let mut fields = text.split_whitespace();
        let placement = fields.next().ok_or(FenError::Empty)?;
        let ranks: Vec<&str> = placement.split('/').collect();
        if ranks.len() != RANKS {
            return Err(FenError::RankCount(ranks.len()));
        }

        let mut board = [None; NUM_SQUARES];
        for (i, row) in ranks.iter().enumerate() {
            let rank = RANKS - 1 - i;
            let mut file = 0usize;
            for c in row.chars() {
                if let Some(d) = c.to_digit(10) {
                    file += d as usize;
                } else {
                    let piece = Piece::from_fen_char(c).ok_or(FenError::BadPiece(c))?;
                    if file < FILES {
                        board[Square::new(file, rank).index()] = Some(piece);
                    }
                    file += 1;
                }
            }
            if file != FILES {
                return Err(FenError::FileCount { rank, files: file });
            }
        }

        let side = match fields.next() {
            None | Some("w") | Some("r") => Color::Red,
            Some("b") => Color::Black,
            Some(other) => return Err(FenError::BadSide(other.to_string())),
        };
        let rest: Vec<&str> = fields.collect();
        let fullmove = match rest.get(3) {
            Some(s) => s
                .parse::<u32>()
                .ok()
                .filter(|&n| n >= 1)
                .ok_or_else(|| FenError::BadCounter(s.to_string()))?,
            None => 1,
        };
        let ply = 2 * (fullmove - 1) + (side == Color::Black) as u32;

        Position::from_board(board, side, ply).map_err(FenError::Illegal)
    }

    /// Canonical FEN: placement, side (`w`/`b`), `- - 0`, full-move counter.
    /// History is not part of the output.
    pub fn to_fen(&self) -> String {
        let mut out = String::with_capacity(96);
        for rank in (0..RANKS).rev() {
            let mut empty = 0;
            for file in 0..FILES {
                match self.piece_at(Square::new(file, rank)) {
                    None => empty += 1,
                    Some(p) => {
                        if empty > 0 {
                            out.push(char::from_digit(empty, 10).unwrap());
                            empty = 0;
                        }
                        out.push(p.fen_char());
                    }
                }
            }
            if empty > 0 {
                out.push(char::from_digit(empty, 10).unwrap());
            }
            if rank > 0 {
                out.push('/');
            }
        }
        let side = match self.side_to_move() {
            Color::Red => 'w',
            Color::Black => 'b',
        };
        out.push_str(&format!(" {side} - - 0 {}", self.ply() / 2 + 1));
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::board::PieceKind;

    #[test]
    fn startpos_has_32_pieces_red_to_move() {
        let p = Position::from_fen(START_FEN).unwrap();
        assert_eq!(p.piece_count(), 32);
        assert_eq!(p.side_to_move(), Color::Red);
        // Hand-built initial array.
        let back = [
            PieceKind::Rook,
            PieceKind::Horse,
            PieceKind::Elephant,
            PieceKind::Advisor,
            PieceKind::King,
            PieceKind::Advisor,
            PieceKind::Elephant,
            PieceKind::Horse,
            PieceKind::Rook,
        ];
        for (f, kind) in back.iter().enumerate() {
            assert_eq!(p.piece_at(Square::new(f, 0)), Some(Piece::new(Color::Red, *kind)));
            assert_eq!(p.piece_at(Square::new(f, 9)), Some(Piece::new(Color::Black, *kind)));
        }
        for f in [1, 7] {
            assert_eq!(p.piece_at(Square::new(f, 2)), Some(Piece::new(Color::Red, PieceKind::Cannon)));
            assert_eq!(p.piece_at(Square::new(f, 7)), Some(Piece::new(Color::Black, PieceKind::Cannon)));
        }
        for f in [0, 2, 4, 6, 8] {
            assert_eq!(p.piece_at(Square::new(f, 3)), Some(Piece::new(Color::Red, PieceKind::Pawn)));
            assert_eq!(p.piece_at(Square::new(f, 6)), Some(Piece::new(Color::Black, PieceKind::Pawn)));
        }
    }

    #[test]
    fn side_field() {
        let black = START_FEN.replace(" w ", " b ");
        assert_eq!(Position::from_fen(&black).unwrap().side_to_move(), Color::Black);
        let red = START_FEN.replace(" w ", " r ");
        assert_eq!(Position::from_fen(&red).unwrap().side_to_move(), Color::Red);
        let bare = START_FEN.split(' ').next().unwrap();
        assert_eq!(Position::from_fen(bare).unwrap().side_to_move(), Color::Red);
    }

    #[test]
    fn nine_ranks_rejected() {
        let fen = "rnbakabnr/9/1c5c1/p1p1p1p1p/9/P1P1P1P1P/1C5C1/9/RNBAKABNR w";
        assert_eq!(Position::from_fen(fen), Err(FenError::RankCount(9)));
    }

    #[test]
    fn malformed_inputs() {
        assert_eq!(Position::from_fen(""), Err(FenError::Empty));
        assert!(matches!(
            Position::from_fen("rnbakabnr/9/1c5c1/p1p1p1p1p/9/9/P1P1P1P1P/1C5C1/9/RNBAKABN w"),
            Err(FenError::FileCount { rank: 0, files: 8 })
        ));
        assert!(matches!(
            Position::from_fen("rnbakabnr/9/1c5c1/p1p1p1p1p/9/9/P1P1P1P1P/1C5C1/9/RNBAKABNX w"),
            Err(FenError::BadPiece('X'))
        ));
        assert!(matches!(
            Position::from_fen(&START_FEN.replace(" w ", " x ")),
            Err(FenError::BadSide(_))
        ));
    }

    #[test]
    fn illegal_placements_rejected() {
        // Red elephant across the river.
        let e = "rnbakabnr/9/1c5c1/p1p1p1p1p/2B6/9/P1P1P1P1P/1C5C1/9/RN1AKABNR w";
        assert!(matches!(Position::from_fen(e), Err(FenError::Illegal(_))));
        // Missing red king.
        let k = "rnbakabnr/9/1c5c1/p1p1p1p1p/9/9/P1P1P1P1P/1C5C1/9/RNBA1ABNR w";
        assert!(matches!(Position::from_fen(k), Err(FenError::Illegal(_))));
        // King outside palace.
        let k2 = "rnbakabnr/9/1c5c1/p1p1p1p1p/9/9/P1P1P1P1P/1C5C1/9/RNBAAKBNR w";
        assert!(matches!(Position::from_fen(k2), Err(FenError::Illegal(_))));
        // Advisor off the palace diagonal.
        let a = "rnbakabnr/9/1c5c1/p1p1p1p1p/9/9/P1P1P1P1P/1C2A2C1/9/RNB1KABNR w";
        assert!(matches!(Position::from_fen(a), Err(FenError::Illegal(_))));
        // Red pawn behind its start rank.
        let p = "rnbakabnr/9/1c5c1/p1p1p1p1p/9/9/2P1P1P1P/PC5C1/9/RNBAKABNR w";
        assert!(matches!(Position::from_fen(p), Err(FenError::Illegal(_))));
        // Facing kings with Black to move means Red (not to move) is in check.
        let fk = "4k4/9/9/9/9/9/9/9/9/4K4 w";
        assert!(matches!(Position::from_fen(fk), Err(FenError::Illegal(_))));
    }

    #[test]
    fn round_trip_canonical() {
        let fens = [
            START_FEN,
            "3k5/4a4/9/9/9/9/9/9/4A4/3AK4 b - - 0 17",
            "r3kab2/4a4/4b1n2/p3p1p1p/2pn5/6P2/P1P1P3P/2N1C1N2/4A4/R1BAK1B1c w - - 0 12",
        ];
        for f in fens {
            assert_eq!(Position::from_fen(f).unwrap().to_fen(), f);
        }
    }

    #[test]
    fn history_not_serialized() {
        let mut p = Position::startpos();
        let fresh = p.to_fen();
        let m = p.make_move("h2".parse().unwrap(), "e2".parse().unwrap());
        let t = p.do_move(m);
        p.undo_move(t);
        assert_eq!(p.to_fen(), fresh);
        let mut q = Position::startpos();
        q.do_move(m);
        let mut r = Position::from_fen(&q.to_fen()).unwrap();
        assert!(r.history().is_empty());
        assert_eq!(r.to_fen(), q.to_fen());
        r.clear_history();
    }
}
