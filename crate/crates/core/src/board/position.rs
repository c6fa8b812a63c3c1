use super::tables::{HORSE_ATTACKERS, NONE, RAYS};
use super::zobrist;
use super::{Color, Move, Piece, PieceKind, Square, NUM_SQUARES};

/// Rank direction a pawn of `color` advances in.
#[inline]
pub(crate) fn forward(color: Color) -> i32 {
    match color {
        Color::Red => 1,
        Color::Black => -1,
    }
}

/// Full game state. Two positions compare equal only if their move
/// histories match as well.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Position {
    board: [Option<Piece>; NUM_SQUARES],
    side: Color,
    ply: u32,
    history: Vec<u64>,
    hash: u64,
    kings: [Option<Square>; 2],
}

/// Returned by [`Position::do_move`]; hands the move back to [`Position::undo_move`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct UndoToken {
    pub mv: Move,
}

impl Position {
    /// Builds a position without checking any placement rule. Meant for
    /// constructing diagnostic positions; everything reachable through FEN
    /// parsing or legal moves is validated.
    pub fn from_board_unchecked(board: [Option<Piece>; NUM_SQUARES], side: Color, ply: u32) -> Position {
        let mut kings = [None, None];
        let mut hash = zobrist::side_term(side);
        for sq in Square::all() {
            if let Some(p) = board[sq.index()] {
                hash ^= zobrist::piece_key(p, sq);
                if p.kind == PieceKind::King {
                    kings[p.color.index()] = Some(sq);
                }
            }
        }
        Position {
            board,
            side,
            ply,
            history: Vec::new(),
            hash,
            kings,
        }
    }

    /// Validated construction from a bare placement.
    pub fn from_board(board: [Option<Piece>; NUM_SQUARES], side: Color, ply: u32) -> Result<Position, String> {
        let pos = Position::from_board_unchecked(board, side, ply);
        pos.validate()?;
        Ok(pos)
    }

    pub fn startpos() -> Position {
        Position::from_fen(super::START_FEN).expect("start FEN is valid")
    }

    #[inline]
    pub fn piece_at(&self, sq: Square) -> Option<Piece> {
        self.board[sq.index()]
    }

    pub fn board(&self) -> &[Option<Piece>; NUM_SQUARES] {
        &self.board
    }

    #[inline]
    pub fn side_to_move(&self) -> Color {
        self.side
    }

    pub fn ply(&self) -> u32 {
        self.ply
    }

    pub fn hash(&self) -> u64 {
        self.hash
    }

    /// Hashes of all earlier positions, oldest first.
    pub fn history(&self) -> &[u64] {
        &self.history
    }

    pub fn clear_history(&mut self) {
        self.history.clear();
    }

    pub fn king_square(&self, color: Color) -> Option<Square> {
        self.kings[color.index()]
    }

    pub fn pieces(&self) -> impl Iterator<Item = (Square, Piece)> + '_ {
        Square::all().filter_map(move |sq| self.board[sq.index()].map(|p| (sq, p)))
    }

    pub fn piece_count(&self) -> usize {
        self.board.iter().filter(|c| c.is_some()).count()
    }

    /// How many times the current position occurred before (same placement and side to move).
    pub fn repetitions(&self) -> usize {
        self.history.iter().filter(|&&h| h == self.hash).count()
    }

    /// Checks every placement rule plus "side not to move is not in check".
    pub fn validate(&self) -> Result<(), String> {
        let mut counts = [[0usize; 7]; 2];
        for (sq, p) in self.pieces() {
            counts[p.color.index()][p.kind.index()] += 1;
            if !legal_square(p, sq) {
                return Err(format!("{:?} {:?} cannot stand on {}", p.color, p.kind, sq));
            }
        }
        for color in Color::ALL {
            for kind in PieceKind::ALL {
                let n = counts[color.index()][kind.index()];
                if kind == PieceKind::King && n != 1 {
                    return Err(format!("{color:?} must have exactly one king, found {n}"));
                }
                if n > kind.max_count() {
                    return Err(format!("{color:?} has {n} pieces of kind {kind:?}"));
                }
            }
        }
        if self.in_check(self.side.opponent()) {
            return Err("side not to move is in check".to_string());
        }
        Ok(())
    }

    /// True iff any enemy piece attacks `color`'s king, including the
    /// facing-kings rule. A missing king counts as not in check.
    pub fn in_check(&self, color: Color) -> bool {
        match self.kings[color.index()] {
            Some(k) => self.is_attacked(k, color.opponent()),
            None => false,
        }
    }

    /// Whether `by` attacks `target` (the enemy king treated as a rook on files).
    pub(crate) fn is_attacked(&self, target: Square, by: Color) -> bool {
        attacked(&self.board, target, by)
    }

    /// Builds the move `from -> to` with the capture filled in from the board.
    pub fn make_move(&self, from: Square, to: Square) -> Move {
        Move {
            from,
            to,
            captured: self.board[to.index()],
        }
    }

    pub fn do_move(&mut self, mv: Move) -> UndoToken {
        let piece = self.board[mv.from.index()].expect("move from an empty square");
        debug_assert_eq!(piece.color, self.side, "moving an enemy piece");
        debug_assert_eq!(self.board[mv.to.index()], mv.captured, "stale capture record");
        debug_assert_ne!(mv.from, mv.to);

        self.history.push(self.hash);
        let mut hash = self.hash ^ zobrist::side_key();
        hash ^= zobrist::piece_key(piece, mv.from) ^ zobrist::piece_key(piece, mv.to);
        if let Some(cap) = mv.captured {
            hash ^= zobrist::piece_key(cap, mv.to);
            if cap.kind == PieceKind::King {
                self.kings[cap.color.index()] = None;
            }
        }
        self.hash = hash;
        self.board[mv.to.index()] = Some(piece);
        self.board[mv.from.index()] = None;
        if piece.kind == PieceKind::King {
            self.kings[piece.color.index()] = Some(mv.to);
        }
        self.side = self.side.opponent();
        self.ply += 1;
        UndoToken { mv }
    }

    pub fn undo_move(&mut self, token: UndoToken) {
        let mv = token.mv;
        let piece = self.board[mv.to.index()].expect("undo of a move that was not made");
        self.board[mv.from.index()] = Some(piece);
        self.board[mv.to.index()] = mv.captured;
        if piece.kind == PieceKind::King {
            self.kings[piece.color.index()] = Some(mv.from);
        }
        if let Some(cap) = mv.captured {
            if cap.kind == PieceKind::King {
                self.kings[cap.color.index()] = Some(mv.to);
            }
        }
        self.side = self.side.opponent();
        self.ply -= 1;
        self.hash = self.history.pop().expect("history underflow");
    }

    /// Colors swapped and ranks flipped, other side to move. History is dropped.
    pub fn color_flip_mirror(&self) -> Position {
        let mut board = [None; NUM_SQUARES];
        for (sq, p) in self.pieces() {
            board[sq.mirror().index()] = Some(p.flipped());
        }
        Position::from_board_unchecked(board, self.side.opponent(), self.ply)
    }
}

/// Placement rule for a single piece.
pub(crate) fn legal_square(p: Piece, sq: Square) -> bool {
    // Work in Red-relative coordinates.
    let rel = match p.color {
        Color::Red => sq,
        Color::Black => sq.mirror(),
    };
    let (f, r) = (rel.file(), rel.rank());
    match p.kind {
        PieceKind::King => rel.in_palace(Color::Red),
        PieceKind::Advisor => matches!((f, r), (3, 0) | (5, 0) | (4, 1) | (3, 2) | (5, 2)),
        PieceKind::Elephant => matches!(
            (f, r),
            (2, 0) | (6, 0) | (0, 2) | (4, 2) | (8, 2) | (2, 4) | (6, 4)
        ),
        PieceKind::Pawn => r >= 5 || ((r == 3 || r == 4) && f % 2 == 0),
        PieceKind::Horse | PieceKind::Rook | PieceKind::Cannon => true,
    }
}

/// Whether `by` attacks `target` on `board` (a king attacks like a rook along files).
pub(crate) fn attacked(board: &[Option<Piece>; NUM_SQUARES], target: Square, by: Color) -> bool {
    for (d, ray) in RAYS[target.index()].iter().enumerate() {
        let mut screened = false;
        for &sq in ray.iter().take_while(|&&s| s != NONE) {
            let Some(p) = board[sq as usize] else {
                continue;
            };
            if !screened {
                // Directions 2 and 3 run along the file.
                if p.color == by && (p.kind == PieceKind::Rook || (p.kind == PieceKind::King && d >= 2)) {
                    return true;
                }
                screened = true;
            } else {
                if p.color == by && p.kind == PieceKind::Cannon {
                    return true;
                }
                break;
            }
        }
    }

    let horse = Some(Piece::new(by, PieceKind::Horse));
    for &(from, leg) in &HORSE_ATTACKERS[target.index()] {
        if from == NONE {
            break;
        }
        if board[from as usize] == horse && board[leg as usize].is_none() {
            return true;
        }
    }

    let pawn = Some(Piece::new(by, PieceKind::Pawn));
    if let Some(sq) = target.offset(0, -forward(by)) {
        if board[sq.index()] == pawn {
            return true;
        }
    }
    for df in [-1, 1] {
        if let Some(sq) = target.offset(df, 0) {
            if board[sq.index()] == pawn && !sq.on_own_side(by) {
                return true;
            }
        }
    }
    false
}
