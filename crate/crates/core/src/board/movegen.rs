use super::position::{attacked, forward};
use super::tables::{HORSE_MOVES, NONE, RAYS};
use super::{Color, Move, PieceKind, Position, Square};

const ORTHOGONAL: [(i32, i32); 4] = [(1, 0), (-1, 0), (0, 1), (0, -1)];
const DIAGONAL: [(i32, i32); 4] = [(1, 1), (1, -1), (-1, 1), (-1, -1)];

impl Position {
    /// All legal moves in generation order (by origin square, then piece pattern).
    pub fn legal_moves(&self) -> Vec<Move> {
        let mut moves = Vec::with_capacity(64);
        self.pseudo_moves(false, &mut moves);
        let guard = self.king_guard();
        moves.retain(|&m| self.is_safe_with(m, guard));
        moves
    }

    /// Legal captures only.
    pub fn legal_captures(&self) -> Vec<Move> {
        let mut moves = Vec::with_capacity(16);
        self.pseudo_moves(true, &mut moves);
        let guard = self.king_guard();
        moves.retain(|&m| self.is_safe_with(m, guard));
        moves
    }

    /// Legal captures when the side to move is known not to be in check.
    pub(crate) fn legal_captures_not_in_check(&self) -> Vec<Move> {
        let mut moves = Vec::with_capacity(16);
        self.pseudo_moves(true, &mut moves);
        let guard = self.king_square(self.side_to_move());
        moves.retain(|&m| self.is_safe_with(m, guard));
        moves
    }

    pub fn has_legal_move(&self) -> bool {
        let mut moves = Vec::with_capacity(64);
        self.pseudo_moves(false, &mut moves);
        let guard = self.king_guard();
        moves.into_iter().any(|m| self.is_safe_with(m, guard))
    }

    /// The mover's king square when it is not in check, else `None`.
    fn king_guard(&self) -> Option<Square> {
        let us = self.side_to_move();
        self.king_square(us).filter(|_| !self.in_check(us))
    }

    /// Like `is_safe`, skipping the attack test for moves that cannot open
    /// or close a line, screen or horse leg next to an unchecked king.
    fn is_safe_with(&self, mv: Move, guard: Option<Square>) -> bool {
        if let Some(k) = guard {
            let near = |s: Square| {
                s.file() == k.file()
                    || s.rank() == k.rank()
                    || (s.file().abs_diff(k.file()) == 1 && s.rank().abs_diff(k.rank()) == 1)
            };
            if mv.from != k && !near(mv.from) && !near(mv.to) {
                return true;
            }
        }
        self.is_safe(mv)
    }

    /// Looks up a legal move by its coordinate notation.
    pub fn parse_move(&self, text: &str) -> Option<Move> {
        if text.len() != 4 {
            return None;
        }
        let from: Square = text[..2].parse().ok()?;
        let to: Square = text[2..].parse().ok()?;
        self.legal_moves().into_iter().find(|m| m.from == from && m.to == to)
    }

    /// Whether the mover's king is safe after `mv` (covers facing kings).
    fn is_safe(&self, mv: Move) -> bool {
        let mut board = *self.board();
        let piece = board[mv.from.index()].expect("origin occupied");
        board[mv.to.index()] = Some(piece);
        board[mv.from.index()] = None;
        let king = if piece.kind == PieceKind::King {
            mv.to
        } else {
            match self.king_square(piece.color) {
                Some(k) => k,
                None => return true,
            }
        };
        !attacked(&board, king, piece.color.opponent())
    }

    fn pseudo_moves(&self, captures_only: bool, out: &mut Vec<Move>) {
        let us = self.side_to_move();
        for from in Square::all() {
            let Some(piece) = self.piece_at(from) else {
                continue;
            };
            if piece.color != us {
                continue;
            }
            match piece.kind {
                PieceKind::King => {
                    for (df, dr) in ORTHOGONAL {
                        if let Some(to) = from.offset(df, dr).filter(|s| s.in_palace(us)) {
                            self.push_step(from, to, us, captures_only, out);
                        }
                    }
                }
                PieceKind::Advisor => {
                    for (df, dr) in DIAGONAL {
                        if let Some(to) = from.offset(df, dr).filter(|s| s.in_palace(us)) {
                            self.push_step(from, to, us, captures_only, out);
                        }
                    }
                }
                PieceKind::Elephant => {
                    for (df, dr) in DIAGONAL {
                        let Some(eye) = from.offset(df, dr) else {
                            continue;
                        };
                        if self.piece_at(eye).is_some() {
                            continue;
                        }
                        if let Some(to) = from.offset(2 * df, 2 * dr).filter(|s| s.on_own_side(us)) {
                            self.push_step(from, to, us, captures_only, out);
                        }
                    }
                }
                PieceKind::Horse => {
                    for &(to, leg) in &HORSE_MOVES[from.index()] {
                        if to == NONE {
                            break;
                        }
                        if self.board()[leg as usize].is_none() {
                            self.push_step(from, Square(to), us, captures_only, out);
                        }
                    }
                }
                PieceKind::Rook => {
                    for ray in &RAYS[from.index()] {
                        for &to in ray.iter().take_while(|&&t| t != NONE) {
                            let to = Square(to);
                            match self.piece_at(to) {
                                None => {
                                    if !captures_only {
                                        out.push(Move { from, to, captured: None });
                                    }
                                }
                                Some(p) => {
                                    if p.color != us {
                                        out.push(Move { from, to, captured: Some(p) });
                                    }
                                    break;
                                }
                            }
                        }
                    }
                }
                PieceKind::Cannon => {
                    for ray in &RAYS[from.index()] {
                        let mut screened = false;
                        for &to in ray.iter().take_while(|&&t| t != NONE) {
                            let to = Square(to);
                            match (self.piece_at(to), screened) {
                                (None, false) => {
                                    if !captures_only {
                                        out.push(Move { from, to, captured: None });
                                    }
                                }
                                (None, true) => {}
                                (Some(_), false) => screened = true,
                                (Some(p), true) => {
                                    if p.color != us {
                                        out.push(Move { from, to, captured: Some(p) });
                                    }
                                    break;
                                }
                            }
                        }
                    }
                }
                PieceKind::Pawn => {
                    if let Some(to) = from.offset(0, forward(us)) {
                        self.push_step(from, to, us, captures_only, out);
                    }
                    if !from.on_own_side(us) {
                        for df in [-1, 1] {
                            if let Some(to) = from.offset(df, 0) {
                                self.push_step(from, to, us, captures_only, out);
                            }
                        }
                    }
                }
            }
        }
    }

    #[inline]
    fn push_step(&self, from: Square, to: Square, us: Color, captures_only: bool, out: &mut Vec<Move>) {
        match self.piece_at(to) {
            None if !captures_only => out.push(Move { from, to, captured: None }),
            Some(p) if p.color != us => out.push(Move {
                from,
                to,
                captured: Some(p),
            }),
            _ => {}
        }
    }
}

/// Leaf count of the legal move tree to `depth` plies.
pub fn perft(pos: &mut Position, depth: u32) -> u64 {
    if depth == 0 {
        return 1;
    }
    let moves = pos.legal_moves();
    if depth == 1 {
        return moves.len() as u64;
    }
    let mut total = 0;
    for m in moves {
        let t = pos.do_move(m);
        total += perft(pos, depth - 1);
        pos.undo_move(t);
    }
    total
}

/// Per-root-move perft split, in generation order.
pub fn perft_divide(pos: &mut Position, depth: u32) -> Vec<(Move, u64)> {
    if depth == 0 {
        return Vec::new();
    }
    pos.legal_moves()
        .into_iter()
        .map(|m| {
            let t = pos.do_move(m);
            let n = perft(pos, depth - 1);
            pos.undo_move(t);
            (m, n)
        })
        .collect()
}
