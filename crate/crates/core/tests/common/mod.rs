//! Reference implementations used as test oracles. The rules oracle shares
//! no code with the library: it parses FEN itself and checks every
//! (piece, target square) pair against the movement rules.

#![allow(dead_code)]

use std::collections::HashMap;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use xqnnue::board::{Centipawns, Color, Piece, Position, PstTables, MATE_SCORE};
use xqnnue::eval::{Evaluator, NnueEvaluator, PstEvaluator};
use xqnnue::nnue::{
    batch_gradient, batch_loss, encode_features, Accumulator, Network, TrainSample, HIDDEN, STANDARD_INPUT_DIM,
};
use xqnnue::search::{is_mate_score, SearchLimits, Searcher};

pub const INF: Centipawns = MATE_SCORE + 1;

/// Black in check from a rook on the king's file.
pub const CHECKED_KING: &str = "4k4/9/9/9/9/9/9/9/4R4/3K5 b - - 0 1";
/// Red to move can take an undefended rook.
pub const HANGING_ROOK: &str = "3k5/9/9/9/4r4/9/9/9/9/4RK3 w - - 0 1";
/// No capture for Red, but c5d7 checks the king and forks the rook on f6.
pub const HORSE_FORK: &str = "4k4/9/9/5r3/2N6/9/9/3A5/9/3K5 w - - 0 1";
pub const QUIET_START: &str = xqnnue::board::START_FEN;

/// Board as FEN letters, `cells[rank][file]`, rank 0 on Red's side.
#[derive(Clone, PartialEq, Eq)]
pub struct Grid {
    pub cells: [[u8; 9]; 10],
    pub red_to_move: bool,
}

impl Grid {
    pub fn from_fen(fen: &str) -> Grid {
        let mut fields = fen.split_whitespace();
        let placement = fields.next().unwrap();
        let mut cells = [[b'.'; 9]; 10];
        for (i, row) in placement.split('/').enumerate() {
            let rank = 9 - i;
            let mut file = 0;
            for ch in row.bytes() {
                if ch.is_ascii_digit() {
                    file += (ch - b'0') as usize;
                } else {
                    cells[rank][file] = match ch {
                        b'E' => b'B',
                        b'e' => b'b',
                        b'H' => b'N',
                        b'h' => b'n',
                        c => c,
                    };
                    file += 1;
                }
            }
        }
        let red_to_move = !matches!(fields.next(), Some("b"));
        Grid { cells, red_to_move }
    }

    fn at(&self, r: i32, f: i32) -> u8 {
        self.cells[r as usize][f as usize]
    }

    fn is_red(c: u8) -> bool {
        c.is_ascii_uppercase()
    }

    fn in_palace(red: bool, r: i32, f: i32) -> bool {
        (3..=5).contains(&f) && if red { (0..=2).contains(&r) } else { (7..=9).contains(&r) }
    }

    fn between(&self, r0: i32, f0: i32, r1: i32, f1: i32) -> usize {
        let (dr, df) = ((r1 - r0).signum(), (f1 - f0).signum());
        let (mut r, mut f) = (r0 + dr, f0 + df);
        let mut n = 0;
        while (r, f) != (r1, f1) {
            if self.at(r, f) != b'.' {
                n += 1;
            }
            r += dr;
            f += df;
        }
        n
    }

    /// Movement rules for the piece on (r0, f0) going to (r1, f1), ignoring
    /// whether the mover's king ends up attacked.
    pub fn reaches(&self, r0: i32, f0: i32, r1: i32, f1: i32) -> bool {
        let piece = self.at(r0, f0);
        if piece == b'.' || (r0, f0) == (r1, f1) {
            return false;
        }
        let red = Grid::is_red(piece);
        let target = self.at(r1, f1);
        if target != b'.' && Grid::is_red(target) == red {
            return false;
        }
        let (dr, df) = (r1 - r0, f1 - f0);
        match piece.to_ascii_uppercase() {
            b'K' => dr.abs() + df.abs() == 1 && Grid::in_palace(red, r1, f1),
            b'A' => dr.abs() == 1 && df.abs() == 1 && Grid::in_palace(red, r1, f1),
            b'B' => {
                dr.abs() == 2
                    && df.abs() == 2
                    && self.at(r0 + dr / 2, f0 + df / 2) == b'.'
                    && if red { r1 <= 4 } else { r1 >= 5 }
            }
            b'N' => {
                if dr.abs() == 2 && df.abs() == 1 {
                    self.at(r0 + dr / 2, f0) == b'.'
                } else if dr.abs() == 1 && df.abs() == 2 {
                    self.at(r0, f0 + df / 2) == b'.'
                } else {
                    false
                }
            }
            b'R' => (dr == 0 || df == 0) && self.between(r0, f0, r1, f1) == 0,
            b'C' => {
                (dr == 0 || df == 0)
                    && match target {
                        b'.' => self.between(r0, f0, r1, f1) == 0,
                        _ => self.between(r0, f0, r1, f1) == 1,
                    }
            }
            b'P' => {
                let fwd = if red { 1 } else { -1 };
                let crossed = if red { r0 >= 5 } else { r0 <= 4 };
                (dr == fwd && df == 0) || (crossed && dr == 0 && df.abs() == 1)
            }
            _ => unreachable!(),
        }
    }

    fn king(&self, red: bool) -> Option<(i32, i32)> {
        let k = if red { b'K' } else { b'k' };
        for r in 0..10 {
            for f in 0..9 {
                if self.at(r, f) == k {
                    return Some((r, f));
                }
            }
        }
        None
    }

    /// Whether `red`'s king is attacked or faces the other king.
    pub fn king_in_danger(&self, red: bool) -> bool {
        let Some((kr, kf)) = self.king(red) else {
            return false;
        };
        if let Some((or, of)) = self.king(!red) {
            if of == kf && self.between(kr, kf, or, of) == 0 {
                return true;
            }
        }
        for r in 0..10 {
            for f in 0..9 {
                let c = self.at(r, f);
                if c != b'.' && Grid::is_red(c) != red && self.reaches(r, f, kr, kf) {
                    return true;
                }
            }
        }
        false
    }

    pub fn play(&self, (r0, f0, r1, f1): (i32, i32, i32, i32)) -> Grid {
        let mut g = self.clone();
        g.cells[r1 as usize][f1 as usize] = g.cells[r0 as usize][f0 as usize];
        g.cells[r0 as usize][f0 as usize] = b'.';
        g.red_to_move = !g.red_to_move;
        g
    }

    pub fn legal_moves(&self) -> Vec<(i32, i32, i32, i32)> {
        let mut out = Vec::new();
        for r0 in 0..10 {
            for f0 in 0..9 {
                let c = self.at(r0, f0);
                if c == b'.' || Grid::is_red(c) != self.red_to_move {
                    continue;
                }
                for r1 in 0..10 {
                    for f1 in 0..9 {
                        if self.reaches(r0, f0, r1, f1) {
                            let mv = (r0, f0, r1, f1);
                            if !self.play(mv).king_in_danger(self.red_to_move) {
                                out.push(mv);
                            }
                        }
                    }
                }
            }
        }
        out
    }

    pub fn perft(&self, depth: u32) -> u64 {
        if depth == 0 {
            return 1;
        }
        let moves = self.legal_moves();
        if depth == 1 {
            return moves.len() as u64;
        }
        moves.into_iter().map(|m| self.play(m).perft(depth - 1)).sum()
    }
}

pub fn coord((r0, f0, r1, f1): (i32, i32, i32, i32)) -> String {
    format!("{}{}{}{}", (b'a' + f0 as u8) as char, r0, (b'a' + f1 as u8) as char, r1)
}

/// Legal moves of `pos` per the oracle, as sorted coordinate strings.
pub fn oracle_moves(pos: &Position) -> Vec<String> {
    let mut v: Vec<String> = Grid::from_fen(&pos.to_fen()).legal_moves().into_iter().map(coord).collect();
    v.sort();
    v
}

pub fn library_moves(pos: &Position) -> Vec<String> {
    let mut v: Vec<String> = pos.legal_moves().iter().map(|m| m.to_coord()).collect();
    v.sort();
    v
}

/// Position after `plies` uniformly random legal moves from the start,
/// stopping early if the game ends.
pub fn random_position(seed: u64, plies: usize) -> Position {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pos = Position::startpos();
    for _ in 0..plies {
        let moves = pos.legal_moves();
        let Some(&mv) = moves.choose(&mut rng) else {
            break;
        };
        pos.do_move(mv);
    }
    pos.clear_history();
    pos
}

fn pst(pos: &Position) -> Centipawns {
    PstTables::default_tables().evaluate(pos)
}

/// Capture search with no pruning at all: stand-pat or the best capture,
/// every evasion when in check, static value at the ply cap. Gives up
/// (returns `None`) once `budget` nodes are spent.
pub fn windowless_quiescence(pos: &mut Position, ply: u32, qply: u32, cap: u32, budget: &mut u64) -> Option<Centipawns> {
    *budget = budget.checked_sub(1)?;
    let us = pos.side_to_move();
    if pos.in_check(us) {
        let moves = pos.legal_moves();
        if moves.is_empty() {
            return Some(-(MATE_SCORE - ply as Centipawns));
        }
        if qply >= cap {
            return Some(pst(pos));
        }
        let mut best = -INF;
        for mv in moves {
            let t = pos.do_move(mv);
            let v = windowless_quiescence(pos, ply + 1, qply + 1, cap, budget);
            pos.undo_move(t);
            best = best.max(-v?);
        }
        return Some(best);
    }
    let mut best = pst(pos);
    if qply >= cap {
        return Some(best);
    }
    for mv in pos.legal_captures() {
        let t = pos.do_move(mv);
        let v = windowless_quiescence(pos, ply + 1, qply + 1, cap, budget);
        pos.undo_move(t);
        best = best.max(-v?);
    }
    Some(best)
}

/// Leaf rule for [`windowless_minimax`]: the library's full-window
/// quiescence, remembered per board and side to move.
pub struct Leaf {
    searcher: Searcher<PstEvaluator>,
    seen: HashMap<([Option<Piece>; 90], Color), Centipawns>,
}

impl Leaf {
    pub fn value(&mut self, pos: &mut Position) -> Centipawns {
        let key = (*pos.board(), pos.side_to_move());
        if let Some(&v) = self.seen.get(&key) {
            return v;
        }
        let v = self.searcher.quiescence(pos, -INF, INF);
        self.seen.insert(key, v);
        v
    }
}

/// Full-width minimax to `depth`, then the leaf rule, with mate distances
/// re-based to the root.
pub fn windowless_minimax(pos: &mut Position, depth: u32, ply: u32, leaf: &mut Leaf) -> Centipawns {
    if depth == 0 {
        let v = leaf.value(pos);
        return if is_mate_score(v) { v - v.signum() * ply as Centipawns } else { v };
    }
    let moves = pos.legal_moves();
    if moves.is_empty() {
        return -(MATE_SCORE - ply as Centipawns);
    }
    let mut best = -INF;
    for mv in moves {
        let t = pos.do_move(mv);
        best = best.max(-windowless_minimax(pos, depth - 1, ply + 1, leaf));
        pos.undo_move(t);
    }
    best
}

pub fn leaf_searcher() -> Leaf {
    Leaf {
        searcher: Searcher::new(PstEvaluator::default(), SearchLimits::default()),
        seen: HashMap::new(),
    }
}

/// One-hot input vector of one perspective, read straight off the FEN:
/// own pieces in planes 0..7 (K A B N R C P), the opponent's in 7..14,
/// Black looking at a rank-flipped board.
pub fn dense_input(fen: &str, red_view: bool, input_dim: usize) -> Vec<f64> {
    let mut x = vec![0.0; input_dim];
    let rows = fen.split_whitespace().next().unwrap();
    for (i, row) in rows.split('/').enumerate() {
        let rank = 9 - i;
        let mut file = 0;
        for c in row.chars() {
            if let Some(d) = c.to_digit(10) {
                file += d as usize;
                continue;
            }
            let kind = "KABNRCP".find(c.to_ascii_uppercase()).unwrap();
            let red_piece = c.is_ascii_uppercase();
            let plane = kind + if red_piece == red_view { 0 } else { 7 };
            let r = if red_view { rank } else { 9 - rank };
            x[plane * 90 + r * 9 + file] = 1.0;
            file += 1;
        }
    }
    x
}

/// Dense matrix-vector evaluation of the network in f64.
pub fn dense_forward(net: &Network<f32>, pos: &Position) -> f64 {
    let fen = pos.to_fen();
    let red_to_move = pos.side_to_move() == Color::Red;
    let hidden = |x: &[f64]| -> Vec<f64> {
        (0..HIDDEN)
            .map(|j| {
                let mut s = net.feature_bias[j] as f64;
                for (i, &xi) in x.iter().enumerate() {
                    s += xi * net.feature_weights[i * HIDDEN + j] as f64;
                }
                s.clamp(0.0, 1.0)
            })
            .collect()
    };
    let stm = hidden(&dense_input(&fen, red_to_move, net.input_dim));
    let other = hidden(&dense_input(&fen, !red_to_move, net.input_dim));
    let mut z = net.output_bias as f64;
    for j in 0..HIDDEN {
        z += stm[j] * net.output_weights[j] as f64 + other[j] * net.output_weights[HIDDEN + j] as f64;
    }
    1.0 / (1.0 + (-z).exp())
}

/// Network with weights large enough that hidden units land on both sides
/// of the clipping range.
pub fn random_network<T: num_traits::Float>(seed: u64) -> Network<T> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut net = Network::<T>::zeros(STANDARD_INPUT_DIM);
    let mut fill = |v: &mut [T], a: f64| {
        for w in v {
            *w = T::from(rng.gen_range(-a..a)).unwrap();
        }
    };
    fill(&mut net.feature_weights, 0.15);
    fill(&mut net.feature_bias, 0.6);
    fill(&mut net.output_weights, 0.5);
    net.output_bias = T::from(0.1).unwrap();
    net
}

/// Largest |library - dense| output difference over `positions` random positions.
pub fn forward_oracle_gap(positions: usize, seed: u64) -> f64 {
    let net = random_network::<f32>(seed);
    let mut worst: f64 = 0.0;
    for i in 0..positions {
        let pos = random_position(seed ^ i as u64, i % 90);
        let [red, black] = encode_features(&pos);
        let lib = net.forward(&red, &black, pos.side_to_move()) as f64;
        worst = worst.max((lib - dense_forward(&net, &pos)).abs());
    }
    worst
}

/// Largest relative error between the analytic gradient and central
/// differences, in f64, over every output parameter, every first-layer bias
/// and the first-layer weights of active features.
pub fn gradient_check(seed: u64) -> f64 {
    let mut net = random_network::<f64>(seed);
    let samples: Vec<TrainSample> = (0..12)
        .map(|i| {
            let pos = random_position(seed.wrapping_add(i), 10 + 7 * i as usize);
            TrainSample::new(&pos, (i as i32 - 6) * 90, 400.0)
        })
        .collect();
    let batch: Vec<&TrainSample> = samples.iter().collect();
    let (_, grad) = batch_gradient(&net, &batch);

    let h = 1e-6;
    let mut worst: f64 = 0.0;
    let mut check = |net: &mut Network<f64>, get: &dyn Fn(&mut Network<f64>) -> &mut f64, analytic: f64| {
        let orig = *get(net);
        *get(net) = orig + h;
        let up = batch_loss(net, &batch);
        *get(net) = orig - h;
        let down = batch_loss(net, &batch);
        *get(net) = orig;
        let numeric = (up - down) / (2.0 * h);
        let scale = analytic.abs().max(numeric.abs());
        if scale > 1e-7 {
            worst = worst.max((analytic - numeric).abs() / scale);
        }
    };
    check(&mut net, &|n| &mut n.output_bias, grad.output_bias);
    for j in 0..2 * HIDDEN {
        check(&mut net, &|n| &mut n.output_weights[j], grad.output_weights[j]);
    }
    for j in 0..HIDDEN {
        check(&mut net, &|n| &mut n.feature_bias[j], grad.feature_bias[j]);
    }
    let mut active: Vec<u16> = samples.iter().flat_map(|s| s.stm.iter().chain(&s.other).copied()).collect();
    active.sort_unstable();
    active.dedup();
    for &f in active.iter().step_by(3) {
        for j in (0..HIDDEN).step_by(5) {
            let k = f as usize * HIDDEN + j;
            check(&mut net, &|n| &mut n.feature_weights[k], grad.feature_weights[k]);
        }
    }
    worst
}

/// Plays `plies` random moves (restarting finished games, taking moves back
/// now and then) through an [`NnueEvaluator`] and returns the largest
/// accumulator difference to a full refresh.
pub fn incremental_drift(plies: usize, seed: u64) -> f32 {
    let model = Arc::new(random_network::<f32>(seed));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut eval = NnueEvaluator::new(model.clone());
    let mut pos = Position::startpos();
    eval.reset(&pos);
    let mut undo = Vec::new();
    let mut worst: f32 = 0.0;
    let mut made = 0;
    while made < plies {
        let moves = pos.legal_moves();
        if moves.is_empty() || undo.len() >= 150 {
            pos = Position::startpos();
            eval.reset(&pos);
            undo.clear();
            continue;
        }
        if !undo.is_empty() && rng.gen_bool(0.2) {
            pos.undo_move(undo.pop().unwrap());
            eval.pop();
        } else {
            let mv = *moves.choose(&mut rng).unwrap();
            eval.push(&pos, mv);
            undo.push(pos.do_move(mv));
            made += 1;
        }
        worst = worst.max(eval.current().max_diff(&Accumulator::refresh(&model, &pos)));
    }
    worst
}
