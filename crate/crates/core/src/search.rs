//! Fail-soft alpha-beta negamax with a capture-only quiescence extension.
//!
//! Move ordering (MVV-LVA, best moves from shallower iterations, killers,
//! history) only decides which subtrees get cut, and the transposition table
//! reuses a node's result only at the same remaining depth, so every search
//! returns exactly the plain minimax value.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::board::{Centipawns, Move, PieceKind, Position, MATE_SCORE};
use crate::eval::Evaluator;

/// Strictly outside every reachable score.
pub const INFINITY: Centipawns = MATE_SCORE + 1;

pub const MAX_DEPTH: u32 = 64;
pub const MAX_QSEARCH_PLIES: u32 = 32;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SearchLimits {
    pub depth: u32,
    #[serde(default)]
    pub node_cap: Option<u64>,
    #[serde(default = "default_qsearch_cap")]
    pub qsearch_ply_cap: u32,
}

fn default_qsearch_cap() -> u32 {
    16
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum LimitsError {
    #[error("depth {0} exceeds {MAX_DEPTH}")]
    Depth(u32),
    #[error("quiescence cap {0} exceeds {MAX_QSEARCH_PLIES}")]
    QsearchCap(u32),
}

impl SearchLimits {
    pub fn depth(depth: u32) -> SearchLimits {
        SearchLimits {
            depth,
            node_cap: None,
            qsearch_ply_cap: default_qsearch_cap(),
        }
    }

    pub fn validate(&self) -> Result<(), LimitsError> {
        if self.depth > MAX_DEPTH {
            return Err(LimitsError::Depth(self.depth));
        }
        if self.qsearch_ply_cap > MAX_QSEARCH_PLIES {
            return Err(LimitsError::QsearchCap(self.qsearch_ply_cap));
        }
        Ok(())
    }
}

impl Default for SearchLimits {
    fn default() -> SearchLimits {
        SearchLimits::depth(4)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SearchResult {
    /// Side-to-move relative.
    pub score: Centipawns,
    pub best_move: Option<Move>,
    pub nodes: u64,
}

/// Score for the side to move when it has no legal move `ply` plies below the root.
/// Stalemate loses in Xiangqi, so this covers both mate and stalemate.
#[inline]
pub fn mated_in(ply: u32) -> Centipawns {
    -(MATE_SCORE - ply as Centipawns)
}

pub fn is_mate_score(score: Centipawns) -> bool {
    score.abs() >= MATE_SCORE - MAX_DEPTH as Centipawns - MAX_QSEARCH_PLIES as Centipawns
}

fn victim_rank(kind: PieceKind) -> i32 {
    match kind {
        PieceKind::Pawn => 1,
        PieceKind::Advisor | PieceKind::Elephant => 2,
        PieceKind::Horse | PieceKind::Cannon => 4,
        PieceKind::Rook => 9,
        PieceKind::King => 20,
    }
}

/// Most valuable victim first, least valuable attacker as tie-break; quiet
/// moves keep generation order after all captures.
pub fn order_moves(pos: &Position, moves: &mut [Move]) {
    moves.sort_by_key(|m| order_key(pos, m));
}

fn order_key(pos: &Position, m: &Move) -> i32 {
    match m.captured {
        Some(victim) => {
            let attacker = pos.piece_at(m.from).map_or(0, |p| victim_rank(p.kind));
            attacker - victim_rank(victim.kind) * 32
        }
        None => 0,
    }
}

const TABLE_SIZE: usize = 1 << 18;
const MAX_PLY: usize = (MAX_DEPTH + 1) as usize;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Bound {
    Exact,
    Lower,
    Upper,
}

#[derive(Clone, Copy, Debug)]
struct Entry {
    key: u64,
    generation: u32,
    value: Centipawns,
    depth: u32,
    bound: Bound,
    mv: Option<Move>,
}

/// Results of earlier full-width nodes, reused only at the same remaining
/// depth. A node's value depends on its position and depth alone (mate
/// distances are stored relative to the node), so reuse never changes a
/// result.
struct Table {
    slots: Vec<Option<Entry>>,
    generation: u32,
}

impl Table {
    fn new() -> Table {
        Table {
            slots: vec![None; TABLE_SIZE],
            generation: 0,
        }
    }

    fn clear(&mut self) {
        self.generation = self.generation.wrapping_add(1);
    }

    fn probe(&self, hash: u64) -> Option<Entry> {
        self.slots[hash as usize & (TABLE_SIZE - 1)].filter(|e| e.key == hash && e.generation == self.generation)
    }

    fn store(&mut self, hash: u64, depth: u32, value: Centipawns, bound: Bound, mv: Option<Move>, ply: u32) {
        self.slots[hash as usize & (TABLE_SIZE - 1)] = Some(Entry {
            key: hash,
            generation: self.generation,
            value: to_node_relative(value, ply),
            depth,
            bound,
            mv,
        });
    }
}

fn to_node_relative(v: Centipawns, ply: u32) -> Centipawns {
    if is_mate_score(v) {
        v + v.signum() * ply as Centipawns
    } else {
        v
    }
}

fn from_node_relative(v: Centipawns, ply: u32) -> Centipawns {
    if is_mate_score(v) {
        v - v.signum() * ply as Centipawns
    } else {
        v
    }
}

/// Killer and history heuristics, reset per call.
struct Ordering {
    killers: [[Option<Move>; 2]; MAX_PLY],
    history: Vec<i32>,
}

impl Ordering {
    fn new() -> Ordering {
        Ordering {
            killers: [[None; 2]; MAX_PLY],
            history: vec![0; 90 * 90],
        }
    }

    fn clear(&mut self) {
        self.killers = [[None; 2]; MAX_PLY];
        self.history.fill(0);
    }

    fn cutoff(&mut self, mv: Move, ply: usize, depth: u32) {
        if mv.captured.is_some() {
            return;
        }
        let k = &mut self.killers[ply];
        if k[0] != Some(mv) {
            k[1] = k[0];
            k[0] = Some(mv);
        }
        let h = &mut self.history[mv.from.index() * 90 + mv.to.index()];
        *h = (*h + (depth * depth) as i32).min(900_000);
    }

    /// Sort keys, lower first.
    fn keys(&self, pos: &Position, moves: &[Move], ply: usize, remembered: Option<Move>) -> Vec<i32> {
        let killers = self.killers[ply];
        moves
            .iter()
            .map(|m| {
                if Some(*m) == remembered {
                    -3_000_000
                } else if m.captured.is_some() {
                    -2_000_000 + order_key(pos, m)
                } else if Some(*m) == killers[0] {
                    -1_000_001
                } else if Some(*m) == killers[1] {
                    -1_000_000
                } else {
                    -self.history[m.from.index() * 90 + m.to.index()]
                }
            })
            .collect()
    }
}

/// Moves the lowest-keyed remaining move to slot `i`. Picking lazily is
/// cheaper than sorting when a cutoff comes early.
#[inline]
fn pick(moves: &mut [Move], keys: &mut [i32], i: usize) {
    let mut best = i;
    for j in i + 1..moves.len() {
        if keys[j] < keys[best] {
            best = j;
        }
    }
    moves.swap(i, best);
    keys.swap(i, best);
}

pub struct Searcher<E> {
    eval: E,
    limits: SearchLimits,
    nodes: u64,
    aborted: bool,
    ordering: Ordering,
    table: Table,
}

impl<E: Evaluator> Searcher<E> {
    pub fn new(eval: E, limits: SearchLimits) -> Searcher<E> {
        Searcher {
            eval,
            limits,
            nodes: 0,
            aborted: false,
            ordering: Ordering::new(),
            table: Table::new(),
        }
    }

    pub fn nodes(&self) -> u64 {
        self.nodes
    }

    pub fn evaluator_mut(&mut self) -> &mut E {
        &mut self.eval
    }

    pub fn limits(&self) -> SearchLimits {
        self.limits
    }

    pub fn set_limits(&mut self, limits: SearchLimits) {
        self.limits = limits;
    }

    fn begin(&mut self, pos: &Position) {
        self.nodes = 0;
        self.aborted = false;
        self.eval.reset(pos);
    }

    /// Starts a full-width search. The table survives between calls unless a
    /// node cap is set, where reuse would make aborts depend on history.
    fn begin_search(&mut self, pos: &Position) {
        self.begin(pos);
        self.ordering.clear();
        if self.limits.node_cap.is_some() {
            self.table.clear();
        }
    }

    /// Forgets every stored result.
    pub fn clear_table(&mut self) {
        self.table.clear();
    }

    pub fn static_eval(&mut self, pos: &Position) -> Centipawns {
        self.eval.reset(pos);
        self.eval.evaluate(pos)
    }

    /// Quiescence value of `pos` (the position is restored before returning).
    pub fn quiescence(&mut self, pos: &mut Position, alpha: Centipawns, beta: Centipawns) -> Centipawns {
        debug_assert!(alpha < beta);
        self.begin(pos);
        self.qsearch(pos, alpha, beta, 0, 0)
    }

    /// Depth-limited negamax value of `pos`; depth 0 is the quiescence value.
    pub fn negamax(&mut self, pos: &mut Position, depth: u32, alpha: Centipawns, beta: Centipawns) -> Centipawns {
        debug_assert!(alpha < beta);
        self.begin_search(pos);
        for d in 1..depth {
            self.search(pos, d, -INFINITY, INFINITY, 0);
            if self.aborted {
                return 0;
            }
        }
        self.search(pos, depth, alpha, beta, 0)
    }

    #[inline]
    fn make(&mut self, pos: &mut Position, mv: Move) -> crate::board::UndoToken {
        self.eval.push(pos, mv);
        pos.do_move(mv)
    }

    #[inline]
    fn unmake(&mut self, pos: &mut Position, token: crate::board::UndoToken) {
        pos.undo_move(token);
        self.eval.pop();
    }

    fn out_of_nodes(&mut self) -> bool {
        if let Some(cap) = self.limits.node_cap {
            if self.nodes >= cap {
                self.aborted = true;
            }
        }
        self.aborted
    }

    fn search(&mut self, pos: &mut Position, depth: u32, mut alpha: Centipawns, beta: Centipawns, ply: u32) -> Centipawns {
        if depth == 0 {
            return self.qsearch(pos, alpha, beta, ply, 0);
        }
        self.nodes += 1;
        if self.out_of_nodes() {
            return 0;
        }
        let hash = pos.hash();
        let stored = self.table.probe(hash);
        if let Some(e) = stored.filter(|e| e.depth == depth) {
            let v = from_node_relative(e.value, ply);
            match e.bound {
                Bound::Exact => return v,
                Bound::Lower if v >= beta => return v,
                Bound::Upper if v <= alpha => return v,
                _ => {}
            }
        }
        let mut moves = pos.legal_moves();
        if moves.is_empty() {
            return mated_in(ply);
        }
        let remembered = stored.and_then(|e| e.mv);
        let mut keys = self.ordering.keys(pos, &moves, ply as usize, remembered);

        let alpha_in = alpha;
        let mut best = -INFINITY;
        let mut best_move = None;
        for i in 0..moves.len() {
            pick(&mut moves, &mut keys, i);
            let mv = moves[i];
            let token = self.make(pos, mv);
            // Later moves are first tried with a null window and searched
            // again only when they might improve alpha.
            let mut score = if i == 0 {
                -INFINITY
            } else {
                -self.search(pos, depth - 1, -alpha - 1, -alpha, ply + 1)
            };
            if i == 0 || (score > alpha && score < beta && !self.aborted) {
                score = -self.search(pos, depth - 1, -beta, -alpha, ply + 1);
            }
            self.unmake(pos, token);
            if self.aborted {
                return 0;
            }
            if score > best {
                best = score;
                if score > alpha {
                    alpha = score;
                    best_move = Some(mv);
                    if score >= beta {
                        self.ordering.cutoff(mv, ply as usize, depth);
                        break;
                    }
                }
            }
        }
        let bound = if best >= beta {
            Bound::Lower
        } else if best > alpha_in {
            Bound::Exact
        } else {
            Bound::Upper
        };
        self.table.store(hash, depth, best, bound, best_move.or(remembered), ply);
        best
    }

    fn qsearch(&mut self, pos: &mut Position, mut alpha: Centipawns, beta: Centipawns, ply: u32, qply: u32) -> Centipawns {
        self.nodes += 1;
        if self.out_of_nodes() {
            return 0;
        }
        let in_check = pos.in_check(pos.side_to_move());
        let mut best;
        let mut moves;
        if in_check {
            moves = pos.legal_moves();
            if moves.is_empty() {
                return mated_in(ply);
            }
            if qply >= self.limits.qsearch_ply_cap {
                return self.eval.evaluate(pos);
            }
            best = -INFINITY;
        } else {
            best = self.eval.evaluate(pos);
            if qply >= self.limits.qsearch_ply_cap || best >= beta {
                return best;
            }
            alpha = alpha.max(best);
            moves = pos.legal_captures_not_in_check();
        }
        order_moves(pos, &mut moves);

        for mv in moves {
            let token = self.make(pos, mv);
            let score = -self.qsearch(pos, -beta, -alpha, ply + 1, qply + 1);
            self.unmake(pos, token);
            if self.aborted {
                return 0;
            }
            if score > best {
                best = score;
                if score > alpha {
                    alpha = score;
                    if score >= beta {
                        break;
                    }
                }
            }
        }
        best
    }

    /// The `n` best root moves with exact scores, best first; equal scores
    /// are ordered by generation index.
    pub fn top_moves(&mut self, pos: &mut Position, n: usize) -> Vec<(Move, Centipawns)> {
        assert!(n >= 1);
        self.begin_search(pos);
        let depth = self.limits.depth.max(1);
        for d in 1..depth {
            self.search(pos, d, -INFINITY, INFINITY, 0);
            if self.aborted {
                break;
            }
        }
        let generated = pos.legal_moves();
        let mut order: Vec<usize> = (0..generated.len()).collect();
        let remembered = self.table.probe(pos.hash()).and_then(|e| e.mv);
        order.sort_by_key(|&i| (Some(generated[i]) != remembered, order_key(pos, &generated[i])));

        // (score, generation index)
        let mut top: Vec<(Centipawns, usize)> = Vec::with_capacity(n + 1);
        for i in order {
            let mv = generated[i];
            // Anything scoring at least the current n-th best must come back exact.
            let alpha = if top.len() == n { top[n - 1].0 - 1 } else { -INFINITY };
            let token = self.make(pos, mv);
            let score = -self.search(pos, depth - 1, -INFINITY, -alpha, 1);
            self.unmake(pos, token);
            if self.aborted {
                break;
            }
            if score > alpha {
                top.push((score, i));
                top.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
                top.truncate(n);
            }
        }
        if top.is_empty() && !generated.is_empty() {
            // Node cap hit before the first move finished.
            top.push((0, 0));
        }
        top.into_iter().map(|(s, i)| (generated[i], s)).collect()
    }

    /// Root driver: the move maximizing the negamax value, lowest generation
    /// index on ties.
    pub fn best_move(&mut self, pos: &mut Position) -> SearchResult {
        if !pos.has_legal_move() {
            self.nodes = 1;
            return SearchResult {
                score: mated_in(0),
                best_move: None,
                nodes: 1,
            };
        }
        let top = self.top_moves(pos, 1);
        let (mv, score) = top[0];
        SearchResult {
            score,
            best_move: Some(mv),
            nodes: self.nodes,
        }
    }
}

pub fn quiescence<E: Evaluator>(pos: &mut Position, alpha: Centipawns, beta: Centipawns, eval: E) -> Centipawns {
    Searcher::new(eval, SearchLimits::default()).quiescence(pos, alpha, beta)
}

pub fn negamax<E: Evaluator>(pos: &mut Position, depth: u32, alpha: Centipawns, beta: Centipawns, eval: E) -> Centipawns {
    Searcher::new(eval, SearchLimits::depth(depth)).negamax(pos, depth, alpha, beta)
}

pub fn best_move<E: Evaluator>(pos: &mut Position, limits: SearchLimits, eval: E) -> SearchResult {
    Searcher::new(eval, limits).best_move(pos)
}
