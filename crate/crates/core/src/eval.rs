//! Evaluation sources pluggable into the search.

use std::sync::Arc;

use crate::board::{Centipawns, Color, Move, Position, PstTables};
use crate::nnue::{nnue_evaluate, Accumulator, FeatureDelta, NnueModel, DEFAULT_WDL_SCALE};

/// Static evaluation with optional incremental state. The searcher calls
/// `push` right before a move is made on `pos` and `pop` right after it is
/// taken back.
pub trait Evaluator {
    fn reset(&mut self, _pos: &Position) {}
    fn push(&mut self, _pos: &Position, _mv: Move) {}
    fn pop(&mut self) {}
    /// Centipawns for the side to move.
    fn evaluate(&mut self, pos: &Position) -> Centipawns;
}

impl<E: Evaluator + ?Sized> Evaluator for &mut E {
    fn reset(&mut self, pos: &Position) {
        (**self).reset(pos)
    }
    fn push(&mut self, pos: &Position, mv: Move) {
        (**self).push(pos, mv)
    }
    fn pop(&mut self) {
        (**self).pop()
    }
    fn evaluate(&mut self, pos: &Position) -> Centipawns {
        (**self).evaluate(pos)
    }
}

/// Piece-square evaluation kept incrementally as a Red-minus-Black sum.
#[derive(Clone, Debug)]
pub struct PstEvaluator {
    tables: Arc<PstTables>,
    stack: Vec<Centipawns>,
}

impl PstEvaluator {
    pub fn new(tables: Arc<PstTables>) -> PstEvaluator {
        PstEvaluator {
            tables,
            stack: Vec::new(),
        }
    }

    fn red_score(&self, pos: &Position) -> Centipawns {
        let red = self.tables.evaluate(pos);
        match pos.side_to_move() {
            Color::Red => red,
            Color::Black => -red,
        }
    }
}

impl Default for PstEvaluator {
    fn default() -> PstEvaluator {
        PstEvaluator::new(Arc::new(PstTables::default_tables().clone()))
    }
}

impl Evaluator for PstEvaluator {
    fn reset(&mut self, pos: &Position) {
        self.stack.clear();
        self.stack.push(self.red_score(pos));
    }

    fn push(&mut self, pos: &Position, mv: Move) {
        let Some(&top) = self.stack.last() else {
            return;
        };
        let piece = pos.piece_at(mv.from).expect("move from an empty square");
        let sign = |c: Color| if c == Color::Red { 1 } else { -1 };
        let mut next = top + sign(piece.color)
            * (self.tables.value(piece.color, piece.kind, mv.to) - self.tables.value(piece.color, piece.kind, mv.from));
        if let Some(v) = mv.captured {
            next -= sign(v.color) * self.tables.value(v.color, v.kind, mv.to);
        }
        self.stack.push(next);
    }

    fn pop(&mut self) {
        self.stack.pop();
    }

    fn evaluate(&mut self, pos: &Position) -> Centipawns {
        let red = match self.stack.last() {
            Some(&v) => v,
            None => return self.tables.evaluate(pos),
        };
        debug_assert_eq!(red, self.red_score(pos));
        match pos.side_to_move() {
            Color::Red => red,
            Color::Black => -red,
        }
    }
}

/// NNUE evaluation over a stack of incrementally updated accumulators.
#[derive(Clone, Debug)]
pub struct NnueEvaluator {
    model: Arc<NnueModel>,
    stack: Vec<Accumulator>,
    top: usize,
    wdl_scale: f32,
}

impl NnueEvaluator {
    pub fn new(model: Arc<NnueModel>) -> NnueEvaluator {
        NnueEvaluator::with_scale(model, DEFAULT_WDL_SCALE)
    }

    pub fn with_scale(model: Arc<NnueModel>, wdl_scale: f32) -> NnueEvaluator {
        NnueEvaluator {
            model,
            stack: Vec::new(),
            top: 0,
            wdl_scale,
        }
    }

    pub fn model(&self) -> &NnueModel {
        &self.model
    }

    /// Accumulator for the current node.
    pub fn current(&self) -> &Accumulator {
        &self.stack[self.top]
    }
}

impl Evaluator for NnueEvaluator {
    fn reset(&mut self, pos: &Position) {
        let acc = Accumulator::refresh(&self.model, pos);
        if self.stack.is_empty() {
            self.stack.push(acc);
        } else {
            self.stack[0] = acc;
        }
        self.top = 0;
    }

    fn push(&mut self, pos: &Position, mv: Move) {
        let delta = FeatureDelta::for_move(pos, mv);
        if self.stack.len() == self.top + 1 {
            self.stack.push(self.stack[self.top].clone());
        } else {
            let (lo, hi) = self.stack.split_at_mut(self.top + 1);
            hi[0].values = lo[self.top].values;
        }
        self.top += 1;
        self.stack[self.top].apply_delta(&self.model, &delta);
    }

    fn pop(&mut self) {
        self.top -= 1;
    }

    fn evaluate(&mut self, pos: &Position) -> Centipawns {
        if self.stack.is_empty() {
            self.reset(pos);
        }
        nnue_evaluate(&self.model, &self.stack[self.top], pos.side_to_move(), self.wdl_scale)
    }
}

/// Either evaluation, statically dispatched.
#[derive(Clone, Debug)]
pub enum AnyEvaluator {
    Pst(PstEvaluator),
    Nnue(NnueEvaluator),
}

impl Evaluator for AnyEvaluator {
    fn reset(&mut self, pos: &Position) {
        match self {
            AnyEvaluator::Pst(e) => e.reset(pos),
            AnyEvaluator::Nnue(e) => e.reset(pos),
        }
    }
    fn push(&mut self, pos: &Position, mv: Move) {
        match self {
            AnyEvaluator::Pst(e) => e.push(pos, mv),
            AnyEvaluator::Nnue(e) => e.push(pos, mv),
        }
    }
    fn pop(&mut self) {
        match self {
            AnyEvaluator::Pst(e) => e.pop(),
            AnyEvaluator::Nnue(e) => e.pop(),
        }
    }
    fn evaluate(&mut self, pos: &Position) -> Centipawns {
        match self {
            AnyEvaluator::Pst(e) => e.evaluate(pos),
            AnyEvaluator::Nnue(e) => e.evaluate(pos),
        }
    }
}

/// Shareable description of an evaluation, cheap to turn into a fresh evaluator per worker.
#[derive(Clone, Debug)]
pub enum EvalSource {
    Pst(Arc<PstTables>),
    Nnue { model: Arc<NnueModel>, wdl_scale: f32 },
}

impl EvalSource {
    pub fn default_pst() -> EvalSource {
        EvalSource::Pst(Arc::new(PstTables::default_tables().clone()))
    }

    pub fn evaluator(&self) -> AnyEvaluator {
        match self {
            EvalSource::Pst(t) => AnyEvaluator::Pst(PstEvaluator::new(t.clone())),
            EvalSource::Nnue { model, wdl_scale } => {
                AnyEvaluator::Nnue(NnueEvaluator::with_scale(model.clone(), *wdl_scale))
            }
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            EvalSource::Pst(_) => "pst",
            EvalSource::Nnue { .. } => "nnue",
        }
    }
}
