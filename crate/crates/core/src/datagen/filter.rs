use serde::{Deserialize, Serialize};

use crate::board::{Centipawns, Position};
use crate::eval::Evaluator;
use crate::search::{SearchLimits, Searcher, INFINITY};

/// Margins of the quiet-position test.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FilterMargins {
    /// Largest allowed |static - quiescence|.
    pub m1: Centipawns,
    /// Largest allowed |static - negamax|.
    pub m2: Centipawns,
    pub negamax_depth: u32,
}

impl Default for FilterMargins {
    fn default() -> FilterMargins {
        FilterMargins {
            m1: 60,
            m2: 70,
            negamax_depth: 4,
        }
    }
}

impl FilterMargins {
    pub fn validate(&self) -> Result<(), String> {
        if self.m1 < 0 || self.m2 < 0 {
            return Err("margins must not be negative".into());
        }
        if self.negamax_depth < 1 || self.negamax_depth > crate::search::MAX_DEPTH {
            return Err(format!("negamax depth {} out of range", self.negamax_depth));
        }
        Ok(())
    }
}

/// Outcome of the quiet test, with the values computed on the way.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    InCheck,
    QuiescenceGap {
        static_eval: Centipawns,
        quiescence: Centipawns,
    },
    NegamaxGap {
        static_eval: Centipawns,
        quiescence: Centipawns,
        negamax: Centipawns,
    },
    Quiet {
        static_eval: Centipawns,
        quiescence: Centipawns,
        negamax: Centipawns,
    },
}

impl Verdict {
    pub fn is_quiet(&self) -> bool {
        matches!(self, Verdict::Quiet { .. })
    }
}

/// Runs the quiet test on `pos` (restored afterwards). Not quiet when the side
/// to move is in check, when quiescence moves more than `m1` away from the
/// static evaluation, or when the depth-limited negamax moves more than `m2`.
pub fn classify<E: Evaluator>(pos: &mut Position, margins: &FilterMargins, searcher: &mut Searcher<E>) -> Verdict {
    if pos.in_check(pos.side_to_move()) {
        return Verdict::InCheck;
    }
    let static_eval = searcher.static_eval(pos);
    let quiescence = searcher.quiescence(pos, -INFINITY, INFINITY);
    if (static_eval - quiescence).abs() > margins.m1 {
        return Verdict::QuiescenceGap {
            static_eval,
            quiescence,
        };
    }
    let negamax = searcher.negamax(pos, margins.negamax_depth, -INFINITY, INFINITY);
    if (static_eval - negamax).abs() > margins.m2 {
        return Verdict::NegamaxGap {
            static_eval,
            quiescence,
            negamax,
        };
    }
    Verdict::Quiet {
        static_eval,
        quiescence,
        negamax,
    }
}

pub fn is_quiet_position<E: Evaluator>(pos: &mut Position, margins: &FilterMargins, eval: E) -> bool {
    let mut searcher = Searcher::new(eval, SearchLimits::depth(margins.negamax_depth));
    classify(pos, margins, &mut searcher).is_quiet()
}
