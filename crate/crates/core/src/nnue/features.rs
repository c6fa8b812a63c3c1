use crate::board::{Color, Move, Piece, Position, Square, NUM_SQUARES};

/// Planes per perspective: own King..Pawn, then opponent King..Pawn.
pub const PLANES: usize = 14;

/// Width of the standard encoder.
pub const STANDARD_INPUT_DIM: usize = PLANES * NUM_SQUARES;

/// Perspective feature layout. Each perspective sees the board with its own
/// side at the bottom (Black's view is rank-flipped). Any `input_dim` at
/// least [`STANDARD_INPUT_DIM`] is accepted; inputs past the standard planes
/// are never active.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FeatureSet {
    pub input_dim: usize,
}

impl Default for FeatureSet {
    fn default() -> FeatureSet {
        FeatureSet {
            input_dim: STANDARD_INPUT_DIM,
        }
    }
}

impl FeatureSet {
    pub fn new(input_dim: usize) -> Option<FeatureSet> {
        (STANDARD_INPUT_DIM..=u16::MAX as usize)
            .contains(&input_dim)
            .then_some(FeatureSet { input_dim })
    }
}

#[inline]
pub fn feature_index(perspective: Color, piece: Piece, sq: Square) -> usize {
    let plane = piece.kind.index() + if piece.color == perspective { 0 } else { 7 };
    let sq = match perspective {
        Color::Red => sq,
        Color::Black => sq.mirror(),
    };
    plane * NUM_SQUARES + sq.index()
}

/// Active features per perspective as sorted lists, indexed `[Red, Black]`.
pub fn encode_features(pos: &Position) -> [Vec<u16>; 2] {
    encode_board(pos.board())
}

pub(crate) fn encode_board(board: &[Option<Piece>; NUM_SQUARES]) -> [Vec<u16>; 2] {
    let mut out = [Vec::with_capacity(32), Vec::with_capacity(32)];
    for sq in Square::all() {
        if let Some(p) = board[sq.index()] {
            for c in Color::ALL {
                out[c.index()].push(feature_index(c, p, sq) as u16);
            }
        }
    }
    out[0].sort_unstable();
    out[1].sort_unstable();
    out
}

/// Feature changes caused by one move, per perspective.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub struct FeatureDelta {
    removed: [[u16; 2]; 2],
    added: [u16; 2],
    n_removed: usize,
}

impl FeatureDelta {
    /// `pos` is the position before `mv` is played.
    pub fn for_move(pos: &Position, mv: Move) -> FeatureDelta {
        let piece = pos.piece_at(mv.from).expect("move from an occupied square");
        let mut d = FeatureDelta {
            n_removed: 1 + mv.captured.is_some() as usize,
            ..FeatureDelta::default()
        };
        for c in Color::ALL {
            let i = c.index();
            d.removed[i][0] = feature_index(c, piece, mv.from) as u16;
            if let Some(cap) = mv.captured {
                d.removed[i][1] = feature_index(c, cap, mv.to) as u16;
            }
            d.added[i] = feature_index(c, piece, mv.to) as u16;
        }
        d
    }

    pub fn removed(&self, perspective: Color) -> &[u16] {
        &self.removed[perspective.index()][..self.n_removed]
    }

    pub fn added(&self, perspective: Color) -> &[u16] {
        std::slice::from_ref(&self.added[perspective.index()])
    }
}
