use super::{Color, Piece, Square, NUM_SQUARES};

const fn splitmix64(state: u64) -> (u64, u64) {
    let state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    (state, z ^ (z >> 31))
}

const fn build_keys() -> ([[u64; NUM_SQUARES]; 16], u64) {
    let mut keys = [[0u64; NUM_SQUARES]; 16];
    let mut state = 0x5851_F42D_4C95_7F2D;
    let mut code = 0;
    while code < 16 {
        let mut sq = 0;
        while sq < NUM_SQUARES {
            let (s, v) = splitmix64(state);
            state = s;
            keys[code][sq] = v;
            sq += 1;
        }
        code += 1;
    }
    let (_, side) = splitmix64(state);
    (keys, side)
}

const KEYS: ([[u64; NUM_SQUARES]; 16], u64) = build_keys();

#[inline]
pub(crate) fn piece_key(piece: Piece, sq: Square) -> u64 {
    KEYS.0[piece.code() as usize][sq.index()]
}

#[inline]
pub(crate) fn side_key() -> u64 {
    KEYS.1
}

pub(crate) fn side_term(side: Color) -> u64 {
    match side {
        Color::Red => 0,
        Color::Black => side_key(),
    }
}
