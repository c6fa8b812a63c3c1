//! Precomputed square geometry.

use super::{FILES, NUM_SQUARES, RANKS};

pub(crate) const NONE: u8 = u8::MAX;

/// Orthogonal rays, nearest square first, `NONE`-terminated; direction order
/// +file, -file, +rank, -rank.
pub(crate) static RAYS: [[[u8; 10]; 4]; NUM_SQUARES] = build_rays();

/// Horse moves from a square: (target, leg).
pub(crate) static HORSE_MOVES: [[(u8, u8); 8]; NUM_SQUARES] = build_horse(false);

/// Horses attacking a square: (horse square, leg).
pub(crate) static HORSE_ATTACKERS: [[(u8, u8); 8]; NUM_SQUARES] = build_horse(true);

const DIRS: [(i32, i32); 4] = [(1, 0), (-1, 0), (0, 1), (0, -1)];
const JUMPS: [(i32, i32); 8] = [(1, 2), (-1, 2), (1, -2), (-1, -2), (2, 1), (2, -1), (-2, 1), (-2, -1)];

const fn on_board(f: i32, r: i32) -> bool {
    f >= 0 && f < FILES as i32 && r >= 0 && r < RANKS as i32
}

const fn build_rays() -> [[[u8; 10]; 4]; NUM_SQUARES] {
    let mut t = [[[NONE; 10]; 4]; NUM_SQUARES];
    let mut sq = 0;
    while sq < NUM_SQUARES {
        let mut d = 0;
        while d < 4 {
            let (df, dr) = DIRS[d];
            let (mut f, mut r) = ((sq % FILES) as i32 + df, (sq / FILES) as i32 + dr);
            let mut i = 0;
            while on_board(f, r) {
                t[sq][d][i] = (r * FILES as i32 + f) as u8;
                i += 1;
                f += df;
                r += dr;
            }
            d += 1;
        }
        sq += 1;
    }
    t
}

const fn build_horse(attackers: bool) -> [[(u8, u8); 8]; NUM_SQUARES] {
    let mut t = [[(NONE, NONE); 8]; NUM_SQUARES];
    let mut sq = 0;
    while sq < NUM_SQUARES {
        let (f0, r0) = ((sq % FILES) as i32, (sq / FILES) as i32);
        let mut n = 0;
        let mut j = 0;
        while j < 8 {
            let (df, dr) = JUMPS[j];
            let (f1, r1) = (f0 + df, r0 + dr);
            if on_board(f1, r1) {
                // The leg sits next to the horse, toward the long side of the jump.
                let (hf, hr) = if attackers { (f1, r1) } else { (f0, r0) };
                let (sf, sr) = if attackers { (-df, -dr) } else { (df, dr) };
                let (lf, lr) = if sr == 2 || sr == -2 { (hf, hr + sr / 2) } else { (hf + sf / 2, hr) };
                t[sq][n] = ((r1 * FILES as i32 + f1) as u8, (lr * FILES as i32 + lf) as u8);
                n += 1;
            }
            j += 1;
        }
        sq += 1;
    }
    t
}
