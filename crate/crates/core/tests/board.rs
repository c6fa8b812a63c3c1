mod common;

use common::{library_moves, oracle_moves, random_position, Grid};
use proptest::prelude::*;
use xqnnue::board::{perft, Position, PstTables, START_FEN};

#[test]
fn start_position_perft() {
    let mut pos = Position::startpos();
    let expected = [1, 44, 1_920, 79_666, 3_290_240];
    for (depth, &n) in expected.iter().enumerate() {
        assert_eq!(perft(&mut pos, depth as u32), n, "depth {depth}");
    }
}

#[test]
fn oracle_agrees_on_start_position() {
    let grid = Grid::from_fen(START_FEN);
    assert_eq!(grid.perft(1), 44);
    assert_eq!(grid.perft(2), 1_920);
    assert_eq!(grid.perft(3), 79_666);
}

#[test]
fn oracle_agrees_on_tricky_positions() {
    for fen in [
        // Facing kings with a single blocker that cannot leave the file.
        "4k4/9/9/9/9/4R4/9/9/9/4K4 b",
        // Cannon checks over a screen; evasions include moving the screen.
        "3k5/9/9/3c5/9/9/3N5/9/9/3K5 w",
        // Horse leg blocked by the king's own piece.
        "3k5/9/9/9/9/9/9/3n5/3N5/4K4 w",
        // Elephants at the river and pawns across it.
        "2bak4/9/4b4/4P4/2p6/9/9/4B4/9/2BAK4 w",
    ] {
        let pos = Position::from_fen(fen).unwrap_or_else(|e| panic!("{fen}: {e}"));
        assert_eq!(library_moves(&pos), oracle_moves(&pos), "{fen}");
        let mut p = pos.clone();
        assert_eq!(perft(&mut p, 3), Grid::from_fen(fen).perft(3), "{fen}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn move_lists_match_oracle(seed in any::<u64>(), plies in 0usize..120) {
        let pos = random_position(seed, plies);
        prop_assert_eq!(library_moves(&pos), oracle_moves(&pos));
    }

    #[test]
    fn do_undo_restores_everything(seed in any::<u64>(), plies in 0usize..80) {
        let mut pos = random_position(seed, plies);
        let before = pos.clone();
        for mv in pos.legal_moves() {
            let token = pos.do_move(mv);
            // Incremental hash equals a fresh one.
            let fresh = Position::from_fen(&pos.to_fen()).unwrap();
            prop_assert_eq!(pos.hash(), fresh.hash());
            prop_assert!(!pos.in_check(pos.side_to_move().opponent()));
            pos.undo_move(token);
            prop_assert_eq!(&pos, &before);
        }
    }

    #[test]
    fn fen_round_trip(seed in any::<u64>(), plies in 0usize..120) {
        let pos = random_position(seed, plies);
        let back = Position::from_fen(&pos.to_fen()).unwrap();
        prop_assert_eq!(back.to_fen(), pos.to_fen());
        prop_assert_eq!(back.board(), pos.board());
        prop_assert_eq!(back.hash(), pos.hash());
    }

    #[test]
    fn mirrored_colours_evaluate_alike(seed in any::<u64>(), plies in 0usize..120) {
        let pos = random_position(seed, plies);
        let flipped = pos.color_flip_mirror();
        let t = PstTables::default_tables();
        prop_assert_eq!(t.evaluate(&pos), t.evaluate(&flipped));
        prop_assert_eq!(library_moves(&pos).len(), library_moves(&flipped).len());
    }
}
