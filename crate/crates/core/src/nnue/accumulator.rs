use super::features::{encode_features, FeatureDelta};
use super::model::{NnueModel, HIDDEN};
use crate::board::{Centipawns, Color, Position};

/// Pre-activation first-layer sums, one vector per perspective (`[Red, Black]`).
#[derive(Clone, Debug, PartialEq)]
pub struct Accumulator {
    pub values: [[f32; HIDDEN]; 2],
}

impl Accumulator {
    pub fn refresh(model: &NnueModel, pos: &Position) -> Accumulator {
        let [red, black] = encode_features(pos);
        Accumulator {
            values: [model.transform(&red), model.transform(&black)],
        }
    }

    /// Incremental update of one perspective.
    pub fn apply(&mut self, model: &NnueModel, perspective: Color, removed: &[u16], added: &[u16]) {
        let acc = &mut self.values[perspective.index()];
        for &f in removed {
            for (a, &w) in acc.iter_mut().zip(model.feature_row(f as usize)) {
                *a -= w;
            }
        }
        for &f in added {
            for (a, &w) in acc.iter_mut().zip(model.feature_row(f as usize)) {
                *a += w;
            }
        }
    }

    pub fn apply_delta(&mut self, model: &NnueModel, delta: &FeatureDelta) {
        for c in Color::ALL {
            self.apply(model, c, delta.removed(c), delta.added(c));
        }
    }

    /// Largest per-component difference to `other`.
    pub fn max_diff(&self, other: &Accumulator) -> f32 {
        self.values
            .iter()
            .flatten()
            .zip(other.values.iter().flatten())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f32::max)
    }

    pub fn logit(&self, model: &NnueModel, side_to_move: Color) -> f32 {
        let us = side_to_move.index();
        model.output_logit(&self.values[us], &self.values[1 - us])
    }
}

/// Centipawn view of the network: `wdl_scale * logit(output)`, side to move
/// relative, kept well clear of mate scores.
pub fn nnue_evaluate(model: &NnueModel, acc: &Accumulator, side_to_move: Color, wdl_scale: f32) -> Centipawns {
    // logit(logistic(z)) == z, so skip the round trip through (0, 1).
    let cp = (wdl_scale * acc.logit(model, side_to_move)).round();
    cp.clamp(-10_000.0, 10_000.0) as Centipawns
}
