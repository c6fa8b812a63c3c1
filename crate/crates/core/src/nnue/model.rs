use std::io::{self, Read, Write};
use std::path::Path;

use num_traits::Float;
use rand::Rng;
use thiserror::Error;

use super::features::FeatureSet;
use crate::board::Color;

/// Accumulator width per perspective.
pub const HIDDEN: usize = 128;

const MAGIC: &[u8; 4] = b"NNM1";
const VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("model file: {0}")]
    Io(#[from] io::Error),
    #[error("not a model file (bad magic)")]
    BadMagic,
    #[error("unsupported model version {0}")]
    Version(u32),
    #[error("model input width {found} does not match feature set width {expected}")]
    InputDim { found: usize, expected: usize },
    #[error("model hidden width {0} is not {HIDDEN}")]
    Hidden(usize),
    #[error("model file truncated")]
    Truncated,
    #[error("model contains non-finite parameters")]
    NonFinite,
}

/// Two-perspective network: a shared feature transform to `HIDDEN` units per
/// perspective, clipped to [0, 1], concatenated side-to-move first, then a
/// single linear output squashed by the logistic function.
#[derive(Clone, Debug, PartialEq)]
pub struct Network<T> {
    pub input_dim: usize,
    /// `input_dim` rows of `HIDDEN`, row = feature.
    pub feature_weights: Vec<T>,
    pub feature_bias: Vec<T>,
    /// `2 * HIDDEN`: side to move first.
    pub output_weights: Vec<T>,
    pub output_bias: T,
}

pub type NnueModel = Network<f32>;

#[inline]
pub fn clipped<T: Float>(x: T) -> T {
    x.max(T::zero()).min(T::one())
}

#[inline]
pub fn logistic<T: Float>(x: T) -> T {
    T::one() / (T::one() + (-x).exp())
}

impl<T: Float> Network<T> {
    pub fn zeros(input_dim: usize) -> Network<T> {
        Network {
            input_dim,
            feature_weights: vec![T::zero(); input_dim * HIDDEN],
            feature_bias: vec![T::zero(); HIDDEN],
            output_weights: vec![T::zero(); 2 * HIDDEN],
            output_bias: T::zero(),
        }
    }

    /// Uniform in ±sqrt(6 / (fan_in + fan_out)) per layer, zero biases.
    pub fn random<R: Rng>(input_dim: usize, rng: &mut R) -> Network<T> {
        let mut net = Network::zeros(input_dim);
        let a = (6.0 / (input_dim + HIDDEN) as f64).sqrt();
        for w in &mut net.feature_weights {
            *w = T::from(rng.gen_range(-a..a)).unwrap();
        }
        let b = (6.0 / (2 * HIDDEN + 1) as f64).sqrt();
        for w in &mut net.output_weights {
            *w = T::from(rng.gen_range(-b..b)).unwrap();
        }
        net
    }

    pub fn num_parameters(&self) -> usize {
        self.feature_weights.len() + self.feature_bias.len() + self.output_weights.len() + 1
    }

    pub fn is_finite(&self) -> bool {
        self.feature_weights
            .iter()
            .chain(&self.feature_bias)
            .chain(&self.output_weights)
            .all(|w| w.is_finite())
            && self.output_bias.is_finite()
    }

    #[inline]
    pub fn feature_row(&self, feature: usize) -> &[T] {
        &self.feature_weights[feature * HIDDEN..(feature + 1) * HIDDEN]
    }

    /// Pre-activation sums for one perspective.
    pub fn transform(&self, features: &[u16]) -> [T; HIDDEN] {
        let mut acc = [T::zero(); HIDDEN];
        acc.copy_from_slice(&self.feature_bias);
        for &f in features {
            for (a, &w) in acc.iter_mut().zip(self.feature_row(f as usize)) {
                *a = *a + w;
            }
        }
        acc
    }

    /// Output before the logistic squash.
    pub fn output_logit(&self, stm: &[T; HIDDEN], other: &[T; HIDDEN]) -> T {
        let mut z = self.output_bias;
        for (&a, &w) in stm.iter().zip(&self.output_weights[..HIDDEN]) {
            z = z + clipped(a) * w;
        }
        for (&a, &w) in other.iter().zip(&self.output_weights[HIDDEN..]) {
            z = z + clipped(a) * w;
        }
        z
    }

    /// Win probability for the side to move, in (0, 1).
    pub fn forward(&self, red: &[u16], black: &[u16], side_to_move: Color) -> T {
        let (stm, other) = match side_to_move {
            Color::Red => (red, black),
            Color::Black => (black, red),
        };
        logistic(self.output_logit(&self.transform(stm), &self.transform(other)))
    }
}

impl NnueModel {
    pub fn feature_set(&self) -> FeatureSet {
        FeatureSet {
            input_dim: self.input_dim,
        }
    }

    pub fn write_to(&self, mut w: impl Write) -> io::Result<()> {
        w.write_all(MAGIC)?;
        w.write_all(&VERSION.to_le_bytes())?;
        w.write_all(&(self.input_dim as u32).to_le_bytes())?;
        w.write_all(&(HIDDEN as u32).to_le_bytes())?;
        let mut buf = Vec::with_capacity(4 * self.num_parameters());
        for v in self
            .feature_weights
            .iter()
            .chain(&self.feature_bias)
            .chain(&self.output_weights)
            .chain(std::iter::once(&self.output_bias))
        {
            buf.extend_from_slice(&v.to_le_bytes());
        }
        w.write_all(&buf)
    }

    /// Reads a model and checks its input width against `expected`.
    pub fn read_from(mut r: impl Read, expected: FeatureSet) -> Result<NnueModel, ModelError> {
        let mut bytes = Vec::new();
        r.read_to_end(&mut bytes)?;
        if bytes.len() < 16 {
            return Err(if bytes.len() >= 4 && &bytes[..4] != MAGIC {
                ModelError::BadMagic
            } else {
                ModelError::Truncated
            });
        }
        if &bytes[..4] != MAGIC {
            return Err(ModelError::BadMagic);
        }
        let word = |i: usize| u32::from_le_bytes(bytes[i..i + 4].try_into().unwrap());
        let version = word(4);
        if version != VERSION {
            return Err(ModelError::Version(version));
        }
        let input_dim = word(8) as usize;
        if input_dim != expected.input_dim {
            return Err(ModelError::InputDim {
                found: input_dim,
                expected: expected.input_dim,
            });
        }
        let hidden = word(12) as usize;
        if hidden != HIDDEN {
            return Err(ModelError::Hidden(hidden));
        }
        let mut model = NnueModel::zeros(input_dim);
        let body = &bytes[16..];
        if body.len() != 4 * model.num_parameters() {
            return Err(ModelError::Truncated);
        }
        let mut floats = body
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().unwrap()));
        for v in model
            .feature_weights
            .iter_mut()
            .chain(model.feature_bias.iter_mut())
            .chain(model.output_weights.iter_mut())
        {
            *v = floats.next().unwrap();
        }
        model.output_bias = floats.next().unwrap();
        if !model.is_finite() {
            return Err(ModelError::NonFinite);
        }
        Ok(model)
    }
}

pub fn save_model(model: &NnueModel, path: impl AsRef<Path>) -> Result<(), ModelError> {
    let mut file = io::BufWriter::new(std::fs::File::create(path)?);
    model.write_to(&mut file)?;
    file.flush()?;
    Ok(())
}

pub fn load_model(path: impl AsRef<Path>, expected: FeatureSet) -> Result<NnueModel, ModelError> {
    NnueModel::read_from(io::BufReader::new(std::fs::File::open(path)?), expected)
}
