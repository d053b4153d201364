//! Checkpoint encoding.
//!
//! ```text
//! "ALSIMCKP" | u32 version | u64 feature_count | u64 label_count | u64 step_counter
//! weights: label_count * feature_count f64 | bias: label_count f64
//! rng: 32-byte seed | u64 stream | u128 word position
//! ```
//! Little-endian throughout; the file length must match exactly.

use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;

use super::LinearModel;
use crate::error::{Error, Result};

const MAGIC: &[u8; 8] = b"ALSIMCKP";
const VERSION: u32 = 1;
const HEADER: usize = 8 + 4 + 8 * 3;
const RNG_LEN: usize = 32 + 8 + 16;

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub model: LinearModel,
    /// Trainer stream as positioned after the step that produced `model`.
    pub rng: ChaCha8Rng,
}

impl Checkpoint {
    pub fn encode(&self) -> Vec<u8> {
        let m = &self.model;
        let mut out = Vec::with_capacity(HEADER + 8 * (m.weights.len() + m.bias.len()) + RNG_LEN);
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&VERSION.to_le_bytes());
        out.extend_from_slice(&(m.feature_count() as u64).to_le_bytes());
        out.extend_from_slice(&(m.label_count() as u64).to_le_bytes());
        out.extend_from_slice(&m.step_counter.to_le_bytes());
        for v in m.weights.iter().chain(&m.bias) {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out.extend_from_slice(&self.rng.get_seed());
        out.extend_from_slice(&self.rng.get_stream().to_le_bytes());
        out.extend_from_slice(&self.rng.get_word_pos().to_le_bytes());
        out
    }

    pub fn decode(bytes: &[u8]) -> Result<Self> {
        let corrupt = |m: &str| Error::CorruptArtifact {
            name: "checkpoint".into(),
            message: m.to_string(),
        };
        if bytes.len() < HEADER || &bytes[..8] != MAGIC {
            return Err(corrupt("bad header"));
        }
        let u64_at = |o: usize| u64::from_le_bytes(bytes[o..o + 8].try_into().unwrap());
        let version = u32::from_le_bytes(bytes[8..12].try_into().unwrap());
        if version != VERSION {
            return Err(corrupt(&format!("unsupported version {version}")));
        }
        let features = u64_at(12) as usize;
        let labels = u64_at(20) as usize;
        let step = u64_at(28);
        let params = labels
            .checked_mul(features)
            .and_then(|w| w.checked_add(labels))
            .ok_or_else(|| corrupt("dimensions overflow"))?;
        let expected = params
            .checked_mul(8)
            .and_then(|p| p.checked_add(HEADER + RNG_LEN))
            .ok_or_else(|| corrupt("dimensions overflow"))?;
        if bytes.len() != expected {
            return Err(corrupt(&format!("expected {expected} bytes, found {}", bytes.len())));
        }
        let floats: Vec<f64> = bytes[HEADER..HEADER + params * 8]
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect();
        let (weights, bias) = floats.split_at(labels * features);
        let model = LinearModel::from_parts(labels, features, weights.to_vec(), bias.to_vec(), step)?;

        let r = HEADER + params * 8;
        let seed: [u8; 32] = bytes[r..r + 32].try_into().unwrap();
        let stream = u64_at(r + 32);
        let word_pos = u128::from_le_bytes(bytes[r + 40..r + 56].try_into().unwrap());
        let mut rng = ChaCha8Rng::from_seed(seed);
        rng.set_stream(stream);
        rng.set_word_pos(word_pos);
        Ok(Self { model, rng })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn sample() -> Checkpoint {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut model = LinearModel::zeros(3, 4);
        for w in model.weights_mut() {
            *w = rng.gen_range(-2.0..2.0);
        }
        model.bias_mut()[1] = -0.0;
        model.bias_mut()[2] = f64::MIN_POSITIVE;
        model.step_counter = 7;
        let _: u64 = rng.gen();
        Checkpoint { model, rng }
    }

    #[test]
    fn round_trip_is_bit_exact() {
        let c = sample();
        let back = Checkpoint::decode(&c.encode()).unwrap();
        assert_eq!(back.model.step_counter(), 7);
        let bits = |m: &LinearModel| m.weights().iter().chain(m.bias()).map(|v| v.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(&back.model), bits(&c.model));
        let mut a = c.rng.clone();
        let mut b = back.rng.clone();
        assert_eq!(a.gen::<u64>(), b.gen::<u64>());
        assert_eq!(back, c);
    }

    #[test]
    fn truncated_or_tampered_files_are_rejected() {
        let bytes = sample().encode();
        assert!(Checkpoint::decode(&bytes[..bytes.len() - 1]).is_err());
        assert!(Checkpoint::decode(&bytes[..10]).is_err());
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(Checkpoint::decode(&bad).is_err());
        let mut extra = bytes;
        extra.push(0);
        assert!(matches!(Checkpoint::decode(&extra), Err(Error::CorruptArtifact { .. })));
    }
}
