//! Reproducible random streams for parallel ensembles.
//!
//! Stream `k` of master seed `s` is ChaCha8 keyed by `s` with stream id `k`,
//! so realization `k` draws the same numbers no matter which worker runs it.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct RngStream {
    pub master_seed: u64,
    pub stream_index: u64,
}

impl RngStream {
    pub fn new(master_seed: u64, stream_index: u64) -> Self {
        RngStream {
            master_seed,
            stream_index,
        }
    }

    /// A fresh generator positioned at the start of this stream.
    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.master_seed);
        rng.set_stream(self.stream_index);
        rng
    }

    /// Sub-stream for a second independent purpose within one realization.
    pub fn child(&self, salt: u64) -> RngStream {
        // splitmix64 finalizer keeps child seeds far apart
        let mut z = self.master_seed ^ salt.wrapping_mul(0x9E37_79B9_7F4A_7C15);
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^= z >> 31;
        RngStream::new(z, self.stream_index)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn same_stream_same_sequence() {
        let a: Vec<u64> = RngStream::new(7, 3).rng().random_iter().take(16).collect();
        let b: Vec<u64> = RngStream::new(7, 3).rng().random_iter().take(16).collect();
        assert_eq!(a, b);
    }

    #[test]
    fn distinct_streams_differ() {
        let a: Vec<u64> = RngStream::new(7, 3).rng().random_iter().take(16).collect();
        let b: Vec<u64> = RngStream::new(7, 4).rng().random_iter().take(16).collect();
        let c: Vec<u64> = RngStream::new(7, 3).child(1).rng().random_iter().take(16).collect();
        assert_ne!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn streams_are_uncorrelated() {
        let n = 4096;
        let x: Vec<f64> = RngStream::new(11, 0).rng().random_iter().take(n).collect();
        let y: Vec<f64> = RngStream::new(11, 1).rng().random_iter().take(n).collect();
        let mx = x.iter().sum::<f64>() / n as f64;
        let my = y.iter().sum::<f64>() / n as f64;
        let cov: f64 = x.iter().zip(&y).map(|(a, b)| (a - mx) * (b - my)).sum();
        let vx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
        let vy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
        assert!((cov / (vx * vy).sqrt()).abs() < 0.1);
    }
}
