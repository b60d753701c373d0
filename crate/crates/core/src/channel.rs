//! BPSK over an AWGN channel.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

/// Operating point of the channel.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChannelParams {
    pub ebn0_db: f64,
    pub rate: f64,
    pub sigma: f64,
}

impl ChannelParams {
    /// `sigma = 1 / sqrt(2 · rate · 10^(ebn0_db / 10))`.
    pub fn new(ebn0_db: f64, rate: f64) -> Result<Self> {
        if !ebn0_db.is_finite() {
            return Err(Error::InvalidParameter(format!("Eb/N0 {ebn0_db} dB")));
        }
        if !(rate > 0.0 && rate <= 1.0) {
            return Err(Error::InvalidParameter(format!("code rate {rate}")));
        }
        Ok(Self {
            ebn0_db,
            rate,
            sigma: noise_sigma(ebn0_db, rate),
        })
    }

    /// Transmits `bits` and returns channel LLRs.
    pub fn transmit<R: Rng + ?Sized>(&self, bits: &[u8], rng: &mut R) -> Vec<f64> {
        let mut y = bpsk_modulate(bits);
        add_awgn(&mut y, self.sigma, rng);
        llr_in_place(&mut y, self.sigma);
        y
    }
}

pub fn noise_sigma(ebn0_db: f64, rate: f64) -> f64 {
    1.0 / (2.0 * rate * 10f64.powf(ebn0_db / 10.0)).sqrt()
}

/// Bit 0 maps to +1, bit 1 to -1.
pub fn bpsk_modulate(bits: &[u8]) -> Vec<f64> {
    bits.iter().map(|&b| if b == 0 { 1.0 } else { -1.0 }).collect()
}

/// Hard decision on channel outputs: non-negative decodes to 0.
pub fn hard_demodulate(y: &[f64]) -> Vec<u8> {
    y.iter().map(|&v| (v < 0.0) as u8).collect()
}

pub fn awgn<R: Rng + ?Sized>(signal: &[f64], sigma: f64, rng: &mut R) -> Vec<f64> {
    let mut out = signal.to_vec();
    add_awgn(&mut out, sigma, rng);
    out
}

pub fn add_awgn<R: Rng + ?Sized>(signal: &mut [f64], sigma: f64, rng: &mut R) {
    for s in signal {
        let z: f64 = rng.sample(StandardNormal);
        *s += sigma * z;
    }
}

/// `L = 2y / sigma²`.
pub fn channel_llr(y: &[f64], sigma: f64) -> Vec<f64> {
    let mut out = y.to_vec();
    llr_in_place(&mut out, sigma);
    out
}

fn llr_in_place(y: &mut [f64], sigma: f64) {
    let k = 2.0 / (sigma * sigma);
    for v in y {
        *v *= k;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{stream, Domain};
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn modulation_examples() {
        assert_eq!(bpsk_modulate(&[0, 0, 0]), vec![1.0; 3]);
        assert_eq!(bpsk_modulate(&[0, 1]), vec![1.0, -1.0]);
        let bits = [1, 0, 1, 1, 0];
        assert_eq!(hard_demodulate(&bpsk_modulate(&bits)), bits);
    }

    #[test]
    fn sigma_at_one_db_half_rate() {
        let p = ChannelParams::new(1.0, 0.5).unwrap();
        let oracle = (2.0 * 0.5 * 10f64.powf(0.1)).powf(-0.5);
        assert_relative_eq!(p.sigma, oracle, max_relative = 1e-15);
        assert_relative_eq!(p.sigma, 0.8913, epsilon = 1e-4);
        assert!(ChannelParams::new(1.0, 0.0).is_err());
        assert!(ChannelParams::new(f64::NAN, 0.5).is_err());
    }

    #[test]
    fn llr_examples() {
        assert_eq!(channel_llr(&[1.0], 1.0), vec![2.0]);
        assert_eq!(channel_llr(&[0.0], 0.7), vec![0.0]);
    }

    #[test]
    fn tiny_noise_leaves_signal() {
        let mut rng = stream(1, Domain::Ber, 0, 0);
        let x = bpsk_modulate(&[0, 1, 1, 0]);
        let y = awgn(&x, 1e-300, &mut rng);
        assert_eq!(y, x);
        assert_eq!(awgn(&x, 0.0, &mut rng), x);
    }

    #[test]
    fn noise_moments() {
        let sigma = 0.8;
        let n = 1_000_000;
        let mut rng = stream(42, Domain::Ber, 0, 0);
        let y = awgn(&vec![0.0; n], sigma, &mut rng);
        let mean = y.iter().sum::<f64>() / n as f64;
        let var = y.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64;
        assert!(mean.abs() < 4.0 * sigma / 1000.0, "mean {mean}");
        assert!((var / (sigma * sigma) - 1.0).abs() < 0.01, "variance {var}");
    }

    proptest! {
        #[test]
        fn llr_sign_follows_observation(y in proptest::collection::vec(-5.0f64..5.0, 1..20), sigma in 0.1f64..3.0) {
            for (l, v) in channel_llr(&y, sigma).iter().zip(&y) {
                prop_assert_eq!(l.is_sign_negative(), v.is_sign_negative());
            }
        }
    }
}
