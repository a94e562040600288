//! De-interleaving of MIMO signatures in per-receiver Range-Doppler cubes.
//!
//! With `n_tx` transmitters an object appears `n_tx` times per receiver at
//! Doppler bins `d, d + delta, ..., d + (n_tx - 1) delta` (mod `B_D`). The
//! gather below stacks those replicas into separate virtual channels so that
//! every channel sees the signature once, at `d mod delta`.

use num_complex::Complex32;

use crate::error::{Error, Result};

/// Complex cube laid out `(range, doppler, channel)`, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct RdCube {
    pub range_bins: usize,
    pub doppler_bins: usize,
    pub channels: usize,
    pub data: Vec<Complex32>,
}

impl RdCube {
    pub fn new(range_bins: usize, doppler_bins: usize, channels: usize, data: Vec<Complex32>) -> Result<Self> {
        if data.len() != range_bins * doppler_bins * channels {
            return Err(Error::Shape(format!(
                "cube has {} values for {range_bins}x{doppler_bins}x{channels}",
                data.len()
            )));
        }
        Ok(Self { range_bins, doppler_bins, channels, data })
    }

    pub fn zeros(range_bins: usize, doppler_bins: usize, channels: usize) -> Self {
        Self {
            range_bins,
            doppler_bins,
            channels,
            data: vec![Complex32::new(0.0, 0.0); range_bins * doppler_bins * channels],
        }
    }

    #[inline]
    pub fn index(&self, r: usize, d: usize, ch: usize) -> usize {
        (r * self.doppler_bins + d) * self.channels + ch
    }

    #[inline]
    pub fn get(&self, r: usize, d: usize, ch: usize) -> Complex32 {
        self.data[self.index(r, d, ch)]
    }

    pub fn set(&mut self, r: usize, d: usize, ch: usize, v: Complex32) {
        let i = self.index(r, d, ch);
        self.data[i] = v;
    }
}

/// Number of output Doppler bins: `B_D - delta (n_tx - 1)`.
pub fn deinterleaved_doppler_bins(doppler_bins: usize, delta: usize, n_tx: usize) -> usize {
    doppler_bins - delta * (n_tx - 1)
}

/// Source Doppler bin of output bin `d` for transmitter `k`.
#[inline]
pub fn gather_source(doppler_bins: usize, delta: usize, d: usize, k: usize) -> usize {
    (d + k * delta) % doppler_bins
}

/// Gathers a `B_R x B_D x N_Rx` cube into `B_R x B_D' x (N_Tx N_Rx)`, where
/// output channel `k N_Rx + j` holds receiver `j` at Doppler `(d + k delta)
/// mod B_D`. When `delta * n_tx == B_D` the gather is a permutation of the
/// Doppler x channel cells.
pub fn mimo_deinterleave(rd_per_rx: &RdCube, delta: usize, n_tx: usize) -> Result<RdCube> {
    if delta == 0 {
        return Err(Error::param("delta", "Doppler spacing must be positive"));
    }
    if n_tx == 0 {
        return Err(Error::param("n_tx", "need at least one transmitter"));
    }
    let bd = rd_per_rx.doppler_bins;
    if delta * (n_tx - 1) >= bd {
        return Err(Error::param(
            "delta",
            format!("delta * (n_tx - 1) = {} must be below B_D = {bd}", delta * (n_tx - 1)),
        ));
    }
    let n_rx = rd_per_rx.channels;
    let out_bins = deinterleaved_doppler_bins(bd, delta, n_tx);
    let mut out = RdCube::zeros(rd_per_rx.range_bins, out_bins, n_tx * n_rx);
    for r in 0..rd_per_rx.range_bins {
        for d in 0..out_bins {
            for k in 0..n_tx {
                let src = gather_source(bd, delta, d, k);
                for j in 0..n_rx {
                    out.set(r, d, k * n_rx + j, rd_per_rx.get(r, src, j));
                }
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_tx_is_identity() {
        let data: Vec<Complex32> = (0..2 * 6 * 3).map(|i| Complex32::new(i as f32, -(i as f32))).collect();
        let cube = RdCube::new(2, 6, 3, data).unwrap();
        assert_eq!(mimo_deinterleave(&cube, 4, 1).unwrap(), cube);
    }

    #[test]
    fn replicas_collapse_to_one_peak() {
        let (nr, delta, n_tx, n_rx) = (4, 8, 3, 2);
        let bd = delta * n_tx;
        let mut cube = RdCube::zeros(nr, bd, n_rx);
        let d0 = 5;
        for k in 0..n_tx {
            for j in 0..n_rx {
                cube.set(2, d0 + k * delta, j, Complex32::new(10.0, 0.0));
            }
        }
        let out = mimo_deinterleave(&cube, delta, n_tx).unwrap();
        assert_eq!(out.doppler_bins, delta);
        for ch in 0..n_tx * n_rx {
            let peaks: Vec<(usize, usize)> = (0..nr)
                .flat_map(|r| (0..delta).map(move |d| (r, d)))
                .filter(|&(r, d)| out.get(r, d, ch).norm() > 0.0)
                .collect();
            assert_eq!(peaks, vec![(2, d0)]);
        }
    }

    #[test]
    fn rejects_bad_spacing() {
        let cube = RdCube::zeros(1, 8, 1);
        assert!(mimo_deinterleave(&cube, 0, 2).is_err());
        assert!(mimo_deinterleave(&cube, 4, 3).is_err());
        assert!(mimo_deinterleave(&cube, 4, 0).is_err());
    }
}
