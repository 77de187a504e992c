use std::cell::RefCell;

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};

use super::Frame;

pub const DEFAULT_N_FFT: usize = 1024;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

/// In-place forward FFT (no normalisation).
pub fn fft_in_place(buf: &mut [Complex64]) {
    PLANNER.with(|p| p.borrow_mut().plan_fft_forward(buf.len()).process(buf));
}

/// In-place inverse FFT, scaled by `1/n` so that it inverts [`fft_in_place`].
pub fn ifft_in_place(buf: &mut [Complex64]) {
    PLANNER.with(|p| p.borrow_mut().plan_fft_inverse(buf.len()).process(buf));
    let scale = 1.0 / buf.len() as f64;
    buf.iter_mut().for_each(|v| *v *= scale);
}

/// Zero-pads a real sequence to `n` and transforms it.
pub fn rfft_padded(x: &[f64], n: usize) -> Vec<Complex64> {
    let mut buf = vec![Complex64::new(0.0, 0.0); n];
    for (b, &v) in buf.iter_mut().zip(x) {
        b.re = v;
    }
    fft_in_place(&mut buf);
    buf
}

/// `n_fft`-point spectrum `X(k)` of a frame.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexSpectrum {
    pub values: Vec<Complex64>,
    pub n_fft: usize,
    pub bin_hz: f64,
}

impl ComplexSpectrum {
    pub fn magnitude(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.norm()).collect()
    }

    /// Non-negative frequency half, `n_fft/2 + 1` bins.
    pub fn half(&self) -> &[Complex64] {
        &self.values[..self.n_fft / 2 + 1]
    }

    pub fn inverse(&self) -> Vec<Complex64> {
        let mut buf = self.values.clone();
        ifft_in_place(&mut buf);
        buf
    }
}

fn check_len(len: usize, n_fft: usize) -> Result<()> {
    if len > n_fft {
        Err(Error::FrameTooLong { len, n_fft })
    } else {
        Ok(())
    }
}

/// Zero-padded DFT of a frame. `bin_hz` assumes the 16 kHz analysis rate.
pub fn dft(frame: &Frame, n_fft: usize) -> Result<ComplexSpectrum> {
    dft_at_rate(&frame.samples, n_fft, super::ANALYSIS_RATE)
}

pub fn dft_at_rate(x: &[f64], n_fft: usize, sample_rate: u32) -> Result<ComplexSpectrum> {
    check_len(x.len(), n_fft)?;
    Ok(ComplexSpectrum {
        values: rfft_padded(x, n_fft),
        n_fft,
        bin_hz: sample_rate as f64 / n_fft as f64,
    })
}

/// Evaluates the z-transform of `x` on the circle `|z| = rho`, at
/// `n_fft` equally spaced angles: `Σ x(n) rho^-n e^{-j2πkn/N}`.
pub fn chirp_dft(x: &[f64], rho: f64, n_fft: usize) -> Result<ComplexSpectrum> {
    if !(rho > 0.0) || !rho.is_finite() {
        return Err(Error::RadiusNonPositive(rho));
    }
    check_len(x.len(), n_fft)?;
    let inv = rho.recip();
    let mut w = 1.0;
    let weighted: Vec<f64> = x
        .iter()
        .map(|&v| {
            let out = v * w;
            w *= inv;
            out
        })
        .collect();
    dft_at_rate(&weighted, n_fft, super::ANALYSIS_RATE)
}
