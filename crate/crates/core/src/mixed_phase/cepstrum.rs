//! Complex cepstrum and causal/anticausal decomposition of one frame.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::signal::{fft_in_place, ifft_in_place, rfft_padded};

// magnitudes are floored at this fraction of the peak before the log
const LOG_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct ComplexCepstrum {
    /// `c[q]` for `q = 0..n`; indices above `n/2` hold negative quefrencies.
    pub coeffs: Vec<f64>,
    /// Linear-phase term removed before the log, in samples of delay.
    pub linear_phase: i64,
    /// `-1` when the spectrum was negated to make `X(0)` positive.
    pub sign: f64,
}

impl ComplexCepstrum {
    pub fn n(&self) -> usize {
        self.coeffs.len()
    }

    /// Fraction of cepstral energy at strictly negative quefrencies.
    pub fn anticausal_energy_fraction(&self) -> f64 {
        let n = self.n();
        let neg: f64 = self.coeffs[n / 2 + 1..].iter().map(|c| c * c).sum();
        neg / self.total_energy()
    }

    /// Fraction of cepstral energy at strictly positive quefrencies.
    pub fn causal_energy_fraction(&self) -> f64 {
        let n = self.n();
        let pos: f64 = self.coeffs[1..=n / 2].iter().map(|c| c * c).sum();
        pos / self.total_energy()
    }

    fn total_energy(&self) -> f64 {
        let e: f64 = self.coeffs.iter().map(|c| c * c).sum();
        if e > 0.0 {
            e
        } else {
            1.0
        }
    }
}

/// Phase unwrapping by adding multiples of 2π wherever consecutive bins
/// jump by more than π.
pub fn unwrap_phase(phase: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(phase.len());
    let mut offset = 0.0;
    for (i, &p) in phase.iter().enumerate() {
        if i > 0 {
            let d = p - phase[i - 1];
            if d > PI {
                offset -= 2.0 * PI * ((d + PI) / (2.0 * PI)).floor();
            } else if d < -PI {
                offset += 2.0 * PI * ((-d + PI) / (2.0 * PI)).floor();
            }
        }
        out.push(p + offset);
    }
    out
}

/// Complex cepstrum of `x` zero-padded to `n_fft`.
///
/// A negative `X(0)` is absorbed into `sign`, and the integer linear-phase
/// term implied by the unwrapped phase at Nyquist is removed so the phase
/// returns to zero there.
pub fn complex_cepstrum(x: &[f64], n_fft: usize) -> Result<ComplexCepstrum> {
    if x.len() > n_fft {
        return Err(Error::FrameTooLong { len: x.len(), n_fft });
    }
    if x.iter().all(|&v| v == 0.0) {
        return Err(Error::ZeroFrame);
    }
    let mut spec = rfft_padded(x, n_fft);
    let sign = if spec[0].re < 0.0 { -1.0 } else { 1.0 };
    if sign < 0.0 {
        spec.iter_mut().for_each(|v| *v = -*v);
    }
    let half = n_fft / 2;
    let peak = spec.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let floor = peak * LOG_FLOOR;

    let raw: Vec<f64> = spec[..=half].iter().map(|v| v.arg()).collect();
    let unwrapped = unwrap_phase(&raw);
    let r = (unwrapped[half] / PI).round();
    let phase: Vec<f64> = unwrapped
        .iter()
        .enumerate()
        .map(|(k, p)| p - PI * r * k as f64 / half as f64)
        .collect();
    if phase.windows(2).any(|w| (w[1] - w[0]).abs() > PI) || phase.iter().any(|p| !p.is_finite()) {
        return Err(Error::UnwrapFailure);
    }

    let mut buf = vec![Complex64::new(0.0, 0.0); n_fft];
    for k in 0..=half {
        let v = Complex64::new(spec[k].norm().max(floor).ln(), phase[k]);
        buf[k] = v;
        if k > 0 && k < half {
            buf[n_fft - k] = v.conj();
        }
    }
    // Nyquist carries no imaginary part for a real cepstrum
    buf[half].im = 0.0;
    ifft_in_place(&mut buf);
    Ok(ComplexCepstrum {
        coeffs: buf.iter().map(|v| v.re).collect(),
        linear_phase: r as i64,
        sign,
    })
}

/// Time-domain sequence whose cepstrum is `c` (inverse of [`complex_cepstrum`]
/// without the sign and linear-phase bookkeeping).
pub fn from_cepstrum(c: &[f64]) -> Vec<f64> {
    let mut buf: Vec<Complex64> = c.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fft_in_place(&mut buf);
    buf.iter_mut().for_each(|v| *v = v.exp());
    ifft_in_place(&mut buf);
    buf.iter().map(|v| v.re).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct CcdParts {
    /// Maximum-phase component, stored circularly: index 0 is the origin and
    /// the tail holds negative times.
    pub anticausal: Vec<f64>,
    /// Minimum-phase component, carrying the frame's gain.
    pub causal: Vec<f64>,
    pub cepstrum: ComplexCepstrum,
}

/// Splits a frame (already shifted so its origin sits at index 0) into
/// anticausal and causal components by cepstral sidedness.
pub fn ccd_frame(x: &[f64], n_fft: usize) -> Result<CcdParts> {
    let cep = complex_cepstrum(x, n_fft)?;
    let half = n_fft / 2;
    let mut ca = vec![0.0; n_fft];
    ca[half + 1..].copy_from_slice(&cep.coeffs[half + 1..]);
    let mut cc = vec![0.0; n_fft];
    cc[..=half].copy_from_slice(&cep.coeffs[..=half]);
    Ok(CcdParts {
        anticausal: from_cepstrum(&ca),
        causal: from_cepstrum(&cc),
        cepstrum: cep,
    })
}
