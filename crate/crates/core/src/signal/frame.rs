use std::f64::consts::PI;

use crate::error::{Error, Result};

use super::AudioSignal;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum WindowKind {
    #[default]
    Blackman,
    None,
}

/// A windowed analysis frame cut from a parent signal.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    pub samples: Vec<f64>,
    pub start_sample: usize,
    pub window_kind: WindowKind,
}

impl Frame {
    /// Wraps raw samples as an unwindowed frame starting at sample 0.
    pub fn raw(samples: Vec<f64>) -> Self {
        Self {
            samples,
            start_sample: 0,
            window_kind: WindowKind::None,
        }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.samples.iter().all(|&s| s == 0.0)
    }
}

/// Frame layout in samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FrameGrid {
    pub frame_len: usize,
    pub hop: usize,
    pub sample_rate: u32,
}

impl FrameGrid {
    pub fn from_ms(frame_ms: f64, hop_ms: f64, sample_rate: u32) -> Self {
        let sr = sample_rate as f64;
        Self {
            frame_len: (frame_ms * sr / 1000.0).round() as usize,
            hop: (hop_ms * sr / 1000.0).round() as usize,
            sample_rate,
        }
    }

    pub fn n_frames(&self, n_samples: usize) -> usize {
        if n_samples < self.frame_len {
            0
        } else {
            (n_samples - self.frame_len) / self.hop + 1
        }
    }

    /// Time of frame `i`'s centre in seconds.
    pub fn center_time(&self, i: usize) -> f64 {
        (i * self.hop) as f64 / self.sample_rate as f64
            + (self.frame_len as f64 - 1.0) / (2.0 * self.sample_rate as f64)
    }

    pub fn center_times(&self, n_frames: usize) -> Vec<f64> {
        (0..n_frames).map(|i| self.center_time(i)).collect()
    }
}

impl Default for FrameGrid {
    fn default() -> Self {
        Self::from_ms(30.0, 10.0, 16_000)
    }
}

/// Classic Blackman window `0.42 - 0.5 cos(2πn/(L-1)) + 0.08 cos(4πn/(L-1))`.
pub fn blackman(len: usize) -> Vec<f64> {
    if len == 1 {
        return vec![1.0];
    }
    let d = (len - 1) as f64;
    (0..len)
        .map(|n| {
            let x = n as f64 / d;
            // exact zeros at the ends; the formula leaves ~1e-17 of rounding
            if n == 0 || n == len - 1 {
                0.0
            } else {
                0.42 - 0.5 * (2.0 * PI * x).cos() + 0.08 * (4.0 * PI * x).cos()
            }
        })
        .collect()
}

pub fn frame_signal(signal: &AudioSignal, grid: FrameGrid, window: WindowKind) -> Result<Vec<Frame>> {
    frame_samples(signal.samples(), grid, window)
}

pub fn frame_samples(x: &[f64], grid: FrameGrid, window: WindowKind) -> Result<Vec<Frame>> {
    if grid.frame_len == 0 || grid.hop == 0 {
        return Err(Error::InvalidConfig("frame length and hop must be positive".into()));
    }
    if x.len() < grid.frame_len {
        return Err(Error::SignalTooShort {
            len: x.len(),
            needed: grid.frame_len,
        });
    }
    let w = match window {
        WindowKind::Blackman => blackman(grid.frame_len),
        WindowKind::None => vec![1.0; grid.frame_len],
    };
    Ok((0..grid.n_frames(x.len()))
        .map(|i| {
            let start = i * grid.hop;
            Frame {
                samples: x[start..start + grid.frame_len]
                    .iter()
                    .zip(&w)
                    .map(|(s, w)| s * w)
                    .collect(),
                start_sample: start,
                window_kind: window,
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn default_grid_is_480_by_160() {
        let g = FrameGrid::default();
        assert_eq!((g.frame_len, g.hop), (480, 160));
        assert_eq!(g.n_frames(16_000), 98);
    }

    #[test]
    fn exactly_one_frame_at_boundary() {
        let x = vec![0.1; 480];
        let frames = frame_samples(&x, FrameGrid::default(), WindowKind::Blackman).unwrap();
        assert_eq!(frames.len(), 1);
        assert!(matches!(
            frame_samples(&x[..479], FrameGrid::default(), WindowKind::Blackman),
            Err(Error::SignalTooShort { len: 479, needed: 480 })
        ));
    }

    #[test]
    fn blackman_endpoints() {
        let w = blackman(481);
        assert_eq!(w[0], 0.0);
        assert_eq!(w[480], 0.0);
        assert!((w[240] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn ones_frame_equals_window() {
        let x = vec![1.0; 1000];
        let frames = frame_samples(&x, FrameGrid::default(), WindowKind::Blackman).unwrap();
        assert_eq!(frames[2].samples, blackman(480));
    }

    proptest! {
        #[test]
        fn framing_is_shift_consistent(seed in 0u64..1000, i in 0usize..5) {
            let x: Vec<f64> = (0..1500).map(|n| ((n as u64 * 2654435761 + seed) % 1000) as f64 / 1000.0 - 0.5).collect();
            let g = FrameGrid::default();
            let a = frame_samples(&x, g, WindowKind::Blackman).unwrap();
            let b = frame_samples(&x[i * g.hop..], g, WindowKind::Blackman).unwrap();
            prop_assert_eq!(&a[i].samples, &b[0].samples);
        }
    }
}
