//! Audio ingestion, framing, spectral transforms and pitch estimation.

mod audio;
mod frame;
mod pitch;
mod spectrum;

pub use audio::{load_wav, write_wav, write_wav_float, AudioSignal, RatePolicy, ANALYSIS_RATE};
pub use frame::{blackman, frame_samples, frame_signal, Frame, FrameGrid, WindowKind};
pub use pitch::{estimate_f0, PitchTrack, F0_MAX_HZ, F0_MIN_HZ, VOICING_THRESHOLD};
pub use spectrum::{
    chirp_dft, dft, dft_at_rate, fft_in_place, ifft_in_place, rfft_padded, ComplexSpectrum,
    DEFAULT_N_FFT,
};
