//! Group delay of a damped resonator frame under the four phase representations.
//!
//! Run with `cargo run --example group_delay`.

use phasevoice::signal::Frame;
use phasevoice::spectra::{cgd_frame, group_delay_raw, modgd_frame, ppgd_frame, CgdConfig, ModGdConfig};

fn main() -> phasevoice::Result<()> {
    let n_fft = 1024;
    let fs = 16000.0;
    // two-pole resonance at 1 kHz, radius 0.97
    let (r, w) = (0.97f64, 2.0 * std::f64::consts::PI * 1000.0 / fs);
    let mut y = vec![0.0; 480];
    for n in 0..y.len() {
        let x = if n == 0 { 1.0 } else { 0.0 };
        let y1 = if n >= 1 { y[n - 1] } else { 0.0 };
        let y2 = if n >= 2 { y[n - 2] } else { 0.0 };
        y[n] = x + 2.0 * r * w.cos() * y1 - r * r * y2;
    }
    let frame = Frame::raw(y);

    let raw = group_delay_raw(&frame, n_fft)?;
    let modgd = modgd_frame(&frame, &ModGdConfig::default(), n_fft)?;
    let ppgd = ppgd_frame(&frame, n_fft)?;
    let cgd = cgd_frame(&frame, &CgdConfig::default(), n_fft)?;

    let peak = |v: &[f64]| {
        let k = (0..v.len()).max_by(|&a, &b| v[a].total_cmp(&v[b])).unwrap();
        (k as f64 * fs / n_fft as f64, v[k])
    };
    println!("{:<8}{:>12}{:>14}", "kind", "peak Hz", "peak value");
    for (name, v) in [("GD", &raw), ("ModGD", &modgd), ("PPGD", &ppgd), ("CGD", &cgd)] {
        let (hz, val) = peak(v);
        println!("{name:<8}{hz:>12.1}{val:>14.3}");
    }
    Ok(())
}
