use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};

use super::Spectrogram;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExportFormat {
    Csv,
    Pgm,
    Png,
}

impl ExportFormat {
    pub fn parse(s: &str) -> Option<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Some(Self::Csv),
            "pgm" => Some(Self::Pgm),
            "png" => Some(Self::Png),
            _ => None,
        }
    }

    pub fn extension(self) -> &'static str {
        match self {
            Self::Csv => "csv",
            Self::Pgm => "pgm",
            Self::Png => "png",
        }
    }
}

/// One line per frame. `provenance` lands on a leading `#` comment line.
pub fn write_csv(path: &Path, spec: &Spectrogram, provenance: &str) -> Result<()> {
    let mut out = create(path)?;
    let io = |e| Error::io(path, e);
    writeln!(out, "# kind={} bin_hz={} hop_ms={} {provenance}", spec.kind, spec.bin_hz, spec.hop_ms).map_err(io)?;
    for row in &spec.data {
        let line: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        writeln!(out, "{}", line.join(",")).map_err(io)?;
    }
    out.flush().map_err(io)
}

/// Min-max normalised 8-bit image, time along x and low frequencies at the bottom.
pub fn to_gray8(spec: &Spectrogram) -> (usize, usize, Vec<u8>) {
    let (w, h) = spec.shape();
    let (lo, hi) = spec
        .data
        .iter()
        .flatten()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    let range = if hi > lo { hi - lo } else { 1.0 };
    let mut pixels = vec![0u8; w * h];
    for (t, row) in spec.data.iter().enumerate() {
        for (k, &v) in row.iter().enumerate() {
            let y = h - 1 - k;
            pixels[y * w + t] = (255.0 * (v - lo) / range).round().clamp(0.0, 255.0) as u8;
        }
    }
    (w, h, pixels)
}

pub fn write_pgm(path: &Path, spec: &Spectrogram, provenance: &str) -> Result<()> {
    let (w, h, pixels) = to_gray8(spec);
    let mut out = create(path)?;
    let io = |e| Error::io(path, e);
    write!(out, "P5\n# {} {provenance}\n{w} {h}\n255\n", spec.kind).map_err(io)?;
    out.write_all(&pixels).map_err(io)?;
    out.flush().map_err(io)
}

pub fn write_png(path: &Path, spec: &Spectrogram, provenance: &str) -> Result<()> {
    let (w, h, pixels) = to_gray8(spec);
    let out = create(path)?;
    let mut enc = png::Encoder::new(out, w as u32, h as u32);
    enc.set_color(png::ColorType::Grayscale);
    enc.set_depth(png::BitDepth::Eight);
    let encode_err = |e: png::EncodingError| Error::InvalidInput(format!("png encoding: {e}"));
    enc.add_text_chunk("kind".into(), spec.kind.to_string()).map_err(encode_err)?;
    enc.add_text_chunk("provenance".into(), provenance.into()).map_err(encode_err)?;
    let mut writer = enc.write_header().map_err(encode_err)?;
    writer.write_image_data(&pixels).map_err(encode_err)?;
    writer.finish().map_err(encode_err)
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(|e| Error::io(path, e))
}
