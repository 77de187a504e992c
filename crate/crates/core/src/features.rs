//! The 10-dimensional, 100 Hz feature stream: five spectrogram deltas,
//! the T1/T2 glottal time constants and three spectral balances.

use std::fmt;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectra::{Spectrogram, SpectrogramKind};

pub const FEATURE_NAMES: [&str; 10] = [
    "dFM", "dSMOOTH", "dMODGD", "dPPGD", "dCGD", "T1", "T2", "BAL1", "BAL2", "BAL3",
];
pub const N_FEATURES: usize = FEATURE_NAMES.len();
pub const DELTA_EPS: f64 = 1e-12;
pub const CSV_HEADER: &str = "patient_id,label,frame_idx,dFM,dSMOOTH,dMODGD,dPPGD,dCGD,T1,T2,BAL1,BAL2,BAL3";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Label {
    Normophonic,
    Pathological,
}

impl Label {
    pub fn parse(s: &str) -> Option<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "NORMOPHONIC" | "NORMAL" | "0" => Some(Self::Normophonic),
            "PATHOLOGICAL" | "DYSPHONIC" | "1" => Some(Self::Pathological),
            _ => None,
        }
    }

    pub fn short(self) -> &'static str {
        match self {
            Self::Normophonic => "N",
            Self::Pathological => "P",
        }
    }

    /// Training target: 1 for pathological.
    pub fn target(self) -> f64 {
        match self {
            Self::Normophonic => 0.0,
            Self::Pathological => 1.0,
        }
    }

    pub fn index(self) -> usize {
        self.target() as usize
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Normophonic => "NORMOPHONIC",
            Self::Pathological => "PATHOLOGICAL",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ManifestEntry {
    pub path: PathBuf,
    pub label: Label,
    pub patient_id: String,
}

/// Reads a `path,label,patient_id` manifest. Relative paths resolve against
/// the manifest's directory; `#` lines are comments.
pub fn read_manifest(path: &Path) -> Result<Vec<ManifestEntry>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let base = path.parent().unwrap_or(Path::new(""));
    let mut out = Vec::new();
    let mut header_seen = false;
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if !header_seen {
            header_seen = true;
            if line.replace(' ', "") == "path,label,patient_id" {
                continue;
            }
        }
        let parts: Vec<&str> = line.split(',').map(str::trim).collect();
        if parts.len() != 3 {
            return Err(Error::Parse(format!("{}:{}: expected path,label,patient_id", path.display(), lineno + 1)));
        }
        let label = Label::parse(parts[1])
            .ok_or_else(|| Error::Parse(format!("{}:{}: unknown label {:?}", path.display(), lineno + 1, parts[1])))?;
        let p = PathBuf::from(parts[0]);
        out.push(ManifestEntry {
            path: if p.is_absolute() { p } else { base.join(p) },
            label,
            patient_id: parts[2].to_string(),
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DeltaNorm {
    #[default]
    L2,
    L1,
}

/// Relative frame-to-frame change `‖s_t − s_{t−1}‖ / (‖s_{t−1}‖ + ε)`,
/// with `d_0 = d_1`.
pub fn spectrogram_delta(spec: &Spectrogram, norm: DeltaNorm) -> Result<Vec<f64>> {
    let n = spec.n_frames();
    if n < 2 {
        return Err(Error::TooFewFrames { got: n, needed: 2 });
    }
    let measure = |v: &mut dyn Iterator<Item = f64>| -> f64 {
        match norm {
            DeltaNorm::L2 => v.map(|x| x * x).sum::<f64>().sqrt(),
            DeltaNorm::L1 => v.map(f64::abs).sum(),
        }
    };
    let mut d = Vec::with_capacity(n);
    d.push(0.0);
    for t in 1..n {
        let (prev, cur) = (&spec.data[t - 1], &spec.data[t]);
        let num = measure(&mut cur.iter().zip(prev).map(|(a, b)| a - b));
        let den = measure(&mut prev.iter().copied());
        d.push(num / (den + DELTA_EPS));
    }
    d[0] = d[1];
    Ok(d)
}

/// Band edges for the three spectral balances. Bands are half-open:
/// `[0, e1)`, `[e1, e2)`, `[e2, nyquist)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BalanceBands {
    pub edges_hz: [f64; 2],
}

impl Default for BalanceBands {
    fn default() -> Self {
        Self { edges_hz: [1000.0, 4000.0] }
    }
}

impl BalanceBands {
    pub fn validate(&self) -> Result<()> {
        let [a, b] = self.edges_hz;
        if !(a > 0.0 && b > a) {
            return Err(Error::InvalidConfig(format!("balance band edges {a}, {b} must be increasing and positive")));
        }
        Ok(())
    }

    fn band_of(&self, freq: f64) -> usize {
        if freq < self.edges_hz[0] {
            0
        } else if freq < self.edges_hz[1] {
            1
        } else {
            2
        }
    }
}

/// Per-frame energy fractions of an FM spectrogram in the three bands.
/// The Nyquist bin is excluded so the bands split `n_fft/2` bins.
pub fn spectral_balances(fm: &Spectrogram, bands: &BalanceBands) -> Result<Vec<[f64; 3]>> {
    if fm.kind != SpectrogramKind::Fm {
        return Err(Error::WrongKind { expected: "FM".into(), got: fm.kind.name().into() });
    }
    let out = fm
        .data
        .iter()
        .map(|row| {
            let n = row.len().saturating_sub(1).max(1);
            let mut e = [0.0; 3];
            for (k, &m) in row.iter().take(n).enumerate() {
                e[bands.band_of(k as f64 * fm.bin_hz)] += m * m;
            }
            let total: f64 = e.iter().sum();
            if total > 0.0 {
                e.map(|v| v / total)
            } else {
                [1.0 / 3.0; 3]
            }
        })
        .collect();
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureFrame {
    pub d_fm: f64,
    pub d_smooth: f64,
    pub d_modgd: f64,
    pub d_ppgd: f64,
    pub d_cgd: f64,
    pub t1: f64,
    pub t2: f64,
    pub bal1: f64,
    pub bal2: f64,
    pub bal3: f64,
}

impl FeatureFrame {
    pub fn to_array(&self) -> [f64; N_FEATURES] {
        [
            self.d_fm, self.d_smooth, self.d_modgd, self.d_ppgd, self.d_cgd, self.t1, self.t2, self.bal1,
            self.bal2, self.bal3,
        ]
    }

    pub fn from_array(v: [f64; N_FEATURES]) -> Self {
        Self {
            d_fm: v[0],
            d_smooth: v[1],
            d_modgd: v[2],
            d_ppgd: v[3],
            d_cgd: v[4],
            t1: v[5],
            t2: v[6],
            bal1: v[7],
            bal2: v[8],
            bal3: v[9],
        }
    }
}

/// Position of a feature name in the 10-column layout.
pub fn feature_index(name: &str) -> Option<usize> {
    FEATURE_NAMES.iter().position(|n| n.eq_ignore_ascii_case(name.trim()))
}

/// Parses a comma-separated subset such as `dMODGD,dPPGD,dCGD`.
pub fn parse_subset(list: &str) -> Result<Vec<usize>> {
    let t = list.trim();
    if t.eq_ignore_ascii_case("all") {
        return Ok((0..N_FEATURES).collect());
    }
    let mut idx = Vec::new();
    for name in t.split(',').filter(|s| !s.trim().is_empty()) {
        let i = feature_index(name).ok_or_else(|| Error::InvalidInput(format!("unknown feature {name:?}")))?;
        if !idx.contains(&i) {
            idx.push(i);
        }
    }
    if idx.is_empty() {
        return Err(Error::InvalidInput("empty feature subset".into()));
    }
    Ok(idx)
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct FeatureMatrix {
    pub frames: Vec<FeatureFrame>,
    pub labels: Vec<Label>,
    pub patient_ids: Vec<String>,
    pub frame_idx: Vec<usize>,
}

impl FeatureMatrix {
    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn push(&mut self, frame: FeatureFrame, label: Label, patient_id: &str, frame_idx: usize) {
        self.frames.push(frame);
        self.labels.push(label);
        self.patient_ids.push(patient_id.to_string());
        self.frame_idx.push(frame_idx);
    }

    pub fn extend(&mut self, other: FeatureMatrix) {
        self.frames.extend(other.frames);
        self.labels.extend(other.labels);
        self.patient_ids.extend(other.patient_ids);
        self.frame_idx.extend(other.frame_idx);
    }

    pub fn column(&self, index: usize) -> Vec<f64> {
        self.frames.iter().map(|f| f.to_array()[index]).collect()
    }

    /// Rows restricted to the given column indices.
    pub fn select(&self, columns: &[usize]) -> Vec<Vec<f64>> {
        self.frames
            .iter()
            .map(|f| {
                let a = f.to_array();
                columns.iter().map(|&c| a[c]).collect()
            })
            .collect()
    }

    /// Distinct patients in first-appearance order, with their label.
    pub fn patients(&self) -> Vec<(String, Label)> {
        let mut seen = std::collections::HashSet::new();
        let mut out = Vec::new();
        for (p, &l) in self.patient_ids.iter().zip(&self.labels) {
            if seen.insert(p.as_str()) {
                out.push((p.clone(), l));
            }
        }
        out
    }

    /// Checks that values are finite and labels are constant per patient.
    pub fn validate(&self) -> Result<()> {
        let n = self.frames.len();
        if self.labels.len() != n || self.patient_ids.len() != n || self.frame_idx.len() != n {
            return Err(Error::InvalidInput("feature matrix columns have different lengths".into()));
        }
        if self.frames.iter().any(|f| f.to_array().iter().any(|v| !v.is_finite())) {
            return Err(Error::InvalidInput("non-finite feature value".into()));
        }
        let mut by_patient = std::collections::HashMap::new();
        for (p, &l) in self.patient_ids.iter().zip(&self.labels) {
            if *by_patient.entry(p.as_str()).or_insert(l) != l {
                return Err(Error::InvalidInput(format!("patient {p} has mixed labels")));
            }
        }
        Ok(())
    }

    pub fn write_csv(&self, path: &Path, provenance: &str) -> Result<()> {
        let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut out = BufWriter::new(file);
        let io = |e| Error::io(path, e);
        writeln!(out, "# {provenance}").map_err(io)?;
        writeln!(out, "{CSV_HEADER}").map_err(io)?;
        for i in 0..self.len() {
            write!(out, "{},{},{}", self.patient_ids[i], self.labels[i], self.frame_idx[i]).map_err(io)?;
            for v in self.frames[i].to_array() {
                write!(out, ",{v}").map_err(io)?;
            }
            writeln!(out).map_err(io)?;
        }
        out.flush().map_err(io)
    }

    /// Reads a feature CSV; returns the matrix and the text of any leading
    /// `#` comment line.
    pub fn read_csv(path: &Path) -> Result<(Self, Option<String>)> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut m = Self::default();
        let mut provenance = None;
        let mut header_seen = false;
        let bad = |line: usize, what: &str| Error::Parse(format!("{}:{}: {what}", path.display(), line + 1));
        for (lineno, line) in text.lines().enumerate() {
            if let Some(c) = line.strip_prefix('#') {
                provenance.get_or_insert_with(|| c.trim().to_string());
                continue;
            }
            if line.trim().is_empty() {
                continue;
            }
            if !header_seen {
                if line.trim() != CSV_HEADER {
                    return Err(bad(lineno, "unexpected header"));
                }
                header_seen = true;
                continue;
            }
            let parts: Vec<&str> = line.split(',').collect();
            if parts.len() != 3 + N_FEATURES {
                return Err(bad(lineno, "wrong number of columns"));
            }
            let label = Label::parse(parts[1]).ok_or_else(|| bad(lineno, "unknown label"))?;
            let idx = parts[2].parse().map_err(|_| bad(lineno, "bad frame index"))?;
            let mut v = [0.0; N_FEATURES];
            for (slot, s) in v.iter_mut().zip(&parts[3..]) {
                *slot = s.trim().parse().map_err(|_| bad(lineno, "bad number"))?;
            }
            m.push(FeatureFrame::from_array(v), label, parts[0], idx);
        }
        if !header_seen {
            return Err(Error::Parse(format!("{}: missing header", path.display())));
        }
        Ok((m, provenance))
    }
}

/// Per-recording streams on the 10 ms grid, before alignment. `None`
/// entries mark frames a stream does not cover.
#[derive(Debug, Clone, Default)]
pub struct RecordingStreams {
    /// FM, SMOOTH, MODGD, PPGD, CGD deltas.
    pub deltas: [Vec<f64>; 5],
    pub t1: Option<Vec<f64>>,
    pub t2: Option<Vec<f64>>,
    pub balances: Vec<[f64; 3]>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct AssemblyStats {
    pub frames_in: usize,
    pub rows_kept: usize,
    pub rows_dropped: usize,
}

/// Aligns the streams of one recording into feature rows. Frames not covered
/// by every stream, or carrying a non-finite value, are dropped and counted.
pub fn assemble_features(
    streams: &RecordingStreams,
    label: Label,
    patient_id: &str,
) -> Result<(FeatureMatrix, AssemblyStats)> {
    let n = streams
        .deltas
        .iter()
        .map(Vec::len)
        .chain([streams.balances.len()])
        .max()
        .unwrap_or(0);
    let mut m = FeatureMatrix::default();
    let get = |s: &Option<Vec<f64>>, i: usize| s.as_ref().and_then(|v| v.get(i).copied());
    for i in 0..n {
        let d: Option<Vec<f64>> = streams.deltas.iter().map(|s| s.get(i).copied()).collect();
        let (Some(d), Some(t1), Some(t2), Some(b)) =
            (d, get(&streams.t1, i), get(&streams.t2, i), streams.balances.get(i))
        else {
            continue;
        };
        let row = [d[0], d[1], d[2], d[3], d[4], t1, t2, b[0], b[1], b[2]];
        if row.iter().all(|v| v.is_finite()) {
            m.push(FeatureFrame::from_array(row), label, patient_id, i);
        }
    }
    if m.is_empty() {
        return Err(Error::EmptyAfterAlignment);
    }
    let stats = AssemblyStats { frames_in: n, rows_kept: m.len(), rows_dropped: n - m.len() };
    Ok((m, stats))
}
