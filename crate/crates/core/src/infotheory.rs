//! Histogram estimates of feature/label mutual information, normalised by
//! the label entropy.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::{FeatureMatrix, Label, FEATURE_NAMES};

pub const DEFAULT_N_BINS: usize = 50;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Discretized {
    pub codes: Vec<usize>,
    /// Number of non-empty bins actually used.
    pub n_bins: usize,
}

/// Equal-frequency binning. Sample `i` of rank `r` (in sorted order) falls in
/// bin `floor(r·n_bins/N)`, except that equal values always share the bin of
/// the first of them; bins left empty by ties are collapsed.
pub fn discretize(x: &[f64], n_bins: usize) -> Result<Discretized> {
    if n_bins == 0 {
        return Err(Error::InvalidConfig("n_bins must be positive".into()));
    }
    if x.len() < n_bins {
        return Err(Error::TooFewSamples { got: x.len(), needed: n_bins });
    }
    if x.iter().any(|v| v.is_nan()) {
        return Err(Error::InvalidInput("NaN in feature".into()));
    }
    let n = x.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| x[a].total_cmp(&x[b]));

    let mut raw = vec![0usize; n];
    let mut group_bin = 0;
    for (rank, &i) in order.iter().enumerate() {
        if rank == 0 || x[i] != x[order[rank - 1]] {
            group_bin = rank * n_bins / n;
        }
        raw[i] = group_bin;
    }

    let mut remap = vec![usize::MAX; n_bins];
    let mut used = 0;
    for &i in &order {
        let b = raw[i];
        if remap[b] == usize::MAX {
            remap[b] = used;
            used += 1;
        }
    }
    Ok(Discretized { codes: raw.iter().map(|&b| remap[b]).collect(), n_bins: used })
}

fn entropy_of_counts(counts: impl Iterator<Item = usize>, total: usize) -> f64 {
    let n = total as f64;
    counts
        .filter(|&c| c > 0)
        .map(|c| {
            let p = c as f64 / n;
            -p * p.log2()
        })
        .sum()
}

/// Empirical entropy in bits.
pub fn entropy(labels: &[Label]) -> Result<f64> {
    if labels.is_empty() {
        return Err(Error::Empty);
    }
    let mut counts = [0usize; 2];
    for l in labels {
        counts[l.index()] += 1;
    }
    Ok(entropy_of_counts(counts.into_iter(), labels.len()))
}

/// Plug-in mutual information in bits between two code sequences.
pub fn mutual_information(a: &[usize], na: usize, b: &[usize], nb: usize) -> f64 {
    let n = a.len();
    let mut joint = vec![0usize; na * nb];
    let mut ma = vec![0usize; na];
    let mut mb = vec![0usize; nb];
    for (&x, &y) in a.iter().zip(b) {
        joint[x * nb + y] += 1;
        ma[x] += 1;
        mb[y] += 1;
    }
    let nf = n as f64;
    let mut mi = 0.0;
    for x in 0..na {
        for y in 0..nb {
            let c = joint[x * nb + y];
            if c > 0 {
                let pxy = c as f64 / nf;
                mi += pxy * (pxy * nf * nf / (ma[x] as f64 * mb[y] as f64)).log2();
            }
        }
    }
    mi
}

fn check_aligned(len: usize, labels: &[Label]) -> Result<f64> {
    if len != labels.len() {
        return Err(Error::InvalidInput(format!("{len} feature values for {} labels", labels.len())));
    }
    let h = entropy(labels)?;
    if h <= 0.0 {
        return Err(Error::ZeroLabelEntropy);
    }
    Ok(h)
}

fn label_codes(labels: &[Label]) -> Vec<usize> {
    labels.iter().map(|l| l.index()).collect()
}

/// `100 · I(X; C) / H(C)` with `X` quantile-binned.
pub fn normalized_mi(feature: &[f64], labels: &[Label], n_bins: usize) -> Result<f64> {
    let h = check_aligned(feature.len(), labels)?;
    let d = discretize(feature, n_bins)?;
    Ok(100.0 * mutual_information(&d.codes, d.n_bins, &label_codes(labels), 2) / h)
}

/// `100 · I((X1, X2); C) / H(C)` on the product of the two binnings.
pub fn joint_normalized_mi(f1: &[f64], f2: &[f64], labels: &[Label], n_bins: usize) -> Result<f64> {
    let h = check_aligned(f1.len(), labels)?;
    check_aligned(f2.len(), labels)?;
    let d1 = discretize(f1, n_bins)?;
    let d2 = discretize(f2, n_bins)?;
    let joint: Vec<usize> = d1.codes.iter().zip(&d2.codes).map(|(&a, &b)| a * d2.n_bins + b).collect();
    Ok(100.0 * mutual_information(&joint, d1.n_bins * d2.n_bins, &label_codes(labels), 2) / h)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureMi {
    pub name: String,
    pub nmi: f64,
    pub bins_used: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairMi {
    pub a: String,
    pub b: String,
    pub joint_nmi: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MIReport {
    pub per_feature_nmi: Vec<FeatureMi>,
    pub pairwise_joint_nmi: Vec<PairMi>,
    pub label_entropy_bits: f64,
    pub n_bins: usize,
    pub n_samples: usize,
    pub provenance: String,
}

/// MI of every feature column and, optionally, of every unordered pair.
pub fn mi_report(m: &FeatureMatrix, n_bins: usize, pairs: bool, provenance: &str) -> Result<MIReport> {
    let h = check_aligned(m.len(), &m.labels)?;
    let columns: Vec<Vec<f64>> = (0..FEATURE_NAMES.len()).map(|i| m.column(i)).collect();
    let codes = columns.iter().map(|c| discretize(c, n_bins)).collect::<Result<Vec<_>>>()?;
    let lc = label_codes(&m.labels);
    let per_feature_nmi = FEATURE_NAMES
        .iter()
        .zip(&codes)
        .map(|(name, d)| FeatureMi {
            name: name.to_string(),
            nmi: 100.0 * mutual_information(&d.codes, d.n_bins, &lc, 2) / h,
            bins_used: d.n_bins,
        })
        .collect();
    let mut pairwise_joint_nmi = Vec::new();
    if pairs {
        for i in 0..codes.len() {
            for j in i + 1..codes.len() {
                let (a, b) = (&codes[i], &codes[j]);
                let joint: Vec<usize> = a.codes.iter().zip(&b.codes).map(|(&x, &y)| x * b.n_bins + y).collect();
                pairwise_joint_nmi.push(PairMi {
                    a: FEATURE_NAMES[i].into(),
                    b: FEATURE_NAMES[j].into(),
                    joint_nmi: 100.0 * mutual_information(&joint, a.n_bins * b.n_bins, &lc, 2) / h,
                });
            }
        }
    }
    Ok(MIReport {
        per_feature_nmi,
        pairwise_joint_nmi,
        label_entropy_bits: h,
        n_bins,
        n_samples: m.len(),
        provenance: provenance.into(),
    })
}

impl MIReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialises")
    }

    pub fn to_table(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "# {}", self.provenance);
        let _ = writeln!(
            s,
            "# samples={} bins={} H(C)={:.4} bits",
            self.n_samples, self.n_bins, self.label_entropy_bits
        );
        let _ = writeln!(s, "{:<10} {:>10}", "feature", "NMI (%)");
        for f in &self.per_feature_nmi {
            let _ = writeln!(s, "{:<10} {:>10.2}", f.name, f.nmi);
        }
        if !self.pairwise_joint_nmi.is_empty() {
            let mut pairs = self.pairwise_joint_nmi.clone();
            pairs.sort_by(|x, y| y.joint_nmi.total_cmp(&x.joint_nmi));
            let _ = writeln!(s, "\n{:<20} {:>10}", "pair", "joint (%)");
            for p in &pairs {
                let _ = writeln!(s, "{:<20} {:>10.2}", format!("{}+{}", p.a, p.b), p.joint_nmi);
            }
        }
        s
    }
}
