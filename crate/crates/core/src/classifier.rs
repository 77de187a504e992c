//! One-hidden-layer sigmoid MLP with patient-disjoint cross-validation,
//! majority-vote patient decisions and ROC analysis.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::{FeatureMatrix, Label, FEATURE_NAMES};

pub const DEFAULT_HIDDEN: usize = 16;
pub const DEFAULT_THRESHOLD: f64 = 0.5;

/// The nine feature subsets of the standard comparison table.
pub const STANDARD_SUBSETS: [&str; 9] = [
    "dFM",
    "dCGD",
    "T1,T2",
    "BAL1,T2",
    "BAL1,BAL2,BAL3",
    "dMODGD,dPPGD,dCGD",
    "dFM,dSMOOTH,dMODGD,dPPGD,dCGD",
    "T1,T2,dMODGD,dPPGD,dCGD",
    "all",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
    pub l2_penalty: f64,
    pub hidden: usize,
    /// Weight each sample by the inverse frequency of its class.
    pub class_weighting: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 0.1,
            epochs: 200,
            batch_size: 64,
            seed: 0,
            l2_penalty: 1e-4,
            hidden: DEFAULT_HIDDEN,
            class_weighting: false,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidConfig(m.into()));
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad("learning_rate must be positive");
        }
        if self.epochs == 0 || self.batch_size == 0 || self.hidden == 0 {
            return bad("epochs, batch_size and hidden must be at least 1");
        }
        if !(self.l2_penalty >= 0.0) {
            return bad("l2_penalty must be non-negative");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Normalizer {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl Normalizer {
    pub fn fit(x: &[Vec<f64>]) -> Self {
        let d = x.first().map_or(0, Vec::len);
        let n = x.len().max(1) as f64;
        let mean: Vec<f64> = (0..d).map(|j| x.iter().map(|r| r[j]).sum::<f64>() / n).collect();
        let std = (0..d)
            .map(|j| {
                let v = x.iter().map(|r| (r[j] - mean[j]).powi(2)).sum::<f64>() / n;
                if v > 0.0 {
                    v.sqrt()
                } else {
                    1.0
                }
            })
            .collect();
        Self { mean, std }
    }

    pub fn apply(&self, row: &[f64]) -> Vec<f64> {
        row.iter().zip(self.mean.iter().zip(&self.std)).map(|(v, (m, s))| (v - m) / s).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpModel {
    /// `[hidden][inputs]`.
    pub w1: Vec<Vec<f64>>,
    pub b1: Vec<f64>,
    pub w2: Vec<f64>,
    pub b2: f64,
    pub input_norm: Normalizer,
    pub feature_names: Vec<String>,
    pub config_hash: String,
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

impl MlpModel {
    /// Weights drawn uniformly from [−0.5, 0.5]; identity normalisation.
    pub fn init(n_inputs: usize, hidden: usize, rng: &mut impl Rng) -> Self {
        let mut u = || rng.gen_range(-0.5..=0.5);
        let w1 = (0..hidden).map(|_| (0..n_inputs).map(|_| u()).collect()).collect();
        let b1 = (0..hidden).map(|_| u()).collect();
        let w2 = (0..hidden).map(|_| u()).collect();
        let b2 = u();
        Self {
            w1,
            b1,
            w2,
            b2,
            input_norm: Normalizer { mean: vec![0.0; n_inputs], std: vec![1.0; n_inputs] },
            feature_names: Vec::new(),
            config_hash: String::new(),
        }
    }

    pub fn zeros(n_inputs: usize, hidden: usize) -> Self {
        Self {
            w1: vec![vec![0.0; n_inputs]; hidden],
            b1: vec![0.0; hidden],
            w2: vec![0.0; hidden],
            b2: 0.0,
            input_norm: Normalizer { mean: vec![0.0; n_inputs], std: vec![1.0; n_inputs] },
            feature_names: Vec::new(),
            config_hash: String::new(),
        }
    }

    pub fn n_inputs(&self) -> usize {
        self.input_norm.mean.len()
    }

    pub fn hidden(&self) -> usize {
        self.b1.len()
    }

    /// Output for an already normalised input, with the hidden activations.
    fn forward(&self, z: &[f64]) -> (Vec<f64>, f64) {
        let h: Vec<f64> = self
            .w1
            .iter()
            .zip(&self.b1)
            .map(|(w, b)| sigmoid(w.iter().zip(z).map(|(a, x)| a * x).sum::<f64>() + b))
            .collect();
        let o = sigmoid(h.iter().zip(&self.w2).map(|(a, w)| a * w).sum::<f64>() + self.b2);
        (h, o)
    }

    /// All weights as one vector: w1 row-major, b1, w2, b2.
    pub fn flatten(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self.w1.iter().flatten().copied().collect();
        v.extend(&self.b1);
        v.extend(&self.w2);
        v.push(self.b2);
        v
    }

    pub fn set_flat(&mut self, v: &[f64]) {
        let (h, d) = (self.hidden(), self.n_inputs());
        for (i, row) in self.w1.iter_mut().enumerate() {
            row.copy_from_slice(&v[i * d..(i + 1) * d]);
        }
        self.b1.copy_from_slice(&v[h * d..h * d + h]);
        self.w2.copy_from_slice(&v[h * d + h..h * d + 2 * h]);
        self.b2 = v[h * d + 2 * h];
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model serialises")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(format!("model: {e}")))
    }
}

/// Weighted mean cross-entropy plus `l2/2 · ‖w‖²` (biases excluded), and its
/// gradient in [`MlpModel::flatten`] order. Inputs must be normalised.
pub fn loss_and_gradient(model: &MlpModel, z: &[Vec<f64>], y: &[f64], weights: &[f64], l2: f64) -> (f64, Vec<f64>) {
    let (h, d) = (model.hidden(), model.n_inputs());
    let mut grad = vec![0.0; h * d + 2 * h + 1];
    let total_w: f64 = weights.iter().sum();
    let mut loss = 0.0;
    for ((x, &t), &sw) in z.iter().zip(y).zip(weights) {
        let (hid, o) = model.forward(x);
        let o_c = o.clamp(1e-15, 1.0 - 1e-15);
        loss -= sw * (t * o_c.ln() + (1.0 - t) * (1.0 - o_c).ln());
        // d(loss)/d(output pre-activation) for sigmoid + cross-entropy
        let delta = sw * (o - t);
        grad[h * d + 2 * h] += delta;
        for j in 0..h {
            grad[h * d + h + j] += delta * hid[j];
            let dh = delta * model.w2[j] * hid[j] * (1.0 - hid[j]);
            grad[h * d + j] += dh;
            let row = &mut grad[j * d..(j + 1) * d];
            for (g, xi) in row.iter_mut().zip(x) {
                *g += dh * xi;
            }
        }
    }
    loss /= total_w;
    grad.iter_mut().for_each(|g| *g /= total_w);
    let mut reg = 0.0;
    for j in 0..h {
        for i in 0..d {
            reg += model.w1[j][i] * model.w1[j][i];
            grad[j * d + i] += l2 * model.w1[j][i];
        }
        reg += model.w2[j] * model.w2[j];
        grad[h * d + h + j] += l2 * model.w2[j];
    }
    (loss + 0.5 * l2 * reg, grad)
}

/// Trains on raw (unnormalised) rows. Deterministic given data and config.
pub fn train_mlp(x: &[Vec<f64>], y: &[Label], feature_names: &[String], config: &TrainConfig) -> Result<MlpModel> {
    config.validate()?;
    if x.is_empty() || x.len() != y.len() {
        return Err(Error::InvalidInput(format!("{} rows for {} labels", x.len(), y.len())));
    }
    let d = x[0].len();
    if let Some(r) = x.iter().find(|r| r.len() != d) {
        return Err(Error::ArityMismatch { expected: d, got: r.len() });
    }
    if x.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("non-finite training value".into()));
    }
    let n_pos = y.iter().filter(|&&l| l == Label::Pathological).count();
    if n_pos == 0 || n_pos == y.len() {
        return Err(Error::SingleClass);
    }

    let norm = Normalizer::fit(x);
    let z: Vec<Vec<f64>> = x.iter().map(|r| norm.apply(r)).collect();
    let t: Vec<f64> = y.iter().map(|l| l.target()).collect();
    let sw: Vec<f64> = if config.class_weighting {
        let n = y.len() as f64;
        let (wp, wn) = (n / (2.0 * n_pos as f64), n / (2.0 * (y.len() - n_pos) as f64));
        y.iter().map(|&l| if l == Label::Pathological { wp } else { wn }).collect()
    } else {
        vec![1.0; y.len()]
    };

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut model = MlpModel::init(d, config.hidden, &mut rng);
    let mut order: Vec<usize> = (0..z.len()).collect();
    let mut params = model.flatten();
    for _ in 0..config.epochs {
        order.shuffle(&mut rng);
        for batch in order.chunks(config.batch_size) {
            let bz: Vec<Vec<f64>> = batch.iter().map(|&i| z[i].clone()).collect();
            let bt: Vec<f64> = batch.iter().map(|&i| t[i]).collect();
            let bw: Vec<f64> = batch.iter().map(|&i| sw[i]).collect();
            let (_, g) = loss_and_gradient(&model, &bz, &bt, &bw, config.l2_penalty);
            for (p, gi) in params.iter_mut().zip(&g) {
                *p -= config.learning_rate * gi;
            }
            model.set_flat(&params);
        }
    }
    model.input_norm = norm;
    model.feature_names = feature_names.to_vec();
    Ok(model)
}

/// Posterior probability of PATHOLOGICAL for one raw feature row.
pub fn predict_frame(model: &MlpModel, row: &[f64]) -> Result<f64> {
    if row.len() != model.n_inputs() {
        return Err(Error::ArityMismatch { expected: model.n_inputs(), got: row.len() });
    }
    if row.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("non-finite feature value".into()));
    }
    Ok(model.forward(&model.input_norm.apply(row)).1)
}

/// Majority vote over frames; an exact tie counts as PATHOLOGICAL.
pub fn classify_patient(posteriors: &[f64], frame_threshold: f64) -> Result<Label> {
    if posteriors.is_empty() {
        return Err(Error::Empty);
    }
    let positive = posteriors.iter().filter(|&&p| p >= frame_threshold).count();
    Ok(if 2 * positive >= posteriors.len() { Label::Pathological } else { Label::Normophonic })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RocPoint {
    pub threshold: f64,
    pub tpr: f64,
    pub fpr: f64,
}

/// Sweeps `n_points` thresholds `i/(n_points−1)` over [0, 1] (a frame is
/// positive when its posterior reaches the threshold), then one step beyond
/// 1 so the curve closes at (0, 0).
pub fn roc_curve(posteriors: &[f64], labels: &[Label], n_points: usize) -> Result<Vec<RocPoint>> {
    if posteriors.len() != labels.len() {
        return Err(Error::InvalidInput(format!("{} posteriors for {} labels", posteriors.len(), labels.len())));
    }
    let n_pos = labels.iter().filter(|&&l| l == Label::Pathological).count();
    let n_neg = labels.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::SingleClass);
    }
    let n_points = n_points.max(2);
    let step = 1.0 / (n_points - 1) as f64;
    Ok((0..=n_points)
        .map(|i| {
            let threshold = if i == n_points { 1.0 + step } else { i as f64 * step };
            let (mut tp, mut fp) = (0, 0);
            for (&p, &l) in posteriors.iter().zip(labels) {
                if p >= threshold {
                    match l {
                        Label::Pathological => tp += 1,
                        Label::Normophonic => fp += 1,
                    }
                }
            }
            RocPoint { threshold, tpr: tp as f64 / n_pos as f64, fpr: fp as f64 / n_neg as f64 }
        })
        .collect())
}

/// Trapezoidal area under a ROC curve.
pub fn auc(points: &[RocPoint]) -> f64 {
    let mut p: Vec<(f64, f64)> = points.iter().map(|r| (r.fpr, r.tpr)).collect();
    p.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    p.windows(2).map(|w| (w[1].0 - w[0].0) * (w[1].1 + w[0].1) / 2.0).sum()
}

pub fn write_roc_csv(path: &std::path::Path, points: &[RocPoint], provenance: &str) -> Result<()> {
    let mut text = format!("# {provenance}\nthreshold,tpr,fpr\n");
    for p in points {
        let _ = writeln!(text, "{},{},{}", p.threshold, p.tpr, p.fpr);
    }
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldResult {
    pub fold: usize,
    pub train_frames: usize,
    pub test_frames: usize,
    pub test_patients: Vec<String>,
    pub frame_error_pct: f64,
    pub patient_error_pct: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvReport {
    pub features: Vec<String>,
    pub k: usize,
    pub threshold: f64,
    pub n_frames: usize,
    pub n_patients: usize,
    pub frame_error_pct: f64,
    pub patient_error_pct: f64,
    /// Normophonic patients called pathological, % of normophonic patients.
    pub false_positive_pct: f64,
    /// Pathological patients called normophonic, % of pathological patients.
    pub false_negative_pct: f64,
    pub auc: f64,
    pub per_fold: Vec<FoldResult>,
    pub provenance: String,
}

#[derive(Debug, Clone)]
pub struct CvOutcome {
    pub report: CvReport,
    /// Held-out posterior of every frame, in feature-matrix order.
    pub posteriors: Vec<f64>,
    pub roc: Vec<RocPoint>,
}

/// Patient-disjoint folds stratified by class: each class's patients are
/// shuffled and dealt round-robin. Returns the fold of every patient.
pub fn assign_folds(patients: &[(String, Label)], k: usize, seed: u64) -> Result<BTreeMap<String, usize>> {
    let mut folds = BTreeMap::new();
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_f01d);
    for class in [Label::Normophonic, Label::Pathological] {
        let mut ids: Vec<&String> = patients.iter().filter(|p| p.1 == class).map(|p| &p.0).collect();
        if ids.len() < k {
            return Err(Error::TooFewPatients { got: ids.len(), needed: k });
        }
        ids.sort();
        ids.shuffle(&mut rng);
        for (i, id) in ids.into_iter().enumerate() {
            folds.insert(id.clone(), i % k);
        }
    }
    Ok(folds)
}

pub fn cross_validate(
    m: &FeatureMatrix,
    k: usize,
    config: &TrainConfig,
    subset: &[usize],
    threshold: f64,
    provenance: &str,
) -> Result<CvOutcome> {
    config.validate()?;
    if k < 2 {
        return Err(Error::InvalidConfig("k must be at least 2".into()));
    }
    m.validate()?;
    let patients = m.patients();
    let folds = assign_folds(&patients, k, config.seed)?;
    let fold_of: Vec<usize> = m.patient_ids.iter().map(|p| folds[p]).collect();
    let rows = m.select(subset);
    let names: Vec<String> = subset.iter().map(|&i| FEATURE_NAMES[i].to_string()).collect();

    let per_fold: Vec<(FoldResult, Vec<(usize, f64)>)> = (0..k)
        .into_par_iter()
        .map(|f| -> Result<_> {
            let train: Vec<usize> = (0..m.len()).filter(|&i| fold_of[i] != f).collect();
            let test: Vec<usize> = (0..m.len()).filter(|&i| fold_of[i] == f).collect();
            let train_ids: HashSet<&str> = train.iter().map(|&i| m.patient_ids[i].as_str()).collect();
            assert!(
                test.iter().all(|&i| !train_ids.contains(m.patient_ids[i].as_str())),
                "patient leaked across folds"
            );
            let x: Vec<Vec<f64>> = train.iter().map(|&i| rows[i].clone()).collect();
            let y: Vec<Label> = train.iter().map(|&i| m.labels[i]).collect();
            let model = train_mlp(&x, &y, &names, config)?;
            let post: Vec<(usize, f64)> =
                test.iter().map(|&i| predict_frame(&model, &rows[i]).map(|p| (i, p))).collect::<Result<_>>()?;

            let frame_errors = post.iter().filter(|&&(i, p)| (p >= threshold) != (m.labels[i] == Label::Pathological)).count();
            let decisions = patient_decisions(m, &post, threshold)?;
            let patient_errors = decisions.iter().filter(|(_, (truth, got))| truth != got).count();
            let result = FoldResult {
                fold: f,
                train_frames: train.len(),
                test_frames: test.len(),
                test_patients: decisions.keys().cloned().collect(),
                frame_error_pct: pct(frame_errors, test.len()),
                patient_error_pct: pct(patient_errors, decisions.len()),
            };
            Ok((result, post))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut posteriors = vec![f64::NAN; m.len()];
    for (_, post) in &per_fold {
        for &(i, p) in post {
            posteriors[i] = p;
        }
    }
    let frame_errors = (0..m.len()).filter(|&i| (posteriors[i] >= threshold) != (m.labels[i] == Label::Pathological)).count();
    let all: Vec<(usize, f64)> = posteriors.iter().copied().enumerate().collect();
    let decisions = patient_decisions(m, &all, threshold)?;
    let count = |truth: Label, got: Label| decisions.values().filter(|&&(t, g)| t == truth && g == got).count();
    let n_normo = decisions.values().filter(|d| d.0 == Label::Normophonic).count();
    let n_patho = decisions.len() - n_normo;
    let fp = count(Label::Normophonic, Label::Pathological);
    let fn_ = count(Label::Pathological, Label::Normophonic);
    let roc = roc_curve(&posteriors, &m.labels, 101)?;

    let report = CvReport {
        features: names,
        k,
        threshold,
        n_frames: m.len(),
        n_patients: decisions.len(),
        frame_error_pct: pct(frame_errors, m.len()),
        patient_error_pct: pct(fp + fn_, decisions.len()),
        false_positive_pct: pct(fp, n_normo),
        false_negative_pct: pct(fn_, n_patho),
        auc: auc(&roc),
        per_fold: per_fold.into_iter().map(|(r, _)| r).collect(),
        provenance: provenance.into(),
    };
    Ok(CvOutcome { report, posteriors, roc })
}

fn pct(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        100.0 * num as f64 / den as f64
    }
}

/// `(true label, decided label)` per patient for the given frame posteriors.
fn patient_decisions(m: &FeatureMatrix, post: &[(usize, f64)], threshold: f64) -> Result<BTreeMap<String, (Label, Label)>> {
    let mut by_patient: HashMap<&str, (Label, Vec<f64>)> = HashMap::new();
    for &(i, p) in post {
        by_patient.entry(m.patient_ids[i].as_str()).or_insert((m.labels[i], Vec::new())).1.push(p);
    }
    by_patient
        .into_iter()
        .map(|(id, (truth, ps))| Ok((id.to_string(), (truth, classify_patient(&ps, threshold)?))))
        .collect()
}

impl CvReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialises")
    }

    pub fn subset_label(&self) -> String {
        if self.features.len() == FEATURE_NAMES.len() {
            "All 10 features".into()
        } else {
            self.features.join(",")
        }
    }
}

/// Plain-text comparison table, one row per report.
pub fn cv_table(reports: &[CvReport]) -> String {
    let mut s = String::new();
    if let Some(r) = reports.first() {
        let _ = writeln!(s, "# {}", r.provenance);
    }
    let _ = writeln!(
        s,
        "{:<34} {:>12} {:>12} {:>8} {:>8} {:>6}",
        "Features used", "frame err %", "patient err %", "FP %", "FN %", "AUC"
    );
    for r in reports {
        let _ = writeln!(
            s,
            "{:<34} {:>12.2} {:>12.2} {:>8.2} {:>8.2} {:>6.3}",
            r.subset_label(),
            r.frame_error_pct,
            r.patient_error_pct,
            r.false_positive_pct,
            r.false_negative_pct,
            r.auc
        );
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::FeatureFrame;
    use rand_distr::{Distribution, Normal};

    fn names(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("x{i}")).collect()
    }

    fn blobs(seed: u64) -> (Vec<Vec<f64>>, Vec<Label>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let noise = Normal::new(0.0, 1.0).unwrap();
        let mut x = Vec::new();
        let mut y = Vec::new();
        for i in 0..400 {
            let (c, l) = if i % 2 == 0 { (-3.0, Label::Normophonic) } else { (3.0, Label::Pathological) };
            // centres 6σ apart, samples clipped to leave a 2σ margin
            let a: f64 = noise.sample(&mut rng);
            let b: f64 = noise.sample(&mut rng);
            x.push(vec![c + a.clamp(-2.0, 2.0), c + b.clamp(-2.0, 2.0)]);
            y.push(l);
        }
        (x, y)
    }

    fn xor(seed: u64) -> (Vec<Vec<f64>>, Vec<Label>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let noise = Normal::new(0.0, 0.05).unwrap();
        let mut x = Vec::new();
        let mut y = Vec::new();
        for _ in 0..100 {
            for (a, b) in [(0.0, 0.0), (0.0, 1.0), (1.0, 0.0), (1.0, 1.0)] {
                x.push(vec![a + noise.sample(&mut rng), b + noise.sample(&mut rng)]);
                y.push(if (a == 1.0) != (b == 1.0) { Label::Pathological } else { Label::Normophonic });
            }
        }
        (x, y)
    }

    fn error_rate(model: &MlpModel, x: &[Vec<f64>], y: &[Label]) -> f64 {
        let wrong = x
            .iter()
            .zip(y)
            .filter(|(r, l)| (predict_frame(model, r).unwrap() >= 0.5) != (**l == Label::Pathological))
            .count();
        wrong as f64 / x.len() as f64
    }

    #[test]
    fn separable_blobs_are_learned() {
        let (x, y) = blobs(1);
        let model = train_mlp(&x, &y, &names(2), &TrainConfig::default()).unwrap();
        assert_eq!(error_rate(&model, &x, &y), 0.0);
        let deep = x.iter().zip(&y).find(|(r, l)| **l == Label::Pathological && r[0] > 4.0 && r[1] > 4.0).unwrap();
        assert!(predict_frame(&model, deep.0).unwrap() > 0.9);
    }

    #[test]
    fn xor_is_learned() {
        let (x, y) = xor(2);
        let cfg = TrainConfig { epochs: 2000, learning_rate: 0.5, ..Default::default() };
        let model = train_mlp(&x, &y, &names(2), &cfg).unwrap();
        assert!(error_rate(&model, &x, &y) < 0.05);
    }

    #[test]
    fn training_is_deterministic() {
        let (x, y) = blobs(4);
        let cfg = TrainConfig { epochs: 20, seed: 9, ..Default::default() };
        let a = train_mlp(&x, &y, &names(2), &cfg).unwrap();
        let b = train_mlp(&x, &y, &names(2), &cfg).unwrap();
        assert_eq!(a.to_json(), b.to_json());
        assert_eq!(MlpModel::from_json(&a.to_json()).unwrap(), a);
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for trial in 0..5 {
            let (d, h) = (3 + trial % 3, 4 + trial);
            let mut model = MlpModel::init(d, h, &mut rng);
            let z: Vec<Vec<f64>> = (0..20).map(|_| (0..d).map(|_| rng.gen_range(-2.0..2.0)).collect()).collect();
            let t: Vec<f64> = (0..20).map(|_| f64::from(rng.gen::<bool>() as u8)).collect();
            let w: Vec<f64> = (0..20).map(|_| rng.gen_range(0.5..2.0)).collect();
            let l2 = 0.01;
            let (_, g) = loss_and_gradient(&model, &z, &t, &w, l2);
            let p = model.flatten();
            let hstep = 1e-5;
            for i in 0..p.len() {
                let mut q = p.clone();
                q[i] = p[i] + hstep;
                model.set_flat(&q);
                let up = loss_and_gradient(&model, &z, &t, &w, l2).0;
                q[i] = p[i] - hstep;
                model.set_flat(&q);
                let down = loss_and_gradient(&model, &z, &t, &w, l2).0;
                model.set_flat(&p);
                let num = (up - down) / (2.0 * hstep);
                let rel = (num - g[i]).abs() / num.abs().max(g[i].abs()).max(1e-8);
                assert!(rel < 1e-4, "param {i}: analytic {} numeric {num}", g[i]);
            }
        }
    }

    #[test]
    fn prediction_contract() {
        let zero = MlpModel::zeros(3, 16);
        assert_eq!(predict_frame(&zero, &[1.0, -2.0, 5.0]).unwrap(), 0.5);
        assert!(matches!(predict_frame(&zero, &[1.0]), Err(Error::ArityMismatch { expected: 3, got: 1 })));
        assert!(matches!(predict_frame(&zero, &[1.0, f64::NAN, 0.0]), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn single_class_rejected() {
        let x = vec![vec![0.0], vec![1.0]];
        let y = vec![Label::Normophonic; 2];
        assert!(matches!(train_mlp(&x, &y, &names(1), &TrainConfig::default()), Err(Error::SingleClass)));
    }

    #[test]
    fn patient_vote() {
        assert_eq!(classify_patient(&[0.9, 0.8, 0.2], 0.5).unwrap(), Label::Pathological);
        assert_eq!(classify_patient(&[0.1, 0.2, 0.3], 0.5).unwrap(), Label::Normophonic);
        assert_eq!(classify_patient(&[0.9, 0.1], 0.5).unwrap(), Label::Pathological);
        assert!(matches!(classify_patient(&[], 0.5), Err(Error::Empty)));
    }

    proptest::proptest! {
        #[test]
        fn raising_threshold_never_makes_a_patient_pathological(
            ps in proptest::collection::vec(0.0f64..1.0, 1..30), t1 in 0.0f64..1.0, dt in 0.0f64..1.0
        ) {
            if classify_patient(&ps, t1).unwrap() == Label::Normophonic {
                proptest::prop_assert_eq!(classify_patient(&ps, t1 + dt).unwrap(), Label::Normophonic);
            }
        }
    }

    #[test]
    fn roc_examples() {
        let labels: Vec<Label> = (0..10).map(|i| if i < 5 { Label::Pathological } else { Label::Normophonic }).collect();
        let perfect: Vec<f64> = labels.iter().map(|l| l.target()).collect();
        let roc = roc_curve(&perfect, &labels, 101).unwrap();
        assert!(roc.iter().any(|p| p.fpr == 0.0 && p.tpr == 1.0));
        assert!((auc(&roc) - 1.0).abs() < 1e-12);

        let flat = roc_curve(&[0.5; 10], &labels, 101).unwrap();
        assert!(flat.iter().all(|p| (p.fpr, p.tpr) == (0.0, 0.0) || (p.fpr, p.tpr) == (1.0, 1.0)));
        assert!(flat.iter().any(|p| (p.fpr, p.tpr) == (0.0, 0.0)));
        assert!(flat.iter().any(|p| (p.fpr, p.tpr) == (1.0, 1.0)));
        for w in roc.windows(2) {
            assert!(w[1].tpr <= w[0].tpr && w[1].fpr <= w[0].fpr);
        }
        assert!(matches!(roc_curve(&[0.1], &[Label::Normophonic], 11), Err(Error::SingleClass)));
    }

    #[test]
    fn random_posteriors_give_chance_auc() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let n = 10_000;
        let p: Vec<f64> = (0..n).map(|_| rng.gen()).collect();
        let l: Vec<Label> = (0..n).map(|_| if rng.gen::<bool>() { Label::Pathological } else { Label::Normophonic }).collect();
        let a = auc(&roc_curve(&p, &l, 101).unwrap());
        assert!((a - 0.5).abs() < 0.02, "auc {a}");
    }

    fn matrix(n_per_class: usize, frames: usize, informative: bool, seed: u64) -> FeatureMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut m = FeatureMatrix::default();
        for (class, label) in [(0, Label::Normophonic), (1, Label::Pathological)] {
            for p in 0..n_per_class {
                let id = format!("{}{p:03}", label.short());
                for f in 0..frames {
                    let mut v = [0.0; 10];
                    for x in v.iter_mut() {
                        *x = rng.gen();
                    }
                    if informative {
                        v[4] = class as f64;
                    }
                    m.push(FeatureFrame::from_array(v), label, &id, f);
                }
            }
        }
        m
    }

    #[test]
    fn label_feature_gives_zero_error() {
        let m = matrix(12, 8, true, 1);
        let cfg = TrainConfig { epochs: 50, ..Default::default() };
        let out = cross_validate(&m, 10, &cfg, &[4], 0.5, "test").unwrap();
        assert_eq!(out.report.frame_error_pct, 0.0);
        assert_eq!(out.report.patient_error_pct, 0.0);
        assert_eq!(out.report.n_patients, 24);
        let total: usize = out.report.per_fold.iter().map(|f| f.test_patients.len()).sum();
        assert_eq!(total, 24);
        let mut seen = HashSet::new();
        for f in &out.report.per_fold {
            for p in &f.test_patients {
                assert!(seen.insert(p.clone()), "{p} in two folds");
            }
        }
    }

    #[test]
    fn noise_feature_gives_chance_error() {
        let m = matrix(50, 10, false, 2);
        let cfg = TrainConfig { epochs: 20, ..Default::default() };
        let out = cross_validate(&m, 10, &cfg, &[0], 0.5, "test").unwrap();
        assert!((out.report.patient_error_pct - 50.0).abs() <= 10.0, "{}", out.report.patient_error_pct);
    }

    #[test]
    fn cross_validation_is_reproducible() {
        let m = matrix(10, 6, true, 3);
        let cfg = TrainConfig { epochs: 10, seed: 4, ..Default::default() };
        let a = cross_validate(&m, 10, &cfg, &[0, 4], 0.5, "x").unwrap();
        let b = cross_validate(&m, 10, &cfg, &[0, 4], 0.5, "x").unwrap();
        assert_eq!(a.report.to_json(), b.report.to_json());
        assert_eq!(a.posteriors, b.posteriors);
    }

    #[test]
    fn too_few_patients() {
        let m = matrix(5, 3, true, 1);
        assert!(matches!(
            cross_validate(&m, 10, &TrainConfig::default(), &[4], 0.5, ""),
            Err(Error::TooFewPatients { got: 5, needed: 10 })
        ));
    }
}
