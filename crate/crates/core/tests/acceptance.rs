//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any
//! failure. Runs without the libtest harness so the lines always print.

use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use phasevoice::classifier::{classify_patient, loss_and_gradient, predict_frame, train_mlp, MlpModel, TrainConfig};
use phasevoice::features::{read_manifest, FeatureMatrix, Label, FEATURE_NAMES};
use phasevoice::infotheory::{entropy, joint_normalized_mi, normalized_mi};
use phasevoice::mixed_phase::{ccd_decompose, complex_cepstrum, detect_gci, CcdConfig};
use phasevoice::signal::{blackman, estimate_f0, load_wav, write_wav_float, Frame, FrameGrid, RatePolicy};
use phasevoice::spectra::{cgd_frame, group_delay_raw, modgd_frame, ppgd_frame, CgdConfig, ModGdConfig};
use phasevoice::synth::{synth_vowel, SynthConfig};

type Check = Result<String, String>;

const N_FFT: usize = 1024;

fn ensure(ok: bool, msg: String) -> Check {
    if ok {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn unguarded(x: &[f64], n_fft: usize) -> Vec<bool> {
    let p: Vec<f64> = (0..=n_fft / 2).map(|k| naive_dft(x, n_fft, k).0.powi(2) + naive_dft(x, n_fft, k).1.powi(2)).collect();
    let max = p.iter().cloned().fold(0.0, f64::max);
    p.iter().map(|&v| v >= 1e-10 * max && v > 0.0).collect()
}

/// (re, im) of `Σ x(n) e^{-j2πkn/N}` by direct summation.
fn naive_dft(x: &[f64], n_fft: usize, k: usize) -> (f64, f64) {
    let w = -2.0 * std::f64::consts::PI * k as f64 / n_fft as f64;
    x.iter().enumerate().fold((0.0, 0.0), |(re, im), (n, &v)| (re + v * (w * n as f64).cos(), im + v * (w * n as f64).sin()))
}

fn random_frame(rng: &mut ChaCha8Rng, len: usize) -> Vec<f64> {
    let w = blackman(len);
    w.iter().map(|wi| wi * rng.sample::<f64, _>(StandardNormal)).collect()
}

fn clean_vowel(f0: f64, seconds: f64, noise_db: f64) -> (phasevoice::signal::AudioSignal, phasevoice::synth::SynthTruth) {
    synth_vowel(&SynthConfig { f0_hz: f0, duration_s: seconds, noise_db, seed: 21, ..Default::default() }).unwrap()
}

fn group_delay_analytics() -> Check {
    let mut x = vec![0.0; 480];
    x[5] = 1.0;
    let tau = group_delay_raw(&Frame::raw(x), N_FFT).map_err(|e| e.to_string())?;
    let err_delta = tau.iter().map(|t| (t - 5.0).abs()).fold(0.0, f64::max);

    let a: f64 = 0.5;
    let len = (1e-12f64.ln() / a.ln()).ceil() as usize + 1;
    let x: Vec<f64> = (0..len).map(|n| a.powi(n as i32)).collect();
    let tau = group_delay_raw(&Frame::raw(x), N_FFT).map_err(|e| e.to_string())?;
    let err_pole = tau
        .iter()
        .enumerate()
        .map(|(k, t)| {
            let w = 2.0 * std::f64::consts::PI * k as f64 / N_FFT as f64;
            let want = (a * w.cos() - a * a) / (1.0 - 2.0 * a * w.cos() + a * a);
            (t - want).abs()
        })
        .fold(0.0, f64::max);
    ensure(
        err_delta < 1e-9 && (tau[0] - 1.0).abs() < 1e-3 && err_pole < 1e-3,
        format!("delay max err {err_delta:.1e}, pole tau(0) = {:.6}, max err vs analytic {err_pole:.1e}", tau[0]),
    )
}

fn ppgd_identity() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let x = random_frame(&mut rng, 480);
        let keep = unguarded(&x, N_FFT);
        let frame = Frame::raw(x.clone());
        let pp = ppgd_frame(&frame, N_FFT).unwrap();
        let gd = group_delay_raw(&frame, N_FFT).unwrap();
        for k in (0..pp.len()).filter(|&k| keep[k]) {
            let (re, im) = naive_dft(&x, N_FFT, k);
            let want = (re * re + im * im) * gd[k];
            worst = worst.max((pp[k] - want).abs() / want.abs().max(1e-300));
        }
    }
    ensure(worst < 1e-6, format!("worst relative deviation {worst:.1e} over 100 frames"))
}

fn modgd_degeneracy_and_spikes() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let identity = ModGdConfig { alpha: 1.0, gamma: 1.0, lifter_len: N_FFT };
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let frame = Frame::raw(random_frame(&mut rng, 480));
        let m = modgd_frame(&frame, &identity, N_FFT).unwrap();
        let g = group_delay_raw(&frame, N_FFT).unwrap();
        for (a, b) in m.iter().zip(&g) {
            worst = worst.max((a - b).abs() / b.abs().max(1.0));
        }
    }

    let spike = |v: &[f64]| {
        let mut a: Vec<f64> = v.iter().map(|x| x.abs()).collect();
        a.sort_by(f64::total_cmp);
        a[a.len() - 1] / a[a.len() / 2]
    };
    let median = |mut v: Vec<f64>| {
        v.sort_by(f64::total_cmp);
        v[v.len() / 2]
    };
    let (sig, _) = clean_vowel(120.0, 1.0, -30.0);
    let w = blackman(480);
    let frames: Vec<Frame> = (10..88)
        .map(|t| Frame::raw(sig.samples()[t * 160..t * 160 + 480].iter().zip(&w).map(|(a, b)| a * b).collect()))
        .collect();
    let raw = median(frames.iter().map(|f| spike(&group_delay_raw(f, N_FFT).unwrap())).collect());
    let mgd = median(frames.iter().map(|f| spike(&modgd_frame(f, &ModGdConfig::default(), N_FFT).unwrap())).collect());
    ensure(
        worst < 1e-6 && mgd < raw,
        format!("degenerate max err {worst:.1e}; vowel max/median spike ratio ModGD {mgd:.2} < raw {raw:.2}"),
    )
}

fn cgd_localisation() -> Check {
    // two-pole resonator at 1 kHz, 80 Hz bandwidth, impulse response
    let (f, bw, sr) = (1000.0, 80.0, 16000.0);
    let r: f64 = (-std::f64::consts::PI * bw / sr).exp();
    let c = 2.0 * r * (2.0 * std::f64::consts::PI * f / sr).cos();
    let mut h = vec![0.0; 480];
    for n in 0..480 {
        let x = if n == 0 { 1.0 } else { 0.0 };
        h[n] = x + c * if n >= 1 { h[n - 1] } else { 0.0 } - r * r * if n >= 2 { h[n - 2] } else { 0.0 };
    }
    let cgd = cgd_frame(&Frame::raw(h), &CgdConfig::default(), N_FFT).unwrap();
    let peak = cgd
        .iter()
        .enumerate()
        .skip(1)
        .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
        .map(|(k, _)| k)
        .unwrap();
    let target = (f / (sr / N_FFT as f64)).round() as usize;

    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let near_unit = CgdConfig { rho: 1.0 + 1e-12 };
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let v = cgd_frame(&Frame::raw(random_frame(&mut rng, 480)), &near_unit, N_FFT).unwrap();
        worst = worst.max(v.iter().map(|t| t.abs()).fold(0.0, f64::max));
    }
    ensure(
        peak.abs_diff(target) <= 2 && worst < 1e-3,
        format!("resonance extremum at bin {peak} (1 kHz = bin {target}); zero-phase |tau| at rho=1+1e-12 <= {worst:.1e}"),
    )
}

fn cepstrum_sidedness() -> Check {
    let a: f64 = 0.9;
    let n_fft = 4096;
    let len = (1e-12f64.ln() / a.ln()).ceil() as usize + 1;
    let x: Vec<f64> = (0..len).map(|n| a.powi(n as i32)).collect();
    let c = complex_cepstrum(&x, n_fft).map_err(|e| e.to_string())?;
    let coeff_err = (1..200).map(|q| (c.coeffs[q] - a.powi(q as i32) / q as f64).abs()).fold(0.0, f64::max);
    let anti = c.anticausal_energy_fraction();

    let rev: Vec<f64> = x.iter().rev().copied().collect();
    let m = complex_cepstrum(&rev, n_fft).map_err(|e| e.to_string())?;
    let causal = m.causal_energy_fraction();
    let mirror_err = (1..200).map(|q| (m.coeffs[n_fft - q] - c.coeffs[q]).abs()).fold(0.0, f64::max);
    ensure(
        anti < 1e-3 && causal < 1e-3 && coeff_err < 1e-6 && mirror_err < 1e-6,
        format!(
            "min-phase anticausal {anti:.1e}, a^q/q err {coeff_err:.1e}; reversed causal {causal:.1e}, mirror err {mirror_err:.1e}"
        ),
    )
}

/// Correlation of two cycles at the best lag within ±`max_lag`.
fn best_correlation(a: &[f64], b: &[f64], max_lag: isize) -> f64 {
    let n = a.len() as isize;
    (-max_lag..=max_lag)
        .map(|lag| {
            let pairs: Vec<(f64, f64)> = (0..n)
                .filter_map(|i| {
                    let j = i + lag;
                    (j >= 0 && j < n).then(|| (a[i as usize], b[j as usize]))
                })
                .collect();
            let m = pairs.len() as f64;
            let ma = pairs.iter().map(|p| p.0).sum::<f64>() / m;
            let mb = pairs.iter().map(|p| p.1).sum::<f64>() / m;
            let num: f64 = pairs.iter().map(|p| (p.0 - ma) * (p.1 - mb)).sum();
            let da: f64 = pairs.iter().map(|p| (p.0 - ma).powi(2)).sum();
            let db: f64 = pairs.iter().map(|p| (p.1 - mb).powi(2)).sum();
            num / (da * db).sqrt()
        })
        .fold(f64::NEG_INFINITY, f64::max)
}

fn ccd_recovery() -> Check {
    let (sig, truth) = clean_vowel(120.0, 10.0, -200.0);
    let grid = FrameGrid::default();
    let start = Instant::now();
    let pitch = estimate_f0(&sig, grid);
    let gci = detect_gci(&sig, &pitch, grid).map_err(|e| e.to_string())?;
    let out = ccd_decompose(&sig, &gci, &pitch, grid, &CcdConfig::default()).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed().as_secs_f64();

    let last = *truth.excitation_instants.last().unwrap();
    let (mut good, mut total) = (0, 0);
    for c in out.cycles.iter().filter(|c| c.gci > 400 && c.gci + 400 < last) {
        let (k, &g) = truth
            .excitation_instants
            .iter()
            .enumerate()
            .min_by_key(|(_, &g)| g.abs_diff(c.gci))
            .unwrap();
        total += 1;
        if g.abs_diff(c.gci) > 4 {
            continue;
        }
        let open = &truth.glottal_cycles[k];
        let mut reference = vec![0.0; c.t0_samples];
        let n = open.len().min(c.t0_samples);
        reference[c.t0_samples - n..].copy_from_slice(&open[open.len() - n..]);
        if best_correlation(&c.waveform, &reference, 8) >= 0.95 {
            good += 1;
        }
    }
    let frac = good as f64 / total.max(1) as f64;
    ensure(
        total > 1000 && frac >= 0.9 && elapsed < 30.0,
        format!("{good}/{total} cycles with corr >= 0.95 ({:.1}%), 10 s analysed in {elapsed:.2} s", 100.0 * frac),
    )
}

fn gci_accuracy() -> Check {
    let grid = FrameGrid::default();
    let mut parts = Vec::new();
    let mut ok = true;
    for f0 in [90.0, 100.0, 120.0, 150.0, 180.0, 220.0] {
        let (sig, truth) = clean_vowel(f0, 2.0, -60.0);
        let pitch = estimate_f0(&sig, grid);
        let gci = detect_gci(&sig, &pitch, grid).map_err(|e| e.to_string())?;
        let hits = gci
            .instants
            .iter()
            .filter(|&&d| truth.excitation_instants.iter().any(|&t| t.abs_diff(d) <= 4))
            .count();
        let rate = hits as f64 / gci.len().max(1) as f64;
        ok &= rate >= 0.95 && gci.len() as f64 >= 0.9 * truth.excitation_instants.len() as f64;
        parts.push(format!("{f0} Hz {:.1}% of {}", 100.0 * rate, gci.len()));
    }
    ensure(ok, format!("within +/-0.25 ms: {}", parts.join(", ")))
}

fn mi_estimator() -> Check {
    let mut labels = vec![Label::Normophonic; 53];
    labels.extend(vec![Label::Pathological; 657]);
    let p: f64 = 53.0 / 710.0;
    let analytic = -p * p.log2() - (1.0 - p) * (1.0 - p).log2();
    let h = entropy(&labels).map_err(|e| e.to_string())?;

    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let y: Vec<Label> = (0..100_000)
        .map(|_| if rng.gen_bool(0.5) { Label::Pathological } else { Label::Normophonic })
        .collect();
    let copy: Vec<f64> = y.iter().map(|l| l.target()).collect();
    let nmi_copy = normalized_mi(&copy, &y, 50).map_err(|e| e.to_string())?;
    let noise: Vec<f64> = (0..y.len()).map(|_| rng.gen::<f64>()).collect();
    let nmi_noise = normalized_mi(&noise, &y, 50).map_err(|e| e.to_string())?;

    let f: Vec<f64> = y.iter().map(|l| l.target() + rng.sample::<f64, _>(StandardNormal)).collect();
    let g: Vec<f64> = f.iter().map(|v| (2.0 * v).exp() + 3.0).collect();
    let (a, b) = (normalized_mi(&f, &y, 50).unwrap(), normalized_mi(&g, &y, 50).unwrap());
    ensure(
        (h - 0.3833).abs() < 1e-3 && (h - analytic).abs() < 1e-12 && (nmi_copy - 100.0).abs() <= 0.1 && nmi_noise < 1.0 && a == b,
        format!("H(53,657) = {h:.4} bits, copy {nmi_copy:.2}%, independent {nmi_noise:.3}%, monotone {a:.6} == {b:.6}"),
    )
}

fn redundancy_structure() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let n = 50_000;
    let y: Vec<Label> = (0..n)
        .map(|_| if rng.gen_bool(0.5) { Label::Pathological } else { Label::Normophonic })
        .collect();
    let f1: Vec<f64> = y.iter().map(|l| l.target() + 0.6 * rng.sample::<f64, _>(StandardNormal)).collect();
    let f2: Vec<f64> = f1.iter().map(|v| v + 0.01 * rng.sample::<f64, _>(StandardNormal)).collect();
    // sharp where f1 is ambiguous, uninformative elsewhere
    let f3: Vec<f64> = f1
        .iter()
        .zip(&y)
        .map(|(&v, l)| {
            if (v - 0.5).abs() < 0.5 {
                l.target() + 0.1 * rng.sample::<f64, _>(StandardNormal)
            } else {
                rng.gen::<f64>()
            }
        })
        .collect();
    let j12 = joint_normalized_mi(&f1, &f2, &y, 20).unwrap();
    let j13 = joint_normalized_mi(&f1, &f3, &y, 20).unwrap();
    ensure(j13 > j12, format!("joint(f1, complementary) {j13:.2}% > joint(f1, redundant) {j12:.2}%"))
}

fn mlp_checks() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut model = MlpModel::init(3, 5, &mut rng);
    let z: Vec<Vec<f64>> = (0..20).map(|_| (0..3).map(|_| rng.sample(StandardNormal)).collect()).collect();
    let y: Vec<f64> = (0..20).map(|i| (i % 2) as f64).collect();
    let w: Vec<f64> = (0..20).map(|i| 1.0 + (i % 3) as f64).collect();
    let l2 = 1e-3;
    let (_, grad) = loss_and_gradient(&model, &z, &y, &w, l2);
    let theta = model.flatten();
    let mut worst = 0.0f64;
    for i in 0..theta.len() {
        let h = 1e-6;
        let mut p = theta.clone();
        p[i] += h;
        model.set_flat(&p);
        let up = loss_and_gradient(&model, &z, &y, &w, l2).0;
        p[i] -= 2.0 * h;
        model.set_flat(&p);
        let down = loss_and_gradient(&model, &z, &y, &w, l2).0;
        let num = (up - down) / (2.0 * h);
        worst = worst.max((num - grad[i]).abs() / (num.abs() + grad[i].abs()).max(1e-8));
    }

    let mut x = Vec::new();
    let mut labels = Vec::new();
    for _ in 0..100 {
        for (a, b) in [(0.0, 0.0), (0.0, 1.0), (1.0, 0.0), (1.0, 1.0)] {
            x.push(vec![a + 0.05 * rng.sample::<f64, _>(StandardNormal), b + 0.05 * rng.sample::<f64, _>(StandardNormal)]);
            labels.push(if (a == 1.0) != (b == 1.0) { Label::Pathological } else { Label::Normophonic });
        }
    }
    let cfg = TrainConfig { learning_rate: 0.5, epochs: 2000, batch_size: 16, hidden: 8, l2_penalty: 0.0, ..Default::default() };
    let names = vec!["a".to_string(), "b".to_string()];
    let m1 = train_mlp(&x, &labels, &names, &cfg).map_err(|e| e.to_string())?;
    let m2 = train_mlp(&x, &labels, &names, &cfg).map_err(|e| e.to_string())?;
    let errors = x
        .iter()
        .zip(&labels)
        .filter(|(r, &l)| (predict_frame(&m1, r).unwrap() >= 0.5) != (l == Label::Pathological))
        .count();
    let err_pct = 100.0 * errors as f64 / x.len() as f64;
    let identical = m1.flatten().iter().zip(m2.flatten()).all(|(a, b)| a.to_bits() == b.to_bits());
    ensure(
        worst < 1e-4 && err_pct < 5.0 && identical,
        format!("gradient rel err {worst:.1e}, XOR error {err_pct:.2}%, retrain bit-identical: {identical}"),
    )
}

fn run(args: &[&str]) -> i32 {
    let argv: Vec<String> = std::iter::once("phasevoice").chain(args.iter().copied()).map(String::from).collect();
    phasevoice::cli::dispatch(argv)
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn end_to_end(work: &Path) -> Check {
    let start = Instant::now();
    let corpus = work.join("corpus");
    let features = work.join("features.csv");
    let report = work.join("cv.json");
    let mi = work.join("mi.json");
    let manifest = corpus.join("manifest.csv");
    let roc = work.join("roc.csv");
    let steps: [Vec<&str>; 4] = [
        vec!["synth", "--normo", "50", "--patho", "50", "--seed", "7", "--out", p(&corpus)],
        vec!["features", p(&manifest), "--out", p(&features)],
        vec!["evaluate", p(&features), "--subset", "all", "--k", "10", "--report", p(&report), "--roc", p(&roc)],
        vec!["mi", p(&features), "--json", p(&mi)],
    ];
    for s in &steps {
        let code = run(s);
        if code != 0 {
            return Err(format!("`{}` exited with {code}", s.join(" ")));
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    let r = json(&report);
    let (patient, frame) = (r["patient_error_pct"].as_f64().unwrap(), r["frame_error_pct"].as_f64().unwrap());
    let m = json(&mi);
    let nmi = |name: &str| {
        m["per_feature_nmi"].as_array().unwrap().iter().find(|f| f["name"] == name).unwrap()["nmi"].as_f64().unwrap()
    };
    let (cgd, fm) = (nmi("dCGD"), nmi("dFM"));
    ensure(
        patient <= 5.0 && frame <= 15.0 && elapsed <= 600.0 && cgd > fm,
        format!(
            "patient error {patient:.2}%, frame error {frame:.2}%, {elapsed:.1} s; NMI dCGD {cgd:.2}% vs dFM {fm:.2}%"
        ),
    )
}

fn gain_robustness(work: &Path) -> Check {
    let corpus = work.join("corpus");
    let scaled_dir = work.join("scaled");
    std::fs::create_dir_all(&scaled_dir).unwrap();
    let entries = read_manifest(&corpus.join("manifest.csv")).map_err(|e| e.to_string())?;
    let mut manifest = String::from("path,label,patient_id\n");
    for e in &entries {
        let sig = load_wav(&e.path, RatePolicy::Strict).map_err(|e| e.to_string())?;
        let out: PathBuf = scaled_dir.join(e.path.file_name().unwrap());
        write_wav_float(&out, &sig.scaled(0.25)).map_err(|e| e.to_string())?;
        manifest.push_str(&format!("{},{},{}\n", out.display(), e.label, e.patient_id));
    }
    std::fs::write(scaled_dir.join("manifest.csv"), manifest).unwrap();

    let scaled_features = work.join("features_scaled.csv");
    let model = work.join("model.json");
    let scaled_manifest = scaled_dir.join("manifest.csv");
    let features = work.join("features.csv");
    for s in [
        vec!["features", p(&scaled_manifest), "--out", p(&scaled_features)],
        vec!["train", p(&features), "--subset", "all", "--model", p(&model)],
    ] {
        let code = run(&s);
        if code != 0 {
            return Err(format!("`{}` exited with {code}", s.join(" ")));
        }
    }
    let (a, _) = FeatureMatrix::read_csv(&work.join("features.csv")).map_err(|e| e.to_string())?;
    let (b, _) = FeatureMatrix::read_csv(&scaled_features).map_err(|e| e.to_string())?;
    if a.len() != b.len() || a.patient_ids != b.patient_ids || a.frame_idx != b.frame_idx {
        return Err(format!("row layout changed: {} vs {} rows", a.len(), b.len()));
    }
    let mut worst = 0.0f64;
    for col in 0..5 {
        for (x, y) in a.column(col).iter().zip(b.column(col)) {
            worst = worst.max((x - y).abs() / x.abs().max(1e-12));
        }
    }
    let model = MlpModel::from_json(&std::fs::read_to_string(&model).unwrap()).map_err(|e| e.to_string())?;
    let decide = |m: &FeatureMatrix, pid: &str| {
        let post: Vec<f64> = (0..m.len())
            .filter(|&i| m.patient_ids[i] == pid)
            .map(|i| predict_frame(&model, &m.frames[i].to_array()).unwrap())
            .collect();
        classify_patient(&post, 0.5).unwrap()
    };
    let patients = a.patients();
    let flips = patients.iter().filter(|(pid, _)| decide(&a, pid) != decide(&b, pid)).count();
    ensure(
        worst <= 1e-6 && flips == 0,
        format!(
            "max relative change over {} delta values {worst:.1e}; {flips} of {} patient decisions flipped",
            5 * a.len(),
            patients.len()
        ),
    )
}

fn main() {
    assert_eq!(FEATURE_NAMES.len(), 10);
    let work = tempfile::tempdir().expect("temp dir");
    let criteria: Vec<(&str, Box<dyn Fn() -> Check + '_>)> = vec![
        ("1 group-delay analytics", Box::new(group_delay_analytics)),
        ("2 PPGD identity", Box::new(ppgd_identity)),
        ("3 ModGD degeneracy and spike suppression", Box::new(modgd_degeneracy_and_spikes)),
        ("4 CGD resonance localisation", Box::new(cgd_localisation)),
        ("5 cepstrum sidedness", Box::new(cepstrum_sidedness)),
        ("6 CCD recovery", Box::new(ccd_recovery)),
        ("7 GCI accuracy", Box::new(gci_accuracy)),
        ("8 MI estimator", Box::new(mi_estimator)),
        ("9 redundancy structure", Box::new(redundancy_structure)),
        ("10 MLP", Box::new(mlp_checks)),
        ("11 end-to-end", Box::new(|| end_to_end(work.path()))),
        ("12 gain robustness", Box::new(|| gain_robustness(work.path()))),
    ];
    let mut failed = 0;
    for (name, check) in &criteria {
        let outcome = std::panic::catch_unwind(std::panic::AssertUnwindSafe(check))
            .unwrap_or_else(|_| Err("panicked".to_string()));
        match outcome {
            Ok(msg) => println!("PASS  {name}: {msg}"),
            Err(msg) => {
                failed += 1;
                println!("FAIL  {name}: {msg}");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
