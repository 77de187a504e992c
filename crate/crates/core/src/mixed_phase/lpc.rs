//! Linear prediction by the autocorrelation method.

use std::f64::consts::PI;

/// Biased autocorrelation `r[0..=order]`.
pub fn autocorrelation(x: &[f64], order: usize) -> Vec<f64> {
    (0..=order)
        .map(|lag| {
            if lag >= x.len() {
                0.0
            } else {
                x[..x.len() - lag].iter().zip(&x[lag..]).map(|(a, b)| a * b).sum()
            }
        })
        .collect()
}

/// Levinson-Durbin recursion. Returns the inverse-filter coefficients
/// `[1, a1, ..., ap]` (so `e(n) = Σ a_k x(n-k)`) and the final prediction
/// error power. A zero autocorrelation yields the identity filter.
pub fn levinson(r: &[f64], order: usize) -> (Vec<f64>, f64) {
    let mut a = vec![0.0; order + 1];
    a[0] = 1.0;
    let mut err = r[0];
    if err <= 0.0 {
        return (a, 0.0);
    }
    for i in 1..=order {
        let acc: f64 = (1..i).map(|j| a[j] * r[i - j]).sum::<f64>() + r[i];
        let k = -acc / err;
        let prev = a.clone();
        for j in 1..i {
            a[j] = prev[j] + k * prev[i - j];
        }
        a[i] = k;
        err *= 1.0 - k * k;
        if err <= r[0] * 1e-12 {
            break;
        }
    }
    (a, err)
}

fn hamming(len: usize) -> Vec<f64> {
    if len == 1 {
        return vec![1.0];
    }
    (0..len).map(|n| 0.54 - 0.46 * (2.0 * PI * n as f64 / (len - 1) as f64).cos()).collect()
}

/// Prediction residual with filters re-estimated every `hop` samples from a
/// Hamming-windowed block of `block` samples centred on the hop. Filtering
/// runs on the unwindowed signal so the residual is continuous.
pub fn lp_residual(x: &[f64], order: usize, block: usize, hop: usize) -> Vec<f64> {
    let n = x.len();
    let mut e = vec![0.0; n];
    let w = hamming(block);
    let mut start = 0;
    while start < n {
        let end = (start + hop).min(n);
        let centre = (start + end) / 2;
        let lo = centre.saturating_sub(block / 2);
        let hi = (lo + block).min(n);
        let seg: Vec<f64> = x[lo..hi].iter().zip(&w).map(|(a, b)| a * b).collect();
        let (a, _) = levinson(&autocorrelation(&seg, order), order);
        for t in start..end {
            let mut acc = x[t];
            for (k, &ak) in a.iter().enumerate().skip(1) {
                if t >= k {
                    acc += ak * x[t - k];
                }
            }
            e[t] = acc;
        }
        start = end;
    }
    e
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_ar2_coefficients() {
        // x(n) = 1.3 x(n-1) - 0.6 x(n-2) + white noise
        let mut s = 12345u64;
        let mut noise = || {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (s >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        let mut x = vec![0.0; 20000];
        for n in 2..x.len() {
            x[n] = 1.3 * x[n - 1] - 0.6 * x[n - 2] + noise();
        }
        let (a, _) = levinson(&autocorrelation(&x, 2), 2);
        assert!((a[1] + 1.3).abs() < 0.02, "{a:?}");
        assert!((a[2] - 0.6).abs() < 0.02, "{a:?}");
    }

    #[test]
    fn residual_of_ar_process_is_whiter() {
        let x: Vec<f64> = (0..4000).map(|n| (0.05 * n as f64).sin() + 0.5 * (0.11 * n as f64).sin()).collect();
        let e = lp_residual(&x, 18, 400, 160);
        let ex: f64 = x[400..].iter().map(|v| v * v).sum();
        let ee: f64 = e[400..].iter().map(|v| v * v).sum();
        assert!(ee < 1e-3 * ex);
    }

    #[test]
    fn silent_input_gives_zero_residual() {
        assert!(lp_residual(&[0.0; 1000], 18, 400, 160).iter().all(|&v| v == 0.0));
    }
}
