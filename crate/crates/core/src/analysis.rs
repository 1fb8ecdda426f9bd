//! Peak finding on sampled traces.
//!
//! The exchange signals carry small fast wiggles from off-resonant terms, so
//! maxima are filtered by topographic prominence before periods are read off.

/// Default prominence for population-like traces in `[0, 1]`.
pub const DEFAULT_PROMINENCE: f64 = 0.1;

/// Interior local maxima; a plateau counts once, at its first sample.
pub fn local_maxima(values: &[f64]) -> Vec<usize> {
    let n = values.len();
    let mut out = Vec::new();
    let mut i = 1;
    while i + 1 < n {
        if values[i] > values[i - 1] {
            let mut j = i;
            while j + 1 < n && values[j + 1] == values[i] {
                j += 1;
            }
            if j + 1 < n && values[j + 1] < values[i] {
                out.push(i);
            }
            i = j + 1;
        } else {
            i += 1;
        }
    }
    out
}

/// Topographic prominence of the local maximum at `peak`.
pub fn prominence(values: &[f64], peak: usize) -> f64 {
    let h = values[peak];
    let mut left_min = h;
    for &v in values[..peak].iter().rev() {
        if v > h {
            break;
        }
        left_min = left_min.min(v);
    }
    let mut right_min = h;
    for &v in &values[peak + 1..] {
        if v > h {
            break;
        }
        right_min = right_min.min(v);
    }
    h - left_min.max(right_min)
}

/// Local maxima whose prominence is at least `min_prominence`.
pub fn prominent_maxima(values: &[f64], min_prominence: f64) -> Vec<usize> {
    local_maxima(values).into_iter().filter(|&i| prominence(values, i) >= min_prominence).collect()
}

/// Mean spacing of prominent maxima, `None` with fewer than two.
pub fn estimate_period(times: &[f64], values: &[f64], min_prominence: f64) -> Option<f64> {
    let peaks = prominent_maxima(values, min_prominence);
    if peaks.len() < 2 {
        return None;
    }
    Some((times[peaks[peaks.len() - 1]] - times[peaks[0]]) / (peaks.len() - 1) as f64)
}

/// Time and value of the first prominent maximum.
pub fn first_peak(times: &[f64], values: &[f64], min_prominence: f64) -> Option<(f64, f64)> {
    prominent_maxima(values, min_prominence).first().map(|&i| (times[i], values[i]))
}

/// True when the sequence is strictly decreasing.
pub fn strictly_decreasing(values: &[f64]) -> bool {
    values.windows(2).all(|w| w[1] < w[0])
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn finds_maxima_and_plateaus() {
        let v = [0.0, 1.0, 0.5, 2.0, 2.0, 1.0, 3.0];
        assert_eq!(local_maxima(&v), vec![1, 3]);
        assert!((prominence(&v, 1) - 0.5).abs() < 1e-15);
        assert!((prominence(&v, 3) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn wiggles_are_filtered() {
        let t: Vec<f64> = (0..20000).map(|k| k as f64 * 0.1).collect();
        let v: Vec<f64> = t
            .iter()
            .map(|&t| (std::f64::consts::PI * t / 460.0).sin().powi(2) + 0.005 * (2.0 * std::f64::consts::PI * t).sin())
            .collect();
        let period = estimate_period(&t, &v, DEFAULT_PROMINENCE).unwrap();
        assert!((period - 460.0).abs() < 1.0, "{period}");
        let (tp, vp) = first_peak(&t, &v, DEFAULT_PROMINENCE).unwrap();
        assert!((tp - 230.0).abs() < 1.0 && vp > 0.99);
    }

    #[test]
    fn too_few_peaks() {
        assert_eq!(estimate_period(&[0.0, 1.0, 2.0], &[0.0, 1.0, 0.0], 0.1), None);
        assert!(strictly_decreasing(&[3.0, 2.0, 1.0]));
        assert!(!strictly_decreasing(&[3.0, 3.0]));
    }

    proptest! {
        #[test]
        fn sine_period_recovered(period in 50.0f64..400.0, phase in 0.0f64..6.0) {
            let t: Vec<f64> = (0..4001).map(|k| k as f64 * 0.5).collect();
            let v: Vec<f64> = t.iter().map(|&t| (std::f64::consts::TAU * t / period + phase).sin()).collect();
            let p = estimate_period(&t, &v, 0.5).unwrap();
            prop_assert!((p - period).abs() < 0.5);
        }
    }
}
