//! Shape analysis of sampled curves: local maxima, their topographic
//! prominence, smoothing and sign structure.

/// Indices of local maxima. A plateau of equal values higher than both
/// neighbours counts once, at its middle index. End points never count.
pub fn local_maxima(y: &[f64]) -> Vec<usize> {
    let mut out = Vec::new();
    let n = y.len();
    let mut i = 1;
    while i + 1 < n {
        if y[i] > y[i - 1] {
            let mut j = i;
            while j + 1 < n && y[j + 1] == y[i] {
                j += 1;
            }
            if j + 1 < n && y[j + 1] < y[i] {
                out.push((i + j) / 2);
            }
            i = j + 1;
        } else {
            i += 1;
        }
    }
    out
}

/// Topographic prominence of the maximum at `i`: its height above the
/// higher of the two lowest points separating it from higher ground (or
/// from the curve ends) on either side.
pub fn prominence(y: &[f64], i: usize) -> f64 {
    let h = y[i];
    let mut left_min = h;
    for &v in y[..i].iter().rev() {
        if v > h {
            break;
        }
        left_min = left_min.min(v);
    }
    let mut right_min = h;
    for &v in &y[i + 1..] {
        if v > h {
            break;
        }
        right_min = right_min.min(v);
    }
    h - left_min.max(right_min)
}

/// Local maxima whose prominence is at least `min_prominence`.
pub fn prominent_maxima(y: &[f64], min_prominence: f64) -> Vec<usize> {
    local_maxima(y).into_iter().filter(|&i| prominence(y, i) >= min_prominence).collect()
}

/// Centred moving average over `2·half_width + 1` points, with the window
/// truncated at the ends.
pub fn moving_average(y: &[f64], half_width: usize) -> Vec<f64> {
    let n = y.len();
    (0..n)
        .map(|i| {
            let lo = i.saturating_sub(half_width);
            let hi = (i + half_width + 1).min(n);
            y[lo..hi].iter().sum::<f64>() / (hi - lo) as f64
        })
        .collect()
}

/// `max − min`, zero for an empty slice.
pub fn range(y: &[f64]) -> f64 {
    let (lo, hi) = y.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    if y.is_empty() {
        0.0
    } else {
        hi - lo
    }
}

/// Index of the largest value (first one on ties).
pub fn argmax(y: &[f64]) -> Option<usize> {
    y.iter().enumerate().fold(None, |best, (i, &v)| match best {
        Some((_, b)) if b >= v => best,
        _ => Some((i, v)),
    })
    .map(|(i, _)| i)
}

/// Number of strict sign changes, ignoring exact zeros.
pub fn sign_changes(y: &[f64]) -> usize {
    let signs: Vec<bool> = y.iter().filter(|v| **v != 0.0).map(|v| *v > 0.0).collect();
    signs.windows(2).filter(|w| w[0] != w[1]).count()
}
