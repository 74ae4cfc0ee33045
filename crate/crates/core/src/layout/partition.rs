/// Splits `total` proportionally to `weights`, raising every share to at
/// least its minimum. Shares below their minimum are pinned there and the
/// remainder is re-shared among the rest, until nothing changes. When the
/// minimums alone exceed `total` the split is equal.
///
/// The result sums to `total` exactly: the last free share absorbs rounding.
pub fn proportional_partition(weights: &[u64], total: f64, mins: &[f64]) -> Vec<f64> {
    let k = weights.len();
    assert_eq!(k, mins.len(), "one minimum per weight");
    if k == 0 {
        return Vec::new();
    }
    if mins.iter().sum::<f64>() > total {
        return split_equally(total, k);
    }
    let mut pinned = vec![false; k];
    let mut out = vec![0.0; k];
    loop {
        let reserved: f64 = (0..k).filter(|&i| pinned[i]).map(|i| mins[i]).sum();
        let free: Vec<usize> = (0..k).filter(|&i| !pinned[i]).collect();
        let free_weight: u64 = free.iter().map(|&i| weights[i]).sum();
        let remaining = total - reserved;
        for &i in &free {
            out[i] = if free_weight > 0 {
                remaining * weights[i] as f64 / free_weight as f64
            } else {
                remaining / free.len() as f64
            };
        }
        let below: Vec<usize> = free.iter().copied().filter(|&i| out[i] < mins[i]).collect();
        if below.is_empty() {
            break;
        }
        for i in below {
            pinned[i] = true;
            out[i] = mins[i];
        }
    }
    if let Some(last) = (0..k).rev().find(|&i| !pinned[i]) {
        let others: f64 = (0..k).filter(|&i| i != last).map(|i| out[i]).sum();
        out[last] = total - others;
    }
    out
}

fn split_equally(total: f64, k: usize) -> Vec<f64> {
    vec![total / k as f64; k]
}

/// Lays `sizes` end to end from `start`, returning `(offset, length)` pairs.
/// Offsets are cumulative and the final end is pinned to `start + total` so
/// neighbours share exact edges.
pub fn split_span(start: f64, total: f64, sizes: &[f64]) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(sizes.len());
    let mut at = start;
    for (i, size) in sizes.iter().enumerate() {
        let end = if i + 1 == sizes.len() { start + total } else { at + size };
        out.push((at, end - at));
        at = end;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mins(k: usize, m: f64) -> Vec<f64> {
        vec![m; k]
    }

    #[test]
    fn plain_proportions() {
        assert_eq!(proportional_partition(&[2, 3, 2, 2], 900.0, &mins(4, 60.0)), vec![200.0, 300.0, 200.0, 200.0]);
        assert_eq!(proportional_partition(&[5, 5, 5, 5], 1000.0, &mins(4, 60.0)), vec![250.0; 4]);
    }

    #[test]
    fn clamp_and_redistribute() {
        let w = proportional_partition(&[1, 50, 48, 1], 1000.0, &mins(4, 60.0));
        // remainder 880 shared 50:48
        let expected = [60.0, 880.0 * 50.0 / 98.0, 880.0 * 48.0 / 98.0, 60.0];
        for (a, b) in w.iter().zip(expected) {
            assert!((a - b).abs() < 1e-9, "{w:?}");
        }
        assert!((w[1] - 448.98).abs() < 0.01 && (w[2] - 431.02).abs() < 0.01);
        assert_eq!(w.iter().sum::<f64>(), 1000.0);
    }

    #[test]
    fn cascading_clamp() {
        // first pass pins only the zero; the 5 drops below 60 once 60 is reserved
        let w = proportional_partition(&[0, 5, 95], 1000.0, &mins(3, 60.0));
        assert_eq!(w[0], 60.0);
        assert_eq!(w[1], 60.0);
        assert_eq!(w[2], 880.0);
    }

    #[test]
    fn infeasible_minimums_split_equally() {
        assert_eq!(proportional_partition(&[1, 9], 100.0, &mins(2, 60.0)), vec![50.0, 50.0]);
        assert!(proportional_partition(&[], 100.0, &[]).is_empty());
    }

    #[test]
    fn spans_share_edges() {
        let spans = split_span(10.0, 100.0, &[100.0 / 3.0; 3]);
        assert_eq!(spans[0].0, 10.0);
        for w in spans.windows(2) {
            assert_eq!(w[0].0 + w[0].1, w[1].0);
        }
        let (x, w) = spans[2];
        assert_eq!(x + w, 110.0);
    }
}
