//! In-place median partitioning (quickselect, median-of-three pivots).

/// Partition `coords` around its median and return `split = ceil(n/2)`.
///
/// Afterwards every element in `coords[..split]` is `<=` every element in
/// `coords[split..]`. `companion` is permuted identically. The result is a
/// deterministic function of the input.
pub fn partition_median(coords: &mut [f64], companion: &mut [usize]) -> usize {
    assert_eq!(coords.len(), companion.len(), "companion length mismatch");
    let n = coords.len();
    let split = n.div_ceil(2);
    if n >= 2 {
        select(coords, companion, split - 1);
    }
    split
}

/// Place the `k`-th smallest element at `k` with `<=` on its left and `>=` on its right.
fn select(v: &mut [f64], idx: &mut [usize], k: usize) {
    let (mut lo, mut hi) = (0usize, v.len());
    while hi - lo > 1 {
        let pivot = median_of_three(v, lo, hi);
        let (lt, gt) = three_way(v, idx, lo, hi, pivot);
        if k < lt {
            hi = lt;
        } else if k >= gt {
            lo = gt;
        } else {
            return;
        }
    }
}

#[inline]
fn median_of_three(v: &[f64], lo: usize, hi: usize) -> f64 {
    let a = v[lo];
    let b = v[lo + (hi - lo) / 2];
    let c = v[hi - 1];
    if (a <= b) == (b <= c) {
        b
    } else if (b <= a) == (a <= c) {
        a
    } else {
        c
    }
}

/// Dutch-flag partition of `[lo, hi)`. Returns `(lt, gt)` such that
/// `[lo, lt)` < pivot, `[lt, gt)` == pivot, `[gt, hi)` > pivot.
fn three_way(v: &mut [f64], idx: &mut [usize], lo: usize, hi: usize, pivot: f64) -> (usize, usize) {
    let (mut lt, mut i, mut gt) = (lo, lo, hi);
    while i < gt {
        if v[i] < pivot {
            v.swap(i, lt);
            idx.swap(i, lt);
            lt += 1;
            i += 1;
        } else if v[i] > pivot {
            gt -= 1;
            v.swap(i, gt);
            idx.swap(i, gt);
        } else {
            i += 1;
        }
    }
    (lt, gt)
}
