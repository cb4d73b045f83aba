use std::ops::Range;

/// Splits positions `0..n` into `w` contiguous ranges whose sizes differ by at
/// most one. Range `i` (0-based) is `ceil(i*n/w) .. ceil((i+1)*n/w)`.
///
/// # Panics
/// If `w == 0`.
pub fn partition(n: usize, w: usize) -> Vec<Range<usize>> {
    assert!(w >= 1, "partition needs at least one part");
    let cut = |i: usize| (i * n).div_ceil(w);
    (0..w).map(|i| cut(i)..cut(i + 1)).collect()
}
