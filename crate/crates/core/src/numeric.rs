//! Order-fixed floating-point reductions.

const LEAF: usize = 128;

/// Pairwise sum of `term(0) .. term(len - 1)`. The association order depends
/// only on `len`, so results are bit-identical however the caller schedules
/// work.
pub fn pairwise_sum_by(len: usize, term: &impl Fn(usize) -> f64) -> f64 {
    fn go(lo: usize, hi: usize, term: &impl Fn(usize) -> f64) -> f64 {
        if hi - lo <= LEAF {
            (lo..hi).map(term).sum()
        } else {
            let mid = lo + (hi - lo) / 2;
            go(lo, mid, term) + go(mid, hi, term)
        }
    }
    if len == 0 {
        0.0
    } else {
        go(0, len, term)
    }
}
