/// Pairwise sum of `term(0) + ... + term(n-1)`.
///
/// The reduction tree depends only on `n`, so results are bit-reproducible.
pub(crate) fn pairwise_sum<T, F, A>(n: usize, term: &F, add: &A, zero: T) -> T
where
    T: Copy,
    F: Fn(usize) -> T,
    A: Fn(T, T) -> T,
{
    fn go<T: Copy, F: Fn(usize) -> T, A: Fn(T, T) -> T>(lo: usize, hi: usize, term: &F, add: &A, zero: T) -> T {
        if hi - lo <= 16 {
            (lo..hi).fold(zero, |acc, i| add(acc, term(i)))
        } else {
            let mid = lo + (hi - lo) / 2;
            add(go(lo, mid, term, add, zero), go(mid, hi, term, add, zero))
        }
    }
    go(0, n, term, add, zero)
}
