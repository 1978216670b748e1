//! Row-major GEMM on top of `matrixmultiply`.

/// `c = a·b (+ c when accumulate)`, where `a` is logically `m×k` and `b` is
/// `k×n`. With `a_t`, `a` is stored as `k×m`; with `b_t`, `b` is stored `n×k`.
#[allow(clippy::too_many_arguments)]
pub(crate) fn gemm(
    m: usize,
    k: usize,
    n: usize,
    a: &[f64],
    a_t: bool,
    b: &[f64],
    b_t: bool,
    c: &mut [f64],
    accumulate: bool,
) {
    assert!(a.len() >= m * k && b.len() >= k * n && c.len() >= m * n);
    let (rsa, csa) = if a_t { (1, m as isize) } else { (k as isize, 1) };
    let (rsb, csb) = if b_t { (1, k as isize) } else { (n as isize, 1) };
    let beta = if accumulate { 1.0 } else { 0.0 };
    if m == 0 || n == 0 {
        return;
    }
    if k == 0 {
        if !accumulate {
            c[..m * n].iter_mut().for_each(|v| *v = 0.0);
        }
        return;
    }
    // SAFETY: the asserts above bound every index the kernel touches given
    // these strides, and `c` does not alias `a` or `b`.
    unsafe {
        matrixmultiply::dgemm(
            m,
            k,
            n,
            1.0,
            a.as_ptr(),
            rsa,
            csa,
            b.as_ptr(),
            rsb,
            csb,
            beta,
            c.as_mut_ptr(),
            n as isize,
            1,
        );
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn naive(m: usize, k: usize, n: usize, a: &[f64], a_t: bool, b: &[f64], b_t: bool) -> Vec<f64> {
        let mut c = vec![0.0; m * n];
        for i in 0..m {
            for j in 0..n {
                for p in 0..k {
                    let av = if a_t { a[p * m + i] } else { a[i * k + p] };
                    let bv = if b_t { b[j * k + p] } else { b[p * n + j] };
                    c[i * n + j] += av * bv;
                }
            }
        }
        c
    }

    #[test]
    fn all_transpose_combinations() {
        let (m, k, n) = (3, 4, 5);
        let a: Vec<f64> = (0..m * k).map(|v| v as f64 * 0.5 - 2.0).collect();
        let b: Vec<f64> = (0..k * n).map(|v| (v as f64).sin()).collect();
        for a_t in [false, true] {
            for b_t in [false, true] {
                let mut c = vec![1.0; m * n];
                gemm(m, k, n, &a, a_t, &b, b_t, &mut c, false);
                let r = naive(m, k, n, &a, a_t, &b, b_t);
                for (x, y) in c.iter().zip(&r) {
                    assert!((x - y).abs() < 1e-12);
                }
                gemm(m, k, n, &a, a_t, &b, b_t, &mut c, true);
                for (x, y) in c.iter().zip(&r) {
                    assert!((x - 2.0 * y).abs() < 1e-12);
                }
            }
        }
    }
}
