//! Dense loops shared by forward and backward passes. All matrices are
//! row-major; every routine accumulates into its output.

use super::Scalar;

/// `c[m×n] += a[m×k] · b[k×n]`.
pub fn gemm_acc<T: Scalar>(a: &[T], b: &[T], c: &mut [T], m: usize, k: usize, n: usize) {
    debug_assert!(a.len() >= m * k && b.len() >= k * n && c.len() >= m * n);
    let mut i = 0;
    while i + 4 <= m {
        let (c0, rest) = c[i * n..(i + 4) * n].split_at_mut(n);
        let (c1, rest) = rest.split_at_mut(n);
        let (c2, c3) = rest.split_at_mut(n);
        let (r0, r1, r2, r3) = (&a[i * k..], &a[(i + 1) * k..], &a[(i + 2) * k..], &a[(i + 3) * k..]);
        for p in 0..k {
            let (a0, a1, a2, a3) = (r0[p], r1[p], r2[p], r3[p]);
            let brow = &b[p * n..(p + 1) * n];
            for ((((x0, x1), x2), x3), &bv) in
                c0.iter_mut().zip(c1.iter_mut()).zip(c2.iter_mut()).zip(c3.iter_mut()).zip(brow)
            {
                *x0 += a0 * bv;
                *x1 += a1 * bv;
                *x2 += a2 * bv;
                *x3 += a3 * bv;
            }
        }
        i += 4;
    }
    while i < m {
        let crow = &mut c[i * n..(i + 1) * n];
        for p in 0..k {
            let av = a[i * k + p];
            if av == T::zero() {
                continue;
            }
            axpy(av, &b[p * n..(p + 1) * n], crow);
        }
        i += 1;
    }
}

/// `c[k×n] += a[m×k]ᵀ · b[m×n]`.
pub fn gemm_at_b_acc<T: Scalar>(a: &[T], b: &[T], c: &mut [T], m: usize, k: usize, n: usize) {
    let mut r = 0;
    while r + 4 <= m {
        let (b0, b1, b2, b3) = (&b[r * n..(r + 1) * n], &b[(r + 1) * n..(r + 2) * n], &b[(r + 2) * n..(r + 3) * n], &b[(r + 3) * n..(r + 4) * n]);
        for p in 0..k {
            let (a0, a1, a2, a3) = (a[r * k + p], a[(r + 1) * k + p], a[(r + 2) * k + p], a[(r + 3) * k + p]);
            let crow = &mut c[p * n..(p + 1) * n];
            for ((((x, &v0), &v1), &v2), &v3) in crow.iter_mut().zip(b0).zip(b1).zip(b2).zip(b3) {
                *x += a0 * v0 + a1 * v1 + a2 * v2 + a3 * v3;
            }
        }
        r += 4;
    }
    while r < m {
        let brow = &b[r * n..(r + 1) * n];
        for p in 0..k {
            let av = a[r * k + p];
            if av != T::zero() {
                axpy(av, brow, &mut c[p * n..(p + 1) * n]);
            }
        }
        r += 1;
    }
}

/// `y += alpha · x`.
#[inline]
pub fn axpy<T: Scalar>(alpha: T, x: &[T], y: &mut [T]) {
    for (yv, &xv) in y.iter_mut().zip(x) {
        *yv += alpha * xv;
    }
}

/// `out[n×m] = a[m×n]ᵀ`.
pub fn transpose<T: Scalar>(a: &[T], m: usize, n: usize) -> alloc::vec::Vec<T> {
    let mut out = alloc::vec![T::zero(); m * n];
    for i in 0..m {
        for j in 0..n {
            out[j * m + i] = a[i * n + j];
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn naive(a: &[f64], b: &[f64], m: usize, k: usize, n: usize) -> alloc::vec::Vec<f64> {
        let mut c = alloc::vec![0.0; m * n];
        for i in 0..m {
            for j in 0..n {
                c[i * n + j] = (0..k).map(|p| a[i * k + p] * b[p * n + j]).sum();
            }
        }
        c
    }

    #[test]
    fn blocked_products_match_naive() {
        let (m, k, n) = (7, 5, 6);
        let a: alloc::vec::Vec<f64> = (0..m * k).map(|i| (i as f64 * 0.37).sin()).collect();
        let b: alloc::vec::Vec<f64> = (0..k * n).map(|i| (i as f64 * 0.71).cos()).collect();
        let mut c = alloc::vec![0.0; m * n];
        gemm_acc(&a, &b, &mut c, m, k, n);
        let want = naive(&a, &b, m, k, n);
        assert!(c.iter().zip(&want).all(|(x, y)| (x - y).abs() < 1e-12));
        // aᵀ·b with a as m×k and b as m×n
        let bb: alloc::vec::Vec<f64> = (0..m * n).map(|i| (i as f64 * 0.13).sin()).collect();
        let mut c2 = alloc::vec![0.0; k * n];
        gemm_at_b_acc(&a, &bb, &mut c2, m, k, n);
        let at = transpose(&a, m, k);
        let want2 = naive(&at, &bb, k, m, n);
        assert!(c2.iter().zip(&want2).all(|(x, y)| (x - y).abs() < 1e-12));
    }
}
