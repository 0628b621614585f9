//! Raw matrix kernels over row-major `f64` slices.
//!
//! All kernels accumulate into `out` (`out +=`), which lets the backward
//! pass reuse them for gradient accumulation without temporaries.

/// C[m×n] += A[m×k] · B[k×n]
pub fn mm_nn(out: &mut [f64], a: &[f64], b: &[f64], m: usize, k: usize, n: usize) {
    debug_assert_eq!(a.len(), m * k);
    debug_assert_eq!(b.len(), k * n);
    debug_assert_eq!(out.len(), m * n);
    for i in 0..m {
        let row_out = &mut out[i * n..(i + 1) * n];
        for t in 0..k {
            let a_it = a[i * k + t];
            if a_it == 0.0 {
                continue;
            }
            let row_b = &b[t * n..(t + 1) * n];
            for (o, &bv) in row_out.iter_mut().zip(row_b) {
                *o += a_it * bv;
            }
        }
    }
}

/// C[m×n] += A[m×k] · B[n×k]ᵀ
pub fn mm_nt(out: &mut [f64], a: &[f64], b: &[f64], m: usize, k: usize, n: usize) {
    debug_assert_eq!(a.len(), m * k);
    debug_assert_eq!(b.len(), n * k);
    debug_assert_eq!(out.len(), m * n);
    for i in 0..m {
        let row_a = &a[i * k..(i + 1) * k];
        let row_out = &mut out[i * n..(i + 1) * n];
        for j in 0..n {
            let row_b = &b[j * k..(j + 1) * k];
            let mut s = 0.0;
            for (&av, &bv) in row_a.iter().zip(row_b) {
                s += av * bv;
            }
            row_out[j] += s;
        }
    }
}

/// C[k×n] += A[m×k]ᵀ · B[m×n]
pub fn mm_tn(out: &mut [f64], a: &[f64], b: &[f64], m: usize, k: usize, n: usize) {
    debug_assert_eq!(a.len(), m * k);
    debug_assert_eq!(b.len(), m * n);
    debug_assert_eq!(out.len(), k * n);
    for i in 0..m {
        let row_a = &a[i * k..(i + 1) * k];
        let row_b = &b[i * n..(i + 1) * n];
        for (t, &a_it) in row_a.iter().enumerate() {
            if a_it == 0.0 {
                continue;
            }
            let row_out = &mut out[t * n..(t + 1) * n];
            for (o, &bv) in row_out.iter_mut().zip(row_b) {
                *o += a_it * bv;
            }
        }
    }
}
