//! Dense matrix kernels shared by the layers.
//!
//! Every kernel computes each output element in one sequential pass, so row
//! partitioning across worker threads cannot change results: outputs are
//! bit-identical for any worker count.

use rayon::prelude::*;

/// Number of output elements below which a kernel stays single-threaded.
const PAR_THRESHOLD: usize = 1 << 14;

/// `y[b] += x[b] · wt` where `wt` is `in_dim × out_dim` (transposed weight).
///
/// `x` is `batch × in_dim`, `y` is `batch × out_dim`, all row-major.
pub fn matmul_xt_accum(x: &[f64], wt: &[f64], y: &mut [f64], in_dim: usize, out_dim: usize) {
    debug_assert_eq!(x.len() % in_dim, 0);
    debug_assert_eq!(y.len() % out_dim, 0);
    let body = |(yrow, xrow): (&mut [f64], &[f64])| {
        for (k, &a) in xrow.iter().enumerate() {
            let wrow = &wt[k * out_dim..(k + 1) * out_dim];
            for (yv, &w) in yrow.iter_mut().zip(wrow) {
                *yv = a.mul_add(w, *yv);
            }
        }
    };
    if y.len() >= PAR_THRESHOLD {
        y.par_chunks_mut(out_dim)
            .zip(x.par_chunks(in_dim))
            .for_each(body);
    } else {
        y.chunks_mut(out_dim).zip(x.chunks(in_dim)).for_each(body);
    }
}

/// `dx[b] += dy[b] · w` where `w` is `out_dim × in_dim` (the canonical layout).
pub fn matmul_accum(dy: &[f64], w: &[f64], dx: &mut [f64], out_dim: usize, in_dim: usize) {
    let body = |(dxrow, dyrow): (&mut [f64], &[f64])| {
        for (o, &g) in dyrow.iter().enumerate() {
            let wrow = &w[o * in_dim..(o + 1) * in_dim];
            for (dv, &wv) in dxrow.iter_mut().zip(wrow) {
                *dv = g.mul_add(wv, *dv);
            }
        }
    };
    if dx.len() >= PAR_THRESHOLD {
        dx.par_chunks_mut(in_dim)
            .zip(dy.par_chunks(out_dim))
            .for_each(body);
    } else {
        dx.chunks_mut(in_dim).zip(dy.chunks(out_dim)).for_each(body);
    }
}

/// `dw[o] += Σ_b dy[b][o] · x[b]` — the weight gradient of `y = x·Wᵀ`.
///
/// Each `dw` row is owned by exactly one task and accumulated over the batch
/// in index order.
pub fn grad_weight_accum(
    dy: &[f64],
    x: &[f64],
    dw: &mut [f64],
    batch: usize,
    out_dim: usize,
    in_dim: usize,
) {
    debug_assert_eq!(dy.len(), batch * out_dim);
    debug_assert_eq!(x.len(), batch * in_dim);
    let body = |(o, dwrow): (usize, &mut [f64])| {
        for b in 0..batch {
            let g = dy[b * out_dim + o];
            if g == 0.0 {
                continue;
            }
            let xrow = &x[b * in_dim..(b + 1) * in_dim];
            for (dv, &xv) in dwrow.iter_mut().zip(xrow) {
                *dv = g.mul_add(xv, *dv);
            }
        }
    };
    if dw.len() >= PAR_THRESHOLD {
        dw.par_chunks_mut(in_dim).enumerate().for_each(body);
    } else {
        dw.chunks_mut(in_dim).enumerate().for_each(body);
    }
}

/// Transposes `w` (`out_dim × in_dim`) into `wt` (`in_dim × out_dim`).
pub fn transpose(w: &[f64], wt: &mut [f64], out_dim: usize, in_dim: usize) {
    debug_assert_eq!(w.len(), out_dim * in_dim);
    debug_assert_eq!(wt.len(), w.len());
    for o in 0..out_dim {
        for i in 0..in_dim {
            wt[i * out_dim + o] = w[o * in_dim + i];
        }
    }
}
