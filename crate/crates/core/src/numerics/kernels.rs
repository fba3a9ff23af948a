//! Slice-level forward/backward loops used by the tape.
//!
//! Layout conventions: feature maps are `[N, C, T, V]` row-major, so a
//! `(n, c)` plane is a contiguous `T*V` block and a `(n, c, t)` row is a
//! contiguous `V` block.

use std::cell::Cell;

thread_local! {
    static MACS: Cell<u64> = const { Cell::new(0) };
}

/// Multiply-accumulates executed by forward kernels on this thread since the
/// last [`reset_mac_counter`].
pub fn mac_counter() -> u64 {
    MACS.with(Cell::get)
}

pub fn reset_mac_counter() {
    MACS.with(|c| c.set(0));
}

fn count_macs(n: u64) {
    MACS.with(|c| c.set(c.get() + n));
}

#[inline]
fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// Four independent partial sums so the reduction is not one serial chain.
#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len().min(b.len());
    let (a, b) = (&a[..n], &b[..n]);
    let mut acc = [0.0; 4];
    let mut ca = a.chunks_exact(4);
    let mut cb = b.chunks_exact(4);
    for (x, y) in (&mut ca).zip(&mut cb) {
        for l in 0..4 {
            acc[l] += x[l] * y[l];
        }
    }
    let tail: f64 = ca.remainder().iter().zip(cb.remainder()).map(|(x, y)| x * y).sum();
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

/// The three dot products of `g` against shifted inputs, in one pass.
#[inline]
fn dot3(g: &[f64], lo: &[f64], mid: &[f64], hi: &[f64]) -> [f64; 3] {
    let mut acc = [[0.0; 4]; 3];
    let n = g.len() / 4 * 4;
    for c in (0..n).step_by(4) {
        for l in 0..4 {
            let gj = g[c + l];
            acc[0][l] += gj * lo[c + l];
            acc[1][l] += gj * mid[c + l];
            acc[2][l] += gj * hi[c + l];
        }
    }
    let mut out = [0.0; 3];
    for (k, a) in acc.iter().enumerate() {
        out[k] = (a[0] + a[1]) + (a[2] + a[3]);
    }
    for j in n..g.len() {
        out[0] += g[j] * lo[j];
        out[1] += g[j] * mid[j];
        out[2] += g[j] * hi[j];
    }
    out
}

/// `y[j] += w[0] * lo[j] + w[1] * mid[j] + w[2] * hi[j]`.
#[inline]
fn axpy3(w: [f64; 3], lo: &[f64], mid: &[f64], hi: &[f64], y: &mut [f64]) {
    for (((yi, a), b), c) in y.iter_mut().zip(lo).zip(mid).zip(hi) {
        *yi += w[0] * a + w[1] * b + w[2] * c;
    }
}

/// Nonzero entries of each adjacency row as `(column, value)`.
fn row_nonzeros(adj: &[f64], v: usize) -> Vec<Vec<(usize, f64)>> {
    adj.chunks(v)
        .map(|row| row.iter().enumerate().filter(|(_, a)| **a != 0.0).map(|(j, a)| (j, *a)).collect())
        .collect()
}

/// `out[r, v] = sum_j adj[v, j] * x[r, j]` for every row `r`.
///
/// Zero adjacency entries are skipped, which leaves finite results unchanged;
/// the MAC counter still records the dense `rows * V * V` cost of the operator.
pub fn graph_mix(adj: &[f64], v: usize, x: &[f64]) -> Vec<f64> {
    let rows = x.len() / v;
    let nz = row_nonzeros(adj, v);
    let mut out = vec![0.0; x.len()];
    for (xr, or) in x.chunks_exact(v).zip(out.chunks_exact_mut(v)) {
        for (o, entries) in or.iter_mut().zip(&nz) {
            *o = entries.iter().map(|&(j, a)| a * xr[j]).sum();
        }
    }
    count_macs((rows * v * v) as u64);
    out
}

/// Returns `(grad_x, grad_adj)`. The adjacency gradient is dense.
pub fn graph_mix_backward(adj: &[f64], v: usize, x: &[f64], g: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let nz = row_nonzeros(adj, v);
    let mut gx = vec![0.0; x.len()];
    let mut gadj = vec![0.0; v * v];
    for ((xr, gr), gxr) in x.chunks_exact(v).zip(g.chunks_exact(v)).zip(gx.chunks_exact_mut(v)) {
        for (vi, &gv) in gr.iter().enumerate() {
            if gv == 0.0 {
                continue;
            }
            for &(j, a) in &nz[vi] {
                gxr[j] += gv * a;
            }
            axpy(gv, xr, &mut gadj[vi * v..(vi + 1) * v]);
        }
    }
    (gx, gadj)
}

/// Geometry of a per-joint temporal convolution.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ConvGeom {
    pub n: usize,
    pub c_in: usize,
    pub c_out: usize,
    pub t_in: usize,
    pub t_out: usize,
    pub v: usize,
    pub kernel: usize,
    pub stride: usize,
    pub pad: usize,
}

impl ConvGeom {
    /// Zero padding of `(kernel - 1) / 2`; output length `ceil(t_in / stride)`.
    pub fn same(n: usize, c_in: usize, c_out: usize, t_in: usize, v: usize, kernel: usize, stride: usize) -> Self {
        ConvGeom {
            n,
            c_in,
            c_out,
            t_in,
            t_out: t_in.div_ceil(stride),
            v,
            kernel,
            stride,
            pad: (kernel - 1) / 2,
        }
    }

    /// Output indices `to` whose source frame for tap `k` lies inside the input.
    fn valid_range(&self, k: usize) -> std::ops::Range<usize> {
        // src = to * stride + k - pad must satisfy 0 <= src < t_in
        let lo = if self.pad > k {
            (self.pad - k).div_ceil(self.stride)
        } else {
            0
        };
        if self.t_in + self.pad <= k {
            return 0..0;
        }
        let hi_src = self.t_in + self.pad - k; // exclusive bound on to*stride
        let hi = hi_src.div_ceil(self.stride).min(self.t_out);
        lo..hi.max(lo)
    }

    pub fn macs(&self) -> u64 {
        (self.n * self.c_out * self.c_in * self.kernel * self.t_out * self.v) as u64
    }
}

/// Weight layout `[c_out, c_in, kernel]`.
pub fn conv_forward(geom: &ConvGeom, x: &[f64], w: &[f64], bias: Option<&[f64]>) -> Vec<f64> {
    let ConvGeom {
        n,
        c_in,
        c_out,
        t_in,
        t_out,
        v,
        kernel,
        stride,
        pad,
    } = *geom;
    let in_plane = t_in * v;
    let out_plane = t_out * v;
    let mut out = vec![0.0; n * c_out * out_plane];
    for ni in 0..n {
        for o in 0..c_out {
            let dst = &mut out[(ni * c_out + o) * out_plane..(ni * c_out + o + 1) * out_plane];
            if let Some(b) = bias {
                dst.fill(b[o]);
            }
            for i in 0..c_in {
                let src = &x[(ni * c_in + i) * in_plane..(ni * c_in + i + 1) * in_plane];
                if kernel == 3 && stride == 1 && t_in >= 3 {
                    // interior frames see all three taps; the two edge frames lose one
                    let wk = &w[(o * c_in + i) * 3..(o * c_in + i) * 3 + 3];
                    let (lo, hi) = (v, (t_in - 1) * v);
                    axpy3([wk[0], wk[1], wk[2]], &src[lo - v..hi - v], &src[lo..hi], &src[lo + v..hi + v], &mut dst[lo..hi]);
                    axpy(wk[1], &src[..v], &mut dst[..v]);
                    axpy(wk[2], &src[v..2 * v], &mut dst[..v]);
                    axpy(wk[0], &src[hi - v..hi], &mut dst[hi..hi + v]);
                    axpy(wk[1], &src[hi..hi + v], &mut dst[hi..hi + v]);
                    continue;
                }
                for k in 0..kernel {
                    let wv = w[(o * c_in + i) * kernel + k];
                    let range = geom.valid_range(k);
                    if range.is_empty() {
                        continue;
                    }
                    if stride == 1 {
                        let s0 = range.start + k - pad;
                        let len = range.len() * v;
                        axpy(
                            wv,
                            &src[s0 * v..s0 * v + len],
                            &mut dst[range.start * v..range.start * v + len],
                        );
                    } else {
                        for to in range {
                            let s = to * stride + k - pad;
                            axpy(wv, &src[s * v..(s + 1) * v], &mut dst[to * v..(to + 1) * v]);
                        }
                    }
                }
            }
        }
    }
    count_macs(geom.macs());
    out
}

/// Returns `(grad_x, grad_w, grad_bias)`.
pub fn conv_backward(geom: &ConvGeom, x: &[f64], w: &[f64], g: &[f64]) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let ConvGeom {
        n,
        c_in,
        c_out,
        t_in,
        t_out,
        v,
        kernel,
        stride,
        pad,
    } = *geom;
    let in_plane = t_in * v;
    let out_plane = t_out * v;
    let mut gx = vec![0.0; x.len()];
    let mut gw = vec![0.0; w.len()];
    let mut gb = vec![0.0; c_out];
    for ni in 0..n {
        for o in 0..c_out {
            let go = &g[(ni * c_out + o) * out_plane..(ni * c_out + o + 1) * out_plane];
            gb[o] += go.iter().sum::<f64>();
            for i in 0..c_in {
                let base = (ni * c_in + i) * in_plane;
                if kernel == 3 && stride == 1 && t_in >= 3 {
                    let w0 = (o * c_in + i) * 3;
                    let wk = [w[w0], w[w0 + 1], w[w0 + 2]];
                    let xs = &x[base..base + in_plane];
                    let (lo, hi) = (v, (t_in - 1) * v);
                    // tap k reads input frame to + k - 1
                    let [d0, d1, d2] = dot3(&go[lo..hi], &xs[lo - v..hi - v], &xs[lo..hi], &xs[lo + v..hi + v]);
                    gw[w0] += d0 + dot(&go[hi..hi + v], &xs[hi - v..hi]);
                    gw[w0 + 1] += d1 + dot(&go[..v], &xs[..v]) + dot(&go[hi..hi + v], &xs[hi..hi + v]);
                    gw[w0 + 2] += d2 + dot(&go[..v], &xs[v..2 * v]);
                    let gxs = &mut gx[base..base + in_plane];
                    axpy3([wk[2], wk[1], wk[0]], &go[lo - v..hi - v], &go[lo..hi], &go[lo + v..hi + v], &mut gxs[lo..hi]);
                    axpy(wk[1], &go[..v], &mut gxs[..v]);
                    axpy(wk[0], &go[v..2 * v], &mut gxs[..v]);
                    axpy(wk[2], &go[hi - v..hi], &mut gxs[hi..hi + v]);
                    axpy(wk[1], &go[hi..hi + v], &mut gxs[hi..hi + v]);
                    continue;
                }
                for k in 0..kernel {
                    let widx = (o * c_in + i) * kernel + k;
                    let wv = w[widx];
                    let range = geom.valid_range(k);
                    if range.is_empty() {
                        continue;
                    }
                    if stride == 1 {
                        let s0 = range.start + k - pad;
                        let len = range.len() * v;
                        let gslice = &go[range.start * v..range.start * v + len];
                        gw[widx] += dot(gslice, &x[base + s0 * v..base + s0 * v + len]);
                        axpy(wv, gslice, &mut gx[base + s0 * v..base + s0 * v + len]);
                    } else {
                        for to in range {
                            let s = to * stride + k - pad;
                            let gslice = &go[to * v..(to + 1) * v];
                            gw[widx] += dot(gslice, &x[base + s * v..base + (s + 1) * v]);
                            axpy(wv, gslice, &mut gx[base + s * v..base + (s + 1) * v]);
                        }
                    }
                }
            }
        }
    }
    (gx, gw, gb)
}

/// `out[r, k] = sum_f x[r, f] * w[k, f] + b[k]`.
pub fn linear_forward(x: &[f64], rows: usize, features: usize, w: &[f64], outputs: usize, bias: Option<&[f64]>) -> Vec<f64> {
    let mut out = vec![0.0; rows * outputs];
    for r in 0..rows {
        let xr = &x[r * features..(r + 1) * features];
        for k in 0..outputs {
            let b = bias.map_or(0.0, |b| b[k]);
            out[r * outputs + k] = b + dot(xr, &w[k * features..(k + 1) * features]);
        }
    }
    count_macs((rows * features * outputs) as u64);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn naive_conv(geom: &ConvGeom, x: &[f64], w: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; geom.n * geom.c_out * geom.t_out * geom.v];
        for n in 0..geom.n {
            for o in 0..geom.c_out {
                for to in 0..geom.t_out {
                    for vi in 0..geom.v {
                        let mut acc = 0.0;
                        for i in 0..geom.c_in {
                            for k in 0..geom.kernel {
                                let s = (to * geom.stride + k) as isize - geom.pad as isize;
                                if s < 0 || s >= geom.t_in as isize {
                                    continue;
                                }
                                let s = s as usize;
                                acc += w[(o * geom.c_in + i) * geom.kernel + k]
                                    * x[((n * geom.c_in + i) * geom.t_in + s) * geom.v + vi];
                            }
                        }
                        out[((n * geom.c_out + o) * geom.t_out + to) * geom.v + vi] = acc;
                    }
                }
            }
        }
        out
    }

    #[test]
    fn conv_matches_naive_loops() {
        for &(t_in, kernel, stride) in &[(7, 3, 1), (7, 3, 2), (8, 5, 2), (5, 1, 1), (9, 9, 2), (3, 5, 1)] {
            let geom = ConvGeom::same(2, 2, 3, t_in, 2, kernel, stride);
            let x: Vec<f64> = (0..2 * 2 * t_in * 2).map(|i| ((i * 7) % 11) as f64 - 5.0).collect();
            let w: Vec<f64> = (0..3 * 2 * kernel).map(|i| ((i * 3) % 5) as f64 - 2.0).collect();
            let fast = conv_forward(&geom, &x, &w, None);
            assert_eq!(fast, naive_conv(&geom, &x, &w), "t_in={t_in} k={kernel} s={stride}");
        }
    }

    #[test]
    fn backward_is_the_adjoint() {
        // <g, conv(x, w)> = <gx, x> = <gw, w> for a linear map without bias
        for &(t_in, kernel, stride) in &[(7, 3, 1), (2, 3, 1), (6, 3, 2), (8, 5, 1), (4, 1, 1)] {
            let geom = ConvGeom::same(2, 3, 2, t_in, 3, kernel, stride);
            let x: Vec<f64> = (0..2 * 3 * t_in * 3).map(|i| ((i * 5) % 7) as f64 - 3.0).collect();
            let w: Vec<f64> = (0..2 * 3 * kernel).map(|i| ((i * 3) % 5) as f64 - 2.0).collect();
            let g: Vec<f64> = (0..2 * 2 * geom.t_out * 3).map(|i| ((i * 2) % 3) as f64 - 1.0).collect();
            let y = conv_forward(&geom, &x, &w, None);
            let (gx, gw, _) = conv_backward(&geom, &x, &w, &g);
            let lhs: f64 = g.iter().zip(&y).map(|(a, b)| a * b).sum();
            let via_x: f64 = gx.iter().zip(&x).map(|(a, b)| a * b).sum();
            let via_w: f64 = gw.iter().zip(&w).map(|(a, b)| a * b).sum();
            assert_eq!(lhs, via_x, "t_in={t_in} k={kernel} s={stride}");
            assert_eq!(lhs, via_w, "t_in={t_in} k={kernel} s={stride}");
        }
    }

    #[test]
    fn output_length_is_ceil() {
        assert_eq!(ConvGeom::same(1, 1, 1, 300, 1, 3, 2).t_out, 150);
        assert_eq!(ConvGeom::same(1, 1, 1, 75, 1, 3, 2).t_out, 38);
    }

    #[test]
    fn mac_counter_tracks_forward_work() {
        reset_mac_counter();
        let geom = ConvGeom::same(1, 2, 3, 4, 5, 3, 1);
        conv_forward(&geom, &vec![1.0; 40], &vec![1.0; 18], None);
        assert_eq!(mac_counter(), 2 * 3 * 3 * 4 * 5);
        graph_mix(&[1.0; 4], 2, &[1.0; 6]);
        assert_eq!(mac_counter(), 360 + 3 * 4);
    }
}
