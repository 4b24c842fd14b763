//! Three-dimensional FFT of an `n^3` block zero-padded to `m^3`, with the
//! transforms pruned to the lines that can be non-zero (forward) or that are
//! needed for the `n^3` output block (inverse).

use std::sync::Arc;

use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::C64;

/// Padded sizes beyond this many points per axis are refused.
pub const MAX_PADDED: usize = 400;

#[derive(Clone)]
pub struct PaddedFft {
    n: usize,
    m: usize,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for PaddedFft {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "PaddedFft({} -> {})", self.n, self.m)
    }
}

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

impl PaddedFft {
    pub fn new(n: usize, m: usize) -> Result<Self> {
        if m < n || m > MAX_PADDED {
            return Err(Error::FftTooLarge { size: m });
        }
        let mut planner = FftPlanner::new();
        Ok(Self {
            n,
            m,
            fwd: planner.plan_fft_forward(m),
            inv: planner.plan_fft_inverse(m),
        })
    }

    pub fn padded(&self) -> usize {
        self.m
    }

    fn scratch(&self) -> Vec<C64> {
        vec![
            ZERO;
            self.fwd
                .get_inplace_scratch_len()
                .max(self.inv.get_inplace_scratch_len())
        ]
    }

    /// Unnormalised forward transform of `src` (length `n^3`) embedded in the
    /// corner of an `m^3` zero array.
    pub fn forward(&self, src: &[C64]) -> Vec<C64> {
        let (n, m) = (self.n, self.m);
        let mm = m * m;
        let mut buf = vec![ZERO; m * mm];
        for i in 0..n {
            for j in 0..n {
                let s = (i * n + j) * n;
                let d = (i * m + j) * m;
                buf[d..d + n].copy_from_slice(&src[s..s + n]);
            }
        }
        let mut scratch = self.scratch();
        // last axis: lines with i < n, j < n (contiguous within each i-plane)
        for i in 0..n {
            let d = i * mm;
            self.fwd
                .process_with_scratch(&mut buf[d..d + n * m], &mut scratch);
        }
        // middle axis: planes i < n
        let mut tmp = vec![ZERO; mm];
        for i in 0..n {
            let plane = &mut buf[i * mm..(i + 1) * mm];
            transpose(plane, &mut tmp, m);
            self.fwd.process_with_scratch(&mut tmp, &mut scratch);
            transpose(&tmp, plane, m);
        }
        // first axis: every (j, l)
        self.first_axis(&mut buf, &mut tmp, &mut scratch, true, m);
        buf
    }

    /// Inverse transform normalised by `1/m^3`, returning the `n^3` corner.
    pub fn inverse(&self, mut buf: Vec<C64>) -> Vec<C64> {
        let (n, m) = (self.n, self.m);
        let mm = m * m;
        let mut scratch = self.scratch();
        let mut tmp = vec![ZERO; mm];
        self.first_axis(&mut buf, &mut tmp, &mut scratch, false, n);
        for i in 0..n {
            let plane = &mut buf[i * mm..(i + 1) * mm];
            transpose(plane, &mut tmp, m);
            self.inv.process_with_scratch(&mut tmp, &mut scratch);
            transpose(&tmp, plane, m);
        }
        for i in 0..n {
            let d = i * mm;
            self.inv
                .process_with_scratch(&mut buf[d..d + n * m], &mut scratch);
        }
        let norm = 1.0 / (m * mm) as f64;
        let mut out = Vec::with_capacity(n * n * n);
        for i in 0..n {
            for j in 0..n {
                let d = (i * m + j) * m;
                out.extend(buf[d..d + n].iter().map(|z| z * norm));
            }
        }
        out
    }

    /// Transforms along the slowest axis. For each `j`, the `(i, l)` slab is
    /// gathered as rows indexed by `l`; only `i < keep` is written back.
    fn first_axis(
        &self,
        buf: &mut [C64],
        tmp: &mut [C64],
        scratch: &mut [C64],
        forward: bool,
        keep: usize,
    ) {
        let m = self.m;
        let mm = m * m;
        for j in 0..m {
            for i in 0..m {
                let row = &buf[i * mm + j * m..i * mm + j * m + m];
                for (l, z) in row.iter().enumerate() {
                    tmp[l * m + i] = *z;
                }
            }
            if forward {
                self.fwd.process_with_scratch(tmp, scratch);
            } else {
                self.inv.process_with_scratch(tmp, scratch);
            }
            for i in 0..keep {
                let row = &mut buf[i * mm + j * m..i * mm + j * m + m];
                for (l, z) in row.iter_mut().enumerate() {
                    *z = tmp[l * m + i];
                }
            }
        }
    }
}

fn transpose(src: &[C64], dst: &mut [C64], m: usize) {
    const B: usize = 16;
    for ib in (0..m).step_by(B) {
        for jb in (0..m).step_by(B) {
            for i in ib..(ib + B).min(m) {
                for j in jb..(jb + B).min(m) {
                    dst[j * m + i] = src[i * m + j];
                }
            }
        }
    }
}
