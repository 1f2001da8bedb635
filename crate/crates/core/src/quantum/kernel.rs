//! Flat-index kernels on column-major `N x N` buffers.
//!
//! A buffer over `n` qubits stores entry `(r, c)` at `c * N + r`, so bits
//! `0..n` of the flat index are the row bits and bits `n..2n` the column bits.
//! Qubit `k` of the register is bit `k` of a row (or column) index.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rayon::prelude::*;

use super::QubitId;
use crate::error::{Error, Result};

const PAR_THRESHOLD: usize = 1 << 14;

#[inline]
fn insert_bit(x: usize, p: usize, a: usize) -> usize {
    ((x >> p) << (p + 1)) | (a << p) | (x & ((1 << p) - 1))
}

/// Applies the `2^m x 2^m` matrix `mat` to flat-index bits `bits`; local bit `k`
/// of the matrix index is flat bit `bits[k]`.
pub(crate) fn apply_on_bits(data: &[C64], bits: &[usize], mat: &DMatrix<C64>) -> Vec<C64> {
    let m = bits.len();
    let d = 1usize << m;
    debug_assert_eq!(mat.nrows(), d);
    let offsets: Vec<usize> = (0..d)
        .map(|l| {
            bits.iter()
                .enumerate()
                .filter(|(k, _)| (l >> k) & 1 == 1)
                .fold(0, |o, (_, &b)| o | (1 << b))
        })
        .collect();
    let mask = offsets[d - 1];
    let rows: Vec<C64> = (0..d)
        .flat_map(|i| (0..d).map(move |j| (i, j)))
        .map(|(i, j)| mat[(i, j)])
        .collect();
    let local = |idx: usize| -> usize {
        bits.iter()
            .enumerate()
            .fold(0, |l, (k, &b)| l | (((idx >> b) & 1) << k))
    };
    let entry = |idx: usize| -> C64 {
        let l = local(idx);
        let base = idx & !mask;
        let row = &rows[l * d..(l + 1) * d];
        row.iter()
            .zip(&offsets)
            .map(|(a, &o)| a * data[base | o])
            .sum()
    };
    if data.len() >= PAR_THRESHOLD {
        (0..data.len()).into_par_iter().map(entry).collect()
    } else {
        (0..data.len()).map(entry).collect()
    }
}

/// Dense operator buffer over an ordered, growable list of qubits.
#[derive(Clone, Debug)]
pub(crate) struct DenseRegister {
    pub qubits: Vec<QubitId>,
    pub data: Vec<C64>,
}

impl DenseRegister {
    pub fn scalar(v: C64) -> Self {
        Self { qubits: Vec::new(), data: vec![v] }
    }

    pub fn from_matrix(qubits: Vec<QubitId>, m: &DMatrix<C64>) -> Self {
        debug_assert_eq!(m.nrows(), 1 << qubits.len());
        Self { qubits, data: m.as_slice().to_vec() }
    }

    pub fn to_matrix(&self) -> DMatrix<C64> {
        let n = self.dim();
        DMatrix::from_column_slice(n, n, &self.data)
    }

    pub fn n(&self) -> usize {
        self.qubits.len()
    }

    pub fn dim(&self) -> usize {
        1 << self.qubits.len()
    }

    pub fn pos(&self, q: &QubitId) -> Option<usize> {
        self.qubits.iter().position(|x| x == q)
    }

    pub fn positions(&self, qs: &[QubitId]) -> Result<Vec<usize>> {
        qs.iter()
            .map(|q| {
                self.pos(q)
                    .ok_or_else(|| Error::SupportMismatch(format!("{q} not in register")))
            })
            .collect()
    }

    /// Appends `q` as the most significant qubit: `X <- X (x) m`.
    pub fn push(&mut self, q: QubitId, m: &DMatrix<C64>) {
        debug_assert!(self.pos(&q).is_none());
        let n = self.dim();
        let n2 = 2 * n;
        let mut out = vec![C64::new(0.0, 0.0); n2 * n2];
        for b in 0..2 {
            for a in 0..2 {
                let w = m[(a, b)];
                if w == C64::new(0.0, 0.0) {
                    continue;
                }
                for c in 0..n {
                    let src = &self.data[c * n..(c + 1) * n];
                    let dst0 = (c + n * b) * n2 + n * a;
                    for (r, v) in src.iter().enumerate() {
                        out[dst0 + r] = v * w;
                    }
                }
            }
        }
        self.data = out;
        self.qubits.push(q);
    }

    fn row_bits(&self, pos: &[usize]) -> Vec<usize> {
        pos.to_vec()
    }

    fn col_bits(&self, pos: &[usize]) -> Vec<usize> {
        pos.iter().map(|p| p + self.n()).collect()
    }

    /// `X <- (M on pos) X`.
    pub fn left(&mut self, pos: &[usize], m: &DMatrix<C64>) {
        self.data = apply_on_bits(&self.data, &self.row_bits(pos), m);
    }

    /// `X <- X (M on pos)`.
    pub fn right(&mut self, pos: &[usize], m: &DMatrix<C64>) {
        self.data = apply_on_bits(&self.data, &self.col_bits(pos), &m.transpose());
    }

    /// `X <- U X U^dagger`.
    pub fn conjugate(&mut self, pos: &[usize], u: &DMatrix<C64>) {
        self.left(pos, u);
        self.right(pos, &u.adjoint());
    }

    /// `X <- U^dagger X U`.
    pub fn heisenberg(&mut self, pos: &[usize], u: &DMatrix<C64>) {
        self.left(pos, &u.adjoint());
        self.right(pos, u);
    }

    /// `X <- Tr_pos[X] (x) I / d` on the same positions.
    pub fn depolarize(&mut self, pos: &[usize]) {
        let n = self.dim();
        let d = 1usize << pos.len();
        let offs: Vec<usize> = (0..d)
            .map(|l| pos.iter().enumerate().fold(0, |o, (k, &p)| o | (((l >> k) & 1) << p)))
            .collect();
        let mask = offs[d - 1];
        let scale = 1.0 / d as f64;
        let mut out = vec![C64::new(0.0, 0.0); n * n];
        for c in (0..n).filter(|c| c & mask == 0) {
            for r in (0..n).filter(|r| r & mask == 0) {
                let s: C64 = offs.iter().map(|o| self.data[(c | o) * n + (r | o)]).sum::<C64>() * scale;
                for o in &offs {
                    out[(c | o) * n + (r | o)] = s;
                }
            }
        }
        self.data = out;
    }

    /// `X <- Tr_q[(w (x) I) X]` for the qubit at `p`; removes it from the register.
    pub fn contract(&mut self, p: usize, w: &DMatrix<C64>) {
        let n = self.dim();
        let h = n / 2;
        let mut out = vec![C64::new(0.0, 0.0); h * h];
        for a in 0..2 {
            for b in 0..2 {
                let wab = w[(a, b)];
                if wab == C64::new(0.0, 0.0) {
                    continue;
                }
                for c in 0..h {
                    let cc = insert_bit(c, p, a);
                    for r in 0..h {
                        let rr = insert_bit(r, p, b);
                        out[c * h + r] += wab * self.data[cc * n + rr];
                    }
                }
            }
        }
        self.data = out;
        self.qubits.remove(p);
    }

    pub fn trace_out(&mut self, q: &QubitId) -> Result<()> {
        let p = self
            .pos(q)
            .ok_or_else(|| Error::SupportMismatch(format!("{q} not in register")))?;
        self.contract(p, &DMatrix::identity(2, 2));
        Ok(())
    }

    pub fn trace(&self) -> C64 {
        let n = self.dim();
        (0..n).map(|i| self.data[i * n + i]).sum()
    }

    /// Reorders the qubits to `order`, which must be a permutation of the register.
    pub fn permute(&mut self, order: &[QubitId]) -> Result<()> {
        if order.len() != self.n() {
            return Err(Error::SupportMismatch("permutation length".into()));
        }
        let perm = self.positions(order)?;
        if perm.iter().enumerate().all(|(k, &p)| k == p) {
            return Ok(());
        }
        let n = self.dim();
        let map: Vec<usize> = (0..n)
            .map(|x| {
                perm.iter()
                    .enumerate()
                    .fold(0, |o, (k, &p)| o | (((x >> k) & 1) << p))
            })
            .collect();
        let mut out = vec![C64::new(0.0, 0.0); n * n];
        for c in 0..n {
            let oc = map[c] * n;
            for r in 0..n {
                out[c * n + r] = self.data[oc + map[r]];
            }
        }
        self.data = out;
        self.qubits = order.to_vec();
        Ok(())
    }

    /// `Tr[X M]` for `M` supported on register qubits `pos`.
    pub fn trace_with(&self, pos: &[usize], m: &DMatrix<C64>) -> C64 {
        // Tr[X M] = sum over entries X(r, c) M_full(c, r).
        let n = self.dim();
        let d = m.nrows();
        let mask: usize = pos.iter().map(|p| 1usize << p).sum();
        let local = |x: usize| pos.iter().enumerate().fold(0, |l, (k, &p)| l | (((x >> p) & 1) << k));
        let col = |c: usize| -> C64 {
            let lc = local(c);
            let mut s = C64::new(0.0, 0.0);
            for lr in 0..d {
                let r = (c & !mask)
                    | pos
                        .iter()
                        .enumerate()
                        .fold(0, |o, (k, &p)| o | (((lr >> k) & 1) << p));
                s += self.data[c * n + r] * m[(lc, lr)];
            }
            s
        };
        if n * n >= PAR_THRESHOLD {
            // collect first so the summation order does not depend on the thread count
            let cols: Vec<C64> = (0..n).into_par_iter().map(col).collect();
            cols.into_iter().sum()
        } else {
            (0..n).map(col).sum()
        }
    }
}
