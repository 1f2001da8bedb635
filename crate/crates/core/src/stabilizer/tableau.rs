use crate::error::{out_of_range, Result};
use crate::quantum::Pauli;

/// Destabilizer/stabilizer tableau on `n` qubits with bit-packed rows.
/// Rows `0..n` are destabilizers, rows `n..2n` stabilizers.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StabilizerTableau {
    n: usize,
    words: usize,
    x: Vec<u64>,
    z: Vec<u64>,
    r: Vec<bool>,
}

#[inline]
fn get(v: &[u64], base: usize, q: usize) -> bool {
    v[base + q / 64] >> (q % 64) & 1 == 1
}

#[inline]
fn flip(v: &mut [u64], base: usize, q: usize) {
    v[base + q / 64] ^= 1 << (q % 64);
}

/// Exponent of `i` picked up when multiplying single-qubit Paulis `(x1,z1)(x2,z2)`.
fn g(x1: bool, z1: bool, x2: bool, z2: bool) -> i32 {
    match (x1, z1) {
        (false, false) => 0,
        (true, true) => z2 as i32 - x2 as i32,
        (true, false) => (z2 as i32) * (2 * x2 as i32 - 1),
        (false, true) => (x2 as i32) * (1 - 2 * z2 as i32),
    }
}

impl StabilizerTableau {
    /// `|0...0>`.
    pub fn new(n: usize) -> Self {
        let words = n.div_ceil(64).max(1);
        let mut t = Self { n, words, x: vec![0; 2 * n * words], z: vec![0; 2 * n * words], r: vec![false; 2 * n] };
        for q in 0..n {
            flip(&mut t.x, q * words, q);
            flip(&mut t.z, (n + q) * words, q);
        }
        t
    }

    pub fn n(&self) -> usize {
        self.n
    }

    fn check(&self, q: usize) -> Result<()> {
        if q >= self.n {
            return Err(out_of_range("qubit index", q as f64, 0.0, self.n as f64 - 1.0));
        }
        Ok(())
    }

    fn rows(&self) -> usize {
        2 * self.n
    }

    pub fn h(&mut self, a: usize) -> Result<()> {
        self.check(a)?;
        for i in 0..self.rows() {
            let b = i * self.words;
            let (xa, za) = (get(&self.x, b, a), get(&self.z, b, a));
            self.r[i] ^= xa && za;
            if xa != za {
                flip(&mut self.x, b, a);
                flip(&mut self.z, b, a);
            }
        }
        Ok(())
    }

    pub fn s(&mut self, a: usize) -> Result<()> {
        self.check(a)?;
        for i in 0..self.rows() {
            let b = i * self.words;
            let (xa, za) = (get(&self.x, b, a), get(&self.z, b, a));
            self.r[i] ^= xa && za;
            if xa {
                flip(&mut self.z, b, a);
            }
        }
        Ok(())
    }

    pub fn cnot(&mut self, c: usize, t: usize) -> Result<()> {
        self.check(c)?;
        self.check(t)?;
        for i in 0..self.rows() {
            let b = i * self.words;
            let (xc, zc, xt, zt) = (get(&self.x, b, c), get(&self.z, b, c), get(&self.x, b, t), get(&self.z, b, t));
            self.r[i] ^= xc && zt && (xt == zc);
            if xc {
                flip(&mut self.x, b, t);
            }
            if zt {
                flip(&mut self.z, b, c);
            }
        }
        Ok(())
    }

    pub fn swap(&mut self, a: usize, b: usize) -> Result<()> {
        self.check(a)?;
        self.check(b)?;
        for i in 0..self.rows() {
            let base = i * self.words;
            for v in [&mut self.x, &mut self.z] {
                if get(v, base, a) != get(v, base, b) {
                    flip(v, base, a);
                    flip(v, base, b);
                }
            }
        }
        Ok(())
    }

    /// Applies the Pauli gate `p` on qubit `a` (signs only).
    pub fn pauli(&mut self, a: usize, p: Pauli) -> Result<()> {
        self.check(a)?;
        let (px, pz) = p.bits();
        for i in 0..self.rows() {
            let b = i * self.words;
            // row anticommutes with p
            self.r[i] ^= (get(&self.x, b, a) && pz) ^ (get(&self.z, b, a) && px);
        }
        Ok(())
    }

    fn row_bits(&self, i: usize) -> (&[u64], &[u64]) {
        let b = i * self.words;
        (&self.x[b..b + self.words], &self.z[b..b + self.words])
    }

    fn symplectic(x1: &[u64], z1: &[u64], x2: &[u64], z2: &[u64]) -> bool {
        let mut acc = 0u32;
        for w in 0..x1.len() {
            acc ^= ((x1[w] & z2[w]) ^ (z1[w] & x2[w])).count_ones() & 1;
        }
        acc == 1
    }

    /// Stabilizer generator `i` as Pauli letters and sign (`true` means `-`).
    pub fn stabilizer(&self, i: usize) -> (Vec<Pauli>, bool) {
        let (x, z) = self.row_bits(self.n + i);
        let letters = (0..self.n).map(|q| Pauli::from_bits(get(x, 0, q), get(z, 0, q))).collect();
        (letters, self.r[self.n + i])
    }

    /// `<P>` for `P = prod_k letters[k]` on qubits `qubits[k]`, with `negate`
    /// multiplying by `-1`. Returns `1`, `-1` or `0`.
    pub fn expectation(&self, qubits: &[usize], letters: &[Pauli], negate: bool) -> Result<i8> {
        let mut px = vec![0u64; self.words];
        let mut pz = vec![0u64; self.words];
        for (&q, &p) in qubits.iter().zip(letters) {
            self.check(q)?;
            let (bx, bz) = p.bits();
            if bx {
                flip(&mut px, 0, q);
            }
            if bz {
                flip(&mut pz, 0, q);
            }
        }
        for i in self.n..self.rows() {
            let (x, z) = self.row_bits(i);
            if Self::symplectic(x, z, &px, &pz) {
                return Ok(0);
            }
        }
        // P = +/- product of the stabilizers whose destabilizer anticommutes with P
        let mut sx = vec![0u64; self.words];
        let mut sz = vec![0u64; self.words];
        let mut phase = 0i32;
        for i in 0..self.n {
            let (dx, dz) = self.row_bits(i);
            if !Self::symplectic(dx, dz, &px, &pz) {
                continue;
            }
            let (x, z) = self.row_bits(self.n + i);
            phase += 2 * self.r[self.n + i] as i32;
            for q in 0..self.n {
                phase += g(get(x, 0, q), get(z, 0, q), get(&sx, 0, q), get(&sz, 0, q));
            }
            for w in 0..self.words {
                sx[w] ^= x[w];
                sz[w] ^= z[w];
            }
        }
        debug_assert!(sx == px && sz == pz);
        let negative = phase.rem_euclid(4) == 2;
        Ok(if negative ^ negate { -1 } else { 1 })
    }

    /// Stabilizers commute, each destabilizer anticommutes exactly with its
    /// partner, and destabilizers commute among themselves.
    pub fn check_invariants(&self) -> bool {
        let n = self.n;
        for i in 0..2 * n {
            for j in i + 1..2 * n {
                let (xi, zi) = self.row_bits(i);
                let (xj, zj) = self.row_bits(j);
                let anti = Self::symplectic(xi, zi, xj, zj);
                if anti != (j == i + n) {
                    return false;
                }
            }
        }
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hadamard_maps_z_to_x() {
        let mut t = StabilizerTableau::new(1);
        assert_eq!(t.expectation(&[0], &[Pauli::Z], false).unwrap(), 1);
        assert_eq!(t.expectation(&[0], &[Pauli::X], false).unwrap(), 0);
        t.h(0).unwrap();
        assert_eq!(t.stabilizer(0), (vec![Pauli::X], false));
        assert_eq!(t.expectation(&[0], &[Pauli::X], false).unwrap(), 1);
        t.pauli(0, Pauli::Z).unwrap();
        assert_eq!(t.expectation(&[0], &[Pauli::X], false).unwrap(), -1);
    }

    #[test]
    fn bell_pair() {
        let mut t = StabilizerTableau::new(2);
        t.h(0).unwrap();
        t.cnot(0, 1).unwrap();
        assert_eq!(t.expectation(&[0, 1], &[Pauli::X, Pauli::X], false).unwrap(), 1);
        assert_eq!(t.expectation(&[0, 1], &[Pauli::Z, Pauli::Z], false).unwrap(), 1);
        assert_eq!(t.expectation(&[0, 1], &[Pauli::Y, Pauli::Y], false).unwrap(), -1);
        assert_eq!(t.expectation(&[0], &[Pauli::Z], false).unwrap(), 0);
        assert!(t.check_invariants());
        assert!(t.cnot(0, 2).is_err());
    }

    #[test]
    fn phase_gate_and_swap() {
        let mut t = StabilizerTableau::new(2);
        t.h(0).unwrap();
        t.s(0).unwrap();
        assert_eq!(t.expectation(&[0], &[Pauli::Y], false).unwrap(), 1);
        t.swap(0, 1).unwrap();
        assert_eq!(t.expectation(&[1], &[Pauli::Y], false).unwrap(), 1);
        assert_eq!(t.expectation(&[0], &[Pauli::Z], true).unwrap(), -1);
    }

    #[test]
    fn wide_registers_use_several_words() {
        let n = 130;
        let mut t = StabilizerTableau::new(n);
        t.h(0).unwrap();
        for q in 1..n {
            t.cnot(q - 1, q).unwrap();
        }
        let all: Vec<usize> = (0..n).collect();
        assert_eq!(t.expectation(&all, &vec![Pauli::X; n], false).unwrap(), 1);
        assert_eq!(t.expectation(&[3, 129], &[Pauli::Z, Pauli::Z], false).unwrap(), 1);
        assert_eq!(t.expectation(&[3], &[Pauli::Z], false).unwrap(), 0);
    }
}
