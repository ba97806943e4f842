//! Pure states, density matrices, and unitary evolution.
//!
//! Qubit 0 is the most significant bit of the amplitude index, so the basis
//! state `|q0 q1 q2>` sits at index `q0*4 + q1*2 + q2` in a 3-qubit state.

use num_complex::Complex64;

use crate::{Error, Result};

pub const C_ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const C_ONE: Complex64 = Complex64::new(1.0, 0.0);

/// A square complex matrix in row-major order, used for gates.
#[derive(Debug, Clone, PartialEq)]
pub struct Unitary {
    pub dim: usize,
    pub data: Vec<Complex64>,
}

impl Unitary {
    pub fn identity(dim: usize) -> Self {
        let mut data = vec![C_ZERO; dim * dim];
        for i in 0..dim {
            data[i * dim + i] = C_ONE;
        }
        Unitary { dim, data }
    }

    pub fn at(&self, r: usize, c: usize) -> Complex64 {
        self.data[r * self.dim + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: Complex64) {
        self.data[r * self.dim + c] = v;
    }

    pub fn matmul(&self, rhs: &Unitary) -> Unitary {
        assert_eq!(self.dim, rhs.dim);
        let n = self.dim;
        let mut out = Unitary {
            dim: n,
            data: vec![C_ZERO; n * n],
        };
        for r in 0..n {
            for k in 0..n {
                let a = self.at(r, k);
                if a == C_ZERO {
                    continue;
                }
                for c in 0..n {
                    out.data[r * n + c] += a * rhs.at(k, c);
                }
            }
        }
        out
    }

    pub fn dagger(&self) -> Unitary {
        let n = self.dim;
        let mut out = Unitary {
            dim: n,
            data: vec![C_ZERO; n * n],
        };
        for r in 0..n {
            for c in 0..n {
                out.data[c * n + r] = self.at(r, c).conj();
            }
        }
        out
    }

    /// Largest absolute deviation of `U U^dagger` from the identity.
    pub fn unitarity_defect(&self) -> f64 {
        let prod = self.matmul(&self.dagger());
        let mut worst = 0.0f64;
        for r in 0..self.dim {
            for c in 0..self.dim {
                let expect = if r == c { C_ONE } else { C_ZERO };
                worst = worst.max((prod.at(r, c) - expect).norm());
            }
        }
        worst
    }
}

/// An `n`-qubit pure state.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amplitudes: Vec<Complex64>,
}

impl StateVector {
    /// The computational basis state with the given bits (qubit 0 first).
    pub fn basis(bits: &[u8]) -> Self {
        let n = bits.len();
        let mut idx = 0usize;
        for &b in bits {
            idx = (idx << 1) | (b as usize & 1);
        }
        let mut amplitudes = vec![C_ZERO; 1 << n];
        amplitudes[idx] = C_ONE;
        StateVector {
            n_qubits: n,
            amplitudes,
        }
    }

    pub fn from_amplitudes(n_qubits: usize, amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.len() != 1 << n_qubits {
            return Err(Error::InvalidArgument("amplitude count mismatch".into()));
        }
        Ok(StateVector {
            n_qubits,
            amplitudes,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn norm_sq(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Applies a `k`-qubit gate to the listed target qubits; `targets[0]`
    /// addresses the most significant index bit of the gate.
    pub fn apply_unitary(&mut self, gate: &Unitary, targets: &[usize]) -> Result<()> {
        let k = targets.len();
        if gate.dim != 1 << k {
            return Err(Error::InvalidArgument(
                "gate dimension does not match target count".into(),
            ));
        }
        for &t in targets {
            if t >= self.n_qubits {
                return Err(Error::InvalidArgument(format!(
                    "qubit index {t} out of range"
                )));
            }
        }
        let dim = 1 << k;
        let n = self.n_qubits;
        let target_masks: Vec<usize> = targets.iter().map(|&t| 1usize << (n - 1 - t)).collect();
        let all_targets: usize = target_masks.iter().sum();
        let mut scratch = vec![C_ZERO; dim];
        for base in 0..self.amplitudes.len() {
            if base & all_targets != 0 {
                continue;
            }
            // Gather the 2^k amplitudes that share the non-target bits.
            for (t, slot) in scratch.iter_mut().enumerate() {
                let mut idx = base;
                for (bit, mask) in target_masks.iter().enumerate() {
                    if t & (1 << (k - 1 - bit)) != 0 {
                        idx |= mask;
                    }
                }
                *slot = self.amplitudes[idx];
            }
            for t in 0..dim {
                let mut acc = C_ZERO;
                for (s, &amp) in scratch.iter().enumerate() {
                    acc += gate.at(t, s) * amp;
                }
                let mut idx = base;
                for (bit, mask) in target_masks.iter().enumerate() {
                    if t & (1 << (k - 1 - bit)) != 0 {
                        idx |= mask;
                    }
                }
                self.amplitudes[idx] = acc;
            }
        }
        Ok(())
    }

    /// The pure-state density matrix `|psi><psi|`.
    pub fn density_matrix(&self) -> DensityMatrix {
        let dim = self.amplitudes.len();
        let mut entries = vec![C_ZERO; dim * dim];
        for r in 0..dim {
            for c in 0..dim {
                entries[r * dim + c] = self.amplitudes[r] * self.amplitudes[c].conj();
            }
        }
        DensityMatrix {
            n_qubits: self.n_qubits,
            entries,
        }
    }
}

/// An `n`-qubit mixed state as a dense density matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    n_qubits: usize,
    entries: Vec<Complex64>,
}

impl DensityMatrix {
    pub fn new(n_qubits: usize, entries: Vec<Complex64>) -> Result<Self> {
        let dim = 1usize << n_qubits;
        if entries.len() != dim * dim {
            return Err(Error::InvalidArgument(
                "density matrix size mismatch".into(),
            ));
        }
        Ok(DensityMatrix { n_qubits, entries })
    }

    /// The maximally mixed state `I / 2^n`.
    pub fn maximally_mixed(n_qubits: usize) -> Self {
        let dim = 1usize << n_qubits;
        let mut entries = vec![C_ZERO; dim * dim];
        for i in 0..dim {
            entries[i * dim + i] = Complex64::new(1.0 / dim as f64, 0.0);
        }
        DensityMatrix { n_qubits, entries }
    }

    /// Tensor product `self (x) rhs`, `self` on the more significant qubits.
    pub fn tensor(&self, rhs: &DensityMatrix) -> DensityMatrix {
        let da = 1usize << self.n_qubits;
        let db = 1usize << rhs.n_qubits;
        let dim = da * db;
        let mut entries = vec![C_ZERO; dim * dim];
        for ra in 0..da {
            for ca in 0..da {
                let va = self.at(ra, ca);
                if va == C_ZERO {
                    continue;
                }
                for rb in 0..db {
                    for cb in 0..db {
                        entries[(ra * db + rb) * dim + (ca * db + cb)] = va * rhs.at(rb, cb);
                    }
                }
            }
        }
        DensityMatrix {
            n_qubits: self.n_qubits + rhs.n_qubits,
            entries,
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        1 << self.n_qubits
    }

    pub fn at(&self, r: usize, c: usize) -> Complex64 {
        self.entries[r * self.dim() + c]
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim()).map(|i| self.at(i, i)).sum()
    }

    /// Applies `U rho U^dagger` on the listed target qubits.
    pub fn apply_unitary(&mut self, gate: &Unitary, targets: &[usize]) -> Result<()> {
        let full = embed_gate(gate, targets, self.n_qubits)?;
        let dim = self.dim();
        // rho -> U rho U^dagger with dense multiplication; states are tiny.
        let mut tmp = vec![C_ZERO; dim * dim];
        for r in 0..dim {
            for k in 0..dim {
                let u = full.at(r, k);
                if u == C_ZERO {
                    continue;
                }
                for c in 0..dim {
                    tmp[r * dim + c] += u * self.entries[k * dim + c];
                }
            }
        }
        let mut out = vec![C_ZERO; dim * dim];
        for r in 0..dim {
            for k in 0..dim {
                let t = tmp[r * dim + k];
                if t == C_ZERO {
                    continue;
                }
                for c in 0..dim {
                    out[r * dim + c] += t * full.at(c, k).conj();
                }
            }
        }
        self.entries = out;
        Ok(())
    }

    /// Trace of `self * rhs`, real part (both Hermitian).
    pub fn product_trace(&self, rhs: &DensityMatrix) -> Result<f64> {
        if self.n_qubits != rhs.n_qubits {
            return Err(Error::InvalidArgument("dimension mismatch".into()));
        }
        let dim = self.dim();
        let mut acc = C_ZERO;
        for r in 0..dim {
            for c in 0..dim {
                acc += self.at(r, c) * rhs.at(c, r);
            }
        }
        Ok(acc.re)
    }
}

/// Expands a gate on `targets` to the full `n`-qubit unitary.
pub fn embed_gate(gate: &Unitary, targets: &[usize], n: usize) -> Result<Unitary> {
    let k = targets.len();
    if gate.dim != 1 << k {
        return Err(Error::InvalidArgument(
            "gate dimension does not match target count".into(),
        ));
    }
    for &t in targets {
        if t >= n {
            return Err(Error::InvalidArgument(format!(
                "qubit index {t} out of range"
            )));
        }
    }
    let dim = 1usize << n;
    let mut out = Unitary {
        dim,
        data: vec![C_ZERO; dim * dim],
    };
    let extract = |idx: usize| -> usize {
        let mut sub = 0usize;
        for (bit, &t) in targets.iter().enumerate() {
            if idx & (1 << (n - 1 - t)) != 0 {
                sub |= 1 << (k - 1 - bit);
            }
        }
        sub
    };
    let replace = |idx: usize, sub: usize| -> usize {
        let mut out = idx;
        for (bit, &t) in targets.iter().enumerate() {
            let mask = 1usize << (n - 1 - t);
            if sub & (1 << (k - 1 - bit)) != 0 {
                out |= mask;
            } else {
                out &= !mask;
            }
        }
        out
    };
    for r in 0..dim {
        let rsub = extract(r);
        for csub in 0..(1 << k) {
            let c = replace(r, csub);
            out.set(r, c, gate.at(rsub, csub));
        }
    }
    Ok(out)
}

/// Reduced density matrix over the `keep` qubits (in the order given).
pub fn partial_trace(rho: &DensityMatrix, keep: &[usize]) -> Result<DensityMatrix> {
    if keep.is_empty() {
        return Err(Error::InvalidArgument(
            "cannot trace out every qubit".into(),
        ));
    }
    let n = rho.n_qubits();
    for &q in keep {
        if q >= n {
            return Err(Error::InvalidArgument(format!(
                "qubit index {q} out of range"
            )));
        }
    }
    let k = keep.len();
    let traced: Vec<usize> = (0..n).filter(|q| !keep.contains(q)).collect();
    let dim_keep = 1usize << k;
    let dim_traced = 1usize << traced.len();
    let build = |sub: usize, env: usize| -> usize {
        let mut idx = 0usize;
        for (bit, &q) in keep.iter().enumerate() {
            if sub & (1 << (k - 1 - bit)) != 0 {
                idx |= 1 << (n - 1 - q);
            }
        }
        for (bit, &q) in traced.iter().enumerate() {
            if env & (1 << (traced.len() - 1 - bit)) != 0 {
                idx |= 1 << (n - 1 - q);
            }
        }
        idx
    };
    let mut entries = vec![C_ZERO; dim_keep * dim_keep];
    for r in 0..dim_keep {
        for c in 0..dim_keep {
            let mut acc = C_ZERO;
            for env in 0..dim_traced {
                acc += rho.at(build(r, env), build(c, env));
            }
            entries[r * dim_keep + c] = acc;
        }
    }
    Ok(DensityMatrix {
        n_qubits: k,
        entries,
    })
}
