//! Compiled right-hand side of the master equation.
//!
//! Operators here are very sparse (ladder and Pauli products), so the
//! Liouvillian is applied through coordinate lists instead of dense
//! products. Matrices are column-major slices of length d².

use num_complex::Complex64;

use super::LiouvillianSpec;
use crate::ops::{c, CMatrix};

#[derive(Debug, Clone, Default)]
pub(crate) struct Sparse {
    entries: Vec<(usize, usize, Complex64)>,
}

impl Sparse {
    pub(crate) fn from_dense(m: &CMatrix) -> Self {
        let mut entries = Vec::new();
        for col in 0..m.ncols() {
            for row in 0..m.nrows() {
                let v = m[(row, col)];
                if v.re != 0.0 || v.im != 0.0 {
                    entries.push((row, col, v));
                }
            }
        }
        Self { entries }
    }

    pub(crate) fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// out += coef · S · x
    fn left_acc(&self, coef: Complex64, x: &[Complex64], out: &mut [Complex64], d: usize) {
        for j in 0..d {
            let base = j * d;
            for &(r, cidx, v) in &self.entries {
                out[base + r] += coef * v * x[base + cidx];
            }
        }
    }

    /// out += coef · x · S†
    fn right_adjoint_acc(&self, coef: Complex64, x: &[Complex64], out: &mut [Complex64], d: usize) {
        // (x S†)[:, r] += conj(S[r, c]) · x[:, c]
        for &(r, cidx, v) in &self.entries {
            let w = coef * v.conj();
            let (dst, src) = (r * d, cidx * d);
            for i in 0..d {
                out[dst + i] += w * x[src + i];
            }
        }
    }

    /// y = S · x as a dense vector.
    pub(crate) fn apply_vec(&self, coef: Complex64, x: &[Complex64], out: &mut [Complex64]) {
        for &(r, cidx, v) in &self.entries {
            out[r] += coef * v * x[cidx];
        }
    }
}

pub(crate) struct CompiledLiouvillian {
    pub(crate) d: usize,
    /// H_static - (i/2) Σ k c†c
    effective_static: Sparse,
    drive: Sparse,
    /// √k · c for every dissipator with k > 0
    jumps: Vec<Sparse>,
    scratch: Vec<Complex64>,
}

impl CompiledLiouvillian {
    pub(crate) fn new(l: &LiouvillianSpec) -> Self {
        let d = l.space.dim();
        let mut h_eff = l.static_hamiltonian.matrix.clone();
        let mut jumps = Vec::new();
        for diss in &l.dissipators {
            if diss.rate == 0.0 {
                continue;
            }
            let cmat = &diss.collapse.matrix;
            h_eff -= (cmat.adjoint() * cmat) * c(0.0, 0.5 * diss.rate);
            jumps.push(Sparse::from_dense(&(cmat * c(diss.rate.sqrt(), 0.0))));
        }
        Self {
            d,
            effective_static: Sparse::from_dense(&h_eff),
            drive: Sparse::from_dense(&l.drive_coupling.matrix),
            jumps,
            scratch: vec![c(0.0, 0.0); d * d],
        }
    }

    /// out = 𝓛(g) ρ for Hermitian ρ.
    ///
    /// Writes W = -i H_eff ρ + ½ Σ JρJ† and returns W + W†, which equals the
    /// Lindblad generator whenever ρ is Hermitian.
    pub(crate) fn apply(&mut self, g: f64, rho: &[Complex64], out: &mut [Complex64]) {
        let d = self.d;
        out.iter_mut().for_each(|z| *z = c(0.0, 0.0));
        let minus_i = c(0.0, -1.0);
        self.effective_static.left_acc(minus_i, rho, out, d);
        if g != 0.0 && !self.drive.is_empty() {
            self.drive.left_acc(minus_i * g, rho, out, d);
        }
        for jump in &self.jumps {
            self.scratch.iter_mut().for_each(|z| *z = c(0.0, 0.0));
            jump.left_acc(c(1.0, 0.0), rho, &mut self.scratch, d);
            jump.right_adjoint_acc(c(0.5, 0.0), &self.scratch, out, d);
        }
        for j in 0..d {
            for i in 0..=j {
                let s = out[i + j * d] + out[j + i * d].conj();
                out[i + j * d] = s;
                out[j + i * d] = s.conj();
            }
        }
    }

    pub(crate) fn hamiltonian_parts(&self) -> (&Sparse, &Sparse) {
        (&self.effective_static, &self.drive)
    }
}
