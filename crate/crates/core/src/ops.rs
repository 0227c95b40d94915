//! Dense operator algebra on truncated composite Hilbert spaces.
//!
//! Basis ordering is row-major over the factors: for [2, N, M] the state
//! |q, n, m⟩ has index (q·N + n)·M + m. The qubit factor uses index 0 for
//! |↓⟩ and index 1 for |↑⟩.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

pub const MAX_DIMENSION: usize = 4096;

const HERMITIAN_TOL: f64 = 1e-10;
const TRACE_TOL: f64 = 1e-9;
const POSITIVITY_TOL: f64 = 1e-8;

#[inline]
pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HilbertSpec {
    dims: Vec<usize>,
}

impl HilbertSpec {
    pub fn new(dims: Vec<usize>) -> Result<Self> {
        if dims.is_empty() || dims.contains(&0) {
            return Err(Error::Dimension(format!("factor dims must be >= 1, got {dims:?}")));
        }
        let total = dims
            .iter()
            .try_fold(1usize, |acc, &d| acc.checked_mul(d))
            .filter(|&t| t <= MAX_DIMENSION)
            .ok_or_else(|| {
                Error::Dimension(format!("total dimension of {dims:?} exceeds {MAX_DIMENSION}"))
            })?;
        debug_assert!(total >= 1);
        Ok(Self { dims })
    }

    /// Qubit ⊗ resonator.
    pub fn qubit_resonator(n_fock: usize) -> Result<Self> {
        Self::new(vec![2, n_fock])
    }

    /// Qubit ⊗ resonator ⊗ phase-controller mode.
    pub fn qubit_resonator_qpc(n_fock: usize, m_fock: usize) -> Result<Self> {
        Self::new(vec![2, n_fock, m_fock])
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn num_factors(&self) -> usize {
        self.dims.len()
    }

    /// Composite index of a product basis state.
    pub fn index(&self, labels: &[usize]) -> Result<usize> {
        if labels.len() != self.dims.len() {
            return Err(Error::Dimension(format!(
                "{} labels for {} factors",
                labels.len(),
                self.dims.len()
            )));
        }
        let mut idx = 0;
        for (&l, &d) in labels.iter().zip(&self.dims) {
            if l >= d {
                return Err(Error::Dimension(format!("label {l} out of range for dim {d}")));
            }
            idx = idx * d + l;
        }
        Ok(idx)
    }

    /// Inverse of [`HilbertSpec::index`].
    pub fn labels(&self, mut idx: usize) -> Vec<usize> {
        let mut out = vec![0; self.dims.len()];
        for (slot, &d) in out.iter_mut().zip(&self.dims).rev() {
            *slot = idx % d;
            idx /= d;
        }
        out
    }

    pub fn basis_ket(&self, labels: &[usize]) -> Result<CVector> {
        let mut v = CVector::zeros(self.dim());
        v[self.index(labels)?] = c(1.0, 0.0);
        Ok(v)
    }

    fn check_factor(&self, factor: usize) -> Result<usize> {
        self.dims
            .get(factor)
            .copied()
            .ok_or_else(|| Error::Dimension(format!("factor {factor} out of range")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Operator {
    pub space: HilbertSpec,
    pub matrix: CMatrix,
}

impl Operator {
    pub fn new(space: HilbertSpec, matrix: CMatrix) -> Result<Self> {
        let d = space.dim();
        if matrix.nrows() != d || matrix.ncols() != d {
            return Err(Error::Dimension(format!(
                "{}x{} matrix on a space of dim {d}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        Ok(Self { space, matrix })
    }

    pub fn identity(space: &HilbertSpec) -> Self {
        let d = space.dim();
        Self {
            space: space.clone(),
            matrix: CMatrix::identity(d, d),
        }
    }

    pub fn zeros(space: &HilbertSpec) -> Self {
        let d = space.dim();
        Self {
            space: space.clone(),
            matrix: CMatrix::zeros(d, d),
        }
    }

    pub fn adjoint(&self) -> Self {
        Self {
            space: self.space.clone(),
            matrix: self.matrix.adjoint(),
        }
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self {
            space: self.space.clone(),
            matrix: &self.matrix * s,
        }
    }

    pub fn mul(&self, rhs: &Operator) -> Self {
        debug_assert_eq!(self.space, rhs.space);
        Self {
            space: self.space.clone(),
            matrix: &self.matrix * &rhs.matrix,
        }
    }

    pub fn add(&self, rhs: &Operator) -> Self {
        debug_assert_eq!(self.space, rhs.space);
        Self {
            space: self.space.clone(),
            matrix: &self.matrix + &rhs.matrix,
        }
    }

    pub fn sub(&self, rhs: &Operator) -> Self {
        self.add(&rhs.scale(c(-1.0, 0.0)))
    }

    pub fn commutator(&self, rhs: &Operator) -> Self {
        self.mul(rhs).sub(&rhs.mul(self))
    }

    /// Expectation value Tr(Aρ).
    pub fn expect(&self, rho: &DensityMatrix) -> Complex64 {
        (&self.matrix * &rho.matrix).trace()
    }
}

/// Kronecker product of per-factor matrices, in factor order.
pub fn tensor(factors: &[CMatrix]) -> CMatrix {
    factors
        .iter()
        .fold(CMatrix::identity(1, 1), |acc, f| acc.kronecker(f))
}

/// Embeds a single-factor matrix into the composite space.
pub fn embed(space: &HilbertSpec, factor: usize, local: &CMatrix) -> Result<Operator> {
    let d = space.check_factor(factor)?;
    if local.nrows() != d || local.ncols() != d {
        return Err(Error::Dimension(format!(
            "local operator is {}x{}, factor {factor} has dim {d}",
            local.nrows(),
            local.ncols()
        )));
    }
    let mats: Vec<CMatrix> = space
        .dims()
        .iter()
        .enumerate()
        .map(|(i, &di)| {
            if i == factor {
                local.clone()
            } else {
                CMatrix::identity(di, di)
            }
        })
        .collect();
    Operator::new(space.clone(), tensor(&mats))
}

/// Truncated annihilation operator of dimension `dim`.
pub fn annihilation(dim: usize) -> CMatrix {
    CMatrix::from_fn(dim, dim, |r, col| {
        if col == r + 1 {
            c((col as f64).sqrt(), 0.0)
        } else {
            c(0.0, 0.0)
        }
    })
}

/// Annihilation operator on `factor`, identity elsewhere.
pub fn ladder(space: &HilbertSpec, factor: usize) -> Result<Operator> {
    let d = space.check_factor(factor)?;
    if d < 2 {
        return Err(Error::Dimension(format!(
            "ladder operator needs dim >= 2 on factor {factor}"
        )));
    }
    embed(space, factor, &annihilation(d))
}

#[derive(Debug, Clone)]
pub struct QubitOps {
    /// |↑⟩⟨↑| - |↓⟩⟨↓|
    pub sigma_z: Operator,
    /// |↑⟩⟨↓|
    pub sigma_plus: Operator,
    /// |↓⟩⟨↑|
    pub sigma_minus: Operator,
}

/// Pauli-type operators of the qubit factor (factor 0).
pub fn qubit_ops(space: &HilbertSpec) -> Result<QubitOps> {
    if space.dims().first() != Some(&2) {
        return Err(Error::Dimension("factor 0 must be the qubit (dim 2)".into()));
    }
    let z = c(0.0, 0.0);
    let o = c(1.0, 0.0);
    let minus = CMatrix::from_row_slice(2, 2, &[z, o, z, z]);
    let sz = CMatrix::from_row_slice(2, 2, &[-o, z, z, o]);
    Ok(QubitOps {
        sigma_z: embed(space, 0, &sz)?,
        sigma_plus: embed(space, 0, &minus.adjoint())?,
        sigma_minus: embed(space, 0, &minus)?,
    })
}

/// Density matrix with its physical invariants.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    pub space: HilbertSpec,
    pub matrix: CMatrix,
}

impl DensityMatrix {
    /// Wraps a matrix without validation.
    pub fn from_matrix_unchecked(space: HilbertSpec, matrix: CMatrix) -> Self {
        Self { space, matrix }
    }

    pub fn new(space: HilbertSpec, matrix: CMatrix) -> Result<Self> {
        let op = Operator::new(space, matrix)?;
        let rho = Self {
            space: op.space,
            matrix: op.matrix,
        };
        rho.check()?;
        Ok(rho)
    }

    /// |ψ⟩⟨ψ| for a normalized ψ.
    pub fn pure(space: &HilbertSpec, psi: &CVector) -> Result<Self> {
        if psi.len() != space.dim() {
            return Err(Error::Dimension(format!(
                "state of length {} on a space of dim {}",
                psi.len(),
                space.dim()
            )));
        }
        check_normalized(psi)?;
        Ok(Self {
            space: space.clone(),
            matrix: psi * psi.adjoint(),
        })
    }

    pub fn trace(&self) -> Complex64 {
        self.matrix.trace()
    }

    pub fn hermiticity_residual(&self) -> f64 {
        let d = self.matrix.nrows();
        let mut worst: f64 = 0.0;
        for j in 0..d {
            for i in 0..=j {
                let r = (self.matrix[(i, j)] - self.matrix[(j, i)].conj()).norm();
                worst = worst.max(r);
            }
        }
        worst
    }

    /// Smallest eigenvalue of the Hermitian part.
    pub fn min_eigenvalue(&self) -> f64 {
        let herm = (&self.matrix + self.matrix.adjoint()) * c(0.5, 0.0);
        herm.symmetric_eigenvalues()
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    pub fn check_with(&self, herm_tol: f64, trace_tol: f64, pos_tol: f64) -> Result<()> {
        let fail = |detail: String| Err(Error::Invariant { time: f64::NAN, detail });
        let h = self.hermiticity_residual();
        if !(h <= herm_tol) {
            return fail(format!("hermiticity residual {h:e} exceeds {herm_tol:e}"));
        }
        let tr = self.trace();
        if !((tr.re - 1.0).abs() <= trace_tol && tr.im.abs() <= trace_tol) {
            return fail(format!("trace {tr} deviates from 1 by more than {trace_tol:e}"));
        }
        let lam = self.min_eigenvalue();
        if !(lam >= -pos_tol) {
            return fail(format!("minimum eigenvalue {lam:e} below -{pos_tol:e}"));
        }
        Ok(())
    }

    /// Hermiticity, unit trace and positivity at the default tolerances.
    pub fn check(&self) -> Result<()> {
        self.check_with(HERMITIAN_TOL, TRACE_TOL, POSITIVITY_TOL)
    }

    fn debug_check(self) -> Self {
        if cfg!(debug_assertions) {
            if let Err(e) = self.check() {
                panic!("density-matrix invariant broken: {e}");
            }
        }
        self
    }

    pub fn tensor(&self, other: &DensityMatrix) -> Result<Self> {
        let mut dims = self.space.dims().to_vec();
        dims.extend_from_slice(other.space.dims());
        Ok(Self {
            space: HilbertSpec::new(dims)?,
            matrix: self.matrix.kronecker(&other.matrix),
        }
        .debug_check())
    }

    /// Element ⟨i|ρ|j⟩.
    pub fn element(&self, i: usize, j: usize) -> Complex64 {
        self.matrix[(i, j)]
    }

    /// Convex combination αρ + (1-α)σ.
    pub fn mix(&self, other: &DensityMatrix, alpha: f64) -> Result<Self> {
        if self.space != other.space {
            return Err(Error::Dimension("mixing states on different spaces".into()));
        }
        Ok(Self {
            space: self.space.clone(),
            matrix: &self.matrix * c(alpha, 0.0) + &other.matrix * c(1.0 - alpha, 0.0),
        })
    }
}

fn check_normalized(psi: &CVector) -> Result<()> {
    let n = psi.norm();
    if (n - 1.0).abs() > 1e-9 {
        return Err(Error::Domain(format!("state vector has norm {n}, expected 1")));
    }
    Ok(())
}

/// Reduced state on the factors listed in `keep` (in their original order).
pub fn partial_trace(rho: &DensityMatrix, keep: &[usize]) -> Result<DensityMatrix> {
    let space = &rho.space;
    let n = space.num_factors();
    let mut keep_sorted = keep.to_vec();
    keep_sorted.sort_unstable();
    keep_sorted.dedup();
    if keep_sorted.is_empty() || keep_sorted.iter().any(|&k| k >= n) || keep_sorted.len() != keep.len()
    {
        return Err(Error::Dimension(format!("invalid factor list {keep:?} for {n} factors")));
    }
    let kept_dims: Vec<usize> = keep_sorted.iter().map(|&k| space.dims()[k]).collect();
    let out_space = HilbertSpec::new(kept_dims)?;
    let traced: Vec<usize> = (0..n).filter(|k| !keep_sorted.contains(k)).collect();

    let d = space.dim();
    let label_of: Vec<Vec<usize>> = (0..d).map(|i| space.labels(i)).collect();
    let reduced_index = |labels: &[usize]| -> usize {
        keep_sorted
            .iter()
            .fold(0, |acc, &k| acc * space.dims()[k] + labels[k])
    };
    let traced_key = |labels: &[usize]| -> Vec<usize> { traced.iter().map(|&k| labels[k]).collect() };

    let keys: Vec<Vec<usize>> = label_of.iter().map(|l| traced_key(l)).collect();
    let red: Vec<usize> = label_of.iter().map(|l| reduced_index(l)).collect();

    let dk = out_space.dim();
    let mut out = CMatrix::zeros(dk, dk);
    for j in 0..d {
        for i in 0..d {
            if keys[i] == keys[j] {
                out[(red[i], red[j])] += rho.matrix[(i, j)];
            }
        }
    }
    Ok(DensityMatrix {
        space: out_space,
        matrix: out,
    })
}

/// ⟨ψ|ρ|ψ⟩ for a normalized target ψ.
pub fn fidelity(rho: &DensityMatrix, target: &CVector) -> Result<f64> {
    if target.len() != rho.space.dim() {
        return Err(Error::Dimension(format!(
            "target of length {} for a state of dim {}",
            target.len(),
            rho.space.dim()
        )));
    }
    check_normalized(target)?;
    Ok((target.adjoint() * &rho.matrix * target)[(0, 0)].re)
}

/// Truncated thermal state of a single mode, p_n ∝ (N/(N+1))^n.
pub fn thermal_factor(dim: usize, occupation: f64) -> Result<CMatrix> {
    if !(occupation >= 0.0) || dim == 0 {
        return Err(Error::Domain(format!(
            "thermal occupation must be >= 0 and dim >= 1, got {occupation}, {dim}"
        )));
    }
    let ratio = occupation / (occupation + 1.0);
    let weights: Vec<f64> = (0..dim).map(|n| ratio.powi(n as i32)).collect();
    let z: f64 = weights.iter().sum();
    Ok(CMatrix::from_diagonal(&CVector::from_iterator(
        dim,
        weights.iter().map(|w| c(w / z, 0.0)),
    )))
}

/// Thermal state on `factor`, ground state on every other factor.
pub fn thermal_state(space: &HilbertSpec, factor: usize, occupation: f64) -> Result<DensityMatrix> {
    space.check_factor(factor)?;
    let mats = space
        .dims()
        .iter()
        .enumerate()
        .map(|(i, &d)| {
            if i == factor {
                thermal_factor(d, occupation)
            } else {
                let mut g = CMatrix::zeros(d, d);
                g[(0, 0)] = c(1.0, 0.0);
                Ok(g)
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(DensityMatrix {
        space: space.clone(),
        matrix: tensor(&mats),
    }
    .debug_check())
}
