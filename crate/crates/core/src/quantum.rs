//! Dense operator algebra on small tensor-product Hilbert spaces.
//!
//! A [`HilbertSpace`] is an ordered list of factors (spin-1/2, truncated
//! bosonic mode, or a window of island charge states). Product-basis
//! indices are row-major: the first factor is the most significant digit,
//! so `kron(A, B)` acts with `A` on factor 0 and `B` on factor 1.

use std::fmt;
use std::ops::{Add, Mul, Sub};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{invalid, Error, Result};

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

/// Relative Frobenius residual accepted as Hermitian by the eigensolver.
pub const HERMITIAN_TOL: f64 = 1e-10;

/// Norm deviation tolerated for "normalized" state vectors.
pub const NORM_TOL: f64 = 1e-8;

pub(crate) const I: C64 = C64 { re: 0.0, im: 1.0 };

#[inline]
pub(crate) fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

/// One tensor factor of a [`HilbertSpace`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Factor {
    /// Two-level system; index 0 is σ_z = +1, index 1 is σ_z = −1.
    SpinHalf,
    /// Bosonic mode truncated to Fock states `0..=n_max`.
    Boson { n_max: usize },
    /// Island charge states `n_min..=n_max` (Cooper-pair number).
    Charge { n_min: i64, n_max: i64 },
}

impl Factor {
    pub fn dim(&self) -> usize {
        match *self {
            Factor::SpinHalf => 2,
            Factor::Boson { n_max } => n_max + 1,
            Factor::Charge { n_min, n_max } => {
                if n_max < n_min {
                    0
                } else {
                    (n_max - n_min + 1) as usize
                }
            }
        }
    }
}

impl fmt::Display for Factor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Factor::SpinHalf => write!(f, "SpinHalf"),
            Factor::Boson { n_max } => write!(f, "Boson({n_max})"),
            Factor::Charge { n_min, n_max } => write!(f, "Charge({n_min}..={n_max})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct HilbertSpace {
    factors: Vec<Factor>,
}

impl HilbertSpace {
    pub fn new(factors: Vec<Factor>) -> Result<Self> {
        if factors.is_empty() {
            return Err(invalid("factors", "a Hilbert space needs at least one factor"));
        }
        if let Some(f) = factors.iter().find(|f| f.dim() < 2) {
            return Err(invalid("factors", format!("factor {f} has dimension < 2")));
        }
        Ok(Self { factors })
    }

    pub fn single(factor: Factor) -> Result<Self> {
        Self::new(vec![factor])
    }

    /// `SpinHalf ⊗ Boson(n_max)`, the layout of the minimal model.
    pub fn spin_boson(n_max: usize) -> Result<Self> {
        Self::new(vec![Factor::SpinHalf, Factor::Boson { n_max }])
    }

    pub fn factors(&self) -> &[Factor] {
        &self.factors
    }

    pub fn factor_dim(&self, index: usize) -> usize {
        self.factors[index].dim()
    }

    pub fn dim(&self) -> usize {
        self.factors.iter().map(Factor::dim).product()
    }

    /// Distance between consecutive values of factor `index` in the flat index.
    pub fn stride(&self, index: usize) -> usize {
        self.factors[index + 1..].iter().map(Factor::dim).product()
    }

    /// Flat product-basis index of the given per-factor digits.
    pub fn index_of(&self, digits: &[usize]) -> Result<usize> {
        if digits.len() != self.factors.len() {
            return Err(Error::DimensionMismatch {
                expected: self.factors.len(),
                got: digits.len(),
            });
        }
        let mut idx = 0;
        for (d, f) in digits.iter().zip(&self.factors) {
            if *d >= f.dim() {
                return Err(invalid("digits", format!("digit {d} out of range for {f}")));
            }
            idx = idx * f.dim() + d;
        }
        Ok(idx)
    }

    /// Per-factor digits of a flat index.
    pub fn digits_of(&self, mut index: usize) -> Vec<usize> {
        let mut out = vec![0; self.factors.len()];
        for (slot, f) in out.iter_mut().zip(&self.factors).rev() {
            *slot = index % f.dim();
            index /= f.dim();
        }
        out
    }

    /// Position of the unique spin-1/2 factor.
    pub fn spin_factor(&self) -> Result<usize> {
        let spins: Vec<usize> = self
            .factors
            .iter()
            .enumerate()
            .filter(|(_, f)| matches!(f, Factor::SpinHalf))
            .map(|(i, _)| i)
            .collect();
        match spins.as_slice() {
            [i] => Ok(*i),
            _ => Err(invalid(
                "space",
                format!("expected exactly one SpinHalf factor, found {}", spins.len()),
            )),
        }
    }
}

impl fmt::Display for HilbertSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, factor) in self.factors.iter().enumerate() {
            if i > 0 {
                write!(f, " ⊗ ")?;
            }
            write!(f, "{factor}")?;
        }
        Ok(())
    }
}

/// Dense complex square matrix tied to a [`HilbertSpace`].
///
/// Hamiltonians are stored in rad/s; observables and density matrices are
/// dimensionless.
#[derive(Debug, Clone, PartialEq)]
pub struct Operator {
    space: HilbertSpace,
    matrix: CMatrix,
}

impl Operator {
    pub fn new(space: HilbertSpace, matrix: CMatrix) -> Result<Self> {
        let dim = space.dim();
        if matrix.nrows() != dim || matrix.ncols() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: if matrix.nrows() != dim {
                    matrix.nrows()
                } else {
                    matrix.ncols()
                },
            });
        }
        Ok(Self { space, matrix })
    }

    pub fn zeros(space: HilbertSpace) -> Self {
        let dim = space.dim();
        Self {
            space,
            matrix: CMatrix::zeros(dim, dim),
        }
    }

    pub fn identity(space: HilbertSpace) -> Self {
        let dim = space.dim();
        Self {
            space,
            matrix: CMatrix::identity(dim, dim),
        }
    }

    /// Diagonal operator from real entries.
    pub fn diagonal(space: HilbertSpace, entries: &[f64]) -> Result<Self> {
        let m = CMatrix::from_diagonal(&CVector::from_iterator(
            entries.len(),
            entries.iter().map(|&x| c(x)),
        ));
        Self::new(space, m)
    }

    pub fn space(&self) -> &HilbertSpace {
        &self.space
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.matrix[(row, col)]
    }

    pub fn adjoint(&self) -> Self {
        Self {
            space: self.space.clone(),
            matrix: self.matrix.adjoint(),
        }
    }

    pub fn scale(&self, factor: C64) -> Self {
        Self {
            space: self.space.clone(),
            matrix: &self.matrix * factor,
        }
    }

    pub fn trace(&self) -> C64 {
        self.matrix.trace()
    }

    /// ‖A − A†‖_F / ‖A‖_F, or zero for the zero matrix.
    pub fn hermiticity_residual(&self) -> f64 {
        let norm = self.matrix.norm();
        if norm == 0.0 {
            return 0.0;
        }
        (&self.matrix - self.matrix.adjoint()).norm() / norm
    }

    pub fn commutator(&self, other: &Operator) -> Result<Operator> {
        self.check_same_space(other)?;
        Ok(Self {
            space: self.space.clone(),
            matrix: &self.matrix * &other.matrix - &other.matrix * &self.matrix,
        })
    }

    /// Applies a real scalar function through the spectral decomposition of
    /// a Hermitian operator, `f(A) = V f(Λ) V†`.
    pub fn map_hermitian(&self, f: impl Fn(f64) -> f64) -> Result<Operator> {
        let es = eigendecompose(self)?;
        let v = &es.vectors;
        let fd = CVector::from_iterator(es.energies.len(), es.energies.iter().map(|&e| c(f(e))));
        let mut scaled = v.clone();
        for (j, mut col) in scaled.column_iter_mut().enumerate() {
            col *= fd[j];
        }
        Ok(Self {
            space: self.space.clone(),
            matrix: scaled * v.adjoint(),
        })
    }

    /// Checks Hermiticity, unit trace and positivity.
    pub fn validate_density(&self) -> Result<()> {
        let r = self.hermiticity_residual();
        if r > HERMITIAN_TOL {
            return Err(Error::InvalidDensityMatrix(format!(
                "Hermiticity residual {r:.3e}"
            )));
        }
        let tr = self.trace();
        if (tr.re - 1.0).abs() > 1e-10 || tr.im.abs() > 1e-10 {
            return Err(Error::InvalidDensityMatrix(format!("trace {tr}")));
        }
        let es = eigendecompose(self)?;
        let min = es.energies[0];
        if min < -1e-10 {
            return Err(Error::InvalidDensityMatrix(format!(
                "negative eigenvalue {min:.3e}"
            )));
        }
        Ok(())
    }

    fn check_same_space(&self, other: &Operator) -> Result<()> {
        if self.space != other.space {
            return Err(invalid(
                "space",
                format!("operators act on {} and {}", self.space, other.space),
            ));
        }
        Ok(())
    }
}

// The arithmetic operators panic on mismatched spaces; that is a bug in the
// calling code, not a runtime condition.
impl Add for &Operator {
    type Output = Operator;
    fn add(self, rhs: &Operator) -> Operator {
        assert_eq!(self.space, rhs.space, "adding operators on different spaces");
        Operator {
            space: self.space.clone(),
            matrix: &self.matrix + &rhs.matrix,
        }
    }
}

impl Sub for &Operator {
    type Output = Operator;
    fn sub(self, rhs: &Operator) -> Operator {
        assert_eq!(self.space, rhs.space, "subtracting operators on different spaces");
        Operator {
            space: self.space.clone(),
            matrix: &self.matrix - &rhs.matrix,
        }
    }
}

impl Mul for &Operator {
    type Output = Operator;
    fn mul(self, rhs: &Operator) -> Operator {
        assert_eq!(self.space, rhs.space, "multiplying operators on different spaces");
        Operator {
            space: self.space.clone(),
            matrix: &self.matrix * &rhs.matrix,
        }
    }
}

impl Mul<f64> for &Operator {
    type Output = Operator;
    fn mul(self, rhs: f64) -> Operator {
        self.scale(c(rhs))
    }
}

impl Mul<C64> for &Operator {
    type Output = Operator;
    fn mul(self, rhs: C64) -> Operator {
        self.scale(rhs)
    }
}

/// Truncated bosonic lowering operator with `a[n-1, n] = √n`.
pub fn annihilation(n_max: usize) -> Result<Operator> {
    if n_max < 1 {
        return Err(invalid("n_max", "photon cutoff must be at least 1"));
    }
    let dim = n_max + 1;
    let mut m = CMatrix::zeros(dim, dim);
    for n in 1..dim {
        m[(n - 1, n)] = c((n as f64).sqrt());
    }
    Operator::new(HilbertSpace::single(Factor::Boson { n_max })?, m)
}

pub fn creation(n_max: usize) -> Result<Operator> {
    Ok(annihilation(n_max)?.adjoint())
}

/// Photon number operator `a†a`.
pub fn number(n_max: usize) -> Result<Operator> {
    let a = annihilation(n_max)?;
    Ok(&a.adjoint() * &a)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
    Z,
}

/// Pauli matrix with the pinned convention σ_y = [[0, −i], [i, 0]].
pub fn pauli(axis: Axis) -> Operator {
    let z = c(0.0);
    let one = c(1.0);
    let m = match axis {
        Axis::X => CMatrix::from_row_slice(2, 2, &[z, one, one, z]),
        Axis::Y => CMatrix::from_row_slice(2, 2, &[z, -I, I, z]),
        Axis::Z => CMatrix::from_row_slice(2, 2, &[one, z, z, -one]),
    };
    Operator {
        space: HilbertSpace {
            factors: vec![Factor::SpinHalf],
        },
        matrix: m,
    }
}

/// Lifts a single-factor operator into `space`, with identities elsewhere.
pub fn embed(op: &Operator, factor_index: usize, space: &HilbertSpace) -> Result<Operator> {
    if factor_index >= space.factors.len() {
        return Err(invalid(
            "factor_index",
            format!("{factor_index} out of range for {space}"),
        ));
    }
    let d = space.factor_dim(factor_index);
    if op.dim() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: op.dim(),
        });
    }
    let left: usize = space.factors[..factor_index].iter().map(Factor::dim).product();
    let right = space.stride(factor_index);
    let m = CMatrix::identity(left, left)
        .kronecker(&op.matrix)
        .kronecker(&CMatrix::identity(right, right));
    Operator::new(space.clone(), m)
}

/// `a ⊗ b` on the concatenated space.
pub fn tensor(a: &Operator, b: &Operator) -> Operator {
    let mut factors = a.space.factors.clone();
    factors.extend_from_slice(&b.space.factors);
    Operator {
        space: HilbertSpace { factors },
        matrix: a.matrix.kronecker(&b.matrix),
    }
}

/// Spectrum of a Hermitian operator, ascending, with orthonormal columns.
#[derive(Debug, Clone)]
pub struct EigenSystem {
    pub energies: Vec<f64>,
    pub vectors: CMatrix,
}

impl EigenSystem {
    pub fn len(&self) -> usize {
        self.energies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.energies.is_empty()
    }

    pub fn vector(&self, index: usize) -> CVector {
        self.vectors.column(index).into_owned()
    }

    /// `V Λ V†`.
    pub fn reconstruct(&self) -> CMatrix {
        let mut scaled = self.vectors.clone();
        for (j, mut col) in scaled.column_iter_mut().enumerate() {
            col *= c(self.energies[j]);
        }
        scaled * self.vectors.adjoint()
    }
}

pub fn eigendecompose(h: &Operator) -> Result<EigenSystem> {
    let residual = h.hermiticity_residual();
    if residual > HERMITIAN_TOL {
        return Err(Error::NotHermitian { residual });
    }
    let sym = (&h.matrix + h.matrix.adjoint()) * c(0.5);
    let eig = sym.symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[a]
            .partial_cmp(&eig.eigenvalues[b])
            .expect("NaN eigenvalue")
    });
    let energies = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let dim = order.len();
    let mut vectors = CMatrix::zeros(dim, dim);
    for (j, &i) in order.iter().enumerate() {
        vectors.set_column(j, &eig.eigenvectors.column(i));
    }
    Ok(EigenSystem { energies, vectors })
}

/// Reduced density matrix of factor `keep` for a pure state.
pub fn reduced_state(vector: &CVector, space: &HilbertSpace, keep: usize) -> Result<Operator> {
    if vector.len() != space.dim() {
        return Err(Error::DimensionMismatch {
            expected: space.dim(),
            got: vector.len(),
        });
    }
    if keep >= space.factors.len() {
        return Err(invalid("keep", format!("factor {keep} out of range for {space}")));
    }
    let norm = vector.norm();
    if (norm - 1.0).abs() > NORM_TOL {
        return Err(Error::NotNormalized { norm });
    }
    let d = space.factor_dim(keep);
    let stride = space.stride(keep);
    let rest = space.dim() / d;
    // Column r of `m` collects the amplitudes sharing the same digits on all
    // traced-out factors.
    let mut m = CMatrix::zeros(d, rest);
    for (idx, amp) in vector.iter().enumerate() {
        let digit = (idx / stride) % d;
        let r = (idx / (stride * d)) * stride + idx % stride;
        m[(digit, r)] = *amp;
    }
    let rho = &m * m.adjoint();
    Operator::new(HilbertSpace::single(space.factors[keep])?, rho)
}

/// Qubit density matrix `Tr_res |ψ⟩⟨ψ|` for a space with one spin factor.
pub fn reduced_qubit_state(vector: &CVector, space: &HilbertSpace) -> Result<Operator> {
    let spin = space.spin_factor()?;
    reduced_state(vector, space, spin)
}

/// Uhlmann fidelity `(Tr √(√ρ₁ ρ₂ √ρ₁))²`.
pub fn fidelity(rho1: &Operator, rho2: &Operator) -> Result<f64> {
    rho1.validate_density()?;
    rho2.validate_density()?;
    if rho1.dim() != rho2.dim() {
        return Err(Error::DimensionMismatch {
            expected: rho1.dim(),
            got: rho2.dim(),
        });
    }
    let sqrt1 = rho1.map_hermitian(|x| x.max(0.0).sqrt())?;
    let inner = &sqrt1.matrix * &rho2.matrix * &sqrt1.matrix;
    let inner = Operator::new(sqrt1.space.clone(), inner)?;
    let es = eigendecompose(&inner)?;
    let root_sum: f64 = es.energies.iter().map(|&x| x.max(0.0).sqrt()).sum();
    Ok((root_sum * root_sum).clamp(0.0, 1.0))
}
