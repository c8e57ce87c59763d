//! Dense complex linear algebra on finite-dimensional Hilbert spaces.
//!
//! Everything in the crate runs through [`Operator`]: a dense complex matrix
//! tagged with its Hilbert space. Target dimensions are desk scale (<= 512),
//! so dense storage and O(dim^3) spectral decompositions are fine.

use nalgebra::DMatrix;
use num_complex::Complex;

use crate::error::{Error, Result};

pub type C64 = Complex<f64>;
pub type CMat = DMatrix<C64>;

pub const TOL_HERM: f64 = 1e-10;
pub const TOL_TRACE: f64 = 1e-10;
pub const TOL_PSD: f64 = 1e-10;

/// Relative threshold under which neighbouring eigenvalues are merged into a
/// single spectral projector, preventing spurious splitting of indicator
/// functions on nearly-degenerate spectra.
pub const DEGENERACY_TOL: f64 = 1e-9;

/// Basis metadata for a Hilbert space.
#[derive(Debug, Clone, PartialEq)]
pub enum BasisKind {
    Qubit,
    FockTruncated { n_max: usize },
    PositionGrid { n_points: usize, length: f64 },
    MomentumGrid { n_points: usize, p_max: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct HilbertSpace {
    pub dim: usize,
    pub basis: BasisKind,
}

impl HilbertSpace {
    pub fn new(dim: usize, basis: BasisKind) -> Result<Self> {
        if dim < 2 {
            return Err(Error::BadParameter(format!("dim must be >= 2, got {dim}")));
        }
        let expected = match &basis {
            BasisKind::Qubit => 2,
            BasisKind::FockTruncated { n_max } => n_max + 1,
            BasisKind::PositionGrid { n_points, .. } => *n_points,
            BasisKind::MomentumGrid { n_points, .. } => *n_points,
        };
        if expected != dim {
            return Err(Error::BadParameter(format!(
                "dim {dim} inconsistent with basis parameters (expected {expected})"
            )));
        }
        Ok(Self { dim, basis })
    }

    pub fn qubit() -> Self {
        Self { dim: 2, basis: BasisKind::Qubit }
    }
}

/// Dense operator on a [`HilbertSpace`].
#[derive(Debug, Clone)]
pub struct Operator {
    pub space: HilbertSpace,
    pub matrix: CMat,
    pub units_tag: Option<String>,
}

impl Operator {
    pub fn new(space: HilbertSpace, matrix: CMat) -> Result<Self> {
        if matrix.nrows() != space.dim || matrix.ncols() != space.dim {
            return Err(Error::BadParameter(format!(
                "matrix is {}x{}, space dim is {}",
                matrix.nrows(),
                matrix.ncols(),
                space.dim
            )));
        }
        if matrix.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite("operator entries".into()));
        }
        Ok(Self { space, matrix, units_tag: None })
    }

    pub fn from_fn(space: HilbertSpace, f: impl Fn(usize, usize) -> C64) -> Self {
        let matrix = CMat::from_fn(space.dim, space.dim, f);
        Self { space, matrix, units_tag: None }
    }

    pub fn identity(space: HilbertSpace) -> Self {
        let dim = space.dim;
        Self { space, matrix: CMat::identity(dim, dim), units_tag: None }
    }

    pub fn zeros(space: HilbertSpace) -> Self {
        let dim = space.dim;
        Self { space, matrix: CMat::zeros(dim, dim), units_tag: None }
    }

    pub fn dim(&self) -> usize {
        self.space.dim
    }

    pub fn adjoint(&self) -> Operator {
        Operator { space: self.space.clone(), matrix: self.matrix.adjoint(), units_tag: self.units_tag.clone() }
    }

    pub fn trace(&self) -> C64 {
        let mut t = C64::new(0.0, 0.0);
        for i in 0..self.dim() {
            t += self.matrix[(i, i)];
        }
        t
    }

    pub fn frobenius(&self) -> f64 {
        self.matrix.norm()
    }

    /// Spectral norm, computed from the Hermitian factor `O† O`.
    pub fn spectral_norm(&self) -> f64 {
        let g = self.matrix.adjoint() * &self.matrix;
        let eig = g.symmetric_eigen();
        eig.eigenvalues.iter().fold(0.0f64, |m, &l| m.max(l.max(0.0))).sqrt()
    }

    pub fn herm_deviation(&self) -> f64 {
        let diff = &self.matrix - self.matrix.adjoint();
        let denom = self.frobenius().max(1e-300);
        diff.norm() / denom
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.herm_deviation() < tol
    }

    pub fn mul(&self, rhs: &Operator) -> Operator {
        Operator {
            space: self.space.clone(),
            matrix: &self.matrix * &rhs.matrix,
            units_tag: None,
        }
    }

    pub fn add(&self, rhs: &Operator) -> Operator {
        Operator { space: self.space.clone(), matrix: &self.matrix + &rhs.matrix, units_tag: None }
    }

    pub fn sub(&self, rhs: &Operator) -> Operator {
        Operator { space: self.space.clone(), matrix: &self.matrix - &rhs.matrix, units_tag: None }
    }

    pub fn scale(&self, s: C64) -> Operator {
        Operator { space: self.space.clone(), matrix: self.matrix.clone() * s, units_tag: None }
    }

    pub fn commutator(&self, rhs: &Operator) -> Operator {
        Operator {
            space: self.space.clone(),
            matrix: &self.matrix * &rhs.matrix - &rhs.matrix * &self.matrix,
            units_tag: None,
        }
    }
}

/// Density operator with the usual validity checks.
#[derive(Debug, Clone)]
pub struct State {
    pub space: HilbertSpace,
    pub rho: CMat,
}

impl State {
    pub fn new(space: HilbertSpace, rho: CMat) -> Result<Self> {
        if rho.nrows() != space.dim || rho.ncols() != space.dim {
            return Err(Error::BadParameter("state dimension mismatch".into()));
        }
        let tr: C64 = (0..space.dim).map(|i| rho[(i, i)]).sum();
        if (tr.re - 1.0).abs() > TOL_TRACE || tr.im.abs() > TOL_TRACE {
            return Err(Error::BadParameter(format!("trace(rho) = {tr} != 1")));
        }
        let herm = (&rho - rho.adjoint()).norm() / rho.norm().max(1e-300);
        if herm > TOL_HERM {
            return Err(Error::NotHermitian(format!("state, deviation {herm:.3e}")));
        }
        let eig = rho.clone().symmetric_eigen();
        let min = eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
        if min < -TOL_PSD {
            return Err(Error::BadParameter(format!("state not PSD, min eigenvalue {min:.3e}")));
        }
        Ok(Self { space, rho })
    }

    pub fn pure(space: HilbertSpace, psi: &nalgebra::DVector<C64>) -> Result<Self> {
        let n = psi.norm();
        if n < 1e-12 {
            return Err(Error::BadParameter("zero state vector".into()));
        }
        let v = psi / C64::new(n, 0.0);
        let rho = CMat::from_fn(space.dim, space.dim, |i, j| v[i] * v[j].conj());
        Self::new(space, rho)
    }

    /// Rank-1 factor of a pure state, if the state is pure within `tol`.
    pub fn pure_vector(&self, tol: f64) -> Option<nalgebra::DVector<C64>> {
        let eig = self.rho.clone().symmetric_eigen();
        let mut best = 0;
        for i in 0..self.space.dim {
            if eig.eigenvalues[i] > eig.eigenvalues[best] {
                best = i;
            }
        }
        if (eig.eigenvalues[best] - 1.0).abs() > tol {
            return None;
        }
        Some(eig.eigenvectors.column(best).into_owned())
    }
}

/// A finite union of closed intervals on the real line, kept sorted and
/// disjoint. Used for spectral indicators and for sample sets U of the
/// time-averaged value.
#[derive(Debug, Clone, PartialEq)]
pub struct IntervalUnion {
    pub parts: Vec<(f64, f64)>,
}

impl IntervalUnion {
    pub fn new(mut parts: Vec<(f64, f64)>) -> Result<Self> {
        for &(lo, hi) in &parts {
            if !(lo.is_finite() && hi.is_finite()) || lo > hi {
                return Err(Error::BadParameter(format!("bad interval [{lo}, {hi}]")));
            }
        }
        parts.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        for w in parts.windows(2) {
            if w[1].0 < w[0].1 {
                return Err(Error::BadParameter("overlapping intervals".into()));
            }
        }
        Ok(Self { parts })
    }

    pub fn single(lo: f64, hi: f64) -> Result<Self> {
        Self::new(vec![(lo, hi)])
    }

    pub fn contains(&self, x: f64) -> bool {
        self.parts.iter().any(|&(lo, hi)| lo <= x && x <= hi)
    }

    pub fn lo(&self) -> f64 {
        self.parts.first().map(|p| p.0).unwrap_or(0.0)
    }

    pub fn hi(&self) -> f64 {
        self.parts.last().map(|p| p.1).unwrap_or(0.0)
    }
}

/// One merged spectral component: eigenvalue and the projector on its
/// (possibly degenerate) eigenspace.
#[derive(Debug, Clone)]
pub struct SpectralComponent {
    pub eigenvalue: f64,
    pub projector: Operator,
}

/// Spectral decomposition of a Hermitian operator, eigenvalues ascending,
/// nearly-degenerate eigenvalues merged into one projector.
pub fn spectral_decompose(op: &Operator) -> Result<Vec<SpectralComponent>> {
    if !op.is_hermitian(TOL_HERM) {
        return Err(Error::NotHermitian(format!("deviation {:.3e}", op.herm_deviation())));
    }
    // symmetrize to wash out the representation error before factorizing
    let h = (&op.matrix + op.matrix.adjoint()) * C64::new(0.5, 0.0);
    let eig = h.symmetric_eigen();
    let dim = op.dim();
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].partial_cmp(&eig.eigenvalues[b]).unwrap());

    let scale = eig.eigenvalues.iter().fold(1.0f64, |m, &l| m.max(l.abs()));
    let merge_tol = DEGENERACY_TOL * scale.max(1.0);

    let mut out: Vec<SpectralComponent> = Vec::new();
    let mut group: Vec<usize> = Vec::new();
    let mut group_val = 0.0;
    let flush = |group: &mut Vec<usize>, group_val: &mut f64, out: &mut Vec<SpectralComponent>| {
        if group.is_empty() {
            return;
        }
        let mut proj = CMat::zeros(dim, dim);
        for &idx in group.iter() {
            let v = eig.eigenvectors.column(idx);
            for i in 0..dim {
                for j in 0..dim {
                    proj[(i, j)] += v[i] * v[j].conj();
                }
            }
        }
        out.push(SpectralComponent {
            eigenvalue: *group_val / group.len() as f64,
            projector: Operator { space: op.space.clone(), matrix: proj, units_tag: None },
        });
        group.clear();
        *group_val = 0.0;
    };
    for &idx in &order {
        let l = eig.eigenvalues[idx];
        if let Some(&last) = group.last() {
            if (l - eig.eigenvalues[last]).abs() > merge_tol {
                flush(&mut group, &mut group_val, &mut out);
            }
        }
        group.push(idx);
        group_val += l;
    }
    flush(&mut group, &mut group_val, &mut out);
    Ok(out)
}

/// exp(scale * O). Hermitian inputs go through the spectral path; other
/// inputs through scaling-and-squaring on a Taylor kernel.
pub fn matrix_exponential(op: &Operator, scale: C64) -> Result<Operator> {
    if op.matrix.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::NonFinite("matrix_exponential input".into()));
    }
    if op.is_hermitian(TOL_HERM) {
        let comps = spectral_decompose(op)?;
        let mut m = CMat::zeros(op.dim(), op.dim());
        for c in &comps {
            m += &c.projector.matrix * (scale * C64::new(c.eigenvalue, 0.0)).exp();
        }
        return Ok(Operator { space: op.space.clone(), matrix: m, units_tag: None });
    }
    let a = op.matrix.clone() * scale;
    let norm = a.norm();
    let mut squarings = 0u32;
    let mut scaled = a;
    while scaled.norm() > 0.5 {
        scaled /= C64::new(2.0, 0.0);
        squarings += 1;
        if squarings > 80 {
            return Err(Error::ConvergenceFailure(format!("norm {norm:.3e} too large")));
        }
    }
    let dim = op.dim();
    let mut term = CMat::identity(dim, dim);
    let mut sum = CMat::identity(dim, dim);
    for k in 1..=24 {
        term = &term * &scaled / C64::new(k as f64, 0.0);
        sum += &term;
        if term.norm() < 1e-18 {
            break;
        }
    }
    let mut result = sum;
    for _ in 0..squarings {
        result = &result * &result;
    }
    Ok(Operator { space: op.space.clone(), matrix: result, units_tag: None })
}

/// Spectral indicator chi_U(O): the sum of the projectors whose eigenvalues
/// lie inside U.
pub fn indicator_of(op: &Operator, u: &IntervalUnion) -> Result<Operator> {
    let comps = spectral_decompose(op)?;
    let mut m = CMat::zeros(op.dim(), op.dim());
    for c in &comps {
        if u.contains(c.eigenvalue) {
            m += &c.projector.matrix;
        }
    }
    Ok(Operator { space: op.space.clone(), matrix: m, units_tag: None })
}

/// Pauli matrices on the qubit space.
pub fn sigma_x() -> Operator {
    let s = HilbertSpace::qubit();
    Operator::from_fn(s, |i, j| if i != j { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) })
}

pub fn sigma_y() -> Operator {
    let s = HilbertSpace::qubit();
    Operator::from_fn(s, |i, j| match (i, j) {
        (0, 1) => C64::new(0.0, -1.0),
        (1, 0) => C64::new(0.0, 1.0),
        _ => C64::new(0.0, 0.0),
    })
}

pub fn sigma_z() -> Operator {
    let s = HilbertSpace::qubit();
    Operator::from_fn(s, |i, j| match (i, j) {
        (0, 0) => C64::new(1.0, 0.0),
        (1, 1) => C64::new(-1.0, 0.0),
        _ => C64::new(0.0, 0.0),
    })
}
