//! The concrete systems used throughout: a two-level atom, a truncated
//! harmonic oscillator, and a free particle on a periodic position grid.
//!
//! Units are hbar = 1 everywhere. The grid realizes p spectrally through the
//! discrete Fourier basis and keeps x diagonal; wavepacket tests are expected
//! to stay at least 5 sigma away from the box edge.

use std::collections::BTreeMap;

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::linalg::{BasisKind, C64, CMat, HilbertSpace, Operator, State, TOL_HERM};

#[derive(Debug, Clone, PartialEq)]
pub enum ModelKind {
    TwoLevel { omega: f64 },
    Oscillator { mass: f64, omega: f64, n_max: usize },
    FreeParticle { mass: f64, n_points: usize, length: f64 },
}

/// Discrete Fourier data of a position grid: node coordinates, momentum
/// values, and the unitary position-to-momentum map.
#[derive(Debug, Clone)]
pub struct GridFrame {
    pub x: Vec<f64>,
    pub p: Vec<f64>,
    /// row j, column l: exp(-i p_j x_l)/sqrt(n)
    pub to_momentum: CMat,
}

impl GridFrame {
    pub fn new(n: usize, length: f64) -> Self {
        let dx = length / n as f64;
        let x: Vec<f64> = (0..n).map(|l| (l as f64 - (n / 2) as f64) * dx).collect();
        let p: Vec<f64> = (0..n)
            .map(|j| {
                let j = j as i64;
                let signed = if j <= (n as i64 - 1) / 2 { j } else { j - n as i64 };
                2.0 * std::f64::consts::PI * signed as f64 / length
            })
            .collect();
        let norm = 1.0 / (n as f64).sqrt();
        let to_momentum = CMat::from_fn(n, n, |j, l| {
            (C64::new(0.0, -p[j] * x[l])).exp() * norm
        });
        Self { x, p, to_momentum }
    }

    pub fn p_max(&self) -> f64 {
        self.p.iter().fold(0.0f64, |m, &v| m.max(v.abs()))
    }
}

#[derive(Debug, Clone)]
pub struct ModelSpec {
    pub kind: ModelKind,
    pub space: HilbertSpace,
    pub h: Operator,
    pub observables: BTreeMap<String, Operator>,
    pub grid: Option<GridFrame>,
}

impl ModelSpec {
    pub fn build(kind: ModelKind) -> Result<Self> {
        match kind {
            ModelKind::TwoLevel { omega } => {
                if !omega.is_finite() {
                    return Err(Error::BadParameter("omega must be finite".into()));
                }
                let space = HilbertSpace::qubit();
                let h = crate::linalg::sigma_z().scale(C64::new(omega, 0.0));
                let mut obs = BTreeMap::new();
                obs.insert("sx".into(), crate::linalg::sigma_x());
                obs.insert("sy".into(), crate::linalg::sigma_y());
                obs.insert("sz".into(), crate::linalg::sigma_z());
                Ok(Self { kind, space, h, observables: obs, grid: None })
            }
            ModelKind::Oscillator { mass, omega, n_max } => {
                if mass <= 0.0 || omega <= 0.0 {
                    return Err(Error::BadParameter("mass and omega must be positive".into()));
                }
                if n_max < 2 {
                    return Err(Error::BadParameter("n_max must be >= 2".into()));
                }
                let dim = n_max + 1;
                let space = HilbertSpace::new(dim, BasisKind::FockTruncated { n_max })?;
                let h = Operator::from_fn(space.clone(), |i, j| {
                    if i == j { C64::new(omega * (i as f64 + 0.5), 0.0) } else { C64::new(0.0, 0.0) }
                });
                // truncated ladder: a |n> = sqrt(n) |n-1>
                let a_low = CMat::from_fn(dim, dim, |i, j| {
                    if j == i + 1 { C64::new((j as f64).sqrt(), 0.0) } else { C64::new(0.0, 0.0) }
                });
                let a_raise = a_low.adjoint();
                let xs = 1.0 / (2.0 * mass * omega).sqrt();
                let ps = (mass * omega / 2.0).sqrt();
                let x = Operator::new(space.clone(), (&a_low + &a_raise) * C64::new(xs, 0.0))?;
                let p = Operator::new(space.clone(), (&a_raise - &a_low) * C64::new(0.0, ps))?;
                let n_op = Operator::new(space.clone(), &a_raise * &a_low)?;
                let mut obs = BTreeMap::new();
                obs.insert("x".into(), x);
                obs.insert("p".into(), p);
                obs.insert("n".into(), n_op);
                Ok(Self { kind, space, h, observables: obs, grid: None })
            }
            ModelKind::FreeParticle { mass, n_points, length } => {
                if mass <= 0.0 || length <= 0.0 {
                    return Err(Error::BadParameter("mass and length must be positive".into()));
                }
                if n_points < 8 {
                    return Err(Error::BadParameter("n_points must be >= 8".into()));
                }
                let space = HilbertSpace::new(n_points, BasisKind::PositionGrid { n_points, length })?;
                let frame = GridFrame::new(n_points, length);
                let fdag = frame.to_momentum.adjoint();
                let kin = CMat::from_fn(n_points, n_points, |i, j| {
                    if i == j { C64::new(frame.p[i] * frame.p[i] / (2.0 * mass), 0.0) } else { C64::new(0.0, 0.0) }
                });
                let h = Operator::new(space.clone(), &fdag * &kin * &frame.to_momentum)?;
                let x = Operator::from_fn(space.clone(), |i, j| {
                    if i == j { C64::new(frame.x[i], 0.0) } else { C64::new(0.0, 0.0) }
                });
                let pdiag = CMat::from_fn(n_points, n_points, |i, j| {
                    if i == j { C64::new(frame.p[i], 0.0) } else { C64::new(0.0, 0.0) }
                });
                let p = Operator::new(space.clone(), &fdag * &pdiag * &frame.to_momentum)?;
                let mut obs = BTreeMap::new();
                obs.insert("x".into(), x);
                obs.insert("p".into(), p);
                let mut model = Self { kind, space, h, observables: obs, grid: Some(frame) };
                debug_assert!(model.h.is_hermitian(TOL_HERM));
                // strip the tiny anti-Hermitian rounding of the double matmul
                model.h.matrix = (&model.h.matrix + model.h.matrix.adjoint()) * C64::new(0.5, 0.0);
                Ok(model)
            }
        }
    }

    pub fn observable(&self, name: &str) -> Result<&Operator> {
        self.observables
            .get(name)
            .ok_or_else(|| Error::BadParameter(format!("model has no observable '{name}'")))
    }

    pub fn mass(&self) -> Option<f64> {
        match self.kind {
            ModelKind::Oscillator { mass, .. } | ModelKind::FreeParticle { mass, .. } => Some(mass),
            ModelKind::TwoLevel { .. } => None,
        }
    }

    /// Normalized Gaussian wavepacket (grid models) or the matching coherent
    /// state (Fock basis). `sigma` is the position-space width of the grid
    /// packet; Fock packets carry the oscillator's natural width.
    pub fn gaussian_state(&self, x0: f64, p0: f64, sigma: f64) -> Result<State> {
        if sigma <= 0.0 {
            return Err(Error::BadParameter("sigma must be positive".into()));
        }
        match &self.kind {
            ModelKind::FreeParticle { length, .. } => {
                let frame = self.grid.as_ref().unwrap();
                let half = length / 2.0;
                if x0 + 5.0 * sigma > half || x0 - 5.0 * sigma < -half {
                    return Err(Error::EdgeProximity(format!(
                        "packet at {x0} with width {sigma} is within 5 sigma of the box edge"
                    )));
                }
                let psi = DVector::from_fn(self.space.dim, |l, _| {
                    let dxl = frame.x[l] - x0;
                    let env = (-dxl * dxl / (4.0 * sigma * sigma)).exp();
                    C64::new(0.0, p0 * frame.x[l]).exp() * env
                });
                State::pure(self.space.clone(), &psi)
            }
            ModelKind::Oscillator { mass, omega, .. } => {
                let alpha = C64::new(
                    x0 * (mass * omega / 2.0).sqrt(),
                    p0 / (2.0 * mass * omega).sqrt(),
                );
                let mut vec = DVector::from_element(self.space.dim, C64::new(0.0, 0.0));
                let mut amp = C64::new((-alpha.norm_sqr() / 2.0).exp(), 0.0);
                let mut fact = 1.0;
                for n in 0..self.space.dim {
                    if n > 0 {
                        fact *= n as f64;
                        amp *= alpha;
                    }
                    vec[n] = amp / C64::new(fact.sqrt(), 0.0);
                }
                State::pure(self.space.clone(), &vec)
            }
            ModelKind::TwoLevel { .. } => {
                Err(Error::BadParameter("gaussian_state needs a grid or Fock model".into()))
            }
        }
    }

    /// Expectation value tr(rho O).
    pub fn expectation(&self, state: &State, op: &Operator) -> f64 {
        let prod = &op.matrix * &state.rho;
        let mut t = C64::new(0.0, 0.0);
        for i in 0..self.space.dim {
            t += prod[(i, i)];
        }
        t.re
    }
}
