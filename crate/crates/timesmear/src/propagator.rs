//! The driven propagator U_f(T, k) = T-exp( i ∫_0^T (H + k f(t) A) dt ),
//! the kernel of the whole construction.
//!
//! The fixed ordering convention: the rightmost factor of the ordered
//! product is earliest in time, so slice factors multiply on the left as
//! time advances. Everything downstream (the e^{-ika} inversion, D(a) =
//! e^{-iHT} C(a), and all closed-form oracles) is checked under this single
//! convention.
//!
//! Generic models go through Trotter slicing. Three families of inputs admit
//! exact evaluators, which the family constructor picks automatically:
//! commuting pairs [H, A] = 0, uniform weights (time-independent generator),
//! and the free particle driven through its position operator, where the
//! interaction picture solves the evolution in closed form inside the
//! momentum band of the grid.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::{matrix_exponential, spectral_decompose, C64, CMat, Operator, TOL_HERM};
use crate::models::{ModelKind, ModelSpec};
use crate::quad::{self, simpson};
use crate::smearing::SmearingFunction;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    LieTrotter,
    Strang,
}

#[derive(Debug, Clone, Copy)]
pub struct TimeSlicing {
    pub n_slices: usize,
    pub scheme: Scheme,
}

impl TimeSlicing {
    pub fn strang(n_slices: usize) -> Self {
        Self { n_slices, scheme: Scheme::Strang }
    }

    pub fn lie_trotter(n_slices: usize) -> Self {
        Self { n_slices, scheme: Scheme::LieTrotter }
    }
}

impl Default for TimeSlicing {
    fn default() -> Self {
        Self { n_slices: 2048, scheme: Scheme::Strang }
    }
}

fn spectral_norm_estimate(m: &CMat) -> f64 {
    // power iteration on M^dagger M with a fixed deterministic start
    let n = m.nrows();
    let mut v = DVector::from_fn(n, |i, _| C64::new(1.0 + (i as f64 * 0.7).sin(), 0.3 * (i as f64 * 1.3).cos()));
    v /= C64::new(v.norm(), 0.0);
    let mut lam = 0.0;
    for _ in 0..30 {
        let w = m.adjoint() * (m * &v);
        let n2 = w.norm();
        if n2 < 1e-300 {
            return 0.0;
        }
        lam = n2;
        v = w / C64::new(n2, 0.0);
    }
    lam.sqrt()
}

fn check_slicing(h: &Operator, a: &Operator, f: &SmearingFunction, k: f64, slicing: &TimeSlicing) -> Result<f64> {
    if slicing.n_slices < 16 {
        return Err(Error::StepTooLarge(format!("n_slices = {} < 16", slicing.n_slices)));
    }
    let dt = f.t_total / slicing.n_slices as f64;
    let bound = 0.5 / (spectral_norm_estimate(&h.matrix) + k.abs() * f.max_abs() * spectral_norm_estimate(&a.matrix)).max(1e-300);
    if dt >= bound {
        return Err(Error::StepTooLarge(format!(
            "dt = {dt:.3e} exceeds stability bound {bound:.3e}; increase n_slices"
        )));
    }
    Ok(dt)
}

/// One sliced evolution: the ordered product of short-time factors
///   lie_trotter:  e^{iH dt} e^{i k f(t_i) A dt}
///   strang:       e^{iH dt/2} e^{i k f(t_i) A dt} e^{iH dt/2}
/// with the weight sampled at slice midpoints.
pub fn evolve(
    model: &ModelSpec,
    a: &Operator,
    f: &SmearingFunction,
    k: f64,
    slicing: &TimeSlicing,
) -> Result<Operator> {
    if !a.is_hermitian(TOL_HERM) {
        return Err(Error::NotHermitian("observable in evolve".into()));
    }
    let h = &model.h;
    let dt = check_slicing(h, a, f, k, slicing)?;
    let n = slicing.n_slices;

    // work in the observable eigenbasis so each slice costs one gemm
    let comps = spectral_decompose(a)?;
    let dim = a.dim();
    let mut v = CMat::zeros(dim, dim);
    let mut lam = Vec::with_capacity(dim);
    {
        let mut col = 0;
        for c in &comps {
            // re-extract an orthonormal basis of the (possibly merged) eigenspace
            let eig = c.projector.matrix.clone().symmetric_eigen();
            for i in 0..dim {
                if eig.eigenvalues[i] > 0.5 {
                    v.set_column(col, &eig.eigenvectors.column(i));
                    lam.push(c.eigenvalue);
                    col += 1;
                }
            }
        }
        if col != dim {
            return Err(Error::ConvergenceFailure("eigenbasis extraction in evolve".into()));
        }
    }
    let vd = v.adjoint();

    let apply_diag = |u: &mut CMat, t_mid: f64| {
        let c = k * f.value(t_mid) * dt;
        for (j, l) in lam.iter().enumerate() {
            let ph = C64::new(0.0, c * l).exp();
            for i in 0..dim {
                u[(j, i)] *= ph;
            }
        }
    };

    let u_final = match slicing.scheme {
        Scheme::Strang => {
            let e_half = matrix_exponential(h, C64::new(0.0, dt / 2.0))?;
            let eh_t = &vd * &e_half.matrix * &v;
            let e_t = &eh_t * &eh_t;
            let mut u = eh_t.clone();
            for i in 1..=n {
                let t_mid = (i as f64 - 0.5) * dt;
                apply_diag(&mut u, t_mid);
                u = if i < n { &e_t * u } else { &eh_t * u };
            }
            &v * u * &vd
        }
        Scheme::LieTrotter => {
            let e_full = matrix_exponential(h, C64::new(0.0, dt))?;
            let e_t = &vd * &e_full.matrix * &v;
            let mut u = CMat::identity(dim, dim);
            for i in 1..=n {
                let t_mid = (i as f64 - 0.5) * dt;
                apply_diag(&mut u, t_mid);
                u = &e_t * u;
            }
            &v * u * &vd
        }
    };
    Operator::new(a.space.clone(), u_final)
}

/// Evaluation strategy of a [`PropagatorFamily`].
#[derive(Debug, Clone)]
pub enum Strategy {
    /// Generic Trotter slicing.
    Sliced(TimeSlicing),
    /// [H, A] = 0: U(k) = e^{iHT} e^{i k F1 A} exactly, F1 = ∫ f.
    CommutingExact,
    /// Free particle driven through x on the grid, any weight: interaction
    /// picture gives U(k) = e^{i k G(T) x} F^† diag e^{i(p^2 T + 2 p k G1 +
    /// k^2 G2)/2m} F, valid while |k| max|G| stays inside the momentum band.
    FreeGridAnalytic,
}

/// Quadratures of the weight needed by the analytic free-particle path:
/// G(s) = ∫_0^s f, G1 = ∫ G, G2 = ∫ G^2, and the endpoint G(T).
#[derive(Debug, Clone)]
pub struct WeightQuadratures {
    pub g_end: f64,
    pub g1: f64,
    pub g2: f64,
    pub g_max_abs: f64,
}

impl WeightQuadratures {
    pub fn of(f: &SmearingFunction) -> Self {
        let (cum, h) = f.primitive_samples(quad::DEFAULT_NODES);
        let g_end = *cum.last().unwrap();
        let g1 = quad::cumulative_simpson(&cum, h).last().copied().unwrap();
        let sq: Vec<f64> = cum.iter().map(|g| g * g).collect();
        let g2 = quad::cumulative_simpson(&sq, h).last().copied().unwrap();
        let g_max_abs = cum.iter().fold(0.0f64, |m, &g| m.max(g.abs()));
        Self { g_end, g1, g2, g_max_abs }
    }
}

/// The map k -> U_f(T, k) over a symmetric grid of inversion frequencies.
/// Values are computed on demand; `value` returns dense matrices, while
/// p-diagonal families expose their diagonals for the large-grid paths.
#[derive(Debug, Clone)]
pub struct PropagatorFamily {
    pub model: ModelSpec,
    pub observable: Operator,
    pub f: SmearingFunction,
    pub ks: Vec<f64>,
    pub strategy: Strategy,
    // precomputed pieces
    e_ht: Option<CMat>,            // e^{iHT}
    a_eigs: Option<(CMat, Vec<f64>)>, // observable eigenbasis
    wq: Option<WeightQuadratures>,
}

fn validate_kgrid(ks: &[f64]) -> Result<()> {
    if ks.is_empty() {
        return Err(Error::BadParameter("empty k grid".into()));
    }
    for w in ks.windows(2) {
        if !(w[1] > w[0]) {
            return Err(Error::BadParameter("k grid must be strictly increasing".into()));
        }
    }
    let n = ks.len();
    for i in 0..n / 2 {
        if (ks[i] + ks[n - 1 - i]).abs() > 1e-9 * ks[n - 1].abs().max(1.0) {
            return Err(Error::BadParameter("k grid must be symmetric about 0".into()));
        }
    }
    if n % 2 == 0 {
        return Err(Error::BadParameter("k grid must contain k = 0 (odd length)".into()));
    }
    Ok(())
}

impl PropagatorFamily {
    /// Build a family, choosing the cheapest exact strategy that applies:
    /// the analytic in-band path for x-driven free particles, the commuting
    /// closed form when [H, A] vanishes, and Trotter slicing otherwise.
    pub fn new(
        model: &ModelSpec,
        observable: &Operator,
        f: &SmearingFunction,
        ks: Vec<f64>,
        slicing: TimeSlicing,
    ) -> Result<Self> {
        validate_kgrid(&ks)?;
        if !observable.is_hermitian(TOL_HERM) {
            return Err(Error::NotHermitian("family observable".into()));
        }
        let strategy = Self::pick_strategy(model, observable, f, &ks)?;
        Self::with_strategy(model, observable, f, ks, slicing, strategy)
    }

    pub fn with_strategy(
        model: &ModelSpec,
        observable: &Operator,
        f: &SmearingFunction,
        ks: Vec<f64>,
        slicing: TimeSlicing,
        strategy: Strategy,
    ) -> Result<Self> {
        validate_kgrid(&ks)?;
        let strategy = match strategy {
            Strategy::Sliced(_) => Strategy::Sliced(slicing),
            s => s,
        };
        let mut fam = Self {
            model: model.clone(),
            observable: observable.clone(),
            f: f.clone(),
            ks,
            strategy,
            e_ht: None,
            a_eigs: None,
            wq: None,
        };
        match &fam.strategy {
            Strategy::CommutingExact => {
                let e = matrix_exponential(&model.h, C64::new(0.0, f.t_total))?;
                fam.e_ht = Some(e.matrix);
                let comps = spectral_decompose(observable)?;
                let dim = observable.dim();
                let mut v = CMat::zeros(dim, dim);
                let mut lam = Vec::new();
                let mut col = 0;
                for c in &comps {
                    let eig = c.projector.matrix.clone().symmetric_eigen();
                    for i in 0..dim {
                        if eig.eigenvalues[i] > 0.5 {
                            v.set_column(col, &eig.eigenvectors.column(i));
                            lam.push(c.eigenvalue);
                            col += 1;
                        }
                    }
                }
                fam.a_eigs = Some((v, lam));
            }
            Strategy::FreeGridAnalytic => {
                let wq = WeightQuadratures::of(f);
                let frame = model.grid.as_ref().ok_or_else(|| {
                    Error::BadParameter("analytic free path needs a grid model".into())
                })?;
                let k_max = fam.ks.last().copied().unwrap_or(0.0).abs();
                let headroom = frame.p_max() * 0.98;
                if k_max * wq.g_max_abs > headroom {
                    return Err(Error::Aliasing(format!(
                        "k_max |G|_max = {:.2} exceeds the momentum band {:.2}",
                        k_max * wq.g_max_abs,
                        headroom
                    )));
                }
                fam.wq = Some(wq);
            }
            Strategy::Sliced(_) => {}
        }
        Ok(fam)
    }

    fn pick_strategy(
        model: &ModelSpec,
        observable: &Operator,
        f: &SmearingFunction,
        ks: &[f64],
    ) -> Result<Strategy> {
        if let ModelKind::FreeParticle { .. } = model.kind {
            let x = model.observable("x")?;
            if observable.sub(x).frobenius() < 1e-12 {
                // only if the whole k range stays inside the momentum band
                let wq = WeightQuadratures::of(f);
                let frame = model.grid.as_ref().unwrap();
                let k_max = ks.last().copied().unwrap_or(0.0).abs();
                if k_max * wq.g_max_abs <= frame.p_max() * 0.98 {
                    return Ok(Strategy::FreeGridAnalytic);
                }
            }
        }
        let comm = model.h.commutator(observable).frobenius();
        let scale = model.h.frobenius().max(1e-300) * observable.frobenius().max(1e-300);
        if comm < 1e-12 * scale.max(1.0) {
            return Ok(Strategy::CommutingExact);
        }
        Ok(Strategy::Sliced(TimeSlicing::default()))
    }

    pub fn len(&self) -> usize {
        self.ks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ks.is_empty()
    }

    pub fn k_at(&self, idx: usize) -> Result<f64> {
        self.ks
            .get(idx)
            .copied()
            .ok_or_else(|| Error::MissingNode(format!("index {idx} of {}", self.ks.len())))
    }

    /// True when every U(k) of this family is diagonal in the momentum basis
    /// of the grid model (velocity-type weights on the free particle, or a
    /// momentum observable).
    pub fn momentum_diagonal(&self) -> bool {
        match &self.strategy {
            Strategy::FreeGridAnalytic => {
                self.wq.as_ref().map(|w| w.g_end.abs() < 1e-9).unwrap_or(false)
            }
            Strategy::CommutingExact => {
                if self.model.grid.is_none() {
                    return false;
                }
                match self.model.observable("p") {
                    Ok(p) => self.observable.sub(p).frobenius() < 1e-12,
                    Err(_) => false,
                }
            }
            _ => false,
        }
    }

    /// Momentum-basis diagonal of U(k_idx) for momentum-diagonal families.
    pub fn value_diag_p(&self, idx: usize) -> Result<DVector<C64>> {
        let k = self.k_at(idx)?;
        let frame = self
            .model
            .grid
            .as_ref()
            .ok_or_else(|| Error::BadParameter("not a grid model".into()))?;
        let mass = self.model.mass().unwrap();
        let tt = self.f.t_total;
        match &self.strategy {
            Strategy::FreeGridAnalytic => {
                let wq = self.wq.as_ref().unwrap();
                if wq.g_end.abs() >= 1e-9 {
                    return Err(Error::BadParameter("family is not momentum-diagonal".into()));
                }
                Ok(DVector::from_fn(frame.p.len(), |j, _| {
                    let p = frame.p[j];
                    let phase = (p * p * tt + 2.0 * p * k * wq.g1 + k * k * wq.g2) / (2.0 * mass);
                    C64::new(0.0, phase).exp()
                }))
            }
            Strategy::CommutingExact => {
                let f1 = self.f.normalization;
                Ok(DVector::from_fn(frame.p.len(), |j, _| {
                    let p = frame.p[j];
                    C64::new(0.0, p * p * tt / (2.0 * mass) + k * f1 * p).exp()
                }))
            }
            _ => Err(Error::BadParameter("family is not momentum-diagonal".into())),
        }
    }

    /// Dense U(k_idx) in the model basis.
    pub fn value(&self, idx: usize) -> Result<Operator> {
        let k = self.k_at(idx)?;
        match &self.strategy {
            Strategy::Sliced(slicing) => evolve(&self.model, &self.observable, &self.f, k, slicing),
            Strategy::CommutingExact => {
                let e_ht = self.e_ht.as_ref().unwrap();
                let (v, lam) = self.a_eigs.as_ref().unwrap();
                let dim = self.observable.dim();
                let f1 = self.f.normalization;
                let mut phases = CMat::zeros(dim, dim);
                for (j, l) in lam.iter().enumerate() {
                    phases[(j, j)] = C64::new(0.0, k * f1 * l).exp();
                }
                let u = e_ht * (v * phases * v.adjoint());
                Operator::new(self.observable.space.clone(), u)
            }
            Strategy::FreeGridAnalytic => {
                let frame = self.model.grid.as_ref().unwrap();
                let wq = self.wq.as_ref().unwrap();
                let mass = self.model.mass().unwrap();
                let tt = self.f.t_total;
                let n = frame.p.len();
                let fdag = frame.to_momentum.adjoint();
                let mut diag = CMat::zeros(n, n);
                for j in 0..n {
                    let p = frame.p[j];
                    let phase = (p * p * tt + 2.0 * p * k * wq.g1 + k * k * wq.g2) / (2.0 * mass);
                    diag[(j, j)] = C64::new(0.0, phase).exp();
                }
                let mut u = &fdag * diag * &frame.to_momentum;
                // the position phase acts from the left, scaling rows
                for l in 0..n {
                    let ph = C64::new(0.0, k * wq.g_end * frame.x[l]).exp();
                    for c in 0..n {
                        u[(l, c)] *= ph;
                    }
                }
                Operator::new(self.observable.space.clone(), u)
            }
        }
    }

    /// Materialize all nodes (small models only; intended for tests and
    /// serialization).
    pub fn to_map(&self) -> Result<Vec<(f64, Operator)>> {
        (0..self.len())
            .map(|i| Ok((self.ks[i], self.value(i)?)))
            .collect()
    }

    pub fn unitarity_deviation(&self, idx: usize) -> Result<f64> {
        let u = self.value(idx)?;
        let dim = u.dim();
        Ok((u.matrix.adjoint() * &u.matrix - CMat::identity(dim, dim)).norm())
    }

    /// F1 = ∫ f dt of the family weight.
    pub fn weight_mass(&self) -> f64 {
        self.f.normalization
    }
}

/// Effective |k f(t)|-style coupling integral used by completeness and
/// support heuristics: ∫ |f| dt.
pub fn weight_abs_mass(f: &SmearingFunction) -> f64 {
    simpson(|t| f.value(t).abs(), 0.0, f.t_total, quad::DEFAULT_NODES)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{sigma_x, sigma_z};
    use crate::models::ModelKind;
    use crate::smearing::SmearingKind;

    fn two_level(omega: f64) -> ModelSpec {
        ModelSpec::build(ModelKind::TwoLevel { omega }).unwrap()
    }

    #[test]
    fn zero_coupling_reduces_to_free_evolution() {
        let m = two_level(0.8);
        let f = SmearingFunction::make_standard(SmearingKind::Uniform, 1.3).unwrap();
        let u = evolve(&m, &sigma_x(), &f, 0.0, &TimeSlicing::strang(64)).unwrap();
        let e = matrix_exponential(&m.h, C64::new(0.0, 1.3)).unwrap();
        assert!((u.matrix - e.matrix).norm() < 1e-8);
    }

    #[test]
    fn commuting_inputs_factorize_exactly() {
        // H = w sigma_z, A = sigma_z, uniform f: U(k) = e^{i(wT + k) sigma_z}
        let m = two_level(1.0);
        let f = SmearingFunction::make_standard(SmearingKind::Uniform, 1.0).unwrap();
        let k = 2.31;
        let u = evolve(&m, &sigma_z(), &f, k, &TimeSlicing::strang(64)).unwrap();
        let phase = 1.0 + k;
        assert!((u.matrix[(0, 0)] - C64::new(phase.cos(), phase.sin())).norm() < 1e-10);
        assert!((u.matrix[(1, 1)] - C64::new(phase.cos(), -phase.sin())).norm() < 1e-10);
    }

    #[test]
    fn two_level_closed_form() {
        // U(k, T) = cos(S) + i sin(S)/S (k sigma_x + wT sigma_z), S = sqrt(k^2 + w^2 T^2)
        let m = two_level(1.0);
        let f = SmearingFunction::make_standard(SmearingKind::Uniform, 1.0).unwrap();
        for k in [0.0, 0.7, -3.2, 11.0] {
            let u = evolve(&m, &sigma_x(), &f, k, &TimeSlicing::strang(4096)).unwrap();
            let s = (k * k + 1.0f64).sqrt();
            let mut expect = CMat::identity(2, 2) * C64::new(s.cos(), 0.0);
            expect += sigma_x().matrix * C64::new(0.0, s.sin() / s * k);
            expect += sigma_z().matrix * C64::new(0.0, s.sin() / s);
            let rel = (u.matrix - &expect).norm() / expect.norm();
            assert!(rel < 1e-6, "k = {k}: rel = {rel:.2e}");
        }
    }

    #[test]
    fn strang_is_second_order() {
        let m = two_level(1.0);
        let f = SmearingFunction::make_standard(SmearingKind::SineBumpUnit, 1.0).unwrap();
        let k = 3.0;
        let reference = evolve(&m, &sigma_x(), &f, k, &TimeSlicing::strang(16384)).unwrap();
        let mut errs = Vec::new();
        for n in [64, 128, 256, 512] {
            let u = evolve(&m, &sigma_x(), &f, k, &TimeSlicing::strang(n)).unwrap();
            errs.push((u.matrix - &reference.matrix).norm());
        }
        for w in errs.windows(2) {
            let order = (w[0] / w[1]).log2();
            assert!((1.8..=2.2).contains(&order), "order {order}");
        }
    }

    #[test]
    fn lie_trotter_is_first_order() {
        let m = two_level(1.0);
        let f = SmearingFunction::make_standard(SmearingKind::SineBumpUnit, 1.0).unwrap();
        let k = 3.0;
        let reference = evolve(&m, &sigma_x(), &f, k, &TimeSlicing::strang(16384)).unwrap();
        let mut errs = Vec::new();
        for n in [128, 256, 512] {
            let u = evolve(&m, &sigma_x(), &f, k, &TimeSlicing::lie_trotter(n)).unwrap();
            errs.push((u.matrix - &reference.matrix).norm());
        }
        for w in errs.windows(2) {
            let order = (w[0] / w[1]).log2();
            assert!((0.8..=1.2).contains(&order), "order {order}");
        }
    }

    #[test]
    fn unitarity_over_k_sweep() {
        let m = two_level(0.9);
        let f = SmearingFunction::make_standard(SmearingKind::Uniform, 1.0).unwrap();
        let ks: Vec<f64> = (-128..=128).map(|i| i as f64 * 0.25).collect();
        let fam = PropagatorFamily::new(&m, &sigma_x(), &f, ks, TimeSlicing::strang(256)).unwrap();
        for idx in (0..fam.len()).step_by(16) {
            assert!(fam.unitarity_deviation(idx).unwrap() < 1e-8);
        }
    }

    #[test]
    fn slicing_guard_fires() {
        let m = two_level(1.0);
        let f = SmearingFunction::make_standard(SmearingKind::Uniform, 1.0).unwrap();
        // k so large that 16 slices violate the step bound
        match evolve(&m, &sigma_x(), &f, 1e4, &TimeSlicing::strang(16)) {
            Err(Error::StepTooLarge(_)) => {}
            other => panic!("expected StepTooLarge, got {other:?}"),
        }
    }

    #[test]
    fn conjugate_flip_symmetry() {
        // real-symmetric H and A: U(-k) equals the entrywise conjugate of U(k)
        let m = two_level(1.0);
        let f = SmearingFunction::make_standard(SmearingKind::SineBumpUnit, 1.0).unwrap();
        let up = evolve(&m, &sigma_x(), &f, 1.7, &TimeSlicing::strang(512)).unwrap();
        let um = evolve(&m, &sigma_x(), &f, -1.7, &TimeSlicing::strang(512)).unwrap();
        let conj = CMat::from_fn(2, 2, |i, j| up.matrix[(i, j)].conj());
        assert!((um.matrix - conj).norm() < 1e-8);
    }

    #[test]
    fn split_support_composition() {
        // weight supported on [0, T/2] then [T/2, T] composes into the full
        // evolution within slicing tolerance
        let m = two_level(1.0);
        let tt = 1.0;
        let n = 2001;
        let ts: Vec<f64> = (0..n).map(|i| tt * i as f64 / (n - 1) as f64).collect();
        let bump = |t: f64, lo: f64, hi: f64| {
            if t <= lo || t >= hi {
                0.0
            } else {
                let u = (t - lo) / (hi - lo);
                let pi = std::f64::consts::PI;
                (1.0 - (2.0 * pi * u).cos()) / (hi - lo)
            }
        };
        let f_first = SmearingFunction::from_samples(
            ts.clone(),
            ts.iter().map(|&t| bump(t, 0.0, 0.5)).collect(),
            None,
        )
        .unwrap();
        let f_second = SmearingFunction::from_samples(
            ts.clone(),
            ts.iter().map(|&t| bump(t, 0.5, 1.0)).collect(),
            None,
        )
        .unwrap();
        let f_both = SmearingFunction::from_samples(
            ts.clone(),
            ts.iter().map(|&t| bump(t, 0.0, 0.5) + bump(t, 0.5, 1.0)).collect(),
            None,
        )
        .unwrap();
        let k = 1.1;
        let sl = TimeSlicing::strang(4096);
        let u1 = evolve(&m, &sigma_x(), &f_first, k, &sl).unwrap();
        let u2 = evolve(&m, &sigma_x(), &f_second, k, &sl).unwrap();
        let u12 = evolve(&m, &sigma_x(), &f_both, k, &sl).unwrap();
        let composed = u2.matrix * u1.matrix;
        let dev = (composed - u12.matrix).norm();
        assert!(dev < 5e-4, "composition deviation {dev:.2e}");
    }

    #[test]
    fn family_auto_strategy() {
        let m = two_level(1.0);
        let f = SmearingFunction::make_standard(SmearingKind::Uniform, 1.0).unwrap();
        let ks: Vec<f64> = (-8..=8).map(|i| i as f64).collect();
        let fam = PropagatorFamily::new(&m, &sigma_z(), &f, ks.clone(), TimeSlicing::default()).unwrap();
        assert!(matches!(fam.strategy, Strategy::CommutingExact));
        let fam2 = PropagatorFamily::new(&m, &sigma_x(), &f, ks.clone(), TimeSlicing::default()).unwrap();
        assert!(matches!(fam2.strategy, Strategy::Sliced(_)));

        let free = ModelSpec::build(ModelKind::FreeParticle { mass: 1.0, n_points: 64, length: 20.0 }).unwrap();
        let x = free.observable("x").unwrap().clone();
        let fam3 = PropagatorFamily::new(&free, &x, &f, ks, TimeSlicing::default()).unwrap();
        assert!(matches!(fam3.strategy, Strategy::FreeGridAnalytic));
    }

    #[test]
    fn free_grid_analytic_matches_slicing() {
        // anchor the analytic in-band path to the generic machinery
        let free = ModelSpec::build(ModelKind::FreeParticle { mass: 1.0, n_points: 64, length: 30.0 }).unwrap();
        let x = free.observable("x").unwrap().clone();
        let f = SmearingFunction::make_standard(SmearingKind::Uniform, 1.5).unwrap();
        let ks = vec![-2.0, -1.0, 0.0, 1.0, 2.0];
        let fam = PropagatorFamily::with_strategy(
            &free,
            &x,
            &f,
            ks.clone(),
            TimeSlicing::default(),
            Strategy::FreeGridAnalytic,
        )
        .unwrap();
        let packet = free.gaussian_state(0.0, 1.0, 1.2).unwrap();
        let psi = packet.pure_vector(1e-9).unwrap();
        for (idx, &k) in ks.iter().enumerate() {
            let ua = fam.value(idx).unwrap();
            let us = evolve(&free, &x, &f, k, &TimeSlicing::strang(3000)).unwrap();
            // compare on an interior wavepacket, where the band condition holds
            let d = (&ua.matrix * &psi - &us.matrix * &psi).norm();
            assert!(d < 2e-5, "k = {k}: packet deviation {d:.2e}");
        }
    }

    #[test]
    fn momentum_diagonal_families() {
        let free = ModelSpec::build(ModelKind::FreeParticle { mass: 1.0, n_points: 64, length: 30.0 }).unwrap();
        let p = free.observable("p").unwrap().clone();
        let f = SmearingFunction::make_standard(SmearingKind::SineBumpPaper, 2.0).unwrap();
        let ks = vec![-1.0, 0.0, 1.0];
        let fam = PropagatorFamily::new(&free, &p, &f, ks, TimeSlicing::default()).unwrap();
        assert!(matches!(fam.strategy, Strategy::CommutingExact));
        assert!(fam.momentum_diagonal());
        let d = fam.value_diag_p(1).unwrap();
        let dense = fam.value(1).unwrap();
        let frame = free.grid.as_ref().unwrap();
        let back = frame.to_momentum.adjoint()
            * CMat::from_fn(64, 64, |i, j| if i == j { d[i] } else { C64::new(0.0, 0.0) })
            * &frame.to_momentum;
        assert!((back - dense.matrix).norm() < 1e-9);
    }
}
