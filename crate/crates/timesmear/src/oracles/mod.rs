//! Closed-form reference results, implemented independently of the numerical
//! pipeline (nothing here calls into `propagator` or `class_ops`). These are
//! the ground truth the integration and acceptance tests compare against.

pub mod bessel;

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::linalg::{sigma_x, sigma_z, BasisKind, C64, HilbertSpace, Operator};
use crate::smearing::{oscillator_coefficients, SmearingFunction};
use bessel::{bessel_j0, bessel_j1};

/// Absolutely continuous part of the two-level class-operator density C(a)
/// for H = omega sigma_z, A = sigma_x, uniform unit-mass smearing:
///
///   C_ac(a) = -(wT/2) J1(wT r)/r (1 + a sigma_x) + i (wT/2) J0(wT r) sigma_z,
///   r = sqrt(1 - a^2),  |a| < 1;   zero for |a| > 1.
///
/// The sign of the J1 terms is fixed by the completeness sum rule: the
/// integral of this density over [-1, 1] plus the two endpoint atoms (see
/// [`two_level_class_atoms`]) reconstructs exp(i w T sigma_z) exactly, and a
/// direct high-resolution quadrature of the defining k-integral confirms it.
pub fn two_level_class_op(omega: f64, t_total: f64, a: f64) -> Operator {
    let space = HilbertSpace::qubit();
    if a.abs() >= 1.0 {
        return Operator::zeros(space);
    }
    let b = omega * t_total;
    let r = (1.0 - a * a).sqrt();
    let z = b * r;
    // J1(z)/r with the small-r limit J1(b r)/r -> b/2
    let j1_over_r = if r < 1e-8 { b / 2.0 } else { bessel_j1(z) / r };
    let c_id = -(b / 2.0) * j1_over_r;
    let c_sx = c_id * a;
    let c_sz = b / 2.0 * bessel_j0(z);
    let sx = sigma_x();
    let sz = sigma_z();
    let mut m = Operator::identity(space).matrix * C64::new(c_id, 0.0);
    m += &sx.matrix * C64::new(c_sx, 0.0);
    m += &sz.matrix * C64::new(0.0, c_sz);
    Operator { space: HilbertSpace::qubit(), matrix: m, units_tag: None }
}

/// Singular (atomic) part of the same density: unit-mass points at a = +-1
/// carrying the spectral projectors of sigma_x. They are the frozen-history
/// contributions that survive the continuum limit at the extreme averages.
pub fn two_level_class_atoms() -> Vec<(f64, Operator)> {
    let sx = sigma_x();
    let space = HilbertSpace::qubit();
    let plus = Operator {
        space: space.clone(),
        matrix: (Operator::identity(space.clone()).matrix + &sx.matrix) * C64::new(0.5, 0.0),
        units_tag: None,
    };
    let minus = Operator {
        space: space.clone(),
        matrix: (Operator::identity(space).matrix - &sx.matrix) * C64::new(0.5, 0.0),
        units_tag: None,
    };
    vec![(1.0, plus), (-1.0, minus)]
}

/// Position-space kernel <x|D(a)|x'> of the driven harmonic oscillator
/// (row x is the later argument), assembled as the closed Gaussian
/// composition of the free evolution kernel with the Fourier-inverted driven
/// propagator. Coefficients come from [`oscillator_coefficients`].
pub fn oscillator_kernel(
    mass: f64,
    omega: f64,
    f: &SmearingFunction,
    a: f64,
    x: f64,
    xp: f64,
) -> Result<C64> {
    let tt = f.t_total;
    let s = (omega * tt).sin();
    if s.abs() < 1e-9 {
        return Err(Error::CausticSingularity(s.abs()));
    }
    let c = (omega * tt).cos();
    let (af, bf, cf) = oscillator_coefficients(f, omega)?;
    if cf.abs() < 1e-12 {
        return Err(Error::BadParameter(format!("C_f = {cf:.3e} too small for the kernel")));
    }
    let i = C64::new(0.0, 1.0);
    let gamma = mass * omega / (2.0 * s);
    // propagator prefactors with principal-branch square roots
    let pref_e = (C64::new(mass * omega / (2.0 * std::f64::consts::PI), 0.0) / (i * s)).sqrt();
    let pref_u = pref_e.conj();
    let pref_fresnel = (C64::new(std::f64::consts::PI * mass, 0.0) / (-i * cf)).sqrt()
        / C64::new(2.0 * std::f64::consts::PI, 0.0);
    let beta2 = -mass * af * af / (4.0 * cf);
    let beta1 = 2.0 * gamma * (xp - x) - (mass * af / (2.0 * cf)) * (bf * xp - a);
    let pref_y = (C64::new(std::f64::consts::PI, 0.0) / (-i * beta2)).sqrt();
    let static_phase = i
        * C64::new(
            gamma * c * (x * x - xp * xp) - (mass / (4.0 * cf)) * (bf * xp - a) * (bf * xp - a),
            0.0,
        );
    let y_phase = -i * C64::new(beta1 * beta1 / (4.0 * beta2), 0.0);
    Ok(pref_e * pref_u * pref_fresnel * pref_y * (static_phase + y_phase).exp())
}

/// Free-particle kernel <x|D(a)|x'> (row x later):
///
///   (m / (2 pi A_f T)) exp[ i m/(2T) (x^2 - x'^2)
///                           + i m C_f/(A_f^2 T^2) (x' - x)^2
///                           - i m/(A_f T) (x' - x)(B_f x' - a) ]
///
/// with the free-limit coefficients A_f, B_f, C_f of the weight. For even
/// profiles A_f = B_f and this is the usual Gaussian-oscillatory kernel.
pub fn free_particle_kernel(
    mass: f64,
    f: &SmearingFunction,
    a: f64,
    x: f64,
    xp: f64,
) -> Result<C64> {
    let tt = f.t_total;
    if tt <= 0.0 {
        return Err(Error::BadParameter("T must be positive".into()));
    }
    let (af, bf, cf) = oscillator_coefficients(f, 0.0)?;
    if bf.abs() < 1e-12 || af.abs() < 1e-12 {
        return Err(Error::DegenerateB(bf.abs().min(af.abs())));
    }
    let pref = mass / (2.0 * std::f64::consts::PI * af * tt);
    let phase = mass / (2.0 * tt) * (x * x - xp * xp)
        + mass * cf / (af * af * tt * tt) * (xp - x) * (xp - x)
        - mass / (af * tt) * (xp - x) * (bf * xp - a);
    Ok(C64::new(pref, 0.0) * C64::new(0.0, phase).exp())
}

/// Gaussian profile of the free-particle velocity measurement: density in v
/// centered at p/m with variance
///
///   sigma_v^2(T) = delta^2 + pi^4 / (2^8 m^2 T^2 delta^2).
pub fn velocity_povm_profile(mass: f64, t_total: f64, delta: f64, v: f64, p: f64) -> f64 {
    let s2 = velocity_povm_variance(mass, t_total, delta);
    let d = v - p / mass;
    (-d * d / (2.0 * s2)).exp() / (2.0 * std::f64::consts::PI * s2).sqrt()
}

pub fn velocity_povm_variance(mass: f64, t_total: f64, delta: f64) -> f64 {
    let pi4 = std::f64::consts::PI.powi(4);
    delta * delta + pi4 / (256.0 * mass * mass * t_total * t_total * delta * delta)
}

/// Closed form of the fixed-k Liouville class operator on a truncated Fock
/// space: exp(i H T / (1 + k)) with H = omega * n (the operator whose normal
/// symbol is the classical Hamiltonian omega |z|^2 used by the path
/// integral).
pub fn liouville_class_unitary(omega: f64, t_total: f64, k: f64, fock_dim: usize) -> Result<Operator> {
    if (k + 1.0).abs() < 1e-12 {
        return Err(Error::PoleAtMinusOne);
    }
    let space = HilbertSpace::new(fock_dim, BasisKind::FockTruncated { n_max: fock_dim - 1 })?;
    Ok(Operator::from_fn(space, |i, j| {
        if i == j {
            Complex::new(0.0, omega * t_total * i as f64 / (1.0 + k)).exp()
        } else {
            Complex::new(0.0, 0.0)
        }
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::simpson_c;
    use crate::smearing::SmearingKind;
    use approx::assert_abs_diff_eq;

    #[test]
    fn two_level_value_at_zero() {
        // frozen from the Bessel series: J0(1) = 0.765198, J1(1) = 0.440051
        let c = two_level_class_op(1.0, 1.0, 0.0);
        assert_abs_diff_eq!(c.matrix[(0, 0)].re, -0.22002529287246676, epsilon = 1e-12);
        assert_abs_diff_eq!(c.matrix[(0, 0)].im, 0.38259884327898328, epsilon = 1e-12);
        assert!(c.matrix[(0, 1)].norm() < 1e-15);
    }

    #[test]
    fn two_level_boundary_limit() {
        // at a -> 1 the J1(z)/r limit gives -(wT/2)^2 (1 + sigma_x) + i wT/2 sigma_z
        let w = 1.3;
        let t = 0.9;
        let c = two_level_class_op(w, t, 1.0 - 1e-12);
        let b = w * t;
        assert_abs_diff_eq!(c.matrix[(0, 0)].re, -b * b / 4.0, epsilon = 1e-6);
        assert_abs_diff_eq!(c.matrix[(0, 0)].im, b / 2.0, epsilon = 1e-6);
        assert_abs_diff_eq!(c.matrix[(0, 1)].re, -b * b / 4.0, epsilon = 1e-6);
    }

    #[test]
    fn two_level_vanishes_outside_support() {
        assert_eq!(two_level_class_op(1.0, 1.0, 2.0).frobenius(), 0.0);
        assert_eq!(two_level_class_op(1.0, 1.0, -1.5).frobenius(), 0.0);
    }

    #[test]
    fn two_level_completeness_sum_rule() {
        // integral of the density over [-1,1] plus atoms = exp(i w T sigma_z)
        let (w, t) = (1.0, 1.0);
        let b = w * t;
        let mut total = nalgebra::DMatrix::<C64>::zeros(2, 2);
        for comp in 0..4usize {
            let (i, j) = (comp / 2, comp % 2);
            let v = simpson_c(
                |a| two_level_class_op(w, t, a).matrix[(i, j)],
                -1.0 + 1e-9,
                1.0 - 1e-9,
                8193,
            );
            total[(i, j)] = v;
        }
        for (_, atom) in two_level_class_atoms() {
            total += &atom.matrix;
        }
        assert!((total[(0, 0)] - C64::new(b.cos(), b.sin())).norm() < 1e-5);
        assert!((total[(1, 1)] - C64::new(b.cos(), -b.sin())).norm() < 1e-5);
        assert!(total[(0, 1)].norm() < 1e-5);
    }

    #[test]
    fn free_kernel_uniform_coefficients() {
        // uniform f: A = B = 1/2, C = T/24; at x = x' the kernel is the bare
        // prefactor m/(pi T)
        let f = SmearingFunction::make_standard(SmearingKind::Uniform, 2.0).unwrap();
        let k = free_particle_kernel(1.0, &f, 0.0, 1.2, 1.2).unwrap();
        assert_abs_diff_eq!(k.re, 1.0 / (std::f64::consts::PI * 2.0), epsilon = 1e-9);
        assert!(k.im.abs() < 1e-9);
    }

    #[test]
    fn free_kernel_shift_property() {
        // a -> a + da multiplies the kernel by exp(+i m/(A_f T) (x'-x) da)
        let f = SmearingFunction::make_standard(SmearingKind::Uniform, 1.5).unwrap();
        let (x, xp, a, da) = (0.7, -0.4, 0.3, 0.9);
        let k1 = free_particle_kernel(1.0, &f, a, x, xp).unwrap();
        let k2 = free_particle_kernel(1.0, &f, a + da, x, xp).unwrap();
        let af = 0.5;
        let expected = C64::new(0.0, (xp - x) * da / (af * 1.5)).exp();
        assert!((k2 / k1 - expected).norm() < 1e-10);
    }

    #[test]
    fn oscillator_kernel_matches_free_at_small_frequency() {
        let f = SmearingFunction::make_standard(SmearingKind::Uniform, 1.0).unwrap();
        for (a, x, xp) in [(0.0, 0.4, -0.2), (0.7, 1.0, 0.8), (-0.5, -0.6, 0.9)] {
            let k_free = free_particle_kernel(1.0, &f, a, x, xp).unwrap();
            let k_osc = oscillator_kernel(1.0, 1e-4, &f, a, x, xp).unwrap();
            let rel = (k_free - k_osc).norm() / k_free.norm();
            assert!(rel < 1e-5, "rel dev {rel:.2e} at ({a},{x},{xp})");
        }
    }

    #[test]
    fn oscillator_kernel_hermiticity_regression() {
        // D(a) need not be Hermitian; record the x <-> x' conjugation defect
        // on a small grid so regressions in the assembled phases show up.
        let f = SmearingFunction::make_standard(SmearingKind::Uniform, 1.0).unwrap();
        let mut max_sym = 0.0f64;
        let mut max_val = 0.0f64;
        for i in 0..8 {
            for j in 0..8 {
                let (x, xp) = (-0.7 + 0.2 * i as f64, -0.7 + 0.2 * j as f64);
                let k = oscillator_kernel(1.0, 0.8, &f, 0.3, x, xp).unwrap();
                let kt = oscillator_kernel(1.0, 0.8, &f, 0.3, xp, x).unwrap();
                max_sym = max_sym.max((k - kt.conj()).norm());
                max_val = max_val.max(k.norm());
            }
        }
        // frozen regression envelope: the defect stays order-one relative to
        // the kernel scale and the scale itself is stable
        assert!(max_val > 0.1 && max_val < 1.0, "kernel scale drifted: {max_val}");
        assert!(max_sym < 2.0 * max_val);
    }

    #[test]
    fn caustic_and_degenerate_guards() {
        let f = SmearingFunction::make_standard(SmearingKind::Uniform, 1.0).unwrap();
        assert!(matches!(
            oscillator_kernel(1.0, std::f64::consts::PI, &f, 0.0, 0.0, 0.0),
            Err(Error::CausticSingularity(_))
        ));
    }

    #[test]
    fn velocity_profile_values() {
        // formula evaluation at the reference points
        assert_abs_diff_eq!(velocity_povm_variance(1.0, 10.0, 0.5), 0.26522, epsilon = 1e-5);
        assert_abs_diff_eq!(velocity_povm_variance(1.0, 40.0, 0.5), 0.250951, epsilon = 1e-6);
        // T -> infinity: variance -> delta^2
        assert_abs_diff_eq!(velocity_povm_variance(1.0, 1e9, 0.5), 0.25, epsilon = 1e-12);
        // T -> 0: variance diverges, profile tends to zero pointwise
        assert!(velocity_povm_profile(1.0, 1e-8, 0.5, 0.3, 0.4) < 1e-6);
        // unit mass over v
        let mass_v = crate::quad::simpson(
            |v| velocity_povm_profile(1.0, 10.0, 0.5, v, 2.0),
            -8.0,
            12.0,
            8193,
        );
        assert_abs_diff_eq!(mass_v, 1.0, epsilon = 1e-9);
    }

    #[test]
    fn liouville_unitary_cases() {
        let u = liouville_class_unitary(1.0, 2.0, 0.0, 4).unwrap();
        for n in 0..4 {
            let expect = C64::new(0.0, 2.0 * n as f64).exp();
            assert!((u.matrix[(n, n)] - expect).norm() < 1e-14);
        }
        // k = 1, wT = pi: halves the phase per level
        let u2 = liouville_class_unitary(1.0, std::f64::consts::PI, 1.0, 3).unwrap();
        let expect = C64::new(0.0, std::f64::consts::PI / 2.0).exp();
        assert!((u2.matrix[(1, 1)] - expect).norm() < 1e-14);
        assert!(matches!(liouville_class_unitary(1.0, 1.0, -1.0, 3), Err(Error::PoleAtMinusOne)));
    }
}
