//! Fourier–Laplace modes of the viscous system linearized at a fluid at rest.
//!
//! For a mode `Ψ e^{λt + iξ·x}` the linearization reads `M(λ, ξ) Ψ = 0` with
//!
//! ```text
//! M = [ λ        iκ ξᵀ                  ]
//!     [ iσ² ξ    (κλ + ελ² + ε|ξ|²) I₃  ]
//! ```
//!
//! and, after rotating `ξ` onto the first axis, `det M = 0` factors into an
//! acoustic cubic and a shear quadratic in `λ` (with `κ̃ = κ/ε`):
//!
//! ```text
//! (λ³ + κ̃λ² + ξ²λ + κ̃σ²ξ²)(λ² + κ̃λ + ξ²) = 0.
//! ```

use nalgebra::{DMatrix, Matrix4, Vector4};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::eos::EquationOfState;
use crate::error::{Error, Result};
use crate::exec::{self, Execution};

/// Relative smallest-singular-value threshold for a numerical null space.
pub const NULL_TOL: f64 = 1e-8;

/// Background state of the linearization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearizationParams {
    /// Background density, when the parameters come from an EOS.
    pub rho0: Option<f64>,
    /// `κ = p(ρ₀) + ρ₀`.
    pub kappa: f64,
    pub sigma: f64,
    pub epsilon: f64,
}

impl LinearizationParams {
    pub fn new(kappa: f64, sigma: f64, epsilon: f64) -> Result<Self> {
        if !(kappa > 0.0 && kappa.is_finite()) {
            return Err(Error::Domain(format!("kappa must be > 0, got {kappa}")));
        }
        if !(sigma > 0.0 && sigma < 1.0) {
            return Err(Error::Domain(format!("sigma must lie in (0, 1), got {sigma}")));
        }
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(Error::Domain(format!("epsilon must be > 0, got {epsilon}")));
        }
        Ok(Self {
            rho0: None,
            kappa,
            sigma,
            epsilon,
        })
    }

    pub fn from_eos(eos: &EquationOfState, rho0: f64, epsilon: f64) -> Result<Self> {
        let kappa = eos.pressure(rho0)? + rho0;
        let sigma = eos.sound_speed(rho0)?;
        Ok(Self {
            rho0: Some(rho0),
            ..Self::new(kappa, sigma, epsilon)?
        })
    }

    /// Parameters with `ε = 1`, so that `κ = κ̃`.
    pub fn from_reduced(kappa_tilde: f64, sigma: f64) -> Result<Self> {
        Self::new(kappa_tilde, sigma, 1.0)
    }

    pub fn kappa_tilde(&self) -> f64 {
        self.kappa / self.epsilon
    }

    /// Monic acoustic cubic, highest power first.
    pub fn cubic(&self, xi: f64) -> [f64; 4] {
        let kt = self.kappa_tilde();
        let xi2 = xi * xi;
        [1.0, kt, xi2, kt * self.sigma * self.sigma * xi2]
    }

    /// Monic shear quadratic, highest power first.
    pub fn quadratic(&self, xi: f64) -> [f64; 3] {
        [1.0, self.kappa_tilde(), xi * xi]
    }
}

/// The 4×4 Fourier–Laplace matrix.
pub fn linearized_matrix(params: &LinearizationParams, lambda: Complex64, xi: [f64; 3]) -> Matrix4<Complex64> {
    let i = Complex64::i();
    let k = params.kappa;
    let e = params.epsilon;
    let s2 = params.sigma * params.sigma;
    let xi2: f64 = xi.iter().map(|x| x * x).sum();
    let diag = k * lambda + e * lambda * lambda + e * xi2;
    let mut m = Matrix4::<Complex64>::zeros();
    m[(0, 0)] = lambda;
    for j in 0..3 {
        m[(0, j + 1)] = i * k * xi[j];
        m[(j + 1, 0)] = i * s2 * xi[j];
        m[(j + 1, j + 1)] = diag;
    }
    m
}

/// `det M` in factored form, `ε³ · cubic(λ) · quadratic(λ)²`, with `|ξ|`.
pub fn factored_determinant(params: &LinearizationParams, lambda: Complex64, xi: f64) -> Complex64 {
    let e = params.epsilon;
    let q = horner(&params.quadratic(xi), lambda);
    e * e * e * horner(&params.cubic(xi), lambda) * q * q
}

/// Rotation reduction: the spectrum only depends on `|ξ|`.
pub fn reduce_wavevector(xi: [f64; 3]) -> f64 {
    xi.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub(crate) fn horner(coeffs: &[f64], z: Complex64) -> Complex64 {
    coeffs
        .iter()
        .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
}

fn horner_with_derivative(coeffs: &[f64], z: Complex64) -> (Complex64, Complex64) {
    let mut p = Complex64::new(0.0, 0.0);
    let mut dp = Complex64::new(0.0, 0.0);
    for &c in coeffs {
        dp = dp * z + p;
        p = p * z + c;
    }
    (p, dp)
}

/// `Σ |c_k| |z|^k`, the natural scale of a polynomial residual at `z`.
pub fn residual_scale(coeffs: &[f64], z: Complex64) -> f64 {
    let r = z.norm();
    coeffs.iter().fold(0.0, |acc, &c| acc * r + c.abs())
}

/// Relative residual `|p(z)| / Σ|c_k||z|^k`.
pub fn relative_residual(coeffs: &[f64], z: Complex64) -> f64 {
    let scale = residual_scale(coeffs, z);
    if scale == 0.0 {
        0.0
    } else {
        horner(coeffs, z).norm() / scale
    }
}

/// Roots of a monic real polynomial (highest power first) from the
/// eigenvalues of its companion matrix, Newton-polished.
pub fn polynomial_roots(coeffs: &[f64]) -> Vec<Complex64> {
    assert!(!coeffs.is_empty() && coeffs[0] != 0.0, "leading coefficient must be nonzero");
    let lead = coeffs[0];
    let mut monic: Vec<f64> = coeffs.iter().map(|c| c / lead).collect();
    let mut roots = Vec::with_capacity(monic.len() - 1);
    // Exact zero roots.
    while monic.len() > 1 && *monic.last().unwrap() == 0.0 {
        monic.pop();
        roots.push(Complex64::new(0.0, 0.0));
    }
    let n = monic.len() - 1;
    if n == 1 {
        roots.push(Complex64::new(-monic[1], 0.0));
    } else if n > 1 {
        let mut c = DMatrix::<f64>::zeros(n, n);
        for j in 0..n {
            c[(0, j)] = -monic[j + 1];
        }
        for j in 1..n {
            c[(j, j - 1)] = 1.0;
        }
        for z in c.complex_eigenvalues().iter() {
            roots.push(newton_polish(&monic, *z));
        }
    }
    sort_roots(&mut roots);
    roots
}

fn newton_polish(coeffs: &[f64], mut z: Complex64) -> Complex64 {
    let mut best = horner(coeffs, z).norm();
    for _ in 0..8 {
        let (p, dp) = horner_with_derivative(coeffs, z);
        if p.norm() == 0.0 || dp.norm() == 0.0 {
            break;
        }
        let cand = z - p / dp;
        let r = horner(coeffs, cand).norm();
        if !(r < best) {
            break;
        }
        z = cand;
        best = r;
    }
    // Real-coefficient polynomials: snap numerically real roots.
    if z.im.abs() <= 1e-14 * z.norm() {
        z.im = 0.0;
    }
    z
}

fn sort_roots(roots: &mut [Complex64]) {
    roots.sort_by(|a, b| {
        a.re.partial_cmp(&b.re)
            .unwrap()
            .then(a.im.partial_cmp(&b.im).unwrap())
    });
}

/// Closed-form roots of `λ² + κ̃λ + ξ²`.
pub fn quadratic_closed_form(kappa_tilde: f64, xi: f64) -> [Complex64; 2] {
    let disc = Complex64::new(kappa_tilde * kappa_tilde - 4.0 * xi * xi, 0.0).sqrt();
    let mut r = [
        (-kappa_tilde - disc) * 0.5,
        (-kappa_tilde + disc) * 0.5,
    ];
    sort_roots(&mut r);
    r
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DispersionSpectrum {
    pub xi: f64,
    pub cubic_roots: [Complex64; 3],
    pub quadratic_roots: [Complex64; 2],
    /// Largest real part over the nonzero roots.
    pub max_real_part: f64,
}

impl DispersionSpectrum {
    pub fn roots(&self) -> impl Iterator<Item = Complex64> + '_ {
        self.cubic_roots.iter().chain(self.quadratic_roots.iter()).copied()
    }
}

/// All five roots of the dispersion relation at wave number `ξ`.
pub fn dispersion_roots(params: &LinearizationParams, xi: f64) -> DispersionSpectrum {
    let c = polynomial_roots(&params.cubic(xi));
    let q = polynomial_roots(&params.quadratic(xi));
    let cubic_roots = [c[0], c[1], c[2]];
    let quadratic_roots = [q[0], q[1]];
    let max_real_part = cubic_roots
        .iter()
        .chain(quadratic_roots.iter())
        .filter(|z| z.norm() != 0.0)
        .map(|z| z.re)
        .fold(f64::NEG_INFINITY, f64::max);
    DispersionSpectrum {
        xi,
        cubic_roots,
        quadratic_roots,
        max_real_part,
    }
}

/// Largest real part over nonzero roots; negative for every admissible
/// parameter set.
pub fn verify_decay(params: &LinearizationParams, xi: f64) -> f64 {
    dispersion_roots(params, xi).max_real_part
}

/// Spectra for a list of wave numbers.
pub fn dispersion_sweep(exec: Execution, params: &LinearizationParams, xis: &[f64]) -> Vec<DispersionSpectrum> {
    exec::map_slice(exec, xis, |&xi| dispersion_roots(params, xi))
}

/// Unit-norm null vector of `M(λ, ξ)`.
pub fn mode_amplitude(params: &LinearizationParams, lambda: Complex64, xi: [f64; 3]) -> Result<Vector4<Complex64>> {
    let m = linearized_matrix(params, lambda, xi);
    let svd = m.svd(false, true);
    let v_t = svd.v_t.expect("requested V^T");
    let (imin, smin) = svd
        .singular_values
        .iter()
        .copied()
        .enumerate()
        .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
        .unwrap();
    let smax = svd.singular_values.max();
    if !(smin <= NULL_TOL * smax.max(1.0)) {
        return Err(Error::NullspaceEmpty { sigma_min: smin });
    }
    let row = v_t.row(imin);
    let psi = Vector4::new(row[0].conj(), row[1].conj(), row[2].conj(), row[3].conj());
    Ok(psi / Complex64::new(psi.norm(), 0.0))
}

/// How the sound-speed factor enters the real-part cubics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CertificateVariant {
    /// Derived from the dispersion relation: the constant terms carry `σ²`
    /// and `1 − σ²`.
    #[default]
    SigmaSquared,
    /// The printed form, with `σ` and `1 − σ`.
    SigmaLinear,
}

/// Real cubics satisfied by `a = Re λ` for roots `λ = a + ib` of the acoustic
/// cubic: one for `b = 0`, one for `b² = 3a² + 2κ̃a + ξ²`. Highest power first.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayCertificate {
    pub real_root_cubic: [f64; 4],
    pub complex_pair_cubic: [f64; 4],
}

impl DecayCertificate {
    /// All coefficients strictly positive, which forces every real root to
    /// be negative.
    pub fn all_positive(&self) -> bool {
        self.real_root_cubic
            .iter()
            .chain(self.complex_pair_cubic.iter())
            .all(|&c| c > 0.0)
    }
}

pub fn decay_certificate_coeffs(params: &LinearizationParams, xi: f64, variant: CertificateVariant) -> DecayCertificate {
    let kt = params.kappa_tilde();
    let xi2 = xi * xi;
    let sound = match variant {
        CertificateVariant::SigmaSquared => params.sigma * params.sigma,
        CertificateVariant::SigmaLinear => params.sigma,
    };
    DecayCertificate {
        real_root_cubic: [1.0, kt, xi2, sound * kt * xi2],
        complex_pair_cubic: [1.0, kt, 0.25 * (kt * kt + xi2), 0.125 * kt * xi2 * (1.0 - sound)],
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn zero_matrix_at_origin() {
        let p = LinearizationParams::new(1.3, 0.4, 0.2).unwrap();
        assert_eq!(linearized_matrix(&p, c(0.0, 0.0), [0.0; 3]), Matrix4::zeros());
    }

    #[test]
    fn axis_aligned_matrix_is_block_diagonal() {
        let p = LinearizationParams::new(1.3, 0.4, 0.2).unwrap();
        let m = linearized_matrix(&p, c(-0.3, 0.7), [2.0, 0.0, 0.0]);
        for (r, col) in [(0, 2), (0, 3), (1, 2), (1, 3), (2, 0), (2, 1), (3, 0), (3, 1), (2, 3), (3, 2)] {
            assert_eq!(m[(r, col)], c(0.0, 0.0), "entry ({r},{col})");
        }
        assert_eq!(m[(2, 2)], m[(3, 3)]);
    }

    #[test]
    fn wavevector_norm() {
        assert_eq!(reduce_wavevector([0.0; 3]), 0.0);
        assert_eq!(reduce_wavevector([3.0, 4.0, 0.0]), 5.0);
    }

    #[test]
    fn rotated_wavevector_has_same_spectrum() {
        let p = LinearizationParams::new(2.0, 0.5, 0.7).unwrap();
        let a = dispersion_roots(&p, reduce_wavevector([3.0, 4.0, 0.0]));
        let b = dispersion_roots(&p, 5.0);
        for (x, y) in a.roots().zip(b.roots()) {
            assert!((x - y).norm() < 1e-10);
        }
        // Null vectors exist for the general wave vector at the same λ.
        for z in a.roots() {
            let psi = mode_amplitude(&p, z, [3.0, 4.0, 0.0]).unwrap();
            let m = linearized_matrix(&p, z, [3.0, 4.0, 0.0]);
            assert!((m * psi).norm() < 1e-8 * m.norm());
        }
    }

    #[test]
    fn zero_wave_number_roots() {
        let p = LinearizationParams::from_reduced(3.0, 0.5).unwrap();
        let s = dispersion_roots(&p, 0.0);
        assert_eq!(s.cubic_roots, [c(-3.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
        assert_eq!(s.quadratic_roots, [c(-3.0, 0.0), c(0.0, 0.0)]);
        assert_eq!(verify_decay(&p, 0.0), -3.0);
    }

    #[test]
    fn critically_damped_shear_mode() {
        let p = LinearizationParams::from_reduced(2.0, 0.5).unwrap();
        let s = dispersion_roots(&p, 1.0);
        for z in s.quadratic_roots {
            assert!((z - c(-1.0, 0.0)).norm() < 1e-7, "{z}");
        }
    }

    #[test]
    fn underdamped_shear_mode() {
        let p = LinearizationParams::from_reduced(2.0, 0.5).unwrap();
        let s = dispersion_roots(&p, 10.0);
        let w = 99f64.sqrt();
        assert!((s.quadratic_roots[0] - c(-1.0, -w)).norm() < 1e-12);
        assert!((s.quadratic_roots[1] - c(-1.0, w)).norm() < 1e-12);
        assert!(s.max_real_part < 0.0);
    }

    #[test]
    fn acoustic_cubic_example() {
        // λ³ + λ² + λ + 0.25: reference roots from a 50-digit solve.
        let p = LinearizationParams::from_reduced(1.0, 0.5).unwrap();
        let s = dispersion_roots(&p, 1.0);
        let expected = [
            c(-0.319_448_459_735_676_31, 0.0),
            c(-0.340_275_770_132_161_84, -0.816_585_120_457_618_83),
            c(-0.340_275_770_132_161_84, 0.816_585_120_457_618_83),
        ];
        let mut got = s.cubic_roots.to_vec();
        got.sort_by(|a, b| a.im.partial_cmp(&b.im).unwrap());
        let mut want = expected.to_vec();
        want.sort_by(|a, b| a.im.partial_cmp(&b.im).unwrap());
        for (g, w) in got.iter().zip(want.iter()) {
            assert!((g - w).norm() < 1e-12, "{g} vs {w}");
        }
        for z in s.cubic_roots {
            assert!(z.re < 0.0);
            assert!(relative_residual(&p.cubic(1.0), z) < 1e-12);
        }
    }

    #[test]
    fn quadratic_matches_closed_form() {
        for (kt, xi) in [(0.3, 2.0), (5.0, 0.1), (2.0, 1.0), (40.0, 19.0)] {
            let p = LinearizationParams::from_reduced(kt, 0.3).unwrap();
            let s = dispersion_roots(&p, xi);
            let cf = quadratic_closed_form(kt, xi);
            for (a, b) in s.quadratic_roots.iter().zip(cf.iter()) {
                assert!((a - b).norm() < 1e-7 * (1.0 + b.norm()), "{a} {b}");
            }
        }
    }

    #[test]
    fn shear_and_acoustic_null_vectors() {
        let p = LinearizationParams::new(1.25, 0.5, 0.1).unwrap();
        let xi = 3.0;
        let s = dispersion_roots(&p, xi);
        for z in s.quadratic_roots {
            let psi = mode_amplitude(&p, z, [xi, 0.0, 0.0]).unwrap();
            assert!(psi[0].norm() < 1e-8 && psi[1].norm() < 1e-8, "{psi}");
            assert_relative_eq!(psi.norm(), 1.0, max_relative = 1e-12);
        }
        for z in s.cubic_roots {
            let psi = mode_amplitude(&p, z, [xi, 0.0, 0.0]).unwrap();
            assert!(psi[2].norm() < 1e-8 && psi[3].norm() < 1e-8, "{psi}");
            let m = linearized_matrix(&p, z, [xi, 0.0, 0.0]);
            assert!((m * psi).norm() <= 1e-8);
        }
    }

    #[test]
    fn non_root_has_no_null_vector() {
        let p = LinearizationParams::new(1.25, 0.5, 0.1).unwrap();
        let r = mode_amplitude(&p, c(0.3, 0.2), [1.0, 0.0, 0.0]);
        assert!(matches!(r, Err(Error::NullspaceEmpty { .. })));
    }

    #[test]
    fn certificate_is_positive() {
        let p = LinearizationParams::from_reduced(1.0, 0.5).unwrap();
        for v in [CertificateVariant::SigmaSquared, CertificateVariant::SigmaLinear] {
            let cert = decay_certificate_coeffs(&p, 1.0, v);
            assert!(cert.all_positive());
        }
        let near = LinearizationParams::from_reduced(1.0, 1.0 - 1e-12).unwrap();
        let last = decay_certificate_coeffs(&near, 1.0, CertificateVariant::SigmaSquared).complex_pair_cubic[3];
        assert!(last > 0.0 && last < 1e-11);
    }

    #[test]
    fn certificate_cubics_see_the_real_parts() {
        let p = LinearizationParams::from_reduced(1.0, 0.5).unwrap();
        let xi = 1.0;
        let cert = decay_certificate_coeffs(&p, xi, CertificateVariant::SigmaSquared);
        let s = dispersion_roots(&p, xi);
        let real = polynomial_roots(&cert.real_root_cubic);
        for z in s.cubic_roots.iter().filter(|z| z.im == 0.0) {
            assert!(z.re < 0.0);
            assert!(real.iter().any(|r| r.im == 0.0 && (r.re - z.re).abs() < 1e-10));
        }
        for z in s.cubic_roots.iter().filter(|z| z.im != 0.0) {
            let val = horner(&cert.complex_pair_cubic, c(z.re, 0.0)).norm();
            assert!(val < 1e-10, "{val}");
        }
    }

    proptest! {
        #[test]
        fn roots_satisfy_factors_and_vieta(kt in 0.1f64..100.0, sigma in 0.01f64..0.99, xi in 0.01f64..100.0) {
            let p = LinearizationParams::from_reduced(kt, sigma).unwrap();
            let s = dispersion_roots(&p, xi);
            for z in s.cubic_roots {
                prop_assert!(relative_residual(&p.cubic(xi), z) < 1e-8);
            }
            for z in s.quadratic_roots {
                prop_assert!(relative_residual(&p.quadratic(xi), z) < 1e-10);
            }
            let sum: Complex64 = s.cubic_roots.iter().sum();
            let prod: Complex64 = s.cubic_roots.iter().product();
            prop_assert!((sum + kt).norm() < 1e-8 * kt.max(1.0));
            let want = -kt * sigma * sigma * xi * xi;
            prop_assert!((prod - want).norm() < 1e-8 * want.abs().max(1.0));
            prop_assert!(s.max_real_part < 0.0);
        }

        #[test]
        fn spectrum_is_conjugate_closed(kt in 0.1f64..100.0, sigma in 0.01f64..0.99, xi in 0.01f64..100.0) {
            let p = LinearizationParams::from_reduced(kt, sigma).unwrap();
            let s = dispersion_roots(&p, xi);
            let roots: Vec<Complex64> = s.roots().collect();
            for z in &roots {
                let tol = 1e-8 * z.norm().max(1.0);
                prop_assert!(roots.iter().any(|w| (w - z.conj()).norm() < tol));
            }
        }

        #[test]
        fn determinant_factorization(
            kappa in 0.2f64..5.0, sigma in 0.05f64..0.95, eps in 0.05f64..2.0,
            re in -3.0f64..3.0, im in -3.0f64..3.0,
            x in -2.0f64..2.0, y in -2.0f64..2.0, z in -2.0f64..2.0,
        ) {
            let p = LinearizationParams::new(kappa, sigma, eps).unwrap();
            let lambda = c(re, im);
            let m = linearized_matrix(&p, lambda, [x, y, z]);
            let lu_det = m.lu().determinant();
            let fac = factored_determinant(&p, lambda, reduce_wavevector([x, y, z]));
            let scale: f64 = m.row_iter().map(|r| r.norm()).product();
            prop_assert!((lu_det - fac).norm() <= 1e-8 * scale.max(1e-300));
        }
    }
}
