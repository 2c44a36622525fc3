//! Heat-kernel Green function, the momentum law of moving packets and the
//! kernel-splitting identity that links the two packet families.

use std::f64::consts::{PI, SQRT_2};

use num_complex::Complex64;

use crate::error::{require_positive, Result};
use crate::params::WidthSplit;
use crate::quadrature::ProductRule;
use crate::vec3::Vec3;

/// Green function of the imaginary-time free diffusion,
/// `(2 sqrt 2 / lambda^3) exp(-2 pi |dr|^2 / lambda^2)`.
pub fn gaussian_kernel(dr: Vec3, lambda: f64) -> Result<f64> {
    require_positive("lambda", lambda)?;
    Ok(2.0 * SQRT_2 / lambda.powi(3) * (-2.0 * PI * dr.norm_sqr() / (lambda * lambda)).exp())
}

/// Isotropic Gaussian momentum density with width parameter `lambda_m`.
pub fn momentum_pdf(p: Vec3, lambda_m: f64, hbar: f64) -> Result<f64> {
    require_positive("lambda_m", lambda_m)?;
    require_positive("hbar", hbar)?;
    let scale = lambda_m / (2.0 * PI * hbar);
    Ok(scale.powi(3) * (-lambda_m * lambda_m * p.norm_sqr() / (4.0 * PI * hbar * hbar)).exp())
}

/// One Cartesian factor of [`momentum_pdf`], written in wave numbers `k = p / hbar`.
pub(crate) fn wavenumber_pdf_1d(k: f64, lambda_m: f64) -> f64 {
    lambda_m / (2.0 * PI) * (-lambda_m * lambda_m * k * k / (4.0 * PI)).exp()
}

/// Closed form of `int d^3r phi_{r,lambda}(r') phi*_{r,lambda}(r'')` over all space.
pub fn kernel_pair_integral(rprime: Vec3, rdoubleprime: Vec3, lambda: f64) -> Result<f64> {
    require_positive("lambda", lambda)?;
    Ok((-PI * (rprime - rdoubleprime).norm_sqr() / (lambda * lambda)).exp())
}

/// Full width at half maximum of the probability density of a packet of width `lambda_s`.
pub fn packet_fwhm(lambda_s: f64) -> f64 {
    lambda_s * (std::f64::consts::LN_2 / PI).sqrt()
}

/// Outcome of a numerical check of the kernel-splitting identity.
#[derive(Debug, Clone, Copy)]
pub struct SplitIdentityCheck {
    /// Quadrature of the moving-packet representation.
    pub quadrature: f64,
    /// `exp(-pi |r' - r''|^2 / lambda^2)`.
    pub closed_form: f64,
    pub abs_deviation: f64,
}

impl SplitIdentityCheck {
    pub fn rel_deviation(&self) -> f64 {
        self.abs_deviation / self.closed_form.abs()
    }
}

/// Evaluates `int dr int dp f(p) phi_{rp,ls}(r') phi*_{rp,ls}(r'')` by quadrature
/// and compares with [`kernel_pair_integral`].
///
/// The integrand factorises over Cartesian axes, so the six-dimensional
/// integral is computed as the product of three two-dimensional ones
/// (one dimensional when the split is degenerate).
pub fn split_identity_check(rprime: Vec3, rdoubleprime: Vec3, split: &WidthSplit) -> Result<SplitIdentityCheck> {
    let lambda = split.lambda();
    let ls = split.lambda_s();
    let closed_form = kernel_pair_integral(rprime, rdoubleprime, lambda)?;
    let half = 6.0 * lambda.max(ls);
    let rule = ProductRule::default().with_tolerance(1e-13, 1e-16);

    let mut product = Complex64::new(1.0, 0.0);
    for (a, b) in rprime.to_array().into_iter().zip(rdoubleprime.to_array()) {
        let mid = 0.5 * (a + b);
        let factor = match split.lambda_m() {
            None => {
                rule.integrate(
                    |[x]: [f64; 1]| packet_factor(a, x, 0.0, ls) * packet_factor(b, x, 0.0, ls).conj(),
                    [(mid - half, mid + half)],
                )?
                .value
            }
            Some(lm) => {
                let kmax = 12.0 * PI / lm;
                rule.integrate(
                    |[x, k]: [f64; 2]| {
                        packet_factor(a, x, k, ls) * packet_factor(b, x, k, ls).conj() * wavenumber_pdf_1d(k, lm)
                    },
                    [(mid - half, mid + half), (-kmax, kmax)],
                )?
                .value
            }
        };
        product *= factor;
    }
    let quadrature = product.re;
    Ok(SplitIdentityCheck {
        quadrature,
        closed_form,
        abs_deviation: (quadrature - closed_form).abs().max(product.im.abs()),
    })
}

/// One Cartesian factor of a moving packet centred at `center` with wave number `k`.
pub(crate) fn packet_factor(y: f64, center: f64, k: f64, lambda_s: f64) -> Complex64 {
    let d = y - center;
    let amp = (2.0 / lambda_s).sqrt() * (-2.0 * PI * d * d / (lambda_s * lambda_s)).exp();
    Complex64::from_polar(amp, k * d)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kernel_at_origin_and_at_one_wavelength() {
        let l = 0.8;
        let g0 = gaussian_kernel(Vec3::ZERO, l).unwrap();
        assert!((g0 - 2.0 * SQRT_2 / l.powi(3)).abs() < 1e-14 * g0);
        let g1 = gaussian_kernel(Vec3::new(0.0, l, 0.0), l).unwrap();
        assert!((g1 - g0 * (-2.0 * PI).exp()).abs() < 1e-14 * g0);
        assert!(gaussian_kernel(Vec3::ZERO, 0.0).is_err());
    }

    #[test]
    fn kernel_is_a_normalised_delta_family() {
        for lambda in [1e-3, 0.1, 1.0, 25.0] {
            let h = 6.0 * lambda;
            let est = ProductRule::default()
                .integrate(|p: [f64; 3]| gaussian_kernel(Vec3::from_array(p), lambda).unwrap(), [(-h, h); 3])
                .unwrap();
            assert!((est.value - 1.0).abs() < 1e-12, "lambda={lambda}: {}", est.value);
        }
    }

    #[test]
    fn momentum_pdf_values() {
        let lm = 1.7;
        let f0 = momentum_pdf(Vec3::ZERO, lm, 1.0).unwrap();
        assert!((f0 - (lm / (2.0 * PI)).powi(3)).abs() < 1e-15);
        assert!(momentum_pdf(Vec3::ZERO, -1.0, 1.0).is_err());
        let p = Vec3::new(0.3, -0.2, 1.1);
        let prod: f64 = p.to_array().iter().map(|&k| wavenumber_pdf_1d(k, lm)).product();
        assert!((prod - momentum_pdf(p, lm, 1.0).unwrap()).abs() < 1e-15);
    }

    #[test]
    fn momentum_pdf_normalisation_and_energy() {
        // (3/2) k_B T_m with hbar = m = k_B = 1 and lambda_m^2 = 2 pi beta_m.
        let lm = 1.3;
        let hbar = 1.0;
        let pmax = 12.0 * PI * hbar / lm;
        let rule = ProductRule::default();
        let norm = rule
            .integrate(|p: [f64; 3]| momentum_pdf(Vec3::from_array(p), lm, hbar).unwrap(), [(-pmax, pmax); 3])
            .unwrap();
        assert!((norm.value - 1.0).abs() < 1e-12);
        let energy = rule
            .integrate(
                |p: [f64; 3]| {
                    let v = Vec3::from_array(p);
                    0.5 * v.norm_sqr() * momentum_pdf(v, lm, hbar).unwrap()
                },
                [(-pmax, pmax); 3],
            )
            .unwrap();
        let t_m = 1.0 / (lm * lm / (2.0 * PI));
        assert!((energy.value - 1.5 * t_m).abs() < 1e-11);
    }

    #[test]
    fn pair_integral_closed_form() {
        let l = 1.4;
        let a = Vec3::new(0.1, 0.2, 0.3);
        assert_eq!(kernel_pair_integral(a, a, l).unwrap(), 1.0);
        let b = a + Vec3::new(0.0, 0.0, l);
        assert!((kernel_pair_integral(a, b, l).unwrap() - (-PI).exp()).abs() < 1e-15);
    }

    #[test]
    fn pair_integral_matches_three_dimensional_quadrature() {
        let l = 1.0;
        let a = Vec3::new(0.2, -0.1, 0.05);
        let dir = Vec3::new(1.0, 2.0, -2.0) * (1.0 / 3.0);
        let b = a + dir * (0.7 * l);
        let amp = |r: Vec3, y: Vec3| 2.0 * SQRT_2 / l.powf(1.5) * (-2.0 * PI * (y - r).norm_sqr() / (l * l)).exp();
        let mid = (a + b) * 0.5;
        let h = 6.0 * l;
        let est = ProductRule::default()
            .integrate(
                |p: [f64; 3]| {
                    let r = Vec3::from_array(p);
                    amp(r, a) * amp(r, b)
                },
                [(mid.x - h, mid.x + h), (mid.y - h, mid.y + h), (mid.z - h, mid.z + h)],
            )
            .unwrap();
        let exact = kernel_pair_integral(a, b, l).unwrap();
        assert!(((est.value - exact) / exact).abs() < 1e-8);
    }

    #[test]
    fn split_identity_degenerate_and_symmetric() {
        let a = Vec3::new(0.3, -0.4, 0.0);
        let b = Vec3::new(-0.2, 0.1, 0.5);
        let c = split_identity_check(a, b, &WidthSplit::new(1.0, 1.0).unwrap()).unwrap();
        assert!(c.rel_deviation() < 1e-10, "{c:?}");
        let b = a + Vec3::new(0.6, 0.0, 0.8);
        let c = split_identity_check(a, b, &WidthSplit::new(1.0, 0.5).unwrap()).unwrap();
        assert!(c.abs_deviation < 1e-6, "{c:?}");
    }

    #[test]
    fn split_identity_far_apart() {
        let a = Vec3::ZERO;
        let b = Vec3::new(3.0, 0.0, 0.0);
        let c = split_identity_check(a, b, &WidthSplit::new(1.0, 0.5).unwrap()).unwrap();
        assert!(c.closed_form < (-9.0 * PI).exp() * 1.0000001);
        assert!(c.quadrature.abs() < (-9.0 * PI).exp() * 1.001);
        assert!(c.abs_deviation < 1e-10);
    }

    #[test]
    fn fwhm_of_probability_density() {
        let ls = 0.9;
        let half = 0.5 * packet_fwhm(ls);
        // |phi|^2 ~ exp(-4 pi x^2 / ls^2)
        let ratio = (-4.0 * PI * half * half / (ls * ls)).exp();
        assert!((ratio - 0.5).abs() < 1e-14);
    }
}
