//! Real-valued 1-periodic grid functions and their Fourier coefficients.
//!
//! A `GridField` holds samples of a 1-periodic function on the uniform grid
//! x_j = j/N (circumference 1, so mode k has wavenumber 2πk). All solver
//! state — velocities u and v, momenta m, diffeomorphism displacements w —
//! lives in this type. Fields are validated at construction: N even and ≥ 8,
//! every sample finite. Operations therefore never see NaN/Inf inputs.

use rustfft::num_complex::Complex64;

use crate::error::{Error, Result};

/// Samples of a 1-periodic real function on the uniform N-point grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GridField {
    samples: Vec<f64>,
}

impl GridField {
    /// Smallest admissible grid (needed by dealiasing and second derivatives).
    pub const MIN_POINTS: usize = 8;

    pub fn new(samples: Vec<f64>) -> Result<Self> {
        let n = samples.len();
        if n < Self::MIN_POINTS || n % 2 != 0 {
            return Err(Error::InvalidField(format!(
                "grid size {n} must be even and >= {}",
                Self::MIN_POINTS
            )));
        }
        if let Some(j) = samples.iter().position(|s| !s.is_finite()) {
            return Err(Error::InvalidField(format!(
                "non-finite sample {} at node {j}",
                samples[j]
            )));
        }
        Ok(Self { samples })
    }

    /// Internal constructor for values produced by validated arithmetic.
    pub(crate) fn from_vec_unchecked(samples: Vec<f64>) -> Self {
        debug_assert!(samples.len() >= Self::MIN_POINTS && samples.len() % 2 == 0);
        Self { samples }
    }

    /// Sample `f` at the grid nodes x_j = j/N.
    pub fn from_fn(n: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new((0..n).map(|j| f(j as f64 / n as f64)).collect())
    }

    pub fn constant(n: usize, c: f64) -> Result<Self> {
        Self::new(vec![c; n])
    }

    pub fn zeros(n: usize) -> Result<Self> {
        Self::constant(n, 0.0)
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    /// Grid nodes x_j = j/N.
    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        let n = self.len() as f64;
        (0..self.len()).map(move |j| j as f64 / n)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self::from_vec_unchecked(self.samples.iter().map(|&s| f(s)).collect())
    }

    pub fn zip_map(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Self {
        assert_eq!(self.len(), other.len(), "grid size mismatch");
        Self::from_vec_unchecked(
            self.samples
                .iter()
                .zip(&other.samples)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        )
    }

    pub fn add(&self, other: &Self) -> Self {
        self.zip_map(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.zip_map(other, |a, b| a - b)
    }

    pub fn mul(&self, other: &Self) -> Self {
        self.zip_map(other, |a, b| a * b)
    }

    pub fn div(&self, other: &Self) -> Self {
        self.zip_map(other, |a, b| a / b)
    }

    pub fn scale(&self, c: f64) -> Self {
        self.map(|s| c * s)
    }

    /// self + c * other, the workhorse of the Runge-Kutta stages.
    pub fn axpy(&self, c: f64, other: &Self) -> Self {
        self.zip_map(other, |a, b| a + c * b)
    }

    pub fn shift(&self, c: f64) -> Self {
        self.map(|s| s + c)
    }

    pub fn sup_norm(&self) -> f64 {
        self.samples.iter().fold(0.0, |m, &s| m.max(s.abs()))
    }

    pub fn sup_distance(&self, other: &Self) -> f64 {
        self.sub(other).sup_norm()
    }

    pub fn min_value(&self) -> f64 {
        self.samples.iter().fold(f64::INFINITY, |m, &s| m.min(s))
    }

    pub fn max_value(&self) -> f64 {
        self.samples.iter().fold(f64::NEG_INFINITY, |m, &s| m.max(s))
    }

    pub fn is_finite(&self) -> bool {
        self.samples.iter().all(|s| s.is_finite())
    }
}

/// Complex Fourier coefficients û(k), k = -N/2 .. N/2-1, in FFT index order
/// (index i holds k = i for i < N/2 and k = i - N otherwise). For spectra of
/// real fields the conjugate symmetry û(-k) = conj(û(k)) holds to roundoff.
///
/// Normalization: û(k) = (1/N) Σ_j u_j e^{-2πikj/N}, so that
/// u(x) = Σ_k û(k) e^{2πikx} and the mean of u is û(0).
#[derive(Debug, Clone)]
pub struct Spectrum {
    pub(crate) coeffs: Vec<Complex64>,
}

impl Spectrum {
    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Coefficient of mode k, for k in -N/2 .. N/2-1.
    pub fn coeff(&self, k: i64) -> Complex64 {
        let n = self.coeffs.len() as i64;
        debug_assert!(k >= -n / 2 && k < n / 2, "mode {k} out of range");
        let i = k.rem_euclid(n) as usize;
        self.coeffs[i]
    }

    /// Iterate over (k, û(k)) pairs in FFT index order.
    pub fn modes(&self) -> impl Iterator<Item = (i64, Complex64)> + '_ {
        let n = self.coeffs.len() as i64;
        self.coeffs.iter().enumerate().map(move |(i, &c)| {
            let k = if (i as i64) < n / 2 { i as i64 } else { i as i64 - n };
            (k, c)
        })
    }

    /// Sum of squared coefficient magnitudes; by Parseval this equals the
    /// mean of u^2 over the circle.
    pub fn energy(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_odd_and_tiny_grids() {
        assert!(GridField::new(vec![0.0; 7]).is_err());
        assert!(GridField::new(vec![0.0; 9]).is_err());
        assert!(GridField::new(vec![0.0; 6]).is_err());
        assert!(GridField::new(vec![0.0; 8]).is_ok());
    }

    #[test]
    fn rejects_non_finite_samples() {
        let mut v = vec![0.0; 16];
        v[3] = f64::NAN;
        assert!(matches!(GridField::new(v), Err(Error::InvalidField(_))));
        let mut v = vec![0.0; 16];
        v[5] = f64::INFINITY;
        assert!(GridField::new(v).is_err());
    }

    #[test]
    fn spectrum_mode_lookup_matches_fft_layout() {
        let u = GridField::from_fn(16, |x| (2.0 * std::f64::consts::PI * x).cos()).unwrap();
        let s = crate::spectral::transform(&u);
        // cos(2πx) has û(±1) = 1/2.
        assert!((s.coeff(1).re - 0.5).abs() < 1e-14);
        assert!((s.coeff(-1).re - 0.5).abs() < 1e-14);
        assert!(s.coeff(3).norm() < 1e-14);
    }
}
