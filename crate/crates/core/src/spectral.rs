//! Fourier collocation calculus on the unit circle.
//!
//! Everything here is diagonal in Fourier space: mode k carries wavenumber
//! 2πk, the Helmholtz operator A = I - d²/dx² has symbol 1 + 4π²k², and its
//! inverse is exact to roundoff. Quadratic products are kept alias-free by
//! the two-thirds rule (zero all modes |k| > N/3 before and after the
//! pointwise multiply).

use std::cell::RefCell;
use std::f64::consts::PI;

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::field::{GridField, Spectrum};

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn fft_forward(buf: &mut [Complex64]) {
    PLANNER.with(|p| p.borrow_mut().plan_fft_forward(buf.len()).process(buf));
}

fn fft_inverse(buf: &mut [Complex64]) {
    PLANNER.with(|p| p.borrow_mut().plan_fft_inverse(buf.len()).process(buf));
}

/// Forward transform with 1/N normalization: û(k) = (1/N) Σ u_j e^{-2πikj/N}.
pub fn transform(u: &GridField) -> Spectrum {
    let n = u.len();
    let mut buf: Vec<Complex64> = u.samples().iter().map(|&s| Complex64::new(s, 0.0)).collect();
    fft_forward(&mut buf);
    let inv_n = 1.0 / n as f64;
    for c in &mut buf {
        *c *= inv_n;
    }
    Spectrum { coeffs: buf }
}

/// Inverse transform; the imaginary residue of a conjugate-symmetric spectrum
/// is roundoff and is dropped.
pub fn inverse_transform(s: &Spectrum) -> GridField {
    let mut buf = s.coeffs.clone();
    fft_inverse(&mut buf);
    GridField::from_vec_unchecked(buf.iter().map(|c| c.re).collect())
}

/// Wavenumber index of FFT slot i on an N-point grid.
fn mode_of(i: usize, n: usize) -> i64 {
    if i < n / 2 {
        i as i64
    } else {
        i as i64 - n as i64
    }
}

fn apply_symbol(u: &GridField, sym: impl Fn(i64) -> Complex64) -> GridField {
    let n = u.len();
    let mut s = transform(u);
    for (i, c) in s.coeffs.iter_mut().enumerate() {
        *c *= sym(mode_of(i, n));
    }
    inverse_transform(&s)
}

impl GridField {
    /// Spectral derivative of the given order (1..=3). û(k) is multiplied by
    /// (2πik)^order; the sign-ambiguous Nyquist mode is zeroed for odd orders.
    pub fn derivative(&self, order: u32) -> GridField {
        assert!((1..=3).contains(&order), "derivative order must be 1..=3");
        let n = self.len();
        apply_symbol(self, |k| {
            if order % 2 == 1 && k == -(n as i64) / 2 {
                return Complex64::new(0.0, 0.0);
            }
            Complex64::new(0.0, 2.0 * PI * k as f64).powu(order)
        })
    }

    /// A u = u - u_xx, computed via the symbol 1 + 4π²k².
    pub fn helmholtz_apply(&self) -> GridField {
        apply_symbol(self, |k| {
            Complex64::new(1.0 + 4.0 * PI * PI * (k * k) as f64, 0.0)
        })
    }

    /// The unique periodic solution u of A u = m: divide by 1 + 4π²k².
    pub fn helmholtz_solve(&self) -> GridField {
        apply_symbol(self, |k| {
            Complex64::new(1.0 / (1.0 + 4.0 * PI * PI * (k * k) as f64), 0.0)
        })
    }

    /// ∫_{S¹} u dx. On the uniform periodic grid the trapezoid rule collapses
    /// to the sample mean and is exact for band-limited integrands.
    pub fn integrate(&self) -> f64 {
        self.samples().iter().sum::<f64>() / self.len() as f64
    }

    /// Two-thirds rule: zero every mode with |k| > N/3.
    pub fn dealias(&self) -> GridField {
        let cutoff = (self.len() / 3) as i64;
        apply_symbol(self, |k| {
            if k.abs() > cutoff {
                Complex64::new(0.0, 0.0)
            } else {
                Complex64::new(1.0, 0.0)
            }
        })
    }
}

/// Quadratic product with optional two-thirds dealiasing. With `dealias` set,
/// both factors are truncated to |k| <= N/3 before the pointwise multiply and
/// the product is truncated again, which equals the exact truncation of the
/// true product of the truncated factors.
pub fn product(a: &GridField, b: &GridField, dealias: bool) -> GridField {
    if dealias {
        a.dealias().mul(&b.dealias()).dealias()
    } else {
        a.mul(b)
    }
}

/// Ratio of the largest coefficient in the outer resolved band
/// (N/4 < |k| <= N/3) to the largest oscillatory coefficient overall. A
/// well-resolved analytic field keeps this at roundoff; it shoots up
/// superexponentially once the solution's spectral width hits the
/// dealiasing cutoff.
pub fn resolved_tail_ratio(u: &GridField) -> f64 {
    let s = transform(u);
    let n = u.len() as i64;
    let cutoff = n / 3;
    let inner_edge = n / 4;
    let mut peak: f64 = 0.0;
    let mut tail: f64 = 0.0;
    for (k, c) in s.modes() {
        let ka = k.abs();
        if ka == 0 || ka > cutoff {
            continue;
        }
        let mag = c.norm();
        peak = peak.max(mag);
        if ka > inner_edge {
            tail = tail.max(mag);
        }
    }
    if peak == 0.0 {
        0.0
    } else {
        tail / peak
    }
}

/// Trigonometric interpolant of a grid field, evaluated at arbitrary points.
///
/// u(x) = û(0) + 2 Re Σ_{k=1}^{N/2-1} û(k) z^k + û(-N/2) cos(πNx), z = e^{2πix}.
/// Exact on band-limited fields and reproduces the nodes of any field.
pub struct Interpolant {
    /// û(k) for k = 0..N/2-1.
    half: Vec<Complex64>,
    nyquist: f64,
    n: usize,
}

impl Interpolant {
    pub fn new(u: &GridField) -> Self {
        let n = u.len();
        let s = transform(u);
        Self {
            half: s.coeffs[..n / 2].to_vec(),
            nyquist: s.coeffs[n / 2].re,
            n,
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        debug_assert!(x.is_finite());
        let theta = 2.0 * PI * x;
        let z = Complex64::new(theta.cos(), theta.sin());
        // Horner over k = N/2-1 .. 1 builds z(c_1 + z(c_2 + ...)).
        let mut s = Complex64::new(0.0, 0.0);
        for &c in self.half[1..].iter().rev() {
            s = (s + c) * z;
        }
        self.half[0].re + 2.0 * s.re + self.nyquist * (PI * self.n as f64 * x).cos()
    }

    pub fn eval_many(&self, xs: &[f64]) -> Vec<f64> {
        xs.iter().map(|&x| self.eval(x)).collect()
    }
}

/// Trigonometric interpolation of `u` at arbitrary real targets (reduced mod 1
/// implicitly by periodicity of the interpolant).
pub fn interpolate(u: &GridField, targets: &[f64]) -> Result<Vec<f64>> {
    if let Some(t) = targets.iter().find(|t| !t.is_finite()) {
        return Err(Error::InvalidField(format!("non-finite target {t}")));
    }
    Ok(Interpolant::new(u).eval_many(targets))
}
