//! Orientation-preserving circle diffeomorphisms via lifts.
//!
//! A diffeomorphism φ of the circle is stored through a lift f = id + w with
//! 1-periodic displacement w, plus an integer translate (two lifts of the
//! same circle map differ by an integer, and the chart normalization keeps
//! w(0) in (-1/2, 1/2]). The slope φₓ = f' = 1 + w' is independent of the
//! choice of lift and must stay strictly positive; loss of positivity is the
//! wave-breaking signal and is reported, never masked.
//!
//! Sign convention note: the Lie bracket on vector fields of the circle used
//! by the geodesic formulation is [u, v] = uₓv - uvₓ (opposite to the usual
//! bracket of vector fields). The solvers only use the operators B and Q, so
//! the bracket never appears in code; recorded here for orientation.

use crate::error::{Error, Result};
use crate::field::GridField;
use crate::spectral::Interpolant;

/// Hard floor on the discrete slope; at or below this the map has left the
/// group ("monotonicity lost").
pub const MIN_SLOPE: f64 = 1e-6;

/// Tolerance (in y) for the monotone lift inversion.
const INVERT_TOL: f64 = 1e-13;
/// Iteration cap for the safeguarded Newton inversion.
const INVERT_MAX_ITER: usize = 100;

#[derive(Debug, Clone)]
pub struct Diffeo {
    /// Periodic part w of the lift f = id + w + offset.
    displacement: GridField,
    /// Integer lift translate; the projected circle map ignores it.
    offset: i64,
}

impl Diffeo {
    /// Build from a displacement field, validating the slope invariant.
    pub fn new(displacement: GridField, offset: i64) -> Result<Self> {
        let d = Self {
            displacement,
            offset,
        };
        d.slope()?;
        Ok(d)
    }

    /// Internal constructor for intermediate stage values whose slope is
    /// checked by the first operation that uses them.
    pub(crate) fn from_parts_unchecked(displacement: GridField, offset: i64) -> Self {
        Self {
            displacement,
            offset,
        }
    }

    pub fn identity(n: usize) -> Result<Self> {
        Ok(Self {
            displacement: GridField::zeros(n)?,
            offset: 0,
        })
    }

    /// The rigid rotation x ↦ x + c.
    pub fn rotation(n: usize, c: f64) -> Result<Self> {
        Ok(Self {
            displacement: GridField::constant(n, c)?,
            offset: 0,
        })
    }

    pub fn displacement(&self) -> &GridField {
        &self.displacement
    }

    pub fn offset(&self) -> i64 {
        self.offset
    }

    pub fn len(&self) -> usize {
        self.displacement.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Lift values f(x_j) = x_j + w(x_j) + offset at the grid nodes.
    pub fn lift_values(&self) -> Vec<f64> {
        let n = self.len() as f64;
        self.displacement
            .samples()
            .iter()
            .enumerate()
            .map(|(j, &w)| j as f64 / n + w + self.offset as f64)
            .collect()
    }

    /// φₓ = 1 + w', strictly positive on the group; errs with
    /// monotonicity-lost once the minimum dips to `MIN_SLOPE` or below.
    pub fn slope(&self) -> Result<GridField> {
        let s = self.displacement.derivative(1).shift(1.0);
        let min = s.min_value();
        if min <= MIN_SLOPE {
            return Err(Error::MonotonicityLost {
                min_slope: min,
                threshold: MIN_SLOPE,
            });
        }
        Ok(s)
    }

    /// Minimum of the discrete slope without the group-membership check;
    /// used by run-level guards that apply their own threshold.
    pub fn min_slope_value(&self) -> f64 {
        self.displacement.derivative(1).shift(1.0).min_value()
    }

    /// Lift of f_self ∘ f_other: the displacement of the composition is
    /// w_other(x) + w_self(x + w_other(x)), interpolated trigonometrically.
    pub fn compose(&self, other: &Diffeo) -> Result<Diffeo> {
        assert_eq!(self.len(), other.len(), "grid size mismatch");
        let interp = Interpolant::new(&self.displacement);
        let w = GridField::new(
            other
                .displacement
                .samples()
                .iter()
                .enumerate()
                .map(|(j, &wo)| {
                    let x = j as f64 / other.len() as f64;
                    wo + interp.eval(x + wo)
                })
                .collect(),
        )?;
        Diffeo::new(w, self.offset + other.offset)
    }

    /// Inverse diffeomorphism: per grid node, solve f(y) = x_j on the
    /// monotone lift by safeguarded Newton (bisection fallback), starting
    /// from x_j - w(x_j).
    pub fn invert(&self) -> Result<Diffeo> {
        self.slope()?;
        let n = self.len();
        let w = &self.displacement;
        let interp_w = Interpolant::new(w);
        let interp_wx = Interpolant::new(&w.derivative(1));
        let (wmin, wmax) = (w.min_value(), w.max_value());

        let mut inv_disp = Vec::with_capacity(n);
        for j in 0..n {
            let x = j as f64 / n as f64;
            let y = invert_at(&interp_w, &interp_wx, x, wmin, wmax)?;
            inv_disp.push(y - x);
        }
        Diffeo::new(GridField::new(inv_disp)?, -self.offset)
    }

    /// Conjugated derivatives a_k = (u ∘ φ⁻¹)^{(k)} ∘ φ for k = 1..=r,
    /// computed without inverting φ through the recursion
    /// a_1 = u_x/φₓ, a_{k+1} = (a_k)_x/φₓ.
    pub fn conjugated_derivatives(&self, u: &GridField, r: u32) -> Result<Vec<GridField>> {
        assert!((1..=3).contains(&r), "recursion depth must be 1..=3");
        let slope = self.slope()?;
        let mut out = Vec::with_capacity(r as usize);
        let mut a = u.derivative(1).div(&slope);
        out.push(a.clone());
        for _ in 1..r {
            a = a.derivative(1).div(&slope);
            out.push(a.clone());
        }
        Ok(out)
    }

    /// Shift the integer offset so that w(0) lands in (-1/2, 1/2]; the
    /// projected circle map is unchanged.
    pub fn chart_normalize(&self) -> Diffeo {
        let w0 = self.displacement.samples()[0];
        let k = (w0 - 0.5).ceil();
        if k == 0.0 {
            return self.clone();
        }
        Diffeo {
            displacement: self.displacement.shift(-k),
            offset: self.offset + k as i64,
        }
    }
}

/// Solve y + w(y) = x by safeguarded Newton on the strictly increasing lift.
fn invert_at(
    interp_w: &Interpolant,
    interp_wx: &Interpolant,
    x: f64,
    wmin: f64,
    wmax: f64,
) -> Result<f64> {
    // h(y) = y + w(y) is increasing; the sample extremes bracket the root up
    // to interpolant overshoot between nodes, so widen until the sign change
    // is certain.
    let mut lo = x - wmax - 1e-12;
    let mut hi = x - wmin + 1e-12;
    let mut pad = 1e-9;
    while lo + interp_w.eval(lo) - x > 0.0 {
        lo -= pad;
        pad *= 4.0;
    }
    pad = 1e-9;
    while hi + interp_w.eval(hi) - x < 0.0 {
        hi += pad;
        pad *= 4.0;
    }

    let mut y = (x - interp_w.eval(x)).clamp(lo, hi);
    for _ in 0..INVERT_MAX_ITER {
        let r = y + interp_w.eval(y) - x;
        if r > 0.0 {
            hi = y;
        } else {
            lo = y;
        }
        if r.abs() <= 1e-14 * (1.0 + x.abs()) {
            return Ok(y);
        }
        let d = 1.0 + interp_wx.eval(y);
        let mut next = if d > MIN_SLOPE { y - r / d } else { f64::NAN };
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if (next - y).abs() < INVERT_TOL {
            return Ok(next);
        }
        y = next;
    }
    Err(Error::NoConvergence {
        iterations: INVERT_MAX_ITER,
        residual: (y + interp_w.eval(y) - x).abs(),
    })
}
