//! Executable forms of the structural identities of the b-family flow.
//!
//! * conservation law: (m(t) ∘ φ(t)) φₓᵇ(t) = m(0) along geodesics;
//! * regularity identity: φₓₓ(t) = φₓ(t)[∫₀ᵗ v φₓ ds - m₀ ∫₀ᵗ φₓ^{1-b} ds],
//!   the pointwise relation behind "no gain, no loss" of spatial regularity;
//! * H¹ energy ∫(u² + uₓ²) dx, conserved exactly when b = 2 and only then;
//! * mean of u, conserved for every b;
//! * fitted log-spectrum decay slope as a proxy for preserved regularity.

use crate::config::BParam;
use crate::diffeo::Diffeo;
use crate::error::{Error, Result};
use crate::euler::momentum;
use crate::field::GridField;
use crate::geodesic::GeodesicState;
use crate::spectral::{transform, Interpolant};

/// Fit band lower edge for the decay slope (modes |k| in [4, N/3]).
const DECAY_FIT_MIN_MODE: i64 = 4;
/// Coefficients at or below this are roundoff junk and excluded from the fit.
const DECAY_FLOOR: f64 = 1e-14;
/// Minimum number of usable modes for a meaningful fit.
const DECAY_MIN_MODES: usize = 8;

/// Per-sample row of conserved and monitored quantities. Lagrangian-only
/// entries (and a decay slope without enough modes above the floor) are None
/// and serialize as `nan`.
#[derive(Debug, Clone)]
pub struct DiagnosticsRecord {
    pub t: f64,
    /// sup |(m ∘ φ) φₓᵇ - m₀| (geodesic runs only).
    pub cons_res: Option<f64>,
    pub h1: f64,
    pub mean_u: f64,
    /// min φₓ (geodesic runs only).
    pub min_slope: Option<f64>,
    /// Fitted slope of log|û(k)| over the resolved band.
    pub decay_slope: Option<f64>,
    /// sup-norm residual of the integrated regularity identity.
    pub reg1_res: Option<f64>,
}

impl DiagnosticsRecord {
    pub const CSV_HEADER: &'static str = "t,cons_res,h1,mean_u,min_slope,decay_slope,reg1_res";

    pub fn eulerian(u: &GridField, t: f64) -> Self {
        Self {
            t,
            cons_res: None,
            h1: h1_energy(u),
            mean_u: u.integrate(),
            min_slope: None,
            decay_slope: spectral_decay_slope(u).ok(),
            reg1_res: None,
        }
    }

    pub fn lagrangian(
        state: &GeodesicState,
        m0: &GridField,
        b: BParam,
        reg: &RegularityAccumulator,
    ) -> Result<Self> {
        let u = state.eulerian_velocity()?;
        Ok(Self {
            t: state.t,
            cons_res: Some(conservation_residual_of(&u, &state.phi, m0, b)?),
            h1: h1_energy(&u),
            mean_u: u.integrate(),
            min_slope: Some(state.phi.min_slope_value()),
            decay_slope: spectral_decay_slope(&u).ok(),
            reg1_res: Some(reg.residual(&state.phi)?),
        })
    }

    pub fn to_csv_row(&self, fmt: impl Fn(f64) -> String) -> String {
        let opt = |v: Option<f64>| v.map_or_else(|| "nan".to_string(), &fmt);
        format!(
            "{},{},{},{},{},{},{}",
            fmt(self.t),
            opt(self.cons_res),
            fmt(self.h1),
            fmt(self.mean_u),
            opt(self.min_slope),
            opt(self.decay_slope),
            opt(self.reg1_res),
        )
    }
}

/// sup over the grid of |(m ∘ φ) φₓᵇ - m₀| with u = v ∘ φ⁻¹ and m = Au.
pub fn conservation_residual(
    state: &GeodesicState,
    m0: &GridField,
    b: BParam,
) -> Result<f64> {
    let u = state.eulerian_velocity()?;
    conservation_residual_of(&u, &state.phi, m0, b)
}

fn conservation_residual_of(
    u: &GridField,
    phi: &Diffeo,
    m0: &GridField,
    b: BParam,
) -> Result<f64> {
    // The reconstruction v ∘ φ⁻¹ carries incidental coefficients above the
    // two-thirds cutoff that the dealiased dynamics never evolves; A would
    // amplify them by 1 + 4π²k² and bury the invariant under junk. Compare
    // on the resolved band only.
    let m = momentum(&u.dealias());
    let m0 = m0.dealias();
    if phi.displacement().sup_norm() == 0.0 {
        return Ok(m.sup_distance(&m0));
    }
    let im = Interpolant::new(&m);
    let slope = phi.slope()?;
    let mut worst: f64 = 0.0;
    for ((&f, &s), &m0j) in phi
        .lift_values()
        .iter()
        .zip(slope.samples())
        .zip(m0.samples())
    {
        worst = worst.max((im.eval(f) * s.powf(b.0) - m0j).abs());
    }
    Ok(worst)
}

/// Trapezoid-in-time accumulators for the integrated regularity identity.
/// Updated once per time step; the quadrature error is O(dt²).
#[derive(Debug, Clone)]
pub struct RegularityAccumulator {
    m0: GridField,
    exponent: f64,
    i1: GridField,
    i2: GridField,
    g1_prev: GridField,
    g2_prev: GridField,
}

impl RegularityAccumulator {
    pub fn new(phi0: &Diffeo, v0: &GridField, m0: &GridField, b: BParam) -> Result<Self> {
        let slope = phi0.slope()?;
        let exponent = 1.0 - b.0;
        Ok(Self {
            m0: m0.clone(),
            exponent,
            i1: GridField::zeros(v0.len())?,
            i2: GridField::zeros(v0.len())?,
            g1_prev: v0.mul(&slope),
            g2_prev: slope.map(|s| s.powf(exponent)),
        })
    }

    pub fn update(&mut self, phi: &Diffeo, v: &GridField, dt: f64) -> Result<()> {
        let slope = phi.slope()?;
        let g1 = v.mul(&slope);
        let g2 = slope.map(|s| s.powf(self.exponent));
        self.i1 = self.i1.add(&self.g1_prev.add(&g1).scale(0.5 * dt));
        self.i2 = self.i2.add(&self.g2_prev.add(&g2).scale(0.5 * dt));
        self.g1_prev = g1;
        self.g2_prev = g2;
        Ok(())
    }

    /// sup |φₓₓ - φₓ (I₁ - m₀ I₂)| at the current accumulator time.
    pub fn residual(&self, phi: &Diffeo) -> Result<f64> {
        let wxx = phi.displacement().derivative(2);
        let slope = phi.slope()?;
        let target = slope.mul(&self.i1.sub(&self.m0.mul(&self.i2)));
        Ok(wxx.sup_distance(&target))
    }
}

/// H¹ energy ∫(u² + uₓ²) dx = ∫ u·Au dx.
pub fn h1_energy(u: &GridField) -> f64 {
    u.mul(&u.helmholtz_apply()).integrate()
}

/// Least-squares slope of log|û(k)| against k over modes 4..N/3 that sit
/// above the roundoff floor. Along a smooth trajectory the slope tracks the
/// (unchanging) analyticity width of the solution.
pub fn spectral_decay_slope(u: &GridField) -> Result<f64> {
    let s = transform(u);
    let kmax = (u.len() / 3) as i64;
    let pts: Vec<(f64, f64)> = (DECAY_FIT_MIN_MODE..=kmax)
        .filter_map(|k| {
            let mag = s.coeff(k).norm();
            (mag > DECAY_FLOOR).then(|| (k as f64, mag.ln()))
        })
        .collect();
    if pts.len() < DECAY_MIN_MODES {
        return Err(Error::DegenerateSpectrum { modes: pts.len() });
    }
    let n = pts.len() as f64;
    let (sx, sy): (f64, f64) = pts.iter().fold((0.0, 0.0), |(a, b), &(x, y)| (a + x, b + y));
    let (sxx, sxy): (f64, f64) = pts
        .iter()
        .fold((0.0, 0.0), |(a, b), &(x, y)| (a + x * x, b + x * y));
    Ok((n * sxy - sx * sy) / (n * sxx - sx * sx))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{PStrategy, SolverConfig};
    use crate::geodesic::integrate_geodesic;
    use std::f64::consts::PI;

    const TAU: f64 = 2.0 * PI;
    const DP: BParam = BParam::DEGASPERIS_PROCESI;

    #[test]
    fn conservation_residual_is_zero_at_start() {
        let n = 64;
        let u0 = GridField::from_fn(n, |x| 0.2 * (TAU * x).sin()).unwrap();
        let state = GeodesicState {
            phi: Diffeo::identity(n).unwrap(),
            v: u0.clone(),
            t: 0.0,
        };
        let res = conservation_residual(&state, &momentum(&u0), DP).unwrap();
        assert!(res < 1e-12, "t=0 residual {res}");
    }

    #[test]
    fn conservation_residual_vanishes_for_constant_data() {
        let cfg = SolverConfig {
            n: 64,
            dt: 1e-2,
            t_end: 0.5,
            ..SolverConfig::default()
        };
        let u0 = GridField::constant(64, 0.5).unwrap();
        let traj = integrate_geodesic(&u0, &cfg).unwrap();
        for d in &traj.diagnostics {
            assert!(d.cons_res.unwrap() < 1e-12);
        }
    }

    #[test]
    fn conservation_residual_stays_small_on_a_smooth_run() {
        let cfg = SolverConfig {
            n: 128,
            dt: 1e-3,
            t_end: 0.25,
            b: DP,
            strategy: PStrategy::InverseComposition,
            ..SolverConfig::default()
        };
        let u0 = cfg.initial_field().unwrap();
        let traj = integrate_geodesic(&u0, &cfg).unwrap();
        for d in &traj.diagnostics {
            assert!(d.cons_res.unwrap() <= 1e-6, "t = {}: {}", d.t, d.cons_res.unwrap());
        }
    }

    #[test]
    fn regularity_residual_trivial_cases() {
        // Constant data: φₓₓ ≡ 0 and vφₓ - m₀φₓ^{1-b} = c - c = 0.
        let cfg = SolverConfig {
            n: 64,
            dt: 1e-2,
            t_end: 0.5,
            ..SolverConfig::default()
        };
        let u0 = GridField::constant(64, 0.5).unwrap();
        let traj = integrate_geodesic(&u0, &cfg).unwrap();
        for d in &traj.diagnostics {
            assert!(d.reg1_res.unwrap() < 1e-12);
        }
    }

    #[test]
    fn regularity_residual_is_second_order_in_dt() {
        let run = |dt: f64| {
            let cfg = SolverConfig {
                n: 128,
                dt,
                t_end: 0.25,
                b: DP,
                sample_every: usize::MAX - 1,
                ..SolverConfig::default()
            };
            let u0 = cfg.initial_field().unwrap();
            let traj = integrate_geodesic(&u0, &cfg).unwrap();
            traj.diagnostics.last().unwrap().reg1_res.unwrap()
        };
        let r1 = run(2e-3);
        let r2 = run(1e-3);
        let ratio = r1 / r2;
        assert!(r2 <= 1e-5, "residual too large: {r2}");
        assert!(
            ratio > 3.0 && ratio < 5.5,
            "expected ~4x reduction, got {ratio}"
        );
    }

    #[test]
    fn h1_energy_examples() {
        let c = GridField::constant(64, 1.5).unwrap();
        assert!((h1_energy(&c) - 2.25).abs() < 1e-13);

        // Oracle: ∫sin² = 1/2, ∫(2π cos)² = 2π² -> (1 + 4π²)/2; confirmed by
        // direct quadrature of the closed form on a fine grid.
        let s = GridField::from_fn(256, |x| (TAU * x).sin()).unwrap();
        let quadrature: f64 = (0..4096)
            .map(|j| {
                let x = j as f64 / 4096.0;
                let u = (TAU * x).sin();
                let ux = TAU * (TAU * x).cos();
                (u * u + ux * ux) / 4096.0
            })
            .sum();
        let expect = (1.0 + 4.0 * PI * PI) / 2.0;
        assert!((quadrature - expect).abs() < 1e-10);
        assert!((h1_energy(&s) - expect).abs() < 1e-12);

        let z = GridField::zeros(64).unwrap();
        assert!(h1_energy(&z).abs() < 1e-15);
    }

    #[test]
    fn h1_energy_two_forms_agree() {
        let mut sampler = crate::sampling::FieldSampler::new(101);
        let u = sampler.band_limited(128, 20, 1.0);
        let direct = {
            let ux = u.derivative(1);
            u.mul(&u).add(&ux.mul(&ux)).integrate()
        };
        assert!((h1_energy(&u) - direct).abs() <= 1e-12 * direct.max(1.0));
    }

    #[test]
    fn decay_slope_is_strongly_negative_for_analytic_data() {
        let u = GridField::from_fn(256, |x| (TAU * x).sin().exp()).unwrap();
        let u = u.shift(-u.integrate());
        let slope = spectral_decay_slope(&u).unwrap();
        assert!(slope < -1.0, "analytic field should decay fast, slope {slope}");

        // Oracle: fit the same least-squares line on coefficients obtained by
        // direct quadrature of the Fourier integrals.
        let mut pts = Vec::new();
        for k in 4..=(256 / 3) {
            let (mut re, mut im) = (0.0, 0.0);
            let m = 8192;
            for j in 0..m {
                let x = j as f64 / m as f64;
                let f = (TAU * x).sin().exp();
                re += f * (TAU * k as f64 * x).cos() / m as f64;
                im -= f * (TAU * k as f64 * x).sin() / m as f64;
            }
            let mag = (re * re + im * im).sqrt();
            if mag > 1e-14 {
                pts.push((k as f64, mag.ln()));
            }
        }
        let n = pts.len() as f64;
        let sx: f64 = pts.iter().map(|p| p.0).sum();
        let sy: f64 = pts.iter().map(|p| p.1).sum();
        let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
        let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
        let oracle = (n * sxy - sx * sy) / (n * sxx - sx * sx);
        assert!(
            (slope - oracle).abs() < 0.05 * oracle.abs(),
            "slope {slope} vs quadrature oracle {oracle}"
        );
    }

    #[test]
    fn decay_slope_rejects_single_mode_fields() {
        let u = GridField::from_fn(64, |x| (TAU * x).cos()).unwrap();
        assert!(matches!(
            spectral_decay_slope(&u),
            Err(Error::DegenerateSpectrum { .. })
        ));
    }

    #[test]
    fn decay_slope_stays_in_band_along_smooth_runs() {
        // Datum with an exactly exponential spectrum (Poisson kernel,
        // |û(k)| = amp·r^k), so the fitted slope is insensitive to how many
        // modes sit above the floor; horizon well short of breaking.
        let cfg = SolverConfig {
            n: 128,
            dt: 1e-3,
            t_end: 0.5,
            b: DP,
            ..SolverConfig::default()
        };
        let r: f64 = 0.45;
        let u0 = GridField::from_fn(128, |x| {
            let th = TAU * x;
            0.03 * ((1.0 - r * r) / (1.0 - 2.0 * r * th.cos() + r * r) - 1.0)
        })
        .unwrap()
        .dealias();
        let traj = crate::euler::integrate_eulerian(&u0, &cfg).unwrap();
        // The run may stop early at the resolution guard; the band claim is
        // "until breaking nears", i.e. over the recorded samples.
        let slopes: Vec<f64> = traj.diagnostics.iter().filter_map(|d| d.decay_slope).collect();
        assert!(slopes.len() >= 5, "too few samples: {}", slopes.len());
        let s0 = slopes[0];
        assert!((s0 - r.ln()).abs() < 0.05 * r.ln().abs(), "initial slope {s0}");
        for s in &slopes {
            assert!(
                (s - s0).abs() <= 0.2 * s0.abs(),
                "slope drifted out of band: {s0} -> {s}"
            );
        }
    }

    #[test]
    fn csv_row_formats_missing_entries_as_nan() {
        let u = GridField::from_fn(64, |x| (TAU * x).cos()).unwrap();
        let rec = DiagnosticsRecord::eulerian(&u, 0.5);
        let row = rec.to_csv_row(|v| format!("{v:.3e}"));
        let cols: Vec<&str> = row.split(',').collect();
        assert_eq!(cols.len(), 7);
        assert_eq!(cols[1], "nan");
        assert_eq!(cols[4], "nan");
        assert_eq!(cols[5], "nan"); // single cosine: degenerate spectrum
        assert_eq!(cols[6], "nan");
    }
}
