//! Lagrangian (geodesic) form of the b-equation on the diffeomorphism group:
//!
//!   φ_t = v,   v_t = -P_φ(v),   P_φ = R_φ ∘ P ∘ R_{φ⁻¹},
//!   P(u) = A⁻¹[3 u_x u_xx + b (Au) u_x].
//!
//! Unlike the Eulerian form this is an ODE — no derivative loss — and it is
//! realized here with two structurally different conjugation strategies that
//! serve as each other's cross-check:
//!
//! * inverse-composition: pull v back through φ⁻¹, apply P spectrally,
//!   compose back (spectrally accurate end to end);
//! * conjugated-operator: the conjugated-derivative recursion with centered
//!   finite differences and a direct cyclic-tridiagonal solve of the
//!   conjugated Helmholtz operator Ã_φ w = w - ((w_x/φₓ))_x/φₓ. Never
//!   inverts φ; second-order accurate.

use crate::config::{BParam, PStrategy, SolverConfig, TerminationStatus};
use crate::diagnostics::{DiagnosticsRecord, RegularityAccumulator};
use crate::diffeo::Diffeo;
use crate::error::{Error, Result};
use crate::euler::momentum;
use crate::field::GridField;
use crate::spectral::{product, Interpolant};

#[derive(Debug, Clone)]
pub struct GeodesicState {
    pub phi: Diffeo,
    pub v: GridField,
    pub t: f64,
}

impl GeodesicState {
    /// Reconstruct the Eulerian velocity u = v ∘ φ⁻¹ on the grid.
    pub fn eulerian_velocity(&self) -> Result<GridField> {
        if self.phi.displacement().sup_norm() == 0.0 {
            return Ok(self.v.clone());
        }
        let inv = self.phi.invert()?;
        let iv = Interpolant::new(&self.v);
        GridField::new(inv.lift_values().iter().map(|&y| iv.eval(y)).collect())
    }
}

/// P(u) = A⁻¹[3 u_x u_xx + b (Au) u_x], the operator whose conjugation drives
/// the geodesic flow.
pub fn p_operator(u: &GridField, b: BParam, dealias: bool) -> GridField {
    let ux = u.derivative(1);
    let uxx = u.derivative(2);
    let m = momentum(u);
    product(&ux, &uxx, dealias)
        .scale(3.0)
        .axpy(b.0, &product(&m, &ux, dealias))
        .helmholtz_solve()
}

/// P_φ(v) by the selected strategy. Conjugation by the exact identity is the
/// identity conjugation, so zero displacement short-circuits to P itself for
/// both strategies.
pub fn p_conjugated(
    phi: &Diffeo,
    v: &GridField,
    b: BParam,
    strategy: PStrategy,
    dealias: bool,
) -> Result<GridField> {
    if phi.displacement().sup_norm() == 0.0 {
        return Ok(p_operator(v, b, dealias));
    }
    match strategy {
        PStrategy::InverseComposition => {
            let inv = phi.invert()?;
            let iv = Interpolant::new(v);
            let u = GridField::new(inv.lift_values().iter().map(|&y| iv.eval(y)).collect())?;
            let p = p_operator(&u, b, dealias);
            let ip = Interpolant::new(&p);
            GridField::new(phi.lift_values().iter().map(|&f| ip.eval(f)).collect())
        }
        PStrategy::ConjugatedOperator => p_conjugated_fd(phi, v, b),
    }
}

/// Second-order centered difference on the periodic grid.
fn fd_derivative(u: &GridField) -> GridField {
    let n = u.len();
    let s = u.samples();
    let scale = n as f64 / 2.0;
    GridField::from_vec_unchecked(
        (0..n)
            .map(|j| (s[(j + 1) % n] - s[(j + n - 1) % n]) * scale)
            .collect(),
    )
}

/// Conjugated-operator realization: q = R_φ Q R_{φ⁻¹} v via the derivative
/// recursion (FD variant), then solve Ã_φ w = q.
fn p_conjugated_fd(phi: &Diffeo, v: &GridField, b: BParam) -> Result<GridField> {
    let slope = phi.slope()?;
    let a1 = fd_derivative(v).div(&slope);
    let a2 = fd_derivative(&a1).div(&slope);
    // Q(u) ∘ φ = 3 ã₁ ã₂ + b (v - ã₂) ã₁, using (Au) ∘ φ = v - ã₂.
    let q = a1
        .mul(&a2)
        .scale(3.0)
        .add(&v.sub(&a2).mul(&a1).scale(b.0));
    solve_conjugated_helmholtz(&slope, &q)
}

/// Direct solve of w - ((w_x/φₓ))_x/φₓ = q with a flux-form second-order
/// discretization: cyclic tridiagonal system (periodic band + rank-1
/// correction), diagonally dominant since φₓ > 0.
fn solve_conjugated_helmholtz(slope: &GridField, q: &GridField) -> Result<GridField> {
    let n = slope.len();
    let h2 = 1.0 / (n * n) as f64; // h², h = 1/N
    let s = slope.samples();

    let half = |j: usize| 0.5 * (s[j] + s[(j + 1) % n]);

    let mut sub = vec![0.0; n];
    let mut diag = vec![0.0; n];
    let mut sup = vec![0.0; n];
    for j in 0..n {
        let sm = half((j + n - 1) % n); // s_{j-1/2}
        let sp = half(j); // s_{j+1/2}
        let lower = 1.0 / (h2 * s[j] * sm);
        let upper = 1.0 / (h2 * s[j] * sp);
        sub[j] = -lower;
        sup[j] = -upper;
        diag[j] = 1.0 + lower + upper;
    }
    let corner_ur = sub[0]; // row 0 couples to w_{n-1}
    let corner_ll = sup[n - 1]; // row n-1 couples to w_0
    let x = solve_cyclic_tridiagonal(&sub, &diag, &sup, corner_ur, corner_ll, q.samples())?;
    GridField::new(x).map_err(|e| Error::LinearSolveFailure(e.to_string()))
}

/// Thomas algorithm for a (non-cyclic) tridiagonal system; `sub[j]`/`sup[j]`
/// are the couplings of row j to j-1 and j+1 (sub[0] and sup[n-1] unused).
fn solve_tridiagonal(sub: &[f64], diag: &[f64], sup: &[f64], rhs: &[f64]) -> Result<Vec<f64>> {
    let n = diag.len();
    let mut gamma = vec![0.0; n];
    let mut x = vec![0.0; n];
    let mut beta = diag[0];
    if beta == 0.0 {
        return Err(Error::LinearSolveFailure("zero pivot in row 0".into()));
    }
    x[0] = rhs[0] / beta;
    for j in 1..n {
        gamma[j] = sup[j - 1] / beta;
        beta = diag[j] - sub[j] * gamma[j];
        if beta == 0.0 {
            return Err(Error::LinearSolveFailure(format!("zero pivot in row {j}")));
        }
        x[j] = (rhs[j] - sub[j] * x[j - 1]) / beta;
    }
    for j in (0..n - 1).rev() {
        x[j] -= gamma[j + 1] * x[j + 1];
    }
    Ok(x)
}

/// Cyclic tridiagonal solve by Sherman-Morrison: A = A' + u vᵀ with
/// u = (γ, 0, …, β)ᵀ, v = (1, 0, …, α/γ)ᵀ, α/β the upper-right/lower-left
/// corner entries.
fn solve_cyclic_tridiagonal(
    sub: &[f64],
    diag: &[f64],
    sup: &[f64],
    corner_ur: f64,
    corner_ll: f64,
    rhs: &[f64],
) -> Result<Vec<f64>> {
    let n = diag.len();
    if n < 3 {
        return Err(Error::LinearSolveFailure("system size must be >= 3".into()));
    }
    let gamma = -diag[0];
    let mut dmod = diag.to_vec();
    dmod[0] -= gamma;
    dmod[n - 1] -= corner_ur * corner_ll / gamma;

    let y = solve_tridiagonal(sub, &dmod, sup, rhs)?;
    let mut u = vec![0.0; n];
    u[0] = gamma;
    u[n - 1] = corner_ll;
    let z = solve_tridiagonal(sub, &dmod, sup, &u)?;

    let vy = y[0] + corner_ur / gamma * y[n - 1];
    let vz = 1.0 + z[0] + corner_ur / gamma * z[n - 1];
    if vz == 0.0 {
        return Err(Error::LinearSolveFailure(
            "singular Sherman-Morrison correction".into(),
        ));
    }
    let factor = vy / vz;
    Ok(y.iter().zip(&z).map(|(yi, zi)| yi - factor * zi).collect())
}

/// The second-order vector field: returns (φ_t, v_t) = (v, -P_φ(v)).
pub fn geodesic_rhs(
    state: &GeodesicState,
    b: BParam,
    strategy: PStrategy,
    dealias: bool,
) -> Result<(GridField, GridField)> {
    let p = p_conjugated(&state.phi, &state.v, b, strategy, dealias)?;
    Ok((state.v.clone(), p.scale(-1.0)))
}

/// One RK4 step of the coupled system on (w, v), with φ = id + w + offset.
pub fn rk4_geodesic_step(
    state: &GeodesicState,
    b: BParam,
    dt: f64,
    strategy: PStrategy,
    dealias: bool,
    max_amp: f64,
) -> Result<GeodesicState> {
    assert!(dt > 0.0, "dt must be positive");
    let offset = state.phi.offset();
    let rhs = |w: &GridField, v: &GridField| -> Result<(GridField, GridField)> {
        let phi = Diffeo::from_parts_unchecked(w.clone(), offset);
        let p = p_conjugated(&phi, v, b, strategy, dealias)?;
        Ok((v.clone(), p.scale(-1.0)))
    };

    let w = state.phi.displacement();
    let v = &state.v;
    let (kw1, kv1) = rhs(w, v)?;
    let (kw2, kv2) = rhs(&w.axpy(0.5 * dt, &kw1), &v.axpy(0.5 * dt, &kv1))?;
    let (kw3, kv3) = rhs(&w.axpy(0.5 * dt, &kw2), &v.axpy(0.5 * dt, &kv2))?;
    let (kw4, kv4) = rhs(&w.axpy(dt, &kw3), &v.axpy(dt, &kv3))?;

    let combine = |k1: &GridField, k2: &GridField, k3: &GridField, k4: &GridField| {
        k1.axpy(2.0, k2).axpy(2.0, k3).add(k4)
    };
    let w_next = w.axpy(dt / 6.0, &combine(&kw1, &kw2, &kw3, &kw4));
    let v_next = v.axpy(dt / 6.0, &combine(&kv1, &kv2, &kv3, &kv4));

    let amp = v_next.sup_norm();
    if !v_next.is_finite() || !w_next.is_finite() || amp > max_amp {
        return Err(Error::BlowUp {
            amplitude: amp,
            bound: max_amp,
        });
    }
    Ok(GeodesicState {
        phi: Diffeo::from_parts_unchecked(w_next, offset),
        v: v_next,
        t: state.t + dt,
    })
}

#[derive(Debug, Clone)]
pub struct GeodesicTrajectory {
    pub samples: Vec<GeodesicState>,
    pub diagnostics: Vec<DiagnosticsRecord>,
    pub status: TerminationStatus,
}

impl GeodesicTrajectory {
    pub fn final_state(&self) -> &GeodesicState {
        self.samples.last().expect("at least the initial sample")
    }
}

/// Integrate the geodesic system from (id, u0), recording diagnostics and
/// halting with breaking-detected once min φₓ crosses the run guard (or any
/// stage loses monotonicity outright).
pub fn integrate_geodesic(u0: &GridField, cfg: &SolverConfig) -> Result<GeodesicTrajectory> {
    cfg.validate()?;
    if u0.len() != cfg.n {
        return Err(Error::InvalidConfig(format!(
            "initial field has {} points, config expects {}",
            u0.len(),
            cfg.n
        )));
    }

    let m0 = momentum(u0);
    let mut state = GeodesicState {
        phi: Diffeo::identity(cfg.n)?,
        v: u0.clone(),
        t: 0.0,
    };
    let mut reg = RegularityAccumulator::new(&state.phi, &state.v, &m0, cfg.b)?;
    let mut samples = vec![state.clone()];
    let mut diagnostics = vec![DiagnosticsRecord::lagrangian(&state, &m0, cfg.b, &reg)?];
    let mut status = TerminationStatus::Completed;

    let steps = cfg.num_steps();
    for step in 1..=steps {
        match rk4_geodesic_step(
            &state,
            cfg.b,
            cfg.dt,
            cfg.strategy,
            cfg.dealias,
            cfg.guards.max_amp,
        ) {
            Ok(next) => state = next,
            Err(Error::MonotonicityLost { .. }) => {
                status = TerminationStatus::BreakingDetected;
                break;
            }
            Err(Error::BlowUp { .. }) => {
                status = TerminationStatus::BlowUp;
                break;
            }
            Err(e) => return Err(e),
        }
        state.t = step as f64 * cfg.dt;
        state.phi = state.phi.chart_normalize();
        reg.update(&state.phi, &state.v, cfg.dt)?;

        if state.phi.min_slope_value() <= cfg.guards.min_slope
            || crate::spectral::resolved_tail_ratio(&state.v) > cfg.guards.spectral_tail
        {
            // Keep the collapsing sample so the min-slope trace shows the
            // approach to breaking, then stop.
            samples.push(state.clone());
            diagnostics.push(DiagnosticsRecord::lagrangian(&state, &m0, cfg.b, &reg)?);
            status = TerminationStatus::BreakingDetected;
            break;
        }
        if step % cfg.sample_every == 0 || step == steps {
            samples.push(state.clone());
            diagnostics.push(DiagnosticsRecord::lagrangian(&state, &m0, cfg.b, &reg)?);
        }
    }

    Ok(GeodesicTrajectory {
        samples,
        diagnostics,
        status,
    })
}
