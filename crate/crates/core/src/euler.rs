//! Eulerian form of the b-equation.
//!
//! The evolution u_t = -A⁻¹[u(Au)_x + b(Au)u_x] with A = I - d²/dx² is the
//! nonlocal recast of m_t = -(m_x u + b m u_x), m = Au. Method of lines with
//! classical fixed-step RK4; quadratic products are dealiased by default.

use crate::config::{BParam, SolverConfig, TerminationStatus};
use crate::diagnostics::DiagnosticsRecord;
use crate::error::{Error, Result};
use crate::field::GridField;
use crate::spectral::product;

#[derive(Debug, Clone)]
pub struct EulerianState {
    pub u: GridField,
    pub t: f64,
}

/// Momentum density m = Au = u - u_xx.
pub fn momentum(u: &GridField) -> GridField {
    u.helmholtz_apply()
}

/// Right-hand side u_t = -A⁻¹[u m_x + b m u_x].
pub fn euler_rhs(u: &GridField, b: BParam, dealias: bool) -> GridField {
    let m = momentum(u);
    let umx = product(u, &m.derivative(1), dealias);
    let mux = product(&m, &u.derivative(1), dealias);
    umx.axpy(b.0, &mux).helmholtz_solve().scale(-1.0)
}

/// Symmetric bilinear operator of the underlying connection:
/// B(u, w) = ½A⁻¹[u(Aw)_x + w(Au)_x + b(Au)w_x + b(Aw)u_x], with
/// B(u, u) = -euler_rhs(u).
pub fn connection_b(u: &GridField, w: &GridField, b: BParam, dealias: bool) -> GridField {
    let au = momentum(u);
    let aw = momentum(w);
    let mut s = product(u, &aw.derivative(1), dealias);
    s = s.add(&product(w, &au.derivative(1), dealias));
    s = s.axpy(b.0, &product(&au, &w.derivative(1), dealias));
    s = s.axpy(b.0, &product(&aw, &u.derivative(1), dealias));
    s.helmholtz_solve().scale(0.5)
}

/// One classical RK4 step of u_t = euler_rhs(u) + source(t).
pub fn rk4_step(
    state: &EulerianState,
    b: BParam,
    dt: f64,
    dealias: bool,
    max_amp: f64,
    source: Option<&dyn Fn(f64) -> GridField>,
) -> Result<EulerianState> {
    assert!(dt > 0.0, "dt must be positive");
    let rhs = |u: &GridField, t: f64| -> GridField {
        let mut r = euler_rhs(u, b, dealias);
        if let Some(f) = source {
            r = r.add(&f(t));
        }
        r
    };
    let (u, t) = (&state.u, state.t);
    let k1 = rhs(u, t);
    let k2 = rhs(&u.axpy(0.5 * dt, &k1), t + 0.5 * dt);
    let k3 = rhs(&u.axpy(0.5 * dt, &k2), t + 0.5 * dt);
    let k4 = rhs(&u.axpy(dt, &k3), t + dt);
    let mut next = k1.axpy(2.0, &k2);
    next = next.axpy(2.0, &k3);
    next = next.add(&k4);
    let u_next = u.axpy(dt / 6.0, &next);

    let amp = u_next.sup_norm();
    if !u_next.is_finite() || amp > max_amp {
        return Err(Error::BlowUp {
            amplitude: amp,
            bound: max_amp,
        });
    }
    Ok(EulerianState {
        u: u_next,
        t: t + dt,
    })
}

#[derive(Debug, Clone)]
pub struct EulerianTrajectory {
    pub samples: Vec<EulerianState>,
    pub diagnostics: Vec<DiagnosticsRecord>,
    pub status: TerminationStatus,
}

impl EulerianTrajectory {
    pub fn final_state(&self) -> &EulerianState {
        self.samples.last().expect("at least the initial sample")
    }
}

/// Fixed-step RK4 to t_end, recording diagnostics every `sample_every` steps.
/// Guard hits terminate the run early; the partial trajectory is returned
/// with the corresponding status.
pub fn integrate_eulerian(u0: &GridField, cfg: &SolverConfig) -> Result<EulerianTrajectory> {
    integrate_eulerian_forced(u0, cfg, None)
}

/// Same as [`integrate_eulerian`] with an optional source term (method of
/// manufactured solutions).
pub fn integrate_eulerian_forced(
    u0: &GridField,
    cfg: &SolverConfig,
    source: Option<&dyn Fn(f64) -> GridField>,
) -> Result<EulerianTrajectory> {
    cfg.validate()?;
    if u0.len() != cfg.n {
        return Err(Error::InvalidConfig(format!(
            "initial field has {} points, config expects {}",
            u0.len(),
            cfg.n
        )));
    }

    let steps = cfg.num_steps();
    let mut state = EulerianState {
        u: u0.clone(),
        t: 0.0,
    };
    let mut samples = vec![state.clone()];
    let mut diagnostics = vec![DiagnosticsRecord::eulerian(&state.u, 0.0)];
    let mut status = TerminationStatus::Completed;

    for step in 1..=steps {
        match rk4_step(&state, cfg.b, cfg.dt, cfg.dealias, cfg.guards.max_amp, source) {
            Ok(next) => state = next,
            Err(Error::BlowUp { .. }) => {
                status = TerminationStatus::BlowUp;
                break;
            }
            Err(e) => return Err(e),
        }
        state.t = step as f64 * cfg.dt;
        if crate::spectral::resolved_tail_ratio(&state.u) > cfg.guards.spectral_tail {
            samples.push(state.clone());
            diagnostics.push(DiagnosticsRecord::eulerian(&state.u, state.t));
            status = TerminationStatus::BreakingDetected;
            break;
        }
        if step % cfg.sample_every == 0 || step == steps {
            samples.push(state.clone());
            diagnostics.push(DiagnosticsRecord::eulerian(&state.u, state.t));
        }
    }

    Ok(EulerianTrajectory {
        samples,
        diagnostics,
        status,
    })
}
