//! Exponential map of the b-family connection at the identity.
//!
//! exp(u0) is the time-one point of the geodesic starting at (id, u0). The
//! quadratic structure of the system gives the exact scaling identity
//! φ(t, s·u0) = φ(st, u0) — preserved bit-for-bit by RK4 when the time step
//! is rescaled along with the data — and the differential at 0 is the
//! identity. Both are probed numerically here, and `shoot` inverts the map
//! near id by inexact Newton with a matrix-free linear solver.

use crate::config::{BParam, SolverConfig, TerminationStatus};
use crate::diffeo::Diffeo;
use crate::error::{Error, Result};
use crate::field::GridField;
use crate::geodesic::integrate_geodesic;

/// Finite-difference step used for Jacobian actions inside `shoot`.
const SHOOT_JVP_EPS: f64 = 1e-5;
/// Inner (linear-solve) relative residual target per Newton step.
const SHOOT_INNER_TOL: f64 = 1e-3;
/// Inner iteration cap.
const SHOOT_INNER_MAX: usize = 50;

/// Time-one geodesic flow u0 ↦ φ(1). Uses the caller's grid, step and guard
/// settings but always integrates to t = 1.
pub fn exp_map(u0: &GridField, b: BParam, cfg: &SolverConfig) -> Result<Diffeo> {
    let cfg = SolverConfig {
        b,
        t_end: 1.0,
        sample_every: usize::MAX - 1,
        ..cfg.clone()
    };
    let traj = integrate_geodesic(u0, &cfg)?;
    match traj.status {
        TerminationStatus::Completed => Ok(traj.final_state().phi.chart_normalize()),
        TerminationStatus::BreakingDetected => Err(Error::MonotonicityLost {
            min_slope: traj.final_state().phi.min_slope_value(),
            threshold: cfg.guards.min_slope,
        }),
        TerminationStatus::BlowUp => Err(Error::BlowUp {
            amplitude: traj.final_state().v.sup_norm(),
            bound: cfg.guards.max_amp,
        }),
    }
}

/// Directional derivative of the exponential map by central differences:
/// (exp(u0 + εw) - exp(u0 - εw)) / 2ε on displacement fields.
pub fn dexp_jvp(
    u0: &GridField,
    w: &GridField,
    b: BParam,
    eps: f64,
    cfg: &SolverConfig,
) -> Result<GridField> {
    if !(1e-7..=1e-3).contains(&eps) {
        return Err(Error::InvalidConfig(format!(
            "finite-difference step {eps} outside [1e-7, 1e-3]"
        )));
    }
    let plus = exp_map(&u0.axpy(eps, w), b, cfg)?;
    let minus = exp_map(&u0.axpy(-eps, w), b, cfg)?;
    if plus.offset() != minus.offset() {
        return Err(Error::InvalidField(
            "exp images fell into different chart translates".into(),
        ));
    }
    Ok(plus
        .displacement()
        .sub(minus.displacement())
        .scale(0.5 / eps))
}

/// Geodesic shooting problem: find u0 with exp(u0) = target.
#[derive(Debug, Clone)]
pub struct ShootingProblem {
    /// Chart-normalized target near the identity (displacement sup <= 0.1).
    pub target: Diffeo,
    pub initial_guess: GridField,
    pub max_iters: usize,
    /// sup-norm residual tolerance on the displacement mismatch.
    pub tol: f64,
}

impl ShootingProblem {
    /// Default setup: start the Newton iteration from the target displacement
    /// itself (the differential at 0 is the identity, so this is first-order
    /// accurate already).
    pub fn toward(target: &Diffeo) -> Self {
        let target = target.chart_normalize();
        Self {
            initial_guess: target.displacement().clone(),
            target,
            max_iters: 10,
            tol: 1e-9,
        }
    }
}

/// One Newton iterate of the shooting history.
#[derive(Debug, Clone, Copy)]
pub struct ShootIteration {
    pub iter: usize,
    pub residual: f64,
}

/// Invert the exponential map near the identity by inexact Newton. The
/// Jacobian is available only as a JVP, so the linear update is solved
/// matrix-free (Richardson iteration on Jδ = -r, which contracts because
/// J ≈ id in the shooting neighborhood), with residual reduction 1e-3 per
/// outer step and at most 50 inner iterations.
pub fn shoot(
    problem: &ShootingProblem,
    b: BParam,
    cfg: &SolverConfig,
) -> Result<(GridField, Vec<ShootIteration>)> {
    let target = problem.target.chart_normalize();
    if target.offset() != 0 {
        return Err(Error::InvalidConfig(
            "shooting target must be near the identity (offset 0)".into(),
        ));
    }
    if target.displacement().sup_norm() > 0.1 + 1e-12 {
        return Err(Error::InvalidConfig(
            "shooting target outside the probed neighborhood (displacement sup > 0.1)".into(),
        ));
    }

    let mut u = problem.initial_guess.clone();
    let mut history = Vec::new();
    let mut residual_norm = f64::INFINITY;

    for iter in 0..problem.max_iters {
        let image = exp_map(&u, b, cfg)?;
        let r = image.displacement().sub(target.displacement());
        residual_norm = r.sup_norm();
        history.push(ShootIteration {
            iter,
            residual: residual_norm,
        });
        if residual_norm <= problem.tol {
            return Ok((u, history));
        }

        // Solve J δ = -r to 1e-3 relative residual, matrix-free.
        let mut delta = r.scale(-1.0);
        for _ in 0..SHOOT_INNER_MAX {
            let jd = dexp_jvp(&u, &delta, b, SHOOT_JVP_EPS, cfg)?;
            let lin_res = r.scale(-1.0).sub(&jd);
            if lin_res.sup_norm() <= SHOOT_INNER_TOL * residual_norm {
                break;
            }
            delta = delta.add(&lin_res);
        }
        u = u.add(&delta);
    }

    Err(Error::NoConvergence {
        iterations: problem.max_iters,
        residual: residual_norm,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::FieldSampler;
    use std::f64::consts::PI;

    const TAU: f64 = 2.0 * PI;
    const DP: BParam = BParam::DEGASPERIS_PROCESI;

    fn test_cfg(n: usize, dt: f64) -> SolverConfig {
        SolverConfig {
            n,
            dt,
            ..SolverConfig::default()
        }
    }

    #[test]
    fn exp_of_zero_is_the_identity() {
        let cfg = test_cfg(64, 1e-2);
        let u0 = GridField::zeros(64).unwrap();
        let phi = exp_map(&u0, DP, &cfg).unwrap();
        assert!(phi.displacement().sup_norm() < 1e-14);
        assert_eq!(phi.offset(), 0);
    }

    #[test]
    fn exp_of_constants_is_a_rotation() {
        let cfg = test_cfg(64, 1e-2);
        let u0 = GridField::constant(64, 0.3).unwrap();
        let phi = exp_map(&u0, DP, &cfg).unwrap();
        let circle_shift = phi.displacement().samples()[0] + phi.offset() as f64;
        assert!((circle_shift - 0.3).abs() < 1e-13);
        assert!(
            phi.displacement()
                .sub(&GridField::constant(64, phi.displacement().samples()[0]).unwrap())
                .sup_norm()
                < 1e-13
        );
    }

    #[test]
    fn scaling_identity_is_exact_under_step_rescaling() {
        // exp(s u0) with step dt/s equals the time-s point of the u0 geodesic
        // with step dt; power-of-two s makes the fp arithmetic identical.
        let n = 64;
        let u0 = GridField::from_fn(n, |x| 0.05 * (TAU * x).sin()).unwrap();
        let dt = 1e-3;
        for s in [0.5, 0.25] {
            let cfg_scaled = test_cfg(n, dt / s);
            let scaled = exp_map(&u0.scale(s), DP, &cfg_scaled).unwrap();

            let cfg_ref = SolverConfig {
                t_end: s,
                sample_every: usize::MAX - 1,
                ..test_cfg(n, dt)
            };
            let traj = crate::geodesic::integrate_geodesic(&u0, &cfg_ref).unwrap();
            let reference = traj.final_state().phi.chart_normalize();

            let d = scaled
                .displacement()
                .sup_distance(reference.displacement());
            assert!(d <= 1e-12, "s = {s}: scaling defect {d}");
            assert_eq!(scaled.offset(), reference.offset());
        }
    }

    #[test]
    fn differential_at_zero_is_the_identity() {
        let n = 64;
        let cfg = test_cfg(n, 2e-3);
        let zero = GridField::zeros(n).unwrap();
        let mut sampler = FieldSampler::new(7);
        let w = sampler.band_limited(n, 4, 0.5);

        let errs: Vec<f64> = [1e-3, 5e-4, 2.5e-4]
            .iter()
            .map(|&eps| {
                dexp_jvp(&zero, &w, DP, eps, &cfg)
                    .unwrap()
                    .sup_distance(&w)
            })
            .collect();
        // Central differences: order >= 2 in eps until the integrator floor.
        for pair in errs.windows(2) {
            if pair[1] < 1e-11 {
                continue;
            }
            let order = (pair[0] / pair[1]).log2();
            assert!(order >= 1.9, "observed order {order} ({errs:?})");
        }
        assert!(errs[2] < 1e-7);
    }

    #[test]
    fn jvp_of_zero_direction_vanishes() {
        let cfg = test_cfg(64, 5e-3);
        let mut sampler = FieldSampler::new(13);
        let u0 = sampler.band_limited(64, 3, 0.05);
        let w = GridField::zeros(64).unwrap();
        let jvp = dexp_jvp(&u0, &w, DP, 1e-4, &cfg).unwrap();
        assert!(jvp.sup_norm() < 1e-13);
    }

    #[test]
    fn jvp_is_linear_in_the_direction() {
        let cfg = test_cfg(64, 5e-3);
        let mut sampler = FieldSampler::new(17);
        let u0 = sampler.band_limited(64, 3, 0.05);
        let w1 = sampler.band_limited(64, 3, 0.3);
        let w2 = sampler.band_limited(64, 3, 0.3);
        let (alpha, beta) = (0.7, -1.2);
        let eps = 1e-4;
        let mix = dexp_jvp(&u0, &w1.scale(alpha).add(&w2.scale(beta)), DP, eps, &cfg).unwrap();
        let parts = dexp_jvp(&u0, &w1, DP, eps, &cfg)
            .unwrap()
            .scale(alpha)
            .add(&dexp_jvp(&u0, &w2, DP, eps, &cfg).unwrap().scale(beta));
        let d = mix.sup_distance(&parts);
        assert!(d <= 1e-8, "linearity defect {d}");
    }

    #[test]
    fn jvp_rejects_out_of_band_eps() {
        let cfg = test_cfg(64, 1e-2);
        let z = GridField::zeros(64).unwrap();
        assert!(dexp_jvp(&z, &z, DP, 1e-2, &cfg).is_err());
        assert!(dexp_jvp(&z, &z, DP, 1e-8, &cfg).is_err());
    }

    #[test]
    fn shooting_at_the_identity_converges_immediately() {
        let cfg = test_cfg(64, 1e-2);
        let problem = ShootingProblem::toward(&Diffeo::identity(64).unwrap());
        let (u0, history) = shoot(&problem, DP, &cfg).unwrap();
        assert!(u0.sup_norm() < 1e-12);
        assert_eq!(history.len(), 1);
    }

    #[test]
    fn shooting_recovers_rotations() {
        let cfg = test_cfg(64, 5e-3);
        let target = Diffeo::rotation(64, 0.07).unwrap();
        let (u0, _) = shoot(&ShootingProblem::toward(&target), DP, &cfg).unwrap();
        let expect = GridField::constant(64, 0.07).unwrap();
        assert!(u0.sup_distance(&expect) <= 1e-9);
    }

    #[test]
    fn shooting_round_trip_battery() {
        let n = 64;
        // Shooting inverts the discrete time-one map; b = 5 mildly saturates
        // the N = 64 tail by t = 1, which is harmless for the round trip
        // (target and recovery use the same discrete flow), so the
        // resolution guard is relaxed here.
        let cfg = SolverConfig {
            guards: crate::config::Guards {
                spectral_tail: 1e-5,
                ..crate::config::Guards::default()
            },
            ..test_cfg(n, 2.5e-3)
        };
        for b in [2.0, 3.0, 0.0, 5.0] {
            let u_star = GridField::from_fn(n, |x| 0.05 * (TAU * x).sin()).unwrap();
            let target = exp_map(&u_star, BParam(b), &cfg).unwrap();
            let (u0, history) = shoot(&ShootingProblem::toward(&target), BParam(b), &cfg).unwrap();
            let err = u0.sup_distance(&u_star);
            assert!(
                err <= 1e-6,
                "b = {b}: recovered within {err} after {} iterations",
                history.len()
            );
            assert!(history.len() <= 10);
        }
    }

    #[test]
    fn shooting_rejects_far_targets() {
        let cfg = test_cfg(64, 1e-2);
        let w = GridField::from_fn(64, |x| 0.2 * (TAU * x).sin() / TAU).unwrap();
        let target = Diffeo::new(w.scale(TAU), 0); // sup 0.2 > 0.1
        if let Ok(t) = target {
            let problem = ShootingProblem::toward(&t);
            assert!(matches!(
                shoot(&problem, DP, &cfg),
                Err(Error::InvalidConfig(_))
            ));
        }
    }

    #[test]
    fn exp_images_of_distinct_data_stay_distinct() {
        // Local injectivity probe at desk scale. N = 128 keeps the outer
        // spectral band out of reach of the nonlinear cascade over t <= 1.
        let n = 128;
        let cfg = test_cfg(n, 5e-3);
        let mut sampler = FieldSampler::new(23);
        for _ in 0..20 {
            let a = sampler.band_limited(n, 3, 0.05);
            let mut bfield = sampler.band_limited(n, 3, 0.05);
            if a.sup_distance(&bfield) < 1e-3 {
                bfield = bfield.shift(2e-3);
            }
            let pa = exp_map(&a, DP, &cfg).unwrap();
            let pb = exp_map(&bfield, DP, &cfg).unwrap();
            let d = pa.displacement().sup_distance(pb.displacement());
            assert!(d >= 1e-5, "images too close: {d}");
        }
    }
}
