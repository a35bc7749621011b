//! Seeded random fields and diffeomorphisms for property tests and the
//! verification batteries. Everything is deterministic given the seed.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::diffeo::Diffeo;
use crate::field::GridField;

pub struct FieldSampler {
    rng: ChaCha8Rng,
}

impl FieldSampler {
    pub fn new(seed: u64) -> Self {
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// Random band-limited field with modes 1..=max_mode, coefficients damped
    /// by 1/k², rescaled so the sup-norm equals `amplitude`.
    pub fn band_limited(&mut self, n: usize, max_mode: usize, amplitude: f64) -> GridField {
        let max_mode = max_mode.min(n / 2 - 1).max(1);
        let coeffs: Vec<(f64, f64)> = (1..=max_mode)
            .map(|k| {
                let damp = 1.0 / (k * k) as f64;
                (
                    self.rng.gen_range(-1.0..1.0) * damp,
                    self.rng.gen_range(-1.0..1.0) * damp,
                )
            })
            .collect();
        let raw = GridField::from_fn(n, |x| {
            coeffs
                .iter()
                .enumerate()
                .map(|(i, &(a, b))| {
                    let th = 2.0 * std::f64::consts::PI * (i + 1) as f64 * x;
                    a * th.cos() + b * th.sin()
                })
                .sum()
        })
        .expect("valid grid");
        let sup = raw.sup_norm();
        if sup == 0.0 {
            raw
        } else {
            raw.scale(amplitude / sup)
        }
    }

    /// Random small diffeomorphism: displacement sup-norm <= `displacement`
    /// and slope bounded away from zero (>= 1/2), so group operations stay
    /// well inside the chart.
    pub fn small_diffeo(&mut self, n: usize, max_mode: usize, displacement: f64) -> Diffeo {
        let w = self.band_limited(n, max_mode, 1.0);
        let wx_sup = w.derivative(1).sup_norm();
        let scale = displacement.min(0.5 / wx_sup.max(1e-12));
        Diffeo::new(w.scale(scale), 0).expect("slope stays positive by construction")
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        self.rng.gen_range(lo..hi)
    }
}
