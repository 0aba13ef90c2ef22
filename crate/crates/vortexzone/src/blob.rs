//! δ-regularized vortex-blob time stepping with conservation diagnostics,
//! Kelvin–Helmholtz seeding, macroscopic field sampling and turbulence-zone
//! overlays.
//!
//! The stepper advances the discrete δ-BR recurrence
//! z(t+h, s) = z(t, s) + h (ℓ/2π|S|) Σ_{s'} (z_s - z_{s'})^⊥ ϖ(s') /
//! (|z_s - z_{s'}|² + δ²) with forward Euler reproducing that scheme
//! bit-for-bit under the fixed summation order; the same velocity functional
//! drives the classical rk4 update. Pairwise sums are Neumaier-compensated,
//! and the parallelization is over target blobs only, so runs are
//! deterministic.

use crate::curve::{perp, ClosedCurve, ScalarField};
use crate::numerics::{KahanComplex, KahanSum};
use crate::{Complex, Error, Result};
use rayon::prelude::*;
use std::f64::consts::TAU;

/// Discrete blob state: positions, fixed circulation weights and the
/// regularization δ.
#[derive(Debug, Clone)]
pub struct BlobState {
    pub time: f64,
    pub positions: Vec<Complex>,
    pub weights: Vec<f64>,
    pub delta: f64,
    /// Parameter period of the underlying curve (kept for overlays).
    pub length: f64,
    /// Set when the node count is below the sanity threshold of 64.
    pub below_resolution: bool,
}

/// Time integrator for [`step`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum Integrator {
    Euler,
    Rk4,
}

impl std::str::FromStr for Integrator {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "euler" => Ok(Integrator::Euler),
            "rk4" => Ok(Integrator::Rk4),
            other => Err(format!("unknown integrator '{other}' (euler|rk4)")),
        }
    }
}

/// Simulation parameters. `energy_stride` controls how often the O(S²)
/// regularized energy is evaluated (0 = first and last step only).
#[derive(Debug, Clone)]
pub struct SimConfig {
    pub h: f64,
    pub steps: usize,
    pub integrator: Integrator,
    pub s_count: usize,
    pub delta: f64,
    pub energy_stride: usize,
}

impl SimConfig {
    pub fn final_time(&self) -> f64 {
        self.h * self.steps as f64
    }
}

/// Kelvin–Helmholtz seeding: normal displacement ε sin(ks).
#[derive(Debug, Clone, Copy)]
pub struct KhConfig {
    pub amplitude: f64,
    pub frequency: u32,
}

/// Sample a curve and strength into a blob state: positions at uniform
/// parameter nodes, weights w_j = ℓ ϖ(s_j)/|S|.
pub fn init_from_curve(
    curve: &ClosedCurve,
    strength: &ScalarField,
    s_count: usize,
    delta: f64,
) -> Result<BlobState> {
    crate::curve::check_same_grid(curve.grid(), strength.grid())?;
    let (curve, strength) = if s_count == curve.grid().len() {
        (curve.clone(), strength.clone())
    } else {
        (curve.resample(s_count)?, strength.resample(s_count)?)
    };
    let ell = curve.grid().length();
    let weights = strength
        .values()
        .iter()
        .map(|&w| ell * w / s_count as f64)
        .collect();
    Ok(BlobState {
        time: 0.0,
        positions: curve.points().to_vec(),
        weights,
        delta,
        length: ell,
        below_resolution: s_count < 64,
    })
}

/// z₀ - ε sin(ks) ∂_s z₀^⊥, the perturbed interface that triggers roll-up.
/// The phase is scaled so k counts oscillations per period for any ℓ.
pub fn kh_perturb(curve: &ClosedCurve, kh: &KhConfig) -> Result<ClosedCurve> {
    let d = curve.spectral_derivative(1)?;
    let ell = curve.grid().length();
    let points = curve
        .grid()
        .nodes()
        .zip(curve.points())
        .zip(d.points())
        .map(|((s, &p), &t)| {
            let gamma = kh.amplitude * (TAU * kh.frequency as f64 * s / ell).sin();
            p - gamma * perp(t)
        })
        .collect();
    ClosedCurve::new(curve.grid().clone(), points)
}

/// Induced velocities at all blob positions: the δ-regularized Biot–Savart
/// sum with the self term dropping out through K_δ(0) = 0.
///
/// Sources are accumulated in target-relative order (j+1, j+2, …), so the
/// floating-point sum commutes exactly with the discrete rotations of a
/// symmetric state. Without this the per-target summation noise (≈1e-11
/// after a few dozen steps) seeds the Kelvin–Helmholtz instability on
/// configurations that should stay symmetric.
pub fn blob_velocities(positions: &[Complex], weights: &[f64], delta: f64) -> Vec<Complex> {
    let d2 = delta * delta;
    let n = positions.len();
    (0..n)
        .into_par_iter()
        .map(|i| {
            let z = positions[i];
            let mut acc = KahanComplex::new();
            for k in 1..n {
                let j = (i + k) % n;
                let d = z - positions[j];
                if d == Complex::new(0.0, 0.0) {
                    continue; // K_δ(0) = 0
                }
                let denom = d.norm_sqr() + d2;
                acc.add(perp(d) * (weights[j] / denom));
            }
            acc.value() / TAU
        })
        .collect()
}

/// One time step of the δ-BR recurrence.
pub fn step(state: &BlobState, h: f64, integrator: Integrator) -> Result<BlobState> {
    if !(h > 0.0) {
        return Err(Error::InvalidParameter {
            name: "h",
            value: h,
            expected: "(0, ∞)",
        });
    }
    let n = state.positions.len();
    let mut next = state.clone();
    match integrator {
        Integrator::Euler => {
            let v = blob_velocities(&state.positions, &state.weights, state.delta);
            for i in 0..n {
                next.positions[i] += h * v[i];
            }
        }
        Integrator::Rk4 => {
            let at = |pos: &[Complex]| blob_velocities(pos, &state.weights, state.delta);
            let k1 = at(&state.positions);
            let mid1: Vec<Complex> = (0..n)
                .map(|i| state.positions[i] + 0.5 * h * k1[i])
                .collect();
            let k2 = at(&mid1);
            let mid2: Vec<Complex> = (0..n)
                .map(|i| state.positions[i] + 0.5 * h * k2[i])
                .collect();
            let k3 = at(&mid2);
            let end: Vec<Complex> = (0..n).map(|i| state.positions[i] + h * k3[i]).collect();
            let k4 = at(&end);
            for i in 0..n {
                next.positions[i] +=
                    h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
            }
        }
    }
    next.time += h;
    if next
        .positions
        .iter()
        .any(|p| !p.re.is_finite() || !p.im.is_finite())
    {
        return Err(Error::NonFinite(format!(
            "blob positions at t = {}",
            next.time
        )));
    }
    Ok(next)
}

/// Total circulation Σ w_j (exactly conserved: weights never change).
pub fn total_circulation(state: &BlobState) -> f64 {
    KahanSum::sum_iter(state.weights.iter().copied())
}

/// Linear impulse Σ w_j z_j, conserved to roundoff by the odd kernel.
pub fn linear_impulse(state: &BlobState) -> Complex {
    let mut acc = KahanComplex::new();
    for (w, z) in state.weights.iter().zip(&state.positions) {
        acc.add(w * z);
    }
    acc.value()
}

/// Regularized interaction energy
/// -(1/8π) Σ_{i≠j} w_i w_j log(|z_i - z_j|² + δ²), conserved by the
/// continuous dynamics; its drift under Euler is O(h).
pub fn regularized_energy(state: &BlobState) -> f64 {
    let d2 = state.delta * state.delta;
    let partial: Vec<f64> = state
        .positions
        .par_iter()
        .enumerate()
        .map(|(i, &zi)| {
            let mut acc = KahanSum::new();
            for (j, &zj) in state.positions.iter().enumerate() {
                if i == j {
                    continue;
                }
                acc.add(state.weights[i] * state.weights[j] * ((zi - zj).norm_sqr() + d2).ln());
            }
            acc.value()
        })
        .collect();
    -KahanSum::sum_iter(partial.into_iter()) / (4.0 * TAU)
}

/// Per-step conservation diagnostics.
#[derive(Debug, Clone)]
pub struct StepDiagnostics {
    pub time: f64,
    pub circulation: f64,
    pub impulse: Complex,
    pub energy: Option<f64>,
}

/// A completed run: every state plus the diagnostics stream.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub states: Vec<BlobState>,
    pub diagnostics: Vec<StepDiagnostics>,
    pub h: f64,
}

impl Trajectory {
    pub fn initial(&self) -> &BlobState {
        &self.states[0]
    }

    pub fn last(&self) -> &BlobState {
        self.states.last().expect("trajectory has states")
    }

    /// State at the given time (must sit on the step grid).
    pub fn state_at(&self, t: f64) -> Result<&BlobState> {
        let idx = (t / self.h).round() as usize;
        if idx >= self.states.len() || (t - idx as f64 * self.h).abs() > 1e-9 * self.h.max(1.0) {
            return Err(Error::InvalidParameter {
                name: "t",
                value: t,
                expected: "a multiple of h within the run",
            });
        }
        Ok(&self.states[idx])
    }

    /// Relative impulse drift between the first and last state, scaled by
    /// the impulse magnitude floor Σ|w|·max|z|.
    pub fn impulse_relative_drift(&self) -> f64 {
        let first = &self.diagnostics[0];
        let last = self.diagnostics.last().expect("diagnostics");
        let scale: f64 = self.states[0]
            .weights
            .iter()
            .map(|w| w.abs())
            .sum::<f64>()
            * self.states[0]
                .positions
                .iter()
                .map(|z| z.norm())
                .fold(0.0, f64::max);
        (last.impulse - first.impulse).norm() / scale.max(f64::MIN_POSITIVE)
    }
}

/// Run the recurrence for `config.steps` steps, recording diagnostics at
/// every step and invoking the optional per-step sink.
pub fn run(
    state: BlobState,
    config: &SimConfig,
    mut sink: Option<&mut dyn FnMut(&StepDiagnostics)>,
) -> Result<Trajectory> {
    let mut states = Vec::with_capacity(config.steps + 1);
    let mut diagnostics = Vec::with_capacity(config.steps + 1);
    let energy_due = |k: usize| {
        if config.energy_stride == 0 {
            k == 0 || k == config.steps
        } else {
            k % config.energy_stride == 0 || k == config.steps
        }
    };
    let mut record = |state: &BlobState, k: usize, sink: &mut Option<&mut dyn FnMut(&StepDiagnostics)>| {
        let diag = StepDiagnostics {
            time: state.time,
            circulation: total_circulation(state),
            impulse: linear_impulse(state),
            energy: energy_due(k).then(|| regularized_energy(state)),
        };
        if let Some(f) = sink {
            f(&diag);
        }
        diagnostics.push(diag);
    };
    record(&state, 0, &mut sink);
    states.push(state);
    for k in 1..=config.steps {
        let next = step(states.last().expect("state"), config.h, config.integrator)?;
        record(&next, k, &mut sink);
        states.push(next);
    }
    Ok(Trajectory {
        states,
        diagnostics,
        h: config.h,
    })
}

/// Macroscopic velocity field of a 2N-sheet family of blob states:
/// the weight-averaged δ-regularized sum over all sheets.
pub fn macroscopic_field(states: &[BlobState], points: &[Complex]) -> Vec<Complex> {
    let count = states.len() as f64;
    points
        .par_iter()
        .map(|&x| {
            let mut acc = KahanComplex::new();
            for state in states {
                let d2 = state.delta * state.delta;
                for (j, &zj) in state.positions.iter().enumerate() {
                    let d = x - zj;
                    let denom = d.norm_sqr() + d2;
                    if denom == 0.0 {
                        continue;
                    }
                    acc.add(perp(d) * (state.weights[j] / denom));
                }
            }
            acc.value() / (TAU * count)
        })
        .collect()
}

/// Zone overlay at one time: the two boundary curves
/// x_± = z(t) ± c t ∂_s z₀^⊥ with c = β(|ϖ₀| ∗ η_ε), and the fraction of
/// the supplied test points lying inside the closed zone (boundary
/// inclusive).
#[derive(Debug, Clone)]
pub struct ZoneOverlay {
    pub x_plus: ClosedCurve,
    pub x_minus: ClosedCurve,
    pub containment: f64,
}

pub fn zone_overlay(
    center: &Trajectory,
    z0: &ClosedCurve,
    wt0: &ScalarField,
    beta: f64,
    eps: f64,
    t: f64,
    test_points: &[Complex],
) -> Result<ZoneOverlay> {
    let state = center.state_at(t)?;
    let n = state.positions.len();
    let (z0, wt0) = if z0.grid().len() == n {
        (z0.clone(), wt0.clone())
    } else {
        (z0.resample(n)?, wt0.resample(n)?)
    };
    let c = wt0.map(f64::abs)?.mollify(eps)?.map(|v| beta * v)?;
    let dz0 = z0.spectral_derivative(1)?;
    let make = |sign: f64| -> Result<ClosedCurve> {
        let points = (0..n)
            .map(|i| state.positions[i] + sign * c.values()[i] * t * perp(dz0.points()[i]))
            .collect();
        ClosedCurve::new(z0.grid().clone(), points)
    };
    // ∂_s z₀^⊥ points inward for a positively oriented curve, so x₊ is the
    // inner boundary and x₋ the outer one.
    let x_plus = make(1.0)?;
    let x_minus = make(-1.0)?;
    let containment = containment_fraction(&x_plus, &x_minus, test_points);
    Ok(ZoneOverlay {
        x_plus,
        x_minus,
        containment,
    })
}

/// Fraction of points inside the annulus bounded by the two curves,
/// counting points on either boundary as inside.
pub fn containment_fraction(
    inner: &ClosedCurve,
    outer: &ClosedCurve,
    points: &[Complex],
) -> f64 {
    if points.is_empty() {
        return 1.0;
    }
    let tol = 1e-9 * outer.grid().length();
    let inside = points
        .iter()
        .filter(|&&p| {
            if polygon_distance(inner.points(), p) <= tol
                || polygon_distance(outer.points(), p) <= tol
            {
                return true;
            }
            winding(outer.points(), p) == 1 && winding(inner.points(), p) == 0
        })
        .count();
    inside as f64 / points.len() as f64
}

fn polygon_distance(nodes: &[Complex], p: Complex) -> f64 {
    nodes.iter().map(|z| (z - p).norm()).fold(f64::INFINITY, f64::min)
}

fn winding(nodes: &[Complex], p: Complex) -> i32 {
    let n = nodes.len();
    let mut acc = KahanSum::new();
    for j in 0..n {
        let a = nodes[j] - p;
        let b = nodes[(j + 1) % n] - p;
        acc.add((b * a.conj()).arg());
    }
    (acc.value() / TAU).round() as i32
}

/// Build the 2N displaced sheet states x_λ = z + λ t c ∂_s z₀^⊥ from a
/// center state, sharing its weights; used for macroscopic field sampling.
pub fn family_states(
    center: &BlobState,
    z0: &ClosedCurve,
    c: &ScalarField,
    t: f64,
    lambda: &[f64],
) -> Result<Vec<BlobState>> {
    let n = center.positions.len();
    let (z0, c) = if z0.grid().len() == n {
        (z0.clone(), c.clone())
    } else {
        (z0.resample(n)?, c.resample(n)?)
    };
    let dz0 = z0.spectral_derivative(1)?;
    lambda
        .iter()
        .map(|&l| {
            let positions = (0..n)
                .map(|i| center.positions[i] + l * t * c.values()[i] * perp(dz0.points()[i]))
                .collect();
            Ok(BlobState {
                time: center.time,
                positions,
                weights: center.weights.clone(),
                delta: center.delta,
                length: center.length,
                below_resolution: center.below_resolution,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::dot;

    fn circle_state(n: usize, wt: f64, delta: f64) -> BlobState {
        let z = ClosedCurve::circle(1.0, n).unwrap();
        let w = ScalarField::constant(z.grid().clone(), wt).unwrap();
        init_from_curve(&z, &w, n, delta).unwrap()
    }

    #[test]
    fn init_preset_weights() {
        let state = circle_state(256, 0.25, 0.002);
        // Σ weights = ∫ϖ₀ to roundoff.
        assert!((total_circulation(&state) - 0.25 * TAU).abs() < 1e-12);
        assert!(!state.below_resolution);
        // Degenerate low resolution is accepted but flagged.
        let z = ClosedCurve::circle(1.0, 16).unwrap();
        let w = ScalarField::constant(z.grid().clone(), 1.0).unwrap();
        let tiny = init_from_curve(&z, &w, 16, 0.002).unwrap();
        assert!(tiny.below_resolution);
    }

    #[test]
    fn init_full_scale_resamples() {
        // The full-scale state: 20000 blobs resampled from a coarser curve.
        let z = ClosedCurve::circle(1.0, 1024).unwrap();
        let w = ScalarField::constant(z.grid().clone(), 0.25).unwrap();
        let state = init_from_curve(&z, &w, 20000, 0.002).unwrap();
        assert_eq!(state.positions.len(), 20000);
        assert!((total_circulation(&state) - 0.25 * TAU).abs() < 1e-10);
        let worst_radius = state
            .positions
            .iter()
            .map(|p| (p.norm() - 1.0).abs())
            .fold(0.0, f64::max);
        assert!(worst_radius < 1e-10, "resampled radius error {worst_radius}");
    }

    #[test]
    fn kh_perturbation_shape() {
        let z = ClosedCurve::circle(1.0, 512).unwrap();
        let kh = KhConfig {
            amplitude: 0.001,
            frequency: 30,
        };
        let p = kh_perturb(&z, &kh).unwrap();
        let max_disp = z
            .points()
            .iter()
            .zip(p.points())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        assert!((max_disp - 0.001).abs() < 1e-6, "max displacement {max_disp}");
        // Zero amplitude is the identity.
        let same = kh_perturb(
            &z,
            &KhConfig {
                amplitude: 0.0,
                frequency: 30,
            },
        )
        .unwrap();
        for (a, b) in z.points().iter().zip(same.points()) {
            assert_eq!(a, b);
        }
        // The displacement is normal to the curve.
        let d = z.spectral_derivative(1).unwrap();
        for ((a, b), t) in z.points().iter().zip(p.points()).zip(d.points()) {
            let disp = b - a;
            assert!(dot(disp, *t).abs() < 1e-12);
        }
    }

    #[test]
    fn single_blob_is_stationary() {
        let state = BlobState {
            time: 0.0,
            positions: vec![Complex::new(0.3, -0.7)],
            weights: vec![2.0],
            delta: 0.01,
            length: TAU,
            below_resolution: true,
        };
        let next = step(&state, 0.1, Integrator::Euler).unwrap();
        assert_eq!(next.positions[0], state.positions[0]);
    }

    #[test]
    fn two_blob_speed() {
        let gamma = 1.3;
        let d = 0.8;
        let delta = 0.002;
        let state = BlobState {
            time: 0.0,
            positions: vec![Complex::new(0.0, 0.0), Complex::new(d, 0.0)],
            weights: vec![gamma, gamma],
            delta,
            length: TAU,
            below_resolution: true,
        };
        let v = blob_velocities(&state.positions, &state.weights, delta);
        let expect = gamma * d / (TAU * (d * d + delta * delta));
        assert!((v[0].norm() - expect).abs() < 1e-12);
        assert!((v[1].norm() - expect).abs() < 1e-12);
        // Equal strengths rotate about the midpoint: velocities opposite.
        assert!((v[0] + v[1]).norm() < 1e-15);
    }

    #[test]
    fn circle_shape_preserved() {
        let state = circle_state(512, 0.25, 0.002);
        let config = SimConfig {
            h: 0.025,
            steps: 40,
            integrator: Integrator::Euler,
            s_count: 512,
            delta: 0.002,
            energy_stride: 0,
        };
        let traj = run(state, &config, None).unwrap();
        let worst = traj
            .last()
            .positions
            .iter()
            .map(|z| (z.norm() - 1.0).abs())
            .fold(0.0, f64::max);
        assert!(worst < 5e-3, "radial drift {worst}");
    }

    #[test]
    fn conservation_diagnostics() {
        let state = circle_state(256, 0.25, 0.002);
        let config = SimConfig {
            h: 0.025,
            steps: 100,
            integrator: Integrator::Euler,
            s_count: 256,
            delta: 0.002,
            energy_stride: 0,
        };
        let traj = run(state, &config, None).unwrap();
        let c0 = traj.diagnostics[0].circulation;
        for d in &traj.diagnostics {
            assert_eq!(d.circulation, c0); // exact: weights never change
        }
        assert!(traj.impulse_relative_drift() <= 1e-10);
    }

    #[test]
    fn energy_drift_is_first_order_in_h() {
        let drift = |h: f64, steps: usize| -> f64 {
            let state = circle_state(128, 0.25, 0.01);
            let config = SimConfig {
                h,
                steps,
                integrator: Integrator::Euler,
                s_count: 128,
                delta: 0.01,
                energy_stride: 0,
            };
            let traj = run(state, &config, None).unwrap();
            let e0 = traj.diagnostics[0].energy.unwrap();
            let e1 = traj.diagnostics.last().unwrap().energy.unwrap();
            (e1 - e0).abs()
        };
        let d1 = drift(0.05, 40);
        let d2 = drift(0.025, 80);
        let ratio = d1 / d2;
        assert!(
            ratio > 1.5 && ratio < 2.8,
            "halving h should roughly halve the drift, ratio {ratio}"
        );
    }

    #[test]
    fn determinism() {
        let state = circle_state(128, 0.25, 0.002);
        let config = SimConfig {
            h: 0.025,
            steps: 10,
            integrator: Integrator::Rk4,
            s_count: 128,
            delta: 0.002,
            energy_stride: 0,
        };
        let a = run(state.clone(), &config, None).unwrap();
        let b = run(state, &config, None).unwrap();
        for (sa, sb) in a.states.iter().zip(&b.states) {
            for (pa, pb) in sa.positions.iter().zip(&sb.positions) {
                assert_eq!(pa, pb);
            }
        }
    }

    #[test]
    fn rotation_symmetry_commutes_with_step() {
        let state = circle_state(128, 0.25, 0.002);
        let m = 4;
        let rot = Complex::from_polar(1.0, TAU / m as f64);
        let shift = 128 / m;
        // Rotate by 2π/m = shift the node index by n/m.
        let rotated = BlobState {
            positions: (0..128)
                .map(|i| rot * state.positions[(i + 128 - shift) % 128])
                .collect(),
            ..state.clone()
        };
        let step_then_rot = {
            let s = step(&state, 0.025, Integrator::Euler).unwrap();
            (0..128)
                .map(|i| rot * s.positions[(i + 128 - shift) % 128])
                .collect::<Vec<_>>()
        };
        let rot_then_step = step(&rotated, 0.025, Integrator::Euler).unwrap();
        for (a, b) in step_then_rot.iter().zip(&rot_then_step.positions) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn convergence_orders_on_two_blob_orbit() {
        // Two equal blobs orbit their midpoint; ω = 2v/d with the
        // regularized speed v = Γd/(2π(d² + δ²)).
        let gamma = 1.0;
        let d = 1.0;
        let delta = 0.05;
        let v = gamma * d / (TAU * (d * d + delta * delta));
        let omega = 2.0 * v / d;
        let make = || BlobState {
            time: 0.0,
            positions: vec![Complex::new(-0.5 * d, 0.0), Complex::new(0.5 * d, 0.0)],
            weights: vec![gamma, gamma],
            delta,
            length: TAU,
            below_resolution: true,
        };
        let endpoint = |integrator: Integrator, steps: usize| -> Complex {
            let h = (TAU / omega) / steps as f64;
            let mut s = make();
            for _ in 0..steps {
                s = step(&s, h, integrator).unwrap();
            }
            s.positions[0]
        };
        let order = |integrator: Integrator| -> f64 {
            let e1 = (endpoint(integrator, 800) - endpoint(integrator, 1600)).norm();
            let e2 = (endpoint(integrator, 1600) - endpoint(integrator, 3200)).norm();
            (e1 / e2).log2()
        };
        let euler = order(Integrator::Euler);
        assert!(euler >= 0.9, "euler order {euler}");
        let rk4 = order(Integrator::Rk4);
        assert!(rk4 >= 3.5, "rk4 order {rk4}");
    }

    #[test]
    fn macroscopic_far_field() {
        let z = ClosedCurve::circle(1.0, 256).unwrap();
        let w = ScalarField::constant(z.grid().clone(), 0.25).unwrap();
        let center = init_from_curve(&z, &w, 256, 0.002).unwrap();
        let c = ScalarField::constant(z.grid().clone(), 0.03).unwrap();
        let lam = crate::dissipation::lambda_grid(5).unwrap();
        let states = family_states(&center, &z, &c, 1.0, &lam).unwrap();
        let x = Complex::new(50.0, 0.0);
        let v = macroscopic_field(&states, &[x]);
        let expect = 0.25 * TAU / (TAU * 50.0);
        let rel = (v[0].norm() - expect).abs() / expect;
        assert!(rel < 0.02, "relative far-field error {rel}");
        // Tangential at symmetric points by symmetry.
        assert!(v[0].re.abs() < 1e-6 * v[0].norm());
    }

    #[test]
    fn macroscopic_matches_velocity_at_far_from_curve() {
        let z = ClosedCurve::circle(1.0, 512).unwrap();
        let w = ScalarField::from_fn(z.grid().clone(), |s| 0.25 * (2.0 * s).cos()).unwrap();
        let state = init_from_curve(&z, &w, 512, 1e-8).unwrap();
        let sheets = [crate::biot_savart::Sheet::new(z, w, 1.0).unwrap()];
        for &x in &[Complex::new(2.0, 0.5), Complex::new(-1.5, 2.0)] {
            let blob = macroscopic_field(std::slice::from_ref(&state), &[x])[0];
            let exact = crate::biot_savart::velocity_at(&sheets, x).unwrap();
            assert!((blob - exact).norm() < 1e-6, "{blob} vs {exact}");
        }
    }

    #[test]
    fn overlay_at_time_zero() {
        let z = ClosedCurve::circle(1.0, 256).unwrap();
        let w = ScalarField::constant(z.grid().clone(), 0.25).unwrap();
        let state = init_from_curve(&z, &w, 256, 0.002).unwrap();
        let config = SimConfig {
            h: 0.025,
            steps: 0,
            integrator: Integrator::Euler,
            s_count: 256,
            delta: 0.002,
            energy_stride: 0,
        };
        let traj = run(state.clone(), &config, None).unwrap();
        let overlay =
            zone_overlay(&traj, &z, &w, 0.125, TAU / 20.0, 0.0, &state.positions).unwrap();
        for (a, b) in overlay.x_plus.points().iter().zip(z.points()) {
            assert!((a - b).norm() < 1e-14);
        }
        assert_eq!(overlay.containment, 1.0);
    }

    #[test]
    fn overlay_half_width() {
        // β = 1/8, ε = ℓ/20, ϖ₀ = 1/4 const → half-width ct = 2.5/32·...
        let z = ClosedCurve::circle(1.0, 256).unwrap();
        let w = ScalarField::constant(z.grid().clone(), 0.25).unwrap();
        let state = init_from_curve(&z, &w, 256, 0.002).unwrap();
        // Freeze the center: steps with h but zero velocity is impossible,
        // so check the displacement construction directly at t = 2.5.
        let config = SimConfig {
            h: 2.5,
            steps: 1,
            integrator: Integrator::Euler,
            s_count: 256,
            delta: 0.002,
            energy_stride: 0,
        };
        let traj = run(state, &config, None).unwrap();
        let overlay = zone_overlay(&traj, &z, &w, 0.125, TAU / 20.0, 2.5, &[]).unwrap();
        let width = overlay
            .x_minus
            .points()
            .iter()
            .zip(overlay.x_plus.points())
            .map(|(a, b)| 0.5 * (a - b).norm())
            .fold(0.0, f64::max);
        assert!(
            (width - 2.5 * 0.125 * 0.25).abs() < 1e-12,
            "half-width {width}"
        );
    }
}
