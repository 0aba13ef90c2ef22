//! Velocity evaluation around the sheets: exact near-field traces, the
//! macroscopic blob field of the 2N-sheet family, circulation quantization
//! and the far-field decay law.
//!
//!     cargo run --release --example macroscopic_field

use vortexzone::biot_savart::{circulation, plemelj_traces, velocity_at, br_single, Sheet};
use vortexzone::blob::{family_states, init_from_curve, macroscopic_field};
use vortexzone::curve::{ClosedCurve, ScalarField};
use vortexzone::dissipation::{expansion_rate, lambda_grid};
use vortexzone::{Complex, Result};
use std::f64::consts::TAU;

fn main() -> Result<()> {
    let n = 512;
    let z0 = ClosedCurve::circle(1.0, n)?;
    let wt0 = ScalarField::from_fn(z0.grid().clone(), |s| 1.0 + 0.5 * s.cos())?;
    let total = wt0.integrate();

    // Birkhoff-Rott value and Plemelj traces on the sheet.
    let b = br_single(&z0, &wt0)?;
    let dz = z0.spectral_derivative(1)?;
    let zeta: Vec<Complex> = wt0
        .values()
        .iter()
        .zip(dz.points())
        .map(|(&w, d)| w / d)
        .collect();
    let traces = plemelj_traces(&b, &zeta, 1);
    println!(
        "sheet traces at node 0: v+ = {:.4}, v- = {:.4}, jump tangential: {}",
        traces.plus[0],
        traces.minus[0],
        (traces.jump[0] * dz.points()[0].conj()).im.abs() < 1e-12
    );

    // Velocity off the sheet and circulation quantization.
    let sheets = vec![Sheet::new(z0.clone(), wt0.clone(), 1.0)?];
    let field = |x: Complex| velocity_at(&sheets, x);
    // The cos component of the strength drives an interior flow of
    // speed 1/8·... = |a₁|/4 at the center.
    println!("|v(0)| = {:.6} (closed form 0.25)", field(Complex::new(0.0, 0.0))?.norm());
    let around = circulation(&field, &ClosedCurve::circle(2.0, 256)?)?;
    println!("circulation around r = 2: {around:.8} (total strength {total:.8})");

    // Far-field decay of 2πi x v(x)* - total.
    for &r in &[10.0, 20.0] {
        let x = Complex::new(r, 0.0);
        let v = field(x)?;
        let residual = (TAU * Complex::new(0.0, 1.0) * x * v.conj() - total).norm();
        println!("far-field residual at |x| = {r}: {residual:.3e}");
    }

    // Macroscopic field of the opened 2N-sheet family.
    let n_pairs = 5;
    let (c, _) = expansion_rate(&wt0, n_pairs, 0.5, z0.grid().length() / 20.0)?;
    let center = init_from_curve(&z0, &wt0, n, 0.002)?;
    let lam = lambda_grid(n_pairs)?;
    let states = family_states(&center, &z0, &c, 0.5, &lam)?;
    let probes = [
        Complex::new(1.5, 0.0),
        Complex::new(0.0, 2.0),
        Complex::new(50.0, 0.0),
    ];
    let values = macroscopic_field(&states, &probes);
    for (p, v) in probes.iter().zip(&values) {
        println!("macroscopic v({p}) = {v:.5}");
    }
    println!(
        "far probe speed vs |total|/(2π·50): {:.3e} vs {:.3e}",
        values[2].norm(),
        total.abs() / (TAU * 50.0)
    );
    Ok(())
}
