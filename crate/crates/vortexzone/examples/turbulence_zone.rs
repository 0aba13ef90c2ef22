//! Turbulence-zone overlay: run the unperturbed center interface and a
//! Kelvin–Helmholtz-seeded sheet, draw the zone boundaries
//! x± = z(t) ± c t ∂_s z₀^⊥ and report how much of the rolled-up sheet the
//! zone contains. Writes an SVG per snapshot into ./out-zone.
//!
//!     cargo run --release --example turbulence_zone

use vortexzone::blob::{init_from_curve, kh_perturb, run, zone_overlay, Integrator, KhConfig, SimConfig};
use vortexzone::curve::{ClosedCurve, PeriodicGrid, ScalarField};
use vortexzone::output::{write_file, SvgFigure};
use vortexzone::Result;
use std::path::Path;

fn main() -> Result<()> {
    let s_count = 1000;
    let beta = 0.125;
    let z0 = ClosedCurve::circle(1.0, 1024)?;
    let ell = z0.grid().length();
    let wt0 = ScalarField::constant(z0.grid().clone(), 0.25)?;
    let config = SimConfig {
        h: 0.025,
        steps: 100,
        integrator: Integrator::Euler,
        s_count,
        delta: 0.002,
        energy_stride: 0,
    };
    let kh = KhConfig {
        amplitude: 0.001,
        frequency: 30,
    };

    println!("running center and perturbed sheets to t = 2.5 ...");
    let center = run(init_from_curve(&z0, &wt0, s_count, config.delta)?, &config, None)?;
    let perturbed = run(
        init_from_curve(&kh_perturb(&z0, &kh)?, &wt0, s_count, config.delta)?,
        &config,
        None,
    )?;

    let out = Path::new("out-zone");
    for (k, &t) in [0.0, 1.25, 2.5].iter().enumerate() {
        let overlay = zone_overlay(
            &center,
            &z0,
            &wt0,
            beta,
            ell / 20.0,
            t,
            &perturbed.state_at(t)?.positions,
        )?;
        // At t = 0 the zone has zero width, so the seeded sheet sits
        // outside it except where the perturbation vanishes.
        println!(
            "t = {t:>4}: containment of the perturbed sheet = {:.4}",
            overlay.containment
        );
        let kh_curve = ClosedCurve::new(
            PeriodicGrid::new(ell, s_count)?,
            perturbed.state_at(t)?.positions.clone(),
        )?;
        let mut fig = SvgFigure::fit(&[
            overlay.x_minus.points(),
            overlay.x_plus.points(),
            kh_curve.points(),
        ]);
        fig.add_curve("kelvin-helmholtz sheet", "#7fbfff", kh_curve.points());
        fig.add_curve("zone boundary x+", "#1f3fbf", overlay.x_plus.points());
        fig.add_curve("zone boundary x-", "#1f3fbf", overlay.x_minus.points());
        write_file(&out.join(format!("zone_t{k}.svg")), &fig.render())?;
    }
    println!("wrote zone_t0.svg, zone_t1.svg, zone_t2.svg to out-zone/");
    Ok(())
}
