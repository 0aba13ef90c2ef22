//! Energy-dissipation functionals on a mixed-sign strength: the closed-form
//! maximizer, the interval lower bound and the flat-interface fan rates.
//!
//!     cargo run --release --example dissipation_report

use vortexzone::curve::{ClosedCurve, ScalarField};
use vortexzone::dissipation::{
    an_cn_f64, expansion_rate, fan_dissipation_rate, fan_profile, initial_dissipation_density,
    ratio_to_f64, w_functional, w_lower_bound, w_max, FanOrder,
};
use vortexzone::Result;

fn main() -> Result<()> {
    let n_pairs = 2;
    let z0 = ClosedCurve::circle(1.0, 256)?;
    let ell = z0.grid().length();
    // Mixed-sign strength: the functionals only see |ϖ₀|.
    let wt0 = ScalarField::from_fn(z0.grid().clone(), |s| 0.25 * (2.0 * s).cos())?;

    let (a_n, c_n) = an_cn_f64(n_pairs)?;
    println!("sheet pairs N = {n_pairs}:  a_N = {a_n:.6}, c_N = {c_n:.6}");

    let (c, degenerate) = expansion_rate(&wt0, n_pairs, 0.5, ell / 20.0)?;
    println!(
        "expansion rate c = (1/2) c_N |w0| * eta:  min {:.4}, max {:.4}, degenerate: {degenerate}",
        c.values().iter().cloned().fold(f64::INFINITY, f64::min),
        c.values().iter().cloned().fold(0.0, f64::max),
    );

    let w = w_functional(&wt0, &c, n_pairs, (0.0, ell))?;
    let (_, w_best) = w_max(&wt0, n_pairs)?;
    println!("W(c) = {w:.6e},  max W = {w_best:.6e}");

    let lower = w_lower_bound(&wt0, n_pairs, 0.5, ell / 10.0, ell / 8.0)?;
    println!(
        "interval lower bound holds at eps = {:?} over {} intervals",
        lower.eps,
        lower.intervals.len()
    );

    let density = initial_dissipation_density(&z0, &wt0, &c, n_pairs)?;
    println!(
        "leading dissipation density integrates to {:.6e} (matches W to {:.1e})",
        density.integral,
        (density.integral - w).abs()
    );

    println!("\nfan subsolution at c = c_N (optimal):");
    let profile = fan_profile(n_pairs, c_n, 0.0)?;
    for band in &profile.bands {
        println!(
            "  x2/(ct) in [{:+.3}, {:+.3}]  alpha = {:+.3}  gamma = {:+.4}  e = {:.4}",
            band.lower, band.upper, band.alpha, band.gamma, band.energy
        );
    }
    for order in [FanOrder::Finite(n_pairs), FanOrder::Infinite] {
        let rate = fan_dissipation_rate(order, c_n)?;
        println!("  rate({order:?}, c = c_N) = {rate:.6}");
    }
    let opt = vortexzone::dissipation::fan_dissipation_rate_rational(
        n_pairs,
        vortexzone::dissipation::an_cn(n_pairs)?.1,
    )?;
    println!(
        "  exact optimum (1/6)(1 - 1/(2N)^2) = {} = {:.6}",
        opt,
        ratio_to_f64(opt)
    );
    Ok(())
}
