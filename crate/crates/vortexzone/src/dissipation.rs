//! Energy-dissipation functionals and the flat-interface fan calculator.
//!
//! The finite-N combinatorics (grid means, Faulhaber sums, optimal rates)
//! are exact in rational arithmetic; floating quadrature only enters where a
//! genuine strength field ϖ₀ does.

use crate::biot_savart::br_single;
use crate::curve::{dot, ClosedCurve, ScalarField};
use crate::numerics::KahanSum;
use crate::{Complex, Error, Result};
use num_rational::Ratio;
use num_traits::{One, Signed, Zero};

/// Exact rational scalar for the fan/grid identities.
pub type Rational = Ratio<i128>;

/// The pair (ā_N, c̄_N) = ((2N+1)/(3(2N-1)), (2N-1)/(4N)), exact.
pub fn an_cn(n: usize) -> Result<(Rational, Rational)> {
    if n < 1 {
        return Err(Error::InvalidSheetCount(n));
    }
    let n = n as i128;
    let a = Rational::new(2 * n + 1, 3 * (2 * n - 1));
    let c = Rational::new(2 * n - 1, 4 * n);
    Ok((a, c))
}

/// Floating-point version of [`an_cn`].
pub fn an_cn_f64(n: usize) -> Result<(f64, f64)> {
    let (a, c) = an_cn(n)?;
    Ok((ratio_to_f64(a), ratio_to_f64(c)))
}

pub fn ratio_to_f64(r: Rational) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// The λ-grid of 2N values λ_{±j} = ±(2j-1)/(2N-1), sorted ascending with
/// λ_N = 1.
pub fn lambda_grid(n: usize) -> Result<Vec<f64>> {
    Ok(lambda_grid_rational(n)?
        .into_iter()
        .map(ratio_to_f64)
        .collect())
}

pub fn lambda_grid_rational(n: usize) -> Result<Vec<Rational>> {
    if n < 1 {
        return Err(Error::InvalidSheetCount(n));
    }
    let n = n as i128;
    let mut grid = Vec::with_capacity(2 * n as usize);
    for j in (1..=n).rev() {
        grid.push(-Rational::new(2 * j - 1, 2 * n - 1));
    }
    for j in 1..=n {
        grid.push(Rational::new(2 * j - 1, 2 * n - 1));
    }
    Ok(grid)
}

/// Grid mean (1/|Λ|) Σ λ², which equals ā_N exactly.
pub fn lambda_grid_mean_square(n: usize) -> Result<Rational> {
    let grid = lambda_grid_rational(n)?;
    let sum: Rational = grid.iter().map(|l| l * l).sum();
    Ok(sum / Rational::from_integer(grid.len() as i128))
}

/// Faulhaber sum Σ_{1≤|j|≤N} λ_j [α²]_{λ_j} = (2/3)(2N+1)/N, exact.
pub fn faulhaber_jump_sum(n: usize) -> Result<Rational> {
    if n < 1 {
        return Err(Error::InvalidSheetCount(n));
    }
    let n = n as i128;
    let mut sum = Rational::zero();
    for j in 1..=n {
        // λ_j [α²]_{λ_j} = (2j-1)² / ((2N-1)N²), once per sign.
        sum += Rational::new((2 * j - 1) * (2 * j - 1), (2 * n - 1) * n * n) * 2;
    }
    Ok(sum)
}

/// Dissipation functional W^{(N)}_I(c) = ā_N ∫_I c|ϖ₀|(c̄_N|ϖ₀| - c) ds,
/// restricted to the sub-arc of nodes with s ∈ [start, start+len).
pub fn w_functional(
    wt0: &ScalarField,
    c: &ScalarField,
    n_pairs: usize,
    interval: (f64, f64),
) -> Result<f64> {
    crate::curve::check_same_grid(wt0.grid(), c.grid())?;
    let (a_n, c_n) = an_cn_f64(n_pairs)?;
    let (start, len) = interval;
    let ell = wt0.grid().length();
    if !(len > 0.0 && len <= ell) {
        return Err(Error::InvalidParameter {
            name: "interval length",
            value: len,
            expected: "(0, ℓ]",
        });
    }
    let h = wt0.grid().spacing();
    let mut acc = KahanSum::new();
    for ((s, &w), &cv) in wt0.grid().nodes().zip(wt0.values()).zip(c.values()) {
        let rel = (s - start).rem_euclid(ell);
        if rel < len {
            acc.add(cv * w.abs() * (c_n * w.abs() - cv));
        }
    }
    Ok(a_n * acc.value() * h)
}

/// Closed-form global maximizer c_max = (1/2) c̄_N |ϖ₀| of W over the full
/// period, with the maximum value evaluated by the same quadrature.
pub fn w_max(wt0: &ScalarField, n_pairs: usize) -> Result<(ScalarField, f64)> {
    let (_, c_n) = an_cn_f64(n_pairs)?;
    let c_max = wt0.map(|w| 0.5 * c_n * w.abs())?;
    let ell = wt0.grid().length();
    let value = w_functional(wt0, &c_max, n_pairs, (0.0, ell))?;
    Ok((c_max, value))
}

/// Expansion rate c = δ c̄_N (|ϖ₀| ∗ η_ε).
///
/// Returns the field together with a degeneracy warning flag: two-sheet
/// operators need min c > 0, but a vanishing c is not an error here.
pub fn expansion_rate(
    wt0: &ScalarField,
    n_pairs: usize,
    fraction: f64,
    eps: f64,
) -> Result<(ScalarField, bool)> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(Error::InvalidParameter {
            name: "fraction",
            value: fraction,
            expected: "(0, 1)",
        });
    }
    let (_, c_n) = an_cn_f64(n_pairs)?;
    let c = wt0.map(f64::abs)?.mollify(eps)?.map(|v| fraction * c_n * v)?;
    let min_c = c.values().iter().cloned().fold(f64::INFINITY, f64::min);
    Ok((c, min_c <= 0.0))
}

/// Result of the interval sweep for the dissipation lower bound.
#[derive(Debug, Clone)]
pub struct IntervalCheck {
    pub start: f64,
    pub len: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

#[derive(Debug, Clone)]
pub struct LowerBoundReport {
    /// First eps in the halving sweep for which all tested intervals pass.
    pub eps: Option<f64>,
    pub intervals: Vec<IntervalCheck>,
}

/// Sweep of W_I(c) ≥ (1/2)δ(1-δ) ā_N c̄_N² ⨍_I |ϖ₀|³ over all grid-aligned
/// intervals of length ≥ min_interval, with c rebuilt by [`expansion_rate`]
/// at eps, eps/2, eps/4, … down to the node spacing. The left side is the
/// plain integral and the right side the interval average, as stated.
pub fn w_lower_bound(
    wt0: &ScalarField,
    n_pairs: usize,
    fraction: f64,
    eps: f64,
    min_interval: f64,
) -> Result<LowerBoundReport> {
    let (a_n, c_n) = an_cn_f64(n_pairs)?;
    let prefactor = 0.5 * fraction * (1.0 - fraction) * a_n * c_n * c_n;
    let grid = wt0.grid();
    let n = grid.len();
    let h = grid.spacing();
    let cube = wt0.map(|w| w.abs().powi(3))?;
    // Interval starts are swept on a stride-4 subgrid; lengths run from
    // min_interval to the full period.
    let min_nodes = (min_interval / h).ceil().max(1.0) as usize;

    let mut eps_k = eps;
    loop {
        let (c, _) = expansion_rate(wt0, n_pairs, fraction, eps_k)?;
        let integrand = wt0.zip(&c, |w, cv| cv * w.abs() * (c_n * w.abs() - cv))?;
        let mut intervals = Vec::new();
        let mut all_hold = true;
        for m in min_nodes..=n {
            let len = m as f64 * h;
            for i in (0..n).step_by(4) {
                let mut lhs = KahanSum::new();
                let mut avg = KahanSum::new();
                for k in 0..m {
                    let j = (i + k) % n;
                    lhs.add(integrand.values()[j]);
                    avg.add(cube.values()[j]);
                }
                let lhs = a_n * lhs.value() * h;
                let rhs = prefactor * avg.value() * h / len;
                let holds = lhs >= rhs - 1e-12;
                if !holds {
                    all_hold = false;
                }
                intervals.push(IntervalCheck {
                    start: grid.node(i),
                    len,
                    lhs,
                    rhs,
                    holds,
                });
            }
        }
        if all_hold {
            return Ok(LowerBoundReport {
                eps: Some(eps_k),
                intervals,
            });
        }
        if eps_k / 2.0 <= h {
            return Ok(LowerBoundReport {
                eps: None,
                intervals,
            });
        }
        eps_k /= 2.0;
    }
}

/// One constant band of a fan profile in the similarity variable
/// u = x₂/(ct); the outermost bands extend to ±∞.
#[derive(Debug, Clone)]
pub struct FanBand {
    pub lower: f64,
    pub upper: f64,
    pub alpha: f64,
    pub gamma: f64,
    pub energy: f64,
}

/// Piecewise-constant fan subsolution of the flat interface, self-similar in
/// x₂/(ct): α = ±j/N between the λ_j and λ_{j+1} lines, γ determined by the
/// jump conditions, e = α²/2 + |γ| + e'.
#[derive(Debug, Clone)]
pub struct FanProfile {
    pub n_pairs: usize,
    pub c: f64,
    pub e_prime: f64,
    pub bands: Vec<FanBand>,
}

pub fn fan_profile(n_pairs: usize, c: f64, e_prime: f64) -> Result<FanProfile> {
    if !(c > 0.0) {
        return Err(Error::InvalidParameter {
            name: "c",
            value: c,
            expected: "(0, ∞)",
        });
    }
    let lam = lambda_grid(n_pairs)?;
    let n = n_pairs as f64;
    let gamma_of = |alpha: f64| -(n / (2.0 * n - 1.0)) * c * (1.0 - alpha * alpha);
    let mut bands = Vec::new();
    let mut push = |lower: f64, upper: f64, alpha: f64| {
        let gamma = if alpha.abs() >= 1.0 { 0.0 } else { gamma_of(alpha) };
        bands.push(FanBand {
            lower,
            upper,
            alpha,
            gamma,
            energy: 0.5 * alpha * alpha + gamma.abs() + e_prime,
        });
    };
    push(f64::NEG_INFINITY, -lam[2 * n_pairs - 1], -1.0);
    for j in (1..n_pairs).rev() {
        push(-lam[n_pairs + j], -lam[n_pairs + j - 1], -(j as f64) / n);
    }
    push(-lam[n_pairs], lam[n_pairs], 0.0);
    for j in 1..n_pairs {
        push(lam[n_pairs + j - 1], lam[n_pairs + j], j as f64 / n);
    }
    push(lam[2 * n_pairs - 1], f64::INFINITY, 1.0);
    Ok(FanProfile {
        n_pairs,
        c,
        e_prime,
        bands,
    })
}

/// Rankine–Hugoniot residuals λ_j c [α] - [γ] across every interface line,
/// exact in rational arithmetic with c = 1 (both sides scale linearly in c).
pub fn fan_jump_residuals(n_pairs: usize) -> Result<Vec<Rational>> {
    if n_pairs < 1 {
        return Err(Error::InvalidSheetCount(n_pairs));
    }
    let n = n_pairs as i128;
    let gamma = |alpha: Rational| -> Rational {
        if alpha.abs() >= Rational::one() {
            Rational::zero()
        } else {
            -Rational::new(n, 2 * n - 1) * (Rational::one() - alpha * alpha)
        }
    };
    let mut residuals = Vec::new();
    for j in 1..=n {
        let lambda_j = Rational::new(2 * j - 1, 2 * n - 1);
        let alpha_below = Rational::new(j - 1, n);
        let alpha_above = Rational::new(j, n);
        let jump_alpha = alpha_above - alpha_below;
        let jump_gamma = gamma(alpha_above) - gamma(alpha_below);
        // Positive and negative lines give the same residual by symmetry.
        residuals.push(lambda_j * jump_alpha - jump_gamma);
    }
    Ok(residuals)
}

/// Number of vorticity lines in the fan: finite 2N or the N → ∞
/// rarefaction limit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FanOrder {
    Finite(usize),
    Infinite,
}

/// Initial energy dissipation rate of the fan per unit interface length:
/// 2 ā_N c (2c̄_N - c), with limit (2/3) c (1 - c) as N → ∞.
pub fn fan_dissipation_rate(order: FanOrder, c: f64) -> Result<f64> {
    match order {
        FanOrder::Finite(n) => {
            let (a_n, c_n) = an_cn_f64(n)?;
            Ok(2.0 * a_n * c * (2.0 * c_n - c))
        }
        FanOrder::Infinite => Ok(2.0 / 3.0 * c * (1.0 - c)),
    }
}

/// Exact rational rate for finite N, used by the optimum identities.
pub fn fan_dissipation_rate_rational(n: usize, c: Rational) -> Result<Rational> {
    let (a_n, c_n) = an_cn(n)?;
    Ok(Rational::from_integer(2) * a_n * c * (Rational::from_integer(2) * c_n - c))
}

/// Exact rarefaction-limit rate (2/3)c(1-c).
pub fn fan_dissipation_rate_infinite_rational(c: Rational) -> Rational {
    Rational::new(2, 3) * c * (Rational::one() - c)
}

/// Leading-order dissipation density of the curved construction.
#[derive(Debug, Clone)]
pub struct DissipationDensity {
    /// (λ, density samples) for every λ in the grid.
    pub per_lambda: Vec<(f64, Vec<f64>)>,
    /// -Σ_λ sgn(λ)·density_λ; the B₀ term cancels and this reduces to
    /// ā_N c|ϖ₀|(c̄_N|ϖ₀| - c) pointwise.
    pub combined: Vec<f64>,
    /// ∫ combined ds, which matches W_T^{(N)}(c).
    pub integral: f64,
    /// Nodes where |ϖ₀| vanishes (degenerate-strength warning).
    pub degenerate_nodes: usize,
}

/// Per-sheet leading dissipation densities
/// (|λ|/|Λ|) c |ϖ₀| (λ(c - c̄_N|ϖ₀|) + B₀) with
/// B₀ = B₀·((sgn ϖ₀ + i)∂_s z₀), and their orientation-signed sum.
pub fn initial_dissipation_density(
    z0: &ClosedCurve,
    wt0: &ScalarField,
    c: &ScalarField,
    n_pairs: usize,
) -> Result<DissipationDensity> {
    crate::curve::check_same_grid(z0.grid(), wt0.grid())?;
    crate::curve::check_same_grid(z0.grid(), c.grid())?;
    let (_, c_n) = an_cn_f64(n_pairs)?;
    let lam = lambda_grid(n_pairs)?;
    let count = lam.len() as f64;
    let b = br_single(z0, wt0)?;
    let dz = z0.spectral_derivative(1)?;
    let n = z0.grid().len();
    let degenerate_nodes = wt0.values().iter().filter(|w| w.abs() == 0.0).count();

    let b0: Vec<f64> = (0..n)
        .map(|i| {
            let sgn = if wt0.values()[i] > 0.0 {
                1.0
            } else if wt0.values()[i] < 0.0 {
                -1.0
            } else {
                0.0
            };
            let dir = dz.points()[i] * Complex::new(sgn, 1.0);
            dot(b[i], dir)
        })
        .collect();

    let mut per_lambda = Vec::with_capacity(lam.len());
    for &l in &lam {
        let density: Vec<f64> = (0..n)
            .map(|i| {
                let w = wt0.values()[i].abs();
                let cv = c.values()[i];
                (l.abs() / count) * cv * w * (l * (cv - c_n * w) + b0[i])
            })
            .collect();
        per_lambda.push((l, density));
    }

    let combined: Vec<f64> = (0..n)
        .map(|i| {
            let mut acc = KahanSum::new();
            for (l, density) in &per_lambda {
                acc.add(-l.signum() * density[i]);
            }
            acc.value()
        })
        .collect();
    let h = z0.grid().spacing();
    let integral = KahanSum::sum_iter(combined.iter().copied()) * h;
    Ok(DissipationDensity {
        per_lambda,
        combined,
        integral,
        degenerate_nodes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::PeriodicGrid;
    use std::f64::consts::TAU;

    #[test]
    fn an_cn_values() {
        assert_eq!(an_cn(1).unwrap(), (Rational::one(), Rational::new(1, 4)));
        assert_eq!(
            an_cn(2).unwrap(),
            (Rational::new(5, 9), Rational::new(3, 8))
        );
        assert!(an_cn(0).is_err());
        // N → ∞ limits (1/3, 1/2).
        let (a, c) = an_cn_f64(100_000_000).unwrap();
        assert!((a - 1.0 / 3.0).abs() < 1e-8);
        assert!((c - 0.5).abs() < 1e-8);
    }

    #[test]
    fn lambda_grids() {
        assert_eq!(lambda_grid(1).unwrap(), vec![-1.0, 1.0]);
        assert_eq!(
            lambda_grid(2).unwrap(),
            vec![-1.0, -1.0 / 3.0, 1.0 / 3.0, 1.0]
        );
        let g3 = lambda_grid(3).unwrap();
        assert_eq!(g3, vec![-1.0, -0.6, -0.2, 0.2, 0.6, 1.0]);
        for n in 1..=20 {
            let g = lambda_grid(n).unwrap();
            assert_eq!(g.len(), 2 * n);
            assert_eq!(*g.last().unwrap(), 1.0);
            for j in 0..n {
                assert_eq!(g[j], -g[2 * n - 1 - j]);
            }
        }
    }

    #[test]
    fn grid_mean_square_is_a_n() {
        for n in 1..=50 {
            let (a_n, _) = an_cn(n).unwrap();
            assert_eq!(lambda_grid_mean_square(n).unwrap(), a_n, "N = {n}");
        }
    }

    #[test]
    fn theta_sum_identity_exact() {
        // (1/|Λ|) Σ_μ (1 + sgn(λ-μ))/2 = 1/2 + λ c̄_N, exactly, for N ≤ 20.
        for n in 1..=20 {
            let grid = lambda_grid_rational(n).unwrap();
            let (_, c_n) = an_cn(n).unwrap();
            let count = Rational::from_integer(grid.len() as i128);
            for &l in &grid {
                let mut sum = Rational::zero();
                for &mu in &grid {
                    let sgn = match l.cmp(&mu) {
                        std::cmp::Ordering::Greater => Rational::one(),
                        std::cmp::Ordering::Less => -Rational::one(),
                        std::cmp::Ordering::Equal => Rational::zero(),
                    };
                    sum += (Rational::one() + sgn) / 2;
                }
                assert_eq!(sum / count, Rational::new(1, 2) + l * c_n, "N = {n}, λ = {l}");
            }
        }
    }

    #[test]
    fn faulhaber_identity_exact() {
        for n in 1..=50 {
            let expect = Rational::new(2 * (2 * n as i128 + 1), 3 * n as i128);
            assert_eq!(faulhaber_jump_sum(n).unwrap(), expect, "N = {n}");
        }
    }

    #[test]
    fn w_functional_flat_case() {
        let grid = PeriodicGrid::new(TAU, 64).unwrap();
        let wt = ScalarField::constant(grid.clone(), 2.0).unwrap();
        let c = ScalarField::constant(grid.clone(), 0.25).unwrap();
        let w = w_functional(&wt, &c, 1, (0.0, TAU)).unwrap();
        // integrand (1/4)·2·(1/2 - 1/4) = 1/8 over a 2π period
        assert!((w - std::f64::consts::PI / 4.0).abs() < 1e-12);
        // Vanishing factors.
        let c_star = ScalarField::constant(grid.clone(), 0.25 * 2.0).unwrap();
        assert!(w_functional(&wt, &c_star, 1, (0.0, TAU)).unwrap().abs() < 1e-12);
        let zero = ScalarField::constant(grid, 0.0).unwrap();
        assert!(w_functional(&wt, &zero, 1, (0.0, TAU)).unwrap().abs() < 1e-12);
    }

    #[test]
    fn w_max_closed_forms() {
        let grid = PeriodicGrid::new(TAU, 128).unwrap();
        let wt = ScalarField::constant(grid.clone(), 2.0).unwrap();
        // N = 1: per unit length (1/48)(3/4)·8 = 1/8.
        let (_, v1) = w_max(&wt, 1).unwrap();
        assert!((v1 / TAU - 0.125).abs() < 1e-12);
        // Large N approaches 8/48 = 1/6 per unit length.
        let (_, vinf) = w_max(&wt, 4_000).unwrap();
        assert!((vinf / TAU - 1.0 / 6.0).abs() < 1e-7);
    }

    #[test]
    fn w_concavity_at_maximizer() {
        let grid = PeriodicGrid::new(TAU, 128).unwrap();
        let wt = ScalarField::from_fn(grid.clone(), |s| 1.0 + 0.5 * s.sin()).unwrap();
        let (c_max, w_star) = w_max(&wt, 3).unwrap();
        for k in 0..5 {
            let psi = ScalarField::from_fn(grid.clone(), |s| {
                0.05 * ((k as f64 + 2.0) * s).cos()
            })
            .unwrap();
            for sign in [-1.0, 1.0] {
                let c = c_max.zip(&psi, |a, b| a + sign * b).unwrap();
                let w = w_functional(&wt, &c, 3, (0.0, TAU)).unwrap();
                assert!(w <= w_star + 1e-12);
            }
        }
    }

    #[test]
    fn expansion_rate_basics() {
        let grid = PeriodicGrid::new(TAU, 128).unwrap();
        let wt = ScalarField::constant(grid.clone(), 2.0).unwrap();
        let (c, warn) = expansion_rate(&wt, 1, 0.5, 0.3).unwrap();
        assert!(!warn);
        for v in c.values() {
            assert!((v - 0.25).abs() < 1e-12);
        }
        assert!(expansion_rate(&wt, 1, 1.0, 0.3).is_err());
        assert!(expansion_rate(&wt, 1, 0.0, 0.3).is_err());
        let cos = ScalarField::from_fn(grid, f64::cos).unwrap();
        let (c2, _) = expansion_rate(&cos, 1, 0.5, TAU / 20.0).unwrap();
        let min = c2.values().iter().cloned().fold(f64::INFINITY, f64::min);
        assert!(min > 0.0, "mollified |cos| should be positive, min {min}");
    }

    #[test]
    fn lower_bound_constant_strength() {
        let grid = PeriodicGrid::new(TAU, 128).unwrap();
        let wt = ScalarField::constant(grid, 2.0).unwrap();
        let report = w_lower_bound(&wt, 1, 0.5, 0.5, TAU / 8.0).unwrap();
        assert_eq!(report.eps, Some(0.5));
        assert!(report.intervals.iter().all(|i| i.holds));
    }

    #[test]
    fn lower_bound_cosine_finds_eps() {
        let grid = PeriodicGrid::new(TAU, 128).unwrap();
        let wt = ScalarField::from_fn(grid, f64::cos).unwrap();
        let report = w_lower_bound(&wt, 1, 0.5, TAU / 10.0, TAU / 8.0).unwrap();
        assert!(report.eps.is_some(), "no passing eps found");
    }

    #[test]
    fn fraction_half_maximizes_prefactor() {
        let f = |d: f64| d * (1.0 - d);
        assert!(f(0.5) > f(0.3));
        assert!(f(0.5) > f(0.7));
    }

    #[test]
    fn fan_profile_n1() {
        let p = fan_profile(1, 0.25, 0.0).unwrap();
        assert_eq!(p.bands.len(), 3);
        assert_eq!(p.bands[1].alpha, 0.0);
        assert!((p.bands[1].gamma + 0.25).abs() < 1e-15); // γ = -c in the zone
        assert_eq!(p.bands[0].alpha, -1.0);
        assert_eq!(p.bands[0].gamma, 0.0);
        assert_eq!(p.bands[2].alpha, 1.0);
    }

    #[test]
    fn fan_profile_n2() {
        let p = fan_profile(2, 1.0, 0.0).unwrap();
        let alphas: Vec<f64> = p.bands.iter().map(|b| b.alpha).collect();
        assert_eq!(alphas, vec![-1.0, -0.5, 0.0, 0.5, 1.0]);
        for b in &p.bands {
            if b.alpha.abs() < 1.0 {
                let expect = -(2.0 / 3.0) * (1.0 - b.alpha * b.alpha);
                assert!((b.gamma - expect).abs() < 1e-15);
            }
            assert!((b.energy - (0.5 * b.alpha * b.alpha + b.gamma.abs())).abs() < 1e-15);
        }
        // Interfaces at the λ-grid lines.
        assert!((p.bands[2].upper - 1.0 / 3.0).abs() < 1e-15);
        assert!((p.bands[3].upper - 1.0).abs() < 1e-15);
    }

    #[test]
    fn fan_jump_conditions_exact() {
        for n in 1..=20 {
            for r in fan_jump_residuals(n).unwrap() {
                assert!(r.is_zero(), "N = {n}: residual {r}");
            }
        }
    }

    #[test]
    fn fan_rates() {
        assert!((fan_dissipation_rate(FanOrder::Finite(1), 0.25).unwrap() - 0.125).abs() < 1e-15);
        assert_eq!(
            fan_dissipation_rate_infinite_rational(Rational::new(1, 2)),
            Rational::new(1, 6)
        );
        // Optimum at c = c̄_N with value (1/6)(1 - 1/(2N)²), exact.
        for n in 1..=50 {
            let (_, c_n) = an_cn(n).unwrap();
            let opt = fan_dissipation_rate_rational(n, c_n).unwrap();
            let nn = n as i128;
            let expect = Rational::new(1, 6)
                * (Rational::one() - Rational::new(1, 4 * nn * nn));
            assert_eq!(opt, expect, "N = {n}");
            // Nearby rational c gives a strictly smaller rate.
            let nearby = c_n + Rational::new(1, 100);
            assert!(fan_dissipation_rate_rational(n, nearby).unwrap() < opt);
        }
    }

    #[test]
    fn fan_rate_approaches_rarefaction_limit() {
        for k in 1..=9 {
            let c = k as f64 / 10.0;
            let finite = fan_dissipation_rate(FanOrder::Finite(1_000_000), c).unwrap();
            let limit = fan_dissipation_rate(FanOrder::Infinite, c).unwrap();
            assert!((finite - limit).abs() <= 1e-6, "c = {c}");
        }
    }

    #[test]
    fn density_combined_matches_w() {
        let n = 256;
        let z = ClosedCurve::circle(1.0, n).unwrap();
        let wt = ScalarField::from_fn(z.grid().clone(), |s| 2.0 + 0.5 * (2.0 * s).cos()).unwrap();
        let (c, _) = expansion_rate(&wt, 2, 0.5, 0.4).unwrap();
        let density = initial_dissipation_density(&z, &wt, &c, 2).unwrap();
        let w = w_functional(&wt, &c, 2, (0.0, TAU)).unwrap();
        assert!(
            (density.integral - w).abs() < 1e-8,
            "{} vs {}",
            density.integral,
            w
        );
        assert_eq!(density.degenerate_nodes, 0);
    }

    #[test]
    fn density_b0_term_cancels() {
        let n = 128;
        let z = ClosedCurve::circle(1.0, n).unwrap();
        let wt = ScalarField::from_fn(z.grid().clone(), |s| 1.0 + 0.3 * s.sin()).unwrap();
        let (c, _) = expansion_rate(&wt, 3, 0.5, 0.4).unwrap();
        let density = initial_dissipation_density(&z, &wt, &c, 3).unwrap();
        let (a_n, c_n) = an_cn_f64(3).unwrap();
        for i in 0..n {
            let w = wt.values()[i].abs();
            let cv = c.values()[i];
            let expect = a_n * cv * w * (c_n * w - cv);
            assert!(
                (density.combined[i] - expect).abs() < 1e-12,
                "node {i}: {} vs {expect}",
                density.combined[i]
            );
        }
    }

    #[test]
    fn density_even_under_sign_flip() {
        let n = 128;
        let z = ClosedCurve::circle(1.0, n).unwrap();
        let wt = ScalarField::from_fn(z.grid().clone(), |s| 0.8 + 0.4 * (3.0 * s).cos()).unwrap();
        let flipped = wt.map(|v| -v).unwrap();
        let (c, _) = expansion_rate(&wt, 2, 0.5, 0.4).unwrap();
        let a = initial_dissipation_density(&z, &wt, &c, 2).unwrap();
        let b = initial_dissipation_density(&z, &flipped, &c, 2).unwrap();
        for i in 0..n {
            assert!((a.combined[i] - b.combined[i]).abs() < 1e-12);
        }
    }
}
