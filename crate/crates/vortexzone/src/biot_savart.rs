//! Biot–Savart kernels and the singular-integral operators living on the
//! sheet: velocity evaluation, desingularized Birkhoff–Rott operators,
//! Plemelj traces, circulation diagnostics, pressure jumps and the weighted
//! Hilbert transform.
//!
//! Principal values are never evaluated by point omission here. Every
//! operator goes through the subtracted integrands whose diagonal
//! singularity is removable, so the uniform-grid trapezoidal rule keeps its
//! spectral accuracy. The independent point-omission oracle lives in the
//! test suite only.

use crate::curve::{dot, ClosedCurve, ScalarField};
use crate::numerics::{spectral_derivative, KahanComplex, KahanSum};
use crate::{Complex, Error, Result};
use rayon::prelude::*;
use std::f64::consts::TAU;

/// 1/(2πi), the Cauchy kernel prefactor.
const INV_2PI_I: Complex = Complex::new(0.0, -1.0 / TAU);

/// Cauchy kernel K(x) = 1/(2πix).
pub fn cauchy_kernel(x: Complex) -> Result<Complex> {
    if x == Complex::new(0.0, 0.0) {
        return Err(Error::KernelSingularity);
    }
    Ok(INV_2PI_I / x)
}

/// Vortex-blob kernel K_δ(x) = K(x)·|x|²/(|x|²+δ²) = x̄ / (2πi(|x|²+δ²)).
///
/// Vanishes at x = 0, which is what silently drops the self-interaction
/// term from the blob sums.
pub fn blob_kernel(x: Complex, delta: f64) -> Complex {
    let d2 = x.norm_sqr() + delta * delta;
    if d2 == 0.0 {
        return Complex::new(0.0, 0.0);
    }
    INV_2PI_I * x.conj() / d2
}

/// One vortex sheet as seen by the velocity ansatz: a curve, a strength and
/// the 1/|Λ| weight it carries in the superposition.
#[derive(Debug, Clone)]
pub struct Sheet {
    pub curve: ClosedCurve,
    pub strength: ScalarField,
    pub weight: f64,
}

impl Sheet {
    pub fn new(curve: ClosedCurve, strength: ScalarField, weight: f64) -> Result<Self> {
        crate::curve::check_same_grid(curve.grid(), strength.grid())?;
        Ok(Self {
            curve,
            strength,
            weight,
        })
    }
}

/// One-sided Plemelj limits of the velocity on a sheet, together with their
/// mean (the Birkhoff–Rott value) and jump.
#[derive(Debug, Clone)]
pub struct TraceValues {
    pub plus: Vec<Complex>,
    pub minus: Vec<Complex>,
    pub mean: Vec<Complex>,
    pub jump: Vec<Complex>,
}

/// Sokhotski–Plemelj traces from a Birkhoff–Rott value and ζ = ϖ/∂_s x:
/// v± = B ∓ ζ̄/(2·sheet_count). The "+" side lies in the +ε ∂_s x^⊥
/// direction (the inner side of a positively oriented curve).
pub fn plemelj_traces(brvalue: &[Complex], zeta: &[Complex], sheet_count: usize) -> TraceValues {
    let half = 1.0 / (2.0 * sheet_count as f64);
    let mut plus = Vec::with_capacity(brvalue.len());
    let mut minus = Vec::with_capacity(brvalue.len());
    let mut jump = Vec::with_capacity(brvalue.len());
    for (b, z) in brvalue.iter().zip(zeta) {
        let off = z.conj() * half;
        plus.push(b - off);
        minus.push(b + off);
        jump.push(-z.conj() * (2.0 * half));
    }
    TraceValues {
        plus,
        minus,
        mean: brvalue.to_vec(),
        jump,
    }
}

struct SheetData {
    points: Vec<Complex>,
    dx: Vec<Complex>,
    d2x: Vec<Complex>,
    wt: Vec<f64>,
    dwt: Vec<f64>,
    zeta: Vec<Complex>,
}

impl SheetData {
    fn build(curve: &ClosedCurve, strength: &ScalarField) -> Result<Self> {
        crate::curve::check_same_grid(curve.grid(), strength.grid())?;
        let dx = curve.spectral_derivative(1)?.points().to_vec();
        let d2x = curve.spectral_derivative(2)?.points().to_vec();
        let dwt = strength.spectral_derivative(1)?.values().to_vec();
        let zeta = strength
            .values()
            .iter()
            .zip(&dx)
            .map(|(&w, d)| w / d)
            .collect();
        Ok(Self {
            points: curve.points().to_vec(),
            dx,
            d2x,
            wt: strength.values().to_vec(),
            dwt,
            zeta,
        })
    }
}

/// Contribution of one source sheet to the conjugate BR value at target
/// point x (parameter index i on the target sheet). `coincident` marks the
/// self term, where the node j = i uses the removable-singularity limit.
fn subtracted_sums(
    src: &SheetData,
    x: Complex,
    i: usize,
    coincident_allowed: bool,
) -> Result<(Complex, Complex)> {
    let mut tangent = KahanComplex::new();
    let mut strength = KahanComplex::new();
    for j in 0..src.points.len() {
        let d = src.points[j] - x;
        if d == Complex::new(0.0, 0.0) {
            if j == i && coincident_allowed {
                // lim_{s'→s} (∂x(s')-∂x(s))/(x(s')-x(s)) = ∂²x/∂x, and the
                // matching limit ∂ϖ/∂x for the strength quotient.
                tangent.add(src.d2x[i] / src.dx[i]);
                strength.add(Complex::new(src.dwt[i], 0.0) / src.dx[i]);
                continue;
            }
            return Err(Error::SheetsTouch(format!(
                "target node {i} meets source node {j}"
            )));
        }
        tangent.add((src.dx[j] - src.dx[i]) / d);
        strength.add(Complex::new(src.wt[j] - src.wt[i], 0.0) / d);
    }
    Ok((tangent.value(), strength.value()))
}

/// Desingularized Birkhoff–Rott operator on a single sheet.
///
/// Returns B₀ at every node: the conjugate is assembled from the two
/// subtracted quadratures and the explicit -ζ₀/2 term, so no principal
/// value is ever formed. A chord degeneracy in the denominators propagates
/// the chord-arc error.
pub fn br_single(z0: &ClosedCurve, strength: &ScalarField) -> Result<Vec<Complex>> {
    let data = SheetData::build(z0, strength)?;
    let n = z0.grid().len();
    let h = z0.grid().spacing();
    let floor = 1e-8;
    (0..n)
        .into_par_iter()
        .map(|i| {
            let x = data.points[i];
            // Degenerate chords mean the sampled curve self-intersects.
            for j in 0..n {
                if j != i {
                    let xi = z0.grid().offset(i, j).abs();
                    let chord = (data.points[j] - x).norm();
                    if chord < floor * xi {
                        return Err(Error::NotChordArc(chord / xi));
                    }
                }
            }
            let (tangent, strength_sum) = subtracted_sums(&data, x, i, true)?;
            let b_star = data.zeta[i] * INV_2PI_I * h * tangent - INV_2PI_I * h * strength_sum
                - 0.5 * data.zeta[i];
            Ok(b_star.conj())
        })
        .collect()
}

/// A sheet of a 2N-family labelled by its λ value.
pub struct LambdaSheet {
    pub lambda: f64,
    pub curve: ClosedCurve,
    pub strength: ScalarField,
}

/// Multi-sheet Birkhoff–Rott operator: B_λ on the sheet `target` of the
/// family. The μ = λ term is desingularized exactly as in [`br_single`];
/// μ ≠ λ terms are regular quadratures with the orientation weight
/// θ_{λ,μ} = (1 + sgn(t·(λ-μ)))/2.
///
/// The weight carries the sign of t because for t < 0 the sheet with label
/// λ occupies the position the sheet -λ holds for t > 0, which flips every
/// winding index. At t = 0 all sheets coincide, every θ becomes 1/2 and the
/// same code path returns the principal value; the one-sided limits
/// B₀ - λ c̄_N ζ₀̄ emerge from the t ≠ 0 evaluations.
pub fn br_multi_sheets(
    sheets: &[LambdaSheet],
    target: usize,
    time_orientation: f64,
) -> Result<Vec<Complex>> {
    let lam = sheets[target].lambda;
    let grid = sheets[target].curve.grid().clone();
    let h = grid.spacing();
    let count = sheets.len() as f64;
    let data: Vec<SheetData> = sheets
        .iter()
        .map(|s| {
            crate::curve::check_same_grid(s.curve.grid(), &grid)?;
            SheetData::build(&s.curve, &s.strength)
        })
        .collect::<Result<_>>()?;

    (0..grid.len())
        .into_par_iter()
        .map(|i| {
            let x = data[target].points[i];
            let mut acc = KahanComplex::new();
            for (mu_idx, src) in data.iter().enumerate() {
                let mu = sheets[mu_idx].lambda;
                let theta = 0.5 * (1.0 + sign(time_orientation) * sign(lam - mu));
                let (tangent, strength_sum) = subtracted_sums(src, x, i, true)?;
                acc.add(src.zeta[i] * INV_2PI_I * h * tangent);
                acc.add(-INV_2PI_I * h * strength_sum);
                acc.add(-theta * src.zeta[i]);
            }
            Ok((acc.value() / count).conj())
        })
        .collect()
}

fn sign(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Velocity induced by a collection of sheets at a point off the sheets.
///
/// Uses the index-subtracted form of the Biot–Savart integral with the
/// subtraction constant taken at the parameter of the nearest node, which
/// stays spectrally accurate down to a few grid spacings from the curve.
/// Inside half a grid spacing the quadrature degenerates and the caller is
/// told to use traces instead.
pub fn velocity_at(sheets: &[Sheet], x: Complex) -> Result<Complex> {
    let mut v_star = KahanComplex::new();
    for sheet in sheets {
        let data = SheetData::build(&sheet.curve, &sheet.strength)?;
        let n = data.points.len();
        let h = sheet.curve.grid().spacing();
        let (near, dist) = nearest_node(&data.points, x);
        let local_spacing = h * data.dx[near].norm();
        if dist < 0.5 * local_spacing {
            return Err(Error::TooCloseToSheet(dist));
        }
        let mut tangent = KahanComplex::new();
        let mut strength = KahanComplex::new();
        for j in 0..n {
            let d = x - data.points[j];
            tangent.add((data.dx[near] - data.dx[j]) / d);
            strength.add(Complex::new(data.wt[near] - data.wt[j], 0.0) / d);
        }
        let index = winding_number_raw(&data.points, x);
        let part = data.zeta[near] * INV_2PI_I * h * tangent.value()
            - INV_2PI_I * h * strength.value()
            - data.zeta[near] * index as f64;
        v_star.add(part * sheet.weight);
    }
    Ok(v_star.value().conj())
}

fn nearest_node(points: &[Complex], x: Complex) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (j, p) in points.iter().enumerate() {
        let d = (p - x).norm();
        if d < best.1 {
            best = (j, d);
        }
    }
    best
}

/// Winding number by summing the turning angles of the sampled polygon.
/// Robust for any point not on the polygon itself.
fn winding_number_raw(points: &[Complex], x: Complex) -> i32 {
    let n = points.len();
    let mut total = KahanSum::new();
    for j in 0..n {
        let a = points[j] - x;
        let b = points[(j + 1) % n] - x;
        total.add((b * a.conj()).arg());
    }
    (total.value() / TAU).round() as i32
}

/// Index of x with respect to a closed curve: 1 inside, 0 outside.
pub fn winding_index(curve: &ClosedCurve, x: Complex) -> Result<i32> {
    let (near, dist) = nearest_node(curve.points(), x);
    let local = curve.grid().spacing() * curve.spectral_derivative(1)?.points()[near].norm();
    if dist < 0.5 * local {
        return Err(Error::TooCloseToSheet(dist));
    }
    Ok(winding_number_raw(curve.points(), x))
}

/// Circulation ∮ v · dx of a sampled velocity field around a test curve.
pub fn circulation(
    field: &dyn Fn(Complex) -> Result<Complex>,
    test_curve: &ClosedCurve,
) -> Result<f64> {
    let d = test_curve.spectral_derivative(1)?;
    let h = test_curve.grid().spacing();
    let mut acc = KahanSum::new();
    for (p, t) in test_curve.points().iter().zip(d.points()) {
        acc.add(dot(field(*p)?, *t));
    }
    Ok(acc.value() * h)
}

/// Pressure jump across a sheet of a |Λ|-member family:
/// [p̄] = (1/|Λ|)(∂_t ϖ̃ - ϖ Re_{∂_s x}(∂_t x - B)).
pub fn pressure_jump_samples(
    brvalue: &[Complex],
    dx: &[Complex],
    wt: &[f64],
    dt_x: &[Complex],
    dt_wt: &[f64],
    sheet_count: usize,
) -> Vec<f64> {
    let inv = 1.0 / sheet_count as f64;
    (0..brvalue.len())
        .map(|i| {
            let rel = dt_x[i] - brvalue[i];
            let re_proj = dot(rel, dx[i]) / dx[i].norm_sqr();
            inv * (dt_wt[i] - wt[i] * re_proj)
        })
        .collect()
}

/// Bounded weight Φ(s, ξ) for the weighted Hilbert transform, sampled
/// lazily on a stated grid.
pub struct KernelWeight {
    grid: crate::curve::PeriodicGrid,
    sampler: Box<dyn Fn(f64, f64) -> Complex + Sync>,
}

impl KernelWeight {
    pub fn new(
        grid: crate::curve::PeriodicGrid,
        sampler: impl Fn(f64, f64) -> Complex + Sync + 'static,
    ) -> Self {
        Self {
            grid,
            sampler: Box::new(sampler),
        }
    }

    pub fn grid(&self) -> &crate::curve::PeriodicGrid {
        &self.grid
    }

    pub fn eval(&self, s: f64, xi: f64) -> Complex {
        (self.sampler)(s, xi)
    }

    /// The canonical weight Φ₀(s, ξ) = ξ / (z(s+ξ) - z(s)), with the
    /// removable value 1/∂_s z(s) at ξ = 0.
    pub fn cauchy_ratio(curve: &ClosedCurve) -> Result<Self> {
        let grid = curve.grid().clone();
        let n = grid.len();
        let h = grid.spacing();
        let length = grid.length();
        let points = curve.points().to_vec();
        let dz = curve.spectral_derivative(1)?.points().to_vec();
        let sampler = move |s: f64, xi: f64| {
            let i = (s / h).round() as i64;
            let k = (xi / h).round() as i64;
            debug_assert!((s - i as f64 * h).abs() < 1e-9 * length);
            debug_assert!((xi - k as f64 * h).abs() < 1e-9 * length);
            let i = i.rem_euclid(n as i64) as usize;
            if k.rem_euclid(n as i64) == 0 {
                return 1.0 / dz[i];
            }
            let j = (i as i64 + k).rem_euclid(n as i64) as usize;
            Complex::new(xi, 0.0) / (points[j] - points[i])
        };
        Ok(Self::new(grid, sampler))
    }
}

/// Weighted Hilbert transform T_Φ f(s) = (1/2πi) ∫ Δ_ξ f(s) Φ(s, ξ) dξ.
///
/// The coincident node uses the removable limit Δ₀ f = ∂_s f.
pub fn weighted_hilbert(f: &[Complex], phi: &KernelWeight) -> Result<Vec<Complex>> {
    let grid = phi.grid();
    let n = grid.len();
    if f.len() != n {
        return Err(Error::GridMismatch(format!(
            "{} samples on a {}-node kernel grid",
            f.len(),
            n
        )));
    }
    let h = grid.spacing();
    let df = spectral_derivative(f, grid.length(), 1);
    let out: Vec<Complex> = (0..n)
        .into_par_iter()
        .map(|i| {
            let s = grid.node(i);
            let mut acc = KahanComplex::new();
            for j in 0..n {
                let xi = grid.offset(i, j);
                let w = phi.eval(s, xi);
                let quotient = if j == i {
                    df[i]
                } else {
                    (f[j] - f[i]) / xi
                };
                acc.add(quotient * w);
            }
            INV_2PI_I * h * acc.value()
        })
        .collect();
    if let Some(v) = out.iter().find(|v| !v.re.is_finite() || !v.im.is_finite()) {
        return Err(Error::NonFinite(format!("weighted Hilbert output {v}")));
    }
    Ok(out)
}

/// Scalar-field convenience wrapper for [`weighted_hilbert`].
pub fn weighted_hilbert_field(f: &ScalarField, phi: &KernelWeight) -> Result<Vec<Complex>> {
    let complex: Vec<Complex> = f.values().iter().map(|&v| Complex::new(v, 0.0)).collect();
    weighted_hilbert(&complex, phi)
}
