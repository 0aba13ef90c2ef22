//! The explicit order-3 construction of the evolving interface, its
//! turbulence-zone map and boundary data.
//!
//! The interface z(t) and the strength correction ϖ̃(t) are built as Taylor
//! polynomials in t. Order 1 is the Birkhoff–Rott velocity itself; orders 2
//! and 3 are chosen so the mean boundary datum ⟨b⟩(t) matches t·∂_s(q ∂_s z)
//! through O(t²), which is what keeps the Reynolds stress bounded as the
//! zone collapses. The Taylor coefficients of the λ-mean of B_λ have no
//! closed form, so they are extracted from the multi-sheet operator by
//! centered differences in t with Richardson extrapolation; the
//! kernel-expansion route would compute the same numbers operator by
//! operator at considerably more code.

use crate::biot_savart::{br_multi_sheets, br_single, pressure_jump_samples, LambdaSheet};
use crate::curve::{check_same_grid, dot, perp, ClosedCurve, ScalarField};
use crate::dissipation::{an_cn_f64, lambda_grid};
use crate::numerics::{spectral_derivative, KahanComplex};
use crate::{Complex, Error, Result};

/// Fraction of the period used as the base finite-difference step when
/// extracting Taylor coefficients of the Birkhoff–Rott mean.
const FD_STEP_FRACTION: f64 = 1e-2;

/// Taylor coefficients (z⁽⁰⁾…z⁽³⁾, ϖ̃⁽⁰⁾…ϖ̃⁽³⁾) of the constructed
/// interface. ϖ̃⁽⁰⁾ = ϖ̃⁽¹⁾ = 0 always.
#[derive(Debug, Clone)]
pub struct TaylorCurve {
    z: [ClosedCurve; 4],
    wt: [ScalarField; 4],
}

impl TaylorCurve {
    pub fn new(z: [ClosedCurve; 4], wt: [ScalarField; 4]) -> Result<Self> {
        let grid = z[0].grid().clone();
        for zi in &z {
            check_same_grid(zi.grid(), &grid)?;
        }
        for wi in &wt {
            check_same_grid(wi.grid(), &grid)?;
        }
        if wt[0].values().iter().any(|&v| v != 0.0)
            || wt[1].values().iter().any(|&v| v != 0.0)
        {
            return Err(Error::InvalidGrid(
                "strength coefficients of order 0 and 1 must vanish".into(),
            ));
        }
        Ok(Self { z, wt })
    }

    /// Order-1 truncation from the base curve and its first coefficient.
    pub fn order1(z0: ClosedCurve, z1: ClosedCurve) -> Result<Self> {
        let grid = z0.grid().clone();
        let zero = ScalarField::constant(grid.clone(), 0.0)?;
        let zero_curve = ClosedCurve::new(grid, vec![Complex::default(); z0.grid().len()])?;
        Self::new(
            [z0, z1, zero_curve.clone(), zero_curve],
            [zero.clone(), zero.clone(), zero.clone(), zero],
        )
    }

    pub fn base(&self) -> &ClosedCurve {
        &self.z[0]
    }

    pub fn z_coeff(&self, n: usize) -> &ClosedCurve {
        &self.z[n]
    }

    pub fn wt_coeff(&self, n: usize) -> &ScalarField {
        &self.wt[n]
    }

    /// Zero out every coefficient above `order`.
    pub fn truncate(&self, order: usize) -> Result<Self> {
        let grid = self.z[0].grid().clone();
        let zero = ScalarField::constant(grid.clone(), 0.0)?;
        let zero_curve = ClosedCurve::new(grid.clone(), vec![Complex::default(); grid.len()])?;
        let z = std::array::from_fn(|n| {
            if n <= order {
                self.z[n].clone()
            } else {
                zero_curve.clone()
            }
        });
        let wt = std::array::from_fn(|n| {
            if n <= order {
                self.wt[n].clone()
            } else {
                zero.clone()
            }
        });
        Self::new(z, wt)
    }

    /// z(t) = Σ tⁿ z⁽ⁿ⁾ sampled on the grid.
    pub fn curve_at(&self, t: f64) -> Result<ClosedCurve> {
        let n = self.z[0].grid().len();
        let mut points = vec![Complex::default(); n];
        for (order, zc) in self.z.iter().enumerate() {
            let tn = t.powi(order as i32);
            for (p, q) in points.iter_mut().zip(zc.points()) {
                *p += tn * q;
            }
        }
        ClosedCurve::new(self.z[0].grid().clone(), points)
    }

    /// ∂_t z(t) sampled on the grid.
    pub fn curve_velocity_at(&self, t: f64) -> Vec<Complex> {
        let n = self.z[0].grid().len();
        let mut points = vec![Complex::default(); n];
        for (order, zc) in self.z.iter().enumerate().skip(1) {
            let factor = order as f64 * t.powi(order as i32 - 1);
            for (p, q) in points.iter_mut().zip(zc.points()) {
                *p += factor * q;
            }
        }
        points
    }

    /// ϖ̃(t) = Σ tⁿ ϖ̃⁽ⁿ⁾.
    pub fn strength_correction_at(&self, t: f64) -> Result<ScalarField> {
        let grid = self.z[0].grid().clone();
        let mut values = vec![0.0; grid.len()];
        for (order, w) in self.wt.iter().enumerate() {
            let tn = t.powi(order as i32);
            for (v, &c) in values.iter_mut().zip(w.values()) {
                *v += tn * c;
            }
        }
        ScalarField::new(grid, values)
    }

    /// ∂_t ϖ̃(t).
    pub fn strength_rate_at(&self, t: f64) -> Result<ScalarField> {
        let grid = self.z[0].grid().clone();
        let mut values = vec![0.0; grid.len()];
        for (order, w) in self.wt.iter().enumerate().skip(1) {
            let factor = order as f64 * t.powi(order as i32 - 1);
            for (v, &c) in values.iter_mut().zip(w.values()) {
                *v += factor * c;
            }
        }
        ScalarField::new(grid, values)
    }
}

/// q-field coefficients fixing the gauge of the boundary data, together
/// with the auxiliary fields h and H used by the order-3 coefficients.
#[derive(Debug, Clone)]
pub struct QFields {
    /// q⁽⁰⁾ = -(1/2)cϖ₀(c + iϖ₀/4).
    pub q0: Vec<Complex>,
    /// Re part of the first coefficient, q₁⁽¹⁾.
    pub q1_1: Vec<f64>,
    /// Integrand of q₂⁽¹⁾, i.e. (⟨b⟩⁽²⁾ - q̃)·∂_s z₀^⊥.
    pub q2_integrand: Vec<f64>,
    /// q₂⁽¹⁾(s) = ∫₀ˢ integrand, base point s = 0.
    pub q2_1: Vec<f64>,
    pub h_field: Vec<Complex>,
    pub h_cap: Vec<f64>,
}

/// The 2N evolving sheets x_λ(t) = z(t) + λ t c ∂_s z₀^⊥ sharing one set of
/// Taylor coefficients, the expansion rate c and the λ-grid.
#[derive(Debug, Clone)]
pub struct SheetFamily {
    taylor: TaylorCurve,
    wt0: ScalarField,
    c: ScalarField,
    n_pairs: usize,
    lambda: Vec<f64>,
    dz0_perp: Vec<Complex>,
    q: Option<QFields>,
}

impl SheetFamily {
    /// Assemble a family from existing Taylor data (no q-fields attached).
    pub fn new(
        taylor: TaylorCurve,
        wt0: ScalarField,
        c: ScalarField,
        n_pairs: usize,
    ) -> Result<Self> {
        check_same_grid(taylor.base().grid(), wt0.grid())?;
        check_same_grid(taylor.base().grid(), c.grid())?;
        let lambda = lambda_grid(n_pairs)?;
        let dz0 = taylor.base().spectral_derivative(1)?;
        let dz0_perp = dz0.points().iter().map(|&d| perp(d)).collect();
        Ok(Self {
            taylor,
            wt0,
            c,
            n_pairs,
            lambda,
            dz0_perp,
            q: None,
        })
    }

    /// Run the full order-3 construction from the initial data.
    pub fn construct(
        z0: &ClosedCurve,
        wt0: &ScalarField,
        c: &ScalarField,
        n_pairs: usize,
    ) -> Result<Self> {
        let (z1, wt1) = taylor_order1(z0, wt0)?;
        let order1 = TaylorCurve::new(
            [
                z0.clone(),
                z1.clone(),
                zero_curve(z0)?,
                zero_curve(z0)?,
            ],
            [wt1.clone(), wt1.clone(), wt1.clone(), wt1.clone()],
        )?;
        let fam1 = SheetFamily::new(order1, wt0.clone(), c.clone(), n_pairs)?;
        let mean_b1 = mean_br_taylor(1, &fam1)?;
        let dev_b1 = dev_br_taylor(1, &fam1)?;

        let (z2, wt2) = taylor_order2(z0, wt0, c, &mean_b1)?;
        let q = q_fields(z0, wt0, c, &z1, &dev_b1)?;

        let order2 = TaylorCurve::new(
            [z0.clone(), z1.clone(), z2.clone(), zero_curve(z0)?],
            [wt1.clone(), wt1.clone(), wt2.clone(), wt1.clone()],
        )?;
        let fam2 = SheetFamily::new(order2, wt0.clone(), c.clone(), n_pairs)?;
        let mean_b2 = mean_br_taylor(2, &fam2)?;

        let (z3, wt3) = taylor_order3(z0, wt0, &mean_b2, &q)?;
        let taylor = TaylorCurve::new([z0.clone(), z1, z2, z3], [wt1.clone(), wt1, wt2, wt3])?;
        let mut family = SheetFamily::new(taylor, wt0.clone(), c.clone(), n_pairs)?;
        family.q = Some(q);
        Ok(family)
    }

    pub fn taylor(&self) -> &TaylorCurve {
        &self.taylor
    }

    pub fn strength(&self) -> &ScalarField {
        &self.wt0
    }

    pub fn expansion_rate(&self) -> &ScalarField {
        &self.c
    }

    pub fn n_pairs(&self) -> usize {
        self.n_pairs
    }

    pub fn lambda_grid(&self) -> &[f64] {
        &self.lambda
    }

    pub fn sheet_count(&self) -> usize {
        self.lambda.len()
    }

    pub fn q_fields(&self) -> Option<&QFields> {
        self.q.as_ref()
    }

    /// Zone map: x_λ(t, s) = z(t, s) + λ t c(s) ∂_s z₀(s)^⊥.
    pub fn zone_map(&self, t: f64, lambda: f64) -> Result<ClosedCurve> {
        let z = self.taylor.curve_at(t)?;
        let points = z
            .points()
            .iter()
            .zip(&self.dz0_perp)
            .zip(self.c.values())
            .map(|((&p, &np), &cv)| p + lambda * t * cv * np)
            .collect();
        ClosedCurve::new(z.grid().clone(), points)
    }

    /// Total strength ϖ_λ(t) = ϖ₀ + ∂_s ϖ̃(t), shared by all sheets.
    pub fn strength_at(&self, t: f64) -> Result<ScalarField> {
        let ds_wt = self.taylor.strength_correction_at(t)?.spectral_derivative(1)?;
        self.wt0.zip(&ds_wt, |a, b| a + b)
    }

    /// The 2N sheets at time t, ordered along the λ-grid.
    pub fn sheets_at(&self, t: f64) -> Result<Vec<LambdaSheet>> {
        let strength = self.strength_at(t)?;
        self.lambda
            .iter()
            .map(|&l| {
                Ok(LambdaSheet {
                    lambda: l,
                    curve: self.zone_map(t, l)?,
                    strength: strength.clone(),
                })
            })
            .collect()
    }

    fn lambda_index(&self, lambda: f64) -> Result<usize> {
        self.lambda
            .iter()
            .position(|&l| (l - lambda).abs() < 1e-12)
            .ok_or(Error::InvalidParameter {
                name: "lambda",
                value: lambda,
                expected: "a λ-grid value",
            })
    }

    /// Multi-sheet Birkhoff–Rott operator B_λ(t) on the sheet with the given
    /// λ-grid value.
    pub fn br(&self, t: f64, lambda: f64) -> Result<Vec<Complex>> {
        let idx = self.lambda_index(lambda)?;
        let sheets = self.sheets_at(t)?;
        br_multi_sheets(&sheets, idx, t)
    }

    /// Margin of the equi-chord-arc inequality
    /// |x_μ(t,s+ξ) - x_λ(t,s)| ≥ (1/4)√(CA⁻²ξ² + t²c(s)²(μ-λ)²),
    /// minimized over the grid. Pairs where both sides vanish identically
    /// (the λ = μ diagonal, and coincident sheets at t = 0) are excluded.
    /// A positive margin certifies the geometry for the operators.
    pub fn equi_chord_arc_margin(&self, t: f64) -> Result<f64> {
        let ca = self.taylor.base().chord_arc_constant()?;
        let inv_ca2 = 1.0 / (ca * ca);
        let curves: Vec<ClosedCurve> = self
            .lambda
            .iter()
            .map(|&l| self.zone_map(t, l))
            .collect::<Result<_>>()?;
        let grid = self.taylor.base().grid();
        let n = grid.len();
        let mut margin = f64::INFINITY;
        for (a, &la) in self.lambda.iter().enumerate() {
            for (b, &mu) in self.lambda.iter().enumerate() {
                let target = curves[a].points();
                let source = curves[b].points();
                for i in 0..n {
                    let cv = self.c.values()[i];
                    for k in 0..n {
                        if a == b && k == 0 {
                            continue;
                        }
                        let xi = grid.offset(i, (i + k) % n);
                        let lhs = (source[(i + k) % n] - target[i]).norm();
                        let rhs = 0.25
                            * (inv_ca2 * xi * xi + t * t * cv * cv * (mu - la) * (mu - la))
                                .sqrt();
                        if lhs == 0.0 && rhs == 0.0 {
                            continue;
                        }
                        margin = margin.min(lhs - rhs);
                    }
                }
            }
        }
        Ok(margin)
    }

    /// Boundary data b_λ = (1/|Λ|)(∂_tϖ̃ ∂_s x - ϖ(∂_t x - B))_λ for the
    /// outermost pair λ = ±1, with mean, deviation and the attached q-field
    /// coefficients.
    pub fn boundary_data(&self, t: f64) -> Result<BoundaryData> {
        let q = self
            .q
            .clone()
            .ok_or_else(|| Error::InvalidGrid("family carries no q-fields".into()))?;
        let b_plus = self.boundary_datum(t, 1.0)?;
        let b_minus = self.boundary_datum(t, -1.0)?;
        let mean = b_plus
            .iter()
            .zip(&b_minus)
            .map(|(p, m)| 0.5 * (p + m))
            .collect();
        let dev = b_plus
            .iter()
            .zip(&b_minus)
            .map(|(p, m)| 0.5 * (p - m))
            .collect();
        Ok(BoundaryData {
            b_plus,
            b_minus,
            mean,
            dev,
            q0: q.q0,
            q1_1: q.q1_1,
            q2_1: q.q2_1,
        })
    }

    fn boundary_datum(&self, t: f64, lambda: f64) -> Result<Vec<Complex>> {
        let count = self.sheet_count() as f64;
        let b = self.br(t, lambda)?;
        let x = self.zone_map(t, lambda)?;
        let dx = x.spectral_derivative(1)?;
        let wt = self.strength_at(t)?;
        let dt_wt = self.taylor.strength_rate_at(t)?;
        let dz_dt = self.taylor.curve_velocity_at(t);
        let n = x.grid().len();
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            let dt_x = dz_dt[i] + lambda * self.c.values()[i] * self.dz0_perp[i];
            let v = (dt_wt.values()[i] * dx.points()[i]
                - wt.values()[i] * (dt_x - b[i]))
                / count;
            out.push(v);
        }
        Ok(out)
    }

    /// Pressure jump [p̄]_λ(t) across the sheet with the given λ, for the
    /// supplied interface velocity ∂_t x and strength rate ∂_t ϖ̃.
    pub fn pressure_jump(
        &self,
        t: f64,
        lambda: f64,
        dt_x: &[Complex],
        dt_wt: &ScalarField,
    ) -> Result<Vec<f64>> {
        let b = self.br(t, lambda)?;
        let x = self.zone_map(t, lambda)?;
        let dx = x.spectral_derivative(1)?;
        let wt = self.strength_at(t)?;
        Ok(pressure_jump_samples(
            &b,
            dx.points(),
            wt.values(),
            dt_x,
            dt_wt.values(),
            self.sheet_count(),
        ))
    }

    /// Sup norm of the pointwise condition residual
    /// ⟨b⟩(t) - t ∂_s(q ∂_s z)(t) with q = q⁽⁰⁾ + t(q₁⁽¹⁾ + i q₂⁽¹⁾).
    /// The construction makes this O(t³).
    pub fn pointwise_residual(&self, t: f64) -> Result<f64> {
        let bd = self.boundary_data(t)?;
        let z = self.taylor.curve_at(t)?;
        let dz = z.spectral_derivative(1)?;
        let grid = z.grid();
        let w: Vec<Complex> = (0..grid.len())
            .map(|i| {
                let qi = bd.q0[i] + t * Complex::new(bd.q1_1[i], bd.q2_1[i]);
                qi * dz.points()[i]
            })
            .collect();
        let dw = spectral_derivative(&w, grid.length(), 1);
        let mut worst = 0.0f64;
        for i in 0..grid.len() {
            worst = worst.max((bd.mean[i] - t * dw[i]).norm());
        }
        Ok(worst)
    }
}

fn zero_curve(z0: &ClosedCurve) -> Result<ClosedCurve> {
    ClosedCurve::new(z0.grid().clone(), vec![Complex::default(); z0.grid().len()])
}

/// Boundary data of the outermost sheet pair with the q-field gauge.
#[derive(Debug, Clone)]
pub struct BoundaryData {
    pub b_plus: Vec<Complex>,
    pub b_minus: Vec<Complex>,
    pub mean: Vec<Complex>,
    pub dev: Vec<Complex>,
    pub q0: Vec<Complex>,
    pub q1_1: Vec<f64>,
    pub q2_1: Vec<f64>,
}

/// Order-1 coefficients: z⁽¹⁾ = B₀, ϖ̃⁽¹⁾ = 0.
pub fn taylor_order1(z0: &ClosedCurve, wt0: &ScalarField) -> Result<(ClosedCurve, ScalarField)> {
    let b = br_single(z0, wt0)?;
    let z1 = ClosedCurve::new(z0.grid().clone(), b)?;
    let wt1 = ScalarField::constant(z0.grid().clone(), 0.0)?;
    Ok((z1, wt1))
}

/// Combination rule for extracting a Taylor coefficient of the family of
/// operators B_λ(t): the λ-mean over the whole grid or the deviation of the
/// outermost pair.
#[derive(Clone, Copy, Debug)]
enum Combine {
    Mean,
    DevOuter,
}

fn br_combined(family: &SheetFamily, t: f64, combine: Combine) -> Result<Vec<Complex>> {
    let sheets = family.sheets_at(t)?;
    let n = family.taylor.base().grid().len();
    match combine {
        Combine::Mean => {
            let mut acc = vec![KahanComplex::new(); n];
            for idx in 0..sheets.len() {
                let b = br_multi_sheets(&sheets, idx, t)?;
                for (a, v) in acc.iter_mut().zip(b) {
                    a.add(v);
                }
            }
            let inv = 1.0 / sheets.len() as f64;
            Ok(acc.iter().map(|a| a.value() * inv).collect())
        }
        Combine::DevOuter => {
            let plus = br_multi_sheets(&sheets, sheets.len() - 1, t)?;
            let minus = br_multi_sheets(&sheets, 0, t)?;
            Ok(plus
                .iter()
                .zip(&minus)
                .map(|(p, m)| 0.5 * (p - m))
                .collect())
        }
    }
}

/// n-th Taylor coefficient of the λ-mean of B_λ(t) on the given family
/// (pass the family truncated to order n). n = 0 returns B₀ exactly.
///
/// The coefficients are one-sided limits from t > 0. They must be: the
/// family is only C⁰ across t = 0 in the opening amplitude (the λ-mean
/// carries an |t|-type term from the one-sided normal derivatives of the
/// half-sheet fields), so centered differences would converge to the wrong
/// value. One-sided stencils on {0, h/4, h/2, h} (order 1) and
/// {0, g/2, g, 3g/2, 2g, 3g} (order 2) with Richardson extrapolation give
/// O(h³) accuracy from the smooth t ≥ 0 branch.
pub fn mean_br_taylor(order: usize, family: &SheetFamily) -> Result<Vec<Complex>> {
    if order == 0 {
        return br_single(family.taylor.base(), &family.wt0);
    }
    let h0 = FD_STEP_FRACTION * family.taylor.base().grid().length();
    let n = family.taylor.base().grid().len();
    let at0 = br_combined(family, 0.0, Combine::Mean)?;
    match order {
        1 => {
            let diff = |h: f64| -> Result<Vec<Complex>> {
                let fh = br_combined(family, h, Combine::Mean)?;
                let fh2 = br_combined(family, h / 2.0, Combine::Mean)?;
                Ok((0..n)
                    .map(|i| (-3.0 * at0[i] + 4.0 * fh2[i] - fh[i]) / h)
                    .collect())
            };
            let d1 = diff(h0)?;
            let d2 = diff(h0 / 2.0)?;
            Ok((0..n).map(|i| (4.0 * d2[i] - d1[i]) / 3.0).collect())
        }
        2 => {
            // Forward second difference on {0, g, 2g, 3g}: the f''' term
            // cancels, leaving an O(g²) error that Richardson removes.
            let second = |g: f64| -> Result<Vec<Complex>> {
                let f1 = br_combined(family, g, Combine::Mean)?;
                let f2 = br_combined(family, 2.0 * g, Combine::Mean)?;
                let f3 = br_combined(family, 3.0 * g, Combine::Mean)?;
                Ok((0..n)
                    .map(|i| (2.0 * at0[i] - 5.0 * f1[i] + 4.0 * f2[i] - f3[i]) / (g * g))
                    .collect())
            };
            let g0 = h0 / 3.0;
            let d1 = second(g0)?;
            let d2 = second(g0 / 2.0)?;
            // Taylor coefficient is f''(0)/2.
            Ok((0..n)
                .map(|i| (4.0 * d2[i] - d1[i]) / 3.0 / 2.0)
                .collect())
        }
        _ => Err(Error::InvalidOrder(order as u32)),
    }
}

/// First Taylor coefficient of the outermost-pair deviation {B}(t).
///
/// Unlike the mean, the deviation flips sign with the opening and jumps
/// across t = 0 (the outermost pair trades places), so this coefficient is
/// extracted one-sidedly from t > 0 with the exact limit
/// {B}(0⁺) = -c̄_N ζ₀̄ as the base value.
pub fn dev_br_taylor(order: usize, family: &SheetFamily) -> Result<Vec<Complex>> {
    if order != 1 {
        return Err(Error::InvalidOrder(order as u32));
    }
    let z0 = family.taylor.base();
    let n = z0.grid().len();
    let h0 = FD_STEP_FRACTION * z0.grid().length();
    let (_, c_n) = an_cn_f64(family.n_pairs)?;
    let dz0 = z0.spectral_derivative(1)?;
    let dev0: Vec<Complex> = (0..n)
        .map(|i| -c_n * (family.wt0.values()[i] / dz0.points()[i]).conj())
        .collect();
    // One-sided parabolic stencil on {0, h/2, h}, Richardson-extrapolated.
    let diff = |h: f64| -> Result<Vec<Complex>> {
        let fh = br_combined(family, h, Combine::DevOuter)?;
        let fh2 = br_combined(family, h / 2.0, Combine::DevOuter)?;
        Ok((0..n)
            .map(|i| (-3.0 * dev0[i] + 4.0 * fh2[i] - fh[i]) / h)
            .collect())
    };
    let d1 = diff(h0)?;
    let d2 = diff(h0 / 2.0)?;
    Ok((0..n).map(|i| (4.0 * d2[i] - d1[i]) / 3.0).collect())
}

/// Order-2 coefficients:
/// 2z⁽²⁾ = ⟨B⟩⁽¹⁾ + ((1/2)c∂_sϖ₀ + (1/4)ϖ₀∂_sc + κ₀c²)∂_s z₀^⊥,
/// 2ϖ̃⁽²⁾ = (1/4)cκ₀ϖ₀² - ∂_s(c²ϖ₀).
pub fn taylor_order2(
    z0: &ClosedCurve,
    wt0: &ScalarField,
    c: &ScalarField,
    mean_b1: &[Complex],
) -> Result<(ClosedCurve, ScalarField)> {
    let dz0 = z0.spectral_derivative(1)?;
    let kappa = z0.curvature()?;
    let d_wt = wt0.spectral_derivative(1)?;
    let d_c = c.spectral_derivative(1)?;
    let n = z0.grid().len();
    let mut z2 = Vec::with_capacity(n);
    for i in 0..n {
        let geom = 0.5 * c.values()[i] * d_wt.values()[i]
            + 0.25 * wt0.values()[i] * d_c.values()[i]
            + kappa.values()[i] * c.values()[i] * c.values()[i];
        z2.push(0.5 * (mean_b1[i] + geom * perp(dz0.points()[i])));
    }
    let wt2 = wt2_field(z0, wt0, c)?;
    Ok((ClosedCurve::new(z0.grid().clone(), z2)?, wt2))
}

fn wt2_field(z0: &ClosedCurve, wt0: &ScalarField, c: &ScalarField) -> Result<ScalarField> {
    let kappa = z0.curvature()?;
    let c2w = c.zip(wt0, |cv, w| cv * cv * w)?;
    let d_c2w = c2w.spectral_derivative(1)?;
    let n = z0.grid().len();
    let values = (0..n)
        .map(|i| {
            0.5 * (0.25 * c.values()[i] * kappa.values()[i] * wt0.values()[i].powi(2)
                - d_c2w.values()[i])
        })
        .collect();
    ScalarField::new(z0.grid().clone(), values)
}

/// The q-field coefficients and the auxiliary h, H fields:
/// q⁽⁰⁾ = -(1/2)cϖ₀(c + iϖ₀/4),
/// q₁⁽¹⁾ = (1/2)cϖ₀ (c∂_s z - i{B})⁽¹⁾ · ∂_s z₀,
/// q₂⁽¹⁾ = ∫₀ˢ (⟨b⟩⁽²⁾ - q̃)·∂_s z₀^⊥ = (1/2)∫₀ˢ (h·∂_s z₀^⊥ - Hϖ₀).
pub fn q_fields(
    z0: &ClosedCurve,
    wt0: &ScalarField,
    c: &ScalarField,
    z1: &ClosedCurve,
    dev_b1: &[Complex],
) -> Result<QFields> {
    let n = z0.grid().len();
    let dz0 = z0.spectral_derivative(1)?;
    let dz1 = z1.spectral_derivative(1)?;

    let q0: Vec<Complex> = (0..n)
        .map(|i| {
            let cv = c.values()[i];
            let w = wt0.values()[i];
            -0.5 * cv * w * Complex::new(cv, 0.25 * w)
        })
        .collect();

    let q1_1: Vec<f64> = (0..n)
        .map(|i| {
            let cv = c.values()[i];
            let w = wt0.values()[i];
            let vec = cv * dz1.points()[i] - Complex::new(0.0, 1.0) * dev_b1[i];
            0.5 * cv * w * dot(vec, dz0.points()[i])
        })
        .collect();

    // q̃ = ∂_s(q⁽⁰⁾ ∂_s z⁽¹⁾ + q₁⁽¹⁾ ∂_s z₀)
    let inner: Vec<Complex> = (0..n)
        .map(|i| q0[i] * dz1.points()[i] + q1_1[i] * dz0.points()[i])
        .collect();
    let q_tilde = spectral_derivative(&inner, z0.grid().length(), 1);

    let wt2 = wt2_field(z0, wt0, c)?;
    let h_field: Vec<Complex> = (0..n)
        .map(|i| 2.0 * (wt2.values()[i] * dz1.points()[i] - q_tilde[i]))
        .collect();

    let wt_sq = wt0.zip(wt0, |a, b| a * b)?;
    let wt_sq_int = wt_sq.integrate();
    if wt_sq_int <= 0.0 {
        return Err(Error::DegenerateStrength(wt_sq_int));
    }
    let h_perp = ScalarField::new(
        z0.grid().clone(),
        (0..n)
            .map(|i| dot(h_field[i], perp(dz0.points()[i])))
            .collect(),
    )?;
    let ratio = h_perp.integrate() / wt_sq_int;
    let h_cap: Vec<f64> = wt0.values().iter().map(|&w| ratio * w).collect();

    let q2_integrand_field = ScalarField::new(
        z0.grid().clone(),
        (0..n)
            .map(|i| 0.5 * (h_perp.values()[i] - h_cap[i] * wt0.values()[i]))
            .collect(),
    )?;
    let q2_1 = q2_integrand_field.cumulative_integral()?;

    Ok(QFields {
        q0,
        q1_1,
        q2_integrand: q2_integrand_field.values().to_vec(),
        q2_1: q2_1.values().to_vec(),
        h_field,
        h_cap,
    })
}

/// Order-3 coefficients:
/// 3z⁽³⁾ = ⟨B⟩⁽²⁾ + H ∂_s z₀^⊥,
/// 3ϖ̃⁽³⁾ = -h·∂_s z₀ - κ₀ ∫₀ˢ(h·∂_s z₀^⊥ - Hϖ₀).
pub fn taylor_order3(
    z0: &ClosedCurve,
    wt0: &ScalarField,
    mean_b2: &[Complex],
    q: &QFields,
) -> Result<(ClosedCurve, ScalarField)> {
    let wt_sq_int = wt0.zip(wt0, |a, b| a * b)?.integrate();
    if wt_sq_int <= 0.0 {
        return Err(Error::DegenerateStrength(wt_sq_int));
    }
    let n = z0.grid().len();
    let dz0 = z0.spectral_derivative(1)?;
    let kappa = z0.curvature()?;
    let z3: Vec<Complex> = (0..n)
        .map(|i| (mean_b2[i] + q.h_cap[i] * perp(dz0.points()[i])) / 3.0)
        .collect();
    let wt3: Vec<f64> = (0..n)
        .map(|i| {
            // ∫₀ˢ(h·∂z₀^⊥ - Hϖ₀) = 2 q₂⁽¹⁾ by construction.
            (-dot(q.h_field[i], dz0.points()[i]) - kappa.values()[i] * 2.0 * q.q2_1[i]) / 3.0
        })
        .collect();
    Ok((
        ClosedCurve::new(z0.grid().clone(), z3)?,
        ScalarField::new(z0.grid().clone(), wt3)?,
    ))
}

/// Cubic Lagrange interpolation coefficients fixed by values and
/// λ-derivatives at λ = ±1.
#[derive(Debug, Clone)]
pub struct LagrangeCoeffs {
    pub l0: Vec<f64>,
    pub l1: Vec<f64>,
    pub l2: Vec<f64>,
    pub l3: Vec<f64>,
}

impl LagrangeCoeffs {
    pub fn eval(&self, i: usize, lambda: f64) -> f64 {
        self.l0[i] + lambda * (self.l1[i] + lambda * (self.l2[i] + lambda * self.l3[i]))
    }

    pub fn eval_dlambda(&self, i: usize, lambda: f64) -> f64 {
        self.l1[i] + lambda * (2.0 * self.l2[i] + 3.0 * lambda * self.l3[i])
    }
}

/// Solve the degree-3 interpolation problem L(±1) = G±, L'(±1) = ∂G±:
/// l₀ = ⟨G⟩ - (1/2){∂G}, l₁ = (3{G} - ⟨∂G⟩)/2, l₂ = (1/2){∂G},
/// l₃ = (⟨∂G⟩ - {G})/2.
pub fn lagrange_coeffs(gp: &[f64], gm: &[f64], dgp: &[f64], dgm: &[f64]) -> LagrangeCoeffs {
    let n = gp.len();
    let mut l = LagrangeCoeffs {
        l0: Vec::with_capacity(n),
        l1: Vec::with_capacity(n),
        l2: Vec::with_capacity(n),
        l3: Vec::with_capacity(n),
    };
    for i in 0..n {
        let mean_g = 0.5 * (gp[i] + gm[i]);
        let dev_g = 0.5 * (gp[i] - gm[i]);
        let mean_dg = 0.5 * (dgp[i] + dgm[i]);
        let dev_dg = 0.5 * (dgp[i] - dgm[i]);
        l.l0.push(mean_g - 0.5 * dev_dg);
        l.l1.push(0.5 * (3.0 * dev_g - mean_dg));
        l.l2.push(0.5 * dev_dg);
        l.l3.push(0.5 * (mean_dg - dev_g));
    }
    l
}

/// Leading Reynolds-stress fields on the sheet with the given λ:
/// |R̊^{λ(0)}| = (|λ|/|Λ|) c |ϖ₀| and tr R^{λ(0)} = -2(|λ|/|Λ|) c̄_N ϖ₀².
pub fn reynolds_leading(
    c: &ScalarField,
    wt0: &ScalarField,
    n_pairs: usize,
    lambda: f64,
) -> Result<(Vec<f64>, Vec<f64>)> {
    check_same_grid(c.grid(), wt0.grid())?;
    let (_, c_n) = an_cn_f64(n_pairs)?;
    let count = (2 * n_pairs) as f64;
    let factor = lambda.abs() / count;
    let offdiag = c
        .values()
        .iter()
        .zip(wt0.values())
        .map(|(&cv, &w)| factor * cv * w.abs())
        .collect();
    let trace = wt0
        .values()
        .iter()
        .map(|&w| -2.0 * factor * c_n * w * w)
        .collect();
    Ok((offdiag, trace))
}
