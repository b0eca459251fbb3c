//! From a 2-frieze down to a continuous frieze `H`.
//!
//! `q` is read off `F` by Cramer's rule on `F_xxx + qF_x + rF = 0` and its
//! y-derivative, the Hill equation `Ψ″ = −(q/4)Ψ` is integrated with RK4, and
//! `H(x, y) = det(Ψ(x), Ψ(y))`.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::frieze2::{f_jet, PointFrames, TwoFrieze};
use crate::jet::{Jet1, Vec3Jet};
use crate::projective::{coeffs_of_frame, OperatorCoeffs};

/// `|det(F, F_x; F_y, F_xy)|` below this is a hard pivot failure.
pub const PIVOT_MIN: f64 = 1e-10;
/// Below this the fallback rows are consulted and the best one is used.
const PIVOT_SOFT: f64 = 1e-3;
pub const DEFAULT_STEPS: usize = 1024;
const DRIFT_LIMIT: f64 = 1e-6;

fn cramer_q(px: &PointFrames, py: &PointFrames) -> Result<(f64, f64)> {
    let f = f_jet(px, py, 3, 1)?;
    let p = |i, j| f.get(i, j);
    let den = p(0, 0) * p(1, 1) - p(1, 0) * p(0, 1);
    let num = p(0, 0) * p(3, 1) - p(3, 0) * p(0, 1);
    Ok((-num / den, den))
}

/// `q(x)` from the partials of `F` at `(x, y0)`.
pub fn q_from_frieze(frieze: &TwoFrieze, x: f64, y0: f64) -> Result<f64> {
    let (q, den) = cramer_q(&frieze.frames_at(x)?, &frieze.frames_at(y0)?)?;
    if !(den.abs() > PIVOT_MIN) {
        return Err(Error::Pivot { location: format!("(x, y0) = ({x}, {y0})"), value: den });
    }
    Ok(q)
}

/// Evaluates `q` from `F` along a preferred row `y0`, switching to the best
/// of a few alternate rows where the pivot is small (always near `x = y0`).
#[derive(Clone, Debug)]
pub struct FriezeQ<'a> {
    frieze: &'a TwoFrieze,
    rows: Vec<PointFrames>,
}

impl<'a> FriezeQ<'a> {
    pub fn new(frieze: &'a TwoFrieze) -> Result<Self> {
        let (lo, hi) = frieze.domain();
        let ys: Vec<f64> = match frieze.period() {
            Some(t) => vec![lo, lo + t / 3.0, lo + 2.0 * t / 3.0],
            None => [0.5, 0.2, 0.8].iter().map(|s| lo + s * (hi - lo)).collect(),
        };
        Self::with_rows(frieze, &ys)
    }

    pub fn with_rows(frieze: &'a TwoFrieze, ys: &[f64]) -> Result<Self> {
        let rows = ys.iter().map(|&y| frieze.frames_at(y)).collect::<Result<_>>()?;
        Ok(Self { frieze, rows })
    }

    pub fn default_row(&self) -> f64 {
        self.rows[0].x
    }

    /// `q(x)` and whether a fallback row was used.
    pub fn eval(&self, x: f64) -> Result<(f64, bool)> {
        let px = self.frieze.frames_at(x)?;
        let (q, den) = cramer_q(&px, &self.rows[0])?;
        if den.abs() > PIVOT_SOFT {
            return Ok((q, false));
        }
        let mut best = (q, den);
        for row in &self.rows[1..] {
            let cand = cramer_q(&px, row)?;
            if cand.1.abs() > best.1.abs() {
                best = cand;
            }
        }
        if !(best.1.abs() > PIVOT_MIN) {
            return Err(Error::Pivot { location: format!("x = {x}"), value: best.1 });
        }
        Ok((best.0, true))
    }
}

/// Solution basis of `Ψ″ = −(q/4)Ψ` with `Ψ(x₀) = (1, 0)`, `Ψ′(x₀) = (0, 1)`.
#[derive(Clone, Debug, PartialEq)]
pub struct HillSolution {
    x0: f64,
    step: f64,
    psi: Vec<[f64; 2]>,
    dpsi: Vec<[f64; 2]>,
    q: Vec<f64>,
    drift: f64,
}

/// `Ψ`, `Ψ′`, `Ψ″` at a point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PsiJet {
    pub psi: [f64; 2],
    pub dpsi: [f64; 2],
    pub ddpsi: [f64; 2],
}

/// Classical RK4 on `[lo, hi]` with `steps` steps.
pub fn hill_solve<Q>(q: Q, lo: f64, hi: f64, steps: usize) -> Result<HillSolution>
where
    Q: Fn(f64) -> Result<f64>,
{
    if steps < 64 {
        return Err(Error::Constraint(format!("Hill solver needs at least 64 steps, got {steps}")));
    }
    if !(hi > lo) {
        return Err(Error::Constraint(format!("empty Hill domain [{lo}, {hi}]")));
    }
    let h = (hi - lo) / steps as f64;
    // state: (ψ₁, ψ₂, ψ₁′, ψ₂′)
    let rhs = |qv: f64, s: [f64; 4]| [s[2], s[3], -0.25 * qv * s[0], -0.25 * qv * s[1]];
    let axpy = |s: [f64; 4], k: [f64; 4], a: f64| [s[0] + a * k[0], s[1] + a * k[1], s[2] + a * k[2], s[3] + a * k[3]];

    let mut s = [1.0, 0.0, 0.0, 1.0];
    let mut q_lo = q(lo)?;
    let mut psi = vec![[s[0], s[1]]];
    let mut dpsi = vec![[s[2], s[3]]];
    let mut qs = vec![q_lo];
    let mut drift: f64 = 0.0;
    for i in 0..steps {
        let x = lo + i as f64 * h;
        let q_mid = q(x + 0.5 * h)?;
        let q_hi = q(if i + 1 == steps { hi } else { x + h })?;
        let k1 = rhs(q_lo, s);
        let k2 = rhs(q_mid, axpy(s, k1, 0.5 * h));
        let k3 = rhs(q_mid, axpy(s, k2, 0.5 * h));
        let k4 = rhs(q_hi, axpy(s, k3, h));
        for j in 0..4 {
            s[j] += h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
        }
        if !s.iter().all(|v| v.is_finite()) {
            return Err(Error::Numerical(format!("Hill solution blew up near x = {}", x + h)));
        }
        drift = drift.max((s[0] * s[3] - s[1] * s[2] - 1.0).abs());
        psi.push([s[0], s[1]]);
        dpsi.push([s[2], s[3]]);
        qs.push(q_hi);
        q_lo = q_hi;
    }
    if drift > DRIFT_LIMIT {
        return Err(Error::StepSize { drift, limit: DRIFT_LIMIT });
    }
    Ok(HillSolution { x0: lo, step: h, psi, dpsi, q: qs, drift })
}

/// Cubic Hermite value and derivative on `[0, h]` at `t·h`.
fn hermite(p0: f64, m0: f64, p1: f64, m1: f64, t: f64, h: f64) -> (f64, f64) {
    let t2 = t * t;
    let t3 = t2 * t;
    let v = (2.0 * t3 - 3.0 * t2 + 1.0) * p0
        + (t3 - 2.0 * t2 + t) * h * m0
        + (-2.0 * t3 + 3.0 * t2) * p1
        + (t3 - t2) * h * m1;
    let d = ((6.0 * t2 - 6.0 * t) * p0 + (-6.0 * t2 + 6.0 * t) * p1) / h
        + (3.0 * t2 - 4.0 * t + 1.0) * m0
        + (3.0 * t2 - 2.0 * t) * m1;
    (v, d)
}

impl HillSolution {
    pub fn domain(&self) -> (f64, f64) {
        (self.x0, self.x0 + self.step * (self.psi.len() - 1) as f64)
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn nodes(&self) -> usize {
        self.psi.len()
    }

    /// Largest `|det(Ψ, Ψ′) − 1|` over the stored nodes.
    pub fn wronskian_drift(&self) -> f64 {
        self.drift
    }

    fn ddpsi_at(&self, i: usize) -> [f64; 2] {
        [-0.25 * self.q[i] * self.psi[i][0], -0.25 * self.q[i] * self.psi[i][1]]
    }

    /// Interpolated `Ψ` and derivatives; exact node data at grid points.
    pub fn eval(&self, x: f64) -> Result<PsiJet> {
        let (lo, hi) = self.domain();
        let slack = 1e-9 * self.step;
        if !(x >= lo - slack && x <= hi + slack) {
            return Err(Error::OutOfDomain { x, lo, hi });
        }
        let last = self.psi.len() - 1;
        let u = ((x - lo) / self.step).clamp(0.0, last as f64);
        let i = (u.floor() as usize).min(last - 1);
        let t = u - i as f64;
        if t == 0.0 || (t == 1.0 && i + 1 == last) {
            let k = if t == 0.0 { i } else { last };
            return Ok(PsiJet { psi: self.psi[k], dpsi: self.dpsi[k], ddpsi: self.ddpsi_at(k) });
        }
        let (a, b) = (self.ddpsi_at(i), self.ddpsi_at(i + 1));
        let mut out = PsiJet { psi: [0.0; 2], dpsi: [0.0; 2], ddpsi: [0.0; 2] };
        for c in 0..2 {
            let (v, _) = hermite(self.psi[i][c], self.dpsi[i][c], self.psi[i + 1][c], self.dpsi[i + 1][c], t, self.step);
            let (dv, ddv) = hermite(self.dpsi[i][c], a[c], self.dpsi[i + 1][c], b[c], t, self.step);
            out.psi[c] = v;
            out.dpsi[c] = dv;
            out.ddpsi[c] = ddv;
        }
        Ok(out)
    }
}

/// `H` and the partials used by the frieze identities.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct HValue {
    pub h: f64,
    pub h_x: f64,
    pub h_y: f64,
    pub h_xy: f64,
    pub h_xx: f64,
}

/// The continuous frieze of a Hill solution basis.
#[derive(Clone, Debug)]
pub struct FriezeH {
    pub solution: HillSolution,
}

fn wedge(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

impl FriezeH {
    pub fn new(solution: HillSolution) -> Self {
        Self { solution }
    }

    pub fn eval_h(&self, x: f64, y: f64) -> Result<HValue> {
        let a = self.solution.eval(x)?;
        let b = self.solution.eval(y)?;
        Ok(HValue {
            h: wedge(a.psi, b.psi),
            h_x: wedge(a.dpsi, b.psi),
            h_y: wedge(a.psi, b.dpsi),
            h_xy: wedge(a.dpsi, b.dpsi),
            h_xx: wedge(a.ddpsi, b.psi),
        })
    }

    /// `n` uniform points across the solution domain, endpoints included.
    pub fn grid(&self, n: usize) -> Vec<f64> {
        let (lo, hi) = self.solution.domain();
        (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
    }

    /// `max |H·H_xy − H_x·H_y − 1|` on an `n × n` grid.
    pub fn pde_residual(&self, n: usize) -> Result<f64> {
        if n < 8 {
            return Err(Error::Constraint(format!("grid must have at least 8 points, got {n}")));
        }
        let g = self.grid(n);
        g.par_iter()
            .map(|&x| {
                g.iter().try_fold(0.0f64, |m, &y| {
                    let v = self.eval_h(x, y)?;
                    Ok(m.max((v.h * v.h_xy - v.h_x * v.h_y - 1.0).abs()))
                })
            })
            .try_reduce(|| 0.0, |a, b| Ok(a.max(b)))
    }

    /// `x,y,H` rows over an `n × n` grid.
    pub fn grid_csv(&self, n: usize) -> Result<String> {
        let g = self.grid(n);
        let mut s = String::from("x,y,H\n");
        for &x in &g {
            for &y in &g {
                writeln!(s, "{:.16e},{:.16e},{:.16e}", x, y, self.eval_h(x, y)?.h).expect("string write");
            }
        }
        Ok(s)
    }
}

pub fn frieze_pde_residual(h: &FriezeH, grid_n: usize) -> Result<f64> {
    h.pde_residual(grid_n)
}

/// Least-squares `M` with `Φ(xᵢ) ≈ M·Ψ(xᵢ)`, rescaled to `det M = 1`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BasisFit {
    pub matrix: [[f64; 2]; 2],
    /// Determinant before rescaling.
    pub raw_det: f64,
    /// Max-norm misfit of `Φ − M·Ψ` over the sample points, after rescaling.
    pub basis_residual: f64,
}

pub fn fit_basis<P>(sol: &HillSolution, phi: P, xs: &[f64]) -> Result<BasisFit>
where
    P: Fn(f64) -> [f64; 2],
{
    let mut ata = [[0.0; 2]; 2];
    let mut atb = [[0.0; 2]; 2];
    let mut samples = Vec::with_capacity(xs.len());
    for &x in xs {
        let p = sol.eval(x)?.psi;
        let f = phi(x);
        for i in 0..2 {
            for j in 0..2 {
                ata[i][j] += p[i] * p[j];
                atb[i][j] += p[i] * f[j];
            }
        }
        samples.push((p, f));
    }
    let det = ata[0][0] * ata[1][1] - ata[0][1] * ata[1][0];
    if det.abs() < 1e-14 {
        return Err(Error::Numerical("basis fit is rank deficient".into()));
    }
    let inv = [[ata[1][1] / det, -ata[0][1] / det], [-ata[1][0] / det, ata[0][0] / det]];
    // rows of Mᵀ solve the normal equations column by column
    let mut m = [[0.0; 2]; 2];
    for r in 0..2 {
        for c in 0..2 {
            m[r][c] = inv[c][0] * atb[0][r] + inv[c][1] * atb[1][r];
        }
    }
    let raw_det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    if raw_det <= 0.0 {
        return Err(Error::Numerical(format!("basis fit reverses orientation (det = {raw_det:e})")));
    }
    let k = raw_det.sqrt().recip();
    for row in &mut m {
        for v in row.iter_mut() {
            *v *= k;
        }
    }
    let basis_residual = samples
        .iter()
        .map(|(p, f)| {
            let e0 = f[0] - (m[0][0] * p[0] + m[0][1] * p[1]);
            let e1 = f[1] - (m[1][0] * p[0] + m[1][1] * p[1]);
            e0.abs().max(e1.abs())
        })
        .fold(0.0, f64::max);
    Ok(BasisFit { matrix: m, raw_det, basis_residual })
}

/// The frame `x ↦ (F, F_y, F_yy)(x, y0)`.
#[derive(Clone, Debug)]
pub struct RecoveredLift<'a> {
    frieze: &'a TwoFrieze,
    row: PointFrames,
}

impl<'a> RecoveredLift<'a> {
    pub fn y0(&self) -> f64 {
        self.row.x
    }

    /// Frame jets of order `≤ 3` at `x`.
    pub fn frame_at(&self, x: f64, order: usize) -> Result<Vec3Jet> {
        let f = f_jet(&self.frieze.frames_at(x)?, &self.row, order, 2)?;
        Vec3Jet::new([f.x_slice(0), f.x_slice(1), f.x_slice(2)])
    }

    pub fn unit_det(&self, x: f64) -> Result<Jet1> {
        crate::curves::unit_det(&self.frame_at(x, 3)?)
    }

    pub fn coeffs(&self, x: f64) -> Result<OperatorCoeffs> {
        coeffs_of_frame(&self.frame_at(x, 3)?, x)
    }
}

pub fn recover_lift(frieze: &TwoFrieze, y0: f64) -> Result<RecoveredLift<'_>> {
    Ok(RecoveredLift { frieze, row: frieze.frames_at(y0)? })
}

/// Summary of a full reduction run.
#[derive(Clone, Debug, Serialize)]
pub struct ReduceReport {
    pub y0: f64,
    pub steps: usize,
    pub q_evaluations: usize,
    pub q_fallbacks: usize,
    pub wronskian_drift: f64,
    pub pde_residual: f64,
    /// `max |q + 4H_xx/H|` over grid points with `|H| > 0.1`.
    pub hill_consistency: f64,
}

/// `q` from `F`, Hill solve over the curve domain, and residuals of `H`.
pub fn reduce(frieze: &TwoFrieze, steps: usize, grid_n: usize) -> Result<(FriezeH, ReduceReport)> {
    let fq = FriezeQ::new(frieze)?;
    let (lo, hi) = match frieze.period() {
        Some(t) => (frieze.domain().0, frieze.domain().0 + t),
        None => frieze.domain(),
    };
    let count = std::cell::Cell::new((0usize, 0usize));
    let sol = hill_solve(
        |x| {
            let (q, fell_back) = fq.eval(x)?;
            let (n, f) = count.get();
            count.set((n + 1, f + usize::from(fell_back)));
            Ok(q)
        },
        lo,
        hi,
        steps,
    )?;
    let (q_evaluations, q_fallbacks) = count.get();
    let hf = FriezeH::new(sol);
    let pde_residual = hf.pde_residual(grid_n)?;
    let hill_consistency = hill_consistency(&hf, grid_n)?;
    let report = ReduceReport {
        y0: fq.default_row(),
        steps,
        q_evaluations,
        q_fallbacks,
        wronskian_drift: hf.solution.wronskian_drift(),
        pde_residual,
        hill_consistency,
    };
    Ok((hf, report))
}

/// `max |q + 4H_xx/H|` on grid nodes where `|H| > 0.1`; `q` read from the
/// solution's own samples.
pub fn hill_consistency(hf: &FriezeH, n: usize) -> Result<f64> {
    let g = hf.grid(n);
    let mut worst: f64 = 0.0;
    for &x in &g {
        let a = hf.solution.eval(x)?;
        let qx = if a.psi[0].abs() > a.psi[1].abs() { -4.0 * a.ddpsi[0] / a.psi[0] } else { -4.0 * a.ddpsi[1] / a.psi[1] };
        for &y in &g {
            let v = hf.eval_h(x, y)?;
            if v.h.abs() > 0.1 {
                worst = worst.max((qx + 4.0 * v.h_xx / v.h).abs());
            }
        }
    }
    Ok(worst)
}
