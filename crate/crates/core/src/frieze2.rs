//! Continuous 2-friezes `(F, G)` built from a curve and a dual-space curve.
//!
//! `F(x, y) = Γ(x)·Δ(y)` and `G(x, y) = Δ*(y)·Γ*(x)`. With `Δ = Γ*` the pair
//! is closed and `G(x, y) = F(y, x)`; [`companion_g`] rebuilds `G` from the
//! jets of `F` alone so both routes can be compared.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::curves::{PlaneCurve, MAX_FRAME_ORDER};
use crate::error::{Error, Result};
use crate::jet::{Jet2, Vec3Jet, MAX_ORDER, MAX_ORDER2};
use crate::linalg::{det3, det4};
use crate::projective::dual_frame;

/// Source of a 2-frieze.
#[derive(Clone, Debug, PartialEq)]
pub struct TwoFrieze {
    curve: PlaneCurve,
    /// Lifts to `Δ` directly; `None` means `Δ = Γ*`.
    partner: Option<PlaneCurve>,
}

/// Frames needed to evaluate `F` and `G` with one argument at a point.
#[derive(Clone, Copy, Debug)]
pub struct PointFrames {
    pub x: f64,
    pub gamma: Vec3Jet,
    pub gamma_star: Vec3Jet,
    pub delta: Vec3Jet,
    pub delta_star: Vec3Jet,
}

fn cap(v: Vec3Jet) -> Vec3Jet {
    v.truncate(v.order().min(MAX_ORDER2))
}

fn frame_depth(curve: &PlaneCurve) -> usize {
    match curve {
        PlaneCurve::Power { .. } => MAX_ORDER,
        _ => MAX_FRAME_ORDER,
    }
}

/// `Σᵢ uᵢ(x) vᵢ(y)` as a bivariate jet with the requested orders.
fn pair_jet(u: &Vec3Jet, v: &Vec3Jet, mx: usize, my: usize) -> Result<Jet2> {
    if u.order() < mx {
        return Err(Error::InsufficientOrder { needed: mx, available: u.order() });
    }
    if v.order() < my {
        return Err(Error::InsufficientOrder { needed: my, available: v.order() });
    }
    let (u, v) = (u.truncate(mx), v.truncate(my));
    let [u0, u1, u2] = u.components();
    let [v0, v1, v2] = v.components();
    Ok(Jet2::outer(u0, v0)? + Jet2::outer(u1, v1)? + Jet2::outer(u2, v2)?)
}

impl TwoFrieze {
    /// The closed frieze of a curve: `Δ = Γ*`.
    pub fn closed(curve: PlaneCurve) -> Self {
        Self { curve, partner: None }
    }

    /// A frieze with an independent curve lifted as `Δ`.
    pub fn with_partner(curve: PlaneCurve, partner: PlaneCurve) -> Self {
        Self { curve, partner: Some(partner) }
    }

    pub fn curve(&self) -> &PlaneCurve {
        &self.curve
    }

    pub fn is_dual_pair(&self) -> bool {
        self.partner.is_none()
    }

    pub fn period(&self) -> Option<f64> {
        self.curve.period()
    }

    pub fn domain(&self) -> (f64, f64) {
        self.curve.domain()
    }

    pub fn frames_at(&self, x: f64) -> Result<PointFrames> {
        let gamma = self.curve.lift_frame(x, frame_depth(&self.curve))?.frame;
        let gamma_star = dual_frame(&gamma)?;
        let delta = match &self.partner {
            None => gamma_star,
            Some(p) => p.lift_frame(x, frame_depth(p))?.frame,
        };
        let delta_star = dual_frame(&delta)?;
        Ok(PointFrames {
            x,
            gamma: cap(gamma),
            gamma_star: cap(gamma_star),
            delta: cap(delta),
            delta_star: cap(delta_star),
        })
    }

    pub fn eval_f(&self, x: f64, y: f64, mx: usize, my: usize) -> Result<Jet2> {
        f_jet(&self.frames_at(x)?, &self.frames_at(y)?, mx, my)
    }

    /// `G` through the dual frames, not through `F`.
    pub fn eval_g(&self, x: f64, y: f64, mx: usize, my: usize) -> Result<Jet2> {
        g_jet(&self.frames_at(x)?, &self.frames_at(y)?, mx, my)
    }

    /// Uniform nodes: `iT/n` for closed curves, endpoints included otherwise.
    pub fn grid(&self, n: usize) -> Vec<f64> {
        crate::projective::sample_points(&self.curve, n)
    }

    fn frames_on(&self, xs: &[f64]) -> Result<Vec<PointFrames>> {
        xs.par_iter().map(|&x| self.frames_at(x)).collect()
    }
}

/// `F` jet from precomputed frames at `x` and `y`.
pub fn f_jet(px: &PointFrames, py: &PointFrames, mx: usize, my: usize) -> Result<Jet2> {
    pair_jet(&px.gamma, &py.delta, mx, my)
}

/// `G` jet from precomputed frames at `x` and `y`.
pub fn g_jet(px: &PointFrames, py: &PointFrames, mx: usize, my: usize) -> Result<Jet2> {
    pair_jet(&px.gamma_star, &py.delta_star, mx, my)
}

/// `G = F·F_xy − F_x·F_y`, one order lower in each variable.
pub fn companion_g(f: &Jet2) -> Result<Jet2> {
    let (mx, my) = f.orders();
    if mx < 1 || my < 1 {
        return Err(Error::InsufficientOrder { needed: 1, available: mx.min(my) });
    }
    let fx = f.dx()?;
    let fy = f.dy()?;
    let fxy = fx.dy()?;
    let (ox, oy) = (mx - 1, my - 1);
    Ok(f.truncate(ox, oy) * fxy - fx.truncate(ox, oy) * fy.truncate(ox, oy))
}

/// `F` from affine data by the 2×2-determinant formula.
pub fn explicit_f(curve: &PlaneCurve, x: f64, y: f64) -> Result<f64> {
    let wx = curve.wronskian(x, 0)?.value();
    let wy = curve.wronskian(y, 0)?.value();
    let (fx, gx) = curve.eval_plane_jet(x, 0)?;
    let (fy, gy) = curve.eval_plane_jet(y, 1)?;
    let bracket = (fy.d(0) * gy.d(1) - gy.d(0) * fy.d(1)) - (fx.d(0) * gy.d(1) - gx.d(0) * fy.d(1));
    Ok(wx.powf(-1.0 / 3.0) * wy.powf(-2.0 / 3.0) * bracket)
}

/// 3×3 determinant of the partials `∂ˣⁱ∂ʸʲF`, `i, j ≤ 2`.
pub fn sl3_det(f: &Jet2) -> Result<f64> {
    f.require(2, 2)?;
    let mut m = [[0.0; 3]; 3];
    for (j, row) in m.iter_mut().enumerate() {
        for (i, v) in row.iter_mut().enumerate() {
            *v = f.get(i, j);
        }
    }
    Ok(det3(&m))
}

/// 4×4 determinant of the partials `∂ˣⁱ∂ʸʲF`, `i, j ≤ 3`.
pub fn tame_det(f: &Jet2) -> Result<f64> {
    f.require(3, 3)?;
    let mut m = [[0.0; 4]; 4];
    for (j, row) in m.iter_mut().enumerate() {
        for (i, v) in row.iter_mut().enumerate() {
            *v = f.get(i, j);
        }
    }
    Ok(det4(&m))
}

/// `(G_x, G_y, G_xy)` as 2×2 minors of the partials of `F`.
pub fn dodgson_minors(f: &Jet2) -> Result<[f64; 3]> {
    f.require(2, 2)?;
    let p = |i, j| f.get(i, j);
    Ok([
        p(0, 0) * p(2, 1) - p(0, 1) * p(2, 0),
        p(0, 0) * p(1, 2) - p(1, 0) * p(0, 2),
        p(0, 0) * p(2, 2) - p(2, 0) * p(0, 2),
    ])
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct BoundaryResiduals {
    pub f: f64,
    pub f_x: f64,
    pub f_y: f64,
    pub f_xx_minus_1: f64,
    pub f_yy_minus_1: f64,
    pub f_xy_plus_1: f64,
}

impl BoundaryResiduals {
    pub fn max(&self) -> f64 {
        [self.f, self.f_x, self.f_y, self.f_xx_minus_1, self.f_yy_minus_1, self.f_xy_plus_1]
            .into_iter()
            .fold(0.0, f64::max)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckReport {
    pub grid_n: usize,
    pub frieze_relation_fg: f64,
    pub frieze_relation_gf: f64,
    pub boundary: BoundaryResiduals,
    pub periodicity: f64,
    pub symmetry: f64,
    pub sl3_det_minus_1: f64,
    pub tameness_det: f64,
    pub positivity_min: f64,
    pub dodgson: f64,
    /// `sup |F − G|`; zero exactly for conics.
    pub self_duality_defect: f64,
    pub closed: bool,
}

/// Pass thresholds for a [`CheckReport`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    pub frieze: f64,
    pub boundary: f64,
    pub periodicity: f64,
    pub symmetry: f64,
    pub sl3: f64,
    pub tame: f64,
    pub dodgson: f64,
    pub self_dual: f64,
    pub conic: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            frieze: 1e-9,
            boundary: 1e-9,
            periodicity: 1e-9,
            symmetry: 1e-10,
            sl3: 1e-8,
            tame: 1e-8,
            dodgson: 1e-9,
            self_dual: 1e-9,
            conic: 1e-8,
        }
    }
}

impl Tolerances {
    pub fn validate(&self) -> Result<()> {
        let all = [
            self.frieze, self.boundary, self.periodicity, self.symmetry, self.sl3, self.tame,
            self.dodgson, self.self_dual, self.conic,
        ];
        if all.iter().any(|t| !(t.is_finite() && *t > 0.0)) {
            return Err(Error::Constraint("tolerances must be positive and finite".into()));
        }
        Ok(())
    }
}

impl CheckReport {
    /// Names of the identities that exceed their tolerance.
    pub fn failures(&self, tol: &Tolerances) -> Vec<&'static str> {
        let mut out = Vec::new();
        let mut check = |name, v: f64, t| {
            if !(v <= t) {
                out.push(name);
            }
        };
        check("frieze_relation_fg", self.frieze_relation_fg, tol.frieze);
        check("frieze_relation_gf", self.frieze_relation_gf, tol.frieze);
        check("boundary", self.boundary.max(), tol.boundary);
        check("periodicity", self.periodicity, tol.periodicity);
        check("symmetry", self.symmetry, tol.symmetry);
        check("sl3_det_minus_1", self.sl3_det_minus_1, tol.sl3);
        check("tameness_det", self.tameness_det, tol.tame);
        check("dodgson", self.dodgson, tol.dodgson);
        if !(self.positivity_min > 0.0) {
            out.push("positivity_min");
        }
        out
    }
}

/// Max over cells of a per-cell quantity, in parallel over rows.
fn sweep<F>(xs: &[PointFrames], ys: &[PointFrames], cell: F) -> Result<f64>
where
    F: Fn(&PointFrames, &PointFrames) -> Result<f64> + Sync,
{
    xs.par_iter()
        .map(|px| ys.iter().map(|py| cell(px, py)).try_fold(0.0, |m, v| v.map(|v| f64::max(m, v))))
        .try_reduce(|| 0.0, |a, b| Ok(a.max(b)))
}

/// Fills every field of a [`CheckReport`] on an `n × n` grid.
pub fn verify_closed(frieze: &TwoFrieze, grid_n: usize) -> Result<CheckReport> {
    if grid_n < 8 {
        return Err(Error::Constraint(format!("grid must have at least 8 points, got {grid_n}")));
    }
    let nodes = frieze.grid(grid_n);
    let frames = frieze.frames_on(&nodes)?;

    let frieze_relation_fg = sweep(&frames, &frames, |px, py| {
        let f = f_jet(px, py, 1, 1)?;
        let g = g_jet(px, py, 0, 0)?;
        Ok((companion_g(&f)?.value() - g.value()).abs())
    })?;
    let frieze_relation_gf = sweep(&frames, &frames, |px, py| {
        let g = g_jet(px, py, 1, 1)?;
        let f = f_jet(px, py, 0, 0)?;
        Ok((companion_g(&g)?.value() - f.value()).abs())
    })?;
    let symmetry = sweep(&frames, &frames, |px, py| {
        Ok((g_jet(px, py, 0, 0)?.value() - f_jet(py, px, 0, 0)?.value()).abs())
    })?;
    let sl3_det_minus_1 = sweep(&frames, &frames, |px, py| {
        let f = (sl3_det(&f_jet(px, py, 2, 2)?)? - 1.0).abs();
        let g = (sl3_det(&g_jet(px, py, 2, 2)?)? - 1.0).abs();
        Ok(f.max(g))
    })?;
    let tameness_det = sweep(&frames, &frames, |px, py| Ok(tame_det(&f_jet(px, py, 3, 3)?)?.abs()))?;
    let dodgson = sweep(&frames, &frames, |px, py| {
        let f = f_jet(px, py, 2, 2)?;
        let g = g_jet(px, py, 1, 1)?;
        let [gx, gy, gxy] = dodgson_minors(&f)?;
        Ok([gx - g.get(1, 0), gy - g.get(0, 1), gxy - g.get(1, 1)].iter().fold(0.0, |m, v| m.max(v.abs())))
    })?;
    let self_duality_defect = sweep(&frames, &frames, |px, py| {
        Ok((f_jet(px, py, 0, 0)?.value() - g_jet(px, py, 0, 0)?.value()).abs())
    })?;

    let mut boundary = BoundaryResiduals::default();
    for p in &frames {
        let f = f_jet(p, p, 2, 2)?;
        let b = &mut boundary;
        b.f = b.f.max(f.get(0, 0).abs());
        b.f_x = b.f_x.max(f.get(1, 0).abs());
        b.f_y = b.f_y.max(f.get(0, 1).abs());
        b.f_xx_minus_1 = b.f_xx_minus_1.max((f.get(2, 0) - 1.0).abs());
        b.f_yy_minus_1 = b.f_yy_minus_1.max((f.get(0, 2) - 1.0).abs());
        b.f_xy_plus_1 = b.f_xy_plus_1.max((f.get(1, 1) + 1.0).abs());
    }

    let periodicity = periodicity_residual(frieze, &nodes, &frames)?;
    let positivity_min = positivity_min(frieze, grid_n)?;

    Ok(CheckReport {
        grid_n,
        frieze_relation_fg,
        frieze_relation_gf,
        boundary,
        periodicity,
        symmetry,
        sl3_det_minus_1,
        tameness_det,
        positivity_min,
        dodgson,
        self_duality_defect,
        closed: periodicity <= Tolerances::default().periodicity,
    })
}

/// Closed curves: `F(x+T, y)` and `F(x, y+T)` against `F(x, y)`. Open
/// curves have no period; the domain length is tried as one by comparing
/// `F` at the two ends of the domain.
fn periodicity_residual(frieze: &TwoFrieze, nodes: &[f64], frames: &[PointFrames]) -> Result<f64> {
    match frieze.period() {
        Some(t) => {
            let shifted: Vec<f64> = nodes.iter().map(|x| x + t).collect();
            let sframes = frieze.frames_on(&shifted)?;
            let a = sweep(&sframes, frames, |px, py| {
                let i = nodes.iter().position(|&x| x + t == px.x).expect("shifted node");
                Ok((f_jet(px, py, 0, 0)?.value() - f_jet(&frames[i], py, 0, 0)?.value()).abs())
            })?;
            let b = sweep(frames, &sframes, |px, py| {
                let j = nodes.iter().position(|&y| y + t == py.x).expect("shifted node");
                Ok((f_jet(px, py, 0, 0)?.value() - f_jet(px, &frames[j], 0, 0)?.value()).abs())
            })?;
            Ok(a.max(b))
        }
        None => {
            let (first, last) = (&frames[0], &frames[frames.len() - 1]);
            let mut m: f64 = 0.0;
            for p in frames {
                m = m.max((f_jet(last, p, 0, 0)?.value() - f_jet(first, p, 0, 0)?.value()).abs());
                m = m.max((f_jet(p, last, 0, 0)?.value() - f_jet(p, first, 0, 0)?.value()).abs());
            }
            Ok(m)
        }
    }
}

/// Minimum of `F` over `x < y < x + T` (or `x < y` in an open domain),
/// keeping a margin of `T/(4n)` from both edges of the strip.
pub fn positivity_min(frieze: &TwoFrieze, n: usize) -> Result<f64> {
    let (lo, hi) = frieze.domain();
    let width = frieze.period().unwrap_or(hi - lo);
    let margin = width / (4.0 * n as f64);
    let xs = frieze.grid(n);
    let pairs: Vec<(f64, f64)> = xs
        .iter()
        .flat_map(|&x| {
            let top = match frieze.period() {
                Some(t) => x + t,
                None => hi,
            };
            let span = top - x - 2.0 * margin;
            (0..n)
                .filter(move |_| span > 0.0)
                .map(move |j| (x, x + margin + span * j as f64 / (n - 1) as f64))
        })
        .collect();
    pairs
        .par_iter()
        .map(|&(x, y)| frieze.eval_f(x, y, 0, 0).map(|j| j.value()))
        .try_reduce(|| f64::INFINITY, |a, b| Ok(a.min(b)))
}

/// `x,y,F,G` rows over the grid, row-major in x then y.
pub fn grid_csv(frieze: &TwoFrieze, n: usize) -> Result<String> {
    let nodes = frieze.grid(n);
    let frames = frieze.frames_on(&nodes)?;
    let rows: Vec<String> = frames
        .par_iter()
        .map(|px| {
            let mut s = String::new();
            for py in &frames {
                let f = f_jet(px, py, 0, 0)?.value();
                let g = g_jet(px, py, 0, 0)?.value();
                writeln!(s, "{:.16e},{:.16e},{:.16e},{:.16e}", px.x, py.x, f, g).expect("string write");
            }
            Ok(s)
        })
        .collect::<Result<_>>()?;
    Ok(format!("x,y,F,G\n{}", rows.concat()))
}
