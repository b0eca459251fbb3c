//! The symplectic form on closed curves and its discrete cluster analogue.
//!
//! A deformation is `curve + s·direction` (optionally followed by an
//! infinitesimal ambient motion `I + sA`). Everything is evaluated with
//! [`Dual`] coefficients, so `u(F)` is the `du` part of `F`. Frames are
//! gauge-fixed at a base point `b`: `M(s)` sends `(Γ, Γ′, Γ″)(b)` to the
//! constant frame `(0,0,1), (0,−1,0), (1,0,0)`. Afterwards `F(x, b)` is the
//! first coordinate `y₁` of the lift and `G(x, b)` is the Wronskian of
//! `(y₁, y₂)`.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::curves::{lift_affine, FourierCurve, FourierSeries, PlaneCurve};
use crate::error::{Error, Result};
use crate::jet::{Dual, Scalar, Vec3Jet};
use crate::linalg::{det3, from_columns, mat3_inverse, mat3_mul, Mat3};
use crate::projective::dual_frame;

/// Frame the gauge sends `(Γ, Γ′, Γ″)(b)` to, as columns.
pub const FIXED_FRAME: [[f64; 3]; 3] = [[0.0, 0.0, 1.0], [0.0, -1.0, 0.0], [1.0, 0.0, 0.0]];

/// Nodes with `|F|` or `|G|` below this are rejected by the quadrature.
pub const NODE_FLOOR: f64 = 1e-8;
/// Lattice sites with a coordinate below this are skipped.
pub const SITE_FLOOR: f64 = 1e-6;

/// Tangent direction in Fourier coefficient space, plus an optional
/// traceless ambient generator.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Direction {
    #[serde(default)]
    pub f: FourierSeries,
    #[serde(default)]
    pub g: FourierSeries,
    #[serde(default)]
    pub ambient: Option<[[f64; 3]; 3]>,
}

impl Direction {
    pub fn parse(text: &str) -> Result<Self> {
        let d: Self = serde_json::from_str(text).map_err(|e| Error::Malformed(e.to_string()))?;
        if let Some(a) = d.ambient {
            let tr = a[0][0] + a[1][1] + a[2][2];
            if tr.abs() > 1e-12 {
                return Err(Error::Constraint(format!("ambient generator must be traceless, trace = {tr}")));
            }
        }
        Ok(d)
    }

    pub fn scaled(&self, k: f64) -> Self {
        Self {
            f: self.f.scaled(k),
            g: self.g.scaled(k),
            ambient: self.ambient.map(|a| a.map(|r| r.map(|v| v * k))),
        }
    }

    pub fn plus(&self, o: &Self) -> Self {
        let ambient = match (self.ambient, o.ambient) {
            (None, None) => None,
            (a, b) => {
                let (a, b) = (a.unwrap_or_default(), b.unwrap_or_default());
                let mut m = [[0.0; 3]; 3];
                for i in 0..3 {
                    for j in 0..3 {
                        m[i][j] = a[i][j] + b[i][j];
                    }
                }
                Some(m)
            }
        };
        Self { f: self.f.plus(&o.f), g: self.g.plus(&o.g), ambient }
    }

    pub fn is_zero(&self) -> bool {
        let z = |s: &FourierSeries| s.constant == 0.0 && s.cos.iter().chain(&s.sin).all(|v| *v == 0.0);
        z(&self.f) && z(&self.g) && self.ambient.is_none_or(|a| a.iter().flatten().all(|v| *v == 0.0))
    }
}

/// `base + s·direction`, linearized at `s = 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct DeformationFamily {
    pub base: FourierCurve,
    pub direction: Direction,
}

impl DeformationFamily {
    /// Closed bases only; conics are converted to their Fourier form.
    pub fn new(base: &PlaneCurve, direction: Direction) -> Result<Self> {
        let base = base
            .to_fourier()
            .ok_or_else(|| Error::Constraint("deformations need a closed base curve".into()))?;
        Ok(Self { base, direction })
    }

    pub fn period(&self) -> f64 {
        self.base.period
    }

    /// The family's curve at a finite `s`, for difference checks.
    pub fn curve_at(&self, s: f64) -> PlaneCurve {
        PlaneCurve::Fourier(FourierCurve {
            period: self.base.period,
            f: self.base.f.plus(&self.direction.f.scaled(s)),
            g: self.base.g.plus(&self.direction.g.scaled(s)),
        })
    }

    /// Lift of the family at `x` with dual coefficients.
    pub fn frame(&self, x: f64, order: usize) -> Result<Vec3Jet<Dual>> {
        let t = self.base.period;
        let (f0, g0) = self.base.plane_jets(x, order + 2)?;
        let df = self.direction.f.jet(t, x, order + 2)?;
        let dg = self.direction.g.jet(t, x, order + 2)?;
        let frame = lift_affine(&f0.with_tangent(&df), &g0.with_tangent(&dg), x)?;
        Ok(match self.direction.ambient {
            None => frame,
            Some(a) => {
                let mut m = [[Dual::default(); 3]; 3];
                for i in 0..3 {
                    for j in 0..3 {
                        m[i][j] = Dual::new(if i == j { 1.0 } else { 0.0 }, a[i][j]);
                    }
                }
                frame.transform(&m)
            }
        })
    }
}

/// Frames of a family after the unimodular gauge at `base_point`.
#[derive(Clone, Debug)]
pub struct GaugeFixed<'a> {
    family: &'a DeformationFamily,
    pub base_point: f64,
    pub matrix: Mat3<Dual>,
}

pub fn gauge_fix(family: &DeformationFamily, base_point: f64) -> Result<GaugeFixed<'_>> {
    let fr = family.frame(base_point, 2)?;
    let u = from_columns([fr.at(0), fr.at(1), fr.at(2)]);
    let det = det3(&u);
    if det.re.abs() < 1e-12 {
        return Err(Error::DegenerateFrame { x: base_point, det: det.re });
    }
    let fixed = from_columns(FIXED_FRAME.map(|c| c.map(Dual::from_f64)));
    let matrix = mat3_mul(&fixed, &mat3_inverse(&u)?);
    Ok(GaugeFixed { family, base_point, matrix })
}

impl GaugeFixed<'_> {
    pub fn frame(&self, x: f64, order: usize) -> Result<Vec3Jet<Dual>> {
        Ok(self.family.frame(x, order)?.transform(&self.matrix))
    }

    /// `F(x, y) = Γ(x)·Γ*(y)` with its s-derivative.
    pub fn f(&self, x: f64, y: f64) -> Result<Dual> {
        let gx = self.frame(x, 0)?;
        let dy = dual_frame(&self.frame(y, 1)?)?;
        Ok(gx.dot(&dy)?.value())
    }

    /// `G(x, y) = Γ*(x)·Γ**(y)`.
    pub fn g(&self, x: f64, y: f64) -> Result<Dual> {
        let sx = dual_frame(&self.frame(x, 1)?)?;
        let ssy = dual_frame(&dual_frame(&self.frame(y, 2)?)?)?;
        Ok(sx.dot(&ssy)?.value())
    }

    /// `(F, F_x, G, G_x)` at `(x, b)`.
    pub fn row_values(&self, x: f64) -> Result<NodeValues> {
        let b = self.base_point;
        let gx = self.frame(x, 2)?;
        let sx = dual_frame(&gx)?;
        let gb = self.frame(b, 2)?;
        let sb = dual_frame(&gb)?;
        let ssb = dual_frame(&sb)?;
        let (sb0, ssb0) = (sb.truncate(0), ssb.truncate(0));
        let f = gx.truncate(1).dot(&Vec3Jet::constant(sb0.at(0), 1))?;
        let g = sx.dot(&Vec3Jet::constant(ssb0.at(0), 1))?;
        Ok(NodeValues { f: f.d(0), f_x: f.d(1), g: g.d(0), g_x: g.d(1) })
    }
}

/// `F(x, b)`, `F_x(x, b)`, `G(x, b)`, `G_x(x, b)` with s-derivatives.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NodeValues {
    pub f: Dual,
    pub f_x: Dual,
    pub g: Dual,
    pub g_x: Dual,
}

/// Node data along two directions.
#[derive(Clone, Debug, PartialEq)]
pub struct GaugeFixedData {
    pub nodes: Vec<f64>,
    pub u: Vec<NodeValues>,
    pub v: Vec<NodeValues>,
    pub rejected: usize,
}

fn same_base(u: &DeformationFamily, v: &DeformationFamily) -> Result<()> {
    if u.base != v.base {
        return Err(Error::Constraint("both directions must deform the same base curve".into()));
    }
    Ok(())
}

pub fn directional_data(u: &DeformationFamily, v: &DeformationFamily, base_point: f64, nodes: &[f64]) -> Result<GaugeFixedData> {
    same_base(u, v)?;
    let gu = gauge_fix(u, base_point)?;
    let gv = gauge_fix(v, base_point)?;
    let rows: Vec<Option<(f64, NodeValues, NodeValues)>> = nodes
        .par_iter()
        .map(|&x| {
            let a = gu.row_values(x)?;
            let b = gv.row_values(x)?;
            let ok = a.f.re.abs() >= NODE_FLOOR && a.g.re.abs() >= NODE_FLOOR;
            Ok(ok.then_some((x, a, b)))
        })
        .collect::<Result<_>>()?;
    let mut data = GaugeFixedData { nodes: Vec::new(), u: Vec::new(), v: Vec::new(), rejected: 0 };
    for r in rows {
        match r {
            Some((x, a, b)) => {
                data.nodes.push(x);
                data.u.push(a);
                data.v.push(b);
            }
            None => data.rejected += 1,
        }
    }
    Ok(data)
}

/// `(dα ∧ dβ)(u, v) = u(α)v(β) − v(α)u(β)`.
fn wedge(au: Dual, bu: Dual, av: Dual, bv: Dual) -> f64 {
    au.du * bv.du - av.du * bu.du
}

/// The integrand in `F, G` form.
pub fn omega_density(u: &NodeValues, v: &NodeValues) -> f64 {
    let (f, fx, g) = (u.f.re, u.f_x.re, u.g.re);
    wedge(u.f, u.f_x, v.f, v.f_x) / (f * f) + wedge(u.f_x, u.g, v.f_x, v.g) / (f * g)
        - fx * wedge(u.f, u.g, v.f, v.g) / (f * f * g)
        + wedge(u.g, u.g_x, v.g, v.g_x) / (g * g)
}

/// `A = u(ln F)`, `B = u(ln G)` and their x-derivatives.
fn ab(n: &NodeValues) -> (f64, f64, f64, f64) {
    let (f, fx, g, gx) = (n.f.re, n.f_x.re, n.g.re, n.g_x.re);
    let a = n.f.du / f;
    let b = n.g.du / g;
    let a1 = (n.f_x.du * f - n.f.du * fx) / (f * f);
    let b1 = (n.g_x.du * g - n.g.du * gx) / (g * g);
    (a, a1, b, b1)
}

/// `2A_uA_v′ − B_uA_v′ − A_uB_v′ + 2B_uB_v′`, not antisymmetric by itself.
pub fn log_density(u: &NodeValues, v: &NodeValues) -> f64 {
    let (au, _, bu, _) = ab(u);
    let (_, av1, _, bv1) = ab(v);
    2.0 * au * av1 - bu * av1 - au * bv1 + 2.0 * bu * bv1
}

/// Quadrature window over one period starting at the gauge base point.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum Window {
    /// Periodic midpoint rule over the whole circle.
    Full,
    /// Closed trapezoid on `[b + δ, b + T − δ]`.
    Punctured { delta: f64 },
}

fn quadrature(t: f64, b: f64, n: usize, window: Window) -> Result<(Vec<f64>, Vec<f64>)> {
    match window {
        Window::Full => {
            let h = t / n as f64;
            Ok(((0..n).map(|k| b + (k as f64 + 0.5) * h).collect(), vec![h; n]))
        }
        Window::Punctured { delta } => {
            if !(delta > 0.0 && 2.0 * delta < t) {
                return Err(Error::Constraint(format!("window radius {delta} outside (0, T/2)")));
            }
            let h = (t - 2.0 * delta) / n as f64;
            let xs = (0..=n).map(|k| b + delta + k as f64 * h).collect();
            let mut w = vec![h; n + 1];
            w[0] = 0.5 * h;
            w[n] = 0.5 * h;
            Ok((xs, w))
        }
    }
}

fn integrate<D>(u: &DeformationFamily, v: &DeformationFamily, base_point: f64, n: usize, window: Window, density: D) -> Result<f64>
where
    D: Fn(&NodeValues, &NodeValues) -> f64,
{
    if n < 64 {
        return Err(Error::Constraint(format!("quadrature needs at least 64 nodes, got {n}")));
    }
    let (xs, w) = quadrature(u.period(), base_point, n, window)?;
    let data = directional_data(u, v, base_point, &xs)?;
    if data.nodes.len() < xs.len() / 2 {
        return Err(Error::Numerical(format!("{} of {} quadrature nodes rejected", data.rejected, xs.len())));
    }
    let mut total = 0.0;
    let mut k = 0;
    for (x, wk) in xs.iter().zip(&w) {
        if data.nodes.get(k) == Some(x) {
            total += wk * density(&data.u[k], &data.v[k]);
            k += 1;
        }
    }
    Ok(total)
}

/// `ω(u, v)` gauge-fixed at `base_point`.
pub fn omega_continuous(u: &DeformationFamily, v: &DeformationFamily, base_point: f64, n: usize, window: Window) -> Result<f64> {
    integrate(u, v, base_point, n, window, omega_density)
}

/// `½[L(u, v) − L(v, u)]` with `L` the integral of [`log_density`].
pub fn omega_log(u: &DeformationFamily, v: &DeformationFamily, base_point: f64, n: usize, window: Window) -> Result<f64> {
    integrate(u, v, base_point, n, window, |a, b| 0.5 * (log_density(a, b) - log_density(b, a)))
}

/// Outcome of a lattice sum.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ClusterSum {
    /// Spacing actually used, `T/(2n)`.
    pub eps: f64,
    pub sites: usize,
    pub skipped: usize,
    pub value: f64,
}

/// The four-term cluster sum on the two diagonals
/// `xᵢ = F(Xᵢ − ε, b − ε)`, `yᵢ = G(Xᵢ, b)`, `Xᵢ = b + 2εi`.
pub fn cluster_form_discrete(u: &DeformationFamily, v: &DeformationFamily, base_point: f64, eps: f64) -> Result<ClusterSum> {
    same_base(u, v)?;
    let t = u.period();
    let n = (t / (2.0 * eps)).round() as usize;
    if n < 4 {
        return Err(Error::Constraint(format!("spacing {eps} leaves fewer than 4 lattice sites")));
    }
    let eps = t / (2.0 * n as f64);
    let b = base_point;
    let gu = gauge_fix(u, b)?;
    let gv = gauge_fix(v, b)?;
    // coordinates at every site, both directions: (x, y)
    let coords: Vec<[(Dual, Dual); 2]> = (0..n)
        .into_par_iter()
        .map(|i| {
            let xi = b + 2.0 * eps * i as f64;
            let pair = |g: &GaugeFixed| -> Result<(Dual, Dual)> { Ok((g.f(xi - eps, b - eps)?, g.g(xi, b)?)) };
            Ok([pair(&gu)?, pair(&gv)?])
        })
        .collect::<Result<_>>()?;

    let mut value = 0.0;
    let mut skipped = 0;
    for i in 0..n {
        let j = (i + 1) % n;
        let [(xu, yu), (xv, yv)] = coords[i];
        let [(x1u, y1u), (x1v, y1v)] = coords[j];
        let (x, y, x1, y1) = (xu.re, yu.re, x1u.re, y1u.re);
        if [x, y, x1, y1].iter().any(|c| c.abs() < SITE_FLOOR) {
            skipped += 1;
            continue;
        }
        value += wedge(x1u, xu, x1v, xv) / (x * x1)
            + wedge(y1u, yu, y1v, yv) / (y * y1)
            + wedge(xu, yu, xv, yv) / (x * y)
            + wedge(yu, x1u, yv, x1v) / (x1 * y);
    }
    if skipped * 10 > n {
        return Err(Error::Numerical(format!("{skipped} of {n} lattice sites skipped")));
    }
    Ok(ClusterSum { eps, sites: n, skipped, value })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LimitRow {
    pub epsilon: f64,
    pub cluster_value: f64,
    pub omega_value: f64,
    pub ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LimitReport {
    pub rows: Vec<LimitRow>,
    /// `ω` over the full circle.
    pub omega_full: f64,
    /// Order of `r(ε) → r∞` estimated from the last three ratios.
    pub observed_order: Option<f64>,
    /// Richardson extrapolation of the ratio.
    pub extrapolated_ratio: Option<f64>,
    /// True when `ω` vanishes and ratios are meaningless.
    pub degenerate: bool,
}

impl LimitReport {
    pub fn csv(&self) -> String {
        let mut s = String::from("epsilon,cluster_value,omega_value,ratio\n");
        for r in &self.rows {
            writeln!(s, "{:.16e},{:.16e},{:.16e},{:.16e}", r.epsilon, r.cluster_value, r.omega_value, r.ratio)
                .expect("string write");
        }
        s
    }
}

/// Continuous nodes per unit of lattice spacing in the matched window.
const OMEGA_NODES: usize = 2048;

/// Ratios `cluster(ε)/ω` with `ω` restricted to the window the lattice sum
/// leaves out: the two sites touching the base point span `|x − b| < 2ε`.
pub fn limit_check(u: &DeformationFamily, v: &DeformationFamily, base_point: f64, eps_list: &[f64]) -> Result<LimitReport> {
    if eps_list.len() < 3 {
        return Err(Error::Constraint("limit check needs at least 3 spacings".into()));
    }
    let omega_full = omega_continuous(u, v, base_point, 512, Window::Full)?;
    let degenerate = u.direction.is_zero() || v.direction.is_zero() || omega_full.abs() < 1e-12;
    let mut rows = Vec::with_capacity(eps_list.len());
    for &e in eps_list {
        let c = cluster_form_discrete(u, v, base_point, e)?;
        let omega = omega_continuous(u, v, base_point, OMEGA_NODES, Window::Punctured { delta: 2.0 * c.eps })?;
        let ratio = if degenerate { f64::NAN } else { c.value / omega };
        rows.push(LimitRow { epsilon: c.eps, cluster_value: c.value, omega_value: omega, ratio });
    }
    let (observed_order, extrapolated_ratio) = if degenerate { (None, None) } else { richardson(&rows) };
    Ok(LimitReport { rows, omega_full, observed_order, extrapolated_ratio, degenerate })
}

/// Order and limit from the last three ratios of a halving sequence.
fn richardson(rows: &[LimitRow]) -> (Option<f64>, Option<f64>) {
    let k = rows.len();
    let (r1, r2, r3) = (rows[k - 3].ratio, rows[k - 2].ratio, rows[k - 1].ratio);
    let q = (r1 - r2) / (r2 - r3);
    if !(q.is_finite() && q > 1.0) {
        return (None, None);
    }
    let p = q.log2();
    (Some(p), Some(r3 + (r3 - r2) / (q - 1.0)))
}
