//! Sampling a 2-frieze on an ε-lattice and measuring how well the sampled
//! values obey the discrete diamond rule `E = AD − BC`.
//!
//! Combined lattice point `(a, b)` with `a ≡ b (mod 2)` sits at
//! `(x₀ + aε, y₀ + bε)`; it carries `G` when `a` is even and `F` otherwise.
//! Diamonds are easier to walk in rotated indices: column `k = (a+b)/2` and
//! row `r = (a−b)/2`, so the four neighbours of `(k, r)` are `(k±1, r)`
//! (west/east) and `(k, r∓1)` (north/south), and the rule reads
//! `4ε²·center = west·east − north·south`.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::frieze2::TwoFrieze;

/// Pivot magnitude below which propagation stops.
pub const PROPAGATION_PIVOT: f64 = 1e-6;

/// `F` on the odd sublattice and `G` on the even one, `n × n` each.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscreteFrieze {
    pub eps: f64,
    pub origin: (f64, f64),
    pub n: usize,
    /// `f[i][j] = F(x₀ + (2i+1)ε, y₀ + (2j+1)ε)`.
    pub f: Vec<Vec<f64>>,
    /// `g[i][j] = G(x₀ + 2iε, y₀ + 2jε)`.
    pub g: Vec<Vec<f64>>,
}

fn wrap(v: f64, period: Option<f64>) -> f64 {
    match period {
        Some(t) => v.rem_euclid(t),
        None => v,
    }
}

/// Value at combined lattice point `(a, b)`.
pub fn lattice_value(frieze: &TwoFrieze, eps: f64, origin: (f64, f64), a: i64, b: i64) -> Result<f64> {
    debug_assert!((a - b).rem_euclid(2) == 0, "({a}, {b}) is off the lattice");
    let t = frieze.period();
    let x = wrap(origin.0 + a as f64 * eps, t);
    let y = wrap(origin.1 + b as f64 * eps, t);
    let j = if a.rem_euclid(2) == 0 { frieze.eval_g(x, y, 0, 0)? } else { frieze.eval_f(x, y, 0, 0)? };
    Ok(j.value())
}

pub fn sample_lattice(frieze: &TwoFrieze, eps: f64, origin: (f64, f64), n: usize) -> Result<DiscreteFrieze> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::Constraint(format!("lattice spacing must be positive, got {eps}")));
    }
    if n == 0 {
        return Err(Error::Constraint("lattice needs at least one node".into()));
    }
    if let Some(t) = frieze.period() {
        if n as f64 * 2.0 * eps > t * (1.0 + 1e-12) {
            return Err(Error::Constraint(format!(
                "lattice of {n} nodes at ε = {eps} spans more than one period {t}"
            )));
        }
    }
    let fill = |odd: i64| -> Result<Vec<Vec<f64>>> {
        (0..n as i64)
            .into_par_iter()
            .map(|i| (0..n as i64).map(|j| lattice_value(frieze, eps, origin, 2 * i + odd, 2 * j + odd)).collect())
            .collect()
    };
    Ok(DiscreteFrieze { eps, origin, n, f: fill(1)?, g: fill(0)? })
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct DirectionStats {
    pub max: f64,
    pub mean: f64,
    pub count: usize,
}

impl DirectionStats {
    fn from_values(v: &[f64]) -> Self {
        if v.is_empty() {
            return Self::default();
        }
        Self {
            max: v.iter().copied().fold(0.0, f64::max),
            mean: v.iter().sum::<f64>() / v.len() as f64,
            count: v.len(),
        }
    }
}

/// Normalized diamond residuals in both directions.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct ResidualStats {
    /// `|(AD − BC)/(4ε²) − G|` with `F` corners around a `G` node.
    pub g_from_f: DirectionStats,
    /// The same with the roles of `F` and `G` exchanged.
    pub f_from_g: DirectionStats,
}

/// `|(A·D − B·C)/(4ε²) − center|`.
pub fn normalized_residual(center: f64, a: f64, b: f64, c: f64, d: f64, eps: f64) -> f64 {
    ((a * d - b * c) / (4.0 * eps * eps) - center).abs()
}

pub fn diamond_residual(d: &DiscreteFrieze) -> Result<ResidualStats> {
    if d.n < 3 {
        return Err(Error::Constraint(format!("diamond residuals need a 3x3 lattice, got {}", d.n)));
    }
    let n = d.n;
    let mut gf = Vec::new();
    for i in 1..n {
        for j in 1..n {
            let (a, b, c, dd) = (d.f[i - 1][j - 1], d.f[i - 1][j], d.f[i][j - 1], d.f[i][j]);
            gf.push(normalized_residual(d.g[i][j], a, b, c, dd, d.eps));
        }
    }
    let mut fg = Vec::new();
    for i in 0..n - 1 {
        for j in 0..n - 1 {
            let (a, b, c, dd) = (d.g[i][j], d.g[i][j + 1], d.g[i + 1][j], d.g[i + 1][j + 1]);
            fg.push(normalized_residual(d.f[i][j], a, b, c, dd, d.eps));
        }
    }
    Ok(ResidualStats { g_from_f: DirectionStats::from_values(&gf), f_from_g: DirectionStats::from_values(&fg) })
}

/// Samples column `k`, rows `r_lo..=r_hi`.
pub fn sample_column(frieze: &TwoFrieze, eps: f64, origin: (f64, f64), k: i64, r_lo: i64, r_hi: i64) -> Result<Vec<f64>> {
    (r_lo..=r_hi).map(|r| lattice_value(frieze, eps, origin, k + r, k - r)).collect()
}

/// One application of the rule: the column east of `center`, two rows
/// shorter (the first and last row lack a north or south neighbour).
pub fn step_east(west: &[f64], center: &[f64], eps: f64) -> std::result::Result<Vec<f64>, usize> {
    let m = center.len();
    let mut out = Vec::with_capacity(m.saturating_sub(2));
    for r in 1..m.saturating_sub(1) {
        let w = west[r];
        if !(w.abs() > PROPAGATION_PIVOT) {
            return Err(r);
        }
        out.push((4.0 * eps * eps * center[r] + center[r - 1] * center[r + 1]) / w);
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PropagationReport {
    pub eps: f64,
    pub seed_column: i64,
    pub rows: (i64, i64),
    /// Max `|propagated − sampled|` per propagated column.
    pub divergence: Vec<f64>,
}

/// Seeds columns `k0` and `k0+1` from samples, extends east `steps` times
/// with the exact rule and compares against direct samples.
pub fn propagate_east(
    frieze: &TwoFrieze,
    eps: f64,
    origin: (f64, f64),
    k0: i64,
    rows: (i64, i64),
    steps: usize,
) -> Result<PropagationReport> {
    let (r_lo, r_hi) = rows;
    if r_hi - r_lo < 2 * steps as i64 {
        return Err(Error::Constraint(format!("{steps} steps need at least {} rows", 2 * steps + 1)));
    }
    let mut west = sample_column(frieze, eps, origin, k0, r_lo, r_hi)?;
    let mut center = sample_column(frieze, eps, origin, k0 + 1, r_lo, r_hi)?;
    let mut divergence = Vec::with_capacity(steps);
    for s in 1..=steps as i64 {
        // both inputs lose their outer rows so that row indices stay aligned
        let east = step_east(&west, &center, eps).map_err(|r| Error::Pivot {
            location: format!("column {}, row {}", k0 + s - 1, r_lo + s - 1 + r as i64),
            value: west[r],
        })?;
        let sampled = sample_column(frieze, eps, origin, k0 + 1 + s, r_lo + s, r_hi - s)?;
        divergence.push(east.iter().zip(&sampled).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max));
        west = center[1..center.len() - 1].to_vec();
        center = east;
    }
    Ok(PropagationReport { eps, seed_column: k0, rows, divergence })
}

/// Least-squares slope of `log y` against `log x`.
pub fn log_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let lx: Vec<f64> = xs.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConvergenceReport {
    pub eps: Vec<f64>,
    pub nodes: Vec<usize>,
    pub max_g_from_f: Vec<f64>,
    pub max_f_from_g: Vec<f64>,
    pub order_g_from_f: f64,
    pub order_f_from_g: f64,
}

/// Fits residual orders over a list of halving spacings. The node count for
/// the first spacing is `n`; later ones scale up so every lattice covers the
/// same region.
pub fn convergence_order(frieze: &TwoFrieze, eps_list: &[f64], origin: (f64, f64), n: usize) -> Result<ConvergenceReport> {
    if eps_list.len() < 3 {
        return Err(Error::Constraint("convergence fit needs at least 3 spacings".into()));
    }
    for w in eps_list.windows(2) {
        if ((w[0] / w[1]) - 2.0).abs() > 1e-9 {
            return Err(Error::Constraint(format!("spacings must halve: {} then {}", w[0], w[1])));
        }
    }
    let mut nodes = Vec::new();
    let mut gf = Vec::new();
    let mut fg = Vec::new();
    for &e in eps_list {
        let m = (n as f64 * eps_list[0] / e).round() as usize;
        let stats = diamond_residual(&sample_lattice(frieze, e, origin, m)?)?;
        nodes.push(m);
        gf.push(stats.g_from_f.max);
        fg.push(stats.f_from_g.max);
    }
    Ok(ConvergenceReport {
        eps: eps_list.to_vec(),
        nodes,
        order_g_from_f: log_slope(eps_list, &gf),
        order_f_from_g: log_slope(eps_list, &fg),
        max_g_from_f: gf,
        max_f_from_g: fg,
    })
}

/// Spread `max − min` of `F` over `(p+2ε, p)`, `(p+ε, p−ε)`, `(p, p−2ε)`.
/// All three sit at distance `2ε` from the diagonal, on the row that
/// normalizes to ones.
pub fn boundary_row_spread(frieze: &TwoFrieze, p: f64, eps: f64) -> Result<f64> {
    let v = [
        frieze.eval_f(p + 2.0 * eps, p, 0, 0)?.value(),
        frieze.eval_f(p + eps, p - eps, 0, 0)?.value(),
        frieze.eval_f(p, p - 2.0 * eps, 0, 0)?.value(),
    ];
    let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(hi - lo)
}

/// `F(x + εs, x − εs) / (2ε²s²)`, which tends to 1 on a closed frieze.
pub fn diagonal_scaling(frieze: &TwoFrieze, x: f64, eps: f64, s: f64) -> Result<f64> {
    let d = eps * s;
    Ok(frieze.eval_f(x + d, x - d, 0, 0)?.value() / (2.0 * d * d))
}

/// `i,j,kind,value` rows: the `G` sublattice first, then `F`.
pub fn lattice_csv(d: &DiscreteFrieze) -> String {
    let mut s = String::from("i,j,kind,value\n");
    for (kind, grid) in [("G", &d.g), ("F", &d.f)] {
        for (i, row) in grid.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                writeln!(s, "{i},{j},{kind},{v:.16e}").expect("string write");
            }
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curves::PlaneCurve;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::FRAC_PI_2;

    fn circle() -> TwoFrieze {
        TwoFrieze::closed(PlaneCurve::conic(1.0, 1.0))
    }

    #[test]
    fn circle_lattice_entries() {
        let d = sample_lattice(&circle(), 0.1, (0.0, 0.0), 4).unwrap();
        assert_abs_diff_eq!(d.g[0][0], 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(d.g[1][0], 1.0 - 0.2f64.cos(), epsilon = 1e-15);
        assert_abs_diff_eq!(d.g[1][0], 0.0199334, epsilon = 1e-7);
        assert_abs_diff_eq!(d.f[0][0], 0.0, epsilon = 1e-15);
    }

    #[test]
    fn quadratic_lattice_entry() {
        let fr = TwoFrieze::closed(PlaneCurve::power([2.0, 1.0, 0.0], 0.25, 4.0).unwrap());
        let d = sample_lattice(&fr, 0.25, (1.0, 0.5), 3).unwrap();
        assert_abs_diff_eq!(d.g[0][0], 0.125, epsilon = 1e-14);
    }

    #[test]
    fn lattice_must_fit_a_period() {
        assert!(matches!(sample_lattice(&circle(), 0.5, (0.0, 0.0), 8), Err(Error::Constraint(_))));
    }

    #[test]
    fn hand_diamond_at_quarter_turn() {
        let eps = 0.1;
        let fr = circle();
        let f = |x: f64, y: f64| fr.eval_f(x, y, 0, 0).unwrap().value();
        let (x, y) = (FRAC_PI_2 + 0.3, 0.3);
        let (a, b, c, d) = (f(x - eps, y - eps), f(x - eps, y + eps), f(x + eps, y - eps), f(x + eps, y + eps));
        assert_abs_diff_eq!(a * d - b * c, (1.0 - 0.4f64.cos()) / 2.0, epsilon = 1e-12);
        let res = normalized_residual(1.0, a, b, c, d, eps);
        assert_abs_diff_eq!(res, 0.01326, epsilon = 1e-5);
        let h = eps / 2.0;
        let (a, b, c, d) = (f(x - h, y - h), f(x - h, y + h), f(x + h, y - h), f(x + h, y + h));
        let ratio = res / normalized_residual(1.0, a, b, c, d, h);
        assert!((ratio - 4.0).abs() < 0.05, "{ratio}");
    }

    #[test]
    fn quadratic_residual_is_eps_squared() {
        let fr = TwoFrieze::closed(PlaneCurve::power([2.0, 1.0, 0.0], 0.25, 4.0).unwrap());
        let eps = 0.1;
        let d = sample_lattice(&fr, eps, (0.5, 0.6), 8).unwrap();
        let s = diamond_residual(&d).unwrap();
        assert_abs_diff_eq!(s.g_from_f.max, eps * eps, epsilon = 1e-12);
        assert_abs_diff_eq!(s.g_from_f.mean, eps * eps, epsilon = 1e-12);
        assert_abs_diff_eq!(s.f_from_g.max, eps * eps, epsilon = 1e-12);
    }

    #[test]
    fn exact_rule_round_trip() {
        // propagate arbitrary seeds, then the rule must hold to roundoff
        let eps = 0.05;
        let west: Vec<f64> = (0..9).map(|i| 1.0 + 0.1 * i as f64).collect();
        let center: Vec<f64> = (0..9).map(|i| 2.0 - 0.05 * i as f64).collect();
        let east = step_east(&west, &center, eps).unwrap();
        for r in 1..8 {
            let lhs = 4.0 * eps * eps * center[r];
            let rhs = west[r] * east[r - 1] - center[r - 1] * center[r + 1];
            assert!((lhs - rhs).abs() < 1e-14);
        }
        let mut bad = west.clone();
        bad[3] = 0.0;
        assert_eq!(step_east(&bad, &center, eps), Err(3));
    }

    #[test]
    fn propagation_halts_on_the_diagonal() {
        let err = propagate_east(&circle(), 0.05, (0.0, 0.0), 0, (-4, 4), 1).unwrap_err();
        assert!(matches!(err, Error::Pivot { .. }), "{err:?}");
    }

    #[test]
    fn circle_order_two() {
        let rep = convergence_order(&circle(), &[0.2, 0.1, 0.05], (0.0, 0.0), 8).unwrap();
        assert!((rep.order_g_from_f - 2.0).abs() < 0.2, "{rep:?}");
        assert!((rep.order_f_from_g - 2.0).abs() < 0.2, "{rep:?}");
    }

    #[test]
    fn east_propagation_tracks_the_frieze() {
        let rep = propagate_east(&circle(), 0.05, (0.0, 0.0), 0, (1, 40), 2).unwrap();
        assert!(rep.divergence[0] <= 3e-3, "{rep:?}");
        assert!(rep.divergence[1] <= 2e-2, "{rep:?}");
    }

    #[test]
    fn diagonal_scaling_tends_to_one() {
        let r = diagonal_scaling(&circle(), 0.7, 0.01, 1.0).unwrap();
        assert!((r - 1.0).abs() < 0.05);
    }

    #[test]
    fn csv_lists_both_kinds() {
        let d = sample_lattice(&circle(), 0.1, (0.0, 0.0), 3).unwrap();
        let csv = lattice_csv(&d);
        assert!(csv.starts_with("i,j,kind,value\n0,0,G,"));
        assert_eq!(csv.lines().filter(|l| l.contains(",F,")).count(), 9);
    }
}
