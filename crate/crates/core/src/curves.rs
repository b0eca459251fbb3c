//! Parameterized plane curves and their unimodular lifts to R³.
//!
//! A curve `(f(x), g(x))` in the affine chart of RP² lifts to
//! `Γ(x) = W(x)^(-1/3) (f, g, 1)` where `W = f′g″ − g′f″`, which makes
//! `det(Γ, Γ′, Γ″) = 1`. Power curves skip the chart and use their closed-form
//! normalized lift directly.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jet::{det3, Jet1, Scalar, Vec3Jet, MAX_ORDER};

/// Highest frame order an affine-chart lift can deliver.
pub const MAX_FRAME_ORDER: usize = MAX_ORDER - 2;

/// `c + Σ aₖ cos(2πk x/T) + bₖ sin(2πk x/T)`, harmonics indexed from 1.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, Default)]
pub struct FourierSeries {
    #[serde(rename = "const", default)]
    pub constant: f64,
    #[serde(default)]
    pub cos: Vec<f64>,
    #[serde(default)]
    pub sin: Vec<f64>,
}

impl FourierSeries {
    /// Jet of the series at `x` for period `period`.
    pub fn jet(&self, period: f64, x: f64, order: usize) -> Result<Jet1> {
        let mut d = vec![0.0; order + 1];
        d[0] = self.constant;
        let harmonics = self.cos.len().max(self.sin.len());
        for k in 1..=harmonics {
            let a = self.cos.get(k - 1).copied().unwrap_or(0.0);
            let b = self.sin.get(k - 1).copied().unwrap_or(0.0);
            if a == 0.0 && b == 0.0 {
                continue;
            }
            let w = TAU * k as f64 / period;
            let (s, c) = (w * x).sin_cos();
            // derivatives of cos cycle through (cos, −sin, −cos, sin)
            let cos_cycle = [c, -s, -c, s];
            let sin_cycle = [s, c, -s, -c];
            let mut wm = 1.0;
            for (m, slot) in d.iter_mut().enumerate() {
                *slot += wm * (a * cos_cycle[m % 4] + b * sin_cycle[m % 4]);
                wm *= w;
            }
        }
        Jet1::new(&d)
    }

    /// Series with every coefficient scaled.
    pub fn scaled(&self, k: f64) -> Self {
        Self {
            constant: self.constant * k,
            cos: self.cos.iter().map(|v| v * k).collect(),
            sin: self.sin.iter().map(|v| v * k).collect(),
        }
    }

    /// Coefficient-wise sum; missing harmonics count as zero.
    pub fn plus(&self, o: &Self) -> Self {
        let add = |a: &[f64], b: &[f64]| {
            (0..a.len().max(b.len()))
                .map(|i| a.get(i).unwrap_or(&0.0) + b.get(i).unwrap_or(&0.0))
                .collect()
        };
        Self { constant: self.constant + o.constant, cos: add(&self.cos, &o.cos), sin: add(&self.sin, &o.sin) }
    }
}

/// A closed curve given by trigonometric polynomials in both coordinates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FourierCurve {
    #[serde(rename = "T")]
    pub period: f64,
    pub f: FourierSeries,
    pub g: FourierSeries,
}

impl FourierCurve {
    pub fn plane_jets(&self, x: f64, order: usize) -> Result<(Jet1, Jet1)> {
        Ok((self.f.jet(self.period, x, order)?, self.g.jet(self.period, x, order)?))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum PlaneCurve {
    Fourier(FourierCurve),
    /// `(a cos x, b sin x)`, period 2π.
    Conic { a: f64, b: f64 },
    /// The curve with lift `(xᵃ/(b−c), xᵇ/(c−a), xᶜ/(a−b))`, `a+b+c = 3`.
    Power { abc: [f64; 3], domain: (f64, f64) },
}

/// On-disk curve-spec document.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum CurveSpec {
    Fourier {
        #[serde(rename = "T")]
        period: f64,
        f: FourierSeries,
        g: FourierSeries,
    },
    Conic {
        a: f64,
        b: f64,
    },
    Power {
        abc: [f64; 3],
        #[serde(default)]
        domain: Option<[f64; 2]>,
    },
}

/// Parses and validates a curve-spec JSON document.
pub fn parse_curve_spec(text: &str) -> Result<PlaneCurve> {
    let spec: CurveSpec = serde_json::from_str(text).map_err(|e| Error::Malformed(e.to_string()))?;
    PlaneCurve::try_from(spec)
}

impl TryFrom<CurveSpec> for PlaneCurve {
    type Error = Error;

    fn try_from(spec: CurveSpec) -> Result<Self> {
        match spec {
            CurveSpec::Fourier { period, f, g } => {
                if !(period.is_finite() && period > 0.0) {
                    return Err(Error::Constraint(format!("period T must be positive, got {period}")));
                }
                let finite = |s: &FourierSeries| {
                    s.constant.is_finite() && s.cos.iter().chain(&s.sin).all(|v| v.is_finite())
                };
                if !finite(&f) || !finite(&g) {
                    return Err(Error::Constraint("non-finite Fourier coefficient".into()));
                }
                Ok(PlaneCurve::Fourier(FourierCurve { period, f, g }))
            }
            CurveSpec::Conic { a, b } => {
                if !(a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite()) {
                    return Err(Error::Constraint(format!("conic semi-axes must be positive, got a={a}, b={b}")));
                }
                Ok(PlaneCurve::Conic { a, b })
            }
            CurveSpec::Power { abc, domain } => {
                let sum: f64 = abc.iter().sum();
                if (sum - 3.0).abs() > 1e-12 {
                    return Err(Error::Constraint(format!(
                        "power exponents must satisfy a+b+c = 3, got {} + {} + {} = {sum}",
                        abc[0], abc[1], abc[2]
                    )));
                }
                let [lo, hi] = domain.ok_or_else(|| Error::Malformed("power curve needs a domain".into()))?;
                if !(lo > 0.0 && hi > lo && hi.is_finite()) {
                    return Err(Error::Constraint(format!("power domain must satisfy 0 < x_min < x_max, got [{lo}, {hi}]")));
                }
                Ok(PlaneCurve::Power { abc, domain: (lo, hi) })
            }
        }
    }
}

impl From<&PlaneCurve> for CurveSpec {
    fn from(c: &PlaneCurve) -> Self {
        match c {
            PlaneCurve::Fourier(fc) => CurveSpec::Fourier { period: fc.period, f: fc.f.clone(), g: fc.g.clone() },
            PlaneCurve::Conic { a, b } => CurveSpec::Conic { a: *a, b: *b },
            PlaneCurve::Power { abc, domain } => CurveSpec::Power { abc: *abc, domain: Some([domain.0, domain.1]) },
        }
    }
}

impl PlaneCurve {
    pub fn conic(a: f64, b: f64) -> Self {
        PlaneCurve::Conic { a, b }
    }

    pub fn power(abc: [f64; 3], lo: f64, hi: f64) -> Result<Self> {
        PlaneCurve::try_from(CurveSpec::Power { abc, domain: Some([lo, hi]) })
    }

    /// Period of closed variants; `None` for power curves.
    pub fn period(&self) -> Option<f64> {
        match self {
            PlaneCurve::Fourier(fc) => Some(fc.period),
            PlaneCurve::Conic { .. } => Some(TAU),
            PlaneCurve::Power { .. } => None,
        }
    }

    /// One period `[0, T]`, or the power-curve domain.
    pub fn domain(&self) -> (f64, f64) {
        match self {
            PlaneCurve::Power { domain, .. } => *domain,
            _ => (0.0, self.period().unwrap_or(TAU)),
        }
    }

    /// Equivalent Fourier representation of closed variants.
    pub fn to_fourier(&self) -> Option<FourierCurve> {
        match self {
            PlaneCurve::Fourier(fc) => Some(fc.clone()),
            PlaneCurve::Conic { a, b } => Some(FourierCurve {
                period: TAU,
                f: FourierSeries { constant: 0.0, cos: vec![*a], sin: vec![] },
                g: FourierSeries { constant: 0.0, cos: vec![], sin: vec![*b] },
            }),
            PlaneCurve::Power { .. } => None,
        }
    }

    fn check_domain(&self, x: f64) -> Result<()> {
        if let PlaneCurve::Power { domain: (lo, hi), .. } = self {
            if !(x >= *lo && x <= *hi) {
                return Err(Error::OutOfDomain { x, lo: *lo, hi: *hi });
            }
        }
        Ok(())
    }

    /// Jets of the affine coordinates `f` and `g` at `x`.
    pub fn eval_plane_jet(&self, x: f64, order: usize) -> Result<(Jet1, Jet1)> {
        if order > MAX_ORDER {
            return Err(Error::OrderTooLarge { requested: order, max: MAX_ORDER });
        }
        self.check_domain(x)?;
        match self {
            PlaneCurve::Fourier(fc) => fc.plane_jets(x, order),
            PlaneCurve::Conic { .. } => self.to_fourier().expect("conic is closed").plane_jets(x, order),
            PlaneCurve::Power { abc, .. } => {
                // affine chart Γ₁/Γ₃, Γ₂/Γ₃ of the explicit lift
                let [a, b, c] = *abc;
                check_distinct(abc)?;
                let t = Jet1::variable(x, order);
                let f = t.powf(a - c)?.scale((a - b) / (b - c));
                let g = t.powf(b - c)?.scale((a - b) / (c - a));
                Ok((f, g))
            }
        }
    }

    /// Jet of the Wronskian `W = f′g″ − g′f″`; fails unless `W(x) > 0`.
    pub fn wronskian(&self, x: f64, order: usize) -> Result<Jet1> {
        if order + 2 > MAX_ORDER {
            return Err(Error::OrderTooLarge { requested: order + 2, max: MAX_ORDER });
        }
        let (f, g) = self.eval_plane_jet(x, order + 2)?;
        let w = wronskian_of(&f, &g)?;
        if w.value() <= 0.0 {
            return Err(Error::ConvexityViolation { x, wronskian: w.value() });
        }
        Ok(w)
    }

    /// The unimodular lift `Γ` with derivatives up to `order`.
    pub fn lift_frame(&self, x: f64, order: usize) -> Result<LiftedFrame> {
        let frame = match self {
            PlaneCurve::Power { abc, .. } => {
                if order > MAX_ORDER {
                    return Err(Error::OrderTooLarge { requested: order, max: MAX_ORDER });
                }
                self.check_domain(x)?;
                power_lift(abc, x, order)?
            }
            _ => {
                if order > MAX_FRAME_ORDER {
                    return Err(Error::OrderTooLarge { requested: order, max: MAX_FRAME_ORDER });
                }
                let (f, g) = self.eval_plane_jet(x, order + 2)?;
                lift_affine(&f, &g, x)?
            }
        };
        Ok(LiftedFrame { x, frame })
    }
}

fn check_distinct(abc: &[f64; 3]) -> Result<()> {
    let [a, b, c] = *abc;
    if a == b || b == c || c == a {
        return Err(Error::RepeatedExponents(*abc));
    }
    Ok(())
}

fn power_lift(abc: &[f64; 3], x: f64, order: usize) -> Result<Vec3Jet> {
    check_distinct(abc)?;
    let [a, b, c] = *abc;
    let t = Jet1::variable(x, order);
    Vec3Jet::new([
        t.powf(a)?.scale(1.0 / (b - c)),
        t.powf(b)?.scale(1.0 / (c - a)),
        t.powf(c)?.scale(1.0 / (a - b)),
    ])
}

/// `f′g″ − g′f″` as a jet two orders below its inputs.
pub fn wronskian_of<T: Scalar>(f: &Jet1<T>, g: &Jet1<T>) -> Result<Jet1<T>> {
    let f1 = f.derivative()?;
    let g1 = g.derivative()?;
    let f2 = f1.derivative()?;
    let g2 = g1.derivative()?;
    let n = f2.order().min(g2.order());
    Ok(f1.truncate(n) * g2 - g1.truncate(n) * f2)
}

/// `W^(-1/3)·(f, g, 1)` from affine jets of order k+2; returns order k.
///
/// Generic over the scalar so deformation families (dual coefficients) reuse
/// the same path.
pub fn lift_affine<T: Scalar>(f: &Jet1<T>, g: &Jet1<T>, x: f64) -> Result<Vec3Jet<T>> {
    let w = wronskian_of(f, g)?;
    if w.value().re() <= 0.0 {
        return Err(Error::ConvexityViolation { x, wronskian: w.value().re() });
    }
    let k = w.order();
    let scale = w.ln()?.scale(T::from_f64(-1.0 / 3.0)).exp();
    let one = Jet1::constant(T::one(), k);
    Vec3Jet::new([f.truncate(k) * scale, g.truncate(k) * scale, one * scale])
}

/// `Γ(x)` and its derivatives.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LiftedFrame {
    pub x: f64,
    pub frame: Vec3Jet,
}

impl LiftedFrame {
    pub fn order(&self) -> usize {
        self.frame.order()
    }

    /// `det(Γ, Γ′, Γ″)` as a jet of order `k − 2`.
    pub fn unit_det(&self) -> Result<Jet1> {
        unit_det(&self.frame)
    }
}

/// `det(Γ, Γ′, Γ″)` of any frame with order ≥ 2.
pub fn unit_det<T: Scalar>(frame: &Vec3Jet<T>) -> Result<Jet1<T>> {
    let d1 = frame.derivative()?;
    let d2 = d1.derivative()?;
    let n = d2.order();
    det3(&frame.truncate(n), &d1.truncate(n), &d2)
}
