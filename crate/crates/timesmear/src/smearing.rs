//! Smearing functions f(t) on [0, T]: the weight profiles of time-extended
//! alternatives.
//!
//! Averaging-type weights are nonnegative with unit integral. The one
//! deliberate exception is [`SmearingKind::SineBumpPaper`], kept at
//! normalization 2 because the velocity/momentum closed forms downstream were
//! derived with exactly that profile; [`SmearingKind::SineBumpUnit`] is its
//! unit-normalized twin. Nothing here ever renormalizes silently.

use crate::error::{Error, Result};
use crate::quad::{self, simpson};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SmearingKind {
    Uniform,
    SineBumpPaper,
    SineBumpUnit,
    RaisedCosine,
    CustomSamples,
}

#[derive(Debug, Clone)]
struct SampleTable {
    ts: Vec<f64>,
    fs: Vec<f64>,
    dfs: Option<Vec<f64>>,
}

impl SampleTable {
    fn interp(&self, xs: &[f64], t: f64) -> f64 {
        let n = self.ts.len();
        if t <= self.ts[0] {
            return xs[0];
        }
        if t >= self.ts[n - 1] {
            return xs[n - 1];
        }
        let mut lo = 0usize;
        let mut hi = n - 1;
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if self.ts[mid] <= t {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let w = (t - self.ts[lo]) / (self.ts[hi] - self.ts[lo]);
        xs[lo] * (1.0 - w) + xs[hi] * w
    }
}

/// Weight function on [0, T]. `deriv_order` tracks whether this value is the
/// base profile or its time derivative; `reflect_negate` marks the
/// velocity-type weight g(t) = -base'(T - t).
#[derive(Debug, Clone)]
pub struct SmearingFunction {
    pub t_total: f64,
    pub kind: SmearingKind,
    deriv_order: u8,
    reflect_negate: bool,
    table: Option<SampleTable>,
    pub normalization: f64,
}

impl SmearingFunction {
    /// Standard profiles. `uniform` is 1/T; `sine_bump_paper` is
    /// (pi/T) sin(pi t/T) with integral 2 (kept verbatim); `sine_bump_unit`
    /// is (pi/2T) sin(pi t/T) with integral 1; `raised_cosine` is
    /// (1 - cos(2 pi t/T))/T with integral 1 and vanishing endpoints.
    pub fn make_standard(kind: SmearingKind, t_total: f64) -> Result<Self> {
        if !(t_total > 0.0) || !t_total.is_finite() {
            return Err(Error::BadParameter(format!("T must be > 0, got {t_total}")));
        }
        if kind == SmearingKind::CustomSamples {
            return Err(Error::BadParameter("use from_samples for custom tables".into()));
        }
        let mut f = Self {
            t_total,
            kind,
            deriv_order: 0,
            reflect_negate: false,
            table: None,
            normalization: 0.0,
        };
        f.normalization = f.integral();
        // construction-time invariant: averaging kinds integrate to one
        let expected = match kind {
            SmearingKind::SineBumpPaper => 2.0,
            _ => 1.0,
        };
        debug_assert!((f.normalization - expected).abs() < 1e-10);
        Ok(f)
    }

    /// Custom tabulated weight, strictly increasing t from 0 to T, linearly
    /// interpolated. Pass `dfs` to make the table differentiable.
    pub fn from_samples(ts: Vec<f64>, fs: Vec<f64>, dfs: Option<Vec<f64>>) -> Result<Self> {
        if ts.len() < 2 || ts.len() != fs.len() {
            return Err(Error::BadParameter("need >= 2 samples with matching lengths".into()));
        }
        if let Some(d) = &dfs {
            if d.len() != ts.len() {
                return Err(Error::BadParameter("derivative column length mismatch".into()));
            }
        }
        if ts[0] != 0.0 {
            return Err(Error::BadParameter("samples must start at t = 0".into()));
        }
        for w in ts.windows(2) {
            if w[1] <= w[0] {
                return Err(Error::BadParameter("sample times must be strictly increasing".into()));
            }
        }
        let t_total = *ts.last().unwrap();
        let mut f = Self {
            t_total,
            kind: SmearingKind::CustomSamples,
            deriv_order: 0,
            reflect_negate: false,
            table: Some(SampleTable { ts, fs, dfs }),
            normalization: 0.0,
        };
        f.normalization = f.integral();
        Ok(f)
    }

    /// Parse a two-column text table: `t f(t)` per line, '#' comments allowed.
    pub fn from_table_text(text: &str) -> Result<Self> {
        let mut ts = Vec::new();
        let mut fs = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let cols: Vec<&str> = line.split_whitespace().collect();
            if cols.len() < 2 {
                return Err(Error::BadParameter(format!("line {}: need two columns", lineno + 1)));
            }
            let t: f64 = cols[0].parse().map_err(|_| {
                Error::BadParameter(format!("line {}: bad t value", lineno + 1))
            })?;
            let v: f64 = cols[1].parse().map_err(|_| {
                Error::BadParameter(format!("line {}: bad f value", lineno + 1))
            })?;
            ts.push(t);
            fs.push(v);
        }
        Self::from_samples(ts, fs, None)
    }

    fn base_value(&self, t: f64) -> f64 {
        let tt = self.t_total;
        let pi = std::f64::consts::PI;
        match self.kind {
            SmearingKind::Uniform => 1.0 / tt,
            SmearingKind::SineBumpPaper => (pi / tt) * (pi * t / tt).sin(),
            SmearingKind::SineBumpUnit => (pi / (2.0 * tt)) * (pi * t / tt).sin(),
            SmearingKind::RaisedCosine => (1.0 - (2.0 * pi * t / tt).cos()) / tt,
            SmearingKind::CustomSamples => {
                let tb = self.table.as_ref().unwrap();
                tb.interp(&tb.fs, t)
            }
        }
    }

    fn base_derivative(&self, t: f64) -> f64 {
        let tt = self.t_total;
        let pi = std::f64::consts::PI;
        match self.kind {
            SmearingKind::Uniform => 0.0,
            SmearingKind::SineBumpPaper => (pi * pi / (tt * tt)) * (pi * t / tt).cos(),
            SmearingKind::SineBumpUnit => (pi * pi / (2.0 * tt * tt)) * (pi * t / tt).cos(),
            SmearingKind::RaisedCosine => (2.0 * pi / (tt * tt)) * (2.0 * pi * t / tt).sin(),
            SmearingKind::CustomSamples => {
                let tb = self.table.as_ref().unwrap();
                tb.interp(tb.dfs.as_ref().unwrap(), t)
            }
        }
    }

    /// Weight value at time t in [0, T].
    pub fn value(&self, t: f64) -> f64 {
        let (t_eff, sign) = if self.reflect_negate { (self.t_total - t, -1.0) } else { (t, 1.0) };
        let v = match self.deriv_order {
            0 => self.base_value(t_eff),
            _ => self.base_derivative(t_eff),
        };
        sign * v
    }

    pub fn derivative_available(&self) -> bool {
        self.deriv_order == 0
            && match self.kind {
                SmearingKind::CustomSamples => {
                    self.table.as_ref().map(|t| t.dfs.is_some()).unwrap_or(false)
                }
                _ => true,
            }
    }

    /// Integral of the weight over [0, T] by composite Simpson.
    pub fn integral(&self) -> f64 {
        simpson(|t| self.value(t), 0.0, self.t_total, quad::DEFAULT_NODES)
    }

    /// The derivative weight g(t) = f'(t). Requires derivative data and
    /// vanishing endpoints, since a velocity-type smearing only makes sense
    /// when no boundary mass is dropped by the integration by parts.
    pub fn derivative(&self) -> Result<SmearingFunction> {
        if self.deriv_order != 0 {
            return Err(Error::NotDifferentiable("already a derivative weight".into()));
        }
        if !self.derivative_available() {
            return Err(Error::NotDifferentiable(
                "custom table has no derivative column".into(),
            ));
        }
        let f0 = self.value(0.0);
        let ft = self.value(self.t_total);
        if f0.abs() > 1e-10 || ft.abs() > 1e-10 {
            return Err(Error::BoundaryViolation(format!(
                "f(0) = {f0:.3e}, f(T) = {ft:.3e}; both must vanish"
            )));
        }
        let mut g = self.clone();
        g.deriv_order = 1;
        g.normalization = g.integral();
        Ok(g)
    }

    /// The velocity weight used when a velocity-type family is built: the
    /// derivative weight composed with time reflection, g(t) = -f'(T - t).
    /// Under the crate's fixed ordering convention this is the weight whose
    /// sampled value tracks the rate of change of position along forward
    /// histories; for even profiles it coincides with f'(t).
    pub fn velocity_weight(&self) -> Result<SmearingFunction> {
        let mut g = self.derivative()?;
        g.reflect_negate = true;
        g.normalization = g.integral();
        Ok(g)
    }

    pub fn is_uniform(&self) -> bool {
        self.kind == SmearingKind::Uniform && self.deriv_order == 0
    }

    /// Max of |f| on a fine grid; used for slicing bounds and band checks.
    pub fn max_abs(&self) -> f64 {
        let n = 4096;
        (0..=n)
            .map(|i| self.value(self.t_total * i as f64 / n as f64).abs())
            .fold(0.0, f64::max)
    }

    /// Primitive F(s) = int_0^s f on `n` uniform nodes (n odd).
    pub fn primitive_samples(&self, n: usize) -> (Vec<f64>, f64) {
        let n = n.max(3) | 1;
        let h = self.t_total / (n - 1) as f64;
        let vals: Vec<f64> = (0..n).map(|i| self.value(i as f64 * h)).collect();
        (quad::cumulative_simpson(&vals, h), h)
    }
}

/// Quadrature coefficients of the driven-oscillator kernel:
///   A_f = (1/sin wT) int sin(ws) f(s) ds
///   B_f = (1/sin wT) int sin(w(T-s)) f(s) ds
///   C_f = (1/(w sin wT)) int sin(w(T-s)) f(s) [int_0^s sin(ws') f(s') ds'] ds
/// with the w -> 0 limits
///   A_f = (1/T) int s f,  B_f = (1/T) int (T-s) f,
///   C_f = (1/T) int (T-s) f(s) [int_0^s s' f(s') ds'] ds.
pub fn oscillator_coefficients(f: &SmearingFunction, omega: f64) -> Result<(f64, f64, f64)> {
    let tt = f.t_total;
    let n = quad::DEFAULT_NODES;
    let h = tt / (n - 1) as f64;
    if omega == 0.0 {
        let a = simpson(|s| s * f.value(s), 0.0, tt, n) / tt;
        let b = simpson(|s| (tt - s) * f.value(s), 0.0, tt, n) / tt;
        let inner: Vec<f64> = (0..n).map(|i| (i as f64 * h) * f.value(i as f64 * h)).collect();
        let cum = quad::cumulative_simpson(&inner, h);
        let outer: Vec<f64> = (0..n)
            .map(|i| {
                let s = i as f64 * h;
                (tt - s) * f.value(s) * cum[i]
            })
            .collect();
        let c = quad::cumulative_simpson(&outer, h).last().copied().unwrap() / tt;
        return Ok((a, b, c));
    }
    let sin_wt = (omega * tt).sin();
    if sin_wt.abs() < 1e-9 {
        return Err(Error::CausticSingularity(sin_wt.abs()));
    }
    let a = simpson(|s| (omega * s).sin() * f.value(s), 0.0, tt, n) / sin_wt;
    let b = simpson(|s| (omega * (tt - s)).sin() * f.value(s), 0.0, tt, n) / sin_wt;
    let inner: Vec<f64> = (0..n)
        .map(|i| (omega * i as f64 * h).sin() * f.value(i as f64 * h))
        .collect();
    let cum = quad::cumulative_simpson(&inner, h);
    let outer: Vec<f64> = (0..n)
        .map(|i| {
            let s = i as f64 * h;
            (omega * (tt - s)).sin() * f.value(s) * cum[i]
        })
        .collect();
    let c = quad::cumulative_simpson(&outer, h).last().copied().unwrap() / (omega * sin_wt);
    Ok((a, b, c))
}
