use idescope_process::{Error, Result};
use serde::Serialize;
use serde_json::json;

use crate::scalar::{BhAsyParams, BhPiecewiseParams};

/// ln(Σ e^{x_i}), stable for large arguments.
fn log_sum_exp(xs: &[f64]) -> f64 {
    let m = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + xs.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

/// General solution of u_{t+1} = ã_t u_t/(1+u_t):
/// φ(t;τ,v) = v∏_{r=τ}^{t−1}ã_r / (1 + vΣ_{s=τ}^{t−1}∏_{r=τ}^{s−1}ã_r), evaluated in log space.
pub fn bh_closed_form(coef: &dyn Fn(i64) -> f64, tau: i64, t: i64, v: f64) -> Result<f64> {
    if tau > t {
        return Err(Error::Ordering { from: tau, to: t });
    }
    if !(v >= 0.0) || !v.is_finite() {
        return Err(Error::invalid(format!("initial value {v} must be finite and ≥ 0")));
    }
    if v == 0.0 || t == tau {
        return Ok(v);
    }
    let ln_v = v.ln();
    let mut terms = Vec::with_capacity((t - tau) as usize + 1);
    terms.push(0.0);
    let mut ln_prod = 0.0;
    for r in tau..t {
        terms.push(ln_v + ln_prod);
        let a = coef(r);
        if !(a > 0.0) {
            return Err(Error::invalid(format!("growth rate ã_{r} = {a} must be positive")));
        }
        ln_prod += a.ln();
    }
    Ok((ln_v + ln_prod - log_sum_exp(&terms)).exp())
}

/// φ(τ+t;τ,a) for ã_t = (f_{t+1}/f_t)α, from the explicit representation
/// (α−1)a / ((α−1)α^{−t} f_τ/f_{τ+t} + (α−1)a Σ_{s=0}^{t−1} f_{τ+s}/f_{τ+t} α^{s−t}).
pub fn bh_asy_closed_form(p: &BhAsyParams, tau: i64, t: u64, a: f64) -> Result<f64> {
    p.validate()?;
    p.check_range(tau)?;
    if !(a > 0.0) || !a.is_finite() {
        return Err(Error::invalid(format!("initial value {a} must be positive")));
    }
    if t == 0 {
        return Ok(a);
    }
    let t = t as i64;
    let ln_alpha = p.alpha.ln();
    let ln_am1 = (p.alpha - 1.0).ln();
    let ln_f_end = p.ln_f(tau + t);
    let mut terms = Vec::with_capacity(t as usize + 1);
    terms.push(ln_am1 - t as f64 * ln_alpha + p.ln_f(tau) - ln_f_end);
    for s in 0..t {
        terms.push(ln_am1 + a.ln() + p.ln_f(tau + s) - ln_f_end + (s - t) as f64 * ln_alpha);
    }
    Ok((ln_am1 + a.ln() - log_sum_exp(&terms)).exp())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesLimit {
    pub value: f64,
    pub converged: bool,
    /// The t at which the returned partial sum was taken.
    pub t: u64,
}

/// Σ_{s=0}^{t−1} f_{τ+s}/f_{τ+t} α^{s−t}, with t doubled until successive values differ by
/// less than tol or t would exceed t_max.
pub fn bh_series_limit(p: &BhAsyParams, tau: i64, t_max: u64, tol: f64) -> Result<SeriesLimit> {
    p.validate()?;
    p.check_range(tau)?;
    if t_max < 1 {
        return Err(Error::invalid("t_max must be ≥ 1"));
    }
    // terms with α^{−k} below this are dropped; f-ratios are ≤ 1 since f increases
    let k_cut = (40.0 * std::f64::consts::LN_10 / p.alpha.ln()).ceil() as i64;
    let partial = |t: i64| -> f64 {
        let ln_end = p.ln_f(tau + t);
        let mut sum = 0.0;
        for k in (1..=t.min(k_cut)).rev() {
            sum += (p.ln_f(tau + t - k) - ln_end - k as f64 * p.alpha.ln()).exp();
        }
        sum
    };
    let mut t = 1_u64;
    let mut value = partial(1);
    while t.saturating_mul(2) <= t_max {
        let next = partial(2 * t as i64);
        let done = (next - value).abs() < tol;
        t *= 2;
        value = next;
        if done {
            return Ok(SeriesLimit {
                value,
                converged: true,
                t,
            });
        }
    }
    Ok(SeriesLimit {
        value,
        converged: false,
        t,
    })
}

/// A set of the form [0, hi]; hi = 0 is the singleton {0}.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SetValue {
    pub lo: f64,
    pub hi: f64,
}

impl SetValue {
    pub const ZERO: SetValue = SetValue { lo: 0.0, hi: 0.0 };

    pub fn up_to(hi: f64) -> Self {
        Self { lo: 0.0, hi }
    }

    pub fn contains_set(&self, other: &SetValue) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum OmegaCase {
    /// α_−, α_+ ≤ 1
    BothSubcritical,
    /// α_− ≤ 1 < α_+
    PastSubcritical,
    /// α_+ ≤ 1 < α_−
    FutureSubcritical,
    /// 1 < α_− < α_+
    Increasing,
    /// 1 < α_+ ≤ α_−
    NonIncreasing,
}

/// Expected ω⋆, ω⁻, ω⁺ for the piecewise Beverton-Holt equation with absorbing set [0, max α + 1].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OmegaTableRow {
    pub case: OmegaCase,
    pub omega_star: SetValue,
    pub omega_minus: SetValue,
    pub omega_plus: SetValue,
}

impl OmegaTableRow {
    /// Golden document in the layout of a limit-set report's `intervals` section.
    pub fn golden_json(&self) -> serde_json::Value {
        let iv = |s: SetValue| json!([s.lo, s.hi]);
        json!({
            "intervals": {
                "omega_star": iv(self.omega_star),
                "omega_minus": iv(self.omega_minus),
                "omega_plus": iv(self.omega_plus),
            }
        })
    }
}

pub fn bh_omega_table(p: &BhPiecewiseParams) -> Result<OmegaTableRow> {
    p.validate()?;
    let (am, ap) = (p.alpha_minus, p.alpha_plus);
    let zero = SetValue::ZERO;
    let row = if am <= 1.0 && ap <= 1.0 {
        (OmegaCase::BothSubcritical, zero, zero, zero)
    } else if am <= 1.0 {
        (OmegaCase::PastSubcritical, zero, zero, SetValue::up_to(ap - 1.0))
    } else if ap <= 1.0 {
        (OmegaCase::FutureSubcritical, zero, zero, zero)
    } else if am < ap {
        (
            OmegaCase::Increasing,
            SetValue::up_to(ap - 1.0),
            SetValue::up_to(am - 1.0),
            SetValue::up_to(ap - 1.0),
        )
    } else {
        let s = SetValue::up_to(ap - 1.0);
        (OmegaCase::NonIncreasing, s, s, s)
    };
    Ok(OmegaTableRow {
        case: row.0,
        omega_star: row.1,
        omega_minus: row.2,
        omega_plus: row.3,
    })
}

/// Fibres ⋂_{s≥0} φ(τ+s;τ,A(τ)) of the nested images of A = [0, α_+ + 1] for 1 ≤ α_− < α_+:
/// [0, φ(0;τ,α_++1)] before time 0 and [0, α_+−1] after.
pub fn bh_forward_fiber_formula(p: &BhPiecewiseParams, tau: i64) -> Result<SetValue> {
    p.validate()?;
    if !(1.0 <= p.alpha_minus && p.alpha_minus < p.alpha_plus) {
        return Err(Error::Precondition(format!(
            "fibre formula needs 1 ≤ α_− < α_+, got ({}, {})",
            p.alpha_minus, p.alpha_plus
        )));
    }
    if tau >= 0 {
        return Ok(SetValue::up_to(p.alpha_plus - 1.0));
    }
    let top = bh_closed_form(&|t| p.coef(t), tau, 0, p.alpha_plus + 1.0)?;
    Ok(SetValue::up_to(top))
}
