//! Series-based tail bounds on unbounded domains: the dyadic-annulus
//! bound on the whole quadrant driven by a growth schedule `b_k` and a
//! normalizer `c`, and the dyadic-rectangle bound on [1,inf)^2 driven by
//! a weight function `phi`, each with a relaxed closed-form companion.
//!
//! Series are summed in a fixed order with a certified truncation: once
//! the analytic decrease conditions hold, the tail beyond the last term
//! is bounded by an integral comparison evaluated through the upper
//! incomplete gamma function. The reported bound is always
//! `partial_sum + tail_estimate`, an upper bound on the infinite sum;
//! `converged` records whether the tail met the requested tolerance
//! within the term budget.

use serde::Serialize;
use statrs::function::gamma::gamma_ui;

use crate::bounds::{BoundBuilder, BoundResult};
use crate::error::{Error, Result};
use crate::field::HurstPair;

const E: f64 = std::f64::consts::E;

/// Default term budget for one-dimensional series.
pub const DEFAULT_BUDGET_1D: u64 = 100_000;
/// Default term budget for double series summed in expanding shells.
pub const DEFAULT_BUDGET_2D: u64 = 1_000_000;

/// Probe depth used when computing the schedule constant M.
const M_PROBE: usize = 64;

/// Number of consecutive decreasing terms required before the integral
/// tail bound is trusted.
const DECREASE_PROBES: usize = 8;

/// Strictly increasing schedule with `b_0 = 1`, `b_k -> inf`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GrowthSchedule {
    /// b_k = ratio^k with ratio > 1.
    Geometric { ratio: f64 },
    /// b_k = e^k.
    Exp,
}

impl GrowthSchedule {
    pub fn geometric(ratio: f64) -> Result<Self> {
        if !(ratio.is_finite() && ratio > 1.0) {
            return Err(Error::InvalidParam {
                name: "ratio",
                msg: format!("geometric schedule needs ratio > 1, got {ratio}"),
            });
        }
        Ok(GrowthSchedule::Geometric { ratio })
    }

    /// ln b_k; exact even where b_k itself overflows.
    pub fn ln_b(&self, k: u64) -> f64 {
        k as f64 * self.step_ln()
    }

    pub fn b(&self, k: u64) -> f64 {
        self.ln_b(k).exp()
    }

    /// ln(b_{k+1} / b_k), constant for the built-in schedules.
    pub fn step_ln(&self) -> f64 {
        match self {
            GrowthSchedule::Geometric { ratio } => ratio.ln(),
            GrowthSchedule::Exp => 1.0,
        }
    }
}

/// Normalizing function c on (0, inf) with c(1/t) = c(t).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Normalizer {
    /// c(t) = sqrt(ln(|ln t| + e)); the canonical slowly-growing choice.
    LogLog,
    /// c identically equal to a positive constant. Violates the growth
    /// condition, so the series bounds report non-decay for it; kept for
    /// exercising that path and the schedule constant.
    Const(f64),
}

impl Normalizer {
    pub fn eval(&self, t: f64) -> f64 {
        self.eval_ln(t.ln())
    }

    /// Evaluate from ln t; keeps t = e^700-style inputs finite.
    pub fn eval_ln(&self, ln_t: f64) -> f64 {
        match self {
            Normalizer::LogLog => (ln_t.abs() + E).ln().sqrt(),
            Normalizer::Const(v) => *v,
        }
    }
}

/// Weight function on (0, inf)^2, increasing in each coordinate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WeightFn {
    /// phi(x) = prefactor * sqrt(ln(log2(x1 x2) + e)).
    Phi1 { prefactor: f64 },
    /// phi(x) = prefactor * sqrt(ln(e + log2 x1) + ln(e + log2 x2)).
    Phi2 { prefactor: f64 },
    /// phi(x) = scale * (1 + log2 x1 + log2 x2)^exponent with
    /// exponent in (0, 1/2]. Grows fast enough for the relaxed quadrant
    /// bound's series to converge, unlike the logarithmic weights.
    PowerLog { scale: f64, exponent: f64 },
    /// Constant weight; violates the growth condition and trips the
    /// non-decay detection.
    Const(f64),
}

impl WeightFn {
    /// The first logarithmic weight at prefactor 1 (the tabulated form).
    pub fn phi1() -> Self {
        WeightFn::Phi1 { prefactor: 1.0 }
    }

    /// The second logarithmic weight at prefactor 1 (the tabulated form).
    pub fn phi2() -> Self {
        WeightFn::Phi2 { prefactor: 1.0 }
    }

    /// First weight with the sqrt(2 + delta) prefactor spelled out.
    pub fn phi1_with_delta(delta: f64) -> Result<Self> {
        Ok(WeightFn::Phi1 {
            prefactor: check_delta(delta)?,
        })
    }

    /// Second weight with the sqrt(2 + delta) prefactor spelled out.
    pub fn phi2_with_delta(delta: f64) -> Result<Self> {
        Ok(WeightFn::Phi2 {
            prefactor: check_delta(delta)?,
        })
    }

    pub fn power_log(scale: f64, exponent: f64) -> Result<Self> {
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(Error::InvalidParam {
                name: "scale",
                msg: format!("must be positive, got {scale}"),
            });
        }
        if !(exponent > 0.0 && exponent <= 0.5) {
            return Err(Error::InvalidParam {
                name: "exponent",
                msg: format!("must be in (0, 1/2], got {exponent}"),
            });
        }
        Ok(WeightFn::PowerLog { scale, exponent })
    }

    pub fn eval(&self, x1: f64, x2: f64) -> f64 {
        match self {
            WeightFn::Phi1 { prefactor } => prefactor * ((x1 * x2).log2() + E).ln().sqrt(),
            WeightFn::Phi2 { prefactor } => {
                prefactor * ((E + x1.log2()).ln() + (E + x2.log2()).ln()).sqrt()
            }
            WeightFn::PowerLog { scale, exponent } => {
                scale * (1.0 + x1.log2() + x2.log2()).powf(*exponent)
            }
            WeightFn::Const(v) => *v,
        }
    }

    /// phi(2^n, 2^m) in closed form; exact at dyadic points.
    pub fn eval_dyadic(&self, n: u64, m: u64) -> f64 {
        match self {
            WeightFn::Phi1 { prefactor } => prefactor * ((n + m) as f64 + E).ln().sqrt(),
            WeightFn::Phi2 { prefactor } => {
                prefactor * ((n as f64 + E).ln() + (m as f64 + E).ln()).sqrt()
            }
            WeightFn::PowerLog { scale, exponent } => {
                scale * (1.0 + (n + m) as f64).powf(*exponent)
            }
            WeightFn::Const(v) => *v,
        }
    }

    /// phi(1, 1).
    pub fn at_one(&self) -> f64 {
        self.eval_dyadic(0, 0)
    }
}

fn check_delta(delta: f64) -> Result<f64> {
    if !(delta >= 0.0 && delta.is_finite()) {
        return Err(Error::InvalidParam {
            name: "delta",
            msg: format!("must be non-negative, got {delta}"),
        });
    }
    Ok((2.0 + delta).sqrt())
}

/// Result of a truncated series evaluation. The certified upper bound
/// on the infinite sum is `partial_sum + tail_estimate`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SeriesValue {
    pub partial_sum: f64,
    pub terms_used: u64,
    pub tail_estimate: f64,
    pub converged: bool,
}

impl SeriesValue {
    pub fn total(&self) -> f64 {
        self.partial_sum + self.tail_estimate
    }

    fn empty() -> Self {
        SeriesValue {
            partial_sum: 0.0,
            terms_used: 0,
            tail_estimate: 0.0,
            converged: false,
        }
    }
}

/// The schedule constant `M = inf_k (b_k/b_{k+1})^{H1+H2} c(b_k)`
/// computed over a probe prefix, with a stabilization flag (false when
/// the running infimum still moved in the last quarter of the probes).
#[derive(Debug, Clone, Copy, Serialize)]
pub struct MConstant {
    pub value: f64,
    pub stabilized: bool,
}

/// The k-th annulus weight `(b_k/b_{k+1})^{H1+H2} c(b_k)`.
pub fn schedule_weight(h: HurstPair, sched: &GrowthSchedule, c: &Normalizer, k: u64) -> f64 {
    (-h.h_sum() * sched.step_ln()).exp() * c.eval_ln(sched.ln_b(k))
}

/// Infimum of the annulus weights over k in [0, k_probe].
pub fn schedule_m_constant(
    h: HurstPair,
    sched: &GrowthSchedule,
    c: &Normalizer,
    k_probe: usize,
) -> Result<MConstant> {
    if k_probe < 16 {
        return Err(Error::InvalidParam {
            name: "k_probe",
            msg: format!("must be >= 16, got {k_probe}"),
        });
    }
    let mut inf = f64::INFINITY;
    let mut last_change = 0usize;
    for k in 0..=k_probe {
        let w = schedule_weight(h, sched, c, k as u64);
        if w < inf {
            inf = w;
            last_change = k;
        }
    }
    if inf.is_nan() || inf <= 0.0 {
        return Err(Error::InvalidParam {
            name: "schedule",
            msg: format!("infimum of annulus weights is {inf}; the schedule condition fails"),
        });
    }
    Ok(MConstant {
        value: inf,
        stabilized: last_change < k_probe - k_probe / 4,
    })
}

// ---------------------------------------------------------------------------
// series engines
// ---------------------------------------------------------------------------

fn check_tol(tol: f64) -> Result<()> {
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(Error::InvalidParam {
            name: "tol",
            msg: format!("must be positive, got {tol}"),
        });
    }
    Ok(())
}

fn decreasing_tail(recent: &[f64]) -> bool {
    recent.len() >= DECREASE_PROBES
        && recent
            .windows(2)
            .rev()
            .take(DECREASE_PROBES - 1)
            .all(|w| w[1] <= w[0])
}

fn push_recent(recent: &mut Vec<f64>, t: f64) {
    recent.push(t);
    if recent.len() > DECREASE_PROBES {
        recent.remove(0);
    }
}

/// Sum_{k>=0} (kappa u_k)^a exp(-d kappa u_k) with u_k = ln(k lam + e).
///
/// Tail after index K by integral comparison: substituting
/// u = ln(x lam + e) turns the tail integral into
/// (kappa^a / lam) (d kappa - 1)^{-(a+1)} GammaUpper(a+1, (d kappa - 1) u_K);
/// finite exactly when d kappa > 1, and a valid term-sum bound once the
/// integrand is decreasing, i.e. kappa u_K >= a/d.
fn sum_log_power_series(
    d: f64,
    a: f64,
    kappa: f64,
    lam: f64,
    tol: f64,
    budget: u64,
) -> Result<SeriesValue> {
    let dk = d * kappa;
    if dk <= 1.0 {
        return Err(Error::SeriesDiverges(format!(
            "log-power series needs d*kappa > 1, got {dk}"
        )));
    }
    let tail_at = |u: f64| -> f64 {
        let r = dk - 1.0;
        (a * kappa.ln() - lam.ln() - (a + 1.0) * r.ln()).exp() * gamma_ui(a + 1.0, r * u)
    };
    let mut partial = 0.0f64;
    let mut recent: Vec<f64> = Vec::with_capacity(DECREASE_PROBES + 1);
    let mut k = 0u64;
    loop {
        let u = (k as f64 * lam + E).ln();
        let v = kappa * u;
        let t = (a * v.ln() - d * v).exp();
        partial += t;
        push_recent(&mut recent, t);
        let gate = v >= a / d && decreasing_tail(&recent);
        if gate {
            let tail = tail_at(u);
            if tail <= tol * partial || k + 1 >= budget {
                return Ok(SeriesValue {
                    partial_sum: partial,
                    terms_used: k + 1,
                    tail_estimate: tail,
                    converged: tail <= tol * partial,
                });
            }
        } else if k + 1 >= budget {
            return Err(Error::SeriesNonDecay(format!(
                "terms not confirmed decreasing within budget {budget}"
            )));
        }
        k += 1;
    }
}

/// Sum over shells of the double series whose terms depend on n+m only:
/// Sum_{j>=0} (j+1) (kappa u_j)^q exp(-rho u_j) with u_j = ln(j+e).
///
/// Finite exactly when rho > 2 (the shell count eats one power).
fn sum_shell_series(q: f64, kappa: f64, rho: f64, tol: f64, budget: u64) -> Result<SeriesValue> {
    if rho <= 2.0 {
        return Err(Error::SeriesDiverges(format!(
            "shell series needs rho > 2 (shell counts grow linearly), got rho = {rho}"
        )));
    }
    let tail_at = |u: f64| -> f64 {
        let r = rho - 2.0;
        (q * kappa.ln() - (q + 1.0) * r.ln()).exp() * gamma_ui(q + 1.0, r * u)
    };
    let mut partial = 0.0f64;
    let mut recent: Vec<f64> = Vec::with_capacity(DECREASE_PROBES + 1);
    let mut terms = 0u64;
    let mut j = 0u64;
    loop {
        let u = (j as f64 + E).ln();
        let shell = (j + 1) as f64 * (q * (kappa * u).ln() - rho * u).exp();
        partial += shell;
        terms += j + 1;
        push_recent(&mut recent, shell);
        // decreasing gate for (x+e)^{1-rho} (kappa ln(x+e))^q
        let gate = u * (rho - 1.0) >= q && decreasing_tail(&recent);
        if gate {
            let tail = tail_at(u);
            if tail <= tol * partial || terms >= budget {
                return Ok(SeriesValue {
                    partial_sum: partial,
                    terms_used: terms,
                    tail_estimate: tail,
                    converged: tail <= tol * partial,
                });
            }
        } else if terms >= budget {
            return Err(Error::SeriesNonDecay(format!(
                "shell sums not confirmed decreasing within budget {budget}"
            )));
        }
        j += 1;
    }
}

/// Product-form double series
/// Sum_{n,m} (kappa (a_n + a_m))^q exp(-rho (a_n + a_m)), a_n = ln(n+e),
/// summed over expanding square frames. Finite exactly when rho > 1.
///
/// Tail after the square [0,N]^2 via (a+b)^q <= 2^{q-1}(a^q + b^q):
/// kappa^q 2^q (G(N) S_P + P(N) S_G) with the one-dimensional pieces
/// P, G bounded by integrals.
fn sum_product_series(q: f64, kappa: f64, rho: f64, tol: f64, budget: u64) -> Result<SeriesValue> {
    if rho <= 1.0 {
        return Err(Error::SeriesDiverges(format!(
            "product series needs rho > 1, got rho = {rho}"
        )));
    }
    let p_tail = |u: f64| ((1.0 - rho) * u).exp() / (rho - 1.0);
    let g_tail =
        |u: f64| (-(q + 1.0) * (rho - 1.0).ln()).exp() * gamma_ui(q + 1.0, (rho - 1.0) * u);
    let term = |an: f64, am: f64| (q * (kappa * (an + am)).ln() - rho * (an + am)).exp();

    let mut partial = 0.0f64;
    let mut sp = 0.0f64; // sum of (n+e)^{-rho} up to N
    let mut sg = 0.0f64; // sum of a_n^q (n+e)^{-rho} up to N
    let mut a_cache: Vec<f64> = Vec::new();
    let mut recent: Vec<f64> = Vec::with_capacity(DECREASE_PROBES + 1);
    let mut terms = 0u64;
    let mut n = 0u64;
    loop {
        let an = (n as f64 + E).ln();
        a_cache.push(an);
        let mut frame = 0.0f64;
        for m in 0..n {
            let t = term(an, a_cache[m as usize]);
            frame += 2.0 * t;
        }
        frame += term(an, an);
        terms += 2 * n + 1;
        partial += frame;
        sp += (-rho * an).exp();
        sg += (q * an.ln() - rho * an).exp();
        push_recent(&mut recent, frame);

        // decreasing gate for (ln(x+e))^q (x+e)^{-rho}
        let gate = an * rho >= q && decreasing_tail(&recent);
        if gate {
            let (pn, gn) = (p_tail(an), g_tail(an));
            let tail = (q * kappa.ln() + q * std::f64::consts::LN_2).exp()
                * (gn * (sp + pn) + pn * (sg + gn));
            if tail <= tol * partial {
                return Ok(SeriesValue {
                    partial_sum: partial,
                    terms_used: terms,
                    tail_estimate: tail,
                    converged: true,
                });
            }
            if terms >= budget {
                return Ok(SeriesValue {
                    partial_sum: partial,
                    terms_used: terms,
                    tail_estimate: tail,
                    converged: false,
                });
            }
        } else if terms >= budget {
            return Err(Error::SeriesNonDecay(format!(
                "frame sums not confirmed decreasing within budget {budget}"
            )));
        }
        n += 1;
    }
}

/// Shell series with stretched-exponential decay:
/// Sum_{j>=0} (j+1) (kappa (1+j)^{2g})^q exp(-rho (1+j)^{2g}).
///
/// Always finite for rho > 0; the tail integral substitutes
/// y = (1+x)^{2g} into an upper incomplete gamma of order q + 1/g.
fn sum_stretched_shell_series(
    q: f64,
    kappa: f64,
    rho: f64,
    two_g: f64,
    tol: f64,
    budget: u64,
) -> Result<SeriesValue> {
    if rho.is_nan() || rho <= 0.0 {
        return Err(Error::SeriesDiverges(format!("needs rho > 0, got {rho}")));
    }
    let g = two_g / 2.0;
    let order = q + 1.0 / g;
    let tail_at = |y: f64| -> f64 {
        (q * kappa.ln() - two_g.ln() - order * rho.ln()).exp() * gamma_ui(order, rho * y)
    };
    let mut partial = 0.0f64;
    let mut recent: Vec<f64> = Vec::with_capacity(DECREASE_PROBES + 1);
    let mut terms = 0u64;
    let mut j = 0u64;
    loop {
        let y = (1.0 + j as f64).powf(two_g);
        let shell = (j + 1) as f64 * (q * (kappa * y).ln() - rho * y).exp();
        partial += shell;
        terms += j + 1;
        push_recent(&mut recent, shell);
        // decreasing gate: (1 + 2gq) <= 2g rho (1+x)^{2g}
        let gate = 1.0 + two_g * q <= two_g * rho * y && decreasing_tail(&recent);
        if gate {
            let tail = tail_at(y);
            if tail <= tol * partial || terms >= budget {
                return Ok(SeriesValue {
                    partial_sum: partial,
                    terms_used: terms,
                    tail_estimate: tail,
                    converged: tail <= tol * partial,
                });
            }
        } else if terms >= budget {
            return Err(Error::SeriesNonDecay(format!(
                "shell sums not confirmed decreasing within budget {budget}"
            )));
        }
        j += 1;
    }
}

// ---------------------------------------------------------------------------
// quadrant bounds driven by (b_k, c)
// ---------------------------------------------------------------------------

fn loglog_kappa(h: HurstPair, sched: &GrowthSchedule) -> f64 {
    // w_k^2 = s^2 ln(k lam + e) with s = exp(-(H1+H2) lam)
    (-2.0 * h.h_sum() * sched.step_ln()).exp()
}

/// Tail bound for the normalized field
/// `|X(t)| / ((t1 v t2)^{H1+H2} c(t1 v t2))` over the whole quadrant:
/// `16 e^{2/H + 1/2} eps^{4/H} Sum_k exp{-(3 eps^2/(2(4^{1-H}+3))) w_k^2}
///  w_k^{4/H}` with annulus weights w_k, valid for eps > 2/M.
pub fn global_bound_thm35(
    h: HurstPair,
    sched: &GrowthSchedule,
    c: &Normalizer,
    eps: f64,
    tol: f64,
) -> Result<(BoundResult, SeriesValue)> {
    global_bound_thm35_budget(h, sched, c, eps, tol, DEFAULT_BUDGET_1D)
}

pub fn global_bound_thm35_budget(
    h: HurstPair,
    sched: &GrowthSchedule,
    c: &Normalizer,
    eps: f64,
    tol: f64,
    budget: u64,
) -> Result<(BoundResult, SeriesValue)> {
    check_eps_tol(eps, tol)?;
    let m = schedule_m_constant(h, sched, c, M_PROBE)?;
    let hm = h.h_min();
    let builder = BoundBuilder::new("eq13", eps)
        .param("h1", h.h1())
        .param("h2", h.h2())
        .param("m_const", m.value)
        .require("eps > 2/M", eps > 2.0 / m.value);
    if !builder.is_satisfied() {
        return Ok((builder.finish_log(f64::NAN), SeriesValue::empty()));
    }
    let d = 3.0 * eps * eps / (2.0 * (4f64.powf(1.0 - hm) + 3.0));
    let a = 2.0 / hm;
    let sv = match c {
        Normalizer::Const(_) => {
            return Err(Error::SeriesNonDecay(
                "constant normalizer: annulus weights do not grow".into(),
            ))
        }
        Normalizer::LogLog => {
            sum_log_power_series(d, a, loglog_kappa(h, sched), sched.step_ln(), tol, budget)?
        }
    };
    let log_value = 16f64.ln() + 2.0 / hm + 0.5 + (4.0 / hm) * eps.ln() + sv.total().ln();
    Ok((builder.finish_log(log_value), sv))
}

/// Relaxed closed form of the quadrant bound:
/// `16 sqrt2 (e/2)^{2/H} eps^{4/H} (Sum_k v_k^{2/H} e^{-v_k}) M^{4/H}
///  e^{-u eps^2}` with `u = 3 M^2 / (4 (4^{1-H} + 3))` and
/// `v_k = (2/M^2) w_k^2`; runtime-checked on `u eps^2 > 2`, `v_k >= 2`.
pub fn global_bound_cor36(
    h: HurstPair,
    sched: &GrowthSchedule,
    c: &Normalizer,
    eps: f64,
    tol: f64,
) -> Result<(BoundResult, SeriesValue)> {
    global_bound_cor36_budget(h, sched, c, eps, tol, DEFAULT_BUDGET_1D)
}

pub fn global_bound_cor36_budget(
    h: HurstPair,
    sched: &GrowthSchedule,
    c: &Normalizer,
    eps: f64,
    tol: f64,
    budget: u64,
) -> Result<(BoundResult, SeriesValue)> {
    check_eps_tol(eps, tol)?;
    let m = schedule_m_constant(h, sched, c, M_PROBE)?;
    let hm = h.h_min();
    let u = 3.0 * m.value * m.value / (4.0 * (4f64.powf(1.0 - hm) + 3.0));
    let v_ok = (0..=M_PROBE as u64).all(|k| {
        let w = schedule_weight(h, sched, c, k);
        2.0 * w * w / (m.value * m.value) >= 2.0 * (1.0 - 1e-12)
    });
    let builder = BoundBuilder::new("eq14", eps)
        .param("h1", h.h1())
        .param("h2", h.h2())
        .param("m_const", m.value)
        .param("u", u)
        .require("u*eps^2 > 2", u * eps * eps > 2.0)
        .require("v_k >= 2 for probed k", v_ok);
    if !builder.is_satisfied() {
        return Ok((builder.finish_log(f64::NAN), SeriesValue::empty()));
    }
    let a = 2.0 / hm;
    let sv = match c {
        Normalizer::Const(_) => {
            return Err(Error::SeriesNonDecay(
                "constant normalizer: v_k is constant, the series diverges".into(),
            ))
        }
        Normalizer::LogLog => {
            let kappa = 2.0 * loglog_kappa(h, sched) / (m.value * m.value);
            sum_log_power_series(1.0, a, kappa, sched.step_ln(), tol, budget)?
        }
    };
    let log_value = (16.0 * std::f64::consts::SQRT_2).ln()
        + (2.0 / hm) * (1.0 - std::f64::consts::LN_2)
        + (4.0 / hm) * eps.ln()
        + sv.total().ln()
        + (4.0 / hm) * m.value.ln()
        - u * eps * eps;
    Ok((builder.finish_log(log_value), sv))
}

/// The worked closed form for `b_k = e^k`, `c(t) = sqrt(ln(|ln t| + e))`:
/// `16 sqrt2 e^{2/H} e^{-4(H1+H2)/H} eps^{4/H}
///  (Sum_k (ln(k+e))^{2/H} (k+e)^{-2}) e^{-u eps^2}` with
/// `u = 3 e^{-2(H1+H2)} / (4 (4^{1-H} + 3))`.
pub fn example1_bound(h: HurstPair, eps: f64, tol: f64) -> Result<(BoundResult, SeriesValue)> {
    example1_bound_budget(h, eps, tol, DEFAULT_BUDGET_1D)
}

pub fn example1_bound_budget(
    h: HurstPair,
    eps: f64,
    tol: f64,
    budget: u64,
) -> Result<(BoundResult, SeriesValue)> {
    check_eps_tol(eps, tol)?;
    let hm = h.h_min();
    let u = example1_u(h);
    let builder = BoundBuilder::new("example1", eps)
        .param("h1", h.h1())
        .param("h2", h.h2())
        .param("u", u)
        .require("u*eps^2 > 2", u * eps * eps > 2.0);
    if !builder.is_satisfied() {
        return Ok((builder.finish_log(f64::NAN), SeriesValue::empty()));
    }
    let sv = sum_log_power_series(2.0, 2.0 / hm, 1.0, 1.0, tol, budget)?;
    let log_value = (16.0 * std::f64::consts::SQRT_2).ln() + 2.0 / hm - 4.0 * h.h_sum() / hm
        + (4.0 / hm) * eps.ln()
        + sv.total().ln()
        - u * eps * eps;
    Ok((builder.finish_log(log_value), sv))
}

/// `u = 3 e^{-2(H1+H2)} / (4 (4^{1-H} + 3))`, the exponential rate of the
/// worked closed form.
pub fn example1_u(h: HurstPair) -> f64 {
    3.0 * (-2.0 * h.h_sum()).exp() / (4.0 * (4f64.powf(1.0 - h.h_min()) + 3.0))
}

/// Threshold above which `u eps^2 > 2` holds for the relaxed quadrant
/// bound: `(2/M) sqrt(2 (4^{1-H} + 3) / 3)`.
pub fn cor36_threshold(h: HurstPair, m_value: f64) -> f64 {
    2.0 / m_value * (2.0 * (4f64.powf(1.0 - h.h_min()) + 3.0) / 3.0).sqrt()
}

// ---------------------------------------------------------------------------
// quadrant bounds on [1, inf)^2 driven by phi
// ---------------------------------------------------------------------------

/// `C1 = N1 N2 exp{Q + 1/(2(4^{H1+H2}+1))}` of the dyadic-rectangle bound.
fn c1_log(h: HurstPair) -> f64 {
    (h.n1() * h.n2()).ln() + h.q() + 1.0 / (2.0 * (4f64.powf(h.h_sum()) + 1.0))
}

/// `C2 = 3 / (2 * 4^eta (4^H 3 + 4^{1-H}))` of the dyadic-rectangle bound.
pub fn quadrant_c2(h: HurstPair) -> f64 {
    let hm = h.h_min();
    3.0 / (2.0 * 4f64.powf(h.h_max()) * (4f64.powf(hm) * 3.0 + 4f64.powf(1.0 - hm)))
}

/// Tail bound for `|X(t)| / (t1^{H1} t2^{H2} phi(t))` over [1, inf)^2:
/// `C1 eps^{2Q} Sum_{n,m} phi^{2Q}(2^n, 2^m)
///  exp{-C2 eps^2 phi^2(2^n, 2^m)}`, valid for eps > 2/phi(1,1).
pub fn quadrant_bound_thm47(
    h: HurstPair,
    phi: &WeightFn,
    eps: f64,
    tol: f64,
) -> Result<(BoundResult, SeriesValue)> {
    quadrant_bound_thm47_budget(h, phi, eps, tol, DEFAULT_BUDGET_2D)
}

pub fn quadrant_bound_thm47_budget(
    h: HurstPair,
    phi: &WeightFn,
    eps: f64,
    tol: f64,
    budget: u64,
) -> Result<(BoundResult, SeriesValue)> {
    check_eps_tol(eps, tol)?;
    let phi_one = phi.at_one();
    let builder = BoundBuilder::new("eq20", eps)
        .param("h1", h.h1())
        .param("h2", h.h2())
        .param("phi_one", phi_one)
        .require("eps > 2/phi(1,1)", eps > 2.0 / phi_one);
    if !builder.is_satisfied() {
        return Ok((builder.finish_log(f64::NAN), SeriesValue::empty()));
    }
    let q = h.q();
    let c2e2 = quadrant_c2(h) * eps * eps;
    let sv = match phi {
        WeightFn::Const(_) => {
            return Err(Error::SeriesNonDecay(
                "constant weight: double-series terms do not decay".into(),
            ))
        }
        WeightFn::Phi1 { prefactor } => {
            let k = prefactor * prefactor;
            sum_shell_series(q, k, c2e2 * k, tol, budget)?
        }
        WeightFn::Phi2 { prefactor } => {
            let k = prefactor * prefactor;
            sum_product_series(q, k, c2e2 * k, tol, budget)?
        }
        WeightFn::PowerLog { scale, exponent } => {
            let k = scale * scale;
            sum_stretched_shell_series(q, k, c2e2 * k, 2.0 * exponent, tol, budget)?
        }
    };
    let log_value = c1_log(h) + 2.0 * q * eps.ln() + sv.total().ln();
    Ok((builder.finish_log(log_value), sv))
}

/// Relaxed closed form on [1, inf)^2, with the exponential factor taken
/// from the derivation (`e^{-u eps^2}` with `u = C2 phi^2(1,1)/2`):
/// `C1 eps^{2Q} e^{-u eps^2} Sum_{n,m} phi^{2Q}(2^n,2^m) e^{-v_{n,m}}`,
/// `v_{n,m} = 2 phi^2(2^n,2^m)/phi^2(1,1)`; runtime-checked on
/// `u eps^2 > 2` and `v >= 2`.
pub fn quadrant_bound_cor48(
    h: HurstPair,
    phi: &WeightFn,
    eps: f64,
    tol: f64,
) -> Result<(BoundResult, SeriesValue)> {
    quadrant_bound_cor48_budget(h, phi, eps, tol, DEFAULT_BUDGET_2D)
}

pub fn quadrant_bound_cor48_budget(
    h: HurstPair,
    phi: &WeightFn,
    eps: f64,
    tol: f64,
    budget: u64,
) -> Result<(BoundResult, SeriesValue)> {
    check_eps_tol(eps, tol)?;
    let phi_one = phi.at_one();
    let phi_one_sq = phi_one * phi_one;
    let u = quadrant_c2(h) * phi_one_sq / 2.0;
    // v is scale-invariant in phi; monotone weights give v >= 2 with the
    // minimum at (0,0), checked over a probe block.
    let v_ok = (0..8u64).all(|n| {
        (0..8u64).all(|m| {
            let p = phi.eval_dyadic(n, m);
            2.0 * p * p / phi_one_sq >= 2.0 * (1.0 - 1e-12)
        })
    });
    let builder = BoundBuilder::new("eq21-proofform", eps)
        .param("h1", h.h1())
        .param("h2", h.h2())
        .param("phi_one", phi_one)
        .param("u", u)
        .require("u*eps^2 > 2", u * eps * eps > 2.0)
        .require("v_{n,m} >= 2 for probed (n,m)", v_ok);
    if !builder.is_satisfied() {
        return Ok((builder.finish_log(f64::NAN), SeriesValue::empty()));
    }
    let q = h.q();
    let sv = match phi {
        WeightFn::Const(_) => {
            return Err(Error::SeriesNonDecay(
                "constant weight: v is constant".into(),
            ))
        }
        // v = 2 ln(n+m+e): the shell series sits exactly at the
        // divergence boundary rho = 2, so this errors out.
        WeightFn::Phi1 { prefactor } => {
            sum_shell_series(q, prefactor * prefactor, 2.0, tol, budget)?
        }
        // v = ln(n+e) + ln(m+e): rho = 1, likewise divergent.
        WeightFn::Phi2 { prefactor } => {
            sum_product_series(q, prefactor * prefactor, 1.0, tol, budget)?
        }
        WeightFn::PowerLog { scale, exponent } => {
            sum_stretched_shell_series(q, scale * scale, 2.0, 2.0 * exponent, tol, budget)?
        }
    };
    let log_value = c1_log(h) + 2.0 * q * eps.ln() - u * eps * eps + sv.total().ln();
    Ok((builder.finish_log(log_value), sv))
}

/// Threshold above which `u eps^2 > 2` holds for the relaxed
/// dyadic-rectangle bound: `sqrt(2/u)` with `u = C2 phi^2(1,1)/2`.
pub fn cor48_threshold(h: HurstPair, phi: &WeightFn) -> f64 {
    let phi_one = phi.at_one();
    (2.0 / (quadrant_c2(h) * phi_one * phi_one / 2.0)).sqrt()
}

// ---------------------------------------------------------------------------
// the two worked closed forms on [1, inf)^2
// ---------------------------------------------------------------------------

/// Selector for the worked weight functions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExamplePhi {
    Phi1,
    Phi2,
}

/// Term (n, m) of the worked series:
/// `(ln(n+m+e))^Q / (n+m+e)^2` for the first weight, and
/// `(ln((n+e)(m+e)))^Q / ((n+e)^2 (m+e)^2)` for the second.
pub fn example2_series_term(h: HurstPair, which: ExamplePhi, n: u64, m: u64) -> f64 {
    let q = h.q();
    match which {
        ExamplePhi::Phi1 => {
            let u = (n as f64 + m as f64 + E).ln();
            (q * u.ln() - 2.0 * u).exp()
        }
        ExamplePhi::Phi2 => {
            let (an, am) = ((n as f64 + E).ln(), (m as f64 + E).ln());
            (q * (an + am).ln() - 2.0 * (an + am)).exp()
        }
    }
}

/// The two printed closed forms `C1 eps^{2Q} e^{-(C2/2) eps^2} * series`.
///
/// The first series sums shells of a harmonic-order sequence and
/// genuinely diverges, which the evaluator reports as an error; the
/// second converges.
pub fn example2_bounds(
    h: HurstPair,
    which: ExamplePhi,
    eps: f64,
    tol: f64,
) -> Result<(BoundResult, SeriesValue)> {
    example2_bounds_budget(h, which, eps, tol, DEFAULT_BUDGET_2D)
}

pub fn example2_bounds_budget(
    h: HurstPair,
    which: ExamplePhi,
    eps: f64,
    tol: f64,
    budget: u64,
) -> Result<(BoundResult, SeriesValue)> {
    check_eps_tol(eps, tol)?;
    let q = h.q();
    let u = quadrant_c2(h) / 2.0;
    let family = match which {
        ExamplePhi::Phi1 => "example2-phi1",
        ExamplePhi::Phi2 => "example2-phi2",
    };
    let builder = BoundBuilder::new(family, eps)
        .param("h1", h.h1())
        .param("h2", h.h2())
        .param("u", u)
        .require("u*eps^2 > 2", u * eps * eps > 2.0);
    if !builder.is_satisfied() {
        return Ok((builder.finish_log(f64::NAN), SeriesValue::empty()));
    }
    let sv = match which {
        ExamplePhi::Phi1 => sum_shell_series(q, 1.0, 2.0, tol, budget)?,
        ExamplePhi::Phi2 => sum_product_series(q, 1.0, 2.0, tol, budget)?,
    };
    let log_value = c1_log(h) + 2.0 * q * eps.ln() - u * eps * eps + sv.total().ln();
    Ok((builder.finish_log(log_value), sv))
}

fn check_eps_tol(eps: f64, tol: f64) -> Result<()> {
    if !(eps.is_finite() && eps > 0.0) {
        return Err(Error::InvalidParam {
            name: "eps",
            msg: format!("must be positive, got {eps}"),
        });
    }
    check_tol(tol)
}
