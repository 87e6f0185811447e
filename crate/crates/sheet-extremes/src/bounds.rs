//! Analytic tail bounds on compact domains: the generic entropy bound,
//! its lambda-optimized form, and the specialized closed forms for the
//! max metric on squares and the Hoelder metric on rectangles.
//!
//! Every bound is evaluated in log space and exponentiated once, so the
//! huge `eps^{4/H}`-style prefactors never overflow. Threshold conditions
//! (`eps > 2` and friends) are data on the result, not errors, so sweep
//! campaigns can proceed through invalid cells.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::{HurstPair, Rect};
use crate::quad::integrate_zero_singular;

/// Reporting floor: values whose log drops below ln(1e-300) are reported
/// as 0 with the underflow flag set.
const UNDERFLOW_LOG: f64 = -690.775527898214;

/// A validity condition attached to a bound evaluation.
#[derive(Debug, Clone, Serialize)]
pub struct Condition {
    pub description: String,
    pub satisfied: bool,
}

/// Value of an analytic tail bound plus the parameters and validity
/// conditions under which it holds. An invalid result carries no value.
#[derive(Debug, Clone, Serialize)]
pub struct BoundResult {
    pub family: String,
    pub epsilon: f64,
    pub value: Option<f64>,
    pub log_value: Option<f64>,
    pub params: Vec<(String, f64)>,
    pub validity: Vec<Condition>,
    pub vacuous: bool,
    pub underflow: bool,
}

impl BoundResult {
    pub fn is_valid(&self) -> bool {
        self.validity.iter().all(|c| c.satisfied)
    }
}

pub(crate) struct BoundBuilder {
    family: String,
    eps: f64,
    params: Vec<(String, f64)>,
    validity: Vec<Condition>,
}

impl BoundBuilder {
    pub(crate) fn new(family: &str, eps: f64) -> Self {
        Self {
            family: family.to_string(),
            eps,
            params: Vec::new(),
            validity: Vec::new(),
        }
    }

    pub(crate) fn param(mut self, name: &str, value: f64) -> Self {
        self.params.push((name.to_string(), value));
        self
    }

    pub(crate) fn require(mut self, description: &str, satisfied: bool) -> Self {
        self.validity.push(Condition {
            description: description.to_string(),
            satisfied,
        });
        self
    }

    pub(crate) fn is_satisfied(&self) -> bool {
        self.validity.iter().all(|c| c.satisfied)
    }

    /// Finish with the log of the bound value; applies the validity,
    /// underflow and vacuousness rules.
    pub(crate) fn finish_log(self, log_value: f64) -> BoundResult {
        if !self.is_satisfied() {
            return BoundResult {
                family: self.family,
                epsilon: self.eps,
                value: None,
                log_value: None,
                params: self.params,
                validity: self.validity,
                vacuous: false,
                underflow: false,
            };
        }
        let underflow = log_value < UNDERFLOW_LOG;
        let value = if underflow { 0.0 } else { log_value.exp() };
        BoundResult {
            family: self.family,
            epsilon: self.eps,
            value: Some(value),
            log_value: Some(log_value),
            params: self.params,
            validity: self.validity,
            vacuous: value > 1.0,
            underflow,
        }
    }
}

fn check_p(p: f64) -> Result<()> {
    if !(p.is_finite() && 0.0 < p && p < 1.0) {
        return Err(Error::InvalidParam {
            name: "p",
            msg: format!("must be in (0,1), got {p}"),
        });
    }
    Ok(())
}

fn check_eps(eps: f64) -> Result<()> {
    if !(eps.is_finite() && eps > 0.0) {
        return Err(Error::InvalidParam {
            name: "eps",
            msg: format!("must be positive, got {eps}"),
        });
    }
    Ok(())
}

/// Inputs of the generic entropy bound: power modulus
/// `sigma(h) = C h^alpha`, the sup of point standard deviations `gamma`,
/// the modulus of the Chebyshev radius `beta`, the splitting parameter
/// `p`, the entropy exponent `mu` of `r(v) = v^mu`, and the covering
/// bound `entropy(u) >= N(sigma^{-1}(u))`.
pub struct GenericBoundInputs<'a> {
    pub sigma_c: f64,
    pub sigma_alpha: f64,
    pub gamma: f64,
    pub beta: f64,
    pub p: f64,
    pub mu: f64,
    pub entropy: &'a dyn Fn(f64) -> f64,
}

impl GenericBoundInputs<'_> {
    fn validate(&self) -> Result<()> {
        check_p(self.p)?;
        if self.sigma_c.is_nan() || self.sigma_c <= 0.0 {
            return Err(Error::InvalidParam {
                name: "sigma_c",
                msg: format!("must be positive, got {}", self.sigma_c),
            });
        }
        if !(self.sigma_alpha > 0.0 && self.sigma_alpha <= 1.0) {
            return Err(Error::InvalidParam {
                name: "sigma_alpha",
                msg: format!("must be in (0,1], got {}", self.sigma_alpha),
            });
        }
        if !(self.gamma >= 0.0 && self.gamma.is_finite()) {
            return Err(Error::InvalidParam {
                name: "gamma",
                msg: format!("must be non-negative, got {}", self.gamma),
            });
        }
        if !(self.beta > 0.0 && self.beta.is_finite()) {
            return Err(Error::InvalidParam {
                name: "beta",
                msg: format!("must be positive, got {}", self.beta),
            });
        }
        if !(self.mu > 0.0 && self.mu < self.sigma_alpha / 2.0) {
            return Err(Error::InvalidParam {
                name: "mu",
                msg: format!("must be in (0, alpha/2), got {}", self.mu),
            });
        }
        Ok(())
    }
}

/// Log of the entropy factor
/// `r^{-1}((1/(beta p)) int_0^{beta p} r(entropy(u)) du)` with
/// `r(v) = v^mu`, the integral by adaptive quadrature.
pub fn entropy_factor_log(inp: &GenericBoundInputs) -> Result<f64> {
    inp.validate()?;
    let upper = inp.beta * inp.p;
    let mu = inp.mu;
    let integral = integrate_zero_singular(|u| (inp.entropy)(u).powf(mu), upper, 1e-9)?;
    if !(integral.is_finite() && integral > 0.0) {
        return Err(Error::QuadratureFailed(format!(
            "entropy integral evaluated to {integral}"
        )));
    }
    Ok((integral / upper).ln() / mu)
}

/// Optimal multiplier of the exponential-moment bound; positive, and
/// plugging it into the generic bound reproduces the optimized form.
pub fn lambda_star(gamma: f64, beta: f64, p: f64, eps: f64) -> f64 {
    eps * (1.0 - p) / (gamma * gamma + beta * beta * p / (1.0 - p))
}

/// Generic entropy bound at an explicit multiplier `lambda`:
/// `2 exp{lambda^2 gamma^2 / (2(1-p)) + p lambda^2 beta^2 / (2(1-p)^2)
///  - lambda eps} * (entropy factor)`.
pub fn generic_bound_thm21(inp: &GenericBoundInputs, lambda: f64, eps: f64) -> Result<BoundResult> {
    check_eps(eps)?;
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::InvalidParam {
            name: "lambda",
            msg: format!("must be positive, got {lambda}"),
        });
    }
    let z_log = entropy_factor_log(inp)?;
    let (p, gamma, beta) = (inp.p, inp.gamma, inp.beta);
    let exponent = lambda * lambda * gamma * gamma / (2.0 * (1.0 - p))
        + p * lambda * lambda * beta * beta / (2.0 * (1.0 - p) * (1.0 - p))
        - lambda * eps;
    let log_value = std::f64::consts::LN_2 + exponent + z_log;
    Ok(BoundBuilder::new("generic", eps)
        .param("sigma_c", inp.sigma_c)
        .param("sigma_alpha", inp.sigma_alpha)
        .param("gamma", gamma)
        .param("beta", beta)
        .param("p", p)
        .param("mu", inp.mu)
        .param("lambda", lambda)
        .finish_log(log_value))
}

/// Generic bound minimized over the multiplier:
/// `2 exp{-eps^2 (1-p) / (2 (gamma^2 + beta^2 p / (1-p)))} * (entropy factor)`.
pub fn optimized_bound_cor22(inp: &GenericBoundInputs, eps: f64) -> Result<BoundResult> {
    check_eps(eps)?;
    let z_log = entropy_factor_log(inp)?;
    let (p, gamma, beta) = (inp.p, inp.gamma, inp.beta);
    let denom = gamma * gamma + beta * beta * p / (1.0 - p);
    let log_value = std::f64::consts::LN_2 - eps * eps * (1.0 - p) / (2.0 * denom) + z_log;
    Ok(BoundBuilder::new("optimized", eps)
        .param("sigma_c", inp.sigma_c)
        .param("sigma_alpha", inp.sigma_alpha)
        .param("gamma", gamma)
        .param("beta", beta)
        .param("p", p)
        .param("mu", inp.mu)
        .finish_log(log_value))
}

/// Square-domain bound for a power modulus `sigma(h) = C h^alpha` under
/// the max metric on [0,T]^2:
/// `8 exp{-eps^2(1-p) / (2(gamma^2 + C^2 T^{2a} p / (2^{2a}(1-p))))} (e/p)^{2/a}`.
pub fn bound_power_sigma(
    sigma_c: f64,
    sigma_alpha: f64,
    t_side: f64,
    gamma: f64,
    p: f64,
    eps: f64,
) -> Result<BoundResult> {
    check_p(p)?;
    check_eps(eps)?;
    if t_side.is_nan() || t_side <= 0.0 {
        return Err(Error::InvalidParam {
            name: "t_side",
            msg: format!("must be positive, got {t_side}"),
        });
    }
    if sigma_c.is_nan() || sigma_c <= 0.0 {
        return Err(Error::InvalidParam {
            name: "sigma_c",
            msg: format!("must be positive, got {sigma_c}"),
        });
    }
    if !(sigma_alpha > 0.0 && sigma_alpha <= 1.0) {
        return Err(Error::InvalidParam {
            name: "sigma_alpha",
            msg: format!("must be in (0,1], got {sigma_alpha}"),
        });
    }
    let a = sigma_alpha;
    let spread = sigma_c * sigma_c * t_side.powf(2.0 * a) * p / (2f64.powf(2.0 * a) * (1.0 - p));
    let exponent = -eps * eps * (1.0 - p) / (2.0 * (gamma * gamma + spread));
    let log_value = 8f64.ln() + exponent + (2.0 / a) * (1.0 - p.ln());
    Ok(BoundBuilder::new("eq9", eps)
        .param("sigma_c", sigma_c)
        .param("sigma_alpha", a)
        .param("t_side", t_side)
        .param("gamma", gamma)
        .param("p", p)
        .finish_log(log_value))
}

/// Unit-square bound under the max metric, parametric in p:
/// `8 exp{-eps^2(1-p) / (2(1 + 4p/(2^{2H}(1-p))))} (e/p)^{2/H}` with
/// `H = min(h1, h2)`.
pub fn bound_unit_square_rho1(h: HurstPair, p: f64, eps: f64) -> Result<BoundResult> {
    check_p(p)?;
    check_eps(eps)?;
    let hm = h.h_min();
    let spread = 4.0 * p / (2f64.powf(2.0 * hm) * (1.0 - p));
    let exponent = -eps * eps * (1.0 - p) / (2.0 * (1.0 + spread));
    let log_value = 8f64.ln() + exponent + (2.0 / hm) * (1.0 - p.ln());
    Ok(BoundBuilder::new("eq10", eps)
        .param("h1", h.h1())
        .param("h2", h.h2())
        .param("h_min", hm)
        .param("p", p)
        .finish_log(log_value))
}

/// Rectangle bound by rescaling: the normalized sup over [0,T1]x[0,T2]
/// has the unit-square distribution, so the bound at the normalized
/// threshold equals the unit-square bound. `eps` is the threshold for
/// `sup |X| / (T1^{H1} T2^{H2})`.
pub fn bound_rect_scaled(h: HurstPair, rect: &Rect, p: f64, eps: f64) -> Result<BoundResult> {
    if !rect.is_origin_anchored() {
        return Err(Error::UnsupportedDomain(
            "the rescaling identity applies to [0,T1]x[0,T2]".into(),
        ));
    }
    let inner = bound_unit_square_rho1(h, p, eps)?;
    let mut params = inner.params.clone();
    params.push(("t1".to_string(), rect.t1_max()));
    params.push(("t2".to_string(), rect.t2_max()));
    Ok(BoundResult {
        family: "eq11".to_string(),
        params,
        ..inner
    })
}

/// Unit-square closed form at the canonical `p = 1/eps^2`, valid for
/// `eps > 2`:
/// `8 e^{2/H + 1/2} eps^{4/H} exp{-3 eps^2 / (2(4^{1-H} + 3))}`.
pub fn bound_unit_square_eps(h: HurstPair, eps: f64) -> Result<BoundResult> {
    check_eps(eps)?;
    let hm = h.h_min();
    let builder = BoundBuilder::new("eq12", eps)
        .param("h1", h.h1())
        .param("h2", h.h2())
        .param("h_min", hm)
        .require("eps > 2", eps > 2.0);
    let log_value = 8f64.ln() + 2.0 / hm + 0.5 + (4.0 / hm) * eps.ln()
        - 3.0 * eps * eps / (2.0 * (4f64.powf(1.0 - hm) + 3.0));
    Ok(builder.finish_log(log_value))
}

/// Rectangle bound under the Hoelder metric for T1, T2 >= 1, parametric
/// in p:
/// `N1 N2 (e/p)^Q exp{-eps^2(1-p) /
///   (2(T1^{2H1} T2^{2H2} + (p/(1-p)) 4^{1-H} T_eta^4))}`.
pub fn bound_rect_rho2(h: HurstPair, rect: &Rect, p: f64, eps: f64) -> Result<BoundResult> {
    check_p(p)?;
    check_eps(eps)?;
    let (t1, t2) = rect_rho2_sides(rect)?;
    let hm = h.h_min();
    let g = t1.powf(2.0 * h.h1()) * t2.powf(2.0 * h.h2());
    let t_eta = h.t_eta(t1, t2);
    let spread = p / (1.0 - p) * 4f64.powf(1.0 - hm) * t_eta.powi(4);
    let exponent = -eps * eps * (1.0 - p) / (2.0 * (g + spread));
    let log_value = (h.n1() * h.n2()).ln() + h.q() * (1.0 - p.ln()) + exponent;
    Ok(BoundBuilder::new("eq15", eps)
        .param("h1", h.h1())
        .param("h2", h.h2())
        .param("t1", t1)
        .param("t2", t2)
        .param("p", p)
        .finish_log(log_value))
}

/// Rectangle closed form at `p = 1/eps^2`, valid for `eps > 2`:
/// `N1 N2 eps^{2Q} exp{Q + 3/(2 T1^{2H1} T2^{2H2} (3 + 4^{1-H}))}
///  exp{-3 eps^2 / (2(3 T1^{2H1} T2^{2H2} + 4^{1-H} T_eta^4))}`.
pub fn bound_rect_rho2_eps(h: HurstPair, rect: &Rect, eps: f64) -> Result<BoundResult> {
    check_eps(eps)?;
    let (t1, t2) = rect_rho2_sides(rect)?;
    let hm = h.h_min();
    let g = t1.powf(2.0 * h.h1()) * t2.powf(2.0 * h.h2());
    let t_eta = h.t_eta(t1, t2);
    let builder = BoundBuilder::new("eq16", eps)
        .param("h1", h.h1())
        .param("h2", h.h2())
        .param("t1", t1)
        .param("t2", t2)
        .require("eps > 2", eps > 2.0);
    let log_value = (h.n1() * h.n2()).ln()
        + 2.0 * h.q() * eps.ln()
        + h.q()
        + 3.0 / (2.0 * g * (3.0 + 4f64.powf(1.0 - hm)))
        - 3.0 * eps * eps / (2.0 * (3.0 * g + 4f64.powf(1.0 - hm) * t_eta.powi(4)));
    Ok(builder.finish_log(log_value))
}

fn rect_rho2_sides(rect: &Rect) -> Result<(f64, f64)> {
    if !rect.is_origin_anchored() {
        return Err(Error::UnsupportedDomain(
            "the Hoelder rectangle bound is stated for [0,T1]x[0,T2]".into(),
        ));
    }
    let (t1, t2) = (rect.t1_max(), rect.t2_max());
    if t1 < 1.0 || t2 < 1.0 {
        return Err(Error::InvalidParam {
            name: "rect",
            msg: format!("sides must satisfy T1 >= 1 and T2 >= 1, got ({t1}, {t2})"),
        });
    }
    Ok((t1, t2))
}

/// Bound on [1,2]^2 under the Hoelder metric, parametric in p:
/// `N1 N2 (e/p)^Q exp{-eps^2(1-p) /
///   (2(4^{H1+H2} + (1 + 2^{|H1-H2|})^2 p/(1-p)))}`.
pub fn bound_square12_rho2(h: HurstPair, p: f64, eps: f64) -> Result<BoundResult> {
    check_p(p)?;
    check_eps(eps)?;
    let gamma_sq = 4f64.powf(h.h_sum());
    let beta = 1.0 + 2f64.powf((h.h1() - h.h2()).abs());
    let spread = beta * beta * p / (1.0 - p);
    let exponent = -eps * eps * (1.0 - p) / (2.0 * (gamma_sq + spread));
    let log_value = (h.n1() * h.n2()).ln() + h.q() * (1.0 - p.ln()) + exponent;
    Ok(BoundBuilder::new("eq17", eps)
        .param("h1", h.h1())
        .param("h2", h.h2())
        .param("p", p)
        .finish_log(log_value))
}

/// Closed form on [1,2]^2 at `p = 1/eps^2`, valid for `eps > 2`:
/// `N1 N2 exp{Q + 1/(2(4^{H1+H2} + 1))} eps^{2Q}
///  exp{-3 eps^2 / (2 * 4^eta (4^H 3 + 4^{1-H}))}`.
pub fn bound_square12_eps(h: HurstPair, eps: f64) -> Result<BoundResult> {
    check_eps(eps)?;
    let hm = h.h_min();
    let eta = h.h_max();
    let builder = BoundBuilder::new("eq18", eps)
        .param("h1", h.h1())
        .param("h2", h.h2())
        .require("eps > 2", eps > 2.0);
    let log_value = (h.n1() * h.n2()).ln()
        + h.q()
        + 1.0 / (2.0 * (4f64.powf(h.h_sum()) + 1.0))
        + 2.0 * h.q() * eps.ln()
        - 3.0 * eps * eps / (2.0 * 4f64.powf(eta) * (4f64.powf(hm) * 3.0 + 4f64.powf(1.0 - hm)));
    Ok(builder.finish_log(log_value))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::rho1_covering_formula;
    use approx::assert_relative_eq;

    fn hp(h1: f64, h2: f64) -> HurstPair {
        HurstPair::new(h1, h2).unwrap()
    }

    fn value(r: &BoundResult) -> f64 {
        r.value.expect("valid bound")
    }

    /// Independent reference for the entropy integral: substitute
    /// `u = b v^m` so the integrand is smooth at 0, then fixed-grid
    /// composite Simpson at high resolution.
    fn entropy_integral_reference<F: Fn(f64) -> f64>(f: F, b: f64, q_hint: f64) -> f64 {
        let m = (2.0 / (1.0 - q_hint)).ceil().max(2.0);
        let g = |v: f64| {
            if v == 0.0 {
                0.0
            } else {
                f(b * v.powf(m)) * b * m * v.powf(m - 1.0)
            }
        };
        let n = 200_000;
        let h = 1.0 / n as f64;
        let mut acc = g(0.0) + g(1.0);
        for i in 1..n {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            acc += w * g(i as f64 * h);
        }
        acc * h / 3.0
    }

    fn test_inputs<'a>(entropy: &'a dyn Fn(f64) -> f64, p: f64, mu: f64) -> GenericBoundInputs<'a> {
        // sigma(h) = 2 h^{1/2} on [0,1]^2 under the max metric
        GenericBoundInputs {
            sigma_c: 2.0,
            sigma_alpha: 0.5,
            gamma: 1.0,
            beta: 2.0 * 0.5f64.powf(0.5),
            p,
            mu,
            entropy,
        }
    }

    #[test]
    fn generic_at_lambda_star_matches_optimized() {
        let entropy = |u: f64| rho1_covering_formula(1.0, 2.0, 0.5, u);
        for &(p, mu, eps) in &[(0.5, 0.1, 3.0), (0.2, 0.2, 5.0), (0.8, 0.05, 2.5)] {
            let inp = test_inputs(&entropy, p, mu);
            let lam = lambda_star(inp.gamma, inp.beta, p, eps);
            let generic = generic_bound_thm21(&inp, lam, eps).unwrap();
            let optimized = optimized_bound_cor22(&inp, eps).unwrap();
            assert_relative_eq!(value(&generic), value(&optimized), max_relative = 1e-12);
        }
    }

    #[test]
    fn generic_entropy_integral_matches_reference() {
        let entropy = |u: f64| rho1_covering_formula(1.0, 2.0, 0.5, u);
        let inp = test_inputs(&entropy, 0.5, 0.1);
        let upper = inp.beta * inp.p;
        let mu = inp.mu;
        // integrand ~ u^{-2 mu / alpha} = u^{-0.4}
        let reference = entropy_integral_reference(|u| entropy(u).powf(mu), upper, 0.4);
        let z_log = entropy_factor_log(&inp).unwrap();
        let z_ref = ((reference / upper).ln()) / mu;
        assert_relative_eq!(z_log, z_ref, max_relative = 1e-8);

        // full bound value against the independently assembled formula:
        // lambda = 1, gamma = 1, beta^2 = 2, p = 1/2 give exponent
        // 1/(2(1-p)) + p*2/(2(1-p)^2) - 3 = 1 + 2 - 3
        let r = generic_bound_thm21(&inp, 1.0, 3.0).unwrap();
        let expected = 2.0
            * (1.0f64 / (2.0 * 0.5) + 0.5 * 2.0 / (2.0 * 0.25) - 3.0).exp()
            * (reference / upper).powf(1.0 / mu);
        assert!(value(&r).is_finite() && value(&r) > 0.0);
        assert_relative_eq!(value(&r), expected, max_relative = 1e-7);
    }

    #[test]
    fn generic_decreases_in_eps() {
        let entropy = |u: f64| rho1_covering_formula(1.0, 2.0, 0.5, u);
        let inp = test_inputs(&entropy, 0.5, 0.1);
        let mut prev = f64::INFINITY;
        for i in 0..20 {
            let eps = 1.0 + i as f64;
            let v = value(&generic_bound_thm21(&inp, 1.0, eps).unwrap());
            assert!(v < prev);
            prev = v;
        }
    }

    #[test]
    fn lambda_grid_never_beats_optimized() {
        let entropy = |u: f64| rho1_covering_formula(1.0, 2.0, 0.5, u);
        let inp = test_inputs(&entropy, 0.35, 0.12);
        let eps = 4.0;
        let best = value(&optimized_bound_cor22(&inp, eps).unwrap());
        for i in 0..200 {
            let lam = 0.01 * (100f64 / 0.01).powf(i as f64 / 199.0);
            let v = value(&generic_bound_thm21(&inp, lam, eps).unwrap());
            assert!(
                v >= best - 1e-9 * best,
                "lambda {lam} beat the optimized bound"
            );
        }
    }

    #[test]
    fn optimized_small_p_limit() {
        // as p -> 0 the exponential factor approaches exp{-eps^2/2} for gamma = 1
        let entropy = |u: f64| rho1_covering_formula(1.0, 2.0, 0.5, u);
        let p = 1e-8;
        let inp = test_inputs(&entropy, p, 0.1);
        let eps = 3.0;
        let z_log = entropy_factor_log(&inp).unwrap();
        let r = optimized_bound_cor22(&inp, eps).unwrap();
        let exponent = r.log_value.unwrap() - std::f64::consts::LN_2 - z_log;
        assert_relative_eq!(exponent, -eps * eps / 2.0, max_relative = 1e-6);
    }

    #[test]
    fn power_sigma_frozen_example() {
        // C=1, alpha=1, T=1, gamma=1, p=1/2, eps=4, assembled independently:
        // spread = p / (4 (1-p)) = 1/4, exponent = -16*0.5/(2*1.25) = -3.2
        let r = bound_power_sigma(1.0, 1.0, 1.0, 1.0, 0.5, 4.0).unwrap();
        let expected = 8.0 * (-3.2f64).exp() * (2.0 * std::f64::consts::E).powi(2);
        assert_relative_eq!(value(&r), expected, max_relative = 1e-12);
        // eps -> infinity drives the value to zero
        let tail = bound_power_sigma(1.0, 1.0, 1.0, 1.0, 0.5, 60.0).unwrap();
        assert!(value(&tail) < 1e-100);
    }

    #[test]
    fn unit_square_rho1_specializes_power_sigma() {
        for &(h1, h2) in &[(0.3, 0.7), (0.5, 0.5), (0.8, 0.2)] {
            let h = hp(h1, h2);
            for &(p, eps) in &[(0.5, 3.0), (0.1, 2.0), (0.9, 7.0)] {
                let special = bound_unit_square_rho1(h, p, eps).unwrap();
                let general = bound_power_sigma(2.0, h.h_min(), 1.0, 1.0, p, eps).unwrap();
                assert_relative_eq!(value(&special), value(&general), max_relative = 1e-14);
                // only H = min enters, so the bound is swap-invariant
                let swapped = bound_unit_square_rho1(h.swapped(), p, eps).unwrap();
                assert_eq!(value(&special), value(&swapped));
            }
        }
    }

    #[test]
    fn rect_scaling_identity() {
        let h = hp(0.5, 0.5);
        let rect = Rect::new(4.0, 4.0).unwrap();
        // un-normalized threshold 12 over [0,4]^2 converts to 12/4^1 = 3
        let eps_norm = 12.0 / (4f64.powf(0.5) * 4f64.powf(0.5));
        let scaled = bound_rect_scaled(h, &rect, 0.2, eps_norm).unwrap();
        let unit = bound_unit_square_rho1(h, 0.2, 3.0).unwrap();
        assert_relative_eq!(value(&scaled), value(&unit), max_relative = 1e-15);
        // identical for any rectangle
        let other = bound_rect_scaled(h, &Rect::new(7.0, 0.5).unwrap(), 0.2, eps_norm).unwrap();
        assert_eq!(value(&scaled), value(&other));
    }

    #[test]
    fn unit_square_eps_examples() {
        let h = hp(0.5, 0.5);
        let invalid = bound_unit_square_eps(h, 1.5).unwrap();
        assert!(!invalid.is_valid());
        assert!(invalid.value.is_none());

        let r = bound_unit_square_eps(h, 10.0).unwrap();
        let expected = 8.0 * (4.5f64).exp() * 1e8 * (-30.0f64).exp();
        assert_relative_eq!(value(&r), expected, max_relative = 1e-12);
        assert!(!r.vacuous);

        // dominates the parametric bound at p = 1/eps^2
        for &eps in &[2.1, 3.0, 5.0, 10.0] {
            let closed = value(&bound_unit_square_eps(h, eps).unwrap());
            let parametric = value(&bound_unit_square_rho1(h, 1.0 / (eps * eps), eps).unwrap());
            assert!(closed >= parametric * (1.0 - 1e-12));
        }
    }

    #[test]
    fn rect_rho2_examples() {
        let h = hp(0.5, 0.5);
        // T = 1 reduces the denominator to 2 (1 + 4^{1-H} p/(1-p))
        let p = 0.3;
        let eps = 4.0;
        let r = bound_rect_rho2(h, &Rect::unit(), p, eps).unwrap();
        let expected = 49.0
            * (std::f64::consts::E / p).powi(4)
            * (-eps * eps * (1.0 - p) / (2.0 * (1.0 + 2.0 * p / (1.0 - p)))).exp();
        assert_relative_eq!(value(&r), expected, max_relative = 1e-12);
        // T below 1 is rejected
        assert!(bound_rect_rho2(h, &Rect::new(0.5, 2.0).unwrap(), p, eps).is_err());
        // joint swap of indices and sides leaves the bound unchanged
        let h2 = hp(0.3, 0.7);
        let a = bound_rect_rho2(h2, &Rect::new(2.0, 3.0).unwrap(), p, eps).unwrap();
        let b = bound_rect_rho2(h2.swapped(), &Rect::new(3.0, 2.0).unwrap(), p, eps).unwrap();
        assert_relative_eq!(value(&a), value(&b), max_relative = 1e-14);
    }

    #[test]
    fn rect_rho2_eps_dominates_parent() {
        for &(h1, h2) in &[(0.5, 0.5), (0.3, 0.7), (0.6, 0.4)] {
            let h = hp(h1, h2);
            for rect in [
                Rect::unit(),
                Rect::new(2.0, 3.0).unwrap(),
                Rect::new(1.5, 1.0).unwrap(),
            ] {
                for &eps in &[2.5, 4.0, 8.0] {
                    let closed = value(&bound_rect_rho2_eps(h, &rect, eps).unwrap());
                    let parent = value(&bound_rect_rho2(h, &rect, 1.0 / (eps * eps), eps).unwrap());
                    assert!(
                        closed >= parent * (1.0 - 1e-12),
                        "eq16 {closed} < eq15 {parent} at eps={eps}"
                    );
                }
            }
        }
        assert!(!bound_rect_rho2_eps(hp(0.5, 0.5), &Rect::unit(), 2.0)
            .unwrap()
            .is_valid());
    }

    #[test]
    fn square12_examples() {
        let h = hp(0.5, 0.5);
        let (p, eps) = (0.25, 5.0);
        let r = bound_square12_rho2(h, p, eps).unwrap();
        // isotropic case: gamma^2 = 4, beta-term = 4 p/(1-p)
        let expected = 49.0
            * (4.0 * std::f64::consts::E).powi(4)
            * (-25.0f64 * 0.75 / (2.0 * (4.0 + 4.0 / 3.0))).exp();
        assert_relative_eq!(value(&r), expected, max_relative = 1e-12);

        let r18 = bound_square12_eps(h, 6.0).unwrap();
        let expected18 =
            49.0 * (4.0f64 + 0.1).exp() * 6f64.powi(8) * (-108.0f64 / (2.0 * 2.0 * 8.0)).exp();
        assert_relative_eq!(value(&r18), expected18, max_relative = 1e-12);
        assert!(!bound_square12_eps(h, 1.9).unwrap().is_valid());

        // swap invariance (everything depends on H, eta, Q, H1+H2)
        let h2 = hp(0.3, 0.7);
        assert_eq!(
            value(&bound_square12_rho2(h2, p, eps).unwrap()),
            value(&bound_square12_rho2(h2.swapped(), p, eps).unwrap())
        );
        assert_eq!(
            value(&bound_square12_eps(h2, 6.0).unwrap()),
            value(&bound_square12_eps(h2.swapped(), 6.0).unwrap())
        );

        // closed form dominates the parent at p = 1/eps^2
        for &eps in &[2.5, 4.0, 8.0] {
            let closed = value(&bound_square12_eps(h2, eps).unwrap());
            let parent = value(&bound_square12_rho2(h2, 1.0 / (eps * eps), eps).unwrap());
            assert!(closed >= parent * (1.0 - 1e-12));
        }
    }

    #[test]
    fn bounds_decrease_in_eps_past_turnover() {
        // The fixed-p families decrease everywhere. The closed forms
        // carry an eps^{2Q}-style prefactor that wins just above eps = 2,
        // so monotonicity only starts at the turnover
        // eps* = sqrt(2Q * denom / 3) where denom is the family's
        // exponential denominator.
        let h = hp(0.4, 0.6);
        let hm = h.h_min();
        let q = h.q();
        let rect = Rect::new(2.0, 2.0).unwrap();
        let g = 2f64.powf(2.0 * h.h1()) * 2f64.powf(2.0 * h.h2());
        let t_eta4 = h.t_eta(2.0, 2.0).powi(4);
        let turnovers = [
            ((4.0 / hm) * (4f64.powf(1.0 - hm) + 3.0) / 3.0).sqrt(),
            2.05,
            (2.0 * q * (3.0 * g + 4f64.powf(1.0 - hm) * t_eta4) / 3.0).sqrt(),
            (2.0 * q * 4f64.powf(h.h_max()) * (4f64.powf(hm) * 3.0 + 4f64.powf(1.0 - hm)) / 3.0)
                .sqrt(),
        ];
        let families: Vec<Box<dyn Fn(f64) -> f64>> = vec![
            Box::new(move |e| value(&bound_unit_square_eps(h, e).unwrap())),
            Box::new(move |e| value(&bound_unit_square_rho1(h, 0.3, e).unwrap())),
            Box::new(move |e| value(&bound_rect_rho2_eps(h, &rect, e).unwrap())),
            Box::new(move |e| value(&bound_square12_eps(h, e).unwrap())),
        ];
        for (f, start) in families.iter().zip(turnovers) {
            let start = start.max(2.05);
            let mut prev = f64::INFINITY;
            for i in 0..30 {
                let eps = start + 0.5 * i as f64;
                let v = f(eps);
                assert!(v < prev, "not decreasing at eps={eps}");
                prev = v;
            }
        }
    }

    #[test]
    fn vacuous_and_underflow_flags() {
        let h = hp(0.5, 0.5);
        let small_eps = bound_unit_square_eps(h, 2.5).unwrap();
        assert!(small_eps.vacuous);
        let tiny = bound_unit_square_eps(h, 80.0).unwrap();
        assert!(tiny.underflow);
        assert_eq!(tiny.value, Some(0.0));
        assert!(tiny.log_value.unwrap() < UNDERFLOW_LOG);
    }

    #[test]
    fn structural_parameter_errors() {
        let h = hp(0.5, 0.5);
        assert!(bound_unit_square_rho1(h, 0.0, 3.0).is_err());
        assert!(bound_unit_square_rho1(h, 1.0, 3.0).is_err());
        assert!(bound_unit_square_rho1(h, 0.5, -1.0).is_err());
        assert!(bound_power_sigma(0.0, 1.0, 1.0, 1.0, 0.5, 3.0).is_err());
        assert!(bound_power_sigma(1.0, 1.5, 1.0, 1.0, 0.5, 3.0).is_err());
        assert!(bound_square12_rho2(h, 0.5, f64::NAN).is_err());
    }
}
