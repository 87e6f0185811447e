//! Family id routing: map stable family ids to bound evaluations.

use serde::Serialize;
use sheet_extremes::bounds::{
    bound_power_sigma, bound_rect_rho2, bound_rect_rho2_eps, bound_rect_scaled, bound_square12_eps,
    bound_square12_rho2, bound_unit_square_eps, bound_unit_square_rho1,
};
use sheet_extremes::global::{
    example1_bound, example2_bounds, global_bound_cor36, global_bound_thm35, quadrant_bound_cor48,
    quadrant_bound_thm47, ExamplePhi,
};
use sheet_extremes::optimize::{optimize_p, BoundFamily};
use sheet_extremes::{
    BoundResult, GrowthSchedule, HurstPair, Normalizer, Rect, SeriesValue, WeightFn,
};

use crate::common::{usage, CliResult, Domain, SCHEMA_VERSION};

/// One evaluated bound row; the fixed column set of `bound` output.
#[derive(Serialize)]
pub struct BoundRow {
    pub version: &'static str,
    pub family: String,
    pub h1: f64,
    pub h2: f64,
    pub domain: String,
    pub eps: f64,
    pub p: Option<f64>,
    pub value: Option<f64>,
    pub log_value: Option<f64>,
    pub valid: bool,
    pub vacuous: bool,
    pub underflow: bool,
    pub series_terms: Option<u64>,
    pub series_tail: Option<f64>,
}

impl BoundRow {
    pub fn from_result(
        h: HurstPair,
        domain: &Domain,
        p: Option<f64>,
        result: &BoundResult,
        series: Option<&SeriesValue>,
    ) -> Self {
        BoundRow {
            version: SCHEMA_VERSION,
            family: result.family.clone(),
            h1: h.h1(),
            h2: h.h2(),
            domain: domain.label(),
            eps: result.epsilon,
            p,
            value: result.value,
            log_value: result.log_value,
            valid: result.is_valid(),
            vacuous: result.vacuous,
            underflow: result.underflow,
            series_terms: series.map(|s| s.terms_used),
            series_tail: series.map(|s| s.tail_estimate),
        }
    }
}

/// Context needed by the series and power-modulus families.
pub struct FamilyContext {
    pub schedule: GrowthSchedule,
    pub normalizer: Normalizer,
    pub phi: Option<WeightFn>,
    pub tol: f64,
    pub sigma_c: f64,
    pub sigma_alpha: Option<f64>,
    pub gamma: f64,
}

/// Default family set per domain.
pub fn default_families(domain: &Domain, has_phi: bool) -> Vec<&'static str> {
    match domain {
        Domain::Unit => vec!["eq10", "eq12", "eq15", "eq16"],
        Domain::Rect { .. } => vec!["eq15", "eq16", "eq11"],
        Domain::Square12 => vec!["eq17", "eq18"],
        Domain::Quadrant => {
            if has_phi {
                vec!["eq20", "eq21-proofform"]
            } else {
                vec!["eq13", "eq14", "example1"]
            }
        }
    }
}

fn require_unit(domain: &Domain, family: &str) -> CliResult<()> {
    if *domain != Domain::Unit {
        return Err(usage(format!(
            "family {family} applies to --domain unit only"
        )));
    }
    Ok(())
}

fn require_quadrant(domain: &Domain, family: &str) -> CliResult<()> {
    if *domain != Domain::Quadrant {
        return Err(usage(format!(
            "family {family} applies to --domain quadrant only"
        )));
    }
    Ok(())
}

/// The p actually used for a parametric family: the explicit value when
/// given, otherwise the minimizer.
fn resolve_p(
    family: BoundFamily,
    h: HurstPair,
    rect: &Rect,
    eps: f64,
    p: Option<f64>,
) -> CliResult<f64> {
    match p {
        Some(p) => Ok(p),
        None => Ok(optimize_p(family, h, rect, eps)?.best_p),
    }
}

/// Evaluate one family id at one threshold.
pub fn eval_family(
    id: &str,
    h: HurstPair,
    domain: &Domain,
    p: Option<f64>,
    eps: f64,
    ctx: &FamilyContext,
) -> CliResult<(Option<f64>, BoundResult, Option<SeriesValue>)> {
    match id {
        "eq9" => {
            let rect = domain.rect()?;
            if !rect.is_square() || !rect.is_origin_anchored() {
                return Err(usage("family eq9 needs a square [0,T]^2 domain"));
            }
            let alpha = ctx.sigma_alpha.unwrap_or_else(|| h.h_min());
            let family = BoundFamily::PowerSigma {
                sigma_c: ctx.sigma_c,
                sigma_alpha: alpha,
                gamma: ctx.gamma,
            };
            let p = resolve_p(family, h, &rect, eps, p)?;
            let r = bound_power_sigma(ctx.sigma_c, alpha, rect.side1(), ctx.gamma, p, eps)?;
            Ok((Some(p), r, None))
        }
        "eq10" => {
            require_unit(domain, id)?;
            let p = resolve_p(BoundFamily::UnitSquareRho1, h, &Rect::unit(), eps, p)?;
            Ok((Some(p), bound_unit_square_rho1(h, p, eps)?, None))
        }
        "eq11" => {
            let rect = domain.rect()?;
            // eps is the threshold for the normalized sup here
            let p = resolve_p(BoundFamily::UnitSquareRho1, h, &Rect::unit(), eps, p)?;
            Ok((Some(p), bound_rect_scaled(h, &rect, p, eps)?, None))
        }
        "eq12" => {
            require_unit(domain, id)?;
            Ok((None, bound_unit_square_eps(h, eps)?, None))
        }
        "eq15" => {
            let rect = domain.rect()?;
            let p = resolve_p(BoundFamily::RectRho2, h, &rect, eps, p)?;
            Ok((Some(p), bound_rect_rho2(h, &rect, p, eps)?, None))
        }
        "eq16" => {
            let rect = domain.rect()?;
            Ok((None, bound_rect_rho2_eps(h, &rect, eps)?, None))
        }
        "eq17" => {
            let rect = domain.rect()?;
            let p = resolve_p(BoundFamily::Square12Rho2, h, &rect, eps, p)?;
            Ok((Some(p), bound_square12_rho2(h, p, eps)?, None))
        }
        "eq18" => {
            if *domain != Domain::Square12 {
                return Err(usage("family eq18 applies to --domain square12 only"));
            }
            Ok((None, bound_square12_eps(h, eps)?, None))
        }
        "eq13" => {
            require_quadrant(domain, id)?;
            let (r, sv) = global_bound_thm35(h, &ctx.schedule, &ctx.normalizer, eps, ctx.tol)?;
            Ok((None, r, Some(sv)))
        }
        "eq14" => {
            require_quadrant(domain, id)?;
            let (r, sv) = global_bound_cor36(h, &ctx.schedule, &ctx.normalizer, eps, ctx.tol)?;
            Ok((None, r, Some(sv)))
        }
        "example1" => {
            require_quadrant(domain, id)?;
            let (r, sv) = example1_bound(h, eps, ctx.tol)?;
            Ok((None, r, Some(sv)))
        }
        "eq20" => {
            require_quadrant(domain, id)?;
            let phi = ctx.phi.ok_or_else(|| usage("family eq20 needs --phi"))?;
            let (r, sv) = quadrant_bound_thm47(h, &phi, eps, ctx.tol)?;
            Ok((None, r, Some(sv)))
        }
        "eq21-proofform" => {
            require_quadrant(domain, id)?;
            let phi = ctx
                .phi
                .ok_or_else(|| usage("family eq21-proofform needs --phi"))?;
            let (r, sv) = quadrant_bound_cor48(h, &phi, eps, ctx.tol)?;
            Ok((None, r, Some(sv)))
        }
        "example2-phi1" => {
            require_quadrant(domain, id)?;
            let (r, sv) = example2_bounds(h, ExamplePhi::Phi1, eps, ctx.tol)?;
            Ok((None, r, Some(sv)))
        }
        "example2-phi2" => {
            require_quadrant(domain, id)?;
            let (r, sv) = example2_bounds(h, ExamplePhi::Phi2, eps, ctx.tol)?;
            Ok((None, r, Some(sv)))
        }
        other => Err(usage(format!("unknown family id '{other}'"))),
    }
}
