//! The two metrics the entropy bounds are stated in, closed-form
//! covering-number upper bounds, and combinatorial lattice oracles
//! (greedy cover / greedy packing) that keep the closed forms honest.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::{abs_pow, HurstPair, Point2, Rect};

/// Metric on the parameter rectangle.
#[derive(Debug, Clone, Copy)]
pub enum MetricKind {
    /// max(|t1-s1|, |t2-s2|)
    Max,
    /// |t1-s1|^{H1} + |t2-s2|^{H2}; the natural Hoelder metric of the field.
    Holder(HurstPair),
}

impl MetricKind {
    pub fn distance(&self, t: Point2, s: Point2) -> f64 {
        match self {
            MetricKind::Max => (t.t1() - s.t1()).abs().max((t.t2() - s.t2()).abs()),
            MetricKind::Holder(h) => {
                abs_pow(t.t1() - s.t1(), h.h1()) + abs_pow(t.t2() - s.t2(), h.h2())
            }
        }
    }

    /// Diameter of a rectangle (attained at opposite corners for both metrics).
    pub fn diameter(&self, rect: &Rect) -> f64 {
        match self {
            MetricKind::Max => rect.side1().max(rect.side2()),
            MetricKind::Holder(h) => rect.side1().powf(h.h1()) + rect.side2().powf(h.h2()),
        }
    }
}

/// Default lattice resolution for the combinatorial oracles.
pub const DEFAULT_GRID_RES: usize = 256;

/// A covering-number comparison row: the closed-form upper bound at one
/// radius together with the lattice oracle counts that bracket it.
#[derive(Debug, Clone, Serialize)]
pub struct CoveringEstimate {
    pub radius: f64,
    pub formula_bound: f64,
    pub oracle_cover_count: Option<usize>,
    pub oracle_packing_count: Option<usize>,
    pub grid_resolution: Option<usize>,
}

impl CoveringEstimate {
    /// Compare the Hoelder-metric covering formula with the lattice
    /// oracles at radius `u`; oracles are skipped when `grid_res` is
    /// absent.
    pub fn for_holder(h: HurstPair, rect: &Rect, u: f64, grid_res: Option<usize>) -> Result<Self> {
        let formula_bound = covering_bound_rho2(h, rect, u)?;
        Self::with_oracles(MetricKind::Holder(h), rect, u, formula_bound, grid_res)
    }

    /// Compare the max-metric covering formula for a power modulus with
    /// the lattice oracles. `u_sigma` is the radius in modulus units;
    /// the oracles run at the metric radius `(u_sigma / C)^{1/alpha}`.
    pub fn for_max(
        rect: &Rect,
        sigma_c: f64,
        sigma_alpha: f64,
        u_sigma: f64,
        grid_res: Option<usize>,
    ) -> Result<Self> {
        let formula_bound = covering_bound_rho1(rect, sigma_c, sigma_alpha, u_sigma)?;
        let radius = (u_sigma / sigma_c).powf(1.0 / sigma_alpha);
        Self::with_oracles(MetricKind::Max, rect, radius, formula_bound, grid_res)
    }

    fn with_oracles(
        metric: MetricKind,
        rect: &Rect,
        radius: f64,
        formula_bound: f64,
        grid_res: Option<usize>,
    ) -> Result<Self> {
        let (cover, packing) = match grid_res {
            None => (None, None),
            Some(res) => (
                Some(covering_oracle(&metric, rect, radius, res)?),
                Some(packing_oracle(&metric, rect, radius, res)?),
            ),
        };
        Ok(CoveringEstimate {
            radius,
            formula_bound,
            oracle_cover_count: cover,
            oracle_packing_count: packing,
            grid_resolution: grid_res,
        })
    }
}

/// Closed-form covering bound for the max metric on a square [0,T]^2
/// under a power modulus `sigma(h) = C h^alpha`:
/// `(T C^{1/alpha} / (2 u^{1/alpha}) + 1)^2`, an upper bound on
/// `N(sigma^{-1}(u))`.
pub fn covering_bound_rho1(rect: &Rect, sigma_c: f64, sigma_alpha: f64, u: f64) -> Result<f64> {
    if !rect.is_square() || !rect.is_origin_anchored() {
        return Err(Error::UnsupportedDomain(format!(
            "the max-metric covering formula is stated for [0,T]^2 only, got [{}, {}] x [{}, {}]",
            rect.t1_min(),
            rect.t1_max(),
            rect.t2_min(),
            rect.t2_max()
        )));
    }
    check_positive("u", u)?;
    check_positive("sigma_c", sigma_c)?;
    if !(sigma_alpha > 0.0 && sigma_alpha <= 1.0) {
        return Err(Error::InvalidParam {
            name: "sigma_alpha",
            msg: format!("must be in (0,1], got {sigma_alpha}"),
        });
    }
    Ok(rho1_covering_formula(rect.side1(), sigma_c, sigma_alpha, u))
}

/// The bare formula behind [`covering_bound_rho1`]; also used as the
/// entropy input of the generic bound.
pub(crate) fn rho1_covering_formula(t_side: f64, sigma_c: f64, sigma_alpha: f64, u: f64) -> f64 {
    let half_count = t_side * sigma_c.powf(1.0 / sigma_alpha) / (2.0 * u.powf(1.0 / sigma_alpha));
    (half_count + 1.0).powi(2)
}

/// Closed-form covering bound for the Hoelder metric on [0,T1]x[0,T2]:
/// `2 (T1/(4 K1 u^{1/H1}) + 3/2)(T2/(4 K2 u^{1/H2}) + 3/2)`.
pub fn covering_bound_rho2(h: HurstPair, rect: &Rect, u: f64) -> Result<f64> {
    check_positive("u", u)?;
    if !rect.is_origin_anchored() {
        return Err(Error::UnsupportedDomain(
            "the Hoelder covering formula is stated for [0,T1]x[0,T2]".into(),
        ));
    }
    Ok(rho2_covering_formula(h, rect.t1_max(), rect.t2_max(), u))
}

pub(crate) fn rho2_covering_formula(h: HurstPair, t1: f64, t2: f64, u: f64) -> f64 {
    let a = t1 / (4.0 * h.k1() * u.powf(1.0 / h.h1())) + 1.5;
    let b = t2 / (4.0 * h.k2() * u.powf(1.0 / h.h2())) + 1.5;
    2.0 * a * b
}

/// Greedy cover of the `grid_res x grid_res` lattice of `rect` by closed
/// metric balls of radius `u` centered at lattice points.
///
/// Each round takes the lexicographically first uncovered point and
/// centers a ball at the candidate covering it that covers the most
/// still-uncovered points (ties broken by lattice order). The count
/// upper-bounds the lattice covering number; pair with
/// [`packing_oracle`] for a two-sided sanity check.
pub fn covering_oracle(metric: &MetricKind, rect: &Rect, u: f64, grid_res: usize) -> Result<usize> {
    check_positive("u", u)?;
    check_res(grid_res)?;
    let pts = lattice(rect, grid_res);
    let mut covered = vec![false; pts.len()];
    let mut remaining = pts.len();
    let mut count = 0usize;
    let mut first_uncovered = 0usize;
    while remaining > 0 {
        while covered[first_uncovered] {
            first_uncovered += 1;
        }
        let target = pts[first_uncovered];
        let mut best: Option<(usize, usize)> = None; // (coverage, center index)
        for (ci, &c) in pts.iter().enumerate() {
            if metric.distance(c, target) > u {
                continue;
            }
            let coverage = pts
                .iter()
                .enumerate()
                .filter(|(i, &p)| !covered[*i] && metric.distance(c, p) <= u)
                .count();
            if best.is_none_or(|(bc, _)| coverage > bc) {
                best = Some((coverage, ci));
            }
        }
        let (_, ci) = best.expect("target covers itself");
        count += 1;
        let center = pts[ci];
        for (i, &p) in pts.iter().enumerate() {
            if !covered[i] && metric.distance(center, p) <= u {
                covered[i] = true;
                remaining -= 1;
            }
        }
    }
    Ok(count)
}

/// Greedy maximal set of lattice points with pairwise distance > 2u,
/// scanning in lexicographic order. Its size is a valid lower bound on
/// the covering number N(u) of the whole rectangle.
pub fn packing_oracle(metric: &MetricKind, rect: &Rect, u: f64, grid_res: usize) -> Result<usize> {
    check_positive("u", u)?;
    check_res(grid_res)?;
    let pts = lattice(rect, grid_res);
    let mut chosen: Vec<Point2> = Vec::new();
    for &p in &pts {
        if chosen.iter().all(|&c| metric.distance(c, p) > 2.0 * u) {
            chosen.push(p);
        }
    }
    Ok(chosen.len())
}

fn lattice(rect: &Rect, grid_res: usize) -> Vec<Point2> {
    let step1 = rect.side1() / (grid_res - 1) as f64;
    let step2 = rect.side2() / (grid_res - 1) as f64;
    let mut pts = Vec::with_capacity(grid_res * grid_res);
    for i in 0..grid_res {
        for j in 0..grid_res {
            let x = rect.t1_min() + step1 * i as f64;
            let y = rect.t2_min() + step2 * j as f64;
            pts.push(Point2::new(x, y).expect("lattice point in quadrant"));
        }
    }
    pts
}

fn check_positive(name: &'static str, v: f64) -> Result<()> {
    if !(v.is_finite() && v > 0.0) {
        return Err(Error::InvalidParam {
            name,
            msg: format!("must be positive, got {v}"),
        });
    }
    Ok(())
}

fn check_res(grid_res: usize) -> Result<()> {
    if grid_res < 2 {
        return Err(Error::InvalidParam {
            name: "grid_res",
            msg: format!("must be >= 2, got {grid_res}"),
        });
    }
    Ok(())
}
