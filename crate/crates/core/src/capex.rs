//! Power-law investment cost, annuities, and breakpoint sets for the
//! piecewise-linear encoding of economies of scale.

use serde::{Deserialize, Serialize};

use crate::error::CapexError;
use crate::model::Plant;

/// `g(c) = b_ref * (c / c_ref)^sigma` on the domain `[c0, c_max]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CapexCurve {
    pub b_ref: f64,
    pub c_ref: f64,
    pub sigma: f64,
    pub c0: f64,
    pub c_max: f64,
}

impl CapexCurve {
    pub fn new(b_ref: f64, c_ref: f64, sigma: f64, c0: f64, c_max: f64) -> Result<Self, CapexError> {
        let all_finite = [b_ref, c_ref, sigma, c0, c_max].iter().all(|v| v.is_finite());
        if !all_finite {
            return Err(CapexError::InvalidCurve("non-finite parameter".into()));
        }
        if c_ref <= 0.0 {
            return Err(CapexError::InvalidCurve(format!("reference capacity {c_ref} must be > 0")));
        }
        if b_ref < 0.0 {
            return Err(CapexError::InvalidCurve(format!("reference cost {b_ref} must be >= 0")));
        }
        if !(sigma > 0.0 && sigma <= 1.0) {
            return Err(CapexError::InvalidCurve(format!("exponent {sigma} outside (0, 1]")));
        }
        if !(0.0 <= c0 && c0 <= c_max) {
            return Err(CapexError::InvalidCurve(format!("need 0 <= c0 ({c0}) <= c_max ({c_max})")));
        }
        Ok(CapexCurve { b_ref, c_ref, sigma, c0, c_max })
    }

    /// Curve of a plant in base product units and dollars.
    pub fn for_plant(plant: &Plant) -> Result<Self, CapexError> {
        let s = plant.capacity_unit_scale;
        CapexCurve::new(
            plant.reference_capex * 1e6,
            plant.reference_capacity * s,
            plant.scale_exponent,
            plant.initial_capacity * s,
            plant.max_capacity * s,
        )
    }

    fn g(&self, c: f64) -> f64 {
        if c == 0.0 {
            0.0
        } else {
            self.b_ref * (c / self.c_ref).powf(self.sigma)
        }
    }

    /// Capacity whose total cost is `cost`.
    fn g_inverse(&self, cost: f64) -> f64 {
        self.c_ref * (cost / self.b_ref).powf(1.0 / self.sigma)
    }
}

pub fn total_capital_cost(curve: &CapexCurve, c_total: f64) -> Result<f64, CapexError> {
    if c_total < 0.0 || c_total.is_nan() {
        return Err(CapexError::NegativeCapacity(c_total));
    }
    Ok(curve.g(c_total))
}

/// Cost of growing from `c0` to `c0 + y`.
pub fn expansion_cost(curve: &CapexCurve, y: f64) -> Result<f64, CapexError> {
    let limit = curve.c_max - curve.c0;
    if !(0.0..=limit).contains(&y) {
        return Err(CapexError::ExpansionOutOfDomain { y, limit });
    }
    if y == 0.0 {
        return Ok(0.0);
    }
    Ok(curve.g(curve.c0 + y) - curve.g(curve.c0))
}

/// Capital recovery factor: the constant yearly payment that repays one unit
/// over `years` at `rate`.
pub fn annuity_coefficient(rate: f64, years: u32) -> Result<f64, CapexError> {
    if !(rate.is_finite() && rate > 0.0) || years < 1 {
        return Err(CapexError::InvalidAnnuity { rate, years });
    }
    Ok(rate / (1.0 - (1.0 + rate).powi(-(years as i32))))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Breakpoint {
    pub capacity: f64,
    /// Net expansion cost relative to the initial capacity.
    pub cost: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PiecewiseApprox {
    pub breakpoints: Vec<Breakpoint>,
}

impl PiecewiseApprox {
    /// A single point: the plant stays at `c0` and costs nothing.
    pub fn no_build(c0: f64) -> Self {
        PiecewiseApprox { breakpoints: vec![Breakpoint { capacity: c0, cost: 0.0 }] }
    }

    pub fn segments(&self) -> usize {
        self.breakpoints.len().saturating_sub(1)
    }

    pub fn is_no_build(&self) -> bool {
        self.segments() == 0
    }

    pub fn first(&self) -> Breakpoint {
        self.breakpoints[0]
    }

    pub fn last(&self) -> Breakpoint {
        self.breakpoints[self.breakpoints.len() - 1]
    }
}

/// Breakpoints equally spaced in net cost. Capacities come from inverting the
/// power law, so the points crowd where the curve bends hardest.
///
/// A zero-cost curve has no range to split; it falls back to equal capacity
/// steps, all at zero cost.
pub fn build_breakpoints_range_uniform(curve: &CapexCurve, segments: usize) -> Result<PiecewiseApprox, CapexError> {
    check_domain(curve, segments)?;
    if curve.b_ref == 0.0 {
        return build_breakpoints_domain_uniform(curve, segments);
    }
    let base = curve.g(curve.c0);
    let span = curve.g(curve.c_max) - base;
    let mut breakpoints = Vec::with_capacity(segments + 1);
    breakpoints.push(Breakpoint { capacity: curve.c0, cost: 0.0 });
    for p in 1..segments {
        let cost = span * p as f64 / segments as f64;
        breakpoints.push(Breakpoint { capacity: curve.g_inverse(base + cost), cost });
    }
    breakpoints.push(Breakpoint { capacity: curve.c_max, cost: span });
    Ok(PiecewiseApprox { breakpoints })
}

/// Breakpoints equally spaced in capacity.
pub fn build_breakpoints_domain_uniform(curve: &CapexCurve, segments: usize) -> Result<PiecewiseApprox, CapexError> {
    check_domain(curve, segments)?;
    let base = curve.g(curve.c0);
    let step = (curve.c_max - curve.c0) / segments as f64;
    let breakpoints = (0..=segments)
        .map(|p| {
            let capacity = match p {
                0 => curve.c0,
                p if p == segments => curve.c_max,
                p => curve.c0 + step * p as f64,
            };
            let cost = if p == 0 { 0.0 } else { curve.g(capacity) - base };
            Breakpoint { capacity, cost }
        })
        .collect();
    Ok(PiecewiseApprox { breakpoints })
}

fn check_domain(curve: &CapexCurve, segments: usize) -> Result<(), CapexError> {
    if segments == 0 {
        return Err(CapexError::NoSegments);
    }
    if curve.c_max <= curve.c0 {
        return Err(CapexError::DegenerateDomain(curve.c0));
    }
    Ok(())
}

/// Linear interpolation between breakpoints.
pub fn piecewise_eval(approx: &PiecewiseApprox, c: f64) -> Result<f64, CapexError> {
    let lo = approx.first().capacity;
    let hi = approx.last().capacity;
    let slack = 1e-12 * hi.abs().max(1.0);
    if !(c >= lo - slack && c <= hi + slack) {
        return Err(CapexError::OutsideBreakpoints { c, lo, hi });
    }
    let c = c.clamp(lo, hi);
    let pts = &approx.breakpoints;
    if pts.len() == 1 {
        return Ok(pts[0].cost);
    }
    let seg = pts.partition_point(|b| b.capacity <= c).clamp(1, pts.len() - 1) - 1;
    let (a, b) = (pts[seg], pts[seg + 1]);
    if c == b.capacity {
        return Ok(b.cost);
    }
    let t = (c - a.capacity) / (b.capacity - a.capacity);
    Ok(a.cost + t * (b.cost - a.cost))
}

/// Largest interpolation error on an evenly spaced grid, relative to the total
/// capital cost at each grid point.
pub fn max_rel_error(approx: &PiecewiseApprox, curve: &CapexCurve, grid_size: usize) -> f64 {
    const EPS: f64 = 1e-12;
    let grid_size = grid_size.max(2);
    let lo = approx.first().capacity;
    let hi = approx.last().capacity;
    let base = curve.g(curve.c0);
    let mut worst: f64 = 0.0;
    for i in 0..grid_size {
        let c = if i == grid_size - 1 {
            hi
        } else {
            lo + (hi - lo) * i as f64 / (grid_size - 1) as f64
        };
        let exact = curve.g(c);
        let approx_cost = piecewise_eval(approx, c).expect("grid point inside domain");
        let err = (approx_cost - (exact - base)).abs() / exact.max(EPS);
        worst = worst.max(err);
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mill() -> CapexCurve {
        CapexCurve::new(196.6, 4.38, 0.7, 3.87, 5.0).unwrap()
    }

    #[test]
    fn reference_point_is_exact() {
        let c = CapexCurve::new(52.0, 84.0, 0.7, 0.0, 200.0).unwrap();
        assert_eq!(total_capital_cost(&c, 84.0).unwrap(), 52.0);
        assert_eq!(total_capital_cost(&c, 0.0).unwrap(), 0.0);
        assert!(total_capital_cost(&c, -1.0).is_err());
    }

    #[test]
    fn mill_expansion_cost() {
        // 196.6 * ((4.38/4.38)^0.7 - (3.87/4.38)^0.7), evaluated at 50 digits.
        let b = expansion_cost(&CapexCurve::new(196.6, 4.38, 0.7, 3.87, 5.0).unwrap(), 0.51).unwrap();
        assert!((b - 16.319_268_468).abs() < 1e-6, "{b}");
        assert_eq!(expansion_cost(&mill(), 0.0).unwrap(), 0.0);
        assert!(expansion_cost(&mill(), 2.0).is_err());
    }

    #[test]
    fn greenfield_reference_expansion() {
        let c = CapexCurve::new(29.9, 250.0, 0.7, 0.0, 500.0).unwrap();
        assert_eq!(expansion_cost(&c, 250.0).unwrap(), 29.9);
    }

    #[test]
    fn annuity_values() {
        assert!((annuity_coefficient(0.07, 1).unwrap() - 1.07).abs() < 1e-15);
        let phi = annuity_coefficient(0.10, 20).unwrap();
        // Geometric series: sum_{t=1..20} 1.1^-t = 8.513563719...
        assert!((phi - 0.117_459_624_6).abs() < 1e-9, "{phi}");
        assert!((annuity_coefficient(0.10, 2000).unwrap() - 0.10).abs() < 1e-12);
        assert!(annuity_coefficient(0.0, 10).is_err());
        assert!(annuity_coefficient(0.1, 0).is_err());
    }

    #[test]
    fn two_segment_midpoint() {
        let c = CapexCurve::new(10.0, 1.0, 0.7, 0.0, 1.0).unwrap();
        let pw = build_breakpoints_range_uniform(&c, 2).unwrap();
        // 0.5^(1/0.7)
        assert!((pw.breakpoints[1].capacity - 0.371_498_572_284).abs() < 1e-9);
        assert!((pw.breakpoints[1].cost - 5.0).abs() < 1e-12);
    }

    #[test]
    fn secant_for_one_segment() {
        let pw = build_breakpoints_range_uniform(&mill(), 1).unwrap();
        assert_eq!(pw.breakpoints.len(), 2);
        assert_eq!(pw.first(), Breakpoint { capacity: 3.87, cost: 0.0 });
        assert_eq!(pw.last().capacity, 5.0);
        let g = |c: f64| total_capital_cost(&mill(), c).unwrap();
        assert_eq!(pw.last().cost, g(5.0) - g(3.87));
    }

    #[test]
    fn range_uniform_crowds_low_capacity() {
        let c = CapexCurve::new(52.0, 84.0, 0.7, 0.0, 168.0).unwrap();
        for m in 2..10 {
            let pw = build_breakpoints_range_uniform(&c, m).unwrap();
            let b = &pw.breakpoints;
            assert!(b[1].capacity - b[0].capacity < b[m].capacity - b[m - 1].capacity);
        }
    }

    #[test]
    fn degenerate_domain_rejected() {
        let c = CapexCurve::new(1.0, 1.0, 0.7, 2.0, 2.0).unwrap();
        assert!(matches!(build_breakpoints_range_uniform(&c, 4), Err(CapexError::DegenerateDomain(_))));
        assert!(build_breakpoints_range_uniform(&mill(), 0).is_err());
        assert!(PiecewiseApprox::no_build(2.0).is_no_build());
    }

    #[test]
    fn zero_cost_curve_falls_back() {
        let c = CapexCurve::new(0.0, 500.0, 0.7, 46.0, 50.0).unwrap();
        let pw = build_breakpoints_range_uniform(&c, 4).unwrap();
        assert_eq!(pw.segments(), 4);
        assert!(pw.breakpoints.iter().all(|b| b.cost == 0.0));
        assert!(pw.breakpoints.windows(2).all(|w| w[0].capacity < w[1].capacity));
    }

    #[test]
    fn interpolation_exact_at_breakpoints_and_below_between() {
        let pw = build_breakpoints_range_uniform(&mill(), 4).unwrap();
        for b in &pw.breakpoints {
            assert_eq!(piecewise_eval(&pw, b.capacity).unwrap(), b.cost);
        }
        let g = |c: f64| total_capital_cost(&mill(), c).unwrap();
        for w in pw.breakpoints.windows(2) {
            let mid = 0.5 * (w[0].capacity + w[1].capacity);
            assert!(piecewise_eval(&pw, mid).unwrap() < g(mid) - g(3.87));
        }
        assert!(piecewise_eval(&pw, 3.0).is_err());
        assert!(piecewise_eval(&pw, 5.1).is_err());
    }

    #[test]
    fn linear_secant_has_no_error() {
        let c = CapexCurve::new(10.0, 2.0, 1.0, 1.0, 7.0).unwrap();
        let pw = build_breakpoints_range_uniform(&c, 1).unwrap();
        assert!(max_rel_error(&pw, &c, 1000) < 1e-15);
    }

    #[test]
    fn error_shrinks_with_segments() {
        let mut last = f64::INFINITY;
        for m in [1, 2, 4, 8, 16, 32, 64] {
            let e = max_rel_error(&build_breakpoints_range_uniform(&mill(), m).unwrap(), &mill(), 1000);
            assert!(e <= last);
            last = e;
        }
        assert!(last < 1e-4);
    }
}
