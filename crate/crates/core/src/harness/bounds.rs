//! Closed-form reference values.

use crate::math::{rat_int, to_f64};
use crate::select::{deterministic_centre, randomized_centre};
use crate::sort::sorting_lower_bound;
use crate::Rational;

/// Reference values for one `(n, k, p)` triple.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundRow {
    /// `np(k+1)/(2k) - 1` and `+ 1`: randomized unordered search.
    pub rand_lo: f64,
    pub rand_hi: f64,
    /// `np(1 - (k-1)p/(2k)) - 1` and `+ 1`: deterministic unordered search.
    pub det_lo: f64,
    pub det_hi: f64,
    /// `k p n^(1/k)`: randomized ordered search.
    pub ordered_rand: f64,
    /// `k p^(1/k) n^(1/k)`: deterministic ordered search, uniform target.
    pub ordered_det: f64,
    /// `(k/2e) n^(1+1/k) - kn`: sorting with rank queries.
    pub sort_floor: f64,
}

/// Exact versions of the two unordered-search bands.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExactBands {
    pub randomized: (Rational, Rational),
    pub deterministic: (Rational, Rational),
}

pub fn exact_bands(n: u64, k: usize, p: &Rational) -> ExactBands {
    let one = rat_int(1);
    let r = randomized_centre(n as usize, k, p);
    let d = deterministic_centre(n as usize, k, p);
    ExactBands { randomized: (&r - &one, &r + &one), deterministic: (&d - &one, &d + &one) }
}

pub fn bounds(n: u64, k: usize, p: &Rational) -> BoundRow {
    let bands = exact_bands(n, k, p);
    let (nf, kf, pf) = (n as f64, k as f64, to_f64(p));
    BoundRow {
        rand_lo: to_f64(&bands.randomized.0),
        rand_hi: to_f64(&bands.randomized.1),
        det_lo: to_f64(&bands.deterministic.0),
        det_hi: to_f64(&bands.deterministic.1),
        ordered_rand: kf * pf * nf.powf(1.0 / kf),
        ordered_det: kf * pf.powf(1.0 / kf) * nf.powf(1.0 / kf),
        sort_floor: sorting_lower_bound(k, n as usize),
    }
}
