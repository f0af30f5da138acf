use num_traits::{One, Signed, Zero};
use rand::Rng;

use super::CakeError;
use crate::math::rat;
use crate::Rational;

/// Piecewise-constant value density on `[0, 1]` with exact rational pieces.
///
/// Segment `j` spans `breaks[j]..breaks[j + 1]` with constant height
/// `heights[j]`; the total value is exactly 1.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PiecewiseDensity {
    breaks: Vec<Rational>,
    heights: Vec<Rational>,
    /// `prefix[j]` = value of `[0, breaks[j]]`.
    prefix: Vec<Rational>,
}

impl PiecewiseDensity {
    pub fn new(breaks: Vec<Rational>, heights: Vec<Rational>) -> Result<Self, CakeError> {
        if breaks.len() < 2 || heights.len() + 1 != breaks.len() {
            return Err(CakeError::BadDensity("need m heights and m + 1 breakpoints".into()));
        }
        if !breaks[0].is_zero() || !breaks[breaks.len() - 1].is_one() {
            return Err(CakeError::BadDensity("breakpoints must run from 0 to 1".into()));
        }
        if breaks.windows(2).any(|w| w[0] >= w[1]) {
            return Err(CakeError::BadDensity("breakpoints must be strictly increasing".into()));
        }
        if heights.iter().any(|h| h.is_negative()) {
            return Err(CakeError::BadDensity("heights must be non-negative".into()));
        }
        let mut prefix = Vec::with_capacity(breaks.len());
        let mut acc = Rational::zero();
        prefix.push(acc.clone());
        for (h, w) in heights.iter().zip(breaks.windows(2)) {
            acc += h * (&w[1] - &w[0]);
            prefix.push(acc.clone());
        }
        if !acc.is_one() {
            return Err(CakeError::BadDensity(format!("total value is {acc}, not 1")));
        }
        Ok(Self { breaks, heights, prefix })
    }

    pub fn uniform() -> Self {
        Self::new(vec![Rational::zero(), Rational::one()], vec![Rational::one()]).expect("uniform is valid")
    }

    pub fn breaks(&self) -> &[Rational] {
        &self.breaks
    }

    pub fn heights(&self) -> &[Rational] {
        &self.heights
    }

    /// Segment containing `y` (the last one for `y = 1`).
    fn segment(&self, y: &Rational) -> usize {
        let j = self.breaks.partition_point(|t| t <= y);
        j.saturating_sub(1).min(self.heights.len() - 1)
    }

    /// `V([0, y])`, with `y` clamped to `[0, 1]`.
    pub fn eval(&self, y: &Rational) -> Rational {
        if !y.is_positive() {
            return Rational::zero();
        }
        if *y >= Rational::one() {
            return Rational::one();
        }
        let j = self.segment(y);
        &self.prefix[j] + &self.heights[j] * (y - &self.breaks[j])
    }

    /// Leftmost `y` with `V([0, y]) = alpha`, with `alpha` clamped to `[0, 1]`.
    pub fn cut(&self, alpha: &Rational) -> Rational {
        if !alpha.is_positive() {
            return Rational::zero();
        }
        let alpha = alpha.min(&self.prefix[self.prefix.len() - 1]);
        // first breakpoint whose prefix reaches alpha; the segment before it climbs
        let j = self.prefix.partition_point(|v| v < alpha) - 1;
        &self.breaks[j] + (alpha - &self.prefix[j]) / &self.heights[j]
    }

    /// `V([a, b])`.
    pub fn value(&self, a: &Rational, b: &Rational) -> Rational {
        self.eval(b) - self.eval(a)
    }
}

/// Random density with up to `max_pieces` segments on a grid of `1/grid`.
pub fn random_density<R: Rng + ?Sized>(rng: &mut R, max_pieces: usize, grid: i64) -> PiecewiseDensity {
    let pieces = rng.gen_range(1..=max_pieces.min(grid as usize));
    let mut cuts: Vec<i64> = Vec::with_capacity(pieces + 1);
    cuts.push(0);
    cuts.push(grid);
    while cuts.len() < pieces + 1 {
        let c = rng.gen_range(1..grid);
        if !cuts.contains(&c) {
            cuts.push(c);
        }
    }
    cuts.sort_unstable();
    let mut weights: Vec<i64> = (0..pieces).map(|_| rng.gen_range(0..10)).collect();
    if weights.iter().all(|&w| w == 0) {
        let j = rng.gen_range(0..pieces);
        weights[j] = 1;
    }
    let area: i64 = weights.iter().zip(cuts.windows(2)).map(|(w, c)| w * (c[1] - c[0])).sum();
    // height w / area per grid unit: segment value w * len / area
    let heights = weights.iter().map(|&w| rat(w * grid, area)).collect();
    let breaks = cuts.iter().map(|&c| rat(c, grid)).collect();
    PiecewiseDensity::new(breaks, heights).expect("generated density is normalized")
}
