//! Hyperbolic base systems.
//!
//! Two concrete homeomorphisms with local product structure are provided:
//! two-sided subshifts of finite type ([`SftSystem`]) and hyperbolic toral
//! automorphisms ([`TorusSystem`]). Both implement [`HyperbolicSystem`], which
//! is all the cocycle, holonomy and transfer code needs to know about the base.

mod sft;
mod torus;

use std::fmt::Debug;

use serde::{Deserialize, Serialize};

use crate::error::Result;

pub use sft::{SftSystem, SymbolicPoint};
pub use torus::{LeafCoords, RationalPoint, TorusPoint, TorusSystem};

pub trait HyperbolicSystem: Send + Sync + Debug + 'static {
    type Point: Clone + Debug + Send + Sync + 'static;

    fn name(&self) -> &'static str;

    /// Contraction rate of local stable sets (and expansion of unstable ones).
    fn lambda(&self) -> f64;

    /// Radius of the local stable/unstable sets.
    fn epsilon(&self) -> f64;

    /// Bracket radius: points closer than this have a well defined `[x, y]`.
    fn tau(&self) -> f64;

    /// `f^n(x)` for any integer `n`.
    fn iterate(&self, x: &Self::Point, n: i64) -> Self::Point;

    fn distance(&self, x: &Self::Point, y: &Self::Point) -> f64;

    fn same_point(&self, x: &Self::Point, y: &Self::Point) -> bool {
        self.distance(x, y) == 0.0
    }

    /// The unique point of `W^s_ε(x) ∩ W^u_ε(y)`.
    fn bracket(&self, x: &Self::Point, y: &Self::Point) -> Result<Self::Point>;

    /// Every point with `f^n(p) = p`, without duplicates.
    fn periodic_points(&self, n: usize) -> Result<Vec<Self::Point>>;

    /// Number of points of period `n`, from an algebraic formula independent of
    /// the enumeration.
    fn periodic_count(&self, n: usize) -> u128;

    /// A distinguished fixed point.
    fn fixed_point(&self) -> Self::Point;

    /// Anosov closing: a genuine `n`-periodic orbit shadowing the near-return
    /// segment `z, f(z), …, f^n(z)`.
    fn closing(&self, z: &Self::Point, n: usize, gamma: f64) -> Result<ClosingReport<Self::Point>>;

    /// If `z ∈ W^s(y)`, the number of forward iterates after which `f^k(z)`
    /// lies in `W^s_ε(f^k(y))`. `None` when the pair is not stable or the
    /// entry happens later than `horizon`.
    fn stable_entry(&self, y: &Self::Point, z: &Self::Point, horizon: usize) -> Option<usize>;

    /// Mirror of [`HyperbolicSystem::stable_entry`] for backward iterates.
    fn unstable_entry(&self, y: &Self::Point, z: &Self::Point, horizon: usize) -> Option<usize>;

    /// Whether `y` lies in the homoclinic class of the fixed point `anchor`
    /// on which transfer maps are built.
    fn is_homoclinic(&self, anchor: &Self::Point, y: &Self::Point) -> bool;

    /// Compact textual form of a point, used in reports.
    fn describe(&self, x: &Self::Point) -> String;
}

/// Result of the closing lemma.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClosingReport<P> {
    pub periodic: P,
    pub period: usize,
    pub gamma: f64,
    /// `d(f^n z, z)`.
    pub return_distance: f64,
    /// `d(f^j z, f^j p)` for `j = 0..=n`.
    pub distances: Vec<f64>,
    /// `max_j d(f^j z, f^j p)·e^{γ min(j, n−j)}`.
    pub raw_constant: f64,
    /// `raw_constant` divided by the return distance; zero when `z` is
    /// already periodic.
    pub constant: f64,
}

impl<P> ClosingReport<P> {
    /// Least-squares slope of `−log d_j` against `min(j, n−j)` over the
    /// nonzero distances; the empirical shadowing exponent.
    pub fn fitted_rate(&self) -> Option<f64> {
        let n = self.period;
        let pts: Vec<(f64, f64)> = self
            .distances
            .iter()
            .enumerate()
            .filter(|(_, d)| **d > 0.0)
            .map(|(j, d)| (j.min(n - j) as f64, -d.ln()))
            .collect();
        crate::fit::fit_line(&pts).map(|f| f.slope)
    }
}
