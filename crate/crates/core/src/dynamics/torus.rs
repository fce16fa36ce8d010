//! Hyperbolic automorphisms of the two-torus.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{ClosingReport, HyperbolicSystem};
use crate::error::{Error, Result};

/// Default cap on the number of periodic points returned by enumeration.
pub const DEFAULT_TORUS_CAP: usize = 1_000_000;

/// Largest magnitude accepted in the exact closing solve.
const SOLVE_LIMIT: i128 = 1 << 50;

fn gcd(a: i128, b: i128) -> i128 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

/// `(g, x, y)` with `a·x + b·y = g = gcd(a, b) ≥ 0`.
fn ext_gcd(a: i128, b: i128) -> (i128, i128, i128) {
    if b == 0 {
        if a < 0 {
            (-a, -1, 0)
        } else {
            (a, 1, 0)
        }
    } else {
        let (g, x, y) = ext_gcd(b, a.rem_euclid(b));
        (g, y, x - a.div_euclid(b) * y)
    }
}

type IntMat = [[i128; 2]; 2];

fn mat_mul(a: &IntMat, b: &IntMat) -> IntMat {
    let mut c = [[0i128; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            c[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    c
}

/// A point of `ℚ²/ℤ²` in lowest terms, coordinates in `[0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RationalPoint {
    pub num: [i64; 2],
    pub den: i64,
}

impl RationalPoint {
    pub fn new(num: [i64; 2], den: i64) -> Result<Self> {
        if den <= 0 {
            return Err(Error::InvalidPoint(format!("denominator {den} must be positive")));
        }
        Ok(Self::reduced([num[0] as i128, num[1] as i128], den as i128))
    }

    pub fn origin() -> Self {
        RationalPoint { num: [0, 0], den: 1 }
    }

    fn reduced(num: [i128; 2], den: i128) -> Self {
        let a = num[0].rem_euclid(den);
        let b = num[1].rem_euclid(den);
        let g = gcd(gcd(a, b), den).max(1);
        RationalPoint { num: [(a / g) as i64, (b / g) as i64], den: (den / g) as i64 }
    }

    fn apply(&self, m: &IntMat) -> Self {
        let n = [self.num[0] as i128, self.num[1] as i128];
        let den = self.den as i128;
        let a = (m[0][0] * n[0] + m[0][1] * n[1]).rem_euclid(den);
        let b = (m[1][0] * n[0] + m[1][1] * n[1]).rem_euclid(den);
        Self::reduced([a, b], den)
    }

    pub fn to_f64(&self) -> [f64; 2] {
        [self.num[0] as f64 / self.den as f64, self.num[1] as f64 / self.den as f64]
    }
}

/// Position `anchor + s·v_s + u·v_u (mod 1)` relative to an exact anchor.
///
/// Iteration maps the anchor exactly and rescales `s`, `u` by the
/// eigenvalues, so long orbits keep full relative precision.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LeafCoords {
    pub anchor: RationalPoint,
    pub s: f64,
    pub u: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TorusPoint {
    pub coords: [f64; 2],
    pub leaf: Option<LeafCoords>,
}

impl TorusPoint {
    /// Plain floating point, reduced mod 1.
    pub fn new(x: f64, y: f64) -> Self {
        TorusPoint { coords: [wrap01(x), wrap01(y)], leaf: None }
    }

    pub fn rational(&self) -> Option<RationalPoint> {
        match self.leaf {
            Some(l) if l.s == 0.0 && l.u == 0.0 => Some(l.anchor),
            _ => None,
        }
    }
}

fn wrap01(x: f64) -> f64 {
    let r = x.rem_euclid(1.0);
    if r >= 1.0 {
        0.0
    } else {
        r
    }
}

fn wrap_half(x: f64) -> f64 {
    x - x.round()
}

/// `x ↦ Fx mod ℤ²` for an integer matrix with `|det F| = 1` and real
/// eigenvalues off the unit circle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TorusSystem {
    matrix: [[i64; 2]; 2],
    inverse: [[i64; 2]; 2],
    mu_u: f64,
    mu_s: f64,
    v_u: [f64; 2],
    v_s: [f64; 2],
    lambda: f64,
    epsilon: f64,
    tau: f64,
    closing_threshold: f64,
    periodic_cap: usize,
}

impl TorusSystem {
    pub fn new(matrix: [[i64; 2]; 2]) -> Result<Self> {
        let [[a, b], [c, d]] = matrix;
        let det = a * d - b * c;
        if det.abs() != 1 {
            return Err(Error::InvalidSystem(format!("determinant {det} is not ±1")));
        }
        let tr = (a + d) as f64;
        // x² − tx + det has a root off the unit circle iff |t| > 2 (det = 1) or t ≠ 0 (det = −1).
        if (det == 1 && (a + d).abs() <= 2) || (det == -1 && a + d == 0) {
            return Err(Error::InvalidSystem(format!("trace {} gives eigenvalues on or near the unit circle", a + d)));
        }
        let disc = tr * tr - 4.0 * det as f64;
        let root = disc.sqrt();
        let (m1, m2) = ((tr + root) / 2.0, (tr - root) / 2.0);
        let (mu_u, mu_s) = if m1.abs() > m2.abs() { (m1, m2) } else { (m2, m1) };
        let eigvec = |mu: f64| -> [f64; 2] {
            let v = if b != 0 { [b as f64, mu - a as f64] } else { [mu - d as f64, c as f64] };
            let n = v[0].hypot(v[1]);
            [v[0] / n, v[1] / n]
        };
        let inverse = [[d * det, -b * det], [-c * det, a * det]];
        Ok(TorusSystem {
            matrix,
            inverse,
            mu_u,
            mu_s,
            v_u: eigvec(mu_u),
            v_s: eigvec(mu_s),
            lambda: mu_u.abs().ln(),
            epsilon: 0.1,
            tau: 0.05,
            closing_threshold: 0.05,
            periodic_cap: DEFAULT_TORUS_CAP,
        })
    }

    /// The cat map `[[2, 1], [1, 1]]`.
    pub fn cat_map() -> Self {
        Self::new([[2, 1], [1, 1]]).expect("cat map is hyperbolic")
    }

    pub fn with_radii(mut self, epsilon: f64, tau: f64) -> Result<Self> {
        if !(epsilon > 0.0 && tau > 0.0 && epsilon < 0.5 && tau <= epsilon) {
            return Err(Error::InvalidSystem(format!("radii ε={epsilon}, τ={tau} must satisfy 0 < τ ≤ ε < 1/2")));
        }
        self.epsilon = epsilon;
        self.tau = tau;
        Ok(self)
    }

    pub fn with_periodic_cap(mut self, cap: usize) -> Self {
        self.periodic_cap = cap;
        self
    }

    pub fn matrix(&self) -> [[i64; 2]; 2] {
        self.matrix
    }

    pub fn stable_direction(&self) -> [f64; 2] {
        self.v_s
    }

    pub fn unstable_direction(&self) -> [f64; 2] {
        self.v_u
    }

    /// `(μ_s, μ_u)`, signed.
    pub fn eigenvalues(&self) -> (f64, f64) {
        (self.mu_s, self.mu_u)
    }

    /// The `n`-periodic point obtained by lifting `z`: with `F^n z̃ − z̃ ≈ k ∈ ℤ²`,
    /// `p = (F^n − I)⁻¹k`, computed exactly.
    pub fn periodic_point_near(&self, z: &TorusPoint, n: usize) -> Result<TorusPoint> {
        if n == 0 {
            return Err(Error::InvalidPoint("period must be positive".into()));
        }
        let fp = self.int_power(n as i64);
        let c = z.coords;
        let k = [
            (fp[0][0] as f64 * c[0] + fp[0][1] as f64 * c[1] - c[0]).round() as i128,
            (fp[1][0] as f64 * c[0] + fp[1][1] as f64 * c[1] - c[1]).round() as i128,
        ];
        let m = self.shifted_power(n);
        let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
        if det == 0 {
            return Err(Error::SolveFailure("F^n − I is singular".into()));
        }
        let num = [m[1][1] * k[0] - m[0][1] * k[1], -m[1][0] * k[0] + m[0][0] * k[1]];
        if num.iter().chain([&det]).any(|v| v.abs() > SOLVE_LIMIT) {
            return Err(Error::SolveFailure(format!("lifted solve for period {n} exceeds exact integer range")));
        }
        let (num, den) = if det < 0 { ([-num[0], -num[1]], -det) } else { (num, det) };
        Ok(self.rational_point(RationalPoint::reduced(num, den)))
    }

    /// Point `anchor + s·v_s + u·v_u`.
    pub fn leaf_point(&self, anchor: RationalPoint, s: f64, u: f64) -> TorusPoint {
        let a = anchor.to_f64();
        let x = a[0] + s * self.v_s[0] + u * self.v_u[0];
        let y = a[1] + s * self.v_s[1] + u * self.v_u[1];
        TorusPoint { coords: [wrap01(x), wrap01(y)], leaf: Some(LeafCoords { anchor, s, u }) }
    }

    pub fn rational_point(&self, r: RationalPoint) -> TorusPoint {
        self.leaf_point(r, 0.0, 0.0)
    }

    /// Random point with an exact anchor of denominator `2^20` and no offset.
    pub fn random_point<R: Rng + ?Sized>(&self, rng: &mut R) -> TorusPoint {
        let den = 1i64 << 20;
        let r = RationalPoint::new([rng.random_range(0..den), rng.random_range(0..den)], den).expect("positive denominator");
        self.rational_point(r)
    }

    fn int_power(&self, n: i64) -> IntMat {
        let base = if n >= 0 { self.matrix } else { self.inverse };
        let base = [[base[0][0] as i128, base[0][1] as i128], [base[1][0] as i128, base[1][1] as i128]];
        let mut acc = [[1, 0], [0, 1]];
        for _ in 0..n.unsigned_abs() {
            acc = mat_mul(&base, &acc);
        }
        acc
    }

    /// `F^n − I`.
    fn shifted_power(&self, n: usize) -> IntMat {
        let mut m = self.int_power(n as i64);
        m[0][0] -= 1;
        m[1][1] -= 1;
        m
    }

    fn float_step(&self, c: [f64; 2], m: &[[i64; 2]; 2]) -> [f64; 2] {
        [
            wrap01(m[0][0] as f64 * c[0] + m[0][1] as f64 * c[1]),
            wrap01(m[1][0] as f64 * c[0] + m[1][1] as f64 * c[1]),
        ]
    }

    /// Shortest representative of `y − x` in `ℝ²`.
    fn displacement(&self, x: &TorusPoint, y: &TorusPoint) -> [f64; 2] {
        if let (Some(lx), Some(ly)) = (x.leaf, y.leaf) {
            if lx.anchor == ly.anchor {
                let ds = ly.s - lx.s;
                let du = ly.u - lx.u;
                let v = [ds * self.v_s[0] + du * self.v_u[0], ds * self.v_s[1] + du * self.v_u[1]];
                return [wrap_half(v[0]), wrap_half(v[1])];
            }
        }
        [wrap_half(y.coords[0] - x.coords[0]), wrap_half(y.coords[1] - x.coords[1])]
    }

    /// `(a, b)` with `w = a·v_s + b·v_u`.
    fn eigen_split(&self, w: [f64; 2]) -> (f64, f64) {
        let det = self.v_s[0] * self.v_u[1] - self.v_s[1] * self.v_u[0];
        let a = (w[0] * self.v_u[1] - w[1] * self.v_u[0]) / det;
        let b = (self.v_s[0] * w[1] - self.v_s[1] * w[0]) / det;
        (a, b)
    }

    /// Number of points of period `n`: `|det(F^n − I)|`.
    pub fn det_count(&self, n: usize) -> u128 {
        let m = self.shifted_power(n);
        (m[0][0] * m[1][1] - m[0][1] * m[1][0]).unsigned_abs()
    }

    /// Stable-leaf offset of `z` relative to `y`, when both sit on one leaf.
    pub fn stable_offset(&self, y: &TorusPoint, z: &TorusPoint) -> Option<f64> {
        match (y.leaf, z.leaf) {
            (Some(ly), Some(lz)) if ly.anchor == lz.anchor && ly.u == lz.u => Some(lz.s - ly.s),
            _ => None,
        }
    }

    pub fn unstable_offset(&self, y: &TorusPoint, z: &TorusPoint) -> Option<f64> {
        match (y.leaf, z.leaf) {
            (Some(ly), Some(lz)) if ly.anchor == lz.anchor && ly.s == lz.s => Some(lz.u - ly.u),
            _ => None,
        }
    }
}

impl HyperbolicSystem for TorusSystem {
    type Point = TorusPoint;

    fn name(&self) -> &'static str {
        "torus"
    }

    fn lambda(&self) -> f64 {
        self.lambda
    }

    fn epsilon(&self) -> f64 {
        self.epsilon
    }

    fn tau(&self) -> f64 {
        self.tau
    }

    fn iterate(&self, x: &TorusPoint, n: i64) -> TorusPoint {
        if n == 0 {
            return *x;
        }
        match x.leaf {
            Some(l) => {
                let anchor = l.anchor.apply(&self.int_power(n));
                let n32 = n as i32;
                self.leaf_point(anchor, l.s * self.mu_s.powi(n32), l.u * self.mu_u.powi(n32))
            }
            None => {
                let m = if n > 0 { self.matrix } else { self.inverse };
                let mut c = x.coords;
                for _ in 0..n.unsigned_abs() {
                    c = self.float_step(c, &m);
                }
                TorusPoint { coords: c, leaf: None }
            }
        }
    }

    fn distance(&self, x: &TorusPoint, y: &TorusPoint) -> f64 {
        let d = self.displacement(x, y);
        d[0].hypot(d[1])
    }

    fn bracket(&self, x: &TorusPoint, y: &TorusPoint) -> Result<TorusPoint> {
        let dist = self.distance(x, y);
        if dist > self.tau {
            return Err(Error::DistanceExceedsTau { distance: dist, tau: self.tau });
        }
        // z = x + a·v_s = y − b'·v_u with y − x = a·v_s + b·v_u.
        let (a, b) = self.eigen_split(self.displacement(x, y));
        Ok(match x.leaf {
            Some(l) => self.leaf_point(l.anchor, l.s + a, l.u),
            None => {
                let _ = b;
                TorusPoint::new(x.coords[0] + a * self.v_s[0], x.coords[1] + a * self.v_s[1])
            }
        })
    }

    fn periodic_points(&self, n: usize) -> Result<Vec<TorusPoint>> {
        if n == 0 {
            return Err(Error::InvalidPoint("period must be positive".into()));
        }
        let count = self.det_count(n);
        if count > self.periodic_cap as u128 {
            return Err(Error::BudgetExceeded { requested: count, cap: self.periodic_cap });
        }
        let m = self.shifted_power(n);
        let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
        // Column Hermite form of the lattice Mℤ²: basis (g, h), (0, c).
        let (g, x, y) = ext_gcd(m[0][0], m[0][1]);
        let h = x * m[1][0] + y * m[1][1];
        let c = ((-m[0][1] / g) * m[1][0] + (m[0][0] / g) * m[1][1]).abs();
        debug_assert_eq!((g * c).unsigned_abs(), det.unsigned_abs());
        let _ = h;
        let adj = [[m[1][1], -m[0][1]], [-m[1][0], m[0][0]]];
        let mut out = Vec::with_capacity(count as usize);
        for i in 0..g {
            for j in 0..c {
                // v = M⁻¹k solves (F^n − I)v = k.
                let num = [adj[0][0] * i + adj[0][1] * j, adj[1][0] * i + adj[1][1] * j];
                let (num, den) = if det < 0 { ([-num[0], -num[1]], -det) } else { (num, det) };
                out.push(self.rational_point(RationalPoint::reduced(num, den)));
            }
        }
        out.sort_by(|p, q| {
            let (a, b) = (p.leaf.unwrap().anchor, q.leaf.unwrap().anchor);
            (a.den, a.num).cmp(&(b.den, b.num))
        });
        Ok(out)
    }

    fn periodic_count(&self, n: usize) -> u128 {
        self.det_count(n)
    }

    fn fixed_point(&self) -> TorusPoint {
        self.rational_point(RationalPoint::origin())
    }

    fn closing(&self, z: &TorusPoint, n: usize, gamma: f64) -> Result<ClosingReport<TorusPoint>> {
        if n == 0 {
            return Err(Error::InvalidPoint("period must be positive".into()));
        }
        let image = self.iterate(z, n as i64);
        let ret = self.distance(z, &image);
        if ret >= self.closing_threshold {
            return Err(Error::NotClose { distance: ret, threshold: self.closing_threshold });
        }
        let p = self.periodic_point_near(z, n)?;
        let mut distances = Vec::with_capacity(n + 1);
        let mut raw: f64 = 0.0;
        for j in 0..=n {
            let d = self.distance(&self.iterate(z, j as i64), &self.iterate(&p, j as i64));
            raw = raw.max(d * (gamma * j.min(n - j) as f64).exp());
            distances.push(d);
        }
        Ok(ClosingReport {
            periodic: p,
            period: n,
            gamma,
            return_distance: ret,
            distances,
            raw_constant: raw,
            constant: if ret > 0.0 { raw / ret } else { 0.0 },
        })
    }

    fn stable_entry(&self, y: &TorusPoint, z: &TorusPoint, horizon: usize) -> Option<usize> {
        let off = self.stable_offset(y, z)?.abs();
        let mut k = 0;
        let mut d = off;
        while d > self.epsilon {
            k += 1;
            d *= self.mu_s.abs();
            if k > horizon {
                return None;
            }
        }
        Some(k)
    }

    fn unstable_entry(&self, y: &TorusPoint, z: &TorusPoint, horizon: usize) -> Option<usize> {
        let off = self.unstable_offset(y, z)?.abs();
        let mut k = 0;
        let mut d = off;
        while d > self.epsilon {
            k += 1;
            d /= self.mu_u.abs();
            if k > horizon {
                return None;
            }
        }
        Some(k)
    }

    /// On the torus, transfer maps are built along the stable leaf of the
    /// anchor: `y` must share its exact anchor and have zero unstable offset.
    fn is_homoclinic(&self, anchor: &TorusPoint, y: &TorusPoint) -> bool {
        matches!((anchor.leaf, y.leaf), (Some(a), Some(l)) if a.s == 0.0 && a.u == 0.0 && l.anchor == a.anchor && l.u == 0.0)
            && self.iterate(anchor, 1).leaf.map(|l| l.anchor) == anchor.leaf.map(|l| l.anchor)
    }

    fn describe(&self, x: &TorusPoint) -> String {
        match x.leaf {
            Some(l) if l.s == 0.0 && l.u == 0.0 => {
                format!("({}/{}, {}/{})", l.anchor.num[0], l.anchor.den, l.anchor.num[1], l.anchor.den)
            }
            Some(l) => format!(
                "({}/{}, {}/{}) + {:e}·v_s + {:e}·v_u",
                l.anchor.num[0], l.anchor.den, l.anchor.num[1], l.anchor.den, l.s, l.u
            ),
            None => format!("({:.15}, {:.15})", x.coords[0], x.coords[1]),
        }
    }
}
