//! Two-sided subshifts of finite type with exact eventually-periodic points.

use std::collections::VecDeque;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{ClosingReport, HyperbolicSystem};
use crate::error::{Error, Result};

/// Default cap on the number of points returned by periodic enumeration.
pub const DEFAULT_PERIODIC_CAP: usize = 1 << 20;

/// A two-sided sequence `(x_i)_{i∈ℤ}` that is periodic towards both ends.
///
/// `core[j]` sits at coordinate `j − origin`. Left of the core the word
/// `left` repeats (its last symbol is adjacent to the core), right of the
/// core `right` repeats (its first symbol is adjacent to the core). Values are
/// kept in a canonical form, so `==` is equality of sequences.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct SymbolicPoint {
    left: Vec<u8>,
    core: Vec<u8>,
    right: Vec<u8>,
    origin: i64,
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn lcm(a: usize, b: usize) -> usize {
    a / gcd(a, b) * b
}

fn primitive(word: &[u8]) -> Vec<u8> {
    let n = word.len();
    for p in 1..=n {
        if n.is_multiple_of(p) && (p..n).all(|i| word[i] == word[i - p]) {
            return word[..p].to_vec();
        }
    }
    word.to_vec()
}

fn rotate_left(word: &mut [u8]) {
    word.rotate_left(1);
}

fn rotate_right(word: &mut [u8]) {
    word.rotate_right(1);
}

impl SymbolicPoint {
    /// Builds a point from raw parts; the result is canonicalized.
    pub fn from_parts(left: Vec<u8>, core: Vec<u8>, right: Vec<u8>, origin: i64) -> Result<Self> {
        if left.is_empty() || right.is_empty() {
            return Err(Error::InvalidPoint("tails must be nonempty".into()));
        }
        let mut p = SymbolicPoint { left, core, right, origin };
        p.canonicalize();
        Ok(p)
    }

    /// The purely periodic point `x_i = word[i mod n]`.
    pub fn periodic(word: &[u8]) -> Result<Self> {
        Self::from_parts(word.to_vec(), Vec::new(), word.to_vec(), 0)
    }

    pub fn constant(symbol: u8) -> Self {
        SymbolicPoint { left: vec![symbol], core: Vec::new(), right: vec![symbol], origin: 0 }
    }

    /// `…aaa core aaa…` with `core[origin]` at coordinate 0.
    pub fn homoclinic(symbol: u8, core: &[u8], origin: i64) -> Result<Self> {
        Self::from_parts(vec![symbol], core.to_vec(), vec![symbol], origin)
    }

    pub fn left_tail(&self) -> &[u8] {
        &self.left
    }

    pub fn core(&self) -> &[u8] {
        &self.core
    }

    pub fn right_tail(&self) -> &[u8] {
        &self.right
    }

    pub fn origin(&self) -> i64 {
        self.origin
    }

    /// Coordinate of the first core symbol.
    fn core_start(&self) -> i64 {
        -self.origin
    }

    /// Coordinate one past the last core symbol.
    fn core_end(&self) -> i64 {
        self.core.len() as i64 - self.origin
    }

    pub fn symbol(&self, i: i64) -> u8 {
        let j = i + self.origin;
        let len = self.core.len() as i64;
        if j < 0 {
            self.left[j.rem_euclid(self.left.len() as i64) as usize]
        } else if j < len {
            self.core[j as usize]
        } else {
            self.right[(j - len).rem_euclid(self.right.len() as i64) as usize]
        }
    }

    /// Symbols on coordinates `lo..hi`.
    pub fn window(&self, lo: i64, hi: i64) -> Vec<u8> {
        (lo..hi).map(|i| self.symbol(i)).collect()
    }

    /// The shifted point `σ^n(x)`, `σ(x)_i = x_{i+1}`.
    pub fn shift(&self, n: i64) -> Self {
        let mut p = self.clone();
        p.origin += n;
        p.canonicalize();
        p
    }

    /// `x_i` for `i < at`, `right_source_i` for `i ≥ at`.
    pub fn splice(left_source: &SymbolicPoint, right_source: &SymbolicPoint, at: i64) -> Self {
        let lo = left_source.core_start().min(at);
        let hi = right_source.core_end().max(at);
        let ll = left_source.left.len() as i64;
        let left: Vec<u8> = (0..ll)
            .map(|k| left_source.left[(k + lo - left_source.core_start()).rem_euclid(ll) as usize])
            .collect();
        let rl = right_source.right.len() as i64;
        let right: Vec<u8> = (0..rl)
            .map(|k| right_source.right[(k + hi - right_source.core_end()).rem_euclid(rl) as usize])
            .collect();
        let mut core = left_source.window(lo, at);
        core.extend(right_source.window(at, hi));
        let mut p = SymbolicPoint { left, core, right, origin: -lo };
        p.canonicalize();
        p
    }

    /// Whether both tails are the constant word `symbol`.
    pub fn is_homoclinic_to(&self, symbol: u8) -> bool {
        self.left == [symbol] && self.right == [symbol]
    }

    /// Smallest `|i|` with `x_i ≠ y_i`, or `None` for equal sequences.
    pub fn first_disagreement(&self, other: &SymbolicPoint) -> Option<u64> {
        let right_bound = self.core_end().max(other.core_end()).max(0) + lcm(self.right.len(), other.right.len()) as i64;
        let left_bound =
            self.core_start().min(other.core_start()).min(0) - lcm(self.left.len(), other.left.len()) as i64;
        let reach = right_bound.max(-left_bound);
        for r in 0..=reach {
            if r <= right_bound && self.symbol(r) != other.symbol(r) {
                return Some(r as u64);
            }
            if r > 0 && -r >= left_bound && self.symbol(-r) != other.symbol(-r) {
                return Some(r as u64);
            }
        }
        None
    }

    /// Largest coordinate where the sequences differ, `None` if they agree on
    /// a whole right half-line... or differ infinitely often to the right
    /// (distinguished by the boolean).
    fn right_disagreement(&self, other: &SymbolicPoint) -> (bool, Option<i64>) {
        let start = self.core_end().max(other.core_end());
        let period = lcm(self.right.len(), other.right.len()) as i64;
        if (start..start + period).any(|i| self.symbol(i) != other.symbol(i)) {
            return (false, None);
        }
        let lo = self.core_start().min(other.core_start()) - 1;
        (true, (lo..start).rev().find(|&i| self.symbol(i) != other.symbol(i)))
    }

    fn left_disagreement(&self, other: &SymbolicPoint) -> (bool, Option<i64>) {
        let end = self.core_start().min(other.core_start());
        let period = lcm(self.left.len(), other.left.len()) as i64;
        if (end - period..end).any(|i| self.symbol(i) != other.symbol(i)) {
            return (false, None);
        }
        let hi = self.core_end().max(other.core_end()) + 1;
        (true, (end..hi).find(|&i| self.symbol(i) != other.symbol(i)))
    }

    fn canonicalize(&mut self) {
        self.left = primitive(&self.left);
        self.right = primitive(&self.right);
        while let Some(&last) = self.core.last() {
            if last != *self.right.last().unwrap() {
                break;
            }
            self.core.pop();
            rotate_right(&mut self.right);
        }
        while let Some(&first) = self.core.first() {
            if first != self.left[0] {
                break;
            }
            self.core.remove(0);
            rotate_left(&mut self.left);
            self.origin -= 1;
        }
        if self.core.is_empty() {
            // The boundary between the tails may slide while the tails agree
            // there; park it as close to coordinate 0 as possible.
            for _ in 0..self.origin.unsigned_abs() {
                let boundary = -self.origin;
                if boundary < 0 && self.right[0] == self.left[0] {
                    rotate_left(&mut self.left);
                    rotate_left(&mut self.right);
                    self.origin -= 1;
                } else if boundary > 0 && self.left[self.left.len() - 1] == self.right[self.right.len() - 1] {
                    rotate_right(&mut self.left);
                    rotate_right(&mut self.right);
                    self.origin += 1;
                } else {
                    break;
                }
            }
        }
    }
}

impl fmt::Display for SymbolicPoint {
    /// `(left)core(right)` with a `.` in front of coordinate 0. The core is
    /// widened with tail symbols when coordinate 0 falls outside it.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let lo = self.core_start().min(0);
        let hi = self.core_end().max(0);
        let ll = self.left.len() as i64;
        let rl = self.right.len() as i64;
        let digit = |s: u8| char::from_digit(s as u32, 36).unwrap_or('?');
        write!(f, "(")?;
        for k in 0..ll {
            write!(f, "{}", digit(self.left[(k + lo - self.core_start()).rem_euclid(ll) as usize]))?;
        }
        write!(f, ")")?;
        for i in lo..hi {
            if i == 0 {
                write!(f, ".")?;
            }
            write!(f, "{}", digit(self.symbol(i)))?;
        }
        if hi == 0 {
            write!(f, ".")?;
        }
        write!(f, "(")?;
        for k in 0..rl {
            write!(f, "{}", digit(self.right[(k + hi - self.core_end()).rem_euclid(rl) as usize]))?;
        }
        write!(f, ")")
    }
}

impl FromStr for SymbolicPoint {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidPoint(format!("cannot parse symbolic point {s:?}; expected (left)core.core(right)"));
        let s = s.trim();
        let rest = s.strip_prefix('(').ok_or_else(bad)?;
        let (left, rest) = rest.split_once(')').ok_or_else(bad)?;
        let (middle, right) = rest.split_once('(').ok_or_else(bad)?;
        let right = right.strip_suffix(')').ok_or_else(bad)?;
        let digits = |w: &str| -> Result<Vec<u8>> {
            w.chars().map(|c| c.to_digit(36).map(|d| d as u8).ok_or_else(bad)).collect()
        };
        let (before, after) = middle.split_once('.').ok_or_else(bad)?;
        if after.contains('.') {
            return Err(bad());
        }
        let origin = before.chars().count() as i64;
        let mut core = digits(before)?;
        core.extend(digits(after)?);
        SymbolicPoint::from_parts(digits(left)?, core, digits(right)?, origin)
    }
}

impl TryFrom<String> for SymbolicPoint {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<SymbolicPoint> for String {
    fn from(p: SymbolicPoint) -> String {
        p.to_string()
    }
}

/// Two-sided subshift of finite type with metric `d(x, y) = e^{−λ·N(x, y)}`,
/// `N` the largest window `|i| < N` on which `x` and `y` agree.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SftSystem {
    transitions: Vec<Vec<bool>>,
    lambda: f64,
    eps_window: u64,
    tau_window: u64,
    fixed_symbol: u8,
    periodic_cap: usize,
}

impl SftSystem {
    pub fn new(transitions: Vec<Vec<bool>>, lambda: f64) -> Result<Self> {
        let k = transitions.len();
        if k == 0 || k > 36 {
            return Err(Error::InvalidSystem(format!("alphabet size {k} outside 1..=36")));
        }
        if transitions.iter().any(|row| row.len() != k) {
            return Err(Error::InvalidSystem("transition matrix must be square".into()));
        }
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::InvalidSystem(format!("metric rate {lambda} must be positive")));
        }
        let fixed_symbol = (0..k)
            .find(|&a| transitions[a][a])
            .ok_or_else(|| Error::InvalidSystem("no symbol with a self-transition, so no fixed point".into()))?
            as u8;
        let sys = SftSystem { transitions, lambda, eps_window: 1, tau_window: 1, fixed_symbol, periodic_cap: DEFAULT_PERIODIC_CAP };
        if !sys.is_irreducible() {
            return Err(Error::InvalidSystem("transition matrix is not irreducible".into()));
        }
        Ok(sys)
    }

    /// Rows given as bit strings, e.g. `["11", "10"]` for the golden mean shift.
    pub fn from_rows(rows: &[&str], lambda: f64) -> Result<Self> {
        let transitions = rows
            .iter()
            .map(|r| {
                r.chars()
                    .map(|c| match c {
                        '1' => Ok(true),
                        '0' => Ok(false),
                        _ => Err(Error::InvalidSystem(format!("transition row {r:?} is not a bit string"))),
                    })
                    .collect::<Result<Vec<bool>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(transitions, lambda)
    }

    pub fn full_shift(k: usize, lambda: f64) -> Result<Self> {
        Self::new(vec![vec![true; k]; k], lambda)
    }

    /// Binary shift with the word `11` forbidden.
    pub fn golden_mean(lambda: f64) -> Result<Self> {
        Self::from_rows(&["11", "10"], lambda)
    }

    /// Local stable/unstable sets require agreement on `|i| < eps_window`,
    /// brackets require agreement on `|i| < tau_window`.
    pub fn with_windows(mut self, eps_window: u64, tau_window: u64) -> Result<Self> {
        if eps_window == 0 || tau_window == 0 {
            return Err(Error::InvalidSystem("windows must cover coordinate 0".into()));
        }
        self.eps_window = eps_window;
        self.tau_window = tau_window;
        Ok(self)
    }

    pub fn with_periodic_cap(mut self, cap: usize) -> Self {
        self.periodic_cap = cap;
        self
    }

    pub fn alphabet_size(&self) -> usize {
        self.transitions.len()
    }

    pub fn transitions(&self) -> &[Vec<bool>] {
        &self.transitions
    }

    pub fn fixed_symbol(&self) -> u8 {
        self.fixed_symbol
    }

    pub fn admissible(&self, a: u8, b: u8) -> bool {
        self.transitions[a as usize][b as usize]
    }

    fn reach(&self, from: usize, reverse: bool) -> Vec<bool> {
        let k = self.alphabet_size();
        let mut seen = vec![false; k];
        let mut queue = VecDeque::from([from]);
        seen[from] = true;
        while let Some(a) = queue.pop_front() {
            for b in 0..k {
                let edge = if reverse { self.transitions[b][a] } else { self.transitions[a][b] };
                if edge && !seen[b] {
                    seen[b] = true;
                    queue.push_back(b);
                }
            }
        }
        seen
    }

    fn is_irreducible(&self) -> bool {
        self.reach(0, false).iter().all(|&s| s) && self.reach(0, true).iter().all(|&s| s)
    }

    /// Checks every adjacent pair, including within repeated tails.
    pub fn validate(&self, x: &SymbolicPoint) -> Result<()> {
        let k = self.alphabet_size() as u8;
        let all = x.left.iter().chain(&x.core).chain(&x.right);
        if let Some(s) = all.clone().find(|&&s| s >= k) {
            return Err(Error::InvalidPoint(format!("symbol {s} outside alphabet of size {k}")));
        }
        let lo = x.core_start() - x.left.len() as i64 - 1;
        let hi = x.core_end() + x.right.len() as i64;
        for i in lo..hi {
            if !self.admissible(x.symbol(i), x.symbol(i + 1)) {
                return Err(Error::InadmissibleSplice(i));
            }
        }
        Ok(())
    }

    /// `N(x, y)`; `None` when the sequences coincide.
    pub fn agreement(&self, x: &SymbolicPoint, y: &SymbolicPoint) -> Option<u64> {
        x.first_disagreement(y)
    }

    /// Shortest intermediate word `w` with `from w to` admissible.
    pub fn connector(&self, from: u8, to: u8) -> Result<Vec<u8>> {
        if self.admissible(from, to) {
            return Ok(Vec::new());
        }
        let k = self.alphabet_size();
        let mut parent: Vec<Option<u8>> = vec![None; k];
        let mut seen = vec![false; k];
        let mut queue = VecDeque::new();
        for b in 0..k as u8 {
            if self.admissible(from, b) {
                seen[b as usize] = true;
                queue.push_back(b);
            }
        }
        while let Some(a) = queue.pop_front() {
            if self.admissible(a, to) {
                let mut path = vec![a];
                let mut cur = a;
                while let Some(p) = parent[cur as usize] {
                    path.push(p);
                    cur = p;
                }
                path.reverse();
                return Ok(path);
            }
            for b in 0..k as u8 {
                if self.admissible(a, b) && !seen[b as usize] {
                    seen[b as usize] = true;
                    parent[b as usize] = Some(a);
                    queue.push_back(b);
                }
            }
        }
        Err(Error::NoConnectingWord { from, to })
    }

    /// Longest connector needed to leave from, or return to, the fixed symbol.
    pub fn connection_length(&self) -> Result<usize> {
        let a = self.fixed_symbol;
        let mut r = 0;
        for b in 0..self.alphabet_size() as u8 {
            r = r.max(self.connector(a, b)?.len()).max(self.connector(b, a)?.len());
        }
        Ok(r)
    }

    /// A point of `W(x)` for the fixed point `x = a^∞` agreeing with `y` on
    /// `|i| ≤ n`. Connecting words are placed outside that window, so
    /// `d(y, y′) ≤ e^{−λ(n+1)}`.
    pub fn homoclinic_truncate(&self, y: &SymbolicPoint, x: &SymbolicPoint, n: u64) -> Result<SymbolicPoint> {
        let a = x.symbol(0);
        if *x != SymbolicPoint::constant(a) || !self.admissible(a, a) {
            return Err(Error::InvalidPoint(format!("{x} is not a fixed point")));
        }
        let n = n as i64;
        let window = y.window(-n, n + 1);
        let lead = self.connector(a, window[0])?;
        let trail = self.connector(window[window.len() - 1], a)?;
        let origin = lead.len() as i64 + n;
        let mut core = lead;
        core.extend(window);
        core.extend(trail);
        SymbolicPoint::homoclinic(a, &core, origin)
    }

    /// `trace(T^n)`, the number of points of period `n`.
    pub fn trace_count(&self, n: usize) -> u128 {
        let k = self.alphabet_size();
        let t: Vec<Vec<u128>> =
            self.transitions.iter().map(|r| r.iter().map(|&b| u128::from(b)).collect()).collect();
        let mut acc: Vec<Vec<u128>> = (0..k).map(|i| (0..k).map(|j| u128::from(i == j)).collect()).collect();
        for _ in 0..n {
            acc = (0..k)
                .map(|i| (0..k).map(|j| (0..k).map(|l| acc[i][l].saturating_mul(t[l][j])).fold(0u128, u128::saturating_add)).collect())
                .collect();
        }
        (0..k).map(|i| acc[i][i]).fold(0, u128::saturating_add)
    }

    /// Random admissible point: periodic tails of period at most 3 and a core
    /// random walk of roughly `core_len` symbols with coordinate 0 inside it.
    pub fn random_point<R: Rng + ?Sized>(&self, rng: &mut R, core_len: usize) -> SymbolicPoint {
        let cycles: Vec<Vec<u8>> = (1..=3)
            .flat_map(|p| self.cycle_words(p))
            .collect();
        let left = cycles[rng.random_range(0..cycles.len())].clone();
        let right = cycles[rng.random_range(0..cycles.len())].clone();
        let mut core = self.random_walk(rng, left[left.len() - 1], core_len.max(1));
        let last = core[core.len() - 1];
        core.extend(self.connector(last, right[0]).expect("irreducible"));
        let origin = rng.random_range(0..core.len() as i64);
        SymbolicPoint::from_parts(left, core, right, origin).expect("nonempty tails")
    }

    /// Random point of `W(a^∞)` whose core has roughly `core_len` symbols.
    pub fn random_homoclinic<R: Rng + ?Sized>(&self, rng: &mut R, core_len: usize) -> SymbolicPoint {
        let a = self.fixed_symbol;
        let mut core = self.random_walk(rng, a, core_len.max(1));
        let last = core[core.len() - 1];
        core.extend(self.connector(last, a).expect("irreducible"));
        let origin = rng.random_range(0..core.len() as i64);
        SymbolicPoint::homoclinic(a, &core, origin).expect("nonempty tails")
    }

    /// Random admissible walk of length `len` whose first symbol may follow `after`.
    pub fn random_walk<R: Rng + ?Sized>(&self, rng: &mut R, after: u8, len: usize) -> Vec<u8> {
        let k = self.alphabet_size() as u8;
        let mut word = Vec::with_capacity(len);
        let mut prev = after;
        for _ in 0..len {
            let next: Vec<u8> = (0..k).filter(|&b| self.admissible(prev, b)).collect();
            prev = next[rng.random_range(0..next.len())];
            word.push(prev);
        }
        word
    }

    /// Every admissible word of length `len`, in lexicographic order.
    pub fn admissible_words(&self, len: usize) -> Vec<Vec<u8>> {
        let mut out: Vec<Vec<u8>> = vec![Vec::new()];
        for _ in 0..len {
            let mut next = Vec::new();
            for w in &out {
                for b in 0..self.alphabet_size() as u8 {
                    if w.last().is_none_or(|&a| self.admissible(a, b)) {
                        let mut v = w.clone();
                        v.push(b);
                        next.push(v);
                    }
                }
            }
            out = next;
        }
        out
    }

    fn cycle_words(&self, n: usize) -> Vec<Vec<u8>> {
        let mut out = Vec::new();
        let mut word = Vec::with_capacity(n);
        self.extend_cycles(n, &mut word, &mut out);
        out
    }

    fn extend_cycles(&self, n: usize, word: &mut Vec<u8>, out: &mut Vec<Vec<u8>>) {
        if word.len() == n {
            if self.admissible(word[n - 1], word[0]) {
                out.push(word.clone());
            }
            return;
        }
        for b in 0..self.alphabet_size() as u8 {
            if word.last().is_none_or(|&a| self.admissible(a, b)) {
                word.push(b);
                self.extend_cycles(n, word, out);
                word.pop();
            }
        }
    }

    fn metric(&self, n: Option<u64>) -> f64 {
        match n {
            None => 0.0,
            Some(n) => (-self.lambda * n as f64).exp(),
        }
    }
}

impl HyperbolicSystem for SftSystem {
    type Point = SymbolicPoint;

    fn name(&self) -> &'static str {
        "sft"
    }

    fn lambda(&self) -> f64 {
        self.lambda
    }

    fn epsilon(&self) -> f64 {
        self.metric(Some(self.eps_window))
    }

    fn tau(&self) -> f64 {
        self.metric(Some(self.tau_window))
    }

    fn iterate(&self, x: &SymbolicPoint, n: i64) -> SymbolicPoint {
        x.shift(n)
    }

    fn distance(&self, x: &SymbolicPoint, y: &SymbolicPoint) -> f64 {
        self.metric(self.agreement(x, y))
    }

    fn same_point(&self, x: &SymbolicPoint, y: &SymbolicPoint) -> bool {
        x == y
    }

    fn bracket(&self, x: &SymbolicPoint, y: &SymbolicPoint) -> Result<SymbolicPoint> {
        if let Some(n) = self.agreement(x, y) {
            if n < self.tau_window {
                return Err(Error::DistanceExceedsTau { distance: self.metric(Some(n)), tau: self.tau() });
            }
        }
        let z = SymbolicPoint::splice(y, x, 0);
        self.validate(&z)?;
        Ok(z)
    }

    fn periodic_points(&self, n: usize) -> Result<Vec<SymbolicPoint>> {
        if n == 0 {
            return Err(Error::InvalidPoint("period must be positive".into()));
        }
        let count = self.trace_count(n);
        if count > self.periodic_cap as u128 {
            return Err(Error::BudgetExceeded { requested: count, cap: self.periodic_cap });
        }
        self.cycle_words(n).iter().map(|w| SymbolicPoint::periodic(w)).collect()
    }

    fn periodic_count(&self, n: usize) -> u128 {
        self.trace_count(n)
    }

    fn fixed_point(&self) -> SymbolicPoint {
        SymbolicPoint::constant(self.fixed_symbol)
    }

    fn closing(&self, z: &SymbolicPoint, n: usize, gamma: f64) -> Result<ClosingReport<SymbolicPoint>> {
        if n == 0 {
            return Err(Error::InvalidPoint("period must be positive".into()));
        }
        let image = z.shift(n as i64);
        let ret = self.agreement(z, &image);
        if let Some(k) = ret {
            if k < self.eps_window {
                return Err(Error::NotClose { distance: self.metric(ret), threshold: self.epsilon() });
            }
        }
        let p = SymbolicPoint::periodic(&z.window(0, n as i64))?;
        let mut distances = Vec::with_capacity(n + 1);
        // Log-ratios are assembled from integer agreement counts so that the
        // bound with γ = λ is checked without rounding.
        let mut log_raw = f64::NEG_INFINITY;
        let mut log_normalized = f64::NEG_INFINITY;
        let exact = gamma == self.lambda;
        for j in 0..=n {
            let agree = self.agreement(&z.shift(j as i64), &p.shift(j as i64));
            distances.push(self.metric(agree));
            let Some(big_n) = agree else { continue };
            let m = j.min(n - j) as i64;
            let k = ret.map(|k| k as i64);
            let (raw, normalized) = if exact {
                let raw = self.lambda * (m - big_n as i64) as f64;
                (raw, k.map(|k| self.lambda * (m + k - big_n as i64) as f64))
            } else {
                let raw = gamma * m as f64 - self.lambda * big_n as f64;
                (raw, k.map(|k| raw + self.lambda * k as f64))
            };
            log_raw = log_raw.max(raw);
            if let Some(v) = normalized {
                log_normalized = log_normalized.max(v);
            }
        }
        Ok(ClosingReport {
            periodic: p,
            period: n,
            gamma,
            return_distance: self.metric(ret),
            distances,
            raw_constant: log_raw.exp(),
            constant: log_normalized.exp(),
        })
    }

    fn stable_entry(&self, y: &SymbolicPoint, z: &SymbolicPoint, horizon: usize) -> Option<usize> {
        let (eventually_equal, last) = y.right_disagreement(z);
        if !eventually_equal {
            return None;
        }
        // f^k z ∈ W^s_ε(f^k y) once the pair agrees on i > −eps_window.
        let entry = match last {
            None => 0,
            Some(i) => (i + self.eps_window as i64).max(0) as usize,
        };
        (entry <= horizon).then_some(entry)
    }

    fn unstable_entry(&self, y: &SymbolicPoint, z: &SymbolicPoint, horizon: usize) -> Option<usize> {
        let (eventually_equal, first) = y.left_disagreement(z);
        if !eventually_equal {
            return None;
        }
        let entry = match first {
            None => 0,
            Some(i) => (self.eps_window as i64 - i).max(0) as usize,
        };
        (entry <= horizon).then_some(entry)
    }

    fn is_homoclinic(&self, anchor: &SymbolicPoint, y: &SymbolicPoint) -> bool {
        let a = anchor.symbol(0);
        *anchor == SymbolicPoint::constant(a) && y.is_homoclinic_to(a)
    }

    fn describe(&self, x: &SymbolicPoint) -> String {
        x.to_string()
    }
}
