//! Exact algebra on piecewise quadratic functions of one real variable.
//!
//! A [`PiecewiseQuadratic`] stores an ordered list of pieces. Piece `i` is
//! active on the half-open interval `[left_i, left_{i+1})`, the first piece
//! starts at `-inf` and the last one extends to `+inf`. Every function built
//! by the solver is continuous and has no knot where the left derivative is
//! strictly below the right derivative; [`PiecewiseQuadratic::check_invariants`]
//! verifies both properties.

use std::ops::{Add, Neg, Sub};

use crate::error::{Error, Result};

/// Absolute tolerance on coefficient differences.
pub const COEF_TOL: f64 = 1e-12;

/// Relative tolerance for continuity and slope checks at knots.
pub const KNOT_TOL: f64 = 1e-8;

/// `q(x) = a x^2 + b x + c`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Quadratic {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl Quadratic {
    pub const ZERO: Quadratic = Quadratic { a: 0.0, b: 0.0, c: 0.0 };

    pub const fn new(a: f64, b: f64, c: f64) -> Self {
        Self { a, b, c }
    }

    pub const fn constant(c: f64) -> Self {
        Self { a: 0.0, b: 0.0, c }
    }

    /// `weight * (x - centre)^2`.
    pub fn weighted_square(weight: f64, centre: f64) -> Self {
        Self {
            a: weight,
            b: -2.0 * weight * centre,
            c: weight * centre * centre,
        }
    }

    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        (self.a * x + self.b) * x + self.c
    }

    #[inline]
    pub fn derivative(&self, x: f64) -> f64 {
        2.0 * self.a * x + self.b
    }

    /// Vertex and minimum value, when the quadratic is strictly convex.
    pub fn minimum(&self) -> Option<(f64, f64)> {
        if self.a > 0.0 {
            let x = -self.b / (2.0 * self.a);
            Some((x, self.c - self.b * self.b / (4.0 * self.a)))
        } else {
            None
        }
    }

    /// `theta -> min_u q(u) + omega (u - theta)^2` for a finite `omega > 0`.
    ///
    /// The result keeps the vertex and minimum value of `self` and lies below it.
    pub fn infimal_convolution(&self, omega: f64) -> Self {
        let denom = self.a + omega;
        Self {
            a: self.a * omega / denom,
            b: self.b * omega / denom,
            c: self.c - self.b * self.b / (4.0 * denom),
        }
    }

    /// Coefficient-wise comparison, relative to the coefficient magnitude.
    pub fn approx_eq(&self, other: &Quadratic, tol: f64) -> bool {
        let close = |x: f64, y: f64| (x - y).abs() <= tol * (1.0 + x.abs().max(y.abs()));
        close(self.a, other.a) && close(self.b, other.b) && close(self.c, other.c)
    }

    /// Value at `x`, extended to the limit when `x` is infinite.
    fn eval_extended(&self, x: f64) -> f64 {
        if x.is_finite() {
            return self.eval(x);
        }
        if self.a != 0.0 {
            self.a.signum() * f64::INFINITY
        } else if self.b != 0.0 {
            (self.b * x.signum()).signum() * f64::INFINITY
        } else {
            self.c
        }
    }
}

impl Add for Quadratic {
    type Output = Quadratic;
    fn add(self, rhs: Quadratic) -> Quadratic {
        Quadratic::new(self.a + rhs.a, self.b + rhs.b, self.c + rhs.c)
    }
}

impl Sub for Quadratic {
    type Output = Quadratic;
    fn sub(self, rhs: Quadratic) -> Quadratic {
        Quadratic::new(self.a - rhs.a, self.b - rhs.b, self.c - rhs.c)
    }
}

impl Neg for Quadratic {
    type Output = Quadratic;
    fn neg(self) -> Quadratic {
        Quadratic::new(-self.a, -self.b, -self.c)
    }
}

/// Real roots of `d`, ascending. Differences with `|a| <= COEF_TOL` are
/// treated as linear and constant differences have no roots.
fn real_roots(d: Quadratic) -> Vec<f64> {
    if d.a.abs() <= COEF_TOL {
        if d.b.abs() <= COEF_TOL {
            return Vec::new();
        }
        return vec![-d.c / d.b];
    }
    let disc = d.b * d.b - 4.0 * d.a * d.c;
    if disc < 0.0 {
        return Vec::new();
    }
    let sq = disc.sqrt();
    let q = -0.5 * (d.b + d.b.signum() * sq);
    if q == 0.0 {
        return vec![0.0];
    }
    let (r1, r2) = (q / d.a, d.c / q);
    if r1 <= r2 {
        vec![r1, r2]
    } else {
        vec![r2, r1]
    }
}

/// The point where `next` becomes strictly lower than `prev` when moving
/// right: `-inf` if `next` is lower everywhere, `+inf` if it never is.
fn entering_point(next: Quadratic, prev: Quadratic) -> f64 {
    let d = next - prev;
    if d.a.abs() <= COEF_TOL {
        if d.b.abs() <= COEF_TOL {
            return if d.c < 0.0 { f64::NEG_INFINITY } else { f64::INFINITY };
        }
        return if d.b < 0.0 { -d.c / d.b } else { f64::INFINITY };
    }
    let roots = real_roots(d);
    match (roots.len(), d.a > 0.0) {
        // convex difference: negative strictly between two distinct roots
        (2, true) if roots[0] < roots[1] => roots[0],
        (_, true) => f64::INFINITY,
        (2, false) if roots[0] < roots[1] => roots[1],
        (_, false) => f64::NEG_INFINITY,
    }
}

/// A point strictly inside `(l, r)`.
fn interior_point(l: f64, r: f64) -> f64 {
    match (l.is_finite(), r.is_finite()) {
        (true, true) => 0.5 * (l + r),
        (false, true) => r - 1.0 - r.abs(),
        (true, false) => l + 1.0 + l.abs(),
        (false, false) => 0.0,
    }
}

/// `true` when `x` lies strictly inside `(l, r)` by more than a rounding margin.
fn well_inside(x: f64, l: f64, r: f64) -> bool {
    let margin = |b: f64| if b.is_finite() { 1e-12 * (1.0 + b.abs()) } else { 0.0 };
    x.is_finite() && x > l + margin(l) && x < r - margin(r)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Piece {
    /// Inclusive left bound of the piece.
    pub left: f64,
    pub q: Quadratic,
}

/// Minimum of a function: the leftmost minimiser and the value there.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Minimum {
    pub argmin: f64,
    pub value: f64,
}

/// Finite interval used to pin down minimisers of flat pieces.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchBox {
    pub lo: f64,
    pub hi: f64,
}

impl SearchBox {
    pub fn new(lo: f64, hi: f64) -> Self {
        Self { lo, hi }
    }

    /// `[min(y) - r, max(y) + r]` with `r = 3 (range + 1)`.
    pub fn around(data: &[f64]) -> Self {
        let (lo, hi) = data
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
        if !lo.is_finite() {
            return Self::new(-1.0, 1.0);
        }
        Self::with_radius(data, 3.0 * (hi - lo + 1.0))
    }

    pub fn with_radius(data: &[f64], radius: f64) -> Self {
        let (lo, hi) = data
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
        Self::new(lo - radius, hi + radius)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseQuadratic {
    pieces: Vec<Piece>,
}

impl From<Quadratic> for PiecewiseQuadratic {
    fn from(q: Quadratic) -> Self {
        Self::from_quadratic(q)
    }
}

impl PiecewiseQuadratic {
    pub fn from_quadratic(q: Quadratic) -> Self {
        Self {
            pieces: vec![Piece {
                left: f64::NEG_INFINITY,
                q,
            }],
        }
    }

    pub fn constant(c: f64) -> Self {
        Self::from_quadratic(Quadratic::constant(c))
    }

    /// Builds a function from `(left bound, quadratic)` pairs. The first bound
    /// must be `-inf` and bounds must strictly increase.
    pub fn from_pieces(pieces: Vec<(f64, Quadratic)>) -> Result<Self> {
        if pieces.is_empty() {
            return Err(Error::structural("a piecewise quadratic needs at least one piece"));
        }
        if pieces[0].0 != f64::NEG_INFINITY {
            return Err(Error::structural("first piece must start at -inf"));
        }
        for w in pieces.windows(2) {
            if !(w[1].0 > w[0].0) || !w[1].0.is_finite() {
                return Err(Error::structural(format!(
                    "bounds must be finite and strictly increasing, got {} then {}",
                    w[0].0, w[1].0
                )));
            }
        }
        Ok(Self {
            pieces: pieces.into_iter().map(|(left, q)| Piece { left, q }).collect(),
        })
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    pub fn len(&self) -> usize {
        self.pieces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pieces.is_empty()
    }

    /// Exclusive right bound of piece `i`.
    pub fn right(&self, i: usize) -> f64 {
        self.pieces.get(i + 1).map_or(f64::INFINITY, |p| p.left)
    }

    /// Internal knots `d_2 < ... < d_s`.
    pub fn knots(&self) -> impl Iterator<Item = f64> + '_ {
        self.pieces.iter().skip(1).map(|p| p.left)
    }

    fn piece_index(&self, x: f64) -> usize {
        self.pieces.partition_point(|p| p.left <= x).saturating_sub(1)
    }

    /// Value of the active piece at `x`.
    pub fn evaluate(&self, x: f64) -> f64 {
        self.pieces[self.piece_index(x)].q.eval(x)
    }

    /// Pointwise sum with `q`; bounds are unchanged.
    pub fn add_quadratic(&self, q: Quadratic) -> Self {
        Self {
            pieces: self
                .pieces
                .iter()
                .map(|p| Piece {
                    left: p.left,
                    q: p.q + q,
                })
                .collect(),
        }
    }

    pub fn add_constant(&self, c: f64) -> Self {
        self.add_quadratic(Quadratic::constant(c))
    }

    /// Pointwise minimum of `self` and `other`. Ties go to `self`.
    pub fn min_of_two(&self, other: &PiecewiseQuadratic) -> Self {
        let mut out: Vec<Piece> = Vec::with_capacity(self.len() + other.len() + 2);
        let (mut i, mut j) = (0, 0);
        let mut left = f64::NEG_INFINITY;
        loop {
            let (rf, rg) = (self.right(i), other.right(j));
            let right = rf.min(rg);
            push_lower(&mut out, left, right, self.pieces[i].q, other.pieces[j].q);
            if right == f64::INFINITY {
                break;
            }
            if rf == right {
                i += 1;
            }
            if rg == right {
                j += 1;
            }
            left = right;
        }
        Self { pieces: out }.merged()
    }

    /// `theta -> min_u f(u) + omega (u - theta)^2`.
    ///
    /// `omega = inf` returns `self` unchanged and `omega = 0` returns the
    /// constant function equal to the global minimum.
    pub fn infimal_convolution(&self, omega: f64) -> Result<Self> {
        self.infimal_convolution_traced(omega).map(|(f, _)| f)
    }

    /// Same as [`Self::infimal_convolution`], also returning the indices of
    /// the input pieces whose transforms make up the output, in output order.
    pub fn infimal_convolution_traced(&self, omega: f64) -> Result<(Self, Vec<usize>)> {
        if omega.is_nan() || omega < 0.0 {
            return Err(Error::invalid_parameter(format!(
                "infimal convolution weight must be >= 0, got {omega}"
            )));
        }
        if omega == f64::INFINITY {
            return Ok((self.clone(), (0..self.len()).collect()));
        }
        if omega == 0.0 {
            let m = self.global_min()?;
            return Ok((Self::constant(m.value), vec![]));
        }

        let transformed: Vec<Quadratic> =
            self.pieces.iter().map(|p| p.q.infimal_convolution(omega)).collect();

        // stack of (input index, left bound)
        let mut stack: Vec<(usize, f64)> = Vec::with_capacity(self.len());
        stack.push((0, f64::NEG_INFINITY));
        for (i, &qi) in transformed.iter().enumerate().skip(1) {
            loop {
                let &(j, lb) = stack.last().expect("stack never empties");
                let mut mu = entering_point(qi, transformed[j]);
                if mu == f64::INFINITY && i + 1 == transformed.len() {
                    // the last piece owns the right tail; its crossing is past
                    // rounding resolution, so enter where its minimiser reaches its knot
                    let p = &self.pieces[i];
                    let knot = (2.0 * (p.q.a + omega) * p.left + p.q.b) / (2.0 * omega);
                    mu = if knot.is_finite() && knot > lb { knot } else { interior_point(lb, f64::INFINITY) };
                }
                if mu < lb {
                    stack.pop();
                    continue;
                }
                stack.push((i, mu));
                break;
            }
        }

        let mut pieces = Vec::with_capacity(stack.len());
        let mut survivors = Vec::with_capacity(stack.len());
        for (k, &(idx, lb)) in stack.iter().enumerate() {
            let next = stack.get(k + 1).map_or(f64::INFINITY, |e| e.1);
            if lb < next && lb < f64::INFINITY {
                pieces.push(Piece {
                    left: lb,
                    q: transformed[idx],
                });
                survivors.push(idx);
            }
        }
        if let Some(first) = pieces.first_mut() {
            first.left = f64::NEG_INFINITY;
        }
        Ok((Self { pieces }, survivors))
    }

    /// Global minimum with an unbounded minimiser left as `-inf`/`+inf`.
    ///
    /// Ties are broken towards the leftmost minimiser.
    pub fn global_min(&self) -> Result<Minimum> {
        let mut best: Option<Minimum> = None;
        for (i, p) in self.pieces.iter().enumerate() {
            let (l, r) = (p.left, self.right(i));
            let cand = piece_minimum(p.q, l, r).ok_or_else(|| {
                Error::structural(format!("piece {i} on [{l}, {r}) is unbounded below"))
            })?;
            if cand.value.is_nan() {
                return Err(Error::structural(format!("piece {i} evaluates to NaN")));
            }
            match best {
                Some(b) if cand.value >= b.value - 1e-12 * (1.0 + b.value.abs()) => {}
                _ => best = Some(cand),
            }
        }
        best.ok_or_else(|| Error::structural("empty piecewise quadratic"))
    }

    /// Leftmost global minimiser and minimum value. A minimiser that sits at
    /// an infinite bound (flat piece) is clamped into `search`.
    pub fn global_argmin(&self, search: SearchBox) -> Result<Minimum> {
        let mut m = self.global_min()?;
        if !m.argmin.is_finite() {
            m.argmin = m.argmin.clamp(search.lo, search.hi);
        }
        Ok(m)
    }

    /// Checks bound ordering, continuity at knots and that no knot has a left
    /// derivative strictly below its right derivative.
    pub fn check_invariants(&self) -> Result<()> {
        if self.pieces.is_empty() || self.pieces[0].left != f64::NEG_INFINITY {
            return Err(Error::structural("first piece must start at -inf"));
        }
        for w in self.pieces.windows(2) {
            let (l, r) = (w[0], w[1]);
            let d = r.left;
            if !(d > l.left) || !d.is_finite() {
                return Err(Error::structural(format!("bounds not increasing at {d}")));
            }
            let (vl, vr) = (l.q.eval(d), r.q.eval(d));
            let scale = 1.0
                + (l.q.a * d * d).abs().max((r.q.a * d * d).abs())
                + (l.q.b * d).abs().max((r.q.b * d).abs())
                + l.q.c.abs().max(r.q.c.abs());
            if (vl - vr).abs() > KNOT_TOL * scale {
                return Err(Error::structural(format!(
                    "discontinuity at knot {d}: {vl} vs {vr}"
                )));
            }
            let (sl, sr) = (l.q.derivative(d), r.q.derivative(d));
            let slope_scale = 1.0 + sl.abs().max(sr.abs());
            if sl < sr - KNOT_TOL * slope_scale {
                return Err(Error::structural(format!(
                    "convex kink at knot {d}: left slope {sl} < right slope {sr}"
                )));
            }
        }
        Ok(())
    }

    /// Clamps slightly negative curvatures, produced by rounding when a
    /// quadratic is subtracted, to zero. Curvatures below `-tol` are an error.
    pub fn clamp_curvature(mut self, tol: f64) -> Result<Self> {
        for p in &mut self.pieces {
            if p.q.a < 0.0 {
                if p.q.a < -tol {
                    return Err(Error::structural(format!(
                        "negative curvature {} after shift",
                        p.q.a
                    )));
                }
                p.q.a = 0.0;
            }
        }
        Ok(self)
    }

    /// Merges neighbours whose quadratics agree to within [`COEF_TOL`].
    fn merged(mut self) -> Self {
        self.pieces.dedup_by(|next, prev| prev.q.approx_eq(&next.q, COEF_TOL));
        self
    }
}

/// Minimum of `q` over `[l, r]`, `None` when unbounded below.
fn piece_minimum(q: Quadratic, l: f64, r: f64) -> Option<Minimum> {
    let (vl, vr) = (q.eval_extended(l), q.eval_extended(r));
    if vl == f64::NEG_INFINITY || vr == f64::NEG_INFINITY {
        return None;
    }
    if let Some((x, v)) = q.minimum() {
        if x > l && x < r {
            return Some(Minimum { argmin: x, value: v });
        }
    }
    if vr < vl {
        Some(Minimum { argmin: r, value: vr })
    } else {
        Some(Minimum { argmin: l, value: vl })
    }
}

/// Appends the lower of `f` and `g` on `[l, r)` to `out`, splitting at the
/// crossings strictly inside the interval.
fn push_lower(out: &mut Vec<Piece>, l: f64, r: f64, f: Quadratic, g: Quadratic) {
    let d = f - g;
    let mut cuts = vec![l];
    if d.a.abs() > COEF_TOL || d.b.abs() > COEF_TOL {
        for x in real_roots(d) {
            let last = *cuts.last().expect("non-empty");
            if well_inside(x, last, r) {
                cuts.push(x);
            }
        }
    }
    let tied = d.a.abs() <= COEF_TOL && d.b.abs() <= COEF_TOL && d.c.abs() <= COEF_TOL;
    for (k, &start) in cuts.iter().enumerate() {
        let end = cuts.get(k + 1).copied().unwrap_or(r);
        let q = if tied || d.eval(interior_point(start, end)) <= 0.0 {
            f
        } else {
            g
        };
        match out.last() {
            Some(p) if p.q == q => {}
            _ => out.push(Piece { left: start, q }),
        }
    }
}
