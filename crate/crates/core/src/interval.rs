//! Extended-real intervals with outward rounding.
//!
//! Endpoints computed in floating point are widened outward by two ULP unless
//! the operation is provably exact, so every interval is a true enclosure of
//! the mathematical result. The empty interval is canonicalized as
//! (+inf, -inf).

use std::f64::consts::PI;

pub const WIDEN_ULPS: u32 = 2;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

fn step_down(x: f64, ulps: u32) -> f64 {
    if x.is_infinite() || x.is_nan() {
        return x;
    }
    let mut v = x;
    for _ in 0..ulps {
        v = v.next_down();
    }
    v
}

fn step_up(x: f64, ulps: u32) -> f64 {
    if x.is_infinite() || x.is_nan() {
        return x;
    }
    let mut v = x;
    for _ in 0..ulps {
        v = v.next_up();
    }
    v
}

/// True iff s is exactly a + b (both finite), via the 2Sum error term.
fn add_is_exact(a: f64, b: f64, s: f64) -> bool {
    if !s.is_finite() {
        return false;
    }
    let a1 = s - b;
    let b1 = s - a1;
    (a - a1) + (b - b1) == 0.0
}

/// Lower bound of a + b on extended reals.
fn add_lo(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY || b == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    if a == f64::INFINITY || b == f64::INFINITY {
        return f64::INFINITY;
    }
    let s = a + b;
    if s == f64::INFINITY {
        return f64::MAX;
    }
    if add_is_exact(a, b, s) {
        s
    } else {
        step_down(s, WIDEN_ULPS)
    }
}

/// Upper bound of a + b on extended reals.
fn add_hi(a: f64, b: f64) -> f64 {
    if a == f64::INFINITY || b == f64::INFINITY {
        return f64::INFINITY;
    }
    if a == f64::NEG_INFINITY || b == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    let s = a + b;
    if s == f64::NEG_INFINITY {
        return f64::MIN;
    }
    if add_is_exact(a, b, s) {
        s
    } else {
        step_up(s, WIDEN_ULPS)
    }
}

/// a * b with the convention 0 * inf = 0, plus an exactness flag.
fn mul_checked(a: f64, b: f64) -> (f64, bool) {
    if a == 0.0 || b == 0.0 {
        return (0.0, true);
    }
    let p = a * b;
    if p.is_infinite() {
        return (p, false);
    }
    let err = a.mul_add(b, -p);
    let exact = err == 0.0 && (p == 0.0 || p.abs() >= f64::MIN_POSITIVE);
    (p, exact)
}

fn mul_lo(a: f64, b: f64) -> f64 {
    let (p, exact) = mul_checked(a, b);
    if p == f64::INFINITY {
        return f64::MAX;
    }
    if exact {
        p
    } else {
        step_down(p, WIDEN_ULPS)
    }
}

fn mul_hi(a: f64, b: f64) -> f64 {
    let (p, exact) = mul_checked(a, b);
    if p == f64::NEG_INFINITY {
        return f64::MIN;
    }
    if exact {
        p
    } else {
        step_up(p, WIDEN_ULPS)
    }
}

impl Interval {
    pub const BOTTOM: Interval = Interval { lo: f64::INFINITY, hi: f64::NEG_INFINITY };
    pub const ZERO: Interval = Interval { lo: 0.0, hi: 0.0 };

    pub fn new(lo: f64, hi: f64) -> Interval {
        Interval { lo, hi }
    }

    pub fn point(v: f64) -> Interval {
        Interval { lo: v, hi: v }
    }

    /// Point value widened outward to absorb rounding of its computation.
    pub fn point_widened(v: f64, ulps: u32) -> Interval {
        Interval { lo: step_down(v, ulps), hi: step_up(v, ulps) }
    }

    pub fn is_empty(&self) -> bool {
        // NaN endpoints count as empty
        self.lo.is_nan() || self.hi.is_nan() || self.lo > self.hi
    }

    pub fn contains(&self, v: f64) -> bool {
        self.lo <= v && v <= self.hi
    }

    pub fn encloses(&self, other: &Interval) -> bool {
        other.is_empty() || (self.lo <= other.lo && other.hi <= self.hi)
    }

    pub fn width(&self) -> f64 {
        if self.is_empty() {
            0.0
        } else {
            self.hi - self.lo
        }
    }

    pub fn add(&self, other: &Interval) -> Interval {
        if self.is_empty() || other.is_empty() {
            return Interval::BOTTOM;
        }
        Interval { lo: add_lo(self.lo, other.lo), hi: add_hi(self.hi, other.hi) }
    }

    pub fn neg(&self) -> Interval {
        if self.is_empty() {
            return Interval::BOTTOM;
        }
        Interval { lo: -self.hi, hi: -self.lo }
    }

    pub fn mul(&self, other: &Interval) -> Interval {
        if self.is_empty() || other.is_empty() {
            return Interval::BOTTOM;
        }
        let pairs = [
            (self.lo, other.lo),
            (self.lo, other.hi),
            (self.hi, other.lo),
            (self.hi, other.hi),
        ];
        let lo = pairs.iter().map(|&(a, b)| mul_lo(a, b)).fold(f64::INFINITY, f64::min);
        let hi = pairs.iter().map(|&(a, b)| mul_hi(a, b)).fold(f64::NEG_INFINITY, f64::max);
        Interval { lo, hi }
    }

    pub fn exp(&self) -> Interval {
        if self.is_empty() {
            return Interval::BOTTOM;
        }
        let exp_point = |x: f64, up: bool| -> f64 {
            if x == f64::NEG_INFINITY {
                0.0
            } else if x == f64::INFINITY {
                f64::INFINITY
            } else if x == 0.0 {
                1.0
            } else {
                let e = x.exp();
                if up {
                    if e == f64::INFINITY {
                        f64::INFINITY
                    } else {
                        step_up(e, WIDEN_ULPS)
                    }
                } else {
                    step_down(e, WIDEN_ULPS).max(0.0)
                }
            }
        };
        Interval { lo: exp_point(self.lo, false), hi: exp_point(self.hi, true) }
    }

    pub fn cos(&self) -> Interval {
        if self.is_empty() {
            return Interval::BOTTOM;
        }
        if !self.lo.is_finite() || !self.hi.is_finite() || self.hi - self.lo >= 2.0 * PI {
            return Interval { lo: -1.0, hi: 1.0 };
        }
        let cos_point = |x: f64| -> (f64, f64) {
            if x == 0.0 {
                (1.0, 1.0)
            } else {
                let c = x.cos();
                (step_down(c, WIDEN_ULPS).max(-1.0), step_up(c, WIDEN_ULPS).min(1.0))
            }
        };
        let (a_lo, a_hi) = cos_point(self.lo);
        let (b_lo, b_hi) = cos_point(self.hi);
        let mut lo = a_lo.min(b_lo);
        let mut hi = a_hi.max(b_hi);
        // extrema of cos occur at integer multiples of pi; include any that may
        // fall inside the argument range (generous slack keeps this sound)
        let k_start = (self.lo / PI).floor() as i64 - 1;
        for k in k_start..=k_start + 4 {
            let x = k as f64 * PI;
            let slack = 4.0 * f64::EPSILON * (1.0 + x.abs());
            if x >= self.lo - slack && x <= self.hi + slack {
                if k.rem_euclid(2) == 0 {
                    hi = 1.0;
                } else {
                    lo = -1.0;
                }
            }
        }
        Interval { lo, hi }
    }

    pub fn join(&self, other: &Interval) -> Interval {
        if self.is_empty() {
            return *other;
        }
        if other.is_empty() {
            return *self;
        }
        Interval { lo: self.lo.min(other.lo), hi: self.hi.max(other.hi) }
    }
}

impl std::fmt::Display for Interval {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.is_empty() {
            write!(f, "(empty)")
        } else {
            write!(f, "[{:.6e}, {:.6e}]", self.lo, self.hi)
        }
    }
}
