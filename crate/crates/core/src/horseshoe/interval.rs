//! Closed intervals with outward rounding by one ulp per operation.

use std::ops::{Add, Mul, Neg, Sub};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

fn down(v: f64) -> f64 {
    v.next_down()
}

fn up(v: f64) -> f64 {
    v.next_up()
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        debug_assert!(lo <= hi, "interval [{lo}, {hi}] is reversed");
        Interval { lo, hi }
    }

    pub fn point(v: f64) -> Self {
        Interval { lo: v, hi: v }
    }

    pub fn hull(&self, other: &Interval) -> Interval {
        Interval::new(self.lo.min(other.lo), self.hi.max(other.hi))
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, v: f64) -> bool {
        self.lo <= v && v <= self.hi
    }

    pub fn contains_interval(&self, other: &Interval) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }

    /// Upper bound of `|x|` over the interval.
    pub fn mag(&self) -> f64 {
        self.lo.abs().max(self.hi.abs())
    }

    pub fn is_positive(&self) -> bool {
        self.lo > 0.0
    }

    /// `1/x` for an interval bounded away from zero.
    pub fn recip(&self) -> Option<Interval> {
        if self.lo > 0.0 || self.hi < 0.0 {
            Some(Interval::new(down(1.0 / self.hi), up(1.0 / self.lo)))
        } else {
            None
        }
    }

    pub fn div(&self, other: &Interval) -> Option<Interval> {
        other.recip().map(|r| *self * r)
    }

    /// Square root of the nonnegative part.
    pub fn sqrt(&self) -> Option<Interval> {
        if self.hi < 0.0 {
            return None;
        }
        Some(Interval::new(down(self.lo.max(0.0).sqrt()).max(0.0), up(self.hi.sqrt())))
    }

    pub fn powi(&self, k: u32) -> Interval {
        let mut acc = Interval::point(1.0);
        for _ in 0..k {
            acc = acc * *self;
        }
        acc
    }
}

impl Add for Interval {
    type Output = Interval;
    fn add(self, o: Interval) -> Interval {
        Interval::new(down(self.lo + o.lo), up(self.hi + o.hi))
    }
}

impl Sub for Interval {
    type Output = Interval;
    fn sub(self, o: Interval) -> Interval {
        Interval::new(down(self.lo - o.hi), up(self.hi - o.lo))
    }
}

impl Neg for Interval {
    type Output = Interval;
    fn neg(self) -> Interval {
        Interval::new(-self.hi, -self.lo)
    }
}

impl Mul for Interval {
    type Output = Interval;
    fn mul(self, o: Interval) -> Interval {
        let c = [self.lo * o.lo, self.lo * o.hi, self.hi * o.lo, self.hi * o.hi];
        let lo = c.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = c.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Interval::new(down(lo), up(hi))
    }
}

impl Mul<f64> for Interval {
    type Output = Interval;
    fn mul(self, c: f64) -> Interval {
        self * Interval::point(c)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn encloses_rounded_sum() {
        let s = Interval::point(0.1) + Interval::point(0.2);
        assert!(s.contains(0.1 + 0.2));
        assert!(s.lo < s.hi);
        assert!(s.width() <= 2.0 * f64::EPSILON);
    }

    #[test]
    fn product_takes_extreme_corners() {
        let p = Interval::new(-2.0, 3.0) * Interval::new(-1.0, 4.0);
        assert!(p.lo <= -8.0 && p.hi >= 12.0);
        assert!(p.width() < 20.0 + 1e-12);
    }

    #[test]
    fn recip_rejects_zero() {
        assert!(Interval::new(-1.0, 1.0).recip().is_none());
        let r = Interval::new(2.0, 4.0).recip().unwrap();
        assert!(r.contains(0.25) && r.contains(0.5));
    }

    #[test]
    fn sqrt_and_powers() {
        let r = Interval::new(4.0, 9.0).sqrt().unwrap();
        assert!(r.contains(2.0) && r.contains(3.0));
        let p = Interval::point(2.0).powi(10);
        assert!(p.contains(1024.0));
        assert!(p.width() < 1e-9);
    }
}
