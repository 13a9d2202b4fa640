use alloc::vec::Vec;
use core::fmt;

/// A nonempty subinterval of `[0, 1]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub lo_open: bool,
    pub hi: f64,
    pub hi_open: bool,
}

impl Interval {
    pub fn closed(lo: f64, hi: f64) -> Self {
        Interval { lo, lo_open: false, hi, hi_open: false }
    }

    pub fn point(p: f64) -> Self {
        Interval::closed(p, p)
    }

    pub fn is_empty(&self) -> bool {
        !(self.lo < self.hi || (self.lo == self.hi && !self.lo_open && !self.hi_open))
    }

    pub fn contains(&self, p: f64) -> bool {
        let above = if self.lo_open { p > self.lo } else { p >= self.lo };
        let below = if self.hi_open { p < self.hi } else { p <= self.hi };
        above && below
    }

    pub fn is_point(&self) -> bool {
        self.lo == self.hi && !self.lo_open && !self.hi_open
    }
}

#[derive(Clone, Copy, Debug, PartialEq, thiserror::Error)]
pub enum IntervalError {
    #[error("interval endpoint {0} is outside [0, 1]")]
    OutOfRange(f64),
    #[error("interval lower bound {lo} exceeds upper bound {hi}")]
    Reversed { lo: f64, hi: f64 },
}

/// A finite union of subintervals of `[0, 1]` in canonical form: sorted,
/// pairwise disjoint, no two mergeable, no empty members.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct IntervalSet {
    intervals: Vec<Interval>,
}

impl IntervalSet {
    pub fn new<I: IntoIterator<Item = Interval>>(intervals: I) -> Result<Self, IntervalError> {
        let mut v = Vec::new();
        for iv in intervals {
            for x in [iv.lo, iv.hi] {
                if !(0.0..=1.0).contains(&x) {
                    return Err(IntervalError::OutOfRange(x));
                }
            }
            if iv.lo > iv.hi {
                return Err(IntervalError::Reversed { lo: iv.lo, hi: iv.hi });
            }
            v.push(Interval { lo: iv.lo + 0.0, hi: iv.hi + 0.0, ..iv });
        }
        Ok(Self::canonical(v))
    }

    pub fn empty() -> Self {
        IntervalSet { intervals: Vec::new() }
    }

    pub fn full() -> Self {
        IntervalSet { intervals: alloc::vec![Interval::closed(0.0, 1.0)] }
    }

    pub fn point(p: f64) -> Self {
        Self::new([Interval::point(p)]).expect("point must lie in [0, 1]")
    }

    pub fn closed(lo: f64, hi: f64) -> Self {
        Self::new([Interval::closed(lo, hi)]).expect("bounds must lie in [0, 1]")
    }

    fn canonical(mut v: Vec<Interval>) -> Self {
        v.retain(|iv| !iv.is_empty());
        v.sort_by(|a, b| a.lo.total_cmp(&b.lo).then(a.lo_open.cmp(&b.lo_open)));
        let mut out: Vec<Interval> = Vec::with_capacity(v.len());
        for iv in v {
            if let Some(last) = out.last_mut() {
                let touches = iv.lo < last.hi || (iv.lo == last.hi && !(last.hi_open && iv.lo_open));
                if touches {
                    if iv.hi > last.hi {
                        last.hi = iv.hi;
                        last.hi_open = iv.hi_open;
                    } else if iv.hi == last.hi {
                        last.hi_open = last.hi_open && iv.hi_open;
                    }
                    continue;
                }
            }
            out.push(iv);
        }
        IntervalSet { intervals: out }
    }

    pub fn intervals(&self) -> &[Interval] {
        &self.intervals
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    pub fn contains(&self, p: f64) -> bool {
        self.intervals.iter().any(|iv| iv.contains(p))
    }

    /// `[0, 1] \ I`.
    pub fn complement(&self) -> Self {
        let mut out = Vec::with_capacity(self.intervals.len() + 1);
        let (mut cur, mut cur_open) = (0.0, false);
        for iv in &self.intervals {
            out.push(Interval { lo: cur, lo_open: cur_open, hi: iv.lo, hi_open: !iv.lo_open });
            cur = iv.hi;
            cur_open = !iv.hi_open;
        }
        out.push(Interval { lo: cur, lo_open: cur_open, hi: 1.0, hi_open: false });
        Self::canonical(out)
    }

    /// `{1 − p | p ∈ I}`.
    pub fn reflect(&self) -> Self {
        let out = self
            .intervals
            .iter()
            .rev()
            .map(|iv| Interval { lo: (1.0 - iv.hi) + 0.0, lo_open: iv.hi_open, hi: (1.0 - iv.lo) + 0.0, hi_open: iv.lo_open })
            .collect();
        Self::canonical(out)
    }

    pub fn union(&self, other: &Self) -> Self {
        Self::canonical(self.intervals.iter().chain(&other.intervals).copied().collect())
    }
}

impl fmt::Display for IntervalSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.intervals.is_empty() {
            return f.write_str("{}");
        }
        for (i, iv) in self.intervals.iter().enumerate() {
            if i > 0 {
                f.write_str(" u ")?;
            }
            if iv.is_point() {
                write!(f, "{{{}}}", iv.lo)?;
            } else {
                write!(
                    f,
                    "{}{},{}{}",
                    if iv.lo_open { '(' } else { '[' },
                    iv.lo,
                    iv.hi,
                    if iv.hi_open { ')' } else { ']' }
                )?;
            }
        }
        Ok(())
    }
}
