//! Atomic time units and nanoseconds.

use std::ops::{Add, Sub};

/// Seconds per atomic unit of time (hbar / E_h), CODATA 2018.
pub const AU_TIME_SECONDS: f64 = 2.4188843265857e-17;

/// Nanoseconds per atomic unit of time.
pub const AU_TIME_NS: f64 = AU_TIME_SECONDS / 1e-9;

/// A time in atomic units.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default)]
pub struct TimeAu(pub f64);

/// A time in nanoseconds.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default)]
pub struct TimeNs(pub f64);

pub fn au_to_ns(t: TimeAu) -> TimeNs {
    TimeNs(t.0 * AU_TIME_NS)
}

pub fn ns_to_au(t: TimeNs) -> TimeAu {
    TimeAu(t.0 / AU_TIME_NS)
}

impl TimeAu {
    pub fn to_ns(self) -> TimeNs {
        au_to_ns(self)
    }
}

impl TimeNs {
    pub fn to_au(self) -> TimeAu {
        ns_to_au(self)
    }
}

impl Add for TimeAu {
    type Output = TimeAu;
    fn add(self, rhs: TimeAu) -> TimeAu {
        TimeAu(self.0 + rhs.0)
    }
}

impl Sub for TimeAu {
    type Output = TimeAu;
    fn sub(self, rhs: TimeAu) -> TimeAu {
        TimeAu(self.0 - rhs.0)
    }
}

impl Add for TimeNs {
    type Output = TimeNs;
    fn add(self, rhs: TimeNs) -> TimeNs {
        TimeNs(self.0 + rhs.0)
    }
}

impl Sub for TimeNs {
    type Output = TimeNs;
    fn sub(self, rhs: TimeNs) -> TimeNs {
        TimeNs(self.0 - rhs.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rel(a: f64, b: f64) -> f64 {
        if b == 0.0 {
            a.abs()
        } else {
            ((a - b) / b).abs()
        }
    }

    #[test]
    fn zero_maps_to_zero() {
        assert_eq!(au_to_ns(TimeAu(0.0)).0, 0.0);
        assert_eq!(ns_to_au(TimeNs(0.0)).0, 0.0);
    }

    #[test]
    fn one_atomic_unit() {
        assert!(rel(au_to_ns(TimeAu(1.0)).0, 2.4188843265857e-8) < 1e-15);
        assert!(rel(ns_to_au(TimeNs(2.4188843265857e-8)).0, 1.0) < 1e-15);
    }

    #[test]
    fn revival_anchor_conversion() {
        // 2.2235868e7 * 2.4188843265857e-8 = 0.537858...
        let ns = au_to_ns(TimeAu(2.2235868e7)).0;
        assert!((ns - 0.53786).abs() < 5e-6, "{ns}");
        let au = ns_to_au(TimeNs(0.538)).0;
        // 0.538 / 2.4188843265857e-8 = 2.22416e7
        assert!((au - 2.2242e7).abs() < 1e3, "{au}");
    }

    proptest! {
        #[test]
        fn round_trip(x in 1e-6f64..1e3) {
            let back = au_to_ns(ns_to_au(TimeNs(x))).0;
            prop_assert!(rel(back, x) < 1e-12);
        }

        #[test]
        fn additive(a in 0.0f64..1e10, b in 0.0f64..1e10) {
            let lhs = au_to_ns(TimeAu(a) + TimeAu(b)).0;
            let rhs = au_to_ns(TimeAu(a)).0 + au_to_ns(TimeAu(b)).0;
            prop_assert!(rel(lhs, rhs) < 1e-12 || (lhs - rhs).abs() < 1e-300);
        }
    }
}
