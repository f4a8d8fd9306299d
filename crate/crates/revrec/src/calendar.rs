//! Minimal proleptic-Gregorian month arithmetic over epoch seconds (UTC).
//!
//! Only what the sliding-window splitter needs: mapping a timestamp to its
//! calendar month, month-start timestamps, and month offsets. The day/civil
//! conversions use the standard era-based algorithm.

pub const SECS_PER_DAY: i64 = 86_400;

/// A calendar month in UTC.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Month {
    pub year: i32,
    /// 1-based month number.
    pub month: u8,
}

impl Month {
    pub fn new(year: i32, month: u8) -> Self {
        assert!((1..=12).contains(&month), "month out of range: {month}");
        Month { year, month }
    }

    /// The month containing the given epoch-second timestamp.
    pub fn containing(ts: i64) -> Self {
        let days = ts.div_euclid(SECS_PER_DAY);
        let (year, month, _) = civil_from_days(days);
        Month::new(year, month)
    }

    /// Epoch seconds at 00:00:00 UTC on the first day of this month.
    pub fn start_epoch(self) -> i64 {
        days_from_civil(self.year, self.month, 1) * SECS_PER_DAY
    }

    /// This month shifted forward by `n` months (backward for negative `n`).
    pub fn plus(self, n: i32) -> Self {
        let zero_based = self.year as i64 * 12 + (self.month as i64 - 1) + n as i64;
        Month::new(
            zero_based.div_euclid(12) as i32,
            (zero_based.rem_euclid(12) + 1) as u8,
        )
    }
}

impl std::fmt::Display for Month {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{:04}-{:02}", self.year, self.month)
    }
}

/// Days since 1970-01-01 for a civil date.
fn days_from_civil(y: i32, m: u8, d: u8) -> i64 {
    let y = y as i64 - i64::from(m <= 2);
    let era = y.div_euclid(400);
    let yoe = y - era * 400;
    let mp = (m as i64 + 9) % 12;
    let doy = (153 * mp + 2) / 5 + d as i64 - 1;
    let doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    era * 146_097 + doe - 719_468
}

/// Civil date (year, month, day) for days since 1970-01-01.
fn civil_from_days(days: i64) -> (i32, u8, u8) {
    let z = days + 719_468;
    let era = z.div_euclid(146_097);
    let doe = z - era * 146_097;
    let yoe = (doe - doe / 1460 + doe / 36_524 - doe / 146_096) / 365;
    let y = yoe + era * 400;
    let doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    let mp = (5 * doy + 2) / 153;
    let d = (doy - (153 * mp + 2) / 5 + 1) as u8;
    let m = if mp < 10 { mp + 3 } else { mp - 9 } as u8;
    ((y + i64::from(m <= 2)) as i32, m, d)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn epoch_zero_is_january_1970() {
        assert_eq!(Month::containing(0), Month::new(1970, 1));
        assert_eq!(Month::new(1970, 1).start_epoch(), 0);
    }

    #[test]
    fn known_month_starts() {
        // 2018-06-01T00:00:00Z
        assert_eq!(Month::new(2018, 6).start_epoch(), 1_527_811_200);
        // 2021-11-01T00:00:00Z
        assert_eq!(Month::new(2021, 11).start_epoch(), 1_635_724_800);
    }

    #[test]
    fn containing_respects_month_boundaries() {
        let june = Month::new(2018, 6).start_epoch();
        assert_eq!(Month::containing(june), Month::new(2018, 6));
        assert_eq!(Month::containing(june - 1), Month::new(2018, 5));
        assert_eq!(
            Month::containing(june + 29 * SECS_PER_DAY),
            Month::new(2018, 6)
        );
    }

    #[test]
    fn leap_february_has_29_days() {
        let feb = Month::new(2020, 2).start_epoch();
        let mar = Month::new(2020, 3).start_epoch();
        assert_eq!((mar - feb) / SECS_PER_DAY, 29);
    }

    #[test]
    fn plus_wraps_across_years() {
        assert_eq!(Month::new(2018, 6).plus(12), Month::new(2019, 6));
        assert_eq!(Month::new(2018, 12).plus(1), Month::new(2019, 1));
        assert_eq!(Month::new(2018, 1).plus(-1), Month::new(2017, 12));
        assert_eq!(Month::new(2018, 6).plus(30), Month::new(2020, 12));
    }

    #[test]
    fn round_trip_over_a_long_span() {
        let mut m = Month::new(1999, 1);
        for _ in 0..600 {
            assert_eq!(Month::containing(m.start_epoch()), m);
            m = m.plus(1);
        }
    }

    #[test]
    fn pre_epoch_timestamps() {
        assert_eq!(Month::containing(-1), Month::new(1969, 12));
        // 1969-12-01T00:00:00Z
        assert_eq!(Month::new(1969, 12).start_epoch(), -2_678_400);
        assert_eq!(Month::containing(-2_678_400), Month::new(1969, 12));
        assert_eq!(Month::containing(-2_678_401), Month::new(1969, 11));
    }
}
