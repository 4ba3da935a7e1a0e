use chrono::{Duration, NaiveDateTime, NaiveTime, Timelike};

use super::series::{PriceSeries, WeatherSeries, PRICE_STEP_S, WEATHER_STEP_S};
use crate::controllers::HOURS_PER_DAY;
use crate::error::{DataError, Error, Result};
use crate::model::ExogenousSample;

pub const STEPS_PER_HOUR: usize = (PRICE_STEP_S / WEATHER_STEP_S) as usize;
pub const STEPS_PER_DAY: usize = STEPS_PER_HOUR * HOURS_PER_DAY;
pub const STEPS_PER_WEEK: usize = 7 * STEPS_PER_DAY;
pub const DT_S: f64 = WEATHER_STEP_S as f64;

/// Weather and held prices merged onto the 15-minute grid.
#[derive(Debug, Clone, PartialEq)]
pub struct AlignedSeries {
    pub start: NaiveDateTime,
    pub samples: Vec<ExogenousSample>,
}

impl AlignedSeries {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn timestamp(&self, k: usize) -> NaiveDateTime {
        self.start + Duration::seconds(WEATHER_STEP_S * k as i64)
    }

    pub fn weeks(&self) -> usize {
        self.len() / STEPS_PER_WEEK
    }

    /// Minute of day of the first sample.
    pub fn start_minute(&self) -> u32 {
        self.start.num_seconds_from_midnight() / 60
    }

    /// Hourly prices of the day starting at step `k`, one per four steps.
    pub fn day_prices(&self, k: usize) -> Result<Vec<f64>> {
        if k + STEPS_PER_DAY > self.len() {
            return Err(Error::Data(DataError::TooShort {
                available: self.len(),
                required: k + STEPS_PER_DAY,
            }));
        }
        Ok((0..HOURS_PER_DAY)
            .map(|h| self.samples[k + h * STEPS_PER_HOUR].price_ct_kwh)
            .collect())
    }

    pub fn slice(&self, from: usize, len: usize) -> AlignedSeries {
        AlignedSeries {
            start: self.timestamp(from),
            samples: self.samples[from..from + len].to_vec(),
        }
    }

    /// Restricts to whole weeks starting at the first midnight.
    pub fn whole_weeks(&self) -> Result<AlignedSeries> {
        let offset = steps_to_midnight(self.start);
        let available = self.len().saturating_sub(offset);
        let weeks = available / STEPS_PER_WEEK;
        if weeks == 0 {
            return Err(Error::Data(DataError::TooShort {
                available,
                required: STEPS_PER_WEEK,
            }));
        }
        Ok(self.slice(offset, weeks * STEPS_PER_WEEK))
    }

    /// Splits back into the two input series. Requires hour-aligned bounds.
    pub fn split(&self) -> Result<(WeatherSeries, PriceSeries)> {
        if self.start.minute() != 0 || self.start.second() != 0 || !self.len().is_multiple_of(STEPS_PER_HOUR) {
            return Err(Error::contract("aligned series does not start and end on whole hours"));
        }
        let weather = WeatherSeries {
            start: self.start,
            ambient_c: self.samples.iter().map(|s| s.ambient_c).collect(),
            solar_wm2: self.samples.iter().map(|s| s.solar_wm2).collect(),
        };
        let prices = PriceSeries {
            start: self.start,
            price_ct_kwh: self
                .samples
                .iter()
                .step_by(STEPS_PER_HOUR)
                .map(|s| s.price_ct_kwh)
                .collect(),
        };
        Ok((weather, prices))
    }
}

fn steps_to_midnight(t: NaiveDateTime) -> usize {
    let secs = t.num_seconds_from_midnight() as i64;
    if secs == 0 {
        return 0;
    }
    ((86_400 - secs) / WEATHER_STEP_S) as usize
}

/// Merges the overlap of both series, holding each price over its hour.
pub fn align(weather: &WeatherSeries, prices: &PriceSeries) -> Result<AlignedSeries> {
    let start = weather.start.max(prices.start);
    let end = weather.end().min(prices.end());
    if end <= start {
        return Err(DataError::EmptyIntersection.into());
    }
    let first = ((start - weather.start).num_seconds() / WEATHER_STEP_S) as usize;
    let count = ((end - start).num_seconds() / WEATHER_STEP_S) as usize;
    let samples = (first..first + count)
        .map(|k| {
            let t = weather.timestamp(k);
            let hour_start = t
                .date()
                .and_time(NaiveTime::from_hms_opt(t.hour(), 0, 0).unwrap_or_default());
            let h = ((hour_start - prices.start).num_seconds() / PRICE_STEP_S) as usize;
            ExogenousSample::new(weather.ambient_c[k], weather.solar_wm2[k], prices.price_ct_kwh[h])
        })
        .collect();
    Ok(AlignedSeries { start, samples })
}
