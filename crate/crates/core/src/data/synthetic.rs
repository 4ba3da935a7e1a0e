use std::f64::consts::PI;

use chrono::{NaiveDate, NaiveDateTime};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::align::{AlignedSeries, STEPS_PER_DAY, STEPS_PER_HOUR, STEPS_PER_WEEK};
use crate::error::{Error, Result};
use crate::model::ExogenousSample;

pub const MEAN_AMBIENT_C: f64 = 2.0;
pub const DAILY_AMPLITUDE_K: f64 = 5.0;
pub const DRIFT_AMPLITUDE_K: f64 = 2.0;
pub const PEAK_SOLAR_WM2: f64 = 300.0;
pub const PRICE_NOISE: f64 = 0.2;

pub fn synthetic_start() -> NaiveDateTime {
    NaiveDate::from_ymd_opt(2024, 1, 1)
        .and_then(|d| d.and_hms_opt(0, 0, 0))
        .unwrap_or_default()
}

/// Ambient temperature at `hours` since the start: daily swing peaking at
/// 15:00 plus a drift with a one-week period.
pub fn synthetic_ambient(hours: f64) -> f64 {
    let daily = DAILY_AMPLITUDE_K * (2.0 * PI * (hours - 9.0) / 24.0).sin();
    let drift = DRIFT_AMPLITUDE_K * (2.0 * PI * hours / (7.0 * 24.0)).sin();
    MEAN_AMBIENT_C + daily + drift
}

/// Half-sine daylight from 08:00 to 16:00.
pub fn synthetic_solar(hour_of_day: f64) -> f64 {
    if (8.0..=16.0).contains(&hour_of_day) {
        (PEAK_SOLAR_WM2 * (PI * (hour_of_day - 8.0) / 8.0).sin()).max(0.0)
    } else {
        0.0
    }
}

/// Noise-free price shape: night trough, morning and evening peaks.
pub fn synthetic_price_profile(hour: usize) -> f64 {
    let h = hour as f64 + 0.5;
    let bump = |c: f64, w: f64| (-((h - c) / w).powi(2)).exp();
    15.0 + 20.0 * bump(8.0, 1.8) + 20.0 * bump(18.5, 2.0) + 6.0 * bump(13.0, 2.5)
}

pub fn generate_synthetic(weeks: usize, seed: u64) -> Result<AlignedSeries> {
    if weeks == 0 {
        return Err(Error::config("synthetic data needs at least one week"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let steps = weeks * STEPS_PER_WEEK;
    let mut samples = Vec::with_capacity(steps);
    let mut price = 0.0;
    for k in 0..steps {
        if k % STEPS_PER_HOUR == 0 {
            let hour = (k % STEPS_PER_DAY) / STEPS_PER_HOUR;
            let noise = rng.random_range(-PRICE_NOISE..=PRICE_NOISE);
            price = synthetic_price_profile(hour) * (1.0 + noise);
        }
        let hours = k as f64 / STEPS_PER_HOUR as f64;
        let hour_of_day = (k % STEPS_PER_DAY) as f64 / STEPS_PER_HOUR as f64;
        samples.push(ExogenousSample::new(
            synthetic_ambient(hours),
            synthetic_solar(hour_of_day),
            price,
        ));
    }
    Ok(AlignedSeries {
        start: synthetic_start(),
        samples,
    })
}
