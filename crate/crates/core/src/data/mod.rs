//! Input series, synthetic data and result files.

mod align;
mod series;
mod synthetic;

pub use align::{align, AlignedSeries, DT_S, STEPS_PER_DAY, STEPS_PER_HOUR, STEPS_PER_WEEK};
pub(crate) use series::write_csv;
pub use series::{
    format_timestamp, load_prices, load_weather, parse_timestamp, write_prices, write_weather, PriceSeries,
    WeatherSeries, PRICE_HEADER, WEATHER_HEADER,
};
pub use synthetic::{generate_synthetic, synthetic_ambient, synthetic_price_profile, synthetic_solar, synthetic_start};

use std::path::Path;

use crate::error::Result;

/// Loads both files and merges them into whole weeks from the first midnight.
pub fn load_aligned(weather: impl AsRef<Path>, prices: impl AsRef<Path>) -> Result<AlignedSeries> {
    let w = load_weather(weather)?;
    let p = load_prices(prices)?;
    align(&w, &p)?.whole_weeks()
}

/// Writes an aligned series as the two input files.
pub fn export_aligned(series: &AlignedSeries, weather: impl AsRef<Path>, prices: impl AsRef<Path>) -> Result<()> {
    let (w, p) = series.split()?;
    write_weather(weather, &w)?;
    write_prices(prices, &p)
}
