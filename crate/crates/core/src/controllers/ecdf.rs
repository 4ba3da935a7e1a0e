use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const HOURS_PER_DAY: usize = 24;

/// Empirical distribution of one day's hourly prices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PriceEcdf {
    sorted: Vec<f64>,
}

impl PriceEcdf {
    /// Share of the day's prices at or below `price`.
    pub fn evaluate(&self, price: f64) -> f64 {
        let count = self.sorted.partition_point(|&q| q <= price);
        count as f64 / self.sorted.len() as f64
    }

    pub fn day_prices(&self) -> &[f64] {
        &self.sorted
    }
}

/// Builds the distribution from exactly 24 hourly prices.
pub fn ecdf_build(hourly_prices: &[f64]) -> Result<PriceEcdf> {
    if hourly_prices.len() != HOURS_PER_DAY {
        return Err(Error::config(format!(
            "price distribution needs {HOURS_PER_DAY} hourly prices, got {}",
            hourly_prices.len()
        )));
    }
    if let Some(p) = hourly_prices.iter().find(|p| !p.is_finite()) {
        return Err(Error::config(format!("non-finite price {p}")));
    }
    let mut sorted = hourly_prices.to_vec();
    sorted.sort_by(f64::total_cmp);
    Ok(PriceEcdf { sorted })
}

/// High when the current price is cheap relative to the day.
pub fn price_factor(ecdf: &PriceEcdf, price: f64) -> f64 {
    1.0 - ecdf.evaluate(price)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_day() {
        let e = ecdf_build(&[7.5; 24]).unwrap();
        assert_eq!(e.evaluate(7.5), 1.0);
        assert_eq!(e.evaluate(7.4), 0.0);
        assert_eq!(price_factor(&e, 7.5), 0.0);
    }

    #[test]
    fn distinct_prices() {
        let prices: Vec<f64> = (0..24).map(|h| 30.0 - h as f64 * 0.5).collect();
        let e = ecdf_build(&prices).unwrap();
        assert_eq!(e.evaluate(18.5), 1.0 / 24.0);
        assert_eq!(price_factor(&e, 18.5), 23.0 / 24.0);
        assert_eq!(price_factor(&e, 30.0), 0.0);
        assert_eq!(e.evaluate(100.0), 1.0);
        assert_eq!(e.evaluate(-100.0), 0.0);
    }

    #[test]
    fn four_blocks() {
        let prices: Vec<f64> = [10.0, 20.0, 30.0, 40.0]
            .iter()
            .flat_map(|&p| std::iter::repeat_n(p, 6))
            .collect();
        let e = ecdf_build(&prices).unwrap();
        assert_eq!(e.evaluate(20.0), 0.5);
        assert_eq!(price_factor(&e, 20.0), 0.5);
    }

    #[test]
    fn wrong_length() {
        assert!(ecdf_build(&[1.0; 23]).is_err());
        assert!(ecdf_build(&[1.0; 96]).is_err());
        let mut p = [1.0; 24];
        p[3] = f64::NAN;
        assert!(ecdf_build(&p).is_err());
    }
}
