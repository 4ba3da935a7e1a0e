use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use chrono::{Duration, NaiveDateTime, Timelike};

use crate::error::{DataError, Error, Result};

pub const WEATHER_HEADER: [&str; 3] = ["timestamp", "t_ambient_c", "solar_wm2"];
pub const PRICE_HEADER: [&str; 2] = ["timestamp", "price_ct_kwh"];
pub const WEATHER_STEP_S: i64 = 900;
pub const PRICE_STEP_S: i64 = 3600;

const TIMESTAMP_FORMATS: [&str; 4] = [
    "%Y-%m-%dT%H:%M:%S",
    "%Y-%m-%dT%H:%M",
    "%Y-%m-%d %H:%M:%S",
    "%Y-%m-%d %H:%M",
];
const TIMESTAMP_OUT: &str = "%Y-%m-%dT%H:%M:%S";

pub fn parse_timestamp(s: &str) -> Option<NaiveDateTime> {
    let s = s.trim();
    TIMESTAMP_FORMATS
        .iter()
        .find_map(|f| NaiveDateTime::parse_from_str(s, f).ok())
}

pub fn format_timestamp(t: NaiveDateTime) -> String {
    t.format(TIMESTAMP_OUT).to_string()
}

/// Ambient temperature and solar radiation on the 15-minute grid.
#[derive(Debug, Clone, PartialEq)]
pub struct WeatherSeries {
    pub start: NaiveDateTime,
    pub ambient_c: Vec<f64>,
    pub solar_wm2: Vec<f64>,
}

/// Hourly electricity prices.
#[derive(Debug, Clone, PartialEq)]
pub struct PriceSeries {
    pub start: NaiveDateTime,
    pub price_ct_kwh: Vec<f64>,
}

impl WeatherSeries {
    pub fn len(&self) -> usize {
        self.ambient_c.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ambient_c.is_empty()
    }

    pub fn end(&self) -> NaiveDateTime {
        self.start + Duration::seconds(WEATHER_STEP_S * self.len() as i64)
    }

    pub fn timestamp(&self, k: usize) -> NaiveDateTime {
        self.start + Duration::seconds(WEATHER_STEP_S * k as i64)
    }
}

impl PriceSeries {
    pub fn len(&self) -> usize {
        self.price_ct_kwh.len()
    }

    pub fn is_empty(&self) -> bool {
        self.price_ct_kwh.is_empty()
    }

    pub fn end(&self) -> NaiveDateTime {
        self.start + Duration::seconds(PRICE_STEP_S * self.len() as i64)
    }

    pub fn timestamp(&self, h: usize) -> NaiveDateTime {
        self.start + Duration::seconds(PRICE_STEP_S * h as i64)
    }
}

struct Rows {
    start: NaiveDateTime,
    values: Vec<Vec<f64>>,
}

fn read_rows(path: &Path, header: &[&str], step_s: i64) -> Result<Rows> {
    let p = || path.to_path_buf();
    let file = File::open(path).map_err(|source| DataError::Io { path: p(), source })?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(file);
    let found = reader.headers().map_err(|e| malformed(path, 1, e.to_string()))?.clone();
    if found.iter().collect::<Vec<_>>() != header {
        return Err(DataError::Header {
            path: p(),
            expected: header.join(","),
            found: found.iter().collect::<Vec<_>>().join(","),
        }
        .into());
    }

    let mut start = None;
    let mut prev: Option<NaiveDateTime> = None;
    let mut values: Vec<Vec<f64>> = vec![Vec::new(); header.len() - 1];
    let mut missing = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let line = i as u64 + 2;
        let record = record.map_err(|e| malformed(path, line, e.to_string()))?;
        if record.len() != header.len() {
            return Err(malformed(
                path,
                line,
                format!("expected {} fields, got {}", header.len(), record.len()),
            )
            .into());
        }
        let t = parse_timestamp(&record[0])
            .ok_or_else(|| malformed(path, line, format!("unparseable timestamp `{}`", &record[0])))?;
        if let Some(prev) = prev {
            if t == prev {
                return Err(DataError::Duplicate {
                    path: p(),
                    line,
                    timestamp: t,
                }
                .into());
            }
            if t < prev {
                return Err(DataError::OutOfOrder {
                    path: p(),
                    line,
                    timestamp: t,
                }
                .into());
            }
            let delta = (t - prev).num_seconds();
            if delta % step_s != 0 {
                return Err(malformed(path, line, format!("timestamp {t} is off the {step_s} s grid")).into());
            }
            let mut m = prev + Duration::seconds(step_s);
            while m < t {
                missing.push(m);
                m += Duration::seconds(step_s);
            }
        } else {
            if (t.num_seconds_from_midnight() as i64) % step_s != 0 {
                return Err(malformed(path, line, format!("first timestamp {t} is off the {step_s} s grid")).into());
            }
            start = Some(t);
        }
        prev = Some(t);
        for (c, col) in values.iter_mut().enumerate() {
            let raw = &record[c + 1];
            let v: f64 = raw
                .parse()
                .map_err(|_| malformed(path, line, format!("column `{}`: cannot parse `{raw}`", header[c + 1])))?;
            if !v.is_finite() {
                return Err(malformed(path, line, format!("column `{}` is not finite", header[c + 1])).into());
            }
            col.push(v);
        }
    }
    if !missing.is_empty() {
        return Err(DataError::Gap { path: p(), missing }.into());
    }
    let start = start.ok_or_else(|| DataError::Empty { path: p() })?;
    Ok(Rows { start, values })
}

fn malformed(path: &Path, line: u64, reason: impl Into<String>) -> DataError {
    DataError::MalformedRow {
        path: path.to_path_buf(),
        line,
        reason: reason.into(),
    }
}

pub fn load_weather(path: impl AsRef<Path>) -> Result<WeatherSeries> {
    let path = path.as_ref();
    let mut rows = read_rows(path, &WEATHER_HEADER, WEATHER_STEP_S)?;
    let solar_wm2 = rows.values.pop().unwrap_or_default();
    let ambient_c = rows.values.pop().unwrap_or_default();
    if let Some(i) = solar_wm2.iter().position(|&q| q < 0.0) {
        return Err(malformed(path, i as u64 + 2, "solar radiation must be non-negative").into());
    }
    Ok(WeatherSeries {
        start: rows.start,
        ambient_c,
        solar_wm2,
    })
}

pub fn load_prices(path: impl AsRef<Path>) -> Result<PriceSeries> {
    let path = path.as_ref();
    let mut rows = read_rows(path, &PRICE_HEADER, PRICE_STEP_S)?;
    Ok(PriceSeries {
        start: rows.start,
        price_ct_kwh: rows.values.pop().unwrap_or_default(),
    })
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    File::create(path).map(BufWriter::new).map_err(|e| Error::io(path, e))
}

pub(crate) fn write_csv<F>(path: &Path, header: &[&str], rows: usize, mut row: F) -> Result<()>
where
    F: FnMut(usize, &mut Vec<String>),
{
    let io = |e: std::io::Error| Error::io(PathBuf::from(path), e);
    let mut w = csv::Writer::from_writer(create(path)?);
    w.write_record(header).map_err(|e| io(e.into()))?;
    let mut buf = Vec::with_capacity(header.len());
    for i in 0..rows {
        buf.clear();
        row(i, &mut buf);
        w.write_record(&buf).map_err(|e| io(e.into()))?;
    }
    w.into_inner().map_err(|e| io(e.into_error()))?.flush().map_err(io)
}

pub fn write_weather(path: impl AsRef<Path>, w: &WeatherSeries) -> Result<()> {
    write_csv(path.as_ref(), &WEATHER_HEADER, w.len(), |k, r| {
        r.push(format_timestamp(w.timestamp(k)));
        r.push(w.ambient_c[k].to_string());
        r.push(w.solar_wm2[k].to_string());
    })
}

pub fn write_prices(path: impl AsRef<Path>, p: &PriceSeries) -> Result<()> {
    write_csv(path.as_ref(), &PRICE_HEADER, p.len(), |h, r| {
        r.push(format_timestamp(p.timestamp(h)));
        r.push(p.price_ct_kwh[h].to_string());
    })
}
