//! Template-home power data and conversion to hourly energy.
//!
//! Template files hold one power reading (kW) per minute. Hourly series hold
//! energy (kWh) per hour, indexed from hour 0; hour-of-day is `index % 24`.

mod synthetic;

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use synthetic::{synthetic_hourly_templates, synthetic_templates, SyntheticProfile};

/// Longest run of missing minutes that is filled by linear interpolation.
pub const MAX_FILLABLE_GAP: u64 = 5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub minute: u64,
    pub kw: f64,
}

/// Minute-resolution power readings of one home.
#[derive(Debug, Clone, PartialEq)]
pub struct TemplateHome {
    pub id: String,
    samples: Vec<Sample>,
}

impl TemplateHome {
    /// Builds a template from gap-free or already-filled samples.
    pub fn new(id: impl Into<String>, samples: Vec<Sample>) -> Result<Self> {
        for (i, s) in samples.iter().enumerate() {
            check_reading(s.kw).map_err(|e| match e {
                Error::InvalidReading(msg) => {
                    Error::InvalidReading(format!("sample {i} (minute {}): {msg}", s.minute))
                }
                other => other,
            })?;
            if i > 0 && s.minute <= samples[i - 1].minute {
                return Err(Error::InvalidReading(format!(
                    "minute {} does not follow minute {}",
                    s.minute,
                    samples[i - 1].minute
                )));
            }
        }
        Ok(Self {
            id: id.into(),
            samples,
        })
    }

    pub fn samples(&self) -> &[Sample] {
        &self.samples
    }

    /// Converts to hourly kWh, one bucket per clock hour between the first
    /// and last reading.
    pub fn to_hourly(&self) -> Result<LoadSeries> {
        let (first, last) = match (self.samples.first(), self.samples.last()) {
            (Some(f), Some(l)) => (f.minute / 60, l.minute / 60),
            _ => return Err(Error::UnfillableGap(format!("template {} is empty", self.id))),
        };
        let mut values = Vec::with_capacity((last - first + 1) as usize);
        let mut idx = 0;
        let mut bucket = Vec::with_capacity(60);
        for hour in first..=last {
            bucket.clear();
            while idx < self.samples.len() && self.samples[idx].minute / 60 == hour {
                bucket.push(self.samples[idx].kw);
                idx += 1;
            }
            let kwh = resample_kw_to_kwh(&bucket, 1.0).map_err(|e| match e {
                Error::UnfillableGap(_) => {
                    Error::UnfillableGap(format!("template {} has no readings in hour {hour}", self.id))
                }
                other => other,
            })?;
            values.push(kwh);
        }
        LoadSeries::new(self.id.clone(), first as usize, values)
    }
}

/// Hourly energy series of one home or of an aggregate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LoadSeries {
    pub id: String,
    pub start_hour: usize,
    values: Vec<f64>,
}

impl LoadSeries {
    pub fn new(id: impl Into<String>, start_hour: usize, values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Domain("load series must hold at least one value".into()));
        }
        if let Some((i, v)) = values.iter().enumerate().find(|(_, v)| !v.is_finite() || **v < 0.0) {
            return Err(Error::InvalidReading(format!("hour {i}: {v} kWh")));
        }
        Ok(Self {
            id: id.into(),
            start_hour,
            values,
        })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }
}

fn check_reading(kw: f64) -> Result<()> {
    if !kw.is_finite() || kw < 0.0 {
        return Err(Error::InvalidReading(format!("{kw} kW")));
    }
    Ok(())
}

/// Energy over `period` hours from the minute readings that fall in it:
/// `period * mean(readings)`.
pub fn resample_kw_to_kwh(minutes: &[f64], period: f64) -> Result<f64> {
    if minutes.is_empty() {
        return Err(Error::UnfillableGap("hour bucket has no readings".into()));
    }
    for &kw in minutes {
        check_reading(kw)?;
    }
    Ok(period * minutes.iter().sum::<f64>() / minutes.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TemplateFormat {
    MinuteCsv,
}

pub fn load_template(path: impl AsRef<Path>, format: TemplateFormat) -> Result<TemplateHome> {
    let path = path.as_ref();
    let id = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "template".to_owned());
    match format {
        TemplateFormat::MinuteCsv => parse_template(File::open(path)?, id, path),
    }
}

/// Parses `minute,kw` rows, filling runs of up to [`MAX_FILLABLE_GAP`]
/// missing minutes by linear interpolation.
pub fn parse_template(reader: impl Read, id: impl Into<String>, origin: &Path) -> Result<TemplateHome> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let headers = rdr.headers()?.clone();
    if headers.len() != 2 || &headers[0] != "minute" || &headers[1] != "kw" {
        return Err(Error::parse(origin, 1, "expected header `minute,kw`"));
    }
    let mut samples: Vec<Sample> = Vec::new();
    for (i, record) in rdr.records().enumerate() {
        let line = i + 2;
        let record = record.map_err(|e| Error::parse(origin, line, e.to_string()))?;
        if record.len() != 2 {
            return Err(Error::parse(origin, line, format!("expected 2 fields, found {}", record.len())));
        }
        let minute: u64 = record[0]
            .trim()
            .parse()
            .map_err(|_| Error::parse(origin, line, format!("bad minute `{}`", &record[0])))?;
        let kw: f64 = record[1]
            .trim()
            .parse()
            .map_err(|_| Error::parse(origin, line, format!("bad kw `{}`", &record[1])))?;
        check_reading(kw).map_err(|_| {
            Error::InvalidReading(format!("{}:{line}: {kw} kW", origin.display()))
        })?;
        if let Some(prev) = samples.last().copied() {
            if minute <= prev.minute {
                return Err(Error::parse(
                    origin,
                    line,
                    format!("minute {minute} does not follow minute {}", prev.minute),
                ));
            }
            let missing = minute - prev.minute - 1;
            if missing > MAX_FILLABLE_GAP {
                return Err(Error::UnfillableGap(format!(
                    "{}:{line}: {missing} minutes missing after minute {}",
                    origin.display(),
                    prev.minute
                )));
            }
            let span = (minute - prev.minute) as f64;
            for m in prev.minute + 1..minute {
                let w = (m - prev.minute) as f64 / span;
                samples.push(Sample {
                    minute: m,
                    kw: prev.kw + w * (kw - prev.kw),
                });
            }
        }
        samples.push(Sample { minute, kw });
    }
    if samples.is_empty() {
        return Err(Error::parse(origin, 1, "no data rows"));
    }
    TemplateHome::new(id, samples)
}

pub fn write_template(template: &TemplateHome, writer: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["minute", "kw"])?;
    for s in template.samples() {
        w.write_record([s.minute.to_string(), s.kw.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_hourly(series: &LoadSeries, writer: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["hour", "kwh"])?;
    for (i, v) in series.values().iter().enumerate() {
        w.write_record([(series.start_hour + i).to_string(), v.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_hourly(path: impl AsRef<Path>) -> Result<LoadSeries> {
    let path = path.as_ref();
    let id = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "series".to_owned());
    let mut rdr = csv::Reader::from_path(path)?;
    let headers = rdr.headers()?.clone();
    if headers.len() != 2 || &headers[0] != "hour" || &headers[1] != "kwh" {
        return Err(Error::parse(path, 1, "expected header `hour,kwh`"));
    }
    let mut start = None;
    let mut values = Vec::new();
    for (i, record) in rdr.records().enumerate() {
        let line = i + 2;
        let record = record.map_err(|e| Error::parse(path, line, e.to_string()))?;
        let hour: usize = record[0]
            .trim()
            .parse()
            .map_err(|_| Error::parse(path, line, format!("bad hour `{}`", &record[0])))?;
        let kwh: f64 = record[1]
            .trim()
            .parse()
            .map_err(|_| Error::parse(path, line, format!("bad kwh `{}`", &record[1])))?;
        let first = *start.get_or_insert(hour);
        if hour != first + values.len() {
            return Err(Error::parse(path, line, format!("hour {hour} out of sequence")));
        }
        values.push(kwh);
    }
    LoadSeries::new(id, start.unwrap_or(0), values)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<TemplateHome> {
        parse_template(text.as_bytes(), "t", Path::new("t.csv"))
    }

    #[test]
    fn constant_power_is_identity() {
        assert_eq!(resample_kw_to_kwh(&[1.0; 60], 1.0).unwrap(), 1.0);
        assert_eq!(resample_kw_to_kwh(&[2.0; 60], 1.0).unwrap(), 2.0);
    }

    #[test]
    fn ramp_readings_average() {
        let minutes: Vec<f64> = (0..60).map(f64::from).collect();
        // oracle: (0 + 59) / 2
        assert_eq!(resample_kw_to_kwh(&minutes, 1.0).unwrap(), 29.5);
    }

    #[test]
    fn resample_rejects_bad_buckets() {
        assert!(matches!(resample_kw_to_kwh(&[], 1.0), Err(Error::UnfillableGap(_))));
        assert!(matches!(resample_kw_to_kwh(&[1.0, -0.5], 1.0), Err(Error::InvalidReading(_))));
    }

    #[test]
    fn parses_two_rows() {
        let t = parse("minute,kw\n0,1.5\n1,2.5\n").unwrap();
        assert_eq!(t.samples().len(), 2);
        assert_eq!(t.samples()[1], Sample { minute: 1, kw: 2.5 });
    }

    #[test]
    fn fills_single_missing_minute() {
        let t = parse("minute,kw\n0,1.0\n2,3.0\n").unwrap();
        assert_eq!(t.samples()[1], Sample { minute: 1, kw: 2.0 });
    }

    #[test]
    fn fills_five_minute_gap_linearly() {
        let t = parse("minute,kw\n0,0.0\n6,6.0\n").unwrap();
        let kws: Vec<f64> = t.samples().iter().map(|s| s.kw).collect();
        assert_eq!(kws, vec![0.0, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
    }

    #[test]
    fn long_gap_is_fatal() {
        let err = parse("minute,kw\n0,1.0\n7,1.0\n").unwrap_err();
        assert!(matches!(err, Error::UnfillableGap(_)), "{err}");
    }

    #[test]
    fn negative_power_is_invalid() {
        let err = parse("minute,kw\n0,1.0\n1,-1\n").unwrap_err();
        assert!(matches!(err, Error::InvalidReading(_)), "{err}");
    }

    #[test]
    fn malformed_row_reports_line() {
        let err = parse("minute,kw\n0,1.0\n1,abc\n").unwrap_err();
        match err {
            Error::Parse { line, .. } => assert_eq!(line, 3),
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn hourly_buckets_follow_clock_hours() {
        let samples = (0..180)
            .map(|m| Sample {
                minute: m,
                kw: (m / 60 + 1) as f64,
            })
            .collect();
        let t = TemplateHome::new("h", samples).unwrap();
        let hourly = t.to_hourly().unwrap();
        assert_eq!(hourly.values(), &[1.0, 2.0, 3.0]);
        assert_eq!(hourly.start_hour, 0);
    }

    #[test]
    fn template_csv_round_trip() {
        let text = "minute,kw\n0,1.25\n1,0\n2,3.5\n";
        let t = parse(text).unwrap();
        let mut out = Vec::new();
        write_template(&t, &mut out).unwrap();
        let back = parse(std::str::from_utf8(&out).unwrap()).unwrap();
        assert_eq!(back.samples(), t.samples());
    }
}
