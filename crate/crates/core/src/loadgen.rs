//! Non-overlapping day-block bootstrap of template homes into an N-home micro-grid.
//!
//! Every home draws from its own ChaCha8 stream: the generator is seeded with
//! the grid seed and `set_stream(home_index)` selects the home's stream. The
//! streams are independent counters, so a home's series depends only on
//! `(seed, index)` and homes can be generated in any order or in parallel.

use std::io::Write;
use std::path::Path;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::LoadSeries;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct BootstrapConfig {
    pub block_len: usize,
    pub num_days: usize,
    pub seed: u64,
}

impl Default for BootstrapConfig {
    fn default() -> Self {
        Self {
            block_len: 24,
            num_days: 30,
            seed: 0,
        }
    }
}

impl BootstrapConfig {
    pub fn validate(&self) -> Result<()> {
        if self.block_len == 0 {
            return Err(Error::config("block_len must be at least 1"));
        }
        if self.num_days == 0 {
            return Err(Error::config("num_days must be at least 1"));
        }
        Ok(())
    }
}

/// Base-load series of every home. The per-home tastes, demand elasticities
/// and background prices that shape consumption are already folded into these
/// values; the simulator treats them as what each home would draw without DSM.
#[derive(Debug, Clone, PartialEq)]
pub struct Microgrid {
    homes: Vec<LoadSeries>,
}

impl Microgrid {
    pub fn new(homes: Vec<LoadSeries>) -> Result<Self> {
        let len = homes
            .first()
            .map(LoadSeries::len)
            .ok_or_else(|| Error::config("micro-grid needs at least one home"))?;
        if let Some(h) = homes.iter().find(|h| h.len() != len) {
            return Err(Error::LengthMismatch {
                left: len,
                right: h.len(),
            });
        }
        Ok(Self { homes })
    }

    pub fn homes(&self) -> &[LoadSeries] {
        &self.homes
    }

    pub fn num_homes(&self) -> usize {
        self.homes.len()
    }

    /// Number of hourly steps.
    pub fn hours(&self) -> usize {
        self.homes[0].len()
    }

    /// Aggregate base load per hour.
    pub fn base_load(&self) -> Vec<f64> {
        (0..self.hours())
            .map(|t| self.homes.iter().map(|h| h.values()[t]).sum())
            .collect()
    }

    pub fn write_csv(&self, writer: impl Write) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header = vec!["hour".to_owned()];
        header.extend((0..self.num_homes()).map(|i| format!("home_{i}")));
        w.write_record(&header)?;
        for t in 0..self.hours() {
            let mut row = vec![t.to_string()];
            row.extend(self.homes.iter().map(|h| h.values()[t].to_string()));
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let mut rdr = csv::Reader::from_path(path)?;
        let headers = rdr.headers()?.clone();
        let n = headers.len().saturating_sub(1);
        let well_formed = n > 0
            && &headers[0] == "hour"
            && (0..n).all(|i| headers[i + 1] == *format!("home_{i}"));
        if !well_formed {
            return Err(Error::parse(path, 1, "expected header `hour,home_0,...,home_{N-1}`"));
        }
        let mut columns = vec![Vec::new(); n];
        for (i, record) in rdr.records().enumerate() {
            let line = i + 2;
            let record = record.map_err(|e| Error::parse(path, line, e.to_string()))?;
            for (c, col) in columns.iter_mut().enumerate() {
                let v: f64 = record[c + 1]
                    .trim()
                    .parse()
                    .map_err(|_| Error::parse(path, line, format!("bad value `{}`", &record[c + 1])))?;
                col.push(v);
            }
        }
        let homes = columns
            .into_iter()
            .enumerate()
            .map(|(i, values)| LoadSeries::new(format!("home_{i}"), 0, values))
            .collect::<Result<Vec<_>>>()?;
        Self::new(homes)
    }
}

/// Resamples whole `block_len` blocks of `template` with replacement.
pub fn block_bootstrap(template: &LoadSeries, cfg: &BootstrapConfig) -> Result<LoadSeries> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    bootstrap_with_rng(template, cfg, &mut rng, template.id.clone())
}

fn bootstrap_with_rng(
    template: &LoadSeries,
    cfg: &BootstrapConfig,
    rng: &mut impl Rng,
    id: String,
) -> Result<LoadSeries> {
    cfg.validate()?;
    let values = template.values();
    if values.len() < cfg.block_len {
        return Err(Error::InsufficientHistory {
            need: cfg.block_len,
            have: values.len(),
        });
    }
    if values.len() % cfg.block_len != 0 {
        return Err(Error::config(format!(
            "template length {} is not a multiple of block length {}",
            values.len(),
            cfg.block_len
        )));
    }
    let blocks = values.len() / cfg.block_len;
    let mut out = Vec::with_capacity(cfg.num_days * cfg.block_len);
    for _ in 0..cfg.num_days {
        let b = rng.gen_range(0..blocks);
        out.extend_from_slice(&values[b * cfg.block_len..(b + 1) * cfg.block_len]);
    }
    LoadSeries::new(id, 0, out)
}

/// Stream for home `index` under `seed`.
pub fn home_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

/// Builds `n` homes; home `i` bootstraps template `i % templates.len()`.
pub fn synthesize_microgrid(templates: &[LoadSeries], n: usize, cfg: &BootstrapConfig) -> Result<Microgrid> {
    if templates.is_empty() {
        return Err(Error::config("at least one template is required"));
    }
    if n == 0 {
        return Err(Error::config("micro-grid needs at least one home"));
    }
    let homes = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut rng = home_rng(cfg.seed, i);
            bootstrap_with_rng(&templates[i % templates.len()], cfg, &mut rng, format!("home_{i}"))
        })
        .collect::<Result<Vec<_>>>()?;
    Microgrid::new(homes)
}
