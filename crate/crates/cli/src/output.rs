use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use auction_design::infodesign::{DesignSummary, Thresholds};
use clap::ValueEnum;
use serde::Serialize;

/// Version of the CSV column layout.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

pub struct Sink {
    out: Box<dyn Write>,
    format: Format,
}

#[derive(Serialize)]
struct DesignRow<'a> {
    schema_version: u32,
    objective: &'a str,
    n: usize,
    p: f64,
    case: &'a str,
    theta0: f64,
    k: f64,
    theta: f64,
    x_scale: f64,
    revenue: f64,
    total_surplus: f64,
    buyer_surplus: f64,
    sale_probability: f64,
}

#[derive(Serialize)]
pub struct ThresholdRow {
    schema_version: u32,
    n: usize,
    p_s: f64,
    r_b: f64,
    p_b: f64,
}

impl From<Thresholds> for ThresholdRow {
    fn from(t: Thresholds) -> Self {
        ThresholdRow { schema_version: SCHEMA_VERSION, n: t.n, p_s: t.p_s, r_b: t.r_b, p_b: t.p_b }
    }
}

impl Sink {
    pub fn open(path: Option<&Path>, format: Format) -> io::Result<Self> {
        let out: Box<dyn Write> = match path {
            Some(p) => Box::new(BufWriter::new(File::create(p)?)),
            None => Box::new(BufWriter::new(io::stdout().lock())),
        };
        Ok(Sink { out, format })
    }

    pub fn format(&self) -> Format {
        self.format
    }

    pub fn json<T: Serialize + ?Sized>(&mut self, v: &T) -> anyhow::Result<()> {
        serde_json::to_writer_pretty(&mut self.out, v)?;
        writeln!(self.out)?;
        Ok(())
    }

    pub fn rows<T: Serialize>(&mut self, rows: impl IntoIterator<Item = T>) -> anyhow::Result<()> {
        let mut w = csv::Writer::from_writer(&mut self.out);
        for r in rows {
            w.serialize(r)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn design_rows(&mut self, rows: &[DesignSummary]) -> anyhow::Result<()> {
        self.rows(rows.iter().map(|s| DesignRow {
            schema_version: SCHEMA_VERSION,
            objective: s.objective.as_str(),
            n: s.n,
            p: s.p,
            case: s.case.as_str(),
            theta0: s.theta0,
            k: s.k,
            theta: s.theta,
            x_scale: s.x_scale,
            revenue: s.revenue,
            total_surplus: s.total_surplus,
            buyer_surplus: s.buyer_surplus,
            sale_probability: s.sale_probability,
        }))
    }

    pub fn finish(&mut self) -> io::Result<()> {
        self.out.flush()
    }
}
