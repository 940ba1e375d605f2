//! CSV rows, per-cell summaries and a minimal SVG plot.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::config::PlacementKind;
use crate::sweep::{Measure, SweepRow};
use crate::{HarnessError, Result};

pub const HEADER: [&str; 10] = [
    "placement",
    "elements",
    "trial",
    "seed",
    "peb_bound_m",
    "peb_achieved_m",
    "peb_fully_digital_m",
    "peb_random_strength_m",
    "status",
    "wall_time_s",
];

const UNOBSERVABLE: &str = "unobservable";

/// 17 significant digits, enough to round-trip any `f64`.
pub fn format_float(v: f64) -> String {
    format!("{v:.16e}")
}

fn format_measure(m: Measure) -> String {
    match m {
        Measure::Value(v) => format_float(v),
        Measure::Unobservable => UNOBSERVABLE.into(),
        Measure::Missing => String::new(),
    }
}

fn parse_measure(s: &str) -> std::result::Result<Measure, String> {
    match s {
        "" => Ok(Measure::Missing),
        UNOBSERVABLE => Ok(Measure::Unobservable),
        _ => s.parse().map(Measure::Value).map_err(|e| format!("bad value '{s}': {e}")),
    }
}

fn csv_error(path: &Path, source: csv::Error) -> HarnessError {
    HarnessError::Csv { path: path.to_path_buf(), source }
}

pub fn write_rows<W: Write>(out: W, rows: &[SweepRow]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(HEADER)?;
    for r in rows {
        w.write_record([
            r.placement.to_string(),
            r.elements.to_string(),
            r.trial.to_string(),
            r.seed.to_string(),
            format_measure(r.bound),
            format_measure(r.achieved),
            format_measure(r.fully_digital),
            format_measure(r.random_strength),
            r.status.clone(),
            r.wall_time.map(format_float).unwrap_or_default(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Writes the rows and their summary next to them (`<stem>.summary.csv`).
/// Returns the summary path.
pub fn write_csv(rows: &[SweepRow], path: &Path) -> Result<PathBuf> {
    if rows.is_empty() {
        return Err(HarnessError::io(path, std::io::Error::new(std::io::ErrorKind::InvalidInput, "no rows to write")));
    }
    let file = std::fs::File::create(path).map_err(|e| HarnessError::io(path, e))?;
    write_rows(std::io::BufWriter::new(file), rows).map_err(|e| csv_error(path, e))?;
    let summary = summary_path(path);
    write_summary(&summarize(rows), &summary)?;
    Ok(summary)
}

pub fn summary_path(path: &Path) -> PathBuf {
    sibling(path, "summary.csv")
}

pub fn svg_path(path: &Path) -> PathBuf {
    sibling(path, "svg")
}

fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "sweep".into());
    path.with_file_name(format!("{stem}.{suffix}"))
}

pub fn read_csv(path: &Path) -> Result<Vec<SweepRow>> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| csv_error(path, e))?;
    let bad = |line: usize, msg: String| HarnessError::config(format!("{}:{line}: {msg}", path.display()));
    let headers = reader.headers().map_err(|e| csv_error(path, e))?.clone();
    if headers.iter().ne(HEADER) {
        return Err(bad(1, "unexpected header".into()));
    }
    let mut rows = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| csv_error(path, e))?;
        let line = i + 2;
        let int = |k: usize| rec[k].parse::<u64>().map_err(|e| bad(line, format!("{}: {e}", HEADER[k])));
        let measure = |k: usize| parse_measure(&rec[k]).map_err(|e| bad(line, e));
        rows.push(SweepRow {
            placement: rec[0].parse()?,
            elements: int(1)? as usize,
            trial: int(2)? as usize,
            seed: int(3)?,
            bound: measure(4)?,
            achieved: measure(5)?,
            fully_digital: measure(6)?,
            random_strength: measure(7)?,
            status: rec[8].to_string(),
            wall_time: match &rec[9] {
                "" => None,
                s => Some(s.parse().map_err(|e| bad(line, format!("wall time: {e}")))?),
            },
        });
    }
    Ok(rows)
}

/// Mean and median of the observed values of one column.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stat {
    pub count: usize,
    pub mean: f64,
    pub median: f64,
}

impl Stat {
    pub fn of(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let mut v = values.to_vec();
        v.sort_by(f64::total_cmp);
        let n = v.len();
        let median = if n % 2 == 1 { v[n / 2] } else { (v[n / 2 - 1] + v[n / 2]) / 2.0 };
        Some(Self { count: n, mean: v.iter().sum::<f64>() / n as f64, median })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellSummary {
    pub placement: PlacementKind,
    pub elements: usize,
    pub trials: usize,
    pub ok: usize,
    pub bound: Option<Stat>,
    pub achieved: Option<Stat>,
    pub fully_digital: Option<Stat>,
    pub random_strength: Option<Stat>,
}

impl CellSummary {
    /// Median optimized bound below the median random-strength bound.
    pub fn beats_random(&self) -> Option<bool> {
        Some(self.achieved?.median < self.random_strength?.median)
    }
}

/// One summary per `(placement, N)` cell, in order of first appearance.
pub fn summarize(rows: &[SweepRow]) -> Vec<CellSummary> {
    let mut cells: Vec<(PlacementKind, usize)> = Vec::new();
    for r in rows {
        if !cells.contains(&(r.placement, r.elements)) {
            cells.push((r.placement, r.elements));
        }
    }
    cells
        .into_iter()
        .map(|(placement, elements)| {
            let cell: Vec<&SweepRow> = rows.iter().filter(|r| r.placement == placement && r.elements == elements).collect();
            let stat = |f: fn(&SweepRow) -> Measure| {
                Stat::of(&cell.iter().filter_map(|r| f(r).value()).collect::<Vec<_>>())
            };
            CellSummary {
                placement,
                elements,
                trials: cell.len(),
                ok: cell.iter().filter(|r| r.status == "ok").count(),
                bound: stat(|r| r.bound),
                achieved: stat(|r| r.achieved),
                fully_digital: stat(|r| r.fully_digital),
                random_strength: stat(|r| r.random_strength),
            }
        })
        .collect()
}

pub fn write_summary(cells: &[CellSummary], path: &Path) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| HarnessError::io(path, e))?;
    let mut w = csv::Writer::from_writer(std::io::BufWriter::new(file));
    let mut header = vec!["placement".to_string(), "elements".into(), "trials".into(), "ok".into()];
    for name in ["bound", "achieved", "fully_digital", "random_strength"] {
        for stat in ["count", "mean_m", "median_m"] {
            header.push(format!("{name}_{stat}"));
        }
    }
    header.push("optimized_beats_random".into());
    w.write_record(&header).map_err(|e| csv_error(path, e))?;
    for c in cells {
        let mut rec = vec![c.placement.to_string(), c.elements.to_string(), c.trials.to_string(), c.ok.to_string()];
        for s in [c.bound, c.achieved, c.fully_digital, c.random_strength] {
            match s {
                Some(s) => rec.extend([s.count.to_string(), format_float(s.mean), format_float(s.median)]),
                None => rec.extend(["0".to_string(), String::new(), String::new()]),
            }
        }
        rec.push(c.beats_random().map(|b| b.to_string()).unwrap_or_default());
        w.write_record(&rec).map_err(|e| csv_error(path, e))?;
    }
    w.flush().map_err(|e| HarnessError::io(path, e))
}

const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

/// Mean optimized bound (solid) and mean random-strength bound (dashed)
/// against N on log-log axes.
pub fn render_svg(cells: &[CellSummary]) -> String {
    let (w, h, pad) = (640.0, 420.0, 60.0);
    let mut placements: Vec<PlacementKind> = Vec::new();
    for c in cells {
        if !placements.contains(&c.placement) {
            placements.push(c.placement);
        }
    }
    let points: Vec<(f64, f64)> = cells
        .iter()
        .flat_map(|c| [c.achieved, c.random_strength].into_iter().flatten().map(|s| ((c.elements as f64).log2(), s.mean.log10())))
        .filter(|(_, y)| y.is_finite())
        .collect();
    let mut svg = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" font-family=\"sans-serif\" font-size=\"12\">\n\
         <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
    );
    if points.is_empty() {
        svg.push_str("<text x=\"20\" y=\"40\">no data</text>\n</svg>\n");
        return svg;
    }
    let span = |f: fn(&(f64, f64)) -> f64| {
        let lo = points.iter().map(f).fold(f64::INFINITY, f64::min);
        let hi = points.iter().map(f).fold(f64::NEG_INFINITY, f64::max);
        if hi - lo < 1e-9 { (lo - 0.5, hi + 0.5) } else { (lo, hi) }
    };
    let (x0, x1) = span(|p| p.0);
    let (y0, y1) = span(|p| p.1);
    let (y0, y1) = (y0.floor(), y1.ceil());
    let sx = |x: f64| pad + (x - x0) / (x1 - x0) * (w - 2.0 * pad);
    let sy = |y: f64| h - pad - (y - y0) / (y1 - y0) * (h - 2.0 * pad);
    svg.push_str(&format!(
        "<polyline fill=\"none\" stroke=\"black\" points=\"{pad},{} {pad},{} {},{}\"/>\n",
        pad,
        h - pad,
        w - pad,
        h - pad
    ));
    let mut ns: Vec<usize> = cells.iter().map(|c| c.elements).collect();
    ns.sort_unstable();
    ns.dedup();
    for n in ns {
        let x = sx((n as f64).log2());
        svg.push_str(&format!("<text x=\"{x:.1}\" y=\"{:.1}\" text-anchor=\"middle\">{n}</text>\n", h - pad + 18.0));
    }
    for e in y0 as i32..=y1 as i32 {
        svg.push_str(&format!("<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"end\">1e{e}</text>\n", pad - 6.0, sy(e as f64) + 4.0));
    }
    svg.push_str(&format!("<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\">N</text>\n", w / 2.0, h - 15.0));
    svg.push_str(&format!("<text x=\"15\" y=\"{:.1}\" transform=\"rotate(-90 15 {:.1})\" text-anchor=\"middle\">PEB (m)</text>\n", h / 2.0, h / 2.0));
    for (i, p) in placements.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let series = |f: fn(&CellSummary) -> Option<Stat>| -> String {
            cells
                .iter()
                .filter(|c| c.placement == *p)
                .filter_map(|c| f(c).map(|s| (c.elements, s.mean)))
                .filter(|(_, m)| *m > 0.0)
                .map(|(n, m)| format!("{:.1},{:.1}", sx((n as f64).log2()), sy(m.log10())))
                .collect::<Vec<_>>()
                .join(" ")
        };
        svg.push_str(&format!("<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"2\" points=\"{}\"/>\n", series(|c| c.achieved)));
        svg.push_str(&format!(
            "<polyline fill=\"none\" stroke=\"{color}\" stroke-dasharray=\"5,4\" points=\"{}\"/>\n",
            series(|c| c.random_strength)
        ));
        svg.push_str(&format!(
            "<text x=\"{:.1}\" y=\"{:.1}\" fill=\"{color}\">{p}</text>\n",
            w - pad - 150.0,
            pad + 16.0 * i as f64
        ));
    }
    svg.push_str("</svg>\n");
    svg
}

pub fn write_svg(cells: &[CellSummary], path: &Path) -> Result<()> {
    std::fs::write(path, render_svg(cells)).map_err(|e| HarnessError::io(path, e))
}
