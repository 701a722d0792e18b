//! Sliding-window correlation networks over price panels, their entropy
//! series, and a trailing z-score change detector.

use std::collections::HashSet;
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::census::{count_labeled, TopologyCatalog, TopologyMask};
use crate::entropy::{von_neumann_entropy, Embedder};
use crate::error::{Error, Result};
use crate::graph::LabeledGraph;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FillPolicy {
    Reject,
    ForwardFill,
}

impl FromStr for FillPolicy {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "reject" => Ok(FillPolicy::Reject),
            "forward_fill" | "forward-fill" | "ffill" => Ok(FillPolicy::ForwardFill),
            other => Err(format!("unknown fill policy {other:?} (reject|forward_fill)")),
        }
    }
}

/// Closing prices, one row per day and one column per ticker.
#[derive(Debug, Clone, PartialEq)]
pub struct PriceMatrix {
    pub tickers: Vec<String>,
    pub dates: Vec<String>,
    pub prices: Vec<Vec<f64>>,
}

impl PriceMatrix {
    /// Checks shape and positivity.
    pub fn new(tickers: Vec<String>, dates: Vec<String>, prices: Vec<Vec<f64>>) -> Result<Self> {
        if dates.len() != prices.len() {
            return Err(Error::Contract(format!(
                "{} dates for {} price rows",
                dates.len(),
                prices.len()
            )));
        }
        for (d, row) in prices.iter().enumerate() {
            if row.len() != tickers.len() {
                return Err(Error::Contract(format!(
                    "day {d} has {} prices for {} tickers",
                    row.len(),
                    tickers.len()
                )));
            }
            if let Some(p) = row.iter().find(|p| !(**p > 0.0) || !p.is_finite()) {
                return Err(Error::Contract(format!("day {d} has nonpositive price {p}")));
            }
        }
        Ok(PriceMatrix {
            tickers,
            dates,
            prices,
        })
    }

    pub fn days(&self) -> usize {
        self.dates.len()
    }

    pub fn ticker_count(&self) -> usize {
        self.tickers.len()
    }
}

fn is_gap(cell: &str) -> bool {
    matches!(cell, "" | "NA" | "NaN" | "nan" | "null")
}

pub fn ingest_prices(path: impl AsRef<Path>, policy: FillPolicy) -> Result<PriceMatrix> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|source| Error::Ingestion {
        path: path.to_path_buf(),
        source,
    })?;
    parse_prices(file, &path.display().to_string(), policy)
}

/// Parses `date,TICKER1,TICKER2,...` CSV text.
pub fn parse_prices<R: Read>(input: R, name: &str, policy: FillPolicy) -> Result<PriceMatrix> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    let header = reader.headers()?.clone();
    if header.len() < 2 {
        return Err(Error::format(name, 1, "header needs a date column and at least one ticker"));
    }
    let tickers: Vec<String> = header.iter().skip(1).map(str::to_string).collect();
    let mut dates = Vec::new();
    let mut seen = HashSet::new();
    let mut prices: Vec<Vec<f64>> = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record?;
        let line = i + 2;
        let date = record.get(0).unwrap_or("").to_string();
        if !seen.insert(date.clone()) {
            return Err(Error::format(name, line, format!("duplicate date {date:?}")));
        }
        if record.len() != header.len() {
            return Err(Error::format(
                name,
                line,
                format!("{} fields, header has {}", record.len(), header.len()),
            ));
        }
        let mut row = Vec::with_capacity(tickers.len());
        for (col, cell) in record.iter().skip(1).enumerate() {
            if is_gap(cell) {
                let prev = prices.last().map(|r: &Vec<f64>| r[col]);
                match (policy, prev) {
                    (_, None) => {
                        return Err(Error::format(
                            name,
                            line,
                            format!("leading gap for ticker {}", tickers[col]),
                        ))
                    }
                    (FillPolicy::Reject, Some(_)) => {
                        return Err(Error::format(
                            name,
                            line,
                            format!("missing price for ticker {}", tickers[col]),
                        ))
                    }
                    (FillPolicy::ForwardFill, Some(p)) => row.push(p),
                }
                continue;
            }
            let value: f64 = cell.parse().map_err(|_| {
                Error::format(name, line, format!("non-numeric price {cell:?} for {}", tickers[col]))
            })?;
            if !(value > 0.0) || !value.is_finite() {
                return Err(Error::format(name, line, format!("nonpositive price {value}")));
            }
            row.push(value);
        }
        dates.push(date);
        prices.push(row);
    }
    if prices.is_empty() {
        return Err(Error::format(name, 1, "no price rows"));
    }
    PriceMatrix::new(tickers, dates, prices)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeLabeling {
    /// Every node carries label 0.
    Unlabeled,
    /// Three bands by within-window degree terciles.
    DegreeBands,
}

impl FromStr for NodeLabeling {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "unlabeled" | "none" => Ok(NodeLabeling::Unlabeled),
            "degree_bands" | "degree-bands" => Ok(NodeLabeling::DegreeBands),
            other => Err(format!("unknown labeling {other:?} (unlabeled|degree_bands)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WindowConfig {
    pub window: usize,
    pub quantile: f64,
    /// Correlate daily log-returns instead of price levels.
    pub returns: bool,
    pub labeling: NodeLabeling,
    /// 1-based index of the day ending the first window; defaults to `window`.
    pub first_end_day: Option<usize>,
}

impl WindowConfig {
    pub fn new(window: usize, quantile: f64) -> Self {
        WindowConfig {
            window,
            quantile,
            returns: false,
            labeling: NodeLabeling::Unlabeled,
            first_end_day: None,
        }
    }
}

/// Number of windows when the first one ends on 1-based day `first_end_day`.
///
/// `window_count(6004, 28, 28) = 5977`; sliding from the 29th day gives
/// `window_count(6004, 28, 29) = 5976`.
pub fn window_count(days: usize, window: usize, first_end_day: usize) -> usize {
    if first_end_day < window || first_end_day > days {
        0
    } else {
        days - first_end_day + 1
    }
}

#[derive(Debug, Clone)]
pub struct WindowNetworkSeries {
    pub window_size: usize,
    pub threshold_quantile: f64,
    pub graphs: Vec<LabeledGraph>,
    pub window_end_dates: Vec<String>,
    /// The |ρ| cut-off used in each window.
    pub thresholds: Vec<f64>,
}

/// Pearson correlations of the columns of `rows`; pairs involving a
/// zero-variance column are `None`.
fn correlations(rows: &[Vec<f64>]) -> Vec<Vec<Option<f64>>> {
    let t = rows.len() as f64;
    let n = rows[0].len();
    let mut centered = vec![vec![0.0; rows.len()]; n];
    let mut norms = vec![0.0; n];
    for j in 0..n {
        let mean = rows.iter().map(|r| r[j]).sum::<f64>() / t;
        for (d, r) in rows.iter().enumerate() {
            centered[j][d] = r[j] - mean;
        }
        norms[j] = centered[j].iter().map(|x| x * x).sum::<f64>().sqrt();
    }
    let mut out = vec![vec![None; n]; n];
    for a in 0..n {
        for b in a + 1..n {
            // tolerance for constant columns that picked up rounding noise
            let scale = rows.iter().map(|r| r[a].abs().max(r[b].abs())).fold(0.0, f64::max);
            if norms[a] <= 1e-12 * scale * t.sqrt() || norms[b] <= 1e-12 * scale * t.sqrt() {
                continue;
            }
            let dot: f64 = centered[a].iter().zip(&centered[b]).map(|(x, y)| x * y).sum();
            let rho = (dot / (norms[a] * norms[b])).clamp(-1.0, 1.0);
            out[a][b] = Some(rho);
            out[b][a] = Some(rho);
        }
    }
    out
}

fn degree_band_labels(node_count: usize, edges: &[(usize, usize)]) -> Vec<usize> {
    let mut degree = vec![0usize; node_count];
    for &(u, v) in edges {
        degree[u] += 1;
        degree[v] += 1;
    }
    let mut sorted = degree.clone();
    sorted.sort_unstable();
    let lo = sorted[node_count / 3];
    let hi = sorted[2 * node_count / 3];
    degree
        .iter()
        .map(|&d| if d < lo { 0 } else if d < hi { 1 } else { 2 })
        .collect()
}

/// One thresholded correlation graph per window.
///
/// In each window the cut-off τ is the `⌊q·P⌋`-th largest `|ρ|` over the `P`
/// ticker pairs, and a pair is linked when `|ρ| ≥ τ` and `ρ ≠ 0`. Tickers that
/// are constant inside the window stay isolated.
pub fn build_windows(prices: &PriceMatrix, config: &WindowConfig) -> Result<WindowNetworkSeries> {
    let WindowConfig {
        window, quantile, ..
    } = *config;
    if window < 3 {
        return Err(Error::Contract(format!("window {window} must be at least 3")));
    }
    if !(quantile > 0.0 && quantile < 1.0) {
        return Err(Error::Contract(format!("quantile {quantile} must lie in (0, 1)")));
    }
    let (rows, dates): (Vec<Vec<f64>>, Vec<String>) = if config.returns {
        let r = prices
            .prices
            .windows(2)
            .map(|w| w[0].iter().zip(&w[1]).map(|(a, b)| (b / a).ln()).collect())
            .collect();
        (r, prices.dates[1..].to_vec())
    } else {
        (prices.prices.clone(), prices.dates.clone())
    };
    if rows.len() < window {
        return Err(Error::Contract(format!(
            "{} observations are fewer than the window of {window}",
            rows.len()
        )));
    }
    let first_end = config.first_end_day.unwrap_or(window);
    if first_end < window || first_end > rows.len() {
        return Err(Error::Contract(format!(
            "first window end day {first_end} outside {window}..={}",
            rows.len()
        )));
    }
    let n = prices.ticker_count();
    let pairs = n * (n - 1) / 2;
    let keep = (quantile * pairs as f64).floor() as usize;

    let built: Vec<(LabeledGraph, f64)> = (first_end..=rows.len())
        .into_par_iter()
        .map(|end| {
            let rho = correlations(&rows[end - window..end]);
            let mut magnitudes: Vec<f64> = (0..n)
                .flat_map(|a| (a + 1..n).map(move |b| (a, b)))
                .filter_map(|(a, b)| rho[a][b].map(f64::abs))
                .collect();
            magnitudes.sort_by(|x, y| y.total_cmp(x));
            let tau = if keep == 0 || keep > magnitudes.len() {
                f64::INFINITY
            } else {
                magnitudes[keep - 1]
            };
            let mut edges = Vec::new();
            for a in 0..n {
                for b in a + 1..n {
                    if let Some(r) = rho[a][b] {
                        if r != 0.0 && r.abs() >= tau {
                            edges.push((a, b));
                        }
                    }
                }
            }
            let labels = match config.labeling {
                NodeLabeling::Unlabeled => vec![0; n],
                NodeLabeling::DegreeBands => degree_band_labels(n, &edges),
            };
            let graph = LabeledGraph::new(dates[end - 1].clone(), labels, edges)?;
            Ok((graph, tau))
        })
        .collect::<Result<_>>()?;

    let window_end_dates = (first_end..=rows.len()).map(|e| dates[e - 1].clone()).collect();
    let (graphs, thresholds) = built.into_iter().unzip();
    Ok(WindowNetworkSeries {
        window_size: window,
        threshold_quantile: quantile,
        graphs,
        window_end_dates,
        thresholds,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EntropySeries {
    /// Catalog entry, or `None` for the sum over the mask.
    pub topology: Option<usize>,
    pub subgraph: Vec<f64>,
    pub von_neumann: Vec<f64>,
}

/// Per-window subgraph entropy summed over labels and over the topologies in
/// `mask`, alongside the von Neumann entropy.
pub fn entropy_series(
    series: &WindowNetworkSeries,
    embedder: &Embedder,
    mask: &TopologyMask,
) -> Result<EntropySeries> {
    let catalog = TopologyCatalog::standard();
    let rows: Vec<(f64, f64)> = series
        .graphs
        .par_iter()
        .map(|g| {
            let census = count_labeled(g, &catalog, mask);
            let emb = embedder.embed(&census, census.label_count())?;
            let s: f64 = mask.ids().into_iter().map(|v| emb.topology_sum(v)).sum();
            Ok((s, von_neumann_entropy(g)))
        })
        .collect::<Result<_>>()?;
    let ids = mask.ids();
    let (subgraph, von_neumann) = rows.into_iter().unzip();
    Ok(EntropySeries {
        topology: if ids.len() == 1 { Some(ids[0]) } else { None },
        subgraph,
        von_neumann,
    })
}

/// Indices whose value leaves the trailing band
/// `mean ± z_threshold·std` of the previous `baseline_window` values.
///
/// The standard deviation is the sample one. The first `baseline_window`
/// indices are never flagged, and indices with a constant baseline are
/// skipped.
pub fn flag_changes(values: &[f64], z_threshold: f64, baseline_window: usize) -> Result<Vec<usize>> {
    if baseline_window < 5 {
        return Err(Error::Contract(format!(
            "baseline window {baseline_window} must be at least 5"
        )));
    }
    let b = baseline_window as f64;
    let mut flagged = Vec::new();
    for t in baseline_window..values.len() {
        let base = &values[t - baseline_window..t];
        let mean = base.iter().sum::<f64>() / b;
        let var = base.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (b - 1.0);
        let sd = var.sqrt();
        if sd == 0.0 {
            continue;
        }
        if (values[t] - mean).abs() > z_threshold * sd {
            flagged.push(t);
        }
    }
    Ok(flagged)
}

/// Writes `window_end_date,topology,subgraph_entropy,von_neumann_entropy,flagged`.
pub fn write_series_csv<W: Write>(
    dates: &[String],
    series: &EntropySeries,
    flagged: &[usize],
    out: W,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "window_end_date",
        "topology",
        "subgraph_entropy",
        "von_neumann_entropy",
        "flagged",
    ])?;
    let topology = series
        .topology
        .map_or_else(|| "all".to_string(), |v| v.to_string());
    for (i, date) in dates.iter().enumerate() {
        w.write_record([
            date.clone(),
            topology.clone(),
            format!("{:e}", series.subgraph[i]),
            format!("{:e}", series.von_neumann[i]),
            (flagged.binary_search(&i).is_ok() as u8).to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Synthetic panel with one correlation-regime switch.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegimeSwitch {
    pub tickers: usize,
    pub days: usize,
    /// 0-based day from which the block is correlated.
    pub switch_day: usize,
    /// Tickers `0..block` share the common factor after the switch.
    pub block: usize,
    pub correlation: f64,
    /// Daily log-return volatility.
    pub volatility: f64,
}

impl Default for RegimeSwitch {
    fn default() -> Self {
        RegimeSwitch {
            tickers: 40,
            days: 400,
            switch_day: 200,
            block: 20,
            correlation: 0.8,
            volatility: 0.01,
        }
    }
}

impl RegimeSwitch {
    /// Independent Gaussian returns before the switch; afterwards the block
    /// follows `√ρ·f + √(1-ρ)·e_i`. Prices start at 100 and compound the
    /// returns. Dates are `d0000`, `d0001`, ...
    pub fn generate(&self, seed: u64) -> PriceMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (load, idio) = (self.correlation.sqrt(), (1.0 - self.correlation).sqrt());
        let mut level = vec![100.0f64; self.tickers];
        let mut prices = Vec::with_capacity(self.days);
        for day in 0..self.days {
            let common: f64 = StandardNormal.sample(&mut rng);
            for (i, p) in level.iter_mut().enumerate() {
                let e: f64 = StandardNormal.sample(&mut rng);
                let z = if day >= self.switch_day && i < self.block {
                    load * common + idio * e
                } else {
                    e
                };
                *p *= (self.volatility * z).exp();
            }
            prices.push(level.clone());
        }
        PriceMatrix {
            tickers: (0..self.tickers).map(|i| format!("S{i:03}")).collect(),
            dates: (0..self.days).map(|d| format!("d{d:04}")).collect(),
            prices,
        }
    }
}

/// Writes the panel in the layout read by [`parse_prices`].
pub fn write_prices_csv<W: Write>(prices: &PriceMatrix, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["date".to_string()];
    header.extend(prices.tickers.iter().cloned());
    w.write_record(&header)?;
    for (date, row) in prices.dates.iter().zip(&prices.prices) {
        let mut rec = vec![date.clone()];
        rec.extend(row.iter().map(|p| p.to_string()));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn matrix(prices: Vec<Vec<f64>>) -> PriceMatrix {
        let n = prices[0].len();
        PriceMatrix::new(
            (0..n).map(|i| format!("T{i}")).collect(),
            (0..prices.len()).map(|d| format!("d{d}")).collect(),
            prices,
        )
        .unwrap()
    }

    #[test]
    fn clean_file_parses() {
        let text = "date,A,B,C\n1,1,2,3\n2,1.5,2,3\n3,2,2.5,3\n4,1,2,3.5\n5,1,2,3\n";
        let m = parse_prices(text.as_bytes(), "t", FillPolicy::Reject).unwrap();
        assert_eq!((m.days(), m.ticker_count()), (5, 3));
        assert_eq!(m.tickers, ["A", "B", "C"]);
    }

    #[test]
    fn gaps_follow_policy() {
        let text = "date,A,B\n1,1,2\n2,,3\n";
        let m = parse_prices(text.as_bytes(), "t", FillPolicy::ForwardFill).unwrap();
        assert_eq!(m.prices[1], [1.0, 3.0]);
        assert!(parse_prices(text.as_bytes(), "t", FillPolicy::Reject).is_err());
        let leading = "date,A,B\n1,,2\n2,1,3\n";
        for policy in [FillPolicy::Reject, FillPolicy::ForwardFill] {
            let err = parse_prices(leading.as_bytes(), "t", policy).unwrap_err();
            assert!(err.to_string().contains("leading gap"));
        }
    }

    #[test]
    fn malformed_inputs_rejected() {
        assert!(parse_prices("date,A\n".as_bytes(), "t", FillPolicy::Reject).is_err());
        assert!(parse_prices("date,A\n1,2\n1,3\n".as_bytes(), "t", FillPolicy::Reject)
            .unwrap_err()
            .to_string()
            .contains("duplicate date"));
        assert!(parse_prices("date,A\n1,x\n".as_bytes(), "t", FillPolicy::Reject).is_err());
        assert!(parse_prices("date,A\n1,-2\n".as_bytes(), "t", FillPolicy::Reject).is_err());
    }

    #[test]
    fn window_arithmetic() {
        assert_eq!(window_count(6004, 28, 28), 5977);
        assert_eq!(window_count(6004, 28, 29), 5976);
        assert_eq!(window_count(28, 28, 28), 1);
    }

    #[test]
    fn top_pair_is_connected() {
        // A and B move together; C is unrelated
        let a = [1.0, 2.0, 3.0, 2.0, 5.0, 4.0, 6.0, 7.0, 5.0, 8.0];
        let c = [3.0, 1.0, 4.0, 1.0, 5.0, 9.0, 2.0, 6.0, 5.0, 3.0];
        let rows = (0..10).map(|d| vec![a[d], 2.0 * a[d] + 1.0, c[d]]).collect();
        let s = build_windows(&matrix(rows), &WindowConfig::new(10, 0.34)).unwrap();
        assert_eq!(s.graphs.len(), 1);
        assert_eq!(s.graphs[0].edges(), [(0, 1)]);
    }

    #[test]
    fn constant_ticker_is_isolated() {
        let rows = (0..12)
            .map(|d| {
                let x = d as f64;
                vec![1.0 + x, 2.0 + x * x, 5.0, 3.0 + (x * 0.7).sin()]
            })
            .collect();
        let s = build_windows(&matrix(rows), &WindowConfig::new(5, 0.5)).unwrap();
        assert_eq!(s.graphs.len(), 8);
        for g in &s.graphs {
            assert_eq!(g.degree(2), 0);
        }
    }

    #[test]
    fn flags_need_variation() {
        assert!(flag_changes(&[1.0; 50], 3.0, 10).unwrap().is_empty());
        let mut v: Vec<f64> = (0..50).map(|i| if i % 2 == 0 { 0.1 } else { -0.1 }).collect();
        v[30] = 1.0 + v[30];
        assert_eq!(flag_changes(&v, 3.0, 10).unwrap(), [30]);
        assert!(flag_changes(&v, 3.0, 4).is_err());
    }
}
