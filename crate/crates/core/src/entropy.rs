//! Cluster-expansion entropy of labeled graphlet populations.
//!
//! Each population of `n` occurrences of a topology with `l` nodes and `d`
//! edges contributes
//!
//! ```text
//! ln z    = n (d ln ε - l ln l) - n ln n
//! β <U>   = -n d β (ε - R) / ε
//! S       = ln z + β <U>
//! ```
//!
//! where `ε` is the per-edge configuration integral and
//! `R = -(r_max - r_min) / Δr`. `ε` comes either from the closed form
//! `p e^β + R` or from a discrete Mayer sum over a Lennard-Jones pair
//! potential. Natural logarithms throughout.

use std::io::Write;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::census::{CensusTable, TopologyCatalog, TOPOLOGY_COUNT};
use crate::error::{Error, Result};
use crate::graph::LabeledGraph;

/// Thermodynamic parameters of the edge configuration integral.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThermoParams {
    /// Inverse temperature.
    pub beta: f64,
    /// Prefactor of the closed-form edge integral.
    pub p: f64,
    pub r_min: f64,
    pub r_max: f64,
    pub delta_r: f64,
    /// Length scale of the pair potential.
    pub sigma: f64,
    /// Well depth of the pair potential.
    pub epsilon_well: f64,
}

impl Default for ThermoParams {
    /// `β = 1, p = 10, r ∈ [1, 2], Δr = 0.1, σ = 1, well depth 1`.
    ///
    /// With `p = 1` the closed form would give `e - 10 < 0`; `p = 10` yields
    /// `ε = 10e - 10 ≈ 17.18`.
    fn default() -> Self {
        ThermoParams {
            beta: 1.0,
            p: 10.0,
            r_min: 1.0,
            r_max: 2.0,
            delta_r: 0.1,
            sigma: 1.0,
            epsilon_well: 1.0,
        }
    }
}

impl ThermoParams {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("beta", self.beta),
            ("p", self.p),
            ("r_min", self.r_min),
            ("r_max", self.r_max),
            ("delta_r", self.delta_r),
            ("sigma", self.sigma),
            ("epsilon_well", self.epsilon_well),
        ];
        if let Some((name, _)) = fields.iter().find(|(_, v)| !v.is_finite()) {
            return Err(Error::Contract(format!("{name} must be finite")));
        }
        if self.beta <= 0.0 {
            return Err(Error::Contract(format!("beta = {} must be > 0", self.beta)));
        }
        if self.r_min <= 0.0 || self.r_min >= self.r_max {
            return Err(Error::Contract(format!(
                "radial bounds need 0 < r_min < r_max, got [{}, {}]",
                self.r_min, self.r_max
            )));
        }
        if self.delta_r <= 0.0 {
            return Err(Error::Contract(format!("delta_r = {} must be > 0", self.delta_r)));
        }
        if self.sigma <= 0.0 {
            return Err(Error::Contract(format!("sigma = {} must be > 0", self.sigma)));
        }
        Ok(())
    }

    /// `R = -(r_max - r_min) / Δr`.
    pub fn r_offset(&self) -> f64 {
        -(self.r_max - self.r_min) / self.delta_r
    }

    /// Radial grid `r_min, r_min + Δr, ...` up to and including `r_max`.
    pub fn radial_grid(&self) -> Vec<f64> {
        let steps = ((self.r_max - self.r_min) / self.delta_r + 1e-9).floor() as usize;
        (0..=steps)
            .map(|k| self.r_min + k as f64 * self.delta_r)
            .collect()
    }

    /// Stable 64-bit fingerprint of the exact parameter values.
    pub fn fingerprint(&self) -> u64 {
        // FNV-1a over the IEEE bit patterns
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for v in [
            self.beta,
            self.p,
            self.r_min,
            self.r_max,
            self.delta_r,
            self.sigma,
            self.epsilon_well,
        ] {
            for byte in v.to_bits().to_le_bytes() {
                h ^= byte as u64;
                h = h.wrapping_mul(0x0100_0000_01b3);
            }
        }
        h
    }
}

/// How the per-edge integral is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EdgeIntegral {
    /// `p e^β + R`.
    #[default]
    Closed,
    /// Discrete Mayer sum over the radial grid.
    Mayer,
}

impl std::str::FromStr for EdgeIntegral {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "closed" => Ok(EdgeIntegral::Closed),
            "mayer" => Ok(EdgeIntegral::Mayer),
            other => Err(format!("unknown entropy mode {other:?} (closed|mayer)")),
        }
    }
}

/// Approximation used for `ln k!` in the configurational term.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stirling {
    /// `ln k! ≈ k ln k`.
    #[default]
    Leading,
    /// `ln k! ≈ k ln k - k`.
    WithLinear,
}

impl Stirling {
    fn ln_factorial(self, k: f64) -> f64 {
        match self {
            Stirling::Leading => k * k.ln(),
            Stirling::WithLinear => k * k.ln() - k,
        }
    }
}

fn nonpositive(eps: f64) -> Error {
    Error::Domain(format!(
        "edge integral nonpositive; ln ε undefined (ε = {eps})"
    ))
}

/// Closed-form edge integral `p e^β + R`.
///
/// A nonpositive result is reported as a domain error before the remaining
/// parameter checks, so `p = 1, β = 0, R = -1` fails on `ε = 0`.
pub fn edge_integral_closed(params: &ThermoParams) -> Result<f64> {
    let eps = params.p * params.beta.exp() + params.r_offset();
    if eps <= 0.0 {
        return Err(nonpositive(eps));
    }
    params.validate()?;
    Ok(eps)
}

/// Mayer-sum edge integral
/// `exp[β Σ_r exp(-4 w ((σ/r)^12 - (σ/r)^6))] + R` over the radial grid.
pub fn edge_integral_mayer(params: &ThermoParams) -> Result<f64> {
    params.validate()?;
    let sum: f64 = params
        .radial_grid()
        .into_iter()
        .map(|r| {
            let s6 = (params.sigma / r).powi(6);
            (-4.0 * params.epsilon_well * (s6 * s6 - s6)).exp()
        })
        .sum();
    let exponent = params.beta * sum;
    if !exponent.is_finite() || exponent > f64::MAX.ln() {
        return Err(Error::Domain(format!(
            "Mayer sum overflows: exp({exponent:e})"
        )));
    }
    let eps = exponent.exp() + params.r_offset();
    if eps <= 0.0 {
        return Err(nonpositive(eps));
    }
    Ok(eps)
}

pub fn edge_integral(params: &ThermoParams, mode: EdgeIntegral) -> Result<f64> {
    match mode {
        EdgeIntegral::Closed => edge_integral_closed(params),
        EdgeIntegral::Mayer => edge_integral_mayer(params),
    }
}

/// Entropy of `n` occurrences of a topology with `l` nodes and `d` edges.
///
/// Zero occurrences give exactly zero.
pub fn graphlet_entropy(n: u64, l: usize, d: usize, eps: f64, beta: f64, r: f64) -> Result<f64> {
    graphlet_entropy_with(n, l, d, eps, beta, r, Stirling::Leading)
}

pub fn graphlet_entropy_with(
    n: u64,
    l: usize,
    d: usize,
    eps: f64,
    beta: f64,
    r: f64,
    stirling: Stirling,
) -> Result<f64> {
    if eps <= 0.0 || !eps.is_finite() {
        return Err(nonpositive(eps));
    }
    if n == 0 {
        return Ok(0.0);
    }
    let (n, l, d) = (n as f64, l as f64, d as f64);
    let per_edge = eps.ln() - beta * (eps - r) / eps;
    Ok(n * (d * per_edge - stirling.ln_factorial(l)) - stirling.ln_factorial(n))
}

/// Per-(topology, label) entropies of one graph.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntropyEmbedding {
    pub graph_id: String,
    pub label_count: usize,
    /// Row-major `[type_id][label]`.
    pub values: Vec<f64>,
    pub params: ThermoParams,
    pub mode: EdgeIntegral,
}

impl EntropyEmbedding {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn get(&self, type_id: usize, label: usize) -> f64 {
        self.values[type_id * self.label_count + label]
    }

    /// Sum of the entries belonging to one topology.
    pub fn topology_sum(&self, type_id: usize) -> f64 {
        let start = type_id * self.label_count;
        self.values[start..start + self.label_count].iter().sum()
    }
}

/// Resolved entropy settings with the edge integral evaluated once.
#[derive(Debug, Clone, Copy)]
pub struct Embedder {
    params: ThermoParams,
    mode: EdgeIntegral,
    stirling: Stirling,
    eps: f64,
}

impl Embedder {
    pub fn new(params: ThermoParams, mode: EdgeIntegral) -> Result<Self> {
        Self::with_stirling(params, mode, Stirling::Leading)
    }

    pub fn with_stirling(params: ThermoParams, mode: EdgeIntegral, stirling: Stirling) -> Result<Self> {
        let eps = edge_integral(&params, mode)?;
        Ok(Embedder {
            params,
            mode,
            stirling,
            eps,
        })
    }

    pub fn edge_integral(&self) -> f64 {
        self.eps
    }

    pub fn params(&self) -> &ThermoParams {
        &self.params
    }

    pub fn mode(&self) -> EdgeIntegral {
        self.mode
    }

    /// Embeds a census table; `label_count` fixes the label axis (at least the
    /// table's own width).
    pub fn embed(&self, census: &CensusTable, label_count: usize) -> Result<EntropyEmbedding> {
        if label_count < census.label_count() {
            return Err(Error::Contract(format!(
                "label axis of {label_count} is narrower than census width {}",
                census.label_count()
            )));
        }
        let catalog = TopologyCatalog::standard();
        let mut values = vec![0.0; TOPOLOGY_COUNT * label_count];
        for entry in catalog.entries() {
            for (label, &n) in census.row(entry.type_id).iter().enumerate() {
                values[entry.type_id * label_count + label] = graphlet_entropy_with(
                    n,
                    entry.nodes,
                    entry.edge_count,
                    self.eps,
                    self.params.beta,
                    self.params.r_offset(),
                    self.stirling,
                )?;
            }
        }
        Ok(EntropyEmbedding {
            graph_id: census.graph_id.clone(),
            label_count,
            values,
            params: self.params,
            mode: self.mode,
        })
    }
}

/// Entropy embedding of `graph` from its census, over the graph's own labels.
pub fn embed(
    graph: &LabeledGraph,
    census: &CensusTable,
    params: &ThermoParams,
    mode: EdgeIntegral,
) -> Result<EntropyEmbedding> {
    if census.graph_id != graph.id() {
        return Err(Error::Contract(format!(
            "census of graph {:?} applied to graph {:?}",
            census.graph_id,
            graph.id()
        )));
    }
    Embedder::new(*params, mode)?.embed(census, graph.label_bound().max(census.label_count()))
}

/// Von Neumann entropy of the normalised Laplacian scaled by `1/|V|`.
///
/// Isolated nodes contribute zero rows and columns; `0 ln 0 = 0`.
pub fn von_neumann_entropy(graph: &LabeledGraph) -> f64 {
    let eigenvalues = scaled_laplacian_spectrum(graph);
    eigenvalues
        .iter()
        .filter(|&&l| l > 0.0)
        .map(|&l| -l * l.ln())
        .sum()
}

/// Eigenvalues of `D^{-1/2} (D - A) D^{-1/2} / |V|`.
pub fn scaled_laplacian_spectrum(graph: &LabeledGraph) -> Vec<f64> {
    let n = graph.node_count();
    if n == 0 {
        return Vec::new();
    }
    normalized_laplacian(graph)
        .scale(1.0 / n as f64)
        .symmetric_eigenvalues()
        .iter()
        .copied()
        .collect()
}

pub fn normalized_laplacian(graph: &LabeledGraph) -> DMatrix<f64> {
    let n = graph.node_count();
    let inv_sqrt: Vec<f64> = (0..n)
        .map(|u| match graph.degree(u) {
            0 => 0.0,
            d => 1.0 / (d as f64).sqrt(),
        })
        .collect();
    let mut m = DMatrix::zeros(n, n);
    for u in 0..n {
        if graph.degree(u) > 0 {
            m[(u, u)] = 1.0;
        }
    }
    for &(u, v) in graph.edges() {
        let w = -inv_sqrt[u] * inv_sqrt[v];
        m[(u, v)] = w;
        m[(v, u)] = w;
    }
    m
}

/// Writes one row per embedding: `graph_id,S_v<type>_l<label>,...`.
pub fn write_embeddings_csv<W: Write>(
    embeddings: &[EntropyEmbedding],
    alphabet: &[i64],
    out: W,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["graph_id".to_string()];
    for type_id in 0..TOPOLOGY_COUNT {
        for label in alphabet {
            header.push(format!("S_v{type_id}_l{label}"));
        }
    }
    w.write_record(&header)?;
    for e in embeddings {
        if e.label_count != alphabet.len() {
            return Err(Error::Contract(format!(
                "embedding {} has {} labels, alphabet has {}",
                e.graph_id,
                e.label_count,
                alphabet.len()
            )));
        }
        let mut row = vec![e.graph_id.clone()];
        row.extend(e.values.iter().map(|v| format!("{v:e}")));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}
