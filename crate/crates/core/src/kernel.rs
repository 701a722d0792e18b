//! Base kernels over entropy embeddings, Gram matrices and kernel PCA.

use std::io::{BufRead, Write};

use nalgebra::{DMatrix, SymmetricEigen};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::entropy::EntropyEmbedding;
use crate::error::{Error, Result};

/// Base kernel applied to pairs of embedding vectors.
///
/// `Sigmoid` is not positive semi-definite in general; the others are (the
/// polynomial kernel when `coef0 >= 0`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BaseKernelSpec {
    Linear,
    Rbf { gamma: f64 },
    Polynomial { degree: u32, coef0: f64 },
    Sigmoid { alpha: f64, coef0: f64 },
}

impl BaseKernelSpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            BaseKernelSpec::Rbf { gamma } if !(gamma > 0.0) => Err(Error::Contract(format!(
                "rbf gamma = {gamma} must be > 0"
            ))),
            BaseKernelSpec::Polynomial { degree: 0, .. } => {
                Err(Error::Contract("polynomial degree must be >= 1".into()))
            }
            _ => Ok(()),
        }
    }

    /// RBF with `gamma = 1 / dim`.
    pub fn rbf_default(dim: usize) -> Self {
        BaseKernelSpec::Rbf {
            gamma: 1.0 / dim.max(1) as f64,
        }
    }

    pub fn is_psd(&self) -> bool {
        match *self {
            BaseKernelSpec::Linear | BaseKernelSpec::Rbf { .. } => true,
            BaseKernelSpec::Polynomial { coef0, .. } => coef0 >= 0.0,
            BaseKernelSpec::Sigmoid { .. } => false,
        }
    }

    pub fn eval(&self, x: &[f64], y: &[f64]) -> f64 {
        let dot = || x.iter().zip(y).map(|(a, b)| a * b).sum::<f64>();
        match *self {
            BaseKernelSpec::Linear => dot(),
            BaseKernelSpec::Rbf { gamma } => {
                let d2: f64 = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
                (-gamma * d2).exp()
            }
            BaseKernelSpec::Polynomial { degree, coef0 } => (dot() + coef0).powi(degree as i32),
            BaseKernelSpec::Sigmoid { alpha, coef0 } => (alpha * dot() + coef0).tanh(),
        }
    }
}

/// Symmetric kernel matrix over an ordered list of graphs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GramMatrix {
    pub graph_ids: Vec<String>,
    pub kernel: Option<BaseKernelSpec>,
    pub params_fingerprint: Option<u64>,
    n: usize,
    /// Row-major.
    values: Vec<f64>,
}

impl GramMatrix {
    /// Wraps an externally computed matrix; must be square and symmetric.
    pub fn from_rows(graph_ids: Vec<String>, rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = rows.len();
        if graph_ids.len() != n || rows.iter().any(|r| r.len() != n) {
            return Err(Error::Contract(format!(
                "Gram matrix must be {n}x{n} with {n} ids"
            )));
        }
        let values: Vec<f64> = rows.into_iter().flatten().collect();
        let g = GramMatrix {
            graph_ids,
            kernel: None,
            params_fingerprint: None,
            n,
            values,
        };
        g.check_symmetric(1e-12)?;
        Ok(g)
    }

    fn from_matrix(template: &GramMatrix, m: &DMatrix<f64>) -> Self {
        let n = m.nrows();
        let mut values = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                values[i * n + j] = m[(i, j)];
            }
        }
        GramMatrix {
            graph_ids: template.graph_ids.clone(),
            kernel: template.kernel,
            params_fingerprint: template.params_fingerprint,
            n,
            values,
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.n..(i + 1) * self.n]
    }

    pub fn to_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.n, self.n, &self.values)
    }

    /// Rows `rows`, columns `cols`, as a dense row-major block.
    pub fn block(&self, rows: &[usize], cols: &[usize]) -> Vec<Vec<f64>> {
        rows.iter()
            .map(|&i| cols.iter().map(|&j| self.get(i, j)).collect())
            .collect()
    }

    pub fn check_symmetric(&self, tol: f64) -> Result<()> {
        for i in 0..self.n {
            for j in i + 1..self.n {
                let (a, b) = (self.get(i, j), self.get(j, i));
                if (a - b).abs() > tol * (1.0 + a.abs().max(b.abs())) {
                    return Err(Error::Contract(format!(
                        "matrix not symmetric at ({i}, {j}): {a} vs {b}"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = self.to_matrix().symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    /// `λ_min >= -rel_tol · λ_max`.
    pub fn is_psd(&self, rel_tol: f64) -> bool {
        let ev = self.eigenvalues();
        match (ev.first(), ev.last()) {
            (Some(&lo), Some(&hi)) => lo >= -rel_tol * hi.abs().max(f64::MIN_POSITIVE),
            _ => true,
        }
    }
}

/// Zero-mean, unit-variance rescaling of every coordinate across the set.
///
/// Constant coordinates become zero.
pub fn standardize(embeddings: &mut [EntropyEmbedding]) {
    let Some(first) = embeddings.first() else {
        return;
    };
    let dim = first.dim();
    let n = embeddings.len() as f64;
    for k in 0..dim {
        let mean = embeddings.iter().map(|e| e.values[k]).sum::<f64>() / n;
        let var = embeddings
            .iter()
            .map(|e| (e.values[k] - mean).powi(2))
            .sum::<f64>()
            / n;
        let sd = var.sqrt();
        for e in embeddings.iter_mut() {
            e.values[k] = if sd > 0.0 { (e.values[k] - mean) / sd } else { 0.0 };
        }
    }
}

/// Gram matrix `K[i][j] = k(S(G_i), S(G_j))`.
///
/// The upper triangle is computed and mirrored, so the result is exactly
/// symmetric and independent of thread scheduling.
pub fn gram(embeddings: &[EntropyEmbedding], spec: &BaseKernelSpec) -> Result<GramMatrix> {
    spec.validate()?;
    if let Some(first) = embeddings.first() {
        for e in embeddings {
            if e.dim() != first.dim() {
                return Err(Error::Contract(format!(
                    "embedding {} has dimension {}, expected {}",
                    e.graph_id,
                    e.dim(),
                    first.dim()
                )));
            }
            if e.params.fingerprint() != first.params.fingerprint() || e.mode != first.mode {
                return Err(Error::Contract(format!(
                    "embedding {} was computed with different thermodynamic parameters",
                    e.graph_id
                )));
            }
        }
    }
    let n = embeddings.len();
    let upper: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            (i..n)
                .map(|j| spec.eval(&embeddings[i].values, &embeddings[j].values))
                .collect()
        })
        .collect();
    let mut values = vec![0.0; n * n];
    for (i, row) in upper.iter().enumerate() {
        for (offset, &v) in row.iter().enumerate() {
            let j = i + offset;
            values[i * n + j] = v;
            values[j * n + i] = v;
        }
    }
    Ok(GramMatrix {
        graph_ids: embeddings.iter().map(|e| e.graph_id.clone()).collect(),
        kernel: Some(*spec),
        params_fingerprint: embeddings.first().map(|e| e.params.fingerprint()),
        n,
        values,
    })
}

/// Double centering `K - 1K/n - K1/n + 1K1/n²`.
pub fn center(gram: &GramMatrix) -> GramMatrix {
    let n = gram.len();
    if n == 0 {
        return gram.clone();
    }
    let nf = n as f64;
    let row_means: Vec<f64> = (0..n).map(|i| gram.row(i).iter().sum::<f64>() / nf).collect();
    let grand = row_means.iter().sum::<f64>() / nf;
    let mut m = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            // symmetric input: column means equal row means
            let v = gram.get(i, j) - row_means[i] - row_means[j] + grand;
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    GramMatrix::from_matrix(gram, &m)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KpcaResult {
    /// One row per graph, one column per component.
    pub coordinates: Vec<Vec<f64>>,
    /// Leading eigenvalues of the centered Gram matrix, clamped at zero.
    pub eigenvalues: Vec<f64>,
    /// Each component's share of the total (clamped) spectrum.
    pub explained_ratio: Vec<f64>,
}

/// Kernel PCA with `k` components.
///
/// Eigenpairs are sorted by descending eigenvalue (ties keep solver order),
/// each eigenvector is signed so its largest-magnitude entry is positive, and
/// coordinates are eigenvectors scaled by `sqrt(max(λ, 0))`.
pub fn kpca(gram: &GramMatrix, k: usize) -> Result<KpcaResult> {
    let n = gram.len();
    if k > n {
        return Err(Error::Contract(format!(
            "{k} components requested from {n} graphs"
        )));
    }
    gram.check_symmetric(1e-9)?;
    let centered = center(gram).to_matrix();
    let eig = SymmetricEigen::new(centered);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let total: f64 = eig.eigenvalues.iter().map(|&l| l.max(0.0)).sum();

    let mut coordinates = vec![vec![0.0; k]; n];
    let mut eigenvalues = Vec::with_capacity(k);
    let mut explained_ratio = Vec::with_capacity(k);
    for (c, &idx) in order.iter().take(k).enumerate() {
        let lambda = eig.eigenvalues[idx].max(0.0);
        let vec = eig.eigenvectors.column(idx);
        let mut pivot = 0;
        for i in 1..n {
            if vec[i].abs() > vec[pivot].abs() {
                pivot = i;
            }
        }
        let sign = if vec[pivot] < 0.0 { -1.0 } else { 1.0 };
        let scale = sign * lambda.sqrt();
        for i in 0..n {
            coordinates[i][c] = vec[i] * scale;
        }
        eigenvalues.push(lambda);
        explained_ratio.push(if total > 0.0 { lambda / total } else { 0.0 });
    }
    Ok(KpcaResult {
        coordinates,
        eigenvalues,
        explained_ratio,
    })
}

/// Writes the matrix as CSV with a header of graph ids.
pub fn write_gram_csv<W: Write>(gram: &GramMatrix, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["graph_id".to_string()];
    header.extend(gram.graph_ids.iter().cloned());
    w.write_record(&header)?;
    for i in 0..gram.len() {
        let mut row = vec![gram.graph_ids[i].clone()];
        row.extend(gram.row(i).iter().map(|v| format!("{v:e}")));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Writes the libsvm precomputed-kernel layout:
/// `label 0:<i+1> 1:<K[i][0]> 2:<K[i][1]> ...`.
pub fn write_precomputed<W: Write>(gram: &GramMatrix, labels: &[i64], mut out: W) -> Result<()> {
    if labels.len() != gram.len() {
        return Err(Error::Contract(format!(
            "{} labels for a {}-row kernel",
            labels.len(),
            gram.len()
        )));
    }
    for i in 0..gram.len() {
        write!(out, "{} 0:{}", labels[i], i + 1)?;
        for (j, v) in gram.row(i).iter().enumerate() {
            write!(out, " {}:{:e}", j + 1, v)?;
        }
        writeln!(out)?;
    }
    Ok(())
}

/// Reads the layout written by [`write_precomputed`]; graph ids become the
/// 1-based row serials.
pub fn read_precomputed<R: BufRead>(input: R) -> Result<(GramMatrix, Vec<i64>)> {
    let file = "precomputed kernel";
    let mut labels = Vec::new();
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut ids = Vec::new();
    for (lineno, line) in input.lines().enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let lineno = lineno + 1;
        let mut tokens = line.split_whitespace();
        let label: i64 = tokens
            .next()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| Error::format(file, lineno, "missing integer label"))?;
        let mut row = Vec::new();
        for (pos, tok) in tokens.enumerate() {
            let (idx, val) = tok
                .split_once(':')
                .ok_or_else(|| Error::format(file, lineno, format!("bad pair {tok:?}")))?;
            let idx: usize = idx
                .parse()
                .map_err(|_| Error::format(file, lineno, format!("bad index {idx:?}")))?;
            if idx != pos {
                return Err(Error::format(
                    file,
                    lineno,
                    format!("expected column {pos}, found {idx}"),
                ));
            }
            if pos == 0 {
                ids.push(val.to_string());
                continue;
            }
            row.push(val.parse().map_err(|_| {
                Error::format(file, lineno, format!("non-numeric kernel value {val:?}"))
            })?);
        }
        labels.push(label);
        rows.push(row);
    }
    Ok((GramMatrix::from_rows(ids, rows)?, labels))
}
