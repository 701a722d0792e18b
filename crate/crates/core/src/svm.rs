//! C-SVM on precomputed kernels and stratified cross-validation.
//!
//! Training is SMO over the dual `min ½αᵀQα - eᵀα, 0 ≤ α ≤ C, yᵀα = 0`, `Q_ij = y_i y_j K_ij`.
//! The first working index is the maximal KKT violator; the second is the
//! violating partner with the largest second-order objective decrease.

use std::fmt;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::GramMatrix;

pub const DEFAULT_TOL: f64 = 1e-3;
pub const MAX_ITERATIONS: usize = 1_000_000;
pub const INNER_FOLDS: usize = 3;

/// Curvature floor for non-PSD pairs.
const TAU: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvmModel {
    /// Training rows with nonzero α.
    pub support_indices: Vec<usize>,
    /// `α_i y_i` for each support index.
    pub dual_coefs: Vec<f64>,
    pub bias: f64,
    pub c: f64,
    pub train_size: usize,
    pub iterations: usize,
}

impl SvmModel {
    /// `Σ dual_coefs[i]·K(x, sv_i) + bias` from a row of test-vs-train values.
    pub fn decision_value(&self, kernel_row: &[f64]) -> Result<f64> {
        if kernel_row.len() != self.train_size {
            return Err(Error::Contract(format!(
                "kernel row has {} entries, model was trained on {}",
                kernel_row.len(),
                self.train_size
            )));
        }
        let sum: f64 = self
            .support_indices
            .iter()
            .zip(&self.dual_coefs)
            .map(|(&i, &a)| a * kernel_row[i])
            .sum();
        Ok(sum + self.bias)
    }
}

/// Class in `{-1, +1}`; a zero decision value maps to `+1`.
pub fn predict(model: &SvmModel, kernel_row: &[f64]) -> Result<i8> {
    Ok(if model.decision_value(kernel_row)? >= 0.0 { 1 } else { -1 })
}

/// Trains a binary C-SVM on a dense training Gram matrix.
pub fn train(gram_sub: &[Vec<f64>], labels: &[i8], c: f64, tol: f64) -> Result<SvmModel> {
    train_capped(gram_sub, labels, c, tol, MAX_ITERATIONS)
}

pub fn train_capped(
    k: &[Vec<f64>],
    labels: &[i8],
    c: f64,
    tol: f64,
    max_iterations: usize,
) -> Result<SvmModel> {
    let n = labels.len();
    if k.len() != n || k.iter().any(|r| r.len() != n) {
        return Err(Error::Contract(format!(
            "training Gram must be {n}x{n} to match the labels"
        )));
    }
    if labels.iter().any(|&y| y != 1 && y != -1) {
        return Err(Error::Contract("binary labels must be +1 or -1".into()));
    }
    if !labels.contains(&1) || !labels.contains(&-1) {
        return Err(Error::Contract(
            "training labels contain a single class".into(),
        ));
    }
    if !(c > 0.0) || !(tol > 0.0) {
        return Err(Error::Contract(format!("C = {c} and tol = {tol} must be > 0")));
    }

    let y: Vec<f64> = labels.iter().map(|&l| l as f64).collect();
    let flat: Vec<f64> = k.iter().flatten().copied().collect();
    let row = |i: usize| &flat[i * n..(i + 1) * n];
    let diag: Vec<f64> = (0..n).map(|i| flat[i * n + i]).collect();
    let mut alpha = vec![0.0; n];
    // f[t] = -y_t G_t with G = Qα - e
    let mut f = y.clone();
    let in_up = |a: f64, y: f64| (y > 0.0 && a < c) || (y < 0.0 && a > 0.0);
    let in_low = |a: f64, y: f64| (y > 0.0 && a > 0.0) || (y < 0.0 && a < c);
    let mut up: Vec<bool> = (0..n).map(|t| in_up(0.0, y[t])).collect();
    let mut low: Vec<bool> = (0..n).map(|t| in_low(0.0, y[t])).collect();

    let argmax_up = |f: &[f64], up: &[bool]| {
        let (mut i, mut m) = (usize::MAX, f64::NEG_INFINITY);
        for t in 0..n {
            if up[t] && f[t] > m {
                m = f[t];
                i = t;
            }
        }
        (i, m)
    };
    let (mut i, mut m) = argmax_up(&f, &up);
    let mut iterations = 0;
    loop {
        // i: maximal violator; j: largest second-order decrease among I_low
        let mut j = usize::MAX;
        let mut big_m = f64::INFINITY;
        let mut best_gain = f64::NEG_INFINITY;
        let k_i = row(i.min(n - 1));
        let d_i = diag[i.min(n - 1)];
        for (t, (((&v, &is_low), &d_t), &k_it)) in
            f.iter().zip(&low).zip(&diag).zip(k_i).enumerate()
        {
            if !is_low {
                continue;
            }
            big_m = big_m.min(v);
            if v < m {
                let b = m - v;
                let a = (d_i + d_t - 2.0 * k_it).max(TAU);
                let gain = b * b / a;
                if gain > best_gain {
                    best_gain = gain;
                    j = t;
                }
            }
        }
        let gap = m - big_m;
        if i == usize::MAX || j == usize::MAX || gap < tol {
            break;
        }
        if iterations >= max_iterations {
            return Err(Error::Convergence {
                iterations,
                residual: gap,
            });
        }
        iterations += 1;

        let (old_i, old_j) = (alpha[i], alpha[j]);
        let (g_i, g_j) = (-y[i] * f[i], -y[j] * f[j]);
        let q_ij = y[i] * y[j] * k_i[j];
        if y[i] != y[j] {
            let quad = (diag[i] + diag[j] + 2.0 * q_ij).max(TAU);
            let delta = (-g_i - g_j) / quad;
            let diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if diff > 0.0 {
                if alpha[j] < 0.0 {
                    alpha[j] = 0.0;
                    alpha[i] = diff;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = -diff;
            }
            if diff > 0.0 {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = c - diff;
                }
            } else if alpha[j] > c {
                alpha[j] = c;
                alpha[i] = c + diff;
            }
        } else {
            let quad = (diag[i] + diag[j] - 2.0 * q_ij).max(TAU);
            let delta = (g_i - g_j) / quad;
            let sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if sum > c {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = sum - c;
                }
            } else if alpha[j] < 0.0 {
                alpha[j] = 0.0;
                alpha[i] = sum;
            }
            if sum > c {
                if alpha[j] > c {
                    alpha[j] = c;
                    alpha[i] = sum - c;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = sum;
            }
        }
        for t in [i, j] {
            up[t] = in_up(alpha[t], y[t]);
            low[t] = in_low(alpha[t], y[t]);
        }
        // K is symmetric, so rows i and j stand in for the columns; the next
        // maximal violator is found in the same pass
        let (si, sj) = (y[i] * (alpha[i] - old_i), y[j] * (alpha[j] - old_j));
        let k_j = row(j);
        let (mut next_i, mut next_m) = (usize::MAX, f64::NEG_INFINITY);
        for (t, (((ft, &is_up), &a), &b)) in
            f.iter_mut().zip(&up).zip(k_i).zip(k_j).enumerate()
        {
            let v = *ft - (a * si + b * sj);
            *ft = v;
            if is_up && v > next_m {
                next_m = v;
                next_i = t;
            }
        }
        i = next_i;
        m = next_m;
    }
    let grad: Vec<f64> = (0..n).map(|t| -y[t] * f[t]).collect();

    // ρ from free vectors, else the midpoint of the feasible interval
    let mut free_sum = 0.0;
    let mut free = 0usize;
    let (mut ub, mut lb) = (f64::INFINITY, f64::NEG_INFINITY);
    for t in 0..n {
        let yg = y[t] * grad[t];
        if alpha[t] > 0.0 && alpha[t] < c {
            free_sum += yg;
            free += 1;
        } else if (alpha[t] >= c && y[t] < 0.0) || (alpha[t] <= 0.0 && y[t] > 0.0) {
            ub = ub.min(yg);
        } else {
            lb = lb.max(yg);
        }
    }
    let rho = if free > 0 {
        free_sum / free as f64
    } else {
        (ub + lb) / 2.0
    };

    let mut support_indices = Vec::new();
    let mut dual_coefs = Vec::new();
    for t in 0..n {
        if alpha[t] > 0.0 {
            support_indices.push(t);
            dual_coefs.push(alpha[t] * y[t]);
        }
    }
    Ok(SvmModel {
        support_indices,
        dual_coefs,
        bias: -rho,
        c,
        train_size: n,
        iterations,
    })
}

/// Binary or one-vs-rest classifier over arbitrary integer classes.
#[derive(Debug, Clone)]
pub struct Classifier {
    classes: Vec<i64>,
    /// One machine for two classes (positive = `classes[1]`), else one per class.
    machines: Vec<SvmModel>,
    train_rows: Vec<usize>,
}

impl Classifier {
    /// Trains on the rows `rows` of `gram`.
    pub fn fit(gram: &GramMatrix, labels: &[i64], rows: &[usize], c: f64, tol: f64) -> Result<Self> {
        let mut classes: Vec<i64> = rows.iter().map(|&i| labels[i]).collect();
        classes.sort_unstable();
        classes.dedup();
        if classes.len() < 2 {
            return Err(Error::Contract(
                "training labels contain a single class".into(),
            ));
        }
        let k = gram.block(rows, rows);
        let binary = |positive: i64| -> Vec<i8> {
            rows
                .iter()
                .map(|&i| if labels[i] == positive { 1 } else { -1 })
                .collect()
        };
        let machines = if classes.len() == 2 {
            vec![train(&k, &binary(classes[1]), c, tol)?]
        } else {
            classes
                .iter()
                .map(|&cl| train(&k, &binary(cl), c, tol))
                .collect::<Result<_>>()?
        };
        Ok(Classifier {
            classes,
            machines,
            train_rows: rows.to_vec(),
        })
    }

    pub fn machines(&self) -> &[SvmModel] {
        &self.machines
    }

    /// Predicted class of row `row` of `gram`.
    pub fn predict_row(&self, gram: &GramMatrix, row: usize) -> Result<i64> {
        let k: Vec<f64> = self.train_rows.iter().map(|&j| gram.get(row, j)).collect();
        if self.classes.len() == 2 {
            let side = predict(&self.machines[0], &k)?;
            return Ok(if side > 0 { self.classes[1] } else { self.classes[0] });
        }
        // highest decision value; ties go to the smaller class
        let mut best = (f64::NEG_INFINITY, self.classes[0]);
        for (m, &cl) in self.machines.iter().zip(&self.classes) {
            let v = m.decision_value(&k)?;
            if v > best.0 {
                best = (v, cl);
            }
        }
        Ok(best.1)
    }

    pub fn accuracy(&self, gram: &GramMatrix, labels: &[i64], rows: &[usize]) -> Result<f64> {
        let mut correct = 0;
        for &r in rows {
            if self.predict_row(gram, r)? == labels[r] {
                correct += 1;
            }
        }
        Ok(correct as f64 / rows.len().max(1) as f64)
    }
}

/// Splits `indices` into `k` stratified folds.
///
/// Each class is shuffled with one seeded generator (classes in ascending
/// order) and dealt round-robin, continuing where the previous class stopped.
pub fn stratified_folds(
    indices: &[usize],
    labels: &[i64],
    k: usize,
    seed: u64,
) -> Result<Vec<Vec<usize>>> {
    if k < 2 {
        return Err(Error::Contract(format!("{k} folds requested; need at least 2")));
    }
    let mut classes: Vec<i64> = indices.iter().map(|&i| labels[i]).collect();
    classes.sort_unstable();
    classes.dedup();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut folds = vec![Vec::new(); k];
    let mut next = 0;
    for class in classes {
        let mut members: Vec<usize> = indices
            .iter()
            .copied()
            .filter(|&i| labels[i] == class)
            .collect();
        if members.len() < k {
            return Err(Error::Stratification {
                class,
                members: members.len(),
                folds: k,
            });
        }
        members.shuffle(&mut rng);
        for m in members {
            folds[next].push(m);
            next = (next + 1) % k;
        }
    }
    for f in &mut folds {
        f.sort_unstable();
    }
    Ok(folds)
}

fn complement(all: &[usize], fold: &[usize]) -> Vec<usize> {
    all.iter()
        .copied()
        .filter(|i| fold.binary_search(i).is_err())
        .collect()
}

/// Mean inner-CV accuracy of each `C`, using only the rows in `train`.
///
/// A `C` whose training hits the iteration cap on any inner split scores
/// `None` and is dropped from selection.
fn inner_scores(
    gram: &GramMatrix,
    labels: &[i64],
    train: &[usize],
    c_grid: &[f64],
    seed: u64,
) -> Result<Vec<Option<f64>>> {
    let folds = stratified_folds(train, labels, INNER_FOLDS, seed)?;
    let mut scores = Vec::with_capacity(c_grid.len());
    'grid: for &c in c_grid {
        let mut total = 0.0;
        for fold in &folds {
            let inner_train = complement(train, fold);
            match Classifier::fit(gram, labels, &inner_train, c, DEFAULT_TOL) {
                Ok(clf) => total += clf.accuracy(gram, labels, fold)?,
                Err(Error::Convergence { .. }) => {
                    scores.push(None);
                    continue 'grid;
                }
                Err(e) => return Err(e),
            }
        }
        scores.push(Some(total / folds.len() as f64));
    }
    Ok(scores)
}

/// Indices of the scored entries, best first; ties keep grid order.
fn ranked(scores: &[Option<f64>]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..scores.len()).filter(|&i| scores[i].is_some()).collect();
    idx.sort_by(|&a, &b| scores[b].partial_cmp(&scores[a]).unwrap());
    idx
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldResult {
    pub test_indices: Vec<usize>,
    pub c: f64,
    pub accuracy: f64,
    /// Grid values dropped because inner or outer training did not converge.
    pub unconverged_c: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvReport {
    pub fold_accuracies: Vec<f64>,
    pub mean: f64,
    pub std_error: f64,
    /// The C chosen most often across folds (ties to the smaller value).
    pub c: f64,
    pub seed: u64,
    pub folds: Vec<FoldResult>,
    pub c_grid: Vec<f64>,
}

impl fmt::Display for CvReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "fold  C         accuracy  unconverged C")?;
        for (i, r) in self.folds.iter().enumerate() {
            writeln!(f, "{:>4}  {:<8}  {:.4}    {:?}", i + 1, r.c, r.accuracy, r.unconverged_c)?;
        }
        writeln!(
            f,
            "mean {:.4} ± {:.4} (std. error, {} folds, seed {})",
            self.mean,
            self.std_error,
            self.folds.len(),
            self.seed
        )
    }
}

/// Stratified k-fold accuracy with nested selection of `C`.
///
/// The inner split of outer fold `f` is seeded with `seed + f + 1`. Grid values
/// that fail to converge on an inner split are skipped for that fold, as is a
/// selected value whose outer fit fails; if nothing converges the
/// convergence error is returned.
/// Outer folds run in parallel; each training run is sequential.
pub fn cross_validate(
    gram: &GramMatrix,
    labels: &[i64],
    k: usize,
    c_grid: &[f64],
    seed: u64,
) -> Result<CvReport> {
    if labels.len() != gram.len() {
        return Err(Error::Contract(format!(
            "{} labels for a {}-row kernel",
            labels.len(),
            gram.len()
        )));
    }
    if c_grid.is_empty() || c_grid.iter().any(|&c| !(c > 0.0)) {
        return Err(Error::Contract("C grid must be non-empty and positive".into()));
    }
    let all: Vec<usize> = (0..gram.len()).collect();
    let folds = stratified_folds(&all, labels, k, seed)?;
    let results: Vec<FoldResult> = folds
        .par_iter()
        .enumerate()
        .map(|(f, test)| {
            let train = complement(&all, test);
            let order: Vec<usize> = if c_grid.len() == 1 {
                vec![0]
            } else {
                let scores = inner_scores(gram, labels, &train, c_grid, seed.wrapping_add(f as u64 + 1))?;
                ranked(&scores)
            };
            let mut unconverged_c: Vec<f64> = c_grid
                .iter()
                .enumerate()
                .filter(|(i, _)| !order.contains(i))
                .map(|(_, &c)| c)
                .collect();
            // best inner score first; a C whose outer fit hits the cap yields
            // to the next-ranked value
            let mut last_err = Error::Convergence {
                iterations: MAX_ITERATIONS,
                residual: f64::NAN,
            };
            let mut fitted = None;
            for &idx in &order {
                match Classifier::fit(gram, labels, &train, c_grid[idx], DEFAULT_TOL) {
                    Ok(clf) => {
                        fitted = Some((c_grid[idx], clf));
                        break;
                    }
                    Err(e @ Error::Convergence { .. }) => {
                        unconverged_c.push(c_grid[idx]);
                        last_err = e;
                    }
                    Err(e) => return Err(e),
                }
            }
            let (c, clf) = fitted.ok_or(last_err)?;
            Ok(FoldResult {
                test_indices: test.clone(),
                c,
                accuracy: clf.accuracy(gram, labels, test)?,
                unconverged_c,
            })
        })
        .collect::<Result<_>>()?;

    let fold_accuracies: Vec<f64> = results.iter().map(|r| r.accuracy).collect();
    let kf = k as f64;
    let mean = fold_accuracies.iter().sum::<f64>() / kf;
    let var = fold_accuracies.iter().map(|a| (a - mean).powi(2)).sum::<f64>() / (kf - 1.0);
    let mut c = c_grid[0];
    let mut best_votes = 0;
    for &candidate in c_grid {
        let votes = results.iter().filter(|r| r.c == candidate).count();
        if votes > best_votes || (votes == best_votes && candidate < c) {
            best_votes = votes;
            c = candidate;
        }
    }
    Ok(CvReport {
        fold_accuracies,
        mean,
        std_error: var.sqrt() / kf.sqrt(),
        c,
        seed,
        folds: results,
        c_grid: c_grid.to_vec(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_point_problem_is_separated() {
        // K = 4I + 1
        let k = vec![vec![5.0, 1.0], vec![1.0, 5.0]];
        let m = train(&k, &[1, -1], 10.0, DEFAULT_TOL).unwrap();
        assert_eq!(predict(&m, &k[0]).unwrap(), 1);
        assert_eq!(predict(&m, &k[1]).unwrap(), -1);
    }

    #[test]
    fn single_class_rejected() {
        let k = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
        assert!(matches!(train(&k, &[1, 1], 1.0, 1e-3), Err(Error::Contract(_))));
    }

    #[test]
    fn zero_row_uses_bias_sign() {
        let m = SvmModel {
            support_indices: vec![0],
            dual_coefs: vec![1.0],
            bias: 0.5,
            c: 1.0,
            train_size: 2,
            iterations: 0,
        };
        assert_eq!(predict(&m, &[0.0, 0.0]).unwrap(), 1);
        let tie = SvmModel { bias: 0.0, ..m.clone() };
        assert_eq!(predict(&tie, &[0.0, 0.0]).unwrap(), 1);
        assert!(predict(&m, &[0.0]).is_err());
    }

    #[test]
    fn iteration_cap_reports_residual() {
        let k = vec![vec![1.0, 0.2, 0.1], vec![0.2, 1.0, 0.3], vec![0.1, 0.3, 1.0]];
        match train_capped(&k, &[1, -1, 1], 10.0, 1e-3, 0) {
            Err(Error::Convergence { iterations, residual }) => {
                assert_eq!(iterations, 0);
                assert!(residual > 0.0);
            }
            other => panic!("expected convergence error, got {other:?}"),
        }
    }

    #[test]
    fn folds_reject_small_classes() {
        let labels = [0, 0, 0, 1, 1];
        let idx: Vec<usize> = (0..5).collect();
        assert!(matches!(
            stratified_folds(&idx, &labels, 3, 1),
            Err(Error::Stratification { class: 1, members: 2, folds: 3 })
        ));
    }
}
