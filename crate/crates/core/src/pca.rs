//! Covariance PCA by power iteration with deflation.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub const MAX_ITERATIONS: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PcaModel<T> {
    pub features: Vec<String>,
    pub mean: Vec<T>,
    /// `k` orthonormal rows of length `features.len()`.
    pub components: Vec<Vec<T>>,
    /// Descending, non-negative.
    pub eigenvalues: Vec<T>,
    /// Trace of the covariance matrix.
    pub total_variance: T,
    /// Power-iteration steps used per component.
    pub iterations: Vec<usize>,
}

impl<T: Scalar> PcaModel<T> {
    pub fn k(&self) -> usize {
        self.components.len()
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn explained_variance_ratio(&self) -> Vec<T> {
        self.eigenvalues
            .iter()
            .map(|&l| if self.total_variance > T::zero() { l / self.total_variance } else { T::zero() })
            .collect()
    }

    pub fn project_row(&self, row: &[T]) -> Result<Vec<T>> {
        if row.len() != self.dim() {
            return Err(Error::InvalidArgument(format!(
                "row has {} features, model expects {}",
                row.len(),
                self.dim()
            )));
        }
        Ok(self
            .components
            .iter()
            .map(|c| c.iter().zip(row).zip(&self.mean).map(|((&c, &x), &m)| c * (x - m)).sum())
            .collect())
    }
}

/// Symmetric `n x n` matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix<T> {
    pub n: usize,
    pub values: Vec<T>,
}

impl<T: Scalar> SymMatrix<T> {
    pub fn get(&self, i: usize, j: usize) -> T {
        self.values[i * self.n + j]
    }

    pub fn mul_vec(&self, v: &[T]) -> Vec<T> {
        self.values
            .chunks_exact(self.n)
            .map(|row| row.iter().zip(v).map(|(&a, &b)| a * b).sum())
            .collect()
    }

    pub fn trace(&self) -> T {
        (0..self.n).map(|i| self.get(i, i)).sum()
    }
}

fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(&x, &y)| x * y).sum()
}

fn norm<T: Scalar>(a: &[T]) -> T {
    dot(a, a).sqrt()
}

fn orthogonalize<T: Scalar>(v: &mut [T], basis: &[Vec<T>]) {
    // Twice, for stability.
    for _ in 0..2 {
        for b in basis {
            let c = dot(v, b);
            v.iter_mut().zip(b).for_each(|(x, &y)| *x -= c * y);
        }
    }
}

/// Deterministic start vectors: all ones first, then perturbed variants.
fn start_vector<T: Scalar>(n: usize, attempt: usize) -> Vec<T> {
    (0..n)
        .map(|i| {
            if attempt == 0 {
                T::one()
            } else {
                T::one() + T::lit(((i + 1) as f64 * attempt as f64 * 0.754_877_666).sin())
            }
        })
        .collect()
}

fn fix_sign<T: Scalar>(v: &mut [T]) {
    let mut best = 0;
    for i in 1..v.len() {
        if v[i].abs() > v[best].abs() {
            best = i;
        }
    }
    if v[best] < T::zero() {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

/// Eigenvalues, unit eigenvectors and iterations used per pair.
pub type Eigenpairs<T> = (Vec<T>, Vec<Vec<T>>, Vec<usize>);

/// Top-`k` eigenpairs of a symmetric positive semidefinite matrix.
pub fn top_eigenpairs<T: Scalar>(c: &SymMatrix<T>, k: usize) -> Result<Eigenpairs<T>> {
    let n = c.n;
    if k == 0 || k > n {
        return Err(Error::InvalidArgument(format!("k = {k} must be in 1..={n}")));
    }
    let tol = T::lit(1e-12).max(T::epsilon() * T::lit(10.0));
    let scale = c.values.iter().fold(T::zero(), |m, &x| m.max(x.abs())) * T::lit(n as f64);
    let negligible = scale * T::epsilon() * T::lit(n as f64);
    let mut deflated = c.clone();
    let mut values = Vec::with_capacity(k);
    let mut vectors: Vec<Vec<T>> = Vec::with_capacity(k);
    let mut steps = Vec::with_capacity(k);

    for _ in 0..k {
        let mut v = Vec::new();
        for attempt in 0..=n + 1 {
            let mut s = start_vector::<T>(n, attempt);
            orthogonalize(&mut s, &vectors);
            let len = norm(&s);
            if len > T::lit(1e-3) {
                s.iter_mut().for_each(|x| *x /= len);
                let w = deflated.mul_vec(&s);
                // A start vector orthogonal to every non-null direction stalls at zero.
                if norm(&w) > negligible || attempt == n + 1 {
                    v = s;
                    break;
                }
                if v.is_empty() {
                    v = s;
                }
            }
        }
        let mut lambda = T::zero();
        let mut used = 0;
        for it in 1..=MAX_ITERATIONS {
            used = it;
            let mut w = deflated.mul_vec(&v);
            orthogonalize(&mut w, &vectors);
            lambda = dot(&v, &w);
            let residual = w.iter().zip(&v).map(|(&a, &b)| (a - lambda * b) * (a - lambda * b)).sum::<T>().sqrt();
            if residual <= tol * scale {
                break;
            }
            let len = norm(&w);
            if len <= negligible {
                // Remaining spectrum is zero; any orthogonal unit vector is an eigenvector.
                lambda = T::zero();
                break;
            }
            w.iter_mut().for_each(|x| *x /= len);
            v = w;
        }
        fix_sign(&mut v);
        let lambda = lambda.max(T::zero());
        for i in 0..n {
            for j in 0..n {
                deflated.values[i * n + j] -= lambda * v[i] * v[j];
            }
        }
        values.push(lambda);
        vectors.push(v);
        steps.push(used);
    }
    Ok((values, vectors, steps))
}

/// Mean and covariance (divisor `rows`) of a row-major matrix; the outer
/// products are summed in parallel over row blocks.
pub fn covariance<T: Scalar>(data: &[T], rows: usize, cols: usize) -> Result<(Vec<T>, SymMatrix<T>)> {
    if cols == 0 || data.len() != rows * cols {
        return Err(Error::InvalidArgument(format!(
            "{} values do not form a {rows} x {cols} matrix",
            data.len()
        )));
    }
    let count = T::lit(rows as f64);
    let mut mean = vec![T::zero(); cols];
    for row in data.chunks_exact(cols) {
        mean.iter_mut().zip(row).for_each(|(m, &x)| *m += x);
    }
    mean.iter_mut().for_each(|m| *m /= count);
    const BLOCK: usize = 512;
    let blocks: Vec<Vec<T>> = data
        .par_chunks(BLOCK * cols)
        .map(|block| {
            let mut acc = vec![T::zero(); cols * cols];
            let mut centred = vec![T::zero(); cols];
            for row in block.chunks_exact(cols) {
                centred.iter_mut().zip(row.iter().zip(&mean)).for_each(|(c, (&x, &m))| *c = x - m);
                for i in 0..cols {
                    let ci = centred[i];
                    for j in i..cols {
                        acc[i * cols + j] += ci * centred[j];
                    }
                }
            }
            acc
        })
        .collect();
    let mut values = vec![T::zero(); cols * cols];
    for acc in blocks {
        values.iter_mut().zip(acc).for_each(|(v, a)| *v += a);
    }
    symmetrize(&mut values, cols, count);
    Ok((mean, SymMatrix { n: cols, values }))
}

fn symmetrize<T: Scalar>(upper: &mut [T], n: usize, count: T) {
    for i in 0..n {
        for j in i..n {
            let v = upper[i * n + j] / count;
            upper[i * n + j] = v;
            upper[j * n + i] = v;
        }
    }
}

/// Fits `k` components to a row-major `rows x cols` matrix.
pub fn pca_fit<T: Scalar>(data: &[T], rows: usize, cols: usize, k: usize, features: Vec<String>) -> Result<PcaModel<T>> {
    if k == 0 || k > cols {
        return Err(Error::InvalidArgument(format!("k = {k} exceeds the {cols} features")));
    }
    if rows < k + 1 {
        return Err(Error::InvalidArgument(format!("{rows} records are too few for {k} components")));
    }
    let (mean, cov) = covariance(data, rows, cols)?;
    finish(mean, cov, k, features)
}

fn finish<T: Scalar>(mean: Vec<T>, cov: SymMatrix<T>, k: usize, features: Vec<String>) -> Result<PcaModel<T>> {
    let total_variance = cov.trace();
    let (eigenvalues, components, iterations) = top_eigenpairs(&cov, k)?;
    Ok(PcaModel { features, mean, components, eigenvalues, total_variance, iterations })
}

/// Fits on the coefficient columns `indices` (1-based) of a dataset. The
/// cross products are accumulated exactly in integers.
pub fn pca_fit_dataset<T: Scalar>(ds: &Dataset, indices: &[usize], k: usize) -> Result<PcaModel<T>> {
    let cols = indices.len();
    for &n in indices {
        if n == 0 || n > ds.bound() {
            return Err(Error::IndexOutOfRange { index: n, bound: ds.bound() });
        }
    }
    if k == 0 || k > cols {
        return Err(Error::InvalidArgument(format!("k = {k} exceeds the {cols} features")));
    }
    if ds.len() < k + 1 {
        return Err(Error::InvalidArgument(format!("{} records are too few for {k} components", ds.len())));
    }
    let (sums, gram) = (0..ds.len())
        .into_par_iter()
        .fold(
            || (vec![0u64; cols], vec![0u64; cols * cols]),
            |(mut sums, mut gram), i| {
                let a = ds.coefficients(i);
                let nonzero: Vec<(usize, u64)> = indices
                    .iter()
                    .enumerate()
                    .filter_map(|(c, &n)| (a[n - 1] != 0).then_some((c, a[n - 1] as u64)))
                    .collect();
                for (x, &(ci, vi)) in nonzero.iter().enumerate() {
                    sums[ci] += vi;
                    for &(cj, vj) in &nonzero[x..] {
                        gram[ci * cols + cj] += vi * vj;
                    }
                }
                (sums, gram)
            },
        )
        .reduce(
            || (vec![0u64; cols], vec![0u64; cols * cols]),
            |(mut s1, mut g1), (s2, g2)| {
                s1.iter_mut().zip(s2).for_each(|(a, b)| *a += b);
                g1.iter_mut().zip(g2).for_each(|(a, b)| *a += b);
                (s1, g1)
            },
        );
    // cov_ij = (n S_ij - s_i s_j) / n^2, exact up to the final division.
    let n = ds.len() as i128;
    let mut values = vec![T::zero(); cols * cols];
    for i in 0..cols {
        for j in i..cols {
            let num = n * gram[i * cols + j] as i128 - sums[i] as i128 * sums[j] as i128;
            values[i * cols + j] = T::lit(num as f64 / (n * n) as f64);
        }
    }
    symmetrize(&mut values, cols, T::one());
    let mean = sums.iter().map(|&s| T::lit(s as f64 / n as f64)).collect();
    let features = indices.iter().map(|n| format!("a{n}")).collect();
    finish(mean, SymMatrix { n: cols, values }, k, features)
}

/// Row-major `rows x k` coordinates.
pub fn pca_project<T: Scalar>(model: &PcaModel<T>, data: &[T], cols: usize) -> Result<Vec<T>> {
    if cols != model.dim() || !data.len().is_multiple_of(cols.max(1)) {
        return Err(Error::InvalidArgument(format!(
            "matrix has {cols} columns, model expects {}",
            model.dim()
        )));
    }
    let mut out = Vec::with_capacity(data.len() / cols * model.k());
    for row in data.chunks_exact(cols) {
        out.extend(model.project_row(row)?);
    }
    Ok(out)
}

/// Projects the dataset's coefficient columns named by the model.
pub fn pca_project_dataset<T: Scalar>(model: &PcaModel<T>, ds: &Dataset) -> Result<Vec<T>> {
    let indices = model_indices(model, ds.bound())?;
    let mut row = vec![T::zero(); indices.len()];
    let mut out = Vec::with_capacity(ds.len() * model.k());
    for (_, a) in ds.iter() {
        for (x, &n) in row.iter_mut().zip(&indices) {
            *x = T::lit(a[n - 1] as f64);
        }
        out.extend(model.project_row(&row)?);
    }
    Ok(out)
}

fn model_indices<T>(model: &PcaModel<T>, bound: usize) -> Result<Vec<usize>> {
    model
        .features
        .iter()
        .map(|f| {
            let n: usize = f
                .strip_prefix('a')
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| Error::UnknownFeature(f.clone()))?;
            if n == 0 || n > bound {
                return Err(Error::IndexOutOfRange { index: n, bound });
            }
            Ok(n)
        })
        .collect()
}

/// Plot data: `d,h,pc1,...,pck`.
pub fn projection_csv<T: Scalar>(ds: &Dataset, coords: &[T], k: usize) -> String {
    let mut out = String::from("d,h");
    for c in 1..=k {
        out.push_str(&format!(",pc{c}"));
    }
    out.push('\n');
    for (r, row) in ds.records().iter().zip(coords.chunks_exact(k)) {
        out.push_str(&format!("{},{}", r.d, r.h));
        for x in row {
            out.push_str(&format!(",{x}"));
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{generate, rng, GenerateConfig};
    use proptest::prelude::*;
    use rand::Rng;

    /// Cyclic Jacobi rotations; returns eigenvalues and column eigenvectors.
    fn jacobi(a: &[f64], n: usize) -> (Vec<f64>, Vec<Vec<f64>>) {
        let mut a = a.to_vec();
        let mut v = vec![0.0; n * n];
        (0..n).for_each(|i| v[i * n + i] = 1.0);
        for _ in 0..100 {
            let off: f64 = (0..n).flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
                .map(|(i, j)| a[i * n + j].powi(2))
                .sum();
            if off < 1e-30 {
                break;
            }
            for p in 0..n {
                for q in p + 1..n {
                    let apq = a[p * n + q];
                    if apq.abs() < 1e-300 {
                        continue;
                    }
                    let theta = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
                    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                    let t = if theta == 0.0 { 1.0 } else { t };
                    let c = 1.0 / (t * t + 1.0).sqrt();
                    let s = t * c;
                    for k in 0..n {
                        let (akp, akq) = (a[k * n + p], a[k * n + q]);
                        a[k * n + p] = c * akp - s * akq;
                        a[k * n + q] = s * akp + c * akq;
                    }
                    for k in 0..n {
                        let (apk, aqk) = (a[p * n + k], a[q * n + k]);
                        a[p * n + k] = c * apk - s * aqk;
                        a[q * n + k] = s * apk + c * aqk;
                    }
                    for k in 0..n {
                        let (vkp, vkq) = (v[k * n + p], v[k * n + q]);
                        v[k * n + p] = c * vkp - s * vkq;
                        v[k * n + q] = s * vkp + c * vkq;
                    }
                }
            }
        }
        let mut pairs: Vec<(f64, Vec<f64>)> =
            (0..n).map(|j| (a[j * n + j], (0..n).map(|i| v[i * n + j]).collect())).collect();
        pairs.sort_by(|x, y| y.0.total_cmp(&x.0));
        pairs.into_iter().unzip()
    }

    fn random_data(seed: u64, rows: usize, cols: usize) -> Vec<f64> {
        let mut r = rng(seed);
        // Distinct column scales keep the spectrum well separated.
        (0..rows * cols).map(|i| r.gen_range(-1.0..1.0) * (1.0 + (i % cols) as f64)).collect()
    }

    fn check_invariants(m: &PcaModel<f64>, cov: &SymMatrix<f64>) {
        for (a, u) in m.components.iter().enumerate() {
            for (b, w) in m.components.iter().enumerate() {
                let expected = if a == b { 1.0 } else { 0.0 };
                assert!((dot(u, w) - expected).abs() <= 1e-10);
            }
            let cu = cov.mul_vec(u);
            let res: f64 = cu.iter().zip(u).map(|(x, y)| (x - m.eigenvalues[a] * y).powi(2)).sum::<f64>().sqrt();
            assert!(res <= 1e-8 * m.eigenvalues[0].max(1.0), "residual {res}");
        }
        assert!(m.eigenvalues.windows(2).all(|w| w[0] >= w[1]));
        assert!(m.eigenvalues.iter().all(|&l| l >= 0.0));
    }

    #[test]
    fn agrees_with_jacobi_on_5x5() {
        for seed in 0..20 {
            let data = random_data(seed, 40, 5);
            let m = pca_fit(&data, 40, 5, 5, vec![]).unwrap();
            let (_, cov) = covariance(&data, 40, 5).unwrap();
            check_invariants(&m, &cov);
            let (vals, vecs) = jacobi(&cov.values, 5);
            for i in 0..5 {
                assert!((vals[i] - m.eigenvalues[i]).abs() <= 1e-8, "seed {seed}");
                let sign = dot(&vecs[i], &m.components[i]).signum();
                for j in 0..5 {
                    assert!((sign * vecs[i][j] - m.components[i][j]).abs() <= 1e-8, "seed {seed}");
                }
            }
        }
    }

    #[test]
    fn points_on_a_line() {
        let data: Vec<f64> = (0..10).flat_map(|t| [t as f64, 2.0 * t as f64]).collect();
        let m = pca_fit(&data, 10, 2, 2, vec![]).unwrap();
        assert!(m.eigenvalues[0] > 0.0);
        assert!(m.eigenvalues[1].abs() < 1e-12);
        let s = 5f64.sqrt();
        assert!((m.components[0][0] - 1.0 / s).abs() < 1e-12);
        assert!((m.components[0][1] - 2.0 / s).abs() < 1e-12);
        assert!(dot(&m.components[0], &m.components[1]).abs() < 1e-12);
        assert!((m.explained_variance_ratio()[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn projection_basics() {
        let data = random_data(3, 30, 4);
        let m = pca_fit(&data, 30, 4, 3, vec![]).unwrap();
        let origin = m.project_row(&m.mean).unwrap();
        assert!(origin.iter().all(|x| x.abs() < 1e-12));
        let shifted: Vec<f64> = m.mean.iter().zip(&m.components[1]).map(|(a, b)| a + b).collect();
        let p = m.project_row(&shifted).unwrap();
        assert!((p[1] - 1.0).abs() < 1e-12 && p[0].abs() < 1e-10 && p[2].abs() < 1e-10);
        assert!(pca_project(&m, &data, 5).is_err());
        assert!(pca_fit(&data, 30, 4, 5, vec![]).is_err());
        assert!(pca_fit(&data[..8], 2, 4, 2, vec![]).is_err());
    }

    #[test]
    fn translation_invariant() {
        let data = random_data(9, 25, 3);
        let shifted: Vec<f64> = data.iter().enumerate().map(|(i, x)| x + [5.0, -2.0, 100.0][i % 3]).collect();
        let a = pca_fit(&data, 25, 3, 3, vec![]).unwrap();
        let b = pca_fit(&shifted, 25, 3, 3, vec![]).unwrap();
        let pa = pca_project(&a, &data, 3).unwrap();
        let pb = pca_project(&b, &shifted, 3).unwrap();
        for (x, y) in pa.iter().zip(&pb) {
            assert!((x - y).abs() < 1e-9);
        }
    }

    #[test]
    fn beats_random_directions() {
        let data = random_data(11, 50, 6);
        let m = pca_fit(&data, 50, 6, 2, vec![]).unwrap();
        let (_, cov) = covariance(&data, 50, 6).unwrap();
        let captured: f64 = m.eigenvalues.iter().sum();
        let mut r = rng(12);
        for _ in 0..500 {
            let mut basis: Vec<Vec<f64>> = Vec::new();
            for _ in 0..2 {
                let mut v: Vec<f64> = (0..6).map(|_| r.gen_range(-1.0..1.0)).collect();
                orthogonalize(&mut v, &basis);
                let l = norm(&v);
                v.iter_mut().for_each(|x| *x /= l);
                basis.push(v);
            }
            let random: f64 = basis.iter().map(|v| dot(v, &cov.mul_vec(v))).sum();
            assert!(random <= captured + 1e-12);
        }
    }

    #[test]
    fn dataset_fit_matches_dense_fit() {
        let ds = generate(&GenerateConfig::new(3000, [1, 2])).unwrap();
        let indices: Vec<usize> = (1..=30).collect();
        let m = pca_fit_dataset::<f64>(&ds, &indices, 3).unwrap();
        let dense: Vec<f64> = ds.iter().flat_map(|(_, a)| a[..30].iter().map(|&x| x as f64).collect::<Vec<_>>()).collect();
        let d = pca_fit(&dense, ds.len(), 30, 3, vec![]).unwrap();
        for i in 0..3 {
            assert!((m.eigenvalues[i] - d.eigenvalues[i]).abs() < 1e-9);
        }
        let coords = pca_project_dataset(&m, &ds).unwrap();
        let csv = projection_csv(&ds, &coords, 3);
        assert!(csv.starts_with("d,h,pc1,pc2,pc3\n"));
        assert_eq!(csv.lines().count(), ds.len() + 1);
        let json = serde_json::to_string(&m).unwrap();
        assert_eq!(serde_json::from_str::<PcaModel<f64>>(&json).unwrap(), m);
        let m32 = pca_fit_dataset::<f32>(&ds, &indices, 3).unwrap();
        assert!(((m32.eigenvalues[0] as f64) - m.eigenvalues[0]).abs() < 1e-3 * m.eigenvalues[0]);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn orthonormal_with_small_residuals(seed in 0u64..10_000, rows in 6usize..40, cols in 2usize..7) {
            let data = random_data(seed, rows, cols);
            let k = cols.min(rows - 1).min(3);
            let m = pca_fit(&data, rows, cols, k, vec![]).unwrap();
            let (_, cov) = covariance(&data, rows, cols).unwrap();
            check_invariants(&m, &cov);
        }
    }
}
