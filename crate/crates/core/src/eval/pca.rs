//! Two-component PCA for eyeballing feature separability.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Projection {
    pub points: Vec<[f64; 2]>,
    /// Loadings of the two leading components (unit vectors).
    pub components: [Vec<f64>; 2],
    /// Eigenvalues of the sample covariance, descending.
    pub eigenvalues: Vec<f64>,
    /// Share of total variance carried by each of the two components.
    pub explained_variance_ratio: [f64; 2],
}

/// Projects rows of `features` onto the two leading principal components of
/// their covariance. Each component's sign is fixed so its first loading with
/// magnitude above 1e-12 is positive.
pub fn project<R: AsRef<[f64]>>(features: &[R]) -> Result<Projection> {
    let n = features.len();
    if n < 3 {
        return Err(Error::InvalidInput(format!(
            "projection needs at least 3 points, got {n}"
        )));
    }
    let dim = features[0].as_ref().len();
    if dim == 0 || features.iter().any(|f| f.as_ref().len() != dim) {
        return Err(Error::InvalidInput("features must share a non-zero dimension".into()));
    }
    let data = DMatrix::from_fn(n, dim, |i, j| features[i].as_ref()[j]);
    let mean = data.row_mean();
    let centered = DMatrix::from_fn(n, dim, |i, j| data[(i, j)] - mean[j]);
    let cov = centered.transpose() * &centered / (n - 1) as f64;
    let eig = SymmetricEigen::new(cov);

    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]).then(a.cmp(&b)));
    let eigenvalues: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i].max(0.0)).collect();

    let component = |rank: usize| -> Vec<f64> {
        if rank >= dim {
            return vec![0.0; dim];
        }
        let mut v: Vec<f64> = eig.eigenvectors.column(order[rank]).iter().copied().collect();
        if let Some(first) = v.iter().find(|x| x.abs() > 1e-12) {
            if *first < 0.0 {
                v.iter_mut().for_each(|x| *x = -*x);
            }
        }
        v
    };
    let components = [component(0), component(1)];

    let points = (0..n)
        .map(|i| {
            let row = centered.row(i);
            let dot = |c: &[f64]| row.iter().zip(c).map(|(a, b)| a * b).sum::<f64>();
            [dot(&components[0]), dot(&components[1])]
        })
        .collect();

    let total: f64 = eigenvalues.iter().sum();
    let ratio = |k: usize| {
        if total > 0.0 {
            eigenvalues.get(k).copied().unwrap_or(0.0) / total
        } else {
            0.0
        }
    };
    Ok(Projection {
        points,
        components,
        explained_variance_ratio: [ratio(0), ratio(1)],
        eigenvalues,
    })
}
