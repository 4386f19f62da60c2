//! Lloyd's k-means with k-means++ seeding.

use rand::Rng as _;

use super::windows::WindowSet;
use crate::error::{Error, Result};
use crate::rng::{substream, tag, Rng};

#[derive(Debug, Clone, PartialEq)]
pub struct KMeansConfig {
    pub k: usize,
    pub seed: u64,
    pub max_iters: usize,
    /// Stop once no center moves farther than this (Euclidean, data units).
    pub tol: f64,
    /// Independent seedings; the lowest final inertia wins.
    pub restarts: usize,
}

impl KMeansConfig {
    pub fn new(k: usize, seed: u64) -> Self {
        KMeansConfig {
            k,
            seed,
            max_iters: 300,
            tol: 1e-6,
            restarts: 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KMeansFit {
    pub centers: Vec<Vec<f64>>,
    pub iterations_run: usize,
    pub final_inertia: f64,
    /// Inertia after every assignment step, ending with the final centers.
    pub inertia_trace: Vec<f64>,
    pub restart: usize,
}

#[inline]
pub(crate) fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Index of the nearest center; ties go to the lowest index.
#[inline]
pub(crate) fn nearest(centers: &[Vec<f64>], x: &[f64]) -> (usize, f64) {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (i, c) in centers.iter().enumerate() {
        let d = sq_dist(c, x);
        if d < best_d {
            best = i;
            best_d = d;
        }
    }
    (best, best_d)
}

pub fn kmeans(points: &WindowSet, config: &KMeansConfig) -> Result<KMeansFit> {
    let n = points.len();
    if config.k == 0 {
        return Err(Error::Config("k must be positive".into()));
    }
    if n < config.k {
        return Err(Error::InsufficientData(format!(
            "{n} windows cannot form {} clusters",
            config.k
        )));
    }
    if let Some(bad) = points.iter().flatten().find(|v| !v.is_finite()) {
        return Err(Error::InvalidInput(format!("non-finite window value {bad}")));
    }
    let mut best: Option<KMeansFit> = None;
    for restart in 0..config.restarts.max(1) {
        let mut rng = substream(config.seed, tag::KMEANS, restart as u64);
        let init = kmeans_plus_plus(points, config.k, &mut rng)?;
        let fit = lloyd(points, init, config, restart);
        if best
            .as_ref()
            .is_none_or(|b| fit.final_inertia < b.final_inertia)
        {
            best = Some(fit);
        }
    }
    Ok(best.expect("at least one restart"))
}

fn kmeans_plus_plus(points: &WindowSet, k: usize, rng: &mut Rng) -> Result<Vec<Vec<f64>>> {
    let n = points.len();
    let mut centers = Vec::with_capacity(k);
    centers.push(points.get(rng.random_range(0..n)).to_vec());
    let mut d2: Vec<f64> = points.iter().map(|p| sq_dist(p, &centers[0])).collect();
    while centers.len() < k {
        let total: f64 = d2.iter().sum();
        if total <= 0.0 {
            return Err(Error::InsufficientData(format!(
                "only {} distinct windows for {k} clusters",
                centers.len()
            )));
        }
        let target = rng.random::<f64>() * total;
        let mut acc = 0.0;
        let mut chosen = None;
        for (i, d) in d2.iter().enumerate() {
            acc += d;
            if acc > target && *d > 0.0 {
                chosen = Some(i);
                break;
            }
        }
        // rounding can leave `target` past the final partial sum
        let chosen = chosen.unwrap_or_else(|| d2.iter().rposition(|d| *d > 0.0).unwrap());
        let c = points.get(chosen).to_vec();
        for (i, p) in points.iter().enumerate() {
            let d = sq_dist(p, &c);
            if d < d2[i] {
                d2[i] = d;
            }
        }
        centers.push(c);
    }
    Ok(centers)
}

fn assign(points: &WindowSet, centers: &[Vec<f64>], labels: &mut [usize], dist: &mut [f64]) -> f64 {
    let mut inertia = 0.0;
    for (i, p) in points.iter().enumerate() {
        let (c, d) = nearest(centers, p);
        labels[i] = c;
        dist[i] = d;
        inertia += d;
    }
    inertia
}

fn lloyd(points: &WindowSet, mut centers: Vec<Vec<f64>>, config: &KMeansConfig, restart: usize) -> KMeansFit {
    let n = points.len();
    let k = centers.len();
    let w = points.width();
    let mut labels = vec![0usize; n];
    let mut dist = vec![0.0f64; n];
    let mut trace = Vec::new();
    let mut iterations_run = 0;

    for _ in 0..config.max_iters {
        iterations_run += 1;
        trace.push(assign(points, &centers, &mut labels, &mut dist));

        let mut sums = vec![vec![0.0; w]; k];
        let mut counts = vec![0usize; k];
        for (p, &c) in points.iter().zip(&labels) {
            counts[c] += 1;
            for (s, v) in sums[c].iter_mut().zip(p) {
                *s += v;
            }
        }

        // Empty clusters take the points currently worst served by their center.
        let empties: Vec<usize> = (0..k).filter(|&c| counts[c] == 0).collect();
        let mut taken: Vec<usize> = Vec::new();
        for &c in &empties {
            let far = (0..n)
                .filter(|i| !taken.contains(i))
                .max_by(|&a, &b| dist[a].total_cmp(&dist[b]).then(b.cmp(&a)))
                .expect("n >= k");
            taken.push(far);
            sums[c] = points.get(far).to_vec();
            counts[c] = 1;
        }

        let mut shift: f64 = 0.0;
        for c in 0..k {
            let inv = 1.0 / counts[c] as f64;
            let next: Vec<f64> = sums[c].iter().map(|s| s * inv).collect();
            shift = shift.max(sq_dist(&next, &centers[c]).sqrt());
            centers[c] = next;
        }
        if shift < config.tol {
            break;
        }
    }
    let final_inertia = assign(points, &centers, &mut labels, &mut dist);
    trace.push(final_inertia);
    KMeansFit {
        centers,
        iterations_run,
        final_inertia,
        inertia_trace: trace,
        restart,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn distinct_points_become_centers() {
        let pts = WindowSet::from_rows(&[[0.0, 1.0], [5.0, 5.0], [-3.0, 2.0], [9.0, -1.0]]);
        let fit = kmeans(&pts, &KMeansConfig::new(4, 1)).unwrap();
        assert_eq!(fit.final_inertia, 0.0);
        let mut got = fit.centers.clone();
        got.sort_by(|a, b| a[0].total_cmp(&b[0]));
        assert_eq!(got, vec![vec![-3.0, 2.0], vec![0.0, 1.0], vec![5.0, 5.0], vec![9.0, -1.0]]);
    }

    #[test]
    fn two_groups_in_one_dimension() {
        // Exhaustive check over all 2-partitions of {0,0,10,10}: {0,0}|{10,10}
        // has inertia 0, every other split is positive.
        let values = [0.0, 0.0, 10.0, 10.0];
        let mut best = (f64::INFINITY, 0u32);
        for mask in 1u32..15 {
            let (mut a, mut b) = (vec![], vec![]);
            for (i, v) in values.iter().enumerate() {
                if mask & (1 << i) != 0 { a.push(*v) } else { b.push(*v) }
            }
            let cost = |g: &[f64]| {
                let m = g.iter().sum::<f64>() / g.len() as f64;
                g.iter().map(|x| (x - m).powi(2)).sum::<f64>()
            };
            let c = cost(&a) + cost(&b);
            if c < best.0 {
                best = (c, mask);
            }
        }
        assert_eq!(best.0, 0.0);

        let pts = WindowSet::from_rows(&[[0.0], [0.0], [10.0], [10.0]]);
        let fit = kmeans(&pts, &KMeansConfig::new(2, 3)).unwrap();
        let mut centers: Vec<f64> = fit.centers.iter().map(|c| c[0]).collect();
        centers.sort_by(f64::total_cmp);
        assert_eq!(centers, vec![0.0, 10.0]);
        assert_eq!(fit.final_inertia, best.0);
    }

    #[test]
    fn too_few_points() {
        let pts = WindowSet::from_rows(&[[1.0, 2.0]; 5]);
        assert!(matches!(
            kmeans(&pts, &KMeansConfig::new(10, 0)),
            Err(Error::InsufficientData(_))
        ));
        // enough points, but not enough distinct ones
        let dup = WindowSet::from_rows(&[[1.0, 2.0]; 12]);
        assert!(matches!(
            kmeans(&dup, &KMeansConfig::new(10, 0)),
            Err(Error::InsufficientData(_))
        ));
    }

    #[test]
    fn seeded_runs_are_identical() {
        let rows: Vec<[f64; 3]> = (0..200)
            .map(|i| {
                let x = (i as f64 * 0.37).sin() * 10.0;
                [x, (i % 7) as f64, (i as f64).sqrt()]
            })
            .collect();
        let pts = WindowSet::from_rows(&rows);
        let a = kmeans(&pts, &KMeansConfig::new(6, 42)).unwrap();
        let b = kmeans(&pts, &KMeansConfig::new(6, 42)).unwrap();
        assert_eq!(a, b);
        for pair in a.inertia_trace.windows(2) {
            assert!(pair[1] <= pair[0]);
        }
    }
}
