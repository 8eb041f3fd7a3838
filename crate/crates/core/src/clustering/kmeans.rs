//! Lloyd's K-means on scalar intensities.

use super::{check_data, quantile_centers, HardAssignment};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct KMeansFit {
    pub assignment: HardAssignment,
    pub centers: Vec<f64>,
    pub iterations: usize,
    /// Within-cluster sum of squares of the final assignment.
    pub wcss: f64,
    /// WCSS after initialisation and after every Lloyd step.
    pub wcss_trace: Vec<f64>,
}

fn nearest(x: f64, centers: &[f64]) -> usize {
    let mut best = 0;
    let mut best_d = (x - centers[0]).abs();
    for (j, &c) in centers.iter().enumerate().skip(1) {
        let d = (x - c).abs();
        if d < best_d {
            best = j;
            best_d = d;
        }
    }
    best
}

fn assign(data: &[f64], centers: &[f64], labels: &mut [usize]) {
    for (l, &x) in labels.iter_mut().zip(data) {
        *l = nearest(x, centers);
    }
}

fn wcss(data: &[f64], labels: &[usize], centers: &[f64]) -> f64 {
    data.iter()
        .zip(labels)
        .map(|(&x, &l)| (x - centers[l]) * (x - centers[l]))
        .sum()
}

/// Runs Lloyd iterations from quantile centers until the assignment stops
/// changing or `max_iterations` center updates have run. Ties go to the
/// lower cluster index; an emptied cluster keeps its center.
///
/// `seed` is accepted for interface parity with randomised starts and does
/// not affect the deterministic quantile initialisation.
pub fn kmeans_fit(
    data: &[f64],
    clusters: usize,
    max_iterations: usize,
    _seed: u64,
) -> Result<KMeansFit> {
    if clusters < 1 {
        return Err(Error::InvalidParams(
            "k-means needs at least one cluster".into(),
        ));
    }
    check_data(data, clusters)?;

    let mut centers = quantile_centers(data, clusters);
    let mut labels = vec![0usize; data.len()];
    assign(data, &centers, &mut labels);
    let mut trace = vec![wcss(data, &labels, &centers)];
    let mut next = labels.clone();
    let mut iterations = 0;

    while iterations < max_iterations {
        let mut sum = vec![0.0; clusters];
        let mut count = vec![0usize; clusters];
        for (&x, &l) in data.iter().zip(&labels) {
            sum[l] += x;
            count[l] += 1;
        }
        for j in 0..clusters {
            if count[j] > 0 {
                centers[j] = sum[j] / count[j] as f64;
            }
        }
        iterations += 1;
        assign(data, &centers, &mut next);
        trace.push(wcss(data, &next, &centers));
        if next == labels {
            break;
        }
        std::mem::swap(&mut labels, &mut next);
    }

    let final_wcss = wcss(data, &labels, &centers);
    Ok(KMeansFit {
        assignment: HardAssignment::new(labels, clusters)?,
        centers,
        iterations,
        wcss: final_wcss,
        wcss_trace: trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Best WCSS over every split of the points into two non-empty groups.
    fn enumerate_two_partitions(data: &[f64]) -> f64 {
        let n = data.len();
        let mut best = f64::INFINITY;
        for mask in 1..(1u32 << n) - 1 {
            let mut total = 0.0;
            for side in [true, false] {
                let members: Vec<f64> = (0..n)
                    .filter(|&i| ((mask >> i) & 1 == 1) == side)
                    .map(|i| data[i])
                    .collect();
                let mean = members.iter().sum::<f64>() / members.len() as f64;
                total += members.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>();
            }
            best = best.min(total);
        }
        best
    }

    fn sorted(mut v: Vec<f64>) -> Vec<f64> {
        v.sort_by(f64::total_cmp);
        v
    }

    #[test]
    fn four_point_examples_hit_global_optimum() {
        let fit = kmeans_fit(&[0.0, 1.0, 10.0, 11.0], 2, 100, 0).unwrap();
        assert_eq!(sorted(fit.centers.clone()), vec![0.5, 10.5]);
        assert!((fit.wcss - enumerate_two_partitions(&[0.0, 1.0, 10.0, 11.0])).abs() < 1e-9);

        let fit = kmeans_fit(&[5.0, 5.0, 5.0, 9.0], 2, 100, 0).unwrap();
        assert_eq!(sorted(fit.centers.clone()), vec![5.0, 9.0]);
        assert!((fit.wcss - enumerate_two_partitions(&[5.0, 5.0, 5.0, 9.0])).abs() < 1e-9);
    }

    #[test]
    fn too_few_distinct_values() {
        assert!(matches!(
            kmeans_fit(&[3.0, 3.0], 2, 10, 0),
            Err(Error::DegenerateData {
                distinct: 1,
                clusters: 2
            })
        ));
        assert!(matches!(
            kmeans_fit(&[3.0], 2, 10, 0),
            Err(Error::DegenerateData { .. })
        ));
    }

    #[test]
    fn stops_when_assignment_is_stable() {
        let fit = kmeans_fit(&[0.0, 1.0, 10.0, 11.0], 2, 100, 0).unwrap();
        assert_eq!(fit.iterations, 1);
        assert_eq!(fit.assignment.labels(), &[0, 0, 1, 1]);
    }

    proptest! {
        #[test]
        fn wcss_never_increases(data in proptest::collection::vec(0u8..=255, 4..300), m in 2usize..6) {
            let data: Vec<f64> = data.into_iter().map(f64::from).collect();
            prop_assume!(super::super::distinct_count(&data) >= m);
            let fit = kmeans_fit(&data, m, 50, 0).unwrap();
            for w in fit.wcss_trace.windows(2) {
                prop_assert!(w[1] <= w[0] + 1e-9 * w[0].max(1.0));
            }
            prop_assert!(fit.assignment.labels().iter().all(|&l| l < m));
        }
    }
}
