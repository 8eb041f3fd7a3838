//! Intensity clustering: fuzzy C-means plus the K-means and Otsu baselines,
//! and the glue that turns a clustering into a foreground mask.

mod fcm;
mod kmeans;
mod otsu;

pub use fcm::{
    fcm_fit, fcm_fit_with_centers, fcm_objective, ClusterModel, FcmParams, MembershipMatrix,
};
pub use kmeans::{kmeans_fit, KMeansFit};
pub use otsu::otsu_threshold;

use crate::error::{Error, Result};
use crate::raster::BinaryMask;

/// Crisp cluster index per sample.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HardAssignment {
    labels: Vec<usize>,
    clusters: usize,
}

impl HardAssignment {
    pub fn new(labels: Vec<usize>, clusters: usize) -> Result<Self> {
        if let Some(&bad) = labels.iter().find(|&&l| l >= clusters) {
            return Err(Error::IndexOutOfRange {
                index: bad,
                clusters,
            });
        }
        Ok(Self { labels, clusters })
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn clusters(&self) -> usize {
        self.clusters
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }
}

/// Per-row argmax of the memberships; ties go to the lowest cluster index.
pub fn defuzzify(memberships: &MembershipMatrix) -> HardAssignment {
    let labels = memberships
        .rows()
        .map(|row| {
            let mut best = 0;
            for (j, &u) in row.iter().enumerate().skip(1) {
                if u > row[best] {
                    best = j;
                }
            }
            best
        })
        .collect();
    HardAssignment {
        labels,
        clusters: memberships.cols(),
    }
}

/// Which cluster is kept as vertebral bone.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SelectionPolicy {
    /// Bone marrow is the brightest class on T1-weighted slices.
    #[default]
    Brightest,
    Explicit(usize),
}

pub fn select_vertebra_cluster(centers: &[f64], policy: SelectionPolicy) -> Result<usize> {
    if centers.is_empty() {
        return Err(Error::EmptyInput);
    }
    match policy {
        SelectionPolicy::Brightest => {
            let mut best = 0;
            for (j, &c) in centers.iter().enumerate().skip(1) {
                if c > centers[best] {
                    best = j;
                }
            }
            Ok(best)
        }
        SelectionPolicy::Explicit(index) if index < centers.len() => Ok(index),
        SelectionPolicy::Explicit(index) => Err(Error::IndexOutOfRange {
            index,
            clusters: centers.len(),
        }),
    }
}

pub fn mask_from_assignment(
    assign: &HardAssignment,
    cluster: usize,
    width: usize,
    height: usize,
) -> Result<BinaryMask> {
    if width.checked_mul(height) != Some(assign.len()) {
        return Err(Error::DimensionMismatch(format!(
            "{} labels for a {width}x{height} mask",
            assign.len()
        )));
    }
    BinaryMask::new(
        width,
        height,
        assign.labels.iter().map(|&l| l == cluster).collect(),
    )
}

pub(crate) fn distinct_count(data: &[f64]) -> usize {
    let mut sorted = data.to_vec();
    sorted.sort_by(f64::total_cmp);
    sorted.dedup();
    sorted.len()
}

pub(crate) fn check_data(data: &[f64], clusters: usize) -> Result<()> {
    if clusters < 1 {
        return Err(Error::InvalidParams("at least one cluster required".into()));
    }
    if data.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidParams("data must be finite".into()));
    }
    let distinct = distinct_count(data);
    if data.len() < clusters || distinct < clusters {
        return Err(Error::DegenerateData { distinct, clusters });
    }
    Ok(())
}

/// Starting centers at the (j + 0.5) / M quantiles of the data. When the
/// plain quantiles collide (heavy ties), the same quantiles are taken over
/// the distinct values instead, which always yields M distinct centers.
pub(crate) fn quantile_centers(data: &[f64], clusters: usize) -> Vec<f64> {
    let mut sorted = data.to_vec();
    sorted.sort_by(f64::total_cmp);
    let pick = |values: &[f64]| -> Vec<f64> {
        (0..clusters)
            .map(|j| {
                let q = (j as f64 + 0.5) / clusters as f64;
                let idx = ((q * values.len() as f64).floor() as usize).min(values.len() - 1);
                values[idx]
            })
            .collect()
    };
    let centers = pick(&sorted);
    if centers.windows(2).all(|w| w[0] < w[1]) {
        return centers;
    }
    sorted.dedup();
    pick(&sorted)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defuzzify_argmax_with_low_tie_break() {
        let m = MembershipMatrix::from_rows(&[vec![0.9, 0.1]]).unwrap();
        assert_eq!(defuzzify(&m).labels(), &[0]);
        let m = MembershipMatrix::from_rows(&[vec![0.5, 0.5]]).unwrap();
        assert_eq!(defuzzify(&m).labels(), &[0]);
        let m = MembershipMatrix::from_rows(&[vec![0.2, 0.8], vec![0.7, 0.3]]).unwrap();
        assert_eq!(defuzzify(&m).labels(), &[1, 0]);
    }

    #[test]
    fn selection_policies() {
        assert_eq!(
            select_vertebra_cluster(&[12.0, 180.0, 90.0], SelectionPolicy::Brightest).unwrap(),
            1
        );
        assert_eq!(
            select_vertebra_cluster(&[50.0], SelectionPolicy::default()).unwrap(),
            0
        );
        assert_eq!(
            select_vertebra_cluster(&[1.0, 2.0], SelectionPolicy::Explicit(0)).unwrap(),
            0
        );
        assert!(matches!(
            select_vertebra_cluster(&[1.0, 2.0], SelectionPolicy::Explicit(5)),
            Err(Error::IndexOutOfRange {
                index: 5,
                clusters: 2
            })
        ));
    }

    #[test]
    fn mask_from_assignment_cases() {
        let a = HardAssignment::new(vec![0, 1, 1, 0], 2).unwrap();
        let m = mask_from_assignment(&a, 1, 2, 2).unwrap();
        assert_eq!(m.bits(), &[false, true, true, false]);

        let a = HardAssignment::new(vec![0, 0, 0, 0], 3).unwrap();
        assert_eq!(mask_from_assignment(&a, 2, 2, 2).unwrap().count(), 0);

        assert!(matches!(
            mask_from_assignment(&a, 0, 3, 2),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn quantile_centers_are_distinct() {
        assert_eq!(quantile_centers(&[0.0, 100.0], 2), vec![0.0, 100.0]);
        assert_eq!(quantile_centers(&[5.0, 5.0, 5.0, 9.0], 2), vec![5.0, 9.0]);
        assert_eq!(
            quantile_centers(&[1.0, 1.0, 1.0, 1.0, 1.0, 2.0, 3.0], 3),
            vec![1.0, 2.0, 3.0]
        );
    }
}
