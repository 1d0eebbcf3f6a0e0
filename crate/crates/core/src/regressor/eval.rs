use serde::{Deserialize, Serialize};

use super::dataset::Dataset;
use super::network::Predictor;
use crate::error::{Error, Result};

/// Predicted depth at or above which the sensor is considered touching.
/// Halfway between the 0 mm non-contact label and the 1 mm shallowest
/// contact label.
pub const DEFAULT_CONTACT_THRESHOLD: f64 = 0.5;

pub fn is_contact(depth_hat: f64) -> bool {
    is_contact_at(depth_hat, DEFAULT_CONTACT_THRESHOLD)
}

pub fn is_contact_at(depth_hat: f64, threshold: f64) -> bool {
    depth_hat >= threshold
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinStat {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
    pub mae_depth: f64,
    pub mae_angle: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    /// Over contact samples only, mm.
    pub mae_depth: f64,
    /// Over contact samples only, degrees.
    pub mae_angle: f64,
    /// Over all samples.
    pub contact_accuracy: f64,
    pub n_contact: usize,
    pub n_noncontact: usize,
    /// Mean depth prediction on non-contact samples.
    pub noncontact_mean_depth: f64,
    pub by_depth: Vec<BinStat>,
    pub by_angle: Vec<BinStat>,
}

const DEPTH_EDGES: [f64; 5] = [1.0, 2.0, 3.0, 4.0, 5.0];
const ANGLE_EDGES: [f64; 11] = [-25.0, -20.0, -15.0, -10.0, -5.0, 0.0, 5.0, 10.0, 15.0, 20.0, 25.0];

struct Acc {
    count: usize,
    depth: f64,
    angle: f64,
}

fn bin_index(edges: &[f64], v: f64) -> Option<usize> {
    let last = edges.len() - 1;
    if v < edges[0] || v > edges[last] {
        return None;
    }
    Some(edges.windows(2).position(|w| v < w[1]).unwrap_or(last - 1))
}

fn finish(edges: &[f64], accs: Vec<Acc>) -> Vec<BinStat> {
    accs.into_iter()
        .enumerate()
        .map(|(i, a)| {
            let n = a.count.max(1) as f64;
            BinStat {
                lo: edges[i],
                hi: edges[i + 1],
                count: a.count,
                mae_depth: a.depth / n,
                mae_angle: a.angle / n,
            }
        })
        .collect()
}

pub fn evaluate<P: Predictor + ?Sized>(model: &P, test_set: &Dataset) -> Result<EvalReport> {
    evaluate_with_threshold(model, test_set, DEFAULT_CONTACT_THRESHOLD)
}

pub fn evaluate_with_threshold<P: Predictor + ?Sized>(
    model: &P,
    test_set: &Dataset,
    threshold: f64,
) -> Result<EvalReport> {
    if test_set.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let new_accs = |n: usize| -> Vec<Acc> {
        (0..n)
            .map(|_| Acc {
                count: 0,
                depth: 0.0,
                angle: 0.0,
            })
            .collect()
    };
    let mut by_depth = new_accs(DEPTH_EDGES.len() - 1);
    let mut by_angle = new_accs(ANGLE_EDGES.len() - 1);
    let (mut n_contact, mut n_non, mut correct) = (0usize, 0usize, 0usize);
    let (mut sum_d, mut sum_a, mut non_depth) = (0.0, 0.0, 0.0);
    for s in &test_set.samples {
        let p = model.predict(&s.features)?;
        if is_contact_at(p.depth, threshold) == s.is_contact() {
            correct += 1;
        }
        if !s.is_contact() {
            n_non += 1;
            non_depth += p.depth;
            continue;
        }
        n_contact += 1;
        let ed = (p.depth - s.depth).abs();
        let ea = (p.angle - s.angle).abs();
        sum_d += ed;
        sum_a += ea;
        for (edges, accs, key) in [
            (&DEPTH_EDGES[..], &mut by_depth, s.depth),
            (&ANGLE_EDGES[..], &mut by_angle, s.angle),
        ] {
            if let Some(i) = bin_index(edges, key) {
                accs[i].count += 1;
                accs[i].depth += ed;
                accs[i].angle += ea;
            }
        }
    }
    let nc = n_contact.max(1) as f64;
    Ok(EvalReport {
        mae_depth: sum_d / nc,
        mae_angle: sum_a / nc,
        contact_accuracy: correct as f64 / test_set.len() as f64,
        n_contact,
        n_noncontact: n_non,
        noncontact_mean_depth: if n_non > 0 { non_depth / n_non as f64 } else { 0.0 },
        by_depth: finish(&DEPTH_EDGES, by_depth),
        by_angle: finish(&ANGLE_EDGES, by_angle),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::regressor::dataset::generate_dataset;
    use crate::regressor::network::Prediction;
    use crate::tactile::DomeGeometry;
    use std::collections::HashMap;

    #[test]
    fn contact_threshold() {
        assert!(!is_contact(0.0));
        assert!(is_contact(2.6));
        assert!(is_contact(0.5));
        assert!(!is_contact(0.4999));
    }

    /// Looks labels up by exact feature bits.
    struct Oracle(HashMap<Vec<u64>, Prediction>);

    impl Predictor for Oracle {
        fn predict(&self, f: &[f64]) -> Result<Prediction> {
            let key: Vec<u64> = f.iter().map(|v| v.to_bits()).collect();
            Ok(self.0[&key])
        }
    }

    #[test]
    fn perfect_oracle_scores_zero() {
        let d = generate_dataset(300, 30, &DomeGeometry::default(), 0.02, 9).unwrap();
        let table = d
            .samples
            .iter()
            .map(|s| {
                (
                    s.features.iter().map(|v| v.to_bits()).collect(),
                    Prediction {
                        depth: s.depth,
                        angle: s.angle,
                    },
                )
            })
            .collect();
        let r = evaluate(&Oracle(table), &d).unwrap();
        assert_eq!(r.mae_depth, 0.0);
        assert_eq!(r.mae_angle, 0.0);
        assert_eq!(r.contact_accuracy, 1.0);
        assert_eq!((r.n_contact, r.n_noncontact), (300, 30));
        assert_eq!(r.by_depth.iter().map(|b| b.count).sum::<usize>(), 300);
        assert_eq!(r.by_angle.iter().map(|b| b.count).sum::<usize>(), 300);
    }

    #[test]
    fn bins_cover_closed_range() {
        assert_eq!(bin_index(&DEPTH_EDGES, 1.0), Some(0));
        assert_eq!(bin_index(&DEPTH_EDGES, 5.0), Some(3));
        assert_eq!(bin_index(&DEPTH_EDGES, 2.0), Some(1));
        assert_eq!(bin_index(&ANGLE_EDGES, -25.0), Some(0));
        assert_eq!(bin_index(&ANGLE_EDGES, 25.0), Some(9));
        assert_eq!(bin_index(&DEPTH_EDGES, 0.0), None);
    }

    #[test]
    fn empty_test_set() {
        let d = Dataset {
            samples: vec![],
            split_seed: 0,
        };
        assert!(matches!(evaluate(&Oracle(HashMap::new()), &d), Err(Error::EmptyDataset)));
    }
}
