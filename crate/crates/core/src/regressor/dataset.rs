//! Labelled tactile datasets.

use std::io::{Read, Write};

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;
use crate::tactile::{sense_state, ContactState, DomeGeometry};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub features: Vec<f64>,
    /// mm; 0 marks a non-contact sample.
    pub depth: f64,
    /// degrees
    pub angle: f64,
}

impl Sample {
    pub fn is_contact(&self) -> bool {
        self.depth > 0.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub samples: Vec<Sample>,
    pub split_seed: u64,
}

/// Sampling ranges for [`generate_dataset_with`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DatasetProtocol {
    pub depth_min: f64,
    pub depth_max: f64,
    pub angle_max: f64,
    /// Half-width of the uniform linear shear before capture, mm.
    pub linear_shear_max: f64,
    /// Half-width of the uniform rotational shear before capture, degrees.
    pub rotation_shear_max: f64,
    /// Non-contact samples sit this far (at most) beyond the dome radius.
    pub noncontact_gap_max: f64,
}

impl Default for DatasetProtocol {
    fn default() -> Self {
        Self {
            depth_min: 1.0,
            depth_max: 5.0,
            angle_max: 25.0,
            linear_shear_max: 5.0,
            rotation_shear_max: 5.0,
            noncontact_gap_max: 10.0,
        }
    }
}

pub fn generate_dataset(
    n_contact: usize,
    n_noncontact: usize,
    dome: &DomeGeometry,
    noise_std: f64,
    seed: u64,
) -> Result<Dataset> {
    generate_dataset_with(n_contact, n_noncontact, dome, noise_std, seed, &DatasetProtocol::default())
}

/// Contact samples are sheared before capture: the skin is dragged by a
/// linear slip plus the arc length of a small twist, and neither enters the
/// labels. Non-contact samples carry depth and angle labels of zero.
pub fn generate_dataset_with(
    n_contact: usize,
    n_noncontact: usize,
    dome: &DomeGeometry,
    noise_std: f64,
    seed: u64,
    protocol: &DatasetProtocol,
) -> Result<Dataset> {
    let mut r = rng::stream(seed, 0);
    let mut samples = Vec::with_capacity(n_contact + n_noncontact);
    for _ in 0..n_contact {
        let depth = r.random_range(protocol.depth_min..=protocol.depth_max);
        let angle = r.random_range(-protocol.angle_max..=protocol.angle_max);
        let linear = symmetric(&mut r, protocol.linear_shear_max);
        let twist = symmetric(&mut r, protocol.rotation_shear_max);
        let shear = linear + dome.radius() * twist.to_radians();
        let state = ContactState::touching(depth, angle).with_shear(shear);
        let f = sense_state(&state, dome, noise_std, &mut r)?;
        samples.push(Sample {
            features: f.flatten(),
            depth,
            angle,
        });
    }
    for _ in 0..n_noncontact {
        // Drawn for its effect on the stream; a dome that misses the face
        // produces no deformation at any gap.
        let _gap = r.random_range(0.0..=protocol.noncontact_gap_max);
        let f = sense_state(&ContactState::none(), dome, noise_std, &mut r)?;
        samples.push(Sample {
            features: f.flatten(),
            depth: 0.0,
            angle: 0.0,
        });
    }
    Ok(Dataset {
        samples,
        split_seed: seed,
    })
}

fn symmetric<R: Rng>(r: &mut R, half_width: f64) -> f64 {
    if half_width > 0.0 {
        r.random_range(-half_width..=half_width)
    } else {
        0.0
    }
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn feature_len(&self) -> Option<usize> {
        self.samples.first().map(|s| s.features.len())
    }

    /// A copy without the non-contact samples.
    pub fn contact_only(&self) -> Dataset {
        Dataset {
            samples: self.samples.iter().filter(|s| s.is_contact()).cloned().collect(),
            split_seed: self.split_seed,
        }
    }

    /// Seeded random disjoint partition into `(train, test)`.
    pub fn split(&self, train_fraction: f64) -> Result<(Dataset, Dataset)> {
        split(self, train_fraction)
    }

    /// CSV with columns `feature_0..feature_{n-1}, depth_label, angle_label`.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let n = self.feature_len().unwrap_or(0);
        let mut w = csv::Writer::from_writer(writer);
        let mut header: Vec<String> = (0..n).map(|i| format!("feature_{i}")).collect();
        header.push("depth_label".into());
        header.push("angle_label".into());
        w.write_record(&header)?;
        for s in &self.samples {
            let mut row: Vec<String> = s.features.iter().map(|v| v.to_string()).collect();
            row.push(s.depth.to_string());
            row.push(s.angle.to_string());
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(reader: R, split_seed: u64) -> Result<Dataset> {
        let mut rd = csv::Reader::from_reader(reader);
        let width = rd.headers()?.len();
        if width < 3 {
            return Err(Error::Io("dataset CSV needs at least one feature column".into()));
        }
        let mut samples = Vec::new();
        for (i, rec) in rd.records().enumerate() {
            let rec = rec?;
            let vals: Vec<f64> = rec
                .iter()
                .map(|v| v.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::Io(format!("row {}: {e}", i + 2)))?;
            let (features, labels) = vals.split_at(width - 2);
            samples.push(Sample {
                features: features.to_vec(),
                depth: labels[0],
                angle: labels[1],
            });
        }
        Ok(Dataset { samples, split_seed })
    }
}

pub fn split(dataset: &Dataset, train_fraction: f64) -> Result<(Dataset, Dataset)> {
    if dataset.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "train fraction must lie in (0, 1), got {train_fraction}"
        )));
    }
    let mut idx: Vec<usize> = (0..dataset.len()).collect();
    idx.shuffle(&mut rng::stream(dataset.split_seed, 1));
    let n_train = (dataset.len() as f64 * train_fraction).round() as usize;
    let pick = |ids: &[usize]| Dataset {
        samples: ids.iter().map(|&i| dataset.samples[i].clone()).collect(),
        split_seed: dataset.split_seed,
    };
    Ok((pick(&idx[..n_train]), pick(&idx[n_train..])))
}
