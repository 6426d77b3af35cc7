use std::io::{Read, Write};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::{canonical_pose, GestureClass, HandFrame, Landmark, LANDMARK_COUNT};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Test,
}

impl Split {
    fn as_str(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Test => "test",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub frame: HandFrame,
    pub label: GestureClass,
    pub split: Split,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct GestureDataset {
    pub samples: Vec<Sample>,
}

impl GestureDataset {
    pub fn split(&self, split: Split) -> impl Iterator<Item = &Sample> {
        self.samples.iter().filter(move |s| s.split == split)
    }

    pub fn count(&self, split: Split) -> usize {
        self.split(split).count()
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassCount {
    /// Gesture name, e.g. `"THUMBS_UP"`.
    pub class: String,
    pub count: usize,
}

/// Recipe for a synthetic dataset: canonical poses plus Gaussian landmark jitter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSpec {
    pub classes: Vec<ClassCount>,
    /// Jitter standard deviation in normalized image units, applied to x, y and z.
    pub sigma: f64,
    pub train_fraction: f64,
}

impl Default for DatasetSpec {
    fn default() -> Self {
        Self {
            classes: GestureClass::ALL
                .iter()
                .map(|c| ClassCount {
                    class: c.name().to_string(),
                    count: 1000,
                })
                .collect(),
            sigma: 0.015,
            train_fraction: 0.8,
        }
    }
}

pub fn synth_dataset(spec: &DatasetSpec, seed: u64) -> Result<GestureDataset> {
    if !(spec.sigma >= 0.0 && spec.sigma.is_finite()) {
        return Err(Error::config(format!("sigma must be >= 0, got {}", spec.sigma)));
    }
    if !(0.0..=1.0).contains(&spec.train_fraction) {
        return Err(Error::config("train_fraction must lie in [0, 1]"));
    }
    let classes = spec
        .classes
        .iter()
        .map(|cc| {
            if cc.count == 0 {
                return Err(Error::config(format!("count for {} must be > 0", cc.class)));
            }
            Ok((cc.class.parse::<GestureClass>()?, cc.count))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, spec.sigma).map_err(|e| Error::config(e.to_string()))?;
    let mut samples = Vec::new();
    for (class, count) in classes {
        let pose = canonical_pose(class);
        let n_train = (count as f64 * spec.train_fraction).round() as usize;
        for i in 0..count {
            let mut frame = pose.clone();
            for l in frame.landmarks.iter_mut() {
                l.x += noise.sample(&mut rng);
                l.y += noise.sample(&mut rng);
                l.z += noise.sample(&mut rng);
            }
            let split = if i < n_train { Split::Train } else { Split::Test };
            samples.push(Sample {
                frame,
                label: class,
                split,
            });
        }
    }
    Ok(GestureDataset { samples })
}

/// Writes `label,split,x0,y0,z0,...,x20,y20,z20` rows.
pub fn write_dataset<W: Write>(data: &GestureDataset, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["label".to_string(), "split".to_string()];
    for i in 0..LANDMARK_COUNT {
        header.extend([format!("x{i}"), format!("y{i}"), format!("z{i}")]);
    }
    w.write_record(&header)?;
    for s in &data.samples {
        let mut row = vec![s.label.name().to_string(), s.split.as_str().to_string()];
        for l in &s.frame.landmarks {
            row.extend([l.x.to_string(), l.y.to_string(), l.z.to_string()]);
        }
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_dataset<R: Read>(input: R) -> Result<GestureDataset> {
    let mut r = csv::Reader::from_reader(input);
    let mut samples = Vec::new();
    for (line, rec) in r.records().enumerate() {
        let rec = rec?;
        let bad = |msg: &str| Error::Parse(format!("dataset row {}: {msg}", line + 1));
        if rec.len() != 2 + 3 * LANDMARK_COUNT {
            return Err(bad(&format!("expected {} fields", 2 + 3 * LANDMARK_COUNT)));
        }
        let label: GestureClass = rec[0].parse().map_err(|_| bad("unknown label"))?;
        let split = match &rec[1] {
            "train" => Split::Train,
            "test" => Split::Test,
            other => return Err(bad(&format!("unknown split '{other}'"))),
        };
        let nums = (2..rec.len())
            .map(|i| rec[i].trim().parse::<f64>().map_err(|_| bad("bad number")))
            .collect::<Result<Vec<_>>>()?;
        let landmarks = nums.chunks(3).map(|c| Landmark::new(c[0], c[1], c[2])).collect();
        samples.push(Sample {
            frame: HandFrame::new(landmarks, 0.0)?,
            label,
            split,
        });
    }
    Ok(GestureDataset { samples })
}
