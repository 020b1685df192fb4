//! Ink recordings: samples, signals, task and set identifiers, and the
//! study corpus built from them.

mod corpus;
mod format;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use corpus::{load_corpus, validate_corpus, write_corpus, CellKey, Diagnostic, GapReport, StudyCorpus};
pub use format::{parse_task_file, serialize_task};

/// Fixed acquisition rate of the digitizer. The sample index is the clock.
pub const SAMPLE_RATE_HZ: u32 = 100;

pub const MAX_PRESSURE: u16 = 2047;
pub const MAX_AZIMUTH: u16 = 359;
pub const MAX_ALTITUDE: u16 = 90;

/// Signal channels carried by every sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Channel {
    X,
    Y,
    Pressure,
    Azimuth,
    Altitude,
}

impl fmt::Display for Channel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Channel::X => "x",
            Channel::Y => "y",
            Channel::Pressure => "pressure",
            Channel::Azimuth => "azimuth",
            Channel::Altitude => "altitude",
        })
    }
}

/// One digitizer sample. Its time stamp is its position in the signal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sample {
    pub x: i32,
    pub y: i32,
    pub pressure: u16,
    pub azimuth: u16,
    pub altitude: u16,
}

impl Sample {
    /// Builds a sample, rejecting out-of-range pressure and pen angles.
    pub fn new(x: i32, y: i32, pressure: u16, azimuth: u16, altitude: u16) -> Result<Self> {
        let sample = Sample {
            x,
            y,
            pressure,
            azimuth,
            altitude,
        };
        if let Some((channel, value)) = sample.out_of_range() {
            return Err(Error::Range(format!("{channel} = {value}")));
        }
        Ok(sample)
    }

    pub(crate) fn out_of_range(&self) -> Option<(Channel, i64)> {
        if self.pressure > MAX_PRESSURE {
            Some((Channel::Pressure, self.pressure.into()))
        } else if self.azimuth > MAX_AZIMUTH {
            Some((Channel::Azimuth, self.azimuth.into()))
        } else if self.altitude > MAX_ALTITUDE {
            Some((Channel::Altitude, self.altitude.into()))
        } else {
            None
        }
    }

    pub fn is_down(&self) -> bool {
        self.pressure > 0
    }
}

/// Uniformly sampled pen time series for one task execution.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InkSignal {
    samples: Vec<Sample>,
}

impl InkSignal {
    /// Wraps samples in acquisition order. At least two are required.
    pub fn new(samples: Vec<Sample>) -> Result<Self> {
        if samples.len() < 2 {
            return Err(Error::TooShort {
                len: samples.len(),
                min: 2,
            });
        }
        if let Some((channel, value)) = samples.iter().find_map(Sample::out_of_range) {
            return Err(Error::Range(format!("{channel} = {value}")));
        }
        Ok(InkSignal { samples })
    }

    pub fn samples(&self) -> &[Sample] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn sample_rate_hz(&self) -> u32 {
        SAMPLE_RATE_HZ
    }

    pub fn duration_secs(&self) -> f64 {
        self.samples.len() as f64 / f64::from(SAMPLE_RATE_HZ)
    }

    pub fn xs(&self) -> Vec<i32> {
        self.samples.iter().map(|s| s.x).collect()
    }

    pub fn ys(&self) -> Vec<i32> {
        self.samples.iter().map(|s| s.y).collect()
    }

    pub fn pressures(&self) -> Vec<u16> {
        self.samples.iter().map(|s| s.pressure).collect()
    }
}

/// Broad task families of the handwriting battery.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum TaskCategory {
    Cognitive,
    Mechanical,
    FineMotor,
}

impl TaskCategory {
    pub const ALL: [TaskCategory; 3] = [
        TaskCategory::Cognitive,
        TaskCategory::Mechanical,
        TaskCategory::FineMotor,
    ];

    pub fn label(&self) -> &'static str {
        match self {
            TaskCategory::Cognitive => "Cognitive",
            TaskCategory::Mechanical => "Mechanical",
            TaskCategory::FineMotor => "Fine motor",
        }
    }
}

impl fmt::Display for TaskCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// One of the nine handwriting tasks, numbered 1..=9.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub struct TaskId(u8);

impl TaskId {
    pub const COUNT: u8 = 9;

    pub fn new(id: u8) -> Result<Self> {
        if (1..=Self::COUNT).contains(&id) {
            Ok(TaskId(id))
        } else {
            Err(Error::Range(format!("task id {id} not in 1..=9")))
        }
    }

    pub fn all() -> impl Iterator<Item = TaskId> {
        (1..=Self::COUNT).map(TaskId)
    }

    pub fn get(&self) -> u8 {
        self.0
    }

    /// Pentagon and house copying need cognitive effort; spiral, concentric
    /// circles and spring drawing need fine motor control; the rest are
    /// mechanical writing.
    pub fn category(&self) -> TaskCategory {
        match self.0 {
            1 | 2 => TaskCategory::Cognitive,
            3 | 5 | 9 => TaskCategory::FineMotor,
            _ => TaskCategory::Mechanical,
        }
    }
}

impl TryFrom<u8> for TaskId {
    type Error = Error;

    fn try_from(id: u8) -> Result<Self> {
        TaskId::new(id)
    }
}

impl From<TaskId> for u8 {
    fn from(id: TaskId) -> u8 {
        id.0
    }
}

impl fmt::Display for TaskId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl FromStr for TaskId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let id: u8 = s
            .trim()
            .parse()
            .map_err(|_| Error::Range(format!("task id {s:?} not in 1..=9")))?;
        TaskId::new(id)
    }
}

/// Assessment set, in acquisition order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum SetId {
    S1,
    S2,
    S3,
    S4,
    S5,
}

impl SetId {
    pub const ALL: [SetId; 5] = [SetId::S1, SetId::S2, SetId::S3, SetId::S4, SetId::S5];

    pub fn as_str(&self) -> &'static str {
        match self {
            SetId::S1 => "S1",
            SetId::S2 => "S2",
            SetId::S3 => "S3",
            SetId::S4 => "S4",
            SetId::S5 => "S5",
        }
    }

    /// Protocol time point at which the set was acquired.
    pub fn acquisition_label(&self) -> &'static str {
        match self {
            SetId::S1 => "Ph1-Pre-Fa",
            SetId::S2 => "Ph1-Post-Fa",
            SetId::S3 => "Ph2-Pre-Fa",
            SetId::S4 => "Ph2-Post-Fa",
            SetId::S5 => "Ph3-Post-Fa",
        }
    }

    pub fn index(&self) -> usize {
        *self as usize
    }
}

impl fmt::Display for SetId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SetId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SetId::ALL
            .into_iter()
            .find(|set| set.as_str().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::Range(format!("set {s:?} not in S1..S5")))
    }
}

/// One task execution by one subject in one set.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaskRecord {
    pub subject_id: String,
    pub set: SetId,
    pub task: TaskId,
    pub signal: InkSignal,
    /// Header keys other than subject/set/task, kept verbatim.
    pub metadata: std::collections::BTreeMap<String, String>,
}

impl TaskRecord {
    pub fn new(subject_id: impl Into<String>, set: SetId, task: TaskId, signal: InkSignal) -> Self {
        TaskRecord {
            subject_id: subject_id.into(),
            set,
            task,
            signal,
            metadata: Default::default(),
        }
    }

    pub fn key(&self) -> CellKey {
        CellKey {
            subject: self.subject_id.clone(),
            set: self.set,
            task: self.task,
        }
    }
}

/// Subject ids double as directory names, so they must be non-empty and
/// free of whitespace and path separators.
pub fn is_valid_subject_id(id: &str) -> bool {
    !id.is_empty()
        && id != "."
        && id != ".."
        && !id
            .chars()
            .any(|c| c.is_whitespace() || c.is_control() || c == '/' || c == '\\')
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn task_categories_follow_the_battery() {
        let cat = |id| TaskId::new(id).unwrap().category();
        assert_eq!(cat(1), TaskCategory::Cognitive);
        assert_eq!(cat(2), TaskCategory::Cognitive);
        for id in [4, 6, 7, 8] {
            assert_eq!(cat(id), TaskCategory::Mechanical);
        }
        for id in [3, 5, 9] {
            assert_eq!(cat(id), TaskCategory::FineMotor);
        }
        assert!(TaskId::new(0).is_err());
        assert!(TaskId::new(10).is_err());
    }

    #[test]
    fn sets_are_totally_ordered() {
        assert!(SetId::ALL.windows(2).all(|w| w[0] < w[1]));
        assert_eq!("s3".parse::<SetId>().unwrap(), SetId::S3);
        assert!("S6".parse::<SetId>().is_err());
        assert_eq!(SetId::S5.acquisition_label(), "Ph3-Post-Fa");
    }

    #[test]
    fn signal_rejects_short_and_out_of_range() {
        let s = Sample::new(0, 0, 0, 0, 0).unwrap();
        assert!(matches!(
            InkSignal::new(vec![s]),
            Err(Error::TooShort { len: 1, min: 2 })
        ));
        assert!(Sample::new(0, 0, 2048, 0, 0).is_err());
        assert!(Sample::new(0, 0, 2047, 359, 90).is_ok());
        assert!(Sample::new(0, 0, 0, 360, 0).is_err());
        assert!(Sample::new(0, 0, 0, 0, 91).is_err());
    }
}
