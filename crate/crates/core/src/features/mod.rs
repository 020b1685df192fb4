//! Handwriting features: signal entropy, speed and acceleration statistics,
//! pressure derivatives, pen-state timing and pressure-threshold counts.
//!
//! Every feature has a stable canonical name (see [`FeatureId`]) and the
//! default [`Catalog`] lists them in export column order.

mod entropy;
mod kinematics;
mod pressure;

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ink::{TaskRecord, MAX_PRESSURE};

pub use entropy::{channel_entropy, entropy};
pub use kinematics::{acceleration_series, first_derivative, second_derivative, speed_series};
pub use pressure::{
    normalized_time_up, pressure_above, pressure_band, stroke_counts, time_down, time_in_air, NormalizedTimeUp,
    StrokeCounts,
};

/// Shortest signal accepted by [`extract_features`].
pub const MIN_SIGNAL_LEN: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum EntropyChannel {
    X,
    Y,
    Pressure,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Statistic {
    Mean,
    Std,
    Max,
}

impl Statistic {
    const ALL: [Statistic; 3] = [Statistic::Mean, Statistic::Std, Statistic::Max];

    fn prefix(&self) -> &'static str {
        match self {
            Statistic::Mean => "mean",
            Statistic::Std => "std",
            Statistic::Max => "max",
        }
    }
}

/// Canonical feature identifier. Names returned by [`FeatureId::name`] are
/// stable API and round-trip through [`FromStr`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum FeatureId {
    Entropy(EntropyChannel),
    Speed(Statistic),
    Acceleration(Statistic),
    /// Speed computed inside pen-down strokes only.
    PenDownSpeed(Statistic),
    /// Acceleration computed inside pen-down strokes only.
    PenDownAcceleration(Statistic),
    MeanAbsPressureDerivative,
    MeanAbsPressureSecondDerivative,
    TimeInAir,
    TimeDown,
    NormalizedTimeUp,
    PressureAbove(u16),
    PressureBand(u16, u16),
}

impl FeatureId {
    pub fn name(&self) -> String {
        match self {
            FeatureId::Entropy(EntropyChannel::X) => "entropy_x".into(),
            FeatureId::Entropy(EntropyChannel::Y) => "entropy_y".into(),
            FeatureId::Entropy(EntropyChannel::Pressure) => "entropy_p".into(),
            FeatureId::Speed(s) => format!("{}_speed", s.prefix()),
            FeatureId::Acceleration(s) => format!("{}_acceleration", s.prefix()),
            FeatureId::PenDownSpeed(s) => format!("down_{}_speed", s.prefix()),
            FeatureId::PenDownAcceleration(s) => format!("down_{}_acceleration", s.prefix()),
            FeatureId::MeanAbsPressureDerivative => "mean_abs_dp".into(),
            FeatureId::MeanAbsPressureSecondDerivative => "mean_abs_ddp".into(),
            FeatureId::TimeInAir => "time_in_air".into(),
            FeatureId::TimeDown => "time_down".into(),
            FeatureId::NormalizedTimeUp => "normalized_time_up".into(),
            FeatureId::PressureAbove(n) => format!("p_gt_{n}"),
            FeatureId::PressureBand(lo, hi) => format!("p_band_{lo}_{hi}"),
        }
    }

    /// Human-readable row label used in rendered tables.
    pub fn label(&self) -> String {
        let stat = |s: &Statistic| match s {
            Statistic::Mean => "Mean",
            Statistic::Std => "Standard deviation of",
            Statistic::Max => "Max",
        };
        match self {
            FeatureId::Entropy(EntropyChannel::X) => "Entropy of X".into(),
            FeatureId::Entropy(EntropyChannel::Y) => "Entropy of Y".into(),
            FeatureId::Entropy(EntropyChannel::Pressure) => "Entropy of pressure".into(),
            FeatureId::Speed(s) => format!("{} speed", stat(s)),
            FeatureId::Acceleration(s) => format!("{} acceleration", stat(s)),
            FeatureId::PenDownSpeed(s) => format!("{} pen-down speed", stat(s)),
            FeatureId::PenDownAcceleration(s) => format!("{} pen-down acceleration", stat(s)),
            FeatureId::MeanAbsPressureDerivative => "First derivative of pressure".into(),
            FeatureId::MeanAbsPressureSecondDerivative => "Second derivative of pressure".into(),
            FeatureId::TimeInAir => "Time in air".into(),
            FeatureId::TimeDown => "Time down".into(),
            FeatureId::NormalizedTimeUp => "Normalized time up".into(),
            FeatureId::PressureAbove(n) => format!("p > {n}"),
            FeatureId::PressureBand(lo, hi) => format!("p[{lo}\u{2013}{hi}]"),
        }
    }

    /// Factor turning the per-sample value into per-second units (or sample
    /// counts into seconds) at the fixed 100 Hz clock. Display only.
    pub fn per_second_factor(&self) -> f64 {
        let hz = f64::from(crate::ink::SAMPLE_RATE_HZ);
        match self {
            FeatureId::Entropy(_) => 1.0,
            FeatureId::Speed(_) | FeatureId::PenDownSpeed(_) => hz,
            FeatureId::MeanAbsPressureDerivative => hz,
            FeatureId::Acceleration(_) | FeatureId::PenDownAcceleration(_) => hz * hz,
            FeatureId::MeanAbsPressureSecondDerivative => hz * hz,
            FeatureId::TimeInAir
            | FeatureId::TimeDown
            | FeatureId::NormalizedTimeUp
            | FeatureId::PressureAbove(_)
            | FeatureId::PressureBand(..) => 1.0 / hz,
        }
    }

    /// Whether the feature depends only on the pressure channel.
    pub fn is_pressure_based(&self) -> bool {
        !matches!(
            self,
            FeatureId::Entropy(EntropyChannel::X | EntropyChannel::Y)
                | FeatureId::Speed(_)
                | FeatureId::Acceleration(_)
                | FeatureId::PenDownSpeed(_)
                | FeatureId::PenDownAcceleration(_)
        )
    }
}

impl fmt::Display for FeatureId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

impl From<FeatureId> for String {
    fn from(id: FeatureId) -> String {
        id.name()
    }
}

impl TryFrom<String> for FeatureId {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl FromStr for FeatureId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let unknown = || Error::Value(format!("unknown feature {s:?}"));
        let s = s.trim();
        let threshold = |t: &str| -> Result<u16> {
            let n: u16 = t.parse().map_err(|_| unknown())?;
            if n > MAX_PRESSURE {
                return Err(Error::Range(format!("pressure threshold {n} in {s:?}")));
            }
            Ok(n)
        };
        if let Some(rest) = s.strip_prefix("p_gt_") {
            return Ok(FeatureId::PressureAbove(threshold(rest)?));
        }
        if let Some(rest) = s.strip_prefix("p_band_") {
            let (lo, hi) = rest.split_once('_').ok_or_else(unknown)?;
            let (lo, hi) = (threshold(lo)?, threshold(hi)?);
            if !(0 < lo && lo < hi) {
                return Err(Error::Range(format!("pressure band in {s:?}")));
            }
            return Ok(FeatureId::PressureBand(lo, hi));
        }
        let fixed = [
            FeatureId::Entropy(EntropyChannel::X),
            FeatureId::Entropy(EntropyChannel::Y),
            FeatureId::Entropy(EntropyChannel::Pressure),
            FeatureId::MeanAbsPressureDerivative,
            FeatureId::MeanAbsPressureSecondDerivative,
            FeatureId::TimeInAir,
            FeatureId::TimeDown,
            FeatureId::NormalizedTimeUp,
        ];
        let kinematic = Statistic::ALL.into_iter().flat_map(|st| {
            [
                FeatureId::Speed(st),
                FeatureId::Acceleration(st),
                FeatureId::PenDownSpeed(st),
                FeatureId::PenDownAcceleration(st),
            ]
        });
        fixed
            .into_iter()
            .chain(kinematic)
            .find(|id| id.name() == s)
            .ok_or_else(unknown)
    }
}

/// Ordered list of features to extract. Order is export column order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Catalog {
    features: Vec<FeatureId>,
}

impl Catalog {
    pub fn new(features: Vec<FeatureId>) -> Result<Self> {
        if features.is_empty() {
            return Err(Error::Value("empty feature catalog".into()));
        }
        let mut seen = BTreeSet::new();
        if let Some(dup) = features.iter().find(|f| !seen.insert(**f)) {
            return Err(Error::Value(format!("feature {dup} listed twice")));
        }
        Ok(Catalog { features })
    }

    /// The default catalog: entropies, kinematic statistics over the full
    /// signal, pressure derivatives, timing and pressure-threshold counts.
    pub fn standard() -> Self {
        use FeatureId::*;
        let features = vec![
            Entropy(EntropyChannel::X),
            Entropy(EntropyChannel::Y),
            Entropy(EntropyChannel::Pressure),
            Speed(Statistic::Mean),
            Speed(Statistic::Std),
            Speed(Statistic::Max),
            Acceleration(Statistic::Mean),
            Acceleration(Statistic::Std),
            Acceleration(Statistic::Max),
            MeanAbsPressureDerivative,
            MeanAbsPressureSecondDerivative,
            TimeInAir,
            TimeDown,
            NormalizedTimeUp,
            PressureAbove(100),
            PressureAbove(600),
            PressureBand(100, 400),
            PressureBand(100, 600),
        ];
        Catalog { features }
    }

    /// Kinematic statistics restricted to pen-down strokes.
    pub fn pen_down() -> Self {
        let features = Statistic::ALL
            .into_iter()
            .map(FeatureId::PenDownSpeed)
            .chain(Statistic::ALL.into_iter().map(FeatureId::PenDownAcceleration))
            .collect();
        Catalog { features }
    }

    /// Parses a comma-separated list of canonical names. The words
    /// `standard` and `pen-down` expand to those catalogs.
    pub fn parse_list(list: &str) -> Result<Self> {
        let mut features = Vec::new();
        for item in list.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            match item {
                "standard" => features.extend(Catalog::standard().features),
                "pen-down" => features.extend(Catalog::pen_down().features),
                name => features.push(name.parse()?),
            }
        }
        Catalog::new(features)
    }

    pub fn features(&self) -> &[FeatureId] {
        &self.features
    }

    pub fn len(&self) -> usize {
        self.features.len()
    }

    pub fn is_empty(&self) -> bool {
        self.features.is_empty()
    }

    pub fn position(&self, id: FeatureId) -> Option<usize> {
        self.features.iter().position(|f| *f == id)
    }

    pub fn contains(&self, id: FeatureId) -> bool {
        self.position(id).is_some()
    }
}

impl Default for Catalog {
    fn default() -> Self {
        Catalog::standard()
    }
}

/// Feature values of one record in catalog order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub values: Vec<(FeatureId, f64)>,
    /// Features whose value came from a degenerate-input rule.
    pub flags: BTreeSet<FeatureId>,
}

impl FeatureVector {
    pub fn get(&self, id: FeatureId) -> Option<f64> {
        self.values.iter().find(|(f, _)| *f == id).map(|(_, v)| *v)
    }

    pub fn is_flagged(&self, id: FeatureId) -> bool {
        self.flags.contains(&id)
    }
}

#[derive(Debug, Clone, Copy)]
struct Summary {
    value: f64,
    degenerate: bool,
}

fn summarize(series: &[f64], stat: Statistic) -> Summary {
    let n = series.len();
    if n == 0 {
        return Summary {
            value: 0.0,
            degenerate: true,
        };
    }
    let mean = series.iter().sum::<f64>() / n as f64;
    match stat {
        Statistic::Mean => Summary {
            value: mean,
            degenerate: false,
        },
        Statistic::Max => Summary {
            value: series.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            degenerate: false,
        },
        // sample standard deviation, n - 1 denominator
        Statistic::Std if n < 2 => Summary {
            value: 0.0,
            degenerate: true,
        },
        Statistic::Std => {
            let ss: f64 = series.iter().map(|v| (v - mean).powi(2)).sum();
            Summary {
                value: (ss / (n - 1) as f64).sqrt(),
                degenerate: false,
            }
        }
    }
}

fn mean_abs(series: &[f64]) -> f64 {
    series.iter().map(|v| v.abs()).sum::<f64>() / series.len() as f64
}

/// Maximal runs of pen-down samples as index ranges.
fn pen_down_runs(pressure: &[u16]) -> Vec<std::ops::Range<usize>> {
    let mut runs = Vec::new();
    let mut start = None;
    for (i, &p) in pressure.iter().enumerate() {
        match (p > 0, start) {
            (true, None) => start = Some(i),
            (false, Some(s)) => {
                runs.push(s..i);
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        runs.push(s..pressure.len());
    }
    runs
}

/// Intermediate series shared by several features.
struct Signals {
    xs: Vec<i64>,
    ys: Vec<i64>,
    pressure: Vec<u16>,
    speed: Vec<f64>,
    acceleration: Vec<f64>,
    down_speed: Vec<f64>,
    down_acceleration: Vec<f64>,
    dp: Vec<f64>,
    ddp: Vec<f64>,
}

impl Signals {
    fn new(record: &TaskRecord, catalog: &Catalog) -> Result<Self> {
        let signal = &record.signal;
        let x: Vec<f64> = signal.xs().into_iter().map(f64::from).collect();
        let y: Vec<f64> = signal.ys().into_iter().map(f64::from).collect();
        let pressure = signal.pressures();
        let p: Vec<f64> = pressure.iter().map(|&v| f64::from(v)).collect();

        let wants_down = catalog
            .features()
            .iter()
            .any(|f| matches!(f, FeatureId::PenDownSpeed(_) | FeatureId::PenDownAcceleration(_)));
        let (mut down_speed, mut down_acceleration) = (Vec::new(), Vec::new());
        if wants_down {
            for run in pen_down_runs(&pressure) {
                let (rx, ry) = (&x[run.clone()], &y[run]);
                if rx.len() >= 2 {
                    down_speed.extend(speed_series(rx, ry)?);
                }
                if rx.len() >= 3 {
                    down_acceleration.extend(acceleration_series(rx, ry)?);
                }
            }
        }

        Ok(Signals {
            xs: signal.xs().into_iter().map(i64::from).collect(),
            ys: signal.ys().into_iter().map(i64::from).collect(),
            speed: speed_series(&x, &y)?,
            acceleration: acceleration_series(&x, &y)?,
            dp: first_derivative(&p)?,
            ddp: second_derivative(&p)?,
            pressure,
            down_speed,
            down_acceleration,
        })
    }

    fn compute(&self, id: FeatureId) -> Result<Summary> {
        let plain = |value: f64| Summary {
            value,
            degenerate: false,
        };
        let count = |n: usize| plain(n as f64);
        Ok(match id {
            FeatureId::Entropy(EntropyChannel::X) => plain(channel_entropy(&self.xs)?),
            FeatureId::Entropy(EntropyChannel::Y) => plain(channel_entropy(&self.ys)?),
            FeatureId::Entropy(EntropyChannel::Pressure) => {
                let p: Vec<i64> = self.pressure.iter().map(|&v| i64::from(v)).collect();
                plain(entropy(&p, u64::from(MAX_PRESSURE) + 1)?)
            }
            FeatureId::Speed(s) => summarize(&self.speed, s),
            FeatureId::Acceleration(s) => summarize(&self.acceleration, s),
            FeatureId::PenDownSpeed(s) => summarize(&self.down_speed, s),
            FeatureId::PenDownAcceleration(s) => summarize(&self.down_acceleration, s),
            FeatureId::MeanAbsPressureDerivative => plain(mean_abs(&self.dp)),
            FeatureId::MeanAbsPressureSecondDerivative => plain(mean_abs(&self.ddp)),
            FeatureId::TimeInAir => count(time_in_air(&self.pressure)?),
            FeatureId::TimeDown => count(time_down(&self.pressure)?),
            FeatureId::NormalizedTimeUp => {
                let n = normalized_time_up(&self.pressure)?;
                Summary {
                    value: n.ratio,
                    degenerate: n.degenerate,
                }
            }
            FeatureId::PressureAbove(n) => count(pressure_above(&self.pressure, n)?),
            FeatureId::PressureBand(lo, hi) => count(pressure_band(&self.pressure, lo, hi)?),
        })
    }
}

/// Computes every catalog feature for one record.
pub fn extract_features(record: &TaskRecord, catalog: &Catalog) -> Result<FeatureVector> {
    let len = record.signal.len();
    if len < MIN_SIGNAL_LEN {
        return Err(Error::TooShort {
            len,
            min: MIN_SIGNAL_LEN,
        });
    }
    let signals = Signals::new(record, catalog)?;
    let mut values = Vec::with_capacity(catalog.len());
    let mut flags = BTreeSet::new();
    for &id in catalog.features() {
        let summary = signals.compute(id)?;
        if summary.degenerate {
            flags.insert(id);
        }
        values.push((id, summary.value));
    }
    Ok(FeatureVector { values, flags })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ink::{InkSignal, Sample, SetId, TaskId};

    fn record(points: &[(i32, i32, u16)]) -> TaskRecord {
        let samples = points
            .iter()
            .map(|&(x, y, p)| Sample::new(x, y, p, 90, 45).unwrap())
            .collect();
        TaskRecord::new(
            "U1",
            SetId::S1,
            TaskId::new(1).unwrap(),
            InkSignal::new(samples).unwrap(),
        )
    }

    #[test]
    fn names_round_trip() {
        let all = Catalog::standard()
            .features()
            .iter()
            .chain(Catalog::pen_down().features())
            .copied()
            .collect::<Vec<_>>();
        for id in all {
            assert_eq!(id.name().parse::<FeatureId>().unwrap(), id);
        }
        assert_eq!(
            "p_band_100_600".parse::<FeatureId>().unwrap(),
            FeatureId::PressureBand(100, 600)
        );
        assert!("p_band_600_100".parse::<FeatureId>().is_err());
        assert!("p_gt_5000".parse::<FeatureId>().is_err());
        assert!("speed".parse::<FeatureId>().is_err());
    }

    #[test]
    fn standard_catalog_covers_fourteen_families() {
        let c = Catalog::standard();
        assert_eq!(c.len(), 18);
        let names: Vec<String> = c.features().iter().map(FeatureId::name).collect();
        assert_eq!(names[0], "entropy_x");
        assert_eq!(names[17], "p_band_100_600");
    }

    #[test]
    fn catalog_parsing() {
        let c = Catalog::parse_list("time_in_air, max_speed").unwrap();
        assert_eq!(c.features(), &[FeatureId::TimeInAir, FeatureId::Speed(Statistic::Max)]);
        assert_eq!(Catalog::parse_list("standard,pen-down").unwrap().len(), 24);
        assert!(Catalog::parse_list("time_in_air,time_in_air").is_err());
        assert!(Catalog::parse_list("").is_err());
    }

    #[test]
    fn extraction_on_a_hand_built_record() {
        let r = record(&[(0, 0, 0), (3, 4, 200), (3, 4, 700), (6, 8, 0), (6, 8, 0)]);
        let v = extract_features(&r, &Catalog::standard()).unwrap();
        assert_eq!(v.get(FeatureId::Speed(Statistic::Max)), Some(5.0));
        assert_eq!(v.get(FeatureId::Speed(Statistic::Mean)), Some(2.5));
        assert_eq!(v.get(FeatureId::TimeInAir), Some(3.0));
        assert_eq!(v.get(FeatureId::TimeDown), Some(2.0));
        // up strokes: leading one plus one falling edge
        assert_eq!(v.get(FeatureId::NormalizedTimeUp), Some(1.5));
        assert_eq!(v.get(FeatureId::PressureAbove(100)), Some(2.0));
        assert_eq!(v.get(FeatureId::PressureAbove(600)), Some(1.0));
        assert_eq!(v.get(FeatureId::PressureBand(100, 400)), Some(1.0));
        // dp = [200, 500, -700, 0]
        assert_eq!(v.get(FeatureId::MeanAbsPressureDerivative), Some(350.0));
        // ddp = [300, -1200, 700]
        assert_eq!(v.get(FeatureId::MeanAbsPressureSecondDerivative), Some(2200.0 / 3.0));
        // x takes 3 values {0,3,6} with counts 1,2,2
        let expected = -(0.2f64 * 0.2f64.log2() + 2.0 * 0.4 * 0.4f64.log2());
        assert!((v.get(FeatureId::Entropy(EntropyChannel::X)).unwrap() - expected).abs() < 1e-12);
        assert!(v.flags.is_empty());
    }

    #[test]
    fn all_air_record_flags_normalized_time_up() {
        let r = record(&[(0, 0, 0), (1, 0, 0), (2, 1, 0), (2, 2, 0)]);
        let v = extract_features(&r, &Catalog::standard()).unwrap();
        assert_eq!(v.get(FeatureId::TimeInAir), Some(4.0));
        assert_eq!(v.get(FeatureId::TimeDown), Some(0.0));
        assert_eq!(v.get(FeatureId::NormalizedTimeUp), Some(4.0));
        assert_eq!(v.get(FeatureId::Entropy(EntropyChannel::Pressure)), Some(0.0));

        let r = record(&[(0, 0, 9), (1, 0, 9), (2, 1, 9), (2, 2, 9)]);
        let v = extract_features(&r, &Catalog::standard()).unwrap();
        assert_eq!(v.get(FeatureId::NormalizedTimeUp), Some(0.0));
        assert!(v.is_flagged(FeatureId::NormalizedTimeUp));
        assert_eq!(v.flags.len(), 1);
    }

    #[test]
    fn three_samples_is_the_minimum() {
        let r = record(&[(0, 0, 0), (1, 1, 5)]);
        assert!(matches!(
            extract_features(&r, &Catalog::standard()),
            Err(Error::TooShort { len: 2, min: 3 })
        ));
        let r = record(&[(0, 0, 0), (1, 1, 5), (3, 1, 5)]);
        let v = extract_features(&r, &Catalog::standard()).unwrap();
        // one acceleration value has no sample deviation
        assert!(v.is_flagged(FeatureId::Acceleration(Statistic::Std)));
    }

    #[test]
    fn pen_down_kinematics_skip_air_samples() {
        // stroke 1: (0,0)->(1,0)->(3,0); air jump; stroke 2: (100,0)->(100,2)
        let r = record(&[(0, 0, 5), (1, 0, 5), (3, 0, 5), (50, 0, 0), (100, 0, 5), (100, 2, 5)]);
        let v = extract_features(&r, &Catalog::pen_down()).unwrap();
        assert_eq!(v.get(FeatureId::PenDownSpeed(Statistic::Max)), Some(2.0));
        assert_eq!(v.get(FeatureId::PenDownSpeed(Statistic::Mean)), Some(5.0 / 3.0));
        assert_eq!(v.get(FeatureId::PenDownAcceleration(Statistic::Max)), Some(1.0));
        assert!(v.is_flagged(FeatureId::PenDownAcceleration(Statistic::Std)));
    }
}
