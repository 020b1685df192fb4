//! Deterministic synthetic ink.
//!
//! Each record is a sequence of pen-down sinusoidal strokes separated by
//! pen-up gaps. Per-set perturbations slow the pen, shift pressure, stretch
//! the gaps or add positional jitter, which lets the statistical pipeline be
//! checked against known effects.
//!
//! Random streams are keyed by `(seed, subject)` for subject traits and by
//! `(seed, subject, set, task)` for records, so adding a subject or a set
//! leaves every other record untouched.

use std::f64::consts::PI;
use std::fmt::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::ink::{InkSignal, Sample, SetId, StudyCorpus, TaskId, TaskRecord, MAX_PRESSURE};

/// Changes applied to every record of one set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SetPerturbation {
    /// Multiplies pen speed; strokes keep their length and take longer.
    pub speed_scale: f64,
    /// Added to every pen-down pressure sample before clamping.
    pub pressure_shift: i32,
    /// Multiplies the length of every pen-up gap.
    pub air_inflation: f64,
    /// Standard deviation of per-sample positional noise, tablet units.
    pub jitter_sd: f64,
}

impl Default for SetPerturbation {
    fn default() -> Self {
        SetPerturbation {
            speed_scale: 1.0,
            pressure_shift: 0,
            air_inflation: 1.0,
            jitter_sd: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthProfile {
    pub seed: u64,
    pub n_subjects: usize,
    /// Nominal pen-down speed, tablet units per sample.
    pub base_speed: f64,
    /// Nominal peak pressure of a stroke.
    pub base_pressure_level: u16,
    pub stroke_count: usize,
    /// Nominal pen-up gap between strokes, samples.
    pub air_gap_len: usize,
    /// Nominal samples per stroke at base speed.
    pub stroke_samples: usize,
    /// Log-scale spread of per-subject speed, pressure, size and gap traits.
    pub subject_variation: f64,
    /// Log-scale spread of the same traits between records of one subject.
    pub session_variation: f64,
    /// Perturbations indexed by set, S1 first.
    pub sets: [SetPerturbation; 5],
}

impl Default for SynthProfile {
    fn default() -> Self {
        SynthProfile {
            seed: 1,
            n_subjects: 20,
            base_speed: 8.0,
            base_pressure_level: 700,
            stroke_count: 6,
            air_gap_len: 25,
            stroke_samples: 50,
            subject_variation: 0.15,
            session_variation: 0.08,
            sets: [SetPerturbation::default(); 5],
        }
    }
}

fn config_err(message: impl Into<String>) -> Error {
    Error::Config(message.into())
}

impl SynthProfile {
    pub fn set(&self, set: SetId) -> &SetPerturbation {
        &self.sets[set.index()]
    }

    pub fn set_mut(&mut self, set: SetId) -> &mut SetPerturbation {
        &mut self.sets[set.index()]
    }

    pub fn validate(&self) -> Result<()> {
        if self.stroke_count == 0 {
            return Err(config_err("stroke_count must be at least 1"));
        }
        if self.n_subjects == 0 {
            return Err(config_err("n_subjects must be at least 1"));
        }
        if !(self.base_speed > 0.0 && self.base_speed.is_finite()) {
            return Err(config_err("base_speed must be positive"));
        }
        if self.base_pressure_level == 0 || self.base_pressure_level > MAX_PRESSURE {
            return Err(config_err("base_pressure_level must be in 1..=2047"));
        }
        if self.air_gap_len == 0 {
            return Err(config_err("air_gap_len must be at least 1"));
        }
        if self.stroke_samples < 3 {
            return Err(config_err("stroke_samples must be at least 3"));
        }
        for (name, v) in [
            ("subject_variation", self.subject_variation),
            ("session_variation", self.session_variation),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(config_err(format!("{name} must be non-negative")));
            }
        }
        for (set, p) in SetId::ALL.iter().zip(&self.sets) {
            if !(p.speed_scale > 0.0 && p.speed_scale.is_finite()) {
                return Err(config_err(format!("{set}.speed_scale must be positive")));
            }
            if !(p.air_inflation > 0.0 && p.air_inflation.is_finite()) {
                return Err(config_err(format!("{set}.air_inflation must be positive")));
            }
            if !(p.jitter_sd >= 0.0 && p.jitter_sd.is_finite()) {
                return Err(config_err(format!("{set}.jitter_sd must be non-negative")));
            }
        }
        Ok(())
    }

    /// Subject ids `U01`, `U02`, ... in generation order.
    pub fn subject_ids(&self) -> Vec<String> {
        (1..=self.n_subjects).map(|i| format!("U{i:02}")).collect()
    }

    /// Parses `key=value` lines. Per-set keys are prefixed with the set,
    /// e.g. `S4.speed_scale=0.7`. Blank lines and `#` comments are skipped;
    /// unknown keys are errors.
    pub fn parse(text: &str) -> Result<Self> {
        let mut profile = SynthProfile::default();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let at = |m: String| config_err(format!("line {}: {m}", idx + 1));
            let (key, value) = line.split_once('=').ok_or_else(|| at("expected key=value".into()))?;
            let (key, value) = (key.trim(), value.trim());
            fn num<T: std::str::FromStr>(value: &str) -> std::result::Result<T, String> {
                value.parse().map_err(|_| format!("invalid value {value:?}"))
            }
            let result: std::result::Result<(), String> = (|| {
                match key {
                    "seed" => profile.seed = num(value)?,
                    "n_subjects" => profile.n_subjects = num(value)?,
                    "base_speed" => profile.base_speed = num(value)?,
                    "base_pressure_level" => profile.base_pressure_level = num(value)?,
                    "stroke_count" => profile.stroke_count = num(value)?,
                    "air_gap_len" => profile.air_gap_len = num(value)?,
                    "stroke_samples" => profile.stroke_samples = num(value)?,
                    "subject_variation" => profile.subject_variation = num(value)?,
                    "session_variation" => profile.session_variation = num(value)?,
                    _ => {
                        let (set, field) = key.split_once('.').ok_or_else(|| format!("unknown key {key:?}"))?;
                        let set: SetId = set.parse().map_err(|_| format!("unknown key {key:?}"))?;
                        let p = profile.set_mut(set);
                        match field {
                            "speed_scale" => p.speed_scale = num(value)?,
                            "pressure_shift" => p.pressure_shift = num(value)?,
                            "air_inflation" => p.air_inflation = num(value)?,
                            "jitter_sd" => p.jitter_sd = num(value)?,
                            _ => return Err(format!("unknown key {key:?}")),
                        }
                    }
                }
                Ok(())
            })();
            result.map_err(at)?;
        }
        profile.validate()?;
        Ok(profile)
    }

    /// Renders the profile in the format read by [`SynthProfile::parse`].
    pub fn to_config_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "seed={}", self.seed);
        let _ = writeln!(out, "n_subjects={}", self.n_subjects);
        let _ = writeln!(out, "base_speed={}", self.base_speed);
        let _ = writeln!(out, "base_pressure_level={}", self.base_pressure_level);
        let _ = writeln!(out, "stroke_count={}", self.stroke_count);
        let _ = writeln!(out, "air_gap_len={}", self.air_gap_len);
        let _ = writeln!(out, "stroke_samples={}", self.stroke_samples);
        let _ = writeln!(out, "subject_variation={}", self.subject_variation);
        let _ = writeln!(out, "session_variation={}", self.session_variation);
        for (set, p) in SetId::ALL.iter().zip(&self.sets) {
            let _ = writeln!(out, "{set}.speed_scale={}", p.speed_scale);
            let _ = writeln!(out, "{set}.pressure_shift={}", p.pressure_shift);
            let _ = writeln!(out, "{set}.air_inflation={}", p.air_inflation);
            let _ = writeln!(out, "{set}.jitter_sd={}", p.jitter_sd);
        }
        out
    }
}

fn keyed_rng(parts: &[&str]) -> ChaCha8Rng {
    let mut hasher = Sha256::new();
    for part in parts {
        hasher.update((part.len() as u64).to_le_bytes());
        hasher.update(part.as_bytes());
    }
    let seed: [u8; 32] = hasher.finalize().into();
    ChaCha8Rng::from_seed(seed)
}

fn log_normal(rng: &mut ChaCha8Rng, sd: f64) -> f64 {
    let z: f64 = rng.sample(rand_distr::StandardNormal);
    (sd * z).exp()
}

/// Stable per-subject traits.
struct SubjectTraits {
    speed: f64,
    pressure: f64,
    size: f64,
    gap: f64,
    azimuth: u16,
    altitude: u16,
}

impl SubjectTraits {
    fn draw(profile: &SynthProfile, subject: &str) -> Self {
        let mut rng = keyed_rng(&[&profile.seed.to_string(), subject]);
        let sd = profile.subject_variation;
        SubjectTraits {
            speed: log_normal(&mut rng, sd),
            pressure: log_normal(&mut rng, sd),
            size: log_normal(&mut rng, sd),
            gap: log_normal(&mut rng, sd),
            azimuth: rng.random_range(150..=240),
            altitude: rng.random_range(40..=65),
        }
    }
}

/// Parameters of one stroke and the gap that follows it, drawn before any
/// per-sample noise so that sample counts do not shift the stream.
struct StrokePlan {
    length_factor: f64,
    pressure_factor: f64,
    gap_base: usize,
    heading: f64,
    phase: f64,
}

/// Generates one record. Identical arguments give identical records.
pub fn generate_task(profile: &SynthProfile, subject_id: &str, set: SetId, task: TaskId) -> Result<TaskRecord> {
    profile.validate()?;
    let traits = SubjectTraits::draw(profile, subject_id);
    generate_with_traits(profile, &traits, subject_id, set, task)
}

fn generate_with_traits(
    profile: &SynthProfile,
    traits: &SubjectTraits,
    subject_id: &str,
    set: SetId,
    task: TaskId,
) -> Result<TaskRecord> {
    let perturbation = profile.set(set);
    let mut rng = keyed_rng(&[&profile.seed.to_string(), subject_id, set.as_str(), &task.to_string()]);

    let session_sd = profile.session_variation;
    let session_speed = log_normal(&mut rng, session_sd);
    let session_pressure = log_normal(&mut rng, session_sd);
    let session_gap = log_normal(&mut rng, session_sd);
    let plans: Vec<StrokePlan> = (0..profile.stroke_count)
        .map(|_| {
            let gap = profile.air_gap_len as f64 * traits.gap * session_gap * rng.random_range(0.7..1.3);
            StrokePlan {
                length_factor: rng.random_range(0.8..1.2),
                pressure_factor: rng.random_range(0.85..1.15),
                gap_base: (gap.round() as usize).max(1),
                heading: rng.random_range(-0.4..0.4),
                phase: rng.random_range(0.0..2.0 * PI),
            }
        })
        .collect();

    // task-specific stroke shape
    let t = f64::from(task.get());
    let wiggle = 6.0 + 4.0 * t;
    let cycles = 1.0 + f64::from(task.get() % 3);

    let jitter = Normal::new(0.0, perturbation.jitter_sd).map_err(|e| config_err(format!("jitter_sd: {e}")))?;
    let pressure_noise = Normal::new(0.0, 0.02 * f64::from(profile.base_pressure_level))
        .map_err(|e| config_err(format!("pressure noise: {e}")))?;

    let speed = profile.base_speed * traits.speed * session_speed * perturbation.speed_scale;
    let nominal_length = profile.base_speed * profile.stroke_samples as f64 * traits.size;
    let pressure_level = f64::from(profile.base_pressure_level) * traits.pressure * session_pressure;

    let mut samples = Vec::new();
    let mut push = |rng: &mut ChaCha8Rng, x: f64, y: f64, pressure: u16| {
        let jx: f64 = jitter.sample(rng);
        let jy: f64 = jitter.sample(rng);
        samples.push(Sample {
            x: (x + jx).round() as i32,
            y: (y + jy).round() as i32,
            pressure,
            azimuth: traits.azimuth,
            altitude: traits.altitude,
        });
    };

    let origin = (2000.0, 3000.0);
    let spacing = nominal_length * 1.3;
    let stroke_point = |k: usize, u: f64| {
        let plan = &plans[k];
        let along = nominal_length * plan.length_factor * u;
        let across = wiggle * (2.0 * PI * cycles * u + plan.phase).sin();
        let (cos, sin) = (plan.heading.cos(), plan.heading.sin());
        (
            origin.0 + k as f64 * spacing + along * cos - across * sin,
            origin.1 + along * sin + across * cos,
        )
    };
    for (k, plan) in plans.iter().enumerate() {
        let length = nominal_length * plan.length_factor;
        let n = ((length / speed).round() as usize).max(3);
        let peak = pressure_level * plan.pressure_factor;
        for i in 0..n {
            let u = i as f64 / (n - 1) as f64;
            let (x, y) = stroke_point(k, u);
            let noise: f64 = pressure_noise.sample(&mut rng);
            let p = peak * (0.25 + 0.75 * (PI * u).sin()) + f64::from(perturbation.pressure_shift) + noise;
            let p = p.round().clamp(1.0, f64::from(MAX_PRESSURE)) as u16;
            push(&mut rng, x, y, p);
        }
        if k + 1 < plans.len() {
            // the gap ends where the next stroke starts
            let gap = ((plan.gap_base as f64 * perturbation.air_inflation).round() as usize).max(1);
            let from = stroke_point(k, 1.0);
            let to = stroke_point(k + 1, 0.0);
            for j in 1..=gap {
                let u = j as f64 / (gap + 1) as f64;
                push(&mut rng, from.0 + (to.0 - from.0) * u, from.1 + (to.1 - from.1) * u, 0);
            }
        }
    }

    Ok(TaskRecord::new(subject_id, set, task, InkSignal::new(samples)?))
}

/// Generates the full subjects x 5 sets x 9 tasks corpus.
pub fn generate_corpus(profile: &SynthProfile) -> Result<StudyCorpus> {
    profile.validate()?;
    let subjects = profile.subject_ids();
    let traits: Vec<SubjectTraits> = subjects.iter().map(|s| SubjectTraits::draw(profile, s)).collect();
    let cells: Vec<(usize, SetId, TaskId)> = (0..subjects.len())
        .flat_map(|i| {
            SetId::ALL
                .into_iter()
                .flat_map(move |set| TaskId::all().map(move |t| (i, set, t)))
        })
        .collect();
    let records: Result<Vec<TaskRecord>> = cells
        .par_iter()
        .map(|&(i, set, task)| generate_with_traits(profile, &traits[i], &subjects[i], set, task))
        .collect();
    let mut corpus = StudyCorpus::new();
    for record in records? {
        corpus.insert(record)?;
    }
    Ok(corpus)
}
