//! Line-oriented task file format.
//!
//! ```text
//! #subject=U01
//! #set=S1
//! #task=3
//! #device=intuos
//! 1023 877 0 180 55
//! 1025 879 312 180 55
//! ```
//!
//! Headers come first, one `#key=value` per line. Every following non-blank
//! line holds `x y pressure azimuth altitude` as integers.

use std::collections::BTreeMap;
use std::fmt::Write;

use super::{
    is_valid_subject_id, Channel, InkSignal, Sample, SetId, TaskId, TaskRecord, MAX_ALTITUDE, MAX_AZIMUTH, MAX_PRESSURE,
};
use crate::error::{Error, Result};

const REQUIRED: [&str; 3] = ["subject", "set", "task"];

pub fn parse_task_file(text: &str) -> Result<TaskRecord> {
    let mut headers: BTreeMap<String, (usize, String)> = BTreeMap::new();
    let mut samples = Vec::new();
    let mut last_line = 0;

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        last_line = line_no;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(header) = line.strip_prefix('#') {
            if !samples.is_empty() {
                return Err(format_err(line_no, "header line after sample data"));
            }
            let (key, value) = header
                .split_once('=')
                .ok_or_else(|| format_err(line_no, "header must be #key=value"))?;
            let key = key.trim();
            if key.is_empty() || key.chars().any(char::is_whitespace) {
                return Err(format_err(line_no, format!("invalid header key {key:?}")));
            }
            if headers
                .insert(key.to_string(), (line_no, value.trim().to_string()))
                .is_some()
            {
                return Err(format_err(line_no, format!("duplicate header key {key:?}")));
            }
        } else {
            samples.push(parse_sample(line, line_no)?);
        }
    }

    for key in REQUIRED {
        if !headers.contains_key(key) {
            return Err(format_err(last_line.max(1), format!("missing required header {key:?}")));
        }
    }

    let (subject_line, subject) = headers.remove("subject").unwrap();
    if !is_valid_subject_id(&subject) {
        return Err(format_err(subject_line, format!("invalid subject id {subject:?}")));
    }
    let (set_line, set) = headers.remove("set").unwrap();
    let set: SetId = set.parse().map_err(|e: Error| format_err(set_line, e.to_string()))?;
    let (task_line, task) = headers.remove("task").unwrap();
    let task: TaskId = task.parse().map_err(|e: Error| format_err(task_line, e.to_string()))?;

    if samples.len() < 2 {
        return Err(Error::TooShort {
            len: samples.len(),
            min: 2,
        });
    }

    Ok(TaskRecord {
        subject_id: subject,
        set,
        task,
        signal: InkSignal::new(samples)?,
        metadata: headers.into_iter().map(|(k, (_, v))| (k, v)).collect(),
    })
}

fn parse_sample(line: &str, line_no: usize) -> Result<Sample> {
    let mut values = [0i64; 5];
    let mut fields = line.split_whitespace();
    for (slot, channel) in values.iter_mut().zip(CHANNELS) {
        let token = fields
            .next()
            .ok_or_else(|| format_err(line_no, format!("expected 5 integer fields, missing {channel}")))?;
        *slot = token
            .parse()
            .map_err(|_| format_err(line_no, format!("{channel} field {token:?} is not an integer")))?;
    }
    if fields.next().is_some() {
        return Err(format_err(line_no, "expected 5 integer fields, found more"));
    }

    let [x, y, pressure, azimuth, altitude] = values;
    let range = |channel, value: i64, lo: i64, hi: i64| {
        if (lo..=hi).contains(&value) {
            Ok(value)
        } else {
            Err(Error::ChannelRange {
                channel,
                line: line_no,
                value,
            })
        }
    };
    let coord = |channel, value| range(channel, value, i32::MIN.into(), i32::MAX.into());
    Ok(Sample {
        x: coord(Channel::X, x)? as i32,
        y: coord(Channel::Y, y)? as i32,
        pressure: range(Channel::Pressure, pressure, 0, MAX_PRESSURE.into())? as u16,
        azimuth: range(Channel::Azimuth, azimuth, 0, MAX_AZIMUTH.into())? as u16,
        altitude: range(Channel::Altitude, altitude, 0, MAX_ALTITUDE.into())? as u16,
    })
}

const CHANNELS: [Channel; 5] = [
    Channel::X,
    Channel::Y,
    Channel::Pressure,
    Channel::Azimuth,
    Channel::Altitude,
];

fn format_err(line: usize, message: impl Into<String>) -> Error {
    Error::Format {
        line,
        message: message.into(),
    }
}

/// Renders a record in the task file format. Metadata keys are written in
/// sorted order after the required headers.
pub fn serialize_task(record: &TaskRecord) -> String {
    let mut out = String::with_capacity(32 + record.signal.len() * 24);
    let _ = writeln!(out, "#subject={}", record.subject_id);
    let _ = writeln!(out, "#set={}", record.set);
    let _ = writeln!(out, "#task={}", record.task);
    for (key, value) in &record.metadata {
        let _ = writeln!(out, "#{key}={value}");
    }
    for s in record.signal.samples() {
        let _ = writeln!(out, "{} {} {} {} {}", s.x, s.y, s.pressure, s.azimuth, s.altitude);
    }
    out
}
