//! On-disk episode recordings.
//!
//! An episode directory holds three files:
//!
//! - `episode.json` — [`EpisodeMeta`]: format version, seed, full rig ground
//!   truth, segment duration, and one [`StepMeta`] per motion step.
//! - `detections.csv` — columns `timestamp,corner_id,u,v`; consecutive rows
//!   sharing a timestamp form one board observation, corners in ascending-id
//!   order.
//! - `imu.csv` — columns `timestamp,ax,ay,az,gx,gy,gz` at the IMU rate.
//!
//! Floats are written in shortest round-trip decimal form, so a read-back
//! record compares bit-for-bit equal to the one written.

use crate::{summarize_corners, Detection, ImuSamples, RigConfig};
use serde::{Deserialize, Serialize};
use std::fs;
use std::path::Path;
use vical_geom::{Action, Pose};

/// Current on-disk format version.
pub const RECORD_VERSION: u32 = 1;

/// Metadata for one motion step (one segment) of an episode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepMeta {
    pub index: usize,
    /// Tick of the step's first IMU sample on the episode grid.
    pub start_tick: u64,
    pub start_pose: Pose,
    pub end_pose: Pose,
    pub action: Action,
}

/// Episode-level metadata: everything needed to interpret the CSV streams.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeMeta {
    pub version: u32,
    pub seed: u64,
    pub rig: RigConfig,
    pub segment_duration: f64,
    pub steps: Vec<StepMeta>,
}

/// A full episode: metadata plus both sensor streams.
#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeRecord {
    pub meta: EpisodeMeta,
    /// Board observations as `(timestamp, detection)`, globally monotone.
    pub frames: Vec<(f64, Detection)>,
    pub imu: ImuSamples,
}

#[derive(Debug, thiserror::Error)]
pub enum RecordError {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("metadata error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("unsupported record version {found} (expected {RECORD_VERSION})")]
    Version { found: u32 },
    #[error("detection at t={timestamp} is missing an outer corner")]
    MalformedDetection { timestamp: f64 },
}

#[derive(Serialize, Deserialize)]
struct DetRow {
    timestamp: f64,
    corner_id: usize,
    u: f64,
    v: f64,
}

#[derive(Serialize, Deserialize)]
struct ImuRow {
    timestamp: f64,
    ax: f64,
    ay: f64,
    az: f64,
    gx: f64,
    gy: f64,
    gz: f64,
}

/// Writes `record` into `dir` (created if missing).
pub fn write_episode(dir: &Path, record: &EpisodeRecord) -> Result<(), RecordError> {
    fs::create_dir_all(dir)?;
    let json = serde_json::to_string_pretty(&record.meta)?;
    fs::write(dir.join("episode.json"), json)?;

    let mut det = csv::Writer::from_path(dir.join("detections.csv"))?;
    for (timestamp, d) in &record.frames {
        for (corner_id, px) in &d.corners {
            det.serialize(DetRow {
                timestamp: *timestamp,
                corner_id: *corner_id,
                u: px[0],
                v: px[1],
            })?;
        }
    }
    det.flush().map_err(std::io::Error::from)?;

    let mut imu = csv::Writer::from_path(dir.join("imu.csv"))?;
    for i in 0..record.imu.len() {
        imu.serialize(ImuRow {
            timestamp: record.imu.timestamps[i],
            ax: record.imu.accel[i][0],
            ay: record.imu.accel[i][1],
            az: record.imu.accel[i][2],
            gx: record.imu.gyro[i][0],
            gy: record.imu.gyro[i][1],
            gz: record.imu.gyro[i][2],
        })?;
    }
    imu.flush().map_err(std::io::Error::from)?;
    Ok(())
}

/// Reads an episode from `dir`, regrouping detection rows by timestamp and
/// recomputing each observation's summary statistics.
pub fn read_episode(dir: &Path) -> Result<EpisodeRecord, RecordError> {
    let meta: EpisodeMeta = serde_json::from_str(&fs::read_to_string(dir.join("episode.json"))?)?;
    if meta.version != RECORD_VERSION {
        return Err(RecordError::Version {
            found: meta.version,
        });
    }
    let board = &meta.rig.board;
    let (w, h) = (meta.rig.intrinsics.width, meta.rig.intrinsics.height);

    let mut frames: Vec<(f64, Detection)> = Vec::new();
    let mut pending: Option<(f64, Vec<(usize, [f64; 2])>)> = None;
    let flush = |pending: Option<(f64, Vec<(usize, [f64; 2])>)>,
                     frames: &mut Vec<(f64, Detection)>|
     -> Result<(), RecordError> {
        if let Some((t, corners)) = pending {
            let det = summarize_corners(board, w, h, corners)
                .ok_or(RecordError::MalformedDetection { timestamp: t })?;
            frames.push((t, det));
        }
        Ok(())
    };
    let mut det_reader = csv::Reader::from_path(dir.join("detections.csv"))?;
    for row in det_reader.deserialize() {
        let row: DetRow = row?;
        match &mut pending {
            Some((t, corners)) if *t == row.timestamp => {
                corners.push((row.corner_id, [row.u, row.v]));
            }
            _ => {
                flush(pending.take(), &mut frames)?;
                pending = Some((row.timestamp, vec![(row.corner_id, [row.u, row.v])]));
            }
        }
    }
    flush(pending.take(), &mut frames)?;

    let mut imu = ImuSamples::default();
    let mut imu_reader = csv::Reader::from_path(dir.join("imu.csv"))?;
    for row in imu_reader.deserialize() {
        let row: ImuRow = row?;
        imu.timestamps.push(row.timestamp);
        imu.accel.push([row.ax, row.ay, row.az]);
        imu.gyro.push([row.gx, row.gy, row.gz]);
    }

    Ok(EpisodeRecord { meta, frames, imu })
}
