//! Per-step episode traces, as CSV or a little-endian binary blob.
//!
//! Both variants share one column order:
//!
//! ```text
//! step,
//! agent_{i}_x, agent_{i}_y            for every agent i,
//! landmark_{k}_x, landmark_{k}_y      for every landmark k,
//! agent_{i}_a{d}                      for every agent i and action component d,
//! agent_{i}_reward                    for every agent i
//! ```
//!
//! The binary variant is: magic `CLMTRAJ1`, `u32` agent count, `u32` landmark
//! count, one `u32` action dimension per agent, `u64` record count, then per
//! record a `u64` step followed by the remaining columns as `f64`, all
//! little-endian.

use std::io::{Read, Write};

use super::world::World;
use crate::{Error, Result};

const MAGIC: &[u8; 8] = b"CLMTRAJ1";

#[derive(Clone, Debug, PartialEq)]
pub struct StepRecord {
    pub step: u64,
    pub agent_positions: Vec<[f64; 2]>,
    pub landmark_positions: Vec<[f64; 2]>,
    pub actions: Vec<Vec<f64>>,
    pub rewards: Vec<f64>,
}

impl StepRecord {
    /// Snapshot of `world` after a step taken with `actions`.
    pub fn capture(world: &World, actions: &[Vec<f64>], rewards: &[f64]) -> Self {
        Self {
            step: world.timestep as u64,
            agent_positions: world.agents.iter().map(|a| a.position).collect(),
            landmark_positions: world.landmarks.iter().map(|l| l.position).collect(),
            actions: actions.to_vec(),
            rewards: rewards.to_vec(),
        }
    }

    fn values(&self) -> Vec<f64> {
        let mut v = Vec::new();
        v.extend(self.agent_positions.iter().flatten());
        v.extend(self.landmark_positions.iter().flatten());
        v.extend(self.actions.iter().flatten());
        v.extend(&self.rewards);
        v
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub action_dims: Vec<usize>,
    pub num_landmarks: usize,
    pub records: Vec<StepRecord>,
}

impl Trajectory {
    pub fn new(action_dims: Vec<usize>, num_landmarks: usize) -> Self {
        Self {
            action_dims,
            num_landmarks,
            records: Vec::new(),
        }
    }

    pub fn for_world(world: &World) -> Self {
        Self::new(world.action_dims(), world.landmarks.len())
    }

    pub fn push(&mut self, record: StepRecord) {
        self.records.push(record);
    }

    fn num_agents(&self) -> usize {
        self.action_dims.len()
    }

    fn width(&self) -> usize {
        2 * self.num_agents()
            + 2 * self.num_landmarks
            + self.action_dims.iter().sum::<usize>()
            + self.num_agents()
    }

    pub fn header(&self) -> Vec<String> {
        let n = self.num_agents();
        let mut h = vec!["step".to_string()];
        for i in 0..n {
            h.push(format!("agent_{i}_x"));
            h.push(format!("agent_{i}_y"));
        }
        for k in 0..self.num_landmarks {
            h.push(format!("landmark_{k}_x"));
            h.push(format!("landmark_{k}_y"));
        }
        for (i, &dim) in self.action_dims.iter().enumerate() {
            for d in 0..dim {
                h.push(format!("agent_{i}_a{d}"));
            }
        }
        for i in 0..n {
            h.push(format!("agent_{i}_reward"));
        }
        h
    }

    fn record_from_values(&self, step: u64, values: &[f64]) -> Result<StepRecord> {
        if values.len() != self.width() {
            return Err(Error::Usage(format!(
                "trajectory row has {} values, expected {}",
                values.len(),
                self.width()
            )));
        }
        let n = self.num_agents();
        let mut it = values.iter().copied();
        let mut take = |k: usize| -> Vec<f64> { it.by_ref().take(k).collect() };
        let pairs = |v: Vec<f64>| v.chunks(2).map(|c| [c[0], c[1]]).collect::<Vec<_>>();
        let agent_positions = pairs(take(2 * n));
        let landmark_positions = pairs(take(2 * self.num_landmarks));
        let actions = self.action_dims.iter().map(|&d| take(d)).collect();
        let rewards = take(n);
        Ok(StepRecord {
            step,
            agent_positions,
            landmark_positions,
            actions,
            rewards,
        })
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(out);
        w.write_record(self.header())?;
        for r in &self.records {
            let mut row = vec![r.step.to_string()];
            row.extend(r.values().iter().map(f64::to_string));
            w.write_record(row)?;
        }
        w.flush().map_err(|e| Error::io("trajectory csv", e))?;
        Ok(())
    }

    /// Reads a CSV trace; the layout is recovered from the header.
    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        let mut r = csv::ReaderBuilder::new().from_reader(input);
        let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
        let n = header.iter().filter(|h| h.ends_with("_reward")).count();
        let num_landmarks = header.iter().filter(|h| h.starts_with("landmark_")).count() / 2;
        let action_dims = (0..n)
            .map(|i| {
                let prefix = format!("agent_{i}_a");
                header.iter().filter(|h| h.starts_with(&prefix)).count()
            })
            .collect();
        let mut traj = Trajectory::new(action_dims, num_landmarks);
        if traj.header() != header {
            return Err(Error::Usage(
                "trajectory CSV header does not follow the documented layout".into(),
            ));
        }
        for row in r.records() {
            let row = row?;
            let step = row[0]
                .parse()
                .map_err(|_| Error::Usage(format!("bad step value '{}'", &row[0])))?;
            let values = row
                .iter()
                .skip(1)
                .map(|s| {
                    s.parse::<f64>()
                        .map_err(|_| Error::Usage(format!("bad real '{s}'")))
                })
                .collect::<Result<Vec<_>>>()?;
            let rec = traj.record_from_values(step, &values)?;
            traj.records.push(rec);
        }
        Ok(traj)
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&(self.num_agents() as u32).to_le_bytes());
        out.extend_from_slice(&(self.num_landmarks as u32).to_le_bytes());
        for &d in &self.action_dims {
            out.extend_from_slice(&(d as u32).to_le_bytes());
        }
        out.extend_from_slice(&(self.records.len() as u64).to_le_bytes());
        for r in &self.records {
            out.extend_from_slice(&r.step.to_le_bytes());
            for v in r.values() {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut cursor = bytes;
        let mut take = |n: usize| -> Result<&[u8]> {
            if cursor.len() < n {
                return Err(Error::Usage("truncated trajectory blob".into()));
            }
            let (head, tail) = cursor.split_at(n);
            cursor = tail;
            Ok(head)
        };
        if take(8)? != MAGIC {
            return Err(Error::Usage("not a trajectory blob".into()));
        }
        let u32_at = |b: &[u8]| u32::from_le_bytes(b.try_into().expect("4 bytes")) as usize;
        let u64_at = |b: &[u8]| u64::from_le_bytes(b.try_into().expect("8 bytes"));
        let n = u32_at(take(4)?);
        let num_landmarks = u32_at(take(4)?);
        let action_dims = (0..n)
            .map(|_| take(4).map(u32_at))
            .collect::<Result<Vec<_>>>()?;
        let count = u64_at(take(8)?);
        let mut traj = Trajectory::new(action_dims, num_landmarks);
        let width = traj.width();
        for _ in 0..count {
            let step = u64_at(take(8)?);
            let values = (0..width)
                .map(|_| take(8).map(|b| f64::from_le_bytes(b.try_into().expect("8 bytes"))))
                .collect::<Result<Vec<_>>>()?;
            let rec = traj.record_from_values(step, &values)?;
            traj.records.push(rec);
        }
        Ok(traj)
    }
}
