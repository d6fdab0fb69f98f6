//! JSON exchange format for instances:
//! `{"dim": n, "lambda": l, "c0": [..], "balls": [{"center": [..], "radius": r}, ..]}`.

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{Ball, BallSet, GeometryError, Instance, Point};
use crate::ssp::{SspError, SspInstance};

#[derive(Debug, Error)]
pub enum IoError {
    #[error("cannot read or write {path}: {source}")]
    File { path: String, source: std::io::Error },
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("dimension field is {declared} but {what} has length {actual}")]
    DimensionMismatch { declared: usize, what: String, actual: usize },
    #[error("invalid instance: {0}")]
    Geometry(#[from] GeometryError),
    #[error("invalid subset-sum instance: {0}")]
    Ssp(#[from] SspError),
}

/// On-disk layout of an [`Instance`]; the field order is the serialization order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub dim: usize,
    pub lambda: f64,
    pub c0: Vec<f64>,
    pub balls: Vec<BallFile>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BallFile {
    pub center: Vec<f64>,
    pub radius: f64,
}

impl InstanceFile {
    pub fn from_instance(inst: &Instance) -> Self {
        Self {
            dim: inst.dim(),
            lambda: inst.lambda,
            c0: inst.c0.coords.clone(),
            balls: inst.q.balls().iter().map(|b| BallFile { center: b.center.coords.clone(), radius: b.radius }).collect(),
        }
    }

    /// Validates lengths, finiteness, radii and `λ` and builds the instance.
    pub fn into_instance(self) -> Result<Instance, IoError> {
        let dim = self.dim;
        if self.c0.len() != dim {
            return Err(IoError::DimensionMismatch { declared: dim, what: "c0".into(), actual: self.c0.len() });
        }
        let mut balls = Vec::with_capacity(self.balls.len());
        for (k, b) in self.balls.into_iter().enumerate() {
            if b.center.len() != dim {
                return Err(IoError::DimensionMismatch { declared: dim, what: format!("balls[{k}].center"), actual: b.center.len() });
            }
            let ball = Ball::new(Point::new(b.center), b.radius).map_err(|e| match e {
                GeometryError::NonPositiveRadius { .. } => GeometryError::NonPositiveRadius { index: k },
                other => other,
            })?;
            balls.push(ball);
        }
        Ok(Instance::new(BallSet::new(dim, balls)?, Point::new(self.c0), self.lambda)?)
    }
}

pub fn parse_instance(json: &str) -> Result<Instance, IoError> {
    serde_json::from_str::<InstanceFile>(json)?.into_instance()
}

pub fn instance_to_json(inst: &Instance) -> String {
    serde_json::to_string_pretty(&InstanceFile::from_instance(inst)).expect("instance serializes")
}

pub fn read_instance(path: &Path) -> Result<Instance, IoError> {
    parse_instance(&read(path)?)
}

pub fn write_instance(path: &Path, inst: &Instance) -> Result<(), IoError> {
    std::fs::write(path, instance_to_json(inst) + "\n").map_err(|source| IoError::File { path: path.display().to_string(), source })
}

/// Parses `{"s": [..], "t": .., "beta": ..}` (`beta` optional).
pub fn parse_ssp(json: &str) -> Result<SspInstance, IoError> {
    let ssp: SspInstance = serde_json::from_str(json)?;
    ssp.validate()?;
    Ok(ssp)
}

pub fn read_ssp(path: &Path) -> Result<SspInstance, IoError> {
    parse_ssp(&read(path)?)
}

fn read(path: &Path) -> Result<String, IoError> {
    std::fs::read_to_string(path).map_err(|source| IoError::File { path: path.display().to_string(), source })
}
