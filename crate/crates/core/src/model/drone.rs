use serde::{Deserialize, Serialize};

use super::ModelError;

/// Homogeneous drone fleet parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DroneSpec {
    /// Flying range with no payload.
    pub max_range_km: f64,
    pub max_capacity_kg: f64,
    /// Payload penalty factor at full load.
    pub beta_max: f64,
}

impl Default for DroneSpec {
    fn default() -> Self {
        DroneSpec {
            max_range_km: 30.0,
            max_capacity_kg: 8.0,
            beta_max: 2.0,
        }
    }
}

impl DroneSpec {
    pub fn new(max_range_km: f64, max_capacity_kg: f64, beta_max: f64) -> Result<Self, ModelError> {
        let spec = DroneSpec {
            max_range_km,
            max_capacity_kg,
            beta_max,
        };
        spec.check()?;
        Ok(spec)
    }

    pub fn check(&self) -> Result<(), ModelError> {
        if !(self.max_range_km.is_finite() && self.max_range_km > 0.0) {
            return Err(ModelError::InvalidDrone(format!(
                "max_range_km must be positive, got {}",
                self.max_range_km
            )));
        }
        if !(self.max_capacity_kg.is_finite() && self.max_capacity_kg > 0.0) {
            return Err(ModelError::InvalidDrone(format!(
                "max_capacity_kg must be positive, got {}",
                self.max_capacity_kg
            )));
        }
        if !(self.beta_max.is_finite() && self.beta_max >= 1.0) {
            return Err(ModelError::InvalidDrone(format!(
                "beta_max must be at least 1, got {}",
                self.beta_max
            )));
        }
        Ok(())
    }

    pub fn payload_penalty(&self, weight_kg: f64) -> Result<f64, ModelError> {
        payload_penalty(weight_kg, self)
    }

    pub fn effective_range(&self, weight_kg: f64) -> Result<f64, ModelError> {
        effective_range(weight_kg, self)
    }
}

/// Weights of the distance and sortie terms of the objective.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObjectiveWeights {
    pub alpha: f64,
    pub rho: f64,
}

impl Default for ObjectiveWeights {
    fn default() -> Self {
        ObjectiveWeights {
            alpha: 0.9,
            rho: 0.1,
        }
    }
}

impl ObjectiveWeights {
    pub fn new(alpha: f64, rho: f64) -> Result<Self, ModelError> {
        let w = ObjectiveWeights { alpha, rho };
        w.check()?;
        Ok(w)
    }

    pub fn check(&self) -> Result<(), ModelError> {
        if !(0.0..=1.0).contains(&self.alpha) || !(0.0..=1.0).contains(&self.rho) {
            return Err(ModelError::InvalidWeights {
                alpha: self.alpha,
                rho: self.rho,
            });
        }
        Ok(())
    }
}

/// Linear payload penalty: 1 when empty, `beta_max` at full capacity.
pub fn payload_penalty(weight_kg: f64, spec: &DroneSpec) -> Result<f64, ModelError> {
    if !(0.0..=spec.max_capacity_kg).contains(&weight_kg) {
        return Err(ModelError::PayloadOutOfRange {
            weight_kg,
            capacity_kg: spec.max_capacity_kg,
        });
    }
    Ok((spec.beta_max - 1.0) / spec.max_capacity_kg * weight_kg + 1.0)
}

/// Range of a drone carrying `weight_kg`.
pub fn effective_range(weight_kg: f64, spec: &DroneSpec) -> Result<f64, ModelError> {
    Ok(spec.max_range_km / payload_penalty(weight_kg, spec)?)
}
