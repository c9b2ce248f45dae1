use serde::{Deserialize, Serialize};

use super::ModelError;

/// Mean Earth radius used for great-circle distances.
pub const EARTH_RADIUS_KM: f64 = 6371.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CoordinateSystem {
    /// Kilometres on a flat plane.
    Planar,
    /// Latitude/longitude in degrees.
    Geographic,
}

impl std::fmt::Display for CoordinateSystem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CoordinateSystem::Planar => f.write_str("planar"),
            CoordinateSystem::Geographic => f.write_str("geographic"),
        }
    }
}

/// A position of a depot or customer rooftop.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Location {
    Planar { x: f64, y: f64 },
    Geographic { lat: f64, lon: f64 },
}

impl Location {
    pub fn planar(x: f64, y: f64) -> Self {
        Location::Planar { x, y }
    }

    pub fn geographic(lat: f64, lon: f64) -> Self {
        Location::Geographic { lat, lon }
    }

    pub fn system(&self) -> CoordinateSystem {
        match self {
            Location::Planar { .. } => CoordinateSystem::Planar,
            Location::Geographic { .. } => CoordinateSystem::Geographic,
        }
    }

    pub fn check(&self) -> Result<(), ModelError> {
        match *self {
            Location::Planar { x, y } if x.is_finite() && y.is_finite() => Ok(()),
            Location::Geographic { lat, lon }
                if (-90.0..=90.0).contains(&lat) && (-180.0..=180.0).contains(&lon) =>
            {
                Ok(())
            }
            other => Err(ModelError::InvalidCoordinate(other)),
        }
    }
}

/// Distance in kilometres: Euclidean for planar points, haversine for geographic ones.
pub fn distance(a: &Location, b: &Location) -> Result<f64, ModelError> {
    match (*a, *b) {
        (Location::Planar { x: x1, y: y1 }, Location::Planar { x: x2, y: y2 }) => {
            Ok((x2 - x1).hypot(y2 - y1))
        }
        (
            Location::Geographic {
                lat: lat1,
                lon: lon1,
            },
            Location::Geographic {
                lat: lat2,
                lon: lon2,
            },
        ) => Ok(haversine_km(lat1, lon1, lat2, lon2)),
        _ => Err(ModelError::CoordinateMismatch {
            left: a.system(),
            right: b.system(),
        }),
    }
}

fn haversine_km(lat1: f64, lon1: f64, lat2: f64, lon2: f64) -> f64 {
    let phi1 = lat1.to_radians();
    let phi2 = lat2.to_radians();
    let half_dphi = ((lat2 - lat1).to_radians() / 2.0).sin();
    let half_dlambda = ((lon2 - lon1).to_radians() / 2.0).sin();
    let h = half_dphi * half_dphi + phi1.cos() * phi2.cos() * half_dlambda * half_dlambda;
    2.0 * EARTH_RADIUS_KM * h.sqrt().min(1.0).asin()
}
