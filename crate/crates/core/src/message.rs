//! Messages carried by events, and the angle/vector conversions used by every device.

use crate::error::{Error, Result};

/// Converts an angle (radians) to the unit vector `(cos φ, sin φ)`.
pub fn angle_to_vector(phi: f64) -> [f64; 2] {
    [phi.cos(), phi.sin()]
}

/// Returns the angle of `y` in `(-π, π]`. Positive rescaling of `y` does not change the result.
pub fn vector_to_angle(y: [f64; 2]) -> Result<f64> {
    if !y[0].is_finite() || !y[1].is_finite() {
        return Err(Error::NonFinite);
    }
    if y[0] == 0.0 && y[1] == 0.0 {
        return Err(Error::ZeroVector);
    }
    Ok(y[1].atan2(y[0]))
}

pub(crate) fn normalize2(v: [f64; 2]) -> Result<[f64; 2]> {
    if !v[0].is_finite() || !v[1].is_finite() {
        return Err(Error::NonFinite);
    }
    let n = v[0].hypot(v[1]);
    if n == 0.0 {
        return Err(Error::ZeroVector);
    }
    Ok([v[0] / n, v[1] / n])
}

/// The single unit of information travelling through a network.
///
/// The payload is always a unit 2-vector. Scalar machines encode a value
/// `y ∈ [-1, 1]` as `(y, √(1 − y²))`, so the first component is the value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Message {
    payload: [f64; 2],
}

impl Message {
    /// Builds a message from any non-zero finite vector, renormalizing it.
    pub fn new(v: [f64; 2]) -> Result<Self> {
        Ok(Message {
            payload: normalize2(v)?,
        })
    }

    /// Wraps a vector already known to be unit length (e.g. the image of one under a rotation).
    pub(crate) fn from_unit(payload: [f64; 2]) -> Self {
        debug_assert!((payload[0].hypot(payload[1]) - 1.0).abs() < 1e-9);
        Message { payload }
    }

    pub fn from_angle(phi: f64) -> Self {
        Message {
            payload: angle_to_vector(phi),
        }
    }

    /// Encodes a scalar in `[-1, 1]`.
    pub fn from_scalar(y: f64) -> Result<Self> {
        if !y.is_finite() || y.abs() > 1.0 {
            return Err(Error::InputOutOfRange {
                value: y,
                range: "[-1, 1]",
            });
        }
        Ok(Message {
            payload: [y, (1.0 - y * y).max(0.0).sqrt()],
        })
    }

    pub fn payload(&self) -> [f64; 2] {
        self.payload
    }

    pub fn angle(&self) -> f64 {
        self.payload[1].atan2(self.payload[0])
    }

    /// The scalar carried by a message built with [`Message::from_scalar`].
    pub fn scalar(&self) -> f64 {
        self.payload[0]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn zero_angle_is_unit_x() {
        assert_eq!(angle_to_vector(0.0), [1.0, 0.0]);
    }

    #[test]
    fn thirty_degrees() {
        let v = angle_to_vector(PI / 6.0);
        assert!((v[0] - 3f64.sqrt() / 2.0).abs() < 1e-15);
        assert!((v[1] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn angle_is_scale_invariant() {
        let a = vector_to_angle([3.0, 4.0]).unwrap();
        let b = vector_to_angle([0.6, 0.8]).unwrap();
        assert!((a - b).abs() < 1e-15);
    }

    #[test]
    fn zero_vector_rejected() {
        assert_eq!(vector_to_angle([0.0, 0.0]), Err(Error::ZeroVector));
        assert_eq!(Message::new([0.0, 0.0]), Err(Error::ZeroVector));
        assert_eq!(Message::new([f64::NAN, 1.0]), Err(Error::NonFinite));
    }

    #[test]
    fn message_is_renormalized() {
        let m = Message::new([3.0, 4.0]).unwrap();
        let p = m.payload();
        assert!((p[0].hypot(p[1]) - 1.0).abs() < 1e-12);
        assert_eq!(p, [0.6, 0.8]);
    }

    #[test]
    fn scalar_encoding_round_trips() {
        for &y in &[-1.0, -0.75, 0.0, 0.3, 1.0] {
            let m = Message::from_scalar(y).unwrap();
            assert_eq!(m.scalar(), y);
            let p = m.payload();
            assert!((p[0].hypot(p[1]) - 1.0).abs() < 1e-12);
        }
        assert!(Message::from_scalar(1.5).is_err());
    }
}
