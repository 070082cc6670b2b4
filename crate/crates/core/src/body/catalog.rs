use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{ConvexBody, EllipsoidSupport, HarmonicSupport, PBallSupport};
use crate::error::{Error, Result};

fn default_dim() -> usize {
    2
}

fn default_radius() -> f64 {
    1.0
}

/// Catalog entry for a test body, as it appears in run configurations.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum BodySpec {
    /// Ellipsoid with the given semi-axes, one per coordinate.
    Ellipsoid { semi_axes: Vec<f64> },
    /// Unit ball of the ℓᵖ norm, `1 < p < 2`.
    Pball {
        p: f64,
        #[serde(default = "default_dim")]
        dim: usize,
    },
    /// Sphere with a harmonic perturbation `ε Re((v₁ + i v₂)^mode)` of the
    /// support function.
    SupportHarmonic {
        #[serde(default = "default_radius")]
        radius: f64,
        eps: f64,
        mode: u32,
        #[serde(default = "default_dim")]
        dim: usize,
    },
    /// Smooth planar body of constant width 2 with support `1 + ε cos 3θ`.
    #[serde(rename = "constant_width_2d")]
    ConstantWidth2d { eps: f64 },
}

fn check_dim(dim: usize) -> Result<()> {
    if dim < 2 || dim % 2 != 0 {
        return Err(Error::Validation(format!(
            "dimension must be even and at least 2, got {dim}"
        )));
    }
    Ok(())
}

impl BodySpec {
    pub fn validate(&self) -> Result<()> {
        match self {
            BodySpec::Ellipsoid { semi_axes } => {
                check_dim(semi_axes.len())?;
                if let Some(a) = semi_axes.iter().find(|a| !(a.is_finite() && **a > 0.0)) {
                    return Err(Error::Validation(format!(
                        "ellipsoid semi-axes must be positive, got {a}"
                    )));
                }
            }
            BodySpec::Pball { p, dim } => {
                check_dim(*dim)?;
                if !(*p > 1.0 && *p < 2.0) {
                    return Err(Error::Validation(format!(
                        "pball exponent must lie in (1, 2), got {p}"
                    )));
                }
            }
            BodySpec::SupportHarmonic {
                radius,
                eps,
                mode,
                dim,
            } => {
                check_dim(*dim)?;
                if !(radius.is_finite() && *radius > 0.0) {
                    return Err(Error::Validation(format!(
                        "support_harmonic radius must be positive, got {radius}"
                    )));
                }
                if *mode < 2 {
                    return Err(Error::Validation(format!(
                        "support_harmonic mode must be at least 2, got {mode}"
                    )));
                }
                let bound = radius / ((mode * mode - 1) as f64);
                if !(eps.is_finite() && eps.abs() < bound) {
                    return Err(Error::Validation(format!(
                        "support_harmonic eps must satisfy |eps| < radius/(mode^2-1) = {bound}, got {eps}"
                    )));
                }
            }
            BodySpec::ConstantWidth2d { eps } => {
                if !(eps.is_finite() && eps.abs() < 0.125) {
                    return Err(Error::Validation(format!(
                        "constant_width_2d eps must satisfy |eps| < 1/8, got {eps}"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn build(&self) -> Result<ConvexBody> {
        self.validate()?;
        match self {
            BodySpec::Ellipsoid { semi_axes } => ConvexBody::from_support(
                Arc::new(EllipsoidSupport::new(semi_axes.clone())),
                format!("ellipsoid{semi_axes:?}"),
            ),
            BodySpec::Pball { p, dim } => ConvexBody::from_support(
                Arc::new(PBallSupport::new(*p, *dim)),
                format!("pball(p={p}, dim={dim})"),
            ),
            BodySpec::SupportHarmonic {
                radius,
                eps,
                mode,
                dim,
            } => ConvexBody::from_support(
                Arc::new(HarmonicSupport::new(*radius, *eps, *mode, *dim)),
                format!("support_harmonic(r={radius}, eps={eps}, mode={mode}, dim={dim})"),
            ),
            BodySpec::ConstantWidth2d { eps } => ConvexBody::from_support(
                Arc::new(HarmonicSupport::new(1.0, *eps, 3, 2)),
                format!("constant_width_2d(eps={eps})"),
            ),
        }
    }

    /// Whether `p(v) = p(−v)` holds by construction.
    pub fn is_centrally_symmetric(&self) -> bool {
        match self {
            BodySpec::Ellipsoid { .. } | BodySpec::Pball { .. } => true,
            BodySpec::SupportHarmonic { mode, .. } => mode % 2 == 0,
            BodySpec::ConstantWidth2d { eps } => *eps == 0.0,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_catalog_kinds() {
        let s: BodySpec = serde_json::from_str(r#"{"kind":"ellipsoid","semi_axes":[1,0.6]}"#).unwrap();
        assert_eq!(s, BodySpec::Ellipsoid { semi_axes: vec![1.0, 0.6] });
        let s: BodySpec = serde_json::from_str(r#"{"kind":"constant_width_2d","eps":0.1}"#).unwrap();
        assert_eq!(s, BodySpec::ConstantWidth2d { eps: 0.1 });
        let s: BodySpec = serde_json::from_str(r#"{"kind":"pball","p":1.5}"#).unwrap();
        assert_eq!(s, BodySpec::Pball { p: 1.5, dim: 2 });
        let s: BodySpec =
            serde_json::from_str(r#"{"kind":"support_harmonic","eps":0.02,"mode":4,"dim":4}"#).unwrap();
        assert_eq!(
            s,
            BodySpec::SupportHarmonic { radius: 1.0, eps: 0.02, mode: 4, dim: 4 }
        );
    }

    #[test]
    fn rejects_unknown_fields_and_kinds() {
        assert!(serde_json::from_str::<BodySpec>(r#"{"kind":"ellipsoid","semi_axes":[1,1],"x":1}"#).is_err());
        assert!(serde_json::from_str::<BodySpec>(r#"{"kind":"triangle"}"#).is_err());
    }

    #[test]
    fn validity_ranges() {
        assert!(BodySpec::ConstantWidth2d { eps: 0.2 }.validate().is_err());
        assert!(BodySpec::ConstantWidth2d { eps: 0.125 }.validate().is_err());
        assert!(BodySpec::ConstantWidth2d { eps: -0.12 }.validate().is_ok());
        assert!(BodySpec::Pball { p: 2.0, dim: 2 }.validate().is_err());
        assert!(BodySpec::Pball { p: 1.5, dim: 3 }.validate().is_err());
        assert!(BodySpec::Ellipsoid { semi_axes: vec![1.0, 0.0] }.validate().is_err());
        assert!(BodySpec::Ellipsoid { semi_axes: vec![1.0, 1.0, 1.0] }.validate().is_err());
        assert!(BodySpec::SupportHarmonic { radius: 1.0, eps: 0.1, mode: 3, dim: 2 }.validate().is_ok());
        assert!(BodySpec::SupportHarmonic { radius: 1.0, eps: 0.1, mode: 4, dim: 2 }.validate().is_err());
        assert!(BodySpec::SupportHarmonic { radius: 1.0, eps: 0.0, mode: 1, dim: 2 }.validate().is_err());
    }
}
