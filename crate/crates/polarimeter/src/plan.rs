use mueller_core::Angle;
use serde::{Deserialize, Serialize};

/// Which polarization elements the ellipsometer rotates.
///
/// * `Lp` - linear polarizers on both sides, no wave plates.
/// * `Qwp` - quarter-wave plates on both sides rotate; the linear
///   polarizers stay at the reference orientation.
/// * `LpQwp` - all four elements rotate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ConditionTag {
    #[serde(rename = "LP")]
    Lp,
    #[serde(rename = "QWP")]
    Qwp,
    #[serde(rename = "LP+QWP")]
    LpQwp,
}

impl ConditionTag {
    /// Number of free angles per capture.
    pub fn free_angles(self) -> usize {
        match self {
            ConditionTag::Lp | ConditionTag::Qwp => 2,
            ConditionTag::LpQwp => 4,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            ConditionTag::Lp => "LP",
            ConditionTag::Qwp => "QWP",
            ConditionTag::LpQwp => "LP+QWP",
        }
    }
}

/// Rotation angles of the four elements for one capture. Angles that the
/// condition does not rotate stay at the reference orientation (zero).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CaptureConfig {
    pub theta_lg: Angle,
    pub theta_qg: Angle,
    pub theta_qa: Angle,
    pub theta_la: Angle,
}

impl CaptureConfig {
    pub fn reference() -> Self {
        CaptureConfig {
            theta_lg: Angle(0.0),
            theta_qg: Angle(0.0),
            theta_qa: Angle(0.0),
            theta_la: Angle(0.0),
        }
    }

    pub fn canonical(self) -> Self {
        CaptureConfig {
            theta_lg: self.theta_lg.canonical(),
            theta_qg: self.theta_qg.canonical(),
            theta_qa: self.theta_qa.canonical(),
            theta_la: self.theta_la.canonical(),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum PlanError {
    #[error("measurement plan needs at least one capture")]
    EmptyPlan,
    #[error("source intensity must be positive, got {0}")]
    NonPositiveIntensity(f64),
}

/// The learnable optical design: an ordered list of capture
/// configurations under one condition, plus the source intensity.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementPlan {
    pub condition: ConditionTag,
    pub captures: Vec<CaptureConfig>,
    pub source_intensity: f64,
}

impl MeasurementPlan {
    pub fn new(
        condition: ConditionTag,
        captures: Vec<CaptureConfig>,
        source_intensity: f64,
    ) -> Result<Self, PlanError> {
        if captures.is_empty() {
            return Err(PlanError::EmptyPlan);
        }
        if source_intensity <= 0.0 {
            return Err(PlanError::NonPositiveIntensity(source_intensity));
        }
        Ok(MeasurementPlan {
            condition,
            captures,
            source_intensity,
        })
    }

    pub fn len(&self) -> usize {
        self.captures.len()
    }

    pub fn is_empty(&self) -> bool {
        self.captures.is_empty()
    }

    pub fn canonical(mut self) -> Self {
        for c in &mut self.captures {
            *c = c.canonical();
        }
        self
    }

    /// Dual-rotating-compensator schedule with the analyzer-side plate at
    /// five times the generator-side angle, sampled at `k` equally spaced
    /// points over the closed interval [0, π].
    ///
    /// The closed-interval spacing π/(k−1) keeps the schedule full rank at
    /// k = 24; spacing π/k instead places the samples on the nodes of the
    /// twelfth harmonic and drops the design rank to 15 there (that
    /// aliasing is what the uniform training schedule exhibits).
    pub fn azzam(k: usize) -> Result<Self, PlanError> {
        if k == 0 {
            return Err(PlanError::EmptyPlan);
        }
        let step = if k > 1 {
            std::f64::consts::PI / (k - 1) as f64
        } else {
            0.0
        };
        let captures = (0..k)
            .map(|i| {
                let qg = i as f64 * step;
                let mut c = CaptureConfig::reference();
                c.theta_qg = Angle(qg);
                c.theta_qa = Angle((5.0 * qg).rem_euclid(std::f64::consts::PI));
                c
            })
            .collect();
        MeasurementPlan::new(ConditionTag::Qwp, captures, 1.0)
    }
}

// Wire format: angles in degrees, as in the experiment reports.

#[derive(Serialize, Deserialize)]
struct CaptureWire {
    theta_lg_deg: f64,
    theta_qg_deg: f64,
    theta_qa_deg: f64,
    theta_la_deg: f64,
}

#[derive(Serialize, Deserialize)]
struct PlanWire {
    condition: ConditionTag,
    captures: Vec<CaptureWire>,
    source_intensity: f64,
}

impl Serialize for MeasurementPlan {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let wire = PlanWire {
            condition: self.condition,
            captures: self
                .captures
                .iter()
                .map(|c| CaptureWire {
                    theta_lg_deg: c.theta_lg.degrees(),
                    theta_qg_deg: c.theta_qg.degrees(),
                    theta_qa_deg: c.theta_qa.degrees(),
                    theta_la_deg: c.theta_la.degrees(),
                })
                .collect(),
            source_intensity: self.source_intensity,
        };
        wire.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for MeasurementPlan {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let wire = PlanWire::deserialize(deserializer)?;
        if wire.captures.is_empty() {
            return Err(serde::de::Error::custom(
                "measurement plan needs at least one capture",
            ));
        }
        if wire.source_intensity <= 0.0 {
            return Err(serde::de::Error::custom(
                "source intensity must be positive",
            ));
        }
        Ok(MeasurementPlan {
            condition: wire.condition,
            captures: wire
                .captures
                .iter()
                .map(|c| CaptureConfig {
                    theta_lg: Angle::from_degrees(c.theta_lg_deg),
                    theta_qg: Angle::from_degrees(c.theta_qg_deg),
                    theta_qa: Angle::from_degrees(c.theta_qa_deg),
                    theta_la: Angle::from_degrees(c.theta_la_deg),
                })
                .collect(),
            source_intensity: wire.source_intensity,
        })
    }
}
