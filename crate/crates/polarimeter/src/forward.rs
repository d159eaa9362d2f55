use crate::{CaptureConfig, ConditionTag};
use mueller_core::{linear_polarizer, quarter_wave_plate, MuellerMatrix, StokesVector};

/// Mueller matrix of the source-side optic stack.
///
/// LP condition: a single rotating polarizer. With wave plates present
/// the stack is `Q(θ_Qg)·L(θ_Lg)`; under QWP the polarizer stays at the
/// reference orientation.
pub fn generator_matrix(c: &CaptureConfig, tag: ConditionTag) -> MuellerMatrix {
    match tag {
        ConditionTag::Lp => linear_polarizer(c.theta_lg),
        ConditionTag::Qwp => {
            quarter_wave_plate(c.theta_qg) * linear_polarizer(mueller_core::Angle(0.0))
        }
        ConditionTag::LpQwp => quarter_wave_plate(c.theta_qg) * linear_polarizer(c.theta_lg),
    }
}

/// Mueller matrix of the camera-side optic stack, `L(θ_La)·Q(θ_Qa)`
/// when wave plates are present.
pub fn analyzer_matrix(c: &CaptureConfig, tag: ConditionTag) -> MuellerMatrix {
    match tag {
        ConditionTag::Lp => linear_polarizer(c.theta_la),
        ConditionTag::Qwp => {
            linear_polarizer(mueller_core::Angle(0.0)) * quarter_wave_plate(c.theta_qa)
        }
        ConditionTag::LpQwp => linear_polarizer(c.theta_la) * quarter_wave_plate(c.theta_qa),
    }
}

/// Simulated sensor reading: the first Stokes component of `A·M·P·s`
/// with an unpolarized source `s = [L,0,0,0]`.
pub fn intensity(m: &MuellerMatrix, c: &CaptureConfig, tag: ConditionTag, source: f64) -> f64 {
    let s = StokesVector::unpolarized(source);
    let probed = m.apply(generator_matrix(c, tag).apply(s));
    analyzer_matrix(c, tag).apply(probed).s0
}

/// Stokes state leaving the generator for unit source intensity.
pub(crate) fn generator_stokes(c: &CaptureConfig, tag: ConditionTag, source: f64) -> [f64; 4] {
    generator_matrix(c, tag)
        .apply(StokesVector::unpolarized(source))
        .as_array()
}

/// First row of the analyzer matrix; the linear functional the sensor
/// applies to the Stokes state reflected by the sample.
pub(crate) fn analyzer_row(c: &CaptureConfig, tag: ConditionTag) -> [f64; 4] {
    let a = analyzer_matrix(c, tag);
    a.m[0]
}

#[cfg(test)]
mod tests {
    use super::*;
    use mueller_core::Angle;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

    #[test]
    fn lp_generator_is_the_polarizer() {
        let mut c = CaptureConfig::reference();
        c.theta_lg = Angle(0.0);
        let g = generator_matrix(&c, ConditionTag::Lp);
        assert!(g.max_abs_diff(&linear_polarizer(Angle(0.0))) < 1e-15);
    }

    #[test]
    fn qwp_generator_at_45_degrees_makes_circular_light() {
        let mut c = CaptureConfig::reference();
        c.theta_qg = Angle(FRAC_PI_4);
        let out = generator_matrix(&c, ConditionTag::Qwp).apply(StokesVector::unpolarized(1.0));
        let expect = [0.5, 0.0, 0.0, 0.5];
        for (got, want) in out.as_array().iter().zip(expect) {
            assert!((got - want).abs() < 1e-15);
        }
    }

    #[test]
    fn lp_qwp_generator_at_reference() {
        let c = CaptureConfig::reference();
        let g = generator_matrix(&c, ConditionTag::LpQwp);
        let expect = quarter_wave_plate(Angle(0.0)) * linear_polarizer(Angle(0.0));
        assert!(g.max_abs_diff(&expect) < 1e-15);
    }

    #[test]
    fn lp_analyzer_is_the_polarizer() {
        let mut c = CaptureConfig::reference();
        c.theta_la = Angle(FRAC_PI_2);
        let a = analyzer_matrix(&c, ConditionTag::Lp);
        assert!(a.max_abs_diff(&linear_polarizer(Angle(FRAC_PI_2))) < 1e-15);
    }

    #[test]
    fn qwp_analyzer_first_row_selects_circular_component() {
        // θ_Qa = 45°: first row (1/2)[1,0,0,−1]; θ_Qa = 135°: (1/2)[1,0,0,1].
        let mut c = CaptureConfig::reference();
        c.theta_qa = Angle(FRAC_PI_4);
        let row = analyzer_row(&c, ConditionTag::Qwp);
        for (got, want) in row.iter().zip([0.5, 0.0, 0.0, -0.5]) {
            assert!((got - want).abs() < 1e-15, "row {row:?}");
        }
        c.theta_qa = Angle(3.0 * FRAC_PI_4);
        let row = analyzer_row(&c, ConditionTag::Qwp);
        for (got, want) in row.iter().zip([0.5, 0.0, 0.0, 0.5]) {
            assert!((got - want).abs() < 1e-15, "row {row:?}");
        }
    }

    #[test]
    fn intensity_aligned_polarizers() {
        // Identity sample between two aligned ideal polarizers passes
        // half of the unpolarized source.
        let c = CaptureConfig::reference();
        let f = intensity(&MuellerMatrix::identity(), &c, ConditionTag::Lp, 1.0);
        assert!((f - 0.5).abs() < 1e-15);
    }

    #[test]
    fn intensity_crossed_polarizers() {
        let mut c = CaptureConfig::reference();
        c.theta_la = Angle(FRAC_PI_2);
        let f = intensity(&MuellerMatrix::identity(), &c, ConditionTag::Lp, 1.0);
        assert!(f.abs() < 1e-15);
    }

    #[test]
    fn intensity_depolarizer_is_angle_independent() {
        let m = MuellerMatrix::depolarizer();
        for i in 0..10 {
            let mut c = CaptureConfig::reference();
            c.theta_lg = Angle(0.31 * i as f64);
            c.theta_la = Angle(1.7 - 0.2 * i as f64);
            let f = intensity(&m, &c, ConditionTag::Lp, 1.0);
            assert!((f - 0.25).abs() < 1e-15);
        }
    }
}
