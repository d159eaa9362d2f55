use mueller_core::{rotate_mueller, Angle, MuellerMatrix};
use polarimeter::{
    estimate_mueller, intensity, CaptureConfig, ConditionTag, DesignMatrix, MeasurementPlan,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::{FRAC_PI_4, PI};

fn random_plan(rng: &mut ChaCha8Rng, tag: ConditionTag, k: usize) -> MeasurementPlan {
    let captures = (0..k)
        .map(|_| {
            let mut c = CaptureConfig::reference();
            match tag {
                ConditionTag::Lp => {
                    c.theta_lg = Angle(rng.gen_range(0.0..PI));
                    c.theta_la = Angle(rng.gen_range(0.0..PI));
                }
                ConditionTag::Qwp => {
                    c.theta_qg = Angle(rng.gen_range(0.0..PI));
                    c.theta_qa = Angle(rng.gen_range(0.0..PI));
                }
                ConditionTag::LpQwp => {
                    c.theta_lg = Angle(rng.gen_range(0.0..PI));
                    c.theta_qg = Angle(rng.gen_range(0.0..PI));
                    c.theta_qa = Angle(rng.gen_range(0.0..PI));
                    c.theta_la = Angle(rng.gen_range(0.0..PI));
                }
            }
            c
        })
        .collect();
    MeasurementPlan::new(tag, captures, 1.0).unwrap()
}

fn random_matrix(rng: &mut ChaCha8Rng) -> MuellerMatrix {
    let mut m = [[0.0; 4]; 4];
    for row in &mut m {
        for x in row {
            *x = rng.gen_range(-1.0..1.0);
        }
    }
    MuellerMatrix::new(m)
}

/// Azzam schedule on the half-open grid k·π/K, the spacing the uniform
/// training regime uses. Aliases at certain K.
fn azzam_grid_plan(k: usize) -> MeasurementPlan {
    let captures = (0..k)
        .map(|i| {
            let qg = i as f64 * PI / k as f64;
            let mut c = CaptureConfig::reference();
            c.theta_qg = Angle(qg);
            c.theta_qa = Angle((5.0 * qg).rem_euclid(PI));
            c
        })
        .collect();
    MeasurementPlan::new(ConditionTag::Qwp, captures, 1.0).unwrap()
}

#[test]
fn design_matrix_matches_forward_model() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for trial in 0..100 {
        let tag = match trial % 3 {
            0 => ConditionTag::Lp,
            1 => ConditionTag::Qwp,
            _ => ConditionTag::LpQwp,
        };
        let k = rng.gen_range(1..8);
        let plan = random_plan(&mut rng, tag, k);
        let m = random_matrix(&mut rng);
        let design = DesignMatrix::build(&plan);
        let predicted = design.predict(&m);
        for (k, c) in plan.captures.iter().enumerate() {
            let f = intensity(&m, c, plan.condition, plan.source_intensity);
            assert!(
                (f - predicted[k]).abs() < 1e-12,
                "capture {k} of trial {trial}: {f} vs {}",
                predicted[k]
            );
        }
    }
}

#[test]
fn azzam_24_capture_schedule_has_full_rank() {
    let diag = DesignMatrix::build(&MeasurementPlan::azzam(24).unwrap()).diagnostics();
    assert_eq!(diag.rank, 16);
}

#[test]
fn azzam_schedule_round_trip() {
    let plan = MeasurementPlan::azzam(24).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let m = random_matrix(&mut rng);
    let f: Vec<f64> = plan
        .captures
        .iter()
        .map(|c| intensity(&m, c, plan.condition, plan.source_intensity))
        .collect();
    let (estimate, _) = estimate_mueller(&plan, &f);
    let err: f64 = estimate
        .flatten()
        .iter()
        .zip(m.flatten())
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt();
    assert!(err < 1e-8, "Frobenius error {err}");
}

#[test]
fn full_rank_plan_recovers_random_matrices() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..20 {
        let plan = random_plan(&mut rng, ConditionTag::LpQwp, 16);
        if DesignMatrix::build(&plan).diagnostics().rank < 16 {
            continue;
        }
        let m = random_matrix(&mut rng);
        let f: Vec<f64> = plan
            .captures
            .iter()
            .map(|c| intensity(&m, c, plan.condition, plan.source_intensity))
            .collect();
        let (estimate, residual) = estimate_mueller(&plan, &f);
        let err: f64 = estimate
            .flatten()
            .iter()
            .zip(m.flatten())
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        assert!(err < 1e-8, "Frobenius error {err}");
        assert!(residual < 1e-8);
    }
}

#[test]
fn random_16_capture_lp_qwp_plans_are_full_rank() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for seed_trial in 0..100 {
        let plan = random_plan(&mut rng, ConditionTag::LpQwp, 16);
        let rank = DesignMatrix::build(&plan).diagnostics().rank;
        assert_eq!(rank, 16, "trial {seed_trial}");
    }
}

#[test]
fn lp_only_estimation_recovers_upper_block_with_zero_complement() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    let plan = random_plan(&mut rng, ConditionTag::Lp, 16);
    let diag = DesignMatrix::build(&plan).diagnostics();
    assert!(diag.rank <= 9);
    assert_eq!(diag.rank, 9, "generic LP plan should sense the full block");

    let m = random_matrix(&mut rng);
    let f: Vec<f64> = plan
        .captures
        .iter()
        .map(|c| intensity(&m, c, plan.condition, plan.source_intensity))
        .collect();
    let (estimate, _) = estimate_mueller(&plan, &f);
    for i in 0..3 {
        for j in 0..3 {
            assert!(
                (estimate[(i, j)] - m[(i, j)]).abs() < 1e-8,
                "block entry ({i},{j})"
            );
        }
    }
    for i in 0..4 {
        assert!(estimate[(i, 3)].abs() < 1e-10);
        assert!(estimate[(3, i)].abs() < 1e-10);
    }
}

#[test]
fn qwp_uniform_rank_dips_exist_across_capture_counts() {
    // The Azzam schedule aliases at certain K; record the rank profile
    // and require at least one local dip.
    let ranks: Vec<usize> = (2..=24)
        .map(|k| DesignMatrix::build(&azzam_grid_plan(k)).diagnostics().rank)
        .collect();
    let mut found_dip = false;
    for i in 1..ranks.len() - 1 {
        if ranks[i] < ranks[i - 1] && ranks[i] < ranks[i + 1] {
            found_dip = true;
        }
    }
    assert!(found_dip, "rank profile {ranks:?}");
}

#[test]
fn circular_configuration_is_rotation_invariant() {
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    let axes = [FRAC_PI_4, 3.0 * FRAC_PI_4];
    for &qg in &axes {
        for &qa in &axes {
            let mut c = CaptureConfig::reference();
            c.theta_qg = Angle(qg);
            c.theta_qa = Angle(qa);
            for _ in 0..25 {
                let m = random_matrix(&mut rng);
                let f0 = intensity(&m, &c, ConditionTag::Qwp, 1.0);
                for _ in 0..5 {
                    let rho = Angle(rng.gen_range(0.0..PI));
                    let f = intensity(&rotate_mueller(&m, rho), &c, ConditionTag::Qwp, 1.0);
                    assert!((f - f0).abs() < 1e-10);
                }
            }
        }
    }
}
