//! Closed-form geometry against hand-computed and published values.

use doptag_core::geometry::*;

const DEG: f64 = std::f64::consts::PI / 180.0;

fn deg(rad: f64) -> f64 {
    rad / DEG
}

#[test]
fn doppler_forward_values() {
    // stationary: no shift
    assert_eq!(doppler_frequency(20_000.0, 340.0, 0.0, 0.0).unwrap(), 20_000.0);
    // sender at 3.4 m/s toward receiver: 20000 * 340 / 336.6
    let f = doppler_frequency(20_000.0, 340.0, 3.4, 0.0).unwrap();
    assert!((f - 20_202.019).abs() < 0.01, "f = {f}");
    // receding sender
    let f = doppler_frequency(20_000.0, 340.0, -3.4, 0.0).unwrap();
    assert!(f < 20_000.0);
    // sender faster than sound is out of domain
    assert!(doppler_frequency(20_000.0, 340.0, 341.0, 0.0).is_err());
}

#[test]
fn angle_from_shift_examples() {
    // zero shift: broadside
    let a = angle_from_shift(20_000.0, 20_000.0, 340.0, 3.4).unwrap();
    assert!((a.theta - std::f64::consts::FRAC_PI_2).abs() < 1e-12);
    assert!(a.alpha.abs() < 1e-12);
    assert_eq!(a.side, Side::Unknown);

    // full head-on shift: theta ~ 0, alpha ~ pi/2
    let a = angle_from_shift(20_202.0, 20_000.0, 340.0, 3.4).unwrap();
    assert!(a.theta < 0.02, "theta = {}", a.theta);
    assert!((a.alpha - std::f64::consts::FRAC_PI_2).abs() < 0.02);
    assert_eq!(a.side, Side::Left);

    // 60 degrees
    let a = angle_from_shift(20_100.5, 20_000.0, 340.0, 3.4).unwrap();
    assert!((deg(a.theta) - 60.0).abs() < 0.1, "theta = {}", deg(a.theta));
    assert!((deg(a.alpha) - 30.0).abs() < 0.1);

    // negative shift puts the receiver on the right
    let a = angle_from_shift(19_900.0, 20_000.0, 340.0, 3.4).unwrap();
    assert_eq!(a.side, Side::Right);
    assert!(a.signed_alpha() < 0.0);
}

#[test]
fn angle_from_shift_rejects_impossible_shift() {
    // a shift requiring more than the claimed sweep speed
    let err = angle_from_shift(20_500.0, 20_000.0, 340.0, 3.4).unwrap_err();
    assert_eq!(err, GeometryError::InconsistentMeasurement);
    assert!(angle_from_shift(20_100.0, 20_000.0, 340.0, 0.0).is_err());
}

#[test]
fn angle_round_trip_is_analytic_inverse() {
    for ti in 1..180 {
        let theta = ti as f64 * DEG;
        for v in [0.5, 1.0, 3.4, 5.0] {
            let f = 20_000.0 + shift_for_geometry(theta, 20_000.0, 340.0, v);
            let a = angle_from_shift(f, 20_000.0, 340.0, v).unwrap();
            assert!(
                (a.theta - theta).abs() < 1e-9,
                "theta {theta} v {v}: got {}",
                a.theta
            );
        }
    }
}

#[test]
fn camera_correction_examples() {
    let a = camera_corrected_angle(0.0, 0.095, 3.0, GapSide::AwayFromSpeaker).unwrap();
    assert!((deg(a) - 1.8).abs() < 0.05, "alpha' = {}", deg(a));
    let a60 = camera_corrected_angle(60.0 * DEG, 0.095, 3.0, GapSide::AwayFromSpeaker).unwrap();
    assert!((deg(a60) - 60.0 - 0.4).abs() < 0.05);
    // zero gap is the identity
    for ai in 0..90 {
        let alpha = ai as f64 * DEG;
        let c = camera_corrected_angle(alpha, 0.0, 5.0, GapSide::TowardSpeaker).unwrap();
        assert!((c - alpha).abs() < 1e-12);
    }
    assert!(camera_corrected_angle(1.6, 0.095, 3.0, GapSide::AwayFromSpeaker).is_err());
    assert!(camera_corrected_angle(0.1, 0.095, 0.0, GapSide::AwayFromSpeaker).is_err());
}

/// Published gap-error table: distance rows x alpha columns, errors in
/// degrees, gap 95 mm.
#[test]
fn gap_error_table_reproduced() {
    let expected: [(f64, [f64; 7]); 3] = [
        (3.0, [1.8, 1.7, 1.5, 1.3, 1.0, 0.7, 0.4]),
        (5.0, [1.0, 1.0, 0.9, 0.8, 0.6, 0.4, 0.2]),
        (10.0, [0.5, 0.5, 0.4, 0.4, 0.3, 0.2, 0.1]),
    ];
    for (h, row) in expected {
        for (ci, want) in row.into_iter().enumerate() {
            let alpha = ci as f64 * 10.0 * DEG;
            let corrected =
                camera_corrected_angle(alpha, 0.095, h, GapSide::AwayFromSpeaker).unwrap();
            let err = deg((corrected - alpha).abs());
            assert!(
                (err - want).abs() <= 0.1,
                "H={h} alpha={}deg: got {err:.3}, table says {want}",
                ci * 10
            );
        }
    }
}

/// Published angular-resolution tables, before (44.1 kHz) and after (6.3
/// kHz) undersampling; beta column in degrees.
#[test]
fn resolution_tables_reproduced() {
    let alphas = [55.0, 65.0, 75.0, 85.0, 95.0, 105.0, 115.0, 125.0];
    let beta_44100 = [62.1, 71.6, 81.3, 91.2, 101.2, 111.5, 122.1, 133.0];
    let beta_6300 = [56.1, 65.9, 75.9, 85.8, 95.8, 105.9, 115.9, 126.0];
    for (fs, betas) in [(44_100.0, beta_44100), (6_300.0, beta_6300)] {
        let res = ResolutionParams::new(fs, 2048);
        for (&a, &want) in alphas.iter().zip(betas.iter()) {
            let beta = min_distinguishable_beta(a * DEG, res, 3.4, 340.0, 20_000.0).unwrap();
            assert!(
                (deg(beta) - want).abs() <= 0.1,
                "fs={fs} alpha={a}: beta {:.3}, table says {want}",
                deg(beta)
            );
        }
    }
}

#[test]
fn resolution_predicate_examples() {
    let res44 = ResolutionParams::new(44_100.0, 2048);
    let res63 = ResolutionParams::new(6_300.0, 2048);
    assert!(resolution_predicate(85.0 * DEG, 92.0 * DEG, res44, 3.4, 340.0, 20_000.0).unwrap());
    assert!(!resolution_predicate(85.0 * DEG, 90.0 * DEG, res44, 3.4, 340.0, 20_000.0).unwrap());
    assert!(resolution_predicate(85.0 * DEG, 86.0 * DEG, res63, 3.4, 340.0, 20_000.0).unwrap());
    // precondition: cos(alpha) > cos(beta)
    assert!(resolution_predicate(92.0 * DEG, 85.0 * DEG, res44, 3.4, 340.0, 20_000.0).is_err());
}

#[test]
fn min_beta_bounds_the_predicate() {
    let res = ResolutionParams::new(6_300.0, 2048);
    for ai in [30.0, 55.0, 85.0, 110.0] {
        let alpha = ai * DEG;
        let beta = min_distinguishable_beta(alpha, res, 3.4, 340.0, 20_000.0).unwrap();
        assert!(resolution_predicate(alpha, beta + 1e-6, res, 3.4, 340.0, 20_000.0).unwrap());
        assert!(!resolution_predicate(alpha, beta - 1e-6, res, 3.4, 340.0, 20_000.0).unwrap());
    }
}

#[test]
fn min_beta_monotone_in_resolution() {
    // larger N_FFT or smaller F_s never widens the required separation
    let alpha = 85.0 * DEG;
    let gap = |fs: f64, n: usize| {
        let res = ResolutionParams::new(fs, n);
        min_distinguishable_beta(alpha, res, 3.4, 340.0, 20_000.0).unwrap() - alpha
    };
    assert!(gap(44_100.0, 4096) <= gap(44_100.0, 2048));
    assert!(gap(6_300.0, 2048) <= gap(44_100.0, 2048));
}

#[test]
fn min_beta_no_solution() {
    // absurdly coarse resolution: nothing in (0, pi) is distinguishable
    let res = ResolutionParams::new(44_100.0, 16);
    assert_eq!(
        min_distinguishable_beta(85.0 * DEG, res, 0.1, 340.0, 20_000.0).unwrap_err(),
        GeometryError::NoSolution
    );
}

#[test]
fn integrate_velocity_examples() {
    let (series, peak, idx) = integrate_velocity(&[1.0; 100], 0.0, 0.01).unwrap();
    assert!((peak - 1.0).abs() < 1e-12);
    assert_eq!(idx, 99);
    assert!((series[49] - 0.5).abs() < 1e-12);

    let (series, peak, _) = integrate_velocity(&[0.0; 10], 0.5, 0.01).unwrap();
    assert!(series.iter().all(|v| (*v - 0.5).abs() < 1e-12));
    assert!((peak - 0.5).abs() < 1e-12);

    assert_eq!(integrate_velocity(&[], 0.0, 0.01).unwrap_err(), GeometryError::EmptyInput);
    assert!(integrate_velocity(&[1.0], 0.0, 0.0).is_err());
}

#[test]
fn undersampling_examples() {
    assert!(undersampling_rate_valid(19_000.0, 21_000.0, 6_300.0, 7));
    // band edges of the n=7 zone: [2*21000/7, 2*19000/6] = [6000, 6333.3]
    assert!(undersampling_rate_valid(19_000.0, 21_000.0, 6_000.0, 7));
    assert!(undersampling_rate_valid(19_000.0, 21_000.0, 6_333.3, 7));
    assert!(!undersampling_rate_valid(19_000.0, 21_000.0, 5_999.0, 7));
    assert!(!undersampling_rate_valid(19_000.0, 21_000.0, 6_334.0, 7));
    assert!(!undersampling_rate_valid(19_000.0, 21_000.0, 5_900.0, 7));
    // Nyquist-rate case, n = 1 has no upper bound
    assert!(undersampling_rate_valid(19_000.0, 21_000.0, 44_100.0, 1));
    // n beyond floor(fH / (fH - fL)) = 10
    assert!(!undersampling_rate_valid(19_000.0, 21_000.0, 3_850.0, 11));
    assert!(!undersampling_rate_valid(21_000.0, 19_000.0, 6_300.0, 7));
}

#[test]
fn alias_examples() {
    assert_eq!(alias_frequency(20_000.0, 6_300.0), (1_100.0, false));
    assert_eq!(alias_frequency(19_500.0, 6_300.0), (600.0, false));
    assert_eq!(alias_frequency(20_500.0, 6_300.0), (1_600.0, false));
    assert_eq!(alias_frequency(3_000.0, 6_300.0), (3_000.0, false));
    // odd Nyquist zone mirrors
    let (f, inverted) = alias_frequency(4_000.0, 6_300.0);
    assert!((f - 2_300.0).abs() < 1e-9);
    assert!(inverted);
}

#[test]
fn valid_undersampling_folds_band_injectively() {
    // 1 Hz grid over [19k, 21k]: folding under a valid rate never collides
    assert!(undersampling_rate_valid(19_000.0, 21_000.0, 6_300.0, 7));
    let mut prev = f64::NEG_INFINITY;
    for f in 19_000..=21_000 {
        let (a, inverted) = alias_frequency(f as f64, 6_300.0);
        assert!(!inverted, "band must fold without inversion");
        assert!(a > prev, "folding collided at {f} Hz");
        prev = a;
    }
}

/// Forward-geometry oracle: place a receiver, compute both sight-line
/// angles analytically, and require the intersection to give the point back.
#[test]
fn intersect_two_sweeps_inverts_forward_geometry() {
    let (l, w) = (3.0, 2.0);
    for xi in -2..=2 {
        for yi in -1..=1 {
            let (x, y) = (xi as f64 * 0.5, yi as f64 * 0.7);
            // alpha: angle of the A sight line, positive toward +x
            let alpha = (x / (l - y)).atan();
            // beta: angle of the B sight line from the x axis
            let beta = (y / (x + w)).atan();
            let p = intersect_two_sweeps(alpha, beta, l, w).unwrap();
            assert!(
                (p.x - x).abs() < 1e-9 && (p.y - y).abs() < 1e-9,
                "({x},{y}) recovered as ({}, {})",
                p.x,
                p.y
            );
        }
    }
}

#[test]
fn intersect_two_sweeps_degenerate_and_domain() {
    // parallel sight lines: alpha - beta = pi/2 makes the cross product vanish
    assert_eq!(
        intersect_two_sweeps(0.6 + std::f64::consts::FRAC_PI_2, 0.6, 3.0, 2.0).unwrap_err(),
        GeometryError::DegenerateGeometry
    );
    assert!(intersect_two_sweeps(0.1, 0.2, 0.0, 2.0).is_err());
    assert!(intersect_two_sweeps(0.1, 0.2, 3.0, -1.0).is_err());
}

#[test]
fn fov_membership_is_strict() {
    let fov = 70.0 * DEG;
    assert!(in_fov(0.0, fov));
    assert!(!in_fov(40.0 * DEG, fov));
    assert!(in_fov(34.9 * DEG, fov));
    assert!(!in_fov(35.0 * DEG, fov));
    assert!(!in_fov(-35.0 * DEG, fov));
    assert!(in_fov(-34.9 * DEG, fov));
}
