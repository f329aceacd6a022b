//! Property tests for the norm family: axioms, unitary invariance, the
//! partial-sum dominance equivalence, and agreement with an independent
//! Gram-eigenvalue route to the spectrum.

mod common;

use common::{gaussian, random_orthonormal};
use lrsc_core::norms::{self, ky_fan_dominates, profile_dominates};
use lrsc_core::{Matrix, NormSpec, SingularProfile};
use proptest::prelude::*;

const TOL: f64 = 1e-9;

fn norm_panel() -> Vec<NormSpec> {
    vec![
        NormSpec::trace(),
        NormSpec::frobenius(),
        NormSpec::spectral(),
        NormSpec::ky_fan(1),
        NormSpec::ky_fan(2),
        NormSpec::schatten(3.0),
        NormSpec::Kp { k: lrsc_core::KpDepth::Top(2), p: lrsc_core::PNorm::Finite(2.5) },
        NormSpec::Kp { k: lrsc_core::KpDepth::Top(3), p: lrsc_core::PNorm::Inf },
    ]
}

fn matrix_strategy(max_dim: usize) -> impl Strategy<Value = Matrix> {
    (1..=max_dim, 1..=max_dim)
        .prop_flat_map(|(m, n)| {
            prop::collection::vec(-5.0f64..5.0, m * n)
                .prop_map(move |v| Matrix::from_vec(m, n, v))
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn absolute_homogeneity(a in matrix_strategy(5), t in -3.0f64..3.0) {
        for spec in norm_panel() {
            let lhs = norms::evaluate(&spec, &(&a * t)).unwrap();
            let rhs = t.abs() * norms::evaluate(&spec, &a).unwrap();
            prop_assert!(
                (lhs - rhs).abs() <= TOL * (1.0 + rhs),
                "{spec}: ||tA|| = {lhs}, |t| ||A|| = {rhs}"
            );
        }
    }

    #[test]
    fn triangle_inequality(a in matrix_strategy(5), seed in 0u64..1000) {
        let b = gaussian(a.nrows(), a.ncols(), seed);
        for spec in norm_panel() {
            let sum = norms::evaluate(&spec, &(&a + &b)).unwrap();
            let split = norms::evaluate(&spec, &a).unwrap() + norms::evaluate(&spec, &b).unwrap();
            prop_assert!(
                sum <= split + TOL * (1.0 + split),
                "{spec}: ||A + B|| = {sum} exceeds ||A|| + ||B|| = {split}"
            );
        }
    }

    #[test]
    fn unitary_invariance(a in matrix_strategy(5), seed in 0u64..1000) {
        let q = random_orthonormal(a.nrows(), a.nrows(), 2 * seed + 1);
        let w = random_orthonormal(a.ncols(), a.ncols(), 2 * seed + 2);
        let rotated = &q * &a * &w;
        let mut panel = norm_panel();
        panel.push(NormSpec::Rank);
        panel.push(NormSpec::SquaredFrobenius);
        for spec in panel {
            let before = norms::evaluate(&spec, &a).unwrap();
            let after = norms::evaluate(&spec, &rotated).unwrap();
            prop_assert!(
                (before - after).abs() <= 1e-8 * (1.0 + before),
                "{spec}: {before} became {after} after rotation"
            );
        }
    }

    #[test]
    fn frobenius_agrees_with_entrywise_formula(a in matrix_strategy(6)) {
        let entrywise: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
        let fro = norms::evaluate(&NormSpec::frobenius(), &a).unwrap();
        let fro2 = norms::evaluate(&NormSpec::SquaredFrobenius, &a).unwrap();
        prop_assert!((fro - entrywise).abs() <= TOL * (1.0 + entrywise));
        prop_assert!((fro2 - entrywise * entrywise).abs() <= TOL * (1.0 + entrywise * entrywise));
    }

    #[test]
    fn norm_ordering_spec_fro_trace(a in matrix_strategy(6)) {
        let spec = norms::evaluate(&NormSpec::spectral(), &a).unwrap();
        let fro = norms::evaluate(&NormSpec::frobenius(), &a).unwrap();
        let trace = norms::evaluate(&NormSpec::trace(), &a).unwrap();
        let kf1 = norms::evaluate(&NormSpec::ky_fan(1), &a).unwrap();
        prop_assert!(spec <= fro + TOL && fro <= trace + TOL);
        prop_assert!((kf1 - spec).abs() <= TOL * (1.0 + spec), "Ky Fan 1 is the spectral norm");
    }

    #[test]
    fn profile_route_matches_direct_route(a in matrix_strategy(5)) {
        let profile = SingularProfile::from_matrix(&a).unwrap();
        for spec in norm_panel() {
            let direct = norms::evaluate(&spec, &a).unwrap();
            let via_profile = norms::evaluate_profile(&spec, &profile).unwrap();
            prop_assert!((direct - via_profile).abs() <= 1e-12 * (1.0 + direct));
        }
    }

    #[test]
    fn spectrum_matches_gram_eigenvalues(a in matrix_strategy(6)) {
        // Independent route to the singular values: eigenvalues of A^T A.
        let gram = a.transpose() * &a;
        let eig = nalgebra::SymmetricEigen::new(gram);
        let mut lambda: Vec<f64> = eig.eigenvalues.iter().map(|l| l.max(0.0)).collect();
        lambda.sort_by(|x, y| y.partial_cmp(x).unwrap());
        let profile = SingularProfile::from_matrix(&a).unwrap();
        let values = profile.values();
        let scale = values.first().copied().unwrap_or(0.0).max(1.0);
        for (i, sigma) in values.iter().enumerate() {
            let from_gram = lambda.get(i).copied().unwrap_or(0.0).sqrt();
            prop_assert!(
                (sigma - from_gram).abs() <= 1e-7 * scale,
                "sigma_{i}: svd route {sigma}, Gram route {from_gram}"
            );
        }
    }

    #[test]
    fn scaling_down_implies_dominance_and_every_norm_agrees(
        a in matrix_strategy(5),
        t in 0.0f64..1.0,
    ) {
        let shrunk = &a * t;
        prop_assert!(ky_fan_dominates(&shrunk, &a, 1e-10).unwrap());
        for spec in norm_panel() {
            let small = norms::evaluate(&spec, &shrunk).unwrap();
            let big = norms::evaluate(&spec, &a).unwrap();
            prop_assert!(small <= big + TOL * (1.0 + big), "{spec}: {small} > {big}");
        }
    }

    #[test]
    fn failed_dominance_is_witnessed_by_a_ky_fan_norm(
        a in matrix_strategy(4),
        seed in 0u64..1000,
    ) {
        let b = gaussian(a.nrows(), a.ncols(), seed + 5000);
        let pa = SingularProfile::from_matrix(&a).unwrap();
        let pb = SingularProfile::from_matrix(&b).unwrap();
        // Use a strict margin so the witness search is not fighting the
        // equality slack of the dominance test itself.
        if !profile_dominates(&pa, &pb, 1e-6) {
            let len = pa.len().max(pb.len());
            let mut witnessed = false;
            for k in 1..=len {
                let spec = NormSpec::ky_fan(k);
                let na = norms::evaluate_profile(&spec, &pa).unwrap();
                let nb = norms::evaluate_profile(&spec, &pb).unwrap();
                if na > nb {
                    witnessed = true;
                    break;
                }
            }
            prop_assert!(witnessed, "dominance failed but no Ky Fan norm certifies it");
        }
    }

    #[test]
    fn spec_round_trips_through_display_and_parse(
        k in 1usize..10,
        p in 1.0f64..6.0,
        full in any::<bool>(),
        inf in any::<bool>(),
    ) {
        let spec = NormSpec::Kp {
            k: if full { lrsc_core::KpDepth::Full } else { lrsc_core::KpDepth::Top(k) },
            p: if inf { lrsc_core::PNorm::Inf } else { lrsc_core::PNorm::Finite(p) },
        };
        let reparsed: NormSpec = spec.to_string().parse().unwrap();
        prop_assert_eq!(spec, reparsed);
    }
}

#[test]
fn canonical_tokens_parse_to_canonical_constructors() {
    let cases: [(&str, NormSpec); 5] = [
        ("trace", NormSpec::trace()),
        ("fro", NormSpec::frobenius()),
        ("spec", NormSpec::spectral()),
        ("rank", NormSpec::Rank),
        ("fro2", NormSpec::SquaredFrobenius),
    ];
    for (token, expected) in cases {
        let parsed: NormSpec = token.parse().unwrap();
        assert_eq!(parsed, expected, "token `{token}`");
        assert_eq!(parsed.to_string(), token, "display of `{token}` round trips");
    }
    // The general form normalizes to the canonical token when one exists.
    let via_kp: NormSpec = "kp:k=full,p=1".parse().unwrap();
    assert_eq!(via_kp, NormSpec::trace());
    assert_eq!(via_kp.to_string(), "trace");
}

#[test]
fn truncation_dominance_holds_at_every_depth() {
    // Truncating a spectrum can only reduce every partial sum, so the
    // truncated matrix is dominated at all depths simultaneously.
    let a = gaussian(6, 5, 77);
    let f = lrsc_core::linalg::thin_svd(&a, lrsc_core::DEFAULT_RANK_TOL).unwrap();
    for k in 0..=f.rank() {
        let t = f.reconstruct_truncated(k);
        assert!(
            ky_fan_dominates(&t, &a, 1e-10).unwrap(),
            "rank-{k} truncation is not dominated by the original"
        );
    }
}
