//! Property tests for the structural invariants: metric consistency,
//! reflection, contraction, modulus domination, pullback, and the witness
//! class algebra.

mod support;

use clawent::delta::{delta, delta_hat, delta_inverse};
use clawent::entropy::empirical_entropy;
use clawent::flux::estimate_constants;
use clawent::lower::build_witness_family;
use clawent::sample::{sample_signed, SampleSign};
use clawent::tracking::evolve;
use clawent::{FluxModel, PiecewiseConstantFn};
use proptest::prelude::*;

use support::l1_midpoint;

fn pwc_on(l: f64, m: f64) -> impl Strategy<Value = PiecewiseConstantFn> {
    prop::collection::vec(-m..m, 1..8usize).prop_map(move |vals| {
        let n = vals.len();
        let bx: Vec<f64> = (0..=n).map(|i| -l + 2.0 * l * i as f64 / n as f64).collect();
        PiecewiseConstantFn::new(bx, vals).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn distance_matches_midpoint_quadrature(
        u in pwc_on(1.0, 1.0),
        v in pwc_on(1.5, 1.0),
    ) {
        let lib = u.l1_distance(&v);
        let oracle = l1_midpoint(&u, &v);
        prop_assert!((lib - oracle).abs() <= 1e-12 * (1.0 + oracle));
    }

    #[test]
    fn reflection_is_an_involution_preserving_mass_and_norm(u in pwc_on(1.0, 1.0)) {
        let r = u.reflect();
        prop_assert!((r.mass() - u.mass()).abs() <= 1e-15 * (1.0 + u.l1_norm()));
        prop_assert!((r.l1_norm() - u.l1_norm()).abs() <= 1e-15 * (1.0 + u.l1_norm()));
        prop_assert_eq!(r.reflect().l1_distance(&u), 0.0);
    }

    #[test]
    fn modulus_dominates_same_sign_differences(
        kind in 0..4usize,
        a in -1.0..1.0f64,
        b in -1.0..1.0f64,
    ) {
        prop_assume!(a * b >= 0.0);
        let s = (a - b).abs();
        prop_assume!(s > 1e-6);
        let flux = match kind {
            0 => FluxModel::burgers(1.0).unwrap(),
            1 => FluxModel::cubic(1.0).unwrap(),
            2 => FluxModel::quartic(1.0).unwrap(),
            _ => FluxModel::mixed_quartic(1.0).unwrap(),
        };
        let d = delta(&flux, s).unwrap();
        let diff = (flux.f1(a) - flux.f1(b)).abs();
        prop_assert!(
            d <= diff * (1.0 + 1e-9) + 1e-12,
            "delta({}) = {} exceeds |f'({}) - f'({})| = {}", s, d, a, b, diff
        );
    }

    #[test]
    fn hatted_modulus_sits_between_half_and_full(
        convex in 0..3usize,
        s in 1e-4..1.0f64,
    ) {
        let flux = match convex {
            0 => FluxModel::burgers(1.0).unwrap(),
            1 => FluxModel::quartic(1.0).unwrap(),
            _ => FluxModel::monomial(5, 1.0).unwrap(),
        };
        let half = delta(&flux, s / 2.0).unwrap();
        let hat = delta_hat(&flux, s).unwrap();
        let full = delta(&flux, s).unwrap();
        prop_assert!(half <= hat * (1.0 + 1e-9));
        prop_assert!(hat <= full * (1.0 + 1e-9));
    }

    #[test]
    fn modulus_inverse_round_trips(s in 1e-3..1.0f64, hatted in proptest::bool::ANY) {
        let flux = FluxModel::quartic(1.0).unwrap();
        let y = if hatted { delta_hat(&flux, s).unwrap() } else { delta(&flux, s).unwrap() };
        let back = delta_inverse(&flux, y, hatted).unwrap();
        prop_assert!((back - s).abs() <= 1e-9 * (1.0 + s));
    }

    #[test]
    fn pullback_of_derivative_distance_controls_state_distance(
        u in pwc_on(1.0, 1.0),
        v in pwc_on(1.0, 1.0),
        degenerate in proptest::bool::ANY,
    ) {
        let flux = if degenerate {
            FluxModel::quartic(1.0).unwrap()
        } else {
            FluxModel::burgers(1.0).unwrap()
        };
        let du = u.l1_distance(&v);
        let dg = u.map_values(|x| flux.f1(x)).l1_distance(&v.map_values(|x| flux.f1(x)));
        let cap = delta_hat(&flux, 2.0).unwrap();
        prop_assume!(dg > 0.0 && dg < cap);
        let bound = 3.0 * delta_inverse(&flux, dg, true).unwrap();
        prop_assert!(
            du <= bound * (1.0 + 1e-9) + 1e-12,
            "state distance {} above pulled-back bound {}", du, bound
        );
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn evolution_contracts_up_to_resolution(seed_a in 0u64..500, seed_b in 500u64..1000) {
        let flux = FluxModel::burgers(1.0).unwrap();
        let dv = 5e-3;
        let u = sample_signed(1.0, 1.0, 5, seed_a, SampleSign::TwoSided).unwrap();
        let v = sample_signed(1.0, 1.0, 7, seed_b, SampleSign::TwoSided).unwrap();
        let d0 = u.l1_distance(&v);
        let ut = evolve(&flux, &u, 0.4, dv).unwrap();
        let vt = evolve(&flux, &v, 0.4, dv).unwrap();
        prop_assert!(ut.l1_distance(&vt) <= d0 + 5.0 * dv);
    }

    #[test]
    fn witness_members_stay_in_their_class(
        kind in 0..4usize,
        eps in 0.02..0.2f64,
        mask in 1u16..32,
    ) {
        let flux = match kind {
            0 => FluxModel::burgers(1.0).unwrap(),
            1 => FluxModel::cubic(1.0).unwrap(),
            2 => FluxModel::quartic(1.0).unwrap(),
            _ => FluxModel::mixed_quartic(1.0).unwrap(),
        };
        let family = build_witness_family(&flux, 2.0, 1.0, 1.0, eps, 1e-3, Some(5)).unwrap();
        let bits: String = (0..5).map(|b| if mask >> b & 1 == 1 { '1' } else { '0' }).collect();
        let v = family.materialize(&bits).unwrap();
        let check = family.class_spec().check_membership(&v, 1e-9 * (1.0 + family.h_amp));
        prop_assert!(check.is_ok(), "{:?}", check.err());
    }

    #[test]
    fn packing_never_exceeds_covering(count in 2usize..8, seed in 0u64..100, eps in 0.01..0.5f64) {
        let pool: Vec<_> = (0..count)
            .map(|i| sample_signed(1.0, 1.0, 4, seed + i as u64, SampleSign::TwoSided).unwrap())
            .collect();
        let (packing, cover) = empirical_entropy(&pool, eps).unwrap();
        prop_assert!(packing <= cover + 1e-12);
    }
}

#[test]
fn opposite_sign_states_keep_a_variation_floor() {
    let flux = FluxModel::cubic(1.0).unwrap();
    let constants = estimate_constants(&flux, 2000).unwrap();
    let kappa_tilde = constants.kappa_tilde_m.unwrap();
    for seed in 0..20u64 {
        let u0 = sample_signed(1.0, 1.0, 9, 0x7000 + seed, SampleSign::TwoSided).unwrap();
        let ut = evolve(&flux, &u0, 0.5, 2e-3).unwrap();
        let vs = ut.values();
        let f1: Vec<f64> = vs.iter().map(|&v| flux.f1(v)).collect();
        for i in 0..vs.len() {
            for j in (i + 1)..vs.len() {
                if vs[i] * vs[j] >= -1e-12 {
                    continue;
                }
                let tv: f64 = f1[i..j].iter().zip(&f1[i + 1..=j]).map(|(a, b)| (b - a).abs()).sum();
                let floor = kappa_tilde * f1[i].max(f1[j]);
                assert!(
                    tv >= floor * (1.0 - 1e-9),
                    "seed {seed}: variation {tv} on cells {i}..{j} under floor {floor}"
                );
            }
        }
    }
}
