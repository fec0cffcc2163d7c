use proptest::prelude::*;
use pu_core::hierarchy::{
    combine, ladder_via_x3, ladder_via_x3_action, pd_by_minors, pd_window, plane_coordinates, ChargeLadder,
};
use pu_core::model::{
    canonical_tensor_in_pu_variables, flow_residual, hamiltonian_h1, hamiltonian_h2, ostrogradsky_pullback,
    poisson_j1, poisson_j2, quad_bracket, PhaseState, PuParams, QuadHamiltonian,
};
use pu_core::numkit::{expm, Mat};

fn params() -> impl Strategy<Value = PuParams> {
    (-3.0..3.0f64, -3.0..3.0f64)
        .prop_filter("|beta| >= 0.1", |(_, b)| b.abs() >= 0.1)
        .prop_map(|(a, b)| PuParams::new(a, b).unwrap())
}

fn frequency_params() -> impl Strategy<Value = PuParams> {
    (0.3..3.0f64, 0.3..3.0f64)
        .prop_filter("separated", |(a, b)| (a * a - b * b).abs() >= 0.1)
        .prop_map(|(a, b)| PuParams::from_frequencies(a.max(b), a.min(b)).unwrap())
}

fn sym4() -> impl Strategy<Value = QuadHamiltonian> {
    prop::collection::vec(-1.0..1.0f64, 16).prop_map(|v| {
        let m = Mat::from_row_slice(4, 4, &v).unwrap();
        QuadHamiltonian::new((&m + &m.transpose()).scale(0.5)).unwrap()
    })
}

fn state() -> impl Strategy<Value = PhaseState> {
    prop::array::uniform4(-1.0..1.0f64).prop_map(PhaseState::from_array)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn both_structures_generate_the_flow(p in params()) {
        prop_assert!(flow_residual(&poisson_j1(&p), &hamiltonian_h1(&p), &p) <= 1e-10);
        prop_assert!(flow_residual(&poisson_j2(&p).unwrap(), &hamiltonian_h2(&p), &p) <= 1e-10);
        prop_assert!(ostrogradsky_pullback(&p).distance(&hamiltonian_h1(&p)) <= 1e-12);
    }

    #[test]
    fn bracket_is_antisymmetric(p in params(), f in sym4(), g in sym4()) {
        let j = poisson_j1(&p);
        let fg = quad_bracket(&j, &f, &g);
        let gf = quad_bracket(&j, &g, &f);
        prop_assert_eq!(fg.matrix(), &gf.matrix().scale(-1.0));
    }

    #[test]
    fn ostrogradsky_brackets_reproduce_j1(p in params()) {
        let jc = canonical_tensor_in_pu_variables(&p).unwrap();
        prop_assert!(jc.distance(&poisson_j1(&p)) <= 1e-12);
    }

    #[test]
    fn charges_conserved_by_exact_flow(p in params(), v in state(), t in 0.0..10.0f64) {
        let m = pu_core::model::companion_field(&p);
        let e = expm(&m.scale(t)).unwrap();
        let vt = e.mul_vec(&v.to_array());
        prop_assume!(vt.iter().all(|x| x.abs() < 1e6));
        let mvt = m.mul_vec(&vt);
        for h in [hamiltonian_h1(&p), hamiltonian_h2(&p)] {
            let rate: f64 = h.gradient(&vt).iter().zip(&mvt).map(|(a, b)| a * b).sum();
            let scale = 1.0 + h.matrix().norm() * m.norm() * vt.iter().map(|x| x * x).sum::<f64>();
            prop_assert!(rate.abs() <= 1e-9 * scale);
        }
    }

    #[test]
    fn ladder_routes_agree(p in frequency_params()) {
        let ladder = ChargeLadder::build(&p, 7).unwrap();
        for k in 1..=6 {
            let closed = ladder_via_x3(&p, k).unwrap();
            let action = ladder_via_x3_action(&p, k);
            let iterated = ladder.charge(k + 1).unwrap();
            let scale = 1.0 + iterated.matrix().norm();
            prop_assert!(closed.distance(iterated) <= 1e-9 * scale);
            prop_assert!(action.distance(iterated) <= 1e-9 * scale);
        }
    }

    #[test]
    fn ladder_in_involution(p in frequency_params()) {
        let ladder = ChargeLadder::build(&p, 6).unwrap();
        let (j1, j2) = (poisson_j1(&p), poisson_j2(&p).unwrap());
        let (h1, h2) = (hamiltonian_h1(&p), hamiltonian_h2(&p));
        for h in &ladder.charges {
            let scale = 1.0 + h.matrix().norm();
            prop_assert!(quad_bracket(&j1, h, &h1).matrix().norm() <= 1e-10 * scale);
            prop_assert!(quad_bracket(&j2, h, &h2).matrix().norm() <= 1e-10 * scale);
            prop_assert!(plane_coordinates(&p, h).is_ok());
        }
    }

    #[test]
    fn combined_structures(p in frequency_params(), c1 in -3.0..3.0f64, c2 in -3.0..3.0f64, t in 0.0..5.0f64, v in state()) {
        match combine(&p, c1, c2) {
            Ok(c) => {
                prop_assert!(c.residual <= 1e-10);
                let m = pu_core::model::companion_field(&p);
                let vt = expm(&m.scale(t)).unwrap().mul_vec(&v.to_array());
                let h0 = c.hbar.value(&v.to_array());
                let ht = c.hbar.value(&vt);
                prop_assert!((ht - h0).abs() <= 1e-8 * (1.0 + c.hbar.matrix().norm() * (1.0 + vt.iter().map(|x| x * x).sum::<f64>())));
                prop_assert_eq!(pd_window(&p, c1, c2).unwrap(), pd_by_minors(&p, c1, c2).unwrap());
            }
            Err(e) => prop_assert!(matches!(e, pu_core::PuError::DegenerateCombination(_))),
        }
    }
}

/// Each frequency ordering admits at least one positive window.
#[test]
fn windows_exist_for_both_orderings() {
    for (w1, w2) in [(2.0, 1.0), (0.7, 1.9)] {
        let p = PuParams::from_frequencies(w1, w2).unwrap();
        let found = (0..400).any(|k| {
            let th = k as f64 * std::f64::consts::TAU / 400.0;
            pd_window(&p, th.cos(), th.sin()).unwrap()
        });
        assert!(found, "{w1} {w2}");
    }
}
