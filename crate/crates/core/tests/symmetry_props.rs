use proptest::prelude::*;
use pu_core::dynamics::{Amplitudes, ClassicalSolution, Regime};
use pu_core::hierarchy::ChargeLadder;
use pu_core::model::{companion_field, PuParams};
use pu_core::numkit::expm;
use pu_core::symmetry::{
    act_on_hamiltonian, closed_form_flow, commutator, group_flow, paper_basis, solve_symmetries, GeneratorId,
};

fn params() -> impl Strategy<Value = PuParams> {
    (-3.0..3.0f64, -3.0..3.0f64)
        .prop_filter("|beta| >= 0.1", |(_, b)| b.abs() >= 0.1)
        .prop_map(|(a, b)| PuParams::new(a, b).unwrap())
}

fn frequency_params() -> impl Strategy<Value = PuParams> {
    (0.3..2.5f64, 0.3..2.5f64)
        .prop_filter("separated", |(a, b)| (a * a - b * b).abs() >= 0.1)
        .prop_map(|(a, b)| PuParams::from_frequencies(a.max(b), a.min(b)).unwrap())
}

fn amplitudes() -> impl Strategy<Value = Amplitudes> {
    prop::array::uniform4(-1.0..1.0f64).prop_map(|a| Amplitudes::new(a[0], a[1], a[2], a[3]))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn commutant_is_four_dimensional(p in params()) {
        let basis = solve_symmetries(&p).unwrap();
        prop_assert_eq!(basis.dim(), 4);
        for g in &basis.generators {
            prop_assert!(g.symmetry_defect(&p) <= 1e-10);
        }
        for x in paper_basis(&p).all() {
            prop_assert!(basis.projection_residual(&x.a) <= 1e-9);
        }
    }

    #[test]
    fn generators_commute(p in params()) {
        let b = paper_basis(&p);
        for x in b.all() {
            for y in b.all() {
                prop_assert!(commutator(x, y).a.norm() <= 1e-12 * (1.0 + x.a.norm() * y.a.norm()));
            }
        }
    }

    #[test]
    fn action_table(p in frequency_params()) {
        let b = paper_basis(&p);
        let ladder = ChargeLadder::build(&p, 6).unwrap();
        for i in 1..=5 {
            let h = ladder.charge(i).unwrap();
            let next = ladder.charge(i + 1).unwrap();
            let scale = 1.0 + next.matrix().norm();
            prop_assert!(act_on_hamiltonian(&b.x1, h).matrix().norm() <= 1e-10 * scale);
            prop_assert!(act_on_hamiltonian(&b.x2, h).distance(h) <= 1e-12 * scale);
            prop_assert!(act_on_hamiltonian(&b.x3, h).distance(next) <= 1e-9 * scale);
            prop_assert!(act_on_hamiltonian(&b.x4, h).matrix().norm() <= 1e-9 * scale);
        }
    }

    #[test]
    fn symmetry_flows_commute_with_time(p in params(), s in -1.0..1.0f64, t in 0.0..2.0f64) {
        let m = companion_field(&p);
        let et = expm(&m.scale(t)).unwrap();
        for x in paper_basis(&p).all() {
            let es = expm(&x.a.scale(s)).unwrap();
            let lhs = &es * &et;
            let rhs = &et * &es;
            prop_assert!(lhs.distance(&rhs) <= 1e-9 * (1.0 + lhs.norm()));
        }
    }

    #[test]
    fn nondegenerate_closed_forms(p in frequency_params(), amps in amplitudes(), s in 0.0..2.0f64, t in 0.0..10.0f64) {
        let b = paper_basis(&p);
        let sol = ClassicalSolution::new(p, amps).unwrap();
        for id in [GeneratorId::X2, GeneratorId::X3, GeneratorId::X4] {
            let expm_route = group_flow(b.get(id), s, &sol.eval(t)).unwrap();
            let closed = closed_form_flow(id, Regime::Nondegenerate, amps, &p, t, s).unwrap();
            prop_assert!(expm_route.max_abs_diff(&closed) <= 1e-8 * (1.0 + expm_route.norm()), "{id}");
        }
    }

    #[test]
    fn degenerate_closed_forms(w in 0.3..2.0f64, amps in amplitudes(), s in 0.0..2.0f64, t in 0.0..10.0f64) {
        let p = PuParams::from_frequencies(w, w).unwrap();
        let b = paper_basis(&p);
        let sol = ClassicalSolution::new(p, amps).unwrap();
        for id in [GeneratorId::X2, GeneratorId::X3, GeneratorId::X4] {
            let expm_route = group_flow(b.get(id), s, &sol.eval(t)).unwrap();
            let closed = closed_form_flow(id, Regime::Degenerate, amps, &p, t, s).unwrap();
            prop_assert!(expm_route.max_abs_diff(&closed) <= 1e-8 * (1.0 + expm_route.norm()), "{id}");
        }
    }
}
