use proptest::prelude::*;
use pu_core::numkit::{det, expm, inverse, nullspace, singular_values, Mat};

fn mat4(bound: f64) -> impl Strategy<Value = Mat> {
    prop::collection::vec(-bound..bound, 16).prop_map(|v| Mat::from_row_slice(4, 4, &v).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn inverse_is_two_sided(m in mat4(3.0)) {
        if let Ok(inv) = inverse(&m) {
            let cond = m.norm() * inv.norm();
            prop_assume!(cond < 1e6);
            prop_assert!((&m * &inv).distance(&Mat::identity(4)) <= 1e-10 * cond);
            prop_assert!((&inv * &m).distance(&Mat::identity(4)) <= 1e-10 * cond);
        }
    }

    #[test]
    fn expm_of_negation_is_inverse(m in mat4(10.0)) {
        let m = if m.norm() > 10.0 { m.scale(10.0 / m.norm()) } else { m };
        let e = expm(&m).unwrap();
        let f = expm(&m.scale(-1.0)).unwrap();
        let prod = &e * &f;
        prop_assert!(prod.distance(&Mat::identity(4)) <= 1e-9 * (1.0 + e.norm() * f.norm()));
    }

    #[test]
    fn expm_semigroup(m in mat4(1.0), s in -2.0..2.0f64, t in -2.0..2.0f64) {
        let lhs = expm(&m.scale(s + t)).unwrap();
        let rhs = &expm(&m.scale(s)).unwrap() * &expm(&m.scale(t)).unwrap();
        prop_assert!(lhs.distance(&rhs) <= 1e-9 * (1.0 + lhs.norm()));
    }

    #[test]
    fn rank_nullity(
        a in prop::collection::vec(-1.0..1.0f64, 6 * 2),
        b in prop::collection::vec(-1.0..1.0f64, 2 * 5),
    ) {
        // A 6×5 product of rank at most 2.
        let a = Mat::from_row_slice(6, 2, &a).unwrap();
        let b = Mat::from_row_slice(2, 5, &b).unwrap();
        let m = &a * &b;
        let sv = singular_values(&m).unwrap();
        let rank = sv.iter().filter(|s| **s > 1e-9 * (1.0 + m.norm())).count();
        let kernel = nullspace(&m, 1e-9).unwrap();
        prop_assert_eq!(kernel.len() + rank, 5);
        for v in &kernel {
            let mv = m.mul_vec(v);
            prop_assert!(mv.iter().map(|x| x * x).sum::<f64>().sqrt() <= 1e-9 * (1.0 + m.norm()));
        }
    }

    #[test]
    fn det_is_multiplicative(a in mat4(2.0), b in mat4(2.0)) {
        let lhs = det(&(&a * &b)).unwrap();
        let rhs = det(&a).unwrap() * det(&b).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-9 * (1.0 + rhs.abs()));
    }
}
