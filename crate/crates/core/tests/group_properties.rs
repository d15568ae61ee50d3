use hglp::GroupSpec;
use proptest::prelude::*;

fn point() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-5.0f64..5.0, 3)
}

fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
    a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol * (1.0 + x.abs()))
}

proptest! {
    #[test]
    fn heisenberg_law_is_associative(x in point(), y in point(), z in point()) {
        let g = GroupSpec::heisenberg();
        let a = g.multiply(&g.multiply(&x, &y).unwrap(), &z).unwrap();
        let b = g.multiply(&x, &g.multiply(&y, &z).unwrap()).unwrap();
        prop_assert!(close(&a, &b, 1e-12));
    }

    #[test]
    fn inverse_cancels(x in point()) {
        let g = GroupSpec::heisenberg();
        let e = g.multiply(&x, &GroupSpec::inverse(&x)).unwrap();
        prop_assert!(close(&e, &[0.0; 3], 1e-12));
    }

    #[test]
    fn dilations_are_automorphisms(x in point(), y in point(), t in 0.01f64..100.0) {
        let g = GroupSpec::heisenberg();
        let a = g.dilate(t, &g.multiply(&x, &y).unwrap()).unwrap();
        let b = g.multiply(&g.dilate(t, &x).unwrap(), &g.dilate(t, &y).unwrap()).unwrap();
        prop_assert!(close(&a, &b, 1e-11));
    }

    #[test]
    fn norm_is_homogeneous_and_symmetric(x in point(), t in 0.01f64..100.0) {
        let g = GroupSpec::heisenberg();
        let r = g.hom_norm(&x);
        let rt = g.hom_norm(&g.dilate(t, &x).unwrap());
        prop_assert!((rt - t * r).abs() <= 1e-9 * t * r.max(1e-300));
        prop_assert_eq!(g.hom_norm(&GroupSpec::inverse(&x)), r);
    }

    #[test]
    fn norm_is_subadditive(x in point(), y in point()) {
        let g = GroupSpec::heisenberg();
        let xy = g.multiply(&x, &y).unwrap();
        prop_assert!(g.hom_norm(&xy) <= (g.hom_norm(&x) + g.hom_norm(&y)) * (1.0 + 1e-12));
    }
}
