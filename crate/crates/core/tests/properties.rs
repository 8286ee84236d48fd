use hyperbergman_core::bergman::{s_transform, BasisSpec};
use hyperbergman_core::fields::{cr_residual_theta_u, holomorphic_monomial, holomorphic_pair, u_hyperholomorphic_from};
use hyperbergman_core::moebius::MoebiusMap;
use hyperbergman_core::quaternion::theta_pairing;
use hyperbergman_core::reduce::pairwise_sum;
use hyperbergman_core::{Complex64, Quaternion, ThetaFrame, ThetaPoint};
use proptest::prelude::*;

fn quat(r: f64) -> impl Strategy<Value = Quaternion> {
    prop::array::uniform4(-r..r).prop_map(Quaternion::from_array)
}

fn unit_quat() -> impl Strategy<Value = Quaternion> {
    quat(1.0).prop_filter("away from zero", |q| q.norm() > 0.2)
}

fn point(r: f64) -> impl Strategy<Value = ThetaPoint> {
    prop::array::uniform4(-r..r).prop_map(ThetaPoint::from_array)
}

fn rel(a: Quaternion, b: Quaternion) -> f64 {
    (a - b).norm() / b.norm().max(1e-300)
}

proptest! {
    #[test]
    fn product_is_associative(p in quat(3.0), q in quat(3.0), r in quat(3.0)) {
        let a = (p * q) * r;
        prop_assert!((a - p * (q * r)).norm() <= 1e-13 * (1.0 + a.norm()));
    }

    #[test]
    fn norm_is_multiplicative(p in quat(3.0), q in quat(3.0)) {
        prop_assert!(((p * q).norm() - p.norm() * q.norm()).abs() <= 1e-13 * (1.0 + p.norm() * q.norm()));
    }

    #[test]
    fn conjugation_reverses_products(p in quat(3.0), q in quat(3.0)) {
        prop_assert!(((p * q).conj() - q.conj() * p.conj()).norm() <= 1e-13 * (1.0 + p.norm() * q.norm()));
    }

    #[test]
    fn j_conjugates_complex_scalars(re in -5.0..5.0f64, im in -5.0..5.0f64) {
        let a = Quaternion::from_complex(Complex64::new(re, im));
        prop_assert!((a * Quaternion::J - Quaternion::J * a.conj()).norm() == 0.0);
    }

    #[test]
    fn inverse_is_two_sided(q in unit_quat()) {
        let qi = q.inverse().unwrap();
        prop_assert!((q * qi - Quaternion::ONE).norm() < 1e-14);
        prop_assert!((qi * q - Quaternion::ONE).norm() < 1e-14);
    }

    #[test]
    fn frame_embedding_round_trips(theta in 0.0..6.3f64, p in point(2.0), z1r in -2.0..2.0f64, z2i in -2.0..2.0f64) {
        let fr = ThetaFrame::new(theta);
        let back = fr.unembed(fr.embed(&p));
        prop_assert!(back.distance(&p) < 1e-14);
        let (a, b) = (Complex64::new(z1r, 0.3), Complex64::new(-0.7, z2i));
        let (a2, b2) = fr.unembed_pair(fr.embed_pair(a, b));
        prop_assert!((a2 - a).norm() < 1e-14 && (b2 - b).norm() < 1e-14);
        // <embed_pair(a, b), z> = Re(conj(a) z1 + conj(b) z2).
        let lhs = theta_pairing(fr.embed_pair(a, b), fr.embed(&p), &fr);
        let rhs = (a.conj() * p.z1() + b.conj() * p.z2()).re;
        prop_assert!((lhs - rhs).abs() < 1e-13);
    }

    #[test]
    fn pairwise_sum_is_exact_on_integers(n in 0usize..5000) {
        let s: f64 = pairwise_sum(n, |i| i as f64);
        prop_assert_eq!(s, (n * n.saturating_sub(1) / 2) as f64);
    }

    #[test]
    fn moebius_inverse_round_trip(a in unit_quat(), b in quat(1.0), c in quat(0.3), d in unit_quat(), z in quat(0.5)) {
        let t = match MoebiusMap::new(a, b, c, d) { Ok(t) => t, Err(_) => return Ok(()) };
        let Ok(w) = t.apply(z) else { return Ok(()) };
        let Ok(back) = t.inverse_map().and_then(|ti| ti.apply(w)) else { return Ok(()) };
        let scale = 1.0 + w.norm() * (c.norm() + 1.0);
        prop_assume!(scale < 1e3);
        prop_assert!((back - z).norm() < 1e-10 * scale, "{:?} {:?}", back, z);
    }

    #[test]
    fn c_weight_is_positive_multiple_of_a(a in unit_quat(), b in quat(1.0), c in quat(1.0), d in unit_quat(), z in quat(0.5)) {
        let Ok(t) = MoebiusMap::new(a, b, c, d) else { return Ok(()) };
        let w = t.weights();
        let (Ok(ct), Ok(at), Ok(lam)) = (w.c_t(z), w.a_t(z), w.lambda()) else { return Ok(()) };
        prop_assert!(lam > 0.0);
        prop_assert!(rel(at * lam, ct) < 1e-10);
    }

    #[test]
    fn s_transform_composition(u in quat(1.0), v in quat(1.0), p in point(0.8), theta in 0.0..3.2f64) {
        let fr = ThetaFrame::new(theta);
        let f = holomorphic_monomial(1, 2).to_field(fr);
        let lhs = s_transform(&f, u - v, &fr).eval(&p);
        let rhs = s_transform(&s_transform(&f, u, &fr), -v, &fr).eval(&p);
        prop_assert!((lhs - rhs).norm() <= 1e-14 * (1.0 + lhs.norm()));
    }

    #[test]
    fn certified_generators_are_members(u in quat(1.0), theta in 0.0..3.2f64, m in 0u32..4, n in 0u32..4, p in point(0.5)) {
        let fr = ThetaFrame::new(theta);
        let h = holomorphic_pair(fr, &holomorphic_monomial(m, n), &holomorphic_monomial(n, m));
        let f = u_hyperholomorphic_from(&h, u, &fr);
        prop_assert!(cr_residual_theta_u(&f, u, &fr, &p, 1e-3).unwrap() < 1e-4);
    }

    #[test]
    fn basis_elements_are_members(u in quat(1.0), theta in 0.0..3.2f64, k in 0usize..10, p in point(0.5)) {
        let spec = BasisSpec::theta_u(u, theta, 3);
        let f = spec.element(k);
        prop_assert!(cr_residual_theta_u(&f, u, &spec.frame(), &p, 1e-3).unwrap() < 1e-4);
    }
}
