//! Randomized invariants of the free algebra and the matrix constructions.

use kvcert::constructions::{q_projection, unipotent_factor, verify_certificate};
use kvcert::free_algebra::{dsw_project, evaluate, is_lie, GradedSeries, Word};
use kvcert::matrix::{random_contraction, random_square_zero, square_zero_canonical, InstanceRng, MatrixElt};
use num_complex::Complex64;
use proptest::prelude::*;

const N: usize = 5;

fn series(max_len: usize) -> impl Strategy<Value = GradedSeries> {
    prop::collection::vec((1..=max_len, any::<u32>(), -1.0f64..1.0, -1.0f64..1.0), 1..12).prop_map(move |terms| {
        GradedSeries::from_terms(
            N,
            terms
                .into_iter()
                .map(|(len, code, re, im)| (Word::new(len, code & ((1 << len) - 1)).unwrap(), Complex64::new(re, im))),
        )
    })
}

fn close(a: &GradedSeries, b: &GradedSeries, tol: f64) -> bool {
    a.sub(b).l1_norm() <= tol
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn bracket_is_antisymmetric(p in series(N), q in series(N)) {
        prop_assert!(close(&p.bracket(&q), &q.bracket(&p).neg(), 1e-12));
    }

    #[test]
    fn jacobi_identity(p in series(2), q in series(2), r in series(1)) {
        let j = p.bracket(&q.bracket(&r)).add(&q.bracket(&r.bracket(&p))).add(&r.bracket(&p.bracket(&q)));
        prop_assert!(j.l1_norm() <= 1e-12);
    }

    #[test]
    fn projection_is_idempotent_and_lands_in_lie(p in series(N)) {
        let once = dsw_project(&p);
        prop_assert!(close(&dsw_project(&once), &once, 1e-12 * once.l1_norm().max(1.0)));
        prop_assert!(is_lie(&once, 1e-10).is_lie);
    }

    #[test]
    fn brackets_of_lie_elements_are_lie(p in series(2), q in series(3)) {
        let (p, q) = (dsw_project(&p), dsw_project(&q));
        prop_assert!(is_lie(&p.bracket(&q), 1e-12).is_lie);
    }

    #[test]
    fn scaling_is_multiplicative(p in series(N), q in series(N), t in -2.0f64..2.0) {
        let lhs = p.mul(&q).scale_re(t);
        let rhs = p.scale_re(t).mul(&q.scale_re(t));
        prop_assert!(close(&lhs, &rhs, 1e-12 * lhs.l1_norm().max(1.0)));
    }

    #[test]
    fn letter_swap_is_an_involution(p in series(N)) {
        prop_assert_eq!(p.swap_letters().swap_letters(), p);
    }

    #[test]
    fn evaluation_is_contractive_and_multiplicative(p in series(2), q in series(2), seed in any::<u64>()) {
        let mut rng = InstanceRng::new(seed);
        let u = random_contraction(3, &mut rng);
        let v = random_contraction(3, &mut rng);
        let ep = evaluate(&p, &u, &v).unwrap();
        prop_assert!(ep.op_norm() <= p.l1_norm() * (1.0 + 1e-12));
        // grades stay below the truncation, so the product is exact
        let epq = evaluate(&p.mul(&q), &u, &v).unwrap();
        let eq = evaluate(&q, &u, &v).unwrap();
        prop_assert!(epq.dist(&(&ep * &eq)) <= 1e-12 * p.l1_norm().max(1.0) * q.l1_norm().max(1.0));
    }

    #[test]
    fn square_zero_form_reconstructs(seed in any::<u64>(), dim in 2usize..9, norm in 0.01f64..5.0) {
        let mut rng = InstanceRng::new(seed);
        let x = random_square_zero(dim, norm, &mut rng).unwrap();
        let form = square_zero_canonical(&x).unwrap();
        prop_assert!(form.reconstruct().dist(&x) <= 1e-12 * norm);
        let c = unipotent_factor(&x).unwrap();
        prop_assert!(verify_certificate(&c).pass);
    }

    #[test]
    fn q_is_a_projection_up_to_norm_one(seed in any::<u64>(), scale in 0.0f64..=1.0) {
        let mut rng = InstanceRng::new(seed);
        let p = MatrixElt::diag(&[Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)]);
        let pc = &MatrixElt::identity(4) - &p;
        let c = random_contraction(4, &mut rng);
        let x = &(&p * &c) * &pc;
        let x = if x.op_norm() > 0.0 { x.scale_re(scale / x.op_norm()) } else { x };
        let q = q_projection(&p, &x).unwrap();
        prop_assert!((&q * &q).dist(&q) <= 1e-12);
        prop_assert!(q.hermitian_defect() <= 1e-12);
        let qm = q_projection(&p, &-&x).unwrap();
        prop_assert!((&q - &qm).dist(&(&x + &x.adjoint())) <= 1e-12);
    }
}
