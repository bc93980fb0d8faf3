mod common;

use std::f64::consts::PI;

use proptest::prelude::*;
use whichpath::gates::{
    bcnot, bcnot5_closed_form, cnot, local_correction, u1, u2, u_eff, u_zx, BcnotOrdering, BiasParams, BiasTerms,
};
use whichpath::linalg::{apply, tensor, Matrix2, StateVector4, Unitary4};

use common::{max_diff, u_eff_oracle};

fn biases() -> impl Strategy<Value = [f64; 5]> {
    proptest::array::uniform5(-0.5f64..=0.5)
}

fn angle() -> impl Strategy<Value = f64> {
    -2.0 * PI..2.0 * PI
}

fn random_unitary(a: [f64; 4], b: [f64; 4], beta: [f64; 5]) -> Unitary4 {
    let local = Unitary4::local(&(u2(a[0], a[1]) * u1(a[2])), &(u2(b[0], b[1]) * u1(b[3]))).unwrap();
    local * bcnot(&BiasParams::new(beta), BcnotOrdering::Plain, BiasTerms::Five) * u_zx(a[3] + b[2])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn every_variant_is_unitary(beta in biases()) {
        let b = BiasParams::new(beta);
        for ordering in BcnotOrdering::ALL {
            for terms in [BiasTerms::Two, BiasTerms::Five] {
                prop_assert!(bcnot(&b, ordering, terms).matrix().unitarity_deviation() < 1e-11);
            }
        }
    }

    #[test]
    fn closed_form_entries_match_exponential(beta in biases()) {
        let b = BiasParams::new(beta);
        prop_assert!(max_diff(&u_eff(&b).matrix().0, &u_eff_oracle(&beta)) < 1e-10);
    }

    #[test]
    fn bcnot5_transcription_matches_product(beta in biases()) {
        let b = BiasParams::new(beta);
        let product = u_eff(&b) * local_correction();
        prop_assert!(bcnot5_closed_form(&b).matrix().max_abs_diff(product.matrix()) < 1e-12);
    }

    #[test]
    fn primed_variant_is_a_remapped_plain(beta in biases()) {
        let b = BiasParams::new(beta);
        let primed = bcnot(&b, BcnotOrdering::Primed, BiasTerms::Five);
        let mapped = bcnot(&b.reordering_map(), BcnotOrdering::Plain, BiasTerms::Five);
        prop_assert!(primed.matrix().max_abs_diff(mapped.matrix()) < 1e-12);
    }

    #[test]
    fn triple_primed_variant_is_a_remapped_plain(beta in biases()) {
        let b = BiasParams::new(beta);
        let triple = bcnot(&b, BcnotOrdering::TriplePrimed, BiasTerms::Five);
        let mapped = bcnot(&b.reordering_map(), BcnotOrdering::Plain, BiasTerms::Five);
        prop_assert!(triple.matrix().max_abs_diff(mapped.matrix()) < 1e-12);
    }

    #[test]
    fn double_primed_variant_is_plain(beta in biases()) {
        let b = BiasParams::new(beta);
        let d = bcnot(&b, BcnotOrdering::DoublePrimed, BiasTerms::Five);
        let p = bcnot(&b, BcnotOrdering::Plain, BiasTerms::Five);
        prop_assert!(d.matrix().max_abs_diff(p.matrix()) < 1e-12);
    }

    #[test]
    fn reordering_map_is_a_signed_permutation_within_groups(beta in biases()) {
        let m = BiasParams::new(beta).reordering_map().beta;
        let mut echo_in: Vec<f64> = beta[..2].iter().map(|v| v.abs()).collect();
        let mut echo_out: Vec<f64> = m[..2].iter().map(|v| v.abs()).collect();
        let mut cross_in: Vec<f64> = beta[2..].iter().map(|v| v.abs()).collect();
        let mut cross_out: Vec<f64> = m[2..].iter().map(|v| v.abs()).collect();
        for v in [&mut echo_in, &mut echo_out, &mut cross_in, &mut cross_out] {
            v.sort_by(f64::total_cmp);
        }
        prop_assert_eq!(echo_in, echo_out);
        prop_assert_eq!(cross_in, cross_out);
    }

    #[test]
    fn two_term_model_is_five_term_with_crosstalk_zeroed(beta in biases()) {
        let b = BiasParams::new(beta);
        let two = bcnot(&b, BcnotOrdering::Plain, BiasTerms::Two);
        let five = bcnot(&BiasParams::new([beta[0], beta[1], 0.0, 0.0, 0.0]), BcnotOrdering::Plain, BiasTerms::Five);
        prop_assert!(two.matrix().max_abs_diff(five.matrix()) < 1e-15);
    }

    #[test]
    fn products_of_unitaries_stay_unitary(a in proptest::array::uniform4(angle()), b in proptest::array::uniform4(angle()), beta in biases()) {
        prop_assert!(random_unitary(a, b, beta).matrix().unitarity_deviation() < 1e-11);
    }

    #[test]
    fn apply_preserves_norm(a in proptest::array::uniform4(angle()), b in proptest::array::uniform4(angle()), beta in biases(), basis in 0usize..4) {
        let u = random_unitary(a, b, beta);
        let s = StateVector4::basis(basis).apply_first(&u2(a[1], b[0])).apply_second(&u2(b[1], a[0]));
        prop_assert!((apply(&u, &s).norm_sqr() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn tensor_factorizes_through_identity(a in proptest::array::uniform2(angle()), b in proptest::array::uniform2(angle())) {
        let (g, h) = (u2(a[0], a[1]), u2(b[0], b[1]));
        let split = tensor(&g, &Matrix2::identity()) * tensor(&Matrix2::identity(), &h);
        prop_assert!(split.max_abs_diff(&tensor(&g, &h)) < 1e-12);
    }
}

#[test]
fn zero_bias_entangler_is_cnot() {
    for ordering in BcnotOrdering::ALL {
        let g = bcnot(&BiasParams::ZERO, ordering, BiasTerms::Five);
        assert!(g.matrix().max_abs_diff(cnot().matrix()) < 1e-12, "{ordering:?}");
    }
    assert!(u_eff(&BiasParams::ZERO).matrix().max_abs_diff(u_zx(PI / 2.0).matrix()) < 1e-15);
    assert_eq!(BiasParams::ZERO.gamma(0), 1.0);
    assert_eq!(BiasParams::ZERO.gamma(1), 1.0);
}

#[test]
fn exponential_oracle_reproduces_zx_rotation() {
    assert!(max_diff(&u_eff_oracle(&[0.0; 5]), &u_zx(PI / 2.0).matrix().0) < 1e-13);
}
