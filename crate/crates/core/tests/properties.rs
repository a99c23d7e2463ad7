use std::f64::consts::PI;

use bloch_uncertainty::linalg::HermitianMatrix;
use bloch_uncertainty::regions::{rle_decode, rle_encode};
use bloch_uncertainty::relations::{
    check_appendix_b, check_theorem1, check_unit_vector_relation, robertson_bound, theorem1_from_vectors,
    unit_vector_db_span,
};
use bloch_uncertainty::sampling::{hs_mixed_state, random_observable, stream_rng};
use bloch_uncertainty::variance::{variance_bloch, variance_matrix};
use bloch_uncertainty::{build_basis, Observable, QuantumState};
use proptest::prelude::*;

fn ball_point() -> impl Strategy<Value = [f64; 3]> {
    (prop::array::uniform3(-1.0f64..1.0), 0.0f64..=1.0).prop_map(|(v, r)| {
        let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        if n < 1e-9 {
            [0.0, 0.0, r]
        } else {
            [v[0] / n * r, v[1] / n * r, v[2] / n * r]
        }
    })
}

fn bloch_vec() -> impl Strategy<Value = [f64; 3]> {
    prop::array::uniform3(-2.0f64..2.0)
        .prop_filter("nonzero", |v| v.iter().map(|x| x * x).sum::<f64>() > 1e-6)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn variance_routes_agree(seed in any::<u64>(), dim in 2usize..=5) {
        let basis = build_basis(dim).unwrap();
        let mut rng = stream_rng(seed, 0);
        let s = hs_mixed_state(&mut rng, &basis, dim).unwrap();
        let a = random_observable(&mut rng, &basis);
        let m = variance_matrix(&a, &s).unwrap();
        let b = variance_bloch(&a, &s).unwrap();
        prop_assert!((m - b).abs() <= 1e-9, "{} vs {}", m, b);
        prop_assert!(m >= -1e-12);
    }

    #[test]
    fn qubit_pair_relation_holds_everywhere(a in bloch_vec(), b in bloch_vec(), p in ball_point()) {
        let basis = build_basis(2).unwrap();
        let (oa, ob) = (Observable::from_bloch(&a, &basis).unwrap(), Observable::from_bloch(&b, &basis).unwrap());
        let s = QuantumState::from_bloch(&p, &basis).unwrap();
        let v = check_theorem1(&oa, &ob, &s).unwrap();
        prop_assert!(v.holds, "{:?}", v);
        let w = theorem1_from_vectors(&a, &b, &p).unwrap();
        prop_assert!(w.margin >= -1e-12);
        prop_assert!(robertson_bound(&oa, &ob, &s).unwrap().holds);
    }

    #[test]
    fn sum_of_pauli_variances(p in ball_point()) {
        let basis = build_basis(2).unwrap();
        let s = QuantumState::from_bloch(&p, &basis).unwrap();
        let v = check_appendix_b(&s, &basis).unwrap();
        prop_assert!(v.margin.abs() <= 1e-11, "{:?}", v);
    }

    #[test]
    fn span_is_exactly_the_admissible_set(theta in 0.0f64..=PI / 2.0, da2 in 0.0f64..=1.0, t in 0.0f64..=1.0) {
        let (lo, hi) = unit_vector_db_span(theta, da2).unwrap();
        let (flo, fhi) = unit_vector_db_span(PI - theta, da2).unwrap();
        prop_assert!((lo - flo).abs() < 1e-14 && (hi - fhi).abs() < 1e-14);
        prop_assert!(lo <= hi + 1e-15);
        let inside = lo + t * (hi - lo);
        let v = check_unit_vector_relation(theta, da2, (inside * inside).min(1.0)).unwrap();
        prop_assert!(v.margin >= -1e-9, "inside {} of [{}, {}]: {:?}", inside, lo, hi, v);
        if lo > 1e-3 {
            let below = lo * (1.0 - 1e-3) * t;
            prop_assert!(!check_unit_vector_relation(theta, da2, below * below).unwrap().holds);
        }
    }

    #[test]
    fn eigh_reconstructs(seed in any::<u64>(), n in 1usize..=6) {
        let mut rng = stream_rng(seed, 1);
        let g = bloch_uncertainty::ComplexMatrix::from_fn(n, |_, _| bloch_uncertainty::sampling::gaussian_complex(&mut rng));
        let h = HermitianMatrix::new(g.add(&g.adjoint()).unwrap().scale(0.5.into())).unwrap();
        let e = h.eigh().unwrap();
        let mut recon = bloch_uncertainty::ComplexMatrix::zeros(n);
        for k in 0..n {
            let outer = HermitianMatrix::projector(&e.vector(k)).scale(e.values[k]);
            recon = recon.add(outer.as_matrix()).unwrap();
        }
        prop_assert!(recon.max_abs_diff(h.as_matrix()).unwrap() < 1e-10);
        prop_assert!(e.values.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn rle_round_trips(bits in prop::collection::vec(any::<bool>(), 0..300)) {
        prop_assert_eq!(rle_decode(&rle_encode(&bits)), bits);
    }
}
