mod common;

use common::{random_density, random_matrix, random_state, rng};
use qsc::qalg::{
    eig_hermitian, entropy, partial_trace, reduced_state, schmidt, tensor, Keep, Renyi,
};

#[test]
fn partial_trace_preserves_trace() {
    let mut r = rng(1);
    for (da, db) in [(1, 3), (2, 2), (2, 3), (3, 2), (4, 4), (2, 8)] {
        for _ in 0..10 {
            let rho = random_density(&mut r, da * db);
            for keep in [Keep::A, Keep::B] {
                let red = partial_trace(&rho, da, db, keep).unwrap();
                assert!((red.matrix().trace().re - 1.0).abs() < 1e-10);
                assert!(red.matrix().trace().im.abs() < 1e-10);
            }
        }
    }
}

#[test]
fn tensor_is_associative() {
    let mut r = rng(2);
    for _ in 0..20 {
        let a = random_matrix(&mut r, 2, 3);
        let b = random_matrix(&mut r, 3, 2);
        let c = random_matrix(&mut r, 2, 2);
        let left = tensor(&tensor(&a, &b).unwrap(), &c).unwrap();
        let right = tensor(&a, &tensor(&b, &c).unwrap()).unwrap();
        assert_eq!((left.rows(), left.cols()), (right.rows(), right.cols()));
        assert_eq!((left.rows(), left.cols()), (12, 12));
        assert!(left.max_abs_diff(&right) < 1e-12);
    }
}

#[test]
fn schmidt_matches_reduced_spectrum() {
    let mut r = rng(3);
    let shapes = [(2, 2), (2, 4), (4, 2), (3, 5), (4, 4), (1, 7), (2, 8)];
    for i in 0..200 {
        let (da, db) = shapes[i % shapes.len()];
        let psi = random_state(&mut r, da * db);
        let s = schmidt(&psi, da, db).unwrap();
        let red = reduced_state(&psi, da, db, Keep::B).unwrap();
        let ev = eig_hermitian(red.matrix()).unwrap().values;
        let mut sq: Vec<f64> = s.coeffs.iter().map(|c| c * c).collect();
        sq.resize(ev.len().max(sq.len()), 0.0);
        for (k, want) in ev.iter().enumerate() {
            assert!((sq[k] - want).abs() < 1e-9, "{da}x{db}: {sq:?} vs {ev:?}");
        }
    }
}

#[test]
fn renyi_half_dominates_von_neumann() {
    let mut r = rng(4);
    for d in 2..=6 {
        for _ in 0..10 {
            let rho = random_density(&mut r, d);
            let h = entropy(&rho, Renyi::Half).unwrap();
            let s = entropy(&rho, Renyi::VonNeumann).unwrap();
            assert!(h >= s - 1e-12);
            assert!(h <= (d as f64).log2() + 1e-12);
        }
    }
}
