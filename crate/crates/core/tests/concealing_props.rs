mod common;

use common::{protocol, random_matrix, random_state, rng, COVARIANT};
use qsc::concealing::{
    covariant_povm, covariant_povm_defect, davies_value, maximize_accessible_info,
    mutual_info_povm, Povm,
};
use qsc::grouprep::BuiltinName;
use qsc::qalg::{eig_hermitian, ComplexMatrix, C64};

#[test]
fn davies_equals_povm_mutual_information() {
    let mut r = rng(30);
    for name in COVARIANT {
        let p = protocol(name, 1);
        let d = p.copy_dim();
        for _ in 0..50 {
            let phi = random_state(&mut r, d);
            let dav = davies_value(p.rep(), p.orbit(), &phi).unwrap();
            let povm = covariant_povm(p.rep(), &phi).unwrap();
            let mi = mutual_info_povm(p.orbit().states(), &povm).unwrap();
            assert!((dav - mi).abs() < 1e-10, "{name}: {dav} vs {mi}");
            assert!(dav <= (d as f64).log2() + 1e-12);
            assert!(covariant_povm_defect(p.rep(), &phi) < 1e-9);
        }
    }
}

fn inverse_sqrt(s: &ComplexMatrix) -> ComplexMatrix {
    let eig = eig_hermitian(s).unwrap();
    let d = s.rows();
    let mut out = ComplexMatrix::zeros(d, d);
    for (l, v) in eig.values.iter().zip(&eig.vectors) {
        let a = v.amplitudes();
        let term = ComplexMatrix::outer(a, a).scale(C64::new(1.0 / l.sqrt(), 0.0));
        out = &out + &term;
    }
    out
}

/// `S^{-1/2} A_j†A_j S^{-1/2}` with `S = Σ A_j†A_j`.
fn random_povm(r: &mut impl rand::Rng, d: usize, outcomes: usize) -> Povm {
    let grams: Vec<ComplexMatrix> = (0..outcomes)
        .map(|_| {
            let a = random_matrix(r, d, d);
            &a.adjoint() * &a
        })
        .collect();
    let mut s = ComplexMatrix::zeros(d, d);
    for g in &grams {
        s = &s + g;
    }
    let w = inverse_sqrt(&s);
    Povm::new(grams.iter().map(|g| &(&w * g) * &w).collect()).unwrap()
}

#[test]
fn no_random_measurement_beats_the_maximizer() {
    let p = protocol(BuiltinName::Tetrahedral, 1);
    let best = maximize_accessible_info(p.rep(), p.orbit(), 64, 0)
        .unwrap()
        .i_acc_bits;
    let mut r = rng(31);
    for i in 0..100 {
        let povm = random_povm(&mut r, 2, 2 + i % 5);
        let mi = mutual_info_povm(p.orbit().states(), &povm).unwrap();
        assert!(mi <= best + 1e-6, "{mi} > {best}");
    }
}

#[test]
fn more_restarts_never_hurt() {
    for name in COVARIANT {
        let p = protocol(name, 1);
        let mut prev = f64::NEG_INFINITY;
        for restarts in [1, 2, 4, 8, 16] {
            let v = maximize_accessible_info(p.rep(), p.orbit(), restarts, 5)
                .unwrap()
                .i_acc_bits;
            assert!(v >= prev, "{name}: {v} < {prev} at {restarts}");
            prev = v;
        }
    }
}
