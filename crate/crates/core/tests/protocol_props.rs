mod common;

use common::{protocol, COVARIANT};
use qsc::protocol::BitString;

#[test]
fn purifications_reduce_to_commitments() {
    for name in COVARIANT {
        for k in 1..=2 {
            let p = protocol(name, k);
            for x in BitString::all(p.n()) {
                let rho = p.commitment_state(&x).unwrap();
                let red = p.purification(&x).unwrap().reduced();
                assert!(red.distance(&rho) < 1e-9, "{name} k={k} x={x}");
            }
        }
    }
}

#[test]
fn orbit_is_covariant() {
    for name in COVARIANT {
        let p = protocol(name, 1);
        let (rep, orb) = (p.rep(), p.orbit());
        for g in 0..rep.order() {
            for s in 0..orb.len() {
                let moved = orb.states()[s].conjugate_by(rep.element(g));
                assert!(moved.distance(&orb.states()[orb.action(g, s)]) < 1e-9);
            }
        }
        assert!(p.covariance_defect() < 1e-9);
    }
}

#[test]
fn commitments_share_a_spectrum() {
    for name in COVARIANT {
        for k in 1..=3 {
            let p = protocol(name, k);
            let reference = p
                .commitment_state(&BitString::from_index(0, p.n()))
                .unwrap();
            let want = reference.spectrum().unwrap();
            for x in BitString::all(p.n()) {
                let got = p.commitment_state(&x).unwrap().spectrum().unwrap();
                for (a, b) in got.iter().zip(&want) {
                    assert!((a - b).abs() < 1e-9, "{name} k={k} x={x}");
                }
            }
        }
    }
}

#[test]
fn honest_parties_always_accept() {
    for name in COVARIANT {
        for k in 1..=3 {
            let p = protocol(name, k);
            if p.dim() > 64 {
                continue;
            }
            for x in BitString::all(p.n()) {
                let v = p.honest_run(&x).unwrap();
                assert!((v - 1.0).abs() < 1e-12, "{name} k={k} x={x}: {v}");
            }
        }
    }
}
