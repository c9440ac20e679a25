mod common;

use common::{protocol, rng, COVARIANT};
use qsc::binding::{binding_bound, evaluate_strategy, me_attack, random_strategy, renyi_bound};
use qsc::qalg::{entropy, DensityOperator, Renyi};

#[test]
fn random_strategies_never_beat_the_bound() {
    let mut r = rng(20);
    for name in COVARIANT {
        for k in 1..=2 {
            let p = protocol(name, k);
            let bound = binding_bound(&p).unwrap().sum_bound;
            let trials = if k == 1 { 600 } else { 200 };
            let mut worst = 0.0f64;
            for i in 0..trials {
                let s = random_strategy(&p, 1 + i % 3, &mut r);
                let sum = evaluate_strategy(&p, &s).unwrap().sum;
                assert!(sum <= bound + 1e-9, "{name} k={k}: {sum} > {bound}");
                worst = worst.max(sum);
            }
            assert!(worst > 0.0);
        }
    }
}

#[test]
fn entangled_attack_saturates_symmetrically() {
    for name in COVARIANT {
        for k in 1..=3 {
            let p = protocol(name, k);
            let bound = binding_bound(&p).unwrap().sum_bound;
            let s = me_attack(&p).unwrap();
            let out = evaluate_strategy(&p, &s).unwrap();
            assert!((out.sum - bound).abs() < 1e-9, "{name} k={k}");
            let first = out.per_x[0];
            assert!(out.per_x.iter().all(|v| (v - first).abs() < 1e-9));
            let mixed = DensityOperator::maximally_mixed(p.dim());
            assert!(s.bob_state().distance(&mixed) < 1e-12);
        }
    }
}

#[test]
fn renyi_form_agrees() {
    for name in COVARIANT {
        for k in 1..=3 {
            let p = protocol(name, k);
            let b = binding_bound(&p).unwrap();
            let r = renyi_bound(&p).unwrap();
            assert!((b.sum_bound.log2() - r).abs() < 1e-9);
            // independent route through the single-copy fiducial
            let rho0 = p.orbit().states()[0].clone();
            let s_half = k as f64 * entropy(&rho0, Renyi::Half).unwrap();
            let direct = p.n() as f64 - ((p.dim() as f64).log2() - s_half);
            assert!((b.a_bits - direct).abs() < 1e-9, "{name} k={k}");
        }
    }
}
