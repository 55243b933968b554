mod common;

use num_bigint::BigInt;
use num_traits::Zero;

use common::{brute_derivative, detect_inputs, direct_taylor};
use tmsl::geometry::{
    block_structure, error_correction_order, h_taylor, hessian, influence, p_matrix, s_coefficient, uniform,
};
use tmsl::linalg::{q, Q};
use tmsl::machine::{detect_a0, Direction, MachineSpec, Transition};
use tmsl::newton::newton_bound;
use tmsl::noisy::LocalChart;
use tmsl::oracle::{enumerate_syndromes, eval_syndrome};
use tmsl::propagate::{MultiIndex, SyndromeCounts};
use tmsl::Error;

fn counts(spec: &MachineSpec, inputs: &[Vec<usize>], k_max: usize) -> SyndromeCounts {
    SyndromeCounts::compute(spec, inputs, 2, k_max).unwrap()
}

#[test]
fn s_coefficient_special_cases() {
    // S^k_k = ∏ k_j! once the gate is open.
    assert_eq!(s_coefficient(&[vec![2, 1]], &[vec![2, 1]], &[3]), BigInt::from(2));
    assert_eq!(s_coefficient(&[vec![2, 1]], &[vec![2, 1]], &[2]), BigInt::zero());
    // S^k_0 = (-1)^{|k|} n!/(n-|k|)!.
    assert_eq!(s_coefficient(&[vec![1, 1]], &[vec![0, 0]], &[4]), BigInt::from(12));
    assert_eq!(s_coefficient(&[vec![3]], &[vec![0]], &[4]), BigInt::from(-24));
    for (k, s, n) in [(vec![2, 1], vec![1, 0], 5), (vec![1, 1, 1], vec![0, 1, 1], 4)] {
        let b = n - s.iter().sum::<u32>();
        assert_eq!(
            s_coefficient(std::slice::from_ref(&k), std::slice::from_ref(&s), &[n]),
            brute_derivative(&k, b, &s)
        );
    }
}

#[test]
fn weight_one_influence_is_the_syndrome_count() {
    let spec = detect_a0();
    let xs = detect_inputs(&spec);
    let c = counts(&spec, &xs, 1);
    let g18: Vec<BigInt> = c.inputs.iter().map(|ic| influence(ic, &[(17, 1)], &c).unwrap()).collect();
    assert_eq!(g18, [1, 0, 1, 0, 1, 0].map(BigInt::from));
    for ic in &c.inputs {
        assert!(influence(ic, &[], &c).unwrap().is_zero());
        for k in 0..30u32 {
            assert_eq!(influence(ic, &[(k, 1)], &c).unwrap(), ic.a_s(&[(k, 1)]).unwrap());
        }
    }
    assert!(matches!(influence(&c.inputs[0], &[(2, 2)], &c), Err(Error::Budget { .. })));
}

#[test]
fn first_derivatives_vanish_and_second_match_the_formula() {
    let spec = detect_a0();
    let c = counts(&spec, &detect_inputs(&spec), 1);
    let qx = uniform(6);
    for k in 0..30u32 {
        assert!(h_taylor(&[(k, 1)], &qx, &c).unwrap().is_zero());
    }
    assert_eq!(h_taylor(&[(17, 2)], &qx, &c).unwrap(), q(1));
    let h = hessian(&p_matrix(&c).unwrap(), &qx).unwrap();
    for i in 0..30u32 {
        for j in i + 1..30 {
            assert_eq!(&h_taylor(&[(i, 1), (j, 1)], &qx, &c).unwrap(), h.get(i as usize, j as usize));
        }
    }
}

#[test]
fn third_order_taylor_matches_direct_expansion() {
    let spec = detect_a0();
    let c = counts(&spec, &detect_inputs(&spec), 2);
    let qx = uniform(6);
    let direct = direct_taylor(&c, &qx, 3);
    let third: Vec<&MultiIndex> = direct.keys().filter(|k| k.iter().map(|e| e.1).sum::<u32>() == 3).collect();
    assert!(!third.is_empty());
    for k in &third {
        assert_eq!(&h_taylor(k, &qx, &c).unwrap(), &direct[*k], "k = {k:?}");
    }
    // A few third-order indices on relevant coordinates where the expansion has no term.
    let relevant = [2u32, 12, 17, 22, 23, 24];
    for &a in &relevant {
        for &b in &relevant {
            if a < b {
                for k in [vec![(a, 2), (b, 1)], vec![(a, 1), (b, 2)]] {
                    let want = direct.get(&k).cloned().unwrap_or_else(Q::zero);
                    assert_eq!(h_taylor(&k, &qx, &c).unwrap(), want, "k = {k:?}");
                }
            }
        }
    }
    assert!(matches!(h_taylor(&[(2, 4)], &qx, &c), Err(Error::Budget { .. })));
}

#[test]
fn rank_of_hessian_equals_rank_of_p_and_kernel_is_annihilated() {
    let spec = detect_a0();
    let c = counts(&spec, &detect_inputs(&spec), 1);
    let p = p_matrix(&c).unwrap();
    let h = hessian(&p, &uniform(6)).unwrap();
    assert!(h.is_symmetric());
    assert_eq!(h.rank(), p.rank());
    let kernel = h.kernel();
    assert_eq!(kernel.len(), 26);
    for v in &kernel {
        assert!(h.mul_vec(v).iter().all(Zero::is_zero));
    }
    // The zero coordinate directions lie in the kernel.
    let report = block_structure(&h, None);
    assert_eq!(report.zero_coordinates.len(), 24);
    for &i in &report.zero_coordinates {
        let mut e = vec![Q::zero(); 30];
        e[i] = q(1);
        assert!(h.mul_vec(&e).iter().all(Zero::is_zero));
    }
}

#[test]
fn identity_partition_gives_a_trivial_report() {
    let spec = detect_a0();
    let c = counts(&spec, &detect_inputs(&spec), 1);
    let h = hessian(&p_matrix(&c).unwrap(), &uniform(6)).unwrap();
    let whole: Vec<Vec<usize>> = vec![(0..30).collect()];
    let r = block_structure(&h, Some(&whole));
    assert!(r.zero_blocks.is_empty() && r.nonzero_blocks.is_empty());
}

/// From `start`, A leads to accept and B to reject; the two branches share
/// no transition tuple.
fn two_branch() -> MachineSpec {
    let names = |v: &[&str]| v.iter().map(|s| s.to_string()).collect::<Vec<_>>();
    let (rej, acc, start) = (0, 1, 2);
    let stay = |write, next| Transition { write, next, dir: Direction::Stay };
    // Tuple order: symbol major, state minor.
    let transitions = vec![
        stay(0, rej),
        stay(0, acc),
        stay(0, rej),
        stay(1, rej),
        stay(1, acc),
        stay(1, acc),
        stay(2, rej),
        stay(2, acc),
        stay(2, rej),
    ];
    MachineSpec::new(names(&["_", "A", "B"]), names(&["reject", "accept", "start"]), start, transitions).unwrap()
}

#[test]
fn disjoint_branches_give_a_zero_off_diagonal_block() {
    let spec = two_branch();
    let xs = vec![spec.parse_input("A").unwrap(), spec.parse_input("B").unwrap()];
    let c = counts(&spec, &xs, 1);
    let h = hessian(&p_matrix(&c).unwrap(), &[Q::new(1.into(), 2.into()), Q::new(1.into(), 2.into())]).unwrap();
    let chart = LocalChart::new(&spec);
    let a = spec.symbol_index("A").unwrap();
    let by_symbol = |sym: usize| -> Vec<usize> {
        (0..chart.dim()).filter(|&k| spec.key(chart.coordinate(k).tuple).0 == sym).collect()
    };
    let parts = vec![by_symbol(a), by_symbol(spec.symbol_index("B").unwrap())];
    let r = block_structure(&h, Some(&parts));
    assert_eq!(r.zero_blocks, vec![(0, 1)]);
    assert!(h.rank() > 0);
    // Every connected component stays inside one branch.
    for comp in &r.components {
        assert!(comp.iter().all(|i| parts[0].contains(i)) || comp.iter().all(|i| parts[1].contains(i)));
    }
}

/// Largest `C` with every syndrome of weight `<= C` harmless, by enumeration.
fn enumerated_order(spec: &MachineSpec, inputs: &[Vec<usize>], c_max: usize) -> usize {
    let chart = LocalChart::new(spec);
    let blocks: Vec<usize> = (0..chart.block_count()).collect();
    let mut c = 0;
    for w in 1..=c_max {
        let harmless = inputs.iter().all(|x| {
            let y = tmsl::machine::tm_run(x, spec, 2).unwrap();
            enumerate_syndromes(spec, &blocks, w).unwrap().all(|g| eval_syndrome(x, &g, spec).unwrap() == y)
        });
        if !harmless {
            break;
        }
        c = w;
    }
    c
}

#[test]
fn error_correction_order_agrees_with_enumeration() {
    let spec = detect_a0();
    let all = detect_inputs(&spec);
    assert_eq!(error_correction_order(&spec, &all, 2, 1).unwrap(), 0);
    assert_eq!(enumerated_order(&spec, &all, 1), 0);
    for word in ["AA", "BB", "A"] {
        let only = vec![spec.parse_input(word).unwrap()];
        let c = error_correction_order(&spec, &only, 2, 1).unwrap();
        assert_eq!(c, enumerated_order(&spec, &only, 1), "input {word}");
        let counts = counts(&spec, &only, 1);
        let weight_one_zero = (0..30u32).all(|k| counts.inputs[0].a_s(&[(k, 1)]).unwrap().is_zero());
        assert_eq!(c >= 1, weight_one_zero, "input {word}");
    }
    assert!(matches!(error_correction_order(&spec, &all, 2, 9), Err(Error::ResourceGuard(_))));
}

#[test]
fn newton_distance_never_grows_when_support_is_added() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(41);
    for _ in 0..50 {
        let d = rng.gen_range(1..=4);
        let point = |rng: &mut rand_chacha::ChaCha8Rng| -> Vec<u32> {
            loop {
                let p: Vec<u32> = (0..d).map(|_| rng.gen_range(0..=4)).collect();
                if p.iter().any(|&e| e > 0) {
                    return p;
                }
            }
        };
        let mut support = vec![point(&mut rng)];
        let mut l = newton_bound(&support, d).unwrap().l;
        for _ in 0..5 {
            support.push(point(&mut rng));
            let next = newton_bound(&support, d).unwrap().l;
            assert!(next <= l);
            l = next;
        }
    }
}
