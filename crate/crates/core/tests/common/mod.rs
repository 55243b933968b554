//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use rand::Rng;
use tmsl::linalg::Q;
use tmsl::machine::{Direction, MachineSpec, Transition};
use tmsl::propagate::{MultiIndex, SyndromeCounts};

pub const WORDS: [&str; 6] = ["A", "B", "AB", "BA", "AA", "BB"];

pub fn detect_inputs(spec: &MachineSpec) -> Vec<Vec<usize>> {
    WORDS.iter().map(|w| spec.parse_input(w).unwrap()).collect()
}

/// Dense multivariate polynomial keyed by exponent vectors.
type Poly = BTreeMap<Vec<u32>, BigInt>;

fn poly_mul(a: &Poly, b: &Poly) -> Poly {
    let mut out = Poly::new();
    for (ea, ca) in a {
        for (eb, cb) in b {
            let e: Vec<u32> = ea.iter().zip(eb).map(|(x, y)| x + y).collect();
            *out.entry(e).or_insert_with(BigInt::zero) += ca * cb;
        }
    }
    out.retain(|_, c| !c.is_zero());
    out
}

fn differentiate(p: &Poly, var: usize) -> Poly {
    let mut out = Poly::new();
    for (e, c) in p {
        if e[var] > 0 {
            let mut f = e.clone();
            f[var] -= 1;
            *out.entry(f).or_insert_with(BigInt::zero) += c * BigInt::from(e[var]);
        }
    }
    out.retain(|_, c| !c.is_zero());
    out
}

/// `∂^a [(1 - Σ y)^b ∏ y^c]` at `y = 0`, by expanding and differentiating.
pub fn brute_derivative(a: &[u32], b: u32, c: &[u32]) -> BigInt {
    let p = a.len();
    let one: Poly = [(vec![0; p], BigInt::one())].into_iter().collect();
    let mut base = one.clone();
    for j in 0..p {
        let mut e = vec![0; p];
        e[j] = 1;
        base.insert(e, BigInt::from(-1));
    }
    let mut f = one;
    for _ in 0..b {
        f = poly_mul(&f, &base);
    }
    let mut e = vec![0; p];
    e.copy_from_slice(c);
    f = poly_mul(&f, &[(e, BigInt::one())].into_iter().collect());
    for (j, &aj) in a.iter().enumerate() {
        for _ in 0..aj {
            f = differentiate(&f, j);
        }
    }
    f.get(&vec![0; p]).cloned().unwrap_or_else(BigInt::zero)
}

/// Taylor coefficients of `H = Σ q(x) p_err(x, w)²` up to `degree`,
/// expanded directly from the propagated polynomials. Keys are sparse
/// multi-indices, values `∂^k H` at the origin. Exact while
/// `degree <= k_max + 1`.
pub fn direct_taylor(counts: &SyndromeCounts, qx: &[Q], degree: u32) -> BTreeMap<MultiIndex, Q> {
    let chart = &counts.chart;
    let blocks: Vec<Vec<u32>> =
        (0..chart.block_count()).map(|b| chart.block_coords(b).iter().map(|&k| k as u32).collect()).collect();
    let mut h: BTreeMap<MultiIndex, Q> = BTreeMap::new();
    for (ic, qv) in counts.inputs.iter().zip(qx) {
        let mut err: Option<tmsl::poly::TruncatedPolynomial> = None;
        for (tau, f) in ic.f.iter().enumerate() {
            if tau != ic.target {
                let s = f.substitute_z(&blocks);
                match &mut err {
                    None => err = Some(s),
                    Some(e) => e.add_assign(&s),
                }
            }
        }
        let Some(e) = err else { continue };
        // Re-truncate at the target degree so the square keeps its top terms.
        let mut wide = tmsl::poly::TruncatedPolynomial::zero(degree as usize, e.n_err());
        for (mono, c) in e.terms() {
            wide.add_assign(&tmsl::poly::TruncatedPolynomial::monomial(
                degree as usize,
                e.n_err(),
                mono.clone(),
                c.clone(),
            ));
        }
        let sq = wide.mul(&wide);
        for (mono, c) in sq.terms() {
            if mono.iter().map(|m| m.1).sum::<u32>() > degree {
                continue;
            }
            // ∂^k of c·w^k is c·k!.
            let fact: u32 = mono.iter().map(|&(_, e)| (1..=e).product::<u32>()).product();
            *h.entry(mono.clone()).or_insert_with(Q::zero) += qv * Q::from_integer(c * BigInt::from(fact));
        }
    }
    h.retain(|_, v| !v.is_zero());
    h
}

pub fn random_machine<R: Rng>(rng: &mut R, n: usize, m: usize) -> MachineSpec {
    let transitions = (0..n * m)
        .map(|_| Transition {
            write: rng.gen_range(0..n),
            next: rng.gen_range(0..m),
            dir: Direction::from_index(rng.gen_range(0..3)).unwrap(),
        })
        .collect();
    MachineSpec::from_table(n, m, rng.gen_range(0..m), transitions).unwrap()
}

/// Reference weight-one tables as printed: `c`/`x` for accept/reject,
/// upper case where the cell is coloured as an error.
pub const REFERENCE_TABLES: [(usize, [&str; 6]); 6] = [
    (3, ["cccccccc", "xxxxxxCx", "cccccccc", "cccccccc", "cccccccc", "xxxxxxxx"]),
    (13, ["cccccccc", "xxxxxxxx", "cccccccc", "xxxxxxCx", "cccccccc", "xxxxxxxx"]),
    (18, ["ccccccXc", "xxxxxxxx", "ccccccXc", "xxxxxxxx", "ccccccXc", "xxxxxxxx"]),
    (23, ["cccccccc", "xCxxxxxx", "cccccccc", "ccCccccc", "cccccccc", "xxxxxCCx"]),
    (24, ["cccccc", "xxxxxx", "cccccc", "ccXcXc", "cccccc", "xxxxxx"]),
    (25, ["cccccc", "xxxxxx", "cccccc", "ccXccc", "cccccc", "xxxxxx"]),
];
