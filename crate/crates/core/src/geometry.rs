//! Local geometry of `H` at a classical solution from syndrome counts.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{q, q_string, Matrix, UPoly, Q};
use crate::machine::MachineSpec;
use crate::newton::{error_correction_bound, newton_bound, NewtonSummary};
use crate::noisy::LocalChart;
use crate::propagate::{weight, InputCounts, MultiIndex, SyndromeCounts};

fn factorial(n: u32) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, i| acc * i)
}

fn falling(n: u32, k: u32) -> BigInt {
    (n - k + 1..=n).fold(BigInt::one(), |acc, i| acc * i)
}

fn binomial(n: u32, k: u32) -> BigInt {
    falling(n, k) / factorial(k)
}

/// `S^k_s` for per-block multi-indices `k^i`, `s^i` and read counts `n_i`.
/// Zero when `s ≰ k` or some block has `|k^i| > n_i`.
pub fn s_coefficient(k: &[Vec<u32>], s: &[Vec<u32>], n: &[u32]) -> BigInt {
    let mut out = BigInt::one();
    for ((ki, si), &ni) in k.iter().zip(s).zip(n) {
        let kt: u32 = ki.iter().sum();
        let st: u32 = si.iter().sum();
        if kt > ni || ki.iter().zip(si).any(|(a, b)| b > a) {
            return BigInt::zero();
        }
        if (kt - st) % 2 == 1 {
            out = -out;
        }
        out *= falling(ni - st, kt - st);
        for (&a, &b) in ki.iter().zip(si) {
            out *= falling(a, b);
        }
    }
    out
}

/// Splits a chart multi-index into per-block vectors over each block's
/// alternatives.
pub fn split_by_block(chart: &LocalChart, k: &[(u32, u32)]) -> Vec<Vec<u32>> {
    let mut out: Vec<Vec<u32>> = (0..chart.block_count()).map(|b| vec![0; chart.block_coords(b).len()]).collect();
    for &(c, e) in k {
        let b = chart.block_of_coord(c as usize);
        let pos = chart.block_coords(b).iter().position(|&x| x == c as usize).expect("coordinate in block");
        out[b][pos] += e;
    }
    out
}

/// All `s ≤ k` as sparse multi-indices, the zero index first.
pub fn sub_indices(k: &[(u32, u32)]) -> Vec<MultiIndex> {
    let mut out: Vec<MultiIndex> = vec![Vec::new()];
    for &(c, e) in k {
        let mut next = Vec::with_capacity(out.len() * (e as usize + 1));
        for s in &out {
            for j in 0..=e {
                let mut t = s.clone();
                if j > 0 {
                    t.push((c, j));
                }
                next.push(t);
            }
        }
        out = next;
    }
    out
}

/// Influence `g_k(x) = Σ_{0≠s≤k} S^k_s A^s(x)`.
pub fn influence(ic: &InputCounts, k: &[(u32, u32)], counts: &SyndromeCounts) -> Result<BigInt> {
    if weight(k) > counts.k_max {
        return Err(Error::Budget { requested: weight(k), k_max: counts.k_max });
    }
    let kb = split_by_block(&counts.chart, k);
    let mut g = BigInt::zero();
    for s in sub_indices(k).into_iter().skip(1) {
        let a = ic.a_s(&s)?;
        if a.is_zero() {
            continue;
        }
        g += s_coefficient(&kb, &split_by_block(&counts.chart, &s), &counts.block_reads) * a;
    }
    Ok(g)
}

fn validate_q(qx: &[Q], n: usize) -> Result<()> {
    if qx.len() != n || qx.iter().any(|v| !v.is_positive()) || qx.iter().sum::<Q>() != Q::one() {
        return Err(Error::InvalidDistribution("input distribution must be positive and sum to 1".into()));
    }
    Ok(())
}

/// `∂^k H` at the classical solution, as a sum over splits `i + j = k`.
pub fn h_taylor(k: &[(u32, u32)], qx: &[Q], counts: &SyndromeCounts) -> Result<Q> {
    validate_q(qx, counts.inputs.len())?;
    let total = weight(k);
    if total == 0 {
        return Ok(Q::zero());
    }
    if total - 1 > counts.k_max {
        return Err(Error::Budget { requested: total - 1, k_max: counts.k_max });
    }
    let mut out = Q::zero();
    for i in sub_indices(k) {
        let wi = weight(&i);
        if wi == 0 || wi == total {
            continue;
        }
        let j: MultiIndex = k
            .iter()
            .filter_map(|&(c, e)| {
                let ei = i.iter().find(|(ci, _)| *ci == c).map_or(0, |x| x.1);
                (e > ei).then_some((c, e - ei))
            })
            .collect();
        let c: BigInt =
            k.iter().map(|&(cc, e)| binomial(e, i.iter().find(|(ci, _)| *ci == cc).map_or(0, |x| x.1))).product();
        let mut ex = Q::zero();
        for (ic, qv) in counts.inputs.iter().zip(qx) {
            let gi = influence(ic, &i, counts)?;
            if gi.is_zero() {
                continue;
            }
            let gj = influence(ic, &j, counts)?;
            ex += qv * Q::from_integer(gi * gj);
        }
        out += Q::from_integer(c) * ex;
    }
    Ok(out)
}

/// Weight-one influence matrix `P`: rows inputs, columns chart coordinates.
pub fn p_matrix(counts: &SyndromeCounts) -> Result<Matrix> {
    let rows: Vec<Vec<Q>> =
        counts.weight_one_matrix()?.into_iter().map(|r| r.into_iter().map(Q::from_integer).collect()).collect();
    Ok(Matrix::from_rows(&rows))
}

/// `2 Pᵀ Q P`.
pub fn hessian(p: &Matrix, qx: &[Q]) -> Result<Matrix> {
    validate_q(qx, p.rows)?;
    let mut qp = p.clone();
    for (i, w) in qx.iter().enumerate() {
        for j in 0..p.cols {
            let v = p.get(i, j) * w * q(2);
            qp.set(i, j, v);
        }
    }
    Ok(p.transpose().mul(&qp))
}

/// Coordinates whose Hessian row is not identically zero.
pub fn nonzero_coordinates(h: &Matrix) -> Vec<usize> {
    (0..h.rows).filter(|&i| h.row(i).iter().any(|v| !v.is_zero())).collect()
}

/// Largest `C ≤ c_max` such that no syndrome of weight `1..=C` changes any
/// output on the inputs.
pub const MAX_CORRECTION_ORDER: usize = 3;

pub fn error_correction_order(spec: &MachineSpec, inputs: &[Vec<usize>], t: usize, c_max: usize) -> Result<usize> {
    if c_max > MAX_CORRECTION_ORDER {
        return Err(Error::ResourceGuard(format!("C_max {c_max} above {MAX_CORRECTION_ORDER}")));
    }
    if c_max == 0 {
        return Ok(0);
    }
    let counts = SyndromeCounts::compute(spec, inputs, t, c_max)?;
    Ok(correction_order_of(&counts))
}

pub fn correction_order_of(counts: &SyndromeCounts) -> usize {
    let mut min_deg = counts.k_max + 1;
    for ic in &counts.inputs {
        for (tau, f) in ic.f.iter().enumerate() {
            if tau == ic.target {
                continue;
            }
            for (mono, c) in f.terms() {
                let d = weight(&f.error_part(mono));
                if d > 0 && !c.is_zero() {
                    min_deg = min_deg.min(d);
                }
            }
        }
    }
    min_deg - 1
}

#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
pub struct BlockReport {
    /// Connected components of the nonzero pattern among coordinates with a
    /// nonzero row. Zero based; `geometry_report` shifts to one based.
    pub components: Vec<Vec<usize>>,
    /// Coordinates whose row and column vanish.
    pub zero_coordinates: Vec<usize>,
    /// For a given partition: pairs of parts whose off-diagonal block is zero.
    pub zero_blocks: Vec<(usize, usize)>,
    pub nonzero_blocks: Vec<(usize, usize)>,
}

pub fn block_structure(h: &Matrix, partition: Option<&[Vec<usize>]>) -> BlockReport {
    let n = h.rows;
    let nz = nonzero_coordinates(h);
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while p[r] != r {
            r = p[r];
        }
        let mut y = x;
        while p[y] != r {
            let next = p[y];
            p[y] = r;
            y = next;
        }
        r
    }
    for i in 0..n {
        for j in 0..i {
            if !h.get(i, j).is_zero() {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
    }
    let mut comps: std::collections::BTreeMap<usize, Vec<usize>> = std::collections::BTreeMap::new();
    for &i in &nz {
        let r = find(&mut parent, i);
        comps.entry(r).or_default().push(i);
    }
    let zero_coordinates = (0..n).filter(|i| !nz.contains(i)).collect();
    let mut zero_blocks = Vec::new();
    let mut nonzero_blocks = Vec::new();
    if let Some(parts) = partition {
        for a in 0..parts.len() {
            for b in a + 1..parts.len() {
                let zero = parts[a].iter().all(|&i| parts[b].iter().all(|&j| h.get(i, j).is_zero()));
                if zero {
                    zero_blocks.push((a, b));
                } else {
                    nonzero_blocks.push((a, b));
                }
            }
        }
    }
    BlockReport { components: comps.into_values().collect(), zero_coordinates, zero_blocks, nonzero_blocks }
}

/// Support of the Taylor series of `H` up to degree two, read off the
/// Hessian (first derivatives vanish at a classical solution).
pub fn degree_two_support(h: &Matrix) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    for i in 0..h.rows {
        for j in 0..=i {
            if !h.get(i, j).is_zero() {
                let mut k = vec![0; h.rows];
                k[i] += 1;
                k[j] += 1;
                out.push(k);
            }
        }
    }
    out
}

#[derive(Clone, Debug, Serialize)]
pub struct Factorisation {
    pub zero_multiplicity: usize,
    /// Nonzero rational roots with multiplicities.
    pub rational_roots: Vec<(String, usize)>,
    /// Remaining factor as primitive integer coefficients, highest degree first.
    pub remaining: Vec<String>,
}

pub fn factorise(p: &UPoly) -> Factorisation {
    let (roots, rest) = p.rational_roots();
    let zero_multiplicity = roots.iter().find(|(r, _)| r.is_zero()).map_or(0, |r| r.1);
    Factorisation {
        zero_multiplicity,
        rational_roots: roots.iter().filter(|(r, _)| !r.is_zero()).map(|(r, m)| (q_string(r), *m)).collect(),
        remaining: rest.integer_coefficients().iter().rev().map(|c| c.to_string()).collect(),
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Spectrum {
    /// Characteristic polynomial coefficients, highest degree first.
    pub charpoly: Vec<String>,
    pub factorisation: Factorisation,
    /// Distinct real eigenvalues, ascending.
    pub eigenvalues: Vec<f64>,
}

pub fn spectrum(m: &Matrix) -> Spectrum {
    let p = m.charpoly();
    Spectrum {
        charpoly: p.coeffs.iter().rev().map(q_string).collect(),
        factorisation: factorise(&p),
        eigenvalues: p.real_roots_f64(),
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct GeometryReport {
    pub schema: String,
    pub machine: String,
    pub t: usize,
    pub k_max: usize,
    pub dimension: usize,
    pub inputs: Vec<String>,
    pub input_distribution: Vec<String>,
    pub coordinate_labels: Vec<String>,
    pub block_reads: Vec<u32>,
    /// Weight-one influence matrix `P`.
    pub p_matrix: Vec<Vec<String>>,
    pub hessian: Vec<Vec<String>>,
    pub symmetric: bool,
    pub positive_semidefinite: bool,
    pub rank: usize,
    pub rank_p: usize,
    /// Coordinates (1-based) with a nonzero Hessian row.
    pub nonzero_block: Vec<usize>,
    /// Spectrum of the nonzero Hessian block.
    pub hessian_block: Spectrum,
    /// Spectrum of the same block of `PᵀP`.
    pub gram_block: Spectrum,
    /// Kernel of the nonzero Hessian block in chart coordinates (1-based keys).
    pub kernel_block: Vec<Vec<(usize, String)>>,
    pub kernel_dimension: usize,
    pub error_correction_order: usize,
    pub certified_bound: NewtonSummary,
    /// Newton distance from the support up to `support_degree`; only a
    /// lower estimate of `1/l(M)` since further support can only add points.
    pub support_degree: usize,
    pub support_size: usize,
    pub partial_newton: NewtonSummary,
    pub blocks: BlockReport,
}

pub const REPORT_SCHEMA: &str = "tmsl.geometry/1";

fn sparse_vec(v: &[Q]) -> Vec<(usize, String)> {
    v.iter().enumerate().filter(|(_, x)| !x.is_zero()).map(|(i, x)| (i + 1, q_string(x))).collect()
}

pub fn geometry_report(spec: &MachineSpec, name: &str, counts: &SyndromeCounts, qx: &[Q]) -> Result<GeometryReport> {
    let chart = &counts.chart;
    let d = chart.dim();
    let p = p_matrix(counts)?;
    let h = hessian(&p, qx)?;
    let nz = nonzero_coordinates(&h);
    let block = h.submatrix(&nz);
    let gram = p.transpose().mul(&p).submatrix(&nz);
    let hessian_block = spectrum(&block);
    let negative =
        block.charpoly().real_root_intervals(&Q::new(1.into(), 1024.into())).iter().any(|(_, hi)| hi.is_negative());
    let kernel_block: Vec<Vec<(usize, String)>> = block
        .kernel()
        .iter()
        .map(|v| {
            let mut full = vec![Q::zero(); d];
            for (a, &i) in nz.iter().enumerate() {
                full[i] = v[a].clone();
            }
            sparse_vec(&full)
        })
        .collect();
    let c = correction_order_of(counts);
    let certified = error_correction_bound(d, c)?;
    let support = degree_two_support(&h);
    let partial = if support.is_empty() {
        NewtonSummary { l: "none".into(), bound: "none".into() }
    } else {
        newton_bound(&support, d)?.summary()
    };
    let rank = h.rank();
    Ok(GeometryReport {
        schema: REPORT_SCHEMA.into(),
        machine: name.into(),
        t: counts.t,
        k_max: counts.k_max,
        dimension: d,
        inputs: counts.inputs.iter().map(|ic| spec.format_input(&ic.x)).collect(),
        input_distribution: qx.iter().map(q_string).collect(),
        coordinate_labels: (0..d).map(|k| chart.label(k)).collect(),
        block_reads: counts.block_reads.clone(),
        p_matrix: (0..p.rows).map(|i| p.row(i).iter().map(q_string).collect()).collect(),
        hessian: (0..h.rows).map(|i| h.row(i).iter().map(q_string).collect()).collect(),
        symmetric: h.is_symmetric(),
        positive_semidefinite: !negative,
        rank,
        rank_p: p.rank(),
        nonzero_block: nz.iter().map(|i| i + 1).collect(),
        hessian_block,
        gram_block: spectrum(&gram),
        kernel_dimension: d - rank,
        kernel_block,
        error_correction_order: c,
        certified_bound: certified.summary(),
        support_degree: 2,
        support_size: support.len(),
        partial_newton: partial,
        blocks: one_based(block_structure(&h, None)),
    })
}

fn one_based(mut b: BlockReport) -> BlockReport {
    for c in &mut b.components {
        c.iter_mut().for_each(|i| *i += 1);
    }
    b.zero_coordinates.iter_mut().for_each(|i| *i += 1);
    b
}

impl GeometryReport {
    pub fn to_text(&self) -> String {
        use std::fmt::Write as _;
        let mut s = String::new();
        let _ = writeln!(s, "machine {}  t={}  k_max={}  d={}", self.machine, self.t, self.k_max, self.dimension);
        let _ = writeln!(s, "inputs {}", self.inputs.join(" "));
        let _ = writeln!(s, "\nweight-one influence (nonzero columns)");
        for &k in &self.nonzero_block {
            let col: Vec<&str> = self.p_matrix.iter().map(|r| r[k - 1].as_str()).collect();
            let _ = writeln!(s, "  {:<40} {}", self.coordinate_labels[k - 1], col.join(" "));
        }
        let _ = writeln!(
            s,
            "\nHessian rank {} (rank P {}), symmetric {}, psd {}",
            self.rank, self.rank_p, self.symmetric, self.positive_semidefinite
        );
        let _ = writeln!(s, "nonzero block on coordinates {:?}", self.nonzero_block);
        for (name, sp) in [("Hessian block", &self.hessian_block), ("P^T P block", &self.gram_block)] {
            let _ = writeln!(s, "{name}: charpoly [{}]", sp.charpoly.join(", "));
            let f = &sp.factorisation;
            let linear: String = f
                .rational_roots
                .iter()
                .map(|(r, m)| if *m == 1 { format!(" (lambda - {r})") } else { format!(" (lambda - {r})^{m}") })
                .collect();
            let _ = writeln!(s, "  = lambda^{}{linear} * [{}]", f.zero_multiplicity, f.remaining.join(", "));
            let ev: Vec<String> = sp.eigenvalues.iter().map(|v| format!("{v:.4}")).collect();
            let _ = writeln!(s, "  eigenvalues {}", ev.join(" "));
        }
        let _ = writeln!(s, "kernel of the nonzero block:");
        for v in &self.kernel_block {
            let terms: Vec<String> = v.iter().map(|(k, c)| format!("{c}*e{k}")).collect();
            let _ = writeln!(s, "  {}", terms.join(" + "));
        }
        let _ = writeln!(s, "kernel dimension {} of {}", self.kernel_dimension, self.dimension);
        let _ = writeln!(s, "\nerror-correction order C = {}", self.error_correction_order);
        let _ = writeln!(s, "certified bound d/(2(C+1)) = {}", self.certified_bound.bound);
        let _ = writeln!(
            s,
            "Newton distance from degree <= {} support ({} points): l = {}, 1/l = {} (lower estimate)",
            self.support_degree, self.support_size, self.partial_newton.l, self.partial_newton.bound
        );
        let _ = writeln!(s, "\ncomponents {:?}", self.blocks.components);
        let _ = writeln!(s, "zero coordinates {}", self.blocks.zero_coordinates.len());
        s
    }
}

pub fn uniform(n: usize) -> Vec<Q> {
    vec![BigRational::new(1.into(), BigInt::from(n)); n]
}

pub fn to_f64(v: &Q) -> f64 {
    v.to_f64().unwrap_or(f64::NAN)
}
