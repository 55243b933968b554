//! Exact rational matrices and univariate polynomials.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub type Q = BigRational;

pub fn q(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Matrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<Q>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, data: vec![Q::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, Q::one());
        }
        m
    }

    pub fn from_rows(rows: &[Vec<Q>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        let mut m = Self::zeros(r, c);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), c, "ragged matrix");
            for (j, v) in row.iter().enumerate() {
                m.set(i, j, v.clone());
            }
        }
        m
    }

    pub fn from_i64(rows: &[Vec<i64>]) -> Self {
        Self::from_rows(&rows.iter().map(|r| r.iter().map(|&v| q(v)).collect()).collect::<Vec<_>>())
    }

    pub fn get(&self, i: usize, j: usize) -> &Q {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Q) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[Q] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j).clone());
            }
        }
        t
    }

    pub fn mul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.rows);
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = other.get(k, j);
                    if !b.is_zero() {
                        let v = out.get(i, j) + a * b;
                        out.set(i, j, v);
                    }
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[Q]) -> Vec<Q> {
        (0..self.rows).map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum()).collect()
    }

    pub fn scale(&self, c: &Q) -> Matrix {
        Matrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|v| v * c).collect() }
    }

    pub fn is_symmetric(&self) -> bool {
        self.rows == self.cols && (0..self.rows).all(|i| (0..i).all(|j| self.get(i, j) == self.get(j, i)))
    }

    pub fn submatrix(&self, idx: &[usize]) -> Matrix {
        let mut m = Self::zeros(idx.len(), idx.len());
        for (a, &i) in idx.iter().enumerate() {
            for (b, &j) in idx.iter().enumerate() {
                m.set(a, b, self.get(i, j).clone());
            }
        }
        m
    }

    pub fn trace(&self) -> Q {
        (0..self.rows.min(self.cols)).map(|i| self.get(i, i).clone()).sum()
    }

    /// Reduced row echelon form and pivot columns.
    pub fn rref(&self) -> (Matrix, Vec<usize>) {
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..m.cols {
            if r == m.rows {
                break;
            }
            let Some(p) = (r..m.rows).find(|&i| !m.get(i, c).is_zero()) else {
                continue;
            };
            if p != r {
                for j in 0..m.cols {
                    m.data.swap(p * m.cols + j, r * m.cols + j);
                }
            }
            let inv = m.get(r, c).recip();
            for j in 0..m.cols {
                let v = m.get(r, j) * &inv;
                m.set(r, j, v);
            }
            for i in 0..m.rows {
                if i != r && !m.get(i, c).is_zero() {
                    let f = m.get(i, c).clone();
                    for j in 0..m.cols {
                        let v = m.get(i, j) - &f * m.get(r, j);
                        m.set(i, j, v);
                    }
                }
            }
            pivots.push(c);
            r += 1;
        }
        (m, pivots)
    }

    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }

    /// Null-space basis read off the RREF: one vector per free column, with
    /// a one in that column.
    pub fn kernel(&self) -> Vec<Vec<Q>> {
        let (r, pivots) = self.rref();
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        free.iter()
            .map(|&f| {
                let mut v = vec![Q::zero(); self.cols];
                v[f] = Q::one();
                for (row, &p) in pivots.iter().enumerate() {
                    v[p] = -r.get(row, f).clone();
                }
                v
            })
            .collect()
    }

    /// Characteristic polynomial `det(λI - A)` by Faddeev–LeVerrier.
    pub fn charpoly(&self) -> UPoly {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let mut coeffs = vec![Q::zero(); n + 1];
        coeffs[n] = Q::one();
        let mut m = Matrix::zeros(n, n);
        let mut c_prev = Q::one();
        for k in 1..=n {
            // M_k = A M_{k-1} + c_{n-k+1} I
            let mut next = self.mul(&m);
            for i in 0..n {
                let v = next.get(i, i) + &c_prev;
                next.set(i, i, v);
            }
            m = next;
            let c = -(self.mul(&m).trace()) / q(k as i64);
            coeffs[n - k] = c.clone();
            c_prev = c;
        }
        UPoly::new(coeffs)
    }

    pub fn to_f64(&self) -> Vec<Vec<f64>> {
        (0..self.rows).map(|i| self.row(i).iter().map(|v| v.to_f64().unwrap_or(f64::NAN)).collect()).collect()
    }
}

/// Dense univariate polynomial, coefficients from the constant term up.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UPoly {
    pub coeffs: Vec<Q>,
}

impl UPoly {
    pub fn new(mut coeffs: Vec<Q>) -> Self {
        while coeffs.len() > 1 && coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(Q::zero());
        }
        UPoly { coeffs }
    }

    pub fn from_i64(c: &[i64]) -> Self {
        Self::new(c.iter().map(|&v| q(v)).collect())
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.len() == 1 && self.coeffs[0].is_zero()
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn lead(&self) -> &Q {
        self.coeffs.last().expect("nonempty")
    }

    pub fn eval(&self, x: &Q) -> Q {
        let mut acc = Q::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    pub fn derivative(&self) -> UPoly {
        if self.coeffs.len() == 1 {
            return UPoly::new(vec![Q::zero()]);
        }
        UPoly::new(self.coeffs.iter().enumerate().skip(1).map(|(i, c)| c * q(i as i64)).collect())
    }

    pub fn mul(&self, other: &UPoly) -> UPoly {
        let mut out = vec![Q::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        UPoly::new(out)
    }

    pub fn div_rem(&self, d: &UPoly) -> (UPoly, UPoly) {
        assert!(!d.is_zero(), "division by zero polynomial");
        let mut r = self.coeffs.clone();
        let dd = d.degree();
        if self.degree() < dd {
            return (UPoly::new(vec![Q::zero()]), self.clone());
        }
        let mut quo = vec![Q::zero(); self.degree() - dd + 1];
        for i in (0..quo.len()).rev() {
            let c = &r[i + dd] / d.lead();
            if !c.is_zero() {
                for (j, dc) in d.coeffs.iter().enumerate() {
                    r[i + j] -= &c * dc;
                }
            }
            quo[i] = c;
        }
        r.truncate(dd.max(1));
        (UPoly::new(quo), UPoly::new(r))
    }

    pub fn monic(&self) -> UPoly {
        let l = self.lead().clone();
        UPoly::new(self.coeffs.iter().map(|c| c / &l).collect())
    }

    pub fn gcd(&self, other: &UPoly) -> UPoly {
        let (mut a, mut b) = (self.clone(), other.clone());
        while !b.is_zero() {
            let r = a.div_rem(&b).1;
            a = b;
            b = r;
        }
        if a.is_zero() {
            a
        } else {
            a.monic()
        }
    }

    /// Largest power of `λ` dividing the polynomial, and the cofactor.
    pub fn split_zero_roots(&self) -> (usize, UPoly) {
        let k = self.coeffs.iter().take_while(|c| c.is_zero()).count().min(self.degree());
        (k, UPoly::new(self.coeffs[k..].to_vec()))
    }

    /// Rational roots with multiplicity, by the rational root test.
    pub fn rational_roots(&self) -> (Vec<(Q, usize)>, UPoly) {
        let (k, mut rest) = self.split_zero_roots();
        let mut roots = Vec::new();
        if k > 0 {
            roots.push((Q::zero(), k));
        }
        loop {
            let ints = rest.integer_coefficients();
            let a0 = ints[0].abs();
            let an = ints.last().expect("nonempty").abs();
            if rest.degree() == 0 || a0.is_zero() {
                break;
            }
            let mut found = None;
            'search: for p in divisors(&a0) {
                for qd in divisors(&an) {
                    for sign in [1i64, -1] {
                        let cand = Q::new(p.clone() * sign, qd.clone());
                        if rest.eval(&cand).is_zero() {
                            found = Some(cand);
                            break 'search;
                        }
                    }
                }
            }
            let Some(r) = found else { break };
            let lin = UPoly::new(vec![-r.clone(), Q::one()]);
            let mut mult = 0;
            while rest.degree() > 0 && rest.eval(&r).is_zero() {
                rest = rest.div_rem(&lin).0;
                mult += 1;
            }
            roots.push((r, mult));
        }
        (roots, rest)
    }

    /// Primitive integer multiple of the polynomial with positive leading term.
    pub fn integer_coefficients(&self) -> Vec<BigInt> {
        let l = self.coeffs.iter().fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
        let ints: Vec<BigInt> = self.coeffs.iter().map(|c| (c * Q::from_integer(l.clone())).to_integer()).collect();
        let g = ints.iter().fold(BigInt::zero(), |acc, c| acc.gcd(c));
        let g = if g.is_zero() { BigInt::one() } else { g };
        let sign = if ints.last().is_some_and(|c| c.is_negative()) { -BigInt::one() } else { BigInt::one() };
        ints.into_iter().map(|c| c * &sign / &g).collect()
    }

    fn sturm_sequence(&self) -> Vec<UPoly> {
        let mut seq = vec![self.clone(), self.derivative()];
        while !seq.last().expect("nonempty").is_zero() && seq.last().expect("nonempty").degree() > 0 {
            let n = seq.len();
            let r = seq[n - 2].div_rem(&seq[n - 1]).1;
            if r.is_zero() {
                break;
            }
            seq.push(UPoly::new(r.coeffs.iter().map(|c| -c.clone()).collect()));
        }
        seq
    }

    /// Distinct real roots isolated to intervals of width at most `tol`,
    /// each interval `(lo, hi]` holding exactly one root.
    pub fn real_root_intervals(&self, tol: &Q) -> Vec<(Q, Q)> {
        if self.degree() == 0 {
            return Vec::new();
        }
        let sf = self.div_rem(&self.gcd(&self.derivative())).0;
        let seq = sf.sturm_sequence();
        let changes = |x: &Q| -> usize {
            let signs: Vec<i8> = seq
                .iter()
                .map(|p| {
                    let v = p.eval(x);
                    if v.is_positive() {
                        1
                    } else if v.is_negative() {
                        -1
                    } else {
                        0
                    }
                })
                .filter(|&s| s != 0)
                .collect();
            signs.windows(2).filter(|w| w[0] != w[1]).count()
        };
        // Cauchy bound.
        let lead = sf.lead().abs();
        let bound =
            Q::one() + sf.coeffs.iter().map(|c| c.abs() / &lead).fold(Q::zero(), |a, b| if b > a { b } else { a });
        let mut out = Vec::new();
        let mut stack = vec![(-bound.clone(), bound)];
        while let Some((lo, hi)) = stack.pop() {
            let n = changes(&lo) - changes(&hi);
            if n == 0 {
                continue;
            }
            if n == 1 && &hi - &lo <= *tol {
                out.push((lo, hi));
                continue;
            }
            let mid = (&lo + &hi) / q(2);
            stack.push((mid.clone(), hi));
            stack.push((lo, mid));
        }
        out.sort();
        out
    }

    /// Real roots as floats: rational roots exactly, others as interval
    /// midpoints.
    pub fn real_roots_f64(&self) -> Vec<f64> {
        let tol = Q::new(BigInt::one(), BigInt::from(1u64) << 48);
        let (exact, _) = self.rational_roots();
        self.real_root_intervals(&tol)
            .iter()
            .map(|(lo, hi)| {
                let r = exact.iter().map(|(r, _)| r).find(|r| *r >= lo && *r <= hi).cloned();
                r.unwrap_or_else(|| (lo + hi) / q(2)).to_f64().unwrap_or(f64::NAN)
            })
            .collect()
    }
}

fn divisors(n: &BigInt) -> Vec<BigInt> {
    let n = n.abs();
    if n.is_zero() {
        return vec![BigInt::one()];
    }
    let small = n.to_u64().filter(|&v| v <= 1_000_000_000_000);
    let Some(v) = small else {
        return vec![BigInt::one()];
    };
    let mut out = Vec::new();
    let mut i = 1u64;
    while i * i <= v {
        if v % i == 0 {
            out.push(BigInt::from(i));
            if i * i != v {
                out.push(BigInt::from(v / i));
            }
        }
        i += 1;
    }
    out.sort();
    out
}

pub fn q_string(v: &Q) -> String {
    if v.is_integer() {
        v.numer().to_string()
    } else {
        format!("{}/{}", v.numer(), v.denom())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn charpoly_of_small_matrix() {
        let a = Matrix::from_i64(&[vec![2, 1], vec![1, 2]]);
        assert_eq!(a.charpoly(), UPoly::from_i64(&[3, -4, 1]));
    }

    #[test]
    fn kernel_vectors_are_annihilated() {
        let a = Matrix::from_i64(&[vec![1, 2, 3], vec![2, 4, 6], vec![1, 0, 1]]);
        let k = a.kernel();
        assert_eq!(k.len(), 1);
        assert!(a.mul_vec(&k[0]).iter().all(|v| v.is_zero()));
        assert_eq!(a.rank(), 2);
    }

    #[test]
    fn roots_of_a_cubic() {
        let p = UPoly::from_i64(&[-6, 11, -6, 1]);
        let r = p.real_roots_f64();
        assert_eq!(r.len(), 3);
        for (got, want) in r.iter().zip([1.0, 2.0, 3.0]) {
            assert!((got - want).abs() < 1e-9);
        }
        let (roots, rest) = p.rational_roots();
        assert_eq!(roots.len(), 3);
        assert_eq!(rest.degree(), 0);
    }

    #[test]
    fn repeated_roots_are_counted_once() {
        // (x-1)^2 (x+2)
        let p = UPoly::from_i64(&[2, -3, 0, 1]);
        assert_eq!(p.real_roots_f64().len(), 2);
        let (roots, _) = p.rational_roots();
        assert!(roots.contains(&(q(1), 2)));
    }
}
