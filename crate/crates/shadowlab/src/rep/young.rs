//! Partitions, standard tableaux and the Young orthogonal form of S_n.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{cr, ComplexMatrix};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Partition(Vec<usize>);

impl Partition {
    pub fn new(mut parts: Vec<usize>) -> Result<Self> {
        parts.retain(|&p| p > 0);
        if parts.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::InvalidArgument(format!("{parts:?} is not non-increasing")));
        }
        Ok(Self(parts))
    }

    pub fn parse(s: &str) -> Result<Self> {
        let parts = s
            .trim_matches(|ch| ch == '[' || ch == ']')
            .split(',')
            .filter(|t| !t.trim().is_empty())
            .map(|t| t.trim().parse::<usize>().map_err(|e| Error::InvalidArgument(format!("{t}: {e}"))))
            .collect::<Result<Vec<_>>>()?;
        Self::new(parts)
    }

    pub fn parts(&self) -> &[usize] {
        &self.0
    }

    pub fn n(&self) -> usize {
        self.0.iter().sum()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    fn column_length(&self, col: usize) -> usize {
        self.0.iter().filter(|&&p| p > col).count()
    }

    /// All partitions of n, in reverse lexicographic order.
    pub fn all(n: usize) -> Vec<Partition> {
        fn rec(n: usize, max: usize, prefix: &mut Vec<usize>, out: &mut Vec<Partition>) {
            if n == 0 {
                out.push(Partition(prefix.clone()));
                return;
            }
            for p in (1..=n.min(max)).rev() {
                prefix.push(p);
                rec(n - p, p, prefix, out);
                prefix.pop();
            }
        }
        let mut out = vec![];
        rec(n, n, &mut vec![], &mut out);
        out
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s: Vec<String> = self.0.iter().map(|p| p.to_string()).collect();
        write!(f, "[{}]", s.join(","))
    }
}

/// Filling of a Young diagram by 1..n, rows and columns increasing.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StandardTableau {
    pub shape: Partition,
    pub rows: Vec<Vec<usize>>,
}

impl StandardTableau {
    pub fn is_standard(&self) -> bool {
        let rows_ok = self.rows.iter().all(|r| r.windows(2).all(|w| w[0] < w[1]));
        let cols_ok = (1..self.rows.len()).all(|i| {
            self.rows[i].iter().enumerate().all(|(j, v)| self.rows[i - 1].get(j).is_some_and(|u| u < v))
        });
        let mut all: Vec<usize> = self.rows.iter().flatten().copied().collect();
        all.sort_unstable();
        rows_ok && cols_ok && all == (1..=self.shape.n()).collect::<Vec<_>>()
    }

    /// (row, column) of entry k, 0-based.
    pub fn position(&self, k: usize) -> (usize, usize) {
        for (i, r) in self.rows.iter().enumerate() {
            if let Some(j) = r.iter().position(|&v| v == k) {
                return (i, j);
            }
        }
        panic!("entry {k} not in tableau");
    }

    pub fn content(&self, k: usize) -> i64 {
        let (r, c) = self.position(k);
        c as i64 - r as i64
    }

    pub fn reading_word(&self) -> Vec<usize> {
        self.rows.iter().flatten().copied().collect()
    }

    fn swapped(&self, i: usize) -> StandardTableau {
        let rows = self
            .rows
            .iter()
            .map(|r| {
                r.iter()
                    .map(|&v| if v == i { i + 1 } else if v == i + 1 { i } else { v })
                    .collect()
            })
            .collect();
        StandardTableau { shape: self.shape.clone(), rows }
    }
}

impl fmt::Display for StandardTableau {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<String> = self
            .rows
            .iter()
            .map(|r| r.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(" "))
            .collect();
        write!(f, "{}", rows.join("/"))
    }
}

pub fn hook_length_dim(shape: &Partition) -> u128 {
    let n = shape.n() as u128;
    let mut num: u128 = (1..=n).product();
    let mut den: u128 = 1;
    for (i, &p) in shape.parts().iter().enumerate() {
        for j in 0..p {
            let arm = p - j - 1;
            let leg = shape.column_length(j) - i - 1;
            den *= (arm + leg + 1) as u128;
            let g = gcd(num, den);
            num /= g;
            den /= g;
        }
    }
    num / den
}

fn gcd(a: u128, b: u128) -> u128 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Standard tableaux sorted by row-reading word.
pub fn standard_tableaux(shape: &Partition) -> Vec<StandardTableau> {
    let n = shape.n();
    let mut out = vec![];
    let mut rows: Vec<Vec<usize>> = vec![vec![]; shape.len()];
    fn rec(k: usize, n: usize, shape: &Partition, rows: &mut Vec<Vec<usize>>, out: &mut Vec<StandardTableau>) {
        if k > n {
            out.push(StandardTableau { shape: shape.clone(), rows: rows.clone() });
            return;
        }
        for i in 0..rows.len() {
            let len = rows[i].len();
            let fits = len < shape.parts()[i] && (i == 0 || rows[i - 1].len() > len);
            if fits {
                rows[i].push(k);
                rec(k + 1, n, shape, rows, out);
                rows[i].pop();
            }
        }
    }
    rec(1, n, shape, &mut rows, &mut out);
    out.sort_by_key(|t| t.reading_word());
    out
}

/// Orthogonal matrix of the adjacent transposition (i, i+1), 1 ≤ i < n.
pub fn sn_irrep_matrix(shape: &Partition, i: usize) -> Result<ComplexMatrix> {
    let tabs = standard_tableaux(shape);
    transposition_matrix(shape, &tabs, i)
}

fn transposition_matrix(shape: &Partition, tabs: &[StandardTableau], i: usize) -> Result<ComplexMatrix> {
    let n = shape.n();
    if i == 0 || i >= n {
        return Err(Error::InvalidArgument(format!("transposition index {i} outside 1..{}", n.saturating_sub(1))));
    }
    let dim = tabs.len();
    let mut m = ComplexMatrix::zeros(dim, dim);
    for (a, t) in tabs.iter().enumerate() {
        let (ri, ci) = t.position(i);
        let (rj, cj) = t.position(i + 1);
        if ri == rj {
            m[(a, a)] = cr(1.0);
        } else if ci == cj {
            m[(a, a)] = cr(-1.0);
        } else {
            let r = (t.content(i + 1) - t.content(i)) as f64;
            let other = t.swapped(i);
            let b = tabs.iter().position(|u| *u == other).expect("swapped tableau is standard");
            m[(a, a)] = cr(1.0 / r);
            m[(b, a)] = cr((1.0 - 1.0 / (r * r)).sqrt());
        }
    }
    Ok(m)
}

/// Permutation as 0-based images: σ(k) = perm[k]. Composition (στ)(k) = σ(τ(k)).
pub fn compose(sigma: &[usize], tau: &[usize]) -> Vec<usize> {
    tau.iter().map(|&k| sigma[k]).collect()
}

pub fn inverse(sigma: &[usize]) -> Vec<usize> {
    let mut inv = vec![0; sigma.len()];
    for (k, &v) in sigma.iter().enumerate() {
        inv[v] = k;
    }
    inv
}

/// Word σ = s_{a1} s_{a2} … s_{ak} in 1-based adjacent transpositions.
pub fn adjacent_word(sigma: &[usize]) -> Vec<usize> {
    let mut s = sigma.to_vec();
    let mut rev = vec![];
    while let Some(i) = (0..s.len().saturating_sub(1)).find(|&i| s[i] > s[i + 1]) {
        s.swap(i, i + 1);
        rev.push(i + 1);
    }
    rev.reverse();
    rev
}

pub fn all_permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = vec![];
    let mut cur: Vec<usize> = (0..n).collect();
    fn heap(k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if k <= 1 {
            out.push(cur.clone());
            return;
        }
        for i in 0..k {
            heap(k - 1, cur, out);
            if k.is_multiple_of(2) {
                cur.swap(i, k - 1);
            } else {
                cur.swap(0, k - 1);
            }
        }
    }
    heap(n, &mut cur, &mut out);
    out.sort();
    out
}

/// Young orthogonal representation of a full symmetric group.
#[derive(Clone, Debug)]
pub struct YoungRep {
    pub shape: Partition,
    pub tableaux: Vec<StandardTableau>,
    generators: Vec<ComplexMatrix>,
}

impl YoungRep {
    pub fn new(shape: &Partition) -> Self {
        let tableaux = standard_tableaux(shape);
        let generators = (1..shape.n())
            .map(|i| transposition_matrix(shape, &tableaux, i).expect("valid index"))
            .collect();
        Self { shape: shape.clone(), tableaux, generators }
    }

    pub fn dim(&self) -> usize {
        self.tableaux.len()
    }

    pub fn transposition(&self, i: usize) -> &ComplexMatrix {
        &self.generators[i - 1]
    }

    pub fn matrix(&self, sigma: &[usize]) -> ComplexMatrix {
        assert_eq!(sigma.len(), self.shape.n(), "permutation size");
        let mut m = ComplexMatrix::identity(self.dim(), self.dim());
        for i in adjacent_word(sigma) {
            m *= &self.generators[i - 1];
        }
        m
    }

    pub fn character(&self, sigma: &[usize]) -> f64 {
        self.matrix(sigma).trace().re
    }
}

pub fn permutation_matrix(sigma: &[usize]) -> ComplexMatrix {
    let n = sigma.len();
    let mut m = ComplexMatrix::zeros(n, n);
    for (k, &v) in sigma.iter().enumerate() {
        m[(v, k)] = cr(1.0);
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::frobenius;

    fn p(v: &[usize]) -> Partition {
        Partition::new(v.to_vec()).unwrap()
    }

    #[test]
    fn hook_dims() {
        assert_eq!(hook_length_dim(&p(&[6])), 1);
        for n in 4..9 {
            assert_eq!(hook_length_dim(&p(&[n - 2, 2])), (n * (n - 3) / 2) as u128);
        }
        assert_eq!(hook_length_dim(&p(&[3, 1, 1])), 6);
        assert!(Partition::new(vec![1, 2]).is_err());
    }

    #[test]
    fn tableaux_for_311() {
        let tabs = standard_tableaux(&p(&[3, 1, 1]));
        let words: Vec<String> = tabs.iter().map(|t| t.to_string()).collect();
        assert_eq!(words, vec!["1 2 3/4/5", "1 2 4/3/5", "1 2 5/3/4", "1 3 4/2/5", "1 3 5/2/4", "1 4 5/2/3"]);
        assert!(tabs.iter().all(|t| t.is_standard()));
        assert_eq!(standard_tableaux(&p(&[4])).len(), 1);
    }

    #[test]
    fn counts_match_hook_formula() {
        for n in 1..=8 {
            for lam in Partition::all(n) {
                assert_eq!(standard_tableaux(&lam).len() as u128, hook_length_dim(&lam), "{lam}");
            }
        }
    }

    #[test]
    fn s3_examples() {
        let lam = p(&[2, 1]);
        let m = sn_irrep_matrix(&lam, 1).unwrap();
        let tabs = standard_tableaux(&lam);
        let row = tabs.iter().position(|t| t.rows[0] == vec![1, 2]).unwrap();
        let col = tabs.iter().position(|t| t.rows[0] == vec![1, 3]).unwrap();
        assert_eq!(m[(row, row)], cr(1.0));
        assert_eq!(m[(col, col)], cr(-1.0));
        assert!(sn_irrep_matrix(&lam, 3).is_err());
        assert!(sn_irrep_matrix(&lam, 0).is_err());
    }

    #[test]
    fn coxeter_relations() {
        for lam in [p(&[3, 1, 1]), p(&[2, 2, 1]), p(&[3, 2]), p(&[4, 2, 1])] {
            let rep = YoungRep::new(&lam);
            let d = rep.dim();
            let id = ComplexMatrix::identity(d, d);
            for i in 1..lam.n() {
                let s = rep.transposition(i);
                assert!(frobenius(&(s * s - &id)) < 1e-12);
                if i + 1 < lam.n() {
                    let t = rep.transposition(i + 1);
                    assert!(frobenius(&(s * t * s - t * s * t)) < 1e-12);
                }
            }
        }
    }

    #[test]
    fn word_reproduces_permutation() {
        for sigma in all_permutations(5) {
            let mut m = permutation_matrix(&(0..5).collect::<Vec<_>>());
            for i in adjacent_word(&sigma) {
                let mut s: Vec<usize> = (0..5).collect();
                s.swap(i - 1, i);
                m *= permutation_matrix(&s);
            }
            assert_eq!(m, permutation_matrix(&sigma));
        }
        assert_eq!(all_permutations(4).len(), 24);
    }

    #[test]
    fn young_rep_is_homomorphism() {
        let rep = YoungRep::new(&p(&[3, 1, 1]));
        let perms = all_permutations(5);
        for (k, a) in perms.iter().enumerate().step_by(7) {
            let b = &perms[(k * 31 + 11) % perms.len()];
            let lhs = rep.matrix(&compose(a, b));
            let rhs = rep.matrix(a) * rep.matrix(b);
            assert!(crate::linalg::frobenius(&(lhs - rhs)) < 1e-10);
        }
        assert!((rep.character(&perms[0]) - 6.0).abs() < 1e-12);
    }
}
