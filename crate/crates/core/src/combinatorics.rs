//! Exact enumeration and counting: set partitions, compositions, labeled
//! trees, and the forest-counting formulas, all in arbitrary-precision
//! arithmetic.

use std::collections::HashMap;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};

/// Binomial coefficient.
pub fn binomial(n: usize, k: usize) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let mut acc = BigUint::one();
    for i in 0..k.min(n - k) {
        acc = acc * BigUint::from(n - i) / BigUint::from(i + 1);
    }
    acc
}

pub fn factorial(n: usize) -> BigUint {
    (1..=n).map(BigUint::from).product()
}

/// Integer power with a possibly negative exponent, as an exact rational.
/// Requires a nonzero base for negative exponents; `0^0 = 1`.
fn rat_pow(base: i64, exp: i64) -> Result<BigRational> {
    let b = BigRational::from(BigInt::from(base));
    if exp >= 0 {
        let mut acc = BigRational::one();
        for _ in 0..exp {
            acc *= &b;
        }
        Ok(acc)
    } else {
        if base == 0 {
            return Err(Error::Domain("zero base with negative exponent".into()));
        }
        let mut acc = BigRational::one();
        for _ in 0..(-exp) {
            acc /= &b;
        }
        Ok(acc)
    }
}

fn upow(base: usize, exp: usize) -> BigUint {
    num_traits::pow(BigUint::from(base), exp)
}

/// A partition of `{0, ..., r-1}` into nonempty blocks, ordered by each
/// block's smallest element.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SetPartition {
    pub blocks: Vec<Vec<usize>>,
}

/// All partitions of `{0..r-1}` into exactly `k` blocks, in
/// restricted-growth-string order. `k > r` gives an empty list.
pub fn partitions(r: usize, k: usize) -> Vec<SetPartition> {
    all_partitions(r).into_iter().filter(|p| p.blocks.len() == k).collect()
}

/// All partitions of `{0..r-1}`, in restricted-growth-string order.
pub fn all_partitions(r: usize) -> Vec<SetPartition> {
    if r == 0 {
        return Vec::new();
    }
    let mut out = Vec::new();
    let mut rgs = vec![0usize; r];
    loop {
        let nblocks = rgs.iter().max().unwrap() + 1;
        let mut blocks = vec![Vec::new(); nblocks];
        for (i, &b) in rgs.iter().enumerate() {
            blocks[b].push(i);
        }
        out.push(SetPartition { blocks });
        // next restricted growth string
        let mut i = r;
        loop {
            if i == 1 {
                return out;
            }
            i -= 1;
            let cap = 1 + *rgs[..i].iter().max().unwrap();
            if rgs[i] < cap {
                rgs[i] += 1;
                for v in rgs[i + 1..].iter_mut() {
                    *v = 0;
                }
                break;
            }
        }
    }
}

/// Number of labeled trees on `n` vertices: `n^(n-2)` for `n >= 2`, 1 for
/// `n = 1`.
pub fn cayley_count(n: usize) -> Result<BigUint> {
    if n == 0 {
        return Err(Error::Domain("tree count needs at least one vertex".into()));
    }
    if n == 1 {
        return Ok(BigUint::one());
    }
    Ok(upow(n, n - 2))
}

/// Every labeled tree on `{0..n-1}` as an edge list, by decoding all
/// length `n-2` vertex sequences.
pub fn labeled_trees(n: usize) -> Result<Vec<Vec<(usize, usize)>>> {
    if n == 0 {
        return Err(Error::Domain("tree enumeration needs at least one vertex".into()));
    }
    if n > 8 {
        return Err(Error::Resource(format!(
            "labeled-tree enumeration capped at 8 vertices, got {n}"
        )));
    }
    if n == 1 {
        return Ok(vec![Vec::new()]);
    }
    let mut out = Vec::new();
    let mut seq = vec![0usize; n - 2];
    loop {
        out.push(decode_tree_sequence(n, &seq));
        let mut i = 0;
        loop {
            if i == seq.len() {
                return Ok(out);
            }
            seq[i] += 1;
            if seq[i] < n {
                break;
            }
            seq[i] = 0;
            i += 1;
        }
    }
}

fn decode_tree_sequence(n: usize, seq: &[usize]) -> Vec<(usize, usize)> {
    let mut degree = vec![1usize; n];
    for &s in seq {
        degree[s] += 1;
    }
    let mut edges = Vec::with_capacity(n - 1);
    for &s in seq {
        let leaf = (0..n).find(|&v| degree[v] == 1).unwrap();
        edges.push((leaf.min(s), leaf.max(s)));
        degree[leaf] = 0;
        degree[s] -= 1;
    }
    let mut last = (0..n).filter(|&v| degree[v] == 1);
    let (u, v) = (last.next().unwrap(), last.next().unwrap());
    edges.push((u.min(v), u.max(v)));
    edges.sort_unstable();
    edges
}

/// All weak compositions of `n` into `parts` nonnegative parts.
pub fn compositions(n: usize, parts: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = vec![0usize; parts];
    fn rec(i: usize, left: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if i + 1 == cur.len() {
            cur[i] = left;
            out.push(cur.clone());
            return;
        }
        for v in 0..=left {
            cur[i] = v;
            rec(i + 1, left - v, cur, out);
        }
    }
    if parts == 0 {
        if n == 0 {
            out.push(Vec::new());
        }
        return out;
    }
    rec(0, n, &mut cur, &mut out);
    out
}

/// Parameters of a forest count: `m` clusters of the given sizes plus `n`
/// external points.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ForestCountQuery {
    pub sizes: Vec<usize>,
    pub n: usize,
}

impl ForestCountQuery {
    pub fn new(sizes: Vec<usize>, n: usize) -> Result<Self> {
        if sizes.is_empty() {
            return Err(Error::Domain("need at least one cluster".into()));
        }
        if sizes.iter().any(|&l| l == 0) {
            return Err(Error::Domain("cluster sizes must be positive".into()));
        }
        Ok(ForestCountQuery { sizes, n })
    }

    pub fn m(&self) -> usize {
        self.sizes.len()
    }

    pub fn total(&self) -> usize {
        self.sizes.iter().sum()
    }
}

/// Single-cluster count `N_n(l) = l (l+n)^(n-1)`, with `N_0 = 1`.
pub fn forest_count_single(n: usize, l: usize) -> BigUint {
    if n == 0 {
        return BigUint::one();
    }
    BigUint::from(l) * upow(l + n, n - 1)
}

/// Closed-form admissible-forest count
/// `N = l_1 (prod_{i>=2} (2^(l_i) - 1)) (l + n)^(m+n-2)` for `m >= 2`; the
/// single-cluster case degenerates to `l (l+n)^(n-1)`.
pub fn forest_count_formula(q: &ForestCountQuery) -> Result<BigUint> {
    let m = q.m();
    let l = q.total();
    if m == 1 {
        return Ok(forest_count_single(q.n, l));
    }
    let big_l: BigUint = q.sizes[1..]
        .iter()
        .map(|&li| upow(2, li) - BigUint::one())
        .product();
    Ok(BigUint::from(q.sizes[0]) * big_l * upow(l + q.n, m + q.n - 2))
}

/// Reduced count with the per-cluster `2^l - 1` factors divided out,
/// computed by the recursion over (external points, absorbed clusters).
fn reduced_count(
    n: usize,
    l1: usize,
    rest: &[usize],
    memo: &mut HashMap<(usize, usize, Vec<usize>), BigUint>,
) -> BigUint {
    if rest.is_empty() && n == 0 {
        return BigUint::one();
    }
    if l1 == 0 {
        return BigUint::zero();
    }
    let mut key_rest = rest.to_vec();
    key_rest.sort_unstable();
    let key = (n, l1, key_rest);
    if let Some(v) = memo.get(&key) {
        return v.clone();
    }
    let mut total = BigUint::zero();
    let r = rest.len();
    for k in 0..=n {
        let coeff = binomial(n, k);
        for mask in 0u32..(1 << r) {
            let mut l_i_sum = 0usize;
            let mut sub_rest = Vec::with_capacity(r);
            for (j, &lj) in rest.iter().enumerate() {
                if mask >> j & 1 == 1 {
                    l_i_sum += lj;
                } else {
                    sub_rest.push(lj);
                }
            }
            // new first-cluster size l1 + l_I + k - 1
            let new_l1 = l1 + l_i_sum + k;
            if new_l1 == 0 {
                continue;
            }
            total += &coeff * reduced_count(n - k, new_l1 - 1, &sub_rest, memo);
        }
    }
    memo.insert(key, total.clone());
    total
}

/// Forest count by the recursion; must equal `forest_count_formula`.
pub fn forest_count_recursion(q: &ForestCountQuery) -> Result<BigUint> {
    let mut memo = HashMap::new();
    let reduced = reduced_count(q.n, q.sizes[0], &q.sizes[1..], &mut memo);
    let big_l: BigUint = q.sizes[1..]
        .iter()
        .map(|&li| upow(2, li) - BigUint::one())
        .product();
    Ok(reduced * big_l)
}

/// Both sides of the single-cluster composition identity
/// `l (l+n)^(n-1) = sum over compositions n_1+..+n_l = n of
/// n!/(n_1!..n_l!) prod (n_i+1)^(n_i-1)`.
pub fn remarkable_identity_sides(n: usize, l: usize) -> (BigUint, BigUint) {
    let lhs = forest_count_single(n, l);
    let n_fact = factorial(n);
    let mut rhs_rat = BigRational::zero();
    for comp in compositions(n, l) {
        let mut term = BigRational::from(BigInt::from(n_fact.clone()));
        for &ni in &comp {
            term /= BigRational::from(BigInt::from(factorial(ni)));
            // (n_i + 1)^(n_i - 1), with the n_i = 0 factor equal to 1/(1) = 1
            if ni >= 1 {
                term *= rat_pow((ni + 1) as i64, (ni as i64) - 1).unwrap();
            }
        }
        rhs_rat += term;
    }
    assert!(rhs_rat.is_integer());
    let rhs = rhs_rat.to_integer().to_biguint().expect("count is nonnegative");
    (lhs, rhs)
}

/// Both sides of the cluster-size partition identity: summing
/// `prod_j (sum of sizes in block j)^(block size - 1)` over all partitions
/// of the `m` clusters into `sigma` blocks equals
/// `C(m-1, sigma-1) l^(m-sigma)`.
pub fn partition_identity_sides(sizes: &[usize], sigma: usize) -> Result<(BigUint, BigUint)> {
    let m = sizes.len();
    if !(2 <= sigma && sigma <= m) {
        return Err(Error::Domain(format!("sigma = {sigma} outside 2..={m}")));
    }
    let l: usize = sizes.iter().sum();
    let mut lhs = BigUint::zero();
    for p in partitions(m, sigma) {
        let mut term = BigUint::one();
        for block in &p.blocks {
            let bl: usize = block.iter().map(|&i| sizes[i]).sum();
            term *= upow(bl, block.len() - 1);
        }
        lhs += term;
    }
    let rhs = binomial(m - 1, sigma - 1) * upow(l, m - sigma);
    Ok((lhs, rhs))
}

/// Both sides of the auxiliary binomial sum
/// `sum_k C(n,k)(k-1)(l+n-1)^(n-k-1) = -l (l+n-1)^(-1) (l+n)^(n-1)`,
/// evaluated in exact rationals.
pub fn aux_sum_identity_sides(n: usize, l: usize) -> Result<(BigRational, BigRational)> {
    let base = (l + n) as i64 - 1;
    let mut lhs = BigRational::zero();
    for k in 0..=n {
        let c = BigRational::from(BigInt::from(binomial(n, k)));
        let sign = BigRational::from(BigInt::from(k as i64 - 1));
        lhs += c * sign * rat_pow(base, n as i64 - k as i64 - 1)?;
    }
    let rhs = -BigRational::from(BigInt::from(l as i64))
        * rat_pow(base, -1)?
        * rat_pow((l + n) as i64, n as i64 - 1)?;
    Ok((lhs, rhs))
}

/// The three explicit sums whose total reproduces the reduced forest count
/// `l_1 (l+n)^(m+n-2)`, evaluated in exact rationals, together with that
/// closed-form total.
pub fn m_sums(sizes: &[usize], n: usize) -> Result<(BigRational, BigRational, BigRational, BigRational)> {
    let m = sizes.len();
    if m < 2 {
        return Err(Error::Domain("the three-sum decomposition needs m >= 2".into()));
    }
    let l: usize = sizes.iter().sum();
    let l1 = sizes[0];
    let base = (l + n) as i64 - 1;
    if base == 0 {
        return Err(Error::Domain("l + n must exceed 1".into()));
    }
    let mut m1 = BigRational::zero();
    let mut m2 = BigRational::zero();
    let mut m3 = BigRational::zero();
    let r = m - 1;
    for k in 0..=n {
        let outer = BigRational::from(BigInt::from(binomial(n, k)))
            * rat_pow(base, n as i64 - k as i64 - 1)?;
        for mask in 0u32..(1 << r) {
            let mut l_i_sum = 0usize;
            let mut sz = 0usize;
            for (j, &lj) in sizes[1..].iter().enumerate() {
                if mask >> j & 1 == 1 {
                    l_i_sum += lj;
                    sz += 1;
                }
            }
            let inner = rat_pow(base, m as i64 - sz as i64 - 1)?;
            m1 += &outer * BigRational::from(BigInt::from(l1 as i64)) * &inner;
            m2 += &outer * BigRational::from(BigInt::from(l_i_sum as i64)) * &inner;
            m3 += &outer * BigRational::from(BigInt::from(k as i64 - 1)) * &inner;
        }
    }
    let total = BigRational::from(BigInt::from(l1 as i64))
        * rat_pow((l + n) as i64, (m + n) as i64 - 2)?;
    Ok((m1, m2, m3, total))
}

/// Closed forms of the three sums, for term-by-term comparison.
pub fn m_sums_closed(sizes: &[usize], n: usize) -> Result<(BigRational, BigRational, BigRational)> {
    let m = sizes.len();
    let l: usize = sizes.iter().sum();
    let l1 = sizes[0] as i64;
    let base = (l + n) as i64 - 1;
    let inv = rat_pow(base, -1)?;
    let m1 = BigRational::from(BigInt::from(l1)) * &inv * rat_pow((l + n) as i64, (m + n) as i64 - 1)?;
    let m2 = BigRational::from(BigInt::from(l as i64 - l1)) * &inv
        * rat_pow((l + n) as i64, (m + n) as i64 - 2)?;
    let m3 = -BigRational::from(BigInt::from(l as i64)) * &inv
        * rat_pow((l + n) as i64, (m + n) as i64 - 2)?;
    Ok((m1, m2, m3))
}
