//! Exercises the exact combinatorial identities behind the forest counts:
//! the composition identity for single-cluster counts, the partition
//! identity over block sizes, and the binomial auxiliary sum.

use clustergas::combinatorics::{
    aux_sum_identity_sides, partition_identity_sides, remarkable_identity_sides,
};

fn main() {
    for l in 1..=4 {
        for n in 0..=6 {
            let (lhs, rhs) = remarkable_identity_sides(n, l);
            assert_eq!(lhs, rhs, "composition identity failed at n={n}, l={l}");
        }
    }
    println!("composition identity: l(l+n)^(n-1) = sum over compositions, n <= 6, l <= 4");

    for sizes in [vec![1, 2, 1], vec![2, 2, 2, 1], vec![3, 1, 2, 1, 1]] {
        for sigma in 2..=sizes.len() {
            let (lhs, rhs) = partition_identity_sides(&sizes, sigma).unwrap();
            assert_eq!(lhs, rhs, "partition identity failed at {sizes:?}, sigma={sigma}");
        }
    }
    println!("partition identity: block-size products match C(m-1,sigma-1) l^(m-sigma)");

    for l in 1..=4 {
        for n in 1..=6 {
            let (lhs, rhs) = aux_sum_identity_sides(n, l).unwrap();
            assert_eq!(lhs, rhs, "auxiliary sum failed at n={n}, l={l}");
        }
    }
    println!("binomial auxiliary sum: closed form matches term-by-term evaluation");
}
