//! Counts admissible forest graphs by direct enumeration and checks the
//! count against the closed formula and the recursion.

use clustergas::combinatorics::{
    forest_count_formula, forest_count_recursion, ForestCountQuery,
};
use clustergas::forests::count_forests;

fn main() {
    println!("{:>12} {:>3} {:>12} {:>12} {:>12}", "sizes", "n", "enumerated", "formula", "recursion");
    for sizes in [vec![1], vec![3], vec![1, 1], vec![2, 1], vec![2, 2], vec![1, 2, 1]] {
        for n in 0..=2 {
            let q = ForestCountQuery::new(sizes.clone(), n).unwrap();
            let enumerated = count_forests(&sizes, n, 12).unwrap();
            let formula = forest_count_formula(&q).unwrap();
            let recursion = forest_count_recursion(&q).unwrap();
            println!(
                "{:>12} {:>3} {:>12} {:>12} {:>12}",
                format!("{sizes:?}"),
                n,
                enumerated,
                formula,
                recursion
            );
            assert_eq!(enumerated.to_string(), formula.to_string());
            assert_eq!(recursion, formula);
        }
    }
    println!("all counts agree");
}
