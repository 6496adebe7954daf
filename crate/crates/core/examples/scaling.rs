//! Wall-clock scaling of both solvers on planted matrices of growing size.

use multimodel::cli::scaling;

fn main() {
    let sizes: Vec<usize> = std::env::args()
        .skip(1)
        .map(|a| a.parse().expect("row counts"))
        .collect();
    let sizes = if sizes.is_empty() { vec![250, 1000, 4000] } else { sizes };
    println!("{:>6} {:>6} {:>10} {:>10} {:>8}", "m", "n", "rse s", "arse s", "speedup");
    for pair in scaling(&sizes, 700, 5, 3, 32).chunks(2) {
        println!(
            "{:>6} {:>6} {:>10.3} {:>10.3} {:>8.2}",
            pair[0].m, pair[0].n, pair[0].seconds, pair[1].seconds, pair[0].speedup
        );
    }
}
