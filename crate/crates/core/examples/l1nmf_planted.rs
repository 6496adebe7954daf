//! Rank-one L1-NMF and sequential biclustering on a noisy planted matrix,
//! comparing the full and the compressed solver.

use std::time::Instant;

use multimodel::biclustering::{extract_biclusters, BiclusterConfig, SolverMode};
use multimodel::datagen::planted_preference;
use multimodel::l1nmf::{rank_one_l1nmf, rank_one_l1nmf_compressed, support, SolverConfig};

fn main() {
    let planted = planted_preference(1000, 700, 5, 0.9, 0.02, 4);
    let cfg = SolverConfig::default();

    let f = rank_one_l1nmf(&planted.matrix, &cfg);
    println!(
        "plain rank one: {} rows, {} columns, objective {:.0}",
        support(&f.u, 1e-4).len(),
        support(&f.v, 1e-4).len(),
        f.objective
    );
    let f = rank_one_l1nmf_compressed(&planted.matrix, &cfg, 32, 4);
    println!(
        "compressed rank one: {} rows, {} columns, objective {:.0}",
        support(&f.u, 1e-4).len(),
        support(&f.v, 1e-4).len(),
        f.objective
    );

    for mode in [SolverMode::Plain, SolverMode::Compressed] {
        let t = Instant::now();
        let run = extract_biclusters(&planted.matrix, &BiclusterConfig { mode, seed: 4, ..BiclusterConfig::default() });
        let sizes: Vec<String> = run.biclusters.iter().map(|b| format!("{}x{}", b.rows.len(), b.cols.len())).collect();
        println!(
            "{mode:?}: K = {} of {} [{}] in {:.2}s",
            run.k_selected,
            run.biclusters.len(),
            sizes.join(" "),
            t.elapsed().as_secs_f64()
        );
    }
    println!("planted blocks: {} rows x {} columns each", planted.rows[0].len(), planted.cols[0].len());
}
