//! Two crossing lines: overlapping consensus sets versus the disjoint
//! assignment, scored with the misclassification error.

use multimodel::biclustering::SolverMode;
use multimodel::datagen::crossing_lines;
use multimodel::eval::misclassification_error;
use multimodel::geometry::ModelFamily;
use multimodel::pipeline::{run, PipelineConfig};

fn main() -> multimodel::Result<()> {
    let s = crossing_lines(60, 6, 0.003, 40, 2);
    let mut cfg = PipelineConfig::new(ModelFamily::Line2D, 0.02, SolverMode::Plain).seed(2);
    let res = run(&s.data, &cfg)?;
    let shared = res.models[0]
        .consensus
        .iter()
        .filter(|i| res.models.iter().all(|m| m.consensus.binary_search(i).is_ok()))
        .count();
    println!("{} models, {shared} points in every consensus set", res.models.len());

    cfg.disjoint_output = true;
    let res = run(&s.data, &cfg)?;
    let labels = res.labels.expect("disjoint output requested");
    println!("disjoint misclassification {:.3}", misclassification_error(&labels, &s.labels));
    Ok(())
}
