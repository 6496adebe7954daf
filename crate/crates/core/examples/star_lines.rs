//! Five lines through a common center with half the points as outliers,
//! fitted with both solvers and scored against the re-estimated truth.

use multimodel::biclustering::SolverMode;
use multimodel::datagen::{generate, reestimate_truth, Structure, SyntheticSpec};
use multimodel::eval::{gnmi, precision_recall};
use multimodel::geometry::{Model, ModelFamily};
use multimodel::pipeline::{run, PipelineConfig};

fn main() -> multimodel::Result<()> {
    let delta = 0.04;
    let s = generate(&SyntheticSpec::new(Structure::Star, 5, 50).sigma(0.0075).outliers(0.5).seed(7))?;
    let truth = reestimate_truth(&s.data, &s.models, delta);
    println!("{} points, {} planted lines", s.data.len(), s.models.len());

    for mode in [SolverMode::Plain, SolverMode::Compressed] {
        let cfg = PipelineConfig::new(ModelFamily::Line2D, delta, mode).samples(10_000).seed(7);
        let res = run(&s.data, &cfg)?;
        let (p, r) = precision_recall(&res.cover(), &truth);
        println!(
            "{mode:?}: {} models, K = {}, precision {p:.3}, recall {r:.3}, gnmi {:.3}, {:.2}s",
            res.models.len(),
            res.biclusters_selected,
            gnmi(&res.cover(), &truth),
            res.timings.total
        );
        for m in &res.models {
            if let Model::Line2D { normal, offset } = m.model {
                println!(
                    "  n = ({:+.3}, {:+.3}), c = {offset:.4}, {} inliers, log10 NFA {:.1}",
                    normal[0],
                    normal[1],
                    m.consensus.len(),
                    m.log10_nfa
                );
            }
        }
    }
    Ok(())
}
