//! Four disjoint circles with radial noise and uniform outliers.

use multimodel::biclustering::SolverMode;
use multimodel::datagen::{generate, reestimate_truth, Structure, SyntheticSpec};
use multimodel::eval::precision_recall;
use multimodel::geometry::{Model, ModelFamily};
use multimodel::pipeline::{run, PipelineConfig};

fn main() -> multimodel::Result<()> {
    let delta = 0.02;
    let s = generate(&SyntheticSpec::new(Structure::Circles, 4, 60).sigma(0.004).outliers(0.3).seed(3))?;
    let truth = reestimate_truth(&s.data, &s.models, delta);
    let cfg = PipelineConfig::new(ModelFamily::Circle2D, delta, SolverMode::Compressed).seed(3);
    let res = run(&s.data, &cfg)?;
    let (p, r) = precision_recall(&res.cover(), &truth);
    println!("{} circles found, precision {p:.3}, recall {r:.3}", res.models.len());
    for m in &res.models {
        if let Model::Circle2D { center, radius } = m.model {
            println!("  center ({:+.3}, {:+.3}), radius {radius:.3}", center[0], center[1]);
        }
    }
    Ok(())
}
