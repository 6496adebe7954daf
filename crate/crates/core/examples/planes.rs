//! Three horizontal planes in the unit cube.

use multimodel::biclustering::SolverMode;
use multimodel::datagen::{parallel_planes, reestimate_truth};
use multimodel::eval::precision_recall;
use multimodel::geometry::{Model, ModelFamily};
use multimodel::pipeline::{run, PipelineConfig};

fn main() -> multimodel::Result<()> {
    let delta = 0.02;
    let s = parallel_planes(&[0.2, 0.5, 0.8], 80, 0.004, 60, 11);
    let truth = reestimate_truth(&s.data, &s.models, delta);
    let cfg = PipelineConfig::new(ModelFamily::Plane3D, delta, SolverMode::Plain).seed(11);
    let res = run(&s.data, &cfg)?;
    let (p, r) = precision_recall(&res.cover(), &truth);
    println!("{} planes found, precision {p:.3}, recall {r:.3}", res.models.len());
    for m in &res.models {
        if let Model::Plane3D { normal, offset } = m.model {
            println!("  n = ({:+.3}, {:+.3}, {:+.3}), c = {offset:.3}", normal[0], normal[1], normal[2]);
        }
    }
    Ok(())
}
