//! Two vertical strips share a dense square each with a horizontal line.
//! The horizontal alignment is only supported by points the strips already
//! explain, so the exclusion filter drops it.

use multimodel::biclustering::SolverMode;
use multimodel::datagen::{exclusion_fixture, exclusion_fixture_spurious};
use multimodel::geometry::{consensus_set, Model, ModelFamily};
use multimodel::pipeline::{run, PipelineConfig};
use multimodel::validation::{exclusion_filter, log10_nfa, NfaConfig};

fn main() -> multimodel::Result<()> {
    let s = exclusion_fixture(0);
    let nfa = NfaConfig::new(0.01);
    let spurious = exclusion_fixture_spurious();

    let mut pairs: Vec<(Vec<usize>, Model)> = s
        .models
        .iter()
        .chain([&spurious])
        .map(|m| (consensus_set(m, &s.data, nfa.delta), *m))
        .collect();
    pairs.sort_by(|a, b| b.0.len().cmp(&a.0.len()));
    for (consensus, model) in &pairs {
        println!(
            "{model:?}: {} inliers, log10 NFA alone {:.1}",
            consensus.len(),
            log10_nfa(&s.data, model, &nfa)
        );
    }
    for k in exclusion_filter(&pairs, &s.data, &nfa) {
        println!("kept {:?} with log10 NFA {:.1} on unclaimed points", pairs[k.index].1, k.log10_nfa);
    }

    let cfg = PipelineConfig::new(ModelFamily::Line2D, nfa.delta, SolverMode::Plain).samples(10_000);
    let res = run(&s.data, &cfg)?;
    println!("pipeline returns {} models:", res.models.len());
    for m in &res.models {
        println!("  {:?}", m.model);
    }
    Ok(())
}
