//! Hypothesis sampling, the preference matrix and the NFA pre-filter on a
//! structured and on a pure-noise dataset.

use multimodel::datagen::{generate, Structure, SyntheticSpec};
use multimodel::geometry::ModelFamily;
use multimodel::sampling::{build_preference_matrix, draw_hypotheses, SamplingConfig};
use multimodel::validation::{num_tests, prefilter_columns, NfaConfig};

fn main() -> multimodel::Result<()> {
    let delta = 0.04;
    for (name, structure) in [("star", Structure::Star), ("noise", Structure::Noise)] {
        let s = generate(&SyntheticSpec::new(structure, 5, 50).outliers(0.5).seed(1))?;
        let pool = draw_hypotheses(&s.data, ModelFamily::Line2D, &SamplingConfig::new(2000, 1, delta))?;
        let a = build_preference_matrix(&s.data, &pool);
        let kept = prefilter_columns(&a, &pool, &s.data, &NfaConfig::new(delta));
        println!(
            "{name}: m = {}, {:.0} tests, {} x {} matrix ({} ones), {} meaningful columns",
            s.data.len(),
            num_tests(s.data.len(), ModelFamily::Line2D),
            a.nrows(),
            a.ncols(),
            a.nnz(),
            kept.ncols()
        );
    }
    Ok(())
}
