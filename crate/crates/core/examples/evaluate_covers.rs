//! Matching-based precision and recall, GNMI and the misclassification
//! error on small hand-made covers.

use multimodel::eval::{gnmi, match_groups, misclassification_error, precision_recall_with, Averaging, GroupCover};

fn main() -> multimodel::Result<()> {
    let truth = GroupCover::new(12, vec![vec![0, 1, 2, 3, 4], vec![4, 5, 6, 7], vec![8, 9]])?;
    let pred = GroupCover::new(12, vec![vec![5, 6, 7, 10], vec![0, 1, 2, 3]])?;
    for (p, t, overlap) in match_groups(&pred, &truth) {
        println!("predicted {p} <-> true {t}: {overlap} shared");
    }
    for avg in [Averaging::SizeWeighted, Averaging::Unweighted] {
        let (p, r) = precision_recall_with(&pred, &truth, avg);
        println!("{avg:?}: precision {p:.3}, recall {r:.3}");
    }
    println!("gnmi {:.3}", gnmi(&pred, &truth));

    let truth_labels = [Some(0), Some(0), Some(1), Some(1), None, None];
    let pred_labels = [Some(1), Some(1), Some(0), None, None, Some(0)];
    println!("misclassification {:.3}", misclassification_error(&pred_labels, &truth_labels));
    Ok(())
}
