//! Acceptance suite: one line per criterion, then a single assertion so every
//! criterion is reported even when an early one fails.

use qgraph::finder::FinderConfig;
use qgraph::verify;

#[test]
fn acceptance_criteria() {
    let results = verify::run(&[], &FinderConfig::default());
    assert_eq!(results.len(), verify::CRITERIA.len());
    for r in &results {
        println!("{r}");
    }
    let failed: Vec<u32> = results.iter().filter(|r| !r.passed).map(|r| r.id).collect();
    println!("{} of {} criteria passed", results.len() - failed.len(), results.len());
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
