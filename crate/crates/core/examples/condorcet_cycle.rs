//! The classic three-voter cycle: every alternative loses to another by
//! majority, so there is no Condorcet winner and the ranking falls back to
//! Copeland scores with Borda as tie-break.
//!
//! ```text
//! cargo run --example condorcet_cycle
//! ```

use consilium::voting::{condorcet_result, copeland_scores, pairwise_matrix};
use consilium::{Ballot, Profile, Ranking};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let profile = Profile::new(
        ["A", "B", "C"],
        vec![
            Ballot::new("v1", Ranking::new(["A", "B", "C"])),
            Ballot::new("v2", Ranking::new(["B", "C", "A"])),
            Ballot::new("v3", Ranking::new(["C", "A", "B"])),
        ],
    )?;
    let pw = pairwise_matrix(&profile);
    for (a, b) in [("A", "B"), ("B", "C"), ("C", "A")] {
        println!(
            "{a} over {b}: {} of {}",
            pw.get(a, b).unwrap(),
            pw.voter_count
        );
    }
    println!("copeland: {:?}", copeland_scores(&pw));

    let r = condorcet_result(&profile);
    assert!(!r.has_condorcet_winner);
    println!(
        "no Condorcet winner; completed ranking {}",
        r.ranking.ordered().join(" > ")
    );
    Ok(())
}
