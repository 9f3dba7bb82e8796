//! Borda and Condorcet on a small committee vote, with the pairwise
//! matrix behind the Condorcet result.
//!
//! ```text
//! cargo run --example tally_ballots
//! ```

use consilium::voting::{borda_result, condorcet_result, pairwise_matrix};
use consilium::{Ballot, Profile, Ranking};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let sites = ["north", "harbour", "centre", "airport"];
    let profile = Profile::new(
        sites,
        vec![
            Ballot::new(
                "ana",
                Ranking::new(["harbour", "centre", "north", "airport"]),
            ),
            Ballot::new(
                "bruno",
                Ranking::new(["centre", "harbour", "airport", "north"]),
            ),
            Ballot::new(
                "carla",
                Ranking::new(["north", "harbour", "centre", "airport"]),
            ),
            Ballot::new(
                "dani",
                Ranking::new(["harbour", "north", "airport", "centre"]),
            ),
            Ballot::new(
                "edu",
                Ranking::new(["centre", "airport", "harbour", "north"]),
            ),
        ],
    )?;

    let pw = pairwise_matrix(&profile);
    println!("wins[row][col]:");
    print!("{:>9}", "");
    for s in sites {
        print!("{s:>9}");
    }
    println!();
    for (a, row) in pw.wins.iter().enumerate() {
        print!("{:>9}", sites[a]);
        for w in row {
            print!("{w:>9}");
        }
        println!();
    }

    for r in [borda_result(&profile), condorcet_result(&profile)] {
        println!(
            "\n{}: {}",
            r.method.as_str(),
            r.ranking.ordered().join(" > ")
        );
        for (id, s) in r.scores.iter() {
            println!("  {id:<8} {s}");
        }
    }
    let res = condorcet_result(&profile);
    println!(
        "\nCondorcet winner: {}",
        res.condorcet_winner.as_deref().unwrap_or("none")
    );
    Ok(())
}
