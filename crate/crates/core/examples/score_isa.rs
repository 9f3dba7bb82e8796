//! Scores the bundled ISA matrix with its criteria weights and prints the
//! normalized matrix next to the final ranking.
//!
//! ```text
//! cargo run --example score_isa
//! ```

use consilium::demo::{isa_dataset, isa_label};
use consilium::scoring::{derive_ranking, normalize, weighted_score};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let (matrix, criteria) = isa_dataset()?;
    let normalized = normalize(&matrix, &criteria)?;
    let scores = weighted_score(&normalized, &criteria)?;
    let ranking = derive_ranking(&scores, matrix.alternative_ids());

    print!("{:<8}", "");
    for c in &criteria {
        print!("{:>8}", format!("{}:{:.2}", c.id, c.weight));
    }
    println!("{:>9}", "score");
    for (pos, id) in ranking.iter().enumerate() {
        let row = matrix.alternative_index(id).unwrap();
        print!("{:<8}", isa_label(id));
        for v in &normalized.rows()[row] {
            print!("{v:>8.3}");
        }
        println!("{:>9.4}  {}°", scores.scores.get(id).unwrap(), pos + 1);
    }
    Ok(())
}
