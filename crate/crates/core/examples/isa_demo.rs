//! The ISA prioritization with three decision makers voting from
//! different weight presets, rendered as top-5 tables.
//!
//! ```text
//! cargo run --example isa_demo [seed]
//! ```

use consilium::demo::{self, DemoOptions};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let seed = std::env::args().nth(1).map(|s| s.parse()).transpose()?;
    let (matrix, criteria) = demo::isa_dataset()?;
    let outcome = demo::run(
        matrix,
        criteria,
        &DemoOptions {
            unanimous: false,
            seed,
        },
    )?;
    for b in &outcome.ballots {
        let top: Vec<&str> = b.ranking.iter().take(3).collect();
        println!("{} ({}): {}", b.voter, b.preset.name, top.join(", "));
    }
    println!();
    print!("{}", demo::render(&outcome, 5));
    Ok(())
}
