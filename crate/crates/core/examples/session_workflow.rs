//! A full decision session: the facilitator defines alternatives and a
//! weighted matrix, enrolls two decision makers, who each ask for a
//! suggested ballot under their own weights and submit it. Closing the
//! ballot freezes both results. Sessions are written under a temporary
//! directory.
//!
//! ```text
//! cargo run --example session_workflow
//! ```

use std::collections::BTreeMap;

use consilium::model::{load_criteria, load_matrix};
use consilium::service::SessionService;
use consilium::session::{NewParticipant, SessionSpec};
use consilium::store::FileStore;
use consilium::{Method, Phase};

const MATRIX: &str = "\
alternative,cost,coverage,response
depot_a,120,0.62,14
depot_b,95,0.48,19
depot_c,140,0.81,11
";

const CRITERIA: &str = r#"[
  {"id": "cost", "name": "Annual cost", "weight": 0.4, "direction": "minimize", "scale": "k$"},
  {"id": "coverage", "name": "Population covered", "weight": 0.35, "direction": "maximize", "scale": "share"},
  {"id": "response", "name": "Response time", "weight": 0.25, "direction": "minimize", "scale": "min"}
]"#;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = tempfile::tempdir()?;
    let svc = SessionService::new(FileStore::open(dir.path())?);

    let spec = SessionSpec {
        matrix: Some(load_matrix(MATRIX)?),
        criteria: Some(load_criteria(CRITERIA)?),
        ..Default::default()
    };
    let created = svc.create(spec, NewParticipant::facilitator("chair"))?;
    let id = created.session.id.clone();
    let chair = Some(created.facilitator_token.as_str());
    println!("session {id}");

    let voters = [
        (
            "finance",
            [("cost", 0.7), ("coverage", 0.2), ("response", 0.1)],
        ),
        (
            "operations",
            [("cost", 0.1), ("coverage", 0.4), ("response", 0.5)],
        ),
    ];
    let mut tokens = Vec::new();
    for (name, _) in &voters {
        let (_, token) = svc.enroll(&id, chair, NewParticipant::decision_maker(*name))?;
        tokens.push(token);
    }

    svc.advance(&id, chair, Phase::Balloting)?;
    for ((name, weights), token) in voters.iter().zip(&tokens) {
        let weights: BTreeMap<String, f64> =
            weights.iter().map(|(k, w)| (k.to_string(), *w)).collect();
        let suggestion = svc.suggest(&id, &weights)?;
        println!(
            "{name:<11} suggests {}",
            suggestion.ranking.ordered().join(" > ")
        );
        svc.submit_ballot(&id, Some(token), name, suggestion.ranking)?;
    }

    let session = svc.advance(&id, chair, Phase::Results)?;
    for m in Method::ALL {
        let r = &session.results[&m];
        println!("{:<10} {}", m.as_str(), r.ranking.ordered().join(" > "));
    }
    svc.advance(&id, chair, Phase::Closed)?;

    let path = dir.path().join("sessions").join(format!("{id}.json"));
    println!(
        "persisted {} bytes to {}",
        std::fs::metadata(&path)?.len(),
        path.display()
    );
    Ok(())
}
