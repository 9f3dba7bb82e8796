//! Runs the HTTP API on an ephemeral port with an in-memory store, drives
//! one session through it with plain HTTP/1.1 requests and shuts down.
//!
//! ```text
//! cargo run --example serve_api
//! ```

use std::sync::Arc;

use consilium::http::{router, TOKEN_HEADER};
use consilium::service::SessionService;
use consilium::store::MemoryStore;
use serde_json::{json, Value};
use tokio::io::{AsyncReadExt, AsyncWriteExt};
use tokio::net::{TcpListener, TcpStream};

async fn call(
    addr: &str,
    method: &str,
    path: &str,
    token: Option<&str>,
    body: Option<Value>,
) -> Value {
    let body = body.map(|b| b.to_string()).unwrap_or_default();
    let auth = token
        .map(|t| format!("{TOKEN_HEADER}: {t}\r\n"))
        .unwrap_or_default();
    let req = format!(
        "{method} {path} HTTP/1.1\r\nHost: {addr}\r\nConnection: close\r\n{auth}\
         Content-Type: application/json\r\nContent-Length: {}\r\n\r\n{body}",
        body.len()
    );
    let mut s = TcpStream::connect(addr).await.unwrap();
    s.write_all(req.as_bytes()).await.unwrap();
    let mut resp = String::new();
    s.read_to_string(&mut resp).await.unwrap();
    let (head, body) = resp.split_once("\r\n\r\n").unwrap();
    println!("{method} {path} -> {}", head.lines().next().unwrap());
    serde_json::from_str(body).unwrap_or(Value::Null)
}

#[tokio::main]
async fn main() -> std::io::Result<()> {
    let listener = TcpListener::bind("127.0.0.1:0").await?;
    let addr = listener.local_addr()?.to_string();
    let app = router(Arc::new(SessionService::new(MemoryStore::new())));
    let server = tokio::spawn(async move { axum::serve(listener, app).await });

    let created = call(
        &addr,
        "POST",
        "/sessions",
        None,
        Some(json!({"alternatives": ["A", "B", "C"], "facilitator": {"id": "chair"}})),
    )
    .await;
    let id = created["session"]["id"].as_str().unwrap().to_string();
    let chair = created["facilitator_token"].as_str().unwrap().to_string();

    let mut voters = Vec::new();
    for name in ["ana", "bo", "cy"] {
        let r = call(
            &addr,
            "POST",
            &format!("/sessions/{id}/participants"),
            Some(&chair),
            Some(json!({"id": name})),
        )
        .await;
        voters.push((name, r["token"].as_str().unwrap().to_string()));
    }
    let phase = format!("/sessions/{id}/phase");
    call(
        &addr,
        "POST",
        &phase,
        Some(&chair),
        Some(json!({"advance_to": "balloting"})),
    )
    .await;

    let ballots = [["A", "B", "C"], ["B", "A", "C"], ["B", "C", "A"]];
    for ((name, token), ranking) in voters.iter().zip(ballots) {
        let path = format!("/sessions/{id}/ballots/{name}");
        call(
            &addr,
            "PUT",
            &path,
            Some(token),
            Some(json!({"ranking": ranking})),
        )
        .await;
    }
    call(
        &addr,
        "POST",
        &phase,
        Some(&chair),
        Some(json!({"advance_to": "results"})),
    )
    .await;

    for m in ["borda", "condorcet"] {
        let r = call(
            &addr,
            "GET",
            &format!("/sessions/{id}/results?method={m}"),
            None,
            None,
        )
        .await;
        println!("  {m}: {} (scores {})", r["ranking"], r["scores"]);
    }
    let pw = call(
        &addr,
        "GET",
        &format!("/sessions/{id}/pairwise"),
        None,
        None,
    )
    .await;
    println!("  pairwise wins {}", pw["wins"]);

    server.abort();
    Ok(())
}
