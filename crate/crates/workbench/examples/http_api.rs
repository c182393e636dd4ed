//! Start the HTTP API on a scratch project, store a card and a design, run a
//! simulation job and fetch the resulting mesh, all over a real socket.
//!
//! ```text
//! cargo run -p morphsim-workbench --example http_api
//! ```

use std::io::{Read, Write};
use std::net::TcpStream;
use std::time::Duration;

use morphsim::grid::{BendingUnitSpec, GridDesign};
use morphsim::material::MaterialCard;
use morphsim_workbench::config::WorkbenchConfig;
use morphsim_workbench::service::{serve, AppState};
use serde_json::Value;

/// One request over a fresh connection; returns status line and body.
fn http(addr: &str, method: &str, path: &str, body: &str) -> (String, String) {
    let mut s = TcpStream::connect(addr).unwrap();
    write!(
        s,
        "{method} {path} HTTP/1.1\r\nHost: {addr}\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{body}",
        body.len()
    )
    .unwrap();
    let mut text = String::new();
    s.read_to_string(&mut text).unwrap();
    let (head, body) = text.split_once("\r\n\r\n").unwrap_or((&text, ""));
    (head.lines().next().unwrap_or("").to_string(), body.to_string())
}

fn main() {
    let dir = tempfile::tempdir().unwrap();
    let state = AppState::open(dir.path(), WorkbenchConfig::default()).unwrap();
    let rt = tokio::runtime::Runtime::new().unwrap();
    let listener = rt.block_on(tokio::net::TcpListener::bind("127.0.0.1:0")).unwrap();
    let addr = listener.local_addr().unwrap().to_string();
    rt.spawn(async move { serve(listener, state).await });
    println!("serving {} on http://{addr}", dir.path().display());

    let (st, _) = http(&addr, "PUT", "/materials/PLA", &MaterialCard::pla().to_json());
    println!("PUT /materials/PLA -> {st}");
    let mut design = GridDesign::single_unit("unit", BendingUnitSpec::standard("PLA", "PLA", 0.75, 0.132));
    design.materials.clear();
    let (st, _) = http(&addr, "PUT", "/designs/unit", &design.to_json());
    println!("PUT /designs/unit -> {st}");

    let (st, body) = http(&addr, "POST", "/jobs", r#"{"kind": "simulate", "design": "unit"}"#);
    let id = serde_json::from_str::<Value>(&body).unwrap()["id"].as_str().unwrap().to_string();
    println!("POST /jobs -> {st}, job {id}");
    let record = loop {
        let (_, body) = http(&addr, "GET", &format!("/jobs/{id}"), "");
        let v: Value = serde_json::from_str(&body).unwrap();
        if !matches!(v["status"].as_str(), Some("queued" | "running")) {
            break v;
        }
        std::thread::sleep(Duration::from_millis(100));
    };
    println!("job {} {}", record["status"], record["states"]);

    let (st, body) = http(&addr, "GET", &format!("/states/{id}.stage_b/mesh"), "");
    let mesh: Value = serde_json::from_str(&body).unwrap();
    let pts = mesh["members"][0]["points"].as_array().unwrap();
    println!("GET /states/{id}.stage_b/mesh -> {st}, {} points, tip {}", pts.len(), pts.last().unwrap());

    let (st, body) = http(&addr, "POST", "/jobs", r#"{"kind": "simulate", "design": "unit"}"#);
    println!("repeat POST -> {st} (same inputs, same record: {})", body.contains(&id));
    let (st, _) = http(&addr, "GET", "/designs/nope", "");
    println!("GET /designs/nope -> {st}");
}
