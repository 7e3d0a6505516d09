//! Drives the HTTP service in-process: creates the World 1-1 demo project,
//! asks for a path and fetches a CSV export.
//!
//! `pacemaker serve --port 7878` runs the same router on a socket.

use axum::body::Body;
use axum::http::Request;
use http_body_util::BodyExt;
use pacemaker::api::{router, AppState};
use tower::ServiceExt;

async fn send(app: &axum::Router, method: &str, uri: &str, body: Option<&str>) -> String {
    let request = Request::builder()
        .method(method)
        .uri(uri)
        .header("content-type", "application/json")
        .body(body.map_or_else(Body::empty, |b| Body::from(b.to_owned())))
        .expect("valid request");
    let response = app
        .clone()
        .oneshot(request)
        .await
        .expect("router is infallible");
    let status = response.status();
    let bytes = response
        .into_body()
        .collect()
        .await
        .expect("body")
        .to_bytes();
    format!("{status} {}", String::from_utf8_lossy(&bytes))
}

#[tokio::main]
async fn main() {
    let app = router(AppState::in_memory());

    let created = send(
        &app,
        "POST",
        "/projects",
        Some(r#"{"name": "w11", "demo": "mario"}"#),
    )
    .await;
    println!("{created}");
    let id = created
        .split('"')
        .skip_while(|s| *s != "id")
        .nth(2)
        .expect("project id in response")
        .to_owned();

    let path = send(
        &app,
        "POST",
        &format!("/projects/{id}/paths"),
        Some(r#"{"start": "1-small", "via": ["14-small"], "end": "13-small"}"#),
    )
    .await;
    println!("{path}");

    let csv = send(
        &app,
        "GET",
        &format!("/projects/{id}/export.csv?kind=category&paths=1-small,2-small,3-small"),
        None,
    )
    .await;
    println!("{csv}");
}
