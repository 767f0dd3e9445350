//! Fixtures shared by the CLI, service and acceptance suites.
#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::sync::Arc;

use axum::body::Body;
use axum::http::{Request, Response, StatusCode};
use defocus_cli::report::Report;
use defocus_cli::service::{router, SessionMeta, SessionStore};
use http_body_util::BodyExt;
use tower::ServiceExt;

pub const BOUNDARY: &str = "defocus-test-boundary";

pub fn golden_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data/golden")
}

pub fn golden_image() -> PathBuf {
    golden_dir().join("image.png")
}

pub fn golden_depth() -> PathBuf {
    golden_dir().join("depth.pfm")
}

/// Lens settings the golden scene was generated with.
pub fn golden_lens() -> Report {
    Report::parse(&std::fs::read_to_string(golden_dir().join("lens.txt")).unwrap())
}

pub fn golden_value(key: &str) -> f64 {
    golden_lens().get(key).unwrap().parse().unwrap()
}

/// `--focal --fd --ppu --coc-max` for the golden scene.
pub fn golden_cli_lens() -> Vec<String> {
    let l = golden_lens();
    [
        ("--focal", "focal_length_mm"),
        ("--fd", "focus_distance"),
        ("--ppu", "pixels_per_unit"),
        ("--coc-max", "coc_max_px"),
    ]
    .iter()
    .flat_map(|(flag, key)| [flag.to_string(), l.get(key).unwrap().to_owned()])
    .collect()
}

pub fn golden_json_lens() -> serde_json::Map<String, serde_json::Value> {
    let mut m = serde_json::Map::new();
    for (field, key) in [
        ("focal_length_mm", "focal_length_mm"),
        ("focus_distance", "focus_distance"),
        ("pixels_per_unit", "pixels_per_unit"),
        ("coc_max_px", "coc_max_px"),
    ] {
        m.insert(field.into(), golden_value(key).into());
    }
    m
}

pub fn defocus(args: &[impl AsRef<std::ffi::OsStr>]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_defocus"))
        .args(args)
        .output()
        .expect("spawn defocus")
}

pub fn stdout_report(out: &Output) -> Report {
    assert!(
        out.status.success(),
        "exit {:?}: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    Report::parse(&String::from_utf8(out.stdout.clone()).unwrap())
}

pub fn multipart(parts: &[(&str, &[u8])]) -> Vec<u8> {
    let mut body = Vec::new();
    for (name, bytes) in parts {
        body.extend_from_slice(
            format!(
                "--{BOUNDARY}\r\nContent-Disposition: form-data; name=\"{name}\"; filename=\"{name}\"\r\n\
                 Content-Type: application/octet-stream\r\n\r\n"
            )
            .as_bytes(),
        );
        body.extend_from_slice(bytes);
        body.extend_from_slice(b"\r\n");
    }
    body.extend_from_slice(format!("--{BOUNDARY}--\r\n").as_bytes());
    body
}

pub struct App {
    pub store: Arc<SessionStore>,
}

impl App {
    pub fn new(capacity: usize) -> Self {
        Self {
            store: Arc::new(SessionStore::new(capacity)),
        }
    }

    pub async fn send(&self, req: Request<Body>) -> (StatusCode, axum::http::HeaderMap, Vec<u8>) {
        let resp: Response<Body> = router(self.store.clone()).oneshot(req).await.unwrap();
        let (parts, body) = resp.into_parts();
        let bytes = body.collect().await.unwrap().to_bytes().to_vec();
        (parts.status, parts.headers, bytes)
    }

    pub async fn upload(&self, parts: &[(&str, &[u8])]) -> (StatusCode, Vec<u8>) {
        let req = Request::post("/session")
            .header("content-type", format!("multipart/form-data; boundary={BOUNDARY}"))
            .body(Body::from(multipart(parts)))
            .unwrap();
        let (status, _, body) = self.send(req).await;
        (status, body)
    }

    pub async fn upload_files(&self, image: &Path, depth: &Path) -> SessionMeta {
        let (image, depth) = (std::fs::read(image).unwrap(), std::fs::read(depth).unwrap());
        let (status, body) = self.upload(&[("image", &image), ("depth", &depth)]).await;
        assert_eq!(status, StatusCode::CREATED, "{}", String::from_utf8_lossy(&body));
        serde_json::from_slice(&body).unwrap()
    }

    pub async fn post_json(&self, uri: &str, json: &serde_json::Value) -> (StatusCode, axum::http::HeaderMap, Vec<u8>) {
        let req = Request::post(uri)
            .header("content-type", "application/json")
            .body(Body::from(json.to_string()))
            .unwrap();
        self.send(req).await
    }
}

pub fn error_code(body: &[u8]) -> String {
    let v: serde_json::Value = serde_json::from_slice(body).unwrap();
    v["code"].as_str().unwrap().to_owned()
}
