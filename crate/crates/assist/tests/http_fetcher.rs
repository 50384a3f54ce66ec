use std::net::SocketAddr;
use std::time::Duration;

use axum::extract::Path;
use axum::http::{header, HeaderMap, StatusCode};
use axum::response::{IntoResponse, Redirect};
use axum::routing::get;
use axum::Router;
use sparql_assist::fetch::{FetchError, FetchRequest, Fetcher, HttpFetcher, MAX_REDIRECTS};

fn start_server() -> SocketAddr {
    let (tx, rx) = std::sync::mpsc::channel();
    std::thread::spawn(move || {
        let rt = tokio::runtime::Builder::new_current_thread().enable_all().build().unwrap();
        rt.block_on(async move {
            let app = Router::new()
                .route(
                    "/doc",
                    get(|| async { ([(header::CONTENT_TYPE, "text/turtle")], "<http://a> <http://b> <http://c> .") }),
                )
                .route(
                    "/r/{n}",
                    get(|Path(n): Path<u32>| async move {
                        if n == 0 {
                            Redirect::temporary("/doc")
                        } else {
                            Redirect::temporary(&format!("/r/{}", n - 1))
                        }
                    }),
                )
                .route("/big", get(|| async { "x".repeat(10_000) }))
                .route(
                    "/slow",
                    get(|| async {
                        tokio::time::sleep(Duration::from_secs(3)).await;
                        "late"
                    }),
                )
                .route("/missing", get(|| async { StatusCode::NOT_FOUND }))
                .route(
                    "/accept",
                    get(|headers: HeaderMap| async move {
                        let accept = headers.get(header::ACCEPT).and_then(|v| v.to_str().ok()).unwrap_or("").to_string();
                        accept.into_response()
                    }),
                );
            let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
            tx.send(listener.local_addr().unwrap()).unwrap();
            axum::serve(listener, app).await.unwrap();
        });
    });
    rx.recv().unwrap()
}

fn get_url(url: String, max_bytes: u64, timeout: Duration) -> Result<sparql_assist::fetch::FetchResponse, FetchError> {
    HttpFetcher.fetch(&FetchRequest {
        url,
        accept: "text/turtle".into(),
        timeout,
        max_bytes,
    })
}

#[test]
fn http_fetcher_behaviour() {
    let addr = start_server();
    let base = format!("http://{addr}");
    let t = Duration::from_secs(5);

    let doc = get_url(format!("{base}/doc"), 1 << 20, t).unwrap();
    assert_eq!(doc.content_type.as_deref(), Some("text/turtle"));
    assert_eq!(doc.body, b"<http://a> <http://b> <http://c> .");

    // r/4 takes five hops to reach /doc
    let followed = get_url(format!("{base}/r/{}", MAX_REDIRECTS - 1), 1 << 20, t).unwrap();
    assert!(followed.final_url.ends_with("/doc"), "{}", followed.final_url);

    let too_many = get_url(format!("{base}/r/{}", MAX_REDIRECTS), 1 << 20, t);
    assert_eq!(too_many.unwrap_err(), FetchError::TooManyRedirects);

    assert_eq!(get_url(format!("{base}/big"), 100, t).unwrap_err(), FetchError::TooLarge(100));
    assert_eq!(get_url(format!("{base}/big"), 10_000, t).unwrap().body.len(), 10_000);

    assert_eq!(get_url(format!("{base}/missing"), 100, t).unwrap_err(), FetchError::Status(404));

    let started = std::time::Instant::now();
    let slow = get_url(format!("{base}/slow"), 100, Duration::from_millis(200));
    assert_eq!(slow.unwrap_err(), FetchError::Timeout);
    assert!(started.elapsed() < Duration::from_secs(2));

    let accept = get_url(format!("{base}/accept"), 100, t).unwrap();
    assert_eq!(accept.body, b"text/turtle");

    let refused = get_url("http://127.0.0.1:1/".to_string(), 100, t);
    assert!(matches!(refused.unwrap_err(), FetchError::Transport(_)));
}

