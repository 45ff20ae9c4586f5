// SPDX-License-Identifier: MIT OR Apache-2.0

//! Run the labeling API with one demo session preloaded.
//!
//! `cargo run --example labeling_service -- 8080`, then for example
//!
//! ```text
//! curl localhost:8080/api/sequences/demo
//! curl 'localhost:8080/api/sequences/demo/fit?penalty=10&algorithm=opart'
//! curl -X PUT localhost:8080/api/sequences/demo/labels \
//!      -H 'content-type: application/json' \
//!      -d '{"labels":[{"start":45,"end":55,"changes":1}]}'
//! ```

use std::sync::Arc;

use lopart::service::{router, SessionStore};
use lopart::simbench::outlier_example;
use lopart::RawLabel;

#[tokio::main]
async fn main() -> Result<(), Box<dyn std::error::Error>> {
    let port: u16 = std::env::args().nth(1).map(|p| p.parse()).transpose()?.unwrap_or(8080);

    let store = Arc::new(SessionStore::default());
    let (seq, labels) = outlier_example();
    store.insert("demo".into(), seq.values().to_vec())?;
    store.put_labels("demo", labels.iter().map(|l| RawLabel::from(*l)).collect())?;

    let listener = tokio::net::TcpListener::bind(("127.0.0.1", port)).await?;
    println!("serving on http://{}", listener.local_addr()?);
    axum::serve(listener, router(store))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await?;
    Ok(())
}
