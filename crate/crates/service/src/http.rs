//! JSON over HTTP.
//!
//! | method | path | body / query |
//! |---|---|---|
//! | `POST` | `/sessions` | `{annotator_id, corpus, exclusive?}` |
//! | `DELETE` | `/sessions/{id}` | |
//! | `GET` | `/sentences/{id}` | `?session=` |
//! | `POST` | `/sentences/{id}/increment` | `{session, selection, category?, auto_label?}` |
//! | `POST` | `/sentences/{id}/edits` | `{session, version, edit}` |
//! | `POST` | `/compare` | `{left, right}` |
//! | `GET` | `/search` | `?session=&q=` |
//!
//! Every response body is a JSON object with `corpus_version` (content hash
//! of the corpus, `null` where none applies) and `model_version` (hash of
//! the model container). Failures carry `error: {kind, message, ...}`.

use std::collections::HashMap;
use std::sync::Arc;

use argbank_core::SyntaxGraph;
use axum::body::Bytes;
use axum::extract::{Path, Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{delete, get, post};
use axum::Router;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::edit::Edit;
use crate::error::ServiceError;
use crate::proposal::{IncrementRequest, Proposal};
use crate::service::Service;

type Shared = Arc<Service>;

pub fn router(service: Shared) -> Router {
    Router::new()
        .route("/sessions", post(open_session))
        .route("/sessions/{id}", delete(close_session))
        .route("/sentences/{id}", get(get_sentence))
        .route("/sentences/{id}/increment", post(increment))
        .route("/sentences/{id}/edits", post(edit))
        .route("/compare", post(compare))
        .route("/search", get(search))
        .fallback(not_found)
        .with_state(service)
}

/// Serves until ctrl-c.
pub async fn serve(service: Shared, addr: std::net::SocketAddr) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    axum::serve(listener, router(service))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}

fn respond(service: &Service, status: StatusCode, corpus_version: Option<String>, body: impl Serialize) -> Response {
    let mut v = serde_json::to_value(body).expect("bodies serialize");
    let map = v.as_object_mut().expect("bodies are objects");
    map.insert("corpus_version".into(), json!(corpus_version));
    map.insert("model_version".into(), json!(service.model_version()));
    (status, axum::Json(v)).into_response()
}

fn fail(service: &Service, corpus_version: Option<String>, e: ServiceError) -> Response {
    let status = StatusCode::from_u16(e.status()).expect("valid status");
    respond(service, status, corpus_version, json!({ "error": e.body() }))
}

fn parse_body<T: DeserializeOwned>(bytes: &Bytes) -> Result<T, ServiceError> {
    serde_json::from_slice(bytes).map_err(|e| ServiceError::BadRequest(e.to_string()))
}

fn param<'a>(q: &'a HashMap<String, String>, name: &str) -> Result<&'a str, ServiceError> {
    q.get(name)
        .map(String::as_str)
        .ok_or_else(|| ServiceError::BadRequest(format!("missing query parameter `{name}`")))
}

/// Corpus version of a session's corpus, if the session exists.
fn corpus_version(service: &Service, session: &str) -> Option<String> {
    service.session(session).ok().map(|s| s.store().corpus_version())
}

async fn not_found(State(s): State<Shared>) -> Response {
    let mut r = fail(&s, None, ServiceError::BadRequest("no such endpoint".into()));
    *r.status_mut() = StatusCode::NOT_FOUND;
    r
}

#[derive(Deserialize)]
struct OpenRequest {
    annotator_id: String,
    corpus: String,
    #[serde(default)]
    exclusive: bool,
}

#[derive(Serialize)]
struct SentenceListing {
    sentence_id: String,
    version: u64,
}

async fn open_session(State(s): State<Shared>, body: Bytes) -> Response {
    let r = parse_body::<OpenRequest>(&body).and_then(|r| s.open_session(&r.annotator_id, &r.corpus, r.exclusive));
    match r {
        Ok(session) => {
            let sentences: Vec<SentenceListing> = session
                .store()
                .listing()
                .into_iter()
                .map(|(sentence_id, version)| SentenceListing { sentence_id, version })
                .collect();
            respond(
                &s,
                StatusCode::CREATED,
                Some(session.store().corpus_version()),
                json!({
                    "session": session.id,
                    "annotator_id": session.annotator_id,
                    "corpus": session.corpus,
                    "exclusive": session.exclusive,
                    "sentences": sentences,
                }),
            )
        }
        Err(e) => fail(&s, None, e),
    }
}

async fn close_session(State(s): State<Shared>, Path(id): Path<String>) -> Response {
    match s.close_session(&id) {
        Ok(()) => respond(&s, StatusCode::OK, None, json!({ "closed": id })),
        Err(e) => fail(&s, None, e),
    }
}

#[derive(Serialize)]
struct SentenceBody<'a> {
    sentence_id: &'a str,
    version: u64,
    graph: &'a SyntaxGraph,
}

async fn get_sentence(
    State(s): State<Shared>,
    Path(id): Path<String>,
    Query(q): Query<HashMap<String, String>>,
) -> Response {
    let session = match param(&q, "session") {
        Ok(v) => v,
        Err(e) => return fail(&s, None, e),
    };
    let cv = corpus_version(&s, session);
    match s.sentence(session, &id) {
        Ok((graph, version)) => respond(
            &s,
            StatusCode::OK,
            cv,
            SentenceBody {
                sentence_id: &id,
                version,
                graph: &graph,
            },
        ),
        Err(e) => fail(&s, cv, e),
    }
}

#[derive(Deserialize)]
struct IncrementBody {
    session: String,
    #[serde(flatten)]
    request: IncrementRequest,
}

#[derive(Serialize)]
struct IncrementResponse<'a> {
    sentence_id: &'a str,
    version: u64,
    proposal: Proposal,
}

async fn increment(State(s): State<Shared>, Path(id): Path<String>, body: Bytes) -> Response {
    let req: IncrementBody = match parse_body(&body) {
        Ok(r) => r,
        Err(e) => return fail(&s, None, e),
    };
    let cv = corpus_version(&s, &req.session);
    match s.propose_increment(&req.session, &id, &req.request) {
        Ok((proposal, version)) => respond(
            &s,
            StatusCode::OK,
            cv,
            IncrementResponse {
                sentence_id: &id,
                version,
                proposal,
            },
        ),
        Err(e) => fail(&s, cv, e),
    }
}

#[derive(Deserialize)]
struct EditBody {
    session: String,
    version: u64,
    edit: Edit,
}

async fn edit(State(s): State<Shared>, Path(id): Path<String>, body: Bytes) -> Response {
    let req: EditBody = match parse_body(&body) {
        Ok(r) => r,
        Err(e) => return fail(&s, None, e),
    };
    let service = s.clone();
    let sentence = id.clone();
    // the edit writes files, so it leaves the async workers alone
    let result = tokio::task::spawn_blocking(move || service.apply_edit(&req.session, &sentence, req.version, &req.edit).map(|r| (r, req.session)))
        .await
        .expect("edit task does not panic");
    match result {
        Ok(((version, graph), session)) => respond(
            &s,
            StatusCode::OK,
            corpus_version(&s, &session),
            SentenceBody {
                sentence_id: &id,
                version,
                graph: &graph,
            },
        ),
        Err(e) => fail(&s, None, e),
    }
}

#[derive(Deserialize)]
struct CompareBody {
    left: String,
    right: String,
}

async fn compare(State(s): State<Shared>, body: Bytes) -> Response {
    let r = parse_body::<CompareBody>(&body).and_then(|c| s.compare(&c.left, &c.right));
    match r {
        Ok((report, version)) => respond(&s, StatusCode::OK, Some(version), report),
        Err(e) => fail(&s, None, e),
    }
}

async fn search(State(s): State<Shared>, Query(q): Query<HashMap<String, String>>) -> Response {
    let (session, query) = match (param(&q, "session"), param(&q, "q")) {
        (Ok(a), Ok(b)) => (a, b),
        (Err(e), _) | (_, Err(e)) => return fail(&s, None, e),
    };
    let cv = corpus_version(&s, session);
    match s.search(session, query) {
        Ok(matches) => {
            let matches: Vec<Value> = matches
                .iter()
                .map(|m| {
                    json!({
                        "sentence_id": m.sentence_id,
                        "bindings": m.bindings.iter().map(|(k, v)| (k.clone(), json!(v))).collect::<serde_json::Map<_, _>>(),
                    })
                })
                .collect();
            respond(&s, StatusCode::OK, cv, json!({ "matches": matches }))
        }
        Err(e) => fail(&s, cv, e),
    }
}
