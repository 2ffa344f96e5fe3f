//! Thin async client for the reranking service.

use reqwest::{Method, RequestBuilder, Response, StatusCode};
use rerank_core::api::{
    BenchRequest, BenchResponse, CreateDatabase, DatabaseInfo, ErrorBody, RerankRequest,
    RerankResponse, VerifyRequest,
};
use rerank_core::bench::VerifyReport;
use serde::de::DeserializeOwned;
use serde::Serialize;

#[derive(Debug, thiserror::Error)]
pub enum ClientError {
    #[error("request failed: {0}")]
    Http(#[from] reqwest::Error),

    #[error("server answered {status}: {message}")]
    Api { status: StatusCode, message: String },
}

pub type Result<T> = std::result::Result<T, ClientError>;

#[derive(Clone, Debug)]
pub struct Client {
    base: String,
    http: reqwest::Client,
}

impl Client {
    /// `base` is the server root, e.g. `http://127.0.0.1:7878`.
    pub fn new(base: impl Into<String>) -> Self {
        Client {
            base: base.into().trim_end_matches('/').to_string(),
            http: reqwest::Client::new(),
        }
    }

    pub fn base_url(&self) -> &str {
        &self.base
    }

    fn request(&self, method: Method, path: &str) -> RequestBuilder {
        self.http.request(method, format!("{}{path}", self.base))
    }

    async fn check(res: Response) -> Result<Response> {
        let status = res.status();
        if status.is_success() {
            return Ok(res);
        }
        let text = res.text().await?;
        let message = error_message(&text).unwrap_or(text);
        Err(ClientError::Api { status, message })
    }

    async fn json<T: DeserializeOwned>(
        &self,
        method: Method,
        path: &str,
        body: Option<&impl Serialize>,
    ) -> Result<T> {
        let mut req = self.request(method, path);
        if let Some(b) = body {
            req = req.json(b);
        }
        Ok(Self::check(req.send().await?).await?.json().await?)
    }

    pub async fn health(&self) -> Result<()> {
        Self::check(self.request(Method::GET, "/health").send().await?)
            .await
            .map(|_| ())
    }

    pub async fn create_database(&self, req: &CreateDatabase) -> Result<DatabaseInfo> {
        self.json(Method::POST, "/databases", Some(req)).await
    }

    pub async fn databases(&self) -> Result<Vec<DatabaseInfo>> {
        self.json(Method::GET, "/databases", None::<&()>).await
    }

    pub async fn database(&self, id: u64) -> Result<DatabaseInfo> {
        self.json(Method::GET, &format!("/databases/{id}"), None::<&()>)
            .await
    }

    pub async fn drop_database(&self, id: u64) -> Result<DatabaseInfo> {
        self.json(Method::DELETE, &format!("/databases/{id}"), None::<&()>)
            .await
    }

    pub async fn rerank(&self, id: u64, req: &RerankRequest) -> Result<RerankResponse> {
        self.json(Method::POST, &format!("/databases/{id}/rerank"), Some(req))
            .await
    }

    /// The database's dense indexes as snapshot text.
    pub async fn index_snapshot(&self, id: u64) -> Result<String> {
        let res = self
            .request(Method::GET, &format!("/databases/{id}/index"))
            .send()
            .await?;
        Ok(Self::check(res).await?.text().await?)
    }

    pub async fn load_index(&self, id: u64, snapshot: String) -> Result<DatabaseInfo> {
        let res = self
            .request(Method::PUT, &format!("/databases/{id}/index"))
            .body(snapshot)
            .send()
            .await?;
        Ok(Self::check(res).await?.json().await?)
    }

    pub async fn bench(&self, req: &BenchRequest) -> Result<BenchResponse> {
        self.json(Method::POST, "/bench", Some(req)).await
    }

    pub async fn verify(&self, instances: usize, seed: u64) -> Result<VerifyReport> {
        self.json(
            Method::POST,
            "/verify",
            Some(&VerifyRequest { instances, seed }),
        )
        .await
    }
}

fn error_message(text: &str) -> Option<String> {
    let body: ErrorBody = serde_json::from_str(text).ok()?;
    Some(body.error)
}
