//! Live grounding over an OpenAI-compatible chat-completions endpoint
//! with structured output. The transport is a trait so prompt assembly,
//! caching, and decoding are testable against canned responses.

use std::sync::atomic::{AtomicU64, Ordering};
use std::time::Duration;

use serde_json::Value;

use symbolizer_core::schema::{
    compile_goal_schema, compile_object_schema, compile_predicate_schema,
    compile_successor_schema, decode_goal, decode_object_set, decode_state, SchemaLimits,
};
use symbolizer_core::sim::ActionLabel;
use symbolizer_core::vocab::{
    Goal, LiftedVocabulary, Observation, ObjectSet, SymbolicState,
};

use super::{
    GroundError, GrounderConfig, InContextExample, PromptBundle, QueryPayload, ResponseCache,
};

#[derive(Debug)]
pub struct TransportError(pub String);

impl std::fmt::Display for TransportError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for TransportError {}

/// Posts one chat-completions request body and returns the raw response
/// body text.
pub trait ChatTransport: Send + Sync {
    fn post_chat(&self, body: &Value) -> Result<String, TransportError>;
}

/// Blocking HTTP transport. The API key comes from the environment
/// (`SYMBOLIZER_API_KEY`) via the caller.
pub struct ReqwestTransport {
    client: reqwest::blocking::Client,
    url: String,
    api_key: String,
}

impl ReqwestTransport {
    pub fn new(url: &str, api_key: &str, timeout: Duration) -> Result<Self, GroundError> {
        let client = reqwest::blocking::Client::builder()
            .timeout(timeout)
            .build()
            .map_err(|e| GroundError::Transport(e.to_string()))?;
        Ok(ReqwestTransport {
            client,
            url: url.to_string(),
            api_key: api_key.to_string(),
        })
    }
}

impl ChatTransport for ReqwestTransport {
    fn post_chat(&self, body: &Value) -> Result<String, TransportError> {
        let response = self
            .client
            .post(&self.url)
            .bearer_auth(&self.api_key)
            .json(body)
            .send()
            .map_err(|e| TransportError(e.to_string()))?;
        let status = response.status();
        let text = response.text().map_err(|e| TransportError(e.to_string()))?;
        if !status.is_success() {
            return Err(TransportError(format!("HTTP {status}: {text}")));
        }
        Ok(text)
    }
}

/// Pulls the assistant message text out of a chat-completions response.
pub fn extract_content(raw: &str) -> Result<String, GroundError> {
    let value: Value = serde_json::from_str(raw)
        .map_err(|e| GroundError::Transport(format!("malformed response: {e}")))?;
    value["choices"][0]["message"]["content"]
        .as_str()
        .map(|s| s.to_string())
        .ok_or_else(|| {
            GroundError::Transport("response carries no message content".to_string())
        })
}

/// Stage-addressed in-context example files.
#[derive(Debug, Clone, Default)]
pub struct StageExamples {
    pub objects: Vec<InContextExample>,
    pub predicates: Vec<InContextExample>,
    pub goal: Vec<InContextExample>,
    pub successor: Vec<InContextExample>,
}

/// Live grounder: compiles the stage schema, assembles the prompt,
/// consults the cache, calls the endpoint (retrying transport failures
/// only), and decodes the constrained output. Schema violations are
/// surfaced to the caller, never retried.
pub struct HttpGrounder<'a> {
    transport: &'a dyn ChatTransport,
    cfg: &'a GrounderConfig,
    limits: SchemaLimits,
    examples: StageExamples,
    cache: Option<ResponseCache>,
    network_calls: AtomicU64,
}

impl<'a> HttpGrounder<'a> {
    pub fn new(
        transport: &'a dyn ChatTransport,
        cfg: &'a GrounderConfig,
        limits: SchemaLimits,
        examples: StageExamples,
    ) -> Result<Self, GroundError> {
        cfg.validate()?;
        let cache = match &cfg.cache_dir {
            Some(dir) => Some(ResponseCache::open(dir)?),
            None => None,
        };
        Ok(HttpGrounder {
            transport,
            cfg,
            limits,
            examples,
            cache,
            network_calls: AtomicU64::new(0),
        })
    }

    /// Requests actually sent over the transport (cache hits excluded).
    pub fn network_calls(&self) -> u64 {
        self.network_calls.load(Ordering::Relaxed)
    }

    fn call(&self, bundle: &PromptBundle) -> Result<String, GroundError> {
        let key = bundle.cache_key(&self.cfg.model);
        if let Some(cache) = &self.cache {
            if let Some(raw) = cache.get(&key) {
                return extract_content(&raw);
            }
        }
        let body = bundle.request_body(&self.cfg.model, self.cfg.temperature);
        let mut last_error = String::new();
        for _ in 0..=self.cfg.max_retries {
            self.network_calls.fetch_add(1, Ordering::Relaxed);
            match self.transport.post_chat(&body) {
                Ok(raw) => {
                    if let Some(cache) = &self.cache {
                        cache.put(&key, &raw)?;
                    }
                    return extract_content(&raw);
                }
                Err(e) => last_error = e.0,
            }
        }
        Err(GroundError::Transport(last_error))
    }

    pub fn ground_objects(
        &self,
        obs: &Observation,
        vocab: &LiftedVocabulary,
    ) -> Result<ObjectSet, GroundError> {
        let schema = compile_object_schema(vocab, &self.limits);
        let bundle = PromptBundle::new(
            schema,
            self.examples.objects.clone(),
            QueryPayload::Observation(obs.clone()),
        )?;
        let content = self.call(&bundle)?;
        let objects = decode_object_set(&bundle.schema, &content)?;
        if objects.is_empty() {
            return Err(GroundError::EmptyResult);
        }
        Ok(objects)
    }

    pub fn ground_state(
        &self,
        obs: &Observation,
        vocab: &LiftedVocabulary,
        objects: &ObjectSet,
    ) -> Result<SymbolicState, GroundError> {
        let schema = compile_predicate_schema(vocab, objects, &self.limits)?;
        let bundle = PromptBundle::new(
            schema,
            self.examples.predicates.clone(),
            QueryPayload::Observation(obs.clone()),
        )?;
        let content = self.call(&bundle)?;
        Ok(decode_state(&bundle.schema, &content)?)
    }

    pub fn ground_goal(
        &self,
        goal_text: &str,
        vocab: &LiftedVocabulary,
        objects: &ObjectSet,
    ) -> Result<Goal, GroundError> {
        if goal_text.trim().is_empty() {
            return Err(GroundError::EmptyResult);
        }
        let schema = compile_goal_schema(vocab, objects, &self.limits)?;
        let bundle = PromptBundle::new(
            schema,
            self.examples.goal.clone(),
            QueryPayload::Observation(Observation::text(goal_text)),
        )?;
        let content = self.call(&bundle)?;
        let goal = decode_goal(&bundle.schema, &content)?;
        if goal.is_empty() {
            return Err(GroundError::EmptyResult);
        }
        Ok(goal)
    }

    /// Successor prediction: the object set for the schema is derived
    /// from the input state's atoms.
    pub fn predict_successor(
        &self,
        state: &SymbolicState,
        action: &ActionLabel,
        vocab: &LiftedVocabulary,
    ) -> Result<SymbolicState, GroundError> {
        let objects = ObjectSet::infer_from_state(vocab, state)
            .map_err(symbolizer_core::schema::SchemaError::Typed)?;
        let schema = compile_successor_schema(vocab, &objects, &self.limits)?;
        let bundle = PromptBundle::new(
            schema,
            self.examples.successor.clone(),
            QueryPayload::Transition {
                state: state.clone(),
                action: action.clone(),
            },
        )?;
        let content = self.call(&bundle)?;
        Ok(decode_state(&bundle.schema, &content)?)
    }

    /// One-off structured call outside the grounding stages (plan and
    /// heuristic baselines). `schema` constrains the output; returns the
    /// raw content string.
    pub fn raw_structured_call(
        &self,
        system_text: &str,
        user_parts: Value,
        schema_name: &str,
        schema_body: Value,
    ) -> Result<String, GroundError> {
        let body = serde_json::json!({
            "model": self.cfg.model,
            "temperature": self.cfg.temperature,
            "messages": [
                {"role": "system", "content": system_text},
                {"role": "user", "content": user_parts},
            ],
            "response_format": {
                "type": "json_schema",
                "json_schema": {"name": schema_name, "schema": schema_body, "strict": true},
            },
        });
        let mut last_error = String::new();
        for _ in 0..=self.cfg.max_retries {
            self.network_calls.fetch_add(1, Ordering::Relaxed);
            match self.transport.post_chat(&body) {
                Ok(raw) => return extract_content(&raw),
                Err(e) => last_error = e.0,
            }
        }
        Err(GroundError::Transport(last_error))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::Mutex;
    use symbolizer_core::schema::encode_state;
    use symbolizer_core::sim::{make_instance, DomainId, InstanceParams};

    /// Canned transport: pops scripted response bodies and records the
    /// requests it saw.
    struct Scripted {
        responses: Mutex<Vec<Result<String, String>>>,
        requests: Mutex<Vec<Value>>,
    }

    impl Scripted {
        fn new(responses: Vec<Result<String, String>>) -> Self {
            Scripted {
                responses: Mutex::new(responses),
                requests: Mutex::new(Vec::new()),
            }
        }

        fn chat_body(content: &str) -> String {
            serde_json::json!({
                "choices": [{"message": {"role": "assistant", "content": content}}]
            })
            .to_string()
        }
    }

    impl ChatTransport for Scripted {
        fn post_chat(&self, body: &Value) -> Result<String, TransportError> {
            self.requests.lock().unwrap().push(body.clone());
            let mut responses = self.responses.lock().unwrap();
            if responses.is_empty() {
                return Err(TransportError("no scripted response".into()));
            }
            responses.remove(0).map_err(TransportError)
        }
    }

    fn cfg() -> GrounderConfig {
        GrounderConfig {
            endpoint: "http://localhost/v1/chat/completions".into(),
            model: "test-model".into(),
            ..GrounderConfig::default()
        }
    }

    #[test]
    fn grounds_objects_from_scripted_response() {
        let inst =
            make_instance(DomainId::Blocksworld, &InstanceParams::canonical(2), 0).unwrap();
        let content = r#"{"objects": [{"name": "b1", "type": "block"}, {"name": "b2", "type": "block"}]}"#;
        let transport = Scripted::new(vec![Ok(Scripted::chat_body(content))]);
        let config = cfg();
        let grounder = HttpGrounder::new(
            &transport,
            &config,
            SchemaLimits::default(),
            StageExamples::default(),
        )
        .unwrap();
        let objects = grounder
            .ground_objects(&Observation::text("two blocks"), &inst.vocab)
            .unwrap();
        assert_eq!(objects, inst.objects);
        // The request carried the schema and the query.
        let requests = transport.requests.lock().unwrap();
        assert_eq!(requests.len(), 1);
        assert_eq!(requests[0]["model"], "test-model");
        assert_eq!(
            requests[0]["response_format"]["json_schema"]["name"],
            "objects"
        );
    }

    #[test]
    fn schema_violations_are_not_retried() {
        let inst =
            make_instance(DomainId::Blocksworld, &InstanceParams::canonical(2), 0).unwrap();
        let content = r#"{"objects": [{"name": "b1", "type": "mystery"}]}"#;
        let transport = Scripted::new(vec![
            Ok(Scripted::chat_body(content)),
            Ok(Scripted::chat_body(content)),
        ]);
        let config = cfg();
        let grounder = HttpGrounder::new(
            &transport,
            &config,
            SchemaLimits::default(),
            StageExamples::default(),
        )
        .unwrap();
        let err = grounder
            .ground_objects(&Observation::text("x"), &inst.vocab)
            .unwrap_err();
        assert!(matches!(err, GroundError::Schema(_)));
        assert_eq!(grounder.network_calls(), 1);
    }

    #[test]
    fn transport_errors_retry_up_to_limit() {
        let inst =
            make_instance(DomainId::Blocksworld, &InstanceParams::canonical(2), 0).unwrap();
        let transport = Scripted::new(vec![
            Err("timeout".into()),
            Err("timeout".into()),
            Err("timeout".into()),
        ]);
        let config = cfg(); // max_retries = 2 => 3 attempts
        let grounder = HttpGrounder::new(
            &transport,
            &config,
            SchemaLimits::default(),
            StageExamples::default(),
        )
        .unwrap();
        let err = grounder
            .ground_objects(&Observation::text("x"), &inst.vocab)
            .unwrap_err();
        assert!(matches!(err, GroundError::Transport(_)));
        assert_eq!(grounder.network_calls(), 3);
    }

    #[test]
    fn cache_hit_skips_network() {
        let dir = tempfile::tempdir().unwrap();
        let inst =
            make_instance(DomainId::Blocksworld, &InstanceParams::canonical(2), 0).unwrap();
        let raw = Scripted::chat_body(
            &serde_json::to_string(&encode_state(&inst.initial)).unwrap(),
        );
        let mut config = cfg();
        config.cache_dir = Some(dir.path().to_path_buf());

        let transport = Scripted::new(vec![Ok(raw)]);
        let grounder = HttpGrounder::new(
            &transport,
            &config,
            SchemaLimits::default(),
            StageExamples::default(),
        )
        .unwrap();
        let obs = Observation::text("scene");
        let first = grounder
            .ground_state(&obs, &inst.vocab, &inst.objects)
            .unwrap();
        assert_eq!(first, inst.initial);
        assert_eq!(grounder.network_calls(), 1);

        // Fresh grounder over the same cache directory: zero calls.
        let empty_transport = Scripted::new(vec![]);
        let cached = HttpGrounder::new(
            &empty_transport,
            &config,
            SchemaLimits::default(),
            StageExamples::default(),
        )
        .unwrap();
        let second = cached
            .ground_state(&obs, &inst.vocab, &inst.objects)
            .unwrap();
        assert_eq!(second, inst.initial);
        assert_eq!(cached.network_calls(), 0);
    }

    #[test]
    fn empty_goal_text_is_empty_result() {
        let inst =
            make_instance(DomainId::Blocksworld, &InstanceParams::canonical(2), 0).unwrap();
        let transport = Scripted::new(vec![]);
        let config = cfg();
        let grounder = HttpGrounder::new(
            &transport,
            &config,
            SchemaLimits::default(),
            StageExamples::default(),
        )
        .unwrap();
        let err = grounder
            .ground_goal("   ", &inst.vocab, &inst.objects)
            .unwrap_err();
        assert!(matches!(err, GroundError::EmptyResult));
        assert_eq!(grounder.network_calls(), 0);
    }

    #[test]
    fn successor_schema_derives_objects_from_state() {
        let inst = make_instance(DomainId::Hanoi, &InstanceParams::canonical(2), 0).unwrap();
        let succs = inst.successors(&inst.initial).unwrap();
        let (label, next) = &succs[0];
        let raw = Scripted::chat_body(&serde_json::to_string(&encode_state(next)).unwrap());
        let transport = Scripted::new(vec![Ok(raw)]);
        let config = cfg();
        let grounder = HttpGrounder::new(
            &transport,
            &config,
            SchemaLimits::default(),
            StageExamples::default(),
        )
        .unwrap();
        let predicted = grounder
            .predict_successor(&inst.initial, label, &inst.vocab)
            .unwrap();
        assert_eq!(&predicted, next);
        // The transition query is rendered as state + action text.
        let requests = transport.requests.lock().unwrap();
        let text = requests[0]["messages"][1]["content"][0]["text"]
            .as_str()
            .unwrap();
        assert!(text.contains("action: move(d1,"));
        assert!(text.starts_with("state:\n"));
    }
}
