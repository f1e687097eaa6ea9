//! Grounding backends: an OpenAI-compatible structured-output client
//! for live runs and a deterministic ground-truth-perturbing mock for
//! offline testing. Prompt assembly, the response cache, and the
//! shared error type live here.

pub mod http;
pub mod mock;

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Duration;

use serde_json::{json, Value};
use sha2::{Digest, Sha256};
use thiserror::Error;

use symbolizer_core::schema::{SchemaDoc, SchemaError, Stage};
use symbolizer_core::sim::ActionLabel;
use symbolizer_core::vocab::{Observation, SymbolicState};

pub use http::{ChatTransport, HttpGrounder, ReqwestTransport, StageExamples, TransportError};
pub use mock::MockGrounder;

/// Hard cap on in-context examples per prompt.
pub const MAX_EXAMPLES: usize = 10;

/// Mock noise parameters: each ground-truth element is dropped
/// independently with probability `epsilon`, and `spurious` extra atoms
/// are sampled uniformly without replacement from the atom universe
/// minus the ground truth. Zero noise is the identity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MockNoise {
    pub epsilon: f64,
    pub spurious: usize,
    pub seed: u64,
}

impl Default for MockNoise {
    fn default() -> Self {
        MockNoise {
            epsilon: 0.0,
            spurious: 0,
            seed: 0,
        }
    }
}

/// Endpoint and mock settings for grounding calls.
#[derive(Debug, Clone)]
pub struct GrounderConfig {
    pub endpoint: String,
    pub model: String,
    pub timeout: Duration,
    pub max_retries: u32,
    pub temperature: f64,
    pub cache_dir: Option<PathBuf>,
    pub noise: MockNoise,
}

impl Default for GrounderConfig {
    fn default() -> Self {
        GrounderConfig {
            endpoint: String::new(),
            model: String::new(),
            timeout: Duration::from_secs(60),
            max_retries: 2,
            temperature: 0.0,
            cache_dir: None,
            noise: MockNoise::default(),
        }
    }
}

impl GrounderConfig {
    pub fn validate(&self) -> Result<(), GroundError> {
        if !(0.0..=1.0).contains(&self.noise.epsilon) {
            return Err(GroundError::Config(format!(
                "epsilon {} outside [0, 1]",
                self.noise.epsilon
            )));
        }
        if self.timeout.is_zero() {
            return Err(GroundError::Config("timeout must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum GroundError {
    #[error("transport failure: {0}")]
    Transport(String),
    #[error(transparent)]
    Schema(#[from] SchemaError),
    #[error("empty result")]
    EmptyResult,
    #[error("{action} has no successor in this state")]
    NoSuchSuccessor { action: ActionLabel },
    #[error("inconsistent state: {0}")]
    Sim(String),
    #[error("invalid prompt bundle: {0}")]
    Prompt(String),
    #[error("cache: {0}")]
    Cache(String),
    #[error("configuration: {0}")]
    Config(String),
}

/// The input half of an in-context example. Transition states are
/// carried as canonical text: example outputs come from other problem
/// instances, so they are checked structurally, not against this
/// instance's enumerations.
#[derive(Debug, Clone)]
pub enum ExampleInput {
    Observation(Observation),
    Transition {
        state_text: String,
        action: ActionLabel,
    },
}

impl ExampleInput {
    pub fn transition(state: &SymbolicState, action: ActionLabel) -> Self {
        ExampleInput::Transition {
            state_text: state.canonical_key(),
            action,
        }
    }
}

/// One in-context example: an input paired with the serialized output
/// the model is expected to imitate.
#[derive(Debug, Clone)]
pub struct InContextExample {
    pub input: ExampleInput,
    pub output_json: String,
}

/// The query half of a prompt.
#[derive(Debug, Clone)]
pub enum QueryPayload {
    Observation(Observation),
    Transition {
        state: SymbolicState,
        action: ActionLabel,
    },
}

/// A fully assembled grounding prompt: sparse system text, up to ten
/// stage-matched examples, the query, and the stage schema.
#[derive(Debug, Clone)]
pub struct PromptBundle {
    pub system_text: String,
    pub examples: Vec<InContextExample>,
    pub query: QueryPayload,
    pub schema: SchemaDoc,
}

/// The deliberately sparse per-stage instruction; everything else the
/// model needs comes from the examples and the schema.
pub fn default_system_text(stage: Stage) -> &'static str {
    match stage {
        Stage::Objects => {
            "Follow the examples. List the objects present in the input, one entry per object."
        }
        Stage::Predicates => {
            "Follow the examples. List the relations that hold in the input."
        }
        Stage::Goal => "Follow the examples. Express the requested goal as literals.",
        Stage::Successor => {
            "Follow the examples. Predict the state after the given action is applied."
        }
    }
}

/// Checks that an example's output has the top-level shape of the
/// stage (outputs from other instances cannot be checked against this
/// instance's enumerations, only structurally).
fn example_shape_ok(stage: Stage, output_json: &str) -> Result<(), String> {
    let value: Value =
        serde_json::from_str(output_json).map_err(|e| format!("output is not JSON: {e}"))?;
    let key = match stage {
        Stage::Objects => "objects",
        Stage::Predicates | Stage::Successor => "atoms",
        Stage::Goal => "literals",
    };
    let obj = value.as_object().ok_or("output must be an object")?;
    if obj.len() != 1 || !obj.contains_key(key) {
        return Err(format!("output must have the single field {key:?}"));
    }
    if !obj[key].is_array() {
        return Err(format!("{key:?} must be an array"));
    }
    Ok(())
}

impl PromptBundle {
    pub fn new(
        schema: SchemaDoc,
        examples: Vec<InContextExample>,
        query: QueryPayload,
    ) -> Result<Self, GroundError> {
        if examples.len() > MAX_EXAMPLES {
            return Err(GroundError::Prompt(format!(
                "{} examples exceed the cap of {MAX_EXAMPLES}",
                examples.len()
            )));
        }
        for (i, ex) in examples.iter().enumerate() {
            example_shape_ok(schema.stage(), &ex.output_json)
                .map_err(|e| GroundError::Prompt(format!("example {i}: {e}")))?;
            let stage_is_transition = schema.stage() == Stage::Successor;
            let input_is_transition = matches!(ex.input, ExampleInput::Transition { .. });
            if stage_is_transition != input_is_transition {
                return Err(GroundError::Prompt(format!(
                    "example {i} input kind does not match the {} stage",
                    schema.stage()
                )));
            }
        }
        Ok(PromptBundle {
            system_text: default_system_text(schema.stage()).to_string(),
            examples,
            query,
            schema,
        })
    }

    /// OpenAI-compatible chat-completions request: system text, then
    /// alternating example user/assistant turns, then the query, with
    /// the schema attached as the response format.
    pub fn request_body(&self, model: &str, temperature: f64) -> Value {
        let mut messages = vec![json!({"role": "system", "content": self.system_text})];
        for ex in &self.examples {
            messages.push(json!({
                "role": "user",
                "content": input_content(&ex.input),
            }));
            messages.push(json!({"role": "assistant", "content": ex.output_json}));
        }
        let query_input = match &self.query {
            QueryPayload::Observation(obs) => ExampleInput::Observation(obs.clone()),
            QueryPayload::Transition { state, action } => {
                ExampleInput::transition(state, action.clone())
            }
        };
        messages.push(json!({"role": "user", "content": input_content(&query_input)}));
        json!({
            "model": model,
            "temperature": temperature,
            "messages": messages,
            "response_format": {
                "type": "json_schema",
                "json_schema": {
                    "name": self.schema.stage().as_str(),
                    "schema": self.schema.body(),
                    "strict": true,
                },
            },
        })
    }

    /// Content hash identifying this request for the on-disk cache:
    /// system text, example payloads, query payload, schema body, and
    /// model name.
    pub fn cache_key(&self, model: &str) -> String {
        let mut hasher = Sha256::new();
        let mut feed = |tag: &str, bytes: &[u8]| {
            hasher.update(tag.as_bytes());
            hasher.update((bytes.len() as u64).to_le_bytes());
            hasher.update(bytes);
        };
        feed("system", self.system_text.as_bytes());
        for ex in &self.examples {
            feed_input(&mut feed, &ex.input);
            feed("output", ex.output_json.as_bytes());
        }
        match &self.query {
            QueryPayload::Observation(obs) => feed_observation(&mut feed, obs),
            QueryPayload::Transition { state, action } => {
                feed("q-state", state.canonical_key().as_bytes());
                feed("q-action", action.to_string().as_bytes());
            }
        }
        feed("schema", self.schema.render().as_bytes());
        feed("model", model.as_bytes());
        hex::encode(hasher.finalize())
    }
}

fn feed_input(feed: &mut impl FnMut(&str, &[u8]), input: &ExampleInput) {
    match input {
        ExampleInput::Observation(obs) => feed_observation(feed, obs),
        ExampleInput::Transition { state_text, action } => {
            feed("state", state_text.as_bytes());
            feed("action", action.to_string().as_bytes());
        }
    }
}

fn feed_observation(feed: &mut impl FnMut(&str, &[u8]), obs: &Observation) {
    match obs {
        Observation::Text(t) => feed("text", t.as_bytes()),
        Observation::Image { bytes, media_type } => {
            feed("media", media_type.as_bytes());
            feed("image", bytes);
        }
    }
}

/// Message content for an input: text observations become text parts,
/// images become base64 data URLs, transitions become a two-line text
/// rendering of the state and the action.
fn input_content(input: &ExampleInput) -> Value {
    match input {
        ExampleInput::Observation(Observation::Text(t)) => {
            json!([{"type": "text", "text": t}])
        }
        ExampleInput::Observation(Observation::Image { bytes, media_type }) => {
            use base64::Engine;
            let b64 = base64::engine::general_purpose::STANDARD.encode(bytes);
            json!([{
                "type": "image_url",
                "image_url": {"url": format!("data:{media_type};base64,{b64}")},
            }])
        }
        ExampleInput::Transition { state_text, action } => {
            json!([{
                "type": "text",
                "text": format!("state:\n{state_text}\naction: {action}"),
            }])
        }
    }
}

/// Example file format: a JSON array where each entry pairs an input
/// (`text`, `image_path`, or `state` + `action`) with the `output` the
/// model should imitate.
pub fn load_example_file(path: &Path) -> Result<Vec<InContextExample>, GroundError> {
    let text = fs::read_to_string(path)
        .map_err(|e| GroundError::Config(format!("{}: {e}", path.display())))?;
    let entries: Vec<Value> = serde_json::from_str(&text)
        .map_err(|e| GroundError::Config(format!("{}: {e}", path.display())))?;
    let base = path.parent().unwrap_or(Path::new("."));
    let mut out = Vec::new();
    for (i, entry) in entries.iter().enumerate() {
        let bad = |msg: &str| {
            GroundError::Config(format!("{} entry {i}: {msg}", path.display()))
        };
        let output = entry
            .get("output")
            .ok_or_else(|| bad("missing output"))?;
        let output_json = serde_json::to_string(output).expect("value serializes");
        let input = if let Some(text) = entry.get("text").and_then(Value::as_str) {
            ExampleInput::Observation(Observation::text(text))
        } else if let Some(rel) = entry.get("image_path").and_then(Value::as_str) {
            let image = base.join(rel);
            let bytes = fs::read(&image)
                .map_err(|e| bad(&format!("{}: {e}", image.display())))?;
            let media_type = match image.extension().and_then(|e| e.to_str()) {
                Some("png") => "image/png",
                Some("jpg") | Some("jpeg") => "image/jpeg",
                Some("webp") => "image/webp",
                _ => "application/octet-stream",
            };
            ExampleInput::Observation(Observation::Image {
                bytes,
                media_type: media_type.to_string(),
            })
        } else if let Some(atoms) = entry.get("state").and_then(Value::as_array) {
            let mut rendered: Vec<String> = atoms
                .iter()
                .map(|a| {
                    let s = a.as_str().ok_or_else(|| bad("state atoms must be strings"))?;
                    symbolizer_core::vocab::GroundAtom::parse(s)
                        .map(|atom| atom.to_string())
                        .map_err(|e| bad(&e.to_string()))
                })
                .collect::<Result<_, _>>()?;
            rendered.sort();
            let action_text = entry
                .get("action")
                .and_then(Value::as_str)
                .ok_or_else(|| bad("transition entries need an action"))?;
            let action = ActionLabel::parse(action_text).map_err(|e| bad(&e.to_string()))?;
            ExampleInput::Transition {
                state_text: rendered.join("\n"),
                action,
            }
        } else {
            return Err(bad("entry needs text, image_path, or state"));
        };
        out.push(InContextExample { input, output_json });
    }
    Ok(out)
}

/// One file per request hash holding the raw response text. Writes go
/// through a temp file and rename, so concurrent writers are safe.
pub struct ResponseCache {
    dir: PathBuf,
}

impl ResponseCache {
    pub fn open(dir: &Path) -> Result<Self, GroundError> {
        fs::create_dir_all(dir).map_err(|e| GroundError::Cache(e.to_string()))?;
        Ok(ResponseCache {
            dir: dir.to_path_buf(),
        })
    }

    fn path_for(&self, key: &str) -> PathBuf {
        self.dir.join(format!("{key}.json"))
    }

    pub fn get(&self, key: &str) -> Option<String> {
        fs::read_to_string(self.path_for(key)).ok()
    }

    pub fn put(&self, key: &str, raw: &str) -> Result<(), GroundError> {
        let tmp = self.dir.join(format!(".{key}.tmp"));
        fs::write(&tmp, raw).map_err(|e| GroundError::Cache(e.to_string()))?;
        fs::rename(&tmp, self.path_for(key)).map_err(|e| GroundError::Cache(e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use symbolizer_core::schema::{compile_object_schema, SchemaLimits};
    use symbolizer_core::sim::{make_instance, DomainId, InstanceParams};

    fn objects_bundle(examples: Vec<InContextExample>) -> Result<PromptBundle, GroundError> {
        let inst =
            make_instance(DomainId::Blocksworld, &InstanceParams::canonical(2), 0).unwrap();
        let schema = compile_object_schema(&inst.vocab, &SchemaLimits::default());
        PromptBundle::new(
            schema,
            examples,
            QueryPayload::Observation(Observation::text("two blocks on a table")),
        )
    }

    fn text_example(output_json: &str) -> InContextExample {
        InContextExample {
            input: ExampleInput::Observation(Observation::text("a scene")),
            output_json: output_json.to_string(),
        }
    }

    #[test]
    fn example_cap_enforced() {
        let ex = text_example(r#"{"objects": []}"#);
        let err = objects_bundle(vec![ex; 11]).unwrap_err();
        assert!(matches!(err, GroundError::Prompt(_)));
        assert!(objects_bundle(vec![text_example(r#"{"objects": []}"#); 10]).is_ok());
    }

    #[test]
    fn example_shape_must_match_stage() {
        let err = objects_bundle(vec![text_example(r#"{"atoms": []}"#)]).unwrap_err();
        assert!(matches!(err, GroundError::Prompt(_)));
    }

    #[test]
    fn request_body_layout() {
        let bundle = objects_bundle(vec![
            text_example(r#"{"objects": [{"name": "a", "type": "block"}]}"#),
            text_example(r#"{"objects": []}"#),
        ])
        .unwrap();
        let body = bundle.request_body("test-model", 0.0);
        let messages = body["messages"].as_array().unwrap();
        // system + 2 example pairs + query
        assert_eq!(messages.len(), 6);
        assert_eq!(messages[0]["role"], "system");
        assert_eq!(messages[1]["role"], "user");
        assert_eq!(messages[2]["role"], "assistant");
        assert_eq!(messages[5]["role"], "user");
        assert_eq!(body["temperature"], 0.0);
        assert_eq!(body["response_format"]["type"], "json_schema");
        assert_eq!(body["response_format"]["json_schema"]["strict"], true);
    }

    #[test]
    fn image_payload_becomes_data_url() {
        let inst =
            make_instance(DomainId::Blocksworld, &InstanceParams::canonical(2), 0).unwrap();
        let schema = compile_object_schema(&inst.vocab, &SchemaLimits::default());
        let bundle = PromptBundle::new(
            schema,
            vec![],
            QueryPayload::Observation(Observation::Image {
                bytes: vec![1, 2, 3],
                media_type: "image/png".into(),
            }),
        )
        .unwrap();
        let body = bundle.request_body("m", 0.0);
        let url = body["messages"][1]["content"][0]["image_url"]["url"]
            .as_str()
            .unwrap();
        assert!(url.starts_with("data:image/png;base64,"));
    }

    #[test]
    fn cache_key_is_content_sensitive() {
        let a = objects_bundle(vec![text_example(r#"{"objects": []}"#)]).unwrap();
        let b = objects_bundle(vec![text_example(r#"{"objects": []}"#)]).unwrap();
        assert_eq!(a.cache_key("m"), b.cache_key("m"));
        assert_ne!(a.cache_key("m"), a.cache_key("other-model"));
        let c = objects_bundle(vec![
            text_example(r#"{"objects": [{"name": "x", "type": "block"}]}"#),
        ])
        .unwrap();
        assert_ne!(a.cache_key("m"), c.cache_key("m"));
    }

    #[test]
    fn cache_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let cache = ResponseCache::open(dir.path()).unwrap();
        assert!(cache.get("abc").is_none());
        cache.put("abc", "payload").unwrap();
        assert_eq!(cache.get("abc").as_deref(), Some("payload"));
    }
}
