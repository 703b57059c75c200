//! Rule authoring through a vision-language endpoint.
//!
//! A staged pipeline turns a domain description plus a rendered scene into
//! declarative constraint rules: the model first interprets the scene, then
//! articulates feasibility principles in prose, then encodes them in the
//! rule grammar, and finally proofreads its own output. Rules that fail to
//! parse or validate are sent back for a bounded number of repair rounds.
//!
//! Every exchange goes through a [`ChatEndpoint`]. The live endpoint talks
//! HTTP; the replay endpoint serves committed responses keyed by a hash of
//! the exact prompt, which makes every test and experiment reproducible
//! offline, byte for byte.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::constraints::{self, RuleSet};
use crate::pddl::DomainModel;

#[derive(Debug, thiserror::Error)]
pub enum VrmError {
    #[error("endpoint error: {0}")]
    Http(String),
    #[error("replay cache miss at stage {stage} (prompt hash {hash})")]
    CacheMiss { stage: String, hash: String },
    #[error("stage {stage} produced invalid rules after {rounds} repair rounds: {msg}")]
    InvalidRules {
        stage: String,
        rounds: usize,
        msg: String,
    },
    #[error("missing environment variable {0}")]
    MissingEnv(String),
    #[error("replay store: {0}")]
    Io(#[from] std::io::Error),
}

pub trait ChatEndpoint {
    fn chat(&self, stage: &str, prompt: &str) -> Result<String, VrmError>;
}

/// Key of one exchange in the replay store: the stage name is folded into
/// the hash so identical prompts at different stages stay distinct.
pub fn prompt_hash(stage: &str, prompt: &str) -> String {
    let mut hasher = Sha256::new();
    hasher.update(stage.as_bytes());
    hasher.update(b"\n");
    hasher.update(prompt.as_bytes());
    let digest = hasher.finalize();
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageRecord {
    pub stage: String,
    pub prompt: String,
    pub response: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct VrmTranscript {
    pub stages: Vec<StageRecord>,
}

/// OpenAI-style chat completion endpoint, configured from the environment:
/// `TAMPKIT_VRM_URL`, `TAMPKIT_VRM_KEY`, `TAMPKIT_VRM_MODEL`.
pub struct LiveEndpoint {
    base_url: String,
    api_key: String,
    model: String,
}

impl LiveEndpoint {
    pub fn from_env() -> Result<Self, VrmError> {
        let var = |name: &str| {
            std::env::var(name).map_err(|_| VrmError::MissingEnv(name.to_string()))
        };
        Ok(LiveEndpoint {
            base_url: var("TAMPKIT_VRM_URL")?,
            api_key: var("TAMPKIT_VRM_KEY")?,
            model: var("TAMPKIT_VRM_MODEL")?,
        })
    }
}

impl ChatEndpoint for LiveEndpoint {
    fn chat(&self, _stage: &str, prompt: &str) -> Result<String, VrmError> {
        let url = format!("{}/v1/chat/completions", self.base_url.trim_end_matches('/'));
        let body = serde_json::json!({
            "model": self.model,
            "messages": [{"role": "user", "content": prompt}],
        });
        let response: serde_json::Value = ureq::post(&url)
            .set("Authorization", &format!("Bearer {}", self.api_key))
            .send_json(body)
            .map_err(|e| VrmError::Http(e.to_string()))?
            .into_json()
            .map_err(|e| VrmError::Http(e.to_string()))?;
        response["choices"][0]["message"]["content"]
            .as_str()
            .map(|s| s.to_string())
            .ok_or_else(|| VrmError::Http("response carries no message content".into()))
    }
}

/// Serves recorded responses from a directory of `<hash>.json` files and
/// fails loudly on any prompt that was never recorded.
pub struct ReplayEndpoint {
    dir: PathBuf,
}

impl ReplayEndpoint {
    pub fn new(dir: impl AsRef<Path>) -> Self {
        ReplayEndpoint {
            dir: dir.as_ref().to_path_buf(),
        }
    }
}

impl ChatEndpoint for ReplayEndpoint {
    fn chat(&self, stage: &str, prompt: &str) -> Result<String, VrmError> {
        let hash = prompt_hash(stage, prompt);
        let path = self.dir.join(format!("{hash}.json"));
        if !path.exists() {
            return Err(VrmError::CacheMiss {
                stage: stage.to_string(),
                hash,
            });
        }
        let record: StageRecord = serde_json::from_str(&std::fs::read_to_string(path)?)
            .map_err(|e| VrmError::Http(format!("corrupt replay record: {e}")))?;
        Ok(record.response)
    }
}

/// Wraps another endpoint and records every exchange into a replay
/// directory, creating it on first use.
pub struct RecordingEndpoint<E> {
    inner: E,
    dir: PathBuf,
}

impl<E: ChatEndpoint> RecordingEndpoint<E> {
    pub fn new(inner: E, dir: impl AsRef<Path>) -> Self {
        RecordingEndpoint {
            inner,
            dir: dir.as_ref().to_path_buf(),
        }
    }
}

impl<E: ChatEndpoint> ChatEndpoint for RecordingEndpoint<E> {
    fn chat(&self, stage: &str, prompt: &str) -> Result<String, VrmError> {
        let response = self.inner.chat(stage, prompt)?;
        std::fs::create_dir_all(&self.dir)?;
        let hash = prompt_hash(stage, prompt);
        let record = StageRecord {
            stage: stage.to_string(),
            prompt: prompt.to_string(),
            response: response.clone(),
        };
        std::fs::write(
            self.dir.join(format!("{hash}.json")),
            serde_json::to_string_pretty(&record).expect("stage record serializes"),
        )?;
        Ok(response)
    }
}

/// Everything the pipeline needs to author rules for one domain.
pub struct VrmRequest<'a> {
    pub domain_text: &'a str,
    pub domain: &'a DomainModel,
    /// Initial scene as JSON, exactly what the refinement oracle consumes.
    pub scene_json: &'a str,
    /// Rendered scene image; only its digest enters the prompt text.
    pub image_png: Option<&'a [u8]>,
    /// Attribute names guards may reference.
    pub attributes: BTreeSet<String>,
    pub max_repair_rounds: usize,
}

impl<'a> VrmRequest<'a> {
    pub fn new(
        domain_text: &'a str,
        domain: &'a DomainModel,
        scene_json: &'a str,
        image_png: Option<&'a [u8]>,
        attributes: BTreeSet<String>,
    ) -> Self {
        VrmRequest {
            domain_text,
            domain,
            scene_json,
            image_png,
            attributes,
            max_repair_rounds: 2,
        }
    }

    fn image_line(&self) -> String {
        match self.image_png {
            Some(bytes) => {
                let mut hasher = Sha256::new();
                hasher.update(bytes);
                let digest = hasher.finalize();
                let hex: String = digest.iter().map(|b| format!("{b:02x}")).collect();
                format!("[scene image attached, sha256 {hex}]")
            }
            None => "[no scene image attached]".to_string(),
        }
    }

    fn grammar_help(&self) -> String {
        format!(
            "Rules use this grammar, one rule per top-level form:\n\
             (forbid (<action> ?param...)\n\
             \x20 :when (exists ((?var <type>) ...) (and (<predicate> <arg>...) ...))\n\
             \x20 :guard (and (<op> <operand> <operand>) ...))\n\
             where <op> is one of = != < <= > >= and an operand is either an\n\
             integer or (attr <name> ?var). Available attributes: {}.\n\
             Untyped binders (exists (?v ...) ...) are also accepted.",
            self.attributes
                .iter()
                .cloned()
                .collect::<Vec<_>>()
                .join(", ")
        )
    }
}

/// Strips a Markdown code fence if the response is wrapped in one.
fn strip_fences(response: &str) -> &str {
    let trimmed = response.trim();
    let Some(rest) = trimmed.strip_prefix("```") else {
        return trimmed;
    };
    let rest = match rest.find('\n') {
        Some(i) => &rest[i + 1..],
        None => rest,
    };
    rest.strip_suffix("```").unwrap_or(rest).trim()
}

fn parse_stage_output(
    text: &str,
    req: &VrmRequest,
) -> Result<RuleSet, constraints::RuleError> {
    constraints::parse_rules(strip_fences(text), req.domain, &req.attributes)
}

fn run_stage(
    endpoint: &dyn ChatEndpoint,
    transcript: &mut VrmTranscript,
    stage: &str,
    prompt: String,
) -> Result<String, VrmError> {
    let response = endpoint.chat(stage, &prompt)?;
    transcript.stages.push(StageRecord {
        stage: stage.to_string(),
        prompt,
        response: response.clone(),
    });
    Ok(response)
}

/// Bounded repair loop shared by both pipelines: re-prompts with the
/// validation error until the rules parse or the budget runs out.
fn repair_until_valid(
    endpoint: &dyn ChatEndpoint,
    transcript: &mut VrmTranscript,
    req: &VrmRequest,
    first_stage: &str,
    mut candidate: String,
    max_rounds: usize,
) -> Result<RuleSet, VrmError> {
    let mut last_err = match parse_stage_output(&candidate, req) {
        Ok(rules) => return Ok(rules),
        Err(e) => e,
    };
    for round in 1..=max_rounds {
        let stage = format!("repair-{round}");
        let prompt = format!(
            "The rules you produced failed to validate.\n\
             Error: {last_err}\n\n\
             Rules:\n{}\n\n\
             {}\n\
             Output the corrected rules only, no commentary.",
            strip_fences(&candidate),
            req.grammar_help(),
        );
        candidate = run_stage(endpoint, transcript, &stage, prompt)?;
        match parse_stage_output(&candidate, req) {
            Ok(rules) => return Ok(rules),
            Err(e) => last_err = e,
        }
    }
    Err(VrmError::InvalidRules {
        stage: first_stage.to_string(),
        rounds: max_rounds,
        msg: last_err.to_string(),
    })
}

/// Four-stage pipeline: interpret the scene, articulate feasibility
/// principles, encode them as rules, proofread, then repair if needed.
pub fn generate_constraints(
    endpoint: &dyn ChatEndpoint,
    req: &VrmRequest,
) -> Result<(RuleSet, VrmTranscript), VrmError> {
    let mut transcript = VrmTranscript::default();

    let interpret = run_stage(
        endpoint,
        &mut transcript,
        "interpret",
        format!(
            "You advise a robot manipulation planner.\n{}\n\
             The scene state is this JSON:\n{}\n\n\
             Describe the spatial arrangement of the scene and which objects\n\
             obstruct access to which other objects or locations.",
            req.image_line(),
            req.scene_json,
        ),
    )?;

    let articulate = run_stage(
        endpoint,
        &mut transcript,
        "articulate",
        format!(
            "Scene analysis:\n{interpret}\n\n\
             The robot plans with this domain:\n{}\n\
             State general principles, in plain English, for when an action in\n\
             this domain is geometrically infeasible even though its symbolic\n\
             preconditions hold. Phrase each principle so it applies to any\n\
             instance of the domain, not just this scene.",
            req.domain_text,
        ),
    )?;

    let encode = run_stage(
        endpoint,
        &mut transcript,
        "encode",
        format!(
            "Feasibility principles:\n{articulate}\n\n\
             {}\n\n\
             Encode each principle as a rule. Use only predicates and actions\n\
             from this domain:\n{}\n\
             Output the rules only.",
            req.grammar_help(),
            req.domain_text,
        ),
    )?;

    let proofread = run_stage(
        endpoint,
        &mut transcript,
        "proofread",
        format!(
            "Review the following rules for syntax errors, unbound variables,\n\
             and unknown predicates or attributes, and fix any problem you\n\
             find. Output the final rules only, no commentary.\n\n{}\n\n{}",
            strip_fences(&encode),
            req.grammar_help(),
        ),
    )?;

    let rules = repair_until_valid(
        endpoint,
        &mut transcript,
        req,
        "proofread",
        proofread,
        req.max_repair_rounds,
    )?;
    Ok((rules, transcript))
}

/// Single-prompt ablation of the pipeline: one exchange, no repair rounds.
pub fn generate_condensed(
    endpoint: &dyn ChatEndpoint,
    req: &VrmRequest,
) -> Result<(RuleSet, VrmTranscript), VrmError> {
    let mut transcript = VrmTranscript::default();
    let response = run_stage(
        endpoint,
        &mut transcript,
        "condensed",
        format!(
            "You advise a robot manipulation planner.\n{}\n\
             The scene state is this JSON:\n{}\n\n\
             The robot plans with this domain:\n{}\n\
             {}\n\n\
             Write rules that forbid every action that is geometrically\n\
             infeasible despite its symbolic preconditions holding.\n\
             Output the rules only, no commentary.",
            req.image_line(),
            req.scene_json,
            req.domain_text,
            req.grammar_help(),
        ),
    )?;
    let rules = parse_stage_output(&response, req).map_err(|e| VrmError::InvalidRules {
        stage: "condensed".into(),
        rounds: 0,
        msg: e.to_string(),
    })?;
    Ok((rules, transcript))
}

pub mod testing {
    //! Scripted endpoint for tests and fixture regeneration: answers by
    //! stage name, independent of the prompt text.

    use std::collections::BTreeMap;

    use super::{ChatEndpoint, VrmError};

    pub struct ScriptedEndpoint {
        responses: BTreeMap<String, String>,
    }

    impl ScriptedEndpoint {
        pub fn new(responses: &[(&str, &str)]) -> Self {
            ScriptedEndpoint {
                responses: responses
                    .iter()
                    .map(|(k, v)| (k.to_string(), v.to_string()))
                    .collect(),
            }
        }
    }

    impl ChatEndpoint for ScriptedEndpoint {
        fn chat(&self, stage: &str, _prompt: &str) -> Result<String, VrmError> {
            self.responses
                .get(stage)
                .cloned()
                .ok_or_else(|| VrmError::Http(format!("no scripted response for stage {stage}")))
        }
    }
}
