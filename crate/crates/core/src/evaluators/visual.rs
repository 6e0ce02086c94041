use std::collections::HashMap;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::domain::Task;
use crate::error::{Error, Result};
use crate::lexicon::letter_tokens;
use crate::mesh::PhenotypeMesh;
use crate::phenogen::{write_mesh, MeshFormat};
use crate::remote::{RemoteEndpoint, VLM_ENDPOINT_VAR, VLM_KEY_VAR};
use crate::seed::fnv1a;

const VISUAL_TAGS: &str = include_str!("../../data/visual_tags.txt");
const VISUAL_PROTOTYPES: &str = include_str!("../../data/visual_prototypes.txt");

/// A vision-language model judging how much a shape looks like a task's
/// domain.
pub trait VisualOracle: Send + Sync {
    fn name(&self) -> &str;

    fn deterministic(&self) -> bool {
        true
    }

    fn concurrent(&self) -> bool {
        true
    }

    /// Probability-like conformity score of `mesh` to `task`.
    fn score(&self, mesh: &PhenotypeMesh, task: &Task) -> Result<f64>;
}

/// Validated, range-clamped visual score.
pub fn visual_score(oracle: &dyn VisualOracle, mesh: &PhenotypeMesh, task: &Task) -> Result<f64> {
    mesh.validate()?;
    let s = oracle.score(mesh, task)?;
    if !s.is_finite() {
        return Err(Error::oracle(oracle.name(), format!("non-finite score {s}")));
    }
    Ok(s.clamp(0.0, 1.0))
}

fn table_lines(text: &str) -> impl Iterator<Item = Vec<&str>> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(|l| l.split_whitespace().collect())
}

type TagWeights = HashMap<String, HashMap<String, f64>>;

fn tag_weights() -> &'static TagWeights {
    static TABLE: OnceLock<TagWeights> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut t: TagWeights = HashMap::new();
        for cols in table_lines(VISUAL_TAGS) {
            t.entry(cols[0].to_string())
                .or_default()
                .insert(cols[1].to_string(), cols[2].parse().expect("tag weight"));
        }
        t
    })
}

fn prototypes() -> &'static HashMap<String, (f64, f64)> {
    static TABLE: OnceLock<HashMap<String, (f64, f64)>> = OnceLock::new();
    TABLE.get_or_init(|| {
        table_lines(VISUAL_PROTOTYPES)
            .map(|c| (c[0].to_string(), (c[1].parse().expect("ratio"), c[2].parse().expect("ratio"))))
            .collect()
    })
}

/// Mock vision-language model.
///
/// Score = 0.8 · clamp(Σ tag weights) + 0.2 · proportion match, where the tag
/// weights come from the phenotype's recipe tags looked up in a fixed
/// per-domain table and the proportion match compares bounding-box ratios
/// with a per-domain prototype. Domains without a table entry are matched
/// through their last known word ("banana car" → "car"), else judged on
/// proportions alone.
#[derive(Debug, Clone, Default)]
pub struct TagTableVisual;

impl TagTableVisual {
    pub const NAME: &'static str = "tag-table";

    fn domain_key(task: &Task) -> Option<String> {
        letter_tokens(&task.domain_phrase)
            .into_iter()
            .rev()
            .find(|w| tag_weights().contains_key(w))
    }

    fn proportion_match(mesh: &PhenotypeMesh, proto: (f64, f64)) -> f64 {
        let e = mesh.extents();
        let (l, w, h) = (e[0].max(1e-9), e[1].max(1e-9), e[2].max(1e-9));
        let d = ((l / w) / proto.0).ln().abs() + ((h / w) / proto.1).ln().abs();
        (-d).exp()
    }
}

impl VisualOracle for TagTableVisual {
    fn name(&self) -> &str {
        Self::NAME
    }

    fn score(&self, mesh: &PhenotypeMesh, task: &Task) -> Result<f64> {
        let Some(domain) = Self::domain_key(task) else {
            let pm = Self::proportion_match(mesh, (1.6, 0.5));
            return Ok(0.25 + 0.5 * pm);
        };
        let weights = &tag_weights()[&domain];
        let tag_sum: f64 = mesh
            .provenance
            .tags
            .iter()
            .filter_map(|t| weights.get(t))
            .sum();
        let proto = prototypes().get(&domain).copied().unwrap_or((1.6, 0.5));
        let pm = Self::proportion_match(mesh, proto);
        Ok((0.8 * tag_sum.clamp(0.0, 1.0) + 0.2 * pm).clamp(0.0, 1.0))
    }
}

#[derive(Debug, Serialize)]
struct VisualRequest<'a> {
    task_label: &'a str,
    domain_phrase: &'a str,
    geometry_hash: String,
    mesh_obj: String,
}

#[derive(Debug, Deserialize)]
struct VisualResponse {
    score: f64,
}

/// HTTP/JSON adapter: POST `{task_label, domain_phrase, geometry_hash,
/// mesh_obj}` and read `{score}`.
#[derive(Debug, Clone)]
pub struct RemoteVisual {
    endpoint: RemoteEndpoint,
}

impl RemoteVisual {
    pub const NAME: &'static str = "remote-vlm";

    pub fn new(endpoint: RemoteEndpoint) -> Self {
        RemoteVisual { endpoint }
    }

    pub fn from_env() -> Result<Self> {
        Ok(Self::new(RemoteEndpoint::from_env(VLM_ENDPOINT_VAR, VLM_KEY_VAR)?))
    }
}

impl VisualOracle for RemoteVisual {
    fn name(&self) -> &str {
        Self::NAME
    }

    fn deterministic(&self) -> bool {
        false
    }

    fn score(&self, mesh: &PhenotypeMesh, task: &Task) -> Result<f64> {
        let obj = String::from_utf8(write_mesh(mesh, MeshFormat::Obj)).expect("obj is utf-8");
        let body = VisualRequest {
            task_label: &task.task_label,
            domain_phrase: &task.domain_phrase,
            geometry_hash: format!("{:016x}", fnv1a(obj.as_bytes())),
            mesh_obj: obj,
        };
        let resp: VisualResponse = self.endpoint.post_json(Self::NAME, &body)?;
        Ok(resp.score)
    }
}
