//! Deterministic procedural stand-in for a text-to-3D model.
//!
//! Prompt words are looked up in a keyword table to pick a base primitive,
//! attached features, scale modifiers and a pitch angle. Words that match no
//! keyword are hashed, together with the seed, into a bounded per-axis scale
//! perturbation. The result is a set of closed shells in canonical pose: +x
//! forward, +z up.

use std::collections::HashMap;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::domain::{parse_prompt, Tokenizer, WhitespaceTokenizer};
use crate::error::{Error, Result};
use crate::lexicon::{base_form, is_stopword, letter_tokens};
use crate::mesh::{cuboid, icosphere, rotate, tapered_box, PhenotypeMesh, Provenance};
use crate::phenogen::GeneratorOracle;
use crate::seed::{combine, fnv1a, mix64, unit_signed};

const KEYWORD_TABLE: &str = include_str!("../../data/keyword_table.txt");

/// Largest relative scale perturbation from unmatched words and the seed.
pub const PERTURBATION_BOUND: f64 = 0.2;
const SEED_PERTURBATION_SHARE: f64 = 0.3;
const PITCH_NOISE_DEGREES: f64 = 2.0;
const MAX_PITCH_DEGREES: f64 = 15.0;
const SPHERE_SUBDIVISIONS: u32 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BaseShape {
    Box,
    Ellipsoid,
    Wedge,
    FuselageWithWings,
}

impl BaseShape {
    pub fn tag(self) -> &'static str {
        match self {
            BaseShape::Box => "shape:box",
            BaseShape::Ellipsoid => "shape:ellipsoid",
            BaseShape::Wedge => "shape:wedge",
            BaseShape::FuselageWithWings => "shape:fuselage",
        }
    }

    fn base_proportions(self) -> [f64; 3] {
        match self {
            BaseShape::Box => [1.6, 1.0, 0.9],
            BaseShape::Ellipsoid => [1.6, 1.0, 0.8],
            BaseShape::Wedge => [1.8, 1.0, 0.8],
            BaseShape::FuselageWithWings => [2.0, 1.8, 1.0],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrimitiveRecipe {
    pub base: BaseShape,
    /// Full body extents along x, y, z; all positive.
    pub scale: [f64; 3],
    pub spoiler: bool,
    pub canard: bool,
    pub tail: bool,
    pub pitch_degrees: f64,
    pub perturbation_seed: u64,
}

impl PrimitiveRecipe {
    /// A plain recipe with no features, pitch or perturbation.
    pub fn plain(base: BaseShape, scale: [f64; 3]) -> Self {
        PrimitiveRecipe {
            base,
            scale,
            spoiler: false,
            canard: false,
            tail: false,
            pitch_degrees: 0.0,
            perturbation_seed: 0,
        }
    }

    pub fn tags(&self) -> Vec<String> {
        let mut tags = vec![self.base.tag().to_string()];
        for (on, tag) in [
            (self.spoiler, "flag:spoiler"),
            (self.canard, "flag:canard"),
            (self.tail, "flag:tail"),
        ] {
            if on {
                tags.push(tag.to_string());
            }
        }
        tags
    }

    /// Emits the closed triangulation of the recipe.
    pub fn build_mesh(&self) -> Result<PhenotypeMesh> {
        if self.scale.iter().any(|&s| !(s > 0.0 && s.is_finite())) {
            return Err(Error::GenerationFailure(format!(
                "recipe scales must be positive, got {:?}",
                self.scale
            )));
        }
        let [sx, sy, sz] = self.scale;
        let (mut mesh, top) = match self.base {
            BaseShape::Box => (cuboid([0.0; 3], self.scale), sz / 2.0),
            BaseShape::Wedge => (
                tapered_box(
                    [0.0; 3],
                    self.scale,
                    [-sz / 2.0, sz / 2.0],
                    [-sz / 2.0, -sz / 2.0 + 0.3 * sz],
                ),
                sz / 2.0,
            ),
            BaseShape::Ellipsoid => {
                let s = icosphere(SPHERE_SUBDIVISIONS);
                (
                    s.map_vertices(|v| [v[0] * sx / 2.0, v[1] * sy / 2.0, v[2] * sz / 2.0]),
                    sz / 2.0,
                )
            }
            BaseShape::FuselageWithWings => {
                let body = icosphere(SPHERE_SUBDIVISIONS)
                    .map_vertices(|v| [v[0] * sx / 2.0, v[1] * sy * 0.09, v[2] * sz * 0.2]);
                let mut m = body;
                m.append(&cuboid([0.0; 3], [sx * 0.28, sy, sz * 0.05]));
                (m, sz * 0.2)
            }
        };
        if self.spoiler {
            mesh.append(&cuboid(
                [-0.45 * sx, 0.0, top + 0.08 * sz],
                [0.1 * sx, 0.8 * sy, 0.04 * sz],
            ));
        }
        if self.canard {
            mesh.append(&cuboid([0.35 * sx, 0.0, 0.0], [0.1 * sx, 0.45 * sy, 0.03 * sz]));
        }
        if self.tail {
            mesh.append(&cuboid(
                [-0.42 * sx, 0.0, top * 0.5 + 0.15 * sz],
                [0.12 * sx, 0.03 * sy, 0.3 * sz],
            ));
        }
        if self.pitch_degrees != 0.0 {
            // nose-up is a negative rotation about +y with +x forward, +z up
            let angle = -self.pitch_degrees.to_radians();
            mesh = mesh.map_vertices(|v| rotate(v, [0.0, 1.0, 0.0], angle));
        }
        mesh.provenance.tags = self.tags();
        mesh.validate()?;
        Ok(mesh)
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Feature {
    Shape(BaseShape),
    Spoiler,
    Canard,
    Tail,
    Scale([f64; 3]),
    Pitch(f64),
}

fn parse_feature(spec: &str) -> Feature {
    let (kind, value) = spec.split_once(':').unwrap_or_else(|| panic!("bad feature {spec}"));
    match kind {
        "shape" => Feature::Shape(match value {
            "box" => BaseShape::Box,
            "ellipsoid" => BaseShape::Ellipsoid,
            "wedge" => BaseShape::Wedge,
            "fuselage" => BaseShape::FuselageWithWings,
            _ => panic!("unknown shape {value}"),
        }),
        "flag" => match value {
            "spoiler" => Feature::Spoiler,
            "canard" => Feature::Canard,
            "tail" => Feature::Tail,
            _ => panic!("unknown flag {value}"),
        },
        "scale" => {
            let (axes, factor) = value.split_once('=').expect("scale needs '='");
            let factor: f64 = factor.parse().expect("scale factor");
            let mut s = [1.0; 3];
            for a in axes.chars() {
                s[match a {
                    'x' => 0,
                    'y' => 1,
                    'z' => 2,
                    _ => panic!("unknown axis {a}"),
                }] = factor;
            }
            Feature::Scale(s)
        }
        "pitch" => Feature::Pitch(value.parse().expect("pitch degrees")),
        _ => panic!("unknown feature kind {kind}"),
    }
}

fn keyword_table() -> &'static HashMap<String, Feature> {
    static TABLE: OnceLock<HashMap<String, Feature>> = OnceLock::new();
    TABLE.get_or_init(|| {
        KEYWORD_TABLE
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .map(|l| {
                let mut cols = l.split_whitespace();
                let key = cols.next().expect("keyword").to_string();
                let feature = parse_feature(cols.next().expect("feature"));
                (key, feature)
            })
            .collect()
    })
}

fn lookup(word: &str) -> Option<&'static Feature> {
    let table = keyword_table();
    table.get(word).or_else(|| table.get(&base_form(word)))
}

/// Procedural mock generator. Stateless; a pure function of the prompt key
/// and seed.
#[derive(Debug, Clone, Default)]
pub struct ProceduralGenerator {
    tokenizer: WhitespaceTokenizer,
}

impl ProceduralGenerator {
    pub const NAME: &'static str = "procedural";

    pub fn new() -> Self {
        Self::default()
    }

    /// Derives the recipe for a prompt. Descriptor keywords take priority;
    /// the domain phrase only supplies a fallback base shape.
    pub fn recipe_for(&self, prompt: &str, seed: u64) -> PrimitiveRecipe {
        let lower = prompt.to_lowercase();
        let (domain_words, descriptor_words) = match parse_prompt(&lower) {
            Some(p) => (letter_tokens(&p.domain_phrase), letter_tokens(&p.descriptor)),
            // bare labels like "A car": everything after the article is domain
            None => {
                let words = letter_tokens(&lower);
                let skip = usize::from(matches!(words.first().map(String::as_str), Some("a" | "an")));
                (words[skip..].to_vec(), Vec::new())
            }
        };

        let mut shape = None;
        let mut recipe = PrimitiveRecipe::plain(BaseShape::Box, [1.0; 3]);
        let mut factors = [1.0f64; 3];
        let mut pitch = 0.0;
        let mut unmatched = Vec::new();
        for word in &descriptor_words {
            match lookup(word) {
                Some(Feature::Shape(s)) => {
                    shape.get_or_insert(*s);
                }
                Some(Feature::Spoiler) => recipe.spoiler = true,
                Some(Feature::Canard) => recipe.canard = true,
                Some(Feature::Tail) => recipe.tail = true,
                Some(Feature::Scale(s)) => {
                    for i in 0..3 {
                        factors[i] *= s[i];
                    }
                }
                Some(Feature::Pitch(p)) => pitch += p,
                None if !is_stopword(word) => unmatched.push(word.as_str()),
                None => {}
            }
        }
        if shape.is_none() {
            shape = domain_words.iter().find_map(|w| match lookup(w) {
                Some(Feature::Shape(s)) => Some(*s),
                _ => None,
            });
        }
        recipe.base = shape.unwrap_or(BaseShape::Box);

        let word_hash = fnv1a(unmatched.join(" ").as_bytes());
        let base = recipe.base.base_proportions();
        for axis in 0..3 {
            let from_words = unit_signed(mix64(word_hash ^ (axis as u64 + 1)));
            let from_seed = unit_signed(combine(&[seed, axis as u64]));
            let u = (1.0 - SEED_PERTURBATION_SHARE) * from_words + SEED_PERTURBATION_SHARE * from_seed;
            let f = factors[axis].clamp(0.25, 4.0);
            recipe.scale[axis] = base[axis] * f * (1.0 + PERTURBATION_BOUND * u);
        }
        let pitch_noise = PITCH_NOISE_DEGREES * unit_signed(combine(&[seed, word_hash, 3]));
        recipe.pitch_degrees = (pitch + pitch_noise).clamp(-MAX_PITCH_DEGREES, MAX_PITCH_DEGREES);
        recipe.perturbation_seed = seed;
        recipe
    }
}

impl GeneratorOracle for ProceduralGenerator {
    fn name(&self) -> &str {
        Self::NAME
    }

    fn tokenizer(&self) -> &dyn Tokenizer {
        &self.tokenizer
    }

    fn vocabulary_size(&self) -> usize {
        keyword_table().len()
    }

    fn generate_text(&self, prompt: &str, seed: u64) -> Result<PhenotypeMesh> {
        let mut mesh = self.recipe_for(prompt, seed).build_mesh()?;
        mesh.provenance = Provenance {
            generator: Self::NAME.to_string(),
            ..mesh.provenance
        };
        Ok(mesh)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{render_prompt, Task};
    use crate::phenogen::generate;

    fn signed_volume_by_divergence(m: &PhenotypeMesh) -> f64 {
        // ∫ x n_x dA over the closed surface, independent of the tetrahedron sum
        (0..m.triangles.len())
            .map(|t| {
                let [a, b, c] = m.corners(t);
                let n = m.scaled_normal(t);
                let cx = (a[0] + b[0] + c[0]) / 3.0;
                0.5 * n[0] * cx
            })
            .sum()
    }

    #[test]
    fn unit_box_recipe_is_unit_cube() {
        let m = PrimitiveRecipe::plain(BaseShape::Box, [1.0; 3]).build_mesh().unwrap();
        assert_eq!(m.triangles.len(), 12);
        assert_eq!(m.vertices.len(), 8);
        let (lo, hi) = m.bounds();
        assert_eq!(lo, [-0.5; 3]);
        assert_eq!(hi, [0.5; 3]);
        assert!((signed_volume_by_divergence(&m) - 1.0).abs() < 1e-12);
        assert!((m.signed_volume() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn keyword_table_drives_shape() {
        let g = ProceduralGenerator::new();
        let tok = WhitespaceTokenizer::default();
        let car = Task::new(1, "car");
        let geno = render_prompt(&car, "a wedge", &tok).unwrap();
        let m = generate(&g, &geno, 3, Some(1), 0).unwrap();
        assert!(m.provenance.tags.contains(&"shape:wedge".to_string()));
        assert!(!m.triangles.is_empty());
        assert_eq!(g.recipe_for("A car in the shape of a swept wing.", 1).base, BaseShape::FuselageWithWings);
        assert_eq!(g.recipe_for("A car in the shape of a mysterious shadow.", 1).base, BaseShape::Box);
        assert_eq!(g.recipe_for("A airplane in the shape of a mysterious shadow.", 1).base, BaseShape::FuselageWithWings);
        assert_eq!(g.recipe_for("A airplane", 1).base, BaseShape::FuselageWithWings);
        assert_eq!(g.recipe_for("A car in the shape of jets with wings.", 1).base, BaseShape::FuselageWithWings);
    }

    #[test]
    fn deterministic_in_prompt_and_seed() {
        let g = ProceduralGenerator::new();
        let a = g.generate_text("A car in the shape of a sleek wedge with a spoiler.", 9).unwrap();
        let b = g.generate_text("A car in the shape of a sleek wedge with a spoiler.", 9).unwrap();
        assert_eq!(a.vertices, b.vertices);
        assert_eq!(a.triangles, b.triangles);
        let c = g.generate_text("A car in the shape of a sleek wedge with a spoiler.", 10).unwrap();
        assert_ne!(a.vertices, c.vertices);
    }

    #[test]
    fn perturbation_bounded() {
        let g = ProceduralGenerator::new();
        for seed in 0..200 {
            let r = g.recipe_for("A car in the shape of a box with mysterious zebra stripes.", seed);
            let base = BaseShape::Box.base_proportions();
            for i in 0..3 {
                let rel = r.scale[i] / base[i];
                assert!((1.0 - PERTURBATION_BOUND..=1.0 + PERTURBATION_BOUND).contains(&rel));
            }
        }
    }

    #[test]
    fn all_recipes_watertight() {
        for base in [BaseShape::Box, BaseShape::Ellipsoid, BaseShape::Wedge, BaseShape::FuselageWithWings] {
            let mut r = PrimitiveRecipe::plain(base, [1.7, 1.1, 0.6]);
            r.spoiler = true;
            r.canard = true;
            r.tail = true;
            r.pitch_degrees = 4.0;
            let m = r.build_mesh().unwrap();
            assert!(m.is_watertight(), "{base:?}");
            assert!(m.signed_volume() > 0.0);
        }
    }

    #[test]
    fn nonpositive_scale_fails() {
        assert!(matches!(
            PrimitiveRecipe::plain(BaseShape::Box, [1.0, 0.0, 1.0]).build_mesh(),
            Err(Error::GenerationFailure(_))
        ));
    }

    #[test]
    fn over_budget_genotype_rejected() {
        let g = ProceduralGenerator::new();
        let tok = WhitespaceTokenizer { max_tokens: 200 };
        let long = vec!["word"; 80].join(" ");
        let geno = render_prompt(&Task::new(1, "car"), &long, &tok).unwrap();
        assert!(matches!(
            generate(&g, &geno, 0, None, 0),
            Err(Error::TokenBudgetExceeded { .. })
        ));
    }
}
