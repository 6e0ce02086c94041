//! Phenotype generation: the generator oracle interface, the procedural mock
//! and mesh file I/O.

mod io;
mod procedural;

pub use io::{read_mesh, write_mesh, MeshFormat};
pub use procedural::{BaseShape, PrimitiveRecipe, ProceduralGenerator, PERTURBATION_BOUND};

use crate::domain::{Genotype, Tokenizer};
use crate::error::{Error, Result};
use crate::mesh::PhenotypeMesh;

/// A text-to-3D model.
pub trait GeneratorOracle: Send + Sync {
    fn name(&self) -> &str;

    fn tokenizer(&self) -> &dyn Tokenizer;

    /// Vocabulary size of the tokenizer, metadata only.
    fn vocabulary_size(&self) -> usize;

    /// Whether calls may run concurrently.
    fn concurrent(&self) -> bool {
        true
    }

    /// Generates a mesh from free text. Provenance ids are filled in by
    /// [`generate`]; implementations set `generator` and `tags`.
    fn generate_text(&self, prompt: &str, seed: u64) -> Result<PhenotypeMesh>;

    fn max_prompt_tokens(&self) -> usize {
        self.tokenizer().max_tokens()
    }
}

/// Generates the phenotype of `genotype`, enforcing the prompt budget and the
/// mesh invariants.
pub fn generate(
    oracle: &dyn GeneratorOracle,
    genotype: &Genotype,
    seed: u64,
    genotype_id: Option<u64>,
    generation: u64,
) -> Result<PhenotypeMesh> {
    let limit = oracle.max_prompt_tokens();
    if genotype.token_count > limit {
        return Err(Error::TokenBudgetExceeded {
            count: genotype.token_count,
            limit,
        });
    }
    let mut mesh = oracle.generate_text(&genotype.prompt, seed)?;
    if mesh.triangles.is_empty() {
        return Err(Error::DegenerateMesh(format!(
            "generator `{}` returned zero triangles",
            oracle.name()
        )));
    }
    mesh.validate()?;
    mesh.provenance.genotype_id = genotype_id;
    mesh.provenance.generation = generation;
    mesh.provenance.generator_seed = seed;
    if mesh.provenance.generator.is_empty() {
        mesh.provenance.generator = oracle.name().to_string();
    }
    Ok(mesh)
}
