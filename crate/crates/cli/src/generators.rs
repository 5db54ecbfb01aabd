//! Sequence generators: the commutative model sequences discretized on the
//! interval, disjoint-support families, noisy orthogonal families, matrix
//! corners, and random densities. Deterministic for a fixed seed.

use anyhow::{bail, Context};
use num_complex::Complex64;
use serde::Deserialize;
use std::sync::Arc;

use ncl1_core::algebra::{random_suite, AlgebraShape, ElementKind};
use ncl1_core::ortho::ElementSequence;
use ncl1_core::Element;

use crate::config::{AlgebraConfig, GeneratorConfig};

/// Discretized `x_n = n·1_{[0,1/n]}` on a diagonal shape: value `n` on the
/// first `⌊atoms/n⌋` atoms plus one partial atom keeping `‖x_n‖₁ = 1` exactly.
pub fn remark1_element(shape: &Arc<AlgebraShape>, n: u64) -> Element {
    let atoms = shape.num_blocks();
    let full = (atoms as u64 / n) as usize;
    let mut diag = vec![Complex64::ZERO; atoms];
    for d in diag.iter_mut().take(full) {
        *d = Complex64::new(n as f64, 0.0);
    }
    let remainder = 1.0 - (n as f64) * full as f64 / atoms as f64;
    if remainder > 1e-15 && full < atoms {
        diag[full] = Complex64::new(remainder * atoms as f64, 0.0);
    }
    Element::from_diagonal(shape, diag).expect("diagonal shape")
}

/// Discretized `x_n = n²·1_{[1/(n+1),1/n[} + (1/n)·1`.
pub fn remark2_element(shape: &Arc<AlgebraShape>, n: u64) -> Element {
    let atoms = shape.num_blocks() as u64;
    let lo = atoms / (n + 1); // atoms with index > lo lie above 1/(n+1)
    let hi = atoms / n;
    let background = 1.0 / n as f64;
    let mut diag = vec![Complex64::new(background, 0.0); atoms as usize];
    for d in diag.iter_mut().take(hi as usize).skip(lo as usize) {
        *d += Complex64::new((n * n) as f64, 0.0);
    }
    Element::from_diagonal(shape, diag).expect("diagonal shape")
}

/// Lazily evaluated remark-1 sequence at the given indices; only requested
/// members are materialized (a 2^20-atom element is 16 MB).
pub struct Remark1Source {
    shape: Arc<AlgebraShape>,
    indices: Vec<u64>,
}

impl Remark1Source {
    pub fn new(atoms: usize, indices: Vec<u64>) -> anyhow::Result<Remark1Source> {
        let shape = AlgebraShape::discretized_interval(atoms)?;
        for &n in &indices {
            if n == 0 || n > atoms as u64 {
                bail!("remark1 index {n} out of range 1..={atoms}");
            }
        }
        Ok(Remark1Source { shape, indices })
    }

    pub fn shape(&self) -> &Arc<AlgebraShape> {
        &self.shape
    }

    pub fn indices(&self) -> &[u64] {
        &self.indices
    }
}

impl ElementSequence for Remark1Source {
    fn len(&self) -> usize {
        self.indices.len()
    }
    fn get(&self, i: usize) -> Element {
        remark1_element(&self.shape, self.indices[i])
    }
}

/// A generated prefix: either materialized or generator-backed.
pub enum GeneratedSequence {
    Materialized(Vec<Element>),
    Remark1(Remark1Source),
}

impl GeneratedSequence {
    pub fn len(&self) -> usize {
        match self {
            GeneratedSequence::Materialized(v) => v.len(),
            GeneratedSequence::Remark1(s) => s.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn as_sequence(&self) -> &dyn ElementSequence {
        match self {
            GeneratedSequence::Materialized(v) => v,
            GeneratedSequence::Remark1(s) => s,
        }
    }

    pub fn get(&self, i: usize) -> Element {
        self.as_sequence().get(i)
    }

    /// Source index (into the mathematical sequence) of prefix position `i`.
    pub fn source_index(&self, i: usize) -> u64 {
        match self {
            GeneratedSequence::Materialized(_) => i as u64 + 1,
            GeneratedSequence::Remark1(s) => s.indices()[i],
        }
    }

    pub fn materialize(&self) -> Vec<Element> {
        (0..self.len()).map(|i| self.get(i)).collect()
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Remark1Params {
    #[serde(default = "default_atoms")]
    atoms: usize,
    #[serde(default = "default_len")]
    len: usize,
    #[serde(default)]
    indices: IndexMode,
}

#[derive(Deserialize, Default, PartialEq)]
#[serde(rename_all = "snake_case")]
enum IndexMode {
    #[default]
    Dense,
    Dyadic,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Remark2Params {
    #[serde(default = "default_atoms_small")]
    atoms: usize,
    #[serde(default = "default_len")]
    len: usize,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CountParams {
    #[serde(default = "default_members")]
    n: usize,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct NoiseParams {
    #[serde(default = "default_members")]
    n: usize,
    #[serde(default = "default_noise")]
    noise: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CornerParams {
    #[serde(default = "default_corner_dim")]
    dim: usize,
    #[serde(default = "default_len")]
    len: usize,
}

fn default_atoms() -> usize {
    1 << 20
}
fn default_atoms_small() -> usize {
    1 << 12
}
fn default_len() -> usize {
    16
}
fn default_members() -> usize {
    8
}
fn default_noise() -> f64 {
    1e-4
}
fn default_corner_dim() -> usize {
    16
}

fn parse_params<T: serde::de::DeserializeOwned>(g: &GeneratorConfig) -> anyhow::Result<T> {
    let v = if g.params.is_null() {
        serde_json::json!({})
    } else {
        g.params.clone()
    };
    serde_json::from_value(v).with_context(|| format!("bad parameters for generator {}", g.name))
}

/// The noisy orthogonal family on `⊕_n M₂`: one normalized positive density
/// per block plus `noise` times a normalized generic density across the whole
/// algebra, renormalized.
pub fn orthogonal_plus_noise(n: usize, noise: f64, seed: u64) -> anyhow::Result<Vec<Element>> {
    if n == 0 {
        bail!("need n >= 1 members");
    }
    if noise < 0.0 {
        bail!("noise must be nonnegative");
    }
    let shape = AlgebraShape::new(vec![2; n], vec![1.0 / (2 * n) as f64; n])?;
    let mut out = Vec::with_capacity(n);
    for k in 0..n {
        let base = random_suite(&shape, ElementKind::Positive, seed.wrapping_add(k as u64));
        let mut blocks = base.blocks_dense();
        for (j, b) in blocks.iter_mut().enumerate() {
            if j != k {
                b.fill(Complex64::ZERO);
            }
        }
        let core = Element::from_blocks(&shape, blocks)?;
        let core = core.scale(1.0 / core.norm_l1());
        let g = random_suite(
            &shape,
            ElementKind::Generic,
            seed.wrapping_add(1000).wrapping_add(k as u64),
        );
        let g = g.scale(1.0 / g.norm_l1());
        let d = core.add(&g.scale(noise))?;
        out.push(d.scale(1.0 / d.norm_l1()));
    }
    Ok(out)
}

/// Dispatch a named generator.
pub fn generate_sequence(
    g: &GeneratorConfig,
    algebra: Option<&AlgebraConfig>,
    seed: u64,
) -> anyhow::Result<GeneratedSequence> {
    match g.name.as_str() {
        "remark1" => {
            let p: Remark1Params = parse_params(g)?;
            let indices: Vec<u64> = match p.indices {
                IndexMode::Dense => (1..=p.len as u64).collect(),
                IndexMode::Dyadic => (0..p.len as u32)
                    .map(|k| 1u64 << k)
                    .take_while(|&n| n <= p.atoms as u64)
                    .collect(),
            };
            Ok(GeneratedSequence::Remark1(Remark1Source::new(
                p.atoms, indices,
            )?))
        }
        "remark2" | "remark2_unbounded" => {
            let p: Remark2Params = parse_params(g)?;
            let shape = AlgebraShape::discretized_interval(p.atoms)?;
            if (p.len as u64 + 1) * (p.len as u64 + 1) > p.atoms as u64 {
                bail!(
                    "remark2 needs atoms >= (len+1)^2 to resolve the humps (len {}, atoms {})",
                    p.len,
                    p.atoms
                );
            }
            let unbounded = g.name == "remark2_unbounded";
            let xs = (1..=p.len as u64)
                .map(|n| {
                    let x = remark2_element(&shape, n);
                    if unbounded {
                        x.scale((n * n) as f64)
                    } else {
                        x
                    }
                })
                .collect();
            Ok(GeneratedSequence::Materialized(xs))
        }
        "disjoint_supports" => {
            let p: CountParams = parse_params(g)?;
            if p.n == 0 {
                bail!("need n >= 1");
            }
            let atoms = 4 * p.n;
            let shape = AlgebraShape::discretized_interval(atoms)?;
            let xs = (0..p.n)
                .map(|k| {
                    let mut diag = vec![Complex64::ZERO; atoms];
                    for d in diag.iter_mut().skip(4 * k).take(4) {
                        *d = Complex64::new(atoms as f64 / 4.0, 0.0);
                    }
                    Element::from_diagonal(&shape, diag).expect("diagonal shape")
                })
                .collect();
            Ok(GeneratedSequence::Materialized(xs))
        }
        "orthogonal_plus_noise" => {
            let p: NoiseParams = parse_params(g)?;
            Ok(GeneratedSequence::Materialized(orthogonal_plus_noise(
                p.n, p.noise, seed,
            )?))
        }
        "matrix_corner" => {
            let p: CornerParams = parse_params(g)?;
            if p.dim < 2 {
                bail!("matrix_corner needs dim >= 2");
            }
            let shape = AlgebraShape::new(vec![p.dim], vec![1.0 / p.dim as f64])?;
            let xs = (0..p.len)
                .map(|k| {
                    let rank = (p.dim >> k).max(1);
                    let value = p.dim as f64 / rank as f64;
                    let mut x = Element::zeros(&shape);
                    for i in 0..rank {
                        let unit = Element::matrix_unit(&shape, 0, i, i).expect("in range");
                        x = x.add(&unit.scale(value)).expect("same shape");
                    }
                    x
                })
                .collect();
            Ok(GeneratedSequence::Materialized(xs))
        }
        "random_density" => {
            let p: CountParams = parse_params(g)?;
            let shape = match algebra {
                Some(a) => AlgebraShape::new(a.dims.clone(), a.weights.clone())?,
                None => AlgebraShape::new(vec![2, 3], vec![1.0, 0.5])?,
            };
            let xs = (0..p.n)
                .map(|k| {
                    let d = random_suite(&shape, ElementKind::Generic, seed.wrapping_add(k as u64));
                    d.scale(1.0 / d.norm_l1())
                })
                .collect();
            Ok(GeneratedSequence::Materialized(xs))
        }
        other => bail!("unknown generator '{other}'"),
    }
}
