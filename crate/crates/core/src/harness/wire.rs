//! JSON wire format.
//!
//! ```text
//! matrix    {"re": [[..]], "im": [[..]]}                    row-major
//! algebra   {"blocks": [m1, ..]}
//! state     {"algebra": algebra, "densities": [matrix, ..]}
//! hom       {"source": algebra, "target": algebra,
//!            "mult": [[c_yx]] (one row per source block y),
//!            "conjugators": [matrix, ..]}
//! cpu map   {"source": algebra, "target": algebra,
//!            "components": [{"y": y, "x": x, "choi": matrix}, ..]}
//! morphism  {"source": state, "target": state, "hom": hom, "hypothesis": cpu map}
//! ```
//!
//! A Choi matrix of `Q_yx: M_m → M_n` is the `m·n` square matrix
//! `J = Σ_{ij} E_ij ⊗ Q_yx(E_ij)`, i.e. `J[i·n + a, j·n + b] = Q_yx(E_ij)[a, b]`.
//! The `source`/`target` of a CPU map may be omitted inside a morphism, where
//! they follow from the hom. Components not listed are zero.
//!
//! Doubles are written in shortest round-trip form and parsed with correct
//! rounding, so encode → decode is bit-exact.

use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::algebra::{AlgebraSpec, CMat, State, C64};
use crate::error::{Error, Result};
use crate::hypotheses::{AlphaFamily, Disintegration, NcMorphism, NcObject, Rectification};
use crate::maps::{CpuMap, StarHom};

/// Unitarity tolerance applied to decoded conjugators.
pub const UNITARY_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixDto {
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

impl MatrixDto {
    pub fn encode(m: &CMat) -> Self {
        let rows = |f: fn(&C64) -> f64| {
            (0..m.nrows())
                .map(|i| (0..m.ncols()).map(|j| f(&m[(i, j)])).collect())
                .collect()
        };
        Self {
            re: rows(|z| z.re),
            im: rows(|z| z.im),
        }
    }

    pub fn decode(&self) -> Result<CMat> {
        let rows = self.re.len();
        let cols = self.re.first().map_or(0, Vec::len);
        let ragged = |m: &Vec<Vec<f64>>| m.len() != rows || m.iter().any(|r| r.len() != cols);
        if ragged(&self.re) || ragged(&self.im) {
            return Err(Error::Dimension(
                "matrix \"re\" and \"im\" must be rectangular and of equal shape".into(),
            ));
        }
        Ok(CMat::from_fn(rows, cols, |i, j| {
            C64::new(self.re[i][j], self.im[i][j])
        }))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpecDto {
    pub blocks: Vec<usize>,
}

impl SpecDto {
    pub fn encode(s: &AlgebraSpec) -> Self {
        Self {
            blocks: s.blocks().to_vec(),
        }
    }

    pub fn decode(&self) -> Result<AlgebraSpec> {
        AlgebraSpec::new(self.blocks.clone())
    }
}

fn decode_all(ms: &[MatrixDto]) -> Result<Vec<CMat>> {
    ms.iter().map(MatrixDto::decode).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateDto {
    pub algebra: SpecDto,
    pub densities: Vec<MatrixDto>,
}

impl StateDto {
    pub fn encode(s: &State) -> Self {
        Self {
            algebra: SpecDto::encode(s.spec()),
            densities: s.densities().iter().map(MatrixDto::encode).collect(),
        }
    }

    /// Structural decoding only; use [`State::validate`] for the numerics.
    pub fn decode(&self) -> Result<State> {
        State::new(self.algebra.decode()?, decode_all(&self.densities)?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HomDto {
    pub source: SpecDto,
    pub target: SpecDto,
    pub mult: Vec<Vec<usize>>,
    pub conjugators: Vec<MatrixDto>,
}

impl HomDto {
    pub fn encode(f: &StarHom) -> Self {
        Self {
            source: SpecDto::encode(f.source()),
            target: SpecDto::encode(f.target()),
            mult: f.multiplicities().to_vec(),
            conjugators: f.conjugators().iter().map(MatrixDto::encode).collect(),
        }
    }

    pub fn decode(&self) -> Result<StarHom> {
        StarHom::new(
            self.source.decode()?,
            self.target.decode()?,
            self.mult.clone(),
            decode_all(&self.conjugators)?,
            UNITARY_TOL,
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComponentDto {
    pub y: usize,
    pub x: usize,
    pub choi: MatrixDto,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CpuDto {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<SpecDto>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<SpecDto>,
    pub components: Vec<ComponentDto>,
}

impl CpuDto {
    pub fn encode(q: &CpuMap) -> Self {
        let components = q
            .choi_grid()
            .iter()
            .enumerate()
            .flat_map(|(y, row)| {
                row.iter().enumerate().map(move |(x, j)| ComponentDto {
                    y,
                    x,
                    choi: MatrixDto::encode(j),
                })
            })
            .collect();
        Self {
            source: Some(SpecDto::encode(q.source())),
            target: Some(SpecDto::encode(q.target())),
            components,
        }
    }

    /// Decodes with `source`/`target` taken from the document, or from the
    /// fallbacks when the document omits them.
    pub fn decode_with(&self, source: Option<&AlgebraSpec>, target: Option<&AlgebraSpec>) -> Result<CpuMap> {
        let pick = |own: &Option<SpecDto>, fallback: Option<&AlgebraSpec>, what: &str| match own {
            Some(s) => s.decode(),
            None => fallback
                .cloned()
                .ok_or_else(|| Error::Dimension(format!("CPU map is missing its {what} algebra"))),
        };
        let source = pick(&self.source, source, "source")?;
        let target = pick(&self.target, target, "target")?;
        let mut choi: Vec<Vec<CMat>> = target
            .blocks()
            .iter()
            .map(|&n| {
                source
                    .blocks()
                    .iter()
                    .map(|&m| CMat::zeros(m * n, m * n))
                    .collect()
            })
            .collect();
        for c in &self.components {
            let slot = choi
                .get_mut(c.y)
                .and_then(|row| row.get_mut(c.x))
                .ok_or_else(|| Error::Dimension(format!("component ({}, {}) out of range", c.y, c.x)))?;
            *slot = c.choi.decode()?;
        }
        CpuMap::new(source, target, choi)
    }

    pub fn decode(&self) -> Result<CpuMap> {
        self.decode_with(None, None)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MorphismDto {
    pub source: StateDto,
    pub target: StateDto,
    pub hom: HomDto,
    pub hypothesis: CpuDto,
}

impl MorphismDto {
    pub fn encode(m: &NcMorphism) -> Self {
        Self {
            source: StateDto::encode(m.source().state()),
            target: StateDto::encode(m.target().state()),
            hom: HomDto::encode(m.hom()),
            hypothesis: CpuDto::encode(m.hypothesis()),
        }
    }

    /// Structural decoding; numeric checks are left to [`NcMorphism::validate`].
    pub fn decode(&self) -> Result<NcMorphism> {
        let hom = self.hom.decode()?;
        let q = self
            .hypothesis
            .decode_with(Some(hom.target()), Some(hom.source()))?;
        NcMorphism::new(
            NcObject::unchecked(self.source.decode()?),
            NcObject::unchecked(self.target.decode()?),
            hom,
            q,
        )
    }
}

/// Any document the CLI accepts for validation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Document {
    Morphism(MorphismDto),
    Hom(HomDto),
    State(StateDto),
    Cpu(CpuDto),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RectifyDto {
    /// The conjugators `U` of the original hom.
    pub u: Vec<MatrixDto>,
    pub morphism: MorphismDto,
}

impl RectifyDto {
    pub fn encode(r: &Rectification) -> Self {
        Self {
            u: r.u.iter().map(MatrixDto::encode).collect(),
            morphism: MorphismDto::encode(&r.morphism),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum DisintegrationDto {
    Optimal {
        morphism: MorphismDto,
        /// `α_yx`, one row per source block.
        alphas: Vec<Vec<MatrixDto>>,
        unconstrained: Vec<bool>,
    },
    NoDisintegration {
        reason: String,
        residual: f64,
    },
}

impl DisintegrationDto {
    pub fn encode(d: &Disintegration) -> Self {
        match d {
            Disintegration::Optimal { morphism, alphas } => Self::Optimal {
                morphism: MorphismDto::encode(morphism),
                alphas: encode_alphas(alphas),
                unconstrained: alphas.unconstrained().to_vec(),
            },
            Disintegration::NoDisintegration(o) => Self::NoDisintegration {
                reason: o.to_string(),
                residual: o.residual(),
            },
        }
    }
}

pub fn encode_alphas(a: &AlphaFamily) -> Vec<Vec<MatrixDto>> {
    a.grid()
        .iter()
        .map(|row| row.iter().map(MatrixDto::encode).collect())
        .collect()
}

pub fn decode_alphas(f: &StarHom, rows: &[Vec<MatrixDto>]) -> Result<AlphaFamily> {
    let grid = rows
        .iter()
        .map(|row| decode_all(row))
        .collect::<Result<Vec<_>>>()?;
    AlphaFamily::new(f, grid)
}

pub fn from_str<T: DeserializeOwned>(s: &str) -> Result<T> {
    Ok(serde_json::from_str(s)?)
}

pub fn to_string<T: Serialize>(v: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(v)?)
}

pub fn read<T: DeserializeOwned>(path: impl AsRef<Path>) -> Result<T> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Dimension(format!("cannot read {}: {e}", path.display())))?;
    from_str(&text)
}

pub fn write<T: Serialize>(path: impl AsRef<Path>, v: &T) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, to_string(v)? + "\n")
        .map_err(|e| Error::Dimension(format!("cannot write {}: {e}", path.display())))
}
