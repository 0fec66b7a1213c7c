use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Default cap on the number of spike pairs in a [`SymmetricAtoms`] strategy.
pub const DEFAULT_MAX_ATOMS: usize = 8;

const MASS_TOLERANCE: f64 = 1e-12;

/// One symmetric spike pair: mass `weight` at each of `±offset`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct Atom {
    pub offset: f64,
    pub weight: f64,
}

/// Noise density `Σ_j β_j δ(z - z_j) + β_j δ(z + z_j)`.
///
/// Offsets are strictly increasing and positive, weights positive, and the
/// total mass `Σ 2β_j` is one.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct SymmetricAtoms {
    atoms: Vec<Atom>,
}

impl SymmetricAtoms {
    pub fn new(atoms: Vec<Atom>) -> Result<Self> {
        Self::with_max_atoms(atoms, DEFAULT_MAX_ATOMS)
    }

    pub fn with_max_atoms(atoms: Vec<Atom>, max_atoms: usize) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::InvalidStrategy("no atoms".to_string()));
        }
        if atoms.len() > max_atoms {
            return Err(Error::InvalidStrategy(format!(
                "{} atoms exceed the limit of {}",
                atoms.len(),
                max_atoms
            )));
        }
        for (i, atom) in atoms.iter().enumerate() {
            if !(atom.offset > 0.0 && atom.offset.is_finite()) {
                return Err(Error::InvalidStrategy(format!(
                    "atom {} has non-positive offset {}",
                    i, atom.offset
                )));
            }
            if !(atom.weight > 0.0 && atom.weight.is_finite()) {
                return Err(Error::InvalidStrategy(format!(
                    "atom {} has non-positive weight {}",
                    i, atom.weight
                )));
            }
            if i > 0 && atoms[i - 1].offset >= atom.offset {
                return Err(Error::InvalidStrategy(format!(
                    "offsets must be strictly increasing (atom {})",
                    i
                )));
            }
        }
        let mass: f64 = atoms.iter().map(|a| 2.0 * a.weight).sum();
        if (mass - 1.0).abs() > MASS_TOLERANCE {
            return Err(Error::InvalidStrategy(format!(
                "total mass {} differs from 1",
                mass
            )));
        }
        Ok(Self { atoms })
    }

    /// `½δ(z - offset) + ½δ(z + offset)`.
    pub fn single_pair(offset: f64) -> Result<Self> {
        Self::new(alloc::vec![Atom {
            offset,
            weight: 0.5
        }])
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    /// Picks the signed offset whose cumulative mass interval contains
    /// `uniform` (in `[0, 1)`); the sign is chosen by `negative`.
    pub fn offset_for(&self, uniform: f64, negative: bool) -> f64 {
        let mut acc = 0.0;
        let mut chosen = self.atoms[self.atoms.len() - 1].offset;
        for atom in &self.atoms {
            acc += 2.0 * atom.weight;
            if uniform < acc {
                chosen = atom.offset;
                break;
            }
        }
        if negative {
            -chosen
        } else {
            chosen
        }
    }
}

/// Built-in samplers for adversaries that are not symmetric atom mixtures.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub enum SamplerKind {
    /// Offset uniform on `[lo, hi]`.
    Uniform { lo: f64, hi: f64 },
    /// Offset `±U[lo, hi]` with a fair sign.
    SymmetricUniform { lo: f64, hi: f64 },
    /// Fixed offset, possibly zero or negative.
    Point { offset: f64 },
}

/// Opaque sampler identified by name and parameters; only the simulator can
/// play it.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct OpaqueSampler {
    pub id: String,
    pub params: Vec<f64>,
    pub kind: SamplerKind,
}

impl OpaqueSampler {
    pub fn new(id: &str, params: &[f64]) -> Result<Self> {
        let arity = |n: usize| -> Result<()> {
            if params.len() != n || params.iter().any(|p| !p.is_finite()) {
                Err(Error::InvalidStrategy(format!(
                    "sampler `{}` takes {} finite parameter(s), got {:?}",
                    id, n, params
                )))
            } else {
                Ok(())
            }
        };
        let kind = match id {
            "uniform" | "symmetric_uniform" => {
                arity(2)?;
                let (lo, hi) = (params[0], params[1]);
                if lo > hi {
                    return Err(Error::InvalidStrategy(format!(
                        "sampler `{}` needs lo <= hi",
                        id
                    )));
                }
                if id == "uniform" {
                    SamplerKind::Uniform { lo, hi }
                } else {
                    SamplerKind::SymmetricUniform { lo, hi }
                }
            }
            "point" => {
                arity(1)?;
                SamplerKind::Point { offset: params[0] }
            }
            _ => {
                return Err(Error::InvalidStrategy(format!("unknown sampler `{}`", id)));
            }
        };
        Ok(Self {
            id: id.to_string(),
            params: params.to_vec(),
            kind,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub enum AdversaryStrategy {
    SymmetricAtoms(SymmetricAtoms),
    OpaqueSampler(OpaqueSampler),
}

impl From<SymmetricAtoms> for AdversaryStrategy {
    fn from(atoms: SymmetricAtoms) -> Self {
        AdversaryStrategy::SymmetricAtoms(atoms)
    }
}

impl From<OpaqueSampler> for AdversaryStrategy {
    fn from(sampler: OpaqueSampler) -> Self {
        AdversaryStrategy::OpaqueSampler(sampler)
    }
}
