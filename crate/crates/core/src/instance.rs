//! JSON instance files.
//!
//! Complex entries are `[re, im]` pairs. Floats are written with the shortest
//! representation that parses back to the same value, so save, load, save is
//! byte-identical.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::controlled::{build_system_with, ControlledSystem, ControllerPair};
use crate::error::{Error, Result};
use crate::gframes::GFrameFamily;
use crate::matcore::ComplexMatrix;
use crate::tol::Tolerances;
use num_complex::Complex64;

pub const FORMAT_VERSION: &str = "1";

type Rows = Vec<Vec<[f64; 2]>>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BlockEntry {
    pub rows: usize,
    pub matrix: Rows,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Metadata {
    pub seed: u64,
    pub generator_name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappa: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrameInstanceFile {
    pub version: String,
    pub ambient_dim: usize,
    pub blocks: Vec<BlockEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub control_c: Option<Rows>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub control_cprime: Option<Rows>,
    /// Second family of a dual pair; it shares the controllers.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dual_blocks: Option<Vec<BlockEntry>>,
    pub metadata: Metadata,
}

/// A parsed instance.
#[derive(Debug, Clone)]
pub struct LoadedInstance {
    pub system: ControlledSystem,
    pub dual: Option<ControlledSystem>,
    pub metadata: Metadata,
}

fn to_rows(m: &ComplexMatrix) -> Rows {
    (0..m.rows())
        .map(|r| m.row(r).iter().map(|z| [z.re, z.im]).collect())
        .collect()
}

fn from_rows(rows: &Rows, what: &str) -> Result<ComplexMatrix> {
    let cols = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != cols) {
        return Err(Error::Format(format!("{what}: ragged rows")));
    }
    let data = rows
        .iter()
        .flatten()
        .map(|&[re, im]| Complex64::new(re, im))
        .collect();
    ComplexMatrix::new(rows.len(), cols, data).map_err(|e| Error::Format(format!("{what}: {e}")))
}

fn block_entries(family: &GFrameFamily) -> Vec<BlockEntry> {
    family
        .operators()
        .iter()
        .map(|op| BlockEntry {
            rows: op.rows(),
            matrix: to_rows(op),
        })
        .collect()
}

fn parse_family(n: usize, entries: &[BlockEntry], what: &str) -> Result<GFrameFamily> {
    let ops = entries
        .iter()
        .enumerate()
        .map(|(i, b)| {
            let m = from_rows(&b.matrix, &format!("{what} {i}"))?;
            if m.rows() != b.rows {
                return Err(Error::Format(format!(
                    "{what} {i}: declared {} rows, found {}",
                    b.rows,
                    m.rows()
                )));
            }
            Ok(m)
        })
        .collect::<Result<Vec<_>>>()?;
    GFrameFamily::new(n, ops)
}

impl FrameInstanceFile {
    pub fn from_system(
        sys: &ControlledSystem,
        dual: Option<&ControlledSystem>,
        metadata: Metadata,
    ) -> Result<Self> {
        if let Some(d) = dual {
            if d.pair() != sys.pair() {
                return Err(Error::ControllersDiffer);
            }
        }
        let pair = sys.pair();
        let n = sys.dim();
        let identity = ControllerPair::identity(n);
        let (c, cp) = if pair == &identity {
            (None, None)
        } else {
            (Some(to_rows(pair.c())), Some(to_rows(pair.cp())))
        };
        Ok(Self {
            version: FORMAT_VERSION.to_string(),
            ambient_dim: n,
            blocks: block_entries(sys.family()),
            control_c: c,
            control_cprime: cp,
            dual_blocks: dual.map(|d| block_entries(d.family())),
            metadata,
        })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: Self = serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))?;
        if file.version != FORMAT_VERSION {
            return Err(Error::Format(format!(
                "unsupported version {:?}",
                file.version
            )));
        }
        Ok(file)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("instance serialises");
        s.push('\n');
        s
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Format(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json())
            .map_err(|e| Error::Format(format!("{}: {e}", path.display())))
    }

    /// Builds the controlled systems described by the file.
    pub fn build(&self, tol: Tolerances) -> Result<LoadedInstance> {
        let n = self.ambient_dim;
        let family = parse_family(n, &self.blocks, "block")?;
        let matrix_or_identity = |m: &Option<Rows>, what: &str| match m {
            Some(rows) => from_rows(rows, what),
            None => Ok(ComplexMatrix::identity(n)),
        };
        let pair = ControllerPair::with_tolerance(
            matrix_or_identity(&self.control_c, "control_c")?,
            matrix_or_identity(&self.control_cprime, "control_cprime")?,
            tol.inv,
        )?;
        let system = build_system_with(family, pair.clone(), tol)?;
        let dual = match &self.dual_blocks {
            Some(entries) => Some(build_system_with(
                parse_family(n, entries, "dual block")?,
                pair,
                tol,
            )?),
            None => None,
        };
        Ok(LoadedInstance {
            system,
            dual,
            metadata: self.metadata.clone(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::controlled::build_system;

    fn sample() -> FrameInstanceFile {
        let fam = GFrameFamily::new(
            2,
            vec![ComplexMatrix::new(
                1,
                2,
                vec![
                    Complex64::new(0.1, 1.0 / 3.0),
                    Complex64::new(-2.5e-17, 7.0),
                ],
            )
            .unwrap()],
        )
        .unwrap();
        let pair = ControllerPair::new(
            ComplexMatrix::from_diag(&[2.0, 1.0]),
            ComplexMatrix::from_diag(&[2.0, 1.0]),
        )
        .unwrap();
        let sys = build_system(fam, pair).unwrap();
        FrameInstanceFile::from_system(
            &sys,
            None,
            Metadata {
                seed: 7,
                generator_name: "manual".into(),
                kappa: None,
            },
        )
        .unwrap()
    }

    #[test]
    fn round_trip_is_exact() {
        let f = sample();
        let text = f.to_json();
        let back = FrameInstanceFile::from_json(&text).unwrap();
        assert_eq!(back, f);
        assert_eq!(back.to_json(), text);
    }

    #[test]
    fn identity_controllers_are_omitted() {
        let fam = GFrameFamily::new(1, vec![ComplexMatrix::identity(1)]).unwrap();
        let sys = build_system(fam, ControllerPair::identity(1)).unwrap();
        let meta = Metadata {
            seed: 0,
            generator_name: "x".into(),
            kappa: None,
        };
        let f = FrameInstanceFile::from_system(&sys, None, meta).unwrap();
        assert!(f.control_c.is_none());
        assert!(!f.to_json().contains("control_c"));
        let loaded = f.build(Tolerances::default()).unwrap();
        assert_eq!(loaded.system.pair(), &ControllerPair::identity(1));
    }

    #[test]
    fn malformed_inputs() {
        assert!(matches!(
            FrameInstanceFile::from_json("{"),
            Err(Error::Format(_))
        ));
        let mut f = sample();
        f.blocks[0].rows = 2;
        assert!(matches!(
            f.build(Tolerances::default()),
            Err(Error::Format(_))
        ));
        let mut f = sample();
        f.blocks[0].matrix[0].pop();
        assert!(f.build(Tolerances::default()).is_err());
        let mut f = sample();
        f.version = "0".into();
        assert!(FrameInstanceFile::from_json(&f.to_json()).is_err());
    }
}
