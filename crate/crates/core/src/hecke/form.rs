use std::path::Path;
use std::sync::Arc;

use super::curve::EllipticCurveSpec;
use super::table::{parse_table_file, TableFileData};
use crate::error::{Error, Result};

/// Where a form's Hecke eigenvalues come from.
#[derive(Debug, Clone, PartialEq)]
pub enum EigenSource {
    /// `τ(n)` from the Euler product, for the level-one weight-12 form.
    TauRecurrence,
    /// `a_p` by counting points on a bundled or user-supplied curve.
    EllipticPointCount(Arc<EllipticCurveSpec>),
    /// Normalized `λ(p)` read from an eigenvalue table file.
    TableFile(Arc<TableFileData>),
}

impl EigenSource {
    pub fn tag(&self) -> &'static str {
        match self {
            EigenSource::TauRecurrence => "TAU_RECURRENCE",
            EigenSource::EllipticPointCount(_) => "ELLIPTIC_POINT_COUNT",
            EigenSource::TableFile(_) => "TABLE_FILE",
        }
    }
}

/// A holomorphic newform of even weight with trivial character.
#[derive(Debug, Clone, PartialEq)]
pub struct HeckeForm {
    pub label: String,
    pub weight: u32,
    pub level: u64,
    pub root_number: i32,
    pub source: EigenSource,
}

impl HeckeForm {
    pub fn new(label: impl Into<String>, weight: u32, level: u64, root_number: i32, source: EigenSource) -> Result<Self> {
        let label = label.into();
        if weight < 2 || weight % 2 != 0 {
            return Err(Error::config(format!("form {label}: weight must be even and >= 2, got {weight}")));
        }
        if level == 0 {
            return Err(Error::config(format!("form {label}: level must be >= 1")));
        }
        if root_number.abs() != 1 {
            return Err(Error::config(format!("form {label}: root number must be ±1, got {root_number}")));
        }
        if label.is_empty() || label.contains([',', ' ', '\t', '\n']) {
            return Err(Error::config(format!("form label `{label}` must be nonempty without commas or spaces")));
        }
        Ok(Self { label, weight, level, root_number, source })
    }

    /// The discriminant modular form `Δ`.
    pub fn delta() -> Self {
        Self::new("Delta", 12, 1, 1, EigenSource::TauRecurrence).expect("valid builtin")
    }

    pub fn elliptic(curve: EllipticCurveSpec) -> Result<Self> {
        Self::new(curve.label.clone(), 2, curve.conductor, curve.root_number, EigenSource::EllipticPointCount(Arc::new(curve)))
    }

    /// `Delta`, `11a1` or `37b1`; `E11`/`E37` are accepted aliases.
    pub fn builtin(label: &str) -> Option<Self> {
        match label {
            "Delta" | "delta" | "D" => Some(Self::delta()),
            "11a1" | "E11" => Self::elliptic(EllipticCurveSpec::builtin("11a1")?).ok(),
            "37b1" | "E37" => Self::elliptic(EllipticCurveSpec::builtin("37b1")?).ok(),
            _ => None,
        }
    }

    pub fn from_table_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let data = parse_table_file(&text, &path.display().to_string())?;
        Self::new(data.label.clone(), data.weight, data.level, data.root_number, EigenSource::TableFile(Arc::new(data)))
    }

    pub fn curve(&self) -> Option<&EllipticCurveSpec> {
        match &self.source {
            EigenSource::EllipticPointCount(c) => Some(c),
            _ => None,
        }
    }

    #[inline]
    pub fn is_bad(&self, p: u64) -> bool {
        self.level % p == 0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtins() {
        let d = HeckeForm::builtin("Delta").unwrap();
        assert_eq!((d.weight, d.level, d.root_number), (12, 1, 1));
        assert_eq!(d.source.tag(), "TAU_RECURRENCE");
        let e = HeckeForm::builtin("E11").unwrap();
        assert_eq!((e.label.as_str(), e.weight, e.level), ("11a1", 2, 11));
        assert_eq!(e.source.tag(), "ELLIPTIC_POINT_COUNT");
        assert!(e.is_bad(11) && !e.is_bad(2));
        assert!(HeckeForm::builtin("Z").is_none());
    }

    #[test]
    fn rejects_odd_weight() {
        assert!(HeckeForm::new("f", 3, 1, 1, EigenSource::TauRecurrence).is_err());
        assert!(HeckeForm::new("f", 2, 0, 1, EigenSource::TauRecurrence).is_err());
        assert!(HeckeForm::new("a,b", 2, 1, 1, EigenSource::TauRecurrence).is_err());
    }
}
