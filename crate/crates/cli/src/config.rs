//! Flat `key=value` run configuration: file first, then flag overrides.

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;

use twistlab::apps::{HalfIntegralForm, LocalDataTable, LocalProvider, TwistBsdData};
use twistlab::arith::FamilySlice;
use twistlab::hecke::find_admissible_residue;
use twistlab::lfunc::Smoothing;
use twistlab::{AfeParams, EllipticCurveSpec, Error, HeckeForm, Result};

/// Resolved configuration. Keys are kept sorted so the manifest is canonical.
#[derive(Debug, Clone, Default)]
pub struct RunConfig {
    entries: BTreeMap<String, String>,
}

impl RunConfig {
    pub fn parse(text: &str, source_name: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap().trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| Error::Parse {
                source_name: source_name.to_string(),
                line: i + 1,
                message: format!("expected key=value, got `{line}`"),
            })?;
            let k = k.trim();
            if k.is_empty() {
                return Err(Error::Parse { source_name: source_name.to_string(), line: i + 1, message: "empty key".into() });
            }
            if entries.insert(k.to_string(), v.trim().to_string()).is_some() {
                return Err(Error::Parse {
                    source_name: source_name.to_string(),
                    line: i + 1,
                    message: format!("duplicate key `{k}`"),
                });
            }
        }
        Ok(Self { entries })
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text, &path.display().to_string())
    }

    pub fn set(&mut self, key: &str, value: impl Into<String>) {
        self.entries.insert(key.to_string(), value.into());
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    pub fn entries(&self) -> impl Iterator<Item = (&String, &String)> {
        self.entries.iter()
    }

    /// Rejects keys the command does not read, so typos fail loudly.
    pub fn check_keys(&self, command: &str, allowed: &[&str]) -> Result<()> {
        for k in self.entries.keys() {
            if k == "command" {
                if self.entries[k] != command {
                    return Err(Error::Config(format!("config is for command `{}`, not `{command}`", self.entries[k])));
                }
                continue;
            }
            let ok = allowed.iter().any(|a| match a.strip_suffix('*') {
                Some(prefix) => k.starts_with(prefix),
                None => k == a,
            });
            if !ok {
                return Err(Error::Config(format!("unknown key `{k}` for command `{command}`")));
            }
        }
        Ok(())
    }

    pub fn parsed<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>> {
        self.get(key)
            .map(|v| v.parse::<T>().map_err(|_| Error::Config(format!("cannot parse `{key}` = `{v}`"))))
            .transpose()
    }

    pub fn parsed_required<T: std::str::FromStr>(&self, key: &str) -> Result<T> {
        self.parsed(key)?.ok_or_else(|| Error::Config(format!("missing required key `{key}`")))
    }

    pub fn list<T: std::str::FromStr>(&self, key: &str) -> Result<Option<Vec<T>>> {
        self.get(key)
            .map(|v| {
                v.split(',')
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .map(|s| s.parse::<T>().map_err(|_| Error::Config(format!("cannot parse entry `{s}` of `{key}`"))))
                    .collect()
            })
            .transpose()
    }

    pub fn forms(&self) -> Result<Vec<HeckeForm>> {
        let names: Vec<String> = self.list("forms")?.ok_or_else(|| Error::Config("missing required key `forms`".into()))?;
        if names.is_empty() {
            return Err(Error::Config("`forms` is empty".into()));
        }
        names.iter().map(|n| load_form(n)).collect()
    }

    /// `ℓ_i`, defaulting to 1 for every form.
    pub fn ells(&self, m: usize) -> Result<Vec<f64>> {
        match self.list::<f64>("ells")? {
            None => Ok(vec![1.0; m]),
            Some(v) if v.len() == m => Ok(v),
            Some(v) => Err(Error::Config(format!("{} forms but {} entries in `ells`", m, v.len()))),
        }
    }

    pub fn afe(&self) -> Result<AfeParams> {
        let mut afe = AfeParams::default();
        if let Some(v) = self.parsed("afe.trunc_multiplier")? {
            afe.trunc_multiplier = v;
        }
        if let Some(v) = self.parsed("afe.rel_tolerance")? {
            afe.rel_tolerance = v;
        }
        if let Some(v) = self.parsed("afe.max_doublings")? {
            afe.max_doublings = v;
        }
        match self.get("afe.smoothing") {
            None | Some("INCOMPLETE_GAMMA") => afe.smoothing = Smoothing::IncompleteGamma,
            Some(other) => return Err(Error::Config(format!("unknown afe.smoothing `{other}`"))),
        }
        afe.validate()?;
        Ok(afe)
    }

    /// `(a, N0)`: explicit, or the smallest admissible class when `a=auto`.
    pub fn residue(&self, forms: &[HeckeForm], sigma: i32) -> Result<(i64, u64)> {
        match self.get("a").unwrap_or("auto") {
            "auto" => {
                let (a, n0) = find_admissible_residue(forms, sigma)?.ok_or_else(|| {
                    Error::Config(format!("no residue class makes every twisted root number +1 for sigma = {sigma}"))
                })?;
                Ok((a as i64, n0))
            }
            _ => Ok((self.parsed_required("a")?, self.parsed_required("n0")?)),
        }
    }

    pub fn slice(&self, forms: &[HeckeForm]) -> Result<FamilySlice> {
        let big_d: u64 = self.parsed_required("D")?;
        let sigma: i32 = self.parsed_required("sigma")?;
        let (a, n0) = if self.get("a").unwrap_or("auto") == "auto" && forms.is_empty() {
            return Err(Error::Config("a=auto needs `forms`".into()));
        } else {
            self.residue(forms, sigma)?
        };
        twistlab::arith::enumerate_family(big_d, sigma, a, n0)
    }

    /// Forms for `sieve`, which only needs them for `a=auto`.
    pub fn optional_forms(&self) -> Result<Vec<HeckeForm>> {
        if self.get("forms").is_some() {
            self.forms()
        } else {
            Ok(Vec::new())
        }
    }

    pub fn half_integral_forms(&self) -> Result<Vec<HalfIntegralForm>> {
        let lifts = self.forms()?;
        let kappas = match self.list::<f64>("kappa")? {
            None => vec![1.0; lifts.len()],
            Some(v) if v.len() == lifts.len() => v,
            Some(v) => return Err(Error::Config(format!("{} forms but {} entries in `kappa`", lifts.len(), v.len()))),
        };
        lifts
            .into_iter()
            .zip(kappas)
            .map(|(f, k)| HalfIntegralForm::new(format!("g_{}", f.label), f, k))
            .collect()
    }

    /// Curves from `curves`, each with `local.<label>` table (bundled if absent)
    /// or the constant override when `local.<label>=constant`.
    pub fn bsd_curves(&self) -> Result<Vec<TwistBsdData>> {
        let names: Vec<String> = self.list("curves")?.ok_or_else(|| Error::Config("missing required key `curves`".into()))?;
        let u_tildes = match self.list::<f64>("u_tilde")? {
            None => vec![1.0; names.len()],
            Some(v) if v.len() == names.len() => v,
            Some(v) => return Err(Error::Config(format!("{} curves but {} entries in `u_tilde`", names.len(), v.len()))),
        };
        names
            .iter()
            .zip(u_tildes)
            .map(|(name, u)| {
                let curve = load_curve(name)?;
                let key = format!("local.{}", curve.label);
                let local = match self.get(&key) {
                    Some("constant") => LocalProvider::ConstantOverride,
                    Some(path) => LocalProvider::TableFile(Arc::new(LocalDataTable::from_file(Path::new(path), &curve.label)?)),
                    None => LocalProvider::TableFile(Arc::new(LocalDataTable::builtin(&curve.label).ok_or_else(|| {
                        Error::Config(format!("no bundled local data for {}; set `{key}`", curve.label))
                    })?)),
                };
                TwistBsdData::new(curve, u, local)
            })
            .collect()
    }
}

fn load_form(name: &str) -> Result<HeckeForm> {
    if let Some(f) = HeckeForm::builtin(name) {
        return Ok(f);
    }
    let path = Path::new(name);
    if !path.exists() {
        return Err(Error::Config(format!("`{name}` is neither a bundled form nor an existing file")));
    }
    if name.ends_with(".curve") {
        HeckeForm::elliptic(EllipticCurveSpec::from_file(path)?)
    } else {
        HeckeForm::from_table_file(path)
    }
}

fn load_curve(name: &str) -> Result<EllipticCurveSpec> {
    EllipticCurveSpec::builtin(name)
        .or_else(|| HeckeForm::builtin(name).and_then(|f| f.curve().cloned()))
        .map(Ok)
        .unwrap_or_else(|| EllipticCurveSpec::from_file(Path::new(name)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_comments_and_rejects_duplicates() {
        let c = RunConfig::parse("# run\nD = 10\nsigma=1 # plus\n\n", "t").unwrap();
        assert_eq!(c.get("D"), Some("10"));
        assert_eq!(c.get("sigma"), Some("1"));
        assert!(RunConfig::parse("D=1\nD=2\n", "t").is_err());
        assert!(matches!(RunConfig::parse("oops\n", "t"), Err(Error::Parse { line: 1, .. })));
    }

    #[test]
    fn unknown_keys_fail() {
        let c = RunConfig::parse("D=10\nsigmaa=1\n", "t").unwrap();
        assert!(c.check_keys("sieve", &["D", "sigma"]).is_err());
        let c = RunConfig::parse("D=10\nlocal.11a1=x\n", "t").unwrap();
        assert!(c.check_keys("apps", &["D", "local.*"]).is_ok());
        let c = RunConfig::parse("command=sieve\n", "t").unwrap();
        assert!(c.check_keys("lvalues", &[]).is_err());
    }

    #[test]
    fn auto_residue() {
        let c = RunConfig::parse("D=100\nsigma=1\nforms=E11\n", "t").unwrap();
        let forms = c.forms().unwrap();
        assert_eq!(c.residue(&forms, 1).unwrap(), (1, 88));
        assert_eq!(c.ells(1).unwrap(), vec![1.0]);
        assert!(RunConfig::parse("ells=1,2\n", "t").unwrap().ells(1).is_err());
    }
}
