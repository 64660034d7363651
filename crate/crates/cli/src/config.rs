use std::path::Path;

use cks_core::growth::GrowthFunction;
use serde::Deserialize;

/// Contents of a `--config` TOML file. Every table is optional and unknown
/// keys are rejected.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    #[serde(default)]
    pub model: ModelSection,
    pub function: Option<FunctionSection>,
    #[serde(default)]
    pub suites: SuitesSection,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    pub d: Option<usize>,
    pub degree: Option<usize>,
}

/// `kind` is one of `exp`, `beta_exp` (with `beta`), `iterated_exp` or `w`
/// (with `k`), `tabulated` (with `path` to `r,log_u` rows). `dual` and
/// `envelope` wrap the result.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FunctionSection {
    pub kind: String,
    pub beta: Option<f64>,
    pub k: Option<u32>,
    pub path: Option<String>,
    #[serde(default)]
    pub dual: bool,
    #[serde(default)]
    pub envelope: bool,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuitesSection {
    #[serde(default)]
    pub keys: Vec<String>,
    pub seed: Option<u64>,
    pub trials: Option<usize>,
    pub tolerance: Option<f64>,
    pub sequential: Option<bool>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        Self::parse(&text, path.parent())
    }

    /// Relative `path` entries resolve against `base`.
    pub fn parse(text: &str, base: Option<&Path>) -> Result<Self, String> {
        let mut cfg: FileConfig = toml::from_str(text).map_err(|e| e.to_string())?;
        if let (Some(f), Some(base)) = (cfg.function.as_mut(), base) {
            if let Some(p) = f.path.as_mut() {
                if Path::new(p).is_relative() {
                    *p = base.join(&*p).to_string_lossy().into_owned();
                }
            }
        }
        Ok(cfg)
    }
}

impl FunctionSection {
    pub fn spec(&self) -> Result<String, String> {
        let need_k = || self.k.ok_or_else(|| format!("function kind {:?} needs k", self.kind));
        let base = match self.kind.as_str() {
            "exp" => "exp".to_string(),
            "beta_exp" => format!("beta_exp:{}", self.beta.ok_or("function kind \"beta_exp\" needs beta")?),
            "iterated_exp" => format!("exp_{}", need_k()?),
            "w" => format!("w_{}", need_k()?),
            "tabulated" => format!("tabulated:{}", self.path.as_deref().ok_or("function kind \"tabulated\" needs path")?),
            other => return Err(format!("unknown function kind {other:?}")),
        };
        let mut spec = base;
        if self.envelope {
            spec = format!("envelope:{spec}");
        }
        if self.dual {
            spec = format!("dual:{spec}");
        }
        Ok(spec)
    }

    pub fn build(&self) -> Result<GrowthFunction, String> {
        self.spec()?.parse().map_err(|e: cks_core::Error| e.to_string())
    }
}
