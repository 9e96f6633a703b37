//! Merging of `--config` files with command-line flags, and typed access to the result.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use num_complex::Complex64 as C64;
use stochvertex::verify::ParamMap;

/// Keys that steer a command rather than feed a weight or check.
pub const CONTROL_KEYS: &[&str] = &[
    "family", "equation", "cfg", "seed", "tol", "out", "format", "draws", "width", "height", "depth", "bottom", "left",
    "face1", "face2", "face3", "vertex",
];

#[derive(Debug)]
pub enum CliError {
    Input(String),
    Model(stochvertex::Error),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Input(m) => write!(f, "{m}"),
            CliError::Model(e) => write!(f, "{e}"),
        }
    }
}

impl From<stochvertex::Error> for CliError {
    fn from(e: stochvertex::Error) -> Self {
        CliError::Model(e)
    }
}

impl CliError {
    pub fn kind(&self) -> &'static str {
        use stochvertex::Error::*;
        match self {
            CliError::Input(_) => "input",
            CliError::Model(Pole(_)) => "pole",
            CliError::Model(NoTermination(_)) => "no-termination",
            CliError::Model(NonConvergent(_)) => "non-convergent",
            CliError::Model(Precondition(_)) => "precondition",
            CliError::Model(NonProbabilistic(_)) => "non-probabilistic",
            CliError::Model(InvalidIndex(_)) => "invalid-index",
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

fn input<T>(msg: String) -> CliResult<T> {
    Err(CliError::Input(msg))
}

/// Every setting as text; flags given on the command line replace file values.
#[derive(Debug, Default, Clone)]
pub struct Settings(BTreeMap<String, String>);

impl Settings {
    pub fn load(config: Option<&Path>, flags: Vec<(String, Option<String>)>) -> CliResult<Self> {
        let mut map = BTreeMap::new();
        if let Some(path) = config {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
            let json: serde_json::Value = serde_json::from_str(&text)
                .map_err(|e| CliError::Input(format!("cannot parse {}: {e}", path.display())))?;
            let serde_json::Value::Object(obj) = json else {
                return input(format!("{} must hold a JSON object", path.display()));
            };
            for (k, v) in obj {
                let text = match v {
                    serde_json::Value::String(s) => s,
                    serde_json::Value::Array(items) => {
                        items.iter().map(|i| i.to_string().trim_matches('"').to_string()).collect::<Vec<_>>().join(",")
                    }
                    other => other.to_string(),
                };
                map.insert(k, text);
            }
        }
        for (k, v) in flags {
            if let Some(v) = v {
                map.insert(k, v);
            }
        }
        Ok(Self(map))
    }

    pub fn str(&self, key: &str) -> Option<&str> {
        self.0.get(key).map(String::as_str)
    }

    pub fn int(&self, key: &str) -> CliResult<Option<i64>> {
        self.str(key)
            .map(|s| s.trim().parse::<i64>().map_err(|_| CliError::Input(format!("`{key}` expects an integer, got `{s}`"))))
            .transpose()
    }

    pub fn real(&self, key: &str) -> CliResult<Option<f64>> {
        self.str(key)
            .map(|s| s.trim().parse::<f64>().map_err(|_| CliError::Input(format!("`{key}` expects a number, got `{s}`"))))
            .transpose()
    }

    pub fn list(&self, key: &str) -> CliResult<Option<Vec<i64>>> {
        self.str(key)
            .map(|s| {
                s.split(',')
                    .map(|t| {
                        t.trim().parse::<i64>().map_err(|_| CliError::Input(format!("`{key}` expects integers, got `{s}`")))
                    })
                    .collect()
            })
            .transpose()
    }

    pub fn flag(&self, key: &str) -> bool {
        matches!(self.str(key), Some("true" | "1"))
    }

    /// Every non-control setting, parsed as a complex number.
    pub fn params(&self) -> CliResult<ParamMap> {
        self.0
            .iter()
            .filter(|(k, _)| !CONTROL_KEYS.contains(&k.as_str()))
            .map(|(k, v)| Ok((k.clone(), parse_complex(k, v)?)))
            .collect()
    }
}

/// Parses `1.2`, `0.3i`, `-i` or `1.2+0.3i`.
pub fn parse_complex(key: &str, s: &str) -> CliResult<C64> {
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    let t = t.replace('j', "i");
    let fixed = match t.as_str() {
        "i" | "+i" => "1i".to_string(),
        "-i" => "-1i".to_string(),
        other if other.ends_with("+i") || other.ends_with("-i") => format!("{}1i", &other[..other.len() - 1]),
        other => other.to_string(),
    };
    fixed.parse::<C64>().map_err(|_| CliError::Input(format!("`{key}` expects a complex number such as 1.2+0.3i, got `{s}`")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complex_forms() {
        assert_eq!(parse_complex("x", "1.2+0.3i").unwrap(), C64::new(1.2, 0.3));
        assert_eq!(parse_complex("x", "2").unwrap(), C64::new(2.0, 0.0));
        assert_eq!(parse_complex("x", "-0.5i").unwrap(), C64::new(0.0, -0.5));
        assert_eq!(parse_complex("x", "1-i").unwrap(), C64::new(1.0, -1.0));
        assert_eq!(parse_complex("x", "i").unwrap(), C64::new(0.0, 1.0));
        assert_eq!(parse_complex("x", "1e-3+2e-2i").unwrap(), C64::new(1e-3, 2e-2));
        assert!(parse_complex("x", "abc").is_err());
    }

    #[test]
    fn flags_override_file() {
        let dir = std::env::temp_dir().join(format!("stochvertex-settings-{}", std::process::id()));
        std::fs::write(&dir, r#"{"x": 1.5, "q": "0.3+0.1i", "cfg": [1, 0]}"#).unwrap();
        let s = Settings::load(Some(&dir), vec![("x".into(), Some("2".into())), ("y".into(), None)]).unwrap();
        std::fs::remove_file(&dir).unwrap();
        assert_eq!(s.list("cfg").unwrap(), Some(vec![1, 0]));
        assert_eq!(s.str("y"), None);
        let p = s.params().unwrap();
        assert_eq!(p["x"], C64::new(2.0, 0.0));
        assert_eq!(p["q"], C64::new(0.3, 0.1));
        assert!(!p.contains_key("cfg"));
    }
}
