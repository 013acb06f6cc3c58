use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

/// Keys accepted by `--bounds`.
pub const KEYS: [&str; 6] = ["tree-vertices", "tree-edges", "set-size", "nerve-degree", "carrier", "arity"];

/// User overrides from `--bounds k=v,...`; each suite fills in its own
/// defaults for the keys left unset.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Bounds {
    values: BTreeMap<String, usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundsError(pub String);

impl fmt::Display for BoundsError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for BoundsError {}

impl FromStr for Bounds {
    type Err = BoundsError;

    fn from_str(s: &str) -> Result<Bounds, BoundsError> {
        let mut values = BTreeMap::new();
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (k, v) = part
                .split_once('=')
                .ok_or_else(|| BoundsError(format!("`{part}` is not of the form key=value")))?;
            let k = k.trim();
            if !KEYS.contains(&k) {
                return Err(BoundsError(format!("unknown bound `{k}`; expected one of {}", KEYS.join(", "))));
            }
            let v: usize = v.trim().parse().map_err(|_| BoundsError(format!("bound `{k}` needs a natural number, got `{}`", v.trim())))?;
            if values.insert(k.to_string(), v).is_some() {
                return Err(BoundsError(format!("bound `{k}` given twice")));
            }
        }
        Ok(Bounds { values })
    }
}

impl fmt::Display for Bounds {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.values.iter().map(|(k, v)| format!("{k}={v}")).collect();
        f.write_str(&parts.join(","))
    }
}

impl Bounds {
    pub fn get(&self, key: &str) -> Option<usize> {
        self.values.get(key).copied()
    }

    pub fn set(mut self, key: &str, value: usize) -> Bounds {
        self.values.insert(key.to_string(), value);
        self
    }
}

/// The bounds a suite actually used, recorded for the report.
#[derive(Debug)]
pub(crate) struct Resolver<'a> {
    bounds: &'a Bounds,
    pub(crate) used: BTreeMap<String, usize>,
}

impl<'a> Resolver<'a> {
    pub(crate) fn new(bounds: &'a Bounds) -> Self {
        Resolver { bounds, used: BTreeMap::new() }
    }

    pub(crate) fn take(&mut self, key: &str, default: usize) -> usize {
        let v = self.bounds.get(key).unwrap_or(default);
        self.used.insert(key.to_string(), v);
        v
    }
}
