//! JSON configuration files: `{"dim": n, "X": [[...], ...], "labels": [...]}`.

use std::path::Path;

use boxcalc::arrangement::Configuration;
use boxcalc::exact::Int;
use serde::Deserialize;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub dim: usize,
    #[serde(rename = "X")]
    pub x: Vec<Vec<i64>>,
    #[serde(default)]
    pub labels: Option<Vec<String>>,
}

#[derive(Debug)]
pub struct LoadedConfig {
    pub config: Configuration,
    pub labels: Vec<String>,
}

pub fn parse_config(text: &str) -> Result<LoadedConfig, String> {
    let file: ConfigFile = serde_json::from_str(text).map_err(|e| format!("config: {e}"))?;
    for (i, v) in file.x.iter().enumerate() {
        if v.len() != file.dim {
            return Err(format!(
                "config: field X[{i}] has {} coordinates, expected dim = {}",
                v.len(),
                file.dim
            ));
        }
    }
    let labels = match file.labels {
        Some(l) if l.len() != file.x.len() => {
            return Err(format!("config: field labels has {} entries for {} vectors", l.len(), file.x.len()))
        }
        Some(l) => l,
        None => (1..=file.x.len()).map(|i| format!("a{i}")).collect(),
    };
    let vectors = file.x.iter().map(|v| v.iter().map(|&c| Int::from(c)).collect()).collect();
    let config = Configuration::new(file.dim, vectors).map_err(|e| format!("config: field X: {e}"))?;
    Ok(LoadedConfig { config, labels })
}

pub fn load_config(path: &Path) -> Result<LoadedConfig, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    parse_config(&text).map_err(|e| format!("{}: {e}", path.display()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_a2() {
        let c = parse_config(r#"{"dim": 2, "X": [[1,0],[0,1],[1,1]]}"#).unwrap();
        assert_eq!(c.config.len(), 3);
        assert_eq!(c.labels, vec!["a1", "a2", "a3"]);
    }

    #[test]
    fn diagnostics() {
        let e = parse_config(r#"{"dim": 2, "X": [[1,0],[0]]}"#).unwrap_err();
        assert!(e.contains("X[1]"), "{e}");
        let e = parse_config(r#"{"dim": 2, "X": [[1,0]]}"#).unwrap_err();
        assert!(e.contains("does not span"), "{e}");
        let e = parse_config("{\"dim\": 2,\n \"Y\": []}").unwrap_err();
        assert!(e.contains("line 2"), "{e}");
        let e = parse_config(r#"{"dim": 1, "X": [[1]], "labels": ["a", "b"]}"#).unwrap_err();
        assert!(e.contains("labels"), "{e}");
    }
}
