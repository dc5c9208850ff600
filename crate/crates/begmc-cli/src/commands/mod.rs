pub mod couple;
pub mod gap_scan;
pub mod landscape;
pub mod mix;
pub mod phase;
pub mod verify;

/// Shared invocation context from the global flags.
pub struct Ctx {
    pub seed: u64,
    pub out_dir: Option<std::path::PathBuf>,
    pub cap_states: usize,
    pub config: Option<std::path::PathBuf>,
}

impl Ctx {
    /// Loads the JSON config file and deserializes the section for one
    /// command (top-level object keys = subcommand names), if present.
    pub fn config_section<T: serde::de::DeserializeOwned>(
        &self,
        section: &str,
    ) -> anyhow::Result<Option<T>> {
        let Some(path) = &self.config else { return Ok(None) };
        let text = std::fs::read_to_string(path)?;
        let value: serde_json::Value = serde_json::from_str(&text)?;
        match value.get(section) {
            Some(v) => Ok(Some(serde_json::from_value(v.clone())?)),
            None => Ok(None),
        }
    }
}
