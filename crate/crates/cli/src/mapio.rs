//! Map and domain file I/O for the command-line driver.

use crate::CliError;
use serde_json::Value;
use sphere_domain::{build_chart_grid, build_icosphere, Domain, SphereMap};
use std::path::Path;
use std::sync::Arc;

/// Load a map from its JSON interchange form
/// `{"domain": <domain or path>, "values": [[f64; n], ...]}`.
pub fn load_map(path: &Path) -> Result<SphereMap, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let v: Value = serde_json::from_str(&text)
        .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    Ok(SphereMap::from_json(&v)?)
}

/// Write a map with its domain inlined.
pub fn save_map(map: &SphereMap, path: &Path) -> Result<(), CliError> {
    let v = map.to_json(map.domain().to_json());
    std::fs::write(path, serde_json::to_string(&v).map_err(|e| CliError::Io(e.to_string()))?)
        .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    Ok(())
}

/// Build a domain from the standard flags.
pub fn build_domain(
    n: usize,
    backend: &str,
    level: Option<u32>,
    resolution: Option<u32>,
) -> Result<Arc<Domain>, CliError> {
    match backend {
        "mesh" => {
            if n != 3 {
                return Err(CliError::Domain(format!(
                    "mesh backend supports n = 3 only, got n = {n}"
                )));
            }
            Ok(Arc::new(build_icosphere(level.unwrap_or(4))?))
        }
        "chart" => Ok(Arc::new(build_chart_grid(n, resolution.or(level).unwrap_or(16))?)),
        other => Err(CliError::Domain(format!("unknown backend {other:?} (mesh|chart)"))),
    }
}
