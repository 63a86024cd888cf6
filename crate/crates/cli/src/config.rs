//! Parameter loading for the subcommands.

use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::Deserialize;

use qmupl_core::PhysicalParams;

/// On-disk configuration: one `[params]` table carrying exactly the
/// physical-parameter field names.  Unknown keys anywhere are errors.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    params: Option<PhysicalParams>,
}

/// Loads physical parameters from `path`, falling back to `fallback` when no
/// path is given (or the file has no `[params]` table).  Validation reports
/// every problem with the set in a single pass, not just the first.
pub fn load_params(path: Option<&Path>, fallback: PhysicalParams) -> Result<PhysicalParams> {
    let params = match path {
        None => fallback,
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading config {}", path.display()))?;
            let cfg: ConfigFile = toml::from_str(&text)
                .with_context(|| format!("parsing config {}", path.display()))?;
            cfg.params.unwrap_or(fallback)
        }
    };
    let problems = params.problems();
    if !problems.is_empty() {
        bail!("invalid parameters: {}", problems.join("; "));
    }
    Ok(params)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write as _;

    fn write_temp(contents: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(contents.as_bytes()).unwrap();
        f
    }

    #[test]
    fn full_table_round_trips() {
        let f = write_temp(
            "[params]\nm = 1e-3\nm0 = 1.67e-27\nlambda0 = 1e-2\n\
             hbar = 1.0545718e-34\nkappa = 9.48251652928637e31\nT = 1.0\n",
        );
        let p = load_params(Some(f.path()), PhysicalParams::dimensionless(2.0, 1.0)).unwrap();
        assert_eq!(p.m, 1e-3);
        assert_eq!(p.t_meas, 1.0);
        assert_eq!(p.t0, 0.0);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let f = write_temp("[params]\nm = 1.0\nmm0 = 2.0\n");
        let err = load_params(Some(f.path()), PhysicalParams::lab_default())
            .unwrap_err()
            .to_string();
        assert!(err.contains("parsing config"), "got: {err}");
    }

    #[test]
    fn all_validation_problems_are_listed() {
        let f = write_temp(
            "[params]\nm = -1.0\nm0 = 1.67e-27\nlambda0 = 0.0\n\
             hbar = 1.0545718e-34\nkappa = 1.0\nT = 1.0\n",
        );
        let err = format!(
            "{:#}",
            load_params(Some(f.path()), PhysicalParams::lab_default()).unwrap_err()
        );
        assert!(err.contains('m') && err.contains("lambda0"), "got: {err}");
    }

    #[test]
    fn missing_table_uses_fallback() {
        let f = write_temp("");
        let p = load_params(Some(f.path()), PhysicalParams::dimensionless(4.0, 0.5)).unwrap();
        assert_eq!(p.hbar_kappa(), 4.0);
    }
}
