use edgechaos::activations::{synthesize_hp, HpDesignProfile};
use edgechaos::Activation;
use serde_json::{json, Value};

use crate::error::{usage, CliResult};
use crate::output::{real, Output};
use crate::params::DesignParams;

pub const ACTIVATION_FILE: &str = "activation.json";

pub fn profile_of(p: &DesignParams) -> CliResult<HpDesignProfile> {
    Ok(HpDesignProfile {
        max_coeff: p.max,
        min_coeff: p.min,
        spacing: p.gap,
        num_terms: p.n,
        layout: p.layout.parse()?,
    })
}

pub fn run(p: &DesignParams, out: &mut Output) -> CliResult<()> {
    let profile = profile_of(p)?;
    let act: Activation = synthesize_hp(&profile)?;
    let spectrum = profile.spectrum::<f64>()?;
    out.json(
        ACTIVATION_FILE,
        &json!({
            "spec": act.spec_string(),
            "profile": profile,
            "designed": profile.coefficients()?,
            "coefficients": spectrum.coefficients().iter().map(|&c| real(c)).collect::<Vec<_>>(),
        }),
    )
}

/// Activation stored by `design`: the `spec` of a JSON file, or the file's text.
pub fn read_activation_file(path: &std::path::Path) -> CliResult<(Activation, Option<HpDesignProfile>)> {
    let text = std::fs::read_to_string(path).map_err(|e| usage(format!("cannot read {}: {e}", path.display())))?;
    let (spec, profile) = match serde_json::from_str::<Value>(&text) {
        Ok(v) => {
            let spec = v
                .get("spec")
                .and_then(Value::as_str)
                .ok_or_else(|| usage(format!("{}: missing `spec`", path.display())))?
                .to_string();
            let profile = v
                .get("profile")
                .map(|p| serde_json::from_value::<HpDesignProfile>(p.clone()))
                .transpose()
                .map_err(|e| usage(format!("{}: {e}", path.display())))?;
            (spec, profile)
        }
        Err(_) => (text.trim().to_string(), None),
    };
    Ok((super::activation(&spec)?, profile))
}
