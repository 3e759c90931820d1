//! Built-in scenarios.

const PRESETS: &[(&str, &str)] = &[
    ("fig1", include_str!("../presets/fig1.toml")),
    ("fig2", include_str!("../presets/fig2.toml")),
    ("fig3", include_str!("../presets/fig3.toml")),
    ("fig4", include_str!("../presets/fig4.toml")),
    ("suppression", include_str!("../presets/suppression.toml")),
    ("diffusion", include_str!("../presets/diffusion.toml")),
    ("free_rotor_period", include_str!("../presets/free_rotor_period.toml")),
];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PresetInfo {
    pub name: &'static str,
    pub description: String,
}

/// TOML source of a preset.
pub fn preset_source(name: &str) -> Option<&'static str> {
    PRESETS.iter().find(|(n, _)| *n == name).map(|(_, s)| *s)
}

pub fn list_presets() -> Vec<PresetInfo> {
    PRESETS
        .iter()
        .map(|(name, src)| {
            let description = src
                .parse::<toml::Table>()
                .ok()
                .and_then(|t| t.get("description").and_then(|d| d.as_str()).map(str::to_owned))
                .unwrap_or_default();
            PresetInfo { name, description }
        })
        .collect()
}
