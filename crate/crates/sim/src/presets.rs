//! Presets shipped with the binary, also available as files under `presets/`.

pub const PRESETS: [(&str, &str); 3] = [
    ("fig4a", include_str!("../presets/fig4a.toml")),
    ("fig4b", include_str!("../presets/fig4b.toml")),
    ("fig5", include_str!("../presets/fig5.toml")),
];

pub fn preset(name: &str) -> Option<&'static str> {
    PRESETS.iter().find(|p| p.0 == name).map(|p| p.1)
}

/// First comment line of each preset.
pub fn describe(text: &str) -> &str {
    text.lines().next().and_then(|l| l.strip_prefix("# ")).unwrap_or("")
}
