//! Figure presets shipped as scenario files.

pub const FIGURE_NAMES: [&str; 5] = ["fig2a", "fig2b", "fig3", "fig4a", "fig4b"];

pub fn preset(name: &str) -> Option<&'static str> {
    Some(match name {
        "fig2a" => include_str!("../../presets/fig2a.cfg"),
        "fig2b" => include_str!("../../presets/fig2b.cfg"),
        "fig3" => include_str!("../../presets/fig3.cfg"),
        "fig4a" => include_str!("../../presets/fig4a.cfg"),
        "fig4b" => include_str!("../../presets/fig4b.cfg"),
        _ => return None,
    })
}
