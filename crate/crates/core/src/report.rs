//! Per-run result records as JSON, and an SVG drawing of the layout.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{effective_dims, Netlist, Outline, Placement};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModuleRecord {
    pub name: String,
    /// Center coordinates.
    pub x: f64,
    pub y: f64,
    pub rotated: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub instance: String,
    pub seed: u64,
    pub mode: String,
    pub legalizer: String,
    pub hpwl: f64,
    pub legal: bool,
    pub attempts: usize,
    pub t_g: f64,
    pub t_l: f64,
    pub t_w: f64,
    pub outline: Outline,
    pub modules: Vec<ModuleRecord>,
}

/// Run metadata that is not part of the placement.
#[derive(Debug, Clone, PartialEq)]
pub struct RunInfo {
    pub seed: u64,
    pub mode: String,
    pub legalizer: String,
    pub hpwl: f64,
    pub legal: bool,
    pub attempts: usize,
    pub t_g: f64,
    pub t_l: f64,
    pub t_w: f64,
}

impl RunRecord {
    pub fn new(
        netlist: &Netlist,
        placement: &Placement,
        outline: &Outline,
        info: RunInfo,
    ) -> Result<Self> {
        if placement.is_empty() {
            return Err(Error::InvalidArgument(
                "cannot report an empty placement".into(),
            ));
        }
        if placement.len() != netlist.num_modules() {
            return Err(Error::InvalidArgument(format!(
                "placement has {} modules, netlist has {}",
                placement.len(),
                netlist.num_modules()
            )));
        }
        let modules = netlist
            .modules
            .iter()
            .enumerate()
            .map(|(i, m)| ModuleRecord {
                name: m.name.clone(),
                x: placement.x[i],
                y: placement.y[i],
                rotated: placement.rotated[i],
            })
            .collect();
        Ok(Self {
            instance: netlist.name.clone(),
            seed: info.seed,
            mode: info.mode,
            legalizer: info.legalizer,
            hpwl: info.hpwl,
            legal: info.legal,
            attempts: info.attempts,
            t_g: info.t_g,
            t_l: info.t_l,
            t_w: info.t_w,
            outline: *outline,
            modules,
        })
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// The record with timing fields zeroed, for reproducibility comparisons.
    pub fn without_timings(&self) -> Self {
        Self {
            t_g: 0.0,
            t_l: 0.0,
            t_w: 0.0,
            ..self.clone()
        }
    }

    pub fn placement(&self) -> Placement {
        Placement {
            x: self.modules.iter().map(|m| m.x).collect(),
            y: self.modules.iter().map(|m| m.y).collect(),
            rotated: self.modules.iter().map(|m| m.rotated).collect(),
        }
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

/// Outline plus every module with its name; y grows upward as in the layout.
pub fn render_svg(netlist: &Netlist, placement: &Placement, outline: &Outline) -> Result<String> {
    if placement.is_empty() || placement.len() != netlist.num_modules() {
        return Err(Error::InvalidArgument(
            "placement does not match the netlist".into(),
        ));
    }
    let (x0, y0, x1, y1) = placement.bounding_box(netlist);
    let minx = x0.min(0.0);
    let miny = y0.min(0.0);
    let maxx = x1.max(outline.width);
    let maxy = y1.max(outline.height);
    let pad = 0.02 * (maxx - minx).max(maxy - miny);
    let (vw, vh) = (maxx - minx + 2.0 * pad, maxy - miny + 2.0 * pad);
    let font = 0.012 * vw.max(vh);
    // flip y so the origin sits at the bottom left
    let fy = |y: f64| maxy + pad - y;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="{} {} {vw} {vh}" width="800" height="{}">"#,
        minx - pad,
        0.0,
        (800.0 * vh / vw).round()
    );
    let _ = writeln!(
        s,
        r#"<rect x="0" y="{}" width="{}" height="{}" fill="none" stroke="black" stroke-width="{}"/>"#,
        fy(outline.height),
        outline.width,
        outline.height,
        font / 4.0
    );
    for (i, m) in netlist.modules.iter().enumerate() {
        let (w, h) = effective_dims(m, placement.rotated[i]);
        let (cx, cy) = (placement.x[i], placement.y[i]);
        let _ = writeln!(
            s,
            r##"<rect x="{}" y="{}" width="{w}" height="{h}" fill="#9ecae1" fill-opacity="0.7" stroke="#08519c" stroke-width="{}"/>"##,
            cx - w / 2.0,
            fy(cy + h / 2.0),
            font / 8.0
        );
        let _ = writeln!(
            s,
            r#"<text x="{cx}" y="{}" font-size="{font}" text-anchor="middle" dominant-baseline="middle">{}</text>"#,
            fy(cy),
            escape(&m.name)
        );
    }
    s.push_str("</svg>\n");
    Ok(s)
}
