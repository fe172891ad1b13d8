//! Problem instance and solution types shared by every stage.
//!
//! Coordinates are module centers in µm. Pins sit at module centers; terminals
//! are fixed pads that contribute to net extents but never move.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A hard rectangular module.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModuleSpec {
    pub id: usize,
    pub name: String,
    pub width: f64,
    pub height: f64,
}

impl ModuleSpec {
    pub fn area(&self) -> f64 {
        self.width * self.height
    }
}

/// A fixed I/O pad.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Terminal {
    pub name: String,
    pub x: f64,
    pub y: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Net {
    pub module_pins: Vec<usize>,
    pub terminal_pins: Vec<usize>,
}

impl Net {
    pub fn degree(&self) -> usize {
        self.module_pins.len() + self.terminal_pins.len()
    }
}

/// Immutable problem instance.
#[derive(Debug, Clone, PartialEq)]
pub struct Netlist {
    pub name: String,
    pub modules: Vec<ModuleSpec>,
    pub terminals: Vec<Terminal>,
    pub nets: Vec<Net>,
    total_area: f64,
}

impl Netlist {
    /// Validates ids, dimensions and pin references, and caches the total area.
    pub fn new(
        name: impl Into<String>,
        modules: Vec<ModuleSpec>,
        terminals: Vec<Terminal>,
        nets: Vec<Net>,
    ) -> Result<Self> {
        for (i, m) in modules.iter().enumerate() {
            if m.id != i {
                return Err(Error::InvalidArgument(format!(
                    "module ids must be dense: position {i} holds id {}",
                    m.id
                )));
            }
            if !(m.width > 0.0 && m.height > 0.0) || !m.width.is_finite() || !m.height.is_finite() {
                return Err(Error::InvalidArgument(format!(
                    "module {} has non-positive dimensions {}x{}",
                    m.name, m.width, m.height
                )));
            }
        }
        for t in &terminals {
            if !t.x.is_finite() || !t.y.is_finite() {
                return Err(Error::InvalidArgument(format!(
                    "terminal {} has non-finite coordinates",
                    t.name
                )));
            }
        }
        for (k, net) in nets.iter().enumerate() {
            if net.degree() == 0 {
                return Err(Error::InvalidArgument(format!("net {k} has no pins")));
            }
            let mut seen = net.module_pins.clone();
            seen.sort_unstable();
            seen.dedup();
            if seen.len() != net.module_pins.len() {
                return Err(Error::InvalidArgument(format!(
                    "net {k} lists a module twice"
                )));
            }
            if let Some(&m) = net.module_pins.iter().find(|&&m| m >= modules.len()) {
                return Err(Error::InvalidArgument(format!(
                    "net {k} references unknown module {m}"
                )));
            }
            if let Some(&t) = net.terminal_pins.iter().find(|&&t| t >= terminals.len()) {
                return Err(Error::InvalidArgument(format!(
                    "net {k} references unknown terminal {t}"
                )));
            }
        }
        let total_area = modules.iter().map(ModuleSpec::area).sum();
        Ok(Self {
            name: name.into(),
            modules,
            terminals,
            nets,
            total_area,
        })
    }

    pub fn num_modules(&self) -> usize {
        self.modules.len()
    }

    /// Sum of module areas.
    pub fn total_area(&self) -> f64 {
        self.total_area
    }

    /// Effective (width, height) of every module under the given orientation bits.
    pub fn dims(&self, rotated: &[bool]) -> Vec<(f64, f64)> {
        self.modules
            .iter()
            .zip(rotated)
            .map(|(m, &r)| effective_dims(m, r))
            .collect()
    }
}

/// Fixed die rectangle with origin at (0, 0).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Outline {
    pub width: f64,
    pub height: f64,
    /// Whitespace ratio used to generate the outline, when generated.
    pub gamma: Option<f64>,
    /// Width-height ratio used to generate the outline, when generated.
    pub aspect_ratio: Option<f64>,
}

impl Outline {
    pub fn manual(width: f64, height: f64) -> Result<Self> {
        if !(width > 0.0 && height > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "outline must be positive, got {width}x{height}"
            )));
        }
        Ok(Self {
            width,
            height,
            gamma: None,
            aspect_ratio: None,
        })
    }
}

/// Outline of area `(1 + gamma) * area` with `width / height = 1 / aspect_ratio`.
pub fn generate_outline(area: f64, aspect_ratio: f64, gamma: f64) -> Result<Outline> {
    if !(area > 0.0) || !area.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "module area must be positive, got {area}"
        )));
    }
    if !(aspect_ratio > 0.0) || !aspect_ratio.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "aspect ratio must be positive, got {aspect_ratio}"
        )));
    }
    if !(gamma >= 0.0) || !gamma.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "whitespace ratio must be non-negative, got {gamma}"
        )));
    }
    let scaled = (1.0 + gamma) * area;
    Ok(Outline {
        width: (scaled / aspect_ratio).sqrt(),
        height: (scaled * aspect_ratio).sqrt(),
        gamma: Some(gamma),
        aspect_ratio: Some(aspect_ratio),
    })
}

pub fn effective_dims(spec: &ModuleSpec, rotated: bool) -> (f64, f64) {
    if rotated {
        (spec.height, spec.width)
    } else {
        (spec.width, spec.height)
    }
}

/// Center coordinates and orientation bits of every module.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Placement {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub rotated: Vec<bool>,
}

impl Placement {
    pub fn new(x: Vec<f64>, y: Vec<f64>, rotated: Vec<bool>) -> Result<Self> {
        if x.len() != y.len() || x.len() != rotated.len() {
            return Err(Error::InvalidArgument(format!(
                "placement vectors differ in length: {} / {} / {}",
                x.len(),
                y.len(),
                rotated.len()
            )));
        }
        Ok(Self { x, y, rotated })
    }

    pub fn zeros(n: usize) -> Self {
        Self {
            x: vec![0.0; n],
            y: vec![0.0; n],
            rotated: vec![false; n],
        }
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    /// Flattened decision vector `x ‖ y`.
    pub fn to_vector(&self) -> Vec<f64> {
        let mut u = Vec::with_capacity(2 * self.len());
        u.extend_from_slice(&self.x);
        u.extend_from_slice(&self.y);
        u
    }

    /// Overwrites the coordinates from a flattened `x ‖ y` vector.
    pub fn set_from_vector(&mut self, u: &[f64]) {
        let n = self.len();
        assert_eq!(u.len(), 2 * n, "decision vector length mismatch");
        self.x.copy_from_slice(&u[..n]);
        self.y.copy_from_slice(&u[n..]);
    }

    pub fn from_vector(u: &[f64], rotated: Vec<bool>) -> Self {
        let n = rotated.len();
        assert_eq!(u.len(), 2 * n, "decision vector length mismatch");
        Self {
            x: u[..n].to_vec(),
            y: u[n..].to_vec(),
            rotated,
        }
    }

    /// Bounding box `(xmin, ymin, xmax, ymax)` of the placed modules.
    pub fn bounding_box(&self, netlist: &Netlist) -> (f64, f64, f64, f64) {
        let mut bb = (
            f64::INFINITY,
            f64::INFINITY,
            f64::NEG_INFINITY,
            f64::NEG_INFINITY,
        );
        for (i, (w, h)) in netlist.dims(&self.rotated).into_iter().enumerate() {
            bb.0 = bb.0.min(self.x[i] - 0.5 * w);
            bb.1 = bb.1.min(self.y[i] - 0.5 * h);
            bb.2 = bb.2.max(self.x[i] + 0.5 * w);
            bb.3 = bb.3.max(self.y[i] + 0.5 * h);
        }
        bb
    }
}
