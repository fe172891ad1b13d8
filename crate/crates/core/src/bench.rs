//! GSRC bookshelf reader (`.blocks`, `.nets`, `.pl`). MCNC instances are read
//! in their GSRC-format conversion.

use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::model::{ModuleSpec, Net, Netlist, Terminal};

/// Modules and terminal names declared by a `.blocks` file.
#[derive(Debug, Clone, PartialEq)]
pub struct Blocks {
    pub modules: Vec<ModuleSpec>,
    pub terminals: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Nets {
    pub nets: Vec<Net>,
    /// Pin lines read, before duplicate pins were merged.
    pub pins: usize,
    /// Value of the `NumPins` header, if present.
    pub declared_pins: Option<usize>,
}

/// Strips comments and blank lines, keeping 1-based line numbers.
fn lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().filter_map(|(i, l)| {
        let l = l.split('#').next().unwrap_or("").trim();
        (!l.is_empty()).then_some((i + 1, l))
    })
}

/// Value of a `Key : n` header line.
fn header(line: &str, key: &str) -> Option<std::result::Result<usize, String>> {
    let rest = line.strip_prefix(key)?.trim_start();
    let rest = rest.strip_prefix(':')?.trim();
    Some(
        rest.parse::<usize>()
            .map_err(|_| format!("bad {key} value {rest:?}")),
    )
}

fn is_magic(line: &str) -> bool {
    line.starts_with("UCSC") || line.starts_with("UCLA")
}

pub fn parse_blocks(text: &str, file: &str) -> Result<Blocks> {
    let mut soft = None;
    let mut hard = None;
    let mut terms = None;
    let mut modules = Vec::new();
    let mut terminals = Vec::new();

    for (ln, line) in lines(text) {
        if is_magic(line) {
            continue;
        }
        let mut matched = false;
        for (key, slot) in [
            ("NumSoftRectangularBlocks", &mut soft),
            ("NumHardRectilinearBlocks", &mut hard),
            ("NumTerminals", &mut terms),
        ] {
            if let Some(v) = header(line, key) {
                *slot = Some(v.map_err(|m| Error::parse(file, ln, m))?);
                matched = true;
            }
        }
        if matched {
            if let Some(s) = soft.filter(|&s| s > 0) {
                return Err(Error::Unsupported(format!("{file}: {s} soft blocks")));
            }
            continue;
        }

        let mut tok = line.split_whitespace();
        let name = tok.next().unwrap();
        match tok.next() {
            Some("terminal") => terminals.push(name.to_string()),
            Some("hardrectilinear") => {
                let (w, h) = vertex_box(line, file, ln)?;
                modules.push(ModuleSpec {
                    id: modules.len(),
                    name: name.to_string(),
                    width: w,
                    height: h,
                });
            }
            Some("softrectangular") => {
                return Err(Error::Unsupported(format!(
                    "{file}:{ln}: soft block {name}"
                )));
            }
            _ => {
                return Err(Error::parse(
                    file,
                    ln,
                    format!("unrecognized record {line:?}"),
                ))
            }
        }
    }

    if let Some(h) = hard {
        if h != modules.len() {
            return Err(Error::parse(
                file,
                0,
                format!("header declares {h} hard blocks, found {}", modules.len()),
            ));
        }
    }
    if let Some(t) = terms {
        if t != terminals.len() {
            return Err(Error::parse(
                file,
                0,
                format!("header declares {t} terminals, found {}", terminals.len()),
            ));
        }
    }
    Ok(Blocks { modules, terminals })
}

/// Bounding box of the `(x, y)` vertex list of a rectilinear block record.
fn vertex_box(line: &str, file: &str, ln: usize) -> Result<(f64, f64)> {
    let mut tok = line.split_whitespace().skip(2);
    let count: usize = tok
        .next()
        .and_then(|t| t.parse().ok())
        .ok_or_else(|| Error::parse(file, ln, "missing vertex count"))?;
    let rest: String = tok.collect::<Vec<_>>().join(" ");
    let mut pts = Vec::new();
    for chunk in rest.split('(').skip(1) {
        let inner = chunk.split(')').next().unwrap_or("");
        let nums: Vec<f64> = inner
            .split(',')
            .map(|s| s.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| Error::parse(file, ln, format!("bad vertex ({inner})")))?;
        if nums.len() != 2 {
            return Err(Error::parse(file, ln, format!("bad vertex ({inner})")));
        }
        pts.push((nums[0], nums[1]));
    }
    if pts.len() != count || count < 4 {
        return Err(Error::parse(
            file,
            ln,
            format!("expected {count} vertices, found {}", pts.len()),
        ));
    }
    let (mut x0, mut x1, mut y0, mut y1) = (
        f64::INFINITY,
        f64::NEG_INFINITY,
        f64::INFINITY,
        f64::NEG_INFINITY,
    );
    for (x, y) in pts {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    let (w, h) = (x1 - x0, y1 - y0);
    if !(w > 0.0 && h > 0.0) {
        return Err(Error::parse(file, ln, "degenerate block outline"));
    }
    Ok((w, h))
}

enum Pin {
    Module(usize),
    Terminal(usize),
}

pub fn parse_nets(text: &str, file: &str, blocks: &Blocks) -> Result<Nets> {
    let mut names: HashMap<&str, Pin> = HashMap::new();
    for m in &blocks.modules {
        names.insert(&m.name, Pin::Module(m.id));
    }
    for (i, t) in blocks.terminals.iter().enumerate() {
        names.insert(t, Pin::Terminal(i));
    }

    let mut declared_nets = None;
    let mut declared_pins = None;
    let mut nets = Vec::new();
    let mut pins = 0;
    let mut open: Option<(usize, usize, Net)> = None;
    let mut dupes = 0;

    let close =
        |open: &mut Option<(usize, usize, Net)>, nets: &mut Vec<Net>, ln: usize| -> Result<()> {
            if let Some((start, left, net)) = open.take() {
                if left > 0 {
                    return Err(Error::parse(
                        file,
                        ln,
                        format!("net starting at line {start} is missing {left} pins"),
                    ));
                }
                nets.push(net);
            }
            Ok(())
        };

    for (ln, line) in lines(text) {
        if is_magic(line) {
            continue;
        }
        if let Some(v) = header(line, "NumNets") {
            declared_nets = Some(v.map_err(|m| Error::parse(file, ln, m))?);
            continue;
        }
        if let Some(v) = header(line, "NumPins") {
            declared_pins = Some(v.map_err(|m| Error::parse(file, ln, m))?);
            continue;
        }
        if let Some(v) = header(line, "NetDegree") {
            close(&mut open, &mut nets, ln)?;
            let k = v.map_err(|m| Error::parse(file, ln, m))?;
            open = Some((ln, k, Net::default()));
            continue;
        }
        let Some((_, left, net)) = open.as_mut() else {
            return Err(Error::parse(
                file,
                ln,
                format!("pin line outside a net: {line:?}"),
            ));
        };
        if *left == 0 {
            return Err(Error::parse(file, ln, "more pins than the net degree"));
        }
        *left -= 1;
        pins += 1;
        let name = line.split_whitespace().next().unwrap();
        match names.get(name) {
            Some(Pin::Module(m)) if net.module_pins.contains(m) => dupes += 1,
            Some(Pin::Module(m)) => net.module_pins.push(*m),
            Some(Pin::Terminal(t)) if net.terminal_pins.contains(t) => dupes += 1,
            Some(Pin::Terminal(t)) => net.terminal_pins.push(*t),
            None => return Err(Error::parse(file, ln, format!("unknown pin {name:?}"))),
        }
    }
    close(&mut open, &mut nets, usize::MAX)?;

    if dupes > 0 {
        log::warn!("{file}: merged {dupes} repeated pins");
    }
    if let Some(n) = declared_nets {
        if n != nets.len() {
            return Err(Error::parse(
                file,
                0,
                format!("header declares {n} nets, found {}", nets.len()),
            ));
        }
    }
    if let Some(p) = declared_pins {
        if p != pins {
            log::warn!("{file}: header declares {p} pins, found {pins}");
        }
    }
    Ok(Nets {
        nets,
        pins,
        declared_pins,
    })
}

/// Coordinates of every declared terminal; module lines are ignored.
pub fn parse_pl(text: &str, file: &str, terminals: &[String]) -> Result<Vec<Terminal>> {
    let index: HashMap<&str, usize> = terminals
        .iter()
        .enumerate()
        .map(|(i, t)| (t.as_str(), i))
        .collect();
    let mut coords: Vec<Option<(f64, f64)>> = vec![None; terminals.len()];
    for (ln, line) in lines(text) {
        if is_magic(line) {
            continue;
        }
        let tok: Vec<&str> = line.split_whitespace().collect();
        let Some(&i) = index.get(tok[0]) else {
            continue;
        };
        if tok.len() < 3 {
            return Err(Error::parse(
                file,
                ln,
                format!("terminal {} has no coordinates", tok[0]),
            ));
        }
        let x = tok[1].parse::<f64>();
        let y = tok[2].parse::<f64>();
        let (Ok(x), Ok(y)) = (x, y) else {
            return Err(Error::parse(
                file,
                ln,
                format!("bad coordinates for {}", tok[0]),
            ));
        };
        if coords[i].is_some() {
            log::warn!(
                "{file}:{ln}: terminal {} listed again, using the later position",
                tok[0]
            );
        }
        coords[i] = Some((x, y));
    }
    let missing: Vec<&str> = terminals
        .iter()
        .zip(&coords)
        .filter(|(_, c)| c.is_none())
        .map(|(t, _)| t.as_str())
        .collect();
    if !missing.is_empty() {
        return Err(Error::parse(
            file,
            0,
            format!("terminals without coordinates: {}", missing.join(", ")),
        ));
    }
    Ok(terminals
        .iter()
        .zip(coords)
        .map(|(name, c)| {
            let (x, y) = c.unwrap();
            Terminal {
                name: name.clone(),
                x,
                y,
            }
        })
        .collect())
}

/// The three files of one instance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BenchmarkBundle {
    pub name: String,
    pub blocks_path: PathBuf,
    pub nets_path: PathBuf,
    pub pl_path: PathBuf,
}

impl BenchmarkBundle {
    /// `<dir>/<name>.blocks`, `.nets` and `.pl`.
    pub fn in_dir(dir: &Path, name: &str) -> Self {
        Self {
            name: name.to_string(),
            blocks_path: dir.join(format!("{name}.blocks")),
            nets_path: dir.join(format!("{name}.nets")),
            pl_path: dir.join(format!("{name}.pl")),
        }
    }

    /// Instance name taken from the `.blocks` file stem.
    pub fn from_paths(blocks: PathBuf, nets: PathBuf, pl: PathBuf) -> Self {
        let name = blocks
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "instance".into());
        Self {
            name,
            blocks_path: blocks,
            nets_path: nets,
            pl_path: pl,
        }
    }

    pub fn load(&self) -> Result<Loaded> {
        let read = |p: &Path| {
            fs::read_to_string(p).map_err(|source| Error::Io {
                path: p.display().to_string(),
                source,
            })
        };
        let bname = self.blocks_path.display().to_string();
        let blocks = parse_blocks(&read(&self.blocks_path)?, &bname)?;
        let nets = parse_nets(
            &read(&self.nets_path)?,
            &self.nets_path.display().to_string(),
            &blocks,
        )?;
        let terminals = parse_pl(
            &read(&self.pl_path)?,
            &self.pl_path.display().to_string(),
            &blocks.terminals,
        )?;
        let netlist = Netlist::new(self.name.clone(), blocks.modules, terminals, nets.nets)?;
        Ok(Loaded {
            netlist,
            pins: nets.pins,
        })
    }
}

#[derive(Debug, Clone)]
pub struct Loaded {
    pub netlist: Netlist,
    /// Pin lines in the `.nets` file.
    pub pins: usize,
}

#[cfg(test)]
mod tests {
    use super::*;

    const BLOCKS: &str = "UCSC blocks 1.0\n# comment\n\nNumSoftRectangularBlocks : 0\nNumHardRectilinearBlocks : 2\nNumTerminals : 1\n\nsb0 hardrectilinear 4 (0, 0) (0, 20) (30, 20) (30, 0)\nsb1 hardrectilinear 4 (0,0) (0,5) (7,5) (7,0)\np1 terminal\n";

    #[test]
    fn hard_block_dimensions() {
        let b = parse_blocks(BLOCKS, "t.blocks").unwrap();
        assert_eq!((b.modules[0].width, b.modules[0].height), (30.0, 20.0));
        assert_eq!((b.modules[1].width, b.modules[1].height), (7.0, 5.0));
        assert_eq!(b.terminals, vec!["p1".to_string()]);
    }

    #[test]
    fn empty_block_section() {
        let b = parse_blocks(
            "NumSoftRectangularBlocks : 0\nNumHardRectilinearBlocks : 0\nNumTerminals : 0\n",
            "e",
        )
        .unwrap();
        assert!(b.modules.is_empty() && b.terminals.is_empty());
    }

    #[test]
    fn soft_blocks_are_unsupported() {
        let e = parse_blocks("NumSoftRectangularBlocks : 3\n", "s").unwrap_err();
        assert!(matches!(e, Error::Unsupported(_)));
    }

    #[test]
    fn malformed_record_reports_line() {
        let text = "NumHardRectilinearBlocks : 1\nsb0 hardrectilinear 4 (0,0) (0,x) (3,2) (3,0)\n";
        match parse_blocks(text, "m.blocks").unwrap_err() {
            Error::Parse { line, .. } => assert_eq!(line, 2),
            e => panic!("{e}"),
        }
    }

    #[test]
    fn minimal_net() {
        let b = parse_blocks(BLOCKS, "t").unwrap();
        let n = parse_nets(
            "NumNets : 1\nNumPins : 2\nNetDegree : 2\nsb0 B\np1 B\n",
            "t.nets",
            &b,
        )
        .unwrap();
        assert_eq!(n.nets.len(), 1);
        assert_eq!(n.nets[0].module_pins, vec![0]);
        assert_eq!(n.nets[0].terminal_pins, vec![0]);
    }

    #[test]
    fn pin_offsets_and_duplicates() {
        let b = parse_blocks(BLOCKS, "t").unwrap();
        let text = "NetDegree : 3\nsb0 B : %10.0 %-5.0\nsb0 B\nsb1 I\n";
        let n = parse_nets(text, "t.nets", &b).unwrap();
        assert_eq!(n.nets[0].module_pins, vec![0, 1]);
        assert_eq!(n.pins, 3);
    }

    #[test]
    fn unknown_pin_is_named() {
        let b = parse_blocks(BLOCKS, "t").unwrap();
        let e = parse_nets("NetDegree : 1\nghost B\n", "t.nets", &b).unwrap_err();
        assert!(e.to_string().contains("ghost"));
    }

    #[test]
    fn short_net_is_an_error() {
        let b = parse_blocks(BLOCKS, "t").unwrap();
        assert!(parse_nets("NetDegree : 3\nsb0 B\nNetDegree : 1\nsb1 B\n", "t.nets", &b).is_err());
    }

    #[test]
    fn terminal_coordinates() {
        let t = parse_pl("UCLA pl 1.0\nsb0 0 0\np1 0 100\n", "t.pl", &["p1".into()]).unwrap();
        assert_eq!(
            t,
            vec![Terminal {
                name: "p1".into(),
                x: 0.0,
                y: 100.0
            }]
        );
    }

    #[test]
    fn missing_terminal_is_listed() {
        let e = parse_pl("p1 0 0\n", "t.pl", &["p1".into(), "p2".into()]).unwrap_err();
        assert!(e.to_string().contains("p2"));
    }

    #[test]
    fn duplicate_terminal_last_wins() {
        let t = parse_pl("p1 0 0\np1 5 6\n", "t.pl", &["p1".into()]).unwrap();
        assert_eq!((t[0].x, t[0].y), (5.0, 6.0));
    }
}
