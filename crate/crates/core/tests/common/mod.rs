//! Synthetic GSRC-format instances for end-to-end tests.

#![allow(dead_code)]

use std::fmt::Write as _;
use std::path::Path;

use csf_core::bench::BenchmarkBundle;
use csf_core::model::Netlist;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub struct Texts {
    pub blocks: String,
    pub nets: String,
    pub pl: String,
}

/// `n` hard blocks, `terms` pads on the border of a square of the given side,
/// and `nets` random nets of degree 2 to 5.
pub fn synthetic(n: usize, terms: usize, nets: usize, side: f64, seed: u64) -> Texts {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut blocks = String::from("UCSC blocks 1.0\n\n");
    let _ = writeln!(blocks, "NumSoftRectangularBlocks : 0");
    let _ = writeln!(blocks, "NumHardRectilinearBlocks : {n}");
    let _ = writeln!(blocks, "NumTerminals : {terms}\n");
    for i in 0..n {
        let w: u32 = rng.random_range(10..60);
        let h: u32 = rng.random_range(10..60);
        let _ = writeln!(
            blocks,
            "sb{i} hardrectilinear 4 (0, 0) (0, {h}) ({w}, {h}) ({w}, 0)"
        );
    }
    for t in 0..terms {
        let _ = writeln!(blocks, "p{t} terminal");
    }

    let mut body = String::new();
    let mut pins = 0;
    for k in 0..nets {
        let deg = rng.random_range(2..=5usize);
        let _ = writeln!(body, "NetDegree : {deg}");
        let mut used = Vec::new();
        for j in 0..deg {
            let pad = terms > 0 && j == 0 && k % 3 == 0;
            let name = if pad {
                format!("p{}", rng.random_range(0..terms))
            } else {
                loop {
                    let m = rng.random_range(0..n);
                    if !used.contains(&m) || used.len() >= n {
                        used.push(m);
                        break format!("sb{m}");
                    }
                }
            };
            let _ = writeln!(body, "{name} B");
            pins += 1;
        }
    }
    let nets_text = format!("UCLA nets 1.0\n\nNumNets : {nets}\nNumPins : {pins}\n{body}");

    let mut pl = String::from("UCLA pl 1.0\n\n");
    for i in 0..n {
        let _ = writeln!(pl, "sb{i} 0 0");
    }
    for t in 0..terms {
        let s = rng.random_range(0.0..side);
        let (x, y) = match t % 4 {
            0 => (s, 0.0),
            1 => (side, s),
            2 => (s, side),
            _ => (0.0, s),
        };
        let _ = writeln!(pl, "p{t} {x:.3} {y:.3}");
    }
    Texts {
        blocks,
        nets: nets_text,
        pl,
    }
}

pub fn write_bundle(dir: &Path, name: &str, t: &Texts) -> BenchmarkBundle {
    let b = BenchmarkBundle::in_dir(dir, name);
    std::fs::write(&b.blocks_path, &t.blocks).unwrap();
    std::fs::write(&b.nets_path, &t.nets).unwrap();
    std::fs::write(&b.pl_path, &t.pl).unwrap();
    b
}

pub fn load(n: usize, terms: usize, nets: usize, side: f64, seed: u64) -> Netlist {
    let dir = tempfile::tempdir().unwrap();
    let b = write_bundle(
        dir.path(),
        &format!("syn{n}"),
        &synthetic(n, terms, nets, side, seed),
    );
    b.load().unwrap().netlist
}
