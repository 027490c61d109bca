//! SDPA sparse format (`.dat-s`).
//!
//! The standard form maps onto the SDPA dual problem: `F_i = A_i`, `c_i = b_i`
//! and `F_0 = −C`, so `max ⟨F_0, Y⟩ s.t. ⟨F_i, Y⟩ = c_i` is our problem with the
//! sign of the objective flipped.

use std::fmt::Write as _;

use super::{InstanceMeta, SdpInstance, SparseSym};
use crate::error::{Error, Result};

const MAGIC: &str = "* squash sdpa export";

fn num(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn to_string(inst: &SdpInstance) -> String {
    let mut out = String::new();
    out.push_str(MAGIC);
    out.push('\n');
    if let Some(meta) = &inst.meta {
        let dims: Vec<String> = meta.dims.iter().map(usize::to_string).collect();
        writeln!(out, "* m={} k={} dims={} state={}", meta.m, meta.k, dims.join(","), meta.state_hash).unwrap();
    }
    out.push_str("* minimise <C,X> s.t. <A_i,X> = b_i, X psd; F0 = -C, Fi = A_i, ci = b_i\n");
    writeln!(out, "{}", inst.constraints.len()).unwrap();
    out.push_str("1\n");
    writeln!(out, "{}", inst.side).unwrap();
    let c: Vec<String> = inst.rhs.iter().map(|&b| num(b)).collect();
    out.push_str(&c.join(" "));
    out.push('\n');
    for &(i, j, v) in inst.objective.entries() {
        writeln!(out, "0 1 {} {} {}", i + 1, j + 1, num(-v)).unwrap();
    }
    for (r, a) in inst.constraints.iter().enumerate() {
        for &(i, j, v) in a.entries() {
            writeln!(out, "{} 1 {} {} {}", r + 1, i + 1, j + 1, num(v)).unwrap();
        }
    }
    out
}

pub fn write(inst: &SdpInstance, path: &std::path::Path) -> Result<()> {
    std::fs::write(path, to_string(inst))?;
    Ok(())
}

/// Reads the provenance line written by [`to_string`], if present.
pub fn read_meta(text: &str) -> Option<InstanceMeta> {
    let line = text.lines().take_while(|l| l.starts_with('*') || l.starts_with('"')).find(|l| l.contains(" m="))?;
    let mut meta = InstanceMeta { m: 0, k: 0, dims: Vec::new(), state_hash: String::new() };
    for field in line.trim_start_matches('*').split_whitespace() {
        let (key, value) = field.split_once('=')?;
        match key {
            "m" => meta.m = value.parse().ok()?,
            "k" => meta.k = value.parse().ok()?,
            "dims" => meta.dims = value.split(',').map(str::parse).collect::<std::result::Result<_, _>>().ok()?,
            "state" => meta.state_hash = value.to_string(),
            _ => {}
        }
    }
    Some(meta)
}

/// Parses a single-block `.dat-s` file back into standard form.
pub fn parse(text: &str) -> Result<SdpInstance> {
    let bad = |msg: &str| Error::arg(format!("malformed SDPA input: {msg}"));
    let meta = read_meta(text);
    let mut tokens = text
        .lines()
        .filter(|l| !(l.starts_with('*') || l.starts_with('"')))
        .flat_map(|l| l.split(|c: char| c.is_whitespace() || "{}(),".contains(c)))
        .filter(|t| !t.is_empty());
    let mut next = |what: &str| tokens.next().ok_or_else(|| bad(&format!("missing {what}")));
    let m: usize = next("mDIM")?.parse().map_err(|_| bad("mDIM"))?;
    let nblock: usize = next("nBLOCK")?.parse().map_err(|_| bad("nBLOCK"))?;
    if nblock != 1 {
        return Err(Error::Unsupported(format!("{nblock} SDPA blocks; only single-block files are read")));
    }
    let side: i64 = next("blockStruct")?.parse().map_err(|_| bad("blockStruct"))?;
    if side <= 0 {
        return Err(Error::Unsupported("diagonal (LP) SDPA blocks".into()));
    }
    let side = side as usize;
    let rhs = (0..m)
        .map(|_| next("c vector")?.parse::<f64>().map_err(|_| bad("c vector")))
        .collect::<Result<Vec<f64>>>()?;
    let mut mats: Vec<SparseSym> = (0..=m).map(|_| SparseSym::new(side)).collect();
    while let Some(t) = tokens.next() {
        let mat: usize = t.parse().map_err(|_| bad("matrix number"))?;
        let mut field = |what: &str| tokens.next().ok_or_else(|| bad(&format!("truncated entry ({what})")));
        let _blk: usize = field("block")?.parse().map_err(|_| bad("block"))?;
        let i: usize = field("row")?.parse().map_err(|_| bad("row"))?;
        let j: usize = field("col")?.parse().map_err(|_| bad("col"))?;
        let v: f64 = field("value")?.parse().map_err(|_| bad("value"))?;
        if mat > m || i == 0 || j == 0 || i > side || j > side {
            return Err(bad("entry index out of range"));
        }
        mats[mat].push(i - 1, j - 1, if mat == 0 { -v } else { v });
    }
    for a in &mut mats {
        a.normalize();
    }
    let mut iter = mats.into_iter();
    let objective = iter.next().unwrap();
    Ok(SdpInstance { side, objective, constraints: iter.collect(), rhs, meta })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> SdpInstance {
        let mut inst = SdpInstance::new(2);
        inst.objective = SparseSym::from_triplets(2, [(0, 0, 1.0), (0, 1, -0.25)]);
        inst.add_constraint(SparseSym::from_triplets(2, [(0, 0, 1.0), (1, 1, 1.0)]), 1.0);
        inst.add_constraint(SparseSym::from_triplets(2, [(0, 1, 0.5)]), 0.1);
        inst.meta = Some(InstanceMeta { m: 3, k: 1, dims: vec![2, 2], state_hash: "abc123".into() });
        inst
    }

    #[test]
    fn layout_and_round_trip() {
        let inst = sample();
        let text = to_string(&inst);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[1], "* m=3 k=1 dims=2,2 state=abc123");
        assert_eq!(lines[3], "2");
        assert_eq!(lines[6], "1.0000000000000000e0 1.0000000000000001e-1");
        assert_eq!(lines[7], "0 1 1 1 -1.0000000000000000e0");
        assert_eq!(parse(&text).unwrap(), inst);
        assert_eq!(read_meta(&text), inst.meta);
        assert_eq!(to_string(&inst), text);
    }

    #[test]
    fn rejects_garbage() {
        assert!(parse("2\n1\n").is_err());
        assert!(parse("1\n2\n2 2\n1.0\n").is_err());
        assert!(parse("1\n1\n2\n1.0\n1 1 3 1 1.0\n").is_err());
    }
}
