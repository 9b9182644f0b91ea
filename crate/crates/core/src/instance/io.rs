//! Instance files: JSON text and a packed little-endian binary variant.
//!
//! JSON layout (keys sorted):
//! `{"alpha", "beta", "edges": [[u, v, w, [c_1..c_r]], ...], "gamma"?, "kind", "n", "r", "seed", "splits"?}`
//! with 0-based vertex ids and floats at 17 significant digits.
//!
//! Binary layout: magic `BOPT1`, kind tag `u8`, `n u64`, `r u64`, `alpha f64`,
//! `beta f64`, `seed u64`, gamma flag `u8` + `f64`, splits flag `u8`, then per
//! edge in canonical order `u u64, v u64, w f64, r x f64`, then the split
//! pairs when flagged.

use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::Deserialize;

use super::{EdgeRecord, GraphKind, Instance};
use crate::distributions::DistributionParams;
use crate::error::{Error, Result};
use crate::json::fmt_f64;

pub const BINARY_MAGIC: &[u8; 5] = b"BOPT1";

pub fn write_json<W: Write>(inst: &Instance, out: W) -> Result<()> {
    let mut w = BufWriter::new(out);
    let p = inst.params();
    writeln!(w, "{{")?;
    writeln!(w, "  \"alpha\": {},", fmt_f64(p.alpha))?;
    writeln!(w, "  \"beta\": {},", fmt_f64(p.beta))?;
    writeln!(w, "  \"edges\": [")?;
    let m = inst.edge_count();
    for e in inst.edges() {
        write!(w, "    [{},{},{},[", e.u, e.v, fmt_f64(e.weight))?;
        for (i, c) in e.costs.iter().enumerate() {
            if i > 0 {
                write!(w, ",")?;
            }
            write!(w, "{}", fmt_f64(*c))?;
        }
        writeln!(w, "]]{}", if e.id + 1 < m { "," } else { "" })?;
    }
    writeln!(w, "  ],")?;
    if let Some(g) = p.gamma {
        writeln!(w, "  \"gamma\": {},", fmt_f64(g))?;
    }
    writeln!(w, "  \"kind\": \"{}\",", inst.kind().name())?;
    writeln!(w, "  \"n\": {},", inst.n())?;
    writeln!(w, "  \"r\": {},", p.r)?;
    match inst.splits() {
        Some(splits) => {
            writeln!(w, "  \"seed\": {},", inst.seed())?;
            writeln!(w, "  \"splits\": [")?;
            for (i, [a, b]) in splits.iter().enumerate() {
                writeln!(w, "    [{},{}]{}", fmt_f64(*a), fmt_f64(*b), if i + 1 < m { "," } else { "" })?;
            }
            writeln!(w, "  ]")?;
        }
        None => writeln!(w, "  \"seed\": {}", inst.seed())?,
    }
    writeln!(w, "}}")?;
    w.flush()?;
    Ok(())
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceFile {
    kind: GraphKind,
    n: usize,
    r: usize,
    alpha: f64,
    beta: f64,
    seed: u64,
    edges: Vec<(usize, usize, f64, Vec<f64>)>,
    #[serde(default)]
    gamma: Option<f64>,
    #[serde(default)]
    splits: Option<Vec<[f64; 2]>>,
}

pub fn read_json<R: Read>(input: R) -> Result<Instance> {
    let file: InstanceFile =
        serde_json::from_reader(BufReader::new(input)).map_err(|e| Error::Format(format!("instance JSON: {e}")))?;
    let mut params = DistributionParams::new(file.alpha, file.beta, file.r)?;
    if let Some(g) = file.gamma {
        params = params.with_gamma(g)?;
    }
    let edges = file
        .edges
        .into_iter()
        .map(|(u, v, weight, costs)| EdgeRecord { u, v, weight, costs })
        .collect();
    Instance::from_edges(file.kind, file.n, params, file.seed, edges, file.splits)
}

pub fn write_binary<W: Write>(inst: &Instance, out: W) -> Result<()> {
    let mut w = BufWriter::new(out);
    let p = inst.params();
    w.write_all(BINARY_MAGIC)?;
    w.write_all(&[inst.kind().tag()])?;
    w.write_all(&(inst.n() as u64).to_le_bytes())?;
    w.write_all(&(p.r as u64).to_le_bytes())?;
    w.write_all(&p.alpha.to_le_bytes())?;
    w.write_all(&p.beta.to_le_bytes())?;
    w.write_all(&inst.seed().to_le_bytes())?;
    w.write_all(&[p.gamma.is_some() as u8])?;
    w.write_all(&p.gamma.unwrap_or(0.0).to_le_bytes())?;
    w.write_all(&[inst.has_splits() as u8])?;
    for e in inst.edges() {
        w.write_all(&(e.u as u64).to_le_bytes())?;
        w.write_all(&(e.v as u64).to_le_bytes())?;
        w.write_all(&e.weight.to_le_bytes())?;
        for c in e.costs {
            w.write_all(&c.to_le_bytes())?;
        }
    }
    if let Some(splits) = inst.splits() {
        for [a, b] in splits {
            w.write_all(&a.to_le_bytes())?;
            w.write_all(&b.to_le_bytes())?;
        }
    }
    w.flush()?;
    Ok(())
}

struct LeReader<R>(R);

impl<R: Read> LeReader<R> {
    fn bytes<const N: usize>(&mut self) -> Result<[u8; N]> {
        let mut buf = [0u8; N];
        self.0
            .read_exact(&mut buf)
            .map_err(|e| Error::Format(format!("truncated binary instance: {e}")))?;
        Ok(buf)
    }
    fn u8(&mut self) -> Result<u8> {
        Ok(self.bytes::<1>()?[0])
    }
    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.bytes()?))
    }
    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.bytes()?))
    }
}

pub fn read_binary<R: Read>(input: R) -> Result<Instance> {
    let mut rd = LeReader(BufReader::new(input));
    if &rd.bytes::<5>()? != BINARY_MAGIC {
        return Err(Error::Format("missing BOPT1 header".into()));
    }
    let kind = GraphKind::from_tag(rd.u8()?).ok_or_else(|| Error::Format("unknown graph kind tag".into()))?;
    let n = rd.u64()? as usize;
    let r = rd.u64()? as usize;
    let alpha = rd.f64()?;
    let beta = rd.f64()?;
    let seed = rd.u64()?;
    let has_gamma = rd.u8()? != 0;
    let gamma = rd.f64()?;
    let has_splits = rd.u8()? != 0;
    let mut params = DistributionParams::new(alpha, beta, r)?;
    if has_gamma {
        params = params.with_gamma(gamma)?;
    }
    let m = kind.edge_count(n);
    let mut edges = Vec::with_capacity(m);
    for _ in 0..m {
        let u = rd.u64()? as usize;
        let v = rd.u64()? as usize;
        let weight = rd.f64()?;
        let costs = (0..r).map(|_| rd.f64()).collect::<Result<Vec<_>>>()?;
        edges.push(EdgeRecord { u, v, weight, costs });
    }
    let splits = if has_splits {
        Some((0..m).map(|_| Ok([rd.f64()?, rd.f64()?])).collect::<Result<Vec<_>>>()?)
    } else {
        None
    };
    let mut probe = [0u8; 1];
    if rd.0.read(&mut probe)? != 0 {
        return Err(Error::Format("trailing bytes after binary instance".into()));
    }
    Instance::from_edges(kind, n, params, seed, edges, splits)
}

/// Writes an instance file; `binary` selects the packed format.
pub fn save(inst: &Instance, path: &Path, binary: bool) -> Result<()> {
    let file = std::fs::File::create(path)?;
    if binary {
        write_binary(inst, file)
    } else {
        write_json(inst, file)
    }
}

/// Reads an instance file, detecting the binary header.
pub fn load(path: &Path) -> Result<Instance> {
    let mut reader = BufReader::new(std::fs::File::open(path)?);
    let head = reader.fill_buf()?;
    if head.starts_with(BINARY_MAGIC) {
        read_binary(reader)
    } else {
        read_json(reader)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{generate, GenerateOptions};

    fn sample(kind: GraphKind, splits: bool) -> Instance {
        let params = DistributionParams::new(0.5, 0.75, 2).unwrap().with_gamma(1.5).unwrap();
        let opts = if splits { GenerateOptions::default() } else { GenerateOptions::without_splits() };
        generate(kind, 7, params, 42, opts).unwrap()
    }

    #[test]
    fn json_roundtrip_is_exact() {
        for kind in [GraphKind::Complete, GraphKind::Bipartite, GraphKind::Digraph] {
            for splits in [false, true] {
                let inst = sample(kind, splits);
                let mut buf = Vec::new();
                write_json(&inst, &mut buf).unwrap();
                let back = read_json(&buf[..]).unwrap();
                assert_eq!(back, inst);
                let mut again = Vec::new();
                write_json(&back, &mut again).unwrap();
                assert_eq!(buf, again);
            }
        }
    }

    #[test]
    fn binary_roundtrip_is_exact() {
        for kind in [GraphKind::Complete, GraphKind::Bipartite, GraphKind::Digraph] {
            let inst = sample(kind, true);
            let mut buf = Vec::new();
            write_binary(&inst, &mut buf).unwrap();
            assert!(buf.starts_with(BINARY_MAGIC));
            assert_eq!(read_binary(&buf[..]).unwrap(), inst);
            buf.push(0);
            assert!(read_binary(&buf[..]).is_err());
        }
    }

    #[test]
    fn malformed_json_is_format_error() {
        assert!(matches!(read_json(&b"{\"kind\": \"complete\"}"[..]), Err(Error::Format(_))));
        let bad = br#"{"alpha":1,"beta":1,"edges":[[0,1,1.0,[1.0]]],"kind":"complete","n":3,"r":1,"seed":0}"#;
        assert!(matches!(read_json(&bad[..]), Err(Error::Format(_))));
    }

    #[test]
    fn load_detects_format() {
        let dir = std::env::temp_dir().join(format!("budgetopt-io-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let inst = sample(GraphKind::Digraph, true);
        for binary in [false, true] {
            let path = dir.join(if binary { "i.bin" } else { "i.json" });
            save(&inst, &path, binary).unwrap();
            assert_eq!(load(&path).unwrap(), inst);
        }
        std::fs::remove_dir_all(&dir).ok();
    }
}
