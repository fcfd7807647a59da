//! Text graph format; see `docs/graph-format.md`.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use sha2::{Digest, Sha256};

use crate::digraph::Digraph;
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::nds::{BaseFlow, BaseKind};
use crate::sampling::BaseSampling;
use crate::scalar::Real;
use crate::transition::{GraphMeta, TransitionGraph};

pub const FORMAT_MAGIC: &str = "CNDS1";
pub const FORMAT_VERSION: &str = "1";
const SEPARATOR: &str = "---";

fn join<T: ToString>(v: &[T]) -> String {
    v.iter().map(T::to_string).collect::<Vec<_>>().join(",")
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().fold(String::new(), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

fn body_line<S>(g: &TransitionGraph<S>, v: usize, line: &mut String) {
    line.clear();
    let _ = write!(line, "{v}");
    if g.escaped[v] {
        line.push('!');
    }
    line.push(':');
    for &t in g.graph.successors(v) {
        let _ = write!(line, " {t}");
    }
    line.push('\n');
}

fn descriptive_header<S: Real>(g: &TransitionGraph<S>) -> Result<Vec<(String, String)>> {
    let mut h: Vec<(String, String)> = Vec::new();
    let mut put = |k: &str, v: String| h.push((k.to_string(), v));
    for text in [&g.meta.system, &g.sampling.base.label] {
        if text.contains('\n') {
            return Err(Error::InvalidInput("names in the graph header must be single-line".into()));
        }
    }
    put("version", FORMAT_VERSION.into());
    put("system", g.meta.system.clone());
    put("mode", g.meta.mode.to_string());
    put("leg_steps", g.meta.leg_steps.to_string());
    put("grid.dim", g.grid.dim().to_string());
    put("grid.lo", join(g.grid.lo()));
    put("grid.hi", join(g.grid.hi()));
    put("grid.depth", join(g.grid.depth()));
    put("grid.circular", join(&g.grid.circular().iter().map(|&c| c as u8).collect::<Vec<_>>()));
    let base = &g.sampling.base;
    match &base.kind {
        BaseKind::TrivialPoint => put("base.kind", "trivial".into()),
        BaseKind::PeriodicCircle { period, origin } => {
            put("base.kind", "periodic".into());
            put("base.period", period.to_string());
            put("base.origin", origin.to_string());
        }
        BaseKind::FiniteSet { shift } => {
            put("base.kind", "finite".into());
            put("base.shift", join(shift));
        }
        BaseKind::Line { lo, hi } => {
            put("base.kind", "line".into());
            put("base.lo", lo.to_string());
            put("base.hi", hi.to_string());
        }
    }
    put("base.label", base.label.clone());
    put("base.m", g.sampling.len().to_string());
    put("base.T", g.sampling.step.to_string());
    put("base.samples", join(&g.sampling.samples));
    put("base.step_perm", join(&g.sampling.step_perm));
    put("meta.eps_pad", g.meta.eps_pad.to_string());
    put("meta.scheme", g.meta.scheme.to_string());
    put("meta.integrator", g.meta.integrator.clone());
    put("meta.escape", g.meta.escape.to_string());
    Ok(h)
}

fn meta_hash(h: &[(String, String)]) -> String {
    let mut sha = Sha256::new();
    for (k, v) in h {
        sha.update(k.as_bytes());
        sha.update(b"=");
        sha.update(v.as_bytes());
        sha.update(b"\n");
    }
    hex(&sha.finalize()[..8])
}

/// Writes the graph in the text format.
pub fn write_graph<S: Real, W: Write>(g: &TransitionGraph<S>, w: W) -> Result<()> {
    let mut w = BufWriter::new(w);
    let mut header = descriptive_header(g)?;
    let hash = meta_hash(&header);
    header.push(("meta.hash".into(), hash));
    header.push(("nodes".into(), g.node_count().to_string()));
    header.push(("edges".into(), g.graph.edge_count().to_string()));
    header.push(("outside".into(), g.outside.map_or("none".into(), |o| o.to_string())));

    let mut line = String::new();
    let mut sha = Sha256::new();
    for v in 0..g.node_count() {
        body_line(g, v, &mut line);
        sha.update(line.as_bytes());
    }
    header.push(("check".into(), hex(&sha.finalize())));

    writeln!(w, "{FORMAT_MAGIC}")?;
    for (k, v) in &header {
        writeln!(w, "{k}={v}")?;
    }
    writeln!(w, "{SEPARATOR}")?;
    for v in 0..g.node_count() {
        body_line(g, v, &mut line);
        w.write_all(line.as_bytes())?;
    }
    w.flush()?;
    Ok(())
}

pub fn save_graph<S: Real>(g: &TransitionGraph<S>, path: impl AsRef<Path>) -> Result<()> {
    write_graph(g, File::create(path)?)
}

pub fn load_graph<S: Real>(path: impl AsRef<Path>) -> Result<TransitionGraph<S>> {
    read_graph(BufReader::new(File::open(path)?))
}

fn corrupt(msg: impl Into<String>) -> Error {
    Error::CorruptHeader(msg.into())
}

/// Line reader that rejects a final line without its newline.
struct Lines<R> {
    r: R,
    buf: String,
}

impl<R: BufRead> Iterator for Lines<R> {
    type Item = Result<String>;

    fn next(&mut self) -> Option<Result<String>> {
        self.buf.clear();
        match self.r.read_line(&mut self.buf) {
            Ok(0) => None,
            Ok(_) => match self.buf.strip_suffix('\n') {
                Some(l) => Some(Ok(l.to_string())),
                None => Some(Err(corrupt("last line lacks its newline"))),
            },
            Err(e) => Some(Err(e.into())),
        }
    }
}

struct Header(HashMap<String, String>);

impl Header {
    fn get(&self, k: &str) -> Result<&str> {
        self.0.get(k).map(String::as_str).ok_or_else(|| corrupt(format!("missing header key `{k}`")))
    }

    fn parse<T: FromStr>(&self, k: &str) -> Result<T> {
        self.get(k)?.parse().map_err(|_| corrupt(format!("bad value for `{k}`")))
    }

    fn list<T: FromStr>(&self, k: &str) -> Result<Vec<T>> {
        let v = self.get(k)?;
        if v.is_empty() {
            return Ok(Vec::new());
        }
        v.split(',')
            .map(|x| x.parse().map_err(|_| corrupt(format!("bad list entry in `{k}`"))))
            .collect()
    }
}

/// Reads a graph, verifying magic, version, meta hash and body checksum.
pub fn read_graph<S: Real, R: BufRead>(r: R) -> Result<TransitionGraph<S>> {
    let mut lines = Lines { r, buf: String::new() };
    let magic = match lines.next() {
        Some(l) => l?,
        None => return Err(corrupt("empty file")),
    };
    if magic != FORMAT_MAGIC {
        if magic.starts_with("CNDS") {
            return Err(Error::FormatVersionMismatch { found: magic, expected: FORMAT_MAGIC.into() });
        }
        return Err(corrupt("bad magic"));
    }
    let mut order = Vec::new();
    let mut map = HashMap::new();
    loop {
        let l = match lines.next() {
            Some(l) => l?,
            None => return Err(corrupt("header not terminated")),
        };
        if l == SEPARATOR {
            break;
        }
        let (k, v) = l.split_once('=').ok_or_else(|| corrupt(format!("malformed header line `{l}`")))?;
        order.push((k.to_string(), v.to_string()));
        map.insert(k.to_string(), v.to_string());
    }
    let h = Header(map);
    let version = h.get("version")?;
    if version != FORMAT_VERSION {
        return Err(Error::FormatVersionMismatch { found: version.into(), expected: FORMAT_VERSION.into() });
    }
    let descriptive: Vec<(String, String)> = order.iter().take_while(|(k, _)| k != "meta.hash").cloned().collect();
    if meta_hash(&descriptive) != h.get("meta.hash")? {
        return Err(corrupt("meta hash mismatch"));
    }

    let dim: usize = h.parse("grid.dim")?;
    let lo: Vec<S> = h.list("grid.lo")?;
    let hi: Vec<S> = h.list("grid.hi")?;
    let depth: Vec<u32> = h.list("grid.depth")?;
    let circular: Vec<bool> = h.list::<u8>("grid.circular")?.into_iter().map(|c| c != 0).collect();
    if lo.len() != dim {
        return Err(corrupt("grid.dim disagrees with grid.lo"));
    }
    let window: Vec<(S, S)> = lo.into_iter().zip(hi).collect();
    let grid = Grid::new(&window, &depth, &circular, u64::MAX)
        .map_err(|e| corrupt(format!("grid: {e}")))?;

    let base = match h.get("base.kind")? {
        "trivial" => BaseFlow::trivial(),
        "periodic" => BaseFlow::periodic_from(h.parse("base.period")?, h.parse("base.origin")?)?,
        "finite" => BaseFlow::finite(h.list("base.shift")?)?,
        "line" => BaseFlow::line(h.parse("base.lo")?, h.parse("base.hi")?)?,
        other => return Err(corrupt(format!("unknown base kind `{other}`"))),
    }
    .with_label(h.get("base.label")?);
    let sampling = BaseSampling {
        base,
        step: h.parse("base.T")?,
        samples: h.list("base.samples")?,
        step_perm: h.list("base.step_perm")?,
    };
    let m: usize = h.parse("base.m")?;
    if sampling.samples.len() != m || sampling.step_perm.len() != m || sampling.step_perm.iter().any(|&j| j >= m) {
        return Err(corrupt("base sampling is inconsistent"));
    }
    let meta = GraphMeta {
        system: h.get("system")?.to_string(),
        mode: h.get("mode")?.parse().map_err(|_| corrupt("bad mode"))?,
        leg_steps: h.parse("leg_steps")?,
        eps_pad: h.parse("meta.eps_pad")?,
        scheme: h.parse("meta.scheme")?,
        integrator: h.get("meta.integrator")?.to_string(),
        escape: h.get("meta.escape")?.parse().map_err(|_| corrupt("bad escape policy"))?,
    };
    let nodes: usize = h.parse("nodes")?;
    let edges: usize = h.parse("edges")?;
    let outside = match h.get("outside")? {
        "none" => None,
        v => Some(v.parse().map_err(|_| corrupt("bad outside id"))?),
    };
    let expected_nodes = m * grid.box_count() + usize::from(outside.is_some());
    if nodes != expected_nodes || outside.is_some_and(|o| o != m * grid.box_count()) {
        return Err(corrupt("node count disagrees with grid and sampling"));
    }

    let mut sha = Sha256::new();
    let mut offsets = Vec::with_capacity(nodes + 1);
    offsets.push(0);
    let mut targets = Vec::with_capacity(edges);
    let mut escaped = Vec::with_capacity(nodes);
    for v in 0..nodes {
        let l = match lines.next() {
            Some(l) => l?,
            None => return Err(corrupt(format!("truncated body at node {v}"))),
        };
        sha.update(l.as_bytes());
        sha.update(b"\n");
        let (id, rest) = l.split_once(':').ok_or_else(|| corrupt(format!("malformed node line {v}")))?;
        let (id, esc) = match id.strip_suffix('!') {
            Some(i) => (i, true),
            None => (id, false),
        };
        if id.parse::<usize>().ok() != Some(v) {
            return Err(corrupt(format!("node line {v} carries id `{id}`")));
        }
        escaped.push(esc);
        for t in rest.split_ascii_whitespace() {
            targets.push(t.parse::<u32>().map_err(|_| corrupt(format!("bad successor on node {v}")))?);
        }
        offsets.push(targets.len());
    }
    if lines.next().is_some() {
        return Err(corrupt("trailing data after body"));
    }
    if hex(&sha.finalize()) != h.get("check")? {
        return Err(corrupt("body checksum mismatch"));
    }
    if targets.len() != edges {
        return Err(corrupt("edge count mismatch"));
    }
    let graph = Digraph::from_csr(offsets, targets).map_err(|e| corrupt(e.to_string()))?;
    Ok(TransitionGraph { grid, sampling, meta, graph, escaped, outside })
}
