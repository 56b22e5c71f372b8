//! Text formats for graphs, palettes and assignments, plus the MIS solver
//! exchange format.
//!
//! ```text
//! graph <n> <m>          palette <n>               <v> <color>
//! <u> <v>                <v> <k> <c1> ... <ck>     ...
//! ```

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::graph::{Color, ColoringAssignment, Graph, GraphError, ListColoringInstance, NodeId, Palette};

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{}line {line}: {msg}", .path.as_ref().map(|p| format!("{}: ", p.display())).unwrap_or_default())]
    Parse {
        path: Option<PathBuf>,
        line: usize,
        msg: String,
    },
    #[error(transparent)]
    Graph(#[from] GraphError),
}

impl FormatError {
    fn at(line: usize, msg: impl Into<String>) -> Self {
        FormatError::Parse {
            path: None,
            line,
            msg: msg.into(),
        }
    }

    pub fn in_file(self, p: &Path) -> Self {
        match self {
            FormatError::Parse { line, msg, .. } => FormatError::Parse {
                path: Some(p.to_path_buf()),
                line,
                msg,
            },
            e => e,
        }
    }
}

/// Non-empty lines with their 1-based numbers; `#` starts a comment.
fn lines(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines().enumerate().filter_map(|(i, l)| {
        let l = l.split('#').next().unwrap_or("");
        let toks: Vec<&str> = l.split_whitespace().collect();
        (!toks.is_empty()).then_some((i + 1, toks))
    })
}

fn num<T: std::str::FromStr>(tok: &str, line: usize, what: &str) -> Result<T, FormatError> {
    tok.parse()
        .map_err(|_| FormatError::at(line, format!("{what}: expected a non-negative integer, found {tok:?}")))
}

fn header<'a>(
    it: &mut impl Iterator<Item = (usize, Vec<&'a str>)>,
    keyword: &str,
    arity: usize,
) -> Result<(usize, Vec<&'a str>), FormatError> {
    let (line, toks) = it
        .next()
        .ok_or_else(|| FormatError::at(1, format!("missing \"{keyword}\" header")))?;
    if toks[0] != keyword || toks.len() != arity + 1 {
        return Err(FormatError::at(
            line,
            format!("expected \"{keyword}\" followed by {arity} number(s)"),
        ));
    }
    Ok((line, toks))
}

pub fn write_graph(g: &Graph) -> String {
    let mut s = format!("graph {} {}\n", g.node_count(), g.edge_count());
    for (u, v) in g.edges() {
        let _ = writeln!(s, "{u} {v}");
    }
    s
}

pub fn parse_graph(text: &str) -> Result<Graph, FormatError> {
    let mut it = lines(text);
    let (hline, h) = header(&mut it, "graph", 2)?;
    let n: usize = num(h[1], hline, "node count")?;
    let m: usize = num(h[2], hline, "edge count")?;
    let mut edges = Vec::with_capacity(m);
    for (line, toks) in it {
        if toks.len() != 2 {
            return Err(FormatError::at(line, "expected an edge \"<u> <v>\""));
        }
        let u: NodeId = num(toks[0], line, "endpoint")?;
        let v: NodeId = num(toks[1], line, "endpoint")?;
        if u as usize >= n || v as usize >= n {
            return Err(FormatError::at(line, format!("node id out of range for n = {n}")));
        }
        if u == v {
            return Err(FormatError::at(line, format!("self-loop at node {u}")));
        }
        edges.push((u, v));
    }
    if edges.len() != m {
        return Err(FormatError::at(
            hline,
            format!("header declares {m} edges but {} were listed", edges.len()),
        ));
    }
    Ok(Graph::from_edges(n, edges)?)
}

pub fn write_palettes(palettes: &[Palette]) -> String {
    let mut s = format!("palette {}\n", palettes.len());
    for (v, p) in palettes.iter().enumerate() {
        let _ = write!(s, "{v} {}", p.len());
        for c in p.iter() {
            let _ = write!(s, " {c}");
        }
        s.push('\n');
    }
    s
}

pub fn parse_palettes(text: &str) -> Result<Vec<Palette>, FormatError> {
    let mut it = lines(text);
    let (hline, h) = header(&mut it, "palette", 1)?;
    let n: usize = num(h[1], hline, "node count")?;
    let mut out: Vec<Option<Palette>> = vec![None; n];
    for (line, toks) in it {
        if toks.len() < 2 {
            return Err(FormatError::at(line, "expected \"<v> <k> <c1> ... <ck>\""));
        }
        let v: usize = num(toks[0], line, "node id")?;
        let k: usize = num(toks[1], line, "palette size")?;
        if v >= n {
            return Err(FormatError::at(line, format!("node id {v} out of range for n = {n}")));
        }
        if toks.len() != k + 2 {
            return Err(FormatError::at(
                line,
                format!("palette size {k} but {} colors listed", toks.len() - 2),
            ));
        }
        let colors = toks[2..]
            .iter()
            .map(|t| num::<Color>(t, line, "color"))
            .collect::<Result<Vec<_>, _>>()?;
        let p = Palette::new(colors);
        if p.len() != k {
            return Err(FormatError::at(line, "palette lists a color twice"));
        }
        if out[v].replace(p).is_some() {
            return Err(FormatError::at(line, format!("second palette for node {v}")));
        }
    }
    out.into_iter()
        .enumerate()
        .map(|(v, p)| p.ok_or_else(|| FormatError::at(hline, format!("no palette for node {v}"))))
        .collect()
}

pub fn write_assignment(a: &ColoringAssignment) -> String {
    let mut s = String::new();
    for (v, c) in a.colors.iter().enumerate() {
        if let Some(c) = c {
            let _ = writeln!(s, "{v} {c}");
        }
    }
    s
}

/// Nodes without a line stay uncolored.
pub fn parse_assignment(text: &str, n: usize) -> Result<ColoringAssignment, FormatError> {
    let mut a = ColoringAssignment::empty(n);
    for (line, toks) in lines(text) {
        if toks.len() != 2 {
            return Err(FormatError::at(line, "expected \"<v> <color>\""));
        }
        let v: NodeId = num(toks[0], line, "node id")?;
        let c: Color = num(toks[1], line, "color")?;
        if v as usize >= n {
            return Err(FormatError::at(line, format!("node id {v} out of range for n = {n}")));
        }
        if a.get(v).is_some() {
            return Err(FormatError::at(line, format!("node {v} assigned twice")));
        }
        a.set(v, c);
    }
    a.finish();
    Ok(a)
}

/// Member ids on one line, then `rounds <r>`.
pub fn write_mis_output(members: &[u32], rounds: u64) -> String {
    let ids: Vec<String> = members.iter().map(|m| m.to_string()).collect();
    format!("{}\nrounds {rounds}\n", ids.join(" "))
}

pub fn parse_mis_output(text: &str) -> Result<(Vec<u32>, u64), FormatError> {
    let raw: Vec<&str> = text.lines().collect();
    let rounds_at = raw
        .iter()
        .rposition(|l| l.trim_start().starts_with("rounds"))
        .ok_or_else(|| FormatError::at(raw.len().max(1), "missing \"rounds <r>\" line"))?;
    let toks: Vec<&str> = raw[rounds_at].split_whitespace().collect();
    if toks.len() != 2 {
        return Err(FormatError::at(rounds_at + 1, "expected \"rounds <r>\""));
    }
    let rounds = num(toks[1], rounds_at + 1, "rounds")?;
    let mut members = Vec::new();
    for (i, l) in raw[..rounds_at].iter().enumerate() {
        for t in l.split_whitespace() {
            members.push(num(t, i + 1, "member id")?);
        }
    }
    Ok((members, rounds))
}

pub fn read_text(path: &Path) -> Result<String, FormatError> {
    std::fs::read_to_string(path).map_err(|source| FormatError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn write_text(path: &Path, text: &str) -> Result<(), FormatError> {
    std::fs::write(path, text).map_err(|source| FormatError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn read_graph(path: &Path) -> Result<Graph, FormatError> {
    parse_graph(&read_text(path)?).map_err(|e| e.in_file(path))
}

pub fn read_assignment(path: &Path, n: usize) -> Result<ColoringAssignment, FormatError> {
    parse_assignment(&read_text(path)?, n).map_err(|e| e.in_file(path))
}

pub fn read_palettes(path: &Path) -> Result<Vec<Palette>, FormatError> {
    parse_palettes(&read_text(path)?).map_err(|e| e.in_file(path))
}

/// A graph with optional palettes; without a palette file every node gets
/// `{0, ..., Δ}`.
pub fn read_instance(graph: &Path, palettes: Option<&Path>) -> Result<ListColoringInstance, FormatError> {
    let g = read_graph(graph)?;
    match palettes {
        None => Ok(ListColoringInstance::delta_plus_one(g)),
        Some(p) => {
            let pals = read_palettes(p)?;
            Ok(ListColoringInstance::with_inferred_variant(g, pals)?)
        }
    }
}

/// `<stem>.<ext>`, keeping any dots already in the stem.
pub fn with_suffix(stem: &Path, ext: &str) -> PathBuf {
    let mut s = stem.as_os_str().to_owned();
    s.push(".");
    s.push(ext);
    PathBuf::from(s)
}

/// Writes an instance as `<stem>.graph` and `<stem>.palette`.
pub fn write_instance(inst: &ListColoringInstance, stem: &Path) -> Result<(PathBuf, PathBuf), FormatError> {
    let gp = with_suffix(stem, "graph");
    let pp = with_suffix(stem, "palette");
    write_text(&gp, &write_graph(&inst.graph))?;
    write_text(&pp, &write_palettes(&inst.palettes))?;
    Ok((gp, pp))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{generate, GraphKind, Variant};
    use proptest::prelude::*;

    #[test]
    fn graph_round_trip_and_errors() {
        let g = Graph::from_edges(4, [(0, 1), (1, 2), (3, 0)]).unwrap();
        let text = write_graph(&g);
        assert!(text.starts_with("graph 4 3\n"));
        assert_eq!(parse_graph(&text).unwrap(), g);

        let err = parse_graph("graph 3 2\n0 1\n1 7\n").unwrap_err().to_string();
        assert!(err.contains("line 3"), "{err}");
        let err = parse_graph("graph 3 1\n1 1\n").unwrap_err().to_string();
        assert!(err.contains("self-loop"), "{err}");
        let err = parse_graph("graph 3 2\n0 1\n").unwrap_err().to_string();
        assert!(err.contains("line 1") && err.contains("declares 2"), "{err}");
        let err = parse_graph("graf 3 2\n").unwrap_err().to_string();
        assert!(err.contains("line 1"), "{err}");
        let err = parse_graph("graph 3 1\n# comment\n0 x\n").unwrap_err().to_string();
        assert!(err.contains("line 3"), "{err}");
    }

    #[test]
    fn palette_round_trip_and_errors() {
        let pals = vec![Palette::new([3, 1]), Palette::new([]), Palette::new([9])];
        let text = write_palettes(&pals);
        assert_eq!(text, "palette 3\n0 2 1 3\n1 0\n2 1 9\n");
        assert_eq!(parse_palettes(&text).unwrap(), pals);
        let err = parse_palettes("palette 2\n0 2 1\n1 0\n").unwrap_err().to_string();
        assert!(err.contains("line 2"), "{err}");
        let err = parse_palettes("palette 2\n0 1 1\n").unwrap_err().to_string();
        assert!(err.contains("no palette for node 1"), "{err}");
        let err = parse_palettes("palette 1\n0 2 4 4\n").unwrap_err().to_string();
        assert!(err.contains("twice"), "{err}");
    }

    #[test]
    fn assignment_round_trip() {
        let a = ColoringAssignment::from_colors(vec![2, 0, 1]);
        let text = write_assignment(&a);
        assert_eq!(text, "0 2\n1 0\n2 1\n");
        assert_eq!(parse_assignment(&text, 3).unwrap(), a);
        let partial = parse_assignment("1 4\n", 3).unwrap();
        assert!(!partial.complete);
        assert!(parse_assignment("0 1\n0 2\n", 3).is_err());
    }

    #[test]
    fn mis_output_round_trip() {
        let text = write_mis_output(&[0, 4, 7], 3);
        assert_eq!(text, "0 4 7\nrounds 3\n");
        assert_eq!(parse_mis_output(&text).unwrap(), (vec![0, 4, 7], 3));
        assert_eq!(parse_mis_output("\nrounds 1\n").unwrap(), (vec![], 1));
        assert!(parse_mis_output("1 2\n").is_err());
    }

    #[test]
    fn instance_files_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let inst = generate(GraphKind::Gnp { p: 0.3 }, 20, Variant::GeneralList, 4).unwrap();
        let (gp, pp) = write_instance(&inst, &dir.path().join("x")).unwrap();
        let back = read_instance(&gp, Some(&pp)).unwrap();
        assert_eq!(back.graph, inst.graph);
        assert_eq!(back.palettes, inst.palettes);
        let err = read_graph(&dir.path().join("missing.graph")).unwrap_err();
        assert!(matches!(err, FormatError::Io { .. }));
    }

    proptest! {
        #[test]
        fn random_graphs_round_trip(n in 1usize..30, raw in proptest::collection::vec((0u32..30, 0u32..30), 0..60)) {
            let edges: Vec<(u32, u32)> = raw.into_iter()
                .map(|(u, v)| (u % n as u32, v % n as u32))
                .filter(|(u, v)| u != v)
                .collect();
            let g = Graph::from_edges(n, edges).unwrap();
            prop_assert_eq!(parse_graph(&write_graph(&g)).unwrap(), g);
        }
    }
}
