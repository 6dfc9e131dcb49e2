use std::collections::VecDeque;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{config, usage, Error, Result};

/// Undirected device connectivity graph.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawCouplingMap")]
pub struct CouplingMap {
    pub name: String,
    pub n_qubits: usize,
    /// Normalized `(low, high)` pairs, sorted, without duplicates.
    pub edges: Vec<(usize, usize)>,
    #[serde(skip)]
    adjacency: Vec<Vec<usize>>,
}

#[derive(Deserialize)]
struct RawCouplingMap {
    name: String,
    n_qubits: usize,
    edges: Vec<(usize, usize)>,
}

impl TryFrom<RawCouplingMap> for CouplingMap {
    type Error = Error;

    fn try_from(raw: RawCouplingMap) -> Result<Self> {
        CouplingMap::new(raw.name, raw.n_qubits, raw.edges)
    }
}

impl CouplingMap {
    /// Builds and validates a coupling map. The graph must be connected.
    pub fn new(
        name: impl Into<String>,
        n_qubits: usize,
        edges: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<Self> {
        let name = name.into();
        if n_qubits == 0 {
            return Err(config(format!("coupling map {name} has no qubits")));
        }
        let mut norm = Vec::new();
        for (a, b) in edges {
            if a >= n_qubits || b >= n_qubits {
                return Err(config(format!(
                    "edge ({a}, {b}) of {name} references a qubit >= {n_qubits}"
                )));
            }
            if a == b {
                return Err(config(format!("self-loop on qubit {a} in {name}")));
            }
            norm.push((a.min(b), a.max(b)));
        }
        norm.sort_unstable();
        norm.dedup();
        let mut adjacency = vec![Vec::new(); n_qubits];
        for &(a, b) in &norm {
            adjacency[a].push(b);
            adjacency[b].push(a);
        }
        for adj in &mut adjacency {
            adj.sort_unstable();
        }
        let map = Self {
            name,
            n_qubits,
            edges: norm,
            adjacency,
        };
        if map.distances_from(0).iter().any(Option::is_none) {
            return Err(config(format!("coupling map {} is not connected", map.name)));
        }
        Ok(map)
    }

    /// Ourense: 5 qubits in a T (0-1-2 with 1-3-4 hanging off qubit 1).
    pub fn ourense() -> Self {
        Self::new("ourense", 5, [(0, 1), (1, 2), (1, 3), (3, 4)]).expect("valid builtin")
    }

    /// Yorktown: 5 qubits in a bowtie, two triangles sharing qubit 2.
    pub fn yorktown() -> Self {
        Self::new("yorktown", 5, [(0, 1), (0, 2), (1, 2), (2, 3), (2, 4), (3, 4)])
            .expect("valid builtin")
    }

    pub fn line(n: usize) -> Result<Self> {
        Self::new(format!("line({n})"), n, (1..n).map(|i| (i - 1, i)))
    }

    pub fn full(n: usize) -> Result<Self> {
        Self::new(
            format!("full({n})"),
            n,
            (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))),
        )
    }

    /// Resolves `ourense`, `yorktown`, `line(n)` or `full(n)`.
    pub fn builtin(name: &str) -> Result<Self> {
        let name = name.trim().to_ascii_lowercase();
        match name.as_str() {
            "ourense" => return Ok(Self::ourense()),
            "yorktown" => return Ok(Self::yorktown()),
            _ => {}
        }
        let sized = |prefix: &str| -> Option<usize> {
            name.strip_prefix(prefix)?
                .strip_prefix('(')?
                .strip_suffix(')')?
                .trim()
                .parse()
                .ok()
        };
        if let Some(n) = sized("line") {
            return Self::line(n);
        }
        if let Some(n) = sized("full") {
            return Self::full(n);
        }
        Err(usage(format!(
            "unknown device {name:?}; expected ourense, yorktown, line(n) or full(n)"
        )))
    }

    /// Names accepted by [`CouplingMap::builtin`].
    pub fn builtin_names() -> &'static [&'static str] {
        &["ourense", "yorktown", "line(n)", "full(n)"]
    }

    pub fn from_json_file(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }

    /// A builtin name, or a path to a JSON coupling-map file.
    pub fn resolve(spec: &str) -> Result<Self> {
        if spec.ends_with(".json") {
            Self::from_json_file(spec)
        } else {
            Self::builtin(spec)
        }
    }

    pub fn neighbors(&self, q: usize) -> &[usize] {
        &self.adjacency[q]
    }

    pub fn degree(&self, q: usize) -> usize {
        self.adjacency[q].len()
    }

    pub fn is_coupled(&self, a: usize, b: usize) -> bool {
        a < self.n_qubits && self.adjacency[a].binary_search(&b).is_ok()
    }

    fn distances_from(&self, src: usize) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.n_qubits];
        dist[src] = Some(0);
        let mut queue = VecDeque::from([src]);
        while let Some(u) = queue.pop_front() {
            let du = dist[u].expect("queued nodes have distances");
            for &v in &self.adjacency[u] {
                if dist[v].is_none() {
                    dist[v] = Some(du + 1);
                    queue.push_back(v);
                }
            }
        }
        dist
    }

    /// Shortest path `a → b` inclusive of both ends. Among equal-length
    /// paths, each step moves to the lowest-indexed qubit that stays on a
    /// shortest path.
    pub fn shortest_path(&self, a: usize, b: usize) -> Result<Vec<usize>> {
        if a >= self.n_qubits || b >= self.n_qubits {
            return Err(usage(format!(
                "path endpoints ({a}, {b}) outside device of {} qubits",
                self.n_qubits
            )));
        }
        let dist = self.distances_from(b);
        let mut path = vec![a];
        let mut cur = a;
        while cur != b {
            let d = dist[cur].ok_or_else(|| {
                Error::Internal(format!("qubits {a} and {b} are disconnected"))
            })?;
            cur = *self.adjacency[cur]
                .iter()
                .find(|&&v| dist[v] == Some(d - 1))
                .ok_or_else(|| Error::Internal("broken BFS distances".into()))?;
            path.push(cur);
        }
        Ok(path)
    }
}
