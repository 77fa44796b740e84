//! Unit-capacity DAG networks, min-cut, random linear network coding and
//! packet propagation with adversarial overwrites.

use std::collections::VecDeque;
use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::adversary::EdgeAssignment;
use crate::error::{Error, Result};
use crate::gf::Gf;
use crate::matrix::Matrix;

/// On-disk topology: `{nodes, edges: [[u, v], ..], source, sink}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TopologySpec {
    pub nodes: usize,
    pub edges: Vec<[usize; 2]>,
    pub source: usize,
    pub sink: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Topology {
    nodes: usize,
    edges: Vec<(usize, usize)>,
    source: usize,
    sink: usize,
    in_edges: Vec<Vec<usize>>,
    out_edges: Vec<Vec<usize>>,
    edge_order: Vec<usize>,
    inert: Vec<usize>,
}

impl Topology {
    pub fn new(
        nodes: usize,
        edges: Vec<(usize, usize)>,
        source: usize,
        sink: usize,
    ) -> Result<Self> {
        if source >= nodes || sink >= nodes {
            return Err(Error::usage(format!(
                "source {source} / sink {sink} outside {nodes} nodes"
            )));
        }
        if source == sink {
            return Err(Error::usage("source and sink coincide"));
        }
        let mut in_edges = vec![Vec::new(); nodes];
        let mut out_edges = vec![Vec::new(); nodes];
        for (i, &(u, v)) in edges.iter().enumerate() {
            if u >= nodes || v >= nodes {
                return Err(Error::usage(format!(
                    "edge {i} = ({u}, {v}) names a missing node"
                )));
            }
            if u == v {
                return Err(Error::usage(format!("edge {i} is a self-loop")));
            }
            if v == source {
                return Err(Error::usage(format!("edge {i} enters the source")));
            }
            out_edges[u].push(i);
            in_edges[v].push(i);
        }

        // Kahn's algorithm, always releasing the smallest ready node.
        let mut indeg: Vec<usize> = in_edges.iter().map(Vec::len).collect();
        let mut ready: std::collections::BTreeSet<usize> =
            (0..nodes).filter(|&v| indeg[v] == 0).collect();
        let mut node_order = Vec::with_capacity(nodes);
        while let Some(v) = ready.pop_first() {
            node_order.push(v);
            for &e in &out_edges[v] {
                let h = edges[e].1;
                indeg[h] -= 1;
                if indeg[h] == 0 {
                    ready.insert(h);
                }
            }
        }
        if node_order.len() != nodes {
            return Err(Error::usage("topology contains a directed cycle"));
        }
        let edge_order: Vec<usize> = node_order
            .iter()
            .flat_map(|&v| out_edges[v].iter().copied())
            .collect();

        let from_source = reach(nodes, &out_edges, |e| edges[e].1, source);
        let to_sink = reach(nodes, &in_edges, |e| edges[e].0, sink);
        let inert = (0..edges.len())
            .filter(|&e| !(from_source[edges[e].0] && to_sink[edges[e].1]))
            .collect();

        Ok(Self {
            nodes,
            edges,
            source,
            sink,
            in_edges,
            out_edges,
            edge_order,
            inert,
        })
    }

    pub fn from_spec(spec: &TopologySpec) -> Result<Self> {
        Self::new(
            spec.nodes,
            spec.edges.iter().map(|&[u, v]| (u, v)).collect(),
            spec.source,
            spec.sink,
        )
    }

    pub fn to_spec(&self) -> TopologySpec {
        TopologySpec {
            nodes: self.nodes,
            edges: self.edges.iter().map(|&(u, v)| [u, v]).collect(),
            source: self.source,
            sink: self.sink,
        }
    }

    /// `C` parallel source-to-sink edges.
    pub fn parallel(c: usize) -> Result<Self> {
        if c == 0 {
            return Err(Error::usage("parallel network needs at least one edge"));
        }
        Self::new(2, vec![(0, 1); c], 0, 1)
    }

    /// Two-path butterfly: s=0, a=1, b=2, c=3, d=4, t=5.
    pub fn butterfly() -> Self {
        Self::new(
            6,
            vec![(0, 1), (0, 2), (1, 3), (2, 3), (3, 4), (1, 5), (4, 5)],
            0,
            5,
        )
        .expect("butterfly is valid")
    }

    /// s=0, a=1, b=2, t=3 with a cross edge a -> b.
    pub fn diamond() -> Self {
        Self::new(4, vec![(0, 1), (0, 2), (1, 2), (1, 3), (2, 3)], 0, 3).expect("diamond is valid")
    }

    /// `parallel:<C>`, `butterfly` or `diamond`.
    pub fn named(name: &str) -> Result<Self> {
        match name {
            "butterfly" => Ok(Self::butterfly()),
            "diamond" => Ok(Self::diamond()),
            _ => match name.strip_prefix("parallel:") {
                Some(c) => {
                    let c = c
                        .parse()
                        .map_err(|_| Error::config(format!("bad edge count in {name:?}")))?;
                    Self::parallel(c)
                }
                None => Err(Error::config(format!("unknown topology {name:?}"))),
            },
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let s = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let spec: TopologySpec = serde_json::from_str(&s).map_err(|source| Error::Json {
            context: path.display().to_string(),
            source,
        })?;
        Self::from_spec(&spec)
    }

    pub fn nodes(&self) -> usize {
        self.nodes
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn source(&self) -> usize {
        self.source
    }

    pub fn sink(&self) -> usize {
        self.sink
    }

    pub fn in_edges(&self, v: usize) -> &[usize] {
        &self.in_edges[v]
    }

    pub fn out_edges(&self, v: usize) -> &[usize] {
        &self.out_edges[v]
    }

    /// Edges sorted by the topological position of their tail, ties by index.
    pub fn edge_order(&self) -> &[usize] {
        &self.edge_order
    }

    /// Edges not on any source-to-sink path.
    pub fn inert_edges(&self) -> &[usize] {
        &self.inert
    }

    pub fn min_cut(&self) -> usize {
        self.max_flow(None)
    }

    /// Edges whose removal lowers the min-cut.
    pub fn min_cut_edges(&self) -> Vec<usize> {
        let c = self.min_cut();
        (0..self.edges.len())
            .filter(|&e| self.max_flow(Some(e)) < c)
            .collect()
    }

    /// Unit-capacity max-flow by BFS augmenting paths, optionally with one
    /// edge deleted.
    fn max_flow(&self, removed: Option<usize>) -> usize {
        let mut flow = vec![false; self.edges.len()];
        let mut value = 0;
        loop {
            // parent[v] = (edge, forward?)
            let mut parent: Vec<Option<(usize, bool)>> = vec![None; self.nodes];
            let mut seen = vec![false; self.nodes];
            seen[self.source] = true;
            let mut queue = VecDeque::from([self.source]);
            while let Some(v) = queue.pop_front() {
                if v == self.sink {
                    break;
                }
                for &e in &self.out_edges[v] {
                    let h = self.edges[e].1;
                    if Some(e) != removed && !flow[e] && !seen[h] {
                        seen[h] = true;
                        parent[h] = Some((e, true));
                        queue.push_back(h);
                    }
                }
                for &e in &self.in_edges[v] {
                    let t = self.edges[e].0;
                    if flow[e] && !seen[t] {
                        seen[t] = true;
                        parent[t] = Some((e, false));
                        queue.push_back(t);
                    }
                }
            }
            if !seen[self.sink] {
                return value;
            }
            let mut v = self.sink;
            while let Some((e, forward)) = parent[v] {
                flow[e] = forward;
                v = if forward {
                    self.edges[e].0
                } else {
                    self.edges[e].1
                };
            }
            value += 1;
        }
    }
}

fn reach(
    nodes: usize,
    adj: &[Vec<usize>],
    other_end: impl Fn(usize) -> usize,
    start: usize,
) -> Vec<bool> {
    let mut seen = vec![false; nodes];
    seen[start] = true;
    let mut stack = vec![start];
    while let Some(v) = stack.pop() {
        for &e in &adj[v] {
            let w = other_end(e);
            if !seen[w] {
                seen[w] = true;
                stack.push(w);
            }
        }
    }
    seen
}

/// Local coding coefficients for every edge.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearNetworkCode {
    topology: Topology,
    field: Gf,
    c: usize,
    coeffs: Vec<Vec<u32>>,
}

/// Global transfer matrices of a code under a given assignment.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransferMatrices {
    /// Sink rows, `C x C`.
    pub t_ab: Matrix,
    /// Read edges (read-only then read-write), `z_r x C`.
    pub t_aj: Matrix,
    /// Natural content of the write edges (write-only then read-write), `z_w x C`.
    pub t_write: Matrix,
}

#[derive(Debug, Clone)]
pub struct Transmission {
    pub y: Matrix,
    pub z: Matrix,
    pub transfer: TransferMatrices,
}

impl LinearNetworkCode {
    /// `coeffs[e]` has one entry per in-edge of the tail of `e`, or `c`
    /// entries when the tail is the source.
    pub fn new(topology: &Topology, field: &Gf, c: usize, coeffs: Vec<Vec<u32>>) -> Result<Self> {
        if coeffs.len() != topology.num_edges() {
            return Err(Error::usage(format!(
                "{} coefficient vectors for {} edges",
                coeffs.len(),
                topology.num_edges()
            )));
        }
        for (e, v) in coeffs.iter().enumerate() {
            let want = local_len(topology, c, e);
            if v.len() != want {
                return Err(Error::usage(format!(
                    "edge {e} has {} coefficients, expected {want}",
                    v.len()
                )));
            }
            if v.iter().any(|&a| a >= field.q()) {
                return Err(Error::usage(format!(
                    "edge {e} has a coefficient outside {field}"
                )));
            }
        }
        Ok(Self {
            topology: topology.clone(),
            field: field.clone(),
            c,
            coeffs,
        })
    }

    /// Every local coefficient i.i.d. uniform.
    pub fn sample_rlnc<R: Rng + ?Sized>(
        topology: &Topology,
        field: &Gf,
        c: usize,
        rng: &mut R,
    ) -> Self {
        let coeffs = (0..topology.num_edges())
            .map(|e| {
                (0..local_len(topology, c, e))
                    .map(|_| field.sample(rng))
                    .collect()
            })
            .collect();
        Self {
            topology: topology.clone(),
            field: field.clone(),
            c,
            coeffs,
        }
    }

    /// Routing code: the j-th source out-edge carries source row j; other
    /// nodes forward their first in-edge. Needs at most `c` source out-edges.
    pub fn identity(topology: &Topology, field: &Gf, c: usize) -> Result<Self> {
        let outs = topology.out_edges(topology.source());
        if outs.len() > c {
            return Err(Error::usage(format!(
                "identity coding needs at most {c} source out-edges, found {}",
                outs.len()
            )));
        }
        let mut coeffs: Vec<Vec<u32>> = (0..topology.num_edges())
            .map(|e| {
                let mut v = vec![0; local_len(topology, c, e)];
                if let Some(first) = v.first_mut() {
                    *first = 1;
                }
                v
            })
            .collect();
        for (j, &e) in outs.iter().enumerate() {
            coeffs[e] = (0..c).map(|i| u32::from(i == j)).collect();
        }
        Ok(Self {
            topology: topology.clone(),
            field: field.clone(),
            c,
            coeffs,
        })
    }

    pub fn topology(&self) -> &Topology {
        &self.topology
    }

    pub fn field(&self) -> &Gf {
        &self.field
    }

    pub fn source_rows(&self) -> usize {
        self.c
    }

    pub fn coefficients(&self, e: usize) -> &[u32] {
        &self.coeffs[e]
    }

    /// Per-edge packets, with `overwrite[e]` replacing edge `e`'s content
    /// after `observe` has seen the pre-overwrite value.
    fn propagate(
        &self,
        x: &Matrix,
        overwrite: &[Option<&[u32]>],
        mut observe: impl FnMut(usize, &[u32]),
    ) -> Vec<Vec<u32>> {
        let f = &self.field;
        let n = x.cols();
        let t = &self.topology;
        let mut packets = vec![Vec::new(); t.num_edges()];
        for &e in t.edge_order() {
            let tail = t.edges[e].0;
            let a = &self.coeffs[e];
            let mut out = vec![0u32; n];
            let inputs: Box<dyn Iterator<Item = &[u32]>> = if tail == t.source {
                Box::new(x.row_iter())
            } else {
                Box::new(t.in_edges[tail].iter().map(|&i| packets[i].as_slice()))
            };
            for (&coef, row) in a.iter().zip(inputs) {
                if coef == 0 {
                    continue;
                }
                for (o, &r) in out.iter_mut().zip(row) {
                    *o = f.add(*o, f.mul(coef, r));
                }
            }
            observe(e, &out);
            packets[e] = match overwrite[e] {
                Some(row) => row.to_vec(),
                None => out,
            };
        }
        packets
    }

    fn sink_rows(&self, packets: &[Vec<u32>], n: usize) -> Matrix {
        let rows: Vec<Vec<u32>> = self.topology.in_edges[self.topology.sink]
            .iter()
            .take(self.c)
            .map(|&e| packets[e].clone())
            .collect();
        Matrix::from_rows(&self.field, n, &rows).expect("sink packets have n symbols")
    }

    /// Global coding vectors of the sink rows and the assignment's edges.
    pub fn transfer_matrices(&self, assignment: &EdgeAssignment) -> Result<TransferMatrices> {
        assignment.check_edges(&self.topology)?;
        let identity = Matrix::identity(&self.field, self.c);
        let packets = self.propagate(&identity, &vec![None; self.topology.num_edges()], |_, _| {});
        let pick = |edges: Vec<usize>| {
            let rows: Vec<Vec<u32>> = edges.into_iter().map(|e| packets[e].clone()).collect();
            Matrix::from_rows(&self.field, self.c, &rows).expect("global vectors have C entries")
        };
        Ok(TransferMatrices {
            t_ab: self.sink_rows(&packets, self.c),
            t_aj: pick(assignment.read_edges()),
            t_write: pick(assignment.write_edges()),
        })
    }

    /// Sends the rows of `x` through the network. `jam` holds one row per
    /// write edge; `None` means no attack.
    pub fn transmit(
        &self,
        x: &Matrix,
        assignment: &EdgeAssignment,
        jam: Option<&Matrix>,
    ) -> Result<Transmission> {
        if x.field() != &self.field {
            return Err(Error::FieldMismatch {
                left: x.field().to_string(),
                right: self.field.to_string(),
            });
        }
        if x.rows() != self.c {
            return Err(Error::usage(format!(
                "source matrix has {} rows, code expects {}",
                x.rows(),
                self.c
            )));
        }
        let transfer = self.transfer_matrices(assignment)?;
        let n = x.cols();
        let writes = assignment.write_edges();
        let mut overwrite: Vec<Option<&[u32]>> = vec![None; self.topology.num_edges()];
        if let Some(j) = jam {
            if j.rows() != writes.len() || j.cols() != n {
                return Err(Error::usage(format!(
                    "jam matrix is {}x{}, expected {}x{n}",
                    j.rows(),
                    j.cols(),
                    writes.len()
                )));
            }
            for (k, &e) in writes.iter().enumerate() {
                overwrite[e] = Some(j.row(k));
            }
        }
        let reads = assignment.read_edges();
        let mut observed = vec![Vec::new(); reads.len()];
        let packets = self.propagate(x, &overwrite, |e, content| {
            if let Some(k) = reads.iter().position(|&r| r == e) {
                observed[k] = content.to_vec();
            }
        });
        Ok(Transmission {
            y: self.sink_rows(&packets, n),
            z: Matrix::from_rows(&self.field, n, &observed)?,
            transfer,
        })
    }
}

fn local_len(t: &Topology, c: usize, e: usize) -> usize {
    let tail = t.edges[e].0;
    if tail == t.source {
        c
    } else {
        t.in_edges[tail].len()
    }
}
