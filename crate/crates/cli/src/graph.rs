//! Pairwise conversion exploration and DOT output.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use losr_core::catalog::Axis;
use losr_core::sdp::{ConicSolver, Status};

use crate::engine::{convert, EngineError, RunOptions};
use crate::sets::Node;

#[derive(Clone, Debug, PartialEq)]
pub struct EdgeResult {
    pub status: Status,
    pub gap: Option<f64>,
    pub residual: f64,
    pub deviation: Option<f64>,
    /// Self-loops are recorded without solving.
    pub reflexive: bool,
}

#[derive(Clone, Debug)]
pub struct ConversionGraph {
    pub ids: Vec<String>,
    rotations: Vec<Option<(f64, Axis)>>,
    /// Keyed by `(from, to)` node index; pairs of different kinds are absent.
    pub results: BTreeMap<(usize, usize), EdgeResult>,
}

impl ConversionGraph {
    pub fn feasible(&self, i: usize, j: usize) -> bool {
        self.results.get(&(i, j)).is_some_and(|e| e.status == Status::Feasible)
    }

    /// Feasible arrows, self-loops included.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        self.results.iter().filter(|(_, e)| e.status == Status::Feasible).map(|(k, _)| *k).collect()
    }

    pub fn indeterminate(&self) -> Vec<(usize, usize)> {
        self.results
            .iter()
            .filter(|(_, e)| e.status == Status::Indeterminate)
            .map(|(k, _)| *k)
            .collect()
    }

    /// Triples `i → j → k` with Feasible legs but no Feasible `i → k`.
    pub fn transitivity_violations(&self) -> Vec<(usize, usize, usize)> {
        let n = self.ids.len();
        let mut out = Vec::new();
        for i in 0..n {
            for j in 0..n {
                if !self.feasible(i, j) {
                    continue;
                }
                for k in 0..n {
                    if self.feasible(j, k) && !self.feasible(i, k) && self.results.contains_key(&(i, k)) {
                        out.push((i, j, k));
                    }
                }
            }
        }
        out
    }

    /// Rotation family members first, by angle descending then axis; others keep their order.
    pub fn display_order(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.ids.len()).collect();
        order.sort_by(|&a, &b| match (self.rotations[a], self.rotations[b]) {
            (Some((ta, xa)), Some((tb, xb))) => tb.total_cmp(&ta).then(xa.cmp(&xb)),
            (Some(_), None) => std::cmp::Ordering::Less,
            (None, Some(_)) => std::cmp::Ordering::Greater,
            (None, None) => a.cmp(&b),
        });
        order
    }

    pub fn to_dot(&self) -> String {
        let order = self.display_order();
        let rank: Vec<usize> = {
            let mut r = vec![0; order.len()];
            for (pos, &i) in order.iter().enumerate() {
                r[i] = pos;
            }
            r
        };
        let mut out = String::from("digraph losr {\n  node [shape=box];\n");
        for &i in &order {
            let _ = writeln!(out, "  \"{}\";", self.ids[i]);
        }
        let mut keyed: Vec<(&(usize, usize), &EdgeResult)> = self.results.iter().collect();
        keyed.sort_by_key(|((i, j), _)| (rank[*i], rank[*j]));
        for ((i, j), e) in keyed {
            match e.status {
                Status::Feasible => {
                    let _ = writeln!(out, "  \"{}\" -> \"{}\";", self.ids[*i], self.ids[*j]);
                }
                Status::Indeterminate => {
                    let _ = writeln!(out, "  \"{}\" -> \"{}\" [style=dashed, label=\"?\"];", self.ids[*i], self.ids[*j]);
                }
                Status::Infeasible => {}
            }
        }
        out.push_str("}\n");
        out
    }
}

/// Solve every ordered pair of same-kind nodes on `jobs` worker threads.
pub fn explore(nodes: &[Node], solver: &dyn ConicSolver, opts: &RunOptions, jobs: usize) -> Result<ConversionGraph, EngineError> {
    let n = nodes.len();
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .filter(|&(i, j)| i != j && nodes[i].assemblage.kind() == nodes[j].assemblage.kind())
        .collect();
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<Result<EdgeResult, EngineError>>>> = Mutex::new((0..pairs.len()).map(|_| None).collect());
    let workers = jobs.max(1).min(pairs.len().max(1));
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let k = next.fetch_add(1, Ordering::Relaxed);
                let Some(&(i, j)) = pairs.get(k) else { break };
                let label = format!("convert_{}_to_{}", nodes[i].id, nodes[j].id);
                let r = convert(&nodes[i].assemblage, &nodes[j].assemblage, &label, solver, opts).map(|o| EdgeResult {
                    status: o.verdict.status,
                    gap: o.verdict.infeasibility_gap,
                    residual: o.verdict.diagnostics.residual,
                    deviation: o.deviation,
                    reflexive: false,
                });
                slots.lock().expect("result slots")[k] = Some(r);
            });
        }
    });
    let mut results = BTreeMap::new();
    for i in 0..n {
        results.insert(
            (i, i),
            EdgeResult {
                status: Status::Feasible,
                gap: None,
                residual: 0.0,
                deviation: Some(0.0),
                reflexive: true,
            },
        );
    }
    for (pair, slot) in pairs.into_iter().zip(slots.into_inner().expect("result slots")) {
        results.insert(pair, slot.expect("every pair is solved")?);
    }
    Ok(ConversionGraph {
        ids: nodes.iter().map(|n| n.id.clone()).collect(),
        rotations: nodes.iter().map(|n| n.rotation).collect(),
        results,
    })
}
