use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::Tensor;

/// Undirected skeleton graph without self-loops.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphSpec {
    pub num_nodes: usize,
    pub edges: Vec<(usize, usize)>,
    pub center: usize,
    pub layout_id: String,
}

/// How neighbourhoods are split into separately weighted partitions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PartitionStrategy {
    /// One partition: the node and all its neighbours.
    Uniform,
    /// Two partitions: the node itself, its neighbours.
    Distance,
    /// Three partitions relative to the centre joint: same distance (incl.
    /// self), closer to the centre, farther from the centre.
    #[default]
    Spatial,
}

impl PartitionStrategy {
    pub fn num_partitions(self) -> usize {
        match self {
            PartitionStrategy::Uniform => 1,
            PartitionStrategy::Distance => 2,
            PartitionStrategy::Spatial => 3,
        }
    }
}

impl std::str::FromStr for PartitionStrategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform" => Ok(Self::Uniform),
            "distance" => Ok(Self::Distance),
            "spatial" => Ok(Self::Spatial),
            other => Err(Error::config(format!("unknown partition strategy '{other}'"))),
        }
    }
}

impl GraphSpec {
    pub fn validate(&self) -> Result<()> {
        if self.num_nodes == 0 {
            return Err(Error::config("graph has no nodes"));
        }
        if self.center >= self.num_nodes {
            return Err(Error::config(format!("centre {} outside 0..{}", self.center, self.num_nodes)));
        }
        for &(a, b) in &self.edges {
            if a >= self.num_nodes || b >= self.num_nodes {
                return Err(Error::config(format!("edge ({a}, {b}) outside 0..{}", self.num_nodes)));
            }
            if a == b {
                return Err(Error::config(format!("self-loop on node {a}")));
            }
        }
        Ok(())
    }

    /// Dense symmetric 0/1 adjacency without self-loops, row-major `V x V`.
    pub fn adjacency(&self) -> Vec<f64> {
        let v = self.num_nodes;
        let mut a = vec![0.0; v * v];
        for &(i, j) in &self.edges {
            a[i * v + j] = 1.0;
            a[j * v + i] = 1.0;
        }
        a
    }

    fn neighbours(&self) -> Vec<Vec<usize>> {
        let mut nb = vec![Vec::new(); self.num_nodes];
        for &(i, j) in &self.edges {
            if !nb[i].contains(&j) {
                nb[i].push(j);
                nb[j].push(i);
            }
        }
        nb
    }

    /// Hop distance of every node from the centre; `None` if unreachable.
    pub fn hop_distances(&self) -> Vec<Option<usize>> {
        let nb = self.neighbours();
        let mut dist = vec![None; self.num_nodes];
        dist[self.center] = Some(0);
        let mut queue = VecDeque::from([self.center]);
        while let Some(u) = queue.pop_front() {
            let du = dist[u].expect("queued nodes have a distance");
            for &w in &nb[u] {
                if dist[w].is_none() {
                    dist[w] = Some(du + 1);
                    queue.push_back(w);
                }
            }
        }
        dist
    }

    pub fn is_connected(&self) -> bool {
        self.hop_distances().iter().all(Option::is_some)
    }

    /// Relabel node `i` as `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> GraphSpec {
        GraphSpec {
            num_nodes: self.num_nodes,
            edges: self.edges.iter().map(|&(a, b)| (perm[a], perm[b])).collect(),
            center: perm[self.center],
            layout_id: self.layout_id.clone(),
        }
    }
}

/// Normalized adjacency partitions `D^-1/2 A_p D^-1/2` with degrees from `A + I`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdjacencyStack {
    pub partitions: Vec<Tensor>,
    pub strategy: PartitionStrategy,
    pub graph: GraphSpec,
}

impl AdjacencyStack {
    pub fn num_nodes(&self) -> usize {
        self.graph.num_nodes
    }

    pub fn len(&self) -> usize {
        self.partitions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.partitions.is_empty()
    }

    /// Elementwise sum of the normalized partitions.
    pub fn summed(&self) -> Tensor {
        let mut total = Tensor::zeros(self.partitions[0].shape().to_vec());
        for p in &self.partitions {
            total.add_assign(p).expect("partitions share a shape");
        }
        total
    }
}

/// Split `A + I` into the strategy's partitions and normalize each one with
/// the degrees of the whole `A + I`.
pub fn build_adjacency(spec: &GraphSpec, strategy: PartitionStrategy) -> Result<AdjacencyStack> {
    spec.validate()?;
    let v = spec.num_nodes;
    let a = spec.adjacency();
    let mut raw: Vec<Vec<f64>> = vec![vec![0.0; v * v]; strategy.num_partitions()];
    match strategy {
        PartitionStrategy::Uniform => {
            raw[0].copy_from_slice(&a);
            for i in 0..v {
                raw[0][i * v + i] = 1.0;
            }
        }
        PartitionStrategy::Distance => {
            for i in 0..v {
                raw[0][i * v + i] = 1.0;
            }
            raw[1].copy_from_slice(&a);
        }
        PartitionStrategy::Spatial => {
            let dist = spec.hop_distances();
            let orphans: Vec<usize> = (0..v).filter(|&i| dist[i].is_none()).collect();
            if !orphans.is_empty() {
                return Err(Error::config(format!(
                    "spatial partitioning: nodes {orphans:?} cannot reach centre {}",
                    spec.center
                )));
            }
            let dist: Vec<usize> = dist.into_iter().map(|d| d.expect("checked above")).collect();
            for i in 0..v {
                raw[0][i * v + i] = 1.0;
                for j in 0..v {
                    if a[i * v + j] == 0.0 {
                        continue;
                    }
                    let p = match dist[j].cmp(&dist[i]) {
                        std::cmp::Ordering::Equal => 0,
                        std::cmp::Ordering::Less => 1,
                        std::cmp::Ordering::Greater => 2,
                    };
                    raw[p][i * v + j] = 1.0;
                }
            }
        }
    }

    let degree: Vec<f64> = (0..v)
        .map(|i| 1.0 + a[i * v..(i + 1) * v].iter().sum::<f64>())
        .collect();
    // every node carries its self-loop, so no degree can be zero
    assert!(degree.iter().all(|&d| d >= 1.0));
    let inv_sqrt: Vec<f64> = degree.iter().map(|d| 1.0 / d.sqrt()).collect();

    let partitions = raw
        .into_iter()
        .map(|mut m| {
            for i in 0..v {
                for j in 0..v {
                    m[i * v + j] *= inv_sqrt[i] * inv_sqrt[j];
                }
            }
            Tensor::new(vec![v, v], m)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(AdjacencyStack {
        partitions,
        strategy,
        graph: spec.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path3() -> GraphSpec {
        GraphSpec {
            num_nodes: 3,
            edges: vec![(0, 1), (1, 2)],
            center: 1,
            layout_id: "path".into(),
        }
    }

    #[test]
    fn single_node_uniform_is_one() {
        let spec = GraphSpec {
            num_nodes: 1,
            edges: vec![],
            center: 0,
            layout_id: "dot".into(),
        };
        let s = build_adjacency(&spec, PartitionStrategy::Uniform).unwrap();
        assert_eq!(s.partitions[0].data(), &[1.0]);
    }

    #[test]
    fn two_node_clique_is_all_half() {
        let spec = GraphSpec {
            num_nodes: 2,
            edges: vec![(0, 1)],
            center: 0,
            layout_id: "pair".into(),
        };
        let s = build_adjacency(&spec, PartitionStrategy::Uniform).unwrap();
        for &x in s.partitions[0].data() {
            assert!((x - 0.5).abs() < 1e-15);
        }
    }

    #[test]
    fn path_distance_partitions_by_hand() {
        // degrees from A + I: [2, 3, 2]
        let s = build_adjacency(&path3(), PartitionStrategy::Distance).unwrap();
        let selfp = &s.partitions[0];
        let nb = &s.partitions[1];
        let expect_self = [0.5, 0.0, 0.0, 0.0, 1.0 / 3.0, 0.0, 0.0, 0.0, 0.5];
        let e = 1.0 / 6f64.sqrt();
        let expect_nb = [0.0, e, 0.0, e, 0.0, e, 0.0, e, 0.0];
        for k in 0..9 {
            assert!((selfp.data()[k] - expect_self[k]).abs() < 1e-15);
            assert!((nb.data()[k] - expect_nb[k]).abs() < 1e-15);
        }
        let uniform = build_adjacency(&path3(), PartitionStrategy::Uniform).unwrap();
        assert!(s.summed().max_abs_diff(&uniform.partitions[0]).unwrap() < 1e-15);
    }

    #[test]
    fn spatial_splits_by_centre_distance() {
        let s = build_adjacency(&path3(), PartitionStrategy::Spatial).unwrap();
        let [root, closer, farther] = [&s.partitions[0], &s.partitions[1], &s.partitions[2]];
        // ends look toward the centre, the centre looks outward
        assert!(closer.get(&[0, 1]) > 0.0 && closer.get(&[2, 1]) > 0.0);
        assert!(farther.get(&[1, 0]) > 0.0 && farther.get(&[1, 2]) > 0.0);
        assert_eq!(root.get(&[0, 1]), 0.0);
        assert!(root.get(&[1, 1]) > 0.0);
    }

    #[test]
    fn unreachable_centre_names_orphans() {
        let spec = GraphSpec {
            num_nodes: 4,
            edges: vec![(0, 1), (2, 3)],
            center: 0,
            layout_id: "split".into(),
        };
        let err = build_adjacency(&spec, PartitionStrategy::Spatial).unwrap_err();
        assert!(err.to_string().contains("[2, 3]"), "{err}");
        assert!(build_adjacency(&spec, PartitionStrategy::Uniform).is_ok());
    }

    #[test]
    fn self_loops_rejected() {
        let spec = GraphSpec {
            num_nodes: 2,
            edges: vec![(1, 1)],
            center: 0,
            layout_id: "loop".into(),
        };
        assert!(matches!(build_adjacency(&spec, PartitionStrategy::Uniform), Err(Error::Config(_))));
    }
}
