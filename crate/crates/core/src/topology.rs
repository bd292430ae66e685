//! Interaction structure: the follower digraph with its leader attachments,
//! global-sink verification, hierarchical leveling, the per-follower weight
//! pair, and resolution of local formation offsets into offsets with respect
//! to the leader.
//!
//! Followers are indexed `0..N`; the leader is not a follower index and is
//! addressed separately (configurations use the conventional numbering with
//! the leader as node 0 and followers `1..=N`, shifted down by one on load).

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// Out-neighbor of a follower in the combined graph: another follower or the
/// leader.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Peer {
    Leader,
    Follower(usize),
}

/// Follower digraph plus leader attachments. An edge `(i, j)` means follower
/// `i` observes follower `j` (information flows from `j` to `i`).
#[derive(Debug, Clone)]
pub struct LeaderNetwork {
    n: usize,
    adj: Vec<Vec<bool>>,
    leader_in: Vec<bool>,
}

impl LeaderNetwork {
    pub fn new(n: usize, edges: &[(usize, usize)], leader_attached: &[usize]) -> Result<LeaderNetwork> {
        if n == 0 {
            return Err(Error::Hypothesis("network needs at least one follower".into()));
        }
        let mut adj = vec![vec![false; n]; n];
        for &(i, j) in edges {
            if i >= n || j >= n {
                return Err(Error::Hypothesis(format!(
                    "edge ({i}, {j}) references a follower outside 0..{n}"
                )));
            }
            if i == j {
                return Err(Error::Hypothesis(format!("self loop on follower {i}")));
            }
            adj[i][j] = true;
        }
        let mut leader_in = vec![false; n];
        for &i in leader_attached {
            if i >= n {
                return Err(Error::Hypothesis(format!(
                    "leader attachment references follower {i} outside 0..{n}"
                )));
            }
            leader_in[i] = true;
        }
        if !leader_in.iter().any(|&v| v) {
            return Err(Error::Hypothesis(
                "at least one follower must observe the leader".into(),
            ));
        }
        let net = LeaderNetwork { n, adj, leader_in };
        if net.has_cycle() {
            return Err(Error::Hypothesis("follower digraph contains a cycle".into()));
        }
        Ok(net)
    }

    pub fn follower_count(&self) -> usize {
        self.n
    }

    /// 1 when the follower observes the leader directly, 0 otherwise.
    pub fn indicator(&self, i: usize) -> usize {
        usize::from(self.leader_in[i])
    }

    pub fn out_degree(&self, i: usize) -> usize {
        self.adj[i].iter().filter(|&&v| v).count()
    }

    pub fn out_neighbors(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        self.adj[i]
            .iter()
            .enumerate()
            .filter_map(|(j, &v)| v.then_some(j))
    }

    /// Out-neighbors in the combined graph, leader first.
    pub fn combined_out_neighbors(&self, i: usize) -> Vec<Peer> {
        let mut out = Vec::new();
        if self.leader_in[i] {
            out.push(Peer::Leader);
        }
        out.extend(self.out_neighbors(i).map(Peer::Follower));
        out
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.adj[i][j]
    }

    fn has_cycle(&self) -> bool {
        // Kahn's algorithm on the follower graph.
        let mut indeg = vec![0usize; self.n];
        for i in 0..self.n {
            for j in 0..self.n {
                if self.adj[i][j] {
                    indeg[j] += 1;
                }
            }
        }
        let mut queue: Vec<usize> = (0..self.n).filter(|&i| indeg[i] == 0).collect();
        let mut seen = 0;
        while let Some(i) = queue.pop() {
            seen += 1;
            for j in 0..self.n {
                if self.adj[i][j] {
                    indeg[j] -= 1;
                    if indeg[j] == 0 {
                        queue.push(j);
                    }
                }
            }
        }
        seen != self.n
    }

    /// True iff every follower has a directed path to the leader in the
    /// combined graph (the leader has out-degree zero by construction).
    pub fn verify_global_sink(&self) -> bool {
        let mut reaches = self.leader_in.clone();
        // Followers form a DAG, so repeated sweeps settle in at most n rounds.
        for _ in 0..self.n {
            let mut changed = false;
            for i in 0..self.n {
                if !reaches[i] && self.out_neighbors(i).any(|j| reaches[j]) {
                    reaches[i] = true;
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        reaches.iter().all(|&v| v)
    }

    /// Partition of the followers into hierarchy levels: the first level
    /// holds followers that observe the leader and nothing else; every later
    /// level holds followers whose out-neighbors all lie in earlier levels
    /// (or are the leader). Information flows from lower to higher levels.
    pub fn hierarchical_levels(&self) -> Result<Vec<Vec<usize>>> {
        if !self.verify_global_sink() {
            return Err(Error::Hypothesis(
                "leader is not a global sink of the combined graph".into(),
            ));
        }
        let mut placed = vec![false; self.n];
        let mut levels: Vec<Vec<usize>> = Vec::new();
        let first: Vec<usize> = (0..self.n)
            .filter(|&i| self.leader_in[i] && self.out_degree(i) == 0)
            .collect();
        for &i in &first {
            placed[i] = true;
        }
        levels.push(first);
        while placed.iter().any(|&p| !p) {
            let next: Vec<usize> = (0..self.n)
                .filter(|&i| !placed[i] && self.out_neighbors(i).all(|j| placed[j]))
                .collect();
            if next.is_empty() {
                return Err(Error::Hypothesis(
                    "hierarchy construction stalled; graph violates the sink hypothesis".into(),
                ));
            }
            for &i in &next {
                placed[i] = true;
            }
            levels.push(next);
        }
        Ok(levels)
    }

    /// Weight pair `(w_l, w_f) = (1^i, 1) / (1^i + d_out^i)`.
    pub fn weights(&self, i: usize) -> Result<(f64, f64)> {
        let denom = self.indicator(i) + self.out_degree(i);
        if denom == 0 {
            return Err(Error::Hypothesis(format!(
                "follower {i} observes neither the leader nor any follower"
            )));
        }
        Ok((self.indicator(i) as f64 / denom as f64, 1.0 / denom as f64))
    }
}

/// Locally known formation offsets: for each follower `i` and each of its
/// out-neighbors `j` in the combined graph, the desired displacement of `i`
/// relative to `j` (sign convention `F_ij = F_i0 - F_j0`). May vary with the
/// sampling index.
#[derive(Debug, Clone)]
pub struct FormationSpec {
    constant: BTreeMap<(usize, Peer), Matrix>,
    per_epoch: Vec<BTreeMap<(usize, Peer), Matrix>>,
    dim: usize,
}

impl FormationSpec {
    /// All offsets zero: pure synchronization to the leader sample.
    pub fn zero(dim: usize) -> FormationSpec {
        FormationSpec {
            constant: BTreeMap::new(),
            per_epoch: Vec::new(),
            dim,
        }
    }

    pub fn constant(dim: usize, entries: BTreeMap<(usize, Peer), Matrix>) -> Result<FormationSpec> {
        for ((i, p), v) in &entries {
            if v.rows() != dim || v.cols() != 1 {
                return Err(Error::Dimension(format!(
                    "offset for ({i}, {p:?}) must be a {dim}-vector"
                )));
            }
        }
        Ok(FormationSpec {
            constant: entries,
            per_epoch: Vec::new(),
            dim,
        })
    }

    /// Time-varying spec: per sampling index tables override the constant
    /// table; the last table persists beyond the listed indices.
    pub fn per_epoch(
        dim: usize,
        tables: Vec<BTreeMap<(usize, Peer), Matrix>>,
    ) -> Result<FormationSpec> {
        if tables.is_empty() {
            return Err(Error::Domain("per-epoch formation spec needs at least one table".into()));
        }
        for t in &tables {
            for ((i, p), v) in t {
                if v.rows() != dim || v.cols() != 1 {
                    return Err(Error::Dimension(format!(
                        "offset for ({i}, {p:?}) must be a {dim}-vector"
                    )));
                }
            }
        }
        Ok(FormationSpec {
            constant: BTreeMap::new(),
            per_epoch: tables,
            dim,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    fn local(&self, i: usize, j: Peer, k: usize) -> Matrix {
        let table = if self.per_epoch.is_empty() {
            &self.constant
        } else {
            &self.per_epoch[k.min(self.per_epoch.len() - 1)]
        };
        table
            .get(&(i, j))
            .cloned()
            .unwrap_or_else(|| Matrix::zeros(self.dim, 1))
    }

    /// Local offset of follower `i` with respect to out-neighbor `j` at
    /// sampling index `k`; zero when unspecified.
    pub fn local_offset(&self, i: usize, j: Peer, k: usize) -> Matrix {
        self.local(i, j, k)
    }
}

/// Telescopes the local offsets down the hierarchy into per-follower offsets
/// with respect to the leader. Every alternative path must agree within
/// `tol`; disagreement names the two out-neighbors whose paths conflict.
pub fn resolve_offsets(
    net: &LeaderNetwork,
    spec: &FormationSpec,
    k: usize,
    tol: f64,
) -> Result<Vec<Matrix>> {
    let levels = net.hierarchical_levels()?;
    let n = net.follower_count();
    let mut resolved: Vec<Option<Matrix>> = vec![None; n];
    for level in &levels {
        for &i in level {
            let mut candidates: Vec<(Peer, Matrix)> = Vec::new();
            for peer in net.combined_out_neighbors(i) {
                let local = spec.local_offset(i, peer, k);
                let f = match peer {
                    Peer::Leader => local,
                    Peer::Follower(j) => {
                        let base = resolved[j]
                            .as_ref()
                            .expect("levels guarantee out-neighbors are resolved first");
                        &local + base
                    }
                };
                candidates.push((peer, f));
            }
            let (first_peer, first) = candidates
                .first()
                .cloned()
                .ok_or_else(|| Error::Hypothesis(format!("follower {i} has no out-neighbors")))?;
            for (peer, cand) in &candidates[1..] {
                if (cand - &first).norm_fro() > tol {
                    let peer_id = |p: &Peer| match p {
                        Peer::Leader => 0,
                        Peer::Follower(j) => j + 1,
                    };
                    return Err(Error::OffsetInconsistency {
                        follower: i + 1,
                        via_a: peer_id(&first_peer),
                        via_b: peer_id(peer),
                        offset_a: first.as_vector(),
                        offset_b: cand.as_vector(),
                    });
                }
            }
            resolved[i] = Some(first);
        }
    }
    Ok(resolved.into_iter().map(Option::unwrap).collect())
}
