//! Sequential Information Bottleneck.
//!
//! Documents are distributions p(y|x) over the vocabulary with a uniform
//! prior p(x) = 1/n. Each sweep visits the documents in random order,
//! withdraws one from its cluster and re-inserts it where the merge cost
//!
//! ```text
//! d(x, t) = (p(x) + p(t)) * JS_pi(p(y|x), p(y|t)),  pi = (p(x), p(t)) / (p(x) + p(t))
//! ```
//!
//! is smallest. The merge cost is exactly the drop in I(T;Y) caused by the
//! merge, so every sweep is non-decreasing in I(T;Y).

use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;

use super::{check_cluster_count, ClusterConfig, Partition};
use crate::corpus::SparseCounts;
use crate::error::{Error, Result};
use crate::seed::{rng_for, stream};

/// p(y|x) of one document restricted to its support, with cached logs.
#[derive(Debug, Clone)]
pub(crate) struct DocDist {
    pub(crate) indices: Vec<u32>,
    pub(crate) probs: Vec<f64>,
    pub(crate) log_probs: Vec<f64>,
}

impl DocDist {
    pub(crate) fn new(counts: &SparseCounts) -> Self {
        let total = counts.total() as f64;
        let probs: Vec<f64> = counts.values().iter().map(|&v| v as f64 / total).collect();
        DocDist {
            indices: counts.indices().to_vec(),
            log_probs: probs.iter().map(|p| p.ln()).collect(),
            probs,
        }
    }
}

#[derive(Debug)]
struct DocTable {
    vocab_size: usize,
    docs: Vec<DocDist>,
    prior: Vec<f64>,
    word_marginal: Vec<f64>,
    word_entropy_term: f64,
}

impl DocTable {
    fn new(bow: &[&SparseCounts], vocab_size: usize) -> Self {
        let n = bow.len();
        let docs: Vec<DocDist> = bow.iter().map(|b| DocDist::new(b)).collect();
        let prior = vec![1.0 / n as f64; n];
        let mut word_marginal = vec![0.0; vocab_size];
        for (doc, &a) in docs.iter().zip(&prior) {
            for (&y, &p) in doc.indices.iter().zip(&doc.probs) {
                word_marginal[y as usize] += a * p;
            }
        }
        let word_entropy_term = word_marginal
            .iter()
            .filter(|&&p| p > 0.0)
            .map(|&p| p * p.ln())
            .sum();
        DocTable {
            vocab_size,
            docs,
            prior,
            word_marginal,
            word_entropy_term,
        }
    }
}

/// Sufficient statistics of a hard partition of non-empty documents.
///
/// Per cluster it keeps the mass p(t), the joint p(t, y) with its logs, and
/// the number of member documents containing each word so that a vanished
/// word is an exact zero rather than a rounding residue. Joint tables are
/// stored term-major (`y * k + t`) so that scoring one document against all
/// clusters reads contiguous memory.
#[derive(Debug, Clone)]
pub struct SibState {
    table: Arc<DocTable>,
    n_clusters: usize,
    assignments: Vec<usize>,
    sizes: Vec<usize>,
    mass: Vec<f64>,
    joint: Vec<f64>,
    log_joint: Vec<f64>,
    support: Vec<u32>,
    /// Position of each state document in the originating partition.
    positions: Vec<usize>,
}

impl SibState {
    /// Build from non-empty count vectors and an initial assignment.
    pub fn new(bow: &[SparseCounts], n_clusters: usize, assignments: Vec<usize>) -> Result<Self> {
        let refs: Vec<&SparseCounts> = bow.iter().collect();
        let positions = (0..bow.len()).collect();
        Self::from_refs(&refs, vocab_size_of(bow), n_clusters, assignments, positions)
    }

    fn from_refs(
        bow: &[&SparseCounts],
        vocab_size: usize,
        n_clusters: usize,
        assignments: Vec<usize>,
        positions: Vec<usize>,
    ) -> Result<Self> {
        if let Some(p) = bow.iter().position(|b| b.is_empty()) {
            return Err(Error::InvalidConfig(format!(
                "document at position {p} has no in-vocabulary token"
            )));
        }
        if bow.len() != assignments.len() {
            return Err(Error::LengthMismatch {
                left: bow.len(),
                right: assignments.len(),
            });
        }
        if let Some(&a) = assignments.iter().find(|&&a| a >= n_clusters) {
            return Err(Error::PartitionMismatch(format!(
                "cluster index {a} out of range for {n_clusters} clusters"
            )));
        }
        let table = Arc::new(DocTable::new(bow, vocab_size));
        Ok(Self::with_table(table, n_clusters, assignments, positions))
    }

    fn with_table(
        table: Arc<DocTable>,
        n_clusters: usize,
        assignments: Vec<usize>,
        positions: Vec<usize>,
    ) -> Self {
        let v = table.vocab_size;
        let mut state = SibState {
            table,
            n_clusters,
            assignments,
            sizes: vec![0; n_clusters],
            mass: vec![0.0; n_clusters],
            joint: vec![0.0; n_clusters * v],
            log_joint: vec![0.0; n_clusters * v],
            support: vec![0; n_clusters * v],
            positions,
        };
        state.recompute();
        state
    }

    /// Rebuild the statistics of a partition from its count vectors; empty
    /// documents are left out.
    pub fn from_partition(bow: &[SparseCounts], partition: &Partition) -> Result<Self> {
        if bow.len() != partition.len() {
            return Err(Error::PartitionMismatch(format!(
                "{} vectors for a partition of {} documents",
                bow.len(),
                partition.len()
            )));
        }
        let positions: Vec<usize> = (0..bow.len()).filter(|&i| !bow[i].is_empty()).collect();
        let refs: Vec<&SparseCounts> = positions.iter().map(|&i| &bow[i]).collect();
        let assignments = positions.iter().map(|&i| partition.assignments[i]).collect();
        Self::from_refs(
            &refs,
            vocab_size_of(bow),
            partition.n_clusters,
            assignments,
            positions,
        )
    }

    /// Recompute every statistic from the assignments.
    pub fn recompute(&mut self) {
        self.sizes.iter_mut().for_each(|s| *s = 0);
        self.mass.iter_mut().for_each(|m| *m = 0.0);
        self.joint.iter_mut().for_each(|j| *j = 0.0);
        self.support.iter_mut().for_each(|s| *s = 0);
        for (i, &t) in self.assignments.iter().enumerate() {
            let a = self.table.prior[i];
            self.sizes[t] += 1;
            self.mass[t] += a;
            let doc = &self.table.docs[i];
            for (&y, &p) in doc.indices.iter().zip(&doc.probs) {
                let cell = y as usize * self.n_clusters + t;
                self.joint[cell] += a * p;
                self.support[cell] += 1;
            }
        }
        for (lj, &j) in self.log_joint.iter_mut().zip(&self.joint) {
            *lj = if j > 0.0 { j.ln() } else { 0.0 };
        }
    }

    pub fn n_clusters(&self) -> usize {
        self.n_clusters
    }

    pub fn n_docs(&self) -> usize {
        self.assignments.len()
    }

    pub fn vocab_size(&self) -> usize {
        self.table.vocab_size
    }

    pub fn assignments(&self) -> &[usize] {
        &self.assignments
    }

    pub fn cluster_sizes(&self) -> &[usize] {
        &self.sizes
    }

    /// p(t) per cluster.
    pub fn cluster_mass(&self) -> &[f64] {
        &self.mass
    }

    /// p(y|t); all zeros for an empty cluster.
    pub fn cluster_word_dist(&self, t: usize) -> Vec<f64> {
        let k = self.n_clusters;
        let m = self.mass[t];
        self.joint
            .iter()
            .skip(t)
            .step_by(k)
            .map(|&j| if m > 0.0 { j / m } else { 0.0 })
            .collect()
    }

    /// p(x) per document.
    pub fn doc_prior(&self) -> &[f64] {
        &self.table.prior
    }

    /// p(y|x) as `(term, probability)` pairs.
    pub fn doc_word_dist(&self, i: usize) -> Vec<(usize, f64)> {
        let d = &self.table.docs[i];
        d.indices
            .iter()
            .map(|&y| y as usize)
            .zip(d.probs.iter().copied())
            .collect()
    }

    pub fn word_marginal(&self) -> &[f64] {
        &self.table.word_marginal
    }

    /// Take document `i` out of its cluster. Its assignment is left stale
    /// until [`SibState::insert`].
    pub fn withdraw(&mut self, i: usize) {
        let t = self.assignments[i];
        self.update(i, t, -1.0);
        self.sizes[t] -= 1;
        if self.sizes[t] == 0 {
            self.mass[t] = 0.0;
        } else {
            self.mass[t] = (self.mass[t] - self.table.prior[i]).max(0.0);
        }
    }

    pub fn insert(&mut self, i: usize, t: usize) {
        self.assignments[i] = t;
        self.update(i, t, 1.0);
        self.sizes[t] += 1;
        self.mass[t] += self.table.prior[i];
    }

    fn update(&mut self, i: usize, t: usize, sign: f64) {
        let k = self.n_clusters;
        let a = self.table.prior[i];
        let doc = &self.table.docs[i];
        for (&y, &p) in doc.indices.iter().zip(&doc.probs) {
            let cell = y as usize * k + t;
            if sign > 0.0 {
                self.support[cell] += 1;
                self.joint[cell] += a * p;
            } else {
                self.support[cell] -= 1;
                self.joint[cell] = if self.support[cell] == 0 {
                    0.0
                } else {
                    (self.joint[cell] - a * p).max(0.0)
                };
            }
            let j = self.joint[cell];
            self.log_joint[cell] = if j > 0.0 { j.ln() } else { 0.0 };
        }
    }

    /// Merge cost of a distribution with prior `a` into every cluster, as the
    /// clusters currently stand.
    pub(crate) fn merge_costs(&self, doc: &DocDist, a: f64, out: &mut Vec<f64>) {
        let k = self.n_clusters;
        let la = a.ln();
        out.clear();
        // Words outside the document's support contribute b * log(s / b)
        // in total; the loop corrects that sum on the support.
        let mut log_s = Vec::with_capacity(k);
        for &b in &self.mass {
            let s = a + b;
            log_s.push(s.ln());
            out.push(if b > 0.0 { b * (s.ln() - b.ln()) } else { 0.0 });
        }
        for ((&y, &p), &lp) in doc.indices.iter().zip(&doc.probs).zip(&doc.log_probs) {
            let ap = a * p;
            let base = y as usize * k;
            let joint = &self.joint[base..base + k];
            let log_joint = &self.log_joint[base..base + k];
            for t in 0..k {
                let j = joint[t];
                out[t] += if j > 0.0 {
                    let lm = (ap + j).ln();
                    ap * (log_s[t] + lp - lm) + j * (log_joint[t] - lm)
                } else {
                    ap * (log_s[t] - la)
                };
            }
        }
        for (t, c) in out.iter_mut().enumerate() {
            *c = if self.mass[t] > 0.0 { c.max(0.0) } else { 0.0 };
        }
    }

    /// Merge cost of withdrawn document `i` into every cluster.
    fn costs(&self, i: usize) -> Vec<f64> {
        let mut out = Vec::new();
        self.merge_costs(&self.table.docs[i], self.table.prior[i], &mut out);
        out
    }

    /// Costs of re-inserting document `i` into each cluster after taking it
    /// out of its own. The state is unchanged on return.
    pub fn reassignment_costs(&mut self, i: usize) -> Vec<f64> {
        let t = self.assignments[i];
        self.withdraw(i);
        let costs = self.costs(i);
        self.insert(i, t);
        costs
    }

    /// I(T;Y) in nats.
    pub fn mutual_information(&self) -> f64 {
        let mut joint_term = 0.0;
        for (cell, &j) in self.joint.iter().enumerate() {
            if self.support[cell] > 0 {
                joint_term += j * self.log_joint[cell];
            }
        }
        let mass_term: f64 = self
            .mass
            .iter()
            .filter(|&&m| m > 0.0)
            .map(|&m| m * m.ln())
            .sum();
        (joint_term - mass_term - self.table.word_entropy_term).max(0.0)
    }

    /// One sequential pass in the given order; returns the number of moves.
    /// Documents alone in their cluster stay put so no cluster empties.
    pub fn sweep(&mut self, order: &[usize]) -> usize {
        let mut moves = 0;
        let mut costs = Vec::with_capacity(self.n_clusters);
        for &i in order {
            let old = self.assignments[i];
            if self.sizes[old] <= 1 {
                continue;
            }
            self.withdraw(i);
            let a = self.table.prior[i];
            self.merge_costs(&self.table.docs[i], a, &mut costs);
            let tol = 1e-12 * a;
            let mut best = old;
            let mut best_cost = costs[old];
            for (t, &c) in costs.iter().enumerate() {
                if t != old && c < best_cost - tol {
                    best = t;
                    best_cost = c;
                }
            }
            self.insert(i, best);
            if best != old {
                moves += 1;
            }
        }
        moves
    }
}

fn vocab_size_of(bow: &[SparseCounts]) -> usize {
    bow.iter()
        .filter_map(|b| b.indices().last())
        .map(|&i| i as usize + 1)
        .max()
        .unwrap_or(0)
}

/// Outcome of one restart.
#[derive(Debug, Clone, PartialEq)]
pub struct SibRun {
    pub assignments: Vec<usize>,
    pub objective: f64,
    /// I(T;Y) at initialization and after every completed sweep.
    pub sweep_objectives: Vec<f64>,
    pub moves_per_sweep: Vec<usize>,
}

/// Balanced random start: shuffle, then deal documents to clusters in turn.
pub fn random_assignment<R: Rng>(n: usize, k: usize, rng: &mut R) -> Vec<usize> {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut assignments = vec![0; n];
    for (rank, &i) in order.iter().enumerate() {
        assignments[i] = rank % k;
    }
    assignments
}

/// Run sweeps from the state's current assignment until the moved fraction
/// drops below the threshold or the sweep cap is hit.
pub fn run_sweeps<R: Rng>(state: &mut SibState, config: &ClusterConfig, rng: &mut R) -> SibRun {
    let n = state.n_docs();
    let mut order: Vec<usize> = (0..n).collect();
    let mut sweep_objectives = vec![state.mutual_information()];
    let mut moves_per_sweep = Vec::new();
    for _ in 0..config.max_iterations {
        order.shuffle(rng);
        let moves = state.sweep(&order);
        state.recompute();
        sweep_objectives.push(state.mutual_information());
        moves_per_sweep.push(moves);
        if moves == 0 || (moves as f64) < config.convergence_threshold * n as f64 {
            break;
        }
    }
    SibRun {
        assignments: state.assignments.clone(),
        objective: *sweep_objectives.last().unwrap(),
        sweep_objectives,
        moves_per_sweep,
    }
}

/// Cluster count vectors with sIB; the restart with the largest I(T;Y) wins.
///
/// Documents without in-vocabulary tokens carry no information mass; they
/// are dealt round-robin to clusters after convergence and listed in
/// [`Partition::empty_docs`].
pub fn cluster_sib(bow: &[SparseCounts], config: &ClusterConfig) -> Result<Partition> {
    config.validate()?;
    let vocab_size = vocab_size_of(bow);
    let active: Vec<usize> = (0..bow.len()).filter(|&i| !bow[i].is_empty()).collect();
    if vocab_size == 0 || active.is_empty() {
        return Err(Error::EmptyVocabulary);
    }
    check_cluster_count(config.n_clusters, active.len())?;
    let refs: Vec<&SparseCounts> = active.iter().map(|&i| &bow[i]).collect();
    let table = Arc::new(DocTable::new(&refs, vocab_size));
    let k = config.n_clusters;

    let runs: Vec<(Vec<usize>, f64)> = (0..config.restarts)
        .into_par_iter()
        .map(|restart| {
            let mut rng = rng_for(config.seed, &[stream::CLUSTER, restart as u64]);
            let init = random_assignment(active.len(), k, &mut rng);
            let mut state = SibState::with_table(table.clone(), k, init, active.clone());
            let run = run_sweeps(&mut state, config, &mut rng);
            (run.assignments, run.objective)
        })
        .collect();

    let best = Partition::from_restarts(config, runs, true);
    let mut assignments = vec![0; bow.len()];
    for (&pos, &a) in active.iter().zip(&best.assignments) {
        assignments[pos] = a;
    }
    let mut empty_docs = Vec::new();
    for (rank, i) in (0..bow.len()).filter(|&i| bow[i].is_empty()).enumerate() {
        assignments[i] = rank % k;
        empty_docs.push(i as u64);
    }
    Ok(Partition {
        doc_ids: (0..bow.len() as u64).collect(),
        assignments,
        empty_docs,
        ..best
    })
}

/// I(T;Y) of a partition, checked against the statistics it was built from.
pub fn mutual_information(partition: &Partition, state: &SibState) -> Result<f64> {
    if partition.n_clusters != state.n_clusters {
        return Err(Error::PartitionMismatch(format!(
            "partition has {} clusters, state {}",
            partition.n_clusters, state.n_clusters
        )));
    }
    for (i, &pos) in state.positions.iter().enumerate() {
        if partition.assignments.get(pos) != Some(&state.assignments[i]) {
            return Err(Error::PartitionMismatch(format!(
                "assignment differs at position {pos}"
            )));
        }
    }
    Ok(state.mutual_information())
}
