//! Symbolic side: normally ordered field moments and their Gaussian pairings.

use serde::{Deserialize, Serialize};

use crate::model::SourceKind;

/// Detector 1 is the pinhole, detector 2 the bucket.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Detector {
    Pinhole,
    Bucket,
}

/// Time argument of a photocurrent in the product being averaged. In the
/// stationary-lag form `T` sits at 0 and `U` at the lag tau.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Anchor {
    T,
    U,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CurrentFactor {
    pub detector: Detector,
    pub anchor: Anchor,
}

impl CurrentFactor {
    pub fn new(detector: Detector, anchor: Anchor) -> Self {
        Self { detector, anchor }
    }
}

/// <i1(t) i2(t) i1(u) i2(u)>.
pub fn fourth_moment_factors() -> [CurrentFactor; 4] {
    [
        CurrentFactor::new(Detector::Pinhole, Anchor::T),
        CurrentFactor::new(Detector::Bucket, Anchor::T),
        CurrentFactor::new(Detector::Pinhole, Anchor::U),
        CurrentFactor::new(Detector::Bucket, Anchor::U),
    ]
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SpaceVar {
    /// The pinhole point rho1.
    Pinhole,
    /// k-th bucket-plane integration variable.
    Bucket(usize),
}

/// A detection event (time, space) shared by the labels that the commutator
/// deltas have merged. Carries one filter impulse response per merged current.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Node {
    pub detector: Detector,
    pub filters: Vec<Anchor>,
    pub space: SpaceVar,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldLabel {
    pub detector: Detector,
    pub daggered: bool,
    /// Index of the node holding this label's time and space variables.
    pub node: usize,
    pub space: SpaceVar,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentExpression {
    pub labels: Vec<FieldLabel>,
    pub nodes: Vec<Node>,
    /// Pairs of current indices identified by a commutator delta.
    pub deltas: Vec<(usize, usize)>,
    pub prefactor: f64,
}

impl MomentExpression {
    pub fn order(&self) -> usize {
        self.labels.len()
    }

    pub fn is_normal_ordered(&self) -> bool {
        let first_plain = self.labels.iter().position(|l| !l.daggered);
        match first_plain {
            None => true,
            Some(k) => self.labels[k..].iter().all(|l| !l.daggered),
        }
    }
}

/// All set partitions of `items`, blocks in order of first element.
fn set_partitions(items: &[usize]) -> Vec<Vec<Vec<usize>>> {
    if items.is_empty() {
        return vec![Vec::new()];
    }
    let first = items[0];
    let mut out = Vec::new();
    for rest in set_partitions(&items[1..]) {
        // first in a block of its own
        let mut p = vec![vec![first]];
        p.extend(rest.iter().cloned());
        out.push(p);
        // first joined to an existing block
        for b in 0..rest.len() {
            let mut p = rest.clone();
            p[b].insert(0, first);
            out.push(p);
        }
    }
    out
}

/// Normal-order the product of photocurrents.
///
/// Each current is E'^dagger E' at its detector; moving annihilators to the
/// right past creators of the same detector produces a delta that identifies
/// the two events. Over all orderings this yields one term per set partition
/// of the same-detector currents, each block becoming one node. Terms are
/// returned by number of deltas, pinhole merges first.
pub fn normal_order(factors: &[CurrentFactor]) -> Vec<MomentExpression> {
    let idx_of = |d: Detector| -> Vec<usize> {
        factors
            .iter()
            .enumerate()
            .filter(|(_, f)| f.detector == d)
            .map(|(i, _)| i)
            .collect()
    };
    let p1 = set_partitions(&idx_of(Detector::Pinhole));
    let p2 = set_partitions(&idx_of(Detector::Bucket));
    let mut out = Vec::new();
    for a in &p1 {
        for b in &p2 {
            let mut nodes = Vec::new();
            let mut deltas = Vec::new();
            let mut bucket_vars = 0;
            for (det, blocks) in [(Detector::Pinhole, a), (Detector::Bucket, b)] {
                for block in blocks.iter() {
                    for w in block.windows(2) {
                        deltas.push((w[0], w[1]));
                    }
                    let space = match det {
                        Detector::Pinhole => SpaceVar::Pinhole,
                        Detector::Bucket => {
                            bucket_vars += 1;
                            SpaceVar::Bucket(bucket_vars - 1)
                        }
                    };
                    nodes.push(Node {
                        detector: det,
                        filters: block.iter().map(|&i| factors[i].anchor).collect(),
                        space,
                    });
                }
            }
            let mut labels = Vec::with_capacity(2 * nodes.len());
            for daggered in [true, false] {
                for (k, n) in nodes.iter().enumerate() {
                    labels.push(FieldLabel {
                        detector: n.detector,
                        daggered,
                        node: k,
                        space: n.space,
                    });
                }
            }
            out.push(MomentExpression {
                labels,
                nodes,
                deltas,
                prefactor: 1.0,
            });
        }
    }
    let merges_pinhole = |m: &MomentExpression| {
        m.nodes
            .iter()
            .filter(|n| n.detector == Detector::Pinhole && n.filters.len() > 1)
            .count()
    };
    out.sort_by_key(|m| (m.deltas.len(), std::cmp::Reverse(merges_pinhole(m))));
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PairType {
    /// <E_m^dagger E_m>
    PiAuto,
    /// <E_1^dagger E_2> or <E_2^dagger E_1>
    PiCross,
    /// <E_1 E_2>
    PsCross,
    /// <E_1^dagger E_2^dagger>
    PsCrossConj,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Pair {
    /// For phase-insensitive pairs, the daggered label.
    pub a: usize,
    pub b: usize,
    pub kind: PairType,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Pairing {
    pub pairs: Vec<Pair>,
}

fn pair_type(x: &FieldLabel, y: &FieldLabel, kind: SourceKind) -> Option<(PairType, bool)> {
    let same = x.detector == y.detector;
    match (x.daggered, y.daggered) {
        (true, false) | (false, true) => {
            let swap = !x.daggered;
            if same {
                Some((PairType::PiAuto, swap))
            } else if kind == SourceKind::Thermal {
                Some((PairType::PiCross, swap))
            } else {
                None
            }
        }
        (false, false) if !same && kind.is_phase_sensitive() => Some((PairType::PsCross, false)),
        (true, true) if !same && kind.is_phase_sensitive() => Some((PairType::PsCrossConj, false)),
        _ => None,
    }
}

/// Perfect matchings of the labels whose every pair has a nonzero kernel for
/// the state. Gaussian-Schell light has no phase-sensitive autocorrelation.
pub fn enumerate_pairings(m: &MomentExpression, kind: SourceKind) -> Vec<Pairing> {
    fn rec(
        labels: &[FieldLabel],
        used: &mut Vec<bool>,
        cur: &mut Vec<Pair>,
        kind: SourceKind,
        out: &mut Vec<Pairing>,
    ) {
        let Some(i) = used.iter().position(|u| !u) else {
            out.push(Pairing { pairs: cur.clone() });
            return;
        };
        used[i] = true;
        for j in i + 1..labels.len() {
            if used[j] {
                continue;
            }
            if let Some((t, swap)) = pair_type(&labels[i], &labels[j], kind) {
                used[j] = true;
                let (a, b) = if swap { (j, i) } else { (i, j) };
                cur.push(Pair { a, b, kind: t });
                rec(labels, used, cur, kind, out);
                cur.pop();
                used[j] = false;
            }
        }
        used[i] = false;
    }
    let mut out = Vec::new();
    let mut used = vec![false; m.labels.len()];
    rec(&m.labels, &mut used, &mut Vec::new(), kind, &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fourth_moment_orders() {
        let terms = normal_order(&fourth_moment_factors());
        let lens: Vec<_> = terms.iter().map(|m| m.order()).collect();
        assert_eq!(lens, vec![8, 6, 6, 4]);
        assert!(terms.iter().all(|m| m.is_normal_ordered()));
        assert_eq!(terms[1].nodes[0].filters.len(), 2);
        assert_eq!(terms[1].nodes[0].detector, Detector::Pinhole);
    }

    #[test]
    fn single_current_square() {
        let f = [
            CurrentFactor::new(Detector::Bucket, Anchor::T),
            CurrentFactor::new(Detector::Bucket, Anchor::T),
        ];
        let lens: Vec<_> = normal_order(&f).iter().map(|m| m.order()).collect();
        assert_eq!(lens, vec![4, 2]);
    }

    #[test]
    fn different_detectors_never_merge() {
        let f = [
            CurrentFactor::new(Detector::Pinhole, Anchor::T),
            CurrentFactor::new(Detector::Bucket, Anchor::T),
        ];
        let terms = normal_order(&f);
        assert_eq!(terms.len(), 1);
        assert!(terms[0].deltas.is_empty());
    }

    #[test]
    fn pairing_counts() {
        let terms = normal_order(&fourth_moment_factors());
        assert_eq!(enumerate_pairings(&terms[0], SourceKind::Thermal).len(), 24);
        assert_eq!(enumerate_pairings(&terms[3], SourceKind::Thermal).len(), 2);
        for kind in [SourceKind::ClassicalPhaseSensitive, SourceKind::QuantumPhaseSensitive] {
            let n = enumerate_pairings(&terms[0], kind).len();
            assert!(n <= 105);
            assert_eq!(enumerate_pairings(&terms[3], kind).len(), 2);
        }
    }
}
