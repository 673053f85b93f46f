//! Greedy SSE tree growth.
//!
//! Two drivers share one split rule: [`grow_presorted`] keeps every feature's
//! sorted row list partitioned down the tree (CART and boosting), while
//! [`grow_sampled`] sorts only the sampled candidate features inside each node
//! (random forests with bootstrap weights and `mtry`). Both visit candidate
//! thresholds in the same order and break gain ties the same way.

use rand::seq::index;
use rand::Rng;

use super::tree::{Node, RegressionTree};
use super::TrainingMatrix;

#[derive(Debug, Clone, Copy)]
pub(crate) struct GrowConfig {
    pub min_bucket: f64,
    pub min_split: f64,
    pub max_depth: Option<usize>,
    pub complexity_penalty: f64,
}

impl GrowConfig {
    fn min_gain(&self, root_sse: f64) -> f64 {
        // gains below this are rounding noise on a zero improvement
        (self.complexity_penalty * root_sse).max(1e-12 * root_sse)
    }

    fn may_split(&self, weight: f64, depth: usize) -> bool {
        weight >= self.min_split
            && weight >= 2.0 * self.min_bucket
            && self.max_depth.is_none_or(|d| depth < d)
    }
}

#[derive(Debug, Clone, Copy)]
struct Best {
    gain: f64,
    feature: usize,
    threshold: f64,
}

/// Scan one feature's rows in ascending value order and update `best`.
/// Items are `(value, weight, weighted target)`.
#[inline]
fn scan_feature(
    items: impl Iterator<Item = (f64, f64, f64)>,
    feature: usize,
    total_w: f64,
    total_wy: f64,
    min_bucket: f64,
    best: &mut Best,
) {
    let parent = total_wy * total_wy / total_w;
    let mut wl = 0.0;
    let mut swl = 0.0;
    let mut prev = f64::NEG_INFINITY;
    for (x, w, wy) in items {
        if wl > 0.0 && x > prev {
            let wr = total_w - wl;
            if wr < min_bucket {
                break;
            }
            if wl >= min_bucket {
                let swr = total_wy - swl;
                let gain = swl * swl / wl + swr * swr / wr - parent;
                if gain > best.gain {
                    *best = Best {
                        gain,
                        feature,
                        threshold: midpoint(prev, x),
                    };
                }
            }
        }
        wl += w;
        swl += wy;
        prev = x;
    }
}

/// Threshold `t` with `lo < t <= hi`.
fn midpoint(lo: f64, hi: f64) -> f64 {
    let m = lo + (hi - lo) / 2.0;
    if m > lo {
        m
    } else {
        hi
    }
}

struct Work {
    node: usize,
    start: usize,
    end: usize,
    depth: usize,
}

fn push_children(nodes: &mut Vec<Node>, node: usize, feature: usize, threshold: f64) -> (usize, usize) {
    let left = nodes.len();
    nodes.push(Node::Leaf {
        value: 0.0,
        weight: 0.0,
    });
    nodes.push(Node::Leaf {
        value: 0.0,
        weight: 0.0,
    });
    nodes[node] = Node::Split {
        feature: feature as u32,
        threshold,
        left: left as u32,
        right: left as u32 + 1,
    };
    (left, left + 1)
}

/// Unweighted growth over all features using presorted row lists.
pub(crate) fn grow_presorted(m: &TrainingMatrix, y: &[f64], cfg: &GrowConfig) -> RegressionTree {
    let n = m.n();
    let p = m.p();
    let mut orders: Vec<Vec<u32>> = (0..p).map(|f| m.order(f).to_vec()).collect();
    let mut goes_left = vec![false; n];
    let mut scratch = vec![0u32; n];
    // node rows in ascending index order; node sums are taken over this
    // so both drivers accumulate in the same order
    let mut ids: Vec<u32> = (0..n as u32).collect();

    let root_sum: f64 = y.iter().sum();
    let root_sse = y.iter().map(|v| v * v).sum::<f64>() - root_sum * root_sum / n as f64;
    let min_gain = cfg.min_gain(root_sse);

    let mut nodes = vec![Node::Leaf {
        value: 0.0,
        weight: 0.0,
    }];
    let mut stack = vec![Work {
        node: 0,
        start: 0,
        end: n,
        depth: 0,
    }];
    while let Some(w) = stack.pop() {
        let rows = &ids[w.start..w.end];
        let weight = (w.end - w.start) as f64;
        let sum: f64 = rows.iter().map(|&r| y[r as usize]).sum();
        nodes[w.node] = Node::Leaf {
            value: sum / weight,
            weight,
        };
        if !cfg.may_split(weight, w.depth) {
            continue;
        }
        let mut best = Best {
            gain: min_gain,
            feature: usize::MAX,
            threshold: 0.0,
        };
        for f in 0..p {
            let col = m.col(f);
            let items = orders[f][w.start..w.end].iter().map(|&r| {
                let r = r as usize;
                (col[r], 1.0, y[r])
            });
            scan_feature(items, f, weight, sum, cfg.min_bucket, &mut best);
        }
        if best.feature == usize::MAX {
            continue;
        }

        let col = m.col(best.feature);
        let mut n_left = 0;
        for &r in &orders[best.feature][w.start..w.end] {
            let left = col[r as usize] < best.threshold;
            goes_left[r as usize] = left;
            n_left += usize::from(left);
        }
        for (f, order) in orders.iter_mut().enumerate().chain(std::iter::once((usize::MAX, &mut ids))) {
            if f == best.feature {
                continue;
            }
            let seg = &mut order[w.start..w.end];
            let (mut li, mut ri) = (0, 0);
            for k in 0..seg.len() {
                let r = seg[k];
                if goes_left[r as usize] {
                    seg[li] = r;
                    li += 1;
                } else {
                    scratch[ri] = r;
                    ri += 1;
                }
            }
            seg[li..].copy_from_slice(&scratch[..ri]);
        }

        let (left, right) = push_children(&mut nodes, w.node, best.feature, best.threshold);
        let mid = w.start + n_left;
        stack.push(Work {
            node: right,
            start: mid,
            end: w.end,
            depth: w.depth + 1,
        });
        stack.push(Work {
            node: left,
            start: w.start,
            end: mid,
            depth: w.depth + 1,
        });
    }
    RegressionTree {
        nodes,
        n_features: p,
    }
}

/// Nodes holding more than `1/LARGE_NODE_DIVISOR` of the rows read candidate
/// features from the global sort order instead of sorting locally.
const LARGE_NODE_DIVISOR: usize = 8;

/// Weighted growth where each node draws `mtry` candidate features.
///
/// `sample` lists distinct row indices with positive multiplicity `weights[row]`.
pub(crate) fn grow_sampled<R: Rng>(
    m: &TrainingMatrix,
    y: &[f64],
    sample: &[u32],
    weights: &[f64],
    mtry: usize,
    cfg: &GrowConfig,
    rng: &mut R,
) -> RegressionTree {
    let n = m.n();
    let p = m.p();
    let mtry = mtry.clamp(1, p.max(1));
    let mut rows: Vec<u32> = sample.to_vec();
    const NONE: u32 = u32::MAX;
    let mut node_of = vec![NONE; n];
    let mut keys: Vec<u64> = Vec::with_capacity(rows.len());
    let mut candidates: Vec<usize> = Vec::with_capacity(mtry);

    let total_w: f64 = rows.iter().map(|&r| weights[r as usize]).sum();
    let total_wy: f64 = rows.iter().map(|&r| weights[r as usize] * y[r as usize]).sum();
    let total_wyy: f64 = rows
        .iter()
        .map(|&r| weights[r as usize] * y[r as usize] * y[r as usize])
        .sum();
    let min_gain = cfg.min_gain(total_wyy - total_wy * total_wy / total_w);

    let mut nodes = vec![Node::Leaf {
        value: 0.0,
        weight: 0.0,
    }];
    let mut stack = vec![Work {
        node: 0,
        start: 0,
        end: rows.len(),
        depth: 0,
    }];
    while let Some(w) = stack.pop() {
        let seg = &mut rows[w.start..w.end];
        seg.sort_unstable();
        let weight: f64 = seg.iter().map(|&r| weights[r as usize]).sum();
        let sum: f64 = seg.iter().map(|&r| weights[r as usize] * y[r as usize]).sum();
        nodes[w.node] = Node::Leaf {
            value: sum / weight,
            weight,
        };
        if !cfg.may_split(weight, w.depth) {
            continue;
        }

        candidates.clear();
        if mtry >= p {
            candidates.extend(0..p);
        } else {
            candidates.extend(index::sample(rng, p, mtry).iter());
            candidates.sort_unstable();
        }

        let large = seg.len() * LARGE_NODE_DIVISOR > n;
        if large {
            for &r in seg.iter() {
                node_of[r as usize] = w.node as u32;
            }
        }
        let mut best = Best {
            gain: min_gain,
            feature: usize::MAX,
            threshold: 0.0,
        };
        for &f in &candidates {
            let col = m.col(f);
            if large {
                let node = w.node as u32;
                let items = m.order(f).iter().filter(|&&r| node_of[r as usize] == node).map(|&r| {
                    let r = r as usize;
                    (col[r], weights[r], weights[r] * y[r])
                });
                scan_feature(items, f, weight, sum, cfg.min_bucket, &mut best);
            } else {
                let rank = m.rank(f);
                keys.clear();
                keys.extend(seg.iter().map(|&r| (u64::from(rank[r as usize]) << 32) | u64::from(r)));
                keys.sort_unstable();
                let items = keys.iter().map(|&k| {
                    let r = (k & 0xFFFF_FFFF) as usize;
                    (col[r], weights[r], weights[r] * y[r])
                });
                scan_feature(items, f, weight, sum, cfg.min_bucket, &mut best);
            }
        }
        if large {
            for &r in seg.iter() {
                node_of[r as usize] = NONE;
            }
        }
        if best.feature == usize::MAX {
            continue;
        }

        let col = m.col(best.feature);
        let mut li = 0;
        for k in 0..seg.len() {
            if col[seg[k] as usize] < best.threshold {
                seg.swap(li, k);
                li += 1;
            }
        }
        let (left, right) = push_children(&mut nodes, w.node, best.feature, best.threshold);
        let mid = w.start + li;
        stack.push(Work {
            node: right,
            start: mid,
            end: w.end,
            depth: w.depth + 1,
        });
        stack.push(Work {
            node: left,
            start: w.start,
            end: mid,
            depth: w.depth + 1,
        });
    }
    RegressionTree {
        nodes,
        n_features: p,
    }
}
