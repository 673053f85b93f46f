use crate::data::Dataset;

/// Column-major copy of a training feature matrix with per-feature sort
/// orders and dense ranks, shared by every tree fitted on the same rows.
#[derive(Debug, Clone)]
pub struct TrainingMatrix {
    n: usize,
    cols: Vec<Vec<f64>>,
    /// Rows sorted by (value, row index) for each feature.
    order: Vec<Vec<u32>>,
    /// Dense rank of each row's value; equal values share a rank.
    rank: Vec<Vec<u32>>,
}

impl TrainingMatrix {
    pub fn new(ds: &Dataset) -> Self {
        let n = ds.n();
        assert!(n < u32::MAX as usize, "too many rows");
        let cols: Vec<Vec<f64>> = (0..ds.n_features()).map(|j| ds.column(j)).collect();
        let mut order = Vec::with_capacity(cols.len());
        let mut rank = Vec::with_capacity(cols.len());
        for col in &cols {
            let mut o: Vec<u32> = (0..n as u32).collect();
            o.sort_unstable_by(|&a, &b| col[a as usize].total_cmp(&col[b as usize]).then(a.cmp(&b)));
            let mut r = vec![0u32; n];
            let mut current = 0u32;
            for k in 0..n {
                if k > 0 && col[o[k] as usize] > col[o[k - 1] as usize] {
                    current += 1;
                }
                r[o[k] as usize] = current;
            }
            order.push(o);
            rank.push(r);
        }
        Self {
            n,
            cols,
            order,
            rank,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.cols.len()
    }

    pub(crate) fn col(&self, f: usize) -> &[f64] {
        &self.cols[f]
    }

    pub(crate) fn order(&self, f: usize) -> &[u32] {
        &self.order[f]
    }

    pub(crate) fn rank(&self, f: usize) -> &[u32] {
        &self.rank[f]
    }
}
