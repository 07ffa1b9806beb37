use rayon::prelude::*;

use super::LinalgError;

/// A `(row, col, value)` entry used to build a [`CsrMatrix`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Triplet {
    pub row: usize,
    pub col: usize,
    pub value: f64,
}

impl Triplet {
    pub fn new(row: usize, col: usize, value: f64) -> Self {
        Self { row, col, value }
    }
}

/// Compressed sparse row matrix with strictly increasing column indices in
/// every row.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    nrows: usize,
    ncols: usize,
    row_offsets: Vec<usize>,
    col_indices: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    /// Builds a matrix from raw compressed-row arrays, checking the layout.
    pub fn try_from_parts(
        nrows: usize,
        ncols: usize,
        row_offsets: Vec<usize>,
        col_indices: Vec<usize>,
        values: Vec<f64>,
    ) -> Result<Self, LinalgError> {
        if row_offsets.len() != nrows + 1 {
            return Err(LinalgError::Dimension(format!(
                "expected {} row offsets, got {}",
                nrows + 1,
                row_offsets.len()
            )));
        }
        if row_offsets[0] != 0 || *row_offsets.last().unwrap() != col_indices.len() {
            return Err(LinalgError::Dimension("row offsets do not span the column array".into()));
        }
        if col_indices.len() != values.len() {
            return Err(LinalgError::Dimension("column and value arrays differ in length".into()));
        }
        for i in 0..nrows {
            let (s, e) = (row_offsets[i], row_offsets[i + 1]);
            if s > e {
                return Err(LinalgError::Dimension(format!("row offsets decrease at row {i}")));
            }
            let cols = &col_indices[s..e];
            if cols.windows(2).any(|w| w[0] >= w[1]) {
                return Err(LinalgError::Dimension(format!("row {i} columns not strictly increasing")));
            }
            if cols.last().is_some_and(|&c| c >= ncols) {
                return Err(LinalgError::Dimension(format!("row {i} has a column out of range")));
            }
        }
        Ok(Self { nrows, ncols, row_offsets, col_indices, values })
    }

    /// Assembles a matrix from triplets; duplicate entries are summed in the
    /// order in which they appear.
    pub fn from_triplets(nrows: usize, ncols: usize, triplets: &[Triplet]) -> Result<Self, LinalgError> {
        if let Some(t) = triplets.iter().find(|t| t.row >= nrows || t.col >= ncols) {
            return Err(LinalgError::Dimension(format!(
                "triplet ({}, {}) outside {}x{}",
                t.row, t.col, nrows, ncols
            )));
        }
        let mut counts = vec![0usize; nrows + 1];
        for t in triplets {
            counts[t.row + 1] += 1;
        }
        for i in 0..nrows {
            counts[i + 1] += counts[i];
        }
        // Bucket by row (stable), then sort each row by column.
        let mut order = vec![0usize; triplets.len()];
        let mut next = counts.clone();
        for (k, t) in triplets.iter().enumerate() {
            order[next[t.row]] = k;
            next[t.row] += 1;
        }

        let mut row_offsets = Vec::with_capacity(nrows + 1);
        let mut col_indices = Vec::new();
        let mut values = Vec::new();
        row_offsets.push(0);
        let mut row_buf: Vec<(usize, usize)> = Vec::new();
        for i in 0..nrows {
            row_buf.clear();
            row_buf.extend(order[counts[i]..counts[i + 1]].iter().map(|&k| (triplets[k].col, k)));
            row_buf.sort_unstable();
            let mut last = usize::MAX;
            for &(c, k) in &row_buf {
                if c == last {
                    *values.last_mut().unwrap() += triplets[k].value;
                } else {
                    col_indices.push(c);
                    values.push(triplets[k].value);
                    last = c;
                }
            }
            row_offsets.push(col_indices.len());
        }
        Ok(Self { nrows, ncols, row_offsets, col_indices, values })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            nrows: n,
            ncols: n,
            row_offsets: (0..=n).collect(),
            col_indices: (0..n).collect(),
            values: vec![1.0; n],
        }
    }

    pub fn from_dense(rows: &[Vec<f64>]) -> Self {
        let n = rows.len();
        let m = rows.first().map_or(0, Vec::len);
        let mut triplets = Vec::new();
        for (i, row) in rows.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                if v != 0.0 {
                    triplets.push(Triplet::new(i, j, v));
                }
            }
        }
        Self::from_triplets(n, m, &triplets).expect("dense rows have consistent shape")
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row_offsets(&self) -> &[usize] {
        &self.row_offsets
    }

    pub fn col_indices(&self) -> &[usize] {
        &self.col_indices
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Column indices and values of row `i`.
    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let r = self.row_offsets[i]..self.row_offsets[i + 1];
        (&self.col_indices[r.clone()], &self.values[r])
    }

    pub(crate) fn row_mut(&mut self, i: usize) -> (&[usize], &mut [f64]) {
        let r = self.row_offsets[i]..self.row_offsets[i + 1];
        (&self.col_indices[r.clone()], &mut self.values[r])
    }

    /// Entry `(i, j)`, zero when not stored.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (cols, vals) = self.row(i);
        cols.binary_search(&j).map_or(0.0, |k| vals[k])
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.nrows.min(self.ncols)).map(|i| self.get(i, i)).collect()
    }

    /// `y = A x`, rows processed in parallel.
    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.nrows];
        self.matvec_into(x, &mut y);
        y
    }

    pub fn matvec_into(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.ncols, "matvec: x has wrong length");
        assert_eq!(y.len(), self.nrows, "matvec: y has wrong length");
        y.par_iter_mut().with_min_len(1024).enumerate().for_each(|(i, yi)| {
            let (cols, vals) = self.row(i);
            *yi = cols.iter().zip(vals).map(|(&c, &v)| v * x[c]).sum();
        });
    }

    /// Largest `|a_ij - a_ji|` relative to the largest entry magnitude.
    pub fn symmetry_defect(&self) -> f64 {
        let scale = self.values.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
        let mut worst = 0.0f64;
        for i in 0..self.nrows {
            let (cols, vals) = self.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                worst = worst.max((v - self.get(j, i)).abs());
            }
        }
        worst / scale
    }

    /// True when the sparsity pattern is structurally symmetric.
    pub fn has_symmetric_pattern(&self) -> bool {
        self.nrows == self.ncols
            && (0..self.nrows).all(|i| {
                let (cols, _) = self.row(i);
                cols.iter().all(|&j| {
                    let (cj, _) = self.row(j);
                    cj.binary_search(&i).is_ok()
                })
            })
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut d = vec![vec![0.0; self.ncols]; self.nrows];
        for (i, row) in d.iter_mut().enumerate() {
            let (cols, vals) = self.row(i);
            for (&c, &v) in cols.iter().zip(vals) {
                row[c] = v;
            }
        }
        d
    }

    pub(crate) fn to_triplets(&self) -> impl Iterator<Item = Triplet> + '_ {
        (0..self.nrows).flat_map(move |i| {
            let (cols, vals) = self.row(i);
            cols.iter().zip(vals).map(move |(&c, &v)| Triplet::new(i, c, v))
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn duplicates_are_summed_and_columns_sorted() {
        let t = [
            Triplet::new(0, 2, 1.0),
            Triplet::new(0, 0, 2.0),
            Triplet::new(0, 2, 3.0),
            Triplet::new(1, 1, 5.0),
        ];
        let a = CsrMatrix::from_triplets(2, 3, &t).unwrap();
        assert_eq!(a.row_offsets(), &[0, 2, 3]);
        assert_eq!(a.col_indices(), &[0, 2, 1]);
        assert_eq!(a.values(), &[2.0, 4.0, 5.0]);
        assert_eq!(a.get(0, 1), 0.0);
    }

    #[test]
    fn rejects_out_of_range_triplets() {
        let t = [Triplet::new(3, 0, 1.0)];
        assert!(CsrMatrix::from_triplets(2, 2, &t).is_err());
    }

    #[test]
    fn from_parts_checks_layout() {
        assert!(CsrMatrix::try_from_parts(2, 2, vec![0, 1, 2], vec![0, 1], vec![1.0, 1.0]).is_ok());
        assert!(CsrMatrix::try_from_parts(2, 2, vec![0, 2, 2], vec![1, 0], vec![1.0, 1.0]).is_err());
        assert!(CsrMatrix::try_from_parts(2, 2, vec![0, 1], vec![0], vec![1.0]).is_err());
        assert!(CsrMatrix::try_from_parts(1, 2, vec![0, 1], vec![2], vec![1.0]).is_err());
    }

    proptest! {
        #[test]
        fn matvec_matches_dense(seed in proptest::collection::vec(-1.0f64..1.0, 400),
                                mask in proptest::collection::vec(0u8..3, 400),
                                x in proptest::collection::vec(-2.0f64..2.0, 20)) {
            let n = 20;
            let dense: Vec<Vec<f64>> = (0..n)
                .map(|i| (0..n).map(|j| if mask[i * n + j] == 0 { seed[i * n + j] } else { 0.0 }).collect())
                .collect();
            let a = CsrMatrix::from_dense(&dense);
            let y = a.matvec(&x);
            for i in 0..n {
                let yd: f64 = (0..n).map(|j| dense[i][j] * x[j]).sum();
                prop_assert!((y[i] - yd).abs() < 1e-13);
            }
        }
    }
}
