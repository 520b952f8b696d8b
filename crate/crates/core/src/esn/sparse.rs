use nalgebra::{DMatrix, DVector};

/// Compressed sparse rows.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Csr {
    rows: usize,
    cols: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<f64>,
}

impl Csr {
    pub fn from_dense(m: &DMatrix<f64>) -> Self {
        let mut indptr = Vec::with_capacity(m.nrows() + 1);
        let mut indices = Vec::new();
        let mut values = Vec::new();
        indptr.push(0);
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                let v = m[(i, j)];
                if v != 0.0 {
                    indices.push(j);
                    values.push(v);
                }
            }
            indptr.push(indices.len());
        }
        Self {
            rows: m.nrows(),
            cols: m.ncols(),
            indptr,
            indices,
            values,
        }
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.rows, self.cols);
        for i in 0..self.rows {
            for k in self.indptr[i]..self.indptr[i + 1] {
                m[(i, self.indices[k])] = self.values[k];
            }
        }
        m
    }

    /// `out += self · x`.
    pub fn mul_add_to(&self, x: &DVector<f64>, out: &mut DVector<f64>) {
        for i in 0..self.rows {
            let mut acc = 0.0;
            for k in self.indptr[i]..self.indptr[i + 1] {
                acc += self.values[k] * x[self.indices[k]];
            }
            out[i] += acc;
        }
    }

    #[cfg(test)]
    pub fn nnz(&self) -> usize {
        self.values.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_dense_product() {
        let m = DMatrix::from_row_slice(3, 3, &[0.0, 2.0, 0.0, 1.0, 0.0, -1.0, 0.0, 0.0, 3.0]);
        let csr = Csr::from_dense(&m);
        assert_eq!(csr.nnz(), 4);
        assert_eq!(csr.to_dense(), m);
        let x = DVector::from_vec(vec![1.0, 2.0, 3.0]);
        let mut out = DVector::from_element(3, 1.0);
        csr.mul_add_to(&x, &mut out);
        assert_eq!(out, &m * &x + DVector::from_element(3, 1.0));
    }
}
