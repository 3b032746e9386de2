use crate::error::{Error, Result};

/// The `K` unit vectors `e_1..e_K` in `K - 1` dimensions pointing at the
/// vertices of a regular simplex: unit norm, pairwise dot product
/// `-1/(K-1)`, summing to zero.
#[derive(Debug, Clone, PartialEq)]
pub struct SimplexBasis {
    k: usize,
    // row-major, K rows of K-1 components
    data: Vec<f64>,
}

/// Builds the basis by the row-by-row recursion: each new vector is fixed
/// by its dot products with the previous ones, then normalised.
pub fn build_simplex_basis(k: usize) -> Result<SimplexBasis> {
    SimplexBasis::iterative(k)
}

impl SimplexBasis {
    fn check(k: usize) -> Result<()> {
        if k < 2 {
            return Err(Error::invalid(format!("simplex basis needs K >= 2, got {k}")));
        }
        Ok(())
    }

    /// Recursive construction. `[e_k]_l = -[e_l]_l / (K - l)` below the
    /// diagonal, diagonal entry closes the norm, zero above.
    pub fn iterative(k: usize) -> Result<Self> {
        Self::check(k)?;
        let dim = k - 1;
        let mut data = vec![0.0; k * dim];
        data[0] = 1.0;
        for row in 1..k {
            let mut norm2 = 0.0;
            for col in 0..row.min(dim) {
                // 1-based l = col + 1
                let v = -data[col * dim + col] / (k - col - 1) as f64;
                data[row * dim + col] = v;
                norm2 += v * v;
            }
            if row < dim {
                data[row * dim + row] = (1.0 - norm2).max(0.0).sqrt();
            }
        }
        Ok(Self { k, data })
    }

    /// Explicit entries:
    /// `[e_k]_k = sqrt(K(K-k) / ((K-1)(K-k+1)))`,
    /// `[e_k]_l = -sqrt(K / ((K-1)(K-l)(K-l+1)))` for `k > l`.
    pub fn closed_form(k: usize) -> Result<Self> {
        Self::check(k)?;
        let dim = k - 1;
        let kf = k as f64;
        let mut data = vec![0.0; k * dim];
        for row in 1..=k {
            for col in 1..=dim {
                let (r, c) = (row as f64, col as f64);
                let v = if row == col {
                    (kf * (kf - r) / ((kf - 1.0) * (kf - r + 1.0))).sqrt()
                } else if row > col {
                    -(kf / ((kf - 1.0) * (kf - c) * (kf - c + 1.0))).sqrt()
                } else {
                    0.0
                };
                data[(row - 1) * dim + (col - 1)] = v;
            }
        }
        Ok(Self { k, data })
    }

    pub fn alphabet_size(&self) -> usize {
        self.k
    }

    pub fn dim(&self) -> usize {
        self.k - 1
    }

    /// Vector for the zero-based symbol index.
    pub fn vector(&self, index: usize) -> &[f64] {
        let dim = self.dim();
        &self.data[index * dim..(index + 1) * dim]
    }

    /// Vector for the 1-based symbol.
    pub fn e(&self, symbol: usize) -> Option<&[f64]> {
        (1..=self.k).contains(&symbol).then(|| self.vector(symbol - 1))
    }

    pub fn vectors(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.dim())
    }
}
