//! Dense exact matrices over a scalar [`Domain`].
//!
//! Elimination is fraction-free (Bareiss): every intermediate entry of the
//! forward pass is a minor of the input, which keeps rational-function degrees
//! and number-field coefficients small. Pivots are the first nonzero entry
//! at or below the diagonal, so results are deterministic.

use std::fmt;

use thiserror::Error;

use crate::field::{Domain, Scalar};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LinalgError {
    #[error("matrix is singular")]
    Singular,
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("matrix has rank {rank}, expected full row rank {expected}")]
    RankDeficient { rank: usize, expected: usize },
    #[error("entries belong to different scalar domains")]
    DomainMismatch,
    #[error("labels must be distinct and match the dimension")]
    BadLabels,
}

/// Row-major matrix with optional 1-based row/column labels (ray indices).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mat {
    domain: Domain,
    rows: usize,
    cols: usize,
    data: Vec<Scalar>,
    row_labels: Option<Vec<usize>>,
    col_labels: Option<Vec<usize>>,
}

fn check_labels(labels: &[usize], len: usize) -> Result<(), LinalgError> {
    let mut sorted = labels.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if labels.len() != len || sorted.len() != len {
        return Err(LinalgError::BadLabels);
    }
    Ok(())
}

impl Mat {
    pub fn new(domain: &Domain, rows: usize, cols: usize, data: Vec<Scalar>) -> Result<Mat, LinalgError> {
        if data.len() != rows * cols {
            return Err(LinalgError::DimensionMismatch(format!("{} entries for a {rows}x{cols} matrix", data.len())));
        }
        if data.iter().any(|x| x.domain() != domain) {
            return Err(LinalgError::DomainMismatch);
        }
        Ok(Mat { domain: domain.clone(), rows, cols, data, row_labels: None, col_labels: None })
    }

    pub fn from_rows(domain: &Domain, rows: Vec<Vec<Scalar>>) -> Result<Mat, LinalgError> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(LinalgError::DimensionMismatch("ragged rows".into()));
        }
        Mat::new(domain, r, c, rows.into_iter().flatten().collect())
    }

    /// Matrix whose columns are the given vectors, all of length `rows`.
    pub fn from_columns(domain: &Domain, rows: usize, columns: &[Vec<Scalar>]) -> Result<Mat, LinalgError> {
        if columns.iter().any(|c| c.len() != rows) {
            return Err(LinalgError::DimensionMismatch("column length".into()));
        }
        let data = (0..rows).flat_map(|i| columns.iter().map(move |c| c[i].clone())).collect();
        Mat::new(domain, rows, columns.len(), data)
    }

    pub fn zeros(domain: &Domain, rows: usize, cols: usize) -> Mat {
        Mat::new(domain, rows, cols, vec![domain.zero(); rows * cols]).unwrap()
    }

    pub fn identity(domain: &Domain, n: usize) -> Mat {
        let mut m = Mat::zeros(domain, n, n);
        for i in 0..n {
            m.data[i * n + i] = domain.one();
        }
        m
    }

    pub fn with_labels(
        mut self,
        row_labels: Option<Vec<usize>>,
        col_labels: Option<Vec<usize>>,
    ) -> Result<Mat, LinalgError> {
        if let Some(l) = &row_labels {
            check_labels(l, self.rows)?;
        }
        if let Some(l) = &col_labels {
            check_labels(l, self.cols)?;
        }
        self.row_labels = row_labels;
        self.col_labels = col_labels;
        Ok(self)
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row_labels(&self) -> Option<&[usize]> {
        self.row_labels.as_deref()
    }

    pub fn col_labels(&self) -> Option<&[usize]> {
        self.col_labels.as_deref()
    }

    pub fn get(&self, i: usize, j: usize) -> &Scalar {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, value: Scalar) {
        assert!(value.domain() == &self.domain, "scalar domain mismatch");
        self.data[i * self.cols + j] = value;
    }

    pub fn row(&self, i: usize) -> Vec<Scalar> {
        self.data[i * self.cols..(i + 1) * self.cols].to_vec()
    }

    pub fn column(&self, j: usize) -> Vec<Scalar> {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }

    pub fn entries(&self) -> &[Scalar] {
        &self.data
    }

    pub fn select_columns(&self, cols: &[usize]) -> Mat {
        let data = (0..self.rows).flat_map(|i| cols.iter().map(move |&j| self.get(i, j).clone())).collect();
        Mat::new(&self.domain, self.rows, cols.len(), data).unwrap()
    }

    pub fn transpose(&self) -> Mat {
        let data = (0..self.cols).flat_map(|j| (0..self.rows).map(move |i| self.get(i, j).clone())).collect();
        Mat {
            domain: self.domain.clone(),
            rows: self.cols,
            cols: self.rows,
            data,
            row_labels: self.col_labels.clone(),
            col_labels: self.row_labels.clone(),
        }
    }

    pub fn is_identity(&self) -> bool {
        self.rows == self.cols
            && (0..self.rows).all(|i| {
                (0..self.cols).all(|j| if i == j { self.get(i, j).is_one() } else { self.get(i, j).is_zero() })
            })
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Scalar::is_zero)
    }

    /// Entry-wise equality, ignoring labels.
    pub fn same_entries(&self, other: &Mat) -> bool {
        self.rows == other.rows && self.cols == other.cols && self.data == other.data
    }

    /// Maps every entry, possibly into another domain.
    pub fn try_map<E>(&self, domain: &Domain, f: impl Fn(&Scalar) -> Result<Scalar, E>) -> Result<Mat, E> {
        let data = self.data.iter().map(f).collect::<Result<Vec<_>, E>>()?;
        Ok(Mat {
            domain: domain.clone(),
            rows: self.rows,
            cols: self.cols,
            data,
            row_labels: self.row_labels.clone(),
            col_labels: self.col_labels.clone(),
        })
    }

    pub fn matmul(&self, other: &Mat) -> Result<Mat, LinalgError> {
        if self.cols != other.rows {
            return Err(LinalgError::DimensionMismatch(format!(
                "{}x{} times {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        if self.domain != other.domain {
            return Err(LinalgError::DomainMismatch);
        }
        let mut data = Vec::with_capacity(self.rows * other.cols);
        for i in 0..self.rows {
            for j in 0..other.cols {
                let mut acc = self.domain.zero();
                for k in 0..self.cols {
                    let (a, b) = (self.get(i, k), other.get(k, j));
                    if !a.is_zero() && !b.is_zero() {
                        acc = &acc + &(a * b);
                    }
                }
                data.push(acc);
            }
        }
        Ok(Mat {
            domain: self.domain.clone(),
            rows: self.rows,
            cols: other.cols,
            data,
            row_labels: self.row_labels.clone(),
            col_labels: other.col_labels.clone(),
        })
    }

    pub fn mul_vec(&self, v: &[Scalar]) -> Result<Vec<Scalar>, LinalgError> {
        if v.len() != self.cols {
            return Err(LinalgError::DimensionMismatch(format!(
                "vector of length {} for {} columns",
                v.len(),
                self.cols
            )));
        }
        if v.iter().any(|x| x.domain() != &self.domain) {
            return Err(LinalgError::DomainMismatch);
        }
        Ok((0..self.rows)
            .map(|i| v.iter().enumerate().fold(self.domain.zero(), |acc, (j, x)| &acc + &(self.get(i, j) * x)))
            .collect())
    }

    /// Solves `self · X = rhs` for square `self`.
    pub fn solve_many(&self, rhs: &Mat) -> Result<Mat, LinalgError> {
        let n = self.rows;
        if self.cols != n {
            return Err(LinalgError::DimensionMismatch("solve needs a square matrix".into()));
        }
        if rhs.rows != n {
            return Err(LinalgError::DimensionMismatch("right-hand side height".into()));
        }
        if self.domain != rhs.domain {
            return Err(LinalgError::DomainMismatch);
        }
        let m = rhs.cols;
        let w = n + m;
        let mut a: Vec<Vec<Scalar>> = (0..n)
            .map(|i| {
                let mut row = self.row(i);
                row.extend(rhs.row(i));
                row
            })
            .collect();
        let mut prev = self.domain.one();
        for k in 0..n {
            let p = (k..n).find(|&r| !a[r][k].is_zero()).ok_or(LinalgError::Singular)?;
            a.swap(k, p);
            for i in k + 1..n {
                for j in k + 1..w {
                    let v = &(&a[k][k] * &a[i][j]) - &(&a[i][k] * &a[k][j]);
                    a[i][j] = v.try_div(&prev).expect("Bareiss pivot is nonzero");
                }
                a[i][k] = self.domain.zero();
            }
            prev = a[k][k].clone();
        }
        let mut x = vec![vec![self.domain.zero(); m]; n];
        for c in 0..m {
            for i in (0..n).rev() {
                let mut acc = a[i][n + c].clone();
                for j in i + 1..n {
                    if !a[i][j].is_zero() {
                        acc = &acc - &(&a[i][j] * &x[j][c]);
                    }
                }
                x[i][c] = acc.try_div(&a[i][i]).expect("nonzero diagonal");
            }
        }
        Ok(Mat {
            domain: self.domain.clone(),
            rows: n,
            cols: m,
            data: x.into_iter().flatten().collect(),
            row_labels: self.col_labels.clone(),
            col_labels: rhs.col_labels.clone(),
        })
    }

    pub fn solve(&self, b: &[Scalar]) -> Result<Vec<Scalar>, LinalgError> {
        let rhs = Mat::from_columns(&self.domain, self.rows, &[b.to_vec()])?;
        Ok(self.solve_many(&rhs)?.column(0))
    }

    pub fn invert(&self) -> Result<Mat, LinalgError> {
        let inv = self.solve_many(&Mat::identity(&self.domain, self.rows))?;
        // Rows of A⁻¹ are indexed like A's columns, and vice versa.
        Ok(Mat { row_labels: self.col_labels.clone(), col_labels: self.row_labels.clone(), ..inv })
    }

    /// Reduced row echelon form and its pivot columns.
    fn rref(&self) -> (Vec<Vec<Scalar>>, Vec<usize>) {
        let mut a: Vec<Vec<Scalar>> = (0..self.rows).map(|i| self.row(i)).collect();
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..self.cols {
            if r == self.rows {
                break;
            }
            let Some(p) = (r..self.rows).find(|&i| !a[i][c].is_zero()) else {
                continue;
            };
            a.swap(r, p);
            let inv = a[r][c].inv().expect("nonzero pivot");
            a[r] = a[r].iter().map(|x| x * &inv).collect();
            for i in 0..self.rows {
                if i != r && !a[i][c].is_zero() {
                    let f = a[i][c].clone();
                    a[i] = a[i].iter().zip(&a[r]).map(|(x, y)| x - &(&f * y)).collect();
                }
            }
            pivots.push(c);
            r += 1;
        }
        (a, pivots)
    }

    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }

    /// Basis of the right kernel of a full-row-rank matrix.
    ///
    /// With `basis_columns = Some(I)` (`|I| = rows`, 0-based), returns the
    /// distinguished basis `e_j − a^j` for each `j ∉ I` in increasing order,
    /// where `a^j` solves `A_I · a^j = A e_j` and is supported on `I`.
    pub fn kernel_basis(&self, basis_columns: Option<&[usize]>) -> Result<Vec<Vec<Scalar>>, LinalgError> {
        let rank = self.rank();
        if rank != self.rows {
            return Err(LinalgError::RankDeficient { rank, expected: self.rows });
        }
        let zero = self.domain.zero();
        match basis_columns {
            Some(index) => {
                if index.len() != self.rows || index.iter().any(|&j| j >= self.cols) {
                    return Err(LinalgError::DimensionMismatch("basis index set".into()));
                }
                let others: Vec<usize> = (0..self.cols).filter(|j| !index.contains(j)).collect();
                let coeffs = self.select_columns(index).solve_many(&self.select_columns(&others))?;
                Ok(others
                    .iter()
                    .enumerate()
                    .map(|(col, &j)| {
                        let mut v = vec![zero.clone(); self.cols];
                        v[j] = self.domain.one();
                        for (row, &i) in index.iter().enumerate() {
                            v[i] = -coeffs.get(row, col);
                        }
                        v
                    })
                    .collect())
            }
            None => {
                let (r, pivots) = self.rref();
                Ok((0..self.cols)
                    .filter(|j| !pivots.contains(j))
                    .map(|free| {
                        let mut v = vec![zero.clone(); self.cols];
                        v[free] = self.domain.one();
                        for (row, &p) in pivots.iter().enumerate() {
                            v[p] = -&r[row][free];
                        }
                        v
                    })
                    .collect())
            }
        }
    }
}

impl fmt::Display for Mat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.rows {
            let row: Vec<String> = self.row(i).iter().map(Scalar::pretty).collect();
            writeln!(f, "[{}]", row.join(", "))?;
        }
        Ok(())
    }
}
