use std::fmt;

use rand::Rng;

use super::field::{Elem, PrimeField};
use crate::error::{Error, Result};

/// Dense row-major matrix over a prime field.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct FieldMatrix {
    field: PrimeField,
    rows: usize,
    cols: usize,
    data: Vec<Elem>,
}

/// Reduced row echelon form together with the pivot column of each nonzero row.
#[derive(Debug, Clone)]
pub struct Echelon {
    pub reduced: FieldMatrix,
    pub pivots: Vec<usize>,
}

impl Echelon {
    pub fn rank(&self) -> usize {
        self.pivots.len()
    }
}

impl FieldMatrix {
    pub fn zeros(field: PrimeField, rows: usize, cols: usize) -> Self {
        Self {
            field,
            rows,
            cols,
            data: vec![0; rows * cols],
        }
    }

    pub fn identity(field: PrimeField, n: usize) -> Self {
        let mut m = Self::zeros(field, n, n);
        for i in 0..n {
            m.data[i * n + i] = 1 % field.p();
        }
        m
    }

    /// Builds a matrix from row-major data, reducing every entry modulo p.
    pub fn from_vec(field: PrimeField, rows: usize, cols: usize, data: Vec<u64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Dimension(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        let data = data.into_iter().map(|x| field.reduce(x)).collect();
        Ok(Self {
            field,
            rows,
            cols,
            data,
        })
    }

    /// Builds a matrix from a list of rows. An empty list needs an explicit
    /// column count, so it yields a `0 x cols` matrix.
    pub fn from_rows<R: AsRef<[u64]>>(field: PrimeField, cols: usize, rows: &[R]) -> Result<Self> {
        let mut data = Vec::with_capacity(rows.len() * cols);
        for (i, r) in rows.iter().enumerate() {
            let r = r.as_ref();
            if r.len() != cols {
                return Err(Error::Dimension(format!(
                    "row {i} has {} entries, expected {cols}",
                    r.len()
                )));
            }
            data.extend(r.iter().map(|&x| field.reduce(x)));
        }
        Ok(Self {
            field,
            rows: rows.len(),
            cols,
            data,
        })
    }

    pub fn random<R: Rng + ?Sized>(
        field: PrimeField,
        rows: usize,
        cols: usize,
        rng: &mut R,
    ) -> Self {
        let data = (0..rows * cols).map(|_| field.random(rng)).collect();
        Self {
            field,
            rows,
            cols,
            data,
        }
    }

    /// Samples uniformly among invertible `n x n` matrices by rejection.
    pub fn random_invertible<R: Rng + ?Sized>(field: PrimeField, n: usize, rng: &mut R) -> Self {
        loop {
            let m = Self::random(field, n, n, rng);
            if m.rank() == n {
                return m;
            }
        }
    }

    #[inline]
    pub fn field(&self) -> PrimeField {
        self.field
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> Elem {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: u64) {
        self.data[r * self.cols + c] = self.field.reduce(v);
    }

    #[inline]
    pub fn row(&self, r: usize) -> &[Elem] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn column(&self, c: usize) -> Vec<Elem> {
        (0..self.rows).map(|r| self.get(r, c)).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<Elem>> {
        (0..self.rows).map(|r| self.row(r).to_vec()).collect()
    }

    pub fn as_slice(&self) -> &[Elem] {
        &self.data
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&x| x == 0)
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.field, self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t.data[c * self.rows + r] = self.get(r, c);
            }
        }
        t
    }

    pub fn mul(&self, other: &FieldMatrix) -> Result<FieldMatrix> {
        self.check_field(other)?;
        if self.cols != other.rows {
            return Err(Error::Dimension(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let f = self.field;
        let ot = other.transpose();
        let mut out = Self::zeros(f, self.rows, other.cols);
        for r in 0..self.rows {
            for c in 0..other.cols {
                out.data[r * other.cols + c] = f.dot(self.row(r), ot.row(c));
            }
        }
        Ok(out)
    }

    /// Matrix-vector product `self * v`.
    pub fn mul_vec(&self, v: &[Elem]) -> Result<Vec<Elem>> {
        if v.len() != self.cols {
            return Err(Error::Dimension(format!(
                "vector of length {} against {} columns",
                v.len(),
                self.cols
            )));
        }
        Ok((0..self.rows)
            .map(|r| self.field.dot(self.row(r), v))
            .collect())
    }

    /// Row-vector product `v * self`.
    pub fn vec_mul(&self, v: &[Elem]) -> Result<Vec<Elem>> {
        if v.len() != self.rows {
            return Err(Error::Dimension(format!(
                "vector of length {} against {} rows",
                v.len(),
                self.rows
            )));
        }
        let f = self.field;
        let mut out = vec![0; self.cols];
        for (r, &coef) in v.iter().enumerate() {
            if coef == 0 {
                continue;
            }
            for (o, &x) in out.iter_mut().zip(self.row(r)) {
                *o = f.add(*o, f.mul(coef, x));
            }
        }
        Ok(out)
    }

    pub fn select_rows(&self, idx: &[usize]) -> Self {
        let mut data = Vec::with_capacity(idx.len() * self.cols);
        for &i in idx {
            data.extend_from_slice(self.row(i));
        }
        Self {
            field: self.field,
            rows: idx.len(),
            cols: self.cols,
            data,
        }
    }

    pub fn select_cols(&self, idx: &[usize]) -> Self {
        let mut data = Vec::with_capacity(idx.len() * self.rows);
        for r in 0..self.rows {
            let row = self.row(r);
            data.extend(idx.iter().map(|&c| row[c]));
        }
        Self {
            field: self.field,
            rows: self.rows,
            cols: idx.len(),
            data,
        }
    }

    pub fn vstack(&self, other: &FieldMatrix) -> Result<Self> {
        self.check_field(other)?;
        if self.cols != other.cols {
            return Err(Error::Dimension(format!(
                "cannot stack {} columns on {} columns",
                other.cols, self.cols
            )));
        }
        let mut data = self.data.clone();
        data.extend_from_slice(&other.data);
        Ok(Self {
            field: self.field,
            rows: self.rows + other.rows,
            cols: self.cols,
            data,
        })
    }

    pub fn push_row(&mut self, row: &[Elem]) -> Result<()> {
        if row.len() != self.cols {
            return Err(Error::Dimension(format!(
                "row of length {} for {} columns",
                row.len(),
                self.cols
            )));
        }
        let f = self.field;
        self.data.extend(row.iter().map(|&x| f.reduce(x)));
        self.rows += 1;
        Ok(())
    }

    /// Gauss-Jordan elimination. The pivot of each step is the first nonzero
    /// entry scanning columns left to right and rows top to bottom, so the
    /// result is a deterministic function of the input.
    pub fn echelon(&self) -> Echelon {
        let f = self.field;
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut lead = 0;
        for c in 0..m.cols {
            if lead == m.rows {
                break;
            }
            let Some(pr) = (lead..m.rows).find(|&r| m.get(r, c) != 0) else {
                continue;
            };
            m.swap_rows(lead, pr);
            let inv = f.inv(m.get(lead, c)).expect("pivot is nonzero");
            m.scale_row(lead, inv);
            for r in 0..m.rows {
                if r != lead {
                    let factor = m.get(r, c);
                    if factor != 0 {
                        m.sub_scaled_row(r, lead, factor);
                    }
                }
            }
            pivots.push(c);
            lead += 1;
        }
        Echelon { reduced: m, pivots }
    }

    pub fn rank(&self) -> usize {
        // Forward elimination only; cheaper than a full echelon form.
        let f = self.field;
        let mut m = self.clone();
        let mut rank = 0;
        for c in 0..m.cols {
            if rank == m.rows {
                break;
            }
            let Some(pr) = (rank..m.rows).find(|&r| m.get(r, c) != 0) else {
                continue;
            };
            m.swap_rows(rank, pr);
            let inv = f.inv(m.get(rank, c)).expect("pivot is nonzero");
            m.scale_row(rank, inv);
            for r in rank + 1..m.rows {
                let factor = m.get(r, c);
                if factor != 0 {
                    m.sub_scaled_row(r, rank, factor);
                }
            }
            rank += 1;
        }
        rank
    }

    pub fn inverse(&self) -> Result<Self> {
        if !self.is_square() {
            return Err(Error::Dimension(format!(
                "inverse of non-square {}x{} matrix",
                self.rows, self.cols
            )));
        }
        let n = self.rows;
        let f = self.field;
        let mut aug = Self::zeros(f, n, 2 * n);
        for r in 0..n {
            aug.data[r * 2 * n..r * 2 * n + n].copy_from_slice(self.row(r));
            aug.data[r * 2 * n + n + r] = 1 % f.p();
        }
        let ech = aug.echelon();
        let rank = ech.pivots.iter().take_while(|&&c| c < n).count();
        if rank < n {
            return Err(Error::Singular { rank, dim: n });
        }
        let cols: Vec<usize> = (n..2 * n).collect();
        Ok(ech.reduced.select_cols(&cols))
    }

    /// Some `x` with `self * x = b`, or `None` if the system is inconsistent.
    /// Free variables are set to zero.
    pub fn solve(&self, b: &[Elem]) -> Result<Option<Vec<Elem>>> {
        if b.len() != self.rows {
            return Err(Error::Dimension(format!(
                "right-hand side of length {} for {} rows",
                b.len(),
                self.rows
            )));
        }
        let f = self.field;
        let w = self.cols + 1;
        let mut aug = Self::zeros(f, self.rows, w);
        for (r, &rhs) in b.iter().enumerate() {
            aug.data[r * w..r * w + self.cols].copy_from_slice(self.row(r));
            aug.data[r * w + self.cols] = f.reduce(rhs);
        }
        let ech = aug.echelon();
        if ech.pivots.last() == Some(&self.cols) {
            return Ok(None);
        }
        let mut x = vec![0; self.cols];
        for (r, &c) in ech.pivots.iter().enumerate() {
            x[c] = ech.reduced.get(r, self.cols);
        }
        Ok(Some(x))
    }

    /// Coefficients `c` with `c * self = v`, i.e. `v` written as a
    /// combination of the rows, if one exists.
    pub fn express_in_rows(&self, v: &[Elem]) -> Result<Option<Vec<Elem>>> {
        if v.len() != self.cols {
            return Err(Error::Dimension(format!(
                "vector of length {} against {} columns",
                v.len(),
                self.cols
            )));
        }
        self.transpose().solve(v)
    }

    /// Whether `v` lies in the row space.
    pub fn rowspace_contains(&self, v: &[Elem]) -> Result<bool> {
        if v.len() != self.cols {
            return Err(Error::Dimension(format!(
                "vector of length {} against {} columns",
                v.len(),
                self.cols
            )));
        }
        if v.iter().all(|&x| self.field.reduce(x) == 0) {
            return Ok(true);
        }
        // Reduce v against the echelon basis; it is in the span iff nothing is left.
        let f = self.field;
        let ech = self.echelon();
        let mut rest: Vec<Elem> = v.iter().map(|&x| f.reduce(x)).collect();
        for (r, &c) in ech.pivots.iter().enumerate() {
            let factor = rest[c];
            if factor != 0 {
                for (x, &y) in rest.iter_mut().zip(ech.reduced.row(r)) {
                    *x = f.sub(*x, f.mul(factor, y));
                }
            }
        }
        Ok(rest.iter().all(|&x| x == 0))
    }

    fn check_field(&self, other: &FieldMatrix) -> Result<()> {
        if self.field != other.field {
            return Err(Error::Dimension(format!(
                "field mismatch: {} vs {}",
                self.field, other.field
            )));
        }
        Ok(())
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a != b {
            for c in 0..self.cols {
                self.data.swap(a * self.cols + c, b * self.cols + c);
            }
        }
    }

    fn scale_row(&mut self, r: usize, s: Elem) {
        let f = self.field;
        for x in &mut self.data[r * self.cols..(r + 1) * self.cols] {
            *x = f.mul(*x, s);
        }
    }

    /// row[dst] -= factor * row[src]
    fn sub_scaled_row(&mut self, dst: usize, src: usize, factor: Elem) {
        let f = self.field;
        for c in 0..self.cols {
            let s = self.data[src * self.cols + c];
            let d = &mut self.data[dst * self.cols + c];
            *d = f.sub(*d, f.mul(factor, s));
        }
    }
}

impl fmt::Debug for FieldMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "FieldMatrix {}x{} over {}",
            self.rows, self.cols, self.field
        )?;
        for r in 0..self.rows {
            writeln!(f, "  {:?}", self.row(r))?;
        }
        Ok(())
    }
}

/// `k x k` Vandermonde matrix on the points `1..=k`: entry `(i, j)` is `(i+1)^j`.
pub fn vandermonde(k: usize, field: PrimeField) -> Result<FieldMatrix> {
    if field.p() <= k as u64 {
        return Err(Error::FieldTooSmall {
            p: field.p(),
            needed: k as u64,
        });
    }
    let points: Vec<Elem> = (1..=k as u64).collect();
    vandermonde_on(&points, k, field)
}

/// Vandermonde matrix with one row per point and `width` increasing powers.
pub fn vandermonde_on(points: &[Elem], width: usize, field: PrimeField) -> Result<FieldMatrix> {
    for (i, &a) in points.iter().enumerate() {
        for &b in &points[i + 1..] {
            if field.reduce(a) == field.reduce(b) {
                return Err(Error::InvalidConfig(format!(
                    "repeated Vandermonde point {a} in {field}"
                )));
            }
        }
    }
    let mut m = FieldMatrix::zeros(field, points.len(), width);
    for (i, &x) in points.iter().enumerate() {
        for j in 0..width {
            m.set(i, j, field.pow(x, j as u64));
        }
    }
    Ok(m)
}
