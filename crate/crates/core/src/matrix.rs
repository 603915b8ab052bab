//! Dense row-major matrix with the text serialization shared by the CLI
//! tools, plus the small amount of symmetric linear algebra the crate needs.

use std::io::{BufRead, BufWriter, Write};
use std::path::Path;

use crate::real::{real, Real};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Real> Matrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
        }
    }

    /// Builds from a row-major vector; `data.len()` must equal `rows*cols`.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                context: "Matrix::from_vec",
                expected: rows * cols,
                got: data.len(),
            });
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<T>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            if row.len() != c {
                return Err(Error::DimensionMismatch {
                    context: "Matrix::from_rows",
                    expected: c,
                    got: row.len(),
                });
            }
            data.extend_from_slice(row);
        }
        Ok(Self { rows: r, cols: c, data })
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
    pub fn get(&self, i: usize, j: usize) -> T {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: T) {
        self.data[i * self.cols + j] = v;
    }

    /// Row `i` as a contiguous slice.
    #[inline]
    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<T> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn max_abs(&self) -> T {
        self.data
            .iter()
            .fold(T::zero(), |acc, &v| acc.max(v.abs()))
    }

    pub fn trace(&self) -> T {
        (0..self.rows.min(self.cols)).map(|i| self.get(i, i)).sum()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// First (i, j) where symmetry is violated beyond `rel_tol * |M|_inf`.
    pub fn symmetry_violation(&self, rel_tol: T) -> Option<(usize, usize)> {
        if self.rows != self.cols {
            return Some((0, 0));
        }
        let tol = rel_tol * self.max_abs();
        for i in 0..self.rows {
            for j in (i + 1)..self.cols {
                if (self.get(i, j) - self.get(j, i)).abs() > tol {
                    return Some((i, j));
                }
            }
        }
        None
    }

    /// `self * otherᵀ` without forming the transpose.
    pub fn mul_transpose(&self, other: &Self) -> Result<Self> {
        if self.cols != other.cols {
            return Err(Error::DimensionMismatch {
                context: "mul_transpose",
                expected: self.cols,
                got: other.cols,
            });
        }
        let mut out = Self::zeros(self.rows, other.rows);
        for i in 0..self.rows {
            let a = self.row(i);
            for k in 0..other.rows {
                let b = other.row(k);
                let mut acc = T::zero();
                for l in 0..self.cols {
                    acc = acc + a[l] * b[l];
                }
                out.set(i, k, acc);
            }
        }
        Ok(out)
    }

    /// `self * selfᵀ`, exactly symmetric: the upper triangle is computed
    /// once and mirrored.
    pub fn gram(&self) -> Self {
        let n = self.rows;
        let mut out = Self::zeros(n, n);
        for i in 0..n {
            let a = self.row(i);
            for k in i..n {
                let b = self.row(k);
                let mut acc = T::zero();
                for l in 0..self.cols {
                    acc = acc + a[l] * b[l];
                }
                out.set(i, k, acc);
                out.set(k, i, acc);
            }
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch {
                context: "mul",
                expected: self.cols,
                got: other.rows,
            });
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for l in 0..self.cols {
                let a = self.get(i, l);
                if a == T::zero() {
                    continue;
                }
                let brow = other.row(l);
                let orow = &mut out.data[i * other.cols..(i + 1) * other.cols];
                for j in 0..other.cols {
                    orow[j] = orow[j] + a * brow[j];
                }
            }
        }
        Ok(out)
    }

    /// Subtracts the outer product `v vᵀ` in place.
    pub fn sub_outer(&mut self, v: &[T]) {
        debug_assert_eq!(v.len(), self.rows);
        debug_assert_eq!(self.rows, self.cols);
        for i in 0..self.rows {
            let vi = v[i];
            if vi == T::zero() {
                continue;
            }
            let row = &mut self.data[i * self.cols..(i + 1) * self.cols];
            for (j, rv) in row.iter_mut().enumerate() {
                *rv = *rv - vi * v[j];
            }
        }
    }

    /// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations.
    /// Unsorted; accurate to ~1e-12 relative for the sizes used here.
    pub fn symmetric_eigenvalues(&self) -> Vec<T> {
        assert_eq!(self.rows, self.cols, "symmetric_eigenvalues needs square");
        let n = self.rows;
        let mut a = self.clone();
        let scale = a.max_abs();
        if scale == T::zero() || n < 2 {
            return (0..n).map(|i| a.get(i, i)).collect();
        }
        let tol = real::<T>(1e-14) * scale;
        for _sweep in 0..50 {
            let mut off = T::zero();
            for i in 0..n {
                for j in (i + 1)..n {
                    off = off.max(a.get(i, j).abs());
                }
            }
            if off <= tol {
                break;
            }
            for p in 0..n {
                for q in (p + 1)..n {
                    let apq = a.get(p, q);
                    if apq.abs() <= tol {
                        continue;
                    }
                    let app = a.get(p, p);
                    let aqq = a.get(q, q);
                    let theta = (aqq - app) / (real::<T>(2.0) * apq);
                    let t = {
                        let s = if theta >= T::zero() { T::one() } else { -T::one() };
                        s / (theta.abs() + (theta * theta + T::one()).sqrt())
                    };
                    let c = T::one() / (t * t + T::one()).sqrt();
                    let s = t * c;
                    for k in 0..n {
                        let akp = a.get(k, p);
                        let akq = a.get(k, q);
                        a.set(k, p, c * akp - s * akq);
                        a.set(k, q, s * akp + c * akq);
                    }
                    for k in 0..n {
                        let apk = a.get(p, k);
                        let aqk = a.get(q, k);
                        a.set(p, k, c * apk - s * aqk);
                        a.set(q, k, s * apk + c * aqk);
                    }
                }
            }
        }
        (0..n).map(|i| a.get(i, i)).collect()
    }
}

/// Formats one entry with round-trip precision (17 significant digits).
/// Exact zeros serialize as `0`.
pub fn format_entry<T: Real>(v: T) -> String {
    if v == T::zero() {
        "0".to_string()
    } else {
        format!("{:.16e}", v)
    }
}

impl<T: Real> Matrix<T> {
    /// Writes the shared text format: first line `rows cols`, then one line
    /// per row of whitespace-separated entries.
    pub fn write_text<W: Write>(&self, w: &mut W) -> Result<()> {
        writeln!(w, "{} {}", self.rows, self.cols)?;
        let mut line = String::new();
        for i in 0..self.rows {
            line.clear();
            for (j, v) in self.row(i).iter().enumerate() {
                if j > 0 {
                    line.push(' ');
                }
                line.push_str(&format_entry(*v));
            }
            writeln!(w, "{line}")?;
        }
        Ok(())
    }

    pub fn write_text_file<P: AsRef<Path>>(&self, path: P) -> Result<()> {
        let mut w = BufWriter::new(std::fs::File::create(path)?);
        self.write_text(&mut w)?;
        w.flush()?;
        Ok(())
    }

    pub fn read_text<R: BufRead>(r: &mut R) -> Result<Self> {
        let mut header = String::new();
        r.read_line(&mut header)?;
        let mut it = header.split_whitespace();
        let rows: usize = it
            .next()
            .ok_or_else(|| Error::Format("missing row count".into()))?
            .parse()
            .map_err(|_| Error::Format("bad row count".into()))?;
        let cols: usize = it
            .next()
            .ok_or_else(|| Error::Format("missing column count".into()))?
            .parse()
            .map_err(|_| Error::Format("bad column count".into()))?;
        let mut data = Vec::with_capacity(rows * cols);
        let mut line = String::new();
        for i in 0..rows {
            line.clear();
            if r.read_line(&mut line)? == 0 {
                return Err(Error::Format(format!("unexpected end of file at row {i}")));
            }
            let mut count = 0;
            for tok in line.split_whitespace() {
                let v: T = tok
                    .parse()
                    .map_err(|_| Error::Format(format!("bad number {tok:?} in row {i}")))?;
                data.push(v);
                count += 1;
            }
            if count != cols {
                return Err(Error::Format(format!(
                    "row {i} has {count} entries, expected {cols}"
                )));
            }
        }
        Self::from_vec(rows, cols, data)
    }

    pub fn read_text_file<P: AsRef<Path>>(path: P) -> Result<Self> {
        let mut r = std::io::BufReader::new(std::fs::File::open(path)?);
        Self::read_text(&mut r)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gram_is_exactly_symmetric() {
        let a = Matrix::from_rows(&[vec![1.0, 2.0, 0.0], vec![0.5, -1.0, 3.0]]).unwrap();
        let g = a.gram();
        for i in 0..2 {
            for j in 0..2 {
                assert_eq!(g.get(i, j), g.get(j, i));
            }
        }
        assert_eq!(g.get(0, 0), 5.0);
        assert_eq!(g.get(0, 1), 0.5 * 1.0 + 2.0 * -1.0);
    }

    #[test]
    fn text_roundtrip_preserves_values_and_zeros() {
        let a = Matrix::from_rows(&[
            vec![1.0 / 3.0, 0.0, -2.5e-300],
            vec![std::f64::consts::PI, 1e17, -0.0],
        ])
        .unwrap();
        let mut buf = Vec::new();
        a.write_text(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert_eq!(text.lines().nth(1).unwrap().split(' ').nth(1).unwrap(), "0");
        let b = Matrix::<f64>::read_text(&mut &buf[..]).unwrap();
        for (x, y) in a.data().iter().zip(b.data()) {
            assert_eq!(*x, *y);
        }
    }

    #[test]
    fn read_rejects_ragged_rows() {
        let text = b"2 3\n1 2 3\n4 5\n";
        let err = Matrix::<f64>::read_text(&mut &text[..]);
        assert!(matches!(err, Err(Error::Format(_))));
    }

    #[test]
    fn jacobi_matches_known_eigenvalues() {
        // [[2,1],[1,2]] has eigenvalues 1 and 3
        let m = Matrix::from_rows(&[vec![2.0, 1.0], vec![1.0, 2.0]]).unwrap();
        let mut ev = m.symmetric_eigenvalues();
        ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert!((ev[0] - 1.0).abs() < 1e-12);
        assert!((ev[1] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn sub_outer_cancels_rank_one() {
        let v = vec![1.0, -2.0, 0.0, 3.0];
        let mut m = Matrix::zeros(4, 4);
        for i in 0..4 {
            for j in 0..4 {
                m.set(i, j, v[i] * v[j]);
            }
        }
        m.sub_outer(&v);
        assert_eq!(m.max_abs(), 0.0);
    }
}
