use std::io::Write;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex;

use crate::scalar::{to_f64, Real};

/// Writes `row,col,re,im` lines (with header) for every entry.
pub fn write_matrix_csv<T: Real, W: Write>(out: &mut W, m: &DMatrix<Complex<T>>) -> std::io::Result<()> {
    writeln!(out, "row,col,re,im")?;
    for r in 0..m.nrows() {
        for c in 0..m.ncols() {
            let z = m[(r, c)];
            writeln!(out, "{r},{c},{:.17e},{:.17e}", to_f64(z.re), to_f64(z.im))?;
        }
    }
    Ok(())
}

/// Column vector in the same layout (`col` is always 0).
pub fn write_vector_csv<T: Real, W: Write>(out: &mut W, v: &DVector<Complex<T>>) -> std::io::Result<()> {
    writeln!(out, "row,col,re,im")?;
    for (r, z) in v.iter().enumerate() {
        writeln!(out, "{r},0,{:.17e},{:.17e}", to_f64(z.re), to_f64(z.im))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn layout() {
        let m = DMatrix::from_row_slice(1, 2, &[Complex::new(1.0, -2.0), Complex::new(0.5, 0.0)]);
        let mut buf = Vec::new();
        write_matrix_csv(&mut buf, &m).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "row,col,re,im");
        assert_eq!(lines.len(), 3);
        let f: Vec<f64> = lines[1].split(',').skip(2).map(|s| s.parse().unwrap()).collect();
        assert_eq!(f, vec![1.0, -2.0]);
    }
}
