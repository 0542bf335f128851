use super::matrix::RealMatrix;
use crate::error::{Error, Result};

/// Solves `L y = b` for lower triangular `L`; `unit` skips the diagonal.
pub fn forward_substitution(l: &RealMatrix, b: &[f64], unit: bool) -> Result<Vec<f64>> {
    let n = l.rows();
    if !l.is_square() || b.len() != n {
        return Err(Error::Shape(format!("forward substitution with {:?} and rhs {}", l.shape(), b.len())));
    }
    let mut y = b.to_vec();
    for i in 0..n {
        let row = l.row(i);
        let s: f64 = row[..i].iter().zip(&y[..i]).map(|(a, x)| a * x).sum();
        y[i] -= s;
        if !unit {
            let d = row[i];
            if d == 0.0 {
                return Err(Error::Singular { sigma_min: 0.0 });
            }
            y[i] /= d;
        }
    }
    Ok(y)
}

/// Solves `U x = y` for upper triangular `U`.
pub fn back_substitution(u: &RealMatrix, y: &[f64]) -> Result<Vec<f64>> {
    let n = u.rows();
    if !u.is_square() || y.len() != n {
        return Err(Error::Shape(format!("back substitution with {:?} and rhs {}", u.shape(), y.len())));
    }
    let mut x = y.to_vec();
    for i in (0..n).rev() {
        let row = u.row(i);
        let s: f64 = row[i + 1..].iter().zip(&x[i + 1..]).map(|(a, v)| a * v).sum();
        let d = row[i];
        if d == 0.0 {
            return Err(Error::Singular { sigma_min: 0.0 });
        }
        x[i] = (x[i] - s) / d;
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_small_systems() {
        let l = RealMatrix::from_rows(&[[1.0, 0.0], [0.5, 1.0]]);
        assert_eq!(forward_substitution(&l, &[3.0, 2.0], true).unwrap(), vec![3.0, 0.5]);
        let u = RealMatrix::from_rows(&[[2.0, 1.0], [0.0, 0.5]]);
        assert_eq!(back_substitution(&u, &[3.0, 0.5]).unwrap(), vec![1.0, 1.0]);
    }

    #[test]
    fn zero_diagonal_is_singular() {
        let u = RealMatrix::from_rows(&[[1.0, 1.0], [0.0, 0.0]]);
        assert!(matches!(back_substitution(&u, &[1.0, 1.0]), Err(Error::Singular { .. })));
    }
}
