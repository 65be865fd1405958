//! Small exact linear algebra over the rationals.

use num_traits::{One, Zero};

use crate::kinematics::Rational;

/// Determinant by fraction-exact Gaussian elimination.
pub fn det(mut a: Vec<Vec<Rational>>) -> Rational {
    let n = a.len();
    let mut sign = Rational::one();
    for col in 0..n {
        let Some(p) = (col..n).find(|&r| !a[r][col].is_zero()) else {
            return Rational::zero();
        };
        if p != col {
            a.swap(p, col);
            sign = -sign;
        }
        for r in col + 1..n {
            if a[r][col].is_zero() {
                continue;
            }
            let f = &a[r][col] / &a[col][col];
            for c in col..n {
                let v = &f * &a[col][c];
                a[r][c] -= v;
            }
        }
    }
    (0..n).fold(sign, |acc, k| acc * &a[k][k])
}

/// Solves `a x = b` for square nonsingular `a`.
pub fn solve(mut a: Vec<Vec<Rational>>, mut b: Vec<Rational>) -> Option<Vec<Rational>> {
    let n = a.len();
    for col in 0..n {
        let p = (col..n).find(|&r| !a[r][col].is_zero())?;
        a.swap(p, col);
        b.swap(p, col);
        for r in 0..n {
            if r == col || a[r][col].is_zero() {
                continue;
            }
            let f = &a[r][col] / &a[col][col];
            for c in col..n {
                let v = &f * &a[col][c];
                a[r][c] -= v;
            }
            let v = &f * &b[col];
            b[r] -= v;
        }
    }
    Some((0..n).map(|k| &b[k] / &a[k][k]).collect())
}

pub fn from_i64(a: &[Vec<i64>]) -> Vec<Vec<Rational>> {
    a.iter().map(|r| r.iter().map(|&v| crate::kinematics::rat(v)).collect()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kinematics::{rat, ratio};

    #[test]
    fn determinants() {
        assert_eq!(det(from_i64(&[vec![2, 1], vec![1, 3]])), rat(5));
        assert_eq!(det(from_i64(&[vec![0, 1], vec![1, 0]])), rat(-1));
        assert_eq!(det(from_i64(&[vec![1, 2], vec![2, 4]])), rat(0));
        assert_eq!(det(Vec::new()), rat(1));
    }

    #[test]
    fn solving() {
        let x = solve(from_i64(&[vec![0, 2], vec![3, 1]]), vec![rat(4), rat(5)]).unwrap();
        assert_eq!(x, vec![ratio(1, 1), rat(2)]);
        assert!(solve(from_i64(&[vec![1, 1], vec![1, 1]]), vec![rat(1), rat(2)]).is_none());
    }
}
