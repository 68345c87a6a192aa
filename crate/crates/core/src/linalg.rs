//! Exact Gaussian elimination over the rationals.

use num_traits::{One, Signed, Zero};

use crate::numbers::Rational;

pub type Vector = Vec<Rational>;

/// Reduced row echelon form. Returns the nonzero rows and their pivot columns.
pub fn rref(rows: &[Vector], ncols: usize) -> (Vec<Vector>, Vec<usize>) {
    let mut m: Vec<Vector> = rows.iter().map(|r| {
        assert_eq!(r.len(), ncols, "row length mismatch");
        r.clone()
    }).collect();
    let mut pivots = Vec::new();
    let mut row = 0;
    for col in 0..ncols {
        let Some(p) = (row..m.len()).find(|&i| !m[i][col].is_zero()) else {
            continue;
        };
        m.swap(row, p);
        let inv = m[row][col].recip();
        for v in m[row].iter_mut() {
            *v *= &inv;
        }
        for i in 0..m.len() {
            if i != row && !m[i][col].is_zero() {
                let factor = m[i][col].clone();
                for j in col..ncols {
                    let delta = &factor * &m[row][j];
                    m[i][j] -= delta;
                }
            }
        }
        pivots.push(col);
        row += 1;
        if row == m.len() {
            break;
        }
    }
    m.truncate(row);
    (m, pivots)
}

pub fn rank(rows: &[Vector], ncols: usize) -> usize {
    rref(rows, ncols).1.len()
}

/// Scales so the first nonzero entry is positive.
pub fn normalize_sign(mut v: Vector) -> Vector {
    if v.iter().find(|x| !x.is_zero()).is_some_and(|x| x.is_negative()) {
        for x in v.iter_mut() {
            *x = -x.clone();
        }
    }
    v
}

/// Basis of `{x : rows * x = 0}`, one vector per free column.
pub fn nullspace(rows: &[Vector], ncols: usize) -> Vec<Vector> {
    let (r, pivots) = rref(rows, ncols);
    let free: Vec<usize> = (0..ncols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![Rational::zero(); ncols];
            v[f] = Rational::one();
            for (row, &p) in r.iter().zip(&pivots) {
                v[p] = -row[f].clone();
            }
            normalize_sign(v)
        })
        .collect()
}

pub fn dot(a: &[Rational], b: &[Rational]) -> Rational {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn is_zero_vector(v: &[Rational]) -> bool {
    v.iter().all(Zero::is_zero)
}

/// Whether `v` lies in the row span of `rows`.
pub fn in_span(rows: &[Vector], v: &[Rational], ncols: usize) -> bool {
    let mut all = rows.to_vec();
    all.push(v.to_vec());
    rank(&all, ncols) == rank(rows, ncols)
}

/// Solves `sum_i c_i rows[i] = target`, returning one solution if it exists.
pub fn solve_combination(rows: &[Vector], target: &[Rational], ncols: usize) -> Option<Vector> {
    // transpose: unknowns c_i, equations per column
    let k = rows.len();
    let aug: Vec<Vector> = (0..ncols)
        .map(|j| {
            let mut r: Vector = rows.iter().map(|row| row[j].clone()).collect();
            r.push(target[j].clone());
            r
        })
        .collect();
    let (red, pivots) = rref(&aug, k + 1);
    if pivots.contains(&k) {
        return None;
    }
    let mut c = vec![Rational::zero(); k];
    for (row, &p) in red.iter().zip(&pivots) {
        c[p] = row[k].clone();
    }
    Some(c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numbers::{int, rat};

    fn v(xs: &[i64]) -> Vector {
        xs.iter().map(|&x| int(x)).collect()
    }

    #[test]
    fn nullspace_of_single_equation() {
        let ns = nullspace(&[v(&[0, 1, 1])], 3);
        assert_eq!(ns, vec![v(&[1, 0, 0]), v(&[0, 1, -1])]);
        for n in &ns {
            assert!(dot(n, &v(&[0, 1, 1])).is_zero());
        }
    }

    #[test]
    fn rank_and_span() {
        let rows = vec![v(&[1, 2, 3]), v(&[2, 4, 6]), v(&[0, 1, 1])];
        assert_eq!(rank(&rows, 3), 2);
        assert!(in_span(&rows, &v(&[1, 3, 4]), 3));
        assert!(!in_span(&rows, &v(&[0, 0, 1]), 3));
        let c = solve_combination(&rows, &v(&[1, 3, 4]), 3).unwrap();
        let back: Vector = (0..3).map(|j| rows.iter().zip(&c).map(|(r, ci)| &r[j] * ci).sum()).collect();
        assert_eq!(back, v(&[1, 3, 4]));
        assert_eq!(solve_combination(&rows, &v(&[0, 0, 1]), 3), None);
    }

    #[test]
    fn rref_fractions() {
        let (r, p) = rref(&[vec![int(2), rat(1, 2)], vec![int(4), int(3)]], 2);
        assert_eq!(p, vec![0, 1]);
        assert_eq!(r, vec![v(&[1, 0]), v(&[0, 1])]);
    }
}
