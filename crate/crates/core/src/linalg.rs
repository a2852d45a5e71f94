//! Exact linear algebra over ℚ(i) on dense row-major matrices.

use crate::gaussian::Gq;

pub type Vector = Vec<Gq>;
pub type Matrix = Vec<Vector>;

pub fn zeros(n: usize) -> Vector {
    vec![Gq::zero(); n]
}

pub fn unit(n: usize, k: usize) -> Vector {
    let mut v = zeros(n);
    v[k] = Gq::one();
    v
}

pub fn dot(a: &[Gq], b: &[Gq]) -> Gq {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn is_zero(v: &[Gq]) -> bool {
    v.iter().all(Gq::is_zero)
}

pub fn add_scaled(acc: &mut [Gq], c: &Gq, v: &[Gq]) {
    if c.is_zero() {
        return;
    }
    for (a, x) in acc.iter_mut().zip(v) {
        if !x.is_zero() {
            *a += &(c * x);
        }
    }
}

pub fn scaled(c: &Gq, v: &[Gq]) -> Vector {
    v.iter().map(|x| c * x).collect()
}

/// Linear combination `Σ x_j rows_j`.
pub fn combine(x: &[Gq], rows: &[Vector], ncols: usize) -> Vector {
    let mut out = zeros(ncols);
    for (c, r) in x.iter().zip(rows) {
        add_scaled(&mut out, c, r);
    }
    out
}

pub fn transpose(m: &[Vector], ncols: usize) -> Matrix {
    (0..ncols).map(|j| m.iter().map(|r| r[j].clone()).collect()).collect()
}

/// Reduced row echelon form. Zero rows are dropped; returns pivot columns.
pub fn rref(m: &mut Matrix) -> Vec<usize> {
    let ncols = m.first().map_or(0, Vec::len);
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..ncols {
        if r == m.len() {
            break;
        }
        let Some(p) = (r..m.len()).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        let inv = m[r][c].inv();
        let pivot_row: Vector = m[r].iter().map(|x| x * &inv).collect();
        for (i, row) in m.iter_mut().enumerate() {
            if i != r && !row[c].is_zero() {
                let f = -row[c].clone();
                add_scaled(row, &f, &pivot_row);
            }
        }
        m[r] = pivot_row;
        pivots.push(c);
        r += 1;
    }
    m.truncate(r);
    pivots
}

pub fn rank(m: &[Vector]) -> usize {
    let mut m = m.to_vec();
    rref(&mut m).len()
}

/// Basis of `{x : m x = 0}` for an `_ × ncols` matrix.
pub fn nullspace(m: &[Vector], ncols: usize) -> Matrix {
    let mut r = m.to_vec();
    let pivots = rref(&mut r);
    let free: Vec<usize> = (0..ncols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = zeros(ncols);
            v[f] = Gq::one();
            for (row, &p) in r.iter().zip(&pivots) {
                v[p] = -row[f].clone();
            }
            v
        })
        .collect()
}

/// Basis of `{y : y m = 0}`, i.e. relations among the rows of `m`.
pub fn left_kernel(m: &[Vector], ncols: usize) -> Matrix {
    nullspace(&transpose(m, ncols), m.len())
}

/// Coefficients `x` with `Σ x_j rows_j = target`, if any.
pub fn solve_combination(rows: &[Vector], target: &[Gq]) -> Option<Vector> {
    let n = target.len();
    let k = rows.len();
    // Augmented system: columns are the rows, right-hand side the target.
    let mut aug: Matrix = (0..n)
        .map(|j| {
            let mut line: Vector = rows.iter().map(|r| r[j].clone()).collect();
            line.push(target[j].clone());
            line
        })
        .collect();
    let pivots = rref(&mut aug);
    if pivots.contains(&k) {
        return None;
    }
    let mut x = zeros(k);
    for (row, &p) in aug.iter().zip(&pivots) {
        x[p] = row[k].clone();
    }
    Some(x)
}

pub fn in_span(rows: &[Vector], v: &[Gq]) -> bool {
    if is_zero(v) {
        return true;
    }
    solve_combination(rows, v).is_some()
}

/// Basis of the row space (reduced).
pub fn row_basis(m: &[Vector]) -> Matrix {
    let mut r = m.to_vec();
    rref(&mut r);
    r
}

/// Basis of the intersection of two row spaces in the same ambient space.
pub fn intersect(a: &[Vector], b: &[Vector], ncols: usize) -> Matrix {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    // Solve x A = y B; the intersection is spanned by x A.
    let mut stacked: Matrix = a.to_vec();
    stacked.extend(b.iter().map(|r| r.iter().map(|x| -x.clone()).collect()));
    let rel = left_kernel(&stacked, ncols);
    let vecs: Matrix = rel.iter().map(|r| combine(&r[..a.len()], a, ncols)).collect();
    row_basis(&vecs)
}

pub fn mat_vec(m: &[Vector], v: &[Gq]) -> Vector {
    m.iter().map(|r| dot(r, v)).collect()
}

pub fn from_ints(m: &[Vec<i64>]) -> Matrix {
    m.iter().map(|r| r.iter().map(|&x| Gq::int(x)).collect()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: &[&[i64]]) -> Matrix {
        rows.iter().map(|r| r.iter().map(|&x| Gq::int(x)).collect()).collect()
    }

    #[test]
    fn rref_and_rank() {
        let mut a = m(&[&[1, 2, 3], &[2, 4, 6], &[0, 1, 1]]);
        let piv = rref(&mut a);
        assert_eq!(piv, vec![0, 1]);
        assert_eq!(a, m(&[&[1, 0, 1], &[0, 1, 1]]));
    }

    #[test]
    fn nullspace_is_annihilated() {
        let a = m(&[&[1, 2, 3, 4], &[0, 1, -1, 2]]);
        let ns = nullspace(&a, 4);
        assert_eq!(ns.len(), 2);
        for v in &ns {
            assert!(is_zero(&mat_vec(&a, v)));
        }
    }

    #[test]
    fn solve_and_intersect() {
        let rows = m(&[&[1, 0, 1], &[0, 1, 1]]);
        let x = solve_combination(&rows, &[Gq::int(2), Gq::int(3), Gq::int(5)]).unwrap();
        assert_eq!(x, vec![Gq::int(2), Gq::int(3)]);
        assert!(solve_combination(&rows, &[Gq::int(1), Gq::int(0), Gq::int(0)]).is_none());
        let b = m(&[&[1, 1, 2], &[1, 0, 0]]);
        let i = intersect(&rows, &b, 3);
        assert_eq!(i, m(&[&[1, 1, 2]]));
    }
}
