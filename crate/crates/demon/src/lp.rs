//! Exact rational linear programming support.
//!
//! Everything here works over systems in standard form `{ x >= 0, A x = b }`.
//! [`feasible`] decides nonemptiness with a phase-1 simplex under Bland's
//! rule (no objective is ever needed elsewhere in the crate).
//! [`vertices`] enumerates the extreme points of a bounded solution set by
//! the double description method on the homogenized cone.

use num_traits::{One, Signed, Zero};

use crate::value::Rat;

/// A sparse row `sum coeff_i * x_i = rhs`.
pub type Row = (Vec<(usize, Rat)>, Rat);

fn densify(num_vars: usize, rows: &[Row]) -> Vec<(Vec<Rat>, Rat)> {
    rows.iter()
        .map(|(terms, rhs)| {
            let mut a = vec![Rat::zero(); num_vars];
            for (idx, c) in terms {
                a[*idx] += c.clone();
            }
            (a, rhs.clone())
        })
        .collect()
}

/// Decide feasibility of `{ x >= 0, A x = b }`; returns a witness point.
///
/// Phase-1 simplex under Bland's rule, run fraction-free: rows are scaled
/// to integers up front and pivots use the two-term Bareiss update
/// `(t[i][j]*t[r][c] - t[i][c]*t[r][j]) / d` with exact division by the
/// previous pivot, so no gcd normalization happens in the hot loop.
/// Entries stay subdeterminant-sized. Signs (and hence Bland's rule and
/// the zero test on the objective) are unaffected because every pivot
/// element and every divisor is positive.
pub fn feasible(num_vars: usize, rows: &[Row]) -> Option<Vec<Rat>> {
    use num_bigint::BigInt;
    let dense = densify(num_vars, rows);
    let m = dense.len();
    if m == 0 {
        return Some(vec![Rat::zero(); num_vars]);
    }
    let zero = BigInt::from(0);
    let one = BigInt::from(1);
    // Integer rows: scale by the lcm of denominators; flip signs to make
    // the right-hand sides nonnegative so artificials start feasible.
    let width = num_vars + m + 1;
    let mut tab: Vec<Vec<BigInt>> = Vec::with_capacity(m);
    for (i, (a, b)) in dense.iter().enumerate() {
        let mut lcm = b.denom().clone();
        for c in a {
            lcm = num_integer::lcm(lcm, c.denom().clone());
        }
        let scale = |r: &Rat| -> BigInt { r.numer() * (&lcm / r.denom()) };
        let mut row: Vec<BigInt> = Vec::with_capacity(width);
        for c in a {
            row.push(scale(c));
        }
        row.extend(std::iter::repeat_n(zero.clone(), m));
        row.push(scale(b));
        if row[width - 1] < zero {
            for c in row.iter_mut() {
                *c = -std::mem::replace(c, zero.clone());
            }
        }
        row[num_vars + i] = one.clone();
        tab.push(row);
    }
    let mut basis: Vec<usize> = (num_vars..num_vars + m).collect();
    // Phase-1 objective (to be minimized): sum of artificials, in reduced
    // form; positive entries mean the objective can still decrease.
    let mut obj = vec![zero.clone(); width];
    for row in &tab {
        for (j, c) in row.iter().enumerate() {
            if j < num_vars || j == width - 1 {
                obj[j] += c;
            }
        }
    }
    let mut divisor = one.clone();

    loop {
        let Some(enter) = (0..num_vars + m).find(|&j| obj[j] > zero) else {
            break;
        };
        // Ratio test by cross-multiplication; Bland tie-break on the
        // smallest basis variable.
        let mut leave: Option<usize> = None;
        for (i, row) in tab.iter().enumerate() {
            if row[enter] <= zero {
                continue;
            }
            let better = match leave {
                None => true,
                Some(l) => {
                    let lhs = &row[width - 1] * &tab[l][enter];
                    let rhs = &tab[l][width - 1] * &row[enter];
                    lhs < rhs || (lhs == rhs && basis[i] < basis[l])
                }
            };
            if better {
                leave = Some(i);
            }
        }
        let Some(leave) = leave else {
            // Phase 1 is bounded below by 0, so this cannot happen;
            // treat defensively as infeasible.
            return None;
        };
        let pivot_val = tab[leave][enter].clone();
        let pivot_row = tab[leave].clone();
        for (i, row) in tab.iter_mut().enumerate() {
            if i == leave {
                continue;
            }
            bareiss_row(row, &pivot_row, enter, &pivot_val, &divisor, width);
        }
        bareiss_row(&mut obj, &pivot_row, enter, &pivot_val, &divisor, width);
        divisor = pivot_val;
        basis[leave] = enter;
    }

    if obj[width - 1] != zero {
        return None;
    }
    let mut x = vec![Rat::zero(); num_vars];
    for (i, &bv) in basis.iter().enumerate() {
        if bv < num_vars {
            x[bv] = Rat::new(tab[i][width - 1].clone(), tab[i][bv].clone());
        }
    }
    Some(x)
}

/// `row = (row * pivot_val - row[enter] * pivot_row) / divisor`, the
/// fraction-free two-term update; the division is exact.
fn bareiss_row(
    row: &mut [num_bigint::BigInt],
    pivot_row: &[num_bigint::BigInt],
    enter: usize,
    pivot_val: &num_bigint::BigInt,
    divisor: &num_bigint::BigInt,
    width: usize,
) {
    use num_bigint::BigInt;
    let zero = BigInt::from(0);
    let factor = std::mem::replace(&mut row[enter], zero.clone());
    if factor == zero {
        if pivot_val == divisor {
            row[enter] = factor;
            return;
        }
        for (j, cell) in row.iter_mut().enumerate().take(width) {
            if j != enter && *cell != zero {
                *cell = &(&*cell * pivot_val) / divisor;
            }
        }
        return;
    }
    for j in 0..width {
        if j == enter {
            continue;
        }
        let t = &row[j] * pivot_val - &factor * &pivot_row[j];
        row[j] = t / divisor;
    }
}

/// Solve `A x = b` exactly: returns a particular solution and a basis of
/// the null space, or `None` when inconsistent.
fn solve_affine(num_vars: usize, rows: &[Row]) -> Option<(Vec<Rat>, Vec<Vec<Rat>>)> {
    let mut dense = densify(num_vars, rows);
    let m = dense.len();
    let mut pivot_col_of_row = Vec::new();
    let mut r = 0;
    for col in 0..num_vars {
        let Some(pr) = (r..m).find(|&i| !dense[i].0[col].is_zero()) else {
            continue;
        };
        dense.swap(r, pr);
        let p = dense[r].0[col].clone();
        for c in dense[r].0.iter_mut() {
            *c = &*c / &p;
        }
        dense[r].1 = &dense[r].1 / &p;
        for i in 0..m {
            if i != r && !dense[i].0[col].is_zero() {
                let f = dense[i].0[col].clone();
                for j in 0..num_vars {
                    let delta = &f * &dense[r].0[j];
                    dense[i].0[j] -= delta;
                }
                let delta = &f * &dense[r].1;
                dense[i].1 -= delta;
            }
        }
        pivot_col_of_row.push(col);
        r += 1;
        if r == m {
            break;
        }
    }
    // Inconsistent if a zero row has nonzero rhs.
    for (a, b) in dense.iter().skip(r) {
        if a.iter().all(Rat::is_zero) && !b.is_zero() {
            return None;
        }
    }
    let mut particular = vec![Rat::zero(); num_vars];
    for (row, &col) in pivot_col_of_row.iter().enumerate() {
        particular[col] = dense[row].1.clone();
    }
    let pivot_cols: std::collections::HashSet<usize> = pivot_col_of_row.iter().copied().collect();
    let mut nullspace = Vec::new();
    for free in 0..num_vars {
        if pivot_cols.contains(&free) {
            continue;
        }
        let mut v = vec![Rat::zero(); num_vars];
        v[free] = Rat::one();
        for (row, &col) in pivot_col_of_row.iter().enumerate() {
            v[col] = -dense[row].0[free].clone();
        }
        nullspace.push(v);
    }
    Some((particular, nullspace))
}

/// Scale a rational vector to a canonical small integer representative
/// (positive scaling only, so ray directions are preserved).
fn normalize_ray(v: &mut [Rat]) {
    use num_bigint::BigInt;
    use num_traits::Signed as _;
    let mut lcm = BigInt::one();
    for c in v.iter() {
        lcm = num_integer::lcm(lcm, c.denom().clone());
    }
    let mut gcd = BigInt::zero();
    for c in v.iter_mut() {
        *c = &*c * Rat::from(lcm.clone());
        gcd = num_integer::gcd(gcd, c.numer().abs());
    }
    if !gcd.is_zero() && !gcd.is_one() {
        let g = Rat::from(gcd);
        for c in v.iter_mut() {
            *c = &*c / &g;
        }
    }
}

fn dot(a: &[Rat], b: &[Rat]) -> Rat {
    let mut acc = Rat::zero();
    for (x, y) in a.iter().zip(b) {
        if !x.is_zero() && !y.is_zero() {
            acc += x * y;
        }
    }
    acc
}

/// Invert a square rational matrix; `None` if singular.
fn invert(mat: &[Vec<Rat>]) -> Option<Vec<Vec<Rat>>> {
    let n = mat.len();
    let mut a: Vec<Vec<Rat>> = mat.to_vec();
    let mut inv: Vec<Vec<Rat>> = (0..n)
        .map(|i| {
            let mut row = vec![Rat::zero(); n];
            row[i] = Rat::one();
            row
        })
        .collect();
    for col in 0..n {
        let pr = (col..n).find(|&i| !a[i][col].is_zero())?;
        a.swap(col, pr);
        inv.swap(col, pr);
        let p = a[col][col].clone();
        for j in 0..n {
            a[col][j] = &a[col][j] / &p;
            inv[col][j] = &inv[col][j] / &p;
        }
        for i in 0..n {
            if i != col && !a[i][col].is_zero() {
                let f = a[i][col].clone();
                for j in 0..n {
                    let d = &f * &a[col][j];
                    a[i][j] -= d;
                    let d = &f * &inv[col][j];
                    inv[i][j] -= d;
                }
            }
        }
    }
    Some(inv)
}

/// Enumerate the vertices of the bounded polytope `{ x >= 0, A x = b }`.
///
/// Double description on the homogenized cone in parameter space: the
/// equalities are eliminated exactly first, the remaining inequality cone
/// is pointed because the null-space basis has full column rank, and rays
/// are accumulated constraint by constraint with the combinatorial
/// adjacency test. Unbounded directions are discarded (callers only pass
/// mass polytopes, which are bounded).
pub fn vertices(num_vars: usize, rows: &[Row]) -> Vec<Vec<Rat>> {
    let Some((x0, nullspace)) = solve_affine(num_vars, rows) else {
        return Vec::new();
    };
    let d = nullspace.len();
    // Constraints in homogenized parameter space (t, s): for each original
    // variable i, sum_k N[k][i] t_k + x0[i] s >= 0; plus s >= 0.
    let mut constraints: Vec<Vec<Rat>> = Vec::with_capacity(num_vars + 1);
    for i in 0..num_vars {
        let mut c = Vec::with_capacity(d + 1);
        for null_vec in &nullspace {
            c.push(null_vec[i].clone());
        }
        c.push(x0[i].clone());
        constraints.push(c);
    }
    let mut s_row = vec![Rat::zero(); d + 1];
    s_row[d] = Rat::one();
    constraints.push(s_row);

    let dim = d + 1;
    // Initial cone: pick `dim` linearly independent constraints; its rays
    // are the columns of the inverse, which satisfy H r_j = e_j >= 0.
    let mut chosen: Vec<usize> = Vec::new();
    {
        let mut work: Vec<Vec<Rat>> = Vec::new();
        for (idx, c) in constraints.iter().enumerate() {
            let mut cand = work.clone();
            cand.push(c.clone());
            if rank(&cand) > work.len() {
                work = cand;
                chosen.push(idx);
                if work.len() == dim {
                    break;
                }
            }
        }
        if chosen.len() < dim {
            // The cone has a lineality direction, which contradicts the
            // boundedness contract; nothing sensible to enumerate.
            return Vec::new();
        }
    }
    let h0: Vec<Vec<Rat>> = chosen.iter().map(|&i| constraints[i].clone()).collect();
    let h0_inv = invert(&h0).expect("chosen constraints are independent");
    let mut rays: Vec<Vec<Rat>> = (0..dim)
        .map(|j| {
            let mut r: Vec<Rat> = (0..dim).map(|i| h0_inv[i][j].clone()).collect();
            normalize_ray(&mut r);
            r
        })
        .collect();

    let mut inserted: Vec<usize> = chosen.clone();
    for (idx, c) in constraints.iter().enumerate() {
        if inserted.contains(&idx) {
            continue;
        }
        inserted.push(idx);
        let vals: Vec<Rat> = rays.iter().map(|r| dot(c, r)).collect();
        if vals.iter().all(|v| !v.is_negative()) {
            continue;
        }
        let mut next: Vec<Vec<Rat>> = Vec::new();
        for (r, v) in rays.iter().zip(&vals) {
            if !v.is_negative() {
                next.push(r.clone());
            }
        }
        // Tight sets against every constraint seen so far.
        let tight = |r: &[Rat]| -> Vec<bool> {
            inserted
                .iter()
                .map(|&i| dot(&constraints[i], r).is_zero())
                .collect()
        };
        let tight_sets: Vec<Vec<bool>> = rays.iter().map(|r| tight(r)).collect();
        for (i, (ri, vi)) in rays.iter().zip(&vals).enumerate() {
            if !vi.is_positive() {
                continue;
            }
            for (j, (rj, vj)) in rays.iter().zip(&vals).enumerate() {
                if !vj.is_negative() {
                    continue;
                }
                if !adjacent(&tight_sets, i, j) {
                    continue;
                }
                // Positive combination hitting the hyperplane exactly.
                let mut newr: Vec<Rat> = ri
                    .iter()
                    .zip(rj)
                    .map(|(a, b)| vi.clone() * b - vj.clone() * a)
                    .collect();
                normalize_ray(&mut newr);
                if !newr.iter().all(Rat::is_zero) && !next.contains(&newr) {
                    next.push(newr);
                }
            }
        }
        rays = next;
        if rays.is_empty() {
            return Vec::new();
        }
    }

    // Rays with positive homogenizing coordinate are vertices.
    let mut out = Vec::new();
    for r in rays {
        let s = &r[d];
        if s.is_positive() {
            let t: Vec<Rat> = r[..d].iter().map(|c| c / s).collect();
            let mut x = x0.clone();
            for (k, tk) in t.iter().enumerate() {
                for i in 0..num_vars {
                    let delta = tk * &nullspace[k][i];
                    x[i] += delta;
                }
            }
            if !out.contains(&x) {
                out.push(x);
            }
        }
    }
    out
}

fn rank(rows: &[Vec<Rat>]) -> usize {
    if rows.is_empty() {
        return 0;
    }
    let n = rows[0].len();
    let mut a: Vec<Vec<Rat>> = rows.to_vec();
    let mut r = 0;
    for col in 0..n {
        let Some(pr) = (r..a.len()).find(|&i| !a[i][col].is_zero()) else {
            continue;
        };
        a.swap(r, pr);
        let p = a[r][col].clone();
        for j in 0..n {
            a[r][j] = &a[r][j] / &p;
        }
        for i in 0..a.len() {
            if i != r && !a[i][col].is_zero() {
                let f = a[i][col].clone();
                for j in 0..n {
                    let d = &f * &a[r][j];
                    a[i][j] -= d;
                }
            }
        }
        r += 1;
        if r == a.len() {
            break;
        }
    }
    r
}

/// Combinatorial adjacency: rays i and j are adjacent iff no third ray is
/// tight on every constraint tight at both.
fn adjacent(tight_sets: &[Vec<bool>], i: usize, j: usize) -> bool {
    let meet: Vec<usize> = tight_sets[i]
        .iter()
        .zip(&tight_sets[j])
        .enumerate()
        .filter_map(|(k, (a, b))| (*a && *b).then_some(k))
        .collect();
    for (k, ts) in tight_sets.iter().enumerate() {
        if k == i || k == j {
            continue;
        }
        if meet.iter().all(|&c| ts[c]) {
            return false;
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::value::{rat, rat_int};

    fn row(terms: &[(usize, i64)], rhs: i64) -> Row {
        (
            terms.iter().map(|&(i, c)| (i, rat_int(c))).collect(),
            rat_int(rhs),
        )
    }

    #[test]
    fn simplex_feasibility() {
        // x + y = 1, x - y = 0 has the solution (1/2, 1/2).
        let rows = vec![row(&[(0, 1), (1, 1)], 1), row(&[(0, 1), (1, -1)], 0)];
        let x = feasible(2, &rows).unwrap();
        assert_eq!(x, vec![rat(1, 2), rat(1, 2)]);
        // x + y = 1, x + y = 2 is inconsistent.
        let rows = vec![row(&[(0, 1), (1, 1)], 1), row(&[(0, 1), (1, 1)], 2)];
        assert!(feasible(2, &rows).is_none());
        // x = -1 violates nonnegativity.
        let rows = vec![row(&[(0, 1)], -1)];
        assert!(feasible(1, &rows).is_none());
    }

    #[test]
    fn vertex_enumeration_simplex() {
        // The probability simplex in 3 variables has the three unit vertices.
        let rows = vec![row(&[(0, 1), (1, 1), (2, 1)], 1)];
        let mut vs = vertices(3, &rows);
        vs.sort();
        assert_eq!(vs.len(), 3);
        for v in &vs {
            assert_eq!(v.iter().filter(|c| c.is_zero()).count(), 2);
        }
    }

    #[test]
    fn vertex_enumeration_interval() {
        // x + y = 1 with x <= 2/3 encoded by slack: x + s = 2/3.
        let rows = vec![
            row(&[(0, 1), (1, 1)], 1),
            (vec![(0, rat_int(1)), (2, rat_int(1))], rat(2, 3)),
        ];
        let mut vs: Vec<Vec<Rat>> = vertices(3, &rows)
            .into_iter()
            .map(|v| v[..2].to_vec())
            .collect();
        vs.sort();
        assert_eq!(
            vs,
            vec![
                vec![rat_int(0), rat_int(1)],
                vec![rat(2, 3), rat(1, 3)],
            ]
        );
    }

    #[test]
    fn vertex_enumeration_empty() {
        let rows = vec![row(&[(0, 1)], -2)];
        assert!(vertices(1, &rows).is_empty());
    }

    #[test]
    fn vertex_enumeration_point() {
        let rows = vec![row(&[(0, 1), (1, 1)], 1), row(&[(0, 1), (1, -1)], 1)];
        let vs = vertices(2, &rows);
        assert_eq!(vs, vec![vec![rat_int(1), rat_int(0)]]);
    }
}
