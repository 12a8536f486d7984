//! Smith normal form over checked integers and first homology of surgered
//! link exteriors.
//!
//! Conventions: generators are the meridians `e_1..e_n`. The longitude of
//! component `i` is `sum_j lk(i,j) e_j`, so filling component `i` with `p/q`
//! imposes `p e_i + q sum_j lk(i,j) e_j = 0`.

use std::fmt;
use std::str::FromStr;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::int::{self, Int, Overflow};
use crate::slope::{self, ExtRational, Slope};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum HomologyError {
    #[error("component index {index} out of range for {n} components")]
    IndexOutOfRange { index: usize, n: usize },
    #[error("component {0} is filled")]
    ComponentAlreadyFilled(usize),
    #[error("invalid diagram: {0}")]
    InvalidDiagram(String),
    #[error(transparent)]
    Overflow(#[from] Overflow),
}

/// Dense row-major integer matrix.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Int> Matrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    /// Panics on ragged input.
    pub fn from_rows(rows: Vec<Vec<T>>) -> Self {
        let cols = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|r| r.len() == cols), "ragged matrix");
        Matrix {
            rows: rows.len(),
            cols,
            data: rows.into_iter().flatten().collect(),
        }
    }

    /// An empty-row matrix still remembers its column count.
    pub fn with_shape(rows: usize, cols: usize, data: Vec<T>) -> Self {
        assert_eq!(data.len(), rows * cols);
        Matrix { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn to_rows(&self) -> Vec<Vec<T>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn mul(&self, other: &Self) -> Result<Self, Overflow> {
        assert_eq!(self.cols, other.rows, "shape mismatch");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for j in 0..other.cols {
                let mut acc = T::zero();
                for k in 0..self.cols {
                    acc = int::add(acc, int::mul(self[(i, k)], other[(k, j)])?)?;
                }
                out[(i, j)] = acc;
            }
        }
        Ok(out)
    }

    /// Row vector times matrix.
    pub fn left_apply(&self, x: &[T]) -> Result<Vec<T>, Overflow> {
        assert_eq!(x.len(), self.rows);
        let mut out = vec![T::zero(); self.cols];
        for (j, o) in out.iter_mut().enumerate() {
            for (k, xk) in x.iter().enumerate() {
                *o = int::add(*o, int::mul(*xk, self[(k, j)])?)?;
            }
        }
        Ok(out)
    }

    /// Fraction-free Bareiss elimination.
    pub fn determinant(&self) -> Result<T, Overflow> {
        assert_eq!(self.rows, self.cols, "determinant of a non-square matrix");
        let n = self.rows;
        if n == 0 {
            return Ok(T::one());
        }
        let mut a = self.clone();
        let mut sign = T::one();
        let mut prev = T::one();
        for k in 0..n - 1 {
            if a[(k, k)].is_zero() {
                match (k + 1..n).find(|&i| !a[(i, k)].is_zero()) {
                    Some(i) => {
                        a.swap_rows(k, i);
                        sign = -sign;
                    }
                    None => return Ok(T::zero()),
                }
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let num = int::sub(
                        int::mul(a[(i, j)], a[(k, k)])?,
                        int::mul(a[(i, k)], a[(k, j)])?,
                    )?;
                    a[(i, j)] = num / prev;
                }
            }
            prev = a[(k, k)];
        }
        int::mul(sign, a[(n - 1, n - 1)])
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a != b {
            for j in 0..self.cols {
                self.data.swap(a * self.cols + j, b * self.cols + j);
            }
        }
    }

    /// row[dst] += f * row[src]
    fn add_row(&mut self, dst: usize, src: usize, f: T) -> Result<(), Overflow> {
        for j in 0..self.cols {
            self[(dst, j)] = int::add(self[(dst, j)], int::mul(f, self[(src, j)])?)?;
        }
        Ok(())
    }

    /// `(row_a, row_b) <- (k00 row_a + k01 row_b, k10 row_a + k11 row_b)`
    fn combine_rows(&mut self, a: usize, b: usize, k: [[T; 2]; 2]) -> Result<(), Overflow> {
        for j in 0..self.cols {
            let (x, y) = (self[(a, j)], self[(b, j)]);
            self[(a, j)] = int::add(int::mul(k[0][0], x)?, int::mul(k[0][1], y)?)?;
            self[(b, j)] = int::add(int::mul(k[1][0], x)?, int::mul(k[1][1], y)?)?;
        }
        Ok(())
    }

    fn combine_cols(&mut self, a: usize, b: usize, k: [[T; 2]; 2]) -> Result<(), Overflow> {
        for i in 0..self.rows {
            let (x, y) = (self[(i, a)], self[(i, b)]);
            self[(i, a)] = int::add(int::mul(k[0][0], x)?, int::mul(k[0][1], y)?)?;
            self[(i, b)] = int::add(int::mul(k[1][0], x)?, int::mul(k[1][1], y)?)?;
        }
        Ok(())
    }

    fn negate_row(&mut self, r: usize) -> Result<(), Overflow> {
        for j in 0..self.cols {
            self[(r, j)] = int::neg(self[(r, j)])?;
        }
        Ok(())
    }
}

impl<T> std::ops::Index<(usize, usize)> for Matrix<T> {
    type Output = T;
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.cols + j]
    }
}

impl<T> std::ops::IndexMut<(usize, usize)> for Matrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[i * self.cols + j]
    }
}

/// `u * m * v = s` with `s` diagonal, nonnegative, and `s_1 | s_2 | ...`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SmithForm<T> {
    pub u: Matrix<T>,
    pub s: Matrix<T>,
    pub v: Matrix<T>,
}

impl<T: Int> SmithForm<T> {
    pub fn diagonal(&self) -> Vec<T> {
        (0..self.s.rows.min(self.s.cols)).map(|i| self.s[(i, i)]).collect()
    }

    pub fn rank(&self) -> usize {
        self.diagonal().iter().filter(|d| !d.is_zero()).count()
    }
}

/// Unimodular `k` with `k (a, b)^T = (g, 0)^T`, `g = +-gcd(a, b)`. When
/// `a | b` it is a plain shear so the first slot keeps its value.
fn eliminator<T: Int>(a: T, b: T) -> Result<[[T; 2]; 2], Overflow> {
    if (b % a).is_zero() {
        return Ok([[T::one(), T::zero()], [int::neg(b / a)?, T::one()]]);
    }
    let (g, x, y) = int::ext_gcd(a, b)?;
    Ok([[x, y], [int::neg(b / g)?, a / g]])
}

/// Row Hermite form in place, mirroring every row operation on `u`.
/// Entries above each pivot are reduced into `[0, pivot)`, which keeps the
/// transform from growing.
fn row_hermite<T: Int>(s: &mut Matrix<T>, u: &mut Matrix<T>) -> Result<(), Overflow> {
    let mut r = 0;
    for c in 0..s.cols {
        if r == s.rows {
            break;
        }
        for i in r + 1..s.rows {
            if s[(i, c)].is_zero() {
                continue;
            }
            if s[(r, c)].is_zero() {
                s.swap_rows(r, i);
                u.swap_rows(r, i);
                continue;
            }
            let k = eliminator(s[(r, c)], s[(i, c)])?;
            s.combine_rows(r, i, k)?;
            u.combine_rows(r, i, k)?;
        }
        if s[(r, c)].is_zero() {
            continue;
        }
        if s[(r, c)] < T::zero() {
            s.negate_row(r)?;
            u.negate_row(r)?;
        }
        for i in 0..r {
            let f = int::neg(int::div_floor(s[(i, c)], s[(r, c)]))?;
            s.add_row(i, r, f)?;
            u.add_row(i, r, f)?;
        }
        r += 1;
    }
    Ok(())
}

fn is_diagonal<T: Int>(s: &Matrix<T>) -> bool {
    (0..s.rows).all(|i| (0..s.cols).all(|j| i == j || s[(i, j)].is_zero()))
}

/// Alternates row and column Hermite forms until the matrix is diagonal,
/// then repairs the divisibility chain pairwise.
fn smith_core(m: &Matrix<i128>) -> Result<SmithForm<i128>, Overflow> {
    type T = i128;
    let mut s = m.clone();
    let mut u = Matrix::identity(m.rows);
    let mut vt = Matrix::identity(m.cols);
    loop {
        row_hermite(&mut s, &mut u)?;
        shrink_by_kernel(&s, &mut u);
        if is_diagonal(&s) {
            break;
        }
        let mut st = s.transpose();
        row_hermite(&mut st, &mut vt)?;
        shrink_by_kernel(&st, &mut vt);
        s = st.transpose();
        if is_diagonal(&s) {
            break;
        }
    }
    let mut v = vt.transpose();
    let n = m.rows.min(m.cols);
    // zeros last
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&i| s[(i, i)].is_zero());
    let (s0, u0, v0) = (s.clone(), u.clone(), v.clone());
    for (dst, &src) in order.iter().enumerate() {
        s[(dst, dst)] = s0[(src, src)];
        for j in 0..m.rows {
            u[(dst, j)] = u0[(src, j)];
        }
        for i in 0..m.cols {
            v[(i, dst)] = v0[(i, src)];
        }
    }
    let rank = (0..n).filter(|&i| !s[(i, i)].is_zero()).count();
    // diag(a, b) -> diag(gcd, lcm) via [[x, y], [-b/g, a/g]] and [[1, -y b/g], [1, x a/g]]
    for i in 0..rank {
        for j in i + 1..rank {
            let (a, b) = (s[(i, i)], s[(j, j)]);
            if (b % a).is_zero() {
                continue;
            }
            let (g, x, y) = int::ext_gcd(a, b)?;
            let (ag, bg) = (a / g, b / g);
            u.combine_rows(i, j, [[x, y], [int::neg(bg)?, ag]])?;
            // columns: new_i = col_i + col_j, new_j = -y bg col_i + x ag col_j
            v.combine_cols(i, j, [[T::one(), T::one()], [int::neg(int::mul(y, bg)?)?, int::mul(x, ag)?]])?;
            s[(i, i)] = g;
            s[(j, j)] = int::mul(ag, b)?;
        }
    }
    Ok(SmithForm { u, s, v })
}

fn dot(a: &[i128], b: &[i128]) -> Option<i128> {
    a.iter().zip(b).try_fold(0i128, |acc, (x, y)| acc.checked_add(x.checked_mul(*y)?))
}

/// `a / b` rounded to the nearest integer.
fn nearest(a: i128, b: i128) -> i128 {
    let (a, b) = if b < 0 { (-a, -b) } else { (a, b) };
    let q = a.div_euclid(b);
    let r = a.rem_euclid(b);
    if r > b - r {
        q + 1
    } else {
        q
    }
}

fn max_abs(v: &[i128]) -> u128 {
    v.iter().map(|x| x.unsigned_abs()).max().unwrap_or(0)
}

/// Cheap first stage of `shorten` that never forms squares: cancels the
/// coordinate where `rows[j]` is largest, kept only if the sup norm drops.
fn coarse_shorten(rows: &mut [Vec<i128>], targets: std::ops::Range<usize>, by: std::ops::Range<usize>) {
    for _ in 0..256 {
        let mut changed = false;
        for i in targets.clone() {
            for j in by.clone() {
                if i == j {
                    continue;
                }
                let Some(c) = (0..rows[j].len()).max_by_key(|&c| rows[j][c].unsigned_abs()) else {
                    continue;
                };
                if rows[j][c] == 0 {
                    continue;
                }
                let q = nearest(rows[i][c], rows[j][c]);
                if q == 0 {
                    continue;
                }
                let cand: Option<Vec<i128>> = rows[i]
                    .iter()
                    .zip(&rows[j])
                    .map(|(x, y)| x.checked_sub(q.checked_mul(*y)?))
                    .collect();
                if let Some(cand) = cand.filter(|c| max_abs(c) < max_abs(&rows[i])) {
                    rows[i] = cand;
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
}

/// `rows[i] -= q rows[j]` for `j` in `by` while that shortens `rows[i]`.
/// Returns false if a norm overflowed, leaving a valid but unreduced state.
fn shorten(rows: &mut [Vec<i128>], targets: std::ops::Range<usize>, by: std::ops::Range<usize>) -> bool {
    coarse_shorten(rows, targets.clone(), by.clone());
    for _ in 0..64 {
        let mut changed = false;
        for i in targets.clone() {
            for j in by.clone() {
                if i == j {
                    continue;
                }
                let (Some(bb), Some(ab), Some(aa)) =
                    (dot(&rows[j], &rows[j]), dot(&rows[i], &rows[j]), dot(&rows[i], &rows[i]))
                else {
                    return false;
                };
                if bb == 0 {
                    continue;
                }
                let q = nearest(ab, bb);
                if q == 0 {
                    continue;
                }
                let cand: Option<Vec<i128>> = rows[i]
                    .iter()
                    .zip(&rows[j])
                    .map(|(x, y)| x.checked_sub(q.checked_mul(*y)?))
                    .collect();
                let Some(cand) = cand else { return false };
                match dot(&cand, &cand) {
                    Some(cc) if cc < aa => {
                        rows[i] = cand;
                        changed = true;
                    }
                    Some(_) => {}
                    None => return false,
                }
            }
        }
        if !changed {
            break;
        }
    }
    true
}

/// After a row Hermite pass the zero rows of `s` sit at the bottom and the
/// matching rows of `t` span the left kernel; adding them elsewhere is free.
fn shrink_by_kernel(s: &Matrix<i128>, t: &mut Matrix<i128>) {
    let rank = (0..s.rows).filter(|&i| s.row(i).iter().any(|x| *x != 0)).count();
    let mut rows = t.to_rows();
    let n = rows.len();
    if shorten(&mut rows, rank..n, rank..n) && shorten(&mut rows, 0..rank, rank..n) {
        *t = Matrix::from_rows(rows);
    }
}

/// Shrinks the transforms using the freedom left once `s` is known: kernel
/// rows of `u` may be recombined and added to the other rows, and likewise
/// for kernel columns of `v`.
fn reduce_transforms(f: &mut SmithForm<i128>) {
    let rank = f.rank();
    let mut u = f.u.to_rows();
    let n = u.len();
    if shorten(&mut u, rank..n, rank..n) && shorten(&mut u, 0..rank, rank..n) {
        f.u = Matrix::from_rows(u);
    }
    let mut vt = f.v.transpose().to_rows();
    let n = vt.len();
    if shorten(&mut vt, rank..n, rank..n) && shorten(&mut vt, 0..rank, rank..n) {
        f.v = Matrix::from_rows(vt).transpose();
    }
}

fn convert<A: Int, B: Int>(m: &Matrix<A>) -> Result<Matrix<B>, Overflow> {
    let data = m
        .data
        .iter()
        .map(|x| x.to_i128().and_then(B::from).ok_or(Overflow))
        .collect::<Result<_, _>>()?;
    Ok(Matrix::with_shape(m.rows, m.cols, data))
}

/// Computed in 128-bit arithmetic and narrowed at the end; `Overflow` means
/// some entry of `u`, `s` or `v` does not fit in `T`.
pub fn smith_normal_form<T: Int>(m: &Matrix<T>) -> Result<SmithForm<T>, Overflow> {
    let mut wide = smith_core(&convert(m)?)?;
    reduce_transforms(&mut wide);
    Ok(SmithForm {
        u: convert(&wide.u)?,
        s: convert(&wide.s)?,
        v: convert(&wide.v)?,
    })
}

/// `Z^betti + Z/d_1 + ... + Z/d_k` with `2 <= d_1 | d_2 | ... | d_k`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AbelianGroup<T> {
    betti: usize,
    torsion: Vec<T>,
}

impl<T: Int> AbelianGroup<T> {
    pub fn trivial() -> Self {
        AbelianGroup {
            betti: 0,
            torsion: Vec::new(),
        }
    }

    pub fn free(betti: usize) -> Self {
        AbelianGroup {
            betti,
            torsion: Vec::new(),
        }
    }

    /// Accepts any list of cyclic orders; `0` contributes a free summand and
    /// `1` is dropped. The result is in invariant-factor form.
    pub fn from_cyclic_orders(orders: &[T]) -> Result<Self, Overflow> {
        let n = orders.len();
        let mut m = Matrix::zeros(n, n);
        for (i, d) in orders.iter().enumerate() {
            m[(i, i)] = int::abs(*d)?;
        }
        let snf = smith_normal_form(&m)?;
        Ok(Self::from_smith_diagonal(n, &snf.diagonal()))
    }

    /// Cokernel of a matrix with `cols` columns whose Smith diagonal is `diag`.
    fn from_smith_diagonal(cols: usize, diag: &[T]) -> Self {
        let rank = diag.iter().filter(|d| !d.is_zero()).count();
        AbelianGroup {
            betti: cols - rank,
            torsion: diag.iter().copied().filter(|d| *d > T::one()).collect(),
        }
    }

    /// `Z^n / rowspace(m)`
    pub fn cokernel(m: &Matrix<T>) -> Result<Self, Overflow> {
        let snf = smith_normal_form(m)?;
        Ok(Self::from_smith_diagonal(m.cols, &snf.diagonal()))
    }

    pub fn betti(&self) -> usize {
        self.betti
    }

    pub fn torsion(&self) -> &[T] {
        &self.torsion
    }
}

impl<T: Int> fmt::Display for AbelianGroup<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        match self.betti {
            0 => {}
            1 => parts.push("Z".to_string()),
            b => parts.push(format!("Z^{b}")),
        }
        parts.extend(self.torsion.iter().map(|d| format!("Z/{d}")));
        if parts.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", parts.join("+"))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("cannot parse `{0}` as an abelian group such as Z^2+Z/2")]
pub struct GroupParseError(String);

impl<T: Int> FromStr for AbelianGroup<T> {
    type Err = GroupParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || GroupParseError(s.to_string());
        let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        if compact == "0" || compact == "1" {
            return Ok(Self::trivial());
        }
        let mut orders = Vec::new();
        for part in compact.split(['+', '⊕']) {
            let part = part.strip_suffix("Z").filter(|p| p.contains('/')).unwrap_or(part);
            if part == "Z" {
                orders.push(T::zero());
            } else if let Some(b) = part.strip_prefix("Z^") {
                let b: usize = b.parse().map_err(|_| bad())?;
                orders.extend(std::iter::repeat_n(T::zero(), b));
            } else if let Some(d) = part.strip_prefix("Z/") {
                let d: T = d.parse().map_err(|_| bad())?;
                if d <= T::zero() {
                    return Err(bad());
                }
                orders.push(d);
            } else {
                return Err(bad());
            }
        }
        Self::from_cyclic_orders(&orders).map_err(|_| bad())
    }
}

impl<T: Int> Serialize for AbelianGroup<T> {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de, T: Int> Deserialize<'de> for AbelianGroup<T> {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Linking matrix plus an optional filling coefficient per component.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(
    try_from = "DiagramRepr<T>",
    into = "DiagramRepr<T>",
    bound(serialize = "T: Int + Serialize", deserialize = "T: Int + Deserialize<'de>")
)]
pub struct SurgeryDiagram<T: Int> {
    lk: Vec<Vec<T>>,
    fill: Vec<Option<ExtRational<T>>>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields, bound(serialize = "T: Int + Serialize", deserialize = "T: Int + Deserialize<'de>"))]
struct DiagramRepr<T: Int> {
    lk: Vec<Vec<T>>,
    fill: Vec<Option<ExtRational<T>>>,
}

impl<T: Int> TryFrom<DiagramRepr<T>> for SurgeryDiagram<T> {
    type Error = HomologyError;
    fn try_from(r: DiagramRepr<T>) -> Result<Self, Self::Error> {
        SurgeryDiagram::new(r.lk, r.fill)
    }
}

impl<T: Int> From<SurgeryDiagram<T>> for DiagramRepr<T> {
    fn from(d: SurgeryDiagram<T>) -> Self {
        DiagramRepr {
            lk: d.lk,
            fill: d.fill,
        }
    }
}

/// How `H_1` of one boundary torus maps into `H_1(M; Q)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "slope")]
pub enum BoundaryKernel<T: Int> {
    Injective,
    Line(ExtRational<T>),
    Full,
}

impl<T: Int> SurgeryDiagram<T> {
    pub fn new(lk: Vec<Vec<T>>, fill: Vec<Option<ExtRational<T>>>) -> Result<Self, HomologyError> {
        let n = lk.len();
        if fill.len() != n {
            return Err(HomologyError::InvalidDiagram(format!(
                "{} fill entries for {n} components",
                fill.len()
            )));
        }
        for (i, row) in lk.iter().enumerate() {
            if row.len() != n {
                return Err(HomologyError::InvalidDiagram(format!("row {i} has length {}", row.len())));
            }
            if !row[i].is_zero() {
                return Err(HomologyError::InvalidDiagram(format!("nonzero diagonal at {i}")));
            }
            for (j, x) in row.iter().enumerate() {
                if *x != lk[j][i] {
                    return Err(HomologyError::InvalidDiagram(format!("lk({i},{j}) != lk({j},{i})")));
                }
            }
        }
        Ok(SurgeryDiagram { lk, fill })
    }

    /// Every pair of distinct components links `l` times.
    pub fn uniform(fill: Vec<Option<ExtRational<T>>>, l: T) -> Self {
        let n = fill.len();
        let lk = (0..n)
            .map(|i| (0..n).map(|j| if i == j { T::zero() } else { l }).collect())
            .collect();
        SurgeryDiagram { lk, fill }
    }

    pub fn components(&self) -> usize {
        self.lk.len()
    }

    pub fn linking(&self) -> &[Vec<T>] {
        &self.lk
    }

    pub fn fills(&self) -> &[Option<ExtRational<T>>] {
        &self.fill
    }

    pub fn unfilled(&self) -> Vec<usize> {
        (0..self.components()).filter(|&i| self.fill[i].is_none()).collect()
    }

    pub fn with_fill(&self, i: usize, r: Option<ExtRational<T>>) -> Result<Self, HomologyError> {
        self.check_index(i)?;
        let mut d = self.clone();
        d.fill[i] = r;
        Ok(d)
    }

    /// Simultaneous relabelling: component `i` of the result is `perm[i]` here.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        let lk = perm
            .iter()
            .map(|&a| perm.iter().map(|&b| self.lk[a][b]).collect())
            .collect();
        let fill = perm.iter().map(|&a| self.fill[a]).collect();
        SurgeryDiagram { lk, fill }
    }

    fn check_index(&self, i: usize) -> Result<(), HomologyError> {
        if i >= self.components() {
            return Err(HomologyError::IndexOutOfRange {
                index: i,
                n: self.components(),
            });
        }
        Ok(())
    }

    /// `p e_i + q lk_i` for a slope on component `i`.
    fn slope_class(&self, i: usize, p: T, q: T) -> Result<Vec<T>, Overflow> {
        (0..self.components())
            .map(|j| {
                let own = if i == j { p } else { T::zero() };
                int::add(own, int::mul(q, self.lk[i][j])?)
            })
            .collect()
    }

    /// One row per filled component, restricted to `rows` if given.
    fn relations_where(&self, keep: impl Fn(usize) -> bool) -> Result<Matrix<T>, Overflow> {
        let n = self.components();
        let mut data = Vec::new();
        let mut count = 0;
        for i in 0..n {
            if let Some(r) = self.fill[i].filter(|_| keep(i)) {
                data.extend(self.slope_class(i, r.numerator(), r.denominator())?);
                count += 1;
            }
        }
        Ok(Matrix::with_shape(count, n, data))
    }

    pub fn relation_matrix(&self) -> Result<Matrix<T>, Overflow> {
        self.relations_where(|_| true)
    }
}

pub fn first_homology<T: Int>(d: &SurgeryDiagram<T>) -> Result<AbelianGroup<T>, HomologyError> {
    Ok(AbelianGroup::cokernel(&d.relation_matrix()?)?)
}

/// Integral projection onto `Z^n / rowspace(r)` modulo torsion. Its kernel
/// is the rational span of the rows.
struct FreeProjection<T> {
    v: Matrix<T>,
    rank: usize,
}

impl<T: Int> FreeProjection<T> {
    fn new(r: &Matrix<T>) -> Result<Self, Overflow> {
        let snf = smith_normal_form(r)?;
        Ok(FreeProjection {
            rank: snf.rank(),
            v: snf.v,
        })
    }

    fn dim(&self) -> usize {
        self.v.cols() - self.rank
    }

    fn apply(&self, x: &[T]) -> Result<Vec<T>, Overflow> {
        Ok(self.v.left_apply(x)?.split_off(self.rank))
    }
}

fn check_unfilled<T: Int>(d: &SurgeryDiagram<T>, i: usize) -> Result<(), HomologyError> {
    d.check_index(i)?;
    if d.fill[i].is_some() {
        return Err(HomologyError::ComponentAlreadyFilled(i));
    }
    Ok(())
}

pub fn boundary_kernel<T: Int>(
    d: &SurgeryDiagram<T>,
    i: usize,
) -> Result<BoundaryKernel<T>, HomologyError> {
    check_unfilled(d, i)?;
    let proj = FreeProjection::new(&d.relation_matrix()?)?;
    let u = proj.apply(&d.slope_class(i, T::one(), T::zero())?)?;
    let l = proj.apply(&d.slope_class(i, T::zero(), T::one())?)?;
    let Some(j) = (0..u.len()).find(|&j| !u[j].is_zero() || !l[j].is_zero()) else {
        return Ok(BoundaryKernel::Full);
    };
    // p u + q l = 0 forces (p, q) proportional to (l_j, -u_j)
    let (p, q) = (l[j], int::neg(u[j])?);
    for k in 0..u.len() {
        let mixed = int::add(int::mul(p, u[k])?, int::mul(q, l[k])?)?;
        if !mixed.is_zero() {
            return Ok(BoundaryKernel::Injective);
        }
    }
    let g = int::gcd(p, q)?;
    let s = slope::make_slope(p / g, q / g).map_err(|_| Overflow)?;
    Ok(BoundaryKernel::Line(slope::to_rational(&s)))
}

/// The slope on unfilled component `i` that dies in `H_1(M; Q)`, when that
/// kernel is a single line.
pub fn null_homologous_slope<T: Int>(
    d: &SurgeryDiagram<T>,
    i: usize,
) -> Result<Option<Slope<T>>, HomologyError> {
    Ok(match boundary_kernel(d, i)? {
        BoundaryKernel::Line(r) => Some(r.to_slope()),
        _ => None,
    })
}

fn det_vec<T: Int>(a: &[T], b: &[T]) -> Result<T, Overflow> {
    int::det2(a[0], a[1], b[0], b[1])
}

/// With component `k` treated as a free filling parameter `(p, q)`, returns
/// `M` such that the null-homologous slope on unfilled component `i` is the
/// class of `M (p, q)^T` whenever that vector is nonzero. `None` when the
/// remaining free rank is not exactly two.
pub fn null_slope_transform<T: Int>(
    d: &SurgeryDiagram<T>,
    k: usize,
    i: usize,
) -> Result<Option<[[T; 2]; 2]>, HomologyError> {
    d.check_index(k)?;
    check_unfilled(d, i)?;
    if k == i {
        return Err(HomologyError::InvalidDiagram("parameter and boundary components coincide".into()));
    }
    let proj = FreeProjection::new(&d.relations_where(|j| j != k)?)?;
    if proj.dim() != 2 {
        return Ok(None);
    }
    let u = proj.apply(&d.slope_class(i, T::one(), T::zero())?)?;
    let l = proj.apply(&d.slope_class(i, T::zero(), T::one())?)?;
    let e = proj.apply(&d.slope_class(k, T::one(), T::zero())?)?;
    let w = proj.apply(&d.slope_class(k, T::zero(), T::one())?)?;
    Ok(Some([
        [int::neg(det_vec(&l, &e)?)?, int::neg(det_vec(&l, &w)?)?],
        [det_vec(&u, &e)?, det_vec(&u, &w)?],
    ]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn r(t: &str) -> ExtRational<i64> {
        t.parse().unwrap()
    }

    fn g(t: &str) -> AbelianGroup<i64> {
        t.parse().unwrap()
    }

    fn l_diagram(m: i64) -> SurgeryDiagram<i64> {
        let mut d = SurgeryDiagram::uniform(vec![None, None], 3);
        d.fill[0] = Some(ExtRational::new(2 * m - 1, 2).unwrap());
        d
    }

    fn lb_diagram(rr: ExtRational<i64>) -> SurgeryDiagram<i64> {
        SurgeryDiagram::uniform(vec![Some(r("0")), Some(rr), None], 2)
    }

    fn assert_smith(m: &Matrix<i64>) {
        let snf = smith_normal_form(m).unwrap();
        // the triple identity is checked in 128 bits since U*M may be wide
        let wide = |x: &Matrix<i64>| Matrix::<i128>::from_rows(
            x.to_rows().into_iter().map(|r| r.into_iter().map(i128::from).collect()).collect(),
        );
        let prod = wide(&snf.u).mul(&wide(m)).unwrap().mul(&wide(&snf.v)).unwrap();
        assert_eq!(prod, wide(&snf.s));
        assert!(crate::lemmas::is_unimodular(&snf.u));
        assert!(crate::lemmas::is_unimodular(&snf.v));
        for i in 0..snf.s.rows() {
            for j in 0..snf.s.cols() {
                if i != j {
                    assert_eq!(snf.s[(i, j)], 0);
                }
            }
        }
        let diag = snf.diagonal();
        for w in diag.windows(2) {
            assert!(w[0] >= 0);
            if w[0] == 0 {
                assert_eq!(w[1], 0);
            } else {
                assert_eq!(w[1] % w[0], 0);
            }
        }
    }

    #[test]
    fn smith_examples() {
        let m = Matrix::from_rows(vec![vec![2i64, 0], vec![0, 3]]);
        assert_eq!(smith_normal_form(&m).unwrap().diagonal(), vec![1, 6]);
        assert_smith(&m);
        let m = Matrix::from_rows(vec![vec![0i64]]);
        assert_eq!(smith_normal_form(&m).unwrap().s, m);
        let m = Matrix::from_rows(vec![vec![3i64, 6]]);
        assert_eq!(smith_normal_form(&m).unwrap().s, Matrix::from_rows(vec![vec![3, 0]]));
        assert_smith(&m);
        let m = Matrix::from_rows(vec![vec![2i64, 4, 4], vec![-6, 6, 12], vec![10, -4, -16]]);
        assert_eq!(smith_normal_form(&m).unwrap().diagonal(), vec![2, 6, 12]);
        assert_smith(&m);
    }

    #[test]
    fn bareiss_matches_cofactor() {
        let m = Matrix::from_rows(vec![vec![2i64, -1, 0], vec![1, 3, 2], vec![0, 5, -4]]);
        // 2(-12-10) + 1(-4-0) = -48
        assert_eq!(m.determinant().unwrap(), -48);
        let z = Matrix::from_rows(vec![vec![0i64, 1], vec![1, 0]]);
        assert_eq!(z.determinant().unwrap(), -1);
    }

    #[test]
    fn group_text_round_trip() {
        for t in ["0", "Z", "Z^2+Z/2", "Z+Z/2+Z/2", "Z/3", "Z+Z/2+Z/6"] {
            assert_eq!(g(t).to_string(), t);
        }
        assert_eq!(g("Z/2+Z/3"), g("Z/6"));
        assert_eq!(g("Z ⊕ Z/3Z"), g("Z+Z/3"));
        assert_eq!(g("Z+Z"), AbelianGroup::free(2));
        assert!("Q".parse::<AbelianGroup<i64>>().is_err());
        assert!("Z/0".parse::<AbelianGroup<i64>>().is_err());
    }

    #[test]
    fn homology_examples() {
        assert_eq!(first_homology(&l_diagram(2)).unwrap(), g("Z+Z/3"));
        assert_eq!(first_homology(&lb_diagram(r("1"))).unwrap(), g("Z+Z/2"));
        let unknot = SurgeryDiagram::new(vec![vec![0i64]], vec![Some(r("1"))]).unwrap();
        assert_eq!(first_homology(&unknot).unwrap(), AbelianGroup::trivial());
        let lb0 = SurgeryDiagram::uniform(vec![Some(r("0")), None, None], 2);
        assert_eq!(first_homology(&lb0).unwrap(), g("Z^2+Z/2"));
        let whitehead = SurgeryDiagram::uniform(vec![Some(r("5/2")), None], 0);
        assert_eq!(first_homology(&whitehead).unwrap(), g("Z+Z/5"));
    }

    #[test]
    fn null_slope_examples() {
        let knot = SurgeryDiagram::new(vec![vec![0i64]], vec![None]).unwrap();
        assert_eq!(null_homologous_slope(&knot, 0).unwrap(), Some(Slope::longitude()));
        assert_eq!(
            null_homologous_slope(&l_diagram(2), 1).unwrap(),
            Some(r("6").to_slope())
        );
        assert_eq!(
            null_homologous_slope(&lb_diagram(r("1")), 2).unwrap(),
            Some(r("3").to_slope())
        );
    }

    #[test]
    fn kernel_kinds_on_two_cusps() {
        // lk 0: each meridian survives and each longitude dies
        let split = SurgeryDiagram::uniform(vec![None, None], 0);
        assert_eq!(boundary_kernel(&split, 0).unwrap(), BoundaryKernel::Line(r("0")));
        let linked = SurgeryDiagram::uniform(vec![None, None], 3);
        assert_eq!(boundary_kernel(&linked, 0).unwrap(), BoundaryKernel::Injective);
        // a rationally trivial boundary: 1-surgery on a split component with lk 0
        let d = SurgeryDiagram::uniform(vec![Some(r("1")), None], 0);
        assert_eq!(boundary_kernel(&d, 1).unwrap(), BoundaryKernel::Line(r("0")));
    }

    #[test]
    fn index_errors() {
        let d = l_diagram(1);
        assert_eq!(
            null_homologous_slope(&d, 0),
            Err(HomologyError::ComponentAlreadyFilled(0))
        );
        assert!(matches!(
            null_homologous_slope(&d, 5),
            Err(HomologyError::IndexOutOfRange { index: 5, n: 2 })
        ));
        assert!(SurgeryDiagram::new(vec![vec![0i64, 1], vec![2, 0]], vec![None, None]).is_err());
        assert!(SurgeryDiagram::new(vec![vec![1i64]], vec![None]).is_err());
    }

    #[test]
    fn transform_for_linking_three() {
        let d = SurgeryDiagram::uniform(vec![None, None], 3i64);
        assert_eq!(null_slope_transform(&d, 0, 1).unwrap(), Some([[0, -9], [-1, 0]]));
    }

    #[test]
    fn transform_agrees_with_direct_kernel() {
        let base = SurgeryDiagram::uniform(vec![Some(r("0")), None, None], 2i64);
        let m = null_slope_transform(&base, 1, 2).unwrap().unwrap();
        for p in -7i64..=7 {
            for q in 1..=5 {
                if num_integer::gcd(p, q) != 1 {
                    continue;
                }
                let d = base.with_fill(1, Some(ExtRational::new(p, q).unwrap())).unwrap();
                let (x, y) = (m[0][0] * p + m[0][1] * q, m[1][0] * p + m[1][1] * q);
                let g = num_integer::gcd(x, y);
                let want = slope::make_slope(x / g, y / g).unwrap();
                assert_eq!(null_homologous_slope(&d, 2).unwrap(), Some(want));
                // and it is 4 - r
                assert_eq!(slope::to_rational(&want), ExtRational::new(4 * q - p, q).unwrap());
            }
        }
    }

    #[test]
    fn diagram_json() {
        let d = l_diagram(2);
        let text = serde_json::to_string(&d).unwrap();
        assert_eq!(text, r#"{"lk":[[0,3],[3,0]],"fill":["3/2",null]}"#);
        let back: SurgeryDiagram<i64> = serde_json::from_str(&text).unwrap();
        assert_eq!(back, d);
        assert!(serde_json::from_str::<SurgeryDiagram<i64>>(r#"{"lk":[[0,1],[2,0]],"fill":[null,null]}"#).is_err());
    }

    #[test]
    fn works_over_i32() {
        let d = SurgeryDiagram::uniform(vec![Some(ExtRational::new(3i32, 2).unwrap()), None], 3);
        assert_eq!(first_homology(&d).unwrap().to_string(), "Z+Z/3");
    }

    fn small_matrix() -> impl Strategy<Value = Matrix<i64>> {
        (1usize..=6, 1usize..=6).prop_flat_map(|(r, c)| {
            prop::collection::vec(-9i64..=9, r * c).prop_map(move |d| Matrix::with_shape(r, c, d))
        })
    }

    fn diagram(unfilled: usize) -> impl Strategy<Value = SurgeryDiagram<i64>> {
        (unfilled..=unfilled + 3).prop_flat_map(move |n| {
            (
                prop::collection::vec(-3i64..=3, n * (n - 1) / 2),
                prop::collection::vec((-9i64..=9, 1i64..=5), n - unfilled),
            )
                .prop_map(move |(upper, fills)| {
                    let mut lk = vec![vec![0; n]; n];
                    let mut it = upper.into_iter();
                    for i in 0..n {
                        for j in i + 1..n {
                            let x = it.next().unwrap();
                            lk[i][j] = x;
                            lk[j][i] = x;
                        }
                    }
                    let mut fill: Vec<_> = fills
                        .into_iter()
                        .map(|(p, q)| ExtRational::new(p, q).ok())
                        .collect();
                    fill.extend(std::iter::repeat_n(None, unfilled));
                    SurgeryDiagram::new(lk, fill).unwrap()
                })
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(500))]

        #[test]
        fn smith_triple(m in small_matrix()) {
            assert_smith(&m);
        }

        #[test]
        fn homology_permutation_invariant(d in diagram(1), seed in any::<u64>()) {
            use rand::seq::SliceRandom;
            use rand::SeedableRng;
            let mut perm: Vec<usize> = (0..d.components()).collect();
            perm.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
            prop_assert_eq!(first_homology(&d).unwrap(), first_homology(&d.permuted(&perm)).unwrap());
        }

        #[test]
        fn homology_mirror_invariant(d in diagram(1)) {
            let lk = d.linking().iter().map(|row| row.iter().map(|x| -x).collect()).collect();
            let fill = d.fills().iter().map(|f| f.map(|r| r.negate().unwrap())).collect();
            let mirror = SurgeryDiagram::new(lk, fill).unwrap();
            prop_assert_eq!(first_homology(&d).unwrap(), first_homology(&mirror).unwrap());
        }

        #[test]
        fn betti_drops_off_the_null_slope(d in diagram(1), p in -6i64..=6, q in 0i64..=6) {
            prop_assume!(num_integer::gcd(p, q) == 1);
            let i = d.components() - 1;
            let b = first_homology(&d).unwrap().betti();
            let c0 = null_homologous_slope(&d, i).unwrap().expect("one torus boundary has a null slope");
            let filled = d.with_fill(i, Some(slope::to_rational(&c0))).unwrap();
            prop_assert_eq!(first_homology(&filled).unwrap().betti(), b);
            let c = slope::make_slope(p, q).unwrap();
            if c != c0 {
                let filled = d.with_fill(i, Some(slope::to_rational(&c))).unwrap();
                prop_assert_eq!(first_homology(&filled).unwrap().betti() + 1, b);
            }
        }

        #[test]
        fn lb_parity(p in -20i64..=20, q in 1i64..=20) {
            prop_assume!(num_integer::gcd(p, q) == 1);
            let h = first_homology(&lb_diagram(ExtRational::new(p, q).unwrap())).unwrap();
            let want = if p % 2 == 0 { "Z+Z/2+Z/2" } else { "Z+Z/2" };
            prop_assert_eq!(h.to_string(), want);
        }
    }
}
