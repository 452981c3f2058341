//! Couplings and copulas built from permutations and from box products.
//!
//! Couplings are always realised operationally: a copula sample `U` in
//! `[0,1]^d` is pushed through the marginal quantile functions.
//! Permutation couplings are stored as their `n` cells, never as a dense
//! histogram on `[0,1]^d`.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::gaussian;
use crate::measures::{decompose, DiscreteMeasure, SortedSample};
use crate::sampling::open_unit;

/// Permutation of `{0, .., n-1}`, read as `slot -> index`.
///
/// Acting on a vector it reorders coordinates: `(sigma s)[j] = s[sigma(j)]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Permutation(Vec<usize>);

impl Permutation {
    pub fn new(map: Vec<usize>) -> Result<Self> {
        let n = map.len();
        let mut seen = vec![false; n];
        for &v in &map {
            if v >= n || seen[v] {
                return Err(Error::domain(format!("{map:?} is not a permutation")));
            }
            seen[v] = true;
        }
        Ok(Permutation(map))
    }

    pub fn identity(n: usize) -> Self {
        Permutation((0..n).collect())
    }

    pub fn random(n: usize, rng: &mut impl Rng) -> Self {
        let mut v: Vec<usize> = (0..n).collect();
        v.shuffle(rng);
        Permutation(v)
    }

    pub fn degree(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn get(&self, slot: usize) -> usize {
        self.0[slot]
    }

    pub fn inverse(&self) -> Permutation {
        let mut inv = vec![0; self.0.len()];
        for (slot, &idx) in self.0.iter().enumerate() {
            inv[idx] = slot;
        }
        Permutation(inv)
    }

    /// `sigma s`.
    pub fn apply(&self, s: &[f64]) -> Result<Vec<f64>> {
        if s.len() != self.0.len() {
            return Err(Error::domain(format!(
                "vector of length {} reordered by permutation of degree {}",
                s.len(),
                self.0.len()
            )));
        }
        Ok(self.0.iter().map(|&j| s[j]).collect())
    }
}

/// All permutations of degree `n` in lexicographic order.
pub fn all_permutations(n: usize) -> Vec<Permutation> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..n).collect();
    loop {
        out.push(Permutation(cur.clone()));
        // next lexicographic permutation
        let Some(i) = (1..n).rev().find(|&i| cur[i - 1] < cur[i]) else {
            return out;
        };
        let j = (i..n).rev().find(|&j| cur[j] > cur[i - 1]).unwrap();
        cur.swap(i - 1, j);
        cur[i..].reverse();
    }
}

/// Axis-aligned box `prod [lo_i, hi_i)` inside the unit cube.
#[derive(Debug, Clone, PartialEq)]
pub struct AxisBox {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl AxisBox {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.len() != hi.len() || lo.is_empty() {
            return Err(Error::domain(
                "box bounds must be nonempty and of equal length",
            ));
        }
        for (a, b) in lo.iter().zip(&hi) {
            if !(0.0 <= *a && a <= b && *b <= 1.0) {
                return Err(Error::domain(format!(
                    "box side [{a}, {b}) is not inside [0,1]"
                )));
            }
        }
        Ok(AxisBox { lo, hi })
    }

    /// `[lo, hi)^d`.
    pub fn cube(lo: f64, hi: f64, d: usize) -> Result<Self> {
        Self::new(vec![lo; d], vec![hi; d])
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn volume(&self) -> f64 {
        self.lo.iter().zip(&self.hi).map(|(a, b)| b - a).product()
    }

    /// Length of `[cell/m, (cell+1)/m) ∩ [lo_i, hi_i)`.
    fn overlap(&self, i: usize, cell: usize, m: usize) -> f64 {
        let a = cell as f64 / m as f64;
        let b = (cell + 1) as f64 / m as f64;
        (b.min(self.hi[i]) - a.max(self.lo[i])).max(0.0)
    }

    /// Image under the affine map sending `[1-p, 1]` to `[0, 1]` in every
    /// coordinate. The box must lie in `[1-p, 1]^d`.
    pub fn rescale_upper(&self, p: f64) -> Result<AxisBox> {
        let base = 1.0 - p;
        if self.lo.iter().any(|&a| a < base - 1e-15) {
            return Err(Error::domain("box is not contained in the upper block"));
        }
        let map = |x: f64| ((x - base) / p).clamp(0.0, 1.0);
        AxisBox::new(
            self.lo.iter().map(|&x| map(x)).collect(),
            self.hi.iter().map(|&x| map(x)).collect(),
        )
    }
}

/// Index block `B ⊆ {0, .., n-1}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndexBlock {
    n: usize,
    members: Vec<usize>,
}

impl IndexBlock {
    pub fn new(n: usize, mut members: Vec<usize>) -> Result<Self> {
        members.sort_unstable();
        if members.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::domain("index block has repeated members"));
        }
        if members.last().is_some_and(|&b| b >= n) {
            return Err(Error::domain(format!("index block exceeds degree {n}")));
        }
        Ok(IndexBlock { n, members })
    }

    /// The top `m` indices `{n-m, .., n-1}`.
    pub fn top(n: usize, m: usize) -> Result<Self> {
        if m > n {
            return Err(Error::domain(format!("block size {m} exceeds degree {n}")));
        }
        Ok(IndexBlock {
            n,
            members: (n - m..n).collect(),
        })
    }

    pub fn degree(&self) -> usize {
        self.n
    }

    pub fn size(&self) -> usize {
        self.members.len()
    }

    pub fn members(&self) -> &[usize] {
        &self.members
    }

    pub fn complement(&self) -> Vec<usize> {
        let mut inside = vec![false; self.n];
        self.members.iter().for_each(|&b| inside[b] = true);
        (0..self.n).filter(|&j| !inside[j]).collect()
    }

    /// Whether `sigma` maps the top `m` slots onto this block.
    pub fn contains(&self, sigma: &Permutation) -> bool {
        if sigma.degree() != self.n {
            return false;
        }
        let m = self.size();
        let mut image: Vec<usize> = sigma.as_slice()[self.n - m..].to_vec();
        image.sort_unstable();
        image == self.members
    }
}

/// Uniform element of `S_n(B)`: independent shuffles of `B` onto the top
/// `m` slots and of the complement onto the bottom `n - m` slots.
pub fn sample_uniform_snb(block: &IndexBlock, rng: &mut impl Rng) -> Permutation {
    let mut bottom = block.complement();
    let mut top = block.members().to_vec();
    bottom.shuffle(rng);
    top.shuffle(rng);
    bottom.extend(top);
    Permutation(bottom)
}

/// The copula `C^sigma` of a tuple of permutations, stored as `n` cells.
///
/// Cell `j` is the hypercube whose `i`-th side is slot `sigma_i^{-1}(j)`;
/// each carries mass `1/n`.
#[derive(Debug, Clone, PartialEq)]
pub struct PermutationCoupling {
    n: usize,
    d: usize,
    perms: Vec<Permutation>,
    /// Row-major `n x d`: `cells[j * d + i] = sigma_i^{-1}(j)`.
    cells: Vec<usize>,
}

impl PermutationCoupling {
    pub fn from_permutations(perms: Vec<Permutation>) -> Result<Self> {
        let Some(first) = perms.first() else {
            return Err(Error::domain("need at least one permutation"));
        };
        let n = first.degree();
        if n == 0 {
            return Err(Error::domain("permutations must have positive degree"));
        }
        if let Some(bad) = perms.iter().find(|p| p.degree() != n) {
            return Err(Error::domain(format!(
                "degree mismatch: {} vs {n}",
                bad.degree()
            )));
        }
        let d = perms.len();
        let mut cells = vec![0; n * d];
        for (i, p) in perms.iter().enumerate() {
            for (slot, &j) in p.as_slice().iter().enumerate() {
                cells[j * d + i] = slot;
            }
        }
        Ok(PermutationCoupling { n, d, perms, cells })
    }

    pub fn degree(&self) -> usize {
        self.n
    }

    pub fn arity(&self) -> usize {
        self.d
    }

    pub fn permutations(&self) -> &[Permutation] {
        &self.perms
    }

    /// Slots of cell `j`, one per coordinate.
    pub fn cell(&self, j: usize) -> &[usize] {
        &self.cells[j * self.d..(j + 1) * self.d]
    }

    pub fn cell_mass(&self) -> f64 {
        1.0 / self.n as f64
    }

    /// Each one-dimensional marginal puts one cell in every slot.
    pub fn marginals_uniform(&self) -> bool {
        (0..self.d).all(|i| {
            let mut hit = vec![false; self.n];
            (0..self.n).all(|j| !std::mem::replace(&mut hit[self.cell(j)[i]], true))
        })
    }

    /// `C^sigma(box)`: the sum over cells of `n^{d-1}` times the volume of
    /// the cell-box intersection.
    pub fn mass(&self, bx: &AxisBox) -> Result<f64> {
        if bx.dim() != self.d {
            return Err(Error::domain(format!(
                "box of dimension {} for coupling of arity {}",
                bx.dim(),
                self.d
            )));
        }
        let n = self.n;
        let total: f64 = (0..n)
            .map(|j| {
                self.cell(j)
                    .iter()
                    .enumerate()
                    .map(|(i, &slot)| n as f64 * bx.overlap(i, slot, n))
                    .product::<f64>()
            })
            .sum();
        Ok(total / n as f64)
    }

    /// Point of `[0,1]^d` drawn from `C^sigma`.
    pub fn sample(&self, rng: &mut impl Rng) -> Vec<f64> {
        let j = rng.random_range(0..self.n);
        let n = self.n as f64;
        self.cell(j)
            .iter()
            .map(|&slot| (slot as f64 + rng.random::<f64>()) / n)
            .collect()
    }

    /// Degree-`m` coupling of the upper block `[1-p, 1]^d` rescaled to the
    /// unit cube, for permutations that all lie in a common `S_n(B)` with
    /// `|B| = m`.
    pub fn restrict_upper_block(&self, m: usize) -> Result<PermutationCoupling> {
        let n = self.n;
        if m == 0 || m > n {
            return Err(Error::domain(format!(
                "upper block size {m} not in [1, {n}]"
            )));
        }
        let mut block: Vec<usize> = self.perms[0].as_slice()[n - m..].to_vec();
        block.sort_unstable();
        let block = IndexBlock::new(n, block)?;
        if let Some(i) = self.perms.iter().position(|p| !block.contains(p)) {
            return Err(Error::domain(format!(
                "permutation {i} does not map the top {m} slots onto a common block"
            )));
        }
        let mut rank = vec![usize::MAX; n];
        for (r, &b) in block.members().iter().enumerate() {
            rank[b] = r;
        }
        let restricted = self
            .perms
            .iter()
            .map(|p| Permutation(p.as_slice()[n - m..].iter().map(|&j| rank[j]).collect()))
            .collect();
        PermutationCoupling::from_permutations(restricted)
    }
}

/// Empirical measure of `lambda_1 s_1 + ... + lambda_k s_k`, computed
/// coordinatewise.
pub fn convex_combination_law(vectors: &[Vec<f64>], weights: &[f64]) -> Result<DiscreteMeasure> {
    let s = convex_combination(vectors, weights)?;
    DiscreteMeasure::uniform(s)
}

pub fn convex_combination(vectors: &[Vec<f64>], weights: &[f64]) -> Result<Vec<f64>> {
    check_combination(vectors, weights)?;
    let n = vectors[0].len();
    Ok((0..n)
        .map(|j| vectors.iter().zip(weights).map(|(v, l)| l * v[j]).sum())
        .collect())
}

fn check_combination(vectors: &[Vec<f64>], weights: &[f64]) -> Result<()> {
    if vectors.is_empty() || vectors.len() != weights.len() {
        return Err(Error::domain(
            "need one weight per vector and at least one vector",
        ));
    }
    if weights.iter().any(|l| !(0.0..=1.0).contains(l)) {
        return Err(Error::domain("weights must lie in [0, 1]"));
    }
    let total: f64 = weights.iter().sum();
    if (total - 1.0).abs() > 1e-10 {
        return Err(Error::domain(format!("weights sum to {total}, not 1")));
    }
    let n = vectors[0].len();
    if n == 0 || vectors.iter().any(|v| v.len() != n) {
        return Err(Error::domain("vectors must share a positive dimension"));
    }
    Ok(())
}

/// Sorted atoms of the law of `sum_i lambda_i Q_i(U_i)` with `U ~ C^sigma`,
/// where `Q_i` and `sigma_i` are the quantile function and ordering
/// permutation of `s_i`. Each cell contributes one atom, with the quantile
/// functions evaluated at the cell centre.
pub fn coupled_quantile_law(vectors: &[Vec<f64>], weights: &[f64]) -> Result<Vec<f64>> {
    check_combination(vectors, weights)?;
    let samples: Vec<SortedSample> = vectors
        .iter()
        .map(|v| decompose(v))
        .collect::<Result<_>>()?;
    let coupling = PermutationCoupling::from_permutations(
        samples
            .iter()
            .map(|s| Permutation(s.ordering.clone()))
            .collect(),
    )?;
    let n = coupling.degree();
    let quantile_fn =
        |s: &SortedSample, r: f64| s.atoms[((r * n as f64).floor() as usize).min(n - 1)];
    let mut atoms: Vec<f64> = (0..n)
        .map(|j| {
            coupling
                .cell(j)
                .iter()
                .zip(&samples)
                .zip(weights)
                .map(|((&slot, s), l)| l * quantile_fn(s, (slot as f64 + 0.5) / n as f64))
                .sum()
        })
        .collect();
    atoms.sort_by(|a, b| a.total_cmp(b));
    Ok(atoms)
}

/// `u = d^{-1}(sigma_1 t + ... + sigma_d t)`.
pub fn push_vector(t: &SortedSample, perms: &[Permutation]) -> Result<Vec<f64>> {
    if perms.is_empty() {
        return Err(Error::domain("need at least one permutation"));
    }
    let n = t.len();
    if let Some(p) = perms.iter().find(|p| p.degree() != n) {
        return Err(Error::domain(format!(
            "permutation degree {} does not match sample length {n}",
            p.degree()
        )));
    }
    let mut u = vec![0.0; n];
    for p in perms {
        for (uj, &idx) in u.iter_mut().zip(p.as_slice()) {
            *uj += t.atoms[idx];
        }
    }
    let d = perms.len() as f64;
    u.iter_mut().for_each(|x| *x /= d);
    Ok(u)
}

/// `mu_t^sigma`, the empirical measure of [`push_vector`].
pub fn push_measure(t: &SortedSample, perms: &[Permutation]) -> Result<DiscreteMeasure> {
    DiscreteMeasure::uniform(push_vector(t, perms)?)
}

/// Box-product coupling of `d` standard Gaussians at threshold `q`: with
/// probability `p = 1 - Phi(q)` every coordinate is a Gaussian conditioned
/// to be `>= q`, otherwise every coordinate is conditioned to be `< q`,
/// independently within the block.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoxProductCoupling {
    pub q: f64,
    pub p: f64,
    pub d: usize,
}

impl BoxProductCoupling {
    /// Coupling with upper-block mass `p`.
    pub fn with_upper_mass(p: f64, d: usize) -> Result<Self> {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::domain(format!(
                "upper mass must lie in (0,1), got {p}"
            )));
        }
        if d == 0 {
            return Err(Error::domain("arity must be positive"));
        }
        Ok(BoxProductCoupling {
            q: gaussian::upper_quantile_unchecked(p),
            p,
            d,
        })
    }

    /// Writes one draw into `out` (length `d`); returns whether the draw
    /// came from the upper block.
    pub fn sample_into(&self, rng: &mut impl Rng, out: &mut [f64]) -> bool {
        let upper = rng.random::<f64>() < self.p;
        if upper {
            sample_upper_tail(self.p, rng, out);
        } else {
            sample_lower_tail(1.0 - self.p, rng, out);
        }
        upper
    }

    pub fn sample(&self, rng: &mut impl Rng) -> Vec<f64> {
        let mut out = vec![0.0; self.d];
        self.sample_into(rng, &mut out);
        out
    }
}

/// I.i.d. Gaussians conditioned on `1 - Phi(Z) <= tail`, by inverse CDF.
pub fn sample_upper_tail(tail: f64, rng: &mut impl Rng, out: &mut [f64]) {
    for z in out.iter_mut() {
        *z = gaussian::upper_quantile_unchecked(tail * open_unit(rng));
    }
}

/// I.i.d. Gaussians conditioned on `Phi(Z) <= mass`, by inverse CDF.
pub fn sample_lower_tail(mass: f64, rng: &mut impl Rng, out: &mut [f64]) {
    for z in out.iter_mut() {
        *z = gaussian::quantile_unchecked(mass * open_unit(rng));
    }
}

/// Copula density of the box-product coupling with upper mass `p`:
/// `(1-p)^{-(d-1)}` on `[0, 1-p)^d`, `p^{-(d-1)}` on `[1-p, 1]^d`, else 0.
pub fn box_copula_density(r: &[f64], p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::domain(format!(
            "upper mass must lie in (0,1), got {p}"
        )));
    }
    if r.is_empty() || r.iter().any(|x| !(0.0..=1.0).contains(x)) {
        return Err(Error::domain("point must lie in the unit cube"));
    }
    let d = r.len() as i32;
    let cut = 1.0 - p;
    Ok(if r.iter().all(|&x| x < cut) {
        (1.0 - p).powi(-(d - 1))
    } else if r.iter().all(|&x| x >= cut) {
        p.powi(-(d - 1))
    } else {
        0.0
    })
}

/// First and second moments of `C^tau(A)` for independent uniform `tau_i`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Moments {
    pub mean: f64,
    pub second_moment: f64,
}

impl Moments {
    pub fn variance(&self) -> f64 {
        self.second_moment - self.mean * self.mean
    }
}

/// Cell volumes `a_x = |A ∩ cell_x|` on the `m`-grid, `x` in `[m]^d`
/// flattened row-major with the first coordinate most significant.
pub fn cell_volumes(m: usize, bx: &AxisBox) -> Vec<f64> {
    let d = bx.dim();
    let mut out = Vec::with_capacity(m.pow(d as u32));
    let mut x = vec![0usize; d];
    loop {
        out.push((0..d).map(|i| bx.overlap(i, x[i], m)).product());
        if !odometer(&mut x, m) {
            return out;
        }
    }
}

fn odometer(x: &mut [usize], m: usize) -> bool {
    for xi in x.iter_mut().rev() {
        *xi += 1;
        if *xi < m {
            return true;
        }
        *xi = 0;
    }
    false
}

/// Exact moments from arbitrary grid cell volumes:
/// `E[C(A)] = sum a_x` and
/// `E[C(A)^2] = m^{d-1} sum a_x^2 + (1 - 1/m)^{-(d-1)} sum_{x !~ y} a_x a_y`,
/// where `x !~ y` means the cells differ in every coordinate. The restricted
/// pair sum is evaluated by inclusion-exclusion over the set of coordinates
/// on which the pair agrees.
pub fn exact_moments_cells(m: usize, d: usize, volumes: &[f64]) -> Result<Moments> {
    if m < 2 || d == 0 {
        return Err(Error::domain("need m >= 2 and d >= 1"));
    }
    if volumes.len() != m.pow(d as u32) {
        return Err(Error::domain("volume grid has the wrong size"));
    }
    let mean: f64 = volumes.iter().sum();
    let diag: f64 = volumes.iter().map(|a| a * a).sum();
    let mut apart = 0.0;
    for mask in 0u32..(1 << d) {
        // Sum over pairs agreeing on the coordinates in `mask`.
        let keep: Vec<usize> = (0..d).filter(|i| mask & (1 << i) != 0).collect();
        let mut slices = vec![0.0; m.pow(keep.len() as u32)];
        let mut x = vec![0usize; d];
        for &a in volumes {
            let key = keep.iter().fold(0, |acc, &i| acc * m + x[i]);
            slices[key] += a;
            odometer(&mut x, m);
        }
        let term: f64 = slices.iter().map(|s| s * s).sum();
        if keep.len().is_multiple_of(2) {
            apart += term;
        } else {
            apart -= term;
        }
    }
    let mf = m as f64;
    let second_moment =
        mf.powi(d as i32 - 1) * diag + (1.0 - 1.0 / mf).powi(-(d as i32 - 1)) * apart;
    Ok(Moments {
        mean,
        second_moment,
    })
}

/// [`exact_moments_cells`] specialised to a product box, where both sums
/// factor over coordinates. Cost `O(d m)`.
pub fn exact_moments_box(m: usize, bx: &AxisBox) -> Result<Moments> {
    if m < 2 {
        return Err(Error::domain("need m >= 2"));
    }
    let d = bx.dim();
    let mut diag = 1.0;
    let mut apart = 1.0;
    for i in 0..d {
        let l: Vec<f64> = (0..m).map(|c| bx.overlap(i, c, m)).collect();
        let s: f64 = l.iter().sum();
        let s2: f64 = l.iter().map(|x| x * x).sum();
        diag *= s2;
        apart *= s * s - s2;
    }
    let mf = m as f64;
    Ok(Moments {
        mean: bx.volume(),
        second_moment: mf.powi(d as i32 - 1) * diag
            + (1.0 - 1.0 / mf).powi(-(d as i32 - 1)) * apart,
    })
}

/// Moments of `C^tau(A)` by enumerating all `(m!)^d` tuples.
pub fn brute_force_moments(m: usize, bx: &AxisBox) -> Result<Moments> {
    let d = bx.dim();
    if m > 4 || d > 3 {
        return Err(Error::domain("brute force limited to m <= 4, d <= 3"));
    }
    let perms = all_permutations(m);
    let mut idx = vec![0usize; d];
    let (mut s1, mut s2, mut count) = (0.0, 0.0, 0.0);
    loop {
        let tuple = idx.iter().map(|&i| perms[i].clone()).collect();
        let c = PermutationCoupling::from_permutations(tuple)?.mass(bx)?;
        s1 += c;
        s2 += c * c;
        count += 1.0;
        if !odometer(&mut idx, perms.len()) {
            break;
        }
    }
    Ok(Moments {
        mean: s1 / count,
        second_moment: s2 / count,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::stream_rng;

    #[test]
    fn permutation_validation() {
        assert!(Permutation::new(vec![0, 0]).is_err());
        assert!(Permutation::new(vec![0, 2]).is_err());
        let p = Permutation::new(vec![2, 0, 1]).unwrap();
        assert_eq!(
            p.apply(&[10.0, 20.0, 30.0]).unwrap(),
            vec![30.0, 10.0, 20.0]
        );
        assert_eq!(p.inverse().as_slice(), &[1, 2, 0]);
        assert!(p.apply(&[1.0]).is_err());
    }

    #[test]
    fn enumerates_all_permutations() {
        assert_eq!(all_permutations(4).len(), 24);
        assert_eq!(all_permutations(1).len(), 1);
    }

    #[test]
    fn identity_tuple_is_diagonal() {
        let c = PermutationCoupling::from_permutations(vec![Permutation::identity(5); 3]).unwrap();
        for j in 0..5 {
            assert_eq!(c.cell(j), &[j, j, j]);
        }
        assert!(c.marginals_uniform());
        assert_eq!(c.cell_mass(), 0.2);
        let full = AxisBox::cube(0.0, 1.0, 3).unwrap();
        assert!((c.mass(&full).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn single_marginal_is_lebesgue() {
        let mut rng = stream_rng(4, 0);
        let c =
            PermutationCoupling::from_permutations(vec![Permutation::random(7, &mut rng)]).unwrap();
        let bx = AxisBox::new(vec![0.13], vec![0.58]).unwrap();
        assert!((c.mass(&bx).unwrap() - 0.45).abs() < 1e-15);
    }

    #[test]
    fn degree_mismatch_rejected() {
        let r = PermutationCoupling::from_permutations(vec![
            Permutation::identity(3),
            Permutation::identity(4),
        ]);
        assert!(matches!(r, Err(Error::Domain(_))));
    }

    #[test]
    fn snb_membership_on_every_draw() {
        let mut rng = stream_rng(5, 0);
        let block = IndexBlock::new(9, vec![1, 4, 7]).unwrap();
        for _ in 0..200 {
            let s = sample_uniform_snb(&block, &mut rng);
            assert!(block.contains(&s));
        }
        assert!(IndexBlock::new(3, vec![0, 3]).is_err());
        assert!(IndexBlock::new(3, vec![1, 1]).is_err());
    }

    #[test]
    fn box_density_integrates_to_one() {
        for d in 1..6 {
            for p in [0.1f64, 0.381, 0.9] {
                let lower = (1.0 - p).powi(-(d - 1)) * (1.0 - p).powi(d);
                let upper = p.powi(-(d - 1)) * p.powi(d);
                assert!((lower + upper - 1.0).abs() < 1e-12);
                let below = vec![0.5 * (1.0 - p); d as usize];
                assert_eq!(
                    box_copula_density(&below, p).unwrap(),
                    (1.0 - p).powi(-(d - 1))
                );
            }
        }
        assert_eq!(box_copula_density(&[0.1, 0.95], 0.2).unwrap(), 0.0);
        assert!(box_copula_density(&[0.1], 1.0).is_err());
        assert!(BoxProductCoupling::with_upper_mass(0.0, 2).is_err());
    }

    #[test]
    fn box_sample_respects_blocks() {
        let mut rng = stream_rng(6, 0);
        let c = BoxProductCoupling::with_upper_mass(0.3, 4).unwrap();
        let mut buf = vec![0.0; 4];
        for _ in 0..1000 {
            let upper = c.sample_into(&mut rng, &mut buf);
            assert!(buf.iter().all(|&z| (z >= c.q) == upper));
        }
    }

    #[test]
    fn moments_two_by_two_quarter_box() {
        let bx = AxisBox::cube(0.0, 0.5, 2).unwrap();
        let exact = exact_moments_box(2, &bx).unwrap();
        assert!((exact.mean - 0.25).abs() < 1e-15);
        assert!((exact.variance() - 1.0 / 16.0).abs() < 1e-15);
        let brute = brute_force_moments(2, &bx).unwrap();
        assert!((brute.mean - 0.25).abs() < 1e-15);
        assert!((brute.second_moment - exact.second_moment).abs() < 1e-15);
    }

    #[test]
    fn restrict_rejects_mixed_blocks() {
        let a = Permutation::new(vec![0, 1, 2, 3]).unwrap();
        let b = Permutation::new(vec![2, 3, 0, 1]).unwrap();
        let c = PermutationCoupling::from_permutations(vec![a, b]).unwrap();
        assert!(c.restrict_upper_block(2).is_err());
    }

    #[test]
    fn combination_weight_checks() {
        let v = vec![vec![0.0, 1.0], vec![1.0, 0.0]];
        assert!(convex_combination_law(&v, &[0.5, 0.6]).is_err());
        assert!(convex_combination_law(&v, &[1.5, -0.5]).is_err());
        assert!(convex_combination_law(&v, &[1.0]).is_err());
        let law = convex_combination_law(&v, &[0.5, 0.5]).unwrap();
        assert_eq!(law.atoms(), &[0.5, 0.5]);
    }
}
