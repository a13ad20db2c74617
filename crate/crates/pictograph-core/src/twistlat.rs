//! Twist-period lattices and the level-by-level count of conjugacy classes.
//!
//! A restricted basin down to height `t_i` is extended one spine level at a
//! time. Each level contributes gluing choices (counted up to local symmetry
//! and automorphisms) and cuts the twist-period lattice down to the twists
//! that return every new vertex to a symmetric position.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use num_integer::Integer;
use num_traits::{One, Zero};

use crate::lamination::Rat;

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum TwistError {
    #[error("generators span rank {found}, expected {expected}")]
    Rank { expected: usize, found: usize },
    #[error("vector of length {found} in a rank {expected} lattice")]
    Dimension { expected: usize, found: usize },
    #[error("lattice is not contained in the claimed superlattice")]
    NotSublattice,
    #[error("no multiple up to {bound} of a basis vector survives level {level}")]
    BoundExceeded { level: usize, bound: u64 },
    #[error("aut order {l} does not divide {m}")]
    AutOrder { l: u64, m: u64 },
    #[error("level {level}: orbit length {len} does not divide the automorphism order {alpha}")]
    OrbitLength { level: usize, len: u64, alpha: u64 },
    #[error("level {level}: local degree and symmetry must be positive")]
    BadVertex { level: usize },
    #[error("degree must be at least 2 and at least one fundamental edge is needed")]
    BadDescriptor,
    #[error("level {level}: class count {num}/{den} is not an integer")]
    NonIntegralCount { level: usize, num: u64, den: u64 },
    #[error("level {level}: Top(D, i) = {value} is not a positive integer")]
    NonIntegralTop { level: usize, value: Rat },
    #[error("level {level}: class count dropped")]
    Shrinking { level: usize },
    #[error("counts changed on a level with full local symmetry")]
    Unstable,
    #[error("arithmetic overflow")]
    Overflow,
}

/// A full-rank lattice in `Q^N`, stored as integer generators over a common
/// denominator `q`. Generator `j` is supported on coordinates `0..=j`, has a
/// positive entry at `j`, and its entries at `i < j` lie in `[0, b_ii)`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TwistLattice {
    denom: i64,
    basis: Vec<Vec<i64>>,
}

fn vec_len_check(n: usize, v: &[Rat]) -> Result<(), TwistError> {
    if v.len() != n {
        return Err(TwistError::Dimension {
            expected: n,
            found: v.len(),
        });
    }
    Ok(())
}

impl TwistLattice {
    /// The lattice generated by `gens` in `Q^rank`.
    pub fn from_generators(rank: usize, gens: &[Vec<Rat>]) -> Result<Self, TwistError> {
        let mut q: i64 = 1;
        for g in gens {
            vec_len_check(rank, g)?;
            for x in g {
                q = q.lcm(x.denom());
            }
        }
        let ints: Vec<Vec<i128>> = gens
            .iter()
            .map(|g| {
                g.iter()
                    .map(|x| (*x.numer() as i128) * (q / x.denom()) as i128)
                    .collect()
            })
            .collect();
        let basis = hnf(rank, ints)?;
        // shrink the denominator as far as the entries allow
        let mut g = q as i128;
        for row in &basis {
            for &x in row {
                g = g.gcd(&x);
            }
        }
        let to_i64 = |x: i128| i64::try_from(x).map_err(|_| TwistError::Overflow);
        let basis = basis
            .into_iter()
            .map(|row| row.into_iter().map(|x| to_i64(x / g)).collect::<Result<Vec<_>, _>>())
            .collect::<Result<Vec<_>, _>>()?;
        Ok(TwistLattice {
            denom: to_i64(q as i128 / g)?,
            basis,
        })
    }

    /// `Z^rank`.
    pub fn standard(rank: usize) -> Self {
        let basis = (0..rank)
            .map(|j| (0..rank).map(|i| i64::from(i == j)).collect())
            .collect();
        TwistLattice { denom: 1, basis }
    }

    pub fn rank(&self) -> usize {
        self.basis.len()
    }

    pub fn denominator(&self) -> i64 {
        self.denom
    }

    /// Integer generators, each scaled by the denominator.
    pub fn basis(&self) -> &[Vec<i64>] {
        &self.basis
    }

    pub fn generators(&self) -> Vec<Vec<Rat>> {
        self.basis
            .iter()
            .map(|g| g.iter().map(|&x| Rat::new(x, self.denom)).collect())
            .collect()
    }

    pub fn contains(&self, v: &[Rat]) -> bool {
        if v.len() != self.rank() {
            return false;
        }
        let mut w = Vec::with_capacity(v.len());
        for x in v {
            let s = *x * self.denom;
            if !s.is_integer() {
                return false;
            }
            w.push(s.to_integer() as i128);
        }
        for i in (0..self.rank()).rev() {
            let p = self.basis[i][i] as i128;
            if w[i] % p != 0 {
                return false;
            }
            let c = w[i] / p;
            for (k, b) in self.basis[i].iter().enumerate() {
                w[k] -= c * *b as i128;
            }
        }
        true
    }

    /// Covolume, the absolute determinant of the generators.
    pub fn covolume(&self) -> Ratio128 {
        let mut num: i128 = 1;
        let mut den: i128 = 1;
        for (i, row) in self.basis.iter().enumerate() {
            num *= row[i] as i128;
            den *= self.denom as i128;
        }
        Ratio128::new(num, den)
    }

    pub fn is_sublattice_of(&self, sup: &TwistLattice) -> bool {
        self.rank() == sup.rank() && self.generators().iter().all(|g| sup.contains(g))
    }
}

/// Rationals wide enough for covolumes of moderately deep refinements.
pub type Ratio128 = num_rational::Ratio<i128>;

impl fmt::Display for TwistLattice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "<")?;
        for (j, g) in self.generators().iter().enumerate() {
            if j > 0 {
                write!(f, ", ")?;
            }
            let mut first = true;
            for (i, c) in g.iter().enumerate() {
                if c.is_zero() {
                    continue;
                }
                if !first {
                    write!(f, "{}", if *c < Rat::zero() { "-" } else { "+" })?;
                } else if *c < Rat::zero() {
                    write!(f, "-")?;
                }
                first = false;
                let a = if *c < Rat::zero() { -*c } else { *c };
                if !a.is_one() {
                    write!(f, "{}", a)?;
                }
                write!(f, "e{}", i + 1)?;
            }
        }
        write!(f, ">")
    }
}

/// Generator-column Hermite normal form, generator `i` ending at coordinate `i`.
fn hnf(n: usize, mut vs: Vec<Vec<i128>>) -> Result<Vec<Vec<i128>>, TwistError> {
    let mut basis = vec![Vec::new(); n];
    let mut found = 0;
    for i in (0..n).rev() {
        vs.retain(|v| v.iter().any(|x| *x != 0));
        loop {
            let nz: Vec<usize> = (0..vs.len()).filter(|&k| vs[k][i] != 0).collect();
            if nz.len() <= 1 {
                break;
            }
            let p = *nz.iter().min_by_key(|&&k| vs[k][i].abs()).unwrap();
            let pivot = vs[p].clone();
            for &k in &nz {
                if k == p {
                    continue;
                }
                let c = vs[k][i] / pivot[i];
                for (x, y) in vs[k].iter_mut().zip(&pivot) {
                    *x -= c * y;
                }
            }
        }
        let Some(p) = (0..vs.len()).find(|&k| vs[k][i] != 0) else {
            continue;
        };
        let mut g = vs.swap_remove(p);
        if g[i] < 0 {
            g.iter_mut().for_each(|x| *x = -*x);
        }
        basis[i] = g;
        found += 1;
    }
    if found != n {
        return Err(TwistError::Rank { expected: n, found });
    }
    for j in 0..n {
        for i in (0..j).rev() {
            let c = Integer::div_floor(&basis[j][i], &basis[i][i]);
            if c != 0 {
                let bi = basis[i].clone();
                for (x, y) in basis[j].iter_mut().zip(&bi) {
                    *x -= c * y;
                }
            }
        }
    }
    Ok(basis)
}

/// `[sup : sub]`, the ratio of covolumes.
pub fn lattice_index(sub: &TwistLattice, sup: &TwistLattice) -> Result<u64, TwistError> {
    if !sub.is_sublattice_of(sup) {
        return Err(TwistError::NotSublattice);
    }
    let r = sub.covolume() / sup.covolume();
    debug_assert!(r.is_integer());
    u64::try_from(r.to_integer()).map_err(|_| TwistError::Overflow)
}

/// Order of the automorphism group of a restricted basin above `t_0`:
/// `gcd{k_0, ..., k_{N-1}, d - 1}`.
pub fn restricted_aut_order(ks: &[u64], d: u64) -> u64 {
    ks.iter().fold(d - 1, |g, k| g.gcd(k))
}

/// Local symmetry order at the image of a vertex of symmetry `k`.
pub fn ascend_symmetry(k: u64, d: u64) -> u64 {
    k / k.gcd(&d)
}

fn unit(n: usize, j: usize) -> Vec<Rat> {
    (0..n).map(|i| if i == j { Rat::one() } else { Rat::zero() }).collect()
}

/// Twist periods above `t_0`: the standard basis together with
/// `(e_{j+1} - e_j)/k_j` for `0 < j < N` and `(e_1 - d e_N)/k_0`.
pub fn base_lattice(ks: &[u64], d: u64) -> Result<TwistLattice, TwistError> {
    let n = ks.len();
    if n == 0 {
        return Err(TwistError::BadDescriptor);
    }
    let mut gens: Vec<Vec<Rat>> = (0..n).map(|j| unit(n, j)).collect();
    for (j, &k) in ks.iter().enumerate().skip(1) {
        let k = Rat::from_integer(k as i64);
        gens.push((0..n).map(|i| (unit(n, j)[i] - unit(n, j - 1)[i]) / k).collect());
    }
    let k0 = Rat::from_integer(ks[0] as i64);
    let d = Rat::from_integer(d as i64);
    gens.push((0..n).map(|i| (unit(n, 0)[i] - d * unit(n, n - 1)[i]) / k0).collect());
    TwistLattice::from_generators(n, &gens)
}

/// Rotation induced at a vertex with weight vector `w` by the twist `tau`.
pub fn rotation_sum(tau: &[Rat], w: &[Rat]) -> Rat {
    tau.iter().zip(w).map(|(a, b)| a * b).sum()
}

/// `x mod 1` in `[0, 1)`.
pub fn frac(x: Rat) -> Rat {
    x - x.floor()
}

/// One spine vertex per orbit of the automorphism group at its level.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct VertexOrbit {
    pub orbit_len: u64,
    pub degree: u64,
    pub symmetry: u64,
    /// Rotation per unit twist in each fundamental subannulus.
    pub weight: Vec<Rat>,
}

/// Everything the class count needs from a pictograph: degree, fundamental
/// symmetries, and per level the spine vertices of local degree above one.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SpineDescriptor {
    pub degree: u64,
    pub fund_symmetries: Vec<u64>,
    pub levels: Vec<Vec<VertexOrbit>>,
    /// The levels come from a rule cut off at a cap rather than a finite
    /// pictograph, so growth at the last level means no stabilization.
    pub open_ended: bool,
}

impl SpineDescriptor {
    pub fn fund_count(&self) -> usize {
        self.fund_symmetries.len()
    }

    pub fn aut_order(&self) -> u64 {
        restricted_aut_order(&self.fund_symmetries, self.degree)
    }

    pub fn validate(&self) -> Result<(), TwistError> {
        if self.degree < 2 || self.fund_symmetries.is_empty() || self.fund_symmetries.contains(&0) {
            return Err(TwistError::BadDescriptor);
        }
        let alpha = self.aut_order();
        let n = self.fund_count();
        for (i, level) in self.levels.iter().enumerate() {
            for v in level {
                if v.orbit_len == 0 || !alpha.is_multiple_of(v.orbit_len) {
                    return Err(TwistError::OrbitLength {
                        level: i + 1,
                        len: v.orbit_len,
                        alpha,
                    });
                }
                if v.degree == 0 || v.symmetry == 0 {
                    return Err(TwistError::BadVertex { level: i + 1 });
                }
                vec_len_check(n, &v.weight)?;
            }
        }
        Ok(())
    }
}

/// Number of orbits of `C_l` on an orbit of length `o` of `C_alpha`.
fn split_orbits(o: u64, alpha: u64, l: u64) -> u64 {
    o * l.gcd(&(alpha / o)) / l
}

fn divisors(m: u64) -> Vec<u64> {
    (1..=m).filter(|l| m.is_multiple_of(*l)).collect()
}

/// Extensions of one class with automorphism order `m` across `level`,
/// keyed by the automorphism order `l | m` of the extension.
///
/// Orbit lengths in `level` are taken with respect to `C_alpha`.
pub fn count_extensions(level: &[VertexOrbit], alpha: u64, m: u64) -> Result<BTreeMap<u64, u64>, TwistError> {
    if !alpha.is_multiple_of(m) {
        return Err(TwistError::AutOrder { l: m, m: alpha });
    }
    let fixed = |l: u64| -> Result<u64, TwistError> {
        let mut prod: u64 = 1;
        for v in level {
            let per = v.degree / v.degree.gcd(&v.symmetry);
            let count = split_orbits(v.orbit_len, alpha, l);
            prod = prod
                .checked_mul(per.checked_pow(count as u32).ok_or(TwistError::Overflow)?)
                .ok_or(TwistError::Overflow)?;
        }
        Ok(prod)
    };
    let divs = divisors(m);
    let mut exact: BTreeMap<u64, u64> = BTreeMap::new();
    for &l in divs.iter().rev() {
        let mut n = fixed(l)?;
        for (&l2, &n2) in &exact {
            if l2 != l && l2 % l == 0 {
                n = n.checked_sub(n2).ok_or(TwistError::Overflow)?;
            }
        }
        exact.insert(l, n);
    }
    let mut out = BTreeMap::new();
    for (l, n) in exact {
        if (l * n) % m != 0 {
            return Err(TwistError::NonIntegralCount {
                level: 0,
                num: l * n,
                den: m,
            });
        }
        if n > 0 {
            out.insert(l, l * n / m);
        }
    }
    Ok(out)
}

fn survives(tau: &[Rat], level: &[VertexOrbit], m: u64, l: u64) -> bool {
    (0..m / l).any(|k| {
        let shift = Rat::new(k as i64, m as i64);
        level.iter().all(|v| {
            let r = rotation_sum(tau, &v.weight) + shift;
            (r * v.symmetry as i64).is_integer()
        })
    })
}

fn scale(v: &[Rat], a: i64) -> Vec<Rat> {
    v.iter().map(|x| x * a).collect()
}

/// Twists in `prev` that return every vertex of `level` to a symmetric
/// position, possibly after one of the `m/l` automorphism cosets.
pub fn refine_lattice(
    prev: &TwistLattice,
    level: &[VertexOrbit],
    m: u64,
    l: u64,
    level_index: usize,
) -> Result<TwistLattice, TwistError> {
    if l == 0 || !m.is_multiple_of(l) {
        return Err(TwistError::AutOrder { l, m });
    }
    let gens = prev.generators();
    let n = prev.rank();
    let mut mults = Vec::with_capacity(n);
    for g in &gens {
        let bound = level.iter().fold(m, |acc, v| {
            let r = rotation_sum(g, &v.weight);
            acc.lcm(&(v.symmetry * *r.denom() as u64))
        });
        let a = (1..=bound)
            .find(|&a| survives(&scale(g, a as i64), level, m, l))
            .ok_or(TwistError::BoundExceeded {
                level: level_index,
                bound,
            })?;
        mults.push(a);
    }
    let mut found: Vec<Vec<Rat>> = gens.iter().zip(&mults).map(|(g, &a)| scale(g, a as i64)).collect();
    let mut idx = vec![0u64; n];
    loop {
        let mut c = 0;
        while c < n {
            idx[c] += 1;
            if idx[c] < mults[c] {
                break;
            }
            idx[c] = 0;
            c += 1;
        }
        if c == n {
            break;
        }
        let v: Vec<Rat> = (0..n)
            .map(|i| gens.iter().zip(&idx).map(|(g, &k)| g[i] * k as i64).sum())
            .collect();
        if survives(&v, level, m, l) {
            found.push(v);
        }
    }
    TwistLattice::from_generators(n, &found)
}

/// Classes sharing an automorphism order and a twist-period lattice.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClassGroup {
    pub aut: u64,
    pub lattice: TwistLattice,
    pub count: u64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LevelReport {
    /// `|B_i(D)|`.
    pub class_count: u64,
    pub aut_profile: BTreeMap<u64, u64>,
    pub groups: Vec<ClassGroup>,
    /// `Top(D, i)`.
    pub top: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TopCount {
    Finite(u64),
    /// The class count was still growing at the cap of an open-ended descriptor.
    Infinite,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConjugacyReport {
    pub base: TwistLattice,
    pub per_level: Vec<LevelReport>,
    pub top: TopCount,
}

fn step(
    groups: &[ClassGroup],
    level: &[VertexOrbit],
    alpha: u64,
    level_index: usize,
) -> Result<Vec<ClassGroup>, TwistError> {
    let mut merged: BTreeMap<(u64, TwistLattice), u64> = BTreeMap::new();
    for g in groups {
        let ext = count_extensions(level, alpha, g.aut).map_err(|e| match e {
            TwistError::NonIntegralCount { num, den, .. } => TwistError::NonIntegralCount {
                level: level_index,
                num,
                den,
            },
            e => e,
        })?;
        for (l, c) in ext {
            let lat = refine_lattice(&g.lattice, level, g.aut, l, level_index)?;
            *merged.entry((l, lat)).or_default() += g.count * c;
        }
    }
    Ok(merged
        .into_iter()
        .map(|((aut, lattice), count)| ClassGroup { aut, lattice, count })
        .collect())
}

fn summarize(base: &TwistLattice, groups: Vec<ClassGroup>, level: usize) -> Result<LevelReport, TwistError> {
    let mut top = Rat::zero();
    let mut aut_profile = BTreeMap::new();
    let mut class_count = 0;
    for g in &groups {
        let idx = lattice_index(&g.lattice, base)?;
        top += Rat::new(g.count as i64, idx as i64);
        *aut_profile.entry(g.aut).or_default() += g.count;
        class_count += g.count;
    }
    if !top.is_integer() || top <= Rat::zero() {
        return Err(TwistError::NonIntegralTop { level, value: top });
    }
    Ok(LevelReport {
        class_count,
        aut_profile,
        groups,
        top: top.to_integer() as u64,
    })
}

const SETTLE_LEVELS: usize = 3;

/// Runs the induction over at most `max_levels` levels of `desc`.
pub fn analyze(desc: &SpineDescriptor, max_levels: usize) -> Result<ConjugacyReport, TwistError> {
    desc.validate()?;
    let alpha = desc.aut_order();
    let base = base_lattice(&desc.fund_symmetries, desc.degree)?;
    let mut groups = vec![ClassGroup {
        aut: alpha,
        lattice: base.clone(),
        count: 1,
    }];
    let mut per_level = vec![summarize(&base, groups.clone(), 0)?];
    let depth = desc.levels.len().min(max_levels);
    for (i, level) in desc.levels[..depth].iter().enumerate() {
        groups = step(&groups, level, alpha, i + 1)?;
        let rep = summarize(&base, groups.clone(), i + 1)?;
        if rep.class_count < per_level.last().unwrap().class_count {
            return Err(TwistError::Shrinking { level: i + 1 });
        }
        per_level.push(rep);
    }
    // below the descriptor every vertex is fully symmetric and untwisted
    if let Some(last) = desc.levels[..depth].last() {
        let settled: Vec<VertexOrbit> = last
            .iter()
            .map(|v| VertexOrbit {
                symmetry: v.degree,
                weight: vec![Rat::zero(); desc.fund_count()],
                ..v.clone()
            })
            .collect();
        let mut g = groups.clone();
        for s in 0..SETTLE_LEVELS {
            g = step(&g, &settled, alpha, depth + s + 1)?;
        }
        if g != groups {
            return Err(TwistError::Unstable);
        }
    }
    let n = per_level.len();
    let grew = n >= 2 && per_level[n - 1].class_count > per_level[n - 2].class_count;
    let top = if desc.open_ended && grew {
        TopCount::Infinite
    } else {
        TopCount::Finite(per_level[n - 1].top)
    };
    Ok(ConjugacyReport { base, per_level, top })
}
