use alloc::vec;
use alloc::vec::Vec;

use num_traits::{One, Zero};

use super::CubicError;
use crate::lamination::Rat;

/// Longest τ accepted. Depths and modulus denominators are powers of two
/// up to `2^L`, and this keeps every sum of moduli inside `i64`.
pub const MAX_TAU_LEN: usize = 48;

/// The Yoccoz τ-function `τ(1..=L)` of a cubic, with the number of
/// fundamental edges (1 when `G(c2) = G(c1)/3^L` exactly, otherwise 2).
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TauSequence {
    values: Vec<u32>,
    fund_edges: u8,
}

impl TauSequence {
    pub fn new(values: Vec<u32>, fund_edges: u8) -> Result<Self, CubicError> {
        if fund_edges != 1 && fund_edges != 2 {
            return Err(CubicError::FundEdges(fund_edges));
        }
        if values.len() > MAX_TAU_LEN {
            return Err(CubicError::TauTooLong(values.len()));
        }
        for (i, &t) in values.iter().enumerate() {
            let n = i as u32 + 1;
            if t >= n {
                return Err(CubicError::TauTooLarge { n, value: t });
            }
            if i > 0 && t > values[i - 1] + 1 {
                return Err(CubicError::TauJump { n, value: t });
            }
        }
        Ok(TauSequence { values, fund_edges })
    }

    /// Length `L`.
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[u32] {
        &self.values
    }

    pub fn fund_edges(&self) -> u8 {
        self.fund_edges
    }

    /// `τ(n)` for `1 <= n <= L`.
    pub fn tau(&self, n: u32) -> u32 {
        self.values[n as usize - 1]
    }

    /// Number of τ steps from `n` down to 0.
    pub fn depth(&self, n: u32) -> u32 {
        let mut k = 0;
        let mut m = n;
        while m > 0 {
            m = self.tau(m);
            k += 1;
        }
        k
    }

    /// The τ-orbit `n, τ(n), τ²(n), ..., 0`.
    pub fn orbit(&self, n: u32) -> Vec<u32> {
        let mut out = vec![n];
        let mut m = n;
        while m > 0 {
            m = self.tau(m);
            out.push(m);
        }
        out
    }
}

/// Whether `n` lies on the τ-orbit of `i` (`i` itself included).
fn on_orbit(tau: &[u32], i: usize, n: usize) -> bool {
    let mut m = i;
    while m > n {
        m = tau[m - 1] as usize;
    }
    m == n
}

/// Levels `0 < n < L` where the orbit of `c2` meets `B_n \ P_{n+1}`: some
/// `i` with `n` on the τ-orbit of `i` but `n + 1` off the orbit of `i + 1`,
/// or (one fundamental edge) `n` on the orbit of `L`. Ascending, with the
/// sentinel `0` first.
pub fn marked_levels(tau: &TauSequence) -> Vec<u32> {
    let l = tau.len();
    let v = tau.values();
    let mut out = vec![0];
    for n in 1..l {
        let off_center = (n + 1..l).any(|i| on_orbit(v, i, n) && !on_orbit(v, i + 1, n + 1));
        let on_curve = tau.fund_edges() == 1 && on_orbit(v, v[l - 1] as usize, n);
        if off_center || on_curve {
            out.push(n as u32);
        }
    }
    out
}

/// The narrower test that only looks at first returns: `τ(i) = n` and
/// `τ(i+1) <= n` for some `i < L`, or (one edge) `n = τ^k(L)`, `k > 0`.
/// Misses levels reached by later returns, e.g. level 1 of `(0,1,2,0)`.
pub fn first_return_marked_levels(tau: &TauSequence) -> Vec<u32> {
    let l = tau.len() as u32;
    let mut out = vec![0];
    for n in 1..l {
        let first = (1..l).any(|i| tau.tau(i) == n && tau.tau(i + 1) <= n);
        let second = tau.fund_edges() == 1 && tau.orbit(l)[1..].contains(&n);
        if first || second {
            out.push(n);
        }
    }
    out
}

/// `m(n) = 2^{-k(n)}` for `n = 1..L-1`.
pub fn relative_moduli(tau: &TauSequence) -> Vec<Rat> {
    let l = tau.len() as u32;
    (1..l).map(|n| Rat::new(1, 1i64 << tau.depth(n))).collect()
}

/// Per marked level `l_j`: the modulus sum `m_j` and its twist `t_j`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MarkedLevel {
    pub level: u64,
    pub modulus: Rat,
    pub twist: u64,
}

/// Marked levels with their cumulative moduli and twists, sentinel included.
pub fn marked_data(tau: &TauSequence) -> Vec<MarkedLevel> {
    let m = relative_moduli(tau);
    marked_levels(tau)
        .into_iter()
        .map(|l| {
            let modulus: Rat = m[..l as usize].iter().copied().sum();
            MarkedLevel {
                level: l as u64,
                modulus,
                twist: *modulus.denom() as u64,
            }
        })
        .collect()
}

/// `max_j 2^j / max{t_i : i <= j}` over the sentinel-prefixed marked levels.
/// The quotients are exact for realizable τ, where the running maximum at
/// most doubles per marked level.
pub fn top_count(tau: &TauSequence) -> u64 {
    let mut best_t = 1u64;
    let mut top = 1;
    for (j, d) in marked_data(tau).iter().enumerate() {
        best_t = best_t.max(d.twist);
        top = top.max((1u64 << j) / best_t);
    }
    top
}

/// Twist periods `T_0..T_{L-1}`: `T_n = max{t_i : l_i <= n}`.
pub fn cubic_twist_periods(tau: &TauSequence) -> Vec<u64> {
    let data = marked_data(tau);
    (0..tau.len().max(1) as u64)
        .map(|n| data.iter().filter(|d| d.level <= n).map(|d| d.twist).max().unwrap_or(1))
        .collect()
}

/// Builds the sentinel-prefixed marked-level table from explicit `(l_j, m_j)`
/// pairs for `j >= 1`, as produced by a rule or a τ prefix.
pub fn marked_table(pairs: &[(u64, Rat)]) -> Result<Vec<MarkedLevel>, CubicError> {
    let mut out = vec![MarkedLevel {
        level: 0,
        modulus: Rat::zero(),
        twist: 1,
    }];
    for &(level, modulus) in pairs {
        let prev = out.last().unwrap();
        if level <= prev.level || modulus <= prev.modulus {
            return Err(CubicError::NonMonotone(level));
        }
        let den = *modulus.denom() as u64;
        if !den.is_power_of_two() {
            return Err(CubicError::NonDyadic(level));
        }
        out.push(MarkedLevel {
            level,
            modulus,
            twist: den,
        });
    }
    Ok(out)
}

/// Outcome of following marked-level data out to a cap.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SolenoidReport {
    /// `(T_{l_j}, 2^j / T_{l_j})` for `j = 0..=J`.
    pub per_j: Vec<(u64, u64)>,
    /// The twist periods kept growing up to the cap.
    pub twist_unbounded: bool,
    /// Stabilized ratio when the twist periods are unbounded.
    pub sol: Option<u64>,
    /// Bounded twist periods: the classes form circles.
    pub circles: bool,
}

/// Follows `T_{l_j}` and `2^j/T_{l_j}` through the supplied data.
///
/// The twist periods count as unbounded when `T` doubled in each of the last
/// `window` steps; the ratio is then reported as the solenoid count if it was
/// constant over that window. Nothing is asserted about the true limit. Only
/// the first 64 entries are read, since `2^j` must fit in a `u64`.
pub fn solenoid_analysis(data: &[MarkedLevel], window: usize) -> SolenoidReport {
    let data = &data[..data.len().min(64)];
    let mut per_j = Vec::with_capacity(data.len());
    let mut best_t = 1u64;
    for (j, d) in data.iter().enumerate() {
        best_t = best_t.max(d.twist);
        per_j.push((best_t, (1u64 << j) / best_t));
    }
    let n = per_j.len();
    let w = window.min(n.saturating_sub(1));
    let tail = &per_j[n - w - 1..];
    let growing = w > 0 && tail.windows(2).all(|p| p[1].0 == 2 * p[0].0);
    let constant = w > 0 && tail.windows(2).all(|p| p[1].1 == p[0].1);
    SolenoidReport {
        sol: (growing && constant).then(|| per_j[n - 1].1),
        twist_unbounded: growing,
        circles: !growing,
        per_j,
    }
}

/// Blocks of the doubling rule whose moduli fit in `i64` with room to spare;
/// the numerators grow like `3^j`.
pub const DOUBLING_RULE_MAX: usize = 38;

/// The doubling rule `l_1 = 2`, `l_2 = 4`, `l_j = 2 l_{j-1} + 1`, with
/// `m_1 = 1`, `m_2 = 3/2`, `m_j = m_{j-1} + 1/2 + m_{j-1}/2`. `cap` is
/// clamped to [`DOUBLING_RULE_MAX`].
pub fn doubling_rule(cap: usize) -> Vec<(u64, Rat)> {
    let cap = cap.min(DOUBLING_RULE_MAX);
    let mut out: Vec<(u64, Rat)> = Vec::with_capacity(cap);
    for j in 1..=cap {
        let next = match j {
            1 => (2, Rat::one()),
            2 => (4, Rat::new(3, 2)),
            _ => {
                let (l, m) = out[j - 2];
                (2 * l + 1, m + Rat::new(1, 2) + m / 2)
            }
        };
        out.push(next);
    }
    out
}

/// The τ prefix `0, 0..=l_1, 0..=l_2, ...` whose marked levels are the
/// doubling-rule levels, through block `blocks`.
pub fn doubling_tau_prefix(blocks: usize) -> Vec<u32> {
    let mut tau = vec![0u32];
    for (l, _) in doubling_rule(blocks) {
        tau.extend(0..=l as u32);
    }
    tau
}

/// Marked levels `l_j` and cumulative moduli `m_j` read off an (unbounded)
/// τ prefix. Only levels whose marking is decided inside the prefix are
/// reported; the curve condition of one-edge spines never applies.
pub fn marked_pairs_from_prefix(tau: &[u32]) -> Vec<(u64, Rat)> {
    let len = tau.len();
    let mut depth = vec![0u32; len + 1];
    for (n, &t) in tau.iter().enumerate() {
        depth[n + 1] = depth[t as usize] + 1;
    }
    let mut out = Vec::new();
    let mut sum = Rat::zero();
    for (n, &d) in depth.iter().enumerate().take(len).skip(1) {
        sum += Rat::new(1, 1i64 << d);
        if (n + 1..len).any(|i| on_orbit(tau, i, n) && !on_orbit(tau, i + 1, n + 1)) {
            out.push((n as u64, sum));
        }
    }
    out
}

/// A Branner–Hubbard marked grid: cell `(i, n)` is marked when the level-`n`
/// lamination carries the symbol `i`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MarkedGrid {
    len: u32,
    cells: Vec<(u32, u32)>,
}

impl MarkedGrid {
    pub fn new(len: u32, mut cells: Vec<(u32, u32)>) -> Self {
        cells.sort();
        cells.dedup();
        MarkedGrid { len, cells }
    }

    pub fn len(&self) -> u32 {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn cells(&self) -> &[(u32, u32)] {
        &self.cells
    }

    pub fn is_marked(&self, i: u32, n: u32) -> bool {
        self.cells.binary_search(&(i, n)).is_ok()
    }

    /// Recovers `τ(m) = max{n < m : (m - n, n) marked}`.
    pub fn to_tau(&self, fund_edges: u8) -> Result<TauSequence, CubicError> {
        let values = (1..=self.len)
            .map(|m| (0..m).rev().find(|&n| self.is_marked(m - n, n)).unwrap_or(0))
            .collect();
        TauSequence::new(values, fund_edges)
    }
}

/// `(i, n)` with `i + n <= L` is marked iff `n` lies in the τ-orbit of `i + n`.
/// The column `n = 0` is always marked.
pub fn tableau(tau: &TauSequence) -> MarkedGrid {
    let l = tau.len() as u32;
    let mut cells = Vec::new();
    for m in 0..=l {
        for n in tau_orbit_or_zero(tau, m) {
            cells.push((m - n, n));
        }
    }
    MarkedGrid::new(l, cells)
}

fn tau_orbit_or_zero(tau: &TauSequence, m: u32) -> Vec<u32> {
    if m == 0 {
        vec![0]
    } else {
        tau.orbit(m)
    }
}
