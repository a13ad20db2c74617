use alloc::collections::BTreeSet;
use alloc::vec;
use alloc::vec::Vec;

use num_traits::Zero;

use super::{tau_from_spine, CubicError, TauSequence, TruncatedSpine};
use crate::lamination::Rat;
use crate::twistlat::{SpineDescriptor, VertexOrbit};

/// Local symmetry orders along the spine of a cubic with two fundamental
/// edges: `upper[n-1]` at `u_n` (`n = 1..=L`, the last being the lower
/// critical vertex) and `lower[n-1]` at `v_n` (`n = 1..L-1`).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LocalSymmetry {
    pub upper: Vec<u64>,
    pub lower: Vec<u64>,
}

/// Whether `f^{L-n}(c_2)` sits on the spine vertex `u_n`, read off the
/// central gap at level `n - 1`.
pub fn orbit_on_spine(s: &TruncatedSpine) -> Vec<bool> {
    let len = s.len();
    (1..=len).map(|n| s.in_central_gap(n - 1, (len - n) as u32)).collect()
}

/// `J(n)`: how many of `u_1..u_n` carry a point of the lower critical orbit.
pub fn lower_orbit_hits(s: &TruncatedSpine) -> Vec<u32> {
    let on = orbit_on_spine(s);
    let mut out = Vec::with_capacity(on.len());
    let mut acc = 0;
    for b in on {
        acc += u32::from(b);
        out.push(acc);
    }
    out
}

fn halves(r: Rat) -> [Rat; 2] {
    let h = r / 2;
    [h, h + Rat::new(1, 2)]
}

fn wrap(r: Rat) -> Rat {
    r - r.floor()
}

/// Every assignment of rotations to the vertices `1..=len` with
/// `2ρ(n) = ρ(τ(n))`, `ρ(0) = 0` and `allowed(n, ρ)`; returns, per vertex,
/// the set of rotations seen.
fn rotation_sets(tau: &TauSequence, len: usize, allowed: &dyn Fn(usize, Rat) -> bool) -> Vec<BTreeSet<Rat>> {
    let mut seen = vec![BTreeSet::new(); len + 1];
    let mut rho = vec![Rat::zero(); len + 1];
    fn go(
        n: usize,
        len: usize,
        tau: &TauSequence,
        allowed: &dyn Fn(usize, Rat) -> bool,
        rho: &mut Vec<Rat>,
        seen: &mut Vec<BTreeSet<Rat>>,
    ) {
        if n > len {
            for (i, r) in rho.iter().enumerate() {
                seen[i].insert(*r);
            }
            return;
        }
        let parent = rho[tau.tau(n as u32) as usize];
        for r in halves(parent) {
            let r = wrap(r);
            if allowed(n, r) {
                rho[n] = r;
                go(n + 1, len, tau, allowed, rho, seen);
            }
        }
    }
    go(1, len, tau, allowed, &mut rho, &mut seen);
    seen
}

/// Local symmetry orders on a two-edge spine: the rotations at each spine
/// vertex that extend to an automorphism of the first-return map.
pub fn local_symmetry(s: &TruncatedSpine) -> Result<LocalSymmetry, CubicError> {
    if s.fund_edges() != 2 {
        return Err(CubicError::FundEdges(s.fund_edges()));
    }
    if s.is_empty() {
        return Err(CubicError::EmptySpine);
    }
    let len = s.len();
    let tau = tau_from_spine(s);
    let on = orbit_on_spine(s);
    // u_L is the figure-8 around c2, symmetric under the half turn
    let upper_ok = |n: usize, r: Rat| {
        if n == len {
            r.is_zero() || r == Rat::new(1, 2)
        } else {
            !on[n - 1] || r.is_zero()
        }
    };
    let upper = rotation_sets(&tau, len, &upper_ok);
    let levels = s.levels();
    let lower_ok = |n: usize, r: Rat| levels[n].rotate(r) == levels[n];
    let lower = if len > 1 {
        let sub = TauSequence::new(tau.values()[..len - 1].to_vec(), 2)?;
        rotation_sets(&sub, len - 1, &lower_ok)
    } else {
        vec![BTreeSet::new()]
    };
    let order = |set: &BTreeSet<Rat>| set.len() as u64;
    Ok(LocalSymmetry {
        upper: upper[1..].iter().map(order).collect(),
        lower: lower[1..].iter().map(order).collect(),
    })
}

/// Cumulative relative moduli `S_0..S_L`, `S_n = Σ_{i<=n} 2^{-depth(i)}`.
fn modulus_sums(tau: &TauSequence) -> Vec<Rat> {
    let mut out = vec![Rat::zero()];
    for n in 1..=tau.len() as u32 {
        let prev = *out.last().unwrap();
        out.push(prev + Rat::new(1, 1i64 << tau.depth(n)));
    }
    out
}

/// The counting descriptor of a two-edge cubic spine.
///
/// Levels alternate `u_1, v_1, u_2, ..., v_{L-1}, u_L`; every spine vertex has
/// local degree 2. A unit twist in the first fundamental subannulus turns
/// `u_n` by `S_{n-1}` and `v_n` by `S_n`; in the second, both by `S_n`.
pub fn spine_descriptor(s: &TruncatedSpine) -> Result<SpineDescriptor, CubicError> {
    let sym_orders = local_symmetry(s)?;
    let tau = tau_from_spine(s);
    let sums = modulus_sums(&tau);
    let len = s.len();
    let mut levels = Vec::with_capacity(2 * len - 1);
    for n in 1..=len {
        levels.push(vec![VertexOrbit {
            orbit_len: 1,
            degree: 2,
            symmetry: sym_orders.upper[n - 1],
            weight: vec![sums[n - 1], sums[n]],
        }]);
        if n < len {
            levels.push(vec![VertexOrbit {
                orbit_len: 1,
                degree: 2,
                symmetry: sym_orders.lower[n - 1],
                weight: vec![sums[n], sums[n]],
            }]);
        }
    }
    Ok(SpineDescriptor {
        degree: 3,
        fund_symmetries: vec![1, 1],
        levels,
        open_ended: false,
    })
}
