//! Lattice chains and their pairing with discrete forms.

use super::{ComplexOperatorFamily, DiscreteForm};
use crate::diffop::MultiIndex;
use crate::error::{Error, Result};
use crate::grid::{Grid, GridFunction};
use crate::C64;

/// A directed grid edge from vertex `start` along `axis`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub start: usize,
    pub axis: usize,
    pub orientation: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Chain {
    /// Weighted vertices.
    Points(Vec<(usize, f64)>),
    /// Oriented edges; an edge traversed against its axis carries orientation -1.
    Edges(Vec<Edge>),
}

impl Chain {
    /// A path through the listed lattice vertices; consecutive vertices must
    /// be neighbours (wrapping on periodic grids).
    pub fn path(grid: &Grid, vertices: &[[usize; 2]]) -> Result<Chain> {
        let shape: Vec<usize> = grid.axes().iter().map(|a| a.points).collect();
        let mut edges = Vec::with_capacity(vertices.len().saturating_sub(1));
        for w in vertices.windows(2) {
            let (a, b) = (w[0], w[1]);
            for (k, v) in [a, b].iter().enumerate() {
                if (0..grid.dim()).any(|j| v[j] >= shape[j]) || (grid.dim() == 1 && v[1] != 0) {
                    return Err(Error::ChainOutsideGrid(format!("vertex {:?} (#{k})", v)));
                }
            }
            let mut step = None;
            for j in 0..grid.dim() {
                if a[j] == b[j] {
                    continue;
                }
                if step.is_some() {
                    return Err(Error::ChainOutsideGrid(format!("{a:?} -> {b:?} is not a lattice step")));
                }
                let n = shape[j];
                let fwd = (a[j] + 1) % n == b[j] && (grid.is_periodic() || a[j] + 1 < n);
                let bwd = (b[j] + 1) % n == a[j] && (grid.is_periodic() || b[j] + 1 < n);
                step = if fwd {
                    Some(Edge { start: grid.index(a), axis: j, orientation: 1.0 })
                } else if bwd {
                    Some(Edge { start: grid.index(b), axis: j, orientation: -1.0 })
                } else {
                    return Err(Error::ChainOutsideGrid(format!("{a:?} -> {b:?} is not a lattice step")));
                };
            }
            edges.push(step.ok_or_else(|| Error::ChainOutsideGrid(format!("repeated vertex {a:?}")))?);
        }
        Ok(Chain::Edges(edges))
    }

    /// The closed loop `x_1 = const` around a periodic grid along `axis`.
    pub fn axis_loop(grid: &Grid, axis: usize, offset: usize) -> Result<Chain> {
        if !grid.is_periodic() {
            return Err(Error::InvalidGrid("axis loops need a periodic grid".into()));
        }
        let n = grid.axis(axis).points;
        let verts: Vec<[usize; 2]> = (0..=n)
            .map(|i| {
                let mut v = [0, 0];
                v[axis] = i % n;
                if grid.dim() > 1 {
                    v[1 - axis] = offset;
                }
                v
            })
            .collect();
        Chain::path(grid, &verts)
    }

    pub fn degree(&self) -> usize {
        match self {
            Chain::Points(_) => 0,
            Chain::Edges(_) => 1,
        }
    }

    /// Boundary of a one-chain, empty for points.
    pub fn boundary(&self, grid: &Grid) -> Chain {
        match self {
            Chain::Points(_) => Chain::Points(Vec::new()),
            Chain::Edges(edges) => {
                let mut pts = Vec::with_capacity(2 * edges.len());
                for e in edges {
                    let mut v = grid.unindex(e.start);
                    let n = grid.axis(e.axis).points;
                    v[e.axis] = (v[e.axis] + 1) % n;
                    pts.push((grid.index(v), e.orientation));
                    pts.push((e.start, -e.orientation));
                }
                Chain::Points(pts)
            }
        }
    }
}

/// `<omega, c>` for a scalar form: vertex values for points, `h_j omega_j`
/// at the start vertex for each edge.
pub fn chain_pairing(omega: &DiscreteForm, chain: &Chain) -> Result<C64> {
    if omega.channels() != 1 {
        return Err(Error::InvalidForm("chains pair with scalar forms".into()));
    }
    if omega.degree() != chain.degree() {
        return Err(Error::InvalidForm(format!(
            "a {}-form against a {}-chain",
            omega.degree(),
            chain.degree()
        )));
    }
    let grid = omega.grid();
    let mut acc = C64::new(0.0, 0.0);
    match chain {
        Chain::Points(pts) => {
            for &(idx, w) in pts {
                acc += omega.components()[0].get(idx, 0) * w;
            }
        }
        Chain::Edges(edges) => {
            for e in edges {
                let h = grid.spacing(e.axis);
                acc += omega.component(&[e.axis]).expect("one-form component").get(e.start, 0) * (h * e.orientation);
            }
        }
    }
    Ok(acc)
}

/// `Z[phi, beta]`: the componentwise pairing `phi^H beta` of a `C^N`-valued
/// form with a fixed `C^N` function. Defined for families whose leading
/// coefficients are `I_N` on their own axis.
pub fn pairing_form(fam: &ComplexOperatorFamily, phi: &GridFunction, beta: &DiscreteForm) -> Result<DiscreteForm> {
    let m = fam.dim();
    for (j, op) in fam.ops().iter().enumerate() {
        let lead = op.coefficient(&MultiIndex::axis(m, j, 1)).and_then(|c| c.as_constant());
        let ok = op.order() == 1
            && lead.is_some_and(|c| (c - crate::CMatrix::identity(fam.channels(), fam.channels())).norm() == 0.0);
        if !ok {
            return Err(Error::InvalidOperator(format!("L_{} does not have identity leading part", j + 1)));
        }
    }
    if phi.channels() != beta.channels() {
        return Err(Error::DimensionMismatch("phi and beta channels differ".into()));
    }
    let comps = beta
        .components()
        .iter()
        .map(|c| phi.pointwise_pairing(c))
        .collect::<Result<Vec<_>>>()?;
    DiscreteForm::new(beta.degree(), comps)
}
