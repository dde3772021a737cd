//! Dense matrices of `d_L`, `*`, `d'_L`, `Delta_L` per degree, harmonic
//! spaces and Hodge decompositions on small periodic grids.

use nalgebra::{DVector, SymmetricEigen};
use serde::Serialize;

use super::{shuffle_sign, subsets, ComplexOperatorFamily, DiscreteForm};
use crate::error::{Error, Result};
use crate::grid::{Grid, GridFunction};
use crate::linalg;
use crate::{CMatrix, C64};

/// Largest grid (in points) for which matrices are assembled.
pub const MAX_ASSEMBLED_POINTS: usize = 32 * 32;

/// Relative eigenvalue threshold below which a mode counts as harmonic.
const NULL_TOL: f64 = 1e-8;

/// `d_L` assembled per degree. The inner product weights every component
/// value by the cell volume, so the weighted adjoint `W_k^-1 d^H W_(k+1)`
/// reduces to the conjugate transpose.
#[derive(Debug, Clone)]
pub struct AssembledComplex {
    grid: Grid,
    channels: usize,
    d: Vec<CMatrix>,
}

/// Harmonic data for one degree.
#[derive(Debug, Clone, Serialize)]
pub struct DegreeReport {
    pub degree: usize,
    pub dim: usize,
    /// `log10` of smallest nonzero over largest zero eigenvalue (floored at machine precision).
    pub sigma_gap: f64,
    pub largest_null: f64,
    pub smallest_nonzero: f64,
    #[serde(skip)]
    pub basis: CMatrix,
}

#[derive(Debug, Clone, Serialize)]
pub struct HarmonicReport {
    pub degrees: Vec<DegreeReport>,
}

impl HarmonicReport {
    pub fn dims(&self) -> Vec<usize> {
        self.degrees.iter().map(|d| d.dim).collect()
    }

    pub fn min_gap(&self) -> f64 {
        self.degrees.iter().map(|d| d.sigma_gap).fold(f64::INFINITY, f64::min)
    }
}

/// Residuals of splitting a form into harmonic, exact and coexact parts.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct DecompositionResidual {
    pub reconstruction: f64,
    pub orthogonality: f64,
    pub harmonic: f64,
    pub exact: f64,
    pub coexact: f64,
}

/// Orthonormal bases of harmonic, `d_L`-image and `d'_L`-image subspaces.
#[derive(Debug, Clone)]
pub struct HodgeBases {
    pub degree: usize,
    pub harmonic: CMatrix,
    pub exact: CMatrix,
    pub coexact: CMatrix,
}

fn block_len(grid: &Grid, channels: usize) -> usize {
    grid.len() * channels
}

impl AssembledComplex {
    pub fn assemble(fam: &ComplexOperatorFamily, grid: &Grid) -> Result<AssembledComplex> {
        if !grid.is_periodic() {
            return Err(Error::InvalidGrid("the complex is realized on periodic grids".into()));
        }
        if grid.len() > MAX_ASSEMBLED_POINTS {
            return Err(Error::InvalidGrid(format!(
                "{} points exceed the assembly cap of {MAX_ASSEMBLED_POINTS}",
                grid.len()
            )));
        }
        if grid.dim() != fam.dim() {
            return Err(Error::DimensionMismatch("grid and family dimensions differ".into()));
        }
        let n = fam.channels();
        let b = block_len(grid, n);
        let mut ls = Vec::with_capacity(fam.dim());
        for op in fam.ops() {
            let mut mat = CMatrix::zeros(b, b);
            for col in 0..b {
                let mut e = GridFunction::zeros(grid, n);
                e.values_mut()[col] = C64::new(1.0, 0.0);
                let out = op.apply(&e)?;
                for (row, v) in out.values().iter().enumerate() {
                    mat[(row, col)] = *v;
                }
            }
            ls.push(mat);
        }
        let m = fam.dim();
        let mut d = Vec::with_capacity(m);
        for k in 0..m {
            let source = subsets(m, k);
            let target = subsets(m, k + 1);
            let mut mat = CMatrix::zeros(target.len() * b, source.len() * b);
            for (ti, t) in target.iter().enumerate() {
                for &j in t {
                    let rest: Vec<usize> = t.iter().copied().filter(|&x| x != j).collect();
                    let si = source.iter().position(|s| *s == rest).expect("subset");
                    let sign = C64::new(shuffle_sign(&[j], &rest), 0.0);
                    let mut blk = mat.view_mut((ti * b, si * b), (b, b));
                    blk += &ls[j] * sign;
                }
            }
            d.push(mat);
        }
        Ok(AssembledComplex { grid: grid.clone(), channels: n, d })
    }

    pub fn dim(&self) -> usize {
        self.grid.dim()
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    /// Length of the coefficient vector of a `k`-form.
    pub fn form_len(&self, k: usize) -> usize {
        subsets(self.dim(), k).len() * block_len(&self.grid, self.channels)
    }

    /// `d_L` on `k`-forms (`k < m`).
    pub fn d(&self, k: usize) -> &CMatrix {
        &self.d[k]
    }

    /// `d'_L`: `(k+1)`-forms to `k`-forms, the adjoint of `d(k)`.
    pub fn d_adjoint(&self, k: usize) -> CMatrix {
        self.d[k].adjoint()
    }

    /// Hodge star on `k`-forms as a signed permutation matrix.
    pub fn star(&self, k: usize) -> CMatrix {
        let m = self.dim();
        let b = block_len(&self.grid, self.channels);
        let source = subsets(m, k);
        let target = subsets(m, m - k);
        let mut mat = CMatrix::zeros(target.len() * b, source.len() * b);
        for (si, s) in source.iter().enumerate() {
            let comp: Vec<usize> = (0..m).filter(|j| !s.contains(j)).collect();
            let ti = target.iter().position(|x| *x == comp).expect("complement");
            let sign = C64::new(shuffle_sign(s, &comp), 0.0);
            for i in 0..b {
                mat[(ti * b + i, si * b + i)] = sign;
            }
        }
        mat
    }

    fn star_inverse(&self, k: usize) -> CMatrix {
        let m = self.dim();
        let s = if (k * (m - k)) % 2 == 0 { 1.0 } else { -1.0 };
        self.star(k) * C64::new(s, 0.0)
    }

    /// `d*_L = * d'_L *^-1` on `k`-forms, raising the degree by one.
    pub fn anti_d(&self, k: usize) -> Result<CMatrix> {
        let m = self.dim();
        if k >= m {
            return Err(Error::InvalidForm(format!("d* of a {k}-form in {m} dimensions")));
        }
        let j = m - k - 1;
        Ok(self.star(j) * self.d_adjoint(j) * self.star_inverse(k))
    }

    /// `Delta_L = d'_L d_L + d_L d'_L` on `k`-forms.
    pub fn laplacian(&self, k: usize) -> CMatrix {
        let len = self.form_len(k);
        let mut out = CMatrix::zeros(len, len);
        if k < self.dim() {
            out += self.d_adjoint(k) * &self.d[k];
        }
        if k > 0 {
            out += &self.d[k - 1] * self.d_adjoint(k - 1);
        }
        out
    }

    /// `<beta, gamma>` on coefficient vectors.
    pub fn inner(&self, a: &DVector<C64>, b: &DVector<C64>) -> C64 {
        a.dotc(b) * self.grid.cell_volume()
    }

    fn eigen(&self, k: usize) -> SymmetricEigen<C64, nalgebra::Dyn> {
        let l = self.laplacian(k);
        let sym = (&l + l.adjoint()) * C64::new(0.5, 0.0);
        SymmetricEigen::new(sym)
    }

    /// Smallest eigenvalue of `Delta_L` on `k`-forms.
    pub fn min_eigenvalue(&self, k: usize) -> f64 {
        self.eigen(k).eigenvalues.min()
    }

    /// Harmonic dimension, spectral gap and basis per degree.
    pub fn harmonic_report(&self) -> HarmonicReport {
        let degrees = (0..=self.dim())
            .map(|k| {
                let eig = self.eigen(k);
                let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
                order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
                let max = eig.eigenvalues.iter().fold(0.0f64, |a, v| a.max(v.abs()));
                let null: Vec<usize> = order.iter().copied().filter(|&i| eig.eigenvalues[i].abs() < NULL_TOL * max).collect();
                let largest_null = null.iter().map(|&i| eig.eigenvalues[i].abs()).fold(0.0, f64::max);
                let smallest_nonzero = order
                    .iter()
                    .map(|&i| eig.eigenvalues[i])
                    .filter(|v| v.abs() >= NULL_TOL * max)
                    .fold(f64::INFINITY, f64::min);
                let floor = f64::EPSILON * max.max(f64::MIN_POSITIVE);
                let sigma_gap = (smallest_nonzero / largest_null.max(floor)).log10();
                let basis = CMatrix::from_fn(eig.eigenvectors.nrows(), null.len(), |r, c| eig.eigenvectors[(r, null[c])]);
                DegreeReport { degree: k, dim: null.len(), sigma_gap, largest_null, smallest_nonzero, basis }
            })
            .collect();
        HarmonicReport { degrees }
    }

    /// Orthonormal bases of the three summands of `k`-forms.
    pub fn hodge_bases(&self, k: usize) -> HodgeBases {
        let len = self.form_len(k);
        let exact = if k > 0 { linalg::range_basis(&self.d[k - 1], NULL_TOL) } else { CMatrix::zeros(len, 0) };
        let coexact = if k < self.dim() { linalg::range_basis(&self.d_adjoint(k), NULL_TOL) } else { CMatrix::zeros(len, 0) };
        let report = self.harmonic_report();
        let harmonic = report.degrees[k].basis.clone();
        HodgeBases { degree: k, harmonic, exact, coexact }
    }

    /// Projects `beta` on the three subspaces and measures how well they
    /// reconstruct it and how orthogonal the parts are.
    pub fn decompose(&self, bases: &HodgeBases, beta: &DVector<C64>) -> DecompositionResidual {
        let proj = |b: &CMatrix| -> DVector<C64> { b * (b.adjoint() * beta) };
        let h = proj(&bases.harmonic);
        let e = proj(&bases.exact);
        let c = proj(&bases.coexact);
        let norm = beta.norm();
        let reconstruction = (beta - &h - &e - &c).norm() / norm;
        let cross = |a: &CMatrix, b: &CMatrix| -> f64 {
            if a.ncols() == 0 || b.ncols() == 0 {
                0.0
            } else {
                (a.adjoint() * b).iter().fold(0.0, |m, v| m.max(v.norm()))
            }
        };
        let orthogonality = cross(&bases.harmonic, &bases.exact)
            .max(cross(&bases.harmonic, &bases.coexact))
            .max(cross(&bases.exact, &bases.coexact));
        DecompositionResidual {
            reconstruction,
            orthogonality,
            harmonic: h.norm() / norm,
            exact: e.norm() / norm,
            coexact: c.norm() / norm,
        }
    }

    pub fn to_form(&self, k: usize, v: &DVector<C64>) -> Result<DiscreteForm> {
        DiscreteForm::from_vector(&self.grid, self.channels, k, v.as_slice())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stencil::Scheme;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn assembled_d_matches_matrix_free() {
        let g = Grid::torus(2, 8).unwrap();
        let fam = ComplexOperatorFamily::standard(2, 1, Scheme::Forward);
        let cx = AssembledComplex::assemble(&fam, &g).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let b = DiscreteForm::random(&g, 1, 0, &mut rng);
        let free = fam.d(&b).unwrap().to_vector();
        let mat = cx.d(0) * b.to_vector();
        assert!((free - mat).norm() < 1e-12);
    }

    #[test]
    fn zero_form_spectrum_is_forward_difference_symbol() {
        let g = Grid::torus(1, 8).unwrap();
        let fam = ComplexOperatorFamily::standard(1, 1, Scheme::Forward);
        let cx = AssembledComplex::assemble(&fam, &g).unwrap();
        let mut eig: Vec<f64> = cx.eigen(0).eigenvalues.iter().copied().collect();
        eig.sort_by(f64::total_cmp);
        let h = g.spacing(0);
        let mut expect: Vec<f64> =
            (0..8).map(|k| 4.0 * (std::f64::consts::PI * k as f64 / 8.0).sin().powi(2) / (h * h)).collect();
        expect.sort_by(f64::total_cmp);
        for (a, b) in eig.iter().zip(&expect) {
            assert!((a - b).abs() < 1e-10, "{a} vs {b}");
        }
    }

    #[test]
    fn codifferential_on_fourier_mode() {
        let g = Grid::torus(1, 16).unwrap();
        let fam = ComplexOperatorFamily::standard(1, 1, Scheme::Forward);
        let cx = AssembledComplex::assemble(&fam, &g).unwrap();
        let h = g.spacing(0);
        let k = 3.0;
        let mode = GridFunction::from_scalar_fn(&g, |p| C64::new(0.0, k * p[0]).exp());
        let out = cx.d_adjoint(0) * DiscreteForm::new(1, vec![mode.clone()]).unwrap().to_vector();
        // (D+)^H = -D-, symbol -(1 - exp(-i k h)) / h
        let symbol = -(C64::new(1.0, 0.0) - C64::new(0.0, -k * h).exp()) / h;
        for (idx, v) in out.iter().enumerate() {
            assert!((v - symbol * mode.get(idx, 0)).norm() < 1e-12);
        }
    }

    #[test]
    fn torus_harmonic_dimensions() {
        for (m, n, ch, expect) in [(1, 16, 1, vec![1, 1]), (2, 8, 1, vec![1, 2, 1]), (2, 8, 2, vec![2, 4, 2])] {
            let g = Grid::torus(m, n).unwrap();
            let fam = ComplexOperatorFamily::standard(m, ch, Scheme::Forward);
            let cx = AssembledComplex::assemble(&fam, &g).unwrap();
            let rep = cx.harmonic_report();
            assert_eq!(rep.dims(), expect);
            assert!(rep.min_gap() > 6.0, "{}", rep.min_gap());
        }
    }

    #[test]
    fn gauge_family_keeps_dimensions() {
        // odd sizes: the spectral derivative drops the Nyquist mode on even grids
        let g = Grid::torus(2, 15).unwrap();
        let chi = crate::Expr::parse("0.3*sin(x)*cos(y)").unwrap();
        let fam = ComplexOperatorFamily::gauge(2, 1, &chi, Scheme::Spectral);
        let cx = AssembledComplex::assemble(&fam, &g).unwrap();
        let rep = cx.harmonic_report();
        assert_eq!(rep.dims(), vec![1, 2, 1]);
        assert!(rep.min_gap() > 6.0);
    }

    #[test]
    fn hodge_pieces_are_orthogonal_and_complete() {
        let g = Grid::torus(2, 8).unwrap();
        let fam = ComplexOperatorFamily::standard(2, 1, Scheme::Forward);
        let cx = AssembledComplex::assemble(&fam, &g).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for k in 0..=2 {
            let bases = cx.hodge_bases(k);
            let beta = DiscreteForm::random(&g, 1, k, &mut rng).to_vector();
            let r = cx.decompose(&bases, &beta);
            assert!(r.reconstruction < 1e-10 && r.orthogonality < 1e-10, "{k}: {r:?}");
            assert!(cx.min_eigenvalue(k) > -1e-10);
        }
    }
}
