//! Uniform 1-D mesh on `(0, ℓ)` with homogeneous Dirichlet boundary.
//!
//! Unknowns live on the `n_cells - 1` interior nodes; gradients and fluxes
//! live on the `n_cells` edges between consecutive nodes (boundary edges
//! included). Edge `e` joins nodes `e` and `e + 1` of the full node list
//! `0..=n_cells`, whose first and last entries are the implicit zero
//! boundary values. With this layout the discrete divergence is exactly the
//! negative adjoint of the discrete gradient:
//!
//! ```text
//! h Σ_e F_e (∇v)_e = -h Σ_i (div F)_i v_i
//! ```

use std::ops::{Index, Sub};

use crate::family::FluxFamily;
use crate::{Error, Result, Scalar};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grid<T> {
    length: T,
    n_cells: usize,
    spacing: T,
}

impl<T: Scalar> Grid<T> {
    pub fn new(length: T, n_cells: usize) -> Result<Self> {
        if !(length > T::zero()) || !length.is_finite() {
            return Err(Error::config("grid.length", format!("must be positive, got {length}")));
        }
        if n_cells < 2 {
            return Err(Error::config(
                "grid.n_cells",
                format!("must be at least 2, got {n_cells}"),
            ));
        }
        Ok(Self {
            length,
            n_cells,
            spacing: length / T::from_usize(n_cells).unwrap(),
        })
    }

    pub fn length(&self) -> T {
        self.length
    }

    pub fn n_cells(&self) -> usize {
        self.n_cells
    }

    pub fn n_interior(&self) -> usize {
        self.n_cells - 1
    }

    pub fn spacing(&self) -> T {
        self.spacing
    }

    /// Coordinate of interior node `i` (0-based over interior nodes).
    pub fn node(&self, i: usize) -> T {
        T::from_usize(i + 1).unwrap() * self.spacing
    }

    pub fn nodes(&self) -> impl Iterator<Item = T> + '_ {
        (0..self.n_interior()).map(move |i| self.node(i))
    }

    fn check_field(&self, len: usize) -> Result<()> {
        if len != self.n_interior() {
            return Err(Error::SizeMismatch {
                expected: self.n_interior(),
                found: len,
            });
        }
        Ok(())
    }

    fn check_edges(&self, len: usize) -> Result<()> {
        if len != self.n_cells {
            return Err(Error::SizeMismatch {
                expected: self.n_cells,
                found: len,
            });
        }
        Ok(())
    }
}

/// Interior nodal values; boundary values are implicitly zero.
#[derive(Clone, Debug, PartialEq)]
pub struct Field<T> {
    values: Vec<T>,
}

/// One value per edge, boundary edges included.
#[derive(Clone, Debug, PartialEq)]
pub struct EdgeField<T> {
    values: Vec<T>,
}

macro_rules! vector_newtype {
    ($ty:ident) => {
        impl<T: Scalar> $ty<T> {
            /// Rejects non-finite entries.
            pub fn new(values: Vec<T>) -> Result<Self> {
                if values.iter().all(|v| v.is_finite()) {
                    Ok(Self { values })
                } else {
                    Err(Error::NonFinite { step: None })
                }
            }

            pub(crate) fn from_vec(values: Vec<T>) -> Self {
                debug_assert!(values.iter().all(|v| v.is_finite()));
                Self { values }
            }

            pub fn values(&self) -> &[T] {
                &self.values
            }

            pub fn into_values(self) -> Vec<T> {
                self.values
            }

            pub fn len(&self) -> usize {
                self.values.len()
            }

            pub fn is_empty(&self) -> bool {
                self.values.is_empty()
            }

            pub fn iter(&self) -> std::slice::Iter<'_, T> {
                self.values.iter()
            }

            pub fn map(&self, f: impl Fn(T) -> T) -> Self {
                Self {
                    values: self.values.iter().map(|&v| f(v)).collect(),
                }
            }

            pub fn scale(&self, s: T) -> Self {
                self.map(|v| v * s)
            }

            pub fn max_abs(&self) -> T {
                self.values.iter().fold(T::zero(), |m, v| m.max(v.abs()))
            }
        }

        impl<T> Index<usize> for $ty<T> {
            type Output = T;

            fn index(&self, i: usize) -> &T {
                &self.values[i]
            }
        }

        impl<T: Scalar> Sub for &$ty<T> {
            type Output = $ty<T>;

            fn sub(self, rhs: Self) -> $ty<T> {
                assert_eq!(self.len(), rhs.len(), "length mismatch in subtraction");
                $ty {
                    values: self
                        .values
                        .iter()
                        .zip(&rhs.values)
                        .map(|(&a, &b)| a - b)
                        .collect(),
                }
            }
        }
    };
}

vector_newtype!(Field);
vector_newtype!(EdgeField);

impl<T: Scalar> Field<T> {
    pub fn zeros(grid: &Grid<T>) -> Self {
        Self {
            values: vec![T::zero(); grid.n_interior()],
        }
    }

    /// Samples `u(x)` at the interior nodes.
    pub fn from_fn(grid: &Grid<T>, u: impl Fn(T) -> T) -> Result<Self> {
        Self::new(grid.nodes().map(u).collect())
    }

    pub fn on_grid(values: Vec<T>, grid: &Grid<T>) -> Result<Self> {
        grid.check_field(values.len())?;
        Self::new(values)
    }
}

/// `|g|^{p-2} g`, exactly zero at `g = 0` and the identity for `p = 2`.
#[inline]
pub fn p_flux_scalar<T: Scalar>(g: T, p: T) -> T {
    let two = T::lit(2.0);
    if p == two || g == T::zero() {
        g
    } else if p == T::lit(3.0) {
        g.abs() * g
    } else {
        g.abs().powf(p - two) * g
    }
}

pub(crate) fn check_p<T: Scalar>(p: T) -> Result<()> {
    if p >= T::lit(2.0) && p.is_finite() {
        Ok(())
    } else {
        Err(Error::config("model.p", format!("p must satisfy p >= 2, got {p}")))
    }
}

/// Edge differences `(u_{e+1} - u_e)/h` with zero ghost values at the boundary.
pub fn gradient_edges<T: Scalar>(u: &Field<T>, grid: &Grid<T>) -> Result<EdgeField<T>> {
    grid.check_field(u.len())?;
    let mut out = vec![T::zero(); grid.n_cells()];
    gradient_into(u.values(), grid.spacing(), &mut out);
    Ok(EdgeField::from_vec(out))
}

pub fn p_flux<T: Scalar>(grad: &EdgeField<T>, p: T) -> Result<EdgeField<T>> {
    check_p(p)?;
    Ok(grad.map(|g| p_flux_scalar(g, p)))
}

/// `(F_{i+1} - F_i)/h` at interior node `i`, where edge `i` lies to its left.
pub fn divergence<T: Scalar>(flux: &EdgeField<T>, grid: &Grid<T>) -> Result<Field<T>> {
    grid.check_edges(flux.len())?;
    let mut out = vec![T::zero(); grid.n_interior()];
    divergence_into(flux.values(), grid.spacing(), &mut out);
    Ok(Field::from_vec(out))
}

/// Divergence of the arithmetic edge average of `f(u)`.
pub fn flux_divergence_f<T: Scalar>(u: &Field<T>, f: &FluxFamily<T>, grid: &Grid<T>) -> Result<Field<T>> {
    grid.check_field(u.len())?;
    let mut edges = vec![T::zero(); grid.n_cells()];
    edge_average_f_into(u.values(), f, &mut edges);
    divergence(&EdgeField::from_vec(edges), grid)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Norms<T> {
    pub l1: T,
    pub l2: T,
    /// `(h Σ_e |∇u|_e^p)^{1/p}`
    pub w1p: T,
}

pub fn norms<T: Scalar>(u: &Field<T>, grid: &Grid<T>, p: T) -> Result<Norms<T>> {
    grid.check_field(u.len())?;
    Ok(Norms {
        l1: l1_norm(u.values(), grid.spacing()),
        l2: l2_norm(u.values(), grid.spacing()),
        w1p: w1p_power(u.values(), grid.spacing(), p).powf(p.recip()),
    })
}

pub(crate) fn gradient_into<T: Scalar>(u: &[T], h: T, out: &mut [T]) {
    let n = out.len();
    debug_assert_eq!(u.len() + 1, n);
    let at = |j: usize| if j == 0 || j == n { T::zero() } else { u[j - 1] };
    for (e, o) in out.iter_mut().enumerate() {
        *o = (at(e + 1) - at(e)) / h;
    }
}

pub(crate) fn divergence_into<T: Scalar>(flux: &[T], h: T, out: &mut [T]) {
    debug_assert_eq!(flux.len(), out.len() + 1);
    for (i, o) in out.iter_mut().enumerate() {
        *o = (flux[i + 1] - flux[i]) / h;
    }
}

pub(crate) fn edge_average_f_into<T: Scalar>(u: &[T], f: &FluxFamily<T>, out: &mut [T]) {
    let n = out.len();
    let half = T::lit(0.5);
    let fv = |j: usize| if j == 0 || j == n { T::zero() } else { f.eval(u[j - 1]) };
    for (e, o) in out.iter_mut().enumerate() {
        *o = half * (fv(e) + fv(e + 1));
    }
}

pub(crate) fn inner<T: Scalar>(a: &[T], b: &[T], h: T) -> T {
    h * a.iter().zip(b).map(|(&x, &y)| x * y).sum::<T>()
}

pub(crate) fn l2_norm<T: Scalar>(u: &[T], h: T) -> T {
    inner(u, u, h).sqrt()
}

pub(crate) fn l1_norm<T: Scalar>(u: &[T], h: T) -> T {
    h * u.iter().map(|v| v.abs()).sum::<T>()
}

/// `h Σ_e |∇u|_e^p`, i.e. the p-th power of the discrete W^{1,p} seminorm.
pub(crate) fn w1p_power<T: Scalar>(u: &[T], h: T, p: T) -> T {
    let mut g = vec![T::zero(); u.len() + 1];
    gradient_into(u, h, &mut g);
    h * g.iter().map(|x| x.abs().powf(p)).sum::<T>()
}

/// Discrete L² norm of the edge gradient.
pub(crate) fn grad_l2<T: Scalar>(u: &[T], h: T) -> T {
    let mut g = vec![T::zero(); u.len() + 1];
    gradient_into(u, h, &mut g);
    l2_norm(&g, h)
}

impl<T: Scalar> Field<T> {
    pub fn l2(&self, grid: &Grid<T>) -> T {
        l2_norm(&self.values, grid.spacing())
    }

    pub fn l1(&self, grid: &Grid<T>) -> T {
        l1_norm(&self.values, grid.spacing())
    }

    pub fn inner(&self, other: &Self, grid: &Grid<T>) -> T {
        inner(&self.values, &other.values, grid.spacing())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn g(l: f64, n: usize) -> Grid<f64> {
        Grid::new(l, n).unwrap()
    }

    fn field(v: &[f64]) -> Field<f64> {
        Field::new(v.to_vec()).unwrap()
    }

    fn edges(v: &[f64]) -> EdgeField<f64> {
        EdgeField::new(v.to_vec()).unwrap()
    }

    #[test]
    fn build_grid_examples() {
        let a = g(1.0, 4);
        assert_eq!(a.spacing(), 0.25);
        assert_eq!(a.n_interior(), 3);
        let b = g(2.0, 2);
        assert_eq!(b.spacing(), 1.0);
        assert_eq!(b.n_interior(), 1);
        assert!(matches!(Grid::new(1.0, 1), Err(Error::Config { .. })));
        assert!(Grid::new(0.0, 4).is_err());
        assert!(Grid::new(-1.0, 4).is_err());
    }

    #[test]
    fn gradient_examples() {
        let grid = g(1.0, 4);
        assert_eq!(gradient_edges(&field(&[0.0; 3]), &grid).unwrap().values(), &[0.0; 4]);
        assert_eq!(
            gradient_edges(&field(&[1.0, 2.0, 1.0]), &grid).unwrap().values(),
            &[4.0, 4.0, -4.0, -4.0]
        );
        let c = 0.3;
        assert_eq!(
            gradient_edges(&field(&[c, c, c]), &grid).unwrap().values(),
            &[c / 0.25, 0.0, 0.0, -c / 0.25]
        );
        assert!(matches!(
            gradient_edges(&field(&[1.0, 2.0]), &grid),
            Err(Error::SizeMismatch { expected: 3, found: 2 })
        ));
    }

    #[test]
    fn p_flux_examples() {
        let gr = edges(&[-1.5, 0.0, 0.3, 7.0]);
        assert_eq!(p_flux(&gr, 2.0).unwrap(), gr);
        assert_eq!(p_flux(&edges(&[4.0, -4.0]), 3.0).unwrap().values(), &[16.0, -16.0]);
        assert_eq!(p_flux(&edges(&[0.0]), 4.0).unwrap().values(), &[0.0]);
        assert!(p_flux(&gr, 1.5).is_err());
    }

    #[test]
    fn divergence_examples() {
        let grid = g(1.0, 4);
        assert_eq!(divergence(&edges(&[2.5; 4]), &grid).unwrap().values(), &[0.0; 3]);
        assert_eq!(
            divergence(&edges(&[16.0, 16.0, -16.0, -16.0]), &grid).unwrap().values(),
            &[0.0, -128.0, 0.0]
        );
        assert_eq!(
            divergence(&edges(&[1.0, 0.0, 0.0, 0.0]), &grid).unwrap().values(),
            &[-4.0, 0.0, 0.0]
        );
        assert!(divergence(&edges(&[1.0; 3]), &grid).is_err());
    }

    #[test]
    fn discrete_p_laplacian_composes() {
        let grid = g(1.0, 4);
        let u = field(&[1.0, 2.0, 1.0]);
        let flux = p_flux(&gradient_edges(&u, &grid).unwrap(), 3.0).unwrap();
        assert_eq!(divergence(&flux, &grid).unwrap().values(), &[0.0, -128.0, 0.0]);
    }

    #[test]
    fn flux_divergence_examples() {
        let grid = g(1.0, 4);
        let zero = Field::zeros(&grid);
        assert_eq!(flux_divergence_f(&zero, &FluxFamily::Sine(2.0), &grid).unwrap(), zero);
        let u = field(&[1.0, 2.0, 1.0]);
        let id = flux_divergence_f(&u, &FluxFamily::Linear(1.0), &grid).unwrap();
        assert_eq!(id.values(), &[4.0, 0.0, -4.0]);
        let scaled = flux_divergence_f(&u, &FluxFamily::Linear(-0.5), &grid).unwrap();
        assert_eq!(scaled, id.scale(-0.5));
    }

    #[test]
    fn norms_examples() {
        let grid = g(1.0, 2);
        let n = norms(&field(&[3.0]), &grid, 3.0).unwrap();
        assert_eq!(n.l1, 1.5);
        assert!((n.l2 - 3.0 / 2f64.sqrt()).abs() < 1e-15);
        let w = norms(&field(&[1.0]), &grid, 3.0).unwrap();
        assert!((w.w1p - 2.0).abs() < 1e-14);
        let z = norms(&Field::zeros(&g(1.0, 8)), &g(1.0, 8), 4.0).unwrap();
        assert_eq!((z.l1, z.l2, z.w1p), (0.0, 0.0, 0.0));
    }

    #[test]
    fn monotone_equality_case() {
        // p = 3, a = 1, b = -1: (1 - (-1))·2 = 4 = 2^{-1}·2³
        let lhs = 2f64.powf(2.0 - 3.0) * 2f64.powi(3);
        let rhs = (p_flux_scalar(1.0, 3.0) - p_flux_scalar(-1.0, 3.0)) * 2.0;
        assert_eq!(lhs, 4.0);
        assert_eq!(rhs, 4.0);
    }

    proptest! {
        #[test]
        fn integration_by_parts(
            n in 2usize..40,
            seed_u in proptest::collection::vec(-5.0f64..5.0, 40),
            seed_v in proptest::collection::vec(-5.0f64..5.0, 40),
            p in 2.0f64..5.0,
        ) {
            let grid = g(1.3, n);
            let m = grid.n_interior();
            let u = field(&seed_u[..m]);
            let v = field(&seed_v[..m]);
            let flux = p_flux(&gradient_edges(&u, &grid).unwrap(), p).unwrap();
            let gv = gradient_edges(&v, &grid).unwrap();
            let lhs = inner(flux.values(), gv.values(), grid.spacing());
            let rhs = -divergence(&flux, &grid).unwrap().inner(&v, &grid);
            let scale = flux.max_abs() * gv.max_abs() * grid.length() + 1.0;
            prop_assert!((lhs - rhs).abs() <= 1e-12 * scale);
        }

        #[test]
        fn p_flux_monotone(a in -10.0f64..10.0, b in -10.0f64..10.0, pi in 0usize..3) {
            let p = [2.5, 3.0, 4.0][pi];
            let lhs = (p_flux_scalar(a, p) - p_flux_scalar(b, p)) * (a - b);
            let rhs = 2f64.powf(2.0 - p) * (a - b).abs().powf(p);
            prop_assert!(lhs - rhs >= -1e-12 * (1.0 + lhs.abs()));
        }

        #[test]
        fn constant_flux_has_zero_divergence(c in -100.0f64..100.0, n in 2usize..30) {
            let grid = g(1.0, n);
            let d = divergence(&EdgeField::new(vec![c; n]).unwrap(), &grid).unwrap();
            prop_assert!(d.values().iter().all(|&x| x == 0.0));
        }
    }

    #[test]
    fn single_precision_works() {
        let grid = Grid::<f32>::new(1.0, 4).unwrap();
        let u = Field::new(vec![1.0f32, 2.0, 1.0]).unwrap();
        let gr = gradient_edges(&u, &grid).unwrap();
        assert_eq!(gr.values(), &[4.0f32, 4.0, -4.0, -4.0]);
    }
}
