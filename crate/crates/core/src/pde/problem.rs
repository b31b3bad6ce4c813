use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::spectral::{select_peaks, FourierBasis};

type ScalarFn<T> = Arc<dyn Fn(T) -> T + Send + Sync>;

/// `-u'' = g` on `(a, b)` with Dirichlet values at both ends.
#[derive(Clone)]
pub struct PoissonProblem<T> {
    pub name: String,
    pub a: T,
    pub b: T,
    pub left: T,
    pub right: T,
    source: ScalarFn<T>,
    reference: Option<ScalarFn<T>>,
}

impl<T: Scalar> fmt::Debug for PoissonProblem<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PoissonProblem")
            .field("name", &self.name)
            .field("a", &self.a)
            .field("b", &self.b)
            .field("left", &self.left)
            .field("right", &self.right)
            .field("has_reference", &self.reference.is_some())
            .finish()
    }
}

/// `g0(x) = sin x + sin 4x / 4 - sin 8x / 8 + sin 24x / 36`.
fn g0<T: Scalar>(x: T) -> T {
    x.sin() + (T::lit(4.0) * x).sin() / T::lit(4.0) - (T::lit(8.0) * x).sin() / T::lit(8.0)
        + (T::lit(24.0) * x).sin() / T::lit(36.0)
}

impl<T: Scalar> PoissonProblem<T> {
    pub fn new(
        name: impl Into<String>,
        a: T,
        b: T,
        left: T,
        right: T,
        source: impl Fn(T) -> T + Send + Sync + 'static,
    ) -> Result<Self> {
        if !(b > a) {
            return Err(Error::invalid("domain must satisfy b > a"));
        }
        Ok(Self {
            name: name.into(),
            a,
            b,
            left,
            right,
            source: Arc::new(source),
            reference: None,
        })
    }

    pub fn with_reference(mut self, reference: impl Fn(T) -> T + Send + Sync + 'static) -> Self {
        self.reference = Some(Arc::new(reference));
        self
    }

    /// `g(x) = sin x + 4 sin 4x - 8 sin 8x + 16 sin 24x` on `(-1, 1)` with zero boundary values.
    pub fn paper() -> Self {
        let source = |x: T| {
            x.sin() + T::lit(4.0) * (T::lit(4.0) * x).sin() - T::lit(8.0) * (T::lit(8.0) * x).sin()
                + T::lit(16.0) * (T::lit(24.0) * x).sin()
        };
        let one = T::one();
        let (c1, c0) = Self::paper_constants();
        Self::new("paper-poisson", -one, one, T::zero(), T::zero(), source)
            .expect("valid domain")
            .with_reference(move |x| g0(x) + c1 * x + c0)
    }

    /// `(c1, c0)` of the closed-form solution `g0(x) + c1 x + c0`.
    pub fn paper_constants() -> (T, T) {
        let one = T::one();
        let two = T::lit(2.0);
        let (gm, gp) = (g0(-one), g0(one));
        ((gm - gp) / two, -(gm + gp) / two)
    }

    pub fn from_preset(name: &str) -> Result<Self> {
        match name {
            "paper-poisson" => Ok(Self::paper()),
            other => Err(Error::invalid(format!("unknown poisson preset '{other}'"))),
        }
    }

    pub fn source(&self, x: T) -> T {
        (self.source)(x)
    }

    pub fn reference(&self, x: T) -> Option<T> {
        self.reference.as_ref().map(|u| u(x))
    }

    pub fn has_reference(&self) -> bool {
        self.reference.is_some()
    }

    pub fn length(&self) -> T {
        self.b - self.a
    }

    pub fn grid(&self, n: usize) -> Result<Grid<T>> {
        Grid::new(self.a, self.b, n)
    }

    /// Reference solution sampled on the grid.
    pub fn reference_field(&self, grid: &Grid<T>) -> Result<GridField<T>> {
        let u = self
            .reference
            .as_ref()
            .ok_or_else(|| Error::invalid(format!("problem '{}' has no closed-form solution", self.name)))?;
        Ok(GridField::new(*grid, grid.nodes().map(|x| u(x)).collect())?)
    }

    /// The `count` largest spectral peaks of the reference solution, in cycles
    /// per unit length, on the frequencies `j / (oversample * L)` up to the grid
    /// Nyquist frequency.
    ///
    /// With `oversample = 1` the close components of the default problem merge
    /// into shoulders; `2` resolves three peaks.
    pub fn peak_frequencies(&self, grid: &Grid<T>, count: usize, oversample: usize) -> Result<Vec<T>> {
        if oversample == 0 {
            return Err(Error::invalid("oversample must be at least 1"));
        }
        let u = self.reference_field(grid)?;
        let xs: Vec<T> = grid.nodes().collect();
        let span = self.length() * T::from_usize_lossy(oversample);
        let freqs: Vec<T> = (0..=oversample * grid.n / 2)
            .map(|j| T::from_usize_lossy(j) / span)
            .collect();
        let spec = FourierBasis::new(&xs, &freqs)?.transform(u.values())?;
        let mags: Vec<T> = spec.iter().map(|z| z.norm()).collect();
        Ok(select_peaks(&mags, count)?.into_iter().map(|j| freqs[j]).collect())
    }
}

/// `n + 1` uniformly spaced nodes on `[a, b]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid<T> {
    pub a: T,
    pub b: T,
    pub n: usize,
}

impl<T: Scalar> Grid<T> {
    pub fn new(a: T, b: T, n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::invalid(format!("grid needs n >= 2 intervals, got {n}")));
        }
        if !(b > a) {
            return Err(Error::invalid("grid needs b > a"));
        }
        Ok(Self { a, b, n })
    }

    pub fn dx(&self) -> T {
        (self.b - self.a) / T::from_usize_lossy(self.n)
    }

    pub fn node(&self, i: usize) -> T {
        if i == self.n {
            self.b
        } else {
            self.a + self.dx() * T::from_usize_lossy(i)
        }
    }

    pub fn nodes(&self) -> impl Iterator<Item = T> + '_ {
        (0..=self.n).map(|i| self.node(i))
    }

    pub fn len(&self) -> usize {
        self.n + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

/// Node values of a function on a uniform grid, boundary nodes included.
#[derive(Debug, Clone, PartialEq)]
pub struct GridField<T> {
    grid: Grid<T>,
    values: Vec<T>,
}

impl<T: Scalar> GridField<T> {
    pub fn new(grid: Grid<T>, values: Vec<T>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::DimensionMismatch {
                context: "grid field values",
                expected: grid.len(),
                actual: values.len(),
            });
        }
        Ok(Self { grid, values })
    }

    /// Interior values with the given boundary values attached.
    pub fn from_interior(grid: Grid<T>, left: T, interior: &[T], right: T) -> Result<Self> {
        let mut values = Vec::with_capacity(interior.len() + 2);
        values.push(left);
        values.extend_from_slice(interior);
        values.push(right);
        Self::new(grid, values)
    }

    pub fn grid(&self) -> &Grid<T> {
        &self.grid
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn interior(&self) -> &[T] {
        &self.values[1..self.grid.n]
    }
}

/// `max_i |h_i - u_i|` over grid nodes.
pub fn sup_norm_error<T: Scalar>(h: &[T], u: &[T]) -> Result<T> {
    if h.is_empty() {
        return Err(Error::Empty("field"));
    }
    if h.len() != u.len() {
        return Err(Error::DimensionMismatch {
            context: "sup-norm fields",
            expected: u.len(),
            actual: h.len(),
        });
    }
    Ok(h.iter().zip(u).map(|(&a, &b)| (a - b).abs()).fold(T::zero(), T::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    #[test]
    fn reference_satisfies_boundary_conditions() {
        let p = PoissonProblem::<f64>::paper();
        assert!(p.reference(-1.0).unwrap().abs() < 1e-12);
        assert!(p.reference(1.0).unwrap().abs() < 1e-12);
        let (c1, _) = PoissonProblem::<f64>::paper_constants();
        assert_eq!(c1, (g0(-1.0f64) - g0(1.0f64)) / 2.0);
    }

    #[test]
    fn reference_solves_the_equation() {
        let p = PoissonProblem::<f64>::paper();
        let u = |x: f64| p.reference(x).unwrap();
        let h = 1e-3;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..50 {
            let x: f64 = rng.random_range(-0.99..0.99);
            let d2 = (-u(x + 2.0 * h) + 16.0 * u(x + h) - 30.0 * u(x) + 16.0 * u(x - h) - u(x - 2.0 * h))
                / (12.0 * h * h);
            assert!((-d2 - p.source(x)).abs() < 1e-6, "x={x}");
        }
    }

    #[test]
    fn reference_peaks() {
        let p = PoissonProblem::<f64>::paper();
        let grid = p.grid(1000).unwrap();
        assert_eq!(p.peak_frequencies(&grid, 3, 2).unwrap(), vec![0.5, 1.25, 3.75]);
        assert_eq!(p.peak_frequencies(&grid, 2, 1).unwrap(), vec![0.5, 4.0]);
        assert!(p.peak_frequencies(&grid, 3, 1).is_err());
    }

    #[test]
    fn sup_norm() {
        let u = [0.0f64, 1.0, -2.0, 0.5];
        assert_eq!(sup_norm_error(&u, &u).unwrap(), 0.0);
        let mut h = u;
        h[2] += 0.3;
        assert!((sup_norm_error(&h, &u).unwrap() - 0.3).abs() < 1e-15);
        assert!(sup_norm_error::<f64>(&[], &[]).is_err());
    }

    #[test]
    fn grid_spacing_is_uniform() {
        let g = Grid::<f64>::new(-1.0, 1.0, 1000).unwrap();
        let xs: Vec<f64> = g.nodes().collect();
        assert_eq!(xs[0], -1.0);
        assert_eq!(xs[1000], 1.0);
        assert!(xs.windows(2).all(|w| ((w[1] - w[0]) - g.dx()).abs() < 1e-12));
        assert!(Grid::<f64>::new(0.0, 1.0, 1).is_err());
    }
}
