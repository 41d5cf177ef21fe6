use num_integer::Integer;
use num_rational::Rational64;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::lattice::{LatticePoint, UnitStep};
use crate::linalg::SymMatrix;
use crate::rng::UniformSource;

/// One support point of a [`StepMeasure`].
#[derive(Clone, Debug, PartialEq)]
pub struct Atom {
    pub point: Vec<Rational64>,
    pub prob: Rational64,
}

/// Finite-support probability measure on `R^d` with exact rational atoms and
/// weights.
#[derive(Clone, Debug, PartialEq)]
pub struct StepMeasure {
    dim: usize,
    atoms: Vec<Atom>,
    /// Weights scaled to the common denominator, accumulated.
    cumulative: Vec<u64>,
    denominator: u64,
}

impl StepMeasure {
    pub fn new(dim: usize, atoms: Vec<Atom>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::InvalidMeasure("no atoms".into()));
        }
        let mut total = Rational64::zero();
        for (i, a) in atoms.iter().enumerate() {
            if a.point.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: a.point.len(),
                });
            }
            if a.prob <= Rational64::zero() {
                return Err(Error::InvalidMeasure(format!("atom {i} has non-positive weight")));
            }
            if atoms[..i].iter().any(|b| b.point == a.point) {
                return Err(Error::InvalidMeasure(format!("atom {i} repeats an earlier point")));
            }
            total += a.prob;
        }
        if total != Rational64::one() {
            return Err(Error::InvalidMeasure(format!("weights sum to {total}, not 1")));
        }
        let denominator = atoms
            .iter()
            .fold(1i64, |l, a| l.lcm(a.prob.denom())) as u64;
        let mut acc = 0u64;
        let cumulative = atoms
            .iter()
            .map(|a| {
                acc += (a.prob * Rational64::from_integer(denominator as i64)).to_integer() as u64;
                acc
            })
            .collect();
        Ok(Self {
            dim,
            atoms,
            cumulative,
            denominator,
        })
    }

    pub fn from_integer_atoms(dim: usize, atoms: Vec<(Vec<i64>, Rational64)>) -> Result<Self> {
        let atoms = atoms
            .into_iter()
            .map(|(p, prob)| Atom {
                point: p.into_iter().map(Rational64::from_integer).collect(),
                prob,
            })
            .collect();
        Self::new(dim, atoms)
    }

    /// Uniform measure on `{±e_i : i in axes}` (zero-based), listed `+e_i, -e_i`
    /// by increasing axis.
    pub fn uniform_on_axes(dim: usize, axes: std::ops::Range<usize>) -> Self {
        assert!(!axes.is_empty() && axes.end <= dim);
        let w = Rational64::new(1, 2 * axes.len() as i64);
        let atoms = axes
            .flat_map(|axis| {
                [1i64, -1].map(|s| {
                    let mut p = vec![0; dim];
                    p[axis] = s;
                    (p, w)
                })
            })
            .collect();
        Self::from_integer_atoms(dim, atoms).expect("uniform axis measure is valid")
    }

    pub fn point_mass(point: Vec<Rational64>) -> Self {
        let dim = point.len();
        Self::new(
            dim,
            vec![Atom {
                point,
                prob: Rational64::one(),
            }],
        )
        .expect("point mass is valid")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn is_integral(&self) -> bool {
        self.atoms
            .iter()
            .all(|a| a.point.iter().all(|c| c.is_integer()))
    }

    pub fn integer_point(&self, index: usize) -> Option<LatticePoint> {
        let a = &self.atoms[index];
        a.point
            .iter()
            .map(|c| c.is_integer().then(|| c.to_integer()))
            .collect::<Option<Vec<_>>>()
            .map(LatticePoint)
    }

    /// The atoms as unit steps, when every atom is some `±e_i`.
    pub fn unit_steps(&self) -> Option<Vec<(UnitStep, Rational64)>> {
        let origin = vec![0i64; self.dim];
        (0..self.atoms.len())
            .map(|i| {
                let p = self.integer_point(i)?;
                Some((UnitStep::between(&origin, &p.0)?, self.atoms[i].prob))
            })
            .collect()
    }

    /// Draws an atom index. One `below(L)` call with `L` the common
    /// denominator of the weights, so the draw is exact.
    pub fn sample_index<S: UniformSource>(&self, src: &mut S) -> usize {
        let u = src.below(self.denominator);
        self.cumulative.partition_point(|&c| c <= u)
    }

    /// Exact weighted atom sum.
    pub fn mean(&self) -> Vec<Rational64> {
        let mut m = vec![Rational64::zero(); self.dim];
        for a in &self.atoms {
            for (mi, x) in m.iter_mut().zip(&a.point) {
                *mi += a.prob * x;
            }
        }
        m
    }

    /// Exact covariance `E[(Z - EZ)(Z - EZ)^t]`.
    pub fn covariance(&self) -> SymMatrix<Rational64> {
        let mean = self.mean();
        SymMatrix::from_fn(self.dim, |i, j| {
            self.atoms
                .iter()
                .map(|a| a.prob * (a.point[i] - mean[i]) * (a.point[j] - mean[j]))
                .sum()
        })
    }
}
