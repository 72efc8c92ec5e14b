//! Everything derived once from a spec, plus the numeric steps that use it.

use num_complex::Complex64;

use crate::cohomology::{
    connection_matrix, cyclic_ode, fiber_basis, CohomologyBasis, ConnectionMatrix, ProblemSpec, ScalarOde,
};
use crate::cycles::{cycle_basis, track_cycles, valley_config, CycleBasis, DEFAULT_TAIL_TOL};
use crate::error::Result;
use crate::quadrature::{period_matrix, PeriodMatrix, QuadratureOptions};
use crate::singular::{singular_set, SingularSet};

#[derive(Debug, Clone)]
pub struct Problem {
    pub spec: ProblemSpec,
    pub basis: CohomologyBasis,
    pub connection: ConnectionMatrix,
    pub singular: SingularSet,
}

impl Problem {
    pub fn new(spec: ProblemSpec) -> Result<Self> {
        let basis = fiber_basis(&spec)?;
        let connection = connection_matrix(&spec, &basis)?;
        let singular = singular_set(&spec, &connection)?;
        Ok(Problem {
            spec,
            basis,
            connection,
            singular,
        })
    }

    pub fn rank(&self) -> usize {
        self.basis.rank
    }

    /// Cyclic ODE of the first basis form; `None` at rank zero.
    pub fn ode(&self) -> Result<Option<ScalarOde>> {
        if self.rank() == 0 {
            return Ok(None);
        }
        cyclic_ode(&self.connection, 0).map(Some)
    }

    /// Errors if `t` lies in (or within `margin` of) a singular ball.
    pub fn admissible(&self, t: Complex64, margin: f64) -> Result<()> {
        self.singular.check_point(t, margin)
    }

    /// Cycle basis built directly at `t`; empty at rank zero. Points of the
    /// singular set are accepted as long as the valley structure exists
    /// (nonvanishing leading coefficients); periods are defined there.
    pub fn cycles_at(&self, t: Complex64) -> Result<CycleBasis> {
        if self.rank() == 0 {
            return Ok(CycleBasis {
                t,
                cycles: Vec::new(),
                infinity_centers: Vec::new(),
                zero_centers: Vec::new(),
                tail_tol: DEFAULT_TAIL_TOL,
            });
        }
        cycle_basis(&self.spec, t, &valley_config(&self.spec, t)?)
    }

    /// Cycles at the last point of `path`, tracked from a basis built at
    /// `base`.
    pub fn cycles_along(&self, base: Complex64, path: &[Complex64]) -> Result<CycleBasis> {
        let b = self.cycles_at(base)?;
        self.track(&b, path)
    }

    pub fn track(&self, basis: &CycleBasis, path: &[Complex64]) -> Result<CycleBasis> {
        if basis.is_empty() {
            let mut out = basis.clone();
            if let Some(&last) = path.last() {
                for w in std::iter::once(basis.t).chain(path.iter().copied()).collect::<Vec<_>>().windows(2) {
                    self.singular.check_segment(w[0], w[1], 0.0)?;
                }
                out.t = last;
            }
            return Ok(out);
        }
        track_cycles(&self.spec, basis, path, &self.singular)
    }

    pub fn periods(&self, cycles: &CycleBasis, opts: &QuadratureOptions) -> Result<PeriodMatrix> {
        period_matrix(&self.spec, cycles.t, &cycles.cycles, &self.basis, opts)
    }
}
