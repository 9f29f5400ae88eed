//! Semi-discretized 1D Maxwell system: generator assembly, Gaussian initial
//! condition, and the classical forward-Euler reference solver.
//!
//! The four retained field components (B_y, B_z, E_y, E_z) are stored
//! field-major: flat index = field·n_grid + node, so the two most
//! significant qubits of the amplitude index address the field and the rest
//! address the grid node. With the central-difference stencil D and the
//! field-coupling Jacobian A, the evolution reads du/dt = G·u with
//! G = −(A ⊗ D_unit)/(2Δx).

use nalgebra::DMatrix;

use crate::pauli::{PauliSum, DEFAULT_PRUNE_THRESHOLD};
use crate::{Error, Result};

/// Fraction of the domain length used as the default Gaussian center.
pub const DEFAULT_CENTER_FRACTION: f64 = 0.5;
/// Fraction of the domain length used as the default Gaussian width; the
/// pulse then spans at least six grid cells at n_grid = 16.
pub const DEFAULT_WIDTH_FRACTION: f64 = 0.08;
/// Default time step as a fraction of dx/c.
pub const DEFAULT_DT_FRACTION: f64 = 0.1;

/// Field-major block order used by [`flatten`] and the trajectory formats.
pub const FIELD_NAMES: [&str; 4] = ["by", "bz", "ey", "ez"];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Boundary {
    Periodic,
    DirichletZero,
}

impl Boundary {
    pub fn as_str(self) -> &'static str {
        match self {
            Boundary::Periodic => "periodic",
            Boundary::DirichletZero => "dirichlet_zero",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "periodic" => Ok(Boundary::Periodic),
            "dirichlet_zero" => Ok(Boundary::DirichletZero),
            other => Err(Error::Config(format!(
                "unknown boundary {other:?}; expected periodic or dirichlet_zero"
            ))),
        }
    }
}

/// Grid and medium parameters for the reduced Maxwell system.
#[derive(Clone, Debug, PartialEq)]
pub struct MaxwellConfig {
    pub n_grid: usize,
    pub domain_length: f64,
    pub dt: f64,
    pub c: f64,
    pub boundary: Boundary,
}

impl MaxwellConfig {
    /// Config with the default dt = 0.1·dx/c.
    pub fn with_defaults(n_grid: usize) -> Self {
        let domain_length = 1.0;
        let c = 1.0;
        let dx = domain_length / n_grid as f64;
        MaxwellConfig {
            n_grid,
            domain_length,
            dt: DEFAULT_DT_FRACTION * dx / c,
            c,
            boundary: Boundary::Periodic,
        }
    }

    pub fn dx(&self) -> f64 {
        self.domain_length / self.n_grid as f64
    }

    /// Qubits needed for the flattened 4·n_grid state.
    pub fn n_qubits(&self) -> usize {
        (4 * self.n_grid).trailing_zeros() as usize
    }

    /// Validate invariants; returns CFL warnings rather than failing on them.
    pub fn validate(&self) -> Result<Vec<String>> {
        if self.n_grid < 4 || !self.n_grid.is_power_of_two() {
            return Err(Error::Config(format!(
                "n_grid must be a power of two >= 4, got {}",
                self.n_grid
            )));
        }
        if !(self.domain_length > 0.0) {
            return Err(Error::Config("domain_length must be positive".into()));
        }
        if !(self.c > 0.0) {
            return Err(Error::Config("speed c must be positive".into()));
        }
        if !(self.dt > 0.0) {
            return Err(Error::Config("dt must be positive".into()));
        }
        let cfl = self.c * self.dt / self.dx();
        if cfl > 1.0 {
            return Err(Error::Config(format!(
                "CFL number c*dt/dx = {cfl:.4} exceeds 1"
            )));
        }
        let mut warnings = Vec::new();
        if cfl > 0.5 {
            warnings.push(format!("CFL number c*dt/dx = {cfl:.4} exceeds 0.5"));
        }
        Ok(warnings)
    }
}

/// The four field components on the grid.
#[derive(Clone, Debug, PartialEq)]
pub struct FieldState {
    pub by: Vec<f64>,
    pub bz: Vec<f64>,
    pub ey: Vec<f64>,
    pub ez: Vec<f64>,
}

impl FieldState {
    pub fn zeros(n_grid: usize) -> Self {
        FieldState {
            by: vec![0.0; n_grid],
            bz: vec![0.0; n_grid],
            ey: vec![0.0; n_grid],
            ez: vec![0.0; n_grid],
        }
    }

    pub fn n_grid(&self) -> usize {
        self.by.len()
    }

    pub fn field(&self, index: usize) -> &[f64] {
        match index {
            0 => &self.by,
            1 => &self.bz,
            2 => &self.ey,
            _ => &self.ez,
        }
    }
}

/// Minimal row-major sparse matrix; enough for stencils and stepping.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseMatrix {
    dim: usize,
    rows: Vec<Vec<(usize, f64)>>,
}

impl SparseMatrix {
    pub fn zeros(dim: usize) -> Self {
        SparseMatrix {
            dim,
            rows: vec![Vec::new(); dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn push(&mut self, row: usize, col: usize, value: f64) {
        if value != 0.0 {
            self.rows[row].push((col, value));
        }
    }

    pub fn row(&self, row: usize) -> &[(usize, f64)] {
        &self.rows[row]
    }

    pub fn matvec(&self, v: &[f64]) -> Result<Vec<f64>> {
        if v.len() != self.dim {
            return Err(Error::DimensionMismatch {
                left: v.len(),
                right: self.dim,
            });
        }
        let mut out = vec![0.0; self.dim];
        for (r, row) in self.rows.iter().enumerate() {
            let mut acc = 0.0;
            for &(c, val) in row {
                acc += val * v[c];
            }
            out[r] = acc;
        }
        Ok(out)
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for (r, row) in self.rows.iter().enumerate() {
            for &(c, val) in row {
                m[(r, c)] += val;
            }
        }
        m
    }

    /// Spectral-norm estimate by power iteration on GᵀG. The start vector
    /// is pseudo-random so stencil null spaces (constants) don't trap it.
    pub fn two_norm_estimate(&self, iterations: usize) -> f64 {
        let dense = self.to_dense();
        let gt = dense.transpose();
        let mut seed = 0x9e3779b97f4a7c15u64;
        let mut v = DMatrix::from_fn(self.dim, 1, |_, _| {
            seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((seed >> 11) as f64) / (1u64 << 53) as f64 - 0.5
        });
        v /= v.norm();
        let mut sigma_sq = 0.0;
        for _ in 0..iterations {
            let w = &gt * (&dense * &v);
            let norm = w.norm();
            if norm == 0.0 {
                return 0.0;
            }
            sigma_sq = norm;
            v = w / norm;
        }
        sigma_sq.sqrt()
    }
}

/// Semi-discrete evolution operator with du/dt = G·u.
#[derive(Clone, Debug)]
pub struct Generator {
    pub dimension: usize,
    pub matrix: SparseMatrix,
    pub pauli_form: PauliSum,
}

/// Field-coupling Jacobian of the flux function:
/// rows ordered (B_y, B_z, E_y, E_z).
pub fn jacobian(c: f64) -> DMatrix<f64> {
    let c2 = c * c;
    DMatrix::from_row_slice(
        4,
        4,
        &[
            0.0, 0.0, 0.0, -1.0, //
            0.0, 0.0, 1.0, 0.0, //
            0.0, c2, 0.0, 0.0, //
            -c2, 0.0, 0.0, 0.0,
        ],
    )
}

/// The ±1 central-difference stencil without the 1/(2Δx) scale.
fn unit_stencil(n_grid: usize, boundary: Boundary) -> SparseMatrix {
    let mut m = SparseMatrix::zeros(n_grid);
    for i in 0..n_grid {
        match boundary {
            Boundary::Periodic => {
                m.push(i, (i + 1) % n_grid, 1.0);
                m.push(i, (i + n_grid - 1) % n_grid, -1.0);
            }
            Boundary::DirichletZero => {
                if i + 1 < n_grid {
                    m.push(i, i + 1, 1.0);
                }
                if i > 0 {
                    m.push(i, i - 1, -1.0);
                }
            }
        }
    }
    m
}

/// Central-difference operator D with (D·u)_i = (u_{i+1} − u_{i−1})/(2Δx).
pub fn shift_operator(n_grid: usize, dx: f64, boundary: Boundary) -> SparseMatrix {
    let stencil = unit_stencil(n_grid, boundary);
    let scale = 1.0 / (2.0 * dx);
    let mut m = SparseMatrix::zeros(n_grid);
    for r in 0..n_grid {
        for &(c, v) in stencil.row(r) {
            m.push(r, c, v * scale);
        }
    }
    m
}

/// Assemble G = −(A ⊗ D_unit)/(2Δx) in field-major layout together with its
/// Pauli decomposition.
pub fn assemble_generator(config: &MaxwellConfig) -> Result<Generator> {
    config.validate()?;
    let n = config.n_grid;
    let dim = 4 * n;
    let a = jacobian(config.c);
    let stencil = unit_stencil(n, config.boundary);
    let scale = -1.0 / (2.0 * config.dx());

    let mut matrix = SparseMatrix::zeros(dim);
    for f in 0..4 {
        for g in 0..4 {
            let afg = a[(f, g)];
            if afg == 0.0 {
                continue;
            }
            for i in 0..n {
                for &(j, s) in stencil.row(i) {
                    matrix.push(f * n + i, g * n + j, scale * afg * s);
                }
            }
        }
    }

    let dense = matrix.to_dense();
    let pauli_form = PauliSum::decompose_real(&dense, DEFAULT_PRUNE_THRESHOLD)?;
    Ok(Generator {
        dimension: dim,
        matrix,
        pauli_form,
    })
}

/// One forward-Euler step u + dt·G·u.
pub fn classical_step(u: &[f64], g: &SparseMatrix, dt: f64) -> Result<Vec<f64>> {
    let gu = g.matvec(u)?;
    Ok(u.iter().zip(&gu).map(|(x, y)| x + dt * y).collect())
}

/// Forward-Euler trajectory sampled at every step, starting at t = 0.
pub fn classical_solve(
    config: &MaxwellConfig,
    initial: &FieldState,
    t_final: f64,
) -> Result<Vec<(f64, FieldState)>> {
    if t_final < 0.0 {
        return Err(Error::Config("t_final must be nonnegative".into()));
    }
    let generator = assemble_generator(config)?;
    let steps = (t_final / config.dt).round() as usize;
    let mut u = flatten(initial);
    let mut out = Vec::with_capacity(steps + 1);
    out.push((0.0, initial.clone()));
    for k in 1..=steps {
        u = classical_step(&u, &generator.matrix, config.dt)?;
        out.push((k as f64 * config.dt, unflatten(&u)?));
    }
    Ok(out)
}

/// Gaussian magnetic pulse: bz_i = exp(−(x_i − center)²/(2·width²)) on the
/// node-centered grid x_i = i·Δx, every other field zero.
pub fn gaussian_initial(config: &MaxwellConfig, center: f64, width: f64) -> Result<FieldState> {
    if !(center > 0.0 && center < config.domain_length) {
        return Err(Error::Config(format!(
            "gaussian center {center} outside domain (0, {})",
            config.domain_length
        )));
    }
    if !(width > 0.0) {
        return Err(Error::Config("gaussian width must be positive".into()));
    }
    let dx = config.dx();
    let mut state = FieldState::zeros(config.n_grid);
    for i in 0..config.n_grid {
        let x = i as f64 * dx;
        state.bz[i] = (-(x - center).powi(2) / (2.0 * width * width)).exp();
    }
    Ok(state)
}

/// Field-major flatten: index = field·n_grid + node.
pub fn flatten(state: &FieldState) -> Vec<f64> {
    let mut out = Vec::with_capacity(4 * state.n_grid());
    out.extend_from_slice(&state.by);
    out.extend_from_slice(&state.bz);
    out.extend_from_slice(&state.ey);
    out.extend_from_slice(&state.ez);
    out
}

/// Inverse of [`flatten`].
pub fn unflatten(values: &[f64]) -> Result<FieldState> {
    if values.len() % 4 != 0 || values.is_empty() {
        return Err(Error::DimensionMismatch {
            left: values.len(),
            right: 4,
        });
    }
    let n = values.len() / 4;
    Ok(FieldState {
        by: values[..n].to_vec(),
        bz: values[n..2 * n].to_vec(),
        ey: values[2 * n..3 * n].to_vec(),
        ez: values[3 * n..].to_vec(),
    })
}
