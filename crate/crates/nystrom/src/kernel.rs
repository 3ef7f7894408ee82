use std::fmt;
use std::io::{self, Write};
use std::sync::Arc;

use idescope_process::{fmt_f64, Error, Result};
use nalgebra::DMatrix;

use crate::quadrature::{build_quadrature, Habitat, Quadrature, QuadratureRule};

/// A dispersal kernel k(x, y) on the habitat.
#[derive(Clone)]
pub enum DispersalKernel {
    /// (a/2)·e^{−a|x−y|}
    Laplace {
        a: f64,
    },
    Constant {
        c: f64,
    },
    Custom(Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>),
}

impl fmt::Debug for DispersalKernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Laplace { a } => write!(f, "Laplace {{ a: {a} }}"),
            Self::Constant { c } => write!(f, "Constant {{ c: {c} }}"),
            Self::Custom(_) => f.write_str("Custom"),
        }
    }
}

impl DispersalKernel {
    pub fn eval(&self, x: f64, y: f64) -> f64 {
        match self {
            Self::Laplace { a } => 0.5 * a * (-a * (x - y).abs()).exp(),
            Self::Constant { c } => *c,
            Self::Custom(k) => k(x, y),
        }
    }

    /// ∫_lo^hi k(x, y) dy in closed form, when known.
    pub fn row_mass(&self, x: f64, lo: f64, hi: f64) -> Option<f64> {
        match self {
            Self::Laplace { a } => Some(1.0 - 0.5 * ((-a * (x - lo)).exp() + (-a * (hi - x)).exp())),
            Self::Constant { c } => Some(c * (hi - lo)),
            Self::Custom(_) => None,
        }
    }

    /// sup_x ∫_lo^hi k(x, y) dy in closed form, when known.
    pub fn sup_row_mass(&self, lo: f64, hi: f64) -> Option<f64> {
        match self {
            // attained at the midpoint: 1 − e^{−aL} with L the half-length
            Self::Laplace { a } => Some(1.0 - (-a * 0.5 * (hi - lo)).exp()),
            Self::Constant { c } => Some(c.abs() * (hi - lo)),
            Self::Custom(_) => None,
        }
    }
}

/// ∫_lo^hi k(x, y) dy with the habitat split at the kink y = x, n nodes per side.
pub fn split_row_integral(
    kernel: &DispersalKernel,
    x: f64,
    lo: f64,
    hi: f64,
    rule: &dyn QuadratureRule,
    n: usize,
) -> Result<f64> {
    let mut total = 0.0;
    for (a, b) in [(lo, x), (x, hi)] {
        if b > a {
            let q = build_quadrature(a, b, n, rule)?;
            total += q.integrate(|y| kernel.eval(x, y));
        }
    }
    Ok(total)
}

/// Turns a kernel and a quadrature into the weighted matrix W with (K u)_i ≈ Σ_j W_ij u_j.
pub trait NystromAssembly: Send + Sync {
    fn name(&self) -> &'static str;
    fn assemble(&self, kernel: &DispersalKernel, q: &Quadrature) -> DMatrix<f64>;
}

/// W_ij = w_j k(x_i, x_j).
pub struct PlainNystrom;

/// Plain weights off the diagonal; the diagonal absorbs the analytic row mass so that
/// Σ_j W_ij = ∫ k(x_i, y) dy. Equivalent to subtracting f(x_i) under the integral, which
/// removes the leading error of the kink at y = x_i. Falls back to plain weights when no
/// closed-form row mass is known.
pub struct RowCorrectedNystrom;

impl NystromAssembly for PlainNystrom {
    fn name(&self) -> &'static str {
        "plain"
    }

    fn assemble(&self, kernel: &DispersalKernel, q: &Quadrature) -> DMatrix<f64> {
        let n = q.len();
        DMatrix::from_fn(n, n, |i, j| q.weights[j] * kernel.eval(q.nodes[i], q.nodes[j]))
    }
}

impl NystromAssembly for RowCorrectedNystrom {
    fn name(&self) -> &'static str {
        "row_corrected"
    }

    fn assemble(&self, kernel: &DispersalKernel, q: &Quadrature) -> DMatrix<f64> {
        let mut w = PlainNystrom.assemble(kernel, q);
        let Habitat::Interval { lo, hi } = q.habitat else {
            return w;
        };
        for i in 0..q.len() {
            let Some(mass) = kernel.row_mass(q.nodes[i], lo, hi) else {
                return PlainNystrom.assemble(kernel, q);
            };
            let off: f64 = (0..q.len()).filter(|&j| j != i).map(|j| w[(i, j)]).sum();
            w[(i, i)] = mass - off;
        }
        w
    }
}

pub fn assemblies() -> Vec<Box<dyn NystromAssembly>> {
    vec![Box::new(PlainNystrom), Box::new(RowCorrectedNystrom)]
}

pub fn assembly_by_name(name: &str) -> Result<Box<dyn NystromAssembly>> {
    assemblies()
        .into_iter()
        .find(|a| a.name() == name)
        .ok_or_else(|| Error::invalid(format!("unknown Nyström assembly `{name}`")))
}

/// max_i Σ_j |W_ij|.
pub fn max_row_sum(w: &DMatrix<f64>) -> f64 {
    (0..w.nrows())
        .map(|i| w.row(i).iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

pub fn write_matrix_csv<W: Write>(m: &DMatrix<f64>, mut out: W) -> io::Result<()> {
    for i in 0..m.nrows() {
        let row: Vec<String> = m.row(i).iter().map(|v| fmt_f64(*v)).collect();
        writeln!(out, "{}", row.join(","))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::{Midpoint, Trapezoid};

    #[test]
    fn laplace_row_mass_matches_split_integration() {
        let k = DispersalKernel::Laplace { a: 2.0 };
        for x in [-10.0, -3.3, 0.0, 7.25, 10.0] {
            let exact = k.row_mass(x, -10.0, 10.0).unwrap();
            let split = split_row_integral(&k, x, -10.0, 10.0, &crate::quadrature::GaussLegendre, 40).unwrap();
            assert!((exact - split).abs() < 1e-12, "x={x}: {exact} vs {split}");
        }
        assert!((k.sup_row_mass(-10.0, 10.0).unwrap() - (1.0 - (-20.0_f64).exp())).abs() < 1e-16);
    }

    #[test]
    fn corrected_rows_carry_analytic_mass() {
        let k = DispersalKernel::Laplace { a: 2.0 };
        let q = build_quadrature(-10.0, 10.0, 64, &Midpoint).unwrap();
        let w = RowCorrectedNystrom.assemble(&k, &q);
        for i in 0..q.len() {
            let s: f64 = w.row(i).iter().sum();
            assert!((s - k.row_mass(q.nodes[i], -10.0, 10.0).unwrap()).abs() < 1e-13);
            assert!(w[(i, i)] > 0.0);
        }
    }

    #[test]
    fn custom_kernel_falls_back_to_plain() {
        let k = DispersalKernel::Custom(Arc::new(|x, y| (x * y).cos()));
        let q = build_quadrature(-1.0, 1.0, 9, &Trapezoid).unwrap();
        assert_eq!(RowCorrectedNystrom.assemble(&k, &q), PlainNystrom.assemble(&k, &q));
    }

    #[test]
    fn matrix_csv_rows() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.0, 2.0]);
        let mut buf = Vec::new();
        write_matrix_csv(&m, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 2);
        assert!(text.starts_with("1.0000000000000000e0,5.0000000000000000e-1\n"));
    }
}
