//! Fixed-step integration of the occupation-number master equations.
//!
//! The second-order equations are integrated through their exact first
//! integral: with `u = dn/dt + 2 lambda n - 2 D` the single-oscillator
//! equation becomes `du/dt = 0` and the coupled pair `du_1/dt = -beta (n_1 - n_2)`,
//! while `dn/dt = u - 2 lambda n + 2 D`. This uses lambda and D only, so the
//! time derivatives of the coefficients (whose diffusion part is
//! logarithmically singular at t = 0) never enter the right-hand side.

use crate::error::{Error, Result};
use crate::model::CoupledSpec;
use crate::numerics::interp::UniformCubic;
use crate::transport::CoefficientSeries;

/// Occupation numbers sampled on the coefficient grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub time: Vec<f64>,
    /// One vector per channel (oscillator).
    pub n: Vec<Vec<f64>>,
    pub dn_dt: Vec<Vec<f64>>,
    /// Short description of the integrated equation.
    pub source: String,
}

impl Trajectory {
    pub fn channels(&self) -> usize {
        self.n.len()
    }

    pub fn len(&self) -> usize {
        self.time.len()
    }

    pub fn is_empty(&self) -> bool {
        self.time.is_empty()
    }

    pub fn dt(&self) -> f64 {
        if self.time.len() > 1 {
            self.time[1] - self.time[0]
        } else {
            0.0
        }
    }
}

/// Initial data of a coupled run.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CoupledInit {
    pub n0: [f64; 2],
    pub dn0: [f64; 2],
}

struct Coeffs<'a> {
    lambda: UniformCubic<'a>,
    diffusion: UniformCubic<'a>,
}

impl<'a> Coeffs<'a> {
    fn new(series: &'a CoefficientSeries) -> Self {
        Coeffs {
            lambda: UniformCubic::new(0.0, series.dt(), &series.lambda),
            diffusion: UniformCubic::new(0.0, series.dt(), &series.diffusion),
        }
    }

    fn at(&self, t: f64) -> (f64, f64) {
        (self.lambda.eval(t), self.diffusion.eval(t))
    }
}

fn output_len(series: &CoefficientSeries, t_max: f64) -> Result<usize> {
    if !(t_max.is_finite() && t_max > 0.0) {
        return Err(Error::Domain(format!(
            "t_max must be finite and > 0, got {t_max}"
        )));
    }
    if series.len() < 2 {
        return Err(Error::Domain(
            "coefficient series needs at least two samples".into(),
        ));
    }
    let dt = series.dt();
    if series.t_max() < t_max - 1e-9 * t_max.max(1.0) {
        return Err(Error::Domain(format!(
            "coefficient series covers [0, {}] but t_max = {t_max} was requested",
            series.t_max()
        )));
    }
    Ok(((t_max / dt) - 1e-9).ceil() as usize + 1)
}

fn check_initial(n0: f64, dn0: f64) -> Result<()> {
    if !(n0.is_finite() && n0 >= 0.0) {
        return Err(Error::Domain(format!(
            "initial occupation must be finite and >= 0, got {n0}"
        )));
    }
    if !dn0.is_finite() {
        return Err(Error::Domain(format!(
            "initial rate must be finite, got {dn0}"
        )));
    }
    Ok(())
}

/// Classical RK4 for a state of dimension `D` on the coefficient grid with
/// two substeps of `dt/2` per grid interval.
fn rk4_on_grid<const D: usize, F>(
    mut state: [f64; D],
    dt: f64,
    len: usize,
    mut rhs: F,
    mut record: impl FnMut(usize, f64, &[f64; D]),
) -> Result<()>
where
    F: FnMut(f64, &[f64; D]) -> [f64; D],
{
    record(0, 0.0, &state);
    let h = 0.5 * dt;
    let add = |x: &[f64; D], k: &[f64; D], s: f64| -> [f64; D] {
        let mut out = *x;
        for i in 0..D {
            out[i] += s * k[i];
        }
        out
    };
    for step in 1..len {
        let t0 = (step - 1) as f64 * dt;
        for sub in 0..2 {
            let t = t0 + sub as f64 * h;
            let k1 = rhs(t, &state);
            let k2 = rhs(t + 0.5 * h, &add(&state, &k1, 0.5 * h));
            let k3 = rhs(t + 0.5 * h, &add(&state, &k2, 0.5 * h));
            let k4 = rhs(t + h, &add(&state, &k3, h));
            for i in 0..D {
                state[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
            }
        }
        let t = step as f64 * dt;
        if state.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite { t });
        }
        record(step, t, &state);
    }
    Ok(())
}

/// dn/dt = -2 lambda n + 2 D.
pub fn evolve_single(coeffs: &CoefficientSeries, n0: f64, t_max: f64) -> Result<Trajectory> {
    check_initial(n0, 0.0)?;
    let len = output_len(coeffs, t_max)?;
    let c = Coeffs::new(coeffs);
    let mut n = vec![0.0; len];
    let mut dn = vec![0.0; len];
    rk4_on_grid(
        [n0],
        coeffs.dt(),
        len,
        |t, x| {
            let (l, d) = c.at(t);
            [-2.0 * l * x[0] + 2.0 * d]
        },
        |k, _t, x| {
            n[k] = x[0];
            dn[k] = -2.0 * coeffs.lambda[k] * x[0] + 2.0 * coeffs.diffusion[k];
        },
    )?;
    Ok(Trajectory {
        time: coeffs.time[..len].to_vec(),
        n: vec![n],
        dn_dt: vec![dn],
        source: "first-order master equation".into(),
    })
}

/// n'' + 2 lambda n' + 2 lambda' n = 2 D' with n(0) = n0, n'(0) = dn0.
pub fn evolve_single_second_order(
    coeffs: &CoefficientSeries,
    n0: f64,
    dn0: f64,
    t_max: f64,
) -> Result<Trajectory> {
    check_initial(n0, dn0)?;
    let len = output_len(coeffs, t_max)?;
    let c = Coeffs::new(coeffs);
    let u0 = dn0 + 2.0 * coeffs.lambda[0] * n0 - 2.0 * coeffs.diffusion[0];
    let mut n = vec![0.0; len];
    let mut dn = vec![0.0; len];
    rk4_on_grid(
        [n0, u0],
        coeffs.dt(),
        len,
        |t, x| {
            let (l, d) = c.at(t);
            [x[1] - 2.0 * l * x[0] + 2.0 * d, 0.0]
        },
        |k, _t, x| {
            n[k] = x[0];
            dn[k] = x[1] - 2.0 * coeffs.lambda[k] * x[0] + 2.0 * coeffs.diffusion[k];
        },
    )?;
    Ok(Trajectory {
        time: coeffs.time[..len].to_vec(),
        n: vec![n],
        dn_dt: vec![dn],
        source: "second-order master equation".into(),
    })
}

/// The coupled pair
/// n_1'' + 2 lambda_1 n_1' + 2 lambda_1' n_1 + beta (n_1 - n_2) = 2 D_1' and its mirror.
pub fn evolve_coupled(
    spec: &CoupledSpec,
    coeffs1: &CoefficientSeries,
    coeffs2: &CoefficientSeries,
    init: &CoupledInit,
    t_max: f64,
) -> Result<Trajectory> {
    if !(spec.beta.is_finite() && spec.beta >= 0.0) {
        return Err(Error::Domain(format!(
            "beta must be finite and >= 0, got {}",
            spec.beta
        )));
    }
    if (coeffs1.dt() - coeffs2.dt()).abs() > 1e-12 * coeffs1.dt() {
        return Err(Error::Domain(format!(
            "coefficient grids differ: dt = {} vs {}",
            coeffs1.dt(),
            coeffs2.dt()
        )));
    }
    for c in 0..2 {
        check_initial(init.n0[c], init.dn0[c])?;
    }
    let len = output_len(coeffs1, t_max)?.min(output_len(coeffs2, t_max)?);
    let c1 = Coeffs::new(coeffs1);
    let c2 = Coeffs::new(coeffs2);
    let beta = spec.beta;
    let u0 = [
        init.dn0[0] + 2.0 * coeffs1.lambda[0] * init.n0[0] - 2.0 * coeffs1.diffusion[0],
        init.dn0[1] + 2.0 * coeffs2.lambda[0] * init.n0[1] - 2.0 * coeffs2.diffusion[0],
    ];
    let mut n = [vec![0.0; len], vec![0.0; len]];
    let mut dn = [vec![0.0; len], vec![0.0; len]];
    rk4_on_grid(
        [init.n0[0], u0[0], init.n0[1], u0[1]],
        coeffs1.dt(),
        len,
        |t, x| {
            let (l1, d1) = c1.at(t);
            let (l2, d2) = c2.at(t);
            [
                x[1] - 2.0 * l1 * x[0] + 2.0 * d1,
                -beta * (x[0] - x[2]),
                x[3] - 2.0 * l2 * x[2] + 2.0 * d2,
                -beta * (x[2] - x[0]),
            ]
        },
        |k, _t, x| {
            n[0][k] = x[0];
            n[1][k] = x[2];
            dn[0][k] = x[1] - 2.0 * coeffs1.lambda[k] * x[0] + 2.0 * coeffs1.diffusion[k];
            dn[1][k] = x[3] - 2.0 * coeffs2.lambda[k] * x[2] + 2.0 * coeffs2.diffusion[k];
        },
    )?;
    let [n1, n2] = n;
    let [d1, d2] = dn;
    Ok(Trajectory {
        time: coeffs1.time[..len].to_vec(),
        n: vec![n1, n2],
        dn_dt: vec![d1, d2],
        source: format!("coupled master equations, beta = {beta}"),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::transport::TimeGrid;

    fn constant(lambda: f64, d: f64, t_max: f64, dt: f64) -> CoefficientSeries {
        CoefficientSeries::constant(TimeGrid::covering(t_max, dt).unwrap(), lambda, d, 1.0)
    }

    #[test]
    fn null_dynamics() {
        let c = constant(0.0, 0.0, 5.0, 0.1);
        let tr = evolve_single(&c, 0.3, 5.0).unwrap();
        assert!(tr.n[0].iter().all(|&x| x == 0.3));
        let tr = evolve_single_second_order(&c, 0.3, 0.0, 5.0).unwrap();
        assert!(tr.n[0].iter().all(|&x| x == 0.3));
        let tr = evolve_single_second_order(&c, 0.0, 0.7, 5.0).unwrap();
        for (t, n) in tr.time.iter().zip(&tr.n[0]) {
            assert!((n - 0.7 * t).abs() < 1e-12);
        }
    }

    #[test]
    fn constant_coefficients_closed_form() {
        let (l, d, n0) = (0.4, 0.1, 0.8);
        let c = constant(l, d, 10.0, 0.05);
        let tr = evolve_single(&c, n0, 10.0).unwrap();
        for (t, n) in tr.time.iter().zip(&tr.n[0]) {
            let exact = d / l + (n0 - d / l) * (-2.0 * l * t).exp();
            assert!((n - exact).abs() <= 1e-8 * exact.abs(), "t = {t}");
        }
    }

    #[test]
    fn fourth_order_convergence() {
        let (l, d, n0) = (1.5, 0.2, 0.0);
        let err = |dt: f64| {
            let c = constant(l, d, 4.0, dt);
            let tr = evolve_single(&c, n0, 4.0).unwrap();
            tr.time
                .iter()
                .zip(&tr.n[0])
                .map(|(t, n)| (n - (d / l + (n0 - d / l) * (-2.0 * l * t).exp())).abs())
                .fold(0.0, f64::max)
        };
        let ratio = err(0.2) / err(0.1);
        assert!((ratio - 16.0).abs() < 2.0, "ratio {ratio}");
    }

    #[test]
    fn coverage_and_grid_errors() {
        let c = constant(0.1, 0.1, 2.0, 0.1);
        assert!(evolve_single(&c, 0.0, 3.0).is_err());
        assert!(evolve_single(&c, -1.0, 1.0).is_err());
        let other = constant(0.1, 0.1, 2.0, 0.05);
        let spec = crate::model::CoupledSpec {
            systems: [crate::model::SystemSpec::new(
                1.0,
                crate::model::BathSpec::bosonic(0.0, 10.0, 1.0).unwrap(),
                crate::model::BathSpec::bosonic(0.0, 10.0, 1.0).unwrap(),
            )
            .unwrap(); 2],
            beta: 0.1,
        };
        assert!(evolve_coupled(&spec, &c, &other, &CoupledInit::default(), 1.0).is_err());
    }
}
