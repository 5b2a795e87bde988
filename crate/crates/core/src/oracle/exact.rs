//! Exact linear evolution of the oscillator plus discretized baths.
//!
//! The state is described by quadratures x = (a + a^dag)/sqrt 2 and
//! p = (a - a^dag)/(i sqrt 2) ordered as (x_a, p_a, x_1..x_K, p_1..p_K).
//! Heisenberg's equations are linear, v' = G v, so the symmetrized
//! covariance S = <{v, v^T}>/2 obeys S' = G S + S G^T and the oscillator
//! occupation is (S_00 + S_11 - 1)/2.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::model::{Statistics, SystemSpec};
use crate::oracle::bath::DiscretizedBath;

/// Default cap on the total number of bath modes.
pub const DEFAULT_MODE_CAP: usize = 2048;

/// Form of the oscillator-bath interaction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CouplingForm {
    /// alpha_i (a^dag + a)(c^dag + c), including counter-rotating terms.
    #[default]
    Full,
    /// alpha_i (a^dag c + a c^dag); conserves the total excitation number.
    /// Used as a solver self-test only.
    RotatingWave,
}

/// Sparse real generator G of the quadrature flow.
#[derive(Debug, Clone, PartialEq)]
pub struct Generator {
    dimension: usize,
    entries: Vec<(usize, usize, f64)>,
    max_frequency: f64,
}

impl Generator {
    pub fn new(omega: f64, modes: &[(f64, f64)], coupling: CouplingForm) -> Self {
        let k = modes.len();
        let dimension = 2 + 2 * k;
        let mut entries = vec![(0, 1, omega), (1, 0, -omega)];
        let mut max_frequency = omega.abs();
        for (i, &(w, alpha)) in modes.iter().enumerate() {
            let (x, p) = (2 + i, 2 + k + i);
            entries.push((x, p, w));
            entries.push((p, x, -w));
            max_frequency = max_frequency.max(w.abs());
            if alpha == 0.0 {
                continue;
            }
            match coupling {
                CouplingForm::Full => {
                    entries.push((1, x, -2.0 * alpha));
                    entries.push((p, 0, -2.0 * alpha));
                }
                CouplingForm::RotatingWave => {
                    entries.push((0, p, alpha));
                    entries.push((1, x, -alpha));
                    entries.push((x, 1, alpha));
                    entries.push((p, 0, -alpha));
                }
            }
        }
        Generator {
            dimension,
            entries,
            max_frequency,
        }
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn max_frequency(&self) -> f64 {
        self.max_frequency
    }

    /// out = v G (row vector times generator).
    fn apply_left(&self, v: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|o| *o = 0.0);
        for &(r, c, g) in &self.entries {
            out[c] += v[r] * g;
        }
    }

    fn dense(&self) -> DMatrix<f64> {
        let mut g = DMatrix::zeros(self.dimension, self.dimension);
        for &(r, c, v) in &self.entries {
            g[(r, c)] += v;
        }
        g
    }
}

fn collect_modes(baths: [&DiscretizedBath; 2]) -> Vec<(f64, f64)> {
    baths
        .iter()
        .flat_map(|b| {
            b.mode_frequencies
                .iter()
                .copied()
                .zip(b.mode_couplings.iter().copied())
        })
        .collect()
}

fn initial_variances(n0: f64, baths: [&DiscretizedBath; 2]) -> Vec<f64> {
    let occ: Vec<f64> = baths
        .iter()
        .flat_map(|b| b.initial_occupations.iter().copied())
        .collect();
    let mut d = vec![n0 + 0.5, n0 + 0.5];
    d.extend(occ.iter().map(|n| n + 0.5));
    d.extend(occ.iter().map(|n| n + 0.5));
    d
}

/// Dense covariance matrix of all quadratures.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentState {
    pub covariance: DMatrix<f64>,
    pub time: f64,
}

impl MomentState {
    /// Oscillator with occupation `n0` times thermal bath modes.
    pub fn initial(n0: f64, baths: [&DiscretizedBath; 2]) -> Self {
        let d = initial_variances(n0, baths);
        MomentState {
            covariance: DMatrix::from_diagonal(&nalgebra::DVector::from_vec(d)),
            time: 0.0,
        }
    }

    pub fn dimension(&self) -> usize {
        self.covariance.nrows()
    }

    pub fn oscillator_occupation(&self) -> f64 {
        0.5 * (self.covariance[(0, 0)] + self.covariance[(1, 1)] - 1.0)
    }

    /// Occupations of the oscillator followed by every bath mode.
    pub fn occupations(&self) -> Vec<f64> {
        let k = (self.dimension() - 2) / 2;
        let s = &self.covariance;
        let mut out = vec![self.oscillator_occupation()];
        out.extend((0..k).map(|i| 0.5 * (s[(2 + i, 2 + i)] + s[(2 + k + i, 2 + k + i)] - 1.0)));
        out
    }

    pub fn total_excitations(&self) -> f64 {
        self.occupations().iter().sum()
    }

    /// max |S - S^T|.
    pub fn hermiticity_defect(&self) -> f64 {
        let s = &self.covariance;
        (s - s.transpose()).amax()
    }

    /// Advances by `steps` RK4 steps of size `h` under S' = G S + S G^T.
    pub fn evolve(&mut self, generator: &Generator, h: f64, steps: usize) -> Result<()> {
        if generator.dimension() != self.dimension() {
            return Err(Error::Domain(
                "generator and state dimensions differ".into(),
            ));
        }
        let g = generator.dense();
        let rhs = |s: &DMatrix<f64>| -> DMatrix<f64> {
            let gs = &g * s;
            let t = gs.transpose();
            gs + t
        };
        for _ in 0..steps {
            let s = &self.covariance;
            let k1 = rhs(s);
            let k2 = rhs(&(s + &k1 * (0.5 * h)));
            let k3 = rhs(&(s + &k2 * (0.5 * h)));
            let k4 = rhs(&(s + &k3 * h));
            self.covariance = s + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
            self.time += h;
            if !self.covariance.iter().all(|v| v.is_finite()) {
                return Err(Error::NonFinite { t: self.time });
            }
        }
        Ok(())
    }
}

/// Settings of [`evolve_exact`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExactOptions {
    /// Output sampling interval.
    pub output_dt: f64,
    /// Internal step is at most `step_factor / max_frequency`.
    pub step_factor: f64,
    /// Initial oscillator occupation.
    pub n0: f64,
    pub coupling: CouplingForm,
    pub mode_cap: usize,
}

impl Default for ExactOptions {
    fn default() -> Self {
        ExactOptions {
            output_dt: 0.01,
            step_factor: 0.2,
            n0: 0.0,
            coupling: CouplingForm::Full,
            mode_cap: DEFAULT_MODE_CAP,
        }
    }
}

/// Oscillator occupation from the exact evolution.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactSeries {
    pub time: Vec<f64>,
    pub n: Vec<f64>,
    pub step: f64,
    pub modes: usize,
    /// Earliest revival time 2 pi / dw over both baths; results beyond it
    /// carry finite-bath artefacts.
    pub recurrence_time: f64,
}

/// Evolves the oscillator occupation of a bosonic `spec` coupled to the
/// discretized `baths` up to `t_max`.
///
/// Only the first two rows of the propagator E(t) = exp(G t) are needed:
/// with a diagonal initial covariance S0, S_00 = sum_j E_0j^2 S0_jj. The rows
/// obey r' = r G and are integrated with fixed-step RK4.
pub fn evolve_exact(
    spec: &SystemSpec,
    baths: [&DiscretizedBath; 2],
    t_max: f64,
    opts: &ExactOptions,
) -> Result<ExactSeries> {
    if spec.common_statistics() != Some(Statistics::Bosonic)
        || baths.iter().any(|b| b.statistics != Statistics::Bosonic)
    {
        return Err(Error::Domain(
            "the exact evolution supports bosonic baths only".into(),
        ));
    }
    let modes = baths[0].len() + baths[1].len();
    if modes > opts.mode_cap {
        return Err(Error::DimensionCap {
            dimension: modes,
            cap: opts.mode_cap,
        });
    }
    if !(t_max.is_finite() && t_max > 0.0) {
        return Err(Error::Domain(format!("t_max must be > 0, got {t_max}")));
    }
    if !(opts.output_dt > 0.0 && opts.step_factor > 0.0 && opts.n0 >= 0.0) {
        return Err(Error::Domain(
            "output_dt, step_factor must be > 0 and n0 >= 0".into(),
        ));
    }
    let generator = Generator::new(spec.omega(), &collect_modes(baths), opts.coupling);
    let variances = initial_variances(opts.n0, baths);
    let substeps = (opts.output_dt * generator.max_frequency() / opts.step_factor)
        .ceil()
        .max(1.0) as usize;
    let h = opts.output_dt / substeps as f64;
    let outputs = (t_max / opts.output_dt - 1e-9).ceil() as usize;

    let dim = generator.dimension();
    let mut rows = [vec![0.0; dim], vec![0.0; dim]];
    rows[0][0] = 1.0;
    rows[1][1] = 1.0;
    let mut scratch = [
        vec![0.0; dim],
        vec![0.0; dim],
        vec![0.0; dim],
        vec![0.0; dim],
        vec![0.0; dim],
    ];
    let occupation = |rows: &[Vec<f64>; 2]| -> f64 {
        let q: f64 = rows
            .iter()
            .map(|r| {
                r.iter()
                    .zip(&variances)
                    .map(|(e, v)| e * e * v)
                    .sum::<f64>()
            })
            .sum();
        0.5 * (q - 1.0)
    };

    let mut time = vec![0.0];
    let mut n = vec![occupation(&rows)];
    for k in 1..=outputs {
        for row in rows.iter_mut() {
            for _ in 0..substeps {
                rk4_row(&generator, row, h, &mut scratch);
            }
        }
        let t = k as f64 * opts.output_dt;
        let v = occupation(&rows);
        if !v.is_finite() {
            return Err(Error::NonFinite { t });
        }
        time.push(t);
        n.push(v);
    }
    let recurrence_time = baths
        .iter()
        .map(|b| b.recurrence_time())
        .fold(f64::INFINITY, f64::min);
    Ok(ExactSeries {
        time,
        n,
        step: h,
        modes,
        recurrence_time,
    })
}

fn rk4_row(g: &Generator, row: &mut [f64], h: f64, s: &mut [Vec<f64>; 5]) {
    let [k1, k2, k3, k4, tmp] = s;
    g.apply_left(row, k1);
    for ((t, r), k) in tmp.iter_mut().zip(row.iter()).zip(k1.iter()) {
        *t = r + 0.5 * h * k;
    }
    g.apply_left(tmp, k2);
    for ((t, r), k) in tmp.iter_mut().zip(row.iter()).zip(k2.iter()) {
        *t = r + 0.5 * h * k;
    }
    g.apply_left(tmp, k3);
    for ((t, r), k) in tmp.iter_mut().zip(row.iter()).zip(k3.iter()) {
        *t = r + h * k;
    }
    g.apply_left(tmp, k4);
    for (i, r) in row.iter_mut().enumerate() {
        *r += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::BathSpec;
    use crate::oracle::bath::sample_bath;

    fn small(alpha: f64, t: f64) -> (SystemSpec, DiscretizedBath) {
        let b = BathSpec::bosonic(alpha, 5.0, t).unwrap();
        let spec = SystemSpec::new(1.0, b, b).unwrap();
        (spec, sample_bath(&b, 50, 50.0).unwrap())
    }

    #[test]
    fn zero_coupling_preserves_occupation() {
        let (spec, d) = small(0.0, 1.0);
        let opts = ExactOptions {
            n0: 0.7,
            output_dt: 0.05,
            ..Default::default()
        };
        let s = evolve_exact(&spec, [&d, &d], 5.0, &opts).unwrap();
        assert!(
            s.n.iter().all(|v| (v - 0.7).abs() < 1e-9),
            "{:?}",
            &s.n[..5]
        );
    }

    #[test]
    fn rows_agree_with_dense_covariance() {
        let (spec, d) = small(0.05, 1.0);
        let opts = ExactOptions {
            output_dt: 0.05,
            ..Default::default()
        };
        let s = evolve_exact(&spec, [&d, &d], 1.0, &opts).unwrap();
        let g = Generator::new(spec.omega(), &collect_modes([&d, &d]), CouplingForm::Full);
        let mut m = MomentState::initial(0.0, [&d, &d]);
        m.evolve(&g, s.step, (1.0 / s.step).round() as usize)
            .unwrap();
        // The two schemes differ at the RK4 truncation level only.
        let diff = (m.oscillator_occupation() - s.n.last().unwrap()).abs();
        assert!(diff < 1e-7, "{diff}");
        assert!(m.hermiticity_defect() < 1e-10);
        assert!(m.occupations().iter().all(|&n| n > -1e-10));
    }

    #[test]
    fn rotating_wave_conserves_excitations() {
        let (spec, d) = small(0.05, 1.0);
        let modes = collect_modes([&d, &d]);
        let g = Generator::new(spec.omega(), &modes, CouplingForm::RotatingWave);
        let mut m = MomentState::initial(0.0, [&d, &d]);
        let before = m.total_excitations();
        m.evolve(&g, 0.2 / g.max_frequency(), 200).unwrap();
        assert!((m.total_excitations() - before).abs() < 1e-8 * before);
        assert!(m.oscillator_occupation() > 1e-6);
        let full = Generator::new(spec.omega(), &modes, CouplingForm::Full);
        let mut f = MomentState::initial(0.0, [&d, &d]);
        f.evolve(&full, 0.2 / full.max_frequency(), 200).unwrap();
        assert!((f.total_excitations() - before).abs() > 1e-6);
    }

    #[test]
    fn rejects_fermionic_and_oversized() {
        let (spec, d) = small(0.05, 1.0);
        let f = spec.with_statistics(Statistics::Fermionic);
        assert!(evolve_exact(&f, [&d, &d], 1.0, &ExactOptions::default()).is_err());
        let opts = ExactOptions {
            mode_cap: 60,
            ..Default::default()
        };
        assert!(matches!(
            evolve_exact(&spec, [&d, &d], 1.0, &opts),
            Err(Error::DimensionCap {
                dimension: 100,
                cap: 60
            })
        ));
    }
}
