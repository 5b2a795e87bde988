//! Cubic (four-point Lagrange) interpolation on a uniform grid.

/// Values sampled at `t0 + k dt`, interpolated with the four nearest nodes.
#[derive(Debug, Clone, Copy)]
pub struct UniformCubic<'a> {
    pub t0: f64,
    pub dt: f64,
    pub values: &'a [f64],
}

impl<'a> UniformCubic<'a> {
    pub fn new(t0: f64, dt: f64, values: &'a [f64]) -> Self {
        UniformCubic { t0, dt, values }
    }

    pub fn eval(&self, t: f64) -> f64 {
        let n = self.values.len();
        match n {
            0 => return f64::NAN,
            1 => return self.values[0],
            _ => {}
        }
        let x = (t - self.t0) / self.dt;
        let k = x.round();
        if (x - k).abs() < 1e-12 && k >= 0.0 && (k as usize) < n {
            return self.values[k as usize];
        }
        if n < 4 {
            let i = (x.floor().max(0.0) as usize).min(n - 2);
            let f = x - i as f64;
            return self.values[i] * (1.0 - f) + self.values[i + 1] * f;
        }
        let base = (x.floor() as isize - 1).clamp(0, n as isize - 4) as usize;
        let u = x - base as f64;
        let v = &self.values[base..base + 4];
        let (l0, l1, l2, l3) = (
            -(u - 1.0) * (u - 2.0) * (u - 3.0) / 6.0,
            u * (u - 2.0) * (u - 3.0) / 2.0,
            -u * (u - 1.0) * (u - 3.0) / 2.0,
            u * (u - 1.0) * (u - 2.0) / 6.0,
        );
        l0 * v[0] + l1 * v[1] + l2 * v[2] + l3 * v[3]
    }
}
