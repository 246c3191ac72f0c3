//! Adaptive DOP853 integrator with dense output.
//!
//! Follows Hairer's reference implementation: 12-stage 8th-order step with a
//! combined 5th/3rd-order error estimate, and a 7th-order continuous extension
//! that costs three extra evaluations per step and is only built on request.

use super::dop853_tableau::*;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Upper bound on |h|.
    pub max_step: f64,
    /// Lower bound on |h| below which the step is reported as failed.
    pub min_step: f64,
    pub max_steps: usize,
    /// Ceiling on `|y_i|` in the relative error scale, for components such
    /// as unwrapped angles whose magnitude says nothing about precision.
    pub scale_ceiling: f64,
}

impl Default for OdeOptions {
    fn default() -> Self {
        Self { rel_tol: 1e-10, abs_tol: 1e-12, max_step: f64::INFINITY, min_step: 1e-14, max_steps: 1_000_000, scale_ceiling: f64::INFINITY }
    }
}

type Vector<const N: usize> = [f64; N];

const SAFE: f64 = 0.9;
const FACC1: f64 = 1.0 / 0.333;
const FACC2: f64 = 1.0 / 6.0;
const EXPO1: f64 = 1.0 / 8.0;

fn axpy<const N: usize>(y: &Vector<N>, h: f64, terms: &[(f64, &Vector<N>)]) -> Vector<N> {
    let mut out = *y;
    for (i, o) in out.iter_mut().enumerate() {
        let mut acc = 0.0;
        for (c, k) in terms {
            acc += c * k[i];
        }
        *o += h * acc;
    }
    out
}

/// Stage derivatives of the most recent accepted step.
#[derive(Debug, Clone)]
struct Stages<const N: usize> {
    k: [Vector<N>; 12],
}

/// Integrator state.  `F` maps `(t, y)` to `dy/dt`.
pub struct Dop853<const N: usize, F> {
    f: F,
    opts: OdeOptions,
    t: f64,
    y: Vector<N>,
    dy: Vector<N>,
    h: f64,
    direction: f64,
    facold: f64,
    last_rejected: bool,
    steps: usize,
    t_old: f64,
    y_old: Vector<N>,
    h_old: f64,
    stages: Option<Stages<N>>,
    dense: Option<[Vector<N>; 8]>,
}

impl<const N: usize, F: FnMut(f64, &Vector<N>) -> Vector<N>> Dop853<N, F> {
    /// Prepares an integration starting at `(t0, y0)` heading towards
    /// increasing time when `direction > 0` and decreasing time otherwise.
    pub fn new(mut f: F, t0: f64, y0: Vector<N>, direction: f64, opts: OdeOptions) -> Self {
        let dy = f(t0, &y0);
        let direction = if direction < 0.0 { -1.0 } else { 1.0 };
        let mut solver = Self {
            f,
            opts,
            t: t0,
            y: y0,
            dy,
            h: 0.0,
            direction,
            facold: 1e-4,
            last_rejected: false,
            steps: 0,
            t_old: t0,
            y_old: y0,
            h_old: 0.0,
            stages: None,
            dense: None,
        };
        solver.h = solver.initial_step();
        solver
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn y(&self) -> &Vector<N> {
        &self.y
    }

    pub fn t_prev(&self) -> f64 {
        self.t_old
    }

    pub fn y_prev(&self) -> &Vector<N> {
        &self.y_old
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    fn scale(&self, a: &Vector<N>, b: &Vector<N>) -> Vector<N> {
        let mut sk = [0.0; N];
        for i in 0..N {
            sk[i] = self.opts.abs_tol + self.opts.rel_tol * a[i].abs().max(b[i].abs()).min(self.opts.scale_ceiling);
        }
        sk
    }

    fn initial_step(&mut self) -> f64 {
        let sk = self.scale(&self.y, &self.y);
        let dnf: f64 = (0..N).map(|i| (self.dy[i] / sk[i]).powi(2)).sum();
        let dny: f64 = (0..N).map(|i| (self.y[i] / sk[i]).powi(2)).sum();
        let mut h = if dnf <= 1e-10 || dny <= 1e-10 { 1e-6 } else { 0.01 * (dny / dnf).sqrt() };
        h = h.min(self.opts.max_step);
        let y1 = axpy(&self.y, self.direction * h, &[(1.0, &self.dy)]);
        let f1 = (self.f)(self.t + self.direction * h, &y1);
        let der2 = (0..N).map(|i| ((f1[i] - self.dy[i]) / sk[i]).powi(2)).sum::<f64>().sqrt() / h;
        let der12 = der2.abs().max(dnf.sqrt());
        let h1 = if der12 <= 1e-15 { (h * 1e-3).max(1e-6) } else { (0.01 / der12).powf(1.0 / 8.0) };
        (100.0 * h).min(h1).min(self.opts.max_step) * self.direction
    }

    /// Evaluates the twelve stages of a step of size `h` from `(t, y)` with
    /// `dy = f(t, y)`.  Returns the new state and the stages.
    fn attempt(&mut self, t: f64, y: &Vector<N>, dy: &Vector<N>, h: f64) -> (Vector<N>, Stages<N>) {
        let f = &mut self.f;
        let k1 = *dy;
        let k2 = f(t + C2 * h, &axpy(y, h, &[(A21, &k1)]));
        let k3 = f(t + C3 * h, &axpy(y, h, &[(A31, &k1), (A32, &k2)]));
        let k4 = f(t + C4 * h, &axpy(y, h, &[(A41, &k1), (A43, &k3)]));
        let k5 = f(t + C5 * h, &axpy(y, h, &[(A51, &k1), (A53, &k3), (A54, &k4)]));
        let k6 = f(t + C6 * h, &axpy(y, h, &[(A61, &k1), (A64, &k4), (A65, &k5)]));
        let k7 = f(t + C7 * h, &axpy(y, h, &[(A71, &k1), (A74, &k4), (A75, &k5), (A76, &k6)]));
        let k8 = f(t + C8 * h, &axpy(y, h, &[(A81, &k1), (A84, &k4), (A85, &k5), (A86, &k6), (A87, &k7)]));
        let k9 = f(
            t + C9 * h,
            &axpy(y, h, &[(A91, &k1), (A94, &k4), (A95, &k5), (A96, &k6), (A97, &k7), (A98, &k8)]),
        );
        let k10 = f(
            t + C10 * h,
            &axpy(y, h, &[(A101, &k1), (A104, &k4), (A105, &k5), (A106, &k6), (A107, &k7), (A108, &k8), (A109, &k9)]),
        );
        let k11 = f(
            t + C11 * h,
            &axpy(
                y,
                h,
                &[(A111, &k1), (A114, &k4), (A115, &k5), (A116, &k6), (A117, &k7), (A118, &k8), (A119, &k9), (A1110, &k10)],
            ),
        );
        let k12 = f(
            t + h,
            &axpy(
                y,
                h,
                &[
                    (A121, &k1),
                    (A124, &k4),
                    (A125, &k5),
                    (A126, &k6),
                    (A127, &k7),
                    (A128, &k8),
                    (A129, &k9),
                    (A1210, &k10),
                    (A1211, &k11),
                ],
            ),
        );
        let y_new = axpy(
            y,
            h,
            &[(B1, &k1), (B6, &k6), (B7, &k7), (B8, &k8), (B9, &k9), (B10, &k10), (B11, &k11), (B12, &k12)],
        );
        (y_new, Stages { k: [k1, k2, k3, k4, k5, k6, k7, k8, k9, k10, k11, k12] })
    }

    fn error_norm(&self, y: &Vector<N>, y_new: &Vector<N>, st: &Stages<N>, h: f64) -> f64 {
        let k = &st.k;
        let sk = self.scale(y, y_new);
        let (mut err, mut err2) = (0.0, 0.0);
        for i in 0..N {
            let bsum = B1 * k[0][i]
                + B6 * k[5][i]
                + B7 * k[6][i]
                + B8 * k[7][i]
                + B9 * k[8][i]
                + B10 * k[9][i]
                + B11 * k[10][i]
                + B12 * k[11][i];
            let e2 = bsum - BHH1 * k[0][i] - BHH2 * k[8][i] - BHH3 * k[11][i];
            err2 += (e2 / sk[i]).powi(2);
            let e = ER1 * k[0][i]
                + ER6 * k[5][i]
                + ER7 * k[6][i]
                + ER8 * k[7][i]
                + ER9 * k[8][i]
                + ER10 * k[9][i]
                + ER11 * k[10][i]
                + ER12 * k[11][i];
            err += (e / sk[i]).powi(2);
        }
        let mut deno = err + 0.01 * err2;
        if deno <= 0.0 {
            deno = 1.0;
        }
        h.abs() * err * (1.0 / (deno * N as f64)).sqrt()
    }

    /// Advances by one accepted step, never past `t_end`.
    pub fn step(&mut self, t_end: f64) -> Result<()> {
        loop {
            if self.steps >= self.opts.max_steps {
                return Err(Error::StepFailure { t: self.t, h: self.h });
            }
            let remaining = t_end - self.t;
            let mut h = self.h;
            let mut lands = false;
            if (h - remaining) * self.direction >= 0.0 {
                h = remaining;
                lands = true;
            }
            if h.abs() < self.opts.min_step && !lands {
                return Err(Error::StepFailure { t: self.t, h });
            }
            let (y_new, st) = self.attempt(self.t, &self.y.clone(), &self.dy.clone(), h);
            self.steps += 1;
            let err = self.error_norm(&self.y, &y_new, &st, h);
            if !err.is_finite() {
                self.h = h * 0.1;
                self.last_rejected = true;
                continue;
            }
            let fac11 = err.powf(EXPO1);
            let fac = FACC2.max(FACC1.min(fac11 / SAFE));
            let mut h_new = h / fac;
            if err <= 1.0 {
                self.facold = err.max(1e-4);
                self.t_old = self.t;
                self.y_old = self.y;
                self.h_old = h;
                self.t = if lands { t_end } else { self.t + h };
                self.y = y_new;
                self.dy = (self.f)(self.t, &self.y);
                self.stages = Some(st);
                self.dense = None;
                if self.last_rejected {
                    h_new = h_new.abs().min(h.abs()) * self.direction;
                }
                self.last_rejected = false;
                let cap = self.opts.max_step;
                self.h = h_new.abs().min(cap) * self.direction;
                return Ok(());
            }
            h_new = h / FACC1.min(fac11 / SAFE);
            self.last_rejected = true;
            self.h = h_new;
        }
    }

    fn build_dense(&mut self) -> [Vector<N>; 8] {
        let st = self.stages.as_ref().expect("dense output requested before the first step");
        let k = st.k;
        let (t, y, h) = (self.t_old, self.y_old, self.h_old);
        let k13 = self.dy;
        let f = &mut self.f;
        let k14 = f(
            t + C14 * h,
            &axpy(
                &y,
                h,
                &[
                    (A141, &k[0]),
                    (A147, &k[6]),
                    (A148, &k[7]),
                    (A149, &k[8]),
                    (A1410, &k[9]),
                    (A1411, &k[10]),
                    (A1412, &k[11]),
                    (A1413, &k13),
                ],
            ),
        );
        let k15 = f(
            t + C15 * h,
            &axpy(
                &y,
                h,
                &[
                    (A151, &k[0]),
                    (A156, &k[5]),
                    (A157, &k[6]),
                    (A158, &k[7]),
                    (A1511, &k[10]),
                    (A1512, &k[11]),
                    (A1513, &k13),
                    (A1514, &k14),
                ],
            ),
        );
        let k16 = f(
            t + C16 * h,
            &axpy(
                &y,
                h,
                &[
                    (A161, &k[0]),
                    (A166, &k[5]),
                    (A167, &k[6]),
                    (A168, &k[7]),
                    (A169, &k[8]),
                    (A1613, &k13),
                    (A1614, &k14),
                    (A1615, &k15),
                ],
            ),
        );
        let d = [
            [D41, D46, D47, D48, D49, D410, D411, D412, D413, D414, D415, D416],
            [D51, D56, D57, D58, D59, D510, D511, D512, D513, D514, D515, D516],
            [D61, D66, D67, D68, D69, D610, D611, D612, D613, D614, D615, D616],
            [D71, D76, D77, D78, D79, D710, D711, D712, D713, D714, D715, D716],
        ];
        let ks = [&k[0], &k[5], &k[6], &k[7], &k[8], &k[9], &k[10], &k[11], &k13, &k14, &k15, &k16];
        let mut cont = [[0.0; N]; 8];
        for i in 0..N {
            let ydiff = self.y[i] - y[i];
            let bspl = h * k[0][i] - ydiff;
            cont[0][i] = y[i];
            cont[1][i] = ydiff;
            cont[2][i] = bspl;
            cont[3][i] = ydiff - h * k13[i] - bspl;
            for (row, coeffs) in d.iter().enumerate() {
                cont[4 + row][i] = h * coeffs.iter().zip(ks.iter()).map(|(c, kv)| c * kv[i]).sum::<f64>();
            }
        }
        cont
    }

    /// Dense-output state at `t` inside the last accepted step.
    pub fn dense(&mut self, t: f64) -> Vector<N> {
        let cont = match self.dense {
            Some(c) => c,
            None => {
                let c = self.build_dense();
                self.dense = Some(c);
                c
            }
        };
        let s = (t - self.t_old) / self.h_old;
        let s1 = 1.0 - s;
        let mut out = [0.0; N];
        for i in 0..N {
            let conpar = cont[4][i] + (cont[5][i] + (cont[6][i] + cont[7][i] * s) * s1) * s;
            out[i] = cont[0][i] + (cont[1][i] + (cont[2][i] + (cont[3][i] + conpar * s1) * s) * s1) * s;
        }
        out
    }

    /// Replaces the current state with a single untested step of size
    /// `t_target - t_prev` from the start of the last accepted step.  Used to
    /// land exactly on an event with full step accuracy.
    pub fn restep_to(&mut self, t_target: f64) {
        let (t0, y0) = (self.t_old, self.y_old);
        let dy0 = (self.f)(t0, &y0);
        let h = t_target - t0;
        if h == 0.0 {
            self.t = t0;
            self.y = y0;
            self.dy = dy0;
            self.stages = None;
        } else {
            let (y, st) = self.attempt(t0, &y0, &dy0, h);
            self.t = t_target;
            self.y = y;
            self.dy = (self.f)(t_target, &y);
            self.h_old = h;
            self.stages = Some(st);
        }
        self.dense = None;
    }
}

/// Integrates from `t0` to `t1` and returns the final state.
pub fn solve_to<const N: usize, F: FnMut(f64, &Vector<N>) -> Vector<N>>(
    f: F,
    t0: f64,
    y0: Vector<N>,
    t1: f64,
    opts: OdeOptions,
) -> Result<Vector<N>> {
    let mut solver = Dop853::new(f, t0, y0, t1 - t0, opts);
    while (t1 - solver.t()) * solver.direction > 0.0 {
        solver.step(t1)?;
    }
    Ok(*solver.y())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn oscillator(_t: f64, y: &[f64; 2]) -> [f64; 2] {
        [y[1], -y[0]]
    }

    #[test]
    fn harmonic_oscillator_full_period() {
        let y = solve_to(oscillator, 0.0, [1.0, 0.0], 2.0 * PI, OdeOptions::default()).unwrap();
        assert!((y[0] - 1.0).abs() < 1e-9 && y[1].abs() < 1e-9, "{y:?}");
    }

    #[test]
    fn backward_integration() {
        let y = solve_to(oscillator, 0.0, [1.0, 0.0], -PI / 2.0, OdeOptions::default()).unwrap();
        assert!(y[0].abs() < 1e-9 && (y[1] - 1.0).abs() < 1e-9, "{y:?}");
    }

    #[test]
    fn dense_output_matches_exact_solution() {
        let mut s = Dop853::new(oscillator, 0.0, [1.0, 0.0], 1.0, OdeOptions::default());
        let mut worst: f64 = 0.0;
        while s.t() < 10.0 {
            s.step(10.0).unwrap();
            let (a, b) = (s.t_prev(), s.t());
            for j in 1..5 {
                let t = a + (b - a) * j as f64 / 5.0;
                let y = s.dense(t);
                worst = worst.max((y[0] - t.cos()).abs()).max((y[1] + t.sin()).abs());
            }
        }
        assert!(worst < 1e-9, "dense error {worst}");
    }

    #[test]
    fn restep_lands_on_target() {
        let mut s = Dop853::new(oscillator, 0.0, [1.0, 0.0], 1.0, OdeOptions::default());
        s.step(10.0).unwrap();
        s.step(10.0).unwrap();
        let target = 0.5 * (s.t_prev() + s.t());
        s.restep_to(target);
        assert_eq!(s.t(), target);
        assert!((s.y()[0] - target.cos()).abs() < 1e-12);
    }

    #[test]
    fn max_step_is_respected() {
        let opts = OdeOptions { max_step: 0.01, ..OdeOptions::default() };
        let mut s = Dop853::new(oscillator, 0.0, [1.0, 0.0], 1.0, opts);
        for _ in 0..20 {
            s.step(1.0).unwrap();
            assert!(s.t() - s.t_prev() <= 0.01 + 1e-15);
        }
    }

    #[test]
    fn exponential_growth_accuracy() {
        let y = solve_to(|_t, y: &[f64; 1]| [y[0]], 0.0, [1.0], 5.0, OdeOptions::default()).unwrap();
        assert!((y[0] / 5f64.exp() - 1.0).abs() < 1e-9);
    }
}
