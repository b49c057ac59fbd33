//! Dormand–Prince 5(4) embedded pair with the FSAL property.

use crate::num::Real;

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];

const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];

/// Fifth-order solution minus embedded fourth-order solution.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

pub(crate) struct Dopri5<T> {
    c: [T; 7],
    a: [[T; 6]; 7],
    e: [T; 7],
    k: [Vec<T>; 7],
    stage: Vec<T>,
    pub y_new: Vec<T>,
    pub err: Vec<T>,
}

impl<T: Real> Dopri5<T> {
    pub fn new(dim: usize) -> Self {
        Self {
            c: C.map(T::lit),
            a: A.map(|row| row.map(T::lit)),
            e: E.map(T::lit),
            k: std::array::from_fn(|_| vec![T::zero(); dim]),
            stage: vec![T::zero(); dim],
            y_new: vec![T::zero(); dim],
            err: vec![T::zero(); dim],
        }
    }

    pub fn first_stage_mut(&mut self) -> &mut Vec<T> {
        &mut self.k[0]
    }

    /// Attempts one step of size `h` from `(t, y)`; the first stage must
    /// already hold `f(t, y)`. Fills `y_new` and `err`.
    pub fn attempt<E>(
        &mut self,
        t: T,
        y: &[T],
        h: T,
        mut f: impl FnMut(T, &[T], &mut [T]) -> Result<(), E>,
    ) -> Result<(), E> {
        let n = y.len();
        for s in 1..7 {
            for i in 0..n {
                let mut acc = T::zero();
                for (j, kj) in self.k.iter().enumerate().take(s) {
                    let a = self.a[s][j];
                    if a != T::zero() {
                        acc += a * kj[i];
                    }
                }
                self.stage[i] = y[i] + h * acc;
            }
            if s == 6 {
                self.y_new.copy_from_slice(&self.stage);
            }
            f(t + self.c[s] * h, &self.stage, &mut self.k[s])?;
        }
        for i in 0..n {
            let mut acc = T::zero();
            for (s, ks) in self.k.iter().enumerate() {
                acc += self.e[s] * ks[i];
            }
            self.err[i] = h * acc;
        }
        Ok(())
    }

    /// Moves the last stage into the first after an accepted step.
    pub fn accept(&mut self) {
        self.k.swap(0, 6);
    }

    /// Weighted RMS norm of the error estimate.
    pub fn error_norm(&self, y: &[T], rel_tol: T, abs_tol: T) -> T {
        let n = y.len();
        let mut acc = T::zero();
        for i in 0..n {
            let scale = abs_tol + rel_tol * y[i].abs().max(self.y_new[i].abs());
            let r = self.err[i] / scale;
            acc += r * r;
        }
        (acc / T::of_usize(n)).sqrt()
    }
}
