//! Adaptive Dormand–Prince 5(4) integrator.
//!
//! Fixed-dimension embedded pair with FSAL and a standard step controller;
//! this is all the monodromy computation needs, so there is no dense
//! output and no event machinery.

use std::fmt;

#[derive(Debug, Clone, PartialEq)]
pub enum OdeError {
    /// The controller drove the step below the representable floor while
    /// still failing the error test.
    StepSizeUnderflow { x: f64, h: f64 },
    /// Step-count cap hit before reaching the end of the interval.
    TooManySteps { x: f64 },
}

impl fmt::Display for OdeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OdeError::StepSizeUnderflow { x, h } => {
                write!(f, "step size underflow at x={x} (h={h:.3e})")
            }
            OdeError::TooManySteps { x } => write!(f, "step budget exhausted at x={x}"),
        }
    }
}

impl std::error::Error for OdeError {}

const MAX_STEPS: usize = 1_000_000;

// Dormand-Prince 5(4) tableau.
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 6] = [
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
// Fifth-order weights (row 7 of A by the FSAL property) and the
// difference to the embedded fourth-order weights.
const B: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

/// Integrates `y' = f(x, y)` from `x0` to `x1` (`x1 > x0`) and returns the
/// state at `x1`. Both the absolute and relative local tolerance are `tol`.
pub fn integrate<const N: usize, F>(
    f: &F,
    x0: f64,
    x1: f64,
    y0: [f64; N],
    tol: f64,
) -> Result<[f64; N], OdeError>
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
{
    assert!(x1 > x0, "integration interval must be forward");
    assert!(tol > 0.0, "tolerance must be positive");

    let span = x1 - x0;
    let h_floor = span * 1e-14;
    let mut x = x0;
    let mut y = y0;
    let mut h = (span * 1e-3).min(span);
    let mut k1 = f(x, &y);

    for _ in 0..MAX_STEPS {
        if x >= x1 {
            return Ok(y);
        }
        h = h.min(x1 - x);

        let mut k = [[0.0f64; N]; 7];
        k[0] = k1;
        for stage in 1..7 {
            let mut yi = y;
            for (j, kj) in k.iter().enumerate().take(stage) {
                let a = if stage < 6 { A[stage - 1][j] } else { B[j] };
                if a != 0.0 {
                    for idx in 0..N {
                        yi[idx] += h * a * kj[idx];
                    }
                }
            }
            k[stage] = f(x + C[stage] * h, &yi);
        }

        // Fifth-order solution (B row) and embedded error estimate.
        let mut y_new = y;
        for (j, kj) in k.iter().enumerate() {
            if B[j] != 0.0 {
                for idx in 0..N {
                    y_new[idx] += h * B[j] * kj[idx];
                }
            }
        }
        let mut err_sqr = 0.0f64;
        for idx in 0..N {
            let mut e = 0.0;
            for (j, kj) in k.iter().enumerate() {
                e += E[j] * kj[idx];
            }
            e *= h;
            let scale = tol + tol * y[idx].abs().max(y_new[idx].abs());
            let r = e / scale;
            err_sqr += r * r;
        }
        let err = (err_sqr / N as f64).sqrt();

        if err <= 1.0 {
            x += h;
            y = y_new;
            k1 = k[6]; // FSAL
            let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
            h *= factor;
        } else {
            h *= (0.9 * err.powf(-0.2)).clamp(0.1, 0.9);
            if h < h_floor {
                return Err(OdeError::StepSizeUnderflow { x, h });
            }
        }
    }
    if x >= x1 {
        Ok(y)
    } else {
        Err(OdeError::TooManySteps { x })
    }
}
