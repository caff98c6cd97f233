//! Dormand–Prince 5(4) step with its 4th-order continuous extension.

pub(crate) type State = [f64; 4];

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;

const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;

// Difference between the 5th- and 4th-order weights.
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

fn axpy(y: &State, h: f64, terms: &[(f64, &State)]) -> State {
    let mut out = *y;
    for (c, k) in terms {
        for i in 0..4 {
            out[i] += h * c * k[i];
        }
    }
    out
}

/// Result of one trial step.
pub(crate) struct Step {
    pub y_new: State,
    pub k_new: State,
    pub err: State,
    pub dense: DenseSegment,
}

/// Takes a step of size `h` from `(r, y)` where `k1 = f(r, y)`.
pub(crate) fn step<F: Fn(f64, &State) -> State>(
    f: &F,
    r: f64,
    y: &State,
    k1: &State,
    h: f64,
) -> Step {
    let k2 = f(r + C2 * h, &axpy(y, h, &[(A21, k1)]));
    let k3 = f(r + C3 * h, &axpy(y, h, &[(A31, k1), (A32, &k2)]));
    let k4 = f(
        r + C4 * h,
        &axpy(y, h, &[(A41, k1), (A42, &k2), (A43, &k3)]),
    );
    let k5 = f(
        r + C5 * h,
        &axpy(y, h, &[(A51, k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
    );
    let k6 = f(
        r + h,
        &axpy(
            y,
            h,
            &[(A61, k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)],
        ),
    );
    let y_new = axpy(
        y,
        h,
        &[(B1, k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)],
    );
    let k7 = f(r + h, &y_new);

    let mut err = [0.0; 4];
    let mut rcont = [[0.0; 4]; 5];
    for i in 0..4 {
        err[i] = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
        let dy = y_new[i] - y[i];
        let bspl = h * k1[i] - dy;
        rcont[0][i] = y[i];
        rcont[1][i] = dy;
        rcont[2][i] = bspl;
        rcont[3][i] = dy - h * k7[i] - bspl;
        rcont[4][i] =
            h * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i] + D7 * k7[i]);
    }
    Step {
        y_new,
        k_new: k7,
        err,
        dense: DenseSegment { r0: r, h, rcont },
    }
}

/// Continuous extension over one accepted step `[r0, r0 + h]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DenseSegment {
    pub r0: f64,
    pub h: f64,
    rcont: [State; 5],
}

impl DenseSegment {
    pub fn r1(&self) -> f64 {
        self.r0 + self.h
    }

    pub fn eval(&self, r: f64) -> State {
        let th = ((r - self.r0) / self.h).clamp(0.0, 1.0);
        let th1 = 1.0 - th;
        let c = &self.rcont;
        std::array::from_fn(|i| {
            c[0][i] + th * (c[1][i] + th1 * (c[2][i] + th * (c[3][i] + th1 * c[4][i])))
        })
    }
}
