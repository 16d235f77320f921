//! Adaptive Gauss–Kronrod quadrature (G7, K15) for the Beta moment integral.
//!
//! Nodes are interior, so integrable endpoint behaviour never gets evaluated
//! at the endpoints themselves; adaptive bisection concentrates work where the
//! error estimate says it is needed. Intended for positive integrands, where
//! summing per-interval relative acceptances bounds the global relative error.

// 15-point Kronrod abscissae on [-1, 1] (positive half; symmetric).
const XGK: [f64; 8] = [
    0.991455371120813,
    0.949107912342759,
    0.864864423359769,
    0.741531185599394,
    0.586087235467691,
    0.405845151377397,
    0.207784955007898,
    0.0,
];

// Kronrod weights matching `XGK`.
const WGK: [f64; 8] = [
    0.022935322010529,
    0.063092092629979,
    0.104790010322250,
    0.140653259715525,
    0.169004726639267,
    0.190350578064785,
    0.204432940075298,
    0.209482141084728,
];

// 7-point Gauss weights (for the odd-indexed Kronrod abscissae).
const WG: [f64; 4] = [
    0.129484966168870,
    0.279705391489277,
    0.381830050505119,
    0.417959183673469,
];

/// One G7/K15 pass over `[a, b]`: returns the K15 value and an error estimate
/// from the Gauss/Kronrod discrepancy.
fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);

    let f_mid = f(mid);
    let mut kronrod = WGK[7] * f_mid;
    let mut gauss = WG[3] * f_mid;

    for j in 0..7 {
        let x = half * XGK[j];
        let fsum = f(mid - x) + f(mid + x);
        kronrod += WGK[j] * fsum;
        if j % 2 == 1 {
            gauss += WG[j / 2] * fsum;
        }
    }

    let integral = kronrod * half;
    // The Gauss/Kronrod discrepancy overestimates the K15 error, which only
    // costs a few extra bisections on smooth integrands.
    let err = ((kronrod - gauss) * half).abs();
    (integral, err)
}

/// Adaptive integration of `f` over `[a, b]` to the given relative tolerance.
pub(crate) fn integrate<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, rel_tol: f64) -> f64 {
    fn adapt<F: Fn(f64) -> f64>(
        f: &F,
        a: f64,
        b: f64,
        value: f64,
        err: f64,
        rel_tol: f64,
        depth: u32,
    ) -> f64 {
        if err <= rel_tol * value.abs() || depth == 0 {
            return value;
        }
        let mid = 0.5 * (a + b);
        let (lv, le) = gk15(f, a, mid);
        let (rv, re) = gk15(f, mid, b);
        adapt(f, a, mid, lv, le, rel_tol, depth - 1) + adapt(f, mid, b, rv, re, rel_tol, depth - 1)
    }

    let (value, err) = gk15(f, a, b);
    adapt(f, a, b, value, err, rel_tol, 48)
}
