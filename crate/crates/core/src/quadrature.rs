//! Globally adaptive Gauss–Kronrod (7/15) quadrature.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Result, TorusError};

#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.0,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];

// Gauss weights for the odd Kronrod nodes XGK[1], XGK[3], XGK[5] and the centre.
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

/// Default cap on the number of live panels.
pub const DEFAULT_MAX_PANELS: usize = 50_000;

#[derive(Clone, Copy, Debug)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}

impl Eq for Panel {}

impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn gauss_kronrod<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Panel {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for (j, (&x, &w)) in XGK[..7].iter().zip(&WGK[..7]).enumerate() {
        let dx = h * x;
        let pair = f(c - dx) + f(c + dx);
        kronrod += w * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    Panel { a, b, value: kronrod * h, error: ((kronrod - gauss) * h).abs() }
}

/// Integrates `f` over `[breaks[0], breaks[last]]` to an absolute error
/// target `tol`, starting from one panel per interval between consecutive
/// break points and bisecting the worst panel until the summed error
/// estimate meets `tol`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, breaks: &[f64], tol: f64, max_panels: usize) -> Result<f64> {
    if !(tol > 0.0) {
        return Err(TorusError::invalid(format!("quadrature tolerance must be positive, got {tol}")));
    }
    if breaks.len() < 2 {
        return Ok(0.0);
    }
    let mut heap = BinaryHeap::with_capacity(breaks.len());
    let mut total_err = 0.0;
    for w in breaks.windows(2) {
        if w[1] > w[0] {
            let p = gauss_kronrod(&f, w[0], w[1]);
            total_err += p.error;
            heap.push(p);
        }
    }
    while total_err > tol {
        if heap.len() >= max_panels {
            return Err(TorusError::QuadratureFailure { estimate: total_err, tol });
        }
        let worst = heap.pop().expect("non-empty while error is positive");
        let mid = 0.5 * (worst.a + worst.b);
        if !(mid > worst.a && mid < worst.b) {
            return Err(TorusError::QuadratureFailure { estimate: total_err, tol });
        }
        let left = gauss_kronrod(&f, worst.a, mid);
        let right = gauss_kronrod(&f, mid, worst.b);
        total_err += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
        if total_err <= tol {
            // Guard against drift in the running sum.
            total_err = heap.iter().map(|p| p.error).sum();
        }
    }
    Ok(heap.iter().map(|p| p.value).sum())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomials_are_exact_on_one_panel() {
        let v = integrate(|x| x.powi(7) - 3.0 * x * x, &[0.0, 2.0], 1e-14, 10).unwrap();
        assert!((v - (32.0 - 8.0)).abs() < 1e-12);
    }

    #[test]
    fn oscillatory_integrand_converges() {
        let v = integrate(|x| (40.0 * x).cos(), &[0.0, 1.0], 1e-12, 10_000).unwrap();
        assert!((v - (40.0f64).sin() / 40.0).abs() < 1e-12);
    }

    #[test]
    fn break_points_make_steps_exact() {
        let step = |x: f64| if x < 0.3 { 1.0 } else { 5.0 };
        let v = integrate(step, &[0.0, 0.3, 1.0], 1e-13, 4).unwrap();
        assert!((v - (0.3 + 3.5)).abs() < 1e-14);
    }

    #[test]
    fn rejects_bad_tolerance_and_reports_failure() {
        assert!(integrate(|x| x, &[0.0, 1.0], 0.0, 10).is_err());
        let r = integrate(|x: f64| (1.0 / x.max(1e-300)).sin(), &[0.0, 1.0], 1e-14, 8);
        assert!(matches!(r, Err(TorusError::QuadratureFailure { .. })));
    }
}
