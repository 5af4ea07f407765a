//! One-dimensional quadrature: adaptive Gauss-Kronrod (7/15) and fixed
//! Gauss-Legendre panels.

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];

// Gauss weights for the nodes XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

const MAX_SEGMENTS: usize = 4000;

/// Result of an adaptive integration.
#[derive(Debug, Clone, Copy)]
pub struct QuadResult {
    pub value: f64,
    pub error: f64,
    pub segments: usize,
}

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for i in 0..7 {
        let dx = h * XGK[i];
        let s = f(c - dx) + f(c + dx);
        kronrod += WGK[i] * s;
        if i % 2 == 1 {
            gauss += WG[i / 2] * s;
        }
    }
    (kronrod * h, ((kronrod - gauss) * h).abs())
}

/// Adaptive Gauss-Kronrod integration of `f` over `[a, b]`.
///
/// Bisects the segment with the largest error estimate until the summed
/// estimate falls below `max(abs_tol, rel_tol * |I|)`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, rel_tol: f64, abs_tol: f64) -> QuadResult {
    if a == b {
        return QuadResult { value: 0.0, error: 0.0, segments: 0 };
    }
    let (v, e) = gk15(&f, a, b);
    let mut segs = vec![(a, b, v, e)];
    loop {
        let total: f64 = segs.iter().map(|s| s.2).sum();
        let err: f64 = segs.iter().map(|s| s.3).sum();
        if err <= abs_tol.max(rel_tol * total.abs()) || segs.len() >= MAX_SEGMENTS {
            return QuadResult { value: total, error: err, segments: segs.len() };
        }
        let (idx, _) = segs
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |acc, (i, s)| if s.3 > acc.1 { (i, s.3) } else { acc });
        let (sa, sb, _, _) = segs.swap_remove(idx);
        let mid = 0.5 * (sa + sb);
        let (v1, e1) = gk15(&f, sa, mid);
        let (v2, e2) = gk15(&f, mid, sb);
        segs.push((sa, mid, v1, e1));
        segs.push((mid, sb, v2, e2));
    }
}

/// Integrate over consecutive breakpoints, adaptively on each piece.
pub fn integrate_pieces<F: Fn(f64) -> f64>(f: F, breaks: &[f64], rel_tol: f64, abs_tol: f64) -> f64 {
    breaks
        .windows(2)
        .map(|w| integrate(&f, w[0], w[1], rel_tol, abs_tol).value)
        .sum()
}

/// Five-point Gauss-Legendre rule on `[a, b]`.
pub fn gauss_legendre5<F: Fn(f64) -> f64>(f: F, a: f64, b: f64) -> f64 {
    const X: [f64; 3] = [0.0, 0.538_469_310_105_683_1, 0.906_179_845_938_664];
    const W: [f64; 3] = [0.568_888_888_888_888_9, 0.478_628_670_499_366_47, 0.236_926_885_056_189_08];
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut s = W[0] * f(c);
    for i in 1..3 {
        s += W[i] * (f(c - h * X[i]) + f(c + h * X[i]));
    }
    s * h
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_is_exact() {
        let r = integrate(|x| x * x * x + 2.0 * x, 0.0, 2.0, 1e-14, 0.0);
        assert!((r.value - 8.0).abs() < 1e-13);
    }

    #[test]
    fn oscillatory_integrand_converges() {
        let r = integrate(|x: f64| (10.0 * x).sin(), 0.0, std::f64::consts::PI, 1e-12, 0.0);
        // integral of sin(10x) over [0, pi] is (1 - cos(10 pi)) / 10 = 0
        assert!(r.value.abs() < 1e-12, "{}", r.value);
        let r = integrate(|x: f64| (-x).exp(), 0.0, 5.0, 1e-13, 0.0);
        assert!((r.value - (1.0 - (-5.0f64).exp())).abs() < 1e-13);
    }

    #[test]
    fn gauss_legendre_exact_to_degree_nine() {
        let v = gauss_legendre5(|x| x.powi(9) + x.powi(4), 0.0, 1.0);
        assert!((v - (0.1 + 0.2)).abs() < 1e-14);
    }
}
