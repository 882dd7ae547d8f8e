//! Shape-preserving piecewise cubic Hermite interpolation (Fritsch–Carlson).

use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Pchip {
    xs: Vec<f64>,
    ys: Vec<f64>,
    slopes: Vec<f64>,
}

impl Pchip {
    /// `xs` strictly increasing, at least two nodes.
    pub fn new(xs: Vec<f64>, ys: Vec<f64>) -> Self {
        assert!(xs.len() >= 2 && xs.len() == ys.len());
        assert!(xs.windows(2).all(|w| w[1] > w[0]), "abscissae must increase");
        let n = xs.len();
        let h: Vec<f64> = xs.windows(2).map(|w| w[1] - w[0]).collect();
        let delta: Vec<f64> = (0..n - 1).map(|k| (ys[k + 1] - ys[k]) / h[k]).collect();
        let mut d = vec![0.0; n];
        if n == 2 {
            d[0] = delta[0];
            d[1] = delta[0];
        } else {
            for k in 1..n - 1 {
                if delta[k - 1] * delta[k] > 0.0 {
                    let w1 = 2.0 * h[k] + h[k - 1];
                    let w2 = h[k] + 2.0 * h[k - 1];
                    d[k] = (w1 + w2) / (w1 / delta[k - 1] + w2 / delta[k]);
                }
            }
            d[0] = end_slope(h[0], h[1], delta[0], delta[1]);
            d[n - 1] = end_slope(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
        }
        Pchip { xs, ys, slopes: d }
    }

    pub fn xs(&self) -> &[f64] {
        &self.xs
    }

    pub fn ys(&self) -> &[f64] {
        &self.ys
    }

    /// Interpolated value; constant extrapolation outside the nodes.
    pub fn eval(&self, x: f64) -> f64 {
        let n = self.xs.len();
        if x <= self.xs[0] {
            return self.ys[0];
        }
        if x >= self.xs[n - 1] {
            return self.ys[n - 1];
        }
        let k = self.xs.partition_point(|&v| v <= x) - 1;
        self.hermite(k, x)
    }

    /// Derivative of the interpolant inside the node range.
    pub fn derivative(&self, x: f64) -> f64 {
        let n = self.xs.len();
        if x <= self.xs[0] || x >= self.xs[n - 1] {
            return 0.0;
        }
        let k = self.xs.partition_point(|&v| v <= x) - 1;
        let h = self.xs[k + 1] - self.xs[k];
        let t = (x - self.xs[k]) / h;
        let (y0, y1, d0, d1) = (self.ys[k], self.ys[k + 1], self.slopes[k], self.slopes[k + 1]);
        let dh00 = 6.0 * t * t - 6.0 * t;
        let dh10 = 3.0 * t * t - 4.0 * t + 1.0;
        let dh01 = -dh00;
        let dh11 = 3.0 * t * t - 2.0 * t;
        (dh00 * y0 + dh01 * y1) / h + dh10 * d0 + dh11 * d1
    }

    fn hermite(&self, k: usize, x: f64) -> f64 {
        let h = self.xs[k + 1] - self.xs[k];
        let t = (x - self.xs[k]) / h;
        let t2 = t * t;
        let t3 = t2 * t;
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        h00 * self.ys[k] + h10 * h * self.slopes[k] + h01 * self.ys[k + 1] + h11 * h * self.slopes[k + 1]
    }
}

fn end_slope(h0: f64, h1: f64, del0: f64, del1: f64) -> f64 {
    let d = ((2.0 * h0 + h1) * del0 - h0 * del1) / (h0 + h1);
    if d * del0 <= 0.0 {
        0.0
    } else if del0 * del1 <= 0.0 && d.abs() > 3.0 * del0.abs() {
        3.0 * del0
    } else {
        d
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn reproduces_nodes_and_cubics_closely() {
        let xs: Vec<f64> = (0..40).map(|k| k as f64 * 0.1).collect();
        let ys: Vec<f64> = xs.iter().map(|x| x.exp()).collect();
        let p = Pchip::new(xs.clone(), ys.clone());
        for (x, y) in xs.iter().zip(&ys) {
            assert_eq!(p.eval(*x), *y);
        }
        assert!((p.eval(1.234) - 1.234f64.exp()).abs() < 1e-4);
        assert!((p.derivative(1.234) - 1.234f64.exp()).abs() < 1e-2);
    }

    proptest! {
        #[test]
        fn monotone_data_gives_monotone_interpolant(
            steps in proptest::collection::vec(0.0f64..1.0, 3..20),
            probes in proptest::collection::vec(0.0f64..1.0, 20),
        ) {
            let xs: Vec<f64> = (0..=steps.len()).map(|k| k as f64).collect();
            let mut ys = vec![0.0];
            for s in &steps { ys.push(ys.last().unwrap() + s); }
            let p = Pchip::new(xs, ys);
            let top = steps.len() as f64;
            let mut pts: Vec<f64> = probes.iter().map(|u| u * top).collect();
            pts.sort_by(f64::total_cmp);
            for w in pts.windows(2) {
                prop_assert!(p.eval(w[1]) >= p.eval(w[0]) - 1e-12);
            }
        }

        #[test]
        fn commutes_with_reflection(
            ys in proptest::collection::vec(0.0f64..1.0, 4..12),
            u in 0.0f64..1.0,
        ) {
            let xs: Vec<f64> = (0..ys.len()).map(|k| (k as f64).powf(1.3)).collect();
            let flipped: Vec<f64> = ys.iter().map(|y| 1.0 - y).collect();
            let x = u * xs[xs.len() - 1];
            let a = Pchip::new(xs.clone(), ys).eval(x);
            let b = Pchip::new(xs, flipped).eval(x);
            prop_assert!((a + b - 1.0).abs() < 1e-12);
        }
    }
}
