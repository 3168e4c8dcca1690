//! Natural cubic spline interpolation in one and two dimensions.

/// Interpolating cubic spline with zero second derivative at both ends.
#[derive(Debug, Clone)]
pub struct NaturalSpline {
    knots: Vec<f64>,
    values: Vec<f64>,
    second: Vec<f64>,
}

impl NaturalSpline {
    /// `knots` must be strictly increasing and as long as `values` (>= 2).
    pub fn new(knots: &[f64], values: &[f64]) -> Self {
        let n = knots.len();
        assert!(
            n >= 2 && values.len() == n,
            "spline needs >= 2 matching knots/values"
        );
        debug_assert!(knots.windows(2).all(|w| w[0] < w[1]));
        let mut second = vec![0.0; n];
        if n > 2 {
            // Thomas algorithm on the interior second derivatives
            let m = n - 2;
            let mut diag = vec![0.0; m];
            let mut upper = vec![0.0; m];
            let mut rhs = vec![0.0; m];
            for i in 0..m {
                let h0 = knots[i + 1] - knots[i];
                let h1 = knots[i + 2] - knots[i + 1];
                diag[i] = 2.0 * (h0 + h1);
                upper[i] = h1;
                rhs[i] =
                    6.0 * ((values[i + 2] - values[i + 1]) / h1 - (values[i + 1] - values[i]) / h0);
            }
            for i in 1..m {
                let lower = knots[i + 1] - knots[i];
                let w = lower / diag[i - 1];
                diag[i] -= w * upper[i - 1];
                rhs[i] -= w * rhs[i - 1];
            }
            second[m] = rhs[m - 1] / diag[m - 1];
            for i in (0..m - 1).rev() {
                second[i + 1] = (rhs[i] - upper[i] * second[i + 2]) / diag[i];
            }
        }
        Self {
            knots: knots.to_vec(),
            values: values.to_vec(),
            second,
        }
    }

    /// Evaluates the spline; outside the knot range the end pieces extend.
    pub fn eval(&self, t: f64) -> f64 {
        let n = self.knots.len();
        let seg = match self.knots.partition_point(|&k| k <= t) {
            0 => 0,
            p if p >= n => n - 2,
            p => p - 1,
        };
        let (k0, k1) = (self.knots[seg], self.knots[seg + 1]);
        let h = k1 - k0;
        let a = (k1 - t) / h;
        let b = (t - k0) / h;
        let (m0, m1) = (self.second[seg], self.second[seg + 1]);
        // written as v0 + b (v1 - v0) so constant data stays bit-exact
        let (v0, v1) = (self.values[seg], self.values[seg + 1]);
        v0 + b * (v1 - v0) + ((a * a * a - a) * m0 + (b * b * b - b) * m1) * h * h / 6.0
    }
}

/// Tensor-product natural spline over a rectangular knot grid.
#[derive(Debug, Clone)]
pub struct GridSpline {
    row_knots: Vec<f64>,
    row_splines: Vec<NaturalSpline>,
}

impl GridSpline {
    /// `values` is row-major `row_knots.len() x col_knots.len()`.
    pub fn new(row_knots: &[f64], col_knots: &[f64], values: &[f64]) -> Self {
        let nc = col_knots.len();
        assert_eq!(values.len(), row_knots.len() * nc);
        let row_splines = values
            .chunks_exact(nc)
            .map(|row| NaturalSpline::new(col_knots, row))
            .collect();
        Self {
            row_knots: row_knots.to_vec(),
            row_splines,
        }
    }

    pub fn eval(&self, y: f64, x: f64) -> f64 {
        let column: Vec<f64> = self.row_splines.iter().map(|s| s.eval(x)).collect();
        NaturalSpline::new(&self.row_knots, &column).eval(y)
    }

    /// Values at every integer pixel of a `rows x cols` image, row-major.
    pub fn sample_dense(&self, rows: usize, cols: usize) -> Vec<f64> {
        let mut out = vec![0.0; rows * cols];
        let mut column = vec![0.0; self.row_splines.len()];
        for x in 0..cols {
            for (v, s) in column.iter_mut().zip(&self.row_splines) {
                *v = s.eval(x as f64);
            }
            let along = NaturalSpline::new(&self.row_knots, &column);
            for y in 0..rows {
                out[y * cols + x] = along.eval(y as f64);
            }
        }
        out
    }
}
