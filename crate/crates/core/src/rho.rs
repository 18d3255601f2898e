//! Dickman's function: the continuous solution of `u rho'(u) + rho(u - 1) = 0`
//! with `rho = 1` on `[0, 1]` and `rho = 0` for `u < 0`.
//!
//! The table is built unit interval by unit interval. Each `[k, k + 1]` is
//! split into `pieces` equal subintervals; on each one `rho` is stored at
//! Chebyshev-Lobatto nodes and evaluated by barycentric interpolation. Node
//! values come from `rho(t) = rho(a) - int_a^t rho(v - 1)/v dv` with
//! Gauss-Legendre quadrature, where `rho(v - 1)` is read from the same
//! subinterval one unit to the left. The restriction of `rho` to
//! `[k, k + 1]` is analytic at distance 1 around the interval, so the
//! interpolants converge geometrically in the degree.

use serde::{Deserialize, Serialize};

use crate::counting::{psi, FriableQuery};
use crate::numeric::gauss_legendre;
use crate::{Error, Result};

pub const MAX_U: f64 = 50.0;
pub const DEFAULT_U_MAX: f64 = 50.0;
pub const DEFAULT_TOL: f64 = 1e-12;
/// Values below this are reported as 0 with the underflow flag set.
pub const UNDERFLOW_FLOOR: f64 = 1e-60;

const DEGREE: usize = 16;
const QUAD_ORDER: usize = 24;
const MAX_PIECES: usize = 1024;

/// `rho(u)` together with the underflow flag.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RhoValue {
    pub value: f64,
    pub underflow: bool,
}

#[derive(Debug, Clone)]
pub struct RhoTable {
    u_max: f64,
    tol: f64,
    pieces: usize,
    units: usize,
    /// Lobatto nodes on `[-1, 1]` in increasing order.
    nodes: Vec<f64>,
    bary: Vec<f64>,
    /// `values[(unit * pieces + piece) * (DEGREE + 1) + k]`, unit 0 being `[1, 2]`.
    values: Vec<f64>,
}

fn lobatto_nodes() -> (Vec<f64>, Vec<f64>) {
    let nodes: Vec<f64> = (0..=DEGREE)
        .map(|k| -(std::f64::consts::PI * k as f64 / DEGREE as f64).cos())
        .collect();
    let bary = (0..=DEGREE)
        .map(|k| {
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            if k == 0 || k == DEGREE {
                0.5 * sign
            } else {
                sign
            }
        })
        .collect();
    (nodes, bary)
}

fn barycentric(nodes: &[f64], bary: &[f64], values: &[f64], z: f64) -> f64 {
    let mut num = 0.0;
    let mut den = 0.0;
    for ((&zk, &wk), &fk) in nodes.iter().zip(bary).zip(values) {
        let d = z - zk;
        if d == 0.0 {
            return fk;
        }
        let c = wk / d;
        num += c * fk;
        den += c;
    }
    num / den
}

impl RhoTable {
    /// Builds the table on `[0, u_max]`, halving the subinterval width until
    /// two successive builds differ by at most `tol` on the coarser nodes.
    pub fn build(u_max: f64, tol: f64) -> Result<Self> {
        if !(1.0..=MAX_U).contains(&u_max) {
            return Err(Error::out_of_range("u_max", u_max, "must lie in [1, 50]"));
        }
        if !(1e-14..=1e-6).contains(&tol) {
            return Err(Error::out_of_range("tol", tol, "must lie in [1e-14, 1e-6]"));
        }
        let mut pieces = 2;
        let mut coarse = Self::build_with(u_max, tol, pieces);
        loop {
            pieces *= 2;
            let fine = Self::build_with(u_max, tol, pieces);
            let converged = coarse.max_difference(&fine) <= tol;
            if converged || pieces >= MAX_PIECES {
                return Ok(fine);
            }
            coarse = fine;
        }
    }

    fn build_with(u_max: f64, tol: f64, pieces: usize) -> Self {
        let (nodes, bary) = lobatto_nodes();
        let (gl_nodes, gl_weights) = gauss_legendre(QUAD_ORDER);
        let units = (u_max - 1.0).ceil().max(1.0) as usize;
        let width = 1.0 / pieces as f64;
        let stride = DEGREE + 1;
        let mut values = vec![0.0; units * pieces * stride];
        let mut left_value = 1.0;
        for unit in 0..units {
            for piece in 0..pieces {
                let a = 1.0 + unit as f64 + piece as f64 * width;
                let base = (unit * pieces + piece) * stride;
                let prev_base = (unit > 0).then(|| ((unit - 1) * pieces + piece) * stride);
                // rho(v - 1) for v in this subinterval
                let delayed = |v: f64, values: &[f64]| match prev_base {
                    None => 1.0,
                    Some(pb) => {
                        let z = 2.0 * (v - a) / width - 1.0;
                        barycentric(&nodes, &bary, &values[pb..pb + stride], z)
                    }
                };
                values[base] = left_value;
                for k in 1..stride {
                    let t = a + 0.5 * width * (nodes[k] + 1.0);
                    let half = 0.5 * (t - a);
                    let mid = 0.5 * (t + a);
                    let mut integral = 0.0;
                    for (z, w) in gl_nodes.iter().zip(&gl_weights) {
                        let v = mid + half * z;
                        integral += w * delayed(v, &values) / v;
                    }
                    values[base + k] = left_value - half * integral;
                }
                // Restore u rho(u) = int_{u-1}^u rho at the right endpoint; the
                // forward step alone lets rounding excite a mode decaying only
                // like 1/u.
                let t = a + width;
                let window = Self::window_integral(&values, unit, piece, pieces, &nodes, &bary, &gl_nodes, &gl_weights);
                values[base + DEGREE] = window / t;
                left_value = values[base + DEGREE];
            }
        }
        Self {
            u_max,
            tol,
            pieces,
            units,
            nodes,
            bary,
            values,
        }
    }

    /// `int_{t-1}^{t} rho` for `t` the right end of `(unit, piece)`, read from
    /// the interpolants already built.
    #[allow(clippy::too_many_arguments)]
    fn window_integral(
        values: &[f64],
        unit: usize,
        piece: usize,
        pieces: usize,
        nodes: &[f64],
        bary: &[f64],
        gl_nodes: &[f64],
        gl_weights: &[f64],
    ) -> f64 {
        let stride = DEGREE + 1;
        let width = 1.0 / pieces as f64;
        let last = unit * pieces + piece;
        let first = last + 1;
        let mut acc = crate::numeric::CompensatedSum::new();
        // part of the window inside [0, 1], where rho = 1
        if first < pieces {
            acc.add((pieces - first) as f64 * width);
        }
        for j in first.saturating_sub(pieces)..=last {
            let slice = &values[j * stride..(j + 1) * stride];
            let mut piece_sum = 0.0;
            for (z, w) in gl_nodes.iter().zip(gl_weights) {
                piece_sum += w * barycentric(nodes, bary, slice, *z);
            }
            acc.add(0.5 * width * piece_sum);
        }
        acc.value()
    }

    fn max_difference(&self, other: &RhoTable) -> f64 {
        self.node_points()
            .map(|u| (self.raw(u) - other.raw(u)).abs())
            .fold(0.0, f64::max)
    }

    fn node_points(&self) -> impl Iterator<Item = f64> + '_ {
        let width = self.step();
        (0..self.units * self.pieces).flat_map(move |j| {
            let a = 1.0 + j as f64 * width;
            self.nodes
                .iter()
                .map(move |&z| a + 0.5 * width * (z + 1.0))
                .filter(|&u| u <= self.u_max)
        })
    }

    pub fn u_max(&self) -> f64 {
        self.u_max
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    /// Interpolation pieces per unit interval.
    pub fn pieces(&self) -> usize {
        self.pieces
    }

    /// Width of one interpolation subinterval.
    pub fn step(&self) -> f64 {
        1.0 / self.pieces as f64
    }

    fn raw(&self, u: f64) -> f64 {
        if u < 0.0 {
            return 0.0;
        }
        if u <= 1.0 {
            return 1.0;
        }
        let s = (u - 1.0) * self.pieces as f64;
        let j = (s.floor() as usize).min(self.units * self.pieces - 1);
        let z = 2.0 * (s - j as f64) - 1.0;
        let stride = DEGREE + 1;
        barycentric(
            &self.nodes,
            &self.bary,
            &self.values[j * stride..(j + 1) * stride],
            z.clamp(-1.0, 1.0),
        )
    }

    pub fn rho_checked(&self, u: f64) -> Result<RhoValue> {
        if u.is_nan() || u > self.u_max {
            return Err(Error::out_of_range("u", u, "beyond the table's u_max"));
        }
        let v = self.raw(u);
        Ok(if u > 1.0 && v < UNDERFLOW_FLOOR {
            RhoValue {
                value: 0.0,
                underflow: true,
            }
        } else {
            RhoValue {
                value: v,
                underflow: false,
            }
        })
    }

    /// `rho(u)`: exactly 1 on `[0, 1]`, exactly 0 for `u < 0`.
    pub fn rho(&self, u: f64) -> Result<f64> {
        Ok(self.rho_checked(u)?.value)
    }

    /// `(u, rho(u))` on a uniform grid of spacing `spacing` over `[0, u_max]`.
    pub fn grid(&self, spacing: f64) -> Vec<(f64, f64)> {
        let n = (self.u_max / spacing).floor() as usize;
        (0..=n)
            .map(|i| {
                let u = i as f64 * spacing;
                (u, self.rho(u).expect("grid stays within u_max"))
            })
            .collect()
    }
}

/// `Psi(x, y) / (x rho(u))`, a diagnostic of the Dickman approximation.
pub fn hildebrand_ratio(x: u64, y: u64, table: &RhoTable) -> Result<f64> {
    let q = FriableQuery::new(x, y)?;
    let u = q.u().max(0.0);
    let r = table.rho_checked(u.min(f64::MAX))?;
    if r.underflow {
        return Err(Error::out_of_range("u", u, "rho underflows at this u"));
    }
    Ok(psi(x, y)? as f64 / (x as f64 * r.value))
}
