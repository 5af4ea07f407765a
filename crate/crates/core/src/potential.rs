//! Radial pair interactions, the external trap, and the `N`-scaling family.
//!
//! Units: ħ = 1 and particle mass 1/2, so kinetic energy is `-Δ` with no
//! prefactor. Every module in the crate uses this convention.
//!
//! A [`PotentialModel`] is an unscaled radial profile `V(r)` together with an
//! integer scale `N`. The scaled model evaluates to `N² V(N r)` (three
//! dimensional scaling) or `N V(N r)` (one-dimensional analog scaling).
//! Keeping `N` as an integer makes repeated scaling exact:
//! `scale(scale(V, N), M)` and `scale(V, N·M)` are the same value.

use std::f64::consts::PI;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad;

const QUAD_REL_TOL: f64 = 1e-12;
const SUP_SAMPLES: usize = 4096;

/// Unscaled radial profile.
#[derive(Debug, Clone, PartialEq)]
pub enum Profile {
    /// `V0` for `r <= R`, zero beyond.
    Barrier { height: f64, radius: f64 },
    /// `V0 exp(-r²/w²)`, truncated to zero beyond `cutoff`.
    Gaussian { height: f64, width: f64, cutoff: f64 },
    /// Cubic spline through tabulated values, reaching zero with zero slope
    /// at the last node.
    Table(Spline),
}

/// How the integer scale acts on the profile.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scaling {
    /// `V_N(r) = N² V(N r)`.
    ThreeD,
    /// `V_N(x) = N V(N x)`.
    Analog1d,
}

/// A nonnegative, compactly supported radial potential.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialModel {
    profile: Profile,
    scale: u64,
    scaling: Scaling,
}

impl PotentialModel {
    pub fn zero() -> Self {
        Self::barrier(0.0, 1.0).expect("zero barrier is valid")
    }

    pub fn barrier(height: f64, radius: f64) -> Result<Self> {
        if !(height >= 0.0 && height.is_finite()) {
            return Err(Error::domain(format!("barrier height must be >= 0, got {height}")));
        }
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::domain(format!("barrier radius must be > 0, got {radius}")));
        }
        Ok(Self::from_profile(Profile::Barrier { height, radius }))
    }

    /// Gaussian profile; `cutoff` defaults to six widths when `None`.
    pub fn gaussian(height: f64, width: f64, cutoff: Option<f64>) -> Result<Self> {
        if !(height >= 0.0 && height.is_finite()) {
            return Err(Error::domain(format!("gaussian height must be >= 0, got {height}")));
        }
        if !(width > 0.0 && width.is_finite()) {
            return Err(Error::domain(format!("gaussian width must be > 0, got {width}")));
        }
        let cutoff = cutoff.unwrap_or(6.0 * width);
        if !(cutoff > 0.0 && cutoff.is_finite()) {
            return Err(Error::domain(format!("gaussian cutoff must be > 0, got {cutoff}")));
        }
        Ok(Self::from_profile(Profile::Gaussian { height, width, cutoff }))
    }

    /// Tabulated potential. Radii must be strictly increasing and start at a
    /// nonnegative radius; values must be nonnegative. If the last value is
    /// nonzero a zero node is appended one spacing further out.
    pub fn table(radii: &[f64], values: &[f64]) -> Result<Self> {
        Ok(Self::from_profile(Profile::Table(Spline::new(radii, values)?)))
    }

    /// Load a two-column `radius,value` CSV with a header row.
    pub fn table_from_csv(path: impl AsRef<Path>) -> Result<Self> {
        let mut reader = csv::Reader::from_path(path.as_ref())?;
        let headers = reader.headers()?.clone();
        if headers.len() != 2 || &headers[0] != "radius" || &headers[1] != "value" {
            return Err(Error::config(format!(
                "potential table header must be `radius,value`, got `{}`",
                headers.iter().collect::<Vec<_>>().join(",")
            )));
        }
        let mut radii = Vec::new();
        let mut values = Vec::new();
        for record in reader.records() {
            let record = record?;
            let parse = |s: &str| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|e| Error::config(format!("bad number `{s}` in potential table: {e}")))
            };
            radii.push(parse(&record[0])?);
            values.push(parse(&record[1])?);
        }
        Self::table(&radii, &values)
    }

    fn from_profile(profile: Profile) -> Self {
        Self { profile, scale: 1, scaling: Scaling::ThreeD }
    }

    pub fn profile(&self) -> &Profile {
        &self.profile
    }

    pub fn scale(&self) -> u64 {
        self.scale
    }

    pub fn scaling(&self) -> Scaling {
        self.scaling
    }

    /// True when the profile vanishes identically.
    pub fn is_zero(&self) -> bool {
        match &self.profile {
            Profile::Barrier { height, .. } | Profile::Gaussian { height, .. } => *height == 0.0,
            Profile::Table(s) => s.values.iter().all(|&v| v == 0.0),
        }
    }

    fn base_cutoff(&self) -> f64 {
        match &self.profile {
            Profile::Barrier { radius, .. } => *radius,
            Profile::Gaussian { cutoff, .. } => *cutoff,
            Profile::Table(s) => *s.radii.last().expect("spline has nodes"),
        }
    }

    /// Support bound of the scaled potential.
    pub fn cutoff_radius(&self) -> f64 {
        self.base_cutoff() / self.scale as f64
    }

    fn amplitude(&self) -> f64 {
        let s = self.scale as f64;
        match self.scaling {
            Scaling::ThreeD => s * s,
            Scaling::Analog1d => s,
        }
    }

    fn eval_base(&self, r: f64) -> f64 {
        match &self.profile {
            Profile::Barrier { height, radius } => {
                if r <= *radius {
                    *height
                } else {
                    0.0
                }
            }
            Profile::Gaussian { height, width, cutoff } => {
                if r <= *cutoff {
                    height * (-(r / width).powi(2)).exp()
                } else {
                    0.0
                }
            }
            Profile::Table(s) => s.eval(r),
        }
    }

    /// `V(r)` for `r >= 0`.
    pub fn evaluate(&self, r: f64) -> Result<f64> {
        if !(r >= 0.0) {
            return Err(Error::domain(format!("potential evaluated at negative radius {r}")));
        }
        Ok(self.value(r))
    }

    /// Unchecked evaluation; negative radii are treated through `|r|`.
    #[inline]
    pub fn value(&self, r: f64) -> f64 {
        let r = r.abs();
        if self.scale == 1 {
            return self.eval_base(r);
        }
        self.amplitude() * self.eval_base(self.scale as f64 * r)
    }

    /// Radii where the scaled profile may be non-smooth, from 0 to the cutoff.
    pub fn breakpoints(&self) -> Vec<f64> {
        let s = self.scale as f64;
        let mut b: Vec<f64> = match &self.profile {
            Profile::Barrier { radius, .. } => vec![0.0, *radius],
            Profile::Gaussian { width, cutoff, .. } => {
                let mut v = vec![0.0];
                let mut r = *width;
                while r < *cutoff {
                    v.push(r);
                    r += width;
                }
                v.push(*cutoff);
                v
            }
            Profile::Table(sp) => {
                let mut v = sp.radii.clone();
                if v[0] > 0.0 {
                    v.insert(0, 0.0);
                }
                v
            }
        };
        for x in &mut b {
            *x /= s;
        }
        b
    }

    /// Integral of `g(r) V(r)` over `[0, cutoff]`, piecewise adaptive.
    pub(crate) fn radial_integral(&self, g: impl Fn(f64) -> f64) -> f64 {
        let breaks = self.breakpoints();
        let f = |r: f64| g(r) * self.value(r);
        // Interior evaluation keeps barrier pieces on the inside of the jump.
        quad::integrate_pieces(f, &breaks, QUAD_REL_TOL, 0.0)
    }
}

/// `V_N(r) = N² V(N r)`; the cutoff radius shrinks by `N`.
pub fn scale_potential(v: &PotentialModel, n: u64) -> Result<PotentialModel> {
    scale_with(v, n, Scaling::ThreeD)
}

/// One-dimensional analog scaling `V_N(x) = N V(N x)`.
pub fn scale_potential_1d(v: &PotentialModel, n: u64) -> Result<PotentialModel> {
    scale_with(v, n, Scaling::Analog1d)
}

fn scale_with(v: &PotentialModel, n: u64, scaling: Scaling) -> Result<PotentialModel> {
    if n == 0 {
        return Err(Error::domain("scaling parameter N must be >= 1"));
    }
    if v.scale != 1 && v.scaling != scaling {
        return Err(Error::domain("cannot mix three-dimensional and analog scalings"));
    }
    let scale = v
        .scale
        .checked_mul(n)
        .ok_or_else(|| Error::domain("scaling parameter overflow"))?;
    Ok(PotentialModel { profile: v.profile.clone(), scale, scaling })
}

/// Born coupling `b0 = ∫ V d³r = 4π ∫ V(r) r² dr`.
pub fn born_coupling(v: &PotentialModel) -> f64 {
    4.0 * PI * v.radial_integral(|r| r * r)
}

/// One-dimensional coupling `∫ V(|x|) dx = 2 ∫ V(r) dr`.
pub fn born_coupling_1d(v: &PotentialModel) -> f64 {
    2.0 * v.radial_integral(|_| 1.0)
}

/// Interaction strength `α = ∫ V(r)/|r| d³r + sup r² V(r)`.
pub fn alpha_strength(v: &PotentialModel) -> f64 {
    4.0 * PI * v.radial_integral(|r| r) + sup_r2_v(v)
}

fn sup_r2_v(v: &PotentialModel) -> f64 {
    if v.is_zero() {
        return 0.0;
    }
    let g = |r: f64| r * r * v.value(r);
    let rc = v.cutoff_radius();
    let h = rc / SUP_SAMPLES as f64;
    let mut best = 0.0f64;
    let mut best_i = 0usize;
    for i in 0..=SUP_SAMPLES {
        let r = if i == SUP_SAMPLES { rc } else { i as f64 * h };
        let val = g(r);
        if val > best {
            best = val;
            best_i = i;
        }
    }
    for &b in &v.breakpoints() {
        best = best.max(g(b));
    }
    // Golden-section refinement around the best sample.
    let mut lo = (best_i.saturating_sub(1)) as f64 * h;
    let mut hi = ((best_i + 1).min(SUP_SAMPLES)) as f64 * h;
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut a = hi - inv_phi * (hi - lo);
    let mut b = lo + inv_phi * (hi - lo);
    let (mut fa, mut fb) = (g(a), g(b));
    for _ in 0..80 {
        if fa > fb {
            hi = b;
            b = a;
            fb = fa;
            a = hi - inv_phi * (hi - lo);
            fa = g(a);
        } else {
            lo = a;
            a = b;
            fa = fb;
            b = lo + inv_phi * (hi - lo);
            fb = g(b);
        }
        best = best.max(fa).max(fb);
    }
    best
}

/// Cubic spline with zero end slopes, clamped at zero beyond its last node.
#[derive(Debug, Clone, PartialEq)]
pub struct Spline {
    radii: Vec<f64>,
    values: Vec<f64>,
    second: Vec<f64>,
}

impl Spline {
    fn new(radii: &[f64], values: &[f64]) -> Result<Self> {
        if radii.len() != values.len() {
            return Err(Error::domain("table radii and values differ in length"));
        }
        if radii.len() < 2 {
            return Err(Error::domain("table potential needs at least two nodes"));
        }
        if !(radii[0] >= 0.0) {
            return Err(Error::domain("table radii must be nonnegative"));
        }
        if radii.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::domain("table radii must be strictly increasing"));
        }
        if values.iter().any(|&v| !(v >= 0.0 && v.is_finite())) {
            return Err(Error::domain("table values must be finite and >= 0"));
        }
        let mut radii = radii.to_vec();
        let mut values = values.to_vec();
        if *values.last().unwrap() != 0.0 {
            let n = radii.len();
            radii.push(radii[n - 1] + (radii[n - 1] - radii[n - 2]));
            values.push(0.0);
        }
        let second = clamped_second_derivatives(&radii, &values);
        Ok(Self { radii, values, second })
    }

    fn eval(&self, r: f64) -> f64 {
        let n = self.radii.len();
        if r >= self.radii[n - 1] {
            return 0.0;
        }
        if r <= self.radii[0] {
            return self.values[0];
        }
        let i = match self.radii.binary_search_by(|x| x.partial_cmp(&r).unwrap()) {
            Ok(i) => return self.values[i],
            Err(i) => i - 1,
        };
        let h = self.radii[i + 1] - self.radii[i];
        let a = (self.radii[i + 1] - r) / h;
        let b = 1.0 - a;
        let y = a * self.values[i]
            + b * self.values[i + 1]
            + ((a * a * a - a) * self.second[i] + (b * b * b - b) * self.second[i + 1]) * h * h / 6.0;
        y.max(0.0)
    }
}

// Second derivatives of the cubic spline with zero first derivative at both ends.
fn clamped_second_derivatives(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    let mut sub = vec![0.0; n];
    let mut diag = vec![0.0; n];
    let mut sup = vec![0.0; n];
    let mut rhs = vec![0.0; n];
    let h0 = x[1] - x[0];
    diag[0] = h0 / 3.0;
    sup[0] = h0 / 6.0;
    rhs[0] = (y[1] - y[0]) / h0;
    for i in 1..n - 1 {
        let hl = x[i] - x[i - 1];
        let hr = x[i + 1] - x[i];
        sub[i] = hl / 6.0;
        diag[i] = (hl + hr) / 3.0;
        sup[i] = hr / 6.0;
        rhs[i] = (y[i + 1] - y[i]) / hr - (y[i] - y[i - 1]) / hl;
    }
    let hn = x[n - 1] - x[n - 2];
    sub[n - 1] = hn / 6.0;
    diag[n - 1] = hn / 3.0;
    rhs[n - 1] = -(y[n - 1] - y[n - 2]) / hn;
    // Thomas algorithm.
    for i in 1..n {
        let m = sub[i] / diag[i - 1];
        diag[i] -= m * sup[i - 1];
        rhs[i] -= m * rhs[i - 1];
    }
    let mut m2 = vec![0.0; n];
    m2[n - 1] = rhs[n - 1] / diag[n - 1];
    for i in (0..n - 1).rev() {
        m2[i] = (rhs[i] - sup[i] * m2[i + 1]) / diag[i];
    }
    m2
}

/// External confining potential.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TrapModel {
    /// `V_ext(r) = ω² |r|²`; with mass 1/2 the oscillator frequency is `2ω`.
    Harmonic { omega: f64 },
    None,
}

impl TrapModel {
    pub fn is_confining(&self) -> bool {
        matches!(self, TrapModel::Harmonic { omega } if *omega > 0.0)
    }

    #[inline]
    pub fn value(&self, r2: f64) -> f64 {
        match self {
            TrapModel::Harmonic { omega } => omega * omega * r2,
            TrapModel::None => 0.0,
        }
    }

    /// `V_ext` at a point given by its coordinates.
    pub fn at(&self, x: &[f64]) -> f64 {
        self.value(x.iter().map(|c| c * c).sum())
    }
}
