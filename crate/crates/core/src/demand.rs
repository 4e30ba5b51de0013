//! Normalized demand curves.
//!
//! A demand curve is a continuous map `q: [0,1] -> [0,1]` with `q(0) = 1` and
//! `q(1) = 0`, strictly decreasing and concave. Two kinds are supported: the
//! built-in linear curve `q(p) = 1 - p` (the default everywhere), and
//! tabulated curves built from sample tables in raw units via [`normalize`].
//!
//! Tabulated curves are evaluated with a C¹ shape-preserving piecewise
//! quadratic spline: each knot interval is split at one interior point chosen
//! so that the interior slope equals the secant slope, which keeps the
//! interpolant monotone decreasing and concave whenever the knots are.

use thiserror::Error;

/// Tolerance for the `q(1) = 0` endpoint after normalization.
pub const ENDPOINT_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum DemandError {
    #[error("price {0} outside [0, 1]")]
    OutOfDomain(f64),
    #[error("demand table cannot be normalized: {0}")]
    NonNormalizable(String),
    #[error("invalid demand table: {0}")]
    InvalidTable(String),
}

/// Demand observations in raw problem units.
#[derive(Debug, Clone)]
pub struct RawDemand {
    pub p_max: f64,
    pub q_at_zero: f64,
    /// `(price, quantity)` pairs in raw units, sorted by price.
    pub samples: Vec<(f64, f64)>,
}

impl RawDemand {
    pub fn new(p_max: f64, q_at_zero: f64, samples: Vec<(f64, f64)>) -> Result<Self, DemandError> {
        if !(p_max > 0.0) {
            return Err(DemandError::InvalidTable(format!("p_max = {p_max} must be positive")));
        }
        if !(q_at_zero > 0.0) {
            return Err(DemandError::InvalidTable(format!(
                "quantity at zero price = {q_at_zero} must be positive"
            )));
        }
        for &(p, _) in &samples {
            if !(0.0..=p_max).contains(&p) {
                return Err(DemandError::InvalidTable(format!(
                    "sample price {p} outside [0, {p_max}]"
                )));
            }
        }
        Ok(Self { p_max, q_at_zero, samples })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CurveKind {
    Linear,
    Tabulated,
}

/// One quadratic piece `y0 + m0 (x - x0) + c (x - x0)^2` starting at `x0`.
#[derive(Debug, Clone, Copy)]
struct QuadPiece {
    x0: f64,
    y0: f64,
    m0: f64,
    c: f64,
}

impl QuadPiece {
    fn eval(&self, x: f64) -> f64 {
        let t = x - self.x0;
        self.y0 + t * (self.m0 + self.c * t)
    }
}

/// A validated, normalized demand curve. Immutable after construction and
/// safe to share across threads; evaluation is pure.
#[derive(Debug, Clone)]
pub struct DemandCurve {
    kind: CurveKind,
    /// Normalized sample knots; `[(0,1), (1,0)]` for the linear kind.
    samples: Vec<(f64, f64)>,
    /// Spline pieces for the tabulated kind, in ascending `x0` order.
    pieces: Vec<QuadPiece>,
}

impl DemandCurve {
    /// The linear demand curve `q(p) = 1 - p`.
    pub fn linear() -> Self {
        Self {
            kind: CurveKind::Linear,
            samples: vec![(0.0, 1.0), (1.0, 0.0)],
            pieces: Vec::new(),
        }
    }

    /// Builds a tabulated curve from normalized samples.
    ///
    /// Requires at least three samples with strictly increasing prices
    /// covering `[0, 1]`. Shape violations (non-monotone or non-concave
    /// quantities) are allowed here so that [`DemandCurve::validate`] can
    /// diagnose them; [`normalize`] is the strict entry point.
    pub fn tabulated(samples: Vec<(f64, f64)>) -> Result<Self, DemandError> {
        if samples.len() < 3 {
            return Err(DemandError::InvalidTable(format!(
                "need at least 3 samples, got {}",
                samples.len()
            )));
        }
        for w in samples.windows(2) {
            if !(w[1].0 > w[0].0) {
                return Err(DemandError::InvalidTable(format!(
                    "sample prices must strictly increase ({} then {})",
                    w[0].0, w[1].0
                )));
            }
        }
        let first = samples.first().unwrap();
        let last = samples.last().unwrap();
        if first.0.abs() > 1e-12 || (last.0 - 1.0).abs() > 1e-12 {
            return Err(DemandError::InvalidTable(
                "samples must cover prices 0 and 1 exactly".into(),
            ));
        }
        let pieces = build_spline(&samples);
        Ok(Self { kind: CurveKind::Tabulated, samples, pieces })
    }

    pub fn kind(&self) -> CurveKind {
        self.kind
    }

    /// Normalized sample knots.
    pub fn samples(&self) -> &[(f64, f64)] {
        &self.samples
    }

    /// Demand at price `p`.
    pub fn evaluate(&self, p: f64) -> Result<f64, DemandError> {
        if !(0.0..=1.0).contains(&p) {
            return Err(DemandError::OutOfDomain(p));
        }
        Ok(self.q(p))
    }

    /// Unchecked evaluation on `[0, 1]`; callers guarantee the domain.
    pub(crate) fn q(&self, p: f64) -> f64 {
        match self.kind {
            CurveKind::Linear => 1.0 - p,
            CurveKind::Tabulated => {
                // Binary search for the piece containing p.
                let mut lo = 0usize;
                let mut hi = self.pieces.len() - 1;
                while lo < hi {
                    let mid = (lo + hi).div_ceil(2);
                    if self.pieces[mid].x0 <= p {
                        lo = mid;
                    } else {
                        hi = mid - 1;
                    }
                }
                self.pieces[lo].eval(p)
            }
        }
    }

    /// Derivative `q'(p)`: analytic for the linear kind, central finite
    /// differences (`h = 1e-6`, one-sided at the boundary) for tables.
    pub(crate) fn dq(&self, p: f64) -> f64 {
        match self.kind {
            CurveKind::Linear => -1.0,
            CurveKind::Tabulated => {
                const H: f64 = 1e-6;
                let lo = (p - H).max(0.0);
                let hi = (p + H).min(1.0);
                (self.q(hi) - self.q(lo)) / (hi - lo)
            }
        }
    }

    /// Diagnostics for the curve invariants. An empty report means valid.
    pub fn validate(&self) -> ValidationReport {
        let mut violations = Vec::new();
        let s = &self.samples;
        if (s[0].1 - 1.0).abs() > ENDPOINT_TOL {
            violations.push(Violation::EndpointAtZero { q0: s[0].1 });
        }
        let q1 = s.last().unwrap().1;
        if q1.abs() > ENDPOINT_TOL {
            violations.push(Violation::EndpointAtOne { q1 });
        }
        for (i, w) in s.windows(2).enumerate() {
            if w[1].1 >= w[0].1 {
                violations.push(Violation::NotDecreasing { first: i, second: i + 1 });
            }
        }
        // Second divided differences of the samples must be negative; the
        // linear kind is flat and accepted as weakly concave.
        if self.kind == CurveKind::Tabulated {
            for i in 1..s.len() - 1 {
                let (x0, y0) = s[i - 1];
                let (x1, y1) = s[i];
                let (x2, y2) = s[i + 1];
                let d2 = ((y2 - y1) / (x2 - x1) - (y1 - y0) / (x1 - x0)) / (x2 - x0);
                if d2 >= 0.0 {
                    violations.push(Violation::NotConcave { center: i });
                }
            }
            // Interpolation must not introduce shape defects: probe densely.
            const PROBE: usize = 10_000;
            let mut prev = self.q(0.0);
            for k in 1..=PROBE {
                let p = k as f64 / PROBE as f64;
                let cur = self.q(p);
                if cur >= prev + 1e-12 || cur < -1e-12 {
                    violations.push(Violation::EvaluatorShape { price: p });
                    break;
                }
                prev = cur;
            }
        }
        ValidationReport { violations }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    /// `q(0)` differs from 1.
    EndpointAtZero { q0: f64 },
    /// `q(1)` differs from 0.
    EndpointAtOne { q1: f64 },
    /// Quantity fails to strictly decrease between two sample indices.
    NotDecreasing { first: usize, second: usize },
    /// Non-negative second divided difference centered at a sample index.
    NotConcave { center: usize },
    /// The interpolant itself violates monotonicity or nonnegativity.
    EvaluatorShape { price: f64 },
}

#[derive(Debug, Clone)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Normalizes a raw demand table to the unit square.
///
/// Prices divide by `p_max` and quantities by the quantity at price zero, so
/// the result satisfies `q(0) = 1` and `q(1) = 0`. Tables whose normalized
/// samples are collinear collapse to the exact linear kind.
pub fn normalize(raw: &RawDemand) -> Result<DemandCurve, DemandError> {
    if raw.samples.len() < 2 {
        return Err(DemandError::NonNormalizable("need at least 2 samples".into()));
    }
    let mut samples: Vec<(f64, f64)> = raw
        .samples
        .iter()
        .map(|&(p, q)| (p / raw.p_max, q / raw.q_at_zero))
        .collect();
    samples.sort_by(|a, b| a.0.total_cmp(&b.0));
    if samples[0].0.abs() > 1e-12 {
        return Err(DemandError::NonNormalizable("first sample must sit at price 0".into()));
    }
    if (samples.last().unwrap().0 - 1.0).abs() > 1e-12 {
        return Err(DemandError::NonNormalizable(
            "last sample must sit at the maximum price".into(),
        ));
    }
    if (samples[0].1 - 1.0).abs() > ENDPOINT_TOL {
        return Err(DemandError::NonNormalizable(format!(
            "quantity at price 0 normalizes to {} instead of 1",
            samples[0].1
        )));
    }
    let q_end = samples.last().unwrap().1;
    if q_end.abs() > ENDPOINT_TOL {
        return Err(DemandError::NonNormalizable(format!(
            "quantity at the maximum price normalizes to {q_end}, not 0"
        )));
    }
    for w in samples.windows(2) {
        if w[1].1 >= w[0].1 {
            return Err(DemandError::NonNormalizable(format!(
                "quantity not strictly decreasing near price {}",
                w[1].0
            )));
        }
    }
    // Snap the endpoints exactly; inputs are only endpoint-accurate to tol.
    samples.first_mut().unwrap().1 = 1.0;
    samples.last_mut().unwrap().1 = 0.0;

    let collinear = samples.iter().all(|&(p, q)| (q - (1.0 - p)).abs() <= 1e-12);
    if collinear {
        return Ok(DemandCurve::linear());
    }
    if samples.len() < 3 {
        return Err(DemandError::NonNormalizable(
            "non-linear table needs at least 3 samples".into(),
        ));
    }
    DemandCurve::tabulated(samples)
}

/// Maps a normalized curve back to raw units. Inverse of [`normalize`] on the
/// sample knots.
pub fn denormalize(curve: &DemandCurve, p_max: f64, q_at_zero: f64) -> RawDemand {
    RawDemand {
        p_max,
        q_at_zero,
        samples: curve
            .samples
            .iter()
            .map(|&(p, q)| (p * p_max, q * q_at_zero))
            .collect(),
    }
}

/// Builds the shape-preserving quadratic spline through the knots.
///
/// Knot slopes are secant averages (three-point formula at the ends). On each
/// interval, if the end slopes do not already describe a single quadratic,
/// the interval is split where the interior slope equals the secant slope,
/// which for concave decreasing knots keeps both pieces concave decreasing.
fn build_spline(samples: &[(f64, f64)]) -> Vec<QuadPiece> {
    let n = samples.len();
    let secant: Vec<f64> = samples
        .windows(2)
        .map(|w| (w[1].1 - w[0].1) / (w[1].0 - w[0].0))
        .collect();
    let mut m = vec![0.0; n];
    for i in 1..n - 1 {
        m[i] = 0.5 * (secant[i - 1] + secant[i]);
    }
    m[0] = 1.5 * secant[0] - 0.5 * m[1];
    m[n - 1] = 1.5 * secant[n - 2] - 0.5 * m[n - 2];

    let mut pieces = Vec::with_capacity(2 * (n - 1));
    for i in 0..n - 1 {
        let (x0, y0) = samples[i];
        let (x1, y1) = samples[i + 1];
        let h = x1 - x0;
        let s = secant[i];
        let (m0, m1) = (m[i], m[i + 1]);
        if (m0 + m1 - 2.0 * s).abs() < 1e-14 * (1.0 + s.abs()) {
            pieces.push(QuadPiece { x0, y0, m0, c: (m1 - m0) / (2.0 * h) });
            continue;
        }
        // Split point where the interior slope equals the secant slope.
        let denom = m0 - m1;
        let mut a = if denom.abs() < 1e-14 { 0.5 * h } else { h * (s - m1) / denom };
        if !(a > 1e-12 * h && a < h * (1.0 - 1e-12)) {
            a = 0.5 * h;
        }
        let xi = x0 + a;
        let b = h - a;
        let m_mid = (2.0 * s * h - m0 * a - m1 * b) / h;
        let y_mid = y0 + 0.5 * (m0 + m_mid) * a;
        pieces.push(QuadPiece { x0, y0, m0, c: (m_mid - m0) / (2.0 * a) });
        pieces.push(QuadPiece { x0: xi, y0: y_mid, m0: m_mid, c: (m1 - m_mid) / (2.0 * b) });
        debug_assert!((pieces.last().unwrap().eval(x1) - y1).abs() < 1e-9);
    }
    pieces
}
