//! Jump contours made of rays from the origin and the jump matrices on them.
//!
//! Orientation convention: the `+` side of a ray is on its left. Circling
//! the origin counter-clockwise therefore crosses an outgoing ray from `-`
//! to `+` (multiply by `J`) and an incoming ray from `+` to `-` (multiply by
//! `J⁻¹`). A solution that is continuous at the origin needs the ordered
//! product, by increasing angle, to be the identity.

use super::matrix::Mat2;
use super::RhError;
use num_complex::Complex64;
use serde::Serialize;
use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Orientation {
    TowardOrigin,
    AwayFromOrigin,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Ray {
    /// Angle in `(-π, π]`.
    pub angle: f64,
    pub orientation: Orientation,
}

/// Rays meeting at the origin, sorted by angle in `[0, 2π)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RayContour {
    rays: Vec<Ray>,
}

fn unwrap_angle(a: f64) -> f64 {
    a.rem_euclid(2.0 * PI)
}

impl RayContour {
    pub fn new(mut rays: Vec<Ray>) -> Result<Self, RhError> {
        if rays.is_empty() || rays.iter().any(|r| !r.angle.is_finite()) {
            return Err(RhError::Contour("need at least one ray with finite angle".into()));
        }
        rays.sort_by(|a, b| unwrap_angle(a.angle).total_cmp(&unwrap_angle(b.angle)));
        for w in 0..rays.len() {
            let a = unwrap_angle(rays[w].angle);
            let b = unwrap_angle(rays[(w + 1) % rays.len()].angle);
            let gap = (b - a).rem_euclid(2.0 * PI);
            if rays.len() > 1 && (gap < 1e-12 || 2.0 * PI - gap < 1e-12) {
                return Err(RhError::Contour(format!("rays at angles {a} and {b} coincide mod 2π")));
            }
        }
        Ok(Self { rays })
    }

    pub fn rays(&self) -> &[Ray] {
        &self.rays
    }

    /// The only node of every contour here.
    pub fn nodes(&self) -> [Complex64; 1] {
        [Complex64::new(0.0, 0.0)]
    }
}

/// Named real parameters of a jump (`X`, `T`, `Z`, `x`, `t`, `eps`, ...).
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Parameters(BTreeMap<String, f64>);

impl Parameters {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, name: &str, value: f64) -> Self {
        self.0.insert(name.to_string(), value);
        self
    }

    pub fn get(&self, name: &str) -> Result<f64, RhError> {
        self.0
            .get(name)
            .copied()
            .ok_or_else(|| RhError::MissingParameter(name.to_string()))
    }
}

/// Initial reflection coefficient `r0(spectral variable, eps)`.
pub type Reflection = Arc<dyn Fn(f64, f64) -> Complex64 + Send + Sync>;

type JumpFn = Arc<dyn Fn(Complex64, &Parameters) -> Result<Mat2, RhError> + Send + Sync>;

#[derive(Clone)]
pub struct RayJump {
    pub label: String,
    jump: JumpFn,
    /// Determinant the jump must have (`-1` on `σ₁` rays).
    pub expected_det: f64,
    /// Whether the jump is independent of position and parameters.
    pub constant: bool,
}

impl fmt::Debug for RayJump {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RayJump")
            .field("label", &self.label)
            .field("expected_det", &self.expected_det)
            .field("constant", &self.constant)
            .finish()
    }
}

impl RayJump {
    pub fn constant(label: &str, m: Mat2) -> Self {
        Self {
            label: label.to_string(),
            expected_det: m.det().re,
            jump: Arc::new(move |_, _| Ok(m)),
            constant: true,
        }
    }

    fn varying(label: &str, expected_det: f64, f: JumpFn) -> Self {
        Self {
            label: label.to_string(),
            jump: f,
            expected_det,
            constant: false,
        }
    }
}

/// Whether the problem is posed for a row vector, a full matrix, or a
/// vector problem that also admits a 2×2 completion (negative potentials).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Shape {
    Matrix,
    Vector,
    VectorWithMatrixCompletion,
}

#[derive(Debug, Clone)]
pub struct JumpDescriptor {
    pub name: String,
    pub contour: RayContour,
    /// One entry per ray, in contour order.
    jumps: Vec<RayJump>,
    pub parameters: Vec<&'static str>,
    /// Vanishing exponent of the phase this model problem matches.
    pub exponent: Option<f64>,
    pub shape: Shape,
}

#[derive(Debug, Clone, Serialize)]
pub struct RaySummary {
    pub angle: f64,
    pub orientation: Orientation,
    pub label: String,
    pub expected_det: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct DescriptorSummary {
    pub name: String,
    pub rays: Vec<RaySummary>,
    pub parameters: Vec<&'static str>,
    pub exponent: Option<f64>,
    pub shape: Shape,
}

impl JumpDescriptor {
    fn build(
        name: &str,
        rays: Vec<(Ray, RayJump)>,
        parameters: Vec<&'static str>,
        exponent: Option<f64>,
        shape: Shape,
    ) -> Result<Self, RhError> {
        let contour = RayContour::new(rays.iter().map(|(r, _)| *r).collect())?;
        let mut jumps = Vec::with_capacity(rays.len());
        for ray in contour.rays() {
            let (_, j) = rays.iter().find(|(r, _)| r == ray).expect("ray present");
            jumps.push(j.clone());
        }
        Ok(Self {
            name: name.to_string(),
            contour,
            jumps,
            parameters,
            exponent,
            shape,
        })
    }

    pub fn jumps(&self) -> &[RayJump] {
        &self.jumps
    }

    /// Jump on ray `index` at distance `radius` from the origin.
    pub fn jump(&self, index: usize, radius: f64, params: &Parameters) -> Result<Mat2, RhError> {
        let ray = self
            .contour
            .rays()
            .get(index)
            .ok_or_else(|| RhError::Contour(format!("no ray {index}")))?;
        let zeta = Complex64::from_polar(radius, ray.angle);
        (self.jumps[index].jump)(zeta, params)
    }

    /// Copy with the jump on ray `index` replaced by a constant matrix.
    pub fn with_constant_jump(&self, index: usize, m: Mat2) -> Self {
        let mut d = self.clone();
        d.jumps[index] = RayJump::constant("replaced", m);
        d
    }

    pub fn summary(&self) -> DescriptorSummary {
        DescriptorSummary {
            name: self.name.clone(),
            rays: self
                .contour
                .rays()
                .iter()
                .zip(&self.jumps)
                .map(|(r, j)| RaySummary {
                    angle: r.angle,
                    orientation: r.orientation,
                    label: j.label.clone(),
                    expected_det: j.expected_det,
                })
                .collect(),
            parameters: self.parameters.clone(),
            exponent: self.exponent,
            shape: self.shape,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DescriptorName {
    PsiP12,
    PhiP1,
    KdvM,
    KdvHierarchyM(u32),
    ChM,
    NlsDefocusingM,
    NlsFocusingM,
}

impl DescriptorName {
    pub fn needs_reflection(&self) -> bool {
        !matches!(self, Self::PsiP12 | Self::PhiP1)
    }
}

impl fmt::Display for DescriptorName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::PsiP12 => write!(f, "psi_p12"),
            Self::PhiP1 => write!(f, "phi_p1"),
            Self::KdvM => write!(f, "kdv_M"),
            Self::KdvHierarchyM(m) => write!(f, "kdv_hierarchy_M({m})"),
            Self::ChM => write!(f, "ch_M"),
            Self::NlsDefocusingM => write!(f, "nls_defocusing_M"),
            Self::NlsFocusingM => write!(f, "nls_focusing_M"),
        }
    }
}

impl FromStr for DescriptorName {
    type Err = RhError;
    fn from_str(s: &str) -> Result<Self, RhError> {
        Ok(match s {
            "psi_p12" => Self::PsiP12,
            "phi_p1" => Self::PhiP1,
            "kdv_M" => Self::KdvM,
            "ch_M" => Self::ChM,
            "nls_defocusing_M" => Self::NlsDefocusingM,
            "nls_focusing_M" => Self::NlsFocusingM,
            _ => {
                let m = s
                    .strip_prefix("kdv_hierarchy_M(")
                    .and_then(|r| r.strip_suffix(')'))
                    .and_then(|m| m.trim().parse::<u32>().ok())
                    .filter(|&m| m >= 1)
                    .ok_or_else(|| RhError::UnknownDescriptor(s.to_string()))?;
                Self::KdvHierarchyM(m)
            }
        })
    }
}

fn ci(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn ray(angle: f64, orientation: Orientation) -> Ray {
    Ray { angle, orientation }
}

/// Reflection-type jump `((1, r e), (-r̄ ē, 1 - |r|²))` with `e` unimodular.
fn kdv_block(r: Complex64, e: Complex64) -> Mat2 {
    Mat2::new(ci(1.0, 0.0), r * e, -(r * e).conj(), ci(1.0 - r.norm_sqr(), 0.0))
}

/// Builds one of the model or reflection-type jump problems. Reflection
/// descriptors need `r0`; its time evolution is applied here.
pub fn builtin_descriptor(name: DescriptorName, r0: Option<Reflection>) -> Result<JumpDescriptor, RhError> {
    use Orientation::*;
    let r0 = match (name.needs_reflection(), r0) {
        (true, None) => return Err(RhError::MissingReflection(name.to_string())),
        (_, r) => r,
    };
    let label = name.to_string();
    match name {
        DescriptorName::PsiP12 => {
            let a = 6.0 * PI / 7.0;
            let lower = Mat2::real(1.0, 0.0, 1.0, 1.0);
            JumpDescriptor::build(
                &label,
                vec![
                    (ray(0.0, AwayFromOrigin), RayJump::constant("upper unipotent", Mat2::real(1.0, 1.0, 0.0, 1.0))),
                    (ray(a, TowardOrigin), RayJump::constant("lower unipotent", lower)),
                    (ray(PI, TowardOrigin), RayJump::constant("rotation", Mat2::real(0.0, 1.0, -1.0, 0.0))),
                    (ray(-a, TowardOrigin), RayJump::constant("lower unipotent", lower)),
                ],
                vec!["X", "T"],
                Some(3.5),
                Shape::Matrix,
            )
        }
        DescriptorName::PhiP1 => {
            let a = 2.0 * PI / 5.0;
            let zero = ci(0.0, 0.0);
            let one = ci(1.0, 0.0);
            let i = ci(0.0, 1.0);
            let upper = Mat2::new(one, i, zero, one);
            JumpDescriptor::build(
                &label,
                vec![
                    (ray(0.0, AwayFromOrigin), RayJump::constant("lower unipotent", Mat2::new(one, zero, i, one))),
                    (ray(a, AwayFromOrigin), RayJump::constant("upper unipotent", upper)),
                    (ray(PI, TowardOrigin), RayJump::constant("i sigma1", Mat2::new(zero, i, i, zero))),
                    (ray(-a, AwayFromOrigin), RayJump::constant("upper unipotent", upper)),
                ],
                vec!["Z"],
                Some(2.5),
                Shape::Matrix,
            )
        }
        DescriptorName::KdvM | DescriptorName::KdvHierarchyM(_) => {
            let m = match name {
                DescriptorName::KdvHierarchyM(m) => m,
                _ => 1,
            };
            let r0 = r0.expect("checked above");
            // r = r0 exp((2·4^m i/eps) t (-λ)^{(2m+1)/2})
            let coeff = 2.0 * 4f64.powi(m as i32);
            let power = (2 * m + 1) as f64 / 2.0;
            let neg: RayJump = RayJump::varying(
                "reflection",
                1.0,
                Arc::new(move |zeta: Complex64, p: &Parameters| {
                    let (x, t, eps) = (p.get("x")?, p.get("t")?, p.get("eps")?);
                    let mu = -zeta.re;
                    let r = r0(zeta.re, eps) * Complex64::from_polar(1.0, coeff * t * mu.powf(power) / eps);
                    let e = Complex64::from_polar(1.0, 2.0 * x * mu.sqrt() / eps);
                    Ok(kdv_block(r, e))
                }),
            );
            let mut sigma = RayJump::constant("sigma1", Mat2::SIGMA1);
            sigma.expected_det = -1.0;
            JumpDescriptor::build(
                &label,
                vec![(ray(PI, TowardOrigin), neg), (ray(0.0, AwayFromOrigin), sigma)],
                vec!["x", "t", "eps"],
                Some(3.5),
                Shape::VectorWithMatrixCompletion,
            )
        }
        DescriptorName::ChM => {
            let r0 = r0.expect("checked above");
            let f: JumpFn = Arc::new(move |zeta: Complex64, p: &Parameters| {
                let (y, t, eps) = (p.get("y")?, p.get("t")?, p.get("eps")?);
                let z = zeta.re;
                let r = r0(z, eps) * Complex64::from_polar(1.0, 4.0 * t * z / (eps * (1.0 + 4.0 * z * z)));
                let e = Complex64::from_polar(1.0, -2.0 * y * z);
                Ok(Mat2::new(ci(1.0 - r.norm_sqr(), 0.0), r * e, -(r * e).conj(), ci(1.0, 0.0)))
            });
            real_line(&label, f, vec!["y", "t", "eps"], None, Shape::Vector)
        }
        DescriptorName::NlsDefocusingM | DescriptorName::NlsFocusingM => {
            let r0 = r0.expect("checked above");
            let focusing = name == DescriptorName::NlsFocusingM;
            let f: JumpFn = Arc::new(move |zeta: Complex64, p: &Parameters| {
                let (x, t, eps) = (p.get("x")?, p.get("t")?, p.get("eps")?);
                let z = zeta.re;
                let r = r0(z, eps) * Complex64::from_polar(1.0, 4.0 * t * z * z / eps);
                let e = Complex64::from_polar(1.0, 2.0 * x * z / eps);
                Ok(if focusing {
                    Mat2::new(ci(1.0 + r.norm_sqr(), 0.0), (r * e).conj(), r * e, ci(1.0, 0.0))
                } else {
                    Mat2::new(ci(1.0 - r.norm_sqr(), 0.0), -(r * e).conj(), r * e, ci(1.0, 0.0))
                })
            });
            let exponent = if focusing { Some(2.5) } else { None };
            real_line(&label, f, vec!["x", "t", "eps"], exponent, Shape::Matrix)
        }
    }
}

fn real_line(
    label: &str,
    f: JumpFn,
    parameters: Vec<&'static str>,
    exponent: Option<f64>,
    shape: Shape,
) -> Result<JumpDescriptor, RhError> {
    use Orientation::*;
    JumpDescriptor::build(
        label,
        vec![
            (ray(PI, TowardOrigin), RayJump::varying("reflection", 1.0, f.clone())),
            (ray(0.0, AwayFromOrigin), RayJump::varying("reflection", 1.0, f)),
        ],
        parameters,
        exponent,
        shape,
    )
}

/// Max of `|det J - expected|` over every ray, radius and parameter set.
pub fn det_check(d: &JumpDescriptor, radii: &[f64], params: &[Parameters]) -> Result<f64, RhError> {
    let mut worst: f64 = 0.0;
    for (k, j) in d.jumps.iter().enumerate() {
        for p in params {
            for &s in radii {
                let m = d.jump(k, s, p)?;
                worst = worst.max((m.det() - j.expected_det).norm());
            }
        }
    }
    Ok(worst)
}

/// Product of the (possibly inverted) jumps by increasing angle.
pub fn cyclic_product(d: &JumpDescriptor, inverted: &[bool]) -> Result<Mat2, RhError> {
    if inverted.len() != d.jumps.len() {
        return Err(RhError::Contour(format!(
            "{} inversion flags for {} rays",
            inverted.len(),
            d.jumps.len()
        )));
    }
    if let Some(j) = d.jumps.iter().find(|j| !j.constant) {
        return Err(RhError::Unsupported(format!(
            "jump '{}' of {} is not constant near the node",
            j.label, d.name
        )));
    }
    let p = Parameters::new();
    let mut acc = Mat2::IDENTITY;
    for (k, &inv) in inverted.iter().enumerate() {
        let m = d.jump(k, 1.0, &p)?;
        let m = if inv {
            m.inverse().ok_or_else(|| RhError::Unsupported("singular jump".into()))?
        } else {
            m
        };
        acc = acc * m;
    }
    Ok(acc)
}

/// Deviation from the identity of the product around the origin, with
/// incoming rays inverted.
pub fn cyclic_consistency(d: &JumpDescriptor) -> Result<f64, RhError> {
    let flags: Vec<bool> = d
        .contour
        .rays()
        .iter()
        .map(|r| r.orientation == Orientation::TowardOrigin)
        .collect();
    Ok(cyclic_product(d, &flags)?.distance(&Mat2::IDENTITY))
}

/// Every inversion pattern whose cyclic product is exactly the identity.
///
/// For jump sequences symmetric about the real axis the complement of a
/// consistent pattern is consistent too (reversing every ray), so the
/// built-in model problems give two patterns; the side convention of the
/// contour selects one.
pub fn consistent_inversion_patterns(d: &JumpDescriptor) -> Result<Vec<Vec<bool>>, RhError> {
    let n = d.jumps.len();
    let mut out = Vec::new();
    for mask in 0u32..(1 << n) {
        let flags: Vec<bool> = (0..n).map(|k| mask & (1 << k) != 0).collect();
        if cyclic_product(d, &flags)?.distance(&Mat2::IDENTITY) == 0.0 {
            out.push(flags);
        }
    }
    Ok(out)
}
