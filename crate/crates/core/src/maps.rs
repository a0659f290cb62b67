//! Time maps and branch families in both the α and z parameterisations.
//!
//! Orbits below the homoclinic loop are labelled by the abscissa α of their
//! negative-x-axis crossing; every orbit satisfying the Dirichlet condition
//! is labelled by z = y(−L)², the squared slope at the left endpoint. The
//! two labels are tied together by the first integral V(x,y) = y² − cos 2x:
//! `z = cos 2φ − cos 2α`.
//!
//! Below the homoclinic the maps go through the elliptic reduction
//! `cos 2x − cos 2α = 2(sin²α − sin²x)` (fast and exact to machine
//! precision); above it, and wherever a cross-check is wanted, they go
//! through direct tanh-sinh quadrature of the z-form integrand
//! `(z − cos 2φ + cos 2x)^{−1/2}`.

use crate::error::{Error, Result};
use crate::quad::{self, Power};
use serde::Serialize;
use std::f64::consts::{FRAC_PI_2, SQRT_2};
use std::fmt;

/// One problem instance: the Dirichlet angle φ and its derived constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundaryConfig {
    /// Dirichlet datum: x(−L) = −φ, φ ∈ (0, π/2).
    pub phi: f64,
    /// Neumann datum φ* = √(1 − cos 2φ) = √2·sin φ.
    pub phi_star: f64,
    /// Ordinate squared of the homoclinic loop over x = −φ: z* = 1 + cos 2φ.
    pub z_star: f64,
    /// Critical time T* = T(φ); the k = 0 branches bifurcate at 2L = T*.
    pub t_star: f64,
}

/// Builds a [`BoundaryConfig`] from the Dirichlet angle.
pub fn make_config(phi: f64) -> Result<BoundaryConfig> {
    if !(0.0 < phi && phi < FRAC_PI_2) {
        return Err(Error::domain(format!("phi must lie in (0,π/2), got {phi}")));
    }
    let s = phi.sin();
    let c = phi.cos();
    Ok(BoundaryConfig {
        phi,
        phi_star: SQRT_2 * s,
        z_star: 2.0 * c * c,
        t_star: time_t(phi)?,
    })
}

impl BoundaryConfig {
    pub fn new(phi: f64) -> Result<Self> {
        make_config(phi)
    }
}

/// Topological family of a solution branch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    I,
    A,
    B,
    C,
    /// The partner of B above the homoclinic; identical to `Dprime` with
    /// winding 0 and normalised to it everywhere.
    Bprime,
    /// B-like orbits above the homoclinic winding the cylinder k times.
    D,
    /// B′-like orbits above the homoclinic winding the cylinder k+1 times.
    Dprime,
}

impl Family {
    /// Stable label used in CSV output and CLI parsing.
    pub fn label(self) -> &'static str {
        match self {
            Family::I => "I",
            Family::A => "A",
            Family::B => "B",
            Family::C => "C",
            Family::Bprime => "B'",
            Family::D => "D",
            Family::Dprime => "D'",
        }
    }

    pub fn parse(s: &str) -> Option<Family> {
        match s.trim().to_ascii_uppercase().as_str() {
            "I" => Some(Family::I),
            "A" => Some(Family::A),
            "B" => Some(Family::B),
            "C" => Some(Family::C),
            "B'" | "BPRIME" => Some(Family::Bprime),
            "D" => Some(Family::D),
            "D'" | "DPRIME" => Some(Family::Dprime),
            _ => None,
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl Serialize for Family {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.label())
    }
}

/// A branch: family tag plus winding count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct BranchId {
    pub family: Family,
    pub winding: u32,
}

impl BranchId {
    pub fn new(family: Family, winding: u32) -> Self {
        BranchId { family, winding }
    }

    /// B′ is the winding-0 member of the D′ family; fold it in so the
    /// dispatch below has one above-homoclinic pair to deal with.
    fn normalized(self) -> Self {
        match self.family {
            Family::Bprime => BranchId::new(Family::Dprime, self.winding),
            _ => self,
        }
    }

    /// True for the families whose orbits leave (−φ, y(−L)) downward
    /// (`y(−L) = −√z`); these carry `signed_z = −z` in the diagram.
    pub fn starts_downward(self) -> bool {
        matches!(self.family, Family::A | Family::C)
    }
}

impl fmt::Display for BranchId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.family {
            Family::Dprime => write!(f, "D{}'", self.winding),
            Family::Bprime => write!(f, "B'"),
            Family::D => write!(f, "D{}", self.winding),
            fam => {
                if self.winding == 0 {
                    write!(f, "{fam}")
                } else {
                    write!(f, "{fam}{}", self.winding)
                }
            }
        }
    }
}

/// Existence window in z of a branch for a given φ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ZDomain {
    pub lo: f64,
    pub hi: f64,
    pub lo_open: bool,
    pub hi_open: bool,
}

impl ZDomain {
    fn new(lo: f64, hi: f64, lo_open: bool, hi_open: bool) -> Self {
        ZDomain {
            lo,
            hi,
            lo_open,
            hi_open,
        }
    }

    pub fn contains(&self, z: f64) -> bool {
        let above = if self.lo_open {
            z > self.lo
        } else {
            z >= self.lo
        };
        let below = if self.hi_open {
            z < self.hi
        } else {
            z <= self.hi
        };
        above && below
    }

    /// Interior width; handy for grid placement.
    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }
}

impl fmt::Display for ZDomain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}{}, {}{}",
            if self.lo_open { "(" } else { "[" },
            self.lo,
            self.hi,
            if self.hi_open { ")" } else { "]" }
        )
    }
}

// ---------------------------------------------------------------------------
// Elementary maps
// ---------------------------------------------------------------------------

/// Quarter-period time map T(α) = ∫₀^α (cos 2x − cos 2α)^{−1/2} dx,
/// evaluated as K(sin α)/√2. Strictly increasing, → π/(2√2) as α → 0 and
/// → ∞ as α → π/2.
pub fn time_t(alpha: f64) -> Result<f64> {
    if !(0.0 < alpha && alpha < FRAC_PI_2) {
        return Err(Error::domain(format!(
            "time_t needs alpha in (0,π/2), got {alpha}"
        )));
    }
    Ok(quad::complete_elliptic_k(alpha.sin())? / SQRT_2)
}

/// Partial time map T₁(α, ν) = ∫₀^ν (cos 2x − cos 2α)^{−1/2} dx for
/// ν ≤ α: the travel time along γ_α from the positive-y-axis crossing to
/// the line x = ν. Evaluated as F(arcsin(sin ν / sin α), sin α)/√2.
pub fn time_t1(alpha: f64, nu: f64) -> Result<f64> {
    if !(0.0 < alpha && alpha < FRAC_PI_2) {
        return Err(Error::domain(format!(
            "time_t1 needs alpha in (0,π/2), got {alpha}"
        )));
    }
    if nu < 0.0 || nu > alpha + 4.0 * f64::EPSILON {
        return Err(Error::domain(format!(
            "time_t1 needs 0 <= nu <= alpha, got nu={nu}, alpha={alpha}"
        )));
    }
    if nu == 0.0 {
        return Ok(0.0);
    }
    let ratio = (nu.sin() / alpha.sin()).min(1.0);
    Ok(quad::incomplete_elliptic_f(ratio.asin(), alpha.sin())? / SQRT_2)
}

/// z-form partial time map: ∫₀^ν (z − cos 2φ + cos 2x)^{−1/2} dx. Extends
/// T₁ above the homoclinic; below it, equals `time_t1(alpha_from_z(z,φ), ν)`.
pub fn time_t1_z(z: f64, phi: f64, nu: f64) -> Result<f64> {
    Ok(quad::power_integral(z, phi, nu, Power::Half)?.value)
}

/// Positive abscissa where the orbit through (−α, 0) meets y = φ*:
/// x*(α, φ) = ½·arccos(1 − cos 2φ + cos 2α). Note x*(φ, φ) = 0 (the
/// critical orbit terminates on the y-axis).
pub fn x_star(alpha: f64, phi: f64) -> Result<f64> {
    if !(0.0 < phi && phi < FRAC_PI_2) || !(alpha < FRAC_PI_2) {
        return Err(Error::domain(format!(
            "x_star needs 0 < phi <= alpha < π/2, got alpha={alpha}, phi={phi}"
        )));
    }
    let arg = 1.0 - (2.0 * phi).cos() + (2.0 * alpha).cos();
    if !(-1.0..=1.0 + 16.0 * f64::EPSILON).contains(&arg) {
        return Err(Error::domain(format!(
            "x_star arccos argument {arg} outside [-1,1] (alpha < phi?)"
        )));
    }
    Ok(0.5 * arg.clamp(-1.0, 1.0).acos())
}

/// x* in the z label: x̄*(z) = ½·arccos(1 − z), z ∈ [0, 2].
pub fn x_bar_star(z: f64) -> Result<f64> {
    if !(0.0..=2.0).contains(&z) {
        return Err(Error::domain(format!(
            "x_bar_star needs z in [0,2], got {z}"
        )));
    }
    Ok(0.5 * (1.0 - z).acos())
}

/// α ↔ z change of label via V(−α, 0) = V(−φ, √z):
/// α(z) = ½·arccos(cos 2φ − z) for z ∈ [0, z*).
pub fn alpha_from_z(z: f64, phi: f64) -> Result<f64> {
    if !(0.0 < phi && phi < FRAC_PI_2) {
        return Err(Error::domain(format!(
            "alpha_from_z needs phi in (0,π/2), got {phi}"
        )));
    }
    // The window is [0, z*); guard through the arccos argument itself so the
    // boundary test stays consistent with the α actually computed.
    let arg = (2.0 * phi).cos() - z;
    if !(z >= 0.0) || arg <= -1.0 {
        return Err(Error::domain(format!(
            "alpha_from_z needs z in [0, z*={}), got {z}",
            1.0 + (2.0 * phi).cos()
        )));
    }
    Ok(0.5 * arg.acos())
}

/// Inverse of [`alpha_from_z`]: z(α) = cos 2φ − cos 2α for α ∈ [φ, π/2).
pub fn z_from_alpha(alpha: f64, phi: f64) -> Result<f64> {
    if !(0.0 < phi && phi < FRAC_PI_2) || !(phi - 4.0 * f64::EPSILON..FRAC_PI_2).contains(&alpha) {
        return Err(Error::domain(format!(
            "z_from_alpha needs phi <= alpha < π/2, got alpha={alpha}, phi={phi}"
        )));
    }
    Ok(((2.0 * phi).cos() - (2.0 * alpha).cos()).max(0.0))
}

// ---------------------------------------------------------------------------
// Branch families
// ---------------------------------------------------------------------------

/// Existence window in z of `branch` for the given configuration.
pub fn branch_domain(branch: BranchId, cfg: &BoundaryConfig) -> ZDomain {
    let branch = branch.normalized();
    let pstar2 = cfg.phi_star * cfg.phi_star;
    match branch.family {
        Family::I => {
            if branch.winding == 0 {
                ZDomain::new(0.0, pstar2, true, true)
            } else {
                ZDomain::new(0.0, cfg.z_star, true, true)
            }
        }
        Family::A | Family::C => ZDomain::new(0.0, cfg.z_star, true, true),
        Family::B => ZDomain::new(0.0, 2.0, true, false),
        Family::D | Family::Dprime | Family::Bprime => ZDomain::new(cfg.z_star, 2.0, true, false),
    }
}

fn domain_check(branch: BranchId, z: f64, cfg: &BoundaryConfig) -> Result<()> {
    let dom = branch_domain(branch, cfg);
    if !dom.contains(z) {
        return Err(Error::domain(format!(
            "z = {z} outside the {branch} existence window {dom}"
        )));
    }
    Ok(())
}

/// Total time 2L of the `branch` solution at label z.
///
/// Dispatch: T_I = T₁(·,φ) − T₁(·,x̄*), T_B = T₁(·,φ) + T₁(·,x̄*),
/// T_A = 2T − T_B, T_C = 2T − T_I; winding k around the origin adds 4kT.
/// The sign of the T_I part flips automatically once the orbit encloses
/// P* = (−φ, φ*) (z > (φ*)²), which reproduces the inside-net time for the
/// I_k families. Above the homoclinic, B continues through the cylinder
/// maps: T_{D_k} = 2kT₁(·,π/2) + T_B and T_{D_k′} = 2(k+1)T₁(·,π/2) + T_I.
pub fn branch_time(branch: BranchId, z: f64, cfg: &BoundaryConfig) -> Result<f64> {
    domain_check(branch, z, cfg)?;
    let branch = branch.normalized();
    let phi = cfg.phi;
    let k = f64::from(branch.winding);
    let xs = x_bar_star(z)?;

    let below = |family: Family| -> Result<f64> {
        let alpha = alpha_from_z(z, phi)?;
        // Within ~1e-12 of the homoclinic the elliptic modulus sin α rounds
        // into 1; the singular z-form quadrature takes over there.
        let elliptic_ok = alpha.sin() < 1.0 - 1e-12;
        let (t1_phi, t1_xs) = if elliptic_ok {
            (time_t1(alpha, phi)?, time_t1(alpha, xs)?)
        } else {
            (time_t1_z(z, phi, phi)?, time_t1_z(z, phi, xs)?)
        };
        let quarter = || -> Result<f64> {
            if elliptic_ok {
                time_t(alpha)
            } else {
                Ok(quad::power_integral(z, phi, alpha, Power::Half)?.value)
            }
        };
        let base = match family {
            Family::I => t1_phi - t1_xs,
            Family::B => t1_phi + t1_xs,
            Family::A => 2.0 * quarter()? - (t1_phi + t1_xs),
            Family::C => 2.0 * quarter()? - (t1_phi - t1_xs),
            _ => unreachable!(),
        };
        if branch.winding == 0 {
            Ok(base)
        } else {
            Ok(4.0 * k * quarter()? + base)
        }
    };

    match branch.family {
        Family::I => {
            if z < cfg.z_star {
                below(Family::I)
            } else {
                // φ > π/4 only: the I branch continues above the homoclinic
                // (its window reaches (φ*)² > z*); the winding families do
                // not, their domain caps at z*.
                Ok(time_t1_z(z, phi, phi)? - time_t1_z(z, phi, xs)?)
            }
        }
        Family::A | Family::C => below(branch.family),
        Family::B => {
            if z < cfg.z_star {
                below(Family::B)
            } else {
                let tb = time_t1_z(z, phi, phi)? + time_t1_z(z, phi, xs)?;
                if branch.winding == 0 {
                    Ok(tb)
                } else {
                    Ok(2.0 * k * time_t1_z(z, phi, FRAC_PI_2)? + tb)
                }
            }
        }
        Family::D => {
            let tb = time_t1_z(z, phi, phi)? + time_t1_z(z, phi, xs)?;
            Ok(2.0 * k * time_t1_z(z, phi, FRAC_PI_2)? + tb)
        }
        Family::Dprime => {
            let ti = time_t1_z(z, phi, phi)? - time_t1_z(z, phi, xs)?;
            Ok(2.0 * (k + 1.0) * time_t1_z(z, phi, FRAC_PI_2)? + ti)
        }
        Family::Bprime => unreachable!("normalized away"),
    }
}

// ---------------------------------------------------------------------------
// Analytic derivatives
// ---------------------------------------------------------------------------

/// Window on which the raw z-derivatives are exposed; outside it the
/// divergent boundary terms drown everything and callers should use the
/// asymptotic forms instead.
const DERIV_EDGE: f64 = 1e-12;

fn deriv_window_check(z: f64, name: &str) -> Result<()> {
    if !(DERIV_EDGE..=2.0 - DERIV_EDGE).contains(&z) {
        return Err(Error::domain(format!(
            "{name} is exposed for z in [1e-12, 2-1e-12], got {z}"
        )));
    }
    Ok(())
}

fn phi_check(phi: f64, name: &str) -> Result<()> {
    if !(0.0 < phi && phi < FRAC_PI_2) {
        return Err(Error::domain(format!(
            "{name} needs phi in (0,π/2), got {phi}"
        )));
    }
    Ok(())
}

/// The boundary term z^{−1/2}(2−z)^{−1/2}(1 − cos 2φ)^{−1/2}.
fn boundary_term(z: f64, phi: f64) -> f64 {
    1.0 / ((z * (2.0 - z)).sqrt() * SQRT_2 * phi.sin())
}

/// ∂T_B/∂z = ½·[−J(φ) − J(x̄*) + z^{−1/2}(2−z)^{−1/2}(1−cos 2φ)^{−1/2}]
/// with J(ν) = ∫₀^ν (z − cos 2φ + cos 2x)^{−3/2} dx.
pub fn dtb_dz(z: f64, phi: f64) -> Result<f64> {
    phi_check(phi, "dtb_dz")?;
    deriv_window_check(z, "dtb_dz")?;
    let j_phi = quad::power_integral(z, phi, phi, Power::ThreeHalves)?.value;
    let j_xs = quad::power_integral(z, phi, x_bar_star(z)?, Power::ThreeHalves)?.value;
    Ok(0.5 * (-j_phi - j_xs + boundary_term(z, phi)))
}

/// ∂T_I/∂z = ½·[J(x̄*) − J(φ) − z^{−1/2}(2−z)^{−1/2}(1−cos 2φ)^{−1/2}].
fn dti_dz(z: f64, phi: f64) -> Result<f64> {
    phi_check(phi, "dti_dz")?;
    deriv_window_check(z, "dti_dz")?;
    let j_phi = quad::power_integral(z, phi, phi, Power::ThreeHalves)?.value;
    let j_xs = quad::power_integral(z, phi, x_bar_star(z)?, Power::ThreeHalves)?.value;
    Ok(0.5 * (j_xs - j_phi - boundary_term(z, phi)))
}

/// ∂²T_B/∂z² = ¼·[3J₅(φ) + 3J₅(x̄*) + z^{−3/2}(2−z)^{−3/2}(1−cos 2φ)^{−3/2}·g(z,φ)]
/// with J₅(ν) = ∫₀^ν (z − cos 2φ + cos 2x)^{−5/2} dx.
pub fn d2tb_dz2(z: f64, phi: f64) -> Result<f64> {
    phi_check(phi, "d2tb_dz2")?;
    deriv_window_check(z, "d2tb_dz2")?;
    let j_phi = quad::power_integral(z, phi, phi, Power::FiveHalves)?.value;
    let j_xs = quad::power_integral(z, phi, x_bar_star(z)?, Power::FiveHalves)?.value;
    let b = boundary_term(z, phi);
    Ok(0.25 * (3.0 * (j_phi + j_xs) + b * b * b * g_fn(z, phi)))
}

/// g(z, φ) = z² − (2 cos 2φ)·z − 2(1 − cos 2φ): the polynomial deciding the
/// sign of the boundary term of ∂²T_B/∂z².
pub fn g_fn(z: f64, phi: f64) -> f64 {
    let s = phi.sin();
    z * z - 2.0 * z * (2.0 * phi).cos() - 4.0 * s * s
}

/// The convexity multiplier k(z, φ) = −z^{−1}(2−z)^{−1}(1−cos 2φ)^{−1}·g(z,φ)
/// = (1 − cos 2φ)^{−1} − 2(z−1)/(z(2−z)), chosen so that the boundary terms
/// of 4T_B″ + 2kT_B′ cancel.
pub fn k_fn(z: f64, phi: f64) -> Result<f64> {
    phi_check(phi, "k_fn")?;
    if !(0.0 < z && z < 2.0) {
        return Err(Error::domain(format!("k_fn needs z in (0,2), got {z}")));
    }
    let s = phi.sin();
    Ok(-g_fn(z, phi) / (z * (2.0 - z) * 2.0 * s * s))
}

/// The integrand denominator h(z, φ, x) = z − cos 2φ + cos 2x.
pub fn h_fn(z: f64, phi: f64, x: f64) -> f64 {
    z - (2.0 * phi).cos() + (2.0 * x).cos()
}

/// Smoller's convexity functional in its boundary-term-free integral form:
/// Φ(z, φ) = (∫₀^φ + ∫₀^{x̄*(z)}) h^{−5/2}·(3 − k·h) dx
///         = 4·∂²T_B/∂z² + 2·k(z,φ)·∂T_B/∂z.
pub fn phi_functional(z: f64, phi: f64) -> Result<f64> {
    phi_check(phi, "phi_functional")?;
    if !(0.0 < z && z < 2.0) {
        return Err(Error::domain(format!(
            "phi_functional needs z in (0,2), got {z}"
        )));
    }
    let kk = k_fn(z, phi)?;
    let weight = move |d: f64| {
        let s = d.sqrt();
        (3.0 - kk * d) / (d * d * s)
    };
    let i1 = quad::kernel_integral(z, phi, phi, weight)?.value;
    let i2 = quad::kernel_integral(z, phi, x_bar_star(z)?, weight)?.value;
    Ok(i1 + i2)
}

/// Analytic z-derivative of the D_k / D_k′ branch times on (z*, 2):
///
/// ∂T_{D_k}/∂z  = −k·J(π/2) − ½J(φ) − ½J(x̄*) + ½·bdry
/// ∂T_{D_k′}/∂z = −(k+½)·J(π/2) − ½J(φ) − ½∫_{x̄*}^{π/2} J-kernel − ½·bdry
///
/// with J(ν) = ∫₀^ν (z − cos 2φ + cos 2x)^{−3/2} dx and
/// bdry = z^{−1/2}(2−z)^{−1/2}(1−cos 2φ)^{−1/2}. The primed derivative is
/// negative on the whole window; the unprimed one diverges to −∞ at z* and
/// to +∞ at 2.
pub fn dtdk_dz(z: f64, phi: f64, winding: u32, primed: bool) -> Result<f64> {
    phi_check(phi, "dtdk_dz")?;
    let z_star = 1.0 + (2.0 * phi).cos();
    if !(z > z_star && z < 2.0) {
        return Err(Error::domain(format!(
            "dtdk_dz needs z in (z*={z_star}, 2), got {z}"
        )));
    }
    let k = f64::from(winding);
    let j_half = quad::power_integral(z, phi, FRAC_PI_2, Power::ThreeHalves)?.value;
    let j_phi = quad::power_integral(z, phi, phi, Power::ThreeHalves)?.value;
    let j_xs = quad::power_integral(z, phi, x_bar_star(z)?, Power::ThreeHalves)?.value;
    let b = boundary_term(z, phi);
    if primed {
        Ok(-(k + 0.5) * j_half - 0.5 * j_phi - 0.5 * (j_half - j_xs) - 0.5 * b)
    } else {
        Ok(-k * j_half - 0.5 * j_phi - 0.5 * j_xs + 0.5 * b)
    }
}

/// d/dz of the quarter period T(α(z)) below the homoclinic:
/// dT/dz = K′(sin α) / (4√2·sin α) with K′(k) = (E − (1−k²)K)/(k(1−k²)).
pub fn quarter_period_dz(z: f64, phi: f64) -> Result<f64> {
    let alpha = alpha_from_z(z, phi)?;
    let s = alpha.sin();
    let c = alpha.cos();
    let kk = quad::complete_elliptic_k(s)?;
    let ee = quad::complete_elliptic_e(s)?;
    let dk = (ee - c * c * kk) / (s * c * c);
    Ok(dk / (4.0 * SQRT_2 * s))
}

/// Analytic z-derivative of [`branch_time`] on the interior of the branch
/// domain (away from z*, where winding families diverge).
pub fn branch_time_derivative(branch: BranchId, z: f64, cfg: &BoundaryConfig) -> Result<f64> {
    domain_check(branch, z, cfg)?;
    let branch = branch.normalized();
    let phi = cfg.phi;
    let k = f64::from(branch.winding);
    let wind = |base: Result<f64>| -> Result<f64> {
        if branch.winding == 0 {
            base
        } else {
            Ok(4.0 * k * quarter_period_dz(z, phi)? + base?)
        }
    };
    match branch.family {
        Family::I => wind(dti_dz(z, phi)),
        Family::A => Ok((4.0 * k + 2.0) * quarter_period_dz(z, phi)? - dtb_dz(z, phi)?),
        Family::C => Ok((4.0 * k + 2.0) * quarter_period_dz(z, phi)? - dti_dz(z, phi)?),
        Family::B => {
            if z < cfg.z_star {
                wind(dtb_dz(z, phi))
            } else if branch.winding == 0 {
                dtb_dz(z, phi)
            } else {
                dtdk_dz(z, phi, branch.winding, false)
            }
        }
        Family::D => dtdk_dz(z, phi, branch.winding, false),
        Family::Dprime => dtdk_dz(z, phi, branch.winding, true),
        Family::Bprime => unreachable!("normalized away"),
    }
}
