//! Independent ODE oracle: direct integration of the phase flow
//! `x' = y, y' = −sin 2x` on the cylinder x ∈ [−π/2, π/2), with
//! first-integral monitoring and winding bookkeeping.
//!
//! Every time-map value can be certified here: start at (−φ, ±√z),
//! integrate for the claimed branch time, and check that the trajectory
//! lands on y = φ* with the winding count the family prescribes.

use crate::error::{Error, Result};
use crate::maps::{branch_time, BoundaryConfig, BranchId, Family};
use std::f64::consts::{FRAC_PI_2, PI, SQRT_2};

/// A point of the cylindrical phase space.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct PhasePoint {
    /// Angle, wrapped to [−π/2, π/2) with the endpoints identified.
    pub x: f64,
    /// Angular velocity.
    pub y: f64,
}

impl PhasePoint {
    pub fn new(x: f64, y: f64) -> Self {
        PhasePoint { x, y }
    }

    /// First integral V(x, y) = y² − cos 2x; exactly conserved by the flow
    /// and by the cylinder wrap.
    pub fn first_integral(&self) -> f64 {
        self.y * self.y - (2.0 * self.x).cos()
    }

    /// Distance on the cylinder (x identified mod π).
    pub fn cylinder_distance(&self, other: &PhasePoint) -> f64 {
        let mut dx = (self.x - other.x).rem_euclid(PI);
        if dx > FRAC_PI_2 {
            dx = PI - dx;
        }
        dx.hypot(self.y - other.y)
    }
}

/// Summary of one integration, as consumed by the branch verifier.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct ShootResult {
    pub terminal: PhasePoint,
    pub duration: f64,
    /// max |V(t) − V(0)| over accepted steps.
    pub v_drift: f64,
    /// |y(end) − φ*|; NaN when no Neumann target was supplied
    /// (bare [`integrate`] calls).
    pub y_residual: f64,
    /// Count of x = 0 transversals with y > 0: the winding diagnostic.
    pub crossings: i32,
}

/// Dense record of one trajectory.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<PhasePoint>,
    pub v_drift: f64,
    /// x = 0 transversals with y > 0.
    pub upward_crossings: i32,
    /// Sign changes of y (the orbit touching the x-axis).
    pub y_sign_changes: u32,
    /// Cylinder wraps applied (±π/2 passages).
    pub wraps: i32,
}

impl Trajectory {
    pub fn terminal(&self) -> PhasePoint {
        *self.states.last().expect("trajectory is never empty")
    }

    pub fn duration(&self) -> f64 {
        self.times.last().unwrap() - self.times.first().unwrap()
    }

    fn summary(&self, y_target: Option<f64>) -> ShootResult {
        let terminal = self.terminal();
        ShootResult {
            terminal,
            duration: self.duration(),
            v_drift: self.v_drift,
            y_residual: y_target.map_or(f64::NAN, |t| (terminal.y - t).abs()),
            crossings: self.upward_crossings,
        }
    }
}

#[inline]
fn rhs(x: f64, y: f64) -> (f64, f64) {
    (y, -(2.0 * x).sin())
}

/// Dormand-Prince 5(4) coefficients.
const A: [[f64; 6]; 6] = [
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
/// Error weights b5 − b4.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

struct Dopri5 {
    x: f64,
    y: f64,
    t: f64,
    fx: f64,
    fy: f64,
    h: f64,
    tol: f64,
    err_prev: f64,
}

struct StepOutcome {
    x: f64,
    y: f64,
    /// Derivative at the step end (FSAL stage).
    fx: f64,
    fy: f64,
}

impl Dopri5 {
    fn new(x: f64, y: f64, tol: f64) -> Self {
        let (fx, fy) = rhs(x, y);
        Dopri5 {
            x,
            y,
            t: 0.0,
            fx,
            fy,
            h: 0.01,
            tol,
            err_prev: 1.0,
        }
    }

    /// One attempted step of size h; returns the candidate state and the
    /// normalised error (error per unit time over tolerance).
    fn attempt(&self, h: f64) -> (StepOutcome, f64) {
        let mut kx = [0.0f64; 7];
        let mut ky = [0.0f64; 7];
        kx[0] = self.fx;
        ky[0] = self.fy;
        for i in 0..6 {
            let mut sx = 0.0;
            let mut sy = 0.0;
            for j in 0..=i {
                sx += A[i][j] * kx[j];
                sy += A[i][j] * ky[j];
            }
            let (fx, fy) = rhs(self.x + h * sx, self.y + h * sy);
            kx[i + 1] = fx;
            ky[i + 1] = fy;
        }
        // 5th-order solution is stage row 6 of A (FSAL): kx[6]/ky[6] were
        // computed at it, so the new state is the argument of that stage.
        let mut sx = 0.0;
        let mut sy = 0.0;
        let mut ex = 0.0;
        let mut ey = 0.0;
        for j in 0..6 {
            sx += A[5][j] * kx[j];
            sy += A[5][j] * ky[j];
        }
        for j in 0..7 {
            ex += E[j] * kx[j];
            ey += E[j] * ky[j];
        }
        let xn = self.x + h * sx;
        let yn = self.y + h * sy;
        let scale_x = 1.0 + self.x.abs().max(xn.abs());
        let scale_y = 1.0 + self.y.abs().max(yn.abs());
        let err = ((h * ex / scale_x).powi(2) + (h * ey / scale_y).powi(2)).sqrt() / SQRT_2;
        // error per unit time, relative to tolerance
        let err_norm = err / (h.abs() * self.tol);
        (
            StepOutcome {
                x: xn,
                y: yn,
                fx: kx[6],
                fy: ky[6],
            },
            err_norm,
        )
    }

    /// Advance one accepted step, not beyond t_end. Returns false once t_end
    /// is reached.
    fn step_to(&mut self, t_end: f64) -> Result<bool> {
        loop {
            let remaining = t_end - self.t;
            if remaining <= 0.0 {
                return Ok(false);
            }
            let clamped = self.h.min(remaining);
            let (out, err) = self.attempt(clamped);
            if err <= 1.0 {
                self.t += clamped;
                self.x = out.x;
                self.y = out.y;
                self.fx = out.fx;
                self.fy = out.fy;
                // PI controller (error-per-unit-step exponents for order 5)
                let fac = 0.9 * err.max(1e-10).powf(-0.2) * self.err_prev.powf(0.08);
                self.err_prev = err.max(1e-10);
                self.h = (clamped * fac.clamp(0.2, 5.0)).min(0.2);
                return Ok(self.t < t_end);
            }
            let fac = 0.9 * err.powf(-0.2);
            self.h = clamped * fac.clamp(0.1, 0.9);
            if self.h < 1e-14 {
                return Err(Error::Stiffness(self.t));
            }
        }
    }
}

fn check_tol(tol: f64) -> Result<()> {
    if !(tol > 1e-14 && tol < 1e-3) {
        return Err(Error::domain(format!(
            "integration tol must lie in (1e-14, 1e-3), got {tol}"
        )));
    }
    Ok(())
}

/// Integrate the pendulum flow from `initial` for `duration`, monitoring the
/// first integral at every accepted step and wrapping x across ±π/2 with
/// crossing bookkeeping. Local error is controlled to `tol` per unit time
/// (with an internal safety factor, so realised drift is typically much
/// smaller).
pub fn integrate(
    initial: PhasePoint,
    duration: f64,
    tol: f64,
) -> Result<(Trajectory, ShootResult)> {
    check_tol(tol)?;
    if !(duration > 0.0) {
        return Err(Error::domain(format!(
            "duration must be positive, got {duration}"
        )));
    }
    let traj = run(initial, duration, tol)?;
    let summary = traj.summary(None);
    Ok((traj, summary))
}

fn run(initial: PhasePoint, duration: f64, tol: f64) -> Result<Trajectory> {
    // Internal safety: control tighter than asked so the contract holds with
    // slack even over long integrations.
    let mut solver = Dopri5::new(initial.x, initial.y, 0.25 * tol);
    let v0 = initial.first_integral();
    let mut traj = Trajectory {
        times: vec![0.0],
        states: vec![initial],
        v_drift: 0.0,
        upward_crossings: 0,
        y_sign_changes: 0,
        wraps: 0,
    };
    let max_steps = 20_000_000usize;
    for _ in 0..max_steps {
        let x_prev = solver.x;
        let y_prev = solver.y;
        let more = solver.step_to(duration)?;
        // crossing bookkeeping before wrapping: a step is far too short to
        // span both x = 0 and x = ±π/2
        if x_prev < 0.0 && solver.x >= 0.0 && solver.y > 0.0 {
            traj.upward_crossings += 1;
        }
        if y_prev != 0.0 && solver.y != 0.0 && y_prev.signum() != solver.y.signum() {
            traj.y_sign_changes += 1;
        }
        if solver.x >= FRAC_PI_2 {
            solver.x -= PI;
            traj.wraps += 1;
        } else if solver.x < -FRAC_PI_2 {
            solver.x += PI;
            traj.wraps -= 1;
        }
        let state = PhasePoint::new(solver.x, solver.y);
        traj.v_drift = traj.v_drift.max((state.first_integral() - v0).abs());
        traj.times.push(solver.t);
        traj.states.push(state);
        if !more {
            return Ok(traj);
        }
    }
    Err(Error::Stiffness(solver.t))
}

/// Integrate until the first sign change of `event`, refined by bisection to
/// 1e−12 in time. Returns the crossing time and state, or None if no
/// crossing occurs before `t_max`. Event detection looks at accepted steps,
/// so it assumes the event function does not complete a full oscillation
/// within one step (true for the phase-plane sections used here).
pub fn integrate_until<E>(
    initial: PhasePoint,
    tol: f64,
    t_max: f64,
    event: E,
) -> Result<Option<(f64, PhasePoint)>>
where
    E: Fn(f64, PhasePoint) -> f64,
{
    check_tol(tol)?;
    let mut solver = Dopri5::new(initial.x, initial.y, 0.25 * tol);
    let mut g_prev = event(0.0, initial);
    let mut prev = (0.0f64, initial);
    loop {
        let more = solver.step_to(t_max)?;
        let mut x = solver.x;
        let mut wrapped = false;
        if x >= FRAC_PI_2 {
            x -= PI;
            wrapped = true;
        } else if x < -FRAC_PI_2 {
            x += PI;
            wrapped = true;
        }
        solver.x = x;
        let state = PhasePoint::new(solver.x, solver.y);
        let g = event(solver.t, state);
        if !wrapped && g_prev != 0.0 && g.signum() != g_prev.signum() {
            // refine inside [prev.0, solver.t] by bisection, re-integrating
            // the bracket start each probe
            let (mut ta, mut tb) = (prev.0, solver.t);
            let (mut pa, pb) = (prev.1, state);
            let _ = pb;
            let mut ga = g_prev;
            for _ in 0..64 {
                if tb - ta < 1e-12 {
                    break;
                }
                let tm = 0.5 * (ta + tb);
                let pm = if tm > ta {
                    let sub = run(pa, tm - ta, tol)?;
                    sub.terminal()
                } else {
                    pa
                };
                let gm = event(tm, pm);
                if gm == 0.0 || gm.signum() == ga.signum() {
                    ta = tm;
                    pa = pm;
                    ga = gm;
                } else {
                    tb = tm;
                }
            }
            let hit = run(pa, (0.5 * (ta + tb) - ta).max(1e-15), tol)?.terminal();
            return Ok(Some((0.5 * (ta + tb), hit)));
        }
        g_prev = g;
        prev = (solver.t, state);
        if !more {
            return Ok(None);
        }
    }
}

/// Winding diagnostic each family must produce: the number of x = 0
/// transversals with y > 0 along the branch orbit.
pub fn expected_crossings(branch: BranchId) -> i32 {
    let k = branch.winding as i32;
    match branch.family {
        Family::I | Family::A => k,
        Family::B | Family::C | Family::D => k + 1,
        Family::Dprime | Family::Bprime => k + 1,
    }
}

/// Certify one branch point by direct integration: start at (−φ, s·√z)
/// (s = −1 for the A and C families, +1 otherwise), integrate for
/// `branch_time(branch, z)`, and report the Neumann residual |y(end) − φ*|,
/// the first-integral drift and the winding diagnostic. A pass is
/// y_residual < 1e−6 with crossings equal to [`expected_crossings`].
pub fn verify_branch_point(
    branch: BranchId,
    z: f64,
    cfg: &BoundaryConfig,
    tol: f64,
) -> Result<ShootResult> {
    let duration = branch_time(branch, z, cfg)?;
    let s = if branch.starts_downward() { -1.0 } else { 1.0 };
    let initial = PhasePoint::new(-cfg.phi, s * z.sqrt());
    let traj = run(initial, duration, tol)?;
    Ok(traj.summary(Some(cfg.phi_star)))
}
