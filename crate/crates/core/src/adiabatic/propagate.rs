//! Velocity-Verlet propagation of a single (α, α') pair trajectory.

use crate::bath::PhasePoint;
use crate::error::{Error, Result};

use super::{AdiabaticFrame, FrameTracking, OpenChain};

/// Integration step and output grid. Output times are `k · stride · dt`
/// for `k = 0..=n_intervals`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    dt: f64,
    stride: usize,
    n_intervals: usize,
}

impl TimeGrid {
    pub fn new(dt: f64, t_max: f64, n_intervals: usize) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::param("dt", "must be finite and positive"));
        }
        if !(t_max > 0.0 && t_max.is_finite()) {
            return Err(Error::param("t_max", "must be finite and positive"));
        }
        if n_intervals == 0 {
            return Err(Error::param("output_points", "must be at least 1"));
        }
        let spacing = t_max / n_intervals as f64;
        let stride = (spacing / dt).round();
        if stride < 1.0 || (stride * dt - spacing).abs() > 1e-9 * spacing {
            return Err(Error::param(
                "dt",
                format!("must divide the output spacing {spacing}"),
            ));
        }
        Ok(Self {
            dt,
            stride: stride as usize,
            n_intervals,
        })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn stride(&self) -> usize {
        self.stride
    }

    pub fn n_outputs(&self) -> usize {
        self.n_intervals + 1
    }

    pub fn total_steps(&self) -> usize {
        self.stride * self.n_intervals
    }

    pub fn time(&self, output: usize) -> f64 {
        (output * self.stride) as f64 * self.dt
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.n_outputs()).map(|k| self.time(k)).collect()
    }
}

/// State of a pair trajectory at an output time.
#[derive(Debug, Clone, Copy)]
pub struct PairSnapshot<'a> {
    pub output: usize,
    pub time: f64,
    /// ∫₀ᵗ ω_{αα'} dτ
    pub phase: f64,
    pub frame: &'a AdiabaticFrame,
    pub point: &'a PhasePoint,
}

/// ½(⟨α|σz^(ks)|α⟩ + ⟨α'|σz^(ks)|α'⟩) per bath.
fn mean_spin_z(
    system: &OpenChain,
    frame: &AdiabaticFrame,
    alpha: usize,
    alpha_prime: usize,
    out: &mut [f64],
) {
    for (o, sz) in out.iter_mut().zip(system.chain().sigma_z()) {
        *o = 0.5
            * (frame.diagonal_expectation(alpha, sz) + frame.diagonal_expectation(alpha_prime, sz));
    }
}

/// p += kick · (−ω²R + c s) over every bath.
fn kick(system: &OpenChain, x: &mut PhasePoint, spin_z: &[f64], kick: f64) {
    let modes = system.modes();
    let n = modes.len();
    for (ks, &s) in spin_z.iter().enumerate() {
        let range = ks * n..(ks + 1) * n;
        for ((p, r), (w2, c)) in x.p[range.clone()]
            .iter_mut()
            .zip(&x.r[range])
            .zip(modes.omega_sq().iter().zip(modes.coupling()))
        {
            *p += kick * (c * s - w2 * r);
        }
    }
}

/// Kick by `kick`, drift by `dt`, and refresh the coupling sums in one pass.
fn kick_drift(
    system: &OpenChain,
    x: &mut PhasePoint,
    spin_z: &[f64],
    kick: f64,
    dt: f64,
    coupling_sums: &mut [f64],
) {
    let modes = system.modes();
    let n = modes.len();
    for ((ks, &s), b) in spin_z.iter().enumerate().zip(coupling_sums.iter_mut()) {
        let range = ks * n..(ks + 1) * n;
        let mut sum = 0.0;
        for ((p, r), (w2, c)) in x.p[range.clone()]
            .iter_mut()
            .zip(&mut x.r[range])
            .zip(modes.omega_sq().iter().zip(modes.coupling()))
        {
            *p += kick * (c * s - w2 * *r);
            *r += dt * *p;
            sum += c * *r;
        }
        *b = sum;
    }
}

/// Propagates X under ½(F^α + F^α') and accumulates the phase ∫ ω_{αα'} dτ
/// by the trapezoidal rule, calling `observe` at every output time
/// (including t = 0).
///
/// The initial frame is ordered against the Cartesian basis; later frames
/// follow `tracking`.
pub fn propagate_pair<F>(
    system: &OpenChain,
    x0: &PhasePoint,
    alpha: usize,
    alpha_prime: usize,
    grid: &TimeGrid,
    tracking: FrameTracking,
    mut observe: F,
) -> Result<()>
where
    F: FnMut(PairSnapshot<'_>),
{
    let dim = system.dim();
    if alpha >= dim || alpha_prime >= dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: alpha.max(alpha_prime) + 1,
        });
    }
    let mut x = x0.clone();
    let mut b = system.coupling_sums(&x)?;
    let mut frame = system.frame_at(&b, None)?;
    let mut spin_z = vec![0.0; system.n_baths()];
    mean_spin_z(system, &frame, alpha, alpha_prime, &mut spin_z);
    let diagonal = alpha == alpha_prime;
    let mut gap = if diagonal {
        0.0
    } else {
        frame.gap(alpha, alpha_prime)
    };
    let mut phase = 0.0;
    observe(PairSnapshot {
        output: 0,
        time: 0.0,
        phase,
        frame: &frame,
        point: &x,
    });

    let dt = grid.dt();
    let half = 0.5 * dt;
    // momenta lag half a step behind except right after an output
    let mut pending_kick = half;
    for step in 1..=grid.total_steps() {
        kick_drift(system, &mut x, &spin_z, pending_kick, dt, &mut b);
        if b.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteTrajectory {
                step,
                r_norm: x.r_norm(),
            });
        }
        let next = match tracking {
            FrameTracking::Cartesian => system.frame_at(&b, None),
            FrameTracking::Continuous => system.frame_at(&b, Some(&frame.vectors)),
        }
        .map_err(|_| Error::NonFiniteTrajectory {
            step,
            r_norm: x.r_norm(),
        })?;
        frame = next;
        mean_spin_z(system, &frame, alpha, alpha_prime, &mut spin_z);
        if !diagonal {
            let new_gap = frame.gap(alpha, alpha_prime);
            phase += half * (gap + new_gap);
            gap = new_gap;
        }
        if step % grid.stride() == 0 {
            kick(system, &mut x, &spin_z, half);
            if !x.is_finite() {
                return Err(Error::NonFiniteTrajectory {
                    step,
                    r_norm: x.r_norm(),
                });
            }
            observe(PairSnapshot {
                output: step / grid.stride(),
                time: step as f64 * dt,
                phase,
                frame: &frame,
                point: &x,
            });
            pending_kick = half;
        } else {
            pending_kick = dt;
        }
    }
    Ok(())
}

/// A recorded pair trajectory at the output times.
#[derive(Debug, Clone)]
pub struct PairTrajectory {
    pub alpha: usize,
    pub alpha_prime: usize,
    pub times: Vec<f64>,
    pub phases: Vec<f64>,
    pub points: Vec<PhasePoint>,
    pub frames: Vec<AdiabaticFrame>,
}

/// Like [`propagate_pair`] but records every snapshot.
pub fn trace_pair(
    system: &OpenChain,
    x0: &PhasePoint,
    alpha: usize,
    alpha_prime: usize,
    grid: &TimeGrid,
    tracking: FrameTracking,
) -> Result<PairTrajectory> {
    let mut traj = PairTrajectory {
        alpha,
        alpha_prime,
        times: Vec::with_capacity(grid.n_outputs()),
        phases: Vec::with_capacity(grid.n_outputs()),
        points: Vec::with_capacity(grid.n_outputs()),
        frames: Vec::with_capacity(grid.n_outputs()),
    };
    propagate_pair(system, x0, alpha, alpha_prime, grid, tracking, |snap| {
        traj.times.push(snap.time);
        traj.phases.push(snap.phase);
        traj.points.push(snap.point.clone());
        traj.frames.push(snap.frame.clone());
    })?;
    Ok(traj)
}
