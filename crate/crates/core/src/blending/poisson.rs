//! Gradient-domain pasting.
//!
//! For every unknown pixel `p` of the pasted region the discrete Poisson
//! equation
//!
//! ```text
//! 4 f_p - Σ_{q ∈ N_p ∩ U} f_q = Σ_{q ∈ N_p \ U} fixed_q + Σ_{q ∈ N_p} (src_p - src_q)
//! ```
//!
//! is solved per channel in `[0, 1]` intensity units, where `N_p` is the
//! 4-neighborhood and `U` the unknown set. Unknowns are mask pixels whose four
//! neighbors lie inside both the cutout and the canvas, excluding the canvas
//! edge. Fixed values are the current composite, except mask pixels on the
//! canvas edge, which take the source color.

use crate::imgcore::{Cutout, Raster};

use super::composite::{check_overlap, paste_direct_in_place};
use super::BlendError;

const NONE: u32 = u32::MAX;

/// The sparse system for one paste: matrix structure plus per-channel data.
#[derive(Debug, Clone)]
pub struct PoissonRegion {
    /// Canvas coordinates of the unknowns, in row-major scan order.
    pub unknowns: Vec<(u32, u32)>,
    /// Indices of unknown 4-neighbors (left, right, up, down) or `u32::MAX`.
    pub neighbors: Vec<[u32; 4]>,
    pub rhs: [Vec<f64>; 3],
    /// Current composite at the unknowns, used as the starting iterate.
    pub initial: [Vec<f64>; 3],
    /// Mask pixels on the canvas edge, written with the source color.
    pub edge_pixels: Vec<((u32, u32), [u8; 3])>,
}

impl PoissonRegion {
    pub fn len(&self) -> usize {
        self.unknowns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.unknowns.is_empty()
    }

    /// `y = A x` with `A = 4I - adjacency(U)`.
    pub fn apply(&self, x: &[f64], y: &mut [f64]) {
        for (i, nb) in self.neighbors.iter().enumerate() {
            let mut acc = 4.0 * x[i];
            for &j in nb {
                if j != NONE {
                    acc -= x[j as usize];
                }
            }
            y[i] = acc;
        }
    }
}

/// Build the linear system for pasting `cutout` at `anchor` over `bg`.
///
/// Returns `None` when no mask pixel has its whole 4-neighborhood inside the
/// mask and the canvas; such thin shapes are pasted directly.
pub fn build_region(bg: &Raster, cutout: &Cutout, anchor: (i64, i64)) -> Option<PoissonRegion> {
    let (w, h) = cutout.dims();
    let (cw, ch) = (bg.width() as i64, bg.height() as i64);
    let to_canvas = |lx: u32, ly: u32| (anchor.0 + lx as i64, anchor.1 + ly as i64);
    let on_canvas = |(x, y): (i64, i64)| x >= 0 && y >= 0 && x < cw && y < ch;
    let on_edge = |(x, y): (i64, i64)| x == 0 || y == 0 || x == cw - 1 || y == ch - 1;
    let is_unknown = |lx: u32, ly: u32| {
        let c = to_canvas(lx, ly);
        cutout.is_foreground(lx, ly)
            && lx >= 1
            && ly >= 1
            && lx + 1 < w
            && ly + 1 < h
            && on_canvas(c)
            && !on_edge(c)
    };

    let mut index = vec![NONE; w as usize * h as usize];
    let mut unknowns = Vec::new();
    let mut has_core = false;
    for ly in 0..h {
        for lx in 0..w {
            if is_unknown(lx, ly) {
                index[(ly * w + lx) as usize] = unknowns.len() as u32;
                let (cx, cy) = to_canvas(lx, ly);
                unknowns.push((cx as u32, cy as u32));
                has_core |= cutout.is_foreground(lx - 1, ly)
                    && cutout.is_foreground(lx + 1, ly)
                    && cutout.is_foreground(lx, ly - 1)
                    && cutout.is_foreground(lx, ly + 1);
            }
        }
    }
    if !has_core {
        return None;
    }

    let src = |lx: u32, ly: u32, c: usize| cutout.color().pixel(lx, ly)[c] as f64 / 255.0;
    let mut neighbors = Vec::with_capacity(unknowns.len());
    let mut rhs = [vec![0.0; unknowns.len()], vec![0.0; unknowns.len()], vec![0.0; unknowns.len()]];
    let mut initial = rhs.clone();
    for (i, &(cx, cy)) in unknowns.iter().enumerate() {
        let lx = (cx as i64 - anchor.0) as u32;
        let ly = (cy as i64 - anchor.1) as u32;
        let nbrs = [(lx - 1, ly), (lx + 1, ly), (lx, ly - 1), (lx, ly + 1)];
        let mut slots = [NONE; 4];
        for (k, &(qx, qy)) in nbrs.iter().enumerate() {
            let j = index[(qy * w + qx) as usize];
            slots[k] = j;
            let qc = to_canvas(qx, qy);
            for c in 0..3 {
                rhs[c][i] += src(lx, ly, c) - src(qx, qy, c);
                if j == NONE {
                    rhs[c][i] += if cutout.is_foreground(qx, qy) && on_edge(qc) {
                        src(qx, qy, c)
                    } else {
                        bg.pixel(qc.0 as u32, qc.1 as u32)[c] as f64 / 255.0
                    };
                }
            }
        }
        neighbors.push(slots);
        for c in 0..3 {
            initial[c][i] = bg.pixel(cx, cy)[c] as f64 / 255.0;
        }
    }

    let mut edge_pixels = Vec::new();
    for ly in 0..h {
        for lx in 0..w {
            let c = to_canvas(lx, ly);
            if cutout.is_foreground(lx, ly) && on_canvas(c) && on_edge(c) {
                let p = cutout.color().pixel(lx, ly);
                edge_pixels.push(((c.0 as u32, c.1 as u32), [p[0], p[1], p[2]]));
            }
        }
    }
    Some(PoissonRegion {
        unknowns,
        neighbors,
        rhs,
        initial,
        edge_pixels,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveStats {
    pub iterations: u32,
    /// `‖b − A x‖₂ / ‖b‖₂` of the returned iterate, recomputed from the matrix.
    pub relative_residual: f64,
    pub converged: bool,
}

/// Jacobi-preconditioned conjugate gradient on a [`PoissonRegion`] system,
/// with minimal-residual smoothing of the returned iterate.
///
/// Plain CG residuals can grow between iterations. The smoothed sequence
/// `y_k = y_{k-1} + η_k (x_k − y_{k-1})`, with `η_k` minimizing the norm of
/// the matching residual `s_k`, satisfies `‖s_k‖ ≤ min(‖s_{k-1}‖, ‖r_k‖)`,
/// so the reported residual never increases and convergence is never later
/// than plain CG. Reductions run sequentially in index order so results are
/// bitwise reproducible. When `history` is given, the smoothed relative
/// residual of every iterate (starting with `x0`) is appended to it.
pub fn conjugate_gradient(
    region: &PoissonRegion,
    b: &[f64],
    x0: &[f64],
    tolerance: f64,
    max_iters: u32,
    mut history: Option<&mut Vec<f64>>,
) -> Result<(Vec<f64>, SolveStats), BlendError> {
    let n = b.len();
    let dot = |u: &[f64], v: &[f64]| u.iter().zip(v).fold(0.0, |acc, (a, b)| acc + a * b);
    // the diagonal is 4 everywhere
    let inv_diag = 0.25;

    let mut x = x0.to_vec();
    let mut ax = vec![0.0; n];
    region.apply(&x, &mut ax);
    let mut r: Vec<f64> = b.iter().zip(&ax).map(|(b, a)| b - a).collect();
    let b_norm = dot(b, b).sqrt();
    let scale = if b_norm > 0.0 { b_norm } else { 1.0 };
    let mut z: Vec<f64> = r.iter().map(|v| v * inv_diag).collect();
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = vec![0.0; n];

    let mut y = x.clone();
    let mut s = r.clone();
    let mut diff = vec![0.0; n];

    let mut rel = dot(&s, &s).sqrt() / scale;
    if let Some(h) = history.as_deref_mut() {
        h.push(rel);
    }
    let mut iterations = 0;
    while rel > tolerance && iterations < max_iters {
        region.apply(&p, &mut ap);
        let pap = dot(&p, &ap);
        if pap <= 0.0 || !pap.is_finite() {
            break;
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        iterations += 1;

        for i in 0..n {
            diff[i] = r[i] - s[i];
        }
        let dd = dot(&diff, &diff);
        if dd > 0.0 {
            let eta = -dot(&s, &diff) / dd;
            for i in 0..n {
                s[i] += eta * diff[i];
                y[i] += eta * (x[i] - y[i]);
            }
        }
        rel = dot(&s, &s).sqrt() / scale;
        if !rel.is_finite() {
            return Err(BlendError::SolverDiverged);
        }
        if let Some(h) = history.as_deref_mut() {
            h.push(rel);
        }

        for i in 0..n {
            z[i] = r[i] * inv_diag;
        }
        let rz_next = dot(&r, &z);
        let beta = rz_next / rz;
        rz = rz_next;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }

    region.apply(&y, &mut ax);
    let true_r: f64 = b.iter().zip(&ax).map(|(b, a)| (b - a) * (b - a)).sum::<f64>().sqrt() / scale;
    if !true_r.is_finite() || y.iter().any(|v| !v.is_finite()) {
        return Err(BlendError::SolverDiverged);
    }
    Ok((
        y,
        SolveStats {
            iterations,
            relative_residual: true_r,
            converged: rel <= tolerance,
        },
    ))
}

#[derive(Debug, Clone)]
pub struct PoissonSolution {
    pub region: PoissonRegion,
    /// Per-channel solution at the unknowns, in `[0, 1]` units (unclamped).
    pub values: [Vec<f64>; 3],
    pub stats: [SolveStats; 3],
}

/// Assemble and solve the three channel systems without writing pixels.
pub fn solve_poisson(
    bg: &Raster,
    cutout: &Cutout,
    anchor: (i64, i64),
    tolerance: f64,
    max_iters: u32,
) -> Result<Option<PoissonSolution>, BlendError> {
    if !(tolerance > 0.0) || max_iters == 0 {
        return Err(BlendError::BadMode(format!("poisson tolerance {tolerance}, max_iters {max_iters}")));
    }
    check_overlap(bg, cutout, anchor)?;
    let Some(region) = build_region(bg, cutout, anchor) else {
        return Ok(None);
    };
    let mut values: [Vec<f64>; 3] = Default::default();
    let mut stats = [SolveStats {
        iterations: 0,
        relative_residual: 0.0,
        converged: true,
    }; 3];
    for c in 0..3 {
        let (x, s) = conjugate_gradient(&region, &region.rhs[c], &region.initial[c], tolerance, max_iters, None)?;
        values[c] = x;
        stats[c] = s;
    }
    Ok(Some(PoissonSolution { region, values, stats }))
}

/// Outcome of one gradient-domain paste.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PoissonReport {
    pub unknowns: usize,
    pub iterations: u32,
    pub max_relative_residual: f64,
    pub unconverged: bool,
    /// The mask had no interior and was pasted directly.
    pub fell_back: bool,
}

pub fn paste_poisson(
    bg: &Raster,
    cutout: &Cutout,
    anchor: (i64, i64),
    tolerance: f64,
    max_iters: u32,
) -> Result<(Raster, PoissonReport), BlendError> {
    let mut out = bg.clone();
    let report = paste_poisson_in_place(&mut out, cutout, anchor, tolerance, max_iters)?;
    Ok((out, report))
}

pub(crate) fn paste_poisson_in_place(
    out: &mut Raster,
    cutout: &Cutout,
    anchor: (i64, i64),
    tolerance: f64,
    max_iters: u32,
) -> Result<PoissonReport, BlendError> {
    if out.channels() != 3 {
        return Err(BlendError::BadBackground(out.channels()));
    }
    let Some(sol) = solve_poisson(out, cutout, anchor, tolerance, max_iters)? else {
        paste_direct_in_place(out, cutout, anchor)?;
        return Ok(PoissonReport {
            fell_back: true,
            ..Default::default()
        });
    };
    for (i, &(x, y)) in sol.region.unknowns.iter().enumerate() {
        let px = out.pixel_mut(x, y);
        for c in 0..3 {
            px[c] = (sol.values[c][i] * 255.0).round().clamp(0.0, 255.0) as u8;
        }
    }
    for &((x, y), rgb) in &sol.region.edge_pixels {
        out.pixel_mut(x, y).copy_from_slice(&rgb);
    }
    let unconverged = sol.stats.iter().any(|s| !s.converged);
    if unconverged {
        log::warn!(
            "poisson solve stopped at {} iterations, residual {:.3e}",
            max_iters,
            sol.stats.iter().map(|s| s.relative_residual).fold(0.0, f64::max)
        );
    }
    Ok(PoissonReport {
        unknowns: sol.region.len(),
        iterations: sol.stats.iter().map(|s| s.iterations).sum(),
        max_relative_residual: sol.stats.iter().map(|s| s.relative_residual).fold(0.0, f64::max),
        unconverged,
        fell_back: false,
    })
}
