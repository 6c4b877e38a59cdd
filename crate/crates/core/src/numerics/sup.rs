use serde::Serialize;

use super::NumericsError;

/// Number of uniformly spaced points of the coarsest level.
pub const GRID_SUP_INITIAL_POINTS: usize = 257;
/// Maximum number of dyadic refinement levels after the coarsest one.
pub const GRID_SUP_MAX_LEVELS: usize = 20;

const MAX_ACTIVE_CELLS: usize = 1 << 16;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridSupResult {
    pub sup_value: f64,
    pub arg: f64,
    pub grid_points: usize,
    pub refinement_levels: usize,
}

#[derive(Debug, Clone, Copy)]
struct Cell {
    x0: f64,
    f0: f64,
    x1: f64,
    f1: f64,
}

/// Supremum of `f` over `[lo, hi]` on an adaptively refined dyadic grid.
///
/// Level 0 is a uniform grid of [`GRID_SUP_INITIAL_POINTS`] points. Each
/// further level halves the spacing inside the cells that could still hold a
/// larger value (judged by a Lipschitz estimate taken from the grid itself).
/// Refinement stops once the sup moved by less than `tol` between levels and
/// a local model around the best point (a parabola, or a kink in a
/// neighbouring cell) predicts less than `tol` of further gain, or after [`GRID_SUP_MAX_LEVELS`] levels.
pub fn grid_sup<F>(f: F, lo: f64, hi: f64, tol: f64) -> Result<GridSupResult, NumericsError>
where
    F: Fn(f64) -> f64,
{
    if lo > hi || lo.is_nan() || hi.is_nan() {
        return Err(NumericsError::EmptyInterval { lo, hi });
    }
    if !(tol.is_finite() && tol > 0.0) {
        return Err(NumericsError::InvalidTolerance(tol));
    }
    let eval = |x: f64| -> Result<f64, NumericsError> {
        let v = f(x);
        if v.is_nan() {
            Err(NumericsError::NonFinite { at: x, value: v })
        } else {
            Ok(v)
        }
    };

    if lo == hi {
        return Ok(GridSupResult {
            sup_value: eval(lo)?,
            arg: lo,
            grid_points: 1,
            refinement_levels: 0,
        });
    }

    let n = GRID_SUP_INITIAL_POINTS - 1;
    let step = (hi - lo) / n as f64;
    let xs: Vec<f64> = (0..=n)
        .map(|i| if i == n { hi } else { lo + step * i as f64 })
        .collect();
    let mut fs = Vec::with_capacity(xs.len());
    for &x in &xs {
        fs.push(eval(x)?);
    }
    let mut grid_points = xs.len();
    let (mut best, mut arg) = (f64::NEG_INFINITY, lo);
    for (&x, &v) in xs.iter().zip(&fs) {
        if v > best {
            best = v;
            arg = x;
        }
    }

    let mut cells: Vec<Cell> = xs
        .windows(2)
        .zip(fs.windows(2))
        .map(|(x, v)| Cell {
            x0: x[0],
            f0: v[0],
            x1: x[1],
            f1: v[1],
        })
        .collect();
    let mut lipschitz = slope_bound(&cells);

    let mut levels = 0;
    while levels < GRID_SUP_MAX_LEVELS {
        let previous = best;
        // keep only cells that might still contain something above `best`
        cells.retain(|c| c.f0.max(c.f1) + lipschitz * 0.5 * (c.x1 - c.x0) >= best);
        if cells.len() > MAX_ACTIVE_CELLS {
            cells.sort_by(|a, b| b.f0.max(b.f1).total_cmp(&a.f0.max(a.f1)));
            cells.truncate(MAX_ACTIVE_CELLS);
        }
        let mut refined = Vec::with_capacity(2 * cells.len());
        for c in &cells {
            let xm = 0.5 * (c.x0 + c.x1);
            if xm <= c.x0 || xm >= c.x1 {
                continue;
            }
            let fm = eval(xm)?;
            grid_points += 1;
            if fm > best {
                best = fm;
                arg = xm;
            }
            refined.push(Cell {
                x0: c.x0,
                f0: c.f0,
                x1: xm,
                f1: fm,
            });
            refined.push(Cell {
                x0: xm,
                f0: fm,
                x1: c.x1,
                f1: c.f1,
            });
        }
        levels += 1;
        if refined.is_empty() {
            break;
        }
        lipschitz = lipschitz.max(slope_bound(&refined));
        cells = refined;

        let (gain, predicted) = local_gain(&cells, arg, best);
        if best - previous < tol && gain < tol {
            break;
        }
        // sample where the local model puts the maximum
        if gain > 0.0 && gain.is_finite() {
            if let Some(i) = cells
                .iter()
                .position(|c| c.x0 < predicted && predicted < c.x1)
            {
                let c = cells[i];
                let fp = eval(predicted)?;
                grid_points += 1;
                if fp > best {
                    best = fp;
                    arg = predicted;
                }
                cells[i] = Cell {
                    x0: c.x0,
                    f0: c.f0,
                    x1: predicted,
                    f1: fp,
                };
                cells.insert(
                    i + 1,
                    Cell {
                        x0: predicted,
                        f0: fp,
                        x1: c.x1,
                        f1: c.f1,
                    },
                );
            }
        }
    }

    Ok(GridSupResult {
        sup_value: best,
        arg,
        grid_points,
        refinement_levels: levels,
    })
}

fn slope_bound(cells: &[Cell]) -> f64 {
    let s = cells
        .iter()
        .filter(|c| c.x1 > c.x0 && c.f0.is_finite() && c.f1.is_finite())
        .map(|c| (c.f1 - c.f0).abs() / (c.x1 - c.x0))
        .fold(0.0, f64::max);
    2.0 * s
}

/// Predicted extra height above `best` near `arg` and where it would be
/// attained: the best of the parabola through `arg` and its two neighbours,
/// and of the two "V" models in which a kink lies in one of the neighbouring
/// cells (the apex of the line through `arg` and one neighbour and the line
/// through the next two points on the other side). Zero when `arg` sits at an
/// interval end.
fn local_gain(cells: &[Cell], arg: f64, best: f64) -> (f64, f64) {
    let left = cells.iter().find(|c| c.x1 == arg).map(|c| (c.x0, c.f0));
    let right = cells.iter().find(|c| c.x0 == arg).map(|c| (c.x1, c.f1));
    let (Some(l), Some(r)) = (left, right) else {
        return (0.0, arg);
    };
    let far_left = cells.iter().find(|c| c.x1 == l.0).map(|c| (c.x0, c.f0));
    let far_right = cells.iter().find(|c| c.x0 == r.0).map(|c| (c.x1, c.f1));
    let centre = (arg, best);

    let mut candidates = vec![parabolic_gain(l, centre, r)];
    if let Some(fr) = far_right {
        candidates.push(apex_gain((l, centre), (r, fr), arg, r.0, best));
    }
    if let Some(fl) = far_left {
        candidates.push(apex_gain((fl, l), (centre, r), l.0, arg, best));
    }
    candidates
        .into_iter()
        .fold((0.0, arg), |acc, c| if c.0 > acc.0 { c } else { acc })
}

fn parabolic_gain(l: (f64, f64), c: (f64, f64), r: (f64, f64)) -> (f64, f64) {
    let (hl, hr) = (c.0 - l.0, r.0 - c.0);
    if hl <= 0.0 || hr <= 0.0 || !l.1.is_finite() || !r.1.is_finite() {
        return (0.0, c.0);
    }
    // divided differences of the interpolating parabola
    let dl = (c.1 - l.1) / hl;
    let dr = (r.1 - c.1) / hr;
    let curvature = (dr - dl) / (hl + hr);
    if curvature >= 0.0 {
        let gain = if l.1 == c.1 || r.1 == c.1 {
            0.0
        } else {
            f64::INFINITY
        };
        return (gain, c.0);
    }
    let slope_at_arg = dl + curvature * hl;
    let vertex = (c.0 - slope_at_arg / (2.0 * curvature)).clamp(l.0, r.0);
    (-(slope_at_arg * slope_at_arg) / (4.0 * curvature), vertex)
}

type Segment = ((f64, f64), (f64, f64));

/// Height above `best` of the intersection of a rising and a falling line,
/// provided the intersection falls inside `[lo, hi]`.
fn apex_gain(rising: Segment, falling: Segment, lo: f64, hi: f64, best: f64) -> (f64, f64) {
    let slope = |((x0, f0), (x1, f1)): Segment| (f1 - f0) / (x1 - x0);
    let (s1, s2) = (slope(rising), slope(falling));
    if !(s1 > 0.0 && s2 < 0.0) || !s1.is_finite() || !s2.is_finite() {
        return (0.0, lo);
    }
    let (p, q) = (rising.1, falling.0);
    // p.1 + s1 (x - p.0) = q.1 + s2 (x - q.0)
    let x = (q.1 - p.1 + s1 * p.0 - s2 * q.0) / (s1 - s2);
    if !(x >= lo && x <= hi) {
        return (0.0, lo);
    }
    ((p.1 + s1 * (x - p.0) - best).max(0.0), x)
}
