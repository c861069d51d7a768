use std::cmp::Ordering;

use serde::Serialize;

use crate::error::{Error, Result};

/// Upper bound on slices per image supported by the planner.
pub const MAX_SLICES_LIMIT: u32 = 9;

/// Grid chosen for one image plus the canvas it is resized onto.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TilePlan {
    pub grid_rows: u32,
    pub grid_cols: u32,
    pub cell_size: u32,
    pub resized_width: u32,
    pub resized_height: u32,
    pub thumbnail: bool,
    pub score: f64,
}

impl TilePlan {
    fn new(rows: u32, cols: u32, cell_size: u32, score: f64) -> Self {
        TilePlan {
            grid_rows: rows,
            grid_cols: cols,
            cell_size,
            resized_width: cols * cell_size,
            resized_height: rows * cell_size,
            thumbnail: rows * cols > 1,
            score,
        }
    }

    pub fn slices(&self) -> u32 {
        self.grid_rows * self.grid_cols
    }

    /// Encoder units: every slice plus the thumbnail if present.
    pub fn units(&self) -> u32 {
        self.slices() + u32::from(self.thumbnail)
    }

    pub fn check(&self) -> Result<()> {
        let ok = self.grid_rows >= 1
            && self.grid_cols >= 1
            && self.cell_size > 0
            && self.resized_width == self.grid_cols * self.cell_size
            && self.resized_height == self.grid_rows * self.cell_size
            && self.thumbnail == (self.slices() > 1);
        if ok {
            Ok(())
        } else {
            Err(Error::domain(format!("inconsistent tile plan {self:?}")))
        }
    }
}

/// Number of cells the image area would fill: ceil(w·h / cell²), clipped
/// to `max_slices`.
pub fn ideal_slices(width: u32, height: u32, max_slices: u32, cell_size: u32) -> u32 {
    let area = u64::from(width) * u64::from(height);
    let cell = u64::from(cell_size) * u64::from(cell_size);
    area.div_ceil(cell).min(u64::from(max_slices)) as u32
}

/// Log-aspect mismatch score of a rows×cols grid: −|ln((w/h) / (cols/rows))|.
pub fn grid_score(width: u32, height: u32, rows: u32, cols: u32) -> f64 {
    let image = f64::from(width) / f64::from(height);
    let grid = f64::from(cols) / f64::from(rows);
    -(image / grid).ln().abs()
}

/// Aspect mismatch of a grid as an exact ratio `big/small` ≥ 1, where the
/// two sides are w·rows and h·cols. Larger means worse.
fn mismatch(width: u32, height: u32, rows: u32, cols: u32) -> (u64, u64) {
    let a = u64::from(width) * u64::from(rows);
    let b = u64::from(height) * u64::from(cols);
    (a.max(b), a.min(b))
}

fn cmp_mismatch(x: (u64, u64), y: (u64, u64)) -> Ordering {
    (u128::from(x.0) * u128::from(y.1)).cmp(&(u128::from(y.0) * u128::from(x.1)))
}

/// Chooses the slicing grid for a `width`×`height` image.
///
/// Images that fit in one cell are used whole. Otherwise every grid with
/// N*−1, N* or N*+1 cells (within `max_slices`) is scored by log-aspect
/// mismatch; ties go to fewer cells, then fewer rows. Scores are compared as
/// exact integer ratios so ties are real ties.
pub fn plan_tiles(width: u32, height: u32, max_slices: u32, cell_size: u32) -> Result<TilePlan> {
    if width == 0 || height == 0 {
        return Err(Error::domain(format!(
            "plan_tiles: image dimensions must be positive, got {width}x{height}"
        )));
    }
    if !(1..=MAX_SLICES_LIMIT).contains(&max_slices) {
        return Err(Error::domain(format!(
            "plan_tiles: max_slices must be in 1..={MAX_SLICES_LIMIT}, got {max_slices}"
        )));
    }
    if cell_size == 0 {
        return Err(Error::domain("plan_tiles: cell_size must be positive"));
    }

    let ideal = ideal_slices(width, height, max_slices, cell_size);
    if ideal == 1 {
        return Ok(TilePlan::new(1, 1, cell_size, grid_score(width, height, 1, 1)));
    }

    let lo = (ideal - 1).max(1);
    let hi = (ideal + 1).min(max_slices);
    let mut best: Option<(u32, u32)> = None;
    for count in lo..=hi {
        for rows in 1..=count {
            if count % rows != 0 {
                continue;
            }
            let cols = count / rows;
            let better = match best {
                None => true,
                // Enumeration order is (count, rows) ascending, so only a
                // strictly smaller mismatch displaces the incumbent.
                Some((br, bc)) => {
                    cmp_mismatch(
                        mismatch(width, height, rows, cols),
                        mismatch(width, height, br, bc),
                    ) == Ordering::Less
                }
            };
            if better {
                best = Some((rows, cols));
            }
        }
    }
    let (rows, cols) = best.expect("candidate set is non-empty");
    Ok(TilePlan::new(rows, cols, cell_size, grid_score(width, height, rows, cols)))
}

/// Placement of an aspect-preserving resize inside a canvas.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Placement {
    pub scaled_width: u32,
    pub scaled_height: u32,
    pub pad_x: u32,
    pub pad_y: u32,
}

/// Fits `width`×`height` inside `canvas_w`×`canvas_h` at scale
/// min(cw/w, ch/h), rounding to whole pixels and centering the result.
pub fn fit_within(width: u32, height: u32, canvas_w: u32, canvas_h: u32) -> Placement {
    let (w, h) = (u64::from(width), u64::from(height));
    let (cw, ch) = (u64::from(canvas_w), u64::from(canvas_h));
    let round_div = |num: u64, den: u64| (2 * num + den) / (2 * den);
    let (sw, sh) = if cw * h <= ch * w {
        // width is the binding axis
        (cw, round_div(h * cw, w).clamp(1, ch))
    } else {
        (round_div(w * ch, h).clamp(1, cw), ch)
    };
    Placement {
        scaled_width: sw as u32,
        scaled_height: sh as u32,
        pad_x: ((cw - sw) / 2) as u32,
        pad_y: ((ch - sh) / 2) as u32,
    }
}

pub fn resize_geometry(width: u32, height: u32, plan: &TilePlan) -> Result<Placement> {
    plan.check()?;
    if width == 0 || height == 0 {
        return Err(Error::domain("resize_geometry: image dimensions must be positive"));
    }
    Ok(fit_within(width, height, plan.resized_width, plan.resized_height))
}

/// Placement of the whole-image thumbnail inside one cell.
pub fn thumbnail_geometry(width: u32, height: u32, cell_size: u32) -> Placement {
    fit_within(width, height, cell_size, cell_size)
}
