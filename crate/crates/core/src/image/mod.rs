//! High-resolution image handling: grid planning, aspect-preserving resize,
//! slicing into encoder cells and position-embedding interpolation.

mod embed;
mod pixel;
mod tiler;

pub use embed::{interpolate_pos_embed, EmbeddingGrid};
pub(crate) use embed::{decode_tensor, encode_tensor};
pub use pixel::{bilinear_resize, decode_ppm, letterbox, PixelImage, PAD_GRAY};
pub use tiler::{
    fit_within, grid_score, ideal_slices, plan_tiles, resize_geometry, thumbnail_geometry,
    Placement, TilePlan, MAX_SLICES_LIMIT,
};

use crate::error::Result;

/// Encoder inputs produced for one image.
#[derive(Debug, Clone)]
pub struct SlicedImage {
    /// Cells in row-major order, each `cell_size` square.
    pub cells: Vec<PixelImage>,
    pub thumbnail: Option<PixelImage>,
}

/// Resizes `image` onto the plan's canvas and cuts it into cells; adds a
/// letterboxed whole-image thumbnail when the plan has more than one cell.
pub fn slice_image(image: &PixelImage, plan: &TilePlan) -> Result<SlicedImage> {
    let placement = resize_geometry(image.width(), image.height(), plan)?;
    let canvas = letterbox(image, plan.resized_width, plan.resized_height, &placement)?;
    let cs = plan.cell_size;
    let mut cells = Vec::with_capacity(plan.slices() as usize);
    for row in 0..plan.grid_rows {
        for col in 0..plan.grid_cols {
            cells.push(canvas.crop(col * cs, row * cs, cs, cs)?);
        }
    }
    let thumbnail = if plan.thumbnail {
        let g = thumbnail_geometry(image.width(), image.height(), cs);
        Some(letterbox(image, cs, cs, &g)?)
    } else {
        None
    };
    Ok(SlicedImage { cells, thumbnail })
}
