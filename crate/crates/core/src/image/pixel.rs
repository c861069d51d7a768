use std::io::BufRead;
use std::path::Path;

use crate::error::{Error, Result};

/// Fill value for canvas area not covered by the resized image.
pub const PAD_GRAY: [u8; 3] = [128, 128, 128];

/// Row-major RGB image with 8-bit samples.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PixelImage {
    width: u32,
    height: u32,
    data: Vec<u8>,
}

impl PixelImage {
    pub fn new(width: u32, height: u32, data: Vec<u8>) -> Result<Self> {
        let expected = width as usize * height as usize * 3;
        if data.len() != expected {
            return Err(Error::domain(format!(
                "pixel buffer has {} samples, expected {expected} for {width}x{height}x3",
                data.len()
            )));
        }
        Ok(PixelImage { width, height, data })
    }

    pub fn filled(width: u32, height: u32, rgb: [u8; 3]) -> Self {
        let data = rgb
            .iter()
            .copied()
            .cycle()
            .take(width as usize * height as usize * 3)
            .collect();
        PixelImage { width, height, data }
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    pub fn pixel(&self, x: u32, y: u32) -> [u8; 3] {
        let i = (y as usize * self.width as usize + x as usize) * 3;
        [self.data[i], self.data[i + 1], self.data[i + 2]]
    }

    fn sample(&self, x: usize, y: usize, c: usize) -> f64 {
        f64::from(self.data[(y * self.width as usize + x) * 3 + c])
    }

    /// Copies `src` into this image with its top-left corner at (x, y).
    pub fn blit(&mut self, src: &PixelImage, x: u32, y: u32) {
        let row_len = src.width.min(self.width.saturating_sub(x)) as usize * 3;
        for sy in 0..src.height.min(self.height.saturating_sub(y)) {
            let s = sy as usize * src.width as usize * 3;
            let d = ((y + sy) as usize * self.width as usize + x as usize) * 3;
            self.data[d..d + row_len].copy_from_slice(&src.data[s..s + row_len]);
        }
    }

    /// Extracts the `w`×`h` region starting at (x, y).
    pub fn crop(&self, x: u32, y: u32, w: u32, h: u32) -> Result<PixelImage> {
        if x + w > self.width || y + h > self.height {
            return Err(Error::domain(format!(
                "crop {w}x{h}+{x}+{y} outside {}x{} image",
                self.width, self.height
            )));
        }
        let mut data = Vec::with_capacity(w as usize * h as usize * 3);
        for row in y..y + h {
            let s = (row as usize * self.width as usize + x as usize) * 3;
            data.extend_from_slice(&self.data[s..s + w as usize * 3]);
        }
        Ok(PixelImage { width: w, height: h, data })
    }

    pub fn read_ppm(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        decode_ppm(std::io::BufReader::new(file))
    }

    pub fn write_ppm(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.encode_ppm()).map_err(|e| Error::io(path, e))
    }

    /// Binary PPM (P6, maxval 255).
    pub fn encode_ppm(&self) -> Vec<u8> {
        let mut out = format!("P6\n{} {}\n255\n", self.width, self.height).into_bytes();
        out.extend_from_slice(&self.data);
        out
    }
}

fn ppm_token<R: BufRead>(reader: &mut R) -> Result<String> {
    let mut token = String::new();
    let mut byte = [0u8; 1];
    loop {
        if reader.read(&mut byte).map_err(|e| Error::io("<ppm>", e))? == 0 {
            break;
        }
        let c = byte[0];
        if c == b'#' && token.is_empty() {
            let mut skip = Vec::new();
            reader
                .read_until(b'\n', &mut skip)
                .map_err(|e| Error::io("<ppm>", e))?;
            continue;
        }
        if c.is_ascii_whitespace() {
            if token.is_empty() {
                continue;
            }
            break;
        }
        token.push(c as char);
    }
    if token.is_empty() {
        return Err(Error::Format("ppm: truncated header".into()));
    }
    Ok(token)
}

pub fn decode_ppm<R: BufRead>(mut reader: R) -> Result<PixelImage> {
    let magic = ppm_token(&mut reader)?;
    if magic != "P6" {
        return Err(Error::Format(format!("ppm: expected P6, found {magic:?}")));
    }
    let mut num = |what: &str| -> Result<u32> {
        let t = ppm_token(&mut reader)?;
        t.parse()
            .map_err(|_| Error::Format(format!("ppm: bad {what} {t:?}")))
    };
    let width = num("width")?;
    let height = num("height")?;
    let maxval = num("maxval")?;
    if maxval != 255 {
        return Err(Error::Format(format!("ppm: maxval {maxval} unsupported")));
    }
    let mut data = vec![0u8; width as usize * height as usize * 3];
    reader
        .read_exact(&mut data)
        .map_err(|_| Error::Format("ppm: truncated pixel data".into()))?;
    PixelImage::new(width, height, data)
}

/// Bilinear resize with half-pixel centers: the source coordinate for
/// output pixel `d` is (d + 0.5)·in/out − 0.5, clamped to the image.
pub fn bilinear_resize(image: &PixelImage, out_w: u32, out_h: u32) -> Result<PixelImage> {
    if out_w == 0 || out_h == 0 {
        return Err(Error::domain("bilinear_resize: output dimensions must be positive"));
    }
    if out_w == image.width && out_h == image.height {
        return Ok(image.clone());
    }
    let xs = axis_weights(image.width, out_w);
    let ys = axis_weights(image.height, out_h);
    let mut data = Vec::with_capacity(out_w as usize * out_h as usize * 3);
    for &(y0, y1, fy) in &ys {
        for &(x0, x1, fx) in &xs {
            for c in 0..3 {
                let top = image.sample(x0, y0, c) * (1.0 - fx) + image.sample(x1, y0, c) * fx;
                let bottom = image.sample(x0, y1, c) * (1.0 - fx) + image.sample(x1, y1, c) * fx;
                let v = top * (1.0 - fy) + bottom * fy;
                data.push(v.round().clamp(0.0, 255.0) as u8);
            }
        }
    }
    PixelImage::new(out_w, out_h, data)
}

fn axis_weights(input: u32, output: u32) -> Vec<(usize, usize, f64)> {
    let scale = f64::from(input) / f64::from(output);
    let last = input as usize - 1;
    (0..output)
        .map(|d| {
            let src = ((f64::from(d) + 0.5) * scale - 0.5).clamp(0.0, last as f64);
            let i0 = src.floor() as usize;
            let i1 = (i0 + 1).min(last);
            (i0, i1, src - i0 as f64)
        })
        .collect()
}

/// Resizes `image` to the placement size and centers it on a gray canvas.
pub fn letterbox(
    image: &PixelImage,
    canvas_w: u32,
    canvas_h: u32,
    placement: &super::Placement,
) -> Result<PixelImage> {
    let scaled = bilinear_resize(image, placement.scaled_width, placement.scaled_height)?;
    let mut canvas = PixelImage::filled(canvas_w, canvas_h, PAD_GRAY);
    canvas.blit(&scaled, placement.pad_x, placement.pad_y);
    Ok(canvas)
}
