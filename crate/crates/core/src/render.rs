//! Deterministic software rasterizer producing three orthographic views
//! (front, side, top) for visual feedback.
//!
//! Flat-shaded, depth-buffered triangles in gray over a white background,
//! with coverage-boundary pixels darkened as silhouette edges. All
//! arithmetic is plain f64 with a fixed traversal order, so the output
//! bytes are identical across runs and platforms. PPM (P6, maxval 255) is
//! the normative output format; PNG encoding is provided for providers
//! that need it.

use crate::geom::Vec3;
use crate::meshgen::TriMesh;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const MIN_SIZE: u32 = 64;

const BACKGROUND: [u8; 3] = [255, 255, 255];
const FILL: [u8; 3] = [200, 200, 200];
const EDGE: [u8; 3] = [80, 80, 80];

/// Fraction of the frame left as margin on each side.
const MARGIN: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ViewKind {
    /// Projection along -Y: screen x = world X, screen up = world Z.
    Front,
    /// Projection along -X: screen x = world Y, screen up = world Z.
    Side,
    /// Projection along -Z: screen x = world X, screen up = world Y.
    Top,
}

impl ViewKind {
    pub fn all() -> [ViewKind; 3] {
        [ViewKind::Front, ViewKind::Side, ViewKind::Top]
    }

    pub fn name(self) -> &'static str {
        match self {
            ViewKind::Front => "front",
            ViewKind::Side => "side",
            ViewKind::Top => "top",
        }
    }

    /// Maps a world point to (u, v, near): in-plane coordinates plus the
    /// towards-camera metric (larger = closer).
    fn project(self, p: Vec3) -> (f64, f64, f64) {
        match self {
            ViewKind::Front => (p.x, p.z, p.y),
            ViewKind::Side => (p.y, p.z, p.x),
            ViewKind::Top => (p.x, p.y, p.z),
        }
    }
}

/// One rendered orthographic view, RGB8 row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ViewImage {
    pub width: u32,
    pub height: u32,
    pub view: ViewKind,
    pub pixels: Vec<u8>,
}

impl ViewImage {
    /// Serializes as binary PPM (P6, maxval 255).
    pub fn to_ppm(&self) -> Vec<u8> {
        let mut out = format!("P6\n{} {}\n255\n", self.width, self.height).into_bytes();
        out.extend_from_slice(&self.pixels);
        out
    }

    /// Encodes as PNG for image-capable chat providers.
    pub fn to_png(&self) -> Result<Vec<u8>, RenderError> {
        let img: image::RgbImage =
            image::ImageBuffer::from_raw(self.width, self.height, self.pixels.clone())
                .expect("buffer length matches dimensions");
        let mut bytes = Vec::new();
        img.write_to(
            &mut std::io::Cursor::new(&mut bytes),
            image::ImageFormat::Png,
        )
        .map_err(|e| RenderError::Encode(e.to_string()))?;
        Ok(bytes)
    }

    fn pixel(&self, x: u32, y: u32) -> [u8; 3] {
        let i = ((y * self.width + x) * 3) as usize;
        [self.pixels[i], self.pixels[i + 1], self.pixels[i + 2]]
    }

    /// True where a pixel is not background.
    pub fn is_foreground(&self, x: u32, y: u32) -> bool {
        self.pixel(x, y) != BACKGROUND
    }
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum RenderError {
    #[error("mesh has no geometry to render")]
    EmptyObject,
    #[error("image size {0} is below the minimum of {MIN_SIZE}")]
    SizeTooSmall(u32),
    #[error("image encoding failed: {0}")]
    Encode(String),
}

/// Renders the three orthographic views at `size` x `size` pixels.
pub fn render_views(mesh: &TriMesh, size: u32) -> Result<[ViewImage; 3], RenderError> {
    if mesh.vertices.is_empty() || mesh.triangles.is_empty() {
        return Err(RenderError::EmptyObject);
    }
    if size < MIN_SIZE {
        return Err(RenderError::SizeTooSmall(size));
    }
    Ok([
        render_view(mesh, size, ViewKind::Front),
        render_view(mesh, size, ViewKind::Side),
        render_view(mesh, size, ViewKind::Top),
    ])
}

fn render_view(mesh: &TriMesh, size: u32, view: ViewKind) -> ViewImage {
    let n = size as usize;
    let mut color = vec![BACKGROUND; n * n];
    let mut depth = vec![f64::NEG_INFINITY; n * n];

    // Auto-framing: uniform scale so the content occupies the central
    // (1 - 2*MARGIN) of the frame, centered.
    let projected: Vec<(f64, f64, f64)> = mesh.vertices.iter().map(|&p| view.project(p)).collect();
    let (mut u_min, mut u_max) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut v_min, mut v_max) = (f64::INFINITY, f64::NEG_INFINITY);
    for &(u, v, _) in &projected {
        u_min = u_min.min(u);
        u_max = u_max.max(u);
        v_min = v_min.min(v);
        v_max = v_max.max(v);
    }
    let extent = (u_max - u_min).max(v_max - v_min).max(1e-12);
    let scale = (1.0 - 2.0 * MARGIN) * size as f64 / extent;
    let u_mid = (u_min + u_max) / 2.0;
    let v_mid = (v_min + v_max) / 2.0;
    let half = size as f64 / 2.0;
    let to_screen = |(u, v, near): (f64, f64, f64)| -> (f64, f64, f64) {
        ((u - u_mid) * scale + half, half - (v - v_mid) * scale, near)
    };

    for tri in &mesh.triangles {
        let a = to_screen(projected[tri[0] as usize]);
        let b = to_screen(projected[tri[1] as usize]);
        let c = to_screen(projected[tri[2] as usize]);
        fill_triangle(&mut color, &mut depth, size, a, b, c);
    }

    // Silhouette pass: darken covered pixels that touch the background.
    let mut with_edges = color.clone();
    for y in 0..n {
        for x in 0..n {
            if color[y * n + x] == BACKGROUND {
                continue;
            }
            let mut boundary = false;
            if x == 0 || color[y * n + x - 1] == BACKGROUND {
                boundary = true;
            }
            if x + 1 >= n || color[y * n + x + 1] == BACKGROUND {
                boundary = true;
            }
            if y == 0 || color[(y - 1) * n + x] == BACKGROUND {
                boundary = true;
            }
            if y + 1 >= n || color[(y + 1) * n + x] == BACKGROUND {
                boundary = true;
            }
            if boundary {
                with_edges[y * n + x] = EDGE;
            }
        }
    }

    let mut pixels = Vec::with_capacity(n * n * 3);
    for px in with_edges {
        pixels.extend_from_slice(&px);
    }
    ViewImage {
        width: size,
        height: size,
        view,
        pixels,
    }
}

/// Edge-function rasterization over pixel centers, depth-tested with
/// larger-is-closer.
fn fill_triangle(
    color: &mut [[u8; 3]],
    depth: &mut [f64],
    size: u32,
    a: (f64, f64, f64),
    b: (f64, f64, f64),
    c: (f64, f64, f64),
) {
    let area = edge(a, b, c.0, c.1);
    if area.abs() < 1e-12 {
        return;
    }
    // Wind consistently so the edge functions share a sign.
    let (a, b, c, area) = if area < 0.0 {
        (a, c, b, -area)
    } else {
        (a, b, c, area)
    };

    let min_x = a.0.min(b.0).min(c.0).floor().max(0.0) as u32;
    let max_x = (a.0.max(b.0).max(c.0).ceil() as i64).clamp(0, size as i64 - 1) as u32;
    let min_y = a.1.min(b.1).min(c.1).floor().max(0.0) as u32;
    let max_y = (a.1.max(b.1).max(c.1).ceil() as i64).clamp(0, size as i64 - 1) as u32;
    if min_x > max_x || min_y > max_y {
        return;
    }

    for y in min_y..=max_y {
        for x in min_x..=max_x {
            let px = x as f64 + 0.5;
            let py = y as f64 + 0.5;
            let w0 = edge(b, c, px, py);
            let w1 = edge(c, a, px, py);
            let w2 = edge(a, b, px, py);
            if w0 < 0.0 || w1 < 0.0 || w2 < 0.0 {
                continue;
            }
            let near = (w0 * a.2 + w1 * b.2 + w2 * c.2) / area;
            let idx = (y * size + x) as usize;
            if near > depth[idx] {
                depth[idx] = near;
                color[idx] = FILL;
            }
        }
    }
}

fn edge(a: (f64, f64, f64), b: (f64, f64, f64), px: f64, py: f64) -> f64 {
    (b.0 - a.0) * (py - a.1) - (b.1 - a.1) * (px - a.0)
}
