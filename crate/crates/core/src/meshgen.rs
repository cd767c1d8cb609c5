//! Tessellation of primitive instances into triangle meshes, rigid+scale
//! transforms, object assembly, and vertex extraction.
//!
//! Vertex-count contract (S = segments, R = rings):
//!
//! | primitive            | vertices        |
//! |----------------------|-----------------|
//! | cuboid               | 8               |
//! | cylinder             | 2S + 2          |
//! | cone, radius_top > 0 | 2S + 2          |
//! | cone, radius_top = 0 | S + 2           |
//! | sphere               | S*(R-1) + 2     |
//!
//! Caps are center fans; the cylinder/cone axis is +Z spanning +-depth/2;
//! a cuboid spans +-size/2 per axis. Both sides of a comparison must be
//! tessellated with the same defaults for vertex matching to be meaningful.

use crate::geom::{Mat3, Vec3};
use crate::shapescript::{PrimitiveInstance, ShapeParams};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Triangle mesh with indexed vertices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TriMesh {
    pub vertices: Vec<Vec3>,
    pub triangles: Vec<[u32; 3]>,
}

impl TriMesh {
    /// Checks the structural invariants: indices in range, no triangle with
    /// two equal corners, all coordinates finite.
    pub fn validate(&self) -> Result<(), MeshError> {
        for (i, v) in self.vertices.iter().enumerate() {
            if !v.is_finite() {
                return Err(MeshError::Domain(format!(
                    "vertex {i} has non-finite coordinates"
                )));
            }
        }
        let n = self.vertices.len() as u32;
        for (i, t) in self.triangles.iter().enumerate() {
            if t.iter().any(|&ix| ix >= n) {
                return Err(MeshError::Domain(format!(
                    "triangle {i} references vertex out of range"
                )));
            }
            if t[0] == t[1] || t[1] == t[2] || t[0] == t[2] {
                return Err(MeshError::Domain(format!(
                    "triangle {i} repeats a vertex index"
                )));
            }
        }
        Ok(())
    }

    pub fn bounding_box(&self) -> Option<(Vec3, Vec3)> {
        bounding_box_of(&self.vertices)
    }
}

/// The extracted vertex set of a mesh; duplicates are kept.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointCloud {
    pub points: Vec<Vec3>,
}

impl PointCloud {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn bounding_box(&self) -> Option<(Vec3, Vec3)> {
        bounding_box_of(&self.points)
    }

    /// Length of the axis-aligned bounding-box diagonal; 0 for a single
    /// point, None when empty.
    pub fn bbox_diagonal(&self) -> Option<f64> {
        self.bounding_box().map(|(lo, hi)| (hi - lo).norm())
    }
}

pub(crate) fn bounding_box_of(points: &[Vec3]) -> Option<(Vec3, Vec3)> {
    let first = *points.first()?;
    let mut lo = first;
    let mut hi = first;
    for p in &points[1..] {
        lo = Vec3::new(lo.x.min(p.x), lo.y.min(p.y), lo.z.min(p.z));
        hi = Vec3::new(hi.x.max(p.x), hi.y.max(p.y), hi.z.max(p.z));
    }
    Some((lo, hi))
}

/// Shared tessellation settings. Candidate and ground truth must use the
/// same values.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TessellationDefaults {
    /// Radial segments for cylinders and cones (>= 3).
    pub segments: u32,
    /// Radial segments for spheres (>= 3).
    pub sphere_segments: u32,
    /// Latitudinal divisions for spheres (>= 2).
    pub sphere_rings: u32,
}

impl Default for TessellationDefaults {
    fn default() -> Self {
        TessellationDefaults {
            segments: 32,
            sphere_segments: 32,
            sphere_rings: 16,
        }
    }
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum MeshError {
    /// A program that creates no geometry is a failed generation.
    #[error("program produced no geometry")]
    EmptyObject,
    #[error("domain error: {0}")]
    Domain(String),
}

/// Tessellate one primitive in its local frame, centered at the origin.
pub fn tessellate(
    instance: &PrimitiveInstance,
    defaults: &TessellationDefaults,
) -> Result<TriMesh, MeshError> {
    if defaults.segments < 3 || defaults.sphere_segments < 3 || defaults.sphere_rings < 2 {
        return Err(MeshError::Domain(
            "tessellation defaults below minimum (segments >= 3, rings >= 2)".into(),
        ));
    }
    let mesh = match instance.shape {
        ShapeParams::Cuboid { size } => {
            require_positive("cuboid size", &[size.x, size.y, size.z])?;
            cuboid_mesh(size)
        }
        ShapeParams::Cylinder { radius, depth } => {
            require_positive("cylinder dimensions", &[radius, depth])?;
            lathe_mesh(radius, radius, depth, defaults.segments)
        }
        ShapeParams::Cone {
            radius_bottom,
            radius_top,
            depth,
        } => {
            require_positive("cone dimensions", &[radius_bottom, depth])?;
            if radius_top < 0.0 || !radius_top.is_finite() {
                return Err(MeshError::Domain(
                    "cone radius_top must be finite and non-negative".into(),
                ));
            }
            if radius_top > 0.0 {
                lathe_mesh(radius_bottom, radius_top, depth, defaults.segments)
            } else {
                apex_cone_mesh(radius_bottom, depth, defaults.segments)
            }
        }
        ShapeParams::Sphere { radius } => {
            require_positive("sphere radius", &[radius])?;
            sphere_mesh(radius, defaults.sphere_segments, defaults.sphere_rings)
        }
    };
    debug_assert!(mesh.validate().is_ok());
    Ok(mesh)
}

fn require_positive(what: &str, values: &[f64]) -> Result<(), MeshError> {
    for &v in values {
        if !(v.is_finite() && v > 0.0) {
            return Err(MeshError::Domain(format!(
                "{what} must be positive, got {v}"
            )));
        }
    }
    Ok(())
}

fn cuboid_mesh(size: Vec3) -> TriMesh {
    let h = size * 0.5;
    let vertices = vec![
        Vec3::new(-h.x, -h.y, -h.z),
        Vec3::new(h.x, -h.y, -h.z),
        Vec3::new(h.x, h.y, -h.z),
        Vec3::new(-h.x, h.y, -h.z),
        Vec3::new(-h.x, -h.y, h.z),
        Vec3::new(h.x, -h.y, h.z),
        Vec3::new(h.x, h.y, h.z),
        Vec3::new(-h.x, h.y, h.z),
    ];
    let triangles = vec![
        [0, 2, 1],
        [0, 3, 2],
        [4, 5, 6],
        [4, 6, 7],
        [0, 1, 5],
        [0, 5, 4],
        [2, 3, 7],
        [2, 7, 6],
        [3, 0, 4],
        [3, 4, 7],
        [1, 2, 6],
        [1, 6, 5],
    ];
    TriMesh {
        vertices,
        triangles,
    }
}

/// Cylinder or frustum: two rings plus two cap-center vertices.
fn lathe_mesh(radius_bottom: f64, radius_top: f64, depth: f64, segments: u32) -> TriMesh {
    let s = segments as usize;
    let half = depth / 2.0;
    let mut vertices = Vec::with_capacity(2 * s + 2);
    for k in 0..s {
        let theta = 2.0 * std::f64::consts::PI * k as f64 / s as f64;
        vertices.push(Vec3::new(
            radius_bottom * theta.cos(),
            radius_bottom * theta.sin(),
            -half,
        ));
    }
    for k in 0..s {
        let theta = 2.0 * std::f64::consts::PI * k as f64 / s as f64;
        vertices.push(Vec3::new(
            radius_top * theta.cos(),
            radius_top * theta.sin(),
            half,
        ));
    }
    let bottom_center = (2 * s) as u32;
    let top_center = (2 * s + 1) as u32;
    vertices.push(Vec3::new(0.0, 0.0, -half));
    vertices.push(Vec3::new(0.0, 0.0, half));

    let mut triangles = Vec::with_capacity(4 * s);
    for k in 0..s {
        let k1 = (k + 1) % s;
        let (b0, b1) = (k as u32, k1 as u32);
        let (t0, t1) = ((s + k) as u32, (s + k1) as u32);
        triangles.push([b0, b1, t1]);
        triangles.push([b0, t1, t0]);
        triangles.push([bottom_center, b1, b0]);
        triangles.push([top_center, t0, t1]);
    }
    TriMesh {
        vertices,
        triangles,
    }
}

/// Cone with a point apex: base ring, apex, base cap center.
fn apex_cone_mesh(radius: f64, depth: f64, segments: u32) -> TriMesh {
    let s = segments as usize;
    let half = depth / 2.0;
    let mut vertices = Vec::with_capacity(s + 2);
    for k in 0..s {
        let theta = 2.0 * std::f64::consts::PI * k as f64 / s as f64;
        vertices.push(Vec3::new(radius * theta.cos(), radius * theta.sin(), -half));
    }
    let apex = s as u32;
    let base_center = (s + 1) as u32;
    vertices.push(Vec3::new(0.0, 0.0, half));
    vertices.push(Vec3::new(0.0, 0.0, -half));

    let mut triangles = Vec::with_capacity(2 * s);
    for k in 0..s {
        let k1 = (k + 1) % s;
        triangles.push([k as u32, k1 as u32, apex]);
        triangles.push([base_center, k1 as u32, k as u32]);
    }
    TriMesh {
        vertices,
        triangles,
    }
}

/// UV sphere: interior latitude rings plus two poles.
fn sphere_mesh(radius: f64, segments: u32, rings: u32) -> TriMesh {
    let s = segments as usize;
    let r = rings as usize;
    let mut vertices = Vec::with_capacity(s * (r - 1) + 2);
    for j in 1..r {
        let phi = std::f64::consts::PI * j as f64 / r as f64;
        let (sin_phi, cos_phi) = (phi.sin(), phi.cos());
        for k in 0..s {
            let theta = 2.0 * std::f64::consts::PI * k as f64 / s as f64;
            vertices.push(Vec3::new(
                radius * sin_phi * theta.cos(),
                radius * sin_phi * theta.sin(),
                radius * cos_phi,
            ));
        }
    }
    let north = (s * (r - 1)) as u32;
    let south = (s * (r - 1) + 1) as u32;
    vertices.push(Vec3::new(0.0, 0.0, radius));
    vertices.push(Vec3::new(0.0, 0.0, -radius));

    let ring = |j: usize, k: usize| -> u32 { ((j - 1) * s + (k % s)) as u32 };
    let mut triangles = Vec::with_capacity(2 * s * (r - 1));
    for k in 0..s {
        triangles.push([north, ring(1, k), ring(1, k + 1)]);
        triangles.push([south, ring(r - 1, k + 1), ring(r - 1, k)]);
    }
    for j in 1..r - 1 {
        for k in 0..s {
            let a = ring(j, k);
            let b = ring(j, k + 1);
            let c = ring(j + 1, k + 1);
            let d = ring(j + 1, k);
            triangles.push([a, c, b]);
            triangles.push([a, d, c]);
        }
    }
    TriMesh {
        vertices,
        triangles,
    }
}

/// Scale, then rotate (Euler XYZ), then translate every vertex.
pub fn apply_transform(mesh: &TriMesh, scale: Vec3, rotation: Vec3, location: Vec3) -> TriMesh {
    let r = Mat3::rotation_euler_xyz(rotation.x, rotation.y, rotation.z);
    let vertices = mesh
        .vertices
        .iter()
        .map(|&v| r.apply(scale.hadamard(v)) + location)
        .collect();
    TriMesh {
        vertices,
        triangles: mesh.triangles.clone(),
    }
}

/// Tessellate and place every instance, concatenating the meshes with
/// vertex-index offsets. Instance order is preserved.
pub fn assemble(
    instances: &[PrimitiveInstance],
    defaults: &TessellationDefaults,
) -> Result<TriMesh, MeshError> {
    if instances.is_empty() {
        return Err(MeshError::EmptyObject);
    }
    let mut vertices = Vec::new();
    let mut triangles = Vec::new();
    for instance in instances {
        let local = tessellate(instance, defaults)?;
        let placed = apply_transform(&local, instance.scale, instance.rotation, instance.location);
        let offset = vertices.len() as u32;
        vertices.extend(placed.vertices);
        triangles.extend(
            placed
                .triangles
                .iter()
                .map(|t| [t[0] + offset, t[1] + offset, t[2] + offset]),
        );
    }
    Ok(TriMesh {
        vertices,
        triangles,
    })
}

/// The vertex list as a point cloud, order preserved, duplicates kept.
pub fn extract_vertices(mesh: &TriMesh) -> PointCloud {
    PointCloud {
        points: mesh.vertices.clone(),
    }
}
