use serde::{Deserialize, Serialize};

use super::Material;
use crate::geometry::{Box3D, Vec3};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Triangle {
    pub vertices: [Vec3; 3],
    /// Index into the owning mesh's material table.
    pub material: u16,
}

/// Triangle soup with a per-triangle material. Triangles sharing a material
/// form one group.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Mesh {
    pub materials: Vec<Material>,
    pub triangles: Vec<Triangle>,
}

impl Mesh {
    pub fn add_material(&mut self, material: Material) -> u16 {
        if let Some(i) = self.materials.iter().position(|m| *m == material) {
            return i as u16;
        }
        self.materials.push(material);
        (self.materials.len() - 1) as u16
    }

    pub fn push_triangle(&mut self, a: Vec3, b: Vec3, c: Vec3, material: u16) {
        self.triangles.push(Triangle {
            vertices: [a, b, c],
            material,
        });
    }

    /// Quad `a b c d` given in order around its boundary.
    pub fn push_quad(&mut self, a: Vec3, b: Vec3, c: Vec3, d: Vec3, material: u16) {
        self.push_triangle(a, b, c, material);
        self.push_triangle(a, c, d, material);
    }

    /// Axis-aligned box between `lo` and `hi`; `skip_bottom` omits the
    /// bottom face.
    pub fn push_box(&mut self, lo: Vec3, hi: Vec3, material: u16, skip_bottom: bool) {
        let p = |x: f64, y: f64, z: f64| Vec3::new(x, y, z);
        let (x0, y0, z0, x1, y1, z1) = (lo.x, lo.y, lo.z, hi.x, hi.y, hi.z);
        self.push_quad(p(x0, y0, z1), p(x1, y0, z1), p(x1, y1, z1), p(x0, y1, z1), material);
        if !skip_bottom {
            self.push_quad(p(x0, y0, z0), p(x0, y1, z0), p(x1, y1, z0), p(x1, y0, z0), material);
        }
        self.push_quad(p(x0, y0, z0), p(x1, y0, z0), p(x1, y0, z1), p(x0, y0, z1), material);
        self.push_quad(p(x0, y1, z0), p(x0, y1, z1), p(x1, y1, z1), p(x1, y1, z0), material);
        self.push_quad(p(x0, y0, z0), p(x0, y0, z1), p(x0, y1, z1), p(x0, y1, z0), material);
        self.push_quad(p(x1, y0, z0), p(x1, y1, z0), p(x1, y1, z1), p(x1, y0, z1), material);
    }

    /// Planar rectangle spanned by `origin + s·u + t·v` for s, t in [0, 1]
    /// with a window cut out at parameter ranges `s_win` × `t_win`. The
    /// window is filled with `window_material`, the surrounding frame with
    /// `frame_material`.
    #[allow(clippy::too_many_arguments)]
    pub fn push_framed_panel(
        &mut self,
        origin: Vec3,
        u: Vec3,
        v: Vec3,
        s_win: (f64, f64),
        t_win: (f64, f64),
        frame_material: u16,
        window_material: u16,
    ) {
        let at = |s: f64, t: f64| origin + u * s + v * t;
        let (s0, s1) = s_win;
        let (t0, t1) = t_win;
        // bottom strip, top strip, left and right jambs
        self.push_quad(at(0.0, 0.0), at(1.0, 0.0), at(1.0, t0), at(0.0, t0), frame_material);
        self.push_quad(at(0.0, t1), at(1.0, t1), at(1.0, 1.0), at(0.0, 1.0), frame_material);
        self.push_quad(at(0.0, t0), at(s0, t0), at(s0, t1), at(0.0, t1), frame_material);
        self.push_quad(at(s1, t0), at(1.0, t0), at(1.0, t1), at(s1, t1), frame_material);
        self.push_quad(at(s0, t0), at(s1, t0), at(s1, t1), at(s0, t1), window_material);
    }

    pub fn bounds(&self) -> Option<(Vec3, Vec3)> {
        let mut it = self.triangles.iter().flat_map(|t| t.vertices.iter());
        let first = *it.next()?;
        Some(it.fold((first, first), |(lo, hi), p| (lo.inf(p), hi.sup(p))))
    }

    pub fn fits_in(&self, b: &Box3D, tol: f64) -> bool {
        self.triangles
            .iter()
            .flat_map(|t| t.vertices.iter())
            .all(|p| b.contains(p, tol))
    }

    pub fn group_count(&self, kind: super::MaterialKind) -> usize {
        let mut used: Vec<u16> = self
            .triangles
            .iter()
            .map(|t| t.material)
            .filter(|m| self.materials[*m as usize].kind == kind)
            .collect();
        used.sort_unstable();
        used.dedup();
        used.len()
    }
}
