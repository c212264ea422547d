//! Bounding volume hierarchy over all scene triangles, built with a binned
//! surface area heuristic.

use crate::error::{Error, Result};
use crate::geometry::Vec3;
use crate::scene::{MaterialKind, Scene};

const BINS: usize = 16;
const MAX_LEAF: usize = 4;

/// Material and ownership of a group of triangles.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Surface {
    pub kind: MaterialKind,
    pub albedo: f64,
    pub actor_id: Option<u32>,
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct Tri {
    pub v0: Vec3,
    pub e1: Vec3,
    pub e2: Vec3,
    pub normal: Vec3,
    pub surface: u32,
}

impl Tri {
    fn new(v: [Vec3; 3], surface: u32) -> Option<Self> {
        let e1 = v[1] - v[0];
        let e2 = v[2] - v[0];
        let n = e1.cross(&e2);
        let len = n.norm();
        if !(len > 1e-14) {
            return None;
        }
        Some(Tri {
            v0: v[0],
            e1,
            e2,
            normal: n / len,
            surface,
        })
    }

    #[inline]
    fn intersect(&self, o: &Vec3, d: &Vec3) -> Option<f64> {
        let p = d.cross(&self.e2);
        let det = self.e1.dot(&p);
        if det.abs() < 1e-14 {
            return None;
        }
        let inv = 1.0 / det;
        let s = o - self.v0;
        let u = s.dot(&p) * inv;
        if !(0.0..=1.0).contains(&u) {
            return None;
        }
        let q = s.cross(&self.e1);
        let v = d.dot(&q) * inv;
        if v < 0.0 || u + v > 1.0 {
            return None;
        }
        Some(self.e2.dot(&q) * inv)
    }

    fn bounds(&self) -> Aabb {
        let a = self.v0;
        let b = self.v0 + self.e1;
        let c = self.v0 + self.e2;
        Aabb {
            lo: a.inf(&b).inf(&c),
            hi: a.sup(&b).sup(&c),
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Aabb {
    lo: Vec3,
    hi: Vec3,
}

impl Aabb {
    fn empty() -> Self {
        Aabb {
            lo: Vec3::repeat(f64::INFINITY),
            hi: Vec3::repeat(f64::NEG_INFINITY),
        }
    }

    fn grow(&mut self, o: &Aabb) {
        self.lo = self.lo.inf(&o.lo);
        self.hi = self.hi.sup(&o.hi);
    }

    fn grow_point(&mut self, p: &Vec3) {
        self.lo = self.lo.inf(p);
        self.hi = self.hi.sup(p);
    }

    fn area(&self) -> f64 {
        let e = self.hi - self.lo;
        if e.x < 0.0 {
            return 0.0;
        }
        2.0 * (e.x * e.y + e.y * e.z + e.z * e.x)
    }
}

#[derive(Debug, Clone, Copy)]
struct Node {
    lo: [f64; 3],
    hi: [f64; 3],
    /// Leaf: first triangle. Interior: left child (right child follows the
    /// left subtree, stored in `right`).
    first: u32,
    right: u32,
    count: u16,
    axis: u8,
}

/// A nearest-hit query result.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hit {
    /// Distance along the (unit) ray direction.
    pub t: f64,
    /// Index of the triangle in [`Accel`] order.
    pub triangle: u32,
}

/// Acceleration structure over a scene's world-space triangles.
#[derive(Debug, Clone)]
pub struct Accel {
    nodes: Vec<Node>,
    tris: Vec<Tri>,
    surfaces: Vec<Surface>,
}

impl Accel {
    pub fn build(scene: &Scene) -> Result<Self> {
        let mut surfaces: Vec<Surface> = Vec::new();
        let mut tris = Vec::with_capacity(scene.triangle_count());
        if let Some(g) = &scene.ground {
            surfaces.push(Surface {
                kind: g.material.kind,
                albedo: g.material.albedo,
                actor_id: None,
            });
            for t in g.triangles() {
                tris.extend(Tri::new(t, 0));
            }
        }
        for actor in &scene.actors {
            let base = surfaces.len() as u32;
            surfaces.extend(actor.mesh.materials.iter().map(|m| Surface {
                kind: m.kind,
                albedo: m.albedo,
                actor_id: Some(actor.id),
            }));
            let rot = actor.pose.rotation();
            for t in &actor.mesh.triangles {
                let v = t.vertices.map(|p| rot * p + actor.pose.translation);
                tris.extend(Tri::new(v, base + t.material as u32));
            }
        }
        if tris.is_empty() {
            return Err(Error::EmptyScene);
        }
        Ok(Self::from_tris(tris, surfaces))
    }

    fn from_tris(tris: Vec<Tri>, surfaces: Vec<Surface>) -> Self {
        let bounds: Vec<Aabb> = tris.iter().map(Tri::bounds).collect();
        let centroids: Vec<Vec3> = bounds.iter().map(|b| (b.lo + b.hi) * 0.5).collect();
        let mut order: Vec<u32> = (0..tris.len() as u32).collect();
        let mut nodes = Vec::with_capacity(2 * tris.len() / MAX_LEAF + 1);
        let mut builder = Builder {
            bounds: &bounds,
            centroids: &centroids,
            nodes: &mut nodes,
        };
        let n = order.len();
        builder.build(&mut order, 0, n);
        let tris = order.iter().map(|&i| tris[i as usize]).collect();
        Accel { nodes, tris, surfaces }
    }

    pub fn triangle_count(&self) -> usize {
        self.tris.len()
    }

    pub fn surface(&self, triangle: u32) -> &Surface {
        &self.surfaces[self.tris[triangle as usize].surface as usize]
    }

    /// Unit geometric normal of a triangle (winding dependent).
    pub fn normal(&self, triangle: u32) -> Vec3 {
        self.tris[triangle as usize].normal
    }

    /// Vertices of a triangle in world space.
    pub fn vertices(&self, triangle: u32) -> [Vec3; 3] {
        let t = &self.tris[triangle as usize];
        [t.v0, t.v0 + t.e1, t.v0 + t.e2]
    }

    /// Nearest intersection with `t_min < t <= t_max` along the unit
    /// direction `dir`. With `skip_glass`, glass triangles are invisible.
    pub fn intersect(&self, origin: &Vec3, dir: &Vec3, t_min: f64, t_max: f64, skip_glass: bool) -> Option<Hit> {
        let inv = Vec3::new(1.0 / dir.x, 1.0 / dir.y, 1.0 / dir.z);
        let mut best = t_max;
        let mut hit = None;
        let mut stack = [0u32; 64];
        let mut sp = 1usize;
        stack[0] = 0;
        while sp > 0 {
            sp -= 1;
            let node = &self.nodes[stack[sp] as usize];
            if !slab(node, origin, &inv, t_min, best) {
                continue;
            }
            if node.count > 0 {
                let start = node.first as usize;
                for (k, tri) in self.tris[start..start + node.count as usize].iter().enumerate() {
                    if skip_glass && self.surfaces[tri.surface as usize].kind == MaterialKind::Glass {
                        continue;
                    }
                    if let Some(t) = tri.intersect(origin, dir) {
                        if t > t_min && t <= best && (hit.is_none() || t < best) {
                            best = t;
                            hit = Some(Hit {
                                t,
                                triangle: (start + k) as u32,
                            });
                        }
                    }
                }
            } else {
                let (near, far) = if dir[node.axis as usize] < 0.0 {
                    (node.right, node.first)
                } else {
                    (node.first, node.right)
                };
                stack[sp] = far;
                stack[sp + 1] = near;
                sp += 2;
            }
        }
        hit
    }
}

#[inline]
fn slab(node: &Node, o: &Vec3, inv: &Vec3, t_min: f64, t_max: f64) -> bool {
    let mut t0 = t_min;
    let mut t1 = t_max;
    for k in 0..3 {
        let a = (node.lo[k] - o[k]) * inv[k];
        let b = (node.hi[k] - o[k]) * inv[k];
        // f64::min/max drop NaN, which keeps the test conservative
        t0 = t0.max(a.min(b));
        t1 = t1.min(a.max(b));
    }
    t0 <= t1
}

struct Builder<'a> {
    bounds: &'a [Aabb],
    centroids: &'a [Vec3],
    nodes: &'a mut Vec<Node>,
}

impl Builder<'_> {
    fn push_leaf(&mut self, b: &Aabb, start: usize, count: usize) -> u32 {
        self.nodes.push(Node {
            lo: [b.lo.x, b.lo.y, b.lo.z],
            hi: [b.hi.x, b.hi.y, b.hi.z],
            first: start as u32,
            right: 0,
            count: count as u16,
            axis: 0,
        });
        (self.nodes.len() - 1) as u32
    }

    fn build(&mut self, order: &mut [u32], start: usize, end: usize) -> u32 {
        let mut b = Aabb::empty();
        let mut cb = Aabb::empty();
        for &i in &order[start..end] {
            b.grow(&self.bounds[i as usize]);
            cb.grow_point(&self.centroids[i as usize]);
        }
        let n = end - start;
        if n <= MAX_LEAF {
            return self.push_leaf(&b, start, n);
        }

        let extent = cb.hi - cb.lo;
        let mut best: Option<(f64, usize, usize)> = None;
        for axis in 0..3 {
            if extent[axis] <= 1e-12 {
                continue;
            }
            let scale = BINS as f64 / extent[axis];
            let bin_of = |i: u32| {
                let c = self.centroids[i as usize][axis];
                (((c - cb.lo[axis]) * scale) as usize).min(BINS - 1)
            };
            let mut counts = [0usize; BINS];
            let mut boxes = [Aabb::empty(); BINS];
            for &i in &order[start..end] {
                let k = bin_of(i);
                counts[k] += 1;
                boxes[k].grow(&self.bounds[i as usize]);
            }
            let mut left_area = [0.0; BINS];
            let mut left_count = [0usize; BINS];
            let mut acc = Aabb::empty();
            let mut cnt = 0;
            for k in 0..BINS - 1 {
                acc.grow(&boxes[k]);
                cnt += counts[k];
                left_area[k] = acc.area();
                left_count[k] = cnt;
            }
            let mut acc = Aabb::empty();
            let mut cnt = 0;
            for k in (1..BINS).rev() {
                acc.grow(&boxes[k]);
                cnt += counts[k];
                let (ln, rn) = (left_count[k - 1], cnt);
                if ln == 0 || rn == 0 {
                    continue;
                }
                let cost = left_area[k - 1] * ln as f64 + acc.area() * rn as f64;
                if best.is_none_or(|(c, _, _)| cost < c) {
                    best = Some((cost, axis, k));
                }
            }
        }

        let (axis, mid) = match best {
            Some((cost, axis, split)) => {
                let leaf_cost = b.area() * n as f64;
                if cost >= leaf_cost && n <= 2 * MAX_LEAF {
                    return self.push_leaf(&b, start, n);
                }
                let scale = BINS as f64 / extent[axis];
                let lo = cb.lo[axis];
                let centroids = self.centroids;
                let slice = &mut order[start..end];
                let left = partition(slice, |i| {
                    let c = centroids[i as usize][axis];
                    ((((c - lo) * scale) as usize).min(BINS - 1)) < split
                });
                (axis, start + left)
            }
            None => {
                // all centroids coincide
                if n <= u16::MAX as usize && n <= 4 * MAX_LEAF {
                    return self.push_leaf(&b, start, n);
                }
                (0, start + n / 2)
            }
        };

        let idx = self.nodes.len();
        self.nodes.push(Node {
            lo: [b.lo.x, b.lo.y, b.lo.z],
            hi: [b.hi.x, b.hi.y, b.hi.z],
            first: 0,
            right: 0,
            count: 0,
            axis: axis as u8,
        });
        let left = self.build(order, start, mid);
        let right = self.build(order, mid, end);
        self.nodes[idx].first = left;
        self.nodes[idx].right = right;
        idx as u32
    }
}

fn partition(slice: &mut [u32], pred: impl Fn(u32) -> bool) -> usize {
    let mut i = 0;
    for j in 0..slice.len() {
        if pred(slice[j]) {
            slice.swap(i, j);
            i += 1;
        }
    }
    i
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Box3D, Pose};
    use crate::scene::{Actor, ActorKind, Material, Mesh};

    fn one_triangle_scene() -> Scene {
        let mut mesh = Mesh::default();
        let m = mesh.add_material(Material::named("Wall", 0.5).unwrap());
        mesh.push_triangle(
            Vec3::new(5.0, -1.0, -1.0),
            Vec3::new(5.0, 1.0, -1.0),
            Vec3::new(5.0, 0.0, 1.0),
            m,
        );
        let mut scene = Scene::empty(0);
        scene.actors.push(Actor {
            id: 1,
            kind: ActorKind::Static,
            mesh,
            pose: Pose::identity(),
            raw_box: Box3D::new(Vec3::new(5.0, 0.0, 0.0), Vec3::new(0.01, 2.0, 2.0), 0.0).unwrap(),
            reflectivity_scale: 1.0,
            brightness_scale: 1.0,
        });
        scene
    }

    #[test]
    fn empty_scene_is_an_error() {
        assert!(matches!(Accel::build(&Scene::empty(0)), Err(Error::EmptyScene)));
    }

    #[test]
    fn single_triangle_hit_and_miss() {
        let accel = Accel::build(&one_triangle_scene()).unwrap();
        let h = accel
            .intersect(&Vec3::zeros(), &Vec3::new(1.0, 0.0, 0.0), 0.0, 100.0, false)
            .unwrap();
        assert!((h.t - 5.0).abs() < 1e-12);
        assert_eq!(accel.surface(h.triangle).actor_id, Some(1));
        assert!(accel
            .intersect(&Vec3::zeros(), &Vec3::new(-1.0, 0.0, 0.0), 0.0, 100.0, false)
            .is_none());
        assert!(accel
            .intersect(&Vec3::zeros(), &Vec3::new(1.0, 0.0, 0.0), 0.0, 4.0, false)
            .is_none());
    }
}
