//! Vectors, rays, sphere intersection and the counter-based random stream.
//!
//! All lengths are millimeters. The optical axis is +z, pointing from the
//! scene toward the sensor.

use std::ops::{Add, AddAssign, Div, Index, Mul, Neg, Sub};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Self-intersection epsilon in millimeters.
pub const EPSILON: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const ZERO: Vec3 = Vec3::new(0.0, 0.0, 0.0);
    pub const Z: Vec3 = Vec3::new(0.0, 0.0, 1.0);

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn dot(self, o: Vec3) -> f64 {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    pub fn cross(self, o: Vec3) -> Vec3 {
        Vec3::new(
            self.y * o.z - self.z * o.y,
            self.z * o.x - self.x * o.z,
            self.x * o.y - self.y * o.x,
        )
    }

    pub fn length_squared(self) -> f64 {
        self.dot(self)
    }

    pub fn length(self) -> f64 {
        self.length_squared().sqrt()
    }

    pub fn normalized(self) -> Vec3 {
        self / self.length()
    }

    pub fn max_abs(self) -> f64 {
        self.x.abs().max(self.y.abs()).max(self.z.abs())
    }

    /// Any unit vector orthogonal to `self` (which must be unit length).
    pub fn any_orthogonal(self) -> Vec3 {
        let helper = if self.x.abs() < 0.9 {
            Vec3::new(1.0, 0.0, 0.0)
        } else {
            Vec3::new(0.0, 1.0, 0.0)
        };
        self.cross(helper).normalized()
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    fn add(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl AddAssign for Vec3 {
    fn add_assign(&mut self, o: Vec3) {
        *self = *self + o;
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    fn sub(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Neg for Vec3 {
    type Output = Vec3;
    fn neg(self) -> Vec3 {
        Vec3::new(-self.x, -self.y, -self.z)
    }
}

impl Mul<f64> for Vec3 {
    type Output = Vec3;
    fn mul(self, s: f64) -> Vec3 {
        Vec3::new(self.x * s, self.y * s, self.z * s)
    }
}

impl Mul<Vec3> for f64 {
    type Output = Vec3;
    fn mul(self, v: Vec3) -> Vec3 {
        v * self
    }
}

impl Div<f64> for Vec3 {
    type Output = Vec3;
    fn div(self, s: f64) -> Vec3 {
        Vec3::new(self.x / s, self.y / s, self.z / s)
    }
}

impl Index<usize> for Vec3 {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        match i {
            0 => &self.x,
            1 => &self.y,
            2 => &self.z,
            _ => panic!("Vec3 index {i} out of range"),
        }
    }
}

/// Linear RGB triple. Used for radiance, albedo and ray throughput.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "[f64; 3]", into = "[f64; 3]")]
pub struct Rgb(pub [f64; 3]);

impl Rgb {
    pub const BLACK: Rgb = Rgb([0.0; 3]);
    pub const WHITE: Rgb = Rgb([1.0; 3]);

    pub const fn new(r: f64, g: f64, b: f64) -> Self {
        Rgb([r, g, b])
    }

    pub const fn gray(v: f64) -> Self {
        Rgb([v, v, v])
    }

    pub fn scale(self, s: f64) -> Rgb {
        Rgb([self.0[0] * s, self.0[1] * s, self.0[2] * s])
    }

    /// Componentwise product.
    pub fn filter(self, o: Rgb) -> Rgb {
        Rgb([self.0[0] * o.0[0], self.0[1] * o.0[1], self.0[2] * o.0[2]])
    }

    pub fn is_black(self) -> bool {
        self.0.iter().all(|&c| c == 0.0)
    }

    pub fn max_component(self) -> f64 {
        self.0[0].max(self.0[1]).max(self.0[2])
    }

    pub fn min_component(self) -> f64 {
        self.0[0].min(self.0[1]).min(self.0[2])
    }

    pub fn luminance(self) -> f64 {
        (self.0[0] + self.0[1] + self.0[2]) / 3.0
    }
}

impl From<[f64; 3]> for Rgb {
    fn from(c: [f64; 3]) -> Self {
        Rgb(c)
    }
}

impl From<Rgb> for [f64; 3] {
    fn from(c: Rgb) -> Self {
        c.0
    }
}

impl Add for Rgb {
    type Output = Rgb;
    fn add(self, o: Rgb) -> Rgb {
        Rgb([self.0[0] + o.0[0], self.0[1] + o.0[1], self.0[2] + o.0[2]])
    }
}

impl AddAssign for Rgb {
    fn add_assign(&mut self, o: Rgb) {
        *self = *self + o;
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ray {
    pub origin: Vec3,
    /// Unit length.
    pub direction: Vec3,
    pub throughput: Rgb,
}

impl Ray {
    /// Creates a ray with unit throughput; `direction` is normalized.
    pub fn new(origin: Vec3, direction: Vec3) -> Self {
        Self {
            origin,
            direction: direction.normalized(),
            throughput: Rgb::WHITE,
        }
    }

    pub fn at(&self, t: f64) -> Vec3 {
        self.origin + self.direction * t
    }

    /// Parameter at which the ray crosses the plane `z = plane_z`, if ahead of the origin.
    pub fn t_at_z(&self, plane_z: f64) -> Option<f64> {
        if self.direction.z == 0.0 {
            return None;
        }
        let t = (plane_z - self.origin.z) / self.direction.z;
        (t > EPSILON).then_some(t)
    }

    pub fn reversed(&self) -> Ray {
        Ray {
            origin: self.origin,
            direction: -self.direction,
            throughput: self.throughput,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SphereHit {
    pub t: f64,
    pub point: Vec3,
    /// Outward normal (points away from the sphere center).
    pub normal: Vec3,
}

/// Nearest intersection with `t > EPSILON` of a ray and a full sphere.
pub fn intersect_sphere(ray: &Ray, center: Vec3, radius: f64) -> Option<SphereHit> {
    let oc = ray.origin - center;
    let b = oc.dot(ray.direction);
    let c = oc.length_squared() - radius * radius;
    let disc = b * b - c;
    if disc < 0.0 {
        return None;
    }
    let sq = disc.sqrt();
    // Numerically stable pair of roots.
    let q = if b > 0.0 { -b - sq } else { -b + sq };
    let (mut t0, mut t1) = if q != 0.0 { (q, c / q) } else { (-b, -b) };
    if t0 > t1 {
        std::mem::swap(&mut t0, &mut t1);
    }
    let t = if t0 > EPSILON {
        t0
    } else if t1 > EPSILON {
        t1
    } else {
        return None;
    };
    let point = ray.at(t);
    Some(SphereHit {
        t,
        point,
        normal: (point - center) / radius,
    })
}

/// Counter-based random stream.
///
/// The numbers drawn depend only on `(seed, stream, counter)` and the draw
/// position within that sample, so any pixel sample can be reproduced in
/// isolation and the render is independent of thread scheduling.
#[derive(Clone, Debug)]
pub struct RandomStream {
    rng: ChaCha8Rng,
}

/// Words reserved per sample; one f64 draw consumes two.
const WORDS_PER_SAMPLE: u128 = 1 << 20;

impl RandomStream {
    pub fn new(seed: u64, stream: u64, counter: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        rng.set_word_pos(counter as u128 * WORDS_PER_SAMPLE);
        Self { rng }
    }

    /// Uniform in [0, 1).
    pub fn next_f64(&mut self) -> f64 {
        self.rng.gen::<f64>()
    }

    pub fn next_2d(&mut self) -> (f64, f64) {
        let u = self.next_f64();
        (u, self.next_f64())
    }
}

/// Uniform point on a disk of the given radius centered at the origin.
pub fn sample_disk(rand: &mut RandomStream, radius: f64) -> (f64, f64) {
    let (u, v) = rand.next_2d();
    let r = radius * u.sqrt();
    let phi = 2.0 * std::f64::consts::PI * v;
    (r * phi.cos(), r * phi.sin())
}

/// Cosine-weighted direction on the hemisphere around unit `normal`.
pub fn sample_cosine_hemisphere(rand: &mut RandomStream, normal: Vec3) -> Vec3 {
    let (x, y) = sample_disk(rand, 1.0);
    let z = (1.0 - x * x - y * y).max(0.0).sqrt();
    let t = normal.any_orthogonal();
    let b = normal.cross(t);
    (t * x + b * y + normal * z).normalized()
}
