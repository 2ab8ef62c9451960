use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(&self, other: &Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

impl From<[f64; 2]> for Point {
    fn from([x, y]: [f64; 2]) -> Self {
        Self { x, y }
    }
}

impl From<Point> for [f64; 2] {
    fn from(p: Point) -> Self {
        [p.x, p.y]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Disk {
    pub center: Point,
    pub radius: f64,
}

impl Disk {
    pub const fn new(center: Point, radius: f64) -> Self {
        Self { center, radius }
    }

    /// Closed containment.
    pub fn contains_point(&self, p: &Point) -> bool {
        self.center.distance(p) <= self.radius
    }

    /// `other` lies entirely inside `self` (boundary contact allowed).
    pub fn contains_disk(&self, other: &Disk) -> bool {
        self.center.distance(&other.center) + other.radius <= self.radius
    }

    /// Open intersection: tangent disks do not intersect.
    pub fn intersects(&self, other: &Disk) -> bool {
        self.center.distance(&other.center) < self.radius + other.radius
    }
}
