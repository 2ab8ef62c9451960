use serde::{Deserialize, Serialize};

use super::geometry::{Disk, Point};

/// Times are whole minutes so slice arithmetic is exact.
pub type Minutes = i64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GeometryMode {
    #[serde(alias = "point")]
    PointModel,
    #[serde(alias = "area")]
    AreaModel,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Channel {
    pub id: usize,
    pub interference_radius: f64,
    pub license_areas: Vec<Disk>,
}

impl Channel {
    pub fn new(id: usize, interference_radius: f64, license_areas: Vec<Disk>) -> Self {
        Self {
            id,
            interference_radius,
            license_areas,
        }
    }
}

/// Where a buyer wants to transmit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Location {
    Point(Point),
    Area(Disk),
}

impl Location {
    /// Points are treated as zero-radius disks.
    pub fn as_disk(&self) -> Disk {
        match *self {
            Location::Point(p) => Disk::new(p, 0.0),
            Location::Area(d) => d,
        }
    }

    pub fn center(&self) -> Point {
        self.as_disk().center
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Request {
    pub id: usize,
    pub location: Location,
    pub bid: f64,
    /// True valuation; only the simulator and truthfulness tests read it.
    pub valuation: f64,
    pub arrival: Minutes,
    pub deadline: Minutes,
    pub duration: Minutes,
}

impl Request {
    /// Request with a fixed window `[arrival, arrival + duration)` and a
    /// truthful bid.
    pub fn new(id: usize, location: Location, bid: f64, arrival: Minutes, duration: Minutes) -> Self {
        Self {
            id,
            location,
            bid,
            valuation: bid,
            arrival,
            deadline: arrival + duration,
            duration,
        }
    }

    /// Half-open window overlap.
    pub fn overlaps(&self, other: &Request) -> bool {
        self.arrival < other.deadline && other.arrival < self.deadline
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuctionInstance {
    pub horizon: Minutes,
    pub geometry_mode: GeometryMode,
    pub channels: Vec<Channel>,
    pub requests: Vec<Request>,
}

impl AuctionInstance {
    pub fn n_requests(&self) -> usize {
        self.requests.len()
    }

    pub fn n_channels(&self) -> usize {
        self.channels.len()
    }

    pub fn bids(&self) -> Vec<f64> {
        self.requests.iter().map(|r| r.bid).collect()
    }

    pub fn valuations(&self) -> Vec<f64> {
        self.requests.iter().map(|r| r.valuation).collect()
    }

    /// Copy of the instance restricted to the requests at `keep`, in that order.
    pub fn subset(&self, keep: &[usize]) -> AuctionInstance {
        AuctionInstance {
            horizon: self.horizon,
            geometry_mode: self.geometry_mode,
            channels: self.channels.clone(),
            requests: keep.iter().map(|&i| self.requests[i].clone()).collect(),
        }
    }

    /// Request indices sorted by arrival, ties by id.
    pub fn arrival_order(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.requests.len()).collect();
        order.sort_by_key(|&i| (self.requests[i].arrival, self.requests[i].id, i));
        order
    }

    /// Whether request `i` may transmit on channel `j` at all.
    pub fn is_eligible(&self, i: usize, j: usize) -> bool {
        let area = self.requests[i].location.as_disk();
        self.channels[j].license_areas.iter().any(|lic| match self.geometry_mode {
            GeometryMode::PointModel => lic.contains_point(&area.center),
            GeometryMode::AreaModel => lic.contains_disk(&area),
        })
    }

    /// Spatial interference between two requests on channel `j`.
    pub fn interferes(&self, i: usize, k: usize, j: usize) -> bool {
        let (a, b) = (&self.requests[i].location, &self.requests[k].location);
        match self.geometry_mode {
            GeometryMode::PointModel => {
                a.center().distance(&b.center()) < 2.0 * self.channels[j].interference_radius
            }
            GeometryMode::AreaModel => a.as_disk().intersects(&b.as_disk()),
        }
    }
}
