use serde::{Deserialize, Serialize};

use super::instance::{AuctionInstance, Minutes};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TimeSlice {
    pub start: Minutes,
    pub end: Minutes,
}

impl TimeSlice {
    pub fn len(&self) -> Minutes {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.end <= self.start
    }
}

/// Inclusive range of slice indices on one channel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SliceRange {
    pub first: usize,
    pub last: usize,
}

impl SliceRange {
    pub fn iter(&self) -> std::ops::RangeInclusive<usize> {
        self.first..=self.last
    }

    pub fn len(&self) -> usize {
        self.last + 1 - self.first
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, l: usize) -> bool {
        self.first <= l && l <= self.last
    }
}

/// Per-channel segmentation of `[0, T]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timeline {
    pub slices: Vec<Vec<TimeSlice>>,
    /// `windows[i][j]`: slices covering request `i` on channel `j`, present
    /// only when the request is eligible there.
    pub windows: Vec<Vec<Option<SliceRange>>>,
}

/// Eligibility matrix, conflict tensor and time slices of one instance.
#[derive(Debug, Clone, PartialEq)]
pub struct ConflictStructure {
    n: usize,
    m: usize,
    location: Vec<bool>,
    conflict: Vec<bool>,
    timeline: Timeline,
}

impl ConflictStructure {
    pub fn build(instance: &AuctionInstance) -> Self {
        let location = build_location_matrix(instance);
        let conflict = build_conflict_tensor(instance);
        let timeline = segment_timeline(instance);
        let n = instance.n_requests();
        let m = instance.n_channels();
        Self {
            n,
            m,
            location: location.into_iter().flatten().collect(),
            conflict: conflict.into_iter().flatten().flatten().collect(),
            timeline,
        }
    }

    pub fn n_requests(&self) -> usize {
        self.n
    }

    pub fn n_channels(&self) -> usize {
        self.m
    }

    /// `c_{i,j}`.
    #[inline]
    pub fn eligible(&self, i: usize, j: usize) -> bool {
        self.location[i * self.m + j]
    }

    /// `y_{i,k,j}`.
    #[inline]
    pub fn conflicts(&self, i: usize, k: usize, j: usize) -> bool {
        self.conflict[(i * self.n + k) * self.m + j]
    }

    pub fn slices(&self, j: usize) -> &[TimeSlice] {
        &self.timeline.slices[j]
    }

    pub fn window(&self, i: usize, j: usize) -> Option<SliceRange> {
        self.timeline.windows[i][j]
    }

    pub fn timeline(&self) -> &Timeline {
        &self.timeline
    }

    /// Requests conflicting with `i` on channel `j`.
    pub fn neighbours(&self, i: usize, j: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.n).filter(move |&k| self.conflicts(i, k, j))
    }
}

/// `c_{i,j}`: the request can be served inside a license disk of channel `j`.
pub fn build_location_matrix(instance: &AuctionInstance) -> Vec<Vec<bool>> {
    (0..instance.n_requests())
        .map(|i| (0..instance.n_channels()).map(|j| instance.is_eligible(i, j)).collect())
        .collect()
}

/// `y_{i,k,j}`: spatial interference on channel `j` and overlapping windows.
pub fn build_conflict_tensor(instance: &AuctionInstance) -> Vec<Vec<Vec<bool>>> {
    let n = instance.n_requests();
    let m = instance.n_channels();
    let mut y = vec![vec![vec![false; m]; n]; n];
    for i in 0..n {
        for k in (i + 1)..n {
            if !instance.requests[i].overlaps(&instance.requests[k]) {
                continue;
            }
            for j in 0..m {
                if instance.interferes(i, k, j) {
                    y[i][k][j] = true;
                    y[k][i][j] = true;
                }
            }
        }
    }
    y
}

/// Cuts each channel's `[0, T]` at the endpoints of the requests eligible on it.
pub fn segment_timeline(instance: &AuctionInstance) -> Timeline {
    let n = instance.n_requests();
    let m = instance.n_channels();
    let mut slices = Vec::with_capacity(m);
    let mut windows = vec![vec![None; m]; n];

    for j in 0..m {
        let eligible: Vec<usize> = (0..n).filter(|&i| instance.is_eligible(i, j)).collect();
        let mut cuts = vec![0, instance.horizon];
        for &i in &eligible {
            let r = &instance.requests[i];
            cuts.push(r.arrival);
            cuts.push(r.deadline);
        }
        cuts.sort_unstable();
        cuts.dedup();
        let channel_slices: Vec<TimeSlice> = cuts
            .windows(2)
            .map(|w| TimeSlice { start: w[0], end: w[1] })
            .collect();

        for &i in &eligible {
            let r = &instance.requests[i];
            let first = channel_slices.partition_point(|s| s.start < r.arrival);
            let last = channel_slices.partition_point(|s| s.end <= r.deadline);
            if first < last {
                windows[i][j] = Some(SliceRange { first, last: last - 1 });
            }
        }
        slices.push(channel_slices);
    }

    Timeline { slices, windows }
}
