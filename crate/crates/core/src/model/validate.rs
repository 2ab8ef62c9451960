use std::collections::HashSet;
use std::fmt;

use serde::Serialize;

use super::instance::{AuctionInstance, GeometryMode, Location};

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ValidationIssue {
    NonPositiveHorizon { horizon: i64 },
    DuplicateChannelId { channel: usize },
    NonPositiveInterferenceRadius { channel: usize },
    NonPositiveLicenseRadius { channel: usize, area: usize },
    OverlappingLicenseAreas { channel: usize, first: usize, second: usize },
    DuplicateRequestId { request: usize },
    WindowOutsideHorizon { request: usize },
    EmptyWindow { request: usize },
    NonPositiveDuration { request: usize },
    NotFixedInterval { request: usize, window: i64, duration: i64 },
    NegativeBid { request: usize },
    NegativeValuation { request: usize },
    NonFinite { request: usize },
    GeometryMismatch { request: usize },
    NonPositiveAreaRadius { request: usize },
}

impl fmt::Display for ValidationIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use ValidationIssue::*;
        match self {
            NonPositiveHorizon { horizon } => write!(f, "horizon {horizon} must be positive"),
            DuplicateChannelId { channel } => write!(f, "channel id {channel} is used twice"),
            NonPositiveInterferenceRadius { channel } => {
                write!(f, "channel {channel}: interference radius must be positive")
            }
            NonPositiveLicenseRadius { channel, area } => {
                write!(f, "channel {channel}: license area {area} has non-positive radius")
            }
            OverlappingLicenseAreas { channel, first, second } => write!(
                f,
                "channel {channel}: license areas {first} and {second} overlap"
            ),
            DuplicateRequestId { request } => write!(f, "request id {request} is used twice"),
            WindowOutsideHorizon { request } => {
                write!(f, "request {request}: window must lie inside [0, horizon]")
            }
            EmptyWindow { request } => {
                write!(f, "request {request}: arrival must precede deadline")
            }
            NonPositiveDuration { request } => {
                write!(f, "request {request}: duration must be positive")
            }
            NotFixedInterval { request, window, duration } => write!(
                f,
                "request {request}: deadline - arrival = {window} but duration = {duration} \
                 (only fixed intervals with deadline - arrival = duration are supported)"
            ),
            NegativeBid { request } => write!(f, "request {request}: bid must be non-negative"),
            NegativeValuation { request } => {
                write!(f, "request {request}: valuation must be non-negative")
            }
            NonFinite { request } => write!(f, "request {request}: non-finite number"),
            GeometryMismatch { request } => write!(
                f,
                "request {request}: location kind does not match the instance geometry mode"
            ),
            NonPositiveAreaRadius { request } => {
                write!(f, "request {request}: area radius must be positive")
            }
        }
    }
}

/// Every violated invariant of an instance; empty when the instance is valid.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ValidationReport {
    pub issues: Vec<ValidationIssue>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.issues.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.issues.is_empty() {
            return write!(f, "instance is valid");
        }
        for issue in &self.issues {
            writeln!(f, "- {issue}")?;
        }
        Ok(())
    }
}

pub fn validate_instance(instance: &AuctionInstance) -> ValidationReport {
    use ValidationIssue::*;
    let mut issues = Vec::new();

    if instance.horizon <= 0 {
        issues.push(NonPositiveHorizon { horizon: instance.horizon });
    }

    let mut seen = HashSet::new();
    for ch in &instance.channels {
        if !seen.insert(ch.id) {
            issues.push(DuplicateChannelId { channel: ch.id });
        }
        if !(ch.interference_radius > 0.0) || !ch.interference_radius.is_finite() {
            issues.push(NonPositiveInterferenceRadius { channel: ch.id });
        }
        for (a, disk) in ch.license_areas.iter().enumerate() {
            if !(disk.radius > 0.0) || !disk.radius.is_finite() {
                issues.push(NonPositiveLicenseRadius { channel: ch.id, area: a });
            }
        }
        for a in 0..ch.license_areas.len() {
            for b in (a + 1)..ch.license_areas.len() {
                if ch.license_areas[a].intersects(&ch.license_areas[b]) {
                    issues.push(OverlappingLicenseAreas { channel: ch.id, first: a, second: b });
                }
            }
        }
    }

    let mut seen = HashSet::new();
    for r in &instance.requests {
        let id = r.id;
        if !seen.insert(id) {
            issues.push(DuplicateRequestId { request: id });
        }
        let disk = r.location.as_disk();
        if ![r.bid, r.valuation, disk.center.x, disk.center.y, disk.radius]
            .iter()
            .all(|v| v.is_finite())
        {
            issues.push(NonFinite { request: id });
        }
        match (instance.geometry_mode, &r.location) {
            (GeometryMode::PointModel, Location::Point(_)) => {}
            (GeometryMode::AreaModel, Location::Area(d)) => {
                if !(d.radius > 0.0) {
                    issues.push(NonPositiveAreaRadius { request: id });
                }
            }
            _ => issues.push(GeometryMismatch { request: id }),
        }
        if r.arrival < 0 || r.deadline > instance.horizon {
            issues.push(WindowOutsideHorizon { request: id });
        }
        if r.arrival >= r.deadline {
            issues.push(EmptyWindow { request: id });
        }
        if r.duration <= 0 {
            issues.push(NonPositiveDuration { request: id });
        }
        if r.deadline - r.arrival != r.duration {
            issues.push(NotFixedInterval {
                request: id,
                window: r.deadline - r.arrival,
                duration: r.duration,
            });
        }
        if r.bid < 0.0 {
            issues.push(NegativeBid { request: id });
        }
        if r.valuation < 0.0 {
            issues.push(NegativeValuation { request: id });
        }
    }

    ValidationReport { issues }
}
