//! County polygons and point containment.

use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::{normalize_fips, read_file, IngestError};

/// A closed ring of `(longitude, latitude)` vertices; first equals last.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ring(pub Vec<(f64, f64)>);

impl Ring {
    pub fn new(vertices: Vec<(f64, f64)>) -> Result<Self, String> {
        if vertices.len() < 4 {
            return Err(format!(
                "ring has {} vertices, need at least 4",
                vertices.len()
            ));
        }
        if vertices.first() != vertices.last() {
            return Err("ring is not closed".into());
        }
        if vertices
            .iter()
            .any(|(x, y)| !x.is_finite() || !y.is_finite())
        {
            return Err("ring has a non-finite vertex".into());
        }
        Ok(Self(vertices))
    }

    pub fn edges(&self) -> impl Iterator<Item = ((f64, f64), (f64, f64))> + '_ {
        self.0.windows(2).map(|w| (w[0], w[1]))
    }
}

/// An exterior ring with zero or more holes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Polygon {
    pub exterior: Ring,
    pub holes: Vec<Ring>,
}

impl Polygon {
    fn rings(&self) -> impl Iterator<Item = &Ring> {
        std::iter::once(&self.exterior).chain(&self.holes)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundingBox {
    pub min: (f64, f64),
    pub max: (f64, f64),
}

impl BoundingBox {
    pub fn contains(&self, (x, y): (f64, f64)) -> bool {
        x >= self.min.0 && x <= self.max.0 && y >= self.min.1 && y <= self.max.1
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountyShape {
    pub fips: String,
    pub polygons: Vec<Polygon>,
}

impl CountyShape {
    pub fn new(fips: impl Into<String>, polygons: Vec<Polygon>) -> Self {
        Self {
            fips: fips.into(),
            polygons,
        }
    }

    pub fn bounding_box(&self) -> BoundingBox {
        let mut min = (f64::INFINITY, f64::INFINITY);
        let mut max = (f64::NEG_INFINITY, f64::NEG_INFINITY);
        for &(x, y) in self.polygons.iter().flat_map(|p| p.exterior.0.iter()) {
            min = (min.0.min(x), min.1.min(y));
            max = (max.0.max(x), max.1.max(y));
        }
        BoundingBox { min, max }
    }

    fn rings(&self) -> impl Iterator<Item = &Ring> {
        self.polygons.iter().flat_map(Polygon::rings)
    }
}

fn on_segment(p: (f64, f64), a: (f64, f64), b: (f64, f64)) -> bool {
    let cross = (b.0 - a.0) * (p.1 - a.1) - (b.1 - a.1) * (p.0 - a.0);
    let scale = (b.0 - a.0).abs().max((b.1 - a.1).abs()).max(1.0);
    cross.abs() <= 1e-12 * scale * scale
        && p.0 >= a.0.min(b.0)
        && p.0 <= a.0.max(b.0)
        && p.1 >= a.1.min(b.1)
        && p.1 <= a.1.max(b.1)
}

/// Even-odd containment over every ring of `shape`.
///
/// Points on any edge, hole edges included, count as inside.
pub fn point_in_polygon(pt: (f64, f64), shape: &CountyShape) -> bool {
    let mut inside = false;
    for ring in shape.rings() {
        for (a, b) in ring.edges() {
            if on_segment(pt, a, b) {
                return true;
            }
            if (a.1 > pt.1) != (b.1 > pt.1) {
                let x_cross = a.0 + (pt.1 - a.1) * (b.0 - a.0) / (b.1 - a.1);
                if pt.0 < x_cross {
                    inside = !inside;
                }
            }
        }
    }
    inside
}

pub fn parse_counties_geojson(path: &Path) -> Result<Vec<CountyShape>, IngestError> {
    parse_counties_geojson_str(&read_file(path)?)
}

/// Parses a feature collection of `Polygon`/`MultiPolygon` features carrying
/// a `fips` property. Shapes are returned in ascending fips order.
pub fn parse_counties_geojson_str(text: &str) -> Result<Vec<CountyShape>, IngestError> {
    let root: Value =
        serde_json::from_str(text).map_err(|e| IngestError::MalformedJson(e.to_string()))?;
    let features = root
        .get("features")
        .and_then(Value::as_array)
        .ok_or_else(|| {
            IngestError::MalformedJson("expected a FeatureCollection with `features`".into())
        })?;

    let mut shapes = Vec::with_capacity(features.len());
    for (i, feature) in features.iter().enumerate() {
        let raw_fips = match feature.pointer("/properties/fips") {
            Some(Value::String(s)) => s.clone(),
            Some(Value::Number(n)) => n.to_string(),
            _ => {
                return Err(IngestError::MalformedJson(format!(
                    "feature {i} has no `fips` property"
                )))
            }
        };
        let fips = normalize_fips(&raw_fips).ok_or_else(|| IngestError::InvalidGeometry {
            fips: raw_fips.clone(),
            reason: "fips is not a 1-5 digit code".into(),
        })?;
        let bad = |reason: String| IngestError::InvalidGeometry {
            fips: fips.clone(),
            reason,
        };
        let geometry = feature
            .get("geometry")
            .ok_or_else(|| bad("missing geometry".into()))?;
        let coords = geometry
            .get("coordinates")
            .ok_or_else(|| bad("missing coordinates".into()))?;
        let polygons = match geometry.get("type").and_then(Value::as_str) {
            Some("Polygon") => vec![polygon_from(coords).map_err(bad)?],
            Some("MultiPolygon") => coords
                .as_array()
                .ok_or_else(|| bad("MultiPolygon coordinates are not an array".into()))?
                .iter()
                .map(polygon_from)
                .collect::<Result<_, _>>()
                .map_err(bad)?,
            other => return Err(bad(format!("unsupported geometry type {other:?}"))),
        };
        shapes.push(CountyShape::new(fips, polygons));
    }
    shapes.sort_by(|a, b| a.fips.cmp(&b.fips));
    if let Some(w) = shapes.windows(2).find(|w| w[0].fips == w[1].fips) {
        return Err(IngestError::DuplicateFips(w[0].fips.clone()));
    }
    Ok(shapes)
}

fn polygon_from(coords: &Value) -> Result<Polygon, String> {
    let rings = coords
        .as_array()
        .ok_or("polygon coordinates are not an array")?;
    let mut rings = rings.iter().map(ring_from);
    let exterior = rings.next().ok_or("polygon has no rings")??;
    let holes = rings.collect::<Result<Vec<_>, _>>()?;
    Ok(Polygon { exterior, holes })
}

fn ring_from(coords: &Value) -> Result<Ring, String> {
    let pts = coords.as_array().ok_or("ring is not an array")?;
    let vertices = pts
        .iter()
        .map(|p| match p.as_array().map(|a| a.as_slice()) {
            Some([x, y, ..]) => match (x.as_f64(), y.as_f64()) {
                (Some(x), Some(y)) => Ok((x, y)),
                _ => Err("vertex coordinates must be numbers".to_string()),
            },
            _ => Err("vertex must be a [lon, lat] pair".to_string()),
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ring::new(vertices)
}
