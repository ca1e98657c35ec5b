use serde::de::{self, Deserializer};
use serde::ser::Serializer;
use serde::{Deserialize, Serialize};

use super::{ConvexBody, Shape};
use crate::error::{Error, Result};
use crate::numerics::Matrix;

/// `p` as written in body files: a number or the string `"inf"`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PValue(pub f64);

impl Serialize for PValue {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        if self.0.is_infinite() {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(self.0)
        }
    }
}

impl<'de> Deserialize<'de> for PValue {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Str(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(v) => Ok(PValue(v)),
            Raw::Str(s) if s == "inf" => Ok(PValue(f64::INFINITY)),
            Raw::Str(s) => Err(de::Error::custom(format!("p must be a number or \"inf\", got {s:?}"))),
        }
    }
}

/// On-disk body description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BodyFile {
    pub dim: usize,
    #[serde(rename = "type")]
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub facets: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generators: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<PValue>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inner: Option<Box<BodyFile>>,
}

impl BodyFile {
    pub fn from_body(k: &ConvexBody) -> Self {
        let mut f = BodyFile {
            dim: k.dim(),
            kind: k.variant_name().to_string(),
            facets: None,
            generators: None,
            p: None,
            radius: None,
            matrix: None,
            inner: None,
        };
        match k.shape() {
            Shape::PolytopeH { facets } => f.facets = Some(facets.clone()),
            Shape::PolytopeV { generators } => f.generators = Some(generators.clone()),
            Shape::LpBall { p, radius } => {
                f.p = Some(PValue(*p));
                f.radius = Some(*radius);
            }
            Shape::LinearImage { map, inner, .. } => {
                f.matrix = Some(map.to_rows());
                f.inner = Some(Box::new(BodyFile::from_body(inner)));
            }
        }
        f
    }

    pub fn to_body(&self) -> Result<ConvexBody> {
        let present = [
            ("facets", self.facets.is_some()),
            ("generators", self.generators.is_some()),
            ("p", self.p.is_some()),
            ("radius", self.radius.is_some()),
            ("matrix", self.matrix.is_some()),
            ("inner", self.inner.is_some()),
        ];
        let allowed: &[&str] = match self.kind.as_str() {
            "polytope_h" => &["facets"],
            "polytope_v" => &["generators"],
            "lp_ball" => &["p", "radius"],
            "linear_image" => &["matrix", "inner"],
            other => return Err(Error::InvalidBody(format!("unknown body type {other:?}"))),
        };
        for (name, is_set) in present {
            if is_set && !allowed.contains(&name) {
                return Err(Error::InvalidBody(format!("field {name:?} does not apply to type {:?}", self.kind)));
            }
        }
        let missing = |name: &str| Error::InvalidBody(format!("type {:?} requires field {name:?}", self.kind));
        let body = match self.kind.as_str() {
            "polytope_h" => ConvexBody::polytope_h(self.facets.clone().ok_or_else(|| missing("facets"))?)?,
            "polytope_v" => ConvexBody::polytope_v(self.generators.clone().ok_or_else(|| missing("generators"))?)?,
            "lp_ball" => {
                let p = self.p.ok_or_else(|| missing("p"))?.0;
                ConvexBody::lp_ball(self.dim, p, self.radius.unwrap_or(1.0))?
            }
            _ => {
                let t = Matrix::from_rows(self.matrix.as_ref().ok_or_else(|| missing("matrix"))?)?;
                let inner = self.inner.as_ref().ok_or_else(|| missing("inner"))?.to_body()?;
                ConvexBody::wrapped(t, inner)?
            }
        };
        if body.dim() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: body.dim() });
        }
        Ok(body)
    }
}

impl Serialize for ConvexBody {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        BodyFile::from_body(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for ConvexBody {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        BodyFile::deserialize(d)?.to_body().map_err(de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trips() {
        let t = Matrix::from_rows(&[vec![2.0, 0.5], vec![0.0, 1.0]]).unwrap();
        let bodies = vec![
            ConvexBody::cube(3),
            ConvexBody::cross_polytope(2),
            ConvexBody::lp_ball(2, f64::INFINITY, 2.0).unwrap(),
            ConvexBody::lp_ball(4, 3.5, 1.0).unwrap(),
            ConvexBody::wrapped(t, ConvexBody::lp_ball(2, 1.5, 1.0).unwrap()).unwrap(),
        ];
        for k in bodies {
            let text = serde_json::to_string(&k).unwrap();
            let back: ConvexBody = serde_json::from_str(&text).unwrap();
            assert_eq!(back, k, "{text}");
        }
    }

    #[test]
    fn parses_written_forms() {
        let k: ConvexBody = serde_json::from_str(r#"{"dim":2,"type":"lp_ball","p":"inf","radius":1}"#).unwrap();
        assert_eq!(k.norm(&[3.0, -4.0]), 4.0);
        let k: ConvexBody =
            serde_json::from_str(r#"{"dim":2,"type":"polytope_h","facets":[[0.5,0],[0,1]]}"#).unwrap();
        assert_eq!(k.norm(&[2.0, 0.5]), 1.0);
    }

    #[test]
    fn rejects_bad_files() {
        let bad = [
            r#"{"dim":2,"type":"polytope_h","facets":[[1,0],[0,1]],"extra":1}"#,
            r#"{"dim":2,"type":"polytope_h","generators":[[1,0],[0,1]]}"#,
            r#"{"dim":3,"type":"polytope_h","facets":[[1,0],[0,1]]}"#,
            r#"{"dim":2,"type":"simplex","facets":[[1,0],[0,1]]}"#,
            r#"{"dim":2,"type":"lp_ball","p":"infinity"}"#,
            r#"{"dim":2,"type":"polytope_v","generators":[[1,0],[2,0]]}"#,
        ];
        for text in bad {
            assert!(serde_json::from_str::<ConvexBody>(text).is_err(), "{text}");
        }
    }
}
