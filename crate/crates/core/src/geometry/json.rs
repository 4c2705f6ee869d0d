use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use super::polytope::Polytope;
use super::{GeometryError, HalfSpace};

/// Wire form `{"dim":n, "hrep":[[a…,b]…], "vrep":[[x…]…]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolytopeJson {
    pub dim: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hrep: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vrep: Option<Vec<Vec<f64>>>,
}

impl From<&Polytope> for PolytopeJson {
    fn from(p: &Polytope) -> Self {
        PolytopeJson {
            dim: p.dim(),
            hrep: p
                .hrep()
                .map(|rows| rows.iter().map(|r| r.normal.iter().copied().chain([r.offset]).collect()).collect()),
            vrep: p.vrep().map(|v| v.iter().map(|x| x.iter().copied().collect()).collect()),
        }
    }
}

impl TryFrom<&PolytopeJson> for Polytope {
    type Error = GeometryError;

    /// Half-spaces take precedence; vertices are kept alongside them above
    /// dimension 2 where they cannot be recomputed.
    fn try_from(j: &PolytopeJson) -> Result<Self, GeometryError> {
        let n = j.dim;
        let vertices = match &j.vrep {
            Some(vs) => Some(
                vs.iter()
                    .map(|x| {
                        if x.len() != n {
                            Err(GeometryError::DimensionMismatch { expected: n, found: x.len() })
                        } else {
                            Ok(DVector::from_row_slice(x))
                        }
                    })
                    .collect::<Result<Vec<_>, _>>()?,
            ),
            None => None,
        };
        match &j.hrep {
            Some(rows) => {
                let rows = rows
                    .iter()
                    .map(|r| {
                        if r.len() != n + 1 {
                            Err(GeometryError::DimensionMismatch { expected: n + 1, found: r.len() })
                        } else {
                            Ok(HalfSpace::from_slice(&r[..n], r[n]))
                        }
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                let p = Polytope::from_hrep(n, rows)?;
                match vertices {
                    Some(v) if n > 2 => {
                        Polytope::from_raw_parts(n, p.hrep().map(|r| r.to_vec()), Some(v))?.canonicalize()
                    }
                    _ => Ok(p),
                }
            }
            None => match vertices {
                Some(v) => Polytope::from_points(n, &v),
                None => Err(GeometryError::Invalid("polytope needs hrep or vrep".into())),
            },
        }
    }
}

impl Serialize for Polytope {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        PolytopeJson::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for Polytope {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let j = PolytopeJson::deserialize(d)?;
        Polytope::try_from(&j).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_square() {
        let sq = Polytope::ball(2, 1.0);
        let text = serde_json::to_string(&sq).unwrap();
        let back: Polytope = serde_json::from_str(&text).unwrap();
        assert!(back.approx_eq(&sq, 1e-12));
        assert_eq!(text, serde_json::to_string(&back).unwrap());
    }

    #[test]
    fn vertices_only_input() {
        let p: Polytope = serde_json::from_str(r#"{"dim":1,"vrep":[[-1.0],[0.3],[1.0]]}"#).unwrap();
        assert!(p.approx_eq(&Polytope::interval(-1.0, 1.0).unwrap(), 0.0));
    }

    #[test]
    fn malformed_rows_rejected() {
        let err = serde_json::from_str::<Polytope>(r#"{"dim":2,"hrep":[[1.0,1.0]]}"#).unwrap_err();
        assert!(err.to_string().contains("dimension mismatch"));
        assert!(serde_json::from_str::<Polytope>(r#"{"dim":2}"#).is_err());
    }
}
