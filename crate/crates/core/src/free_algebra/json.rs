use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::series::GradedSeries;
use super::word::{Word, MAX_DEGREE};
use crate::error::{Error, Result};

#[derive(Serialize, Deserialize)]
struct TermJson {
    word: String,
    re: f64,
    im: f64,
}

#[derive(Serialize, Deserialize)]
struct GradeJson {
    degree: usize,
    terms: Vec<TermJson>,
}

/// Wire form `{"truncation": N, "grades": [{"degree": n, "terms": [...]}]}`.
#[derive(Serialize, Deserialize)]
pub struct SeriesJson {
    truncation: usize,
    grades: Vec<GradeJson>,
}

impl From<&GradedSeries> for SeriesJson {
    fn from(p: &GradedSeries) -> SeriesJson {
        SeriesJson {
            truncation: p.truncation(),
            grades: p
                .grades()
                .filter(|g| !g.is_zero())
                .map(|g| GradeJson {
                    degree: g.degree(),
                    terms: g
                        .terms()
                        .map(|(w, c)| TermJson {
                            word: w.to_string(),
                            re: c.re,
                            im: c.im,
                        })
                        .collect(),
                })
                .collect(),
        }
    }
}

impl TryFrom<SeriesJson> for GradedSeries {
    type Error = Error;

    fn try_from(s: SeriesJson) -> Result<GradedSeries> {
        if s.truncation == 0 || s.truncation > MAX_DEGREE {
            return Err(Error::Format(format!("truncation {} out of range", s.truncation)));
        }
        let mut terms = Vec::new();
        for g in s.grades {
            for t in g.terms {
                let w: Word = t.word.parse()?;
                if w.len() != g.degree {
                    return Err(Error::Format(format!(
                        "word {} listed under degree {}",
                        t.word, g.degree
                    )));
                }
                if w.len() > s.truncation {
                    return Err(Error::Format(format!("word {} exceeds truncation", t.word)));
                }
                if !t.re.is_finite() || !t.im.is_finite() {
                    return Err(Error::Format(format!("non-finite coefficient on {}", t.word)));
                }
                terms.push((w, Complex64::new(t.re, t.im)));
            }
        }
        Ok(GradedSeries::from_terms(s.truncation, terms))
    }
}

impl Serialize for GradedSeries {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        SeriesJson::from(self).serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for GradedSeries {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let raw = SeriesJson::deserialize(deserializer)?;
        GradedSeries::try_from(raw).map_err(serde::de::Error::custom)
    }
}

impl GradedSeries {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("series serialization cannot fail")
    }

    pub fn from_json(text: &str) -> Result<GradedSeries> {
        Ok(serde_json::from_str(text)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_exact() {
        let p = GradedSeries::from_terms(
            4,
            [
                ("XY".parse().unwrap(), Complex64::new(1.0 / 3.0, -0.1)),
                ("YYX".parse().unwrap(), Complex64::new(std::f64::consts::PI, 1e-300)),
            ],
        );
        let text = p.to_json();
        assert_eq!(GradedSeries::from_json(&text).unwrap(), p);
    }

    #[test]
    fn rejects_misplaced_words() {
        let bad = r#"{"truncation": 3, "grades": [{"degree": 2, "terms": [{"word": "XYX", "re": 1, "im": 0}]}]}"#;
        assert!(GradedSeries::from_json(bad).is_err());
    }
}
