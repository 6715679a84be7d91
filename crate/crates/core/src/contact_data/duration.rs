use std::collections::BTreeMap;
use std::io::Read;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One reported contact and its coded duration class.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContactRecord {
    pub respondent_id: String,
    pub duration_category: i64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DurationProfile {
    pub respondent_id: String,
    pub n_contacts: usize,
    pub total_minutes: f64,
    pub average_minutes: f64,
}

/// Interval centroid, in minutes, for the five duration classes
/// (<5', 5'-15', 15'-60', 1h-4h, >4h).
pub fn centroid_minutes(category: i64) -> Result<f64> {
    match category {
        1 => Ok(2.5),
        2 => Ok(7.5),
        3 => Ok(22.5),
        4 => Ok(120.0),
        5 => Ok(240.0),
        code => Err(Error::UnknownDurationCategory { code }),
    }
}

/// Totals and per-contact averages, one profile per respondent, ordered by
/// respondent id.
pub fn duration_profiles(records: &[ContactRecord]) -> Result<Vec<DurationProfile>> {
    let mut acc: BTreeMap<&str, (usize, f64)> = BTreeMap::new();
    for r in records {
        let minutes = centroid_minutes(r.duration_category)?;
        let slot = acc.entry(r.respondent_id.as_str()).or_default();
        slot.0 += 1;
        slot.1 += minutes;
    }
    Ok(acc
        .into_iter()
        .map(|(id, (n, total))| DurationProfile {
            respondent_id: id.to_string(),
            n_contacts: n,
            total_minutes: total,
            average_minutes: total / n as f64,
        })
        .collect())
}

/// Reads the `respondent_id,duration_category` CSV.
pub fn read_contact_records(reader: impl Read) -> Result<Vec<ContactRecord>> {
    let mut rdr = csv::Reader::from_reader(reader);
    let headers = rdr
        .headers()
        .map_err(|e| Error::Format(e.to_string()))?
        .clone();
    if headers.iter().collect::<Vec<_>>() != ["respondent_id", "duration_category"] {
        return Err(Error::Format(format!(
            "expected header `respondent_id,duration_category`, found `{}`",
            headers.iter().collect::<Vec<_>>().join(",")
        )));
    }
    rdr.deserialize()
        .map(|row| row.map_err(|e| Error::Format(e.to_string())))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(id: &str, c: i64) -> ContactRecord {
        ContactRecord {
            respondent_id: id.into(),
            duration_category: c,
        }
    }

    #[test]
    fn two_long_contacts() {
        let p = duration_profiles(&[rec("a", 4), rec("a", 4)]).unwrap();
        assert_eq!(p.len(), 1);
        assert_eq!((p[0].total_minutes, p[0].average_minutes), (240.0, 120.0));
    }

    #[test]
    fn single_short_contact() {
        let p = duration_profiles(&[rec("x", 1)]).unwrap();
        assert_eq!((p[0].total_minutes, p[0].average_minutes), (2.5, 2.5));
    }

    #[test]
    fn all_categories() {
        let recs: Vec<_> = (1..=5).map(|c| rec("r", c)).collect();
        let p = duration_profiles(&recs).unwrap();
        assert_eq!(p[0].n_contacts, 5);
        assert_eq!(p[0].total_minutes, 392.5);
        assert_eq!(p[0].average_minutes, 78.5);
    }

    #[test]
    fn unknown_category() {
        assert!(matches!(
            duration_profiles(&[rec("a", 6)]),
            Err(Error::UnknownDurationCategory { code: 6 })
        ));
        assert!(centroid_minutes(0).is_err());
    }

    #[test]
    fn csv_round() {
        let text = "respondent_id,duration_category\n7,3\n7,5\n2,1\n";
        let recs = read_contact_records(text.as_bytes()).unwrap();
        let p = duration_profiles(&recs).unwrap();
        assert_eq!(p[0].respondent_id, "2");
        assert_eq!(p[1].total_minutes, 262.5);
        assert!(read_contact_records("id,cat\n1,1\n".as_bytes()).is_err());
    }

    proptest::proptest! {
        #[test]
        fn average_is_total_over_count(cats in proptest::collection::vec((0u8..6, 1i64..=5), 1..60)) {
            let recs: Vec<_> = cats.iter().map(|(id, c)| rec(&id.to_string(), *c)).collect();
            for p in duration_profiles(&recs).unwrap() {
                proptest::prop_assert_eq!(p.average_minutes, p.total_minutes / p.n_contacts as f64);
            }
        }
    }
}
