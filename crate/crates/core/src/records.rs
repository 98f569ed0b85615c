//! Patient and visit storage.
//!
//! Records live in `patients.jsonl` and `visits.jsonl` under a data directory,
//! one JSON object per line, appended and fsynced on every write. The
//! in-memory index is rebuilt from the logs on open. Patient records are
//! last-write-wins by id; visits are immutable and re-adding a known visit id
//! is a no-op.

use std::collections::{BTreeMap, HashMap};
use std::fs::{self, File, OpenOptions};
use std::io::{self, BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::{Mutex, RwLock};

use chrono::NaiveDate;
use serde::{de::DeserializeOwned, Deserialize, Serialize};
use thiserror::Error;

use crate::standards::{Indicator, Sex, XUnit};

pub const WEIGHT_KG: &str = "weight_kg";
pub const HEIGHT_CM: &str = "height_cm";
pub const MUAC_CM: &str = "muac_cm";
/// Oedema grade coded 0 (none) to 3 (+++).
pub const OEDEMA: &str = "oedema";

/// Mean Gregorian month in days.
pub const DAYS_PER_MONTH: f64 = 30.4375;

const PATIENTS_FILE: &str = "patients.jsonl";
const VISITS_FILE: &str = "visits.jsonl";

#[derive(Debug, Error)]
pub enum RecordsError {
    #[error("unknown patient `{0}`")]
    UnknownPatient(String),
    #[error("invariant violation: {0}")]
    InvariantViolation(String),
    #[error("date {date} is before birth date {birth_date}")]
    NegativeAge { birth_date: NaiveDate, date: NaiveDate },
    #[error("i/o failure on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("{path} line {line}: {message}")]
    Corrupt {
        path: PathBuf,
        line: usize,
        message: String,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Patient {
    pub id: String,
    pub name: String,
    pub sex: Sex,
    pub birth_date: NaiveDate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Visit {
    pub id: String,
    pub patient_id: String,
    pub date: NaiveDate,
    #[serde(default)]
    pub measures: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl Visit {
    pub fn measure(&self, name: &str) -> Option<f64> {
        self.measures.get(name).copied()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AgeUnit {
    Days,
    Months,
}

/// One visit's point on a growth chart.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub visit_id: String,
    pub date: NaiveDate,
    pub x: f64,
    pub y: f64,
}

/// Measures plotted for a growth indicator: `(x measure, y measure)`, where
/// an x measure of `None` means age.
pub fn indicator_measures(indicator: Indicator) -> Option<(Option<&'static str>, &'static str)> {
    match indicator {
        Indicator::WeightForAge => Some((None, WEIGHT_KG)),
        Indicator::HeightForAge => Some((None, HEIGHT_CM)),
        Indicator::WeightForHeight => Some((Some(HEIGHT_CM), WEIGHT_KG)),
        Indicator::Custom => None,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasureSeries {
    pub measure: String,
    /// `(x, value)` sorted by x.
    pub points: Vec<(f64, f64)>,
}

/// Age at `date` in whole days or in mean months.
pub fn age_at(patient: &Patient, date: NaiveDate, unit: AgeUnit) -> Result<f64, RecordsError> {
    let days = (date - patient.birth_date).num_days();
    if days < 0 {
        return Err(RecordsError::NegativeAge {
            birth_date: patient.birth_date,
            date,
        });
    }
    Ok(match unit {
        AgeUnit::Days => days as f64,
        AgeUnit::Months => days as f64 / DAYS_PER_MONTH,
    })
}

fn valid_id(id: &str) -> bool {
    !id.is_empty() && id.len() <= 64 && id.chars().all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_')
}

fn check_patient(p: &Patient, today: NaiveDate) -> Result<(), RecordsError> {
    let violation = |m: String| Err(RecordsError::InvariantViolation(m));
    if !valid_id(&p.id) {
        return violation(format!("patient id `{}` must be 1-64 chars of [A-Za-z0-9_-]", p.id));
    }
    if p.name.trim().is_empty() {
        return violation("patient name is empty".into());
    }
    if p.sex == Sex::Any {
        return violation("patient sex must be female or male".into());
    }
    if p.birth_date > today {
        return violation(format!("birth date {} is in the future", p.birth_date));
    }
    Ok(())
}

fn check_visit(v: &Visit, patient: &Patient) -> Result<(), RecordsError> {
    let violation = |m: String| Err(RecordsError::InvariantViolation(m));
    if !valid_id(&v.id) {
        return violation(format!("visit id `{}` must be 1-64 chars of [A-Za-z0-9_-]", v.id));
    }
    if v.date < patient.birth_date {
        return violation(format!(
            "visit date {} is before birth date {}",
            v.date, patient.birth_date
        ));
    }
    for (name, &value) in &v.measures {
        if name.trim().is_empty() {
            return violation("measure name is empty".into());
        }
        if name == OEDEMA {
            if !(value == 0.0 || value == 1.0 || value == 2.0 || value == 3.0) {
                return violation(format!("oedema grade {value} must be 0, 1, 2 or 3"));
            }
        } else if !(value.is_finite() && value > 0.0) {
            return violation(format!("measure `{name}` = {value} must be positive"));
        }
    }
    Ok(())
}

#[derive(Debug, Default)]
struct Index {
    patients: HashMap<String, Patient>,
    /// Patient ids in first-seen order.
    patient_order: Vec<String>,
    visits: HashMap<String, Visit>,
    by_patient: HashMap<String, Vec<String>>,
}

impl Index {
    fn put_patient(&mut self, p: Patient) {
        if !self.patients.contains_key(&p.id) {
            self.patient_order.push(p.id.clone());
        }
        self.patients.insert(p.id.clone(), p);
    }

    fn put_visit(&mut self, v: Visit) -> bool {
        if self.visits.contains_key(&v.id) {
            return false;
        }
        self.by_patient
            .entry(v.patient_id.clone())
            .or_default()
            .push(v.id.clone());
        self.visits.insert(v.id.clone(), v);
        true
    }
}

/// Durable patient/visit store with a single writer and concurrent readers.
#[derive(Debug)]
pub struct RecordStore {
    dir: PathBuf,
    index: RwLock<Index>,
    writer: Mutex<()>,
}

fn read_log<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>, RecordsError> {
    let file = match File::open(path) {
        Ok(f) => f,
        Err(e) if e.kind() == io::ErrorKind::NotFound => return Ok(Vec::new()),
        Err(source) => {
            return Err(RecordsError::Io {
                path: path.to_path_buf(),
                source,
            })
        }
    };
    let lines: Vec<String> = BufReader::new(file)
        .lines()
        .collect::<Result<_, _>>()
        .map_err(|source| RecordsError::Io {
            path: path.to_path_buf(),
            source,
        })?;
    let ends_with_newline = fs::read(path).map(|b| b.last() == Some(&b'\n')).unwrap_or(true);
    let mut out = Vec::with_capacity(lines.len());
    for (i, line) in lines.iter().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        match serde_json::from_str(line) {
            Ok(rec) => out.push(rec),
            // a torn final write from a crash is dropped
            Err(_) if i + 1 == lines.len() && !ends_with_newline => {}
            Err(e) => {
                return Err(RecordsError::Corrupt {
                    path: path.to_path_buf(),
                    line: i + 1,
                    message: e.to_string(),
                })
            }
        }
    }
    Ok(out)
}

impl RecordStore {
    pub fn open(dir: impl Into<PathBuf>) -> Result<Self, RecordsError> {
        let dir = dir.into();
        fs::create_dir_all(&dir).map_err(|source| RecordsError::Io {
            path: dir.clone(),
            source,
        })?;
        let mut index = Index::default();
        for p in read_log::<Patient>(&dir.join(PATIENTS_FILE))? {
            index.put_patient(p);
        }
        for v in read_log::<Visit>(&dir.join(VISITS_FILE))? {
            index.put_visit(v);
        }
        Ok(RecordStore {
            dir,
            index: RwLock::new(index),
            writer: Mutex::new(()),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn append<T: Serialize>(&self, file: &str, record: &T) -> Result<(), RecordsError> {
        let path = self.dir.join(file);
        let io_err = |source| RecordsError::Io {
            path: path.clone(),
            source,
        };
        // a torn tail left by a crash is cut off before appending
        if let Ok(bytes) = fs::read(&path) {
            if bytes.last().is_some_and(|b| *b != b'\n') {
                let keep = bytes.iter().rposition(|b| *b == b'\n').map_or(0, |i| i + 1);
                let f = OpenOptions::new().write(true).open(&path).map_err(io_err)?;
                f.set_len(keep as u64).map_err(io_err)?;
            }
        }
        let mut f = OpenOptions::new()
            .create(true)
            .append(true)
            .open(&path)
            .map_err(io_err)?;
        let mut line = serde_json::to_string(record).expect("record serializes");
        line.push('\n');
        f.write_all(line.as_bytes()).map_err(io_err)?;
        f.sync_data().map_err(io_err)
    }

    fn read(&self) -> std::sync::RwLockReadGuard<'_, Index> {
        self.index.read().unwrap_or_else(|e| e.into_inner())
    }

    /// Creates or updates a patient (last write wins on demographics).
    pub fn create_patient(&self, patient: Patient) -> Result<Patient, RecordsError> {
        self.create_patient_on(patient, chrono::Local::now().date_naive())
    }

    /// [`RecordStore::create_patient`] with an explicit "today".
    pub fn create_patient_on(&self, patient: Patient, today: NaiveDate) -> Result<Patient, RecordsError> {
        check_patient(&patient, today)?;
        let _w = self.writer.lock().unwrap_or_else(|e| e.into_inner());
        {
            let index = self.read();
            if index.patients.get(&patient.id) == Some(&patient) {
                return Ok(patient);
            }
            let earliest = index
                .by_patient
                .get(&patient.id)
                .into_iter()
                .flatten()
                .map(|vid| index.visits[vid].date)
                .min();
            if let Some(first) = earliest.filter(|d| *d < patient.birth_date) {
                return Err(RecordsError::InvariantViolation(format!(
                    "birth date {} is after an existing visit on {first}",
                    patient.birth_date
                )));
            }
        }
        self.append(PATIENTS_FILE, &patient)?;
        self.index
            .write()
            .unwrap_or_else(|e| e.into_inner())
            .put_patient(patient.clone());
        Ok(patient)
    }

    /// Stores a visit. A visit id that is already stored is left untouched and
    /// the stored record is returned.
    pub fn add_visit(&self, visit: Visit) -> Result<Visit, RecordsError> {
        let _w = self.writer.lock().unwrap_or_else(|e| e.into_inner());
        {
            let index = self.read();
            if let Some(existing) = index.visits.get(&visit.id) {
                return Ok(existing.clone());
            }
            let patient = index
                .patients
                .get(&visit.patient_id)
                .ok_or_else(|| RecordsError::UnknownPatient(visit.patient_id.clone()))?;
            check_visit(&visit, patient)?;
        }
        self.append(VISITS_FILE, &visit)?;
        self.index
            .write()
            .unwrap_or_else(|e| e.into_inner())
            .put_visit(visit.clone());
        Ok(visit)
    }

    pub fn get_patient(&self, id: &str) -> Result<Patient, RecordsError> {
        self.read()
            .patients
            .get(id)
            .cloned()
            .ok_or_else(|| RecordsError::UnknownPatient(id.to_string()))
    }

    pub fn list_patients(&self) -> Vec<Patient> {
        let index = self.read();
        index
            .patient_order
            .iter()
            .map(|id| index.patients[id].clone())
            .collect()
    }

    /// Visits of a patient ordered by date (insertion order within a day).
    pub fn list_visits(&self, patient_id: &str) -> Result<Vec<Visit>, RecordsError> {
        let index = self.read();
        if !index.patients.contains_key(patient_id) {
            return Err(RecordsError::UnknownPatient(patient_id.to_string()));
        }
        let mut visits: Vec<Visit> = index
            .by_patient
            .get(patient_id)
            .into_iter()
            .flatten()
            .map(|vid| index.visits[vid].clone())
            .collect();
        visits.sort_by_key(|v| v.date);
        Ok(visits)
    }

    pub fn get_visit(&self, id: &str) -> Option<Visit> {
        self.read().visits.get(id).cloned()
    }

    /// One point per visit holding `measure`, x = age at the visit.
    pub fn series_for(&self, patient_id: &str, measure: &str, unit: AgeUnit) -> Result<MeasureSeries, RecordsError> {
        let patient = self.get_patient(patient_id)?;
        let mut points = Vec::new();
        for v in self.list_visits(patient_id)? {
            if let Some(y) = v.measure(measure) {
                points.push((age_at(&patient, v.date, unit)?, y));
            }
        }
        Ok(MeasureSeries {
            measure: measure.to_string(),
            points,
        })
    }

    /// Chart points of a patient for a growth indicator whose table is
    /// indexed by `x_unit`, sorted by x.
    pub fn observations(
        &self,
        patient_id: &str,
        indicator: Indicator,
        x_unit: XUnit,
    ) -> Result<Vec<Observation>, RecordsError> {
        let patient = self.get_patient(patient_id)?;
        let (x_measure, y_measure) = indicator_measures(indicator).ok_or_else(|| {
            RecordsError::InvariantViolation(format!("indicator {indicator} has no patient measures"))
        })?;
        let age_unit = match (x_measure, x_unit) {
            (None, XUnit::AgeDays) => Some(AgeUnit::Days),
            (None, XUnit::AgeMonths) => Some(AgeUnit::Months),
            (Some(_), XUnit::LengthCm) => None,
            _ => {
                return Err(RecordsError::InvariantViolation(format!(
                    "indicator {indicator} cannot be charted against {x_unit}"
                )))
            }
        };
        let mut out = Vec::new();
        for v in self.list_visits(patient_id)? {
            let Some(y) = v.measure(y_measure) else { continue };
            let x = match (age_unit, x_measure) {
                (Some(unit), _) => age_at(&patient, v.date, unit)?,
                (None, Some(m)) => match v.measure(m) {
                    Some(x) => x,
                    None => continue,
                },
                (None, None) => unreachable!("age unit set for age-indexed indicators"),
            };
            out.push(Observation {
                visit_id: v.id,
                date: v.date,
                x,
                y,
            });
        }
        out.sort_by(|a, b| a.x.total_cmp(&b.x));
        Ok(out)
    }

    /// One point per visit holding both measures, e.g. weight against height.
    pub fn paired_series(
        &self,
        patient_id: &str,
        x_measure: &str,
        y_measure: &str,
    ) -> Result<MeasureSeries, RecordsError> {
        let mut points: Vec<(f64, f64)> = self
            .list_visits(patient_id)?
            .iter()
            .filter_map(|v| Some((v.measure(x_measure)?, v.measure(y_measure)?)))
            .collect();
        points.sort_by(|a, b| a.0.total_cmp(&b.0));
        Ok(MeasureSeries {
            measure: y_measure.to_string(),
            points,
        })
    }
}
