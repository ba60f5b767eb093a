//! JSON instance and solution files.
//!
//! Both carry `format_version`. An instance file wraps the model under an
//! `instance` key. A solution file lists one row per occurrence (`day` is
//! `null` when unscheduled) and one entry per delivered service per day.
//! Timings are deliberately absent so that equal solves give equal bytes.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};

use ncd_agenda::{
    AgendaEntry, DailySchedule, Day, DayAssignment, FullSolution, Instance, ModelError, OccurrenceKey,
    OperatorId, PacketId, PatientId, ServiceId, Slot, SolveReport, SolveStatus,
};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("{path}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("field `{field}`: {message}")]
    Parse { field: String, message: String },
    #[error("field `format_version`: unsupported version {0}, expected {FORMAT_VERSION}")]
    Version(u32),
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub format_version: u32,
    pub instance: Instance,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AssignmentRow {
    pub patient: PatientId,
    pub packet: PacketId,
    pub occurrence: u32,
    pub day: Option<Day>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EntryRow {
    pub patient: PatientId,
    pub service: ServiceId,
    pub operator: OperatorId,
    pub start: Slot,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AgendaRow {
    pub day: Day,
    pub entries: Vec<EntryRow>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolutionFile {
    pub format_version: u32,
    pub status: SolveStatus,
    pub objective: usize,
    pub upper_bound: usize,
    pub assignment: Vec<AssignmentRow>,
    pub agendas: Vec<AgendaRow>,
}

impl SolutionFile {
    pub fn new(status: SolveStatus, objective: usize, upper_bound: usize, solution: &FullSolution) -> Self {
        let assignment = solution
            .assignment
            .iter()
            .map(|(k, day)| AssignmentRow {
                patient: k.patient,
                packet: k.packet,
                occurrence: k.occurrence,
                day,
            })
            .collect();
        let agendas = solution
            .agendas
            .iter()
            .map(|a| AgendaRow {
                day: a.day,
                entries: a
                    .entries
                    .iter()
                    .map(|(&(patient, service), e)| EntryRow {
                        patient,
                        service,
                        operator: e.operator,
                        start: e.start,
                    })
                    .collect(),
            })
            .collect();
        Self {
            format_version: FORMAT_VERSION,
            status,
            objective,
            upper_bound,
            assignment,
            agendas,
        }
    }

    pub fn from_report(report: &SolveReport) -> Self {
        Self::new(
            report.status,
            report.objective,
            report.upper_bound,
            &report.solution,
        )
    }

    /// Rebuilds the in-memory solution, rejecting repeated keys.
    pub fn to_solution(&self) -> Result<FullSolution, FormatError> {
        let mut assignment = DayAssignment::default();
        for (i, row) in self.assignment.iter().enumerate() {
            let key = OccurrenceKey {
                patient: row.patient,
                packet: row.packet,
                occurrence: row.occurrence,
            };
            if assignment.contains(&key) {
                return Err(parse_error(
                    format!("assignment[{i}]"),
                    format!("repeats occurrence {key}"),
                ));
            }
            assignment.set(key, row.day);
        }
        let mut days = BTreeSet::new();
        let mut agendas = Vec::with_capacity(self.agendas.len());
        for (i, a) in self.agendas.iter().enumerate() {
            if !days.insert(a.day) {
                return Err(parse_error(
                    format!("agendas[{i}].day"),
                    format!("repeats day {}", a.day),
                ));
            }
            let mut entries = BTreeMap::new();
            for (j, e) in a.entries.iter().enumerate() {
                let entry = AgendaEntry {
                    operator: e.operator,
                    start: e.start,
                };
                if entries.insert((e.patient, e.service), entry).is_some() {
                    return Err(parse_error(
                        format!("agendas[{i}].entries[{j}]"),
                        format!("repeats {} {}", e.patient, e.service),
                    ));
                }
            }
            agendas.push(DailySchedule { day: a.day, entries });
        }
        Ok(FullSolution { assignment, agendas })
    }
}

fn parse_error(field: String, message: String) -> FormatError {
    FormatError::Parse { field, message }
}

fn parse<T: DeserializeOwned>(text: &str) -> Result<T, FormatError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let field = e.path().to_string();
        let field = if field == "." { "<root>".to_string() } else { field };
        parse_error(field, e.into_inner().to_string())
    })
}

fn read(path: &Path) -> Result<String, FormatError> {
    fs::read_to_string(path).map_err(|source| FormatError::Io {
        path: path.to_owned(),
        source,
    })
}

fn write(path: &Path, text: &str) -> Result<(), FormatError> {
    fs::write(path, text).map_err(|source| FormatError::Io {
        path: path.to_owned(),
        source,
    })
}

fn check_version(found: u32) -> Result<(), FormatError> {
    if found == FORMAT_VERSION {
        Ok(())
    } else {
        Err(FormatError::Version(found))
    }
}

pub fn instance_to_string(instance: &Instance) -> String {
    let file = InstanceFile {
        format_version: FORMAT_VERSION,
        instance: instance.clone(),
    };
    let mut text = serde_json::to_string_pretty(&file).expect("instance serializes");
    text.push('\n');
    text
}

/// Parses and validates an instance file.
pub fn parse_instance(text: &str) -> Result<Instance, FormatError> {
    let file: InstanceFile = parse(text)?;
    check_version(file.format_version)?;
    file.instance.validate()?;
    Ok(file.instance)
}

pub fn read_instance(path: &Path) -> Result<Instance, FormatError> {
    parse_instance(&read(path)?)
}

pub fn write_instance(path: &Path, instance: &Instance) -> Result<(), FormatError> {
    write(path, &instance_to_string(instance))
}

pub fn solution_to_string(solution: &SolutionFile) -> String {
    let mut text = serde_json::to_string_pretty(solution).expect("solution serializes");
    text.push('\n');
    text
}

pub fn parse_solution(text: &str) -> Result<SolutionFile, FormatError> {
    let file: SolutionFile = parse(text)?;
    check_version(file.format_version)?;
    file.to_solution()?;
    Ok(file)
}

pub fn read_solution(path: &Path) -> Result<SolutionFile, FormatError> {
    parse_solution(&read(path)?)
}

pub fn write_solution(path: &Path, solution: &SolutionFile) -> Result<(), FormatError> {
    write(path, &solution_to_string(solution))
}
