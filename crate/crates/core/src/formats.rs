//! Plain-text file formats: campaign files, element tables and cost matrices.
//!
//! # Campaign file
//!
//! Line oriented, whitespace separated, `#` starts a comment line. Angles are
//! in degrees, times in seconds. The header comes first, in this order:
//!
//! ```text
//! format swarmtrack-campaign 1
//! station <lon_deg> <lat_deg> <earth_radius_km> <rotation_rate_rad_s> <rotation_epoch_angle_deg>
//! gravity <mu_km3_s2>
//! sigma <elevation_deg> <azimuth_deg>
//! targets <n>
//! dates <M>
//! ```
//!
//! followed by `M` date blocks:
//!
//! ```text
//! date <epoch_s> <night> <rows> [<sigma_elevation_deg> <sigma_azimuth_deg>]
//! <elevation_deg> <azimuth_deg>        (repeated <rows> times)
//! labels <l_1> ... <l_rows>            (optional)
//! ```
//!
//! The per-date sigma overrides the header sigma for that date only. A label
//! is a 1-based truth object index or `F` for a spurious row. Either every
//! block carries a label line or none does. Numbers are written in shortest
//! round-trip form, angles rounded to 15 significant digits.

use std::fmt::Write as _;
use std::io::{Read, Write};

use thiserror::Error;

use crate::fitness::{CampaignError, Candidate, ObservationSet};
use crate::observation::{GroundStation, Measurement, UncertaintyProfile};
use crate::orbit::{GravityModel, OrbitalElements};
use crate::scenario::RowLabel;
use crate::assignment::{AssignmentError, CostMatrix};

pub const CAMPAIGN_FORMAT: &str = "swarmtrack-campaign";
pub const CAMPAIGN_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("unexpected end of file: {0}")]
    Truncated(String),
    #[error(transparent)]
    Campaign(#[from] CampaignError),
    #[error(transparent)]
    Matrix(#[from] AssignmentError),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("element table is missing column `{0}`")]
    MissingColumn(&'static str),
    #[error("element table row {row}: {message}")]
    Row { row: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Degrees for a radian value, rounded to 15 significant digits so that a
/// parse/write cycle reproduces the text exactly.
fn degrees(rad: f64) -> String {
    let rounded: f64 = format!("{:.14e}", rad.to_degrees()).parse().expect("formatted float");
    format!("{rounded}")
}

fn parse_err(line: usize, message: impl Into<String>) -> FormatError {
    FormatError::Parse {
        line,
        message: message.into(),
    }
}

/// A campaign as read from disk.
#[derive(Debug, Clone, PartialEq)]
pub struct CampaignFile {
    pub observations: ObservationSet,
    pub labels: Option<Vec<Vec<RowLabel>>>,
}

pub fn write_campaign(obs: &ObservationSet, labels: Option<&[Vec<RowLabel>]>) -> String {
    let mut out = String::new();
    let st = obs.station();
    let header_sigma = obs.sigmas()[0];
    let _ = writeln!(out, "# multi-object angle campaign");
    let _ = writeln!(out, "format {CAMPAIGN_FORMAT} {CAMPAIGN_VERSION}");
    let _ = writeln!(
        out,
        "station {} {} {} {} {}",
        degrees(st.longitude),
        degrees(st.latitude),
        st.earth_radius,
        st.earth_rotation_rate,
        degrees(st.rotation_epoch_angle)
    );
    let _ = writeln!(out, "gravity {}", obs.gravity().mu);
    let _ = writeln!(
        out,
        "sigma {} {}",
        degrees(header_sigma.elevation),
        degrees(header_sigma.azimuth)
    );
    let _ = writeln!(out, "targets {}", obs.targets());
    let _ = writeln!(out, "dates {}", obs.date_count());
    for (j, &t) in obs.dates().iter().enumerate() {
        let batch = obs.batch(j);
        let sigma = obs.sigmas()[j];
        let _ = write!(out, "date {} {} {}", t, obs.night_membership()[j], batch.len());
        if sigma != header_sigma {
            let _ = write!(out, " {} {}", degrees(sigma.elevation), degrees(sigma.azimuth));
        }
        out.push('\n');
        for z in batch {
            let _ = writeln!(out, "{} {}", degrees(z.elevation), degrees(z.azimuth));
        }
        if let Some(labels) = labels {
            out.push_str("labels");
            for l in &labels[j] {
                match l {
                    RowLabel::Object(i) => {
                        let _ = write!(out, " {}", i + 1);
                    }
                    RowLabel::Fictitious => out.push_str(" F"),
                }
            }
            out.push('\n');
        }
    }
    out
}

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
    peeked: Option<(usize, Vec<&'a str>)>,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str) -> Self {
        Self {
            inner: text.lines().enumerate(),
            peeked: None,
        }
    }

    fn next_tokens(&mut self) -> Option<(usize, Vec<&'a str>)> {
        if let Some(p) = self.peeked.take() {
            return Some(p);
        }
        for (i, line) in self.inner.by_ref() {
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            return Some((i + 1, trimmed.split_whitespace().collect()));
        }
        None
    }

    fn peek_tokens(&mut self) -> Option<&(usize, Vec<&'a str>)> {
        if self.peeked.is_none() {
            self.peeked = self.next_tokens();
        }
        self.peeked.as_ref()
    }

    fn expect(&mut self, keyword: &str, arity: std::ops::RangeInclusive<usize>) -> Result<(usize, Vec<&'a str>), FormatError> {
        let (line, tokens) = self
            .next_tokens()
            .ok_or_else(|| FormatError::Truncated(format!("expected `{keyword}`")))?;
        if tokens[0] != keyword {
            return Err(parse_err(line, format!("expected `{keyword}`, found `{}`", tokens[0])));
        }
        if !arity.contains(&(tokens.len() - 1)) {
            return Err(parse_err(
                line,
                format!("`{keyword}` takes {arity:?} values, found {}", tokens.len() - 1),
            ));
        }
        Ok((line, tokens[1..].to_vec()))
    }
}

fn number<T: std::str::FromStr>(line: usize, token: &str, what: &str) -> Result<T, FormatError> {
    token
        .parse()
        .map_err(|_| parse_err(line, format!("invalid {what} `{token}`")))
}

pub fn parse_campaign(text: &str) -> Result<CampaignFile, FormatError> {
    let mut lines = Lines::new(text);

    let (line, v) = lines.expect("format", 2..=2)?;
    if v[0] != CAMPAIGN_FORMAT {
        return Err(parse_err(line, format!("unknown format `{}`", v[0])));
    }
    let version: u32 = number(line, v[1], "version")?;
    if version != CAMPAIGN_VERSION {
        return Err(parse_err(line, format!("unsupported version {version}")));
    }

    let (line, v) = lines.expect("station", 5..=5)?;
    let station = GroundStation {
        longitude: number::<f64>(line, v[0], "longitude")?.to_radians(),
        latitude: number::<f64>(line, v[1], "latitude")?.to_radians(),
        earth_radius: number(line, v[2], "earth radius")?,
        earth_rotation_rate: number(line, v[3], "rotation rate")?,
        rotation_epoch_angle: number::<f64>(line, v[4], "rotation epoch angle")?.to_radians(),
    };
    station.validate().map_err(|e| parse_err(line, e.to_string()))?;

    let (line, v) = lines.expect("gravity", 1..=1)?;
    let gravity = GravityModel {
        mu: number(line, v[0], "mu")?,
    };
    if !(gravity.mu.is_finite() && gravity.mu > 0.0) {
        return Err(parse_err(line, "mu must be positive"));
    }

    let parse_sigma = |line: usize, el: &str, az: &str| -> Result<UncertaintyProfile, FormatError> {
        UncertaintyProfile::new(
            number::<f64>(line, el, "sigma")?.to_radians(),
            number::<f64>(line, az, "sigma")?.to_radians(),
        )
        .map_err(|e| parse_err(line, e.to_string()))
    };
    let (line, v) = lines.expect("sigma", 2..=2)?;
    let header_sigma = parse_sigma(line, v[0], v[1])?;

    let (line, v) = lines.expect("targets", 1..=1)?;
    let targets: usize = number(line, v[0], "target count")?;
    let (line, v) = lines.expect("dates", 1..=1)?;
    let date_count: usize = number(line, v[0], "date count")?;

    let mut dates = Vec::with_capacity(date_count);
    let mut nights = Vec::with_capacity(date_count);
    let mut sigmas = Vec::with_capacity(date_count);
    let mut batches = Vec::with_capacity(date_count);
    let mut all_labels: Vec<Vec<RowLabel>> = Vec::new();
    let mut labelled: Option<bool> = None;

    for j in 0..date_count {
        let (line, v) = lines.expect("date", 3..=5)?;
        if v.len() == 4 {
            return Err(parse_err(line, "per-date sigma needs two values"));
        }
        let t: f64 = number(line, v[0], "epoch")?;
        nights.push(number::<usize>(line, v[1], "night index")?);
        let rows: usize = number(line, v[2], "row count")?;
        sigmas.push(if v.len() == 5 {
            parse_sigma(line, v[3], v[4])?
        } else {
            header_sigma
        });
        dates.push(t);

        let mut batch = Vec::with_capacity(rows);
        for _ in 0..rows {
            let (line, v) = lines
                .next_tokens()
                .ok_or_else(|| FormatError::Truncated(format!("measurements of date {j}")))?;
            if v.len() != 2 {
                return Err(parse_err(line, format!("expected `elevation azimuth`, found {} values", v.len())));
            }
            let el: f64 = number(line, v[0], "elevation")?;
            let az: f64 = number(line, v[1], "azimuth")?;
            if !(el.is_finite() && az.is_finite() && el.abs() <= 90.0) {
                return Err(parse_err(line, "angles out of range"));
            }
            batch.push(Measurement::new(el.to_radians(), az.to_radians(), t));
        }
        batches.push(batch);

        let has_labels = matches!(lines.peek_tokens(), Some((_, v)) if v[0] == "labels");
        match labelled {
            None => labelled = Some(has_labels),
            Some(expected) if expected != has_labels => {
                let line = lines.peek_tokens().map_or(0, |(l, _)| *l);
                return Err(parse_err(line, "label lines must be present on every date or none"));
            }
            Some(_) => {}
        }
        if has_labels {
            let (line, v) = lines.expect("labels", rows..=rows)?;
            let labels = v
                .iter()
                .map(|tok| match *tok {
                    "F" => Ok(RowLabel::Fictitious),
                    other => match other.parse::<usize>() {
                        Ok(k) if k >= 1 => Ok(RowLabel::Object(k - 1)),
                        _ => Err(parse_err(line, format!("invalid label `{other}`"))),
                    },
                })
                .collect::<Result<Vec<_>, _>>()?;
            all_labels.push(labels);
        }
    }
    if let Some((line, v)) = lines.next_tokens() {
        return Err(parse_err(line, format!("unexpected `{}` after the last date", v[0])));
    }

    let observations = ObservationSet::new(dates, batches, sigmas, nights, station, targets)?.with_gravity(gravity);
    Ok(CampaignFile {
        observations,
        labels: labelled.unwrap_or(false).then_some(all_labels),
    })
}

const ELEMENT_COLUMNS: [&str; 5] = ["a_km", "e", "inc_deg", "raan_deg", "theta_deg"];

/// Element table with a header row; the `lambda_deg` column is `Ω + θ`.
pub fn write_elements<W: Write>(writer: W, candidate: &Candidate) -> Result<(), FormatError> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["object", "a_km", "e", "inc_deg", "raan_deg", "theta_deg", "lambda_deg"])?;
    for (i, el) in candidate.elements.iter().enumerate() {
        w.write_record([
            (i + 1).to_string(),
            el.a.to_string(),
            el.e.to_string(),
            degrees(el.inc),
            degrees(el.raan),
            degrees(el.theta),
            degrees(el.longitude()),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Reads an element table. Only the five element columns are required; any
/// other column is ignored. Elements get epoch 0.
pub fn read_elements<R: Read>(reader: R) -> Result<Candidate, FormatError> {
    let mut r = csv::ReaderBuilder::new().trim(csv::Trim::All).comment(Some(b'#')).from_reader(reader);
    let headers = r.headers()?.clone();
    let mut index = [0usize; 5];
    for (slot, name) in index.iter_mut().zip(ELEMENT_COLUMNS) {
        *slot = headers
            .iter()
            .position(|h| h == name)
            .ok_or(FormatError::MissingColumn(name))?;
    }
    let mut elements = Vec::new();
    for (row, record) in r.records().enumerate() {
        let record = record?;
        let value = |k: usize| -> Result<f64, FormatError> {
            let raw = record.get(index[k]).unwrap_or("");
            raw.parse().map_err(|_| FormatError::Row {
                row: row + 1,
                message: format!("invalid {} `{raw}`", ELEMENT_COLUMNS[k]),
            })
        };
        let el = OrbitalElements {
            a: value(0)?,
            e: value(1)?,
            inc: value(2)?.to_radians(),
            raan: value(3)?.to_radians(),
            theta: value(4)?.to_radians(),
            epoch: 0.0,
        };
        el.validate().map_err(|e| FormatError::Row {
            row: row + 1,
            message: e.to_string(),
        })?;
        elements.push(el);
    }
    if elements.is_empty() {
        return Err(FormatError::Row {
            row: 0,
            message: "no elements".into(),
        });
    }
    Ok(Candidate::new(elements))
}

/// One matrix row per line, whitespace separated; `#` comments allowed.
pub fn parse_matrix(text: &str) -> Result<CostMatrix, FormatError> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let row = trimmed
            .split_whitespace()
            .map(|tok| number::<f64>(i + 1, tok, "cost"))
            .collect::<Result<Vec<_>, _>>()?;
        if let Some(first) = rows.first() {
            if first.len() != row.len() {
                return Err(parse_err(i + 1, format!("expected {} columns, found {}", first.len(), row.len())));
            }
        }
        rows.push(row);
    }
    Ok(CostMatrix::from_rows(&rows)?)
}
