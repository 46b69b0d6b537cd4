//! CSV and JSON writers. Every float is printed as `{:.16e}`, which
//! round-trips an `f64` exactly; non-finite values become `NaN`/`inf` in CSV
//! and `null` in JSON.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use num_complex::Complex64;
use scatternet::analysis::{
    AtrScan, EpScan, ExceptionalPointReport, SingularityReport, SingularityScan, SweepRecord,
};
use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter};

pub const CSV_HEADER: [&str; 13] = [
    "omega",
    "Re t",
    "Im t",
    "Re r_left",
    "Im r_left",
    "Re r_right",
    "Im r_right",
    "T",
    "R_left",
    "R_right",
    "eig_ratio",
    "det_residual",
    "flags",
];

pub fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        "NaN".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

pub fn fmt_complex(z: Complex64) -> String {
    format!("({}, {})", fmt_f64(z.re), fmt_f64(z.im))
}

fn csv_row(r: &SweepRecord) -> Vec<String> {
    let mut row: Vec<String> = [
        r.omega,
        r.t.re,
        r.t.im,
        r.r_left.re,
        r.r_left.im,
        r.r_right.re,
        r.r_right.im,
        r.transmittance,
        r.reflectance_left,
        r.reflectance_right,
        r.eig_ratio,
        r.det_residual,
    ]
    .iter()
    .map(|&x| fmt_f64(x))
    .collect();
    row.push(r.flags.label());
    row
}

pub fn write_sweep_csv<W: Write>(out: W, records: &[SweepRecord]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in records {
        w.write_record(csv_row(r))?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_sweep_csv_file(path: &Path, records: &[SweepRecord]) -> io::Result<()> {
    let file = BufWriter::new(File::create(path)?);
    write_sweep_csv(file, records).map_err(io::Error::other)
}

/// Pretty-printed JSON with floats in `{:.16e}` and non-finite floats as `null`.
struct SciFormatter(PrettyFormatter<'static>);

impl Formatter for SciFormatter {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        if value.is_finite() {
            write!(w, "{value:.16e}")
        } else {
            w.write_all(b"null")
        }
    }

    fn write_f32<W: ?Sized + Write>(&mut self, w: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(w, value as f64)
    }

    fn begin_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }
    fn end_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }
    fn begin_array_value<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }
    fn end_array_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }
    fn begin_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }
    fn end_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }
    fn begin_object_key<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }
    fn begin_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }
    fn end_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

pub fn to_json_string<T: Serialize>(value: &T) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, SciFormatter(PrettyFormatter::new()));
    value.serialize(&mut ser).expect("serializing to memory cannot fail");
    buf.push(b'\n');
    String::from_utf8(buf).expect("JSON output is UTF-8")
}

pub fn write_json_file<T: Serialize>(path: &Path, value: &T) -> io::Result<()> {
    std::fs::write(path, to_json_string(value))
}

#[derive(Debug, Serialize)]
pub struct SingularityJson {
    pub kind: &'static str,
    pub omega_c: f64,
    pub residual: f64,
    pub bracket: [f64; 2],
}

impl From<&SingularityReport> for SingularityJson {
    fn from(r: &SingularityReport) -> Self {
        Self { kind: r.kind.name(), omega_c: r.omega_c, residual: r.residual, bracket: [r.bracket.0, r.bracket.1] }
    }
}

#[derive(Debug, Default, Serialize)]
pub struct SingularitiesJson {
    pub range: [f64; 2],
    pub tol: f64,
    pub singularities: Vec<SingularityJson>,
    pub near_misses: Vec<SingularityJson>,
}

impl SingularitiesJson {
    pub fn extend(&mut self, scan: &SingularityScan) {
        self.singularities.extend(scan.reports.iter().map(SingularityJson::from));
        self.near_misses.extend(scan.near_misses.iter().map(SingularityJson::from));
    }
}

#[derive(Debug, Serialize)]
pub struct ExceptionalPointJson {
    pub mode: &'static str,
    pub n: usize,
    pub omega: f64,
    pub condition_residual: f64,
    pub branch_sign: &'static str,
    pub ratio_below: f64,
    pub ratio_above: f64,
    pub crossing: &'static str,
}

impl From<&ExceptionalPointReport> for ExceptionalPointJson {
    fn from(r: &ExceptionalPointReport) -> Self {
        Self {
            mode: r.mode.name(),
            n: r.mode.count(),
            omega: r.omega,
            condition_residual: r.condition_residual,
            branch_sign: r.branch_sign.symbol(),
            ratio_below: r.ratio_below,
            ratio_above: r.ratio_above,
            crossing: r.crossing.name(),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct ExceptionalPointsJson {
    pub range: [f64; 2],
    pub tol: f64,
    pub exceptional_points: Vec<ExceptionalPointJson>,
    /// Scan points where the serial condition is undefined (`sin Nφ = 0`).
    pub skipped: Vec<f64>,
}

impl ExceptionalPointsJson {
    pub fn new(range: (f64, f64), tol: f64, scan: &EpScan) -> Self {
        Self {
            range: [range.0, range.1],
            tol,
            exceptional_points: scan.reports.iter().map(ExceptionalPointJson::from).collect(),
            skipped: scan.skipped.clone(),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct AtrJson {
    pub omega: f64,
    pub direction: &'static str,
    pub transmittance: f64,
    pub dead_side_reflectance: f64,
    pub live_side_reflectance: f64,
}

#[derive(Debug, Serialize)]
pub struct AtrReportJson {
    pub tol: f64,
    pub resonances: Vec<AtrJson>,
    pub bidirectional: Vec<f64>,
}

impl AtrReportJson {
    pub fn new(tol: f64, scan: &AtrScan) -> Self {
        Self {
            tol,
            resonances: scan
                .resonances
                .iter()
                .map(|a| AtrJson {
                    omega: a.omega,
                    direction: a.direction.name(),
                    transmittance: a.transmittance,
                    dead_side_reflectance: a.dead_side_reflectance,
                    live_side_reflectance: a.live_side_reflectance,
                })
                .collect(),
            bidirectional: scan.bidirectional.clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use scatternet::analysis::{sweep_matrices, SweepGrid};
    use scatternet::TransferMatrix;

    #[test]
    fn floats_round_trip() {
        for x in [0.1, -1.0 / 3.0, 1e-300, 6.02214076e23, f64::MAX, -0.0] {
            let s = fmt_f64(x);
            assert_eq!(s.parse::<f64>().unwrap().to_bits(), x.to_bits(), "{s}");
        }
        assert_eq!(fmt_f64(f64::NAN), "NaN");
        assert_eq!(fmt_f64(f64::NEG_INFINITY), "-inf");
    }

    #[test]
    fn json_uses_scientific_floats_and_null() {
        #[derive(Serialize)]
        struct S {
            a: f64,
            b: f64,
            n: usize,
        }
        let s = to_json_string(&S { a: 0.5, b: f64::NAN, n: 3 });
        assert!(s.contains("\"a\": 5.0000000000000000e-1"), "{s}");
        assert!(s.contains("\"b\": null"), "{s}");
        assert!(s.contains("\"n\": 3"), "{s}");
        let v: serde_json::Value = serde_json::from_str(&s).unwrap();
        assert_eq!(v["a"].as_f64(), Some(0.5));
    }

    #[test]
    fn csv_has_header_and_flags() {
        let fam = |w: f64| {
            if w > 1.5 {
                Err(scatternet::Error::InvalidParameter("boom".into()))
            } else {
                Ok(TransferMatrix::identity())
            }
        };
        let recs = sweep_matrices(&fam, &SweepGrid::new(1.0, 2.0, 3).unwrap()).unwrap();
        let mut buf = Vec::new();
        write_sweep_csv(&mut buf, &recs).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 4);
        assert_eq!(lines[0], CSV_HEADER.join(","));
        assert!(lines[1].starts_with("1.0000000000000000e0,1.0000000000000000e0,"));
        assert!(lines[3].contains("NaN"));
        assert!(lines[3].contains("error="));
    }
}
