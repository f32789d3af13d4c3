//! CSV output: numbers at 12 significant digits, LF line endings.

use std::io::{Read, Write};

use sconv::testing::ExponentReport;

use crate::error::CliError;

pub const TABLE_HEADER: [&str; 10] = [
    "n",
    "a_or_r",
    "alpha_err",
    "beta_err",
    "success",
    "log_success_over_n",
    "log_beta_over_n",
    "predicted_phi",
    "predicted_H",
    "provenance",
];

/// Formats like C's `%.12g`, with `inf`, `-inf` and `nan` spelled out.
pub fn fmt_num(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{:.11e}", x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..12).contains(&exp) {
        let decimals = (11 - exp).max(0) as usize;
        trim_zeros(format!("{:.*}", decimals, x))
    } else {
        format!("{}e{}", trim_zeros(mantissa.to_string()), exp)
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

pub fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_num).unwrap_or_default()
}

/// Rounds to what the CSV can represent.
pub fn round12(x: f64) -> f64 {
    fmt_num(x).parse().expect("formatted float parses")
}

fn parse_num(s: &str, what: &str) -> Result<f64, CliError> {
    s.parse().map_err(|_| CliError::validation(format!("bad number {s:?} in column {what}"), None))
}

fn parse_opt(s: &str, what: &str) -> Result<Option<f64>, CliError> {
    if s.is_empty() {
        Ok(None)
    } else {
        parse_num(s, what).map(Some)
    }
}

pub fn writer<W: Write>(w: W) -> csv::Writer<W> {
    csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(w)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TableRow {
    pub n: usize,
    pub a_or_r: f64,
    pub alpha_err: f64,
    pub beta_err: f64,
    pub success: f64,
    pub log_success_over_n: f64,
    pub log_beta_over_n: f64,
    pub predicted_phi: Option<f64>,
    pub predicted_h: Option<f64>,
    pub provenance: String,
}

/// Footer with the fitted slopes of `log success` and `log β` against `N`.
#[derive(Debug, Clone, PartialEq)]
pub struct FitRow {
    pub a_or_r: f64,
    pub success_rate: Option<f64>,
    pub beta_rate: Option<f64>,
    pub predicted_phi: Option<f64>,
    pub predicted_h: Option<f64>,
    pub provenance: String,
}

/// One convergence table: a row per `n` and a `fit` footer.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceTable {
    pub rows: Vec<TableRow>,
    pub fit: Option<FitRow>,
}

fn provenance_line(rep: &ExponentReport) -> String {
    let mut p = format!("{}; {} tests; {}", rep.provenance, rep.mode.name(), rep.family);
    if let Some(reg) = rep.regime {
        p.push_str(&format!("; regime {}", reg.name()));
    }
    if rep.test_scaling > 0.0 {
        p.push_str(&format!("; scaled tests a={}", fmt_num(rep.a_used)));
    }
    if rep.bracket_only {
        p.push_str("; bracket only");
    }
    p
}

impl ConvergenceTable {
    /// Table for a report, with every number rounded as it will be written.
    pub fn from_report(rep: &ExponentReport) -> Self {
        let prov = provenance_line(rep);
        let phi = rep.predicted_phi.map(round12);
        let h = rep.predicted_h.map(round12);
        let rows: Vec<TableRow> = rep
            .per_n
            .iter()
            .map(|e| {
                let big_n = (e.n as f64).powi(rep.scaling_exponent as i32);
                TableRow {
                    n: e.n,
                    a_or_r: round12(rep.value),
                    alpha_err: round12(e.alpha_err),
                    beta_err: round12(e.beta_err),
                    success: round12(e.success),
                    log_success_over_n: round12(e.ln_success / big_n),
                    log_beta_over_n: round12(e.ln_beta / big_n),
                    predicted_phi: phi,
                    predicted_h: h,
                    provenance: prov.clone(),
                }
            })
            .collect();
        let fit = (!rows.is_empty()).then(|| FitRow {
            a_or_r: round12(rep.value),
            success_rate: rep.fitted_success_rate.map(|f| round12(f.slope)),
            beta_rate: rep.fitted_beta_rate.map(|f| round12(f.slope)),
            predicted_phi: phi,
            predicted_h: h,
            provenance: prov,
        });
        ConvergenceTable { rows, fit }
    }

    pub fn write<W: Write>(&self, w: W) -> Result<(), CliError> {
        let mut out = writer(w);
        out.write_record(TABLE_HEADER)?;
        for r in &self.rows {
            out.write_record([
                r.n.to_string(),
                fmt_num(r.a_or_r),
                fmt_num(r.alpha_err),
                fmt_num(r.beta_err),
                fmt_num(r.success),
                fmt_num(r.log_success_over_n),
                fmt_num(r.log_beta_over_n),
                fmt_opt(r.predicted_phi),
                fmt_opt(r.predicted_h),
                r.provenance.clone(),
            ])?;
        }
        if let Some(f) = &self.fit {
            out.write_record([
                "fit".to_string(),
                fmt_num(f.a_or_r),
                String::new(),
                String::new(),
                String::new(),
                fmt_opt(f.success_rate),
                fmt_opt(f.beta_rate),
                fmt_opt(f.predicted_phi),
                fmt_opt(f.predicted_h),
                f.provenance.clone(),
            ])?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn parse<R: Read>(r: R) -> Result<Self, CliError> {
        let mut rd = csv::ReaderBuilder::new().has_headers(true).from_reader(r);
        let header: Vec<String> = rd.headers()?.iter().map(str::to_string).collect();
        if header != TABLE_HEADER {
            return Err(CliError::validation(format!("unexpected header {header:?}"), None));
        }
        let mut rows = Vec::new();
        let mut fit = None;
        for rec in rd.records() {
            let rec = rec?;
            let col = |i: usize| rec.get(i).unwrap_or("");
            if col(0) == "fit" {
                fit = Some(FitRow {
                    a_or_r: parse_num(col(1), "a_or_r")?,
                    success_rate: parse_opt(col(5), "log_success_over_n")?,
                    beta_rate: parse_opt(col(6), "log_beta_over_n")?,
                    predicted_phi: parse_opt(col(7), "predicted_phi")?,
                    predicted_h: parse_opt(col(8), "predicted_H")?,
                    provenance: col(9).to_string(),
                });
                continue;
            }
            rows.push(TableRow {
                n: col(0).parse().map_err(|_| CliError::validation(format!("bad n {:?}", col(0)), None))?,
                a_or_r: parse_num(col(1), "a_or_r")?,
                alpha_err: parse_num(col(2), "alpha_err")?,
                beta_err: parse_num(col(3), "beta_err")?,
                success: parse_num(col(4), "success")?,
                log_success_over_n: parse_num(col(5), "log_success_over_n")?,
                log_beta_over_n: parse_num(col(6), "log_beta_over_n")?,
                predicted_phi: parse_opt(col(7), "predicted_phi")?,
                predicted_h: parse_opt(col(8), "predicted_H")?,
                provenance: col(9).to_string(),
            });
        }
        Ok(ConvergenceTable { rows, fit })
    }
}

/// Writes the convergence table of `rep` to `w`.
pub fn emit_convergence_table<W: Write>(rep: &ExponentReport, w: W) -> Result<(), CliError> {
    ConvergenceTable::from_report(rep).write(w)
}
