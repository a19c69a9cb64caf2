//! Sweep execution and CSV output.

use std::io::Write;

use fadekit::fading::MrcChannel;
use fadekit::metrics::{aber_closed_form, acc_closed_form, ModulationSpec};
use fadekit::noise::NoiseModel;
use fadekit::oracle::{
    acc_quadrature, aber_quadrature, simulate_error_rate, ConditionalQ, LogIntegrand, QuadratureSpec,
};
use fadekit::quadrature::integrate_from_zero;
use fadekit::Error;
use rayon::prelude::*;

use crate::error::CliError;
use crate::scenario::{Method, Metric, Scenario, SnrConvention};

pub const CSV_HEADER: &str = "snr_db,snr_convention,metric,value,method,std_error,flags";

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub snr_db: f64,
    pub convention: SnrConvention,
    pub metric: Metric,
    pub value: Option<f64>,
    pub method: &'static str,
    pub std_error: Option<f64>,
    pub flags: Vec<String>,
}

impl Row {
    pub fn failed(&self) -> bool {
        self.value.is_none()
    }
}

fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Evaluates every sweep point. Failures at a point are reported in that
/// row's flags; only scenario-level problems return an error.
pub fn run_scenario(sc: &Scenario) -> Result<Vec<Row>, CliError> {
    sc.validate()?;
    let ctx = Context::new(sc)?;
    Ok(sc.sweep.points().into_par_iter().map(|db| ctx.row(db)).collect())
}

struct Context<'a> {
    sc: &'a Scenario,
    modulation: Option<ModulationSpec>,
    noise: Option<NoiseModel>,
    approx: Option<fadekit::ExpSumApprox>,
    quad: QuadratureSpec,
}

impl<'a> Context<'a> {
    fn new(sc: &'a Scenario) -> Result<Self, CliError> {
        let usage = |e: Error| CliError::Usage(e.to_string());
        let (modulation, noise, approx) = if sc.metric == Metric::Aber {
            let m = ModulationSpec::new(sc.modulation.expect("validated").to_modulation()).map_err(usage)?;
            let n = NoiseModel::new(sc.noise.shape).map_err(usage)?;
            let a = match sc.method {
                Method::Closed | Method::QuadratureApprox => Some(sc.approximation()?),
                _ => None,
            };
            (Some(m), Some(n), a)
        } else {
            (None, None, None)
        };
        Ok(Context {
            sc,
            modulation,
            noise,
            approx,
            quad: QuadratureSpec::default(),
        })
    }

    fn per_branch(&self, total_or_branch: f64) -> f64 {
        match self.sc.snr_convention {
            SnrConvention::PerBranch => total_or_branch,
            SnrConvention::Total => total_or_branch / self.sc.branches as f64,
        }
    }

    fn channel(&self, mean_snr: f64) -> fadekit::Result<MrcChannel> {
        MrcChannel::new(self.sc.fading.params(mean_snr)?, self.sc.branches)
    }

    fn row(&self, db: f64) -> Row {
        let mut row = Row {
            snr_db: db,
            convention: self.sc.snr_convention,
            metric: self.sc.metric,
            value: None,
            method: self.sc.method.label(),
            std_error: None,
            flags: Vec::new(),
        };
        match self.evaluate(db, &mut row) {
            Ok(v) if v.is_finite() => row.value = Some(v),
            Ok(v) => row.flags.push(format!("error=non-finite result {v}")),
            Err(e) => {
                let kind = if e.is_accuracy() { "accuracy" } else { "error" };
                row.flags.push(format!("{kind}={e}"));
            }
        }
        row
    }

    fn evaluate(&self, db: f64, row: &mut Row) -> fadekit::Result<f64> {
        let sc = self.sc;
        match sc.metric {
            Metric::Aber => {
                let ch = self.channel(self.per_branch(db_to_linear(db)))?;
                let m = self.modulation.as_ref().expect("aber context");
                let noise = self.noise.as_ref().expect("aber context");
                match sc.method {
                    Method::Closed => {
                        let v = aber_closed_form(m, self.approx.as_ref().expect("approx"), &ch)?;
                        if v.out_of_range {
                            row.flags.push("out-of-range".into());
                        }
                        Ok(v.value)
                    }
                    Method::QuadratureExact => Ok(aber_quadrature(m, ConditionalQ::Exact(noise), &ch, &self.quad)?.value),
                    Method::QuadratureApprox => {
                        let q = ConditionalQ::Approx(self.approx.as_ref().expect("approx"));
                        Ok(aber_quadrature(m, q, &ch, &self.quad)?.value)
                    }
                    Method::Mc(mc) => {
                        let e = simulate_error_rate(m, noise, &ch, mc.samples, mc.seed, mc.mode.to_mode())?;
                        row.std_error = Some(e.std_error);
                        Ok(e.estimate)
                    }
                }
            }
            Metric::Acc => {
                let ch = self.channel(self.per_branch(db_to_linear(db)))?;
                match sc.method {
                    Method::Closed => {
                        let v = acc_closed_form(&ch)?;
                        if v.out_of_range {
                            row.flags.push("out-of-range".into());
                        }
                        Ok(v.value)
                    }
                    Method::QuadratureExact => Ok(acc_quadrature(&ch, &self.quad, LogIntegrand::Exact)?.value),
                    Method::QuadratureApprox => Ok(acc_quadrature(&ch, &self.quad, LogIntegrand::Approx)?.value),
                    Method::Mc(_) => Err(Error::Usage("mc is available for aber only".into())),
                }
            }
            Metric::Pdf | Metric::Cdf => {
                let mean_db = sc.mean_snr_db.expect("validated");
                let ch = self.channel(self.per_branch(db_to_linear(mean_db)))?;
                let g = db_to_linear(db);
                if sc.metric == Metric::Pdf {
                    let d = ch.pdf_flagged(g)?;
                    if d.underflow {
                        row.flags.push("underflow".into());
                    }
                    Ok(d.value)
                } else if sc.method == Method::Closed {
                    ch.cdf(g)
                } else {
                    let head = (ch.mu_t() < 1.0).then_some(ch.mu_t());
                    Ok(integrate_from_zero(|x| ch.pdf(x), g, head, &self.quad)?.value)
                }
            }
        }
    }
}

fn num(v: f64) -> String {
    format!("{v:.16e}")
}

fn sanitize(flag: &str) -> String {
    flag.chars()
        .map(|c| match c {
            ',' => ';',
            '\n' | '\r' => ' ',
            '"' => '\'',
            c => c,
        })
        .collect()
}

pub fn format_row(r: &Row) -> String {
    let flags: Vec<String> = r.flags.iter().map(|f| sanitize(f)).collect();
    format!(
        "{},{},{},{},{},{},{}",
        num(r.snr_db),
        r.convention.as_str(),
        r.metric.as_str(),
        r.value.map(num).unwrap_or_default(),
        r.method,
        r.std_error.map(num).unwrap_or_default(),
        flags.join("|"),
    )
}

pub fn write_csv<W: Write>(rows: &[Row], mut out: W) -> std::io::Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for r in rows {
        writeln!(out, "{}", format_row(r))?;
    }
    out.flush()
}

pub fn to_csv(rows: &[Row]) -> String {
    let mut buf = Vec::new();
    write_csv(rows, &mut buf).expect("writing to memory");
    String::from_utf8(buf).expect("CSV is UTF-8")
}
