//! Versioned report records (JSON and CSV) and a plain SVG sparkline.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::geometry::DomainSpec;
use crate::invariants::{
    alpha_coefficients, beta_coefficients, isoperimetric_defect, InvariantSet,
};
use crate::spectrum::SpectrumComparison;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InvariantReport {
    pub schema: u32,
    pub domain: DomainSpec,
    pub quadrature_n: usize,
    #[serde(rename = "I")]
    pub invariants: [f64; 5],
    pub beta: BTreeMap<String, f64>,
    pub alpha: [f64; 4],
    pub ell0: f64,
    pub defect: f64,
}

impl InvariantReport {
    pub fn new(domain: &DomainSpec, inv: &InvariantSet) -> Self {
        let b = beta_coefficients(inv);
        let beta = [1, 3, 5, 7, 9]
            .iter()
            .zip(b.as_array())
            .map(|(k, v)| (k.to_string(), v))
            .collect();
        let a = alpha_coefficients(inv);
        Self {
            schema: SCHEMA_VERSION,
            domain: domain.clone(),
            quadrature_n: inv.quadrature_n,
            invariants: inv.as_array(),
            beta,
            alpha: a.as_array(),
            ell0: a.ell0,
            defect: isoperimetric_defect(inv),
        }
    }

    pub const CSV_HEADER: &'static str = "domain,quadrature_n,I1,I3,I5,I7,I9,beta1,beta3,beta5,beta7,beta9,alpha0,alpha1,alpha2,alpha3,defect";

    pub fn csv_row(&self) -> String {
        let mut fields = vec![csv_quote(&self.domain.to_json()), self.quadrature_n.to_string()];
        fields.extend(self.invariants.iter().map(|v| fmt_f64(*v)));
        fields.extend(["1", "3", "5", "7", "9"].iter().map(|k| fmt_f64(self.beta[*k])));
        fields.extend(self.alpha.iter().map(|v| fmt_f64(*v)));
        fields.push(fmt_f64(self.defect));
        fields.join(",")
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumReport {
    pub schema: u32,
    pub domain: DomainSpec,
    pub seed: u64,
    #[serde(flatten)]
    pub comparison: SpectrumComparison,
}

impl SpectrumReport {
    pub const CSV_HEADER: &'static str =
        "p,q,omega,beta_numeric,beta_series,residual,stationarity,iterations";

    pub fn csv(&self) -> String {
        let mut out = String::from(Self::CSV_HEADER);
        out.push('\n');
        for r in &self.comparison.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                r.p,
                r.q,
                fmt_f64(r.omega),
                fmt_f64(r.beta_numeric),
                fmt_f64(r.beta_series),
                fmt_f64(r.residual),
                fmt_f64(r.stationarity),
                r.iterations
            );
        }
        out
    }
}

/// Outcome of one named verification check.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub value: f64,
    pub tolerance: f64,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub schema: u32,
    pub suite: String,
    pub domain: DomainSpec,
    #[serde(rename = "I")]
    pub invariants: [f64; 5],
    pub checks: Vec<Check>,
    pub passed: bool,
}

impl VerifyReport {
    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }

    pub fn text(&self) -> String {
        let mut out = format!("suite {} ({})\n", self.suite, self.domain.to_json());
        for c in &self.checks {
            let _ = writeln!(
                out,
                "{} {:<40} value={:.3e} tol={:.1e} {}",
                if c.passed { "PASS" } else { "FAIL" },
                c.name,
                c.value,
                c.tolerance,
                c.detail
            );
        }
        out
    }
}

/// Shortest round-trip representation, so reports are byte-stable.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:?}")
}

fn csv_quote(s: &str) -> String {
    format!("\"{}\"", s.replace('"', "\"\""))
}

/// Polyline of `log10 |residual|` against the row index.
pub fn residual_sparkline(residuals: &[f64], width: u32, height: u32) -> String {
    let logs: Vec<f64> = residuals
        .iter()
        .map(|r| if r.abs() > 0.0 { r.abs().log10() } else { f64::NAN })
        .collect();
    let finite: Vec<f64> = logs.iter().copied().filter(|v| v.is_finite()).collect();
    let (lo, hi) = finite
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    let span = if hi > lo { hi - lo } else { 1.0 };
    let n = logs.len().max(2) - 1;
    let pad = 2.0;
    let (w, h) = (width as f64, height as f64);
    let points: Vec<String> = logs
        .iter()
        .enumerate()
        .filter(|(_, v)| v.is_finite())
        .map(|(i, v)| {
            let x = pad + (w - 2.0 * pad) * i as f64 / n as f64;
            let y = pad + (h - 2.0 * pad) * (hi - v) / span;
            format!("{x:.2},{y:.2}")
        })
        .collect();
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width}\" height=\"{height}\" viewBox=\"0 0 {width} {height}\">\n\
         <title>log10 |beta_numeric - beta_series| from {lo:.2} to {hi:.2}</title>\n\
         <polyline fill=\"none\" stroke=\"black\" stroke-width=\"1\" points=\"{}\"/>\n</svg>\n",
        points.join(" ")
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn invariant_report_round_trips() {
        let spec = DomainSpec::circle(1.0);
        let r = InvariantReport::new(&spec, &InvariantSet::circle(1.0));
        let text = serde_json::to_string(&r).unwrap();
        assert!(text.contains("\"schema\":1"));
        assert!(text.contains("\"I\":["));
        let back: InvariantReport = serde_json::from_str(&text).unwrap();
        assert_eq!(back, r);
        assert!(r.csv_row().starts_with("\"{"));
    }

    #[test]
    fn sparkline_is_svg() {
        let svg = residual_sparkline(&[1e-3, 1e-6, 0.0, 1e-9], 120, 30);
        assert!(svg.starts_with("<svg"));
        assert_eq!(svg.matches(',').count(), 3);
    }
}
