//! Classification of evaluation results and a static SVG heatmap.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::io::Write;

use serde::Serialize;

use super::config::Thresholds;
use crate::error::Result;
use crate::evaluation::EvaluationResult;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BiasClass {
    Underestimation,
    Acceptable,
    Overestimation,
    Missing,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ResolutionClass {
    Negative,
    Poor,
    Acceptable,
    Missing,
}

impl BiasClass {
    pub fn as_str(&self) -> &'static str {
        match self {
            BiasClass::Underestimation => "underestimation",
            BiasClass::Acceptable => "acceptable",
            BiasClass::Overestimation => "overestimation",
            BiasClass::Missing => "missing",
        }
    }
}

impl ResolutionClass {
    pub fn as_str(&self) -> &'static str {
        match self {
            ResolutionClass::Negative => "negative",
            ResolutionClass::Poor => "poor",
            ResolutionClass::Acceptable => "acceptable",
            ResolutionClass::Missing => "missing",
        }
    }
}

pub fn classify_bias(bias: Option<f64>, threshold: f64) -> BiasClass {
    match bias {
        None => BiasClass::Missing,
        Some(b) if b < -threshold => BiasClass::Underestimation,
        Some(b) if b > threshold => BiasClass::Overestimation,
        Some(_) => BiasClass::Acceptable,
    }
}

pub fn classify_resolution(resolution: Option<f64>, threshold: f64) -> ResolutionClass {
    match resolution {
        None => ResolutionClass::Missing,
        Some(r) if r < 0.0 => ResolutionClass::Negative,
        Some(r) if r < threshold => ResolutionClass::Poor,
        Some(_) => ResolutionClass::Acceptable,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportRow {
    pub design_id: String,
    pub measure: String,
    pub level: String,
    pub bias: Option<f64>,
    pub bias_class: Option<BiasClass>,
    pub resolution: Option<f64>,
    pub resolution_class: ResolutionClass,
}

/// One row per evaluation result. Bias classes are absent for the
/// within-network measures, which have no bias.
pub fn classify(results: &[EvaluationResult], t: &Thresholds) -> Vec<ReportRow> {
    results
        .iter()
        .map(|r| ReportRow {
            design_id: r.design_id.clone(),
            measure: r.measure.to_string(),
            level: r.level.to_string(),
            bias: r.bias,
            bias_class: (!r.measure.is_within()).then(|| classify_bias(r.bias, t.bias_threshold)),
            resolution: r.resolution,
            resolution_class: classify_resolution(r.resolution, t.resolution_threshold),
        })
        .collect()
}

pub fn write_report_csv<W: Write>(mut out: W, rows: &[ReportRow]) -> Result<()> {
    writeln!(out, "design_id,measure,level,bias,bias_class,resolution,resolution_class")?;
    let num = |x: Option<f64>| x.map(|v| v.to_string()).unwrap_or_default();
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.design_id,
            r.measure,
            r.level,
            num(r.bias),
            r.bias_class.map(|c| c.as_str()).unwrap_or(""),
            num(r.resolution),
            r.resolution_class.as_str()
        )?;
    }
    Ok(())
}

const CELL: usize = 22;
const LEFT: usize = 170;
const TOP: usize = 130;

fn bias_color(c: BiasClass) -> &'static str {
    match c {
        BiasClass::Underestimation => "#d7301f",
        BiasClass::Acceptable => "#f7f7f7",
        BiasClass::Overestimation => "#2b8cbe",
        BiasClass::Missing => "#bdbdbd",
    }
}

fn resolution_color(c: ResolutionClass) -> &'static str {
    match c {
        ResolutionClass::Negative => "#d7301f",
        ResolutionClass::Poor => "#fdae6b",
        ResolutionClass::Acceptable => "#31a354",
        ResolutionClass::Missing => "#bdbdbd",
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Two stacked grids (bias, then resolution): one column per design cell,
/// one row per measure and level.
pub fn heatmap_svg(rows: &[ReportRow]) -> String {
    let mut designs: Vec<&str> = Vec::new();
    for r in rows {
        if !designs.contains(&r.design_id.as_str()) {
            designs.push(&r.design_id);
        }
    }
    let keys: BTreeSet<(String, String)> = rows.iter().map(|r| (r.level.clone(), r.measure.clone())).collect();
    let keys: Vec<(String, String)> = keys.into_iter().collect();
    let panel = keys.len() * CELL + 40;
    let width = LEFT + designs.len() * CELL + 20;
    let height = TOP + 2 * panel + 20;
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" font-family="sans-serif" font-size="10">"#
    );
    for (c, d) in designs.iter().enumerate() {
        let x = LEFT + c * CELL + CELL / 2;
        let _ = writeln!(svg, r#"<text transform="translate({x},{}) rotate(-60)">{}</text>"#, TOP - 6, escape(d));
    }
    for (p, title) in ["bias", "resolution"].iter().enumerate() {
        let y0 = TOP + p * panel;
        let _ = writeln!(svg, r#"<text x="4" y="{}" font-weight="bold">{title}</text>"#, y0 + 12);
        for (k, (level, measure)) in keys.iter().enumerate() {
            let y = y0 + 20 + k * CELL;
            let _ = writeln!(svg, r#"<text x="4" y="{}">{} {}</text>"#, y + CELL / 2 + 3, escape(level), escape(measure));
            for (c, d) in designs.iter().enumerate() {
                let Some(r) = rows.iter().find(|r| r.design_id == *d && &r.level == level && &r.measure == measure) else {
                    continue;
                };
                let (fill, value) = if p == 0 {
                    match r.bias_class {
                        Some(bc) => (bias_color(bc), r.bias),
                        None => continue,
                    }
                } else {
                    (resolution_color(r.resolution_class), r.resolution)
                };
                let x = LEFT + c * CELL;
                let label = value.map(|v| format!("{v:.2}")).unwrap_or_else(|| "NA".into());
                let _ = writeln!(
                    svg,
                    r#"<rect x="{x}" y="{y}" width="{CELL}" height="{CELL}" fill="{fill}" stroke="white"><title>{}</title></rect>"#,
                    escape(&label)
                );
            }
        }
    }
    svg.push_str("</svg>\n");
    svg
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bias_thresholds() {
        assert_eq!(classify_bias(Some(-0.31), 0.3), BiasClass::Underestimation);
        assert_eq!(classify_bias(Some(-0.3), 0.3), BiasClass::Acceptable);
        assert_eq!(classify_bias(Some(0.31), 0.3), BiasClass::Overestimation);
        assert_eq!(classify_bias(None, 0.3), BiasClass::Missing);
    }

    #[test]
    fn resolution_thresholds() {
        assert_eq!(classify_resolution(Some(0.5), 0.5), ResolutionClass::Acceptable);
        assert_eq!(classify_resolution(Some(0.49), 0.5), ResolutionClass::Poor);
        assert_eq!(classify_resolution(Some(-0.1), 0.5), ResolutionClass::Negative);
    }

    #[test]
    fn empty_report() {
        let rows = classify(&[], &Thresholds::default());
        assert!(rows.is_empty());
        assert!(heatmap_svg(&rows).starts_with("<svg"));
    }
}
