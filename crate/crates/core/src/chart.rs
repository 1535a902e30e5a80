//! Grouped bar charts of AUC as standalone SVG.

use std::fmt::Write as _;

use crate::discretize::DiscretizerKind;
use crate::domain::DomainStrategy;
use crate::error::{Error, Result};
use crate::experiment::CellResult;
use crate::pipeline::GeneratorKind;

pub const Y_MIN: f64 = 0.4;
pub const Y_MAX: f64 = 1.0;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 360.0;
const MARGIN_LEFT: f64 = 60.0;
const MARGIN_RIGHT: f64 = 130.0;
const MARGIN_TOP: f64 = 40.0;
const MARGIN_BOTTOM: f64 = 50.0;

fn colour(s: DomainStrategy) -> &'static str {
    match s {
        DomainStrategy::Provided => "#4c72b0",
        DomainStrategy::Direct => "#dd8452",
        DomainStrategy::Dp => "#55a868",
    }
}

/// One chart: the cells of a single generator and eps pair.
#[derive(Clone, Debug, PartialEq)]
pub struct Chart {
    pub generator: GeneratorKind,
    pub eps_pre: f64,
    pub eps_model: f64,
    pub svg: String,
    pub groups: usize,
    pub bars: usize,
}

impl Chart {
    pub fn file_stem(&self) -> String {
        format!("{}-eps{}-{}", self.generator.name(), self.eps_pre, self.eps_model)
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// One chart per (generator, eps pair) in first-appearance order. Failed
/// cells are left out.
pub fn charts(results: &[CellResult]) -> Result<Vec<Chart>> {
    let ok: Vec<&CellResult> = results.iter().filter(|c| c.auc.is_some()).collect();
    if ok.is_empty() {
        return Err(Error::invalid("no successful result cells to plot"));
    }
    let mut keys: Vec<(GeneratorKind, f64, f64)> = Vec::new();
    for c in &ok {
        let k = (c.generator, c.eps_pre, c.eps_model);
        if !keys.contains(&k) {
            keys.push(k);
        }
    }
    Ok(keys
        .into_iter()
        .map(|(g, pre, model)| {
            let cells: Vec<&CellResult> = ok
                .iter()
                .copied()
                .filter(|c| c.generator == g && c.eps_pre == pre && c.eps_model == model)
                .collect();
            render(g, pre, model, &cells)
        })
        .collect())
}

fn render(generator: GeneratorKind, eps_pre: f64, eps_model: f64, cells: &[&CellResult]) -> Chart {
    let discretizers: Vec<DiscretizerKind> = DiscretizerKind::ALL
        .into_iter()
        .filter(|d| cells.iter().any(|c| c.discretizer == *d))
        .collect();
    let strategies: Vec<DomainStrategy> = DomainStrategy::ALL
        .into_iter()
        .filter(|s| cells.iter().any(|c| c.strategy == *s))
        .collect();
    let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
    let y_of = |auc: f64| MARGIN_TOP + plot_h * (1.0 - (auc.clamp(Y_MIN, Y_MAX) - Y_MIN) / (Y_MAX - Y_MIN));
    let group_w = plot_w / discretizers.len() as f64;
    let bar_w = group_w * 0.8 / strategies.len() as f64;

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="20" text-anchor="middle" font-size="14">{} (discretizer eps={eps_pre}, generator eps={eps_model})</text>"#,
        MARGIN_LEFT + plot_w / 2.0,
        escape(generator.name())
    );
    for k in 0..=6 {
        let v = Y_MIN + 0.1 * k as f64;
        let y = y_of(v);
        let _ = writeln!(
            svg,
            r##"<line x1="{MARGIN_LEFT}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#dddddd"/>"##,
            MARGIN_LEFT + plot_w
        );
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{v:.1}</text>"#,
            MARGIN_LEFT - 6.0,
            y + 4.0
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="16" y="{:.2}" text-anchor="middle" transform="rotate(-90 16 {:.2})">AUC</text>"#,
        MARGIN_TOP + plot_h / 2.0,
        MARGIN_TOP + plot_h / 2.0
    );
    let mut bars = 0;
    for (gi, d) in discretizers.iter().enumerate() {
        let gx = MARGIN_LEFT + group_w * gi as f64 + group_w * 0.1;
        for (si, s) in strategies.iter().enumerate() {
            let Some(cell) = cells.iter().find(|c| c.discretizer == *d && c.strategy == *s) else {
                continue;
            };
            let auc = cell.auc.unwrap_or(Y_MIN);
            let y = y_of(auc);
            let _ = writeln!(
                svg,
                r#"<rect x="{:.2}" y="{y:.2}" width="{bar_w:.2}" height="{:.2}" fill="{}"><title>{} / {}: {auc:.3}</title></rect>"#,
                gx + bar_w * si as f64,
                MARGIN_TOP + plot_h - y,
                colour(*s),
                d.name(),
                s.name()
            );
            bars += 1;
        }
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            MARGIN_LEFT + group_w * (gi as f64 + 0.5),
            MARGIN_TOP + plot_h + 20.0,
            d.name()
        );
    }
    let _ = writeln!(
        svg,
        r#"<line x1="{MARGIN_LEFT}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="black"/>"#,
        MARGIN_TOP + plot_h,
        MARGIN_LEFT + plot_w,
        MARGIN_TOP + plot_h
    );
    for (si, s) in strategies.iter().enumerate() {
        let y = MARGIN_TOP + 10.0 + 20.0 * si as f64;
        let x = WIDTH - MARGIN_RIGHT + 15.0;
        let _ = writeln!(
            svg,
            r#"<rect x="{x}" y="{y}" width="12" height="12" fill="{}"/>"#,
            colour(*s)
        );
        let _ = writeln!(svg, r#"<text x="{}" y="{}">{}</text>"#, x + 18.0, y + 10.0, s.name());
    }
    svg.push_str("</svg>\n");
    Chart {
        generator,
        eps_pre,
        eps_model,
        svg,
        groups: discretizers.len(),
        bars,
    }
}
