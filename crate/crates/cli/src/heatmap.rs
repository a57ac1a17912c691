//! Standalone SVG heatmaps of rejection-rate grids: one panel per
//! (degrees-of-freedom, test) pair, cells colored on a diverging scale
//! centered at the nominal 5% level. Output is a pure function of the parsed
//! rows (no timestamps, no generated ids) so identical inputs give
//! identical bytes.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use anyhow::{bail, Result};
use srnlsd::montecarlo::SizeRow;

const NOMINAL: f64 = 0.05;
/// Rates at or above this saturate the hot end of the scale.
const HOT_CAP: f64 = 0.5;

const CELL_W: i64 = 52;
const CELL_H: i64 = 30;
const MARGIN_LEFT: i64 = 64;
const MARGIN_TOP: i64 = 34;
const MARGIN_BOTTOM: i64 = 42;
const MARGIN_RIGHT: i64 = 12;
const PANEL_GAP: i64 = 18;
const LEGEND_H: i64 = 58;

fn lerp(a: u8, b: u8, t: f64) -> u8 {
    (a as f64 + (b as f64 - a as f64) * t).round() as u8
}

/// White at the nominal rate, blue toward 0, red toward `HOT_CAP` and beyond.
fn rate_color(rate: f64) -> (u8, u8, u8) {
    let white = (255, 255, 255);
    let blue = (33, 102, 172);
    let red = (178, 24, 43);
    if rate <= NOMINAL {
        let t = ((NOMINAL - rate) / NOMINAL).clamp(0.0, 1.0);
        (
            lerp(white.0, blue.0, t),
            lerp(white.1, blue.1, t),
            lerp(white.2, blue.2, t),
        )
    } else {
        let t = ((rate - NOMINAL) / (HOT_CAP - NOMINAL)).clamp(0.0, 1.0);
        (
            lerp(white.0, red.0, t),
            lerp(white.1, red.1, t),
            lerp(white.2, red.2, t),
        )
    }
}

fn text_color(bg: (u8, u8, u8)) -> &'static str {
    let luminance = 0.299 * bg.0 as f64 + 0.587 * bg.1 as f64 + 0.114 * bg.2 as f64;
    if luminance < 140.0 {
        "#ffffff"
    } else {
        "#000000"
    }
}

fn fmt_df(df: f64) -> String {
    format!("{df}")
}

fn test_label(test: &str) -> String {
    match test {
        "nlsd" => "NLSD".to_string(),
        "srnlsd" => "SR-NLSD".to_string(),
        other => other.to_string(),
    }
}

struct Panel<'a> {
    df: f64,
    test: &'a str,
}

/// Render the long-format rows into a complete SVG document.
pub fn render_heatmap(rows: &[SizeRow]) -> Result<String> {
    if rows.is_empty() {
        bail!("no cells to plot");
    }
    let axis_name = rows[0].axis2_name.clone();
    if rows.iter().any(|r| r.axis2_name != axis_name) {
        bail!("mixed axis2_name values in size-grid CSV");
    }

    let t_values: Vec<usize> = rows
        .iter()
        .map(|r| r.t)
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let a_values: Vec<usize> = rows
        .iter()
        .map(|r| r.axis2_value)
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let mut panels: Vec<Panel> = Vec::new();
    {
        let mut seen = BTreeSet::new();
        for r in rows {
            if seen.insert((r.df.to_bits(), r.test.as_str())) {
                panels.push(Panel {
                    df: r.df,
                    test: &r.test,
                });
            }
        }
        panels.sort_by(|a, b| {
            a.df.partial_cmp(&b.df)
                .unwrap()
                .then_with(|| a.test.cmp(b.test))
        });
    }

    let tests: Vec<&str> = {
        let mut s: Vec<&str> = panels.iter().map(|p| p.test).collect();
        s.sort_unstable();
        s.dedup();
        s
    };
    let dfs: Vec<f64> = {
        let mut s: Vec<f64> = panels.iter().map(|p| p.df).collect();
        s.sort_by(|a, b| a.partial_cmp(b).unwrap());
        s.dedup_by(|a, b| a == b);
        s
    };

    let panel_w = MARGIN_LEFT + CELL_W * t_values.len() as i64 + MARGIN_RIGHT;
    let panel_h = MARGIN_TOP + CELL_H * a_values.len() as i64 + MARGIN_BOTTOM;
    let total_w = panel_w * tests.len() as i64 + PANEL_GAP * (tests.len() as i64 + 1);
    let total_h = panel_h * dfs.len() as i64 + PANEL_GAP * (dfs.len() as i64 + 1) + LEGEND_H;

    let mut svg = String::new();
    writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{total_w}" height="{total_h}" viewBox="0 0 {total_w} {total_h}" font-family="Helvetica, Arial, sans-serif">"#
    )?;
    writeln!(
        svg,
        r##"<rect width="{total_w}" height="{total_h}" fill="#ffffff"/>"##
    )?;

    for (di, &df) in dfs.iter().enumerate() {
        for (si, &test) in tests.iter().enumerate() {
            let x0 = PANEL_GAP + si as i64 * (panel_w + PANEL_GAP);
            let y0 = PANEL_GAP + di as i64 * (panel_h + PANEL_GAP);
            render_panel(
                &mut svg, rows, df, test, &axis_name, &t_values, &a_values, x0, y0,
            )?;
        }
    }

    render_legend(&mut svg, total_w, total_h - LEGEND_H + 10)?;
    writeln!(svg, "</svg>")?;
    Ok(svg)
}

#[allow(clippy::too_many_arguments)]
fn render_panel(
    svg: &mut String,
    rows: &[SizeRow],
    df: f64,
    test: &str,
    axis_name: &str,
    t_values: &[usize],
    a_values: &[usize],
    x0: i64,
    y0: i64,
) -> Result<()> {
    let title = format!("{} — df {}", test_label(test), fmt_df(df));
    writeln!(
        svg,
        r#"<text x="{}" y="{}" font-size="13" font-weight="bold">{title}</text>"#,
        x0 + MARGIN_LEFT,
        y0 + 18
    )?;

    let grid_x = x0 + MARGIN_LEFT;
    let grid_y = y0 + MARGIN_TOP;

    // cells: largest axis2 value on the top row
    for (ai, &a) in a_values.iter().rev().enumerate() {
        let cy = grid_y + ai as i64 * CELL_H;
        for (ti, &t) in t_values.iter().enumerate() {
            let cx = grid_x + ti as i64 * CELL_W;
            let cell = rows
                .iter()
                .find(|r| r.df == df && r.test == test && r.t == t && r.axis2_value == a);
            match cell {
                Some(row) => match row.rate {
                    Some(rate) => {
                        let (r, g, b) = rate_color(rate);
                        writeln!(
                            svg,
                            r##"<rect x="{cx}" y="{cy}" width="{CELL_W}" height="{CELL_H}" fill="rgb({r},{g},{b})" stroke="#888888" stroke-width="0.5"/>"##
                        )?;
                        writeln!(
                            svg,
                            r#"<text x="{}" y="{}" font-size="10" text-anchor="middle" fill="{}">{:.3}</text>"#,
                            cx + CELL_W / 2,
                            cy + CELL_H / 2 + 4,
                            text_color((r, g, b)),
                            rate
                        )?;
                    }
                    None => {
                        writeln!(
                            svg,
                            r##"<rect x="{cx}" y="{cy}" width="{CELL_W}" height="{CELL_H}" fill="#d9d9d9" stroke="#888888" stroke-width="0.5"/>"##
                        )?;
                        writeln!(
                            svg,
                            r##"<text x="{}" y="{}" font-size="10" text-anchor="middle" fill="#555555">n/a</text>"##,
                            cx + CELL_W / 2,
                            cy + CELL_H / 2 + 4
                        )?;
                    }
                },
                None => {
                    writeln!(
                        svg,
                        r##"<rect x="{cx}" y="{cy}" width="{CELL_W}" height="{CELL_H}" fill="#f5f5f5" stroke="#888888" stroke-width="0.5"/>"##
                    )?;
                }
            }
        }
        // y tick label
        writeln!(
            svg,
            r#"<text x="{}" y="{}" font-size="10" text-anchor="end">{a}</text>"#,
            grid_x - 6,
            cy + CELL_H / 2 + 4
        )?;
    }

    // x tick labels and axis titles
    let below = grid_y + a_values.len() as i64 * CELL_H;
    for (ti, &t) in t_values.iter().enumerate() {
        writeln!(
            svg,
            r#"<text x="{}" y="{}" font-size="10" text-anchor="middle">{t}</text>"#,
            grid_x + ti as i64 * CELL_W + CELL_W / 2,
            below + 14
        )?;
    }
    writeln!(
        svg,
        r#"<text x="{}" y="{}" font-size="11" text-anchor="middle">T</text>"#,
        grid_x + t_values.len() as i64 * CELL_W / 2,
        below + 32
    )?;
    writeln!(
        svg,
        r#"<text x="{}" y="{}" font-size="11" text-anchor="middle" transform="rotate(-90 {} {})">{axis_name}</text>"#,
        x0 + 16,
        grid_y + a_values.len() as i64 * CELL_H / 2,
        x0 + 16,
        grid_y + a_values.len() as i64 * CELL_H / 2
    )?;
    Ok(())
}

fn render_legend(svg: &mut String, total_w: i64, y: i64) -> Result<()> {
    let bar_w = 240_i64;
    let bar_h = 12_i64;
    let x0 = (total_w - bar_w) / 2;
    let steps = 48;
    let step_w = bar_w as f64 / steps as f64;
    for i in 0..steps {
        let rate = HOT_CAP * (i as f64 + 0.5) / steps as f64;
        let (r, g, b) = rate_color(rate);
        let sx = x0 as f64 + i as f64 * step_w;
        writeln!(
            svg,
            r#"<rect x="{sx:.2}" y="{y}" width="{:.2}" height="{bar_h}" fill="rgb({r},{g},{b})"/>"#,
            step_w + 0.3
        )?;
    }
    writeln!(
        svg,
        r##"<rect x="{x0}" y="{y}" width="{bar_w}" height="{bar_h}" fill="none" stroke="#444444" stroke-width="0.6"/>"##
    )?;
    // ticks at 0, the nominal level, and the saturation cap
    for (rate, label) in [(0.0, "0"), (NOMINAL, "0.05"), (HOT_CAP, "0.5+")] {
        let tx = x0 as f64 + bar_w as f64 * rate / HOT_CAP;
        writeln!(
            svg,
            r##"<line x1="{tx:.2}" y1="{y}" x2="{tx:.2}" y2="{}" stroke="#444444" stroke-width="0.6"/>"##,
            y + bar_h + 3
        )?;
        writeln!(
            svg,
            r#"<text x="{tx:.2}" y="{}" font-size="9" text-anchor="middle">{label}</text>"#,
            y + bar_h + 14
        )?;
    }
    writeln!(
        svg,
        r#"<text x="{}" y="{}" font-size="10" text-anchor="middle">rejection rate (white = nominal 0.05)</text>"#,
        total_w / 2,
        y + bar_h + 30
    )?;
    Ok(())
}
