//! CSV and SVG output.

use std::fmt::Write as _;
use std::path::Path;

use super::ResultRow;
use crate::error::{Error, Result};

pub const CSV_HEADER: [&str; 10] = [
    "experiment",
    "scheme",
    "x_name",
    "x_value",
    "r_star_bits",
    "pm_star_db",
    "rate_analytic",
    "rate_mc_mean",
    "rate_mc_ci95",
    "clamped",
];

/// Ten significant digits, `%.10g` style: fixed notation for decimal
/// exponents in `[-5, 10)`, scientific otherwise, trailing zeros removed.
pub fn format_number(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{x:.9e}");
    let (mantissa, exp) = sci.split_once('e').expect("scientific format has an exponent");
    let exp: i32 = exp.parse().expect("exponent is an integer");
    if (-5..10).contains(&exp) {
        let decimals = (9 - exp).max(0) as usize;
        trim_zeros(format!("{x:.decimals$}"))
    } else {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim_zeros(mantissa.to_string()), exp.abs())
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> Error {
    Error::Io {
        path: path.display().to_string(),
        detail: e.to_string(),
    }
}

/// Serializes rows (header included) to any writer.
pub fn write_csv<W: std::io::Write>(rows: &[ResultRow], out: W) -> std::result::Result<(), csv::Error> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    w.write_record(CSV_HEADER)?;
    let opt = |v: Option<f64>| v.map(format_number).unwrap_or_default();
    for r in rows {
        w.write_record([
            r.experiment.clone(),
            r.scheme.clone(),
            r.x_name.clone(),
            format_number(r.x_value),
            format_number(r.r_star_bits),
            format_number(r.pm_star_db),
            format_number(r.rate_analytic),
            opt(r.rate_mc_mean),
            opt(r.rate_mc_ci95),
            r.clamped.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn emit_csv(rows: &[ResultRow], path: &Path) -> Result<()> {
    if rows.is_empty() {
        return Err(io_err(path, "no rows to write"));
    }
    let file = std::fs::File::create(path).map_err(|e| io_err(path, e))?;
    write_csv(rows, file).map_err(|e| io_err(path, e))
}

/// Reads a file written by [`emit_csv`].
pub fn parse_csv(path: &Path) -> Result<Vec<ResultRow>> {
    let mut rdr = csv::Reader::from_path(path).map_err(|e| io_err(path, e))?;
    let header = rdr.headers().map_err(|e| io_err(path, e))?.clone();
    if header.iter().ne(CSV_HEADER.iter().copied()) {
        return Err(io_err(path, "unexpected header"));
    }
    let mut rows = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| io_err(path, e))?;
        let line = i + 2;
        let num = |j: usize| -> Result<f64> {
            rec[j]
                .parse::<f64>()
                .map_err(|_| io_err(path, format!("line {line}: bad number `{}` in {}", &rec[j], CSV_HEADER[j])))
        };
        let opt = |j: usize| -> Result<Option<f64>> { if rec[j].is_empty() { Ok(None) } else { num(j).map(Some) } };
        rows.push(ResultRow {
            experiment: rec[0].to_string(),
            scheme: rec[1].to_string(),
            x_name: rec[2].to_string(),
            x_value: num(3)?,
            r_star_bits: num(4)?,
            pm_star_db: num(5)?,
            rate_analytic: num(6)?,
            rate_mc_mean: opt(7)?,
            rate_mc_ci95: opt(8)?,
            clamped: rec[9]
                .parse()
                .map_err(|_| io_err(path, format!("line {line}: bad flag `{}`", &rec[9])))?,
        });
    }
    Ok(rows)
}

const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

/// Line chart of `rate_analytic` against `x_value`, one line per scheme.
pub fn emit_svg(rows: &[ResultRow], path: &Path) -> Result<()> {
    if rows.is_empty() {
        return Err(io_err(path, "no rows to plot"));
    }
    std::fs::write(path, render_svg(rows)).map_err(|e| io_err(path, e))
}

fn render_svg(rows: &[ResultRow]) -> String {
    let (w, h) = (720.0, 480.0);
    let (left, right, top, bottom) = (70.0, 180.0, 30.0, 60.0);
    // first-seen scheme order
    let mut series: Vec<(&str, Vec<(f64, f64)>)> = Vec::new();
    for r in rows {
        let point = (r.x_value, r.rate_analytic);
        match series.iter_mut().find(|(name, _)| *name == r.scheme) {
            Some((_, pts)) => pts.push(point),
            None => series.push((&r.scheme, vec![point])),
        }
    }
    let xs = rows.iter().map(|r| r.x_value);
    let ys = rows.iter().map(|r| r.rate_analytic).filter(|y| y.is_finite());
    let (x0, x1) = (xs.clone().fold(f64::INFINITY, f64::min), xs.fold(f64::NEG_INFINITY, f64::max));
    let y1 = ys.fold(0.0, f64::max).max(1e-12) * 1.05;
    let x1 = if x1 > x0 { x1 } else { x0 + 1.0 };
    let px = |x: f64| left + (x - x0) / (x1 - x0) * (w - left - right);
    let py = |y: f64| h - bottom - y.clamp(0.0, y1) / y1 * (h - top - bottom);

    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" font-family="sans-serif" font-size="12">"#);
    let _ = writeln!(s, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<path d="M{l},{t}V{b}H{r}" fill="none" stroke="black"/>"#,
        l = left,
        t = top,
        b = h - bottom,
        r = w - right
    );
    for i in 0..=5 {
        let fx = x0 + (x1 - x0) * i as f64 / 5.0;
        let fy = y1 * i as f64 / 5.0;
        let _ = writeln!(s, r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#, px(fx), h - bottom + 18.0, format_tick(fx));
        let _ = writeln!(s, r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{}</text>"#, left - 6.0, py(fy) + 4.0, format_tick(fy));
    }
    let x_label = &rows[0].x_name;
    let _ = writeln!(s, r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{x_label}</text>"#, (left + w - right) / 2.0, h - 15.0);
    let _ = writeln!(
        s,
        r#"<text transform="translate(18,{:.1}) rotate(-90)" text-anchor="middle">average monitoring rate (bits/use)</text>"#,
        (top + h - bottom) / 2.0
    );
    for (i, (name, pts)) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let d: Vec<String> = pts.iter().map(|&(x, y)| format!("{:.2},{:.2}", px(x), py(y))).collect();
        let _ = writeln!(s, r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#, d.join(" "));
        let ly = top + 16.0 * i as f64 + 8.0;
        let lx = w - right + 12.0;
        let _ = writeln!(s, r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="2"/>"#, lx + 20.0);
        let _ = writeln!(s, r#"<text x="{}" y="{}">{name}</text>"#, lx + 26.0, ly + 4.0);
    }
    s.push_str("</svg>\n");
    s
}

fn format_tick(v: f64) -> String {
    let s = format!("{v:.3}");
    trim_zeros(s)
}
