//! CSV and SVG output.

use std::fmt::Write as _;

/// C's `%.9g`.
pub fn fmt_g(x: f64) -> String {
    const P: i32 = 9;
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return if x.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    // exponent after rounding to P significant digits
    let sci = format!("{:.*e}", (P - 1) as usize, x);
    let (mant, exp) = sci.split_once('e').unwrap();
    let exp: i32 = exp.parse().unwrap();
    if exp < -4 || exp >= P {
        let mant = strip_zeros(mant);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{mant}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (P - 1 - exp) as usize;
        strip_zeros(&format!("{x:.decimals$}")).to_string()
    }
}

fn strip_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// A table of named f64 columns.
#[derive(Clone, Debug, Default)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(header: Vec<String>) -> Self {
        Self {
            header,
            rows: Vec::new(),
        }
    }

    #[cfg(test)]
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let k = self.header.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| r[k]).collect())
    }

    pub fn to_csv(&self) -> String {
        let mut s = self.header.join(",");
        s.push('\n');
        for r in &self.rows {
            let cells: Vec<String> = r.iter().map(|&v| fmt_g(v)).collect();
            s.push_str(&cells.join(","));
            s.push('\n');
        }
        s
    }
}

/// Log-log line plot: first column is x, every other column a series.
pub fn svg_loglog(t: &Table, title: &str, y_label: &str) -> String {
    const W: f64 = 720.0;
    const H: f64 = 480.0;
    const L: f64 = 80.0;
    const R: f64 = 200.0;
    const TOP: f64 = 40.0;
    const BOT: f64 = 60.0;
    let xs: Vec<f64> = t.rows.iter().map(|r| r[0]).collect();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for r in &t.rows {
        for &v in &r[1..] {
            if v > 0.0 && v.is_finite() {
                lo = lo.min(v);
                hi = hi.max(v);
            }
        }
    }
    if !lo.is_finite() {
        lo = 1e-1;
        hi = 1e1;
    }
    let (ylo, yhi) = (lo.log10().floor(), hi.log10().ceil().max(lo.log10().floor() + 1.0));
    let xmin = xs.iter().cloned().fold(f64::INFINITY, f64::min).log10().floor();
    let xmax = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max).log10().ceil();
    let px = |x: f64| L + (x.log10() - xmin) / (xmax - xmin).max(1e-12) * (W - L - R);
    let py = |y: f64| H - BOT - (y.log10() - ylo) / (yhi - ylo) * (H - TOP - BOT);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="24" text-anchor="middle" font-size="14">{}</text>"#, (L + W - R) / 2.0, escape(title));
    let _ = writeln!(
        s,
        r#"<rect x="{L}" y="{TOP}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        W - L - R,
        H - TOP - BOT
    );
    // decade ticks; thin them out on long axes
    let xstep = ((xmax - xmin) / 8.0).ceil().max(1.0) as i32;
    let mut d = xmin as i32;
    while d as f64 <= xmax {
        let x = px(10f64.powi(d));
        let _ = writeln!(s, r#"<line x1="{x:.1}" y1="{}" x2="{x:.1}" y2="{}" stroke="black"/>"#, H - BOT, H - BOT + 5.0);
        let _ = writeln!(s, r#"<text x="{x:.1}" y="{}" text-anchor="middle">1e{d}</text>"#, H - BOT + 18.0);
        d += xstep;
    }
    let ystep = ((yhi - ylo) / 8.0).ceil().max(1.0) as i32;
    let mut d = ylo as i32;
    while d as f64 <= yhi {
        let y = py(10f64.powi(d));
        let _ = writeln!(s, r#"<line x1="{}" y1="{y:.1}" x2="{L}" y2="{y:.1}" stroke="black"/>"#, L - 5.0);
        let _ = writeln!(s, r#"<text x="{}" y="{:.1}" text-anchor="end">1e{d}</text>"#, L - 8.0, y + 4.0);
        d += ystep;
    }
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, (L + W - R) / 2.0, H - 15.0, escape(&t.header[0]));
    let _ = writeln!(
        s,
        r#"<text transform="translate(20,{}) rotate(-90)" text-anchor="middle">{}</text>"#,
        (TOP + H - BOT) / 2.0,
        escape(y_label)
    );
    const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];
    for (k, name) in t.header.iter().enumerate().skip(1) {
        let color = COLORS[(k - 1) % COLORS.len()];
        let dash = if name.starts_with("low") || name.starts_with("high") {
            r#" stroke-dasharray="4 3""#
        } else {
            ""
        };
        let pts: Vec<String> = t
            .rows
            .iter()
            .filter(|r| r[k] > 0.0 && r[k].is_finite())
            .filter(|r| r[k].log10() >= ylo && r[k].log10() <= yhi)
            .map(|r| format!("{:.2},{:.2}", px(r[0]), py(r[k])))
            .collect();
        if pts.is_empty() {
            continue;
        }
        let _ = writeln!(
            s,
            r#"<polyline fill="none" stroke="{color}" stroke-width="1.5"{dash} points="{}"/>"#,
            pts.join(" ")
        );
        let ly = TOP + 14.0 * k as f64;
        let _ = writeln!(
            s,
            r#"<line x1="{}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="1.5"{dash}/>"#,
            W - R + 10.0,
            W - R + 30.0
        );
        let _ = writeln!(s, r#"<text x="{}" y="{}">{}</text>"#, W - R + 35.0, ly + 4.0, escape(name));
    }
    s.push_str("</svg>\n");
    s
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
