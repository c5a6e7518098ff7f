//! Text outputs of a run: per-species CSV tables and SVG plots.

use std::fmt::Write as _;

use super::solver::SpaceTimeRecord;
use super::Field1D;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Species {
    U,
    V,
    W,
}

impl Species {
    pub const ALL: [Species; 3] = [Species::U, Species::V, Species::W];

    pub fn name(self) -> &'static str {
        match self {
            Species::U => "u",
            Species::V => "v",
            Species::W => "w",
        }
    }

    pub fn values(self, f: &Field1D) -> &[f64] {
        match self {
            Species::U => &f.u,
            Species::V => &f.v,
            Species::W => &f.w,
        }
    }
}

/// Rows are output times, columns cell centers: `t,x_0,...,x_{n-1}`.
pub fn species_csv(record: &SpaceTimeRecord, species: Species) -> String {
    let grid = record.snapshots[0].grid;
    let mut out = String::from("t");
    for x in grid.centers() {
        let _ = write!(out, ",{x}");
    }
    out.push('\n');
    for f in &record.snapshots {
        let _ = write!(out, "{}", f.time);
        for v in species.values(f) {
            let _ = write!(out, ",{v}");
        }
        out.push('\n');
    }
    out
}

const STOPS: [(f64, [f64; 3]); 5] = [
    (0.0, [68.0, 1.0, 84.0]),
    (0.25, [59.0, 82.0, 139.0]),
    (0.5, [33.0, 145.0, 140.0]),
    (0.75, [94.0, 201.0, 98.0]),
    (1.0, [253.0, 231.0, 37.0]),
];

/// Viridis-like color for `s` in `[0, 1]`.
fn color(s: f64) -> String {
    let s = if s.is_finite() { s.clamp(0.0, 1.0) } else { 0.0 };
    let k = STOPS.iter().position(|(t, _)| *t >= s).unwrap_or(STOPS.len() - 1).max(1);
    let (t0, c0) = STOPS[k - 1];
    let (t1, c1) = STOPS[k];
    let a = (s - t0) / (t1 - t0);
    let c: Vec<u8> = (0..3).map(|i| (c0[i] + a * (c1[i] - c0[i])).round() as u8).collect();
    format!("#{:02x}{:02x}{:02x}", c[0], c[1], c[2])
}

/// Heatmap of one species with space horizontal and time increasing
/// upward. Large records are subsampled to at most `max_rows` x `max_cols`
/// tiles.
pub fn heatmap_svg(record: &SpaceTimeRecord, species: Species, max_rows: usize, max_cols: usize) -> String {
    let snaps = &record.snapshots;
    let n = snaps[0].grid.n_cells;
    let rows = snaps.len().min(max_rows.max(1));
    let cols = n.min(max_cols.max(1));
    let (lo, hi) = snaps.iter().flat_map(|f| species.values(f)).fold(
        (f64::INFINITY, f64::NEG_INFINITY),
        |(lo, hi), v| (lo.min(*v), hi.max(*v)),
    );
    let span = if hi > lo { hi - lo } else { 1.0 };
    let (w, h, left, top, bar) = (600.0, 400.0, 60.0, 30.0, 20.0);
    let (tw, th) = (w / cols as f64, h / rows as f64);
    let t_end = snaps[snaps.len() - 1].time;
    let length = snaps[0].grid.length;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{}" height="{}" font-family="sans-serif" font-size="12">"#,
        left + w + 90.0,
        top + h + 50.0
    );
    let _ = writeln!(s, r#"<text x="{}" y="18">{}(x, t)</text>"#, left, species.name());
    for r in 0..rows {
        let f = &snaps[r * (snaps.len() - 1) / (rows - 1).max(1)];
        let vals = species.values(f);
        let y = top + h - (r + 1) as f64 * th;
        for c in 0..cols {
            let (a, b) = (c * n / cols, ((c + 1) * n / cols).max(c * n / cols + 1));
            let v = vals[a..b].iter().sum::<f64>() / (b - a) as f64;
            let _ = writeln!(
                s,
                r#"<rect x="{:.3}" y="{:.3}" width="{:.3}" height="{:.3}" fill="{}"/>"#,
                left + c as f64 * tw,
                y,
                tw + 0.05,
                th + 0.05,
                color((v - lo) / span)
            );
        }
    }
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">x</text>"#, left + w / 2.0, top + h + 40.0);
    let _ = writeln!(s, r#"<text x="{}" y="{}">0</text>"#, left, top + h + 15.0);
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="end">{}</text>"#, left + w, top + h + 15.0, length);
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="end">0</text>"#, left - 5.0, top + h);
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="end">{}</text>"#, left - 5.0, top + 10.0, t_end);
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="end">t</text>"#, left - 5.0, top + h / 2.0);
    for k in 0..50 {
        let _ = writeln!(
            s,
            r#"<rect x="{}" y="{:.3}" width="{}" height="{:.3}" fill="{}"/>"#,
            left + w + 15.0,
            top + h - (k + 1) as f64 * h / 50.0,
            bar,
            h / 50.0 + 0.05,
            color(k as f64 / 49.0)
        );
    }
    let _ = writeln!(s, r#"<text x="{}" y="{}">{:.3}</text>"#, left + w + 40.0, top + 10.0, hi);
    let _ = writeln!(s, r#"<text x="{}" y="{}">{:.3}</text>"#, left + w + 40.0, top + h, lo);
    s.push_str("</svg>\n");
    s
}

/// Line plot of the three densities of one field against `x`.
pub fn profile_svg(f: &Field1D, title: &str) -> String {
    let (w, h, left, top) = (600.0, 300.0, 50.0, 30.0);
    let hi = Species::ALL
        .iter()
        .flat_map(|sp| sp.values(f))
        .fold(0.0f64, |m, v| m.max(*v))
        .max(1e-12)
        * 1.05;
    let xs = f.grid.centers();
    let length = f.grid.length;
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{}" height="{}" font-family="sans-serif" font-size="12">"#,
        left + w + 80.0,
        top + h + 40.0
    );
    let _ = writeln!(s, r#"<text x="{left}" y="18">{title}</text>"#);
    let _ = writeln!(
        s,
        r#"<rect x="{left}" y="{top}" width="{w}" height="{h}" fill="none" stroke="black"/>"#
    );
    for (sp, stroke) in Species::ALL.iter().zip(["#1f77b4", "#2ca02c", "#d62728"]) {
        let pts: Vec<String> = xs
            .iter()
            .zip(sp.values(f))
            .map(|(x, v)| format!("{:.3},{:.3}", left + x / length * w, top + h - v / hi * h))
            .collect();
        let _ = writeln!(
            s,
            r#"<polyline fill="none" stroke="{stroke}" stroke-width="1.5" points="{}"/>"#,
            pts.join(" ")
        );
    }
    for (k, (sp, stroke)) in Species::ALL.iter().zip(["#1f77b4", "#2ca02c", "#d62728"]).enumerate() {
        let y = top + 15.0 + 18.0 * k as f64;
        let _ = writeln!(
            s,
            r#"<line x1="{}" y1="{y}" x2="{}" y2="{y}" stroke="{stroke}" stroke-width="2"/><text x="{}" y="{}">{}</text>"#,
            left + w + 10.0,
            left + w + 30.0,
            left + w + 35.0,
            y + 4.0,
            sp.name()
        );
    }
    let _ = writeln!(s, r#"<text x="{}" y="{}">0</text>"#, left, top + h + 15.0);
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="end">{length}</text>"#, left + w, top + h + 15.0);
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="end">{hi:.3}</text>"#, left - 5.0, top + 10.0);
    s.push_str("</svg>\n");
    s
}
