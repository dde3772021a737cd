//! Minimal line plots written as standalone SVG.

use std::fmt::Write;

#[derive(Debug, Clone, PartialEq)]
pub struct Plot {
    pub name: String,
    pub title: String,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

const W: f64 = 640.0;
const H: f64 = 400.0;
const PAD: f64 = 48.0;

impl Plot {
    pub fn new(name: &str, title: &str, x: Vec<f64>, y: Vec<f64>) -> Plot {
        Plot { name: name.into(), title: title.into(), x, y }
    }

    pub fn to_svg(&self) -> String {
        let finite = |v: &&f64| v.is_finite();
        let (x0, x1) = bounds(self.x.iter().filter(finite));
        let (y0, y1) = bounds(self.y.iter().filter(finite));
        let sx = |x: f64| PAD + (x - x0) / (x1 - x0) * (W - 2.0 * PAD);
        let sy = |y: f64| H - PAD - (y - y0) / (y1 - y0) * (H - 2.0 * PAD);
        let mut pts = String::new();
        for (x, y) in self.x.iter().zip(&self.y) {
            if x.is_finite() && y.is_finite() {
                let _ = write!(pts, "{:.2},{:.2} ", sx(*x), sy(*y));
            }
        }
        let mut s = String::new();
        let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#);
        let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
        let _ = writeln!(s, r#"<text x="{}" y="24" font-family="sans-serif" font-size="14" text-anchor="middle">{}</text>"#, W / 2.0, escape(&self.title));
        let _ = writeln!(
            s,
            r#"<rect x="{PAD}" y="{PAD}" width="{}" height="{}" fill="none" stroke="black"/>"#,
            W - 2.0 * PAD,
            H - 2.0 * PAD
        );
        for (v, y) in [(y0, H - PAD), (y1, PAD)] {
            let _ = writeln!(s, r#"<text x="{}" y="{y}" font-family="sans-serif" font-size="10" text-anchor="end">{v:.3e}</text>"#, PAD - 4.0);
        }
        for (v, x) in [(x0, PAD), (x1, W - PAD)] {
            let _ = writeln!(s, r#"<text x="{x}" y="{}" font-family="sans-serif" font-size="10" text-anchor="middle">{v:.3}</text>"#, H - PAD + 14.0);
        }
        let _ = writeln!(s, r#"<polyline fill="none" stroke="steelblue" stroke-width="1.5" points="{}"/>"#, pts.trim_end());
        s.push_str("</svg>\n");
        s
    }
}

fn bounds<'a>(vals: impl Iterator<Item = &'a f64>) -> (f64, f64) {
    let (lo, hi) = vals.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(*v), b.max(*v)));
    if !lo.is_finite() {
        (0.0, 1.0)
    } else if hi - lo < 1e-300 {
        (lo - 0.5, hi + 0.5)
    } else {
        (lo, hi)
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn svg_has_one_point_per_finite_sample() {
        let p = Plot::new("v", "a < b", vec![0.0, 1.0, 2.0], vec![1.0, f64::NAN, 3.0]);
        let svg = p.to_svg();
        assert!(svg.contains("a &lt; b"));
        let line = svg.lines().find(|l| l.starts_with("<polyline")).unwrap();
        assert_eq!(line.matches(',').count(), 2);
    }
}
