//! Minimal deterministic SVG rendering of a bifurcation diagram: time 2L on
//! the horizontal axis, sign(y(-L))·z on the vertical, one labelled polyline
//! per branch. A convenience view only; the CSV is the contract surface.

use std::fmt::Write;
use timemap::analysis::Diagram;
use timemap::maps::Family;

const W: f64 = 960.0;
const H: f64 = 640.0;
const ML: f64 = 60.0;
const MR: f64 = 80.0;
const MT: f64 = 30.0;
const MB: f64 = 50.0;

fn color(family: Family) -> &'static str {
    match family {
        Family::I => "#1f77b4",
        Family::A => "#2ca02c",
        Family::B => "#d62728",
        Family::C => "#9467bd",
        Family::D => "#ff7f0e",
        Family::Dprime | Family::Bprime => "#8c564b",
    }
}

pub fn render(d: &Diagram) -> String {
    let t_max = 2.0 * d.l_max;
    let (z_lo, z_hi) = (-d.config.z_star.max(1.0), 2.05);
    let sx = |t: f64| ML + (W - ML - MR) * t / t_max;
    let sy = |z: f64| MT + (H - MT - MB) * (z_hi - z) / (z_hi - z_lo);

    let mut s = String::new();
    let _ = writeln!(
        s,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" viewBox=\"0 0 {W} {H}\">"
    );
    let _ = writeln!(s, "<rect width=\"{W}\" height=\"{H}\" fill=\"white\"/>");
    // axes: 2L horizontal, signed z vertical; dotted guides at z = 0, z*, 2
    let _ = writeln!(
        s,
        "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>",
        ML,
        sy(0.0),
        W - MR,
        sy(0.0)
    );
    let _ = writeln!(
        s,
        "<line x1=\"{ML}\" y1=\"{MT}\" x2=\"{ML}\" y2=\"{}\" stroke=\"black\"/>",
        H - MB
    );
    for (z, label) in [
        (d.config.z_star, "z*"),
        (2.0, "2"),
        (-d.config.z_star, "-z*"),
    ] {
        let _ = writeln!(
            s,
            "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"#bbbbbb\" stroke-dasharray=\"3 5\"/>",
            ML,
            sy(z),
            W - MR,
            sy(z)
        );
        let _ = writeln!(
            s,
            "<text x=\"{}\" y=\"{}\" font-size=\"11\" fill=\"#666666\">{label}</text>",
            6.0,
            sy(z) + 4.0
        );
    }
    let _ = writeln!(
        s,
        "<text x=\"{}\" y=\"{}\" font-size=\"12\">2L</text>",
        W - MR + 10.0,
        sy(0.0) + 4.0
    );

    for (branch, line) in &d.branches {
        if line.is_empty() {
            continue;
        }
        let mut pts = String::new();
        for p in line {
            let _ = write!(pts, "{:.2},{:.2} ", sx(p.t), sy(p.signed_z));
        }
        let dash = if branch.winding > 0 {
            " stroke-dasharray=\"6 3\""
        } else {
            ""
        };
        let _ = writeln!(
            s,
            "<polyline points=\"{}\" fill=\"none\" stroke=\"{}\" stroke-width=\"1.4\"{dash}/>",
            pts.trim_end(),
            color(branch.family)
        );
        let last = line.last().unwrap();
        let _ = writeln!(
            s,
            "<text x=\"{:.2}\" y=\"{:.2}\" font-size=\"11\" fill=\"{}\">{}</text>",
            sx(last.t) + 4.0,
            sy(last.signed_z) + 4.0,
            color(branch.family),
            branch
        );
    }
    s.push_str("</svg>\n");
    s
}
