//! Deterministic flat-file emission. These are the contract surfaces of the
//! CLI: fixed headers, 17-significant-digit numbers, no locale or timestamp
//! dependence; metadata rides on `#`-prefixed lines.

use crate::analysis::{Diagram, ScanReport};
use std::fmt::Write;

/// 17 significant digits: enough to round-trip any f64 exactly.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn meta_line() -> String {
    format!("# timemap {}\n", env!("CARGO_PKG_VERSION"))
}

/// `diagram.csv` with header `family,k,phi,z,signed_z,T`, one row per branch
/// point, branches in the fixed enumeration order.
pub fn diagram_csv(d: &Diagram) -> String {
    let mut s = meta_line();
    s.push_str("family,k,phi,z,signed_z,T\n");
    for (branch, line) in &d.branches {
        for p in line {
            let _ = writeln!(
                s,
                "{},{},{},{},{},{}",
                branch.family.label(),
                branch.winding,
                fmt_f64(d.config.phi),
                fmt_f64(p.z),
                fmt_f64(p.signed_z),
                fmt_f64(p.t)
            );
        }
    }
    s
}

/// Φ scan grid with header `z,phi,Phi,in_omega` (z outer, φ inner;
/// `in_omega` as 1/0); failed cells print `nan`.
pub fn scan_csv(r: &ScanReport) -> String {
    let mut s = meta_line();
    s.push_str("z,phi,Phi,in_omega\n");
    for (iz, &z) in r.z_grid.iter().enumerate() {
        for (ip, &phi) in r.phi_grid.iter().enumerate() {
            let idx = iz * r.phi_grid.len() + ip;
            let v = r.values[idx];
            let cell = if v.is_nan() {
                "nan".to_string()
            } else {
                fmt_f64(v)
            };
            let _ = writeln!(
                s,
                "{},{},{},{}",
                fmt_f64(z),
                fmt_f64(phi),
                cell,
                i32::from(r.omega_mask[idx])
            );
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn f64_round_trip() {
        for v in [std::f64::consts::PI, 1.0 / 3.0, 2.0, 1e-12, 0.1 + 0.2] {
            let s = fmt_f64(v);
            assert_eq!(s.parse::<f64>().unwrap(), v, "{s}");
        }
    }
}
