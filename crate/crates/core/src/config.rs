//! Sectioned `key = value` parameter files.
//!
//! ```text
//! [machine]
//! L_d = 1.70
//! [line]
//! alpha_deg = 3.5598
//! [operating_point.op1]
//! delta_0 = 1.0
//! ```
//!
//! Keys not present keep their default. Lines starting with `#` or `;` are
//! comments.

use std::collections::BTreeMap;
use std::path::Path;

use crate::error::{Result, SmibError};
use crate::params::{MachineParams, OperatingPoint, TabulatedTransients};

#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub machine: MachineParams,
    /// Operating points by name, presets first.
    pub operating_points: BTreeMap<String, OperatingPoint>,
    /// Sections the parameter loader does not own, kept for scenario and
    /// gain overrides.
    pub extra: BTreeMap<String, BTreeMap<String, String>>,
}

impl Default for Config {
    fn default() -> Self {
        let operating_points = OperatingPoint::presets()
            .into_iter()
            .map(|op| (op.name.clone(), op))
            .collect();
        Self {
            machine: MachineParams::default(),
            operating_points,
            extra: BTreeMap::new(),
        }
    }
}

impl Config {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| SmibError::Io(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Config::default();
        let mut section = String::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') || line.starts_with(';') {
                continue;
            }
            if let Some(rest) = line.strip_prefix('[') {
                let name = rest.strip_suffix(']').ok_or_else(|| SmibError::Config {
                    line: line_no,
                    reason: "unterminated section header".into(),
                })?;
                section = name.trim().to_string();
                if let Some(op) = section.strip_prefix("operating_point.") {
                    if op.is_empty() {
                        return Err(SmibError::Config {
                            line: line_no,
                            reason: "operating point needs a name".into(),
                        });
                    }
                    cfg.operating_points
                        .entry(op.to_string())
                        .or_insert_with(|| blank_point(op));
                }
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| SmibError::Config {
                line: line_no,
                reason: format!("expected `key = value`, got `{line}`"),
            })?;
            let key = key.trim();
            let value = value.trim();
            let err = |reason: String| SmibError::Config { line: line_no, reason };
            match section.as_str() {
                "machine" | "line" | "turbine" | "limits" => {
                    let v = parse_number(value).map_err(err)?;
                    set_machine(&mut cfg.machine, &section, key, v).map_err(err)?;
                }
                s if s.starts_with("operating_point.") => {
                    let name = &s["operating_point.".len()..];
                    let v = parse_number(value).map_err(err)?;
                    let op = cfg.operating_points.get_mut(name).expect("inserted at header");
                    set_point(op, key, v).map_err(err)?;
                }
                "" => return Err(err(format!("key `{key}` outside any section"))),
                other => {
                    cfg.extra
                        .entry(other.to_string())
                        .or_default()
                        .insert(key.to_string(), value.to_string());
                }
            }
        }
        cfg.machine.validate()?;
        for op in cfg.operating_points.values() {
            op.validate()?;
        }
        Ok(cfg)
    }

    pub fn operating_point(&self, name: &str) -> Result<&OperatingPoint> {
        self.operating_points.get(name).ok_or_else(|| {
            SmibError::InvalidArgument(format!(
                "unknown operating point `{name}` (known: {})",
                self.operating_points.keys().cloned().collect::<Vec<_>>().join(", ")
            ))
        })
    }
}

fn parse_number(s: &str) -> std::result::Result<f64, String> {
    s.parse::<f64>().map_err(|_| format!("`{s}` is not a number"))
}

fn blank_point(name: &str) -> OperatingPoint {
    OperatingPoint {
        name: name.to_string(),
        i_d: 0.0,
        i_f: 0.0,
        i_kd: 0.0,
        i_q: 0.0,
        i_kq: 0.0,
        omega: 1.0,
        delta: 0.0,
        t_m: 0.0,
        g_v: 0.0,
        v_d: 0.0,
        v_q: 0.0,
        v_t: 0.0,
        e_q_prime: 0.0,
        power: 0.0,
        power_factor: 0.0,
        i_a: 0.0,
    }
}

fn set_machine(p: &mut MachineParams, section: &str, key: &str, v: f64) -> std::result::Result<(), String> {
    let slot: &mut f64 = match (section, key) {
        ("machine", "L_d") => &mut p.l_d,
        ("machine", "L_F") => &mut p.l_f,
        ("machine", "L_D") => &mut p.l_kd,
        ("machine", "L_q") => &mut p.l_q,
        ("machine", "L_Q") => &mut p.l_kq,
        ("machine", "kM_F") => &mut p.km_f,
        ("machine", "kM_D") => &mut p.km_d,
        ("machine", "M_R") => &mut p.m_r,
        ("machine", "kM_Q") => &mut p.km_q,
        ("machine", "r") => &mut p.r_s,
        ("machine", "r_F") => &mut p.r_f,
        ("machine", "r_D") => &mut p.r_kd,
        ("machine", "r_Q") => &mut p.r_kq,
        ("machine", "H") => &mut p.inertia,
        ("machine", "D") => &mut p.damping,
        ("machine", "omega_R") => &mut p.omega_base,
        ("machine", "k") => &mut p.park_k,
        ("machine", "L_d_prime") | ("machine", "tau_d0_prime") => {
            let t = p.tabulated.get_or_insert(TabulatedTransients {
                l_d_prime: f64::NAN,
                tau_d0_prime: f64::NAN,
            });
            if key == "L_d_prime" {
                t.l_d_prime = v;
            } else {
                t.tau_d0_prime = v;
            }
            return Ok(());
        }
        ("line", "R_e") => &mut p.r_line,
        ("line", "L_e") => &mut p.l_line,
        ("line", "V_inf") => &mut p.v_inf,
        ("line", "alpha") => &mut p.alpha,
        ("line", "alpha_deg") => {
            p.alpha = v.to_radians();
            return Ok(());
        }
        ("turbine", "K_T") => &mut p.k_turbine,
        ("turbine", "K_G") => &mut p.k_governor,
        ("turbine", "tau_T") => &mut p.tau_turbine,
        ("turbine", "tau_G") => &mut p.tau_governor,
        ("turbine", "R_T") => &mut p.droop,
        ("limits", "E_FD_min") => &mut p.efd_min,
        ("limits", "E_FD_max") => &mut p.efd_max,
        ("limits", "G_V_min") => &mut p.gv_min,
        ("limits", "G_V_max") => &mut p.gv_max,
        _ => return Err(format!("unknown key `{key}` in [{section}]")),
    };
    *slot = v;
    Ok(())
}

fn set_point(op: &mut OperatingPoint, key: &str, v: f64) -> std::result::Result<(), String> {
    let slot: &mut f64 = match key {
        "I_d0" => &mut op.i_d,
        "I_F0" => &mut op.i_f,
        "I_D0" => &mut op.i_kd,
        "I_q0" => &mut op.i_q,
        "I_Q0" => &mut op.i_kq,
        "omega_0" => &mut op.omega,
        "delta_0" => &mut op.delta,
        "delta_0_deg" => {
            op.delta = v.to_radians();
            return Ok(());
        }
        "T_m0" => &mut op.t_m,
        "G_V0" => &mut op.g_v,
        "V_d0" => &mut op.v_d,
        "V_q0" => &mut op.v_q,
        "V_t0" => &mut op.v_t,
        "E_q0_prime" => &mut op.e_q_prime,
        "P" => &mut op.power,
        "PF" => &mut op.power_factor,
        "I_a0" => &mut op.i_a,
        _ => return Err(format!("unknown operating-point key `{key}`")),
    };
    *slot = v;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_text_gives_defaults() {
        let cfg = Config::parse("").unwrap();
        assert_eq!(cfg.machine, MachineParams::default());
        assert_eq!(cfg.operating_points.len(), 3);
    }

    #[test]
    fn degrees_and_overrides() {
        let cfg = Config::parse("[line]\nalpha_deg = 10\n[machine]\nH = 3.0\n").unwrap();
        assert!((cfg.machine.alpha - 10f64.to_radians()).abs() < 1e-15);
        assert_eq!(cfg.machine.inertia, 3.0);
    }

    #[test]
    fn bad_resistance_is_rejected() {
        let err = Config::parse("[machine]\nr_F = 0\n").unwrap_err();
        assert!(matches!(err, SmibError::InvalidParameter { .. }));
    }

    #[test]
    fn unknown_key_reports_line() {
        let err = Config::parse("\n[machine]\nbogus = 1\n").unwrap_err();
        assert_eq!(err, SmibError::Config { line: 3, reason: "unknown key `bogus` in [machine]".into() });
    }

    #[test]
    fn new_operating_point() {
        let text = "[operating_point.mine]\ndelta_0 = 0.9\nT_m0 = 0.8\nV_d0 = -0.6\nV_q0 = 0.8\nV_t0 = 1.0\n";
        let cfg = Config::parse(text).unwrap();
        let op = cfg.operating_point("mine").unwrap();
        assert_eq!(op.delta, 0.9);
        assert!(cfg.operating_point("nope").is_err());
    }

    #[test]
    fn extra_sections_are_kept() {
        let cfg = Config::parse("[scenario]\nh = 0.02\n").unwrap();
        assert_eq!(cfg.extra["scenario"]["h"], "0.02");
    }
}
