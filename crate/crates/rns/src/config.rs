//! Plain-text `key = value` experiment configuration with `[model]`,
//! `[kernel]`, `[profile]`, `[grids]`, `[tolerances]` and `[output]`
//! sections. Unknown keys are errors; missing required keys are reported
//! exhaustively in one pass; `emit` followed by `parse` reproduces the
//! configuration exactly.

use crate::error::Error;
use crate::model::{Control, InitialProfile, KernelParams, ModelParams, NCOMP};
use crate::Result;
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

/// Which pipeline to run; selected by the CLI subcommand.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExperimentKind {
    Validate,
    Spectrum,
    Instability,
    Pointwise,
    Lyapunov,
    DecayL2,
    DecayL1,
    DecayLq,
    FullReport,
}

impl ExperimentKind {
    pub fn name(&self) -> &'static str {
        match self {
            ExperimentKind::Validate => "validate",
            ExperimentKind::Spectrum => "spectrum",
            ExperimentKind::Instability => "instability",
            ExperimentKind::Pointwise => "pointwise",
            ExperimentKind::Lyapunov => "lyapunov",
            ExperimentKind::DecayL2 => "decay-l2",
            ExperimentKind::DecayL1 => "decay-l1",
            ExperimentKind::DecayLq => "decay-lq",
            ExperimentKind::FullReport => "full-report",
        }
    }
}

/// Grid settings shared by the pipelines.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    /// Nodes of the symmetric quadrature grid.
    pub xi_nodes: usize,
    pub xi_max: f64,
    pub xi_linear_scale: f64,
    /// Dyadic time ladder extends to `2^t_max_exp`.
    pub t_max_exp: u32,
    /// Shorter ladder for the physical-reconstruction pipeline.
    pub lq_t_max_exp: u32,
    /// Rate-curve band and resolution.
    pub rate_xi_min: f64,
    pub rate_xi_max: f64,
    pub rate_xi_nodes: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            xi_nodes: 2048,
            xi_max: 1e3,
            xi_linear_scale: 0.1,
            t_max_exp: 20,
            lq_t_max_exp: 11,
            rate_xi_min: 1e-2,
            rate_xi_max: 1e2,
            rate_xi_nodes: 81,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TolSpec {
    pub rel_tol: f64,
    pub abs_tol: f64,
}

impl Default for TolSpec {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            abs_tol: 1e-12,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub model: ModelParams,
    pub kernel: Option<KernelParams>,
    pub profile: InitialProfile,
    pub grids: GridSpec,
    pub tolerances: TolSpec,
    pub output_dir: PathBuf,
}

const COMPONENT_NAMES: [&str; NCOMP] = ["v", "u", "z", "y", "phi", "theta", "p"];

fn parse_sections(text: &str) -> Result<BTreeMap<String, BTreeMap<String, String>>> {
    let mut out: BTreeMap<String, BTreeMap<String, String>> = BTreeMap::new();
    let mut current = String::new();
    let mut errors = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if line.starts_with('[') && line.ends_with(']') {
            current = line[1..line.len() - 1].trim().to_string();
            out.entry(current.clone()).or_default();
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            errors.push(format!("line {}: expected key = value", lineno + 1));
            continue;
        };
        if current.is_empty() {
            errors.push(format!("line {}: key outside any section", lineno + 1));
            continue;
        }
        out.entry(current.clone())
            .or_default()
            .insert(key.trim().to_string(), value.trim().to_string());
    }
    if errors.is_empty() {
        Ok(out)
    } else {
        Err(Error::Config(errors.join("; ")))
    }
}

fn take_f64(
    section: &mut BTreeMap<String, String>,
    sect_name: &str,
    key: &str,
    missing: &mut Vec<String>,
) -> f64 {
    match section.remove(key) {
        Some(v) => v.parse().unwrap_or_else(|_| {
            missing.push(format!("[{sect_name}] {key}: not a number ({v})"));
            f64::NAN
        }),
        None => {
            missing.push(format!("[{sect_name}] {key}: missing"));
            f64::NAN
        }
    }
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut sections = parse_sections(text)?;
        let mut problems: Vec<String> = Vec::new();

        let known = ["model", "kernel", "profile", "grids", "tolerances", "output"];
        for name in sections.keys() {
            if !known.contains(&name.as_str()) {
                problems.push(format!("unknown section [{name}]"));
            }
        }

        // [model]
        let mut model_sec = sections.remove("model").unwrap_or_default();
        let tau0_raw = model_sec.remove("tau0");
        let control = match tau0_raw.as_deref() {
            Some("0") => Control::Damping,
            Some("1") => Control::Memory,
            Some(other) => {
                problems.push(format!("[model] tau0: expected 0 or 1, got {other}"));
                Control::Damping
            }
            None => {
                problems.push("[model] tau0: missing".into());
                Control::Damping
            }
        };
        let mut miss = Vec::new();
        let rho1 = take_f64(&mut model_sec, "model", "rho1", &mut miss);
        let rho2 = take_f64(&mut model_sec, "model", "rho2", &mut miss);
        let rho3 = take_f64(&mut model_sec, "model", "rho3", &mut miss);
        let k0 = take_f64(&mut model_sec, "model", "k0", &mut miss);
        let k1 = take_f64(&mut model_sec, "model", "k1", &mut miss);
        let k2 = take_f64(&mut model_sec, "model", "k2", &mut miss);
        let k3 = take_f64(&mut model_sec, "model", "k3", &mut miss);
        let l = take_f64(&mut model_sec, "model", "l", &mut miss);
        let gamma = if control == Control::Damping {
            take_f64(&mut model_sec, "model", "gamma", &mut miss)
        } else {
            model_sec
                .remove("gamma")
                .and_then(|v| v.parse().ok())
                .unwrap_or(0.0)
        };
        problems.extend(miss);
        for key in model_sec.keys() {
            problems.push(format!("[model] unknown key {key}"));
        }
        let model = ModelParams {
            rho1,
            rho2,
            rho3,
            k0,
            k1,
            k2,
            k3,
            gamma,
            l,
            control,
        };

        // [kernel]
        let kernel = match (control, sections.remove("kernel")) {
            (Control::Memory, Some(mut sec)) => {
                let mut miss = Vec::new();
                let d1 = take_f64(&mut sec, "kernel", "d1", &mut miss);
                let d2 = take_f64(&mut sec, "kernel", "d2", &mut miss);
                problems.extend(miss);
                for key in sec.keys() {
                    problems.push(format!("[kernel] unknown key {key}"));
                }
                Some(KernelParams::new(d1, d2))
            }
            (Control::Memory, None) => {
                problems.push("[kernel]: section missing (required for tau0 = 1)".into());
                None
            }
            (Control::Damping, Some(sec)) => {
                if !sec.is_empty() {
                    problems.push("[kernel]: present but tau0 = 0".into());
                }
                None
            }
            (Control::Damping, None) => None,
        };

        // [profile]
        let profile = match sections.remove("profile") {
            Some(mut sec) => {
                let kind = sec.remove("kind").unwrap_or_else(|| "gaussian".into());
                let parse_weights = |sec: &mut BTreeMap<String, String>,
                                     problems: &mut Vec<String>|
                 -> [f64; NCOMP] {
                    let mut weights = [0.0; NCOMP];
                    match sec.remove("weights") {
                        Some(list) => {
                            let parts: Vec<&str> = list.split(',').map(|s| s.trim()).collect();
                            if parts.len() != NCOMP {
                                problems.push(format!(
                                    "[profile] weights: expected {NCOMP} entries, got {}",
                                    parts.len()
                                ));
                            } else {
                                for (slot, p) in weights.iter_mut().zip(parts) {
                                    match p.parse() {
                                        Ok(v) => *slot = v,
                                        Err(_) => problems.push(format!(
                                            "[profile] weights: bad entry {p}"
                                        )),
                                    }
                                }
                            }
                        }
                        None => problems.push("[profile] weights: missing".into()),
                    }
                    weights
                };
                let profile = match kind.as_str() {
                    "gaussian" => {
                        let mut miss = Vec::new();
                        let sigma = take_f64(&mut sec, "profile", "sigma", &mut miss);
                        problems.extend(miss);
                        let weights = parse_weights(&mut sec, &mut problems);
                        InitialProfile::Gaussian { sigma, weights }
                    }
                    "flat" => InitialProfile::FlatSpectrum {
                        weights: parse_weights(&mut sec, &mut problems),
                    },
                    "point" => {
                        let component = match sec.remove("component") {
                            Some(name) => COMPONENT_NAMES
                                .iter()
                                .position(|&c| c == name)
                                .unwrap_or_else(|| {
                                    problems
                                        .push(format!("[profile] component: unknown name {name}"));
                                    0
                                }),
                            None => {
                                problems.push("[profile] component: missing".into());
                                0
                            }
                        };
                        InitialProfile::PointMode { component }
                    }
                    other => {
                        problems.push(format!("[profile] kind: unknown {other}"));
                        InitialProfile::constrained_gaussian(1.0, l)
                    }
                };
                for key in sec.keys() {
                    problems.push(format!("[profile] unknown key {key}"));
                }
                profile
            }
            None => InitialProfile::constrained_gaussian(1.0, l),
        };

        // [grids]
        let mut grids = GridSpec::default();
        if let Some(mut sec) = sections.remove("grids") {
            let mut take_usize = |key: &str, slot: &mut usize| {
                if let Some(v) = sec.remove(key) {
                    match v.parse() {
                        Ok(x) => *slot = x,
                        Err(_) => problems.push(format!("[grids] {key}: not an integer ({v})")),
                    }
                }
            };
            take_usize("xi_nodes", &mut grids.xi_nodes);
            take_usize("rate_xi_nodes", &mut grids.rate_xi_nodes);
            let mut take_u32 = |key: &str, slot: &mut u32| {
                if let Some(v) = sec.remove(key) {
                    match v.parse() {
                        Ok(x) => *slot = x,
                        Err(_) => problems.push(format!("[grids] {key}: not an integer ({v})")),
                    }
                }
            };
            take_u32("t_max_exp", &mut grids.t_max_exp);
            take_u32("lq_t_max_exp", &mut grids.lq_t_max_exp);
            let mut take_float = |key: &str, slot: &mut f64| {
                if let Some(v) = sec.remove(key) {
                    match v.parse() {
                        Ok(x) => *slot = x,
                        Err(_) => problems.push(format!("[grids] {key}: not a number ({v})")),
                    }
                }
            };
            take_float("xi_max", &mut grids.xi_max);
            take_float("xi_linear_scale", &mut grids.xi_linear_scale);
            take_float("rate_xi_min", &mut grids.rate_xi_min);
            take_float("rate_xi_max", &mut grids.rate_xi_max);
            for key in sec.keys() {
                problems.push(format!("[grids] unknown key {key}"));
            }
        }

        // [tolerances]
        let mut tolerances = TolSpec::default();
        if let Some(mut sec) = sections.remove("tolerances") {
            for (key, slot) in [
                ("rel_tol", &mut tolerances.rel_tol),
                ("abs_tol", &mut tolerances.abs_tol),
            ] {
                if let Some(v) = sec.remove(key) {
                    match v.parse() {
                        Ok(x) => *slot = x,
                        Err(_) => problems.push(format!("[tolerances] {key}: not a number ({v})")),
                    }
                }
            }
            for key in sec.keys() {
                problems.push(format!("[tolerances] unknown key {key}"));
            }
        }

        // [output]
        let mut output_dir = PathBuf::from("out");
        if let Some(mut sec) = sections.remove("output") {
            if let Some(dir) = sec.remove("dir") {
                output_dir = PathBuf::from(dir);
            }
            for key in sec.keys() {
                problems.push(format!("[output] unknown key {key}"));
            }
        }

        if problems.is_empty() {
            Ok(Self {
                model,
                kernel,
                profile,
                grids,
                tolerances,
                output_dir,
            })
        } else {
            Err(Error::Config(problems.join("; ")))
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text)
    }

    /// Serialise with every effective value materialised; `parse(emit(c))`
    /// reproduces `c` exactly.
    pub fn emit(&self) -> String {
        let g = crate::report::g17;
        let mut out = String::new();
        let m = &self.model;
        out.push_str("[model]\n");
        out.push_str(&format!("rho1 = {}\n", g(m.rho1)));
        out.push_str(&format!("rho2 = {}\n", g(m.rho2)));
        out.push_str(&format!("rho3 = {}\n", g(m.rho3)));
        out.push_str(&format!("k0 = {}\n", g(m.k0)));
        out.push_str(&format!("k1 = {}\n", g(m.k1)));
        out.push_str(&format!("k2 = {}\n", g(m.k2)));
        out.push_str(&format!("k3 = {}\n", g(m.k3)));
        out.push_str(&format!("l = {}\n", g(m.l)));
        out.push_str(&format!("gamma = {}\n", g(m.gamma)));
        out.push_str(&format!(
            "tau0 = {}\n",
            if m.control == Control::Memory { 1 } else { 0 }
        ));
        if let Some(k) = &self.kernel {
            out.push_str("\n[kernel]\n");
            out.push_str(&format!("d1 = {}\n", g(k.d1)));
            out.push_str(&format!("d2 = {}\n", g(k.d2)));
        }
        out.push_str("\n[profile]\n");
        match &self.profile {
            InitialProfile::Gaussian { sigma, weights } => {
                out.push_str("kind = gaussian\n");
                out.push_str(&format!("sigma = {}\n", g(*sigma)));
                let ws: Vec<String> = weights.iter().map(|&w| g(w)).collect();
                out.push_str(&format!("weights = {}\n", ws.join(", ")));
            }
            InitialProfile::FlatSpectrum { weights } => {
                out.push_str("kind = flat\n");
                let ws: Vec<String> = weights.iter().map(|&w| g(w)).collect();
                out.push_str(&format!("weights = {}\n", ws.join(", ")));
            }
            InitialProfile::PointMode { component } => {
                out.push_str("kind = point\n");
                out.push_str(&format!("component = {}\n", COMPONENT_NAMES[*component]));
            }
        }
        let gr = &self.grids;
        out.push_str("\n[grids]\n");
        out.push_str(&format!("xi_nodes = {}\n", gr.xi_nodes));
        out.push_str(&format!("xi_max = {}\n", g(gr.xi_max)));
        out.push_str(&format!("xi_linear_scale = {}\n", g(gr.xi_linear_scale)));
        out.push_str(&format!("t_max_exp = {}\n", gr.t_max_exp));
        out.push_str(&format!("lq_t_max_exp = {}\n", gr.lq_t_max_exp));
        out.push_str(&format!("rate_xi_min = {}\n", g(gr.rate_xi_min)));
        out.push_str(&format!("rate_xi_max = {}\n", g(gr.rate_xi_max)));
        out.push_str(&format!("rate_xi_nodes = {}\n", gr.rate_xi_nodes));
        out.push_str("\n[tolerances]\n");
        out.push_str(&format!("rel_tol = {}\n", g(self.tolerances.rel_tol)));
        out.push_str(&format!("abs_tol = {}\n", g(self.tolerances.abs_tol)));
        out.push_str("\n[output]\n");
        out.push_str(&format!("dir = {}\n", self.output_dir.display()));
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const DAMPING_CFG: &str = "
[model]
rho1 = 1.0
rho2 = 2.0
rho3 = 5.0
k0 = 1.0
k1 = 1.0
k2 = 1.0
k3 = 1.0
l = 1.0
gamma = 0.5
tau0 = 0

[profile]
kind = gaussian
sigma = 1.0
weights = 1, 1, -2, 1, 1, 1, 0
";

    #[test]
    fn parses_damping_config() {
        let cfg = ExperimentConfig::parse(DAMPING_CFG).unwrap();
        assert_eq!(cfg.model.control, Control::Damping);
        assert_eq!(cfg.model.rho3, 5.0);
        assert!(cfg.kernel.is_none());
        assert!(cfg.profile.satisfies_constraint(1.0));
        assert_eq!(cfg.grids.xi_nodes, 2048);
    }

    #[test]
    fn unknown_keys_are_errors() {
        let text = format!("{DAMPING_CFG}\nwobble = 3\n");
        let err = ExperimentConfig::parse(&text).unwrap_err();
        assert!(err.to_string().contains("wobble"));
    }

    #[test]
    fn missing_keys_reported_exhaustively() {
        let text = "
[model]
rho1 = 1.0
tau0 = 0
";
        let err = ExperimentConfig::parse(text).unwrap_err().to_string();
        for key in ["rho2", "rho3", "k0", "k1", "k2", "k3", "l", "gamma"] {
            assert!(err.contains(key), "error should mention {key}: {err}");
        }
    }

    #[test]
    fn memory_requires_kernel() {
        let text = "
[model]
rho1 = 1.0
rho2 = 2.0
rho3 = 5.0
k0 = 1.0
k1 = 1.0
k2 = 1.0
k3 = 1.0
l = 1.0
tau0 = 1
";
        let err = ExperimentConfig::parse(text).unwrap_err().to_string();
        assert!(err.contains("kernel"));
    }

    #[test]
    fn emit_parse_round_trip() {
        let mut cfg = ExperimentConfig::parse(DAMPING_CFG).unwrap();
        cfg.grids.t_max_exp = 18;
        cfg.tolerances.rel_tol = 3.25e-11;
        let text = cfg.emit();
        let back = ExperimentConfig::parse(&text).unwrap();
        assert_eq!(cfg, back);
        // twice more for stability of the emitted form itself
        assert_eq!(text, back.emit());
    }

    proptest::proptest! {
        #[test]
        fn round_trip_over_random_values(
            rho2 in 0.1f64..9.0,
            k3 in 0.1f64..9.0,
            gamma in 1e-6f64..100.0,
            sigma in 0.1f64..4.0,
            rel in 1e-14f64..1e-3,
        ) {
            let mut cfg = ExperimentConfig::parse(DAMPING_CFG).unwrap();
            cfg.model.rho2 = rho2;
            cfg.model.k3 = k3;
            cfg.model.gamma = gamma;
            if let crate::model::InitialProfile::Gaussian { sigma: s, .. } = &mut cfg.profile {
                *s = sigma;
            }
            cfg.tolerances.rel_tol = rel;
            let back = ExperimentConfig::parse(&cfg.emit()).unwrap();
            proptest::prop_assert_eq!(cfg, back);
        }
    }
}
