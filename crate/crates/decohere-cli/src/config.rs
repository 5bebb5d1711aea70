//! Layered run configuration: defaults, then a named preset, then a config
//! file, then command-line flags, each layer overriding the one before.
//!
//! Config files are flat `key=value` lines with `#` comments. The same keys
//! appear in the `# params:` metadata line of every CSV, which parses back
//! into the identical [`RunConfig`].

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use decohere_core::quadrature::QuadratureConfig;
use decohere_core::scenarios::{cooper_pair_box_bath, CooperPairBoxParams};

/// All recognized keys, in canonical emission order.
const KEYS: &[&str] = &[
    "nu", "gamma", "gamma_ohmic", "ir", "uv", "temp", "dt", "n", "t", "nmax", "substeps",
    "target", "closed_form", "tmin", "tmax", "tpoints", "abs_tol", "rel_tol", "max_subdiv",
    "osc_res", "precision",
];

/// Environment variable that redirects preset lookup to `<dir>/<name>.conf`.
pub const PRESETS_DIR_ENV: &str = "DECOHERE_PRESETS_DIR";

#[derive(Debug, Clone, Default)]
pub struct Settings(BTreeMap<String, String>);

impl Settings {
    pub fn set(&mut self, key: &str, value: impl ToString) {
        self.0.insert(key.to_string(), value.to_string());
    }

    /// Later layers win.
    pub fn merge_over(&mut self, over: Settings) {
        for (k, v) in over.0 {
            self.0.insert(k, v);
        }
    }

    pub fn parse_str(text: &str, origin: &str) -> Result<Settings, String> {
        let mut s = Settings::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(format!("{origin}:{}: expected key=value, got {line:?}", lineno + 1));
            };
            let key = key.trim();
            let value = value.trim();
            if !KEYS.contains(&key) {
                return Err(format!("{origin}:{}: unknown key {key:?}", lineno + 1));
            }
            s.set(key, value);
        }
        Ok(s)
    }

    pub fn from_file(path: &Path) -> Result<Settings, String> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
        Self::parse_str(&text, &path.display().to_string())
    }

    fn get(&self, key: &str) -> Option<&str> {
        self.0.get(key).map(String::as_str)
    }

    fn f64(&self, key: &str) -> Result<Option<f64>, String> {
        self.get(key)
            .map(|v| v.parse::<f64>().map_err(|_| format!("{key}: not a number: {v:?}")))
            .transpose()
    }

    fn u32(&self, key: &str) -> Result<Option<u32>, String> {
        self.get(key)
            .map(|v| v.parse::<u32>().map_err(|_| format!("{key}: not a positive integer: {v:?}")))
            .transpose()
    }

    fn require_f64(&self, key: &str) -> Result<f64, String> {
        self.f64(key)?.ok_or_else(|| format!("missing required parameter --{}", key.replace('_', "-")))
    }
}

/// Built-in parameter sets reproducing the figure-level runs and the
/// Cooper-pair-box estimate.
pub fn builtin_preset(name: &str) -> Option<Settings> {
    let mut s = Settings::default();
    match name {
        "fig1-1f" => {
            for (k, v) in [("nu", "-1"), ("gamma", "0.25"), ("ir", "1"), ("uv", "80"),
                           ("temp", "0"), ("dt", "0.025"), ("nmax", "100"), ("t", "5")] {
                s.set(k, v);
            }
        }
        "fig1-ohmic" => {
            for (k, v) in [("nu", "1"), ("gamma", "0.05"), ("ir", "1"), ("uv", "10"),
                           ("temp", "0"), ("dt", "0.025"), ("nmax", "100"), ("t", "5")] {
                s.set(k, v);
            }
        }
        "fig3" => {
            for (k, v) in [("nu", "-1"), ("gamma", "0.5"), ("gamma_ohmic", "0.1"), ("ir", "1"),
                           ("uv", "20"), ("dt", "0.125"), ("t", "4")] {
                s.set(k, v);
            }
        }
        "fig4-t10" | "fig4-t1000" => {
            for (k, v) in [("nu", "-1"), ("gamma", "0.5"), ("ir", "0.01"), ("uv", "100"),
                           ("t", "2"), ("nmax", "32")] {
                s.set(k, v);
            }
            s.set("temp", if name == "fig4-t10" { "10" } else { "1000" });
        }
        "cpb" => {
            let bath = cooper_pair_box_bath(&CooperPairBoxParams::default())
                .expect("default Cooper-pair-box parameters are valid");
            s.set("nu", "-1");
            s.set("gamma", bath.density().coupling());
            s.set("ir", bath.density().ir_cutoff());
            s.set("uv", bath.density().uv_cutoff());
            s.set("temp", bath.temperature());
            s.set("n", CooperPairBoxParams::default().half_cycles);
            s.set("target", "0.1");
        }
        _ => return None,
    }
    Some(s)
}

/// Load a preset, honoring the `DECOHERE_PRESETS_DIR` override.
pub fn load_preset(name: &str) -> Result<Settings, String> {
    if let Ok(dir) = std::env::var(PRESETS_DIR_ENV) {
        let path = Path::new(&dir).join(format!("{name}.conf"));
        return Settings::from_file(&path)
            .map_err(|e| format!("preset {name:?} (from {PRESETS_DIR_ENV}): {e}"));
    }
    builtin_preset(name).ok_or_else(|| {
        format!(
            "unknown preset {name:?}; built-ins: fig1-1f, fig1-ohmic, fig3, fig4-t10, \
             fig4-t1000, cpb"
        )
    })
}

/// Fully resolved run parameters for one subcommand invocation.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: String,
    pub nu: f64,
    pub gamma: f64,
    pub gamma_ohmic: Option<f64>,
    pub ir: f64,
    pub uv: f64,
    pub temp: f64,
    pub dt: Option<f64>,
    pub n: Option<u32>,
    pub t: Option<f64>,
    pub nmax: Option<u32>,
    pub substeps: u32,
    pub target: Option<f64>,
    pub closed_form: bool,
    pub tmin: f64,
    pub tmax: f64,
    pub tpoints: u32,
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdiv: u32,
    pub osc_res: u32,
    pub precision: usize,
}

impl RunConfig {
    /// Resolve layered settings into a complete configuration, validating
    /// presence of everything the subcommand needs.
    pub fn resolve(command: &str, s: &Settings) -> Result<RunConfig, String> {
        let quad_defaults = QuadratureConfig::default();
        let cfg = RunConfig {
            command: command.to_string(),
            nu: s.require_f64("nu")?,
            gamma: s.require_f64("gamma")?,
            gamma_ohmic: s.f64("gamma_ohmic")?,
            ir: s.require_f64("ir")?,
            uv: s.require_f64("uv")?,
            temp: s.f64("temp")?.unwrap_or(0.0),
            dt: s.f64("dt")?,
            n: s.u32("n")?,
            t: s.f64("t")?,
            nmax: s.u32("nmax")?,
            substeps: s.u32("substeps")?.unwrap_or(4),
            target: s.f64("target")?,
            closed_form: matches!(s.get("closed_form"), Some("1") | Some("true")),
            tmin: s.f64("tmin")?.unwrap_or(0.1),
            tmax: s.f64("tmax")?.unwrap_or(1000.0),
            tpoints: s.u32("tpoints")?.unwrap_or(30),
            abs_tol: s.f64("abs_tol")?.unwrap_or(quad_defaults.abs_tol),
            rel_tol: s.f64("rel_tol")?.unwrap_or(quad_defaults.rel_tol),
            max_subdiv: s.u32("max_subdiv")?.unwrap_or(quad_defaults.max_subdivisions),
            osc_res: s.u32("osc_res")?.unwrap_or(quad_defaults.oscillation_resolution),
            precision: s.u32("precision")?.unwrap_or(9) as usize,
        };
        let need = |ok: bool, what: &str| -> Result<(), String> {
            if ok { Ok(()) } else { Err(format!("{command}: missing required parameter --{what}")) }
        };
        match command {
            "free" => need(cfg.t.is_some(), "t")?,
            "pulsed" => {
                need(cfg.dt.is_some(), "dt")?;
                need(cfg.n.is_some(), "n")?;
            }
            "timeseries" => {
                need(cfg.dt.is_some(), "dt")?;
                need(cfg.nmax.is_some(), "nmax")?;
            }
            "tsweep" => {
                need(cfg.dt.is_some(), "dt")?;
                need(cfg.t.is_some(), "t")?;
                need(cfg.gamma_ohmic.is_some(), "gamma-ohmic")?;
            }
            "isweep" => {
                need(cfg.t.is_some(), "t")?;
                need(cfg.nmax.is_some(), "nmax")?;
            }
            "crossover" => need(cfg.t.is_some(), "t")?,
            "solve" => {
                need(cfg.n.is_some(), "n")?;
                need(cfg.target.is_some(), "target")?;
            }
            other => return Err(format!("unknown subcommand {other:?}")),
        }
        if cfg.precision == 0 || cfg.precision > 17 {
            return Err("precision must be between 1 and 17 significant digits".into());
        }
        Ok(cfg)
    }

    pub fn quadrature(&self) -> QuadratureConfig {
        QuadratureConfig {
            abs_tol: self.abs_tol,
            rel_tol: self.rel_tol,
            max_subdivisions: self.max_subdiv,
            oscillation_resolution: self.osc_res,
        }
    }

    /// Canonical `# params:` metadata line; floats use a round-tripping
    /// representation (exponent form outside a moderate range, where plain
    /// decimal expansion gets unwieldy) so the line parses back exactly.
    pub fn metadata_line(&self) -> String {
        fn fmt(v: f64) -> String {
            let a = v.abs();
            if v != 0.0 && !(1e-4..1e15).contains(&a) {
                format!("{v:e}")
            } else {
                v.to_string()
            }
        }
        let mut line = format!("# params: command={}", self.command);
        let mut put = |k: &str, v: String| {
            let _ = write!(line, " {k}={v}");
        };
        put("nu", fmt(self.nu));
        put("gamma", fmt(self.gamma));
        if let Some(g) = self.gamma_ohmic {
            put("gamma_ohmic", fmt(g));
        }
        put("ir", fmt(self.ir));
        put("uv", fmt(self.uv));
        put("temp", fmt(self.temp));
        if let Some(v) = self.dt {
            put("dt", fmt(v));
        }
        if let Some(v) = self.n {
            put("n", v.to_string());
        }
        if let Some(v) = self.t {
            put("t", fmt(v));
        }
        if let Some(v) = self.nmax {
            put("nmax", v.to_string());
        }
        put("substeps", self.substeps.to_string());
        if let Some(v) = self.target {
            put("target", fmt(v));
        }
        if self.closed_form {
            put("closed_form", "1".into());
        }
        put("tmin", fmt(self.tmin));
        put("tmax", fmt(self.tmax));
        put("tpoints", self.tpoints.to_string());
        put("abs_tol", fmt(self.abs_tol));
        put("rel_tol", fmt(self.rel_tol));
        put("max_subdiv", self.max_subdiv.to_string());
        put("osc_res", self.osc_res.to_string());
        put("precision", self.precision.to_string());
        line
    }

    /// Parse a `# params:` line back into the configuration it came from
    /// (the round-trip property is what the tests pin down).
    #[cfg(test)]
    pub fn from_metadata_line(line: &str) -> Result<RunConfig, String> {
        let body = line
            .strip_prefix("# params: ")
            .ok_or_else(|| format!("not a params line: {line:?}"))?;
        let mut command = None;
        let mut s = Settings::default();
        for pair in body.split_whitespace() {
            let (k, v) = pair
                .split_once('=')
                .ok_or_else(|| format!("bad metadata pair {pair:?}"))?;
            if k == "command" {
                command = Some(v.to_string());
            } else if KEYS.contains(&k) {
                s.set(k, v);
            } else {
                return Err(format!("unknown metadata key {k:?}"));
            }
        }
        let command = command.ok_or("metadata line lacks command=")?;
        RunConfig::resolve(&command, &s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base_settings() -> Settings {
        let mut s = Settings::default();
        for (k, v) in [("nu", "-1"), ("gamma", "0.25"), ("ir", "1"), ("uv", "80"), ("t", "5")] {
            s.set(k, v);
        }
        s
    }

    #[test]
    fn resolve_requires_bath_and_command_parameters() {
        let s = base_settings();
        assert!(RunConfig::resolve("free", &s).is_ok());
        // pulsed needs dt and n
        assert!(RunConfig::resolve("pulsed", &s).is_err());
        let mut s2 = base_settings();
        s2.set("dt", "0.025");
        s2.set("n", "100");
        assert!(RunConfig::resolve("pulsed", &s2).is_ok());
        // missing bath parameter
        let mut s3 = Settings::default();
        s3.set("gamma", "1");
        assert!(RunConfig::resolve("free", &s3).is_err());
    }

    #[test]
    fn layering_later_wins() {
        let mut s = base_settings();
        let mut over = Settings::default();
        over.set("gamma", "0.5");
        s.merge_over(over);
        let cfg = RunConfig::resolve("free", &s).unwrap();
        assert_eq!(cfg.gamma, 0.5);
    }

    #[test]
    fn config_file_rejects_unknown_keys() {
        assert!(Settings::parse_str("nu = -1\nbogus = 3\n", "test").is_err());
        let s = Settings::parse_str("# comment\n\nnu = -1\ngamma=0.25\n", "test").unwrap();
        assert_eq!(s.get("nu"), Some("-1"));
        assert_eq!(s.get("gamma"), Some("0.25"));
    }

    #[test]
    fn builtin_presets_resolve() {
        for (name, cmd) in [
            ("fig1-1f", "timeseries"),
            ("fig1-ohmic", "timeseries"),
            ("fig3", "tsweep"),
            ("fig4-t10", "isweep"),
            ("fig4-t1000", "isweep"),
            ("cpb", "solve"),
        ] {
            let preset = builtin_preset(name).unwrap();
            let cfg = RunConfig::resolve(cmd, &preset)
                .unwrap_or_else(|e| panic!("preset {name}: {e}"));
            assert_eq!(cfg.command, cmd);
        }
        assert!(builtin_preset("nope").is_none());
    }

    #[test]
    fn metadata_round_trips_every_preset() {
        for (name, cmd) in [
            ("fig1-1f", "timeseries"),
            ("fig1-ohmic", "timeseries"),
            ("fig3", "tsweep"),
            ("fig4-t10", "isweep"),
            ("fig4-t1000", "isweep"),
            ("cpb", "solve"),
        ] {
            let cfg = RunConfig::resolve(cmd, &builtin_preset(name).unwrap()).unwrap();
            let line = cfg.metadata_line();
            let back = RunConfig::from_metadata_line(&line)
                .unwrap_or_else(|e| panic!("{name}: {e}\n{line}"));
            assert_eq!(cfg, back, "round trip failed for {name}:\n{line}");
        }
    }
}
