use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::carleman::DEFAULT_MEMORY_CAP;
use crate::lbm::FlowConfig;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    LbmBgk,
    LbmModeCoupling,
    CarlemanTr2,
    CarlemanCl2,
    CarlemanTr3,
    CarlemanCl3,
    QemuSingleStep,
}

impl Method {
    pub const ALL: [Method; 7] = [
        Method::LbmBgk,
        Method::LbmModeCoupling,
        Method::CarlemanTr2,
        Method::CarlemanCl2,
        Method::CarlemanTr3,
        Method::CarlemanCl3,
        Method::QemuSingleStep,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::LbmBgk => "lbm_bgk",
            Method::LbmModeCoupling => "lbm_mode_coupling",
            Method::CarlemanTr2 => "carleman_tr2",
            Method::CarlemanCl2 => "carleman_cl2",
            Method::CarlemanTr3 => "carleman_tr3",
            Method::CarlemanCl3 => "carleman_cl3",
            Method::QemuSingleStep => "qemu_single_step",
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Method::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| {
                let names: Vec<_> = Method::ALL.iter().map(|m| m.as_str()).collect();
                format!("unknown method '{s}' (expected one of {})", names.join(", "))
            })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub flow: FlowConfig,
    pub method: Method,
    /// Method the RMSE is measured against.
    pub reference: Method,
    /// Methods compared in an omega sweep.
    pub sweep_methods: Vec<Method>,
    pub omegas: Vec<f64>,
    pub compare_at: usize,
    pub output_dir: PathBuf,
    pub memory_cap_bytes: u64,
    /// `Some` selects seeded sampling of the ancilla outcome; `None` post-selects.
    pub seed: Option<u64>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            flow: FlowConfig::default(),
            method: Method::CarlemanTr2,
            reference: Method::LbmBgk,
            sweep_methods: vec![Method::CarlemanTr2, Method::CarlemanCl2],
            omegas: vec![0.8, 1.0, 1.2, 1.5],
            compare_at: 100,
            output_dir: PathBuf::from("out"),
            memory_cap_bytes: DEFAULT_MEMORY_CAP,
            seed: None,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        self.flow.validate()?;
        if self.compare_at > self.flow.steps {
            return Err(Error::InvalidParameter(format!(
                "compare_at = {} exceeds steps = {}",
                self.compare_at, self.flow.steps
            )));
        }
        if let Some(w) = self.omegas.iter().find(|w| !(**w > 0.0 && **w < 2.0)) {
            return Err(Error::InvalidParameter(format!("omega {w} outside (0, 2)")));
        }
        Ok(())
    }

    /// Sets one `key = value` pair. Keys match the long CLI flag names with
    /// `-` written as `_`.
    pub fn set(&mut self, key: &str, value: &str) -> std::result::Result<(), String> {
        fn num<T: FromStr>(key: &str, v: &str) -> std::result::Result<T, String>
        where
            T::Err: std::fmt::Display,
        {
            v.parse().map_err(|e| format!("bad value '{v}' for {key}: {e}"))
        }
        fn list<T: FromStr>(key: &str, v: &str) -> std::result::Result<Vec<T>, String>
        where
            T::Err: std::fmt::Display,
        {
            v.split(',')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(|s| num(key, s))
                .collect()
        }
        let f = &mut self.flow;
        match key {
            "nx" => f.nx = num(key, value)?,
            "ny" => f.ny = num(key, value)?,
            "omega" => f.omega = num(key, value)?,
            "ax" => f.ax = num(key, value)?,
            "ay" => f.ay = num(key, value)?,
            "kx" => f.kx = num(key, value)?,
            "ky" => f.ky = num(key, value)?,
            "steps" => f.steps = num(key, value)?,
            "method" => self.method = value.parse()?,
            "reference" => self.reference = value.parse()?,
            "methods" => self.sweep_methods = list(key, value)?,
            "omegas" => self.omegas = list(key, value)?,
            "compare_at" => self.compare_at = num(key, value)?,
            "out" | "output_dir" => self.output_dir = PathBuf::from(value),
            "memory_cap" => self.memory_cap_bytes = num(key, value)?,
            "seed" => self.seed = Some(num(key, value)?),
            _ => return Err(format!("unknown key '{key}'")),
        }
        Ok(())
    }

    /// Applies a flat `key = value` file. Blank lines and `#` comments are
    /// skipped.
    pub fn apply_file(&mut self, path: &Path) -> Result<()> {
        let text = std::fs::read_to_string(path)?;
        self.apply_str(&text, path)
    }

    pub fn apply_str(&mut self, text: &str, path: &Path) -> Result<()> {
        for (no, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |message: String| Error::ConfigParse {
                path: path.to_path_buf(),
                line: no + 1,
                message,
            };
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| err(format!("expected key = value, got '{line}'")))?;
            self.set(&k.trim().replace('-', "_"), v.trim()).map_err(err)?;
        }
        Ok(())
    }
}
