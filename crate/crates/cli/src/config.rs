//! Option structs shared by flags and config files.
//!
//! Every command has one struct whose fields are all optional. Flags are
//! parsed into it by clap, a config file section by serde, and the two are
//! merged field by field with flags taking precedence. Defaults are filled
//! in afterwards, so the resolved struct is a complete, re-runnable config.

use crate::error::CliError;
use clap::Args;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

/// Environment variable naming the default config directory.
pub const CONFIG_DIR_ENV: &str = "CRITLAB_CONFIG_DIR";

macro_rules! options {
    ($(#[$sm:meta])* $name:ident { $($(#[$fm:meta])* $field:ident : $ty:ty = $default:expr),* $(,)? }) => {
        $(#[$sm])*
        #[derive(Args, Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
        #[serde(deny_unknown_fields, rename_all = "kebab-case")]
        pub struct $name {
            $($(#[$fm])* #[arg(allow_negative_numbers = true)] #[serde(skip_serializing_if = "Option::is_none", default)] pub $field: Option<$ty>,)*
        }

        impl $name {
            /// Flag values win over file values.
            pub fn merged(self, file: Option<Self>) -> Self {
                let file = file.unwrap_or_default();
                Self { $($field: self.$field.or(file.$field),)* }
            }

            /// Fills every unset field with its default.
            pub fn resolved(self) -> Self {
                Self { $($field: self.$field.or_else(|| Some($default)),)* }
            }
        }
    };
}

options! {
    HopfArgs {
        /// Initial datum, `sech2:A` or `table:path`.
        #[arg(long)] datum: String = "sech2:1".into(),
        #[arg(long)] t: f64 = 0.1,
        #[arg(long)] xmin: f64 = -10.0,
        #[arg(long)] xmax: f64 = 10.0,
        /// Number of sample points.
        #[arg(long)] n: usize = 1001,
    }
}

options! {
    CatastropheArgs {
        #[arg(long)] datum: String = "sech2:1".into(),
    }
}

options! {
    HierarchyArgs {
        #[arg(long)] m: usize = 2,
    }
}

options! {
    EvolveArgs {
        /// `kdv`, `kdv_hierarchy_<m>`, `kawahara`, `gkdv_<n>`,
        /// `nls_focusing`, `nls_defocusing` or `hampert`.
        #[arg(long)] eq: String = "kdv".into(),
        /// Coefficient preset for `hampert`: `kdv`, `const:<c>,<p>`, `linear_c:<a>`.
        #[arg(long)] preset: String = "kdv".into(),
        #[arg(long)] datum: String = "sech2:1".into(),
        #[arg(long)] eps: f64 = 0.1,
        /// Half width of the periodic cell.
        #[arg(long = "L")] #[serde(rename = "L")] l: f64 = 20.0,
        #[arg(long)] n: usize = 4096,
        #[arg(long)] dt: f64 = 1e-5,
        #[arg(long)] t_end: f64 = 0.25,
        /// Snapshot interval.
        #[arg(long)] snap: f64 = 0.01,
        /// Steps between diagnostics records.
        #[arg(long)] diag_every: usize = 100,
    }
}

options! {
    PainleveUArgs {
        #[arg(long = "T")] #[serde(rename = "T")] t: f64 = 0.0,
        #[arg(long)] xmax: f64 = 200.0,
        /// Number of grid intervals.
        #[arg(long)] n: usize = 8000,
        #[arg(long)] tol: f64 = 1e-10,
    }
}

options! {
    PainleveQArgs {
        /// Ray angle in radians, `|angle| < 4π/5`.
        #[arg(long)] ray_angle: f64 = 0.0,
        #[arg(long)] znear: f64 = 0.0,
        #[arg(long)] zfar: f64 = 100.0,
        #[arg(long)] tol: f64 = 1e-12,
        #[arg(long)] spacing: f64 = 0.25,
        /// Length of an optional continuation from `znear` with pole detection.
        #[arg(long)] continue_length: f64 = 0.0,
        /// Direction of that continuation, in radians.
        #[arg(long)] continue_angle: f64 = std::f64::consts::PI,
    }
}

options! {
    RhCheckArgs {
        /// `psi_p12`, `phi_p1`, `kdv_M`, `kdv_hierarchy_M(m)`, `ch_M`,
        /// `nls_defocusing_M`, `nls_focusing_M`.
        #[arg(long)] problem: String = "psi_p12".into(),
        /// Datum for the semiclassical reflection of the KdV problems.
        #[arg(long)] datum: String = "sech2:1".into(),
        /// `wkb` (KdV problems) or `gauss:<a>` for `a e^{-λ²}`.
        #[arg(long)] reflection: String = "auto".into(),
        #[arg(long)] x: f64 = -0.5,
        #[arg(long)] y: f64 = -0.5,
        #[arg(long)] t: f64 = 0.1,
        #[arg(long)] eps: f64 = 0.1,
        /// Radii at which every ray is sampled.
        #[arg(long, value_delimiter = ',')] radii: Vec<f64> = vec![0.05, 0.2, 0.4, 0.6, 0.8, 0.95, 1.5],
    }
}

options! {
    PhiArgs {
        #[arg(long)] datum: String = "sech2:1".into(),
        /// Defaults to the critical point.
        #[arg(long)] x: f64 = f64::NAN,
        #[arg(long)] t: f64 = f64::NAN,
        /// Expansion edge; defaults to the critical value.
        #[arg(long)] edge: f64 = f64::NAN,
        /// `lo,hi,count`; defaults to `edge - 0.3, edge, 61`.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)] lambda_grid: Vec<f64> = Vec::new(),
    }
}

options! {
    UniversalityArgs {
        #[arg(long)] datum: String = "sech2:1".into(),
        #[arg(long, value_delimiter = ',')] eps: Vec<f64> = vec![0.1, 0.07, 0.05],
        /// `X,T` half widths of the comparison window.
        #[arg(long, value_delimiter = ',')] window: Vec<f64> = vec![1.0, 1.0],
        #[arg(long = "L")] #[serde(rename = "L")] l: f64 = 20.0,
        #[arg(long)] n: usize = 8192,
        #[arg(long)] dt: f64 = 5e-6,
        #[arg(long)] table_points: usize = 21,
        #[arg(long)] p12_xmax: f64 = 100.0,
        #[arg(long)] p12_n: usize = 4000,
        #[arg(long)] control_offset: f64 = 0.05,
    }
}

/// A config file: placement keys plus one optional section per command.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct FileConfig {
    pub out: Option<PathBuf>,
    pub label: Option<String>,
    pub hopf: Option<HopfArgs>,
    pub catastrophe: Option<CatastropheArgs>,
    pub hierarchy: Option<HierarchyArgs>,
    pub evolve: Option<EvolveArgs>,
    pub painleve_u: Option<PainleveUArgs>,
    pub painleve_q: Option<PainleveQArgs>,
    pub rh_check: Option<RhCheckArgs>,
    pub phi: Option<PhiArgs>,
    pub universality: Option<UniversalityArgs>,
}

/// Finds and parses the config: an explicit `--config` path (relative
/// names are also tried in the config directory), else
/// `$CRITLAB_CONFIG_DIR/<command>.toml` when present. Relative `table:`
/// paths in the file are resolved against its directory.
pub fn load(explicit: Option<&Path>, command: &str) -> Result<FileConfig, CliError> {
    let dir = std::env::var_os(CONFIG_DIR_ENV).map(PathBuf::from);
    let path = match explicit {
        Some(p) if p.exists() => Some(p.to_path_buf()),
        Some(p) => match dir.as_ref().map(|d| d.join(p)).filter(|c| p.is_relative() && c.exists()) {
            Some(c) => Some(c),
            None => return Err(CliError::Config(format!("config file {} not found", p.display()))),
        },
        None => dir.map(|d| d.join(format!("{command}.toml"))).filter(|c| c.exists()),
    };
    let Some(path) = path else {
        return Ok(FileConfig::default());
    };
    let text = std::fs::read_to_string(&path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    let mut file: FileConfig =
        toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    let base = path.parent().map(Path::to_path_buf);
    if let Some(b) = &base {
        let f = &mut file;
        for datum in [
            f.hopf.as_mut().map(|s| &mut s.datum),
            f.catastrophe.as_mut().map(|s| &mut s.datum),
            f.evolve.as_mut().map(|s| &mut s.datum),
            f.rh_check.as_mut().map(|s| &mut s.datum),
            f.phi.as_mut().map(|s| &mut s.datum),
            f.universality.as_mut().map(|s| &mut s.datum),
        ]
        .into_iter()
        .flatten()
        {
            anchor_table_path(datum, b);
        }
    }
    Ok(file)
}

/// Makes a relative `table:` path in a file relative to that file.
fn anchor_table_path(datum: &mut Option<String>, base: &Path) {
    if let Some(d) = datum {
        if let Some(p) = d.strip_prefix("table:") {
            let p = Path::new(p);
            if p.is_relative() {
                *d = format!("table:{}", base.join(p).display());
            }
        }
    }
}
