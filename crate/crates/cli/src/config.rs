use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use qspread_core::algebra::{parse_matrix, EvolutionSpec, OpMatrix};
use qspread_core::pricer::{DriftMode, Payoff};
use qspread_core::{GaussianModelParams, MarketState, ModelError, SpreadParams, WavepacketParams};

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub market: Option<MarketSection>,
    pub gaussian: Option<GaussianSection>,
    pub spread: Option<SpreadSection>,
    pub pricing: Option<PricingSection>,
    #[serde(default)]
    pub output: OutputSection,
    pub operators: Option<OperatorSection>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MarketSection {
    pub x_mid: f64,
    pub eps0: f64,
    pub spread_x: f64,
    pub spread_eps: f64,
    pub w_o: f64,
    #[serde(default)]
    pub rotation_angle: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaussianSection {
    pub vol_x: f64,
    pub vol_eps: f64,
    pub rotation_angle: f64,
    pub t: f64,
    /// Rotation angles for the `skew` table.
    pub angles: Option<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpreadSection {
    pub vol: f64,
    pub eps: f64,
    pub delta: f64,
    pub t: f64,
    pub x0: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PayoffKind {
    Call,
    Put,
    DigitalCall,
    Custom,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelChoice {
    Gaussian,
    Spread,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DriftChoice {
    Martingale,
    ClassicalPde,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PricingSection {
    pub payoff: PayoffKind,
    pub strike: Option<f64>,
    /// `(x, value)` nodes of a custom payoff.
    pub table: Option<Vec<(f64, f64)>>,
    pub model: ModelChoice,
    #[serde(default = "default_drift")]
    pub drift_mode: DriftChoice,
    /// Strike grid for the `smile` table.
    pub strikes: Option<Vec<f64>>,
}

fn default_drift() -> DriftChoice {
    DriftChoice::Martingale
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    pub dir: PathBuf,
    pub k_max: u32,
    pub mc_samples: usize,
    pub grid_size: usize,
}

impl Default for OutputSection {
    fn default() -> Self {
        OutputSection {
            dir: PathBuf::from("out"),
            k_max: 6,
            mc_samples: 1_000_000,
            grid_size: 1024,
        }
    }
}

/// Evolution data in operator syntax, e.g. `L = "-i*sx*Dx - i*se*De"`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OperatorSection {
    #[serde(rename = "H", default = "zero_text")]
    pub h: String,
    #[serde(rename = "L")]
    pub l: String,
    #[serde(rename = "S", default = "identity_text")]
    pub s: String,
    #[serde(rename = "X")]
    pub x: String,
}

fn zero_text() -> String {
    "0".into()
}

fn identity_text() -> String {
    "1".into()
}

/// Names a core validation error after the section it came from.
fn in_section<T>(section: &str, r: qspread_core::Result<T>) -> Result<T> {
    r.map_err(|e| match e {
        ModelError::InvalidParameter { name, reason } => anyhow::anyhow!("[{section}] {name}: {reason}"),
        other => anyhow::anyhow!("[{section}] {other}"),
    })
}

fn required<'a, T>(s: &'a Option<T>, name: &str) -> Result<&'a T> {
    s.as_ref()
        .with_context(|| format!("configuration needs a [{name}] section"))
}

impl ScenarioConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("in {}", path.display()))
    }

    pub fn parse(text: &str) -> Result<Self> {
        let cfg: ScenarioConfig = toml::from_str(text)?;
        cfg.check()?;
        Ok(cfg)
    }

    /// Validates every section that is present.
    fn check(&self) -> Result<()> {
        if self.market.is_some() {
            self.market_state()?;
        }
        if self.gaussian.is_some() {
            self.gaussian_params()?;
        }
        if self.spread.is_some() {
            self.spread_params()?;
        }
        if let Some(p) = &self.pricing {
            in_section("pricing", self.payoff().map(|_| ()))?;
            if let Some(strikes) = &p.strikes {
                if strikes.iter().any(|k| !k.is_finite()) {
                    bail!("[pricing] strikes: must be finite");
                }
            }
        }
        if !self.output.grid_size.is_power_of_two() || self.output.grid_size < 16 {
            bail!("[output] grid_size: must be a power of two >= 16");
        }
        if self.output.k_max < 2 {
            bail!("[output] k_max: must be >= 2");
        }
        if self.output.mc_samples == 0 {
            bail!("[output] mc_samples: must be >= 1");
        }
        Ok(())
    }

    /// SHA-256 over the canonical JSON form of the parsed configuration.
    pub fn digest(&self) -> String {
        let canonical = serde_json::to_string(self).expect("configuration serializes");
        Sha256::digest(canonical.as_bytes())
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }

    pub fn market_state(&self) -> Result<MarketState> {
        let m = required(&self.market, "market")?;
        let packet = in_section("market", WavepacketParams::new(m.x_mid, m.eps0, m.spread_x, m.spread_eps))?;
        in_section("market", MarketState::with_weight(m.w_o, packet))
    }

    pub fn gaussian_params(&self) -> Result<GaussianModelParams> {
        let g = required(&self.gaussian, "gaussian")?;
        in_section("gaussian", GaussianModelParams::new(g.vol_x, g.vol_eps, g.rotation_angle, g.t))
    }

    pub fn spread_params(&self) -> Result<SpreadParams> {
        let s = required(&self.spread, "spread")?;
        in_section("spread", SpreadParams::new(s.vol, s.eps, s.delta, s.t, s.x0))
    }

    pub fn skew_angles(&self) -> Vec<f64> {
        self.gaussian
            .as_ref()
            .and_then(|g| g.angles.clone())
            .unwrap_or_else(|| (-8..=8).map(|i| i as f64 * std::f64::consts::FRAC_PI_4 / 8.0).collect())
    }

    pub fn payoff(&self) -> qspread_core::Result<Payoff> {
        let p = self.pricing.as_ref().ok_or_else(|| ModelError::InvalidPayoff("no [pricing] section".into()))?;
        let strike = || {
            p.strike
                .filter(|k| k.is_finite())
                .ok_or(ModelError::InvalidParameter {
                    name: "strike",
                    reason: "required and finite for this payoff".into(),
                })
        };
        match p.payoff {
            PayoffKind::Call => Ok(Payoff::Call { strike: strike()? }),
            PayoffKind::Put => Ok(Payoff::Put { strike: strike()? }),
            PayoffKind::DigitalCall => Ok(Payoff::DigitalCall { strike: strike()? }),
            PayoffKind::Custom => Payoff::custom(
                p.table
                    .clone()
                    .ok_or_else(|| ModelError::InvalidPayoff("custom payoff needs `table`".into()))?,
            ),
        }
    }

    pub fn drift_mode(&self) -> DriftMode {
        match self.pricing.as_ref().map(|p| p.drift_mode) {
            Some(DriftChoice::ClassicalPde) => DriftMode::ClassicalPde,
            _ => DriftMode::Martingale,
        }
    }

    /// Rotation angle for the extended preset: `[gaussian]` first, then `[market]`.
    pub fn rotation_angle(&self) -> f64 {
        self.gaussian
            .as_ref()
            .map(|g| g.rotation_angle)
            .or(self.market.as_ref().map(|m| m.rotation_angle))
            .unwrap_or(0.0)
    }

    pub fn operators(&self) -> Result<Option<EvolutionSpec>> {
        let Some(ops) = &self.operators else {
            return Ok(None);
        };
        let parse = |key: &str, text: &str| -> Result<OpMatrix> {
            parse_matrix(text).map_err(|e| anyhow::anyhow!("[operators] {key}: {e}"))
        };
        let spec = EvolutionSpec::new(
            parse("H", &ops.h)?,
            parse("L", &ops.l)?,
            parse("S", &ops.s)?,
            parse("X", &ops.x)?,
        )
        .map_err(|e| anyhow::anyhow!("[operators] {e}"))?;
        Ok(Some(spec))
    }
}
