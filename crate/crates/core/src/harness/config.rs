use serde::{Deserialize, Serialize};

use crate::ledger::Amount;
use crate::slicing::{is_valid_slice_id, is_valid_tenant_id};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// One process, virtual clock, in-process interfaces.
    #[default]
    Deterministic,
    /// Every service behind its own HTTP listener, real clock.
    Live,
}

impl std::str::FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "deterministic" => Ok(Mode::Deterministic),
            "live" => Ok(Mode::Live),
            other => Err(format!("unknown mode {other:?} (expected deterministic or live)")),
        }
    }
}

pub const DEFAULT_TENANT_ID: &str = "f7257cce-d05e-4f43-a0a6-f19236948f2f";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScenarioConfig {
    pub mode: Mode,
    pub cron_interval_ticks: u64,
    /// LINK paid per snapshot request.
    pub payment_link: Amount,
    /// LINK transferred to the validator before requesting.
    pub funding_link: Amount,
    pub initial_supply: Amount,
    pub tenant_name: String,
    pub tenant_id: String,
    pub slice_id: String,
    pub quantum_initial: u64,
    pub quantum_tampered: u64,
    /// Live mode only: wall-clock length of one tick.
    pub tick_ms: u64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            mode: Mode::Deterministic,
            cron_interval_ticks: 10,
            payment_link: 1,
            funding_link: 10,
            initial_supply: 1_000_000,
            tenant_name: "tenant-a".into(),
            tenant_id: DEFAULT_TENANT_ID.into(),
            slice_id: "0x00".into(),
            quantum_initial: 100,
            quantum_tampered: 200,
            tick_ms: 100,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid scenario config: {0}")]
pub struct ConfigError(pub String);

impl ScenarioConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let fail = |m: &str| Err(ConfigError(m.into()));
        if self.quantum_initial == self.quantum_tampered {
            return fail("quantum_tampered must differ from quantum_initial");
        }
        if self.quantum_initial == 0 || self.quantum_tampered == 0 {
            return fail("quanta must be at least 1 ms");
        }
        if self.cron_interval_ticks == 0 {
            return fail("cron_interval_ticks must be at least 1");
        }
        if self.tick_ms == 0 {
            return fail("tick_ms must be at least 1");
        }
        if self.payment_link == 0 {
            return fail("payment_link must be at least 1");
        }
        if self.funding_link < self.payment_link {
            return fail("funding_link must cover one payment");
        }
        if self.funding_link > self.initial_supply {
            return fail("funding_link exceeds initial_supply");
        }
        if self.tenant_name.is_empty() {
            return fail("tenant_name must not be empty");
        }
        if !is_valid_tenant_id(&self.tenant_id) {
            return fail("tenant_id must be a lowercase UUID");
        }
        if !is_valid_slice_id(&self.slice_id) {
            return fail("slice_id must look like 0x00");
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_is_valid() {
        ScenarioConfig::default().validate().unwrap();
    }

    #[test]
    fn equal_quanta_are_rejected() {
        let c = ScenarioConfig { quantum_tampered: 100, ..Default::default() };
        assert!(c.validate().is_err());
    }

    #[test]
    fn partial_json_uses_defaults() {
        let c: ScenarioConfig = serde_json::from_str(r#"{"mode":"live","quantum_tampered":300}"#).unwrap();
        assert_eq!(c.mode, Mode::Live);
        assert_eq!(c.quantum_tampered, 300);
        assert_eq!(c.cron_interval_ticks, 10);
    }
}
