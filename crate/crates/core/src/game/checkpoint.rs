use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::agents::{AgentDims, Listener, Speaker};
use crate::codec;
use crate::error::{Error, Result};
use crate::nn::{Matrix, ParamStore};
use crate::seed;

pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AgentRole {
    Speaker,
    Listener,
}

/// Serialized agent: layout metadata plus every named parameter array.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub format_version: u32,
    pub role: AgentRole,
    pub dims: AgentDims,
    pub arrays: BTreeMap<String, Matrix>,
}

impl Checkpoint {
    fn new(role: AgentRole, dims: AgentDims, params: &ParamStore) -> Self {
        Checkpoint {
            format_version: CHECKPOINT_VERSION,
            role,
            dims,
            arrays: params.named_values(),
        }
    }

    pub fn of_speaker(s: &Speaker) -> Self {
        Checkpoint::new(AgentRole::Speaker, s.dims(), &s.params)
    }

    pub fn of_listener(l: &Listener) -> Self {
        Checkpoint::new(AgentRole::Listener, l.dims(), &l.params)
    }

    fn expect(&self, role: AgentRole) -> Result<()> {
        if self.format_version != CHECKPOINT_VERSION {
            return Err(Error::Incompatible(format!(
                "checkpoint format {} (expected {CHECKPOINT_VERSION})",
                self.format_version
            )));
        }
        if self.role != role {
            return Err(Error::Incompatible(format!("checkpoint holds a {:?}, not a {role:?}", self.role)));
        }
        Ok(())
    }

    pub fn into_speaker(self) -> Result<Speaker> {
        self.expect(AgentRole::Speaker)?;
        let mut s = Speaker::new(self.dims, &mut seed::rng(0))?;
        s.params.load_named(&self.arrays)?;
        Ok(s)
    }

    pub fn into_listener(self) -> Result<Listener> {
        self.expect(AgentRole::Listener)?;
        let mut l = Listener::new(self.dims, &mut seed::rng(0))?;
        l.params.load_named(&self.arrays)?;
        Ok(l)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        codec::write_atomic(path, codec::to_line(self)?.as_bytes())
    }

    pub fn load(path: &Path) -> Result<Self> {
        codec::read_json(path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::{init_agents, TrainConfig};

    #[test]
    fn save_load_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let (s, l) = init_agents(18, &TrainConfig::default()).unwrap();
        let sp = dir.path().join("speaker.json");
        let lp = dir.path().join("listener.json");
        Checkpoint::of_speaker(&s).save(&sp).unwrap();
        Checkpoint::of_listener(&l).save(&lp).unwrap();
        let s2 = Checkpoint::load(&sp).unwrap().into_speaker().unwrap();
        let l2 = Checkpoint::load(&lp).unwrap().into_listener().unwrap();
        assert_eq!(s.params.flat_values(), s2.params.flat_values());
        assert_eq!(l.params.flat_values(), l2.params.flat_values());
        assert_eq!(s2.dims(), s.dims());
    }

    #[test]
    fn role_and_version_are_checked() {
        let (s, _) = init_agents(18, &TrainConfig::default()).unwrap();
        let ck = Checkpoint::of_speaker(&s);
        assert!(matches!(ck.clone().into_listener(), Err(Error::Incompatible(_))));
        let old = Checkpoint {
            format_version: 0,
            ..ck
        };
        assert!(matches!(old.into_speaker(), Err(Error::Incompatible(_))));
    }

    #[test]
    fn missing_file() {
        let dir = tempfile::tempdir().unwrap();
        assert!(matches!(Checkpoint::load(&dir.path().join("nope.json")), Err(Error::Missing(_))));
    }
}
