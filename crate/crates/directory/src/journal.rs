// SPDX-License-Identifier: Apache-2.0

//! Durable registry state: an append-only JSON-lines event log replayed over
//! the last snapshot. Events carry account ids and endpoints only.

use std::fs::{self, File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::registry::Registry;
use crate::DirectoryError;

const LOG_FILE: &str = "events.jsonl";
const SNAPSHOT_FILE: &str = "snapshot.json";

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum Event {
    Register { account: String, endpoint: String, at: u64 },
    Deregister { account: String, endpoint: String, at: u64 },
    Flag { endpoint: String, at: u64 },
}

impl Event {
    pub fn apply(&self, reg: &mut Registry) {
        match self {
            Event::Register { account, endpoint, at } => {
                reg.register(account, endpoint, *at);
            }
            Event::Deregister { account, endpoint, at } => {
                reg.deregister(account, endpoint, *at);
            }
            Event::Flag { endpoint, .. } => {
                reg.flag(endpoint);
            }
        }
    }
}

pub struct Journal {
    dir: PathBuf,
    log: File,
}

impl Journal {
    /// Opens `dir`, creating it if needed, and rebuilds the registry.
    pub fn open(dir: &Path) -> Result<(Journal, Registry), DirectoryError> {
        fs::create_dir_all(dir)?;
        let mut registry = match fs::read(dir.join(SNAPSHOT_FILE)) {
            Ok(bytes) => serde_json::from_slice(&bytes)?,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Registry::default(),
            Err(e) => return Err(e.into()),
        };
        let log_path = dir.join(LOG_FILE);
        if log_path.exists() {
            for line in BufReader::new(File::open(&log_path)?).lines() {
                let line = line?;
                if line.trim().is_empty() {
                    continue;
                }
                let event: Event = serde_json::from_str(&line)?;
                event.apply(&mut registry);
            }
        }
        let log = OpenOptions::new().create(true).append(true).open(&log_path)?;
        Ok((
            Journal {
                dir: dir.to_path_buf(),
                log,
            },
            registry,
        ))
    }

    pub fn append(&mut self, event: &Event) -> Result<(), DirectoryError> {
        let mut line = serde_json::to_vec(event)?;
        line.push(b'\n');
        self.log.write_all(&line)?;
        self.log.flush()?;
        Ok(())
    }

    /// Writes the snapshot atomically, then starts a fresh log.
    pub fn snapshot(&mut self, registry: &Registry) -> Result<(), DirectoryError> {
        let tmp = self.dir.join(format!("{SNAPSHOT_FILE}.tmp"));
        fs::write(&tmp, serde_json::to_vec_pretty(registry)?)?;
        File::open(&tmp)?.sync_all()?;
        fs::rename(&tmp, self.dir.join(SNAPSHOT_FILE))?;
        self.log = File::create(self.dir.join(LOG_FILE))?;
        Ok(())
    }
}
