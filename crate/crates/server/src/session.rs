//! Bearer-token sessions held in memory.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use chrono::{DateTime, Duration, Utc};
use rand::rngs::OsRng;
use rand::RngCore;
use saris_core::Actor;
use serde::Serialize;

pub type Clock = Arc<dyn Fn() -> DateTime<Utc> + Send + Sync>;

pub const DEFAULT_TTL_HOURS: i64 = 8;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Session {
    pub token: String,
    pub actor: Actor,
    /// Human-readable name shown by clients.
    pub display_name: String,
    pub issued_at: DateTime<Utc>,
    pub expires_at: DateTime<Utc>,
}

pub struct SessionManager {
    ttl: Duration,
    clock: Clock,
    sessions: Mutex<HashMap<String, Session>>,
}

/// 128 random bits from the operating system, hex encoded.
pub fn new_token() -> String {
    let mut bytes = [0u8; 16];
    OsRng.fill_bytes(&mut bytes);
    hex::encode(bytes)
}

impl SessionManager {
    pub fn new(ttl: Duration) -> Self {
        Self::with_clock(ttl, Arc::new(Utc::now))
    }

    pub fn with_clock(ttl: Duration, clock: Clock) -> Self {
        SessionManager {
            ttl,
            clock,
            sessions: Mutex::new(HashMap::new()),
        }
    }

    pub fn ttl(&self) -> Duration {
        self.ttl
    }

    pub fn issue(&self, actor: Actor, display_name: String) -> Session {
        let issued_at = (self.clock)();
        let mut sessions = self.sessions.lock().expect("session lock poisoned");
        sessions.retain(|_, s| s.expires_at > issued_at);
        let mut token = new_token();
        while sessions.contains_key(&token) {
            token = new_token();
        }
        let session = Session {
            token: token.clone(),
            actor,
            display_name,
            issued_at,
            expires_at: issued_at + self.ttl,
        };
        sessions.insert(token, session.clone());
        session
    }

    /// The live session for `token`; expired sessions are dropped.
    pub fn validate(&self, token: &str) -> Option<Session> {
        let now = (self.clock)();
        let mut sessions = self.sessions.lock().expect("session lock poisoned");
        match sessions.get(token) {
            Some(s) if s.expires_at > now => Some(s.clone()),
            Some(_) => {
                sessions.remove(token);
                None
            }
            None => None,
        }
    }

    pub fn revoke(&self, token: &str) -> bool {
        self.sessions
            .lock()
            .expect("session lock poisoned")
            .remove(token)
            .is_some()
    }

    pub fn len(&self) -> usize {
        self.sessions.lock().expect("session lock poisoned").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}
