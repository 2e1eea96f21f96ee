//! In-memory consultation sessions with an idle timeout.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant};

use ruleforge::inference::ConsultationSession;

pub const DEFAULT_TTL: Duration = Duration::from_secs(30 * 60);

#[derive(Debug)]
pub struct SessionRecord {
    pub session: ConsultationSession,
    pub last_activity: Instant,
}

pub type SessionHandle = Arc<Mutex<SessionRecord>>;

/// Each session sits behind its own lock, so requests for one session are
/// serialized while different sessions proceed independently.
#[derive(Debug)]
pub struct SessionStore {
    ttl: Duration,
    sessions: Mutex<HashMap<String, SessionHandle>>,
}

impl Default for SessionStore {
    fn default() -> Self {
        Self::new(DEFAULT_TTL)
    }
}

impl SessionStore {
    pub fn new(ttl: Duration) -> Self {
        Self { ttl, sessions: Mutex::new(HashMap::new()) }
    }

    pub fn insert(&self, session: ConsultationSession) -> String {
        let id = uuid::Uuid::new_v4().simple().to_string();
        let record = SessionRecord { session, last_activity: Instant::now() };
        let mut map = self.sessions.lock().unwrap();
        self.purge_locked(&mut map, Instant::now());
        map.insert(id.clone(), Arc::new(Mutex::new(record)));
        id
    }

    /// Looks up a live session and marks it active.
    pub fn get(&self, id: &str) -> Option<SessionHandle> {
        let now = Instant::now();
        let handle = {
            let mut map = self.sessions.lock().unwrap();
            self.purge_locked(&mut map, now);
            map.get(id).cloned()
        }?;
        handle.lock().unwrap().last_activity = now;
        Some(handle)
    }

    /// Drops sessions idle for longer than the TTL as of `now`.
    pub fn purge_expired(&self, now: Instant) -> usize {
        let mut map = self.sessions.lock().unwrap();
        self.purge_locked(&mut map, now)
    }

    fn purge_locked(&self, map: &mut HashMap<String, SessionHandle>, now: Instant) -> usize {
        let before = map.len();
        map.retain(|_, h| match h.try_lock() {
            Ok(rec) => now.saturating_duration_since(rec.last_activity) <= self.ttl,
            // In use right now, so not idle.
            Err(_) => true,
        });
        before - map.len()
    }

    pub fn len(&self) -> usize {
        self.sessions.lock().unwrap().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}
