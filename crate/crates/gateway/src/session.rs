//! A live instrument advanced one main-loop period at a time, reporting a
//! snapshot whenever what the operator sees changes.

use crate::wire::{ClientCommand, SnapshotPayload};
use miniscope_core::Scope;

pub struct LiveSession {
    scope: Scope,
    last: Option<SnapshotPayload>,
}

impl LiveSession {
    pub fn new(scope: Scope) -> Self {
        Self { scope, last: None }
    }

    pub fn scope(&self) -> &Scope {
        &self.scope
    }

    pub fn snapshot(&self) -> SnapshotPayload {
        SnapshotPayload::of(&self.scope)
    }

    /// Queue a client command; it takes effect at the next loop boundary.
    pub fn apply(&mut self, cmd: &ClientCommand) {
        for c in cmd.commands() {
            self.scope.push(c);
        }
    }

    /// Run up to the next loop boundary (through the iteration there once
    /// the clock reaches it). Returns a snapshot if the view changed.
    pub fn step(&mut self) -> Option<SnapshotPayload> {
        let period = self.scope.loop_ticks();
        let now = self.scope.now();
        self.scope.tick(period - now % period);
        let snap = self.snapshot();
        let changed = self.last.as_ref().is_none_or(|l| !l.same_view(&snap));
        self.last = Some(snap.clone());
        changed.then_some(snap)
    }
}
