use std::collections::VecDeque;

use rand::Rng;

use crate::env::{Action, LocalObs};

/// One environment step as seen by all agents.
#[derive(Clone, Debug, PartialEq)]
pub struct Transition {
    pub state: Vec<f64>,
    pub locals: Vec<LocalObs>,
    /// Executed actions in `[0, 1]^5`, after noise and clipping.
    pub actions: Vec<Action>,
    pub rewards: Vec<f64>,
    pub shared_reward: f64,
    pub next_state: Vec<f64>,
    pub next_locals: Vec<LocalObs>,
}

/// Bounded FIFO of transitions with uniform sampling (with replacement).
#[derive(Clone, Debug)]
pub struct ReplayBuffer {
    items: VecDeque<Transition>,
    capacity: usize,
}

pub const DEFAULT_REPLAY_CAPACITY: usize = 50_000;

impl ReplayBuffer {
    pub fn new(capacity: usize) -> Self {
        ReplayBuffer {
            items: VecDeque::new(),
            capacity: capacity.max(1),
        }
    }

    pub fn push(&mut self, transition: Transition) {
        if self.items.len() == self.capacity {
            self.items.pop_front();
        }
        self.items.push_back(transition);
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn clear(&mut self) {
        self.items.clear();
    }

    pub fn get(&self, index: usize) -> Option<&Transition> {
        self.items.get(index)
    }

    /// `batch` uniform indices, or `None` while fewer than `batch` transitions are stored.
    pub fn sample_indices<R: Rng + ?Sized>(&self, batch: usize, rng: &mut R) -> Option<Vec<usize>> {
        if batch == 0 || self.items.len() < batch {
            return None;
        }
        Some((0..batch).map(|_| rng.random_range(0..self.items.len())).collect())
    }
}
