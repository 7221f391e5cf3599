use std::collections::VecDeque;

use ndarray::Array2;
use rand::Rng;

/// One joint experience tuple; every vector is indexed by agent.
#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub states: Vec<Vec<f64>>,
    pub actions: Vec<Vec<f64>>,
    pub rewards: Vec<f64>,
    pub next_states: Vec<Vec<f64>>,
}

/// Minibatch in matrix form: one `batch x dim` matrix per agent.
#[derive(Debug, Clone)]
pub struct Batch {
    pub states: Vec<Array2<f64>>,
    pub actions: Vec<Array2<f64>>,
    /// `batch x agents`.
    pub rewards: Array2<f64>,
    pub next_states: Vec<Array2<f64>>,
}

impl Batch {
    pub fn len(&self) -> usize {
        self.rewards.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn num_agents(&self) -> usize {
        self.rewards.ncols()
    }

    /// Stacks transitions into per-agent matrices.
    pub fn from_transitions(items: &[&Transition]) -> Self {
        let agents = items.first().map_or(0, |t| t.rewards.len());
        let stack = |pick: &dyn Fn(&Transition) -> &Vec<Vec<f64>>, m: usize| {
            let dim = items.first().map_or(0, |t| pick(t)[m].len());
            Array2::from_shape_fn((items.len(), dim), |(b, j)| pick(items[b])[m][j])
        };
        Batch {
            states: (0..agents).map(|m| stack(&|t| &t.states, m)).collect(),
            actions: (0..agents).map(|m| stack(&|t| &t.actions, m)).collect(),
            rewards: Array2::from_shape_fn((items.len(), agents), |(b, m)| items[b].rewards[m]),
            next_states: (0..agents).map(|m| stack(&|t| &t.next_states, m)).collect(),
        }
    }
}

/// Bounded FIFO replay memory with uniform sampling (with replacement).
#[derive(Debug, Clone)]
pub struct ReplayBuffer {
    items: VecDeque<Transition>,
    capacity: usize,
}

impl ReplayBuffer {
    pub fn new(capacity: usize) -> Self {
        assert!(capacity > 0, "replay capacity must be positive");
        ReplayBuffer {
            items: VecDeque::with_capacity(capacity.min(1 << 16)),
            capacity,
        }
    }

    pub fn push(&mut self, t: Transition) {
        if self.items.len() == self.capacity {
            self.items.pop_front();
        }
        self.items.push_back(t);
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

    pub fn get(&self, i: usize) -> Option<&Transition> {
        self.items.get(i)
    }

    pub fn sample_indices<R: Rng + ?Sized>(&self, batch: usize, rng: &mut R) -> Vec<usize> {
        if self.items.is_empty() {
            return Vec::new();
        }
        (0..batch).map(|_| rng.random_range(0..self.items.len())).collect()
    }

    pub fn sample<R: Rng + ?Sized>(&self, batch: usize, rng: &mut R) -> Batch {
        let idx = self.sample_indices(batch, rng);
        let items: Vec<&Transition> = idx.iter().map(|&i| &self.items[i]).collect();
        Batch::from_transitions(&items)
    }
}
