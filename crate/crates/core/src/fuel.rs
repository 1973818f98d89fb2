use thiserror::Error;

pub const DEFAULT_FUEL: u64 = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("fuel exhausted")]
pub struct FuelExhausted;

/// A budget of unfoldings. Every evaluator charges one unit per function
/// application it reduces (or, for the specializer, per specialization
/// it creates).
#[derive(Debug, Clone)]
pub struct Fuel {
    remaining: u64,
}

impl Fuel {
    pub fn new(amount: u64) -> Fuel {
        Fuel { remaining: amount }
    }

    pub fn spend(&mut self) -> Result<(), FuelExhausted> {
        self.remaining = self.remaining.checked_sub(1).ok_or(FuelExhausted)?;
        Ok(())
    }

    pub fn remaining(&self) -> u64 {
        self.remaining
    }
}

impl Default for Fuel {
    fn default() -> Self {
        Fuel::new(DEFAULT_FUEL)
    }
}

/// Runs `f` on a stack that grows on demand, so deep object-language
/// recursion is bounded by fuel rather than by the host stack.
pub(crate) fn grow<R>(f: impl FnOnce() -> R) -> R {
    stacker::maybe_grow(64 * 1024, 2 * 1024 * 1024, f)
}
