//! Three-phase learning-rate schedule: constant warmup, constant plateau,
//! exponential decay to a floor.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LrSchedule {
    pub warmup_steps: u64,
    pub warmup_lr: f64,
    pub const_lr: f64,
    pub const_until_step: u64,
    pub final_lr: f64,
    pub final_step: u64,
}

impl LrSchedule {
    /// The production-scale preset: 1e-7 for 3000 steps, 5e-4 until 50k,
    /// exponential decay to 1e-5 at 750k.
    pub fn production() -> Self {
        LrSchedule {
            warmup_steps: 3000,
            warmup_lr: 1e-7,
            const_lr: 5e-4,
            const_until_step: 50_000,
            final_lr: 1e-5,
            final_step: 750_000,
        }
    }

    /// Desk-scale preset sized so campaigns finish in seconds.
    pub fn desk() -> Self {
        LrSchedule {
            warmup_steps: 30,
            warmup_lr: 1e-3,
            const_lr: 1e-2,
            const_until_step: 500,
            final_lr: 1e-3,
            final_step: 5000,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.warmup_steps <= self.const_until_step && self.const_until_step <= self.final_step)
        {
            return Err(Error::Config(format!(
                "schedule breakpoints must be ordered: {} <= {} <= {}",
                self.warmup_steps, self.const_until_step, self.final_step
            )));
        }
        if self.warmup_lr <= 0.0 || self.const_lr <= 0.0 || self.final_lr <= 0.0 {
            return Err(Error::Config("learning rates must be > 0".into()));
        }
        Ok(())
    }

    /// Learning rate at a global step.
    ///
    /// Piecewise: `warmup_lr` strictly before `warmup_steps`, `const_lr`
    /// strictly before `const_until_step`, then geometric interpolation from
    /// `const_lr` to `final_lr` at `final_step`, clamped beyond.
    pub fn lr_at(&self, step: u64) -> f64 {
        if step < self.warmup_steps {
            self.warmup_lr
        } else if step < self.const_until_step {
            self.const_lr
        } else if step >= self.final_step {
            self.final_lr
        } else {
            let span = (self.final_step - self.const_until_step) as f64;
            let frac = (step - self.const_until_step) as f64 / span;
            self.const_lr * (self.final_lr / self.const_lr).powf(frac)
        }
    }
}

impl Default for LrSchedule {
    fn default() -> Self {
        LrSchedule::desk()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn production_preset_breakpoints() {
        let s = LrSchedule::production();
        assert_eq!(s.lr_at(0), 1e-7);
        assert_eq!(s.lr_at(2999), 1e-7);
        assert_eq!(s.lr_at(3000), 5e-4);
        assert_eq!(s.lr_at(49_999), 5e-4);
        assert_eq!(s.lr_at(50_000), 5e-4); // interpolation starts at const_lr
        assert_eq!(s.lr_at(750_000), 1e-5);
        assert_eq!(s.lr_at(2_000_000), 1e-5);
    }

    #[test]
    fn halfway_decay_is_geometric_mean() {
        let s = LrSchedule::production();
        let mid = (s.const_until_step + s.final_step) / 2;
        let expect = (5e-4f64 * 1e-5).sqrt();
        assert!((s.lr_at(mid) - expect).abs() < 1e-15 * expect.abs().max(1.0));
    }

    #[test]
    fn degenerate_decay_span() {
        let s = LrSchedule {
            warmup_steps: 0,
            warmup_lr: 1e-3,
            const_lr: 1e-2,
            const_until_step: 10,
            final_lr: 1e-3,
            final_step: 10,
        };
        s.validate().unwrap();
        assert_eq!(s.lr_at(9), 1e-2);
        assert_eq!(s.lr_at(10), 1e-3);
    }

    #[test]
    fn rejects_unordered_breakpoints() {
        let s = LrSchedule {
            warmup_steps: 100,
            const_until_step: 50,
            ..LrSchedule::desk()
        };
        assert!(s.validate().is_err());
    }
}
