//! Batch runner for independent sessions (sweeps, randomized FSM runs).
//! Data-parallel over rayon with the `parallel` feature, sequential otherwise;
//! results are returned in input order either way.

use crate::acquisition::Tick;
use crate::scope::{Scope, ScopeConfig, ScopeError};

pub fn map_sequential<I, O, F>(items: Vec<I>, f: F) -> Vec<O>
where
    F: Fn(I) -> O,
{
    items.into_iter().map(f).collect()
}

#[cfg(feature = "parallel")]
pub fn map_parallel<I, O, F>(items: Vec<I>, f: F) -> Vec<O>
where
    I: Send,
    O: Send,
    F: Fn(I) -> O + Sync + Send,
{
    use rayon::prelude::*;
    items.into_par_iter().map(f).collect()
}

/// The build's default strategy.
#[cfg(feature = "parallel")]
pub fn map<I, O, F>(items: Vec<I>, f: F) -> Vec<O>
where
    I: Send,
    O: Send,
    F: Fn(I) -> O + Sync + Send,
{
    map_parallel(items, f)
}

#[cfg(not(feature = "parallel"))]
pub fn map<I, O, F>(items: Vec<I>, f: F) -> Vec<O>
where
    I: Send,
    O: Send,
    F: Fn(I) -> O + Sync + Send,
{
    map_sequential(items, f)
}

/// Build a scope per config and run it for `ticks`.
pub fn run_sessions(configs: Vec<ScopeConfig>, ticks: Tick) -> Vec<Result<Scope, ScopeError>> {
    map(configs, |cfg| {
        let mut s = Scope::new(&cfg)?;
        s.tick(ticks);
        Ok(s)
    })
}

/// One session per divider setting over a shared base config.
pub fn adc_n_sweep(base: &ScopeConfig, adc_n: impl IntoIterator<Item = u8>, ticks: Tick) -> Vec<Result<Scope, ScopeError>> {
    let configs = adc_n
        .into_iter()
        .map(|n| {
            let mut cfg = base.clone();
            cfg.adc.adc_n = n;
            cfg
        })
        .collect();
    run_sessions(configs, ticks)
}
