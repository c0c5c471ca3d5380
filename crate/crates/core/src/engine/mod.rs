//! The ParRep driver: Decorrelation, Dephasing and Parallel Steps with the
//! simulation clock, the idealized wall clock and the event counters.

mod decorrelation;
mod parallel;

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

pub use decorrelation::{decorrelation_step, Decorrelated};
pub use parallel::{parallel_step, ExitEvent};

use crate::chain::ChainKernel;
use crate::distribution::FiniteDistribution;
use crate::error::{Error, Result};
use crate::metastable::{MetastableCollection, SetId};
use crate::observable::Observable;
use crate::qsd::{
    dephase_exact, dephase_fleming_viot, dephase_rejection, exact_qsd, DephasingOutcome,
    ExtinctionPolicy, StateSampler,
};
use crate::rng::{Context, RngStream, StreamFamily};
use crate::tolerances::REJECTION_RESTART_BUDGET;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DephasingMode {
    Rejection,
    #[default]
    FlemingViot,
    /// Independent draws from the exact QSD (finite chains only).
    Exact,
}

impl fmt::Display for DephasingMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DephasingMode::Rejection => "rejection",
            DephasingMode::FlemingViot => "fleming_viot",
            DephasingMode::Exact => "exact",
        })
    }
}

impl FromStr for DephasingMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rejection" => Ok(DephasingMode::Rejection),
            "fleming_viot" | "fleming-viot" | "fv" => Ok(DephasingMode::FlemingViot),
            "exact" => Ok(DephasingMode::Exact),
            other => Err(Error::Config(format!("unknown dephasing mode {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParRepConfig {
    pub replicas: usize,
    pub t_poll: u64,
    pub dephasing: DephasingMode,
    /// The run stops once `T_sim` first exceeds this.
    pub stop_t_sim: u64,
    /// Exact QSD dephasing; the decorrelation endpoint is then treated as an
    /// exact QSD sample, which is the idealized setting. Finite chains only.
    pub idealized: bool,
    /// Optional bound on the length of one Decorrelation Step.
    pub decorrelation_cap: Option<u64>,
    pub rejection_budget: u64,
    pub extinction: ExtinctionPolicy,
    pub trace: bool,
}

impl Default for ParRepConfig {
    fn default() -> Self {
        Self {
            replicas: 1,
            t_poll: 1,
            dephasing: DephasingMode::default(),
            stop_t_sim: 1,
            idealized: false,
            decorrelation_cap: None,
            rejection_budget: REJECTION_RESTART_BUDGET,
            extinction: ExtinctionPolicy::default(),
            trace: false,
        }
    }
}

impl ParRepConfig {
    pub fn validate(&self) -> Result<()> {
        if self.replicas == 0 {
            return Err(Error::Config("N must be at least 1".into()));
        }
        if self.t_poll == 0 {
            return Err(Error::Config("T_poll must be at least 1".into()));
        }
        if self.stop_t_sim == 0 {
            return Err(Error::Config("stop_T_sim must be at least 1".into()));
        }
        Ok(())
    }

    pub fn effective_dephasing(&self) -> DephasingMode {
        if self.idealized {
            DephasingMode::Exact
        } else {
            self.dephasing
        }
    }
}

/// Running totals of one ParRep run. Times are in chain steps.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Accumulators {
    pub f_sim: Vec<f64>,
    pub t_sim: u64,
    pub wall_clock: u64,
    pub n_decorr_steps: u64,
    pub n_parallel_steps: u64,
    /// Sum of the loop counters `M` over all Parallel Steps.
    pub n_parallel_loops: u64,
    /// Chain steps actually simulated while dephasing.
    pub dephasing_work: u64,
}

impl Accumulators {
    pub fn new(observables: usize) -> Self {
        Self {
            f_sim: vec![0.0; observables],
            ..Self::default()
        }
    }

    /// `f_sim / T_sim` per observable.
    pub fn estimates(&self) -> Vec<f64> {
        self.f_sim.iter().map(|f| f / self.t_sim as f64).collect()
    }
}

/// `T_sim / wall_clock`.
pub fn speedup(acc: &Accumulators) -> Result<f64> {
    if acc.wall_clock == 0 {
        return Err(Error::UndefinedRatio("speedup with zero wall clock"));
    }
    Ok(acc.t_sim as f64 / acc.wall_clock as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    Decorrelation,
    Dephasing,
    Parallel,
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Phase::Decorrelation => "decorrelation",
            Phase::Dephasing => "dephasing",
            Phase::Parallel => "parallel",
        })
    }
}

/// One phase of a run, as recorded in the optional event trace.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceEvent {
    pub phase: Phase,
    pub set: String,
    /// Simulation time added.
    pub duration: u64,
    /// Wall clock added.
    pub wall: u64,
    /// Loop counter `M` (parallel) or chain steps simulated (dephasing).
    pub work: u64,
    pub contribution: Vec<f64>,
}

impl TraceEvent {
    /// Line-delimited record: `phase=... set=... duration=... wall=... work=... contribution=a;b`.
    pub fn to_line(&self) -> String {
        let c: Vec<String> = self.contribution.iter().map(|v| format!("{v:?}")).collect();
        format!(
            "phase={} set={} duration={} wall={} work={} contribution={}",
            self.phase,
            self.set,
            self.duration,
            self.wall,
            self.work,
            c.join(";")
        )
    }
}

/// Where the run starts.
#[derive(Debug, Clone)]
pub enum Initial<S> {
    State(S),
    /// Law of `X_0` over the enumerated states of a finite chain.
    Distribution(FiniteDistribution),
}

#[derive(Debug, Clone)]
pub struct RunOutput<S> {
    pub estimates: Vec<f64>,
    pub acc: Accumulators,
    pub trace: Option<Vec<TraceEvent>>,
    pub final_state: S,
}

/// A configured ParRep run over one kernel and metastable collection.
pub struct ParRep<'a, K: ChainKernel> {
    kernel: &'a K,
    coll: &'a MetastableCollection<K::State>,
    config: ParRepConfig,
    observables: &'a [Observable<K::State>],
    qsd: HashMap<SetId, StateSampler<K::State>>,
}

impl<'a, K: ChainKernel> ParRep<'a, K> {
    pub fn new(
        kernel: &'a K,
        coll: &'a MetastableCollection<K::State>,
        config: ParRepConfig,
        observables: &'a [Observable<K::State>],
    ) -> Result<Self> {
        config.validate()?;
        if coll.is_empty() {
            return Err(Error::Config("no metastable sets declared".into()));
        }
        if kernel.finite().is_some() {
            coll.validate(kernel)?;
        } else if config.effective_dephasing() == DephasingMode::Exact {
            return Err(Error::Unsupported("exact dephasing"));
        }
        Ok(Self {
            kernel,
            coll,
            config,
            observables,
            qsd: HashMap::new(),
        })
    }

    /// Supplies a precomputed QSD for exact dephasing in `set`.
    pub fn with_qsd(mut self, set: SetId, nu: &FiniteDistribution) -> Result<Self> {
        self.qsd.insert(set, StateSampler::new(self.kernel, nu)?);
        Ok(self)
    }

    pub fn config(&self) -> &ParRepConfig {
        &self.config
    }

    fn qsd_sampler(&mut self, set: SetId) -> Result<&StateSampler<K::State>> {
        if !self.qsd.contains_key(&set) {
            let nu = exact_qsd(self.kernel, self.coll, set)?;
            self.qsd.insert(set, StateSampler::new(self.kernel, &nu)?);
        }
        Ok(&self.qsd[&set])
    }

    fn dephase(
        &mut self,
        set: SetId,
        start: &K::State,
        streams: StreamFamily,
    ) -> Result<DephasingOutcome<K::State>> {
        let n = self.config.replicas;
        let t_phase = self.coll.t_phase(set);
        match self.config.effective_dephasing() {
            DephasingMode::Exact => {
                let mut rng = streams.stream(Context::Dephasing, 0);
                Ok(dephase_exact(self.qsd_sampler(set)?, n, &mut rng))
            }
            // A single walker has nobody to branch onto; rejection is the
            // one-replica limit.
            DephasingMode::FlemingViot if n >= 2 => dephase_fleming_viot(
                self.kernel,
                self.coll,
                set,
                n,
                t_phase,
                start,
                streams,
                self.config.extinction,
            ),
            DephasingMode::FlemingViot | DephasingMode::Rejection => dephase_rejection(
                self.kernel,
                self.coll,
                set,
                n,
                t_phase,
                start,
                streams,
                self.config.rejection_budget,
            ),
        }
    }

    /// Iterates Decorrelation, Dephasing and Parallel Steps until `T_sim`
    /// first exceeds `stop_t_sim`, and returns `f_sim / T_sim`.
    pub fn run(&mut self, initial: &Initial<K::State>, seed: u64) -> Result<RunOutput<K::State>> {
        let mut x = match initial {
            Initial::State(x) => x.clone(),
            Initial::Distribution(d) => {
                let mut rng = RngStream::with(seed, Context::Initial, 0, 0);
                StateSampler::new(self.kernel, d)?.sample(&mut rng)
            }
        };
        if !self.kernel.contains(&x) {
            return Err(Error::Domain(format!("{x:?}")));
        }
        if let Some(space) = self.kernel.finite() {
            debug_assert!(space.index_of(&x).is_some());
        }
        let mut acc = Accumulators::new(self.observables.len());
        let mut trace = self.config.trace.then(Vec::new);
        let mut chain_rng = RngStream::with(seed, Context::Decorrelation, 0, 0);
        let stop = self.config.stop_t_sim;
        let t_poll = self.config.t_poll;

        loop {
            let before = acc.f_sim.clone();
            let d = decorrelation_step(
                self.kernel,
                self.coll,
                x,
                &mut acc,
                self.observables,
                &mut chain_rng,
                self.config.decorrelation_cap,
            )?;
            if let Some(t) = trace.as_mut() {
                t.push(TraceEvent {
                    phase: Phase::Decorrelation,
                    set: self.coll.name(d.set).to_string(),
                    duration: d.steps,
                    wall: d.steps,
                    work: d.steps,
                    contribution: acc.f_sim.iter().zip(&before).map(|(a, b)| a - b).collect(),
                });
            }
            if acc.t_sim > stop {
                x = d.state;
                break;
            }

            let set = d.set;
            let streams = StreamFamily::new(seed, acc.n_parallel_steps);
            let dephased = self.dephase(set, &d.state, streams)?;
            let t_phase = self.coll.t_phase(set);
            acc.wall_clock += t_phase;
            acc.dephasing_work += dephased.work;
            if let Some(t) = trace.as_mut() {
                t.push(TraceEvent {
                    phase: Phase::Dephasing,
                    set: self.coll.name(set).to_string(),
                    duration: 0,
                    wall: t_phase,
                    work: dephased.work,
                    contribution: vec![0.0; self.observables.len()],
                });
            }

            let ev = parallel_step(
                self.kernel,
                self.coll,
                set,
                &dephased.samples,
                t_poll,
                self.observables,
                streams,
            )?;
            acc.t_sim += ev.tau_acc;
            acc.wall_clock += ev.loops * t_poll;
            acc.n_parallel_steps += 1;
            acc.n_parallel_loops += ev.loops;
            for (f, c) in acc.f_sim.iter_mut().zip(&ev.f_contrib) {
                *f += c;
            }
            if let Some(t) = trace.as_mut() {
                t.push(TraceEvent {
                    phase: Phase::Parallel,
                    set: self.coll.name(set).to_string(),
                    duration: ev.tau_acc,
                    wall: ev.loops * t_poll,
                    work: ev.loops,
                    contribution: ev.f_contrib.clone(),
                });
            }
            x = ev.x_acc;
            if acc.t_sim > stop {
                break;
            }
        }
        Ok(RunOutput {
            estimates: acc.estimates(),
            acc,
            trace,
            final_state: x,
        })
    }
}

/// Checks the accounting identities of a traced run:
/// `T_sim` is the sum of decorrelation durations and accelerated exit times,
/// and the wall clock adds `T_phase` per dephasing and `M * T_poll` per
/// Parallel Step.
pub fn check_accounting(acc: &Accumulators, trace: &[TraceEvent], t_poll: u64) -> Result<()> {
    let mut t_sim = 0u64;
    let mut wall = 0u64;
    let mut loops = 0u64;
    let (mut n_dec, mut n_par) = (0u64, 0u64);
    for e in trace {
        match e.phase {
            Phase::Decorrelation => {
                n_dec += 1;
                t_sim += e.duration;
                wall += e.duration;
                if e.wall != e.duration {
                    return Err(Error::Precondition("decorrelation wall != duration".into()));
                }
            }
            Phase::Dephasing => {
                if e.duration != 0 {
                    return Err(Error::Precondition("dephasing advanced T_sim".into()));
                }
                wall += e.wall;
            }
            Phase::Parallel => {
                n_par += 1;
                t_sim += e.duration;
                loops += e.work;
                if e.wall != e.work * t_poll {
                    return Err(Error::Precondition("parallel wall != M * T_poll".into()));
                }
                wall += e.wall;
            }
        }
    }
    let ok = t_sim == acc.t_sim
        && wall == acc.wall_clock
        && loops == acc.n_parallel_loops
        && n_dec == acc.n_decorr_steps
        && n_par == acc.n_parallel_steps;
    if ok {
        Ok(())
    } else {
        Err(Error::Precondition(format!(
            "accounting mismatch: trace gives T_sim={t_sim} wall={wall} loops={loops}, accumulators {:?}",
            acc
        )))
    }
}
