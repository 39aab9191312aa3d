//! Template constructors for the stochastic block library and the
//! deterministic base blocks the case studies need.
//!
//! Port names are fixed per kind (`in`, `in1`, `in2`, `out`); wiring
//! renames them at instantiation. Internal variables (`noise`, `age`,
//! `timer`) and labels get the instance prefix then.
//!
//! Receiving self-loops exist in every location so a composed partner can
//! deliver a discrete update no matter where this template currently is;
//! any receive that rewrites `out` also sends `out` so updates propagate
//! through chains of blocks.

use std::collections::BTreeSet;

use crate::automata::{Edge, Hawk, Location, Template, Trigger};
use crate::expr::{Atom, Cmp, Expr, FlowExpr, Predicate};
use crate::kernels::Distribution;
use crate::num::{q_int, Q};

#[derive(Debug, Clone, thiserror::Error)]
pub enum TemplateError {
    #[error("{context}: delay distribution may produce negative values: {dist}")]
    NegativeSupport { context: String, dist: String },
    #[error("noise sample rate must be positive, got {rate}")]
    NonPositiveRate { rate: Q },
    #[error("max_steps must be at least 1")]
    ZeroSteps,
    #[error("aging rate must be positive, got {rate}")]
    NonPositiveAgingRate { rate: Q },
    #[error("pause and resume distributions must be given together")]
    HalfPausePair,
    #[error("relay on point {on} below off point {off}")]
    InvertedRelayBand { on: Q, off: Q },
    #[error("step size must lie in (0, 1], got {step}")]
    BadStepSize { step: Q },
}

fn require_nonnegative(dist: &Distribution, context: &str) -> Result<(), TemplateError> {
    if dist.nonnegative_support() {
        Ok(())
    } else {
        Err(TemplateError::NegativeSupport {
            context: context.to_string(),
            dist: dist.to_string(),
        })
    }
}

fn eq_atom(var: &str, value: Q) -> Predicate {
    Predicate::atom(Atom::cmp(Expr::var(var), Cmp::Eq, Expr::constant(value)))
}

#[derive(Debug, Clone)]
pub struct TimerParams {
    pub dist: Distribution,
}

/// Expiring countdown: `out` is drawn from `dist`, decreases at rate -1,
/// and is redrawn (and its update sent) each time it hits zero.
pub fn stochastic_timer(p: &TimerParams) -> Result<Template, TemplateError> {
    require_nonnegative(&p.dist, "timer expiration")?;
    let mut h = Hawk::new("timer");
    h.variables = vec!["out".into()];
    h.locations.push(Location::urgent("linit"));
    h.locations.push(
        Location::new("l0")
            .with_flow("out", FlowExpr::constant(q_int(-1)))
            .with_invariant(Predicate::atom(Atom::cmp(
                Expr::var("out"),
                Cmp::Ge,
                Expr::int(0),
            ))),
    );
    h.edges.push(Edge::new("linit", "init", "l0", Trigger::Immediate));
    h.edges.push(
        Edge::new("l0", "loop", "l0", Trigger::GuardCrossing)
            .with_guard(eq_atom("out", q_int(0)))
            .sending("out"),
    );
    h.reset_kernels.insert(("init".into(), "out".into()), p.dist.clone());
    h.reset_kernels.insert(("loop".into(), "out".into()), p.dist.clone());
    h.init_location = "linit".into();
    h.init_vals.insert("out".into(), Expr::int(0));
    h.canonicalize();
    Ok(Template::new(h, BTreeSet::new()))
}

#[derive(Debug, Clone)]
pub struct SwitchParams {
    /// Dwell before leaving the first-input mode.
    pub dist1: Distribution,
    /// Dwell before returning to it.
    pub dist2: Distribution,
}

/// Two-mode multiplexer: `out` follows `in1`, then `in2`, alternating on
/// the expirations of the `switch1` / `switch2` random clocks.
pub fn stochastic_switch(p: &SwitchParams) -> Result<Template, TemplateError> {
    require_nonnegative(&p.dist1, "switch1 delay")?;
    require_nonnegative(&p.dist2, "switch2 delay")?;
    let mut h = Hawk::new("switch");
    h.variables = vec!["in1".into(), "in2".into(), "out".into()];
    h.locations
        .push(Location::new("l0").with_flow("out", FlowExpr::rate_of("in1", q_int(1))));
    h.locations
        .push(Location::new("l1").with_flow("out", FlowExpr::rate_of("in2", q_int(1))));
    h.edges.push(
        Edge::new("l0", "switch1", "l1", Trigger::Stochastic)
            .with_reset("out", Expr::var("in2"))
            .sending("out"),
    );
    h.edges.push(
        Edge::new("l1", "switch2", "l0", Trigger::Stochastic)
            .with_reset("out", Expr::var("in1"))
            .sending("out"),
    );
    h.edges.push(
        Edge::new("l0", "rx_in1", "l0", Trigger::Immediate)
            .receiving("in1")
            .with_reset("out", Expr::var("in1"))
            .sending("out"),
    );
    h.edges.push(Edge::new("l1", "rx_in1", "l1", Trigger::Immediate).receiving("in1"));
    h.edges.push(
        Edge::new("l1", "rx_in2", "l1", Trigger::Immediate)
            .receiving("in2")
            .with_reset("out", Expr::var("in2"))
            .sending("out"),
    );
    h.edges.push(Edge::new("l0", "rx_in2", "l0", Trigger::Immediate).receiving("in2"));
    h.delay_kernels.insert("switch1".into(), p.dist1.clone());
    h.delay_kernels.insert("switch2".into(), p.dist2.clone());
    h.init_location = "l0".into();
    h.init_vals.insert("out".into(), Expr::var("in1"));
    h.canonicalize();
    Ok(Template::new(
        h,
        ["in1".to_string(), "in2".to_string()].into_iter().collect(),
    ))
}

#[derive(Debug, Clone)]
pub struct SamplingParams {
    pub dist: Distribution,
}

/// Sample-and-hold with random sampling instants: at each expiration of
/// the `sample` clock, `out` is set to the current `in` and sent.
pub fn stochastic_sampling(p: &SamplingParams) -> Result<Template, TemplateError> {
    require_nonnegative(&p.dist, "sampling delay")?;
    let mut h = Hawk::new("sampling");
    h.variables = vec!["in".into(), "out".into()];
    h.locations.push(Location::urgent("linit"));
    h.locations.push(Location::new("l0"));
    h.edges.push(
        Edge::new("linit", "init", "l0", Trigger::Immediate).with_reset("out", Expr::var("in")),
    );
    h.edges.push(
        Edge::new("l0", "sample", "l0", Trigger::Stochastic)
            .with_reset("out", Expr::var("in"))
            .sending("out"),
    );
    h.edges.push(Edge::new("l0", "rx_in", "l0", Trigger::Immediate).receiving("in"));
    h.edges.push(Edge::new("linit", "rx_in", "linit", Trigger::Immediate).receiving("in"));
    h.delay_kernels.insert("sample".into(), p.dist.clone());
    h.init_location = "linit".into();
    h.init_vals.insert("out".into(), Expr::var("in"));
    h.canonicalize();
    Ok(Template::new(h, ["in".to_string()].into_iter().collect()))
}

#[derive(Debug, Clone)]
pub enum FactorMode {
    /// Distortion = factor * noise.
    ConstantFactor(Q),
    /// Distortion = in * noise.
    InputMultiplier,
}

#[derive(Debug, Clone)]
pub struct NoiseParams {
    pub mean: Q,
    pub variance: Q,
    /// Resampling period.
    pub rate: Q,
    pub factor_mode: FactorMode,
}

/// Additive noise: every `rate` time units a fresh `noise` value is drawn
/// from N(mean, variance) in a transient urgent location, then
/// `out := in + distortion` is applied and sent.
pub fn stochastic_noise(p: &NoiseParams) -> Result<Template, TemplateError> {
    if p.rate <= q_int(0) {
        return Err(TemplateError::NonPositiveRate { rate: p.rate });
    }
    let distorted = |base: Expr| -> Expr {
        match &p.factor_mode {
            FactorMode::ConstantFactor(f) => base.add(&Expr::term(*f, "noise")),
            FactorMode::InputMultiplier => base.add(
                &Expr::var("in")
                    .mul(&Expr::var("noise"))
                    .expect("degree-2 product"),
            ),
        }
    };
    let out_flow = match &p.factor_mode {
        FactorMode::ConstantFactor(_) => FlowExpr::rate_of("in", q_int(1)),
        FactorMode::InputMultiplier => FlowExpr::rate_of("in", q_int(1))
            .add(&FlowExpr::rate_times_value("in", "noise", q_int(1))),
    };
    let mut h = Hawk::new("noise");
    h.variables = vec!["in".into(), "noise".into(), "out".into(), "timer".into()];
    h.locations.push(Location::urgent("linit"));
    h.locations.push(
        Location::new("l0")
            .with_flow("timer", FlowExpr::constant(q_int(1)))
            .with_flow("out", out_flow.clone())
            .with_invariant(Predicate::atom(Atom::cmp(
                Expr::var("timer"),
                Cmp::Le,
                Expr::constant(p.rate),
            ))),
    );
    h.locations.push(Location::urgent("l1").with_flow("out", out_flow));
    h.edges.push(
        Edge::new("linit", "seed", "l1", Trigger::Immediate).with_reset("timer", Expr::int(0)),
    );
    h.edges.push(
        Edge::new("l1", "apply", "l0", Trigger::Immediate)
            .with_reset("out", distorted(Expr::var("in")))
            .sending("out"),
    );
    h.edges.push(
        Edge::new("l0", "tick", "l1", Trigger::GuardCrossing)
            .with_guard(Predicate::atom(Atom::cmp(
                Expr::var("timer"),
                Cmp::Ge,
                Expr::constant(p.rate),
            )))
            .with_reset("timer", Expr::int(0)),
    );
    h.edges.push(
        Edge::new("l0", "rx_in", "l0", Trigger::Immediate)
            .receiving("in")
            .with_reset("out", distorted(Expr::var("in")))
            .sending("out"),
    );
    h.edges.push(Edge::new("linit", "rx_in", "linit", Trigger::Immediate).receiving("in"));
    h.edges.push(Edge::new("l1", "rx_in", "l1", Trigger::Immediate).receiving("in"));
    let noise_dist = Distribution::Normal(
        Expr::constant(p.mean),
        Expr::constant(p.variance),
    );
    h.reset_kernels.insert(("seed".into(), "noise".into()), noise_dist.clone());
    h.reset_kernels.insert(("tick".into(), "noise".into()), noise_dist);
    h.init_location = "linit".into();
    h.init_vals.insert("out".into(), Expr::int(0));
    h.init_vals.insert("timer".into(), Expr::int(0));
    h.init_vals.insert("noise".into(), Expr::int(0));
    h.canonicalize();
    Ok(Template::new(h, ["in".to_string()].into_iter().collect()))
}

#[derive(Debug, Clone)]
pub enum RepairMode {
    /// While repairing, `out` carries this fraction of `in`.
    PercentOfInput(Q),
    /// While repairing, `out` carries the dedicated repair signal `in2`.
    ExplicitSignal,
}

#[derive(Debug, Clone)]
pub struct DiscreteAgingParams {
    pub dist_fail: Distribution,
    pub dist_repair: Distribution,
    pub max_steps: u32,
    /// Degradation per step; defaults to 1/max_steps so the signal hits
    /// its lower bound exactly at max_steps.
    pub step: Option<Q>,
    pub repair_mode: RepairMode,
}

/// Step-wise degradation: each `fail` expiration increases `age` and
/// rescales `out` to `(1 - age*step) * in`; after `max_steps` steps the
/// next expiration enters repair, and `repair`'s expiration restores the
/// signal.
pub fn discrete_aging(p: &DiscreteAgingParams) -> Result<Template, TemplateError> {
    require_nonnegative(&p.dist_fail, "fail delay")?;
    require_nonnegative(&p.dist_repair, "repair delay")?;
    if p.max_steps == 0 {
        return Err(TemplateError::ZeroSteps);
    }
    let step = p.step.unwrap_or(Q::new(1, p.max_steps as i64));
    if step <= q_int(0) || step > q_int(1) {
        return Err(TemplateError::BadStepSize { step });
    }
    let explicit = matches!(p.repair_mode, RepairMode::ExplicitSignal);
    let repair_value = |_: ()| -> Expr {
        match &p.repair_mode {
            RepairMode::PercentOfInput(r) => Expr::term(*r, "in"),
            RepairMode::ExplicitSignal => Expr::var("in2"),
        }
    };
    let repair_flow = match &p.repair_mode {
        RepairMode::PercentOfInput(r) => FlowExpr::rate_of("in", *r),
        RepairMode::ExplicitSignal => FlowExpr::rate_of("in2", q_int(1)),
    };
    // out = (1 - age*step) * in, kept in both reset and flow form
    let degraded_now = Expr::var("in").sub(
        &Expr::var("age")
            .mul(&Expr::var("in"))
            .expect("degree-2 product")
            .scale(step),
    );
    let aging_out_flow = FlowExpr::rate_of("in", q_int(1))
        .add(&FlowExpr::rate_times_value("in", "age", -step));

    let mut h = Hawk::new("discrete_aging");
    h.variables = vec!["age".into(), "in".into(), "out".into()];
    if explicit {
        h.variables.push("in2".into());
    }
    h.locations.push(Location::new("aging").with_flow("out", aging_out_flow));
    h.locations.push(Location::new("repairing").with_flow("out", repair_flow));
    for k in 0..p.max_steps {
        let factor = q_int(1) - step * q_int(k as i64 + 1);
        h.edges.push(
            Edge::new("aging", "fail", "aging", Trigger::Stochastic)
                .with_guard(eq_atom("age", q_int(k as i64)))
                .with_reset("age", Expr::int(k as i64 + 1))
                .with_reset("out", Expr::term(factor, "in"))
                .sending("out"),
        );
    }
    h.edges.push(
        Edge::new("aging", "fail", "repairing", Trigger::Stochastic)
            .with_guard(eq_atom("age", q_int(p.max_steps as i64)))
            .with_reset("out", repair_value(()))
            .sending("out"),
    );
    h.edges.push(
        Edge::new("repairing", "repair", "aging", Trigger::Stochastic)
            .with_reset("out", Expr::var("in"))
            .with_reset("age", Expr::int(0))
            .sending("out"),
    );
    h.edges.push(
        Edge::new("aging", "rx_in", "aging", Trigger::Immediate)
            .receiving("in")
            .with_reset("out", degraded_now)
            .sending("out"),
    );
    let repairing_rx = Edge::new("repairing", "rx_in", "repairing", Trigger::Immediate)
        .receiving("in");
    h.edges.push(match &p.repair_mode {
        RepairMode::PercentOfInput(_) => repairing_rx
            .with_reset("out", repair_value(()))
            .sending("out"),
        RepairMode::ExplicitSignal => repairing_rx,
    });
    if explicit {
        h.edges.push(
            Edge::new("repairing", "rx_in2", "repairing", Trigger::Immediate)
                .receiving("in2")
                .with_reset("out", Expr::var("in2"))
                .sending("out"),
        );
        h.edges.push(Edge::new("aging", "rx_in2", "aging", Trigger::Immediate).receiving("in2"));
    }
    h.delay_kernels.insert("fail".into(), p.dist_fail.clone());
    h.delay_kernels.insert("repair".into(), p.dist_repair.clone());
    h.init_location = "aging".into();
    h.init_vals.insert("out".into(), Expr::var("in"));
    h.init_vals.insert("age".into(), Expr::int(0));
    h.canonicalize();
    let mut inputs: BTreeSet<String> = ["in".to_string()].into_iter().collect();
    if explicit {
        inputs.insert("in2".into());
    }
    Ok(Template::new(h, inputs))
}

#[derive(Debug, Clone)]
pub struct ContinuousAgingParams {
    /// Omit both pause and resume to disable pausing.
    pub dist_pause: Option<Distribution>,
    pub dist_resume: Option<Distribution>,
    pub dist_repair: Distribution,
    /// Linear decay rate of the aging factor, must be positive.
    pub rate_a: Q,
    /// Aging factor bound that triggers repair.
    pub bound: Q,
    pub repair_mode: RepairMode,
}

/// Linear degradation: `age` decays from 1 at `rate_a`, `out = in * age`.
/// Pause/resume clocks freeze and release the decay; hitting the bound is
/// a guard crossing into repair.
pub fn continuous_aging(p: &ContinuousAgingParams) -> Result<Template, TemplateError> {
    if p.rate_a <= q_int(0) {
        return Err(TemplateError::NonPositiveAgingRate { rate: p.rate_a });
    }
    if p.dist_pause.is_some() != p.dist_resume.is_some() {
        return Err(TemplateError::HalfPausePair);
    }
    if let Some(d) = &p.dist_pause {
        require_nonnegative(d, "pause delay")?;
    }
    if let Some(d) = &p.dist_resume {
        require_nonnegative(d, "resume delay")?;
    }
    require_nonnegative(&p.dist_repair, "repair delay")?;
    let explicit = matches!(p.repair_mode, RepairMode::ExplicitSignal);
    let repair_value = match &p.repair_mode {
        RepairMode::PercentOfInput(r) => Expr::term(*r, "in"),
        RepairMode::ExplicitSignal => Expr::var("in2"),
    };
    let repair_flow = match &p.repair_mode {
        RepairMode::PercentOfInput(r) => FlowExpr::rate_of("in", *r),
        RepairMode::ExplicitSignal => FlowExpr::rate_of("in2", q_int(1)),
    };
    let tracking = Expr::var("in").mul(&Expr::var("age")).expect("degree-2 product");
    // d(in*age)/dt with age' = -rate_a
    let aging_out_flow = FlowExpr::rate_times_value("in", "age", q_int(1))
        .add(&FlowExpr::value_of("in", -p.rate_a));
    let frozen_out_flow = FlowExpr::rate_times_value("in", "age", q_int(1));

    let mut h = Hawk::new("continuous_aging");
    h.variables = vec!["age".into(), "in".into(), "out".into()];
    if explicit {
        h.variables.push("in2".into());
    }
    h.locations.push(
        Location::new("aging")
            .with_flow("age", FlowExpr::constant(-p.rate_a))
            .with_flow("out", aging_out_flow)
            .with_invariant(Predicate::atom(Atom::cmp(
                Expr::var("age"),
                Cmp::Ge,
                Expr::constant(p.bound),
            ))),
    );
    h.locations.push(Location::new("repairing").with_flow("out", repair_flow));
    let pausing = p.dist_pause.is_some();
    if pausing {
        h.locations.push(Location::new("paused").with_flow("out", frozen_out_flow));
        h.edges.push(Edge::new("aging", "pause", "paused", Trigger::Stochastic));
        h.edges.push(Edge::new("paused", "resume", "aging", Trigger::Stochastic));
        h.edges.push(
            Edge::new("paused", "rx_in", "paused", Trigger::Immediate)
                .receiving("in")
                .with_reset("out", tracking.clone())
                .sending("out"),
        );
        h.delay_kernels.insert("pause".into(), p.dist_pause.clone().unwrap());
        h.delay_kernels.insert("resume".into(), p.dist_resume.clone().unwrap());
    }
    h.edges.push(
        Edge::new("aging", "bound", "repairing", Trigger::GuardCrossing)
            .with_guard(Predicate::atom(Atom::cmp(
                Expr::var("age"),
                Cmp::Le,
                Expr::constant(p.bound),
            )))
            .with_reset("out", repair_value.clone())
            .sending("out"),
    );
    h.edges.push(
        Edge::new("repairing", "repair", "aging", Trigger::Stochastic)
            .with_reset("out", Expr::var("in"))
            .with_reset("age", Expr::int(1))
            .sending("out"),
    );
    h.edges.push(
        Edge::new("aging", "rx_in", "aging", Trigger::Immediate)
            .receiving("in")
            .with_reset("out", tracking)
            .sending("out"),
    );
    let repairing_rx =
        Edge::new("repairing", "rx_in", "repairing", Trigger::Immediate).receiving("in");
    h.edges.push(match &p.repair_mode {
        RepairMode::PercentOfInput(_) => repairing_rx
            .with_reset("out", repair_value)
            .sending("out"),
        RepairMode::ExplicitSignal => repairing_rx,
    });
    if explicit {
        h.edges.push(
            Edge::new("repairing", "rx_in2", "repairing", Trigger::Immediate)
                .receiving("in2")
                .with_reset("out", Expr::var("in2"))
                .sending("out"),
        );
        h.edges.push(Edge::new("aging", "rx_in2", "aging", Trigger::Immediate).receiving("in2"));
        if pausing {
            h.edges
                .push(Edge::new("paused", "rx_in2", "paused", Trigger::Immediate).receiving("in2"));
        }
    }
    h.delay_kernels.insert("repair".into(), p.dist_repair.clone());
    h.init_location = "aging".into();
    // out = in * age with age starting at 1
    h.init_vals.insert("out".into(), Expr::var("in"));
    h.init_vals.insert("age".into(), Expr::int(1));
    h.canonicalize();
    let mut inputs: BTreeSet<String> = ["in".to_string()].into_iter().collect();
    if explicit {
        inputs.insert("in2".into());
    }
    Ok(Template::new(h, inputs))
}

#[derive(Debug, Clone)]
pub enum BaseBlock {
    Constant { value: Q },
    Gain { gain: Q },
    Sum,
    Integrator { init: Q },
    Relay { on: Q, off: Q, on_value: Q, off_value: Q, init_on: bool },
}

/// Minimal deterministic blocks: constant source, gain, two-input adder,
/// integrator, and a hysteresis relay.
pub fn base_block(kind: &BaseBlock) -> Result<Template, TemplateError> {
    let mut h;
    let mut inputs: BTreeSet<String> = BTreeSet::new();
    match kind {
        BaseBlock::Constant { value } => {
            h = Hawk::new("constant");
            h.variables = vec!["out".into()];
            h.locations.push(Location::new("l0"));
            h.init_location = "l0".into();
            h.init_vals.insert("out".into(), Expr::constant(*value));
        }
        BaseBlock::Gain { gain } => {
            h = Hawk::new("gain");
            h.variables = vec!["in".into(), "out".into()];
            inputs.insert("in".into());
            h.locations
                .push(Location::new("l0").with_flow("out", FlowExpr::rate_of("in", *gain)));
            h.edges.push(
                Edge::new("l0", "rx_in", "l0", Trigger::Immediate)
                    .receiving("in")
                    .with_reset("out", Expr::term(*gain, "in"))
                    .sending("out"),
            );
            h.init_location = "l0".into();
            h.init_vals.insert("out".into(), Expr::term(*gain, "in"));
        }
        BaseBlock::Sum => {
            h = Hawk::new("sum");
            h.variables = vec!["in1".into(), "in2".into(), "out".into()];
            inputs.insert("in1".into());
            inputs.insert("in2".into());
            let total = Expr::var("in1").add(&Expr::var("in2"));
            h.locations.push(
                Location::new("l0").with_flow(
                    "out",
                    FlowExpr::rate_of("in1", q_int(1)).add(&FlowExpr::rate_of("in2", q_int(1))),
                ),
            );
            for port in ["in1", "in2"] {
                h.edges.push(
                    Edge::new("l0", &format!("rx_{port}"), "l0", Trigger::Immediate)
                        .receiving(port)
                        .with_reset("out", total.clone())
                        .sending("out"),
                );
            }
            h.init_location = "l0".into();
            h.init_vals.insert("out".into(), total);
        }
        BaseBlock::Integrator { init } => {
            h = Hawk::new("integrator");
            h.variables = vec!["in".into(), "out".into()];
            inputs.insert("in".into());
            h.locations
                .push(Location::new("l0").with_flow("out", FlowExpr::value_of("in", q_int(1))));
            h.edges
                .push(Edge::new("l0", "rx_in", "l0", Trigger::Immediate).receiving("in"));
            h.init_location = "l0".into();
            h.init_vals.insert("out".into(), Expr::constant(*init));
        }
        BaseBlock::Relay { on, off, on_value, off_value, init_on } => {
            if on < off {
                return Err(TemplateError::InvertedRelayBand { on: *on, off: *off });
            }
            h = Hawk::new("relay");
            h.variables = vec!["in".into(), "out".into()];
            inputs.insert("in".into());
            h.locations.push(Location::new("on"));
            h.locations.push(Location::new("off"));
            h.edges.push(
                Edge::new("on", "to_off", "off", Trigger::GuardCrossing)
                    .with_guard(Predicate::atom(Atom::cmp(
                        Expr::var("in"),
                        Cmp::Le,
                        Expr::constant(*off),
                    )))
                    .with_reset("out", Expr::constant(*off_value))
                    .sending("out"),
            );
            h.edges.push(
                Edge::new("off", "to_on", "on", Trigger::GuardCrossing)
                    .with_guard(Predicate::atom(Atom::cmp(
                        Expr::var("in"),
                        Cmp::Ge,
                        Expr::constant(*on),
                    )))
                    .with_reset("out", Expr::constant(*on_value))
                    .sending("out"),
            );
            for loc in ["on", "off"] {
                h.edges
                    .push(Edge::new(loc, "rx_in", loc, Trigger::Immediate).receiving("in"));
            }
            h.init_location = if *init_on { "on".into() } else { "off".into() };
            h.init_vals.insert(
                "out".into(),
                Expr::constant(if *init_on { *on_value } else { *off_value }),
            );
        }
    }
    h.canonicalize();
    Ok(Template::new(h, inputs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::{dirac_q, uniform_q};

    fn assert_clean(t: &Template) {
        let report = t.validate();
        assert!(report.is_empty(), "template validation: {report}");
    }

    #[test]
    fn timer_structure() {
        let t = stochastic_timer(&TimerParams { dist: dirac_q(q_int(5)) }).unwrap();
        assert_clean(&t);
        assert_eq!(t.hawk.locations.len(), 2);
        assert_eq!(t.hawk.edges.len(), 2);
        assert_eq!(t.outputs().len(), 1);
        assert!(t.inputs.is_empty());
        assert!(t.hawk.delay_kernels.is_empty());
        // both edges draw out from the configured distribution
        assert_eq!(t.hawk.reset_kernels.len(), 2);
    }

    #[test]
    fn timer_rejects_negative_support() {
        let p = TimerParams {
            dist: Distribution::Normal(Expr::int(8), Expr::int(1)),
        };
        assert!(matches!(
            stochastic_timer(&p),
            Err(TemplateError::NegativeSupport { .. })
        ));
        let p = TimerParams { dist: uniform_q(q_int(-1), q_int(1)) };
        assert!(stochastic_timer(&p).is_err());
    }

    #[test]
    fn switch_structure() {
        let t = stochastic_switch(&SwitchParams {
            dist1: uniform_q(q_int(10), q_int(20)),
            dist2: uniform_q(q_int(5), q_int(10)),
        })
        .unwrap();
        assert_clean(&t);
        assert_eq!(t.hawk.locations.len(), 2);
        let stochastic = t
            .hawk
            .edges
            .iter()
            .filter(|e| e.trigger == Trigger::Stochastic)
            .count();
        let receive = t.hawk.edges.iter().filter(|e| !e.receives.is_empty()).count();
        assert_eq!(stochastic, 2);
        assert_eq!(receive, 4);
        assert_eq!(t.hawk.init_vals["out"], Expr::var("in1"));
    }

    #[test]
    fn sampling_structure() {
        let t = stochastic_sampling(&SamplingParams {
            dist: uniform_q(q_int(10), q_int(20)),
        })
        .unwrap();
        assert_clean(&t);
        let stochastic = t
            .hawk
            .edges
            .iter()
            .filter(|e| e.trigger == Trigger::Stochastic)
            .count();
        assert_eq!(stochastic, 1);
        assert_eq!(t.hawk.locations.len(), 2);
        assert!(t.hawk.location("linit").unwrap().urgent);
        // out holds its value between samples
        assert!(t.hawk.piecewise_constant("out"));
    }

    #[test]
    fn noise_modes() {
        let c = stochastic_noise(&NoiseParams {
            mean: q_int(0),
            variance: q_int(1),
            rate: q_int(2),
            factor_mode: FactorMode::ConstantFactor(q_int(3)),
        })
        .unwrap();
        assert_clean(&c);
        let m = stochastic_noise(&NoiseParams {
            mean: q_int(0),
            variance: q_int(1),
            rate: q_int(2),
            factor_mode: FactorMode::InputMultiplier,
        })
        .unwrap();
        assert_clean(&m);
        // multiplier mode rewrites out with an in*noise product
        let apply = m
            .hawk
            .edges
            .iter()
            .find(|e| e.label == "apply")
            .unwrap();
        assert!(!apply.reset["out"].is_affine());
        assert!(stochastic_noise(&NoiseParams {
            mean: q_int(0),
            variance: q_int(1),
            rate: q_int(0),
            factor_mode: FactorMode::InputMultiplier,
        })
        .is_err());
    }

    #[test]
    fn discrete_aging_structure() {
        let t = discrete_aging(&DiscreteAgingParams {
            dist_fail: dirac_q(q_int(1)),
            dist_repair: dirac_q(q_int(2)),
            max_steps: 3,
            step: None,
            repair_mode: RepairMode::PercentOfInput(Q::new(1, 2)),
        })
        .unwrap();
        assert_clean(&t);
        // one fail edge per step plus the transition into repair
        let fails = t.hawk.edges.iter().filter(|e| e.label == "fail").count();
        assert_eq!(fails, 4);
        assert!(matches!(
            discrete_aging(&DiscreteAgingParams {
                dist_fail: dirac_q(q_int(1)),
                dist_repair: dirac_q(q_int(2)),
                max_steps: 0,
                step: None,
                repair_mode: RepairMode::ExplicitSignal,
            }),
            Err(TemplateError::ZeroSteps)
        ));
    }

    #[test]
    fn continuous_aging_structure() {
        let t = continuous_aging(&ContinuousAgingParams {
            dist_pause: Some(uniform_q(q_int(1), q_int(2))),
            dist_resume: Some(uniform_q(q_int(1), q_int(2))),
            dist_repair: dirac_q(q_int(5)),
            rate_a: Q::new(1, 10),
            bound: Q::new(1, 2),
            repair_mode: RepairMode::PercentOfInput(Q::new(1, 4)),
        })
        .unwrap();
        assert_clean(&t);
        assert_eq!(t.hawk.locations.len(), 3);
        let no_pause = continuous_aging(&ContinuousAgingParams {
            dist_pause: None,
            dist_resume: None,
            dist_repair: dirac_q(q_int(5)),
            rate_a: Q::new(1, 10),
            bound: Q::new(1, 2),
            repair_mode: RepairMode::PercentOfInput(Q::new(1, 4)),
        })
        .unwrap();
        assert_eq!(no_pause.hawk.locations.len(), 2);
        assert!(matches!(
            continuous_aging(&ContinuousAgingParams {
                dist_pause: None,
                dist_resume: None,
                dist_repair: dirac_q(q_int(5)),
                rate_a: q_int(0),
                bound: Q::new(1, 2),
                repair_mode: RepairMode::ExplicitSignal,
            }),
            Err(TemplateError::NonPositiveAgingRate { .. })
        ));
    }

    #[test]
    fn base_blocks() {
        for kind in [
            BaseBlock::Constant { value: q_int(3) },
            BaseBlock::Gain { gain: q_int(2) },
            BaseBlock::Sum,
            BaseBlock::Integrator { init: q_int(0) },
            BaseBlock::Relay {
                on: q_int(22),
                off: q_int(20),
                on_value: q_int(1),
                off_value: q_int(0),
                init_on: false,
            },
        ] {
            let t = base_block(&kind).unwrap();
            assert_clean(&t);
        }
        assert!(matches!(
            base_block(&BaseBlock::Relay {
                on: q_int(20),
                off: q_int(22),
                on_value: q_int(1),
                off_value: q_int(0),
                init_on: false,
            }),
            Err(TemplateError::InvertedRelayBand { .. })
        ));
    }

    #[test]
    fn constructors_are_deterministic() {
        let a = stochastic_switch(&SwitchParams {
            dist1: uniform_q(q_int(10), q_int(20)),
            dist2: uniform_q(q_int(5), q_int(10)),
        })
        .unwrap();
        let b = stochastic_switch(&SwitchParams {
            dist1: uniform_q(q_int(10), q_int(20)),
            dist2: uniform_q(q_int(5), q_int(10)),
        })
        .unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn instantiation_renames_ports_and_labels() {
        let t = stochastic_sampling(&SamplingParams {
            dist: uniform_q(q_int(10), q_int(20)),
        })
        .unwrap();
        let wiring = [("in".to_string(), "temp".to_string()), ("out".to_string(), "temp_s".to_string())]
            .into_iter()
            .collect();
        let inst = t.instantiate("sensor", &wiring);
        assert!(inst.hawk.variables.contains(&"temp".to_string()));
        assert!(inst.hawk.variables.contains(&"temp_s".to_string()));
        assert!(inst.hawk.delay_kernels.contains_key("sensor_sample"));
        assert!(inst.inputs.contains("temp"));
        assert_clean(&inst);
    }
}
