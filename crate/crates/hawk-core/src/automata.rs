//! Hybrid automata with stochastic kernels, and their template form.
//!
//! A [`Hawk`] is the closed analysis object: locations with affine flows
//! and invariants, labeled edges with deterministic resets, one delay
//! kernel per stochastic label and reset kernels per (label, variable).
//! A [`Template`] wraps a `Hawk` whose variable set is split into inputs
//! and outputs and whose edges may carry send/receive synchronization
//! marks; templates have no execution semantics until composed.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::expr::{Expr, FlowExpr, Predicate, Valuation};
use crate::feas;
use crate::kernels::Distribution;
use crate::num::q_to_f64;

/// How an edge fires.
///
/// Stochastic edges fire when their label's random clock reaches its
/// sampled expiration. Guard-crossing edges fire at the earliest instant
/// their guard becomes true under the current flow (the paper's implicit
/// Dirac delays resolved against the dynamics). Immediate edges fire as
/// soon as their guard holds, with zero delay.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Trigger {
    Stochastic,
    GuardCrossing,
    Immediate,
}

impl Trigger {
    pub fn text(self) -> &'static str {
        match self {
            Trigger::Stochastic => "stochastic",
            Trigger::GuardCrossing => "crossing",
            Trigger::Immediate => "immediate",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Location {
    pub name: String,
    pub urgent: bool,
    pub flows: BTreeMap<String, FlowExpr>,
    pub invariant: Predicate,
}

impl Location {
    pub fn new(name: &str) -> Self {
        Location {
            name: name.to_string(),
            urgent: false,
            flows: BTreeMap::new(),
            invariant: Predicate::top(),
        }
    }

    pub fn urgent(name: &str) -> Self {
        Location { urgent: true, ..Location::new(name) }
    }

    pub fn with_flow(mut self, var: &str, f: FlowExpr) -> Self {
        self.flows.insert(var.to_string(), f);
        self
    }

    pub fn with_invariant(mut self, p: Predicate) -> Self {
        self.invariant = p;
        self
    }

    pub fn flow_of(&self, var: &str) -> FlowExpr {
        self.flows.get(var).cloned().unwrap_or_else(FlowExpr::zero)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Edge {
    pub source: String,
    pub label: String,
    pub guard: Predicate,
    pub reset: BTreeMap<String, Expr>,
    pub target: String,
    pub trigger: Trigger,
    /// Variables whose discrete update this edge broadcasts.
    pub sends: BTreeSet<String>,
    /// Variables whose discrete update this edge consumes.
    pub receives: BTreeSet<String>,
}

impl Edge {
    pub fn new(source: &str, label: &str, target: &str, trigger: Trigger) -> Self {
        Edge {
            source: source.to_string(),
            label: label.to_string(),
            guard: Predicate::top(),
            reset: BTreeMap::new(),
            target: target.to_string(),
            trigger,
            sends: BTreeSet::new(),
            receives: BTreeSet::new(),
        }
    }

    pub fn with_guard(mut self, g: Predicate) -> Self {
        self.guard = g;
        self
    }

    pub fn with_reset(mut self, var: &str, e: Expr) -> Self {
        self.reset.insert(var.to_string(), e);
        self
    }

    pub fn sending(mut self, var: &str) -> Self {
        self.sends.insert(var.to_string());
        self
    }

    pub fn receiving(mut self, var: &str) -> Self {
        self.receives.insert(var.to_string());
        self
    }

    pub fn sync_vars(&self) -> BTreeSet<String> {
        self.sends.union(&self.receives).cloned().collect()
    }

    /// Simultaneous application of the deterministic reset map.
    pub fn apply_reset(&self, v: &Valuation) -> Valuation {
        let mut out = v.clone();
        for (var, e) in &self.reset {
            out.insert(var.clone(), e.eval(v));
        }
        out
    }

    /// Stable identity used for sorting and for deterministic tie-breaking.
    pub fn sort_key(&self) -> (String, String, String, String, String) {
        let reset = self
            .reset
            .iter()
            .map(|(v, e)| format!("{v}:={e}"))
            .collect::<Vec<_>>()
            .join(",");
        (
            self.source.clone(),
            self.label.clone(),
            self.target.clone(),
            self.guard.to_string(),
            reset,
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Hawk {
    pub name: String,
    pub variables: Vec<String>,
    pub locations: Vec<Location>,
    pub edges: Vec<Edge>,
    pub init_location: String,
    /// Initial values; expressions so templates can initialize outputs
    /// from inputs. Closed automata must resolve these to constants.
    pub init_vals: BTreeMap<String, Expr>,
    pub init_cond: Predicate,
    /// label -> delay kernel, for stochastic labels only.
    pub delay_kernels: BTreeMap<String, Distribution>,
    /// (label, variable) -> reset kernel; absent entries mean the
    /// identity Dirac.
    pub reset_kernels: BTreeMap<(String, String), Distribution>,
}

impl Hawk {
    pub fn new(name: &str) -> Self {
        Hawk {
            name: name.to_string(),
            variables: Vec::new(),
            locations: Vec::new(),
            edges: Vec::new(),
            init_location: String::new(),
            init_vals: BTreeMap::new(),
            init_cond: Predicate::top(),
            delay_kernels: BTreeMap::new(),
            reset_kernels: BTreeMap::new(),
        }
    }

    pub fn canonicalize(&mut self) {
        self.variables.sort();
        self.variables.dedup();
        self.locations.sort_by(|a, b| a.name.cmp(&b.name));
        for l in &mut self.locations {
            l.invariant.canonicalize();
        }
        self.edges.sort_by_key(|e| e.sort_key());
        for e in &mut self.edges {
            e.guard.canonicalize();
        }
    }

    pub fn location(&self, name: &str) -> Option<&Location> {
        self.locations.iter().find(|l| l.name == name)
    }

    pub fn location_index(&self, name: &str) -> Option<usize> {
        self.locations.iter().position(|l| l.name == name)
    }

    /// All labels, in sorted order.
    pub fn labels(&self) -> BTreeSet<String> {
        self.edges.iter().map(|e| e.label.clone()).collect()
    }

    /// Labels carried by stochastic-trigger edges.
    pub fn stochastic_labels(&self) -> BTreeSet<String> {
        self.edges
            .iter()
            .filter(|e| e.trigger == Trigger::Stochastic)
            .map(|e| e.label.clone())
            .collect()
    }

    pub fn edges_from<'a>(&'a self, loc: &'a str) -> impl Iterator<Item = (usize, &'a Edge)> + 'a {
        self.edges
            .iter()
            .enumerate()
            .filter(move |(_, e)| e.source == loc)
    }

    /// Initial valuation, requiring constant init expressions.
    pub fn init_valuation(&self) -> Result<Valuation, String> {
        let mut out = Valuation::new();
        for var in &self.variables {
            match self.init_vals.get(var) {
                None => return Err(format!("variable {var} has no initial value")),
                Some(e) => match e.as_constant() {
                    Some(q) => {
                        out.insert(var.clone(), q_to_f64(q));
                    }
                    None => {
                        return Err(format!(
                            "initial value of {var} is not constant: {e}"
                        ))
                    }
                },
            }
        }
        Ok(out)
    }

    /// Edges enabled at `(loc, v)`: source matches, guard holds, and the
    /// target invariant admits the deterministic reset image.
    pub fn enabled_edges(&self, loc: &str, v: &Valuation, tol: f64) -> Vec<usize> {
        self.edges_from(loc)
            .filter(|(_, e)| e.guard.holds(v, tol))
            .filter(|(_, e)| {
                let post = e.apply_reset(v);
                self.location(&e.target)
                    .map(|t| t.invariant.holds(&post, tol))
                    .unwrap_or(false)
            })
            .map(|(i, _)| i)
            .collect()
    }

    /// Random-clock rates: 1 for labels with at least one enabled edge.
    pub fn random_clock_rates(&self, loc: &str, v: &Valuation, tol: f64) -> BTreeMap<String, bool> {
        let enabled = self.enabled_edges(loc, v, tol);
        let mut out: BTreeMap<String, bool> =
            self.labels().into_iter().map(|l| (l, false)).collect();
        for i in enabled {
            out.insert(self.edges[i].label.clone(), true);
        }
        out
    }

    /// Numeric rate of every variable in a location, resolving rate terms
    /// transitively. Fails on cyclic rate references (validation rejects
    /// those up front).
    pub fn resolve_rates(&self, loc: &Location, v: &Valuation) -> Result<BTreeMap<String, f64>, String> {
        #[derive(Clone, Copy, PartialEq)]
        enum Mark {
            Busy,
            Done(f64),
        }
        fn rate_of(
            loc: &Location,
            var: &str,
            v: &Valuation,
            marks: &mut BTreeMap<String, Mark>,
        ) -> Result<f64, String> {
            match marks.get(var) {
                Some(Mark::Done(r)) => return Ok(*r),
                Some(Mark::Busy) => {
                    return Err(format!("cyclic rate reference through {var} in {}", loc.name))
                }
                None => {}
            }
            marks.insert(var.to_string(), Mark::Busy);
            let f = loc.flow_of(var);
            let mut acc = q_to_f64(f.constant);
            for (x, c) in &f.value_terms {
                acc += q_to_f64(*c) * v.get(x).copied().unwrap_or(0.0);
            }
            for (y, c) in &f.rate_terms {
                acc += q_to_f64(*c) * rate_of(loc, y, v, marks)?;
            }
            for ((y, z), c) in &f.rate_value_terms {
                acc += q_to_f64(*c)
                    * rate_of(loc, y, v, marks)?
                    * v.get(z).copied().unwrap_or(0.0);
            }
            marks.insert(var.to_string(), Mark::Done(acc));
            Ok(acc)
        }
        let mut marks = BTreeMap::new();
        let mut out = BTreeMap::new();
        for var in &self.variables {
            out.insert(var.clone(), rate_of(loc, var, v, &mut marks)?);
        }
        Ok(out)
    }

    /// Whether a variable's flow is identically zero in every location.
    pub fn piecewise_constant(&self, var: &str) -> bool {
        self.locations.iter().all(|l| l.flow_of(var).is_zero())
    }

    /// Structural validation; every finding is reported, nothing throws.
    pub fn validate(&self) -> ValidationReport {
        let mut report = ValidationReport::default();
        let vars: BTreeSet<&String> = self.variables.iter().collect();
        let locs: BTreeSet<&String> = self.locations.iter().map(|l| &l.name).collect();

        if self.location(&self.init_location).is_none() {
            report.push(Issue::UnknownInitLocation { name: self.init_location.clone() });
        }

        // variable references
        let check_vars = |what: String, used: BTreeSet<String>, report: &mut ValidationReport| {
            for u in used {
                if !vars.contains(&u) {
                    report.push(Issue::UnknownVariable { var: u, context: what.clone() });
                }
            }
        };
        for l in &self.locations {
            check_vars(format!("invariant of {}", l.name), l.invariant.vars(), &mut report);
            if !l.invariant.is_affine() {
                report.push(Issue::NonAffinePredicate { context: format!("invariant of {}", l.name) });
            }
            for (v, f) in &l.flows {
                if !vars.contains(v) {
                    report.push(Issue::UnknownVariable {
                        var: v.clone(),
                        context: format!("flow in {}", l.name),
                    });
                }
                let mut used = f.value_vars();
                used.extend(f.rate_vars());
                check_vars(format!("flow of {v} in {}", l.name), used, &mut report);
            }
        }
        for e in &self.edges {
            let ctx = format!("edge {} -> {} [{}]", e.source, e.target, e.label);
            if !locs.contains(&e.source) {
                report.push(Issue::UnknownLocation { name: e.source.clone(), context: ctx.clone() });
            }
            if !locs.contains(&e.target) {
                report.push(Issue::UnknownLocation { name: e.target.clone(), context: ctx.clone() });
            }
            check_vars(format!("guard of {ctx}"), e.guard.vars(), &mut report);
            if !e.guard.is_affine() {
                report.push(Issue::NonAffinePredicate { context: format!("guard of {ctx}") });
            }
            for (v, rhs) in &e.reset {
                if !vars.contains(v) {
                    report.push(Issue::UnknownVariable { var: v.clone(), context: format!("reset of {ctx}") });
                }
                check_vars(format!("reset of {ctx}"), rhs.vars(), &mut report);
            }
            if e.trigger == Trigger::GuardCrossing && e.guard.is_top() {
                report.push(Issue::CrossingWithoutGuard { context: ctx.clone() });
            }
            if !e.sends.is_empty() || !e.receives.is_empty() {
                report.push(Issue::ResidualSync { context: ctx, vars: e.sync_vars() });
            }
        }

        // trigger consistency and kernel totality per label
        let mut label_triggers: BTreeMap<&String, BTreeSet<Trigger>> = BTreeMap::new();
        for e in &self.edges {
            label_triggers.entry(&e.label).or_default().insert(e.trigger);
        }
        for (label, triggers) in &label_triggers {
            if triggers.len() > 1 {
                report.push(Issue::MixedTriggers { label: (*label).clone() });
            }
            let stochastic = triggers.contains(&Trigger::Stochastic);
            let kernel = self.delay_kernels.get(*label);
            match (stochastic, kernel) {
                (true, None) => report.push(Issue::MissingDelayKernel { label: (*label).clone() }),
                (true, Some(k)) => {
                    if !k.nonnegative_support() {
                        report.push(Issue::NegativeSupportDelay {
                            label: (*label).clone(),
                            kernel: k.to_string(),
                        });
                    }
                    if !k.params_affine() {
                        report.push(Issue::NonAffinePredicate {
                            context: format!("delay kernel of {label}"),
                        });
                    }
                }
                (false, Some(_)) => {
                    report.push(Issue::SpuriousDelayKernel { label: (*label).clone() })
                }
                (false, None) => {}
            }
        }
        for label in self.delay_kernels.keys() {
            if !label_triggers.contains_key(label) {
                report.push(Issue::SpuriousDelayKernel { label: label.clone() });
            }
        }
        for ((label, var), k) in &self.reset_kernels {
            if !label_triggers.contains_key(label) {
                report.push(Issue::UnknownLabelKernel { label: label.clone() });
            }
            if !vars.contains(var) {
                report.push(Issue::UnknownVariable {
                    var: var.clone(),
                    context: format!("reset kernel of label {label}"),
                });
            }
            if !k.params_affine() {
                report.push(Issue::NonAffinePredicate {
                    context: format!("reset kernel of ({label}, {var})"),
                });
            }
        }

        // guard disjointness per (source, label)
        let mut groups: BTreeMap<(&String, &String), Vec<&Edge>> = BTreeMap::new();
        for e in &self.edges {
            groups.entry((&e.source, &e.label)).or_default().push(e);
        }
        for ((loc, label), group) in groups {
            for i in 0..group.len() {
                for j in i + 1..group.len() {
                    if group[i].guard.is_affine()
                        && group[j].guard.is_affine()
                        && !feas::predicates_disjoint(&group[i].guard, &group[j].guard)
                    {
                        report.push(Issue::GuardOverlap {
                            location: loc.clone(),
                            label: label.clone(),
                        });
                    }
                }
            }
        }

        // piecewise-constant rule and rate cycles
        for l in &self.locations {
            for (v, f) in &l.flows {
                for x in f.value_vars() {
                    if !self.piecewise_constant(&x) {
                        report.push(Issue::FlowNotPiecewiseConstant {
                            location: l.name.clone(),
                            var: v.clone(),
                            referenced: x,
                        });
                    }
                }
            }
            let probe: Valuation =
                self.variables.iter().map(|v| (v.clone(), 0.0)).collect();
            if let Err(msg) = self.resolve_rates(l, &probe) {
                report.push(Issue::FlowRateCycle { detail: msg });
            }
        }

        // urgent locations must be exitable
        for l in &self.locations {
            if l.urgent && !self.edges.iter().any(|e| e.source == l.name) {
                report.push(Issue::UrgentWithoutExit { location: l.name.clone() });
            }
        }

        // initial state
        for var in &self.variables {
            if !self.init_vals.contains_key(var) {
                report.push(Issue::MissingInit { var: var.clone() });
            }
        }
        match self.init_valuation() {
            Err(msg) => report.push(Issue::UnresolvedInit { detail: msg }),
            Ok(v) => {
                if let Some(l) = self.location(&self.init_location) {
                    if !l.invariant.holds(&v, 1e-9) {
                        report.push(Issue::InitViolatesInvariant {
                            location: l.name.clone(),
                        });
                    }
                }
                if !self.init_cond.holds(&v, 1e-9) {
                    report.push(Issue::InitViolatesCondition);
                }
            }
        }

        report
    }

    /// Renames locations to `q0..qN` in BFS order from the initial
    /// location (edges visited in canonical order), giving a normal form
    /// that is invariant under location renaming.
    pub fn canonical_form(&self) -> Hawk {
        let mut order: Vec<String> = Vec::new();
        let mut seen: BTreeSet<String> = BTreeSet::new();
        let mut queue = std::collections::VecDeque::new();
        let mut sorted = self.clone();
        sorted.canonicalize();
        queue.push_back(sorted.init_location.clone());
        seen.insert(sorted.init_location.clone());
        while let Some(loc) = queue.pop_front() {
            order.push(loc.clone());
            for e in sorted.edges.iter() {
                if e.source == loc && !seen.contains(&e.target) {
                    seen.insert(e.target.clone());
                    queue.push_back(e.target.clone());
                }
            }
        }
        // unreachable locations keep a stable order after the reachable ones
        for l in &sorted.locations {
            if !seen.contains(&l.name) {
                order.push(l.name.clone());
            }
        }
        let rename: BTreeMap<String, String> = order
            .iter()
            .enumerate()
            .map(|(i, name)| (name.clone(), format!("q{i}")))
            .collect();
        let mut out = sorted.rename_locations(&rename);
        out.canonicalize();
        out
    }

    pub fn rename_locations(&self, map: &BTreeMap<String, String>) -> Hawk {
        let ren = |n: &String| map.get(n).cloned().unwrap_or_else(|| n.clone());
        let mut out = self.clone();
        for l in &mut out.locations {
            l.name = ren(&l.name);
        }
        for e in &mut out.edges {
            e.source = ren(&e.source);
            e.target = ren(&e.target);
        }
        out.init_location = ren(&out.init_location);
        out
    }

    /// Renames variables everywhere (flows, guards, resets, kernels,
    /// init) and prefixes labels; used when instantiating templates.
    pub fn rename_vars_and_labels(
        &self,
        var_map: &BTreeMap<String, String>,
        label_map: &BTreeMap<String, String>,
    ) -> Hawk {
        let renv = |n: &String| var_map.get(n).cloned().unwrap_or_else(|| n.clone());
        let renl = |n: &String| label_map.get(n).cloned().unwrap_or_else(|| n.clone());
        let mut out = Hawk::new(&self.name);
        out.variables = self.variables.iter().map(renv).collect();
        out.init_location = self.init_location.clone();
        out.init_cond = self.init_cond.rename_vars(var_map);
        for (v, e) in &self.init_vals {
            out.init_vals.insert(renv(v), e.rename_vars(var_map));
        }
        for l in &self.locations {
            let mut nl = Location::new(&l.name);
            nl.urgent = l.urgent;
            nl.invariant = l.invariant.rename_vars(var_map);
            for (v, f) in &l.flows {
                nl.flows.insert(renv(v), f.rename_vars(var_map));
            }
            out.locations.push(nl);
        }
        for e in &self.edges {
            let mut ne = Edge::new(&e.source, &renl(&e.label), &e.target, e.trigger);
            ne.guard = e.guard.rename_vars(var_map);
            for (v, rhs) in &e.reset {
                ne.reset.insert(renv(v), rhs.rename_vars(var_map));
            }
            ne.sends = e.sends.iter().map(renv).collect();
            ne.receives = e.receives.iter().map(renv).collect();
            out.edges.push(ne);
        }
        for (label, k) in &self.delay_kernels {
            out.delay_kernels.insert(renl(label), k.rename_vars(var_map));
        }
        for ((label, var), k) in &self.reset_kernels {
            out.reset_kernels
                .insert((renl(label), renv(var)), k.rename_vars(var_map));
        }
        out.canonicalize();
        out
    }
}

/// A `Hawk` with an input/output variable split and synchronization
/// marks; the unit of composition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Template {
    pub hawk: Hawk,
    pub inputs: BTreeSet<String>,
}

impl Template {
    pub fn new(hawk: Hawk, inputs: BTreeSet<String>) -> Self {
        Template { hawk, inputs }
    }

    pub fn outputs(&self) -> BTreeSet<String> {
        self.hawk
            .variables
            .iter()
            .filter(|v| !self.inputs.contains(*v))
            .cloned()
            .collect()
    }

    /// Template-level validation: flows/inits only for outputs, kernels
    /// only where permitted, receiving edges without delay kernels.
    pub fn validate(&self) -> ValidationReport {
        let mut report = ValidationReport::default();
        for input in &self.inputs {
            if !self.hawk.variables.contains(input) {
                report.push(Issue::UnknownVariable {
                    var: input.clone(),
                    context: "declared input".into(),
                });
            }
            if self.hawk.init_vals.contains_key(input) {
                report.push(Issue::InputHasInit { var: input.clone() });
            }
            for l in &self.hawk.locations {
                if l.flows.contains_key(input) {
                    report.push(Issue::InputHasFlow {
                        var: input.clone(),
                        location: l.name.clone(),
                    });
                }
            }
        }
        let outputs = self.outputs();
        for out in &outputs {
            if !self.hawk.init_vals.contains_key(out) {
                report.push(Issue::MissingInit { var: out.clone() });
            }
        }
        for e in &self.hawk.edges {
            if !e.receives.is_empty() && self.hawk.delay_kernels.contains_key(&e.label) {
                report.push(Issue::ReceivingEdgeWithKernel { label: e.label.clone() });
            }
            for s in &e.sends {
                if !outputs.contains(s) {
                    report.push(Issue::SendsNonOutput { var: s.clone() });
                }
            }
            for r in &e.receives {
                if !self.inputs.contains(r) {
                    report.push(Issue::ReceivesNonInput { var: r.clone() });
                }
            }
        }
        for ((_, var), _) in &self.hawk.reset_kernels {
            if !outputs.contains(var) {
                report.push(Issue::ResetKernelOnNonOutput { var: var.clone() });
            }
        }
        report
    }

    /// Instantiates the template: outputs and inputs renamed per the
    /// wiring, internal variables and labels prefixed with the instance
    /// name for global uniqueness.
    pub fn instantiate(&self, instance: &str, wiring: &BTreeMap<String, String>) -> Template {
        let mut var_map = BTreeMap::new();
        for v in &self.hawk.variables {
            let new = wiring
                .get(v)
                .cloned()
                .unwrap_or_else(|| format!("{instance}_{v}"));
            var_map.insert(v.clone(), new);
        }
        let mut label_map = BTreeMap::new();
        for l in self.hawk.labels() {
            label_map.insert(l.clone(), format!("{instance}_{l}"));
        }
        let mut hawk = self.hawk.rename_vars_and_labels(&var_map, &label_map);
        hawk.name = instance.to_string();
        let inputs = self.inputs.iter().map(|v| var_map[v].clone()).collect();
        Template { hawk, inputs }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Issue {
    GuardOverlap { location: String, label: String },
    MissingDelayKernel { label: String },
    SpuriousDelayKernel { label: String },
    NegativeSupportDelay { label: String, kernel: String },
    MixedTriggers { label: String },
    FlowNotPiecewiseConstant { location: String, var: String, referenced: String },
    FlowRateCycle { detail: String },
    ResidualSync { context: String, vars: BTreeSet<String> },
    UrgentWithoutExit { location: String },
    CrossingWithoutGuard { context: String },
    UnknownVariable { var: String, context: String },
    UnknownLocation { name: String, context: String },
    UnknownInitLocation { name: String },
    UnknownLabelKernel { label: String },
    NonAffinePredicate { context: String },
    MissingInit { var: String },
    UnresolvedInit { detail: String },
    InitViolatesInvariant { location: String },
    InitViolatesCondition,
    InputHasInit { var: String },
    InputHasFlow { var: String, location: String },
    ReceivingEdgeWithKernel { label: String },
    SendsNonOutput { var: String },
    ReceivesNonInput { var: String },
    ResetKernelOnNonOutput { var: String },
}

impl fmt::Display for Issue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Issue::GuardOverlap { location, label } => {
                write!(f, "overlapping guards at ({location}, {label})")
            }
            Issue::MissingDelayKernel { label } => {
                write!(f, "stochastic label {label} has no delay kernel")
            }
            Issue::SpuriousDelayKernel { label } => {
                write!(f, "delay kernel on non-stochastic label {label}")
            }
            Issue::NegativeSupportDelay { label, kernel } => write!(
                f,
                "delay kernel of {label} may produce negative delays: {kernel}"
            ),
            Issue::MixedTriggers { label } => {
                write!(f, "label {label} mixes trigger kinds")
            }
            Issue::FlowNotPiecewiseConstant { location, var, referenced } => write!(
                f,
                "flow of {var} in {location} reads {referenced}, which is not piecewise-constant"
            ),
            Issue::FlowRateCycle { detail } => write!(f, "{detail}"),
            Issue::ResidualSync { context, vars } => write!(
                f,
                "unresolved synchronization {:?} on {context}",
                vars.iter().cloned().collect::<Vec<_>>()
            ),
            Issue::UrgentWithoutExit { location } => {
                write!(f, "urgent location {location} has no outgoing edge")
            }
            Issue::CrossingWithoutGuard { context } => {
                write!(f, "guard-crossing edge with trivial guard: {context}")
            }
            Issue::UnknownVariable { var, context } => {
                write!(f, "unknown variable {var} in {context}")
            }
            Issue::UnknownLocation { name, context } => {
                write!(f, "unknown location {name} in {context}")
            }
            Issue::UnknownInitLocation { name } => {
                write!(f, "initial location {name} does not exist")
            }
            Issue::UnknownLabelKernel { label } => {
                write!(f, "reset kernel references unknown label {label}")
            }
            Issue::NonAffinePredicate { context } => {
                write!(f, "non-affine expression where affine required: {context}")
            }
            Issue::MissingInit { var } => write!(f, "variable {var} has no initial value"),
            Issue::UnresolvedInit { detail } => write!(f, "{detail}"),
            Issue::InitViolatesInvariant { location } => {
                write!(f, "initial valuation violates invariant of {location}")
            }
            Issue::InitViolatesCondition => write!(f, "initial valuation violates init condition"),
            Issue::InputHasInit { var } => write!(f, "input variable {var} carries an init value"),
            Issue::InputHasFlow { var, location } => {
                write!(f, "input variable {var} carries a flow in {location}")
            }
            Issue::ReceivingEdgeWithKernel { label } => {
                write!(f, "receiving edge label {label} carries a delay kernel")
            }
            Issue::SendsNonOutput { var } => write!(f, "edge sends non-output variable {var}"),
            Issue::ReceivesNonInput { var } => write!(f, "edge receives non-input variable {var}"),
            Issue::ResetKernelOnNonOutput { var } => {
                write!(f, "reset kernel assigned to non-output variable {var}")
            }
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub issues: Vec<Issue>,
}

impl ValidationReport {
    pub fn push(&mut self, issue: Issue) {
        if !self.issues.contains(&issue) {
            self.issues.push(issue);
        }
    }

    pub fn is_empty(&self) -> bool {
        self.issues.is_empty()
    }

    pub fn into_result(self) -> Result<(), ValidationReport> {
        if self.is_empty() {
            Ok(())
        } else {
            Err(self)
        }
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.issues.is_empty() {
            return write!(f, "ok");
        }
        for (i, issue) in self.issues.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{issue}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ValidationReport {}
