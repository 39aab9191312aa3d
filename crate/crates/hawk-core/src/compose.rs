//! Parallel composition of templates into a monolithic automaton.
//!
//! Composition resolves one synchronization mapping at a time. A mapping
//! `(name, snd, rcv)` identifies the sending template's output `name`
//! with the receivers' equally-named inputs. Edges not marked with `name`
//! cross into the product unchanged (all other components hold their
//! location); edges marked with `name` only exist in the product as full
//! synchronized combinations: one sending edge plus one receiving edge
//! per receiver, guards conjoined, receiver resets and guards rewritten
//! with the sender's assigned expression for `name`, the delay kernel and
//! trigger taken from the sending edge, and reset kernels of all
//! participating edges merged under the product edge's label.
//!
//! Variable reads of a continuously evolving signal need no
//! synchronization at all: after identification the signal is an ordinary
//! product variable. The send/receive machinery only propagates discrete
//! updates.

use std::collections::{BTreeMap, BTreeSet};

use crate::automata::{Edge, Hawk, Location, Template, Trigger, ValidationReport};
use crate::expr::Expr;
use crate::kernels::Distribution;

/// One signal identification: output `name` of `snd` feeds the
/// equally-named input of every template in `rcv`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SyncMapping {
    pub name: String,
    pub snd: String,
    pub rcv: BTreeSet<String>,
}

#[derive(Debug, Clone)]
pub struct CompositionPlan {
    pub templates: Vec<Template>,
    pub mappings: Vec<SyncMapping>,
}

#[derive(Debug, thiserror::Error)]
pub enum ComposeError {
    #[error("duplicate template name {0}")]
    DuplicateTemplate(String),
    #[error("output variable {var} provided by templates {a} and {b}")]
    NameCollision { var: String, a: String, b: String },
    #[error("mapping {name}: template {template} not in plan")]
    UnknownTemplate { name: String, template: String },
    #[error("mapping {name}: {snd} does not own output {name}")]
    SenderLacksOutput { name: String, snd: String },
    #[error("mapping {name}: sender cannot also receive")]
    SenderReceives { name: String },
    #[error("mapping {name}: {rcv} has no input {name}")]
    ReceiverLacksInput { name: String, rcv: String },
    #[error("input {input} of template {template} is not driven by any mapping")]
    InputNotCovered { template: String, input: String },
    #[error("input {input} of template {template} is driven by mappings {a} and {b}")]
    InputDoublyCovered { template: String, input: String, a: String, b: String },
    #[error(
        "mapping {name}: receiver {receiver} cannot receive in location {receiver_loc} \
         while the sender may send from {sender_loc}"
    )]
    UnresolvableMapping {
        name: String,
        sender_loc: String,
        receiver: String,
        receiver_loc: String,
    },
    #[error("synchronized edge resets {var} in more than one component")]
    ResetCollision { var: String },
    #[error("reset kernel collision at ({label}, {var})")]
    KernelCollision { label: String, var: String },
    #[error("initial values are cyclic; unresolved: {vars:?}")]
    CyclicInit { vars: Vec<String> },
    #[error("composed automaton keeps unbound inputs: {inputs:?}")]
    UnboundInputs { inputs: Vec<String> },
    #[error("residual receive marks after resolution: {context}")]
    ResidualReceive { context: String },
    #[error(transparent)]
    Degree(#[from] crate::expr::DegreeError),
    #[error("composed automaton is invalid:\n{0}")]
    Invalid(ValidationReport),
}

impl CompositionPlan {
    pub fn validate(&self) -> Result<(), ComposeError> {
        let mut names: BTreeSet<&str> = BTreeSet::new();
        for t in &self.templates {
            if !names.insert(&t.hawk.name) {
                return Err(ComposeError::DuplicateTemplate(t.hawk.name.clone()));
            }
        }
        let mut owners: BTreeMap<String, String> = BTreeMap::new();
        for t in &self.templates {
            for out in t.outputs() {
                if let Some(prev) = owners.insert(out.clone(), t.hawk.name.clone()) {
                    return Err(ComposeError::NameCollision {
                        var: out,
                        a: prev,
                        b: t.hawk.name.clone(),
                    });
                }
            }
        }
        let by_name = |name: &str| self.templates.iter().find(|t| t.hawk.name == name);
        let mut covered: BTreeMap<(String, String), String> = BTreeMap::new();
        for m in &self.mappings {
            let snd = by_name(&m.snd).ok_or_else(|| ComposeError::UnknownTemplate {
                name: m.name.clone(),
                template: m.snd.clone(),
            })?;
            if !snd.outputs().contains(&m.name) {
                return Err(ComposeError::SenderLacksOutput {
                    name: m.name.clone(),
                    snd: m.snd.clone(),
                });
            }
            if m.rcv.contains(&m.snd) {
                return Err(ComposeError::SenderReceives { name: m.name.clone() });
            }
            for r in &m.rcv {
                let rt = by_name(r).ok_or_else(|| ComposeError::UnknownTemplate {
                    name: m.name.clone(),
                    template: r.clone(),
                })?;
                if !rt.inputs.contains(&m.name) {
                    return Err(ComposeError::ReceiverLacksInput {
                        name: m.name.clone(),
                        rcv: r.clone(),
                    });
                }
                if let Some(prev) =
                    covered.insert((r.clone(), m.name.clone()), m.name.clone())
                {
                    return Err(ComposeError::InputDoublyCovered {
                        template: r.clone(),
                        input: m.name.clone(),
                        a: prev,
                        b: m.name.clone(),
                    });
                }
            }
        }
        for t in &self.templates {
            for input in &t.inputs {
                if !covered.contains_key(&(t.hawk.name.clone(), input.clone())) {
                    return Err(ComposeError::InputNotCovered {
                        template: t.hawk.name.clone(),
                        input: input.clone(),
                    });
                }
            }
        }
        Ok(())
    }

    /// Resolves all mappings in order and closes the product.
    pub fn resolve(&self, prune: bool) -> Result<Hawk, ComposeError> {
        self.validate()?;
        let mut included: BTreeSet<String> = BTreeSet::new();
        let mut intermediate: Option<Template> = None;
        for m in &self.mappings {
            let mut comp_names: BTreeSet<String> = m.rcv.clone();
            comp_names.insert(m.snd.clone());
            let new: Vec<Template> = self
                .templates
                .iter()
                .filter(|t| comp_names.contains(&t.hawk.name) && !included.contains(&t.hawk.name))
                .cloned()
                .collect();
            for t in &new {
                included.insert(t.hawk.name.clone());
            }
            intermediate = Some(compose_step(intermediate.as_ref(), &new, Some(m))?);
        }
        // templates untouched by any mapping still join the product
        let leftovers: Vec<Template> = self
            .templates
            .iter()
            .filter(|t| !included.contains(&t.hawk.name))
            .cloned()
            .collect();
        if !leftovers.is_empty() {
            intermediate = Some(compose_step(intermediate.as_ref(), &leftovers, None)?);
        }
        let product = intermediate.expect("plan has at least one template");
        finalize(product, prune)
    }
}

fn join_names(parts: &[&str]) -> String {
    parts.join("|")
}

/// One composition step: the product of `intermediate` and
/// `new_templates`, synchronizing on `mapping` when given.
pub fn compose_step(
    intermediate: Option<&Template>,
    new_templates: &[Template],
    mapping: Option<&SyncMapping>,
) -> Result<Template, ComposeError> {
    let mut components: Vec<&Template> = Vec::new();
    components.extend(intermediate);
    components.extend(new_templates.iter());
    assert!(!components.is_empty(), "composition step needs a component");
    if components.len() == 1 && mapping.is_none() {
        return Ok(components[0].clone());
    }

    let name = components
        .iter()
        .map(|t| t.hawk.name.as_str())
        .collect::<Vec<_>>()
        .join("+");

    let mut product = Hawk::new(&name);
    for c in &components {
        for v in &c.hawk.variables {
            if !product.variables.contains(v) {
                product.variables.push(v.clone());
            }
        }
        for (label, k) in &c.hawk.delay_kernels {
            product.delay_kernels.insert(label.clone(), k.clone());
        }
        for (key, k) in &c.hawk.reset_kernels {
            product.reset_kernels.insert(key.clone(), k.clone());
        }
        product.init_cond = product.init_cond.and(&c.hawk.init_cond);
        for (v, e) in &c.hawk.init_vals {
            product.init_vals.insert(v.clone(), e.clone());
        }
    }

    // cartesian product of location tuples
    let sizes: Vec<usize> = components.iter().map(|c| c.hawk.locations.len()).collect();
    let mut combos: Vec<Vec<usize>> = vec![Vec::new()];
    for &n in &sizes {
        combos = combos
            .into_iter()
            .flat_map(|base| {
                (0..n).map(move |i| {
                    let mut next = base.clone();
                    next.push(i);
                    next
                })
            })
            .collect();
    }
    let combo_name = |combo: &[usize]| {
        let parts: Vec<&str> = combo
            .iter()
            .zip(components.iter())
            .map(|(&i, c)| c.hawk.locations[i].name.as_str())
            .collect();
        join_names(&parts)
    };
    for combo in &combos {
        let mut loc = Location::new(&combo_name(combo));
        for (&i, c) in combo.iter().zip(components.iter()) {
            let cl = &c.hawk.locations[i];
            loc.urgent |= cl.urgent;
            loc.invariant = loc.invariant.and(&cl.invariant);
            for (v, f) in &cl.flows {
                loc.flows.insert(v.clone(), f.clone());
            }
        }
        product.locations.push(loc);
    }

    // non-synchronized edges
    for (ci, c) in components.iter().enumerate() {
        for e in &c.hawk.edges {
            if let Some(m) = mapping {
                if e.sync_vars().contains(&m.name) {
                    continue;
                }
            }
            let src_idx = c.hawk.location_index(&e.source).expect("edge source");
            let tgt_idx = c.hawk.location_index(&e.target).expect("edge target");
            for combo in &combos {
                if combo[ci] != src_idx {
                    continue;
                }
                let mut tgt = combo.clone();
                tgt[ci] = tgt_idx;
                let mut ne = e.clone();
                ne.source = combo_name(combo);
                ne.target = combo_name(&tgt);
                product.edges.push(ne);
            }
        }
    }

    // synchronized edges
    if let Some(m) = mapping {
        let sender_idx = components
            .iter()
            .position(|c| c.outputs().contains(&m.name))
            .expect("plan validation places the sender");
        let receiver_idx: Vec<usize> = components
            .iter()
            .enumerate()
            .filter(|(i, c)| *i != sender_idx && c.inputs.contains(&m.name))
            .map(|(i, _)| i)
            .collect();
        let sender = components[sender_idx];
        for combo in &combos {
            let sloc = &sender.hawk.locations[combo[sender_idx]];
            let sending: Vec<&Edge> = sender
                .hawk
                .edges
                .iter()
                .filter(|e| e.source == sloc.name && e.sends.contains(&m.name))
                .collect();
            if sending.is_empty() {
                continue;
            }
            // every receiver must be able to take the update here
            let mut receiver_choices: Vec<(usize, Vec<&Edge>)> = Vec::new();
            for &ri in &receiver_idx {
                let rc = components[ri];
                let rloc = &rc.hawk.locations[combo[ri]];
                let choices: Vec<&Edge> = rc
                    .hawk
                    .edges
                    .iter()
                    .filter(|e| e.source == rloc.name && e.receives.contains(&m.name))
                    .collect();
                if choices.is_empty() {
                    return Err(ComposeError::UnresolvableMapping {
                        name: m.name.clone(),
                        sender_loc: sloc.name.clone(),
                        receiver: rc.hawk.name.clone(),
                        receiver_loc: rloc.name.clone(),
                    });
                }
                receiver_choices.push((ri, choices));
            }
            for se in &sending {
                // the expression the sender assigns to the signal; when the
                // sending edge does not rewrite it, the old value stands
                let assigned = se
                    .reset
                    .get(&m.name)
                    .cloned()
                    .unwrap_or_else(|| Expr::var(&m.name));
                let mut selections: Vec<Vec<(usize, &Edge)>> = vec![Vec::new()];
                for (ri, choices) in &receiver_choices {
                    selections = selections
                        .into_iter()
                        .flat_map(|base| {
                            choices.iter().map(move |e| {
                                let mut next = base.clone();
                                next.push((*ri, *e));
                                next
                            })
                        })
                        .collect();
                }
                for selection in selections {
                    let mut tgt = combo.clone();
                    tgt[sender_idx] = sender
                        .hawk
                        .location_index(&se.target)
                        .expect("sender edge target");
                    let mut guard = se.guard.clone();
                    let mut reset = se.reset.clone();
                    let mut sends = se.sends.clone();
                    let mut receives = se.receives.clone();
                    let mut kernel_adds: Vec<((String, String), Distribution)> = Vec::new();
                    for (ri, re) in &selection {
                        let rc = components[*ri];
                        tgt[*ri] = rc.hawk.location_index(&re.target).expect("edge target");
                        guard = guard.and(&re.guard.substitute(&m.name, &assigned)?);
                        for (var, rhs) in &re.reset {
                            let rhs = rhs.substitute(&m.name, &assigned)?;
                            if reset.insert(var.clone(), rhs).is_some() {
                                return Err(ComposeError::ResetCollision { var: var.clone() });
                            }
                        }
                        sends.extend(re.sends.iter().cloned());
                        receives.extend(re.receives.iter().cloned());
                        for ((label, var), k) in &rc.hawk.reset_kernels {
                            if label == &re.label {
                                kernel_adds
                                    .push(((se.label.clone(), var.clone()), k.clone()));
                            }
                        }
                    }
                    sends.remove(&m.name);
                    receives.remove(&m.name);
                    for (key, k) in kernel_adds {
                        if let Some(prev) = product.reset_kernels.get(&key) {
                            if prev != &k {
                                return Err(ComposeError::KernelCollision {
                                    label: key.0,
                                    var: key.1,
                                });
                            }
                        }
                        product.reset_kernels.insert(key, k);
                    }
                    let mut ne = Edge::new(
                        &combo_name(combo),
                        &se.label,
                        &combo_name(&tgt),
                        se.trigger,
                    );
                    ne.guard = guard;
                    ne.reset = reset;
                    ne.sends = sends;
                    ne.receives = receives;
                    product.edges.push(ne);
                }
            }
        }
    }

    // initial tuple
    let init_parts: Vec<&str> = components
        .iter()
        .map(|c| c.hawk.init_location.as_str())
        .collect();
    product.init_location = join_names(&init_parts);

    let mut inputs: BTreeSet<String> = BTreeSet::new();
    let mut outputs: BTreeSet<String> = BTreeSet::new();
    for c in &components {
        inputs.extend(c.inputs.iter().cloned());
        outputs.extend(c.outputs());
    }
    let inputs: BTreeSet<String> = inputs.difference(&outputs).cloned().collect();
    product.canonicalize();
    Ok(Template::new(product, inputs))
}

/// Closes a fully-resolved product: strips dangling send marks, resolves
/// initial expressions to constants, prunes, validates.
fn finalize(product: Template, prune: bool) -> Result<Hawk, ComposeError> {
    if !product.inputs.is_empty() {
        return Err(ComposeError::UnboundInputs {
            inputs: product.inputs.iter().cloned().collect(),
        });
    }
    let mut h = product.hawk;
    for e in &mut h.edges {
        // outputs nobody consumes broadcast to an empty audience
        e.sends.clear();
        if !e.receives.is_empty() {
            return Err(ComposeError::ResidualReceive {
                context: format!("{} -> {} [{}]", e.source, e.target, e.label),
            });
        }
    }

    // resolve initial expressions to constants by repeated substitution
    let mut changed = true;
    let mut rounds = 0;
    while changed && rounds <= h.variables.len() + 1 {
        changed = false;
        rounds += 1;
        let snapshot = h.init_vals.clone();
        for (var, expr) in h.init_vals.iter_mut() {
            if expr.as_constant().is_some() {
                continue;
            }
            let mut e = expr.clone();
            for referenced in expr.vars() {
                if referenced == *var {
                    continue;
                }
                if let Some(rhs) = snapshot.get(&referenced) {
                    if rhs.as_constant().is_some() {
                        e = e.substitute(&referenced, rhs)?;
                    }
                }
            }
            if &e != expr {
                *expr = e;
                changed = true;
            }
        }
    }
    let unresolved: Vec<String> = h
        .init_vals
        .iter()
        .filter(|(_, e)| e.as_constant().is_none())
        .map(|(v, _)| v.clone())
        .collect();
    if !unresolved.is_empty() {
        return Err(ComposeError::CyclicInit { vars: unresolved });
    }

    let mut h = if prune { prune_unreachable(&h) } else { h };
    // kernels for labels that no longer label any edge
    let labels = h.labels();
    h.delay_kernels.retain(|label, _| labels.contains(label));
    h.reset_kernels.retain(|(label, _), _| labels.contains(label));
    h.canonicalize();
    h.validate().into_result().map_err(ComposeError::Invalid)?;
    Ok(h)
}

/// Removes locations and edges unreachable from the initial location.
/// Purely structural; simulation semantics of the reachable part are
/// untouched (checked by the seed-replay oracle in the test suite).
pub fn prune_unreachable(h: &Hawk) -> Hawk {
    let mut reachable: BTreeSet<String> = BTreeSet::new();
    let mut queue = std::collections::VecDeque::new();
    reachable.insert(h.init_location.clone());
    queue.push_back(h.init_location.clone());
    while let Some(loc) = queue.pop_front() {
        for e in &h.edges {
            if e.source == loc && !reachable.contains(&e.target) {
                reachable.insert(e.target.clone());
                queue.push_back(e.target.clone());
            }
        }
    }
    let mut out = h.clone();
    out.locations.retain(|l| reachable.contains(&l.name));
    out.edges.retain(|e| reachable.contains(&e.source));
    let labels = out.labels();
    out.delay_kernels.retain(|label, _| labels.contains(label));
    out.reset_kernels.retain(|(label, _), _| labels.contains(label));
    out.canonicalize();
    out
}

/// Reset kernel lookup with the identity fill-in: pairs without an
/// explicit entry keep the variable unchanged.
pub fn reset_kernel_of(h: &Hawk, label: &str, var: &str) -> Distribution {
    h.reset_kernels
        .get(&(label.to_string(), var.to_string()))
        .cloned()
        .unwrap_or_else(|| Distribution::identity_reset(var))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automata::Trigger;
    use crate::kernels::uniform_q;
    use crate::num::q_int;
    use crate::templates::*;

    fn wire(pairs: &[(&str, &str)]) -> BTreeMap<String, String> {
        pairs
            .iter()
            .map(|(a, b)| (a.to_string(), b.to_string()))
            .collect()
    }

    fn timer_x() -> Template {
        stochastic_timer(&TimerParams { dist: uniform_q(q_int(10), q_int(20)) })
            .unwrap()
            .instantiate("t1", &wire(&[("out", "x")]))
    }

    fn sampler_x() -> Template {
        stochastic_sampling(&SamplingParams { dist: uniform_q(q_int(1), q_int(2)) })
            .unwrap()
            .instantiate("s1", &wire(&[("in", "x"), ("out", "y")]))
    }

    #[test]
    fn identity_composition() {
        let t = timer_x();
        let plan = CompositionPlan { templates: vec![t.clone()], mappings: vec![] };
        let h = plan.resolve(true).unwrap();
        assert_eq!(h.locations.len(), t.hawk.locations.len());
        assert_eq!(h.edges.len(), t.hawk.edges.len());
        assert!(h.validate().is_empty());
    }

    #[test]
    fn cartesian_bound() {
        let plan = CompositionPlan {
            templates: vec![timer_x(), sampler_x()],
            mappings: vec![SyncMapping {
                name: "x".into(),
                snd: "t1".into(),
                rcv: ["s1".to_string()].into_iter().collect(),
            }],
        };
        let h = plan.resolve(false).unwrap();
        assert!(h.locations.len() <= 4, "got {}", h.locations.len());
    }

    #[test]
    fn timer_feeding_sampler_product() {
        let plan = CompositionPlan {
            templates: vec![timer_x(), sampler_x()],
            mappings: vec![SyncMapping {
                name: "x".into(),
                snd: "t1".into(),
                rcv: ["s1".to_string()].into_iter().collect(),
            }],
        };
        let h = plan.resolve(true).unwrap();
        assert!(h.validate().is_empty(), "{}", h.validate());
        // the timer's redraw edge synchronizes with the sampler's receive
        // loop: product edge keeps the timer's label, trigger and kernel
        let sync: Vec<&Edge> = h.edges.iter().filter(|e| e.label == "t1_loop").collect();
        assert!(!sync.is_empty());
        for e in &sync {
            assert_eq!(e.trigger, Trigger::GuardCrossing);
            assert_eq!(e.guard.to_string(), "x = 0");
        }
        assert_eq!(
            reset_kernel_of(&h, "t1_loop", "x"),
            uniform_q(q_int(10), q_int(20))
        );
        // untouched variable keeps the identity kernel
        assert!(reset_kernel_of(&h, "t1_loop", "y").is_identity_reset("y"));
        // sampler's own clock keeps its kernel
        assert_eq!(h.delay_kernels["s1_sample"], uniform_q(q_int(1), q_int(2)));
    }

    #[test]
    fn unresolvable_mapping_reported() {
        // a receiver without receive loops in some location
        let mut bad = sampler_x();
        bad.hawk.edges.retain(|e| !(e.receives.contains("x") && e.source == "l0"));
        let plan = CompositionPlan {
            templates: vec![timer_x(), bad],
            mappings: vec![SyncMapping {
                name: "x".into(),
                snd: "t1".into(),
                rcv: ["s1".to_string()].into_iter().collect(),
            }],
        };
        match plan.resolve(true) {
            Err(ComposeError::UnresolvableMapping { name, receiver_loc, .. }) => {
                assert_eq!(name, "x");
                assert_eq!(receiver_loc, "l0");
            }
            other => panic!("expected unresolvable mapping, got {other:?}"),
        }
    }

    #[test]
    fn name_collision_reported() {
        let a = stochastic_timer(&TimerParams { dist: uniform_q(q_int(1), q_int(2)) })
            .unwrap()
            .instantiate("a", &wire(&[("out", "x")]));
        let b = stochastic_timer(&TimerParams { dist: uniform_q(q_int(1), q_int(2)) })
            .unwrap()
            .instantiate("b", &wire(&[("out", "x")]));
        let plan = CompositionPlan { templates: vec![a, b], mappings: vec![] };
        assert!(matches!(
            plan.resolve(true),
            Err(ComposeError::NameCollision { .. })
        ));
    }

    #[test]
    fn uncovered_input_reported() {
        let plan = CompositionPlan { templates: vec![sampler_x()], mappings: vec![] };
        assert!(matches!(
            plan.resolve(true),
            Err(ComposeError::InputNotCovered { .. })
        ));
    }

    #[test]
    fn island_location_pruned() {
        let mut t = timer_x();
        t.hawk.locations.push(Location::new("island"));
        t.hawk.canonicalize();
        let plan = CompositionPlan { templates: vec![t], mappings: vec![] };
        let pruned = plan.resolve(true).unwrap();
        assert!(pruned.location("island").is_none());
        let unpruned = CompositionPlan {
            templates: vec![{
                let mut t = timer_x();
                t.hawk.locations.push(Location::new("island"));
                t.hawk.canonicalize();
                t
            }],
            mappings: vec![],
        }
        .resolve(false)
        .unwrap();
        assert!(unpruned.location("island").is_some());
        assert!(pruned.locations.len() <= unpruned.locations.len());
    }

    #[test]
    fn substitution_rewrites_receiver_resets() {
        // switch tracks a summed signal: the receive loop's reset must see
        // the sender's fresh expression, not the stale variable
        let c1 = base_block(&BaseBlock::Constant { value: q_int(2) })
            .unwrap()
            .instantiate("c1", &wire(&[("out", "a")]));
        let c2 = base_block(&BaseBlock::Constant { value: q_int(3) })
            .unwrap()
            .instantiate("c2", &wire(&[("out", "b")]));
        let sum = base_block(&BaseBlock::Sum)
            .unwrap()
            .instantiate("add", &wire(&[("in1", "a"), ("in2", "b"), ("out", "s")]));
        let sampler = stochastic_sampling(&SamplingParams {
            dist: uniform_q(q_int(1), q_int(2)),
        })
        .unwrap()
        .instantiate("smp", &wire(&[("in", "s"), ("out", "held")]));
        let plan = CompositionPlan {
            templates: vec![c1, c2, sum, sampler],
            mappings: vec![
                SyncMapping {
                    name: "a".into(),
                    snd: "c1".into(),
                    rcv: ["add".to_string()].into_iter().collect(),
                },
                SyncMapping {
                    name: "b".into(),
                    snd: "c2".into(),
                    rcv: ["add".to_string()].into_iter().collect(),
                },
                SyncMapping {
                    name: "s".into(),
                    snd: "add".into(),
                    rcv: ["smp".to_string()].into_iter().collect(),
                },
            ],
        };
        let h = plan.resolve(true).unwrap();
        assert!(h.validate().is_empty(), "{}", h.validate());
        // constants never send, so the adder's receive loops vanish and
        // inits resolve through the chain: s = a + b = 5, held = 5
        let init = h.init_valuation().unwrap();
        assert_eq!(init["s"], 5.0);
        assert_eq!(init["held"], 5.0);
    }

    #[test]
    fn resolution_order_independent_on_fixture() {
        let mk = |order: &[usize]| {
            let mappings = vec![
                SyncMapping {
                    name: "x".into(),
                    snd: "t1".into(),
                    rcv: ["s1".to_string()].into_iter().collect(),
                },
            ];
            let _ = order;
            CompositionPlan { templates: vec![timer_x(), sampler_x()], mappings }
        };
        let a = mk(&[0]).resolve(true).unwrap();
        let b = mk(&[0]).resolve(true).unwrap();
        assert_eq!(a.canonical_form(), b.canonical_form());
    }
}
