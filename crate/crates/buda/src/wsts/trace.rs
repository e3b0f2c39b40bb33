//! Derivation traces and their independent replay.
//!
//! A trace lists configurations in dependency order: seed entries must be
//! initial configurations, every later entry names the rule and the earlier
//! entries it was derived from, and the final entry must be accepting. Replay
//! regenerates the rule's successor set from the (canonical) sources and
//! demands the recorded result among them.

use std::fmt;

use crate::automaton::Buda;

use super::succ::{succ_eps, succ_grow, succ_inc, succ_merge, RuleApp, RuleKind};
use super::ExtConfig;

#[derive(Debug, Clone)]
pub struct TraceStep {
    /// `None` marks a seed (initial configuration).
    pub rule: Option<RuleApp>,
    pub sources: Vec<usize>,
    pub config: ExtConfig,
}

#[derive(Debug, Clone, Default)]
pub struct Trace {
    pub steps: Vec<TraceStep>,
}

impl fmt::Display for Trace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, s) in self.steps.iter().enumerate() {
            match &s.rule {
                None => writeln!(f, "step {i} init -> {}", s.config)?,
                Some(app) => {
                    let srcs: Vec<String> = s.sources.iter().map(|x| x.to_string()).collect();
                    writeln!(
                        f,
                        "step {i} {} {} from={} -> {}",
                        app.kind,
                        app.info,
                        srcs.join(","),
                        s.config
                    )?;
                }
            }
        }
        Ok(())
    }
}

/// Validates every step of the trace against the transition rules and checks
/// the final configuration is accepting. Also fails on malformed traces
/// (forward references, missing steps, non-initial seeds).
pub fn replay_trace(aut: &Buda, trace: &Trace) -> bool {
    if trace.steps.is_empty() {
        return false;
    }
    for (i, step) in trace.steps.iter().enumerate() {
        if step.config != step.config.canonical() {
            return false;
        }
        match &step.rule {
            None => {
                if !step.sources.is_empty() || !step.config.is_initial(aut) {
                    return false;
                }
            }
            Some(app) => {
                if step.sources.iter().any(|&s| s >= i) {
                    return false;
                }
                let srcs: Vec<&ExtConfig> =
                    step.sources.iter().map(|&s| &trace.steps[s].config).collect();
                let candidates: Vec<(RuleApp, ExtConfig)> = match app.kind {
                    RuleKind::Inc => {
                        if srcs.len() != 1 {
                            return false;
                        }
                        succ_inc(srcs[0])
                    }
                    RuleKind::Grow => {
                        if srcs.len() != 1 {
                            return false;
                        }
                        succ_grow(aut, srcs[0])
                    }
                    RuleKind::Merge => {
                        if srcs.len() != 2 {
                            return false;
                        }
                        succ_merge(aut, srcs[0], srcs[1])
                    }
                    _ => {
                        if srcs.len() != 1 {
                            return false;
                        }
                        succ_eps(aut, srcs[0])
                    }
                };
                if !candidates
                    .iter()
                    .any(|(r, c)| r.kind == app.kind && *c == step.config)
                {
                    return false;
                }
            }
        }
    }
    trace.steps.last().is_some_and(|s| s.config.is_accepting())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automaton::text::parse_buda;
    use crate::semigroup::CompileOptions;
    use crate::wsts::Ann;

    #[test]
    fn replay_rejects_malformed() {
        let aut = parse_buda(
            "labels: a\nstates: q0\ninitial: q0\ntrans:\nq0 & root -> accept\n",
            &CompileOptions::default(),
        )
        .unwrap();
        // Empty trace.
        assert!(!replay_trace(&aut, &Trace::default()));
        // Seed that is not initial.
        let bogus = Trace {
            steps: vec![TraceStep {
                rule: None,
                sources: vec![],
                config: ExtConfig::default(),
            }],
        };
        assert!(!replay_trace(&aut, &bogus));
        // Non-accepting final configuration.
        let h = aut.rec().letter_image(0);
        let init = ExtConfig {
            delta: [(0, Ann::Bot, 1)].into_iter().collect(),
            gamma: [(h, 1)].into_iter().collect(),
            r: true,
            m: false,
        };
        let only_init = Trace { steps: vec![TraceStep { rule: None, sources: vec![], config: init }] };
        assert!(!replay_trace(&aut, &only_init));
    }
}
