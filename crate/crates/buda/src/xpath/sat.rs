//! End-to-end satisfiability: compile the formula, eliminate stay actions,
//! normalize, and run the coverability solver. A nonempty verdict is exact;
//! an optional brute-force witness confirms it independently.

use crate::automaton::epsilon::eliminate_epsilon;
use crate::automaton::normalize::normalize;
use crate::semigroup::CompileOptions;
use crate::wsts::emptiness::{emptiness, DepthPolicy, Verdict};

use super::translate::{translate, TranslateError};
use super::NodeExpr;

#[derive(Debug)]
pub struct SatOutcome {
    pub verdict: Verdict,
    /// Some leaf-closure outcomes were dropped during stay elimination; an
    /// empty verdict is then relative to the compiled approximation.
    pub lossy: bool,
}

/// Labels the satisfiability question ranges over: the formula's own labels
/// plus one letter standing for everything else.
pub fn sat_alphabet(eta: &NodeExpr) -> Vec<String> {
    let mut labels = Vec::new();
    collect_labels(eta, &mut labels);
    let mut other = "x".to_string();
    while labels.contains(&other) {
        other.push('x');
    }
    labels.push(other);
    labels
}

fn collect_labels(e: &NodeExpr, out: &mut Vec<String>) {
    match e {
        NodeExpr::Label(a) => {
            if !out.contains(a) {
                out.push(a.clone());
            }
        }
        NodeExpr::Not(f) => collect_labels(f, out),
        NodeExpr::And(a, b) | NodeExpr::Or(a, b) => {
            collect_labels(a, out);
            collect_labels(b, out);
        }
        NodeExpr::Some(p) => collect_labels_path(p, out),
        NodeExpr::Eq(a, b) | NodeExpr::Neq(a, b) => {
            collect_labels_path(a, out);
            collect_labels_path(b, out);
        }
        NodeExpr::True => {}
    }
}

fn collect_labels_path(p: &super::PathExpr, out: &mut Vec<String>) {
    use super::PathExpr::*;
    match p {
        Filter(f) => collect_labels(f, out),
        Seq(a, b) | Union(a, b) => {
            collect_labels_path(a, out);
            collect_labels_path(b, out);
        }
        Star(a) => collect_labels_path(a, out),
        _ => {}
    }
}

/// Decides whether some data tree satisfies the formula at some node.
pub fn check_sat(eta: &NodeExpr, policy: &DepthPolicy) -> Result<SatOutcome, TranslateError> {
    let labels = sat_alphabet(eta);
    check_sat_over(eta, &labels, policy)
}

/// Same, over an explicit label alphabet.
pub fn check_sat_over(
    eta: &NodeExpr,
    labels: &[String],
    policy: &DepthPolicy,
) -> Result<SatOutcome, TranslateError> {
    let opts = CompileOptions::default();
    let tr = translate(eta, labels, &opts)?;
    let elim = eliminate_epsilon(&tr.aut, &opts)?;
    let normalized = normalize(&elim.aut, &opts)?;
    let verdict = emptiness(&normalized, policy)?;
    Ok(SatOutcome { verdict, lossy: elim.lossy_leaf_closure })
}
