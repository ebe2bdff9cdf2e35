//! Named heuristic slots and their registered policy variants.
//!
//! Every performance-relevant choice in the checker is routed through one
//! of four slots (proof-obligation handling, inductive generalization,
//! predecessor generalization, push/propagation). Variants change search
//! order and resource allocation only; proof logic is untouched, so any
//! variant combination must produce the same verdicts.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SlotId {
    PoHandling,
    IndGen,
    PredGen,
    PushProp,
}

impl SlotId {
    pub const ALL: [SlotId; 4] = [
        SlotId::PoHandling,
        SlotId::IndGen,
        SlotId::PredGen,
        SlotId::PushProp,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SlotId::PoHandling => "po_handling",
            SlotId::IndGen => "ind_gen",
            SlotId::PredGen => "pred_gen",
            SlotId::PushProp => "push_prop",
        }
    }
}

impl fmt::Display for SlotId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SlotId {
    type Err = PolicyError;
    fn from_str(s: &str) -> Result<Self, PolicyError> {
        match s {
            "po_handling" => Ok(SlotId::PoHandling),
            "ind_gen" => Ok(SlotId::IndGen),
            "pred_gen" => Ok(SlotId::PredGen),
            "push_prop" => Ok(SlotId::PushProp),
            other => Err(PolicyError::UnknownSlot(other.to_string())),
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PolicyError {
    #[error("unknown slot '{0}'")]
    UnknownSlot(String),
    #[error("unknown variant '{variant}' for slot {slot}")]
    UnknownVariant { slot: SlotId, variant: String },
    #[error("unknown parameter '{param}' for {slot}={variant}")]
    UnknownParameter {
        slot: SlotId,
        variant: String,
        param: String,
    },
    #[error("malformed policy spec '{0}' (expected slot=variant[,key=value...])")]
    Malformed(String),
    #[error("malformed parameter value in '{0}'")]
    BadValue(String),
}

/// One slot binding: a registered variant plus named scalar parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct SlotPolicy {
    pub slot: SlotId,
    pub variant: String,
    pub params: BTreeMap<String, f64>,
}

impl SlotPolicy {
    /// Parse `slot=variant[,key=value...]`, validating against the registry.
    pub fn parse(spec: &str) -> Result<Self, PolicyError> {
        let (slot_s, rest) = spec
            .split_once('=')
            .ok_or_else(|| PolicyError::Malformed(spec.to_string()))?;
        let slot: SlotId = slot_s.trim().parse()?;
        let mut parts = rest.split(',');
        let variant = parts
            .next()
            .map(str::trim)
            .filter(|v| !v.is_empty())
            .ok_or_else(|| PolicyError::Malformed(spec.to_string()))?
            .to_string();
        let mut params = BTreeMap::new();
        for p in parts {
            let (k, v) = p
                .split_once('=')
                .ok_or_else(|| PolicyError::Malformed(spec.to_string()))?;
            let value: f64 = v
                .trim()
                .parse()
                .map_err(|_| PolicyError::BadValue(p.to_string()))?;
            params.insert(k.trim().to_string(), value);
        }
        let policy = SlotPolicy {
            slot,
            variant,
            params,
        };
        policy.validate()?;
        Ok(policy)
    }

    pub fn validate(&self) -> Result<(), PolicyError> {
        let allowed = registered_params(self.slot, &self.variant).ok_or_else(|| {
            PolicyError::UnknownVariant {
                slot: self.slot,
                variant: self.variant.clone(),
            }
        })?;
        for key in self.params.keys() {
            if !allowed.contains(&key.as_str()) {
                return Err(PolicyError::UnknownParameter {
                    slot: self.slot,
                    variant: self.variant.clone(),
                    param: key.clone(),
                });
            }
        }
        Ok(())
    }

    fn param(&self, key: &str, default: f64) -> f64 {
        self.params.get(key).copied().unwrap_or(default)
    }
}

/// Registered variant ids per slot.
pub fn registered_variants(slot: SlotId) -> &'static [&'static str] {
    match slot {
        SlotId::PoHandling => &["best_first", "min_frame_then_size", "dfs"],
        SlotId::IndGen => &["core_down", "full_down"],
        SlotId::PredGen => &["sat_lift", "full_cube"],
        SlotId::PushProp => &[
            "baseline",
            "gated_simplify",
            "stall_skip",
            "adaptive_budget",
        ],
    }
}

fn registered_params(slot: SlotId, variant: &str) -> Option<&'static [&'static str]> {
    if !registered_variants(slot).contains(&variant) {
        return None;
    }
    Some(match (slot, variant) {
        (SlotId::PoHandling, _) => &[],
        (SlotId::IndGen, _) => &["budget_factor"],
        (SlotId::PredGen, "sat_lift") => &["reverse_assumps"],
        (SlotId::PredGen, _) => &[],
        (SlotId::PushProp, "baseline") => &[],
        (SlotId::PushProp, "gated_simplify") => &["checkpoint_every"],
        (SlotId::PushProp, "stall_skip") => &["limit", "checkpoint_every"],
        (SlotId::PushProp, "adaptive_budget") => &[
            "base",
            "cap",
            "floor",
            "early_cut",
            "limit",
            "checkpoint_every",
        ],
        _ => &[],
    })
}

/// The resolved policy of every slot for one check run.
#[derive(Debug, Clone, PartialEq)]
pub struct PolicySet {
    pub po_handling: SlotPolicy,
    pub ind_gen: SlotPolicy,
    pub pred_gen: SlotPolicy,
    pub push_prop: SlotPolicy,
}

impl Default for PolicySet {
    fn default() -> Self {
        let mk = |slot: SlotId, variant: &str| SlotPolicy {
            slot,
            variant: variant.to_string(),
            params: BTreeMap::new(),
        };
        PolicySet {
            po_handling: mk(SlotId::PoHandling, "best_first"),
            ind_gen: mk(SlotId::IndGen, "core_down"),
            pred_gen: mk(SlotId::PredGen, "sat_lift"),
            push_prop: mk(SlotId::PushProp, "baseline"),
        }
    }
}

impl PolicySet {
    pub fn apply(&mut self, policy: SlotPolicy) -> Result<(), PolicyError> {
        policy.validate()?;
        match policy.slot {
            SlotId::PoHandling => self.po_handling = policy,
            SlotId::IndGen => self.ind_gen = policy,
            SlotId::PredGen => self.pred_gen = policy,
            SlotId::PushProp => self.push_prop = policy,
        }
        Ok(())
    }

    /// Parse and apply a list of `slot=variant[,k=v...]` specs.
    pub fn from_specs<I: IntoIterator<Item = S>, S: AsRef<str>>(
        specs: I,
    ) -> Result<Self, PolicyError> {
        let mut set = PolicySet::default();
        for spec in specs {
            set.apply(SlotPolicy::parse(spec.as_ref())?)?;
        }
        Ok(set)
    }
}

/// Proof-obligation selection order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PoOrder {
    /// Min-heap on (frame, depth, cube size), insertion-order tiebreak.
    BestFirst,
    /// Min-heap on (frame, cube size), insertion-order tiebreak.
    MinFrameThenSize,
    /// Lowest frame, most recently inserted first.
    Dfs,
}

impl PolicySet {
    pub fn po_order(&self) -> PoOrder {
        match self.po_handling.variant.as_str() {
            "min_frame_then_size" => PoOrder::MinFrameThenSize,
            "dfs" => PoOrder::Dfs,
            _ => PoOrder::BestFirst,
        }
    }

    pub fn ind_gen_seed_from_core(&self) -> bool {
        self.ind_gen.variant != "full_down"
    }

    pub fn ind_gen_budget(&self, cube_len: usize) -> u64 {
        let factor = self.ind_gen.param("budget_factor", 3.0).max(0.0);
        (factor * cube_len as f64).ceil() as u64
    }

    pub fn pred_gen_lift(&self) -> bool {
        self.pred_gen.variant != "full_cube"
    }

    pub fn pred_gen_reverse(&self) -> bool {
        self.pred_gen.param("reverse_assumps", 0.0) != 0.0
    }

    pub fn push(&self) -> PushPolicy {
        let p = &self.push_prop;
        match p.variant.as_str() {
            "gated_simplify" => PushPolicy {
                gate_simplify: true,
                checkpoint_every: p.param("checkpoint_every", 4.0) as u64,
                ..PushPolicy::baseline()
            },
            "stall_skip" => PushPolicy {
                gate_simplify: true,
                checkpoint_every: p.param("checkpoint_every", 4.0) as u64,
                stall_limit: Some(p.param("limit", 3.0) as u32),
                ..PushPolicy::baseline()
            },
            "adaptive_budget" => PushPolicy {
                gate_simplify: true,
                checkpoint_every: p.param("checkpoint_every", 4.0) as u64,
                stall_limit: Some(p.param("limit", 3.0) as u32),
                budget: Some(BudgetRule {
                    base: p.param("base", 8.0) as u32,
                    cap: p.param("cap", 32.0) as u32,
                    floor: p.param("floor", 1.0) as u32,
                }),
                early_cut: Some(p.param("early_cut", 3.0) as u32),
            },
            _ => PushPolicy::baseline(),
        }
    }
}

/// Resolved push/propagation behavior.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PushPolicy {
    /// When false, simplify after every round; when true, only after a
    /// round that moved clauses or at a periodic checkpoint.
    pub gate_simplify: bool,
    pub checkpoint_every: u64,
    /// Skip push attempts on a frame whose stall streak reached the limit,
    /// provided nothing it depends on changed since the last attempt.
    pub stall_limit: Option<u32>,
    /// Per-frame attempt budget, grown on success and cut when stalled.
    pub budget: Option<BudgetRule>,
    /// Stop a frame's pass after this many consecutive failed attempts.
    pub early_cut: Option<u32>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BudgetRule {
    pub base: u32,
    pub cap: u32,
    pub floor: u32,
}

impl PushPolicy {
    fn baseline() -> Self {
        PushPolicy {
            gate_simplify: false,
            checkpoint_every: 4,
            stall_limit: None,
            budget: None,
            early_cut: None,
        }
    }
}
