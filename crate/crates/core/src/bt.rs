//! Behavior trees with memory composites.
//!
//! `Sequence` and `Selector` remember which child they are on, so children
//! that already completed are not ticked again until the composite itself
//! resolves. `Parallel` ticks every unresolved child on each tick and
//! remembers the children that finished. Once any composite returns
//! `Success` or `Failure` its memory is cleared, so the next tick starts a
//! fresh pass.
//!
//! Leaves are resolved by name through a [`Leaves`] implementation supplied
//! at tick time; the tree owns no behavior of its own.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tactile::ContactState;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Status {
    Success,
    Failure,
    Running,
}

/// Callbacks for leaf nodes.
pub trait Leaves {
    fn action(&mut self, name: &str) -> Status;
    fn condition(&mut self, name: &str) -> bool;
}

#[derive(Debug, Clone, PartialEq)]
pub enum Kind {
    Sequence,
    Selector,
    Parallel { threshold: usize },
    Action(String),
    Condition(String),
}

#[derive(Debug, Clone, PartialEq, Default)]
struct Memory {
    cursor: usize,
    finished: Vec<Option<Status>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Node {
    kind: Kind,
    children: Vec<Node>,
    memory: Memory,
}

impl Node {
    pub fn new(kind: Kind, children: Vec<Node>) -> Result<Self> {
        match &kind {
            Kind::Action(name) | Kind::Condition(name) => {
                if !children.is_empty() {
                    return Err(Error::MalformedTree(format!("leaf `{name}` cannot have children")));
                }
                if name.is_empty() {
                    return Err(Error::MalformedTree("leaf name is empty".into()));
                }
            }
            composite => {
                if children.is_empty() {
                    return Err(Error::MalformedTree(format!("{composite:?} needs at least one child")));
                }
                if let Kind::Parallel { threshold } = composite {
                    if *threshold == 0 || *threshold > children.len() {
                        return Err(Error::MalformedTree(format!(
                            "parallel threshold {threshold} outside [1, {}]",
                            children.len()
                        )));
                    }
                }
            }
        }
        Ok(Self {
            kind,
            children,
            memory: Memory::default(),
        })
    }

    pub fn sequence(children: Vec<Node>) -> Result<Self> {
        Self::new(Kind::Sequence, children)
    }

    pub fn selector(children: Vec<Node>) -> Result<Self> {
        Self::new(Kind::Selector, children)
    }

    pub fn parallel(threshold: usize, children: Vec<Node>) -> Result<Self> {
        Self::new(Kind::Parallel { threshold }, children)
    }

    /// Parallel that succeeds only when every child succeeds.
    pub fn parallel_all(children: Vec<Node>) -> Result<Self> {
        let n = children.len();
        Self::parallel(n, children)
    }

    pub fn action(name: impl Into<String>) -> Self {
        Self {
            kind: Kind::Action(name.into()),
            children: Vec::new(),
            memory: Memory::default(),
        }
    }

    pub fn condition(name: impl Into<String>) -> Self {
        Self {
            kind: Kind::Condition(name.into()),
            children: Vec::new(),
            memory: Memory::default(),
        }
    }

    pub fn kind(&self) -> &Kind {
        &self.kind
    }

    pub fn children(&self) -> &[Node] {
        &self.children
    }

    /// Names of all leaves in depth-first order.
    pub fn leaf_names(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.collect_leaves(&mut out);
        out
    }

    fn collect_leaves<'a>(&'a self, out: &mut Vec<&'a str>) {
        match &self.kind {
            Kind::Action(n) | Kind::Condition(n) => out.push(n),
            _ => self.children.iter().for_each(|c| c.collect_leaves(out)),
        }
    }

    /// Clears all memory in this subtree.
    pub fn reset(&mut self) {
        self.memory = Memory::default();
        self.children.iter_mut().for_each(Node::reset);
    }

    pub fn tick<L: Leaves + ?Sized>(&mut self, leaves: &mut L) -> Status {
        match &self.kind {
            Kind::Action(name) => leaves.action(name),
            Kind::Condition(name) => {
                if leaves.condition(name) {
                    Status::Success
                } else {
                    Status::Failure
                }
            }
            Kind::Sequence => self.tick_ordered(leaves, Status::Success),
            Kind::Selector => self.tick_ordered(leaves, Status::Failure),
            Kind::Parallel { threshold } => {
                let threshold = *threshold;
                self.tick_parallel(leaves, threshold)
            }
        }
    }

    /// Sequence when `advance_on` is Success, selector when it is Failure.
    fn tick_ordered<L: Leaves + ?Sized>(&mut self, leaves: &mut L, advance_on: Status) -> Status {
        while self.memory.cursor < self.children.len() {
            let s = self.children[self.memory.cursor].tick(leaves);
            if s == advance_on {
                self.memory.cursor += 1;
            } else if s == Status::Running {
                return Status::Running;
            } else {
                self.reset();
                return s;
            }
        }
        self.reset();
        advance_on
    }

    fn tick_parallel<L: Leaves + ?Sized>(&mut self, leaves: &mut L, threshold: usize) -> Status {
        let n = self.children.len();
        if self.memory.finished.len() != n {
            self.memory.finished = vec![None; n];
        }
        for (child, done) in self.children.iter_mut().zip(self.memory.finished.iter_mut()) {
            if done.is_none() {
                match child.tick(leaves) {
                    Status::Running => {}
                    s => *done = Some(s),
                }
            }
        }
        let successes = self.memory.finished.iter().filter(|s| **s == Some(Status::Success)).count();
        let failures = self.memory.finished.iter().filter(|s| **s == Some(Status::Failure)).count();
        if successes >= threshold {
            self.reset();
            Status::Success
        } else if n - failures < threshold {
            self.reset();
            Status::Failure
        } else {
            Status::Running
        }
    }

    pub fn to_spec(&self) -> NodeSpec {
        let (kind, params) = match &self.kind {
            Kind::Sequence => (KindTag::Sequence, Params::default()),
            Kind::Selector => (KindTag::Selector, Params::default()),
            Kind::Parallel { threshold } => (
                KindTag::Parallel,
                Params {
                    threshold: Some(*threshold),
                    ..Params::default()
                },
            ),
            Kind::Action(n) => (
                KindTag::Action,
                Params {
                    name: Some(n.clone()),
                    ..Params::default()
                },
            ),
            Kind::Condition(n) => (
                KindTag::Condition,
                Params {
                    name: Some(n.clone()),
                    ..Params::default()
                },
            ),
        };
        NodeSpec {
            kind,
            children: self.children.iter().map(Node::to_spec).collect(),
            params,
        }
    }

    pub fn from_spec(spec: &NodeSpec) -> Result<Self> {
        let children = spec.children.iter().map(Node::from_spec).collect::<Result<Vec<_>>>()?;
        let name = || {
            spec.params
                .name
                .clone()
                .ok_or_else(|| Error::MalformedTree(format!("{:?} leaf needs params.name", spec.kind)))
        };
        let kind = match spec.kind {
            KindTag::Sequence => Kind::Sequence,
            KindTag::Selector => Kind::Selector,
            KindTag::Parallel => Kind::Parallel {
                threshold: spec.params.threshold.unwrap_or(children.len()),
            },
            KindTag::Action => Kind::Action(name()?),
            KindTag::Condition => Kind::Condition(name()?),
        };
        Node::new(kind, children)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let spec: NodeSpec =
            serde_json::from_str(text).map_err(|e| Error::MalformedTree(format!("tree description: {e}")))?;
        Self::from_spec(&spec)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_spec()).expect("tree specs always serialize")
    }
}

/// Serializable tree description: nested `{kind, children, params}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeSpec {
    pub kind: KindTag,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub children: Vec<NodeSpec>,
    #[serde(default, skip_serializing_if = "Params::is_empty")]
    pub params: Params,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KindTag {
    Sequence,
    Selector,
    Parallel,
    Action,
    Condition,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Params {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threshold: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
}

impl Params {
    pub fn is_empty(&self) -> bool {
        self.threshold.is_none() && self.name.is_none()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Bool(bool),
    Int(i64),
    Float(f64),
    Text(String),
    Contact(ContactState),
}

impl Value {
    fn type_name(&self) -> &'static str {
        match self {
            Value::Bool(_) => "bool",
            Value::Int(_) => "int",
            Value::Float(_) => "float",
            Value::Text(_) => "text",
            Value::Contact(_) => "contact",
        }
    }
}

/// Keyed strategy state shared between the leaves of one tree. A key keeps
/// the type of its first value.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Blackboard {
    entries: HashMap<String, Value>,
}

impl Blackboard {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn set(&mut self, key: &str, value: Value) -> Result<()> {
        if let Some(old) = self.entries.get(key) {
            if old.type_name() != value.type_name() {
                return Err(Error::InvalidArgument(format!(
                    "blackboard key `{key}` holds {}, not {}",
                    old.type_name(),
                    value.type_name()
                )));
            }
        }
        self.entries.insert(key.to_string(), value);
        Ok(())
    }

    pub fn get(&self, key: &str) -> Option<&Value> {
        self.entries.get(key)
    }

    pub fn contains(&self, key: &str) -> bool {
        self.entries.contains_key(key)
    }

    pub fn remove(&mut self, key: &str) -> Option<Value> {
        self.entries.remove(key)
    }

    pub fn bool(&self, key: &str) -> Option<bool> {
        match self.get(key) {
            Some(Value::Bool(b)) => Some(*b),
            _ => None,
        }
    }

    pub fn int(&self, key: &str) -> Option<i64> {
        match self.get(key) {
            Some(Value::Int(v)) => Some(*v),
            _ => None,
        }
    }

    pub fn float(&self, key: &str) -> Option<f64> {
        match self.get(key) {
            Some(Value::Float(v)) => Some(*v),
            _ => None,
        }
    }

    pub fn contact(&self, key: &str) -> Option<ContactState> {
        match self.get(key) {
            Some(Value::Contact(c)) => Some(*c),
            _ => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const ALL: [Status; 3] = [Status::Success, Status::Failure, Status::Running];

    /// Leaves named `c<i>` return a scripted status and record every tick.
    #[derive(Default)]
    struct Script {
        status: HashMap<String, Status>,
        ticks: Vec<String>,
    }

    impl Leaves for Script {
        fn action(&mut self, name: &str) -> Status {
            self.ticks.push(name.to_string());
            self.status[name]
        }
        fn condition(&mut self, name: &str) -> bool {
            self.ticks.push(name.to_string());
            self.status[name] == Status::Success
        }
    }

    fn leaves(n: usize) -> Vec<Node> {
        (0..n).map(|i| Node::action(format!("c{i}"))).collect()
    }

    fn script(statuses: &[Status]) -> Script {
        Script {
            status: statuses.iter().enumerate().map(|(i, s)| (format!("c{i}"), *s)).collect(),
            ticks: Vec::new(),
        }
    }

    /// Reference semantics for a single fresh tick.
    fn reference(kind: &Kind, s: &[Status]) -> Status {
        match kind {
            Kind::Sequence => s.iter().copied().find(|x| *x != Status::Success).unwrap_or(Status::Success),
            Kind::Selector => s.iter().copied().find(|x| *x != Status::Failure).unwrap_or(Status::Failure),
            Kind::Parallel { threshold } => {
                let ok = s.iter().filter(|x| **x == Status::Success).count();
                let fail = s.iter().filter(|x| **x == Status::Failure).count();
                if ok >= *threshold {
                    Status::Success
                } else if s.len() - fail < *threshold {
                    Status::Failure
                } else {
                    Status::Running
                }
            }
            _ => unreachable!(),
        }
    }

    fn tuples(n: usize) -> Vec<Vec<Status>> {
        (0..3usize.pow(n as u32))
            .map(|mut code| {
                (0..n)
                    .map(|_| {
                        let s = ALL[code % 3];
                        code /= 3;
                        s
                    })
                    .collect()
            })
            .collect()
    }

    #[test]
    fn exhaustive_truth_table() {
        let mut checked = 0;
        for n in 1..=3 {
            let mut kinds = vec![Kind::Sequence, Kind::Selector];
            kinds.extend((1..=n).map(|t| Kind::Parallel { threshold: t }));
            for kind in kinds {
                for t in tuples(n) {
                    let mut node = Node::new(kind.clone(), leaves(n)).unwrap();
                    let got = node.tick(&mut script(&t));
                    assert_eq!(got, reference(&kind, &t), "{kind:?} over {t:?}");
                    checked += 1;
                }
            }
        }
        assert_eq!(checked, 3 * 3 + 9 * 4 + 27 * 5);
    }

    #[test]
    fn sequence_and_selector_examples() {
        use Status::*;
        let mut seq = Node::sequence(leaves(2)).unwrap();
        assert_eq!(seq.tick(&mut script(&[Success, Running])), Running);
        let mut sel = Node::selector(leaves(2)).unwrap();
        assert_eq!(sel.tick(&mut script(&[Failure, Success])), Success);
    }

    #[test]
    fn parallel_resolves_when_threshold_reached() {
        use Status::*;
        let mut par = Node::parallel(2, leaves(3)).unwrap();
        let mut sc = script(&[Success, Running, Failure]);
        assert_eq!(par.tick(&mut sc), Running);
        sc.status.insert("c1".into(), Success);
        sc.ticks.clear();
        assert_eq!(par.tick(&mut sc), Success);
        // Finished children were not re-ticked.
        assert_eq!(sc.ticks, vec!["c1"]);
    }

    #[test]
    fn memory_skips_completed_children() {
        use Status::*;
        let mut seq = Node::sequence(leaves(3)).unwrap();
        let mut sc = script(&[Success, Running, Success]);
        assert_eq!(seq.tick(&mut sc), Running);
        assert_eq!(seq.tick(&mut sc), Running);
        assert_eq!(sc.ticks, vec!["c0", "c1", "c1"]);
        sc.status.insert("c1".into(), Success);
        assert_eq!(seq.tick(&mut sc), Success);
        // A resolved tree starts over.
        sc.ticks.clear();
        seq.tick(&mut sc);
        assert_eq!(sc.ticks, vec!["c0", "c1", "c2"]);
    }

    #[test]
    fn reset_restarts_from_first_child() {
        use Status::*;
        let fresh = Node::sequence(leaves(2)).unwrap();
        let mut seq = fresh.clone();
        let mut sc = script(&[Success, Running]);
        seq.tick(&mut sc);
        assert_ne!(seq, fresh);
        seq.reset();
        assert_eq!(seq, fresh);
        seq.reset();
        assert_eq!(seq, fresh);
        sc.ticks.clear();
        seq.tick(&mut sc);
        assert_eq!(sc.ticks, vec!["c0", "c1"]);
    }

    #[test]
    fn malformed_trees_rejected() {
        assert!(Node::sequence(vec![]).is_err());
        assert!(Node::parallel(0, leaves(2)).is_err());
        assert!(Node::parallel(3, leaves(2)).is_err());
        assert!(Node::new(Kind::Action("a".into()), leaves(1)).is_err());
        assert!(Node::from_json(r#"{"kind":"action"}"#).is_err());
        assert!(Node::from_json(r#"{"kind":"sequence"}"#).is_err());
        assert!(Node::from_json("not json").is_err());
    }

    #[test]
    fn json_shape() {
        let t = Node::sequence(vec![Node::action("go"), Node::parallel_all(vec![Node::condition("ok")]).unwrap()]).unwrap();
        let v: serde_json::Value = serde_json::from_str(&t.to_json()).unwrap();
        assert_eq!(v["kind"], "sequence");
        assert_eq!(v["children"][0]["params"]["name"], "go");
        assert_eq!(v["children"][1]["params"]["threshold"], 1);
    }

    #[test]
    fn blackboard_types_are_sticky() {
        let mut bb = Blackboard::new();
        bb.set("contacts", Value::Int(1)).unwrap();
        bb.set("contacts", Value::Int(2)).unwrap();
        assert_eq!(bb.int("contacts"), Some(2));
        assert!(bb.set("contacts", Value::Float(2.0)).is_err());
        assert_eq!(bb.float("contacts"), None);
    }

    fn arb_tree() -> impl Strategy<Value = Node> {
        let leaf = prop_oneof![
            "[a-z]{1,6}".prop_map(Node::action),
            "[a-z]{1,6}".prop_map(Node::condition),
        ];
        leaf.prop_recursive(4, 24, 4, |inner| {
            (prop::collection::vec(inner, 1..4), 0..3u8, any::<prop::sample::Index>()).prop_map(|(kids, k, idx)| {
                match k {
                    0 => Node::sequence(kids).unwrap(),
                    1 => Node::selector(kids).unwrap(),
                    _ => {
                        let t = idx.index(kids.len()) + 1;
                        Node::parallel(t, kids).unwrap()
                    }
                }
            })
        })
    }

    proptest! {
        #[test]
        fn json_round_trip(tree in arb_tree()) {
            let back = Node::from_json(&tree.to_json()).unwrap();
            prop_assert_eq!(back, tree);
        }
    }
}
