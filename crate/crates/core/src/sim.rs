//! Scenario engine for comparing route selection policies.
//!
//! A scenario is a static topology whose links expire once their lifetime
//! runs out. One packet is offered per unit tick. On every tick the source
//! enumerates the live simple paths to the destination, measures them and
//! picks one under the policy being evaluated; a tick with no path is a lost
//! packet.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::membership::{benefits, MembershipProvider, RouteMetrics};
use crate::rank::{rank, RouteId, RouteRanking};

/// Undirected link with its attributes at scenario start.
#[derive(Debug, Clone, PartialEq)]
pub struct Link {
    pub a: String,
    pub b: String,
    pub delay_ms: f64,
    pub load: f64,
    pub lifetime_s: f64,
}

impl Link {
    fn key(&self) -> (String, String) {
        link_key(&self.a, &self.b)
    }
}

fn link_key(a: &str, b: &str) -> (String, String) {
    if a <= b {
        (a.to_owned(), b.to_owned())
    } else {
        (b.to_owned(), a.to_owned())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Topology {
    nodes: BTreeSet<String>,
    links: BTreeMap<(String, String), Link>,
    adjacency: BTreeMap<String, BTreeSet<String>>,
}

impl Topology {
    pub fn new(
        nodes: impl IntoIterator<Item = String>,
        links: impl IntoIterator<Item = Link>,
    ) -> Result<Self> {
        let mut topo = Topology {
            nodes: BTreeSet::new(),
            links: BTreeMap::new(),
            adjacency: BTreeMap::new(),
        };
        for node in nodes {
            if node.is_empty() || node.contains([',', '>']) || node.contains(char::is_whitespace) {
                return Err(Error::invariant(format!(
                    "node id {node:?} must be non-empty without commas, '>' or whitespace"
                )));
            }
            if !topo.nodes.insert(node.clone()) {
                return Err(Error::invariant(format!("duplicate node {node}")));
            }
            topo.adjacency.insert(node, BTreeSet::new());
        }
        for link in links {
            topo.add_link(link)?;
        }
        Ok(topo)
    }

    fn add_link(&mut self, link: Link) -> Result<()> {
        let name = format!("{}-{}", link.a, link.b);
        if link.a == link.b {
            return Err(Error::invariant(format!("self-loop link {name}")));
        }
        for end in [&link.a, &link.b] {
            if !self.nodes.contains(end) {
                return Err(Error::invariant(format!(
                    "link {name} names unknown node {end}"
                )));
            }
        }
        if !(link.delay_ms.is_finite() && link.delay_ms > 0.0) {
            return Err(Error::invariant(format!(
                "link {name}: delay must be positive"
            )));
        }
        if !(0.0..=1.0).contains(&link.load) {
            return Err(Error::invariant(format!(
                "link {name}: load outside [0, 1]"
            )));
        }
        if !(link.lifetime_s.is_finite() && link.lifetime_s > 0.0) {
            return Err(Error::invariant(format!(
                "link {name}: lifetime must be positive"
            )));
        }
        let key = link.key();
        if self.links.contains_key(&key) {
            return Err(Error::invariant(format!("duplicate link {name}")));
        }
        self.adjacency
            .get_mut(&link.a)
            .unwrap()
            .insert(link.b.clone());
        self.adjacency
            .get_mut(&link.b)
            .unwrap()
            .insert(link.a.clone());
        self.links.insert(key, link);
        Ok(())
    }

    pub fn nodes(&self) -> impl Iterator<Item = &str> {
        self.nodes.iter().map(String::as_str)
    }

    pub fn contains_node(&self, node: &str) -> bool {
        self.nodes.contains(node)
    }

    /// Links in ascending endpoint order.
    pub fn links(&self) -> impl Iterator<Item = &Link> {
        self.links.values()
    }

    pub fn link(&self, a: &str, b: &str) -> Option<&Link> {
        self.links.get(&link_key(a, b))
    }

    fn neighbors(&self, node: &str) -> impl Iterator<Item = &str> {
        self.adjacency
            .get(node)
            .into_iter()
            .flatten()
            .map(String::as_str)
    }

    pub fn remove_link(&mut self, a: &str, b: &str) -> Option<Link> {
        let link = self.links.remove(&link_key(a, b))?;
        if let Some(n) = self.adjacency.get_mut(a) {
            n.remove(b);
        }
        if let Some(n) = self.adjacency.get_mut(b) {
            n.remove(a);
        }
        Some(link)
    }

    /// The topology as seen at time `t`: lifetimes become remaining
    /// lifetimes and links with nothing left are dropped.
    pub fn at_time(&self, t: f64) -> Topology {
        let mut snapshot = self.clone();
        for (key, link) in &self.links {
            let remaining = link.lifetime_s - t;
            if remaining > 0.0 {
                snapshot.links.get_mut(key).unwrap().lifetime_s = remaining;
            } else {
                snapshot.remove_link(&key.0, &key.1);
            }
        }
        snapshot
    }
}

/// Simple path from source to destination.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Route {
    nodes: Vec<String>,
}

impl Route {
    pub fn new(nodes: Vec<String>) -> Result<Self> {
        if nodes.len() < 2 {
            return Err(Error::invariant("a route needs at least two nodes"));
        }
        let distinct: BTreeSet<&String> = nodes.iter().collect();
        if distinct.len() != nodes.len() {
            return Err(Error::invariant(format!(
                "route {} repeats a node",
                nodes.join(">")
            )));
        }
        Ok(Route { nodes })
    }

    pub fn nodes(&self) -> &[String] {
        &self.nodes
    }

    pub fn hops(&self) -> usize {
        self.nodes.len() - 1
    }

    /// Node sequence joined with `>`.
    pub fn id(&self) -> RouteId {
        RouteId::new(self.nodes.join(">"))
    }
}

impl fmt::Display for Route {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.nodes.join(">"))
    }
}

/// All simple paths from `src` to `dst` with at most `hop_limit` links, in
/// lexicographic order of their node sequences.
pub fn enumerate_routes(
    t: &Topology,
    src: &str,
    dst: &str,
    hop_limit: usize,
) -> Result<Vec<Route>> {
    for node in [src, dst] {
        if !t.contains_node(node) {
            return Err(Error::invariant(format!("unknown node {node}")));
        }
    }
    if src == dst {
        return Err(Error::invariant("source and destination coincide"));
    }

    fn extend(
        t: &Topology,
        dst: &str,
        hop_limit: usize,
        path: &mut Vec<String>,
        out: &mut Vec<Route>,
    ) {
        let last = path.last().unwrap().clone();
        if last == dst {
            out.push(Route {
                nodes: path.clone(),
            });
            return;
        }
        if path.len() > hop_limit {
            return;
        }
        // neighbours come out sorted, so paths come out in lexicographic order
        for next in t.neighbors(&last) {
            if path.iter().any(|n| n == next) {
                continue;
            }
            path.push(next.to_owned());
            extend(t, dst, hop_limit, path, out);
            path.pop();
        }
    }

    let mut routes = Vec::new();
    extend(t, dst, hop_limit, &mut vec![src.to_owned()], &mut routes);
    if routes.is_empty() {
        return Err(Error::NoRoute {
            from: src.to_owned(),
            to: dst.to_owned(),
        });
    }
    Ok(routes)
}

/// Additive delay, bottleneck load, weakest-link lifetime.
pub fn path_metrics(r: &Route, t: &Topology) -> Result<RouteMetrics> {
    let mut delay = 0.0;
    let mut load = 0.0f64;
    let mut lifetime = f64::INFINITY;
    for hop in r.nodes.windows(2) {
        let link = t
            .link(&hop[0], &hop[1])
            .filter(|l| l.lifetime_s > 0.0)
            .ok_or_else(|| Error::DeadLink {
                a: hop[0].clone(),
                b: hop[1].clone(),
            })?;
        delay += link.delay_ms;
        load = load.max(link.load);
        lifetime = lifetime.min(link.lifetime_s);
    }
    RouteMetrics::new(r.id(), delay, load, lifetime)
}

/// Non-negative metric weights normalized to sum to one, in
/// (delay, load, lifetime) order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Weights([f64; 3]);

impl Weights {
    pub fn new(raw: [f64; 3]) -> Result<Self> {
        if raw.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(Error::invariant(format!(
                "weights {raw:?} must be non-negative"
            )));
        }
        let total: f64 = raw.iter().sum();
        if total <= 0.0 {
            return Err(Error::invariant("weights must not all be zero"));
        }
        Ok(Weights(raw.map(|w| w / total)))
    }

    pub fn equal() -> Self {
        Weights([1.0 / 3.0; 3])
    }

    pub fn get(&self) -> [f64; 3] {
        self.0
    }

    pub fn score(&self, benefit: &crate::membership::BenefitVector) -> f64 {
        self.0
            .iter()
            .zip(benefit.to_array())
            .map(|(w, b)| w * b)
            .sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SelectionPolicy {
    Nr2(MembershipProvider),
    WeightedSum(Weights),
    HopCount,
}

impl fmt::Display for SelectionPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SelectionPolicy::Nr2(p) => write!(f, "nr2:{}", p.name()),
            SelectionPolicy::WeightedSum(w) => {
                let [d, l, t] = w.get();
                write!(f, "weighted:{d:.4},{l:.4},{t:.4}")
            }
            SelectionPolicy::HopCount => f.write_str("hops"),
        }
    }
}

impl FromStr for SelectionPolicy {
    type Err = Error;

    /// `nr2:ratio`, `nr2:majority`, `weighted:W1,W2,W3` or `hops`.
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "nr2:ratio" => {
                return Ok(SelectionPolicy::Nr2(MembershipProvider::DesirabilityRatio(
                    None,
                )))
            }
            "nr2:majority" => {
                return Ok(SelectionPolicy::Nr2(MembershipProvider::MetricMajority(
                    None,
                )))
            }
            "hops" => return Ok(SelectionPolicy::HopCount),
            _ => {}
        }
        let weights = s
            .strip_prefix("weighted:")
            .ok_or_else(|| Error::invariant(format!("unknown policy {s:?}")))?;
        let parsed: Vec<f64> = weights
            .split(',')
            .map(|w| w.trim().parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|_| Error::invariant(format!("bad weights in {s:?}")))?;
        let raw: [f64; 3] = parsed
            .try_into()
            .map_err(|_| Error::invariant(format!("policy {s:?} needs exactly three weights")))?;
        Weights::new(raw).map(SelectionPolicy::WeightedSum)
    }
}

/// Candidate order produced by a policy; `ordering[0]` is the chosen route.
#[derive(Debug, Clone, PartialEq)]
pub struct Selection {
    /// Indices into the candidate slice, best first.
    pub ordering: Vec<usize>,
    /// Policy score of each entry of `ordering`.
    pub scores: Vec<f64>,
}

impl Selection {
    pub fn chosen(&self) -> usize {
        self.ordering[0]
    }

    fn from_ranking(r: &RouteRanking) -> Self {
        Selection {
            ordering: r.indices(),
            scores: r.scores(),
        }
    }
}

pub fn select_route(
    routes: &[Route],
    metrics: &[RouteMetrics],
    policy: &SelectionPolicy,
) -> Result<Selection> {
    if routes.is_empty() {
        return Err(Error::invariant("no candidate routes"));
    }
    if routes.len() != metrics.len() {
        return Err(Error::invariant(format!(
            "{} routes but {} metric rows",
            routes.len(),
            metrics.len()
        )));
    }
    let ids: Vec<RouteId> = metrics.iter().map(|m| m.route_id.clone()).collect();
    match policy {
        SelectionPolicy::Nr2(provider) => {
            let p = provider.pairwise(metrics)?;
            Ok(Selection::from_ranking(&rank(&p)?))
        }
        SelectionPolicy::WeightedSum(w) => {
            let scores: Vec<f64> = benefits(metrics, None)?
                .iter()
                .map(|b| w.score(b))
                .collect();
            Ok(Selection::from_ranking(&RouteRanking::from_scores(
                &ids, &scores,
            )))
        }
        SelectionPolicy::HopCount => {
            let mut ordering: Vec<usize> = (0..routes.len()).collect();
            ordering.sort_by_key(|&i| routes[i].hops());
            let scores = ordering.iter().map(|&i| routes[i].hops() as f64).collect();
            Ok(Selection { ordering, scores })
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum EventKind {
    LinkExpiry { a: String, b: String },
    Tick(u32),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Event {
    pub time: f64,
    pub kind: EventKind,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    topology: Topology,
    source: String,
    destination: String,
    hop_limit: usize,
    duration_s: f64,
    seed: u64,
    events: Vec<Event>,
}

impl Scenario {
    pub fn new(
        topology: Topology,
        source: impl Into<String>,
        destination: impl Into<String>,
        hop_limit: usize,
        duration_s: f64,
        seed: u64,
    ) -> Result<Self> {
        let source = source.into();
        let destination = destination.into();
        if source == destination {
            return Err(Error::invariant(format!(
                "source and destination are both {source}"
            )));
        }
        for node in [&source, &destination] {
            if !topology.contains_node(node) {
                return Err(Error::invariant(format!("endpoint {node} is not a node")));
            }
        }
        if hop_limit == 0 {
            return Err(Error::invariant("hop limit must be positive"));
        }
        if !(duration_s.is_finite() && duration_s > 0.0) {
            return Err(Error::invariant("duration must be positive"));
        }
        if duration_s > u32::MAX as f64 {
            return Err(Error::invariant("duration too long"));
        }
        let events = schedule(&topology, duration_s);
        Ok(Scenario {
            topology,
            source,
            destination,
            hop_limit,
            duration_s,
            seed,
            events,
        })
    }

    pub fn topology(&self) -> &Topology {
        &self.topology
    }
    pub fn source(&self) -> &str {
        &self.source
    }
    pub fn destination(&self) -> &str {
        &self.destination
    }
    pub fn hop_limit(&self) -> usize {
        self.hop_limit
    }
    pub fn duration_s(&self) -> f64 {
        self.duration_s
    }
    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Link expiries and traffic ticks, ordered by time. An expiry sorts
    /// before a tick at the same instant.
    pub fn events(&self) -> &[Event] {
        &self.events
    }

    pub fn ticks(&self) -> u32 {
        self.duration_s.ceil() as u32
    }
}

fn schedule(topology: &Topology, duration_s: f64) -> Vec<Event> {
    let mut events: Vec<Event> = topology
        .links()
        .filter(|l| l.lifetime_s < duration_s)
        .map(|l| Event {
            time: l.lifetime_s,
            kind: EventKind::LinkExpiry {
                a: l.a.clone(),
                b: l.b.clone(),
            },
        })
        .collect();
    let ticks = duration_s.ceil() as u32;
    events.extend((0..ticks).map(|k| Event {
        time: k as f64,
        kind: EventKind::Tick(k),
    }));
    // stable sort keeps link order among equal expiries
    events.sort_by(|x, y| {
        x.time.total_cmp(&y.time).then_with(|| {
            let rank = |e: &Event| matches!(e.kind, EventKind::Tick(_)) as u8;
            rank(x).cmp(&rank(y))
        })
    });
    events
}

#[derive(Debug, Clone, PartialEq)]
pub struct TickRecord {
    pub tick: u32,
    /// `None` when no route was available.
    pub route: Option<RouteId>,
    pub delay_ms: Option<f64>,
}

/// Outcome of one policy over one scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct PolicyRun {
    pub policy: String,
    pub offered: usize,
    pub delivered: usize,
    /// Mean over delivered ticks only; `None` if nothing was delivered.
    pub mean_delay_ms: Option<f64>,
    /// Ticks on which the chosen route differs from the previously chosen one.
    pub reselections: usize,
    pub log: Vec<TickRecord>,
}

impl PolicyRun {
    pub fn delivery_ratio(&self) -> f64 {
        if self.offered == 0 {
            0.0
        } else {
            self.delivered as f64 / self.offered as f64
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SimReport {
    pub runs: Vec<PolicyRun>,
}

/// Replays `s` under `policy`.
///
/// Only a misconfigured policy fails (an explicit matrix whose size does not
/// match the candidate set); unreachable destinations are lost packets.
pub fn run(s: &Scenario, policy: &SelectionPolicy) -> Result<SimReport> {
    let mut live = s.topology.clone();
    let mut log = Vec::with_capacity(s.ticks() as usize);
    let mut delivered = 0;
    let mut total_delay = 0.0;
    let mut reselections = 0;
    let mut previous: Option<RouteId> = None;

    for event in &s.events {
        let tick = match &event.kind {
            EventKind::LinkExpiry { a, b } => {
                live.remove_link(a, b);
                continue;
            }
            EventKind::Tick(k) => *k,
        };
        let view = live.at_time(event.time);
        let routes = match enumerate_routes(&view, &s.source, &s.destination, s.hop_limit) {
            Ok(routes) => routes,
            Err(Error::NoRoute { .. }) => {
                log.push(TickRecord {
                    tick,
                    route: None,
                    delay_ms: None,
                });
                continue;
            }
            Err(e) => return Err(e),
        };
        let metrics = routes
            .iter()
            .map(|r| path_metrics(r, &view))
            .collect::<Result<Vec<_>>>()?;
        let choice = select_route(&routes, &metrics, policy)?.chosen();
        let id = routes[choice].id();
        let delay = metrics[choice].delay_ms;
        if previous.as_ref().is_some_and(|p| *p != id) {
            reselections += 1;
        }
        previous = Some(id.clone());
        delivered += 1;
        total_delay += delay;
        log.push(TickRecord {
            tick,
            route: Some(id),
            delay_ms: Some(delay),
        });
    }

    Ok(SimReport {
        runs: vec![PolicyRun {
            policy: policy.to_string(),
            offered: log.len(),
            delivered,
            mean_delay_ms: (delivered > 0).then(|| total_delay / delivered as f64),
            reselections,
            log,
        }],
    })
}

/// Runs every policy over the same scenario, one thread per policy.
pub fn compare(s: &Scenario, policies: &[SelectionPolicy]) -> Result<SimReport> {
    let results: Vec<Result<SimReport>> = std::thread::scope(|scope| {
        let handles: Vec<_> = policies
            .iter()
            .map(|p| scope.spawn(move || run(s, p)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("simulation thread panicked"))
            .collect()
    });
    let mut report = SimReport::default();
    for r in results {
        report.runs.extend(r?.runs);
    }
    Ok(report)
}

/// The policy line-up used by `compare`.
pub fn standard_policies() -> Vec<SelectionPolicy> {
    vec![
        SelectionPolicy::Nr2(MembershipProvider::DesirabilityRatio(None)),
        SelectionPolicy::Nr2(MembershipProvider::MetricMajority(None)),
        SelectionPolicy::WeightedSum(Weights::equal()),
        SelectionPolicy::HopCount,
    ]
}

/// Random scenario over nodes `n0..n{n-1}` from `n0` to the last node.
///
/// Each node pair other than source and destination is linked with
/// probability one half, so delivery always takes several hops. Delays are drawn
/// from 1.0..=50.0 ms in 0.1 ms steps, loads in hundredths and lifetimes in
/// whole seconds from 5 to 40. Duration is 30 s and the hop limit 4.
pub fn random_scenario(n: usize, seed: u64) -> Result<Scenario> {
    if n < 2 {
        return Err(Error::invariant("a scenario needs at least two nodes"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let nodes: Vec<String> = (0..n).map(|i| format!("n{i}")).collect();
    let mut links = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if (i, j) != (0, n - 1) && rng.gen_bool(0.5) {
                links.push(Link {
                    a: nodes[i].clone(),
                    b: nodes[j].clone(),
                    delay_ms: rng.gen_range(10..=500) as f64 / 10.0,
                    load: rng.gen_range(0..=100) as f64 / 100.0,
                    lifetime_s: rng.gen_range(5..=40) as f64,
                });
            }
        }
    }
    let topology = Topology::new(nodes.clone(), links)?;
    Scenario::new(
        topology,
        nodes[0].clone(),
        nodes[n - 1].clone(),
        4,
        30.0,
        seed,
    )
}
