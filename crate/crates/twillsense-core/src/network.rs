//! Resistor-network compilation and effective-resistance solving.
//!
//! Every loop of conductive yarn becomes a node; yarn segments along a
//! course become resistive edges; loop intermeshing points become contact
//! edges whose resistance follows Holm's law,
//! `R = (ρ/2)·√(πH/(nP))`, falling as contact pressure rises. The effective
//! resistance between the two connector terminals comes from the
//! node-voltage system of the graph Laplacian (unit test current injected
//! at the top terminal, extracted at the bottom).

use alloc::vec;
use alloc::vec::Vec;

use crate::knit::{Bed, KnitProgram, StitchKind};
use crate::linalg;
use crate::math;

/// Material and load parameters of one loop contact.
///
/// `rho` is the material resistivity (Ω·m), `hardness` the material
/// hardness (Pa), `spot_count` the number of conducting spots per contact,
/// `pressure` the contact pressure (Pa). Contacts at or below
/// `open_threshold` are treated as open (loops lose contact under zero
/// load).
#[derive(Debug, Clone, PartialEq)]
pub struct ContactParams {
    pub rho: f64,
    pub hardness: f64,
    pub spot_count: u32,
    pub pressure: f64,
    pub open_threshold: f64,
}

impl ContactParams {
    fn validate(&self) -> Result<(), NetworkError> {
        if !(self.rho > 0.0) || !self.rho.is_finite() {
            return Err(NetworkError::InvalidContact("rho must be positive"));
        }
        if !(self.hardness > 0.0) || !self.hardness.is_finite() {
            return Err(NetworkError::InvalidContact("hardness must be positive"));
        }
        if self.spot_count == 0 {
            return Err(NetworkError::InvalidContact("spot_count must be at least 1"));
        }
        if self.pressure < 0.0 || self.open_threshold < 0.0 {
            return Err(NetworkError::InvalidContact("pressures must be non-negative"));
        }
        Ok(())
    }
}

/// Contact resistance after Holm: `(ρ/2)·√(πH/(nP))`.
///
/// Fails with [`NetworkError::ContactOpen`] when the pressure does not
/// exceed the open threshold; the caller inserts no edge in that case.
pub fn contact_resistance(p: &ContactParams) -> Result<f64, NetworkError> {
    p.validate()?;
    if p.pressure <= p.open_threshold {
        return Err(NetworkError::ContactOpen);
    }
    Ok(p.rho / 2.0
        * math::sqrt(core::f64::consts::PI * p.hardness / (p.spot_count as f64 * p.pressure)))
}

/// Rule converting a total force into per-contact pressure.
#[derive(Debug, Clone, PartialEq)]
pub enum PressureRule {
    /// Total force divided equally over all contacts through an effective
    /// contact area: `P = F / (n_contacts · area)`.
    Uniform { effective_area: f64 },
    /// Every contact sees the given pressure regardless of force.
    Fixed { pressure: f64 },
}

impl Default for PressureRule {
    fn default() -> Self {
        // 0.1 mm² effective contact area
        PressureRule::Uniform { effective_area: 1e-7 }
    }
}

/// Mechanical load applied to the patch.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadState {
    pub total_force: f64,
    pub rule: PressureRule,
}

impl LoadState {
    pub fn uniform(total_force: f64) -> Self {
        LoadState { total_force, rule: PressureRule::default() }
    }

    fn per_contact_pressure(&self, contacts: usize) -> Result<f64, NetworkError> {
        if self.total_force < 0.0 {
            return Err(NetworkError::InvalidContact("total force must be non-negative"));
        }
        match self.rule {
            PressureRule::Uniform { effective_area } => {
                if !(effective_area > 0.0) {
                    return Err(NetworkError::InvalidContact("effective area must be positive"));
                }
                if contacts == 0 {
                    Ok(0.0)
                } else {
                    Ok(self.total_force / (contacts as f64 * effective_area))
                }
            }
            PressureRule::Fixed { pressure } => Ok(pressure),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdgeKind {
    YarnSegment,
    Contact,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Edge {
    pub a: usize,
    pub b: usize,
    pub resistance: f64,
    pub kind: EdgeKind,
}

/// Resistor graph with two terminal node sets.
#[derive(Debug, Clone, PartialEq)]
pub struct ResistorGraph {
    pub node_count: usize,
    pub edges: Vec<Edge>,
    pub terminal_top: Vec<usize>,
    pub terminal_bottom: Vec<usize>,
}

impl ResistorGraph {
    pub fn contact_edge_count(&self) -> usize {
        self.edges.iter().filter(|e| e.kind == EdgeKind::Contact).count()
    }

    pub fn segment_edge_count(&self) -> usize {
        self.edges.iter().filter(|e| e.kind == EdgeKind::YarnSegment).count()
    }

    fn validate(&self) -> Result<(), NetworkError> {
        if self.terminal_top.is_empty() || self.terminal_bottom.is_empty() {
            return Err(NetworkError::InvalidGraph("terminal sets must be non-empty"));
        }
        if self.terminal_top.iter().any(|t| self.terminal_bottom.contains(t)) {
            return Err(NetworkError::InvalidGraph("terminal sets must be disjoint"));
        }
        for t in self.terminal_top.iter().chain(&self.terminal_bottom) {
            if *t >= self.node_count {
                return Err(NetworkError::InvalidGraph("terminal node out of range"));
            }
        }
        for e in &self.edges {
            if e.a == e.b {
                return Err(NetworkError::InvalidGraph("self-loop edge"));
            }
            if e.a >= self.node_count || e.b >= self.node_count {
                return Err(NetworkError::InvalidGraph("edge node out of range"));
            }
            if !(e.resistance > 0.0) || !e.resistance.is_finite() {
                return Err(NetworkError::InvalidGraph("edge resistance must be positive"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum NetworkError {
    #[error("contact pressure at or below the open threshold")]
    ContactOpen,
    #[error("open circuit: terminals not connected ({closed_contacts} closed contacts)")]
    OpenCircuit { closed_contacts: usize },
    #[error("invalid contact parameters: {0}")]
    InvalidContact(&'static str),
    #[error("invalid graph: {0}")]
    InvalidGraph(&'static str),
    #[error("invalid program: {0}")]
    InvalidProgram(&'static str),
    #[error("invalid sweep: {0}")]
    InvalidSweep(&'static str),
    #[error("linear solver failed on a valid graph")]
    SolverFailure,
}

/// Compilation knobs.
#[derive(Debug, Clone, PartialEq)]
pub struct CompileOptions {
    /// Yarn length per course segment between two needle actions (m).
    pub segment_length: f64,
    /// Connector courses whose per-segment resistance falls below this
    /// value collapse into a single ideal bus node.
    pub ideal_bus_threshold: f64,
}

impl Default for CompileOptions {
    fn default() -> Self {
        CompileOptions { segment_length: 0.005, ideal_bus_threshold: 10.0 }
    }
}

#[derive(Clone, Copy, PartialEq)]
enum Held {
    Node(usize),
    Insulating,
}

/// Compiles a stitch program into a resistor graph under the given load.
///
/// The program must contain exactly two connector courses (bottom and top
/// of the sensor field). Contact pressure is uniform across all contacts
/// per the load rule; a pressure at or below the open threshold opens every
/// contact and yields an open-circuit error.
pub fn compile_graph(
    program: &KnitProgram,
    contact: &ContactParams,
    load: &LoadState,
    opts: &CompileOptions,
) -> Result<ResistorGraph, NetworkError> {
    contact.validate()?;
    if !(opts.segment_length > 0.0) {
        return Err(NetworkError::InvalidContact("segment length must be positive"));
    }
    program
        .validate()
        .map_err(|_| NetworkError::InvalidProgram("program fails knit invariants"))?;
    let connectors = program.connector_courses();
    if connectors.len() != 2 {
        return Err(NetworkError::InvalidProgram("program needs exactly two connector courses"));
    }
    let (bottom_course, top_course) = (connectors[0], connectors[1]);

    let width = program.width as usize;
    let mut held = [vec![None::<Held>; width], vec![None::<Held>; width]];
    let bed_idx = |bed: Bed| match bed {
        Bed::Front => 0usize,
        Bed::Back => 1usize,
    };

    let mut node_count = 0usize;
    let mut segments: Vec<(usize, usize, f64)> = Vec::new();
    let mut contacts: Vec<(usize, usize)> = Vec::new();
    let mut terminal_top = Vec::new();
    let mut terminal_bottom = Vec::new();

    for (ci, course) in program.courses.iter().enumerate() {
        let yarn = &program.yarns[course.yarn];
        let lin_res = yarn.linear_resistance;
        let is_connector = ci == bottom_course || ci == top_course;
        let ideal_bus = is_connector
            && lin_res.map(|r| r * opts.segment_length < opts.ideal_bus_threshold).unwrap_or(false);

        let mut bus_node: Option<usize> = None;
        let mut prev: Option<usize> = None;
        let mut course_first: Option<usize> = None;

        for action in &course.actions {
            let n = action.needle as usize;
            match lin_res {
                None => {
                    // insulating yarn carries no nodes; a knit still replaces
                    // the held loop and breaks the wale's conductive chain
                    if action.op.kind == StitchKind::Knit {
                        held[bed_idx(action.op.bed)][n] = Some(Held::Insulating);
                    }
                }
                Some(r_per_m) => {
                    if !(r_per_m > 0.0) {
                        return Err(NetworkError::InvalidProgram(
                            "conductive yarn needs positive linear resistance",
                        ));
                    }
                    if action.op.kind == StitchKind::Float {
                        continue;
                    }
                    let node = if ideal_bus {
                        *bus_node.get_or_insert_with(|| {
                            let id = node_count;
                            node_count += 1;
                            id
                        })
                    } else {
                        let id = node_count;
                        node_count += 1;
                        id
                    };
                    if course_first.is_none() {
                        course_first = Some(node);
                    }
                    if let Some(p) = prev {
                        if p != node {
                            segments.push((p, node, r_per_m * opts.segment_length));
                        }
                    }
                    let bed = bed_idx(action.op.bed);
                    match action.op.kind {
                        StitchKind::Knit => {
                            if let Some(Held::Node(m)) = held[bed][n] {
                                if m != node {
                                    contacts.push((m, node));
                                }
                            }
                            held[bed][n] = Some(Held::Node(node));
                        }
                        StitchKind::Tuck => {
                            if let Some(Held::Node(m)) = held[bed][n] {
                                if m != node {
                                    contacts.push((m, node));
                                }
                            }
                        }
                        StitchKind::Float => unreachable!(),
                    }
                    prev = Some(node);
                }
            }
        }

        if is_connector {
            let terminal = match course_first {
                Some(first) => first,
                None => {
                    return Err(NetworkError::InvalidProgram(
                        "connector course has no conductive actions",
                    ))
                }
            };
            if ci == bottom_course {
                terminal_bottom.push(terminal);
            } else {
                terminal_top.push(terminal);
            }
        }
    }

    // uniform pressure over all intermeshing points
    let pressure = load.per_contact_pressure(contacts.len())?;
    let closed = pressure > contact.open_threshold;
    let mut edges: Vec<Edge> = segments
        .into_iter()
        .map(|(a, b, resistance)| Edge { a, b, resistance, kind: EdgeKind::YarnSegment })
        .collect();
    if closed {
        let r_contact = contact_resistance(&ContactParams { pressure, ..contact.clone() })?;
        edges.extend(
            contacts
                .iter()
                .map(|&(a, b)| Edge { a, b, resistance: r_contact, kind: EdgeKind::Contact }),
        );
    }

    let graph = ResistorGraph { node_count, edges, terminal_top, terminal_bottom };
    graph.validate()?;
    if !terminals_connected(&graph) {
        let closed_contacts = if closed { graph.contact_edge_count() } else { 0 };
        return Err(NetworkError::OpenCircuit { closed_contacts });
    }
    Ok(graph)
}

fn adjacency(graph: &ResistorGraph) -> Vec<Vec<usize>> {
    let mut adj = vec![Vec::new(); graph.node_count];
    for e in &graph.edges {
        adj[e.a].push(e.b);
        adj[e.b].push(e.a);
    }
    adj
}

fn terminals_connected(graph: &ResistorGraph) -> bool {
    if graph.node_count == 0 {
        return false;
    }
    let adj = adjacency(graph);
    let mut seen = vec![false; graph.node_count];
    let mut stack: Vec<usize> = graph.terminal_bottom.clone();
    for &s in &stack {
        seen[s] = true;
    }
    while let Some(v) = stack.pop() {
        for &w in &adj[v] {
            if !seen[w] {
                seen[w] = true;
                stack.push(w);
            }
        }
    }
    graph.terminal_top.iter().any(|&t| seen[t])
}

/// Node count above which the solver switches from dense factorization to
/// conjugate gradients.
const DENSE_LIMIT: usize = 2000;
const CG_TOL: f64 = 1e-10;

/// Effective resistance between the two terminal sets.
///
/// Each terminal set is contracted to an equipotential super-node, a unit
/// test current is injected at the top and extracted at the bottom, the
/// node-voltage system is solved and the voltage difference is the
/// resistance.
pub fn effective_resistance(graph: &ResistorGraph) -> Result<f64, NetworkError> {
    graph.validate()?;

    // contract terminal sets
    let mut rep: Vec<usize> = (0..graph.node_count).collect();
    let bottom = graph.terminal_bottom[0];
    let top = graph.terminal_top[0];
    for &t in &graph.terminal_bottom {
        rep[t] = bottom;
    }
    for &t in &graph.terminal_top {
        rep[t] = top;
    }

    // reachable component from the grounded terminal
    let mut adj: Vec<Vec<(usize, f64)>> = vec![Vec::new(); graph.node_count];
    for e in &graph.edges {
        let (a, b) = (rep[e.a], rep[e.b]);
        if a == b {
            continue;
        }
        let g = 1.0 / e.resistance;
        adj[a].push((b, g));
        adj[b].push((a, g));
    }
    let mut seen = vec![false; graph.node_count];
    seen[bottom] = true;
    let mut stack = vec![bottom];
    while let Some(v) = stack.pop() {
        for &(w, _) in &adj[v] {
            if !seen[w] {
                seen[w] = true;
                stack.push(w);
            }
        }
    }
    if !seen[top] {
        return Err(NetworkError::OpenCircuit { closed_contacts: graph.contact_edge_count() });
    }

    // index the unknowns: reachable nodes minus ground
    let mut index = vec![usize::MAX; graph.node_count];
    let mut unknowns = Vec::new();
    for v in 0..graph.node_count {
        if seen[v] && v != bottom && rep[v] == v {
            index[v] = unknowns.len();
            unknowns.push(v);
        }
    }
    let n = unknowns.len();
    if n == 0 {
        return Err(NetworkError::InvalidGraph("no unknown nodes after grounding"));
    }

    let top_idx = index[top];
    let potential = if n <= DENSE_LIMIT {
        let mut a = vec![0.0; n * n];
        for (i, &v) in unknowns.iter().enumerate() {
            let mut diag = 0.0;
            for &(w, g) in &adj[v] {
                diag += g;
                if w != bottom {
                    a[i * n + index[w]] -= g;
                }
            }
            a[i * n + i] = diag;
        }
        let mut b = vec![0.0; n];
        b[top_idx] = 1.0;
        linalg::cholesky_solve(&mut a, &mut b, n).ok_or(NetworkError::SolverFailure)?;
        b[top_idx]
    } else {
        let mut diag = vec![0.0; n];
        let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        for (i, &v) in unknowns.iter().enumerate() {
            for &(w, g) in &adj[v] {
                diag[i] += g;
                if w != bottom {
                    rows[i].push((index[w], -g));
                }
            }
        }
        let m = linalg::SparseSym { diag, rows };
        let mut b = vec![0.0; n];
        b[top_idx] = 1.0;
        let x = linalg::cg_solve(&m, &b, CG_TOL, 20 * n).ok_or(NetworkError::SolverFailure)?;
        x[top_idx]
    };

    if !(potential > 0.0) || !potential.is_finite() {
        return Err(NetworkError::SolverFailure);
    }
    Ok(potential)
}

/// One entry of a force sweep: `resistance` is `None` when the patch is an
/// open circuit at that force.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub force: f64,
    pub resistance: Option<f64>,
}

/// Effective resistance across a list of forces (non-negative, ascending).
pub fn sweep_force(
    program: &KnitProgram,
    contact: &ContactParams,
    forces: &[f64],
    rule: &PressureRule,
    opts: &CompileOptions,
) -> Result<Vec<SweepPoint>, NetworkError> {
    if forces.is_empty() {
        return Err(NetworkError::InvalidSweep("force list is empty"));
    }
    let mut prev = f64::NEG_INFINITY;
    for &f in forces {
        if f < 0.0 {
            return Err(NetworkError::InvalidSweep("forces must be non-negative"));
        }
        if f < prev {
            return Err(NetworkError::InvalidSweep("forces must be ascending"));
        }
        prev = f;
    }
    let mut out = Vec::with_capacity(forces.len());
    for &force in forces {
        let load = LoadState { total_force: force, rule: rule.clone() };
        match compile_graph(program, contact, &load, opts) {
            Ok(graph) => out.push(SweepPoint {
                force,
                resistance: Some(effective_resistance(&graph)?),
            }),
            Err(NetworkError::OpenCircuit { .. }) => {
                out.push(SweepPoint { force, resistance: None })
            }
            Err(e) => return Err(e),
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::knit::{build_grid, build_variant, variant, VariantName};
    use alloc::vec;
    use approx::assert_relative_eq;
    use rand_chacha::ChaCha8Rng;
    use rand::{Rng, SeedableRng};

    fn closed_contact() -> ContactParams {
        ContactParams {
            rho: 1e-3,
            hardness: 1e8,
            spot_count: 4,
            pressure: 0.0,
            open_threshold: 0.0,
        }
    }

    #[test]
    fn holm_direct_substitution() {
        let p = ContactParams {
            rho: 2.0,
            hardness: core::f64::consts::PI,
            spot_count: 1,
            pressure: 1.0,
            open_threshold: 0.0,
        };
        assert_relative_eq!(
            contact_resistance(&p).unwrap(),
            core::f64::consts::PI,
            max_relative = 1e-15
        );
        let p4 = ContactParams { spot_count: 4, ..p.clone() };
        assert_relative_eq!(
            contact_resistance(&p4).unwrap(),
            core::f64::consts::PI / 2.0,
            max_relative = 1e-15
        );
    }

    #[test]
    fn holm_quadrupled_pressure_halves_resistance() {
        let base = ContactParams {
            rho: 0.7,
            hardness: 3.3e7,
            spot_count: 3,
            pressure: 5.0,
            open_threshold: 0.0,
        };
        let quad = ContactParams { pressure: 20.0, ..base.clone() };
        let r1 = contact_resistance(&base).unwrap();
        let r2 = contact_resistance(&quad).unwrap();
        assert_relative_eq!(r2, r1 / 2.0, max_relative = 1e-12);
    }

    #[test]
    fn holm_open_below_threshold() {
        let p = ContactParams {
            rho: 1.0,
            hardness: 1.0,
            spot_count: 1,
            pressure: 0.5,
            open_threshold: 0.5,
        };
        assert_eq!(contact_resistance(&p).unwrap_err(), NetworkError::ContactOpen);
    }

    #[test]
    fn single_edge_is_its_resistance() {
        let g = ResistorGraph {
            node_count: 2,
            edges: vec![Edge { a: 0, b: 1, resistance: 5.0, kind: EdgeKind::Contact }],
            terminal_top: vec![0],
            terminal_bottom: vec![1],
        };
        assert_relative_eq!(effective_resistance(&g).unwrap(), 5.0, max_relative = 1e-12);
    }

    #[test]
    fn balanced_wheatstone_bridge() {
        // terminals 0 and 3; bridge edge 1-2 carries no current
        let r = 7.5;
        let e = |a, b| Edge { a, b, resistance: r, kind: EdgeKind::YarnSegment };
        let g = ResistorGraph {
            node_count: 4,
            edges: vec![e(0, 1), e(0, 2), e(1, 3), e(2, 3), e(1, 2)],
            terminal_top: vec![0],
            terminal_bottom: vec![3],
        };
        assert_relative_eq!(effective_resistance(&g).unwrap(), r, max_relative = 1e-12);
    }

    #[test]
    fn disconnected_terminals_report_open() {
        let g = ResistorGraph {
            node_count: 4,
            edges: vec![Edge { a: 0, b: 1, resistance: 1.0, kind: EdgeKind::YarnSegment }],
            terminal_top: vec![2],
            terminal_bottom: vec![0],
        };
        assert!(matches!(
            effective_resistance(&g).unwrap_err(),
            NetworkError::OpenCircuit { .. }
        ));
    }

    /// Independent oracle: full Gauss-Jordan elimination with partial
    /// pivoting on the grounded node-conductance system.
    fn dense_elimination_oracle(graph: &ResistorGraph) -> f64 {
        let n = graph.node_count;
        let ground = graph.terminal_bottom[0];
        let inject = graph.terminal_top[0];
        let mut l = vec![vec![0.0f64; n]; n];
        for e in &graph.edges {
            let g = 1.0 / e.resistance;
            l[e.a][e.a] += g;
            l[e.b][e.b] += g;
            l[e.a][e.b] -= g;
            l[e.b][e.a] -= g;
        }
        // retain all rows but ground; variables likewise
        let vars: Vec<usize> = (0..n).filter(|&v| v != ground).collect();
        let m = vars.len();
        let mut a = vec![vec![0.0f64; m + 1]; m];
        for (i, &vi) in vars.iter().enumerate() {
            for (j, &vj) in vars.iter().enumerate() {
                a[i][j] = l[vi][vj];
            }
            a[i][m] = if vi == inject { 1.0 } else { 0.0 };
        }
        for col in 0..m {
            let piv = (col..m)
                .max_by(|&x, &y| a[x][col].abs().partial_cmp(&a[y][col].abs()).unwrap())
                .unwrap();
            a.swap(col, piv);
            let p = a[col][col];
            assert!(p.abs() > 1e-14, "singular oracle system");
            for j in col..=m {
                a[col][j] /= p;
            }
            for row in 0..m {
                if row != col && a[row][col] != 0.0 {
                    let f = a[row][col];
                    for j in col..=m {
                        a[row][j] -= f * a[col][j];
                    }
                }
            }
        }
        let idx = vars.iter().position(|&v| v == inject).unwrap();
        a[idx][m]
    }

    fn random_graph(rng: &mut ChaCha8Rng, nodes: usize) -> ResistorGraph {
        // spanning tree plus extra edges keeps terminals connected
        let mut edges = Vec::new();
        for v in 1..nodes {
            let u = rng.random_range(0..v);
            edges.push(Edge {
                a: u,
                b: v,
                resistance: rng.random_range(0.1..100.0),
                kind: EdgeKind::YarnSegment,
            });
        }
        let extra = rng.random_range(0..nodes);
        for _ in 0..extra {
            let a = rng.random_range(0..nodes);
            let b = rng.random_range(0..nodes);
            if a != b {
                edges.push(Edge {
                    a,
                    b,
                    resistance: rng.random_range(0.1..100.0),
                    kind: EdgeKind::Contact,
                });
            }
        }
        ResistorGraph {
            node_count: nodes,
            edges,
            terminal_top: vec![nodes - 1],
            terminal_bottom: vec![0],
        }
    }

    #[test]
    fn random_6_node_matches_dense_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for _ in 0..50 {
            let g = random_graph(&mut rng, 6);
            let fast = effective_resistance(&g).unwrap();
            let slow = dense_elimination_oracle(&g);
            assert_relative_eq!(fast, slow, max_relative = 1e-9);
        }
    }

    #[test]
    fn scaling_edges_scales_resistance() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let g = random_graph(&mut rng, 9);
        let r1 = effective_resistance(&g).unwrap();
        let mut scaled = g.clone();
        for e in scaled.edges.iter_mut() {
            e.resistance *= 3.5;
        }
        let r2 = effective_resistance(&scaled).unwrap();
        assert_relative_eq!(r2, 3.5 * r1, max_relative = 1e-12);
    }

    #[test]
    fn twill_2x2_two_parallel_contact_chains() {
        let program = build_variant(&variant(VariantName::PTh), 2, 2).unwrap();
        let contact = closed_contact();
        let load = LoadState { total_force: 10.0, rule: PressureRule::default() };
        let g = compile_graph(&program, &contact, &load, &CompileOptions::default()).unwrap();
        // each wale holds one sensor loop contacting both buses: two
        // parallel chains of two contacts each
        assert_eq!(g.contact_edge_count(), 4);
        let pressure = load.per_contact_pressure(4).unwrap();
        let r_c =
            contact_resistance(&ContactParams { pressure, ..contact.clone() }).unwrap();
        let r = effective_resistance(&g).unwrap();
        assert_relative_eq!(r, r_c, max_relative = 1e-12);
    }

    #[test]
    fn grid_interior_edge_counts() {
        // sensor rows w x h: contacts between sensor courses w*(h-1),
        // segments (w-1)*h; plus w contacts into each bus
        let (w, h) = (5u32, 4u32);
        let program = build_grid(w, h).unwrap();
        let g = compile_graph(
            &program,
            &closed_contact(),
            &LoadState::uniform(10.0),
            &CompileOptions::default(),
        )
        .unwrap();
        let (w, h) = (w as usize, h as usize);
        assert_eq!(g.contact_edge_count(), w * (h - 1) + 2 * w);
        assert_eq!(g.segment_edge_count(), (w - 1) * h);
        assert_eq!(g.node_count, w * h + 2);
    }

    #[test]
    fn zero_force_with_threshold_is_open() {
        let program = build_grid(4, 4).unwrap();
        let contact = ContactParams { open_threshold: 1.0, ..closed_contact() };
        let err = compile_graph(
            &program,
            &contact,
            &LoadState::uniform(0.0),
            &CompileOptions::default(),
        )
        .unwrap_err();
        assert_eq!(err, NetworkError::OpenCircuit { closed_contacts: 0 });
    }

    #[test]
    fn ou_scaling_on_uniform_grids() {
        let contact = closed_contact();
        let opts = CompileOptions::default();
        let rule = PressureRule::Fixed { pressure: 1e6 };
        let r_of = |wales: u32, courses: u32| {
            let program = build_grid(wales, courses).unwrap();
            let load = LoadState { total_force: 10.0, rule: rule.clone() };
            effective_resistance(&compile_graph(&program, &contact, &load, &opts).unwrap())
                .unwrap()
        };
        // contact layers = total course count - 1 = sensor courses + 1
        let base = r_of(4, 5);
        assert_relative_eq!(r_of(8, 5), base / 2.0, max_relative = 1e-9);
        assert_relative_eq!(r_of(4, 11), base * 2.0, max_relative = 1e-9);
    }

    #[test]
    fn sweep_quadrupled_force_halves_resistance() {
        let program = build_grid(4, 4).unwrap();
        let contact = closed_contact();
        let points = sweep_force(
            &program,
            &contact,
            &[2.0, 8.0],
            &PressureRule::default(),
            &CompileOptions::default(),
        )
        .unwrap();
        let r1 = points[0].resistance.unwrap();
        let r4 = points[1].resistance.unwrap();
        assert_relative_eq!(r4, r1 / 2.0, max_relative = 1e-9);
    }

    #[test]
    fn sweep_monotone_on_variant() {
        let program = build_variant(&variant(VariantName::PPr), 8, 8).unwrap();
        let forces: Vec<f64> = (1..=10).map(|i| i as f64 * 2.0).collect();
        let points = sweep_force(
            &program,
            &closed_contact(),
            &forces,
            &PressureRule::default(),
            &CompileOptions::default(),
        )
        .unwrap();
        let rs: Vec<f64> = points.iter().map(|p| p.resistance.unwrap()).collect();
        for pair in rs.windows(2) {
            assert!(pair[1] <= pair[0] * (1.0 + 1e-12));
        }
    }

    #[test]
    fn sweep_open_entry_and_ordering_checks() {
        let program = build_grid(3, 3).unwrap();
        let contact = ContactParams { open_threshold: 1.0, ..closed_contact() };
        let points = sweep_force(
            &program,
            &contact,
            &[0.0],
            &PressureRule::default(),
            &CompileOptions::default(),
        )
        .unwrap();
        assert_eq!(points[0].resistance, None);
        assert!(matches!(
            sweep_force(
                &program,
                &contact,
                &[2.0, 1.0],
                &PressureRule::default(),
                &CompileOptions::default()
            ),
            Err(NetworkError::InvalidSweep(_))
        ));
    }

    #[test]
    fn compile_rejects_missing_connectors() {
        let program =
            crate::knit::build_twill(4, 4, crate::knit::YarnSpec::default_sensor()).unwrap();
        let err = compile_graph(
            &program,
            &closed_contact(),
            &LoadState::uniform(1.0),
            &CompileOptions::default(),
        )
        .unwrap_err();
        assert!(matches!(err, NetworkError::InvalidProgram(_)));
    }

    #[test]
    fn cg_path_matches_analytic_grid() {
        // above the dense limit the solver switches to conjugate gradients
        let (w, c) = (50u32, 45u32);
        let program = build_grid(w, c).unwrap();
        let contact = closed_contact();
        let load = LoadState { total_force: 10.0, rule: PressureRule::Fixed { pressure: 1e6 } };
        let graph =
            compile_graph(&program, &contact, &load, &CompileOptions::default()).unwrap();
        assert!(graph.node_count > 2000);
        let pressure = 1e6;
        let r_c =
            contact_resistance(&ContactParams { pressure, ..contact.clone() }).unwrap();
        let expected = r_c * (c as f64 + 1.0) / w as f64;
        let r = effective_resistance(&graph).unwrap();
        assert_relative_eq!(r, expected, max_relative = 1e-9);
    }

    /// All simple terminal-to-terminal paths by DFS: (count, min resistance).
    fn simple_paths(graph: &ResistorGraph) -> (usize, f64) {
        let mut adj: Vec<Vec<(usize, f64)>> = vec![Vec::new(); graph.node_count];
        for e in &graph.edges {
            adj[e.a].push((e.b, e.resistance));
            adj[e.b].push((e.a, e.resistance));
        }
        let target = graph.terminal_top[0];
        let mut visited = vec![false; graph.node_count];
        let mut count = 0usize;
        let mut best = f64::INFINITY;
        fn dfs(
            v: usize,
            target: usize,
            acc: f64,
            adj: &[Vec<(usize, f64)>],
            visited: &mut [bool],
            count: &mut usize,
            best: &mut f64,
        ) {
            if v == target {
                *count += 1;
                *best = best.min(acc);
                return;
            }
            visited[v] = true;
            for &(w, r) in &adj[v] {
                if !visited[w] {
                    dfs(w, target, acc + r, adj, visited, count, best);
                }
            }
            visited[v] = false;
        }
        dfs(
            graph.terminal_bottom[0],
            target,
            0.0,
            &adj,
            &mut visited,
            &mut count,
            &mut best,
        );
        (count, best)
    }

    #[test]
    fn effective_resistance_path_envelope() {
        // min_path/N <= R_eff <= min_path, cross-checked with the oracle
        let mut rng = ChaCha8Rng::seed_from_u64(314);
        for _ in 0..30 {
            let g = random_graph(&mut rng, 9);
            let r = effective_resistance(&g).unwrap();
            assert_relative_eq!(r, dense_elimination_oracle(&g), max_relative = 1e-9);
            let (count, min_path) = simple_paths(&g);
            assert!(count >= 1);
            assert!(r <= min_path * (1.0 + 1e-12), "above single-path bound");
            assert!(
                r >= min_path / count as f64 * (1.0 - 1e-12),
                "below parallel-path bound"
            );
        }
    }

    proptest::proptest! {
        #![proptest_config(proptest::prelude::ProptestConfig::with_cases(64))]
        #[test]
        fn scaling_property_on_random_graphs(seed in 0u64..1000, scale in 0.1f64..10.0) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let g = random_graph(&mut rng, 7);
            let r1 = effective_resistance(&g).unwrap();
            let mut scaled = g.clone();
            for e in scaled.edges.iter_mut() {
                e.resistance *= scale;
            }
            let r2 = effective_resistance(&scaled).unwrap();
            proptest::prop_assert!((r2 - scale * r1).abs() <= 1e-9 * (scale * r1));
        }
    }

    #[test]
    fn rayleigh_monotonicity_against_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for _ in 0..20 {
            let g = random_graph(&mut rng, 8);
            let r0 = effective_resistance(&g).unwrap();
            for skip in 0..g.edges.len() {
                let mut cut = g.clone();
                cut.edges.remove(skip);
                match effective_resistance(&cut) {
                    Ok(r) => assert!(r >= r0 * (1.0 - 1e-9)),
                    Err(NetworkError::OpenCircuit { .. }) => {}
                    Err(e) => panic!("unexpected error: {e}"),
                }
            }
        }
    }
}
