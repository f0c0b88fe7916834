//! Combinatorial oriented link diagrams: PD codes, braid closures,
//! mirrors, resolutions and the circles they produce.
//!
//! PD convention: `X[a,b,c,d]` lists the four arc labels counterclockwise
//! starting from the incoming under-arc, with arcs numbered along the
//! orientation (Knot-Atlas style). Arc labels are 1-based; a diagram with
//! n crossings uses labels 1..2n, and crossing-free unknot components get
//! the labels after those.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::KhError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Marking {
    pub arc: usize,
    #[serde(default)]
    pub offset: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Crossing {
    /// Arc labels counterclockwise from the incoming under-arc.
    pub slots: [usize; 4],
    /// +1 or -1 once orientation is fixed.
    pub sign: i8,
}

#[derive(Clone, Debug)]
pub struct LinkDiagram {
    crossings: Vec<Crossing>,
    /// Arc labels of 0-crossing unknot components.
    free_loop_arcs: Vec<usize>,
    /// All arc labels, ascending.
    arcs: Vec<usize>,
    /// Oriented arc cycles, one per link component.
    components: Vec<Vec<usize>>,
    component_of_arc: HashMap<usize, usize>,
    /// slot_in[c][s] == true when the arc in that slot flows into the crossing.
    slot_in: Vec<[bool; 4]>,
    markings: Vec<Marking>,
    basepoint: Option<Marking>,
}

#[derive(Clone, Debug)]
pub struct ResolvedState {
    pub vertex: Vec<u8>,
    /// Circles as ascending arc lists, sorted by smallest arc.
    pub circles: Vec<Vec<usize>>,
    pub circle_of_arc: HashMap<usize, usize>,
    pub circle_of_marking: Vec<usize>,
    pub circle_of_basepoint: Option<usize>,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct DiagramJson {
    #[serde(default)]
    pub pd: Vec<[usize; 4]>,
    #[serde(default)]
    pub free_loops: usize,
    #[serde(default)]
    pub markings: Vec<Marking>,
    #[serde(default)]
    pub basepoint: Option<Marking>,
}

// ---------------------------------------------------------------------
// union-find with parity, for orientation solving
struct ParityUf {
    parent: Vec<usize>,
    parity: Vec<u8>, // parity relative to parent
}

impl ParityUf {
    fn new(n: usize) -> Self {
        ParityUf { parent: (0..n).collect(), parity: vec![0; n] }
    }

    fn find(&mut self, x: usize) -> (usize, u8) {
        if self.parent[x] == x {
            return (x, 0);
        }
        let (root, p) = self.find(self.parent[x]);
        self.parent[x] = root;
        self.parity[x] ^= p;
        (root, self.parity[x])
    }

    /// Enforce role(x) XOR role(y) == p. Returns false on conflict.
    fn union(&mut self, x: usize, y: usize, p: u8) -> bool {
        let (rx, px) = self.find(x);
        let (ry, py) = self.find(y);
        if rx == ry {
            return px ^ py == p;
        }
        self.parent[rx] = ry;
        self.parity[rx] = px ^ py ^ p;
        true
    }
}

struct SimpleUf {
    parent: Vec<usize>,
}

impl SimpleUf {
    fn new(n: usize) -> Self {
        SimpleUf { parent: (0..n).collect() }
    }
    fn find(&mut self, x: usize) -> usize {
        if self.parent[x] == x {
            x
        } else {
            let r = self.find(self.parent[x]);
            self.parent[x] = r;
            r
        }
    }
    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra] = rb;
        }
    }
}

impl LinkDiagram {
    // -----------------------------------------------------------------
    // construction

    /// Parse a PD expression (`X[1,3,2,4] X[3,1,4,2]`) or the JSON
    /// diagram format when the text starts with `{`.
    pub fn parse_pd(text: &str) -> Result<LinkDiagram, KhError> {
        let trimmed = text.trim();
        if trimmed.starts_with('{') {
            let json: DiagramJson = serde_json::from_str(trimmed)
                .map_err(|e| KhError::Parse(format!("bad diagram JSON: {e}")))?;
            return LinkDiagram::from_json(&json);
        }
        if trimmed.is_empty() {
            return Err(KhError::Parse(
                "empty PD code; use the JSON form with `free_loops` for crossingless diagrams"
                    .into(),
            ));
        }
        let records = parse_pd_text(trimmed)?;
        LinkDiagram::from_records(records, 0, vec![], None)
    }

    pub fn from_json(json: &DiagramJson) -> Result<LinkDiagram, KhError> {
        LinkDiagram::from_records(
            json.pd.clone(),
            json.free_loops,
            json.markings.clone(),
            json.basepoint,
        )
    }

    pub fn to_json(&self) -> DiagramJson {
        DiagramJson {
            pd: self.crossings.iter().map(|c| c.slots).collect(),
            free_loops: self.free_loop_arcs.len(),
            markings: self.markings.clone(),
            basepoint: self.basepoint,
        }
    }

    /// Validate raw PD records, solve orientations, compute components.
    pub fn from_records(
        records: Vec<[usize; 4]>,
        free_loops: usize,
        markings: Vec<Marking>,
        basepoint: Option<Marking>,
    ) -> Result<LinkDiagram, KhError> {
        let n = records.len();
        let max_label = 2 * n;

        // label multiplicity
        let mut uses: BTreeMap<usize, Vec<(usize, usize)>> = BTreeMap::new();
        for (ci, rec) in records.iter().enumerate() {
            for (s, &a) in rec.iter().enumerate() {
                if a == 0 || a > max_label {
                    return Err(KhError::Validation(format!(
                        "arc label {a} out of range 1..{max_label} at crossing {}",
                        ci + 1
                    )));
                }
                uses.entry(a).or_default().push((ci, s));
            }
        }
        for a in 1..=max_label {
            let count = uses.get(&a).map_or(0, |v| v.len());
            if count != 2 {
                return Err(KhError::Validation(format!(
                    "arc {a} appears {count} times (every arc must appear exactly twice)"
                )));
            }
        }

        // orientation solving: one node per slot plus a root meaning "in"
        let root = 4 * n;
        let mut uf = ParityUf::new(4 * n + 1);
        let conflict = |what: String| KhError::Validation(format!("inconsistent orientation: {what}"));
        for ci in 0..n {
            if !uf.union(4 * ci, root, 0) {
                return Err(conflict(format!("under-in slot of crossing {}", ci + 1)));
            }
            if !uf.union(4 * ci + 2, root, 1) {
                return Err(conflict(format!("under-out slot of crossing {}", ci + 1)));
            }
            if !uf.union(4 * ci + 1, 4 * ci + 3, 1) {
                return Err(conflict(format!("over strand of crossing {}", ci + 1)));
            }
        }
        for occ in uses.values() {
            let (c0, s0) = occ[0];
            let (c1, s1) = occ[1];
            if !uf.union(4 * c0 + s0, 4 * c1 + s1, 1) {
                return Err(conflict(format!("arc {}", records[c0][s0])));
            }
        }
        // tie-break ambiguous over-strands by sequential numbering:
        // the over strand runs b -> d when d == b+1 or wraps high -> low
        for ci in 0..n {
            let (rb, _) = uf.find(4 * ci + 1);
            let (rroot, _) = uf.find(root);
            if rb == rroot {
                continue;
            }
            let b = records[ci][1];
            let d = records[ci][3];
            let b_in = d == b + 1 || b > d + 1;
            if !uf.union(4 * ci + 1, root, if b_in { 0 } else { 1 }) {
                return Err(conflict(format!("over strand of crossing {}", ci + 1)));
            }
        }

        let mut slot_in = vec![[false; 4]; n];
        for ci in 0..n {
            for s in 0..4 {
                let (r, p) = uf.find(4 * ci + s);
                let (rroot, proot) = uf.find(root);
                debug_assert_eq!(r, rroot);
                slot_in[ci][s] = p == proot;
            }
        }

        let crossings: Vec<Crossing> = records
            .iter()
            .enumerate()
            .map(|(ci, rec)| Crossing {
                slots: *rec,
                // positive crossing: the over strand enters at slot d
                sign: if slot_in[ci][3] { 1 } else { -1 },
            })
            .collect();

        // oriented components by traversal
        let mut in_slot: HashMap<usize, (usize, usize)> = HashMap::new();
        for ci in 0..n {
            for s in 0..4 {
                if slot_in[ci][s] {
                    in_slot.insert(records[ci][s], (ci, s));
                }
            }
        }
        let mut components = vec![];
        let mut seen: HashMap<usize, bool> = HashMap::new();
        for start in 1..=max_label {
            if seen.contains_key(&start) {
                continue;
            }
            let mut cycle = vec![];
            let mut arc = start;
            loop {
                if seen.insert(arc, true).is_some() {
                    return Err(KhError::Validation(format!(
                        "component through arc {start} does not close up"
                    )));
                }
                cycle.push(arc);
                let &(ci, s) = in_slot.get(&arc).ok_or_else(|| {
                    KhError::Validation(format!("arc {arc} has no incoming occurrence"))
                })?;
                let out = match s {
                    0 => 2,
                    1 => 3,
                    3 => 1,
                    _ => {
                        return Err(KhError::Internal(format!(
                            "arc {arc} flows into an out-slot"
                        )))
                    }
                };
                arc = records[ci][out];
                if arc == start {
                    break;
                }
            }
            components.push(cycle);
        }

        let free_loop_arcs: Vec<usize> = (max_label + 1..=max_label + free_loops).collect();
        for &a in &free_loop_arcs {
            components.push(vec![a]);
        }

        let mut arcs: Vec<usize> = (1..=max_label).collect();
        arcs.extend(&free_loop_arcs);

        let mut component_of_arc = HashMap::new();
        for (k, comp) in components.iter().enumerate() {
            for &a in comp {
                component_of_arc.insert(a, k);
            }
        }

        let d = LinkDiagram {
            crossings,
            free_loop_arcs,
            arcs,
            components,
            component_of_arc,
            slot_in,
            markings: vec![],
            basepoint: None,
        };
        let d = d.with_markings(markings, basepoint)?;
        Ok(d)
    }

    /// Replace the marking data, re-validating it against the arcs.
    pub fn with_markings(
        mut self,
        markings: Vec<Marking>,
        basepoint: Option<Marking>,
    ) -> Result<LinkDiagram, KhError> {
        let mut seen: HashMap<(usize, usize), &str> = HashMap::new();
        let mut check = |m: &Marking, what: &'static str| -> Result<(), KhError> {
            if !self.component_of_arc.contains_key(&m.arc) {
                return Err(KhError::Validation(format!(
                    "{what} references arc {} which does not exist",
                    m.arc
                )));
            }
            if seen.insert((m.arc, m.offset), what).is_some() {
                return Err(KhError::Validation(format!(
                    "duplicate marking point at arc {} offset {}",
                    m.arc, m.offset
                )));
            }
            Ok(())
        };
        for m in &markings {
            check(m, "marking")?;
        }
        if let Some(bp) = &basepoint {
            check(bp, "basepoint")?;
        }
        self.markings = markings;
        self.basepoint = basepoint;
        Ok(self)
    }

    /// Closure of a braid word over `s1..s(strands-1)`; inverses are
    /// written `-s1` or `s1^-1`. Arcs are renumbered along orientation.
    pub fn parse_braid(word: &str, strands: usize) -> Result<LinkDiagram, KhError> {
        if strands < 1 {
            return Err(KhError::Parse("strand count must be at least 1".into()));
        }
        let letters = parse_braid_word(word, strands)?;

        // temp arc ids; closure identifies bottom with top per position
        let mut next_id = strands;
        let mut cur: Vec<usize> = (0..strands).collect();
        // record: slots as temp ids, plus per-slot in-flags by construction
        struct Rec {
            slots: [usize; 4],
            slot_in: [bool; 4],
        }
        let mut recs: Vec<Rec> = vec![];
        for (idx, positive) in letters {
            let u = cur[idx - 1];
            let v = cur[idx];
            let w = next_id;
            let x = next_id + 1;
            next_id += 2;
            if positive {
                // strand from position idx-1 passes over (u -> x); the
                // under strand v -> w reads counterclockwise as [v,x,w,u]
                recs.push(Rec { slots: [v, x, w, u], slot_in: [true, false, false, true] });
            } else {
                // v passes over (v -> w); under u -> x reads [u,v,x,w]
                recs.push(Rec { slots: [u, v, x, w], slot_in: [true, true, false, false] });
            }
            cur[idx - 1] = w;
            cur[idx] = x;
        }
        let mut uf = SimpleUf::new(next_id);
        for pos in 0..strands {
            uf.union(cur[pos], pos);
        }

        // arc classes and their slot occurrences
        let mut occ_in: HashMap<usize, (usize, usize)> = HashMap::new();
        let mut occ_out: HashMap<usize, (usize, usize)> = HashMap::new();
        for (ci, r) in recs.iter().enumerate() {
            for s in 0..4 {
                let class = uf.find(r.slots[s]);
                if r.slot_in[s] {
                    occ_in.insert(class, (ci, s));
                } else {
                    occ_out.insert(class, (ci, s));
                }
            }
        }

        // number arcs sequentially along each component
        let mut label: HashMap<usize, usize> = HashMap::new();
        let mut next_label = 1;
        for start_pos in 0..strands {
            let start = uf.find(start_pos);
            if label.contains_key(&start) || !occ_in.contains_key(&start) {
                continue;
            }
            let mut class = start;
            loop {
                label.insert(class, next_label);
                next_label += 1;
                let &(ci, s) = occ_in.get(&class).expect("arc with no incoming slot");
                let out = match s {
                    0 => 2,
                    1 => 3,
                    3 => 1,
                    _ => unreachable!(),
                };
                class = uf.find(recs[ci].slots[out]);
                if class == start {
                    break;
                }
            }
        }
        let mut free_classes = std::collections::HashSet::new();
        for p in 0..strands {
            let c = uf.find(p);
            if !occ_in.contains_key(&c) && c == uf.find(cur[p]) {
                free_classes.insert(c);
            }
        }
        let free_loops = free_classes.len();

        let records: Vec<[usize; 4]> = recs
            .iter()
            .map(|r| {
                let mut out = [0usize; 4];
                for s in 0..4 {
                    out[s] = label[&uf.find(r.slots[s])];
                }
                out
            })
            .collect();

        let d = LinkDiagram::from_records(records, free_loops, vec![], None)?;
        // the construction fixes every sign; cross-check against the word
        debug_assert!(d
            .crossings
            .iter()
            .zip(letters_signs(word, strands))
            .all(|(c, s)| c.sign == s));
        Ok(d)
    }

    /// Switch every crossing. The cyclic reading is re-rooted at the old
    /// over-in arc, so the 0/1 resolutions swap roles.
    pub fn mirror(&self) -> LinkDiagram {
        let records: Vec<[usize; 4]> = self
            .crossings
            .iter()
            .map(|c| {
                let [a, b, cc, d] = c.slots;
                if c.sign > 0 {
                    // over strand entered at d; it becomes the under-in
                    [d, a, b, cc]
                } else {
                    [b, cc, d, a]
                }
            })
            .collect();
        LinkDiagram::from_records(
            records,
            self.free_loop_arcs.len(),
            self.markings.clone(),
            self.basepoint,
        )
        .expect("mirror of a valid diagram is valid")
    }

    /// Circles of the resolved diagram for a 0/1 vector over crossings.
    pub fn resolve(&self, v: &[u8]) -> Result<ResolvedState, KhError> {
        if v.len() != self.crossings.len() {
            return Err(KhError::Validation(format!(
                "resolution vector has length {} but the diagram has {} crossings",
                v.len(),
                self.crossings.len()
            )));
        }
        // union-find over arc labels (1-based; index by label directly)
        let top = self.arcs.iter().copied().max().unwrap_or(0);
        let mut uf = SimpleUf::new(top + 1);
        for (c, &choice) in self.crossings.iter().zip(v) {
            let [a, b, cc, d] = c.slots;
            if choice == 0 {
                uf.union(a, b);
                uf.union(cc, d);
            } else {
                uf.union(a, d);
                uf.union(b, cc);
            }
        }
        let mut by_root: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for &a in &self.arcs {
            by_root.entry(uf.find(a)).or_default().push(a);
        }
        let mut circles: Vec<Vec<usize>> = by_root.into_values().collect();
        for c in &mut circles {
            c.sort_unstable();
        }
        circles.sort_by_key(|c| c[0]);
        let mut circle_of_arc = HashMap::new();
        for (i, c) in circles.iter().enumerate() {
            for &a in c {
                circle_of_arc.insert(a, i);
            }
        }
        let circle_of_marking = self.markings.iter().map(|m| circle_of_arc[&m.arc]).collect();
        let circle_of_basepoint = self.basepoint.map(|bp| circle_of_arc[&bp.arc]);
        Ok(ResolvedState {
            vertex: v.to_vec(),
            circles,
            circle_of_arc,
            circle_of_marking,
            circle_of_basepoint,
        })
    }

    pub fn render_pd(&self) -> String {
        self.crossings
            .iter()
            .map(|c| {
                let [a, b, cc, d] = c.slots;
                format!("X[{a},{b},{cc},{d}]")
            })
            .collect::<Vec<_>>()
            .join(" ")
    }

    // -----------------------------------------------------------------
    // accessors

    pub fn crossings(&self) -> &[Crossing] {
        &self.crossings
    }

    /// Which slots of crossing `c` carry inward-flowing arcs.
    pub fn slot_orientations(&self, c: usize) -> [bool; 4] {
        self.slot_in[c]
    }

    pub fn crossing_count(&self) -> usize {
        self.crossings.len()
    }

    pub fn n_plus(&self) -> usize {
        self.crossings.iter().filter(|c| c.sign > 0).count()
    }

    pub fn n_minus(&self) -> usize {
        self.crossings.iter().filter(|c| c.sign < 0).count()
    }

    pub fn arcs(&self) -> &[usize] {
        &self.arcs
    }

    pub fn free_loops(&self) -> usize {
        self.free_loop_arcs.len()
    }

    pub fn components(&self) -> &[Vec<usize>] {
        &self.components
    }

    pub fn component_count(&self) -> usize {
        self.components.len()
    }

    pub fn component_of_arc(&self, arc: usize) -> Option<usize> {
        self.component_of_arc.get(&arc).copied()
    }

    pub fn markings(&self) -> &[Marking] {
        &self.markings
    }

    pub fn basepoint(&self) -> Option<Marking> {
        self.basepoint
    }

    pub fn component_of_marking(&self, idx: usize) -> usize {
        self.component_of_arc[&self.markings[idx].arc]
    }
}

fn parse_pd_text(text: &str) -> Result<Vec<[usize; 4]>, KhError> {
    let mut records = vec![];
    let mut rest = text;
    let mut pos = 0usize;
    loop {
        let trimmed = rest.trim_start_matches([' ', '\t', '\n', ',', ';']);
        pos += rest.len() - trimmed.len();
        rest = trimmed;
        if rest.is_empty() {
            break;
        }
        if !(rest.starts_with("X[") || rest.starts_with("x[")) {
            return Err(KhError::Parse(format!(
                "expected `X[a,b,c,d]` at position {pos}, found `{}`",
                rest.chars().take(12).collect::<String>()
            )));
        }
        let close = rest.find(']').ok_or_else(|| {
            KhError::Parse(format!("unclosed `[` in crossing starting at position {pos}"))
        })?;
        let inner = &rest[2..close];
        let labels: Result<Vec<usize>, _> = inner
            .split(',')
            .map(|t| t.trim().parse::<usize>())
            .collect();
        let labels = labels.map_err(|_| {
            KhError::Parse(format!("bad arc label in `X[{inner}]` at position {pos}"))
        })?;
        if labels.len() != 4 {
            return Err(KhError::Parse(format!(
                "crossing `X[{inner}]` has {} labels, expected 4",
                labels.len()
            )));
        }
        records.push([labels[0], labels[1], labels[2], labels[3]]);
        pos += close + 1;
        rest = &rest[close + 1..];
    }
    Ok(records)
}

fn parse_braid_word(word: &str, strands: usize) -> Result<Vec<(usize, bool)>, KhError> {
    let mut letters = vec![];
    for tok in word.split_whitespace() {
        let (body, mut positive) = match tok.strip_prefix('-') {
            Some(b) => (b, false),
            None => (tok, true),
        };
        let body = match body.strip_suffix("^-1") {
            Some(b) => {
                positive = !positive;
                b
            }
            None => body,
        };
        let idx: usize = body
            .strip_prefix(['s', 'S'])
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| KhError::Parse(format!("bad braid generator `{tok}`")))?;
        if idx == 0 || idx >= strands {
            return Err(KhError::Parse(format!(
                "generator s{idx} out of range for {strands} strands"
            )));
        }
        letters.push((idx, positive));
    }
    Ok(letters)
}

fn letters_signs(word: &str, strands: usize) -> Vec<i8> {
    parse_braid_word(word, strands)
        .map(|ls| ls.iter().map(|&(_, p)| if p { 1 } else { -1 }).collect())
        .unwrap_or_default()
}
