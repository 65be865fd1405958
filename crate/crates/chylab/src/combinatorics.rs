//! Exact combinatorics of the n-gon and of flag simplicial complexes.
//!
//! Vertices of the polygon are labelled `1..=n`. A diagonal `(i, j)` with
//! `i < j` separates the leaves `{i, .., j-1}` from the rest, which is how
//! it doubles as an internal edge of a planar tree.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(from = "[usize; 2]", into = "[usize; 2]")]
pub struct Diagonal {
    pub i: usize,
    pub j: usize,
}

impl From<[usize; 2]> for Diagonal {
    fn from(v: [usize; 2]) -> Self {
        Diagonal { i: v[0].min(v[1]), j: v[0].max(v[1]) }
    }
}

impl From<Diagonal> for [usize; 2] {
    fn from(d: Diagonal) -> Self {
        [d.i, d.j]
    }
}

impl std::fmt::Display for Diagonal {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{},{}", self.i, self.j)
    }
}

impl Diagonal {
    /// Builds the diagonal joining vertices `a` and `b` of the n-gon, in
    /// either order.
    pub fn new(n: usize, a: usize, b: usize) -> Result<Self> {
        let (i, j) = (a.min(b), a.max(b));
        if n < 4 {
            return Err(Error::InvalidPolygon(n));
        }
        if i < 1 || j > n || j - i < 2 || j - i == n - 1 {
            return Err(Error::InvalidDiagonal { n, i: a, j: b });
        }
        Ok(Diagonal { i, j })
    }

    /// Endpoints interleave strictly around the circle.
    pub fn crosses(&self, other: &Diagonal) -> bool {
        let (a, b, c, d) = (self.i, self.j, other.i, other.j);
        (a < c && c < b && b < d) || (c < a && a < d && d < b)
    }

    /// Leaves on the `i` side of the cut: `{i, .., j-1}`.
    pub fn leaves(&self) -> Vec<usize> {
        (self.i..self.j).collect()
    }

    /// Image under the relabelling `v -> v + k (mod n)`.
    pub fn rotate(&self, n: usize, k: usize) -> Diagonal {
        let r = |v: usize| (v - 1 + k) % n + 1;
        Diagonal::from([r(self.i), r(self.j)])
    }

    /// Parses the `"i,j"` key format used in JSON maps.
    pub fn parse_key(n: usize, key: &str) -> Result<Self> {
        let parts: Vec<&str> = key.split(',').map(str::trim).collect();
        if parts.len() != 2 {
            return Err(Error::InvalidInput(format!("bad diagonal key {key:?}")));
        }
        let parse = |s: &str| {
            s.parse::<usize>()
                .map_err(|_| Error::InvalidInput(format!("bad diagonal key {key:?}")))
        };
        Diagonal::new(n, parse(parts[0])?, parse(parts[1])?)
    }
}

/// Cyclic adjacency of two polygon vertices.
pub fn adjacent(n: usize, a: usize, b: usize) -> bool {
    let d = a.abs_diff(b);
    d == 1 || d == n - 1
}

/// All diagonals of the n-gon in lexicographic order.
pub fn diagonals(n: usize) -> Result<Vec<Diagonal>> {
    if n < 4 {
        return Err(Error::InvalidPolygon(n));
    }
    let mut out = Vec::with_capacity(n * (n - 3) / 2);
    for i in 1..=n {
        for j in i + 2..=n {
            if !(i == 1 && j == n) {
                out.push(Diagonal { i, j });
            }
        }
    }
    Ok(out)
}

/// A set of pairwise non-crossing diagonals, stored sorted.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Subdivision {
    pub n: usize,
    pub diagonals: Vec<Diagonal>,
}

/// A subdivision with exactly `n - 3` diagonals.
pub type Triangulation = Subdivision;

impl Subdivision {
    pub fn new(n: usize, mut diagonals: Vec<Diagonal>) -> Result<Self> {
        if n < 4 {
            return Err(Error::InvalidPolygon(n));
        }
        for d in &diagonals {
            Diagonal::new(n, d.i, d.j)?;
        }
        diagonals.sort();
        diagonals.dedup();
        for (a, d) in diagonals.iter().enumerate() {
            for e in &diagonals[a + 1..] {
                if d.crosses(e) {
                    return Err(Error::InvalidInput(format!("diagonals ({d}) and ({e}) cross")));
                }
            }
        }
        Ok(Subdivision { n, diagonals })
    }

    pub fn empty(n: usize) -> Self {
        Subdivision { n, diagonals: Vec::new() }
    }

    pub fn is_triangulation(&self) -> bool {
        self.diagonals.len() + 3 == self.n
    }

    pub fn contains(&self, d: &Diagonal) -> bool {
        self.diagonals.binary_search(d).is_ok()
    }

    /// The fan `{(1,3), (1,4), .., (1,n-1)}`.
    pub fn fan(n: usize) -> Self {
        Subdivision { n, diagonals: (3..n).map(|j| Diagonal { i: 1, j }).collect() }
    }

    pub fn rotate(&self, k: usize) -> Self {
        let mut diagonals: Vec<Diagonal> = self.diagonals.iter().map(|d| d.rotate(self.n, k)).collect();
        diagonals.sort();
        Subdivision { n: self.n, diagonals }
    }

    fn is_edge(&self, a: usize, b: usize) -> bool {
        adjacent(self.n, a, b) || self.contains(&Diagonal::from([a, b]))
    }

    /// Polygonal cells of the subdivision, each as a cyclic vertex list.
    pub fn cells(&self) -> Vec<Vec<usize>> {
        fn split(poly: Vec<usize>, diags: &[Diagonal], out: &mut Vec<Vec<usize>>) {
            let m = poly.len();
            for d in diags {
                let p = poly.iter().position(|&v| v == d.i);
                let q = poly.iter().position(|&v| v == d.j);
                if let (Some(p), Some(q)) = (p, q) {
                    let (p, q) = (p.min(q), p.max(q));
                    if q - p >= 2 && q - p != m - 1 {
                        let first = poly[p..=q].to_vec();
                        let mut second = poly[q..].to_vec();
                        second.extend_from_slice(&poly[..=p]);
                        split(first, diags, out);
                        split(second, diags, out);
                        return;
                    }
                }
            }
            out.push(poly);
        }
        let mut out = Vec::new();
        split((1..=self.n).collect(), &self.diagonals, &mut out);
        out
    }
}

fn catalan(m: usize) -> usize {
    let mut c = 1usize;
    for k in 0..m {
        c = c * 2 * (2 * k + 1) / (k + 2);
    }
    c
}

/// Catalan number `C_m`.
pub fn catalan_number(m: usize) -> usize {
    catalan(m)
}

/// All triangulations, lexicographic on sorted diagonal lists.
pub fn enumerate_triangulations(n: usize) -> Result<Vec<Triangulation>> {
    if n < 4 {
        return Err(Error::InvalidPolygon(n));
    }
    // Triangulations of the polygon on consecutive vertices lo..=hi.
    fn rec(lo: usize, hi: usize, memo: &mut HashMap<(usize, usize), Vec<Vec<Diagonal>>>) -> Vec<Vec<Diagonal>> {
        if hi - lo < 2 {
            return vec![Vec::new()];
        }
        if let Some(v) = memo.get(&(lo, hi)) {
            return v.clone();
        }
        let mut out = Vec::new();
        for k in lo + 1..hi {
            let left = rec(lo, k, memo);
            let right = rec(k, hi, memo);
            for l in &left {
                for r in &right {
                    let mut d = l.clone();
                    d.extend_from_slice(r);
                    if k - lo >= 2 {
                        d.push(Diagonal { i: lo, j: k });
                    }
                    if hi - k >= 2 {
                        d.push(Diagonal { i: k, j: hi });
                    }
                    out.push(d);
                }
            }
        }
        memo.insert((lo, hi), out.clone());
        out
    }
    let mut memo = HashMap::new();
    let mut all: Vec<Triangulation> = rec(1, n, &mut memo)
        .into_iter()
        .map(|mut d| {
            d.sort();
            Subdivision { n, diagonals: d }
        })
        .collect();
    all.sort();
    Ok(all)
}

/// All subdivisions (faces of the associahedron complex), including the
/// empty one, lexicographic on sorted diagonal lists.
pub fn enumerate_subdivisions(n: usize) -> Result<Vec<Subdivision>> {
    let diags = diagonals(n)?;
    let mut out = Vec::new();
    let mut current = Vec::new();
    fn rec(k: usize, diags: &[Diagonal], current: &mut Vec<Diagonal>, out: &mut Vec<Vec<Diagonal>>) {
        if k == diags.len() {
            out.push(current.clone());
            return;
        }
        rec(k + 1, diags, current, out);
        if current.iter().all(|d| !d.crosses(&diags[k])) {
            current.push(diags[k]);
            rec(k + 1, diags, current, out);
            current.pop();
        }
    }
    rec(0, &diags, &mut current, &mut out);
    let mut subs: Vec<Subdivision> = out.into_iter().map(|d| Subdivision { n, diagonals: d }).collect();
    subs.sort();
    Ok(subs)
}

/// Replaces `d` by the other diagonal of the quadrilateral formed by the two
/// triangles of `t` adjacent to `d`.
pub fn flip(t: &Triangulation, d: &Diagonal) -> Result<Triangulation> {
    if !t.is_triangulation() {
        return Err(Error::InvalidFlip("not a triangulation".into()));
    }
    if !t.contains(d) {
        return Err(Error::InvalidFlip(format!("({d}) is not in the triangulation")));
    }
    let n = t.n;
    let apex = |inside: bool| {
        (1..=n).find(|&k| {
            let between = d.i < k && k < d.j;
            between == inside && k != d.i && k != d.j && t.is_edge(d.i, k) && t.is_edge(k, d.j)
        })
    };
    let (a, b) = match (apex(true), apex(false)) {
        (Some(a), Some(b)) => (a, b),
        _ => return Err(Error::InvalidFlip(format!("no quadrilateral around ({d})"))),
    };
    let new = Diagonal::from([a, b]);
    let mut diagonals: Vec<Diagonal> = t.diagonals.iter().copied().filter(|e| e != d).collect();
    diagonals.push(new);
    diagonals.sort();
    Ok(Subdivision { n, diagonals })
}

/// Orientation of the associahedron complex: one sign per triangulation,
/// relative to its diagonals taken in sorted order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Orientation {
    pub n: usize,
    pub signs: BTreeMap<Triangulation, i8>,
}

impl Orientation {
    pub fn sign(&self, t: &Triangulation) -> Option<i8> {
        self.signs.get(t).copied()
    }

    /// Sign of the wedge taken in the given diagonal order.
    pub fn sign_in_order(&self, t: &Triangulation, order: &[Diagonal]) -> Option<i8> {
        let base = self.sign(t)?;
        let pos: Vec<usize> = order.iter().map(|d| t.diagonals.binary_search(d).ok()).collect::<Option<_>>()?;
        Some(base * permutation_sign(&pos))
    }
}

/// Sign of a permutation given as a list of distinct positions.
pub fn permutation_sign(perm: &[usize]) -> i8 {
    let mut inversions = 0usize;
    for a in 0..perm.len() {
        for b in a + 1..perm.len() {
            if perm[a] > perm[b] {
                inversions += 1;
            }
        }
    }
    if inversions % 2 == 0 {
        1
    } else {
        -1
    }
}

fn flip_sign(t: &Triangulation, s: i8, d: &Diagonal, t2: &Triangulation, d2: &Diagonal) -> i8 {
    let k = t.diagonals.binary_search(d).unwrap_or(0);
    let k2 = t2.diagonals.binary_search(d2).unwrap_or(0);
    let parity = if (k + k2) % 2 == 0 { 1 } else { -1 };
    -s * parity
}

/// Propagates signs over the flip graph from the fan triangulation (sign +1),
/// checking every flip edge for coherence.
pub fn orientation_signs(n: usize) -> Result<Orientation> {
    orientation_from_root(&Subdivision::fan(n), 1)
}

/// Same propagation started from an arbitrary triangulation.
pub fn orientation_from_root(root: &Triangulation, root_sign: i8) -> Result<Orientation> {
    let n = root.n;
    if n < 4 {
        return Err(Error::InvalidPolygon(n));
    }
    if !root.is_triangulation() {
        return Err(Error::InvalidInput("root is not a triangulation".into()));
    }
    let mut signs: BTreeMap<Triangulation, i8> = BTreeMap::new();
    signs.insert(root.clone(), root_sign);
    let mut queue = VecDeque::from([root.clone()]);
    while let Some(t) = queue.pop_front() {
        let s = signs[&t];
        for d in &t.diagonals {
            let t2 = flip(&t, d)?;
            let d2 = *t2.diagonals.iter().find(|e| !t.contains(e)).expect("flip adds a diagonal");
            let s2 = flip_sign(&t, s, d, &t2, &d2);
            match signs.get(&t2) {
                Some(&existing) if existing != s2 => {
                    return Err(Error::OrientationInconsistent(format!("{:?}", t2.diagonals)));
                }
                Some(_) => {}
                None => {
                    signs.insert(t2.clone(), s2);
                    queue.push_back(t2);
                }
            }
        }
    }
    Ok(Orientation { n, signs })
}

/// Dual planar tree of a subdivision. Nodes `0..n` are the leaves (leaf `k`
/// is node `k-1`, attached to side `(k, k+1)`); the remaining nodes are the
/// cells.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlanarTree {
    pub n: usize,
    pub edges: Vec<Diagonal>,
    pub adjacency: Vec<Vec<usize>>,
}

impl PlanarTree {
    pub fn internal_degrees(&self) -> Vec<usize> {
        self.adjacency[self.n..].iter().map(Vec::len).collect()
    }

    pub fn is_cubic(&self) -> bool {
        self.internal_degrees().iter().all(|&d| d == 3)
    }

    /// Reads the internal-edge splits back off the adjacency structure.
    pub fn splits(&self) -> Vec<Diagonal> {
        let n = self.n;
        let mut out = Vec::new();
        for a in n..self.adjacency.len() {
            for &b in &self.adjacency[a] {
                if b > a {
                    // Leaves reachable from b without crossing back to a.
                    let mut seen = BTreeSet::from([a, b]);
                    let mut stack = vec![b];
                    let mut leaves = BTreeSet::new();
                    while let Some(v) = stack.pop() {
                        if v < n {
                            leaves.insert(v + 1);
                        }
                        for &w in &self.adjacency[v] {
                            if seen.insert(w) {
                                stack.push(w);
                            }
                        }
                    }
                    if leaves.contains(&n) {
                        leaves = (1..=n).filter(|l| !leaves.contains(l)).collect();
                    }
                    let lo = *leaves.iter().next().expect("nonempty split");
                    let hi = *leaves.iter().next_back().expect("nonempty split");
                    out.push(Diagonal { i: lo, j: hi + 1 });
                }
            }
        }
        out.sort();
        out
    }
}

pub fn subdivision_to_tree(s: &Subdivision) -> PlanarTree {
    let n = s.n;
    let cells = s.cells();
    let mut adjacency = vec![Vec::new(); n + cells.len()];
    let mut by_diagonal: HashMap<Diagonal, Vec<usize>> = HashMap::new();
    for (c, cell) in cells.iter().enumerate() {
        let node = n + c;
        for k in 0..cell.len() {
            let (x, y) = (cell[k], cell[(k + 1) % cell.len()]);
            if adjacent(n, x, y) {
                let leaf = if x.max(y) == n && x.min(y) == 1 { n } else { x.min(y) };
                adjacency[node].push(leaf - 1);
                adjacency[leaf - 1].push(node);
            } else {
                by_diagonal.entry(Diagonal::from([x, y])).or_default().push(node);
            }
        }
    }
    for nodes in by_diagonal.values() {
        adjacency[nodes[0]].push(nodes[1]);
        adjacency[nodes[1]].push(nodes[0]);
    }
    for a in &mut adjacency {
        a.sort();
    }
    PlanarTree { n, edges: s.diagonals.clone(), adjacency }
}

pub fn triangulation_to_tree(t: &Triangulation) -> Result<PlanarTree> {
    if !t.is_triangulation() {
        return Err(Error::InvalidInput("not a triangulation".into()));
    }
    Ok(subdivision_to_tree(t))
}

/// Checks that `alpha` is a permutation of `1..=n`.
pub fn validate_permutation(alpha: &[usize]) -> Result<()> {
    let n = alpha.len();
    let mut seen = vec![false; n + 1];
    for &a in alpha {
        if a == 0 || a > n || seen[a] {
            return Err(Error::InvalidInput(format!("{alpha:?} is not a permutation of 1..{n}")));
        }
        seen[a] = true;
    }
    Ok(())
}

/// Whether a leaf set is a contiguous arc of the cyclic order `alpha`.
pub fn is_cyclic_interval(alpha: &[usize], set: &[usize]) -> bool {
    let n = alpha.len();
    let m = set.len();
    if m == 0 || m >= n {
        return true;
    }
    let inside: BTreeSet<usize> = set.iter().copied().collect();
    let links = (0..n)
        .filter(|&k| inside.contains(&alpha[k]) && inside.contains(&alpha[(k + 1) % n]))
        .count();
    links == m - 1
}

/// Triangulations whose dual tree is planar for both `1 2 .. n` and `alpha`.
pub fn compatible_trees(alpha: &[usize]) -> Result<Vec<Triangulation>> {
    validate_permutation(alpha)?;
    let n = alpha.len();
    Ok(enumerate_triangulations(n)?
        .into_iter()
        .filter(|t| t.diagonals.iter().all(|d| is_cyclic_interval(alpha, &d.leaves())))
        .collect())
}

/// Eulerian number with 1-based second index: the number of permutations of
/// `m` letters with `k - 1` ascents, so that `E(3, ·) = (1, 4, 1)`.
pub fn eulerian(m: usize, k: usize) -> u128 {
    if m == 0 || k == 0 || k > m {
        return 0;
    }
    let mut row = vec![1u128];
    for size in 2..=m {
        let mut next = vec![0u128; size];
        for (j, slot) in next.iter_mut().enumerate() {
            let keep = if j < row.len() { (j as u128 + 1) * row[j] } else { 0 };
            let grow = if j >= 1 { (size - j) as u128 * row[j - 1] } else { 0 };
            *slot = keep + grow;
        }
        row = next;
    }
    row[k - 1]
}

/// A simplicial complex given by its facets over labelled vertices.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "ComplexJson", into = "ComplexJson")]
pub struct SimplicialComplex {
    pub vertices: Vec<String>,
    pub facets: Vec<Vec<usize>>,
}

#[derive(Serialize, Deserialize)]
struct ComplexJson {
    vertices: Vec<String>,
    facets: Vec<Vec<String>>,
}

impl TryFrom<ComplexJson> for SimplicialComplex {
    type Error = Error;
    fn try_from(j: ComplexJson) -> Result<Self> {
        SimplicialComplex::from_labels(j.vertices, j.facets)
    }
}

impl From<SimplicialComplex> for ComplexJson {
    fn from(c: SimplicialComplex) -> Self {
        let facets = c.facets.iter().map(|f| f.iter().map(|&v| c.vertices[v].clone()).collect()).collect();
        ComplexJson { vertices: c.vertices, facets }
    }
}

impl SimplicialComplex {
    /// Facets are sorted, deduplicated and reduced to the maximal ones.
    pub fn new(vertices: Vec<String>, facets: Vec<Vec<usize>>) -> Result<Self> {
        let mut fs: Vec<Vec<usize>> = Vec::new();
        for mut f in facets {
            if f.iter().any(|&v| v >= vertices.len()) {
                return Err(Error::InvalidInput(format!("facet {f:?} uses an unknown vertex")));
            }
            f.sort();
            f.dedup();
            fs.push(f);
        }
        fs.sort();
        fs.dedup();
        let maximal: Vec<Vec<usize>> = fs
            .iter()
            .filter(|f| !fs.iter().any(|g| g.len() > f.len() && is_subset(f, g)))
            .cloned()
            .collect();
        Ok(SimplicialComplex { vertices, facets: maximal })
    }

    pub fn from_labels(vertices: Vec<String>, facets: Vec<Vec<String>>) -> Result<Self> {
        let index: HashMap<&str, usize> = vertices.iter().enumerate().map(|(k, v)| (v.as_str(), k)).collect();
        let facets = facets
            .iter()
            .map(|f| {
                f.iter()
                    .map(|l| index.get(l.as_str()).copied().ok_or_else(|| Error::InvalidInput(format!("unknown vertex {l:?}"))))
                    .collect::<Result<Vec<usize>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        SimplicialComplex::new(vertices, facets)
    }

    /// The complex of non-crossing diagonal sets of the n-gon, with
    /// vertices labelled `"i,j"` in lexicographic order.
    pub fn associahedron(n: usize) -> Result<Self> {
        let diags = diagonals(n)?;
        let index: HashMap<Diagonal, usize> = diags.iter().enumerate().map(|(k, d)| (*d, k)).collect();
        let facets = enumerate_triangulations(n)?
            .iter()
            .map(|t| t.diagonals.iter().map(|d| index[d]).collect())
            .collect();
        SimplicialComplex::new(diags.iter().map(|d| d.to_string()).collect(), facets)
    }

    pub fn vertex_index(&self, label: &str) -> Option<usize> {
        self.vertices.iter().position(|v| v == label)
    }

    pub fn labels_to_face(&self, labels: &[&str]) -> Result<Vec<usize>> {
        labels
            .iter()
            .map(|l| self.vertex_index(l).ok_or_else(|| Error::InvalidFace(format!("unknown vertex {l:?}"))))
            .collect()
    }

    pub fn dim(&self) -> isize {
        self.facets.iter().map(|f| f.len() as isize).max().unwrap_or(0) - 1
    }

    pub fn is_face(&self, f: &[usize]) -> bool {
        let mut f = f.to_vec();
        f.sort();
        f.dedup();
        if f.is_empty() {
            return true;
        }
        self.facets.iter().any(|g| is_subset(&f, g))
    }

    pub fn compatible(&self, a: usize, b: usize) -> bool {
        a == b || self.facets.iter().any(|f| f.binary_search(&a).is_ok() && f.binary_search(&b).is_ok())
    }

    /// Every face, including the empty one, in sorted order.
    pub fn faces(&self) -> Vec<Vec<usize>> {
        let mut all = BTreeSet::new();
        all.insert(Vec::new());
        for f in &self.facets {
            for mask in 1u64..(1u64 << f.len()) {
                let g: Vec<usize> = (0..f.len()).filter(|b| mask >> b & 1 == 1).map(|b| f[b]).collect();
                all.insert(g);
            }
        }
        all.into_iter().collect()
    }

    /// `lk(f) = {G : G ∩ f = ∅, G ∪ f ∈ Δ}` over the surviving vertices.
    pub fn link(&self, f: &[usize]) -> Result<SimplicialComplex> {
        if !self.is_face(f) {
            return Err(Error::InvalidFace(format!("{f:?} is not a face")));
        }
        let mut f = f.to_vec();
        f.sort();
        let rests: Vec<Vec<usize>> = self
            .facets
            .iter()
            .filter(|g| is_subset(&f, g))
            .map(|g| g.iter().copied().filter(|v| f.binary_search(v).is_err()).collect())
            .collect();
        let kept: BTreeSet<usize> = rests.iter().flatten().copied().collect();
        let kept: Vec<usize> = kept.into_iter().collect();
        let remap: HashMap<usize, usize> = kept.iter().enumerate().map(|(k, &v)| (v, k)).collect();
        let vertices = kept.iter().map(|&v| self.vertices[v].clone()).collect();
        let facets = rests.iter().map(|g| g.iter().map(|v| remap[v]).collect()).collect();
        SimplicialComplex::new(vertices, facets)
    }

    pub fn is_pure(&self) -> bool {
        let mut sizes = self.facets.iter().map(Vec::len);
        match sizes.next() {
            Some(s) => sizes.all(|t| t == s),
            None => true,
        }
    }

    /// Pure, and every codimension-one face lies in exactly two facets.
    pub fn is_pseudomanifold(&self) -> bool {
        if !self.is_pure() || self.facets.is_empty() {
            return false;
        }
        let mut counts: BTreeMap<Vec<usize>, usize> = BTreeMap::new();
        for f in &self.facets {
            for skip in 0..f.len() {
                let ridge: Vec<usize> = f.iter().enumerate().filter(|&(k, _)| k != skip).map(|(_, &v)| v).collect();
                *counts.entry(ridge).or_default() += 1;
            }
        }
        counts.values().all(|&c| c == 2)
    }

    /// Every set of pairwise compatible vertices is a face; checked on the
    /// maximal cliques of the compatibility graph.
    pub fn is_flag(&self) -> bool {
        let m = self.vertices.len();
        let nbrs: Vec<BTreeSet<usize>> = (0..m)
            .map(|a| (0..m).filter(|&b| b != a && self.compatible(a, b)).collect())
            .collect();
        let mut ok = true;
        bron_kerbosch(&nbrs, BTreeSet::new(), (0..m).collect(), BTreeSet::new(), &mut |clique| {
            let c: Vec<usize> = clique.iter().copied().collect();
            if !self.is_face(&c) {
                ok = false;
            }
        });
        ok
    }
}

fn bron_kerbosch(
    nbrs: &[BTreeSet<usize>],
    r: BTreeSet<usize>,
    mut p: BTreeSet<usize>,
    mut x: BTreeSet<usize>,
    report: &mut dyn FnMut(&BTreeSet<usize>),
) {
    if p.is_empty() && x.is_empty() {
        if !r.is_empty() {
            report(&r);
        }
        return;
    }
    for v in p.clone() {
        let mut r2 = r.clone();
        r2.insert(v);
        let p2 = p.intersection(&nbrs[v]).copied().collect();
        let x2 = x.intersection(&nbrs[v]).copied().collect();
        bron_kerbosch(nbrs, r2, p2, x2, report);
        p.remove(&v);
        x.insert(v);
    }
}

fn is_subset(a: &[usize], b: &[usize]) -> bool {
    a.iter().all(|v| b.binary_search(v).is_ok())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d(i: usize, j: usize) -> Diagonal {
        Diagonal { i, j }
    }

    #[test]
    fn diagonal_lists() {
        assert_eq!(diagonals(4).unwrap(), vec![d(1, 3), d(2, 4)]);
        assert_eq!(diagonals(5).unwrap(), vec![d(1, 3), d(1, 4), d(2, 4), d(2, 5), d(3, 5)]);
        assert_eq!(diagonals(6).unwrap().len(), 9);
        assert_eq!(diagonals(3), Err(Error::InvalidPolygon(3)));
        for n in 4..=12 {
            assert_eq!(diagonals(n).unwrap().len(), n * (n - 3) / 2);
        }
    }

    #[test]
    fn diagonal_validation() {
        assert!(Diagonal::new(5, 1, 2).is_err());
        assert!(Diagonal::new(5, 1, 5).is_err());
        assert!(Diagonal::new(5, 0, 3).is_err());
        assert_eq!(Diagonal::new(5, 4, 2).unwrap(), d(2, 4));
    }

    #[test]
    fn crossing() {
        assert!(d(1, 3).crosses(&d(2, 4)));
        assert!(d(2, 4).crosses(&d(1, 3)));
        assert!(!d(1, 3).crosses(&d(1, 4)));
        assert!(!d(1, 3).crosses(&d(3, 5)));
        assert!(!d(2, 5).crosses(&d(2, 5)));
    }

    #[test]
    fn triangulation_counts() {
        assert_eq!(enumerate_triangulations(4).unwrap().len(), 2);
        assert_eq!(enumerate_triangulations(5).unwrap().len(), 5);
        assert_eq!(enumerate_triangulations(6).unwrap().len(), 14);
        for n in 4..=10 {
            let ts = enumerate_triangulations(n).unwrap();
            assert_eq!(ts.len(), catalan_number(n - 2));
            let set: BTreeSet<_> = ts.iter().collect();
            assert_eq!(set.len(), ts.len());
            assert!(ts.windows(2).all(|w| w[0] < w[1]));
        }
    }

    #[test]
    fn subdivision_counts() {
        let s4 = enumerate_subdivisions(4).unwrap();
        assert_eq!(s4.len(), 3);
        assert_eq!(s4[0], Subdivision::empty(4));
        assert_eq!(enumerate_subdivisions(5).unwrap().len(), 11);
        assert_eq!(enumerate_subdivisions(6).unwrap().len(), 45);
    }

    #[test]
    fn subdivisions_closed_under_subsets() {
        let all: BTreeSet<_> = enumerate_subdivisions(6).unwrap().into_iter().collect();
        for s in &all {
            for k in 0..s.diagonals.len() {
                let mut sub = s.diagonals.clone();
                sub.remove(k);
                assert!(all.contains(&Subdivision { n: 6, diagonals: sub }));
            }
        }
    }

    #[test]
    fn flips() {
        let t = Subdivision::new(4, vec![d(1, 3)]).unwrap();
        assert_eq!(flip(&t, &d(1, 3)).unwrap().diagonals, vec![d(2, 4)]);
        let t = Subdivision::new(5, vec![d(1, 3), d(1, 4)]).unwrap();
        let f = flip(&t, &d(1, 4)).unwrap();
        assert_eq!(f.diagonals, vec![d(1, 3), d(3, 5)]);
        assert_eq!(flip(&f, &d(3, 5)).unwrap(), t);
        assert!(matches!(flip(&t, &d(2, 4)), Err(Error::InvalidFlip(_))));
    }

    #[test]
    fn flip_is_involution_and_graph_connected() {
        for n in 4..=8 {
            let ts = enumerate_triangulations(n).unwrap();
            for t in &ts {
                for dd in &t.diagonals {
                    let f = flip(t, dd).unwrap();
                    let new = f.diagonals.iter().find(|e| !t.contains(e)).unwrap();
                    assert_eq!(&flip(&f, new).unwrap(), t);
                }
            }
            assert_eq!(orientation_signs(n).unwrap().signs.len(), ts.len());
        }
    }

    #[test]
    fn orientation_small_cases() {
        let o = orientation_signs(4).unwrap();
        assert_eq!(o.sign(&Subdivision::new(4, vec![d(1, 3)]).unwrap()), Some(1));
        assert_eq!(o.sign(&Subdivision::new(4, vec![d(2, 4)]).unwrap()), Some(-1));
        let o5 = orientation_signs(5).unwrap();
        assert_eq!(o5.signs.len(), 5);
        assert_eq!(o5.sign(&Subdivision::fan(5)), Some(1));
    }

    #[test]
    fn orientation_flip_rule_holds_on_every_edge() {
        for n in 4..=8 {
            let o = orientation_signs(n).unwrap();
            for (t, _) in &o.signs {
                for dd in &t.diagonals {
                    let f = flip(t, dd).unwrap();
                    let new = *f.diagonals.iter().find(|e| !t.contains(e)).unwrap();
                    let rest: Vec<Diagonal> = t.diagonals.iter().copied().filter(|e| e != dd).collect();
                    let mut order_t = vec![*dd];
                    order_t.extend(&rest);
                    let mut order_f = vec![new];
                    order_f.extend(&rest);
                    assert_eq!(o.sign_in_order(t, &order_t).unwrap(), -o.sign_in_order(&f, &order_f).unwrap());
                }
            }
        }
    }

    #[test]
    fn orientation_root_independence() {
        for n in 4..=7 {
            let base = orientation_signs(n).unwrap();
            for root in enumerate_triangulations(n).unwrap() {
                let other = orientation_from_root(&root, 1).unwrap();
                let g = base.sign(&root).unwrap();
                for (t, s) in &other.signs {
                    assert_eq!(s * g, base.sign(t).unwrap());
                }
            }
        }
    }

    #[test]
    fn trees() {
        let t = Subdivision::new(4, vec![d(1, 3)]).unwrap();
        let tree = triangulation_to_tree(&t).unwrap();
        assert!(tree.is_cubic());
        assert_eq!(tree.edges.len(), 1);
        // Leaves 1,2 hang off one cubic vertex, 3,4 off the other.
        let v = tree.adjacency[0][0];
        assert!(tree.adjacency[v].contains(&1));
        assert!(!tree.adjacency[v].contains(&2));
        let trees: BTreeSet<Vec<Vec<usize>>> = enumerate_triangulations(5)
            .unwrap()
            .iter()
            .map(|t| triangulation_to_tree(t).unwrap().adjacency)
            .collect();
        assert_eq!(trees.len(), 5);
    }

    #[test]
    fn tree_splits_recover_subdivision() {
        for n in 4..=7 {
            for s in enumerate_subdivisions(n).unwrap() {
                let tree = subdivision_to_tree(&s);
                assert_eq!(tree.splits(), s.diagonals);
                assert_eq!(tree.is_cubic(), s.is_triangulation());
                assert_eq!(tree.adjacency.len(), n + s.diagonals.len() + 1);
            }
        }
    }

    #[test]
    fn compatible_tree_examples() {
        assert_eq!(compatible_trees(&[1, 2, 3, 4]).unwrap().len(), 2);
        let one = compatible_trees(&[2, 1, 3, 4]).unwrap();
        assert_eq!(one.len(), 1);
        assert_eq!(one[0].diagonals, vec![d(1, 3)]);
        assert_eq!(compatible_trees(&[1, 2, 3, 4, 5]).unwrap().len(), 5);
        assert!(compatible_trees(&[1, 3, 5, 2, 4]).unwrap().is_empty());
        assert!(compatible_trees(&[1, 1, 3, 4]).is_err());
    }

    #[test]
    fn eulerian_numbers() {
        assert_eq!((1..=3).map(|k| eulerian(3, k)).collect::<Vec<_>>(), vec![1, 4, 1]);
        assert_eq!((1..=2).map(|k| eulerian(2, k)).collect::<Vec<_>>(), vec![1, 1]);
        assert_eq!((1..=4).map(|k| eulerian(4, k)).collect::<Vec<_>>(), vec![1, 11, 11, 1]);
        let mut fact = 1u128;
        for m in 1..=8 {
            fact *= m as u128;
            assert_eq!((1..=m).map(|k| eulerian(m, k)).sum::<u128>(), fact);
        }
    }

    #[test]
    fn links() {
        let c = SimplicialComplex::associahedron(5).unwrap();
        let f = c.labels_to_face(&["1,3"]).unwrap();
        let lk = c.link(&f).unwrap();
        assert_eq!(lk.vertices, vec!["1,4".to_string(), "3,5".to_string()]);
        assert_eq!(lk.facets, vec![vec![0], vec![1]]);
        assert_eq!(c.link(&[]).unwrap(), c);
        let facet = c.facets[0].clone();
        let lk = c.link(&facet).unwrap();
        assert!(lk.vertices.is_empty());
        assert_eq!(lk.facets, vec![Vec::<usize>::new()]);
        assert!(matches!(c.link(&c.labels_to_face(&["1,3", "2,4"]).unwrap()), Err(Error::InvalidFace(_))));
    }

    #[test]
    fn link_dimension_formula() {
        let c = SimplicialComplex::associahedron(6).unwrap();
        for f in c.faces() {
            let lk = c.link(&f).unwrap();
            assert_eq!(lk.dim() + f.len() as isize - 1, c.dim() - 1);
        }
    }

    #[test]
    fn complex_predicates() {
        for n in 5..=6 {
            let c = SimplicialComplex::associahedron(n).unwrap();
            assert!(c.is_pure() && c.is_flag() && c.is_pseudomanifold());
        }
        let tri = SimplicialComplex::new(
            vec!["1".into(), "2".into(), "3".into()],
            vec![vec![0, 1], vec![0, 2], vec![1, 2]],
        )
        .unwrap();
        assert!(!tri.is_flag());
        assert!(tri.is_pseudomanifold());
        let impure = SimplicialComplex::new(vec!["1".into(), "2".into(), "3".into()], vec![vec![0, 1], vec![2]]).unwrap();
        assert!(!impure.is_pure());
        assert!(!impure.is_pseudomanifold());
    }

    #[test]
    fn complex_json_round_trip() {
        let c = SimplicialComplex::associahedron(5).unwrap();
        let s = serde_json::to_string(&c).unwrap();
        assert!(s.contains("\"facets\":[[\"1,3\",\"1,4\"]"));
        let back: SimplicialComplex = serde_json::from_str(&s).unwrap();
        assert_eq!(back, c);
        let t = Subdivision::new(5, vec![d(1, 3), d(1, 4)]).unwrap();
        assert_eq!(serde_json::to_string(&t.diagonals).unwrap(), "[[1,3],[1,4]]");
    }
}
