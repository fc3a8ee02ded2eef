//! Independent oracles and random generators for the integration suites.
//!
//! Everything here deliberately re-derives results through a different route
//! than the library: dense matrix reduction instead of sparse clearing,
//! union-find instead of matrix pairing, the incremental window-counting
//! rule instead of the direct one, and exhaustive matching enumeration
//! instead of threshold search.
//!
//! Each test binary compiles this module separately and uses its own subset.
#![allow(dead_code)]

use std::collections::HashMap;

use persig_core::filtration::Simplex;
use rand::rngs::StdRng;
use rand::Rng;

/// Standard left-to-right reduction on a dense GF(2) boundary matrix, no
/// clearing, all columns in filtration order. Returns (dim, birth, death)
/// bars of dimensions 0 and 1 with zero-length bars dropped, sorted.
pub fn naive_barcode(entries: &[(Simplex, i64)]) -> Vec<(u8, i64, Option<i64>)> {
    let m = entries.len();
    let position: HashMap<Simplex, usize> = entries
        .iter()
        .enumerate()
        .map(|(i, (s, _))| (*s, i))
        .collect();
    let mut cols: Vec<Vec<bool>> = vec![vec![false; m]; m];
    for (j, (s, _)) in entries.iter().enumerate() {
        for face in s.facets() {
            cols[j][position[&face]] = true;
        }
    }
    let low = |col: &[bool]| col.iter().rposition(|&b| b);
    let mut owner: Vec<Option<usize>> = vec![None; m];
    for j in 0..m {
        while let Some(l) = low(&cols[j]) {
            match owner[l] {
                None => {
                    owner[l] = Some(j);
                    break;
                }
                Some(other) => {
                    let other_col = cols[other].clone();
                    for (c, o) in cols[j].iter_mut().zip(&other_col) {
                        *c ^= o;
                    }
                }
            }
        }
    }
    let mut bars = Vec::new();
    let mut paired = vec![false; m];
    for (l, j) in owner.iter().enumerate() {
        if let Some(j) = j {
            paired[l] = true;
            paired[*j] = true;
            let (creator, birth) = entries[l];
            let (_, death) = entries[*j];
            if birth != death {
                bars.push((creator.dim(), birth, Some(death)));
            }
        }
    }
    for (i, (s, v)) in entries.iter().enumerate() {
        if !paired[i] && low(&cols[i]).is_none() && s.dim() <= 1 {
            bars.push((s.dim(), *v, None));
        }
    }
    bars.sort();
    bars
}

/// Elder-rule sweep for dimension 0: births at vertices, deaths at edges
/// joining two components, the component created earlier in the filtration
/// surviving. Returns (birth, death) values, zero-length merges dropped.
pub fn union_find_dim0(entries: &[(Simplex, i64)]) -> Vec<(i64, Option<i64>)> {
    struct Dsu {
        parent: Vec<usize>,
    }
    impl Dsu {
        fn find(&mut self, mut x: usize) -> usize {
            while self.parent[x] != x {
                self.parent[x] = self.parent[self.parent[x]];
                x = self.parent[x];
            }
            x
        }
    }
    let mut dsu = Dsu { parent: Vec::new() };
    // vertex id -> dsu node; per root: (position, value) of its creating vertex
    let mut node_of_vertex: HashMap<u32, usize> = HashMap::new();
    let mut birth_of_root: Vec<(usize, i64)> = Vec::new();
    let mut bars = Vec::new();
    for (pos, (s, v)) in entries.iter().enumerate() {
        match s {
            Simplex::Vertex(id) => {
                let node = dsu.parent.len();
                dsu.parent.push(node);
                birth_of_root.push((pos, *v));
                node_of_vertex.insert(*id, node);
            }
            Simplex::Edge([a, b]) => {
                let ra = dsu.find(node_of_vertex[a]);
                let rb = dsu.find(node_of_vertex[b]);
                if ra == rb {
                    continue;
                }
                let (elder, younger) = if birth_of_root[ra].0 < birth_of_root[rb].0 {
                    (ra, rb)
                } else {
                    (rb, ra)
                };
                let birth = birth_of_root[younger].1;
                if birth != *v {
                    bars.push((birth, Some(*v)));
                }
                dsu.parent[younger] = elder;
            }
            Simplex::Triangle(_) => {}
        }
    }
    let roots: Vec<usize> = (0..dsu.parent.len())
        .filter(|&node| dsu.find(node) == node)
        .collect();
    for node in roots {
        bars.push((birth_of_root[node].1, None));
    }
    bars.sort();
    bars
}

/// Random 2-complex (every triangle's edges present) with monotone integer
/// filter values, in a random valid order: grouped by ascending value, faces
/// before cofaces inside each group, otherwise shuffled.
pub fn random_filtration_entries(rng: &mut StdRng) -> Vec<(Simplex, i64)> {
    let n_v = rng.gen_range(1..=7u32);
    let mut simplices: Vec<(Simplex, i64)> = Vec::new();
    let mut vertex_value = HashMap::new();
    for v in 0..n_v {
        let value = rng.gen_range(0..=5i64);
        vertex_value.insert(v, value);
        simplices.push((Simplex::vertex(v), value));
    }
    let mut edge_value = HashMap::new();
    for a in 0..n_v {
        for b in a + 1..n_v {
            if rng.gen_bool(0.45) {
                let value =
                    vertex_value[&a].max(vertex_value[&b]) + rng.gen_range(0..=2i64);
                edge_value.insert((a, b), value);
                simplices.push((Simplex::edge(a, b), value));
            }
        }
    }
    for a in 0..n_v {
        for b in a + 1..n_v {
            for c in b + 1..n_v {
                let all_edges = edge_value.contains_key(&(a, b))
                    && edge_value.contains_key(&(a, c))
                    && edge_value.contains_key(&(b, c));
                if all_edges && rng.gen_bool(0.5) && simplices.len() < 30 {
                    let value = edge_value[&(a, b)]
                        .max(edge_value[&(a, c)])
                        .max(edge_value[&(b, c)])
                        + rng.gen_range(0..=2i64);
                    simplices.push((Simplex::triangle(a, b, c), value));
                }
            }
        }
    }
    simplices.truncate(30);
    // Drop triangles whose edges got truncated away.
    let kept: std::collections::HashSet<Simplex> =
        simplices.iter().map(|(s, _)| *s).collect();
    simplices.retain(|(s, _)| s.facets().iter().all(|f| kept.contains(f)));

    // Random valid order: ascending value groups, random topological order
    // within each group.
    simplices.sort_by_key(|(_, v)| *v);
    let mut out: Vec<(Simplex, i64)> = Vec::with_capacity(simplices.len());
    let mut placed: std::collections::HashSet<Simplex> = std::collections::HashSet::new();
    let mut i = 0;
    while i < simplices.len() {
        let value = simplices[i].1;
        let mut group: Vec<Simplex> = simplices[i..]
            .iter()
            .take_while(|(_, v)| *v == value)
            .map(|(s, _)| *s)
            .collect();
        i += group.len();
        while !group.is_empty() {
            let ready: Vec<usize> = group
                .iter()
                .enumerate()
                .filter(|(_, s)| s.facets().iter().all(|f| placed.contains(f)))
                .map(|(idx, _)| idx)
                .collect();
            let pick = ready[rng.gen_range(0..ready.len())];
            let s = group.remove(pick);
            placed.insert(s);
            out.push((s, value));
        }
    }
    out
}

/// The incremental window-counting rule: a bar born in window s dying in
/// window t adds 1 to entry 2s+1 and to every entry 2j with s < j <= t.
/// Exact integer arithmetic throughout (values and k are integers).
pub fn windows_oracle(bars: &[(i64, Option<i64>)], k: i64, n: usize) -> Vec<u64> {
    let mut entries = vec![0u64; 2 * n];
    if k <= 0 {
        entries[1] = bars.len() as u64;
        return entries;
    }
    let k = k as i128;
    let n_i = n as i128;
    for &(birth, death) in bars {
        // birth window: largest s with s*k <= birth*n, clamped into range
        let bn = birth as i128 * n_i;
        let mut s = (bn / k) as usize;
        if s > n - 1 {
            s = n - 1;
        }
        // death window: infinite bars live past the last edge
        let t = match death {
            None => n,
            Some(d) => {
                let dn = d as i128 * n_i;
                ((dn / k) as usize).min(n)
            }
        };
        entries[2 * s + 1] += 1;
        for j in s + 1..=t.min(n - 1) {
            entries[2 * j] += 1;
        }
    }
    entries
}

fn linf(a: (f64, f64), b: (f64, f64)) -> f64 {
    (a.0 - b.0).abs().max((a.1 - b.1).abs())
}

fn diag(p: (f64, f64)) -> f64 {
    (p.1 - p.0).abs() / 2.0
}

/// Minimum over all matchings (diagonal allowed) of the maximum move.
pub fn bottleneck_brute(a: &[(f64, f64)], b: &[(f64, f64)]) -> f64 {
    fn rec(i: usize, used: &mut [bool], a: &[(f64, f64)], b: &[(f64, f64)]) -> f64 {
        if i == a.len() {
            return b
                .iter()
                .zip(used.iter())
                .filter(|(_, &u)| !u)
                .map(|(&p, _)| diag(p))
                .fold(0.0, f64::max);
        }
        // a[i] to the diagonal
        let mut best = diag(a[i]).max(rec(i + 1, used, a, b));
        // a[i] to each unused b[j]
        for j in 0..b.len() {
            if used[j] {
                continue;
            }
            used[j] = true;
            let cost = linf(a[i], b[j]).max(rec(i + 1, used, a, b));
            used[j] = false;
            best = best.min(cost);
        }
        best
    }
    let mut used = vec![false; b.len()];
    rec(0, &mut used, a, b)
}

/// Random diagram of up to `max_points` points above the diagonal.
pub fn random_diagram(rng: &mut StdRng, max_points: usize) -> Vec<(f64, f64)> {
    let count = rng.gen_range(0..=max_points);
    (0..count)
        .map(|_| {
            // Coarse grid values provoke ties between candidate thresholds.
            let birth = rng.gen_range(0..40) as f64 / 10.0;
            let life = rng.gen_range(1..30) as f64 / 10.0;
            (birth, birth + life)
        })
        .collect()
}
