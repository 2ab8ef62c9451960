/// Maximal cliques of the graph induced on `vertices`, by Bron–Kerbosch
/// with Tomita pivoting. Returned cliques list original vertex labels in
/// ascending order; isolated vertices come back as singletons.
pub fn maximal_cliques(vertices: &[usize], adjacent: impl Fn(usize, usize) -> bool) -> Vec<Vec<usize>> {
    let n = vertices.len();
    let words = n.div_ceil(64).max(1);
    let mut adj = vec![vec![0u64; words]; n];
    for a in 0..n {
        for b in (a + 1)..n {
            if adjacent(vertices[a], vertices[b]) {
                adj[a][b / 64] |= 1 << (b % 64);
                adj[b][a / 64] |= 1 << (a % 64);
            }
        }
    }
    let mut p = vec![0u64; words];
    for v in 0..n {
        p[v / 64] |= 1 << (v % 64);
    }
    let mut out = Vec::new();
    let mut r = Vec::new();
    expand(&adj, &mut r, p, vec![0u64; words], &mut out);
    let mut cliques: Vec<Vec<usize>> = out
        .into_iter()
        .map(|c| {
            let mut c: Vec<usize> = c.into_iter().map(|v| vertices[v]).collect();
            c.sort_unstable();
            c
        })
        .collect();
    cliques.sort();
    cliques
}

fn members(set: &[u64]) -> impl Iterator<Item = usize> + '_ {
    set.iter().enumerate().flat_map(|(w, &bits)| {
        let mut b = bits;
        std::iter::from_fn(move || {
            if b == 0 {
                return None;
            }
            let t = b.trailing_zeros() as usize;
            b &= b - 1;
            Some(w * 64 + t)
        })
    })
}

fn expand(adj: &[Vec<u64>], r: &mut Vec<usize>, mut p: Vec<u64>, mut x: Vec<u64>, out: &mut Vec<Vec<usize>>) {
    if p.iter().all(|&w| w == 0) {
        if x.iter().all(|&w| w == 0) && !r.is_empty() {
            out.push(r.clone());
        }
        return;
    }
    let pivot = members(&p)
        .chain(members(&x))
        .max_by_key(|&u| p.iter().zip(&adj[u]).map(|(a, b)| (a & b).count_ones()).sum::<u32>())
        .unwrap();
    let outside: Vec<u64> = p.iter().zip(&adj[pivot]).map(|(a, b)| a & !b).collect();
    let candidates: Vec<usize> = members(&outside).collect();
    for v in candidates {
        let np: Vec<u64> = p.iter().zip(&adj[v]).map(|(a, b)| a & b).collect();
        let nx: Vec<u64> = x.iter().zip(&adj[v]).map(|(a, b)| a & b).collect();
        r.push(v);
        expand(adj, r, np, nx, out);
        r.pop();
        p[v / 64] &= !(1 << (v % 64));
        x[v / 64] |= 1 << (v % 64);
    }
}
