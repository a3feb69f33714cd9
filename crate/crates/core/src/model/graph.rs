use std::collections::VecDeque;

use super::Network;

/// Weakly connected components: blocks of the graph with `i ~ j` whenever
/// `g[i][j] + g[j][i] > 0`. Blocks are sorted internally and ordered by their
/// smallest member.
pub fn weak_components(net: &Network) -> Vec<Vec<usize>> {
    let n = net.n();
    let g = net.matrix();
    let mut block = vec![usize::MAX; n];
    let mut out = Vec::new();
    for start in 0..n {
        if block[start] != usize::MAX {
            continue;
        }
        let id = out.len();
        let mut members = vec![start];
        block[start] = id;
        let mut queue = VecDeque::from([start]);
        while let Some(u) = queue.pop_front() {
            for w in 0..n {
                if block[w] == usize::MAX && g[(u, w)] + g[(w, u)] > 0.0 {
                    block[w] = id;
                    members.push(w);
                    queue.push_back(w);
                }
            }
        }
        members.sort_unstable();
        out.push(members);
    }
    out
}

/// True when some agent `l` has `g[l][k] > 0`, i.e. `k` influences someone.
pub fn has_in_link(net: &Network, k: usize) -> bool {
    (0..net.n()).any(|l| net.weight(l, k) > 0.0)
}

/// Any link touching `k`, in either direction.
pub fn has_any_link(net: &Network, k: usize) -> bool {
    has_in_link(net, k) || (0..net.n()).any(|l| net.weight(k, l) > 0.0)
}

pub fn in_degree(net: &Network, k: usize) -> usize {
    (0..net.n()).filter(|&l| net.weight(l, k) > 0.0).count()
}

pub fn out_degree(net: &Network, k: usize) -> usize {
    (0..net.n()).filter(|&l| net.weight(k, l) > 0.0).count()
}
