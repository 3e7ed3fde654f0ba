//! Built-in topology files. Abilene and GEANT follow the public adjacency of
//! those research backbones; Tree and Service are parameterized stand-ins.
//! Each function returns topology-file text with `[links]`, `[caches]` and
//! `[sources]` sections; catalogs come from the experiment configuration.

use std::fmt::Write;

/// Abilene: 11 PoPs, 14 bidirectional 500 Mb/s links, 5 GB caches,
/// sources placed uniformly at random.
///
/// 1 Seattle, 2 Sunnyvale, 3 Los Angeles, 4 Denver, 5 Kansas City,
/// 6 Houston, 7 Chicago, 8 Indianapolis, 9 Atlanta, 10 Washington,
/// 11 New York.
pub fn abilene_text() -> String {
    const EDGES: [(u32, u32); 14] = [
        (1, 2), (1, 4), (2, 3), (2, 4), (3, 6), (4, 5), (5, 6),
        (5, 8), (6, 9), (7, 8), (7, 11), (8, 9), (9, 10), (10, 11),
    ];
    render(&EDGES, "500Mbps", "[caches]\ndefault 5GB 1\n", "[sources]\nuniform\n")
}

/// GEANT-like pan-European core: 22 nodes, 33 bidirectional 200 Mb/s links,
/// 2 GB caches, uniform sources.
pub fn geant_text() -> String {
    const EDGES: [(u32, u32); 33] = [
        (1, 2), (1, 3), (2, 4), (2, 5), (3, 5), (3, 6), (4, 7), (5, 7),
        (5, 8), (6, 8), (6, 9), (7, 10), (8, 10), (8, 11), (9, 11), (9, 12),
        (10, 13), (11, 13), (11, 14), (12, 14), (12, 15), (13, 16), (14, 16), (14, 17),
        (15, 17), (15, 18), (16, 19), (17, 19), (17, 20), (18, 20), (19, 21), (20, 22),
        (21, 22),
    ];
    render(&EDGES, "200Mbps", "[caches]\ndefault 2GB 1\n", "[sources]\nuniform\n")
}

/// Complete binary tree of the given depth rooted at node 1, which is the
/// source of every object. All other nodes carry 5 GB caches.
pub fn tree_text(depth: u32) -> String {
    let last = (1u32 << (depth + 1)) - 1;
    let edges: Vec<(u32, u32)> = (2..=last).map(|c| (c / 2, c)).collect();
    let mut caches = String::from("[caches]\ndefault 5GB 1\n1 0 0\n");
    if depth == 0 {
        caches = String::from("[caches]\n");
    }
    render(&edges, "500Mbps", &caches, "[sources]\nall 1\n")
}

/// Leaf node ids of [`tree_text`].
pub fn tree_leaves(depth: u32) -> Vec<u32> {
    ((1u32 << depth)..(1u32 << (depth + 1))).collect()
}

/// Service network stand-in: source 1, relays 2-3-4 in a chain, and
/// `consumers` nodes (5, 6, ...) attached to relay 4.
pub fn service_text(consumers: u32) -> String {
    let mut edges = vec![(1, 2), (2, 3), (3, 4)];
    edges.extend((0..consumers).map(|i| (4, 5 + i)));
    render(&edges, "500Mbps", "[caches]\ndefault 5GB 1\n1 0 0\n", "[sources]\nall 1\n")
}

pub fn service_consumers(consumers: u32) -> Vec<u32> {
    (5..5 + consumers).collect()
}

fn render(edges: &[(u32, u32)], capacity: &str, caches: &str, sources: &str) -> String {
    let mut s = String::from("[links]\n");
    for (a, b) in edges {
        writeln!(s, "{a} {b} {capacity}").expect("string write");
    }
    s.push_str(caches);
    s.push_str(sources);
    s
}
