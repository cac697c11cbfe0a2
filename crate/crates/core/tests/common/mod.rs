#![allow(dead_code)]

use std::collections::HashSet;

use rand::Rng;
use refpoly::weights::{parse_cws_line, Cws, WeightSystem};

pub fn data(name: &str) -> String {
    let path = format!("{}/tests/data/{name}", env!("CARGO_MANIFEST_DIR"));
    std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{path}: {e}"))
}

fn rows(name: &str) -> Vec<Vec<String>> {
    data(name)
        .lines()
        .filter(|l| !l.trim().is_empty() && !l.starts_with('#'))
        .map(|l| l.split_whitespace().map(String::from).collect())
        .collect()
}

/// `None` for entries printed as unknown.
fn opt(s: &str) -> Option<usize> {
    s.parse().ok()
}

/// One row of the K3 weight table.
#[derive(Clone, Debug)]
pub struct K3Row {
    pub weights: Vec<i64>,
    pub tag: String,
    /// P, V, P*, V*.
    pub counts: [usize; 4],
    pub pi: Option<usize>,
    pub f: usize,
    pub unique: Vec<bool>,
}

impl K3Row {
    pub fn ws(&self) -> WeightSystem {
        WeightSystem::new(&self.weights).unwrap()
    }
}

pub fn k3_rows() -> Vec<K3Row> {
    rows("k3_weights.txt")
        .into_iter()
        .map(|r| K3Row {
            weights: r[1..5].iter().map(|x| x.parse().unwrap()).collect(),
            tag: r[5].clone(),
            counts: [0, 1, 2, 3].map(|i| r[6 + i].parse().unwrap()),
            pi: opt(&r[10]),
            f: r[11].parse().unwrap(),
            unique: r[12].chars().map(|c| c == '1').collect(),
        })
        .collect()
}

/// One row of the threefold sample table.
#[derive(Clone, Debug)]
pub struct Cy3Row {
    pub weights: Vec<i64>,
    pub transversal: bool,
    pub tag: String,
    pub h11: i64,
    pub h12: i64,
    pub counts: [usize; 4],
    pub pi: Option<usize>,
    pub f: usize,
    pub unique: Vec<bool>,
}

impl Cy3Row {
    pub fn ws(&self) -> WeightSystem {
        WeightSystem::new(&self.weights).unwrap()
    }
}

pub fn cy3_rows() -> Vec<Cy3Row> {
    rows("cy3_sample.txt")
        .into_iter()
        .map(|r| Cy3Row {
            weights: r[1..6].iter().map(|x| x.parse().unwrap()).collect(),
            transversal: r[6] == "T",
            tag: r[7].clone(),
            h11: r[8].parse().unwrap(),
            h12: r[9].parse().unwrap(),
            counts: [0, 1, 2, 3].map(|i| r[10 + i].parse().unwrap()),
            pi: opt(&r[14]),
            f: r[15].parse().unwrap(),
            unique: r[16].chars().map(|c| c == '1').collect(),
        })
        .collect()
}

/// Combined systems of dimension 3 with their type and counts.
pub fn cws3_rows() -> Vec<(Cws, String, [usize; 4])> {
    data("cws3.txt")
        .lines()
        .filter(|l| !l.trim().is_empty() && !l.starts_with('#'))
        .map(|l| {
            let (q, rest) = l.split_once(';').unwrap();
            let rest: Vec<&str> = rest.split_whitespace().collect();
            (
                parse_cws_line(q, None).unwrap(),
                rest[0].to_string(),
                [1, 2, 3, 4].map(|i| rest[i].parse().unwrap()),
            )
        })
        .collect()
}

/// A random unimodular `n × n` matrix: a product of elementary moves and
/// sign flips applied to the identity.
pub fn random_unimodular<R: Rng>(rng: &mut R, n: usize, moves: usize) -> Vec<Vec<i64>> {
    let mut g: Vec<Vec<i64>> = (0..n).map(|i| (0..n).map(|j| i64::from(i == j)).collect()).collect();
    for _ in 0..moves {
        let (i, j) = (rng.gen_range(0..n), rng.gen_range(0..n));
        match rng.gen_range(0..3) {
            0 if i != j => {
                let c = rng.gen_range(-2..=2);
                for k in 0..n {
                    g[i][k] += c * g[j][k];
                }
            }
            1 => g.swap(i, j),
            _ => g[i].iter_mut().for_each(|x| *x = -*x),
        }
    }
    g
}

/// Vectors in `Z^n` obtained by permuting the coordinates of `v` in all
/// ways and all sign choices, deduplicated.
pub fn signed_permutations(v: &[i64]) -> Vec<Vec<i64>> {
    fn perms(v: &mut Vec<i64>, k: usize, out: &mut Vec<Vec<i64>>) {
        if k == v.len() {
            out.push(v.clone());
            return;
        }
        for i in k..v.len() {
            v.swap(k, i);
            perms(v, k + 1, out);
            v.swap(k, i);
        }
    }
    let mut base = Vec::new();
    perms(&mut v.to_vec(), 0, &mut base);
    let mut out = Vec::new();
    for p in base {
        for mask in 0..1u32 << p.len() {
            out.push(p.iter().enumerate().map(|(i, &x)| if mask >> i & 1 == 1 { -x } else { x }).collect());
        }
    }
    out.sort();
    out.dedup();
    out
}

/// Subgroups of `⊕ Z/d_i` by brute force: grow each known subgroup `H`
/// by one element `g` as the union of the cosets `H + k g`.
pub fn subgroups(d: &[i64]) -> usize {
    let order: usize = d.iter().product::<i64>() as usize;
    assert!(order <= 128);
    let digits = |mut e: usize| -> Vec<usize> {
        d.iter()
            .map(|&m| {
                let r = e % m as usize;
                e /= m as usize;
                r
            })
            .collect()
    };
    let table: Vec<Vec<usize>> = (0..order)
        .map(|a| {
            (0..order)
                .map(|b| {
                    let (x, y) = (digits(a), digits(b));
                    x.iter().zip(&y).zip(d).rev().fold(0, |acc, ((p, q), &m)| acc * m as usize + (p + q) % m as usize)
                })
                .collect()
        })
        .collect();
    let grow = |h: u128, g: usize| -> u128 {
        let mut out = h;
        let mut kg = g;
        while kg != 0 {
            for a in (0..order).filter(|&a| h >> a & 1 == 1) {
                out |= 1 << table[a][kg];
            }
            kg = table[kg][g];
        }
        out
    };
    let mut seen = HashSet::from([1u128]);
    let mut stack = vec![1u128];
    while let Some(h) = stack.pop() {
        for g in (0..order).filter(|&g| h >> g & 1 == 0) {
            let bigger = grow(h, g);
            if seen.insert(bigger) {
                stack.push(bigger);
            }
        }
    }
    seen.len()
}
