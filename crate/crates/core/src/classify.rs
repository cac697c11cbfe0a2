//! Enumeration of reflexive polytopes in dimensions 2 and 3 by descending
//! from the maximal polytopes Δ(q) of very minimal CWS, optionally followed
//! by lattice refinements, with a resumable on-disk store of normal forms.
//!
//! The descent drops one vertex at a time and keeps the hull of the
//! remaining lattice points while the origin stays interior. Intermediate
//! polytopes need not be reflexive: any reflexive `Q ⊂ P` is reached from
//! `P` by dropping vertices outside `Q`, and every polytope on that chain
//! contains `Q` and hence the origin in its interior.

use std::collections::{HashMap, HashSet};
use std::fs::{File, OpenOptions};
use std::io::{self, BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Mutex;

use rayon::prelude::*;
use thiserror::Error;

use crate::bitset::BitSet;
use crate::lattices::enumerate_lattices;
use crate::polytope::{dual, has_ip, hull, is_reflexive, normal_form, NormalForm, Polytope};
use crate::weights::{delta_of_q, enumerate_cws, minimality_type, Cws, WeightsError};

#[derive(Debug, Error)]
pub enum ClassifyError {
    #[error("classification in dimension {0} is not supported")]
    Unsupported(usize),
    #[error("checkpoint: {0}")]
    Io(#[from] io::Error),
    #[error("corrupt checkpoint record at byte {0}")]
    Corrupt(u64),
    #[error(transparent)]
    Weights(#[from] WeightsError),
}

const TAG_FOUND: u8 = 1;
const TAG_SEED_DONE: u8 = 2;
const TAG_EDGE: u8 = 3;

/// Seed index recorded once the lattice refinement pass has finished.
pub const LATTICE_PASS: u32 = u32::MAX;

/// Set of normal-form keys with an optional append-only log.
///
/// Log records are `[u32 LE length][tag][payload]`: tag 1 is a new key,
/// tag 2 a finished seed (u32 LE index), tag 3 an inclusion edge between
/// two stored keys (`[u32 LE len][key][key]`). A torn final record is
/// ignored on reload.
pub struct DedupStore {
    keys: Mutex<HashSet<Vec<u8>>>,
    log: Option<Mutex<LogWriter>>,
    found: AtomicU64,
    processed: AtomicU64,
}

struct LogWriter {
    file: BufWriter<File>,
    since_sync: usize,
    sync_every: usize,
}

impl LogWriter {
    fn append(&mut self, tag: u8, payload: &[u8]) -> io::Result<()> {
        self.file.write_all(&(payload.len() as u32 + 1).to_le_bytes())?;
        self.file.write_all(&[tag])?;
        self.file.write_all(payload)?;
        self.since_sync += 1;
        if self.since_sync >= self.sync_every {
            self.sync()?;
        }
        Ok(())
    }

    fn sync(&mut self) -> io::Result<()> {
        self.file.flush()?;
        self.file.get_ref().sync_data()?;
        self.since_sync = 0;
        Ok(())
    }
}

/// What a checkpoint held when it was opened.
#[derive(Clone, Debug, Default)]
pub struct Replay {
    pub seeds_done: Vec<u32>,
    pub edges: Vec<(Vec<u8>, Vec<u8>)>,
}

impl Default for DedupStore {
    fn default() -> Self {
        Self::in_memory()
    }
}

impl DedupStore {
    pub fn in_memory() -> Self {
        DedupStore { keys: Mutex::new(HashSet::new()), log: None, found: AtomicU64::new(0), processed: AtomicU64::new(0) }
    }

    /// Opens or creates a checkpoint, replaying its records. A torn tail is
    /// cut off so that appends continue from the last complete record.
    pub fn open(path: &Path, sync_every: usize) -> Result<(Self, Replay), ClassifyError> {
        let mut bytes = Vec::new();
        if path.exists() {
            File::open(path)?.read_to_end(&mut bytes)?;
        }
        let mut keys = HashSet::new();
        let mut replay = Replay::default();
        let mut pos = 0usize;
        while pos + 5 <= bytes.len() {
            let len = u32::from_le_bytes(bytes[pos..pos + 4].try_into().expect("4 bytes")) as usize;
            if len == 0 {
                return Err(ClassifyError::Corrupt(pos as u64));
            }
            if pos + 4 + len > bytes.len() {
                break;
            }
            let tag = bytes[pos + 4];
            let payload = &bytes[pos + 5..pos + 4 + len];
            match tag {
                TAG_FOUND => {
                    keys.insert(payload.to_vec());
                }
                TAG_SEED_DONE if payload.len() == 4 => {
                    replay.seeds_done.push(u32::from_le_bytes(payload.try_into().expect("4 bytes")));
                }
                TAG_EDGE if payload.len() >= 4 => {
                    let a = u32::from_le_bytes(payload[..4].try_into().expect("4 bytes")) as usize;
                    if 4 + a > payload.len() {
                        return Err(ClassifyError::Corrupt(pos as u64));
                    }
                    replay.edges.push((payload[4..4 + a].to_vec(), payload[4 + a..].to_vec()));
                }
                _ => return Err(ClassifyError::Corrupt(pos as u64)),
            }
            pos += 4 + len;
        }
        let file = OpenOptions::new().create(true).truncate(false).write(true).open(path)?;
        file.set_len(pos as u64)?;
        let mut file = BufWriter::new(file);
        io::Seek::seek(&mut file, io::SeekFrom::Start(pos as u64))?;
        let n = keys.len() as u64;
        let store = DedupStore {
            keys: Mutex::new(keys),
            log: Some(Mutex::new(LogWriter { file, since_sync: 0, sync_every: sync_every.max(1) })),
            found: AtomicU64::new(n),
            processed: AtomicU64::new(0),
        };
        Ok((store, replay))
    }

    /// Inserts `key` if absent; true when it was new.
    pub fn insert(&self, key: &[u8]) -> Result<bool, ClassifyError> {
        let mut keys = self.keys.lock().expect("store lock");
        if keys.contains(key) {
            return Ok(false);
        }
        if let Some(log) = &self.log {
            log.lock().expect("log lock").append(TAG_FOUND, key)?;
        }
        keys.insert(key.to_vec());
        self.found.fetch_add(1, Ordering::Relaxed);
        Ok(true)
    }

    pub fn contains(&self, key: &[u8]) -> bool {
        self.keys.lock().expect("store lock").contains(key)
    }

    pub fn len(&self) -> usize {
        self.keys.lock().expect("store lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// All keys, sorted.
    pub fn keys(&self) -> Vec<Vec<u8>> {
        let mut v: Vec<Vec<u8>> = self.keys.lock().expect("store lock").iter().cloned().collect();
        v.sort();
        v
    }

    /// Stored classes as normal forms, sorted by key.
    pub fn normal_forms(&self) -> Vec<NormalForm> {
        self.keys().iter().map(|k| NormalForm::from_key(k).expect("stored keys decode")).collect()
    }

    pub fn found(&self) -> u64 {
        self.found.load(Ordering::Relaxed)
    }

    /// Polytopes whose subpolytopes have been generated in this session.
    pub fn processed(&self) -> u64 {
        self.processed.load(Ordering::Relaxed)
    }

    fn record(&self, tag: u8, payload: &[u8]) -> Result<(), ClassifyError> {
        if let Some(log) = &self.log {
            log.lock().expect("log lock").append(tag, payload)?;
        }
        Ok(())
    }

    /// Flushes and fsyncs the log.
    pub fn barrier(&self) -> Result<(), ClassifyError> {
        if let Some(log) = &self.log {
            log.lock().expect("log lock").sync()?;
        }
        Ok(())
    }
}

fn edge_payload(a: &[u8], b: &[u8]) -> Vec<u8> {
    let mut p = (a.len() as u32).to_le_bytes().to_vec();
    p.extend_from_slice(a);
    p.extend_from_slice(b);
    p
}

/// Connectivity of stored classes under inclusion, as a union-find over
/// key indices plus the edges that merged components.
#[derive(Default)]
struct Web {
    index: HashMap<Vec<u8>, usize>,
    parent: Vec<usize>,
    spanning: Vec<(Vec<u8>, Vec<u8>)>,
}

impl Web {
    fn id(&mut self, key: &[u8]) -> usize {
        if let Some(&i) = self.index.get(key) {
            return i;
        }
        let i = self.parent.len();
        self.parent.push(i);
        self.index.insert(key.to_vec(), i);
        i
    }

    fn find(&mut self, mut i: usize) -> usize {
        while self.parent[i] != i {
            self.parent[i] = self.parent[self.parent[i]];
            i = self.parent[i];
        }
        i
    }

    /// True if the edge joined two components.
    fn join(&mut self, a: &[u8], b: &[u8]) -> bool {
        let (x, y) = (self.id(a), self.id(b));
        let (rx, ry) = (self.find(x), self.find(y));
        if rx == ry {
            return false;
        }
        self.parent[rx.max(ry)] = rx.min(ry);
        self.spanning.push((a.to_vec(), b.to_vec()));
        true
    }
}

#[derive(Clone, Debug)]
pub struct ClassifyOptions {
    pub with_lattices: bool,
    pub checkpoint: Option<PathBuf>,
    /// Log records between fsyncs.
    pub sync_every: usize,
    /// Permit dimension 4, where the search does not finish at desk scale.
    pub allow_huge: bool,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        ClassifyOptions { with_lattices: false, checkpoint: None, sync_every: 4096, allow_huge: false }
    }
}

pub struct ClassificationRun {
    pub n: usize,
    pub seeds: Vec<Cws>,
    pub store: DedupStore,
    /// Classes stored before the lattice refinement pass ran in this call;
    /// equal to the final count without `with_lattices`.
    pub before_lattices: usize,
    web: Web,
}

impl ClassificationRun {
    /// Inclusion edges `(contained, container)` or the reverse that
    /// connect the stored classes, one per merge.
    pub fn witnesses(&self) -> &[(Vec<u8>, Vec<u8>)] {
        &self.web.spanning
    }
}

/// Very minimal IP CWS of dimension `n`, the default seeds.
pub fn default_seeds(n: usize) -> Result<Vec<Cws>, ClassifyError> {
    let mut out = Vec::new();
    for q in enumerate_cws(n)? {
        if minimality_type(&q)?.very_minimal {
            out.push(q);
        }
    }
    Ok(out)
}

/// Descent from `root`. `visited` holds every IP class already expanded in
/// this session; reflexive classes go to the store, and each inclusion
/// between reflexive classes seen on the way is offered to `web`.
///
/// Every polytope below `root` is the hull of a subset of its lattice
/// points, and dropping a vertex removes exactly that point, so identical
/// subsets meet on the same level and are merged before any hull or normal
/// form is computed.
fn descend(
    root: Polytope,
    store: &DedupStore,
    visited: &mut HashSet<Vec<u8>>,
    web: &mut Web,
) -> Result<(), ClassifyError> {
    let key = normal_form(&root).key();
    if !visited.insert(key.clone()) {
        return Ok(());
    }
    let mut anchor = None;
    if is_reflexive(&root) {
        store.insert(&key)?;
        web.id(&key);
        anchor = Some(key);
    }
    let points = root.lattice_points().to_vec();
    let mut all = BitSet::new(points.len());
    (0..points.len()).for_each(|i| all.insert(i));
    // Each frontier entry carries its nearest reflexive ancestor, itself if
    // reflexive.
    let mut frontier: Vec<(BitSet, Polytope, Option<Vec<u8>>)> = vec![(all, root, anchor)];
    while !frontier.is_empty() {
        store.processed.fetch_add(frontier.len() as u64, Ordering::Relaxed);
        let mut subsets: Vec<(BitSet, usize)> = Vec::new();
        for (f, (bits, p, _)) in frontier.iter().enumerate() {
            for v in p.vertices() {
                let i = points.binary_search(v).expect("vertex is a lattice point of the root");
                let mut b = bits.clone();
                b.remove(i);
                subsets.push((b, f));
            }
        }
        subsets.sort_by(|a, b| (&a.0, &frontier[a.1].2).cmp(&(&b.0, &frontier[b.1].2)));
        subsets.dedup_by(|a, b| a.0 == b.0);
        let next: Vec<(Vec<u8>, BitSet, Polytope, Option<Vec<u8>>)> = subsets
            .into_par_iter()
            .filter_map(|(b, f)| {
                let pts: Vec<_> = b.iter().map(|i| points[i].clone()).collect();
                let q = hull(&pts).ok().filter(has_ip)?;
                Some((normal_form(&q).key(), b, q, frontier[f].2.clone()))
            })
            .collect();
        frontier = Vec::new();
        for (k, b, q, anc) in next {
            let refl = is_reflexive(&q);
            if !visited.insert(k.clone()) {
                if let (true, Some(a)) = (refl, &anc) {
                    link(store, web, &k, a)?;
                }
                continue;
            }
            let anc = if refl {
                store.insert(&k)?;
                web.id(&k);
                if let Some(a) = &anc {
                    link(store, web, &k, a)?;
                }
                Some(k)
            } else {
                anc
            };
            frontier.push((b, q, anc));
        }
    }
    Ok(())
}

fn link(store: &DedupStore, web: &mut Web, a: &[u8], b: &[u8]) -> Result<(), ClassifyError> {
    if a != b && web.join(a, b) {
        store.record(TAG_EDGE, &edge_payload(a, b))?;
    }
    Ok(())
}

/// All reflexive polytopes contained in `p` on its lattice with the same
/// interior point, including `p`, as distinct normal forms.
pub fn reflexive_subpolytopes(p: &Polytope) -> Vec<NormalForm> {
    let store = DedupStore::in_memory();
    descend(p.clone(), &store, &mut HashSet::new(), &mut Web::default()).expect("in-memory store");
    store.normal_forms()
}

/// Enumerates reflexive polytopes of dimension `n` below the Δ(q) of
/// `seeds`. With `with_lattices`, every class found is also realized on
/// all lattices allowed by its vertex pairing matrix and novel classes are
/// descended from in turn.
pub fn classify(n: usize, seeds: &[Cws], opts: &ClassifyOptions) -> Result<ClassificationRun, ClassifyError> {
    if !(1..=3).contains(&n) && !(n == 4 && opts.allow_huge) {
        return Err(ClassifyError::Unsupported(n));
    }
    let (store, replay) = match &opts.checkpoint {
        Some(path) => DedupStore::open(path, opts.sync_every)?,
        None => (DedupStore::in_memory(), Replay::default()),
    };
    let mut web = Web::default();
    for k in store.keys() {
        web.id(&k);
    }
    for (a, b) in &replay.edges {
        web.join(a, b);
    }
    let done: HashSet<u32> = replay.seeds_done.iter().copied().collect();
    let mut visited = HashSet::new();
    for (i, q) in seeds.iter().enumerate() {
        if q.dim() != n {
            return Err(ClassifyError::Weights(WeightsError::Invalid(format!("seed {q} has dimension {}", q.dim()))));
        }
        if done.contains(&(i as u32)) {
            continue;
        }
        let delta = delta_of_q(q)?;
        if has_ip(&delta) {
            descend(delta, &store, &mut visited, &mut web)?;
        }
        store.record(TAG_SEED_DONE, &(i as u32).to_le_bytes())?;
        store.barrier()?;
    }
    let before_lattices = store.len();
    if opts.with_lattices && !done.contains(&LATTICE_PASS) {
        lattice_pass(&store, &mut visited, &mut web)?;
        store.record(TAG_SEED_DONE, &LATTICE_PASS.to_le_bytes())?;
    }
    store.barrier()?;
    Ok(ClassificationRun { n, seeds: seeds.to_vec(), store, before_lattices, web })
}

/// Realizes every stored class on its other lattices until nothing new
/// appears.
fn lattice_pass(store: &DedupStore, visited: &mut HashSet<Vec<u8>>, web: &mut Web) -> Result<(), ClassifyError> {
    let mut todo = store.keys();
    let mut seen: HashSet<Vec<u8>> = HashSet::new();
    while !todo.is_empty() {
        let found: Vec<Vec<u8>> = todo
            .par_iter()
            .flat_map_iter(|k| {
                let p = NormalForm::from_key(k).expect("stored keys decode").polytope();
                let reals = enumerate_lattices(&p).unwrap_or_default();
                reals.into_iter().map(|r| normal_form(&r.polytope()).key()).collect::<Vec<_>>()
            })
            .collect();
        seen.extend(todo.drain(..));
        let mut novel: Vec<Vec<u8>> = found.into_iter().filter(|k| !store.contains(k)).collect();
        novel.sort();
        novel.dedup();
        for k in novel {
            let p = NormalForm::from_key(&k).expect("fresh key decodes").polytope();
            // A class reached only through a lattice change is a new root of
            // the descent; its subpolytopes tie it to the rest.
            descend(p, store, visited, web)?;
        }
        todo = store.keys().into_iter().filter(|k| !seen.contains(k)).collect();
    }
    Ok(())
}

/// Whether the inclusion graph over stored classes is connected, with the
/// edges that span it.
#[derive(Clone, Debug)]
pub struct Connectedness {
    pub connected: bool,
    pub components: usize,
    pub spanning: Vec<(Vec<u8>, Vec<u8>)>,
}

pub fn connectedness_report(run: &ClassificationRun) -> Connectedness {
    connectedness(&run.store.keys(), run.witnesses())
}

/// Connectivity of `keys` under the undirected `edges`.
pub fn connectedness(keys: &[Vec<u8>], edges: &[(Vec<u8>, Vec<u8>)]) -> Connectedness {
    let mut web = Web::default();
    for k in keys {
        web.id(k);
    }
    for (a, b) in edges {
        web.join(a, b);
    }
    let roots: HashSet<usize> = (0..web.parent.len()).map(|i| web.find(i)).collect();
    Connectedness { connected: roots.len() <= 1, components: roots.len(), spanning: web.spanning }
}

/// True iff no reflexive polytope on the same lattice strictly contains
/// `p`, i.e. `p*` has no proper reflexive subpolytope.
///
/// Such a subpolytope misses some vertex of `p*`, so it lies in the hull of
/// the remaining lattice points, which must then keep the interior point.
/// The search descends through those hulls and stops at the first
/// reflexive one; when every single drop loses the interior point (the dual
/// is very minimal) it ends immediately.
pub fn check_r_maximal(p: &Polytope) -> bool {
    let Ok(q) = dual(p) else {
        return false;
    };
    let points = q.lattice_points().to_vec();
    let mut all = BitSet::new(points.len());
    (0..points.len()).for_each(|i| all.insert(i));
    let mut seen = HashSet::new();
    let mut stack = vec![(all, q)];
    while let Some((bits, cur)) = stack.pop() {
        for v in cur.vertices() {
            let mut b = bits.clone();
            b.remove(points.binary_search(v).expect("vertex is a lattice point"));
            if !seen.insert(b.clone()) {
                continue;
            }
            let pts: Vec<_> = b.iter().map(|i| points[i].clone()).collect();
            let Some(sub) = hull(&pts).ok().filter(has_ip) else {
                continue;
            };
            if is_reflexive(&sub) {
                return false;
            }
            stack.push((b, sub));
        }
    }
    true
}
