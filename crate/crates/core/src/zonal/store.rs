//! In-process memoization and on-disk persistence of zonal tables and
//! product coefficients.
//!
//! Files live in `ROY_CACHE_DIR` (default: the platform cache directory plus
//! `roy-exact`). A degree-`k`, dimension-`m` table is stored as
//! `zonal_k{k}_m{m}.tsv` with lines `kappa<TAB>mu<TAB>num/den`; the product
//! `C_κ C_τ` in dimension `m` as `g_k{κ}_t{τ}_m{m}.tsv` with lines
//! `delta<TAB>num/den`. Tables are immutable once built; each key is built by
//! a single writer and persisted through an atomic rename.

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex, OnceLock};

use num::{BigInt, Zero};

use crate::error::{domain, Error, Result};
use crate::partition::Partition;

use super::epoly::e_product;
use super::special::zonal_at_identity;
use super::table::{zonal_table, ZonalTable};
use super::Q;

/// Product coefficients `δ ↦ g^δ_{κ,τ}` (nonzero entries only).
pub type ProductCoefficients = BTreeMap<Partition, Q>;

type Slot<T> = Arc<OnceLock<Arc<T>>>;

/// Memoizing store for zonal tables and product coefficients.
#[derive(Debug, Default)]
pub struct ZonalStore {
    dir: Option<PathBuf>,
    tables: Mutex<HashMap<(u32, usize), Slot<ZonalTable>>>,
    products: Mutex<HashMap<(Partition, Partition, usize), Slot<ProductCoefficients>>>,
}

static GLOBAL: OnceLock<ZonalStore> = OnceLock::new();

/// Environment variable naming the cache directory.
pub const CACHE_ENV: &str = "ROY_CACHE_DIR";

impl ZonalStore {
    /// A store that never touches the filesystem.
    pub fn in_memory() -> Self {
        Self::default()
    }

    /// A store persisting to `dir`, created on first write.
    pub fn persistent(dir: impl Into<PathBuf>) -> Self {
        ZonalStore {
            dir: Some(dir.into()),
            ..Self::default()
        }
    }

    /// A store configured from `ROY_CACHE_DIR`, falling back to the platform
    /// cache directory. Without either, tables are kept in memory only.
    pub fn from_env() -> Self {
        match default_cache_dir() {
            Some(dir) => Self::persistent(dir),
            None => Self::in_memory(),
        }
    }

    /// Process-wide store, configured from the environment on first use
    /// unless [`ZonalStore::init_global`] ran earlier.
    pub fn global() -> &'static ZonalStore {
        GLOBAL.get_or_init(ZonalStore::from_env)
    }

    /// Installs `store` as the process-wide store. Fails once the global
    /// store is in use.
    pub fn init_global(store: ZonalStore) -> Result<()> {
        GLOBAL.set(store).map_err(|_| domain("the global coefficient store is already in use"))
    }

    pub fn dir(&self) -> Option<&Path> {
        self.dir.as_deref()
    }

    /// The zonal table of degree `k` in dimension `m`.
    pub fn table(&self, k: u32, m: usize) -> Arc<ZonalTable> {
        let slot = {
            let mut map = self.tables.lock().expect("table map poisoned");
            map.entry((k, m)).or_default().clone()
        };
        slot.get_or_init(|| {
            let path = self.dir.as_ref().map(|d| d.join(table_file_name(k, m)));
            if let Some(path) = &path {
                if path.exists() {
                    if let Ok(t) = load_table(path, k, m) {
                        return Arc::new(t);
                    }
                }
            }
            let t = zonal_table(k, m);
            if let Some(path) = &path {
                // Persistence is best effort; the in-memory table stays valid.
                let _ = save_table(path, &t);
            }
            Arc::new(t)
        })
        .clone()
    }

    /// Coefficients `g^δ_{κ,τ}` of `C_κ C_τ = Σ_δ g^δ_{κ,τ} C_δ` in dimension `m`.
    pub fn product(&self, kappa: &Partition, tau: &Partition, m: usize) -> Arc<ProductCoefficients> {
        let key = (kappa.clone(), tau.clone(), m);
        let slot = {
            let mut map = self.products.lock().expect("product map poisoned");
            map.entry(key).or_default().clone()
        };
        slot.get_or_init(|| {
            let path = self
                .dir
                .as_ref()
                .map(|d| d.join(product_file_name(kappa, tau, m)));
            if let Some(path) = &path {
                if path.exists() {
                    if let Ok(g) = load_product(path, kappa, tau, m) {
                        return Arc::new(g);
                    }
                }
            }
            let g = self.compute_product(kappa, tau, m);
            if let Some(path) = &path {
                let _ = save_product(path, &g);
            }
            Arc::new(g)
        })
        .clone()
    }

    fn compute_product(&self, kappa: &Partition, tau: &Partition, m: usize) -> ProductCoefficients {
        if kappa.len() > m || tau.len() > m {
            return ProductCoefficients::new();
        }
        let (k, t) = (kappa.weight(), tau.weight());
        let left = self.table(k, m).row(kappa).expect("κ fits the table");
        let right = self.table(t, m).row(tau).expect("τ fits the table");
        let prod = e_product(&left, &right).expect("same dimension");
        self.table(k + t, m)
            .to_zonal_basis(&prod)
            .expect("product has degree k + t")
            .into_iter()
            .collect()
    }
}

/// `ROY_CACHE_DIR`, or the platform cache home joined with `roy-exact`.
pub fn default_cache_dir() -> Option<PathBuf> {
    match std::env::var_os(CACHE_ENV) {
        Some(v) if !v.is_empty() => Some(PathBuf::from(v)),
        _ => dirs::cache_dir().map(|d| d.join("roy-exact")),
    }
}

pub fn table_file_name(k: u32, m: usize) -> String {
    format!("zonal_k{k}_m{m}.tsv")
}

pub fn product_file_name(kappa: &Partition, tau: &Partition, m: usize) -> String {
    format!("g_k{kappa}_t{tau}_m{m}.tsv")
}

fn format_rational(q: &Q) -> String {
    format!("{}/{}", q.numer(), q.denom())
}

fn parse_rational(s: &str) -> Option<Q> {
    let (n, d) = match s.split_once('/') {
        Some((n, d)) => (n.trim().parse::<BigInt>().ok()?, d.trim().parse::<BigInt>().ok()?),
        None => (s.trim().parse::<BigInt>().ok()?, BigInt::from(1)),
    };
    if d.is_zero() {
        return None;
    }
    Some(Q::new(n, d))
}

fn write_atomically(path: &Path, contents: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    let tmp = path.with_extension(format!("tsv.{}.tmp", std::process::id()));
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(contents.as_bytes())?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

fn corrupt(path: &Path, reason: impl Into<String>) -> Error {
    Error::Cache {
        path: path.display().to_string(),
        reason: reason.into(),
    }
}

pub fn save_table(path: &Path, table: &ZonalTable) -> Result<()> {
    let mut out = String::new();
    for (kappa, mu, c) in table.entries() {
        out.push_str(&format!("{kappa}\t{mu}\t{}\n", format_rational(c)));
    }
    write_atomically(path, &out)
}

/// Loads a persisted table, rejecting files that violate any table invariant.
pub fn load_table(path: &Path, k: u32, m: usize) -> Result<ZonalTable> {
    let text = fs::read_to_string(path)?;
    let mut entries = Vec::new();
    for (n, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        let [kappa, mu, value] = fields[..] else {
            return Err(corrupt(path, format!("line {}: expected 3 fields", n + 1)));
        };
        let kappa: Partition = kappa
            .parse()
            .map_err(|_| corrupt(path, format!("line {}: bad partition", n + 1)))?;
        let mu: Partition = mu
            .parse()
            .map_err(|_| corrupt(path, format!("line {}: bad partition", n + 1)))?;
        let value = parse_rational(value)
            .ok_or_else(|| corrupt(path, format!("line {}: bad rational", n + 1)))?;
        entries.push((kappa, mu, value));
    }
    ZonalTable::from_entries(k, m, entries).map_err(|e| corrupt(path, e.to_string()))
}

pub fn save_product(path: &Path, g: &ProductCoefficients) -> Result<()> {
    let mut out = String::new();
    for (delta, c) in g {
        out.push_str(&format!("{delta}\t{}\n", format_rational(c)));
    }
    write_atomically(path, &out)
}

/// Loads persisted product coefficients. Every `δ` must have weight
/// `|κ| + |τ|` and at most `m` parts, and the identity-matrix check
/// `Σ_δ g^δ C_δ(I_m) = C_κ(I_m) C_τ(I_m)` must hold exactly.
pub fn load_product(path: &Path, kappa: &Partition, tau: &Partition, m: usize) -> Result<ProductCoefficients> {
    let text = fs::read_to_string(path)?;
    let weight = kappa.weight() + tau.weight();
    let mut g = ProductCoefficients::new();
    for (n, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let Some((delta, value)) = line.split_once('\t') else {
            return Err(corrupt(path, format!("line {}: expected 2 fields", n + 1)));
        };
        let delta: Partition = delta
            .parse()
            .map_err(|_| corrupt(path, format!("line {}: bad partition", n + 1)))?;
        if delta.weight() != weight || delta.len() > m {
            return Err(corrupt(path, format!("line {}: {delta} out of range", n + 1)));
        }
        let value = parse_rational(value)
            .ok_or_else(|| corrupt(path, format!("line {}: bad rational", n + 1)))?;
        if value.is_zero() || g.insert(delta, value).is_some() {
            return Err(corrupt(path, format!("line {}: zero or duplicate entry", n + 1)));
        }
    }
    let lhs: Q = g.iter().map(|(d, c)| c * zonal_at_identity(d, m)).sum();
    if lhs != zonal_at_identity(kappa, m) * zonal_at_identity(tau, m) {
        return Err(corrupt(path, "coefficients fail the identity-matrix check"));
    }
    Ok(g)
}
