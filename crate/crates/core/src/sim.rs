//! Monte Carlo simulation of the multi-species q-TAZRP and the duality
//! observable.
//!
//! Conventions for the observable: `N+_x` counts particles at sites `>= x`,
//! `N-_x` at sites `<= x`, and the dual species paired with forward species
//! `i` in the product term is `1 - i`. The alternatives stay available
//! through [`ObservableConventions`].

use std::collections::BTreeMap;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{check_q, Error, Result};
use crate::exact::LatticeParams;
use crate::specfun::phi10;

/// Finite multi-species configuration: site -> per-species counts.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MultiSpeciesConfig {
    species_count: usize,
    occupancy: BTreeMap<i64, Vec<u32>>,
}

impl MultiSpeciesConfig {
    pub fn new(species_count: usize) -> Self {
        Self { species_count, occupancy: BTreeMap::new() }
    }

    /// Builds a configuration from `(site, species, count)` triples.
    pub fn from_counts(species_count: usize, entries: &[(i64, usize, u32)]) -> Result<Self> {
        let mut c = Self::new(species_count);
        for &(site, species, count) in entries {
            c.add(site, species, count)?;
        }
        Ok(c)
    }

    /// The two-species initial data `n1` species-0 particles at `x1`, `n2` species-1 at `x2`.
    pub fn two_site(params: &LatticeParams) -> Self {
        let mut c = Self::new(2);
        c.add(params.x1, 0, params.n1).expect("species 0 exists");
        c.add(params.x2, 1, params.n2).expect("species 1 exists");
        c
    }

    pub fn species_count(&self) -> usize {
        self.species_count
    }

    pub fn add(&mut self, site: i64, species: usize, count: u32) -> Result<()> {
        if species >= self.species_count {
            return Err(Error::Precondition(format!(
                "species {species} out of range for {} species",
                self.species_count
            )));
        }
        if count > 0 {
            let n = self.species_count;
            self.occupancy.entry(site).or_insert_with(|| vec![0; n])[species] += count;
        }
        Ok(())
    }

    pub fn count(&self, site: i64, species: usize) -> u32 {
        self.occupancy.get(&site).map_or(0, |z| z.get(species).copied().unwrap_or(0))
    }

    /// Occupied sites with their count vectors, left to right.
    pub fn sites(&self) -> impl Iterator<Item = (i64, &[u32])> {
        self.occupancy.iter().map(|(s, z)| (*s, z.as_slice()))
    }

    pub fn species_totals(&self) -> Vec<u64> {
        let mut t = vec![0u64; self.species_count];
        for z in self.occupancy.values() {
            for (k, c) in z.iter().enumerate() {
                t[k] += *c as u64;
            }
        }
        t
    }

    pub fn total(&self) -> u64 {
        self.species_totals().iter().sum()
    }

    pub fn translated(&self, c: i64) -> Self {
        Self {
            species_count: self.species_count,
            occupancy: self.occupancy.iter().map(|(s, z)| (s + c, z.clone())).collect(),
        }
    }

    fn move_right(&mut self, site: i64, species: usize) {
        let n = self.species_count;
        let z = self.occupancy.get_mut(&site).expect("site occupied");
        z[species] -= 1;
        if z.iter().all(|c| *c == 0) {
            self.occupancy.remove(&site);
        }
        self.occupancy.entry(site + 1).or_insert_with(|| vec![0; n])[species] += 1;
    }
}

/// Dual configuration: one species-0 particle at `y1`, one species-1 particle at `y2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DualPair {
    pub y1: i64,
    pub y2: i64,
}

impl DualPair {
    pub fn config(&self) -> MultiSpeciesConfig {
        let mut c = MultiSpeciesConfig::new(2);
        c.add(self.y1, 0, 1).expect("species 0 exists");
        c.add(self.y2, 1, 1).expect("species 1 exists");
        c
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub samples: u64,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Inequality {
    /// `N+_x` counts sites `>= x`, `N-_x` sites `<= x`.
    #[default]
    Weak,
    /// `N+_x` counts sites `> x`, `N-_x` sites `< x`.
    Strict,
}

/// Which dual species enters the product term of forward species `i`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum DualShift {
    /// Species `1 - i`.
    #[default]
    Reversal,
    /// Species `i + 1`; empty for the top species.
    Up,
    /// Species `i`.
    Down,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ObservableConventions {
    pub inequality: Inequality,
    pub shift: DualShift,
}

/// Rates `q^{z_0 + ... + z_{k-1}} (1 - q^{z_k}) / (1 - q)` for each species `k` at one site.
pub fn jump_rates(counts: &[u32], q: f64) -> Vec<f64> {
    let mut below = 0i32;
    counts
        .iter()
        .map(|&z| {
            let r = q.powi(below) * (1.0 - q.powi(z as i32)) / (1.0 - q);
            below += z as i32;
            r
        })
        .collect()
}

/// Runs the dynamics up to time `t` with the given generator.
pub fn gillespie_run_with<R: Rng + ?Sized>(
    initial: &MultiSpeciesConfig,
    q: f64,
    t: f64,
    rng: &mut R,
) -> Result<MultiSpeciesConfig> {
    check_q(q)?;
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::Precondition(format!("t must be finite and >= 0, got {t}")));
    }
    let mut state = initial.clone();
    let mut clock = 0.0;
    let mut rates: Vec<(i64, usize, f64)> = Vec::new();
    loop {
        rates.clear();
        let mut total = 0.0;
        for (site, z) in state.sites() {
            for (k, r) in jump_rates(z, q).into_iter().enumerate() {
                if r > 0.0 {
                    total += r;
                    rates.push((site, k, r));
                }
            }
        }
        if total == 0.0 {
            break;
        }
        let hold: f64 = Exp1.sample(rng);
        clock += hold / total;
        if clock > t {
            break;
        }
        let mut pick = rng.gen::<f64>() * total;
        let mut chosen = rates[rates.len() - 1];
        for &entry in &rates {
            if pick < entry.2 {
                chosen = entry;
                break;
            }
            pick -= entry.2;
        }
        state.move_right(chosen.0, chosen.1);
    }
    Ok(state)
}

fn trajectory_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// One trajectory to time `t`; deterministic in `seed`.
pub fn gillespie_run(initial: &MultiSpeciesConfig, q: f64, t: f64, seed: u64) -> Result<MultiSpeciesConfig> {
    gillespie_run_with(initial, q, t, &mut trajectory_rng(seed, 0))
}

fn in_plus(site: i64, x: i64, ineq: Inequality) -> bool {
    match ineq {
        Inequality::Weak => site >= x,
        Inequality::Strict => site > x,
    }
}

fn in_minus(site: i64, x: i64, ineq: Inequality) -> bool {
    match ineq {
        Inequality::Weak => site <= x,
        Inequality::Strict => site < x,
    }
}

fn count_where(config: &MultiSpeciesConfig, lo: usize, hi: usize, keep: impl Fn(i64) -> bool) -> u64 {
    config
        .sites()
        .filter(|(s, _)| keep(*s))
        .map(|(_, z)| z.iter().enumerate().filter(|(k, _)| *k >= lo && *k <= hi).map(|(_, c)| *c as u64).sum::<u64>())
        .sum()
}

/// Particles of species `lo..=hi` at sites `>= x`.
pub fn n_plus(config: &MultiSpeciesConfig, lo: usize, hi: usize, x: i64) -> u64 {
    n_plus_with(config, lo, hi, x, Inequality::Weak)
}

/// Particles of species `lo..=hi` at sites `<= x`.
pub fn n_minus(config: &MultiSpeciesConfig, lo: usize, hi: usize, x: i64) -> u64 {
    n_minus_with(config, lo, hi, x, Inequality::Weak)
}

pub fn n_plus_with(config: &MultiSpeciesConfig, lo: usize, hi: usize, x: i64, ineq: Inequality) -> u64 {
    count_where(config, lo, hi, |s| in_plus(s, x, ineq))
}

pub fn n_minus_with(config: &MultiSpeciesConfig, lo: usize, hi: usize, x: i64, ineq: Inequality) -> u64 {
    count_where(config, lo, hi, |s| in_minus(s, x, ineq))
}

fn require_two_species(xi: &MultiSpeciesConfig) -> Result<()> {
    if xi.species_count() != 2 {
        return Err(Error::Precondition(format!(
            "the observable is defined for 2 species, got {}",
            xi.species_count()
        )));
    }
    Ok(())
}

/// The height function `h(xi, eta)` for two species.
pub fn height_h(xi: &MultiSpeciesConfig, eta: &DualPair) -> Result<i64> {
    height_h_with(xi, eta, Inequality::Weak)
}

pub fn height_h_with(xi: &MultiSpeciesConfig, eta: &DualPair, ineq: Inequality) -> Result<i64> {
    require_two_species(xi)?;
    // With two species only forward/dual species 0 carries a nonempty range.
    let dual = eta.config();
    let mut h = 0i64;
    for (x, z) in xi.sites() {
        h -= z[0] as i64 * n_plus_with(&dual, 0, 0, x + 1, ineq) as i64;
    }
    h += n_plus_with(xi, 0, 0, eta.y1, ineq) as i64;
    Ok(h)
}

/// The duality observable `q^{h/2} prod phi10(...)` with the default conventions.
pub fn duality_observable(xi: &MultiSpeciesConfig, eta: &DualPair, q: f64) -> Result<f64> {
    duality_observable_with(xi, eta, q, ObservableConventions::default())
}

pub fn duality_observable_with(
    xi: &MultiSpeciesConfig,
    eta: &DualPair,
    q: f64,
    conv: ObservableConventions,
) -> Result<f64> {
    check_q(q)?;
    let h = height_h_with(xi, eta, conv.inequality)?;
    let dual = eta.config();
    let mut prod = 1.0;
    for (x, z) in xi.sites() {
        for (i, &n) in z.iter().enumerate() {
            if n == 0 {
                continue;
            }
            let below = n_minus_with(xi, i, i, x - 1, conv.inequality);
            let j = match conv.shift {
                DualShift::Reversal => Some(1 - i),
                DualShift::Up => (i + 1 < 2).then_some(i + 1),
                DualShift::Down => Some(i),
            };
            let above = j.map_or(0, |j| n_plus_with(&dual, j, j, x + 1, conv.inequality));
            let z = q.powf(0.5 - (below + above) as f64);
            prod *= phi10(n, q, z);
        }
    }
    Ok(q.powf(0.5 * h as f64) * prod)
}

/// Sums counts over species at each site.
pub fn colorblind_projection(config: &MultiSpeciesConfig) -> MultiSpeciesConfig {
    let mut out = MultiSpeciesConfig::new(1);
    for (site, z) in config.sites() {
        let total: u32 = z.iter().sum();
        out.add(site, 0, total).expect("species 0 exists");
    }
    out
}

/// Running mean and sum of squared deviations.
#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    n: u64,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.n += 1;
        let d = x - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (x - self.mean);
    }

    fn merge(self, o: Moments) -> Moments {
        if self.n == 0 {
            return o;
        }
        if o.n == 0 {
            return self;
        }
        let n = self.n + o.n;
        let d = o.mean - self.mean;
        Moments {
            n,
            mean: self.mean + d * o.n as f64 / n as f64,
            m2: self.m2 + o.m2 + d * d * (self.n as f64 * o.n as f64) / n as f64,
        }
    }
}

const BLOCK: u64 = 4096;

/// Monte Carlo mean of the duality observable over independent trajectories
/// started from the two-site initial data of `params`.
///
/// Trajectory `i` uses stream `i` of a ChaCha8 generator seeded with `seed`,
/// and blocks are reduced in a fixed order, so the result does not depend on
/// the thread count.
pub fn mc_estimate(params: &LatticeParams, samples: u64, seed: u64) -> Result<McEstimate> {
    mc_estimate_with(params, samples, seed, ObservableConventions::default())
}

pub fn mc_estimate_with(
    params: &LatticeParams,
    samples: u64,
    seed: u64,
    conv: ObservableConventions,
) -> Result<McEstimate> {
    params.validate()?;
    if samples < 100 {
        return Err(Error::Precondition(format!("samples must be >= 100, got {samples}")));
    }
    let initial = MultiSpeciesConfig::two_site(params);
    let eta = DualPair { y1: params.y1, y2: params.y2 };
    let blocks = samples.div_ceil(BLOCK);
    let parts = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut m = Moments::default();
            for i in b * BLOCK..((b + 1) * BLOCK).min(samples) {
                let end = gillespie_run_with(&initial, params.q, params.t, &mut trajectory_rng(seed, i))?;
                m.push(duality_observable_with(&end, &eta, params.q, conv)?);
            }
            Ok(m)
        })
        .collect::<Result<Vec<Moments>>>()?;
    let m = parts.into_iter().fold(Moments::default(), Moments::merge);
    let var = m.m2 / (m.n - 1) as f64;
    Ok(McEstimate { mean: m.mean, stderr: (var / m.n as f64).sqrt(), samples, seed })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::poisson_cdf;
    use proptest::prelude::*;

    fn single(site: i64) -> MultiSpeciesConfig {
        MultiSpeciesConfig::from_counts(1, &[(site, 0, 1)]).unwrap()
    }

    #[test]
    fn rate_examples() {
        assert!((jump_rates(&[1], 0.3)[0] - 1.0).abs() < 1e-15);
        let r = jump_rates(&[2, 1], 0.5);
        assert!((r[0] - 1.5).abs() < 1e-15 && (r[1] - 0.25).abs() < 1e-15);
        assert_eq!(jump_rates(&[0, 3], 0.5)[0], 0.0);
    }

    #[test]
    fn telescoping_rates() {
        let q: f64 = 0.37;
        for a in 0..=12u32 {
            for b in 0..=12 - a {
                for c in 0..=12 - a - b {
                    let total: f64 = jump_rates(&[a, b, c], q).iter().sum();
                    let expect = (1.0 - q.powi((a + b + c) as i32)) / (1.0 - q);
                    assert!((total - expect).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn zero_time_is_identity() {
        let c = MultiSpeciesConfig::from_counts(2, &[(0, 0, 2), (3, 1, 1)]).unwrap();
        assert_eq!(gillespie_run(&c, 0.5, 0.0, 7).unwrap(), c);
        assert!(gillespie_run(&c, 0.5, -1.0, 7).is_err());
        assert!(gillespie_run(&c, 1.5, 1.0, 7).is_err());
    }

    #[test]
    fn runs_are_reproducible_and_conserve_particles() {
        let c = MultiSpeciesConfig::from_counts(2, &[(0, 0, 3), (1, 1, 2), (1, 0, 1)]).unwrap();
        for seed in 0..50 {
            let a = gillespie_run(&c, 0.4, 3.0, seed).unwrap();
            assert_eq!(a, gillespie_run(&c, 0.4, 3.0, seed).unwrap());
            assert_eq!(a.species_totals(), c.species_totals());
        }
    }

    #[test]
    fn single_particle_is_poisson() {
        let (t, runs) = (2.0, 100_000u64);
        let mut hist = vec![0u64; 40];
        let start = single(0);
        for i in 0..runs {
            let end = gillespie_run_with(&start, 0.5, t, &mut trajectory_rng(11, i)).unwrap();
            let (site, _) = end.sites().next().unwrap();
            hist[site as usize] += 1;
        }
        let mut cum = 0u64;
        for (n, h) in hist.iter().enumerate().take(11) {
            cum += h;
            let p = poisson_cdf(n as u64, t);
            let emp = cum as f64 / runs as f64;
            let se = (p * (1.0 - p) / runs as f64).sqrt().max(1e-9);
            assert!((emp - p).abs() < 4.0 * se, "n = {n}: {emp} vs {p}");
        }
    }

    #[test]
    fn displacement_monotone_in_time() {
        let start = MultiSpeciesConfig::from_counts(2, &[(0, 0, 2), (1, 1, 1)]).unwrap();
        for seed in 0..40 {
            let mut prev = 0i64;
            for t in [0.5, 1.0, 2.0, 4.0] {
                let end = gillespie_run(&start, 0.5, t, seed).unwrap();
                let moved: i64 = end.sites().map(|(s, z)| s * z.iter().sum::<u32>() as i64).sum();
                assert!(moved >= prev);
                prev = moved;
            }
        }
    }

    #[test]
    fn counting_examples() {
        let empty = MultiSpeciesConfig::new(2);
        assert_eq!(n_plus(&empty, 0, 1, 0), 0);
        let c = MultiSpeciesConfig::from_counts(2, &[(5, 0, 1), (2, 1, 3)]).unwrap();
        assert_eq!(n_plus(&c, 0, 0, 5), 1);
        assert_eq!(n_plus(&c, 0, 0, 6), 0);
        assert_eq!(n_plus(&c, 0, 1, 2), n_plus(&c, 0, 0, 2) + n_plus(&c, 1, 1, 2));
        assert_eq!(n_minus(&c, 1, 1, 2), 3);
        assert_eq!(n_minus_with(&c, 1, 1, 2, Inequality::Strict), 0);
    }

    #[test]
    fn height_examples() {
        let eta = DualPair { y1: 5, y2: 7 };
        assert_eq!(height_h(&MultiSpeciesConfig::new(2), &eta).unwrap(), 0);
        let xi = MultiSpeciesConfig::from_counts(2, &[(0, 0, 1)]).unwrap();
        assert_eq!(height_h(&xi, &eta).unwrap(), -1);
        assert!(height_h(&single(0), &eta).is_err());
    }

    #[test]
    fn observable_examples() {
        let eta = DualPair { y1: 5, y2: 7 };
        assert_eq!(duality_observable(&MultiSpeciesConfig::new(2), &eta, 0.5).unwrap(), 1.0);
        // One species-0 particle at 0 below both dual particles: h = -1 and
        // the species-1 dual particle at 7 gives z = q^{-1/2}.
        let q: f64 = 0.5;
        let xi = MultiSpeciesConfig::from_counts(2, &[(0, 0, 1)]).unwrap();
        let expect = q.powf(-0.5) * (1.0 - q.powf(-1.5));
        assert!((duality_observable(&xi, &eta, q).unwrap() - expect).abs() < 1e-14);
    }

    #[test]
    fn zero_time_estimate_is_deterministic() {
        let p = LatticeParams { q: 0.5, n1: 2, n2: 1, x1: 0, x2: 1, y1: 2, y2: 3, t: 0.0 };
        let e = mc_estimate(&p, 200, 3).unwrap();
        let d = duality_observable(&MultiSpeciesConfig::two_site(&p), &DualPair { y1: 2, y2: 3 }, 0.5).unwrap();
        assert_eq!(e.stderr, 0.0);
        assert!((e.mean - d).abs() < 1e-12);
        assert!(mc_estimate(&p, 10, 3).is_err());
    }

    #[test]
    fn estimate_reproducible() {
        let p = LatticeParams { q: 0.5, n1: 1, n2: 1, x1: 0, x2: 1, y1: 2, y2: 3, t: 1.0 };
        let a = mc_estimate(&p, 5000, 9).unwrap();
        let b = mc_estimate(&p, 5000, 9).unwrap();
        assert_eq!(a, b);
        let c = mc_estimate(&p, 10_000, 9).unwrap();
        let ratio = c.stderr / a.stderr;
        assert!((ratio - 0.5f64.sqrt()).abs() < 0.2 * 0.5f64.sqrt());
    }

    #[test]
    fn projection_examples() {
        let c = MultiSpeciesConfig::from_counts(2, &[(4, 0, 2), (4, 1, 1)]).unwrap();
        let p = colorblind_projection(&c);
        assert_eq!(p.count(4, 0), 3);
        assert_eq!(colorblind_projection(&MultiSpeciesConfig::new(2)).total(), 0);
    }

    #[test]
    fn projection_matches_single_species_dynamics() {
        // Compare the first two moments of the total displacement.
        let two = MultiSpeciesConfig::from_counts(2, &[(0, 0, 2), (0, 1, 1), (1, 1, 1)]).unwrap();
        let one = colorblind_projection(&two);
        let (q, t, runs) = (0.5, 1.5, 40_000u64);
        let stat = |c: &MultiSpeciesConfig| -> (f64, f64) {
            let x: f64 = c.sites().map(|(s, z)| s as f64 * z.iter().sum::<u32>() as f64).sum();
            (x, x * x)
        };
        let mut a = (Moments::default(), Moments::default());
        let mut b = (Moments::default(), Moments::default());
        for i in 0..runs {
            let ea = colorblind_projection(&gillespie_run_with(&two, q, t, &mut trajectory_rng(1, i)).unwrap());
            let eb = gillespie_run_with(&one, q, t, &mut trajectory_rng(2, i)).unwrap();
            let (sa, sb) = (stat(&ea), stat(&eb));
            a.0.push(sa.0);
            a.1.push(sa.1);
            b.0.push(sb.0);
            b.1.push(sb.1);
        }
        for (x, y) in [(a.0, b.0), (a.1, b.1)] {
            let se = ((x.m2 + y.m2) / (runs - 1) as f64 / runs as f64).sqrt();
            assert!((x.mean - y.mean).abs() < 4.0 * se, "{} vs {}", x.mean, y.mean);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn observable_translation_invariant(
            a in 0i64..4, b in 0i64..4, n1 in 1u32..3, n2 in 1u32..3,
            y1 in -2i64..6, y2 in -2i64..6, c in -10i64..10, q in 0.1f64..0.9,
        ) {
            let xi = MultiSpeciesConfig::from_counts(2, &[(a, 0, n1), (b, 1, n2)]).unwrap();
            let eta = DualPair { y1, y2 };
            let moved = DualPair { y1: y1 + c, y2: y2 + c };
            let u = duality_observable(&xi, &eta, q).unwrap();
            let v = duality_observable(&xi.translated(c), &moved, q).unwrap();
            prop_assert!((u - v).abs() <= 1e-12 * u.abs().max(1.0));
            prop_assert_eq!(height_h(&xi, &eta).unwrap(), height_h(&xi.translated(c), &moved).unwrap());
        }
    }
}
