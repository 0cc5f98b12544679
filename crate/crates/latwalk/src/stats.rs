//! Ensemble statistics: histograms, goodness of fit, peaks and the derived
//! quantities compared against the oracles.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{Error, Result};

/// Counts keyed by an integer node.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Histogram {
    counts: BTreeMap<i64, u64>,
    total: u64,
}

impl Histogram {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, key: i64) {
        self.add_n(key, 1);
    }

    pub fn add_n(&mut self, key: i64, n: u64) {
        if n > 0 {
            *self.counts.entry(key).or_insert(0) += n;
            self.total += n;
        }
    }

    pub fn merge(&mut self, other: &Histogram) {
        for (k, n) in &other.counts {
            self.add_n(*k, *n);
        }
    }

    pub fn count(&self, key: i64) -> u64 {
        self.counts.get(&key).copied().unwrap_or(0)
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn is_empty(&self) -> bool {
        self.total == 0
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, u64)> + '_ {
        self.counts.iter().map(|(k, n)| (*k, *n))
    }

    /// Smallest and largest occupied keys.
    pub fn range(&self) -> Option<(i64, i64)> {
        Some((*self.counts.keys().next()?, *self.counts.keys().next_back()?))
    }

    /// Empirical pmf at `key`.
    pub fn pmf(&self, key: i64) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            self.count(key) as f64 / self.total as f64
        }
    }
}

/// Uniform bins over `[lo, hi)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Binning {
    pub lo: f64,
    pub hi: f64,
    pub bins: usize,
}

impl Binning {
    pub fn new(lo: f64, hi: f64, bins: usize) -> Result<Self> {
        if !(hi > lo) || bins == 0 || !lo.is_finite() || !hi.is_finite() {
            return Err(Error::Domain(format!("bad binning [{lo}, {hi}) x {bins}")));
        }
        Ok(Binning { lo, hi, bins })
    }

    /// Default momentum binning.
    pub fn momentum() -> Self {
        Binning {
            lo: -1.0,
            hi: 1.0,
            bins: 201,
        }
    }

    pub fn width(&self) -> f64 {
        (self.hi - self.lo) / self.bins as f64
    }

    pub fn index(&self, v: f64) -> Option<usize> {
        if !(v >= self.lo && v <= self.hi) {
            return None;
        }
        Some((((v - self.lo) / self.width()) as usize).min(self.bins - 1))
    }

    pub fn centre(&self, i: usize) -> f64 {
        self.lo + (i as f64 + 0.5) * self.width()
    }
}

/// Counts over a [`Binning`], with out-of-range tallies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinnedHistogram {
    pub binning: Binning,
    pub counts: Vec<u64>,
    pub outside: u64,
}

impl BinnedHistogram {
    pub fn new(binning: Binning) -> Self {
        BinnedHistogram {
            binning,
            counts: vec![0; binning.bins],
            outside: 0,
        }
    }

    pub fn add(&mut self, v: f64) {
        match self.binning.index(v) {
            Some(i) => self.counts[i] += 1,
            None => self.outside += 1,
        }
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum::<u64>() + self.outside
    }

    pub fn merge(&mut self, other: &BinnedHistogram) -> Result<()> {
        if self.binning != other.binning {
            return Err(Error::Statistics(
                "cannot merge histograms with different binning".into(),
            ));
        }
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
        self.outside += other.outside;
        Ok(())
    }
}

/// Everything accumulated over one ensemble. Replicas merge into one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleStats {
    pub positions: Histogram,
    pub momentum: BinnedHistogram,
    pub energy: BinnedHistogram,
    pub arrivals: u64,
    /// Exact sum of the recorded energies.
    pub energy_sum: f64,
    pub scenario_hash: String,
    pub seed: u64,
}

impl EnsembleStats {
    pub fn new(momentum: Binning, energy: Binning, scenario_hash: String, seed: u64) -> Self {
        EnsembleStats {
            positions: Histogram::new(),
            momentum: BinnedHistogram::new(momentum),
            energy: BinnedHistogram::new(energy),
            arrivals: 0,
            energy_sum: 0.0,
            scenario_hash,
            seed,
        }
    }

    pub fn record(&mut self, x: i64, vq: f64, energy: f64) {
        self.positions.add(x);
        self.momentum.add(vq);
        self.energy.add(energy);
        self.energy_sum += energy;
        self.arrivals += 1;
    }

    pub fn energy_mean(&self) -> Result<f64> {
        if self.arrivals == 0 {
            return Err(Error::Statistics("no arrivals".into()));
        }
        Ok(self.energy_sum / self.arrivals as f64)
    }

    pub fn merge(&mut self, other: &EnsembleStats) -> Result<()> {
        if self.scenario_hash != other.scenario_hash || self.seed != other.seed {
            return Err(Error::Statistics("cannot merge statistics of different runs".into()));
        }
        self.momentum.merge(&other.momentum)?;
        self.energy.merge(&other.energy)?;
        self.positions.merge(&other.positions);
        self.arrivals += other.arrivals;
        self.energy_sum += other.energy_sum;
        Ok(())
    }
}

/// Total variation distance `½ sum |p - q|` between two pmfs on the same
/// support.
pub fn tv_distance(empirical: &[f64], theoretical: &[f64]) -> Result<f64> {
    if empirical.len() != theoretical.len() {
        return Err(Error::Statistics(format!(
            "support mismatch: {} vs {} points",
            empirical.len(),
            theoretical.len()
        )));
    }
    Ok(0.5
        * empirical
            .iter()
            .zip(theoretical)
            .map(|(p, q)| (p - q).abs())
            .sum::<f64>())
}

/// TV distance between a node histogram and a pmf over `lo..=hi`. Mass of
/// the histogram outside the range counts fully.
pub fn tv_histogram<F: Fn(i64) -> f64>(h: &Histogram, pmf: F, lo: i64, hi: i64) -> Result<f64> {
    if h.is_empty() {
        return Err(Error::Statistics("empty histogram".into()));
    }
    let mut tv = 0.0;
    let mut inside = 0;
    for k in lo..=hi {
        tv += (h.pmf(k) - pmf(k)).abs();
        inside += h.count(k);
    }
    tv += (h.total() - inside) as f64 / h.total() as f64;
    Ok(0.5 * tv)
}

/// Expected TV distance between two independent empirical pmfs of sizes
/// `n1` and `n2` drawn from `p`, with its standard deviation, in the normal
/// approximation.
pub fn tv_noise(p: &[f64], n1: u64, n2: u64) -> (f64, f64) {
    let scale = 1.0 / n1 as f64 + 1.0 / n2 as f64;
    let (mut mean, mut var) = (0.0, 0.0);
    for &pk in p {
        let s2 = pk * scale;
        mean += s2.sqrt() * (2.0 / std::f64::consts::PI).sqrt();
        var += s2 * (1.0 - 2.0 / std::f64::consts::PI);
    }
    (0.5 * mean, 0.5 * var.sqrt())
}

/// Result of a chi-square goodness-of-fit test.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChiSquare {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
}

impl ChiSquare {
    pub fn passes(&self, level: f64) -> bool {
        self.p_value >= level
    }
}

/// Pearson chi-square of `observed` counts against bin probabilities,
/// pooling neighbouring bins until every expected count reaches 5.
pub fn chi_square(observed: &[u64], probs: &[f64]) -> Result<ChiSquare> {
    if observed.len() != probs.len() {
        return Err(Error::Statistics(format!(
            "support mismatch: {} vs {} bins",
            observed.len(),
            probs.len()
        )));
    }
    let n: u64 = observed.iter().sum();
    if n == 0 {
        return Err(Error::Statistics("no observations".into()));
    }
    let mass: f64 = probs.iter().sum();
    if !(mass > 0.0) {
        return Err(Error::Statistics("theoretical probabilities vanish".into()));
    }
    let mut pooled: Vec<(f64, f64)> = Vec::new();
    let (mut o, mut e) = (0.0, 0.0);
    for (obs, p) in observed.iter().zip(probs) {
        o += *obs as f64;
        e += p / mass * n as f64;
        if e >= 5.0 {
            pooled.push((o, e));
            o = 0.0;
            e = 0.0;
        }
    }
    if e > 0.0 || o > 0.0 {
        match pooled.last_mut() {
            Some(last) => {
                last.0 += o;
                last.1 += e;
            }
            None => pooled.push((o, e)),
        }
    }
    if pooled.len() < 2 {
        return Err(Error::Statistics("too few pooled bins for a chi-square test".into()));
    }
    let statistic: f64 = pooled.iter().map(|(o, e)| (o - e).powi(2) / e).sum();
    let dof = pooled.len() - 1;
    let dist = ChiSquared::new(dof as f64).map_err(|e| Error::Statistics(e.to_string()))?;
    Ok(ChiSquare {
        statistic,
        dof,
        p_value: dist.sf(statistic),
    })
}

/// Fringe visibility from a node histogram folded with `period` nodes into
/// bins of `bin` nodes.
pub fn fringe_visibility(h: &Histogram, period: i64, bin: i64) -> Result<f64> {
    if period <= 0 || bin <= 0 || period % bin != 0 {
        return Err(Error::Statistics(format!("bin {bin} must divide period {period}")));
    }
    let (lo, hi) = h.range().ok_or_else(|| Error::Statistics("empty histogram".into()))?;
    if hi - lo + 1 < period {
        return Err(Error::Statistics(format!(
            "period {period} longer than the support {}",
            hi - lo + 1
        )));
    }
    let nb = (period / bin) as usize;
    let mut folded = vec![0u64; nb];
    let mut visits = vec![0u64; nb];
    for x in lo..=hi {
        let b = (x.rem_euclid(period) / bin) as usize;
        folded[b] += h.count(x);
        visits[b] += 1;
    }
    let rates: Vec<f64> = folded.iter().zip(&visits).map(|(c, v)| *c as f64 / *v as f64).collect();
    let max = rates.iter().copied().fold(f64::MIN, f64::max);
    let min = rates.iter().copied().fold(f64::MAX, f64::min);
    if max + min <= 0.0 {
        return Err(Error::Statistics("flat empty fringe".into()));
    }
    Ok((max - min) / (max + min))
}

/// Peak locations in a binned histogram, strongest first. Counts are
/// smoothed with a 3-bin moving average; a local maximum is kept when its
/// prominence exceeds three Poisson standard deviations of its height.
pub fn peak_detect(h: &BinnedHistogram) -> Vec<f64> {
    peak_detect_smoothed(h, 1)
}

/// [`peak_detect`] with a `2 half + 1` bin moving average; `half = 0` uses
/// raw counts, for peaks closer than three bins.
pub fn peak_detect_smoothed(h: &BinnedHistogram, half: usize) -> Vec<f64> {
    let c = &h.counts;
    let n = c.len();
    if n < 3 {
        return Vec::new();
    }
    let s: Vec<f64> = (0..n)
        .map(|i| {
            let lo = i.saturating_sub(half);
            let hi = (i + half).min(n - 1);
            (lo..=hi).map(|k| c[k] as f64).sum::<f64>() / (hi - lo + 1) as f64
        })
        .collect();
    let mut peaks = Vec::new();
    for i in 0..n {
        let left_ok = i == 0 || s[i] > s[i - 1];
        let right_ok = i == n - 1 || s[i] >= s[i + 1];
        if !(left_ok && right_ok) || s[i] <= 0.0 {
            continue;
        }
        let walk = |range: &mut dyn Iterator<Item = usize>| {
            let mut low = s[i];
            for k in range {
                if s[k] > s[i] {
                    break;
                }
                low = low.min(s[k]);
            }
            low
        };
        let left = walk(&mut (0..i).rev());
        let right = walk(&mut (i + 1..n));
        let prominence = s[i] - left.max(right);
        let edge = i == 0 || i == n - 1;
        let prominence = if edge { s[i] - left.min(right) } else { prominence };
        if prominence > 3.0 * s[i].sqrt() {
            peaks.push((s[i], h.binning.centre(i)));
        }
    }
    peaks.sort_by(|a, b| b.0.total_cmp(&a.0));
    peaks.into_iter().map(|(_, v)| v).collect()
}

/// Fraction of arrivals on the source's side of a barrier at `boundary`.
/// Arrivals on the barrier node count half to each side.
pub fn reflection_ratio(h: &Histogram, boundary: i64, source: i64) -> Result<f64> {
    if h.is_empty() {
        return Err(Error::Statistics("empty histogram".into()));
    }
    if source == boundary {
        return Err(Error::Domain("source sits on the barrier".into()));
    }
    let side = (source - boundary).signum();
    let mut same = 0.0;
    for (x, n) in h.iter() {
        let s = (x - boundary).signum();
        if s == side {
            same += n as f64;
        } else if s == 0 {
            same += 0.5 * n as f64;
        }
    }
    Ok(same / h.total() as f64)
}

/// Mean of `½((v)² + omega² x²)` over `(x, v)` samples.
pub fn energy_mean(samples: &[(f64, f64)], omega: f64) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::Statistics("no samples".into()));
    }
    let s: f64 = samples.iter().map(|(x, v)| 0.5 * (v * v + omega * omega * x * x)).sum();
    Ok(s / samples.len() as f64)
}
