//! Monte Carlo side of the exchange model: the pairwise trade kernel, seeded
//! reproducible runs, empirical inequality measures, and the
//! analytic-versus-simulated Gini curve.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::kem::law::{gini_analytic, n_of_lambda};

/// Generator behind every simulation, recorded in run manifests. ChaCha with
/// 8 rounds: seedable from a small integer, with independent streams so a
/// curve's points never share a random sequence.
pub const RNG_ALGORITHM: &str = "ChaCha8";

/// Parameters of one simulation run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SimConfig {
    /// Number of agents (at least 2).
    pub n_agents: usize,
    /// Saving propensity, in `[0, 1)`.
    pub lambda: f64,
    /// Measurement sweeps after thermalization; one sweep is `n_agents`
    /// exchanges.
    pub sweeps: u64,
    /// Sweeps discarded before measurement starts.
    pub thermalization: u64,
    /// RNG seed; same seed, same run, bit for bit.
    pub seed: u64,
    /// Wealth per agent at start (total is `n_agents * initial_wealth`).
    pub initial_wealth: f64,
    /// A wealth snapshot is recorded every this many measurement sweeps.
    pub snapshot_every: u64,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            n_agents: 1000,
            lambda: 0.0,
            sweeps: 5000,
            thermalization: 1000,
            seed: 42,
            initial_wealth: 1.0,
            snapshot_every: 10,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_agents < 2 {
            return Err(Error::InvalidConfig {
                detail: format!("n_agents = {} (need at least 2)", self.n_agents),
            });
        }
        if !(0.0..1.0).contains(&self.lambda) {
            return Err(Error::OutOfDomain {
                what: "lambda",
                value: self.lambda,
                domain: "[0, 1)",
            });
        }
        if self.sweeps == 0 {
            return Err(Error::InvalidConfig {
                detail: "sweeps = 0 (nothing to measure)".into(),
            });
        }
        if self.snapshot_every == 0 {
            return Err(Error::InvalidConfig {
                detail: "snapshot_every = 0".into(),
            });
        }
        if !(self.initial_wealth.is_finite() && self.initial_wealth > 0.0) {
            return Err(Error::InvalidConfig {
                detail: format!("initial_wealth = {} (need finite > 0)", self.initial_wealth),
            });
        }
        Ok(())
    }

    pub fn with_lambda(mut self, lambda: f64) -> Self {
        self.lambda = lambda;
        self
    }

    /// Number of snapshots a run with this config records.
    pub fn snapshot_count(&self) -> u64 {
        self.sweeps / self.snapshot_every
    }
}

/// Wealths of all agents. Construction and every exchange preserve the
/// invariants: each wealth is finite and non-negative, and the recorded
/// `total` never changes after construction (conservation is checked against
/// it, not re-derived).
#[derive(Debug, Clone, PartialEq)]
pub struct WealthState {
    wealths: Vec<f64>,
    total: f64,
}

impl WealthState {
    /// Every agent starts with the same wealth.
    pub fn uniform(n: usize, per_agent: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidConfig {
                detail: "wealth state needs at least one agent".into(),
            });
        }
        if !(per_agent.is_finite() && per_agent >= 0.0) {
            return Err(Error::OutOfDomain {
                what: "per_agent",
                value: per_agent,
                domain: "[0, inf)",
            });
        }
        Ok(WealthState {
            wealths: vec![per_agent; n],
            total: per_agent * n as f64,
        })
    }

    pub fn from_wealths(wealths: Vec<f64>) -> Result<Self> {
        if wealths.is_empty() {
            return Err(Error::InvalidConfig {
                detail: "wealth state needs at least one agent".into(),
            });
        }
        if let Some(bad) = wealths.iter().find(|w| !(w.is_finite() && **w >= 0.0)) {
            return Err(Error::OutOfDomain {
                what: "wealth",
                value: *bad,
                domain: "[0, inf)",
            });
        }
        let total = wealths.iter().sum();
        Ok(WealthState { wealths, total })
    }

    pub fn wealths(&self) -> &[f64] {
        &self.wealths
    }

    pub fn len(&self) -> usize {
        self.wealths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.wealths.is_empty()
    }

    /// Total wealth at construction time, the conserved quantity.
    pub fn total(&self) -> f64 {
        self.total
    }

    pub fn current_sum(&self) -> f64 {
        self.wealths.iter().sum()
    }

    /// |current sum - constructed total| / total; the accumulated float
    /// drift of the conservation law. Zero-total states report absolute
    /// drift.
    pub fn relative_drift(&self) -> f64 {
        let diff = (self.current_sum() - self.total).abs();
        if self.total > 0.0 {
            diff / self.total
        } else {
            diff
        }
    }

    /// One pairwise trade: agents `i` and `j` each keep a fraction `lambda`
    /// of their wealth and split the rest at fraction `eps`:
    ///
    /// ```text
    /// z_i' = lambda z_i + eps       (1 - lambda) (z_i + z_j)
    /// z_j' = lambda z_j + (1 - eps) (1 - lambda) (z_i + z_j)
    /// ```
    ///
    /// The sum `z_i' + z_j'` equals `z_i + z_j` up to rounding, and both
    /// stay non-negative.
    pub fn exchange(&mut self, i: usize, j: usize, eps: f64, lambda: f64) -> Result<()> {
        let n = self.wealths.len();
        if i >= n || j >= n {
            return Err(Error::InvalidExchange {
                detail: format!("agent index out of bounds ({i}, {j}) with {n} agents"),
            });
        }
        if i == j {
            return Err(Error::InvalidExchange {
                detail: format!("an agent cannot trade with itself (both {i})"),
            });
        }
        if !(0.0..=1.0).contains(&eps) {
            return Err(Error::OutOfDomain {
                what: "eps",
                value: eps,
                domain: "[0, 1]",
            });
        }
        if !(0.0..1.0).contains(&lambda) {
            return Err(Error::OutOfDomain {
                what: "lambda",
                value: lambda,
                domain: "[0, 1)",
            });
        }
        self.exchange_unchecked(i, j, eps, lambda);
        Ok(())
    }

    #[inline]
    fn exchange_unchecked(&mut self, i: usize, j: usize, eps: f64, lambda: f64) {
        let zi = self.wealths[i];
        let zj = self.wealths[j];
        let pool = (1.0 - lambda) * (zi + zj);
        self.wealths[i] = lambda * zi + eps * pool;
        self.wealths[j] = lambda * zj + (1.0 - eps) * pool;
    }
}

/// Wealths recorded at one measurement point.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    /// 1-based measurement sweep index (thermalization not counted).
    pub sweep: u64,
    pub wealths: Vec<f64>,
}

/// A completed simulation: final state plus periodic snapshots.
#[derive(Debug, Clone, PartialEq)]
pub struct SimRun {
    pub config: SimConfig,
    /// RNG stream the run consumed (0 for standalone runs; the grid index
    /// inside a curve).
    pub stream: u64,
    pub state: WealthState,
    pub snapshots: Vec<Snapshot>,
}

impl SimRun {
    /// Sample Gini of each snapshot, in snapshot order.
    pub fn snapshot_ginis(&self) -> Result<Vec<f64>> {
        self.snapshots
            .iter()
            .map(|s| sample_gini(&s.wealths))
            .collect()
    }

    /// All snapshot wealths pooled into one sample.
    pub fn pooled_wealths(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.snapshots.len() * self.config.n_agents);
        for s in &self.snapshots {
            out.extend_from_slice(&s.wealths);
        }
        out
    }

    pub fn relative_drift(&self) -> f64 {
        self.state.relative_drift()
    }
}

/// Runs the model on RNG stream 0. See [`simulate_stream`].
pub fn simulate(config: &SimConfig) -> Result<SimRun> {
    simulate_stream(config, 0)
}

/// Runs `thermalization + sweeps` sweeps of `n_agents` random exchanges.
///
/// Each exchange draws an ordered pair of distinct agents uniformly, then a
/// split fraction `eps` in `[0, 1)`. Runs are deterministic in
/// `(seed, stream)`: the generator is seeded with `config.seed` and moved to
/// `stream`, so curve points with different streams are independent but
/// individually reproducible.
pub fn simulate_stream(config: &SimConfig, stream: u64) -> Result<SimRun> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(stream);

    let n = config.n_agents;
    let mut state = WealthState::uniform(n, config.initial_wealth)?;
    let mut snapshots = Vec::with_capacity(config.snapshot_count() as usize);
    let total_sweeps = config.thermalization + config.sweeps;
    for sweep in 0..total_sweeps {
        for _ in 0..n {
            let i = rng.random_range(0..n);
            // Uniform over the other n-1 agents, skipping i.
            let mut j = rng.random_range(0..n - 1);
            if j >= i {
                j += 1;
            }
            let eps: f64 = rng.random();
            state.exchange_unchecked(i, j, eps, config.lambda);
        }
        if sweep >= config.thermalization {
            let done = sweep - config.thermalization + 1;
            if done % config.snapshot_every == 0 {
                snapshots.push(Snapshot {
                    sweep: done,
                    wealths: state.wealths.clone(),
                });
            }
        }
    }
    Ok(SimRun {
        config: *config,
        stream,
        state,
        snapshots,
    })
}

/// Sample Gini coefficient of non-negative wealths:
/// `sum_k (2k - n - 1) z_(k) / (n sum z)` over the ascending sort, `k`
/// 1-based. 0 for perfect equality, approaching 1 as one agent takes all.
pub fn sample_gini(wealths: &[f64]) -> Result<f64> {
    if wealths.is_empty() {
        return Err(Error::InsufficientData {
            detail: "sample Gini of an empty sample".into(),
        });
    }
    if let Some(bad) = wealths.iter().find(|w| !(w.is_finite() && **w >= 0.0)) {
        return Err(Error::OutOfDomain {
            what: "wealth",
            value: *bad,
            domain: "[0, inf)",
        });
    }
    let mut sorted = wealths.to_vec();
    sorted.sort_unstable_by(f64::total_cmp);
    let total: f64 = sorted.iter().sum();
    if total <= 0.0 {
        return Err(Error::DegenerateSeries {
            detail: "sample Gini undefined for zero total wealth".into(),
        });
    }
    let n = sorted.len() as f64;
    let mut acc = 0.0;
    for (k, z) in sorted.iter().enumerate() {
        acc += (2.0 * (k as f64 + 1.0) - n - 1.0) * z;
    }
    Ok((acc / (n * total)).clamp(0.0, 1.0))
}

/// Kolmogorov-Smirnov distance between a sample and a continuous CDF:
/// `sup_x |F_empirical(x) - F(x)|`, evaluated at the sorted sample points.
pub fn ks_distance<F: Fn(f64) -> f64>(samples: &[f64], cdf: F) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::InsufficientData {
            detail: "KS distance of an empty sample".into(),
        });
    }
    if let Some(bad) = samples.iter().find(|s| !s.is_finite()) {
        return Err(Error::OutOfDomain {
            what: "sample",
            value: *bad,
            domain: "finite reals",
        });
    }
    let mut sorted = samples.to_vec();
    sorted.sort_unstable_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let mut d = 0.0f64;
    for (idx, x) in sorted.iter().enumerate() {
        let f = cdf(*x);
        let lo = f - idx as f64 / n;
        let hi = (idx as f64 + 1.0) / n - f;
        d = d.max(lo).max(hi);
    }
    Ok(d)
}

/// One comparison point of the Gini curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GiniCurvePoint {
    pub lambda: f64,
    /// Closed-form Gini of the stationary law at this propensity.
    pub gini_analytic: f64,
    /// Monte Carlo estimate: mean of per-snapshot sample Ginis.
    pub gini_mc: f64,
    /// Standard error of the Monte Carlo mean.
    pub gini_mc_se: f64,
}

/// Analytic and simulated Gini across a saving-propensity grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GiniCurve {
    pub points: Vec<GiniCurvePoint>,
}

impl GiniCurve {
    /// CSV with a fixed header; floats print in shortest round-trip form,
    /// so emission is bit-stable.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("lambda,gini_analytic,gini_mc,gini_mc_se\n");
        for p in &self.points {
            out.push_str(&format!(
                "{},{},{},{}\n",
                p.lambda, p.gini_analytic, p.gini_mc, p.gini_mc_se
            ));
        }
        out
    }
}

/// Sweeps the saving propensity across `lambdas` (strictly increasing, each
/// in `[0, 0.99]`), simulating one run per value and pairing the Monte Carlo
/// Gini with the closed form.
///
/// Grid point `k` runs on RNG stream `k` of `base.seed`, which makes the
/// curve reproducible regardless of `threads`. `threads = 0` means one per
/// available CPU; each run needs at least 2 snapshots for a standard error.
pub fn gini_curve(lambdas: &[f64], base: &SimConfig, threads: usize) -> Result<GiniCurve> {
    if lambdas.is_empty() {
        return Err(Error::InvalidConfig {
            detail: "empty lambda grid".into(),
        });
    }
    for pair in lambdas.windows(2) {
        if pair[0] >= pair[1] {
            return Err(Error::InvalidConfig {
                detail: format!(
                    "lambda grid must be strictly increasing ({} then {})",
                    pair[0], pair[1]
                ),
            });
        }
    }
    for &l in lambdas {
        if !(0.0..=0.99).contains(&l) {
            return Err(Error::OutOfDomain {
                what: "lambda",
                value: l,
                domain: "[0, 0.99] for curve grids",
            });
        }
    }
    base.validate()?;
    if base.snapshot_count() < 2 {
        return Err(Error::InvalidConfig {
            detail: format!(
                "sweeps/snapshot_every = {} snapshots; need at least 2 for a standard error",
                base.snapshot_count()
            ),
        });
    }

    let point = |k: usize| -> Result<GiniCurvePoint> {
        let lambda = lambdas[k];
        let run = simulate_stream(&base.with_lambda(lambda), k as u64)?;
        let ginis = run.snapshot_ginis()?;
        let m = ginis.len() as f64;
        let mean = ginis.iter().sum::<f64>() / m;
        let var = ginis.iter().map(|g| (g - mean) * (g - mean)).sum::<f64>() / (m - 1.0);
        Ok(GiniCurvePoint {
            lambda,
            gini_analytic: gini_analytic(n_of_lambda(lambda)?)?,
            gini_mc: mean,
            gini_mc_se: (var / m).sqrt(),
        })
    };

    let jobs = lambdas.len();
    let t = effective_threads(threads, jobs);
    let mut slots: Vec<Option<Result<GiniCurvePoint>>> = vec![None; jobs];
    if t <= 1 {
        for (k, slot) in slots.iter_mut().enumerate() {
            *slot = Some(point(k));
        }
    } else {
        let (tx, rx) = std::sync::mpsc::channel();
        std::thread::scope(|scope| {
            for tid in 0..t {
                let tx = tx.clone();
                let point = &point;
                scope.spawn(move || {
                    for k in (tid..jobs).step_by(t) {
                        if tx.send((k, point(k))).is_err() {
                            return;
                        }
                    }
                });
            }
            drop(tx);
            for (k, r) in rx {
                slots[k] = Some(r);
            }
        });
    }

    let mut points = Vec::with_capacity(jobs);
    for slot in slots {
        points.push(slot.expect("every grid point was computed")?);
    }
    Ok(GiniCurve { points })
}

fn effective_threads(requested: usize, jobs: usize) -> usize {
    let t = if requested == 0 {
        std::thread::available_parallelism()
            .map(|n| n.get())
            .unwrap_or(1)
    } else {
        requested
    };
    t.max(1).min(jobs.max(1))
}

/// One histogram bin with the stationary-law density for comparison.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HistogramBin {
    pub left: f64,
    pub right: f64,
    pub count: u64,
    /// Bin count normalized to a density over the bin width.
    pub empirical_density: f64,
    /// Model density at the bin midpoint.
    pub model_density: f64,
}

/// Bins samples over `[0, max]` into `bins` equal-width cells and evaluates
/// `law` at each midpoint. Degenerate all-zero samples bin over `[0, 1]`.
pub fn wealth_histogram(
    samples: &[f64],
    bins: usize,
    law: &crate::kem::GammaLaw,
) -> Result<Vec<HistogramBin>> {
    if samples.is_empty() {
        return Err(Error::InsufficientData {
            detail: "histogram of an empty sample".into(),
        });
    }
    if bins == 0 {
        return Err(Error::InvalidConfig {
            detail: "histogram needs at least one bin".into(),
        });
    }
    if let Some(bad) = samples.iter().find(|s| !(s.is_finite() && **s >= 0.0)) {
        return Err(Error::OutOfDomain {
            what: "sample",
            value: *bad,
            domain: "[0, inf)",
        });
    }
    let max = samples.iter().fold(0.0f64, |m, s| m.max(*s));
    let span = if max > 0.0 { max } else { 1.0 };
    let width = span / bins as f64;
    let mut counts = vec![0u64; bins];
    for s in samples {
        let idx = ((s / width) as usize).min(bins - 1);
        counts[idx] += 1;
    }
    let total = samples.len() as f64;
    counts
        .iter()
        .enumerate()
        .map(|(i, &count)| {
            let left = i as f64 * width;
            let right = if i == bins - 1 {
                span
            } else {
                (i + 1) as f64 * width
            };
            let mid = 0.5 * (left + right);
            Ok(HistogramBin {
                left,
                right,
                count,
                empirical_density: count as f64 / (total * width),
                model_density: law.pdf(mid)?,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kem::law::GammaLaw;

    #[test]
    fn exchange_matches_hand_computation() {
        let mut st = WealthState::from_wealths(vec![2.0, 0.0]).unwrap();
        st.exchange(0, 1, 0.25, 0.5).unwrap();
        // Pool (1 - 0.5) * 2 = 1; keeps are 1 and 0; shares 0.25 and 0.75.
        assert_eq!(st.wealths(), &[1.25, 0.75]);
        assert_eq!(st.total(), 2.0);
        assert_eq!(st.relative_drift(), 0.0);
    }

    #[test]
    fn exchange_edge_splits() {
        // eps = 0 hands the whole pool to the second agent.
        let mut st = WealthState::from_wealths(vec![3.0, 1.0]).unwrap();
        st.exchange(0, 1, 0.0, 0.0).unwrap();
        assert_eq!(st.wealths(), &[0.0, 4.0]);
        // eps = 1 hands it to the first.
        let mut st = WealthState::from_wealths(vec![3.0, 1.0]).unwrap();
        st.exchange(0, 1, 1.0, 0.0).unwrap();
        assert_eq!(st.wealths(), &[4.0, 0.0]);
    }

    #[test]
    fn exchange_rejects_bad_arguments() {
        let mut st = WealthState::uniform(3, 1.0).unwrap();
        assert!(st.exchange(0, 0, 0.5, 0.0).is_err());
        assert!(st.exchange(0, 3, 0.5, 0.0).is_err());
        assert!(st.exchange(5, 0, 0.5, 0.0).is_err());
        assert!(st.exchange(0, 1, -0.1, 0.0).is_err());
        assert!(st.exchange(0, 1, 1.1, 0.0).is_err());
        assert!(st.exchange(0, 1, f64::NAN, 0.0).is_err());
        assert!(st.exchange(0, 1, 0.5, 1.0).is_err());
        assert!(st.exchange(0, 1, 0.5, -0.2).is_err());
        // State untouched by rejected calls.
        assert_eq!(st.wealths(), &[1.0, 1.0, 1.0]);
    }

    #[test]
    fn state_construction_validates() {
        assert!(WealthState::uniform(0, 1.0).is_err());
        assert!(WealthState::uniform(3, -1.0).is_err());
        assert!(WealthState::from_wealths(vec![]).is_err());
        assert!(WealthState::from_wealths(vec![1.0, -0.5]).is_err());
        assert!(WealthState::from_wealths(vec![1.0, f64::NAN]).is_err());
        let st = WealthState::uniform(4, 2.5).unwrap();
        assert_eq!(st.total(), 10.0);
        assert_eq!(st.len(), 4);
    }

    #[test]
    fn simulation_is_deterministic_per_seed_and_stream() {
        let cfg = SimConfig {
            n_agents: 50,
            lambda: 0.3,
            sweeps: 40,
            thermalization: 20,
            seed: 7,
            initial_wealth: 1.0,
            snapshot_every: 10,
        };
        let a = simulate(&cfg).unwrap();
        let b = simulate(&cfg).unwrap();
        assert_eq!(a, b);

        let c = simulate(&SimConfig { seed: 8, ..cfg }).unwrap();
        assert_ne!(a.state, c.state);

        let d = simulate_stream(&cfg, 1).unwrap();
        assert_ne!(a.state, d.state);
        assert_eq!(d.stream, 1);
    }

    #[test]
    fn snapshots_follow_the_cadence() {
        let cfg = SimConfig {
            n_agents: 10,
            lambda: 0.0,
            sweeps: 25,
            thermalization: 5,
            seed: 1,
            initial_wealth: 1.0,
            snapshot_every: 10,
        };
        let run = simulate(&cfg).unwrap();
        let sweeps: Vec<u64> = run.snapshots.iter().map(|s| s.sweep).collect();
        assert_eq!(sweeps, vec![10, 20]);
        assert_eq!(cfg.snapshot_count(), 2);
        assert_eq!(run.pooled_wealths().len(), 20);
    }

    #[test]
    fn simulation_conserves_wealth_and_nonnegativity() {
        let cfg = SimConfig {
            n_agents: 200,
            lambda: 0.5,
            sweeps: 200,
            thermalization: 100,
            seed: 3,
            initial_wealth: 2.0,
            snapshot_every: 50,
        };
        let run = simulate(&cfg).unwrap();
        assert!(
            run.relative_drift() < 1e-12,
            "drift {}",
            run.relative_drift()
        );
        assert!(run
            .state
            .wealths()
            .iter()
            .all(|w| *w >= 0.0 && w.is_finite()));
        for s in &run.snapshots {
            assert!(s.wealths.iter().all(|w| *w >= 0.0));
        }
    }

    #[test]
    fn sample_gini_hand_values() {
        assert_eq!(sample_gini(&[1.0]).unwrap(), 0.0);
        assert_eq!(sample_gini(&[3.0, 3.0, 3.0, 3.0]).unwrap(), 0.0);
        assert_eq!(sample_gini(&[1.0, 0.0]).unwrap(), 0.5);
        // One of four holds everything: G = (n-1)/n = 3/4.
        assert_eq!(sample_gini(&[0.0, 0.0, 0.0, 8.0]).unwrap(), 0.75);
        // [1, 2, 3]: mean pairwise |difference| relative to mean gives 2/9...
        // by the sorted identity: (-2*1 + 0*2 + 2*3)/(3*6) = 4/18 = 2/9.
        assert!((sample_gini(&[3.0, 1.0, 2.0]).unwrap() - 2.0 / 9.0).abs() < 1e-15);
    }

    /// O(n^2) pairwise-difference definition, independent of the sorted
    /// identity the implementation uses.
    fn gini_pairwise(w: &[f64]) -> f64 {
        let n = w.len() as f64;
        let mean = w.iter().sum::<f64>() / n;
        let mut acc = 0.0;
        for a in w {
            for b in w {
                acc += (a - b).abs();
            }
        }
        acc / (2.0 * n * n * mean)
    }

    #[test]
    fn sample_gini_matches_pairwise_oracle() {
        let samples = [
            vec![1.0, 2.0, 3.0, 4.0, 5.0],
            vec![0.0, 0.0, 1.0, 10.0],
            vec![2.5, 2.5, 2.5, 7.5, 0.1, 3.3],
            vec![1e-6, 5.0, 2.0, 2.0, 8.0, 8.0, 1.0],
        ];
        for w in &samples {
            let got = sample_gini(w).unwrap();
            let want = gini_pairwise(w);
            assert!((got - want).abs() < 1e-12, "{w:?}: {got} vs {want}");
        }
    }

    #[test]
    fn sample_gini_rejects_junk() {
        assert!(sample_gini(&[]).is_err());
        assert!(sample_gini(&[1.0, -2.0]).is_err());
        assert!(sample_gini(&[f64::NAN]).is_err());
        assert!(sample_gini(&[0.0, 0.0]).is_err());
    }

    #[test]
    fn ks_distance_hand_value() {
        // Two points 0.25 and 0.75 against U[0,1]: D = 1/4.
        let d = ks_distance(&[0.75, 0.25], |x| x.clamp(0.0, 1.0)).unwrap();
        assert!((d - 0.25).abs() < 1e-15);
        // A sample exactly at the quartiles of U[0,1]: D = 1/8... no, with
        // n = 4 at 1/8, 3/8, 5/8, 7/8 the gap at each point is 1/8.
        let d = ks_distance(&[0.125, 0.375, 0.625, 0.875], |x| x).unwrap();
        assert!((d - 0.125).abs() < 1e-15);
        assert!(ks_distance(&[], |x| x).is_err());
        assert!(ks_distance(&[f64::INFINITY], |x| x).is_err());
    }

    #[test]
    fn gini_curve_is_thread_count_invariant() {
        let base = SimConfig {
            n_agents: 60,
            lambda: 0.0,
            sweeps: 60,
            thermalization: 30,
            seed: 11,
            initial_wealth: 1.0,
            snapshot_every: 10,
        };
        let grid = [0.0, 0.4, 0.8];
        let seq = gini_curve(&grid, &base, 1).unwrap();
        let par = gini_curve(&grid, &base, 3).unwrap();
        let auto = gini_curve(&grid, &base, 0).unwrap();
        assert_eq!(seq, par);
        assert_eq!(seq, auto);
        assert_eq!(seq.points.len(), 3);
        for p in &seq.points {
            assert!(p.gini_mc_se > 0.0);
            assert!(p.gini_mc > 0.0 && p.gini_mc < 1.0);
        }
        // Analytic column: exact endpoints.
        assert!((seq.points[0].gini_analytic - 0.5).abs() < 1e-12);
    }

    #[test]
    fn gini_curve_validates_grid_and_config() {
        let base = SimConfig {
            n_agents: 10,
            sweeps: 20,
            thermalization: 0,
            snapshot_every: 10,
            ..SimConfig::default()
        };
        assert!(gini_curve(&[], &base, 1).is_err());
        assert!(gini_curve(&[0.5, 0.5], &base, 1).is_err());
        assert!(gini_curve(&[0.5, 0.2], &base, 1).is_err());
        assert!(gini_curve(&[0.0, 0.995], &base, 1).is_err());
        // Only one snapshot: no standard error.
        let thin = SimConfig { sweeps: 10, ..base };
        assert!(gini_curve(&[0.0, 0.5], &thin, 1).is_err());
    }

    #[test]
    fn curve_csv_is_parsable_and_stable() {
        let curve = GiniCurve {
            points: vec![
                GiniCurvePoint {
                    lambda: 0.0,
                    gini_analytic: 0.5,
                    gini_mc: 0.4992,
                    gini_mc_se: 0.0013,
                },
                GiniCurvePoint {
                    lambda: 0.1,
                    gini_analytic: 0.45,
                    gini_mc: 0.4481,
                    gini_mc_se: 0.0011,
                },
            ],
        };
        let csv = curve.to_csv();
        let mut lines = csv.lines();
        assert_eq!(
            lines.next(),
            Some("lambda,gini_analytic,gini_mc,gini_mc_se")
        );
        let row: Vec<f64> = lines
            .next()
            .unwrap()
            .split(',')
            .map(|c| c.parse().unwrap())
            .collect();
        assert_eq!(row, vec![0.0, 0.5, 0.4992, 0.0013]);
        assert_eq!(csv.lines().count(), 3);
    }

    #[test]
    fn histogram_bins_cover_and_count() {
        let law = GammaLaw::new(1.0, 1.0).unwrap();
        let samples = [0.0, 0.1, 0.4, 0.5, 0.9, 1.0, 1.6, 2.0];
        let bins = wealth_histogram(&samples, 4, &law).unwrap();
        assert_eq!(bins.len(), 4);
        assert_eq!(bins.iter().map(|b| b.count).sum::<u64>(), 8);
        // Max lands in the last bin; bin edges tile [0, max].
        assert_eq!(bins[0].left, 0.0);
        assert_eq!(bins[3].right, 2.0);
        assert_eq!(bins[3].count, 2); // 1.6 and 2.0
                                      // Empirical density integrates to 1 over the bins.
        let mass: f64 = bins
            .iter()
            .map(|b| b.empirical_density * (b.right - b.left))
            .sum();
        assert!((mass - 1.0).abs() < 1e-12);
        assert!(bins.iter().all(|b| b.model_density.is_finite()));

        assert!(wealth_histogram(&[], 4, &law).is_err());
        assert!(wealth_histogram(&samples, 0, &law).is_err());
        assert!(wealth_histogram(&[-1.0], 2, &law).is_err());
    }
}
