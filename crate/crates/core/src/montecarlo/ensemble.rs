use std::io::Write;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use super::MartingaleDriver;
use crate::error::{Error, Result};
use crate::kernel_models::RationalModel;
use crate::numeric::SampleStats;

/// Simulated driver paths on a common time grid. Path `p` is generated from
/// stream `p` of a ChaCha generator keyed by the seed, so the ensemble is a
/// pure function of its inputs whatever the thread count.
#[derive(Debug, Clone, PartialEq)]
pub struct PathEnsemble {
    grid: Vec<f64>,
    n_paths: usize,
    seed: u64,
    correlation: f64,
    m: Vec<f64>,
    n: Option<Vec<f64>>,
}

struct StepMoments {
    var_m: f64,
    var_n: f64,
    cov: f64,
}

fn validate_grid(grid: &[f64]) -> Result<()> {
    if grid.len() < 2 {
        return Err(Error::invalid("simulation grid needs at least two times"));
    }
    if let Some(w) = grid.windows(2).find(|w| !(w[1] > w[0])) {
        return Err(Error::invalid(format!("simulation grid must increase strictly: {} then {}", w[0], w[1])));
    }
    if !(grid[0] >= 0.0) || !grid[grid.len() - 1].is_finite() {
        return Err(Error::invalid("simulation grid must be finite and nonnegative"));
    }
    Ok(())
}

/// Simulates `n_paths` paths of one or two GBM drivers from `M_0 = N_0 = 1` on
/// `grid` (0 is prepended when missing), with correlation `ρ` between the
/// driving Brownian motions.
pub fn simulate_paths(
    drivers: &[&MartingaleDriver],
    grid: &[f64],
    n_paths: usize,
    seed: u64,
    correlation: f64,
) -> Result<PathEnsemble> {
    let mut g = grid.to_vec();
    if g.first() != Some(&0.0) {
        g.insert(0, 0.0);
    }
    simulate_from(drivers, &g, (1.0, 1.0), n_paths, seed, correlation)
}

/// Simulates from factor values `start` at time `grid[0]`.
pub fn simulate_from(
    drivers: &[&MartingaleDriver],
    grid: &[f64],
    start: (f64, f64),
    n_paths: usize,
    seed: u64,
    correlation: f64,
) -> Result<PathEnsemble> {
    validate_grid(grid)?;
    if n_paths == 0 {
        return Err(Error::invalid("number of paths must be at least 1"));
    }
    if !(1..=2).contains(&drivers.len()) {
        return Err(Error::invalid(format!("expected 1 or 2 drivers, got {}", drivers.len())));
    }
    if !(correlation.is_finite() && (-1.0..=1.0).contains(&correlation)) {
        return Err(Error::invalid(format!("correlation must lie in [-1, 1], got {correlation}")));
    }
    let two = drivers.len() == 2;
    let steps: Vec<StepMoments> = grid
        .windows(2)
        .map(|w| {
            let var_m = drivers[0].integrated_variance(w[0], w[1]);
            if two {
                StepMoments {
                    var_m,
                    var_n: drivers[1].integrated_variance(w[0], w[1]),
                    cov: correlation * drivers[0].integrated_covariance(drivers[1], w[0], w[1]),
                }
            } else {
                StepMoments { var_m, var_n: 0.0, cov: 0.0 }
            }
        })
        .collect();

    let len = grid.len();
    let mut m = vec![0.0; n_paths * len];
    let mut n = if two { Some(vec![0.0; n_paths * len]) } else { None };

    let run = |path: usize, out_m: &mut [f64], mut out_n: Option<&mut [f64]>| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(path as u64);
        let (mut x, mut y) = (start.0, start.1);
        out_m[0] = x;
        if let Some(o) = out_n.as_deref_mut() {
            o[0] = y;
        }
        for (i, s) in steps.iter().enumerate() {
            let z1: f64 = StandardNormal.sample(&mut rng);
            let sd_m = s.var_m.sqrt();
            x *= (-0.5 * s.var_m + sd_m * z1).exp();
            out_m[i + 1] = x;
            if let Some(o) = out_n.as_deref_mut() {
                let z2: f64 = StandardNormal.sample(&mut rng);
                // exact bivariate normal log-increments with covariance `cov`
                let loading = if s.var_m > 0.0 { s.cov / sd_m } else { 0.0 };
                let resid = (s.var_n - loading * loading).max(0.0).sqrt();
                y *= (-0.5 * s.var_n + loading * z1 + resid * z2).exp();
                o[i + 1] = y;
            }
        }
    };

    match n.as_mut() {
        None => m.par_chunks_mut(len).enumerate().for_each(|(p, om)| run(p, om, None)),
        Some(nv) => m
            .par_chunks_mut(len)
            .zip(nv.par_chunks_mut(len))
            .enumerate()
            .for_each(|(p, (om, on))| run(p, om, Some(on))),
    }

    Ok(PathEnsemble { grid: grid.to_vec(), n_paths, seed, correlation, m, n })
}

impl PathEnsemble {
    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn n_paths(&self) -> usize {
        self.n_paths
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn correlation(&self) -> f64 {
        self.correlation
    }

    pub fn factors(&self) -> usize {
        if self.n.is_some() {
            2
        } else {
            1
        }
    }

    pub fn m(&self, path: usize, i: usize) -> f64 {
        self.m[path * self.grid.len() + i]
    }

    pub fn n(&self, path: usize, i: usize) -> Option<f64> {
        self.n.as_ref().map(|v| v[path * self.grid.len() + i])
    }

    /// `M` at grid index `i` across all paths.
    pub fn m_at(&self, i: usize) -> Vec<f64> {
        (0..self.n_paths).map(|p| self.m(p, i)).collect()
    }

    pub fn n_at(&self, i: usize) -> Option<Vec<f64>> {
        self.n.as_ref().map(|_| (0..self.n_paths).map(|p| self.n(p, i).expect("two factors")).collect())
    }

    /// Index of grid time `t` (exact match up to 1e-9 relative).
    pub fn index_of(&self, t: f64) -> Result<usize> {
        self.grid
            .iter()
            .position(|&g| (g - t).abs() <= 1e-9 * t.abs().max(1.0))
            .ok_or_else(|| Error::invalid(format!("time {t} is not on the simulation grid")))
    }

    /// CSV with columns `path,t,M[,N]`.
    pub fn write_csv<W: Write>(&self, writer: W, format_value: impl Fn(f64) -> String) -> Result<()> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(writer);
        if self.n.is_some() {
            w.write_record(["path", "t", "M", "N"])?;
        } else {
            w.write_record(["path", "t", "M"])?;
        }
        for p in 0..self.n_paths {
            for (i, &t) in self.grid.iter().enumerate() {
                let mut rec = vec![p.to_string(), format_value(t), format_value(self.m(p, i))];
                if let Some(nv) = self.n(p, i) {
                    rec.push(format_value(nv));
                }
                w.write_record(&rec)?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

/// Kernel values `π_t` per path per grid time.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelPaths {
    grid: Vec<f64>,
    n_paths: usize,
    values: Vec<f64>,
}

impl KernelPaths {
    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn n_paths(&self) -> usize {
        self.n_paths
    }

    pub fn value(&self, path: usize, i: usize) -> f64 {
        self.values[path * self.grid.len() + i]
    }

    pub fn at(&self, i: usize) -> Vec<f64> {
        (0..self.n_paths).map(|p| self.value(p, i)).collect()
    }

    pub fn cross_section(&self, i: usize) -> SampleStats {
        SampleStats::from_slice(&self.at(i))
    }
}

/// `π_t = a_t + b_t M_t (+ c_t N_t)` along every path. Fails if any value is
/// not strictly positive, which would contradict the model's construction.
pub fn kernel_paths(model: &RationalModel, ensemble: &PathEnsemble) -> Result<KernelPaths> {
    if model.factors() != ensemble.factors() {
        return Err(Error::invalid(format!(
            "model has {} factor(s) but the ensemble simulates {}",
            model.factors(),
            ensemble.factors()
        )));
    }
    let len = ensemble.grid.len();
    let mut values = vec![0.0; ensemble.n_paths * len];
    values.par_chunks_mut(len).enumerate().for_each(|(p, out)| {
        for (i, &t) in ensemble.grid.iter().enumerate() {
            out[i] = model.kernel(t, ensemble.m(p, i), ensemble.n(p, i));
        }
    });
    if let Some(pos) = values.iter().position(|v| !(*v > 0.0 && v.is_finite())) {
        let (p, i) = (pos / len, pos % len);
        return Err(Error::invalid(format!(
            "kernel not strictly positive on path {p} at t = {}: {}",
            ensemble.grid[i], values[pos]
        )));
    }
    Ok(KernelPaths { grid: ensemble.grid.clone(), n_paths: ensemble.n_paths, values })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::montecarlo::VolatilityPiece;

    #[test]
    fn martingale_moments() {
        let d = MartingaleDriver::constant(0.2).unwrap();
        let ens = simulate_paths(&[&d], &[0.5, 1.0], 100_000, 42, 0.0).unwrap();
        let m1 = ens.m_at(2);
        let s = SampleStats::from_slice(&m1);
        assert!(s.agrees_with(1.0, 4.0), "mean {} se {}", s.mean, s.std_error);
        let sq: Vec<f64> = m1.iter().map(|x| x * x).collect();
        let s2 = SampleStats::from_slice(&sq);
        assert!(s2.agrees_with(0.04f64.exp(), 4.0), "mean {} se {}", s2.mean, s2.std_error);
        assert!(SampleStats::from_slice(&ens.m_at(1)).agrees_with(1.0, 4.0));
    }

    #[test]
    fn zero_volatility_is_constant() {
        let d = MartingaleDriver::constant(0.0).unwrap();
        let ens = simulate_paths(&[&d, &d], &[1.0, 5.0], 100, 1, 0.5).unwrap();
        for p in 0..100 {
            for i in 0..3 {
                assert_eq!(ens.m(p, i), 1.0);
                assert_eq!(ens.n(p, i), Some(1.0));
            }
        }
    }

    #[test]
    fn seeded_and_thread_independent() {
        let d = MartingaleDriver::piecewise(vec![
            VolatilityPiece { from: 0.0, sigma: 0.3 },
            VolatilityPiece { from: 2.0, sigma: 0.1 },
        ])
        .unwrap();
        let grid = [1.0, 2.0, 3.0];
        let a = simulate_paths(&[&d, &d], &grid, 5_000, 9, -0.4).unwrap();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let b = pool.install(|| simulate_paths(&[&d, &d], &grid, 5_000, 9, -0.4).unwrap());
        assert_eq!(a, b);
        let c = simulate_paths(&[&d, &d], &grid, 5_000, 10, -0.4).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn correlation_of_log_increments() {
        let d = MartingaleDriver::constant(0.25).unwrap();
        let ens = simulate_paths(&[&d, &d], &[1.0], 50_000, 3, 0.5).unwrap();
        let xs: Vec<f64> = ens.m_at(1).iter().map(|v| v.ln()).collect();
        let ys: Vec<f64> = ens.n_at(1).unwrap().iter().map(|v| v.ln()).collect();
        let (mx, my) = (SampleStats::from_slice(&xs).mean, SampleStats::from_slice(&ys).mean);
        let cov: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum::<f64>() / xs.len() as f64;
        let corr = cov / 0.0625;
        assert!((corr - 0.5).abs() < 0.02, "corr {corr}");
    }

    #[test]
    fn csv_layout() {
        let d = MartingaleDriver::constant(0.0).unwrap();
        let ens = simulate_paths(&[&d], &[1.0], 2, 1, 0.0).unwrap();
        let mut out = Vec::new();
        ens.write_csv(&mut out, |v| format!("{v}")).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), "path,t,M\n0,0,1\n0,1,1\n1,0,1\n1,1,1\n");
    }
}
