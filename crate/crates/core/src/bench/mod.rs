//! Wall-clock sweeps and storage accounting.
//!
//! Every sweep runs 3 warmups per axis value, then `reps` rounds in which the
//! axis values are visited in a freshly shuffled order, so slow drift on the
//! host spreads over all values instead of biasing the largest ones.

mod fit;
mod size;
mod workload;

use std::fmt;
use std::io::Write;
use std::str::FromStr;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::{CryptoRng, RngCore};
use serde::Serialize;

pub use fit::{is_flat, linear_fit, LinearFit};
pub use size::{size_report, SizeRecord, Units};
pub use workload::{compare_search, SearchComparison};

use crate::error::{KaseError, Result};
use crate::format::Construction;
use crate::scheme::MAX_DOCUMENTS;

pub const WARMUPS: usize = 3;
pub const MIN_REPS: usize = 10;
/// Largest keyword-count axis value.
pub const MAX_KEYWORDS: u32 = 1 << 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algorithm {
    Setup,
    Encrypt,
    Extract,
    Trapdoor,
    Adjust,
    Test,
    SearchE2e,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    N,
    SetSize,
    Keywords,
}

impl Algorithm {
    pub const ALL: [Algorithm; 7] = [
        Algorithm::Setup,
        Algorithm::Encrypt,
        Algorithm::Extract,
        Algorithm::Trapdoor,
        Algorithm::Adjust,
        Algorithm::Test,
        Algorithm::SearchE2e,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Algorithm::Setup => "setup",
            Algorithm::Encrypt => "encrypt",
            Algorithm::Extract => "extract",
            Algorithm::Trapdoor => "trapdoor",
            Algorithm::Adjust => "adjust",
            Algorithm::Test => "test",
            Algorithm::SearchE2e => "search-e2e",
        }
    }

    /// The parameter each algorithm is swept over.
    pub fn axis(&self) -> Axis {
        match self {
            Algorithm::Setup | Algorithm::Trapdoor => Axis::N,
            Algorithm::Extract | Algorithm::Adjust => Axis::SetSize,
            Algorithm::Encrypt | Algorithm::Test | Algorithm::SearchE2e => Axis::Keywords,
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Algorithm {
    type Err = KaseError;
    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.as_str() == s)
            .ok_or_else(|| KaseError::param(format!("unknown algorithm `{s}`")))
    }
}

impl Axis {
    pub fn as_str(&self) -> &'static str {
        match self {
            Axis::N => "n",
            Axis::SetSize => "set_size",
            Axis::Keywords => "keywords",
        }
    }

    fn cap(&self) -> u32 {
        match self {
            Axis::N | Axis::SetSize => MAX_DOCUMENTS,
            Axis::Keywords => MAX_KEYWORDS,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BenchRecord {
    pub construction: Construction,
    pub algorithm: Algorithm,
    pub axis: Axis,
    pub value: u32,
    pub median_us: f64,
    pub p10_us: f64,
    pub p90_us: f64,
    pub reps: usize,
}

pub const CSV_HEADER: &str = "construction,algorithm,axis,value,median_us,p10_us,p90_us,reps";

impl BenchRecord {
    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{:.1},{:.1},{:.1},{}",
            self.construction,
            self.algorithm,
            self.axis.as_str(),
            self.value,
            self.median_us,
            self.p10_us,
            self.p90_us,
            self.reps
        )
    }
}

pub fn write_csv<W: Write>(mut w: W, records: &[BenchRecord]) -> Result<()> {
    writeln!(w, "{CSV_HEADER}")?;
    for r in records {
        writeln!(w, "{}", r.csv_row())?;
    }
    Ok(())
}

/// Linear-interpolated percentile of sorted samples, q in [0, 1].
pub fn percentile(sorted: &[f64], q: f64) -> f64 {
    assert!(!sorted.is_empty(), "percentile of no samples");
    let pos = q.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let (lo, hi) = (pos.floor() as usize, pos.ceil() as usize);
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

fn check_axis(axis: Axis, values: &[u32]) -> Result<()> {
    if values.is_empty() {
        return Err(KaseError::param("no axis values given"));
    }
    if values.windows(2).any(|w| w[0] >= w[1]) {
        return Err(KaseError::param("axis values must be strictly increasing"));
    }
    if let Some(v) = values.iter().find(|&&v| v == 0 || v > axis.cap()) {
        return Err(KaseError::param(format!(
            "{} = {v} is outside [1, {}]",
            axis.as_str(),
            axis.cap()
        )));
    }
    Ok(())
}

/// Times `algorithm` at each axis value.
pub fn bench_sweep<R: RngCore + CryptoRng>(
    algorithm: Algorithm,
    construction: Construction,
    values: &[u32],
    reps: usize,
    rng: &mut R,
) -> Result<Vec<BenchRecord>> {
    if reps < MIN_REPS {
        return Err(KaseError::param(format!("at least {MIN_REPS} repetitions are required")));
    }
    let axis = algorithm.axis();
    check_axis(axis, values)?;
    let mut jobs = values
        .iter()
        .map(|&v| workload::prepare(algorithm, construction, v, values, rng))
        .collect::<Result<Vec<_>>>()?;
    for job in jobs.iter_mut() {
        for _ in 0..WARMUPS {
            job()?;
        }
    }
    let mut samples = vec![Vec::with_capacity(reps); values.len()];
    let mut order: Vec<usize> = (0..values.len()).collect();
    for _ in 0..reps {
        order.shuffle(rng);
        for &k in &order {
            let start = Instant::now();
            jobs[k]()?;
            samples[k].push(start.elapsed().as_secs_f64() * 1e6);
        }
    }
    Ok(values
        .iter()
        .zip(samples)
        .map(|(&value, mut s)| {
            s.sort_by(f64::total_cmp);
            BenchRecord {
                construction,
                algorithm,
                axis,
                value,
                median_us: percentile(&s, 0.5),
                p10_us: percentile(&s, 0.1),
                p90_us: percentile(&s, 0.9),
                reps,
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    #[test]
    fn percentiles_interpolate() {
        let s = [1.0, 2.0, 3.0, 4.0, 5.0];
        assert_eq!(percentile(&s, 0.5), 3.0);
        assert_eq!(percentile(&s, 0.1), 1.4);
        assert_eq!(percentile(&s, 0.9), 4.6);
        assert_eq!(percentile(&[7.0], 0.9), 7.0);
    }

    #[test]
    fn axis_checks() {
        let mut r = ChaCha20Rng::seed_from_u64(120);
        let err = |v: &[u32], reps| bench_sweep(Algorithm::Setup, Construction::First, v, reps, &mut r.clone()).unwrap_err();
        assert!(matches!(err(&[2, 4], 3), KaseError::Parameter(_)));
        assert!(matches!(err(&[4, 2], 10), KaseError::Parameter(_)));
        assert!(matches!(err(&[MAX_DOCUMENTS + 1], 10), KaseError::Parameter(_)));
        assert!(matches!(err(&[], 10), KaseError::Parameter(_)));
        let ok = bench_sweep(Algorithm::Extract, Construction::Main, &[1, 2], 10, &mut r).unwrap();
        assert_eq!(ok.len(), 2);
        assert!(ok.iter().all(|b| b.p10_us <= b.median_us && b.median_us <= b.p90_us && b.reps == 10));
    }

    #[test]
    fn csv_shape() {
        let rec = BenchRecord {
            construction: Construction::Main,
            algorithm: Algorithm::SearchE2e,
            axis: Axis::Keywords,
            value: 50,
            median_us: 10.0,
            p10_us: 9.0,
            p90_us: 12.34,
            reps: 10,
        };
        let mut out = Vec::new();
        write_csv(&mut out, &[rec]).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert_eq!(text, format!("{CSV_HEADER}\nmain,search-e2e,keywords,50,10.0,9.0,12.3,10\n"));
    }

    #[test]
    fn every_algorithm_runs_small() {
        let mut r = ChaCha20Rng::seed_from_u64(121);
        for alg in Algorithm::ALL {
            for cons in [Construction::First, Construction::Main] {
                let recs = bench_sweep(alg, cons, &[1, 2], 10, &mut r).unwrap();
                assert_eq!(recs.len(), 2, "{alg}");
            }
        }
    }
}
