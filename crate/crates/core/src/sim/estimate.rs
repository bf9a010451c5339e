use serde::Serialize;

/// Two-sided normal quantiles.
pub const Z95: f64 = 1.96;
pub const Z99: f64 = 2.576;

/// Monte Carlo summary of a per-trial statistic.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EstimateReport {
    pub trials: usize,
    pub mean: f64,
    pub std_err: f64,
    /// `mean ± 1.96 std_err`.
    pub ci95: (f64, f64),
    /// Trials that reached the horizon without the event. Their value is
    /// the horizon, a lower bound.
    pub censored_count: usize,
}

impl EstimateReport {
    pub fn from_samples(samples: &[f64], censored_count: usize) -> Self {
        let trials = samples.len();
        let mean = if trials == 0 {
            f64::NAN
        } else {
            samples.iter().sum::<f64>() / trials as f64
        };
        let std_err = if trials < 2 {
            0.0
        } else {
            let ss: f64 = samples.iter().map(|x| (x - mean) * (x - mean)).sum();
            (ss / (trials as f64 - 1.0)).sqrt() / (trials as f64).sqrt()
        };
        EstimateReport {
            trials,
            mean,
            std_err,
            ci95: (mean - Z95 * std_err, mean + Z95 * std_err),
            censored_count,
        }
    }

    /// `(mean - z·se, mean + z·se)`.
    pub fn interval(&self, z: f64) -> (f64, f64) {
        (self.mean - z * self.std_err, self.mean + z * self.std_err)
    }

    pub fn censored_fraction(&self) -> f64 {
        self.censored_count as f64 / self.trials.max(1) as f64
    }
}

/// Per-trial outcome of a first-passage simulation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Hit(usize),
    Censored(usize),
}

impl Outcome {
    pub fn value(self) -> usize {
        match self {
            Outcome::Hit(t) | Outcome::Censored(t) => t,
        }
    }
}

pub fn summarize(outcomes: &[Outcome]) -> EstimateReport {
    let samples: Vec<f64> = outcomes.iter().map(|o| o.value() as f64).collect();
    let censored = outcomes
        .iter()
        .filter(|o| matches!(o, Outcome::Censored(_)))
        .count();
    EstimateReport::from_samples(&samples, censored)
}
