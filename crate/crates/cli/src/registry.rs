//! Named experiments with pinned seeds.

use serde_json::{json, Value};

use crate::experiment::ExperimentSpec;

/// Schedules shared by the coalescing, hitting, cover and spectra entries.
pub const METROPOLIS_SCHEDULES: usize = 10;

/// Shape of the `i`-th random Metropolis schedule: `n ∈ [8, 16]`, period
/// in `2..=5`.
pub fn metropolis_descriptor(i: usize) -> Value {
    json!({
        "construction": "random_dynamic",
        "n": 8 + (5 * i) % 9,
        "period": 2 + i % 4,
        "seed": 1_000 + i,
        "kernel": "lazy_metropolis"
    })
}

fn spec(id: &str, kind: &str, seed: u64, parameters: Value) -> ExperimentSpec {
    serde_json::from_value(json!({"id": id, "kind": kind, "seed": seed, "parameters": parameters}))
        .expect("registry entries are well formed")
}

fn graph(name: &str, n: usize, kernel: &str) -> Value {
    json!({"construction": "graph", "graph": name, "n": n, "kernel": kernel})
}

pub fn registry() -> Vec<ExperimentSpec> {
    let mut out = vec![spec("lemma-suite", "verify-lemmas", 1, json!({}))];
    out.push(spec("hit-oracle-cycle4", "spectra", 2, json!({"schedule": graph("cycle", 4, "lazy_simple")})));
    for n in [3, 5, 8] {
        out.push(spec(
            &format!("hit-oracle-complete{n}"),
            "spectra",
            2,
            json!({"schedule": graph("complete", n, "lazy_simple")}),
        ));
    }
    out.push(spec(
        "mc-hit-cycle4",
        "hit",
        3,
        json!({"schedule": graph("cycle", 4, "lazy_simple"), "starts": [0], "target": 2,
               "horizon": 10_000, "trials": 100_000}),
    ));
    out.push(spec(
        "duality-path3",
        "duality",
        4,
        json!({"schedule": graph("path", 3, "lazy_simple"), "j": [1, 2, 3]}),
    ));
    let third = 1.0 / 3.0;
    out.push(spec(
        "duality-k3-cyclic",
        "duality",
        4,
        json!({"schedule": {"construction": "inline", "schedule": {
            "kind": "cyclic",
            "period": 2,
            "matrices": [
                {"n": 3, "rows": [[0.5, 0.25, 0.25], [0.25, 0.5, 0.25], [0.25, 0.25, 0.5]]},
                {"n": 3, "rows": [[third, third, third], [third, third, third], [third, third, third]]}
            ]}}, "j": [1, 2, 3]}),
    ));
    out.push(spec(
        "win-prob-path5",
        "win-prob",
        5,
        json!({"schedule": graph("path", 5, "lazy_simple"), "opinions": [0, 1, 0, 0, 0], "sigma": 1,
               "horizon": 100_000, "trials": 200_000}),
    ));
    for n in 7..=10 {
        out.push(spec(
            &format!("sisyphus-{n}"),
            "hit",
            6,
            json!({"schedule": {"construction": "sisyphus", "n": n, "kernel": "lazy_simple"},
                   "starts": [0], "target": n - 1, "horizon": 1_000_000, "trials": 400}),
        ));
    }
    out.push(spec(
        "ot-meet-30",
        "meet",
        7,
        json!({"schedule": {"construction": "ot_double_star", "m": 30, "kernel": "lazy_simple"},
               "starts": [29, 59], "horizon": 100_000, "trials": 100}),
    ));
    let mut opinions = vec![0u32; 20];
    opinions.extend([1u32; 20]);
    out.push(spec(
        "ot-consensus-20",
        "vote",
        8,
        json!({"schedule": {"construction": "ot_double_star", "m": 20, "kernel": "lazy_simple"},
               "opinions": opinions, "horizon": 100_000, "trials": 1_000}),
    ));
    for i in 0..METROPOLIS_SCHEDULES {
        let d = metropolis_descriptor(i);
        out.push(spec(&format!("spectra-metropolis-{i}"), "spectra", 9, json!({"schedule": d})));
        out.push(spec(
            &format!("coalesce-metropolis-{i}"),
            "coalesce",
            10,
            json!({"schedule": d, "horizon": 1_000_000, "trials": 200}),
        ));
        out.push(spec(
            &format!("hit-metropolis-{i}"),
            "hit",
            11,
            json!({"schedule": d, "k": [1, 2, 4], "horizon": 1_000_000, "trials": 200}),
        ));
        out.push(spec(
            &format!("cover-metropolis-{i}"),
            "cover",
            12,
            json!({"schedule": d, "k": [1, 2, 4], "horizon": 1_000_000, "trials": 200}),
        ));
    }
    out.push(spec(
        "em-probe-200",
        "em-probe",
        13,
        json!({"n": 200, "p": 0.5, "q": 0.5, "samples": 200}),
    ));
    out
}

pub fn find(id: &str) -> Option<ExperimentSpec> {
    registry().into_iter().find(|s| s.id == id)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ids_are_unique() {
        let mut ids: Vec<String> = registry().into_iter().map(|s| s.id).collect();
        let total = ids.len();
        ids.sort();
        ids.dedup();
        assert_eq!(ids.len(), total);
        assert!(find("lemma-suite").is_some());
        assert!(find("nope").is_none());
    }

    #[test]
    fn metropolis_sizes_cover_the_range() {
        let ns: Vec<u64> = (0..METROPOLIS_SCHEDULES)
            .map(|i| metropolis_descriptor(i)["n"].as_u64().unwrap())
            .collect();
        assert_eq!(*ns.iter().min().unwrap(), 8);
        assert_eq!(*ns.iter().max().unwrap(), 16);
    }
}
